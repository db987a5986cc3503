//! JSON network documents.
//!
//! ```json
//! {
//!   "format": "dsnet-network",
//!   "version": 1,
//!   "frame": [{ "name": "X1", "values": ["0", "1"] }, ...],
//!   "edges": ["X1->X2", ...],
//!   "valuations": [
//!     { "node": "X2", "scope": ["X1", "X2"],
//!       "focal": [{ "set": "0.0;1.1", "mass": 2.5000000000000000e-1 }, ...] }
//!   ]
//! }
//! ```
//!
//! A set expression lists configurations of the family scope separated by
//! `;`, each a `.`-joined label tuple in `scope` order (frame declaration
//! order). Masses are written with 17 significant digits.

use std::io;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};

use super::{BeliefNetwork, Dag};
use crate::error::{DsError, Result};
use crate::frames::Frame;
use crate::mass::MassFunction;
use crate::population::{config_list_text, parse_config_list};

const FORMAT: &str = "dsnet-network";

#[derive(Serialize, Deserialize)]
struct Doc {
    format: String,
    version: u32,
    frame: Vec<VarDoc>,
    edges: Vec<String>,
    valuations: Vec<ValuationDoc>,
}

#[derive(Serialize, Deserialize)]
struct VarDoc {
    name: String,
    values: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct ValuationDoc {
    node: String,
    scope: Vec<String>,
    focal: Vec<FocalDoc>,
}

#[derive(Serialize, Deserialize)]
struct FocalDoc {
    set: String,
    mass: f64,
}

pub fn write_network(net: &BeliefNetwork) -> String {
    let frame = net.frame();
    let name = |v: usize| frame.variable(v).name().to_string();
    let doc = Doc {
        format: FORMAT.into(),
        version: 1,
        frame: frame
            .variables()
            .iter()
            .map(|v| VarDoc {
                name: v.name().into(),
                values: v.labels().to_vec(),
            })
            .collect(),
        edges: net
            .dag()
            .edges()
            .into_iter()
            .map(|(p, c)| format!("{}->{}", name(p), name(c)))
            .collect(),
        valuations: net
            .valuations()
            .iter()
            .enumerate()
            .map(|(v, m)| ValuationDoc {
                node: name(v),
                scope: m.scope().names().into_iter().map(String::from).collect(),
                focal: m
                    .iter()
                    .map(|(set, mass)| FocalDoc {
                        set: config_list_text(&set),
                        mass,
                    })
                    .collect(),
            })
            .collect(),
    };
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, Sig17(PrettyFormatter::new()));
    doc.serialize(&mut ser).expect("serializing to memory");
    out.push(b'\n');
    String::from_utf8(out).expect("json is utf-8")
}

pub fn parse_network(text: &str) -> Result<BeliefNetwork> {
    let doc: Doc = serde_json::from_str(text).map_err(|e| DsError::Parse {
        line: e.line(),
        msg: e.to_string(),
    })?;
    if doc.format != FORMAT || doc.version != 1 {
        return Err(DsError::Validation(format!(
            "unsupported network document {} v{}",
            doc.format, doc.version
        )));
    }
    let frame = Frame::new(doc.frame.into_iter().map(|v| (v.name, v.values)))?;
    let mut edges = Vec::with_capacity(doc.edges.len());
    for e in &doc.edges {
        let (p, c) = e
            .split_once("->")
            .ok_or_else(|| DsError::Validation(format!("bad edge {e:?}")))?;
        edges.push((frame.var_index(p.trim())?, frame.var_index(c.trim())?));
    }
    let dag = Dag::new(frame.len(), &edges)?;
    let mut valuations: Vec<Option<MassFunction>> = vec![None; frame.len()];
    for val in doc.valuations {
        let v = frame.var_index(&val.node)?;
        let family = super::family_scope(&frame, &dag, v);
        let declared: Vec<&str> = val.scope.iter().map(String::as_str).collect();
        if declared != family.names() {
            return Err(DsError::Scope(format!(
                "valuation of {} declares scope {:?}, family is {:?}",
                val.node, declared, family
            )));
        }
        let entries = val
            .focal
            .iter()
            .map(|f| Ok((parse_config_list(&family, &f.set)?, f.mass)))
            .collect::<Result<Vec<_>>>()?;
        if valuations[v].is_some() {
            return Err(DsError::Validation(format!(
                "duplicate valuation for {}",
                val.node
            )));
        }
        valuations[v] = Some(MassFunction::new(&family, entries)?);
    }
    let valuations = valuations
        .into_iter()
        .enumerate()
        .map(|(v, m)| {
            m.ok_or_else(|| {
                DsError::Validation(format!("no valuation for {}", frame.variable(v).name()))
            })
        })
        .collect::<Result<Vec<_>>>()?;
    BeliefNetwork::new(&Arc::clone(&frame), dag, valuations)
}

/// Pretty JSON with floats printed to 17 significant digits.
struct Sig17<'a>(PrettyFormatter<'a>);

impl Formatter for Sig17<'_> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + io::Write>(
        &mut self,
        w: &mut W,
        first: bool,
    ) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + io::Write>(
        &mut self,
        w: &mut W,
        first: bool,
    ) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}
