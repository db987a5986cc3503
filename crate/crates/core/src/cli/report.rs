//! TSV reports: a `#`-prefixed header block with the run configuration,
//! followed by tab-separated rows whose first cell names the row kind.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use crate::error::{DsError, Result};
use crate::frames::Frame;
use crate::learners::{CandidateCollider, LearnedStructure};

/// Everything that determines a run; embedded in every report.
#[derive(Debug, Clone, Default)]
pub struct RunConfig {
    pub command: String,
    pub seed: u64,
    pub inputs: Vec<String>,
    pub out: Option<String>,
    pub n: Option<usize>,
    pub focal_budget: Option<usize>,
    pub epsilon: Option<f64>,
    pub theta: Option<f64>,
    pub exact: bool,
    /// Command-specific settings in the order given.
    pub settings: Vec<(String, String)>,
}

impl RunConfig {
    pub fn new(command: &str, seed: u64) -> Self {
        RunConfig {
            command: command.into(),
            seed,
            ..RunConfig::default()
        }
    }

    pub fn set(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.settings.push((key.into(), value.to_string()));
        self
    }

    pub fn header(&self) -> String {
        let mut h = String::new();
        let mut line = |k: &str, v: &str| writeln!(h, "# {k}\t{v}").unwrap();
        line("dsnet", env!("CARGO_PKG_VERSION"));
        line("command", &self.command);
        line("seed", &self.seed.to_string());
        for (i, p) in self.inputs.iter().enumerate() {
            line(&format!("input{}", i + 1), p);
        }
        line("out", self.out.as_deref().unwrap_or("-"));
        if let Some(n) = self.n {
            line("n", &n.to_string());
        }
        if let Some(b) = self.focal_budget {
            line("focal_budget", &b.to_string());
        }
        if let Some(e) = self.epsilon {
            line("epsilon", &fmt_f64(e));
        }
        if let Some(t) = self.theta {
            line("theta", &fmt_f64(t));
        }
        line("exact", if self.exact { "true" } else { "false" });
        line("format", "tsv");
        for (k, v) in &self.settings {
            line(k, v);
        }
        h
    }
}

/// 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Write `contents` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| DsError::Io(e.to_string()))?;
    Ok(())
}

fn orientation(s: &LearnedStructure, a: usize, b: usize) -> &'static str {
    if s.is_oriented(a, b) {
        "->"
    } else if s.is_oriented(b, a) {
        "<-"
    } else {
        "--"
    }
}

/// Rows of a learned-structure report.
pub fn structure_rows(s: &LearnedStructure) -> String {
    let mut out = String::new();
    let name = |v: usize| s.names[v].as_str();
    writeln!(out, "# variables\t{}", s.names.join(",")).unwrap();
    writeln!(out, "#edge\tx1\tx2\tdep0\torientation").unwrap();
    for &(a, b, w) in &s.skeleton {
        writeln!(
            out,
            "edge\t{}\t{}\t{}\t{}",
            name(a),
            name(b),
            fmt_f64(w),
            orientation(s, a, b)
        )
        .unwrap();
    }
    if !s.colliders.is_empty() {
        writeln!(out, "#collider\tx1\tx2\tx3\tcriterion\tverdict").unwrap();
    }
    for CandidateCollider {
        x1,
        x2,
        x3,
        value,
        accepted,
    } in &s.colliders
    {
        let (v, verdict) = match value {
            Some(v) => (
                fmt_f64(*v),
                if *accepted {
                    "head-to-head"
                } else {
                    "rejected"
                },
            ),
            None => ("nan".to_string(), "failed"),
        };
        writeln!(
            out,
            "collider\t{}\t{}\t{}\t{v}\t{verdict}",
            name(*x1),
            name(*x2),
            name(*x3)
        )
        .unwrap();
    }
    for w in &s.warnings {
        writeln!(out, "warning\t{}", w.replace(['\t', '\n'], " ")).unwrap();
    }
    out
}

/// Read the skeleton and orientations of a learn report, indexing variables
/// by `frame`.
pub fn parse_structure_report(text: &str, frame: &Frame) -> Result<LearnedStructure> {
    let names: Vec<String> = frame
        .variables()
        .iter()
        .map(|v| v.name().to_string())
        .collect();
    let mut skeleton = Vec::new();
    let mut oriented = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let err = |msg: String| DsError::Parse { line: i + 1, msg };
        let cells: Vec<&str> = line.split('\t').collect();
        if cells[0] != "edge" {
            continue;
        }
        if cells.len() != 5 {
            return Err(err(format!(
                "edge row has {} cells, expected 5",
                cells.len()
            )));
        }
        let a = frame.var_index(cells[1]).map_err(|e| err(e.to_string()))?;
        let b = frame.var_index(cells[2]).map_err(|e| err(e.to_string()))?;
        if a == b {
            return Err(err("edge joins a variable to itself".into()));
        }
        let w: f64 = cells[3]
            .parse()
            .map_err(|_| err(format!("bad weight {:?}", cells[3])))?;
        match cells[4] {
            "->" => oriented.push((a, b)),
            "<-" => oriented.push((b, a)),
            "--" => {}
            o => return Err(err(format!("bad orientation {o:?}"))),
        }
        skeleton.push((a.min(b), a.max(b), w));
    }
    oriented.sort_unstable();
    Ok(LearnedStructure {
        names,
        skeleton,
        oriented,
        colliders: Vec::new(),
        warnings: Vec::new(),
    })
}
