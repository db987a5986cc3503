//! Populations of set-valued records.
//!
//! A [`Dataset`] is a multiset of records, each a nonempty set of joint
//! configurations over the full frame: the most specific commitment that was
//! measured for one object. Empirical masses are relative frequencies of
//! projected records, and conditioning a population on an event rejects the
//! records that deny it and narrows the rest to their intersection with it.
//! Estimating after conditioning gives exactly Dempster conditioning of the
//! estimate.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{DsError, Result};
use crate::frames::{Bits, ConfigSet, Frame, Scope};
use crate::mass::MassFunction;

/// Random generator used for every seeded draw in the crate.
pub type SeededRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Clone, PartialEq)]
pub struct Dataset {
    frame: Arc<Frame>,
    scope: Scope,
    records: Vec<Bits>,
    provenance: String,
}

impl std::fmt::Debug for Dataset {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Dataset")
            .field("records", &self.records.len())
            .field("provenance", &self.provenance)
            .finish()
    }
}

impl Dataset {
    pub fn new(
        frame: &Arc<Frame>,
        records: Vec<ConfigSet>,
        provenance: impl Into<String>,
    ) -> Result<Dataset> {
        let scope = frame.full_scope();
        let mut bits = Vec::with_capacity(records.len());
        for (i, r) in records.into_iter().enumerate() {
            if *r.scope() != scope {
                return Err(DsError::Scope(format!(
                    "record {i} is over {:?}, not the full frame",
                    r.scope()
                )));
            }
            if r.is_empty() {
                return Err(DsError::Validation(format!("record {i} is empty")));
            }
            bits.push(r.into_bits());
        }
        Ok(Dataset {
            frame: Arc::clone(frame),
            scope,
            records: bits,
            provenance: provenance.into(),
        })
    }

    pub fn frame(&self) -> &Arc<Frame> {
        &self.frame
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    pub fn records(&self) -> impl Iterator<Item = ConfigSet> + '_ {
        self.records
            .iter()
            .map(|b| ConfigSet::from_bits(&self.scope, b.clone()))
    }

    /// Distinct records with their multiplicities, in first-seen order.
    fn grouped(&self) -> Vec<(&Bits, usize)> {
        let mut index: HashMap<&Bits, usize> = HashMap::new();
        let mut out: Vec<(&Bits, usize)> = Vec::new();
        for b in &self.records {
            match index.get(b) {
                Some(&i) => out[i].1 += 1,
                None => {
                    index.insert(b, out.len());
                    out.push((b, 1));
                }
            }
        }
        out
    }

    /// Relative frequencies of the records projected to `scope`.
    pub fn empirical_mass(&self, scope: &Scope) -> Result<MassFunction> {
        if self.records.is_empty() {
            return Err(DsError::EmptyDataset);
        }
        let map = self.scope.restriction_map(scope)?;
        let mut counts: BTreeMap<Bits, usize> = BTreeMap::new();
        for (b, c) in self.grouped() {
            let p = crate::frames::project_bits(b, &map, scope.config_count());
            *counts.entry(p).or_insert(0) += c;
        }
        let n = self.records.len() as f64;
        let focal = counts.into_iter().map(|(b, c)| (b, c as f64 / n)).collect();
        Ok(MassFunction::from_canonical(scope.clone(), focal))
    }

    /// Reject records disjoint from `event`, narrow the others to their
    /// intersection with it. Events over a subscope are cylinder-extended.
    pub fn condition(&self, event: &ConfigSet) -> Result<Dataset> {
        if event.is_empty() {
            return Err(DsError::DegenerateEvent(
                "conditioning on the empty set".into(),
            ));
        }
        let event = event.cylinder(&self.scope)?;
        let records: Vec<Bits> = self
            .records
            .iter()
            .map(|r| r.and(event.bits()))
            .filter(|r| !r.is_zero())
            .collect();
        if records.is_empty() {
            return Err(DsError::EmptyConditionedPopulation);
        }
        Ok(Dataset {
            frame: Arc::clone(&self.frame),
            scope: self.scope.clone(),
            records,
            provenance: format!("{} | conditioned", self.provenance),
        })
    }

    /// Parse the line-oriented dataset format.
    pub fn parse(text: &str) -> Result<Dataset> {
        let mut frame: Option<Arc<Frame>> = None;
        let mut records = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim();
            if let Some(decl) = line.strip_prefix("#vars") {
                if frame.is_some() {
                    return Err(parse_err(line_no, "second #vars header"));
                }
                frame = Some(parse_frame_decl(decl.trim()).map_err(|e| parse_err(line_no, e))?);
                continue;
            }
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let f = frame
                .as_ref()
                .ok_or_else(|| parse_err(line_no, "record before the #vars header"))?;
            let rec = parse_record(f, line).map_err(|e| parse_err(line_no, e))?;
            records.push(rec);
        }
        let frame = frame.ok_or_else(|| parse_err(0, "missing #vars header"))?;
        Dataset::new(&frame, records, "parsed")
    }

    pub fn read(path: &Path) -> Result<Dataset> {
        let text = std::fs::read_to_string(path)?;
        let mut ds = Dataset::parse(&text)?;
        ds.provenance = format!("file {}", path.display());
        Ok(ds)
    }

    /// Serialize; product records are written per variable, others as `J:` rows.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "#vars {}", frame_decl(&self.frame)).unwrap();
        if !self.provenance.is_empty() {
            writeln!(out, "# provenance: {}", self.provenance.replace('\n', " ")).unwrap();
        }
        for r in self.records() {
            out.push_str(&record_text(&r));
            out.push('\n');
        }
        out
    }
}

fn parse_err(line: usize, msg: impl ToString) -> DsError {
    DsError::Parse {
        line,
        msg: msg.to_string(),
    }
}

/// `X=a|b,Y=c|d`
pub fn frame_decl(frame: &Frame) -> String {
    frame
        .variables()
        .iter()
        .map(|v| format!("{}={}", v.name(), v.labels().join("|")))
        .collect::<Vec<_>>()
        .join(",")
}

pub fn parse_frame_decl(decl: &str) -> Result<Arc<Frame>> {
    let mut vars = Vec::new();
    for part in decl.split(',') {
        let (name, labels) = part
            .split_once('=')
            .ok_or_else(|| DsError::Validation(format!("bad variable declaration {part:?}")))?;
        vars.push((
            name.trim().to_string(),
            labels
                .split('|')
                .map(|l| l.trim().to_string())
                .collect::<Vec<_>>(),
        ));
    }
    Frame::new(vars)
}

/// A record row: per-variable value sets, or `J:` with explicit configurations.
pub fn parse_record(frame: &Arc<Frame>, line: &str) -> Result<ConfigSet> {
    let scope = frame.full_scope();
    if let Some(list) = line.strip_prefix("J:") {
        return parse_config_list(&scope, list);
    }
    let cells: Vec<&str> = line.split(',').collect();
    if cells.len() != frame.len() {
        return Err(DsError::Validation(format!(
            "expected {} comma-separated cells, found {}",
            frame.len(),
            cells.len()
        )));
    }
    let mut parts = Vec::with_capacity(cells.len());
    for (v, cell) in cells.iter().enumerate() {
        let var_scope = scope.with_vars(vec![v]);
        let var = frame.variable(v);
        let mut idx = Vec::new();
        for label in cell.split('|') {
            idx.push(var.label_index(label.trim())?);
        }
        let set = ConfigSet::from_indices(&var_scope, idx)?;
        if set.is_empty() {
            return Err(DsError::Validation(format!(
                "empty value set for {}",
                var.name()
            )));
        }
        parts.push(set);
    }
    ConfigSet::product(&parts)
}

/// `a.c;b.d` over `scope` (labels in scope order).
pub fn parse_config_list(scope: &Scope, list: &str) -> Result<ConfigSet> {
    let mut idx = Vec::new();
    for cfg in list.split(';') {
        let labels: Vec<&str> = cfg.split('.').map(str::trim).collect();
        if labels.len() != scope.len() {
            return Err(DsError::Validation(format!(
                "configuration {cfg:?} has {} labels, scope has {} variables",
                labels.len(),
                scope.len()
            )));
        }
        let values = labels
            .iter()
            .zip(scope.vars())
            .map(|(l, &v)| scope.frame().variable(v).label_index(l))
            .collect::<Result<Vec<_>>>()?;
        idx.push(scope.encode(&values));
    }
    let set = ConfigSet::from_indices(scope, idx)?;
    if set.is_empty() {
        return Err(DsError::Validation("empty configuration list".into()));
    }
    Ok(set)
}

/// Reject records disjoint from `event` and narrow the rest; see [`Dataset::condition`].
pub fn condition_population(ds: &Dataset, event: &ConfigSet) -> Result<Dataset> {
    ds.condition(event)
}

/// Parse an event over the variables it names.
///
/// Either per-variable value-set constraints, `X1=a|b,X3=c`, giving a
/// product event, or an explicit configuration list, `X1,X2:a.c;b.d`.
pub fn parse_event(frame: &Arc<Frame>, expr: &str) -> Result<ConfigSet> {
    let expr = expr.trim();
    if let Some((vars, list)) = expr.split_once(':') {
        let names: Vec<&str> = vars.split(',').map(str::trim).collect();
        let scope = frame.scope_of(&names)?;
        if scope.names() != names {
            return Err(DsError::Validation(format!(
                "list the event variables once each in frame order: {}",
                scope.names().join(",")
            )));
        }
        return parse_config_list(&scope, list);
    }
    let mut parts = Vec::new();
    let mut seen = Vec::new();
    for clause in expr.split(',') {
        let (name, values) = clause
            .split_once('=')
            .ok_or_else(|| DsError::Validation(format!("bad event constraint {clause:?}")))?;
        let v = frame.var_index(name.trim())?;
        if seen.contains(&v) {
            return Err(DsError::Validation(format!(
                "{} constrained twice",
                name.trim()
            )));
        }
        seen.push(v);
        let var = frame.variable(v);
        let idx = values
            .split('|')
            .map(|l| var.label_index(l.trim()))
            .collect::<Result<Vec<_>>>()?;
        parts.push(ConfigSet::from_indices(&Scope::new(frame, vec![v]), idx)?);
    }
    ConfigSet::product(&parts)
}

pub fn config_list_text(set: &ConfigSet) -> String {
    set.indices()
        .map(|i| set.scope().labels_of(i).join("."))
        .collect::<Vec<_>>()
        .join(";")
}

pub fn record_text(set: &ConfigSet) -> String {
    match set.decompose_product() {
        Some(parts) if !set.is_empty() => parts
            .iter()
            .map(|p| {
                p.indices()
                    .map(|i| p.scope().labels_of(i)[0].to_string())
                    .collect::<Vec<_>>()
                    .join("|")
            })
            .collect::<Vec<_>>()
            .join(","),
        _ => format!("J:{}", config_list_text(set)),
    }
}

/// Draw `n` records i.i.d. with probability equal to mass.
pub fn sample_population(m: &MassFunction, n: usize, seed: u64) -> Result<Dataset> {
    if !m.is_proper() {
        return Err(DsError::SamplingUndefined);
    }
    if n == 0 {
        return Err(DsError::Validation("sample size must be at least 1".into()));
    }
    let frame = Arc::clone(m.scope().frame());
    let full = frame.full_scope();
    let m = m.extend(&full)?;
    let focal: Vec<(&Bits, f64)> = m.focal_bits().collect();
    let mut cumulative = Vec::with_capacity(focal.len());
    let mut acc = 0.0;
    for &(_, v) in &focal {
        acc += v;
        cumulative.push(acc);
    }
    let mut rng = seeded_rng(seed);
    let mut records = Vec::with_capacity(n);
    for _ in 0..n {
        let u: f64 = rng.gen::<f64>() * acc;
        let k = cumulative.partition_point(|&c| c <= u).min(focal.len() - 1);
        records.push(focal[k].0.clone());
    }
    Ok(Dataset {
        frame,
        scope: full,
        records,
        provenance: format!("sampled n={n} seed={seed}"),
    })
}
