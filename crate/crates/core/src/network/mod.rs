//! Dempster-Shafer belief networks.
//!
//! A network pairs a [`Dag`] over the variables of a frame with one valuation
//! per node over its family scope (the node and its parents). The underlying
//! joint distribution is the Dempster combination of all valuations.

mod dag;
mod generate;
mod io;

use std::sync::Arc;

pub use dag::{dsep, Dag};
pub use generate::{
    generate_network, random_network, random_polytree_structure, random_tree_structure, GenConfig,
    StructureKind,
};
pub use io::{parse_network, write_network};

use crate::error::{DsError, Result};
use crate::frames::{Frame, Scope};
use crate::mass::{MassFunction, RESIDUAL_TOL};

#[derive(Debug, Clone)]
pub struct BeliefNetwork {
    frame: Arc<Frame>,
    dag: Dag,
    valuations: Vec<MassFunction>,
}

impl BeliefNetwork {
    pub fn new(frame: &Arc<Frame>, dag: Dag, valuations: Vec<MassFunction>) -> Result<Self> {
        if dag.len() != frame.len() || valuations.len() != frame.len() {
            return Err(DsError::Validation(format!(
                "frame has {} variables, dag {} nodes, {} valuations",
                frame.len(),
                dag.len(),
                valuations.len()
            )));
        }
        for (v, m) in valuations.iter().enumerate() {
            let family = family_scope(frame, &dag, v);
            if *m.scope() != family {
                return Err(DsError::Scope(format!(
                    "valuation of {} is over {:?}, family is {:?}",
                    frame.variable(v).name(),
                    m.scope(),
                    family
                )));
            }
        }
        Ok(BeliefNetwork {
            frame: Arc::clone(frame),
            dag,
            valuations,
        })
    }

    pub fn frame(&self) -> &Arc<Frame> {
        &self.frame
    }

    pub fn dag(&self) -> &Dag {
        &self.dag
    }

    pub fn valuations(&self) -> &[MassFunction] {
        &self.valuations
    }

    pub fn family_scope(&self, v: usize) -> Scope {
        family_scope(&self.frame, &self.dag, v)
    }

    /// Combination of all node valuations in topological order, over the full frame.
    pub fn underlying_distribution(&self) -> Result<MassFunction> {
        self.underlying_in_order(&self.dag.topological_order())
    }

    /// Combination in an arbitrary node order.
    pub fn underlying_in_order(&self, order: &[usize]) -> Result<MassFunction> {
        let mut sorted = order.to_vec();
        sorted.sort_unstable();
        if sorted != (0..self.frame.len()).collect::<Vec<_>>() {
            return Err(DsError::Validation(
                "combination order must list every node once".into(),
            ));
        }
        let mut acc = MassFunction::vacuous(&self.frame.full_scope());
        for &v in order {
            acc = acc.combine(&self.valuations[v])?;
        }
        Ok(acc)
    }
}

pub(crate) fn family_scope(frame: &Arc<Frame>, dag: &Dag, v: usize) -> Scope {
    let mut vars = dag.parents(v).to_vec();
    vars.push(v);
    Scope::new(frame, vars)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    Independent,
    Dependent,
    /// The mk-conditional could not be formed; neither verdict applies.
    Inconclusive(String),
}

/// Outcome of testing `I(X_J, X_K | X_L)`.
#[derive(Debug, Clone, PartialEq)]
pub struct IndependenceStatement {
    pub j: Vec<usize>,
    pub k: Vec<usize>,
    pub l: Vec<usize>,
    pub verdict: Verdict,
    /// L1 distance between both sides of the defining equation, when computed.
    pub residual: Option<f64>,
}

impl IndependenceStatement {
    pub fn is_independent(&self) -> bool {
        self.verdict == Verdict::Independent
    }
}

/// Test `X_J` and `X_K` for conditional independence given `X_L` in `m`.
///
/// Both sides of
/// `m↓JKL|L ⊕ m↓L = m↓JL|L ⊕ m↓KL|L ⊕ m↓L`
/// are evaluated. The left side equals `m↓JKL` by the defining equation of
/// the mk-conditional. On the right, `m↓JL|L ⊕ m↓L` is replaced by `m↓JL`
/// for the same reason, leaving one mk-conditional to solve.
pub fn indep_test(
    m: &MassFunction,
    j: &[usize],
    k: &[usize],
    l: &[usize],
    eps: f64,
) -> Result<IndependenceStatement> {
    let frame = m.scope().frame();
    if j.is_empty() || k.is_empty() {
        return Err(DsError::Validation("J and K must be nonempty".into()));
    }
    let mut all: Vec<usize> = j.iter().chain(k).chain(l).copied().collect();
    if let Some(&v) = all.iter().find(|&&v| v >= frame.len()) {
        return Err(DsError::Domain(format!("unknown variable index {v}")));
    }
    all.sort_unstable();
    if all.windows(2).any(|w| w[0] == w[1]) {
        return Err(DsError::Validation(
            "J, K and L must be pairwise disjoint".into(),
        ));
    }
    let s = |vars: Vec<usize>| Scope::new(frame, vars);
    let jkl = s(all);
    if !jkl.is_subset_of(m.scope()) {
        return Err(DsError::Scope(format!(
            "{jkl:?} is not within {:?}",
            m.scope()
        )));
    }
    let jl = s(j.iter().chain(l).copied().collect());
    let kl = s(k.iter().chain(l).copied().collect());
    let l_scope = s(l.to_vec());

    let statement = |verdict, residual| IndependenceStatement {
        j: j.to_vec(),
        k: k.to_vec(),
        l: l.to_vec(),
        verdict,
        residual,
    };

    let left = m.marginalize(&jkl)?;
    let cond_k = match m
        .marginalize(&kl)?
        .mk_conditional_with(&l_scope, RESIDUAL_TOL)
    {
        Ok(c) => c,
        Err(DsError::NoSolution(why)) => return Ok(statement(Verdict::Inconclusive(why), None)),
        Err(e) => return Err(e),
    };
    let right = match m.marginalize(&jl)?.combine(&cond_k) {
        Ok(r) => r.extend(&jkl)?,
        Err(e @ (DsError::TotalConflict { .. } | DsError::VanishingNormalizer { .. })) => {
            return Ok(statement(Verdict::Inconclusive(e.to_string()), None))
        }
        Err(e) => return Err(e),
    };
    let residual = left.l1_distance(&right)?;
    let verdict = if residual <= eps {
        Verdict::Independent
    } else {
        Verdict::Dependent
    };
    Ok(statement(verdict, Some(residual)))
}
