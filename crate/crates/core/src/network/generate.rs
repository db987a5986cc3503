//! Seeded random tree/polytree structures and network valuations.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;

use super::{family_scope, BeliefNetwork, Dag};
use crate::error::{DsError, Result};
use crate::frames::{Bits, Frame, Scope};
use crate::mass::{MassFunction, ALGEBRA_TOL};
use crate::population::{seeded_rng, SeededRng};

fn random_skeleton(n: usize, rng: &mut SeededRng) -> Result<Vec<(usize, usize)>> {
    if n < 2 {
        return Err(DsError::Validation(format!(
            "a random structure needs at least 2 nodes, got {n}"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    // random recursive tree: each node attaches to an earlier one
    Ok((1..n)
        .map(|i| (order[rng.gen_range(0..i)], order[i]))
        .collect())
}

/// Random tree with edges oriented away from a random root.
pub fn random_tree_structure(n: usize, seed: u64) -> Result<Dag> {
    let mut rng = seeded_rng(seed);
    let edges = random_skeleton(n, &mut rng)?;
    Dag::new(n, &edges)
}

/// Random polytree: a random tree skeleton with random edge orientations,
/// redrawn until some node has two parents (for `n >= 3`).
pub fn random_polytree_structure(n: usize, seed: u64) -> Result<Dag> {
    let mut rng = seeded_rng(seed);
    let skeleton = random_skeleton(n, &mut rng)?;
    loop {
        let edges: Vec<(usize, usize)> = skeleton
            .iter()
            .map(|&(a, b)| if rng.gen::<bool>() { (a, b) } else { (b, a) })
            .collect();
        let dag = Dag::new(n, &edges)?;
        if n < 3 || !dag.colliders().is_empty() {
            return Ok(dag);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StructureKind {
    Tree,
    Polytree,
}

impl std::str::FromStr for StructureKind {
    type Err = DsError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tree" => Ok(StructureKind::Tree),
            "polytree" => Ok(StructureKind::Polytree),
            _ => Err(DsError::Validation(format!("unknown structure kind {s:?}"))),
        }
    }
}

impl std::fmt::Display for StructureKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            StructureKind::Tree => "tree",
            StructureKind::Polytree => "polytree",
        })
    }
}

/// Random structure of the given kind over the variables of `frame`, then
/// random valuations; both drawn from `seed`.
pub fn generate_network(
    kind: StructureKind,
    frame: &Arc<Frame>,
    cfg: &GenConfig,
    seed: u64,
) -> Result<BeliefNetwork> {
    let dag = match kind {
        StructureKind::Tree => random_tree_structure(frame.len(), seed)?,
        StructureKind::Polytree => random_polytree_structure(frame.len(), seed)?,
    };
    random_network(&dag, frame, cfg, seed)
}

#[derive(Debug, Clone)]
pub struct GenConfig {
    /// Number of focal sets drawn per node valuation (capped by the number
    /// of admissible sets).
    pub focal_budget: usize,
    /// Redraws allowed per node before generation fails.
    pub max_resamples: usize,
    /// Redraw valuations that carry no dependence: a root with a single
    /// focal set, a child whose focal sets ignore its parents, or a child
    /// with a value admitted under every parent configuration by every focal
    /// set (such a child never couples its parents). Also redraw a child
    /// that is independent of one of its parents in the joint.
    pub require_dependence: bool,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            focal_budget: 3,
            max_resamples: 32,
            require_dependence: true,
        }
    }
}

/// Random proper valuations for every node of `dag`.
///
/// A node's focal sets are drawn so that their projection onto the parent
/// scope is the whole parent frame: each one assigns every parent
/// configuration a nonempty set of child values. The valuation then
/// marginalizes to the vacuous mass on the parents, which is what makes
/// d-separation in `dag` imply independence in the joint. Masses are a
/// normalized vector of unit exponentials.
pub fn random_network(
    dag: &Dag,
    frame: &Arc<Frame>,
    cfg: &GenConfig,
    seed: u64,
) -> Result<BeliefNetwork> {
    if cfg.focal_budget == 0 {
        return Err(DsError::Validation(
            "focal budget must be at least 1".into(),
        ));
    }
    if dag.len() != frame.len() {
        return Err(DsError::Validation(format!(
            "dag has {} nodes, frame {} variables",
            dag.len(),
            frame.len()
        )));
    }
    let mut rng = seeded_rng(seed);
    let mut valuations: Vec<Option<MassFunction>> = vec![None; dag.len()];
    let mut running = MassFunction::vacuous(&frame.full_scope());
    for v in dag.topological_order() {
        let family = family_scope(frame, dag, v);
        let mut attempt = 0;
        loop {
            if attempt > cfg.max_resamples {
                return Err(DsError::GenerationFailure(format!(
                    "node {} still unusable after {} redraws",
                    frame.variable(v).name(),
                    cfg.max_resamples
                )));
            }
            attempt += 1;
            let m = random_valuation(&family, v, dag.parents(v), cfg, &mut rng)?;
            let Some(m) = m else { continue };
            match running.combine(&m) {
                Ok(next) => {
                    if cfg.require_dependence && !edges_dependent(&next, v, dag.parents(v))? {
                        continue;
                    }
                    running = next;
                    valuations[v] = Some(m);
                    break;
                }
                Err(DsError::TotalConflict { .. }) => continue,
                Err(e) => return Err(e),
            }
        }
    }
    let valuations = valuations
        .into_iter()
        .map(|m| m.expect("every node visited"))
        .collect();
    BeliefNetwork::new(frame, dag.clone(), valuations)
}

/// Whether every parent-child pair marginal of `joint` differs from the
/// product of its one-variable marginals. Later nodes are vacuous on their
/// parents, so these pair marginals are final once `child` is combined.
fn edges_dependent(joint: &MassFunction, child: usize, parents: &[usize]) -> Result<bool> {
    let frame = joint.scope().frame();
    let mc = joint.marginalize(&Scope::new(frame, vec![child]))?;
    for &p in parents {
        let pair = joint.marginalize(&Scope::new(frame, vec![p, child]))?;
        let product = joint
            .marginalize(&Scope::new(frame, vec![p]))?
            .combine(&mc)?;
        if pair.l1_distance(&product)? <= ALGEBRA_TOL {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `None` when the draw violates `require_dependence`.
fn random_valuation(
    family: &Scope,
    child: usize,
    parents: &[usize],
    cfg: &GenConfig,
    rng: &mut SeededRng,
) -> Result<Option<MassFunction>> {
    let frame = family.frame();
    let parent_scope = Scope::new(frame, parents.to_vec());
    let child_size = frame.variable(child).size();
    if child_size > 63 {
        return Err(DsError::Capacity(format!(
            "random valuations support domains of at most 63 values, {} has {child_size}",
            frame.variable(child).name()
        )));
    }
    let to_parent = family.restriction_map(&parent_scope)?;
    let to_child = family.restriction_map(&Scope::new(frame, vec![child]))?;
    let rows = parent_scope.config_count();

    // admissible sets: one nonempty child-value subset per parent configuration
    let per_row = (1u128 << child_size) - 1;
    let admissible = (0..rows).try_fold(1u128, |acc, _| acc.checked_mul(per_row));
    let budget = match admissible {
        Some(a) if a < cfg.focal_budget as u128 => a as usize,
        _ => cfg.focal_budget,
    };

    let mut chosen: BTreeSet<Vec<u64>> = BTreeSet::new();
    let mut tries = 0;
    while chosen.len() < budget && tries < 64 * budget {
        tries += 1;
        let row_sets: Vec<u64> = (0..rows)
            .map(|_| loop {
                let s: u64 = rng.gen::<u64>() & ((1u64 << child_size) - 1);
                if s != 0 {
                    break s;
                }
            })
            .collect();
        chosen.insert(row_sets);
    }

    if cfg.require_dependence {
        let informative = if parents.is_empty() {
            chosen.len() >= 2 || budget < 2
        } else {
            let always = chosen
                .iter()
                .flatten()
                .fold((1u64 << child_size) - 1, |acc, &r| acc & r);
            always == 0 && chosen.iter().any(|rs| rs.iter().any(|&r| r != rs[0]))
        };
        if !informative {
            return Ok(None);
        }
    }

    let mut focal = BTreeMap::new();
    let weights: Vec<f64> = (0..chosen.len())
        .map(|_| -(1.0 - rng.gen::<f64>()).ln())
        .collect();
    let total: f64 = weights.iter().sum();
    for (row_sets, w) in chosen.into_iter().zip(weights) {
        let mut bits = Bits::zeros(family.config_count());
        for cfg_idx in 0..family.config_count() {
            let row = row_sets[to_parent[cfg_idx]];
            if row >> to_child[cfg_idx] & 1 == 1 {
                bits.set(cfg_idx);
            }
        }
        focal.insert(bits, w / total);
    }
    Ok(Some(MassFunction::from_canonical(family.clone(), focal)))
}
