//! Tree and polytree structure learning from dependence scores.
//!
//! [`learn_tree`] builds a maximum-weight spanning tree over `dep0` weights.
//! [`learn_polytree`] orients that skeleton: two skeleton neighbours `X1,X2`
//! of `X3` whose [`criterion`] exceeds `θ` form a head-to-head meeting, and
//! orientations then propagate outward through non-colliding meetings.

use std::collections::{BTreeMap, BTreeSet};

use log::warn;
use rayon::prelude::*;

use crate::dependence::{criterion, dep0, ScoreContext};
use crate::error::{DsError, ErrorClass, Result};
use crate::mass::ALGEBRA_TOL;
use crate::network::Dag;

/// Learner output. Edges are over variable indices of the score context.
#[derive(Debug, Clone, PartialEq)]
pub struct LearnedStructure {
    pub names: Vec<String>,
    /// Skeleton edges `(a, b)` with `a < b` and their `dep0` weight, in the
    /// order the spanning tree accepted them.
    pub skeleton: Vec<(usize, usize, f64)>,
    /// Oriented edges `(parent, child)`, sorted; a subset of the skeleton.
    pub oriented: Vec<(usize, usize)>,
    /// Every candidate meeting `(x1, x2, x3)` with `x1 < x2` and its criterion
    /// value; `None` when the criterion could not be evaluated.
    pub colliders: Vec<CandidateCollider>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CandidateCollider {
    pub x1: usize,
    pub x2: usize,
    pub x3: usize,
    pub value: Option<f64>,
    pub accepted: bool,
}

impl LearnedStructure {
    pub fn n_vars(&self) -> usize {
        self.names.len()
    }

    /// Skeleton edges `(min, max)`, sorted.
    pub fn skeleton_edges(&self) -> Vec<(usize, usize)> {
        let mut e: Vec<_> = self.skeleton.iter().map(|&(a, b, _)| (a, b)).collect();
        e.sort_unstable();
        e
    }

    /// Skeleton edges left without an orientation, sorted.
    pub fn undirected(&self) -> Vec<(usize, usize)> {
        self.skeleton_edges()
            .into_iter()
            .filter(|&(a, b)| !self.is_oriented(a, b) && !self.is_oriented(b, a))
            .collect()
    }

    pub fn is_oriented(&self, parent: usize, child: usize) -> bool {
        self.oriented.binary_search(&(parent, child)).is_ok()
    }

    fn adjacent(&self, a: usize, b: usize) -> bool {
        self.skeleton_edges()
            .binary_search(&(a.min(b), a.max(b)))
            .is_ok()
    }

    /// Head-to-head meetings `(p1, p2, child)` among oriented edges, with
    /// `p1 < p2` nonadjacent.
    pub fn learned_colliders(&self) -> Vec<(usize, usize, usize)> {
        let mut parents: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for &(p, c) in &self.oriented {
            parents.entry(c).or_default().push(p);
        }
        let mut out = Vec::new();
        for (c, ps) in parents {
            for (i, &a) in ps.iter().enumerate() {
                for &b in &ps[i + 1..] {
                    if !self.adjacent(a, b) {
                        out.push((a.min(b), a.max(b), c));
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }
}

/// Maximum-weight spanning tree over pairwise `dep0` weights.
///
/// Kruskal order is descending weight, ties broken by the lexicographically
/// ordered pair of variable names.
pub fn learn_tree(ctx: &ScoreContext) -> Result<LearnedStructure> {
    let n = ctx.n_vars();
    if n < 2 {
        return Err(DsError::Validation(format!(
            "tree learning needs at least 2 variables, got {n}"
        )));
    }
    let names: Vec<String> = ctx
        .frame()
        .variables()
        .iter()
        .map(|v| v.name().to_string())
        .collect();
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
        .collect();
    let weights: Vec<f64> = pairs
        .par_iter()
        .map(|&(a, b)| dep0(ctx, a, b).map(|d| d.value))
        .collect::<Result<_>>()?;

    let name_pair = |(a, b): (usize, usize)| {
        let (x, y) = (names[a].as_str(), names[b].as_str());
        if x <= y {
            (x, y)
        } else {
            (y, x)
        }
    };
    let mut order: Vec<usize> = (0..pairs.len()).collect();
    order.sort_by(|&i, &j| {
        weights[j]
            .total_cmp(&weights[i])
            .then_with(|| name_pair(pairs[i]).cmp(&name_pair(pairs[j])))
    });

    let mut uf = UnionFind::new(n);
    let mut skeleton = Vec::with_capacity(n - 1);
    for i in order {
        let (a, b) = pairs[i];
        if uf.union(a, b) {
            skeleton.push((a, b, weights[i]));
            if skeleton.len() == n - 1 {
                break;
            }
        }
    }
    Ok(LearnedStructure {
        names,
        skeleton,
        oriented: Vec::new(),
        colliders: Vec::new(),
        warnings: Vec::new(),
    })
}

/// Polytree learning: the [`learn_tree`] skeleton oriented by the
/// head-to-head criterion with threshold `theta`, then outward propagation.
///
/// A meeting is head-to-head when its criterion exceeds `theta` by more
/// than the algebra tolerance. Criterion evaluations that fail count as non-positive and are reported
/// in the warnings. An edge receiving opposite orientation demands is left
/// undirected with a warning.
pub fn learn_polytree(ctx: &ScoreContext, theta: f64) -> Result<LearnedStructure> {
    let n = ctx.n_vars();
    if n < 3 {
        return Err(DsError::Validation(format!(
            "polytree learning needs at least 3 variables, got {n}"
        )));
    }
    if theta.is_nan() || theta < 0.0 {
        return Err(DsError::Validation(format!(
            "theta must be nonnegative, got {theta}"
        )));
    }
    let mut out = learn_tree(ctx)?;
    let mut nbrs = vec![Vec::new(); n];
    for (a, b) in out.skeleton_edges() {
        nbrs[a].push(b);
        nbrs[b].push(a);
    }
    for ns in &mut nbrs {
        ns.sort_unstable();
    }

    let triples: Vec<(usize, usize, usize)> = (0..n)
        .flat_map(|x3| {
            let ns = nbrs[x3].clone();
            (0..ns.len()).flat_map(move |i| {
                let ns = ns.clone();
                (i + 1..ns.len()).map(move |j| (ns[i], ns[j], x3))
            })
        })
        .collect();
    let evaluated: Vec<Option<f64>> = triples
        .par_iter()
        .map(|&(x1, x2, x3)| match criterion(ctx, x1, x2, x3) {
            Ok(v) => Ok(Some(v)),
            Err(e) if e.class() == ErrorClass::Numerical => Ok(None),
            Err(e) => Err(e),
        })
        .collect::<Result<_>>()?;

    let mut positive: BTreeSet<(usize, usize, usize)> = BTreeSet::new();
    for (&(x1, x2, x3), value) in triples.iter().zip(&evaluated) {
        let accepted = matches!(value, Some(v) if *v > theta + ALGEBRA_TOL);
        if value.is_none() {
            let msg = format!(
                "criterion({},{};{}) could not be evaluated; treated as non-positive",
                out.names[x1], out.names[x2], out.names[x3]
            );
            warn!("{msg}");
            out.warnings.push(msg);
        }
        if accepted {
            positive.insert((x1, x2, x3));
        }
        out.colliders.push(CandidateCollider {
            x1,
            x2,
            x3,
            value: *value,
            accepted,
        });
    }

    // head-to-head demands, keyed by undirected edge
    let mut demands: BTreeMap<(usize, usize), BTreeSet<(usize, usize)>> = BTreeMap::new();
    for &(x1, x2, x3) in &positive {
        for p in [x1, x2] {
            demands
                .entry((p.min(x3), p.max(x3)))
                .or_default()
                .insert((p, x3));
        }
    }
    let mut dir: BTreeMap<(usize, usize), (usize, usize)> = BTreeMap::new();
    let mut blocked: BTreeSet<(usize, usize)> = BTreeSet::new();
    for (edge, ds) in demands {
        if ds.len() > 1 {
            let msg = format!(
                "conflicting head-to-head orientations for {}-{}; left undirected",
                out.names[edge.0], out.names[edge.1]
            );
            warn!("{msg}");
            out.warnings.push(msg);
            blocked.insert(edge);
        } else {
            dir.insert(edge, *ds.iter().next().expect("nonempty"));
        }
    }

    // outward propagation: p→y and a non-positive meeting (p, z; y) gives y→z
    let is_positive = |a: usize, b: usize, c: usize| positive.contains(&(a.min(b), a.max(b), c));
    let mut queue: Vec<(usize, usize)> = dir.values().copied().collect();
    while let Some((p, y)) = queue.pop() {
        for &z in &nbrs[y] {
            let edge = (y.min(z), y.max(z));
            if z == p || dir.contains_key(&edge) || blocked.contains(&edge) || is_positive(p, z, y)
            {
                continue;
            }
            dir.insert(edge, (y, z));
            queue.push((y, z));
        }
    }

    out.oriented = dir.into_values().collect();
    out.oriented.sort_unstable();
    Ok(out)
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// False when `a` and `b` were already connected.
    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra.max(rb)] = ra.min(rb);
        true
    }
}

/// Agreement of a learned structure with the true DAG.
#[derive(Debug, Clone, PartialEq)]
pub struct StructureMetrics {
    pub precision: f64,
    pub recall: f64,
    /// Fraction of true head-to-head meetings with nonadjacent parents whose
    /// two edges are both learned into the child; 1 when there are none.
    pub orientation_accuracy: f64,
    /// Learned head-to-head meetings absent from the truth.
    pub spurious_colliders: usize,
    pub true_colliders: usize,
}

pub fn compare_structures(truth: &Dag, learned: &LearnedStructure) -> Result<StructureMetrics> {
    if truth.len() != learned.n_vars() {
        return Err(DsError::Validation(format!(
            "truth has {} nodes, learned structure {} variables",
            truth.len(),
            learned.n_vars()
        )));
    }
    let t: BTreeSet<(usize, usize)> = truth.skeleton().into_iter().collect();
    let l: BTreeSet<(usize, usize)> = learned.skeleton_edges().into_iter().collect();
    let hits = t.intersection(&l).count() as f64;
    let ratio = |den: usize| if den == 0 { 1.0 } else { hits / den as f64 };

    let true_colliders = truth.colliders();
    let found = true_colliders
        .iter()
        .filter(|&&(a, b, c)| learned.is_oriented(a, c) && learned.is_oriented(b, c))
        .count();
    let truth_set: BTreeSet<_> = true_colliders.iter().copied().collect();
    let spurious = learned
        .learned_colliders()
        .into_iter()
        .filter(|c| !truth_set.contains(c))
        .count();
    Ok(StructureMetrics {
        precision: ratio(l.len()),
        recall: ratio(t.len()),
        orientation_accuracy: if true_colliders.is_empty() {
            1.0
        } else {
            found as f64 / true_colliders.len() as f64
        },
        spurious_colliders: spurious,
        true_colliders: true_colliders.len(),
    })
}
