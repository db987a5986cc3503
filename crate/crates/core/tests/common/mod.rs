//! Shared generators and brute-force oracles for the integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::sync::Arc;

use dsnet::network::Dag;
use dsnet::{ConfigSet, Frame, MassFunction, Scope};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type TestRng = ChaCha8Rng;

pub fn rng(seed: u64) -> TestRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Frame of `n` variables with domain sizes drawn from `sizes`.
pub fn random_frame(rng: &mut TestRng, n: usize, sizes: &[usize]) -> Arc<Frame> {
    let s: Vec<usize> = (0..n).map(|_| *sizes.choose(rng).unwrap()).collect();
    Frame::with_sizes(&s).unwrap()
}

/// Uniformly random nonempty set of configurations.
pub fn random_set(rng: &mut TestRng, scope: &Scope) -> ConfigSet {
    let n = scope.config_count();
    loop {
        let idx: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.5)).collect();
        if !idx.is_empty() {
            return ConfigSet::from_indices(scope, idx).unwrap();
        }
    }
}

/// Nonempty set biased toward small sizes.
pub fn random_small_set(rng: &mut TestRng, scope: &Scope) -> ConfigSet {
    let n = scope.config_count();
    let k = rng.gen_range(1..=n.min(3));
    let mut all: Vec<usize> = (0..n).collect();
    all.shuffle(rng);
    ConfigSet::from_indices(scope, all[..k].iter().copied()).unwrap()
}

/// Proper mass with up to `k` random focal sets.
pub fn random_mass(rng: &mut TestRng, scope: &Scope, k: usize) -> MassFunction {
    let mut entries: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
    for _ in 0..k {
        let set = random_set(rng, scope);
        *entries.entry(set.indices().collect()).or_insert(0.0) += rng.gen_range(0.05..1.0);
    }
    let total: f64 = entries.values().sum();
    MassFunction::new(
        scope,
        entries
            .into_iter()
            .map(|(idx, w)| (ConfigSet::from_indices(scope, idx).unwrap(), w / total)),
    )
    .unwrap()
}

/// Random nonempty subscope of the frame.
pub fn random_scope(rng: &mut TestRng, frame: &Arc<Frame>) -> Scope {
    loop {
        let vars: Vec<usize> = (0..frame.len()).filter(|_| rng.gen_bool(0.6)).collect();
        if !vars.is_empty() {
            return Scope::new(frame, vars);
        }
    }
}

/// Commonality by definition: total mass of focal sets containing `set`.
pub fn brute_commonality(m: &MassFunction, set: &ConfigSet) -> f64 {
    m.iter()
        .filter(|(f, _)| set.is_subset_of(f).unwrap())
        .map(|(_, v)| v)
        .sum()
}

/// Every subset of the configuration space of `scope` (including empty).
pub fn all_subsets(scope: &Scope) -> Vec<ConfigSet> {
    let n = scope.config_count();
    assert!(n <= 16);
    (0u32..1 << n)
        .map(|mask| ConfigSet::from_indices(scope, (0..n).filter(|i| mask >> i & 1 == 1)).unwrap())
        .collect()
}

/// Mass from commonality values indexed by subset bitmask, by direct
/// inclusion and exclusion: `m(A) = Σ_{B ⊇ A} (-1)^{|B\A|} Q(B)`.
/// Entry 0 (the empty set) of the result is left at 0.
pub fn brute_mobius(n: usize, q: &[f64]) -> Vec<f64> {
    let full = (1u32 << n) - 1;
    let mut m = vec![0.0; 1 << n];
    for a in 1..=full {
        let rest = full & !a;
        // enumerate subsets s of the complement; B = A ∪ s
        let mut s = rest;
        loop {
            let sign = if s.count_ones().is_multiple_of(2) {
                1.0
            } else {
                -1.0
            };
            m[a as usize] += sign * q[(a | s) as usize];
            if s == 0 {
                break;
            }
            s = (s - 1) & rest;
        }
    }
    m
}

/// DAG on `n` nodes: random edges along a random order.
pub fn random_dag(rng: &mut TestRng, n: usize, p: f64) -> Dag {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(p) {
                edges.push((order[i], order[j]));
            }
        }
    }
    Dag::new(n, &edges).unwrap()
}

/// DAG whose edge `(i, j)`, `i < j`, is present iff the matching bit of
/// `mask` is set, enumerating pairs in lexicographic order.
pub fn upper_triangular_dag(n: usize, mask: u64) -> Dag {
    let mut edges = Vec::new();
    let mut bit = 0;
    for i in 0..n {
        for j in i + 1..n {
            if mask >> bit & 1 == 1 {
                edges.push((i, j));
            }
            bit += 1;
        }
    }
    Dag::new(n, &edges).unwrap()
}

/// A simple trail summarized for d-separation: nodes that must stay out of
/// the conditioning set, and for each head-to-head node the mask of itself
/// and its descendants (one of which must be conditioned on).
pub struct Trail {
    pub blockers: u64,
    pub colliders: Vec<u64>,
}

fn descendants_mask(dag: &Dag, v: usize) -> u64 {
    let mut m = 1u64 << v;
    for d in dag.descendants(v) {
        m |= 1 << d;
    }
    m
}

/// All simple trails between `a` and `b` in the skeleton of `dag`.
pub fn trails(dag: &Dag, a: usize, b: usize) -> Vec<Trail> {
    let n = dag.len();
    let desc: Vec<u64> = (0..n).map(|v| descendants_mask(dag, v)).collect();
    let mut out = Vec::new();
    let mut path = vec![a];
    extend_trails(dag, b, &desc, &mut path, &mut out);
    out
}

fn extend_trails(
    dag: &Dag,
    target: usize,
    desc: &[u64],
    path: &mut Vec<usize>,
    out: &mut Vec<Trail>,
) {
    let last = *path.last().unwrap();
    if last == target {
        let mut blockers = 0u64;
        let mut colliders = Vec::new();
        for w in path.windows(3) {
            let (x, y, z) = (w[0], w[1], w[2]);
            if dag.has_edge(x, y) && dag.has_edge(z, y) {
                colliders.push(desc[y]);
            } else {
                blockers |= 1 << y;
            }
        }
        out.push(Trail {
            blockers,
            colliders,
        });
        return;
    }
    for next in 0..dag.len() {
        if dag.adjacent(last, next) && !path.contains(&next) {
            path.push(next);
            extend_trails(dag, target, desc, path, out);
            path.pop();
        }
    }
}

pub fn trail_active(t: &Trail, l_mask: u64) -> bool {
    t.blockers & l_mask == 0 && t.colliders.iter().all(|&c| c & l_mask != 0)
}

/// d-separation of node sets by exhaustive trail enumeration.
pub fn brute_dsep(dag: &Dag, j: &[usize], k: &[usize], l: &[usize]) -> bool {
    let l_mask = l.iter().fold(0u64, |m, &v| m | 1 << v);
    j.iter().all(|&a| {
        k.iter()
            .all(|&b| !trails(dag, a, b).iter().any(|t| trail_active(t, l_mask)))
    })
}
