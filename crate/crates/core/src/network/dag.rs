use std::collections::{BTreeSet, VecDeque};

use crate::error::{DsError, Result};

/// Directed acyclic graph over nodes `0..n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dag {
    parents: Vec<Vec<usize>>,
    children: Vec<Vec<usize>>,
}

impl Dag {
    pub fn new(n: usize, edges: &[(usize, usize)]) -> Result<Dag> {
        let mut parents = vec![Vec::new(); n];
        let mut children = vec![Vec::new(); n];
        for &(p, c) in edges {
            if p >= n || c >= n {
                return Err(DsError::Domain(format!(
                    "edge {p}->{c} refers to an unknown node"
                )));
            }
            if p == c {
                return Err(DsError::Validation(format!("self-loop on node {p}")));
            }
            if parents[c].contains(&p) || parents[p].contains(&c) {
                return Err(DsError::Validation(format!(
                    "parallel edge between {p} and {c}"
                )));
            }
            parents[c].push(p);
            children[p].push(c);
        }
        for v in parents.iter_mut().chain(children.iter_mut()) {
            v.sort_unstable();
        }
        let dag = Dag { parents, children };
        if dag.topological_order().len() != n {
            return Err(DsError::Validation("graph has a directed cycle".into()));
        }
        Ok(dag)
    }

    pub fn len(&self) -> usize {
        self.parents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parents.is_empty()
    }

    pub fn parents(&self, v: usize) -> &[usize] {
        &self.parents[v]
    }

    pub fn children(&self, v: usize) -> &[usize] {
        &self.children[v]
    }

    pub fn has_edge(&self, p: usize, c: usize) -> bool {
        self.parents[c].contains(&p)
    }

    pub fn adjacent(&self, a: usize, b: usize) -> bool {
        self.has_edge(a, b) || self.has_edge(b, a)
    }

    /// Edges `(parent, child)` sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut e: Vec<(usize, usize)> = self
            .parents
            .iter()
            .enumerate()
            .flat_map(|(c, ps)| ps.iter().map(move |&p| (p, c)))
            .collect();
        e.sort_unstable();
        e
    }

    /// Undirected edges as `(min, max)`, sorted.
    pub fn skeleton(&self) -> Vec<(usize, usize)> {
        let mut e: Vec<(usize, usize)> = self
            .edges()
            .into_iter()
            .map(|(a, b)| (a.min(b), a.max(b)))
            .collect();
        e.sort_unstable();
        e
    }

    /// Kahn's algorithm, smallest ready node first. Shorter than `len()` iff cyclic.
    pub fn topological_order(&self) -> Vec<usize> {
        let mut indeg: Vec<usize> = self.parents.iter().map(Vec::len).collect();
        let mut ready: BTreeSet<usize> = (0..self.len()).filter(|&v| indeg[v] == 0).collect();
        let mut order = Vec::with_capacity(self.len());
        while let Some(v) = ready.pop_first() {
            order.push(v);
            for &c in &self.children[v] {
                indeg[c] -= 1;
                if indeg[c] == 0 {
                    ready.insert(c);
                }
            }
        }
        order
    }

    /// Nodes reachable from `v` along directed edges, excluding `v`.
    pub fn descendants(&self, v: usize) -> BTreeSet<usize> {
        let mut seen = BTreeSet::new();
        let mut queue: VecDeque<usize> = self.children[v].iter().copied().collect();
        while let Some(u) = queue.pop_front() {
            if seen.insert(u) {
                queue.extend(self.children[u].iter().copied());
            }
        }
        seen
    }

    /// `set` together with all of its ancestors.
    pub fn ancestral_closure(&self, set: &[usize]) -> Vec<bool> {
        let mut mark = vec![false; self.len()];
        let mut queue: VecDeque<usize> = set.iter().copied().collect();
        while let Some(u) = queue.pop_front() {
            if !mark[u] {
                mark[u] = true;
                queue.extend(self.parents[u].iter().copied());
            }
        }
        mark
    }

    /// Head-to-head meetings `(p1, p2, child)` with `p1 < p2` nonadjacent.
    pub fn colliders(&self) -> Vec<(usize, usize, usize)> {
        let mut out = Vec::new();
        for c in 0..self.len() {
            let ps = &self.parents[c];
            for (i, &a) in ps.iter().enumerate() {
                for &b in &ps[i + 1..] {
                    if !self.adjacent(a, b) {
                        out.push((a, b, c));
                    }
                }
            }
        }
        out
    }
}

/// True iff `l` d-separates `j` from `k` in `dag`.
///
/// Reachability over (node, direction) states: a trail may pass a
/// non-collider outside `l`, and a collider that is in `l` or has a
/// descendant in `l`.
pub fn dsep(dag: &Dag, j: &[usize], k: &[usize], l: &[usize]) -> Result<bool> {
    let n = dag.len();
    for &v in j.iter().chain(k).chain(l) {
        if v >= n {
            return Err(DsError::Domain(format!("unknown node {v}")));
        }
    }
    let mut in_l = vec![false; n];
    for &v in l {
        in_l[v] = true;
    }
    let mut in_jk = vec![0u8; n];
    for &v in j {
        in_jk[v] |= 1;
    }
    for &v in k {
        in_jk[v] |= 2;
    }
    if in_jk
        .iter()
        .zip(&in_l)
        .any(|(&m, &inl)| m == 3 || (m != 0 && inl))
    {
        return Err(DsError::Validation(
            "J, K and L must be pairwise disjoint".into(),
        ));
    }
    let anc_l = dag.ancestral_closure(l);

    // visited[v][0]: arrived from a child (moving up); [1]: arrived from a parent
    let mut visited = vec![[false; 2]; n];
    let mut queue: VecDeque<(usize, usize)> = j.iter().map(|&v| (v, 0)).collect();
    while let Some((v, dir)) = queue.pop_front() {
        if visited[v][dir] {
            continue;
        }
        visited[v][dir] = true;
        if !in_l[v] && in_jk[v] & 2 != 0 {
            return Ok(false);
        }
        if dir == 0 {
            if !in_l[v] {
                queue.extend(dag.parents(v).iter().map(|&p| (p, 0)));
                queue.extend(dag.children(v).iter().map(|&c| (c, 1)));
            }
        } else {
            if !in_l[v] {
                queue.extend(dag.children(v).iter().map(|&c| (c, 1)));
            }
            if anc_l[v] {
                queue.extend(dag.parents(v).iter().map(|&p| (p, 0)));
            }
        }
    }
    Ok(true)
}
