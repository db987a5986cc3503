//! Frames of discernment, scopes and configuration sets.
//!
//! A [`Frame`] declares an ordered list of variables with finite, ordered
//! domains. A [`Scope`] is a subset of a frame's variables, always kept in
//! declaration order, and its joint configurations are indexed mixed-radix
//! with the last-listed variable varying fastest. A [`ConfigSet`] is a subset
//! of a scope's configuration space stored as a bit vector, so every set over
//! the same scope shares one bit layout.

use std::fmt;
use std::sync::Arc;

use crate::error::{DsError, Result};

/// A variable with a finite ordered domain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Variable {
    name: String,
    labels: Vec<String>,
}

impl Variable {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn size(&self) -> usize {
        self.labels.len()
    }

    pub fn label_index(&self, label: &str) -> Result<usize> {
        self.labels.iter().position(|l| l == label).ok_or_else(|| {
            DsError::Domain(format!("variable {} has no value {:?}", self.name, label))
        })
    }
}

/// Names and labels end up in line-oriented files, so separators are banned.
fn check_token(kind: &str, token: &str) -> Result<()> {
    if token.is_empty() {
        return Err(DsError::Validation(format!("empty {kind}")));
    }
    let ok = token
        .chars()
        .all(|c| c.is_alphanumeric() || c == '_' || c == '-' || c == '+');
    if !ok {
        return Err(DsError::Validation(format!(
            "{kind} {token:?} may only contain alphanumerics, '_', '-' or '+'"
        )));
    }
    Ok(())
}

/// Ordered set of variables; the universe every scope refers to.
#[derive(Debug, PartialEq, Eq)]
pub struct Frame {
    vars: Vec<Variable>,
}

impl Frame {
    pub fn new<N, L>(vars: impl IntoIterator<Item = (N, Vec<L>)>) -> Result<Arc<Frame>>
    where
        N: Into<String>,
        L: Into<String>,
    {
        let mut out: Vec<Variable> = Vec::new();
        for (name, labels) in vars {
            let name = name.into();
            check_token("variable name", &name)?;
            if out.iter().any(|v| v.name == name) {
                return Err(DsError::Validation(format!("duplicate variable {name}")));
            }
            let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
            if labels.len() < 2 {
                return Err(DsError::Validation(format!(
                    "variable {name} needs at least two values"
                )));
            }
            for (i, l) in labels.iter().enumerate() {
                check_token("value label", l)?;
                if labels[..i].contains(l) {
                    return Err(DsError::Validation(format!(
                        "duplicate value {l} in variable {name}"
                    )));
                }
            }
            out.push(Variable { name, labels });
        }
        Ok(Arc::new(Frame { vars: out }))
    }

    /// Variables `X1..Xn` with domains `0..size-1`.
    pub fn uniform(n: usize, size: usize) -> Result<Arc<Frame>> {
        Frame::with_sizes(&vec![size; n])
    }

    pub fn with_sizes(sizes: &[usize]) -> Result<Arc<Frame>> {
        Frame::new(sizes.iter().enumerate().map(|(i, &s)| {
            (
                format!("X{}", i + 1),
                (0..s).map(|v| v.to_string()).collect::<Vec<_>>(),
            )
        }))
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    pub fn variables(&self) -> &[Variable] {
        &self.vars
    }

    pub fn variable(&self, idx: usize) -> &Variable {
        &self.vars[idx]
    }

    pub fn var_index(&self, name: &str) -> Result<usize> {
        self.vars
            .iter()
            .position(|v| v.name == name)
            .ok_or_else(|| DsError::Domain(format!("unknown variable {name:?}")))
    }

    pub fn config_count(&self) -> usize {
        self.vars.iter().map(Variable::size).product()
    }

    pub fn full_scope(self: &Arc<Self>) -> Scope {
        Scope::new(self, (0..self.vars.len()).collect())
    }

    pub fn scope_of(self: &Arc<Self>, names: &[&str]) -> Result<Scope> {
        let idx = names
            .iter()
            .map(|n| self.var_index(n))
            .collect::<Result<Vec<_>>>()?;
        Ok(Scope::new(self, idx))
    }
}

#[derive(Debug)]
struct ScopeInner {
    frame: Arc<Frame>,
    vars: Vec<usize>,
    radices: Vec<usize>,
    strides: Vec<usize>,
    size: usize,
}

/// A subset of a frame's variables in declaration order.
///
/// Cheap to clone.
#[derive(Clone)]
pub struct Scope(Arc<ScopeInner>);

impl Scope {
    /// Indices are sorted and deduplicated.
    pub fn new(frame: &Arc<Frame>, mut vars: Vec<usize>) -> Scope {
        vars.sort_unstable();
        vars.dedup();
        assert!(
            vars.iter().all(|&v| v < frame.len()),
            "scope variable out of range"
        );
        let radices: Vec<usize> = vars.iter().map(|&v| frame.vars[v].size()).collect();
        let mut strides = vec![1usize; radices.len()];
        for i in (0..radices.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * radices[i + 1];
        }
        let size = radices.iter().product();
        Scope(Arc::new(ScopeInner {
            frame: Arc::clone(frame),
            vars,
            radices,
            strides,
            size,
        }))
    }

    pub fn frame(&self) -> &Arc<Frame> {
        &self.0.frame
    }

    pub fn vars(&self) -> &[usize] {
        &self.0.vars
    }

    pub fn len(&self) -> usize {
        self.0.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.vars.is_empty()
    }

    /// Number of joint configurations; 1 for the empty scope.
    pub fn config_count(&self) -> usize {
        self.0.size
    }

    pub fn radices(&self) -> &[usize] {
        &self.0.radices
    }

    pub fn same_frame(&self, other: &Scope) -> bool {
        Arc::ptr_eq(&self.0.frame, &other.0.frame) || *self.0.frame == *other.0.frame
    }

    pub fn contains_var(&self, v: usize) -> bool {
        self.0.vars.binary_search(&v).is_ok()
    }

    pub fn is_subset_of(&self, other: &Scope) -> bool {
        self.same_frame(other) && self.0.vars.iter().all(|&v| other.contains_var(v))
    }

    pub fn union(&self, other: &Scope) -> Result<Scope> {
        self.check_frame(other)?;
        let mut vars = self.0.vars.clone();
        vars.extend_from_slice(&other.0.vars);
        Ok(Scope::new(&self.0.frame, vars))
    }

    pub fn intersection(&self, other: &Scope) -> Result<Scope> {
        self.check_frame(other)?;
        let vars = self
            .0
            .vars
            .iter()
            .copied()
            .filter(|&v| other.contains_var(v))
            .collect();
        Ok(Scope::new(&self.0.frame, vars))
    }

    pub fn with_vars(&self, vars: Vec<usize>) -> Scope {
        Scope::new(&self.0.frame, vars)
    }

    pub(crate) fn check_frame(&self, other: &Scope) -> Result<()> {
        if self.same_frame(other) {
            Ok(())
        } else {
            Err(DsError::Scope("scopes belong to different frames".into()))
        }
    }

    pub fn names(&self) -> Vec<&str> {
        self.0
            .vars
            .iter()
            .map(|&v| self.0.frame.vars[v].name.as_str())
            .collect()
    }

    /// Mixed-radix index of an assignment given as `(variable, label)` pairs.
    pub fn config_index(&self, assignment: &[(&str, &str)]) -> Result<usize> {
        if assignment.len() != self.len() {
            return Err(DsError::Domain(format!(
                "assignment covers {} variables, scope has {}",
                assignment.len(),
                self.len()
            )));
        }
        let mut values = vec![usize::MAX; self.len()];
        for &(name, label) in assignment {
            let v = self.0.frame.var_index(name)?;
            let pos = self
                .0
                .vars
                .binary_search(&v)
                .map_err(|_| DsError::Domain(format!("variable {name} is not in the scope")))?;
            if values[pos] != usize::MAX {
                return Err(DsError::Domain(format!("variable {name} assigned twice")));
            }
            values[pos] = self.0.frame.vars[v].label_index(label)?;
        }
        Ok(self.encode(&values))
    }

    /// Index from per-variable value indices in scope order.
    pub fn encode(&self, values: &[usize]) -> usize {
        debug_assert_eq!(values.len(), self.len());
        values.iter().zip(&self.0.strides).map(|(v, s)| v * s).sum()
    }

    /// Per-variable value indices in scope order.
    pub fn decode(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.len()];
        for (i, &s) in self.0.strides.iter().enumerate() {
            out[i] = index / s;
            index %= s;
        }
        out
    }

    /// Labels of a configuration in scope order.
    pub fn labels_of(&self, index: usize) -> Vec<&str> {
        self.decode(index)
            .into_iter()
            .zip(&self.0.vars)
            .map(|(val, &v)| self.0.frame.vars[v].labels[val].as_str())
            .collect()
    }

    /// For every configuration of `self`, the index of its restriction to `sub`.
    pub fn restriction_map(&self, sub: &Scope) -> Result<Vec<usize>> {
        if !sub.is_subset_of(self) {
            return Err(DsError::Scope(format!(
                "{{{}}} is not a subset of {{{}}}",
                sub.names().join(","),
                self.names().join(",")
            )));
        }
        // stride of each own variable inside `sub`, zero when projected away
        let sub_strides: Vec<usize> = self
            .0
            .vars
            .iter()
            .map(|&v| match sub.0.vars.binary_search(&v) {
                Ok(p) => sub.0.strides[p],
                Err(_) => 0,
            })
            .collect();
        let mut map = Vec::with_capacity(self.0.size);
        let mut digits = vec![0usize; self.len()];
        let mut cur = 0usize;
        for _ in 0..self.0.size {
            map.push(cur);
            // odometer increment, last digit fastest
            for k in (0..digits.len()).rev() {
                digits[k] += 1;
                cur += sub_strides[k];
                if digits[k] < self.0.radices[k] {
                    break;
                }
                cur -= sub_strides[k] * digits[k];
                digits[k] = 0;
            }
        }
        Ok(map)
    }
}

impl PartialEq for Scope {
    fn eq(&self, other: &Self) -> bool {
        self.0.vars == other.0.vars && self.same_frame(other)
    }
}

impl Eq for Scope {}

impl fmt::Debug for Scope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Scope{{{}}}", self.names().join(","))
    }
}

/// Fixed-width bit vector; the storage of a [`ConfigSet`].
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Bits(Vec<u64>);

impl Bits {
    pub fn zeros(len: usize) -> Bits {
        Bits(vec![0; len.div_ceil(64).max(1)])
    }

    pub fn ones(len: usize) -> Bits {
        let mut b = Bits::zeros(len);
        for i in 0..len {
            b.set(i);
        }
        b
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        self.0[i / 64] >> (i % 64) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&w| w == 0)
    }

    pub fn count(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn and(&self, other: &Bits) -> Bits {
        Bits(self.0.iter().zip(&other.0).map(|(a, b)| a & b).collect())
    }

    pub fn or(&self, other: &Bits) -> Bits {
        Bits(self.0.iter().zip(&other.0).map(|(a, b)| a | b).collect())
    }

    pub fn is_subset_of(&self, other: &Bits) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a & !b == 0)
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let t = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * 64 + t)
            })
        })
    }

    /// Low word; dense lattices index subsets of at most 16 configurations by it.
    pub(crate) fn low_word(&self) -> u64 {
        self.0[0]
    }

    pub(crate) fn from_low_word(len: usize, word: u64) -> Bits {
        let mut b = Bits::zeros(len);
        b.0[0] = word;
        b
    }
}

/// A set of configurations of a scope.
#[derive(Clone, PartialEq, Eq)]
pub struct ConfigSet {
    scope: Scope,
    bits: Bits,
}

impl ConfigSet {
    pub fn empty(scope: &Scope) -> ConfigSet {
        ConfigSet {
            scope: scope.clone(),
            bits: Bits::zeros(scope.config_count()),
        }
    }

    pub fn full(scope: &Scope) -> ConfigSet {
        ConfigSet {
            scope: scope.clone(),
            bits: Bits::ones(scope.config_count()),
        }
    }

    pub fn from_indices(
        scope: &Scope,
        indices: impl IntoIterator<Item = usize>,
    ) -> Result<ConfigSet> {
        let mut bits = Bits::zeros(scope.config_count());
        for i in indices {
            if i >= scope.config_count() {
                return Err(DsError::Domain(format!(
                    "configuration index {i} out of range for {scope:?}"
                )));
            }
            bits.set(i);
        }
        Ok(ConfigSet {
            scope: scope.clone(),
            bits,
        })
    }

    /// Set from configurations written as label tuples in scope order.
    pub fn from_labels(scope: &Scope, configs: &[&[&str]]) -> Result<ConfigSet> {
        let names = scope.names();
        let mut idx = Vec::with_capacity(configs.len());
        for c in configs {
            if c.len() != names.len() {
                return Err(DsError::Domain(format!(
                    "configuration {:?} does not match scope {scope:?}",
                    c
                )));
            }
            let assignment: Vec<(&str, &str)> =
                names.iter().copied().zip(c.iter().copied()).collect();
            idx.push(scope.config_index(&assignment)?);
        }
        ConfigSet::from_indices(scope, idx)
    }

    pub(crate) fn from_bits(scope: &Scope, bits: Bits) -> ConfigSet {
        ConfigSet {
            scope: scope.clone(),
            bits,
        }
    }

    pub fn scope(&self) -> &Scope {
        &self.scope
    }

    pub fn bits(&self) -> &Bits {
        &self.bits
    }

    pub fn into_bits(self) -> Bits {
        self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.count()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_zero()
    }

    pub fn is_full(&self) -> bool {
        self.len() == self.scope.config_count()
    }

    pub fn contains(&self, index: usize) -> bool {
        index < self.scope.config_count() && self.bits.get(index)
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.iter_ones()
    }

    fn same_scope(&self, other: &ConfigSet) -> Result<()> {
        if self.scope == other.scope {
            Ok(())
        } else {
            Err(DsError::Scope(format!(
                "set scopes differ: {:?} vs {:?}",
                self.scope, other.scope
            )))
        }
    }

    pub fn intersect(&self, other: &ConfigSet) -> Result<ConfigSet> {
        self.same_scope(other)?;
        Ok(ConfigSet::from_bits(
            &self.scope,
            self.bits.and(&other.bits),
        ))
    }

    pub fn union(&self, other: &ConfigSet) -> Result<ConfigSet> {
        self.same_scope(other)?;
        Ok(ConfigSet::from_bits(&self.scope, self.bits.or(&other.bits)))
    }

    pub fn is_subset_of(&self, other: &ConfigSet) -> Result<bool> {
        self.same_scope(other)?;
        Ok(self.bits.is_subset_of(&other.bits))
    }

    /// Restrictions of the members to `target`.
    pub fn project(&self, target: &Scope) -> Result<ConfigSet> {
        let map = self.scope.restriction_map(target)?;
        Ok(ConfigSet::from_bits(
            target,
            project_bits(&self.bits, &map, target.config_count()),
        ))
    }

    /// Cylinder extension: every configuration of `target` whose restriction
    /// lies in the set.
    pub fn cylinder(&self, target: &Scope) -> Result<ConfigSet> {
        let map = target.restriction_map(&self.scope)?;
        Ok(ConfigSet::from_bits(
            target,
            cylinder_bits(&self.bits, &map),
        ))
    }

    /// Cartesian product of sets over pairwise disjoint scopes.
    pub fn product(parts: &[ConfigSet]) -> Result<ConfigSet> {
        let Some(first) = parts.first() else {
            return Err(DsError::Scope("product of zero sets".into()));
        };
        let mut scope = first.scope.with_vars(Vec::new());
        for p in parts {
            first.scope.check_frame(&p.scope)?;
            if !scope.intersection(&p.scope)?.is_empty() {
                return Err(DsError::Scope(format!(
                    "product factors overlap on {:?}",
                    scope.intersection(&p.scope)?
                )));
            }
            scope = scope.union(&p.scope)?;
        }
        let mut acc = ConfigSet::full(&scope);
        for p in parts {
            acc = acc.intersect(&p.cylinder(&scope)?)?;
        }
        Ok(acc)
    }

    /// Per-variable projections, in scope order.
    pub fn marginal_parts(&self) -> Vec<ConfigSet> {
        self.scope
            .vars()
            .iter()
            .map(|&v| {
                self.project(&self.scope.with_vars(vec![v]))
                    .expect("single variable is a subscope")
            })
            .collect()
    }

    /// True iff the set equals the product of its per-variable projections.
    pub fn is_product(&self) -> bool {
        self.decompose_product().is_some()
    }

    pub fn decompose_product(&self) -> Option<Vec<ConfigSet>> {
        let parts = self.marginal_parts();
        if self.is_empty() {
            // the empty set is the product of empty factors
            return Some(parts);
        }
        let expected: usize = parts.iter().map(ConfigSet::len).product();
        if expected != self.len() {
            return None;
        }
        // cardinality match plus containment in the product means equality
        Some(parts)
    }
}

pub(crate) fn project_bits(bits: &Bits, map: &[usize], target_len: usize) -> Bits {
    let mut out = Bits::zeros(target_len);
    for i in bits.iter_ones() {
        out.set(map[i]);
    }
    out
}

pub(crate) fn cylinder_bits(bits: &Bits, map: &[usize]) -> Bits {
    let mut out = Bits::zeros(map.len());
    for (i, &src) in map.iter().enumerate() {
        if bits.get(src) {
            out.set(i);
        }
    }
    out
}

impl fmt::Debug for ConfigSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let items: Vec<String> = self
            .indices()
            .map(|i| self.scope.labels_of(i).join("."))
            .collect();
        write!(f, "{{{}}}", items.join(";"))
    }
}
