//! Mass functions and the Dempster-Shafer operator algebra.
//!
//! A [`MassFunction`] is a sparse map from nonempty configuration sets to real
//! masses summing to one. Negative masses are allowed (pseudo masses); they
//! arise as solutions of the mk-conditional equation
//! `joint = marginal ⊕ conditional`.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use crate::dense::{commonality_vector, mobius_mass_from_commonality};
use crate::error::{DsError, Result};
use crate::frames::{cylinder_bits, project_bits, Bits, ConfigSet, Scope};

/// Tolerance of the algebra: mass sums and combination normalizers.
pub const ALGEBRA_TOL: f64 = 1e-9;
/// Masses at or below this magnitude are dropped when canonicalizing.
pub const DROP_TOL: f64 = 1e-12;
/// Default recombination residual for the mk-conditional solver and
/// default tolerance for distribution equality.
pub const RESIDUAL_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MassKind {
    Proper,
    Pseudo,
}

#[derive(Clone, PartialEq)]
pub struct MassFunction {
    scope: Scope,
    focal: BTreeMap<Bits, f64>,
}

impl MassFunction {
    /// Validated mass function; the entries must sum to 1 within [`ALGEBRA_TOL`].
    pub fn new(scope: &Scope, entries: impl IntoIterator<Item = (ConfigSet, f64)>) -> Result<Self> {
        let focal = collect_entries(scope, entries)?;
        let total: f64 = focal.values().sum();
        if (total - 1.0).abs() > ALGEBRA_TOL {
            return Err(DsError::Validation(format!("masses sum to {total}, not 1")));
        }
        Ok(MassFunction::from_canonical(scope.clone(), focal))
    }

    /// Like [`MassFunction::new`] but rescales the entries to sum to 1.
    pub fn normalized(
        scope: &Scope,
        entries: impl IntoIterator<Item = (ConfigSet, f64)>,
    ) -> Result<Self> {
        let mut focal = collect_entries(scope, entries)?;
        let total: f64 = focal.values().sum();
        if total.abs() <= ALGEBRA_TOL {
            return Err(DsError::Validation(format!(
                "masses sum to {total}; cannot normalize"
            )));
        }
        for v in focal.values_mut() {
            *v /= total;
        }
        Ok(MassFunction::from_canonical(scope.clone(), focal))
    }

    /// Drops negligible entries; assumes keys are nonempty sets over `scope`.
    pub(crate) fn from_canonical(scope: Scope, mut focal: BTreeMap<Bits, f64>) -> Self {
        focal.retain(|_, v| v.abs() > DROP_TOL);
        MassFunction { scope, focal }
    }

    /// All mass on the whole frame of `scope`.
    pub fn vacuous(scope: &Scope) -> Self {
        let mut focal = BTreeMap::new();
        focal.insert(Bits::ones(scope.config_count()), 1.0);
        MassFunction {
            scope: scope.clone(),
            focal,
        }
    }

    /// `m(B) = 1`; conditioning on `B` is combination with this.
    pub fn simple_support(event: &ConfigSet) -> Result<Self> {
        if event.is_empty() {
            return Err(DsError::DegenerateEvent(
                "simple support on the empty set".into(),
            ));
        }
        let mut focal = BTreeMap::new();
        focal.insert(event.bits().clone(), 1.0);
        Ok(MassFunction {
            scope: event.scope().clone(),
            focal,
        })
    }

    pub fn scope(&self) -> &Scope {
        &self.scope
    }

    pub fn kind(&self) -> MassKind {
        if self.focal.values().all(|&v| v >= 0.0) {
            MassKind::Proper
        } else {
            MassKind::Pseudo
        }
    }

    pub fn is_proper(&self) -> bool {
        self.kind() == MassKind::Proper
    }

    /// Number of focal sets.
    pub fn len(&self) -> usize {
        self.focal.len()
    }

    pub fn is_empty(&self) -> bool {
        self.focal.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.focal.values().sum()
    }

    pub fn focal_bits(&self) -> impl Iterator<Item = (&Bits, f64)> {
        self.focal.iter().map(|(b, &v)| (b, v))
    }

    pub fn iter(&self) -> impl Iterator<Item = (ConfigSet, f64)> + '_ {
        self.focal
            .iter()
            .map(|(b, &v)| (ConfigSet::from_bits(&self.scope, b.clone()), v))
    }

    /// Mass assigned to exactly `set` (0 when it is not focal).
    pub fn mass(&self, set: &ConfigSet) -> Result<f64> {
        self.check_set(set)?;
        Ok(self.focal.get(set.bits()).copied().unwrap_or(0.0))
    }

    pub(crate) fn mass_bits(&self, bits: &Bits) -> f64 {
        self.focal.get(bits).copied().unwrap_or(0.0)
    }

    fn check_set(&self, set: &ConfigSet) -> Result<()> {
        if *set.scope() == self.scope {
            Ok(())
        } else {
            Err(DsError::Scope(format!(
                "set over {:?} used with mass over {:?}",
                set.scope(),
                self.scope
            )))
        }
    }

    /// `Bel(A)`: total mass of nonempty subsets of `A`.
    pub fn belief(&self, set: &ConfigSet) -> Result<f64> {
        self.check_set(set)?;
        Ok(self
            .focal
            .iter()
            .filter(|(b, _)| b.is_subset_of(set.bits()))
            .map(|(_, &v)| v)
            .sum())
    }

    /// `Pl(A)`: total mass of sets meeting `A`.
    pub fn plausibility(&self, set: &ConfigSet) -> Result<f64> {
        self.check_set(set)?;
        Ok(self
            .focal
            .iter()
            .filter(|(b, _)| !b.and(set.bits()).is_zero())
            .map(|(_, &v)| v)
            .sum())
    }

    /// `Q(A)`: total mass of supersets of `A`; `Q(∅) = 1`.
    pub fn commonality(&self, set: &ConfigSet) -> Result<f64> {
        self.check_set(set)?;
        if set.is_empty() {
            return Ok(1.0);
        }
        Ok(self
            .focal
            .iter()
            .filter(|(b, _)| set.bits().is_subset_of(b))
            .map(|(_, &v)| v)
            .sum())
    }

    /// Dempster's rule. Operands are first extended to the union of their scopes.
    pub fn combine(&self, other: &MassFunction) -> Result<MassFunction> {
        let scope = self.scope.union(&other.scope)?;
        let a = self.extend(&scope)?;
        let b = other.extend(&scope)?;
        let mut acc: HashMap<Bits, f64> = HashMap::with_capacity(a.len() * b.len());
        let mut conflict = 0.0;
        for (fa, &ma) in &a.focal {
            for (fb, &mb) in &b.focal {
                let c = fa.and(fb);
                if c.is_zero() {
                    conflict += ma * mb;
                } else {
                    *acc.entry(c).or_insert(0.0) += ma * mb;
                }
            }
        }
        let normalizer = 1.0 - conflict;
        if normalizer.abs() <= ALGEBRA_TOL || !normalizer.is_finite() {
            return Err(if a.is_proper() && b.is_proper() {
                DsError::TotalConflict { normalizer }
            } else {
                DsError::VanishingNormalizer { normalizer }
            });
        }
        let focal = acc.into_iter().map(|(k, v)| (k, v / normalizer)).collect();
        Ok(MassFunction::from_canonical(scope, focal))
    }

    /// Combine a sequence of mass functions left to right.
    pub fn combine_all<'a>(
        items: impl IntoIterator<Item = &'a MassFunction>,
    ) -> Result<MassFunction> {
        let mut it = items.into_iter();
        let first = it
            .next()
            .ok_or_else(|| DsError::Validation("nothing to combine".into()))?;
        it.try_fold(first.clone(), |acc, m| acc.combine(m))
    }

    /// Marginal on `target`: each focal set is projected and masses summed.
    pub fn marginalize(&self, target: &Scope) -> Result<MassFunction> {
        if *target == self.scope {
            return Ok(self.clone());
        }
        let map = self.scope.restriction_map(target)?;
        let len = target.config_count();
        let mut focal = BTreeMap::new();
        for (b, &v) in &self.focal {
            *focal.entry(project_bits(b, &map, len)).or_insert(0.0) += v;
        }
        Ok(MassFunction::from_canonical(target.clone(), focal))
    }

    /// Vacuous extension to a superscope.
    pub fn extend(&self, target: &Scope) -> Result<MassFunction> {
        if *target == self.scope {
            return Ok(self.clone());
        }
        let map = target.restriction_map(&self.scope)?;
        let focal = self
            .focal
            .iter()
            .map(|(b, &v)| (cylinder_bits(b, &map), v))
            .collect();
        Ok(MassFunction {
            scope: target.clone(),
            focal,
        })
    }

    /// `m ⊕ m_B`. The event may live on any subscope and is cylinder-extended.
    pub fn condition(&self, event: &ConfigSet) -> Result<MassFunction> {
        if !event.scope().is_subset_of(&self.scope) {
            return Err(DsError::Scope(format!(
                "event over {:?} is not within {:?}",
                event.scope(),
                self.scope
            )));
        }
        let support = MassFunction::simple_support(event)?;
        self.combine(&support).map_err(|e| match e {
            DsError::TotalConflict { .. } => DsError::ImpossibleEvent,
            other => other,
        })
    }

    /// L1 distance over the union of focal sets.
    pub fn l1_distance(&self, other: &MassFunction) -> Result<f64> {
        if self.scope != other.scope {
            return Err(DsError::Scope(format!(
                "comparing masses over {:?} and {:?}",
                self.scope, other.scope
            )));
        }
        let mut d = 0.0;
        for (b, &v) in &self.focal {
            d += (v - other.mass_bits(b)).abs();
        }
        for (b, &v) in &other.focal {
            if !self.focal.contains_key(b) {
                d += v.abs();
            }
        }
        Ok(d)
    }

    pub fn approx_eq(&self, other: &MassFunction, eps: f64) -> Result<bool> {
        Ok(self.l1_distance(other)? <= eps)
    }

    /// An mk-conditional of `self` given `cond`: a (pseudo) mass `R` with
    /// `marginal(cond) ⊕ R = self`, verified within [`RESIDUAL_TOL`].
    pub fn mk_conditional(&self, cond: &Scope) -> Result<MassFunction> {
        self.mk_conditional_with(cond, RESIDUAL_TOL)
    }

    /// [`MassFunction::mk_conditional`] with an explicit residual tolerance.
    ///
    /// Solved in the commonality domain: `Q_R = Q_m / Q_ext` where `Q_ext` is
    /// the commonality of the extended marginal, then Möbius-inverted. Cells
    /// where both commonalities vanish are first set to 0 and, if the
    /// recombination check fails, retried with 1.
    pub fn mk_conditional_with(&self, cond: &Scope, tol: f64) -> Result<MassFunction> {
        if !cond.is_subset_of(&self.scope) {
            return Err(DsError::Scope(format!(
                "conditioning scope {:?} is not within {:?}",
                cond, self.scope
            )));
        }
        let marginal = self.marginalize(cond)?;
        let q_joint = commonality_vector(self)?;
        let q_ext = commonality_vector(&marginal.extend(&self.scope)?)?;

        let mut last_residual = f64::NAN;
        for zero_zero in [0.0, 1.0] {
            let mut q = vec![0.0; q_joint.len()];
            q[0] = 1.0;
            for a in 1..q.len() {
                let (num, den) = (q_joint[a], q_ext[a]);
                q[a] = if den.abs() <= 1e-14 {
                    if num.abs() > 1e-14 {
                        return Err(DsError::NoSolution(format!(
                            "extended marginal has zero commonality where the joint has {num:e}"
                        )));
                    }
                    zero_zero
                } else {
                    num / den
                };
            }
            let candidate = match mobius_mass_from_commonality(&self.scope, &q) {
                Ok(c) => c,
                Err(DsError::NoSolution(_)) => continue,
                Err(e) => return Err(e),
            };
            match marginal.combine(&candidate) {
                Ok(recombined) => {
                    let residual = recombined.l1_distance(self)?;
                    if residual <= tol {
                        return Ok(candidate);
                    }
                    last_residual = residual;
                }
                Err(DsError::TotalConflict { .. } | DsError::VanishingNormalizer { .. }) => {}
                Err(e) => return Err(e),
            }
        }
        Err(DsError::NoSolution(format!(
            "recombination residual {last_residual:e} exceeds {tol:e}"
        )))
    }
}

fn collect_entries(
    scope: &Scope,
    entries: impl IntoIterator<Item = (ConfigSet, f64)>,
) -> Result<BTreeMap<Bits, f64>> {
    let mut focal = BTreeMap::new();
    for (set, v) in entries {
        if *set.scope() != *scope {
            return Err(DsError::Scope(format!(
                "focal set over {:?} in a mass over {:?}",
                set.scope(),
                scope
            )));
        }
        if set.is_empty() {
            return Err(DsError::Validation("mass on the empty set".into()));
        }
        if !v.is_finite() {
            return Err(DsError::Validation(format!("non-finite mass {v}")));
        }
        *focal.entry(set.into_bits()).or_insert(0.0) += v;
    }
    Ok(focal)
}

impl fmt::Debug for MassFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut map = f.debug_map();
        for (set, v) in self.iter() {
            map.entry(&set, &v);
        }
        map.finish()
    }
}
