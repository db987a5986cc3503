//! Dense subset-lattice transforms over scopes with at most
//! [`DENSE_CONFIG_CAP`] configurations.
//!
//! A subset of the configuration space is addressed by a bitmask whose bit `i`
//! is configuration `i`, the same layout as the low word of a [`ConfigSet`].
//!
//! [`ConfigSet`]: crate::frames::ConfigSet

use std::collections::BTreeMap;

use crate::error::{DsError, Result};
use crate::frames::{Bits, Scope};
use crate::mass::MassFunction;

/// Largest configuration count for which the full subset lattice is built.
pub const DENSE_CONFIG_CAP: usize = 16;

pub(crate) fn check_dense(scope: &Scope) -> Result<usize> {
    let n = scope.config_count();
    if n > DENSE_CONFIG_CAP {
        return Err(DsError::Capacity(format!(
            "{scope:?} has {n} configurations; dense lattice operations allow at most {DENSE_CONFIG_CAP}"
        )));
    }
    Ok(n)
}

/// In place: `v[A] <- sum over B ⊇ A of v[B]`.
pub fn superset_zeta(v: &mut [f64], n: usize) {
    debug_assert_eq!(v.len(), 1 << n);
    for i in 0..n {
        let bit = 1usize << i;
        for mask in 0..v.len() {
            if mask & bit == 0 {
                v[mask] += v[mask | bit];
            }
        }
    }
}

/// Inverse of [`superset_zeta`]: `v[A] <- sum over B ⊇ A of (-1)^|B\A| v[B]`.
pub fn superset_mobius(v: &mut [f64], n: usize) {
    debug_assert_eq!(v.len(), 1 << n);
    for i in 0..n {
        let bit = 1usize << i;
        for mask in 0..v.len() {
            if mask & bit == 0 {
                v[mask] -= v[mask | bit];
            }
        }
    }
}

/// Masses laid out over the whole lattice (entry 0 is the empty set).
pub fn mass_vector(m: &MassFunction) -> Result<Vec<f64>> {
    let n = check_dense(m.scope())?;
    let mut v = vec![0.0; 1 << n];
    for (bits, mass) in m.focal_bits() {
        v[bits.low_word() as usize] += mass;
    }
    Ok(v)
}

/// Commonality `Q(A)` for every subset `A`; `Q(∅)` is the total mass.
pub fn commonality_vector(m: &MassFunction) -> Result<Vec<f64>> {
    let n = check_dense(m.scope())?;
    let mut v = mass_vector(m)?;
    superset_zeta(&mut v, n);
    Ok(v)
}

/// Recover a mass function from commonality values on all subsets.
///
/// `q[0]` is ignored and taken to be 1. Any mass the inversion places on the
/// empty set is dropped and the rest renormalized to sum to 1, so the result
/// may be a pseudo mass function.
pub fn mobius_mass_from_commonality(scope: &Scope, q: &[f64]) -> Result<MassFunction> {
    let n = check_dense(scope)?;
    if q.len() != 1 << n {
        return Err(DsError::Validation(format!(
            "expected {} commonality values, got {}",
            1usize << n,
            q.len()
        )));
    }
    let mut v = q.to_vec();
    v[0] = 1.0;
    superset_mobius(&mut v, n);
    let total: f64 = v[1..].iter().sum();
    if total.abs() <= crate::mass::ALGEBRA_TOL || !total.is_finite() {
        return Err(DsError::NoSolution(format!(
            "inverted masses on nonempty sets sum to {total:e}"
        )));
    }
    let len = scope.config_count();
    let mut focal = BTreeMap::new();
    for (mask, &mass) in v.iter().enumerate().skip(1) {
        if mass != 0.0 {
            focal.insert(Bits::from_low_word(len, mask as u64), mass / total);
        }
    }
    Ok(MassFunction::from_canonical(scope.clone(), focal))
}
