//! Dependence scores between variables of a belief distribution.
//!
//! `f(x;p) = Σ_{p(A)>0} p(A)·ln x(A)` scores how well a (pseudo) mass `x`
//! reproduces a proper reference `p`, with `ln` of a non-positive value taken
//! as `-∞`. It is normalized to `g = f(x;p)/f(p;p) ∈ [1,∞)` and mapped to an
//! agreement `a = e^{1-g} ∈ [0,1]`.
//!
//! A pair `(X1,X2)` is compared against two kinds of approximation of its
//! joint marginal: the independent product `m↓X1 ⊕ m↓X2`, and for every third
//! variable `X3` the ternary joint
//! `(m↓X1X3|X3 ⊕ m↓X2X3|X3 ⊕ m↓X3)↓X1X2` built from mk-conditionals.
//! [`dep0`] is one minus the best agreement; [`criterion`] compares the two
//! kinds to detect head-to-head meetings at `X3`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use log::warn;

use crate::error::{DsError, Result};
use crate::frames::{Frame, Scope};
use crate::mass::MassFunction;
use crate::population::Dataset;

/// `f(x;p)`; `-∞` when `x` is non-positive on some focal set of `p`.
pub fn f_score(x: &MassFunction, p: &MassFunction) -> Result<f64> {
    if x.scope() != p.scope() {
        return Err(DsError::Scope(format!(
            "scoring a mass over {:?} against one over {:?}",
            x.scope(),
            p.scope()
        )));
    }
    let mut f = 0.0;
    for (set, pv) in p.focal_bits() {
        if pv <= 0.0 {
            continue;
        }
        let xv = x.mass_bits(set);
        if xv <= 0.0 {
            return Ok(f64::NEG_INFINITY);
        }
        f += pv * xv.ln();
    }
    Ok(f)
}

/// `g(x;p) = f(x;p)/f(p;p)`. Fails with [`DsError::DegenerateReference`]
/// when `f(p;p) = 0`, i.e. `p` has a single focal set.
pub fn g_score(x: &MassFunction, p: &MassFunction) -> Result<f64> {
    let fp = f_score(p, p)?;
    if fp == 0.0 {
        return Err(DsError::DegenerateReference);
    }
    let fx = f_score(x, p)?;
    if fx == f64::NEG_INFINITY {
        return Ok(f64::INFINITY);
    }
    Ok(fx / fp)
}

/// Agreement `a(x;p) = e^{1-g(x;p)}`, clamped to `[0,1]`.
///
/// For a categorical reference the agreement is the exact-match indicator
/// `|f(x;p)| <= 1e-12`.
pub fn a_score(x: &MassFunction, p: &MassFunction) -> Result<f64> {
    match g_score(x, p) {
        Ok(g) if g == f64::INFINITY => Ok(0.0),
        Ok(g) => Ok((1.0 - g).exp().clamp(0.0, 1.0)),
        Err(DsError::DegenerateReference) => {
            let fx = f_score(x, p)?;
            Ok(if fx.abs() <= 1e-12 { 1.0 } else { 0.0 })
        }
        Err(e) => Err(e),
    }
}

/// Source of marginal mass functions for a score context.
pub trait MarginalSource: Send + Sync {
    fn frame(&self) -> &Arc<Frame>;
    fn marginal(&self, scope: &Scope) -> Result<MassFunction>;
}

impl MarginalSource for Dataset {
    fn frame(&self) -> &Arc<Frame> {
        Dataset::frame(self)
    }

    fn marginal(&self, scope: &Scope) -> Result<MassFunction> {
        self.empirical_mass(scope)
    }
}

/// Marginals of a known joint distribution over the full frame.
pub struct ExactJoint(MassFunction);

impl ExactJoint {
    pub fn new(joint: MassFunction) -> Result<Self> {
        let full = joint.scope().frame().full_scope();
        Ok(ExactJoint(joint.extend(&full)?))
    }

    pub fn joint(&self) -> &MassFunction {
        &self.0
    }
}

impl MarginalSource for ExactJoint {
    fn frame(&self) -> &Arc<Frame> {
        self.0.scope().frame()
    }

    fn marginal(&self, scope: &Scope) -> Result<MassFunction> {
        self.0.marginalize(scope)
    }
}

/// Memoizing provider of marginals over a fixed variable set.
pub struct ScoreContext {
    source: Box<dyn MarginalSource>,
    cache: Mutex<HashMap<Vec<usize>, Arc<MassFunction>>>,
}

impl ScoreContext {
    pub fn new(source: impl MarginalSource + 'static) -> Self {
        ScoreContext {
            source: Box::new(source),
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn from_dataset(ds: Dataset) -> Result<Self> {
        if ds.is_empty() {
            return Err(DsError::EmptyDataset);
        }
        Ok(ScoreContext::new(ds))
    }

    pub fn from_joint(joint: MassFunction) -> Result<Self> {
        Ok(ScoreContext::new(ExactJoint::new(joint)?))
    }

    pub fn frame(&self) -> &Arc<Frame> {
        self.source.frame()
    }

    pub fn n_vars(&self) -> usize {
        self.frame().len()
    }

    pub fn scope(&self, vars: &[usize]) -> Result<Scope> {
        if let Some(&v) = vars.iter().find(|&&v| v >= self.n_vars()) {
            return Err(DsError::Domain(format!("variable index {v} out of range")));
        }
        Ok(Scope::new(self.frame(), vars.to_vec()))
    }

    /// Marginal on the given variables (order irrelevant).
    pub fn marginal(&self, vars: &[usize]) -> Result<Arc<MassFunction>> {
        let scope = self.scope(vars)?;
        let key = scope.vars().to_vec();
        if let Some(m) = self.cache.lock().unwrap().get(&key) {
            return Ok(Arc::clone(m));
        }
        let m = Arc::new(self.source.marginal(&scope)?);
        let mut cache = self.cache.lock().unwrap();
        Ok(Arc::clone(cache.entry(key).or_insert(m)))
    }
}

fn distinct(vars: &[usize]) -> Result<()> {
    for i in 0..vars.len() {
        if vars[i + 1..].contains(&vars[i]) {
            return Err(DsError::Validation(format!(
                "variables must be distinct, got {vars:?}"
            )));
        }
    }
    Ok(())
}

/// Ternary joint of `(x1,x2)` with background `x3`, over `{x1,x2}`.
/// May be a pseudo mass.
pub fn ternary_joint(ctx: &ScoreContext, x1: usize, x2: usize, x3: usize) -> Result<MassFunction> {
    distinct(&[x1, x2, x3])?;
    let (x1, x2) = (x1.min(x2), x1.max(x2));
    let background = ctx.scope(&[x3])?;
    let m3 = ctx.marginal(&[x3])?;
    let c13 = ctx.marginal(&[x1, x3])?.mk_conditional(&background)?;
    let c23 = ctx.marginal(&[x2, x3])?.mk_conditional(&background)?;
    m3.combine(&c13)?
        .combine(&c23)?
        .marginalize(&ctx.scope(&[x1, x2])?)
}

/// `m↓X1 ⊕ m↓X2` over `{x1,x2}`.
pub fn product_approximation(ctx: &ScoreContext, x1: usize, x2: usize) -> Result<MassFunction> {
    distinct(&[x1, x2])?;
    let m2 = ctx.marginal(&[x2])?;
    ctx.marginal(&[x1])?.combine(&m2)
}

/// Value of [`dep0`] with the terms it was derived from.
#[derive(Debug, Clone)]
pub struct Dep0 {
    pub value: f64,
    /// Agreement of the independent product with the pair marginal.
    pub product_agreement: f64,
    /// Background variable with the best ternary agreement, if any.
    pub best_background: Option<(usize, f64)>,
    /// Backgrounds whose ternary joint could not be formed.
    pub skipped: Vec<(usize, DsError)>,
}

/// `1 - max(a(product; pair), max over X3 of a(ternary via X3; pair))`.
///
/// Backgrounds whose ternary joint has no solution or totally conflicts are
/// skipped with a warning.
pub fn dep0(ctx: &ScoreContext, x1: usize, x2: usize) -> Result<Dep0> {
    distinct(&[x1, x2])?;
    let (x1, x2) = (x1.min(x2), x1.max(x2));
    let pair = ctx.marginal(&[x1, x2])?;
    let product_agreement = a_score(&product_approximation(ctx, x1, x2)?, &pair)?;
    let mut best = product_agreement;
    let mut best_background = None;
    let mut skipped = Vec::new();
    for x3 in (0..ctx.n_vars()).filter(|&v| v != x1 && v != x2) {
        match ternary_joint(ctx, x1, x2, x3) {
            Ok(t) => {
                let a = a_score(&t, &pair)?;
                if best_background.is_none_or(|(_, b)| a > b) {
                    best_background = Some((x3, a));
                }
                best = best.max(a);
            }
            Err(
                e @ (DsError::NoSolution(_)
                | DsError::TotalConflict { .. }
                | DsError::VanishingNormalizer { .. }),
            ) => {
                warn!("dep0({x1},{x2}): background {x3} skipped: {e}");
                skipped.push((x3, e));
            }
            Err(e) => return Err(e),
        }
    }
    Ok(Dep0 {
        value: (1.0 - best).clamp(0.0, 1.0),
        product_agreement,
        best_background,
        skipped,
    })
}

/// Head-to-head criterion for `x1 → x3 ← x2`:
/// `(1 - a(ternary via x3; pair)) - (1 - a(product; pair))`.
/// Positive values indicate a head-to-head meeting at `x3`.
pub fn criterion(ctx: &ScoreContext, x1: usize, x2: usize, x3: usize) -> Result<f64> {
    distinct(&[x1, x2, x3])?;
    let (x1, x2) = (x1.min(x2), x1.max(x2));
    let pair = ctx.marginal(&[x1, x2])?;
    let a_ternary = a_score(&ternary_joint(ctx, x1, x2, x3)?, &pair)?;
    let a_product = a_score(&product_approximation(ctx, x1, x2)?, &pair)?;
    Ok((1.0 - a_ternary) - (1.0 - a_product))
}
