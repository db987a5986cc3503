//! C ABI for `dsnet`.
//!
//! Every function returns a [`DsStatus`]; results are written through out
//! pointers only on success. Objects are opaque handles released with their
//! `_free` function, and strings returned by the library are released with
//! [`dsnet_string_free`]. After a failure, [`dsnet_last_error`] describes it
//! on the calling thread.
//!
//! Variable lists are comma-separated names. Events use the expression
//! syntax `X1=a|b,X2=c` (per-variable value sets) or `X1,X2:a.c;b.d`
//! (explicit configurations).

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;

use dsnet::dependence::ScoreContext;
use dsnet::learners::{compare_structures, learn_polytree, learn_tree, LearnedStructure};
use dsnet::network::{
    generate_network, indep_test, parse_network, write_network, BeliefNetwork, GenConfig,
    StructureKind, Verdict,
};
use dsnet::population::{condition_population, parse_event};
use dsnet::{
    sample_population, ConfigSet, Dataset, DsError, ErrorClass, Frame, MassFunction, Scope,
};

/// Call outcome. Values 2 to 4 match the `dsnet` CLI exit codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DsStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// Malformed input, unknown names, scope mismatches, invalid UTF-8.
    Validation = 2,
    /// Total conflict, no solution, empty conditioned population.
    Numerical = 3,
    /// A size limit was exceeded.
    Capacity = 4,
    /// The library panicked; the handle arguments should be discarded.
    Panic = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DsStructureKind {
    Tree = 0,
    Polytree = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DsVerdict {
    Independent = 0,
    Dependent = 1,
    Inconclusive = 2,
}

/// Structure comparison against a true network.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct DsMetrics {
    pub precision: f64,
    pub recall: f64,
    pub orientation_accuracy: f64,
    pub spurious_colliders: usize,
    pub true_colliders: usize,
}

/// Opaque set-valued dataset.
pub struct DsDataset(Dataset);

/// Opaque belief network.
pub struct DsNetwork(BeliefNetwork);

/// Opaque mass function.
pub struct DsMass(MassFunction);

/// Opaque learned structure.
pub struct DsStructure(LearnedStructure);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

enum Failure {
    Null(&'static str),
    Lib(DsError),
}

impl From<DsError> for Failure {
    fn from(e: DsError) -> Self {
        Failure::Lib(e)
    }
}

type FfiResult<T> = Result<T, Failure>;

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> FfiResult<()>) -> DsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => DsStatus::Ok,
        Ok(Err(Failure::Null(what))) => {
            set_last_error(format!("null pointer: {what}"));
            DsStatus::NullPointer
        }
        Ok(Err(Failure::Lib(e))) => {
            set_last_error(e.to_string());
            match e.class() {
                ErrorClass::Validation => DsStatus::Validation,
                ErrorClass::Numerical => DsStatus::Numerical,
                ErrorClass::Capacity => DsStatus::Capacity,
            }
        }
        Err(panic) => {
            let msg = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("panic: {msg}"));
            DsStatus::Panic
        }
    }
}

unsafe fn get<'a, T>(p: *const T, what: &'static str) -> FfiResult<&'a T> {
    p.as_ref().ok_or(Failure::Null(what))
}

unsafe fn text<'a>(p: *const c_char, what: &'static str) -> FfiResult<&'a str> {
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| DsError::Validation(format!("{what} is not valid UTF-8")).into())
}

unsafe fn put<T>(out: *mut T, value: T) -> FfiResult<()> {
    if out.is_null() {
        return Err(Failure::Null("output pointer"));
    }
    out.write(value);
    Ok(())
}

fn check_out<T>(out: *mut T) -> FfiResult<()> {
    if out.is_null() {
        Err(Failure::Null("output pointer"))
    } else {
        Ok(())
    }
}

fn boxed<T>(v: T) -> *mut T {
    Box::into_raw(Box::new(v))
}

fn c_string(s: String) -> FfiResult<*mut c_char> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|_| DsError::Validation("string contains a nul byte".into()).into())
}

/// Scope named by a comma-separated list; an empty list is the empty scope.
fn scope_of(frame: &Arc<Frame>, vars: &str) -> FfiResult<Scope> {
    let names: Vec<&str> = vars
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .collect();
    Ok(frame.scope_of(&names)?)
}

fn var_list(frame: &Arc<Frame>, vars: &str) -> FfiResult<Vec<usize>> {
    Ok(vars
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|n| frame.var_index(n))
        .collect::<Result<_, _>>()?)
}

/// Event expression as a set over `scope`; the event must name only
/// variables of `scope`.
fn event_on(scope: &Scope, expr: &str) -> FfiResult<ConfigSet> {
    let event = parse_event(scope.frame(), expr)?;
    if !event.scope().is_subset_of(scope) {
        return Err(DsError::Scope(format!(
            "event over {:?} is not within {:?}",
            event.scope(),
            scope
        ))
        .into());
    }
    Ok(event.cylinder(scope)?)
}

/// Message for the last failed call on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn dsnet_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// Release a string returned by this library. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn dsnet_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

// ---- datasets ----

/// Parse a dataset in the line-oriented text format.
#[no_mangle]
pub unsafe extern "C" fn dsnet_dataset_parse(
    src: *const c_char,
    out: *mut *mut DsDataset,
) -> DsStatus {
    guard(|| {
        check_out(out)?;
        let ds = Dataset::parse(text(src, "src")?)?;
        put(out, boxed(DsDataset(ds)))
    })
}

#[no_mangle]
pub unsafe extern "C" fn dsnet_dataset_len(ds: *const DsDataset, out: *mut usize) -> DsStatus {
    guard(|| put(out, get(ds, "ds")?.0.len()))
}

/// Serialize to the dataset text format; free with [`dsnet_string_free`].
#[no_mangle]
pub unsafe extern "C" fn dsnet_dataset_to_text(
    ds: *const DsDataset,
    out: *mut *mut c_char,
) -> DsStatus {
    guard(|| {
        check_out(out)?;
        put(out, c_string(get(ds, "ds")?.0.to_text())?)
    })
}

/// Reject records disjoint from the event and narrow the rest to it.
#[no_mangle]
pub unsafe extern "C" fn dsnet_dataset_condition(
    ds: *const DsDataset,
    event: *const c_char,
    out: *mut *mut DsDataset,
) -> DsStatus {
    guard(|| {
        check_out(out)?;
        let ds = &get(ds, "ds")?.0;
        let event = parse_event(ds.frame(), text(event, "event")?)?;
        put(out, boxed(DsDataset(condition_population(ds, &event)?)))
    })
}

/// Relative-frequency mass over `vars` (null: every variable).
#[no_mangle]
pub unsafe extern "C" fn dsnet_dataset_empirical_mass(
    ds: *const DsDataset,
    vars: *const c_char,
    out: *mut *mut DsMass,
) -> DsStatus {
    guard(|| {
        check_out(out)?;
        let ds = &get(ds, "ds")?.0;
        let scope = if vars.is_null() {
            ds.frame().full_scope()
        } else {
            scope_of(ds.frame(), text(vars, "vars")?)?
        };
        put(out, boxed(DsMass(ds.empirical_mass(&scope)?)))
    })
}

#[no_mangle]
pub unsafe extern "C" fn dsnet_dataset_free(ds: *mut DsDataset) {
    if !ds.is_null() {
        drop(Box::from_raw(ds));
    }
}

// ---- networks ----

/// Parse a JSON network document.
#[no_mangle]
pub unsafe extern "C" fn dsnet_network_parse(
    json: *const c_char,
    out: *mut *mut DsNetwork,
) -> DsStatus {
    guard(|| {
        check_out(out)?;
        let net = parse_network(text(json, "json")?)?;
        put(out, boxed(DsNetwork(net)))
    })
}

/// Random network over `n_vars` variables named `X1..Xn` with the given
/// domain sizes (null: all binary).
#[no_mangle]
pub unsafe extern "C" fn dsnet_network_generate(
    kind: DsStructureKind,
    n_vars: usize,
    domain_sizes: *const usize,
    focal_budget: usize,
    seed: u64,
    out: *mut *mut DsNetwork,
) -> DsStatus {
    guard(|| {
        check_out(out)?;
        let sizes = if domain_sizes.is_null() {
            vec![2; n_vars]
        } else {
            std::slice::from_raw_parts(domain_sizes, n_vars).to_vec()
        };
        let frame = Frame::with_sizes(&sizes)?;
        let cfg = GenConfig {
            focal_budget,
            ..GenConfig::default()
        };
        let kind = match kind {
            DsStructureKind::Tree => StructureKind::Tree,
            DsStructureKind::Polytree => StructureKind::Polytree,
        };
        put(
            out,
            boxed(DsNetwork(generate_network(kind, &frame, &cfg, seed)?)),
        )
    })
}

/// JSON document; free with [`dsnet_string_free`].
#[no_mangle]
pub unsafe extern "C" fn dsnet_network_to_json(
    net: *const DsNetwork,
    out: *mut *mut c_char,
) -> DsStatus {
    guard(|| {
        check_out(out)?;
        put(out, c_string(write_network(&get(net, "net")?.0))?)
    })
}

/// Underlying joint distribution (combination of all node valuations).
#[no_mangle]
pub unsafe extern "C" fn dsnet_network_joint(
    net: *const DsNetwork,
    out: *mut *mut DsMass,
) -> DsStatus {
    guard(|| {
        check_out(out)?;
        put(
            out,
            boxed(DsMass(get(net, "net")?.0.underlying_distribution()?)),
        )
    })
}

/// `n` records drawn from the underlying joint distribution.
#[no_mangle]
pub unsafe extern "C" fn dsnet_network_sample(
    net: *const DsNetwork,
    n: usize,
    seed: u64,
    out: *mut *mut DsDataset,
) -> DsStatus {
    guard(|| {
        check_out(out)?;
        let joint = get(net, "net")?.0.underlying_distribution()?;
        put(out, boxed(DsDataset(sample_population(&joint, n, seed)?)))
    })
}

#[no_mangle]
pub unsafe extern "C" fn dsnet_network_free(net: *mut DsNetwork) {
    if !net.is_null() {
        drop(Box::from_raw(net));
    }
}

// ---- mass functions ----

/// Dempster combination over the union of both scopes.
#[no_mangle]
pub unsafe extern "C" fn dsnet_mass_combine(
    a: *const DsMass,
    b: *const DsMass,
    out: *mut *mut DsMass,
) -> DsStatus {
    guard(|| {
        check_out(out)?;
        let m = get(a, "a")?.0.combine(&get(b, "b")?.0)?;
        put(out, boxed(DsMass(m)))
    })
}

/// Condition on an event over variables of the mass's scope.
#[no_mangle]
pub unsafe extern "C" fn dsnet_mass_condition(
    m: *const DsMass,
    event: *const c_char,
    out: *mut *mut DsMass,
) -> DsStatus {
    guard(|| {
        check_out(out)?;
        let m = &get(m, "m")?.0;
        let event = parse_event(m.scope().frame(), text(event, "event")?)?;
        put(out, boxed(DsMass(m.condition(&event)?)))
    })
}

/// Marginal on the listed variables.
#[no_mangle]
pub unsafe extern "C" fn dsnet_mass_marginalize(
    m: *const DsMass,
    vars: *const c_char,
    out: *mut *mut DsMass,
) -> DsStatus {
    guard(|| {
        check_out(out)?;
        let m = &get(m, "m")?.0;
        let scope = scope_of(m.scope().frame(), text(vars, "vars")?)?;
        put(out, boxed(DsMass(m.marginalize(&scope)?)))
    })
}

/// `Bel(A)` for an event within the mass's scope.
#[no_mangle]
pub unsafe extern "C" fn dsnet_mass_belief(
    m: *const DsMass,
    event: *const c_char,
    out: *mut f64,
) -> DsStatus {
    guard(|| {
        check_out(out)?;
        let m = &get(m, "m")?.0;
        put(out, m.belief(&event_on(m.scope(), text(event, "event")?)?)?)
    })
}

/// `Pl(A)` for an event within the mass's scope.
#[no_mangle]
pub unsafe extern "C" fn dsnet_mass_plausibility(
    m: *const DsMass,
    event: *const c_char,
    out: *mut f64,
) -> DsStatus {
    guard(|| {
        check_out(out)?;
        let m = &get(m, "m")?.0;
        put(
            out,
            m.plausibility(&event_on(m.scope(), text(event, "event")?)?)?,
        )
    })
}

#[no_mangle]
pub unsafe extern "C" fn dsnet_mass_focal_count(m: *const DsMass, out: *mut usize) -> DsStatus {
    guard(|| put(out, get(m, "m")?.0.len()))
}

/// L1 distance between two masses over the same scope.
#[no_mangle]
pub unsafe extern "C" fn dsnet_mass_l1_distance(
    a: *const DsMass,
    b: *const DsMass,
    out: *mut f64,
) -> DsStatus {
    guard(|| {
        check_out(out)?;
        put(out, get(a, "a")?.0.l1_distance(&get(b, "b")?.0)?)
    })
}

#[no_mangle]
pub unsafe extern "C" fn dsnet_mass_free(m: *mut DsMass) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Test `I(J, K | L)` in `m`. `residual` receives NaN when the test is
/// inconclusive. `l` may be null or empty.
#[no_mangle]
pub unsafe extern "C" fn dsnet_indep_test(
    m: *const DsMass,
    j: *const c_char,
    k: *const c_char,
    l: *const c_char,
    epsilon: f64,
    verdict: *mut DsVerdict,
    residual: *mut f64,
) -> DsStatus {
    guard(|| {
        check_out(verdict)?;
        check_out(residual)?;
        let m = &get(m, "m")?.0;
        let frame = m.scope().frame();
        let l = if l.is_null() {
            Vec::new()
        } else {
            var_list(frame, text(l, "l")?)?
        };
        let st = indep_test(
            m,
            &var_list(frame, text(j, "j")?)?,
            &var_list(frame, text(k, "k")?)?,
            &l,
            epsilon,
        )?;
        put(
            verdict,
            match st.verdict {
                Verdict::Independent => DsVerdict::Independent,
                Verdict::Dependent => DsVerdict::Dependent,
                Verdict::Inconclusive(_) => DsVerdict::Inconclusive,
            },
        )?;
        put(residual, st.residual.unwrap_or(f64::NAN))
    })
}

// ---- structure learning ----

fn learn(ctx: &ScoreContext, kind: DsStructureKind, theta: f64) -> FfiResult<LearnedStructure> {
    Ok(match kind {
        DsStructureKind::Tree => learn_tree(ctx)?,
        DsStructureKind::Polytree => learn_polytree(ctx, theta)?,
    })
}

/// Learn from the empirical masses of a dataset. `theta` applies to polytrees.
#[no_mangle]
pub unsafe extern "C" fn dsnet_learn_dataset(
    ds: *const DsDataset,
    kind: DsStructureKind,
    theta: f64,
    out: *mut *mut DsStructure,
) -> DsStatus {
    guard(|| {
        check_out(out)?;
        let ctx = ScoreContext::from_dataset(get(ds, "ds")?.0.clone())?;
        put(out, boxed(DsStructure(learn(&ctx, kind, theta)?)))
    })
}

/// Learn from the exact marginals of a network's joint distribution.
#[no_mangle]
pub unsafe extern "C" fn dsnet_learn_exact(
    net: *const DsNetwork,
    kind: DsStructureKind,
    theta: f64,
    out: *mut *mut DsStructure,
) -> DsStatus {
    guard(|| {
        check_out(out)?;
        let ctx = ScoreContext::from_joint(get(net, "net")?.0.underlying_distribution()?)?;
        put(out, boxed(DsStructure(learn(&ctx, kind, theta)?)))
    })
}

#[no_mangle]
pub unsafe extern "C" fn dsnet_structure_edge_count(
    st: *const DsStructure,
    out: *mut usize,
) -> DsStatus {
    guard(|| put(out, get(st, "st")?.0.skeleton.len()))
}

/// Skeleton edge `i` as variable indices `a < b` with its weight.
/// `orientation` is 1 for `a -> b`, -1 for `b -> a`, 0 when undirected.
#[no_mangle]
pub unsafe extern "C" fn dsnet_structure_edge(
    st: *const DsStructure,
    i: usize,
    a: *mut usize,
    b: *mut usize,
    orientation: *mut i32,
    weight: *mut f64,
) -> DsStatus {
    guard(|| {
        for p in [a, b] {
            check_out(p)?;
        }
        check_out(orientation)?;
        check_out(weight)?;
        let st = &get(st, "st")?.0;
        let &(x, y, w) = st.skeleton.get(i).ok_or_else(|| {
            DsError::Domain(format!(
                "edge {i} out of range for {} edges",
                st.skeleton.len()
            ))
        })?;
        let o = if st.is_oriented(x, y) {
            1
        } else if st.is_oriented(y, x) {
            -1
        } else {
            0
        };
        put(a, x)?;
        put(b, y)?;
        put(orientation, o)?;
        put(weight, w)
    })
}

/// Tab-separated edge, collider and warning rows as printed by `dsnet learn`.
#[no_mangle]
pub unsafe extern "C" fn dsnet_structure_report(
    st: *const DsStructure,
    out: *mut *mut c_char,
) -> DsStatus {
    guard(|| {
        check_out(out)?;
        put(
            out,
            c_string(dsnet::cli::structure_rows(&get(st, "st")?.0))?,
        )
    })
}

/// Compare with the structure of a true network.
#[no_mangle]
pub unsafe extern "C" fn dsnet_structure_compare(
    st: *const DsStructure,
    truth: *const DsNetwork,
    out: *mut DsMetrics,
) -> DsStatus {
    guard(|| {
        check_out(out)?;
        let m = compare_structures(get(truth, "truth")?.0.dag(), &get(st, "st")?.0)?;
        put(
            out,
            DsMetrics {
                precision: m.precision,
                recall: m.recall,
                orientation_accuracy: m.orientation_accuracy,
                spurious_colliders: m.spurious_colliders,
                true_colliders: m.true_colliders,
            },
        )
    })
}

#[no_mangle]
pub unsafe extern "C" fn dsnet_structure_free(st: *mut DsStructure) {
    if !st.is_null() {
        drop(Box::from_raw(st));
    }
}
