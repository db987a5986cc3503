//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Every run is seeded; the seeds are listed with each criterion. Criteria 3
//! and 5 use recovery thresholds that are calibrations, not derived bounds.

mod common;

use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use common::*;
use dsnet::dense::{commonality_vector, mobius_mass_from_commonality};
use dsnet::dependence::{a_score, dep0, f_score, ScoreContext};
use dsnet::learners::{compare_structures, learn_polytree, learn_tree, StructureMetrics};
use dsnet::network::{
    dsep, generate_network, indep_test, random_network, Dag, GenConfig, StructureKind, Verdict,
};
use dsnet::population::{condition_population, sample_population};
use dsnet::{ConfigSet, Dataset, DsError, Frame, MassFunction, Scope};
use rand::Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn within(limit: Duration, start: Instant, detail: String) -> Outcome {
    let took = start.elapsed();
    check(
        took < limit,
        format!("{detail}; {took:.2?} (limit {limit:?})"),
    )
}

fn binary_net(kind: StructureKind, n: usize, seed: u64) -> Result<(Dag, MassFunction), DsError> {
    let frame = Frame::uniform(n, 2)?;
    let net = generate_network(kind, &frame, &GenConfig::default(), seed)?;
    let joint = net.underlying_distribution()?;
    Ok((net.dag().clone(), joint))
}

fn skeleton_exact(m: &StructureMetrics) -> bool {
    m.precision == 1.0 && m.recall == 1.0
}

/// Seeds 0..1000.
fn conditioning_equivalence() -> Outcome {
    let start = Instant::now();
    let (mut worst, mut skipped) = (0.0f64, 0);
    for seed in 0..1000u64 {
        let mut r = rng(seed);
        let n = r.gen_range(2..=4);
        let frame = random_frame(&mut r, n, &[2, 3]);
        let full = frame.full_scope();
        let count = r.gen_range(1..=30);
        let records: Vec<ConfigSet> = (0..count)
            .map(|_| {
                if r.gen_bool(0.5) {
                    random_small_set(&mut r, &full)
                } else {
                    random_set(&mut r, &full)
                }
            })
            .collect();
        let ds = Dataset::new(&frame, records, "acceptance").map_err(|e| e.to_string())?;
        let event_scope = random_scope(&mut r, &frame);
        let event = random_set(&mut r, &event_scope);
        let conditioned = match condition_population(&ds, &event) {
            Ok(c) => c,
            Err(DsError::EmptyConditionedPopulation) => {
                skipped += 1;
                continue;
            }
            Err(e) => return Err(format!("seed {seed}: {e}")),
        };
        let gap = (|| {
            let direct = ds.empirical_mass(&full)?.condition(&event)?;
            conditioned.empirical_mass(&full)?.l1_distance(&direct)
        })()
        .map_err(|e| format!("seed {seed}: {e}"))?;
        if gap > 1e-12 {
            return Err(format!("seed {seed}: gap {gap:e}"));
        }
        worst = worst.max(gap);
    }
    within(
        Duration::from_secs(10),
        start,
        format!("1000 pairs, {skipped} fully conflicting skipped, max gap {worst:e}"),
    )
}

/// Seeds 0..20, n = 5 + seed mod 4.
fn exact_tree_recovery() -> Outcome {
    let start = Instant::now();
    let mut failed = Vec::new();
    for seed in 0..20u64 {
        let n = 5 + seed as usize % 4;
        let (dag, joint) = binary_net(StructureKind::Tree, n, seed).map_err(|e| e.to_string())?;
        let learned = ScoreContext::from_joint(joint)
            .and_then(|ctx| learn_tree(&ctx))
            .and_then(|l| compare_structures(&dag, &l))
            .map_err(|e| format!("seed {seed}: {e}"))?;
        if !skeleton_exact(&learned) {
            failed.push(seed);
        }
    }
    let detail = format!("{}/20 exact, failing seeds {failed:?}", 20 - failed.len());
    check(failed.is_empty(), detail).and_then(|d| within(Duration::from_secs(120), start, d))
}

/// Seeds 0..20 for structure, valuations and sampling. Calibrated threshold.
fn sampled_tree_recovery() -> Outcome {
    let start = Instant::now();
    let mut exact = 0;
    for seed in 0..20u64 {
        let (dag, joint) = binary_net(StructureKind::Tree, 8, seed).map_err(|e| e.to_string())?;
        let m = sample_population(&joint, 200, seed)
            .and_then(ScoreContext::from_dataset)
            .and_then(|ctx| learn_tree(&ctx))
            .and_then(|l| compare_structures(&dag, &l))
            .map_err(|e| format!("seed {seed}: {e}"))?;
        exact += skeleton_exact(&m) as usize;
    }
    let detail = format!("{exact}/20 exact (need 16, calibrated threshold)");
    check(exact >= 16, detail).and_then(|d| within(Duration::from_secs(120), start, d))
}

/// Seeds 0..20.
fn exact_polytree_recovery() -> Outcome {
    let mut failed = Vec::new();
    let mut colliders = 0;
    for seed in 0..20u64 {
        let (dag, joint) =
            binary_net(StructureKind::Polytree, 6, seed).map_err(|e| e.to_string())?;
        let m = ScoreContext::from_joint(joint)
            .and_then(|ctx| learn_polytree(&ctx, 0.0))
            .and_then(|l| compare_structures(&dag, &l))
            .map_err(|e| format!("seed {seed}: {e}"))?;
        colliders += m.true_colliders;
        if !(skeleton_exact(&m) && m.orientation_accuracy == 1.0 && m.spurious_colliders == 0) {
            failed.push((seed, m));
        }
    }
    check(
        failed.is_empty(),
        format!(
            "{}/20 perfect over {colliders} true colliders, failures {failed:?}",
            20 - failed.len()
        ),
    )
}

/// Seeds 0..10 for structure, valuations and sampling. Calibrated threshold.
fn sampled_polytree_recovery() -> Outcome {
    let start = Instant::now();
    let (mut exact, mut orientation, mut spurious) = (0, 0.0, 0);
    for seed in 0..10u64 {
        let (dag, joint) =
            binary_net(StructureKind::Polytree, 6, seed).map_err(|e| e.to_string())?;
        let m = sample_population(&joint, 5000, seed)
            .and_then(ScoreContext::from_dataset)
            .and_then(|ctx| learn_polytree(&ctx, 0.0))
            .and_then(|l| compare_structures(&dag, &l))
            .map_err(|e| format!("seed {seed}: {e}"))?;
        exact += skeleton_exact(&m) as usize;
        orientation += m.orientation_accuracy;
        spurious += m.spurious_colliders;
    }
    let detail = format!(
        "{exact}/10 skeletons exact (need 8, calibrated threshold); mean orientation accuracy {:.3}; {spurious} spurious colliders",
        orientation / 10.0
    );
    check(exact >= 8, detail).and_then(|d| within(Duration::from_secs(600), start, d))
}

/// Runs `law` on seeds from 0 until `target` instances were checked; the
/// law returns `Ok(false)` for a seed that yields no instance.
fn law(
    name: &str,
    target: usize,
    mut f: impl FnMut(u64) -> Result<bool, String>,
) -> Result<String, String> {
    let mut done = 0;
    let mut seed = 0u64;
    while done < target {
        if seed > 20 * target as u64 {
            return Err(format!("{name}: only {done} instances"));
        }
        if f(seed).map_err(|e| format!("{name}, seed {seed}: {e}"))? {
            done += 1;
        }
        seed += 1;
    }
    Ok(format!("{name} {done}"))
}

fn err(e: DsError) -> String {
    e.to_string()
}

/// Frame with at most 16 configurations.
fn dense_frame(r: &mut TestRng) -> Arc<Frame> {
    const SHAPES: &[&[usize]] = &[
        &[2, 2],
        &[2, 3],
        &[3, 3],
        &[2, 2, 2],
        &[2, 2, 3],
        &[2, 2, 4],
        &[2, 2, 2, 2],
    ];
    Frame::with_sizes(SHAPES[r.gen_range(0..SHAPES.len())]).unwrap()
}

/// Dataset of product records and the same records over the reversed frame.
fn mirrored_datasets(
    r: &mut TestRng,
    n: usize,
    count: usize,
) -> Result<(Dataset, Dataset), DsError> {
    let frame = random_frame(r, n, &[2, 3]);
    let reversed = Frame::new(
        frame
            .variables()
            .iter()
            .rev()
            .map(|v| (v.name().to_string(), v.labels().to_vec())),
    )?;
    let (mut a, mut b) = (Vec::new(), Vec::new());
    for _ in 0..count {
        let values: Vec<Vec<usize>> = (0..n)
            .map(|v| {
                let single = Scope::new(&frame, vec![v]);
                random_small_set(r, &single).indices().collect()
            })
            .collect();
        let parts = |f: &Arc<Frame>,
                     at: &dyn Fn(usize) -> usize|
         -> Result<Vec<ConfigSet>, DsError> {
            (0..n)
                .map(|i| {
                    ConfigSet::from_indices(&Scope::new(f, vec![i]), values[at(i)].iter().copied())
                })
                .collect()
        };
        a.push(ConfigSet::product(&parts(&frame, &|i| i)?)?);
        b.push(ConfigSet::product(&parts(&reversed, &|i| n - 1 - i)?)?);
    }
    Ok((
        Dataset::new(&frame, a, "mirror")?,
        Dataset::new(&reversed, b, "mirror")?,
    ))
}

fn calculus_properties() -> Outcome {
    const N: usize = 500;
    let mut lines = Vec::new();

    lines.push(law("commutativity", N, |seed| {
        let mut r = rng(seed);
        let frame = random_frame(&mut r, 3, &[2, 3]);
        let (sa, sb) = (random_scope(&mut r, &frame), random_scope(&mut r, &frame));
        let (a, b) = (random_mass(&mut r, &sa, 4), random_mass(&mut r, &sb, 4));
        match (a.combine(&b), b.combine(&a)) {
            (Ok(x), Ok(y)) => {
                let d = x.l1_distance(&y).map_err(err)?;
                if d > 1e-9 {
                    return Err(format!("distance {d:e}"));
                }
                Ok(true)
            }
            (Err(DsError::TotalConflict { .. }), Err(DsError::TotalConflict { .. })) => Ok(false),
            (x, y) => Err(format!("{x:?} vs {y:?}")),
        }
    })?);

    lines.push(law("associativity", N, |seed| {
        let mut r = rng(seed);
        let frame = random_frame(&mut r, 3, &[2, 3]);
        let s: Vec<Scope> = (0..3).map(|_| random_scope(&mut r, &frame)).collect();
        let m: Vec<MassFunction> = s.iter().map(|s| random_mass(&mut r, s, 3)).collect();
        let left = m[0].combine(&m[1]).and_then(|x| x.combine(&m[2]));
        let right = m[1].combine(&m[2]).and_then(|x| m[0].combine(&x));
        match (left, right) {
            (Ok(x), Ok(y)) => {
                let d = x.l1_distance(&y).map_err(err)?;
                if d > 1e-9 {
                    return Err(format!("distance {d:e}"));
                }
                Ok(true)
            }
            (Err(DsError::TotalConflict { .. }), Err(DsError::TotalConflict { .. })) => Ok(false),
            (x, y) => Err(format!("{x:?} vs {y:?}")),
        }
    })?);

    lines.push(law("vacuous neutrality", N, |seed| {
        let mut r = rng(seed);
        let frame = random_frame(&mut r, 3, &[2, 3]);
        let s = random_scope(&mut r, &frame);
        let m = random_mass(&mut r, &s, 5);
        let same = m.combine(&MassFunction::vacuous(&s)).map_err(err)?;
        let wider = m
            .combine(&MassFunction::vacuous(&frame.full_scope()))
            .map_err(err)?;
        if same != m || wider != m.extend(&frame.full_scope()).map_err(err)? {
            return Err("combining with the vacuous mass changed the operand".into());
        }
        Ok(true)
    })?);

    lines.push(law("marginalize after extend", N, |seed| {
        let mut r = rng(seed);
        let frame = random_frame(&mut r, 4, &[2, 3]);
        let s = random_scope(&mut r, &frame);
        let t = s.union(&random_scope(&mut r, &frame)).map_err(err)?;
        let m = random_mass(&mut r, &s, 5);
        if m.extend(&t).and_then(|x| x.marginalize(&s)).map_err(err)? != m {
            return Err("round trip changed the mass".into());
        }
        Ok(true)
    })?);

    lines.push(law("Möbius roundtrip", N, |seed| {
        let mut r = rng(seed);
        let frame = dense_frame(&mut r);
        let s = frame.full_scope();
        let m = random_mass(&mut r, &s, 6);
        let back =
            mobius_mass_from_commonality(&s, &commonality_vector(&m).map_err(err)?).map_err(err)?;
        let d = back.l1_distance(&m).map_err(err)?;
        if d > 1e-12 {
            return Err(format!("distance {d:e}"));
        }
        Ok(true)
    })?);

    lines.push(law("commonality product", N, |seed| {
        let mut r = rng(seed);
        let frame = dense_frame(&mut r);
        let full = frame.full_scope();
        let (sa, sb) = (random_scope(&mut r, &frame), random_scope(&mut r, &frame));
        let (a, b) = (random_mass(&mut r, &sa, 4), random_mass(&mut r, &sb, 4));
        let (ea, eb) = (a.extend(&full).map_err(err)?, b.extend(&full).map_err(err)?);
        let mut agree = 0.0;
        for (fa, va) in ea.iter() {
            for (fb, vb) in eb.iter() {
                if !fa.intersect(&fb).map_err(err)?.is_empty() {
                    agree += va * vb;
                }
            }
        }
        let c = match a.combine(&b) {
            Ok(c) => c.extend(&full).map_err(err)?,
            Err(DsError::TotalConflict { .. }) => return Ok(false),
            Err(e) => return Err(e.to_string()),
        };
        let (qa, qb, qc) = (
            commonality_vector(&ea).map_err(err)?,
            commonality_vector(&eb).map_err(err)?,
            commonality_vector(&c).map_err(err)?,
        );
        for mask in 1..qc.len() {
            let d = (qc[mask] - qa[mask] * qb[mask] / agree).abs();
            if d > 1e-9 {
                return Err(format!("subset {mask:#b}: off by {d:e}"));
            }
        }
        Ok(true)
    })?);

    lines.push(law("a-score range", N, |seed| {
        let mut r = rng(seed);
        let frame = random_frame(&mut r, 2, &[2, 3]);
        let s = frame.full_scope();
        let k = r.gen_range(1..=5);
        let (x, p) = (random_mass(&mut r, &s, 4), random_mass(&mut r, &s, k));
        let a = a_score(&x, &p).map_err(err)?;
        let ap = a_score(&p, &p).map_err(err)?;
        if !(0.0..=1.0).contains(&a) || ap != 1.0 {
            return Err(format!("a(x;p) = {a}, a(p;p) = {ap}"));
        }
        Ok(true)
    })?);

    lines.push(law("Gibbs bound", N, |seed| {
        let mut r = rng(seed);
        let frame = random_frame(&mut r, 2, &[2, 3]);
        let s = frame.full_scope();
        let (x, p) = (random_mass(&mut r, &s, 5), random_mass(&mut r, &s, 5));
        let (fx, fp) = (f_score(&x, &p).map_err(err)?, f_score(&p, &p).map_err(err)?);
        if fx > fp + 1e-12 {
            return Err(format!("f(x;p) = {fx} > f(p;p) = {fp}"));
        }
        Ok(true)
    })?);

    lines.push(law("dep0 symmetry", N, |seed| {
        let mut r = rng(seed);
        let n = r.gen_range(3..=4);
        let (ds, mirrored) = mirrored_datasets(&mut r, n, 30).map_err(err)?;
        let (ctx, rev) = (
            ScoreContext::from_dataset(ds).map_err(err)?,
            ScoreContext::from_dataset(mirrored).map_err(err)?,
        );
        let x1 = r.gen_range(0..n);
        let x2 = (x1 + r.gen_range(1..n)) % n;
        let values = [
            dep0(&ctx, x1, x2).map_err(err)?.value,
            dep0(&ctx, x2, x1).map_err(err)?.value,
            dep0(&rev, n - 1 - x1, n - 1 - x2).map_err(err)?.value,
        ];
        if (values[0] - values[1]).abs() > 1e-9 || (values[0] - values[2]).abs() > 1e-9 {
            return Err(format!("dep0 values {values:?}"));
        }
        Ok(true)
    })?);

    Ok(lines.join(", "))
}

/// Seeds 0..500.
fn mk_conditional_residual() -> Outcome {
    let mut no_solution = 0;
    let mut worst = 0.0f64;
    for seed in 0..500u64 {
        let mut r = rng(seed);
        let frame = loop {
            let f = dense_frame(&mut r);
            if f.len() <= 3 {
                break f;
            }
        };
        let full = frame.full_scope();
        let k = r.gen_range(2..=6);
        let m = random_mass(&mut r, &full, k);
        let cond = loop {
            let s = random_scope(&mut r, &frame);
            if s.len() < frame.len() {
                break s;
            }
        };
        match m.mk_conditional(&cond) {
            Ok(rest) => {
                let back = m
                    .marginalize(&cond)
                    .and_then(|marginal| marginal.combine(&rest))
                    .map_err(|e| format!("seed {seed}: recombination failed: {e}"))?;
                let d = back.l1_distance(&m).map_err(|e| e.to_string())?;
                if d > 1e-6 {
                    return Err(format!("seed {seed}: residual {d:e}"));
                }
                worst = worst.max(d);
            }
            Err(DsError::NoSolution(_)) => no_solution += 1,
            Err(e) => return Err(format!("seed {seed}: {e}")),
        }
    }
    Ok(format!(
        "500 masses, no-solution rate {:.1}% ({no_solution}), max residual {worst:e}",
        no_solution as f64 / 5.0
    ))
}

/// Networks from seeds 0..: trees, polytrees and random DAGs in turn, four
/// or five binary variables.
fn independence_soundness() -> Outcome {
    let start = Instant::now();
    let (mut nets, mut triples, mut independent, mut inconclusive) = (0, 0, 0, 0);
    let mut seed = 0u64;
    while nets < 20 {
        let n = 4 + seed as usize % 2;
        let frame = Frame::uniform(n, 2).map_err(err)?;
        let cfg = GenConfig::default();
        let net = match seed % 3 {
            0 => generate_network(StructureKind::Tree, &frame, &cfg, seed),
            1 => generate_network(StructureKind::Polytree, &frame, &cfg, seed),
            _ => random_network(&random_dag(&mut rng(seed), n, 0.5), &frame, &cfg, seed),
        };
        seed += 1;
        let Ok(net) = net else { continue };
        nets += 1;
        let joint = net.underlying_distribution().map_err(err)?;
        for j in 0..n {
            for k in j + 1..n {
                let rest: Vec<usize> = (0..n).filter(|&v| v != j && v != k).collect();
                for mask in 0..1u32 << rest.len() {
                    let l: Vec<usize> = rest
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| mask >> i & 1 == 1)
                        .map(|(_, &v)| v)
                        .collect();
                    if !dsep(net.dag(), &[j], &[k], &l).map_err(err)? {
                        continue;
                    }
                    triples += 1;
                    let mut vars = vec![j, k];
                    vars.extend(&l);
                    let scope = Scope::new(&frame, vars);
                    let st = joint
                        .marginalize(&scope)
                        .and_then(|m| indep_test(&m, &[j], &[k], &l, dsnet::mass::RESIDUAL_TOL))
                        .map_err(|e| format!("seed {}: {e}", seed - 1))?;
                    match st.verdict {
                        Verdict::Independent => independent += 1,
                        Verdict::Inconclusive(_) => inconclusive += 1,
                        Verdict::Dependent => {
                            return Err(format!(
                                "seed {}: {:?} d-separates {j},{k} given {l:?} but residual {:?}",
                                seed - 1,
                                net.dag().edges(),
                                st.residual
                            ))
                        }
                    }
                }
            }
        }
    }
    let verdicts = format!(
        "{nets} networks, {triples} d-separated triples: {independent} independent, {inconclusive} inconclusive"
    );
    let graphs = dsep_exhaustive()?;
    within(
        Duration::from_secs(120),
        start,
        format!("{verdicts}; {graphs}"),
    )
}

/// dsep against trail enumeration. Every DAG is an upper-triangular DAG
/// under some relabelling, so those with all node pairs cover every DAG.
fn dsep_exhaustive() -> Result<String, String> {
    let mut compared = 0usize;
    for n in 2..=6usize {
        let pairs = n * (n - 1) / 2;
        for mask in 0..1u64 << pairs {
            let dag = upper_triangular_dag(n, mask);
            let trail_sets: Vec<Vec<Vec<Trail>>> = (0..n)
                .map(|a| {
                    (0..n)
                        .map(|b| {
                            if a == b {
                                Vec::new()
                            } else {
                                trails(&dag, a, b)
                            }
                        })
                        .collect()
                })
                .collect();
            let connected = |a: usize, b: usize, l_mask: u64| {
                trail_sets[a][b].iter().any(|t| trail_active(t, l_mask))
            };
            if n <= 5 {
                // every assignment of nodes to J, K, L or none
                for assign in 0..4u32.pow(n as u32) {
                    let (mut j, mut k, mut l) = (Vec::new(), Vec::new(), Vec::new());
                    let mut c = assign;
                    for v in 0..n {
                        match c % 4 {
                            1 => j.push(v),
                            2 => k.push(v),
                            3 => l.push(v),
                            _ => {}
                        }
                        c /= 4;
                    }
                    if j.is_empty() || k.is_empty() {
                        continue;
                    }
                    let l_mask = l.iter().fold(0u64, |m, &v| m | 1 << v);
                    let brute = j
                        .iter()
                        .all(|&a| k.iter().all(|&b| !connected(a, b, l_mask)));
                    if dsep(&dag, &j, &k, &l).map_err(err)? != brute {
                        return Err(format!("{:?} J={j:?} K={k:?} L={l:?}", dag.edges()));
                    }
                    compared += 1;
                }
            } else {
                for a in 0..n {
                    for b in a + 1..n {
                        let rest: Vec<usize> = (0..n).filter(|&v| v != a && v != b).collect();
                        for sub in 0..1u32 << rest.len() {
                            let l: Vec<usize> = rest
                                .iter()
                                .enumerate()
                                .filter(|(i, _)| sub >> i & 1 == 1)
                                .map(|(_, &v)| v)
                                .collect();
                            let l_mask = l.iter().fold(0u64, |m, &v| m | 1 << v);
                            if dsep(&dag, &[a], &[b], &l).map_err(err)? == connected(a, b, l_mask) {
                                return Err(format!("{:?} {a},{b} | {l:?}", dag.edges()));
                            }
                            compared += 1;
                        }
                    }
                }
            }
        }
    }
    Ok(format!("dsep agrees with trail enumeration on {compared} queries over all DAGs with at most 6 nodes"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("conditioning equivalence", conditioning_equivalence),
        ("exact tree recovery", exact_tree_recovery),
        ("sampled tree recovery", sampled_tree_recovery),
        ("exact polytree recovery", exact_polytree_recovery),
        ("sampled polytree recovery", sampled_polytree_recovery),
        ("calculus properties", calculus_properties),
        ("mk-conditional residual", mk_conditional_residual),
        ("independence soundness", independence_soundness),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let took = start.elapsed();
        match outcome {
            Ok(detail) => println!("PASS criterion {} ({name}): {detail} [{took:.2?}]", i + 1),
            Err(detail) => {
                failures += 1;
                println!("FAIL criterion {} ({name}): {detail} [{took:.2?}]", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failures,
        criteria.len()
    );
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
