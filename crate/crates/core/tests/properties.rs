mod common;

use common::*;
use dsnet::dependence::{a_score, ScoreContext};
use dsnet::learners::{learn_polytree, learn_tree};
use dsnet::network::{parse_network, random_network, write_network, GenConfig};
use dsnet::{ConfigSet, Dataset, DsError, MassFunction};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn combination_commutes(seed in any::<u64>()) {
        let mut r = rng(seed);
        let frame = random_frame(&mut r, 3, &[2, 3]);
        let (sa, sb) = (random_scope(&mut r, &frame), random_scope(&mut r, &frame));
        let a = random_mass(&mut r, &sa, 4);
        let b = random_mass(&mut r, &sb, 4);
        match (a.combine(&b), b.combine(&a)) {
            (Ok(x), Ok(y)) => prop_assert!(x.l1_distance(&y).unwrap() <= 1e-12),
            (Err(DsError::TotalConflict { .. }), Err(DsError::TotalConflict { .. })) => {}
            (x, y) => prop_assert!(false, "{x:?} vs {y:?}"),
        }
    }

    #[test]
    fn vacuous_extension_is_invisible(seed in any::<u64>()) {
        let mut r = rng(seed);
        let frame = random_frame(&mut r, 3, &[2, 3]);
        let s = random_scope(&mut r, &frame);
        let m = random_mass(&mut r, &s, 5);
        let full = frame.full_scope();
        prop_assert_eq!(m.extend(&full).unwrap().marginalize(&s).unwrap(), m.clone());
        prop_assert_eq!(m.combine(&MassFunction::vacuous(&full)).unwrap(), m.extend(&full).unwrap());
    }

    #[test]
    fn belief_is_dual_to_plausibility(seed in any::<u64>()) {
        let mut r = rng(seed);
        let frame = random_frame(&mut r, 2, &[2, 3]);
        let s = frame.full_scope();
        let m = random_mass(&mut r, &s, 5);
        let a = random_set(&mut r, &s);
        let complement = ConfigSet::from_indices(&s, (0..s.config_count()).filter(|&i| !a.contains(i))).unwrap();
        let bel = m.belief(&a).unwrap();
        let pl = m.plausibility(&a).unwrap();
        prop_assert!(bel <= pl + 1e-12);
        prop_assert!((bel + m.plausibility(&complement).unwrap() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn agreement_is_a_probability(seed in any::<u64>()) {
        let mut r = rng(seed);
        let frame = random_frame(&mut r, 2, &[2, 3]);
        let s = frame.full_scope();
        let p = random_mass(&mut r, &s, 4);
        let x = random_mass(&mut r, &s, 4);
        let a = a_score(&x, &p).unwrap();
        prop_assert!((0.0..=1.0).contains(&a));
        prop_assert_eq!(a_score(&p, &p).unwrap(), 1.0);
    }

    #[test]
    fn dataset_text_roundtrip(seed in any::<u64>(), n in 1usize..40) {
        let mut r = rng(seed);
        let frame = random_frame(&mut r, 3, &[2, 3, 4]);
        let full = frame.full_scope();
        let records: Vec<ConfigSet> = (0..n).map(|_| random_set(&mut r, &full)).collect();
        let ds = Dataset::new(&frame, records, "prop").unwrap();
        let back = Dataset::parse(&ds.to_text()).unwrap();
        prop_assert_eq!(back.records().collect::<Vec<_>>(), ds.records().collect::<Vec<_>>());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn network_json_roundtrip(seed in any::<u64>(), n in 2usize..6) {
        let mut r = rng(seed);
        let frame = random_frame(&mut r, n, &[2, 3]);
        let dag = random_dag(&mut r, n, 0.4);
        let net = random_network(&dag, &frame, &GenConfig::default(), seed).unwrap();
        let back = parse_network(&write_network(&net)).unwrap();
        prop_assert_eq!(back.dag(), net.dag());
        prop_assert_eq!(back.valuations(), net.valuations());
    }

    #[test]
    fn learners_return_oriented_spanning_trees(seed in any::<u64>(), n in 3usize..7) {
        let mut r = rng(seed);
        let frame = random_frame(&mut r, n, &[2]);
        let full = frame.full_scope();
        let records: Vec<ConfigSet> = (0..60).map(|_| random_small_set(&mut r, &full)).collect();
        let ds = Dataset::new(&frame, records, "prop").unwrap();
        let ctx = ScoreContext::from_dataset(ds).unwrap();
        let tree = learn_tree(&ctx).unwrap();
        prop_assert_eq!(tree.skeleton.len(), n - 1);
        // connected: union-find over the skeleton
        let mut root: Vec<usize> = (0..n).collect();
        fn find(root: &mut [usize], x: usize) -> usize {
            if root[x] != x { let r = find(root, root[x]); root[x] = r; }
            root[x]
        }
        for &(a, b, w) in &tree.skeleton {
            prop_assert!((0.0..=1.0).contains(&w));
            let (ra, rb) = (find(&mut root, a), find(&mut root, b));
            prop_assert_ne!(ra, rb);
            root[ra] = rb;
        }
        let poly = learn_polytree(&ctx, 0.0).unwrap();
        prop_assert_eq!(poly.skeleton_edges(), tree.skeleton_edges());
        for &(p, c) in &poly.oriented {
            prop_assert!(poly.skeleton_edges().contains(&(p.min(c), p.max(c))));
            prop_assert!(!poly.is_oriented(c, p));
        }
    }
}
