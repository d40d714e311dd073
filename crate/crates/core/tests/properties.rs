use proptest::prelude::*;
use sweepcoal::coalescent::{simulate_lambda, simulate_xi_sweep, LambdaMeasure, XiSweepMeasure};
use sweepcoal::mc::replicate_rng;
use sweepcoal::partition::{stick_breaking_law, Partition, StickBreakingParams};
use sweepcoal::stats::{
    branches, d_statistics, overlay_mutations, rho_at_level, sample_statistics, DStatConfig, Normalization,
};
use sweepcoal::sweep::SweepSpec;

fn partition(max_n: usize) -> impl Strategy<Value = Partition> {
    (1..=max_n).prop_flat_map(|n| proptest::collection::vec(0..n, n).prop_map(|l| Partition::from_labels(&l)))
}

fn measure() -> impl Strategy<Value = LambdaMeasure> {
    (0.05f64..1.0, 0.0f64..2.0, 0.05f64..1.0, 0.0f64..1.0).prop_map(|(p1, w1, p2, w2)| {
        LambdaMeasure::new(1.0, vec![(p1, w1), (p2, w2)], Vec::new()).unwrap()
    })
}

proptest! {
    #[test]
    fn coagulation_coarsens(pi in partition(8), labels in proptest::collection::vec(0usize..8, 8)) {
        let by = Partition::from_labels(&labels);
        let c = pi.coagulate(&by).unwrap();
        prop_assert!(pi.refines(&c));
        prop_assert_eq!(pi.coagulate(&Partition::singletons(8)).unwrap(), pi.clone());
        prop_assert_eq!(c.to_string().parse::<Partition>().unwrap(), c);
    }

    #[test]
    fn lambda_paths_coarsen(m in measure(), n in 2usize..12, seed in any::<u64>()) {
        let mut rng = replicate_rng(seed, 0);
        let path = simulate_lambda(&m, n, None, &mut rng).unwrap();
        let tr = path.transitions();
        prop_assert!(tr[0].1.is_singletons());
        prop_assert_eq!(tr.last().unwrap().1.block_count(), 1);
        for w in tr.windows(2) {
            prop_assert!(w[0].0 < w[1].0);
            prop_assert!(w[0].1.refines(&w[1].1) && w[0].1 != w[1].1);
        }
        let counts = path.block_counts();
        for (k, (t, p)) in tr.iter().enumerate() {
            prop_assert_eq!((*t, p.block_count()), counts[k]);
        }
    }

    #[test]
    fn mutation_counts_add_up(m in measure(), n in 2usize..12, theta in 0.1f64..5.0, seed in any::<u64>()) {
        let mut rng = replicate_rng(seed, 1);
        let path = simulate_lambda(&m, n, None, &mut rng).unwrap();
        let external: f64 = path.singleton_times().iter().sum();
        let br = branches(&path);
        let ext_len: f64 = br.iter().filter(|b| b.is_external()).map(|b| b.length).sum();
        prop_assert!((external - ext_len).abs() <= 1e-9 * (1.0 + external));
        let g = overlay_mutations(&path, theta, false, &mut rng).unwrap();
        let st = sample_statistics(&g);
        prop_assert_eq!(st.external + st.internal, st.segregating);
        prop_assert!(st.external_length >= 0.0 && st.internal_length >= 0.0);
        let config = DStatConfig { theta, normalization: Normalization::NumeratorOnly };
        let d = d_statistics(&st, &config).unwrap();
        let h: f64 = (1..n).map(|i| 1.0 / i as f64).sum();
        prop_assert!((d.fu_li_numerator - (st.segregating as f64 - h * st.external as f64)).abs() < 1e-9);
    }

    #[test]
    fn xi_paths_coarsen(n in 2usize..8, seed in any::<u64>()) {
        let spec = SweepSpec::single_site(2.0, 0.5, 0.2).unwrap();
        let xi = XiSweepMeasure::new(spec, 400).unwrap();
        let mut rng = replicate_rng(seed, 2);
        let tr = simulate_xi_sweep(&xi, n, None, &mut rng).transitions();
        for w in tr.windows(2) {
            prop_assert!(w[0].1.refines(&w[1].1));
        }
    }

    #[test]
    fn stick_breaking_law_sums_to_one(theta in 0.0f64..1.0, m in 1u64..200, n in 1usize..6) {
        let law = stick_breaking_law(StickBreakingParams::new(theta, m).unwrap(), n).unwrap();
        let total: f64 = law.iter().map(|(_, w)| w).sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        prop_assert!(law.iter().all(|(_, w)| w >= 0.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn rho_settles_within_reported_bound(m in measure(), theta in 0.5f64..3.0) {
        let coarse = rho_at_level(&m, theta, 256).unwrap();
        let fine = rho_at_level(&m, theta, 2048).unwrap();
        prop_assert!(fine.truncation_bound <= coarse.truncation_bound);
        prop_assert!((fine.rho - coarse.rho).abs() <= coarse.truncation_bound + fine.truncation_bound);
    }
}
