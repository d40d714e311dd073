use sweepcoal::mc::{run_replicates, Estimate};
use sweepcoal::partition::Partition;
use sweepcoal::sweep::{simulate_recurrent, SweepSpec};

#[test]
fn zero_rate_spec_is_kingman() {
    let spec = SweepSpec::single_site(0.0, 0.5, 0.1).unwrap();
    let two_n = 1000;
    let hits = run_replicates(10_000, 31, |_, rng| {
        let snap = simulate_recurrent(&spec, two_n, 2, &[0.0, 1.0], rng).unwrap();
        assert!(snap.partitions[0].is_singletons());
        assert_eq!(snap.sweeps, 0);
        snap.partitions[1] == Partition::single_block(2)
    });
    let est = Estimate::proportion(hits.iter().filter(|&&h| h).count(), hits.len());
    let want = 1.0 - (-1.0f64).exp();
    let allowance = 1.0 / (two_n as f64 / 2.0);
    assert!((est.mean - want).abs() <= 3.0 * est.se + allowance, "{:?} vs {}", est, want);
}

#[test]
fn snapshots_refine_over_time() {
    let spec = SweepSpec::single_site(1.0, 0.5, -0.5 * 0.8f64.ln()).unwrap();
    let times = [0.0, 0.1, 0.3, 0.6];
    let snaps = run_replicates(300, 32, |_, rng| simulate_recurrent(&spec, 200, 5, &times, rng).unwrap());
    for s in &snaps {
        assert!(s.partitions[0].is_singletons());
        for w in s.partitions.windows(2) {
            assert!(w[0].refines(&w[1]));
        }
    }
}
