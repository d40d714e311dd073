use std::collections::BTreeMap;

use statrs::distribution::{ChiSquared, ContinuousCDF};
use sweepcoal::mc::{replicate_rng, run_replicates, Estimate};
use sweepcoal::sweep::{hitting_probability, simulate_single_sweep, simulate_single_sweep_logged, SweepParams};

/// p-value of a two-sample chi-square homogeneity test on category counts.
fn two_sample_p(a: &BTreeMap<String, u64>, b: &BTreeMap<String, u64>) -> f64 {
    let na: u64 = a.values().sum();
    let nb: u64 = b.values().sum();
    let mut keys: Vec<&String> = a.keys().chain(b.keys()).collect();
    keys.sort();
    keys.dedup();
    let mut stat = 0.0;
    let mut cells = 0;
    for k in keys {
        let (x, y) = (*a.get(k).unwrap_or(&0) as f64, *b.get(k).unwrap_or(&0) as f64);
        let tot = x + y;
        if tot < 5.0 {
            continue;
        }
        let ea = tot * na as f64 / (na + nb) as f64;
        let eb = tot * nb as f64 / (na + nb) as f64;
        stat += (x - ea).powi(2) / ea + (y - eb).powi(2) / eb;
        cells += 1;
    }
    1.0 - ChiSquared::new((cells - 1) as f64).unwrap().cdf(stat)
}

fn tally(outcomes: impl Iterator<Item = (bool, String)>) -> BTreeMap<String, u64> {
    let mut m = BTreeMap::new();
    for (fixed, theta) in outcomes {
        *m.entry(format!("{}:{}", fixed, theta)).or_insert(0) += 1;
    }
    m
}

#[test]
fn lumped_tracer_matches_event_log() {
    for &(two_n, s, r, n) in &[(20u32, 0.5, 0.15, 3usize), (16, 0.3, 0.4, 4), (12, 0.8, 1.0, 3)] {
        let params = SweepParams::new(two_n, s, r, n).unwrap();
        let reps = 40_000;
        let fast = run_replicates(reps, 101, |_, rng| {
            let o = simulate_single_sweep(&params, rng);
            (o.fixed, o.theta.to_string(), o.tau)
        });
        let slow = run_replicates(reps, 202, |_, rng| {
            let (o, _) = simulate_single_sweep_logged(&params, rng);
            (o.fixed, o.theta.to_string(), o.tau)
        });
        let p = two_sample_p(
            &tally(fast.iter().map(|x| (x.0, x.1.clone()))),
            &tally(slow.iter().map(|x| (x.0, x.1.clone()))),
        );
        assert!(p > 1e-4, "joint law of (fixed, theta) differs at {:?}: p = {}", (two_n, s, r, n), p);
        let tf = Estimate::from_samples(&fast.iter().map(|x| x.2).collect::<Vec<_>>());
        let ts = Estimate::from_samples(&slow.iter().map(|x| x.2).collect::<Vec<_>>());
        let z = (tf.mean - ts.mean) / (tf.se.powi(2) + ts.se.powi(2)).sqrt();
        assert!(z.abs() < 4.0, "duration means differ: {:?} vs {:?}", tf, ts);
    }
}

#[test]
fn jump_chain_up_probability() {
    let s = 0.3;
    let params = SweepParams::new(30, s, 0.1, 2).unwrap();
    let mut rng = replicate_rng(77, 0);
    let (mut up, mut total) = (0u64, 0u64);
    for _ in 0..3000 {
        let (_, log) = simulate_single_sweep_logged(&params, &mut rng);
        for w in log.x_path().windows(2) {
            total += 1;
            if w[1].1 == w[0].1 + 1 {
                up += 1;
            }
        }
    }
    let p = 1.0 / (2.0 - s);
    let expect = total as f64 * p;
    let stat = (up as f64 - expect).powi(2) / expect
        + ((total - up) as f64 - (total as f64 - expect)).powi(2) / (total as f64 - expect);
    let pval = 1.0 - ChiSquared::new(1.0).unwrap().cdf(stat);
    assert!(pval > 1e-4, "up fraction {} vs {}", up as f64 / total as f64, p);
}

#[test]
fn fixation_frequency_small_population() {
    let params = SweepParams::new(200, 0.1, 0.0, 1).unwrap();
    let reps = 20_000;
    let fixed = run_replicates(reps, 5, |_, rng| simulate_single_sweep(&params, rng).fixed);
    let est = Estimate::proportion(fixed.iter().filter(|&&f| f).count(), reps);
    let target = hitting_probability(0, 200, 1, 0.1).unwrap();
    assert!(est.within(target, 3.0), "{:?} vs {}", est, target);
}

#[test]
fn explicit_fixation_frequency() {
    let params = SweepParams::new(40, 0.2, 0.3, 2).unwrap();
    let reps = 20_000;
    let fixed = run_replicates(reps, 8, |_, rng| simulate_single_sweep_logged(&params, rng).0.fixed);
    let est = Estimate::proportion(fixed.iter().filter(|&&f| f).count(), reps);
    let target = hitting_probability(0, 40, 1, 0.2).unwrap();
    assert!(est.within(target, 3.0), "{:?} vs {}", est, target);
}
