use statrs::function::beta::beta;
use sweepcoal::coalescent::{Density, LambdaMeasure};
use sweepcoal::numeric::{integrate, LnFactorials};
use sweepcoal::sweep::SweepSpec;
use sweepcoal::Error;

fn battery() -> Vec<(LambdaMeasure, Box<dyn Fn(f64) -> f64>)> {
    // each measure with its Lambda_0 density (atoms handled separately)
    vec![
        (LambdaMeasure::kingman(), Box::new(|_| 0.0)),
        (LambdaMeasure::single_site(0.5, 1.0, 0.8).unwrap(), Box::new(|_| 0.0)),
        (
            LambdaMeasure::new(1.0, vec![], vec![Density::Linear { c: 0.7, lo: 0.0, hi: 1.0 }]).unwrap(),
            Box::new(|x| 0.7 * x),
        ),
        (
            LambdaMeasure::new(
                0.5,
                vec![(0.3, 0.2), (1.0, 0.1)],
                vec![Density::Linear { c: 2.0, lo: 0.1, hi: 0.6 }],
            )
            .unwrap(),
            Box::new(|x| if (0.1..=0.6).contains(&x) { 2.0 * x } else { 0.0 }),
        ),
        (
            LambdaMeasure::new(
                1.0,
                vec![],
                vec![Density::Table {
                    breaks: vec![0.2, 0.5, 0.9],
                    values: vec![1.5, 0.25],
                }],
            )
            .unwrap(),
            Box::new(|x| {
                if (0.2..0.5).contains(&x) {
                    1.5
                } else if (0.5..0.9).contains(&x) {
                    0.25
                } else {
                    0.0
                }
            }),
        ),
    ]
}

fn quadrature_rate(m: &LambdaMeasure, h: &dyn Fn(f64) -> f64, b: usize, k: usize) -> f64 {
    let mut total = if k == 2 { m.kingman_mass() } else { 0.0 };
    for (p, w) in m.atoms() {
        total += w * p.powi(k as i32 - 2) * (1.0 - p).powi((b - k) as i32);
    }
    // split at the kinks of the test densities
    let cuts = [0.0, 0.1, 0.2, 0.5, 0.6, 0.9, 1.0];
    for w in cuts.windows(2) {
        total += integrate(|x| x.powi(k as i32 - 2) * (1.0 - x).powi((b - k) as i32) * h(x), w[0], w[1], 1e-13);
    }
    total
}

#[test]
fn rates_match_quadrature() {
    let mut lnf = LnFactorials::new();
    for (m, h) in battery() {
        for b in 2..=20 {
            let jumps = m.jump_rates(b, &mut lnf);
            let mut sum = 0.0;
            for k in 2..=b {
                let got = m.lambda_rate(b, k).unwrap();
                let want = quadrature_rate(&m, h.as_ref(), b, k);
                assert!((got - want).abs() < 1e-8, "b={} k={} {} {}", b, k, got, want);
                let binom = lnf.ln_choose(b, k).exp();
                assert!((jumps[k] - binom * got).abs() < 1e-8 * (1.0 + jumps[k]), "jump b={} k={}", b, k);
                sum += jumps[k];
            }
            let tr = m.total_rates(b);
            assert!((tr.lambda - sum).abs() < 1e-8 * sum.max(1.0), "lambda_{} {} {}", b, tr.lambda, sum);
            assert!(tr.alpha >= 0.0);
            assert!(tr.lambda >= m.kingman_mass() * (b * (b - 1)) as f64 / 2.0);
        }
    }
}

#[test]
fn kingman_rates() {
    let m = LambdaMeasure::kingman();
    for b in 2..10 {
        assert_eq!(m.lambda_rate(b, 2).unwrap(), 1.0);
        for k in 3..=b {
            assert_eq!(m.lambda_rate(b, k).unwrap(), 0.0);
        }
        assert_eq!(m.total_rates(b).alpha, 0.0);
    }
    assert!(matches!(m.lambda_rate(3, 4), Err(Error::Domain(_))));
    assert!(matches!(m.lambda_rate(3, 1), Err(Error::Domain(_))));
}

#[test]
fn single_site_rates() {
    let (s, alpha, p) = (0.5, 1.0, 0.8);
    let m = LambdaMeasure::single_site(s, alpha, p).unwrap();
    assert!((m.lambda_rate(3, 3).unwrap() - s * alpha * p * p * p).abs() < 1e-15);
    for b in 2..60 {
        let bf = b as f64;
        let want = s * alpha * (1.0 - (1.0 - p).powi(b) - bf * p * (1.0 - p).powi(b - 1));
        let got = m.total_rates(b as usize).alpha;
        assert!((got - want).abs() < 1e-12, "{} {} {}", b, got, want);
        assert!(got <= s * alpha + 1e-15);
    }
}

#[test]
fn uniform_density_is_beta() {
    let m = LambdaMeasure::uniform();
    for b in 2..=12usize {
        for k in 2..=b {
            let want = if k == 2 { 1.0 } else { 0.0 } + beta((k - 1) as f64, (b - k + 1) as f64);
            let got = m.lambda_rate(b, k).unwrap();
            assert!((got - want).abs() < 1e-9, "{} {} {} {}", b, k, got, want);
        }
    }
}

#[test]
fn linear_density_alpha_bound() {
    let c = 1.3;
    let m = LambdaMeasure::new(1.0, vec![], vec![Density::Linear { c, lo: 0.0, hi: 1.0 }]).unwrap();
    for b in 2..=200usize {
        let a = m.total_rates(b).alpha;
        assert!(a <= c * (1.0 + (b as f64).ln()), "b={} alpha={}", b, a);
        // direct quadrature of c int P(Bin(b,x) >= 2) / x dx
        let q = integrate(
            |x| c * sweepcoal::numeric::prob_at_least_two(b as u64, x) / x,
            0.0,
            1.0,
            1e-12,
        );
        assert!((a - q).abs() < 1e-8 * q.max(1.0), "b={} {} {}", b, a, q);
    }
}

#[test]
fn single_site_pipeline_is_exact() {
    let (alpha, s, beta_r) = (1.0, 0.5, -0.5 * 0.8f64.ln());
    let spec = SweepSpec::single_site(alpha, s, beta_r).unwrap();
    let m = LambdaMeasure::from_sweep_spec(&spec);
    let atoms: Vec<_> = m.atoms().collect();
    assert_eq!(atoms.len(), 1);
    let p = (-beta_r / s).exp();
    assert!((atoms[0].0 - 0.8).abs() < 1e-15);
    assert!((atoms[0].1 - s * alpha * p * p).abs() < 1e-15);
    assert_eq!(m.kingman_mass(), 1.0);
}

#[test]
fn unlinked_atom_gives_full_merger() {
    let spec = SweepSpec::new(
        1.0,
        vec![sweepcoal::sweep::SweepAtom { rate: 2.0, x: 0.0, s: 0.4 }],
        vec![[-1.0, 1.0], [0.0, 0.0], [1.0, 1.0]],
    )
    .unwrap();
    let m = LambdaMeasure::from_sweep_spec(&spec);
    assert_eq!(m.atoms().collect::<Vec<_>>(), vec![(1.0, 0.8)]);
}

#[test]
fn uniform_chromosome_tail() {
    let (alpha, s, beta_r, l) = (1.0, 0.5, 2.0, 3.0);
    let grid = 100;
    let spec = SweepSpec::uniform_chromosome(alpha, s, beta_r, l, grid).unwrap();
    let m = LambdaMeasure::from_sweep_spec(&spec);
    let cell = 2.0 * alpha * s * (2.0 * l / grid as f64);
    for &y in &[0.01, 0.05, 0.2, 0.5, 0.9, 0.99] {
        let want = (-2.0 * alpha * s * s * f64::ln(y) / beta_r).min(2.0 * alpha * s * l);
        let got = m.eta_tail(y);
        assert!((got - want).abs() <= cell, "y={} {} {}", y, got, want);
    }
}

#[test]
fn eta_generator_reproduces_step_function() {
    let eta = [(0.9, 0.4), (0.5, 1.1), (0.2, 0.3)];
    let spec = SweepSpec::from_eta_atoms(&eta).unwrap();
    let m = LambdaMeasure::from_sweep_spec(&spec);
    for &y in &[0.95, 0.9, 0.7, 0.5, 0.3, 0.2] {
        let want: f64 = eta.iter().filter(|(p, _)| *p >= y).map(|(_, w)| w).sum();
        assert!((m.eta_tail(y) - want).abs() < 1e-12, "y={}", y);
    }
}

#[test]
fn eta_sampler_matches_tail() {
    use sweepcoal::mc::replicate_rng;
    let m = LambdaMeasure::new(
        1.0,
        vec![(0.7, 0.1)],
        vec![
            Density::Linear { c: 0.5, lo: 0.05, hi: 0.5 },
            Density::Table {
                breaks: vec![0.3, 0.6, 1.0],
                values: vec![0.4, 1.0],
            },
        ],
    )
    .unwrap();
    let total = m.eta_mass();
    let mut rng = replicate_rng(12, 0);
    let draws: Vec<f64> = (0..200_000).map(|_| m.sample_eta(&mut rng).unwrap()).collect();
    for &y in &[0.06, 0.1, 0.3, 0.45, 0.7, 0.71, 0.9] {
        let emp = draws.iter().filter(|&&x| x >= y).count() as f64 / draws.len() as f64;
        let want = m.eta_tail(y) / total;
        let se = (want * (1.0 - want) / draws.len() as f64).sqrt();
        assert!((emp - want).abs() < 4.0 * se + 1e-12, "y={} {} {}", y, emp, want);
    }
}

#[test]
fn condition_ten_by_family() {
    assert!(matches!(LambdaMeasure::uniform().condition_ten(), Err(Error::Divergent(_))));
    let lin = LambdaMeasure::new(1.0, vec![(0.5, 0.2)], vec![Density::Linear { c: 2.0, lo: 0.0, hi: 1.0 }]).unwrap();
    let (a, c) = lin.condition_ten().unwrap();
    assert!((a - 0.8).abs() < 1e-15 && c == 2.0);
}

#[test]
fn json_round_trip_and_errors() {
    let text = r#"{"kingman": 1, "atoms": [[0.8, 0.32]], "densities": [{"form": "linear", "c": 2, "lo": 0, "hi": 1}]}"#;
    let m = LambdaMeasure::from_json(text).unwrap();
    assert_eq!(LambdaMeasure::from_json(&m.to_json()).unwrap(), m);
    match LambdaMeasure::from_json(r#"{"kingman": 1, "atoms": [[1.5, 0.1]]}"#) {
        Err(Error::Validation { field, .. }) => assert_eq!(field, "atoms[0][0]"),
        other => panic!("{:?}", other),
    }
    assert!(LambdaMeasure::from_json(r#"{"kingman": 1, "densities": [{"form": "linear", "c": 1, "lo": 0.5, "hi": 0.2}]}"#).is_err());
    assert!(LambdaMeasure::from_json(r#"{"atoms": []}"#).is_err());
}
