//! Command-line driver: argument parsing, command dispatch and output files.

pub mod experiments;
pub mod output;

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sweepcoal::coalescent::LambdaMeasure;
use sweepcoal::mc::Estimate;
use sweepcoal::numeric::LnFactorials;
use sweepcoal::stats::{
    coupling_identity_probability, expected_external_length, expected_segregating, gnb_row, rho, DStatConfig,
    Normalization,
};
use sweepcoal::sweep::{SweepParams, SweepSpec};

use experiments::*;
use output::{write_json, write_table, Format, Table};

#[derive(Debug, Parser)]
#[command(name = "sweepcoal", version, about = "Selective sweeps and their coalescent limits")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct Common {
    /// Master seed.
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    /// Monte Carlo replicates.
    #[arg(long, global = true, default_value_t = 10_000)]
    pub reps: usize,
    /// Worker threads (default: logical cores).
    #[arg(long, global = true)]
    #[serde(skip)]
    pub threads: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    #[serde(skip)]
    pub out: PathBuf,
    /// Per-replicate output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Re-run the command recorded in a manifest.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Clone, Subcommand, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "command")]
pub enum Command {
    /// Single sweeps in a Moran population.
    Sweep(SweepArgs),
    /// Recurrent sweeps, compared with the coalescent approximations.
    Recurrent(RecurrentArgs),
    /// Lambda-coalescent paths.
    Coalescent(CoalescentArgs),
    /// Merger rate tables and the exact recursions.
    Rates(RatesArgs),
    /// The limiting segregating-site deficit.
    Rho(RhoArgs),
    /// Mutation statistics over simulated genealogies.
    Stats(StatsArgs),
    /// Monte Carlo against the exact recursions.
    Compare(CompareArgs),
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SweepArgs {
    #[arg(long = "twoN")]
    pub two_n: u32,
    #[arg(long)]
    pub s: f64,
    /// Recombination probability per birth.
    #[arg(long, conflicts_with = "alpha", required_unless_present = "alpha")]
    pub r: Option<f64>,
    /// Sets `r = s alpha / log(2N)`.
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub n: usize,
    /// Distances of the ancestral law to the paintbox approximations.
    #[arg(long)]
    pub tv: bool,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct RecurrentArgs {
    /// Sweep spec JSON.
    #[arg(long)]
    pub spec: PathBuf,
    #[arg(long = "twoN")]
    pub two_n: u32,
    #[arg(long)]
    pub n: usize,
    /// Sampling times in coalescent units, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub times: Vec<f64>,
}

/// A measure JSON file or one of `kingman`, `star` (delta_0 + delta_1),
/// `uniform`, `single-site:s,alpha,p`, `sweep-spec:FILE`.
#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct MeasureArg {
    #[arg(long, default_value = "kingman")]
    pub measure: String,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct CoalescentArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub measure: MeasureArg,
    #[arg(long)]
    pub n: usize,
    /// Times at which to report the ancestral partition.
    #[arg(long, value_delimiter = ',')]
    pub times: Vec<f64>,
    /// Run the Kingman coupling and report whether the paths agree.
    #[arg(long)]
    pub coupled: bool,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct RatesArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub measure: MeasureArg,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 2.0)]
    pub theta: f64,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct RhoArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub measure: MeasureArg,
    #[arg(long, default_value_t = 2.0)]
    pub theta: f64,
    /// Target truncation error.
    #[arg(long, default_value_t = 0.01)]
    pub tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormalizeArg {
    None,
    Classical,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct StatsArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub measure: MeasureArg,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 2.0)]
    pub theta: f64,
    #[arg(long, value_enum, default_value_t = NormalizeArg::None)]
    pub normalize: NormalizeArg,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct CompareArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub measure: MeasureArg,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 2.0)]
    pub theta: f64,
}

/// Everything needed to reproduce a run, plus its wall-clock time.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub seed: u64,
    pub reps: usize,
    pub format: Format,
    pub parameters: Command,
    pub threads: Option<usize>,
    pub wall_clock_seconds: f64,
}

/// Failure classes, mapped to process exit codes.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Validation(anyhow::Error),
    Resource(anyhow::Error),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Validation(_) => 3,
            Failure::Resource(_) => 4,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "{}", m),
            Failure::Validation(e) | Failure::Resource(e) => write!(f, "{:#}", e),
        }
    }
}

fn classify(e: anyhow::Error) -> Failure {
    use sweepcoal::Error as E;
    match e.downcast_ref::<E>() {
        Some(E::Resource(_)) => Failure::Resource(e),
        Some(_) => Failure::Validation(e),
        None if e.downcast_ref::<serde_json::Error>().is_some() => Failure::Validation(e),
        None => Failure::Resource(e),
    }
}

pub fn parse_measure(text: &str) -> anyhow::Result<LambdaMeasure> {
    let m = match text {
        "kingman" => LambdaMeasure::kingman(),
        "star" => LambdaMeasure::new(1.0, vec![(1.0, 1.0)], Vec::new())?,
        "uniform" => LambdaMeasure::uniform(),
        _ => {
            if let Some(rest) = text.strip_prefix("single-site:") {
                let v: Vec<f64> = rest
                    .split(',')
                    .map(|x| x.trim().parse::<f64>())
                    .collect::<Result<_, _>>()
                    .with_context(|| format!("bad single-site parameters `{}`", rest))?;
                anyhow::ensure!(v.len() == 3, "single-site takes s,alpha,p");
                LambdaMeasure::single_site(v[0], v[1], v[2])?
            } else if let Some(path) = text.strip_prefix("sweep-spec:") {
                LambdaMeasure::from_sweep_spec(&read_spec(Path::new(path))?)
            } else {
                let body = fs::read_to_string(text).with_context(|| format!("reading measure `{}`", text))?;
                LambdaMeasure::from_json(&body)?
            }
        }
    };
    Ok(m)
}

fn read_spec(path: &Path) -> anyhow::Result<SweepSpec> {
    let body = fs::read_to_string(path).with_context(|| format!("reading spec `{}`", path.display()))?;
    Ok(SweepSpec::from_json(&body)?)
}

fn est(e: &Estimate) -> Value {
    json!({"mean": e.mean, "se": e.se, "count": e.count})
}

/// Parses `args` (including the program name) and runs the command.
pub fn run_from_args<I, T>(args: I) -> Result<(), Failure>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{}", e);
                return Ok(());
            }
            return Err(Failure::Usage(e.to_string()));
        }
    };
    run(cli)
}

pub fn run(cli: Cli) -> Result<(), Failure> {
    let mut common = cli.common;
    let command = match (&common.manifest, cli.command) {
        (Some(path), None) => {
            let body = fs::read_to_string(path)
                .with_context(|| format!("reading manifest `{}`", path.display()))
                .map_err(Failure::Resource)?;
            let m: RunManifest = serde_json::from_str(&body)
                .context("parsing manifest")
                .map_err(Failure::Validation)?;
            common.seed = m.seed;
            common.reps = m.reps;
            common.format = m.format;
            m.parameters
        }
        (None, Some(c)) => c,
        (Some(_), Some(_)) => return Err(Failure::Usage("--manifest replaces the subcommand; give one or the other".into())),
        (None, None) => return Err(Failure::Usage("a subcommand or --manifest is required; see --help".into())),
    };
    if common.reps == 0 {
        return Err(Failure::Usage("--reps must be positive".into()));
    }
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = common.threads {
        if t == 0 {
            return Err(Failure::Usage("--threads must be positive".into()));
        }
        builder = builder.num_threads(t);
    }
    let pool = builder.build().map_err(|e| Failure::Resource(e.into()))?;
    fs::create_dir_all(&common.out)
        .with_context(|| format!("creating `{}`", common.out.display()))
        .map_err(Failure::Resource)?;
    let start = Instant::now();
    pool.install(|| execute(&command, &common)).map_err(classify)?;
    let manifest = RunManifest {
        tool: "sweepcoal".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        seed: common.seed,
        reps: common.reps,
        format: common.format,
        parameters: command,
        threads: common.threads,
        wall_clock_seconds: start.elapsed().as_secs_f64(),
    };
    write_json(&common.out, "manifest.json", &manifest).map_err(Failure::Resource)
}

fn execute(command: &Command, common: &Common) -> anyhow::Result<()> {
    let (out, seed, reps, format) = (common.out.as_path(), common.seed, common.reps, common.format);
    match command {
        Command::Sweep(a) => {
            let r = match (a.r, a.alpha) {
                (Some(r), _) => r,
                (None, Some(alpha)) => a.s * alpha / (a.two_n as f64).ln(),
                (None, None) => anyhow::bail!(sweepcoal::Error::Domain("give --r or --alpha".into())),
            };
            let params = SweepParams::new(a.two_n, a.s, r, a.n)?;
            if a.tv && a.n > ENUMERATION_LIMIT {
                anyhow::bail!(sweepcoal::Error::SizeLimit {
                    what: "n with --tv",
                    value: a.n,
                    limit: ENUMERATION_LIMIT,
                });
            }
            let outcomes = sweep_ensemble(&params, reps, seed);
            let mut t = Table::new(["replicate", "fixed", "tau", "theta"]);
            for (i, o) in outcomes.iter().enumerate() {
                t.push(vec![json!(i), json!(o.fixed), json!(o.tau), json!(o.theta.to_string())]);
            }
            write_table(out, "replicates", &t, format)?;
            let summary = summarize_sweeps(&params, &outcomes, seed, a.tv)?;
            write_json(out, "summary.json", &json!({"r": r, "sweep": summary}))?;
        }
        Command::Recurrent(a) => {
            let spec = read_spec(&a.spec)?;
            let snaps = recurrent_ensemble(&spec, a.two_n, a.n, &a.times, reps, seed)?;
            let mut header = vec!["replicate".to_string(), "flagged".into(), "sweeps".into()];
            header.extend(a.times.iter().map(|t| format!("psi_{}", t)));
            let mut t = Table::new(header);
            for (i, s) in snaps.iter().enumerate() {
                let mut row = vec![json!(i), json!(s.flagged), json!(s.sweeps)];
                row.extend(s.partitions.iter().map(|p| json!(p.to_string())));
                t.push(row);
            }
            write_table(out, "replicates", &t, format)?;
            let summary = compare_recurrent(&spec, a.two_n, a.n, &a.times, &snaps, seed)?;
            write_json(out, "summary.json", &summary)?;
        }
        Command::Coalescent(a) => {
            let m = parse_measure(&a.measure.measure)?;
            if a.coupled {
                let hits = coupling_ensemble(&m, a.n, reps, seed)?;
                let mut t = Table::new(["replicate", "identical"]);
                for (i, h) in hits.iter().enumerate() {
                    t.push(vec![json!(i), json!(h)]);
                }
                write_table(out, "replicates", &t, format)?;
                let freq = Estimate::proportion(hits.iter().filter(|&&h| h).count(), reps);
                let exact = coupling_identity_probability(&m, a.n)?;
                write_json(out, "summary.json", &json!({"seed": seed, "identical": est(&freq), "identical_exact": exact}))?;
            } else {
                let rows = coalescent_ensemble(&m, a.n, &a.times, reps, seed)?;
                let mut header = vec![
                    "replicate".to_string(),
                    "absorption".into(),
                    "mergers".into(),
                    "largest_merger".into(),
                    "J_n".into(),
                ];
                header.extend(a.times.iter().map(|t| format!("partition_{}", t)));
                let mut t = Table::new(header);
                for (i, r) in rows.iter().enumerate() {
                    let mut row = vec![json!(i), json!(r.absorption), json!(r.mergers), json!(r.largest_merger), json!(r.external_length)];
                    row.extend(r.partitions.iter().map(|p| json!(p.to_string())));
                    t.push(row);
                }
                write_table(out, "replicates", &t, format)?;
                let col = |f: &dyn Fn(&PathRow) -> f64| Estimate::from_samples(&rows.iter().map(f).collect::<Vec<_>>());
                let laws: Vec<Value> = a
                    .times
                    .iter()
                    .enumerate()
                    .map(|(k, &time)| {
                        let ps: Vec<_> = rows.iter().map(|r| r.partitions[k].clone()).collect();
                        json!({"time": time, "law": empirical_law(&ps)})
                    })
                    .collect();
                write_json(
                    out,
                    "summary.json",
                    &json!({
                        "seed": seed,
                        "absorption": est(&col(&|r| r.absorption.unwrap_or(f64::NAN))),
                        "mergers": est(&col(&|r| r.mergers as f64)),
                        "J_n": est(&col(&|r| r.external_length)),
                        "laws": laws,
                    }),
                )?;
            }
        }
        Command::Rates(a) => {
            let m = parse_measure(&a.measure.measure)?;
            anyhow::ensure!(a.n >= 2, sweepcoal::Error::Domain(format!("need n >= 2, got {}", a.n)));
            let mut lnf = LnFactorials::new();
            let mut rates = Table::new(["b", "k", "lambda_bk", "jump_rate"]);
            for b in 2..=a.n {
                let jumps = m.jump_rates(b, &mut lnf);
                for k in 2..=b {
                    rates.push(vec![json!(b), json!(k), json!(m.lambda_rate(b, k)?), json!(jumps[k])]);
                }
            }
            write_table(out, "rates", &rates, format)?;
            let g = gnb_row(&m, a.n)?;
            let mut totals = Table::new(["b", "lambda_b", "alpha_b", "G_n_b", "expected_S_b", "expected_J_b"]);
            for b in 2..=a.n {
                let tr = m.total_rates(b);
                totals.push(vec![
                    json!(b),
                    json!(tr.lambda),
                    json!(tr.alpha),
                    json!(g[b]),
                    json!(expected_segregating(&m, a.theta, b)?),
                    json!(expected_external_length(&m, b)?),
                ]);
            }
            write_table(out, "totals", &totals, format)?;
            write_json(out, "summary.json", &json!({"measure": m, "n": a.n, "theta": a.theta}))?;
        }
        Command::Rho(a) => {
            let m = parse_measure(&a.measure.measure)?;
            let r = rho(&m, a.theta, a.tol)?;
            write_json(out, "summary.json", &json!({"measure": m, "theta": a.theta, "tol": a.tol, "rho": r}))?;
        }
        Command::Stats(a) => {
            let m = parse_measure(&a.measure.measure)?;
            let normalization = match a.normalize {
                NormalizeArg::None => Normalization::NumeratorOnly,
                NormalizeArg::Classical => Normalization::Classical,
            };
            let config = DStatConfig { theta: a.theta, normalization };
            let rows = stats_ensemble(&m, a.n, &config, reps, seed)?;
            let mut header = vec!["replicate", "n", "theta", "S_n", "Delta_n", "eta_e", "eta_i", "J_n", "I_n", "taj_num", "fuli_num"];
            let normalized = normalization != Normalization::NumeratorOnly;
            if normalized {
                header.extend(["taj_D", "fuli_D"]);
            }
            let mut t = Table::new(header);
            for (i, r) in rows.iter().enumerate() {
                let st = &r.stats;
                let mut row = vec![
                    json!(i),
                    json!(st.n),
                    json!(a.theta),
                    json!(st.segregating),
                    json!(st.pairwise),
                    json!(st.external),
                    json!(st.internal),
                    json!(st.external_length),
                    json!(st.internal_length),
                    json!(r.d.tajima_numerator),
                    json!(r.d.fu_li_numerator),
                ];
                if normalized {
                    row.extend([json!(r.d.tajima_d), json!(r.d.fu_li_d)]);
                }
                t.push(row);
            }
            write_table(out, "replicates", &t, format)?;
            write_json(out, "summary.json", &summarize_stats(&rows, a.n, a.theta, seed))?;
        }
        Command::Compare(a) => {
            let m = parse_measure(&a.measure.measure)?;
            anyhow::ensure!(a.n >= 2, sweepcoal::Error::Domain(format!("need n >= 2, got {}", a.n)));
            let mut t = Table::new(["quantity", "exact", "mc_mean", "mc_se", "z"]);
            let mut push = |name: String, exact: f64, e: &Estimate| {
                let z = (e.mean - exact) / e.se;
                t.push(vec![json!(name), json!(exact), json!(e.mean), json!(e.se), json!(z)]);
            };
            let g = gnb_row(&m, a.n)?;
            let visits = visit_frequencies(&m, a.n, reps, seed)?;
            for b in 2..=a.n {
                push(format!("G_n({})", b), g[b], &visits[b]);
            }
            let config = DStatConfig {
                theta: a.theta,
                normalization: Normalization::NumeratorOnly,
            };
            let rows = stats_ensemble(&m, a.n, &config, reps, seed.wrapping_add(1))?;
            let s = summarize_stats(&rows, a.n, a.theta, seed);
            push("E[S_n]".into(), expected_segregating(&m, a.theta, a.n)?, &s.segregating);
            push("E[J_n]".into(), expected_external_length(&m, a.n)?, &s.external_length);
            if m.kingman_mass() == 1.0 {
                let hits = coupling_ensemble(&m, a.n, reps, seed.wrapping_add(2))?;
                let freq = Estimate::proportion(hits.iter().filter(|&&h| h).count(), reps);
                push("P(identical coupling)".into(), coupling_identity_probability(&m, a.n)?, &freq);
            }
            let worst = t
                .rows
                .iter()
                .filter_map(|r| r[4].as_f64())
                .fold(0.0f64, |acc, z| acc.max(z.abs()));
            write_table(out, "comparison", &t, format)?;
            write_json(out, "summary.json", &json!({"seed": seed, "reps": reps, "max_abs_z": worst}))?;
        }
    }
    Ok(())
}
