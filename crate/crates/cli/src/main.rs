//! `gibbs`: exact laws, sampling, asymptotics and verification suites for
//! Gibbs-type random partitions.

mod model;
mod report;
mod verify;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gibbs_core::asymp::{
    buchstab_omega, dickman_rho, gnedin_asymp, largest_small_dev, moment_limits, rho_r_root, rho_tilde,
    smallest_large_dev, smallest_tail_asymp_ep, special_number_asymp, f_r, Asymptotic, GnedinQuery, SmallDevForm,
    SpecialAsympKind,
};
use gibbs_core::bell::special_number_in;
use gibbs_core::dist::{
    blocks_pmf, blocks_pmf_in, conditional_extreme, conditional_extreme_in, extreme_cdf, extreme_cdf_in,
    factorial_moment, factorial_moment_in, smallest_tail, smallest_tail_in,
};
use gibbs_core::sampler::{PartitionSampler, PartitionSample};
use gibbs_core::{
    incomplete_dirichlet, special_number, DirichletSpec, Exact, Extreme, GibbsError, GibbsModel, RngStream,
    SpecialKind,
};
use rayon::prelude::*;
use thiserror::Error;

use crate::model::parse_model;
use crate::report::{Cell, Format, Report};

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] GibbsError),
    #[error("cannot write output: {0}")]
    Io(#[from] std::io::Error),
    #[error("verification failed")]
    VerifyFailed,
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(e) if e.is_numeric() => 3,
            CliError::Core(_) => 2,
            CliError::Io(_) | CliError::VerifyFailed => 1,
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

#[derive(Parser, Debug)]
#[command(name = "gibbs", version, about = "Block-size statistics of Gibbs-type random partitions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Worker threads; changes wall time only, never the output.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Exact finite-n distributions.
    Dist(DistArgs),
    /// Draw random partitions.
    Sample(SampleArgs),
    /// Limit laws and asymptotic approximations.
    Asymp(AsympArgs),
    /// Stirling numbers and generalized factorial coefficients.
    Bell(BellArgs),
    /// Cross-check suites with a pass/fail table.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum DistStat {
    /// P(K = k) for every k.
    Blocks,
    /// P(i-th largest block <= r).
    Largest,
    /// P(smallest block >= r).
    Smallest,
    /// P(largest block <= r | K = cond-k).
    ConditionalLargest,
    /// P(smallest block >= r | K = cond-k).
    ConditionalSmallest,
    /// E[(L)_i], the i-th factorial moment of the largest block.
    MomentLargest,
    /// E[(S)_i], the i-th factorial moment of the smallest block.
    MomentSmallest,
}

#[derive(Args, Debug)]
struct DistArgs {
    /// JSON model, e.g. '{"type":"ewens_pitman","alpha":0.5,"theta":1}'.
    #[arg(long)]
    model: String,
    #[arg(long)]
    n: usize,
    #[arg(long, value_enum, default_value_t = DistStat::Blocks)]
    stat: DistStat,
    /// Order statistic or moment order.
    #[arg(long, default_value_t = 1)]
    i: usize,
    /// Single threshold; all of 1..=n when omitted.
    #[arg(long)]
    r: Option<usize>,
    /// Block count to condition on.
    #[arg(long)]
    cond_k: Option<usize>,
    /// Force exact rational arithmetic and print the exact value too.
    #[arg(long)]
    exact: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum SampleStat {
    /// Block sizes of every trial.
    Sizes,
    /// Histogram of the block count.
    Blocks,
    /// Number of trials whose smallest block exceeds 1.
    SmallestGt1,
}

#[derive(Args, Debug)]
struct SampleArgs {
    #[arg(long)]
    model: String,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = SampleStat::Sizes)]
    stat: SampleStat,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum AsympName {
    /// Generalized Dickman function at x (alpha, theta).
    Dickman,
    /// Buchstab function at x (theta).
    Buchstab,
    /// Conditional largest-block limit for alpha < 0 (alpha, x, k).
    RhoTilde,
    /// Saddle-point root rho_r (alpha, r).
    RhoRoot,
    /// Fixed-r smallest-block tail (alpha, theta, r, optional n).
    SmallestTail,
    /// P(smallest >= x n) (alpha, theta, x, optional n).
    SmallestLargeDev,
    /// P(largest <= r) for r = o(n) (alpha, theta, n, r).
    LargestSmallDev,
    /// Limit of E[(X/n)^i] (alpha, theta, i, extreme).
    Moment,
    /// Incomplete Dirichlet integral (b, p, q, nu, rho).
    Dirichlet,
    /// Gnedin limit P(largest <= x n) (gamma, zeta, x).
    GnedinLargest,
    /// Gnedin limit P(smallest >= x n) (gamma, zeta, x).
    GnedinSmallest,
    /// |s_r(n,k)| / n! with r ~ x n (k, x, optional n).
    Stirling1Assoc,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ExtremeArg {
    Largest,
    Smallest,
}

#[derive(Args, Debug)]
struct AsympArgs {
    #[arg(long, value_enum)]
    name: AsympName,
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    theta: Option<f64>,
    #[arg(long)]
    x: Option<f64>,
    #[arg(long)]
    r: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, default_value_t = 1)]
    i: usize,
    #[arg(long, value_enum, default_value_t = ExtremeArg::Largest)]
    extreme: ExtremeArg,
    #[arg(long)]
    b: Option<usize>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    q: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    nu: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    rho: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    zeta: Option<f64>,
    /// Quadrature tolerance.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum BellKind {
    Stirling1,
    Gfc,
    Stirling1Assoc,
    GfcAssoc,
}

#[derive(Args, Debug)]
struct BellArgs {
    #[arg(long, value_enum)]
    kind: BellKind,
    #[arg(long)]
    n: usize,
    /// Single k; all of 0..=n when omitted.
    #[arg(long)]
    k: Option<usize>,
    /// Minimum block size for the associated kinds.
    #[arg(long)]
    r: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<f64>,
    #[arg(long)]
    exact: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Suite {
    /// Simulation counts against the exact engine.
    Table1,
    /// Exact engine against brute-force enumeration.
    Oracle,
    /// Exact Bell-polynomial identities.
    Identities,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(value_enum)]
    suite: Suite,
    /// Restrict table1 to one cell, e.g. alpha=0,theta=1.
    #[arg(long)]
    cell: Option<String>,
    #[arg(long, default_value_t = 10_000)]
    trials: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Largest n for the oracle and identity suites.
    #[arg(long)]
    n: Option<usize>,
}

fn need<T>(v: Option<T>, flag: &str) -> CliResult<T> {
    v.ok_or_else(|| usage(format!("--{flag} is required here")))
}

fn exact_cell(x: &Exact) -> Cell {
    Cell::Text(x.to_string())
}

fn dist(args: &DistArgs) -> CliResult<Report> {
    let model = parse_model(&args.model)?;
    let n = args.n;
    model.check_n(n)?;
    if args.exact && !model.is_rational() {
        return Err(usage("--exact needs a model with rational parameters"));
    }
    let conditional = matches!(args.stat, DistStat::ConditionalLargest | DistStat::ConditionalSmallest);
    let cond_k = if conditional {
        let k = need(args.cond_k, "cond-k")?;
        if k == 0 || k > n {
            return Err(usage(format!("--cond-k must lie in 1..={n}")));
        }
        Some(k)
    } else {
        None
    };
    let thresholds: Vec<usize> = match args.r {
        Some(r) if r == 0 || r > n => return Err(usage(format!("--r must lie in 1..={n}"))),
        Some(r) => vec![r],
        None => (1..=n).collect(),
    };
    if args.i == 0 {
        return Err(usage("--i must be at least 1"));
    }
    let exact = args.exact;
    let mut report = match (args.stat, exact) {
        (DistStat::Blocks, false) => Report::new(&["k", "probability"]),
        (DistStat::Blocks, true) => Report::new(&["k", "probability", "exact"]),
        (DistStat::MomentLargest | DistStat::MomentSmallest, false) => Report::new(&["i", "moment"]),
        (DistStat::MomentLargest | DistStat::MomentSmallest, true) => Report::new(&["i", "moment", "exact"]),
        (_, false) => Report::new(&["r", "probability"]),
        (_, true) => Report::new(&["r", "probability", "exact"]),
    };
    let mut push = |index: usize, value: f64, ex: Option<Exact>| {
        let mut row = vec![index.into(), value.into()];
        if let Some(e) = ex {
            row.push(exact_cell(&e));
        }
        report.push(row);
    };
    let w = model.weights();
    match args.stat {
        DistStat::Blocks => {
            if exact {
                for (k, p) in blocks_pmf_in::<Exact>(&model, n)?.into_iter().enumerate() {
                    push(k + 1, gibbs_core::Scalar::to_f64(&p), Some(p));
                }
            } else {
                for (k, p) in blocks_pmf(&model, n)?.into_iter().enumerate() {
                    push(k + 1, p, None);
                }
            }
        }
        DistStat::MomentLargest | DistStat::MomentSmallest => {
            let which = if args.stat == DistStat::MomentLargest { Extreme::Largest } else { Extreme::Smallest };
            if exact {
                let m = factorial_moment_in::<Exact>(&model, n, which, args.i)?;
                push(args.i, gibbs_core::Scalar::to_f64(&m), Some(m));
            } else {
                push(args.i, factorial_moment(&model, n, which, args.i)?, None);
            }
        }
        stat => {
            for &r in &thresholds {
                let (value, ex) = if exact {
                    let e = match stat {
                        DistStat::Largest => extreme_cdf_in::<Exact>(&model, n, args.i, r)?,
                        DistStat::Smallest => smallest_tail_in::<Exact>(&model, n, r)?,
                        DistStat::ConditionalLargest => {
                            conditional_extreme_in::<Exact>(w, n, cond_k.unwrap(), Extreme::Largest, r)?
                        }
                        _ => conditional_extreme_in::<Exact>(w, n, cond_k.unwrap(), Extreme::Smallest, r)?,
                    };
                    (gibbs_core::Scalar::to_f64(&e), Some(e))
                } else {
                    let v = match stat {
                        DistStat::Largest => extreme_cdf(&model, n, args.i, r)?,
                        DistStat::Smallest => smallest_tail(&model, n, r)?,
                        DistStat::ConditionalLargest => conditional_extreme(w, n, cond_k.unwrap(), Extreme::Largest, r)?,
                        _ => conditional_extreme(w, n, cond_k.unwrap(), Extreme::Smallest, r)?,
                    };
                    (v, None)
                };
                push(r, value, ex);
            }
        }
    }
    Ok(report)
}

fn sample(args: &SampleArgs) -> CliResult<Report> {
    let model: GibbsModel = parse_model(&args.model)?;
    model.check_n(args.n)?;
    if args.trials == 0 {
        return Err(usage("--trials must be at least 1"));
    }
    let sampler = PartitionSampler::new(&model, args.n)?;
    let draw = |t: u64| -> PartitionSample { sampler.draw(&mut RngStream::new(args.seed, t).rng()) };
    Ok(match args.stat {
        SampleStat::Sizes => {
            let draws: Vec<PartitionSample> = (0..args.trials).into_par_iter().map(draw).collect();
            let mut report = Report::new(&["trial", "k", "sizes"]);
            for (t, s) in draws.iter().enumerate() {
                let sizes: Vec<String> = s.sizes().iter().map(usize::to_string).collect();
                report.push(vec![t.into(), s.k.into(), sizes.join(" ").into()]);
            }
            report
        }
        SampleStat::Blocks => {
            let ks: Vec<usize> = (0..args.trials).into_par_iter().map(|t| draw(t).k).collect();
            let mut hist = vec![0u64; args.n + 1];
            for k in ks {
                hist[k] += 1;
            }
            let mut report = Report::new(&["k", "count"]);
            for (k, c) in hist.into_iter().enumerate().skip(1) {
                report.push(vec![k.into(), c.into()]);
            }
            report
        }
        SampleStat::SmallestGt1 => {
            let count = (0..args.trials).into_par_iter().filter(|t| draw(*t).smallest() > 1).count() as u64;
            let mut report = Report::new(&["trials", "count", "proportion"]);
            report.push(vec![args.trials.into(), count.into(), (count as f64 / args.trials as f64).into()]);
            report
        }
    })
}

fn asymptotic_rows(report: &mut Report, form: &Asymptotic, n: Option<usize>) {
    match form {
        Asymptotic::Form(f) => {
            report.push(vec!["coefficient".into(), f.coefficient.into()]);
            report.push(vec!["n_power".into(), f.n_power.into()]);
            if f.log_n_power != 0.0 {
                report.push(vec!["log_n_power".into(), f.log_n_power.into()]);
            }
        }
        Asymptotic::Order { n_power } => report.push(vec!["order_n_power".into(), (*n_power).into()]),
        Asymptotic::Hwang { .. } => {}
    }
    if let (Some(n), Some(v)) = (n, n.and_then(|n| form.evaluate(n as f64))) {
        let _ = n;
        report.push(vec!["value".into(), v.into()]);
    }
}

fn asymp(a: &AsympArgs) -> CliResult<Report> {
    if !(a.tol > 0.0) {
        return Err(usage("--tol must be positive"));
    }
    let mut report = Report::new(&["quantity", "value"]);
    match a.name {
        AsympName::Dickman => {
            let v = dickman_rho(need(a.alpha, "alpha")?, need(a.theta, "theta")?, need(a.x, "x")?)?;
            report.push(vec!["dickman".into(), v.into()]);
        }
        AsympName::Buchstab => {
            let v = buchstab_omega(need(a.theta, "theta")?, need(a.x, "x")?)?;
            report.push(vec!["buchstab".into(), v.into()]);
        }
        AsympName::RhoTilde => {
            let v = rho_tilde(need(a.alpha, "alpha")?, need(a.x, "x")?, need(a.k, "k")?)?;
            report.push(vec!["rho_tilde".into(), v.into()]);
        }
        AsympName::RhoRoot => {
            let (alpha, r) = (need(a.alpha, "alpha")?, need(a.r, "r")?);
            let root = rho_r_root(alpha, r)?;
            report.push(vec!["rho".into(), root.into()]);
            report.push(vec!["residual".into(), f_r(alpha, r, root).0.into()]);
        }
        AsympName::SmallestTail => {
            let t = smallest_tail_asymp_ep(need(a.alpha, "alpha")?, need(a.theta, "theta")?, need(a.r, "r")?)?;
            report.push(vec!["coefficient".into(), t.leading.coefficient.into()]);
            report.push(vec!["n_power".into(), t.leading.n_power.into()]);
            if let Some(c) = t.correction {
                report.push(vec!["correction_coefficient".into(), c.coefficient.into()]);
                report.push(vec!["correction_n_power".into(), c.n_power.into()]);
            }
            if let Some(n) = a.n {
                report.push(vec!["value".into(), t.evaluate(n as f64).into()]);
            }
        }
        AsympName::SmallestLargeDev => {
            let f = smallest_large_dev(need(a.alpha, "alpha")?, need(a.theta, "theta")?, need(a.x, "x")?)?;
            asymptotic_rows(&mut report, &f, a.n);
        }
        AsympName::LargestSmallDev => {
            let (alpha, theta, n, r) = (need(a.alpha, "alpha")?, need(a.theta, "theta")?, need(a.n, "n")?, need(a.r, "r")?);
            report.push(vec!["exact_root".into(), largest_small_dev(alpha, theta, n, r, SmallDevForm::ExactRoot)?.into()]);
            report.push(vec!["limit".into(), largest_small_dev(alpha, theta, n, r, SmallDevForm::Limit)?.into()]);
        }
        AsympName::Moment => {
            let which = match a.extreme {
                ExtremeArg::Largest => Extreme::Largest,
                ExtremeArg::Smallest => Extreme::Smallest,
            };
            let v = moment_limits(need(a.alpha, "alpha")?, need(a.theta, "theta")?, which, a.i, a.tol)?;
            report.push(vec!["moment".into(), v.into()]);
        }
        AsympName::Dirichlet => {
            let spec = DirichletSpec::new(
                need(a.b, "b")?,
                need(a.p, "p")?,
                need(a.q, "q")?,
                need(a.nu, "nu")?,
                need(a.rho, "rho")?,
            )
            .with_tol(a.tol);
            report.push(vec!["integral".into(), incomplete_dirichlet(&spec)?.into()]);
        }
        AsympName::GnedinLargest | AsympName::GnedinSmallest => {
            let x = need(a.x, "x")?;
            let q = if a.name == AsympName::GnedinLargest { GnedinQuery::LargestCdf(x) } else { GnedinQuery::SmallestTail(x) };
            let v = gnedin_asymp(need(a.gamma, "gamma")?, need(a.zeta, "zeta")?, q)?;
            report.push(vec!["probability".into(), v.into()]);
        }
        AsympName::Stirling1Assoc => {
            let f = special_number_asymp(SpecialAsympKind::Stirling1Assoc { k: need(a.k, "k")?, x: need(a.x, "x")? })?;
            asymptotic_rows(&mut report, &f, a.n);
        }
    }
    Ok(report)
}

fn bell(a: &BellArgs) -> CliResult<Report> {
    let kind = match a.kind {
        BellKind::Stirling1 => SpecialKind::Stirling1,
        BellKind::Gfc => SpecialKind::Gfc,
        BellKind::Stirling1Assoc => SpecialKind::Stirling1Assoc(need(a.r, "r")?),
        BellKind::GfcAssoc => SpecialKind::GfcAssoc(need(a.r, "r")?),
    };
    if matches!(kind, SpecialKind::Stirling1Assoc(0) | SpecialKind::GfcAssoc(0)) {
        return Err(usage("--r must be at least 1"));
    }
    // validates alpha before any table is built
    kind.weights(a.alpha)?;
    let ks: Vec<usize> = match a.k {
        Some(k) if k > a.n => return Err(usage(format!("--k must lie in 0..={}", a.n))),
        Some(k) => vec![k],
        None => (0..=a.n).collect(),
    };
    let mut report =
        if a.exact { Report::new(&["k", "value", "ln_abs", "exact"]) } else { Report::new(&["k", "value", "ln_abs"]) };
    for k in ks {
        if a.exact {
            let e = special_number_in::<Exact>(kind, a.n, k, a.alpha)?;
            report.push(vec![
                k.into(),
                gibbs_core::Scalar::to_f64(&e).into(),
                gibbs_core::Scalar::ln_abs(&e).into(),
                exact_cell(&e),
            ]);
        } else {
            let v = special_number(kind, a.n, k, a.alpha)?;
            report.push(vec![k.into(), v.to_f64().into(), v.log_mag.into()]);
        }
    }
    Ok(report)
}

/// Parses `alpha=..,theta=..`.
fn parse_cell(s: &str) -> CliResult<(f64, f64)> {
    let mut alpha = None;
    let mut theta = None;
    for part in s.split(',') {
        let (key, value) = part.split_once('=').ok_or_else(|| usage(format!("bad --cell entry '{part}'")))?;
        let v: f64 = value.trim().parse().map_err(|_| usage(format!("bad number in --cell: '{value}'")))?;
        match key.trim() {
            "alpha" => alpha = Some(v),
            "theta" => theta = Some(v),
            other => return Err(usage(format!("unknown --cell key '{other}'"))),
        }
    }
    Ok((need(alpha, "cell alpha")?, need(theta, "cell theta")?))
}

fn run_verify(a: &VerifyArgs) -> CliResult<(Report, bool)> {
    Ok(match a.suite {
        Suite::Table1 => {
            if a.trials == 0 {
                return Err(usage("--trials must be at least 1"));
            }
            let cells: Vec<(f64, f64, Option<u64>)> = match &a.cell {
                Some(s) => {
                    let (alpha, theta) = parse_cell(s)?;
                    let paper = verify::TABLE1.iter().find(|c| c.0 == alpha && c.1 == theta).map(|c| c.2);
                    vec![(alpha, theta, paper)]
                }
                None => verify::TABLE1.iter().map(|&(a, t, c)| (a, t, Some(c))).collect(),
            };
            for &(alpha, theta, _) in &cells {
                GibbsModel::ewens_pitman(alpha, theta)?;
            }
            verify::table1(&cells, a.trials, a.seed)?
        }
        Suite::Oracle => {
            let n = a.n.unwrap_or(10);
            if n == 0 || n > gibbs_core::oracle::ENUM_N_MAX {
                return Err(usage(format!("--n must lie in 1..={}", gibbs_core::oracle::ENUM_N_MAX)));
            }
            verify::oracle(n)?
        }
        Suite::Identities => {
            let n = a.n.unwrap_or(12);
            if n == 0 {
                return Err(usage("--n must be at least 1"));
            }
            verify::identities(n, 4)?
        }
    })
}

fn run(cli: &Cli) -> CliResult<()> {
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(usage("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new().num_threads(t).build_global().map_err(|e| usage(e.to_string()))?;
    }
    let mut passed = true;
    let report = match &cli.command {
        Command::Dist(a) => dist(a)?,
        Command::Sample(a) => sample(a)?,
        Command::Asymp(a) => asymp(a)?,
        Command::Bell(a) => bell(a)?,
        Command::Verify(a) => {
            let (r, ok) = run_verify(a)?;
            passed = ok;
            r
        }
    };
    let text = report.render(cli.format);
    match &cli.output {
        Some(path) => fs::write(path, text)?,
        None => print!("{text}"),
    }
    if passed {
        Ok(())
    } else {
        Err(CliError::VerifyFailed)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
