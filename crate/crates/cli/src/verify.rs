//! `verify` suites: exact-engine cross-checks and the simulation table.

use gibbs_core::bell::crosscheck_identities;
use gibbs_core::dist::{blocks_pmf_in, conditional_extreme_in, extreme_cdf_in, smallest_tail, smallest_tail_in};
use gibbs_core::oracle::{exact_event_enum, exact_stat_enum, Stat};
use gibbs_core::sampler::Event;
use gibbs_core::{consistent_weights, run_experiment, Exact, Extreme, GibbsModel, Result, Weights};
use num_traits::Zero;

use crate::report::Report;

/// Published counts of `{smallest block > 1}` over 10,000 partitions of 100,
/// keyed by `(alpha, theta)`.
pub const TABLE1: &[(f64, f64, u64)] = &[
    (0.9, -0.01, 15), (0.5, -0.01, 1162), (0.1, -0.01, 8699),
    (0.9, 0.0, 12), (0.5, 0.0, 1103), (0.1, 0.0, 8551),
    (0.9, 0.01, 15), (0.5, 0.01, 1029), (0.1, 0.01, 8416), (0.0, 0.01, 9909),
    (0.9, 0.1, 14), (0.5, 0.1, 785), (0.1, 0.1, 7358), (0.0, 0.1, 9042), (-0.1, 0.1, 10000),
    (0.9, 0.5, 1), (0.5, 0.5, 161), (0.1, 0.5, 4082), (0.0, 0.5, 5961), (-0.1, 0.5, 7661), (-0.5, 0.5, 10000),
    (0.9, 1.0, 0), (0.5, 1.0, 43), (0.1, 1.0, 1003), (0.0, 1.0, 3610), (-0.1, 1.0, 5391), (-0.5, 1.0, 9426),
    (-1.0, 1.0, 10000),
    (0.9, 5.0, 0), (0.5, 5.0, 0), (0.1, 5.0, 21), (0.0, 5.0, 82), (-0.1, 5.0, 244), (-0.5, 5.0, 3372),
    (-1.0, 5.0, 8238),
];

pub const TABLE1_N: usize = 100;

/// Counts `{smallest > 1}` for each selected cell and flags whether the count
/// lies within four binomial standard deviations of the exact expectation.
pub fn table1(cells: &[(f64, f64, Option<u64>)], trials: u64, seed: u64) -> Result<(Report, bool)> {
    let mut report = Report::new(&["alpha", "theta", "trials", "count", "expected", "sigma", "paper", "pass"]);
    let mut all = true;
    for (idx, &(alpha, theta, paper)) in cells.iter().enumerate() {
        let model = GibbsModel::ewens_pitman(alpha, theta)?;
        let p = smallest_tail(&model, TABLE1_N, 2)?;
        let count = run_experiment(&model, TABLE1_N, trials, seed.wrapping_add(idx as u64), &Event::SmallestGt1)?;
        let mean = trials as f64 * p;
        let sigma = (trials as f64 * p * (1.0 - p)).sqrt();
        let pass = (count as f64 - mean).abs() <= 4.0 * sigma;
        all &= pass;
        let paper = paper.map_or_else(|| "".to_string(), |c| c.to_string());
        report.push(vec![
            alpha.into(),
            theta.into(),
            trials.into(),
            count.into(),
            mean.into(),
            sigma.into(),
            paper.into(),
            pass.into(),
        ]);
    }
    Ok((report, all))
}

pub fn oracle_models() -> Result<Vec<(&'static str, GibbsModel)>> {
    Ok(vec![
        ("ewens_pitman(0.5,1)", GibbsModel::ewens_pitman(0.5, 1.0)?),
        ("ewens_pitman(0,1)", GibbsModel::ewens_pitman(0.0, 1.0)?),
        ("ewens_pitman(-0.5,1)", GibbsModel::ewens_pitman(-0.5, 1.0)?),
        ("gnedin(1,1)", GibbsModel::gnedin(1.0, 1.0)?),
    ])
}

/// Exact engine against brute-force enumeration, one row per model and `n`.
pub fn oracle(n_max: usize) -> Result<(Report, bool)> {
    let mut report = Report::new(&["model", "n", "checks", "pass"]);
    let mut all = true;
    for (name, model) in oracle_models()? {
        for n in 1..=n_max {
            let (checks, pass) = oracle_case(&model, n)?;
            all &= pass;
            report.push(vec![name.into(), n.into(), checks.into(), pass.into()]);
        }
    }
    Ok((report, all))
}

fn oracle_case(model: &GibbsModel, n: usize) -> Result<(usize, bool)> {
    let mut checks = 0usize;
    let mut ok = true;
    let pmf = blocks_pmf_in::<Exact>(model, n)?;
    for k in 1..=n {
        ok &= pmf[k - 1] == exact_stat_enum(model, n, Stat::Blocks(k))?;
        checks += 1;
    }
    for r in 1..=n {
        for i in 1..=3 {
            ok &= extreme_cdf_in::<Exact>(model, n, i, r)? == exact_stat_enum(model, n, Stat::IthLargestAtMost { i, r })?;
            checks += 1;
        }
        ok &= smallest_tail_in::<Exact>(model, n, r)? == exact_stat_enum(model, n, Stat::SmallestAtLeast(r))?;
        checks += 1;
        for k in 1..=n {
            let pk = &pmf[k - 1];
            if pk.is_zero() {
                continue;
            }
            let w = model.weights();
            let big = exact_event_enum(model, n, |p| p.blocks() == k && p.ith_largest(1) <= r)? / pk.clone();
            let small = exact_event_enum(model, n, |p| p.blocks() == k && p.smallest() >= r)? / pk.clone();
            ok &= conditional_extreme_in::<Exact>(w, n, k, Extreme::Largest, r)? == big;
            ok &= conditional_extreme_in::<Exact>(w, n, k, Extreme::Smallest, r)? == small;
            checks += 2;
        }
    }
    Ok((checks, ok))
}

/// Exact residuals of the identities between plain and associated Bell
/// polynomials, one row per weight family and `n`.
pub fn identities(n_max: usize, r_max: usize) -> Result<(Report, bool)> {
    let families: Vec<(&str, Weights)> = vec![
        ("factorial", Weights::factorial()),
        ("falling(0.5)", Weights::Falling { alpha: 0.5 }),
        ("consistent(0.5)", consistent_weights(0.5)?),
    ];
    let mut report = Report::new(&["weights", "n", "checks", "pass"]);
    let mut all = true;
    for (name, w) in &families {
        for n in 1..=n_max {
            let mut checks = 0usize;
            let mut ok = true;
            for k in 1..=n {
                for r in 1..=r_max {
                    let rep = crosscheck_identities::<Exact>(w, n, k, r)?;
                    ok &= rep.all_exact_zero();
                    checks += [&rep.right_by_plain, &rep.left_by_plain, &rep.left_shift, &rep.right_shift]
                        .iter()
                        .filter(|x| x.is_ok())
                        .count();
                }
            }
            all &= ok;
            report.push(vec![(*name).into(), n.into(), checks.into(), ok.into()]);
        }
    }
    Ok((report, all))
}
