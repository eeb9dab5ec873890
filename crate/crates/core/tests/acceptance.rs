//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the lines always reach stdout. The
//! process fails if any criterion fails, except those listed in
//! `KNOWN_FAILURES`, which are kept to document claims that do not hold.

use std::time::Instant;

use gibbs_core::asymp::{
    buchstab_omega, dickman_rho, f_r, moment_limits, rho_r_root, smallest_tail_asymp_ep, special_number_asymp,
    SpecialAsympKind,
};
use gibbs_core::bell::{crosscheck_identities, special_number_in, table, Family, SpecialKind};
use gibbs_core::dist::{
    blocks_pmf_in, conditional_extreme_in, extreme_cdf, extreme_cdf_in, smallest_tail, smallest_tail_in, Extreme,
};
use gibbs_core::models::{consistent_weights, eppf_in, Weights};
use gibbs_core::numeric::{falling, ln_factorials, rising};
use gibbs_core::oracle::{dirichlet_mc, enumerate_integer_partitions, exact_event_enum, exact_stat_enum, Stat};
use gibbs_core::sampler::{run_experiment, Event};
use gibbs_core::{incomplete_dirichlet, DirichletSpec, Exact, GibbsModel, LogF64, Scalar, Sizes};
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};

/// Criteria whose stated claim is false; see the decision ledger.
const KNOWN_FAILURES: &[&str] = &["7b"];

type Check = fn() -> (bool, String);

fn oracle_models() -> Vec<(&'static str, GibbsModel)> {
    vec![
        ("EP(0.5,1)", GibbsModel::ewens_pitman(0.5, 1.0).unwrap()),
        ("EP(0,1)", GibbsModel::ewens_pitman(0.0, 1.0).unwrap()),
        ("EP(-0.5,1)", GibbsModel::ewens_pitman(-0.5, 1.0).unwrap()),
        ("Gnedin(1,1)", GibbsModel::gnedin(1.0, 1.0).unwrap()),
    ]
}

fn oracle_equivalence() -> (bool, String) {
    let mut compared = 0usize;
    let mut worst_float = 0.0f64;
    for (name, model) in oracle_models() {
        let w = model.weights().clone();
        for n in 1..=10 {
            let pmf = blocks_pmf_in::<Exact>(&model, n).unwrap();
            let pmf_f = blocks_pmf_in::<LogF64>(&model, n).unwrap();
            for k in 1..=n {
                let want = exact_stat_enum(&model, n, Stat::Blocks(k)).unwrap();
                if pmf[k - 1] != want {
                    return (false, format!("{name} blocks n={n} k={k}"));
                }
                let e = Scalar::to_f64(&want);
                if e != 0.0 {
                    worst_float = worst_float.max((pmf_f[k - 1].to_f64() - e).abs() / e);
                }
                compared += 1;
            }
            for r in 1..=n {
                for i in 1..=3 {
                    let got = extreme_cdf_in::<Exact>(&model, n, i, r).unwrap();
                    let want = exact_stat_enum(&model, n, Stat::IthLargestAtMost { i, r }).unwrap();
                    if got != want {
                        return (false, format!("{name} extreme n={n} i={i} r={r}"));
                    }
                    compared += 1;
                }
                let got = smallest_tail_in::<Exact>(&model, n, r).unwrap();
                if got != exact_stat_enum(&model, n, Stat::SmallestAtLeast(r)).unwrap() {
                    return (false, format!("{name} smallest n={n} r={r}"));
                }
                compared += 1;
                for k in 1..=n {
                    let pk = &pmf[k - 1];
                    if pk.is_zero() {
                        continue;
                    }
                    let big = exact_event_enum(&model, n, |p| p.blocks() == k && p.ith_largest(1) <= r).unwrap();
                    let small = exact_event_enum(&model, n, |p| p.blocks() == k && p.smallest() >= r).unwrap();
                    let got_big = conditional_extreme_in::<Exact>(&w, n, k, Extreme::Largest, r).unwrap();
                    let got_small = conditional_extreme_in::<Exact>(&w, n, k, Extreme::Smallest, r).unwrap();
                    if got_big != big / pk.clone() || got_small != small / pk.clone() {
                        return (false, format!("{name} conditional n={n} k={k} r={r}"));
                    }
                    compared += 2;
                }
            }
        }
    }
    let ok = worst_float <= 1e-12;
    (ok, format!("{compared} exact comparisons; float blocks_pmf max rel err {worst_float:.1e}"))
}

fn identity_suite() -> (bool, String) {
    let families: Vec<(&str, Weights)> = vec![
        ("(j-1)!", Weights::factorial()),
        ("[0.5]_j", Weights::Falling { alpha: 0.5 }),
        ("consistent(0.5)", consistent_weights(0.5).unwrap()),
    ];
    let mut applied = 0usize;
    for (name, w) in &families {
        for n in 1..=12 {
            for k in 1..=n {
                for r in 1..=4 {
                    let rep = crosscheck_identities::<Exact>(w, n, k, r).unwrap();
                    if !rep.all_exact_zero() {
                        return (false, format!("{name} residual at (n,k,r)=({n},{k},{r}): {rep:?}"));
                    }
                    applied += [&rep.right_by_plain, &rep.left_by_plain, &rep.left_shift, &rep.right_shift]
                        .iter()
                        .filter(|x| x.is_ok())
                        .count();
                }
            }
        }
    }
    // sum_k C(n,k;a) [x]_k = [a x]_n
    for alpha in [0.5, -1.0, 2.0] {
        for x in [1.0, 2.0, 3.5] {
            for n in 1..=12 {
                let xe = Exact::from_f64(x);
                let one = Exact::one();
                let lhs = Exact::sum((0..=n).map(|k| {
                    special_number_in::<Exact>(SpecialKind::Gfc, n, k, Some(alpha)).unwrap() * falling(&xe, k, &one)
                }));
                let rhs = falling(&Exact::from_f64(alpha * x), n, &one);
                if lhs != rhs {
                    return (false, format!("C_sum fails at alpha={alpha} x={x} n={n}"));
                }
            }
        }
    }
    // sum_k (theta)_{k;a} B_{n,k}(consistent a) = (theta)_n
    for (alpha, theta) in [(0.5, 1.0), (0.0, 1.0), (-0.5, 1.0), (0.25, 0.75), (-1.0, 3.0)] {
        let w = consistent_weights(alpha).unwrap();
        let t = table::<Exact>(&w, Family::Plain, 12, 12);
        let (a, th) = (Exact::from_f64(alpha), Exact::from_f64(theta));
        for n in 1..=12 {
            let lhs = Exact::sum((1..=n).map(|k| rising(&th, k, &a) * t.get(n, k)));
            if lhs != rising(&th, n, &Exact::one()) {
                return (false, format!("(theta)_n normalization fails at ({alpha},{theta}) n={n}"));
            }
        }
    }
    (true, format!("{applied} identity residuals exactly zero; C_sum and (theta)_n exact for n <= 12"))
}

/// Table 1 of the source: counts of {smallest block > 1}, n = 100, 10,000 trials.
const TABLE1: &[(f64, f64, u64)] = &[
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

fn table1() -> (bool, String) {
    const N: usize = 100;
    const TRIALS: u64 = 10_000;
    let mut ok = true;
    let mut lines = Vec::new();
    for (idx, &(alpha, theta, paper)) in TABLE1.iter().enumerate() {
        let model = GibbsModel::ewens_pitman(alpha, theta).unwrap();
        let p = smallest_tail(&model, N, 2).unwrap();
        let count = run_experiment(&model, N, TRIALS, 1000 + idx as u64, &Event::SmallestGt1).unwrap();
        let mean = TRIALS as f64 * p;
        let band = 4.0 * (TRIALS as f64 * p * (1.0 - p)).sqrt();
        let hit = (count as f64 - mean).abs() <= band;
        let paper_hit = (paper as f64 - mean).abs() <= band;
        ok &= hit;
        lines.push(format!(
            "      ({alpha:>5}, {theta:>5}): count {count:>5}  expected {mean:>8.1} ± {band:>5.1}  paper {paper:>5}{}",
            if paper_hit { "" } else { "  (paper outside band)" }
        ));
        if (alpha, theta) == (0.0, 1.0) && !paper_hit {
            ok = false;
        }
        if (alpha, theta) == (-1.0, 1.0) && count != TRIALS {
            ok = false;
        }
        if (alpha, theta) == (0.9, 1.0) && count > 3 {
            ok = false;
        }
    }
    (ok, format!("{} cells\n{}", TABLE1.len(), lines.join("\n")))
}

fn smallest_sibuya() -> (bool, String) {
    let model = GibbsModel::ewens_pitman(0.5, 1.0).unwrap();
    let form = smallest_tail_asymp_ep(0.5, 1.0, 2).unwrap().leading;
    let c = form.coefficient;
    let ratio = |n: usize| smallest_tail_in::<LogF64>(&model, n, 2).unwrap().to_f64() / form.evaluate(n as f64);
    let (r500, r2000) = (ratio(500), ratio(2000));
    let ok = (c - 4.5135).abs() < 1e-4 && (0.9..=1.1).contains(&r2000) && (r2000 - 1.0).abs() < (r500 - 1.0).abs();
    (ok, format!("coefficient {c:.6}; ratio n=500 {r500:.6}, n=2000 {r2000:.6}"))
}

fn dickman_buchstab() -> (bool, String) {
    let rho = dickman_rho(0.0, 1.0, 0.5).unwrap();
    let omega = buchstab_omega(1.0, 0.4).unwrap();
    let mut ok = (rho - (1.0 - 2f64.ln())).abs() <= 1e-6 && (omega - 0.562186).abs() <= 1e-6;
    let model = GibbsModel::ewens_pitman(0.0, 1.0).unwrap();
    let n = 400usize;
    let mut worst: f64 = 0.0;
    for x in [0.3, 0.4, 0.6] {
        let r = (x * n as f64).round() as usize;
        // smallest: P(S >= x n) ~ (x n)^-1 omega_1(x)
        let exact = smallest_tail(&model, n, r).unwrap();
        let asym = buchstab_omega(1.0, x).unwrap() / (x * n as f64);
        worst = worst.max((exact / asym - 1.0).abs());
        // largest: P(L <= x n) -> rho_{0,1}(x)
        let exact = extreme_cdf(&model, n, 1, r).unwrap();
        let asym = dickman_rho(0.0, 1.0, x).unwrap();
        worst = worst.max((exact / asym - 1.0).abs());
    }
    ok &= worst <= 0.03;
    // (u W(u))' = W(u - 1) with W(u) = omega_1(1/u)
    let w = |u: f64| buchstab_omega(1.0, 1.0 / u).unwrap();
    let h = 1e-4;
    let mut ode: f64 = 0.0;
    for u in [2.2, 2.4, 2.6, 2.8] {
        let lhs = ((u + h) * w(u + h) - (u - h) * w(u - h)) / (2.0 * h);
        ode = ode.max((lhs - w(u - 1.0)).abs());
    }
    ok &= ode <= 1e-3;
    (ok, format!("rho(1/2) {rho:.8}, omega(0.4) {omega:.8}, n=400 worst rel gap {worst:.4}, ODE residual {ode:.1e}"))
}

fn negative_alpha_limits() -> (bool, String) {
    let model = GibbsModel::ewens_pitman(-1.0, 2.0).unwrap();
    let exact = extreme_cdf(&model, 400, 1, 240).unwrap();
    let limit = dickman_rho(-1.0, 2.0, 0.6).unwrap();
    let gap = (exact / limit - 1.0).abs();
    let small = moment_limits(-1.0, 2.0, Extreme::Smallest, 1, 1e-9).unwrap();
    let large = moment_limits(-1.0, 2.0, Extreme::Largest, 1, 1e-9).unwrap();
    let mut ok = gap <= 0.02 && (small - 0.25).abs() <= 1e-6 && (large - 0.75).abs() <= 1e-6;
    // P(largest <= r) = 0 for r < n/m, exactly
    let mut zeros = 0;
    for (alpha, theta, m) in [(-0.5, 1.0, 2usize), (-1.0, 3.0, 3), (-0.25, 1.0, 4)] {
        let model = GibbsModel::ewens_pitman(alpha, theta).unwrap();
        for n in 1..=20usize {
            for r in 1..=n {
                let p = extreme_cdf_in::<Exact>(&model, n, 1, r).unwrap();
                if r * m < n {
                    ok &= p.is_zero();
                    zeros += 1;
                } else {
                    ok &= !p.is_zero();
                }
            }
        }
    }
    (ok, format!("cdf(240)/rho = {exact:.6}/{limit:.6}; E min {small:.9}, E max {large:.9}; {zeros} exact zeros"))
}

fn root_residuals() -> (bool, String) {
    let mut worst: f64 = 0.0;
    for alpha in [0.1, 0.3, 0.5, 0.7, 0.9] {
        for r in [1, 10, 100, 1000, 10_000] {
            let rho = rho_r_root(alpha, r).unwrap();
            worst = worst.max(f_r(alpha, r, rho).0.abs());
        }
    }
    (worst <= 1e-12, format!("max |f_r(rho_r)| = {worst:.1e}"))
}

/// Root `c` of `int_0^1 alpha u^(-1-alpha) (e^(c u) - 1) du = 1`, the actual
/// limit of `r (rho_r - 1)`; reported next to the claimed constant.
fn scaled_root_limit(alpha: f64) -> f64 {
    let lhs = |c: f64| {
        let steps = 20_000;
        let sum: f64 = (0..steps)
            .map(|i| {
                let u = ((i as f64 + 0.5) / steps as f64).powf(1.0 / (1.0 - alpha));
                (c * u).exp_m1() / u
            })
            .sum();
        alpha / (1.0 - alpha) * sum / steps as f64
    };
    let (mut lo, mut hi) = (0.0, (1.0 - alpha) / alpha);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if lhs(mid) < 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

fn root_expansion() -> (bool, String) {
    let mut ok = true;
    let mut parts = Vec::new();
    for alpha in [0.1, 0.3, 0.5, 0.7, 0.9] {
        let r = 10_000usize;
        let scaled = r as f64 * (rho_r_root(alpha, r).unwrap() - 1.0);
        let target = (1.0 - alpha) / alpha;
        ok &= (scaled / target - 1.0).abs() <= 0.05;
        parts.push(format!("a={alpha}: {scaled:.4} vs claimed {target:.4}"));
    }
    let limits: Vec<String> =
        [0.1, 0.3, 0.5, 0.7, 0.9].iter().map(|&a| format!("{:.4}", scaled_root_limit(a))).collect();
    (ok, format!("r(rho_r - 1) at r = 1e4: {}; integral-equation limits {}", parts.join(", "), limits.join(", ")))
}

fn appendix_ratios() -> (bool, String) {
    let lf = ln_factorials(3000);
    let mut ok = true;
    let mut parts = Vec::new();
    for (label, assoc) in [("C_r(n,2;-1)", true), ("|s_r(n,2)|", false)] {
        let mut gaps = Vec::new();
        for n in [750usize, 1500, 3000] {
            let r = n / 4;
            let x = r as f64 / n as f64;
            let (kind, asym) = if assoc {
                (SpecialKind::GfcAssoc(r), SpecialAsympKind::GfcAssoc { alpha: -1.0, k: 2, x })
            } else {
                (SpecialKind::Stirling1Assoc(r), SpecialAsympKind::Stirling1Assoc { k: 2, x })
            };
            let alpha = if assoc { Some(-1.0) } else { None };
            let exact = special_number_in::<LogF64>(kind, n, 2, alpha).unwrap();
            let form = special_number_asymp(asym).unwrap();
            let ln_asym = form.evaluate(n as f64).unwrap().ln();
            let ratio = (exact.ln_abs() - lf[n] - ln_asym).exp();
            gaps.push((ratio - 1.0).abs());
            parts.push(format!("{label} n={n}: {ratio:.6}"));
        }
        ok &= gaps[2] <= 0.1 && gaps[0] > gaps[1] && gaps[1] > gaps[2];
    }
    (ok, parts.join(", "))
}

fn eppf_consistency() -> (bool, String) {
    let mut checked = 0;
    for (name, model) in oracle_models() {
        for n in 1..=7 {
            for p in enumerate_integer_partitions(n).unwrap() {
                let parts = p.parts.clone();
                let lhs = eppf_in::<Exact>(&model, &Sizes::Composition(parts.clone())).unwrap();
                let mut rhs = Exact::zero();
                for j in 0..parts.len() {
                    let mut grown = parts.clone();
                    grown[j] += 1;
                    rhs += eppf_in::<Exact>(&model, &Sizes::Composition(grown)).unwrap();
                }
                let mut extra = parts.clone();
                extra.push(1);
                rhs += eppf_in::<Exact>(&model, &Sizes::Composition(extra)).unwrap();
                if lhs != rhs {
                    return (false, format!("{name} fails at {parts:?}"));
                }
                checked += 1;
            }
        }
    }
    (true, format!("{checked} partitions"))
}

fn quadrature_vs_mc() -> (bool, String) {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    for trial in 0..20u64 {
        let b = rng.random_range(1..=3usize);
        let q = if rng.random::<bool>() { 0.0 } else { rng.random_range(0.05..0.4) };
        let p = rng.random_range(0.02..0.8 * (1.0 - q) / b as f64);
        let nu = [0.0, -0.5, 0.7, 1.0, 1.8, 2.5][rng.random_range(0..6usize)];
        let rho = if q == 0.0 { rng.random_range(0.6..3.0) } else { rng.random_range(-1.5..3.0) };
        let spec = DirichletSpec::new(b, p, q, nu, rho);
        let quad = incomplete_dirichlet(&spec).unwrap();
        let (mc, se) = dirichlet_mc(&spec, 1_000_000, 77 + trial).unwrap();
        let z = if se > 0.0 { (quad - mc).abs() / se } else { 0.0 };
        if se == 0.0 && (quad - mc).abs() > 1e-9 {
            return (false, format!("{spec:?}: {quad} vs deterministic {mc}"));
        }
        worst = worst.max(z);
    }
    (worst <= 4.0, format!("max |quad - mc| / se = {worst:.2}"))
}

fn main() {
    let checks: Vec<(&str, &str, Check, f64)> = vec![
        ("1", "oracle equivalence", oracle_equivalence, 120.0),
        ("2", "identity suite", identity_suite, 60.0),
        ("3", "table 1 reproduction", table1, 300.0),
        ("4", "smallest size, 0 < alpha < 1", smallest_sibuya, 120.0),
        ("5", "Dickman and Buchstab", dickman_buchstab, f64::INFINITY),
        ("6", "alpha < 0 limits", negative_alpha_limits, f64::INFINITY),
        ("7a", "root residuals", root_residuals, 10.0),
        ("7b", "root expansion r(rho_r - 1)", root_expansion, f64::INFINITY),
        ("8", "special-number ratios", appendix_ratios, f64::INFINITY),
        ("9", "EPPF consistency", eppf_consistency, f64::INFINITY),
        ("10", "quadrature vs Monte Carlo", quadrature_vs_mc, f64::INFINITY),
    ];
    let mut unexpected = Vec::new();
    for (id, name, check, budget) in checks {
        let start = Instant::now();
        let (ok, detail) = check();
        let secs = start.elapsed().as_secs_f64();
        let pass = ok && secs <= budget;
        let tag = if pass { "PASS" } else { "FAIL" };
        let note = if !pass && KNOWN_FAILURES.contains(&id) { " [known]" } else { "" };
        println!("{tag} {id:>3} {name}{note} ({secs:.1} s): {detail}");
        if !pass && !KNOWN_FAILURES.contains(&id) {
            unexpected.push(id);
        }
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}
