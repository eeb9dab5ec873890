//! Incomplete Dirichlet integrals over the restricted simplex
//! `{y_1, ..., y_b > p, y_1 + ... + y_b < 1 - q}`, with the remaining mass
//! `y_{b+1} = 1 - y_1 - ... - y_b` and real exponents that may be `<= 0`.

use std::cell::Cell;

use crate::error::{GibbsError, Result};
use crate::numeric::{log_gamma_signed, ExtVal};
use crate::quad::{adaptive_endpoints, right_weighted};

pub const DEFAULT_TOL: f64 = 1e-8;

/// Largest dimension handled by nested quadrature; beyond it Monte Carlo is used.
pub const MAX_NESTED_DIM: usize = 6;

/// Chebyshev table sizes tried before falling back to nested quadrature.
const CHEB_SIZES: [usize; 5] = [17, 33, 65, 129, 257];

const MC_SAMPLES: usize = 2_000_000;
const MC_SEED: u64 = 0x5eed_d1f1;

/// Slack below which the domain is treated as empty.
const EMPTY_SLACK: f64 = 1e-13;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DirichletSpec {
    pub b: usize,
    pub p: f64,
    pub q: f64,
    pub nu: f64,
    pub rho: f64,
    /// Absolute tolerance on the returned value.
    pub tol: f64,
}

impl DirichletSpec {
    pub fn new(b: usize, p: f64, q: f64, nu: f64, rho: f64) -> Self {
        DirichletSpec { b, p, q, nu, rho, tol: DEFAULT_TOL }
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    /// `1 - q - b p`, the room left once every coordinate sits at its floor.
    pub fn slack(&self) -> f64 {
        1.0 - self.q - self.b as f64 * self.p
    }

    fn check(&self) -> Result<()> {
        let finite = self.p.is_finite() && self.q.is_finite() && self.nu.is_finite() && self.rho.is_finite();
        if !finite || !(self.p > 0.0) || !(0.0..1.0).contains(&self.q) {
            return Err(GibbsError::Param(format!(
                "Dirichlet integral needs p > 0 and 0 <= q < 1, got p = {}, q = {}",
                self.p, self.q
            )));
        }
        if !(self.tol > 0.0) {
            return Err(GibbsError::Param(format!("tolerance must be positive, got {}", self.tol)));
        }
        if self.slack() <= EMPTY_SLACK {
            return Err(GibbsError::EmptyDomain);
        }
        Ok(())
    }

    /// Log of the bare integrand at `y_1..y_b` (all `> p`, sum `< 1 - q`).
    pub(crate) fn ln_integrand(&self, ys: &[f64], last: f64) -> f64 {
        let mut acc = (self.rho - 1.0) * last.ln();
        for y in ys {
            acc += (self.nu - 1.0) * y.ln();
        }
        acc
    }
}

/// What an integral reduces to once conventions and limits are applied.
#[derive(Clone, Debug)]
pub(crate) enum Plan {
    Value(f64),
    /// `prefactor * bare integral of spec`.
    Scaled { spec: DirichletSpec, prefactor: ExtVal },
}

fn nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && x == x.floor()
}

pub(crate) fn plan(spec: &DirichletSpec) -> Result<Plan> {
    if spec.b == 0 {
        return Ok(Plan::Value(1.0));
    }
    spec.check()?;
    if spec.nu == 0.0 {
        if spec.q == 0.0 && spec.rho <= 0.0 {
            return Err(GibbsError::Param(format!(
                "with q = 0 the integrand is not integrable for rho = {} <= 0",
                spec.rho
            )));
        }
        return Ok(Plan::Scaled { spec: *spec, prefactor: ExtVal::from_f64(1.0) });
    }
    if spec.rho == 0.0 {
        if spec.q > 0.0 {
            // 1/Gamma(rho) vanishes while the integral stays finite.
            return Ok(Plan::Value(0.0));
        }
        // rho * y^(rho - 1) concentrates all mass at y_{b+1} = 0, leaving the
        // face y_b = 1 - y_1 - ... - y_{b-1} with its own floor at p.
        let face = DirichletSpec { b: spec.b - 1, q: spec.p, rho: spec.nu, ..*spec };
        return plan(&face);
    }
    let total = spec.rho + spec.b as f64 * spec.nu;
    for x in [total, spec.rho, spec.nu] {
        if nonpositive_integer(x) {
            return Err(GibbsError::Pole(x));
        }
    }
    if spec.q == 0.0 && spec.rho < 0.0 {
        return Err(GibbsError::Param(format!(
            "with q = 0 the integrand is not integrable for rho = {} < 0",
            spec.rho
        )));
    }
    let num = log_gamma_signed(total)?;
    let den_rho = log_gamma_signed(spec.rho)?;
    let den_nu = log_gamma_signed(spec.nu)?;
    let mut sign = num.sign.times(den_rho.sign);
    if spec.b % 2 == 1 {
        sign = sign.times(den_nu.sign);
    }
    let ln = num.log_mag - den_rho.log_mag - spec.b as f64 * den_nu.log_mag;
    Ok(Plan::Scaled { spec: *spec, prefactor: ExtVal::from_parts(sign, ln) })
}

struct Nested {
    p: f64,
    q: f64,
    nu_m1: f64,
    rho_m1: f64,
    /// Exponent of the level-0 function at zero slack.
    base_exp: f64,
    rel: Vec<f64>,
    failed: Cell<bool>,
}

impl Nested {
    /// Integral over the last `d` coordinates given `slack` left above their floors.
    fn level(&self, d: usize, slack: f64) -> f64 {
        if d == 0 {
            return (slack + self.q).powf(self.rho_m1);
        }
        let out = adaptive_endpoints(
            |_, t, rest| (self.p + t).powf(self.nu_m1) * self.level(d - 1, rest),
            0.0,
            slack,
            None,
            Some(self.base_exp + (d - 1) as f64),
            0.0,
            self.rel[d],
        );
        if !out.converged(0.0, self.rel[d]) {
            self.failed.set(true);
        }
        out.value
    }
}

/// Values of a smooth function on Chebyshev points of `[0, width]`.
struct ChebTable {
    width: f64,
    values: Vec<f64>,
}

impl ChebTable {
    fn node(width: f64, j: usize, n: usize) -> f64 {
        let c = (std::f64::consts::PI * j as f64 / (n - 1) as f64).cos();
        0.5 * width * (1.0 - c)
    }

    /// Barycentric interpolation.
    fn eval(&self, s: f64) -> f64 {
        let n = self.values.len();
        let (mut num, mut den) = (0.0, 0.0);
        for (j, v) in self.values.iter().enumerate() {
            let d = s - Self::node(self.width, j, n);
            if d == 0.0 {
                return *v;
            }
            let mut w = if j % 2 == 0 { 1.0 } else { -1.0 };
            if j == 0 || j == n - 1 {
                w *= 0.5;
            }
            num += w * v / d;
            den += w / d;
        }
        num / den
    }
}

/// The nested integral as a chain of one-dimensional convolutions.
/// Writing the inner integral over `d` coordinates with slack `s` as
/// `s^(d + e) g_d(s)`, each `g_d` is analytic on `[0, slack]` and is tabulated
/// from `g_{d-1}` by a tanh-sinh rule that absorbs the `(1 - u)^(d - 1 + e)`
/// factor. Returns `None` when the tables do not settle.
fn convolution_raw(spec: &DirichletSpec) -> Option<f64> {
    let (b, width) = (spec.b, spec.slack());
    let e = if spec.q == 0.0 { spec.rho - 1.0 } else { 0.0 };
    let inner_tol = 1e-13;
    let base = |s: f64| if spec.q == 0.0 { 1.0 } else { (s + spec.q).powf(spec.rho - 1.0) };
    let step = |prev: &dyn Fn(f64) -> f64, d: usize, s: f64| -> Option<f64> {
        let out = right_weighted(|u, cu| (spec.p + s * u).powf(spec.nu - 1.0) * prev(s * cu), d as f64 - 1.0 + e, inner_tol);
        (out.value.is_finite() && out.error <= 1e-10 * out.value.abs().max(f64::MIN_POSITIVE)).then_some(out.value)
    };
    let mut last: Option<f64> = None;
    for n in CHEB_SIZES {
        let mut table: Option<ChebTable> = None;
        for d in 1..b {
            let mut values = Vec::with_capacity(n);
            for j in 0..n {
                let s = ChebTable::node(width, j, n);
                let v = match &table {
                    None => step(&base, d, s)?,
                    Some(t) => step(&|x| t.eval(x), d, s)?,
                };
                values.push(v);
            }
            table = Some(ChebTable { width, values });
        }
        let top = match &table {
            None => step(&base, b, width)?,
            Some(t) => step(&|x| t.eval(x), b, width)?,
        };
        let value = width.powf(b as f64 + e) * top;
        if let Some(prev) = last {
            if (value - prev).abs() <= spec.tol.max(1e-12 * value.abs()) {
                return Some(value);
            }
        }
        last = Some(value);
    }
    None
}

/// Bare integral `∫ y_{b+1}^(rho-1) prod y_j^(nu-1)` over the restricted
/// simplex, with `spec.tol` as absolute tolerance and no gamma prefactor.
pub fn dirichlet_raw(spec: &DirichletSpec) -> Result<f64> {
    if spec.b == 0 {
        return Ok(1.0);
    }
    spec.check()?;
    if spec.q == 0.0 && spec.rho <= 0.0 {
        return Err(GibbsError::Param(format!(
            "with q = 0 the integrand is not integrable for rho = {} <= 0",
            spec.rho
        )));
    }
    if spec.b > MAX_NESTED_DIM {
        let (est, se) = mc_bare(spec, MC_SAMPLES, MC_SEED);
        if se > spec.tol {
            return Err(GibbsError::ToleranceNotMet { estimate: se, tol: spec.tol });
        }
        return Ok(est);
    }
    if spec.b >= 2 {
        if let Some(v) = convolution_raw(spec) {
            return Ok(v);
        }
    }
    nested_raw(spec)
}

/// Recursive adaptive quadrature with the error budget split per level.
fn nested_raw(spec: &DirichletSpec) -> Result<f64> {
    let b = spec.b;
    let base = spec.tol.clamp(1e-10, 1e-6);
    let rel = (0..=b).map(|d| (base / 3f64.powi((b - d) as i32)).max(1e-12)).collect();
    let nested = Nested {
        p: spec.p,
        q: spec.q,
        nu_m1: spec.nu - 1.0,
        rho_m1: spec.rho - 1.0,
        base_exp: if spec.q == 0.0 { spec.rho - 1.0 } else { 0.0 },
        rel,
        failed: Cell::new(false),
    };
    let top = adaptive_endpoints(
        |_, t, rest| (nested.p + t).powf(nested.nu_m1) * nested.level(b - 1, rest),
        0.0,
        spec.slack(),
        None,
        Some(nested.base_exp + (b - 1) as f64),
        spec.tol,
        0.0,
    );
    if !top.value.is_finite() {
        return Err(GibbsError::ToleranceNotMet { estimate: f64::INFINITY, tol: spec.tol });
    }
    if top.error > spec.tol || nested.failed.get() {
        return Err(GibbsError::ToleranceNotMet { estimate: top.error, tol: spec.tol });
    }
    Ok(top.value)
}

/// `I^(b)_{p,q}(nu; rho)` including the gamma prefactor (omitted when
/// `nu = 0`). At `rho = 0` with `nu != 0` the value is the limit `rho -> 0+`.
pub fn incomplete_dirichlet(spec: &DirichletSpec) -> Result<f64> {
    match plan(spec)? {
        Plan::Value(v) => Ok(v),
        Plan::Scaled { spec: inner, prefactor } => {
            if prefactor.is_zero() {
                return Ok(0.0);
            }
            let scale = prefactor.log_mag.exp();
            let raw = dirichlet_raw(&inner.with_tol(spec.tol / scale))?;
            Ok(prefactor.sign.as_f64() * scale * raw)
        }
    }
}

/// Same as [`incomplete_dirichlet`] but an empty domain yields `0`.
pub(crate) fn dirichlet_or_zero(spec: &DirichletSpec) -> Result<f64> {
    match incomplete_dirichlet(spec) {
        Err(GibbsError::EmptyDomain) => Ok(0.0),
        other => other,
    }
}

/// Same as [`dirichlet_raw`] but an empty domain yields `0`.
pub(crate) fn raw_or_zero(spec: &DirichletSpec) -> Result<f64> {
    match dirichlet_raw(spec) {
        Err(GibbsError::EmptyDomain) => Ok(0.0),
        other => other,
    }
}

/// Hit-or-miss estimate of the bare integral: uniform points in the bounding
/// box `(p, p + slack)^b`, rejected outside the simplex.
pub(crate) fn mc_bare(spec: &DirichletSpec, samples: usize, seed: u64) -> (f64, f64) {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let slack = spec.slack();
    let volume = slack.powi(spec.b as i32);
    let mut ys = vec![0.0; spec.b];
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for _ in 0..samples {
        let mut used = 0.0;
        for y in ys.iter_mut() {
            let t: f64 = rng.random::<f64>() * slack;
            used += t;
            *y = spec.p + t;
        }
        // y_{b+1} - q = slack - used
        let rest = slack - used;
        if rest <= 0.0 {
            continue;
        }
        let f = spec.ln_integrand(&ys, rest + spec.q).exp();
        sum += f;
        sum_sq += f * f;
    }
    let n = samples as f64;
    let mean = sum / n;
    let var = (sum_sq / n - mean * mean).max(0.0);
    (volume * mean, volume * (var / n).sqrt())
}

/// Monte Carlo estimate and standard error of `I^(b)_{p,q}(nu; rho)`,
/// with the same conventions as [`incomplete_dirichlet`].
pub fn dirichlet_mc_estimate(spec: &DirichletSpec, samples: usize, seed: u64) -> Result<(f64, f64)> {
    match plan(spec)? {
        Plan::Value(v) => Ok((v, 0.0)),
        Plan::Scaled { spec: inner, prefactor } => {
            if inner.b == 0 {
                return Ok((prefactor.to_f64(), 0.0));
            }
            let (est, se) = mc_bare(&inner, samples, seed);
            let scale = prefactor.to_f64();
            Ok((scale * est, scale.abs() * se))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms() {
        let v = incomplete_dirichlet(&DirichletSpec::new(1, 0.25, 0.25, 0.0, 0.0)).unwrap();
        assert!((v - 2.0 * 3f64.ln()).abs() < 1e-8);
        let v = incomplete_dirichlet(&DirichletSpec::new(1, 0.6, 0.0, 1.0, 1.0)).unwrap();
        assert!((v - 0.4).abs() < 1e-8);
        let v = incomplete_dirichlet(&DirichletSpec::new(0, 7.0, 3.0, -2.0, -1.0)).unwrap();
        assert_eq!(v, 1.0);
        // Dickman: ∫_{1/2}^1 dy / y = ln 2
        let v = incomplete_dirichlet(&DirichletSpec::new(1, 0.5, 0.0, 0.0, 1.0)).unwrap();
        assert!((v - 2f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn boundaries() {
        assert_eq!(
            incomplete_dirichlet(&DirichletSpec::new(2, 0.5, 0.1, 1.0, 1.0)),
            Err(GibbsError::EmptyDomain)
        );
        assert!(matches!(incomplete_dirichlet(&DirichletSpec::new(1, 0.2, 0.1, -1.0, 1.0)), Err(GibbsError::Pole(_))));
        assert_eq!(incomplete_dirichlet(&DirichletSpec::new(2, 0.2, 0.1, 0.5, 0.0)).unwrap(), 0.0);
        // rho -> 0 with q = 0 drops to the face: I^(1)_{0.2,0.2}(1;1) = 0.6
        let v = incomplete_dirichlet(&DirichletSpec::new(2, 0.2, 0.0, 1.0, 0.0)).unwrap();
        assert!((v - 0.6).abs() < 1e-9);
    }

    #[test]
    fn full_simplex_is_a_probability() {
        // Dirichlet(1,1,1,1) mass of {y_j > 0.1 for all four}: (1 - 0.4)^3
        let v = incomplete_dirichlet(&DirichletSpec::new(3, 0.1, 0.1, 1.0, 1.0)).unwrap();
        assert!((v - 0.6f64.powi(3)).abs() < 1e-8, "{v}");
        // singular exponents: Dirichlet(0.5, 0.5, 0.3) over the box floor 0.05
        let spec = DirichletSpec::new(2, 0.05, 0.0, 0.5, 0.3);
        let v = incomplete_dirichlet(&spec).unwrap();
        let (mc, se) = dirichlet_mc_estimate(&spec, 400_000, 7).unwrap();
        assert!((v - mc).abs() < 5.0 * se, "{v} vs {mc} ± {se}");
    }

    #[test]
    fn convolution_agrees_with_nested() {
        for spec in [
            DirichletSpec::new(2, 0.2, 0.0, 0.0, 2.3),
            DirichletSpec::new(3, 0.15, 0.0, -0.5, 2.0),
            DirichletSpec::new(2, 0.1, 0.3, 0.0, 0.0),
            DirichletSpec::new(3, 0.2, 0.2, 0.5, -0.4),
            DirichletSpec::new(2, 0.05, 0.0, 0.5, 0.3),
        ] {
            let fast = convolution_raw(&spec).unwrap();
            let slow = nested_raw(&spec).unwrap();
            assert!((fast - slow).abs() < 1e-8, "{spec:?}: {fast} vs {slow}");
        }
    }
}
