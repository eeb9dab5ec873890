//! Large-`n` limits of the extreme block sizes, the small-deviation root
//! `rho_r`, and first-order asymptotics of generalized factorial
//! coefficients and Stirling numbers.
//!
//! Parameters follow [`GibbsModel::ewens_pitman`](crate::GibbsModel::ewens_pitman):
//! for `alpha < 0` the `theta` argument must equal `-m alpha`.

mod dirichlet;

pub use dirichlet::{dirichlet_mc_estimate, dirichlet_raw, incomplete_dirichlet, DirichletSpec, DEFAULT_TOL, MAX_NESTED_DIM};

use dirichlet::{dirichlet_or_zero, raw_or_zero};

use crate::dist::Extreme;
use crate::error::{GibbsError, Result};
use crate::models::{validate_ep, GnedinMixing};
use crate::numeric::{binomial, log_gamma_signed, Sign};
use crate::quad::adaptive;

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Sign carried by a magnitude: always positive, or `(-1)^(n + offset)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parity {
    Positive,
    Alternating { offset: u8 },
}

impl Parity {
    pub fn sign(self, n: u64) -> f64 {
        match self {
            Parity::Positive => 1.0,
            Parity::Alternating { offset } => {
                if (n + offset as u64).is_multiple_of(2) {
                    1.0
                } else {
                    -1.0
                }
            }
        }
    }

    fn flip(self) -> Parity {
        match self {
            Parity::Positive => Parity::Alternating { offset: 0 },
            Parity::Alternating { offset } => Parity::Alternating { offset: offset ^ 1 },
        }
    }
}

/// `coefficient * n^n_power * (ln n)^log_n_power`, times the parity sign.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AsymptoticForm {
    pub coefficient: f64,
    pub n_power: f64,
    pub log_n_power: f64,
    pub parity: Parity,
}

impl AsymptoticForm {
    pub fn new(coefficient: f64, n_power: f64) -> Self {
        AsymptoticForm { coefficient, n_power, log_n_power: 0.0, parity: Parity::Positive }
    }

    pub fn evaluate(&self, n: f64) -> f64 {
        let log_part = if self.log_n_power == 0.0 { 1.0 } else { n.ln().powf(self.log_n_power) };
        self.coefficient * n.powf(self.n_power) * log_part
    }

    /// `evaluate(n)` with the parity sign applied.
    pub fn signed(&self, n: u64) -> f64 {
        self.parity.sign(n) * self.evaluate(n as f64)
    }
}

/// Result of an asymptotic evaluator that may only know the order.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Asymptotic {
    Form(AsymptoticForm),
    /// `O(n^n_power)` with no known constant.
    Order { n_power: f64 },
    /// `(ln n)^(k-1) / ((k-1)! n Gamma(1 + (k-1)/ln n))`.
    Hwang { k: usize },
}

impl Asymptotic {
    pub fn evaluate(&self, n: f64) -> Option<f64> {
        match self {
            Asymptotic::Form(f) => Some(f.evaluate(n)),
            Asymptotic::Order { .. } => None,
            Asymptotic::Hwang { k } => Some(stirling1_hwang(n, *k)),
        }
    }

    pub fn form(&self) -> Option<&AsymptoticForm> {
        match self {
            Asymptotic::Form(f) => Some(f),
            _ => None,
        }
    }
}

/// Leading term plus an optional vanishing correction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TailAsymptotic {
    pub leading: AsymptoticForm,
    pub correction: Option<AsymptoticForm>,
}

impl TailAsymptotic {
    pub fn evaluate(&self, n: f64) -> f64 {
        self.leading.evaluate(n) + self.correction.map_or(0.0, |c| c.evaluate(n))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Regime {
    Zero,
    Positive,
    Negative { m: usize },
}

fn regime(alpha: f64, theta: f64) -> Result<Regime> {
    match validate_ep(alpha, theta)? {
        Some(m) => Ok(Regime::Negative { m }),
        None if alpha == 0.0 => Ok(Regime::Zero),
        None => Ok(Regime::Positive),
    }
}

fn check_x(x: f64) -> Result<()> {
    if !(x > 0.0 && x <= 1.0) {
        return Err(GibbsError::Param(format!("x must lie in (0, 1], got {x}")));
    }
    Ok(())
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !alpha.is_finite() || alpha >= 1.0 {
        return Err(GibbsError::Param(format!("alpha must be finite and below 1, got {alpha}")));
    }
    Ok(())
}

/// `floor(1/x)`, nudged so that `x = 1/k` in floating point still counts `k`.
fn floor_inv(x: f64) -> usize {
    (1.0 / x * (1.0 + 1e-12)).floor() as usize
}

fn ceil_inv(x: f64) -> usize {
    (1.0 / x * (1.0 - 1e-12)).ceil() as usize
}

fn ln_gamma(x: f64) -> Result<(Sign, f64)> {
    let g = log_gamma_signed(x)?;
    Ok((g.sign, g.log_mag))
}

fn gamma_val(x: f64) -> Result<f64> {
    Ok(log_gamma_signed(x)?.to_f64())
}

fn ln_factorial(k: usize) -> f64 {
    libm::lgamma(k as f64 + 1.0)
}

/// `p_alpha(1), ..., p_alpha(count)` with `p_alpha(j) = C(alpha, j) (-1)^(j+1)`.
fn sibuya_terms(alpha: f64, count: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(count);
    let mut p = alpha;
    for j in 1..=count {
        out.push(p);
        let jf = j as f64;
        p *= (jf - alpha) / (jf + 1.0);
    }
    out
}

/// Sibuya's law `p_alpha(j) = C(alpha, j) (-1)^(j+1)` for `0 < alpha < 1`.
pub fn sibuya_pmf(alpha: f64, j: usize) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(GibbsError::Param(format!("Sibuya's law needs 0 < alpha < 1, got {alpha}")));
    }
    if j == 0 {
        return Err(GibbsError::Param("Sibuya's law lives on j >= 1".into()));
    }
    Ok(sibuya_terms(alpha, j)[j - 1])
}

/// `h_r = 1 + 1/2 + ... + 1/r`, with `h_0 = 0`.
pub fn harmonic(r: usize) -> f64 {
    (1..=r).map(|k| 1.0 / k as f64).sum()
}

/// `P(smallest block >= r)` for fixed `r >= 2` as `n -> infinity`.
pub fn smallest_tail_asymp_ep(alpha: f64, theta: f64, r: usize) -> Result<TailAsymptotic> {
    let reg = regime(alpha, theta)?;
    if r < 2 {
        return Err(GibbsError::Param(format!("threshold r must be at least 2, got {r}")));
    }
    let partial: f64 = sibuya_terms(alpha, r - 1).iter().sum();
    Ok(match reg {
        Regime::Zero => TailAsymptotic {
            leading: AsymptoticForm::new((-theta * harmonic(r - 1)).exp(), 0.0),
            correction: None,
        },
        Regime::Positive => {
            let ln = libm::lgamma(1.0 + theta) - libm::lgamma(1.0 - alpha) - (1.0 + theta / alpha) * partial.ln();
            TailAsymptotic { leading: AsymptoticForm::new(ln.exp(), -theta - alpha), correction: None }
        }
        Regime::Negative { m } => {
            let correction = if m == 1 {
                None
            } else {
                let mf = m as f64;
                let c = mf * gamma_val(-mf * alpha)? / gamma_val((1.0 - mf) * alpha)? * partial;
                Some(AsymptoticForm::new(c, alpha))
            };
            TailAsymptotic { leading: AsymptoticForm::new(1.0, 0.0), correction }
        }
    })
}

/// The `r -> infinity` form `r^(-theta) e^(-gamma theta)` of the `alpha = 0` tail.
pub fn smallest_tail_large_r(theta: f64, r: usize) -> Result<AsymptoticForm> {
    if !(theta > 0.0) || r == 0 {
        return Err(GibbsError::Param(format!("need theta > 0 and r >= 1, got ({theta}, {r})")));
    }
    Ok(AsymptoticForm::new((r as f64).powf(-theta) * (-EULER_GAMMA * theta).exp(), 0.0))
}

/// Buchstab's function `omega_theta(x)`.
pub fn buchstab_omega(theta: f64, x: f64) -> Result<f64> {
    check_x(x)?;
    if !(theta > 0.0) || !theta.is_finite() {
        return Err(GibbsError::Param(format!("theta must be positive, got {theta}")));
    }
    let mut sum = 0.0;
    let mut ln_coef = 0.0;
    for k in 1..=floor_inv(x) {
        ln_coef += theta.ln() - (k as f64).ln();
        let i = dirichlet_or_zero(&DirichletSpec::new(k - 1, x, x, 0.0, 0.0))?;
        sum += ln_coef.exp() * i;
    }
    Ok(x.powf(theta) * sum)
}

/// `P(smallest block >= x n)` for fixed `x`.
pub fn smallest_large_dev(alpha: f64, theta: f64, x: f64) -> Result<Asymptotic> {
    let reg = regime(alpha, theta)?;
    check_x(x)?;
    Ok(match reg {
        Regime::Zero => {
            let c = gamma_val(theta)? * x.powf(-theta) * buchstab_omega(theta, x)?;
            Asymptotic::Form(AsymptoticForm::new(c, -theta))
        }
        Regime::Positive => {
            let c = (libm::lgamma(1.0 + theta) - libm::lgamma(1.0 - alpha)).exp();
            Asymptotic::Form(AsymptoticForm::new(c, -theta - alpha))
        }
        Regime::Negative { m } => {
            let top = floor_inv(x);
            if top >= m {
                let c = dirichlet_or_zero(&DirichletSpec::new(m - 1, x, x, -alpha, -alpha))?;
                Asymptotic::Form(AsymptoticForm::new(c, 0.0))
            } else {
                // Needs at most floor(1/x) < m blocks, whose probability decays
                // like n^((m - k) alpha).
                Asymptotic::Order { n_power: (m - top) as f64 * alpha }
            }
        }
    })
}

/// `P(smallest >= x n | k blocks)` at finite `n` from its limit display.
pub fn consistent_smallest_cond(alpha: f64, x: f64, k: usize, n: f64) -> Result<f64> {
    check_alpha(alpha)?;
    check_x(x)?;
    if k == 0 {
        return Err(GibbsError::Param("block count k must be at least 1".into()));
    }
    if !(n > 1.0) {
        return Err(GibbsError::Param(format!("n must exceed 1, got {n}")));
    }
    if k > floor_inv(x) {
        return Ok(0.0);
    }
    if k == 1 {
        return Ok(1.0);
    }
    let kf = k as f64;
    let b = k - 1;
    if alpha > 0.0 {
        // Gamma(-a)/Gamma(-k a) * I = J / Gamma(-a)^(k-1); no pole at integer k a.
        let j = raw_or_zero(&DirichletSpec::new(b, x, x, -alpha, -alpha))?;
        let (g_sign, g_ln) = ln_gamma(-alpha)?;
        let mut sign = if b.is_multiple_of(2) { 1.0 } else { -1.0 };
        if b % 2 == 1 && g_sign == Sign::Neg {
            sign = -sign;
        }
        Ok(sign * j / kf * (-(b as f64) * g_ln - b as f64 * alpha * n.ln()).exp())
    } else if alpha == 0.0 {
        let i = dirichlet_or_zero(&DirichletSpec::new(b, x, x, 0.0, 0.0))?;
        Ok(n.ln().powf(1.0 - kf) / kf * i)
    } else {
        dirichlet_or_zero(&DirichletSpec::new(b, x, x, -alpha, -alpha))
    }
}

/// `P(smallest >= x n)` for a consistent-weight model with
/// `n! v_{n,k} = f_k O(n^(1 - eta2(k)))`; `f_k` and `eta2` come from the model.
pub fn consistent_smallest_marginal(
    alpha: f64,
    fk: &dyn Fn(usize) -> f64,
    eta2: &dyn Fn(usize) -> f64,
    x: f64,
    n: f64,
) -> Result<f64> {
    check_alpha(alpha)?;
    check_x(x)?;
    if !(n > 1.0) {
        return Err(GibbsError::Param(format!("n must exceed 1, got {n}")));
    }
    let mut sum = 0.0;
    for k in 1..=floor_inv(x) {
        let f = fk(k);
        if f == 0.0 {
            continue;
        }
        let power = n.powf(-eta2(k) - k as f64 * alpha);
        let term = if alpha == 0.0 {
            let i = dirichlet_or_zero(&DirichletSpec::new(k - 1, x, x, 0.0, 0.0))?;
            (-ln_factorial(k)).exp() * i
        } else {
            // I / ((-a)^k Gamma(-k a)) = J / Gamma(1 - a)^k
            let j = raw_or_zero(&DirichletSpec::new(k - 1, x, x, -alpha, -alpha))?;
            (-ln_factorial(k) - k as f64 * libm::lgamma(1.0 - alpha)).exp() * j
        };
        sum += f * power * term;
    }
    Ok(sum)
}

/// Limit of `P(largest <= x n | k blocks)` for `alpha < 0`.
pub fn rho_tilde(alpha: f64, x: f64, k: usize) -> Result<f64> {
    if !(alpha < 0.0) || !alpha.is_finite() {
        return Err(GibbsError::Param(format!("rho_tilde needs alpha < 0, got {alpha}")));
    }
    if !(x > 0.0) {
        return Err(GibbsError::Param(format!("x must be positive, got {x}")));
    }
    if k == 0 {
        return Err(GibbsError::Param("block count k must be at least 1".into()));
    }
    if x >= 1.0 {
        return Ok(1.0);
    }
    if ceil_inv(x) > k {
        return Ok(0.0);
    }
    let mut sum = 0.0;
    for j in 0..k {
        if j as f64 * x >= 1.0 {
            break;
        }
        let c: f64 = binomial(k, j);
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        let rho = (k - j) as f64 * -alpha;
        sum += sign * c * dirichlet_or_zero(&DirichletSpec::new(j, x, 0.0, -alpha, rho))?;
    }
    Ok(sum)
}

/// Generalized Dickman function: the limit of `P(largest <= x n)`.
pub fn dickman_rho(alpha: f64, theta: f64, x: f64) -> Result<f64> {
    let reg = regime(alpha, theta)?;
    if !(x > 0.0) {
        return Err(GibbsError::Param(format!("x must be positive, got {x}")));
    }
    if x >= 1.0 {
        return Ok(1.0);
    }
    let top = floor_inv(x);
    match reg {
        Regime::Zero => {
            let mut sum = 1.0;
            let mut coef = 1.0;
            for k in 1..=top {
                coef *= -theta / k as f64;
                sum += coef * dirichlet_or_zero(&DirichletSpec::new(k, x, 0.0, 0.0, theta))?;
            }
            Ok(sum)
        }
        Regime::Positive => {
            // (theta)_{k;a} / (a^k k!) * Gamma(theta) / (Gamma(k a + theta) Gamma(-a)^k) * J,
            // with Gamma(theta) (theta)_{k;a} = Gamma(1 + theta) prod_{i<k} (theta + i a).
            let (g_sign, g_ln) = ln_gamma(-alpha)?;
            let mut sum = 1.0;
            let mut ln_prod = 0.0;
            for k in 1..=top {
                let kf = k as f64;
                if k > 1 {
                    ln_prod += (theta + (kf - 1.0) * alpha).ln();
                }
                let j = raw_or_zero(&DirichletSpec::new(k, x, 0.0, -alpha, kf * alpha + theta))?;
                let ln = libm::lgamma(1.0 + theta) + ln_prod
                    - kf * alpha.ln()
                    - ln_factorial(k)
                    - libm::lgamma(kf * alpha + theta)
                    - kf * g_ln;
                let sign = if k % 2 == 1 && g_sign == Sign::Neg { -1.0 } else { 1.0 };
                sum += sign * ln.exp() * j;
            }
            Ok(sum)
        }
        Regime::Negative { m } => {
            if ceil_inv(x) > m {
                return Ok(0.0);
            }
            let mut sum = 0.0;
            for k in 0..=top.min(m) {
                let c: f64 = binomial(m, k);
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                let rho = (m - k) as f64 * -alpha;
                sum += sign * c * dirichlet_or_zero(&DirichletSpec::new(k, x, 0.0, -alpha, rho))?;
            }
            Ok(sum)
        }
    }
}

/// Compensated (Neumaier) summation.
fn neumaier(terms: impl Iterator<Item = f64>) -> f64 {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for t in terms {
        let s = sum + t;
        if sum.abs() >= t.abs() {
            comp += (sum - s) + t;
        } else {
            comp += (t - s) + sum;
        }
        sum = s;
    }
    sum + comp
}

/// `f_r(xi) = sum_{j<=r} C(alpha, j) (-xi)^j` and its derivative.
pub fn f_r(alpha: f64, r: usize, xi: f64) -> (f64, f64) {
    let mut terms = Vec::with_capacity(r + 1);
    terms.push(1.0);
    let mut t = 1.0;
    for j in 1..=r {
        let jf = j as f64;
        t *= xi * (jf - 1.0 - alpha) / jf;
        terms.push(t);
    }
    let value = neumaier(terms.iter().copied());
    let deriv = neumaier(terms.iter().enumerate().skip(1).map(|(j, t)| j as f64 * t / xi));
    (value, deriv)
}

/// The positive root `rho_r > 1` of `f_r`.
pub fn rho_r_root(alpha: f64, r: usize) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(GibbsError::Param(format!("rho_r needs 0 < alpha < 1, got {alpha}")));
    }
    if r == 0 {
        return Err(GibbsError::Param("r must be at least 1".into()));
    }
    let (mut lo, mut hi) = (1.0, 2.0 / alpha);
    if f_r(alpha, r, lo).0 <= 0.0 || f_r(alpha, r, hi).0 >= 0.0 {
        return Err(GibbsError::Convergence(format!("f_r does not change sign on [1, {hi}]")));
    }
    let mut xi = 0.5 * (lo + hi);
    let mut width = hi - lo;
    for _ in 0..400 {
        let (f, d) = f_r(alpha, r, xi);
        if f.abs() <= 1e-13 {
            return Ok(xi);
        }
        if f > 0.0 {
            lo = xi;
        } else {
            hi = xi;
        }
        // Newton only while it at least halves the bracket; far right of the
        // root f_r grows like xi^r and Newton crawls.
        let newton = xi - f / d;
        let shrinking = hi - lo <= 0.5 * width;
        width = hi - lo;
        xi = if shrinking && d < 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if hi - lo <= 4.0 * f64::EPSILON * hi {
            break;
        }
    }
    let f = f_r(alpha, r, xi).0;
    if f.abs() <= 1e-12 {
        Ok(xi)
    } else {
        Err(GibbsError::Convergence(format!("|f_r(rho_r)| = {f:e} after bracketing")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SmallDevForm {
    ExactRoot,
    Limit,
}

/// `ln(Gamma(theta) / Gamma(theta / alpha))`, equal to `-ln alpha` at `theta = 0`.
fn ln_theta_ratio(alpha: f64, theta: f64) -> Result<f64> {
    if theta == 0.0 {
        return Ok(-alpha.ln());
    }
    let (s1, l1) = ln_gamma(theta)?;
    let (s2, l2) = ln_gamma(theta / alpha)?;
    if s1 != s2 {
        return Err(GibbsError::Param(format!("Gamma(theta)/Gamma(theta/alpha) is negative at ({alpha}, {theta})")));
    }
    Ok(l1 - l2)
}

/// `P(largest <= r)` for `r = o(n)`, `0 < alpha < 1`.
pub fn largest_small_dev(alpha: f64, theta: f64, n: usize, r: usize, form: SmallDevForm) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(GibbsError::Param(format!("small deviations need 0 < alpha < 1, got {alpha}")));
    }
    validate_ep(alpha, theta)?;
    if r == 0 || n == 0 {
        return Err(GibbsError::Param("n and r must be at least 1".into()));
    }
    let ratio = ln_theta_ratio(alpha, theta)?;
    let nf = n as f64;
    let shape = theta / alpha - theta;
    let ln = match form {
        SmallDevForm::ExactRoot => {
            let rho = rho_r_root(alpha, r)?;
            let (_, d) = f_r(alpha, r, rho);
            ratio - theta / alpha * (-rho * d).ln() - (nf + 1.0) * rho.ln() + shape * nf.ln()
        }
        SmallDevForm::Limit => {
            let rf = r as f64;
            ratio - theta / alpha * (alpha.ln() - libm::lgamma(2.0 - alpha)) - (1.0 - alpha) * nf / (alpha * rf)
                + shape * (nf / rf).ln()
        }
    };
    Ok(ln.exp())
}

/// Largest cutoff `K` tried when truncating `∫_0^1 x^(i-1) rho(x) dx` at `1/K`.
const MOMENT_MAX_CUT: usize = 7;

/// Limit of `E[(X/n)^i]` for the largest or smallest block size `X`.
pub fn moment_limits(alpha: f64, theta: f64, which: Extreme, i: usize, quad_tol: f64) -> Result<f64> {
    let reg = regime(alpha, theta)?;
    if i == 0 {
        return Err(GibbsError::Param("moment order must be at least 1".into()));
    }
    if !(quad_tol > 0.0) {
        return Err(GibbsError::Param(format!("quad_tol must be positive, got {quad_tol}")));
    }
    let fi = i as f64;
    let pow = |x: f64| x.powi(i as i32 - 1);
    let mut failure: Option<GibbsError> = None;
    match which {
        Extreme::Smallest => {
            let Regime::Negative { m } = reg else {
                return Err(GibbsError::Param("smallest-size moments have a non-degenerate limit only for alpha < 0".into()));
            };
            if m == 1 {
                return Ok(1.0);
            }
            let inner_tol = quad_tol * 1e-2;
            let q = adaptive(
                |x| {
                    if failure.is_some() || x <= 0.0 {
                        return 0.0;
                    }
                    let spec = DirichletSpec::new(m - 1, x, x, -alpha, -alpha).with_tol(inner_tol);
                    match dirichlet_or_zero(&spec) {
                        Ok(v) => pow(x) * v,
                        Err(e) => {
                            failure = Some(e);
                            0.0
                        }
                    }
                },
                0.0,
                1.0 / m as f64,
                quad_tol / fi,
                0.0,
            );
            if let Some(e) = failure {
                return Err(e);
            }
            if q.error > quad_tol / fi {
                return Err(GibbsError::ToleranceNotMet { estimate: fi * q.error, tol: quad_tol });
            }
            Ok(fi * q.value)
        }
        Extreme::Largest => {
            // rho vanishes below 1/m for alpha < 0; otherwise cut where the
            // neglected mass rho(1/K) K^-i falls below half the tolerance.
            let cut = match reg {
                Regime::Negative { m } => m,
                _ => {
                    let mut found = None;
                    for k in 2..=MOMENT_MAX_CUT {
                        let tail = dickman_rho(alpha, theta, 1.0 / k as f64)? * (k as f64).powi(-(i as i32));
                        if tail <= quad_tol / 2.0 {
                            found = Some(k);
                            break;
                        }
                    }
                    match found {
                        Some(k) => k,
                        None => {
                            let k = MOMENT_MAX_CUT as f64;
                            let tail = dickman_rho(alpha, theta, 1.0 / k)? * k.powi(-(i as i32));
                            return Err(GibbsError::ToleranceNotMet { estimate: tail, tol: quad_tol });
                        }
                    }
                }
            };
            let piece_tol = quad_tol / (2.0 * fi * cut as f64);
            let mut total = 0.0;
            for k in 1..cut {
                let (a, b) = (1.0 / (k + 1) as f64, 1.0 / k as f64);
                let q = adaptive(
                    |x| {
                        if failure.is_some() {
                            return 0.0;
                        }
                        match dickman_rho(alpha, theta, x) {
                            Ok(v) => pow(x) * v,
                            Err(e) => {
                                failure = Some(e);
                                0.0
                            }
                        }
                    },
                    a,
                    b,
                    piece_tol,
                    0.0,
                );
                if let Some(e) = failure.take() {
                    return Err(e);
                }
                if q.error > piece_tol {
                    return Err(GibbsError::ToleranceNotMet { estimate: q.error, tol: piece_tol });
                }
                total += q.value;
            }
            Ok(1.0 - fi * total)
        }
    }
}

/// Limits for Gnedin's partition, which mixes `alpha = -1` laws over `M` blocks.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GnedinQuery {
    SmallestTail(f64),
    SmallestMoment(usize),
    LargestCdf(f64),
    LargestMoment(usize),
}

const GNEDIN_TOL: f64 = 1e-10;
const GNEDIN_MAX_TERMS: usize = 2_000_000;

/// `P(max of m uniform spacings <= x)`.
fn uniform_spacing_max_cdf(m: usize, x: f64) -> f64 {
    if x >= 1.0 {
        return 1.0;
    }
    if ceil_inv(x) > m {
        return 0.0;
    }
    1.0 - uniform_spacing_max_tail(m, x)
}

/// `P(max of m uniform spacings > x)` by inclusion-exclusion.
fn uniform_spacing_max_tail(m: usize, x: f64) -> f64 {
    let mut terms = Vec::new();
    let mut c = 1.0;
    for k in 1..=m {
        c *= (m - k + 1) as f64 / k as f64;
        let base = 1.0 - k as f64 * x;
        if base <= 0.0 {
            break;
        }
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        terms.push(sign * c * base.powi(m as i32 - 1));
    }
    neumaier(terms.into_iter()).clamp(0.0, 1.0)
}

/// `E[L^j]` for the largest of `m` uniform spacings, for successive `m`.
///
/// By the Renyi representation `L = (sum_i E_i / i) / S`, with `S ~ Gamma(m)`
/// independent of the spacings, so `E[L^j] = E[(sum_i E_i/i)^j] / (m)_j`. The
/// power sums `sum_{i<=m} i^-r` are carried from one `m` to the next.
struct SpacingMaxMoments {
    m: usize,
    j: usize,
    power_sums: Vec<f64>,
}

impl SpacingMaxMoments {
    fn new(j: usize) -> Self {
        SpacingMaxMoments { m: 0, j, power_sums: vec![0.0; j + 1] }
    }

    /// Moves to `m + 1` spacings and returns the moment there.
    fn next_moment(&mut self) -> f64 {
        self.m += 1;
        let mf = self.m as f64;
        for (r, s) in self.power_sums.iter_mut().enumerate().skip(1) {
            *s += mf.powi(-(r as i32));
        }
        // cumulants kappa_r = (r-1)! sum_i i^-r; moments by the recursion
        // mu_r = sum_{s<r} C(r-1, s) kappa_{r-s} mu_s.
        let j = self.j;
        let mut kappa = vec![0.0; j + 1];
        let mut fact = 1.0;
        for r in 1..=j {
            if r > 1 {
                fact *= (r - 1) as f64;
            }
            kappa[r] = fact * self.power_sums[r];
        }
        let mut mu = vec![1.0; j + 1];
        for r in 1..=j {
            let mut acc = 0.0;
            for s in 0..r {
                let c: f64 = binomial(r - 1, s);
                acc += c * kappa[r - s] * mu[s];
            }
            mu[r] = acc;
        }
        let rising: f64 = (0..j).map(|t| (self.m + t) as f64).product();
        mu[j] / rising
    }
}

pub fn gnedin_asymp(gamma: f64, zeta: f64, query: GnedinQuery) -> Result<f64> {
    let mix = GnedinMixing::new(gamma, zeta)?;
    match query {
        GnedinQuery::SmallestTail(x) => {
            check_x(x)?;
            let top = floor_inv(x);
            let pmf = mix.pmf_prefix(top);
            Ok((1..=top).map(|m| pmf[m] * (1.0 - m as f64 * x).max(0.0).powi(m as i32 - 1)).sum())
        }
        GnedinQuery::SmallestMoment(j) => {
            if j == 0 {
                return Err(GibbsError::Param("moment order must be at least 1".into()));
            }
            // E[M^-j / C(M + j - 1, j)]; terms decrease in m, so the unsummed
            // mass times the current factor bounds the tail.
            let factor = |m: usize| {
                let c: f64 = binomial(m + j - 1, j);
                (m as f64).powi(-(j as i32)) / c
            };
            let (mut sum, mut mass) = (0.0, 0.0);
            for (idx, p) in mix.pmf_iter().enumerate().take(GNEDIN_MAX_TERMS) {
                let m = idx + 1;
                let f = factor(m);
                sum += p * f;
                mass += p;
                if (1.0 - mass).max(0.0) * f < GNEDIN_TOL {
                    return Ok(sum);
                }
            }
            Err(GibbsError::NonConvergence(format!("Gnedin smallest moment after {GNEDIN_MAX_TERMS} terms")))
        }
        GnedinQuery::LargestCdf(x) => {
            if !(x > 0.0) {
                return Err(GibbsError::Param(format!("x must be positive, got {x}")));
            }
            if x >= 1.0 {
                return Ok(1.0);
            }
            // 1 - sum_m P(M = m) P(max spacing > x); the spacing tail decays
            // geometrically once P(M = m) is decreasing.
            let mut miss = 0.0;
            let decreasing_from = (zeta / (1.0 + gamma)).ceil().max(1.0) as usize;
            for (idx, p) in mix.pmf_iter().enumerate().take(GNEDIN_MAX_TERMS) {
                let m = idx + 1;
                miss += p * (1.0 - uniform_spacing_max_cdf(m, x));
                if m >= decreasing_from && m as f64 * x > 1.0 {
                    let mf = m as f64;
                    let g = (1.0 - x).powi(m as i32);
                    let bound = p * ((mf + 1.0) * g / x + (1.0 - x) * g / (x * x));
                    if bound < GNEDIN_TOL {
                        return Ok((1.0 - miss).clamp(0.0, 1.0));
                    }
                }
            }
            Err(GibbsError::NonConvergence(format!("Gnedin largest cdf after {GNEDIN_MAX_TERMS} terms")))
        }
        GnedinQuery::LargestMoment(j) => {
            if j == 0 {
                return Err(GibbsError::Param("moment order must be at least 1".into()));
            }
            let (mut sum, mut mass) = (0.0, 0.0);
            let mut moments = SpacingMaxMoments::new(j);
            for p in mix.pmf_iter().take(GNEDIN_MAX_TERMS) {
                let f = moments.next_moment();
                sum += p * f;
                mass += p;
                if (1.0 - mass).max(0.0) * f < GNEDIN_TOL {
                    return Ok(sum);
                }
            }
            Err(GibbsError::NonConvergence(format!("Gnedin largest moment after {GNEDIN_MAX_TERMS} terms")))
        }
    }
}

/// Regimes for [`special_number_asymp`]; `x` is the limit of `r / n`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SpecialAsympKind {
    GfcFixedK { alpha: f64, k: usize },
    GfcAssoc { alpha: f64, k: usize, x: f64 },
    Stirling1Assoc { k: usize, x: f64 },
    Stirling1Hwang { k: usize },
}

/// First-order asymptotics of `C(n,k;alpha)/n!`, `C_r(n,k;alpha)/n!`,
/// `|s_r(n,k)|/n!` and `|s(n,k)|/n!`. Magnitudes; signs sit in the parity.
pub fn special_number_asymp(kind: SpecialAsympKind) -> Result<Asymptotic> {
    match kind {
        SpecialAsympKind::GfcFixedK { alpha, k } => {
            if k == 0 || !alpha.is_finite() || alpha == 0.0 {
                return Err(GibbsError::Param(format!("need k >= 1 and alpha != 0, got ({alpha}, {k})")));
            }
            if alpha > 0.0 {
                let (g_sign, g_ln) = ln_gamma(-alpha)?;
                let c = (-g_ln - ln_factorial(k - 1)).exp();
                // (-1)^(n + k - 1) sgn Gamma(-alpha)
                let mut parity = Parity::Alternating { offset: ((k - 1) % 2) as u8 };
                if g_sign == Sign::Neg {
                    parity = parity.flip();
                }
                Ok(Asymptotic::Form(AsymptoticForm { coefficient: c, n_power: -1.0 - alpha, log_n_power: 0.0, parity }))
            } else {
                let kf = k as f64;
                let c = (-libm::lgamma(-kf * alpha) - ln_factorial(k)).exp();
                Ok(Asymptotic::Form(AsymptoticForm {
                    coefficient: c,
                    n_power: -1.0 - kf * alpha,
                    log_n_power: 0.0,
                    parity: Parity::Alternating { offset: 0 },
                }))
            }
        }
        SpecialAsympKind::GfcAssoc { alpha, k, x } => {
            check_x(x)?;
            if k == 0 || !alpha.is_finite() || alpha == 0.0 || alpha >= 1.0 {
                return Err(GibbsError::Param(format!("need k >= 1 and alpha in (-inf, 1) \\ {{0}}, got ({alpha}, {k})")));
            }
            let kf = k as f64;
            let inv = 1.0 / x;
            if (inv - kf).abs() <= 1e-12 * kf {
                return Ok(Asymptotic::Order { n_power: -kf * (1.0 + alpha) });
            }
            if kf > inv {
                return Ok(Asymptotic::Form(AsymptoticForm::new(0.0, -1.0 - kf * alpha)));
            }
            // I / (Gamma(-k a) k!) = J / (k! Gamma(-a)^k)
            let j = raw_or_zero(&DirichletSpec::new(k - 1, x, x, -alpha, -alpha))?;
            let (g_sign, g_ln) = ln_gamma(-alpha)?;
            let c = (-ln_factorial(k) - kf * g_ln).exp() * j;
            let mut parity = Parity::Alternating { offset: 0 };
            if g_sign == Sign::Neg && k % 2 == 1 {
                parity = parity.flip();
            }
            Ok(Asymptotic::Form(AsymptoticForm { coefficient: c, n_power: -1.0 - kf * alpha, log_n_power: 0.0, parity }))
        }
        SpecialAsympKind::Stirling1Assoc { k, x } => {
            check_x(x)?;
            if k == 0 {
                return Err(GibbsError::Param("k must be at least 1".into()));
            }
            let kf = k as f64;
            let inv = 1.0 / x;
            if (inv - kf).abs() <= 1e-12 * kf {
                return Ok(Asymptotic::Order { n_power: -kf });
            }
            if kf > inv {
                return Ok(Asymptotic::Form(AsymptoticForm::new(0.0, -1.0)));
            }
            let i = dirichlet_or_zero(&DirichletSpec::new(k - 1, x, x, 0.0, 0.0))?;
            Ok(Asymptotic::Form(AsymptoticForm::new(i * (-ln_factorial(k)).exp(), -1.0)))
        }
        SpecialAsympKind::Stirling1Hwang { k } => {
            if k == 0 {
                return Err(GibbsError::Param("k must be at least 1".into()));
            }
            Ok(Asymptotic::Hwang { k })
        }
    }
}

/// `(ln n)^(k-1) / ((k-1)! n) / Gamma(1 + (k-1)/ln n)`, for `|s(n,k)|/n!`.
pub fn stirling1_hwang(n: f64, k: usize) -> f64 {
    let ln_n = n.ln();
    let km1 = (k - 1) as f64;
    (km1 * ln_n.ln() - ln_factorial(k - 1) - ln_n - libm::lgamma(1.0 + km1 / ln_n)).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn sibuya_and_harmonic() {
        assert_eq!(sibuya_pmf(0.5, 1).unwrap(), 0.5);
        assert!(close(sibuya_pmf(0.5, 2).unwrap(), 0.125, 1e-15));
        assert_eq!(harmonic(0), 0.0);
        let total: f64 = sibuya_terms(0.8, 200_000).iter().sum();
        assert!(close(total, 1.0, 1e-3));
        assert!(sibuya_pmf(1.2, 1).is_err());
    }

    #[test]
    fn tail_examples() {
        let t = smallest_tail_asymp_ep(0.0, 1.0, 2).unwrap();
        assert!(close(t.leading.coefficient, (-1f64).exp(), 1e-15));
        let t = smallest_tail_asymp_ep(0.5, 1.0, 2).unwrap();
        assert!(close(t.leading.coefficient, 4.5135, 1e-4) && t.leading.n_power == -1.5);
        let t = smallest_tail_asymp_ep(-0.5, 1.0, 2).unwrap();
        let c = t.correction.unwrap();
        assert!(close(c.coefficient, -0.5642, 1e-4) && c.n_power == -0.5);
    }

    #[test]
    fn buchstab_and_dickman() {
        assert!(close(buchstab_omega(1.0, 0.4).unwrap(), 0.4 * (1.0 + 1.5f64.ln()), 1e-8));
        assert!(close(buchstab_omega(2.0, 0.7).unwrap(), 2.0 * 0.49, 1e-12));
        assert!(close(dickman_rho(0.0, 1.0, 0.5).unwrap(), 1.0 - 2f64.ln(), 1e-8));
        assert!(close(dickman_rho(-1.0, 2.0, 0.6).unwrap(), 0.2, 1e-8));
        assert_eq!(dickman_rho(0.5, 1.0, 1.3).unwrap(), 1.0);
        assert!(close(rho_tilde(-1.0, 0.6, 2).unwrap(), 0.2, 1e-8));
        assert_eq!(rho_tilde(-1.0, 0.3, 2).unwrap(), 0.0);
    }

    #[test]
    fn conditional_smallest() {
        assert!(close(consistent_smallest_cond(-1.0, 0.3, 2, 100.0).unwrap(), 0.4, 1e-8));
        assert_eq!(consistent_smallest_cond(0.5, 0.4, 3, 100.0).unwrap(), 0.0);
        assert_eq!(consistent_smallest_cond(0.3, 0.4, 1, 100.0).unwrap(), 1.0);
    }

    #[test]
    fn root_examples() {
        assert!(close(rho_r_root(0.5, 1).unwrap(), 2.0, 1e-12));
        for r in [2, 10, 100, 10_000] {
            let rho = rho_r_root(0.3, r).unwrap();
            assert!(f_r(0.3, r, rho).0.abs() <= 1e-12);
        }
    }

    #[test]
    fn moment_examples() {
        assert!(close(moment_limits(-1.0, 2.0, Extreme::Smallest, 1, 1e-8).unwrap(), 0.25, 1e-7));
        assert!(close(moment_limits(-1.0, 2.0, Extreme::Largest, 1, 1e-8).unwrap(), 0.75, 1e-7));
        assert_eq!(moment_limits(-0.5, 0.5, Extreme::Smallest, 3, 1e-8).unwrap(), 1.0);
    }

    #[test]
    fn special_examples() {
        let a = special_number_asymp(SpecialAsympKind::GfcFixedK { alpha: -1.0, k: 2 }).unwrap();
        let f = a.form().unwrap();
        assert!(close(f.coefficient, 0.5, 1e-15) && f.n_power == 1.0);
        let a = special_number_asymp(SpecialAsympKind::Stirling1Assoc { k: 2, x: 0.25 }).unwrap();
        let f = a.form().unwrap();
        assert!(close(f.coefficient, 3f64.ln(), 1e-8) && f.n_power == -1.0);
        let a = special_number_asymp(SpecialAsympKind::GfcAssoc { alpha: 0.5, k: 3, x: 1.0 / 3.0 }).unwrap();
        assert!(matches!(a, Asymptotic::Order { .. }));
    }

    #[test]
    fn gnedin_examples() {
        let mix = GnedinMixing::new(1.0, 1.0).unwrap();
        assert!(close(gnedin_asymp(1.0, 1.0, GnedinQuery::SmallestTail(0.7)).unwrap(), mix.pmf(1), 1e-15));
        assert_eq!(gnedin_asymp(1.0, 1.0, GnedinQuery::LargestCdf(1.0)).unwrap(), 1.0);
        // two uniform spacings: E max = 3/4
        let mut first = SpacingMaxMoments::new(1);
        let got: Vec<f64> = (0..3).map(|_| first.next_moment()).collect();
        assert!(close(got[0], 1.0, 1e-15) && close(got[1], 0.75, 1e-15) && close(got[2], 11.0 / 18.0, 1e-15));
        // E max(U, 1-U)^2 = 7/12
        let mut second = SpacingMaxMoments::new(2);
        second.next_moment();
        assert!(close(second.next_moment(), 7.0 / 12.0, 1e-15));
    }
}
