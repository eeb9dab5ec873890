//! Gibbs partition models: block weights `w_j`, count weights `v_{n,k}` and
//! the EPPF.

use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use num_rational::BigRational;

use crate::error::{GibbsError, Result};
use crate::numeric::{
    is_simple_rational, log_gamma_signed, rational_from_f64, Exact, ExtVal, LogF64, Precision,
    Scalar, Sign, EXACT_N_CAP,
};

pub type WeightFn = Arc<dyn Fn(usize) -> ExtVal + Send + Sync>;
pub type CountWeightFn = Arc<dyn Fn(usize, usize) -> ExtVal + Send + Sync>;

static NEXT_CUSTOM_ID: AtomicU64 = AtomicU64::new(1);

fn next_id() -> u64 {
    NEXT_CUSTOM_ID.fetch_add(1, Ordering::Relaxed)
}

/// Hashable identity of a weight sequence, used as a table cache key.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum WeightKey {
    Consistent(u64),
    Falling(u64),
    Custom(u64),
}

/// A block-weight sequence `j -> w_j`, `j >= 1`.
#[derive(Clone)]
pub enum Weights {
    /// `(1 - alpha)_{j-1}`.
    Consistent { alpha: f64 },
    /// `[alpha]_j`, the generalized factorial coefficient weights.
    Falling { alpha: f64 },
    Custom { id: u64, rational: bool, f: WeightFn },
}

impl fmt::Debug for Weights {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Weights::Consistent { alpha } => write!(f, "Consistent({alpha})"),
            Weights::Falling { alpha } => write!(f, "Falling({alpha})"),
            Weights::Custom { id, .. } => write!(f, "Custom(#{id})"),
        }
    }
}

impl Weights {
    /// `(·-1)!`, whose Bell polynomials are the signless Stirling numbers.
    pub fn factorial() -> Self {
        Weights::Consistent { alpha: 0.0 }
    }

    pub fn custom(f: impl Fn(usize) -> ExtVal + Send + Sync + 'static) -> Self {
        Weights::Custom { id: next_id(), rational: false, f: Arc::new(f) }
    }

    /// Finite list `w_1, w_2, ...`; entries past the end are zero.
    pub fn from_values(values: Vec<f64>) -> Self {
        let rational = values.iter().all(|x| is_simple_rational(*x));
        let f = move |j: usize| match values.get(j.wrapping_sub(1)) {
            Some(&x) => match rational_from_f64(x) {
                Some(r) => ExtVal::exact(r),
                None => ExtVal::from_f64(x),
            },
            None => ExtVal::exact(BigRational::from_integer(0.into())),
        };
        Weights::Custom { id: next_id(), rational, f: Arc::new(f) }
    }

    pub fn key(&self) -> WeightKey {
        match self {
            Weights::Consistent { alpha } => WeightKey::Consistent(alpha.to_bits()),
            Weights::Falling { alpha } => WeightKey::Falling(alpha.to_bits()),
            Weights::Custom { id, .. } => WeightKey::Custom(*id),
        }
    }

    pub fn is_rational(&self) -> bool {
        match self {
            Weights::Consistent { alpha } | Weights::Falling { alpha } => is_simple_rational(*alpha),
            Weights::Custom { rational, .. } => *rational,
        }
    }

    /// `w_0 .. w_{n_max}` with `w_0 = 0`.
    pub fn values<S: Scalar>(&self, n_max: usize) -> Vec<S> {
        let mut out = Vec::with_capacity(n_max + 1);
        out.push(S::zero());
        match self {
            Weights::Consistent { alpha } => {
                let a = S::from_f64(*alpha);
                let mut w = S::one();
                for j in 1..=n_max {
                    if j > 1 {
                        w = w * (S::from_usize(j - 1) - a.clone());
                    }
                    out.push(w.clone());
                }
            }
            Weights::Falling { alpha } => {
                let a = S::from_f64(*alpha);
                let mut w = S::one();
                for j in 1..=n_max {
                    w = w * (a.clone() - S::from_usize(j - 1));
                    out.push(w.clone());
                }
            }
            Weights::Custom { f, .. } => {
                for j in 1..=n_max {
                    out.push(S::from_ext(&f(j)));
                }
            }
        }
        out
    }

    pub fn get<S: Scalar>(&self, j: usize) -> S {
        match self {
            Weights::Custom { f, .. } => S::from_ext(&f(j)),
            _ => self.values::<S>(j).pop().unwrap(),
        }
    }
}

/// `j -> (1 - alpha)_{j-1}`.
pub fn consistent_weights(alpha: f64) -> Result<Weights> {
    if !(alpha < 1.0) || !alpha.is_finite() {
        return Err(GibbsError::Param(format!("consistent weights need alpha < 1, got {alpha}")));
    }
    Ok(Weights::Consistent { alpha })
}

#[derive(Clone)]
pub enum ModelKind {
    EwensPitman { alpha: f64, theta: f64, m: Option<usize> },
    Gnedin { gamma: f64, zeta: f64 },
    ConsistentCustomV { alpha: f64, v: CountWeightFn },
    Custom { v: CountWeightFn, max_n: Option<usize> },
}

/// A Gibbs partition model `(w, v)`.
#[derive(Clone)]
pub struct GibbsModel {
    pub kind: ModelKind,
    weights: Weights,
    rational: bool,
}

impl fmt::Debug for GibbsModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ModelKind::EwensPitman { alpha, theta, .. } => write!(f, "EwensPitman(alpha={alpha}, theta={theta})"),
            ModelKind::Gnedin { gamma, zeta } => write!(f, "Gnedin(gamma={gamma}, zeta={zeta})"),
            ModelKind::ConsistentCustomV { alpha, .. } => write!(f, "ConsistentCustomV(alpha={alpha})"),
            ModelKind::Custom { .. } => write!(f, "Custom({:?})", self.weights),
        }
    }
}

/// Recovers the integer `m` in `theta = -m alpha` for `alpha < 0`.
fn ep_block_cap(alpha: f64, theta: f64) -> Option<usize> {
    let m = -theta / alpha;
    let r = m.round();
    if r >= 1.0 && (m - r).abs() <= 1e-12 * r.max(1.0) {
        Some(r as usize)
    } else {
        None
    }
}

pub fn validate_ep(alpha: f64, theta: f64) -> Result<Option<usize>> {
    if !alpha.is_finite() || !theta.is_finite() || alpha >= 1.0 {
        return Err(GibbsError::Param(format!("Ewens-Pitman needs alpha < 1, got ({alpha}, {theta})")));
    }
    if alpha >= 0.0 {
        if theta > -alpha {
            Ok(None)
        } else {
            Err(GibbsError::Param(format!("Ewens-Pitman with alpha >= 0 needs theta > -alpha, got ({alpha}, {theta})")))
        }
    } else {
        match ep_block_cap(alpha, theta) {
            Some(m) => Ok(Some(m)),
            None => Err(GibbsError::Param(format!(
                "Ewens-Pitman with alpha < 0 needs theta = -m alpha for a positive integer m, got ({alpha}, {theta})"
            ))),
        }
    }
}

pub fn validate_gnedin(gamma: f64, zeta: f64) -> Result<()> {
    if !gamma.is_finite() || !zeta.is_finite() || gamma < 0.0 {
        return Err(GibbsError::Param(format!("Gnedin needs gamma >= 0, got {gamma}")));
    }
    // j^2 - gamma j + zeta is minimised over the integers next to gamma/2.
    let c = (gamma / 2.0).floor().max(1.0);
    for j in [1.0, c, c + 1.0] {
        if j * j - gamma * j + zeta <= 0.0 {
            return Err(GibbsError::Param(format!(
                "Gnedin needs j^2 - gamma j + zeta > 0 for all j >= 1; fails at j = {j} for ({gamma}, {zeta})"
            )));
        }
    }
    Ok(())
}

impl GibbsModel {
    pub fn ewens_pitman(alpha: f64, theta: f64) -> Result<Self> {
        let m = validate_ep(alpha, theta)?;
        Ok(GibbsModel {
            kind: ModelKind::EwensPitman { alpha, theta, m },
            weights: Weights::Consistent { alpha },
            rational: is_simple_rational(alpha) && is_simple_rational(theta),
        })
    }

    pub fn gnedin(gamma: f64, zeta: f64) -> Result<Self> {
        validate_gnedin(gamma, zeta)?;
        Ok(GibbsModel {
            kind: ModelKind::Gnedin { gamma, zeta },
            weights: Weights::Consistent { alpha: -1.0 },
            rational: is_simple_rational(gamma) && is_simple_rational(zeta),
        })
    }

    pub fn consistent_custom_v(alpha: f64, v: impl Fn(usize, usize) -> ExtVal + Send + Sync + 'static) -> Result<Self> {
        let weights = consistent_weights(alpha)?;
        Ok(GibbsModel {
            kind: ModelKind::ConsistentCustomV { alpha, v: Arc::new(v) },
            weights,
            rational: false,
        })
    }

    pub fn custom(weights: Weights, v: impl Fn(usize, usize) -> ExtVal + Send + Sync + 'static) -> Self {
        GibbsModel { kind: ModelKind::Custom { v: Arc::new(v), max_n: None }, weights, rational: false }
    }

    /// Custom model from tables: `w[j-1] = w_j` and `v[n-1][k-1] = v_{n,k}`.
    pub fn custom_table(w: Vec<f64>, v: Vec<Vec<f64>>) -> Result<Self> {
        if w.is_empty() || v.is_empty() {
            return Err(GibbsError::Shape("custom model needs non-empty w and v".into()));
        }
        for (i, row) in v.iter().enumerate() {
            if row.len() < i + 1 {
                return Err(GibbsError::Shape(format!("v row {} has {} entries, expected {}", i + 1, row.len(), i + 1)));
            }
        }
        let max_n = v.len().min(w.len());
        let rational = w.iter().chain(v.iter().flatten()).all(|x| is_simple_rational(*x));
        let weights = Weights::from_values(w);
        let vf = move |n: usize, k: usize| {
            let x = v.get(n.wrapping_sub(1)).and_then(|row| row.get(k.wrapping_sub(1))).copied().unwrap_or(0.0);
            match rational_from_f64(x) {
                Some(r) => ExtVal::exact(r),
                None => ExtVal::from_f64(x),
            }
        };
        Ok(GibbsModel {
            kind: ModelKind::Custom { v: Arc::new(vf), max_n: Some(max_n) },
            weights: match weights {
                Weights::Custom { id, f, .. } => Weights::Custom { id, rational, f },
                other => other,
            },
            rational,
        })
    }

    pub fn weights(&self) -> &Weights {
        &self.weights
    }

    /// `alpha` of the consistent weights, when the model has them.
    pub fn alpha(&self) -> Option<f64> {
        match &self.kind {
            ModelKind::EwensPitman { alpha, .. } | ModelKind::ConsistentCustomV { alpha, .. } => Some(*alpha),
            ModelKind::Gnedin { .. } => Some(-1.0),
            ModelKind::Custom { .. } => None,
        }
    }

    pub fn is_rational(&self) -> bool {
        self.rational
    }

    /// Largest `n` the model is defined for.
    pub fn max_n(&self) -> Option<usize> {
        match &self.kind {
            ModelKind::Custom { max_n, .. } => *max_n,
            _ => None,
        }
    }

    pub fn check_n(&self, n: usize) -> Result<()> {
        if n == 0 {
            return Err(GibbsError::Range("n must be at least 1".into()));
        }
        if let Some(cap) = self.max_n() {
            if n > cap {
                return Err(GibbsError::Range(format!("custom model is defined up to n = {cap}, got {n}")));
            }
        }
        Ok(())
    }

    /// Whether computations at size `n` run in exact rationals.
    pub fn use_exact(&self, n: usize, precision: Precision) -> bool {
        match precision {
            Precision::Exact => true,
            Precision::Float => false,
            Precision::Auto => n <= EXACT_N_CAP && (self.rational || matches!(self.kind, ModelKind::Custom { .. })),
        }
    }

    pub fn v<S: Scalar>(&self, n: usize, k: usize) -> S {
        if k == 0 || k > n {
            return S::zero();
        }
        match &self.kind {
            ModelKind::ConsistentCustomV { v, .. } | ModelKind::Custom { v, .. } => S::from_ext(&v(n, k)),
            _ => self.v_row::<S>(n).swap_remove(k),
        }
    }

    /// `v_{n,0} .. v_{n,n}` with `v_{n,0} = 0`.
    pub fn v_row<S: Scalar>(&self, n: usize) -> Vec<S> {
        match &self.kind {
            ModelKind::EwensPitman { alpha, theta, m } => ep_v_row(n, *alpha, *theta, *m),
            ModelKind::Gnedin { gamma, zeta } => gnedin_v_row(n, *gamma, *zeta),
            ModelKind::ConsistentCustomV { v, .. } | ModelKind::Custom { v, .. } => {
                std::iter::once(S::zero()).chain((1..=n).map(|k| S::from_ext(&v(n, k)))).collect()
            }
        }
    }
}

/// `(theta)_{k;alpha} / (theta)_n` for `k = 0..=n`, with the common factor
/// `theta` cancelled so that `theta = 0` is allowed.
fn ep_v_row<S: Scalar>(n: usize, alpha: f64, theta: f64, m: Option<usize>) -> Vec<S> {
    let a = S::from_f64(alpha);
    let t = S::from_f64(theta);
    let mut denom = S::one();
    for i in 1..n {
        denom = denom * (t.clone() + S::from_usize(i));
    }
    let mut out = Vec::with_capacity(n + 1);
    out.push(S::zero());
    let mut num = S::one();
    for k in 1..=n {
        if k > 1 {
            let factor = match m {
                // theta + (k-1) alpha = (-alpha)(m - k + 1), exact at k = m + 1
                Some(m) => {
                    if k > m {
                        S::zero()
                    } else {
                        (-a.clone()) * S::from_usize(m + 1 - k)
                    }
                }
                None => t.clone() + a.clone() * S::from_usize(k - 1),
            };
            num = num * factor;
        }
        out.push(num.clone() / denom.clone());
    }
    out
}

fn gnedin_v_row<S: Scalar>(n: usize, gamma: f64, zeta: f64) -> Vec<S> {
    let g = S::from_f64(gamma);
    let z = S::from_f64(zeta);
    let quad = |j: usize, sign: f64| {
        let jj = S::from_usize(j);
        jj.clone() * jj.clone() + S::from_f64(sign) * g.clone() * jj + z.clone()
    };
    let mut denom = S::one();
    for j in 1..n {
        denom = denom * quad(j, 1.0);
    }
    let mut rise = Vec::with_capacity(n + 1);
    rise.push(S::one());
    for t in 1..=n {
        let next = rise[t - 1].clone() * (g.clone() + S::from_usize(t - 1));
        rise.push(next);
    }
    let mut out = Vec::with_capacity(n + 1);
    out.push(S::zero());
    let mut num = S::one();
    for k in 1..=n {
        if k > 1 {
            num = num * quad(k - 1, -1.0);
        }
        out.push(rise[n - k].clone() * num.clone() / denom.clone());
    }
    out
}

fn ext_of<S: Scalar>(exact: bool, f: impl Fn() -> Result<Vec<S>>, g: impl Fn() -> Result<Vec<LogF64>>) -> Result<Vec<ExtVal>>
where
    S: Scalar,
{
    if exact {
        Ok(f()?.iter().map(|x| x.to_ext()).collect())
    } else {
        Ok(g()?.iter().map(|x| x.to_ext()).collect())
    }
}

/// `v_{n,k}` of the Ewens-Pitman model.
pub fn ep_v(n: usize, k: usize, alpha: f64, theta: f64) -> Result<ExtVal> {
    let m = validate_ep(alpha, theta)?;
    if n == 0 || k == 0 || k > n {
        return Err(GibbsError::Range(format!("ep_v needs 1 <= k <= n, got n={n}, k={k}")));
    }
    let exact = is_simple_rational(alpha) && is_simple_rational(theta) && n <= 4 * EXACT_N_CAP;
    let row = ext_of::<Exact>(exact, || Ok(ep_v_row(n, alpha, theta, m)), || Ok(ep_v_row(n, alpha, theta, m)))?;
    Ok(row[k].clone())
}

/// `v_{n,k}` of Gnedin's model.
pub fn gnedin_v(n: usize, k: usize, gamma: f64, zeta: f64) -> Result<ExtVal> {
    validate_gnedin(gamma, zeta)?;
    if n == 0 || k == 0 || k > n {
        return Err(GibbsError::Range(format!("gnedin_v needs 1 <= k <= n, got n={n}, k={k}")));
    }
    let exact = is_simple_rational(gamma) && is_simple_rational(zeta) && n <= 4 * EXACT_N_CAP;
    let row = ext_of::<Exact>(exact, || Ok(gnedin_v_row(n, gamma, zeta)), || Ok(gnedin_v_row(n, gamma, zeta)))?;
    Ok(row[k].clone())
}

/// `ln |Gamma(x + i y)|` for `x > 0` using real arithmetic only.
fn ln_abs_gamma_complex(x: f64, y: f64) -> f64 {
    if y == 0.0 {
        return log_gamma_signed(x).map(|g| g.log_mag).unwrap_or(f64::INFINITY);
    }
    let mut shift = 0.0;
    let mut xr = x;
    while xr < 15.0 {
        shift += 0.5 * (xr * xr + y * y).ln();
        xr += 1.0;
    }
    let r2 = xr * xr + y * y;
    let arg = y.atan2(xr);
    let re_inv = xr / r2;
    let re_inv3 = (xr * xr * xr - 3.0 * xr * y * y) / (r2 * r2 * r2);
    let re_inv5 = (xr.powi(5) - 10.0 * xr.powi(3) * y * y + 5.0 * xr * y.powi(4)) / r2.powi(5);
    let stirling = (xr - 0.5) * 0.5 * r2.ln() - y * arg - xr + 0.5 * (2.0 * std::f64::consts::PI).ln()
        + re_inv / 12.0
        - re_inv3 / 360.0
        + re_inv5 / 1260.0;
    stirling - shift
}

/// Mixing law of the number of blocks `M` of Gnedin's partition,
/// `P(M = m) ∝ prod_{j<m} (j^2 - gamma j + zeta) / (m! (m-1)!)`.
#[derive(Clone, Debug)]
pub struct GnedinMixing {
    pub gamma: f64,
    pub zeta: f64,
    ln_norm: f64,
}

impl GnedinMixing {
    pub fn new(gamma: f64, zeta: f64) -> Result<Self> {
        validate_gnedin(gamma, zeta)?;
        if gamma == 0.0 {
            return Err(GibbsError::Param("gamma = 0 gives M = infinity almost surely; the block pmf does not exist".into()));
        }
        // Sum of prod_{1<=j<m}(j^2 - gamma j + zeta)/(m!(m-1)!) over m >= 1
        // equals Gamma(gamma) / (Gamma(1 + z1) Gamma(1 + z2)), z1 + z2 = gamma, z1 z2 = zeta.
        let disc = gamma * gamma - 4.0 * zeta;
        let ln_den = if disc >= 0.0 {
            let r = disc.sqrt();
            let z1 = 0.5 * (gamma + r);
            let z2 = 0.5 * (gamma - r);
            log_gamma_signed(1.0 + z1)?.log_mag + log_gamma_signed(1.0 + z2)?.log_mag
        } else {
            2.0 * ln_abs_gamma_complex(1.0 + 0.5 * gamma, 0.5 * (-disc).sqrt())
        };
        let ln_norm = log_gamma_signed(gamma)?.log_mag - ln_den;
        Ok(GnedinMixing { gamma, zeta, ln_norm })
    }

    /// Log of the unnormalised term for `m`, scaled by `1/zeta`.
    fn ln_term(&self, m: usize) -> f64 {
        let mut acc = 0.0;
        for j in 1..m {
            let jf = j as f64;
            acc += (jf * jf - self.gamma * jf + self.zeta).ln();
        }
        acc - crate::numeric::ln_factorials(m)[m] - crate::numeric::ln_factorials(m - 1)[m - 1]
    }

    pub fn pmf(&self, m: usize) -> f64 {
        if m == 0 {
            return 0.0;
        }
        (self.ln_term(m) - self.ln_norm).exp()
    }

    /// `P(M = 1), ..., P(M = m_max)` by the term-ratio recursion.
    pub fn pmf_prefix(&self, m_max: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(m_max + 1);
        out.push(0.0);
        out.extend(self.pmf_iter().take(m_max));
        out
    }

    /// `P(M = 1), P(M = 2), ...` without end.
    pub fn pmf_iter(&self) -> impl Iterator<Item = f64> + '_ {
        let mut ln_p = self.ln_term(1) - self.ln_norm;
        (1usize..).map(move |m| {
            let out = ln_p.exp();
            let mf = m as f64;
            ln_p += (mf * mf - self.gamma * mf + self.zeta).ln() - (mf * (mf + 1.0)).ln();
            out
        })
    }
}

/// `P(|Pi_inf| = m)` for Gnedin's partition.
///
/// The normaliser is evaluated in closed form, so `tail_tol` only bounds the
/// admissible truncation of callers that sum the pmf.
pub fn gnedin_block_pmf(m: usize, gamma: f64, zeta: f64, tail_tol: f64) -> Result<f64> {
    if !(tail_tol > 0.0) {
        return Err(GibbsError::Param(format!("tail_tol must be positive, got {tail_tol}")));
    }
    if m == 0 {
        return Err(GibbsError::Range("block count m must be at least 1".into()));
    }
    Ok(GnedinMixing::new(gamma, zeta)?.pmf(m))
}

/// Block sizes of one partition, in either of the two EPPF forms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Sizes {
    /// Block sizes in any order.
    Composition(Vec<usize>),
    /// `m_j` = number of blocks of size `j`; `n` is the vector length.
    Multiplicities(Vec<usize>),
}

pub fn eppf_in<S: Scalar>(model: &GibbsModel, sizes: &Sizes) -> Result<S> {
    match sizes {
        Sizes::Composition(parts) => {
            if parts.is_empty() || parts.contains(&0) {
                return Err(GibbsError::Shape("composition needs positive block sizes".into()));
            }
            let n: usize = parts.iter().sum();
            model.check_n(n)?;
            let w = model.weights().values::<S>(n);
            let mut acc = model.v::<S>(n, parts.len());
            for &p in parts {
                acc = acc * w[p].clone();
            }
            Ok(acc)
        }
        Sizes::Multiplicities(m) => {
            let n = m.len();
            let total: usize = m.iter().enumerate().map(|(i, c)| (i + 1) * c).sum();
            if total != n || n == 0 {
                return Err(GibbsError::Shape(format!("sum of j m_j is {total}, expected n = {n}")));
            }
            model.check_n(n)?;
            let k: usize = m.iter().sum();
            let w = model.weights().values::<S>(n);
            let fact = crate::numeric::factorials::<S>(n);
            let mut acc = fact[n].clone() * model.v::<S>(n, k);
            for (i, &c) in m.iter().enumerate() {
                let j = i + 1;
                for _ in 0..c {
                    acc = acc * w[j].clone() / fact[j].clone();
                }
                acc = acc / fact[c].clone();
            }
            Ok(acc)
        }
    }
}

/// EPPF value, computed exactly when the model allows it.
pub fn eppf(model: &GibbsModel, sizes: &Sizes) -> Result<ExtVal> {
    let n = match sizes {
        Sizes::Composition(p) => p.iter().sum(),
        Sizes::Multiplicities(m) => m.len(),
    };
    if model.use_exact(n, Precision::Auto) {
        Ok(eppf_in::<Exact>(model, sizes)?.to_ext())
    } else {
        Ok(eppf_in::<LogF64>(model, sizes)?.to_ext())
    }
}

/// Sign check used by samplers that need non-negative weights.
pub fn has_negative<S: Scalar>(xs: &[S]) -> bool {
    xs.iter().any(|x| x.sign() == Sign::Neg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(a: i64, b: i64) -> Exact {
        BigRational::new(a.into(), b.into())
    }

    #[test]
    fn consistent_weight_values() {
        let w = consistent_weights(0.5).unwrap().values::<Exact>(3);
        assert_eq!(w[1..].to_vec(), vec![q(1, 1), q(1, 2), q(3, 4)]);
        assert_eq!(consistent_weights(0.0).unwrap().get::<Exact>(4), q(6, 1));
        assert_eq!(consistent_weights(-1.0).unwrap().get::<Exact>(3), q(6, 1));
        assert!(consistent_weights(1.0).is_err());
    }

    #[test]
    fn ep_v_examples() {
        assert_eq!(ep_v(3, 2, 0.0, 1.0).unwrap().exact.unwrap(), q(1, 6));
        assert_eq!(ep_v(5, 1, 0.0, 1.0).unwrap().exact.unwrap(), q(1, 120));
        assert!(ep_v(5, 3, -0.5, 1.0).unwrap().is_zero());
        assert!(ep_v(3, 1, 0.5, -0.5).is_err());
        assert!(ep_v(3, 1, -0.5, 0.7).is_err());
        // theta = 0 is admissible for alpha > 0
        let v = ep_v(3, 2, 0.5, 0.0).unwrap().exact.unwrap();
        assert_eq!(v, q(1, 4));
    }

    #[test]
    fn gnedin_v_examples() {
        assert_eq!(gnedin_v(2, 1, 1.0, 1.0).unwrap().exact.unwrap(), q(1, 3));
        assert_eq!(gnedin_v(2, 2, 1.0, 1.0).unwrap().exact.unwrap(), q(1, 3));
        assert!(gnedin_v(5, 3, 0.0, 1.0).unwrap().is_zero());
        assert!(GibbsModel::gnedin(3.5, 3.0).is_err());
        assert!(GibbsModel::gnedin(3.5, 3.05).is_ok());
    }

    #[test]
    fn gnedin_pmf_ratio_and_mass() {
        let mix = GnedinMixing::new(1.0, 1.0).unwrap();
        assert!((mix.pmf(2) / mix.pmf(1) - 0.5).abs() < 1e-13);
        for m in 1..20 {
            let mf = m as f64;
            let ratio = mix.pmf(m + 1) / mix.pmf(m);
            assert!((ratio - (mf * mf - mf + 1.0) / (mf * (mf + 1.0))).abs() < 1e-12);
        }
        for (g, z) in [(1.0, 1.0), (2.0, 1.5), (0.5, 3.0), (3.5, 3.05), (0.3, -0.2)] {
            let mix = GnedinMixing::new(g, z).unwrap();
            let p = mix.pmf_prefix(200_000);
            let s: f64 = p.iter().sum();
            // tail beyond 2e5 decays like m^{-gamma}
            let tail_bound = 5.0 * (200_000f64).powf(-g);
            assert!((s - 1.0).abs() < tail_bound.max(1e-10), "({g},{z}): {s}");
            assert!(p[1..].iter().all(|x| *x > 0.0));
        }
        assert!(gnedin_block_pmf(1, 0.0, 1.0, 1e-10).is_err());
    }

    #[test]
    fn eppf_examples() {
        let ep = GibbsModel::ewens_pitman(0.0, 1.0).unwrap();
        let p = eppf(&ep, &Sizes::Composition(vec![1, 1, 1])).unwrap();
        assert_eq!(p.exact.unwrap(), q(1, 6));
        let g = GibbsModel::gnedin(1.0, 1.0).unwrap();
        let a = eppf(&g, &Sizes::Multiplicities(vec![0, 1])).unwrap().exact.unwrap();
        let b = eppf(&g, &Sizes::Multiplicities(vec![2, 0])).unwrap().exact.unwrap();
        assert_eq!(a.clone() + b, q(1, 1));
        assert_eq!(a, q(2, 3));
        assert!(matches!(eppf(&g, &Sizes::Multiplicities(vec![1, 1])), Err(GibbsError::Shape(_))));
    }

    #[test]
    fn custom_table_model() {
        // EP(0,1) at n <= 3 written out by hand
        let m = GibbsModel::custom_table(
            vec![1.0, 1.0, 2.0],
            vec![vec![1.0], vec![0.5, 0.5], vec![1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0]],
        )
        .unwrap();
        assert!(m.is_rational());
        let p = eppf(&m, &Sizes::Composition(vec![2, 1])).unwrap();
        assert_eq!(p.exact.unwrap(), q(1, 6));
        assert!(m.check_n(4).is_err());
        let row = m.v_row::<Exact>(3);
        assert_eq!(Scalar::to_f64(&row[2]), 1.0 / 6.0);
    }
}
