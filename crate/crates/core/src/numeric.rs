//! Scalar tower: native floats, signed log-space floats, exact rationals and
//! the tagged [`ExtVal`] that can carry either view.

use std::cmp::Ordering;
use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Float, One, Signed, ToPrimitive, Zero};

use crate::error::{GibbsError, Result};

/// Log-magnitudes closer than this are treated as a cancellation hazard.
pub const CANCELLATION_LOG_GAP: f64 = 1e-9;

/// Default largest `n` for which automatic precision picks exact rationals.
pub const EXACT_N_CAP: usize = 30;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Neg,
    Zero,
    Pos,
}

impl Sign {
    pub fn of_f64(x: f64) -> Sign {
        if x > 0.0 {
            Sign::Pos
        } else if x < 0.0 {
            Sign::Neg
        } else {
            Sign::Zero
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Neg => Sign::Pos,
            Sign::Pos => Sign::Neg,
            Sign::Zero => Sign::Zero,
        }
    }

    pub fn times(self, other: Sign) -> Sign {
        match (self, other) {
            (Sign::Zero, _) | (_, Sign::Zero) => Sign::Zero,
            (a, b) if a == b => Sign::Pos,
            _ => Sign::Neg,
        }
    }

    pub fn as_f64(self) -> f64 {
        match self {
            Sign::Neg => -1.0,
            Sign::Zero => 0.0,
            Sign::Pos => 1.0,
        }
    }
}

/// Which arithmetic backend a computation should run in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Precision {
    /// Exact rationals when every parameter is rational and `n` is at most
    /// [`EXACT_N_CAP`]; signed log-space `f64` otherwise.
    #[default]
    Auto,
    Float,
    Exact,
}

/// Number type the Bell tables and distributions are generic over.
pub trait Scalar:
    Clone
    + Debug
    + Send
    + Sync
    + 'static
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    const EXACT: bool;

    fn from_f64(x: f64) -> Self;

    fn from_ext(x: &ExtVal) -> Self;

    fn to_ext(&self) -> ExtVal;

    fn to_f64(&self) -> f64;

    fn sign(&self) -> Sign;

    /// Natural log of the absolute value; `-inf` for zero.
    fn ln_abs(&self) -> f64;

    fn from_usize(n: usize) -> Self {
        Self::from_f64(n as f64)
    }

    fn sum<I: IntoIterator<Item = Self>>(terms: I) -> Self {
        terms.into_iter().fold(Self::zero(), |acc, t| acc + t)
    }

    /// `sum_i a[i] * b[len - 1 - i]`; the slices must have equal length.
    fn dot_rev(a: &[Self], b: &[Self]) -> Self {
        a.iter().zip(b.iter().rev()).fold(Self::zero(), |acc, (x, y)| acc + x.clone() * y.clone())
    }
}

macro_rules! native_scalar {
    ($t:ty) => {
        impl Scalar for $t {
            const EXACT: bool = false;

            fn from_f64(x: f64) -> Self {
                x as $t
            }

            fn from_ext(x: &ExtVal) -> Self {
                x.to_f64() as $t
            }

            fn to_ext(&self) -> ExtVal {
                ExtVal::from_f64(*self as f64)
            }

            fn to_f64(&self) -> f64 {
                *self as f64
            }

            fn sign(&self) -> Sign {
                Sign::of_f64(*self as f64)
            }

            fn ln_abs(&self) -> f64 {
                (*self as f64).abs().ln()
            }
        }
    };
}

native_scalar!(f64);
native_scalar!(f32);

/// Signed number stored as `sign * exp(ln)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogFloat<F> {
    pub sign: Sign,
    pub ln: F,
}

pub type LogF64 = LogFloat<f64>;
pub type LogF32 = LogFloat<f32>;

impl<F: Float> LogFloat<F> {
    pub fn new(sign: Sign, ln: F) -> Self {
        if sign == Sign::Zero {
            Self::zero()
        } else {
            LogFloat { sign, ln }
        }
    }

    pub fn from_ln(ln: F) -> Self {
        if ln == F::neg_infinity() {
            Self::zero()
        } else {
            LogFloat { sign: Sign::Pos, ln }
        }
    }

    pub fn from_native(x: F) -> Self {
        if x > F::zero() {
            LogFloat { sign: Sign::Pos, ln: x.ln() }
        } else if x < F::zero() {
            LogFloat { sign: Sign::Neg, ln: (-x).ln() }
        } else {
            Self::zero()
        }
    }

    pub fn to_native(self) -> F {
        match self.sign {
            Sign::Zero => F::zero(),
            Sign::Pos => self.ln.exp(),
            Sign::Neg => -self.ln.exp(),
        }
    }

    pub fn powi(self, k: i32) -> Self {
        if k == 0 {
            return Self::one();
        }
        let sign = if k % 2 == 0 && self.sign == Sign::Neg { Sign::Pos } else { self.sign };
        Self::new(sign, self.ln * F::from(k).unwrap())
    }
}

impl<F: Float> Zero for LogFloat<F> {
    fn zero() -> Self {
        LogFloat { sign: Sign::Zero, ln: F::neg_infinity() }
    }

    fn is_zero(&self) -> bool {
        self.sign == Sign::Zero
    }
}

impl<F: Float> One for LogFloat<F> {
    fn one() -> Self {
        LogFloat { sign: Sign::Pos, ln: F::zero() }
    }
}

impl<F: Float> Neg for LogFloat<F> {
    type Output = Self;

    fn neg(self) -> Self {
        LogFloat { sign: self.sign.flip(), ln: self.ln }
    }
}

impl<F: Float> Add for LogFloat<F> {
    type Output = Self;

    fn add(self, rhs: Self) -> Self {
        if self.is_zero() {
            return rhs;
        }
        if rhs.is_zero() {
            return self;
        }
        let (big, small) = if self.ln >= rhs.ln { (self, rhs) } else { (rhs, self) };
        let d = (small.ln - big.ln).exp();
        if big.sign == small.sign {
            LogFloat { sign: big.sign, ln: big.ln + d.ln_1p() }
        } else if d >= F::one() {
            Self::zero()
        } else {
            LogFloat { sign: big.sign, ln: big.ln + (-d).ln_1p() }
        }
    }
}

impl<F: Float> Sub for LogFloat<F> {
    type Output = Self;

    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl<F: Float> Mul for LogFloat<F> {
    type Output = Self;

    fn mul(self, rhs: Self) -> Self {
        Self::new(self.sign.times(rhs.sign), self.ln + rhs.ln)
    }
}

impl<F: Float> Div for LogFloat<F> {
    type Output = Self;

    fn div(self, rhs: Self) -> Self {
        if rhs.is_zero() {
            return LogFloat { sign: Sign::Pos, ln: F::nan() };
        }
        Self::new(self.sign.times(rhs.sign), self.ln - rhs.ln)
    }
}

impl<F: Float + Debug + Send + Sync + 'static> Scalar for LogFloat<F> {
    const EXACT: bool = false;

    fn from_f64(x: f64) -> Self {
        let s = Sign::of_f64(x);
        Self::new(s, F::from(x.abs().ln()).unwrap())
    }

    fn from_ext(x: &ExtVal) -> Self {
        Self::new(x.sign, F::from(x.log_mag).unwrap())
    }

    fn to_ext(&self) -> ExtVal {
        ExtVal::from_parts(self.sign, self.ln.to_f64().unwrap())
    }

    fn to_f64(&self) -> f64 {
        self.sign.as_f64() * self.ln.to_f64().unwrap().exp()
    }

    fn sign(&self) -> Sign {
        self.sign
    }

    fn ln_abs(&self) -> f64 {
        self.ln.to_f64().unwrap()
    }

    fn from_usize(n: usize) -> Self {
        Self::from_native(F::from(n).unwrap())
    }

    // One exponential per term and Neumaier compensation on the scaled values.
    fn sum<I: IntoIterator<Item = Self>>(terms: I) -> Self {
        let terms: Vec<Self> = terms.into_iter().filter(|t| !t.is_zero()).collect();
        let Some(top) = terms.iter().map(|t| t.ln).fold(None, |m: Option<F>, l| match m {
            Some(m) if m >= l => Some(m),
            _ => Some(l),
        }) else {
            return Self::zero();
        };
        if !top.is_finite() {
            return terms.into_iter().fold(Self::zero(), |a, b| a + b);
        }
        let mut s = F::zero();
        let mut c = F::zero();
        for t in &terms {
            let x = F::from(t.sign.as_f64()).unwrap() * (t.ln - top).exp();
            let u = s + x;
            if s.abs() >= x.abs() {
                c = c + ((s - u) + x);
            } else {
                c = c + ((x - u) + s);
            }
            s = u;
        }
        let total = s + c;
        if total == F::zero() {
            return Self::zero();
        }
        let sign = if total > F::zero() { Sign::Pos } else { Sign::Neg };
        LogFloat { sign, ln: top + total.abs().ln() }
    }

    // Two passes: find the largest log-product, then sum scaled exponentials.
    fn dot_rev(a: &[Self], b: &[Self]) -> Self {
        let mut top = F::neg_infinity();
        for (x, y) in a.iter().zip(b.iter().rev()) {
            let l = x.ln + y.ln;
            if l > top {
                top = l;
            }
        }
        if top == F::neg_infinity() {
            return Self::zero();
        }
        if !top.is_finite() {
            return a.iter().zip(b.iter().rev()).fold(Self::zero(), |acc, (x, y)| acc + *x * *y);
        }
        let mut s = F::zero();
        for (x, y) in a.iter().zip(b.iter().rev()) {
            let sg = x.sign.times(y.sign);
            if sg != Sign::Zero {
                let e = (x.ln + y.ln - top).exp();
                s = if sg == Sign::Pos { s + e } else { s - e };
            }
        }
        if s == F::zero() {
            return Self::zero();
        }
        let sign = if s > F::zero() { Sign::Pos } else { Sign::Neg };
        LogFloat { sign, ln: top + s.abs().ln() }
    }
}

/// Exact rational arithmetic.
pub type Exact = BigRational;

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn from_f64(x: f64) -> Self {
        rational_from_f64(x).unwrap_or_else(BigRational::zero)
    }

    fn from_ext(x: &ExtVal) -> Self {
        match &x.exact {
            Some(r) => r.clone(),
            None => Self::from_f64(x.to_f64()),
        }
    }

    fn to_ext(&self) -> ExtVal {
        ExtVal::exact(self.clone())
    }

    fn to_f64(&self) -> f64 {
        rational_to_f64(self)
    }

    fn sign(&self) -> Sign {
        if self.is_zero() {
            Sign::Zero
        } else if self.is_positive() {
            Sign::Pos
        } else {
            Sign::Neg
        }
    }

    fn ln_abs(&self) -> f64 {
        ln_rational(self)
    }

    fn from_usize(n: usize) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }
}

/// Natural log of `|n|` for arbitrarily large integers.
pub fn ln_bigint(n: &BigInt) -> f64 {
    let bits = n.bits();
    if bits == 0 {
        return f64::NEG_INFINITY;
    }
    if bits <= 1000 {
        return n.abs().to_f64().unwrap().ln();
    }
    let shift = bits - 64;
    let top: BigInt = n.abs() >> shift;
    top.to_f64().unwrap().ln() + shift as f64 * std::f64::consts::LN_2
}

pub fn ln_rational(r: &BigRational) -> f64 {
    if r.is_zero() {
        return f64::NEG_INFINITY;
    }
    ln_bigint(r.numer()) - ln_bigint(r.denom())
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    if r.is_zero() {
        return 0.0;
    }
    match ToPrimitive::to_f64(r) {
        Some(x) if x.is_finite() && x != 0.0 => x,
        _ => {
            let s = if r.is_negative() { -1.0 } else { 1.0 };
            s * ln_rational(r).exp()
        }
    }
}

/// Simplest rational whose nearest `f64` is `x` (so `0.1` maps to `1/10`),
/// falling back to the exact binary value.
pub fn rational_from_f64(x: f64) -> Option<BigRational> {
    if !x.is_finite() {
        return None;
    }
    if x == x.trunc() && x.abs() < 9.0e15 {
        return Some(BigRational::from_integer(BigInt::from(x as i64)));
    }
    if x.abs() < 1e12 && x.abs() > 1e-12 {
        let (mut h0, mut h1): (i128, i128) = (0, 1);
        let (mut k0, mut k1): (i128, i128) = (1, 0);
        let mut y = x;
        for _ in 0..64 {
            let a = y.floor();
            let ai = a as i128;
            let h2 = ai * h1 + h0;
            let k2 = ai * k1 + k0;
            if k2 > 1_000_000_000_000 {
                break;
            }
            (h0, h1, k0, k1) = (h1, h2, k1, k2);
            if (h1 as f64) / (k1 as f64) == x {
                return Some(BigRational::new(BigInt::from(h1), BigInt::from(k1)));
            }
            let frac = y - a;
            if frac == 0.0 {
                break;
            }
            y = 1.0 / frac;
        }
    }
    BigRational::from_float(x)
}

/// True when `x` is recovered exactly by a small-denominator rational.
pub fn is_simple_rational(x: f64) -> bool {
    match rational_from_f64(x) {
        Some(r) => r.denom().bits() <= 24,
        None => false,
    }
}

/// Signed extended-range value: a (sign, log-magnitude) view plus an optional
/// exact rational payload.
#[derive(Clone, Debug)]
pub struct ExtVal {
    pub sign: Sign,
    pub log_mag: f64,
    pub exact: Option<BigRational>,
}

impl PartialEq for ExtVal {
    fn eq(&self, other: &Self) -> bool {
        match (&self.exact, &other.exact) {
            (Some(a), Some(b)) => a == b,
            _ => {
                self.sign == other.sign
                    && (self.sign == Sign::Zero || self.log_mag == other.log_mag)
            }
        }
    }
}

impl ExtVal {
    pub fn from_parts(sign: Sign, log_mag: f64) -> Self {
        if sign == Sign::Zero {
            return ExtVal { sign, log_mag: f64::NEG_INFINITY, exact: None };
        }
        ExtVal { sign, log_mag, exact: None }
    }

    pub fn from_f64(x: f64) -> Self {
        Self::from_parts(Sign::of_f64(x), x.abs().ln())
    }

    pub fn exact(r: BigRational) -> Self {
        let sign = <BigRational as Scalar>::sign(&r);
        ExtVal { sign, log_mag: ln_rational(&r), exact: Some(r) }
    }

    pub fn is_zero(&self) -> bool {
        self.sign == Sign::Zero
    }

    pub fn is_exact(&self) -> bool {
        self.exact.is_some()
    }

    pub fn to_f64(&self) -> f64 {
        match &self.exact {
            Some(r) => rational_to_f64(r),
            None => self.sign.as_f64() * self.log_mag.exp(),
        }
    }

    fn as_log(&self) -> LogF64 {
        LogF64::new(self.sign, self.log_mag)
    }

    fn from_log(x: LogF64) -> Self {
        Self::from_parts(x.sign, x.ln)
    }

    fn combine(
        self,
        rhs: Self,
        exact: impl FnOnce(BigRational, BigRational) -> Option<BigRational>,
        float: impl FnOnce(LogF64, LogF64) -> LogF64,
    ) -> Self {
        let (a, b) = (self.as_log(), rhs.as_log());
        if let (Some(x), Some(y)) = (self.exact, rhs.exact) {
            if let Some(r) = exact(x, y) {
                return ExtVal::exact(r);
            }
        }
        Self::from_log(float(a, b))
    }
}

impl Zero for ExtVal {
    fn zero() -> Self {
        ExtVal::exact(BigRational::zero())
    }

    fn is_zero(&self) -> bool {
        self.sign == Sign::Zero
    }
}

impl One for ExtVal {
    fn one() -> Self {
        ExtVal::exact(BigRational::one())
    }
}

impl Neg for ExtVal {
    type Output = Self;

    fn neg(self) -> Self {
        ExtVal { sign: self.sign.flip(), log_mag: self.log_mag, exact: self.exact.map(|r| -r) }
    }
}

impl Add for ExtVal {
    type Output = Self;

    fn add(self, rhs: Self) -> Self {
        signed_log_sum(&[self, rhs])
    }
}

impl Sub for ExtVal {
    type Output = Self;

    fn sub(self, rhs: Self) -> Self {
        signed_log_sum(&[self, -rhs])
    }
}

impl Mul for ExtVal {
    type Output = Self;

    fn mul(self, rhs: Self) -> Self {
        self.combine(rhs, |a, b| Some(a * b), |a, b| a * b)
    }
}

impl Div for ExtVal {
    type Output = Self;

    fn div(self, rhs: Self) -> Self {
        self.combine(
            rhs,
            |a, b| if b.is_zero() { None } else { Some(a / b) },
            |a, b| a / b,
        )
    }
}

impl Scalar for ExtVal {
    const EXACT: bool = false;

    fn from_f64(x: f64) -> Self {
        ExtVal::from_f64(x)
    }

    fn from_ext(x: &ExtVal) -> Self {
        x.clone()
    }

    fn to_ext(&self) -> ExtVal {
        self.clone()
    }

    fn to_f64(&self) -> f64 {
        ExtVal::to_f64(self)
    }

    fn sign(&self) -> Sign {
        self.sign
    }

    fn ln_abs(&self) -> f64 {
        self.log_mag
    }

    fn sum<I: IntoIterator<Item = Self>>(terms: I) -> Self {
        let v: Vec<ExtVal> = terms.into_iter().collect();
        signed_log_sum(&v)
    }
}

/// Sum of signed extended values.
///
/// Exact when every term carries a rational payload. Otherwise a streaming
/// log-sum-exp is used, switching to exact summation of the scaled terms when
/// the largest positive and negative terms nearly cancel.
pub fn signed_log_sum(terms: &[ExtVal]) -> ExtVal {
    let live: Vec<&ExtVal> = terms.iter().filter(|t| !t.is_zero()).collect();
    if live.is_empty() {
        return if terms.iter().all(|t| t.is_exact()) {
            ExtVal::zero()
        } else {
            ExtVal::from_parts(Sign::Zero, 0.0)
        };
    }
    if terms.iter().all(|t| t.is_exact()) {
        let s = live.iter().fold(BigRational::zero(), |acc, t| acc + t.exact.as_ref().unwrap());
        return ExtVal::exact(s);
    }
    let top_pos = live.iter().filter(|t| t.sign == Sign::Pos).map(|t| t.log_mag).fold(f64::NEG_INFINITY, f64::max);
    let top_neg = live.iter().filter(|t| t.sign == Sign::Neg).map(|t| t.log_mag).fold(f64::NEG_INFINITY, f64::max);
    let top = top_pos.max(top_neg);
    if top_pos.is_finite() && top_neg.is_finite() && (top_pos - top_neg).abs() <= CANCELLATION_LOG_GAP {
        // Near-cancellation: add the scaled doubles without rounding.
        let s = live.iter().fold(BigRational::zero(), |acc, t| {
            let x = t.sign.as_f64() * (t.log_mag - top).exp();
            acc + BigRational::from_float(x).unwrap_or_else(BigRational::zero)
        });
        if s.is_zero() {
            return ExtVal::from_parts(Sign::Zero, 0.0);
        }
        return ExtVal::from_parts(<BigRational as Scalar>::sign(&s), top + ln_rational(&s));
    }
    let r = LogF64::sum(live.iter().map(|t| t.as_log()));
    ExtVal::from_parts(r.sign, r.ln)
}

/// Sign and log-magnitude of the gamma function.
pub fn log_gamma_signed(x: f64) -> Result<ExtVal> {
    if x <= 0.0 && x == x.floor() {
        return Err(GibbsError::Pole(x));
    }
    if x.is_nan() {
        return Err(GibbsError::Param("log_gamma_signed: NaN argument".into()));
    }
    let (lg, s) = libm::lgamma_r(x);
    let sign = if s < 0 { Sign::Neg } else { Sign::Pos };
    Ok(ExtVal::from_parts(sign, lg))
}

/// `Γ(x)` as a float, `±inf` beyond the double range.
pub fn gamma(x: f64) -> Result<f64> {
    log_gamma_signed(x).map(|g| g.to_f64())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FactorialKind {
    Rising,
    Falling,
}

/// `(x)_{i;a}` or `[x]_{i;a}` as an explicit product, so zero factors stay exact.
pub fn factorial_poly(x: f64, i: usize, a: f64, kind: FactorialKind) -> ExtVal {
    let step = match kind {
        FactorialKind::Rising => a,
        FactorialKind::Falling => -a,
    };
    let mut acc = LogF64::one();
    for t in 0..i {
        let f = x + t as f64 * step;
        if f == 0.0 {
            return ExtVal::from_parts(Sign::Zero, 0.0);
        }
        acc = acc * LogF64::from_native(f);
    }
    ExtVal::from_parts(acc.sign, acc.ln)
}

/// Generic `(x)_{i;a}`.
pub fn rising<S: Scalar>(x: &S, i: usize, a: &S) -> S {
    let mut acc = S::one();
    let mut f = x.clone();
    for _ in 0..i {
        acc = acc * f.clone();
        f = f + a.clone();
    }
    acc
}

/// Generic `[x]_{i;a}`.
pub fn falling<S: Scalar>(x: &S, i: usize, a: &S) -> S {
    rising(x, i, &(-a.clone()))
}

/// `ln n!` for every `n <= n_max`.
pub fn ln_factorials(n_max: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n_max + 1);
    let mut acc = 0.0;
    out.push(0.0);
    for n in 1..=n_max {
        acc += (n as f64).ln();
        out.push(acc);
    }
    out
}

/// `n!` for every `n <= n_max` in the requested scalar.
pub fn factorials<S: Scalar>(n_max: usize) -> Vec<S> {
    let mut out = Vec::with_capacity(n_max + 1);
    out.push(S::one());
    for n in 1..=n_max {
        let next = out[n - 1].clone() * S::from_usize(n);
        out.push(next);
    }
    out
}

pub fn binomial<S: Scalar>(n: usize, k: usize) -> S {
    if k > n {
        return S::zero();
    }
    let k = k.min(n - k);
    let mut acc = S::one();
    for j in 0..k {
        acc = acc * S::from_usize(n - j) / S::from_usize(j + 1);
    }
    acc
}

/// Total order on floats used when sorting log-magnitudes.
pub fn cmp_f64(a: &f64, b: &f64) -> Ordering {
    a.partial_cmp(b).unwrap_or(Ordering::Equal)
}

/// Converts a probability computed in any scalar to `f64`, clamping only
/// values within `1e-9` of `[0, 1]`.
pub fn to_probability<S: Scalar>(p: &S) -> Result<f64> {
    let x = p.to_f64();
    if x.is_nan() {
        return Err(GibbsError::NotAProbability(x));
    }
    if !(-1e-9..=1.0 + 1e-9).contains(&x) {
        return Err(GibbsError::NotAProbability(x));
    }
    Ok(x.clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn log_sum_examples() {
        let s = signed_log_sum(&[ExtVal::from_parts(Sign::Pos, 2f64.ln()), ExtVal::from_parts(Sign::Pos, 3f64.ln())]);
        assert_eq!(s.sign, Sign::Pos);
        assert!(close(s.log_mag, 5f64.ln(), 1e-14));

        let z = signed_log_sum(&[ExtVal::from_parts(Sign::Pos, 5f64.ln()), ExtVal::from_parts(Sign::Neg, 5f64.ln())]);
        assert!(z.is_zero());

        let d = signed_log_sum(&[ExtVal::from_parts(Sign::Pos, 3f64.ln()), ExtVal::from_parts(Sign::Neg, 0.0)]);
        assert_eq!(d.sign, Sign::Pos);
        assert!(close(d.log_mag, 2f64.ln(), 1e-12));

        assert!(signed_log_sum(&[]).is_zero());
    }

    #[test]
    fn gamma_values() {
        let g = log_gamma_signed(3.0).unwrap();
        assert_eq!(g.sign, Sign::Pos);
        assert!(close(g.log_mag, 2f64.ln(), 1e-14));
        let h = log_gamma_signed(0.5).unwrap();
        assert!(close(h.log_mag, 0.5723649429247001, 1e-14));
        let m = log_gamma_signed(-0.5).unwrap();
        assert_eq!(m.sign, Sign::Neg);
        assert!(close(m.log_mag, 1.2655121234846454, 1e-14));
        assert_eq!(log_gamma_signed(-2.0), Err(GibbsError::Pole(-2.0)));
        assert!(log_gamma_signed(0.0).is_err());
    }

    #[test]
    fn factorial_poly_examples() {
        assert!(close(factorial_poly(1.0, 3, 0.5, FactorialKind::Rising).to_f64(), 3.0, 1e-14));
        assert_eq!(factorial_poly(7.3, 0, 2.0, FactorialKind::Falling).to_f64(), 1.0);
        assert!(close(factorial_poly(0.5, 2, 1.0, FactorialKind::Falling).to_f64(), -0.25, 1e-14));
        assert!(factorial_poly(1.0, 3, -0.5, FactorialKind::Rising).is_zero());
    }

    #[test]
    fn rationals_from_decimals() {
        let r = rational_from_f64(0.1).unwrap();
        assert_eq!(r, BigRational::new(1.into(), 10.into()));
        let t = rational_from_f64(1.0 / 3.0).unwrap();
        assert_eq!(t, BigRational::new(1.into(), 3.into()));
        assert_eq!(rational_from_f64(-0.5).unwrap(), BigRational::new((-1).into(), 2.into()));
        assert!(is_simple_rational(0.25));
        assert!(!is_simple_rational(std::f64::consts::PI));
    }

    #[test]
    fn log_float_arithmetic() {
        let a = LogF64::from_native(3.0);
        let b = LogF64::from_native(-5.0);
        assert!(close((a + b).to_native(), -2.0, 1e-14));
        assert!(close((a * b).to_native(), -15.0, 1e-14));
        assert!(close((a / b).to_native(), -0.6, 1e-14));
        assert!(close((a - a + a).to_native(), 3.0, 1e-14));
        let s = LogF64::sum([1.0, 2.0, -0.5, 1e-20].map(LogF64::from_native));
        assert!(close(s.to_native(), 2.5, 1e-15));
        let f = LogF32::from_native(2.0f32) * LogF32::from_native(4.0);
        assert!((f.to_native() - 8.0).abs() < 1e-5);
    }

    #[test]
    fn huge_rational_log() {
        let f: BigRational = factorials::<BigRational>(500)[500].clone();
        assert!(close(ln_rational(&f), ln_factorials(500)[500], 1e-13));
    }

    #[test]
    fn ext_exact_ops() {
        let a = ExtVal::exact(BigRational::new(1.into(), 3.into()));
        let b = ExtVal::exact(BigRational::new(1.into(), 6.into()));
        let s = a.clone() + b.clone();
        assert_eq!(s.exact.unwrap(), BigRational::new(1.into(), 2.into()));
        let z = a.clone() - a.clone();
        assert!(z.is_zero() && z.is_exact());
        let p = a * ExtVal::from_f64(3.0);
        assert!(!p.is_exact());
        assert!(close(p.to_f64(), 1.0, 1e-14));
    }
}
