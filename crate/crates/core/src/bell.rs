//! Partial Bell polynomials `B_{n,k}(w)` and the associated families with
//! block sizes bounded below (`assoc_left`) or above (`assoc_right`).
//!
//! Tables store `B_{n,k} / n!`, which turns the binomial recurrence into a
//! plain convolution with `u_j = w_{j+1} / j!`.

use std::any::{Any, TypeId};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{GibbsError, Result};
use crate::models::{WeightKey, Weights};
use crate::numeric::{factorials, is_simple_rational, Exact, ExtVal, LogF64, Scalar, Sign};

/// Default memory budget of the table cache.
pub const DEFAULT_CACHE_BYTES: usize = 512 << 20;

/// Exact arithmetic is used for special numbers up to this `n`.
pub const SPECIAL_EXACT_N: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    Plain,
    /// All blocks of size at least `r`.
    AssocLeft(usize),
    /// All blocks of size at most `r`.
    AssocRight(usize),
}

/// Triangular table of `B_{n,k}` for `0 <= k <= min(n, k_max)`, `n <= n_max`.
#[derive(Clone, Debug)]
pub struct BellTable<S> {
    pub family: Family,
    pub weights: WeightKey,
    pub n_max: usize,
    pub k_max: usize,
    // cols[k][n] = B_{n,k} / n!
    cols: Vec<Vec<S>>,
    fact: Vec<S>,
}

impl<S: Scalar> BellTable<S> {
    pub fn build(w: &Weights, family: Family, n_max: usize, k_max: usize) -> Self {
        let k_max = k_max.min(n_max);
        let wv = w.values::<S>(n_max);
        let fact = factorials::<S>(n_max);
        let u: Vec<S> = (0..n_max).map(|j| wv[j + 1].clone() / fact[j].clone()).collect();
        let mut cols: Vec<Vec<S>> = Vec::with_capacity(k_max + 1);
        let mut col0 = vec![S::zero(); n_max + 1];
        col0[0] = S::one();
        cols.push(col0);
        for k in 1..=k_max {
            let mut col = vec![S::zero(); n_max + 1];
            let prev = &cols[k - 1];
            for m in k..=n_max {
                // element m sits in a block of size j + 1; the other m - 1 - j
                // elements form k - 1 blocks
                let n = m - 1;
                let (lo, hi) = match family {
                    Family::Plain => (0, (n + 1).checked_sub(k)),
                    Family::AssocLeft(r) => (r - 1, n.checked_sub(r * (k - 1))),
                    Family::AssocRight(r) => (n.saturating_sub(r * (k - 1)), Some((r - 1).min(n + 1 - k))),
                };
                let Some(hi) = hi else { continue };
                if lo > hi {
                    continue;
                }
                let acc = S::dot_rev(&u[lo..=hi], &prev[n - hi..=n - lo]);
                col[m] = acc / S::from_usize(m);
            }
            cols.push(col);
        }
        BellTable { family, weights: w.key(), n_max, k_max, cols, fact }
    }

    /// `B_{n,k} / n!`.
    pub fn normalized(&self, n: usize, k: usize) -> S {
        assert!(n <= self.n_max && k <= self.k_max, "({n}, {k}) outside table ({}, {})", self.n_max, self.k_max);
        self.cols[k][n].clone()
    }

    pub fn get(&self, n: usize, k: usize) -> S {
        if k > n {
            return S::zero();
        }
        self.normalized(n, k) * self.fact[n].clone()
    }

    pub fn factorial(&self, n: usize) -> &S {
        &self.fact[n]
    }

    fn bytes(&self) -> usize {
        let per = if S::EXACT { 128 } else { std::mem::size_of::<S>() };
        per * (self.k_max + 1) * (self.n_max + 1)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
struct CacheKey {
    weights: WeightKey,
    family: Family,
    scalar: TypeId,
}

struct Entry {
    table: Arc<dyn Any + Send + Sync>,
    n_max: usize,
    k_max: usize,
    bytes: usize,
    last_used: u64,
}

type Slot = Arc<Mutex<Option<Entry>>>;

struct Cache {
    slots: HashMap<CacheKey, Slot>,
    clock: u64,
    cap: usize,
}

fn cache() -> &'static Mutex<Cache> {
    static CACHE: OnceLock<Mutex<Cache>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(Cache { slots: HashMap::new(), clock: 0, cap: DEFAULT_CACHE_BYTES }))
}

/// Sets the table cache budget in bytes; tables are evicted whole, least
/// recently used first.
pub fn set_cache_capacity(bytes: usize) {
    cache().lock().unwrap().cap = bytes;
}

pub fn clear_cache() {
    cache().lock().unwrap().slots.clear();
}

fn evict(cache: &mut Cache, keep: CacheKey) {
    loop {
        let mut total = 0;
        let mut oldest: Option<(u64, CacheKey)> = None;
        for (key, slot) in &cache.slots {
            // Slots being built are skipped rather than waited on.
            if let Ok(guard) = slot.try_lock() {
                if let Some(e) = guard.as_ref() {
                    total += e.bytes;
                    if *key != keep && oldest.is_none_or(|(t, _)| e.last_used < t) {
                        oldest = Some((e.last_used, *key));
                    }
                }
            }
        }
        match oldest {
            Some((_, key)) if total > cache.cap => {
                cache.slots.remove(&key);
            }
            _ => return,
        }
    }
}

/// Cached table covering at least `n_max` rows and `k_max` columns.
/// Concurrent requests for the same table wait for a single construction.
pub fn table<S: Scalar>(w: &Weights, family: Family, n_max: usize, k_max: usize) -> Arc<BellTable<S>> {
    let k_max = k_max.min(n_max);
    let key = CacheKey { weights: w.key(), family, scalar: TypeId::of::<S>() };
    let (slot, stamp) = {
        let mut c = cache().lock().unwrap();
        c.clock += 1;
        let stamp = c.clock;
        (c.slots.entry(key).or_default().clone(), stamp)
    };
    let mut guard = slot.lock().unwrap();
    if let Some(e) = guard.as_mut() {
        if e.n_max >= n_max && e.k_max >= k_max {
            e.last_used = stamp;
            return e.table.clone().downcast::<BellTable<S>>().expect("cache entry type");
        }
    }
    let (n_max, k_max) = match guard.as_ref() {
        // Grow to cover both the old and the new request.
        Some(e) => (n_max.max(e.n_max), k_max.max(e.k_max.min(n_max.max(e.n_max)))),
        None => (n_max, k_max),
    };
    let t = Arc::new(BellTable::<S>::build(w, family, n_max, k_max));
    *guard = Some(Entry { table: t.clone(), n_max, k_max: t.k_max, bytes: t.bytes(), last_used: stamp });
    drop(guard);
    evict(&mut cache().lock().unwrap(), key);
    t
}

/// All `B_{n,k}(w)`, `0 <= k <= n <= n_max`.
pub fn bell_table<S: Scalar>(w: &Weights, n_max: usize) -> Arc<BellTable<S>> {
    table(w, Family::Plain, n_max, n_max)
}

/// All `B_{n,k,(r)}(w)`: every block has at least `r` elements.
pub fn assoc_left_table<S: Scalar>(w: &Weights, r: usize, n_max: usize) -> Result<Arc<BellTable<S>>> {
    check_r(r)?;
    Ok(table(w, Family::AssocLeft(r), n_max, n_max / r))
}

/// All `B^{(r)}_{n,k}(w)`: every block has at most `r` elements.
pub fn assoc_right_table<S: Scalar>(w: &Weights, r: usize, n_max: usize) -> Result<Arc<BellTable<S>>> {
    check_r(r)?;
    Ok(table(w, Family::AssocRight(r), n_max, n_max))
}

fn check_r(r: usize) -> Result<()> {
    if r == 0 {
        Err(GibbsError::Range("threshold r must be at least 1".into()))
    } else {
        Ok(())
    }
}

/// `B^{(r),(i)}_{n,k} / n!`: fewer than `i` blocks exceed `r`.
pub fn assoc_ith_normalized<S: Scalar>(
    left: &BellTable<S>,
    right: &BellTable<S>,
    i: usize,
    n: usize,
    k: usize,
) -> S {
    let mut terms = Vec::new();
    for j in 0..i.min(k + 1) {
        if j == 0 {
            terms.push(right.normalized(n, k));
            continue;
        }
        // j blocks above r hold m elements; the rest are at most r
        for m in j..=n {
            let a = left.normalized(m, j);
            if a.is_zero() {
                continue;
            }
            terms.push(a * right.normalized(n - m, k - j));
        }
    }
    S::sum(terms)
}

/// `B^{(r),(i)}_{n,k}(w)`.
pub fn assoc_ith<S: Scalar>(w: &Weights, r: usize, i: usize, n: usize, k: usize) -> Result<S> {
    check_r(r)?;
    if i == 0 {
        return Err(GibbsError::Range("order i must be at least 1".into()));
    }
    if k > n {
        return Ok(S::zero());
    }
    let left = table::<S>(w, Family::AssocLeft(r + 1), n, i - 1);
    let right = table::<S>(w, Family::AssocRight(r), n, n);
    Ok(assoc_ith_normalized(&left, &right, i, n, k) * right.factorial(n).clone())
}

fn abs_s<S: Scalar>(x: &S) -> S {
    if x.sign() == Sign::Neg {
        -x.clone()
    } else {
        x.clone()
    }
}

/// `(lhs - rhs) / |rhs|`, or `lhs - rhs` scaled by `|lhs|` when `rhs = 0`.
pub fn relative_residual<S: Scalar>(lhs: &S, rhs: &S) -> S {
    let diff = lhs.clone() - rhs.clone();
    if diff.is_zero() {
        return S::zero();
    }
    if rhs.is_zero() {
        return diff / abs_s(lhs);
    }
    diff / abs_s(rhs)
}

/// Coefficients of `(sum_{i in sizes} w_i x^i / i!)^l` up to degree `deg`.
fn restricted_power<S: Scalar>(wv: &[S], fact: &[S], sizes: impl Fn(usize) -> bool, l: usize, deg: usize) -> Vec<S> {
    let mut base = vec![S::zero(); deg + 1];
    for (i, b) in base.iter_mut().enumerate().skip(1) {
        if sizes(i) && i < wv.len() {
            *b = wv[i].clone() / fact[i].clone();
        }
    }
    let mut acc = vec![S::zero(); deg + 1];
    acc[0] = S::one();
    for _ in 0..l {
        let mut next = vec![S::zero(); deg + 1];
        for (a, x) in acc.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (b, y) in base.iter().enumerate().take(deg + 1 - a) {
                if !y.is_zero() {
                    next[a + b] = next[a + b].clone() + x.clone() * y.clone();
                }
            }
        }
        acc = next;
    }
    acc
}

/// Inclusion-exclusion expansion `B_{n,k} + sum_l (-1)^l / l! sum_s c_l(s) [n]_s B_{n-s,k-l}`
/// where `c_l(s)` sums `prod w_{i_j}/i_j!` over ordered `l`-tuples of allowed sizes.
fn expansion<S: Scalar>(w: &Weights, n: usize, k: usize, l_max: usize, sizes: impl Fn(usize) -> bool + Copy) -> S {
    let plain = table::<S>(w, Family::Plain, n, n);
    let wv = w.values::<S>(n);
    let fact = factorials::<S>(n);
    let mut total = plain.get(n, k);
    for l in 1..=l_max.min(k) {
        let c = restricted_power(&wv, &fact, sizes, l, n);
        let mut inner = S::zero();
        for s in 0..=(n - k + l).min(n) {
            if c[s].is_zero() {
                continue;
            }
            let falling = fact[n].clone() / fact[n - s].clone();
            inner = inner + c[s].clone() * falling * plain.get(n - s, k - l);
        }
        let term = inner / fact[l].clone();
        total = if l % 2 == 1 { total - term } else { total + term };
    }
    total
}

fn range_err(name: &str, n: usize, k: usize, r: usize) -> GibbsError {
    GibbsError::Range(format!("{name} does not apply at (n, k, r) = ({n}, {k}, {r})"))
}

/// Residual of `B^{(r)}_{n,k}` against its expansion over plain polynomials,
/// for `n >= k`. Above `r k` both sides vanish.
pub fn residual_right_by_plain<S: Scalar>(w: &Weights, n: usize, k: usize, r: usize) -> Result<S> {
    if r == 0 || k == 0 || n < k {
        return Err(range_err("assoc_right expansion", n, k, r));
    }
    let lhs = table::<S>(w, Family::AssocRight(r), n, n).get(n, k);
    let rhs = expansion::<S>(w, n, k, (n - k) / r, |i| i > r);
    Ok(relative_residual(&lhs, &rhs))
}

/// Residual of `B_{n,k,(r)}` against its expansion over plain polynomials,
/// for `n >= r k`.
pub fn residual_left_by_plain<S: Scalar>(w: &Weights, n: usize, k: usize, r: usize) -> Result<S> {
    if r == 0 || k == 0 || n < r * k {
        return Err(range_err("assoc_left expansion", n, k, r));
    }
    let lhs = table::<S>(w, Family::AssocLeft(r), n, n / r).get(n, k);
    let rhs = expansion::<S>(w, n, k, k - 1, |i| i < r);
    Ok(relative_residual(&lhs, &rhs))
}

/// Residual of `B_{n,k,(r+1)} = sum_j [n]_{rj}/j! (-w_r/r!)^j B_{n-rj,k-j,(r)}`,
/// for `n >= k`.
pub fn residual_left_shift<S: Scalar>(w: &Weights, n: usize, k: usize, r: usize) -> Result<S> {
    if r == 0 || k == 0 || n < k {
        return Err(range_err("assoc_left shift", n, k, r));
    }
    let lhs = table::<S>(w, Family::AssocLeft(r + 1), n, n).get(n, k);
    let base = table::<S>(w, Family::AssocLeft(r), n, n);
    let fact = factorials::<S>(n.max(r));
    let step = -(w.get::<S>(r) / fact[r].clone());
    let mut pow = S::one();
    let mut terms = Vec::new();
    for j in 0..=k {
        if r * j > n {
            break;
        }
        let falling = fact[n].clone() / fact[n - r * j].clone();
        terms.push(falling * pow.clone() / fact[j].clone() * base.get(n - r * j, k - j));
        pow = pow * step.clone();
    }
    Ok(relative_residual(&lhs, &S::sum(terms)))
}

/// Residual of `B^{(r+1)}_{n,k} = sum_j [n]_{(r+1)j}/j! (w_{r+1}/(r+1)!)^j B^{(r)}_{n-(r+1)j,k-j}`,
/// for `n >= k`.
pub fn residual_right_shift<S: Scalar>(w: &Weights, n: usize, k: usize, r: usize) -> Result<S> {
    if r == 0 || k == 0 || n < k {
        return Err(range_err("assoc_right shift", n, k, r));
    }
    let lhs = table::<S>(w, Family::AssocRight(r + 1), n, n).get(n, k);
    let base = table::<S>(w, Family::AssocRight(r), n, n);
    let fact = factorials::<S>(n.max(r + 1));
    let step = w.get::<S>(r + 1) / fact[r + 1].clone();
    let mut terms = Vec::new();
    let lo = n.saturating_sub(r * k);
    for j in lo..=((n - k) / r).max(lo) {
        if (r + 1) * j > n || j > k {
            break;
        }
        let mut pow = S::one();
        for _ in 0..j {
            pow = pow * step.clone();
        }
        let falling = fact[n].clone() / fact[n - (r + 1) * j].clone();
        terms.push(falling * pow / fact[j].clone() * base.get(n - (r + 1) * j, k - j));
    }
    Ok(relative_residual(&lhs, &S::sum(terms)))
}

/// Residuals of the four identities linking the families; each entry is a
/// `RangeError` when `(n, k, r)` is outside that identity's range.
#[derive(Clone, Debug)]
pub struct IdentityReport<S> {
    pub right_by_plain: Result<S>,
    pub left_by_plain: Result<S>,
    pub left_shift: Result<S>,
    pub right_shift: Result<S>,
}

impl<S: Scalar> IdentityReport<S> {
    /// Largest absolute residual among the applicable identities.
    pub fn max_abs(&self) -> Option<f64> {
        [&self.right_by_plain, &self.left_by_plain, &self.left_shift, &self.right_shift]
            .into_iter()
            .filter_map(|r| r.as_ref().ok())
            .map(|x| x.to_f64().abs())
            .reduce(f64::max)
    }

    pub fn all_exact_zero(&self) -> bool {
        [&self.right_by_plain, &self.left_by_plain, &self.left_shift, &self.right_shift]
            .into_iter()
            .filter_map(|r| r.as_ref().ok())
            .all(|x| x.is_zero())
    }
}

pub fn crosscheck_identities<S: Scalar>(w: &Weights, n: usize, k: usize, r: usize) -> Result<IdentityReport<S>> {
    if k == 0 || k > n || r == 0 {
        return Err(GibbsError::Range(format!("need 1 <= k <= n and r >= 1, got (n, k, r) = ({n}, {k}, {r})")));
    }
    Ok(IdentityReport {
        right_by_plain: residual_right_by_plain(w, n, k, r),
        left_by_plain: residual_left_by_plain(w, n, k, r),
        left_shift: residual_left_shift(w, n, k, r),
        right_shift: residual_right_shift(w, n, k, r),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpecialKind {
    /// Signless Stirling numbers of the first kind `|s(n,k)|`.
    Stirling1,
    /// Generalized factorial coefficients `C(n,k;alpha)`.
    Gfc,
    /// `|s_r(n,k)|`: permutations with `k` cycles, all of length at least `r`.
    Stirling1Assoc(usize),
    /// `C_r(n,k;alpha)`.
    GfcAssoc(usize),
}

impl SpecialKind {
    pub fn weights(self, alpha: Option<f64>) -> Result<Weights> {
        match self {
            SpecialKind::Stirling1 | SpecialKind::Stirling1Assoc(_) => Ok(Weights::factorial()),
            SpecialKind::Gfc | SpecialKind::GfcAssoc(_) => match alpha {
                Some(a) if a != 0.0 && a.is_finite() => Ok(Weights::Falling { alpha: a }),
                _ => Err(GibbsError::Param("generalized factorial coefficients need alpha != 0".into())),
            },
        }
    }

    fn family(self) -> Family {
        match self {
            SpecialKind::Stirling1 | SpecialKind::Gfc => Family::Plain,
            SpecialKind::Stirling1Assoc(r) | SpecialKind::GfcAssoc(r) => Family::AssocLeft(r),
        }
    }
}

pub fn special_number_in<S: Scalar>(kind: SpecialKind, n: usize, k: usize, alpha: Option<f64>) -> Result<S> {
    let w = kind.weights(alpha)?;
    let family = kind.family();
    if let Family::AssocLeft(r) = family {
        check_r(r)?;
    }
    if k > n {
        return Ok(S::zero());
    }
    Ok(table::<S>(&w, family, n, k).get(n, k))
}

/// `|s(n,k)|`, `C(n,k;alpha)` and their `r`-associated versions. Exact for
/// `n <= 64` with rational `alpha`, sign-tracked log-space above.
pub fn special_number(kind: SpecialKind, n: usize, k: usize, alpha: Option<f64>) -> Result<ExtVal> {
    let rational = alpha.is_none_or(is_simple_rational);
    if n <= SPECIAL_EXACT_N && rational {
        Ok(special_number_in::<Exact>(kind, n, k, alpha)?.to_ext())
    } else {
        Ok(special_number_in::<LogF64>(kind, n, k, alpha)?.to_ext())
    }
}
