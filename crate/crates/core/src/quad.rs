//! Adaptive Gauss-Kronrod (7/15) quadrature with optional algebraic endpoint
//! substitution.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_5,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_48,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_56,
    0.104_790_010_322_250_19,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_42,
    0.204_432_940_075_298_89,
    0.209_482_141_084_727_82,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_64,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Most subintervals an adaptive call may create.
pub const MAX_SUBINTERVALS: usize = 400;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quad {
    pub value: f64,
    pub error: f64,
    pub evals: usize,
}

impl Quad {
    pub fn zero() -> Self {
        Quad { value: 0.0, error: 0.0, evals: 0 }
    }

    pub fn converged(&self, abs_tol: f64, rel_tol: f64) -> bool {
        self.error <= abs_tol.max(rel_tol * self.value.abs())
    }
}

/// One 15-point Kronrod rule on `[a, b]`, returning the estimate and
/// `|K15 - G7|`.
pub fn gauss_kronrod<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

struct Piece {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}

impl Eq for Piece {}

impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.partial_cmp(&other.error).unwrap_or(Ordering::Equal)
    }
}

/// Globally adaptive integration: bisect the worst piece until the summed
/// error estimate meets `max(abs_tol, rel_tol * |I|)`.
pub fn adaptive<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Quad {
    if a == b {
        return Quad::zero();
    }
    let (v, e) = gauss_kronrod(&mut f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Piece { a, b, value: v, error: e });
    let (mut total, mut err, mut evals) = (v, e, 15);
    while err > abs_tol.max(rel_tol * total.abs()) && heap.len() < MAX_SUBINTERVALS {
        let worst = heap.pop().unwrap();
        let m = 0.5 * (worst.a + worst.b);
        if m <= worst.a || m >= worst.b {
            heap.push(worst);
            break;
        }
        let (v1, e1) = gauss_kronrod(&mut f, worst.a, m);
        let (v2, e2) = gauss_kronrod(&mut f, m, worst.b);
        evals += 30;
        total += v1 + v2 - worst.value;
        err += e1 + e2 - worst.error;
        heap.push(Piece { a: worst.a, b: m, value: v1, error: e1 });
        heap.push(Piece { a: m, b: worst.b, value: v2, error: e2 });
    }
    // Re-add to shed accumulated rounding in the running totals.
    let total: f64 = heap.iter().map(|p| p.value).sum();
    let err: f64 = heap.iter().map(|p| p.error).sum();
    Quad { value: total, error: err, evals }
}

fn is_smooth_exponent(e: f64) -> bool {
    e >= 0.0 && e == e.floor()
}

/// Integrates `f` on `[a, b]` when the integrand behaves like
/// `(b - y)^right_exp` near `b` (and `(y - a)^left_exp` near `a`).
/// Non-integer exponents above `-1` are removed by the substitution
/// `b - y = s^(1/(e+1))`.
///
/// `f` is called as `f(y, y - a, b - y)`; the two distances are accurate even
/// when `y` rounds to an endpoint.
pub fn adaptive_endpoints<F: FnMut(f64, f64, f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    left_exp: Option<f64>,
    right_exp: Option<f64>,
    abs_tol: f64,
    rel_tol: f64,
) -> Quad {
    let left = left_exp.filter(|e| !is_smooth_exponent(*e));
    let right = right_exp.filter(|e| !is_smooth_exponent(*e));
    if a >= b {
        return Quad::zero();
    }
    if left.is_none() && right.is_none() {
        return adaptive(|y| f(y, y - a, b - y), a, b, abs_tol, rel_tol);
    }
    // Split point: the substituted pieces cover [a, lo] and [lo, b].
    let lo = match (left, right) {
        (Some(_), Some(_)) => a + 0.5 * (b - a),
        (Some(_), None) => b,
        _ => a,
    };
    let mut out = Quad::zero();
    let mut add = |q: Quad| {
        out.value += q.value;
        out.error += q.error;
        out.evals += q.evals;
    };
    let split_abs = abs_tol / 2.0;
    if let Some(e) = left {
        let kappa = 1.0 / (e + 1.0);
        let smax = (lo - a).powf(e + 1.0);
        add(adaptive(
            |s: f64| {
                if s <= 0.0 {
                    return 0.0;
                }
                let d = s.powf(kappa);
                if d <= 0.0 {
                    return 0.0;
                }
                kappa * s.powf(kappa - 1.0) * f(a + d, d, (b - a) - d)
            },
            0.0,
            smax,
            split_abs,
            rel_tol,
        ));
    }
    if let Some(e) = right {
        let kappa = 1.0 / (e + 1.0);
        let smax = (b - lo).powf(e + 1.0);
        add(adaptive(
            |s: f64| {
                if s <= 0.0 {
                    return 0.0;
                }
                let d = s.powf(kappa);
                if d <= 0.0 {
                    return 0.0;
                }
                kappa * s.powf(kappa - 1.0) * f(b - d, (b - a) - d, d)
            },
            0.0,
            smax,
            split_abs,
            rel_tol,
        ));
    }
    out
}

/// Tanh-sinh rule for `∫_0^1 f(u, 1 - u) (1 - u)^beta du` with `beta > -1`.
/// The complement `1 - u` is passed separately so it stays accurate near 1.
/// Halves the step until successive sums agree to `rel_tol`.
pub fn right_weighted<F: FnMut(f64, f64) -> f64>(mut f: F, beta: f64, rel_tol: f64) -> Quad {
    const HALF_WIDTH: f64 = 6.0;
    const MAX_HALVINGS: usize = 7;
    let mut term = |t: f64| {
        let y = std::f64::consts::PI * t.sinh();
        let u = 1.0 / (1.0 + (-y).exp());
        let cu = 1.0 / (1.0 + y.exp());
        let w = std::f64::consts::PI * t.cosh() * u * cu;
        if w == 0.0 || cu == 0.0 {
            return 0.0;
        }
        w * cu.powf(beta) * f(u, cu)
    };
    let mut h = 0.5;
    let steps = (HALF_WIDTH / h) as usize;
    let mut sum = term(0.0);
    for k in 1..=steps {
        sum += term(k as f64 * h) + term(-(k as f64) * h);
    }
    let mut evals = 2 * steps + 1;
    let mut est = h * sum;
    let mut err = f64::INFINITY;
    for _ in 0..MAX_HALVINGS {
        h *= 0.5;
        let steps = (HALF_WIDTH / h) as usize;
        for k in (1..=steps).step_by(2) {
            sum += term(k as f64 * h) + term(-(k as f64) * h);
        }
        evals += steps + 1;
        let next = h * sum;
        err = (next - est).abs();
        est = next;
        if err <= rel_tol * est.abs() {
            break;
        }
    }
    Quad { value: est, error: err, evals }
}
