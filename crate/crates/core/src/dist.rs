//! Exact finite-`n` laws of the block count and of the ordered block sizes.
//!
//! The `_in` functions are generic over the arithmetic; the plain versions
//! pick exact rationals or log-space floats via [`Precision::Auto`].

use crate::bell::{assoc_ith_normalized, table, Family};
use crate::error::{GibbsError, Result};
use crate::models::{GibbsModel, Weights};
use crate::numeric::{factorials, to_probability, Exact, LogF64, Precision, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Extreme {
    Largest,
    Smallest,
}

fn check_r(n: usize, r: usize) -> Result<()> {
    if r == 0 || r > n {
        return Err(GibbsError::Range(format!("threshold r must lie in 1..={n}, got {r}")));
    }
    Ok(())
}

pub fn blocks_pmf_in<S: Scalar>(model: &GibbsModel, n: usize) -> Result<Vec<S>> {
    model.check_n(n)?;
    let t = table::<S>(model.weights(), Family::Plain, n, n);
    let v = model.v_row::<S>(n);
    let nf = t.factorial(n).clone();
    Ok((1..=n).map(|k| v[k].clone() * t.normalized(n, k) * nf.clone()).collect())
}

fn check_normalized(pmf: &[f64]) -> Result<()> {
    let total: f64 = pmf.iter().sum();
    if (total - 1.0).abs() > 1e-8 {
        return Err(GibbsError::Normalization(total));
    }
    Ok(())
}

/// `P(|Pi_n| = k)` for `k = 1..=n` (index `k - 1`).
pub fn blocks_pmf(model: &GibbsModel, n: usize) -> Result<Vec<f64>> {
    blocks_pmf_with(model, n, Precision::Auto)
}

pub fn blocks_pmf_with(model: &GibbsModel, n: usize, precision: Precision) -> Result<Vec<f64>> {
    let raw: Vec<f64> = if model.use_exact(n, precision) {
        blocks_pmf_in::<Exact>(model, n)?.iter().map(Scalar::to_f64).collect()
    } else {
        blocks_pmf_in::<LogF64>(model, n)?.iter().map(Scalar::to_f64).collect()
    };
    check_normalized(&raw)?;
    raw.iter().map(to_probability).collect()
}

/// `P(|A_(i)| <= r)`, the `i`-th largest block size, with `|A_(i)| = 0`
/// when there are fewer than `i` blocks.
pub fn extreme_cdf_in<S: Scalar>(model: &GibbsModel, n: usize, i: usize, r: usize) -> Result<S> {
    model.check_n(n)?;
    check_r(n, r)?;
    if i == 0 {
        return Err(GibbsError::Range("order i must be at least 1".into()));
    }
    let w = model.weights();
    let v = model.v_row::<S>(n);
    let right = table::<S>(w, Family::AssocRight(r), n, n);
    let mut terms = Vec::new();
    if i == 1 {
        for k in n.div_ceil(r)..=n {
            terms.push(v[k].clone() * right.normalized(n, k));
        }
    } else {
        let plain = table::<S>(w, Family::Plain, n, n);
        for k in 1..i.min(n + 1) {
            terms.push(v[k].clone() * plain.normalized(n, k));
        }
        let left = table::<S>(w, Family::AssocLeft(r + 1), n, i - 1);
        for k in i..=n {
            terms.push(v[k].clone() * assoc_ith_normalized(&left, &right, i, n, k));
        }
    }
    Ok(S::sum(terms) * right.factorial(n).clone())
}

/// `P(|A_(|Pi_n|)| >= r)`, the smallest block size.
pub fn smallest_tail_in<S: Scalar>(model: &GibbsModel, n: usize, r: usize) -> Result<S> {
    model.check_n(n)?;
    check_r(n, r)?;
    let left = table::<S>(model.weights(), Family::AssocLeft(r), n, n / r);
    let v = model.v_row::<S>(n);
    let terms = (1..=n / r).map(|k| v[k].clone() * left.normalized(n, k));
    Ok(S::sum(terms) * left.factorial(n).clone())
}

/// `P(|A_(i)| <= r | |Pi_n| = k)` for `Largest` (`i = 1`) or
/// `P(|A_(k)| >= r | |Pi_n| = k)` for `Smallest`; only the weights matter.
pub fn conditional_extreme_in<S: Scalar>(w: &Weights, n: usize, k: usize, which: Extreme, r: usize) -> Result<S> {
    if k == 0 || k > n {
        return Err(GibbsError::Range(format!("block count k must lie in 1..={n}, got {k}")));
    }
    check_r(n, r)?;
    let plain = table::<S>(w, Family::Plain, n, n).normalized(n, k);
    if plain.is_zero() {
        return Err(GibbsError::Model(format!("B_{{{n},{k}}}(w) = 0, so |Pi_n| = {k} is a null event")));
    }
    let num = match which {
        Extreme::Largest => table::<S>(w, Family::AssocRight(r), n, n).normalized(n, k),
        Extreme::Smallest => {
            if k * r > n {
                S::zero()
            } else {
                table::<S>(w, Family::AssocLeft(r), n, n / r).normalized(n, k)
            }
        }
    };
    Ok(num / plain)
}

/// `E[[X]_i]` for the largest or smallest block size `X`.
pub fn factorial_moment_in<S: Scalar>(model: &GibbsModel, n: usize, which: Extreme, i: usize) -> Result<S> {
    model.check_n(n)?;
    if i == 0 {
        return Err(GibbsError::Range("moment order i must be at least 1".into()));
    }
    let fact = factorials::<S>(n.max(i));
    // [j-1]_{i-1}
    let falling = |j: usize| {
        if j < i {
            S::zero()
        } else {
            fact[j - 1].clone() / fact[j - i].clone()
        }
    };
    let mut terms = Vec::new();
    for j in i..=n {
        let p = match which {
            Extreme::Smallest => smallest_tail_in::<S>(model, n, j)?,
            Extreme::Largest => {
                if j == 1 {
                    S::zero()
                } else {
                    extreme_cdf_in::<S>(model, n, 1, j - 1)?
                }
            }
        };
        terms.push(falling(j) * p);
    }
    let weighted = S::sum(terms) * S::from_usize(i);
    Ok(match which {
        Extreme::Smallest => weighted,
        Extreme::Largest => {
            let top = if i > n { S::zero() } else { fact[n].clone() / fact[n - i].clone() };
            top - weighted
        }
    })
}

fn auto(
    model: &GibbsModel,
    n: usize,
    exact: impl FnOnce() -> Result<Exact>,
    float: impl FnOnce() -> Result<LogF64>,
) -> Result<f64> {
    if model.use_exact(n, Precision::Auto) {
        Ok(Scalar::to_f64(&exact()?))
    } else {
        Ok(float()?.to_f64())
    }
}

pub fn extreme_cdf(model: &GibbsModel, n: usize, i: usize, r: usize) -> Result<f64> {
    let p = auto(model, n, || extreme_cdf_in(model, n, i, r), || extreme_cdf_in(model, n, i, r))?;
    to_probability(&p)
}

pub fn smallest_tail(model: &GibbsModel, n: usize, r: usize) -> Result<f64> {
    let p = auto(model, n, || smallest_tail_in(model, n, r), || smallest_tail_in(model, n, r))?;
    to_probability(&p)
}

pub fn conditional_extreme(w: &Weights, n: usize, k: usize, which: Extreme, r: usize) -> Result<f64> {
    let p = if n <= crate::numeric::EXACT_N_CAP && w.is_rational() {
        Scalar::to_f64(&conditional_extreme_in::<Exact>(w, n, k, which, r)?)
    } else {
        conditional_extreme_in::<LogF64>(w, n, k, which, r)?.to_f64()
    };
    to_probability(&p)
}

pub fn factorial_moment(model: &GibbsModel, n: usize, which: Extreme, i: usize) -> Result<f64> {
    auto(model, n, || factorial_moment_in(model, n, which, i), || factorial_moment_in(model, n, which, i))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use num_rational::BigRational;

    fn q(a: i64, b: i64) -> Exact {
        BigRational::new(BigInt::from(a), BigInt::from(b))
    }

    fn ewens() -> GibbsModel {
        GibbsModel::ewens_pitman(0.0, 1.0).unwrap()
    }

    #[test]
    fn blocks_examples() {
        let p = blocks_pmf_in::<Exact>(&ewens(), 4).unwrap();
        assert_eq!(p, vec![q(6, 24), q(11, 24), q(6, 24), q(1, 24)]);
        let m = GibbsModel::ewens_pitman(-0.5, 1.0).unwrap();
        let p = blocks_pmf(&m, 6).unwrap();
        assert!(p[2..].iter().all(|x| *x == 0.0));
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn extreme_examples() {
        let m = ewens();
        assert_eq!(extreme_cdf_in::<Exact>(&m, 4, 1, 1).unwrap(), q(1, 24));
        assert_eq!(extreme_cdf_in::<Exact>(&m, 4, 1, 2).unwrap(), q(10, 24));
        assert_eq!(extreme_cdf_in::<Exact>(&m, 4, 1, 4).unwrap(), q(1, 1));
        assert_eq!(smallest_tail_in::<Exact>(&m, 4, 2).unwrap(), q(3, 8));
        assert_eq!(smallest_tail_in::<Exact>(&m, 4, 1).unwrap(), q(1, 1));
        assert_eq!(smallest_tail_in::<Exact>(&m, 4, 4).unwrap(), q(1, 4));
        assert!(matches!(smallest_tail(&m, 4, 5), Err(GibbsError::Range(_))));
    }

    #[test]
    fn conditional_examples() {
        let w = Weights::factorial();
        assert_eq!(conditional_extreme_in::<Exact>(&w, 4, 2, Extreme::Largest, 2).unwrap(), q(3, 11));
        assert_eq!(conditional_extreme_in::<Exact>(&w, 4, 2, Extreme::Smallest, 2).unwrap(), q(3, 11));
        assert_eq!(conditional_extreme_in::<Exact>(&w, 4, 2, Extreme::Largest, 4).unwrap(), q(1, 1));
        assert_eq!(conditional_extreme_in::<Exact>(&w, 6, 2, Extreme::Largest, 2).unwrap(), q(0, 1));
    }

    #[test]
    fn moment_examples() {
        let m = ewens();
        assert_eq!(factorial_moment_in::<Exact>(&m, 4, Extreme::Smallest, 1).unwrap(), q(15, 8));
        assert_eq!(factorial_moment_in::<Exact>(&m, 4, Extreme::Largest, 1).unwrap(), q(67, 24));
        for which in [Extreme::Smallest, Extreme::Largest] {
            assert_eq!(factorial_moment_in::<Exact>(&m, 1, which, 1).unwrap(), q(1, 1));
        }
    }

    #[test]
    fn float_matches_exact() {
        let m = GibbsModel::ewens_pitman(0.5, 1.0).unwrap();
        for r in 1..=12 {
            let e = Scalar::to_f64(&extreme_cdf_in::<Exact>(&m, 12, 2, r).unwrap());
            let f = extreme_cdf_in::<LogF64>(&m, 12, 2, r).unwrap().to_f64();
            assert!((e - f).abs() < 1e-13);
        }
    }
}
