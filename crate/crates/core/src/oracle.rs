//! Brute-force ground truth: exhaustive sums over integer partitions of the
//! multiplicity-form EPPF, and Monte Carlo estimates of Dirichlet integrals.

use num_traits::Zero;

use crate::asymp::{dirichlet_mc_estimate, DirichletSpec};
use crate::error::{GibbsError, Result};
use crate::models::{eppf_in, GibbsModel, Sizes};
use crate::numeric::Exact;

/// Largest `n` accepted by the enumerator.
pub const ENUM_N_MAX: usize = 40;

/// Non-increasing positive parts summing to `n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IntegerPartition {
    pub parts: Vec<usize>,
}

impl IntegerPartition {
    pub fn n(&self) -> usize {
        self.parts.iter().sum()
    }

    pub fn blocks(&self) -> usize {
        self.parts.len()
    }

    /// `m_1..m_n`.
    pub fn multiplicities(&self) -> Vec<usize> {
        let mut m = vec![0; self.n()];
        for &p in &self.parts {
            m[p - 1] += 1;
        }
        m
    }

    /// Size of the `i`-th largest part, `0` when there are fewer than `i`.
    pub fn ith_largest(&self, i: usize) -> usize {
        self.parts.get(i - 1).copied().unwrap_or(0)
    }

    pub fn smallest(&self) -> usize {
        *self.parts.last().unwrap()
    }
}

/// Iterator over the partitions of `n` in reverse-lexicographic order.
pub struct Partitions {
    next: Option<Vec<usize>>,
}

impl Iterator for Partitions {
    type Item = IntegerPartition;

    fn next(&mut self) -> Option<IntegerPartition> {
        let current = self.next.take()?;
        // Successor: lower the rightmost part above 1 and refill greedily.
        let mut parts = current.clone();
        let mut freed = 0;
        while parts.last() == Some(&1) {
            parts.pop();
            freed += 1;
        }
        if let Some(last) = parts.pop() {
            let cap = last - 1;
            freed += 1;
            parts.push(cap);
            while freed > 0 {
                let take = freed.min(cap);
                parts.push(take);
                freed -= take;
            }
            self.next = Some(parts);
        }
        Some(IntegerPartition { parts: current })
    }
}

pub fn enumerate_integer_partitions(n: usize) -> Result<Partitions> {
    if n == 0 || n > ENUM_N_MAX {
        return Err(GibbsError::Range(format!("enumeration supports 1 <= n <= {ENUM_N_MAX}, got {n}")));
    }
    Ok(Partitions { next: Some(vec![n]) })
}

/// Events summed by [`exact_stat_enum`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stat {
    Always,
    /// `|Pi_n| = k`.
    Blocks(usize),
    /// `i`-th largest block `<= r` (absent blocks count as size 0).
    IthLargestAtMost { i: usize, r: usize },
    /// Smallest block `>= r`.
    SmallestAtLeast(usize),
}

impl Stat {
    pub fn holds(&self, p: &IntegerPartition) -> bool {
        match *self {
            Stat::Always => true,
            Stat::Blocks(k) => p.blocks() == k,
            Stat::IthLargestAtMost { i, r } => p.ith_largest(i) <= r,
            Stat::SmallestAtLeast(r) => p.smallest() >= r,
        }
    }
}

/// Probability of `stat` by summing the exact EPPF over every integer
/// partition of `n` where it holds.
pub fn exact_stat_enum(model: &GibbsModel, n: usize, stat: Stat) -> Result<Exact> {
    if let Stat::IthLargestAtMost { i: 0, .. } = stat {
        return Err(GibbsError::Range("order i must be at least 1".into()));
    }
    exact_event_enum(model, n, |p| stat.holds(p))
}

/// Same as [`exact_stat_enum`] for an arbitrary event on the block sizes.
pub fn exact_event_enum(model: &GibbsModel, n: usize, event: impl Fn(&IntegerPartition) -> bool) -> Result<Exact> {
    let mut total = Exact::zero();
    for p in enumerate_integer_partitions(n)? {
        if event(&p) {
            total += eppf_in::<Exact>(model, &Sizes::Multiplicities(p.multiplicities()))?;
        }
    }
    Ok(total)
}

/// Hit-or-miss Monte Carlo estimate and standard error of
/// `I^(b)_{p,q}(nu; rho)`.
pub fn dirichlet_mc(spec: &DirichletSpec, samples: usize, seed: u64) -> Result<(f64, f64)> {
    if samples == 0 {
        return Err(GibbsError::Param("need at least one sample".into()));
    }
    dirichlet_mc_estimate(spec, samples, seed)
}
