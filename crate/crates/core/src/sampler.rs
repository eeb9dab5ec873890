//! Exact random generation of Gibbs partitions and the Monte Carlo harness.
//!
//! Every trial draws from its own ChaCha stream keyed by
//! `(master_seed, trial_index)`, so counts do not depend on the thread count.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bell::{table, BellTable, Family};
use crate::dist::blocks_pmf_in;
use crate::error::{GibbsError, Result};
use crate::models::{validate_ep, validate_gnedin, GibbsModel, GnedinMixing};
use crate::numeric::{factorials, LogF64, Scalar, Sign};

/// Block-size counts `m_1..m_n` of one sampled partition.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PartitionSample {
    pub n: usize,
    pub multiplicities: Vec<usize>,
    pub k: usize,
}

impl PartitionSample {
    pub fn from_sizes(n: usize, sizes: &[usize]) -> Self {
        let mut m = vec![0; n];
        for &s in sizes {
            m[s - 1] += 1;
        }
        PartitionSample { n, multiplicities: m, k: sizes.len() }
    }

    pub fn smallest(&self) -> usize {
        self.multiplicities.iter().position(|&c| c > 0).map_or(0, |j| j + 1)
    }

    pub fn largest(&self) -> usize {
        self.multiplicities.iter().rposition(|&c| c > 0).map_or(0, |j| j + 1)
    }

    /// Block sizes, largest first.
    pub fn sizes(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.k);
        for (j, &c) in self.multiplicities.iter().enumerate().rev() {
            out.extend(std::iter::repeat_n(j + 1, c));
        }
        out
    }
}

/// Identifies an independent random stream.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RngStream {
    pub master_seed: u64,
    pub stream_index: u64,
}

impl RngStream {
    pub fn new(master_seed: u64, stream_index: u64) -> Self {
        RngStream { master_seed, stream_index }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.stream_index);
        rng
    }
}

/// Inverse-CDF draw from non-negative weights given as logs.
fn draw_log_weights<R: Rng + ?Sized>(ln_w: &[f64], rng: &mut R) -> usize {
    let top = ln_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = ln_w.iter().map(|l| (l - top).exp()).collect();
    let total: f64 = w.iter().sum();
    let mut u = rng.random::<f64>() * total;
    for (j, x) in w.iter().enumerate() {
        if u < *x {
            return j;
        }
        u -= x;
    }
    // rounding: last index with positive weight
    w.iter().rposition(|x| *x > 0.0).unwrap_or(0)
}

fn draw_cdf<R: Rng + ?Sized>(cdf: &[f64], rng: &mut R) -> usize {
    let u = rng.random::<f64>() * cdf[cdf.len() - 1];
    cdf.partition_point(|c| *c <= u).min(cdf.len() - 1)
}

/// Peel-off sampler for any Gibbs model with non-negative weights: draws the
/// block count, then the size of the block holding the lowest unassigned
/// element, one block at a time.
pub struct PartitionSampler {
    n: usize,
    blocks_cdf: Vec<f64>,
    plain: Arc<BellTable<LogF64>>,
    // ln(w_{j+1} / j!)
    ln_u: Vec<f64>,
}

impl PartitionSampler {
    pub fn new(model: &GibbsModel, n: usize) -> Result<Self> {
        model.check_n(n)?;
        let w = model.weights();
        let wv = w.values::<LogF64>(n);
        if wv.iter().skip(1).any(|x| x.sign == Sign::Neg) {
            return Err(GibbsError::Model("sampling needs non-negative weights".into()));
        }
        let pmf: Vec<f64> = blocks_pmf_in::<LogF64>(model, n)?.iter().map(Scalar::to_f64).collect();
        if pmf.iter().any(|p| *p < -1e-12) {
            return Err(GibbsError::Model("block-count law has negative mass".into()));
        }
        let total: f64 = pmf.iter().sum();
        if (total - 1.0).abs() > 1e-8 {
            return Err(GibbsError::Normalization(total));
        }
        let blocks_cdf = pmf
            .iter()
            .scan(0.0, |acc, p| {
                *acc += p.max(0.0);
                Some(*acc)
            })
            .collect();
        let fact = factorials::<LogF64>(n);
        let ln_u = (0..n)
            .map(|j| {
                let u = wv[j + 1] / fact[j];
                if u.sign == Sign::Zero {
                    f64::NEG_INFINITY
                } else {
                    u.ln
                }
            })
            .collect();
        let plain = table::<LogF64>(w, Family::Plain, n, n);
        Ok(PartitionSampler { n, blocks_cdf, plain, ln_u })
    }

    fn ln_b(&self, n: usize, k: usize) -> f64 {
        let b = self.plain.normalized(n, k);
        if b.sign == Sign::Pos {
            b.ln
        } else {
            f64::NEG_INFINITY
        }
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> PartitionSample {
        let mut k = draw_cdf(&self.blocks_cdf, rng) + 1;
        let mut left = self.n;
        let mut sizes = Vec::with_capacity(k);
        let mut ln_w = Vec::with_capacity(self.n);
        while k > 1 {
            // P(J = j) ∝ C(left-1, j-1) w_j B_{left-j, k-1} ∝ u_{j-1} b_{left-j, k-1}
            ln_w.clear();
            for j in 1..=left + 1 - k {
                ln_w.push(self.ln_u[j - 1] + self.ln_b(left - j, k - 1));
            }
            let j = draw_log_weights(&ln_w, rng) + 1;
            sizes.push(j);
            left -= j;
            k -= 1;
        }
        sizes.push(left);
        PartitionSample::from_sizes(self.n, &sizes)
    }
}

pub fn sample_partition<R: Rng + ?Sized>(model: &GibbsModel, n: usize, rng: &mut R) -> Result<PartitionSample> {
    Ok(PartitionSampler::new(model, n)?.draw(rng))
}

/// Sequential (Chinese restaurant) construction of the Ewens-Pitman law.
pub fn sample_ep_sequential<R: Rng + ?Sized>(alpha: f64, theta: f64, n: usize, rng: &mut R) -> Result<PartitionSample> {
    validate_ep(alpha, theta)?;
    if n == 0 {
        return Err(GibbsError::Range("n must be at least 1".into()));
    }
    Ok(ep_sequential(alpha, theta, n, rng))
}

fn ep_sequential<R: Rng + ?Sized>(alpha: f64, theta: f64, n: usize, rng: &mut R) -> PartitionSample {
    let mut sizes: Vec<usize> = vec![1];
    for t in 1..n {
        let k = sizes.len() as f64;
        let open = (theta + k * alpha).max(0.0);
        let mut u = rng.random::<f64>() * (t as f64 + theta);
        if u < open {
            sizes.push(1);
            continue;
        }
        u -= open;
        let mut chosen = sizes.len() - 1;
        for (i, s) in sizes.iter().enumerate() {
            let w = *s as f64 - alpha;
            if u < w {
                chosen = i;
                break;
            }
            u -= w;
        }
        sizes[chosen] += 1;
    }
    PartitionSample::from_sizes(n, &sizes)
}

/// Gnedin's partition as a mixture over the number of blocks `M` of
/// symmetric Dirichlet-multinomial partitions (`alpha = -1`, `theta = M`).
pub fn sample_gnedin<R: Rng + ?Sized>(gamma: f64, zeta: f64, n: usize, rng: &mut R) -> Result<PartitionSample> {
    validate_gnedin(gamma, zeta)?;
    if n == 0 {
        return Err(GibbsError::Range("n must be at least 1".into()));
    }
    if gamma == 0.0 {
        return Ok(PartitionSample::from_sizes(n, &vec![1; n]));
    }
    let m = draw_gnedin_blocks(&GnedinMixing::new(gamma, zeta)?, rng)?;
    Ok(ep_sequential(-1.0, m as f64, n, rng))
}

const GNEDIN_DRAW_MAX: usize = 50_000_000;

fn draw_gnedin_blocks<R: Rng + ?Sized>(mix: &GnedinMixing, rng: &mut R) -> Result<usize> {
    let u = rng.random::<f64>();
    let mut acc = 0.0;
    for (idx, p) in mix.pmf_iter().enumerate().take(GNEDIN_DRAW_MAX) {
        acc += p;
        if u < acc {
            return Ok(idx + 1);
        }
    }
    Err(GibbsError::NonConvergence(format!("block-count draw exceeded {GNEDIN_DRAW_MAX} terms")))
}

/// Event counted by [`run_experiment`].
#[derive(Clone)]
pub enum Event {
    /// `{smallest block > 1}`.
    SmallestGt1,
    Custom(Arc<dyn Fn(&PartitionSample) -> bool + Send + Sync>),
}

impl Event {
    pub fn holds(&self, s: &PartitionSample) -> bool {
        match self {
            Event::SmallestGt1 => s.smallest() > 1,
            Event::Custom(f) => f(s),
        }
    }
}

/// Number of `trials` partitions of `n` for which `event` holds.
pub fn run_experiment(model: &GibbsModel, n: usize, trials: u64, master_seed: u64, event: &Event) -> Result<u64> {
    if trials == 0 {
        return Err(GibbsError::Param("trials must be at least 1".into()));
    }
    let sampler = PartitionSampler::new(model, n)?;
    Ok((0..trials)
        .into_par_iter()
        .filter(|t| {
            let mut rng = RngStream::new(master_seed, *t).rng();
            event.holds(&sampler.draw(&mut rng))
        })
        .count() as u64)
}
