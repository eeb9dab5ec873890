//! Exact and asymptotic block-size statistics of Gibbs partitions.
//!
//! Numerical kernels are generic over [`Scalar`]: plain floats, the signed
//! log-space [`LogF64`]/[`LogF32`], and exact rationals ([`Exact`]).

pub mod asymp;
pub mod bell;
pub mod dist;
pub mod error;
pub mod models;
pub mod numeric;
pub mod oracle;
pub mod quad;
pub mod sampler;

pub use asymp::{incomplete_dirichlet, Asymptotic, AsymptoticForm, DirichletSpec, Parity};
pub use bell::{special_number, BellTable, Family, SpecialKind};
pub use dist::{blocks_pmf, conditional_extreme, extreme_cdf, factorial_moment, smallest_tail, Extreme};
pub use error::{GibbsError, Result};
pub use models::{consistent_weights, ep_v, eppf, gnedin_block_pmf, gnedin_v, GibbsModel, Sizes, Weights};
pub use numeric::{Exact, ExtVal, LogF32, LogF64, LogFloat, Precision, Scalar, Sign};
pub use sampler::{run_experiment, PartitionSample, RngStream};
