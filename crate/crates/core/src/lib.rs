//! Exact, asymptotic, diffusion and Monte-Carlo analysis of one-dimensional
//! birth-death processes whose rates carry a system size `V`.
//!
//! The crate is organised from the bottom up:
//!
//! * [`model`]: rate laws as sums of falling-factorial monomials, their large-`V`
//!   expansion and the deterministic fixed points.
//! * [`exact`]: log-space stationary distributions and exact mean first passage times.
//! * [`asymptotics`]: the stochastic potential, Laplace-method log-integrals, the
//!   asymptotic MFPT integral and the Kramers formula.
//! * [`diffusion`]: continuous diffusions and the Kramers-Moyal, HGTT and effective
//!   approximations of the discrete chain.
//! * [`simulate`]: Gillespie trajectories and Monte-Carlo passage times.
//! * [`analysis`]: bifurcation and phase-transition scans, bistability classes and
//!   the van't Hoff decomposition.
//! * [`cli`]: the reproducible command-line runner behind the `dgp` binary.
//!
//! ```
//! use dgp::{exact, presets};
//!
//! let model = presets::poisson(1.0, 2.0);
//! let dist = exact::stationary_distribution(&model, 10.0, None).unwrap();
//! assert!((dist.probability(5) - 0.175467).abs() < 1e-6);
//! ```

// `!(a > b)` is used on purpose throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod asymptotics;
pub mod cli;
pub mod diffusion;
mod error;
pub mod exact;
pub mod model;
pub mod presets;
pub mod quadrature;
pub mod simulate;

pub use error::{Error, Result};
pub use model::{BirthDeathModel, FixedPoint, RateExpansion, RateTerm, Side, Stability};
