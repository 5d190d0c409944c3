//! Large-`V` asymptotics: the stochastic potential `Phi = phi0 + phi1/V`, the
//! Euler-Maclaurin summation lemma, Laplace-method log-integrals, the asymptotic
//! MFPT integral and the Kramers barrier-crossing time.

mod laplace;
mod lemma;
mod mfpt;
mod potential;

pub use laplace::{laplace_log_max, laplace_log_min, laplace_log_quadrature, Profile};
pub use lemma::{lemma_sum, LemmaCoefficients, LemmaInput};
pub use mfpt::{kramers_time, ln_ratio_factor, mfpt_asymptotic, BistabilityClass, KramersEstimate};
pub use potential::{phi0, phi1, PotentialGrid, PotentialRow, QuadratureInfo};
