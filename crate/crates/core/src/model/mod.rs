//! Rate laws of a birth-death chain with system size `V`.
//!
//! A rate is a finite sum of terms `c * V^a * n(n-1)...(n-k+1)`. The mass-action
//! default `a = 1 - k` makes `u_n(V) / V` converge to a polynomial in the
//! concentration `x = n / V`, which is what [`build_expansion`] computes.

mod expansion;
mod json;
mod poly;
mod roots;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use expansion::{build_expansion, RateExpansion};
pub use json::{ModelFile, TermSpec};
pub use poly::Polynomial;
pub use roots::{find_fixed_points, find_fixed_points_with, FixedPoint, RootOptions, Stability};

/// Which of the two rate laws a term belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Birth,
    Death,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Birth => "birth",
            Side::Death => "death",
        })
    }
}

/// `n (n-1) ... (n-k+1)` as a float; zero whenever `n < k`.
#[must_use]
pub fn falling_factorial(n: u64, k: u32) -> f64 {
    if n < u64::from(k) {
        return 0.0;
    }
    (0..u64::from(k)).fold(1.0, |acc, j| acc * (n - j) as f64)
}

/// One monomial `coefficient * V^volume_exponent * n^(order)` of a rate law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateTerm {
    pub coefficient: f64,
    pub order: u32,
    pub volume_exponent: i32,
}

impl RateTerm {
    /// Mass-action scaling, `V^(1-k)`.
    pub fn mass_action(coefficient: f64, order: u32) -> Self {
        Self { coefficient, order, volume_exponent: 1 - order as i32 }
    }

    pub fn with_exponent(coefficient: f64, order: u32, volume_exponent: i32) -> Self {
        Self { coefficient, order, volume_exponent }
    }

    /// The mass-action exponent this term would have by default.
    pub fn leading_exponent(&self) -> i32 {
        1 - self.order as i32
    }

    #[must_use]
    pub fn eval(&self, v: f64, n: u64) -> f64 {
        let ff = falling_factorial(n, self.order);
        if ff == 0.0 {
            return 0.0;
        }
        self.coefficient * v.powi(self.volume_exponent) * ff
    }

    /// Derivative with respect to `V` at fixed `n`; exact since the V-dependence is a power.
    #[must_use]
    pub fn eval_dv(&self, v: f64, n: u64) -> f64 {
        self.volume_exponent as f64 / v * self.eval(v, n)
    }
}

/// Binds a named scalar to selected term coefficients, so that a model becomes a
/// one-parameter family for bifurcation and phase scans.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanBinding {
    pub name: String,
    pub targets: Vec<(Side, usize)>,
}

/// Birth and death rate laws `u_n(V)`, `w_n(V)`.
///
/// `w_0` is never consulted: state 0 is a wall, and whether it absorbs is decided
/// by `u_0` alone.
#[derive(Debug, Clone, PartialEq)]
pub struct BirthDeathModel {
    birth: Vec<RateTerm>,
    death: Vec<RateTerm>,
    scan: Option<ScanBinding>,
}

impl BirthDeathModel {
    /// Validates term exponents and coefficients.
    ///
    /// Coefficients may be negative (the binomial model needs `k(e V - n)`); the
    /// resulting rates are checked for sign wherever they are evaluated.
    pub fn new(birth: Vec<RateTerm>, death: Vec<RateTerm>) -> Result<Self> {
        for (side, terms) in [(Side::Birth, &birth), (Side::Death, &death)] {
            for (i, t) in terms.iter().enumerate() {
                if !t.coefficient.is_finite() {
                    return Err(Error::InvalidModel(format!("{side} term {i} has a non-finite coefficient")));
                }
                if t.volume_exponent > t.leading_exponent() {
                    return Err(Error::DivergentExpansion {
                        side,
                        term: i,
                        order: t.order,
                        exponent: t.volume_exponent,
                    });
                }
            }
        }
        if birth.is_empty() && death.is_empty() {
            return Err(Error::InvalidModel("no rate terms".into()));
        }
        Ok(Self { birth, death, scan: None })
    }

    pub fn with_scan(mut self, binding: ScanBinding) -> Result<Self> {
        for &(side, i) in &binding.targets {
            if i >= self.terms(side).len() {
                return Err(Error::InvalidModel(format!(
                    "scan parameter '{}' targets {side} term {i}, which does not exist",
                    binding.name
                )));
            }
        }
        self.scan = Some(binding);
        Ok(self)
    }

    pub fn terms(&self, side: Side) -> &[RateTerm] {
        match side {
            Side::Birth => &self.birth,
            Side::Death => &self.death,
        }
    }

    pub fn scan(&self) -> Option<&ScanBinding> {
        self.scan.as_ref()
    }

    /// The model with every bound coefficient replaced by `value`.
    pub fn with_parameter(&self, value: f64) -> Result<Self> {
        let binding = self
            .scan
            .as_ref()
            .ok_or_else(|| Error::Precondition("model has no scan parameter".into()))?;
        let mut out = self.clone();
        for &(side, i) in &binding.targets {
            let terms = match side {
                Side::Birth => &mut out.birth,
                Side::Death => &mut out.death,
            };
            terms[i].coefficient = value;
        }
        Ok(out)
    }

    /// Adds a term to one side, e.g. a small constant birth rate that regularizes
    /// an absorbing state.
    pub fn with_term(&self, side: Side, term: RateTerm) -> Result<Self> {
        let (mut birth, mut death) = (self.birth.clone(), self.death.clone());
        match side {
            Side::Birth => birth.push(term),
            Side::Death => death.push(term),
        }
        let mut out = Self::new(birth, death)?;
        out.scan = self.scan.clone();
        Ok(out)
    }

    /// All coefficients multiplied by `factor`: the same chain on a rescaled clock.
    pub fn time_rescaled(&self, factor: f64) -> Self {
        let scale = |ts: &[RateTerm]| {
            ts.iter()
                .map(|t| RateTerm { coefficient: t.coefficient * factor, ..*t })
                .collect::<Vec<_>>()
        };
        Self { birth: scale(&self.birth), death: scale(&self.death), scan: self.scan.clone() }
    }

    fn side_rate(&self, side: Side, v: f64, n: u64) -> Result<f64> {
        let terms = self.terms(side);
        let mut sum = 0.0;
        let mut magnitude = 0.0;
        let mut worst = (0, 0.0);
        for (i, t) in terms.iter().enumerate() {
            let r = t.eval(v, n);
            sum += r;
            magnitude += r.abs();
            if r < worst.1 {
                worst = (i, r);
            }
        }
        // Signed terms that cancel exactly (u_N = 0 in the binomial model) can leave
        // a rounding residue of either sign.
        if sum < -1e-12 * magnitude {
            return Err(Error::NegativeRate { side, term: worst.0, state: n, value: sum });
        }
        Ok(sum.max(0.0))
    }

    /// Birth rate `u_n(V)`.
    pub fn birth_rate(&self, v: f64, n: u64) -> Result<f64> {
        self.side_rate(Side::Birth, v, n)
    }

    /// Death rate `w_n(V)`.
    pub fn death_rate(&self, v: f64, n: u64) -> Result<f64> {
        self.side_rate(Side::Death, v, n)
    }

    /// `(u_n(V), w_n(V))`, both checked non-negative.
    pub fn evaluate_rates(&self, v: f64, n: u64) -> Result<(f64, f64)> {
        if !(v > 0.0) {
            return Err(Error::Domain(format!("system size must be positive, got {v}")));
        }
        Ok((self.birth_rate(v, n)?, self.death_rate(v, n)?))
    }

    /// `(du_n/dV, dw_n/dV)` at fixed `n`.
    pub fn rate_derivatives_v(&self, v: f64, n: u64) -> (f64, f64) {
        let d = |ts: &[RateTerm]| ts.iter().map(|t| t.eval_dv(v, n)).sum::<f64>();
        (d(&self.birth), d(&self.death))
    }

    /// Whether state 0 has no way out.
    pub fn absorbing_at_zero(&self) -> bool {
        // u_0 only picks up order-0 terms, whose value does not depend on n.
        let u0: f64 = self.birth.iter().filter(|t| t.order == 0).map(|t| t.coefficient).sum();
        u0 <= 0.0
    }
}

/// Free-function form of [`BirthDeathModel::evaluate_rates`].
pub fn evaluate_rates(model: &BirthDeathModel, v: f64, n: u64) -> Result<(f64, f64)> {
    model.evaluate_rates(v, n)
}
