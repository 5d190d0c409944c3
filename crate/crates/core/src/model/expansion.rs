use super::{BirthDeathModel, Polynomial, RateTerm, Side};
use crate::Result;

/// First two orders of the large-`V` expansion of the rates:
///
/// `u_{xV}(V) / V = mu0(x) + mu1(x)/V + O(V^-2)` and likewise `lambda0`, `lambda1`
/// for the death rate.
#[derive(Debug, Clone, PartialEq)]
pub struct RateExpansion {
    pub mu0: Polynomial,
    pub mu1: Polynomial,
    pub lambda0: Polynomial,
    pub lambda1: Polynomial,
    pub mu0_prime: Polynomial,
    pub lambda0_prime: Polynomial,
    /// Deterministic drift `mu0 - lambda0`.
    pub b: Polynomial,
}

fn expand(terms: &[RateTerm]) -> (Polynomial, Polynomial) {
    let mut p0 = Polynomial::zero();
    let mut p1 = Polynomial::zero();
    for t in terms {
        let k = t.order as usize;
        if t.volume_exponent == t.leading_exponent() {
            // (xV)(xV-1)...(xV-k+1) = (xV)^k - k(k-1)/2 (xV)^(k-1) + ...
            p0.add_term(t.coefficient, k);
            if k >= 2 {
                p1.add_term(-t.coefficient * (k * (k - 1)) as f64 / 2.0, k - 1);
            }
        } else if t.volume_exponent == t.leading_exponent() - 1 {
            p1.add_term(t.coefficient, k);
        }
        // Anything smaller only shows up at O(V^-2) and beyond.
    }
    (p0, p1)
}

impl RateExpansion {
    pub fn mu0(&self, x: f64) -> f64 {
        self.mu0.eval(x)
    }
    pub fn mu1(&self, x: f64) -> f64 {
        self.mu1.eval(x)
    }
    pub fn lambda0(&self, x: f64) -> f64 {
        self.lambda0.eval(x)
    }
    pub fn lambda1(&self, x: f64) -> f64 {
        self.lambda1.eval(x)
    }
    pub fn mu0_prime(&self, x: f64) -> f64 {
        self.mu0_prime.eval(x)
    }
    pub fn lambda0_prime(&self, x: f64) -> f64 {
        self.lambda0_prime.eval(x)
    }
    pub fn drift(&self, x: f64) -> f64 {
        self.mu0(x) - self.lambda0(x)
    }
    pub fn drift_prime(&self, x: f64) -> f64 {
        self.mu0_prime(x) - self.lambda0_prime(x)
    }

    /// `phi0'(x) = ln(lambda0/mu0)`.
    pub fn phi0_prime(&self, x: f64) -> f64 {
        (self.lambda0(x) / self.mu0(x)).ln()
    }

    /// `phi0''(x) = lambda0'/lambda0 - mu0'/mu0`.
    pub fn phi0_second(&self, x: f64) -> f64 {
        self.lambda0_prime(x) / self.lambda0(x) - self.mu0_prime(x) / self.mu0(x)
    }

    /// Derivative of `phi1`: `lambda1/lambda0 - mu1/mu0 + (mu0'/mu0 + lambda0'/lambda0)/2`.
    pub fn phi1_prime(&self, x: f64) -> f64 {
        let (m, l) = (self.mu0(x), self.lambda0(x));
        self.lambda1(x) / l - self.mu1(x) / m + 0.5 * (self.mu0_prime(x) / m + self.lambda0_prime(x) / l)
    }
}

/// Expands both rate laws to first order in `1/V`.
///
/// Construction of [`BirthDeathModel`] already rejects exponents that would make
/// the leading order diverge, so this cannot fail for a valid model; the `Result`
/// keeps the signature stable for callers building models on the fly.
pub fn build_expansion(model: &BirthDeathModel) -> Result<RateExpansion> {
    let (mu0, mu1) = expand(model.terms(Side::Birth));
    let (lambda0, lambda1) = expand(model.terms(Side::Death));
    let b = &mu0 - &lambda0;
    Ok(RateExpansion {
        mu0_prime: mu0.derivative(),
        lambda0_prime: lambda0.derivative(),
        mu0,
        mu1,
        lambda0,
        lambda1,
        b,
    })
}
