use crate::quadrature::{integrate, QuadOptions};
use crate::{Error, Result};

/// Taylor coefficients `nu_l` of `x / (e^x - 1) - 1 = Σ_{l>=1} nu_l x^l`, i.e. `B_l / l!`.
#[derive(Debug, Clone, PartialEq)]
pub struct LemmaCoefficients {
    /// `nu[l]` for `l = 0..=order`; `nu[0]` is 1 (the coefficient before subtracting 1).
    pub nu: Vec<f64>,
}

impl LemmaCoefficients {
    /// Generated from `Σ_{j=0}^{m} nu_j / (m+1-j)! = 0` (the Bernoulli recurrence
    /// divided through by `(m+1)!`).
    pub fn new(order: usize) -> Self {
        let mut inv_fact = vec![1.0; order + 2];
        for k in 1..inv_fact.len() {
            inv_fact[k] = inv_fact[k - 1] / k as f64;
        }
        let mut nu = vec![1.0];
        for m in 1..=order {
            let s: f64 = (0..m).map(|j| nu[j] * inv_fact[m + 1 - j]).sum();
            nu.push(-s);
        }
        Self { nu }
    }

    pub fn get(&self, l: usize) -> f64 {
        self.nu[l]
    }
}

/// The expansion `F(z, V) = F0(z) + F1(z)/V + F2(z)/V^2` fed to [`lemma_sum`], with
/// `F0'` supplied explicitly.
pub struct LemmaInput<'a> {
    pub f0: &'a dyn Fn(f64) -> f64,
    pub f0_prime: &'a dyn Fn(f64) -> f64,
    pub f1: &'a dyn Fn(f64) -> f64,
    pub f2: &'a dyn Fn(f64) -> f64,
}

/// Asymptotic value of `Σ_{l=0}^{xV-1} F(l/V, V) / V` through order `V^-2`.
///
/// When `xV` is not an integer the sum runs to `floor(xV) - 1`, and the formula is
/// applied at `x = floor(xV)/V`, which is the upper limit that sum actually has.
pub fn lemma_sum(input: &LemmaInput<'_>, x: f64, v: f64) -> Result<f64> {
    if !(v > 0.0) || !(x >= 0.0) {
        return Err(Error::Domain(format!("lemma_sum needs x >= 0 and V > 0, got x = {x}, V = {v}")));
    }
    let x = (x * v + 1e-9).floor() / v;
    let nu = LemmaCoefficients::new(2);
    let opts = QuadOptions { abs_tol: 1e-14, rel_tol: 1e-14, ..QuadOptions::default() };
    let i0 = integrate(input.f0, 0.0, x, opts)?.value;
    let i1 = integrate(input.f1, 0.0, x, opts)?.value;
    let i2 = integrate(input.f2, 0.0, x, opts)?.value;
    let d = |f: &dyn Fn(f64) -> f64| f(x) - f(0.0);
    let order1 = nu.get(1) * d(input.f0) + i1;
    let order2 = nu.get(2) * d(input.f0_prime) + nu.get(1) * d(input.f1) + i2;
    Ok(i0 + order1 / v + order2 / (v * v))
}
