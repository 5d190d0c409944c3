use std::f64::consts::PI;
use std::sync::Arc;

use serde::Serialize;

use super::potential::PotentialGrid;
use crate::model::RateExpansion;
use crate::quadrature::{log_integrate, LogCumulativeIntegral};
use crate::{Error, Result};

/// `ln(ln r / (r - 1))` for `r > 0`, switching to the series
/// `1 - u/2 + u^2/3 - u^3/4` (`u = r - 1`) near `r = 1`, where the quotient is 0/0.
pub fn ln_ratio_factor(r: f64) -> f64 {
    let u = r - 1.0;
    if u.abs() < 1e-4 {
        (1.0 - u / 2.0 + u * u / 3.0 - u * u * u / 4.0).ln()
    } else {
        (r.ln() / u).ln()
    }
}

fn suggest_kramers(e: Error) -> Error {
    match e {
        Error::Quadrature(msg) => Error::Quadrature(format!(
            "{msg}; the asymptotic MFPT integral did not converge, use kramers_time for barrier crossings at this V"
        )),
        other => other,
    }
}

/// Asymptotic mean first passage time from `x` to `x2 > x` (reflecting at 0):
///
/// `V ∫_x^{x2} A(z) e^{V Phi(z)} / lambda0(z) ∫_0^z B(y) e^{-V Phi(y)} dy dz`
///
/// with `A = ln r/(r-1)` at `r = lambda0/mu0` and `B` the same factor at `mu0/lambda0`.
/// Everything is evaluated in log space; the inner integral is tabulated once
/// and reused along the outer one.
///
/// The outer limits are shifted by one lattice cell to `[x + 1/V, x2 + 1/V]`,
/// which is where the discrete double sum it approximates actually places its
/// outer index. Without the shift the result is off by the factor
/// `lambda0(x2)/mu0(x2)` whenever the outer integrand peaks at the upper limit.
pub fn mfpt_asymptotic(exp: &RateExpansion, potential: &PotentialGrid, v: f64, x: f64, x2: f64) -> Result<f64> {
    if !(v > 0.0) {
        return Err(Error::Domain(format!("V must be positive, got {v}")));
    }
    if !(x >= 0.0) || !(x2 >= x) {
        return Err(Error::Domain(format!("need 0 <= x <= x2, got x = {x}, x2 = {x2}")));
    }
    if x == x2 {
        return Ok(0.0);
    }
    let (lo, hi) = (x + 1.0 / v, x2 + 1.0 / v);
    if hi > potential.x_max() {
        return Err(Error::Domain(format!(
            "potential grid ends at {} but the integral needs Phi up to {hi}",
            potential.x_max()
        )));
    }

    let (pg, e) = (potential.clone(), exp.clone());
    let inner_integrand = Arc::new(move |y: f64| {
        let phi = pg.big_phi(y, v).unwrap_or(f64::NAN);
        ln_ratio_factor(e.mu0(y) / e.lambda0(y)) - v * phi
    });
    let inner = LogCumulativeIntegral::new(inner_integrand, 0.0, hi, 256, 1e-11).map_err(suggest_kramers)?;

    let outer = |z: f64| {
        let phi = potential.big_phi(z, v).unwrap_or(f64::NAN);
        let (m, l) = (exp.mu0(z), exp.lambda0(z));
        ln_ratio_factor(l / m) + v * phi - l.ln() + inner.eval(z).unwrap_or(f64::NAN)
    };
    let log_t = v.ln() + log_integrate(outer, lo, hi, 1e-10, 512).map_err(suggest_kramers)?;
    if log_t > f64::MAX.ln() {
        return Err(Error::Numerical(format!(
            "asymptotic MFPT overflows (ln T = {log_t:.1}); use kramers_time, which reports the exponent separately"
        )));
    }
    Ok(log_t.exp())
}

/// Whether a barrier survives at leading order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BistabilityClass {
    /// `phi0` itself has the barrier, so it grows linearly with `V`.
    Nonlinear,
    /// `phi0` is flat or downhill; only the `phi1` term holds the basin.
    Stochastic,
    /// `|Δphi0|` is too small at this `V` for the label to be meaningful.
    Indeterminate,
}

/// Kramers estimate of the escape time over one barrier.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct KramersEstimate {
    pub v: f64,
    pub x1_star: f64,
    pub x_ddag: f64,
    /// `V (phi0(x‡) - phi0(x1*))`.
    pub barrier_leading: f64,
    /// `phi1(x‡) - phi1(x1*)`.
    pub barrier_correction: f64,
    pub prefactor: f64,
    pub time: f64,
    /// The same formula with the `phi1` correction dropped from the exponent.
    pub time_leading_only: f64,
    pub bistability_class: BistabilityClass,
}

impl KramersEstimate {
    /// `ln time`, finite even when `time` itself overflows.
    pub fn log_time(&self) -> f64 {
        self.prefactor.ln() + self.barrier_leading + self.barrier_correction
    }
}

/// Kramers time
/// `2π / (lambda0(x‡) sqrt(phi0''(x1*) |phi0''(x‡)|)) · exp(V [Phi(x‡) - Phi(x1*)])`,
/// with `phi1/V` kept inside the exponent. Works in either direction (`x1*` left
/// or right of `x‡`).
pub fn kramers_time(exp: &RateExpansion, potential: &PotentialGrid, v: f64, x1_star: f64, x_ddag: f64) -> Result<KramersEstimate> {
    if !(v > 0.0) {
        return Err(Error::Domain(format!("V must be positive, got {v}")));
    }
    let c_basin = exp.phi0_second(x1_star);
    let c_barrier = exp.phi0_second(x_ddag);
    if !(c_basin > 0.0) {
        return Err(Error::Precondition(format!(
            "phi0'' must be positive at the basin x1* = {x1_star}, got {c_basin:e}"
        )));
    }
    if !(c_barrier < 0.0) {
        return Err(Error::Precondition(format!(
            "phi0'' must be negative at the barrier x‡ = {x_ddag}, got {c_barrier:e}"
        )));
    }
    let d_phi0 = potential.phi0(x_ddag)? - potential.phi0(x1_star)?;
    let d_phi1 = potential.phi1(x_ddag)? - potential.phi1(x1_star)?;
    let prefactor = 2.0 * PI / (exp.lambda0(x_ddag) * (c_basin * c_barrier.abs()).sqrt());
    let barrier_leading = v * d_phi0;
    Ok(KramersEstimate {
        v,
        x1_star,
        x_ddag,
        barrier_leading,
        barrier_correction: d_phi1,
        prefactor,
        time: prefactor * (barrier_leading + d_phi1).exp(),
        time_leading_only: prefactor * barrier_leading.exp(),
        bistability_class: if d_phi0 > 0.0 { BistabilityClass::Nonlinear } else { BistabilityClass::Stochastic },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::mfpt_exact_right;
    use crate::model::{build_expansion, Polynomial};
    use crate::presets;

    #[test]
    fn ratio_factor_is_continuous_across_the_switch() {
        for r in [1.0f64 - 1.0001e-4, 1.0 - 0.9999e-4, 1.0 + 0.9999e-4, 1.0 + 1.0001e-4] {
            let exact = (r.ln() / (r - 1.0)).ln();
            assert!((ln_ratio_factor(r) - exact).abs() < 1e-12);
        }
        assert_eq!(ln_ratio_factor(1.0), 0.0);
    }

    #[test]
    fn poisson_matches_exact_mfpt() {
        let model = presets::poisson(1.0, 2.0);
        let exp = build_expansion(&model).unwrap();
        let grid = PotentialGrid::new(&exp, 1.5).unwrap();
        let v = 200.0;
        let approx = mfpt_asymptotic(&exp, &grid, v, 0.5, 1.0).unwrap();
        let exact = mfpt_exact_right(&model, v, 100, 200).unwrap();
        assert!((approx / exact - 1.0).abs() < 0.1, "{approx} vs {exact}");
        assert_eq!(mfpt_asymptotic(&exp, &grid, v, 0.7, 0.7).unwrap(), 0.0);
    }

    /// Rates mirrored about x = 1: lambda0(x) = P(x), mu0(x) = P(2 - x).
    fn symmetric_well() -> RateExpansion {
        let lambda0 = Polynomial::new(vec![2.25, 0.75, -2.0, 1.0]);
        let mu0 = Polynomial::new(vec![3.75, -4.75, 4.0, -1.0]);
        RateExpansion {
            mu0_prime: mu0.derivative(),
            lambda0_prime: lambda0.derivative(),
            b: &mu0 - &lambda0,
            mu0,
            lambda0,
            mu1: Polynomial::zero(),
            lambda1: Polynomial::zero(),
        }
    }

    #[test]
    fn symmetric_double_well_escapes_equally() {
        let exp = symmetric_well();
        assert!(exp.drift(0.5).abs() < 1e-14 && exp.drift(1.0).abs() < 1e-14 && exp.drift(1.5).abs() < 1e-14);
        let grid = PotentialGrid::new(&exp, 2.0).unwrap();
        let left = kramers_time(&exp, &grid, 100.0, 0.5, 1.0).unwrap();
        let right = kramers_time(&exp, &grid, 100.0, 1.5, 1.0).unwrap();
        assert!((left.time / right.time - 1.0).abs() < 1e-9);
        assert_eq!(left.bistability_class, BistabilityClass::Nonlinear);
    }

    #[test]
    fn wrong_curvature_is_rejected() {
        let exp = symmetric_well();
        let grid = PotentialGrid::new(&exp, 2.0).unwrap();
        assert!(matches!(kramers_time(&exp, &grid, 100.0, 1.0, 0.5), Err(Error::Precondition(_))));
    }
}
