use std::sync::Arc;

use serde::Serialize;

use crate::model::RateExpansion;
use crate::quadrature::{integrate, CumulativeIntegral, QuadOptions};
use crate::{Error, Result};

/// Rejects intervals on which `mu0` or `lambda0` vanish or turn negative away from 0.
fn check_positive(exp: &RateExpansion, x: f64) -> Result<()> {
    const PROBES: usize = 512;
    for i in 1..=PROBES {
        let z = x * i as f64 / PROBES as f64;
        if exp.mu0(z) <= 0.0 {
            return Err(Error::Singular { what: "mu0", at: z });
        }
        if exp.lambda0(z) <= 0.0 {
            return Err(Error::Singular { what: "lambda0", at: z });
        }
    }
    Ok(())
}

fn quad_opts() -> QuadOptions {
    QuadOptions { abs_tol: 1e-13, rel_tol: 1e-13, ..QuadOptions::default() }
}

/// `phi0(x) = ∫_0^x ln(lambda0/mu0)`, the leading-order potential (`phi0(0) = 0`).
pub fn phi0(exp: &RateExpansion, x: f64) -> Result<f64> {
    if x < 0.0 {
        return Err(Error::Domain(format!("phi0 is defined for x >= 0, got {x}")));
    }
    check_positive(exp, x)?;
    Ok(integrate(|z| exp.phi0_prime(z), 0.0, x, quad_opts())?.value)
}

/// `phi1(x) = ∫_0^x (lambda1/lambda0 - mu1/mu0) + ln(mu0 lambda0)/2`, up to the
/// additive constant every consumer differences away.
pub fn phi1(exp: &RateExpansion, x: f64) -> Result<f64> {
    if x <= 0.0 {
        return Err(Error::Domain(format!("phi1 needs x > 0, got {x}")));
    }
    check_positive(exp, x)?;
    let i = integrate(|z| exp.lambda1(z) / exp.lambda0(z) - exp.mu1(z) / exp.mu0(z), 0.0, x, quad_opts())?;
    Ok(i.value + 0.5 * (exp.mu0(x) * exp.lambda0(x)).ln())
}

/// Quadrature bookkeeping attached to a [`PotentialGrid`].
#[derive(Debug, Clone, Serialize)]
pub struct QuadratureInfo {
    pub rule: &'static str,
    pub panels: usize,
    pub error_estimate: f64,
}

/// `phi0`, `phi1` and `Phi(x, V) = phi0 + phi1/V` on `[0, x_max]`, tabulated at
/// panel nodes and completed by a short integral from the nearest node.
#[derive(Debug, Clone)]
pub struct PotentialGrid {
    exp: RateExpansion,
    phi0: CumulativeIntegral,
    phi1_integral: CumulativeIntegral,
}

impl PotentialGrid {
    pub fn new(exp: &RateExpansion, x_max: f64) -> Result<Self> {
        Self::with_panels(exp, x_max, 256)
    }

    pub fn with_panels(exp: &RateExpansion, x_max: f64, panels: usize) -> Result<Self> {
        if !(x_max > 0.0) {
            return Err(Error::Domain(format!("potential grid needs x_max > 0, got {x_max}")));
        }
        check_positive(exp, x_max)?;
        let e0 = exp.clone();
        let f0 = Arc::new(move |z: f64| e0.phi0_prime(z));
        let e1 = exp.clone();
        let f1 = Arc::new(move |z: f64| e1.lambda1(z) / e1.lambda0(z) - e1.mu1(z) / e1.mu0(z));
        let opts = QuadOptions { abs_tol: 1e-13, rel_tol: 1e-14, ..QuadOptions::default() };
        Ok(Self {
            exp: exp.clone(),
            phi0: CumulativeIntegral::new(f0, 0.0, x_max, panels, opts)?,
            phi1_integral: CumulativeIntegral::new(f1, 0.0, x_max, panels, opts)?,
        })
    }

    pub fn expansion(&self) -> &RateExpansion {
        &self.exp
    }

    pub fn x_max(&self) -> f64 {
        self.phi0.range().1
    }

    pub fn phi0(&self, x: f64) -> Result<f64> {
        self.phi0.eval(x)
    }

    pub fn phi1(&self, x: f64) -> Result<f64> {
        Ok(self.phi1_integral.eval(x)? + 0.5 * (self.exp.mu0(x) * self.exp.lambda0(x)).ln())
    }

    /// `Phi(x, V) = phi0(x) + phi1(x)/V`.
    pub fn big_phi(&self, x: f64, v: f64) -> Result<f64> {
        Ok(self.phi0(x)? + self.phi1(x)? / v)
    }

    pub fn info(&self) -> QuadratureInfo {
        QuadratureInfo {
            rule: "adaptive Gauss-Kronrod 7/15",
            panels: self.phi0.panels(),
            error_estimate: self.phi0.error + self.phi1_integral.error,
        }
    }

    /// Rows `(x, phi0, phi1, Phi)` on a uniform grid of `points` over `[x_lo, x_hi]`.
    pub fn sample(&self, x_lo: f64, x_hi: f64, points: usize, v: f64) -> Result<Vec<PotentialRow>> {
        let points = points.max(2);
        (0..points)
            .map(|i| {
                let x = x_lo + (x_hi - x_lo) * i as f64 / (points - 1) as f64;
                let (p0, p1) = (self.phi0(x)?, self.phi1(x)?);
                Ok(PotentialRow { x, phi0: p0, phi1: p1, phi_at_v: p0 + p1 / v })
            })
            .collect()
    }
}

/// One line of the potential CSV.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PotentialRow {
    pub x: f64,
    pub phi0: f64,
    pub phi1: f64,
    #[serde(rename = "Phi_at_V")]
    pub phi_at_v: f64,
}
