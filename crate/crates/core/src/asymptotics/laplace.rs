use std::f64::consts::{LN_2, PI};
use std::fmt;

use statrs::function::erf::erfc;

use crate::quadrature::{log_integrate, SharedFn};
use crate::{Error, Result};

/// A smooth potential `phi` on `[0, hi]` together with its first two derivatives.
#[derive(Clone)]
pub struct Profile {
    pub f: SharedFn,
    pub df: SharedFn,
    pub d2f: SharedFn,
    pub hi: f64,
}

impl fmt::Debug for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Profile").field("hi", &self.hi).finish_non_exhaustive()
    }
}

impl Profile {
    pub fn new(f: SharedFn, df: SharedFn, d2f: SharedFn, hi: f64) -> Self {
        Self { f, df, d2f, hi }
    }

    /// Interior zeros of `phi'` on `(0, hi)`, located by a sign scan and bisection.
    pub fn critical_points(&self) -> Vec<f64> {
        const GRID: usize = 2048;
        let df = &self.df;
        let h = self.hi / GRID as f64;
        let mut out = Vec::new();
        let mut prev = df(h * 0.5);
        for i in 1..GRID {
            let x = h * (i as f64 + 0.5);
            let cur = df(x);
            if prev == 0.0 {
                out.push(x - h);
            } else if prev.signum() != cur.signum() && cur != 0.0 {
                let (mut a, mut b) = (x - h, x);
                for _ in 0..200 {
                    let m = 0.5 * (a + b);
                    if df(m).signum() == df(a).signum() {
                        a = m;
                    } else {
                        b = m;
                    }
                    if b - a < 1e-15 * b.abs().max(1.0) {
                        break;
                    }
                }
                out.push(0.5 * (a + b));
            }
            prev = cur;
        }
        out
    }
}

/// A signed quantity stored as `(sign, ln|value|)`.
#[derive(Debug, Clone, Copy)]
struct Signed(f64, f64);

fn signed_log_sum(terms: &[Signed]) -> Result<f64> {
    let m = terms.iter().map(|t| t.1).fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return Err(Error::Numerical("Laplace terms are not finite".into()));
    }
    let s: f64 = terms.iter().map(|t| t.0 * (t.1 - m).exp()).sum();
    if !(s > 0.0) {
        return Err(Error::Numerical(format!(
            "Laplace pieces cancel (relative sum {s:e}); the point is too close to an extremum for this V"
        )));
    }
    Ok(m + s.ln())
}

/// Endpoint antiderivative of `e^{-V phi}`: `-e^{-V phi}/(V phi') (1 - phi''/(V phi'^2))`,
/// valid where `V phi'^2 / phi''` is large.
fn endpoint(p: &Profile, v: f64, y: f64) -> Signed {
    let (f, d1, d2) = ((p.f)(y), (p.df)(y), (p.d2f)(y));
    let corr = 1.0 - d2 / (v * d1 * d1);
    Signed(-d1.signum() * corr.signum(), -v * f - (v * d1.abs()).ln() + corr.abs().ln())
}

fn negate(s: Signed) -> Signed {
    Signed(-s.0, s.1)
}

/// The single interior critical point, or `None` for a monotone profile.
fn unique_extremum(p: &Profile) -> Result<Option<f64>> {
    let cps = p.critical_points();
    match cps.len() {
        0 => Ok(None),
        1 => Ok(Some(cps[0])),
        _ => Err(Error::Precondition(format!(
            "phi has {} critical points on (0, {}) at {:?}; split the integral so that each piece has at most one",
            cps.len(),
            p.hi,
            cps
        ))),
    }
}

fn check_args(p: &Profile, v: f64, x: f64) -> Result<()> {
    if !(v >= 10.0) {
        return Err(Error::Domain(format!("Laplace asymptotics need V >= 10, got {v}")));
    }
    if !(x > 0.0 && x <= p.hi) {
        return Err(Error::Domain(format!("x = {x} must lie in (0, {}]", p.hi)));
    }
    // The lower end enters through its endpoint expansion, which needs a slope
    // that dominates the curvature there.
    let (d1, d2) = ((p.df)(0.0), (p.d2f)(0.0));
    if !(v * d1 * d1 > d2.abs()) {
        return Err(Error::Precondition(format!(
            "phi'(0) = {d1:e} is too flat for the endpoint expansion at V = {v} (phi''(0) = {d2:e})"
        )));
    }
    Ok(())
}

/// Half-width unit of the boundary layer around a critical point.
fn layer_scale(v: f64, curvature: f64) -> f64 {
    (2.0 / (v * curvature.abs())).sqrt()
}

const LAYER: f64 = 4.0;

/// `(1/V) ln ∫_0^x e^{-V phi(y)} dy` for a profile whose only interior critical
/// point is a minimum `x‡`.
///
/// Away from `x‡` the integral is a difference of endpoint terms (plus the full
/// Gaussian once `x` is past the minimum). Within `|x - x‡| < 4 w`,
/// `w = sqrt(2/(V phi''(x‡)))`, the Gaussian is cut by `(1 + erf σ)/2` with
/// `σ = (x - x‡)/w`.
pub fn laplace_log_min(p: &Profile, v: f64, x: f64) -> Result<f64> {
    check_args(p, v, x)?;
    let start = negate(endpoint(p, v, 0.0));
    let Some(xd) = unique_extremum(p)? else {
        return Ok(signed_log_sum(&[endpoint(p, v, x), start])? / v);
    };
    let c = (p.d2f)(xd);
    if !(c > 0.0) {
        return Err(Error::Precondition(format!(
            "the critical point at {xd} is not a minimum (phi'' = {c:e}); use laplace_log_max"
        )));
    }
    let w = layer_scale(v, c);
    let sigma = (x - xd) / w;
    let log_gauss = -v * (p.f)(xd) + 0.5 * (2.0 * PI / (v * c)).ln();
    let terms = if sigma <= -LAYER {
        vec![endpoint(p, v, x), start]
    } else if sigma >= LAYER {
        vec![Signed(1.0, log_gauss), endpoint(p, v, x), start]
    } else {
        // (1 + erf σ)/2 = erfc(-σ)/2, which stays above 1e-8 inside the layer
        vec![Signed(1.0, log_gauss - LN_2 + erfc(-sigma).ln()), start]
    };
    Ok(signed_log_sum(&terms)? / v)
}

/// `(1/V) ln ∫_0^x e^{-V phi(y)} dy` for a profile whose only interior critical
/// point is a maximum. The integrand is then largest at the ends of `[0, x]`;
/// inside the barrier layer the upper end contributes an exponentially smaller
/// amount than the lower one and is dropped.
pub fn laplace_log_max(p: &Profile, v: f64, x: f64) -> Result<f64> {
    check_args(p, v, x)?;
    let start = negate(endpoint(p, v, 0.0));
    let Some(xd) = unique_extremum(p)? else {
        return Ok(signed_log_sum(&[endpoint(p, v, x), start])? / v);
    };
    let c = (p.d2f)(xd);
    if !(c < 0.0) {
        return Err(Error::Precondition(format!(
            "the critical point at {xd} is not a maximum (phi'' = {c:e}); use laplace_log_min"
        )));
    }
    let sigma = (x - xd) / layer_scale(v, c);
    let terms = if sigma.abs() < LAYER { vec![start] } else { vec![endpoint(p, v, x), start] };
    Ok(signed_log_sum(&terms)? / v)
}

/// Reference value of the same log-integral by adaptive quadrature in log space.
pub fn laplace_log_quadrature(p: &Profile, v: f64, x: f64) -> Result<f64> {
    let f = &p.f;
    Ok(log_integrate(|y| -v * f(y), 0.0, x, 1e-12, 512)? / v)
}
