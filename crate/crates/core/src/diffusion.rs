//! Continuous diffusions `∂f/∂t = ∂/∂x (ε D ∂f/∂x - b f)` and three ways of
//! building one from a birth-death chain.
//!
//! A [`DiffusionSpec`] keeps `ε` separate from `D`, so the same type serves a
//! free-standing diffusion (any `ε`) and the large-`V` approximations (`ε = 1/V`).

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::asymptotics::ln_ratio_factor;
use crate::model::RateExpansion;
use crate::quadrature::{integrate, log_integrate, CumulativeIntegral, LogCumulativeIntegral, QuadOptions, SharedFn};
use crate::{Error, Result};

/// Distance kept from the ends of an approximation's domain, where mass-action
/// diffusion coefficients typically vanish.
pub const DOMAIN_MARGIN: f64 = 1e-6;

/// Where a [`DiffusionSpec`] came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    KramersMoyal,
    Hgtt,
    Effective,
    User,
}

/// Diffusion coefficient `D`, drift `b` and noise scale `ε` on `[lo, hi]`.
#[derive(Clone)]
pub struct DiffusionSpec {
    pub d: SharedFn,
    pub b: SharedFn,
    pub epsilon: f64,
    pub lo: f64,
    pub hi: f64,
    pub provenance: Provenance,
}

impl fmt::Debug for DiffusionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DiffusionSpec")
            .field("epsilon", &self.epsilon)
            .field("domain", &(self.lo, self.hi))
            .field("provenance", &self.provenance)
            .finish_non_exhaustive()
    }
}

impl DiffusionSpec {
    pub fn new(
        d: impl Fn(f64) -> f64 + Send + Sync + 'static,
        b: impl Fn(f64) -> f64 + Send + Sync + 'static,
        epsilon: f64,
        lo: f64,
        hi: f64,
    ) -> Result<Self> {
        if !(epsilon > 0.0) {
            return Err(Error::Domain(format!("epsilon must be positive, got {epsilon}")));
        }
        if !(hi > lo) {
            return Err(Error::Domain(format!("empty domain [{lo}, {hi}]")));
        }
        Ok(Self { d: Arc::new(d), b: Arc::new(b), epsilon, lo, hi, provenance: Provenance::User })
    }

    fn with_provenance(mut self, p: Provenance) -> Self {
        self.provenance = p;
        self
    }

    /// The diffusion coefficient as it appears in the generator, `ε D(x)`.
    pub fn physical_diffusion(&self, x: f64) -> f64 {
        self.epsilon * (self.d)(x)
    }

    fn check_range(&self, a: f64, b: f64) -> Result<()> {
        let tol = 1e-12 * (self.hi - self.lo);
        if a < self.lo - tol || b > self.hi + tol || a > b {
            return Err(Error::Domain(format!(
                "[{a}, {b}] is not inside the diffusion domain [{}, {}]",
                self.lo, self.hi
            )));
        }
        const PROBES: usize = 256;
        for i in 0..=PROBES {
            let x = a + (b - a) * i as f64 / PROBES as f64;
            if !((self.d)(x) > 0.0) {
                return Err(Error::Singular { what: "D", at: x });
            }
        }
        Ok(())
    }

    /// Tabulates `Psi` over the whole domain.
    pub fn psi_potential(&self) -> Result<PsiPotential> {
        self.check_range(self.lo, self.hi)?;
        let (d, b) = (self.d.clone(), self.b.clone());
        let integrand: SharedFn = Arc::new(move |z| -b(z) / d(z));
        let opts = QuadOptions { abs_tol: 1e-13, rel_tol: 1e-13, ..QuadOptions::default() };
        let table = CumulativeIntegral::new(integrand, self.lo, self.hi, 128, opts)?;
        Ok(PsiPotential { table })
    }
}

/// `Psi(x) = -∫_lo^x b/D`, the potential of the diffusion.
#[derive(Debug, Clone)]
pub struct PsiPotential {
    table: CumulativeIntegral,
}

impl PsiPotential {
    pub fn eval(&self, x: f64) -> Result<f64> {
        self.table.eval(x)
    }

    /// Summed quadrature error estimate of the table.
    pub fn error_estimate(&self) -> f64 {
        self.table.error
    }
}

/// `Psi(x) = -∫_lo^x b(z)/D(z) dz`.
pub fn psi(spec: &DiffusionSpec, x: f64) -> Result<f64> {
    spec.check_range(spec.lo, x)?;
    let opts = QuadOptions { abs_tol: 1e-12, rel_tol: 1e-12, ..QuadOptions::default() };
    Ok(integrate(|z| -(spec.b)(z) / (spec.d)(z), spec.lo, x, opts)?.value)
}

/// Normalized stationary density `A e^{-Psi/ε}` on the diffusion's domain.
#[derive(Debug, Clone)]
pub struct StationaryDensity {
    psi: PsiPotential,
    epsilon: f64,
    log_norm: f64,
}

impl StationaryDensity {
    pub fn new(spec: &DiffusionSpec) -> Result<Self> {
        let psi = spec.psi_potential()?;
        let eps = spec.epsilon;
        let log_norm = log_integrate(|x| -psi.eval(x).unwrap_or(f64::NAN) / eps, spec.lo, spec.hi, 1e-12, 512)?;
        if !log_norm.is_finite() {
            return Err(Error::Numerical(format!("stationary density is not normalizable (ln ∫ = {log_norm})")));
        }
        Ok(Self { psi, epsilon: eps, log_norm })
    }

    pub fn log_density(&self, x: f64) -> Result<f64> {
        Ok(-self.psi.eval(x)? / self.epsilon - self.log_norm)
    }
}

/// `ln f^ss(x)`; builds a [`StationaryDensity`] each call, so prefer the type for grids.
pub fn diffusion_stationary_logdensity(spec: &DiffusionSpec, x: f64) -> Result<f64> {
    StationaryDensity::new(spec)?.log_density(x)
}

/// Mean first passage time from `x1` to `x2` with a reflecting wall at `x0`:
/// `∫_{x1}^{x2} e^{Psi(z)/ε} / (ε D(z)) ∫_{x0}^z e^{-Psi(y)/ε} dy dz`.
pub fn diffusion_mfpt(spec: &DiffusionSpec, x0: f64, x1: f64, x2: f64) -> Result<f64> {
    if !(x0 <= x1 && x1 <= x2) {
        return Err(Error::Domain(format!("need x0 <= x1 <= x2, got {x0}, {x1}, {x2}")));
    }
    if x1 == x2 {
        return Ok(0.0);
    }
    spec.check_range(x0, x2)?;
    let psi = spec.psi_potential()?;
    let eps = spec.epsilon;
    let p = psi.clone();
    let inner = LogCumulativeIntegral::new(Arc::new(move |y| -p.eval(y).unwrap_or(f64::NAN) / eps), x0, x2, 128, 1e-12)?;
    let outer = |z: f64| {
        psi.eval(z).unwrap_or(f64::NAN) / eps - (eps * (spec.d)(z)).ln() + inner.eval(z).unwrap_or(f64::NAN)
    };
    Ok(log_integrate(outer, x1, x2, 1e-11, 512)?.exp())
}

/// Mirror image of [`diffusion_mfpt`]: passage from `x1` down to `x2 <= x1` with a
/// reflecting wall at `x0 >= x1`.
pub fn diffusion_mfpt_left(spec: &DiffusionSpec, x0: f64, x1: f64, x2: f64) -> Result<f64> {
    if !(x2 <= x1 && x1 <= x0) {
        return Err(Error::Domain(format!("need x2 <= x1 <= x0, got {x2}, {x1}, {x0}")));
    }
    if x1 == x2 {
        return Ok(0.0);
    }
    spec.check_range(x2, x0)?;
    let psi = spec.psi_potential()?;
    let eps = spec.epsilon;
    let p = psi.clone();
    // ∫_z^{x0} e^{-Psi/ε}, tabulated in the reflected variable t = x0 - y
    let inner = LogCumulativeIntegral::new(
        Arc::new(move |t| -p.eval(x0 - t).unwrap_or(f64::NAN) / eps),
        0.0,
        x0 - x2,
        128,
        1e-12,
    )?;
    let outer = |z: f64| {
        psi.eval(z).unwrap_or(f64::NAN) / eps - (eps * (spec.d)(z)).ln() + inner.eval(x0 - z).unwrap_or(f64::NAN)
    };
    Ok(log_integrate(outer, x2, x1, 1e-11, 512)?.exp())
}

/// Stationary flux through `x2` for the renewal set-up (reflect at `x1`, absorb
/// at `x2`, reinject at `x1`):
/// `1/J = ∫_{x1}^{x2} e^{-Psi(y)/ε} ∫_y^{x2} e^{Psi(z)/ε} / (ε D(z)) dz dy`.
///
/// `x1 == x2` gives an infinite flux, reported as an error.
pub fn stationary_flux(spec: &DiffusionSpec, x1: f64, x2: f64) -> Result<f64> {
    if x1 == x2 {
        return Err(Error::Numerical(format!("stationary flux diverges for x1 = x2 = {x1}")));
    }
    if !(x1 < x2) {
        return Err(Error::Domain(format!("need x1 < x2, got {x1}, {x2}")));
    }
    spec.check_range(x1, x2)?;
    let psi = spec.psi_potential()?;
    let eps = spec.epsilon;
    let (p, d) = (psi.clone(), spec.d.clone());
    // ∫_y^{x2} as a prefix integral in t = x2 - z, so no cancellation occurs
    let inner = LogCumulativeIntegral::new(
        Arc::new(move |t| {
            let z = x2 - t;
            p.eval(z).unwrap_or(f64::NAN) / eps - (eps * d(z)).ln()
        }),
        0.0,
        x2 - x1,
        128,
        1e-12,
    )?;
    let outer = |y: f64| -psi.eval(y).unwrap_or(f64::NAN) / eps + inner.eval(x2 - y).unwrap_or(f64::NAN);
    Ok((-log_integrate(outer, x1, x2, 1e-11, 512)?).exp())
}

/// Cycle flux on a ring cut at `x1`/`x2`, given both passage times:
/// `(e^{-Psi(x2)/ε} - e^{-Psi(x1)/ε}) / (T12 e^{-Psi(x2)/ε} + T21 e^{-Psi(x1)/ε})`.
pub fn cycle_flux(spec: &DiffusionSpec, x1: f64, x2: f64, t12: f64, t21: f64) -> Result<f64> {
    if !(t12.is_finite() && t21.is_finite() && t12 >= 0.0 && t21 >= 0.0) {
        return Err(Error::Domain(format!("passage times must be finite and non-negative, got {t12}, {t21}")));
    }
    let (l1, l2) = (-psi(spec, x1)? / spec.epsilon, -psi(spec, x2)? / spec.epsilon);
    let m = l1.max(l2);
    let (e1, e2) = ((l1 - m).exp(), (l2 - m).exp());
    let den = t12 * e2 + t21 * e1;
    if den == 0.0 {
        return Err(Error::Numerical("cycle flux denominator vanishes".into()));
    }
    Ok((e2 - e1) / den)
}

/// `ln r / (r - 1)` with the series `1 - u/2 + u^2/3 - u^3/4` (`u = r - 1`) near 1.
fn ratio_factor(r: f64) -> f64 {
    let u = r - 1.0;
    if u.abs() < 1e-4 {
        1.0 - u / 2.0 + u * u / 3.0 - u * u * u / 4.0
    } else {
        r.ln() / u
    }
}

fn margins(lo: f64, hi: f64) -> Result<(f64, f64)> {
    let (a, b) = (lo + DOMAIN_MARGIN, hi - DOMAIN_MARGIN);
    if !(b > a) {
        return Err(Error::Domain(format!("domain [{lo}, {hi}] is too small")));
    }
    Ok((a, b))
}

/// Kramers-Moyal truncation at order `1/V`:
/// `D = (mu0 + lambda0)/2 + (lambda1 + mu1 + lambda0' - mu0')/(2V)` and
/// `b = mu0 - lambda0 + (mu1 - lambda1 - (lambda0' + mu0')/2)/V`, with `ε = 1/V`.
pub fn km_approx(exp: &RateExpansion, v: f64, lo: f64, hi: f64) -> Result<DiffusionSpec> {
    let (a, b) = margins(lo, hi)?;
    let (e1, e2) = (exp.clone(), exp.clone());
    let d = move |x: f64| {
        0.5 * (e1.mu0(x) + e1.lambda0(x))
            + (e1.lambda1(x) + e1.mu1(x) + e1.lambda0_prime(x) - e1.mu0_prime(x)) / (2.0 * v)
    };
    let drift = move |x: f64| {
        e2.drift(x) + (e2.mu1(x) - e2.lambda1(x) - 0.5 * (e2.lambda0_prime(x) + e2.mu0_prime(x))) / v
    };
    Ok(DiffusionSpec::new(d, drift, 1.0 / v, a, b)?.with_provenance(Provenance::KramersMoyal))
}

/// The HGTT diffusion `D = (mu0 - lambda0)/(ln mu0 - ln lambda0)`, `b = mu0 - lambda0`,
/// `ε = 1/V`. Near `mu0 = lambda0` the coefficient tends to `lambda0`.
pub fn hgtt_approx(exp: &RateExpansion, v: f64, lo: f64, hi: f64) -> Result<DiffusionSpec> {
    let (a, b) = margins(lo, hi)?;
    let (e1, e2) = (exp.clone(), exp.clone());
    let d = move |x: f64| d_hgtt(e1.mu0(x), e1.lambda0(x));
    let drift = move |x: f64| e2.drift(x);
    Ok(DiffusionSpec::new(d, drift, 1.0 / v, a, b)?.with_provenance(Provenance::Hgtt))
}

/// `(mu0 - lambda0)/(ln mu0 - ln lambda0)`.
pub fn d_hgtt(mu0: f64, lambda0: f64) -> f64 {
    lambda0 / ratio_factor(mu0 / lambda0)
}

/// Coefficients of the diffusion whose MFPT integral has the same form as the
/// asymptotic MFPT of the chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EffectiveDiffusion {
    pub d_tilde: f64,
    pub b_tilde: f64,
    /// `c` in `PsiTilde(x, V) = Phi(x, V) + c(x)/V`, i.e. `ln((mu0/lambda0 - 1)/(ln mu0 - ln lambda0))`.
    pub psi_correction: f64,
}

/// Effective `D~ = (1/mu0) ((mu0 - lambda0)/(ln mu0 - ln lambda0))^2` and
/// `b~ = (1 - lambda0/mu0)/(ln mu0 - ln lambda0) · (mu0 - lambda0)` at `x`.
pub fn effective_diffusion(exp: &RateExpansion, x: f64) -> Result<EffectiveDiffusion> {
    let (m, l) = (exp.mu0(x), exp.lambda0(x));
    if !(m > 0.0) {
        return Err(Error::Singular { what: "mu0", at: x });
    }
    if !(l > 0.0) {
        return Err(Error::Singular { what: "lambda0", at: x });
    }
    let g = ratio_factor(m / l);
    Ok(EffectiveDiffusion {
        d_tilde: l * l / (m * g * g),
        b_tilde: (m - l) / ratio_factor(l / m),
        psi_correction: -g.ln(),
    })
}

/// The effective diffusion as a spec (`ε = 1/V`) whose MFPT integral is the
/// asymptotic MFPT of the chain.
///
/// That needs the full potential `PsiTilde = phi0 + (phi1 + c)/V`, so the drift
/// is `-D~ PsiTilde'` rather than the leading-order `b~`, which reproduces only
/// `phi0` and would lose an O(1) factor in every passage time.
pub fn effective_spec(exp: &RateExpansion, v: f64, lo: f64, hi: f64) -> Result<DiffusionSpec> {
    let (a, b) = margins(lo, hi)?;
    let (e1, e2) = (exp.clone(), exp.clone());
    let d = move |x: f64| effective_diffusion(&e1, x).map_or(f64::NAN, |e| e.d_tilde);
    let drift = move |x: f64| {
        let Ok(eff) = effective_diffusion(&e2, x) else { return f64::NAN };
        let c = |y: f64| -ln_ratio_factor(e2.mu0(y) / e2.lambda0(y));
        // relative step: the domain may start just above x = 0
        let h = 1e-5 * x.abs().max(1e-9);
        let c_prime = (c(x + h) - c(x - h)) / (2.0 * h);
        -eff.d_tilde * (e2.phi0_prime(x) + (e2.phi1_prime(x) + c_prime) / v)
    };
    Ok(DiffusionSpec::new(d, drift, 1.0 / v, a, b)?.with_provenance(Provenance::Effective))
}

/// Residual of the leading-order WKB equation
/// `mu0 (e^{phi0'} - 1) + lambda0 (e^{-phi0'} - 1)`, zero for `phi0' = ln(lambda0/mu0)`.
pub fn hu_residual(exp: &RateExpansion, x: f64, phi0_prime: f64) -> f64 {
    exp.mu0(x) * phi0_prime.exp_m1() + exp.lambda0(x) * (-phi0_prime).exp_m1()
}

/// One row of the diffusion comparison table.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ComparisonRow {
    pub x: f64,
    #[serde(rename = "D_km")]
    pub d_km: f64,
    #[serde(rename = "D_hgtt")]
    pub d_hgtt: f64,
    #[serde(rename = "D_tilde")]
    pub d_tilde: f64,
    pub b: f64,
    pub phi0_prime: f64,
    /// Leading-order `d ln f/dx` of the KM density, `2V (mu0 - lambda0)/(mu0 + lambda0)`.
    pub gradient_km: f64,
    /// Leading-order `d ln f/dx` of the HGTT density, `V ln(mu0/lambda0)`.
    pub gradient_hgtt: f64,
}

/// Leading-order comparison of the three approximations at each `x`.
pub fn compare(exp: &RateExpansion, v: f64, xs: &[f64]) -> Result<Vec<ComparisonRow>> {
    xs.iter()
        .map(|&x| {
            let (m, l) = (exp.mu0(x), exp.lambda0(x));
            let eff = effective_diffusion(exp, x)?;
            let d_km = 0.5 * (m + l);
            let b = m - l;
            let d_h = d_hgtt(m, l);
            Ok(ComparisonRow {
                x,
                d_km,
                d_hgtt: d_h,
                d_tilde: eff.d_tilde,
                b,
                phi0_prime: exp.phi0_prime(x),
                gradient_km: v * b / d_km,
                gradient_hgtt: v * b / d_h,
            })
        })
        .collect()
}
