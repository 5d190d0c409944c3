use serde::Serialize;

use crate::exact::{detect_absorbing, stationary_distribution, Absorption};
use crate::model::BirthDeathModel;
use crate::{Error, Result};

/// Enthalpic/entropic split `Phi(x, V) = phi0~(x, V) + phi1~(x, V)/V` on a grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VanthoffCurves {
    pub v: f64,
    pub x: Vec<f64>,
    /// `∂(V Phi)/∂V` at fixed `x`.
    pub phi0_tilde: Vec<f64>,
    /// `∂Phi/∂(1/V)` at fixed `x`.
    pub phi1_tilde: Vec<f64>,
    /// `Phi(x, V) = -(1/V) ln p_{xV}`.
    pub big_phi: Vec<f64>,
}

/// One line of the decomposition CSV.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct VanthoffRow {
    pub x: f64,
    pub phi0_tilde: f64,
    pub phi1_tilde: f64,
    #[serde(rename = "Phi")]
    pub big_phi: f64,
}

impl VanthoffCurves {
    pub fn rows(&self) -> Vec<VanthoffRow> {
        (0..self.x.len())
            .map(|i| VanthoffRow {
                x: self.x[i],
                phi0_tilde: self.phi0_tilde[i],
                phi1_tilde: self.phi1_tilde[i],
                big_phi: self.big_phi[i],
            })
            .collect()
    }
}

/// Neumaier-compensated sum.
#[derive(Debug, Clone, Copy, Default)]
struct Sum {
    s: f64,
    c: f64,
}

impl Sum {
    fn add(&mut self, x: f64) {
        let t = self.s + x;
        self.c += if self.s.abs() >= x.abs() { (self.s - t) + x } else { (x - t) + self.s };
        self.s = t;
    }
    fn value(&self) -> f64 {
        self.s + self.c
    }
}

/// Van't Hoff decomposition of the exact stationary potential at system size `v`.
///
/// With `p_n` the normalized stationary law and `n = xV`,
/// `phi0~ = -[∂_V ln p_n + x ln(u_{n-1}/w_n)]`, the `n`-derivative replaced by a
/// backward difference, and `phi1~ = V (Phi - phi0~)`. The `V`-derivative is
/// exact: every rate term is a power of `V`, and
/// `∂_V ln p_n = Σ_{l<n} ∂_V ln(u_l/w_{l+1}) - Σ_m p_m Σ_{l<m} ∂_V ln(u_l/w_{l+1})`.
pub fn vanthoff_decompose(model: &BirthDeathModel, v: f64, x_grid: &[f64]) -> Result<VanthoffCurves> {
    if detect_absorbing(model) == Absorption::ExtinctionAtZero {
        return Err(Error::AbsorbedSupport);
    }
    let mut dist = stationary_distribution(model, v, None)?;
    // The automatic truncation drops a negligible tail, but the decomposition is
    // still defined out there, so extend the lattice to cover every requested x.
    let wanted = x_grid.iter().map(|x| (x * v).round()).fold(0.0, f64::max);
    if wanted.is_finite() && wanted > dist.n_max as f64 {
        dist = stationary_distribution(model, v, Some(wanted as u64))?;
    }
    let top = dist.n_max as usize;

    // cumulative[m] = Σ_{l<m} ∂_V ln(u_l / w_{l+1})
    let mut cumulative = Vec::with_capacity(top + 1);
    let mut acc = Sum::default();
    cumulative.push(0.0);
    for l in 0..top as u64 {
        let (u, _) = model.evaluate_rates(v, l)?;
        let (_, w) = model.evaluate_rates(v, l + 1)?;
        let (du, _) = model.rate_derivatives_v(v, l);
        let (_, dw) = model.rate_derivatives_v(v, l + 1);
        acc.add(du / u - dw / w);
        cumulative.push(acc.value());
    }
    let mut dlogz = Sum::default();
    for (m, d) in cumulative.iter().enumerate() {
        dlogz.add(dist.probability(m as u64) * d);
    }
    let dlogz = dlogz.value();

    let mut out = VanthoffCurves {
        v,
        x: Vec::with_capacity(x_grid.len()),
        phi0_tilde: Vec::with_capacity(x_grid.len()),
        phi1_tilde: Vec::with_capacity(x_grid.len()),
        big_phi: Vec::with_capacity(x_grid.len()),
    };
    for &x in x_grid {
        let nf = x * v;
        let n = nf.round();
        if (nf - n).abs() > 1e-9 * nf.abs().max(1.0) || n < 1.0 || n as usize > top {
            return Err(Error::Domain(format!(
                "x = {x} must map to a state n = xV in 1..={top} (got xV = {nf})"
            )));
        }
        let n = n as u64;
        let ln_p = dist.log_probability(n);
        let (u_prev, _) = model.evaluate_rates(v, n - 1)?;
        let (_, w) = model.evaluate_rates(v, n)?;
        let dv_ln_p = cumulative[n as usize] - dlogz;
        let p0 = -(dv_ln_p + x * (u_prev / w).ln());
        let phi = -ln_p / v;
        out.x.push(x);
        out.phi0_tilde.push(p0);
        out.phi1_tilde.push(v * (phi - p0));
        out.big_phi.push(phi);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;

    #[test]
    fn poisson_enthalpy_is_the_closed_form() {
        let m = presets::poisson(1.0, 2.0);
        let c = vanthoff_decompose(&m, 100.0, &[0.25, 1.0]).unwrap();
        let closed = |x: f64| x * (x / 0.5).ln() - x + 0.5;
        assert!((c.phi0_tilde[1] - 0.193147).abs() < 1e-6);
        for (i, &x) in c.x.iter().enumerate() {
            assert!((c.phi0_tilde[i] - closed(x)).abs() < 1e-12);
            assert!((c.phi0_tilde[i] + c.phi1_tilde[i] / c.v - c.big_phi[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn binomial_finite_size_term() {
        let m = presets::binomial(1.0, 1.0, 1.0);
        let c = vanthoff_decompose(&m, 100.0, &[0.5]).unwrap();
        let leading = 0.5f64.ln() - 0.5 * 1.0f64.ln() + 2.0f64.ln();
        assert!(((c.phi0_tilde[0] - leading).abs() - 0.005).abs() < 1e-4);
    }

    #[test]
    fn grid_reaches_past_the_automatic_truncation() {
        let m = presets::binomial(1.0, 1.0, 1.0);
        let c = vanthoff_decompose(&m, 100.0, &[0.95]).unwrap();
        assert!(c.big_phi[0].is_finite());
    }

    #[test]
    fn absorbing_model_is_refused() {
        assert!(vanthoff_decompose(&presets::keizer(2.0, 1.0, 1.0), 50.0, &[1.0]).is_err());
    }

    #[test]
    fn off_lattice_x_is_refused() {
        assert!(matches!(vanthoff_decompose(&presets::poisson(1.0, 1.0), 10.0, &[0.55]), Err(Error::Domain(_))));
    }
}
