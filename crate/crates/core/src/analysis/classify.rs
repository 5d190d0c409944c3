use serde::Serialize;

use crate::asymptotics::{BistabilityClass, PotentialGrid};
use crate::{Error, Result};

/// Minima and maxima of `Phi(x, V) = phi0 + phi1/V` on an interval.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PotentialExtrema {
    pub minima: Vec<f64>,
    pub maxima: Vec<f64>,
}

/// Locates the extrema of `Phi(·, V)` on `[lo, hi]` from sign changes of
/// `phi0' + phi1'/V` on a 2048-cell grid, refined by bisection.
pub fn potential_extrema(potential: &PotentialGrid, v: f64, lo: f64, hi: f64) -> Result<PotentialExtrema> {
    if !(hi > lo) {
        return Err(Error::Domain(format!("empty interval [{lo}, {hi}]")));
    }
    let exp = potential.expansion();
    let slope = |x: f64| exp.phi0_prime(x) + exp.phi1_prime(x) / v;
    const GRID: usize = 2048;
    let h = (hi - lo) / GRID as f64;
    let (mut minima, mut maxima) = (Vec::new(), Vec::new());
    let mut prev = slope(lo);
    for i in 1..=GRID {
        let x = lo + h * i as f64;
        let cur = slope(x);
        if prev != 0.0 && cur != 0.0 && prev.signum() != cur.signum() {
            let (mut a, mut b) = (x - h, x);
            while b - a > 1e-13 * b.abs().max(1.0) {
                let m = 0.5 * (a + b);
                if slope(m).signum() == prev.signum() {
                    a = m;
                } else {
                    b = m;
                }
            }
            let root = 0.5 * (a + b);
            if prev < 0.0 {
                minima.push(root);
            } else {
                maxima.push(root);
            }
        }
        if cur != 0.0 {
            prev = cur;
        }
    }
    Ok(PotentialExtrema { minima, maxima })
}

/// Classification of the escape from one basin over an adjacent barrier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BasinClassification {
    pub basin: f64,
    pub barrier: f64,
    /// `phi0(barrier) - phi0(basin)`.
    pub delta_phi0: f64,
    /// `phi1(barrier) - phi1(basin)`.
    pub delta_phi1: f64,
    pub class: BistabilityClass,
}

/// Nonlinear vs. stochastic bistability for every basin in `minima`, judged over
/// the barrier separating it from its neighbour.
///
/// `|Δphi0| < 10/V` is indeterminate, because `phi1` then controls the barrier
/// and the label would change with `V`. The exception is a `phi0` that is flat
/// to rounding between basin and barrier (`lambda0 = mu0` there): the barrier
/// then comes from `phi1` at every `V`, which is stochastic bistability.
pub fn classify_bistability(
    potential: &PotentialGrid,
    v: f64,
    minima: &[f64],
    maxima: &[f64],
) -> Result<Vec<BasinClassification>> {
    let mut mins = minima.to_vec();
    mins.sort_by(f64::total_cmp);
    if mins.len() < 2 {
        return Ok(Vec::new());
    }
    let exp = potential.expansion();
    let mut out = Vec::new();
    for (k, &m) in mins.iter().enumerate() {
        let neighbours = [k.checked_sub(1).map(|j| mins[j]), mins.get(k + 1).copied()];
        for other in neighbours.into_iter().flatten() {
            let (a, b) = if other < m { (other, m) } else { (m, other) };
            let Some(&barrier) = maxima.iter().find(|&&x| x > a && x < b) else {
                return Err(Error::Precondition(format!("no maximum between the minima at {a} and {b}")));
            };
            let delta_phi0 = potential.phi0(barrier)? - potential.phi0(m)?;
            let delta_phi1 = potential.phi1(barrier)? - potential.phi1(m)?;
            let (lo, hi) = if barrier < m { (barrier, m) } else { (m, barrier) };
            let flat = (0..=256).all(|i| exp.phi0_prime(lo + (hi - lo) * i as f64 / 256.0).abs() < 1e-12);
            let class = if flat {
                BistabilityClass::Stochastic
            } else if delta_phi0.abs() < 10.0 / v {
                BistabilityClass::Indeterminate
            } else if delta_phi0 > 0.0 {
                BistabilityClass::Nonlinear
            } else {
                BistabilityClass::Stochastic
            };
            out.push(BasinClassification { basin: m, barrier, delta_phi0, delta_phi1, class });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::build_expansion;
    use crate::presets;

    #[test]
    fn flat_drift_model_is_stochastic() {
        let exp = build_expansion(&presets::flat_drift_bistable()).unwrap();
        let grid = PotentialGrid::new(&exp, 4.0).unwrap();
        let ext = potential_extrema(&grid, 50.0, 0.2, 3.8).unwrap();
        assert_eq!(ext.minima.len(), 2, "{ext:?}");
        assert_eq!(ext.maxima.len(), 1);
        let c = classify_bistability(&grid, 50.0, &ext.minima, &ext.maxima).unwrap();
        assert_eq!(c.len(), 2);
        assert!(c.iter().all(|b| b.class == BistabilityClass::Stochastic));
    }

    #[test]
    fn single_basin_gives_nothing() {
        let exp = build_expansion(&presets::poisson(1.0, 2.0)).unwrap();
        let grid = PotentialGrid::new(&exp, 2.0).unwrap();
        let ext = potential_extrema(&grid, 100.0, 0.05, 1.9).unwrap();
        assert_eq!(ext.minima.len(), 1);
        assert!(classify_bistability(&grid, 100.0, &ext.minima, &ext.maxima).unwrap().is_empty());
    }
}
