//! Exact finite-`V` quantities: the stationary distribution in log space, the
//! exact stochastic potential and exact mean first passage times.
//!
//! Stationary weights follow from detailed balance, `u_n p_n = w_{n+1} p_{n+1}`,
//! accumulated as logs because they range over `e^{±O(V)}`.

use serde::Serialize;

use crate::model::{BirthDeathModel, Side};
use crate::quadrature::log_sum_exp;
use crate::{Error, Result};

/// Hard cap on the number of states of an auto-truncated distribution.
pub const MAX_STATES: u64 = 10_000_000;

/// Auto-truncation stops once the geometric bound on the mass beyond `n_max`
/// drops below this fraction of the total. It is stricter than the advertised
/// `1e-12` so that moments taken over the distribution keep that accuracy.
const TAIL_TOLERANCE: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Support {
    Full,
    AbsorbedAtZero,
}

/// `p_n` for `n = 0..=n_max`, stored as log weights relative to the most probable
/// state. That keeps `log_z` of order one, so its rounding does not shift every
/// probability (weights relative to `p_0` reach `~V` in magnitude).
#[derive(Debug, Clone)]
pub struct StationaryDistribution {
    pub v: f64,
    pub n_max: u64,
    pub log_weight: Vec<f64>,
    pub log_z: f64,
    pub support: Support,
    /// Bound on the relative mass beyond `n_max` (zero when a vanishing birth rate
    /// ends the chain, NaN when no bound could be established).
    pub tail_mass: f64,
}

impl StationaryDistribution {
    pub fn log_probability(&self, n: u64) -> f64 {
        match self.log_weight.get(n as usize) {
            Some(l) => l - self.log_z,
            None => f64::NEG_INFINITY,
        }
    }

    pub fn probability(&self, n: u64) -> f64 {
        self.log_probability(n).exp()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.log_weight.iter().map(|l| (l - self.log_z).exp()).collect()
    }

    pub fn mean(&self) -> f64 {
        self.probabilities().iter().enumerate().map(|(n, p)| n as f64 * p).sum()
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.probabilities()
            .iter()
            .enumerate()
            .map(|(n, p)| (n as f64 - m).powi(2) * p)
            .sum()
    }

    /// Most probable state (the smallest one on ties).
    pub fn mode(&self) -> u64 {
        let mut best = 0;
        for (n, &l) in self.log_weight.iter().enumerate() {
            if l > self.log_weight[best] {
                best = n;
            }
        }
        best as u64
    }
}

/// Exact stationary distribution of the chain at system size `v`.
///
/// With `n_max` the chain is cut there (or earlier, where a birth rate vanishes).
/// Without it the chain is extended until the tail beyond the last state is
/// negligible, up to [`MAX_STATES`].
pub fn stationary_distribution(
    model: &BirthDeathModel,
    v: f64,
    n_max: Option<u64>,
) -> Result<StationaryDistribution> {
    if !(v > 0.0) {
        return Err(Error::Domain(format!("system size must be positive, got {v}")));
    }
    if model.birth_rate(v, 0)? == 0.0 {
        return Ok(StationaryDistribution {
            v,
            n_max: 0,
            log_weight: vec![0.0],
            log_z: 0.0,
            support: Support::AbsorbedAtZero,
            tail_mass: 0.0,
        });
    }
    let cap = n_max.unwrap_or(MAX_STATES).min(MAX_STATES);
    let mut log_weight = vec![0.0];
    // Running log-normalizer, updated incrementally for the tail test.
    let mut log_z = 0.0;
    let mut prev_ratio = f64::INFINITY;
    let mut tail_mass = f64::NAN;
    let mut n = 0u64;
    loop {
        if n >= cap {
            if n_max.is_none() {
                return Err(Error::Truncation { cap, tail: tail_mass });
            }
            break;
        }
        let u = model.birth_rate(v, n)?;
        if u == 0.0 {
            tail_mass = 0.0;
            break;
        }
        let w = model.death_rate(v, n + 1)?;
        if w == 0.0 {
            return Err(Error::Domain(format!(
                "death rate vanishes at n = {} while the birth rate below is positive; no stationary distribution",
                n + 1
            )));
        }
        let next = log_weight[n as usize] + u.ln() - w.ln();
        log_weight.push(next);
        log_z = crate::quadrature::log_add_exp(log_z, next);
        n += 1;

        let ratio = u / w;
        if ratio < 1.0 && ratio <= prev_ratio {
            // Ratios are falling, so the tail is dominated by a geometric series.
            tail_mass = (next - log_z).exp() * ratio / (1.0 - ratio);
            if n_max.is_none() && tail_mass < TAIL_TOLERANCE {
                break;
            }
        } else {
            tail_mass = f64::NAN;
        }
        prev_ratio = ratio;
    }
    let peak = log_weight.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    log_weight.iter_mut().for_each(|l| *l -= peak);
    let log_z = log_sum_exp(&log_weight);
    Ok(StationaryDistribution { v, n_max: n, log_weight, log_z, support: Support::Full, tail_mass })
}

/// `Phi(n/V) = -(1/V) ln p_n`.
#[derive(Debug, Clone)]
pub struct ExactPotential {
    pub v: f64,
    pub x: Vec<f64>,
    pub phi: Vec<f64>,
}

impl ExactPotential {
    pub fn argmin(&self) -> usize {
        let mut best = 0;
        for (i, &p) in self.phi.iter().enumerate() {
            if p < self.phi[best] {
                best = i;
            }
        }
        best
    }
}

pub fn exact_potential(dist: &StationaryDistribution) -> Result<ExactPotential> {
    if dist.support == Support::AbsorbedAtZero {
        return Err(Error::AbsorbedSupport);
    }
    let v = dist.v;
    Ok(ExactPotential {
        v,
        x: (0..dist.log_weight.len()).map(|n| n as f64 / v).collect(),
        phi: dist.log_weight.iter().map(|l| -(l - dist.log_z) / v).collect(),
    })
}

/// Mean time to first reach `n_absorb` from `n_start < n_absorb`, with state 0 (or
/// any state whose death rate vanishes) acting as a reflecting wall.
///
/// Evaluates `T = Σ_{m=n_start+1}^{n_absorb} Σ_{l<m} p_l / (u_{m-1} p_{m-1})` with
/// running log-sum-exp prefixes: `O(n_absorb)` work.
pub fn mfpt_exact_right(model: &BirthDeathModel, v: f64, n_start: u64, n_absorb: u64) -> Result<f64> {
    if n_start == n_absorb {
        return Ok(0.0);
    }
    if n_start > n_absorb {
        return Err(Error::Domain(format!(
            "rightward passage needs n_start < n_absorb, got {n_start} -> {n_absorb}"
        )));
    }
    // The lowest state the walk can reach from n_start before it has to turn back.
    let mut floor = n_start;
    while floor > 0 && model.death_rate(v, floor)? > 0.0 {
        floor -= 1;
    }

    let mut log_t = f64::NEG_INFINITY;
    let mut l = 0.0; // log weight of state m relative to the last wall
    let mut prefix = 0.0; // log Σ of weights from the last wall up to m
    for m in floor..n_absorb {
        let u = model.birth_rate(v, m)?;
        if u == 0.0 {
            return Err(Error::InfiniteMfpt { side: Side::Birth, state: m });
        }
        if m >= n_start {
            log_t = crate::quadrature::log_add_exp(log_t, prefix - l - u.ln());
        }
        if m + 1 == n_absorb {
            break;
        }
        let w = model.death_rate(v, m + 1)?;
        if w == 0.0 {
            // The walk cannot come back below m + 1: restart the weights there.
            l = 0.0;
            prefix = 0.0;
        } else {
            l += u.ln() - w.ln();
            prefix = crate::quadrature::log_add_exp(prefix, l);
        }
    }
    Ok(log_t.exp())
}

/// Mean time to first reach `n_absorb` from `n_start > n_absorb`, with a reflecting
/// wall at `n_reflect_top` (its birth rate is ignored).
pub fn mfpt_exact_left(
    model: &BirthDeathModel,
    v: f64,
    n_start: u64,
    n_absorb: u64,
    n_reflect_top: u64,
) -> Result<f64> {
    if n_start == n_absorb {
        return Ok(0.0);
    }
    if n_start < n_absorb || n_start > n_reflect_top {
        return Err(Error::Domain(format!(
            "leftward passage needs n_absorb < n_start <= n_reflect_top, got {n_absorb} < {n_start} <= {n_reflect_top}"
        )));
    }
    let mut top = n_start;
    while top < n_reflect_top && model.birth_rate(v, top)? > 0.0 {
        top += 1;
    }

    // Walk downward; `l` is the log weight of state m+1 relative to the last wall
    // above, `suffix` the log Σ of weights from m+1 up to that wall.
    let mut log_t = f64::NEG_INFINITY;
    let mut l = 0.0;
    let mut suffix = 0.0;
    let mut m = top;
    while m > n_absorb {
        m -= 1;
        let w = model.death_rate(v, m + 1)?;
        if w == 0.0 {
            return Err(Error::InfiniteMfpt { side: Side::Death, state: m + 1 });
        }
        if m < n_start {
            log_t = crate::quadrature::log_add_exp(log_t, suffix - l - w.ln());
        }
        if m == n_absorb {
            break;
        }
        let u = model.birth_rate(v, m)?;
        if u == 0.0 {
            l = 0.0;
            suffix = 0.0;
        } else {
            // p_m / p_{m+1} = w_{m+1} / u_m
            l += w.ln() - u.ln();
            suffix = crate::quadrature::log_add_exp(suffix, l);
        }
    }
    Ok(log_t.exp())
}

/// Solves a tridiagonal system `sub[i] x[i-1] + diag[i] x[i] + sup[i] x[i+1] = rhs[i]`
/// by the Thomas algorithm.
pub fn solve_tridiagonal(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    if sub.len() != n || sup.len() != n || rhs.len() != n {
        return Err(Error::Domain("tridiagonal bands must have equal length".into()));
    }
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    for i in 0..n {
        let denom = diag[i] - if i > 0 { sub[i] * c[i - 1] } else { 0.0 };
        if denom == 0.0 || !denom.is_finite() {
            return Err(Error::Numerical(format!("singular tridiagonal system at row {i}")));
        }
        c[i] = sup[i] / denom;
        d[i] = (rhs[i] - if i > 0 { sub[i] * d[i - 1] } else { 0.0 }) / denom;
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        x[i] = d[i] - if i + 1 < n { c[i] * x[i + 1] } else { 0.0 };
    }
    Ok(x)
}

/// Reference solution of the backward equation
/// `w_n T_{n-1} - (u_n + w_n) T_n + u_n T_{n+1} = -1` on `0..n_absorb` with
/// `T_{-1} = T_0` and `T_{n_absorb} = 0`. Returns `T_0 .. T_{n_absorb-1}`.
pub fn mfpt_backward_right(model: &BirthDeathModel, v: f64, n_absorb: u64) -> Result<Vec<f64>> {
    let n = n_absorb as usize;
    let (mut sub, mut diag, mut sup) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    for i in 0..n {
        let (u, w) = model.evaluate_rates(v, i as u64)?;
        let w = if i == 0 { 0.0 } else { w };
        sub[i] = w;
        diag[i] = -(u + w);
        sup[i] = if i + 1 < n { u } else { 0.0 };
    }
    solve_tridiagonal(&sub, &diag, &sup, &vec![-1.0; n])
}

/// Mirror of [`mfpt_backward_right`]: returns `T_{n_absorb+1} ..= T_{n_reflect_top}`
/// for absorption at `n_absorb` and a reflecting wall at `n_reflect_top`.
pub fn mfpt_backward_left(model: &BirthDeathModel, v: f64, n_absorb: u64, n_reflect_top: u64) -> Result<Vec<f64>> {
    let n = (n_reflect_top - n_absorb) as usize;
    let (mut sub, mut diag, mut sup) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    for i in 0..n {
        let state = n_absorb + 1 + i as u64;
        let (u, w) = model.evaluate_rates(v, state)?;
        let u = if state == n_reflect_top { 0.0 } else { u };
        sub[i] = if i > 0 { w } else { 0.0 };
        diag[i] = -(u + w);
        sup[i] = u;
    }
    solve_tridiagonal(&sub, &diag, &sup, &vec![-1.0; n])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Absorption {
    None,
    ExtinctionAtZero,
}

/// Whether state 0 traps the chain and can actually be reached.
pub fn detect_absorbing(model: &BirthDeathModel) -> Absorption {
    let reachable = [1.0, 100.0]
        .iter()
        .any(|&v| model.death_rate(v, 1).map(|w| w > 0.0).unwrap_or(false));
    if model.absorbing_at_zero() && reachable {
        Absorption::ExtinctionAtZero
    } else {
        Absorption::None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::RateTerm;
    use crate::presets;

    /// u_0 = u_1 = 1, w_1 = w_2 = 1: the three-state chain 0 - 1 - 2.
    fn three_state() -> BirthDeathModel {
        presets::symmetric_walk(1.0)
    }

    #[test]
    fn poisson_p5() {
        let d = stationary_distribution(&presets::poisson(1.0, 2.0), 10.0, None).unwrap();
        let want = 5f64.powi(5) * (-5f64).exp() / 120.0;
        assert!((d.probability(5) - want).abs() < 1e-14);
        assert!((d.probability(5) - 0.175467).abs() < 1e-6);
        assert!(d.tail_mass < 1e-12);
    }

    #[test]
    fn uniform_when_rates_balance() {
        let d = stationary_distribution(&three_state(), 5.0, Some(9)).unwrap();
        assert_eq!(d.log_weight.len(), 10);
        for n in 0..10 {
            assert!((d.probability(n) - 0.1).abs() < 1e-15);
        }
        let phi = exact_potential(&d).unwrap();
        assert!(phi.phi.iter().all(|p| (p - phi.phi[0]).abs() < 1e-15));
    }

    #[test]
    fn binomial_four_states() {
        let d = stationary_distribution(&presets::binomial(1.0, 1.0, 1.0), 4.0, None).unwrap();
        assert_eq!(d.n_max, 4);
        assert!((d.probability(2) - 0.375).abs() < 1e-15);
        assert_eq!(d.tail_mass, 0.0);
    }

    #[test]
    fn poisson_mode_is_argmin_of_potential() {
        let d = stationary_distribution(&presets::poisson(1.0, 2.0), 100.0, None).unwrap();
        let phi = exact_potential(&d).unwrap();
        // Poisson(50) has a tie between 49 and 50; the tie is broken downward by
        // rounding, so accept either.
        let a = phi.argmin();
        assert!(a == 49 || a == 50, "{a}");
        assert!((phi.phi[49] - phi.phi[50]).abs() < 1e-14);
    }

    #[test]
    fn keizer_is_absorbed() {
        let m = presets::keizer(2.0, 1.0, 1.0);
        let d = stationary_distribution(&m, 50.0, None).unwrap();
        assert_eq!(d.support, Support::AbsorbedAtZero);
        assert!(matches!(exact_potential(&d), Err(Error::AbsorbedSupport)));
        assert_eq!(detect_absorbing(&m), Absorption::ExtinctionAtZero);
        assert_eq!(detect_absorbing(&presets::poisson(1.0, 2.0)), Absorption::None);
        assert_eq!(detect_absorbing(&presets::binomial(1.0, 1.0, 1.0)), Absorption::None);
    }

    #[test]
    fn non_normalizable_hits_the_cap() {
        let m = BirthDeathModel::new(vec![RateTerm::mass_action(2.0, 1)], vec![RateTerm::mass_action(1.0, 1)])
            .unwrap()
            .with_term(Side::Birth, RateTerm::mass_action(1.0, 0))
            .unwrap();
        let err = stationary_distribution(&m, 1.0, None).unwrap_err();
        assert!(matches!(err, Error::Truncation { .. }));
    }

    #[test]
    fn hand_solved_passage_times() {
        let m = three_state();
        assert!((mfpt_exact_right(&m, 1.0, 0, 2).unwrap() - 3.0).abs() < 1e-14);
        assert!((mfpt_exact_right(&m, 1.0, 1, 2).unwrap() - 2.0).abs() < 1e-14);
        assert_eq!(mfpt_exact_right(&m, 1.0, 2, 2).unwrap(), 0.0);
        assert!((mfpt_exact_left(&m, 1.0, 2, 0, 2).unwrap() - 3.0).abs() < 1e-14);
        assert_eq!(mfpt_exact_left(&m, 1.0, 1, 1, 2).unwrap(), 0.0);
        assert!(mfpt_exact_right(&m, 1.0, 3, 2).is_err());
    }

    #[test]
    fn schlogl_matches_backward_solve() {
        let m = presets::schlogl_deep();
        let v = 100.0;
        let exact = mfpt_exact_right(&m, v, 100, 320).unwrap();
        let oracle = mfpt_backward_right(&m, v, 320).unwrap()[100];
        assert!((exact / oracle - 1.0).abs() < 1e-9, "{exact} vs {oracle}");
    }

    #[test]
    fn keizer_extinction_is_slow() {
        let m = presets::keizer(2.0, 1.0, 1.0);
        let t = mfpt_exact_left(&m, 50.0, 50, 0, 250).unwrap();
        let oracle = mfpt_backward_left(&m, 50.0, 0, 250).unwrap()[49];
        assert!(t.is_finite() && t > 1e6, "{t}");
        // Reference from 40-digit arithmetic. The backward solve is badly
        // conditioned this far from the absorbing boundary and loses a few digits.
        assert!((t / 3_418_679.711_953_746 - 1.0).abs() < 1e-13, "{t}");
        assert!((t / oracle - 1.0).abs() < 1e-8, "{t} vs {oracle}");
    }

    #[test]
    fn absorbing_state_on_the_way_makes_passage_infinite() {
        let m = presets::keizer(2.0, 1.0, 1.0);
        let err = mfpt_exact_right(&m, 10.0, 5, 20).unwrap_err();
        assert!(matches!(err, Error::InfiniteMfpt { side: Side::Birth, state: 0 }));
    }
}
