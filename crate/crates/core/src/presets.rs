//! Ready-made models used throughout the examples and tests.

use crate::model::{BirthDeathModel, RateTerm, ScanBinding, Side};

fn build(birth: Vec<RateTerm>, death: Vec<RateTerm>) -> BirthDeathModel {
    BirthDeathModel::new(birth, death).expect("preset terms are valid")
}

fn bind(model: BirthDeathModel, name: &str, targets: Vec<(Side, usize)>) -> BirthDeathModel {
    model
        .with_scan(ScanBinding { name: name.into(), targets })
        .expect("preset scan targets exist")
}

/// Production at `alpha V`, degradation at `beta n`. Stationary law Poisson(alpha V / beta).
pub fn poisson(alpha: f64, beta: f64) -> BirthDeathModel {
    build(vec![RateTerm::mass_action(alpha, 0)], vec![RateTerm::mass_action(beta, 1)])
}

/// Conversion between `e_t V` molecules and their product: `u_n = k+ (e_t V - n)`,
/// `w_n = k- n`. The stationary law is Binomial(e_t V, theta / (1 + theta)) with
/// `theta = k+ / k-`; `u` vanishes at `n = e_t V`, which acts as the upper wall.
pub fn binomial(k_plus: f64, k_minus: f64, e_t: f64) -> BirthDeathModel {
    build(
        vec![RateTerm::mass_action(k_plus * e_t, 0), RateTerm::with_exponent(-k_plus, 1, 0)],
        vec![RateTerm::mass_action(k_minus, 1)],
    )
}

/// Autocatalysis with dimerising decay: `u_n = k1 n`, `w_n = k_1 n(n-1)/V + k2 n`.
///
/// Absorbing at 0. The scan parameter `k1` makes it the transcritical family.
pub fn keizer(k1: f64, k_minus1: f64, k2: f64) -> BirthDeathModel {
    let m = build(
        vec![RateTerm::mass_action(k1, 1)],
        vec![RateTerm::mass_action(k_minus1, 2), RateTerm::mass_action(k2, 1)],
    );
    bind(m, "k1", vec![(Side::Birth, 0)])
}

/// [`keizer`] plus a constant inflow `eps V`, which removes the absorbing state.
pub fn keizer_regularized(k1: f64, k_minus1: f64, k2: f64, eps: f64) -> BirthDeathModel {
    keizer(k1, k_minus1, k2)
        .with_term(Side::Birth, RateTerm::mass_action(eps, 0))
        .expect("valid term")
}

/// Schlögl's trimolecular model with the cubic death coefficient fixed to one:
/// `u_n = k1 n(n-1)/V + k3 V`, `w_n = n(n-1)(n-2)/V^2 + k4 n`.
///
/// The scan parameter `mu` is the constant inflow `k3`.
pub fn schlogl(k1: f64, k3: f64, k4: f64) -> BirthDeathModel {
    let m = build(
        vec![RateTerm::mass_action(k1, 2), RateTerm::mass_action(k3, 0)],
        vec![RateTerm::mass_action(1.0, 3), RateTerm::mass_action(k4, 1)],
    );
    bind(m, "mu", vec![(Side::Birth, 1)])
}

/// Schlögl model with fixed points 0.5, 1 and 1.5: a shallow barrier, cheap to simulate.
pub fn schlogl_shallow() -> BirthDeathModel {
    schlogl(3.0, 0.75, 2.75)
}

/// Schlögl model with fixed points 1, 3 and 5: barrier deep enough for the
/// Kramers asymptotics to settle at moderate `V`.
pub fn schlogl_deep() -> BirthDeathModel {
    schlogl(9.0, 15.0, 23.0)
}

/// A catastrophe family `b = mu - G(x)` with `G' = (x-1)(x-3)(x-3.5)(x-4.5)`.
///
/// Scanned over `mu` in about `[12.55, 12.71]` it shows two saddle-nodes (at
/// `G(3) = 12.6` and `G(3.5) = 12.658...`) while the left basin stays the global
/// minimum of the potential throughout, so no Maxwell point occurs.
pub fn quintic_catastrophe(mu: f64) -> BirthDeathModel {
    let m = build(
        vec![RateTerm::mass_action(mu, 0), RateTerm::mass_action(43.5, 2), RateTerm::mass_action(3.0, 4)],
        vec![
            RateTerm::mass_action(47.25, 1),
            RateTerm::mass_action(50.75 / 3.0, 3),
            RateTerm::mass_action(0.2, 5),
        ],
    );
    bind(m, "mu", vec![(Side::Birth, 0)])
}

/// Nearest-neighbour walk with `u_n = w_n = rate`, independent of `V`.
pub fn symmetric_walk(rate: f64) -> BirthDeathModel {
    build(vec![RateTerm::with_exponent(rate, 0, 0)], vec![RateTerm::with_exponent(rate, 0, 0)])
}

/// A model with `mu0 = lambda0 = 1 + x^2`, so the leading potential is flat, whose
/// first-order rates give `phi1' = (x-1)(x-2)(x-3) / (1 + x^2)`.
///
/// The stationary distribution is bimodal at every `V`, purely through the
/// `1/V` correction: stochastic bistability.
pub fn flat_drift_bistable() -> BirthDeathModel {
    build(
        vec![
            RateTerm::mass_action(1.0, 0),
            RateTerm::mass_action(1.0, 2),
            RateTerm::with_exponent(6.0, 2, -2),
            RateTerm::with_exponent(6.0, 0, 0),
        ],
        vec![
            RateTerm::mass_action(1.0, 0),
            RateTerm::mass_action(1.0, 2),
            RateTerm::with_exponent(1.0, 3, -3),
            RateTerm::with_exponent(9.0, 1, -1),
        ],
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::build_expansion;

    #[test]
    fn flat_drift_has_the_advertised_phi1() {
        let e = build_expansion(&flat_drift_bistable()).unwrap();
        assert!(e.b.is_zero());
        for x in [0.3, 1.0, 2.2, 3.7] {
            let want = (x - 1.0) * (x - 2.0) * (x - 3.0) / (1.0 + x * x);
            assert!((e.phi1_prime(x) - want).abs() < 1e-13);
        }
    }

    #[test]
    fn quintic_drift_matches_its_antiderivative() {
        let e = build_expansion(&quintic_catastrophe(12.63)).unwrap();
        for x in [0.5, 1.0, 3.0, 3.5, 4.5] {
            let gp = (x - 1.0) * (x - 3.0) * (x - 3.5) * (x - 4.5);
            assert!((e.drift_prime(x) + gp).abs() < 1e-10);
        }
    }
}
