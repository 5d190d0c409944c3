use serde::{Deserialize, Serialize};

use super::{Polynomial, RateExpansion};
use crate::{Error, Result};

/// Linear stability of a fixed point of `dx/dt = b(x)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stability {
    Stable,
    Unstable,
    Degenerate,
}

/// A root of the drift with its stability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedPoint {
    pub location: f64,
    pub stability: Stability,
    /// `b'(x*)`.
    pub drift_slope: f64,
}

/// Tuning for [`find_fixed_points_with`].
#[derive(Debug, Clone, Copy)]
pub struct RootOptions {
    pub grid_points: usize,
    /// Below this `|b'(x*)|` a root is labelled degenerate.
    pub degenerate_slope: f64,
}

impl Default for RootOptions {
    fn default() -> Self {
        Self { grid_points: 2048, degenerate_slope: 1e-8 }
    }
}

/// Bisection with secant (Illinois) steps on a sign-change bracket.
fn polish(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let (mut fa, mut fb) = (f(a), f(b));
    if fa == 0.0 {
        return a;
    }
    if fb == 0.0 {
        return b;
    }
    let mut side = 0i8;
    for _ in 0..200 {
        let tol = 1e-12 * a.abs().max(b.abs()).max(1e-3);
        if (b - a).abs() <= tol {
            break;
        }
        let mut c = (a * fb - b * fa) / (fb - fa);
        // Fall back to bisection when the secant leaves the bracket or stalls.
        if !(c > a.min(b) && c < a.max(b)) {
            c = 0.5 * (a + b);
        }
        let fc = f(c);
        if fc == 0.0 {
            return c;
        }
        if fc.signum() == fb.signum() {
            b = c;
            fb = fc;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        } else {
            a = c;
            fa = fc;
            if side == 1 {
                fb *= 0.5;
            }
            side = 1;
        }
    }
    0.5 * (a + b)
}

/// Zeros of `p` on `[lo, hi]` found from sign changes on `grid` points, plus any
/// even-multiplicity zero sitting at an extremum of `p`.
fn polynomial_roots(p: &Polynomial, lo: f64, hi: f64, grid: usize) -> Vec<f64> {
    if p.is_zero() {
        return Vec::new();
    }
    let dp = p.derivative();
    let xs: Vec<f64> = (0..=grid).map(|i| lo + (hi - lo) * i as f64 / grid as f64).collect();
    let fx: Vec<f64> = xs.iter().map(|&x| p.eval(x)).collect();
    let scale = fx.iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);

    // Extrema of p: where a double root would hide without a sign change.
    let mut extrema = Vec::new();
    if !dp.is_zero() {
        let dfx: Vec<f64> = xs.iter().map(|&x| dp.eval(x)).collect();
        for i in 0..grid {
            if dfx[i] == 0.0 {
                extrema.push(xs[i]);
            } else if dfx[i] * dfx[i + 1] < 0.0 {
                extrema.push(polish(|x| dp.eval(x), xs[i], xs[i + 1]));
            }
        }
    }

    let mut roots = Vec::new();
    for i in 0..grid {
        let (a, b, fa, fb) = (xs[i], xs[i + 1], fx[i], fx[i + 1]);
        if fa == 0.0 {
            roots.push(a);
            continue;
        }
        if fa * fb < 0.0 {
            roots.push(polish(|x| p.eval(x), a, b));
            continue;
        }
        if fb == 0.0 {
            continue;
        }
        // Same sign at both ends: look for an extremum inside that crosses zero.
        for &c in extrema.iter().filter(|&&c| c > a && c < b) {
            let fc = p.eval(c);
            if fc.signum() != fa.signum() && fc != 0.0 {
                log::debug!("two roots share the grid cell [{a}, {b}]; split at the interior extremum {c}");
                roots.push(polish(|x| p.eval(x), a, c));
                roots.push(polish(|x| p.eval(x), c, b));
            } else if fc.abs() <= 1e-13 * scale {
                roots.push(c);
            }
        }
    }
    if fx[grid] == 0.0 {
        roots.push(hi);
    }
    roots.sort_by(f64::total_cmp);
    roots.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * a.abs().max(1.0));
    roots
}

/// Roots of the drift `b = mu0 - lambda0` on `[x_min, x_max]`, ascending, with stability.
pub fn find_fixed_points(exp: &RateExpansion, x_min: f64, x_max: f64) -> Result<Vec<FixedPoint>> {
    find_fixed_points_with(exp, x_min, x_max, RootOptions::default())
}

pub fn find_fixed_points_with(
    exp: &RateExpansion,
    x_min: f64,
    x_max: f64,
    opts: RootOptions,
) -> Result<Vec<FixedPoint>> {
    if !(x_min < x_max) || !x_min.is_finite() || !x_max.is_finite() {
        return Err(Error::Domain(format!("empty search interval [{x_min}, {x_max}]")));
    }
    if exp.b.is_zero() {
        // Every point is a fixed point; there is nothing discrete to report.
        return Ok(Vec::new());
    }
    let db = exp.b.derivative();
    Ok(polynomial_roots(&exp.b, x_min, x_max, opts.grid_points.max(8))
        .into_iter()
        .map(|x| {
            let slope = db.eval(x);
            let stability = if slope.abs() < opts.degenerate_slope {
                Stability::Degenerate
            } else if slope < 0.0 {
                Stability::Stable
            } else {
                Stability::Unstable
            };
            FixedPoint { location: x, stability, drift_slope: slope }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::build_expansion;
    use crate::presets;

    fn locations(fp: &[FixedPoint]) -> Vec<f64> {
        fp.iter().map(|f| f.location).collect()
    }

    #[test]
    fn poisson_single_root() {
        let e = build_expansion(&presets::poisson(1.0, 2.0)).unwrap();
        let fp = find_fixed_points(&e, 0.0, 5.0).unwrap();
        assert_eq!(fp.len(), 1);
        assert!((fp[0].location - 0.5).abs() < 1e-12);
        assert_eq!(fp[0].stability, Stability::Stable);
    }

    #[test]
    fn keizer_roots_at_grid_boundary() {
        let e = build_expansion(&presets::keizer(2.0, 1.0, 1.0)).unwrap();
        let fp = find_fixed_points(&e, 0.0, 3.0).unwrap();
        let xs = locations(&fp);
        assert_eq!(xs.len(), 2);
        assert_eq!(xs[0], 0.0);
        assert!((xs[1] - 1.0).abs() < 1e-12);
        assert_eq!(fp[0].stability, Stability::Unstable);
        assert_eq!(fp[1].stability, Stability::Stable);
    }

    #[test]
    fn schlogl_three_roots_alternate() {
        let e = build_expansion(&presets::schlogl_shallow()).unwrap();
        let fp = find_fixed_points(&e, 0.0, 3.0).unwrap();
        let xs = locations(&fp);
        for (got, want) in xs.iter().zip([0.5, 1.0, 1.5]) {
            assert!((got - want).abs() < 1e-12, "{xs:?}");
        }
        let st: Vec<_> = fp.iter().map(|f| f.stability).collect();
        assert_eq!(st, vec![Stability::Stable, Stability::Unstable, Stability::Stable]);
    }

    #[test]
    fn double_root_is_degenerate() {
        // b = -(x - 1)^2 touches zero without crossing.
        let p = Polynomial::new(vec![-1.0, 2.0, -1.0]);
        let e = RateExpansion {
            mu0: Polynomial::new(vec![0.0, 2.0]),
            mu1: Polynomial::zero(),
            lambda0: &Polynomial::new(vec![0.0, 2.0]) - &p,
            lambda1: Polynomial::zero(),
            mu0_prime: Polynomial::new(vec![2.0]),
            lambda0_prime: (&Polynomial::new(vec![0.0, 2.0]) - &p).derivative(),
            b: p,
        };
        let fp = find_fixed_points(&e, 0.0, 2.1).unwrap();
        assert_eq!(fp.len(), 1);
        assert_eq!(fp[0].stability, Stability::Degenerate);
    }

    #[test]
    fn close_pair_inside_one_cell_is_split() {
        // Roots at 1 and 1 + 1e-5, far below the default cell width of 1/2048.
        let d = 1e-5;
        let b = Polynomial::new(vec![-(1.0 + d), 2.0 + d, -1.0]);
        let lambda0 = &Polynomial::new(vec![0.0, 5.0]) - &b;
        let e = RateExpansion {
            mu0: Polynomial::new(vec![0.0, 5.0]),
            mu1: Polynomial::zero(),
            lambda0_prime: lambda0.derivative(),
            lambda0,
            lambda1: Polynomial::zero(),
            mu0_prime: Polynomial::new(vec![5.0]),
            b,
        };
        let fp = find_fixed_points(&e, 0.0, 1.0 + 0.75 / 2048.0).unwrap();
        assert_eq!(fp.len(), 2, "{fp:?}");
        assert!((fp[1].location - fp[0].location - d).abs() < 1e-10);
    }

    #[test]
    fn rejects_empty_interval() {
        let e = build_expansion(&presets::poisson(1.0, 2.0)).unwrap();
        assert!(find_fixed_points(&e, 1.0, 1.0).is_err());
    }
}
