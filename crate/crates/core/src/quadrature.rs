//! Adaptive Gauss-Kronrod quadrature, in linear and in log space.
//!
//! The potentials and passage-time integrals of this crate have integrands
//! ranging over `e^{±O(V)}`, so most callers use [`log_integrate`], which shifts
//! the integrand by its sampled maximum before integrating. Nodes of the
//! 15-point Kronrod rule never touch the interval ends, which lets integrable
//! logarithmic singularities at an endpoint through.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::sync::Arc;

use crate::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
// Gauss weights for XGK[1], XGK[3], XGK[5] and the centre.
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Tolerances for the adaptive integrators. The run stops once the estimated
/// error is below `max(abs_tol, rel_tol * |I|)`.
#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_panels: usize,
    /// Panels the interval is cut into before adapting.
    pub initial_panels: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self { abs_tol: 1e-12, rel_tol: 1e-12, max_panels: 4000, initial_panels: 1 }
    }
}

impl QuadOptions {
    pub fn relative(rel_tol: f64) -> Self {
        Self { abs_tol: 0.0, rel_tol, ..Self::default() }
    }

    pub fn with_initial_panels(mut self, n: usize) -> Self {
        self.initial_panels = n.max(1);
        self
    }
}

/// An integral with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
    pub panels: usize,
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    abs: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// One 15-point Kronrod panel with the embedded 7-point Gauss error estimate,
/// rescaled the way QUADPACK does.
pub fn gauss_kronrod15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> Result<(f64, f64)> {
    gk15(f, a, b).map(|(value, err, _)| (value, err))
}

/// [`gauss_kronrod15`] plus the rule applied to `|f|`.
fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> Result<(f64, f64, f64)> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut abs_sum = kron.abs();
    let mut fv = [(0.0, 0.0); 7];
    for (j, &x) in XGK[..7].iter().enumerate() {
        let (f1, f2) = (f(c - h * x), f(c + h * x));
        fv[j] = (f1, f2);
        kron += WGK[j] * (f1 + f2);
        abs_sum += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    if !kron.is_finite() {
        let bad = std::iter::once(c)
            .chain(XGK[..7].iter().flat_map(|&x| [c - h * x, c + h * x]))
            .find(|&x| !f(x).is_finite())
            .unwrap_or(c);
        return Err(Error::Quadrature(format!("integrand is not finite at x = {bad}")));
    }
    let mean = kron * 0.5;
    let mut asc = WGK[7] * (fc - mean).abs();
    for (j, &(f1, f2)) in fv.iter().enumerate() {
        asc += WGK[j] * ((f1 - mean).abs() + (f2 - mean).abs());
    }
    let value = kron * h;
    let (abs_sum, asc) = (abs_sum * h.abs(), asc * h.abs());
    let mut err = ((kron - gauss) * h).abs();
    if asc != 0.0 && err != 0.0 {
        err = asc * (200.0 * err / asc).powf(1.5).min(1.0);
    }
    if abs_sum > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * abs_sum);
    }
    Ok((value, err, abs_sum))
}

/// Adaptive integral of `f` over `[a, b]`; `a > b` gives the negated integral.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, opts: QuadOptions) -> Result<Integral> {
    if a == b {
        return Ok(Integral { value: 0.0, error: 0.0, evaluations: 0, panels: 0 });
    }
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Quadrature(format!("infinite interval [{a}, {b}]")));
    }
    let n0 = opts.initial_panels.max(1);
    let mut heap = BinaryHeap::with_capacity(opts.max_panels + n0);
    let (mut total, mut total_err, mut total_abs) = (0.0, 0.0, 0.0);
    for i in 0..n0 {
        let pa = a + (b - a) * i as f64 / n0 as f64;
        let pb = if i + 1 == n0 { b } else { a + (b - a) * (i + 1) as f64 / n0 as f64 };
        let (value, error, abs) = gk15(&f, pa, pb)?;
        total += value;
        total_err += error;
        total_abs += abs;
        heap.push(Panel { a: pa, b: pb, value, error, abs });
    }
    let mut evaluations = 15 * n0;
    loop {
        // Roundoff limits the attainable accuracy to a few hundred ulps of the
        // integral of |f|, which exceeds |total| when the integrand changes sign.
        let floor = 100.0 * f64::EPSILON * total_abs.max(total.abs());
        let tol = opts.abs_tol.max(opts.rel_tol * total.abs()).max(floor);
        if total_err <= tol {
            break;
        }
        if heap.len() >= opts.max_panels {
            return Err(Error::Quadrature(format!(
                "no convergence on [{a}, {b}] after {} panels (estimate {total:e}, error {total_err:e})",
                heap.len()
            )));
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid == worst.a || mid == worst.b {
            // Panel too small to split: the remaining error is roundoff.
            heap.push(Panel { error: 0.0, ..worst });
            total_err -= worst.error;
            continue;
        }
        let (v1, e1, a1) = gk15(&f, worst.a, mid)?;
        let (v2, e2, a2) = gk15(&f, mid, worst.b)?;
        evaluations += 30;
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        total_abs += a1 + a2 - worst.abs;
        heap.push(Panel { a: worst.a, b: mid, value: v1, error: e1, abs: a1 });
        heap.push(Panel { a: mid, b: worst.b, value: v2, error: e2, abs: a2 });
    }
    // Re-sum from the panels to shed the drift of the running updates.
    let (value, error) = heap.iter().fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.error));
    Ok(Integral { value, error, evaluations, panels: heap.len() })
}

/// `ln(e^a + e^b)` without overflow.
#[must_use]
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// `ln(sum e^{x_i})` without overflow; empty input gives `-inf`.
#[must_use]
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m.is_infinite() {
        return m;
    }
    // Neumaier summation: long lattices (1e5+ states) otherwise lose ~1e-12.
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for x in xs {
        let term = (x - m).exp();
        let t = sum + term;
        comp += if sum.abs() >= term.abs() { (sum - t) + term } else { (term - t) + sum };
        sum = t;
    }
    m + (sum + comp).ln()
}

/// `ln ∫_a^b e^{g(x)} dx` for `a <= b`.
///
/// The integrand is shifted by the largest value of `g` found on a sampling grid
/// of `samples` points, so the linear-space integral stays in range as long as
/// `g` does not rise more than ~700 above the sampled maximum.
pub fn log_integrate(g: impl Fn(f64) -> f64, a: f64, b: f64, rel_tol: f64, samples: usize) -> Result<f64> {
    if a == b {
        return Ok(f64::NEG_INFINITY);
    }
    if a > b {
        return Err(Error::Quadrature(format!("log_integrate needs a <= b, got [{a}, {b}]")));
    }
    let n = samples.max(2);
    let mut shift = f64::NEG_INFINITY;
    for i in 0..n {
        let x = a + (b - a) * (i as f64 + 0.5) / n as f64;
        shift = shift.max(g(x));
    }
    if shift == f64::INFINITY || shift.is_nan() {
        return Err(Error::Quadrature(format!("log-integrand is not finite on [{a}, {b}]")));
    }
    if shift == f64::NEG_INFINITY {
        return Ok(f64::NEG_INFINITY);
    }
    let opts = QuadOptions::relative(rel_tol).with_initial_panels(n.min(64));
    let r = integrate(|x| (g(x) - shift).exp(), a, b, opts)?;
    if r.value <= 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(shift + r.value.ln())
}

/// Shared, thread-safe scalar function.
pub type SharedFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// `F(x) = ∫_{x0}^x f`, answered from a table of node values plus one short
/// adaptive integral from the nearest node below `x`.
#[derive(Clone)]
pub struct CumulativeIntegral {
    f: SharedFn,
    nodes: Vec<f64>,
    values: Vec<f64>,
    pub error: f64,
    opts: QuadOptions,
}

impl std::fmt::Debug for CumulativeIntegral {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CumulativeIntegral")
            .field("range", &(self.nodes[0], self.nodes[self.nodes.len() - 1]))
            .field("panels", &(self.nodes.len() - 1))
            .field("error", &self.error)
            .finish()
    }
}

impl CumulativeIntegral {
    pub fn new(f: SharedFn, x0: f64, x1: f64, panels: usize, opts: QuadOptions) -> Result<Self> {
        if !(x1 > x0) {
            return Err(Error::Domain(format!("cumulative integral needs x1 > x0, got [{x0}, {x1}]")));
        }
        let panels = panels.max(1);
        let nodes: Vec<f64> = (0..=panels).map(|i| x0 + (x1 - x0) * i as f64 / panels as f64).collect();
        let mut values = Vec::with_capacity(nodes.len());
        values.push(0.0);
        let mut error = 0.0;
        for w in nodes.windows(2) {
            let r = integrate(|x| f(x), w[0], w[1], opts)?;
            error += r.error;
            values.push(values.last().unwrap() + r.value);
        }
        Ok(Self { f, nodes, values, error, opts })
    }

    pub fn range(&self) -> (f64, f64) {
        (self.nodes[0], *self.nodes.last().unwrap())
    }

    pub fn panels(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        let (lo, hi) = self.range();
        if x < lo || x > hi * (1.0 + 1e-12) + 1e-300 {
            return Err(Error::Domain(format!("x = {x} lies outside the tabulated range [{lo}, {hi}]")));
        }
        let h = (hi - lo) / self.panels() as f64;
        let j = (((x - lo) / h).floor() as usize).min(self.panels());
        let f = &self.f;
        let tail = integrate(|z| f(z), self.nodes[j], x, self.opts)?;
        Ok(self.values[j] + tail.value)
    }
}

/// `ln ∫_{x0}^x e^{g}`, tabulated like [`CumulativeIntegral`] but in log space.
#[derive(Clone)]
pub struct LogCumulativeIntegral {
    g: SharedFn,
    nodes: Vec<f64>,
    log_values: Vec<f64>,
    rel_tol: f64,
}

impl LogCumulativeIntegral {
    pub fn new(g: SharedFn, x0: f64, x1: f64, panels: usize, rel_tol: f64) -> Result<Self> {
        if !(x1 > x0) {
            return Err(Error::Domain(format!("cumulative integral needs x1 > x0, got [{x0}, {x1}]")));
        }
        let panels = panels.max(1);
        let nodes: Vec<f64> = (0..=panels).map(|i| x0 + (x1 - x0) * i as f64 / panels as f64).collect();
        let mut log_values = Vec::with_capacity(nodes.len());
        log_values.push(f64::NEG_INFINITY);
        for w in nodes.windows(2) {
            let piece = log_integrate(|x| g(x), w[0], w[1], rel_tol, 8)?;
            log_values.push(log_add_exp(*log_values.last().unwrap(), piece));
        }
        Ok(Self { g, nodes, log_values, rel_tol })
    }

    pub fn range(&self) -> (f64, f64) {
        (self.nodes[0], *self.nodes.last().unwrap())
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        let (lo, hi) = self.range();
        if x < lo || x > hi * (1.0 + 1e-12) + 1e-300 {
            return Err(Error::Domain(format!("x = {x} lies outside the tabulated range [{lo}, {hi}]")));
        }
        let panels = self.nodes.len() - 1;
        let h = (hi - lo) / panels as f64;
        let j = (((x - lo) / h).floor() as usize).min(panels);
        let g = &self.g;
        let tail = log_integrate(|z| g(z), self.nodes[j], x.max(self.nodes[j]), self.rel_tol, 4)?;
        Ok(log_add_exp(self.log_values[j], tail))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_are_exact_on_one_panel() {
        let (v, _) = gauss_kronrod15(&|x: f64| x.powi(9) - 3.0 * x * x, 0.0, 2.0).unwrap();
        assert!((v - (1024.0 / 10.0 - 8.0)).abs() < 1e-12);
    }

    #[test]
    fn log_singularity_at_endpoint() {
        // ∫_0^1 ln x dx = -1
        let r = integrate(f64::ln, 0.0, 1.0, QuadOptions::default()).unwrap();
        assert!((r.value + 1.0).abs() < 1e-11, "{r:?}");
    }

    #[test]
    fn reversed_limits_negate() {
        let a = integrate(f64::exp, 0.0, 1.0, QuadOptions::default()).unwrap().value;
        let b = integrate(f64::exp, 1.0, 0.0, QuadOptions::default()).unwrap().value;
        assert!((a + b).abs() < 1e-14);
    }

    #[test]
    fn non_finite_integrand_reports_location() {
        let err = integrate(|x| 1.0 / (x - 0.5), 0.0, 1.0, QuadOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Quadrature(_)));
    }

    #[test]
    fn log_integrate_handles_huge_exponents() {
        // ∫_0^1 e^{2000 x} = (e^2000 - 1)/2000
        let got = log_integrate(|x| 2000.0 * x, 0.0, 1.0, 1e-12, 64).unwrap();
        let want = 2000.0 + (1.0 - (-2000.0f64).exp()).ln() - 2000.0f64.ln();
        assert!((got - want).abs() < 1e-10);
    }

    #[test]
    fn narrow_gaussian_is_found() {
        let v = 1e4;
        let got = log_integrate(|x| -v * (x - 0.3).powi(2), 0.0, 1.0, 1e-12, 64).unwrap();
        let want = (std::f64::consts::PI / v).sqrt().ln();
        assert!((got - want).abs() < 1e-10);
    }

    #[test]
    fn cumulative_matches_closed_form() {
        let c = CumulativeIntegral::new(Arc::new(|x: f64| x.cos()), 0.0, 3.0, 16, QuadOptions::default())
            .unwrap();
        for x in [0.0, 0.1, 1.7, 3.0] {
            assert!((c.eval(x).unwrap() - x.sin()).abs() < 1e-13);
        }
        assert!(c.eval(3.5).is_err());
    }

    #[test]
    fn log_cumulative_matches_closed_form() {
        let c = LogCumulativeIntegral::new(Arc::new(|x: f64| -500.0 * x), 0.0, 2.0, 32, 1e-12).unwrap();
        for x in [0.01f64, 0.5, 2.0] {
            let want = ((1.0 - (-500.0 * x).exp()) / 500.0f64).ln();
            assert!((c.eval(x).unwrap() - want).abs() < 1e-11);
        }
    }

    #[test]
    fn log_helpers() {
        assert_eq!(log_add_exp(f64::NEG_INFINITY, 1.0), 1.0);
        assert!((log_add_exp(1000.0, 1000.0) - (1000.0 + 2f64.ln())).abs() < 1e-12);
        assert!((log_sum_exp(&[0.0, 0.0, 0.0]) - 3f64.ln()).abs() < 1e-15);
        assert_eq!(log_sum_exp(&[]), f64::NEG_INFINITY);
    }
}
