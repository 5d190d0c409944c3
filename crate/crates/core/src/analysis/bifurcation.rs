use rayon::prelude::*;
use serde::Serialize;

use super::ModelFamily;
use crate::model::{find_fixed_points_with, FixedPoint, RootOptions, Stability};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BifurcationKind {
    Transcritical,
    SaddleNode,
}

/// A detected bifurcation of the drift.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BifurcationEvent {
    pub parameter_value: f64,
    pub kind: BifurcationKind,
    pub location: f64,
    /// The colliding (saddle-node) or crossing (transcritical) pair, read just
    /// before the event on the side where both roots exist.
    pub evidence: [FixedPoint; 2],
}

const MU_TOL: f64 = 1e-8;

struct Scanner<'a> {
    family: &'a ModelFamily,
    lo: f64,
    hi: f64,
    opts: RootOptions,
}

impl Scanner<'_> {
    fn roots(&self, mu: f64) -> Result<Vec<FixedPoint>> {
        find_fixed_points_with(&self.family.expansion_at(mu)?, self.lo, self.hi, self.opts)
    }

    fn is_regular(roots: &[FixedPoint]) -> bool {
        roots.iter().all(|r| r.stability != Stability::Degenerate)
    }

    fn saddle_node(&self, mut a: f64, mut b: f64, count_a: usize) -> Result<BifurcationEvent> {
        // Root sets on the two sides of the event. Close to the fold the two
        // colliding roots become hard to resolve, so the pair is read from the
        // last bracket end that still showed them rather than from the final one.
        let mut at_a = self.roots(a)?;
        let mut at_b = self.roots(b)?;
        let (mut pair_a, mut pair_b) = (closest_pair(&at_a), closest_pair(&at_b));
        while (b - a).abs() > MU_TOL {
            let m = 0.5 * (a + b);
            let roots = self.roots(m)?;
            if roots.len() == count_a {
                a = m;
                at_a = roots;
                pair_a = closest_pair(&at_a).or(pair_a);
            } else {
                b = m;
                at_b = roots;
                pair_b = closest_pair(&at_b).or(pair_b);
            }
        }
        let pair = if at_a.len() > at_b.len() { pair_a.or(pair_b) } else { pair_b.or(pair_a) };
        let mu = 0.5 * (a + b);
        let pair = pair.ok_or_else(|| Error::Numerical(format!("no colliding pair found near mu = {mu}")))?;
        Ok(BifurcationEvent {
            parameter_value: mu,
            kind: BifurcationKind::SaddleNode,
            location: 0.5 * (pair[0].location + pair[1].location),
            evidence: pair,
        })
    }

    /// Refines a stability exchange of the root that sits near `x_f` at `a`.
    fn transcritical(&self, mut a: f64, mut b: f64, x_f: f64, slope_a: f64) -> Result<BifurcationEvent> {
        let nearest = |roots: &[FixedPoint], x: f64| -> Option<FixedPoint> {
            roots.iter().copied().min_by(|p, q| (p.location - x).abs().total_cmp(&(q.location - x).abs()))
        };
        let mut last = self.roots(a)?;
        // The last set in which the crossing root was still clearly resolved.
        let mut resolved = last.clone();
        while (b - a).abs() > MU_TOL {
            let m = 0.5 * (a + b);
            let roots = self.roots(m)?;
            let same = nearest(&roots, x_f).is_none_or(|r| r.drift_slope * slope_a >= 0.0);
            if same {
                a = m;
                if Self::is_regular(&roots) {
                    resolved = roots.clone();
                }
                last = roots;
            } else {
                b = m;
            }
        }
        let r = nearest(&last, x_f).ok_or_else(|| Error::Numerical("crossing root was lost".into()))?;
        let r_evidence = nearest(&resolved, x_f).unwrap_or(r);
        let partner = resolved
            .iter()
            .copied()
            .filter(|p| p.location != r_evidence.location)
            .min_by(|p, q| {
                (p.location - r_evidence.location).abs().total_cmp(&(q.location - r_evidence.location).abs())
            })
            .unwrap_or(r_evidence);
        let (p, q) =
            if partner.location < r_evidence.location { (partner, r_evidence) } else { (r_evidence, partner) };
        Ok(BifurcationEvent {
            parameter_value: 0.5 * (a + b),
            kind: BifurcationKind::Transcritical,
            location: r.location,
            evidence: [p, q],
        })
    }
}

fn closest_pair(roots: &[FixedPoint]) -> Option<[FixedPoint; 2]> {
    roots
        .windows(2)
        .min_by(|p, q| (p[1].location - p[0].location).total_cmp(&(q[1].location - q[0].location)))
        .map(|p| [p[0], p[1]])
}

/// Greedy nearest-neighbour matching of two root sets of equal size: returns
/// index pairs `(i in a, j in b)`.
fn match_roots(a: &[FixedPoint], b: &[FixedPoint]) -> Vec<(usize, usize)> {
    let mut candidates: Vec<(f64, usize, usize)> = Vec::new();
    for (i, p) in a.iter().enumerate() {
        for (j, q) in b.iter().enumerate() {
            candidates.push(((p.location - q.location).abs(), i, j));
        }
    }
    candidates.sort_by(|x, y| x.0.total_cmp(&y.0));
    let (mut used_a, mut used_b) = (vec![false; a.len()], vec![false; b.len()]);
    let mut out = Vec::new();
    for (_, i, j) in candidates {
        if !used_a[i] && !used_b[j] {
            used_a[i] = true;
            used_b[j] = true;
            out.push((i, j));
        }
    }
    out
}

/// Saddle-node and transcritical bifurcations of the drift across `mu_grid`.
///
/// Grid points at which a root is degenerate (the grid hits the event exactly)
/// are skipped, and the neighbouring regular points are compared instead.
pub fn scan_bifurcations(family: &ModelFamily, mu_grid: &[f64], x_range: (f64, f64)) -> Result<Vec<BifurcationEvent>> {
    scan_bifurcations_with(family, mu_grid, x_range, RootOptions::default())
}

pub fn scan_bifurcations_with(
    family: &ModelFamily,
    mu_grid: &[f64],
    x_range: (f64, f64),
    opts: RootOptions,
) -> Result<Vec<BifurcationEvent>> {
    if mu_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Domain("the parameter grid must be strictly increasing".into()));
    }
    let scanner = Scanner { family, lo: x_range.0, hi: x_range.1, opts };
    let roots: Vec<Vec<FixedPoint>> = mu_grid.par_iter().map(|&mu| scanner.roots(mu)).collect::<Result<_>>()?;
    let regular: Vec<usize> = (0..mu_grid.len()).filter(|&i| Scanner::is_regular(&roots[i])).collect();

    let mut events = Vec::new();
    for w in regular.windows(2) {
        let (i, j) = (w[0], w[1]);
        let (ra, rb) = (&roots[i], &roots[j]);
        let (mu_a, mu_b) = (mu_grid[i], mu_grid[j]);
        if ra.len() != rb.len() {
            if ra.len().abs_diff(rb.len()) % 2 == 0 {
                events.push(scanner.saddle_node(mu_a, mu_b, ra.len())?);
            } else {
                log::debug!("root count changes by an odd number between {mu_a} and {mu_b}: a root left the x-range");
            }
            continue;
        }
        let flipped = match_roots(ra, rb)
            .into_iter()
            .filter(|&(p, q)| ra[p].stability != rb[q].stability)
            .min_by(|x, y| ra[x.0].location.abs().total_cmp(&ra[y.0].location.abs()));
        if let Some((p, _)) = flipped {
            events.push(scanner.transcritical(mu_a, mu_b, ra[p].location, ra[p].drift_slope)?);
        }
    }
    Ok(events)
}
