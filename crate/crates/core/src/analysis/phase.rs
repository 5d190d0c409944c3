use rayon::prelude::*;
use serde::Serialize;

use super::ModelFamily;
use crate::asymptotics::phi0;
use crate::exact::{detect_absorbing, Absorption};
use crate::model::{find_fixed_points_with, FixedPoint, RateExpansion, RootOptions, Stability};
use crate::{Error, Result};

/// A local minimum of `phi0` on a tracked branch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BranchMinimum {
    pub branch_id: usize,
    pub x: f64,
    pub phi0: f64,
}

/// Everything computed at one parameter value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhasePoint {
    pub mu: f64,
    pub fixed_points: Vec<FixedPoint>,
    pub minima: Vec<BranchMinimum>,
    /// Branch holding the deepest minimum, if any minimum exists.
    pub global_branch: Option<usize>,
}

/// A refined parameter value at which two minima have equal depth and the
/// global minimum switches between them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MaxwellPoint {
    pub mu: f64,
    /// `(before, after)`: the globally deepest branch below and above `mu`.
    pub branches: (usize, usize),
    pub x: (f64, f64),
    pub phi0: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseDiagram {
    pub points: Vec<PhasePoint>,
    pub transitions: Vec<MaxwellPoint>,
}

/// One line of `phase.csv`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseRow {
    pub mu: f64,
    pub branch_id: usize,
    pub x_min: f64,
    pub phi0_min: f64,
    pub is_global: bool,
}

impl PhaseDiagram {
    /// One row per (parameter value, local minimum), with each transition
    /// inserted in order as two rows at its refined `mu`, both flagged global.
    pub fn rows(&self) -> Vec<PhaseRow> {
        let mut out = Vec::new();
        let mut pending = self.transitions.iter().peekable();
        for p in &self.points {
            while let Some(t) = pending.next_if(|t| t.mu < p.mu) {
                out.extend(transition_rows(t));
            }
            out.extend(p.minima.iter().map(|m| PhaseRow {
                mu: p.mu,
                branch_id: m.branch_id,
                x_min: m.x,
                phi0_min: m.phi0,
                is_global: Some(m.branch_id) == p.global_branch,
            }));
        }
        for t in pending {
            out.extend(transition_rows(t));
        }
        out
    }
}

fn transition_rows(t: &MaxwellPoint) -> [PhaseRow; 2] {
    [
        PhaseRow { mu: t.mu, branch_id: t.branches.0, x_min: t.x.0, phi0_min: t.phi0.0, is_global: true },
        PhaseRow { mu: t.mu, branch_id: t.branches.1, x_min: t.x.1, phi0_min: t.phi0.1, is_global: true },
    ]
}

/// Fixed points at one parameter value, and `(x, phi0)` for each stable one.
type Sample = (Vec<FixedPoint>, Vec<(f64, f64)>);

struct Sampler<'a> {
    family: &'a ModelFamily,
    lo: f64,
    hi: f64,
    opts: RootOptions,
}

impl Sampler<'_> {
    fn expansion(&self, mu: f64) -> Result<RateExpansion> {
        self.family.expansion_at(mu)
    }

    /// Fixed points and the `(x, phi0)` of every stable one with `x > 0`.
    fn sample(&self, mu: f64) -> Result<Sample> {
        let exp = self.expansion(mu)?;
        let fps = find_fixed_points_with(&exp, self.lo, self.hi, self.opts)?;
        let minima = fps
            .iter()
            .filter(|f| f.stability == Stability::Stable && f.location > 0.0)
            .map(|f| Ok((f.location, phi0(&exp, f.location)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok((fps, minima))
    }

    /// `phi0` at the stable roots nearest to `xa` and `xb`.
    fn pair_at(&self, mu: f64, xa: f64, xb: f64) -> Result<((f64, f64), (f64, f64))> {
        let (_, minima) = self.sample(mu)?;
        let near = |x: f64| {
            minima
                .iter()
                .copied()
                .min_by(|p, q| (p.0 - x).abs().total_cmp(&(q.0 - x).abs()))
                .ok_or_else(|| Error::Numerical(format!("no minimum left at mu = {mu} while refining")))
        };
        let (a, b) = (near(xa)?, near(xb)?);
        if a.0 == b.0 {
            return Err(Error::Numerical(format!("competing minima merged at mu = {mu} while refining")));
        }
        Ok((a, b))
    }
}

/// Local minima of `phi0` tracked across `mu_grid`, and the Maxwell points at which
/// the global minimum switches branch while both branches persist.
pub fn phase_transition_scan(family: &ModelFamily, mu_grid: &[f64], x_range: (f64, f64)) -> Result<PhaseDiagram> {
    phase_transition_scan_with(family, mu_grid, x_range, RootOptions::default())
}

pub fn phase_transition_scan_with(
    family: &ModelFamily,
    mu_grid: &[f64],
    x_range: (f64, f64),
    opts: RootOptions,
) -> Result<PhaseDiagram> {
    if mu_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Domain("the parameter grid must be strictly increasing".into()));
    }
    if let Some(&mu) = mu_grid.first() {
        if detect_absorbing(&family.at(mu)?) == Absorption::ExtinctionAtZero {
            return Err(Error::AbsorbingFamily);
        }
    }
    let sampler = Sampler { family, lo: x_range.0.max(0.0), hi: x_range.1, opts };
    let raw: Vec<Sample> =
        mu_grid.par_iter().map(|&mu| sampler.sample(mu)).collect::<Result<_>>()?;

    // Branch continuation: nearest-neighbour matching of consecutive minima sets.
    let mut next_id = 0;
    let mut points: Vec<PhasePoint> = Vec::with_capacity(mu_grid.len());
    for (k, (fps, minima)) in raw.into_iter().enumerate() {
        let prev: &[BranchMinimum] = points.last().map_or(&[], |p| &p.minima[..]);
        let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
        for (i, m) in minima.iter().enumerate() {
            for (j, p) in prev.iter().enumerate() {
                pairs.push(((m.0 - p.x).abs(), i, j));
            }
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut ids: Vec<Option<usize>> = vec![None; minima.len()];
        let mut taken = vec![false; prev.len()];
        for (_, i, j) in pairs {
            if ids[i].is_none() && !taken[j] {
                ids[i] = Some(prev[j].branch_id);
                taken[j] = true;
            }
        }
        let mins: Vec<BranchMinimum> = minima
            .iter()
            .zip(ids)
            .map(|(&(x, p0), id)| {
                let branch_id = id.unwrap_or_else(|| {
                    next_id += 1;
                    next_id - 1
                });
                BranchMinimum { branch_id, x, phi0: p0 }
            })
            .collect();
        let global_branch = mins.iter().min_by(|a, b| a.phi0.total_cmp(&b.phi0)).map(|m| m.branch_id);
        points.push(PhasePoint { mu: mu_grid[k], fixed_points: fps, minima: mins, global_branch });
    }

    let mut transitions = Vec::new();
    for w in points.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        let (Some(ga), Some(gb)) = (a.global_branch, b.global_branch) else { continue };
        if ga == gb {
            continue;
        }
        let find = |p: &PhasePoint, id: usize| p.minima.iter().find(|m| m.branch_id == id).copied();
        let (Some(a_ga), Some(a_gb), Some(_), Some(_)) = (find(a, ga), find(a, gb), find(b, ga), find(b, gb)) else {
            // A branch was born or died here: a fold, not a Maxwell point.
            continue;
        };
        transitions.push(refine(&sampler, a.mu, b.mu, a_ga.x, a_gb.x, (ga, gb))?);
    }
    Ok(PhaseDiagram { points, transitions })
}

/// Bisects the sign of `phi0(branch a) - phi0(branch b)` down to `1e-8` in `mu`.
fn refine(s: &Sampler<'_>, mut lo: f64, mut hi: f64, xa: f64, xb: f64, ids: (usize, usize)) -> Result<MaxwellPoint> {
    let (mut xa, mut xb) = (xa, xb);
    let gap = |mu: f64, xa: f64, xb: f64| -> Result<((f64, f64), (f64, f64))> { s.pair_at(mu, xa, xb) };
    // below the transition branch a is deeper: phi0(a) - phi0(b) < 0
    let mut last = gap(lo, xa, xb)?;
    while hi - lo > 1e-8 {
        let mid = 0.5 * (lo + hi);
        let (pa, pb) = gap(mid, xa, xb)?;
        if pa.1 - pb.1 < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        (xa, xb) = (pa.0, pb.0);
        last = (pa, pb);
    }
    let (pa, pb) = last;
    Ok(MaxwellPoint { mu: 0.5 * (lo + hi), branches: ids, x: (pa.0, pb.0), phi0: (pa.1, pb.1) })
}
