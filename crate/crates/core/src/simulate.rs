//! Gillespie (direct method) trajectories and Monte-Carlo passage times.
//!
//! Every replica `r` draws from its own ChaCha8 stream `(seed, r)`, so a
//! replica's path does not depend on how replicas are scheduled across threads.

use std::time::{Duration, Instant};

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use rayon::prelude::*;
use serde::Serialize;

use crate::model::{BirthDeathModel, Side};
use crate::{Error, Result};

/// When to end a trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Stop {
    /// Run until the clock passes this time.
    TMax(f64),
    /// Run until the state first equals this value.
    HitState(u64),
    /// Run for this many events.
    MaxEvents(u64),
}

/// A simulated path: `states[i]` is the state entered at `times[i]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub n0: u64,
    pub times: Vec<f64>,
    pub states: Vec<u64>,
    /// Clock value at which the simulation stopped (`tMax`, or the last event).
    pub t_end: f64,
    /// True if the chain sat in a state with zero total rate.
    pub absorbed: bool,
    pub seed: u64,
    pub stream: u64,
}

impl Trajectory {
    /// Time spent in each state `0..=max` over `[0, t_end]`.
    pub fn occupancy(&self) -> Vec<f64> {
        let max = self.states.iter().copied().chain([self.n0]).max().unwrap_or(0) as usize;
        let mut occ = vec![0.0; max + 1];
        let (mut t, mut n) = (0.0, self.n0);
        for (&ti, &ni) in self.times.iter().zip(&self.states) {
            occ[n as usize] += ti - t;
            t = ti;
            n = ni;
        }
        occ[n as usize] += self.t_end - t;
        occ
    }
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
struct Clock {
    sum: f64,
    comp: f64,
}

impl Clock {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn now(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Rates evaluated on demand and remembered.
struct RateCache<'a> {
    model: &'a BirthDeathModel,
    v: f64,
    rates: Vec<(f64, f64)>,
}

impl<'a> RateCache<'a> {
    fn new(model: &'a BirthDeathModel, v: f64) -> Self {
        Self { model, v, rates: Vec::new() }
    }

    fn get(&mut self, n: u64) -> Result<(f64, f64)> {
        let i = n as usize;
        while self.rates.len() <= i {
            let m = self.rates.len() as u64;
            let (u, w) = self.model.evaluate_rates(self.v, m)?;
            self.rates.push((u, if m == 0 { 0.0 } else { w }));
        }
        Ok(self.rates[i])
    }
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// One direct-method step: holding time and whether the jump is upward.
/// `None` if the total rate is zero.
fn step(rng: &mut ChaCha8Rng, u: f64, w: f64) -> Option<(f64, bool)> {
    let a = u + w;
    if a <= 0.0 {
        return None;
    }
    let e: f64 = rng.sample(Exp1);
    let r: f64 = rng.gen();
    Some((e / a, r * a < u))
}

/// Simulates one path from `n0` on stream 0 of `seed`.
pub fn ssa_trajectory(model: &BirthDeathModel, v: f64, n0: u64, stop: Stop, seed: u64) -> Result<Trajectory> {
    ssa_trajectory_on_stream(model, v, n0, stop, seed, 0)
}

/// Simulates one path from `n0` on the given stream of `seed`.
pub fn ssa_trajectory_on_stream(
    model: &BirthDeathModel,
    v: f64,
    n0: u64,
    stop: Stop,
    seed: u64,
    stream: u64,
) -> Result<Trajectory> {
    let mut rng = stream_rng(seed, stream);
    let mut cache = RateCache::new(model, v);
    let mut clock = Clock::default();
    let (mut times, mut states) = (Vec::new(), Vec::new());
    let mut n = n0;
    let mut absorbed = false;
    loop {
        match stop {
            Stop::HitState(target) if n == target => break,
            Stop::MaxEvents(k) if states.len() as u64 >= k => break,
            _ => {}
        }
        let (u, w) = cache.get(n)?;
        let Some((dt, up)) = step(&mut rng, u, w) else {
            absorbed = true;
            break;
        };
        if let Stop::TMax(t_max) = stop {
            if clock.now() + dt > t_max {
                break;
            }
        }
        clock.add(dt);
        n = if up { n + 1 } else { n - 1 };
        times.push(clock.now());
        states.push(n);
    }
    let t_end = match stop {
        Stop::TMax(t_max) => t_max,
        _ => clock.now(),
    };
    Ok(Trajectory { n0, times, states, t_end, absorbed, seed, stream })
}

/// Monte-Carlo estimate of a mean first passage time.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HittingTimeEstimate {
    pub mean: f64,
    /// Sample standard deviation over `sqrt(replicas)`.
    pub stderr: f64,
    /// Completed replicas.
    pub replicas: u64,
    pub seed: u64,
    /// Set when the wall-clock budget stopped the run early.
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub partial: bool,
}

/// Streaming mean and variance with an order-fixed pairwise merge.
#[derive(Debug, Clone, Copy, Default)]
pub struct Welford {
    pub count: u64,
    pub mean: f64,
    m2: f64,
}

impl Welford {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let d = x - self.mean;
        self.mean += d / self.count as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn merge(&mut self, other: &Welford) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let n = (self.count + other.count) as f64;
        let d = other.mean - self.mean;
        self.mean += d * other.count as f64 / n;
        self.m2 += other.m2 + d * d * self.count as f64 * other.count as f64 / n;
        self.count += other.count;
    }

    pub fn sample_variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }
}

/// Options for [`mc_mfpt_with`].
#[derive(Debug, Clone, Copy, Default)]
pub struct McOptions {
    /// Stop launching new batches once the projected run time would exceed this.
    pub budget: Option<Duration>,
}

fn passage_time(cache: &mut RateCache<'_>, n0: u64, n_absorb: u64, seed: u64, replica: u64) -> Result<f64> {
    let mut rng = stream_rng(seed, replica);
    let mut clock = Clock::default();
    let mut n = n0;
    while n != n_absorb {
        let (u, w) = cache.get(n)?;
        let Some((dt, up)) = step(&mut rng, u, w) else {
            return Err(Error::InfiniteMfpt { side: Side::Birth, state: n });
        };
        clock.add(dt);
        n = if up { n + 1 } else { n - 1 };
    }
    Ok(clock.now())
}

/// First passage time of a single replica, exactly as [`mc_mfpt`] computes it.
pub fn mc_replica_time(model: &BirthDeathModel, v: f64, n0: u64, n_absorb: u64, seed: u64, replica: u64) -> Result<f64> {
    passage_time(&mut RateCache::new(model, v), n0, n_absorb, seed, replica)
}

/// Refuses passages that some replicas would never complete.
fn check_passage_certain(model: &BirthDeathModel, v: f64, n0: u64, n_absorb: u64) -> Result<()> {
    if n0 < n_absorb {
        let mut floor = n0;
        while floor > 0 && model.death_rate(v, floor)? > 0.0 {
            floor -= 1;
        }
        for m in floor..n_absorb {
            if model.birth_rate(v, m)? == 0.0 {
                return Err(Error::InfiniteMfpt { side: Side::Birth, state: m });
            }
        }
    } else {
        for m in n_absorb + 1..=n0 {
            if model.death_rate(v, m)? == 0.0 {
                return Err(Error::InfiniteMfpt { side: Side::Death, state: m });
            }
        }
    }
    Ok(())
}

/// Mean first passage time from `n0` to `n_absorb` over `replicas` SSA runs.
pub fn mc_mfpt(model: &BirthDeathModel, v: f64, n0: u64, n_absorb: u64, replicas: u64, seed: u64) -> Result<HittingTimeEstimate> {
    mc_mfpt_with(model, v, n0, n_absorb, replicas, seed, McOptions::default())
}

const CHUNK: u64 = 512;
const CHUNKS_PER_WAVE: u64 = 64;

pub fn mc_mfpt_with(
    model: &BirthDeathModel,
    v: f64,
    n0: u64,
    n_absorb: u64,
    replicas: u64,
    seed: u64,
    opts: McOptions,
) -> Result<HittingTimeEstimate> {
    if replicas < 2 {
        return Err(Error::Domain(format!("need at least 2 replicas, got {replicas}")));
    }
    if n0 == n_absorb {
        return Ok(HittingTimeEstimate { mean: 0.0, stderr: 0.0, replicas, seed, partial: false });
    }
    check_passage_certain(model, v, n0, n_absorb)?;

    let chunks = replicas.div_ceil(CHUNK);
    let started = Instant::now();
    let mut total = Welford::default();
    let mut next = 0;
    let mut partial = false;
    while next < chunks {
        if let Some(budget) = opts.budget {
            if next > 0 {
                let per_chunk = started.elapsed().as_secs_f64() / next as f64;
                let wave = CHUNKS_PER_WAVE.min(chunks - next) as f64;
                let threads = rayon::current_num_threads() as f64;
                let projected = started.elapsed().as_secs_f64() + per_chunk * wave / threads.min(wave).max(1.0);
                if projected > budget.as_secs_f64() {
                    partial = true;
                    break;
                }
            }
        }
        let end = (next + CHUNKS_PER_WAVE).min(chunks);
        let stats: Vec<Result<Welford>> = (next..end)
            .into_par_iter()
            .map(|c| {
                let mut cache = RateCache::new(model, v);
                let mut acc = Welford::default();
                for r in c * CHUNK..((c + 1) * CHUNK).min(replicas) {
                    acc.push(passage_time(&mut cache, n0, n_absorb, seed, r)?);
                }
                Ok(acc)
            })
            .collect();
        for s in stats {
            total.merge(&s?);
        }
        next = end;
    }
    if total.count < 2 {
        return Err(Error::Numerical("wall-clock budget exhausted before two replicas finished".into()));
    }
    Ok(HittingTimeEstimate {
        mean: total.mean,
        stderr: (total.sample_variance() / total.count as f64).sqrt(),
        replicas: total.count,
        seed,
        partial,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;
    use crate::RateTerm;

    #[test]
    fn frozen_chain_is_absorbed_immediately() {
        let m = BirthDeathModel::new(vec![RateTerm::mass_action(0.0, 0)], vec![RateTerm::mass_action(0.0, 1)]).unwrap();
        let t = ssa_trajectory(&m, 10.0, 5, Stop::TMax(10.0), 1).unwrap();
        assert!(t.absorbed);
        assert!(t.times.is_empty());
    }

    #[test]
    fn steps_are_unit_and_times_increase() {
        let m = presets::schlogl_shallow();
        let t = ssa_trajectory(&m, 30.0, 20, Stop::MaxEvents(5000), 7).unwrap();
        assert_eq!(t.states.len(), 5000);
        let mut prev = (0.0, t.n0);
        for (&ti, &ni) in t.times.iter().zip(&t.states) {
            assert!(ti > prev.0);
            assert_eq!(ni.abs_diff(prev.1), 1);
            prev = (ti, ni);
        }
        assert_eq!(t, ssa_trajectory(&m, 30.0, 20, Stop::MaxEvents(5000), 7).unwrap());
        let occ: f64 = t.occupancy().iter().sum();
        assert!((occ - t.t_end).abs() < 1e-9 * t.t_end);
    }

    #[test]
    fn trivial_passage() {
        let m = presets::symmetric_walk(1.0);
        let e = mc_mfpt(&m, 1.0, 2, 2, 10, 3).unwrap();
        assert_eq!((e.mean, e.stderr), (0.0, 0.0));
    }

    #[test]
    fn welford_merge_matches_sequential() {
        let xs: Vec<f64> = (0..100).map(|i| ((i * 37) % 11) as f64 * 0.3).collect();
        let mut seq = Welford::default();
        xs.iter().for_each(|&x| seq.push(x));
        let (mut a, mut b) = (Welford::default(), Welford::default());
        xs[..40].iter().for_each(|&x| a.push(x));
        xs[40..].iter().for_each(|&x| b.push(x));
        a.merge(&b);
        assert!((a.mean - seq.mean).abs() < 1e-12);
        assert!((a.sample_variance() - seq.sample_variance()).abs() < 1e-12);
    }
}
