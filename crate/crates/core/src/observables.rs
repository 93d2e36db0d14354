//! Measured quantities: first-occupation time, spanning, critical length
//! and final density.
//!
//! Random initial configurations come from [`LatticeField`], so each trial
//! is a pure function of its seed and Monte Carlo results do not depend on
//! how trials are scheduled across threads.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::{Engine, StopCondition, StopReason, ENGINE_BYTES_PER_CELL};
use crate::error::{Error, Result};
use crate::grid::{Boundary, Configuration};
use crate::seeding::{trial_seed, LatticeField};
use crate::zeroset::Rule;

pub const DEFAULT_MEMORY_BUDGET: u64 = 2 << 30;

/// Two-sided 95% normal quantile.
const Z95: f64 = 1.959_963_984_540_054;

/// A first-occupation time observed up to a horizon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CensoredTime {
    /// `None` when the origin was still empty at `t_max`.
    pub value: Option<u32>,
    pub t_max: u32,
}

impl CensoredTime {
    pub fn is_censored(&self) -> bool {
        self.value.is_none()
    }
}

/// Half-width of the box that reproduces the lattice dynamics at the origin
/// up to time `t_max`.
pub fn cone_radius(rho: u32, t_max: u32) -> u64 {
    u64::from(rho) * (u64::from(t_max) + 1)
}

/// Checks that an engine over `cells` cells fits in `budget` bytes.
pub fn check_budget(cells: u64, budget: u64) -> Result<()> {
    let bytes = (cells as f64 * ENGINE_BYTES_PER_CELL).ceil() as u64;
    if bytes > budget {
        return Err(Error::MemoryBudgetExceeded { cells, bytes, budget });
    }
    Ok(())
}

/// Initial configuration of trial `seed` on the box with lower-left corner
/// at lattice site `(x0, y0)`.
pub fn sample_box(
    seed: u64,
    p: f64,
    x0: i64,
    y0: i64,
    width: usize,
    height: usize,
    boundary: Boundary,
) -> Result<Configuration> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Parameter(format!("probability {p} outside [0, 1]")));
    }
    let sampler = LatticeField::new(seed).sampler(p);
    Configuration::from_fn(width, height, boundary, |x, y| sampler.occupied(x0 + x as i64, y0 + y as i64))
}

/// First time the origin of the infinite lattice is occupied, observed up to
/// `t_max`, for the initial configuration of trial `seed`.
///
/// A site's state at time `t` depends only on initial sites within
/// `l1`-distance `rho * t`, so a zero-boundary box of half-width
/// `rho * (t_max + 1)` centred on the origin gives the exact answer.
pub fn first_occupation_time(rule: &Rule, p: f64, t_max: u32, seed: u64, budget: u64) -> Result<CensoredTime> {
    if t_max < 1 {
        return Err(Error::Parameter("t_max must be at least 1".into()));
    }
    let radius = cone_radius(rule.rho(), t_max);
    let side = 2 * radius + 1;
    check_budget(side * side, budget)?;
    let (side, radius) = (side as usize, radius as i64);
    let config = sample_box(seed, p, -radius, -radius, side, side, Boundary::Zero)?;
    let origin = radius as usize;
    let mut engine = Engine::new(config, rule.clone())?;
    let outcome = engine.run(&StopCondition::until_origin(origin, origin).with_t_max(t_max));
    let value = (outcome.stop_reason == StopReason::OriginOccupied).then_some(outcome.stop_time);
    Ok(CensoredTime { value, t_max })
}

/// Runs the zero-boundary dynamics on `config` to fixation. Returns whether
/// the whole box was occupied and, if so, the step at which that happened.
pub fn spans(rule: &Rule, config: Configuration) -> Result<(bool, Option<u32>)> {
    let mut engine = Engine::new(config, rule.clone())?;
    engine.run(&StopCondition::until_fixed());
    let c = engine.config();
    if c.is_full() {
        let t = c.birth_plane().iter().copied().max().unwrap_or(0);
        Ok((true, Some(t)))
    } else {
        Ok((false, None))
    }
}

/// Monte Carlo estimate of a probability with its 95% Wilson interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Proportion {
    pub successes: u32,
    pub trials: u32,
}

impl Proportion {
    pub fn estimate(&self) -> f64 {
        f64::from(self.successes) / f64::from(self.trials)
    }

    pub fn at_least_half(&self) -> bool {
        2 * self.successes >= self.trials
    }

    pub fn wilson(&self) -> (f64, f64) {
        let n = f64::from(self.trials);
        let phat = self.estimate();
        let z2 = Z95 * Z95;
        let denom = 1.0 + z2 / n;
        let center = (phat + z2 / (2.0 * n)) / denom;
        let half = Z95 / denom * (phat * (1.0 - phat) / n + z2 / (4.0 * n * n)).sqrt();
        ((center - half).max(0.0), (center + half).min(1.0))
    }
}

/// Spanning times of `trials` zero-boundary boxes `B_n`, `None` for boxes
/// that are not spanned. Trial `i` uses seed `trial_seed(master_seed, i)`.
pub fn spanning_trials(rule: &Rule, n: usize, p: f64, trials: u32, master_seed: u64) -> Result<Vec<Option<u32>>> {
    if trials < 1 {
        return Err(Error::Parameter("need at least one trial".into()));
    }
    (0..trials)
        .into_par_iter()
        .map(|i| {
            let config = sample_box(trial_seed(master_seed, u64::from(i)), p, 0, 0, n, n, Boundary::Zero)?;
            spans(rule, config).map(|(_, t)| t)
        })
        .collect()
}

/// Fraction of `trials` zero-boundary boxes `B_n` that are spanned.
pub fn spanning_probability(rule: &Rule, n: usize, p: f64, trials: u32, master_seed: u64) -> Result<Proportion> {
    let results = spanning_trials(rule, n, p, trials, master_seed)?;
    Ok(Proportion { successes: results.iter().filter(|t| t.is_some()).count() as u32, trials })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Probe {
    pub n: usize,
    pub successes: u32,
    pub trials: u32,
}

/// Critical-length estimate with every probe retained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LcEstimate {
    /// Smallest probed `n` whose spanning estimate is at least 1/2.
    pub n_star: usize,
    pub trials_per_n: u32,
    pub probe_points: Vec<Probe>,
}

/// Locates the smallest box side whose estimated spanning probability
/// reaches 1/2: doubling from `n_min` until the estimate crosses, then
/// bisection down to a bracket of width 1.
pub fn critical_length(
    rule: &Rule,
    p: f64,
    trials: u32,
    n_min: usize,
    n_max: usize,
    master_seed: u64,
) -> Result<LcEstimate> {
    half_crossing(n_min, n_max, trials, |n| {
        spanning_probability(rule, n, p, trials, master_seed).map(|est| est.successes)
    })
}

/// The search behind [`critical_length`], with `probe(n)` returning the
/// number of spanned boxes out of `trials`.
pub fn half_crossing<F>(n_min: usize, n_max: usize, trials: u32, mut probe: F) -> Result<LcEstimate>
where
    F: FnMut(usize) -> Result<u32>,
{
    if n_min == 0 || n_min >= n_max {
        return Err(Error::Parameter(format!("need 0 < n_min < n_max, got {n_min}, {n_max}")));
    }
    let mut probes = Vec::new();
    let mut crosses = |n: usize| -> Result<bool> {
        let successes = probe(n)?;
        probes.push(Probe { n, successes, trials });
        Ok(2 * successes >= trials)
    };
    let mut lo = None;
    let mut n = n_min;
    let mut hi = loop {
        if crosses(n)? {
            break n;
        }
        if n == n_max {
            return Err(Error::NotBracketed { n_min, n_max });
        }
        lo = Some(n);
        n = (2 * n).min(n_max);
    };
    if let Some(mut lo) = lo {
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if crosses(mid)? {
                hi = mid;
            } else {
                lo = mid;
            }
        }
    }
    Ok(LcEstimate { n_star: hi, trials_per_n: trials, probe_points: probes })
}

/// Density of the fixed point reached from a Bernoulli(`p`) box of side `n`.
pub fn final_density(rule: &Rule, n: usize, p: f64, boundary: Boundary, seed: u64) -> Result<f64> {
    let config = sample_box(seed, p, 0, 0, n, n, boundary)?;
    let mut engine = Engine::new(config, rule.clone())?;
    Ok(engine.run(&StopCondition::until_fixed()).final_density)
}

/// Median of a sample with right-censoring, or `None` unless strictly more
/// than half of the values are observed (which makes the middle order
/// statistics uncensored).
pub fn censored_median(sample: &[CensoredTime]) -> Option<f64> {
    let n = sample.len();
    let mut observed: Vec<u32> = sample.iter().filter_map(|t| t.value).collect();
    if n == 0 || 2 * observed.len() <= n {
        return None;
    }
    observed.sort_unstable();
    // Censored values sort after every observed one.
    Some(if n % 2 == 1 {
        f64::from(observed[n / 2])
    } else {
        (f64::from(observed[n / 2 - 1]) + f64::from(observed[n / 2])) / 2.0
    })
}

/// First-occupation times of `trials` trials at one density.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSample {
    pub p: f64,
    /// Horizon used for the reported values.
    pub t_max: u32,
    /// Trial seeds, in trial order.
    pub seeds: Vec<u64>,
    pub values: Vec<CensoredTime>,
    /// Wall-clock time of each trial at the reported horizon.
    pub wall_ms: Vec<u64>,
    pub median: Option<f64>,
}

/// Samples first-occupation times, doubling the horizon (up to `t_max_cap`)
/// and rerunning every trial while half or more of them are censored.
pub fn sample_first_occupation(
    rule: &Rule,
    p: f64,
    trials: u32,
    t_max: u32,
    t_max_cap: u32,
    master_seed: u64,
    budget: u64,
) -> Result<TimeSample> {
    if trials < 1 {
        return Err(Error::Parameter("need at least one trial".into()));
    }
    let seeds: Vec<u64> = (0..u64::from(trials)).map(|i| trial_seed(master_seed, i)).collect();
    let mut horizon = t_max.min(t_max_cap).max(1);
    loop {
        let timed: Vec<(CensoredTime, u64)> = seeds
            .par_iter()
            .map(|&s| {
                let start = Instant::now();
                let t = first_occupation_time(rule, p, horizon, s, budget)?;
                Ok((t, start.elapsed().as_millis() as u64))
            })
            .collect::<Result<_>>()?;
        let (values, wall_ms): (Vec<_>, Vec<_>) = timed.into_iter().unzip();
        let median = censored_median(&values);
        let next = horizon.saturating_mul(2);
        if median.is_some() || next > t_max_cap {
            return Ok(TimeSample { p, t_max: horizon, seeds, values, wall_ms, median });
        }
        horizon = next;
    }
}
