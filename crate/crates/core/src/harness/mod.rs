//! Experiment configuration, reproducible Monte Carlo sweeps and their
//! CSV/JSON output.

pub mod render;
pub mod rows;
pub mod verify;

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::engine::{packed_strip, Engine, StopCondition};
use crate::error::{Error, Result};
use crate::grid::{Boundary, Configuration};
use crate::observables::{self, sample_box, spans, Proportion, DEFAULT_MEMORY_BUDGET};
use crate::seeding::trial_seed;
use crate::theory::{self, power_fit, PowerFit};
use crate::zeroset::{Rule, ZeroSet};

pub use rows::{AggregateKind, AggregateRow, TrialRow};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Simulate,
    EstimateT,
    EstimateLc,
    EstimatePower,
    Density,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Simulate => "simulate",
            ExperimentKind::EstimateT => "estimate-t",
            ExperimentKind::EstimateLc => "estimate-lc",
            ExperimentKind::EstimatePower => "estimate-power",
            ExperimentKind::Density => "density",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Quantity whose scaling in `1/p` an `estimate-power` run fits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Observable {
    /// Median first-occupation time.
    #[default]
    T,
    /// Critical length.
    Lc,
}

impl FromStr for Observable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "t" | "T" => Ok(Observable::T),
            "lc" | "Lc" | "L_c" => Ok(Observable::Lc),
            _ => Err(Error::Config(format!("unknown observable {s:?} (expected t or lc)"))),
        }
    }
}

/// Initial configuration of `simulate` runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Pattern {
    /// Bernoulli(`p`) cells.
    #[default]
    Random,
    /// The zero-set's row widths as runs at the bottom-left corner.
    PackedStrip,
}

impl FromStr for Pattern {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(Pattern::Random),
            "packed-strip" => Ok(Pattern::PackedStrip),
            _ => Err(Error::Config(format!("unknown pattern {s:?} (expected random or packed-strip)"))),
        }
    }
}

/// Parses a zero-set given either as row widths (`"3 2 1"`, `"inf 2"`) or
/// as a named family: `bootstrap(r)`, `line(r,s)`, `perturbed-line(r,s)`,
/// `l-finite(r,s1,s2)`, `l-infinite(r,s1,s2)`.
pub fn parse_zeroset(spec: &str) -> Result<ZeroSet> {
    let spec = spec.trim();
    let Some(open) = spec.find('(') else {
        return spec.parse();
    };
    let name = spec[..open].trim();
    let inner = spec[open + 1..]
        .strip_suffix(')')
        .ok_or_else(|| Error::Parse(format!("missing ')' in {spec:?}")))?;
    let args: Vec<u32> = inner
        .split(',')
        .map(|a| a.trim().parse().map_err(|_| Error::Parse(format!("bad argument {a:?} in {spec:?}"))))
        .collect::<Result<_>>()?;
    let arity = |k: usize| {
        if args.len() == k {
            Ok(())
        } else {
            Err(Error::Parse(format!("{name} takes {k} argument(s), got {}", args.len())))
        }
    };
    match name {
        "bootstrap" => arity(1).and_then(|_| ZeroSet::bootstrap(args[0])),
        "line" => arity(2).and_then(|_| ZeroSet::line(args[0], args[1])),
        "perturbed-line" => arity(2).and_then(|_| ZeroSet::perturbed_line(args[0], args[1])),
        "l-finite" => arity(3).and_then(|_| ZeroSet::l_finite(args[0], args[1], args[2])),
        "l-infinite" => arity(3).and_then(|_| ZeroSet::l_infinite(args[0], args[1], args[2])),
        _ => Err(Error::Parse(format!("unknown family {name:?}"))),
    }
}

fn default_trials() -> u32 {
    100
}
fn default_t_max() -> u32 {
    16
}
fn default_t_max_cap() -> u32 {
    1 << 14
}
fn default_n_min() -> usize {
    8
}
fn default_n_max() -> usize {
    4096
}
fn default_budget() -> u64 {
    DEFAULT_MEMORY_BUDGET
}
fn default_shade() -> u32 {
    render::DEFAULT_SHADE_PERIOD
}

/// Everything that determines an experiment's output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    /// Row widths or a family name, see [`parse_zeroset`].
    pub zeroset: String,
    pub rho: u32,
    #[serde(default)]
    pub boundary: Boundary,
    /// One density, or the grid of densities to sweep.
    pub p: Vec<f64>,
    #[serde(default = "default_trials")]
    pub trials: u32,
    /// Initial horizon for first-occupation times.
    #[serde(default = "default_t_max")]
    pub t_max: u32,
    /// Largest horizon the doubling loop may reach.
    #[serde(default = "default_t_max_cap")]
    pub t_max_cap: u32,
    /// Box side for `simulate` and `density`.
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default = "default_n_min")]
    pub n_min: usize,
    #[serde(default = "default_n_max")]
    pub n_max: usize,
    #[serde(default)]
    pub observable: Observable,
    #[serde(default)]
    pub pattern: Pattern,
    #[serde(default)]
    pub master_seed: u64,
    /// Bytes one trial's engine may use.
    #[serde(default = "default_budget")]
    pub memory_budget: u64,
    /// Fill the `wall_ms` column; leaves output non-reproducible.
    #[serde(default)]
    pub timing: bool,
    #[serde(default = "default_shade")]
    pub shade_period: u32,
    #[serde(default)]
    pub trials_csv: Option<PathBuf>,
    #[serde(default)]
    pub aggregate_csv: Option<PathBuf>,
    #[serde(default)]
    pub summary_json: Option<PathBuf>,
    /// Final state of trial 0 of `simulate`, as a text dump.
    #[serde(default)]
    pub dump: Option<PathBuf>,
    /// Final state of trial 0 of `simulate`, as a PPM image.
    #[serde(default)]
    pub ppm: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(experiment: ExperimentKind, zeroset: &str, rho: u32, p: Vec<f64>) -> Self {
        ExperimentConfig {
            experiment,
            zeroset: zeroset.to_string(),
            rho,
            boundary: Boundary::Zero,
            p,
            trials: default_trials(),
            t_max: default_t_max(),
            t_max_cap: default_t_max_cap(),
            n: None,
            n_min: default_n_min(),
            n_max: default_n_max(),
            observable: Observable::T,
            pattern: Pattern::Random,
            master_seed: 0,
            memory_budget: default_budget(),
            timing: false,
            shade_period: default_shade(),
            trials_csv: None,
            aggregate_csv: None,
            summary_json: None,
            dump: None,
            ppm: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn rule(&self) -> Result<Rule> {
        Rule::new(parse_zeroset(&self.zeroset)?, self.rho)
    }

    /// Checks every field and builds the rule.
    pub fn validate(&self) -> Result<Rule> {
        let bad = |m: String| Err(Error::Config(m));
        let rule = self.rule()?;
        if self.p.is_empty() {
            return bad("at least one p is required".into());
        }
        if let Some(p) = self.p.iter().find(|p| !(**p > 0.0 && **p <= 1.0)) {
            return bad(format!("p = {p} outside (0, 1]"));
        }
        if self.trials < 1 {
            return bad("trials must be at least 1".into());
        }
        if self.t_max < 1 || self.t_max_cap < self.t_max {
            return bad(format!("need 1 <= t_max <= t_max_cap, got {} and {}", self.t_max, self.t_max_cap));
        }
        match self.experiment {
            ExperimentKind::EstimatePower => {
                if self.p.len() < 3 || self.p.windows(2).any(|w| w[1] >= w[0]) {
                    return bad("estimate-power needs a strictly decreasing grid of at least 3 values of p".into());
                }
            }
            ExperimentKind::Simulate | ExperimentKind::Density => {
                let Some(n) = self.n else {
                    return bad(format!("{} needs a box side n", self.experiment));
                };
                if n == 0 {
                    return bad("box side must be positive".into());
                }
                if self.boundary == Boundary::Periodic && n < 2 * self.rho as usize + 1 {
                    return Err(Error::TorusTooSmall { n, rho: self.rho });
                }
            }
            _ => {}
        }
        if matches!(self.experiment, ExperimentKind::EstimateLc)
            || (self.experiment == ExperimentKind::EstimatePower && self.observable == Observable::Lc)
        {
            if self.n_min == 0 || self.n_min >= self.n_max {
                return bad(format!("need 0 < n_min < n_max, got {} and {}", self.n_min, self.n_max));
            }
        }
        if self.shade_period == 0 {
            return bad("shade period must be positive".into());
        }
        Ok(rule)
    }
}

/// Rows and summary of one experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub trials: Vec<TrialRow>,
    pub aggregates: Vec<AggregateRow>,
    pub fit: Option<PowerFit>,
    pub summary: serde_json::Value,
    /// Final state of trial 0 of a `simulate` run.
    pub snapshot: Option<Configuration>,
}

impl ExperimentResult {
    pub fn trials_csv(&self) -> Result<Vec<u8>> {
        let mut buf = Vec::new();
        rows::write_trials(&mut buf, &self.trials)?;
        Ok(buf)
    }

    pub fn aggregate_csv(&self) -> Result<Vec<u8>> {
        let mut buf = Vec::new();
        rows::write_aggregates(&mut buf, &self.aggregates)?;
        Ok(buf)
    }

    /// Writes every output path named in `config`.
    pub fn write_outputs(&self, config: &ExperimentConfig) -> Result<()> {
        let write = |path: &Path, bytes: &[u8]| {
            std::fs::write(path, bytes).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
        };
        if let Some(path) = &config.trials_csv {
            write(path, &self.trials_csv()?)?;
        }
        if let Some(path) = &config.aggregate_csv {
            write(path, &self.aggregate_csv()?)?;
        }
        if let Some(path) = &config.summary_json {
            let text = serde_json::to_string_pretty(&self.summary).map_err(|e| Error::Io(e.to_string()))?;
            write(path, text.as_bytes())?;
        }
        if let Some(snap) = &self.snapshot {
            if let Some(path) = &config.dump {
                write(path, snap.to_dump().as_bytes())?;
            }
            if let Some(path) = &config.ppm {
                write(path, &render::render_ppm(snap, config.shade_period))?;
            }
        }
        Ok(())
    }
}

struct Ctx<'a> {
    config: &'a ExperimentConfig,
    rule: Rule,
    zeroset: String,
}

impl Ctx<'_> {
    fn trial_row(&self, p: f64, n: usize, trial: u32, t: Option<u32>, t_max: u32, wall_ms: u64) -> TrialRow {
        let c = self.config;
        TrialRow {
            experiment: c.experiment.name().to_string(),
            zeroset: self.zeroset.clone(),
            rho: c.rho,
            boundary: c.boundary,
            p,
            n,
            trial,
            seed: trial_seed(c.master_seed, u64::from(trial)),
            t,
            censored: t.is_none(),
            t_max,
            wall_ms: if c.timing { wall_ms } else { 0 },
        }
    }

    fn aggregate(&self, kind: AggregateKind) -> AggregateRow {
        let c = self.config;
        AggregateRow::new(c.experiment.name(), kind, &self.zeroset, c.rho, c.boundary, c.trials)
    }
}

/// Runs `config` on the current rayon pool. Output is identical for any
/// number of worker threads unless `timing` is set.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult> {
    let rule = config.validate()?;
    let ctx = Ctx { config, zeroset: rule.zero_set().to_string(), rule };
    let mut out = match config.experiment {
        ExperimentKind::EstimateT => estimate_t(&ctx)?,
        ExperimentKind::EstimateLc => estimate_lc(&ctx)?,
        ExperimentKind::EstimatePower => match config.observable {
            Observable::T => estimate_t(&ctx)?,
            Observable::Lc => estimate_lc(&ctx)?,
        },
        ExperimentKind::Density | ExperimentKind::Simulate => fixation_runs(&ctx)?,
    };
    rows::sort_trials(&mut out.trials);
    rows::sort_aggregates(&mut out.aggregates);
    out.summary = summary(&ctx, &out);
    Ok(out)
}

fn empty_result() -> ExperimentResult {
    ExperimentResult { trials: Vec::new(), aggregates: Vec::new(), fit: None, summary: json!({}), snapshot: None }
}

fn add_fit(ctx: &Ctx, out: &mut ExperimentResult, points: &[(f64, f64)]) -> Result<()> {
    let wanted = ctx.config.experiment == ExperimentKind::EstimatePower;
    if points.len() < 3 {
        if wanted {
            return Err(Error::DegenerateFit(format!("only {} of the p values gave a usable point", points.len())));
        }
        return Ok(());
    }
    let fit = power_fit(points)?;
    let mut row = ctx.aggregate(AggregateKind::Fit);
    row.slope = Some(fit.slope);
    row.slope_stderr = Some(fit.stderr);
    if ctx.config.observable == Observable::T {
        if let Ok(power) = theory::critical_power(ctx.rule.zero_set()) {
            let (lo, hi) = power.range();
            row.theory_low = Some(*lo.numer() as f64 / *lo.denom() as f64);
            row.theory_high = Some(*hi.numer() as f64 / *hi.denom() as f64);
        }
    }
    out.aggregates.push(row);
    out.fit = Some(fit);
    Ok(())
}

fn estimate_t(ctx: &Ctx) -> Result<ExperimentResult> {
    let c = ctx.config;
    let mut out = empty_result();
    let mut points = Vec::new();
    for &p in &c.p {
        let s = observables::sample_first_occupation(
            &ctx.rule,
            p,
            c.trials,
            c.t_max,
            c.t_max_cap,
            c.master_seed,
            c.memory_budget,
        )?;
        let side = 2 * observables::cone_radius(c.rho, s.t_max) as usize + 1;
        for (i, (v, ms)) in s.values.iter().zip(&s.wall_ms).enumerate() {
            out.trials.push(ctx.trial_row(p, side, i as u32, v.value, s.t_max, *ms));
        }
        let mut row = ctx.aggregate(AggregateKind::Median);
        row.p = Some(p);
        row.n = Some(side);
        row.uncensored = Some(s.values.iter().filter(|v| !v.is_censored()).count() as u32);
        row.t_max = Some(s.t_max);
        row.median_t = s.median;
        out.aggregates.push(row);
        // log T needs T > 0; a zero median means p is too large to resolve.
        if let Some(m) = s.median.filter(|&m| m > 0.0) {
            points.push((p, m));
        }
    }
    add_fit(ctx, &mut out, &points)?;
    Ok(out)
}

fn estimate_lc(ctx: &Ctx) -> Result<ExperimentResult> {
    let c = ctx.config;
    let mut out = empty_result();
    let mut points = Vec::new();
    for &p in &c.p {
        let mut trial_rows = Vec::new();
        let est = observables::half_crossing(c.n_min, c.n_max, c.trials, |n| {
            let runs: Vec<(Option<u32>, u64)> = (0..c.trials)
                .into_par_iter()
                .map(|i| {
                    let start = Instant::now();
                    let seed = trial_seed(c.master_seed, u64::from(i));
                    let config = sample_box(seed, p, 0, 0, n, n, Boundary::Zero)?;
                    let (_, t) = spans(&ctx.rule, config)?;
                    Ok((t, start.elapsed().as_millis() as u64))
                })
                .collect::<Result<_>>()?;
            let successes = runs.iter().filter(|(t, _)| t.is_some()).count() as u32;
            for (i, (t, ms)) in runs.into_iter().enumerate() {
                trial_rows.push(ctx.trial_row(p, n, i as u32, t, 0, ms));
            }
            Ok(successes)
        })?;
        out.trials.append(&mut trial_rows);
        for probe in &est.probe_points {
            let prop = Proportion { successes: probe.successes, trials: probe.trials };
            let (lo, hi) = prop.wilson();
            let mut row = ctx.aggregate(AggregateKind::Probe);
            row.p = Some(p);
            row.n = Some(probe.n);
            row.successes = Some(probe.successes);
            row.mean = Some(prop.estimate());
            row.ci_low = Some(lo);
            row.ci_high = Some(hi);
            out.aggregates.push(row);
        }
        let mut row = ctx.aggregate(AggregateKind::Lc);
        row.p = Some(p);
        row.n_star = Some(est.n_star);
        out.aggregates.push(row);
        points.push((p, est.n_star as f64));
    }
    add_fit(ctx, &mut out, &points)?;
    Ok(out)
}

/// Density of the final state, its fixation step, and whether it is full.
fn run_to_fixation(rule: &Rule, start: Configuration) -> Result<(Configuration, u32)> {
    let mut engine = Engine::new(start, rule.clone())?;
    let outcome = engine.run(&StopCondition::until_fixed());
    Ok((engine.into_config(), outcome.stop_time.saturating_sub(1)))
}

fn fixation_runs(ctx: &Ctx) -> Result<ExperimentResult> {
    let c = ctx.config;
    let n = c.n.expect("validated");
    let mut out = empty_result();
    for &p in &c.p {
        let runs: Vec<(Configuration, u32, u64)> = (0..c.trials)
            .into_par_iter()
            .map(|i| {
                let start = Instant::now();
                let seed = trial_seed(c.master_seed, u64::from(i));
                let init = match (c.experiment, c.pattern) {
                    (ExperimentKind::Simulate, Pattern::PackedStrip) => {
                        let mut strip = packed_strip(&ctx.rule, n)?;
                        if c.boundary == Boundary::Periodic {
                            strip = Configuration::from_fn(n, n, Boundary::Periodic, |x, y| strip.is_occupied(x, y))?;
                        }
                        strip
                    }
                    _ => sample_box(seed, p, 0, 0, n, n, c.boundary)?,
                };
                let (end, t) = run_to_fixation(&ctx.rule, init)?;
                Ok((end, t, start.elapsed().as_millis() as u64))
            })
            .collect::<Result<_>>()?;
        let densities: Vec<f64> = runs.iter().map(|(end, _, _)| end.density()).collect();
        let spanned = runs.iter().filter(|(end, _, _)| end.is_full()).count() as u32;
        for (i, (end, t, ms)) in runs.iter().enumerate() {
            let row_t = match c.experiment {
                ExperimentKind::Simulate => end.is_full().then_some(*t),
                _ => Some(*t),
            };
            out.trials.push(ctx.trial_row(p, n, i as u32, row_t, 0, *ms));
        }
        let k = densities.len() as f64;
        let mean = densities.iter().sum::<f64>() / k;
        let var = if k > 1.0 { densities.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (k - 1.0) } else { 0.0 };
        let mut row = ctx.aggregate(AggregateKind::Density);
        row.p = Some(p);
        row.n = Some(n);
        row.successes = Some(spanned);
        row.mean = Some(mean);
        row.stderr = Some((var / k).sqrt());
        out.aggregates.push(row);
        if out.snapshot.is_none() {
            out.snapshot = runs.into_iter().next().map(|(end, _, _)| end);
        }
    }
    Ok(out)
}

fn summary(ctx: &Ctx, out: &ExperimentResult) -> serde_json::Value {
    let theory = theory::critical_power(ctx.rule.zero_set()).ok();
    json!({
        "schema": "ydgrow-summary v1",
        "config": ctx.config,
        "rule": ctx.rule.to_string(),
        "aggregates": out.aggregates,
        "fit": out.fit,
        "theory": theory,
        "trials_written": out.trials.len(),
    })
}

/// Process exit status for an error: 3 for resource and I/O failures,
/// 2 for everything caused by the requested configuration.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::MemoryBudgetExceeded { .. } | Error::Io(_) | Error::Dump(_) => 3,
        _ => 2,
    }
}

/// When [`snapshot`] stops, besides fixation.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SnapshotStop {
    pub t_stop: Option<u32>,
    /// Stop once at least this fraction of the box is occupied.
    pub density: Option<f64>,
}

/// Evolves trial 0 of `config` at its first density (or its packed
/// strip) and returns the state at the stopping time.
pub fn snapshot(config: &ExperimentConfig, stop: SnapshotStop) -> Result<Configuration> {
    let rule = config.validate()?;
    let n = config.n.ok_or_else(|| Error::Config("a snapshot needs a box side n".into()))?;
    let init = match config.pattern {
        Pattern::PackedStrip => packed_strip(&rule, n)?,
        Pattern::Random => sample_box(trial_seed(config.master_seed, 0), config.p[0], 0, 0, n, n, config.boundary)?,
    };
    let mut engine = Engine::new(init, rule)?;
    loop {
        let c = engine.config();
        if stop.t_stop.is_some_and(|t| c.time() >= t) || stop.density.is_some_and(|d| c.density() >= d) {
            break;
        }
        if engine.step() == 0 {
            break;
        }
    }
    Ok(engine.into_config())
}
