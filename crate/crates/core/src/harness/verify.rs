//! Self-checks: every invariant of the dynamics, run against a chosen
//! implementation of the update.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use serde::Serialize;

use crate::engine::{self, diagonal_nucleus, packed_strip, saturated_line_closure, Engine};
use crate::error::{Error, Result};
use crate::grid::{Boundary, Configuration, Orientation};
use crate::seeding::{trial_seed, LatticeField};
use crate::theory;
use crate::zeroset::{MinimalCount, Rule, Width, ZeroSet};

/// An implementation of the synchronous update.
pub trait Dynamics: Sync {
    fn name(&self) -> &str;

    /// Applies up to `steps` updates, stopping early once a step adds
    /// nothing, and calls `visit` with the state after every step.
    fn evolve(
        &self,
        config: Configuration,
        rule: &Rule,
        steps: u32,
        visit: &mut dyn FnMut(&Configuration),
    ) -> Result<Configuration>;
}

/// The incremental frontier engine used by every experiment.
pub struct IncrementalEngine;

impl Dynamics for IncrementalEngine {
    fn name(&self) -> &str {
        "incremental"
    }

    fn evolve(
        &self,
        config: Configuration,
        rule: &Rule,
        steps: u32,
        visit: &mut dyn FnMut(&Configuration),
    ) -> Result<Configuration> {
        let mut e = Engine::new(config, rule.clone())?;
        for _ in 0..steps {
            let added = e.step();
            visit(e.config());
            if added == 0 {
                break;
            }
        }
        Ok(e.into_config())
    }
}

/// Whole-box recount each step.
pub struct FullRecount;

impl Dynamics for FullRecount {
    fn name(&self) -> &str {
        "recount"
    }

    fn evolve(
        &self,
        mut config: Configuration,
        rule: &Rule,
        steps: u32,
        visit: &mut dyn FnMut(&Configuration),
    ) -> Result<Configuration> {
        for _ in 0..steps {
            let added = engine::step(&mut config, rule)?;
            visit(&config);
            if added == 0 {
                break;
            }
        }
        Ok(config)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Zeroset,
    Theory,
    OracleEquivalence,
    Solidification,
    Monotonicity,
    SpeedOfLight,
    TransposeEquivariance,
    Domination,
    Inertness,
    PackedStrip,
    DiagonalNucleus,
}

impl Suite {
    pub const ALL: [Suite; 11] = [
        Suite::Zeroset,
        Suite::Theory,
        Suite::OracleEquivalence,
        Suite::Solidification,
        Suite::Monotonicity,
        Suite::SpeedOfLight,
        Suite::TransposeEquivariance,
        Suite::Domination,
        Suite::Inertness,
        Suite::PackedStrip,
        Suite::DiagonalNucleus,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Zeroset => "zeroset",
            Suite::Theory => "theory",
            Suite::OracleEquivalence => "oracle-equivalence",
            Suite::Solidification => "solidification",
            Suite::Monotonicity => "monotonicity",
            Suite::SpeedOfLight => "speed-of-light",
            Suite::TransposeEquivariance => "transpose-equivariance",
            Suite::Domination => "domination",
            Suite::Inertness => "inertness",
            Suite::PackedStrip => "packed-strip",
            Suite::DiagonalNucleus => "diagonal-nucleus",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown suite {s:?}")))
    }
}

/// Instance counts for the randomized suites.
#[derive(Debug, Clone, Copy)]
pub struct VerifyOptions {
    pub seed: u64,
    pub oracle_instances: usize,
    pub coupled_pairs: usize,
    pub domination_instances: usize,
    /// Instances for the remaining randomized suites.
    pub instances: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { seed: 0x5EED, oracle_instances: 10_000, coupled_pairs: 200, domination_instances: 500, instances: 200 }
    }
}

impl VerifyOptions {
    /// About a tenth of the default work.
    pub fn quick() -> Self {
        VerifyOptions { oracle_instances: 1000, coupled_pairs: 50, domination_instances: 100, instances: 50, ..Self::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub passed: usize,
    pub total: usize,
    /// Description of the first failing case.
    pub first_failure: Option<String>,
}

impl SuiteReport {
    pub fn ok(&self) -> bool {
        self.passed == self.total
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.ok() { "ok" } else { "FAILED" };
        write!(f, "{:<24} {:>6}/{:<6} {status}", self.suite.name(), self.passed, self.total)?;
        if let Some(why) = &self.first_failure {
            write!(f, "  first failure: {why}")?;
        }
        Ok(())
    }
}

type Check = std::result::Result<(), String>;

fn report(suite: Suite, results: Vec<Check>) -> SuiteReport {
    let total = results.len();
    let first_failure = results.iter().find_map(|r| r.clone().err());
    let passed = results.iter().filter(|r| r.is_ok()).count();
    SuiteReport { suite, passed, total, first_failure }
}

fn describe(rule: &Rule, c: &Configuration) -> String {
    format!("rule {rule}, {}x{} {} box", c.width(), c.height(), c.boundary())
}

/// Runs the chosen suites (all of them when `only` is empty).
pub fn verify(dynamics: &dyn Dynamics, only: &[Suite], opts: &VerifyOptions) -> Vec<SuiteReport> {
    let suites: Vec<Suite> = if only.is_empty() { Suite::ALL.to_vec() } else { only.to_vec() };
    suites.into_iter().map(|s| run_suite(dynamics, s, opts)).collect()
}

pub fn run_suite(d: &dyn Dynamics, suite: Suite, opts: &VerifyOptions) -> SuiteReport {
    let results = match suite {
        Suite::Zeroset => zeroset_checks(opts),
        Suite::Theory => theory_checks(),
        Suite::OracleEquivalence => randomized(opts, suite, opts.oracle_instances, |rng| oracle_case(d, rng)),
        Suite::Solidification => randomized(opts, suite, opts.instances, |rng| solidification_case(d, rng)),
        Suite::Monotonicity => randomized(opts, suite, opts.coupled_pairs, |rng| monotonicity_case(d, rng)),
        Suite::SpeedOfLight => randomized(opts, suite, opts.instances, |rng| speed_of_light_case(d, rng)),
        Suite::TransposeEquivariance => randomized(opts, suite, opts.instances, |rng| transpose_case(d, rng)),
        Suite::Domination => randomized(opts, suite, opts.domination_instances, |rng| domination_case(d, rng)),
        Suite::Inertness => inertness_checks(d, opts),
        Suite::PackedStrip => packed_strip_checks(d),
        Suite::DiagonalNucleus => diagonal_checks(d),
    };
    report(suite, results)
}

fn randomized<F>(opts: &VerifyOptions, suite: Suite, count: usize, case: F) -> Vec<Check>
where
    F: Fn(&mut StdRng) -> Check + Sync,
{
    let base = trial_seed(opts.seed, suite as u64);
    (0..count as u64)
        .into_par_iter()
        .map(|i| case(&mut StdRng::seed_from_u64(trial_seed(base, i))))
        .collect()
}

/// Random rule with range `rho` and a zero-set of height at most
/// `min(rho, 5)`; widths above `rho` become infinite.
pub fn random_rule<R: Rng>(rng: &mut R, rho: u32) -> Rule {
    let h = rng.gen_range(0..=rho.min(5));
    let mut w = rho + 1;
    let widths: Vec<u32> = (0..h)
        .map(|_| {
            w = rng.gen_range(1..=w);
            w
        })
        .collect();
    let z = ZeroSet::from_row_widths(widths).expect("nonincreasing by construction");
    Rule::new(z, rho).expect("height <= rho")
}

/// Random box for `rho`: any shape up to 64x64 with zero boundary, or a
/// square torus of side at least `2 rho + 1`.
pub fn random_box<R: Rng>(rng: &mut R, rho: u32, p: f64) -> Configuration {
    let seed = rng.gen();
    let sampler = LatticeField::new(seed).sampler(p);
    let (w, h, b) = if rng.gen_bool(0.5) {
        let n = rng.gen_range(2 * rho as usize + 1..=64);
        (n, n, Boundary::Periodic)
    } else {
        (rng.gen_range(1..=64), rng.gen_range(1..=64), Boundary::Zero)
    };
    Configuration::from_fn(w, h, b, |x, y| sampler.occupied(x as i64, y as i64)).expect("valid box")
}

fn oracle_case(d: &dyn Dynamics, rng: &mut StdRng) -> Check {
    let rho = rng.gen_range(1..=5);
    let rule = random_rule(rng, rho);
    let p = rng.gen_range(0.01..0.4);
    let start = random_box(rng, rho, p);
    let steps = rng.gen_range(1..=8);
    let mut oracle = start.clone();
    let mut failure = None;
    let mut t = 0;
    d.evolve(start.clone(), &rule, steps, &mut |c| {
        t += 1;
        engine::step_naive(&mut oracle, &rule).expect("valid box");
        if failure.is_none() && (!c.same_cells(&oracle) || c.birth_plane() != oracle.birth_plane()) {
            failure = Some(format!("{}: differs from naive scan at step {t}", describe(&rule, &start)));
        }
    })
    .map_err(|e| e.to_string())?;
    failure.map_or(Ok(()), Err)
}

fn solidification_case(d: &dyn Dynamics, rng: &mut StdRng) -> Check {
    let rho = rng.gen_range(1..=4);
    let rule = random_rule(rng, rho);
    let p = rng.gen_range(0.01..0.3);
    let start = random_box(rng, rho, p);
    let mut prev = start.clone();
    let mut failure = None;
    d.evolve(start.clone(), &rule, 30, &mut |c| {
        let kept = (0..prev.height())
            .all(|y| (0..prev.width()).all(|x| prev.birth_time(x, y).is_none() || c.birth_time(x, y) == prev.birth_time(x, y)));
        if failure.is_none() && !kept {
            failure = Some(format!("{}: an occupied cell changed at step {}", describe(&rule, &start), c.time()));
        }
        prev = c.clone();
    })
    .map_err(|e| e.to_string())?;
    failure.map_or(Ok(()), Err)
}

fn trajectory(d: &dyn Dynamics, start: Configuration, rule: &Rule, steps: u32) -> Result<Vec<Configuration>> {
    let mut states = vec![start.clone()];
    d.evolve(start, rule, steps, &mut |c| states.push(c.clone()))?;
    Ok(states)
}

fn state_at(states: &[Configuration], t: usize) -> &Configuration {
    &states[t.min(states.len() - 1)]
}

fn monotonicity_case(d: &dyn Dynamics, rng: &mut StdRng) -> Check {
    let rho = rng.gen_range(1..=4);
    let rule = random_rule(rng, rho);
    let field = LatticeField::new(rng.gen());
    let lo = rng.gen_range(0.0..0.2);
    let hi = lo + rng.gen_range(0.0..0.2);
    let (w, h, b) = if rng.gen_bool(0.5) {
        let n = rng.gen_range(2 * rho as usize + 1..=48);
        (n, n, Boundary::Periodic)
    } else {
        (rng.gen_range(1..=48), rng.gen_range(1..=48), Boundary::Zero)
    };
    let make = |p: f64| {
        let s = field.sampler(p);
        Configuration::from_fn(w, h, b, |x, y| s.occupied(x as i64, y as i64)).expect("valid box")
    };
    let (a, big) = (make(lo), make(hi));
    let steps = 40;
    let sa = trajectory(d, a, &rule, steps).map_err(|e| e.to_string())?;
    let sb = trajectory(d, big, &rule, steps).map_err(|e| e.to_string())?;
    for t in 0..=steps as usize {
        if !state_at(&sa, t).is_subset_of(state_at(&sb, t)) {
            return Err(format!("{}: order lost at step {t} (p = {lo} vs {hi})", describe(&rule, &sa[0])));
        }
    }
    Ok(())
}

/// l1 (torus l1 when periodic) distance from every cell to the nearest
/// occupied cell of `c`, `u32::MAX` where there is none.
pub fn l1_distance_to_occupied(c: &Configuration) -> Vec<u32> {
    let (w, h) = (c.width(), c.height());
    let periodic = c.boundary() == Boundary::Periodic;
    let mut dist = vec![u32::MAX; w * h];
    let mut queue = VecDeque::new();
    for y in 0..h {
        for x in 0..w {
            if c.is_occupied(x, y) {
                dist[y * w + x] = 0;
                queue.push_back((x, y));
            }
        }
    }
    while let Some((x, y)) = queue.pop_front() {
        let d = dist[y * w + x] + 1;
        let mut nbrs = Vec::with_capacity(4);
        if periodic {
            nbrs.extend([((x + 1) % w, y), ((x + w - 1) % w, y), (x, (y + 1) % h), (x, (y + h - 1) % h)]);
        } else {
            if x + 1 < w {
                nbrs.push((x + 1, y));
            }
            if x > 0 {
                nbrs.push((x - 1, y));
            }
            if y + 1 < h {
                nbrs.push((x, y + 1));
            }
            if y > 0 {
                nbrs.push((x, y - 1));
            }
        }
        for (nx, ny) in nbrs {
            if dist[ny * w + nx] == u32::MAX {
                dist[ny * w + nx] = d;
                queue.push_back((nx, ny));
            }
        }
    }
    dist
}

fn speed_of_light_case(d: &dyn Dynamics, rng: &mut StdRng) -> Check {
    let rho = rng.gen_range(1..=5);
    // With an empty zero-set every cell fires at step 1 regardless of distance.
    let rule = loop {
        let r = random_rule(rng, rho);
        if !r.is_degenerate() {
            break r;
        }
    };
    let p = rng.gen_range(0.005..0.1);
    let start = random_box(rng, rho, p);
    let dist = l1_distance_to_occupied(&start);
    let end = d.evolve(start.clone(), &rule, 60, &mut |_| {}).map_err(|e| e.to_string())?;
    for (i, &b) in end.birth_plane().iter().enumerate() {
        if b != crate::grid::NEVER && u64::from(dist[i]) > u64::from(rho) * u64::from(b) {
            return Err(format!(
                "{}: cell {} born at {b} is {} from the initial set",
                describe(&rule, &start),
                i,
                dist[i]
            ));
        }
    }
    Ok(())
}

fn transpose_case(d: &dyn Dynamics, rng: &mut StdRng) -> Check {
    let rho = rng.gen_range(1..=5);
    let rule = loop {
        let r = random_rule(rng, rho);
        if r.zero_set().is_finite() {
            break r;
        }
    };
    let rule_t = rule.transpose().map_err(|e| e.to_string())?;
    let p = rng.gen_range(0.01..0.3);
    let start = random_box(rng, rho, p);
    let a = d.evolve(start.clone(), &rule, 30, &mut |_| {}).map_err(|e| e.to_string())?;
    let b = d.evolve(start.transposed(), &rule_t, 30, &mut |_| {}).map_err(|e| e.to_string())?;
    let at = a.transposed();
    if at.same_cells(&b) && at.birth_plane() == b.birth_plane() {
        Ok(())
    } else {
        Err(format!("{}: evolving the transpose differs from transposing the evolution", describe(&rule, &start)))
    }
}

fn domination_case(d: &dyn Dynamics, rng: &mut StdRng) -> Check {
    let rho = rng.gen_range(1..=5);
    let r = rng.gen_range(1..=rho);
    let s = rng.gen_range(1..=r);
    let rule = Rule::new(ZeroSet::line(r, s).expect("r, s >= 1"), rho).expect("fits the range");
    let p = rng.gen_range(0.005..0.2);
    let start = random_box(rng, rho, p);
    let real = d.evolve(start.clone(), &rule, u32::MAX, &mut |_| {}).map_err(|e| e.to_string())?;
    let coarse = saturated_line_closure(start.clone(), &rule, rule.arm_len() as usize).map_err(|e| e.to_string())?;
    if real.is_subset_of(&coarse) {
        Ok(())
    } else {
        Err(format!("{}: closure escapes the saturated-line closure", describe(&rule, &start)))
    }
}

fn adds_nothing(d: &dyn Dynamics, c: Configuration, rule: &Rule) -> Result<bool> {
    let before = c.clone();
    let after = d.evolve(c, rule, 1, &mut |_| {})?;
    Ok(after.same_cells(&before))
}

fn inertness_checks(d: &dyn Dynamics, opts: &VerifyOptions) -> Vec<Check> {
    let mut out = Vec::new();
    let mut rng = StdRng::seed_from_u64(trial_seed(opts.seed, Suite::Inertness as u64));
    // h-1 parallel lines: needs width >= max(h, 2) for the vertical family.
    let mut made = 0;
    while made < 20 {
        let rho = rng.gen_range(2..=5);
        let rule = random_rule(&mut rng, rho);
        let h = rule.zero_set().height();
        let wide_enough = match rule.zero_set().width() {
            Width::Inf => true,
            Width::Finite(w) => w as usize >= h.max(2),
        };
        if h < 2 || !wide_enough {
            continue;
        }
        made += 1;
        let n = rng.gen_range(4 * rho as usize..=48);
        for orientation in [Orientation::Horizontal, Orientation::Vertical] {
            let spacing = rng.gen_range(1..=n / h);
            let check = engine::parallel_lines(h - 1, spacing, orientation, n)
                .and_then(|c| adds_nothing(d, c, &rule))
                .map_err(|e| e.to_string())
                .and_then(|inert| {
                    inert.then_some(()).ok_or(format!("{} {orientation:?} lines not inert under {rule}", h - 1))
                });
            out.push(check);
        }
    }
    for r in 1..=5u32 {
        for s in 1..r {
            let rule = Rule::new(ZeroSet::line(r, s).expect("valid"), r).expect("valid");
            let check = engine::parallel_lines(1, 1, Orientation::Vertical, 24)
                .map(|c| c.shifted(11, 0))
                .and_then(|c| adds_nothing(d, c, &rule))
                .map_err(|e| e.to_string())
                .and_then(|inert| inert.then_some(()).ok_or(format!("vertical line not inert under {rule}")));
            out.push(check);
        }
    }
    for r in 2..=5u32 {
        for s in 1..=r {
            let rule = Rule::new(ZeroSet::line(r, s).expect("valid"), r).expect("valid");
            let n = 40;
            let mut c = Configuration::new(n, n, Boundary::Zero).expect("valid");
            for y in 0..s as usize {
                c.set(n / 2, n / 2 + y, true).expect("inside");
            }
            let check = d
                .evolve(c, &rule, u32::MAX, &mut |_| {})
                .map_err(|e| e.to_string())
                .and_then(|end| {
                    let column = (0..n).all(|y| end.is_occupied(n / 2, y));
                    let only = end.count_occupied() == n;
                    (column && only)
                        .then_some(())
                        .ok_or(format!("{s} stacked cells under {rule} did not give exactly a full column"))
                });
            out.push(check);
        }
    }
    out
}

fn packed_strip_checks(d: &dyn Dynamics) -> Vec<Check> {
    let mut out = Vec::new();
    for r in [2u32, 3, 4] {
        let rule = Rule::new(ZeroSet::bootstrap(r).expect("r >= 1"), r).expect("valid");
        for n in [32usize, 64, 128] {
            let bound = (r as usize + 1) * n;
            let check = packed_strip(&rule, n)
                .and_then(|c| d.evolve(c, &rule, bound as u32 + 1, &mut |_| {}))
                .map_err(|e| e.to_string())
                .and_then(|end| {
                    let t = end.birth_plane().iter().copied().max().unwrap_or(0);
                    (end.is_full() && t as usize <= bound)
                        .then_some(())
                        .ok_or(format!("bootstrap({r}), n = {n}: full = {}, last birth {t}", end.is_full()))
                });
            out.push(check);
        }
    }
    out
}

fn diagonal_checks(d: &dyn Dynamics) -> Vec<Check> {
    (2..=6u32)
        .map(|r| {
            let rule = Rule::new(ZeroSet::l_finite(r, 1, 1).map_err(|e| e.to_string())?, r).map_err(|e| e.to_string())?;
            let n = 4 * r as usize + 4;
            let off = 2 * r as usize;
            let start = diagonal_nucleus(r as usize, n).map_err(|e| e.to_string())?.shifted(off, off);
            let end = d.evolve(start, &rule, r, &mut |_| {}).map_err(|e| e.to_string())?;
            let square = (0..r as usize).all(|y| (0..r as usize).all(|x| end.is_occupied(off + x, off + y)));
            square.then_some(()).ok_or(format!("l_finite({r},1,1): square not filled within {r} steps"))
        })
        .collect()
}

fn zeroset_checks(opts: &VerifyOptions) -> Vec<Check> {
    let mut rng = StdRng::seed_from_u64(trial_seed(opts.seed, Suite::Zeroset as u64));
    (0..opts.instances.max(1) * 5)
        .map(|_| {
            let rho = rng.gen_range(1..=8);
            let z = random_rule(&mut rng, rho).zero_set().clone();
            let counts: Vec<MinimalCount> = z.minimal_counts().into_iter().collect();
            if ZeroSet::from_minimal_counts(counts).map_err(|e| e.to_string())? != z {
                return Err(format!("minimal counts of [{z}] do not round-trip"));
            }
            if z.normalize(rho).map_err(|e| e.to_string())? != z {
                return Err(format!("normalized [{z}] is not a fixed point"));
            }
            if z.is_finite() && z.transpose().and_then(|t| t.transpose()).map_err(|e| e.to_string())? != z {
                return Err(format!("transpose of [{z}] is not an involution"));
            }
            for u in 0..=rho as u64 + 1 {
                for v in 0..=rho as u64 + 1 {
                    if z.contains(u, v) && ((u > 0 && !z.contains(u - 1, v)) || (v > 0 && !z.contains(u, v - 1))) {
                        return Err(format!("[{z}] is not downward closed at ({u}, {v})"));
                    }
                }
            }
            Ok(())
        })
        .collect()
}

fn theory_checks() -> Vec<Check> {
    let mut out: Vec<Check> = (1..=500u32)
        .map(|r| {
            let (a, b) = (theory::m_hat_bootstrap(r), theory::m_hat_bootstrap_by_search(r));
            (a == b).then_some(()).ok_or(format!("m_hat({r}): closed form {a}, search {b}"))
        })
        .collect();
    for r in 1..=20u32 {
        out.push((|| {
            let z = ZeroSet::bootstrap(r).map_err(|e| e.to_string())?;
            let direct = theory::gamma_bootstrap(r).map_err(|e| e.to_string())?.value;
            let looked_up = theory::critical_power(&z).map_err(|e| e.to_string())?.exact();
            (looked_up == Some(direct)).then_some(()).ok_or(format!("bootstrap({r}) lookup disagrees"))
        })());
    }
    for e in theory::small_catalog() {
        let (lo, hi) = e.power.range();
        out.push((lo <= hi).then_some(()).ok_or(format!("[{}]: bounds out of order", e.zero_set)));
    }
    out
}
