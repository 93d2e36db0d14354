//! Synchronous growth dynamics.
//!
//! One step occupies every unoccupied site whose cross counts fall outside
//! the zero-set, all tests reading the pre-step configuration. [`Engine`]
//! keeps per-cell arm counts and only re-examines cells whose counts moved
//! in the previous step; [`step_naive`] rescans every cross from scratch and
//! serves as the reference.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Boundary, Configuration, Orientation};
use crate::zeroset::{Rule, Width, ZeroSet};

/// Approximate resident bytes per cell of an [`Engine`]: occupancy bit,
/// birth time, two arm counts and a visit stamp.
pub const ENGINE_BYTES_PER_CELL: f64 = 12.125;

/// Arm counts for every cell of `config`, row-major.
pub(crate) fn count_planes(config: &Configuration, rho: usize) -> (Vec<u16>, Vec<u16>) {
    let (w, h) = (config.width(), config.height());
    let mut hc = vec![0u16; w * h];
    let mut vc = vec![0u16; w * h];
    let periodic = config.boundary() == Boundary::Periodic;
    let mut prefix = Vec::with_capacity(w.max(h) + 1);

    // Sum of occupancy over the window [i - rho, i + rho] of a line of length
    // `len`, given its prefix sums.
    let window = |prefix: &[u32], len: usize, i: usize| -> u16 {
        let lo = i as isize - rho as isize;
        let hi = i + rho;
        let s = if !periodic {
            prefix[(hi + 1).min(len)] - prefix[lo.max(0) as usize]
        } else if lo < 0 {
            prefix[hi + 1] + prefix[len] - prefix[(lo + len as isize) as usize]
        } else if hi >= len {
            prefix[len] - prefix[lo as usize] + prefix[hi + 1 - len]
        } else {
            prefix[hi + 1] - prefix[lo as usize]
        };
        s as u16
    };

    for y in 0..h {
        prefix.clear();
        prefix.push(0u32);
        for x in 0..w {
            let last = *prefix.last().unwrap();
            prefix.push(last + config.is_occupied(x, y) as u32);
        }
        for x in 0..w {
            hc[y * w + x] = window(&prefix, w, x);
        }
    }
    for x in 0..w {
        prefix.clear();
        prefix.push(0u32);
        for y in 0..h {
            let last = *prefix.last().unwrap();
            prefix.push(last + config.is_occupied(x, y) as u32);
        }
        for y in 0..h {
            vc[y * w + x] = window(&prefix, h, y);
        }
    }
    (hc, vc)
}

fn check_rule(config: &Configuration, rule: &Rule) -> Result<()> {
    config.check_range(rule.rho())?;
    if rule.arm_len() > u32::from(u16::MAX) {
        return Err(Error::Parameter(format!("range {} is too large", rule.rho())));
    }
    Ok(())
}

/// Incremental simulator owning one configuration.
#[derive(Debug, Clone)]
pub struct Engine {
    config: Configuration,
    rule: Rule,
    h_counts: Vec<u16>,
    v_counts: Vec<u16>,
    // Step index at which a cell was last queued as a candidate.
    stamp: Vec<u32>,
    // Cells occupied by the previous step; `None` before the first step.
    frontier: Option<Vec<usize>>,
    fresh: Vec<usize>,
}

impl Engine {
    pub fn new(config: Configuration, rule: Rule) -> Result<Self> {
        check_rule(&config, &rule)?;
        let (h_counts, v_counts) = count_planes(&config, rule.rho() as usize);
        let stamp = vec![0; config.cells()];
        Ok(Engine { config, rule, h_counts, v_counts, stamp, frontier: None, fresh: Vec::new() })
    }

    pub fn config(&self) -> &Configuration {
        &self.config
    }

    pub fn into_config(self) -> Configuration {
        self.config
    }

    pub fn rule(&self) -> &Rule {
        &self.rule
    }

    pub fn time(&self) -> u32 {
        self.config.time()
    }

    /// Arm counts currently cached for `(x, y)`.
    pub fn cached_counts(&self, x: usize, y: usize) -> (u16, u16) {
        let i = y * self.config.width() + x;
        (self.h_counts[i], self.v_counts[i])
    }

    #[inline]
    fn consider(&mut self, i: usize, t: u32) {
        if self.stamp[i] == t {
            return;
        }
        self.stamp[i] = t;
        let w = self.config.width();
        if !self.config.is_occupied(i % w, i / w)
            && self.rule.triggers(u32::from(self.h_counts[i]), u32::from(self.v_counts[i]))
        {
            self.fresh.push(i);
        }
    }

    /// First index and length of the arm of radius `rho` through `pos` on a
    /// line of `len` cells. Indices are taken modulo `len`.
    #[inline]
    fn arm_span(pos: usize, len: usize, rho: usize, periodic: bool) -> (usize, usize) {
        if periodic {
            ((pos + len - rho) % len, 2 * rho + 1)
        } else {
            let lo = pos.saturating_sub(rho);
            (lo, (pos + rho).min(len - 1) - lo + 1)
        }
    }

    /// Applies one synchronous update and returns the number of cells added.
    pub fn step(&mut self) -> usize {
        let t = self.config.time() + 1;
        let (w, h) = (self.config.width(), self.config.height());
        let rho = self.rule.rho() as usize;
        let periodic = self.config.boundary() == Boundary::Periodic;
        self.fresh.clear();
        match self.frontier.take() {
            None => {
                for i in 0..w * h {
                    self.consider(i, t);
                }
            }
            Some(frontier) => {
                for &c in &frontier {
                    let (x, y) = (c % w, c / w);
                    let (x0, nx) = Self::arm_span(x, w, rho, periodic);
                    for d in 0..nx {
                        self.consider(y * w + (x0 + d) % w, t);
                    }
                    let (y0, ny) = Self::arm_span(y, h, rho, periodic);
                    for d in 0..ny {
                        self.consider(((y0 + d) % h) * w + x, t);
                    }
                }
            }
        }
        let fresh = std::mem::take(&mut self.fresh);
        for &i in &fresh {
            self.config.occupy(i % w, i / w, t);
        }
        for &i in &fresh {
            let (x, y) = (i % w, i / w);
            let (x0, nx) = Self::arm_span(x, w, rho, periodic);
            for d in 0..nx {
                self.h_counts[y * w + (x0 + d) % w] += 1;
            }
            let (y0, ny) = Self::arm_span(y, h, rho, periodic);
            for d in 0..ny {
                self.v_counts[((y0 + d) % h) * w + x] += 1;
            }
        }
        self.config.tick();
        let added = fresh.len();
        self.frontier = Some(fresh);
        added
    }

    /// True when the next step would add nothing. Does not advance time.
    pub fn is_inert(&self) -> bool {
        match &self.frontier {
            Some(f) if f.is_empty() => true,
            _ => (0..self.config.cells()).all(|i| {
                let w = self.config.width();
                self.config.is_occupied(i % w, i / w)
                    || !self.rule.triggers(u32::from(self.h_counts[i]), u32::from(self.v_counts[i]))
            }),
        }
    }

    /// Steps until `stop` is met. Always stops once a step adds nothing.
    pub fn run(&mut self, stop: &StopCondition) -> Outcome {
        let mut added = 0usize;
        loop {
            if let Some((x, y)) = stop.origin {
                if self.config.is_occupied(x, y) {
                    return self.outcome(StopReason::OriginOccupied, added);
                }
            }
            if stop.t_max.is_some_and(|t| self.time() >= t) {
                return self.outcome(StopReason::TimeLimit, added);
            }
            let n = self.step();
            added += n;
            if n == 0 {
                return self.outcome(StopReason::Fixed, added);
            }
        }
    }

    fn outcome(&self, stop_reason: StopReason, newly_occupied_total: usize) -> Outcome {
        Outcome {
            stop_reason,
            stop_time: self.time(),
            newly_occupied_total,
            final_density: self.config.density(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StopReason {
    Fixed,
    OriginOccupied,
    TimeLimit,
}

/// When [`Engine::run`] stops. Fixation always ends a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct StopCondition {
    pub origin: Option<(usize, usize)>,
    pub t_max: Option<u32>,
}

impl StopCondition {
    pub fn until_fixed() -> Self {
        StopCondition::default()
    }

    pub fn until_origin(x: usize, y: usize) -> Self {
        StopCondition { origin: Some((x, y)), t_max: None }
    }

    pub fn with_t_max(self, t_max: u32) -> Self {
        StopCondition { t_max: Some(t_max), ..self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub stop_reason: StopReason,
    pub stop_time: u32,
    pub newly_occupied_total: usize,
    pub final_density: f64,
}

/// One synchronous update of `config` using full-box arm counts.
pub fn step(config: &mut Configuration, rule: &Rule) -> Result<usize> {
    check_rule(config, rule)?;
    let (hc, vc) = count_planes(config, rule.rho() as usize);
    let t = config.time() + 1;
    let w = config.width();
    let fresh: Vec<usize> = (0..config.cells())
        .filter(|&i| !config.is_occupied(i % w, i / w) && rule.triggers(u32::from(hc[i]), u32::from(vc[i])))
        .collect();
    for &i in &fresh {
        config.occupy(i % w, i / w, t);
    }
    config.tick();
    Ok(fresh.len())
}

/// Reference update: every cell's cross is scanned cell by cell.
pub fn step_naive(config: &mut Configuration, rule: &Rule) -> Result<usize> {
    let order: Vec<usize> = (0..config.cells()).collect();
    step_naive_in_order(config, rule, &order)
}

/// [`step_naive`] visiting cells in the given order. The result does not
/// depend on the order.
pub fn step_naive_in_order(config: &mut Configuration, rule: &Rule, order: &[usize]) -> Result<usize> {
    config.check_range(rule.rho())?;
    let (w, h) = (config.width() as isize, config.height() as isize);
    let rho = rule.rho() as isize;
    let periodic = config.boundary() == Boundary::Periodic;
    let occupied = |x: isize, y: isize| -> bool {
        let (x, y) = if periodic { (x.rem_euclid(w), y.rem_euclid(h)) } else { (x, y) };
        (0..w).contains(&x) && (0..h).contains(&y) && config.is_occupied(x as usize, y as usize)
    };
    let mut fresh = Vec::new();
    for &i in order {
        let (x, y) = ((i % w as usize) as isize, (i / w as usize) as isize);
        if occupied(x, y) {
            continue;
        }
        let hc = (-rho..=rho).filter(|&d| occupied(x + d, y)).count() as u64;
        let vc = (-rho..=rho).filter(|&d| occupied(x, y + d)).count() as u64;
        if !rule.zero_set().contains(hc, vc) {
            fresh.push((x as usize, y as usize));
        }
    }
    let t = config.time() + 1;
    for &(x, y) in &fresh {
        config.occupy(x, y, t);
    }
    config.tick();
    Ok(fresh.len())
}

/// True iff a step from `config` would add nothing.
pub fn is_inert(config: &Configuration, rule: &Rule) -> Result<bool> {
    check_rule(config, rule)?;
    let (hc, vc) = count_planes(config, rule.rho() as usize);
    let w = config.width();
    Ok((0..config.cells())
        .all(|i| config.is_occupied(i % w, i / w) || !rule.triggers(u32::from(hc[i]), u32::from(vc[i]))))
}

/// Runs `config` under `rule` until `stop`, returning the final state.
pub fn run(config: Configuration, rule: &Rule, stop: &StopCondition) -> Result<(Outcome, Configuration)> {
    let mut engine = Engine::new(config, rule.clone())?;
    let outcome = engine.run(stop);
    Ok((outcome, engine.into_config()))
}

/// Side lengths of a line-growth rectangle: `(r, s)` = (width, height).
fn rectangle(rule: &Rule) -> Result<(u32, u32)> {
    let z = rule.zero_set();
    match (z.is_rectangle(), z.width()) {
        (true, Width::Finite(r)) => Ok((r, z.height() as u32)),
        _ => Err(Error::NotRectangular),
    }
}

/// Largest occupied count over windows of `window` consecutive cells of a
/// line of `len` cells, reading occupancy through `occ`.
fn max_window_count(len: usize, window: usize, periodic: bool, occ: impl Fn(usize) -> bool) -> usize {
    if window >= len {
        return (0..len).filter(|&i| occ(i)).count();
    }
    let mut count = (0..window).filter(|&i| occ(i)).count();
    let mut best = count;
    let starts = if periodic { len } else { len - window + 1 };
    for a in 1..starts {
        count += occ((a + window - 1) % len) as usize;
        count -= occ(a - 1) as usize;
        best = best.max(count);
    }
    best
}

/// One step of the saturated-line comparison dynamics for line growth with
/// zero-set `[0, r-1] x [0, s-1]`: every row holding at least `r` occupied
/// cells within some `window` consecutive cells, and every column holding
/// at least `s` such cells, becomes fully occupied. Rows and columns are
/// judged on the pre-step configuration.
pub fn saturated_line_step(config: &mut Configuration, rule: &Rule, window: usize) -> Result<usize> {
    let (r, s) = rectangle(rule)?;
    config.check_range(rule.rho())?;
    if window < rule.arm_len() as usize {
        return Err(Error::Parameter(format!(
            "window {window} is shorter than the neighborhood arm {}",
            rule.arm_len()
        )));
    }
    let (w, h) = (config.width(), config.height());
    let periodic = config.boundary() == Boundary::Periodic;
    let rows: Vec<usize> = (0..h)
        .filter(|&y| max_window_count(w, window, periodic, |x| config.is_occupied(x, y)) >= r as usize)
        .collect();
    let cols: Vec<usize> = (0..w)
        .filter(|&x| max_window_count(h, window, periodic, |y| config.is_occupied(x, y)) >= s as usize)
        .collect();
    let before = config.count_occupied();
    let t = config.time() + 1;
    for &y in &rows {
        for x in 0..w {
            config.occupy(x, y, t);
        }
    }
    for &x in &cols {
        for y in 0..h {
            config.occupy(x, y, t);
        }
    }
    config.tick();
    Ok(config.count_occupied() - before)
}

/// Iterates [`saturated_line_step`] until nothing changes.
pub fn saturated_line_closure(mut config: Configuration, rule: &Rule, window: usize) -> Result<Configuration> {
    while saturated_line_step(&mut config, rule, window)? > 0 {}
    Ok(config)
}

/// Packed strip at the bottom of `B_n`: row `j` holds a run of `width[j]`
/// occupied cells starting at column 0. For threshold-`r` bootstrap
/// percolation the runs have lengths `r, r-1, ..., 1`.
pub fn packed_strip(rule: &Rule, n: usize) -> Result<Configuration> {
    let z: &ZeroSet = rule.zero_set();
    let widths: Vec<usize> = z
        .rows()
        .iter()
        .map(|w| w.finite().map(|w| w as usize).ok_or(Error::InfiniteWidth))
        .collect::<Result<_>>()?;
    if widths.first().copied().unwrap_or(0) > n || widths.len() > n {
        return Err(Error::PatternTooLarge(n));
    }
    let mut c = Configuration::new(n, n, Boundary::Zero)?;
    for (y, &len) in widths.iter().enumerate() {
        for x in 0..len {
            c.set(x, y, true)?;
        }
    }
    Ok(c)
}

/// `k` adjacent fully occupied lines starting at row (or column) 0.
pub fn filled_adjacent_lines(k: usize, orientation: Orientation, n: usize) -> Result<Configuration> {
    parallel_lines(k, 1, orientation, n)
}

/// `k` fully occupied parallel lines at indices `0, spacing, 2*spacing, ...`.
pub fn parallel_lines(k: usize, spacing: usize, orientation: Orientation, n: usize) -> Result<Configuration> {
    if spacing == 0 {
        return Err(Error::Parameter("line spacing must be positive".into()));
    }
    if k > 0 && (k - 1) * spacing >= n {
        return Err(Error::PatternTooLarge(n));
    }
    let mut c = Configuration::new(n, n, Boundary::Zero)?;
    for i in 0..k {
        c.fill_line(orientation, i * spacing)?;
    }
    Ok(c)
}

/// `r` diagonally adjacent cells `(i, i)`, `i < r`, in `B_n`.
pub fn diagonal_nucleus(r: usize, n: usize) -> Result<Configuration> {
    if r > n {
        return Err(Error::PatternTooLarge(n));
    }
    let mut c = Configuration::new(n, n, Boundary::Zero)?;
    for i in 0..r {
        c.set(i, i, true)?;
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::random_configuration;
    use rand::{seq::SliceRandom, Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rule(z: ZeroSet, rho: u32) -> Rule {
        Rule::new(z, rho).unwrap()
    }

    #[test]
    fn empty_configuration_stays_empty() {
        let r = rule(ZeroSet::bootstrap(2).unwrap(), 2);
        let mut c = Configuration::new(10, 10, Boundary::Zero).unwrap();
        assert_eq!(step(&mut c, &r).unwrap(), 0);
        let mut e = Engine::new(Configuration::new(10, 10, Boundary::Zero).unwrap(), r).unwrap();
        assert_eq!(e.step(), 0);
        assert_eq!(e.time(), 1);
    }

    #[test]
    fn single_line_is_inert_under_symmetric_line_growth() {
        let r = rule(ZeroSet::line(2, 2).unwrap(), 2);
        let mut c = parallel_lines(1, 1, Orientation::Horizontal, 12).unwrap();
        assert_eq!(step(&mut c, &r).unwrap(), 0);
        let mut c = parallel_lines(1, 1, Orientation::Horizontal, 12).unwrap();
        assert_eq!(step_naive(&mut c, &r).unwrap(), 0);
    }

    #[test]
    fn vertical_pair_grows_a_column() {
        let r = rule(ZeroSet::line(2, 2).unwrap(), 2);
        let n = 21;
        let mut c = Configuration::new(n, n, Boundary::Zero).unwrap();
        c.set(10, 10, true).unwrap();
        c.set(10, 11, true).unwrap();
        let mut naive = c.clone();
        let mut e = Engine::new(c, r.clone()).unwrap();
        // only (10, 9) and (10, 12) see both cells on their vertical arm
        assert_eq!(e.step(), 2);
        step_naive(&mut naive, &r).unwrap();
        assert_eq!(e.config(), &naive);
        for y in [9, 12] {
            assert_eq!(e.config().birth_time(10, y), Some(1));
        }
        let out = e.run(&StopCondition::until_fixed());
        assert_eq!(out.stop_reason, StopReason::Fixed);
        assert!((0..n).all(|y| e.config().is_occupied(10, y)));
        assert_eq!(e.config().count_occupied(), n);
    }

    #[test]
    fn full_box_is_solid() {
        let r = rule(ZeroSet::bootstrap(3).unwrap(), 3);
        let mut c = Configuration::from_fn(8, 8, Boundary::Zero, |_, _| true).unwrap();
        assert_eq!(step_naive(&mut c, &r).unwrap(), 0);
        assert_eq!(step(&mut c, &r).unwrap(), 0);
    }

    #[test]
    fn empty_zero_set_fills_the_box_at_once() {
        let empty = rule(ZeroSet::empty(), 2);
        let mut c = Configuration::new(9, 7, Boundary::Zero).unwrap();
        assert_eq!(step(&mut c, &empty).unwrap(), 63);
        let mut e = Engine::new(Configuration::new(7, 7, Boundary::Periodic).unwrap(), empty).unwrap();
        assert_eq!(e.step(), 49);
        assert_eq!(e.step(), 0);
    }

    #[test]
    fn tallest_admissible_strip_only_grows_vertically() {
        // [inf]^rho: a site occupies only once rho cells of its column arm are occupied.
        let r = rule(ZeroSet::from_row_widths(vec![Width::Inf; 3]).unwrap(), 3);
        let mut c = Configuration::from_fn(20, 20, Boundary::Zero, |x, _| x % 2 == 0).unwrap();
        for y in 0..20 {
            c.set(1, y, y % 2 == 0).unwrap();
        }
        let mut e = Engine::new(c, r).unwrap();
        e.run(&StopCondition::until_fixed());
        // odd columns other than 1 never receive a vertical count
        assert!((0..20).all(|y| !e.config().is_occupied(3, y)));
    }

    #[test]
    fn torus_too_small_is_rejected() {
        let r = rule(ZeroSet::bootstrap(2).unwrap(), 3);
        let c = Configuration::new(6, 6, Boundary::Periodic).unwrap();
        assert_eq!(Engine::new(c.clone(), r.clone()).unwrap_err(), Error::TorusTooSmall { n: 6, rho: 3 });
        let mut c2 = c.clone();
        assert!(step(&mut c2, &r).is_err());
        assert!(step_naive(&mut c2, &r).is_err());
    }

    #[test]
    fn run_stop_conditions() {
        let r = rule(ZeroSet::bootstrap(2).unwrap(), 2);
        let mut c = Configuration::new(10, 10, Boundary::Zero).unwrap();
        c.set(3, 3, true).unwrap();
        let (out, _) = run(c.clone(), &r, &StopCondition::until_origin(3, 3)).unwrap();
        assert_eq!((out.stop_reason, out.stop_time), (StopReason::OriginOccupied, 0));
        let (out, _) = run(c.clone(), &r, &StopCondition::until_fixed()).unwrap();
        assert_eq!((out.stop_reason, out.stop_time, out.newly_occupied_total), (StopReason::Fixed, 1, 0));
        c.set(4, 3, true).unwrap();
        let (out, end) = run(c, &r, &StopCondition::until_fixed().with_t_max(2)).unwrap();
        assert_eq!((out.stop_reason, out.stop_time), (StopReason::TimeLimit, 2));
        assert!(out.newly_occupied_total > 0);
        assert_eq!(end.count_occupied(), 2 + out.newly_occupied_total);
    }

    #[test]
    fn inertness_examples() {
        let b1 = rule(ZeroSet::bootstrap(1).unwrap(), 1);
        let mut c = Configuration::new(5, 5, Boundary::Zero).unwrap();
        c.set(2, 2, true).unwrap();
        assert!(!is_inert(&c, &b1).unwrap());
        let l32 = rule(ZeroSet::line(3, 2).unwrap(), 3);
        let v = filled_adjacent_lines(1, Orientation::Vertical, 16).unwrap();
        assert!(is_inert(&v, &l32).unwrap());
        let e = Engine::new(v, l32).unwrap();
        assert!(e.is_inert());
    }

    #[test]
    fn naive_step_is_order_independent() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..30 {
            let r = rule(ZeroSet::bootstrap(rng.gen_range(1..=3)).unwrap(), 3);
            let c = random_configuration(15, 13, Boundary::Zero, 0.15, &mut rng).unwrap();
            let mut order: Vec<usize> = (0..c.cells()).collect();
            let mut a = c.clone();
            step_naive(&mut a, &r).unwrap();
            order.shuffle(&mut rng);
            let mut b = c.clone();
            step_naive_in_order(&mut b, &r, &order).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn saturated_line_examples() {
        let r = rule(ZeroSet::line(2, 2).unwrap(), 2);
        let mut c = Configuration::new(20, 20, Boundary::Zero).unwrap();
        assert_eq!(saturated_line_step(&mut c, &r, 5).unwrap(), 0);
        c.set(3, 7, true).unwrap();
        c.set(7, 7, true).unwrap();
        assert_eq!(saturated_line_step(&mut c, &r, 5).unwrap(), 18);
        assert!((0..20).all(|x| c.is_occupied(x, 7)));
        let mut far = Configuration::new(20, 20, Boundary::Zero).unwrap();
        far.set(3, 7, true).unwrap();
        far.set(8, 7, true).unwrap();
        assert_eq!(saturated_line_step(&mut far, &r, 5).unwrap(), 0);
        assert_eq!(
            saturated_line_step(&mut far, &rule(ZeroSet::bootstrap(2).unwrap(), 2), 5),
            Err(Error::NotRectangular)
        );
        assert!(saturated_line_step(&mut far, &r, 4).is_err());
    }

    #[test]
    fn max_window_count_wraps_on_torus() {
        let occ = |i: usize| i == 0 || i == 9;
        assert_eq!(max_window_count(10, 3, false, occ), 1);
        assert_eq!(max_window_count(10, 3, true, occ), 2);
        assert_eq!(max_window_count(10, 30, true, occ), 2);
    }

    #[test]
    fn seed_patterns() {
        let b3 = rule(ZeroSet::bootstrap(3).unwrap(), 3);
        let c = packed_strip(&b3, 16).unwrap();
        for (y, len) in [(0, 3), (1, 2), (2, 1)] {
            assert!((0..16).all(|x| c.is_occupied(x, y) == (x < len)));
        }
        assert_eq!(c.count_occupied(), 6);
        assert_eq!(packed_strip(&b3, 2).unwrap_err(), Error::PatternTooLarge(2));
        let inf = rule(ZeroSet::l_infinite(3, 1, 1).unwrap(), 3);
        assert_eq!(packed_strip(&inf, 10).unwrap_err(), Error::InfiniteWidth);
        let d = diagonal_nucleus(3, 8).unwrap();
        assert_eq!(d.count_occupied(), 3);
        assert!(d.is_occupied(2, 2));
        assert!(diagonal_nucleus(9, 8).is_err());
        let l = parallel_lines(3, 4, Orientation::Horizontal, 10).unwrap();
        assert_eq!(l.count_occupied(), 30);
        assert!(l.is_occupied(5, 8));
        assert!(parallel_lines(3, 5, Orientation::Horizontal, 10).is_err());
        assert_eq!(filled_adjacent_lines(2, Orientation::Vertical, 6).unwrap().count_occupied(), 12);
    }

    #[test]
    fn single_line_seed_is_inert() {
        let r = rule(ZeroSet::line(2, 2).unwrap(), 2);
        let c = parallel_lines(1, 1, Orientation::Horizontal, 16).unwrap();
        assert!(is_inert(&c, &r).unwrap());
    }
}
