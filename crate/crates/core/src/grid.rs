//! Occupancy configurations on finite boxes.
//!
//! Cells are addressed as `(x, y)` = (column, row) with the origin at the
//! lower-left corner. Occupancy is bit-packed, 64 cells per word, one run of
//! words per row. A parallel plane records the step at which each cell was
//! occupied.

use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::zeroset::Rule;

/// Birth time of a cell that has never been occupied.
pub const NEVER: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    /// Sites outside the box count as unoccupied and never change.
    #[default]
    Zero,
    /// The box is a discrete torus.
    Periodic,
}

impl fmt::Display for Boundary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Boundary::Zero => "zero",
            Boundary::Periodic => "periodic",
        })
    }
}

impl FromStr for Boundary {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "zero" => Ok(Boundary::Zero),
            "periodic" => Ok(Boundary::Periodic),
            other => Err(Error::Parse(format!("unknown boundary {other:?}"))),
        }
    }
}

/// Occupied counts on the two arms of a cross neighborhood.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CrossCounts {
    pub h_count: u32,
    pub v_count: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    Horizontal,
    Vertical,
}

#[derive(Clone, PartialEq, Eq)]
pub struct Configuration {
    width: usize,
    height: usize,
    boundary: Boundary,
    words_per_row: usize,
    bits: Vec<u64>,
    birth: Vec<u32>,
    time: u32,
}

impl fmt::Debug for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Configuration({}x{} {}, {} occupied)", self.width, self.height, self.boundary, self.count_occupied())
    }
}

impl Configuration {
    /// Empty box. Periodic boxes must be square.
    pub fn new(width: usize, height: usize, boundary: Boundary) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Parameter("box dimensions must be positive".into()));
        }
        if boundary == Boundary::Periodic && width != height {
            return Err(Error::NonSquareTorus { width, height });
        }
        let words_per_row = width.div_ceil(64);
        Ok(Configuration {
            width,
            height,
            boundary,
            words_per_row,
            bits: vec![0; words_per_row * height],
            birth: vec![NEVER; width * height],
            time: 0,
        })
    }

    /// Box with `occupied(x, y)` deciding each initial cell.
    pub fn from_fn<F>(width: usize, height: usize, boundary: Boundary, mut occupied: F) -> Result<Self>
    where
        F: FnMut(usize, usize) -> bool,
    {
        let mut c = Configuration::new(width, height, boundary)?;
        for y in 0..height {
            for x in 0..width {
                if occupied(x, y) {
                    c.occupy(x, y, 0);
                }
            }
        }
        Ok(c)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    /// Number of update steps applied so far.
    pub fn time(&self) -> u32 {
        self.time
    }

    pub(crate) fn tick(&mut self) -> u32 {
        self.time += 1;
        self.time
    }

    pub fn cells(&self) -> usize {
        self.width * self.height
    }

    #[inline]
    pub(crate) fn index(&self, x: usize, y: usize) -> usize {
        y * self.width + x
    }

    fn check(&self, x: usize, y: usize) -> Result<()> {
        if x < self.width && y < self.height {
            Ok(())
        } else {
            Err(Error::OutOfBounds { x, y, width: self.width, height: self.height })
        }
    }

    /// Unchecked occupancy read; panics on out-of-range coordinates in
    /// debug builds.
    #[inline]
    pub fn is_occupied(&self, x: usize, y: usize) -> bool {
        debug_assert!(x < self.width && y < self.height);
        (self.bits[y * self.words_per_row + x / 64] >> (x % 64)) & 1 == 1
    }

    pub fn get(&self, x: usize, y: usize) -> Result<bool> {
        self.check(x, y)?;
        Ok(self.is_occupied(x, y))
    }

    /// Sets or clears an initial cell. Occupied cells get birth time 0.
    pub fn set(&mut self, x: usize, y: usize, occupied: bool) -> Result<()> {
        self.check(x, y)?;
        let w = &mut self.bits[y * self.words_per_row + x / 64];
        let i = y * self.width + x;
        if occupied {
            *w |= 1 << (x % 64);
            self.birth[i] = 0;
        } else {
            *w &= !(1 << (x % 64));
            self.birth[i] = NEVER;
        }
        Ok(())
    }

    /// Marks `(x, y)` occupied at step `t`. No-op if already occupied.
    #[inline]
    pub fn occupy(&mut self, x: usize, y: usize, t: u32) {
        let w = &mut self.bits[y * self.words_per_row + x / 64];
        let mask = 1u64 << (x % 64);
        if *w & mask == 0 {
            *w |= mask;
            self.birth[y * self.width + x] = t;
        }
    }

    /// Step at which `(x, y)` was occupied, `None` if it never was.
    pub fn birth_time(&self, x: usize, y: usize) -> Option<u32> {
        match self.birth[self.index(x, y)] {
            NEVER => None,
            t => Some(t),
        }
    }

    pub fn birth_plane(&self) -> &[u32] {
        &self.birth
    }

    pub fn count_occupied(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn density(&self) -> f64 {
        self.count_occupied() as f64 / self.cells() as f64
    }

    pub fn is_full(&self) -> bool {
        self.count_occupied() == self.cells()
    }

    /// Every cell occupied here is also occupied in `other`.
    pub fn is_subset_of(&self, other: &Configuration) -> bool {
        self.width == other.width
            && self.height == other.height
            && self.bits.iter().zip(&other.bits).all(|(a, b)| a & !b == 0)
    }

    /// Same occupancy, ignoring birth times.
    pub fn same_cells(&self, other: &Configuration) -> bool {
        self.width == other.width && self.height == other.height && self.bits == other.bits
    }

    /// Occupied cells in row `y` whose column lies in `lo..=hi` (both in range).
    #[inline]
    pub fn row_popcount(&self, y: usize, lo: usize, hi: usize) -> u32 {
        debug_assert!(lo <= hi && hi < self.width);
        let row = &self.bits[y * self.words_per_row..(y + 1) * self.words_per_row];
        let (wl, wh) = (lo / 64, hi / 64);
        let low_mask = u64::MAX << (lo % 64);
        let high_mask = u64::MAX >> (63 - hi % 64);
        if wl == wh {
            return (row[wl] & low_mask & high_mask).count_ones();
        }
        let mut n = (row[wl] & low_mask).count_ones() + (row[wh] & high_mask).count_ones();
        for w in &row[wl + 1..wh] {
            n += w.count_ones();
        }
        n
    }

    /// Occupied cells in column `x` whose row lies in `lo..=hi`.
    #[inline]
    pub fn column_count(&self, x: usize, lo: usize, hi: usize) -> u32 {
        (lo..=hi).filter(|&y| self.is_occupied(x, y)).count() as u32
    }

    pub(crate) fn check_range(&self, rho: u32) -> Result<()> {
        if self.boundary == Boundary::Periodic && self.width < 2 * rho as usize + 1 {
            return Err(Error::TorusTooSmall { n: self.width, rho });
        }
        Ok(())
    }

    /// Occupied counts on the horizontal and vertical arms centred at
    /// `(x, y)`, each arm including the centre.
    pub fn cross_counts(&self, rule: &Rule, x: usize, y: usize) -> Result<CrossCounts> {
        self.check(x, y)?;
        self.check_range(rule.rho())?;
        let r = rule.rho() as usize;
        let (h_count, v_count) = match self.boundary {
            Boundary::Zero => (
                self.row_popcount(y, x.saturating_sub(r), (x + r).min(self.width - 1)),
                self.column_count(x, y.saturating_sub(r), (y + r).min(self.height - 1)),
            ),
            Boundary::Periodic => {
                let n = self.width;
                let wrapped = |lo: isize, hi: isize, count: &dyn Fn(usize, usize) -> u32| {
                    if lo < 0 {
                        count(0, hi as usize) + count((lo + n as isize) as usize, n - 1)
                    } else if hi >= n as isize {
                        count(lo as usize, n - 1) + count(0, hi as usize - n)
                    } else {
                        count(lo as usize, hi as usize)
                    }
                };
                let (xi, yi, ri) = (x as isize, y as isize, r as isize);
                (
                    wrapped(xi - ri, xi + ri, &|a, b| self.row_popcount(y, a, b)),
                    wrapped(yi - ri, yi + ri, &|a, b| self.column_count(x, a, b)),
                )
            }
        };
        Ok(CrossCounts { h_count, v_count })
    }

    /// Mirror image across the main diagonal; birth times move with cells.
    pub fn transposed(&self) -> Configuration {
        let mut t = Configuration::new(self.height, self.width, self.boundary).expect("valid dims");
        t.time = self.time;
        for y in 0..self.height {
            for x in 0..self.width {
                if let Some(b) = self.birth_time(x, y) {
                    t.occupy(y, x, b);
                }
            }
        }
        t
    }

    /// Cyclic shift by `(dx, dy)`; birth times move with cells.
    pub fn shifted(&self, dx: usize, dy: usize) -> Configuration {
        let mut s = Configuration::new(self.width, self.height, self.boundary).expect("valid dims");
        s.time = self.time;
        for y in 0..self.height {
            for x in 0..self.width {
                if let Some(b) = self.birth_time(x, y) {
                    s.occupy((x + dx) % self.width, (y + dy) % self.height, b);
                }
            }
        }
        s
    }

    /// Fills a whole row or column with initial occupancy.
    pub fn fill_line(&mut self, orientation: Orientation, index: usize) -> Result<()> {
        match orientation {
            Orientation::Horizontal => (0..self.width).try_for_each(|x| self.set(x, index, true)),
            Orientation::Vertical => (0..self.height).try_for_each(|y| self.set(index, y, true)),
        }
    }

    /// Writes the portable text dump: a `W H BOUNDARY` header, then one line
    /// per row using `#` for occupied and `.` for empty, top row first.
    pub fn write_dump<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{} {} {}", self.width, self.height, self.boundary)?;
        let mut line = String::with_capacity(self.width + 1);
        for y in (0..self.height).rev() {
            line.clear();
            line.extend((0..self.width).map(|x| if self.is_occupied(x, y) { '#' } else { '.' }));
            line.push('\n');
            out.write_all(line.as_bytes())?;
        }
        Ok(())
    }

    pub fn to_dump(&self) -> String {
        let mut buf = Vec::new();
        self.write_dump(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("dump is ASCII")
    }

    /// Reads the text dump written by [`Configuration::write_dump`]. Every
    /// occupied cell gets birth time 0.
    pub fn read_dump<R: BufRead>(input: R) -> Result<Self> {
        let mut lines = input.lines();
        let io_err = |e: std::io::Error| Error::Dump(e.to_string());
        let header = lines.next().ok_or_else(|| Error::Dump("missing header".into()))?.map_err(io_err)?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        let [w, h, b] = fields[..] else {
            return Err(Error::Dump(format!("bad header {header:?}")));
        };
        let width: usize = w.parse().map_err(|_| Error::Dump(format!("bad width {w:?}")))?;
        let height: usize = h.parse().map_err(|_| Error::Dump(format!("bad height {h:?}")))?;
        let boundary: Boundary = b.parse()?;
        let mut c = Configuration::new(width, height, boundary)?;
        for row in (0..height).rev() {
            let line = lines
                .next()
                .ok_or_else(|| Error::Dump(format!("missing row {row}")))?
                .map_err(io_err)?;
            let line = line.trim_end_matches('\r');
            if line.len() != width {
                return Err(Error::Dump(format!("row {row} has {} cells, expected {width}", line.len())));
            }
            for (x, ch) in line.bytes().enumerate() {
                match ch {
                    b'#' => c.occupy(x, row, 0),
                    b'.' => {}
                    other => return Err(Error::Dump(format!("unexpected character {:?}", other as char))),
                }
            }
        }
        Ok(c)
    }
}

/// I.i.d. Bernoulli(`p`) initial occupancy, drawn in row-major order.
pub fn random_configuration<R: Rng + ?Sized>(
    width: usize,
    height: usize,
    boundary: Boundary,
    p: f64,
    rng: &mut R,
) -> Result<Configuration> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Parameter(format!("probability {p} outside [0, 1]")));
    }
    Configuration::from_fn(width, height, boundary, |_, _| rng.gen_bool(p))
}
