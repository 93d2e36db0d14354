//! Young-diagram zero-sets and validated rules.
//!
//! A zero-set is a downward-closed subset of the quadrant `Z+ x Z+`. A pair
//! of counts `(h, v)` (occupied sites on the horizontal and vertical arms of
//! a cross neighborhood) that lies in the zero-set does *not* trigger
//! occupation. Zero-sets are stored as nonincreasing row widths: row `v`
//! holds the cells `(u, v)` with `u < width[v]`, and a row may extend to
//! infinity.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Width of one zero-set row. `Inf` orders above every finite width.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Width {
    Finite(u32),
    Inf,
}

impl Width {
    pub fn finite(self) -> Option<u32> {
        match self {
            Width::Finite(w) => Some(w),
            Width::Inf => None,
        }
    }

    pub fn is_inf(self) -> bool {
        self == Width::Inf
    }

    /// True when a count of `u` falls inside a row of this width.
    #[inline]
    pub fn covers(self, u: u64) -> bool {
        match self {
            Width::Finite(w) => u < u64::from(w),
            Width::Inf => true,
        }
    }
}

impl fmt::Display for Width {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Width::Finite(w) => write!(f, "{w}"),
            Width::Inf => f.write_str("inf"),
        }
    }
}

impl FromStr for Width {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("inf") {
            return Ok(Width::Inf);
        }
        s.parse::<u32>()
            .map(Width::Finite)
            .map_err(|_| Error::Parse(format!("bad row width {s:?}")))
    }
}

impl From<u32> for Width {
    fn from(w: u32) -> Self {
        Width::Finite(w)
    }
}

impl Serialize for Width {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Width::Finite(w) => s.serialize_u32(*w),
            Width::Inf => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Width {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(u32),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Int(w) => Ok(Width::Finite(w)),
            Raw::Str(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// A corner `(u, v)` just outside the zero-set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct MinimalCount {
    pub u: u32,
    pub v: u32,
}

impl MinimalCount {
    pub fn new(u: u32, v: u32) -> Self {
        MinimalCount { u, v }
    }
}

/// Young diagram of finite height, stored as nonincreasing row widths
/// (row 0 first). Zero-width rows are never stored.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ZeroSet {
    rows: Vec<Width>,
}

impl ZeroSet {
    /// The empty zero-set: every site occupies at the first step.
    pub fn empty() -> Self {
        ZeroSet { rows: Vec::new() }
    }

    /// Builds a zero-set from row widths, row 0 first. Trailing zero-width
    /// rows are dropped.
    pub fn from_row_widths<I, W>(widths: I) -> Result<Self>
    where
        I: IntoIterator<Item = W>,
        W: Into<Width>,
    {
        let mut rows: Vec<Width> = widths.into_iter().map(Into::into).collect();
        for v in 1..rows.len() {
            if rows[v] > rows[v - 1] {
                return Err(Error::NonMonotone { row: v });
            }
        }
        while rows.last() == Some(&Width::Finite(0)) {
            rows.pop();
        }
        Ok(ZeroSet { rows })
    }

    /// Builds the unique zero-set whose minimal counts are `counts`.
    ///
    /// Rows below the smallest `v` among the counts are infinite, so a set
    /// without a `(u, 0)` count describes an infinite diagram.
    pub fn from_minimal_counts<I>(counts: I) -> Result<Self>
    where
        I: IntoIterator<Item = MinimalCount>,
    {
        let counts: BTreeSet<(u32, u32)> = counts.into_iter().map(|c| (c.v, c.u)).collect();
        if counts.is_empty() {
            return Err(Error::Inconsistent("no minimal counts given".into()));
        }
        let sorted: Vec<(u32, u32)> = counts.into_iter().collect();
        for pair in sorted.windows(2) {
            let ((v0, u0), (v1, u1)) = (pair[0], pair[1]);
            if v0 == v1 {
                return Err(Error::Inconsistent(format!("two counts share row {v0}")));
            }
            if u1 >= u0 {
                return Err(Error::Inconsistent(format!(
                    "counts ({u0},{v0}) and ({u1},{v1}) are not strictly decreasing in u"
                )));
            }
        }
        let &(height, last_u) = sorted.last().expect("nonempty");
        if last_u != 0 {
            return Err(Error::Inconsistent(
                "no count of the form (0, h): the diagram would have infinite height".into(),
            ));
        }
        if sorted[..sorted.len() - 1].iter().any(|&(_, u)| u == 0) {
            return Err(Error::Inconsistent("more than one count with u = 0".into()));
        }
        let mut rows = vec![Width::Inf; sorted[0].0 as usize];
        for pair in sorted.windows(2) {
            let ((v0, u0), (v1, _)) = (pair[0], pair[1]);
            rows.extend(std::iter::repeat(Width::Finite(u0)).take((v1 - v0) as usize));
        }
        debug_assert_eq!(rows.len(), height as usize);
        Ok(ZeroSet { rows })
    }

    /// Threshold bootstrap percolation: `{(u, v) : u + v <= r - 1}`.
    pub fn bootstrap(r: u32) -> Result<Self> {
        if r < 1 {
            return Err(Error::Parameter("bootstrap needs r >= 1".into()));
        }
        Ok(ZeroSet { rows: (1..=r).rev().map(Width::Finite).collect() })
    }

    /// Line growth: the rectangle `[0, r-1] x [0, s-1]`.
    pub fn line(r: u32, s: u32) -> Result<Self> {
        if s < 1 || s > r {
            return Err(Error::Parameter(format!("line growth needs 1 <= s <= r, got r={r}, s={s}")));
        }
        Ok(ZeroSet { rows: vec![Width::Finite(r); s as usize] })
    }

    /// Line growth with the corner `(r-1, s-1)` removed.
    pub fn perturbed_line(r: u32, s: u32) -> Result<Self> {
        if s < 2 || s > r {
            return Err(Error::Parameter(format!(
                "perturbed line growth needs 2 <= s <= r, got r={r}, s={s}"
            )));
        }
        let mut rows = vec![Width::Finite(r); (s - 1) as usize];
        rows.push(Width::Finite(r - 1));
        Ok(ZeroSet { rows })
    }

    /// Finite L-shape with minimal counts `(0, r)`, `(s1, s2)` and `(r, 0)`.
    pub fn l_finite(r: u32, s1: u32, s2: u32) -> Result<Self> {
        if s1 < 1 || s2 < 1 || s1 >= r || s2 >= r {
            return Err(Error::Parameter(format!(
                "finite L-shape needs 1 <= s1, s2 < r, got r={r}, s1={s1}, s2={s2}"
            )));
        }
        let mut rows = vec![Width::Finite(r); s2 as usize];
        rows.extend(std::iter::repeat(Width::Finite(s1)).take((r - s2) as usize));
        Ok(ZeroSet { rows })
    }

    /// Infinite L-shape with minimal counts `(0, r)` and `(s1, s2)`.
    pub fn l_infinite(r: u32, s1: u32, s2: u32) -> Result<Self> {
        if s1 < 1 || s2 < 1 || s2 >= r {
            return Err(Error::Parameter(format!(
                "infinite L-shape needs s1 >= 1 and 1 <= s2 < r, got r={r}, s1={s1}, s2={s2}"
            )));
        }
        let mut rows = vec![Width::Inf; s2 as usize];
        rows.extend(std::iter::repeat(Width::Finite(s1)).take((r - s2) as usize));
        Ok(ZeroSet { rows })
    }

    pub fn height(&self) -> usize {
        self.rows.len()
    }

    /// Width of row 0, or `Finite(0)` for the empty set.
    pub fn width(&self) -> Width {
        self.rows.first().copied().unwrap_or(Width::Finite(0))
    }

    pub fn rows(&self) -> &[Width] {
        &self.rows
    }

    /// Width of row `v`; rows at or above the height have width 0.
    pub fn row_width(&self, v: usize) -> Width {
        self.rows.get(v).copied().unwrap_or(Width::Finite(0))
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        !self.width().is_inf()
    }

    /// True when the zero-set is a finite rectangle (line growth).
    pub fn is_rectangle(&self) -> bool {
        match self.rows.first() {
            Some(&Width::Finite(w)) => self.rows.iter().all(|&r| r == Width::Finite(w)),
            _ => false,
        }
    }

    #[inline]
    pub fn contains(&self, u: u64, v: u64) -> bool {
        (v as usize) < self.rows.len() && self.rows[v as usize].covers(u)
    }

    pub fn minimal_counts(&self) -> BTreeSet<MinimalCount> {
        let mut out = BTreeSet::new();
        for (v, &w) in self.rows.iter().enumerate() {
            if let Width::Finite(u) = w {
                if v == 0 || w < self.rows[v - 1] {
                    out.insert(MinimalCount::new(u, v as u32));
                }
            }
        }
        out.insert(MinimalCount::new(0, self.rows.len() as u32));
        out
    }

    /// Makes every finite row wider than `rho` infinite.
    pub fn normalize(&self, rho: u32) -> Result<Self> {
        if rho < 1 {
            return Err(Error::Parameter("range must be at least 1".into()));
        }
        if self.height() > rho as usize {
            return Err(Error::HeightExceedsRange { height: self.height(), rho });
        }
        let rows = self
            .rows
            .iter()
            .map(|&w| match w {
                Width::Finite(u) if u > rho => Width::Inf,
                other => other,
            })
            .collect();
        Ok(ZeroSet { rows })
    }

    /// Conjugate diagram (reflection across the diagonal).
    pub fn transpose(&self) -> Result<Self> {
        let w0 = match self.width() {
            Width::Finite(w) => w,
            Width::Inf => return Err(Error::InfiniteWidth),
        };
        let rows = (0..w0)
            .map(|u| {
                let col = self.rows.iter().take_while(|w| w.covers(u64::from(u))).count();
                Width::Finite(col as u32)
            })
            .collect();
        Ok(ZeroSet { rows })
    }
}

impl fmt::Display for ZeroSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for w in &self.rows {
            if !first {
                f.write_str(" ")?;
            }
            write!(f, "{w}")?;
            first = false;
        }
        Ok(())
    }
}

impl FromStr for ZeroSet {
    type Err = Error;

    /// Parses whitespace-separated row widths such as `"3 2 1"` or `"inf 2 2"`.
    fn from_str(s: &str) -> Result<Self> {
        let widths = s.split_whitespace().map(str::parse).collect::<Result<Vec<Width>>>()?;
        ZeroSet::from_row_widths(widths)
    }
}

#[derive(Serialize, Deserialize)]
struct ZeroSetRepr {
    rows: Vec<Width>,
}

impl Serialize for ZeroSet {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ZeroSetRepr { rows: self.rows.clone() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for ZeroSet {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = ZeroSetRepr::deserialize(d)?;
        ZeroSet::from_row_widths(repr.rows).map_err(serde::de::Error::custom)
    }
}

/// How [`Rule::new`] treats finite rows wider than the range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WidthPolicy {
    /// Widen such rows to infinity; the dynamics is unchanged.
    #[default]
    Normalize,
    /// Reject them.
    Strict,
}

/// A validated `(zero-set, range)` pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    zero_set: ZeroSet,
    rho: u32,
    // thresholds[v] = smallest horizontal count that triggers occupation
    // when the vertical count is v, for v in 0..=2*rho+1
    thresholds: Vec<u32>,
}

impl Rule {
    pub fn new(zero_set: ZeroSet, rho: u32) -> Result<Self> {
        Rule::with_policy(zero_set, rho, WidthPolicy::Normalize)
    }

    pub fn with_policy(zero_set: ZeroSet, rho: u32, policy: WidthPolicy) -> Result<Self> {
        if rho < 1 {
            return Err(Error::Parameter("range must be at least 1".into()));
        }
        if zero_set.height() > rho as usize {
            return Err(Error::HeightExceedsRange { height: zero_set.height(), rho });
        }
        if policy == WidthPolicy::Strict {
            if let Width::Finite(w) = zero_set.width() {
                if w > rho {
                    return Err(Error::WidthExceedsRange { width: w, rho });
                }
            }
        }
        let zero_set = zero_set.normalize(rho)?;
        let arm = 2 * rho + 1;
        let thresholds = (0..=arm as usize)
            .map(|v| match zero_set.row_width(v) {
                Width::Finite(w) => w,
                Width::Inf => u32::MAX,
            })
            .collect();
        Ok(Rule { zero_set, rho, thresholds })
    }

    pub fn zero_set(&self) -> &ZeroSet {
        &self.zero_set
    }

    pub fn rho(&self) -> u32 {
        self.rho
    }

    /// Number of sites on one arm of the cross, center included.
    pub fn arm_len(&self) -> u32 {
        2 * self.rho + 1
    }

    /// True when counts `(h, v)` lie outside the zero-set.
    #[inline]
    pub fn triggers(&self, h: u32, v: u32) -> bool {
        h >= self.thresholds[v as usize]
    }

    /// Degenerate rules: the empty zero-set.
    pub fn is_degenerate(&self) -> bool {
        self.zero_set.is_empty()
    }

    /// Same rule reflected across the diagonal.
    pub fn transpose(&self) -> Result<Self> {
        Rule::new(self.zero_set.transpose()?, self.rho)
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] rho={}", self.zero_set, self.rho)
    }
}
