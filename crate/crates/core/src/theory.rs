//! Closed-form critical powers.
//!
//! For a rule with zero-set `Z`, the first time `T` the origin is occupied
//! grows like `p^-gamma` as the initial density `p` goes to zero. Everything
//! here is exact rational arithmetic; floating point only enters
//! [`power_fit`], the empirical counterpart used by the Monte Carlo
//! experiments.

use std::fmt;

use num_rational::Rational64;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::zeroset::{Width, ZeroSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PowerKind {
    /// `T` is of order `p^-gamma` with no sub-polynomial correction.
    PureCritical,
    /// `T = p^-(gamma + o(1))`; purity unknown or known to fail.
    Critical,
    LowerBound,
    UpperBound,
}

impl fmt::Display for PowerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PowerKind::PureCritical => "pure",
            PowerKind::Critical => "critical",
            PowerKind::LowerBound => "lower",
            PowerKind::UpperBound => "upper",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PowerResult {
    #[serde(serialize_with = "ser_ratio")]
    pub value: Rational64,
    pub kind: PowerKind,
    /// Which closed form produced the value.
    pub source: &'static str,
    /// Extra scaling information, such as a known logarithmic correction.
    pub note: Option<&'static str>,
}

fn ser_ratio<S: serde::Serializer>(r: &Rational64, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&fmt_ratio(*r))
}

/// `a/b`, or just `a` for integers.
pub fn fmt_ratio(r: Rational64) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl PowerResult {
    fn new(value: Rational64, kind: PowerKind, source: &'static str) -> Self {
        PowerResult { value, kind, source, note: None }
    }

    pub fn as_f64(&self) -> f64 {
        self.value.to_f64().unwrap_or(f64::NAN)
    }
}

/// What is known about the scaling of `T` for one zero-set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum CriticalPower {
    Exact(PowerResult),
    Bounds { lower: PowerResult, upper: PowerResult },
}

impl CriticalPower {
    /// The exact power, if known.
    pub fn exact(&self) -> Option<Rational64> {
        match self {
            CriticalPower::Exact(p) => Some(p.value),
            CriticalPower::Bounds { .. } => None,
        }
    }

    /// `(lower, upper)`; both equal the exact power when it is known.
    pub fn range(&self) -> (Rational64, Rational64) {
        match self {
            CriticalPower::Exact(p) => (p.value, p.value),
            CriticalPower::Bounds { lower, upper } => (lower.value, upper.value),
        }
    }

    pub fn is_pure(&self) -> bool {
        matches!(self, CriticalPower::Exact(p) if p.kind == PowerKind::PureCritical)
    }
}

impl fmt::Display for CriticalPower {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CriticalPower::Exact(p) => write!(f, "{} ({})", fmt_ratio(p.value), p.kind),
            CriticalPower::Bounds { lower, upper } => {
                write!(f, "[{}, {}] (bounds)", fmt_ratio(lower.value), fmt_ratio(upper.value))
            }
        }
    }
}

fn ratio(n: i64, d: i64) -> Rational64 {
    Rational64::new(n, d)
}

fn isqrt(n: u64) -> u64 {
    let mut s = (n as f64).sqrt() as u64;
    while s * s > n {
        s -= 1;
    }
    while (s + 1) * (s + 1) <= n {
        s += 1;
    }
    s
}

/// `ceil((sqrt(9 + 8r) - 5) / 2)`, computed without floating point: the
/// smallest `k >= 0` with `(2k + 5)^2 >= 9 + 8r`.
pub fn m_hat_bootstrap(r: u32) -> u32 {
    let d = 9 + 8 * u64::from(r);
    let mut k = (isqrt(d).saturating_sub(5) / 2) as u32;
    while (2 * u64::from(k) + 5).pow(2) < d {
        k += 1;
    }
    while k > 0 && (2 * u64::from(k) + 3).pow(2) >= d {
        k -= 1;
    }
    k
}

/// Largest `m >= 0` with `-m^2 - 3m + 2r > 0`; agrees with
/// [`m_hat_bootstrap`].
pub fn m_hat_bootstrap_by_search(r: u32) -> u32 {
    let r = i64::from(r);
    let mut m = 0i64;
    while -(m + 1) * (m + 1) - 3 * (m + 1) + 2 * r > 0 {
        m += 1;
    }
    m as u32
}

/// Threshold-`r` bootstrap percolation:
/// `gamma = (m+1)(2r-m) / (2(m+2))` with `m` = [`m_hat_bootstrap`]`(r)`.
pub fn gamma_bootstrap(r: u32) -> Result<PowerResult> {
    if r < 1 {
        return Err(Error::Parameter("bootstrap threshold must be at least 1".into()));
    }
    let m = i64::from(m_hat_bootstrap(r));
    let r = i64::from(r);
    Ok(PowerResult::new(
        ratio((m + 1) * (2 * r - m), 2 * (m + 2)),
        PowerKind::PureCritical,
        "bootstrap",
    ))
}

/// Line growth with zero-set `[0, r-1] x [0, s-1]`.
pub fn gamma_line(r: u32, s: u32) -> Result<PowerResult> {
    if s < 1 || s > r {
        return Err(Error::Parameter(format!("line growth needs 1 <= s <= r, got r={r}, s={s}")));
    }
    let (r, s) = (i64::from(r), i64::from(s));
    if s == 1 {
        return Ok(PowerResult::new(ratio(r, r + 1), PowerKind::PureCritical, "line-growth-thin"));
    }
    let mut out = PowerResult::new(ratio((r - 1) * s, r), PowerKind::Critical, "line-growth");
    if r == 2 && s == 2 {
        out.note = Some("T of order p^-1 log(1/p): not pure; critical length of order p^-1");
    }
    Ok(out)
}

/// Line growth with the `(r-1, s-1)` corner removed keeps the line-growth
/// power.
pub fn gamma_perturbed_line(r: u32, s: u32) -> Result<PowerResult> {
    if s < 2 || s > r {
        return Err(Error::Parameter(format!("perturbed line growth needs 2 <= s <= r, got r={r}, s={s}")));
    }
    let (r, s) = (i64::from(r), i64::from(s));
    Ok(PowerResult::new(ratio((r - 1) * s, r), PowerKind::Critical, "perturbed-line-growth"))
}

/// Finite L-shape with minimal counts `(0, r)`, `(s1, s2)`, `(r, 0)`.
///
/// The L-shape and its reflection `(s2, s1)` have the same power, so a
/// thin vertical arm is handled like a thin horizontal one. Cases are tried
/// in order: the two exact results, then the two bound pairs.
pub fn gamma_l_finite(r: u32, s1: u32, s2: u32) -> Result<CriticalPower> {
    if s1 < 1 || s2 < 1 || s1 >= r || s2 >= r {
        return Err(Error::Parameter(format!(
            "finite L-shape needs 1 <= s1, s2 < r, got r={r}, s1={s1}, s2={s2}"
        )));
    }
    let (s1, s2) = if s2 == 1 && s1 > 1 { (s2, s1) } else { (s1, s2) };
    let (r, s1, s2) = (i64::from(r), i64::from(s1), i64::from(s2));
    let exact = |v, src| Ok(CriticalPower::Exact(PowerResult::new(v, PowerKind::PureCritical, src)));
    let bounds = |lo, hi, src| {
        Ok(CriticalPower::Bounds {
            lower: PowerResult::new(lo, PowerKind::LowerBound, src),
            upper: PowerResult::new(hi, PowerKind::UpperBound, src),
        })
    };
    if s1 == 1 && 2 * s2 <= r {
        return exact(ratio(r, 2), "l-finite-thin-arm");
    }
    if s1 == 2 && s2 == 2 && r >= 6 {
        return exact(ratio(2 * r, 3), "l-finite-double-arm");
    }
    if s1 == s2 {
        let s = s1;
        let m = ((isqrt(4 * r as u64 + 9) as i64 - 1) / 2).min(s / 2);
        return bounds(ratio(m * (r - m + 1), 1 + m), ratio(r * s, s + 1), "l-finite-symmetric");
    }
    if s1 == 1 {
        let s = s2;
        return bounds(
            Rational64::from(s) - ratio(s, r),
            Rational64::from(s + 1) - ratio(2 * s + 1, r + 1),
            "l-finite-thick-arm",
        );
    }
    Err(Error::Unsupported(format!("finite L-shape with r={r}, s1={s1}, s2={s2}")))
}

/// Infinite L-shape with minimal counts `(0, r)` and `(s1, s2)`:
/// `gamma = (r s1 + s2) / (1 + s1)`.
pub fn gamma_l_infinite(r: u32, s1: u32, s2: u32) -> Result<PowerResult> {
    if s1 < 1 || s2 < 1 || s2 >= r {
        return Err(Error::Parameter(format!(
            "infinite L-shape needs s1 >= 1 and 1 <= s2 < r, got r={r}, s1={s1}, s2={s2}"
        )));
    }
    let (r, s1, s2) = (i64::from(r), i64::from(s1), i64::from(s2));
    Ok(PowerResult::new(ratio(r * s1 + s2, 1 + s1), PowerKind::PureCritical, "l-infinite"))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CatalogEntry {
    pub zero_set: ZeroSet,
    pub power: CriticalPower,
    /// Fits in the 3x3 box.
    pub small: bool,
}

/// The zero-sets of height and width at most 3 (up to reflection), plus
/// two slightly larger examples whose power is only bracketed.
pub fn small_catalog() -> Vec<CatalogEntry> {
    use PowerKind::*;
    let exact = |rows: &[u32], n: i64, d: i64, kind, source, note| CatalogEntry {
        zero_set: ZeroSet::from_row_widths(rows.iter().copied()).expect("catalog rows are monotone"),
        power: CriticalPower::Exact(PowerResult { value: ratio(n, d), kind, source, note }),
        small: true,
    };
    let open = |rows: &[u32], (ln, ld): (i64, i64), (un, ud): (i64, i64)| CatalogEntry {
        zero_set: ZeroSet::from_row_widths(rows.iter().copied()).expect("catalog rows are monotone"),
        power: CriticalPower::Bounds {
            lower: PowerResult::new(ratio(ln, ld), LowerBound, "catalog"),
            upper: PowerResult::new(ratio(un, ud), UpperBound, "catalog"),
        },
        small: false,
    };
    vec![
        exact(&[1], 1, 2, PureCritical, "voracious", None),
        exact(&[2], 2, 3, PureCritical, "line-growth-thin", None),
        exact(&[3], 3, 4, PureCritical, "line-growth-thin", None),
        exact(&[2, 1], 1, 1, PureCritical, "bootstrap", None),
        exact(&[3, 1], 1, 1, PureCritical, "small-l", None),
        exact(
            &[2, 2],
            1,
            1,
            Critical,
            "line-growth",
            Some("T of order p^-1 log(1/p): not pure; critical length of order p^-1"),
        ),
        exact(&[3, 2], 4, 3, Critical, "perturbed-line-growth", Some("purity unresolved")),
        exact(&[3, 3], 4, 3, Critical, "line-growth", Some("purity unresolved")),
        exact(&[3, 1, 1], 3, 2, PureCritical, "l-finite-thin-arm", None),
        exact(&[3, 2, 1], 5, 3, PureCritical, "bootstrap", None),
        exact(&[3, 2, 2], 5, 3, PureCritical, "catalog", None),
        exact(&[3, 3, 2], 2, 1, Critical, "perturbed-line-growth", Some("purity unresolved")),
        exact(&[3, 3, 3], 2, 1, Critical, "line-growth", Some("suspected not pure")),
        open(&[4, 2, 2], (5, 3), (2, 1)),
        open(&[4, 3, 3], (2, 1), (9, 4)),
    ]
}

/// Known power for `z` from the parametric families and the small
/// catalog, preferring an exact power over a bound pair. Reflections are
/// recognized for finite zero-sets.
pub fn critical_power(z: &ZeroSet) -> Result<CriticalPower> {
    let zt = if z.is_finite() { Some(z.transpose()?) } else { None };
    let mut found = vec![family_power(z)?];
    if let Some(zt) = &zt {
        found.push(family_power(zt)?);
    }
    found.push(
        small_catalog()
            .into_iter()
            .find(|e| &e.zero_set == z || Some(&e.zero_set) == zt.as_ref())
            .map(|e| e.power),
    );
    let mut found = found.into_iter().flatten();
    let first = found.next();
    let exact = first.iter().cloned().chain(found).find(|p| p.exact().is_some());
    exact
        .or(first)
        .ok_or_else(|| Error::Unsupported(format!("no closed form for zero-set [{z}]")))
}

fn family_power(z: &ZeroSet) -> Result<Option<CriticalPower>> {
    let rows = z.rows();
    let h = rows.len() as u32;
    if h == 0 {
        return Ok(None);
    }
    let finite: Option<Vec<u32>> = rows.iter().map(|w| w.finite()).collect();
    let exact = |p: PowerResult| Ok(Some(CriticalPower::Exact(p)));
    match finite {
        Some(w) => {
            let r = w[0];
            if w.iter().enumerate().all(|(v, &x)| x == r - v as u32) && h == r {
                return exact(gamma_bootstrap(r)?);
            }
            if w.iter().all(|&x| x == r) && h <= r {
                return exact(gamma_line(r, h)?);
            }
            if h >= 2 && h <= r && w[..h as usize - 1].iter().all(|&x| x == r) && w[h as usize - 1] == r - 1 {
                return exact(gamma_perturbed_line(r, h)?);
            }
            if h == r {
                // L-shape: s2 rows of width r, then rows of width s1 < r.
                let s2 = w.iter().take_while(|&&x| x == r).count() as u32;
                if s2 >= 1 && s2 < r && w[s2 as usize..].iter().all(|&x| x == w[s2 as usize]) {
                    return match gamma_l_finite(r, w[s2 as usize], s2) {
                        Ok(p) => Ok(Some(p)),
                        Err(Error::Unsupported(_)) => Ok(None),
                        Err(e) => Err(e),
                    };
                }
            }
            Ok(None)
        }
        None => {
            let s2 = rows.iter().take_while(|w| w.is_inf()).count();
            let rest = &rows[s2..];
            match rest.first() {
                Some(&Width::Finite(s1)) if rest.iter().all(|&x| x == Width::Finite(s1)) => {
                    exact(gamma_l_infinite(h, s1, s2 as u32)?)
                }
                _ => Ok(None),
            }
        }
    }
}

/// Least-squares fit of `ln T` against `ln(1/p)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope.
    pub stderr: f64,
}

/// Fits `ln(median_T) = intercept + slope * ln(1/p)` over `(p, median_T)`.
pub fn power_fit(points: &[(f64, f64)]) -> Result<PowerFit> {
    if points.iter().any(|&(p, t)| !(p > 0.0 && p <= 1.0) || !(t > 0.0 && t.is_finite())) {
        return Err(Error::DegenerateFit("need 0 < p <= 1 and finite positive T".into()));
    }
    let xs: Vec<f64> = points.iter().map(|&(p, _)| (1.0 / p).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|&(_, t)| t.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if points.is_empty() || sxx.is_zero() {
        return Err(Error::DegenerateFit("all p values are equal".into()));
    }
    if points.len() < 3 {
        return Err(Error::DegenerateFit(format!("need at least 3 points, got {}", points.len())));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let stderr = (ssr / (n - 2.0) / sxx).sqrt();
    Ok(PowerFit { slope, intercept, stderr })
}
