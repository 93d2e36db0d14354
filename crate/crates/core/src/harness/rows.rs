//! CSV result files.
//!
//! Both files start with a `# ydgrow-<kind> v<version>` line ahead of the
//! column header, and readers reject files with another schema tag.

use std::io::{BufRead, Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Boundary;

pub const TRIALS_SCHEMA: &str = "# ydgrow-trials v1";
pub const AGGREGATE_SCHEMA: &str = "# ydgrow-aggregate v1";

/// One trial of an experiment.
///
/// `T` is the first-occupation time for time experiments and the spanning
/// time for spanning and density runs; `censored` marks a trial whose time
/// was not observed (origin still empty at `t_max`, or box not spanned).
/// `t_max` is 0 for runs without a horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRow {
    pub experiment: String,
    pub zeroset: String,
    pub rho: u32,
    pub boundary: Boundary,
    pub p: f64,
    pub n: usize,
    pub trial: u32,
    pub seed: u64,
    #[serde(rename = "T")]
    pub t: Option<u32>,
    pub censored: bool,
    pub t_max: u32,
    pub wall_ms: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AggregateKind {
    /// Median first-occupation time at one `p`.
    Median,
    /// One probe of the critical-length search.
    Probe,
    /// Critical-length estimate at one `p`.
    Lc,
    /// Mean final density over trials.
    Density,
    /// Power-law fit across the `p` grid.
    Fit,
}

/// A summary line. Columns that do not apply to a `kind` are empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub experiment: String,
    pub kind: AggregateKind,
    pub zeroset: String,
    pub rho: u32,
    pub boundary: Boundary,
    pub p: Option<f64>,
    pub n: Option<usize>,
    pub trials: u32,
    pub successes: Option<u32>,
    pub uncensored: Option<u32>,
    pub t_max: Option<u32>,
    pub median_t: Option<f64>,
    pub n_star: Option<usize>,
    pub mean: Option<f64>,
    pub stderr: Option<f64>,
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
    pub slope: Option<f64>,
    pub slope_stderr: Option<f64>,
    pub theory_low: Option<f64>,
    pub theory_high: Option<f64>,
}

impl AggregateRow {
    pub fn new(experiment: &str, kind: AggregateKind, zeroset: &str, rho: u32, boundary: Boundary, trials: u32) -> Self {
        AggregateRow {
            experiment: experiment.to_string(),
            kind,
            zeroset: zeroset.to_string(),
            rho,
            boundary,
            p: None,
            n: None,
            trials,
            successes: None,
            uncensored: None,
            t_max: None,
            median_t: None,
            n_star: None,
            mean: None,
            stderr: None,
            ci_low: None,
            ci_high: None,
            slope: None,
            slope_stderr: None,
            theory_low: None,
            theory_high: None,
        }
    }
}

/// Orders trial rows by `(p, n, trial)`.
pub fn sort_trials(rows: &mut [TrialRow]) {
    rows.sort_by(|a, b| a.p.total_cmp(&b.p).then(a.n.cmp(&b.n)).then(a.trial.cmp(&b.trial)));
}

/// Orders aggregate rows by `(p, n, kind)`; rows without `p` come last.
pub fn sort_aggregates(rows: &mut [AggregateRow]) {
    let key = |r: &AggregateRow| (r.p.is_none(), r.p.unwrap_or(0.0), r.n.unwrap_or(0), r.kind);
    rows.sort_by(|a, b| {
        let (ka, kb) = (key(a), key(b));
        ka.0.cmp(&kb.0).then(ka.1.total_cmp(&kb.1)).then(ka.2.cmp(&kb.2)).then(ka.3.cmp(&kb.3))
    });
}

fn write_csv<W: Write, T: Serialize>(mut out: W, schema: &str, rows: &[T]) -> Result<()> {
    let io = |e: std::io::Error| Error::Io(e.to_string());
    writeln!(out, "{schema}").map_err(io)?;
    let mut w = csv::WriterBuilder::new().has_headers(true).from_writer(out);
    for r in rows {
        w.serialize(r).map_err(|e| Error::Io(e.to_string()))?;
    }
    w.flush().map_err(io)
}

fn read_csv<R: Read, T: for<'de> Deserialize<'de>>(input: R, schema: &str) -> Result<Vec<T>> {
    let mut input = std::io::BufReader::new(input);
    let mut first = String::new();
    input.read_line(&mut first).map_err(|e| Error::Io(e.to_string()))?;
    if first.trim_end() != schema {
        return Err(Error::Parse(format!("expected schema line {schema:?}, found {:?}", first.trim_end())));
    }
    csv::Reader::from_reader(input)
        .deserialize()
        .map(|r| r.map_err(|e| Error::Parse(e.to_string())))
        .collect()
}

pub fn write_trials<W: Write>(out: W, rows: &[TrialRow]) -> Result<()> {
    write_csv(out, TRIALS_SCHEMA, rows)
}

pub fn read_trials<R: Read>(input: R) -> Result<Vec<TrialRow>> {
    read_csv(input, TRIALS_SCHEMA)
}

pub fn write_aggregates<W: Write>(out: W, rows: &[AggregateRow]) -> Result<()> {
    write_csv(out, AGGREGATE_SCHEMA, rows)
}

pub fn read_aggregates<R: Read>(input: R) -> Result<Vec<AggregateRow>> {
    read_csv(input, AGGREGATE_SCHEMA)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn trial_row() -> impl Strategy<Value = TrialRow> {
        (
            "[a-z-]{1,12}",
            "[0-9 inf]{0,10}",
            0u32..50,
            prop::bool::ANY,
            (0.0f64..=1.0, 0usize..100_000, any::<u32>(), any::<u64>()),
            (prop::option::of(any::<u32>()), any::<u32>(), any::<u64>()),
        )
            .prop_map(|(experiment, zeroset, rho, periodic, (p, n, trial, seed), (t, t_max, wall_ms))| TrialRow {
                experiment,
                zeroset,
                rho,
                boundary: if periodic { Boundary::Periodic } else { Boundary::Zero },
                p,
                n,
                trial,
                seed,
                t,
                censored: t.is_none(),
                t_max,
                wall_ms,
            })
    }

    proptest! {
        #[test]
        fn trial_rows_round_trip(rows in prop::collection::vec(trial_row(), 0..20)) {
            let mut buf = Vec::new();
            write_trials(&mut buf, &rows).unwrap();
            prop_assert_eq!(read_trials(&buf[..]).unwrap(), rows);
        }

        #[test]
        fn aggregate_rows_round_trip(p in prop::option::of(0.0f64..1.0), slope in prop::option::of(-5.0f64..5.0), n in prop::option::of(1usize..5000)) {
            let mut row = AggregateRow::new("estimate-lc", AggregateKind::Probe, "2 2", 2, Boundary::Zero, 200);
            row.p = p;
            row.slope = slope;
            row.n = n;
            row.ci_low = Some(0.25);
            let rows = vec![row.clone(), AggregateRow { kind: AggregateKind::Fit, ..row }];
            let mut buf = Vec::new();
            write_aggregates(&mut buf, &rows).unwrap();
            prop_assert_eq!(read_aggregates(&buf[..]).unwrap(), rows);
        }
    }

    #[test]
    fn schema_line_is_checked() {
        let mut buf = Vec::new();
        write_trials(&mut buf, &[]).unwrap();
        assert!(read_aggregates(&buf[..]).is_err());
        assert!(String::from_utf8(buf).unwrap().starts_with(TRIALS_SCHEMA));
    }

    #[test]
    fn trial_order() {
        let row = |p, n, trial| TrialRow {
            experiment: "x".into(),
            zeroset: "1".into(),
            rho: 1,
            boundary: Boundary::Zero,
            p,
            n,
            trial,
            seed: 0,
            t: None,
            censored: true,
            t_max: 1,
            wall_ms: 0,
        };
        let mut rows = vec![row(0.5, 3, 1), row(0.1, 9, 0), row(0.5, 3, 0), row(0.5, 2, 7)];
        sort_trials(&mut rows);
        let keys: Vec<_> = rows.iter().map(|r| (r.p, r.n, r.trial)).collect();
        assert_eq!(keys, vec![(0.1, 9, 0), (0.5, 2, 7), (0.5, 3, 0), (0.5, 3, 1)]);
    }
}
