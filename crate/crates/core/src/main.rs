use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ydgrow::harness::verify::{self, IncrementalEngine, Suite, VerifyOptions};
use ydgrow::harness::{
    self, exit_code, parse_zeroset, render, run_experiment, ExperimentConfig, ExperimentKind, Observable, Pattern,
    SnapshotStop,
};
use ydgrow::theory::{self, fmt_ratio};
use ydgrow::{Boundary, Configuration, Error, Result};

#[derive(Parser)]
#[command(name = "ydgrow", version, about = "Young-diagram growth dynamics: simulation, estimation, theory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run boxes to fixation and report final densities.
    Simulate(ExperimentArgs),
    /// Median first-occupation time of the origin at each p.
    EstimateT(ExperimentArgs),
    /// Critical length at each p.
    EstimateLc(ExperimentArgs),
    /// Fit the power of T (or L_c) in 1/p over a decreasing p grid.
    EstimatePower(ExperimentArgs),
    /// Final density of Bernoulli boxes.
    Density(ExperimentArgs),
    /// Write a PPM snapshot of one run.
    Render(RenderArgs),
    /// Run the invariant suites.
    Verify(VerifyArgs),
    /// Print closed-form critical powers.
    Theory(TheoryArgs),
}

#[derive(Args, Clone, Default)]
struct ExperimentArgs {
    /// JSON experiment configuration; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Row widths ("3 2 1", "inf 2") or a family such as "line(2,2)".
    #[arg(long)]
    zeroset: Option<String>,
    #[arg(long)]
    rho: Option<u32>,
    #[arg(long)]
    boundary: Option<Boundary>,
    /// Density or comma-separated grid.
    #[arg(long, value_delimiter = ',')]
    p: Option<Vec<f64>>,
    #[arg(long)]
    trials: Option<u32>,
    #[arg(long)]
    t_max: Option<u32>,
    #[arg(long)]
    t_max_cap: Option<u32>,
    /// Box side.
    #[arg(short, long)]
    n: Option<usize>,
    #[arg(long)]
    n_min: Option<usize>,
    #[arg(long)]
    n_max: Option<usize>,
    /// t or lc.
    #[arg(long)]
    observable: Option<Observable>,
    /// random or packed-strip.
    #[arg(long)]
    pattern: Option<Pattern>,
    #[arg(long)]
    seed: Option<u64>,
    /// Per-trial memory budget in MiB.
    #[arg(long)]
    budget_mib: Option<u64>,
    /// Record wall-clock times (output is then not reproducible).
    #[arg(long)]
    timing: bool,
    #[arg(long)]
    shade_period: Option<u32>,
    #[arg(long)]
    trials_csv: Option<PathBuf>,
    #[arg(long)]
    aggregate_csv: Option<PathBuf>,
    #[arg(long)]
    summary_json: Option<PathBuf>,
    /// Text dump of the final state (simulate).
    #[arg(long)]
    dump: Option<PathBuf>,
    /// PPM image of the final state (simulate).
    #[arg(long)]
    ppm: Option<PathBuf>,
}

#[derive(Args)]
struct RenderArgs {
    #[command(flatten)]
    experiment: ExperimentArgs,
    /// Render a text dump instead of running a simulation.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Stop after this many steps.
    #[arg(long)]
    t_stop: Option<u32>,
    /// Stop once this fraction of the box is occupied.
    #[arg(long)]
    stop_density: Option<f64>,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args)]
struct VerifyArgs {
    /// Run only these suites (repeatable).
    #[arg(long)]
    suite: Vec<Suite>,
    /// Roughly a tenth of the default instance counts.
    #[arg(long)]
    quick: bool,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct TheoryArgs {
    /// Report the known power of one zero-set.
    #[arg(long)]
    zeroset: Option<String>,
    /// Largest threshold in the bootstrap table.
    #[arg(long, default_value_t = 20)]
    r_max: u32,
    /// Also write the bootstrap table and catalog as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
}

impl ExperimentArgs {
    fn resolve(&self, kind: ExperimentKind) -> Result<ExperimentConfig> {
        let mut c = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => {
                let missing = |what: &str| Error::Config(format!("--{what} is required without --config"));
                ExperimentConfig::new(
                    kind,
                    self.zeroset.as_deref().ok_or_else(|| missing("zeroset"))?,
                    self.rho.ok_or_else(|| missing("rho"))?,
                    self.p.clone().unwrap_or_else(|| vec![1.0]),
                )
            }
        };
        c.experiment = kind;
        macro_rules! set {
            ($($field:ident),*) => {$(if let Some(v) = self.$field.clone() { c.$field = v; })*};
        }
        set!(zeroset, rho, boundary, p, trials, t_max, t_max_cap, n_min, n_max, observable, pattern, shade_period);
        if self.n.is_some() {
            c.n = self.n;
        }
        if let Some(s) = self.seed {
            c.master_seed = s;
        }
        if let Some(mib) = self.budget_mib {
            c.memory_budget = mib << 20;
        }
        c.timing |= self.timing;
        for (dst, src) in [
            (&mut c.trials_csv, &self.trials_csv),
            (&mut c.aggregate_csv, &self.aggregate_csv),
            (&mut c.summary_json, &self.summary_json),
            (&mut c.dump, &self.dump),
            (&mut c.ppm, &self.ppm),
        ] {
            if src.is_some() {
                *dst = src.clone();
            }
        }
        Ok(c)
    }
}

fn io_err(e: std::io::Error) -> Error {
    Error::Io(e.to_string())
}

fn experiment(kind: ExperimentKind, args: &ExperimentArgs) -> Result<()> {
    let config = args.resolve(kind)?;
    let result = run_experiment(&config)?;
    result.write_outputs(&config)?;
    if config.aggregate_csv.is_none() {
        std::io::stdout().write_all(&result.aggregate_csv()?).map_err(io_err)?;
    }
    if let Some(fit) = result.fit {
        eprintln!("slope {:.4} +/- {:.4}", fit.slope, fit.stderr);
    }
    Ok(())
}

fn render_cmd(args: &RenderArgs) -> Result<()> {
    let (state, period) = match &args.input {
        Some(path) => {
            let file = std::fs::File::open(path).map_err(io_err)?;
            let state = Configuration::read_dump(std::io::BufReader::new(file))?;
            (state, args.experiment.shade_period.unwrap_or(render::DEFAULT_SHADE_PERIOD))
        }
        None => {
            let config = args.experiment.resolve(ExperimentKind::Simulate)?;
            let stop = SnapshotStop { t_stop: args.t_stop, density: args.stop_density };
            (harness::snapshot(&config, stop)?, config.shade_period)
        }
    };
    std::fs::write(&args.output, render::render_ppm(&state, period)).map_err(io_err)?;
    eprintln!("t = {}, density {:.4}", state.time(), state.density());
    Ok(())
}

fn verify_cmd(args: &VerifyArgs) -> Result<bool> {
    let mut opts = if args.quick { VerifyOptions::quick() } else { VerifyOptions::default() };
    if let Some(seed) = args.seed {
        opts.seed = seed;
    }
    let mut all_ok = true;
    for suite in if args.suite.is_empty() { Suite::ALL.to_vec() } else { args.suite.clone() } {
        let report = verify::run_suite(&IncrementalEngine, suite, &opts);
        all_ok &= report.ok();
        println!("{report}");
    }
    Ok(all_ok)
}

fn theory_cmd(args: &TheoryArgs) -> Result<()> {
    if let Some(spec) = &args.zeroset {
        let z = parse_zeroset(spec)?;
        println!("[{z}]: {}", theory::critical_power(&z)?);
        return Ok(());
    }
    let mut table = Vec::new();
    println!("{:>4}  {:>8}  {:>5}", "r", "gamma_c", "m_hat");
    for r in 1..=args.r_max {
        let g = theory::gamma_bootstrap(r)?;
        let m = theory::m_hat_bootstrap(r);
        println!("{r:>4}  {:>8}  {m:>5}", fmt_ratio(g.value));
        table.push((r, fmt_ratio(g.value), m));
    }
    println!();
    println!("{:<10}  {:<22}  source", "zero-set", "power");
    let catalog = theory::small_catalog();
    for e in &catalog {
        let source = match &e.power {
            theory::CriticalPower::Exact(p) => p.source,
            theory::CriticalPower::Bounds { lower, .. } => lower.source,
        };
        println!("{:<10}  {:<22}  {source}", e.zero_set.to_string(), e.power.to_string());
    }
    if let Some(path) = &args.csv {
        let mut w = csv::Writer::from_path(path).map_err(|e| Error::Io(e.to_string()))?;
        let csv_err = |e: csv::Error| Error::Io(e.to_string());
        w.write_record(["table", "key", "power_low", "power_high", "kind", "m_hat"]).map_err(csv_err)?;
        for (r, g, m) in &table {
            w.write_record(["bootstrap", &r.to_string(), g, g, "pure", &m.to_string()]).map_err(csv_err)?;
        }
        for e in &catalog {
            let (lo, hi) = e.power.range();
            let kind = match &e.power {
                theory::CriticalPower::Exact(p) => p.kind.to_string(),
                theory::CriticalPower::Bounds { .. } => "bounds".to_string(),
            };
            w.write_record(["catalog", &e.zero_set.to_string(), &fmt_ratio(lo), &fmt_ratio(hi), &kind, ""])
                .map_err(csv_err)?;
        }
        w.flush().map_err(io_err)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = std::env::var("YDGROW_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("error: cannot size thread pool: {e}");
            return ExitCode::from(3);
        }
    }
    let outcome = match &cli.command {
        Command::Simulate(a) => experiment(ExperimentKind::Simulate, a),
        Command::EstimateT(a) => experiment(ExperimentKind::EstimateT, a),
        Command::EstimateLc(a) => experiment(ExperimentKind::EstimateLc, a),
        Command::EstimatePower(a) => experiment(ExperimentKind::EstimatePower, a),
        Command::Density(a) => experiment(ExperimentKind::Density, a),
        Command::Render(a) => render_cmd(a),
        Command::Theory(a) => theory_cmd(a),
        Command::Verify(a) => match verify_cmd(a) {
            Ok(true) => Ok(()),
            Ok(false) => return ExitCode::from(1),
            Err(e) => Err(e),
        },
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
