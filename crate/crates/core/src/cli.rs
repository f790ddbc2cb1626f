//! Command-line front end: simulate programs, fit and evaluate estimates, run
//! two-sample tests and rebuild the reference-distribution tables.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::distributions::ReferenceDistribution;
use crate::error::{Error, Result};
use crate::estimator::{fit, fit_gram_charlier, fit_multivariate, DensityEstimate, MomentTensor, MomentVector};
use crate::gof::{energy_two_sample, estimate_cdf_distance, ks_two_sample, sample_estimate, TestReport};
use crate::loopsim::{bundled, parse, simulate, SimulationSpec, BUNDLED};
use crate::moment_sources::{sample_moments, Observations};

#[derive(Debug, Parser)]
#[command(name = "kseries", version, about = "K-series density estimation from moments")]
pub struct Cli {
    /// Worker threads for simulation and permutation tests.
    #[arg(long, global = true, env = "KSERIES_THREADS")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a loop program and write sample moments and observations.
    Simulate(SimulateArgs),
    /// Fit a K-series estimate to a moment file.
    Fit(FitArgs),
    /// Evaluate an estimate on a grid.
    Eval(EvalArgs),
    /// Two-sample goodness-of-fit test.
    Test(TestArgs),
    /// Reference-distribution study tables.
    Table(TableArgs),
    /// List the bundled programs.
    Examples(ExamplesArgs),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Program file, or the name of a bundled program.
    pub program: String,
    /// Iteration at which each replication is stopped.
    #[arg(short = 't', long)]
    pub iterations: u64,
    #[arg(short = 'r', long, default_value_t = 10_000)]
    pub replications: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output variables (comma separated); all outputs by default.
    #[arg(long, value_delimiter = ',')]
    pub vars: Vec<String>,
    /// Moment degree per variable; a single value applies to all.
    #[arg(long, value_delimiter = ',', default_value = "6")]
    pub degrees: Vec<usize>,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// MomentTensor JSON.
    pub moments: PathBuf,
    /// Reference descriptor per variable: inline JSON or a file.
    #[arg(long = "reference", required = true)]
    pub references: Vec<String>,
    /// Truncate the moments to these degrees before fitting.
    #[arg(long, value_delimiter = ',')]
    pub degrees: Vec<usize>,
    #[arg(short, long, default_value = "estimate.json")]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    pub estimate: PathBuf,
    /// CSV of points, one column per variable, with a header row.
    #[arg(long, conflicts_with = "linspace")]
    pub grid: Option<PathBuf>,
    /// `lo,hi,n` per variable; the grid is their tensor product.
    #[arg(long, allow_hyphen_values = true)]
    pub linspace: Vec<String>,
    /// Output CSV; stdout when absent.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TestChoice {
    Ks,
    Energy,
}

#[derive(Debug, Args)]
pub struct TestArgs {
    pub test: TestChoice,
    /// Estimate JSON (sampled) or observation CSV.
    pub first: PathBuf,
    /// Observation CSV.
    pub second: PathBuf,
    /// Columns used from observation files.
    #[arg(long, value_delimiter = ',')]
    pub vars: Vec<String>,
    /// Draws from the estimate; the size of the second sample by default.
    #[arg(long)]
    pub draws: Option<usize>,
    #[arg(long, default_value_t = 499)]
    pub permutations: usize,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    /// Uniform and truncated normal references on the target's support.
    Exact,
    /// Uniform references on wider supports.
    Extended,
    /// Truncated normal on wider supports and the normal (Gram-Charlier).
    Gc,
    All,
}

#[derive(Debug, Args)]
pub struct TableArgs {
    #[arg(long, value_enum, default_value = "all", conflicts_with = "config")]
    pub preset: Preset,
    /// Experiment file with explicit rows.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Draws per sample.
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    /// CSV output; the aligned table always goes to stdout.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExamplesArgs {
    /// Print the source of one program.
    #[arg(long)]
    pub show: Option<String>,
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Error::InvalidArgument("--threads must be at least 1".into()));
        }
        // A second call in the same process keeps the first pool.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match cli.command {
        Command::Simulate(a) => {
            let (m, obs) = cmd_simulate(&a)?;
            fs::create_dir_all(&a.out)?;
            fs::write(a.out.join("moments.json"), serde_json::to_string_pretty(&m.to_json()?)?)?;
            obs.write_csv(fs::File::create(a.out.join("observations.csv"))?)?;
            println!(
                "{} replications of {} variable(s) at t={}; wrote {}",
                obs.len(),
                obs.dims(),
                a.iterations,
                a.out.display()
            );
            Ok(())
        }
        Command::Fit(a) => {
            let m = read_moments(&a.moments)?;
            let refs = a.references.iter().map(|r| load_reference(r)).collect::<Result<Vec<_>>>()?;
            let (est, residuals) = cmd_fit(&m, &refs, &a.degrees)?;
            fs::write(&a.output, serde_json::to_string_pretty(&est.to_json()?)?)?;
            print!("{}", format_residuals(&residuals));
            for w in est.warnings() {
                eprintln!("warning: {w}");
            }
            Ok(())
        }
        Command::Eval(a) => {
            let est = read_estimate(&a.estimate)?;
            let points = match &a.grid {
                Some(p) => Observations::read_csv(read_text(p)?.as_bytes())?.rows,
                None => linspace_grid(&a.linspace)?,
            };
            let text = cmd_eval(&est, &points)?;
            match &a.output {
                Some(p) => fs::write(p, text)?,
                None => print!("{text}"),
            }
            Ok(())
        }
        Command::Test(a) => {
            let report = cmd_test(&a)?;
            println!("{report}");
            if let Some(p) = &a.output {
                fs::write(p, serde_json::to_string_pretty(&report.to_json()?)?)?;
            }
            Ok(())
        }
        Command::Table(a) => {
            let rows = match &a.config {
                Some(p) => ExperimentConfig::from_json_str(&read_text(p)?)?.rows()?,
                None => preset_rows(a.preset)?,
            };
            let results = cmd_table(&rows, a.n, a.seed)?;
            print!("{}", render_text(&results));
            if let Some(p) = &a.output {
                write_table_csv(&results, fs::File::create(p)?)?;
            }
            Ok(())
        }
        Command::Examples(a) => {
            match a.show {
                Some(name) => {
                    let p = bundled(&name).ok_or_else(|| unknown_program(&name))?;
                    print!("{}", p.source);
                }
                None => {
                    for p in BUNDLED {
                        println!("{:<28}{}", p.name, p.description);
                    }
                }
            }
            Ok(())
        }
    }
}

fn unknown_program(name: &str) -> Error {
    let names: Vec<&str> = BUNDLED.iter().map(|p| p.name).collect();
    Error::InvalidArgument(format!("`{name}` is neither a file nor a bundled program ({})", names.join(", ")))
}

fn read_text(path: impl AsRef<Path>) -> Result<String> {
    let path = path.as_ref();
    fs::read_to_string(path).map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))
}

/// Program source from a path, falling back to the bundled programs.
pub fn load_program(spec: &str) -> Result<String> {
    let path = Path::new(spec);
    if path.is_file() {
        return Ok(read_text(path)?);
    }
    bundled(spec).map(|p| p.source.to_string()).ok_or_else(|| unknown_program(spec))
}

/// Reference descriptor given inline as JSON or as a file path.
pub fn load_reference(spec: &str) -> Result<ReferenceDistribution> {
    if spec.trim_start().starts_with('{') {
        ReferenceDistribution::from_json_str(spec)
    } else {
        ReferenceDistribution::from_json_str(&read_text(spec)?)
    }
}

pub fn read_moments(path: &Path) -> Result<MomentTensor> {
    MomentTensor::from_json(&serde_json::from_str(&read_text(path)?)?)
}

pub fn read_estimate(path: &Path) -> Result<DensityEstimate> {
    DensityEstimate::from_json(&serde_json::from_str(&read_text(path)?)?)
}

pub fn cmd_simulate(a: &SimulateArgs) -> Result<(MomentTensor, Observations)> {
    let program = parse(&load_program(&a.program)?)?;
    let vars: Vec<&str> = a.vars.iter().map(String::as_str).collect();
    let spec = SimulationSpec::new(program, a.iterations, a.replications, a.seed).with_variables(&vars);
    let obs = simulate(&spec)?;
    let degrees = broadcast(&a.degrees, obs.dims())?;
    let m = sample_moments(&obs.rows, &degrees)?;
    Ok((m, obs))
}

fn broadcast(degrees: &[usize], dims: usize) -> Result<Vec<usize>> {
    match degrees.len() {
        1 => Ok(vec![degrees[0]; dims]),
        n if n == dims => Ok(degrees.to_vec()),
        n => Err(Error::DimensionMismatch {
            expected: dims,
            actual: n,
        }),
    }
}

/// Fits and returns the estimate with its moment-reproduction residuals.
pub fn cmd_fit(
    m: &MomentTensor,
    references: &[ReferenceDistribution],
    degrees: &[usize],
) -> Result<(DensityEstimate, Vec<(Vec<usize>, f64)>)> {
    let m = if degrees.is_empty() {
        m.clone()
    } else {
        m.truncate(&broadcast(degrees, m.dims())?)?
    };
    let est = fit_multivariate(&m, references)?;
    let residuals = est.moment_residuals(&m)?;
    Ok((est, residuals))
}

fn format_residuals(residuals: &[(Vec<usize>, f64)]) -> String {
    let mut out = String::from("moment          residual\n");
    let mut worst = 0.0f64;
    for (idx, r) in residuals {
        let label = idx.iter().map(usize::to_string).collect::<Vec<_>>().join(",");
        let _ = writeln!(out, "({label:<12}) {r:>+.3e}");
        worst = worst.max(r.abs());
    }
    let _ = writeln!(out, "max |residual| {worst:.3e}");
    out
}

/// Tensor product of `lo,hi,n` axes, last axis fastest.
pub fn linspace_grid(axes: &[String]) -> Result<Vec<Vec<f64>>> {
    if axes.is_empty() {
        return Err(Error::InvalidArgument("give --grid or at least one --linspace".into()));
    }
    let mut grid: Vec<Vec<f64>> = vec![Vec::new()];
    for axis in axes {
        let parts: Vec<&str> = axis.split(',').map(str::trim).collect();
        let bad = || Error::InvalidArgument(format!("--linspace expects lo,hi,n; got `{axis}`"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let lo: f64 = parts[0].parse().map_err(|_| bad())?;
        let hi: f64 = parts[1].parse().map_err(|_| bad())?;
        let n: usize = parts[2].parse().map_err(|_| bad())?;
        if n == 0 || !lo.is_finite() || !hi.is_finite() {
            return Err(bad());
        }
        let values: Vec<f64> = (0..n)
            .map(|i| match (i, n) {
                (_, 1) => lo,
                (i, n) if i == n - 1 => hi,
                _ => lo + (hi - lo) * i as f64 / (n - 1) as f64,
            })
            .collect();
        grid = grid
            .into_iter()
            .flat_map(|p| {
                values.iter().map(move |v| {
                    let mut q = p.clone();
                    q.push(*v);
                    q
                })
            })
            .collect();
    }
    Ok(grid)
}

/// CSV `x1..xk,f`; every value printed in shortest round-trip form.
pub fn cmd_eval(est: &DensityEstimate, points: &[Vec<f64>]) -> Result<String> {
    let values = est.eval_grid(points)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = (1..=est.dims()).map(|i| format!("x{i}")).collect();
    header.push("f".into());
    w.write_record(&header)?;
    for (p, f) in points.iter().zip(&values) {
        w.write_record(p.iter().chain(std::iter::once(f)).map(|v| v.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

enum Sample {
    Estimate(DensityEstimate),
    Rows(Vec<Vec<f64>>),
}

fn read_sample(path: &Path, vars: &[String]) -> Result<Sample> {
    let text = read_text(path)?;
    if text.trim_start().starts_with('{') {
        return Ok(Sample::Estimate(DensityEstimate::from_json(&serde_json::from_str(&text)?)?));
    }
    let obs = Observations::read_csv(text.as_bytes())?;
    let obs = if vars.is_empty() {
        obs
    } else {
        obs.select(&vars.iter().map(String::as_str).collect::<Vec<_>>())?
    };
    Ok(Sample::Rows(obs.rows))
}

pub fn cmd_test(a: &TestArgs) -> Result<TestReport> {
    let second = match read_sample(&a.second, &a.vars)? {
        Sample::Rows(r) => r,
        Sample::Estimate(_) => {
            return Err(Error::InvalidArgument("the second sample must be an observation CSV".into()))
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let first = match read_sample(&a.first, &a.vars)? {
        Sample::Rows(r) => r,
        Sample::Estimate(est) => sample_estimate(&est, a.draws.unwrap_or(second.len()), &mut rng)?,
    };
    let mut report = match a.test {
        TestChoice::Ks => {
            let col = |rows: &[Vec<f64>]| -> Result<Vec<f64>> {
                rows.iter()
                    .map(|r| match r.as_slice() {
                        [x] => Ok(*x),
                        _ => Err(Error::InvalidArgument(format!(
                            "KS needs one variable, got {}; choose one with --vars",
                            r.len()
                        ))),
                    })
                    .collect()
            };
            ks_two_sample(&col(&first)?, &col(&second)?)?
        }
        TestChoice::Energy => energy_two_sample(&first, &second, a.permutations, &mut rng)?,
    };
    report.decide_at(a.alpha)?;
    Ok(report)
}

/// How a table row picks its reference.
#[derive(Debug, Clone)]
pub enum RowReference {
    Fixed(ReferenceDistribution),
    /// Normal with the target's mean and variance.
    GramCharlier,
}

#[derive(Debug, Clone)]
pub struct ExperimentRow {
    pub target: ReferenceDistribution,
    pub reference: RowReference,
    pub moments: usize,
}

/// Explicit rows for `table --config`.
#[derive(Debug, Deserialize)]
pub struct ExperimentConfig {
    pub rows: Vec<ConfigRow>,
}

#[derive(Debug, Deserialize)]
pub struct ConfigRow {
    pub target: Value,
    /// A descriptor, or the string `"gram_charlier"`.
    pub reference: Value,
    pub moments: Vec<usize>,
}

impl ExperimentConfig {
    pub fn from_json_str(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn rows(&self) -> Result<Vec<ExperimentRow>> {
        let mut out = Vec::new();
        for r in &self.rows {
            let target = ReferenceDistribution::from_json(&r.target)?;
            let reference = match &r.reference {
                Value::String(s) if s == "gram_charlier" => RowReference::GramCharlier,
                v => RowReference::Fixed(ReferenceDistribution::from_json(v)?),
            };
            for &n in &r.moments {
                out.push(ExperimentRow {
                    target: target.clone(),
                    reference: reference.clone(),
                    moments: n,
                });
            }
        }
        Ok(out)
    }
}

fn push_rows(
    out: &mut Vec<ExperimentRow>,
    target: &ReferenceDistribution,
    reference: RowReference,
    moments: &[usize],
) {
    for &n in moments {
        out.push(ExperimentRow {
            target: target.clone(),
            reference: reference.clone(),
            moments: n,
        });
    }
}

fn matched_tn(target: &ReferenceDistribution, a: f64, b: f64) -> Result<RowReference> {
    Ok(RowReference::Fixed(ReferenceDistribution::truncated_normal(
        target.mean(),
        target.variance(),
        a,
        b,
    )?))
}

pub fn preset_rows(preset: Preset) -> Result<Vec<ExperimentRow>> {
    let tg = ReferenceDistribution::truncated_gamma(2.0, 0.5, 0.0, 5.0)?;
    let tn = ReferenceDistribution::truncated_normal(1.5, 5.76, -6.0, 6.0)?;
    let cb = ReferenceDistribution::continuous_bernoulli(0.3)?;
    let te = ReferenceDistribution::truncated_exponential(2.0 / 3.0, 0.0, 4.0)?;
    let mut rows = Vec::new();
    if matches!(preset, Preset::Exact | Preset::All) {
        for (t, m) in [(&tg, &[2, 3, 5, 8][..]), (&tn, &[2, 4, 7]), (&cb, &[3, 5, 8]), (&te, &[2, 4, 6])] {
            let s = t.support();
            push_rows(&mut rows, t, RowReference::Fixed(ReferenceDistribution::uniform(s.lower, s.upper)?), m);
            push_rows(&mut rows, t, matched_tn(t, s.lower, s.upper)?, m);
        }
    }
    let wide = [
        (&tg, (-2.0, 7.0), &[4, 8, 10][..], &[6, 8, 10][..]),
        (&tn, (-8.0, 8.0), &[5, 7, 10], &[2, 5, 10]),
        (&cb, (-2.0, 3.0), &[5, 10, 17], &[5, 8, 12]),
        (&te, (-2.0, 6.0), &[6, 10, 15], &[6, 10, 15]),
    ];
    if matches!(preset, Preset::Extended | Preset::All) {
        for (t, (a, b), m, _) in wide {
            push_rows(&mut rows, t, RowReference::Fixed(ReferenceDistribution::uniform(a, b)?), m);
        }
    }
    if matches!(preset, Preset::Gc | Preset::All) {
        for (t, (a, b), _, m) in wide {
            push_rows(&mut rows, t, matched_tn(t, a, b)?, m);
            push_rows(&mut rows, t, RowReference::GramCharlier, m);
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, Serialize)]
pub struct TableRow {
    pub target: String,
    pub reference: String,
    pub moments: usize,
    pub ks_distance: Option<f64>,
    pub rejected_05: Option<bool>,
    pub rejected_20: Option<bool>,
    pub glyph: Option<String>,
    pub cdf_distance: Option<f64>,
    pub error: Option<String>,
}

fn run_row(row: &ExperimentRow, i: usize, n: usize, seed: u64) -> TableRow {
    let mut out = TableRow {
        target: row.target.describe(),
        reference: match &row.reference {
            RowReference::Fixed(r) => r.describe(),
            RowReference::GramCharlier => "normal (Gram-Charlier)".into(),
        },
        moments: row.moments,
        ks_distance: None,
        rejected_05: None,
        rejected_20: None,
        glyph: None,
        cdf_distance: None,
        error: None,
    };
    let result = (|| -> Result<(TestReport, f64)> {
        let m = MomentVector::new(row.target.raw_moments(row.moments)?)?;
        let est = match &row.reference {
            RowReference::Fixed(r) => fit(&m, r)?,
            RowReference::GramCharlier => fit_gram_charlier(&m)?,
        };
        let gap = estimate_cdf_distance(&est, |x| row.target.cdf(x), 2000)?;
        let row_seed = seed.wrapping_add(2 * i as u64);
        let mut rng = ChaCha8Rng::seed_from_u64(row_seed);
        let a: Vec<f64> = sample_estimate(&est, n, &mut rng)?.into_iter().map(|r| r[0]).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(row_seed.wrapping_add(1));
        let b: Vec<f64> = (0..n).map(|_| row.target.sample(&mut rng)).collect();
        Ok((ks_two_sample(&a, &b)?, gap))
    })();
    match result {
        Ok((r, gap)) => {
            out.ks_distance = Some(r.statistic);
            out.rejected_05 = r.rejected_at(0.05);
            out.rejected_20 = r.rejected_at(0.2);
            out.glyph = Some(r.glyph().to_string());
            out.cdf_distance = Some(gap);
        }
        Err(e) => out.error = Some(e.to_string()),
    }
    out
}

/// One fit and one KS test per row; failed fits are reported in the row.
pub fn cmd_table(rows: &[ExperimentRow], n: usize, seed: u64) -> Result<Vec<TableRow>> {
    if n < 2 {
        return Err(Error::InvalidArgument("--n must be at least 2".into()));
    }
    Ok(rows.iter().enumerate().map(|(i, r)| run_row(r, i, n, seed)).collect())
}

pub fn render_text(rows: &[TableRow]) -> String {
    let tw = rows.iter().map(|r| r.target.chars().count()).max().unwrap_or(6).max(6);
    let rw = rows.iter().map(|r| r.reference.chars().count()).max().unwrap_or(9).max(9);
    let mut out = format!("{:<tw$}  {:<rw$}  {:>3}  {:>8}  {:<4}  {:>10}\n", "target", "reference", "|M|", "KS", "", "sup|dF|");
    for r in rows {
        let _ = match (&r.error, r.ks_distance, r.cdf_distance) {
            (None, Some(d), Some(g)) => writeln!(
                out,
                "{:<tw$}  {:<rw$}  {:>3}  {:>8.4}  {:<4}  {:>10.2e}",
                r.target,
                r.reference,
                r.moments,
                d,
                r.glyph.as_deref().unwrap_or(""),
                g
            ),
            (e, _, _) => writeln!(
                out,
                "{:<tw$}  {:<rw$}  {:>3}  failed: {}",
                r.target,
                r.reference,
                r.moments,
                e.as_deref().unwrap_or("no result")
            ),
        };
    }
    out
}

pub fn write_table_csv<W: std::io::Write>(rows: &[TableRow], w: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(w);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
