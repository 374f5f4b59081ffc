//! `ncx2diff` command-line front end.
//!
//! Exit codes: 0 success, 1 selftest failure, 2 invalid flags or
//! parameters, 3 numerical non-convergence. Every error writes one line
//! `ncx2diff: error kind=<kind>: <reason>` to stderr.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgGroup, Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use ncx2diff::density::{char_fn_diff, char_fn_sum, ncx2diff_pdf, sum_pdf};
use ncx2diff::export::{fmt_sig17, write_density_csv, write_numeric_csv};
use ncx2diff::moments::{diff_moment_set, sum_moment_set};
use ncx2diff::probability::{prob_nonpositive_diff, prob_nonpositive_sum, table1};
use ncx2diff::sampling::{Route, SampleBatch, SampleParams, Sampler};
use ncx2diff::selftest::{self, Mode, SelftestConfig, SelftestReport, CRITERIA};
use ncx2diff::stein::{null_check, Method};
use ncx2diff::{ChiSqDiffParams, Error, ProductNormalParams, SeriesControl};
use serde_json::json;

/// Environment variable that sets the default series tolerance.
const TOL_ENV: &str = "NCX2DIFF_TOL";

#[derive(Parser)]
#[command(
    name = "ncx2diff",
    version,
    about = "Noncentral chi-square difference and correlated normal product distributions"
)]
struct Cli {
    /// Worker threads for sampling and table computation (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Density on a grid of points.
    Pdf {
        #[command(flatten)]
        law: LawArgs,
        /// Evaluation points as `lo:hi:steps`.
        #[arg(long, allow_hyphen_values = true, value_parser = parse_grid)]
        grid: Grid,
        #[command(flatten)]
        ctrl: CtrlArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Characteristic function on a grid of `t` values.
    Cf {
        #[command(flatten)]
        law: LawArgs,
        /// `t` values as `lo:hi:steps`.
        #[arg(long, allow_hyphen_values = true, value_parser = parse_grid)]
        grid: Grid,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Raw and central moments, cumulants and shape summaries.
    Moments {
        #[command(flatten)]
        law: LawArgs,
        /// Highest order (2 to 20).
        #[arg(long, default_value_t = 4)]
        order: usize,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Cumulants up to `--order`.
    Cumulants {
        #[command(flatten)]
        law: LawArgs,
        /// Highest order (2 to 20).
        #[arg(long, default_value_t = 4)]
        order: usize,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Probability that the variable is at most zero.
    ProbNeg {
        #[command(flatten)]
        law: LawArgs,
        #[command(flatten)]
        ctrl: CtrlArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Seeded random draws.
    Sample {
        #[command(flatten)]
        law: LawArgs,
        /// Number of draws.
        #[arg(long)]
        count: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = RouteArg::Definitional)]
        route: RouteArg,
        #[command(flatten)]
        out: OutArgs,
    },
    /// The negativity table over the standard grid of means and correlations.
    Table1 {
        #[command(flatten)]
        ctrl: CtrlArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Stein operator null check over the built-in test functions.
    SteinCheck {
        #[command(flatten)]
        law: LawArgs,
        #[arg(long, value_enum, default_value_t = MethodArg::MonteCarlo)]
        method: MethodArg,
        /// Monte Carlo draws.
        #[arg(long, default_value_t = 1_000_000)]
        count: usize,
        /// Required for the Monte Carlo method.
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        ctrl: CtrlArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Runs the acceptance criteria and writes a JSON report.
    Selftest {
        #[arg(long)]
        seed: u64,
        /// Smaller sample sizes for a fast smoke run.
        #[arg(long)]
        quick: bool,
        /// Run only these criteria (repeatable).
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=9))]
        criterion: Vec<u8>,
        /// Report path (default: stdout).
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

/// Exactly one of the two parameterisations.
#[derive(Args)]
#[command(group(ArgGroup::new("law").required(true).args(["product", "diff"])))]
struct LawArgs {
    /// Sum of products of correlated normal pairs.
    #[arg(long)]
    product: bool,
    /// Difference of two noncentral chi-square variables.
    #[arg(long)]
    diff: bool,

    #[arg(long, conflicts_with = "diff", default_value_t = 0.0)]
    mu_x: f64,
    #[arg(long, conflicts_with = "diff", default_value_t = 0.0)]
    mu_y: f64,
    #[arg(long, conflicts_with = "diff", default_value_t = 1.0)]
    sigma_x: f64,
    #[arg(long, conflicts_with = "diff", default_value_t = 1.0)]
    sigma_y: f64,
    #[arg(long, conflicts_with = "diff", default_value_t = 0.0)]
    rho: f64,
    /// Number of pairs.
    #[arg(long, conflicts_with = "diff", default_value_t = 1)]
    n: u32,

    /// Degrees of freedom.
    #[arg(long, conflicts_with = "product", required_if_eq("diff", "true"))]
    r: Option<f64>,
    #[arg(long, conflicts_with = "product", default_value_t = 0.0)]
    lambda1: f64,
    #[arg(long, conflicts_with = "product", default_value_t = 0.0)]
    lambda2: f64,
}

enum Law {
    Product(ProductNormalParams),
    Diff(ChiSqDiffParams),
}

impl LawArgs {
    fn law(&self) -> Result<Law, Error> {
        if self.product {
            Ok(Law::Product(ProductNormalParams::new(
                self.mu_x,
                self.mu_y,
                self.sigma_x,
                self.sigma_y,
                self.rho,
                self.n,
            )?))
        } else {
            let r = self.r.expect("clap requires --r with --diff");
            Ok(Law::Diff(ChiSqDiffParams::new(r, self.lambda1, self.lambda2)?))
        }
    }
}

#[derive(Args)]
struct CtrlArgs {
    /// Absolute and relative series tolerance.
    #[arg(long, env = TOL_ENV)]
    tol: Option<f64>,
    #[arg(long)]
    abs_tol: Option<f64>,
    #[arg(long)]
    rel_tol: Option<f64>,
    #[arg(long)]
    max_terms: Option<usize>,
}

impl CtrlArgs {
    fn control(&self) -> Result<SeriesControl, Error> {
        let mut c = SeriesControl::default();
        if let Some(t) = self.tol {
            c = c.with_tolerance(t);
        }
        if let Some(t) = self.abs_tol {
            c.abs_tol = t;
        }
        if let Some(t) = self.rel_tol {
            c.rel_tol = t;
        }
        if let Some(m) = self.max_terms {
            c.max_terms = m;
        }
        c.validate()?;
        Ok(c)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
    /// Human-readable grid (`table1` only).
    Text,
}

#[derive(Args)]
struct OutArgs {
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Output path (default: stdout).
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum RouteArg {
    Definitional,
    Representation,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    MonteCarlo,
    Quadrature,
}

enum Failure {
    Usage(String),
    Lib(Error),
    Io(io::Error),
    Selftest(usize),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Selftest(_) => 1,
            Failure::Lib(e) if e.is_numerical() => 3,
            _ => 2,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            Failure::Usage(_) => "usage",
            Failure::Lib(e) => e.kind(),
            Failure::Io(_) => "io",
            Failure::Selftest(_) => "selftest_failed",
        }
    }

    fn reason(&self) -> String {
        match self {
            Failure::Usage(m) => m.clone(),
            Failure::Lib(e) => e.to_string(),
            Failure::Io(e) => e.to_string(),
            Failure::Selftest(n) => format!("{n} criteria failed"),
        }
    }
}

fn one_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Inclusive, evenly spaced points.
#[derive(Clone)]
struct Grid(Vec<f64>);

fn parse_grid(s: &str) -> Result<Grid, String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("expected lo:hi:steps, got {s:?}"));
    }
    let lo: f64 = parts[0].parse().map_err(|e| format!("bad lo {:?}: {e}", parts[0]))?;
    let hi: f64 = parts[1].parse().map_err(|e| format!("bad hi {:?}: {e}", parts[1]))?;
    let steps: usize = parts[2].parse().map_err(|e| format!("bad steps {:?}: {e}", parts[2]))?;
    if !(lo.is_finite() && hi.is_finite()) || steps == 0 || (steps == 1 && lo != hi) || hi < lo {
        return Err(format!("grid {s:?} needs finite lo <= hi and steps >= 1 (steps = 1 only when lo = hi)"));
    }
    if steps == 1 {
        return Ok(Grid(vec![lo]));
    }
    let h = (hi - lo) / (steps - 1) as f64;
    Ok(Grid(
        (0..steps)
            .map(|i| if i == steps - 1 { hi } else { lo + h * i as f64 })
            .collect(),
    ))
}

fn open_output(path: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn format_for(out: &OutArgs, default: Format, allowed: &[Format]) -> Result<Format, Failure> {
    let f = out.format.unwrap_or(default);
    if allowed.contains(&f) {
        Ok(f)
    } else {
        Err(Failure::Usage("this command does not support --format text".into()))
    }
}

fn write_json(w: &mut dyn Write, v: &impl serde::Serialize) -> io::Result<()> {
    serde_json::to_writer_pretty(&mut *w, v)?;
    writeln!(w)
}

const DATA: [Format; 2] = [Format::Csv, Format::Json];

fn run(cli: Cli) -> Result<(), Failure> {
    if let Some(j) = cli.jobs {
        if j == 0 {
            return Err(Failure::Usage("--jobs must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build_global()
            .map_err(|e| Failure::Usage(format!("thread pool: {e}")))?;
    }
    match cli.command {
        Command::Pdf { law, grid, ctrl, out } => {
            let format = format_for(&out, Format::Csv, &DATA)?;
            let law = law.law()?;
            let ctrl = ctrl.control()?;
            let mut points = Vec::with_capacity(grid.0.len());
            for &x in &grid.0 {
                let v = match &law {
                    Law::Diff(q) => ncx2diff_pdf(x, q, &ctrl),
                    Law::Product(p) => sum_pdf(x, p, &ctrl),
                };
                match v {
                    Ok(v) => points.push((x, Some(v))),
                    Err(Error::Singular { x }) => {
                        eprintln!("ncx2diff: warning kind=singular: density is unbounded at x = {x}");
                        points.push((x, None));
                    }
                    Err(e) => return Err(e.into()),
                }
            }
            let mut w = open_output(out.output.as_deref())?;
            match format {
                Format::Json => {
                    let rows: Vec<_> = points
                        .iter()
                        .map(|(x, p)| json!({"x": x, "pdf": p, "singular": p.is_none()}))
                        .collect();
                    write_json(&mut w, &rows)?;
                }
                _ => write_density_csv(&mut w, &points)?,
            }
            w.flush()?;
        }
        Command::Cf { law, grid, out } => {
            let format = format_for(&out, Format::Csv, &DATA)?;
            let law = law.law()?;
            let values: Vec<(f64, f64, f64)> = grid
                .0
                .iter()
                .map(|&t| {
                    let c = match &law {
                        Law::Diff(q) => char_fn_diff(t, q),
                        Law::Product(p) => char_fn_sum(t, p),
                    };
                    (t, c.re, c.im)
                })
                .collect();
            let mut w = open_output(out.output.as_deref())?;
            match format {
                Format::Json => {
                    let rows: Vec<_> = values.iter().map(|(t, re, im)| json!({"t": t, "re": re, "im": im})).collect();
                    write_json(&mut w, &rows)?;
                }
                _ => {
                    let rows: Vec<Vec<f64>> = values.iter().map(|(t, re, im)| vec![*t, *re, *im]).collect();
                    write_numeric_csv(&mut w, &["t", "re", "im"], &rows)?;
                }
            }
            w.flush()?;
        }
        Command::Moments { law, order, out } => {
            let format = format_for(&out, Format::Json, &DATA)?;
            let set = match law.law()? {
                Law::Diff(q) => diff_moment_set(order, &q)?,
                Law::Product(p) => sum_moment_set(order, &p)?,
            };
            let mut w = open_output(out.output.as_deref())?;
            match format {
                Format::Json => write_json(&mut w, &set)?,
                _ => {
                    let rows: Vec<Vec<f64>> = (0..set.raw.len())
                        .map(|i| {
                            let central = if i == 0 { 0.0 } else { set.central[i - 1] };
                            vec![(i + 1) as f64, set.raw[i], central, set.cumulants[i]]
                        })
                        .collect();
                    write_numeric_csv(&mut w, &["order", "raw", "central", "cumulant"], &rows)?;
                }
            }
            w.flush()?;
        }
        Command::Cumulants { law, order, out } => {
            let format = format_for(&out, Format::Json, &DATA)?;
            let set = match law.law()? {
                Law::Diff(q) => diff_moment_set(order, &q)?,
                Law::Product(p) => sum_moment_set(order, &p)?,
            };
            let mut w = open_output(out.output.as_deref())?;
            match format {
                Format::Json => write_json(&mut w, &json!({"cumulants": set.cumulants}))?,
                _ => {
                    let rows: Vec<Vec<f64>> = set
                        .cumulants
                        .iter()
                        .enumerate()
                        .map(|(i, k)| vec![(i + 1) as f64, *k])
                        .collect();
                    write_numeric_csv(&mut w, &["order", "cumulant"], &rows)?;
                }
            }
            w.flush()?;
        }
        Command::ProbNeg { law, ctrl, out } => {
            let format = format_for(&out, Format::Json, &DATA)?;
            let ctrl = ctrl.control()?;
            let res = match law.law()? {
                Law::Diff(q) => prob_nonpositive_diff(&q, &ctrl)?,
                Law::Product(p) => prob_nonpositive_sum(&p, &ctrl)?,
            };
            let mut w = open_output(out.output.as_deref())?;
            match format {
                Format::Json => write_json(&mut w, &res)?,
                _ => {
                    writeln!(w, "probability,terms_used,tail_bound")?;
                    writeln!(w, "{},{},{}", fmt_sig17(res.probability), res.terms_used, fmt_sig17(res.tail_bound))?;
                }
            }
            w.flush()?;
        }
        Command::Sample {
            law,
            count,
            seed,
            route,
            out,
        } => {
            let format = format_for(&out, Format::Csv, &DATA)?;
            let route = match route {
                RouteArg::Definitional => Route::Definitional,
                RouteArg::Representation => Route::Representation,
            };
            let params = match law.law()? {
                Law::Diff(q) => SampleParams::Diff(q),
                Law::Product(p) => SampleParams::Product(p),
            };
            let sampler = Sampler::new(route, params)?;
            let batch = SampleBatch {
                values: sampler.sample(count, seed),
                seed,
                route,
                params,
            };
            let mut w = open_output(out.output.as_deref())?;
            match format {
                Format::Json => write_json(&mut w, &batch)?,
                _ => {
                    w.write_all(batch.to_csv().as_bytes())?;
                    if let Some(path) = &out.output {
                        let mut meta = path.clone().into_os_string();
                        meta.push(".json");
                        let mut m = BufWriter::new(File::create(PathBuf::from(meta))?);
                        write_json(&mut m, &batch.sidecar())?;
                        m.flush()?;
                    }
                }
            }
            w.flush()?;
        }
        Command::Table1 { ctrl, out } => {
            let format = format_for(&out, Format::Text, &[Format::Csv, Format::Json, Format::Text])?;
            let report = table1(&ctrl.control()?)?;
            let mut w = open_output(out.output.as_deref())?;
            match format {
                Format::Csv => w.write_all(report.to_csv().as_bytes())?,
                Format::Json => write_json(&mut w, &json!({"entries": report.entries, "summary": report.summary()}))?,
                Format::Text => w.write_all(report.render_grid().as_bytes())?,
            }
            w.flush()?;
        }
        Command::SteinCheck {
            law,
            method,
            count,
            seed,
            ctrl,
            out,
        } => {
            let format = format_for(&out, Format::Json, &DATA)?;
            let q = match law.law()? {
                Law::Diff(q) => q,
                Law::Product(_) => {
                    return Err(Failure::Usage("stein-check works on the difference law; use --diff".into()));
                }
            };
            let method = match method {
                MethodArg::Quadrature => Method::Quadrature { ctrl: ctrl.control()? },
                MethodArg::MonteCarlo => {
                    let seed = seed.ok_or_else(|| Failure::Usage("--seed is required for --method monte-carlo".into()))?;
                    Method::MonteCarlo { count, seed }
                }
            };
            let rows = null_check(&q, method)?;
            let mut w = open_output(out.output.as_deref())?;
            match format {
                Format::Json => write_json(&mut w, &rows)?,
                _ => {
                    writeln!(w, "operator,test_function,r,lambda1,lambda2,method,estimate,uncertainty,pass")?;
                    for r in &rows {
                        writeln!(
                            w,
                            "{},{},{},{},{},{},{},{},{}",
                            r.operator.name(),
                            r.test_function,
                            fmt_sig17(r.params.r()),
                            fmt_sig17(r.params.lambda1()),
                            fmt_sig17(r.params.lambda2()),
                            r.method,
                            fmt_sig17(r.estimate),
                            fmt_sig17(r.uncertainty),
                            r.pass
                        )?;
                    }
                }
            }
            w.flush()?;
        }
        Command::Selftest {
            seed,
            quick,
            criterion,
            output,
        } => {
            let cfg = SelftestConfig::new(seed, if quick { Mode::Quick } else { Mode::Full });
            let ids: Vec<u8> = if criterion.is_empty() {
                CRITERIA.iter().map(|(i, _)| *i).collect()
            } else {
                let mut c = criterion.clone();
                c.sort_unstable();
                c.dedup();
                c
            };
            let mut criteria = Vec::with_capacity(ids.len());
            for id in ids {
                let start = std::time::Instant::now();
                let c = selftest::run_criterion(id, &cfg);
                eprintln!("{} [{:.1} s]", c.status_line(), start.elapsed().as_secs_f64());
                criteria.push(c);
            }
            let passed = criteria.iter().filter(|c| c.pass).count();
            let report = SelftestReport {
                seed,
                mode: cfg.mode,
                failed: criteria.len() - passed,
                passed,
                criteria,
            };
            let mut w = open_output(output.as_deref())?;
            w.write_all(report.to_json().as_bytes())?;
            writeln!(w)?;
            w.flush()?;
            if !report.all_pass() {
                return Err(Failure::Selftest(report.failed));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let parsed = Cli::command()
        .mut_subcommands(|c| c.allow_negative_numbers(true))
        .try_get_matches()
        .and_then(|m| Cli::from_arg_matches(&m));
    let cli = match parsed {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let text = e.to_string();
            let reason = text
                .split("Usage:")
                .next()
                .unwrap_or("invalid arguments")
                .split("For more information")
                .next()
                .unwrap_or("invalid arguments");
            eprintln!("ncx2diff: error kind=usage: {}", one_line(reason.trim_start_matches("error: ")));
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("ncx2diff: error kind={}: {}", f.kind(), one_line(&f.reason()));
            ExitCode::from(f.code())
        }
    }
}
