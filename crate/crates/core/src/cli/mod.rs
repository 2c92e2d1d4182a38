//! Command-line front end: scenario files in, CSV tables out.
//!
//! Exit codes: 0 success, 1 usage error, 2 validation error, 3 numeric failure.

pub mod scenario_file;

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::asymptotics::approx;
use crate::dependence::eta;
use crate::error::Error;
use crate::grid::GeometricGrid;
use crate::montecarlo::diagnostics::{check_conditions, tail_curve};
use crate::montecarlo::{default_workers, estimate, sample_lc_parallel, McConfig, Method};
use crate::riskmeasures::{empirical_tail, es_asymptotic, var_asymptotic};

pub use scenario_file::{load, LoadedScenario, ScenarioFile};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

pub const COMPARE_HEADER: [&str; 10] = ["t", "estimate", "stderr", "ci_lo", "ci_hi", "approx", "ratio", "ratio_ci_lo", "ratio_ci_hi", "caveats"];

#[derive(Debug, Parser)]
#[command(name = "ostail", version, about = "Tail asymptotics and simulation for randomly weighted sums of order statistics")]
struct Cli {
    /// Suppress notes on standard error.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// First-order approximation of P(L(C) > t).
    Approx {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        thresholds: Thresholds,
        #[command(flatten)]
        output: Output,
    },
    /// Monte Carlo estimate of P(L(C) > t).
    Simulate {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        thresholds: Thresholds,
        #[command(flatten)]
        mc: McArgs,
        #[command(flatten)]
        output: Output,
    },
    /// Simulated tail curve against the approximation on a t-grid.
    Compare {
        #[command(flatten)]
        input: Input,
        /// Grid `from:to:points`; defaults to the scenario's diagnostics grid.
        #[arg(long = "t-grid")]
        t_grid: Option<GeometricGrid>,
        #[command(flatten)]
        mc: McArgs,
        #[command(flatten)]
        output: Output,
    },
    /// Asymptotic-independence ratios on the diagnostics grid.
    CheckConditions {
        #[command(flatten)]
        input: Input,
        #[arg(long = "t-grid")]
        t_grid: Option<GeometricGrid>,
        #[command(flatten)]
        output: Output,
    },
    /// Asymptotic VaR and ES; empirical values too when --samples is given.
    Risk {
        #[command(flatten)]
        input: Input,
        /// Comma-separated levels.
        #[arg(long, value_delimiter = ',', required = true)]
        p: Vec<f64>,
        /// Crude samples of L(C) for the empirical columns.
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        workers: Option<usize>,
        #[command(flatten)]
        output: Output,
    },
    /// The Gaussian tail constant eta(rho).
    Eta {
        #[arg(long, allow_hyphen_values = true)]
        rho: f64,
    },
    /// Checks a scenario file.
    ValidateScenario {
        #[command(flatten)]
        input: Input,
    },
}

#[derive(Debug, Args)]
struct Input {
    #[arg(long)]
    scenario: PathBuf,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
struct Thresholds {
    #[arg(long)]
    t: Option<f64>,
    #[arg(long = "t-grid")]
    t_grid: Option<GeometricGrid>,
}

impl Thresholds {
    fn values(&self) -> Vec<f64> {
        match (self.t, &self.t_grid) {
            (Some(t), _) => vec![t],
            (None, Some(g)) => g.values(),
            (None, None) => unreachable!("clap requires one of --t, --t-grid"),
        }
    }
}

#[derive(Debug, Args)]
struct McArgs {
    #[arg(long, default_value = "crude")]
    method: Method,
    /// Replicates; defaults to 1e6 for crude and 1e5 otherwise.
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads; defaults to the machine's parallelism.
    #[arg(long)]
    workers: Option<usize>,
}

impl McArgs {
    fn config(&self) -> McConfig {
        let default = if self.method == Method::Crude { 1_000_000 } else { 100_000 };
        McConfig::new(self.samples.unwrap_or(default), self.seed).with_workers(self.workers.unwrap_or_else(default_workers))
    }
}

#[derive(Debug, Args)]
struct Output {
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Report natural logarithms in the estimate and approximation columns.
    #[arg(long = "log-space")]
    log_space: bool,
}

/// Probabilities and thresholds: scientific notation, 10 significant digits.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.9e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_num).unwrap_or_default()
}

fn fmt_prob(x: f64, log_space: bool) -> String {
    fmt_num(if log_space { x.ln() } else { x })
}

enum Failure {
    Model(Error),
    Io(io::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Model(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Io(e.into())
    }
}

type Run = std::result::Result<(), Failure>;

struct Ctx<'a> {
    stdout: &'a mut dyn Write,
    stderr: &'a mut dyn Write,
    quiet: bool,
}

impl Ctx<'_> {
    fn note(&mut self, msg: &str) {
        if !self.quiet {
            let _ = writeln!(self.stderr, "note: {msg}");
        }
    }

    fn table(&mut self, out: &Output, header: &[&str], rows: &[Vec<String>]) -> Run {
        let sink: Box<dyn Write + '_> = match &out.out {
            Some(path) => Box::new(File::create(path)?),
            None => Box::new(&mut *self.stdout),
        };
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(sink);
        w.write_record(header)?;
        for r in rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Runs the command line `args` (program name first) and returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { stderr.write_all(text.as_bytes()) } else { stdout.write_all(text.as_bytes()) };
            return code;
        }
    };
    let mut ctx = Ctx { stdout, stderr, quiet: cli.quiet };
    match dispatch(cli.command, &mut ctx) {
        Ok(()) => EXIT_OK,
        Err(Failure::Model(e)) => {
            let _ = writeln!(ctx.stderr, "error: {e}");
            match e {
                Error::Numeric { .. } => EXIT_NUMERIC,
                _ => EXIT_VALIDATION,
            }
        }
        Err(Failure::Io(e)) => {
            let _ = writeln!(ctx.stderr, "error: {e}");
            EXIT_VALIDATION
        }
    }
}

fn dispatch(command: Command, ctx: &mut Ctx<'_>) -> Run {
    match command {
        Command::Approx { input, thresholds, output } => {
            let s = load(&input.scenario)?.scenario;
            let ts = thresholds.values();
            let mut rows = Vec::new();
            for &t in &ts {
                let r = match approx(&s, t) {
                    Ok(r) => r,
                    Err(e @ Error::Domain(_)) if ts.len() > 1 => {
                        rows.push(vec![fmt_num(t), String::new(), String::new(), fmt_num(s.lambda().lambda_tilde), e.to_string()]);
                        continue;
                    }
                    Err(e) => return Err(e.into()),
                };
                let value = if output.log_space { fmt_num(r.ln_value) } else { fmt_num(r.value) };
                rows.push(vec![fmt_num(t), value, r.formula.name().into(), fmt_num(r.inputs.lambda_tilde), r.caveats.join("; ")]);
            }
            ctx.table(&output, &["t", "approx", "formula", "lambda_tilde", "caveats"], &rows)
        }
        Command::Simulate { input, thresholds, mc, output } => {
            let s = load(&input.scenario)?.scenario;
            let cfg = mc.config();
            let mut rows = Vec::new();
            for t in thresholds.values() {
                let e = estimate(&s, t, mc.method, &cfg)?;
                rows.push(vec![
                    fmt_num(t),
                    fmt_prob(e.point, output.log_space),
                    fmt_num(e.stderr),
                    fmt_num(e.ci95.0),
                    fmt_num(e.ci95.1),
                    e.n_samples.to_string(),
                    e.method.name().into(),
                    e.seed.to_string(),
                    e.workers.to_string(),
                    fmt_opt(e.ess),
                ]);
            }
            ctx.table(&output, &["t", "estimate", "stderr", "ci_lo", "ci_hi", "n_samples", "method", "seed", "workers", "ess"], &rows)
        }
        Command::Compare { input, t_grid, mc, output } => {
            let loaded = load(&input.scenario)?;
            let grid = t_grid.unwrap_or(loaded.diagnostics.t_grid);
            let rows: Vec<Vec<String>> = tail_curve(&loaded.scenario, &grid.values(), mc.method, &mc.config())?
                .into_iter()
                .map(|r| {
                    let e = &r.estimate;
                    vec![
                        fmt_num(r.t),
                        fmt_prob(e.point, output.log_space),
                        fmt_num(e.stderr),
                        fmt_num(e.ci95.0),
                        fmt_num(e.ci95.1),
                        r.approx.as_ref().map(|a| if output.log_space { fmt_num(a.ln_value) } else { fmt_num(a.value) }).unwrap_or_default(),
                        fmt_opt(r.ratio),
                        fmt_opt(r.ratio_ci.map(|c| c.0)),
                        fmt_opt(r.ratio_ci.map(|c| c.1)),
                        r.caveats.join("; "),
                    ]
                })
                .collect();
            ctx.table(&output, &COMPARE_HEADER, &rows)
        }
        Command::CheckConditions { input, t_grid, output } => {
            let loaded = load(&input.scenario)?;
            let mut cfg = loaded.diagnostics;
            if let Some(g) = t_grid {
                cfg.t_grid = g;
            }
            let report = check_conditions(&loaded.scenario, &cfg)?;
            if report.vacuous {
                ctx.note("single risk: no pair conditions to check");
            }
            for (i, j) in &report.excluded_pairs {
                ctx.note(&format!("pair ({i}, {j}) excluded: a risk has a lighter tail than the reference (lambda = 0)"));
            }
            let mut rows = Vec::new();
            for r in &report.rows {
                for (t, ratio) in r.t.iter().zip(&r.ratios) {
                    rows.push(vec![
                        r.condition.name().into(),
                        r.i.to_string(),
                        r.j.to_string(),
                        fmt_opt(r.x),
                        fmt_opt(r.l),
                        fmt_num(*t),
                        fmt_num(*ratio),
                        r.verdict.to_string(),
                    ]);
                }
            }
            ctx.table(&output, &["condition", "i", "j", "x", "L", "t", "ratio", "verdict"], &rows)
        }
        Command::Risk { input, p, samples, seed, workers, output } => {
            let s = load(&input.scenario)?.scenario;
            let sample = samples.map(|n| sample_lc_parallel(&s, &McConfig::new(n, seed).with_workers(workers.unwrap_or_else(default_workers))));
            let mut rows = Vec::new();
            for &level in &p {
                let v = var_asymptotic(&s, level)?;
                let mut notes = v.warnings.clone();
                let es = match es_asymptotic(&s, level) {
                    Ok(e) => {
                        notes.push(e.tag.into());
                        Some(e.value)
                    }
                    Err(Error::Unsupported(_)) => None,
                    Err(e) => return Err(e.into()),
                };
                let emp = match &sample {
                    Some(xs) => match empirical_tail(xs, level) {
                        Ok(e) => Some(e),
                        Err(e @ Error::SampleSize { .. }) => {
                            notes.push(e.to_string());
                            None
                        }
                        Err(e) => return Err(e.into()),
                    },
                    None => None,
                };
                rows.push(vec![
                    level.to_string(),
                    fmt_num(v.value),
                    fmt_num(v.approx_root),
                    fmt_opt(v.c1x1_quantile),
                    fmt_opt(es),
                    fmt_opt(emp.map(|e| e.var)),
                    fmt_opt(emp.map(|e| e.es)),
                    fmt_opt(emp.map(|e| e.es / e.var)),
                    notes.join("; "),
                ]);
            }
            let header = ["p", "var_asymptotic", "approx_root", "c1x1_quantile", "es_asymptotic", "var_empirical", "es_empirical", "es_var_ratio", "notes"];
            ctx.table(&output, &header, &rows)
        }
        Command::Eta { rho } => {
            writeln!(ctx.stdout, "{:.9}", eta(rho)?)?;
            Ok(())
        }
        Command::ValidateScenario { input } => {
            let s = load(&input.scenario)?.scenario;
            writeln!(ctx.stdout, "ok: n={} k={} mda={} lambda_tilde={}", s.n(), s.k(), s.mda_class().name(), s.lambda().lambda_tilde)?;
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scenario_path(name: &str) -> String {
        format!("{}/scenarios/{name}", env!("CARGO_MANIFEST_DIR"))
    }

    fn call(args: &[&str]) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run(std::iter::once("ostail").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn eta_prints_nine_decimals() {
        let (code, out, _) = call(&["eta", "--rho", "0.5"]);
        assert_eq!(code, 0);
        assert_eq!(out.trim(), "0.866025404");
        assert_eq!(call(&["eta", "--rho", "-0.5"]).0, 0);
        assert_eq!(call(&["eta", "--rho", "1"]).0, EXIT_VALIDATION);
    }

    #[test]
    fn usage_errors() {
        assert_eq!(call(&["approx", "--bogus"]).0, EXIT_USAGE);
        assert_eq!(call(&["frobnicate"]).0, EXIT_USAGE);
        assert_eq!(call(&["simulate", "--scenario", "x.json", "--t", "1", "--t-grid", "1:2:2"]).0, EXIT_USAGE);
        assert_eq!(call(&["--help"]).0, EXIT_OK);
    }

    #[test]
    fn approx_row() {
        let (code, out, _) = call(&["approx", "--scenario", &scenario_path("frechet_pareto.json"), "--t", "100"]);
        assert_eq!(code, 0);
        let lines: Vec<&str> = out.lines().collect();
        assert_eq!(lines.len(), 2);
        assert!(lines[1].starts_with("1.000000000e2,1.000000000e-4,frechet-main,3.000000000e0,"), "{}", lines[1]);
        let (code, _, err) = call(&["approx", "--scenario", &scenario_path("frechet_pareto.json"), "--t", "2"]);
        assert_eq!(code, EXIT_VALIDATION);
        assert!(err.starts_with("error: domain error"));
    }

    #[test]
    fn validate_reports_the_same_message() {
        let dir = tempfile::tempdir().unwrap();
        let bad = dir.path().join("bad.json");
        std::fs::write(&bad, r#"{"n":2,"k":3,"marginals":[{"family":"pareto","params":{"alpha":2,"scale":1}}],"correlation":"independent","weights":[{"kind":"uniform","params":{}}]}"#).unwrap();
        let bad = bad.to_str().unwrap();
        let (c1, _, e1) = call(&["validate-scenario", "--scenario", bad]);
        let (c2, _, e2) = call(&["approx", "--scenario", bad, "--t", "100"]);
        assert_eq!((c1, c2), (EXIT_VALIDATION, EXIT_VALIDATION));
        assert_eq!(e1, e2);
        let (c, out, _) = call(&["validate-scenario", "--scenario", &scenario_path("lcr_lognormal.json")]);
        assert_eq!(c, 0);
        assert!(out.starts_with("ok: n=5 k=3 mda=gumbel"), "{out}");
    }

    #[test]
    fn compare_header_and_log_space() {
        let path = scenario_path("frechet_pareto.json");
        let args = ["compare", "--scenario", &path, "--t-grid", "1e2:1e3:2", "--method", "conditional", "--samples", "20000", "--seed", "42", "--workers", "2"];
        let (code, out, _) = call(&args);
        assert_eq!(code, 0);
        assert_eq!(out.lines().next().unwrap(), COMPARE_HEADER.join(","));
        assert_eq!(out.lines().count(), 3);
        let mut log_args = args.to_vec();
        log_args.push("--log-space");
        let (_, log_out, _) = call(&log_args);
        let plain: Vec<&str> = out.lines().nth(1).unwrap().split(',').collect();
        let logged: Vec<&str> = log_out.lines().nth(1).unwrap().split(',').collect();
        let p: f64 = plain[1].parse().unwrap();
        let lp: f64 = logged[1].parse().unwrap();
        assert!((p.ln() - lp).abs() < 1e-8);
        assert_eq!(plain[6], logged[6]);
    }

    #[test]
    fn seeded_runs_are_byte_identical() {
        let dir = tempfile::tempdir().unwrap();
        let path = scenario_path("lcr_lognormal.json");
        let files: Vec<Vec<u8>> = ["a.csv", "b.csv"]
            .iter()
            .map(|name| {
                let out = dir.path().join(name);
                let args = ["compare", "--scenario", &path, "--t-grid", "30:300:3", "--samples", "20000", "--seed", "9", "--workers", "3", "--out", out.to_str().unwrap()];
                assert_eq!(call(&args).0, 0);
                std::fs::read(out).unwrap()
            })
            .collect();
        assert_eq!(files[0], files[1]);
        assert!(!files[0].is_empty());
    }

    #[test]
    fn risk_columns() {
        let (code, out, _) = call(&["risk", "--scenario", &scenario_path("lcr_lognormal.json"), "--p", "0.99,0.999", "--samples", "20000", "--workers", "2", "--quiet"]);
        assert_eq!(code, 0, "{out}");
        let rows: Vec<Vec<&str>> = out.lines().skip(1).map(|l| l.split(',').collect()).collect();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0][1], rows[0][3]);
        assert_eq!(rows[0][1], rows[0][4]);
        assert!(!rows[0][5].is_empty() && !rows[1][5].is_empty());
    }
}
