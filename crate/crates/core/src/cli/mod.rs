//! Subcommand handlers behind the `lambda-decouple` binary.
//!
//! Handlers return a [`Report`] (exit status, console text, files to write)
//! so they can be exercised without touching the filesystem.

pub mod config;

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use num_complex::Complex64;

use crate::algebra::{
    decomposition_residual, h1, h2, sigma_op, symmetrize_with, verify_group_closure, Axis, BbElement,
    DecouplingGroup, LevelPair, Operator3, SystemLevels,
};
use crate::dephasing::{
    decoherence_grid, locate_quiet_crossover, quiet_threshold, Channel, GridOptions, Regime, Slicing,
};
use crate::error::{Error, Result};
use crate::format::sig;
use crate::oracle::{
    analytic_magnitudes, compare_analytic, run_oracle, uniform_superposition, OracleConfig, TruncatedMode,
    TruncationPolicy, CONVENTION,
};
use crate::schedule::build_schedule;
pub use config::RunConfig;

pub const THREADS_ENV: &str = "LAMBDA_DECOUPLE_THREADS";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExitStatus {
    Success = 0,
    Failure = 1,
    Usage = 2,
    Numerical = 3,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }

    fn for_error(e: &Error) -> Self {
        match e {
            Error::Config(_) | Error::InvalidInput(_) => ExitStatus::Usage,
            Error::TruncationTooSmall { .. } => ExitStatus::Failure,
            Error::Quadrature { .. } | Error::Numerical(_) | Error::Io(_) => ExitStatus::Numerical,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub status: ExitStatus,
    pub text: String,
    /// Main output (written to `--out`, or printed when no path is given).
    pub output: Option<String>,
    /// Extra files, named by suffix appended to the `--out` stem.
    pub extra: Vec<(String, String)>,
}

impl Report {
    fn new(status: ExitStatus, text: String) -> Self {
        Report { status, text, output: None, extra: Vec::new() }
    }

    fn from_error(e: &Error) -> Self {
        Report::new(ExitStatus::for_error(e), format!("error: {e}\n"))
    }
}

#[derive(Parser, Debug)]
#[command(name = "lambda-decouple", version, about = "Bang-bang dephasing suppression for a three-level lambda atom")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Flat key=value configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output file; stdout when omitted.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Configuration override, repeatable; later wins.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    pub set: Vec<String>,
    /// Worker threads for grid evaluation (0 = automatic).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Check the decoupling group identities and pulse factorizations.
    VerifyGroup,
    /// Tabulate exp(-Γ₂) over (ω_c·t, N).
    DephasingCurve,
    /// Locate the per-mode crossover of the pulsed and free kernels.
    QuietRegime,
    /// Compare the truncated-Fock oracle against the discrete analytic coherence.
    OracleCheck,
    /// Dump the pulse timeline.
    Schedule,
}

/// Resolves config file and `--set` overrides.
pub fn resolve_config(config: Option<&Path>, overrides: &[String]) -> Result<RunConfig> {
    let mut cfg = match config {
        Some(p) => RunConfig::from_file(p)?,
        None => RunConfig::default(),
    };
    for pair in overrides {
        cfg.set_pair(pair)?;
    }
    Ok(cfg)
}

pub fn resolve_threads(flag: Option<usize>) -> Result<usize> {
    if let Some(k) = flag {
        return Ok(k);
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) if !v.trim().is_empty() => v
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("{THREADS_ENV} must be an integer, got {v:?}"))),
        _ => Ok(0),
    }
}

pub fn dispatch(command: Command, cfg: &RunConfig, threads: usize) -> Report {
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(p) => p,
        Err(e) => return Report::new(ExitStatus::Usage, format!("error: cannot start {threads} threads: {e}\n")),
    };
    pool.install(|| match command {
        Command::VerifyGroup => cmd_verify_group(cfg),
        Command::DephasingCurve => cmd_dephasing_curve(cfg),
        Command::QuietRegime => cmd_quiet_regime(cfg),
        Command::OracleCheck => cmd_oracle_check(cfg),
        Command::Schedule => cmd_schedule(cfg),
    })
}

/// Full CLI entry point; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitStatus::Usage.code() } else { 0 };
        }
    };
    let setup = resolve_config(cli.config.as_deref(), &cli.set)
        .and_then(|cfg| resolve_threads(cli.threads).map(|t| (cfg, t)));
    let (cfg, threads) = match setup {
        Ok(v) => v,
        Err(e) => {
            eprint!("{}", Report::from_error(&e).text);
            return ExitStatus::Usage.code();
        }
    };
    let report = dispatch(cli.command, &cfg, threads);
    match write_outputs(&report, cli.out.as_deref()) {
        Ok(()) => report.status.code(),
        Err(e) => {
            eprintln!("error: {e}");
            ExitStatus::Numerical.code()
        }
    }
}

fn write_outputs(report: &Report, out: Option<&Path>) -> std::io::Result<()> {
    if report.status == ExitStatus::Success {
        print!("{}", report.text);
    } else {
        eprint!("{}", report.text);
    }
    match (out, &report.output) {
        (Some(path), Some(body)) => {
            std::fs::write(path, body)?;
            for (suffix, body) in &report.extra {
                std::fs::write(sibling(path, suffix), body)?;
            }
        }
        (None, Some(body)) => print!("{body}"),
        _ => {}
    }
    Ok(())
}

/// `curve.csv` + `fixed_dt` → `curve.fixed_dt.csv`
pub fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    let ext = path.extension().and_then(|s| s.to_str()).unwrap_or("csv");
    path.with_file_name(format!("{stem}.{suffix}.{ext}"))
}

const GROUP_NAMES: [&str; 3] = ["I", "h1", "h2"];
const RESIDUAL_LIMIT: f64 = 1e-10;

pub fn cmd_verify_group(cfg: &RunConfig) -> Report {
    let perturb = match cfg.f64("perturb_h1") {
        Ok(v) => v,
        Err(e) => return Report::from_error(&e),
    };
    let h1_used = h1() + Complex64::new(perturb, 0.0) * Operator3::ket_bra(0, 0);
    let elements = [Operator3::identity(), h1_used, h2()];

    let residuals = [
        ("symmetrize sigma_z(2,0)", symmetrize_with(&sigma_op(Axis::Z, LevelPair::P20), &elements).max_norm()),
        ("symmetrize sigma_z(2,1)", symmetrize_with(&sigma_op(Axis::Z, LevelPair::P21), &elements).max_norm()),
        ("h1 pulse product", (pulse_product(BbElement::H1) - h1_used).max_norm()),
        ("h2 pulse product", decomposition_residual(BbElement::H2)),
        ("h1 unitarity", h1_used.unitarity_residual()),
        ("h2 unitarity", h2().unitarity_residual()),
    ];
    let mut text = String::new();
    for (name, r) in &residuals {
        text.push_str(&format!("{name:<26} residual {}\n", sig(*r, 6)));
    }
    let ok = residuals.iter().all(|(_, r)| *r < RESIDUAL_LIMIT);
    text.push_str("closure table:\n");
    match DecouplingGroup::new(elements.to_vec()) {
        Ok(g) => text.push_str(&verify_group_closure(&g).render(&GROUP_NAMES)),
        Err(e) => text.push_str(&format!("  unavailable: {e}\n")),
    }
    text.push_str(if ok { "verify-group: PASS\n" } else { "verify-group: FAIL\n" });
    Report::new(if ok { ExitStatus::Success } else { ExitStatus::Failure }, text)
}

fn pulse_product(e: BbElement) -> Operator3 {
    let [a, b] = e.pulse_factors();
    a * b
}

pub fn grid_options(cfg: &RunConfig) -> Result<GridOptions> {
    Ok(GridOptions {
        t_max_over_tc: cfg.f64("t_max")?,
        t_points: cfg.usize("t_points")?,
        n_list: cfg.usize_list("n_list")?,
    })
}

pub fn cmd_dephasing_curve(cfg: &RunConfig) -> Report {
    let setup = cfg.spectrum().and_then(|s| grid_options(cfg).map(|o| (s, o)));
    let (spectrum, options) = match setup {
        Ok(v) => v,
        Err(e) => return Report::from_error(&e),
    };
    let grid = match decoherence_grid(&spectrum, &options) {
        Ok(g) => g,
        Err(e) => return Report::from_error(&Error::Config(e.to_string())),
    };
    let echo = cfg.echo();
    let mut text = String::from("N      min exp(-G2)     max exp(-G2)\n");
    for (n, lo, hi) in grid.summary() {
        text.push_str(&format!("{n:<6} {:<16} {}\n", sig(lo, 10), sig(hi, 10)));
    }
    let failed = grid.failed_cells();
    let total = grid.fixed_time.len() + grid.fixed_interval.len();
    for c in grid.fixed_time.iter().chain(&grid.fixed_interval).filter(|c| c.failed()) {
        text.push_str(&format!("warning: cell omega_c_t={} N={} failed\n", sig(c.omega_c_t, 6), c.n_cycles));
    }
    for b in grid.controlled_breaks_in_n() {
        text.push_str(&format!(
            "note: exp(-G2) drops from {} to {} at omega_c_t={} N={}\n",
            sig(b.previous, 8),
            sig(b.current, 8),
            sig(b.omega_c_t, 6),
            b.n_cycles
        ));
    }
    let mut report = Report::new(
        if failed == total { ExitStatus::Numerical } else { ExitStatus::Success },
        text,
    );
    let with_echo = |label: &str, body: String| format!("{echo}# series={label}\n{body}");
    report.output = Some(with_echo("controlled,fixed_time", grid.to_csv(Slicing::FixedTime, Regime::Controlled)));
    report.extra = vec![
        (
            "fixed_dt".into(),
            with_echo("controlled,fixed_dt", grid.to_csv(Slicing::FixedInterval, Regime::Controlled)),
        ),
        (
            "uncontrolled".into(),
            with_echo("uncontrolled,fixed_time", grid.to_csv(Slicing::FixedTime, Regime::Uncontrolled)),
        ),
        ("free".into(), with_echo("free_exact,fixed_time", grid.to_csv(Slicing::FixedTime, Regime::FreeExact))),
    ];
    report
}

const QUIET_TOL: f64 = 1e-6;

pub fn cmd_quiet_regime(cfg: &RunConfig) -> Report {
    let points = match cfg.usize("sweep_points") {
        Ok(p) => p,
        Err(e) => return Report::from_error(&e),
    };
    let target = quiet_threshold();
    let mut text = String::new();
    let mut csv = String::from("channel,omega_dt,kernel_ratio\n");
    let mut ok = true;
    for ch in Channel::BOTH {
        let sweep = locate_quiet_crossover(ch, points);
        for (x, r) in &sweep.samples {
            csv.push_str(&format!("{},{},{}\n", ch.label(), sig(*x, 12), sig(*r, 12)));
        }
        match sweep.crossover {
            Some(x) => {
                let pass = (x - target).abs() < QUIET_TOL;
                ok &= pass;
                text.push_str(&format!(
                    "{}: measured threshold {} vs arccos(3/4) = {} (diff {}) {}\n",
                    ch.label(),
                    sig(x, 12),
                    sig(target, 12),
                    sig(x - target, 3),
                    if pass { "PASS" } else { "FAIL" }
                ));
            }
            None => {
                ok = false;
                text.push_str(&format!("{}: no crossover found on (0, pi]\n", ch.label()));
            }
        }
    }
    let mut report = Report::new(if ok { ExitStatus::Success } else { ExitStatus::Failure }, text);
    report.output = Some(format!("{}{csv}", cfg.echo()));
    report
}

/// One oracle-vs-analytic comparison in the validation suite.
#[derive(Clone, Debug, PartialEq)]
pub struct OracleCase {
    pub name: String,
    pub mode: TruncatedMode,
    pub temperature: f64,
    pub n_cycles: usize,
    pub pulses: bool,
}

pub fn oracle_suite(cfg: &RunConfig) -> Result<Vec<OracleCase>> {
    let omega = cfg.f64("mode_omega")?;
    let g = cfg.f64("mode_g")?;
    let cutoff = cfg.usize("mode_cutoff")?;
    let temperatures = if cfg.is_set("oracle_temperature") {
        vec![cfg.f64("oracle_temperature")?]
    } else {
        vec![0.0, omega / 5.0]
    };
    let n_list = cfg.usize_list("oracle_n_list")?;
    let mut cases = Vec::new();
    for ch in cfg.channels()? {
        let mode = TruncatedMode::new(omega, g, ch, cutoff)?;
        for &t in &temperatures {
            for &n in &n_list {
                for pulses in [true, false] {
                    cases.push(OracleCase {
                        name: format!("{}_T{}_N{}_{}", ch.label(), sig(t, 4), n, if pulses { "pulsed" } else { "free" }),
                        mode,
                        temperature: t,
                        n_cycles: n,
                        pulses,
                    });
                }
            }
        }
        let uncoupled = TruncatedMode::new(omega, 0.0, ch, cutoff)?;
        cases.push(OracleCase {
            name: format!("{}_uncoupled", ch.label()),
            mode: uncoupled,
            temperature: temperatures[temperatures.len() - 1],
            n_cycles: n_list.iter().copied().max().unwrap_or(1),
            pulses: true,
        });
    }
    Ok(cases)
}

#[derive(Clone, Debug, PartialEq)]
pub struct CaseOutcome {
    pub case: OracleCase,
    pub max_deviation: f64,
    pub pass: bool,
    pub population_drift: f64,
    pub trace_drift: f64,
    pub diagnostic: Option<String>,
}

pub fn run_case(levels: &SystemLevels, delta_t: f64, case: &OracleCase) -> Result<(CaseOutcome, String)> {
    let schedule = build_schedule(delta_t, case.n_cycles, 0.0)?;
    let config = OracleConfig { temperature: case.temperature, pulses: case.pulses, truncation: TruncationPolicy::Warn };
    let result = run_oracle(levels, &[case.mode], &schedule, &uniform_superposition(), &config)?;
    let regime = if case.pulses { Regime::Controlled } else { Regime::FreeExact };
    let analytic = analytic_magnitudes(&[case.mode], case.temperature, delta_t, case.n_cycles, regime)?;
    let cmp = compare_analytic(&result, &analytic);
    let outcome = CaseOutcome {
        case: case.clone(),
        max_deviation: cmp.max_deviation,
        pass: cmp.pass,
        population_drift: result.max_population_drift,
        trace_drift: result.max_trace_drift,
        diagnostic: cmp.truncation_warning,
    };
    Ok((outcome, result.to_csv()))
}

pub fn cmd_oracle_check(cfg: &RunConfig) -> Report {
    let setup = (|| -> Result<_> {
        let levels = SystemLevels::new(cfg.f64("e0")?, cfg.f64("e1")?, cfg.f64("e2")?)?;
        let delta_t = cfg.f64("oracle_delta_t")?;
        Ok((levels, delta_t, oracle_suite(cfg)?))
    })();
    let (levels, delta_t, cases) = match setup {
        Ok(v) => v,
        Err(e) => return Report::from_error(&e),
    };

    let outcomes: Vec<Result<(CaseOutcome, String)>> = {
        use rayon::prelude::*;
        cases.par_iter().map(|c| run_case(&levels, delta_t, c)).collect()
    };
    let mut csv = format!("{}# convention: {CONVENTION}\n", cfg.echo());
    csv.push_str("case,channel,temperature,n_cycles,pulses,max_deviation,population_drift,trace_drift,pass\n");
    let mut text = String::new();
    let mut all_pass = true;
    let mut worst = (0.0f64, String::new());
    let mut trace_dump = None;
    for outcome in outcomes {
        let (o, trace) = match outcome {
            Ok(v) => v,
            Err(e) => return Report::from_error(&e),
        };
        if trace_dump.is_none() {
            trace_dump = Some(trace);
        }
        all_pass &= o.pass;
        if o.max_deviation >= worst.0 {
            worst = (o.max_deviation, o.case.name.clone());
        }
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            o.case.name,
            o.case.mode.channel.label(),
            sig(o.case.temperature, 12),
            o.case.n_cycles,
            o.case.pulses,
            sig(o.max_deviation, 6),
            sig(o.population_drift, 6),
            sig(o.trace_drift, 6),
            if o.pass { "PASS" } else { "FAIL" }
        ));
        text.push_str(&format!(
            "{:<28} deviation {:<12} {}\n",
            o.case.name,
            sig(o.max_deviation, 4),
            if o.pass { "PASS" } else { "FAIL" }
        ));
        if let Some(d) = &o.diagnostic {
            text.push_str(&format!("  truncation: {d}\n"));
        }
    }
    text.push_str(&format!("worst deviation {} ({})\n", sig(worst.0, 6), worst.1));
    let mut report = Report::new(if all_pass { ExitStatus::Success } else { ExitStatus::Failure }, text);
    report.output = Some(csv);
    if cfg.is_set("trace_out") {
        if let Some(trace) = trace_dump {
            let path = PathBuf::from(cfg.raw("trace_out"));
            if let Err(e) = std::fs::write(&path, format!("{}{trace}", cfg.echo())) {
                return Report::from_error(&Error::Io(e));
            }
        }
    }
    report
}

pub fn cmd_schedule(cfg: &RunConfig) -> Report {
    let built = (|| -> Result<_> {
        let dt = cfg.delta_t()?;
        build_schedule(dt, cfg.usize("n_cycles")?, cfg.f64("tau_p")?).map_err(|e| Error::Config(e.to_string()))
    })();
    match built {
        Ok(s) => {
            let mut r = Report::new(ExitStatus::Success, format!("{} events over t = {}\n", s.events.len(), sig(s.duration(), 12)));
            r.output = Some(format!("{}{}", cfg.echo(), s.dump()));
            r
        }
        Err(e) => Report::from_error(&e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schedule::{validate_schedule, CycleSchedule};

    fn cfg(pairs: &[&str]) -> RunConfig {
        resolve_config(None, &pairs.iter().map(|s| s.to_string()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn verify_group_default_passes() {
        let r = cmd_verify_group(&RunConfig::default());
        assert_eq!(r.status, ExitStatus::Success, "{}", r.text);
        assert!(r.text.contains("h1 * h1 = h2"));
        assert_eq!(r.text.lines().filter(|l| l.contains(" * ")).count(), 9);
    }

    #[test]
    fn verify_group_detects_fault() {
        let r = cmd_verify_group(&cfg(&["perturb_h1=1e-3"]));
        assert_eq!(r.status, ExitStatus::Failure);
        let line = r.text.lines().find(|l| l.starts_with("symmetrize sigma_z(2,0)")).unwrap();
        let value: f64 = line.rsplit(' ').next().unwrap().parse().unwrap();
        assert!(value > 1e-4 && value < 1e-2, "{value}");
    }

    #[test]
    fn schedule_dump_round_trip() {
        let r = cmd_schedule(&cfg(&["delta_t=1", "n_cycles=1", "tau_p=0"]));
        assert_eq!(r.status, ExitStatus::Success);
        let out = r.output.unwrap();
        let body: Vec<&str> = out.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(body, vec!["0\t1\th1\t0", "1\t2\th1_dag\t0", "2\t2\th2\t0", "3\t3\th2_dag\t0"]);
        let parsed = CycleSchedule::parse_dump(&out).unwrap();
        assert_eq!(validate_schedule(&parsed), Ok(()));

        let r = cmd_schedule(&cfg(&["delta_t=1", "n_cycles=0"]));
        let out = r.output.unwrap();
        assert_eq!(out.lines().filter(|l| !l.starts_with('#')).count(), 0);
        assert!(out.contains("# delta_t=1 n_cycles=0 tau_p=0\n"));

        let r = cmd_schedule(&cfg(&["delta_t=-1"]));
        assert_eq!(r.status, ExitStatus::Usage);
    }

    #[test]
    fn quiet_regime_report() {
        let r = cmd_quiet_regime(&RunConfig::default());
        assert_eq!(r.status, ExitStatus::Success, "{}", r.text);
        assert!(r.text.contains("k1:") && r.text.contains("k2:"));
        let out = r.output.unwrap();
        assert_eq!(out.lines().filter(|l| l.starts_with("k1,")).count(), 100);
    }

    #[test]
    fn sibling_names() {
        assert_eq!(sibling(Path::new("/tmp/curve.csv"), "fixed_dt"), PathBuf::from("/tmp/curve.fixed_dt.csv"));
    }
}
