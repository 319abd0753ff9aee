//! The `phasekit` command-line front end.

pub mod repro;
pub mod spec;
pub mod suites;
pub mod table;

use std::ffi::OsString;
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use crate::error::PhaseError;
use crate::modes::{Truncation, DEFAULT_TAIL_TOL};
use crate::phase_stats::{grid_oracle, PhaseProfile, DEFAULT_GRID_N, DEFAULT_QUAD_N};
use crate::relations::{check_relation_min_with, momentum_stats};
use spec::{parse_value_list, BuiltState, StateSpec};
use suites::{rows_to_table, run_suite, Suite, SuiteConfig};
use table::{Cell, OutputFormat, Table};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_RESOURCE: i32 = 3;

/// A failure with the process exit code it maps to.
#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Self {
            code: EXIT_INVALID,
            message: msg.into(),
        }
    }

    pub fn resource(msg: impl Into<String>) -> Self {
        Self {
            code: EXIT_RESOURCE,
            message: msg.into(),
        }
    }

    pub fn io(path: &Path, e: std::io::Error) -> Self {
        Self::resource(format!("{}: {e}", path.display()))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<PhaseError> for CliError {
    fn from(e: PhaseError) -> Self {
        Self {
            code: e.exit_code(),
            message: e.to_string(),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "phasekit",
    version,
    about = "Window-minimized phase uncertainty of periodic quantum states"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalOpts {
    /// Window origins sampled when bracketing extrema
    #[arg(long, global = true, default_value_t = DEFAULT_GRID_N)]
    pub grid_n: usize,
    /// Quadrature nodes for cross-checks and the brute-force oracle
    #[arg(long, global = true, default_value_t = DEFAULT_QUAD_N)]
    pub quad_n: usize,
    /// Discarded probability mass allowed when truncating infinite states
    #[arg(long, global = true, default_value_t = DEFAULT_TAIL_TOL)]
    pub tail_tol: f64,
    /// Allowed gap between the closed-form and oracle variances
    #[arg(long, global = true, default_value_t = 1e-6)]
    pub tol: f64,
    /// Seed for the random-state suites
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Csv)]
    pub format: OutputFormat,
    /// Output file (standard output when absent)
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Also run the brute-force grid minimization
    #[arg(long, global = true)]
    pub oracle: bool,
}

impl GlobalOpts {
    fn truncation(&self) -> Result<Truncation, CliError> {
        let t = Truncation::new(self.tail_tol);
        t.validate()
            .map_err(|e| CliError::invalid(format!("--tail-tol: {e}")))?;
        Ok(t)
    }

    fn validate(&self) -> Result<(), CliError> {
        if self.grid_n < 64 {
            return Err(CliError::invalid(format!(
                "--grid-n: must be at least 64, got {}",
                self.grid_n
            )));
        }
        if self.quad_n < 256 {
            return Err(CliError::invalid(format!(
                "--quad-n: must be at least 256, got {}",
                self.quad_n
            )));
        }
        if !(self.tol > 0.0) {
            return Err(CliError::invalid(format!("--tol: must be positive, got {}", self.tol)));
        }
        self.truncation().map(|_| ())
    }
}

#[derive(Debug, Clone, Args)]
pub struct StateArgs {
    /// JSON state specification
    #[arg(long, conflicts_with = "state")]
    pub spec: Option<PathBuf>,
    /// State type: number, wavepacket, two_mode, coherent_phase, coherent, two_peak
    #[arg(long)]
    pub state: Option<String>,
    /// State parameter as key=value (repeatable); values accept pi fractions
    #[arg(long = "param", value_name = "K=V")]
    pub params: Vec<String>,
}

impl StateArgs {
    pub fn spec(&self) -> Result<StateSpec, CliError> {
        match (&self.spec, &self.state) {
            (Some(p), None) => {
                if !self.params.is_empty() {
                    return Err(CliError::invalid("--param: only valid together with --state"));
                }
                StateSpec::from_file(p)
            }
            (None, Some(t)) => StateSpec::from_flags(t, &self.params),
            _ => Err(CliError::invalid("give a state with --spec FILE or --state TYPE")),
        }
    }

    /// The base state of a sweep. The varied parameter may be left out and
    /// is then seeded with `first`.
    pub fn sweep_spec(&self, vary: &str, first: f64) -> Result<StateSpec, CliError> {
        match (&self.spec, &self.state) {
            (Some(p), None) if self.params.is_empty() => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| CliError::invalid(format!("cannot read spec {}: {e}", p.display())))?;
                let mut v: serde_json::Value = serde_json::from_str(&text)
                    .map_err(|e| CliError::invalid(format!("spec is not valid JSON: {e}")))?;
                if let Some(obj) = v.as_object_mut() {
                    let nested = obj
                        .get("params")
                        .and_then(|p| p.as_object())
                        .is_some_and(|p| p.contains_key(vary));
                    if !nested && !obj.contains_key(vary) {
                        obj.insert(vary.to_string(), first.into());
                    }
                }
                StateSpec::from_json(&v.to_string())
            }
            (None, Some(t)) => {
                let mut params = self.params.clone();
                let given = params
                    .iter()
                    .any(|p| p.split_once('=').is_some_and(|(k, _)| k.trim() == vary));
                if !given {
                    params.push(format!("{vary}={first:?}"));
                }
                StateSpec::from_flags(t, &params)
            }
            _ => self.spec(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SuiteArg {
    Relations,
    Identities,
    Bases,
    All,
}

impl SuiteArg {
    fn suites(&self) -> Vec<Suite> {
        match self {
            SuiteArg::Relations => vec![Suite::Relations],
            SuiteArg::Identities => vec![Suite::Identities],
            SuiteArg::Bases => vec![Suite::Bases],
            SuiteArg::All => vec![Suite::Relations, Suite::Identities, Suite::Bases],
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write the mode table and a sampled density of a state
    State {
        #[command(flatten)]
        state: StateArgs,
        /// Density samples over [-pi, pi)
        #[arg(long, default_value_t = 512)]
        samples: usize,
        /// Density file (default: next to --out with a .density suffix)
        #[arg(long)]
        density_out: Option<PathBuf>,
    },
    /// Minimized phase uncertainty of a state
    Uncertainty {
        #[command(flatten)]
        state: StateArgs,
    },
    /// Run property suites; exit 1 when any check fails
    Verify {
        #[arg(long, value_enum, default_value_t = SuiteArg::All)]
        suite: SuiteArg,
        /// Random states in the relation suite
        #[arg(long, default_value_t = 1000)]
        states: usize,
        /// Window origins per random state
        #[arg(long, default_value_t = 16)]
        alphas: usize,
        /// Random states compared with the grid oracle
        #[arg(long, default_value_t = 200)]
        oracle_states: usize,
    },
    /// Reproduce the worked examples as a table; exit 1 when any row fails
    Repro,
    /// Uncertainty and relation rows over a list of parameter values
    Sweep {
        #[command(flatten)]
        state: StateArgs,
        /// Parameter to vary
        #[arg(long)]
        vary: String,
        /// Comma-separated values, e.g. pi/4,pi/2,pi
        #[arg(long, allow_hyphen_values = true)]
        values: String,
        /// Whitespace-separated plot data file
        #[arg(long)]
        plot_data: Option<PathBuf>,
    },
}

/// Sets the worker pool from `PHASEKIT_THREADS` when present.
pub fn configure_threads() -> Result<(), CliError> {
    if let Ok(v) = std::env::var("PHASEKIT_THREADS") {
        let n: usize =
            v.trim().parse().ok().filter(|n| *n > 0).ok_or_else(|| {
                CliError::invalid(format!("PHASEKIT_THREADS: expected a positive integer, got {v:?}"))
            })?;
        // a pool may already exist when called twice in one process
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

/// Parses arguments and runs; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
        }
    };
    match configure_threads().and_then(|_| run(&cli)) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.code
        }
    }
}

pub fn run(cli: &Cli) -> Result<i32, CliError> {
    let g = &cli.global;
    g.validate()?;
    match &cli.command {
        Command::State {
            state,
            samples,
            density_out,
        } => cmd_state(g, &state.spec()?, *samples, density_out.as_deref()),
        Command::Uncertainty { state } => cmd_uncertainty(g, &state.spec()?),
        Command::Verify {
            suite,
            states,
            alphas,
            oracle_states,
        } => {
            let cfg = SuiteConfig {
                seed: g.seed,
                n_states: *states,
                n_alpha: *alphas,
                oracle_states: *oracle_states,
                grid_n: g.grid_n,
                ..SuiteConfig::default()
            };
            cmd_verify(g, &suite.suites(), &cfg)
        }
        Command::Repro => cmd_repro(g),
        Command::Sweep {
            state,
            vary,
            values,
            plot_data,
        } => {
            let values = parse_value_list(values)?;
            let first = values
                .first()
                .copied()
                .ok_or_else(|| CliError::invalid("--values: empty list"))?;
            cmd_sweep(g, &state.sweep_spec(vary, first)?, vary, &values, plot_data.as_deref())
        }
    }
}

fn density_path(out: &Path) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let ext = out.extension().map(|e| e.to_string_lossy().into_owned());
    let name = match ext {
        Some(e) => format!("{stem}.density.{e}"),
        None => format!("{stem}.density"),
    };
    out.with_file_name(name)
}

pub fn cmd_state(
    g: &GlobalOpts,
    spec: &StateSpec,
    samples: usize,
    density_out: Option<&Path>,
) -> Result<i32, CliError> {
    if samples == 0 {
        return Err(CliError::invalid("--samples: must be positive"));
    }
    let built = spec.build(g.truncation()?)?;
    let thetas: Vec<f64> = (0..samples)
        .map(|i| -std::f64::consts::PI + std::f64::consts::TAU * i as f64 / samples as f64)
        .collect();
    let (modes, summary) = match &built {
        BuiltState::Modes(m) => {
            let mut t = Table::new(&["l", "re", "im", "prob"]);
            for (i, c) in m.coeffs().iter().enumerate() {
                let l = if m.half_integer() {
                    Cell::Num(m.mode(i))
                } else {
                    Cell::Int(m.l_min() + i as i64)
                };
                t.push(vec![l, c.re.into(), c.im.into(), c.norm_sqr().into()]);
            }
            let s = format!(
                "norm={} modes={} tail_bound={:e}",
                m.norm_sqr().sqrt(),
                m.len(),
                m.tail_bound()
            );
            (t, s)
        }
        BuiltState::Density(d) => {
            let mut t = Table::new(&["start", "end", "height"]);
            let pieces = d.pieces().unwrap_or_default();
            for a in pieces {
                t.push(vec![a.start.into(), a.end.into(), a.height.into()]);
            }
            (
                t,
                format!("piecewise density arcs={} (no mode expansion)", pieces.len()),
            )
        }
    };
    let source = built.source();
    let rho: Vec<f64> = thetas.par_iter().map(|&t| source.density(t)).collect();
    let mut dens = Table::new(&["theta", "rho"]);
    for (t, r) in thetas.iter().zip(&rho) {
        dens.push(vec![(*t).into(), (*r).into()]);
    }
    modes.emit(g.out.as_deref(), g.format)?;
    let dpath = density_out
        .map(Path::to_path_buf)
        .or_else(|| g.out.as_deref().map(density_path));
    if let Some(p) = &dpath {
        dens.emit(Some(p), g.format)?;
    }
    eprintln!("{summary}");
    Ok(EXIT_OK)
}

pub fn cmd_uncertainty(g: &GlobalOpts, spec: &StateSpec) -> Result<i32, CliError> {
    let built = spec.build(g.truncation()?)?;
    let u = PhaseProfile::new(built.source())?.uncertainty(g.grid_n)?;
    let mut header = vec!["alpha0", "delta_theta", "variance", "edge_density", "n_extrema"];
    let mut row: Vec<Cell> = vec![
        u.alpha0.into(),
        u.delta_theta.into(),
        u.variance.into(),
        u.edge_density_at_min.into(),
        u.n_extrema_found.into(),
    ];
    let mut code = EXIT_OK;
    if g.oracle {
        let o = grid_oracle(built.source(), 4096, g.quad_n)?;
        let gap = (o.variance - u.variance).abs();
        header.extend(["oracle_variance", "oracle_abs_diff", "oracle_pass"]);
        row.extend([o.variance.into(), gap.into(), (gap <= g.tol).into()]);
        if gap > g.tol {
            code = EXIT_VERIFY_FAILED;
        }
    }
    let mut t = Table::new(&header);
    t.push(row);
    t.emit(g.out.as_deref(), g.format)?;
    Ok(code)
}

pub fn cmd_verify(g: &GlobalOpts, suites: &[Suite], cfg: &SuiteConfig) -> Result<i32, CliError> {
    let mut rows = Vec::new();
    for s in suites {
        rows.extend(run_suite(*s, cfg));
    }
    rows_to_table(&rows).emit(g.out.as_deref(), g.format)?;
    let failed: Vec<_> = rows.iter().filter(|r| !r.pass).collect();
    let stderr = std::io::stderr();
    let mut err = stderr.lock();
    for r in &failed {
        let _ = writeln!(
            err,
            "FAIL {} {} [{}] value={} {} {}",
            r.suite,
            r.check,
            r.case,
            r.value,
            if r.cmp == suites::Cmp::AtMost { "<=" } else { ">=" },
            r.bound
        );
        if let Some(s) = &r.state {
            let _ = writeln!(err, "  state: {}", StateSpec::explicit_from(s).to_json());
        }
    }
    let _ = writeln!(err, "{} checks, {} failed", rows.len(), failed.len());
    Ok(if failed.is_empty() { EXIT_OK } else { EXIT_VERIFY_FAILED })
}

pub fn cmd_repro(g: &GlobalOpts) -> Result<i32, CliError> {
    let rows = repro::repro_rows(g.grid_n, g.tail_tol)?;
    repro::repro_table(&rows).emit(g.out.as_deref(), g.format)?;
    let failed = rows.iter().filter(|r| !r.pass).count();
    eprintln!("{} rows, {} failed", rows.len(), failed);
    Ok(if failed == 0 { EXIT_OK } else { EXIT_VERIFY_FAILED })
}

const SWEEP_COLUMNS: [&str; 13] = [
    "param",
    "value",
    "alpha0",
    "delta_theta",
    "variance",
    "edge_density",
    "n_extrema",
    "delta_L",
    "lhs",
    "rhs",
    "margin",
    "satisfied",
    "at_global_min",
];

fn sweep_row(g: &GlobalOpts, spec: &StateSpec, vary: &str, value: f64) -> Result<Vec<Cell>, CliError> {
    let built = spec.with_param(vary, value)?.build(g.truncation()?)?;
    let u = PhaseProfile::new(built.source())?.uncertainty(g.grid_n)?;
    let mut row: Vec<Cell> = vec![
        vary.into(),
        value.into(),
        u.alpha0.into(),
        u.delta_theta.into(),
        u.variance.into(),
        u.edge_density_at_min.into(),
        u.n_extrema_found.into(),
    ];
    match built.modes() {
        Some(m) => {
            let ms = momentum_stats(m)?;
            let r = check_relation_min_with(m, g.grid_n)?;
            row.extend([
                ms.std.into(),
                r.lhs.into(),
                r.rhs.into(),
                r.margin.into(),
                r.satisfied.into(),
                r.at_global_min.into(),
            ]);
        }
        None => row.extend(std::iter::repeat_n(Cell::Empty, 6)),
    }
    Ok(row)
}

pub fn cmd_sweep(
    g: &GlobalOpts,
    spec: &StateSpec,
    vary: &str,
    values: &[f64],
    plot_data: Option<&Path>,
) -> Result<i32, CliError> {
    // fail fast on an unknown parameter before any work
    spec.with_param(vary, values.first().copied().unwrap_or(0.0))?;
    let rows: Vec<Result<Vec<Cell>, CliError>> = values.par_iter().map(|&v| sweep_row(g, spec, vary, v)).collect();
    let mut t = Table::new(&SWEEP_COLUMNS);
    for r in rows {
        t.push(r?);
    }
    t.emit(g.out.as_deref(), g.format)?;
    if let Some(p) = plot_data {
        write_plot_data(&t, p)?;
    }
    Ok(EXIT_OK)
}

/// `x y1 y2 ...` columns with a `#` header line; empty cells become `nan`.
fn write_plot_data(t: &Table, path: &Path) -> Result<(), CliError> {
    let cols = [
        "value",
        "delta_theta",
        "variance",
        "edge_density",
        "delta_L",
        "lhs",
        "rhs",
        "margin",
    ];
    let idx: Vec<usize> = cols.iter().map(|c| t.column(c).expect("sweep column")).collect();
    let mut s = format!("# {}\n", cols.join(" "));
    for row in &t.rows {
        let fields: Vec<String> = idx
            .iter()
            .map(|&i| match &row[i] {
                Cell::Num(x) => format!("{x:?}"),
                Cell::Int(n) => n.to_string(),
                _ => "nan".into(),
            })
            .collect();
        s.push_str(&fields.join(" "));
        s.push('\n');
    }
    std::fs::write(path, s).map_err(|e| CliError::io(path, e))
}
