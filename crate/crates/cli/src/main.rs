//! `ortho3r` — workspace analysis of 3R orthogonal manipulators from the
//! command line.
//!
//! Subcommands:
//! * `rdw` — run the full pipeline for one geometry; JSON report.
//! * `singular` — sample the singularity locus; CSV.
//! * `sweep` — evaluate the performance index over a design grid; CSV.
//! * `contour` — extract isocontours from a sweep CSV; CSV or SVG.
//!
//! Data goes to `--out` (or standard output when omitted); diagnostics and
//! the sweep progress counter go to standard error. Exit codes: 0 success,
//! 1 validation error (bad flag, bad geometry, unreadable input), 2
//! computation error.

use std::fmt::Display;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use ortho3r::rdw::{compute_rdw, RdwConfig, RdwResult};
use ortho3r::singularity::{max_reach, singular_set};
use ortho3r::sweep::{extract_contours, sweep_eta_with_progress, EtaField, GridSpec};
use ortho3r::{Error as CoreError, GeometryParams, ManipulatorType};
use serde::Serialize;

fn main() {
    std::process::exit(run());
}

fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            // Flag and value errors are validation errors.
            eprint!("{e}");
            return 1;
        }
    };
    match cli.execute() {
        Ok(()) => 0,
        Err(CliError::Validation(msg)) => {
            eprintln!("error: {msg}");
            1
        }
        Err(CliError::Computation(msg)) => {
            eprintln!("error: {msg}");
            2
        }
    }
}

/// Failures split by exit code: 1 for bad inputs, 2 for runtime failures.
enum CliError {
    Validation(String),
    Computation(String),
}

fn validation(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

fn computation(msg: impl Into<String>) -> CliError {
    CliError::Computation(msg.into())
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::InvalidGeometry(_)
            | CoreError::TypeConstraint { .. }
            | CoreError::InvalidArgument(_)
            | CoreError::Parse(_) => CliError::Validation(e.to_string()),
            _ => CliError::Computation(e.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "ortho3r",
    version,
    about = "Workspace analysis of 3R orthogonal serial manipulators",
    arg_required_else_help = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the regular dextrous workspace of one geometry (JSON report)
    Rdw(RdwArgs),
    /// Sample the singularity locus of one geometry (CSV)
    Singular(SingularArgs),
    /// Evaluate the performance index over a type's design grid (CSV)
    Sweep(SweepArgs),
    /// Extract isocontours from a sweep CSV (CSV or SVG)
    Contour(ContourArgs),
}

impl Cli {
    fn execute(self) -> Result<(), CliError> {
        match self.command {
            Command::Rdw(args) => run_rdw(args),
            Command::Singular(args) => run_singular(args),
            Command::Sweep(args) => run_sweep(args),
            Command::Contour(args) => run_contour(args),
        }
    }
}

/// Manipulator geometry; lengths left unset are zero.
#[derive(Args, Default)]
struct GeometryArgs {
    /// Manipulator type: B1, C, E, G, H or generic
    #[arg(long = "type", value_name = "TYPE")]
    kind: Option<String>,

    /// Joint offset d2
    #[arg(long, value_name = "LEN")]
    d2: Option<f64>,

    /// Joint offset d3
    #[arg(long, value_name = "LEN")]
    d3: Option<f64>,

    /// Joint offset d4 (must be positive)
    #[arg(long, value_name = "LEN")]
    d4: Option<f64>,

    /// Link length r2
    #[arg(long, value_name = "LEN")]
    r2: Option<f64>,

    /// Link length r3
    #[arg(long, value_name = "LEN")]
    r3: Option<f64>,
}

impl GeometryArgs {
    fn apply_config(&mut self, key: &str, value: &str) -> Result<bool, CliError> {
        match key {
            "type" => {
                if self.kind.is_none() {
                    self.kind = Some(value.to_string());
                }
            }
            "d2" => set_parsed(&mut self.d2, key, value)?,
            "d3" => set_parsed(&mut self.d3, key, value)?,
            "d4" => set_parsed(&mut self.d4, key, value)?,
            "r2" => set_parsed(&mut self.r2, key, value)?,
            "r3" => set_parsed(&mut self.r3, key, value)?,
            _ => return Ok(false),
        }
        Ok(true)
    }

    /// Resolves the type tag and validates the geometry against it.
    fn build(&self) -> Result<(ManipulatorType, GeometryParams), CliError> {
        let kind = match &self.kind {
            Some(tag) => tag.parse::<ManipulatorType>()?,
            None => ManipulatorType::Generic,
        };
        let geom = GeometryParams::new(
            self.d2.unwrap_or(0.0),
            self.d3.unwrap_or(0.0),
            self.d4.unwrap_or(0.0),
            self.r2.unwrap_or(0.0),
            self.r3.unwrap_or(0.0),
        )?;
        kind.validate(&geom)?;
        Ok((kind, geom))
    }
}

/// Resolution overrides for the pipeline (defaults match the library).
#[derive(Args, Default)]
struct ResolutionArgs {
    /// Grid size per axis for the singularity and reach scans
    #[arg(long, value_name = "N")]
    grid_n: Option<usize>,

    /// Growth-lattice subdivisions of the free-square edge
    #[arg(long, value_name = "N")]
    n_scan: Option<usize>,

    /// Singular-sample spacing divisor (spacing = rho_max / DIV)
    #[arg(long, value_name = "DIV")]
    spacing_div: Option<usize>,

    /// Evaluation budget per direct search
    #[arg(long, value_name = "N")]
    hj_evals: Option<usize>,
}

impl ResolutionArgs {
    fn apply_config(&mut self, key: &str, value: &str) -> Result<bool, CliError> {
        match key {
            "grid-n" => set_parsed(&mut self.grid_n, key, value)?,
            "n-scan" => set_parsed(&mut self.n_scan, key, value)?,
            "spacing-div" => set_parsed(&mut self.spacing_div, key, value)?,
            "hj-evals" => set_parsed(&mut self.hj_evals, key, value)?,
            _ => return Ok(false),
        }
        Ok(true)
    }

    /// Applies the overrides on top of `base` (the subcommand's preset).
    fn build(&self, base: RdwConfig) -> Result<RdwConfig, CliError> {
        let mut config = base;
        if let Some(n) = self.grid_n {
            if n < 64 {
                return Err(validation(format!("--grid-n must be at least 64 (got {n})")));
            }
            config.singular_grid_n = n;
            config.reach_grid_n = n;
        }
        if let Some(n) = self.n_scan {
            if n < 10 {
                return Err(validation(format!("--n-scan must be at least 10 (got {n})")));
            }
            config.n_scan = n;
        }
        if let Some(n) = self.spacing_div {
            if n < 10 {
                return Err(validation(format!(
                    "--spacing-div must be at least 10 (got {n})"
                )));
            }
            config.spacing_div = n;
        }
        if let Some(n) = self.hj_evals {
            if n == 0 {
                return Err(validation("--hj-evals must be at least 1"));
            }
            config.hj_max_evals = n;
        }
        Ok(config)
    }
}

/// Flags shared by every subcommand.
#[derive(Args, Default)]
struct CommonArgs {
    /// Plain-text key=value file supplying defaults for unset flags
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Cap on worker threads (default: machine parallelism)
    #[arg(long, value_name = "N")]
    jobs: Option<usize>,

    /// Output file (default: standard output)
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

impl CommonArgs {
    fn apply_config(&mut self, key: &str, value: &str) -> Result<bool, CliError> {
        match key {
            "jobs" => set_parsed(&mut self.jobs, key, value)?,
            "out" => {
                if self.out.is_none() {
                    self.out = Some(PathBuf::from(value));
                }
            }
            _ => return Ok(false),
        }
        Ok(true)
    }

    fn configure_jobs(&self) -> Result<(), CliError> {
        let Some(n) = self.jobs else { return Ok(()) };
        if n == 0 {
            return Err(validation("--jobs must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| validation(format!("cannot configure {n} worker threads: {e}")))
    }
}

#[derive(Args)]
struct RdwArgs {
    #[command(flatten)]
    geometry: GeometryArgs,

    /// Conditioning threshold in (0, 1]
    #[arg(long, value_name = "K")]
    kmin: Option<f64>,

    #[command(flatten)]
    resolution: ResolutionArgs,

    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct SingularArgs {
    #[command(flatten)]
    geometry: GeometryArgs,

    /// Grid size per axis for the singularity scan
    #[arg(long, value_name = "N")]
    grid_n: Option<usize>,

    /// Singular-sample spacing divisor (spacing = rho_max / DIV)
    #[arg(long, value_name = "DIV")]
    spacing_div: Option<usize>,

    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct SweepArgs {
    /// Manipulator type whose design plane is swept: B1, C, E, G or H
    #[arg(long = "type", value_name = "TYPE")]
    kind: Option<String>,

    /// Smallest value of both design parameters
    #[arg(long, value_name = "LEN")]
    min: Option<f64>,

    /// Largest value of both design parameters
    #[arg(long, value_name = "LEN")]
    max: Option<f64>,

    /// Grid step of both design parameters
    #[arg(long, value_name = "LEN")]
    step: Option<f64>,

    /// Conditioning threshold in (0, 1]
    #[arg(long, value_name = "K")]
    kmin: Option<f64>,

    #[command(flatten)]
    resolution: ResolutionArgs,

    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct ContourArgs {
    /// Sweep CSV to read
    #[arg(long = "in", value_name = "FILE")]
    input: Option<PathBuf>,

    /// Comma-separated contour levels, each in (0, 1)
    #[arg(long, value_name = "L1,L2,...")]
    levels: Option<String>,

    /// Output format: csv or svg (default: inferred from --out extension)
    #[arg(long, value_name = "FMT")]
    format: Option<String>,

    #[command(flatten)]
    common: CommonArgs,
}

/// Fills `slot` from a config-file entry unless the flag already set it.
fn set_parsed<T: FromStr>(slot: &mut Option<T>, key: &str, value: &str) -> Result<(), CliError>
where
    T::Err: Display,
{
    if slot.is_none() {
        let parsed = value
            .parse()
            .map_err(|e| validation(format!("config key '{key}': invalid value '{value}': {e}")))?;
        *slot = Some(parsed);
    }
    Ok(())
}

/// Parses a key=value config file; blank lines and `#` comments are skipped.
fn read_config(path: &Path) -> Result<Vec<(String, String)>, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| validation(format!("cannot read config file '{}': {e}", path.display())))?;
    let mut entries = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(validation(format!(
                "config file '{}' line {}: expected key=value, got '{line}'",
                path.display(),
                idx + 1
            )));
        };
        entries.push((key.trim().to_string(), value.trim().to_string()));
    }
    Ok(entries)
}

fn unknown_config_key(key: &str) -> CliError {
    validation(format!(
        "config key '{key}' does not match any flag of this subcommand"
    ))
}

fn resolve_kmin(kmin: Option<f64>) -> Result<f64, CliError> {
    let k = kmin.unwrap_or(0.25);
    if !(k > 0.0 && k <= 1.0) {
        return Err(validation(format!("--kmin must lie in (0, 1] (got {k})")));
    }
    Ok(k)
}

/// Writes through `emit` to `--out` or standard output.
fn write_output<F>(out: &Option<PathBuf>, emit: F) -> Result<(), CliError>
where
    F: FnOnce(&mut dyn Write) -> io::Result<()>,
{
    match out {
        Some(path) => {
            let file = fs::File::create(path).map_err(|e| {
                computation(format!("cannot create output file '{}': {e}", path.display()))
            })?;
            let mut w = io::BufWriter::new(file);
            emit(&mut w)
                .and_then(|()| w.flush())
                .map_err(|e| computation(format!("cannot write '{}': {e}", path.display())))
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            emit(&mut w).map_err(|e| computation(format!("cannot write to standard output: {e}")))
        }
    }
}

/// JSON report of one pipeline run; field order is the emission order.
#[derive(Serialize)]
struct RdwReport {
    #[serde(rename = "type")]
    kind: String,
    params: ParamsReport,
    free_square: SquareReport,
    rdw_square: SquareReport,
    k_min_inv: f64,
    rho_max: f64,
    eta: f64,
    scan_step: f64,
    singular_samples: usize,
}

#[derive(Serialize)]
struct ParamsReport {
    d2: f64,
    d3: f64,
    d4: f64,
    r2: f64,
    r3: f64,
}

#[derive(Serialize)]
struct SquareReport {
    rho: f64,
    z: f64,
    edge: f64,
}

impl SquareReport {
    fn new(square: &ortho3r::Square) -> Self {
        SquareReport {
            rho: square.center.rho,
            z: square.center.z,
            edge: square.edge(),
        }
    }
}

impl RdwReport {
    fn new(kind: ManipulatorType, geom: &GeometryParams, result: &RdwResult) -> Self {
        RdwReport {
            kind: kind.to_string(),
            params: ParamsReport {
                d2: geom.d2,
                d3: geom.d3,
                d4: geom.d4,
                r2: geom.r2,
                r3: geom.r3,
            },
            free_square: SquareReport::new(&result.free_square),
            rdw_square: SquareReport::new(&result.rdw_square),
            k_min_inv: result.k_min_inv,
            rho_max: result.rho_max,
            eta: result.eta,
            scan_step: result.scan_step,
            singular_samples: result.evals.singular_samples,
        }
    }
}

fn run_rdw(mut args: RdwArgs) -> Result<(), CliError> {
    if let Some(path) = args.common.config.clone() {
        for (key, value) in read_config(&path)? {
            let mut used = args.geometry.apply_config(&key, &value)?;
            if !used && key == "kmin" {
                set_parsed(&mut args.kmin, &key, &value)?;
                used = true;
            }
            if !used {
                used = args.resolution.apply_config(&key, &value)?;
            }
            if !used {
                used = args.common.apply_config(&key, &value)?;
            }
            if !used {
                return Err(unknown_config_key(&key));
            }
        }
    }
    let (kind, geom) = args.geometry.build()?;
    let kmin = resolve_kmin(args.kmin)?;
    let config = args.resolution.build(RdwConfig::default())?;
    args.common.configure_jobs()?;

    let result = compute_rdw(&geom, kmin, &config)?;
    let report = RdwReport::new(kind, &geom, &result);
    let json = serde_json::to_string_pretty(&report)
        .map_err(|e| computation(format!("cannot serialize report: {e}")))?;
    write_output(&args.common.out, |w| writeln!(w, "{json}"))
}

fn run_singular(mut args: SingularArgs) -> Result<(), CliError> {
    if let Some(path) = args.common.config.clone() {
        for (key, value) in read_config(&path)? {
            let mut used = args.geometry.apply_config(&key, &value)?;
            if !used && key == "grid-n" {
                set_parsed(&mut args.grid_n, &key, &value)?;
                used = true;
            }
            if !used && key == "spacing-div" {
                set_parsed(&mut args.spacing_div, &key, &value)?;
                used = true;
            }
            if !used {
                used = args.common.apply_config(&key, &value)?;
            }
            if !used {
                return Err(unknown_config_key(&key));
            }
        }
    }
    let (_, geom) = args.geometry.build()?;
    let grid_n = args.grid_n.unwrap_or(1024);
    if grid_n < 64 {
        return Err(validation(format!(
            "--grid-n must be at least 64 (got {grid_n})"
        )));
    }
    let spacing_div = args.spacing_div.unwrap_or(500);
    if spacing_div < 10 {
        return Err(validation(format!(
            "--spacing-div must be at least 10 (got {spacing_div})"
        )));
    }
    args.common.configure_jobs()?;

    let spacing = max_reach(&geom, grid_n) / spacing_div as f64;
    let samples = singular_set(&geom, grid_n, spacing)?;
    eprintln!("{} singular samples", samples.len());
    write_output(&args.common.out, |mut w| samples.write_csv(&mut w))
}

fn run_sweep(mut args: SweepArgs) -> Result<(), CliError> {
    if let Some(path) = args.common.config.clone() {
        for (key, value) in read_config(&path)? {
            let mut used = true;
            match key.as_str() {
                "type" => {
                    if args.kind.is_none() {
                        args.kind = Some(value.clone());
                    }
                }
                "min" => set_parsed(&mut args.min, &key, &value)?,
                "max" => set_parsed(&mut args.max, &key, &value)?,
                "step" => set_parsed(&mut args.step, &key, &value)?,
                "kmin" => set_parsed(&mut args.kmin, &key, &value)?,
                _ => used = false,
            }
            if !used {
                used = args.resolution.apply_config(&key, &value)?;
            }
            if !used {
                used = args.common.apply_config(&key, &value)?;
            }
            if !used {
                return Err(unknown_config_key(&key));
            }
        }
    }
    let Some(tag) = &args.kind else {
        return Err(validation("--type is required for sweep"));
    };
    let kind = tag.parse::<ManipulatorType>()?;
    let (Some(min), Some(max), Some(step)) = (args.min, args.max, args.step) else {
        return Err(validation("sweep requires --min, --max and --step"));
    };
    let kmin = resolve_kmin(args.kmin)?;
    // Per-cell resolution defaults to the reduced sweep preset.
    let config = args.resolution.build(RdwConfig::sweep())?;
    args.common.configure_jobs()?;

    let grid = GridSpec::for_type(kind, min, max, step)?;
    let field = sweep_eta_with_progress(kind, &grid, kmin, &config, progress_counter());
    eprintln!();
    write_output(&args.common.out, |mut w| field.write_csv(&mut w))
}

/// Percentage counter on standard error, updated once per whole percent.
fn progress_counter() -> impl Fn(usize, usize) + Sync {
    let last = AtomicUsize::new(usize::MAX);
    move |done, total| {
        let pct = done * 100 / total.max(1);
        if last.swap(pct, Ordering::Relaxed) != pct {
            eprint!("\r{pct:3}%");
        }
    }
}

fn run_contour(mut args: ContourArgs) -> Result<(), CliError> {
    if let Some(path) = args.common.config.clone() {
        for (key, value) in read_config(&path)? {
            let mut used = true;
            match key.as_str() {
                "in" => {
                    if args.input.is_none() {
                        args.input = Some(PathBuf::from(&value));
                    }
                }
                "levels" => {
                    if args.levels.is_none() {
                        args.levels = Some(value.clone());
                    }
                }
                "format" => {
                    if args.format.is_none() {
                        args.format = Some(value.clone());
                    }
                }
                _ => used = false,
            }
            if !used {
                used = args.common.apply_config(&key, &value)?;
            }
            if !used {
                return Err(unknown_config_key(&key));
            }
        }
    }
    let Some(input) = &args.input else {
        return Err(validation("--in is required for contour"));
    };
    let Some(levels_arg) = &args.levels else {
        return Err(validation("--levels is required for contour"));
    };
    let levels = parse_levels(levels_arg)?;
    let format = resolve_format(args.format.as_deref(), args.common.out.as_deref())?;

    let text = fs::read_to_string(input)
        .map_err(|e| validation(format!("cannot read input file '{}': {e}", input.display())))?;
    let field = EtaField::read_csv(&text)?;
    let contours = extract_contours(&field, &levels);
    write_output(&args.common.out, |mut w| match format {
        OutputFormat::Csv => contours.write_csv(&mut w),
        OutputFormat::Svg => contours.write_svg(&mut w),
    })
}

fn parse_levels(arg: &str) -> Result<Vec<f64>, CliError> {
    let mut levels = Vec::new();
    for part in arg.split(',') {
        let part = part.trim();
        let level: f64 = part
            .parse()
            .map_err(|_| validation(format!("--levels: '{part}' is not a number")))?;
        if !(level > 0.0 && level < 1.0) {
            return Err(validation(format!(
                "--levels: {level} is outside (0, 1)"
            )));
        }
        levels.push(level);
    }
    if levels.is_empty() {
        return Err(validation("--levels needs at least one level"));
    }
    Ok(levels)
}

enum OutputFormat {
    Csv,
    Svg,
}

fn resolve_format(format: Option<&str>, out: Option<&Path>) -> Result<OutputFormat, CliError> {
    if let Some(name) = format {
        return match name.to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "svg" => Ok(OutputFormat::Svg),
            other => Err(validation(format!(
                "unknown output format '{other}' (expected csv or svg)"
            ))),
        };
    }
    match out.and_then(|p| p.extension()).and_then(|e| e.to_str()) {
        Some(ext) if ext.eq_ignore_ascii_case("svg") => Ok(OutputFormat::Svg),
        Some(ext) if ext.eq_ignore_ascii_case("csv") => Ok(OutputFormat::Csv),
        Some(other) => Err(validation(format!(
            "cannot infer output format from extension '.{other}': pass --format csv or --format svg"
        ))),
        None => Ok(OutputFormat::Csv),
    }
}
