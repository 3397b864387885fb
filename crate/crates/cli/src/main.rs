//! Command-line surface of the magdisk toolkit: simulation, verification
//! reports, and figure/data export.
//!
//! Exit codes: 0 success, 2 usage error, 3 out-of-regime request,
//! 4 numeric failure.

use magdisk_cli::{output, svg};

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};

use magdisk::chaos::{
    self, default_dt, CoverageConfig, LyapunovConfig, RegimeSettings, TangentBackend,
};
use magdisk::curves::{classify_by_energy, curvature_for_energy, hyperbolic_center};
use magdisk::error::Error as CoreError;
use magdisk::flow::{integrate, integrate_projected, FieldStrength, PhaseState, Trajectory};
use magdisk::hyperbolic::{distance, DiskPoint};
use magdisk::integrals::{integral_value, Observable};
use magdisk::quotient::{integrate_reduced, FuchsianGroup};

use output::{fmt_f64, records_from_trajectory, TrajectoryDocument, SCHEMA_VERSION};

#[derive(Parser)]
#[command(
    name = "magdisk",
    version,
    about = "Magnetic geodesic flow on the hyperbolic disk and its genus-2 quotient"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one trajectory and write it as CSV or JSON.
    Simulate(SimulateArgs),
    /// Print the curve class and geodesic curvature at an energy.
    Classify {
        #[arg(long)]
        energy: f64,
    },
    /// Verify conservation of the center integral at a subcritical energy.
    Conserve(ConserveArgs),
    /// Estimate the top Lyapunov exponent on the quotient.
    Lyapunov(LyapunovArgs),
    /// Measure fundamental-domain coverage of one trajectory.
    Coverage(CoverageArgs),
    /// Summary table across energies: class, exponent, coverage, drift.
    Report(ReportArgs),
    /// Render a trajectory file or an octagon tiling as SVG.
    ExportSvg(ExportSvgArgs),
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    energy: f64,
    /// Initial position "re,im" in the unit disk.
    #[arg(long, default_value = "0,0")]
    z0: String,
    /// Initial direction angle in radians in the Euclidean chart.
    #[arg(long, default_value_t = 0.0)]
    direction: f64,
    #[arg(long)]
    total_time: f64,
    /// Step size; defaults to 1e-3, halved per speed doubling above 2.
    #[arg(long)]
    dt: Option<f64>,
    /// Field strength multiplying the hyperbolic area form.
    #[arg(long, default_value_t = 1.0)]
    field: f64,
    /// Integrate on the cover but reduce every step to the fundamental
    /// domain of the genus-2 octagon group.
    #[arg(long)]
    quotient: bool,
    /// Rescale momentum each step to hold the initial energy exactly.
    #[arg(long)]
    projection: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Recorded in the output metadata (simulation itself is deterministic).
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct ConserveArgs {
    #[arg(long)]
    energy: f64,
    /// Defaults to ten orbit periods at the requested energy.
    #[arg(long)]
    total_time: Option<f64>,
    #[arg(long, default_value_t = 1e-3)]
    dt: f64,
    /// Which function of the orbit center to track.
    #[arg(long, value_enum, default_value_t = ObservableChoice::Re)]
    observable: ObservableChoice,
    /// Repeat at dt, 2dt, 4dt and report the drift scaling.
    #[arg(long)]
    dt_sweep: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ObservableChoice {
    Re,
    Im,
    Dist0,
}

impl ObservableChoice {
    fn build(self, group: &Arc<FuchsianGroup>) -> Observable {
        let raw = match self {
            ObservableChoice::Re => Observable::re(),
            ObservableChoice::Im => Observable::im(),
            ObservableChoice::Dist0 => Observable::distance_to_origin(),
        };
        raw.on_quotient(Arc::clone(group))
    }
}

#[derive(Args)]
struct LyapunovArgs {
    #[arg(long)]
    energy: f64,
    #[arg(long, default_value_t = 200.0)]
    total_time: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long, value_enum, default_value_t = Backend::Cloning)]
    backend: Backend,
    /// Clone separation for the cloning backend.
    #[arg(long, default_value_t = 1e-8)]
    separation: f64,
    #[arg(long, default_value_t = 1.0)]
    field: f64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Backend {
    Cloning,
    Variational,
}

#[derive(Args)]
struct CoverageArgs {
    #[arg(long)]
    energy: f64,
    #[arg(long, default_value_t = 400.0)]
    total_time: f64,
    #[arg(long, default_value_t = 50)]
    grid_n: usize,
    #[arg(long)]
    dt: Option<f64>,
    /// Time between reported rows; defaults to total_time / 50.
    #[arg(long)]
    record_interval: Option<f64>,
}

#[derive(Args)]
struct ReportArgs {
    /// Comma-separated energy list spanning the regimes, e.g. "0.125,0.5,2".
    #[arg(long)]
    energies: String,
    #[arg(long, default_value_t = 200.0)]
    lyapunov_time: f64,
    #[arg(long, default_value_t = 400.0)]
    coverage_time: f64,
    #[arg(long, default_value_t = 50)]
    grid_n: usize,
    #[arg(long, default_value_t = 1e-3)]
    dt: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Args)]
struct ExportSvgArgs {
    /// Trajectory file (CSV or JSON) produced by `simulate`.
    #[arg(long, required_unless_present = "tiling_depth")]
    input: Option<PathBuf>,
    /// Render the octagon tiling out to this word depth instead.
    #[arg(long)]
    tiling_depth: Option<usize>,
    /// Overlay the fundamental octagon.
    #[arg(long)]
    domain: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

enum CliError {
    Usage(String),
    Core(CoreError),
    Io(String),
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "{msg}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(msg) => write!(f, "{msg}"),
        }
    }
}

fn exit_code(err: &CliError) -> i32 {
    match err {
        CliError::Usage(_) => 2,
        CliError::Core(CoreError::OutOfRegime { .. }) => 3,
        CliError::Core(CoreError::NonpositiveEnergy { .. }) => 2,
        CliError::Core(_) => 4,
        CliError::Io(_) => 4,
    }
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => {}
        Err(err) => {
            eprintln!("error: {err}");
            std::process::exit(exit_code(&err));
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate(args) => cmd_simulate(args),
        Command::Classify { energy } => cmd_classify(energy),
        Command::Conserve(args) => cmd_conserve(args),
        Command::Lyapunov(args) => cmd_lyapunov(args),
        Command::Coverage(args) => cmd_coverage(args),
        Command::Report(args) => cmd_report(args),
        Command::ExportSvg(args) => cmd_export_svg(args),
    }
}

fn parse_point(text: &str) -> Result<DiskPoint, CliError> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 2 {
        return Err(CliError::Usage(format!(
            "--z0 expects \"re,im\", got {text:?}"
        )));
    }
    let re: f64 = parts[0]
        .trim()
        .parse()
        .map_err(|e| CliError::Usage(format!("--z0: {e}")))?;
    let im: f64 = parts[1]
        .trim()
        .parse()
        .map_err(|e| CliError::Usage(format!("--z0: {e}")))?;
    DiskPoint::new(re, im)
        .map_err(|_| CliError::Usage(format!("--z0 must lie in the open unit disk, got {text}")))
}

fn require_positive(value: f64, flag: &str) -> Result<(), CliError> {
    // NaN must fail the check too.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if !(value > 0.0) {
        return Err(CliError::Usage(format!("{flag} must be positive, got {value}")));
    }
    Ok(())
}

fn write_output(path: Option<&PathBuf>, contents: &[u8]) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, contents)?,
        None => std::io::stdout().write_all(contents)?,
    }
    Ok(())
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), CliError> {
    require_positive(args.energy, "--energy")?;
    require_positive(args.total_time, "--total-time")?;
    let dt = args.dt.unwrap_or_else(|| default_dt(args.energy, 1e-3));
    require_positive(dt, "--dt")?;
    if args.field < 0.0 {
        return Err(CliError::Usage(format!(
            "--field must be nonnegative, got {}",
            args.field
        )));
    }
    let z0 = parse_point(&args.z0)?;
    let field = FieldStrength::new(args.field)?;
    let state = PhaseState::with_energy_direction(z0, args.energy, args.direction)?;

    if args.quotient && args.projection {
        return Err(CliError::Usage(
            "--projection is only available for cover runs (drop --quotient)".into(),
        ));
    }
    let group = args.quotient.then(FuchsianGroup::genus2_octagon);
    let traj: Trajectory = match &group {
        Some(g) => integrate_reduced(&state, args.total_time, dt, field, g)?,
        None if args.projection => integrate_projected(&state, args.total_time, dt, field)?,
        None => integrate(&state, args.total_time, dt, field)?,
    };
    let records = records_from_trajectory(&traj, group.as_ref(), field)?;

    let mut buffer = Vec::new();
    match args.format {
        Format::Csv => output::write_csv(&mut buffer, &records)?,
        Format::Json => {
            let doc = TrajectoryDocument {
                schema_version: SCHEMA_VERSION,
                e: args.energy,
                dt,
                seed: args.seed,
                samples: records,
            };
            output::write_json(&mut buffer, &doc)?;
        }
    }
    write_output(args.out.as_ref(), &buffer)
}

fn cmd_classify(energy: f64) -> Result<(), CliError> {
    let class = classify_by_energy(energy)?;
    let k_g = curvature_for_energy(energy)?;
    println!("{class}, k_g = {k_g}");
    Ok(())
}

fn cmd_conserve(args: ConserveArgs) -> Result<(), CliError> {
    require_positive(args.energy, "--energy")?;
    require_positive(args.dt, "--dt")?;
    let e = args.energy;
    // The orbit period exists only below the critical level; this also
    // raises the out-of-regime refusal for E >= 1/2.
    let orbit = magdisk::curves::circle_orbit(DiskPoint::origin(), e, 0.0)?;
    let total_time = args.total_time.unwrap_or(10.0 * orbit.period());
    require_positive(total_time, "--total-time")?;

    let group = Arc::new(FuchsianGroup::genus2_octagon());
    let f = args.observable.build(&group);
    let z0 = DiskPoint::new(0.21, -0.13).expect("fixed start is interior");
    let state = PhaseState::with_energy_direction(z0, e, 0.6)?;

    println!("E = {}, k_g = {}", e, curvature_for_energy(e)?);
    println!(
        "observable f = {} (quotient realization), run time = {}",
        f.label(),
        fmt_f64(total_time)
    );

    let dts: Vec<f64> = if args.dt_sweep {
        vec![args.dt, 2.0 * args.dt, 4.0 * args.dt]
    } else {
        vec![args.dt]
    };
    let mut drifts = Vec::new();
    for &dt in &dts {
        let (i_drift, c_drift, i0) = conservation_drift(&state, total_time, dt, &f)?;
        drifts.push(i_drift);
        println!(
            "dt = {}: I_f(0) = {}, I_f drift = {}, center drift = {}",
            fmt_f64(dt),
            fmt_f64(i0),
            fmt_f64(i_drift),
            fmt_f64(c_drift)
        );
    }
    if args.dt_sweep {
        for i in 1..drifts.len() {
            let order = (drifts[i] / drifts[i - 1]).log2();
            println!(
                "observed order between dt = {} and {}: {:.2}",
                fmt_f64(dts[i - 1]),
                fmt_f64(dts[i]),
                order
            );
        }
    }
    Ok(())
}

fn conservation_drift(
    state: &PhaseState,
    total_time: f64,
    dt: f64,
    f: &Observable,
) -> Result<(f64, f64, f64), CliError> {
    let e = state.energy();
    let traj = integrate(state, total_time, dt, FieldStrength::UNIT)?;
    let i0 = integral_value(state, f)?;
    let c0 = hyperbolic_center(state, e)?;
    let mut i_drift = 0.0_f64;
    let mut c_drift = 0.0_f64;
    for sample in traj.samples().iter().step_by(25) {
        i_drift = i_drift.max((integral_value(&sample.state, f)? - i0).abs());
        c_drift = c_drift.max(distance(hyperbolic_center(&sample.state, e)?, c0));
    }
    Ok((i_drift, c_drift, i0))
}

fn cmd_lyapunov(args: LyapunovArgs) -> Result<(), CliError> {
    require_positive(args.energy, "--energy")?;
    require_positive(args.total_time, "--total-time")?;
    let dt = args.dt.unwrap_or_else(|| default_dt(args.energy, 1e-3));
    require_positive(dt, "--dt")?;
    let group = FuchsianGroup::genus2_octagon();
    let z0 = DiskPoint::new(0.12, 0.07).expect("fixed start is interior");
    let state = PhaseState::with_energy_direction(z0, args.energy, 0.4)?;
    let config = LyapunovConfig {
        dt,
        backend: match args.backend {
            Backend::Cloning => TangentBackend::Cloning {
                separation: args.separation,
            },
            Backend::Variational => TangentBackend::Variational,
        },
        field: FieldStrength::new(args.field)?,
        seed: args.seed,
        ..LyapunovConfig::default()
    };
    let est = chaos::lyapunov_top(&state, args.energy, args.total_time, &config, &group)?;
    println!("E = {}", args.energy);
    println!("backend = {}", est.backend);
    println!(
        "total_time = {}, renorm_interval = {}, dt = {}, seed = {}",
        fmt_f64(est.total_time),
        fmt_f64(est.renorm_interval),
        fmt_f64(dt),
        args.seed
    );
    println!("lambda = {}", fmt_f64(est.lambda));
    println!("stderr = {}", fmt_f64(est.stderr));
    Ok(())
}

fn cmd_coverage(args: CoverageArgs) -> Result<(), CliError> {
    require_positive(args.energy, "--energy")?;
    require_positive(args.total_time, "--total-time")?;
    if args.grid_n == 0 {
        return Err(CliError::Usage("--grid-n must be positive".into()));
    }
    let dt = args.dt.unwrap_or_else(|| default_dt(args.energy, 1e-3));
    require_positive(dt, "--dt")?;
    let group = FuchsianGroup::genus2_octagon();
    let z0 = DiskPoint::new(0.12, 0.07).expect("fixed start is interior");
    let state = PhaseState::with_energy_direction(z0, args.energy, 0.4)?;
    let config = CoverageConfig {
        dt,
        record_interval: args.record_interval.unwrap_or(args.total_time / 50.0),
        ..CoverageConfig::default()
    };
    let report = chaos::coverage(
        &state,
        args.energy,
        args.total_time,
        args.grid_n,
        &config,
        &group,
    )?;
    println!("t,fraction");
    for (t, fraction) in &report.time_series {
        println!("{},{}", fmt_f64(*t), fmt_f64(*fraction));
    }
    println!("final fraction = {}", fmt_f64(report.visited_fraction));
    Ok(())
}

fn cmd_report(args: ReportArgs) -> Result<(), CliError> {
    let mut energies = Vec::new();
    for token in args.energies.split(',') {
        let e: f64 = token
            .trim()
            .parse()
            .map_err(|err| CliError::Usage(format!("--energies: {err}")))?;
        energies.push(e);
    }
    if energies.is_empty() {
        return Err(CliError::Usage("--energies must be non-empty".into()));
    }
    let settings = RegimeSettings {
        lyapunov_time: args.lyapunov_time,
        coverage_time: args.coverage_time,
        grid_n: args.grid_n,
        dt: args.dt,
        seed: args.seed,
    };
    let group = Arc::new(FuchsianGroup::genus2_octagon());
    let rows = chaos::regime_report(&energies, &settings, &group)?;
    println!(
        "{:<10} {:<8} {:<18} {:<12} {:<12} {:<10} I_f_drift",
        "E", "k_g", "class", "lambda", "stderr", "coverage"
    );
    for row in rows {
        println!(
            "{:<10} {:<8} {:<18} {:<12.5} {:<12.5} {:<10.4} {}",
            row.energy,
            row.curvature,
            row.class.to_string(),
            row.lyapunov.lambda,
            row.lyapunov.stderr,
            row.coverage_fraction,
            row.integral_drift
                .map(|d| format!("{d:.3e}"))
                .unwrap_or_else(|| "-".into()),
        );
    }
    Ok(())
}

fn cmd_export_svg(args: ExportSvgArgs) -> Result<(), CliError> {
    let mut builder = svg::SvgBuilder::new();
    if let Some(depth) = args.tiling_depth {
        let group = FuchsianGroup::genus2_octagon();
        builder.add_tiling(&group, depth);
    } else {
        let path = args.input.as_ref().expect("clap enforces input");
        let text = fs::read_to_string(path)?;
        let doc = output::parse_trajectory_file(&text).map_err(CliError::Usage)?;
        if args.domain {
            builder.add_domain(&magdisk::hyperbolic::MobiusTransform::identity(), "#3366aa");
        }
        builder.add_trajectory(&doc.samples);
        // Closed subcritical orbits get an exact circle element.
        if doc.e > 0.0 && doc.e < 0.5 {
            builder.add_fitted_orbit_circle(&doc.samples);
        }
    }
    write_output(args.out.as_ref(), builder.finish().as_bytes())
}
