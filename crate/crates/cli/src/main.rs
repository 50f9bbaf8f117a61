//! `arrival`: arrival-time distributions and tunneling times for free and
//! tunneling wave packets, measured through a narrow absorbing potential.
//!
//! Subcommands:
//! - `free`: arrival-time density of a free packet (positive-momentum,
//!   symmetric, antisymmetric, or general two-sided states)
//! - `barrier`: density behind a rectangular barrier (operator-normalized,
//!   transmitted-renormalized, or joint arrival-and-transmission variants)
//! - `scan`: mean-arrival and tunneling-time sweeps over barrier height or
//!   width
//! - `validate`: grid-propagation cross-check of the stationary theory at
//!   finite absorber width
//!
//! All outputs are CSV with a `# key = value` manifest header; identical
//! manifests reproduce byte-identical files.  Exit codes: 0 success,
//! 1 numerical-consistency failure, 2 usage error.

// `!(x > 0.0)` guards reject NaN along with the out-of-domain sign.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use arrival_core::distributions::{
    sample_kijowski, sample_pi_finite_eps, sample_pi_kn, sample_pi_on_barrier,
    sample_pi_on_general, sample_pi_tilde, TimeDistribution, TimeWindow,
};
use arrival_core::moments::{timing_report, TimingReport};
use arrival_core::potential::{standard_profiles, AbsorberScaling, ProfileKind, ScalingCase};
use arrival_core::scattering::BoundaryCondition;
use arrival_core::tdse::{interpolate_rate, propagate, PropagationConfig};
use arrival_core::wavepacket::{GaussianSpec, MomentumAmplitude};
use arrival_core::Units;

use output::{emit, format_f64, CsvBody, RunManifest};

#[derive(Parser)]
#[command(
    name = "arrival",
    version,
    about = "Quantum arrival-time distributions for free and tunneling wave packets"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Arrival-time density of a free wave packet at x = 0
    Free(FreeArgs),
    /// Arrival-time density behind a rectangular barrier
    Barrier(BarrierArgs),
    /// Sweep mean arrival and tunneling times over barrier height or width
    Scan(ScanArgs),
    /// Cross-check the stationary theory against grid propagation
    Validate(ValidateArgs),
}

#[derive(Args, Clone)]
struct PacketArgs {
    /// Initial mean position (must be negative: packet comes from the left)
    #[arg(long, default_value_t = -50.0, allow_negative_numbers = true)]
    x0: f64,
    /// Initial position spread
    #[arg(long, default_value_t = 10.0)]
    dx: f64,
    /// Mean velocity
    #[arg(long, default_value_t = 1.0)]
    v0: f64,
}

impl PacketArgs {
    fn spec(&self) -> Result<GaussianSpec, arrival_core::Error> {
        GaussianSpec::new(self.x0, self.dx, self.v0)
    }

    fn manifest(&self, m: &mut RunManifest) {
        m.push_f64("packet.x0", self.x0);
        m.push_f64("packet.dx", self.dx);
        m.push_f64("packet.v0", self.v0);
    }
}

#[derive(Args, Clone)]
struct GridArgs {
    /// Momentum quadrature nodes
    #[arg(long, default_value_t = 400)]
    nk: usize,
    /// Time grid points
    #[arg(long, default_value_t = 1200)]
    nt: usize,
    /// Time grid start (default: auto window around the arrival peak)
    #[arg(long, allow_negative_numbers = true)]
    t_min: Option<f64>,
    /// Time grid end
    #[arg(long, allow_negative_numbers = true)]
    t_max: Option<f64>,
}

impl GridArgs {
    /// Explicit window if both ends were given.
    fn window(&self) -> Result<Option<TimeWindow>, arrival_core::Error> {
        match (self.t_min, self.t_max) {
            (Some(a), Some(b)) => Ok(Some(TimeWindow::new(a, b, self.nt)?)),
            (None, None) => Ok(None),
            _ => Err(arrival_core::Error::Config(
                "give both --t-min and --t-max, or neither".into(),
            )),
        }
    }

    fn manifest(&self, m: &mut RunManifest) {
        m.push("grid.nk", self.nk);
        m.push("grid.nt", self.nt);
        match (self.t_min, self.t_max) {
            (Some(a), Some(b)) => {
                m.push_f64("grid.t_min", a);
                m.push_f64("grid.t_max", b);
            }
            _ => m.push("grid.window", "auto"),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FreeMode {
    /// Positive-momentum packet
    Positive,
    /// Even superposition of a packet and its mirror image
    #[value(alias = "sym")]
    Symmetric,
    /// Odd superposition of a packet and its mirror image
    #[value(alias = "antisym")]
    Antisymmetric,
    /// Packet plus its mirror image weighted by --mix
    General,
}

#[derive(Args)]
struct FreeArgs {
    #[command(flatten)]
    packet: PacketArgs,
    #[command(flatten)]
    grid: GridArgs,
    /// Which free state to prepare
    #[arg(long, value_enum, default_value_t = FreeMode::Positive)]
    mode: FreeMode,
    /// Mirror-image weight for --mode general
    #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
    mix: f64,
    /// Output file (stdout if omitted; relative paths join $ARRIVAL_OUT_DIR)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BarrierDist {
    /// Operator-normalized density (transmission phase only)
    On,
    /// Kijowski density of the renormalized transmitted packet
    Kn,
    /// Joint arrival-and-transmission density
    Tilde,
}

#[derive(Args)]
struct BarrierArgs {
    #[command(flatten)]
    packet: PacketArgs,
    #[command(flatten)]
    grid: GridArgs,
    /// Barrier height(s); comma-separated values share one time grid
    #[arg(long = "U", required = true, value_delimiter = ',', num_args = 1..)]
    u: Vec<f64>,
    /// Barrier width
    #[arg(long, default_value_t = 10.0)]
    l: f64,
    /// Density variant
    #[arg(long, value_enum, default_value_t = BarrierDist::On)]
    dist: BarrierDist,
    /// Worker threads for multi-U runs
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Output file (stdout if omitted; relative paths join $ARRIVAL_OUT_DIR)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ScanParam {
    /// Sweep barrier height at fixed width --l
    Height,
    /// Sweep barrier width at fixed height --U
    Width,
}

#[derive(Args)]
struct ScanArgs {
    #[command(flatten)]
    packet: PacketArgs,
    /// Quantity to sweep
    #[arg(long, value_enum)]
    param: ScanParam,
    /// Sweep start (with --to and --steps)
    #[arg(long, allow_negative_numbers = true)]
    from: Option<f64>,
    /// Sweep end (inclusive)
    #[arg(long, allow_negative_numbers = true)]
    to: Option<f64>,
    /// Number of sweep points
    #[arg(long)]
    steps: Option<usize>,
    /// Explicit sweep values (alternative to --from/--to/--steps)
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    values: Option<Vec<f64>>,
    /// Fixed barrier width for height scans
    #[arg(long, default_value_t = 10.0)]
    l: f64,
    /// Fixed barrier height for width scans
    #[arg(long = "U", default_value_t = 1.0)]
    u: f64,
    /// Momentum quadrature nodes (wide grid: transmission-weighted averages
    /// lean on above-threshold components)
    #[arg(long, default_value_t = 600)]
    nk: usize,
    /// Worker threads
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Output file (stdout if omitted; relative paths join $ARRIVAL_OUT_DIR)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ValidateSetup {
    Free,
    Barrier,
}

#[derive(Args)]
struct ValidateArgs {
    #[command(flatten)]
    packet: PacketArgs,
    /// Which measurement geometry to validate
    #[arg(long, value_enum, default_value_t = ValidateSetup::Free)]
    setup: ValidateSetup,
    /// Absorber half-width
    #[arg(long, default_value_t = 0.2)]
    eps: f64,
    /// Absorber strength scale V0 L0
    #[arg(long, default_value_t = 0.01)]
    v0l0: f64,
    /// Barrier height (barrier setup)
    #[arg(long = "U", default_value_t = 0.3)]
    u: f64,
    /// Barrier left edge
    #[arg(long, default_value_t = -20.0, allow_negative_numbers = true)]
    a: f64,
    /// Barrier right edge
    #[arg(long, default_value_t = -10.0, allow_negative_numbers = true)]
    b: f64,
    /// Propagation grid spacing (must be <= eps/8)
    #[arg(long, default_value_t = 0.025)]
    dx_grid: f64,
    /// Propagation time step (default: the accuracy bound m dx^2/hbar)
    #[arg(long)]
    dt: Option<f64>,
    /// Propagation end time
    #[arg(long, default_value_t = 100.0)]
    t_final: f64,
    /// Momentum nodes for the stationary reference
    #[arg(long, default_value_t = 200)]
    nk: usize,
    /// Comparison time grid points
    #[arg(long, default_value_t = 600)]
    nt: usize,
    /// L1 acceptance threshold (fraction of total absorbed mass)
    #[arg(long, default_value_t = 0.02)]
    tol: f64,
    /// Dump |psi|^2 snapshots to this CSV path
    #[arg(long)]
    snapshots: Option<PathBuf>,
    /// Output file (stdout if omitted; relative paths join $ARRIVAL_OUT_DIR)
    #[arg(long)]
    out: Option<PathBuf>,
}

const AU: Units = Units::atomic();

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Free(args) => cmd_free(args),
        Command::Barrier(args) => cmd_barrier(args),
        Command::Scan(args) => cmd_scan(args),
        Command::Validate(args) => cmd_validate(args),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("arrival: error: {e}");
            match e {
                AppError::Usage(_) => ExitCode::from(2),
                AppError::Numerical(_) | AppError::Io(_) => ExitCode::from(1),
            }
        }
    }
}

#[derive(Debug)]
enum AppError {
    Usage(String),
    Numerical(String),
    Io(std::io::Error),
}

impl std::fmt::Display for AppError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AppError::Usage(m) => write!(f, "{m}"),
            AppError::Numerical(m) => write!(f, "{m}"),
            AppError::Io(e) => write!(f, "io: {e}"),
        }
    }
}

impl From<arrival_core::Error> for AppError {
    fn from(e: arrival_core::Error) -> Self {
        match e {
            arrival_core::Error::Config(m) | arrival_core::Error::Domain(m) => {
                AppError::Usage(m)
            }
            other => AppError::Numerical(other.to_string()),
        }
    }
}

impl From<std::io::Error> for AppError {
    fn from(e: std::io::Error) -> Self {
        AppError::Io(e)
    }
}

fn distribution_rows(dist: &TimeDistribution) -> Vec<Vec<f64>> {
    dist.t_grid
        .iter()
        .zip(&dist.density)
        .map(|(t, d)| vec![*t, *d])
        .collect()
}

fn cmd_free(args: FreeArgs) -> Result<ExitCode, AppError> {
    let spec = args.packet.spec()?;
    let window = args.grid.window()?;
    let mut manifest = RunManifest::new("free");
    args.packet.manifest(&mut manifest);
    manifest.push(
        "mode",
        match args.mode {
            FreeMode::Positive => "positive",
            FreeMode::Symmetric => "symmetric",
            FreeMode::Antisymmetric => "antisymmetric",
            FreeMode::General => "general",
        },
    );
    if args.mode == FreeMode::General {
        manifest.push_f64("mix", args.mix);
    }
    args.grid.manifest(&mut manifest);
    manifest.push("output", out_label(args.out.as_deref()));

    let dist = match args.mode {
        FreeMode::Positive => {
            let amp = MomentumAmplitude::gaussian_positive_with(&spec, args.nk_checked()?, 8.0, AU)?;
            sample_kijowski(&amp, window.as_ref(), AU)?
        }
        mode => {
            let mix = match mode {
                FreeMode::Symmetric => 1.0,
                FreeMode::Antisymmetric => -1.0,
                _ => args.mix,
            };
            let amp =
                MomentumAmplitude::two_packet_superposition(&spec, mix, args.nk_checked()?, AU)?;
            sample_pi_on_general(&amp, window.as_ref(), AU)?
        }
    };
    let body = CsvBody {
        columns: vec!["t".into(), "Pi".into()],
        rows: distribution_rows(&dist),
    };
    emit(args.out.as_deref(), &body.render(&manifest))?;
    Ok(ExitCode::SUCCESS)
}

impl FreeArgs {
    fn nk_checked(&self) -> Result<usize, AppError> {
        if self.grid.nk < 2 {
            return Err(AppError::Usage("--nk must be at least 2".into()));
        }
        Ok(self.grid.nk)
    }
}

fn cmd_barrier(args: BarrierArgs) -> Result<ExitCode, AppError> {
    let spec = args.packet.spec()?;
    if args.u.is_empty() {
        return Err(AppError::Usage("--U needs at least one value".into()));
    }
    if !(args.l > 0.0) {
        return Err(AppError::Usage("--l must be positive".into()));
    }
    let window = args.grid.window()?;
    let amp = MomentumAmplitude::gaussian_positive_with(&spec, args.grid.nk, 8.0, AU)?;

    let mut manifest = RunManifest::new("barrier");
    args.packet.manifest(&mut manifest);
    manifest.push(
        "dist",
        match args.dist {
            BarrierDist::On => "on",
            BarrierDist::Kn => "kn",
            BarrierDist::Tilde => "tilde",
        },
    );
    manifest.push(
        "barrier.u",
        args.u
            .iter()
            .map(|u| format_f64(*u))
            .collect::<Vec<_>>()
            .join(";"),
    );
    manifest.push_f64("barrier.l", args.l);
    args.grid.manifest(&mut manifest);
    manifest.push("output", out_label(args.out.as_deref()));

    // multi-U runs share one fixed grid so the columns align; single-U runs
    // without explicit --t-min/--t-max use the auto-extended window
    let shared_window = if args.u.len() > 1 {
        Some(match window {
            Some(w) => w,
            None => TimeWindow::auto(&spec, AU)?,
        })
    } else {
        window
    };

    let sample = |u: f64| -> Result<TimeDistribution, arrival_core::Error> {
        match args.dist {
            BarrierDist::On => sample_pi_on_barrier(&amp, u, args.l, shared_window.as_ref(), AU),
            BarrierDist::Kn => sample_pi_kn(&amp, u, args.l, shared_window.as_ref(), AU),
            BarrierDist::Tilde => sample_pi_tilde(&amp, u, args.l, shared_window.as_ref(), AU),
        }
    };
    let dists: Vec<TimeDistribution> = run_pool(args.jobs, &args.u, sample)?;

    let mut columns = vec!["t".to_string()];
    if args.u.len() == 1 {
        columns.push("Pi".into());
    } else {
        for u in &args.u {
            columns.push(format!("Pi[U={u}]"));
        }
    }
    let grid = &dists[0].t_grid;
    let rows: Vec<Vec<f64>> = grid
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let mut row = vec![*t];
            for d in &dists {
                row.push(d.density[i]);
            }
            row
        })
        .collect();
    let body = CsvBody { columns, rows };
    emit(args.out.as_deref(), &body.render(&manifest))?;
    Ok(ExitCode::SUCCESS)
}

/// Run `f` over `points` on a worker pool of the given size, preserving
/// input order in the output.
fn run_pool<T: Send, F>(jobs: usize, points: &[f64], f: F) -> Result<Vec<T>, AppError>
where
    F: Fn(f64) -> Result<T, arrival_core::Error> + Sync,
{
    if jobs == 0 {
        return Err(AppError::Usage("--jobs must be at least 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| AppError::Numerical(format!("thread pool: {e}")))?;
    use rayon::prelude::*;
    let results: Result<Vec<T>, arrival_core::Error> =
        pool.install(|| points.par_iter().map(|p| f(*p)).collect());
    Ok(results?)
}

fn cmd_scan(args: ScanArgs) -> Result<ExitCode, AppError> {
    let spec = args.packet.spec()?;
    let mut values: Vec<f64> = match (&args.values, args.from, args.to, args.steps) {
        (Some(v), None, None, None) => v.clone(),
        (None, Some(from), Some(to), Some(steps)) => {
            if steps < 1 || (steps == 1 && from != to) || to < from {
                return Err(AppError::Usage(
                    "scan range must satisfy from <= to with steps >= 1".into(),
                ));
            }
            if steps == 1 {
                vec![from]
            } else {
                (0..steps)
                    .map(|i| from + (to - from) * i as f64 / (steps - 1) as f64)
                    .collect()
            }
        }
        _ => {
            return Err(AppError::Usage(
                "give either --values or all of --from/--to/--steps".into(),
            ))
        }
    };
    if values.is_empty() {
        return Err(AppError::Usage("scan range is empty".into()));
    }
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let mut manifest = RunManifest::new("scan");
    args.packet.manifest(&mut manifest);
    manifest.push(
        "scan.param",
        match args.param {
            ScanParam::Height => "height",
            ScanParam::Width => "width",
        },
    );
    manifest.push(
        "scan.values",
        values
            .iter()
            .map(|v| format_f64(*v))
            .collect::<Vec<_>>()
            .join(";"),
    );
    match args.param {
        ScanParam::Height => manifest.push_f64("barrier.l", args.l),
        ScanParam::Width => manifest.push_f64("barrier.u", args.u),
    }
    manifest.push("grid.nk", args.nk);
    manifest.push("output", out_label(args.out.as_deref()));

    // wide momentum grid: +/- 12 dk keeps above-threshold components in range
    let amp = MomentumAmplitude::gaussian_positive_with(&spec, args.nk, 12.0, AU)?;
    let reports: Vec<TimingReport> = run_pool(args.jobs, &values, |p| match args.param {
        ScanParam::Height => timing_report(&spec, &amp, p, args.l, AU),
        ScanParam::Width => {
            if !(p > 0.0) {
                return Err(arrival_core::Error::Config(format!(
                    "width values must be positive, got {p}"
                )));
            }
            timing_report(&spec, &amp, args.u, p, AU)
        }
    })?;

    let mut content = manifest.header_lines();
    content.push_str(TimingReport::csv_header());
    content.push('\n');
    for r in &reports {
        content.push_str(&r.csv_row());
        content.push('\n');
    }
    emit(args.out.as_deref(), &content)?;
    Ok(ExitCode::SUCCESS)
}

fn out_label(out: Option<&std::path::Path>) -> String {
    match output::resolve_out_path(out) {
        Some(p) => p.display().to_string(),
        None => "-".to_string(),
    }
}

fn cmd_validate(args: ValidateArgs) -> Result<ExitCode, AppError> {
    let spec = args.packet.spec()?;
    let scaling = AbsorberScaling::new(ScalingCase::A, args.v0l0, args.eps)?;
    let kind = match args.setup {
        ValidateSetup::Free => ProfileKind::FreeAbsorber,
        ValidateSetup::Barrier => ProfileKind::BarrierAbsorber {
            u: args.u,
            a: args.a,
            b: args.b,
        },
    };
    let profile = standard_profiles(kind, &scaling)?;

    let mut manifest = RunManifest::new("validate");
    args.packet.manifest(&mut manifest);
    manifest.push(
        "setup",
        match args.setup {
            ValidateSetup::Free => "free",
            ValidateSetup::Barrier => "barrier",
        },
    );
    manifest.extend(scaling.manifest_entries());
    if args.setup == ValidateSetup::Barrier {
        manifest.push_f64("barrier.u", args.u);
        manifest.push_f64("barrier.a", args.a);
        manifest.push_f64("barrier.b", args.b);
    }
    manifest.extend(profile.manifest_entries());
    let dt = args
        .dt
        .unwrap_or(AU.mass * args.dx_grid * args.dx_grid / AU.hbar);
    manifest.push_f64("grid.dx", args.dx_grid);
    manifest.push_f64("grid.dt", dt);
    manifest.push_f64("grid.t_final", args.t_final);
    manifest.push("grid.nk", args.nk);
    manifest.push("grid.nt", args.nt);
    manifest.push_f64("tol.l1", args.tol);
    manifest.push("output", out_label(args.out.as_deref()));

    let mut content = manifest.header_lines();
    content.push_str("check,value,threshold,status\n");

    // propagate; configuration refusals are reported as FAIL rows
    let mut cfg = PropagationConfig::new(args.t_final, args.dx_grid, dt);
    if args.snapshots.is_some() {
        let steps = (args.t_final / dt).ceil() as usize;
        cfg.snapshot_stride = Some((steps / 40).max(1));
    }
    let propagation = propagate(&spec, &profile, &cfg, AU);
    let mut pass = true;
    match propagation {
        Err(e) => {
            pass = false;
            content.push_str(&format!("propagation,error: {e},,FAIL\n"));
        }
        Ok(result) => {
            if let Some(path) = &args.snapshots {
                let mut snap = String::from("# |psi|^2 snapshots: x then one column per time\n");
                if let Some((_, first)) = result.snapshots.first() {
                    let header: Vec<String> = std::iter::once("x".to_string())
                        .chain(result.snapshots.iter().map(|(t, _)| format!("t={t}")))
                        .collect();
                    snap.push_str(&header.join(","));
                    snap.push('\n');
                    for i in 0..first.len() {
                        let mut row = vec![format_f64(result.final_state.x_grid[i])];
                        for (_, p) in &result.snapshots {
                            row.push(format_f64(p[i]));
                        }
                        snap.push_str(&row.join(","));
                        snap.push('\n');
                    }
                }
                emit(Some(path.as_path()), &snap)?;
            }

            let amp = MomentumAmplitude::gaussian_positive_with(&spec, args.nk, 8.0, AU)?;
            let window = TimeWindow::new(0.0, args.t_final, args.nt)
                .map_err(|e| AppError::Usage(e.to_string()))?;
            let stationary = sample_pi_finite_eps(
                &amp,
                &profile,
                BoundaryCondition::LeftIncidence,
                false,
                &window,
                AU,
            )?;

            let dt_grid = args.t_final / (args.nt - 1) as f64;
            let mut l1 = 0.0;
            for (t, d) in stationary.t_grid.iter().zip(&stationary.density) {
                let oracle = interpolate_rate(&result, *t);
                l1 += (oracle - d).abs() * dt_grid;
            }
            let absorbed = result.final_state.absorbed;
            let l1_rel = l1 / absorbed;
            let l1_ok = l1_rel <= args.tol;
            pass &= l1_ok;
            content.push_str(&format!(
                "l1_rel,{},{},{}\n",
                format_f64(l1_rel),
                format_f64(args.tol),
                if l1_ok { "PASS" } else { "FAIL" }
            ));

            let defect_ok = result.max_norm_defect <= 1e-6;
            pass &= defect_ok;
            content.push_str(&format!(
                "norm_bookkeeping,{},{},{}\n",
                format_f64(result.max_norm_defect),
                format_f64(1e-6),
                if defect_ok { "PASS" } else { "FAIL" }
            ));
            content.push_str(&format!("absorbed_mass,{},,INFO\n", format_f64(absorbed)));
            content.push_str(&format!(
                "stationary_total,{},,INFO\n",
                format_f64(stationary.total)
            ));
        }
    }
    content.push_str(&format!("result,,,{}\n", if pass { "PASS" } else { "FAIL" }));
    emit(args.out.as_deref(), &content)?;
    if pass {
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::from(1))
    }
}
