//! `dms` command-line front end.
//!
//! Exit status: 0 on success, 2 on usage errors, 1 on runtime errors.

pub mod config;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use direct_dm::camera::{
    average_frames, background_image, calibrate_momentum_scale, calibrate_origin, calibrate_shift, io as camera_io,
    preprocess, render_frames, render_image, CameraSetup, Plane, SyntheticImage,
};
use direct_dm::campaigns::{
    format_value, run_bias_study, run_sweep, write_csv, CampaignConfig, PathId, PathSpec, Pipeline,
};
use direct_dm::{
    apply_weak_shift, density_from_pure, initial_field, pure_path_state, qst_reconstruct, trace_distance, Axis,
    DensityMatrix, NoiseModel, Polarization, PureState, TomographyData,
};

use config::{load_config, FileConfig, Overrides};

const THREADS_VAR: &str = "DMS_THREADS";
const BIAS_MIN_STRENGTH: f64 = 1e-3;
const DEFAULT_BIAS_STEPS: usize = 10;

#[derive(Debug, Parser)]
#[command(name = "dms", version, about = "Direct density-matrix measurement simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Reconstruct states along path 1, 2 or 3 and write a CSV table.
    Sweep(SweepArgs),
    /// Reconstruct the spun-wave-plate mixed states of path 3.
    Mixed(MixedArgs),
    /// Finite-strength bias over a log-spaced strength grid.
    Bias(BiasArgs),
    /// Reconstruct one density-matrix element.
    Element(ElementArgs),
    /// Render reference exposures and calibrate shifts and momentum scale.
    Calibrate(Common),
    /// Compare the direct method with standard tomography.
    QstCompare(QstArgs),
}

#[derive(Debug, Args)]
struct Common {
    /// Measurement strength delta/sigma.
    #[arg(long)]
    strength: Option<f64>,
    /// Relative moment noise per frame (enables noise).
    #[arg(long)]
    noise: Option<f64>,
    /// Frames averaged per measurement (enables noise).
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Extract moments from emulated camera images.
    #[arg(long)]
    camera: bool,
    /// Project estimates onto physical states before scoring.
    #[arg(long)]
    project: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Flat key = value configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=3))]
    path: u8,
    /// Grid points (default 37 on paths 1-2, 19 on path 3).
    #[arg(long, value_parser = clap::value_parser!(usize))]
    steps: Option<usize>,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct MixedArgs {
    #[arg(long)]
    steps: Option<usize>,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct BiasArgs {
    /// Single state to study (default: H, V, D, A, R, L and I/2).
    #[arg(long, value_parser = parse_state)]
    state: Option<StateArg>,
    #[arg(long, default_value_t = DEFAULT_BIAS_STEPS)]
    steps: usize,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct ElementArgs {
    #[arg(long, value_parser = parse_state)]
    state: StateArg,
    #[arg(long, value_parser = parse_hv)]
    row: Polarization,
    #[arg(long, value_parser = parse_hv)]
    col: Polarization,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct QstArgs {
    #[arg(long, value_parser = parse_state)]
    state: StateArg,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Clone)]
struct StateArg {
    label: String,
    state: PureState,
}

/// `H|V|D|A|R|L`, or `theta,alpha` with theta in degrees and the phase
/// parameter alpha in units of pi/2.
fn parse_state(s: &str) -> Result<StateArg, String> {
    if let Ok(p) = s.parse::<Polarization>() {
        return Ok(StateArg { label: p.to_string(), state: p.into() });
    }
    let (t, a) = s
        .split_once(',')
        .ok_or_else(|| format!("expected H, V, D, A, R, L or theta,alpha; got `{s}`"))?;
    let theta: f64 = t.trim().parse().map_err(|_| format!("bad theta `{t}`"))?;
    let alpha: f64 = a.trim().parse().map_err(|_| format!("bad alpha `{a}`"))?;
    if !theta.is_finite() || !alpha.is_finite() {
        return Err("theta and alpha must be finite".into());
    }
    Ok(StateArg { label: s.to_string(), state: pure_path_state(theta.to_radians(), alpha) })
}

fn parse_hv(s: &str) -> Result<Polarization, String> {
    match s.parse::<Polarization>() {
        Ok(p @ (Polarization::H | Polarization::V)) => Ok(p),
        _ => Err(format!("expected H or V, got `{s}`")),
    }
}

type RunResult = Result<(), String>;

impl Common {
    fn campaign(&self) -> Result<CampaignConfig, String> {
        let file = match &self.config {
            Some(path) => load_config(path).map_err(|e| e.to_string())?,
            None => FileConfig::default(),
        };
        let overrides = Overrides {
            strength: self.strength,
            noise: self.noise,
            trials: self.trials,
            seed: self.seed,
            camera: self.camera,
            project: self.project,
        };
        let mut cfg = file.resolve(&overrides)?;
        cfg.out = self.out.clone();
        Ok(cfg)
    }
}

fn err_string<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

/// Writes `text` to `--out` when given, else to `out`.
fn emit(text: &str, path: Option<&Path>, out: &mut dyn Write) -> RunResult {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| format!("{}: {e}", p.display())),
        None => out.write_all(text.as_bytes()).map_err(err_string),
    }
}

fn sweep(path: PathId, steps: Option<usize>, common: &Common, out: &mut dyn Write) -> RunResult {
    let cfg = common.campaign()?;
    let spec = PathSpec::evenly_spaced(path, steps.unwrap_or(path.default_steps())).map_err(err_string)?;
    let records = run_sweep(&spec, &cfg).map_err(err_string)?;
    let mut buf = Vec::new();
    write_csv(&records, &mut buf).map_err(err_string)?;
    emit(std::str::from_utf8(&buf).expect("ascii csv"), cfg.out.as_deref(), out)?;
    if let Some(p) = &cfg.out {
        let worst = records.iter().map(|r| r.trace_distance).fold(0.0, f64::max);
        writeln!(out, "wrote {} rows to {} (max trace distance {})", records.len(), p.display(), format_value(worst))
            .map_err(err_string)?;
    }
    Ok(())
}

fn bias_states(arg: &Option<StateArg>) -> Vec<(String, DensityMatrix)> {
    match arg {
        Some(s) => vec![(s.label.clone(), density_from_pure(&s.state))],
        None => Polarization::ALL
            .iter()
            .map(|p| (p.to_string(), density_from_pure(&(*p).into())))
            .chain(std::iter::once(("I/2".to_string(), DensityMatrix::maximally_mixed(2).expect("qubit"))))
            .collect(),
    }
}

fn log_grid(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    if steps <= 1 || lo >= hi {
        return vec![hi];
    }
    (0..steps).map(|k| lo * (hi / lo).powf(k as f64 / (steps - 1) as f64)).collect()
}

fn bias(args: &BiasArgs, out: &mut dyn Write) -> RunResult {
    if args.steps == 0 {
        return Err("--steps must be at least 1".into());
    }
    let cfg = args.common.campaign()?;
    let top = cfg.strength();
    let strengths = log_grid(BIAS_MIN_STRENGTH.min(top), top, args.steps);
    let rows = run_bias_study(&bias_states(&args.state), &strengths, &cfg).map_err(err_string)?;
    let mut text = String::from("state,strength,max_element_error,trace_distance\n");
    for r in rows {
        text.push_str(&format!(
            "{},{},{},{}\n",
            r.state,
            format_value(r.strength),
            format_value(r.max_element_error),
            format_value(r.trace_distance)
        ));
    }
    emit(&text, cfg.out.as_deref(), out)
}

fn signed6(v: f64) -> String {
    let s = format!("{v:+.6}");
    if s == "-0.000000" { "+0.000000".into() } else { s }
}

fn element(args: &ElementArgs, out: &mut dyn Write) -> RunResult {
    let cfg = args.common.campaign()?;
    let rho = density_from_pure(&args.state.state);
    let est = cfg.reconstruct(&rho, cfg.noise.as_ref()).map_err(err_string)?;
    let idx = |p: Polarization| if p == Polarization::H { 0 } else { 1 };
    let z = est.get(idx(args.row), idx(args.col));
    let re = signed6(z.re);
    let line = format!("{} {}i\n", re.strip_prefix('+').unwrap_or(&re), signed6(z.im));
    if let Some(p) = &cfg.out {
        emit(&line, Some(p), out)?;
    }
    out.write_all(line.as_bytes()).map_err(err_string)
}

fn acquire(
    field: &direct_dm::PointerField,
    setup: &CameraSetup,
    plane: Plane,
    noise: Option<&NoiseModel>,
    stream: u64,
) -> Result<SyntheticImage, String> {
    let frames = match noise {
        Some(n) => render_frames(&[(1.0, field.clone())], &setup.frame, plane, n, stream),
        None => render_image(field, &setup.frame, plane, None).map(|i| vec![i]),
    }
    .map_err(err_string)?;
    let background = background_image(&setup.frame, plane, noise.map_or(0.0, |n| n.background_level));
    let processed = frames
        .iter()
        .map(|f| preprocess(f, &background, setup.filter_cutoff))
        .collect::<Result<Vec<_>, _>>()
        .map_err(err_string)?;
    average_frames(&processed).map_err(err_string)
}

fn calibrate(common: &Common, out: &mut dyn Write) -> RunResult {
    let cfg = common.campaign()?;
    let setup = match cfg.pipeline {
        Pipeline::Camera(s) => s,
        Pipeline::Analytic => CameraSetup::default(),
    };
    let noise = cfg.noise.map(|n| NoiseModel { seed: cfg.seed, ..n });
    let h: PureState = Polarization::H.into();
    let unshifted = initial_field(&h, &cfg.pointer);
    let hp = Polarization::H.projector();
    let shifted_x = apply_weak_shift(&unshifted, &hp, Axis::X, cfg.pointer.delta_x()).map_err(err_string)?;
    let shifted_y = apply_weak_shift(&unshifted, &hp, Axis::Y, cfg.pointer.delta_y()).map_err(err_string)?;

    let reference = acquire(&unshifted, &setup, Plane::Image, noise.as_ref(), 0)?;
    let image_x = acquire(&shifted_x, &setup, Plane::Image, noise.as_ref(), 1)?;
    let image_y = acquire(&shifted_y, &setup, Plane::Image, noise.as_ref(), 2)?;
    let fourier = acquire(&unshifted, &setup, Plane::FourierFull, noise.as_ref(), 3)?;

    let dx = calibrate_shift(&image_x, &reference, Axis::X).map_err(err_string)?;
    let dy = calibrate_shift(&image_y, &reference, Axis::Y).map_err(err_string)?;
    let (x0, y0) = calibrate_origin(&reference).map_err(err_string)?;
    let scale = calibrate_momentum_scale(&fourier, &cfg.pointer).map_err(err_string)?;

    let rows = [
        ("delta_x_um", dx, cfg.pointer.delta_x()),
        ("delta_y_um", dy, cfg.pointer.delta_y()),
        ("origin_x_um", x0, setup.frame.origin_x_um),
        ("origin_y_um", y0, setup.frame.origin_y_um),
        ("fourier_scale_per_um2", scale, setup.frame.fourier_scale),
    ];
    let mut text = String::from("quantity,measured,nominal\n");
    for (name, m, t) in rows {
        text.push_str(&format!("{name},{},{}\n", format_value(m), format_value(t)));
    }
    match &cfg.out {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(|e| format!("{}: {e}", dir.display()))?;
            let images = [("reference", &reference), ("shifted_x", &image_x), ("shifted_y", &image_y), ("fourier_reference", &fourier)];
            for (name, img) in images {
                camera_io::save_pgm(img, &dir.join(format!("{name}.pgm"))).map_err(err_string)?;
                camera_io::save_csv_grid(img, &dir.join(format!("{name}.csv"))).map_err(err_string)?;
            }
            emit(&text, Some(&dir.join("calibration.csv")), out)?;
            writeln!(out, "wrote calibration and 4 images to {}", dir.display()).map_err(err_string)
        }
        None => emit(&text, None, out),
    }
}

fn qst_compare(args: &QstArgs, out: &mut dyn Write) -> RunResult {
    let cfg = args.common.campaign()?;
    let rho = density_from_pure(&args.state.state);
    let noise = cfg.noise.map(|n| NoiseModel { seed: cfg.seed, ..n });

    let direct = cfg.reconstruct(&rho, noise.as_ref()).map_err(err_string)?.hermitian_part();
    let data = match &noise {
        // Streams 0-3 carry the direct measurement's element noise.
        Some(n) => TomographyData::noisy(&rho, n, 4),
        None => TomographyData::from_state(&rho),
    }
    .map_err(err_string)?;
    let qst = qst_reconstruct(&data).map_err(err_string)?;

    let td_direct = trace_distance(&direct, &rho).map_err(err_string)?;
    let td_qst = trace_distance(&qst, &rho).map_err(err_string)?;
    let text = format!(
        "method,trace_distance,measurements,bases\ndirect,{},3,2\nqst,{},6,3\n",
        format_value(td_direct),
        format_value(td_qst)
    );
    emit(&text, cfg.out.as_deref(), out)?;
    if cfg.out.is_some() {
        writeln!(
            out,
            "direct: trace distance {} from 3 measurements in 2 bases per element\nqst: trace distance {} from 6 projectors in 3 bases",
            format_value(td_direct),
            format_value(td_qst)
        )
        .map_err(err_string)?;
    }
    Ok(())
}

fn dispatch(command: &Command, out: &mut dyn Write) -> RunResult {
    match command {
        Command::Sweep(a) => {
            let path: PathId = a.path.to_string().parse().map_err(err_string)?;
            sweep(path, a.steps, &a.common, out)
        }
        Command::Mixed(a) => sweep(PathId::Path3, a.steps, &a.common, out),
        Command::Bias(a) => bias(a, out),
        Command::Element(a) => element(a, out),
        Command::Calibrate(c) => calibrate(c, out),
        Command::QstCompare(a) => qst_compare(a, out),
    }
}

fn thread_pool() -> Result<rayon::ThreadPool, String> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_VAR) {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|n| *n > 0)
            .ok_or_else(|| format!("{THREADS_VAR} must be a positive integer, got `{v}`"))?;
        builder = builder.num_threads(n);
    }
    builder.build().map_err(err_string)
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = err.write_all(text.as_bytes());
                2
            } else {
                let _ = out.write_all(text.as_bytes());
                0
            };
        }
    };
    let mut buf = Vec::new();
    let result = thread_pool().and_then(|pool| pool.install(|| dispatch(&cli.command, &mut buf)));
    if out.write_all(&buf).and_then(|_| out.flush()).is_err() {
        return 1;
    }
    match result {
        Ok(()) => 0,
        Err(msg) => {
            let _ = writeln!(err, "error: {msg}");
            1
        }
    }
}
