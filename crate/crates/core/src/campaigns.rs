//! Scripted sweeps over the Poincare-sphere paths, finite-strength bias
//! studies and CSV export of the results.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;

use crate::camera::{camera_direct_matrix, CameraSetup};
use crate::noise::NoiseModel;
use crate::pointer::PointerConfig;
use crate::quantum::{
    density_from_pure, project_to_physical, pure_path_state, purity, spun_mixed_analytic, trace_distance,
    DensityMatrix,
};
use crate::reconstruction::{direct_matrix, Method};
use crate::{Complex64, Error, Result};

pub const CSV_HEADER: &str = "param_deg,re_hh,im_hh,re_hv,im_hv,re_vh,im_vh,re_vv,im_vv,trace_distance,purity_true,purity_measured,strength,noise_sigma,trials,seed";
const SIGNIFICANT_DIGITS: i32 = 12;
const GRID_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PathId {
    /// Linear polarizations, `alpha = 0`.
    Path1,
    /// Quarter-wave-plate path, `alpha = -1`.
    Path2,
    /// Spun-wave-plate mixed states.
    Path3,
}

impl PathId {
    /// Phase parameter of the pure paths.
    pub fn alpha(self) -> Option<f64> {
        match self {
            PathId::Path1 => Some(0.0),
            PathId::Path2 => Some(-1.0),
            PathId::Path3 => None,
        }
    }

    /// Upper end of the parameter range in radians.
    pub fn max_param(self) -> f64 {
        match self {
            PathId::Path1 | PathId::Path2 => PI,
            PathId::Path3 => FRAC_PI_2,
        }
    }

    pub fn default_steps(self) -> usize {
        match self {
            PathId::Path1 | PathId::Path2 => 37,
            PathId::Path3 => 19,
        }
    }

    /// Reference state at parameter `t`.
    pub fn truth(self, t: f64) -> DensityMatrix {
        match self.alpha() {
            Some(alpha) => density_from_pure(&pure_path_state(t, alpha)),
            None => spun_mixed_analytic(t),
        }
    }
}

impl FromStr for PathId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "1" => Ok(PathId::Path1),
            "2" => Ok(PathId::Path2),
            "3" => Ok(PathId::Path3),
            _ => Err(Error::Parse(format!("unknown path `{s}` (expected 1, 2 or 3)"))),
        }
    }
}

impl fmt::Display for PathId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = match self {
            PathId::Path1 => 1,
            PathId::Path2 => 2,
            PathId::Path3 => 3,
        };
        write!(f, "{n}")
    }
}

/// A path and the parameter values (radians) to visit on it.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSpec {
    pub path: PathId,
    pub grid: Vec<f64>,
}

impl PathSpec {
    pub fn new(path: PathId, grid: Vec<f64>) -> Result<Self> {
        let max = path.max_param();
        if let Some(t) = grid.iter().find(|t| !(**t >= -GRID_TOL && **t <= max + GRID_TOL)) {
            return Err(Error::InvalidParameter(format!("parameter {t} outside [0, {max}] for path {path}")));
        }
        Ok(Self { path, grid })
    }

    /// `steps` evenly spaced points covering the full range, ends included.
    pub fn evenly_spaced(path: PathId, steps: usize) -> Result<Self> {
        if steps == 0 {
            return Err(Error::InvalidParameter("steps must be >= 1".into()));
        }
        let max = path.max_param();
        let grid = if steps == 1 {
            vec![0.0]
        } else {
            (0..steps).map(|k| max * k as f64 / (steps - 1) as f64).collect()
        };
        Self::new(path, grid)
    }

    /// 5 degree steps on the pure paths and 19 points on path 3.
    pub fn default_for(path: PathId) -> Self {
        Self::evenly_spaced(path, path.default_steps()).expect("valid default grid")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Pipeline {
    /// Closed-form pointer moments.
    Analytic,
    /// Moments extracted from emulated camera images.
    Camera(CameraSetup),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CampaignConfig {
    pub pointer: PointerConfig,
    pub noise: Option<NoiseModel>,
    pub pipeline: Pipeline,
    /// Project estimates onto physical states before scoring.
    pub project: bool,
    /// Master seed; point `k` uses a seed derived from `(seed, k)`.
    pub seed: u64,
    pub out: Option<PathBuf>,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        Self {
            pointer: PointerConfig::experimental(),
            noise: None,
            pipeline: Pipeline::Analytic,
            project: false,
            seed: 0,
            out: None,
        }
    }
}

impl CampaignConfig {
    /// Symmetric pointers of width `sigma_um` at `delta / sigma = strength`.
    pub fn with_strength(sigma_um: f64, strength: f64) -> Result<Self> {
        Ok(Self { pointer: PointerConfig::from_strength(sigma_um, strength)?, ..Self::default() })
    }

    pub fn strength(&self) -> f64 {
        self.pointer.strength()
    }

    fn point_noise(&self, index: usize) -> Option<NoiseModel> {
        self.noise.map(|n| NoiseModel { seed: self.seed, ..n }.for_point(index as u64))
    }

    /// Reconstruction of `rho` through the configured pipeline, before any
    /// projection.
    pub fn reconstruct(&self, rho: &DensityMatrix, noise: Option<&NoiseModel>) -> Result<DensityMatrix> {
        match &self.pipeline {
            Pipeline::Analytic => direct_matrix(rho, &self.pointer, noise),
            Pipeline::Camera(setup) => camera_direct_matrix(rho, &self.pointer, setup, noise),
        }
    }

    fn method(&self) -> Method {
        Method::for_strength(self.strength())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    /// Path parameter in radians.
    pub param: f64,
    pub truth: DensityMatrix,
    /// Element-wise pointer estimate. At finite strength its off-diagonal
    /// pair is only Hermitian up to the strength bias.
    pub raw: DensityMatrix,
    /// Hermitian part of `raw`, or its physical projection when projection
    /// is enabled. All scores refer to this matrix.
    pub reconstructed: DensityMatrix,
    pub method: Method,
    pub trace_distance: f64,
    pub purity_true: f64,
    pub purity_measured: f64,
    pub strength: f64,
    pub noise_sigma: f64,
    /// Zero when noiseless.
    pub trials: usize,
    pub seed: u64,
}

impl SweepRecord {
    /// Largest element-wise deviation of the reconstruction from truth.
    pub fn max_element_error(&self) -> f64 {
        self.reconstructed.max_abs_diff(&self.truth).expect("both 2x2")
    }

    pub fn csv_row(&self) -> CsvRow {
        let e = |i, j| self.reconstructed.get(i, j);
        CsvRow {
            param_deg: self.param.to_degrees(),
            elements: [e(0, 0), e(0, 1), e(1, 0), e(1, 1)],
            trace_distance: self.trace_distance,
            purity_true: self.purity_true,
            purity_measured: self.purity_measured,
            strength: self.strength,
            noise_sigma: self.noise_sigma,
            trials: self.trials,
            seed: self.seed,
        }
    }
}

fn evaluate(path: PathId, index: usize, param: f64, cfg: &CampaignConfig) -> Result<SweepRecord> {
    let truth = path.truth(param);
    let noise = cfg.point_noise(index);
    let raw = cfg.reconstruct(&truth, noise.as_ref())?;
    let mut reconstructed = raw.hermitian_part();
    if cfg.project {
        reconstructed = project_to_physical(&reconstructed)?;
    }
    Ok(SweepRecord {
        param,
        trace_distance: trace_distance(&reconstructed, &truth)?,
        purity_true: purity(&truth),
        purity_measured: purity(&reconstructed),
        truth,
        raw,
        reconstructed,
        method: cfg.method(),
        strength: cfg.strength(),
        noise_sigma: noise.map_or(0.0, |n| n.relative_sigma),
        trials: noise.map_or(0, |n| n.trials),
        seed: cfg.seed,
    })
}

fn sweep(spec: &PathSpec, cfg: &CampaignConfig) -> Result<Vec<SweepRecord>> {
    spec.grid
        .par_iter()
        .enumerate()
        .map(|(k, &t)| evaluate(spec.path, k, t, cfg))
        .collect()
}

/// Reconstructs each pure state `cos t |H> - sin t e^{i alpha pi/2} |V>` on
/// path 1 or 2.
pub fn sweep_pure_path(spec: &PathSpec, cfg: &CampaignConfig) -> Result<Vec<SweepRecord>> {
    if spec.path == PathId::Path3 {
        return Err(Error::InvalidParameter("path 3 is a mixed-state path; use sweep_mixed".into()));
    }
    sweep(spec, cfg)
}

/// Reconstructs the spun-wave-plate mixed states along path 3.
pub fn sweep_mixed(spec: &PathSpec, cfg: &CampaignConfig) -> Result<Vec<SweepRecord>> {
    if spec.path != PathId::Path3 {
        return Err(Error::InvalidParameter(format!("path {} is a pure-state path", spec.path)));
    }
    sweep(spec, cfg)
}

/// Either sweep, chosen by path.
pub fn run_sweep(spec: &PathSpec, cfg: &CampaignConfig) -> Result<Vec<SweepRecord>> {
    sweep(spec, cfg)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BiasRow {
    pub state: String,
    pub strength: f64,
    pub max_element_error: f64,
    pub trace_distance: f64,
    pub reconstructed: DensityMatrix,
}

/// Noiseless reconstruction error of each state at each strength, using the
/// pointer width and pipeline of `cfg`. Rows are state-major.
pub fn run_bias_study(states: &[(String, DensityMatrix)], strengths: &[f64], cfg: &CampaignConfig) -> Result<Vec<BiasRow>> {
    if let Some(s) = strengths.iter().find(|s| !(**s > 0.0) || !s.is_finite()) {
        return Err(Error::InvalidParameter(format!("strength must be positive, got {s}")));
    }
    let sigma = cfg.pointer.sigma_x();
    let jobs: Vec<(&String, &DensityMatrix, f64)> = states
        .iter()
        .flat_map(|(name, rho)| strengths.iter().map(move |&s| (name, rho, s)))
        .collect();
    jobs.par_iter()
        .map(|&(name, rho, s)| {
            let point = CampaignConfig { pointer: PointerConfig::from_strength(sigma, s)?, noise: None, ..cfg.clone() };
            let est = point.reconstruct(rho, None)?;
            Ok(BiasRow {
                state: name.clone(),
                strength: s,
                max_element_error: est.max_abs_diff(rho)?,
                trace_distance: trace_distance(&est.hermitian_part(), rho)?,
                reconstructed: est,
            })
        })
        .collect()
}

/// Decimal with 12 significant digits; negative zero prints as zero.
pub fn format_value(v: f64) -> String {
    if !v.is_finite() {
        return v.to_string();
    }
    if v == 0.0 {
        return format!("{:.*}", (SIGNIFICANT_DIGITS - 1) as usize, 0.0);
    }
    let magnitude = v.abs().log10().floor() as i32;
    let decimals = (SIGNIFICANT_DIGITS - 1 - magnitude).max(0) as usize;
    let s = format!("{v:.decimals$}");
    match s.strip_prefix('-') {
        Some(rest) if rest.chars().all(|c| c == '0' || c == '.') => rest.to_string(),
        _ => s,
    }
}

/// One parsed CSV data row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CsvRow {
    pub param_deg: f64,
    /// `hh, hv, vh, vv`.
    pub elements: [Complex64; 4],
    pub trace_distance: f64,
    pub purity_true: f64,
    pub purity_measured: f64,
    pub strength: f64,
    pub noise_sigma: f64,
    pub trials: usize,
    pub seed: u64,
}

impl CsvRow {
    fn to_line(self) -> String {
        let mut fields = vec![format_value(self.param_deg)];
        for z in self.elements {
            fields.push(format_value(z.re));
            fields.push(format_value(z.im));
        }
        for v in [self.trace_distance, self.purity_true, self.purity_measured, self.strength, self.noise_sigma] {
            fields.push(format_value(v));
        }
        fields.push(self.trials.to_string());
        fields.push(self.seed.to_string());
        fields.join(",")
    }

    fn parse(line: &str, line_no: usize) -> Result<Self> {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 16 {
            return Err(Error::Parse(format!("line {line_no}: expected 16 fields, found {}", fields.len())));
        }
        let names: Vec<&str> = CSV_HEADER.split(',').collect();
        let num = |k: usize| -> Result<f64> {
            fields[k]
                .parse()
                .map_err(|_| Error::Parse(format!("line {line_no}, field {}: bad number `{}`", names[k], fields[k])))
        };
        let int = |k: usize| -> Result<u64> {
            fields[k]
                .parse()
                .map_err(|_| Error::Parse(format!("line {line_no}, field {}: bad integer `{}`", names[k], fields[k])))
        };
        let mut elements = [Complex64::new(0.0, 0.0); 4];
        for (k, z) in elements.iter_mut().enumerate() {
            *z = Complex64::new(num(1 + 2 * k)?, num(2 + 2 * k)?);
        }
        Ok(CsvRow {
            param_deg: num(0)?,
            elements,
            trace_distance: num(9)?,
            purity_true: num(10)?,
            purity_measured: num(11)?,
            strength: num(12)?,
            noise_sigma: num(13)?,
            trials: int(14)? as usize,
            seed: int(15)?,
        })
    }
}

/// Writes the header and one row per record, ordered by parameter.
pub fn write_csv<W: Write>(records: &[SweepRecord], mut out: W) -> Result<()> {
    let mut rows: Vec<CsvRow> = records.iter().map(SweepRecord::csv_row).collect();
    rows.sort_by(|a, b| a.param_deg.total_cmp(&b.param_deg));
    let mut text = String::with_capacity(64 * (rows.len() + 1));
    text.push_str(CSV_HEADER);
    text.push('\n');
    for row in rows {
        text.push_str(&row.to_line());
        text.push('\n');
    }
    out.write_all(text.as_bytes())?;
    Ok(())
}

pub fn export_csv(records: &[SweepRecord], path: &Path) -> Result<()> {
    let mut file = std::fs::File::create(path)?;
    write_csv(records, &mut file)?;
    file.flush()?;
    Ok(())
}

pub fn parse_csv<R: Read>(input: R) -> Result<Vec<CsvRow>> {
    let mut lines = BufReader::new(input).lines();
    let header = lines.next().ok_or_else(|| Error::Parse("empty CSV".into()))??;
    if header != CSV_HEADER {
        return Err(Error::Parse("unexpected CSV header".into()));
    }
    lines
        .enumerate()
        .map(|(k, line)| CsvRow::parse(&line?, k + 2))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{DensityMatrix, Polarization};

    fn weak() -> CampaignConfig {
        CampaignConfig::with_strength(250.0, 1e-3).unwrap()
    }

    fn at_deg(path: PathId, deg: f64, cfg: &CampaignConfig) -> SweepRecord {
        let spec = PathSpec::new(path, vec![deg.to_radians()]).unwrap();
        run_sweep(&spec, cfg).unwrap().remove(0)
    }

    #[test]
    fn default_grids() {
        let p1 = PathSpec::default_for(PathId::Path1);
        assert_eq!(p1.grid.len(), 37);
        assert!((p1.grid[1].to_degrees() - 5.0).abs() < 1e-12);
        assert!((p1.grid[36] - PI).abs() < 1e-15);
        let p3 = PathSpec::default_for(PathId::Path3);
        assert_eq!(p3.grid.len(), 19);
        assert!((p3.grid[18] - FRAC_PI_2).abs() < 1e-15);
        assert!(PathSpec::new(PathId::Path3, vec![2.0]).is_err());
        assert!(PathSpec::new(PathId::Path1, vec![-0.1]).is_err());
    }

    #[test]
    fn path1_examples() {
        let cfg = weak();
        let r = at_deg(PathId::Path1, 0.0, &cfg);
        assert!((r.reconstructed.get(0, 0).re - 1.0).abs() < 1e-5);
        let r = at_deg(PathId::Path1, 45.0, &cfg);
        assert!((r.reconstructed.get(0, 1).re + 0.5).abs() < 1e-5);
        assert_eq!(r.method, Method::PointerWeakLimit);
    }

    #[test]
    fn path2_at_45_degrees() {
        let r = at_deg(PathId::Path2, 45.0, &weak());
        let vh = r.reconstructed.get(1, 0);
        assert!((vh.im - 0.5).abs() < 1e-5 && vh.re.abs() < 1e-5);
        let hv = r.reconstructed.get(0, 1);
        assert!((hv.im + 0.5).abs() < 1e-5 && hv.re.abs() < 1e-5);
    }

    #[test]
    fn path3_endpoint() {
        let r = at_deg(PathId::Path3, 0.0, &weak());
        assert!((r.purity_measured - 0.5).abs() < 1e-5);
        assert!(r.trace_distance < 1e-5);
        assert!(sweep_mixed(&PathSpec::default_for(PathId::Path1), &weak()).is_err());
        assert!(sweep_pure_path(&PathSpec::default_for(PathId::Path3), &weak()).is_err());
    }

    #[test]
    fn noiseless_weak_sweeps_track_truth() {
        for path in [PathId::Path1, PathId::Path2, PathId::Path3] {
            for r in run_sweep(&PathSpec::default_for(path), &weak()).unwrap() {
                assert!(r.max_element_error() <= 1e-5, "{path} {}", r.param);
                assert!(r.reconstructed.hermitian_deviation() < 1e-10);
                // Raw estimates are Hermitian and unit-trace up to the bias.
                let bias = 1.0 - (-1e-6f64 / 8.0).exp();
                assert!(r.raw.hermitian_deviation() <= 0.5 * bias + 1e-12);
                assert!((r.raw.trace().re - 1.0).abs() <= bias + 1e-12);
            }
        }
    }

    #[test]
    fn noisy_sweep_is_order_independent() {
        let cfg = CampaignConfig { noise: Some(NoiseModel::default()), seed: 9, ..CampaignConfig::default() };
        let spec = PathSpec::default_for(PathId::Path3);
        let all = sweep_mixed(&spec, &cfg).unwrap();
        let single = PathSpec::new(PathId::Path3, spec.grid.clone()).unwrap();
        assert_eq!(all, sweep_mixed(&single, &cfg).unwrap());
        assert_ne!(all[3].reconstructed, all[3].truth);
    }

    #[test]
    fn projection_flag_yields_physical_states() {
        let cfg = CampaignConfig { noise: Some(NoiseModel::new(0.2, 1, 3).unwrap()), project: true, ..CampaignConfig::default() };
        for r in sweep_pure_path(&PathSpec::default_for(PathId::Path1), &cfg).unwrap() {
            assert!(r.reconstructed.eigenvalues().iter().all(|&v| v >= -1e-12));
            assert!((r.reconstructed.trace().re - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn bias_examples() {
        let h = density_from_pure(&Polarization::H.into());
        let cfg = CampaignConfig::default();
        let rows = run_bias_study(&[("H".into(), h)], &[1e-3, 0.1, 0.704], &cfg).unwrap();
        assert!(rows.windows(2).all(|w| w[0].max_element_error < w[1].max_element_error));

        let mixed = DensityMatrix::maximally_mixed(2).unwrap();
        for row in run_bias_study(&[("I/2".into(), mixed)], &[1e-3, 0.1, 0.704, 1.5], &cfg).unwrap() {
            for (i, j) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
                assert!(row.reconstructed.get(i, j).im.abs() < 1e-10);
            }
        }
        assert!(run_bias_study(&[("H".into(), density_from_pure(&Polarization::H.into()))], &[], &cfg).unwrap().is_empty());
        assert!(run_bias_study(&[], &[0.0], &cfg).is_err());
    }

    #[test]
    fn value_formatting() {
        assert_eq!(format_value(1.0), "1.00000000000");
        assert_eq!(format_value(-0.0), "0.00000000000");
        assert_eq!(format_value(-1e-20), "-0.0000000000000000000100000000000");
        assert_eq!(format_value(123456.789), "123456.789000");
        assert_eq!(format_value(1.234567890123456e15), "1234567890123456");
        for v in [0.1234567890123456, -3.3e-9, 7.0e5, 0.704] {
            let back: f64 = format_value(v).parse().unwrap();
            assert!((back - v).abs() <= 5e-12 * v.abs());
        }
    }

    #[test]
    fn csv_shapes_and_round_trip() {
        let cfg = weak();
        let recs = run_sweep(&PathSpec::evenly_spaced(PathId::Path1, 3).unwrap(), &cfg).unwrap();
        let mut buf = Vec::new();
        write_csv(&recs, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text.lines().count(), 4);
        assert!(text.starts_with(CSV_HEADER));
        assert!(!text.contains('\r'));
        let rows = parse_csv(buf.as_slice()).unwrap();
        for (row, rec) in rows.iter().zip(&recs) {
            let orig = rec.csv_row();
            let close = |a: f64, b: f64| (a - b).abs() <= 1e-11 * b.abs().max(1e-300);
            assert!(close(row.param_deg, orig.param_deg) || orig.param_deg == 0.0);
            for (a, b) in row.elements.iter().zip(&orig.elements) {
                assert!(close(a.re, b.re) || b.re.abs() < 1e-300);
                assert!(close(a.im, b.im) || b.im.abs() < 1e-300);
            }
        }

        let mut empty = Vec::new();
        write_csv(&[], &mut empty).unwrap();
        assert_eq!(String::from_utf8(empty).unwrap(), format!("{CSV_HEADER}\n"));
    }

    #[test]
    fn csv_rows_sorted_by_parameter() {
        let spec = PathSpec::new(PathId::Path1, vec![1.0, 0.5, 2.0]).unwrap();
        let recs = run_sweep(&spec, &weak()).unwrap();
        let mut buf = Vec::new();
        write_csv(&recs, &mut buf).unwrap();
        let rows = parse_csv(buf.as_slice()).unwrap();
        assert!(rows.windows(2).all(|w| w[0].param_deg < w[1].param_deg));
    }
}
