//! Flat `key = value` configuration files. Lengths are in micrometres.

use std::path::Path;

use direct_dm::camera::{
    matched_fourier_scale, CameraFrame, CameraSetup, DEFAULT_CROP_PX, DEFAULT_FILTER_CUTOFF, PIXEL_PITCH_UM,
};
use direct_dm::campaigns::{CampaignConfig, Pipeline};
use direct_dm::{NoiseModel, PointerConfig};

pub const DEFAULT_NOISE_SIGMA: f64 = 0.05;
pub const DEFAULT_TRIALS: usize = 10;

/// Values read from a file, before command-line overrides.
#[derive(Debug, Clone, PartialEq)]
pub struct FileConfig {
    pub sigma_um: f64,
    pub delta_um: f64,
    pub strength: Option<f64>,
    pub noise: Option<f64>,
    pub trials: Option<usize>,
    pub seed: u64,
    pub pitch_um: f64,
    pub width_px: usize,
    pub height_px: usize,
    /// Defaults to the lens matched to `sigma_um`.
    pub fourier_scale: Option<f64>,
    pub filter_cutoff: f64,
    pub background: f64,
    pub camera: bool,
    pub project: bool,
}

impl Default for FileConfig {
    fn default() -> Self {
        Self {
            sigma_um: PointerConfig::EXPERIMENTAL_SIGMA_UM,
            delta_um: PointerConfig::EXPERIMENTAL_DELTA_UM,
            strength: None,
            noise: None,
            trials: None,
            seed: 0,
            pitch_um: PIXEL_PITCH_UM,
            width_px: DEFAULT_CROP_PX,
            height_px: DEFAULT_CROP_PX,
            fourier_scale: None,
            filter_cutoff: DEFAULT_FILTER_CUTOFF,
            background: 0.0,
            camera: false,
            project: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn parse_value<T: std::str::FromStr>(line: usize, key: &str, value: &str) -> Result<T, ConfigError> {
    value
        .parse()
        .map_err(|_| ConfigError(format!("line {line}, field `{key}`: invalid value `{value}`")))
}

fn parse_bool(line: usize, key: &str, value: &str) -> Result<bool, ConfigError> {
    match value {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(ConfigError(format!("line {line}, field `{key}`: expected true or false, got `{value}`"))),
    }
}

pub fn parse_config(text: &str) -> Result<FileConfig, ConfigError> {
    let mut cfg = FileConfig::default();
    let mut saw_delta = false;
    for (idx, raw) in text.lines().enumerate() {
        let n = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| ConfigError(format!("line {n}: expected `key = value`, got `{line}`")))?;
        let (key, value) = (key.trim(), value.trim());
        match key {
            "sigma_um" => cfg.sigma_um = parse_value(n, key, value)?,
            "delta_um" => {
                cfg.delta_um = parse_value(n, key, value)?;
                saw_delta = true;
            }
            "strength" => cfg.strength = Some(parse_value(n, key, value)?),
            "noise" => cfg.noise = Some(parse_value(n, key, value)?),
            "trials" => cfg.trials = Some(parse_value(n, key, value)?),
            "seed" => cfg.seed = parse_value(n, key, value)?,
            "pitch_um" => cfg.pitch_um = parse_value(n, key, value)?,
            "width_px" => cfg.width_px = parse_value(n, key, value)?,
            "height_px" => cfg.height_px = parse_value(n, key, value)?,
            "fourier_scale" => cfg.fourier_scale = Some(parse_value(n, key, value)?),
            "filter_cutoff" => cfg.filter_cutoff = parse_value(n, key, value)?,
            "background" => cfg.background = parse_value(n, key, value)?,
            "camera" => cfg.camera = parse_bool(n, key, value)?,
            "project" => cfg.project = parse_bool(n, key, value)?,
            _ => return Err(ConfigError(format!("line {n}: unknown field `{key}`"))),
        }
        if saw_delta && cfg.strength.is_some() {
            return Err(ConfigError(format!("line {n}: set either `delta_um` or `strength`, not both")));
        }
    }
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<FileConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
    parse_config(&text).map_err(|e| ConfigError(format!("{}: {e}", path.display())))
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub strength: Option<f64>,
    pub noise: Option<f64>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub camera: bool,
    pub project: bool,
}

impl FileConfig {
    /// Noise is enabled when either `noise` or `trials` is set; the other
    /// falls back to 5% or 10 frames.
    pub fn resolve(&self, o: &Overrides) -> Result<CampaignConfig, String> {
        let strength = o.strength.or(self.strength);
        let pointer = match strength {
            Some(s) => PointerConfig::from_strength(self.sigma_um, s),
            None => PointerConfig::symmetric(self.sigma_um, self.delta_um),
        }
        .map_err(|e| e.to_string())?;

        let sigma = o.noise.or(self.noise);
        let trials = o.trials.or(self.trials);
        let seed = o.seed.unwrap_or(self.seed);
        let noise = if sigma.is_some() || trials.is_some() {
            let n = NoiseModel::new(sigma.unwrap_or(DEFAULT_NOISE_SIGMA), trials.unwrap_or(DEFAULT_TRIALS), seed)
                .and_then(|n| n.with_background(self.background))
                .map_err(|e| e.to_string())?;
            Some(n)
        } else {
            None
        };

        let pipeline = if o.camera || self.camera {
            let scale = self.fourier_scale.unwrap_or_else(|| matched_fourier_scale(self.sigma_um));
            let frame = CameraFrame::centered(self.width_px, self.height_px, self.pitch_um)
                .and_then(|f| f.with_fourier_scale(scale))
                .map_err(|e| e.to_string())?;
            if !(self.filter_cutoff > 0.0) {
                return Err(format!("filter_cutoff must be positive, got {}", self.filter_cutoff));
            }
            Pipeline::Camera(CameraSetup { frame, filter_cutoff: self.filter_cutoff, calibrate: true })
        } else {
            Pipeline::Analytic
        };

        Ok(CampaignConfig { pointer, noise, pipeline, project: o.project || self.project, seed, out: None })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let cfg = parse_config("").unwrap();
        assert_eq!(cfg, FileConfig::default());
        let run = cfg.resolve(&Overrides::default()).unwrap();
        assert!((run.pointer.delta_x() - 176.0).abs() < 1e-12);
        assert!((run.pointer.sigma_x() - 250.0).abs() < 1e-12);
        assert!(run.noise.is_none());
    }

    #[test]
    fn delta_from_file() {
        let cfg = parse_config("# alternate crystal\ndelta_um = 175\n").unwrap();
        let run = cfg.resolve(&Overrides::default()).unwrap();
        assert!((run.pointer.delta_x() - 175.0).abs() < 1e-12);
    }

    #[test]
    fn flag_overrides_file() {
        let cfg = parse_config("strength = 0.1\nseed = 4\n").unwrap();
        let o = Overrides { strength: Some(0.704), seed: Some(9), ..Overrides::default() };
        let run = cfg.resolve(&o).unwrap();
        assert!((run.strength() - 0.704).abs() < 1e-12);
        assert_eq!(run.seed, 9);
    }

    #[test]
    fn noise_defaults_fill_in() {
        let run = parse_config("trials = 3").unwrap().resolve(&Overrides::default()).unwrap();
        let n = run.noise.unwrap();
        assert_eq!((n.relative_sigma, n.trials), (0.05, 3));
        let o = Overrides { noise: Some(0.02), ..Overrides::default() };
        let n = FileConfig::default().resolve(&o).unwrap().noise.unwrap();
        assert_eq!((n.relative_sigma, n.trials), (0.02, 10));
    }

    #[test]
    fn fourier_scale_follows_pointer_width() {
        let run = parse_config("sigma_um = 50\ncamera = true").unwrap().resolve(&Overrides::default()).unwrap();
        let Pipeline::Camera(setup) = run.pipeline else { panic!("camera pipeline") };
        assert!((setup.frame.fourier_scale - 1.0 / (2.0 * 50.0 * 90.0)).abs() < 1e-15);
        let run = parse_config("fourier_scale = 1e-4\ncamera = true").unwrap().resolve(&Overrides::default()).unwrap();
        let Pipeline::Camera(setup) = run.pipeline else { panic!("camera pipeline") };
        assert_eq!(setup.frame.fourier_scale, 1e-4);
    }

    #[test]
    fn malformed_lines_are_located() {
        assert_eq!(parse_config("sigma_um = 250\nnoise = abc\n").unwrap_err().0, "line 2, field `noise`: invalid value `abc`");
        assert!(parse_config("bogus = 1").unwrap_err().0.contains("line 1"));
        assert!(parse_config("\n\njust text").unwrap_err().0.starts_with("line 3"));
        assert!(parse_config("delta_um = 1\nstrength = 0.1").is_err());
        assert!(parse_config("camera = maybe").is_err());
    }
}
