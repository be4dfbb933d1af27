//! Emulated camera acquisition.
//!
//! Images are sampled at pixel centres (midpoint rule) from the exact pointer
//! densities. Image-plane pixels map to position through the pixel pitch;
//! Fourier-plane pixels map to momentum through `fourier_scale`, the
//! momentum per micrometre on the sensor set by the Fourier lens.

mod filter;
pub mod io;

use rand::Rng;
use rayon::prelude::*;

use crate::noise::NoiseModel;
use crate::pointer::{
    axis_amplitude, initial_field, qubit_ensemble, sequence_field, Axis, ExpectationSet, MomentSpec, PointerConfig,
    PointerField, Quadrature,
};
use crate::quantum::{DensityMatrix, Polarization, Projector, PureState};
use crate::reconstruction::{matrix_from_sets, QUBIT_ELEMENTS};
use crate::{Error, Result};

pub use filter::raised_cosine;

pub const SENSOR_WIDTH_PX: usize = 2560;
pub const SENSOR_HEIGHT_PX: usize = 1920;
pub const PIXEL_PITCH_UM: f64 = 2.2;
/// Measured Fourier-plane width of the unshifted pointer.
pub const FOURIER_WIDTH_UM: f64 = 90.0;
/// Square crop used for pipeline runs. Wide enough to hold the shifted
/// 250 um pointer out to about 6 sigma at 2.2 um pitch.
pub const DEFAULT_CROP_PX: usize = 1536;
pub const DEFAULT_FILTER_CUTOFF: f64 = 0.5;

/// Sensor geometry. `origin_*` is the unshifted-pointer centre in sensor
/// coordinates (micrometres from the sensor corner).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraFrame {
    pub width_px: usize,
    pub height_px: usize,
    pub pitch_um: f64,
    pub origin_x_um: f64,
    pub origin_y_um: f64,
    /// Momentum (1/um) per micrometre on the sensor in Fourier planes.
    pub fourier_scale: f64,
}

impl CameraFrame {
    pub fn new(width_px: usize, height_px: usize, pitch_um: f64, origin_x_um: f64, origin_y_um: f64) -> Result<Self> {
        Self {
            width_px,
            height_px,
            pitch_um,
            origin_x_um,
            origin_y_um,
            fourier_scale: default_fourier_scale(),
        }
        .validated()
    }

    /// A `width x height` frame with the origin at the sensor centre.
    pub fn centered(width_px: usize, height_px: usize, pitch_um: f64) -> Result<Self> {
        Self::new(width_px, height_px, pitch_um, 0.5 * width_px as f64 * pitch_um, 0.5 * height_px as f64 * pitch_um)
    }

    pub fn full_sensor() -> Self {
        Self::centered(SENSOR_WIDTH_PX, SENSOR_HEIGHT_PX, PIXEL_PITCH_UM).expect("valid sensor")
    }

    pub fn default_crop() -> Self {
        Self::centered(DEFAULT_CROP_PX, DEFAULT_CROP_PX, PIXEL_PITCH_UM).expect("valid crop")
    }

    pub fn with_fourier_scale(mut self, scale: f64) -> Result<Self> {
        self.fourier_scale = scale;
        self.validated()
    }

    pub fn with_origin(mut self, x_um: f64, y_um: f64) -> Result<Self> {
        self.origin_x_um = x_um;
        self.origin_y_um = y_um;
        self.validated()
    }

    fn validated(self) -> Result<Self> {
        if self.width_px == 0 || self.height_px == 0 {
            return Err(Error::InvalidParameter("sensor dimensions must be positive".into()));
        }
        if !(self.pitch_um > 0.0) || !self.pitch_um.is_finite() {
            return Err(Error::InvalidParameter(format!("pitch must be positive, got {}", self.pitch_um)));
        }
        if !(self.fourier_scale > 0.0) || !self.fourier_scale.is_finite() {
            return Err(Error::InvalidParameter(format!("fourier scale must be positive, got {}", self.fourier_scale)));
        }
        let (w, h) = self.extent_um();
        if !(0.0..=w).contains(&self.origin_x_um) || !(0.0..=h).contains(&self.origin_y_um) {
            return Err(Error::InvalidParameter(format!(
                "origin ({}, {}) um outside the {w} x {h} um sensor",
                self.origin_x_um, self.origin_y_um
            )));
        }
        Ok(self)
    }

    pub fn extent_um(&self) -> (f64, f64) {
        (self.width_px as f64 * self.pitch_um, self.height_px as f64 * self.pitch_um)
    }

    /// Pixel-centre coordinate relative to the origin, in micrometres.
    pub fn offset_x(&self, ix: usize) -> f64 {
        (ix as f64 + 0.5) * self.pitch_um - self.origin_x_um
    }

    pub fn offset_y(&self, iy: usize) -> f64 {
        (iy as f64 + 0.5) * self.pitch_um - self.origin_y_um
    }

    pub fn pixel_count(&self) -> usize {
        self.width_px * self.height_px
    }
}

/// Lens scale mapping the 250 um pointer's momentum width onto 90 um.
pub fn default_fourier_scale() -> f64 {
    matched_fourier_scale(PointerConfig::EXPERIMENTAL_SIGMA_UM)
}

/// Lens scale that images a pointer of width `sigma_um` onto 90 um in the Fourier plane.
pub fn matched_fourier_scale(sigma_um: f64) -> f64 {
    1.0 / (2.0 * sigma_um * FOURIER_WIDTH_UM)
}

/// Imaging configuration: which pointer quadrature each sensor axis records.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Plane {
    Image,
    FourierFull,
    /// Cylindrical lens transforming `x` only.
    FourierXOnly,
    /// Cylindrical lens transforming `y` only.
    FourierYOnly,
}

impl Plane {
    pub const ALL: [Plane; 4] = [Plane::Image, Plane::FourierFull, Plane::FourierXOnly, Plane::FourierYOnly];

    pub fn quadratures(self) -> (Quadrature, Quadrature) {
        match self {
            Plane::Image => (Quadrature::Position, Quadrature::Position),
            Plane::FourierFull => (Quadrature::Momentum, Quadrature::Momentum),
            Plane::FourierXOnly => (Quadrature::Momentum, Quadrature::Position),
            Plane::FourierYOnly => (Quadrature::Position, Quadrature::Momentum),
        }
    }

    pub fn moment_spec(self) -> MomentSpec {
        let (x_operator, y_operator) = self.quadratures();
        MomentSpec { x_operator, y_operator }
    }

    pub fn name(self) -> &'static str {
        match self {
            Plane::Image => "image",
            Plane::FourierFull => "fourier_full",
            Plane::FourierXOnly => "fourier_x_only",
            Plane::FourierYOnly => "fourier_y_only",
        }
    }

    pub fn from_name(s: &str) -> Result<Self> {
        Plane::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown plane `{s}`")))
    }
}

/// A rendered or processed camera exposure.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticImage {
    pub frame: CameraFrame,
    /// Row-major, `height_px` rows of `width_px` values.
    pub pixels: Vec<f64>,
    pub plane: Plane,
    /// Pixel sum of the reference exposure (pointer before any measurement).
    pub normalization: f64,
}

impl SyntheticImage {
    pub fn new(frame: CameraFrame, pixels: Vec<f64>, plane: Plane, normalization: f64) -> Result<Self> {
        if pixels.len() != frame.pixel_count() {
            return Err(Error::FrameMismatch(format!(
                "{} pixels for a {}x{} frame",
                pixels.len(),
                frame.width_px,
                frame.height_px
            )));
        }
        if pixels.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite pixel value".into()));
        }
        Ok(Self { frame, pixels, plane, normalization })
    }

    pub fn get(&self, ix: usize, iy: usize) -> f64 {
        self.pixels[iy * self.frame.width_px + ix]
    }

    pub fn sum(&self) -> f64 {
        row_sums(self, |_, _| 1.0).iter().sum()
    }

    pub fn with_normalization(mut self, normalization: f64) -> Self {
        self.normalization = normalization;
        self
    }

    pub fn with_frame(mut self, frame: CameraFrame) -> Result<Self> {
        if frame.width_px != self.frame.width_px || frame.height_px != self.frame.height_px {
            return Err(Error::FrameMismatch("frame dimensions differ".into()));
        }
        self.frame = frame;
        Ok(self)
    }

    /// Sensor-axis coordinate of pixel `i` relative to the origin, in the
    /// quadrature recorded on that axis (um or 1/um).
    fn coordinate(&self, axis: Axis, i: usize) -> f64 {
        let (qx, qy) = self.plane.quadratures();
        let (offset, q) = match axis {
            Axis::X => (self.frame.offset_x(i), qx),
            Axis::Y => (self.frame.offset_y(i), qy),
        };
        match q {
            Quadrature::Position => offset,
            Quadrature::Momentum => offset * self.frame.fourier_scale,
        }
    }

    /// Intensity-weighted mean sensor offset `(x, y)` in micrometres.
    pub fn centroid(&self) -> Result<(f64, f64)> {
        let total = self.sum();
        if !(total > 0.0) {
            return Err(Error::Degenerate("image has no intensity".into()));
        }
        let f = self.frame;
        let sx: f64 = row_sums(self, |ix, _| f.offset_x(ix)).iter().sum();
        let sy: f64 = row_sums(self, |_, iy| f.offset_y(iy)).iter().sum();
        Ok((sx / total, sy / total))
    }
}

/// Per-row sums of `weight(ix, iy) * pixel`, rows in index order.
fn row_sums<F>(image: &SyntheticImage, weight: F) -> Vec<f64>
where
    F: Fn(usize, usize) -> f64 + Sync,
{
    let w = image.frame.width_px;
    image
        .pixels
        .par_chunks(w)
        .enumerate()
        .map(|(iy, row)| row.iter().enumerate().map(|(ix, v)| weight(ix, iy) * v).sum())
        .collect()
}

/// Realized noise of one frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameNoise {
    pub gain: f64,
    pub background: f64,
}

impl FrameNoise {
    pub fn draw<R: Rng + ?Sized>(model: &NoiseModel, rng: &mut R) -> Self {
        Self { gain: model.gain(rng), background: model.background_level }
    }
}

/// Warning text when part of a pointer term lies within 3 sigma of (or
/// beyond) the sensor edge.
pub fn clipping_warning(field: &PointerField, frame: &CameraFrame, plane: Plane) -> Option<String> {
    let cfg = field.config();
    let (qx, qy) = plane.quadratures();
    let (w, h) = frame.extent_um();
    let check = |axis: Axis, q: Quadrature, origin: f64, size: f64| -> Option<String> {
        let (lo, hi) = match q {
            Quadrature::Position => {
                let s = 3.0 * cfg.sigma(axis);
                let centers = field.branches().iter().flat_map(|b| b.terms()).map(|t| match axis {
                    Axis::X => t.center_x,
                    Axis::Y => t.center_y,
                });
                centers.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), c| (lo.min(c - s), hi.max(c + s)))
            }
            Quadrature::Momentum => {
                let s = 3.0 * 0.5 / cfg.sigma(axis) / frame.fourier_scale;
                (-s, s)
            }
        };
        (lo.is_finite() && (origin + lo < 0.0 || origin + hi > size))
            .then(|| format!("pointer extends past the sensor on {axis:?} in the {} plane", plane.name()))
    };
    check(Axis::X, qx, frame.origin_x_um, w).or_else(|| check(Axis::Y, qy, frame.origin_y_um, h))
}

/// Renders an incoherent ensemble `sum_k w_k |psi_k|^2`.
pub fn render_ensemble(
    components: &[(f64, PointerField)],
    frame: &CameraFrame,
    plane: Plane,
    noise: Option<FrameNoise>,
) -> Result<SyntheticImage> {
    for (_, field) in components {
        if let Some(msg) = clipping_warning(field, frame, plane) {
            log::warn!("{msg}");
        }
    }
    let (qx, qy) = plane.quadratures();
    let jac_x = if qx == Quadrature::Momentum { frame.fourier_scale } else { 1.0 };
    let jac_y = if qy == Quadrature::Momentum { frame.fourier_scale } else { 1.0 };
    let area = frame.pitch_um * frame.pitch_um * jac_x * jac_y;
    let to_coord = |offset: f64, q: Quadrature| match q {
        Quadrature::Position => offset,
        Quadrature::Momentum => offset * frame.fourier_scale,
    };
    let us: Vec<f64> = (0..frame.width_px).map(|i| to_coord(frame.offset_x(i), qx)).collect();
    let vs: Vec<f64> = (0..frame.height_px).map(|j| to_coord(frame.offset_y(j), qy)).collect();

    // One (weight, x-table, y-table) per branch of every component.
    let mut tables = Vec::new();
    for (w, field) in components {
        let cfg = field.config();
        for b in field.branches() {
            let ax: Vec<Vec<_>> = b
                .terms()
                .iter()
                .map(|t| us.iter().map(|&u| t.coeff * axis_amplitude(qx, u, t.center_x, cfg.sigma_x())).collect())
                .collect();
            let ay: Vec<Vec<_>> = b
                .terms()
                .iter()
                .map(|t| vs.iter().map(|&v| axis_amplitude(qy, v, t.center_y, cfg.sigma_y())).collect())
                .collect();
            tables.push((*w, ax, ay));
        }
    }

    let (gain, background) = noise.map_or((1.0, 0.0), |n| (n.gain, n.background));
    let width = frame.width_px;
    let mut pixels = vec![0.0; frame.pixel_count()];
    pixels.par_chunks_mut(width).enumerate().for_each(|(iy, row)| {
        for (ix, px) in row.iter_mut().enumerate() {
            let mut density = 0.0;
            for (w, ax, ay) in &tables {
                let amp: num_complex::Complex64 = ax.iter().zip(ay).map(|(a, b)| a[ix] * b[iy]).sum();
                density += w * amp.norm_sqr();
            }
            *px = gain * density * area + background;
        }
    });
    SyntheticImage::new(*frame, pixels, plane, 1.0)
}

/// Renders one exposure. With a noise model, the frame draws its gain from
/// stream 0 of the model's seed.
pub fn render_image(field: &PointerField, frame: &CameraFrame, plane: Plane, noise: Option<&NoiseModel>) -> Result<SyntheticImage> {
    let frame_noise = noise.map(|n| FrameNoise::draw(n, &mut n.rng(0)));
    render_ensemble(&[(1.0, field.clone())], frame, plane, frame_noise)
}

/// `noise.trials` exposures with gains drawn in order from `stream`.
pub fn render_frames(
    components: &[(f64, PointerField)],
    frame: &CameraFrame,
    plane: Plane,
    noise: &NoiseModel,
    stream: u64,
) -> Result<Vec<SyntheticImage>> {
    let mut rng = noise.rng(stream);
    let draws: Vec<FrameNoise> = (0..noise.trials).map(|_| FrameNoise::draw(noise, &mut rng)).collect();
    // Frame noise is a global gain plus offset, so the clean image is
    // rendered once and each frame derived from it.
    let clean = render_ensemble(components, frame, plane, None)?;
    Ok(draws
        .into_iter()
        .map(|n| SyntheticImage {
            pixels: clean.pixels.iter().map(|v| n.gain * v + n.background).collect(),
            ..clean.clone()
        })
        .collect())
}

/// A blocked-laser exposure: constant `level` everywhere.
pub fn background_image(frame: &CameraFrame, plane: Plane, level: f64) -> SyntheticImage {
    SyntheticImage { frame: *frame, pixels: vec![level; frame.pixel_count()], plane, normalization: 1.0 }
}

fn check_same_frame(a: &SyntheticImage, b: &SyntheticImage) -> Result<()> {
    if a.frame.width_px != b.frame.width_px || a.frame.height_px != b.frame.height_px {
        return Err(Error::FrameMismatch(format!(
            "{}x{} vs {}x{}",
            a.frame.width_px, a.frame.height_px, b.frame.width_px, b.frame.height_px
        )));
    }
    if a.frame.pitch_um != b.frame.pitch_um || a.frame.origin_x_um != b.frame.origin_x_um || a.frame.origin_y_um != b.frame.origin_y_um {
        return Err(Error::FrameMismatch("pitch or origin differ".into()));
    }
    Ok(())
}

/// Background subtraction, raised-cosine low-pass at `filter_cutoff` (in
/// units of Nyquist) and clipping of negative pixels.
pub fn preprocess(image: &SyntheticImage, background: &SyntheticImage, filter_cutoff: f64) -> Result<SyntheticImage> {
    check_same_frame(image, background)?;
    if !(filter_cutoff > 0.0) || !filter_cutoff.is_finite() {
        return Err(Error::InvalidParameter(format!("filter cutoff must be positive, got {filter_cutoff}")));
    }
    let mut pixels: Vec<f64> = image.pixels.iter().zip(&background.pixels).map(|(a, b)| a - b).collect();
    if pixels.iter().any(|&v| v != 0.0) {
        filter::low_pass(&mut pixels, image.frame.width_px, image.frame.height_px, filter_cutoff);
    }
    for v in pixels.iter_mut() {
        *v = v.max(0.0);
    }
    Ok(SyntheticImage { pixels, ..image.clone() })
}

/// Pixel-wise mean of matching frames.
pub fn average_frames(images: &[SyntheticImage]) -> Result<SyntheticImage> {
    let first = images.first().ok_or_else(|| Error::InvalidParameter("no frames to average".into()))?;
    let mut acc = vec![0.0; first.pixels.len()];
    for img in images {
        check_same_frame(first, img)?;
        if img.plane != first.plane {
            return Err(Error::FrameMismatch("frames from different planes".into()));
        }
        for (a, v) in acc.iter_mut().zip(&img.pixels) {
            *a += v;
        }
    }
    let n = images.len() as f64;
    for a in acc.iter_mut() {
        *a /= n;
    }
    Ok(SyntheticImage { pixels: acc, ..first.clone() })
}

/// `sum (u_i - u0)(v_j - v0) I_ij / normalization`, with Fourier axes
/// converted to momentum.
pub fn image_moment(image: &SyntheticImage) -> Result<f64> {
    if !(image.normalization > 0.0) || !image.normalization.is_finite() {
        return Err(Error::Degenerate("zero total reference intensity".into()));
    }
    let xs: Vec<f64> = (0..image.frame.width_px).map(|i| image.coordinate(Axis::X, i)).collect();
    let ys: Vec<f64> = (0..image.frame.height_px).map(|j| image.coordinate(Axis::Y, j)).collect();
    let total: f64 = row_sums(image, |ix, iy| xs[ix] * ys[iy]).iter().sum();
    Ok(total / image.normalization)
}

/// Centroid difference between two exposures along `axis`, in micrometres.
pub fn calibrate_shift(shifted: &SyntheticImage, reference: &SyntheticImage, axis: Axis) -> Result<f64> {
    check_same_frame(shifted, reference)?;
    let (sx, sy) = shifted.centroid()?;
    let (rx, ry) = reference.centroid()?;
    Ok(match axis {
        Axis::X => sx - rx,
        Axis::Y => sy - ry,
    })
}

/// Sensor position of the unshifted pointer, as absolute sensor coordinates.
pub fn calibrate_origin(reference: &SyntheticImage) -> Result<(f64, f64)> {
    let (cx, cy) = reference.centroid()?;
    Ok((reference.frame.origin_x_um + cx, reference.frame.origin_y_um + cy))
}

/// Momentum per sensor micrometre, from the width of the unshifted
/// pointer's full Fourier image: `width * scale = 1 / (2 sigma)`.
pub fn calibrate_momentum_scale(fourier_reference: &SyntheticImage, config: &PointerConfig) -> Result<f64> {
    if fourier_reference.plane != Plane::FourierFull {
        return Err(Error::InvalidParameter("momentum calibration needs a fourier_full reference".into()));
    }
    let img = fourier_reference;
    let total = img.sum();
    if !(total > 0.0) {
        return Err(Error::Degenerate("reference image has no intensity".into()));
    }
    let (cx, cy) = img.centroid()?;
    let f = img.frame;
    let central = |power: i32, axis: Axis| -> f64 {
        let s: f64 = row_sums(img, |ix, iy| match axis {
            Axis::X => (f.offset_x(ix) - cx).powi(power),
            Axis::Y => (f.offset_y(iy) - cy).powi(power),
        })
        .iter()
        .sum();
        s / total
    };
    let (vx, vy) = (central(2, Axis::X), central(2, Axis::Y));
    let (wx, wy) = (vx.sqrt(), vy.sqrt());
    for (axis, var) in [(Axis::X, vx), (Axis::Y, vy)] {
        let kurtosis = central(4, axis) / (var * var) - 3.0;
        if !kurtosis.is_finite() || kurtosis.abs() > 0.3 {
            return Err(Error::NonGaussian(format!("excess kurtosis {kurtosis:.3} on {axis:?}")));
        }
    }
    let sx = config.sigma_px() / wx;
    let sy = config.sigma_py() / wy;
    if (sx - sy).abs() > 0.05 * 0.5 * (sx + sy) {
        return Err(Error::NonGaussian(format!("x and y widths disagree ({wx:.3} vs {wy:.3} um)")));
    }
    Ok(0.5 * (sx + sy))
}

/// Camera and processing settings for the emulated acquisition chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraSetup {
    pub frame: CameraFrame,
    pub filter_cutoff: f64,
    /// Recalibrate origin and momentum scale from reference exposures
    /// instead of trusting `frame`.
    pub calibrate: bool,
}

impl Default for CameraSetup {
    fn default() -> Self {
        Self { frame: CameraFrame::default_crop(), filter_cutoff: DEFAULT_FILTER_CUTOFF, calibrate: true }
    }
}

/// Frame with origin and Fourier scale measured from reference exposures of
/// the unshifted pointer.
pub fn calibrated_frame(setup: &CameraSetup, config: &PointerConfig) -> Result<CameraFrame> {
    if !setup.calibrate {
        return Ok(setup.frame);
    }
    let unshifted = initial_field(&PureState::from(Polarization::H), config);
    let image = render_image(&unshifted, &setup.frame, Plane::Image, None)?;
    let (x0, y0) = calibrate_origin(&image)?;
    let fourier = render_image(&unshifted, &setup.frame, Plane::FourierFull, None)?;
    let scale = calibrate_momentum_scale(&fourier, config)?;
    setup.frame.with_origin(x0, y0)?.with_fourier_scale(scale)
}

/// Moments of one `(first, final)` sequence measured through the camera
/// chain. With noise, plane `p` uses stream `4 * stream + p`.
pub fn camera_expectation_set(
    rho: &DensityMatrix,
    first: &Projector,
    final_proj: &Projector,
    config: &PointerConfig,
    setup: &CameraSetup,
    measured: &CameraFrame,
    noise: Option<&NoiseModel>,
    stream: u64,
) -> Result<ExpectationSet> {
    let ensemble = qubit_ensemble(rho)?;
    let mut fields = Vec::with_capacity(ensemble.len());
    let mut references = Vec::with_capacity(ensemble.len());
    for (w, state) in &ensemble {
        fields.push((*w, sequence_field(state, first, final_proj, config)?));
        references.push((*w, initial_field(state, config)));
    }
    let normalization = render_ensemble(&references, &setup.frame, Plane::Image, None)?.sum();

    let mut set = ExpectationSet::default();
    for (p, plane) in Plane::ALL.into_iter().enumerate() {
        let (frames, level) = match noise {
            Some(n) => (render_frames(&fields, &setup.frame, plane, n, 4 * stream + p as u64)?, n.background_level),
            None => (vec![render_ensemble(&fields, &setup.frame, plane, None)?], 0.0),
        };
        let background = background_image(&setup.frame, plane, level);
        let processed = frames
            .iter()
            .map(|f| preprocess(f, &background, setup.filter_cutoff))
            .collect::<Result<Vec<_>>>()?;
        let averaged = average_frames(&processed)?
            .with_frame(*measured)?
            .with_normalization(normalization);
        set.set(plane.moment_spec(), image_moment(&averaged)?);
    }
    Ok(set)
}

/// Camera-emulated counterpart of [`crate::direct_matrix`].
pub fn camera_direct_matrix(
    rho: &DensityMatrix,
    config: &PointerConfig,
    setup: &CameraSetup,
    noise: Option<&NoiseModel>,
) -> Result<DensityMatrix> {
    if rho.dim() != 2 {
        return Err(Error::UnsupportedDimension(rho.dim()));
    }
    let measured = calibrated_frame(setup, config)?;
    let sets = QUBIT_ELEMENTS
        .iter()
        .enumerate()
        .map(|(k, (i, j))| {
            camera_expectation_set(rho, &i.projector(), &j.projector(), config, setup, &measured, noise, k as u64)
        })
        .collect::<Result<Vec<_>>>()?;
    let sets: [ExpectationSet; 4] = sets.try_into().expect("four element slots");
    matrix_from_sets(&sets, config)
}
