mod common;

use direct_dm::camera::io::{read_pgm, write_pgm};
use direct_dm::camera::*;
use direct_dm::campaigns::{run_sweep, CampaignConfig, PathId, PathSpec, Pipeline};
use direct_dm::pointer::sequence_field;
use direct_dm::reconstruction::QUBIT_ELEMENTS;
use direct_dm::*;

fn experimental() -> PointerConfig {
    PointerConfig::experimental()
}

fn unshifted(cfg: &PointerConfig) -> PointerField {
    initial_field(&Polarization::H.into(), cfg)
}

fn shifted(cfg: &PointerConfig, axis: Axis) -> PointerField {
    apply_weak_shift(&unshifted(cfg), &Polarization::H.projector(), axis, cfg.delta(axis)).unwrap()
}

fn acquire(field: &PointerField, frame: &CameraFrame, plane: Plane, noise: Option<&NoiseModel>, stream: u64) -> SyntheticImage {
    let frames = match noise {
        Some(n) => render_frames(&[(1.0, field.clone())], frame, plane, n, stream).unwrap(),
        None => vec![render_image(field, frame, plane, None).unwrap()],
    };
    let bg = background_image(frame, plane, noise.map_or(0.0, |n| n.background_level));
    let processed: Vec<_> = frames.iter().map(|f| preprocess(f, &bg, DEFAULT_FILTER_CUTOFF).unwrap()).collect();
    average_frames(&processed).unwrap()
}

/// The four moments as their dimensionless contributions to the element.
fn terms(set: &ExpectationSet, cfg: &PointerConfig) -> [f64; 4] {
    let (s, d) = (cfg.sigma_x(), cfg.delta_x());
    let k = 2.0 / (d * d);
    [
        k * set.m_xy,
        k * 4.0 * s.powi(4) * set.m_pxpy,
        k * 2.0 * s * s * set.m_pxy,
        k * 2.0 * s * s * set.m_xpy,
    ]
}

#[test]
fn shift_calibration_at_experimental_geometry() {
    let cfg = experimental();
    let frame = CameraFrame::default_crop();
    let reference = acquire(&unshifted(&cfg), &frame, Plane::Image, None, 0);
    for axis in [Axis::X, Axis::Y] {
        let img = acquire(&shifted(&cfg, axis), &frame, Plane::Image, None, 0);
        let d = calibrate_shift(&img, &reference, axis).unwrap();
        assert!((d - 176.0).abs() <= 1.1, "{axis:?}: {d}");
    }
}

#[test]
fn shift_calibration_under_frame_noise() {
    // A full-width strip: the x centroid of a separable pointer does not
    // depend on the y extent, and the strip keeps 100 seeds cheap.
    let cfg = experimental();
    let frame = CameraFrame::centered(DEFAULT_CROP_PX, 96, PIXEL_PITCH_UM).unwrap();
    for seed in 0..100 {
        let noise = NoiseModel::new(0.05, 10, seed).unwrap().with_background(1e-7).unwrap();
        let reference = acquire(&unshifted(&cfg), &frame, Plane::Image, Some(&noise), 0);
        let img = acquire(&shifted(&cfg, Axis::X), &frame, Plane::Image, Some(&noise), 1);
        let d = calibrate_shift(&img, &reference, Axis::X).unwrap();
        assert!((d - 176.0).abs() <= 0.02 * 176.0, "seed {seed}: {d}");
    }
}

#[test]
fn averaging_reduces_frame_noise() {
    let cfg = PointerConfig::symmetric(50.0, 20.0).unwrap();
    let frame = CameraFrame::centered(64, 64, 10.0).unwrap();
    let clean = render_image(&unshifted(&cfg), &frame, Plane::Image, None).unwrap().sum();
    let errors: Vec<f64> = (0..100)
        .map(|seed| {
            let n = NoiseModel::new(0.05, 10, seed).unwrap();
            let frames = render_frames(&[(1.0, unshifted(&cfg))], &frame, Plane::Image, &n, 0).unwrap();
            average_frames(&frames).unwrap().sum() / clean - 1.0
        })
        .collect();
    let rms = (errors.iter().map(|e| e * e).sum::<f64>() / errors.len() as f64).sqrt();
    let expect = 0.05 / 10f64.sqrt();
    assert!(rms > expect / 2.0 && rms < expect * 2.0, "rms {rms}");
}

#[test]
fn momentum_scale_calibration() {
    let cfg = experimental();
    let frame = CameraFrame::default_crop();
    let img = render_image(&unshifted(&cfg), &frame, Plane::FourierFull, None).unwrap();
    let scale = calibrate_momentum_scale(&img, &cfg).unwrap();
    let expect = 1.0 / (2.0 * 250.0 * 90.0);
    assert!((scale - expect).abs() < 1e-6 * expect);

    let wide = frame.with_fourier_scale(expect / 2.0).unwrap();
    let img2 = render_image(&unshifted(&cfg), &wide, Plane::FourierFull, None).unwrap();
    let scale2 = calibrate_momentum_scale(&img2, &cfg).unwrap();
    assert!((scale2 / scale - 0.5).abs() < 1e-6);
}

#[test]
fn fourier_image_moments_match_grid_oracle() {
    let cfg = experimental();
    let frame = CameraFrame::default_crop();
    let field = sequence_field(&Polarization::R.into(), &Polarization::H.projector(), &Polarization::H.projector(), &cfg).unwrap();
    let normalization = 1.0;
    for plane in [Plane::FourierFull, Plane::FourierXOnly, Plane::FourierYOnly] {
        let img = render_image(&field, &frame, plane, None).unwrap().with_normalization(normalization);
        let measured = image_moment(&img).unwrap();
        let oracle = grid_moment(&field, plane.moment_spec(), 8.0, 1.0 / 32.0).unwrap();
        if oracle.abs() > 0.0 {
            let rel = (measured - oracle).abs() / oracle.abs();
            assert!(rel < 5e-3 || (measured - oracle).abs() < 1e-12 * cfg.sigma_px().powi(2), "{plane:?}: {measured} vs {oracle}");
        }
    }
}

#[test]
fn pipeline_moments_match_analytic_at_default_geometry() {
    let cfg = experimental();
    let setup = CameraSetup::default();
    let measured = calibrated_frame(&setup, &cfg).unwrap();
    let states = [
        density_from_pure(&Polarization::D.into()),
        density_from_pure(&pure_path_state(0.4, -1.0)),
        spun_mixed_analytic(0.3),
    ];
    for rho in &states {
        for (k, (i, j)) in QUBIT_ELEMENTS.iter().enumerate() {
            let an = expectation_set(rho, &i.projector(), &j.projector(), &cfg).unwrap();
            let cam = camera_expectation_set(rho, &i.projector(), &j.projector(), &cfg, &setup, &measured, None, k as u64).unwrap();
            for (a, c) in terms(&an, &cfg).into_iter().zip(terms(&cam, &cfg)) {
                if a.abs() > 1e-6 {
                    assert!(((c - a) / a).abs() < 5e-3, "{i}{j}: {c} vs {a}");
                } else {
                    assert!((c - a).abs() < 1e-6, "{i}{j}: {c} vs {a}");
                }
            }
        }
    }
}

#[test]
fn camera_sweeps_agree_with_analytic_sweeps() {
    let analytic = CampaignConfig::default();
    let camera = CampaignConfig { pipeline: Pipeline::Camera(CameraSetup::default()), ..CampaignConfig::default() };
    for (path, deg) in [(PathId::Path1, 30.0f64), (PathId::Path2, 60.0), (PathId::Path3, 20.0)] {
        let spec = PathSpec::new(path, vec![deg.to_radians()]).unwrap();
        let a = run_sweep(&spec, &analytic).unwrap().remove(0);
        let c = run_sweep(&spec, &camera).unwrap().remove(0);
        assert!(c.raw.max_abs_diff(&a.raw).unwrap() < 0.01, "path {path}");
    }
}

#[test]
fn pgm_round_trip_at_sensor_size() {
    let cfg = experimental();
    let img = render_image(&shifted(&cfg, Axis::X), &CameraFrame::full_sensor(), Plane::Image, None).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("frame.pgm");
    io::save_pgm(&img, &path).unwrap();
    let back = io::load_pgm(&path).unwrap();
    assert_eq!(back.frame, img.frame);
    let mut again = Vec::new();
    write_pgm(&back, &mut again).unwrap();
    assert_eq!(again, std::fs::read(&path).unwrap());
    assert_eq!(read_pgm(again.as_slice()).unwrap(), back);
}

#[test]
fn noisy_renders_are_reproducible() {
    let cfg = experimental();
    let frame = CameraFrame::centered(256, 256, 8.8).unwrap();
    let n = NoiseModel::new(0.05, 4, 77).unwrap().with_background(1e-6).unwrap();
    let a = render_frames(&[(1.0, shifted(&cfg, Axis::Y))], &frame, Plane::FourierXOnly, &n, 3).unwrap();
    let b = render_frames(&[(1.0, shifted(&cfg, Axis::Y))], &frame, Plane::FourierXOnly, &n, 3).unwrap();
    assert!(a.iter().zip(&b).all(|(x, y)| x.pixels.iter().zip(&y.pixels).all(|(p, q)| p.to_bits() == q.to_bits())));
}
