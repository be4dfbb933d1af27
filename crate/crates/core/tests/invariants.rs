mod common;

use std::f64::consts::{FRAC_PI_2, PI};

use direct_dm::pointer::sequence_field;
use direct_dm::quantum::WaveplateKind;
use direct_dm::reconstruction::QUBIT_ELEMENTS;
use direct_dm::*;
use proptest::prelude::*;

use common::*;

fn qubit_from(x: f64, y: f64, z: f64, r: f64) -> DensityMatrix {
    let n = (x * x + y * y + z * z).sqrt().max(1e-12);
    bloch(r * x / n, r * y / n, r * z / n)
}

fn bloch_strategy() -> impl Strategy<Value = DensityMatrix> {
    (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64, 0.0..=1.0f64).prop_map(|(x, y, z, r)| qubit_from(x, y, z, r))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn trace_distance_is_a_metric(a in bloch_strategy(), b in bloch_strategy(), c in bloch_strategy()) {
        let ab = trace_distance(&a, &b).unwrap();
        let ba = trace_distance(&b, &a).unwrap();
        prop_assert!(ab >= 0.0);
        prop_assert!((ab - ba).abs() < 1e-12);
        prop_assert!(trace_distance(&a, &a).unwrap() < 1e-10);
        let ac = trace_distance(&a, &c).unwrap();
        let cb = trace_distance(&c, &b).unwrap();
        prop_assert!(ab <= ac + cb + 1e-9);
    }

    #[test]
    fn qubit_purity_is_bounded(rho in bloch_strategy()) {
        let p = purity(&rho);
        prop_assert!((0.5 - 1e-10..=1.0 + 1e-10).contains(&p));
    }

    #[test]
    fn spun_state_purity_formula(phi in 0.0..FRAC_PI_2) {
        let expect = 0.5 + 2.0 * (phi.sin() * phi.cos()).powi(2);
        prop_assert!((purity(&spun_mixed_analytic(phi)) - expect).abs() < 1e-12);
    }

    #[test]
    fn waveplates_are_unitary(angle in -10.0..10.0f64, half in any::<bool>()) {
        let setting = if half { WaveplateSetting::half(angle) } else { WaveplateSetting::quarter(angle) };
        let u = waveplate_unitary(setting);
        let err = (u * u.adjoint() - nalgebra::Matrix2::identity()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        prop_assert!(err < 1e-12);
        if setting.kind == WaveplateKind::Half {
            prop_assert!((u - u.adjoint()).iter().all(|z| z.norm() < 1e-12));
        }
    }

    #[test]
    fn spun_numeric_matches_closed_form(phi in 0.0..FRAC_PI_2) {
        let numeric = spun_mixed_numeric(phi, 360).unwrap();
        prop_assert!(numeric.max_abs_diff(&spun_mixed_analytic(phi)).unwrap() < 1e-10);
    }

    #[test]
    fn path_states_match_their_matrix(theta in 0.0..PI, alpha in -2.0..2.0f64) {
        let rho = density_from_pure(&pure_path_state(theta, alpha));
        let (c, s) = (theta.cos(), theta.sin());
        let phase = Complex64::from_polar(1.0, alpha * FRAC_PI_2);
        let expect = [
            [Complex64::new(c * c, 0.0), -c * s * phase.conj()],
            [-c * s * phase, Complex64::new(s * s, 0.0)],
        ];
        for i in 0..2 {
            for j in 0..2 {
                prop_assert!((rho.get(i, j) - expect[i][j]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn weak_shift_preserves_probability(
        x in -1.0..1.0f64, y in -1.0..1.0f64, z in -1.0..1.0f64,
        strength in 1e-3..2.0f64,
        target in 0usize..6,
        on_y in any::<bool>(),
    ) {
        let state = PureState::normalized(Complex64::new(x, y), Complex64::new(z, 0.3)).unwrap();
        let cfg = PointerConfig::from_strength(250.0, strength).unwrap();
        let field = initial_field(&state, &cfg);
        let axis = if on_y { Axis::Y } else { Axis::X };
        let shifted = apply_weak_shift(&field, &Polarization::ALL[target].projector(), axis, cfg.delta(axis)).unwrap();
        prop_assert!((shifted.total_probability() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn raw_estimate_is_hermitian_up_to_strength_bias(rho in bloch_strategy(), strength in 1e-3..1.5f64) {
        let cfg = PointerConfig::from_strength(1.0, strength).unwrap();
        let est = direct_matrix(&rho, &cfg, None).unwrap();
        let bias = 1.0 - overlap(strength);
        prop_assert!(est.hermitian_deviation() <= 0.5 * bias + 1e-12);
        prop_assert!((est.trace().re - 1.0).abs() <= bias + 1e-12);
        prop_assert!(est.trace().im.abs() <= 0.5 * bias + 1e-12);
    }

    #[test]
    fn moments_are_affine_in_the_state(
        a in bloch_strategy(), b in bloch_strategy(), lambda in 0.0..=1.0f64,
        strength in 1e-3..1.5f64, slot in 0usize..4,
    ) {
        let cfg = PointerConfig::from_strength(1.0, strength).unwrap();
        let (i, j) = QUBIT_ELEMENTS[slot];
        let (pi, pj) = (i.projector(), j.projector());
        let mix = DensityMatrix::new(a.matrix().scale(lambda) + b.matrix().scale(1.0 - lambda)).unwrap();
        let lhs = expectation_set(&mix, &pi, &pj, &cfg).unwrap();
        let rhs = expectation_set(&a, &pi, &pj, &cfg).unwrap().scaled(lambda)
            .plus(&expectation_set(&b, &pi, &pj, &cfg).unwrap().scaled(1.0 - lambda));
        for spec in MomentSpec::ALL {
            prop_assert!((lhs.get(spec) - rhs.get(spec)).abs() < 1e-10, "{spec:?}");
        }
    }

    #[test]
    fn tomography_round_trip(rho in bloch_strategy()) {
        let back = qst_reconstruct(&TomographyData::from_state(&rho).unwrap()).unwrap();
        prop_assert!(back.max_abs_diff(&rho).unwrap() < 1e-12);
    }

    #[test]
    fn project_to_physical_yields_states(x in -1.0..1.0f64, y in -1.0..1.0f64, z in -1.0..1.0f64, r in 0.0..1.5f64) {
        // Bloch radius above one gives a negative eigenvalue.
        let n = (x * x + y * y + z * z).sqrt().max(1e-12);
        let c = Complex64::new;
        let (x, y, z) = (r * x / n, r * y / n, r * z / n);
        let m = direct_dm::linalg::CMatrix::from_row_slice(2, 2, &[
            c(0.5 * (1.0 + z), 0.0), c(0.5 * x, -0.5 * y), c(0.5 * x, 0.5 * y), c(0.5 * (1.0 - z), 0.0),
        ]);
        let p = project_to_physical(&DensityMatrix::estimate(m).unwrap()).unwrap();
        prop_assert!(p.eigenvalues().iter().all(|&v| v >= -1e-12));
        prop_assert!((p.trace().re - 1.0).abs() < 1e-12);
        if r <= 1.0 {
            prop_assert!(p.max_abs_diff(&bloch(x, y, z)).unwrap() < 1e-12);
        }
    }
}

#[test]
fn weak_average_identity_with_fourier_middle() {
    let mut rng = rng(21);
    for dim in 2..=4 {
        let middle = Projector::uniform(dim).unwrap();
        for _ in 0..100 {
            let rho = random_density(dim, &mut rng);
            for i in 0..dim {
                for j in 0..dim {
                    let seq = SequenceSpec::computational(dim, i, j, middle.clone()).unwrap();
                    let w = operator_weak_average(&rho, &seq).unwrap();
                    assert!((w - rho.get(i, j) / dim as f64).norm() < 1e-12);
                }
            }
        }
    }
}

#[test]
fn pointer_estimate_converges_to_operator_value() {
    // Convergence for a tomographically complete set fixes the moment
    // sign conventions.
    let mut rng = rng(5);
    let mut states: Vec<DensityMatrix> = Polarization::ALL.iter().map(|p| density_from_pure(&(*p).into())).collect();
    states.extend((0..10).map(|_| random_state(&mut rng)));
    for rho in &states {
        let mut errors = Vec::new();
        for s in [0.08, 0.04, 0.02] {
            let cfg = PointerConfig::from_strength(1.0, s).unwrap();
            let mut worst: f64 = 0.0;
            for (i, j) in QUBIT_ELEMENTS {
                let set = expectation_set(rho, &i.projector(), &j.projector(), &cfg).unwrap();
                let seq = SequenceSpec::qubit(i, j).unwrap();
                let op = operator_weak_average(rho, &seq).unwrap();
                worst = worst.max((direct_element(&set, &cfg).unwrap() - op * 2.0).norm());
            }
            errors.push(worst);
        }
        if errors[0] > 1e-12 {
            for w in errors.windows(2) {
                let ratio = w[0] / w[1];
                assert!((3.6..=4.4).contains(&ratio), "ratio {ratio}");
            }
        }
    }
}

#[test]
fn moment_noise_is_unbiased() {
    let rho = density_from_pure(&pure_path_state(0.6, -0.4));
    let cfg = PointerConfig::from_strength(250.0, 1e-3).unwrap();
    let clean = direct_matrix(&rho, &cfg, None).unwrap();
    let n = 500;
    let samples: Vec<DensityMatrix> = (0..n)
        .map(|seed| direct_matrix(&rho, &cfg, Some(&NoiseModel::new(0.05, 10, seed).unwrap())).unwrap())
        .collect();
    for i in 0..2 {
        for j in 0..2 {
            for part in [|z: Complex64| z.re, |z: Complex64| z.im] {
                let xs: Vec<f64> = samples.iter().map(|m| part(m.get(i, j))).collect();
                let mean = xs.iter().sum::<f64>() / n as f64;
                let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
                let se = (var / n as f64).sqrt();
                let truth = part(clean.get(i, j));
                assert!((mean - truth).abs() <= 3.0 * se + 1e-12, "({i},{j}) mean {mean} truth {truth} se {se}");
            }
        }
    }
}

#[test]
fn sequence_fields_do_not_renormalize() {
    // Passing probability of the final polarizer stays in the moments.
    let cfg = PointerConfig::from_strength(1.0, 0.3).unwrap();
    let f = sequence_field(&Polarization::D.into(), &Polarization::H.projector(), &Polarization::H.projector(), &cfg).unwrap();
    assert!(f.total_probability() < 1.0);
}
