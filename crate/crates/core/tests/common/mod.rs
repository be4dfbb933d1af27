#![allow(dead_code)]

use direct_dm::linalg::CMatrix;
use direct_dm::{Complex64, DensityMatrix, PureState};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use std::f64::consts::PI;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gauss(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Haar-random qubit ket.
pub fn random_pure(rng: &mut ChaCha8Rng) -> PureState {
    PureState::normalized(gauss(rng), gauss(rng)).unwrap()
}

/// Uniform in the Bloch ball.
pub fn random_qubit(rng: &mut ChaCha8Rng) -> DensityMatrix {
    let r = rng.random::<f64>().cbrt();
    let cos_t = 2.0 * rng.random::<f64>() - 1.0;
    let sin_t = (1.0 - cos_t * cos_t).sqrt();
    let phi = 2.0 * PI * rng.random::<f64>();
    bloch(r * sin_t * phi.cos(), r * sin_t * phi.sin(), r * cos_t)
}

pub fn bloch(x: f64, y: f64, z: f64) -> DensityMatrix {
    let c = Complex64::new;
    DensityMatrix::new(CMatrix::from_row_slice(
        2,
        2,
        &[c(0.5 * (1.0 + z), 0.0), c(0.5 * x, -0.5 * y), c(0.5 * x, 0.5 * y), c(0.5 * (1.0 - z), 0.0)],
    ))
    .unwrap()
}

/// Random full-rank state `G G^dagger / Tr` from a complex Ginibre matrix.
pub fn random_density(dim: usize, rng: &mut ChaCha8Rng) -> DensityMatrix {
    let g = CMatrix::from_fn(dim, dim, |_, _| gauss(rng));
    let m = &g * g.adjoint();
    let tr = m.trace();
    let m = m.map(|z| z / tr);
    DensityMatrix::new(direct_dm::linalg::hermitian_part(&m)).unwrap()
}

/// Half pure, half mixed.
pub fn random_state(rng: &mut ChaCha8Rng) -> DensityMatrix {
    if rng.random::<bool>() {
        direct_dm::density_from_pure(&random_pure(rng))
    } else {
        random_qubit(rng)
    }
}

/// `G = exp(-s^2 / 8)`, the overlap of two pointers displaced by `s sigma`.
pub fn overlap(strength: f64) -> f64 {
    (-strength * strength / 8.0).exp()
}
