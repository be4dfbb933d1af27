//! Simulation of the direct density-matrix measurement protocol.
//!
//! A polarization qubit is coupled to two Gaussian spatial pointers by two
//! walk-off crystals (weak projectors `pi_I` on `x` and `pi_D` on `y`), then
//! strongly projected onto `pi_J`. Joint position/momentum moments of the
//! pointers give the element `rho(I, J)` directly.
//!
//! Modules:
//! - [`quantum`]: pure and mixed polarization states, wave plates, metrics.
//! - [`pointer`]: exact finite-strength pointer physics and moments.
//! - [`reconstruction`]: moments to matrix elements, operator identity, tomography baseline.
//! - [`camera`]: emulated camera acquisition, preprocessing and calibration.
//! - [`campaigns`]: path sweeps, bias studies and CSV export.

pub mod camera;
pub mod campaigns;
mod error;
pub mod linalg;
pub mod noise;
pub mod pointer;
pub mod quantum;
pub mod reconstruction;

pub use error::{Error, Result};
pub use num_complex::Complex64;

pub use noise::NoiseModel;
pub use pointer::{
    analytic_moment, apply_strong_projection, apply_weak_shift, expectation_set, grid_moment,
    initial_field, probability_density, Axis, ExpectationSet, GaussianTerm, MomentSpec,
    PointerConfig, PointerField, Quadrature,
};
pub use quantum::{
    density_from_pure, project_to_physical, pure_path_state, purity, spun_mixed_analytic,
    spun_mixed_numeric, trace_distance, waveplate_unitary, DensityMatrix, Polarization,
    Projector, PureState, WaveplateKind, WaveplateSetting,
};
pub use reconstruction::{
    bias_curve, direct_element, direct_matrix, operator_weak_average, qst_reconstruct,
    SequenceSpec, TomographyData,
};
