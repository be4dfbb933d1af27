//! From pointer moments to density-matrix elements, plus the operator-level
//! identity and a six-projector tomography baseline.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::linalg::{self, CMatrix};
use crate::noise::NoiseModel;
use crate::pointer::{expectation_set, ExpectationSet, MomentSpec, PointerConfig};
use crate::quantum::{DensityMatrix, Polarization, Projector};
use crate::{Error, Result};

/// Strengths at or below this count as the weak-limit regime when tagging
/// reconstructed elements.
pub const WEAK_LIMIT_STRENGTH: f64 = 1e-2;

/// The sequence `pi_final pi_middle pi_first`.
///
/// `middle` must be unbiased with respect to the basis that `first` and
/// `final` belong to: `|<a|b0>| = 1/sqrt(d)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceSpec {
    first: Projector,
    middle: Projector,
    final_proj: Projector,
}

impl SequenceSpec {
    pub fn new(first: Projector, middle: Projector, final_proj: Projector) -> Result<Self> {
        let d = middle.dim();
        for p in [&first, &final_proj] {
            if p.dim() != d {
                return Err(Error::DimensionMismatch(p.dim(), d));
            }
            check_unbiased(p, &middle)?;
        }
        Ok(Self { first, middle, final_proj })
    }

    /// `pi_j pi_b0 pi_i` on computational-basis states `|i>`, `|j>`, checking
    /// `middle` against every basis element.
    pub fn computational(dim: usize, i: usize, j: usize, middle: Projector) -> Result<Self> {
        if middle.dim() != dim {
            return Err(Error::DimensionMismatch(middle.dim(), dim));
        }
        for k in 0..dim {
            check_unbiased(&Projector::basis(dim, k)?, &middle)?;
        }
        Self::new(Projector::basis(dim, i)?, middle, Projector::basis(dim, j)?)
    }

    /// `(I, D, J)` for a polarization qubit.
    pub fn qubit(first: Polarization, final_pol: Polarization) -> Result<Self> {
        Self::new(first.projector(), Polarization::D.projector(), final_pol.projector())
    }

    pub fn dim(&self) -> usize {
        self.middle.dim()
    }

    pub fn first(&self) -> &Projector {
        &self.first
    }

    pub fn middle(&self) -> &Projector {
        &self.middle
    }

    pub fn final_projector(&self) -> &Projector {
        &self.final_proj
    }
}

fn check_unbiased(a: &Projector, b: &Projector) -> Result<()> {
    let found = a.ket().dotc(b.ket()).norm();
    let expected = 1.0 / (b.dim() as f64).sqrt();
    if (found - expected).abs() > 1e-10 {
        return Err(Error::NotComplementary { found, expected });
    }
    Ok(())
}

/// `Tr[pi_j pi_b0 pi_i rho]`, which equals `rho(i, j) / d`.
pub fn operator_weak_average(rho: &DensityMatrix, seq: &SequenceSpec) -> Result<Complex64> {
    if rho.dim() != seq.dim() {
        return Err(Error::DimensionMismatch(rho.dim(), seq.dim()));
    }
    let product = seq.final_proj.operator() * seq.middle.operator() * seq.first.operator() * rho.matrix();
    Ok(linalg::trace(&product))
}

/// `rho(I, J)` from the four pointer moments.
///
/// `Re = 2/(dx dy) (<xy> - 4 sx^2 sy^2 <px py>)` and
/// `Im = 2/(dx dy) (2 sx^2 <px y> + 2 sy^2 <x py>)`. With equal widths and
/// shifts, `4 s^4 = s^2/sp^2` and `2 s^2 = s/sp`, which is the standard form;
/// unequal widths or shifts are an extension of it.
pub fn direct_element(set: &ExpectationSet, config: &PointerConfig) -> Result<Complex64> {
    let dd = config.delta_x() * config.delta_y();
    if !(dd > 0.0) || !dd.is_finite() {
        return Err(Error::InvalidShift(dd));
    }
    Ok(set.lowering_product(config) * (2.0 / dd))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Operator,
    PointerWeakLimit,
    PointerFinite,
}

impl Method {
    pub fn for_strength(strength: f64) -> Self {
        if strength <= WEAK_LIMIT_STRENGTH {
            Method::PointerWeakLimit
        } else {
            Method::PointerFinite
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReconstructedElement {
    pub value: Complex64,
    pub row: usize,
    pub col: usize,
    pub method: Method,
    /// `delta / sigma`; zero for the operator method.
    pub strength: f64,
}

/// The four `(I, J)` element slots in row-major order.
pub const QUBIT_ELEMENTS: [(Polarization, Polarization); 4] = [
    (Polarization::H, Polarization::H),
    (Polarization::H, Polarization::V),
    (Polarization::V, Polarization::H),
    (Polarization::V, Polarization::V),
];

fn index_of(p: Polarization) -> Result<usize> {
    match p {
        Polarization::H => Ok(0),
        Polarization::V => Ok(1),
        other => Err(Error::InvalidParameter(format!("element labels must be H or V, got {other}"))),
    }
}

/// Multiplies each moment by the trial-averaged noise gain. Draw order is
/// trial-major, then moment order `xy, pxpy, pxy, xpy`.
pub fn apply_moment_noise(set: &ExpectationSet, noise: &NoiseModel, stream: u64) -> ExpectationSet {
    let mut rng = noise.rng(stream);
    let mut gains = [0.0; 4];
    for _ in 0..noise.trials {
        for g in gains.iter_mut() {
            *g += noise.gain(&mut rng);
        }
    }
    let mut out = ExpectationSet::default();
    for (spec, g) in MomentSpec::ALL.into_iter().zip(gains) {
        out.set(spec, set.get(spec) * g / noise.trials as f64);
    }
    out
}

/// One pointer-reconstructed element `rho(row, col)`.
pub fn reconstruct_element(
    rho: &DensityMatrix,
    row: Polarization,
    col: Polarization,
    config: &PointerConfig,
    noise: Option<&NoiseModel>,
) -> Result<ReconstructedElement> {
    let (r, c) = (index_of(row)?, index_of(col)?);
    let mut set = expectation_set(rho, &row.projector(), &col.projector(), config)?;
    if let Some(n) = noise {
        set = apply_moment_noise(&set, n, (2 * r + c) as u64);
    }
    Ok(ReconstructedElement {
        value: direct_element(&set, config)?,
        row: r,
        col: c,
        method: Method::for_strength(config.strength()),
        strength: config.strength(),
    })
}

/// Builds a matrix from the four `(I, J)` moment sets.
pub fn matrix_from_sets(sets: &[ExpectationSet; 4], config: &PointerConfig) -> Result<DensityMatrix> {
    let mut m = CMatrix::zeros(2, 2);
    for (k, set) in sets.iter().enumerate() {
        m[(k / 2, k % 2)] = direct_element(set, config)?;
    }
    DensityMatrix::estimate(m)
}

/// Pointer reconstruction of all four elements of a qubit state.
///
/// Element `k` (row-major) draws its noise from stream `k` of `noise`, so
/// the result does not depend on how the elements are scheduled.
pub fn direct_matrix(rho: &DensityMatrix, config: &PointerConfig, noise: Option<&NoiseModel>) -> Result<DensityMatrix> {
    if rho.dim() != 2 {
        return Err(Error::UnsupportedDimension(rho.dim()));
    }
    let sets: Vec<ExpectationSet> = QUBIT_ELEMENTS
        .par_iter()
        .enumerate()
        .map(|(k, (i, j))| {
            let set = expectation_set(rho, &i.projector(), &j.projector(), config)?;
            Ok(match noise {
                Some(n) => apply_moment_noise(&set, n, k as u64),
                None => set,
            })
        })
        .collect::<Result<_>>()?;
    let sets: [ExpectationSet; 4] = sets.try_into().expect("four element slots");
    matrix_from_sets(&sets, config)
}

/// Projective probabilities in order `H, V, D, A, R, L`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TomographyData {
    pub probabilities: [f64; 6],
    /// Allowed deviation of each complementary pair sum from 1.
    pub tolerance: f64,
}

impl TomographyData {
    pub const ORDER: [Polarization; 6] = Polarization::ALL;

    pub fn new(probabilities: [f64; 6], tolerance: f64) -> Result<Self> {
        let data = Self { probabilities, tolerance };
        data.validate()?;
        Ok(data)
    }

    /// Exact probabilities `<k|rho|k>` of a qubit state.
    pub fn from_state(rho: &DensityMatrix) -> Result<Self> {
        if rho.dim() != 2 {
            return Err(Error::UnsupportedDimension(rho.dim()));
        }
        let mut p = [0.0; 6];
        for (slot, pol) in p.iter_mut().zip(Self::ORDER) {
            let k = pol.ket();
            let v = nalgebra::DVector::from_column_slice(k.as_slice());
            *slot = (v.adjoint() * rho.matrix() * &v)[(0, 0)].re;
        }
        Ok(Self { probabilities: p, tolerance: 1e-10 })
    }

    /// Probabilities with trial-averaged multiplicative noise, clamped to
    /// `[0, 1]`.
    pub fn noisy(rho: &DensityMatrix, noise: &NoiseModel, stream: u64) -> Result<Self> {
        let exact = Self::from_state(rho)?;
        let mut rng = noise.rng(stream);
        let mut p = exact.probabilities;
        for v in p.iter_mut() {
            *v = noise.averaged(*v, &mut rng).clamp(0.0, 1.0);
        }
        let spread = noise.relative_sigma / (noise.trials as f64).sqrt();
        Ok(Self { probabilities: p, tolerance: 1e-10 + 12.0 * spread })
    }

    fn validate(&self) -> Result<()> {
        for &p in &self.probabilities {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::ProbabilityOutOfRange(p));
            }
        }
        for pair in self.probabilities.chunks(2) {
            let sum = pair[0] + pair[1];
            if (sum - 1.0).abs() > self.tolerance {
                return Err(Error::InvalidParameter(format!(
                    "complementary probabilities sum to {sum}, outside tolerance {}",
                    self.tolerance
                )));
            }
        }
        Ok(())
    }
}

/// Linear inversion `rho = (I + s_x X + s_y Y + s_z Z)/2`, with each Stokes
/// component normalized by its pair sum.
pub fn qst_reconstruct(data: &TomographyData) -> Result<DensityMatrix> {
    data.validate()?;
    let [ph, pv, pd, pa, pr, pl] = data.probabilities;
    let stokes = |plus: f64, minus: f64| {
        let total = plus + minus;
        if total > 0.0 {
            Ok((plus - minus) / total)
        } else {
            Err(Error::Degenerate("complementary pair with zero total probability".into()))
        }
    };
    let sx = stokes(pd, pa)?;
    let sy = stokes(pl, pr)?;
    let sz = stokes(ph, pv)?;
    let m = CMatrix::from_row_slice(
        2,
        2,
        &[
            Complex64::new(0.5 * (1.0 + sz), 0.0),
            Complex64::new(0.5 * sx, -0.5 * sy),
            Complex64::new(0.5 * sx, 0.5 * sy),
            Complex64::new(0.5 * (1.0 - sz), 0.0),
        ],
    );
    DensityMatrix::new(m)
}

/// Noiseless largest element error `max |rho_est(i,j) - rho(i,j)|` at each
/// strength, using the default pointer width.
pub fn bias_curve(rho: &DensityMatrix, strengths: &[f64]) -> Result<Vec<(f64, f64)>> {
    if strengths.iter().any(|s| !(*s > 0.0) || !s.is_finite()) {
        return Err(Error::InvalidParameter("strengths must be positive".into()));
    }
    if strengths.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter("strengths must be strictly ascending".into()));
    }
    strengths
        .iter()
        .map(|&s| {
            let cfg = PointerConfig::from_strength(PointerConfig::EXPERIMENTAL_SIGMA_UM, s)?;
            let est = direct_matrix(rho, &cfg, None)?;
            Ok((s, est.max_abs_diff(rho)?))
        })
        .collect()
}
