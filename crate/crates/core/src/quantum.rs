//! Polarization states, wave plates and state metrics.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;
use std::str::FromStr;

use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64;

use crate::linalg::{self, CMatrix, CVector};
use crate::{Error, Result};

const NORM_TOL: f64 = 1e-12;
const HERMITIAN_TOL: f64 = 1e-10;
const TRACE_TOL: f64 = 1e-10;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Normalized polarization state `a|H> + b|V>`.
///
/// States are rays: two states differing by a global phase are physically
/// identical, so comparisons should go through [`density_from_pure`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PureState {
    a: Complex64,
    b: Complex64,
}

impl PureState {
    pub fn new(a: Complex64, b: Complex64) -> Result<Self> {
        let norm = a.norm_sqr() + b.norm_sqr();
        if !norm.is_finite() || (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(norm));
        }
        Ok(Self { a, b })
    }

    /// Rescales `(a, b)` to unit norm.
    pub fn normalized(a: Complex64, b: Complex64) -> Result<Self> {
        let norm = (a.norm_sqr() + b.norm_sqr()).sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::NotNormalized(norm * norm));
        }
        Ok(Self { a: a / norm, b: b / norm })
    }

    pub fn a(&self) -> Complex64 {
        self.a
    }

    pub fn b(&self) -> Complex64 {
        self.b
    }

    pub fn ket(&self) -> Vector2<Complex64> {
        Vector2::new(self.a, self.b)
    }

    pub(crate) fn from_ket_unchecked(v: Vector2<Complex64>) -> Self {
        Self { a: v[0], b: v[1] }
    }
}

impl From<Polarization> for PureState {
    fn from(p: Polarization) -> Self {
        PureState::from_ket_unchecked(p.ket())
    }
}

/// The six cardinal polarizations.
///
/// `|A> = (|V> - |H>)/sqrt(2)` so that `|H> = (|D> - |A>)/sqrt(2)` and
/// `|V> = (|D> + |A>)/sqrt(2)`. `|L> = (|H> + i|V>)/sqrt(2)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Polarization {
    H,
    V,
    D,
    A,
    R,
    L,
}

impl Polarization {
    pub const ALL: [Polarization; 6] = [Self::H, Self::V, Self::D, Self::A, Self::R, Self::L];

    pub fn ket(self) -> Vector2<Complex64> {
        let s = FRAC_1_SQRT_2;
        match self {
            Self::H => Vector2::new(c(1.0, 0.0), c(0.0, 0.0)),
            Self::V => Vector2::new(c(0.0, 0.0), c(1.0, 0.0)),
            Self::D => Vector2::new(c(s, 0.0), c(s, 0.0)),
            Self::A => Vector2::new(c(-s, 0.0), c(s, 0.0)),
            Self::R => Vector2::new(c(s, 0.0), c(0.0, -s)),
            Self::L => Vector2::new(c(s, 0.0), c(0.0, s)),
        }
    }

    pub fn projector(self) -> Projector {
        Projector::from_ket2(self.ket())
    }

    /// Matches a unit ket against the cardinal states up to global phase.
    pub fn identify(ket: &Vector2<Complex64>) -> Option<Polarization> {
        Self::ALL
            .into_iter()
            .find(|p| (p.ket().dotc(ket).norm() - 1.0).abs() < 1e-12)
    }
}

impl fmt::Display for Polarization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::H => "H",
            Self::V => "V",
            Self::D => "D",
            Self::A => "A",
            Self::R => "R",
            Self::L => "L",
        };
        f.write_str(s)
    }
}

impl FromStr for Polarization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "H" | "h" => Ok(Self::H),
            "V" | "v" => Ok(Self::V),
            "D" | "d" => Ok(Self::D),
            "A" | "a" => Ok(Self::A),
            "R" | "r" => Ok(Self::R),
            "L" | "l" => Ok(Self::L),
            other => Err(Error::Parse(format!("unknown polarization `{other}`"))),
        }
    }
}

/// Rank-1 projector `|k><k|` onto a unit ket of any dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct Projector {
    ket: CVector,
}

impl Projector {
    pub fn new(ket: CVector) -> Result<Self> {
        let norm = ket.norm_squared();
        if ket.is_empty() || (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(norm));
        }
        Ok(Self { ket })
    }

    pub(crate) fn from_ket2(v: Vector2<Complex64>) -> Self {
        Self { ket: CVector::from_column_slice(v.as_slice()) }
    }

    /// `|i>` in the computational basis of dimension `dim`.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::InvalidParameter(format!("basis index {index} >= dimension {dim}")));
        }
        let mut ket = CVector::zeros(dim);
        ket[index] = c(1.0, 0.0);
        Ok(Self { ket })
    }

    /// Uniform superposition `sum_i |i> / sqrt(d)`, unbiased with respect to
    /// the computational basis and real-positive overlapping with every `|i>`.
    pub fn uniform(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("dimension must be positive".into()));
        }
        let amp = 1.0 / (dim as f64).sqrt();
        Ok(Self { ket: CVector::from_element(dim, c(amp, 0.0)) })
    }

    pub fn dim(&self) -> usize {
        self.ket.len()
    }

    pub fn ket(&self) -> &CVector {
        &self.ket
    }

    /// The ket as a 2-vector; `None` unless `dim() == 2`.
    pub fn ket2(&self) -> Option<Vector2<Complex64>> {
        (self.dim() == 2).then(|| Vector2::new(self.ket[0], self.ket[1]))
    }

    pub fn operator(&self) -> CMatrix {
        &self.ket * self.ket.adjoint()
    }

    pub fn polarization(&self) -> Option<Polarization> {
        self.ket2().and_then(|k| Polarization::identify(&k))
    }
}

impl From<Polarization> for Projector {
    fn from(p: Polarization) -> Self {
        p.projector()
    }
}

/// Square complex matrix standing for a density operator.
///
/// Matrices built through [`DensityMatrix::new`] are checked Hermitian and
/// trace-1. Reconstructions from noisy data are held as *estimates*: square
/// and finite, but neither Hermiticity nor positivity is guaranteed.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    entries: CMatrix,
    estimate: bool,
}

impl DensityMatrix {
    pub fn new(entries: CMatrix) -> Result<Self> {
        check_square(&entries)?;
        let dev = linalg::hermitian_deviation(&entries);
        if dev > HERMITIAN_TOL {
            return Err(Error::NotHermitian(dev));
        }
        let tr = linalg::trace(&entries);
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::BadTrace(tr.re));
        }
        Ok(Self { entries, estimate: false })
    }

    /// Wraps a reconstructed matrix without physicality checks.
    pub fn estimate(entries: CMatrix) -> Result<Self> {
        check_square(&entries)?;
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Degenerate("non-finite matrix entry".into()));
        }
        Ok(Self { entries, estimate: true })
    }

    pub fn from_rows_2x2(rows: [[Complex64; 2]; 2]) -> Result<Self> {
        Self::new(CMatrix::from_row_slice(2, 2, &[rows[0][0], rows[0][1], rows[1][0], rows[1][1]]))
    }

    pub fn maximally_mixed(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("dimension must be positive".into()));
        }
        Ok(Self { entries: CMatrix::identity(dim, dim).scale(1.0 / dim as f64), estimate: false })
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    /// `rho(i, j) = <a_i| rho |a_j>`.
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries[(i, j)]
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.entries
    }

    pub fn into_matrix(self) -> CMatrix {
        self.entries
    }

    pub fn is_estimate(&self) -> bool {
        self.estimate
    }

    pub fn trace(&self) -> Complex64 {
        linalg::trace(&self.entries)
    }

    pub fn hermitian_deviation(&self) -> f64 {
        linalg::hermitian_deviation(&self.entries)
    }

    /// `(rho + rho^dagger)/2`, kept as an estimate.
    pub fn hermitian_part(&self) -> DensityMatrix {
        DensityMatrix { entries: linalg::hermitian_part(&self.entries), estimate: self.estimate }
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::hermitian_eigenvalues(&self.entries)
    }

    /// Weighted pure components `(lambda_k, |v_k>)` of the Hermitian part.
    pub fn eigen_ensemble(&self) -> Vec<(f64, CVector)> {
        let (values, vectors) = linalg::hermitian_eigen(&self.entries);
        values
            .into_iter()
            .enumerate()
            .map(|(k, w)| (w, vectors.column(k).into_owned()))
            .collect()
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &DensityMatrix) -> Result<f64> {
        check_dims(self, other)?;
        Ok((&self.entries - &other.entries).iter().map(|z| z.norm()).fold(0.0, f64::max))
    }

    pub(crate) fn from_matrix_unchecked(entries: CMatrix) -> Self {
        Self { entries, estimate: false }
    }
}

fn check_square(m: &CMatrix) -> Result<()> {
    if m.nrows() != m.ncols() || m.nrows() == 0 {
        return Err(Error::NotSquare(m.nrows(), m.ncols()));
    }
    Ok(())
}

fn check_dims(a: &DensityMatrix, b: &DensityMatrix) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(a.dim(), b.dim()));
    }
    Ok(())
}

pub fn density_from_pure(state: &PureState) -> DensityMatrix {
    let k = state.ket();
    let m = k * k.adjoint();
    DensityMatrix::from_matrix_unchecked(CMatrix::from_row_slice(2, 2, &[m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]]))
}

/// `Re Tr[rho^2]`; equals `sum |rho_ij|^2` for Hermitian input.
pub fn purity(rho: &DensityMatrix) -> f64 {
    let m = rho.matrix();
    linalg::trace(&(m * m)).re
}

/// Half the trace norm of `beta - rho`.
///
/// For Hermitian differences this is half the sum of absolute eigenvalues;
/// otherwise (noisy estimates) the singular values are used, which is the
/// same quantity `Tr sqrt(M^dagger M) / 2`.
pub fn trace_distance(rho: &DensityMatrix, beta: &DensityMatrix) -> Result<f64> {
    check_dims(rho, beta)?;
    let diff = beta.matrix() - rho.matrix();
    let scale = diff.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let sum: f64 = if linalg::hermitian_deviation(&diff) <= 1e-14 * scale.max(1.0) {
        linalg::hermitian_eigenvalues(&diff).iter().map(|v| v.abs()).sum()
    } else {
        linalg::singular_values(&diff).iter().sum()
    };
    Ok(0.5 * sum)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WaveplateKind {
    Half,
    Quarter,
}

/// Wave plate with its fast axis at `fast_axis` radians from horizontal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveplateSetting {
    pub kind: WaveplateKind,
    pub fast_axis: f64,
}

impl WaveplateSetting {
    pub fn half(fast_axis: f64) -> Self {
        Self { kind: WaveplateKind::Half, fast_axis }
    }

    pub fn quarter(fast_axis: f64) -> Self {
        Self { kind: WaveplateKind::Quarter, fast_axis }
    }
}

/// Jones matrix of an ideal wave plate.
///
/// Half: `[[cos 2a, sin 2a], [sin 2a, -cos 2a]]` (Hermitian).
/// Quarter: `R(-phi) diag(1, -i) R(phi)`, which sends `|H>` to
/// `(cos^2 phi - i sin^2 phi)|H> + (1+i)/2 sin 2phi |V>` with no extra phase.
pub fn waveplate_unitary(setting: WaveplateSetting) -> Matrix2<Complex64> {
    let t = setting.fast_axis;
    match setting.kind {
        WaveplateKind::Half => {
            let (s2, c2) = (2.0 * t).sin_cos();
            Matrix2::new(c(c2, 0.0), c(s2, 0.0), c(s2, 0.0), c(-c2, 0.0))
        }
        WaveplateKind::Quarter => {
            let (s, co) = t.sin_cos();
            let off = c(s * co, s * co);
            Matrix2::new(c(co * co, -s * s), off, off, c(s * s, -co * co))
        }
    }
}

/// `cos(theta)|H> - sin(theta) e^{i alpha pi/2}|V>`.
pub fn pure_path_state(theta: f64, alpha: f64) -> PureState {
    let phase = Complex64::from_polar(1.0, alpha * PI / 2.0);
    PureState::from_ket_unchecked(Vector2::new(c(theta.cos(), 0.0), -phase * theta.sin()))
}

/// Closed form of the spun half-wave-plate mixture prepared from a quarter
/// wave plate at `phi`.
pub fn spun_mixed_analytic(phi: f64) -> DensityMatrix {
    let off = phi.sin() * phi.cos();
    DensityMatrix::from_matrix_unchecked(CMatrix::from_row_slice(
        2,
        2,
        &[c(0.5, 0.0), c(0.0, off), c(0.0, -off), c(0.5, 0.0)],
    ))
}

/// The state sent into the spinning half-wave plate: `|H>` after a quarter
/// wave plate at `phi`.
pub fn quarter_wave_state(phi: f64) -> PureState {
    let u = waveplate_unitary(WaveplateSetting::quarter(phi));
    PureState::from_ket_unchecked(u * Polarization::H.ket())
}

/// Average of `U(alpha) rho U(alpha)^dagger` over `samples` equispaced
/// half-wave-plate angles in `[0, 2 pi)`.
pub fn spun_mixed_numeric(phi: f64, samples: usize) -> Result<DensityMatrix> {
    if samples < 4 {
        return Err(Error::InvalidParameter(format!("need at least 4 samples, got {samples}")));
    }
    let k = quarter_wave_state(phi).ket();
    let rho = k * k.adjoint();
    let mut acc = Matrix2::<Complex64>::zeros();
    for n in 0..samples {
        let alpha = 2.0 * PI * n as f64 / samples as f64;
        let u = waveplate_unitary(WaveplateSetting::half(alpha));
        acc += u * rho * u.adjoint();
    }
    acc /= c(samples as f64, 0.0);
    Ok(DensityMatrix::from_matrix_unchecked(CMatrix::from_row_slice(
        2,
        2,
        &[acc[(0, 0)], acc[(0, 1)], acc[(1, 0)], acc[(1, 1)]],
    )))
}

/// Clips negative eigenvalues of a Hermitian matrix to zero and rescales to
/// unit trace. Physical inputs come back unchanged (to rounding).
pub fn project_to_physical(rho: &DensityMatrix) -> Result<DensityMatrix> {
    let dev = rho.hermitian_deviation();
    if dev > HERMITIAN_TOL {
        return Err(Error::NotHermitian(dev));
    }
    let (mut values, vectors) = linalg::hermitian_eigen(rho.matrix());
    for v in values.iter_mut() {
        *v = v.max(0.0);
    }
    let total: f64 = values.iter().sum();
    if total <= f64::EPSILON {
        return Err(Error::Degenerate("no positive eigenvalues to renormalize".into()));
    }
    for v in values.iter_mut() {
        *v /= total;
    }
    Ok(DensityMatrix::from_matrix_unchecked(linalg::compose(&values, &vectors)))
}
