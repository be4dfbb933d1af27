//! Exact pointer-state simulation.
//!
//! The photon's transverse profile is a product of two Gaussian pointers
//! `chi(x) chi(y)` with `chi(z) = (2 pi sigma^2)^(-1/4) exp(-z^2 / 4 sigma^2)`.
//! Every state reachable through the crystals and the final polarizer is a
//! finite sum of shifted copies of that product, one sum per polarization
//! branch, so all densities and moments have closed forms.
//!
//! Units: lengths are in micrometres and `hbar = 1`, so momenta are in
//! inverse micrometres and `sigma * sigma_p = 1/2`.

use std::f64::consts::PI;

use nalgebra::Vector2;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::quantum::{DensityMatrix, Polarization, Projector, PureState};
use crate::{Error, Result};

/// Pointer widths and crystal walk-off shifts, in micrometres.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointerConfig {
    sigma_x: f64,
    sigma_y: f64,
    delta_x: f64,
    delta_y: f64,
}

impl PointerConfig {
    pub const EXPERIMENTAL_SIGMA_UM: f64 = 250.0;
    pub const EXPERIMENTAL_DELTA_UM: f64 = 176.0;

    pub fn new(sigma_x: f64, sigma_y: f64, delta_x: f64, delta_y: f64) -> Result<Self> {
        for (name, v) in [("sigma_x", sigma_x), ("sigma_y", sigma_y), ("delta_x", delta_x), ("delta_y", delta_y)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be positive and finite, got {v}")));
            }
        }
        Ok(Self { sigma_x, sigma_y, delta_x, delta_y })
    }

    pub fn symmetric(sigma: f64, delta: f64) -> Result<Self> {
        Self::new(sigma, sigma, delta, delta)
    }

    /// Equal widths `sigma` and shifts `strength * sigma`.
    pub fn from_strength(sigma: f64, strength: f64) -> Result<Self> {
        Self::symmetric(sigma, strength * sigma)
    }

    pub fn experimental() -> Self {
        Self {
            sigma_x: Self::EXPERIMENTAL_SIGMA_UM,
            sigma_y: Self::EXPERIMENTAL_SIGMA_UM,
            delta_x: Self::EXPERIMENTAL_DELTA_UM,
            delta_y: Self::EXPERIMENTAL_DELTA_UM,
        }
    }

    pub fn sigma_x(&self) -> f64 {
        self.sigma_x
    }
    pub fn sigma_y(&self) -> f64 {
        self.sigma_y
    }
    pub fn delta_x(&self) -> f64 {
        self.delta_x
    }
    pub fn delta_y(&self) -> f64 {
        self.delta_y
    }
    pub fn sigma_px(&self) -> f64 {
        0.5 / self.sigma_x
    }
    pub fn sigma_py(&self) -> f64 {
        0.5 / self.sigma_y
    }

    /// `delta_x / sigma_x`.
    pub fn strength(&self) -> f64 {
        self.delta_x / self.sigma_x
    }

    pub fn is_symmetric(&self) -> bool {
        self.sigma_x == self.sigma_y && self.delta_x == self.delta_y
    }

    pub fn sigma(&self, axis: Axis) -> f64 {
        match axis {
            Axis::X => self.sigma_x,
            Axis::Y => self.sigma_y,
        }
    }

    pub fn delta(&self, axis: Axis) -> f64 {
        match axis {
            Axis::X => self.delta_x,
            Axis::Y => self.delta_y,
        }
    }
}

impl Default for PointerConfig {
    fn default() -> Self {
        Self::experimental()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
}

/// Which pointer observable is read out on an axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Quadrature {
    Position,
    Momentum,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MomentSpec {
    pub x_operator: Quadrature,
    pub y_operator: Quadrature,
}

impl MomentSpec {
    pub const XY: MomentSpec = MomentSpec { x_operator: Quadrature::Position, y_operator: Quadrature::Position };
    pub const PXPY: MomentSpec = MomentSpec { x_operator: Quadrature::Momentum, y_operator: Quadrature::Momentum };
    pub const PXY: MomentSpec = MomentSpec { x_operator: Quadrature::Momentum, y_operator: Quadrature::Position };
    pub const XPY: MomentSpec = MomentSpec { x_operator: Quadrature::Position, y_operator: Quadrature::Momentum };
    pub const ALL: [MomentSpec; 4] = [Self::XY, Self::PXPY, Self::PXY, Self::XPY];
}

/// `coeff * chi_x(x - center_x) * chi_y(y - center_y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianTerm {
    pub coeff: Complex64,
    pub center_x: f64,
    pub center_y: f64,
}

impl GaussianTerm {
    pub fn new(coeff: Complex64, center_x: f64, center_y: f64) -> Self {
        Self { coeff, center_x, center_y }
    }

    fn center(&self, axis: Axis) -> f64 {
        match axis {
            Axis::X => self.center_x,
            Axis::Y => self.center_y,
        }
    }
}

/// Pointer wavefunction attached to one polarization ket.
#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    ket: Vector2<Complex64>,
    label: Option<Polarization>,
    terms: Vec<GaussianTerm>,
}

impl Branch {
    fn new(ket: Vector2<Complex64>, terms: Vec<GaussianTerm>) -> Self {
        Self { label: Polarization::identify(&ket), ket, terms }
    }

    pub fn ket(&self) -> &Vector2<Complex64> {
        &self.ket
    }

    pub fn label(&self) -> Option<Polarization> {
        self.label
    }

    pub fn terms(&self) -> &[GaussianTerm] {
        &self.terms
    }
}

/// System and pointer state: a list of branches whose kets are orthonormal.
#[derive(Debug, Clone, PartialEq)]
pub struct PointerField {
    config: PointerConfig,
    branches: Vec<Branch>,
}

impl PointerField {
    pub fn config(&self) -> &PointerConfig {
        &self.config
    }

    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    pub fn branch(&self, label: Polarization) -> Option<&Branch> {
        self.branches.iter().find(|b| b.label == Some(label))
    }

    /// Norm of the full state, using the Gaussian overlap Gram form.
    pub fn total_probability(&self) -> f64 {
        self.branches
            .iter()
            .map(|b| {
                pair_sum(&b.terms, |k, l| {
                    overlap(&self.config, Axis::X, Quadrature::Position, k, l, false)
                        * overlap(&self.config, Axis::Y, Quadrature::Position, k, l, false)
                })
            })
            .sum()
    }

    /// Largest `|center|` on `axis` over all terms.
    pub fn max_shift(&self, axis: Axis) -> f64 {
        self.branches
            .iter()
            .flat_map(|b| b.terms.iter())
            .map(|t| t.center(axis).abs())
            .fold(0.0, f64::max)
    }

    /// Position-space amplitude of every branch at `(x, y)`.
    pub fn amplitudes_at(&self, x: f64, y: f64) -> Vec<Complex64> {
        self.branches
            .iter()
            .map(|b| {
                b.terms
                    .iter()
                    .map(|t| {
                        t.coeff
                            * position_amplitude(x - t.center_x, self.config.sigma_x)
                            * position_amplitude(y - t.center_y, self.config.sigma_y)
                    })
                    .sum()
            })
            .collect()
    }

    /// Joint density in a mixed position/momentum representation: `u` is the
    /// `x` coordinate or `p_x`, `v` the `y` coordinate or `p_y`.
    pub fn density_in(&self, x_rep: Quadrature, y_rep: Quadrature, u: f64, v: f64) -> f64 {
        self.branches
            .iter()
            .map(|b| {
                let amp: Complex64 = b
                    .terms
                    .iter()
                    .map(|t| {
                        t.coeff
                            * axis_amplitude(x_rep, u, t.center_x, self.config.sigma_x)
                            * axis_amplitude(y_rep, v, t.center_y, self.config.sigma_y)
                    })
                    .sum();
                amp.norm_sqr()
            })
            .sum()
    }
}

/// `chi(z)` for a pointer of width `sigma`.
pub fn position_amplitude(z: f64, sigma: f64) -> f64 {
    (2.0 * PI * sigma * sigma).powf(-0.25) * (-z * z / (4.0 * sigma * sigma)).exp()
}

/// Fourier transform (`e^{-ipx}` convention) of `chi(x - center)` at `p`.
pub fn momentum_amplitude(p: f64, center: f64, sigma: f64) -> Complex64 {
    let sigma_p = 0.5 / sigma;
    let mag = (2.0 * PI * sigma_p * sigma_p).powf(-0.25) * (-p * p / (4.0 * sigma_p * sigma_p)).exp();
    Complex64::from_polar(mag, -p * center)
}

pub fn axis_amplitude(rep: Quadrature, coord: f64, center: f64, sigma: f64) -> Complex64 {
    match rep {
        Quadrature::Position => Complex64::new(position_amplitude(coord - center, sigma), 0.0),
        Quadrature::Momentum => momentum_amplitude(coord, center, sigma),
    }
}

/// `<chi(. - a_k)| O |chi(. - a_l)>` on one axis, with `O` the identity
/// (`weighted = false`) or the quadrature operator.
fn overlap(cfg: &PointerConfig, axis: Axis, q: Quadrature, k: &GaussianTerm, l: &GaussianTerm, weighted: bool) -> Complex64 {
    let sigma = cfg.sigma(axis);
    let (a, b) = (k.center(axis), l.center(axis));
    let g = (-(a - b) * (a - b) / (8.0 * sigma * sigma)).exp();
    if !weighted {
        return Complex64::new(g, 0.0);
    }
    match q {
        Quadrature::Position => Complex64::new(0.5 * (a + b) * g, 0.0),
        Quadrature::Momentum => Complex64::new(0.0, (a - b) / (4.0 * sigma * sigma) * g),
    }
}

fn pair_sum(terms: &[GaussianTerm], f: impl Fn(&GaussianTerm, &GaussianTerm) -> Complex64) -> f64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for k in terms {
        for l in terms {
            acc += k.coeff.conj() * l.coeff * f(k, l);
        }
    }
    acc.re
}

fn ket2(p: &Projector) -> Result<Vector2<Complex64>> {
    p.ket2().ok_or(Error::UnsupportedDimension(p.dim()))
}

fn merge_terms(terms: Vec<GaussianTerm>, tol: f64) -> Vec<GaussianTerm> {
    let mut out: Vec<GaussianTerm> = Vec::with_capacity(terms.len());
    for t in terms {
        match out
            .iter_mut()
            .find(|o| (o.center_x - t.center_x).abs() <= tol && (o.center_y - t.center_y).abs() <= tol)
        {
            Some(o) => o.coeff += t.coeff,
            None => out.push(t),
        }
    }
    out.retain(|t| t.coeff.norm() != 0.0);
    out
}

/// Re-expresses the field in the basis `{t, t_perp}`.
fn rebase(field: &PointerField, t: Vector2<Complex64>) -> PointerField {
    let perp = Vector2::new(-t[1].conj(), t[0].conj());
    let tol = 1e-12 * field.config.sigma_x.max(field.config.sigma_y);
    let branches = [t, perp]
        .into_iter()
        .map(|e| {
            let terms = field
                .branches
                .iter()
                .flat_map(|b| {
                    let amp = e.dotc(&b.ket);
                    b.terms.iter().map(move |term| GaussianTerm { coeff: amp * term.coeff, ..*term })
                })
                .collect();
            Branch::new(e, merge_terms(terms, tol))
        })
        .collect();
    PointerField { config: field.config, branches }
}

/// Unshifted pointers in the `{H, V}` basis: `a chi chi |H> + b chi chi |V>`.
pub fn initial_field(state: &PureState, config: &PointerConfig) -> PointerField {
    let make = |p: Polarization, coeff: Complex64| {
        let terms = if coeff.norm() == 0.0 { vec![] } else { vec![GaussianTerm::new(coeff, 0.0, 0.0)] };
        Branch::new(p.ket(), terms)
    };
    PointerField {
        config: *config,
        branches: vec![make(Polarization::H, state.a()), make(Polarization::V, state.b())],
    }
}

/// Walk-off crystal: translates the pointer on `axis` by `delta` for the
/// polarization component selected by `target`.
///
/// The field is re-expressed in `{target, target_perp}` first when `target`
/// is not already one of its branch kets.
pub fn apply_weak_shift(field: &PointerField, target: &Projector, axis: Axis, delta: f64) -> Result<PointerField> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::InvalidShift(delta));
    }
    let t = ket2(target)?;
    let matched = field.branches.iter().position(|b| (b.ket.dotc(&t).norm() - 1.0).abs() < 1e-12);
    let (mut out, idx) = match matched {
        Some(i) => (field.clone(), i),
        None => (rebase(field, t), 0),
    };
    for term in out.branches[idx].terms.iter_mut() {
        match axis {
            Axis::X => term.center_x += delta,
            Axis::Y => term.center_y += delta,
        }
    }
    Ok(out)
}

/// Polarizer onto `final_proj`, without renormalization.
pub fn apply_strong_projection(field: &PointerField, final_proj: &Projector) -> Result<PointerField> {
    let f = ket2(final_proj)?;
    let tol = 1e-12 * field.config.sigma_x.max(field.config.sigma_y);
    let terms = field
        .branches
        .iter()
        .flat_map(|b| {
            let amp = f.dotc(&b.ket);
            b.terms.iter().map(move |t| GaussianTerm { coeff: amp * t.coeff, ..*t })
        })
        .collect();
    Ok(PointerField { config: field.config, branches: vec![Branch::new(f, merge_terms(terms, tol))] })
}

/// Position-space probability density summed over branches.
pub fn probability_density(field: &PointerField, x: f64, y: f64) -> f64 {
    field.amplitudes_at(x, y).iter().map(|a| a.norm_sqr()).sum()
}

fn require_single_branch(field: &PointerField) -> Result<&Branch> {
    match field.branches.as_slice() {
        [b] => Ok(b),
        other => Err(Error::MultiBranch(other.len())),
    }
}

/// Closed-form un-normalized joint moment of a projected field.
pub fn analytic_moment(field: &PointerField, spec: MomentSpec) -> Result<f64> {
    let branch = require_single_branch(field)?;
    let cfg = &field.config;
    Ok(pair_sum(&branch.terms, |k, l| {
        overlap(cfg, Axis::X, spec.x_operator, k, l, true) * overlap(cfg, Axis::Y, spec.y_operator, k, l, true)
    }))
}

/// Brute-force Riemann-sum estimate of the same moment.
///
/// Position axes are sampled on `[-extent, extent] * sigma`; momentum axes
/// on `[-extent, extent] * sigma_p` using the transformed Gaussians. The
/// step is `spacing * sigma` (or `spacing * sigma_p`).
pub fn grid_moment(field: &PointerField, spec: MomentSpec, extent: f64, spacing: f64) -> Result<f64> {
    require_single_branch(field)?;
    grid_expectation(field, spec, extent, spacing, |u, v| u * v)
}

/// Riemann sum of `weight(u, v) * density(u, v)` over the representation
/// selected by `spec`. Also serves for non-product weights such as `x^2`.
pub fn grid_expectation<F>(field: &PointerField, spec: MomentSpec, extent: f64, spacing: f64, weight: F) -> Result<f64>
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    if !(spacing > 0.0) || spacing > 1.0 / 32.0 {
        return Err(Error::Resolution(format!("spacing {spacing} sigma exceeds sigma/32")));
    }
    let cfg = &field.config;
    for (axis, q) in [(Axis::X, spec.x_operator), (Axis::Y, spec.y_operator)] {
        let needed = match q {
            Quadrature::Position => 6.0 + field.max_shift(axis) / cfg.sigma(axis),
            Quadrature::Momentum => 6.0,
        };
        if extent < needed {
            return Err(Error::Resolution(format!("extent {extent} sigma below required {needed:.3} sigma on {axis:?}")));
        }
    }

    let n = (extent / spacing).ceil() as i64;
    let axis_grid = |axis: Axis, q: Quadrature| -> (Vec<f64>, f64) {
        let unit = match q {
            Quadrature::Position => cfg.sigma(axis),
            Quadrature::Momentum => 0.5 / cfg.sigma(axis),
        };
        let h = spacing * unit;
        ((-n..=n).map(|i| i as f64 * h).collect(), h)
    };
    let (us, hu) = axis_grid(Axis::X, spec.x_operator);
    let (vs, hv) = axis_grid(Axis::Y, spec.y_operator);

    let mut total = 0.0;
    for branch in &field.branches {
        let ax: Vec<Vec<Complex64>> = branch
            .terms
            .iter()
            .map(|t| us.iter().map(|&u| t.coeff * axis_amplitude(spec.x_operator, u, t.center_x, cfg.sigma_x)).collect())
            .collect();
        let ay: Vec<Vec<Complex64>> = branch
            .terms
            .iter()
            .map(|t| vs.iter().map(|&v| axis_amplitude(spec.y_operator, v, t.center_y, cfg.sigma_y)).collect())
            .collect();
        // Row partials are summed in index order so the result does not
        // depend on the thread pool.
        let rows: Vec<f64> = (0..us.len())
            .into_par_iter()
            .map(|i| {
                let u = us[i];
                let mut row = 0.0;
                for (j, &v) in vs.iter().enumerate() {
                    let amp: Complex64 = ax.iter().zip(&ay).map(|(x, y)| x[i] * y[j]).sum();
                    row += weight(u, v) * amp.norm_sqr();
                }
                row
            })
            .collect();
        total += rows.iter().sum::<f64>();
    }
    Ok(total * hu * hv)
}

/// The four pointer moments entering the element formula. All are
/// un-normalized: weighted by the probability of passing the final polarizer.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ExpectationSet {
    /// `<x y>`
    pub m_xy: f64,
    /// `<p_x p_y>`
    pub m_pxpy: f64,
    /// `<p_x y>`
    pub m_pxy: f64,
    /// `<x p_y>`
    pub m_xpy: f64,
}

impl ExpectationSet {
    pub fn get(&self, spec: MomentSpec) -> f64 {
        match (spec.x_operator, spec.y_operator) {
            (Quadrature::Position, Quadrature::Position) => self.m_xy,
            (Quadrature::Momentum, Quadrature::Momentum) => self.m_pxpy,
            (Quadrature::Momentum, Quadrature::Position) => self.m_pxy,
            (Quadrature::Position, Quadrature::Momentum) => self.m_xpy,
        }
    }

    pub fn set(&mut self, spec: MomentSpec, value: f64) {
        match (spec.x_operator, spec.y_operator) {
            (Quadrature::Position, Quadrature::Position) => self.m_xy = value,
            (Quadrature::Momentum, Quadrature::Momentum) => self.m_pxpy = value,
            (Quadrature::Momentum, Quadrature::Position) => self.m_pxy = value,
            (Quadrature::Position, Quadrature::Momentum) => self.m_xpy = value,
        }
    }

    pub fn scaled(&self, w: f64) -> Self {
        Self { m_xy: w * self.m_xy, m_pxpy: w * self.m_pxpy, m_pxy: w * self.m_pxy, m_xpy: w * self.m_xpy }
    }

    pub fn plus(&self, o: &Self) -> Self {
        Self {
            m_xy: self.m_xy + o.m_xy,
            m_pxpy: self.m_pxpy + o.m_pxpy,
            m_pxy: self.m_pxy + o.m_pxy,
            m_xpy: self.m_xpy + o.m_xpy,
        }
    }

    /// `<a_y a_x>` with `a = q + i 2 sigma^2 p` on each pointer.
    pub fn lowering_product(&self, cfg: &PointerConfig) -> Complex64 {
        let (sx2, sy2) = (cfg.sigma_x * cfg.sigma_x, cfg.sigma_y * cfg.sigma_y);
        Complex64::new(
            self.m_xy - 4.0 * sx2 * sy2 * self.m_pxpy,
            2.0 * sx2 * self.m_pxy + 2.0 * sy2 * self.m_xpy,
        )
    }

    pub fn is_finite(&self) -> bool {
        [self.m_xy, self.m_pxpy, self.m_pxy, self.m_xpy].iter().all(|v| v.is_finite())
    }
}

/// All four analytic moments of a projected field.
pub fn field_moments(field: &PointerField) -> Result<ExpectationSet> {
    let mut set = ExpectationSet::default();
    for spec in MomentSpec::ALL {
        set.set(spec, analytic_moment(field, spec)?);
    }
    Ok(set)
}

/// Field after `pi_first` on `x`, `pi_D` on `y` and the polarizer `pi_final`.
pub fn sequence_field(state: &PureState, first: &Projector, final_proj: &Projector, config: &PointerConfig) -> Result<PointerField> {
    let field = initial_field(state, config);
    let field = apply_weak_shift(&field, first, Axis::X, config.delta_x)?;
    let field = apply_weak_shift(&field, &Polarization::D.projector(), Axis::Y, config.delta_y)?;
    apply_strong_projection(&field, final_proj)
}

/// Pure components `(weight, state)` of a qubit density matrix.
pub fn qubit_ensemble(rho: &DensityMatrix) -> Result<Vec<(f64, PureState)>> {
    if rho.dim() != 2 {
        return Err(Error::UnsupportedDimension(rho.dim()));
    }
    rho.eigen_ensemble()
        .into_iter()
        .map(|(w, v)| Ok((w, PureState::normalized(v[0], v[1])?)))
        .collect()
}

/// Probability-weighted moments of the full sequence for a qubit state,
/// averaged over the eigen-ensemble of `rho`.
pub fn expectation_set(rho: &DensityMatrix, first: &Projector, final_proj: &Projector, config: &PointerConfig) -> Result<ExpectationSet> {
    ket2(first)?;
    ket2(final_proj)?;
    let mut total = ExpectationSet::default();
    for (w, state) in qubit_ensemble(rho)? {
        let field = sequence_field(&state, first, final_proj, config)?;
        total = total.plus(&field_moments(&field)?.scaled(w));
    }
    Ok(total)
}
