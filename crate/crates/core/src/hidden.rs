//! Hidden observables: deterministic functions of a hidden point `(ray, u)`
//! whose per-ray distribution reproduces the spectral measure of an operator.
//!
//! The hidden space over each ray is `(0, 1)` with Lebesgue measure. The
//! observable for `T` is the quasi-inverse of the ray's spectral CDF,
//!
//! ```text
//! f(psi, u) = min { lambda in sigma(T) : F_psi(lambda) >= u },
//! F_psi(r)  = sum { |P_i psi|^2 / |psi|^2 : lambda_i <= r },
//! ```
//!
//! so every per-ray integral of `b o f` is a finite sum over spectral weights
//! and can be computed exactly. [`StepProfile`] is the piecewise-constant
//! shape of any such function on one ray; sums and products of functions that
//! share `u` are computed by merging breakpoints.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::distr::{Distribution, Open01};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::borel::BorelExpr;
use crate::error::{Error, Result};
use crate::rng::{streams, KeyedRng};
use crate::spectral::{HermitianOperator, SpectralDecomposition, StateVector};
use crate::{CMatrix, CVector};

/// Number of random held-out rays used to validate a reconstructed operator.
pub const HELD_OUT_RAYS: usize = 32;
/// Relative tolerance for held-out first-moment validation.
pub const HELD_OUT_TOL: f64 = 1e-8;
/// Relative tolerance on `E^2 - E` for projector inputs.
pub const PROJECTOR_TOL: f64 = 1e-10;

const HELD_OUT_SEED: u64 = 0x6f72_7468_6f64_6f78;

/// Largest double strictly below one.
const BELOW_ONE: f64 = 1.0 - f64::EPSILON / 2.0;

/// Rotation-invariant atomless law on `C` used to draw line points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Eta {
    /// Standard complex Gaussian.
    Gaussian,
    /// Uniform on the unit disk.
    UnitDisk,
}

/// How the hidden parameter `u` is produced on each ray.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub enum GammaModel {
    /// `u` drawn directly from uniform `(0, 1)`.
    #[default]
    DirectUniform,
    /// A point `z` of the complex line is drawn from `eta` and `u = arg(z) / 2 pi`.
    ComplexArg { eta: Eta },
}

/// Normalized argument of a non-zero complex number, in the open interval `(0, 1)`.
///
/// `arg = 0` maps to the smallest positive double; a result that rounds to
/// one maps to the largest double below one.
pub fn gamma_from_complex(z: Complex64) -> Result<f64> {
    if z == Complex64::ZERO || !z.re.is_finite() || !z.im.is_finite() {
        return Err(Error::ZeroInput);
    }
    let mut u = z.im.atan2(z.re) / (2.0 * PI);
    if u < 0.0 {
        u += 1.0;
    }
    if u <= 0.0 {
        u = f64::from_bits(1);
    }
    if u >= 1.0 {
        u = BELOW_ONE;
    }
    Ok(u)
}

impl GammaModel {
    pub const ARG: GammaModel = GammaModel::ComplexArg { eta: Eta::Gaussian };

    /// Draws one hidden parameter.
    pub fn sample_u<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            GammaModel::DirectUniform => Open01.sample(rng),
            GammaModel::ComplexArg { eta } => loop {
                let z = match eta {
                    Eta::Gaussian => {
                        Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng))
                    }
                    Eta::UnitDisk => {
                        let r: f64 = Open01.sample(rng);
                        let theta: f64 = rng.random::<f64>() * 2.0 * PI;
                        Complex64::from_polar(r.sqrt(), theta)
                    }
                };
                if let Ok(u) = gamma_from_complex(z) {
                    break u;
                }
            },
        }
    }

    /// The hidden point of the vector `z * ray` on the complex line of `ray`.
    ///
    /// Under [`GammaModel::DirectUniform`] the line coordinate is read through
    /// the same normalized argument map.
    pub fn point_on_line(&self, ray: &StateVector, z: Complex64) -> Result<HiddenPoint> {
        HiddenPoint::new(ray.clone(), gamma_from_complex(z)?)
    }
}

/// A Haar-uniform random ray.
pub fn haar_ray<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> StateVector {
    loop {
        let v = CVector::from_iterator(
            dim,
            (0..dim).map(|_| Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng))),
        );
        if let Ok(s) = StateVector::new(v) {
            return s.normalized();
        }
    }
}

/// A hidden state: a normalized ray representative and a parameter in `(0, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HiddenPoint {
    ray: StateVector,
    u: f64,
}

impl HiddenPoint {
    pub fn new(ray: StateVector, u: f64) -> Result<Self> {
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::InvalidHiddenParameter(u));
        }
        Ok(Self {
            ray: ray.normalized(),
            u,
        })
    }

    pub fn ray(&self) -> &StateVector {
        &self.ray
    }

    pub fn u(&self) -> f64 {
        self.u
    }
}

/// Finite distribution of values with positive weights, values ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct LineDistribution {
    values: Vec<f64>,
    weights: Vec<f64>,
    cumulative: Vec<f64>,
}

impl LineDistribution {
    /// Spectral distribution of `s` on the ray of `psi`; zero-weight eigenvalues are dropped.
    pub fn spectral(s: &SpectralDecomposition, psi: &StateVector) -> Result<Self> {
        let weights = s.weights(psi)?;
        let (values, weights): (Vec<f64>, Vec<f64>) = s
            .eigenvalues()
            .iter()
            .zip(weights)
            .filter(|(_, w)| *w > 0.0)
            .map(|(v, w)| (*v, w))
            .unzip();
        Ok(Self::from_sorted(values, weights))
    }

    fn from_sorted(values: Vec<f64>, weights: Vec<f64>) -> Self {
        let mut acc = 0.0;
        let cumulative = weights
            .iter()
            .map(|w| {
                acc += w;
                acc
            })
            .collect();
        Self {
            values,
            weights,
            cumulative,
        }
    }

    /// Groups `(value, weight)` pairs, merging values closer than `value_tol`.
    pub fn from_pairs(mut pairs: Vec<(f64, f64)>, value_tol: f64) -> Self {
        pairs.retain(|(_, w)| *w > 0.0);
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut values: Vec<f64> = Vec::new();
        let mut weights: Vec<f64> = Vec::new();
        for (v, w) in pairs {
            match values.last() {
                Some(last) if (v - last).abs() <= value_tol => *weights.last_mut().unwrap() += w,
                _ => {
                    values.push(v);
                    weights.push(w);
                }
            }
        }
        Self::from_sorted(values, weights)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `F(r)`: total weight of values `<= r`.
    pub fn cdf(&self, r: f64) -> f64 {
        self.values
            .iter()
            .zip(&self.weights)
            .filter(|(v, _)| **v <= r)
            .map(|(_, w)| w)
            .sum::<f64>()
            .min(1.0)
    }

    /// Quasi-inverse `inf { r : F(r) >= u }`; a `u` on a jump selects the lower value.
    pub fn quantile(&self, u: f64) -> f64 {
        self.values[self.quantile_index(u)]
    }

    /// Index into [`values`](Self::values) selected by [`quantile`](Self::quantile).
    pub fn quantile_index(&self, u: f64) -> usize {
        let idx = self.cumulative.partition_point(|c| *c < u);
        idx.min(self.values.len() - 1)
    }

    /// `sum_i w_i g(v_i)`.
    pub fn integrate(&self, mut g: impl FnMut(f64) -> f64) -> f64 {
        self.values
            .iter()
            .zip(&self.weights)
            .map(|(v, w)| w * g(*v))
            .sum()
    }

    /// The piecewise-constant quantile function on `(0, 1)`.
    pub fn profile(&self) -> StepProfile {
        let n = self.values.len();
        let pieces = self
            .cumulative
            .iter()
            .zip(&self.values)
            .enumerate()
            .map(|(i, (c, v))| (if i + 1 == n { 1.0 } else { c.min(1.0) }, *v))
            .collect();
        StepProfile::from_pieces(pieces)
    }

    /// Largest weight difference against `other`, or `None` when supports differ.
    pub fn weight_distance(&self, other: &Self, value_tol: f64) -> Option<f64> {
        if self.values.len() != other.values.len() {
            return None;
        }
        let mut worst: f64 = 0.0;
        for i in 0..self.values.len() {
            let a = self.values[i];
            let b = other.values[i];
            if (a - b).abs() > value_tol * a.abs().max(b.abs()).max(1.0) {
                return None;
            }
            worst = worst.max((self.weights[i] - other.weights[i]).abs());
        }
        Some(worst)
    }
}

/// A piecewise-constant function of `u` on `(0, 1)`: piece `k` takes `value_k`
/// on `(end_{k-1}, end_k]`, with `end_{-1} = 0` and the last end equal to one.
#[derive(Debug, Clone, PartialEq)]
pub struct StepProfile {
    pieces: Vec<(f64, f64)>,
}

impl StepProfile {
    fn from_pieces(pieces: Vec<(f64, f64)>) -> Self {
        debug_assert!(pieces.last().map(|p| p.0) == Some(1.0));
        Self { pieces }
    }

    pub fn constant(value: f64) -> Self {
        Self {
            pieces: vec![(1.0, value)],
        }
    }

    pub fn pieces(&self) -> &[(f64, f64)] {
        &self.pieces
    }

    pub fn value_at(&self, u: f64) -> f64 {
        let idx = self.pieces.partition_point(|(end, _)| *end < u);
        self.pieces[idx.min(self.pieces.len() - 1)].1
    }

    /// `integral over (0, 1) of g(profile(u)) du`, exact for the step shape.
    pub fn integrate(&self, mut g: impl FnMut(f64) -> f64) -> f64 {
        let mut start = 0.0;
        let mut acc = 0.0;
        for (end, v) in &self.pieces {
            acc += (end - start) * g(*v);
            start = *end;
        }
        acc
    }

    pub fn map(&self, mut g: impl FnMut(f64) -> f64) -> Self {
        Self {
            pieces: self.pieces.iter().map(|(e, v)| (*e, g(*v))).collect(),
        }
    }

    /// Pointwise combination of two profiles sharing the same `u`.
    pub fn zip_with(&self, other: &Self, mut g: impl FnMut(f64, f64) -> f64) -> Self {
        let mut pieces = Vec::with_capacity(self.pieces.len() + other.pieces.len());
        let (mut i, mut j) = (0, 0);
        loop {
            let (ea, va) = self.pieces[i];
            let (eb, vb) = other.pieces[j];
            let end = ea.min(eb);
            if pieces.last().is_none_or(|(e, _): &(f64, f64)| *e < end) {
                pieces.push((end, g(va, vb)));
            }
            if end >= 1.0 {
                break;
            }
            if ea <= end {
                i += 1;
            }
            if eb <= end {
                j += 1;
            }
        }
        Self { pieces }
    }

    /// Value distribution of the profile, values within `value_tol` merged.
    pub fn distribution(&self, value_tol: f64) -> LineDistribution {
        let mut start = 0.0;
        let pairs = self
            .pieces
            .iter()
            .map(|(end, v)| {
                let w = end - start;
                start = *end;
                (*v, w)
            })
            .collect();
        LineDistribution::from_pairs(pairs, value_tol)
    }
}

/// A real function on the hidden space that is piecewise constant in `u` on every ray.
pub trait HiddenFunction: Send + Sync {
    fn dim(&self) -> usize;

    /// Shape of the function on the ray of `ray`.
    fn profile(&self, ray: &StateVector) -> Result<StepProfile>;

    fn value(&self, point: &HiddenPoint) -> Result<f64> {
        Ok(self.profile(point.ray())?.value_at(point.u()))
    }

    /// Exact `integral of g(h) d(eta)` on the ray.
    fn line_integral(&self, ray: &StateVector, g: &dyn Fn(f64) -> f64) -> Result<f64> {
        Ok(self.profile(ray)?.integrate(g))
    }
}

impl<F: HiddenFunction + ?Sized> HiddenFunction for &F {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn profile(&self, ray: &StateVector) -> Result<StepProfile> {
        (**self).profile(ray)
    }
    fn value(&self, point: &HiddenPoint) -> Result<f64> {
        (**self).value(point)
    }
}

/// The quantile observable of a Hermitian operator.
#[derive(Debug, Clone, PartialEq)]
pub struct HiddenObservable {
    op: HermitianOperator,
    spectrum: SpectralDecomposition,
    gamma: GammaModel,
}

impl HiddenObservable {
    pub fn build(op: &HermitianOperator, gamma: GammaModel) -> Result<Self> {
        let spectrum = op.decompose()?;
        Ok(Self {
            op: op.clone(),
            spectrum,
            gamma,
        })
    }

    /// Uses a known decomposition of `op` instead of computing one.
    pub fn from_decomposition(
        op: HermitianOperator,
        spectrum: SpectralDecomposition,
        gamma: GammaModel,
    ) -> Result<Self> {
        op.check_dim(spectrum.dim())?;
        Ok(Self {
            op,
            spectrum,
            gamma,
        })
    }

    pub fn operator(&self) -> &HermitianOperator {
        &self.op
    }

    pub fn spectrum(&self) -> &SpectralDecomposition {
        &self.spectrum
    }

    pub fn gamma(&self) -> GammaModel {
        self.gamma
    }

    pub fn distribution(&self, psi: &StateVector) -> Result<LineDistribution> {
        LineDistribution::spectral(&self.spectrum, psi)
    }

    pub fn evaluate(&self, point: &HiddenPoint) -> Result<f64> {
        Ok(self.distribution(point.ray())?.quantile(point.u()))
    }

    /// `sum_i p_i(psi) b(lambda_i)`.
    pub fn line_integral_exact(&self, b: &BorelExpr, psi: &StateVector) -> Result<f64> {
        let weights = self.spectrum.weights(psi)?;
        let mut acc = 0.0;
        for (l, w) in self.spectrum.eigenvalues().iter().zip(weights) {
            if w > 0.0 {
                acc += w * b.eval(*l).map_err(|e| Error::Evaluation(e.to_string()))?;
            }
        }
        Ok(acc)
    }

    /// Compares per-ray moments of `f` with `<T^n>_psi` for `n = 0..=n_max`.
    ///
    /// Row `n` passes when its error is at most `tol * max(1, |T|_2^n)`.
    pub fn moments_check(&self, psi: &StateVector, n_max: u32, tol: f64) -> Result<MomentReport> {
        let norm = self.spectrum.source_norm();
        let mut rows = Vec::with_capacity(n_max as usize + 1);
        let mut power = HermitianOperator::identity(self.op.dim());
        for n in 0..=n_max {
            if n > 0 {
                power = power.product(&self.op)?;
            }
            let line = self.line_integral_exact(&BorelExpr::monomial(n), psi)?;
            let orthodox = power.expectation(psi)?;
            let error = (line - orthodox).abs();
            let bound = tol * norm.powi(n as i32).max(1.0);
            rows.push(MomentRow {
                n,
                line,
                orthodox,
                error,
                pass: error <= bound,
            });
        }
        let pass = rows.iter().all(|r| r.pass);
        Ok(MomentReport { rows, pass })
    }
}

impl HiddenFunction for HiddenObservable {
    fn dim(&self) -> usize {
        self.op.dim()
    }

    fn profile(&self, ray: &StateVector) -> Result<StepProfile> {
        Ok(self.distribution(ray)?.profile())
    }

    fn value(&self, point: &HiddenPoint) -> Result<f64> {
        self.evaluate(point)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentRow {
    pub n: u32,
    pub line: f64,
    pub orthodox: f64,
    pub error: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentReport {
    pub rows: Vec<MomentRow>,
    pub pass: bool,
}

/// `F_psi(r)` for the spectral family of `s`.
pub fn cdf(s: &SpectralDecomposition, psi: &StateVector, r: f64) -> Result<f64> {
    Ok(LineDistribution::spectral(s, psi)?.cdf(r))
}

/// Quasi-inverse of `F_psi` at `u`.
pub fn quantile(s: &SpectralDecomposition, psi: &StateVector, u: f64) -> Result<f64> {
    if !(u > 0.0 && u < 1.0) {
        return Err(Error::InvalidHiddenParameter(u));
    }
    Ok(LineDistribution::spectral(s, psi)?.quantile(u))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CombineOp {
    Sum,
    Product,
}

/// Pointwise sum or product of scaled hidden functions evaluated at one shared `u`.
pub struct Pointwise<'a> {
    op: CombineOp,
    terms: Vec<(f64, &'a dyn HiddenFunction)>,
}

impl<'a> Pointwise<'a> {
    pub fn new(op: CombineOp, terms: Vec<(f64, &'a dyn HiddenFunction)>) -> Result<Self> {
        let Some((_, first)) = terms.first() else {
            return Err(Error::EmptyFamily);
        };
        let d = first.dim();
        for (_, t) in &terms {
            if t.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: t.dim(),
                });
            }
        }
        Ok(Self { op, terms })
    }

    pub fn sum(terms: Vec<&'a dyn HiddenFunction>) -> Result<Self> {
        Self::new(CombineOp::Sum, terms.into_iter().map(|t| (1.0, t)).collect())
    }
}

impl HiddenFunction for Pointwise<'_> {
    fn dim(&self) -> usize {
        self.terms[0].1.dim()
    }

    fn profile(&self, ray: &StateVector) -> Result<StepProfile> {
        let mut acc: Option<StepProfile> = None;
        for (c, t) in &self.terms {
            let p = t.profile(ray)?.map(|v| c * v);
            acc = Some(match acc {
                None => p,
                Some(a) => match self.op {
                    CombineOp::Sum => a.zip_with(&p, |x, y| x + y),
                    CombineOp::Product => a.zip_with(&p, |x, y| x * y),
                },
            });
        }
        Ok(acc.expect("non-empty"))
    }
}

/// Any closure `(ray) -> profile`, for ad-hoc hidden functions.
pub struct FnHidden<F> {
    dim: usize,
    f: F,
}

impl<F> FnHidden<F>
where
    F: Fn(&StateVector) -> Result<StepProfile> + Send + Sync,
{
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F> HiddenFunction for FnHidden<F>
where
    F: Fn(&StateVector) -> Result<StepProfile> + Send + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn profile(&self, ray: &StateVector) -> Result<StepProfile> {
        (self.f)(ray)
    }
}

fn first_moment(h: &dyn HiddenFunction, psi: &StateVector) -> Result<f64> {
    h.line_integral(psi, &|v| v)
}

fn polarization_probe(dim: usize, j: usize, k: usize, phase: Complex64) -> StateVector {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut v = CVector::zeros(dim);
    v[j] = Complex64::new(s, 0.0);
    v[k] = phase * s;
    StateVector::new(v).expect("non-zero probe")
}

/// Recovers the operator `T` with `integral of h = <T>_psi` by polarization over
/// `e_j`, `(e_j + e_k)/sqrt 2` and `(e_j + i e_k)/sqrt 2`, then validates on
/// random held-out rays.
pub fn orthodoxy_reconstruct(h: &dyn HiddenFunction) -> Result<HermitianOperator> {
    let d = h.dim();
    let mut m = CMatrix::zeros(d, d);
    let mut diag = vec![0.0; d];
    for (j, slot) in diag.iter_mut().enumerate() {
        *slot = first_moment(h, &StateVector::basis(d, j))?;
        m[(j, j)] = Complex64::new(*slot, 0.0);
    }
    for j in 0..d {
        for k in j + 1..d {
            let mid = 0.5 * (diag[j] + diag[k]);
            let re = first_moment(h, &polarization_probe(d, j, k, Complex64::ONE))? - mid;
            let im = mid - first_moment(h, &polarization_probe(d, j, k, Complex64::i()))?;
            m[(j, k)] = Complex64::new(re, im);
            m[(k, j)] = Complex64::new(re, -im);
        }
    }
    let candidate = HermitianOperator::new(m)?;

    let keyed = KeyedRng::new(HELD_OUT_SEED);
    let tol = HELD_OUT_TOL * candidate.frobenius_norm().max(1.0);
    let mut worst: f64 = 0.0;
    for i in 0..HELD_OUT_RAYS {
        let psi = haar_ray(&mut keyed.at(streams::HELD_OUT_RAYS, i as u64), d);
        worst = worst.max((first_moment(h, &psi)? - candidate.expectation(&psi)?).abs());
    }
    if !(worst <= tol) {
        return Err(Error::NonQuadraticFirstMoment { residual: worst });
    }
    Ok(candidate)
}

/// `| integral of h^2 on the ray of psi - <T^2>_psi |`.
pub fn orthodoxy_second_moment_gap(
    h: &dyn HiddenFunction,
    candidate: &HermitianOperator,
    psi: &StateVector,
) -> Result<f64> {
    let line = h.line_integral(psi, &|v| v * v)?;
    let orthodox = candidate.product(candidate)?.expectation(psi)?;
    Ok((line - orthodox).abs())
}

/// A hidden proposition: the event `{f_E = 1}` of a projector's observable.
#[derive(Debug, Clone, PartialEq)]
pub struct HiddenProposition {
    projector: HermitianOperator,
    observable: HiddenObservable,
}

impl HiddenProposition {
    pub fn from_projector(e: &CMatrix, gamma: GammaModel) -> Result<Self> {
        let op = HermitianOperator::new(e.clone()).map_err(|err| match err {
            Error::HermiticityViolation { skew, .. } => Error::NotAProjector { residual: skew },
            other => other,
        })?;
        let residual = op.projector_residual();
        if !(residual <= PROJECTOR_TOL * op.frobenius_norm().max(1.0)) {
            return Err(Error::NotAProjector { residual });
        }
        let s = op.decompose()?;
        let snapped = s
            .eigenvalues()
            .iter()
            .map(|&l| {
                let r = l.round();
                if (l - r).abs() <= 1e-8 && (r == 0.0 || r == 1.0) {
                    Ok(r)
                } else {
                    Err(Error::NotAProjector {
                        residual: (l - r).abs(),
                    })
                }
            })
            .collect::<Result<Vec<_>>>()?;
        let spectrum = SpectralDecomposition::from_parts(snapped, s.projectors().to_vec())?;
        let observable = HiddenObservable::from_decomposition(op.clone(), spectrum, gamma)?;
        Ok(Self {
            projector: op,
            observable,
        })
    }

    pub fn projector(&self) -> &HermitianOperator {
        &self.projector
    }

    pub fn observable(&self) -> &HiddenObservable {
        &self.observable
    }

    /// Indicator of the proposition at a hidden point: `0.0` or `1.0`.
    pub fn indicator(&self, point: &HiddenPoint) -> Result<f64> {
        self.observable.evaluate(point)
    }

    /// Exact `u`-measure of the event on the ray of `psi`.
    pub fn measure_on_line(&self, psi: &StateVector) -> Result<f64> {
        Ok(self
            .observable
            .distribution(psi)?
            .integrate(|v| if v == 1.0 { 1.0 } else { 0.0 }))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquivalenceReport {
    pub rays: usize,
    /// Largest weight difference over rays with matching supports.
    pub max_weight_error: f64,
    /// Rays whose supports differ.
    pub support_mismatches: usize,
    pub pass: bool,
}

/// Compares the per-ray value distributions of two hidden functions.
///
/// Values are aligned with relative tolerance `1e-9`; weights must agree within `tol`.
pub fn statistical_equivalence_check(
    f1: &dyn HiddenFunction,
    f2: &dyn HiddenFunction,
    rays: &[StateVector],
    tol: f64,
) -> Result<EquivalenceReport> {
    const VALUE_TOL: f64 = 1e-9;
    if f1.dim() != f2.dim() {
        return Err(Error::DimensionMismatch {
            expected: f1.dim(),
            found: f2.dim(),
        });
    }
    let mut max_weight_error: f64 = 0.0;
    let mut support_mismatches = 0;
    for ray in rays {
        let a = f1.profile(ray)?.distribution(VALUE_TOL);
        let b = f2.profile(ray)?.distribution(VALUE_TOL);
        match a.weight_distance(&b, VALUE_TOL) {
            Some(w) => max_weight_error = max_weight_error.max(w),
            None => support_mismatches += 1,
        }
    }
    Ok(EquivalenceReport {
        rays: rays.len(),
        max_weight_error,
        support_mismatches,
        pass: support_mismatches == 0 && max_weight_error <= tol,
    })
}
