//! Dense Hermitian linear algebra: validation, spectral decomposition with
//! degeneracy merging, Borel functional calculus, expectations and traces.

use std::ops::Bound;

use nalgebra::linalg::SymmetricEigen;
use num_complex::Complex64;

use crate::borel::BorelExpr;
use crate::error::{Error, Result};
use crate::{CMatrix, CVector};

/// Relative Frobenius tolerance on the skew part accepted by [`HermitianOperator::new`].
pub const HERMITICITY_TOL: f64 = 1e-12;
/// Relative tolerance under which neighbouring eigenvalues share one projector.
pub const MERGE_TOL: f64 = 1e-9;
/// Relative tolerance on `[A, B]` under which two operators count as commuting.
pub const COMMUTING_TOL: f64 = 1e-10;
/// Absolute tolerance for density matrix positivity and unit trace.
pub const DENSITY_TOL: f64 = 1e-10;

const EIGEN_EPS: f64 = 1e-15;
const EIGEN_MAX_ITER: usize = 10_000;

pub(crate) fn frobenius(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn check_square(raw: &CMatrix) -> Result<usize> {
    if raw.nrows() != raw.ncols() {
        return Err(Error::NonSquare {
            rows: raw.nrows(),
            cols: raw.ncols(),
        });
    }
    if raw.nrows() == 0 {
        return Err(Error::Empty);
    }
    Ok(raw.nrows())
}

/// A bounded self-adjoint operator on `C^dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    matrix: CMatrix,
    correction: f64,
}

impl HermitianOperator {
    /// Validates hermiticity and symmetrizes the residual skew part.
    pub fn new(raw: CMatrix) -> Result<Self> {
        check_square(&raw)?;
        let skew = (&raw - raw.adjoint()) * Complex64::new(0.5, 0.0);
        let skew_norm = frobenius(&skew);
        let tolerance = HERMITICITY_TOL * frobenius(&raw).max(1.0);
        if !(skew_norm <= tolerance) {
            return Err(Error::HermiticityViolation {
                skew: skew_norm,
                tolerance,
            });
        }
        Ok(Self::symmetrized(raw, skew_norm))
    }

    /// Internal constructor for matrices that are Hermitian by construction.
    pub(crate) fn symmetrized(raw: CMatrix, correction: f64) -> Self {
        let matrix = (&raw + raw.adjoint()) * Complex64::new(0.5, 0.0);
        Self { matrix, correction }
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Result<Self> {
        let d = diag.len();
        if d == 0 {
            return Err(Error::Empty);
        }
        let mut m = CMatrix::zeros(d, d);
        for (i, &v) in diag.iter().enumerate() {
            m[(i, i)] = Complex64::new(v, 0.0);
        }
        Ok(Self::symmetrized(m, 0.0))
    }

    /// Builds an operator from real row-major rows.
    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let d = rows.len();
        let mut m = CMatrix::zeros(d, rows.first().map_or(0, |r| r.len()));
        for (i, row) in rows.iter().enumerate() {
            if row.len() != m.ncols() {
                return Err(Error::NonSquare {
                    rows: d,
                    cols: row.len(),
                });
            }
            for (j, &v) in row.iter().enumerate() {
                m[(i, j)] = Complex64::new(v, 0.0);
            }
        }
        Self::new(m)
    }

    pub fn identity(dim: usize) -> Self {
        Self::symmetrized(CMatrix::identity(dim, dim), 0.0)
    }

    pub fn pauli_x() -> Self {
        Self::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).expect("hermitian")
    }

    pub fn pauli_y() -> Self {
        let i = Complex64::i();
        let m = CMatrix::from_row_slice(2, 2, &[Complex64::ZERO, i, -i, Complex64::ZERO]);
        Self::new(m).expect("hermitian")
    }

    pub fn pauli_z() -> Self {
        Self::from_real_diagonal(&[1.0, -1.0]).expect("hermitian")
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// Frobenius norm of the skew part removed during validation.
    pub fn correction(&self) -> f64 {
        self.correction
    }

    pub fn frobenius_norm(&self) -> f64 {
        frobenius(&self.matrix)
    }

    /// Real linear combination `a*self + b*other`.
    pub fn combine(&self, a: f64, other: &Self, b: f64) -> Result<Self> {
        self.check_dim(other.dim())?;
        let m = &self.matrix * Complex64::new(a, 0.0) + &other.matrix * Complex64::new(b, 0.0);
        Ok(Self::symmetrized(m, 0.0))
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self::symmetrized(&self.matrix * Complex64::new(a, 0.0), 0.0)
    }

    /// Matrix product, symmetrized. Only Hermitian when the factors commute.
    pub fn product(&self, other: &Self) -> Result<Self> {
        self.check_dim(other.dim())?;
        Ok(Self::symmetrized(&self.matrix * &other.matrix, 0.0))
    }

    pub fn powi(&self, n: u32) -> Self {
        let mut acc = CMatrix::identity(self.dim(), self.dim());
        for _ in 0..n {
            acc = &acc * &self.matrix;
        }
        Self::symmetrized(acc, 0.0)
    }

    pub(crate) fn check_dim(&self, found: usize) -> Result<()> {
        if found != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found,
            });
        }
        Ok(())
    }

    /// Eigenpairs sorted by ascending eigenvalue, without degeneracy merging.
    pub fn eigenpairs(&self) -> Result<Vec<(f64, CVector)>> {
        let eig = SymmetricEigen::try_new(self.matrix.clone(), EIGEN_EPS, EIGEN_MAX_ITER)
            .ok_or(Error::EigensolverFailure)?;
        let mut pairs: Vec<(f64, CVector)> = eig
            .eigenvalues
            .iter()
            .enumerate()
            .map(|(k, &lambda)| (lambda, eig.eigenvectors.column(k).into_owned()))
            .collect();
        if pairs.iter().any(|(l, _)| !l.is_finite()) {
            return Err(Error::EigensolverFailure);
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(pairs)
    }

    pub fn decompose(&self) -> Result<SpectralDecomposition> {
        SpectralDecomposition::of(self)
    }

    /// `<T psi, psi> / <psi, psi>`.
    pub fn expectation(&self, psi: &StateVector) -> Result<f64> {
        self.check_dim(psi.dim())?;
        let v = psi.components();
        let tv = &self.matrix * v;
        Ok(v.dotc(&tv).re / v.norm_squared())
    }

    /// `Re Trace[T D]`.
    pub fn trace_with(&self, density: &DensityMatrix) -> Result<f64> {
        self.check_dim(density.dim())?;
        let d = self.dim();
        let t = &self.matrix;
        let rho = density.matrix();
        let mut acc = 0.0;
        for j in 0..d {
            for k in 0..d {
                acc += (t[(j, k)] * rho[(k, j)]).re;
            }
        }
        Ok(acc)
    }

    /// Frobenius norm of `AB - BA`.
    pub fn commutator_norm(&self, other: &Self) -> Result<f64> {
        self.check_dim(other.dim())?;
        let c = &self.matrix * &other.matrix - &other.matrix * &self.matrix;
        Ok(frobenius(&c))
    }

    pub fn commuting_threshold(&self, other: &Self) -> f64 {
        COMMUTING_TOL * self.frobenius_norm().max(1.0) * other.frobenius_norm().max(1.0)
    }

    pub fn commutes_with(&self, other: &Self) -> Result<bool> {
        Ok(self.commutator_norm(other)? <= self.commuting_threshold(other))
    }

    /// Validates that this operator is an orthogonal projector.
    pub fn projector_residual(&self) -> f64 {
        frobenius(&(&self.matrix * &self.matrix - &self.matrix))
    }
}

/// Distinct eigenvalues in ascending order together with their spectral projectors.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDecomposition {
    eigenvalues: Vec<f64>,
    projectors: Vec<CMatrix>,
    source_norm: f64,
}

impl SpectralDecomposition {
    fn of(op: &HermitianOperator) -> Result<Self> {
        let pairs = op.eigenpairs()?;
        let dim = op.dim();
        let source_norm = pairs.iter().map(|(l, _)| l.abs()).fold(0.0, f64::max);
        let merge = MERGE_TOL * source_norm.max(1.0);

        let mut eigenvalues = Vec::new();
        let mut projectors = Vec::new();
        let mut start = 0;
        while start < pairs.len() {
            let mut end = start + 1;
            while end < pairs.len() && pairs[end].0 - pairs[end - 1].0 <= merge {
                end += 1;
            }
            let cluster = &pairs[start..end];
            let mean = cluster.iter().map(|(l, _)| l).sum::<f64>() / cluster.len() as f64;
            let mut p = CMatrix::zeros(dim, dim);
            for (_, v) in cluster {
                p += v * v.adjoint();
            }
            eigenvalues.push(mean);
            projectors.push(p);
            start = end;
        }
        Ok(Self {
            eigenvalues,
            projectors,
            source_norm,
        })
    }

    /// Assembles a decomposition from known distinct eigenvalues and projectors.
    pub fn from_parts(eigenvalues: Vec<f64>, projectors: Vec<CMatrix>) -> Result<Self> {
        if eigenvalues.is_empty() || eigenvalues.len() != projectors.len() {
            return Err(Error::InvalidDecomposition(
                "need one projector per eigenvalue".into(),
            ));
        }
        if eigenvalues.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidDecomposition(
                "eigenvalues must be strictly increasing".into(),
            ));
        }
        let dim = projectors[0].nrows();
        for p in &projectors {
            check_square(p)?;
            if p.nrows() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: p.nrows(),
                });
            }
        }
        let source_norm = eigenvalues.iter().map(|l| l.abs()).fold(0.0, f64::max);
        let s = Self {
            eigenvalues,
            projectors,
            source_norm,
        };
        let residual = s.invariant_residual();
        if residual > 1e-8 {
            return Err(Error::InvalidDecomposition(format!(
                "projector invariants violated (residual {residual:e})"
            )));
        }
        Ok(s)
    }

    pub fn dim(&self) -> usize {
        self.projectors[0].nrows()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn projectors(&self) -> &[CMatrix] {
        &self.projectors
    }

    /// Largest absolute eigenvalue, i.e. the operator 2-norm.
    pub fn source_norm(&self) -> f64 {
        self.source_norm
    }

    pub fn merge_tolerance(&self) -> f64 {
        MERGE_TOL * self.source_norm.max(1.0)
    }

    /// `sum_i lambda_i P_i`.
    pub fn reconstruct(&self) -> CMatrix {
        self.map_matrix(|l| l)
    }

    fn map_matrix(&self, mut f: impl FnMut(f64) -> f64) -> CMatrix {
        let d = self.dim();
        let mut acc = CMatrix::zeros(d, d);
        for (l, p) in self.eigenvalues.iter().zip(&self.projectors) {
            acc += p * Complex64::new(f(*l), 0.0);
        }
        acc
    }

    /// Largest violation among hermiticity, idempotence, orthogonality and completeness.
    pub fn invariant_residual(&self) -> f64 {
        let d = self.dim();
        let mut worst: f64 = 0.0;
        let mut sum = CMatrix::zeros(d, d);
        for (i, p) in self.projectors.iter().enumerate() {
            worst = worst.max(frobenius(&(p - p.adjoint())));
            worst = worst.max(frobenius(&(p * p - p)));
            for q in &self.projectors[i + 1..] {
                worst = worst.max(frobenius(&(p * q)));
            }
            sum += p;
        }
        worst.max(frobenius(&(sum - CMatrix::identity(d, d))))
    }

    /// `E_B`: the sum of projectors whose eigenvalue lies in `set`.
    pub fn projector(&self, set: &BorelSet) -> CMatrix {
        self.map_matrix(|l| if set.contains(l) { 1.0 } else { 0.0 })
    }

    /// `b(T) = sum_i b(lambda_i) P_i` for a plain closure.
    pub fn apply_fn(&self, f: impl FnMut(f64) -> f64) -> HermitianOperator {
        HermitianOperator::symmetrized(self.map_matrix(f), 0.0)
    }

    /// `b(T)` for a Borel expression.
    pub fn apply_borel(&self, b: &BorelExpr) -> Result<HermitianOperator> {
        let values = self
            .eigenvalues
            .iter()
            .map(|&l| b.eval(l).map_err(|e| Error::Evaluation(e.to_string())))
            .collect::<Result<Vec<_>>>()?;
        let mut it = values.into_iter();
        Ok(self.apply_fn(|_| it.next().expect("one value per eigenvalue")))
    }

    /// Spectral weights `p_i = |P_i psi|^2 / |psi|^2`, one per eigenvalue.
    pub fn weights(&self, psi: &StateVector) -> Result<Vec<f64>> {
        if psi.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: psi.dim(),
            });
        }
        let v = psi.components();
        let norm = v.norm_squared();
        Ok(self
            .projectors
            .iter()
            .map(|p| (p * v).norm_squared() / norm)
            .collect())
    }
}

/// A finite union of real intervals, each end open, closed or unbounded.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BorelSet {
    intervals: Vec<(Bound<f64>, Bound<f64>)>,
}

impl BorelSet {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn real_line() -> Self {
        Self::interval(Bound::Unbounded, Bound::Unbounded)
    }

    pub fn interval(lo: Bound<f64>, hi: Bound<f64>) -> Self {
        Self {
            intervals: vec![(lo, hi)],
        }
    }

    /// `(-inf, s]`.
    pub fn half_line(s: f64) -> Self {
        Self::interval(Bound::Unbounded, Bound::Included(s))
    }

    pub fn singleton(s: f64) -> Self {
        Self::interval(Bound::Included(s), Bound::Included(s))
    }

    pub fn union(mut self, other: &BorelSet) -> Self {
        self.intervals.extend_from_slice(&other.intervals);
        self
    }

    pub fn contains(&self, x: f64) -> bool {
        self.intervals.iter().any(|(lo, hi)| {
            let above = match lo {
                Bound::Included(a) => x >= *a,
                Bound::Excluded(a) => x > *a,
                Bound::Unbounded => true,
            };
            let below = match hi {
                Bound::Included(b) => x <= *b,
                Bound::Excluded(b) => x < *b,
                Bound::Unbounded => true,
            };
            above && below
        })
    }
}

/// A density matrix: Hermitian, positive semidefinite, unit trace.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    op: HermitianOperator,
}

impl DensityMatrix {
    pub fn new(raw: CMatrix) -> Result<Self> {
        let op = HermitianOperator::new(raw).map_err(|e| match e {
            Error::HermiticityViolation { .. } => Error::NotADensityMatrix(e.to_string()),
            other => other,
        })?;
        Self::from_operator(op)
    }

    pub fn from_operator(op: HermitianOperator) -> Result<Self> {
        let trace: f64 = (0..op.dim()).map(|i| op.matrix()[(i, i)].re).sum();
        if !((trace - 1.0).abs() <= DENSITY_TOL) {
            return Err(Error::NotADensityMatrix(format!("trace {trace} != 1")));
        }
        let pairs = op.eigenpairs()?;
        if let Some((min, _)) = pairs.first() {
            if *min < -DENSITY_TOL {
                return Err(Error::NotADensityMatrix(format!(
                    "negative eigenvalue {min:e}"
                )));
            }
        }
        Ok(Self { op })
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            op: HermitianOperator::symmetrized(
                CMatrix::identity(dim, dim) * Complex64::new(1.0 / dim as f64, 0.0),
                0.0,
            ),
        }
    }

    pub fn pure(psi: &StateVector) -> Self {
        let v = psi.normalized();
        let v = v.components();
        Self {
            op: HermitianOperator::symmetrized(v * v.adjoint(), 0.0),
        }
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Result<Self> {
        Self::from_operator(HermitianOperator::from_real_diagonal(diag)?)
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn matrix(&self) -> &CMatrix {
        self.op.matrix()
    }

    pub fn as_operator(&self) -> &HermitianOperator {
        &self.op
    }

    /// Orthonormal eigenvectors carrying positive weight, weights renormalized to sum 1.
    pub fn eigen_ensemble(&self) -> Result<Vec<(f64, StateVector)>> {
        let pairs = self.op.eigenpairs()?;
        let cutoff = DENSITY_TOL;
        let kept: Vec<(f64, CVector)> = pairs.into_iter().filter(|(w, _)| *w > cutoff).collect();
        let total: f64 = kept.iter().map(|(w, _)| w).sum();
        kept.into_iter()
            .map(|(w, v)| Ok((w / total, StateVector::new(v)?)))
            .collect()
    }
}

/// A non-zero vector of `C^dim`; its ray is the apparent pure state.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    components: CVector,
}

impl StateVector {
    pub fn new(components: CVector) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::Empty);
        }
        let norm = components.norm_squared();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::ZeroVector);
        }
        Ok(Self { components })
    }

    pub fn from_real(values: &[f64]) -> Result<Self> {
        Self::new(CVector::from_iterator(
            values.len(),
            values.iter().map(|&v| Complex64::new(v, 0.0)),
        ))
    }

    pub fn from_complex(values: &[Complex64]) -> Result<Self> {
        Self::new(CVector::from_column_slice(values))
    }

    /// The `j`-th standard basis vector.
    pub fn basis(dim: usize, j: usize) -> Self {
        let mut v = CVector::zeros(dim);
        v[j] = Complex64::ONE;
        Self { components: v }
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &CVector {
        &self.components
    }

    pub fn norm(&self) -> f64 {
        self.components.norm()
    }

    pub fn normalized(&self) -> Self {
        Self {
            components: &self.components / Complex64::new(self.norm(), 0.0),
        }
    }

    pub fn scaled(&self, z: Complex64) -> Result<Self> {
        Self::new(&self.components * z)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn close(a: &CMatrix, b: &CMatrix, tol: f64) -> bool {
        frobenius(&(a - b)) <= tol
    }

    #[test]
    fn identity_accepted_without_correction() {
        let op = HermitianOperator::new(CMatrix::identity(2, 2)).unwrap();
        assert_eq!(op.correction(), 0.0);
    }

    #[test]
    fn pauli_y_is_hermitian() {
        let op = HermitianOperator::pauli_y();
        assert_eq!(op.correction(), 0.0);
    }

    #[test]
    fn nilpotent_rejected() {
        let m = CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(0., 0.), c(0., 0.)]);
        assert!(matches!(
            HermitianOperator::new(m),
            Err(Error::HermiticityViolation { .. })
        ));
    }

    #[test]
    fn non_square_rejected() {
        let m = CMatrix::zeros(2, 3);
        assert!(matches!(
            HermitianOperator::new(m),
            Err(Error::NonSquare { rows: 2, cols: 3 })
        ));
    }

    #[test]
    fn tiny_skew_is_symmetrized() {
        let m = CMatrix::from_row_slice(2, 2, &[c(1., 0.), c(0.5, 1e-14), c(0.5, 0.), c(2., 0.)]);
        let op = HermitianOperator::new(m).unwrap();
        assert!(op.correction() > 0.0);
        assert_eq!(op.matrix()[(0, 1)], op.matrix()[(1, 0)].conj());
    }

    #[test]
    fn diagonal_decomposition() {
        let s = HermitianOperator::from_real_diagonal(&[-1.0, 1.0])
            .unwrap()
            .decompose()
            .unwrap();
        assert_eq!(s.eigenvalues().len(), 2);
        assert!((s.eigenvalues()[0] + 1.0).abs() < 1e-14);
        assert!((s.eigenvalues()[1] - 1.0).abs() < 1e-14);
        let p0 = HermitianOperator::from_real_diagonal(&[1.0, 0.0]).unwrap();
        assert!(close(&s.projectors()[0], p0.matrix(), 1e-14));
    }

    #[test]
    fn identity_merges_to_single_projector() {
        let s = HermitianOperator::identity(5).decompose().unwrap();
        assert_eq!(s.eigenvalues(), &[1.0]);
        assert!(close(&s.projectors()[0], &CMatrix::identity(5, 5), 1e-14));
    }

    #[test]
    fn pauli_x_projectors() {
        let s = HermitianOperator::pauli_x().decompose().unwrap();
        let minus = CMatrix::from_row_slice(2, 2, &[c(0.5, 0.), c(-0.5, 0.), c(-0.5, 0.), c(0.5, 0.)]);
        let plus = CMatrix::from_row_slice(2, 2, &[c(0.5, 0.), c(0.5, 0.), c(0.5, 0.), c(0.5, 0.)]);
        assert!((s.eigenvalues()[0] + 1.0).abs() < 1e-14);
        assert!(close(&s.projectors()[0], &minus, 1e-14));
        assert!(close(&s.projectors()[1], &plus, 1e-14));
        assert!(s.invariant_residual() < 1e-14);
        assert!(close(&s.reconstruct(), HermitianOperator::pauli_x().matrix(), 1e-14));
    }

    #[test]
    fn projector_selection() {
        let s = HermitianOperator::from_real_diagonal(&[-1.0, 1.0])
            .unwrap()
            .decompose()
            .unwrap();
        let p = s.projector(&BorelSet::half_line(0.0));
        assert!(close(&p, HermitianOperator::from_real_diagonal(&[1.0, 0.0]).unwrap().matrix(), 1e-14));
        assert!(close(&s.projector(&BorelSet::real_line()), &CMatrix::identity(2, 2), 1e-14));
        assert!(close(&s.projector(&BorelSet::empty()), &CMatrix::zeros(2, 2), 0.0));

        let sx = HermitianOperator::pauli_x().decompose().unwrap();
        let p = sx.projector(&BorelSet::interval(
            Bound::Included(sx.eigenvalues()[1]),
            Bound::Included(sx.eigenvalues()[1]),
        ));
        let plus = CMatrix::from_element(2, 2, c(0.5, 0.));
        assert!(close(&p, &plus, 1e-14));
    }

    #[test]
    fn borel_application() {
        let s = HermitianOperator::from_real_diagonal(&[-1.0, 1.0])
            .unwrap()
            .decompose()
            .unwrap();
        let sq = s.apply_borel(&BorelExpr::parse("x^2").unwrap()).unwrap();
        assert!(close(sq.matrix(), &CMatrix::identity(2, 2), 1e-13));

        let s2 = HermitianOperator::from_real_diagonal(&[-2.0, 3.0])
            .unwrap()
            .decompose()
            .unwrap();
        let chi = s2
            .apply_borel(&BorelExpr::parse("1 - step(0)").unwrap())
            .unwrap();
        assert!(close(
            chi.matrix(),
            HermitianOperator::from_real_diagonal(&[1.0, 0.0]).unwrap().matrix(),
            1e-14
        ));
    }

    #[test]
    fn expectations() {
        let psi = StateVector::from_real(&[1.0, 1.0]).unwrap();
        assert!((HermitianOperator::identity(2).expectation(&psi).unwrap() - 1.0).abs() < 1e-15);
        let z = HermitianOperator::from_real_diagonal(&[-1.0, 1.0]).unwrap();
        assert!(z.expectation(&psi).unwrap().abs() < 1e-15);
        let e0 = StateVector::basis(2, 0);
        assert!(HermitianOperator::pauli_x().expectation(&e0).unwrap().abs() < 1e-15);
        assert!(matches!(
            z.expectation(&StateVector::basis(3, 0)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn traces() {
        let half = DensityMatrix::maximally_mixed(2);
        assert!((HermitianOperator::identity(2).trace_with(&half).unwrap() - 1.0).abs() < 1e-15);
        let z = HermitianOperator::from_real_diagonal(&[-1.0, 1.0]).unwrap();
        assert!(z.trace_with(&half).unwrap().abs() < 1e-15);
        let d = DensityMatrix::from_real_diagonal(&[0.3, 0.7]).unwrap();
        assert!(HermitianOperator::pauli_x().trace_with(&d).unwrap().abs() < 1e-15);
    }

    #[test]
    fn commutators() {
        let x = HermitianOperator::pauli_x();
        let z = HermitianOperator::pauli_z();
        assert_eq!(x.commutator_norm(&x).unwrap(), 0.0);
        let a = HermitianOperator::from_real_diagonal(&[1.0, 2.0]).unwrap();
        let b = HermitianOperator::from_real_diagonal(&[3.0, -4.0]).unwrap();
        assert_eq!(a.commutator_norm(&b).unwrap(), 0.0);
        // [X, Z] = -2i Y has Frobenius norm 2 * sqrt(2).
        let n = x.commutator_norm(&z).unwrap();
        assert!((n - 2.0 * 2f64.sqrt()).abs() < 1e-14);
        assert!(!x.commutes_with(&z).unwrap());
    }

    #[test]
    fn density_validation() {
        assert!(matches!(
            DensityMatrix::from_real_diagonal(&[0.5, 0.6]),
            Err(Error::NotADensityMatrix(_))
        ));
        assert!(matches!(
            DensityMatrix::from_real_diagonal(&[1.5, -0.5]),
            Err(Error::NotADensityMatrix(_))
        ));
        assert!(DensityMatrix::from_real_diagonal(&[0.3, 0.7]).is_ok());
    }

    #[test]
    fn zero_state_rejected() {
        assert_eq!(StateVector::from_real(&[0.0, 0.0]), Err(Error::ZeroVector));
    }

    #[test]
    fn from_parts_rejects_bad_projectors() {
        let p = CMatrix::identity(2, 2) * c(0.5, 0.0);
        assert!(SpectralDecomposition::from_parts(vec![1.0], vec![p]).is_err());
        assert!(SpectralDecomposition::from_parts(vec![2.0, 1.0], vec![CMatrix::zeros(2, 2); 2]).is_err());
    }
}
