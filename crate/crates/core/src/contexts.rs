//! Commutative contexts: families of commuting operators realized as Borel
//! functions of one generator, `A_i = b_i(T0)`, so that every member's hidden
//! observable factors through the single observable `f0` of `T0`.
//!
//! Inside a context, sums and products of hidden observables are again hidden
//! observables of the corresponding operator combinations, exactly and
//! pointwise. Outside (non-commuting pairs), [`nogo_witness`] looks for a ray
//! where `f_A + f_B` on a shared hidden parameter loses orthodox second moments.

use std::sync::Arc;

use num_complex::Complex64;
use rand::distr::{Distribution, Open01};
use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hidden::{
    haar_ray, orthodoxy_reconstruct, orthodoxy_second_moment_gap, CombineOp, GammaModel,
    HiddenFunction, HiddenObservable, HiddenPoint, Pointwise, StepProfile,
};
use crate::rng::{streams, KeyedRng};
use crate::spectral::{frobenius, HermitianOperator, SpectralDecomposition, StateVector};
use crate::CMatrix;

/// Retries of the random combination before giving up on separating eigenspaces.
pub const JOINT_DIAG_ATTEMPTS: usize = 8;
/// Relative tolerance for "member is scalar on a joint eigenspace".
pub const JOINT_DIAG_TOL: f64 = 1e-9;
/// Relative operator-side tolerance used by [`Context::homomorphism_check`].
pub const OPERATOR_TOL: f64 = 1e-8;
/// Default number of random rays tried by [`nogo_witness`].
pub const DEFAULT_WITNESS_SEARCH: usize = 4096;

/// Caveat attached to every no-go witness.
pub const SHARED_U_CAVEAT: &str =
    "certifies only the shared-u coupling convention (a model choice): f_A and f_B read the same hidden parameter u";

const JOINT_DIAG_SEED: u64 = 0x6a6f_696e_7464_6961;

/// Joint eigenspaces of a commuting family and each member's value on them.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDiagonalization {
    /// Orthogonal projectors onto the joint eigenspaces, labelled `1..=m` in order.
    pub projectors: Vec<CMatrix>,
    /// `transfers[i][j]`: eigenvalue of member `i` on joint eigenspace `j + 1`.
    pub transfers: Vec<Vec<f64>>,
    /// Attempts used (1 when the first random combination separated everything).
    pub attempts: usize,
}

impl JointDiagonalization {
    pub fn labels(&self) -> usize {
        self.projectors.len()
    }

    /// `T0 = sum_j j P_j` as a decomposition with exact integer eigenvalues.
    pub fn generator(&self) -> Result<(HermitianOperator, SpectralDecomposition)> {
        let labels: Vec<f64> = (1..=self.labels()).map(|j| j as f64).collect();
        let s = SpectralDecomposition::from_parts(labels, self.projectors.clone())?;
        Ok((s.apply_fn(|l| l), s))
    }
}

/// Finds the joint eigenspaces by eigendecomposing a random positive
/// combination of the family and checking every member is scalar on each
/// eigenspace. Eigenspaces are ordered by their tuple of member values.
pub fn joint_diagonalize(family: &[HermitianOperator]) -> Result<JointDiagonalization> {
    let Some(first) = family.first() else {
        return Err(Error::EmptyFamily);
    };
    let d = first.dim();
    for (i, a) in family.iter().enumerate() {
        a.check_dim(d).map_err(|_| Error::DimensionMismatch {
            expected: d,
            found: a.dim(),
        })?;
        for (j, b) in family.iter().enumerate().skip(i + 1) {
            let norm = a.commutator_norm(b)?;
            if norm > a.commuting_threshold(b) {
                return Err(Error::NotCommuting {
                    first: i,
                    second: j,
                    norm,
                });
            }
        }
    }

    let keyed = KeyedRng::new(JOINT_DIAG_SEED);
    for attempt in 0..JOINT_DIAG_ATTEMPTS {
        let mut rng = keyed.at(streams::JOINT_DIAGONALIZE, attempt as u64);
        let mut m = CMatrix::zeros(d, d);
        for a in family {
            let r = 1.0 + rng.random::<f64>();
            m += a.matrix() * Complex64::new(r, 0.0);
        }
        let s = HermitianOperator::symmetrized(m, 0.0).decompose()?;
        if let Some(mut spaces) = split_family(family, &s) {
            spaces.sort_by(|a, b| {
                a.0.iter()
                    .zip(&b.0)
                    .map(|(x, y)| x.total_cmp(y))
                    .find(|o| o.is_ne())
                    .unwrap_or(std::cmp::Ordering::Equal)
            });
            let transfers = (0..family.len())
                .map(|i| spaces.iter().map(|(vals, _)| vals[i]).collect())
                .collect();
            return Ok(JointDiagonalization {
                projectors: spaces.into_iter().map(|(_, p)| p).collect(),
                transfers,
                attempts: attempt + 1,
            });
        }
    }
    Err(Error::DegeneracyResolutionFailure {
        attempts: JOINT_DIAG_ATTEMPTS,
    })
}

/// `(member values, projector)` per eigenspace of `s`, or `None` if some member
/// is not scalar on some eigenspace.
fn split_family(
    family: &[HermitianOperator],
    s: &SpectralDecomposition,
) -> Option<Vec<(Vec<f64>, CMatrix)>> {
    let mut spaces = Vec::with_capacity(s.projectors().len());
    for p in s.projectors() {
        let rank = p.trace().re;
        let mut values = Vec::with_capacity(family.len());
        for a in family {
            let ap = a.matrix() * p;
            let value = ap.trace().re / rank;
            let residual = frobenius(&(ap - p * Complex64::new(value, 0.0)));
            if residual > JOINT_DIAG_TOL * a.frobenius_norm().max(1.0) {
                return None;
            }
            values.push(value);
        }
        spaces.push((values, p.clone()));
    }
    Some(spaces)
}

/// A member hidden observable `b_i o f0`, reading a transfer table by generator label.
#[derive(Debug, Clone)]
pub struct ContextObservable {
    f0: Arc<HiddenObservable>,
    transfer: Vec<f64>,
}

impl ContextObservable {
    pub fn transfer(&self) -> &[f64] {
        &self.transfer
    }

    fn read(&self, label: f64) -> f64 {
        self.transfer[label as usize - 1]
    }
}

impl HiddenFunction for ContextObservable {
    fn dim(&self) -> usize {
        self.f0.operator().dim()
    }

    fn profile(&self, ray: &StateVector) -> Result<StepProfile> {
        Ok(self.f0.profile(ray)?.map(|l| self.read(l)))
    }

    fn value(&self, point: &HiddenPoint) -> Result<f64> {
        Ok(self.read(self.f0.evaluate(point)?))
    }
}

/// A combination of context members: the hidden function and the operator it should represent.
#[derive(Debug, Clone)]
pub struct Combined {
    pub function: ContextObservable,
    pub operator: HermitianOperator,
    /// `|b(T0) - operator|_F` for the combined transfer table `b`.
    pub compatibility_error: f64,
}

#[derive(Debug, Clone)]
struct Member {
    operator: HermitianOperator,
    transfer: Vec<f64>,
}

/// A commutative context over a family of commuting operators.
#[derive(Debug, Clone)]
pub struct Context {
    generator: HermitianOperator,
    members: Vec<Member>,
    f0: Arc<HiddenObservable>,
}

impl Context {
    pub fn new(family: &[HermitianOperator], gamma: GammaModel) -> Result<Self> {
        let joint = joint_diagonalize(family)?;
        Self::from_joint(family, joint, gamma)
    }

    fn from_joint(
        family: &[HermitianOperator],
        joint: JointDiagonalization,
        gamma: GammaModel,
    ) -> Result<Self> {
        let (generator, spectrum) = joint.generator()?;
        let f0 = HiddenObservable::from_decomposition(generator.clone(), spectrum, gamma)?;
        let members = family
            .iter()
            .cloned()
            .zip(joint.transfers)
            .map(|(operator, transfer)| Member { operator, transfer })
            .collect();
        Ok(Self {
            generator,
            members,
            f0: Arc::new(f0),
        })
    }

    pub fn generator(&self) -> &HermitianOperator {
        &self.generator
    }

    pub fn generator_observable(&self) -> &HiddenObservable {
        &self.f0
    }

    pub fn labels(&self) -> usize {
        self.f0.spectrum().eigenvalues().len()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn member_operator(&self, index: usize) -> Result<&HermitianOperator> {
        self.member(index).map(|m| &m.operator)
    }

    pub fn transfer(&self, index: usize) -> Result<&[f64]> {
        self.member(index).map(|m| m.transfer.as_slice())
    }

    fn member(&self, index: usize) -> Result<&Member> {
        self.members.get(index).ok_or(Error::IndexOutOfRange {
            index,
            len: self.members.len(),
        })
    }

    /// `Phi(A_i) = b_i o f0`.
    pub fn member_observable(&self, index: usize) -> Result<ContextObservable> {
        Ok(ContextObservable {
            f0: Arc::clone(&self.f0),
            transfer: self.member(index)?.transfer.clone(),
        })
    }

    /// Largest `|sum_j b_i(j) P_j - A_i|_F` over members.
    pub fn reconstruction_error(&self) -> f64 {
        self.members
            .iter()
            .map(|m| {
                let rebuilt = self.apply_transfer(&m.transfer);
                frobenius(&(rebuilt.matrix() - m.operator.matrix()))
            })
            .fold(0.0, f64::max)
    }

    fn apply_transfer(&self, transfer: &[f64]) -> HermitianOperator {
        self.f0.spectrum().apply_fn(|l| transfer[l as usize - 1])
    }

    /// Sum `sum c A_i` or product `prod (c A_i)` over `(member, coefficient)` terms.
    pub fn combine(&self, terms: &[(usize, f64)], op: CombineOp) -> Result<Combined> {
        if terms.is_empty() {
            return Err(Error::EmptyFamily);
        }
        for (i, c) in terms {
            self.member(*i)?;
            if !c.is_finite() {
                return Err(Error::Evaluation(format!("coefficient {c} is not finite")));
            }
        }
        let labels = self.labels();
        let transfer: Vec<f64> = (0..labels)
            .map(|l| combine_values(op, terms.iter().map(|(i, c)| (*c, self.members[*i].transfer[l]))))
            .collect();
        let d = self.generator.dim();
        let mut operator = match op {
            CombineOp::Sum => HermitianOperator::symmetrized(CMatrix::zeros(d, d), 0.0),
            CombineOp::Product => HermitianOperator::identity(d),
        };
        for (i, c) in terms {
            let scaled = self.members[*i].operator.scaled(*c);
            operator = match op {
                CombineOp::Sum => operator.combine(1.0, &scaled, 1.0)?,
                CombineOp::Product => operator.product(&scaled)?,
            };
        }
        let compatibility_error = frobenius(&(self.apply_transfer(&transfer).matrix() - operator.matrix()));
        Ok(Combined {
            function: ContextObservable {
                f0: Arc::clone(&self.f0),
                transfer,
            },
            operator,
            compatibility_error,
        })
    }

    /// Random-coefficient checks of additivity and multiplicativity of `Phi`.
    ///
    /// Function side: the combined observable must equal the pointwise
    /// combination of member values bit for bit. Operator side: the operator
    /// reconstructed from first moments must match the operator combination.
    pub fn homomorphism_check(&self, trials: usize, keyed: &KeyedRng) -> Result<HomomorphismReport> {
        let d = self.generator.dim();
        let members: Vec<ContextObservable> = (0..self.len())
            .map(|i| self.member_observable(i))
            .collect::<Result<_>>()?;
        let outcomes = (0..trials)
            .into_par_iter()
            .map(|t| {
                let mut rng = keyed.at(streams::HOMOMORPHISM, t as u64);
                let sum_terms: Vec<(usize, f64)> = (0..self.len())
                    .map(|i| (i, rng.random::<f64>() * 4.0 - 2.0))
                    .collect();
                let i = rng.random_range(0..self.len());
                let j = rng.random_range(0..self.len());
                let product_terms = [(i, 1.0), (j, 1.0)];
                let point = HiddenPoint::new(haar_ray(&mut rng, d), Open01.sample(&mut rng))?;

                let mut failures = 0usize;
                let mut worst: f64 = 0.0;
                for (terms, op) in [
                    (sum_terms.as_slice(), CombineOp::Sum),
                    (product_terms.as_slice(), CombineOp::Product),
                ] {
                    let combined = self.combine(terms, op)?;
                    let direct = combine_values(
                        op,
                        terms
                            .iter()
                            .map(|(k, c)| Ok::<_, Error>((*c, members[*k].value(&point)?)))
                            .collect::<Result<Vec<_>>>()?,
                    );
                    if combined.function.value(&point)?.to_bits() != direct.to_bits() {
                        failures += 1;
                    }
                    let rebuilt = orthodoxy_reconstruct(&combined.function)?;
                    let err = frobenius(&(rebuilt.matrix() - combined.operator.matrix()));
                    worst = worst.max(err / combined.operator.frobenius_norm().max(1.0));
                }
                Ok((failures, worst))
            })
            .collect::<Result<Vec<_>>>()?;
        let pointwise_failures = outcomes.iter().map(|o| o.0).sum();
        let max_operator_error = outcomes.iter().map(|o| o.1).fold(0.0, f64::max);
        Ok(HomomorphismReport {
            trials,
            pointwise_failures,
            max_operator_error,
            pass: pointwise_failures == 0 && max_operator_error <= OPERATOR_TOL,
        })
    }
}

fn combine_values(op: CombineOp, terms: impl IntoIterator<Item = (f64, f64)>) -> f64 {
    match op {
        CombineOp::Sum => terms.into_iter().fold(0.0, |acc, (c, v)| acc + c * v),
        CombineOp::Product => terms.into_iter().fold(1.0, |acc, (c, v)| acc * (c * v)),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HomomorphismReport {
    pub trials: usize,
    /// Hidden points where a combined observable differed from the pointwise combination.
    pub pointwise_failures: usize,
    /// Largest relative Frobenius error `|sigma(combined) - combined operator| / max(1, |op|)`.
    pub max_operator_error: f64,
    pub pass: bool,
}

/// `f = sum_n c_n chi_{L_n}` over mutually orthogonal projectors, all indicators
/// driven by one shared generator.
#[derive(Debug, Clone)]
pub struct PartitionContext {
    context: Context,
    coeffs: Vec<f64>,
    combined: Combined,
}

impl PartitionContext {
    pub fn new(projectors: &[CMatrix], coeffs: &[f64], gamma: GammaModel) -> Result<Self> {
        const TOL: f64 = 1e-10;
        if projectors.is_empty() {
            return Err(Error::EmptyFamily);
        }
        if projectors.len() != coeffs.len() {
            return Err(Error::NotOrthogonalFamily(format!(
                "{} projectors but {} coefficients",
                projectors.len(),
                coeffs.len()
            )));
        }
        if let Some(c) = coeffs.iter().find(|c| !c.is_finite()) {
            return Err(Error::Evaluation(format!("coefficient {c} is not finite")));
        }
        let family = projectors
            .iter()
            .map(|e| {
                let op = HermitianOperator::new(e.clone())?;
                let residual = op.projector_residual();
                if residual > TOL * op.frobenius_norm().max(1.0) {
                    return Err(Error::NotAProjector { residual });
                }
                if op.frobenius_norm() < 0.5 {
                    return Err(Error::NotOrthogonalFamily("zero projector".into()));
                }
                Ok(op)
            })
            .collect::<Result<Vec<_>>>()?;
        for i in 0..family.len() {
            for j in i + 1..family.len() {
                let overlap = frobenius(&(family[i].matrix() * family[j].matrix()));
                if overlap > TOL {
                    return Err(Error::NotOrthogonalFamily(format!(
                        "projectors {i} and {j} overlap ({overlap:e})"
                    )));
                }
            }
        }
        let mut joint = joint_diagonalize(&family)?;
        for t in joint.transfers.iter_mut().flatten() {
            let r = t.round();
            if (*t - r).abs() <= 1e-8 {
                *t = r;
            }
        }
        let context = Context::from_joint(&family, joint, gamma)?;
        let terms: Vec<(usize, f64)> = coeffs.iter().copied().enumerate().collect();
        let combined = context.combine(&terms, CombineOp::Sum)?;
        Ok(Self {
            context,
            coeffs: coeffs.to_vec(),
            combined,
        })
    }

    pub fn context(&self) -> &Context {
        &self.context
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// The combined hidden function `sum c_n chi_{L_n}`.
    pub fn function(&self) -> &ContextObservable {
        &self.combined.function
    }

    /// `sum c_n E_n`.
    pub fn operator(&self) -> &HermitianOperator {
        &self.combined.operator
    }

    pub fn indicator(&self, n: usize) -> Result<ContextObservable> {
        self.context.member_observable(n)
    }

    /// True when no generator label lies in two events `L_n`.
    pub fn events_disjoint(&self) -> bool {
        (0..self.context.labels()).all(|l| {
            self.context
                .members
                .iter()
                .filter(|m| m.transfer[l] == 1.0)
                .count()
                <= 1
        })
    }
}

#[derive(Debug, Clone)]
pub enum NogoBranch {
    /// The pair commutes; a context containing both exists.
    Commuting { context: Box<Context> },
    /// A ray where `f_A + f_B` has non-orthodox second moment.
    Witness {
        ray: StateVector,
        gap: f64,
        /// Index of the random ray the refinement started from.
        seed_index: usize,
    },
    /// Non-commuting, but no ray with gap above `10 * tol` was found.
    Inconclusive { best_gap: f64 },
}

#[derive(Debug, Clone)]
pub struct NogoReport {
    pub branch: NogoBranch,
    pub commutator_norm: f64,
    /// `|sigma(f_A + f_B) - (A + B)|_F`.
    pub sum_reconstruction_error: f64,
    pub caveat: &'static str,
}

/// Either builds a context for a commuting pair or searches random rays for a
/// second-moment witness against `f_A + f_B` on a shared hidden parameter.
///
/// The best random ray is refined by a compass search over its real and
/// imaginary components. Ties between random rays go to the lowest index.
pub fn nogo_witness(
    a: &HermitianOperator,
    b: &HermitianOperator,
    gamma: GammaModel,
    search: usize,
    keyed: &KeyedRng,
    tol: f64,
) -> Result<NogoReport> {
    a.check_dim(b.dim())?;
    let commutator_norm = a.commutator_norm(b)?;
    if commutator_norm <= a.commuting_threshold(b) {
        let context = Context::new(&[a.clone(), b.clone()], gamma)?;
        return Ok(NogoReport {
            branch: NogoBranch::Commuting {
                context: Box::new(context),
            },
            commutator_norm,
            sum_reconstruction_error: 0.0,
            caveat: SHARED_U_CAVEAT,
        });
    }
    let fa = HiddenObservable::build(a, gamma)?;
    let fb = HiddenObservable::build(b, gamma)?;
    let h = Pointwise::sum(vec![&fa, &fb])?;
    let sum = orthodoxy_reconstruct(&h)?;
    let sum_reconstruction_error = frobenius(&(sum.matrix() - a.combine(1.0, b, 1.0)?.matrix()));

    let d = a.dim();
    let gap_at = |psi: &StateVector| orthodoxy_second_moment_gap(&h, &sum, psi);
    let gaps = (0..search)
        .into_par_iter()
        .map(|i| {
            let psi = haar_ray(&mut keyed.at(streams::WITNESS_RAYS, i as u64), d);
            Ok((gap_at(&psi)?, psi))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut best: Option<(usize, f64, StateVector)> = None;
    for (i, (g, psi)) in gaps.into_iter().enumerate() {
        if best.as_ref().is_none_or(|b| g > b.1) {
            best = Some((i, g, psi));
        }
    }
    let Some((seed_index, gap, ray)) = best else {
        return Ok(NogoReport {
            branch: NogoBranch::Inconclusive { best_gap: 0.0 },
            commutator_norm,
            sum_reconstruction_error,
            caveat: SHARED_U_CAVEAT,
        });
    };
    let (ray, gap) = refine(&gap_at, ray, gap)?;
    let branch = if gap > 10.0 * tol {
        NogoBranch::Witness {
            ray,
            gap,
            seed_index,
        }
    } else {
        NogoBranch::Inconclusive { best_gap: gap }
    };
    Ok(NogoReport {
        branch,
        commutator_norm,
        sum_reconstruction_error,
        caveat: SHARED_U_CAVEAT,
    })
}

/// Compass search maximizing `gap` over the real coordinates of a ray.
fn refine(
    gap: &dyn Fn(&StateVector) -> Result<f64>,
    start: StateVector,
    start_gap: f64,
) -> Result<(StateVector, f64)> {
    let mut best = start.normalized().components().clone();
    let mut best_gap = start_gap;
    let mut step = 0.05;
    let mut evaluations = 0usize;
    while step > 1e-12 && evaluations < 20_000 {
        let mut improved = false;
        for k in 0..best.len() {
            for dir in [Complex64::ONE, -Complex64::ONE, Complex64::i(), -Complex64::i()] {
                let mut trial = best.clone();
                trial[k] += dir * step;
                let Ok(psi) = StateVector::new(trial) else {
                    continue;
                };
                let psi = psi.normalized();
                evaluations += 1;
                let g = gap(&psi)?;
                if g > best_gap {
                    best_gap = g;
                    best = psi.components().clone();
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    Ok((StateVector::new(best)?, best_gap))
}
