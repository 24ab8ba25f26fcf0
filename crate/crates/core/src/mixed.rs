//! Hidden mixed states: countable mixtures of per-ray uniform measures, their
//! density matrices, exact classical means and seeded Monte Carlo estimates.

use rand::Rng;
use rayon::prelude::*;

use crate::borel::BorelExpr;
use crate::error::{Error, Result};
use crate::hidden::{GammaModel, HiddenFunction, HiddenObservable, HiddenPoint, LineDistribution};
use crate::rng::{streams, KeyedRng};
use crate::spectral::{DensityMatrix, HermitianOperator, StateVector};
use crate::CMatrix;

/// Tolerance on the total ensemble weight.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;

/// Samples per reduction chunk. Fixed so results do not depend on the worker count.
pub const CHUNK: usize = 1 << 14;

/// Weighted rays `{(w_k, psi_k)}` with positive weights summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    components: Vec<(f64, StateVector)>,
    dim: usize,
}

impl Ensemble {
    pub fn new(components: Vec<(f64, StateVector)>) -> Result<Self> {
        let Some((_, first)) = components.first() else {
            return Err(Error::InvalidEnsemble("no components".into()));
        };
        let dim = first.dim();
        let mut total = 0.0;
        for (w, psi) in &components {
            if !(*w > 0.0 && w.is_finite()) {
                return Err(Error::InvalidEnsemble(format!("weight {w} is not positive")));
            }
            if psi.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: psi.dim(),
                });
            }
            total += w;
        }
        if !((total - 1.0).abs() <= WEIGHT_SUM_TOL) {
            return Err(Error::InvalidEnsemble(format!("weights sum to {total}")));
        }
        Ok(Self {
            components: components
                .into_iter()
                .map(|(w, psi)| (w, psi.normalized()))
                .collect(),
            dim,
        })
    }

    /// The canonical eigen-ensemble of `d`.
    pub fn from_density(d: &DensityMatrix) -> Result<Self> {
        Self::new(d.eigen_ensemble()?)
    }

    pub fn components(&self) -> &[(f64, StateVector)] {
        &self.components
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `sum_k w_k |psi_k><psi_k|`.
    pub fn density(&self) -> DensityMatrix {
        let mut m = CMatrix::zeros(self.dim, self.dim);
        for (w, psi) in &self.components {
            let v = psi.components();
            m += v * v.adjoint() * num_complex::Complex64::new(*w, 0.0);
        }
        DensityMatrix::from_operator(HermitianOperator::symmetrized(m, 0.0))
            .expect("convex combination of pure states")
    }

    /// `Trace[T D]` computed as `sum_k w_k <T>_psi_k`.
    pub fn trace_expectation(&self, op: &HermitianOperator) -> Result<f64> {
        self.components
            .iter()
            .map(|(w, psi)| Ok(w * op.expectation(psi)?))
            .sum()
    }

    fn cumulative(&self) -> Vec<f64> {
        let mut acc = 0.0;
        self.components
            .iter()
            .map(|(w, _)| {
                acc += w;
                acc
            })
            .collect()
    }
}

/// `mu = sum_k w_k eta_{psi_k}` with `u` drawn through a gamma model.
#[derive(Debug, Clone, PartialEq)]
pub struct HiddenMixedState {
    ensemble: Ensemble,
    gamma: GammaModel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HiddenSample {
    pub component: usize,
    pub point: HiddenPoint,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: usize,
}

impl McEstimate {
    /// `|mean - target| / std_error`; zero when both sides agree exactly.
    pub fn z_score(&self, target: f64) -> f64 {
        let diff = (self.mean - target).abs();
        if self.std_error > 0.0 {
            diff / self.std_error
        } else if diff <= 1e-12 * target.abs().max(1.0) {
            0.0
        } else {
            f64::INFINITY
        }
    }
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn merge(&mut self, other: &Self) {
        self.add(other.sum);
        self.add(other.carry);
    }

    fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    first: CompensatedSum,
    second: CompensatedSum,
}

impl HiddenMixedState {
    pub fn new(ensemble: Ensemble, gamma: GammaModel) -> Self {
        Self { ensemble, gamma }
    }

    pub fn from_density(d: &DensityMatrix, gamma: GammaModel) -> Result<Self> {
        Ok(Self::new(Ensemble::from_density(d)?, gamma))
    }

    pub fn ensemble(&self) -> &Ensemble {
        &self.ensemble
    }

    pub fn gamma(&self) -> GammaModel {
        self.gamma
    }

    /// The density matrix of this hidden mixed state.
    pub fn density(&self) -> DensityMatrix {
        self.ensemble.density()
    }

    /// `integral of g(h) d(mu)`, exact.
    pub fn exact_mean_of(&self, h: &dyn HiddenFunction, g: &dyn Fn(f64) -> f64) -> Result<f64> {
        check_dim(self.ensemble.dim, h.dim())?;
        self.ensemble
            .components
            .iter()
            .map(|(w, psi)| Ok(w * h.line_integral(psi, g)?))
            .sum()
    }

    /// `integral of b(f) d(mu) = sum_k w_k sum_i p_i(psi_k) b(lambda_i)`.
    pub fn exact_classical_mean(&self, f: &HiddenObservable, b: &BorelExpr) -> Result<f64> {
        check_dim(self.ensemble.dim, f.operator().dim())?;
        self.ensemble
            .components
            .iter()
            .map(|(w, psi)| Ok(w * f.line_integral_exact(b, psi)?))
            .sum()
    }

    fn draw(&self, cumulative: &[f64], keyed: &KeyedRng, index: u64) -> (usize, f64) {
        let mut rng = keyed.at(streams::HIDDEN_SAMPLES, index);
        let r: f64 = rng.random();
        let k = cumulative
            .partition_point(|c| *c <= r)
            .min(cumulative.len() - 1);
        (k, self.gamma.sample_u(&mut rng))
    }

    /// Draws `n` hidden points; sample `i` depends only on `(seed, i)`.
    pub fn sample(&self, keyed: &KeyedRng, n: usize) -> Result<Vec<HiddenSample>> {
        if n == 0 {
            return Err(Error::InvalidSampleCount(n));
        }
        let cumulative = self.ensemble.cumulative();
        (0..n as u64)
            .into_par_iter()
            .map(|i| {
                let (component, u) = self.draw(&cumulative, keyed, i);
                Ok(HiddenSample {
                    component,
                    point: HiddenPoint::new(self.ensemble.components[component].1.clone(), u)?,
                })
            })
            .collect()
    }

    /// `(component, u, f(point))` for `n` samples, in sample order.
    pub fn sample_values(
        &self,
        f: &HiddenObservable,
        keyed: &KeyedRng,
        n: usize,
    ) -> Result<Vec<(usize, f64, f64)>> {
        if n == 0 {
            return Err(Error::InvalidSampleCount(n));
        }
        let lines = self.line_distributions(f)?;
        let cumulative = self.ensemble.cumulative();
        Ok((0..n as u64)
            .into_par_iter()
            .map(|i| {
                let (k, u) = self.draw(&cumulative, keyed, i);
                (k, u, lines[k].quantile(u))
            })
            .collect())
    }

    fn line_distributions(&self, f: &HiddenObservable) -> Result<Vec<LineDistribution>> {
        check_dim(self.ensemble.dim, f.operator().dim())?;
        self.ensemble
            .components
            .iter()
            .map(|(_, psi)| f.distribution(psi))
            .collect()
    }

    /// Monte Carlo estimate of `integral of b(f) d(mu)` with its CLT standard error.
    ///
    /// Samples are reduced in fixed chunks of [`CHUNK`] with compensated sums,
    /// so the result is bit-identical for every worker count.
    pub fn mc_estimate(
        &self,
        f: &HiddenObservable,
        b: &BorelExpr,
        keyed: &KeyedRng,
        n: usize,
    ) -> Result<McEstimate> {
        if n < 2 {
            return Err(Error::InvalidSampleCount(n));
        }
        let lines = self.line_distributions(f)?;
        // b evaluated once per (component, eigenvalue); a sample then only picks an index.
        let tables = lines
            .iter()
            .map(|l| {
                l.values()
                    .iter()
                    .map(|&v| b.eval(v).map_err(|e| Error::Evaluation(e.to_string())))
                    .collect::<Result<Vec<f64>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let cumulative = self.ensemble.cumulative();
        let value = |i: u64| {
            let (k, u) = self.draw(&cumulative, keyed, i);
            tables[k][lines[k].quantile_index(u)]
        };
        let shift = value(0);
        let chunks = n.div_ceil(CHUNK);
        let partials: Vec<Moments> = (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut m = Moments::default();
                let end = ((c + 1) * CHUNK).min(n);
                for i in c * CHUNK..end {
                    let x = value(i as u64) - shift;
                    m.first.add(x);
                    m.second.add(x * x);
                }
                m
            })
            .collect();
        let mut total = Moments::default();
        for p in &partials {
            total.first.merge(&p.first);
            total.second.merge(&p.second);
        }
        let nf = n as f64;
        let s1 = total.first.value();
        let s2 = total.second.value();
        let var = ((s2 - s1 * s1 / nf) / (nf - 1.0)).max(0.0);
        Ok(McEstimate {
            mean: shift + s1 / nf,
            std_error: (var / nf).sqrt(),
            samples: n,
        })
    }
}

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}
