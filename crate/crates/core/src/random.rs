//! Random instance generators for tests, benchmarks and the CLI.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::borel::{BorelExpr, Expr};
use crate::spectral::{DensityMatrix, HermitianOperator};
use crate::CMatrix;

fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    DMatrix::from_fn(rows, cols, |_, _| {
        Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng))
    })
}

/// GUE-like Hermitian matrix scaled so that its spectral norm is about 2.
pub fn hermitian<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> HermitianOperator {
    let g = gaussian_matrix(rng, dim, dim);
    let h = (&g + g.adjoint()) * Complex64::new(0.5 / (dim as f64).sqrt(), 0.0);
    HermitianOperator::new(h).expect("symmetric by construction")
}

/// Haar-random unitary from the QR decomposition of a Gaussian matrix.
pub fn unitary<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> CMatrix {
    let qr = gaussian_matrix(rng, dim, dim).qr();
    let (mut q, r) = qr.unpack();
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::ONE };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Full-rank random density matrix `G G* / Tr(G G*)`.
pub fn density<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> DensityMatrix {
    let g = gaussian_matrix(rng, dim, dim);
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    DensityMatrix::new(m / Complex64::new(tr, 0.0)).expect("positive by construction")
}

/// Orthogonal projector of the given rank onto a Haar-random subspace.
pub fn projector<R: Rng + ?Sized>(rng: &mut R, dim: usize, rank: usize) -> CMatrix {
    let q = unitary(rng, dim);
    let cols = q.columns(0, rank);
    let p = cols * cols.adjoint();
    (&p + p.adjoint()) * Complex64::new(0.5, 0.0)
}

/// Random grammar expression of depth at most `depth`.
///
/// Constants and thresholds are multiples of `1/4` in `[-2, 2]`, and powers
/// are at most cubes, so values stay moderate on spectra of norm about 2.
pub fn expression<R: Rng + ?Sized>(rng: &mut R, depth: usize) -> BorelExpr {
    BorelExpr::from_ast(expr(rng, depth))
}

fn constant<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.random_range(-8i32..=8) as f64 / 4.0
}

fn expr<R: Rng + ?Sized>(rng: &mut R, depth: usize) -> Expr {
    if depth == 0 || rng.random_bool(0.2) {
        return if rng.random_bool(0.7) {
            Expr::X
        } else {
            Expr::Const(constant(rng))
        };
    }
    let sub = |rng: &mut R| Box::new(expr(rng, depth - 1));
    match rng.random_range(0..11) {
        0 => Expr::Add(sub(rng), sub(rng)),
        1 => Expr::Sub(sub(rng), sub(rng)),
        2 => Expr::Mul(sub(rng), sub(rng)),
        3 => match expr(rng, depth - 1) {
            Expr::Const(c) => Expr::Const(-c),
            e => Expr::Neg(Box::new(e)),
        },
        4 => Expr::Pow(sub(rng), rng.random_range(0..=3)),
        5 => Expr::Abs(sub(rng)),
        6 => Expr::Min(sub(rng), sub(rng)),
        7 => Expr::Max(sub(rng), sub(rng)),
        8 => Expr::Step {
            at: constant(rng),
            arg: sub(rng),
        },
        9 => {
            let (a, b) = (constant(rng), constant(rng));
            Expr::Ind {
                lo: a.min(b),
                hi: a.max(b),
                arg: sub(rng),
            }
        }
        _ => {
            let (a, b) = (constant(rng), constant(rng));
            Expr::Clamp {
                lo: a.min(b),
                hi: a.max(b),
                arg: sub(rng),
            }
        }
    }
}
