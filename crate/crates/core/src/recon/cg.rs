//! Jacobi-preconditioned conjugate gradients on flat vectors.
//!
//! Inner products are summed over fixed-size chunks in parallel and the
//! partial sums are added in chunk order, so results do not depend on the
//! thread count.

use rayon::prelude::*;

const CHUNK: usize = 4096;

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    let partial: Vec<f64> = a
        .par_chunks(CHUNK)
        .zip(b.par_chunks(CHUNK))
        .map(|(x, y)| x.iter().zip(y).map(|(u, v)| u * v).sum::<f64>())
        .collect();
    partial.iter().sum()
}

pub(crate) struct Solved {
    pub iterations: usize,
    pub relative_residual: f64,
    pub converged: bool,
}

/// Solves `A x = b` starting from `x`. `apply(x, y)` writes `A x` into `y`;
/// `inv_diag` holds the preconditioner. Stops when `|r| <= tol |b|`.
pub(crate) fn solve(
    apply: impl Fn(&[f64], &mut [f64]) + Sync,
    inv_diag: &[f64],
    b: &[f64],
    x: &mut [f64],
    tol: f64,
    max_iterations: usize,
) -> Solved {
    let n = b.len();
    let b_norm = dot(b, b).sqrt();
    if b_norm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Solved {
            iterations: 0,
            relative_residual: 0.0,
            converged: true,
        };
    }
    let mut ax = vec![0.0; n];
    apply(x, &mut ax);
    let mut r: Vec<f64> = b.par_iter().zip(&ax).map(|(b, a)| b - a).collect();
    let mut z: Vec<f64> = r.par_iter().zip(inv_diag).map(|(r, d)| r * d).collect();
    let mut p = z.clone();
    let mut ap = ax;
    let mut rz = dot(&r, &z);
    let mut rel = dot(&r, &r).sqrt() / b_norm;
    for k in 0..max_iterations {
        if rel <= tol {
            return Solved {
                iterations: k,
                relative_residual: rel,
                converged: true,
            };
        }
        apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            break;
        }
        let alpha = rz / pap;
        x.par_iter_mut().zip(&p).for_each(|(x, p)| *x += alpha * p);
        r.par_iter_mut().zip(&ap).for_each(|(r, ap)| *r -= alpha * ap);
        z.par_iter_mut()
            .zip(&r)
            .zip(inv_diag)
            .for_each(|((z, r), d)| *z = r * d);
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        p.par_iter_mut().zip(&z).for_each(|(p, z)| *p = z + beta * *p);
        rel = dot(&r, &r).sqrt() / b_norm;
    }
    Solved {
        iterations: max_iterations,
        relative_residual: rel,
        converged: rel <= tol,
    }
}
