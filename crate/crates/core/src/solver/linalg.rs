//! Linear solves for the implicit diffusion step `(D − μ d Δ_h) w = r`,
//! where `D` is a positive diagonal.

use super::grid::{laplacian_into, Grid};
use crate::error::{Error, Result};

/// Convergence threshold on `‖W r‖₂ / ‖W b‖₂` for the 2D iterative solve.
pub const CG_TOLERANCE: f64 = 1e-10;

/// Solves a tridiagonal system by forward elimination and back substitution.
///
/// `sub[0]` and `sup[n−1]` are ignored. The matrices produced here are strictly
/// diagonally dominant, so no pivoting is needed.
pub fn solve_tridiagonal(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64], out: &mut [f64]) {
    let n = diag.len();
    debug_assert!(sub.len() == n && sup.len() == n && rhs.len() == n && out.len() == n);
    let mut c = vec![0.0; n];
    let mut beta = diag[0];
    out[0] = rhs[0] / beta;
    for i in 1..n {
        c[i - 1] = sup[i - 1] / beta;
        beta = diag[i] - sub[i] * c[i - 1];
        out[i] = (rhs[i] - sub[i] * out[i - 1]) / beta;
    }
    for i in (0..n - 1).rev() {
        out[i] -= c[i] * out[i + 1];
    }
}

/// Solves `(D − μdΔ_h) w = r` on `grid`, `D = diag(diag)`.
///
/// `w` holds the initial guess on entry (for 2D) and the solution on exit.
/// Returns the number of iterations used (0 for the direct solves).
pub fn solve_implicit_diffusion(grid: &Grid, diag: &[f64], mu_d: f64, rhs: &[f64], w: &mut [f64]) -> Result<usize> {
    match grid.dim() {
        0 => {
            w[0] = rhs[0] / diag[0];
            Ok(0)
        }
        1 => {
            let n = grid.counts()[0];
            let k = mu_d / grid.spacing(0).powi(2);
            let sub: Vec<f64> = (0..n).map(|i| if i == n - 1 { -2.0 * k } else { -k }).collect();
            let sup: Vec<f64> = (0..n).map(|i| if i == 0 { -2.0 * k } else { -k }).collect();
            let main: Vec<f64> = diag.iter().map(|&d| d + 2.0 * k).collect();
            solve_tridiagonal(&sub, &main, &sup, rhs, w);
            Ok(0)
        }
        _ => conjugate_gradient(grid, diag, mu_d, rhs, w),
    }
}

/// Preconditioned conjugate gradients on the symmetrized system `W A w = W r`.
///
/// The reflected-ghost Laplacian is not symmetric, but scaling each row by the
/// trapezoid weight (½ per boundary axis) makes `W Δ_h` symmetric negative
/// semidefinite, so `W A` is SPD. All reductions run in a fixed order.
fn conjugate_gradient(grid: &Grid, diag: &[f64], mu_d: f64, rhs: &[f64], x: &mut [f64]) -> Result<usize> {
    let n = rhs.len();
    let weights = boundary_weights(grid);
    let (ihx2, ihy2) = (1.0 / grid.spacing(0).powi(2), 1.0 / grid.spacing(1).powi(2));
    let precond: Vec<f64> = (0..n)
        .map(|i| 1.0 / (weights[i] * (diag[i] + 2.0 * mu_d * (ihx2 + ihy2))))
        .collect();

    let mut lap = vec![0.0; n];
    let apply = |v: &[f64], lap: &mut [f64], out: &mut [f64]| {
        laplacian_into(v, grid, lap);
        for i in 0..n {
            out[i] = weights[i] * (diag[i] * v[i] - mu_d * lap[i]);
        }
    };

    let b_norm = norm(&rhs.iter().zip(&weights).map(|(r, w)| r * w).collect::<Vec<_>>());
    let mut ax = vec![0.0; n];
    apply(x, &mut lap, &mut ax);
    let mut r: Vec<f64> = (0..n).map(|i| weights[i] * rhs[i] - ax[i]).collect();
    let threshold = CG_TOLERANCE * b_norm.max(f64::MIN_POSITIVE);
    let mut r_norm = norm(&r);
    if r_norm <= threshold {
        return Ok(0);
    }
    let mut z: Vec<f64> = r.iter().zip(&precond).map(|(r, m)| r * m).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    let max_iter = 10 * n + 100;
    for iter in 1..=max_iter {
        apply(&p, &mut lap, &mut ap);
        let alpha = rz / dot(&p, &ap);
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        r_norm = norm(&r);
        if r_norm <= threshold {
            return Ok(iter);
        }
        for i in 0..n {
            z[i] = r[i] * precond[i];
        }
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::SolverDiverged {
        iterations: max_iter,
        residual: r_norm / b_norm.max(f64::MIN_POSITIVE),
        tolerance: CG_TOLERANCE,
    })
}

fn boundary_weights(grid: &Grid) -> Vec<f64> {
    let (nx, ny) = (grid.counts()[0], grid.counts()[1]);
    let edge = |i: usize, n: usize| if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
    (0..nx * ny).map(|k| edge(k % nx, nx) * edge(k / nx, ny)).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
