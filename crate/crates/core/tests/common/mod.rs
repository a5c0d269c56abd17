//! Independent oracles used by the integration suites. Everything here
//! avoids the library's iterative solvers: linear systems go through dense
//! Gaussian elimination and spectral computations through a cyclic Jacobi
//! eigensolver.

// Each integration target compiles its own copy and uses a subset; the
// kernels are plain indexed loops.
#![allow(dead_code, clippy::needless_range_loop)]

use cuspflow_core::{ScalarField, SingularMesh, SparseOperator};

/// Dense Gaussian elimination with partial pivoting.
pub fn dense_solve(matrix: &[Vec<f64>], rhs: &[f64]) -> Vec<f64> {
    let n = rhs.len();
    let mut m: Vec<Vec<f64>> = matrix.to_vec();
    let mut b = rhs.to_vec();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| m[i][col].abs().partial_cmp(&m[j][col].abs()).unwrap())
            .unwrap();
        m.swap(col, pivot);
        b.swap(col, pivot);
        let p = m[col][col];
        for r in (col + 1)..n {
            let f = m[r][col] / p;
            for c in col..n {
                m[r][c] -= f * m[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let mut acc = b[r];
        for c in (r + 1)..n {
            acc -= m[r][c] * x[c];
        }
        x[r] = acc / m[r][r];
    }
    x
}

pub fn dense_from_sparse(a: &SparseOperator) -> Vec<Vec<f64>> {
    let n = a.n();
    (0..n).map(|r| (0..n).map(|c| a.entry(r, c)).collect()).collect()
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix. Returns the
/// eigenvalues and the matrix of eigenvectors as columns (`q[i][k]` is
/// component `i` of eigenvector `k`).
pub fn sym_eig(mut a: Vec<Vec<f64>>) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.len();
    let mut q = vec![vec![0.0; n]; n];
    for i in 0..n {
        q[i][i] = 1.0;
    }
    for _sweep in 0..100 {
        let mut off = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                off = off.max(a[i][j].abs());
            }
        }
        if off < 1e-14 {
            break;
        }
        for p in 0..n {
            for r in (p + 1)..n {
                if a[p][r].abs() < 1e-30 {
                    continue;
                }
                let theta = (a[r][r] - a[p][p]) / (2.0 * a[p][r]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akr = a[k][r];
                    a[k][p] = c * akp - s * akr;
                    a[k][r] = s * akp + c * akr;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let ark = a[r][k];
                    a[p][k] = c * apk - s * ark;
                    a[r][k] = s * apk + c * ark;
                }
                for k in 0..n {
                    let qkp = q[k][p];
                    let qkr = q[k][r];
                    q[k][p] = c * qkp - s * qkr;
                    q[k][r] = s * qkp + c * qkr;
                }
            }
        }
    }
    let values = (0..n).map(|i| a[i][i]).collect();
    (values, q)
}

/// Exact solution of `M du/dt + A u = 0` at time `t` through the dense
/// eigendecomposition of the mass-standardized stiffness.
pub fn heat_expm(a: &SparseOperator, mass: &[f64], u0: &[f64], t: f64) -> Vec<f64> {
    let n = mass.len();
    let mut b = dense_from_sparse(a);
    for i in 0..n {
        for j in 0..n {
            b[i][j] /= (mass[i] * mass[j]).sqrt();
        }
    }
    let (values, q) = sym_eig(b);
    // y0 = M^{1/2} u0 in the eigenbasis.
    let y0: Vec<f64> = (0..n).map(|i| mass[i].sqrt() * u0[i]).collect();
    let mut coeffs = vec![0.0; n];
    for k in 0..n {
        for i in 0..n {
            coeffs[k] += q[i][k] * y0[i];
        }
    }
    let mut u = vec![0.0; n];
    for i in 0..n {
        let mut acc = 0.0;
        for k in 0..n {
            acc += q[i][k] * coeffs[k] * (-values[k] * t).exp();
        }
        u[i] = acc / mass[i].sqrt();
    }
    u
}

/// Lagged-diffusivity fixed point for `-Delta v + beta(v)/lambda = f`:
/// with `beta(v) = b(v) v`, `b(v) = |v|^{1/n - 1}`, iterate linear solves
/// `(A + M diag(b(v_k))/lambda) v = M f` by dense elimination until the
/// iterates settle. Returns `u = beta(v)`.
pub fn lagged_diffusivity_solve(
    mesh: &SingularMesh,
    a: &SparseOperator,
    lambda: f64,
    f: &ScalarField,
    n_exp: f64,
    max_iter: usize,
) -> ScalarField {
    let n = mesh.n_cells();
    let mass = mesh.volume_weights();
    let dense_a = dense_from_sparse(a);
    let cap = 1e12;
    let b_of = |v: f64| -> f64 {
        if n_exp == 1.0 {
            1.0
        } else {
            v.abs().powf(1.0 / n_exp - 1.0).min(cap)
        }
    };
    let rhs: Vec<f64> = (0..n).map(|i| mass[i] * f.values()[i]).collect();
    // Start from the linear (n = 1) solve; starting at 0 would make the
    // first lagged diffusivity hit the cap everywhere.
    let mut init = dense_a.clone();
    for i in 0..n {
        init[i][i] += mass[i] / lambda;
    }
    let mut v = dense_solve(&init, &rhs);
    for _ in 0..max_iter {
        let mut system = dense_a.clone();
        for i in 0..n {
            system[i][i] += mass[i] * b_of(v[i]) / lambda;
        }
        let next = dense_solve(&system, &rhs);
        let change: f64 =
            (0..n).map(|i| mass[i] * (next[i] - v[i]).abs()).sum();
        let scale: f64 = (0..n).map(|i| mass[i] * next[i].abs()).sum();
        v = next;
        if change <= 1e-13 * scale.max(1.0) {
            break;
        }
    }
    let u: Vec<f64> =
        v.iter().map(|&x| x.signum() * x.abs().powf(1.0 / n_exp)).collect();
    ScalarField::from_values(u)
}
