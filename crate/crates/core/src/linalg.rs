//! Minimal sparse kernels: CSR matrix-vector products, Jacobi-preconditioned
//! conjugate gradients, and inverse power iteration for the smallest
//! generalized eigenpair. All accumulation orders are fixed so runs are
//! bit-reproducible.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use crate::math::FloatShim;
use crate::{Error, Result};

/// Row-compressed symmetric sparse matrix with an optional diagonal mass.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOperator {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
    mass: Option<Vec<f64>>,
}

impl SparseOperator {
    /// Build from (row, col, value) triplets; duplicates are summed, columns
    /// are sorted within each row.
    pub fn from_triplets(
        n: usize,
        triplets: &[(usize, usize, f64)],
        mass: Option<Vec<f64>>,
    ) -> Result<Self> {
        if let Some(m) = &mass {
            if m.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: m.len() });
            }
        }
        let mut counts = vec![0usize; n + 1];
        for &(r, c, _) in triplets {
            if r >= n || c >= n {
                return Err(Error::DimensionMismatch { expected: n, got: r.max(c) + 1 });
            }
            counts[r + 1] += 1;
        }
        for i in 0..n {
            counts[i + 1] += counts[i];
        }
        let mut cols = vec![0usize; triplets.len()];
        let mut vals = vec![0.0f64; triplets.len()];
        let mut cursor = counts.clone();
        for &(r, c, v) in triplets {
            let slot = cursor[r];
            cols[slot] = c;
            vals[slot] = v;
            cursor[r] += 1;
        }
        // Sort each row by column and merge duplicates.
        let mut row_ptr = vec![0usize; n + 1];
        let mut out_cols = Vec::with_capacity(triplets.len());
        let mut out_vals = Vec::with_capacity(triplets.len());
        for r in 0..n {
            let lo = counts[r];
            let hi = counts[r + 1];
            let mut entries: Vec<(usize, f64)> =
                (lo..hi).map(|i| (cols[i], vals[i])).collect();
            entries.sort_by_key(|e| e.0);
            for (c, v) in entries {
                if let Some(last) = out_cols.last() {
                    if *last == c && out_cols.len() > row_ptr[r] {
                        let k = out_vals.len() - 1;
                        out_vals[k] += v;
                        continue;
                    }
                }
                out_cols.push(c);
                out_vals.push(v);
            }
            row_ptr[r + 1] = out_cols.len();
        }
        Ok(Self { n, row_ptr, col_idx: out_cols, values: out_vals, mass })
    }

    pub fn identity(n: usize) -> Self {
        let triplets: Vec<(usize, usize, f64)> = (0..n).map(|i| (i, i, 1.0)).collect();
        Self::from_triplets(n, &triplets, None).expect("identity is well formed")
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn nnz(&self) -> usize {
        self.values.len()
    }
    pub fn mass(&self) -> Option<&[f64]> {
        self.mass.as_deref()
    }
    pub fn set_mass(&mut self, mass: Option<Vec<f64>>) {
        self.mass = mass;
    }

    pub fn diagonal(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.n];
        for r in 0..self.n {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                if self.col_idx[k] == r {
                    d[r] += self.values[k];
                }
            }
        }
        d
    }

    pub fn entry(&self, r: usize, c: usize) -> f64 {
        for k in self.row_ptr[r]..self.row_ptr[r + 1] {
            if self.col_idx[k] == c {
                return self.values[k];
            }
        }
        0.0
    }

    /// Largest deviation |A_ij - A_ji| over the stored pattern.
    pub fn symmetry_deviation(&self) -> f64 {
        let mut dev = 0.0f64;
        for r in 0..self.n {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                let c = self.col_idx[k];
                dev = dev.max((self.values[k] - self.entry(c, r)).abs());
            }
        }
        dev
    }

    pub fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        for r in 0..self.n {
            let mut acc = 0.0;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            y[r] = acc;
        }
    }
}

/// y = A x.
pub fn spmv(a: &SparseOperator, x: &[f64]) -> Result<Vec<f64>> {
    if x.len() != a.n() {
        return Err(Error::DimensionMismatch { expected: a.n(), got: x.len() });
    }
    let mut y = vec![0.0; a.n()];
    a.apply_into(x, &mut y);
    Ok(y)
}

/// Anything CG can iterate on.
pub trait LinearOperator {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64], y: &mut [f64]);
}

impl LinearOperator for SparseOperator {
    fn dim(&self) -> usize {
        self.n()
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.apply_into(x, y);
    }
}

/// `y = M x + lambda A x` without materializing the shifted matrix.
pub struct MassShifted<'a> {
    pub a: &'a SparseOperator,
    pub lambda: f64,
    pub mass: &'a [f64],
}

impl LinearOperator for MassShifted<'_> {
    fn dim(&self) -> usize {
        self.a.n()
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.a.apply_into(x, y);
        for i in 0..x.len() {
            y[i] = self.mass[i] * x[i] + self.lambda * y[i];
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CgOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// Final relative residual in the Euclidean norm.
    pub residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = 0.0;
    for i in 0..a.len() {
        acc += a[i] * b[i];
    }
    acc
}

/// Jacobi-preconditioned CG on an abstract operator. `jacobi` holds the
/// operator diagonal; `tol` is relative to `||b||_2`.
pub fn solve_cg_operator(
    op: &impl LinearOperator,
    jacobi: &[f64],
    b: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<CgOutcome> {
    let n = op.dim();
    if b.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: b.len() });
    }
    let b_norm = dot(b, b).sqrt();
    if b_norm == 0.0 {
        return Ok(CgOutcome { x: vec![0.0; n], iterations: 0, residual: 0.0 });
    }
    let target = tol * b_norm;

    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(jacobi).map(|(ri, d)| ri / d).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];

    for iter in 1..=max_iter {
        op.apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 || !pap.is_finite() {
            // Not positive definite along p; treat as nonconvergence.
            return Err(Error::CgNonconvergence {
                iterations: iter,
                residual: dot(&r, &r).sqrt() / b_norm,
            });
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let r_norm = dot(&r, &r).sqrt();
        if r_norm <= target {
            // Confirm with the explicit residual before accepting.
            op.apply(&x, &mut ap);
            let mut true_sq = 0.0;
            for i in 0..n {
                let d = b[i] - ap[i];
                true_sq += d * d;
            }
            let true_norm = true_sq.sqrt();
            if true_norm <= target {
                return Ok(CgOutcome { x, iterations: iter, residual: true_norm / b_norm });
            }
            // Recurrence drifted; restart from the explicit residual.
            for i in 0..n {
                r[i] = b[i] - ap[i];
                z[i] = r[i] / jacobi[i];
            }
            rz = dot(&r, &z);
            p.copy_from_slice(&z);
            continue;
        }
        for i in 0..n {
            z[i] = r[i] / jacobi[i];
        }
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::CgNonconvergence {
        iterations: max_iter,
        residual: dot(&r, &r).sqrt() / b_norm,
    })
}

/// CG on a sparse matrix, preconditioned by its diagonal.
pub fn solve_cg(a: &SparseOperator, b: &[f64], tol: f64, max_iter: usize) -> Result<CgOutcome> {
    let mut jacobi = a.diagonal();
    for d in &mut jacobi {
        if *d <= 0.0 {
            *d = 1.0;
        }
    }
    solve_cg_operator(a, &jacobi, b, tol, max_iter)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenEstimate {
    pub value: f64,
    /// Eigenvector normalized to unit mass-weighted 2-norm.
    pub vector: Vec<f64>,
    pub iterations: usize,
    /// Set when the operator annihilates constants (all-Neumann case); the
    /// reported value is then 0.
    pub singular: bool,
}

/// Smallest eigenpair of `A v = lambda M v` by inverse power iteration with
/// CG inner solves. `tol` bounds the relative eigenvalue change between
/// iterations.
pub fn smallest_eigenpair(a: &SparseOperator, mass: &[f64], tol: f64) -> Result<EigenEstimate> {
    let n = a.n();
    if mass.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: mass.len() });
    }
    let m_norm = |v: &[f64]| -> f64 {
        let mut acc = 0.0;
        for i in 0..n {
            acc += mass[i] * v[i] * v[i];
        }
        acc.sqrt()
    };

    // Constants span the kernel of an all-Neumann assembly; probe first.
    let ones = vec![1.0; n];
    let q = spmv(a, &ones)?;
    let scale = a.diagonal().iter().fold(0.0f64, |m, d| m.max(d.abs())).max(1.0);
    let q_max = q.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if q_max <= 1e-13 * scale {
        let norm = m_norm(&ones);
        let vector: Vec<f64> = ones.iter().map(|x| x / norm).collect();
        return Ok(EigenEstimate { value: 0.0, vector, iterations: 0, singular: true });
    }

    // The Rayleigh quotient is quadratically accurate in the iterate, so the
    // inner solves need less precision than the eigenvalue target.
    let max_outer = 500;
    let cg_tol = (tol * 0.1).clamp(1e-12, 1e-9);
    let cg_max = 50 * n + 1000;
    let norm0 = m_norm(&ones);
    let mut v: Vec<f64> = ones.iter().map(|x| x / norm0).collect();
    let mut lambda_prev = f64::INFINITY;
    for iter in 1..=max_outer {
        let rhs: Vec<f64> = (0..n).map(|i| mass[i] * v[i]).collect();
        let w = solve_cg(a, &rhs, cg_tol, cg_max)
            .map_err(|_| Error::EigenNonconvergence { iterations: iter })?
            .x;
        // With A w = M v the Rayleigh quotient of w is <Mv, w>/<Mw, w>.
        let mut num = 0.0;
        let mut den = 0.0;
        for i in 0..n {
            num += rhs[i] * w[i];
            den += mass[i] * w[i] * w[i];
        }
        let lambda = num / den;
        let norm = den.sqrt();
        for i in 0..n {
            v[i] = w[i] / norm;
        }
        if (lambda - lambda_prev).abs() <= tol * lambda.abs() {
            return Ok(EigenEstimate { value: lambda, vector: v, iterations: iter, singular: false });
        }
        lambda_prev = lambda;
    }
    Err(Error::EigenNonconvergence { iterations: max_outer })
}
