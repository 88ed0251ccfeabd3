//! Symmetric tridiagonal eigensolver: Sturm-sequence bisection for the
//! eigenvalues, inverse iteration for the eigenvectors.

use rayon::prelude::*;

/// Smallest pivot magnitude allowed in the Sturm recurrence.
fn pivmin(off: &[f64]) -> f64 {
    let e2 = off.iter().fold(1.0f64, |a, e| a.max(e * e));
    f64::MIN_POSITIVE * e2
}

/// Number of eigenvalues strictly below `x`.
pub fn sturm_count(diag: &[f64], off: &[f64], x: f64) -> usize {
    let guard = pivmin(off);
    let mut count = 0;
    let mut q = diag[0] - x;
    for i in 0..diag.len() {
        if i > 0 {
            q = diag[i] - x - off[i - 1] * off[i - 1] / q;
        }
        if q.abs() < guard {
            q = -guard;
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

fn gershgorin(diag: &[f64], off: &[f64]) -> (f64, f64) {
    let n = diag.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r = if i > 0 { off[i - 1].abs() } else { 0.0 } + if i + 1 < n { off[i].abs() } else { 0.0 };
        lo = lo.min(diag[i] - r);
        hi = hi.max(diag[i] + r);
    }
    (lo, hi)
}

/// The `index`-th smallest eigenvalue (0-based), bisected until the bracket
/// is narrower than `rel_tol * max(1, |E|)`.
pub fn bisect_eigenvalue(diag: &[f64], off: &[f64], index: usize, rel_tol: f64) -> f64 {
    let (mut lo, mut hi) = gershgorin(diag, off);
    let pad = 1e-12 * (1.0 + lo.abs().max(hi.abs()));
    lo -= pad;
    hi += pad;
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= rel_tol * mid.abs().max(1.0) {
            break;
        }
        if sturm_count(diag, off, mid) > index {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Solve `(T - shift) x = b` by Gaussian elimination with partial pivoting.
fn solve_shifted(diag: &[f64], off: &[f64], shift: f64, b: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let scale = diag.iter().chain(off).fold(shift.abs(), |a, v| a.max(v.abs()));
    let guard = f64::EPSILON * scale.max(f64::MIN_POSITIVE);
    // rows of U: (u0 on diagonal, u1, u2 superdiagonals)
    let mut u0 = vec![0.0; n];
    let mut u1 = vec![0.0; n];
    let mut u2 = vec![0.0; n];
    let mut rhs = b.to_vec();
    // current row being eliminated: (a, c, d) = entries at columns i, i+1, i+2
    let mut a = diag[0] - shift;
    let mut c = if n > 1 { off[0] } else { 0.0 };
    let mut d = 0.0;
    for i in 0..n {
        if i + 1 < n {
            let sub = off[i];
            let nd = diag[i + 1] - shift;
            let nc = if i + 2 < n { off[i + 1] } else { 0.0 };
            if sub.abs() > a.abs() {
                // swap row i with row i+1
                let f = a / sub;
                u0[i] = sub;
                u1[i] = nd;
                u2[i] = nc;
                rhs.swap(i, i + 1);
                let r = rhs[i];
                rhs[i + 1] -= f * r;
                a = c - f * nd;
                c = d - f * nc;
                d = 0.0;
            } else {
                let piv = if a.abs() < guard { guard } else { a };
                let f = sub / piv;
                u0[i] = piv;
                u1[i] = c;
                u2[i] = d;
                let r = rhs[i];
                rhs[i + 1] -= f * r;
                a = nd - f * c;
                c = nc - f * d;
                d = 0.0;
            }
        } else {
            u0[i] = if a.abs() < guard { guard } else { a };
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = rhs[i];
        if i + 1 < n {
            s -= u1[i] * x[i + 1];
        }
        if i + 2 < n {
            s -= u2[i] * x[i + 2];
        }
        x[i] = s / u0[i];
    }
    x
}

/// Eigenvector for a converged eigenvalue, unit Euclidean norm.
pub fn inverse_iteration(diag: &[f64], off: &[f64], eigenvalue: f64) -> Vec<f64> {
    let n = diag.len();
    // deterministic pseudo-random start vector
    let mut state: u64 = 0x9E37_79B9_7F4A_7C15;
    let mut y: Vec<f64> = (0..n)
        .map(|_| {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            0.5 + (state >> 11) as f64 / (1u64 << 53) as f64
        })
        .collect();
    let shift = eigenvalue + 1e-12 * eigenvalue.abs().max(1.0);
    for _ in 0..4 {
        let z = solve_shifted(diag, off, shift, &y);
        let norm = z.iter().map(|v| v * v).sum::<f64>().sqrt();
        y = z.into_iter().map(|v| v / norm).collect();
    }
    y
}

/// Lowest `k` eigenpairs, computed independently per index.
pub fn lowest_eigenpairs(diag: &[f64], off: &[f64], k: usize, rel_tol: f64) -> Vec<(f64, Vec<f64>)> {
    (0..k)
        .into_par_iter()
        .map(|j| {
            let e = bisect_eigenvalue(diag, off, j, rel_tol);
            (e, inverse_iteration(diag, off, e))
        })
        .collect()
}
