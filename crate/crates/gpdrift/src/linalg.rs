//! Dense linear algebra: Cholesky factorization with the jitter retry policy
//! and an LU solver for the nonsymmetric Nystrom systems.

use crate::error::{Error, Result};

/// Lower-triangular Cholesky factor of a symmetric positive definite matrix.
#[derive(Debug, Clone)]
pub struct Cholesky {
    n: usize,
    l: Vec<f64>,
}

impl Cholesky {
    /// Factor a row-major `n x n` matrix. On failure returns the smallest
    /// pivot encountered.
    pub fn factor(a: &[f64], n: usize) -> std::result::Result<Self, f64> {
        assert_eq!(a.len(), n * n);
        let mut l = vec![0.0; n * n];
        let mut min_pivot = f64::INFINITY;
        for i in 0..n {
            for j in 0..=i {
                let mut sum = a[i * n + j];
                for k in 0..j {
                    sum -= l[i * n + k] * l[j * n + k];
                }
                if i == j {
                    min_pivot = min_pivot.min(sum);
                    if sum <= 0.0 {
                        return Err(min_pivot);
                    }
                    l[i * n + j] = sum.sqrt();
                } else {
                    l[i * n + j] = sum / l[j * n + j];
                }
            }
        }
        Ok(Self { n, l })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Solve `A x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let y = self.solve_lower(b);
        self.solve_upper(&y)
    }

    /// Solve `L y = b`.
    pub fn solve_lower(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut y = vec![0.0; n];
        for i in 0..n {
            let mut sum = b[i];
            for k in 0..i {
                sum -= self.l[i * n + k] * y[k];
            }
            y[i] = sum / self.l[i * n + i];
        }
        y
    }

    /// Solve `L^T x = y`.
    pub fn solve_upper(&self, y: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let mut sum = y[i];
            for k in i + 1..n {
                sum -= self.l[k * n + i] * x[k];
            }
            x[i] = sum / self.l[i * n + i];
        }
        x
    }

    /// Compute `L z` (used to color i.i.d. standard normals).
    pub fn mul_lower(&self, z: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut out = vec![0.0; n];
        for i in 0..n {
            let mut sum = 0.0;
            for k in 0..=i {
                sum += self.l[i * n + k] * z[k];
            }
            out[i] = sum;
        }
        out
    }
}

/// Cholesky with the jitter retry: if factorization fails, add
/// `1e-12 * trace / n` to the diagonal once and retry; a second failure is a
/// degeneracy error naming the smallest pivot.
pub fn cholesky_jittered(a: &[f64], n: usize) -> Result<Cholesky> {
    match Cholesky::factor(a, n) {
        Ok(c) => Ok(c),
        Err(_) => {
            let trace: f64 = (0..n).map(|i| a[i * n + i]).sum();
            let jitter = 1e-12 * trace / n as f64;
            let mut aj = a.to_vec();
            for i in 0..n {
                aj[i * n + i] += jitter;
            }
            Cholesky::factor(&aj, n).map_err(|pivot| Error::Degeneracy { pivot })
        }
    }
}

/// Solve `A x = b` by LU with partial pivoting; `a` is row-major `n x n`.
pub fn lu_solve(a: &[f64], n: usize, b: &[f64]) -> Result<Vec<f64>> {
    assert_eq!(a.len(), n * n);
    assert_eq!(b.len(), n);
    let mut m = a.to_vec();
    let mut x = b.to_vec();
    let mut perm: Vec<usize> = (0..n).collect();
    for col in 0..n {
        let (piv, piv_val) = (col..n)
            .map(|r| (r, m[r * n + col].abs()))
            .fold((col, -1.0), |acc, v| if v.1 > acc.1 { v } else { acc });
        if piv_val <= 0.0 || !piv_val.is_finite() {
            return Err(Error::SolverFailure(format!(
                "singular matrix in LU at column {col}"
            )));
        }
        if piv != col {
            for k in 0..n {
                m.swap(col * n + k, piv * n + k);
            }
            x.swap(col, piv);
            perm.swap(col, piv);
        }
        let d = m[col * n + col];
        for r in col + 1..n {
            let f = m[r * n + col] / d;
            m[r * n + col] = f;
            for k in col + 1..n {
                m[r * n + k] -= f * m[col * n + k];
            }
            x[r] -= f * x[col];
        }
    }
    for i in (0..n).rev() {
        let mut sum = x[i];
        for k in i + 1..n {
            sum -= m[i * n + k] * x[k];
        }
        x[i] = sum / m[i * n + i];
    }
    Ok(x)
}

/// Dense matrix-vector product, row-major.
pub fn mat_vec(a: &[f64], n: usize, x: &[f64]) -> Vec<f64> {
    (0..n)
        .map(|i| (0..n).map(|j| a[i * n + j] * x[j]).sum())
        .collect()
}

/// Largest-eigenvalue estimate of a symmetric matrix by power iteration.
pub fn spectral_norm_estimate(a: &[f64], n: usize) -> f64 {
    let mut v = vec![1.0 / (n as f64).sqrt(); n];
    let mut lambda = 0.0;
    for _ in 0..200 {
        let w = mat_vec(a, n, &v);
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        let next = norm;
        v = w.iter().map(|x| x / norm).collect();
        if (next - lambda).abs() <= 1e-12 * next {
            return next;
        }
        lambda = next;
    }
    lambda
}

/// One-norm condition estimate from `A` and a solver for `A x = b`.
pub fn condition_estimate(a: &[f64], n: usize, solve: impl Fn(&[f64]) -> Result<Vec<f64>>) -> f64 {
    let norm_a = (0..n)
        .map(|j| (0..n).map(|i| a[i * n + j].abs()).sum::<f64>())
        .fold(0.0f64, f64::max);
    // ||A^{-1}||_1 lower bound from a few canonical solves.
    let mut norm_inv = 0.0f64;
    for j in (0..n).step_by((n / 8).max(1)) {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        if let Ok(x) = solve(&e) {
            norm_inv = norm_inv.max(x.iter().map(|v| v.abs()).sum());
        }
    }
    norm_a * norm_inv
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cholesky_solve_roundtrip() {
        let a = vec![4.0, 2.0, 2.0, 3.0];
        let c = Cholesky::factor(&a, 2).unwrap();
        let x = c.solve(&[8.0, 7.0]);
        // A x = b  =>  x = [1.25, 1.5]
        assert!((x[0] - 1.25).abs() < 1e-12);
        assert!((x[1] - 1.5).abs() < 1e-12);
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let a = vec![1.0, 2.0, 2.0, 1.0];
        assert!(Cholesky::factor(&a, 2).is_err());
        match cholesky_jittered(&a, 2) {
            Err(Error::Degeneracy { pivot }) => assert!(pivot < 0.0),
            other => panic!("expected degeneracy, got {other:?}"),
        }
    }

    #[test]
    fn mul_lower_inverts_solve_lower() {
        let a = vec![4.0, 2.0, 1.0, 2.0, 5.0, 2.0, 1.0, 2.0, 6.0];
        let c = Cholesky::factor(&a, 3).unwrap();
        let z = vec![0.3, -1.2, 0.7];
        let b = c.mul_lower(&z);
        let back = c.solve_lower(&b);
        for (u, v) in z.iter().zip(&back) {
            assert!((u - v).abs() < 1e-12);
        }
    }

    #[test]
    fn lu_solves_nonsymmetric() {
        let a = vec![0.0, 2.0, 1.0, 1.0, 1.0, 0.0, 3.0, 0.0, 1.0];
        let x_true = vec![1.0, -2.0, 3.0];
        let b = mat_vec(&a, 3, &x_true);
        let x = lu_solve(&a, 3, &b).unwrap();
        for (u, v) in x.iter().zip(&x_true) {
            assert!((u - v).abs() < 1e-12);
        }
    }

    #[test]
    fn power_iteration_finds_top_eigenvalue() {
        let a = vec![2.0, 0.0, 0.0, 0.5];
        assert!((spectral_norm_estimate(&a, 2) - 2.0).abs() < 1e-9);
    }
}
