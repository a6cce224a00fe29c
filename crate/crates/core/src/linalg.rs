//! Dense symmetric positive-definite solves for the small normal-equation
//! systems of the fitters. Matrices are row-major `n × n` slices.

use alloc::vec;
use alloc::vec::Vec;

use crate::math::Real;

/// Lower-triangular Cholesky factor, or `None` if the matrix is not
/// numerically positive definite.
pub(crate) fn cholesky(a: &[f64], n: usize) -> Option<Vec<f64>> {
    debug_assert_eq!(a.len(), n * n);
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut sum = a[i * n + j];
            for k in 0..j {
                sum -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if !(sum > 0.0) || !sum.is_finite() {
                    return None;
                }
                l[i * n + i] = sum.sqrt();
            } else {
                l[i * n + j] = sum / l[j * n + j];
            }
        }
    }
    Some(l)
}

/// Solves `L·Lᵀ·x = b` given the Cholesky factor `L`.
pub(crate) fn cholesky_solve(l: &[f64], n: usize, b: &[f64]) -> Vec<f64> {
    let mut y = b.to_vec();
    for i in 0..n {
        for k in 0..i {
            y[i] -= l[i * n + k] * y[k];
        }
        y[i] /= l[i * n + i];
    }
    for i in (0..n).rev() {
        for k in i + 1..n {
            y[i] -= l[k * n + i] * y[k];
        }
        y[i] /= l[i * n + i];
    }
    y
}

/// Inverse of a symmetric positive-definite matrix.
pub(crate) fn spd_inverse(a: &[f64], n: usize) -> Option<Vec<f64>> {
    let l = cholesky(a, n)?;
    let mut inv = vec![0.0; n * n];
    let mut e = vec![0.0; n];
    for j in 0..n {
        e.iter_mut().for_each(|x| *x = 0.0);
        e[j] = 1.0;
        let col = cholesky_solve(&l, n, &e);
        for i in 0..n {
            inv[i * n + j] = col[i];
        }
    }
    Some(inv)
}

/// Least-squares solution of the overdetermined system `A·x ≈ b` for a
/// `m × n` row-major `A`, via the normal equations with column equilibration.
pub(crate) fn least_squares(a: &[f64], m: usize, n: usize, b: &[f64]) -> Option<Vec<f64>> {
    let mut norms = vec![0.0; n];
    for j in 0..n {
        norms[j] = (0..m).map(|i| a[i * n + j] * a[i * n + j]).sum::<f64>().sqrt();
        if norms[j] == 0.0 {
            norms[j] = 1.0;
        }
    }
    let mut ata = vec![0.0; n * n];
    let mut atb = vec![0.0; n];
    for i in 0..m {
        for j in 0..n {
            let aij = a[i * n + j] / norms[j];
            atb[j] += aij * b[i];
            for k in 0..=j {
                ata[j * n + k] += aij * a[i * n + k] / norms[k];
            }
        }
    }
    for j in 0..n {
        for k in j + 1..n {
            ata[j * n + k] = ata[k * n + j];
        }
    }
    let l = cholesky(&ata, n)?;
    let x = cholesky_solve(&l, n, &atb);
    Some(x.iter().zip(&norms).map(|(x, s)| x / s).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_and_inverts() {
        let a = [4.0, 2.0, 0.6, 2.0, 5.0, 1.0, 0.6, 1.0, 3.0];
        let x = [1.0, -2.0, 0.5];
        let b: Vec<f64> = (0..3).map(|i| (0..3).map(|j| a[i * 3 + j] * x[j]).sum()).collect();
        let l = cholesky(&a, 3).unwrap();
        let got = cholesky_solve(&l, 3, &b);
        for (g, w) in got.iter().zip(x) {
            assert!((g - w).abs() < 1e-14);
        }
        let inv = spd_inverse(&a, 3).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let v: f64 = (0..3).map(|k| a[i * 3 + k] * inv[k * 3 + j]).sum();
                assert!((v - if i == j { 1.0 } else { 0.0 }).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn rejects_indefinite() {
        assert!(cholesky(&[1.0, 2.0, 2.0, 1.0], 2).is_none());
        assert!(cholesky(&[0.0, 0.0, 0.0, 1.0], 2).is_none());
    }

    #[test]
    fn fits_a_line() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let a: Vec<f64> = xs.iter().flat_map(|&x| [1.0, x]).collect();
        let b: Vec<f64> = xs.iter().map(|x| 2.0 + 3.0 * x).collect();
        let c = least_squares(&a, 4, 2, &b).unwrap();
        assert!((c[0] - 2.0).abs() < 1e-12 && (c[1] - 3.0).abs() < 1e-12);
    }
}
