//! Dense Hermitian eigensolver for the small (3x3 .. 6x6) spin Hamiltonians.
//!
//! Cyclic Jacobi with complex phase rotations. All matrices here are tiny and
//! fixed-size, so quadratic convergence of Jacobi makes it effectively direct;
//! no sparse or iterative machinery is involved. The sweep order is fixed,
//! which keeps the decomposition bit-for-bit reproducible.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Eigenvalues (ascending) with matching eigenvector columns.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub values: Vec<f64>,
    pub vectors: DMatrix<Complex64>,
}

impl EigenDecomposition {
    /// |<basis_row | eigenvector_col>|^2 overlap table.
    pub fn overlaps(&self) -> DMatrix<f64> {
        self.vectors.map(|z| z.norm_sqr())
    }
}

fn off_diagonal_norm(a: &DMatrix<Complex64>) -> f64 {
    let n = a.nrows();
    let mut s = 0.0;
    for p in 0..n {
        for q in 0..n {
            if p != q {
                s += a[(p, q)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Diagonalize a Hermitian matrix. Fails if the input is not Hermitian
/// (relative to its own scale) or contains non-finite entries.
pub fn hermitian_eigen(h: &DMatrix<Complex64>) -> Result<EigenDecomposition> {
    let n = h.nrows();
    if n == 0 || h.ncols() != n {
        return Err(Error::InvalidArgument("matrix must be square and non-empty".into()));
    }
    let scale = h.iter().map(|z| z.norm()).fold(0.0_f64, f64::max).max(1.0);
    for p in 0..n {
        for q in 0..n {
            let z = h[(p, q)];
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(Error::InvalidArgument("matrix entry is not finite".into()));
            }
            let herm = (z - h[(q, p)].conj()).norm();
            if herm > 1e-10 * scale {
                return Err(Error::InvalidArgument(format!(
                    "matrix is not Hermitian at ({p},{q}): asymmetry {herm:.3e}"
                )));
            }
        }
    }

    let mut a = h.clone();
    let mut v = DMatrix::<Complex64>::identity(n, n);
    let frob = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt().max(1e-300);
    let tol = 1e-15 * frob;

    for _sweep in 0..60 {
        if off_diagonal_norm(&a) <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let b = apq.norm();
                if b <= tol * 1e-2 {
                    continue;
                }
                // Phase that makes the pivot real, then a real Jacobi rotation.
                let phase = apq / b; // e^{i phi}
                let alpha = a[(p, p)].re;
                let gamma = a[(q, q)].re;
                let tau = (gamma - alpha) / (2.0 * b);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;

                // U restricted to (p,q): [[c, s], [-s e^{-i phi}, c e^{-i phi}]]
                let u_qp = -s * phase.conj();
                let u_qq = c * phase.conj();

                // Rows: A <- U^H A
                for col in 0..n {
                    let ap = a[(p, col)];
                    let aq = a[(q, col)];
                    a[(p, col)] = c * ap + u_qp.conj() * aq;
                    a[(q, col)] = s * ap + u_qq.conj() * aq;
                }
                // Columns: A <- A U, and accumulate V <- V U
                for row in 0..n {
                    let ap = a[(row, p)];
                    let aq = a[(row, q)];
                    a[(row, p)] = c * ap + u_qp * aq;
                    a[(row, q)] = s * ap + u_qq * aq;
                    let vp = v[(row, p)];
                    let vq = v[(row, q)];
                    v[(row, p)] = c * vp + u_qp * vq;
                    v[(row, q)] = s * vp + u_qq * vq;
                }
                a[(p, q)] = Complex64::new(0.0, 0.0);
                a[(q, p)] = Complex64::new(0.0, 0.0);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|k| a[(k, k)].re).collect();
    order.sort_by(|&i, &j| diag[i].total_cmp(&diag[j]));

    let values: Vec<f64> = order.iter().map(|&k| diag[k]).collect();
    let mut vectors = DMatrix::<Complex64>::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        for row in 0..n {
            vectors[(row, dst)] = v[(row, src)];
        }
    }
    Ok(EigenDecomposition { values, vectors })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<Complex64> {
        let mut m = DMatrix::<Complex64>::zeros(n, n);
        for p in 0..n {
            m[(p, p)] = Complex64::new(rng.random_range(-1.0..1.0), 0.0);
            for q in (p + 1)..n {
                let z = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                m[(p, q)] = z;
                m[(q, p)] = z.conj();
            }
        }
        m
    }

    #[test]
    fn diagonal_matrix_passthrough() {
        let mut m = DMatrix::<Complex64>::zeros(3, 3);
        m[(0, 0)] = Complex64::new(3.0, 0.0);
        m[(1, 1)] = Complex64::new(1.0, 0.0);
        m[(2, 2)] = Complex64::new(2.0, 0.0);
        let e = hermitian_eigen(&m).unwrap();
        assert_eq!(e.values, vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn eigenpairs_satisfy_hv_eq_lv() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for n in [2usize, 3, 4, 6, 8] {
            for _ in 0..20 {
                let h = random_hermitian(n, &mut rng);
                let e = hermitian_eigen(&h).unwrap();
                for k in 0..n {
                    let vk = e.vectors.column(k);
                    let hv = &h * vk;
                    let lv = vk * Complex64::new(e.values[k], 0.0);
                    let resid = (hv - lv).iter().map(|z| z.norm()).fold(0.0, f64::max);
                    assert!(resid < 1e-12, "residual {resid} at n={n}");
                }
                // trace identity
                let tr: f64 = (0..n).map(|k| h[(k, k)].re).sum();
                let sum: f64 = e.values.iter().sum();
                assert_relative_eq!(tr, sum, max_relative = 1e-12, epsilon = 1e-12);
                // orthonormal columns
                let g = e.vectors.adjoint() * &e.vectors;
                for p in 0..n {
                    for q in 0..n {
                        let want = if p == q { 1.0 } else { 0.0 };
                        assert!((g[(p, q)].re - want).abs() < 1e-12);
                        assert!(g[(p, q)].im.abs() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn analytic_two_by_two() {
        // [[a, b], [b*, c]] has eigenvalues (a+c)/2 +- sqrt(((a-c)/2)^2 + |b|^2)
        let a = 2.0;
        let c = -1.0;
        let b = Complex64::new(0.3, -0.7);
        let mut m = DMatrix::<Complex64>::zeros(2, 2);
        m[(0, 0)] = Complex64::new(a, 0.0);
        m[(1, 1)] = Complex64::new(c, 0.0);
        m[(0, 1)] = b;
        m[(1, 0)] = b.conj();
        let e = hermitian_eigen(&m).unwrap();
        let mid = 0.5 * (a + c);
        let rad = (0.25 * (a - c) * (a - c) + b.norm_sqr()).sqrt();
        assert_relative_eq!(e.values[0], mid - rad, max_relative = 1e-14);
        assert_relative_eq!(e.values[1], mid + rad, max_relative = 1e-14);
    }

    #[test]
    fn rejects_non_hermitian() {
        let mut m = DMatrix::<Complex64>::zeros(2, 2);
        m[(0, 1)] = Complex64::new(1.0, 0.0);
        m[(1, 0)] = Complex64::new(0.5, 0.0);
        assert!(hermitian_eigen(&m).is_err());
    }
}
