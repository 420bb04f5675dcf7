//! Dense complex Hermitian eigensolver (cyclic Jacobi).
//!
//! Used to cross-check the closed-form Zeeman spectra; matrices here are at
//! most a few dozen rows, so the O(n^3) sweep cost is irrelevant.

use num_complex::Complex64;

/// Eigen-decomposition of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    /// Eigenvalues in ascending order.
    pub values: Vec<f64>,
    /// Column `k` (row-major, `vectors[i * n + k]`) is the eigenvector of `values[k]`.
    pub vectors: Vec<Complex64>,
    pub sweeps: usize,
}

const MAX_SWEEPS: usize = 100;

/// Diagonalise the row-major `n x n` Hermitian matrix `a`.
///
/// Only the upper triangle's consistency with the lower one is assumed; the
/// input is symmetrised as `(A + A^H)/2` before rotating.
pub fn eigh(a: &[Complex64], n: usize) -> HermitianEigen {
    assert_eq!(a.len(), n * n, "matrix must be n x n");
    let mut m: Vec<Complex64> = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for j in 0..n {
            m[i * n + j] = (a[i * n + j] + a[j * n + i].conj()) * 0.5;
        }
    }
    let mut v = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        v[i * n + i] = Complex64::new(1.0, 0.0);
    }

    let scale = m
        .iter()
        .map(|z| z.norm_sqr())
        .sum::<f64>()
        .sqrt()
        .max(f64::MIN_POSITIVE);
    let mut sweeps = 0;
    while sweeps < MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[i * n + j].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * scale {
            break;
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[p * n + q];
                let mag = apq.norm();
                if mag <= 1e-300 {
                    continue;
                }
                let app = m[p * n + p].re;
                let aqq = m[q * n + q].re;
                let phase = apq / mag;
                let theta = (aqq - app) / (2.0 * mag);
                // signum(0.0) is 1.0, so equal diagonals rotate by pi/4
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // U = diag(1, conj(phase)) * [[c, s], [-s, c]] on the (p, q) plane
                let upp = Complex64::new(c, 0.0);
                let upq = Complex64::new(s, 0.0);
                let uqp = -phase.conj() * s;
                let uqq = phase.conj() * c;

                for k in 0..n {
                    let akp = m[k * n + p];
                    let akq = m[k * n + q];
                    m[k * n + p] = akp * upp + akq * uqp;
                    m[k * n + q] = akp * upq + akq * uqq;
                }
                for k in 0..n {
                    let apk = m[p * n + k];
                    let aqk = m[q * n + k];
                    m[p * n + k] = upp.conj() * apk + uqp.conj() * aqk;
                    m[q * n + k] = upq.conj() * apk + uqq.conj() * aqk;
                }
                m[p * n + q] = Complex64::new(0.0, 0.0);
                m[q * n + p] = Complex64::new(0.0, 0.0);
                m[p * n + p].im = 0.0;
                m[q * n + q].im = 0.0;

                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = vkp * upp + vkq * uqp;
                    v[k * n + q] = vkp * upq + vkq * uqq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[i * n + i].re.total_cmp(&m[j * n + j].re));
    let values = order.iter().map(|&i| m[i * n + i].re).collect();
    let mut vectors = vec![Complex64::new(0.0, 0.0); n * n];
    for (k, &col) in order.iter().enumerate() {
        for i in 0..n {
            vectors[i * n + k] = v[i * n + col];
        }
    }
    HermitianEigen {
        values,
        vectors,
        sweeps,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn pauli_y_has_eigenvalues_plus_minus_one() {
        let a = [c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)];
        let e = eigh(&a, 2);
        assert!((e.values[0] + 1.0).abs() < 1e-15);
        assert!((e.values[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn eigenvectors_reconstruct_the_matrix() {
        let n = 4;
        let mut a = vec![c(0.0, 0.0); n * n];
        let raw = [
            (0, 0, c(1.0, 0.0)),
            (0, 1, c(0.3, -0.7)),
            (0, 3, c(-0.2, 0.1)),
            (1, 1, c(-0.4, 0.0)),
            (1, 2, c(0.5, 0.5)),
            (2, 2, c(2.0, 0.0)),
            (2, 3, c(0.0, -1.1)),
            (3, 3, c(0.25, 0.0)),
        ];
        for (i, j, z) in raw {
            a[i * n + j] = z;
            a[j * n + i] = z.conj();
        }
        let e = eigh(&a, n);
        for i in 0..n {
            for j in 0..n {
                let mut s = c(0.0, 0.0);
                for k in 0..n {
                    s += e.vectors[i * n + k] * e.values[k] * e.vectors[j * n + k].conj();
                }
                assert!((s - a[i * n + j]).norm() < 1e-13, "({i},{j})");
            }
        }
    }
}
