//! Small dense symmetric eigenproblems and spectral matrix functions.
//!
//! Matrices handled here are tiny (k <= 4 in practice), so a cyclic Jacobi
//! sweep is both exact enough and cheap. Results of spectral functions are
//! explicitly symmetrized.

use nalgebra::{DMatrix, DVector};

const MAX_SWEEPS: usize = 64;

/// Eigenvalues and orthonormal eigenvectors (as columns) of a symmetric matrix.
#[derive(Debug, Clone)]
pub struct SymEigen {
    pub values: DVector<f64>,
    pub vectors: DMatrix<f64>,
}

impl SymEigen {
    /// Cyclic Jacobi rotations until the off-diagonal mass is negligible.
    /// Only the lower triangle of `m` is read.
    pub fn new(m: &DMatrix<f64>) -> Self {
        let k = m.nrows();
        debug_assert_eq!(k, m.ncols());
        let mut a = DMatrix::from_fn(k, k, |i, j| if i >= j { m[(i, j)] } else { m[(j, i)] });
        let mut v = DMatrix::identity(k, k);

        for _ in 0..MAX_SWEEPS {
            let mut off = 0.0;
            let mut diag = 0.0;
            for i in 0..k {
                diag += a[(i, i)] * a[(i, i)];
                for j in 0..i {
                    off += a[(i, j)] * a[(i, j)];
                }
            }
            if off <= 1e-32 * diag || off == 0.0 {
                break;
            }
            for p in 0..k {
                for q in (p + 1)..k {
                    let apq = a[(p, q)];
                    if apq == 0.0 {
                        continue;
                    }
                    let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let t = if theta == 0.0 { 1.0 } else { t };
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for r in 0..k {
                        let arp = a[(r, p)];
                        let arq = a[(r, q)];
                        a[(r, p)] = c * arp - s * arq;
                        a[(r, q)] = s * arp + c * arq;
                    }
                    for r in 0..k {
                        let apr = a[(p, r)];
                        let aqr = a[(q, r)];
                        a[(p, r)] = c * apr - s * aqr;
                        a[(q, r)] = s * apr + c * aqr;
                    }
                    for r in 0..k {
                        let vrp = v[(r, p)];
                        let vrq = v[(r, q)];
                        v[(r, p)] = c * vrp - s * vrq;
                        v[(r, q)] = s * vrp + c * vrq;
                    }
                }
            }
        }
        SymEigen {
            values: DVector::from_fn(k, |i, _| a[(i, i)]),
            vectors: v,
        }
    }

    pub fn min_value(&self) -> f64 {
        self.values.min()
    }

    /// `V diag(f(lambda)) V^T`, symmetrized.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
        let k = self.values.len();
        let mut out = DMatrix::zeros(k, k);
        for (idx, &lam) in self.values.iter().enumerate() {
            let w = f(lam);
            let col = self.vectors.column(idx);
            for j in 0..k {
                for i in j..k {
                    out[(i, j)] += w * col[i] * col[j];
                }
            }
        }
        for j in 0..k {
            for i in (j + 1)..k {
                out[(j, i)] = out[(i, j)];
            }
        }
        out
    }
}

/// `(m + m^T) / 2`
pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// `a * m * a` for symmetric `a`, symmetrized.
pub fn congruence(a: &DMatrix<f64>, m: &DMatrix<f64>) -> DMatrix<f64> {
    symmetrize(&(a * m * a))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn reconstructs_random_symmetric_matrices() {
        let mut seed = 7u64;
        let mut next = || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((seed >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        for k in 1..=5 {
            for _ in 0..20 {
                let b = DMatrix::from_fn(k, k, |_, _| next());
                let m = symmetrize(&b);
                let e = SymEigen::new(&m);
                let back = e.map(|x| x);
                assert_abs_diff_eq!(back, m, epsilon = 1e-13);
                let vtv = e.vectors.transpose() * &e.vectors;
                assert_abs_diff_eq!(vtv, DMatrix::identity(k, k), epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn diagonal_input_is_untouched() {
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![3.0, 0.5]));
        let e = SymEigen::new(&m);
        assert_eq!(e.vectors, DMatrix::identity(2, 2));
        assert_abs_diff_eq!(e.map(f64::ln), DMatrix::from_diagonal(&DVector::from_vec(vec![3f64.ln(), 0.5f64.ln()])));
    }
}
