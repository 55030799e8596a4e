//! Dense symmetric linear algebra used by the rest of the crate: matrix-vector
//! products, full-spectrum eigenvalues via cyclic Jacobi rotations, and SPD
//! solves via Cholesky factorization.
//!
//! Problem sizes here are small (tens of variables, at most a few hundred
//! agents), so everything is plain row-major `Vec<f64>` with no sparsity.

use crate::error::{Error, Result};

const MAX_JACOBI_SWEEPS: usize = 100;

/// Dense symmetric matrix, row-major full storage.
///
/// Symmetry is enforced at construction by storing `(M + Mᵀ)/2`, so user
/// input with asymmetry drift never leaks into eigenvalue computations.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    /// Builds a symmetric matrix from row-major entries, storing `(M + Mᵀ)/2`.
    pub fn from_rows(dim: usize, rows: &[f64]) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Invalid("matrix dimension must be >= 1".into()));
        }
        if rows.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                got: rows.len(),
            });
        }
        let mut data = vec![0.0; dim * dim];
        for i in 0..dim {
            for j in 0..dim {
                data[i * dim + j] = 0.5 * (rows[i * dim + j] + rows[j * dim + i]);
            }
        }
        Ok(Self { dim, data })
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = 1.0;
        }
        m
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let dim = diag.len();
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = diag[i];
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    /// Sets both `(i, j)` and `(j, i)`.
    pub fn set_sym(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.dim + j] = v;
        self.data[j * self.dim + i] = v;
    }

    pub fn rows(&self) -> &[f64] {
        &self.data
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|v| c * v).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: other.dim,
            });
        }
        Ok(Self {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn matvec(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: v.len(),
            });
        }
        let mut out = vec![0.0; self.dim];
        for i in 0..self.dim {
            let row = &self.data[i * self.dim..(i + 1) * self.dim];
            out[i] = dot(row, v);
        }
        Ok(out)
    }

    /// Full spectrum by cyclic Jacobi rotations, sorted ascending.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let n = self.dim;
        if n == 1 {
            return Ok(vec![self.data[0]]);
        }
        let mut a = self.data.clone();
        let scale = frobenius(&a);
        if scale == 0.0 {
            return Ok(vec![0.0; n]);
        }
        let tol = 1e-15 * scale;
        for _ in 0..MAX_JACOBI_SWEEPS {
            if off_diag_norm(&a, n) <= tol {
                let mut eig: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
                eig.sort_by(|x, y| x.partial_cmp(y).unwrap());
                return Ok(eig);
            }
            for p in 0..n - 1 {
                for q in p + 1..n {
                    let apq = a[p * n + q];
                    if apq.abs() <= tol / n as f64 {
                        continue;
                    }
                    let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    // A <- Gᵀ A G with G a rotation in the (p, q) plane.
                    for r in 0..n {
                        let arp = a[r * n + p];
                        let arq = a[r * n + q];
                        a[r * n + p] = c * arp - s * arq;
                        a[r * n + q] = s * arp + c * arq;
                    }
                    for r in 0..n {
                        let apr = a[p * n + r];
                        let aqr = a[q * n + r];
                        a[p * n + r] = c * apr - s * aqr;
                        a[q * n + r] = s * apr + c * aqr;
                    }
                }
            }
        }
        Err(Error::EigNotConverged {
            sweeps: MAX_JACOBI_SWEEPS,
            residual: off_diag_norm(&a, n),
        })
    }

    /// Smallest and largest eigenvalues.
    pub fn eig_bounds(&self) -> Result<(f64, f64)> {
        let eig = self.eigenvalues()?;
        Ok((eig[0], eig[eig.len() - 1]))
    }

    /// Solves `M z = rhs` for symmetric positive definite `M` via Cholesky.
    ///
    /// Rejects indefinite or near-singular matrices
    /// (`lambda_min <= 1e-12 * lambda_max`).
    pub fn spd_solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        if rhs.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: rhs.len(),
            });
        }
        let (lmin, lmax) = self.eig_bounds()?;
        if !(lmin > 1e-12 * lmax) {
            return Err(Error::NotPositiveDefinite { lambda_min: lmin });
        }
        let l = self.cholesky()?;
        let n = self.dim;
        // forward solve L w = rhs
        let mut w = vec![0.0; n];
        for i in 0..n {
            let mut acc = rhs[i];
            for k in 0..i {
                acc -= l[i * n + k] * w[k];
            }
            w[i] = acc / l[i * n + i];
        }
        // back solve Lᵀ z = w
        let mut z = vec![0.0; n];
        for i in (0..n).rev() {
            let mut acc = w[i];
            for k in i + 1..n {
                acc -= l[k * n + i] * z[k];
            }
            z[i] = acc / l[i * n + i];
        }
        Ok(z)
    }

    /// Lower-triangular Cholesky factor. A non-positive pivot means the
    /// matrix is not positive definite.
    fn cholesky(&self) -> Result<Vec<f64>> {
        let n = self.dim;
        let a = &self.data;
        let mut l = vec![0.0; n * n];
        for j in 0..n {
            let mut d = a[j * n + j];
            for k in 0..j {
                d -= l[j * n + k] * l[j * n + k];
            }
            if d <= 0.0 {
                return Err(Error::NotPositiveDefinite { lambda_min: d });
            }
            l[j * n + j] = d.sqrt();
            for i in j + 1..n {
                let mut acc = a[i * n + j];
                for k in 0..j {
                    acc -= l[i * n + k] * l[j * n + k];
                }
                l[i * n + j] = acc / l[j * n + j];
            }
        }
        Ok(l)
    }
}

fn frobenius(a: &[f64]) -> f64 {
    a.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn off_diag_norm(a: &[f64], n: usize) -> f64 {
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                acc += a[i * n + j] * a[i * n + j];
            }
        }
    }
    acc.sqrt()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn all_finite(v: &[f64]) -> bool {
    v.iter().all(|x| x.is_finite())
}

/// `A x` for a general row-major `rows x cols` matrix.
pub fn gemv(rows: usize, cols: usize, a: &[f64], x: &[f64]) -> Vec<f64> {
    debug_assert_eq!(a.len(), rows * cols);
    debug_assert_eq!(x.len(), cols);
    (0..rows).map(|i| dot(&a[i * cols..(i + 1) * cols], x)).collect()
}

/// `Aᵀ x` for a general row-major `rows x cols` matrix.
pub fn gemv_t(rows: usize, cols: usize, a: &[f64], x: &[f64]) -> Vec<f64> {
    debug_assert_eq!(a.len(), rows * cols);
    debug_assert_eq!(x.len(), rows);
    let mut out = vec![0.0; cols];
    for i in 0..rows {
        for j in 0..cols {
            out[j] += a[i * cols + j] * x[i];
        }
    }
    out
}
