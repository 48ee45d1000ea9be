//! Small dense complex matrices with the handful of operations the rest of
//! the crate needs: products, adjoints, Kronecker products and Hermitian
//! eigendecompositions. Backed by `nalgebra`.

use nalgebra::linalg::SymmetricEigen;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;

/// Square complex matrix of dimension `dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    mat: DMatrix<C64>,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            mat: DMatrix::zeros(dim, dim),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            mat: DMatrix::identity(dim, dim),
        }
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        Self {
            mat: DMatrix::from_fn(dim, dim, f),
        }
    }

    /// Build from row-major real and imaginary parts. Rejects ragged input.
    pub fn from_parts(re: &[Vec<f64>], im: &[Vec<f64>]) -> Result<Self> {
        let dim = re.len();
        if im.len() != dim
            || re.iter().any(|row| row.len() != dim)
            || im.iter().any(|row| row.len() != dim)
        {
            return Err(Error::Parse(format!(
                "re/im must each be {dim} rows of {dim} numbers"
            )));
        }
        Ok(Self::from_fn(dim, |i, j| C64::new(re[i][j], im[i][j])))
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        Self::from_fn(diag.len(), |i, j| {
            if i == j {
                C64::new(diag[i], 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }

    /// Outer product |v><w| of two complex vectors.
    pub fn outer(v: &[C64], w: &[C64]) -> Self {
        assert_eq!(v.len(), w.len());
        Self::from_fn(v.len(), |i, j| v[i] * w[j].conj())
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.mat[(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        self.mat[(i, j)] = v;
    }

    pub fn adjoint(&self) -> Self {
        Self {
            mat: self.mat.adjoint(),
        }
    }

    pub fn transpose(&self) -> Self {
        Self {
            mat: self.mat.transpose(),
        }
    }

    pub fn conjugate(&self) -> Self {
        Self {
            mat: self.mat.map(|z| z.conj()),
        }
    }

    pub fn trace(&self) -> C64 {
        self.mat.trace()
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self {
            mat: &self.mat * &other.mat,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            mat: &self.mat + &other.mat,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self {
            mat: &self.mat - &other.mat,
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            mat: self.mat.map(|z| z * s),
        }
    }

    pub fn kron(&self, other: &Self) -> Self {
        Self {
            mat: self.mat.kronecker(&other.mat),
        }
    }

    /// Tr(self * other), computed without forming the product.
    pub fn trace_product(&self, other: &Self) -> C64 {
        let d = self.dim();
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..d {
            for k in 0..d {
                acc += self.get(i, k) * other.get(k, i);
            }
        }
        acc
    }

    /// Largest entry of |M - M^dag|.
    pub fn hermitian_deviation(&self) -> f64 {
        let d = self.dim();
        let mut dev: f64 = 0.0;
        for i in 0..d {
            for j in i..d {
                dev = dev.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        dev
    }

    pub fn max_abs(&self) -> f64 {
        self.mat.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Eigenvalues of a Hermitian matrix, sorted decreasing.
    pub fn eigenvalues_hermitian(&self) -> Vec<f64> {
        self.eigh().0
    }

    /// Full Hermitian eigendecomposition: eigenvalues sorted decreasing with
    /// matching eigenvectors as columns.
    pub fn eigh(&self) -> (Vec<f64>, Vec<Vec<C64>>) {
        let eig = SymmetricEigen::new(self.mat.clone());
        // SymmetricEigen can mispair eigenvalues and eigenvectors when
        // off-diagonal couplings sit near machine epsilon; the Rayleigh
        // quotient of each returned vector is the reliable eigenvalue.
        let mut pairs: Vec<(f64, Vec<C64>)> = (0..self.dim())
            .map(|k| {
                let v = eig.eigenvectors.column(k);
                let lam = v.dotc(&(&self.mat * v)).re;
                (lam, v.iter().copied().collect())
            })
            .collect();
        pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
        pairs.into_iter().unzip()
    }

    /// Hermitian PSD square root via the spectral decomposition. Small
    /// negative eigenvalues from round-off are clamped to zero.
    pub fn sqrt_psd(&self) -> Self {
        let (values, vectors) = self.eigh();
        let d = self.dim();
        let mut out = Self::zeros(d);
        for (lam, v) in values.iter().zip(vectors.iter()) {
            if *lam > 0.0 {
                let s = lam.sqrt();
                for i in 0..d {
                    for j in 0..d {
                        out.mat[(i, j)] += C64::new(s, 0.0) * v[i] * v[j].conj();
                    }
                }
            }
        }
        out
    }

    /// Apply `self` to a vector.
    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        let x = DVector::from_column_slice(v);
        (&self.mat * x).iter().copied().collect()
    }
}

/// Pauli matrices sigma_x, sigma_y, sigma_z.
pub fn pauli(axis: usize) -> ComplexMatrix {
    let z = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    let entries = match axis {
        0 => [z, one, one, z],
        1 => [z, -i, i, z],
        2 => [one, z, z, -one],
        _ => panic!("pauli axis must be 0, 1 or 2"),
    };
    ComplexMatrix::from_fn(2, |r, c| entries[2 * r + c])
}

/// v . sigma for a real 3-vector.
pub fn dot_sigma(v: [f64; 3]) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(2);
    for (axis, &comp) in v.iter().enumerate() {
        m = m.add(&pauli(axis).scale(C64::new(comp, 0.0)));
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn pauli_algebra() {
        for axis in 0..3 {
            let s = pauli(axis);
            assert_abs_diff_eq!(s.trace().norm(), 0.0, epsilon = 1e-15);
            let sq = s.mul(&s);
            assert_abs_diff_eq!(sq.sub(&ComplexMatrix::identity(2)).max_abs(), 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn hermitian_eigenvalues_sorted() {
        let m = ComplexMatrix::from_diagonal(&[0.25, 0.5, 0.1, 0.15]);
        let ev = m.eigenvalues_hermitian();
        assert_abs_diff_eq!(ev[0], 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(ev[3], 0.1, epsilon = 1e-14);
    }

    #[test]
    fn sqrt_psd_squares_back() {
        let m = ComplexMatrix::from_fn(2, |i, j| {
            if i == j {
                C64::new(0.5, 0.0)
            } else {
                C64::new(0.25, if i < j { 0.1 } else { -0.1 })
            }
        });
        let s = m.sqrt_psd();
        assert!(s.mul(&s).sub(&m).max_abs() < 1e-12);
    }

    #[test]
    fn kron_dims() {
        let a = ComplexMatrix::identity(2);
        let b = ComplexMatrix::identity(4);
        assert_eq!(a.kron(&b).dim(), 8);
    }
}
