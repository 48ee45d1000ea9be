//! Density-matrix foundation: construction and validation, maximally
//! correlated bases, basis changes, spectra, mixedness and entanglement
//! scalars, partial transposition.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{pauli, ComplexMatrix, C64};

/// Tolerance on the Hermiticity / trace / positivity invariants.
pub const VALIDATION_TOL: f64 = 1e-10;

const SQRT_HALF: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Validated quantum state: Hermitian, unit-trace, positive semidefinite.
///
/// Inputs failing an invariant by less than [`VALIDATION_TOL`] are accepted
/// and re-projected (negative eigenvalues clamped, trace renormalized), so
/// file-loaded matrices with decimal round-off survive validation.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    mat: ComplexMatrix,
    spectrum: Vec<f64>,
}

impl DensityMatrix {
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        let dim = m.dim();
        if dim < 2 || !dim.is_power_of_two() {
            return Err(Error::InvalidDimension { dim });
        }
        let dev = m.hermitian_deviation();
        if dev > VALIDATION_TOL {
            return Err(Error::NotHermitian { deviation: dev });
        }
        let trace_dev = (m.trace().re - 1.0).abs().max(m.trace().im.abs());
        if trace_dev > VALIDATION_TOL {
            return Err(Error::NotUnitTrace {
                deviation: trace_dev,
            });
        }
        // Work with the Hermitian part so the eigensolve sees an exactly
        // Hermitian matrix.
        let herm = m.add(&m.adjoint()).scale(C64::new(0.5, 0.0));
        let (values, vectors) = herm.eigh();
        let min_eig = values.iter().copied().fold(f64::INFINITY, f64::min);
        if min_eig < -VALIDATION_TOL {
            return Err(Error::NotPSD {
                min_eigenvalue: min_eig,
            });
        }
        if min_eig >= 0.0 && trace_dev < 1e-14 {
            return Ok(Self {
                mat: herm,
                spectrum: values,
            });
        }
        // Re-project: clamp negative eigenvalues, renormalize the trace.
        let clamped: Vec<f64> = values.iter().map(|&v| v.max(0.0)).collect();
        let total: f64 = clamped.iter().sum();
        let spectrum: Vec<f64> = clamped.iter().map(|&v| v / total).collect();
        let mut mat = ComplexMatrix::zeros(dim);
        for (lam, v) in spectrum.iter().zip(vectors.iter()) {
            mat = mat.add(&ComplexMatrix::outer(v, v).scale(C64::new(*lam, 0.0)));
        }
        Ok(Self { mat, spectrum })
    }

    /// Pure state |v><v| (normalizes the vector).
    pub fn pure(v: &[C64]) -> Result<Self> {
        let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-300 {
            return Err(Error::NotNormalized { deviation: 1.0 });
        }
        let v: Vec<C64> = v.iter().map(|z| z / norm).collect();
        Self::new(ComplexMatrix::outer(&v, &v))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        let m = ComplexMatrix::identity(dim).scale(C64::new(1.0 / dim as f64, 0.0));
        Self::new(m).expect("maximally mixed state is always valid")
    }

    /// Mix of eigenvalues placed on the vectors of `basis`.
    pub fn from_diagonal_in_basis(diag: &[f64], basis: &BasisSet) -> Result<Self> {
        let dim = basis.dim();
        if diag.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: diag.len(),
            });
        }
        let mut m = ComplexMatrix::zeros(dim);
        for (lam, v) in diag.iter().zip(basis.vectors()) {
            m = m.add(&ComplexMatrix::outer(v, v).scale(C64::new(*lam, 0.0)));
        }
        Self::new(m)
    }

    pub fn dim(&self) -> usize {
        self.mat.dim()
    }

    pub fn n_qubits(&self) -> usize {
        self.dim().trailing_zeros() as usize
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    /// Eigenvalues, sorted decreasing.
    pub fn spectrum(&self) -> &[f64] {
        &self.spectrum
    }
}

/// Mixedness scalars of a state: R = 1/Tr(rho^2), the largest eigenvalue
/// and the purity Tr(rho^2).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MixednessScalars {
    pub participation_ratio: f64,
    pub max_eigenvalue: f64,
    pub purity: f64,
}

/// R, lambda_max and purity computed from the spectrum.
pub fn mixedness(rho: &DensityMatrix) -> MixednessScalars {
    let purity: f64 = rho.spectrum().iter().map(|l| l * l).sum();
    MixednessScalars {
        participation_ratio: 1.0 / purity,
        max_eigenvalue: rho.spectrum()[0],
        purity,
    }
}

/// Orthonormal basis of state vectors.
#[derive(Debug, Clone, PartialEq)]
pub enum BasisKind {
    Computational,
    /// Bell basis with relative phase theta; theta = 0 recovers the real case.
    Bell { theta: f64 },
    /// Maximally correlated basis (|j> +- |2^n-1-j>)/sqrt(2) for n parties.
    Ghz { n_parties: usize },
}

#[derive(Debug, Clone)]
pub struct BasisSet {
    kind: BasisKind,
    vectors: Vec<Vec<C64>>,
}

impl BasisSet {
    pub fn computational(dim: usize) -> Self {
        let vectors = (0..dim)
            .map(|i| {
                let mut v = vec![C64::new(0.0, 0.0); dim];
                v[i] = C64::new(1.0, 0.0);
                v
            })
            .collect();
        Self {
            kind: BasisKind::Computational,
            vectors,
        }
    }

    /// Bell basis |Phi+>, |Phi->, |Psi+>, |Psi-> with phase `theta` on the
    /// second branch of each superposition.
    pub fn bell(theta: f64) -> Self {
        let phase = C64::from_polar(1.0, theta);
        let h = C64::new(SQRT_HALF, 0.0);
        let zero = C64::new(0.0, 0.0);
        let vectors = vec![
            vec![h, zero, zero, phase * h],
            vec![h, zero, zero, -phase * h],
            vec![zero, h, phase * h, zero],
            vec![zero, h, -phase * h, zero],
        ];
        Self {
            kind: BasisKind::Bell { theta },
            vectors,
        }
    }

    /// GHZ (Mermin / Bell_n) basis, listed as Psi_0+, Psi_0-, Psi_1+, ...
    /// so a spectrum stored as (lambda_j+, lambda_j-) pairs lines up with
    /// the vector order.
    pub fn ghz(n_parties: usize) -> Self {
        let dim = 1usize << n_parties;
        let h = C64::new(SQRT_HALF, 0.0);
        let mut vectors = Vec::with_capacity(dim);
        for j in 0..dim / 2 {
            for sign in [1.0, -1.0] {
                let mut v = vec![C64::new(0.0, 0.0); dim];
                v[j] = h;
                v[dim - 1 - j] = h * C64::new(sign, 0.0);
                vectors.push(v);
            }
        }
        Self {
            kind: BasisKind::Ghz { n_parties },
            vectors,
        }
    }

    pub fn kind(&self) -> &BasisKind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    pub fn vectors(&self) -> impl Iterator<Item = &Vec<C64>> {
        self.vectors.iter()
    }

    pub fn vector(&self, i: usize) -> &[C64] {
        &self.vectors[i]
    }

    /// Largest deviation of the Gram matrix from the identity.
    pub fn gram_deviation(&self) -> f64 {
        let d = self.dim();
        let mut dev: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                let dot: C64 = self.vectors[i]
                    .iter()
                    .zip(&self.vectors[j])
                    .map(|(a, b)| a.conj() * b)
                    .sum();
                let target = if i == j { 1.0 } else { 0.0 };
                dev = dev.max((dot - target).norm());
            }
        }
        dev
    }
}

/// Express `rho` in `basis`: entries become <v_i| rho |v_j>. Trace and
/// spectrum are preserved.
pub fn change_basis(rho: &DensityMatrix, basis: &BasisSet) -> Result<DensityMatrix> {
    if basis.dim() != rho.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            got: basis.dim(),
        });
    }
    let d = rho.dim();
    let applied: Vec<Vec<C64>> = (0..d).map(|j| rho.matrix().apply(basis.vector(j))).collect();
    let m = ComplexMatrix::from_fn(d, |i, j| {
        basis
            .vector(i)
            .iter()
            .zip(applied[j].iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    });
    DensityMatrix::new(m)
}

/// Split a dim-4 state written in the theta = 0 Bell basis into the part
/// that contributes to Tr(rho B_CHSH) and its complement: the diagonal, the
/// imaginary parts of entries (0,1), (0,2), (1,3), (2,3) and the real parts
/// of (0,3), (1,2) go into rho_par; everything else into rho_perp.
pub fn parallel_decompose(rho_bell: &DensityMatrix) -> Result<(ComplexMatrix, ComplexMatrix)> {
    if rho_bell.dim() != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            got: rho_bell.dim(),
        });
    }
    let m = rho_bell.matrix();
    let mut par = ComplexMatrix::zeros(4);
    for i in 0..4 {
        par.set(i, i, C64::new(m.get(i, i).re, 0.0));
    }
    for (i, j) in [(0usize, 1usize), (0, 2), (1, 3), (2, 3)] {
        let v = C64::new(0.0, m.get(i, j).im);
        par.set(i, j, v);
        par.set(j, i, v.conj());
    }
    for (i, j) in [(0usize, 3usize), (1, 2)] {
        let v = C64::new(m.get(i, j).re, 0.0);
        par.set(i, j, v);
        par.set(j, i, v);
    }
    let perp = m.sub(&par);
    Ok((par, perp))
}

/// Wootters concurrence of a two-qubit state.
pub fn concurrence(rho: &DensityMatrix) -> Result<f64> {
    if rho.dim() != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            got: rho.dim(),
        });
    }
    let yy = pauli(1).kron(&pauli(1));
    let flipped = yy.mul(&rho.matrix().conjugate()).mul(&yy);
    let sqrt_rho = rho.matrix().sqrt_psd();
    let m = sqrt_rho.mul(&flipped).mul(&sqrt_rho);
    let values = m.eigenvalues_hermitian();
    // round-off leaves spurious ~1e-17 eigenvalues on rank-deficient inputs;
    // their square roots (~3e-9) would otherwise pollute the alternating sum
    let tol = 1e-12 * values.iter().cloned().fold(0.0, f64::max).max(0.0);
    let mut roots: Vec<f64> = values
        .iter()
        .map(|&v| if v > tol { v.sqrt() } else { 0.0 })
        .collect();
    roots.sort_by(|a, b| b.total_cmp(a));
    Ok((roots[0] - roots[1] - roots[2] - roots[3]).max(0.0))
}

/// Transpose the tensor factor of one party. Party 0 is the most
/// significant bit of the computational index.
pub fn partial_transpose(rho: &DensityMatrix, party: usize) -> Result<ComplexMatrix> {
    let n = rho.n_qubits();
    if party >= n {
        return Err(Error::BadPartyIndex {
            party,
            n_parties: n,
        });
    }
    let bit = 1usize << (n - 1 - party);
    let d = rho.dim();
    let mut out = ComplexMatrix::zeros(d);
    for i in 0..d {
        for j in 0..d {
            let ti = (i & !bit) | (j & bit);
            let tj = (j & !bit) | (i & bit);
            out.set(ti, tj, rho.matrix().get(i, j));
        }
    }
    Ok(out)
}

/// JSON wire format for a density matrix: row-major re/im parts.
#[derive(Debug, Serialize, Deserialize)]
pub struct StateJson {
    pub dim: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl StateJson {
    pub fn from_state(rho: &DensityMatrix) -> Self {
        let d = rho.dim();
        let re = (0..d)
            .map(|i| (0..d).map(|j| rho.matrix().get(i, j).re).collect())
            .collect();
        let im = (0..d)
            .map(|i| (0..d).map(|j| rho.matrix().get(i, j).im).collect())
            .collect();
        Self { dim: d, re, im }
    }

    pub fn to_state(&self) -> Result<DensityMatrix> {
        if self.re.len() != self.dim || self.im.len() != self.dim {
            return Err(Error::Parse(format!(
                "dim field is {} but re/im have {} / {} rows",
                self.dim,
                self.re.len(),
                self.im.len()
            )));
        }
        DensityMatrix::new(ComplexMatrix::from_parts(&self.re, &self.im)?)
    }
}

pub fn state_from_json(text: &str) -> Result<DensityMatrix> {
    let parsed: StateJson =
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("state JSON: {e}")))?;
    parsed.to_state()
}

pub fn state_to_json(rho: &DensityMatrix) -> String {
    serde_json::to_string_pretty(&StateJson::from_state(rho)).expect("state serializes")
}
