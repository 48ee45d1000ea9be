//! Four-qubit MABK bound for Bell4-diagonal states, its conjectured
//! n-party generalization, and violation thresholds for generalized GHZ
//! states.

use serde::Serialize;

use crate::chsh::{csv_err, parse_f64, validate_simplex};
use crate::error::{Error, Result};
use crate::matrix::C64;
use crate::state::{BasisSet, DensityMatrix};

/// Eigenvalue pairs (lambda_j^+, lambda_j^-), j = 0..7, of a four-qubit
/// state diagonal in the Bell_4 basis, canonically sorted decreasing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bell4DiagonalSpectrum {
    pairs: [[f64; 2]; 8],
}

impl Bell4DiagonalSpectrum {
    pub fn new(pairs: [[f64; 2]; 8]) -> Result<Self> {
        let mut flat = [0.0f64; 16];
        for (k, v) in pairs.iter().flatten().enumerate() {
            flat[k] = *v;
        }
        Self::from_values(flat)
    }

    /// Canonicalize sixteen eigenvalues: sort decreasing, pair in order.
    pub fn from_values(mut values: [f64; 16]) -> Result<Self> {
        validate_simplex(&values)?;
        values.sort_by(|a, b| b.total_cmp(a));
        let mut pairs = [[0.0; 2]; 8];
        for j in 0..8 {
            pairs[j] = [values[2 * j], values[2 * j + 1]];
        }
        Ok(Self { pairs })
    }

    pub fn pairs(&self) -> [[f64; 2]; 8] {
        self.pairs
    }

    pub fn diffs(&self) -> [f64; 8] {
        self.pairs.map(|[p, m]| p - m)
    }

    /// Eigenvalues in Bell_4-basis order (Psi_0^+, Psi_0^-, Psi_1^+, ...).
    pub fn interleaved(&self) -> [f64; 16] {
        let mut out = [0.0; 16];
        for j in 0..8 {
            out[2 * j] = self.pairs[j][0];
            out[2 * j + 1] = self.pairs[j][1];
        }
        out
    }

    /// The diagonal state in the computational basis.
    pub fn state(&self) -> DensityMatrix {
        DensityMatrix::from_diagonal_in_basis(&self.interleaved(), &BasisSet::ghz(4))
            .expect("validated spectrum yields a state")
    }
}

/// Upper bound on the MABK maximum of a Bell_4-diagonal state:
/// 4 sqrt(2) sqrt(sum_j (lambda_j^+ - lambda_j^-)^2).
pub fn mabk_bound_diagonal(spectrum: &Bell4DiagonalSpectrum) -> f64 {
    4.0 * std::f64::consts::SQRT_2
        * spectrum.diffs().iter().map(|d| d * d).sum::<f64>().sqrt()
}

/// MABK value reached by pointing every measurement along z:
/// 2 |sum_j (-1)^popcount(j) (lambda_j^+ + lambda_j^-)|.
///
/// For a four-party maximally correlated diagonal state only the all-z and
/// all-transverse Pauli strings have nonzero diagonal matrix elements, and
/// with four parties the all-z string does not cancel, so this sector can
/// beat the transverse one on near-degenerate spectra.
pub fn mabk_z_value(spectrum: &Bell4DiagonalSpectrum) -> f64 {
    let z: f64 = spectrum
        .pairs()
        .iter()
        .enumerate()
        .map(|(j, [p, m])| {
            if (j as u32).count_ones() % 2 == 0 {
                p + m
            } else {
                -(p + m)
            }
        })
        .sum();
    2.0 * z.abs()
}

/// Ceiling on the MABK maximum of a Bell_4-diagonal state: the better of the
/// transverse-sector bound and the pure-z value. The see-saw optimizer never
/// exceeds this and saturates it on random spectra.
pub fn mabk_diagonal_ceiling(spectrum: &Bell4DiagonalSpectrum) -> f64 {
    mabk_bound_diagonal(spectrum).max(mabk_z_value(spectrum))
}

/// Conjectured bound for the n-party MABK maximum of a state diagonal in
/// the n-party maximally correlated basis:
/// 2^((n+1)/2) sqrt(sum_j (lambda_j^+ - lambda_j^-)^2) over the
/// 2^(n-1) pairs, taken as given.
pub fn mabk_conjecture_bound(pairs: &[[f64; 2]], n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::BadPartyCount {
            n,
            reason: "the MABK family needs at least two parties".into(),
        });
    }
    let expected = 1usize << (n - 1);
    if pairs.len() != expected {
        return Err(Error::BadSpectrum {
            reason: format!(
                "expected {expected} eigenvalue pairs for {n} parties, got {}",
                pairs.len()
            ),
        });
    }
    let flat: Vec<f64> = pairs.iter().flatten().copied().collect();
    validate_simplex(&flat)?;
    let sum_sq: f64 = pairs.iter().map(|[p, m]| (p - m).powi(2)).sum();
    Ok(2f64.powf((n as f64 + 1.0) / 2.0) * sum_sq.sqrt())
}

/// Generalized GHZ state sqrt(p)|0...0> + sqrt(1-p)|1...1> of n parties,
/// with cos(alpha) = sqrt(p).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GeneralizedGhz {
    n: usize,
    p: f64,
}

impl GeneralizedGhz {
    pub fn new(n: usize, p: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::BadPartyCount {
                n,
                reason: "a GHZ state needs at least two parties".into(),
            });
        }
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::OutOfRange {
                what: "GHZ weight p",
                value: p,
                lo: 0.0,
                hi: 1.0,
            });
        }
        Ok(Self { n, p })
    }

    pub fn n_parties(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn alpha(&self) -> f64 {
        self.p.sqrt().clamp(0.0, 1.0).acos()
    }

    /// sin(2 alpha) = 2 sqrt(p(1-p)).
    pub fn sin_2alpha(&self) -> f64 {
        2.0 * (self.p * (1.0 - self.p)).sqrt()
    }

    /// The state vector in the computational basis (dimension 2^n).
    pub fn vector(&self) -> Vec<C64> {
        let dim = 1usize << self.n;
        let mut v = vec![C64::new(0.0, 0.0); dim];
        v[0] = C64::new(self.p.sqrt(), 0.0);
        v[dim - 1] = C64::new((1.0 - self.p).sqrt(), 0.0);
        v
    }

    pub fn state(&self) -> DensityMatrix {
        DensityMatrix::pure(&self.vector()).expect("GHZ vector is normalized")
    }
}

/// Coefficients of the generalized GHZ state in the maximally correlated
/// basis: lambda_{1,2} = 1/2 +- sqrt(p(1-p)), with lambda_1 >= lambda_2
/// and lambda_1 + lambda_2 = 1.
pub fn ghz_bell_coeffs(g: &GeneralizedGhz) -> (f64, f64) {
    let root = (g.p * (1.0 - g.p)).sqrt();
    (0.5 + root, 0.5 - root)
}

/// Quantum maximum of the n-party MABK family, 2^((n+1)/2).
pub fn mabk_quantum_max(n: usize) -> f64 {
    2f64.powf((n as f64 + 1.0) / 2.0)
}

/// Local-variable-model ceiling consistent with the leading-order GHZ
/// violation: quantum_max / 2^((n-1)/2).
pub fn ghz_lvm_bound(n: usize) -> f64 {
    mabk_quantum_max(n) / 2f64.powf((n as f64 - 1.0) / 2.0)
}

/// Leading term of the MABK violation of a generalized GHZ state:
/// 2 * 2^((n+1)/2) sqrt(p(1-p)), i.e. quantum_max * sin(2 alpha).
pub fn ghz_violation_leading(g: &GeneralizedGhz) -> f64 {
    mabk_quantum_max(g.n) * g.sin_2alpha()
}

/// Threshold on sin(2 alpha) below which the leading-order violation stays
/// within the local bound: 1/sqrt(2^(n-1)), defined for n >= 3.
pub fn ghz_violation_threshold(n: usize) -> Result<f64> {
    if n < 3 {
        return Err(Error::BadPartyCount {
            n,
            reason: "the leading-order threshold applies for three or more parties".into(),
        });
    }
    Ok(1.0 / 2f64.powf((n as f64 - 1.0) / 2.0))
}

/// One row of a generalized-GHZ violation sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GhzSweepRow {
    pub n: usize,
    pub p: f64,
    pub sin2alpha: f64,
    pub leading_violation: f64,
    pub lvm_bound: f64,
    pub violates: bool,
}

/// Sweep p over [p_from, p_to] in `steps` intervals for n parties.
pub fn ghz_sweep(n: usize, p_from: f64, p_to: f64, steps: usize) -> Result<Vec<GhzSweepRow>> {
    ghz_violation_threshold(n)?;
    let mut rows = Vec::with_capacity(steps + 1);
    for k in 0..=steps {
        let p = p_from + (p_to - p_from) * k as f64 / steps.max(1) as f64;
        let g = GeneralizedGhz::new(n, p)?;
        let leading = ghz_violation_leading(&g);
        let lvm = ghz_lvm_bound(n);
        rows.push(GhzSweepRow {
            n,
            p,
            sin2alpha: g.sin_2alpha(),
            leading_violation: leading,
            lvm_bound: lvm,
            violates: leading > lvm,
        });
    }
    Ok(rows)
}

/// Write a GHZ sweep as CSV with columns
/// n,p,sin2alpha,leading_violation,lvm_bound,violates.
pub fn write_ghz_csv<W: std::io::Write>(rows: &[GhzSweepRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["n", "p", "sin2alpha", "leading_violation", "lvm_bound", "violates"])
        .map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.n.to_string(),
            format!("{:.9}", r.p),
            format!("{:.9}", r.sin2alpha),
            format!("{:.9}", r.leading_violation),
            format!("{:.9}", r.lvm_bound),
            r.violates.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Read back the GHZ sweep CSV.
pub fn read_ghz_csv<R: std::io::Read>(input: R) -> Result<Vec<GhzSweepRow>> {
    let mut r = csv::Reader::from_reader(input);
    let headers = r.headers().map_err(csv_err)?.clone();
    let expected = ["n", "p", "sin2alpha", "leading_violation", "lvm_bound", "violates"];
    if headers.iter().collect::<Vec<_>>() != expected {
        return Err(Error::SchemaMismatch {
            details: format!("expected columns {expected:?}, found {headers:?}"),
        });
    }
    let mut rows = Vec::new();
    for record in r.records() {
        let record = record.map_err(csv_err)?;
        let field = |i: usize| record.get(i).unwrap_or("");
        rows.push(GhzSweepRow {
            n: field(0)
                .parse()
                .map_err(|_| Error::Parse(format!("bad party count {:?}", field(0))))?,
            p: parse_f64(field(1))?,
            sin2alpha: parse_f64(field(2))?,
            leading_violation: parse_f64(field(3))?,
            lvm_bound: parse_f64(field(4))?,
            violates: field(5)
                .parse()
                .map_err(|_| Error::Parse(format!("bad boolean {:?}", field(5))))?,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chsh::{chsh_max_bell_diagonal, BellDiagonalSpectrum};
    use crate::mermin::{mermin_bound_diagonal, MerminDiagonalSpectrum};
    use crate::operators::{maximize_violation, BellFamily};
    use approx::assert_abs_diff_eq;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ghz4_spectrum() -> Bell4DiagonalSpectrum {
        let mut values = [0.0; 16];
        values[0] = 1.0;
        Bell4DiagonalSpectrum::from_values(values).unwrap()
    }

    fn random_spectrum(seed: u64) -> Bell4DiagonalSpectrum {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut values = [0.0f64; 16];
        for v in &mut values {
            *v = -rng.gen_range(f64::MIN_POSITIVE..1.0f64).ln();
        }
        let total: f64 = values.iter().sum();
        for v in &mut values {
            *v /= total;
        }
        Bell4DiagonalSpectrum::from_values(values).unwrap()
    }

    #[test]
    fn bound_examples() {
        assert_abs_diff_eq!(
            mabk_bound_diagonal(&ghz4_spectrum()),
            4.0 * std::f64::consts::SQRT_2,
            epsilon = 1e-12
        );
        let uniform = Bell4DiagonalSpectrum::from_values([1.0 / 16.0; 16]).unwrap();
        assert_abs_diff_eq!(mabk_bound_diagonal(&uniform), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn bound_ceiling() {
        for seed in 0..100 {
            let spectrum = random_spectrum(seed);
            assert!(mabk_bound_diagonal(&spectrum) < 4.0 * std::f64::consts::SQRT_2);
        }
    }

    #[test]
    fn optimizer_never_exceeds_ceiling() {
        for seed in 0..15 {
            let spectrum = random_spectrum(1000 + seed);
            let ceiling = mabk_diagonal_ceiling(&spectrum);
            let rep = maximize_violation(&spectrum.state(), BellFamily::Mabk4, 25, seed).unwrap();
            assert!(
                rep.value <= ceiling + 1e-6,
                "optimizer {} above ceiling {ceiling} at seed {seed}",
                rep.value
            );
        }
    }

    #[test]
    fn z_sector_can_beat_transverse_bound() {
        // seed 1002 yields a near-degenerate spectrum where the pure-z
        // strategy wins; the optimizer lands exactly on it.
        let spectrum = random_spectrum(1002);
        let z = mabk_z_value(&spectrum);
        assert!(z > mabk_bound_diagonal(&spectrum));
        let rep = maximize_violation(&spectrum.state(), BellFamily::Mabk4, 50, 7).unwrap();
        assert_abs_diff_eq!(rep.value, z, epsilon = 1e-9);
        // the GHZ_4 state itself is still governed by the transverse sector
        assert_abs_diff_eq!(mabk_z_value(&ghz4_spectrum()), 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(
            mabk_diagonal_ceiling(&ghz4_spectrum()),
            4.0 * std::f64::consts::SQRT_2,
            epsilon = 1e-12
        );
    }

    #[test]
    fn conjecture_reduces_to_two_and_three_parties() {
        // two parties: the cross pairing (l1, l4), (l2, l3) of a sorted
        // spectrum reproduces the Bell-diagonal CHSH formula
        let lambdas = [0.5, 0.25, 0.15, 0.1];
        let spec2 = BellDiagonalSpectrum::new(lambdas).unwrap();
        let pairs2 = [[lambdas[0], lambdas[3]], [lambdas[1], lambdas[2]]];
        assert_abs_diff_eq!(
            mabk_conjecture_bound(&pairs2, 2).unwrap(),
            chsh_max_bell_diagonal(&spec2),
            epsilon = 1e-15
        );

        let pairs3 = [[0.3, 0.2], [0.15, 0.12], [0.1, 0.08], [0.04, 0.01]];
        let spec3 = MerminDiagonalSpectrum::new(pairs3).unwrap();
        assert_abs_diff_eq!(
            mabk_conjecture_bound(&pairs3, 3).unwrap(),
            mermin_bound_diagonal(&spec3),
            epsilon = 1e-15
        );
    }

    #[test]
    fn conjecture_examples_and_errors() {
        let mut pairs5 = [[0.0; 2]; 16];
        pairs5[0][0] = 1.0;
        assert_abs_diff_eq!(mabk_conjecture_bound(&pairs5, 5).unwrap(), 8.0, epsilon = 1e-12);
        assert!(matches!(
            mabk_conjecture_bound(&[[1.0, 0.0]], 1),
            Err(Error::BadPartyCount { .. })
        ));
        assert!(mabk_conjecture_bound(&pairs5, 4).is_err());
    }

    #[test]
    fn ghz_coeff_examples() {
        let exact = GeneralizedGhz::new(4, 0.5).unwrap();
        assert_eq!(ghz_bell_coeffs(&exact), (1.0, 0.0));
        let product = GeneralizedGhz::new(4, 0.0).unwrap();
        assert_eq!(ghz_bell_coeffs(&product), (0.5, 0.5));
        let skew = GeneralizedGhz::new(4, 0.2).unwrap();
        let (l1, l2) = ghz_bell_coeffs(&skew);
        assert_abs_diff_eq!(l1, 0.9, epsilon = 1e-12);
        assert_abs_diff_eq!(l2, 0.1, epsilon = 1e-12);
    }

    #[test]
    fn ghz_coeff_identity() {
        for k in 0..=20 {
            let p = k as f64 / 20.0;
            let g = GeneralizedGhz::new(5, p).unwrap();
            let (l1, l2) = ghz_bell_coeffs(&g);
            assert_abs_diff_eq!(l1 + l2, 1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(l1 - l2, g.sin_2alpha(), epsilon = 1e-12);
        }
    }

    #[test]
    fn leading_violation_examples() {
        let g4 = GeneralizedGhz::new(4, 0.5).unwrap();
        assert_abs_diff_eq!(
            ghz_violation_leading(&g4),
            4.0 * std::f64::consts::SQRT_2,
            epsilon = 1e-12
        );
        let g3 = GeneralizedGhz::new(3, 0.5).unwrap();
        assert_abs_diff_eq!(ghz_violation_leading(&g3), 4.0, epsilon = 1e-12);
        let product = GeneralizedGhz::new(6, 0.0).unwrap();
        assert_abs_diff_eq!(ghz_violation_leading(&product), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn threshold_examples() {
        assert_abs_diff_eq!(ghz_violation_threshold(3).unwrap(), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(
            ghz_violation_threshold(4).unwrap(),
            1.0 / 8f64.sqrt(),
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            ghz_violation_threshold(10).unwrap(),
            1.0 / 512f64.sqrt(),
            epsilon = 1e-15
        );
        assert!(ghz_violation_threshold(2).is_err());
    }

    #[test]
    fn threshold_meets_lvm_bound() {
        for n in 3..=8 {
            let threshold = ghz_violation_threshold(n).unwrap();
            // p with sin(2 alpha) at the threshold
            let p = 0.5 + 0.5 * (1.0 - threshold * threshold).sqrt();
            let g = GeneralizedGhz::new(n, p).unwrap();
            assert_abs_diff_eq!(g.sin_2alpha(), threshold, epsilon = 1e-12);
            assert_abs_diff_eq!(
                ghz_violation_leading(&g),
                ghz_lvm_bound(n),
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn sweep_flips_at_threshold() {
        let rows = ghz_sweep(3, 0.5, 1.0, 1000).unwrap();
        let threshold = ghz_violation_threshold(3).unwrap();
        for w in rows.windows(2) {
            if w[0].violates != w[1].violates {
                assert!(w[0].sin2alpha > threshold && w[1].sin2alpha < threshold);
            }
        }
        assert!(rows.first().unwrap().violates);
        assert!(!rows.last().unwrap().violates);
    }

    #[test]
    fn ghz_csv_round_trip() {
        let rows = ghz_sweep(4, 0.0, 1.0, 25).unwrap();
        let mut buf = Vec::new();
        write_ghz_csv(&rows, &mut buf).unwrap();
        let back = read_ghz_csv(buf.as_slice()).unwrap();
        assert_eq!(rows.len(), back.len());
        for (a, b) in rows.iter().zip(back.iter()) {
            assert_eq!(a.n, b.n);
            assert_eq!(a.violates, b.violates);
            assert_abs_diff_eq!(a.leading_violation, b.leading_violation, epsilon = 1e-9);
        }
    }

    #[test]
    fn ghz4_state_reaches_mabk_quantum_max() {
        let g = GeneralizedGhz::new(4, 0.5).unwrap();
        let rep = maximize_violation(&g.state(), BellFamily::Mabk4, 60, 7).unwrap();
        assert_abs_diff_eq!(rep.value, 4.0 * std::f64::consts::SQRT_2, epsilon = 1e-6);
    }
}
