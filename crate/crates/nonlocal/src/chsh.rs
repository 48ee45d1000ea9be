//! Closed-form two-qubit CHSH results: the Bell-diagonal maximum, the
//! nonlocality-versus-mixedness frontiers, the maximally nonlocal (MNMS)
//! and maximally entangled (MEMS) mixed-state families, pure superpositions
//! of Bell states and the lower bound for superpositions of orthogonal
//! states.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, C64};
use crate::state::{BasisSet, DensityMatrix};

const SPECTRUM_TOL: f64 = 1e-12;

pub const TSIRELSON: f64 = 2.0 * std::f64::consts::SQRT_2;

/// Eigenvalues of a two-qubit state diagonal in the Bell basis, stored
/// sorted decreasing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BellDiagonalSpectrum {
    lambdas: [f64; 4],
}

impl BellDiagonalSpectrum {
    pub fn new(mut lambdas: [f64; 4]) -> Result<Self> {
        validate_simplex(&lambdas)?;
        lambdas.sort_by(|a, b| b.total_cmp(a));
        Ok(Self { lambdas })
    }

    pub fn lambdas(&self) -> [f64; 4] {
        self.lambdas
    }

    /// The state itself, diagonal in the phase-zero Bell basis, expressed in
    /// the computational basis.
    pub fn state(&self) -> DensityMatrix {
        DensityMatrix::from_diagonal_in_basis(&self.lambdas, &BasisSet::bell(0.0))
            .expect("validated spectrum yields a state")
    }
}

pub(crate) fn validate_simplex(values: &[f64]) -> Result<()> {
    if let Some(bad) = values.iter().find(|&&v| !(0.0..=1.0 + SPECTRUM_TOL).contains(&v)) {
        return Err(Error::BadSpectrum {
            reason: format!("eigenvalue {bad} outside [0, 1]"),
        });
    }
    let sum: f64 = values.iter().sum();
    if (sum - 1.0).abs() > SPECTRUM_TOL {
        return Err(Error::BadSpectrum {
            reason: format!("eigenvalues sum to {sum}, expected 1"),
        });
    }
    Ok(())
}

/// Maximum CHSH value of a Bell-diagonal state:
/// 2 sqrt(2) sqrt((l1 - l4)^2 + (l2 - l3)^2) on the sorted spectrum.
pub fn chsh_max_bell_diagonal(spectrum: &BellDiagonalSpectrum) -> f64 {
    let [l1, l2, l3, l4] = spectrum.lambdas();
    TSIRELSON * ((l1 - l4).powi(2) + (l2 - l3).powi(2)).sqrt()
}

/// Which extremal family realizes a frontier point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FamilyTag {
    RhoI,
    RhoII,
    Werner3,
}

impl FamilyTag {
    pub fn label(&self) -> &'static str {
        match self {
            FamilyTag::RhoI => "rho_I",
            FamilyTag::RhoII => "rho_II",
            FamilyTag::Werner3 => "werner3",
        }
    }

    pub fn from_label(s: &str) -> Result<Self> {
        match s {
            "rho_I" => Ok(FamilyTag::RhoI),
            "rho_II" => Ok(FamilyTag::RhoII),
            "werner3" => Ok(FamilyTag::Werner3),
            other => Err(Error::Parse(format!("unknown family tag {other:?}"))),
        }
    }
}

/// Mixedness measure parameterizing a frontier curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FrontierMeasure {
    R,
    LambdaMax,
}

impl FrontierMeasure {
    pub fn label(&self) -> &'static str {
        match self {
            FrontierMeasure::R => "R",
            FrontierMeasure::LambdaMax => "lambda_max",
        }
    }

    pub fn from_label(s: &str) -> Result<Self> {
        match s {
            "R" => Ok(FrontierMeasure::R),
            "lambda_max" => Ok(FrontierMeasure::LambdaMax),
            other => Err(Error::Parse(format!("unknown measure {other:?}"))),
        }
    }
}

/// One point of a maximal-nonlocality frontier curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrontierPoint {
    pub measure: FrontierMeasure,
    pub x: f64,
    pub b_max: f64,
    pub family_state: FamilyTag,
}

/// Maximum CHSH value at fixed participation ratio R = 1/Tr(rho^2):
/// sqrt(8/R) on [1, 2] (family rho_I) and 4 sqrt((4 - R)/(4R)) on [2, 4]
/// (family rho_II).
#[allow(non_snake_case)] // R is the standard symbol for the participation ratio
pub fn chsh_frontier_R(r: f64) -> Result<FrontierPoint> {
    if !(1.0..=4.0).contains(&r) {
        return Err(Error::OutOfRange {
            what: "participation ratio R",
            value: r,
            lo: 1.0,
            hi: 4.0,
        });
    }
    let branch_i = (8.0 / r).sqrt();
    let branch_ii = 4.0 * ((4.0 - r) / (4.0 * r)).sqrt();
    if r == 2.0 {
        assert!(
            (branch_i - branch_ii).abs() <= 1e-12,
            "frontier branches disagree at the joint"
        );
    }
    let (b_max, family_state) = if r <= 2.0 {
        (branch_i, FamilyTag::RhoI)
    } else {
        (branch_ii, FamilyTag::RhoII)
    };
    Ok(FrontierPoint {
        measure: FrontierMeasure::R,
        x: r,
        b_max,
        family_state,
    })
}

/// Maximum CHSH value at fixed largest eigenvalue.
pub fn chsh_frontier_lambda(lambda_max: f64) -> Result<f64> {
    if !(0.25..=1.0).contains(&lambda_max) {
        return Err(Error::OutOfRange {
            what: "lambda_max",
            value: lambda_max,
            lo: 0.25,
            hi: 1.0,
        });
    }
    let l = lambda_max;
    Ok(if l <= 1.0 / 3.0 {
        TSIRELSON * (4.0 * l - 1.0)
    } else if l <= 0.5 {
        TSIRELSON * (l * l + (1.0 - 3.0 * l).powi(2)).sqrt()
    } else {
        TSIRELSON * (l * l + (1.0 - l).powi(2)).sqrt()
    })
}

/// Frontier point for the lambda_max measure (family rho_II below 1/2,
/// rho_I above).
pub fn chsh_frontier_lambda_point(lambda_max: f64) -> Result<FrontierPoint> {
    let b_max = chsh_frontier_lambda(lambda_max)?;
    Ok(FrontierPoint {
        measure: FrontierMeasure::LambdaMax,
        x: lambda_max,
        b_max,
        family_state: if lambda_max < 0.5 {
            FamilyTag::RhoII
        } else {
            FamilyTag::RhoI
        },
    })
}

/// Maximally nonlocal mixed-state regions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MnmsRegion {
    I,
    II,
}

/// Maximally nonlocal mixed state, diagonal in the Bell basis:
/// region I is diag(1-x, x, 0, 0) for x in [0, 1/2]; region II is
/// diag(x, x, (1-2x)/2, (1-2x)/2) for x in [0, 1/4]. Returned in the
/// computational basis.
pub fn mnms_state(x: f64, region: MnmsRegion) -> Result<DensityMatrix> {
    let hi = match region {
        MnmsRegion::I => 0.5,
        MnmsRegion::II => 0.25,
    };
    if !(0.0..=hi).contains(&x) {
        return Err(Error::OutOfRange {
            what: "MNMS parameter x",
            value: x,
            lo: 0.0,
            hi,
        });
    }
    let diag = match region {
        MnmsRegion::I => [1.0 - x, x, 0.0, 0.0],
        MnmsRegion::II => [x, x, (1.0 - 2.0 * x) / 2.0, (1.0 - 2.0 * x) / 2.0],
    };
    DensityMatrix::from_diagonal_in_basis(&diag, &BasisSet::bell(0.0))
}

fn mems_g(x: f64) -> f64 {
    if x <= 2.0 / 3.0 {
        1.0 / 3.0
    } else {
        x / 2.0
    }
}

/// Maximally entangled mixed state of concurrence x, in the computational
/// basis: entries g(x) at (0,0) and (3,3), x/2 at (0,3) and (3,0), and
/// 1 - 2g(x) at (1,1), with g(x) = 1/3 for x <= 2/3 and x/2 beyond.
pub fn mems_state(x: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::OutOfRange {
            what: "MEMS concurrence x",
            value: x,
            lo: 0.0,
            hi: 1.0,
        });
    }
    let g = mems_g(x);
    let mut m = ComplexMatrix::zeros(4);
    m.set(0, 0, C64::new(g, 0.0));
    m.set(3, 3, C64::new(g, 0.0));
    m.set(0, 3, C64::new(x / 2.0, 0.0));
    m.set(3, 0, C64::new(x / 2.0, 0.0));
    m.set(1, 1, C64::new(1.0 - 2.0 * g, 0.0));
    DensityMatrix::new(m)
}

/// Maximum CHSH value of the MEMS family as a function of concurrence:
/// (2/3) sqrt(1 + 9x^2) for x <= 1/3 and 2 sqrt(2) x beyond.
pub fn chsh_max_mems(x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::OutOfRange {
            what: "MEMS concurrence x",
            value: x,
            lo: 0.0,
            hi: 1.0,
        });
    }
    Ok(if x <= 1.0 / 3.0 {
        (2.0 / 3.0) * (1.0 + 9.0 * x * x).sqrt()
    } else {
        TSIRELSON * x
    })
}

/// Real coefficients of a pure superposition of the four Bell states.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PureSuperposition {
    coeffs: [f64; 4],
}

impl PureSuperposition {
    pub fn new(coeffs: [f64; 4]) -> Result<Self> {
        let sum: f64 = coeffs.iter().map(|c| c * c).sum();
        if (sum - 1.0).abs() > SPECTRUM_TOL {
            return Err(Error::NotNormalized {
                deviation: (sum - 1.0).abs(),
            });
        }
        Ok(Self { coeffs })
    }

    pub fn coeffs(&self) -> [f64; 4] {
        self.coeffs
    }

    /// The superposed pure state as a computational-basis vector.
    pub fn vector(&self) -> Vec<C64> {
        let basis = BasisSet::bell(0.0);
        let mut v = vec![C64::new(0.0, 0.0); 4];
        for (i, &c) in self.coeffs.iter().enumerate() {
            for (vi, bi) in v.iter_mut().zip(basis.vector(i)) {
                *vi += C64::new(c, 0.0) * bi;
            }
        }
        v
    }

    pub fn state(&self) -> DensityMatrix {
        DensityMatrix::pure(&self.vector()).expect("normalized superposition")
    }
}

/// Maximum CHSH value of a real superposition of Bell states:
/// 2 sqrt(2) sqrt((l1 + l4)^2 + (l2 + l3)^2) with l_i the squared
/// coefficients.
pub fn chsh_max_pure(psi: &PureSuperposition) -> f64 {
    let [c1, c2, c3, c4] = psi.coeffs();
    let (l1, l2, l3, l4) = (c1 * c1, c2 * c2, c3 * c3, c4 * c4);
    TSIRELSON * ((l1 + l4).powi(2) + (l2 + l3).powi(2)).sqrt()
}

/// Squared concurrence of a real superposition of Bell states:
/// 1 - 4 (l1 + l4)(l2 + l3).
pub fn pure_concurrence_sq(psi: &PureSuperposition) -> f64 {
    let [c1, c2, c3, c4] = psi.coeffs();
    let (l1, l2, l3, l4) = (c1 * c1, c2 * c2, c3 * c3, c4 * c4);
    1.0 - 4.0 * (l1 + l4) * (l2 + l3)
}

/// Maximum CHSH value of the state alpha |01> + sqrt(1 - alpha^2) |Phi+>:
/// 2 sqrt(2 - alpha^2 (2 - alpha^2)).
pub fn superposition_example_theta(alpha: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::OutOfRange {
            what: "superposition weight alpha",
            value: alpha,
            lo: 0.0,
            hi: 1.0,
        });
    }
    let a2 = alpha * alpha;
    Ok(2.0 * (2.0 - a2 * (2.0 - a2)).sqrt())
}

/// Lower bound for a normalized superposition of mutually orthogonal Bell
/// superpositions, with the realized value for comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Theorem1Report {
    /// sqrt(sum_i alpha_i^4 B_max(phi_i)^2)
    pub bound: f64,
    /// maximum CHSH value of the combined state
    pub actual: f64,
    /// actual^2 - bound^2, the contribution of the cross terms
    pub cross_term: f64,
}

/// Lower bound on the maximal CHSH value of sum_i alpha_i |phi_i> for
/// pairwise orthogonal real Bell superpositions |phi_i>.
///
/// The inequality actual >= bound is guaranteed when the |phi_i> occupy
/// pairwise disjoint subsets of the Bell basis (then all cross terms are
/// nonnegative). For general orthogonal families the cross terms can turn
/// negative and `cross_term` reports by how much; callers should inspect it
/// rather than assume the bound holds.
pub fn theorem1_lower_bound(
    states: &[PureSuperposition],
    alphas: &[f64],
) -> Result<Theorem1Report> {
    if states.is_empty() || states.len() != alphas.len() {
        return Err(Error::Parse(format!(
            "need matching nonempty state/weight lists, got {} and {}",
            states.len(),
            alphas.len()
        )));
    }
    let weight: f64 = alphas.iter().map(|a| a * a).sum();
    if (weight - 1.0).abs() > SPECTRUM_TOL {
        return Err(Error::NotNormalized {
            deviation: (weight - 1.0).abs(),
        });
    }
    for i in 0..states.len() {
        for j in (i + 1)..states.len() {
            let overlap: f64 = states[i]
                .coeffs()
                .iter()
                .zip(states[j].coeffs().iter())
                .map(|(a, b)| a * b)
                .sum();
            if overlap.abs() > 1e-10 {
                return Err(Error::NotOrthogonal {
                    i,
                    j,
                    overlap: overlap.abs(),
                });
            }
        }
    }
    let bound_sq: f64 = states
        .iter()
        .zip(alphas.iter())
        .map(|(s, a)| a.powi(4) * chsh_max_pure(s).powi(2))
        .sum();
    let bound = bound_sq.sqrt();
    let mut combined = [0.0f64; 4];
    for (s, a) in states.iter().zip(alphas.iter()) {
        for (c, sc) in combined.iter_mut().zip(s.coeffs().iter()) {
            *c += a * sc;
        }
    }
    let actual = chsh_max_pure(&PureSuperposition::new(combined)?);
    Ok(Theorem1Report {
        bound,
        actual,
        cross_term: actual * actual - bound_sq,
    })
}

/// Write frontier points as CSV with columns measure,x,b_max,family_state.
pub fn write_frontier_csv<W: std::io::Write>(points: &[FrontierPoint], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["measure", "x", "b_max", "family_state"])
        .map_err(csv_err)?;
    for p in points {
        w.write_record([
            p.measure.label().to_string(),
            format!("{:.9}", p.x),
            format!("{:.9}", p.b_max),
            p.family_state.label().to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Read frontier points back from the CSV emitted by `write_frontier_csv`.
pub fn read_frontier_csv<R: std::io::Read>(input: R) -> Result<Vec<FrontierPoint>> {
    let mut r = csv::Reader::from_reader(input);
    let headers = r.headers().map_err(csv_err)?.clone();
    let expected = ["measure", "x", "b_max", "family_state"];
    if headers.iter().collect::<Vec<_>>() != expected {
        return Err(Error::SchemaMismatch {
            details: format!("expected columns {expected:?}, found {headers:?}"),
        });
    }
    let mut points = Vec::new();
    for record in r.records() {
        let record = record.map_err(csv_err)?;
        let field = |i: usize| record.get(i).unwrap_or("");
        points.push(FrontierPoint {
            measure: FrontierMeasure::from_label(field(0))?,
            x: parse_f64(field(1))?,
            b_max: parse_f64(field(2))?,
            family_state: FamilyTag::from_label(field(3))?,
        });
    }
    Ok(points)
}

pub(crate) fn parse_f64(s: &str) -> Result<f64> {
    s.trim()
        .parse()
        .map_err(|_| Error::Parse(format!("expected a number, got {s:?}")))
}

pub(crate) fn csv_err(e: csv::Error) -> Error {
    Error::Parse(format!("csv: {e}"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{maximize_violation, BellFamily};
    use crate::state::{concurrence, mixedness};
    use approx::assert_abs_diff_eq;

    #[test]
    fn bell_diagonal_examples() {
        let pure = BellDiagonalSpectrum::new([1.0, 0.0, 0.0, 0.0]).unwrap();
        assert_abs_diff_eq!(chsh_max_bell_diagonal(&pure), TSIRELSON, epsilon = 1e-15);
        let mixed = BellDiagonalSpectrum::new([0.25; 4]).unwrap();
        assert_abs_diff_eq!(chsh_max_bell_diagonal(&mixed), 0.0, epsilon = 1e-15);
        let werner = BellDiagonalSpectrum::new([0.625, 0.125, 0.125, 0.125]).unwrap();
        assert_abs_diff_eq!(
            chsh_max_bell_diagonal(&werner),
            std::f64::consts::SQRT_2,
            epsilon = 1e-12
        );
    }

    #[test]
    fn bell_diagonal_permutation_invariant() {
        let value = chsh_max_bell_diagonal(
            &BellDiagonalSpectrum::new([0.1, 0.4, 0.2, 0.3]).unwrap(),
        );
        let permuted = chsh_max_bell_diagonal(
            &BellDiagonalSpectrum::new([0.3, 0.1, 0.4, 0.2]).unwrap(),
        );
        assert_abs_diff_eq!(value, permuted, epsilon = 1e-15);
    }

    #[test]
    fn bad_spectra_rejected() {
        assert!(BellDiagonalSpectrum::new([0.5, 0.5, 0.5, -0.5]).is_err());
        assert!(BellDiagonalSpectrum::new([0.5, 0.4, 0.0, 0.0]).is_err());
    }

    #[test]
    fn frontier_r_examples() {
        assert_abs_diff_eq!(chsh_frontier_R(1.0).unwrap().b_max, TSIRELSON, epsilon = 1e-12);
        let joint = chsh_frontier_R(2.0).unwrap();
        assert_abs_diff_eq!(joint.b_max, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(chsh_frontier_R(4.0).unwrap().b_max, 0.0, epsilon = 1e-12);
        assert!(chsh_frontier_R(0.5).is_err());
        assert_eq!(chsh_frontier_R(1.5).unwrap().family_state, FamilyTag::RhoI);
        assert_eq!(chsh_frontier_R(3.0).unwrap().family_state, FamilyTag::RhoII);
    }

    #[test]
    fn frontier_lambda_continuity() {
        let third = 1.0 / 3.0;
        assert_abs_diff_eq!(chsh_frontier_lambda(0.25).unwrap(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(
            chsh_frontier_lambda(third).unwrap(),
            TSIRELSON / 3.0,
            epsilon = 1e-12
        );
        // continuity across both joints
        for l in [third, 0.5] {
            let below = chsh_frontier_lambda(l - 1e-9).unwrap();
            let above = chsh_frontier_lambda(l + 1e-9).unwrap();
            assert_abs_diff_eq!(below, above, epsilon = 1e-7);
        }
        assert_abs_diff_eq!(chsh_frontier_lambda(1.0).unwrap(), TSIRELSON, epsilon = 1e-12);
    }

    #[test]
    fn mnms_examples() {
        let pure = mnms_state(0.0, MnmsRegion::I).unwrap();
        let mx = mixedness(&pure);
        assert_abs_diff_eq!(mx.participation_ratio, 1.0, epsilon = 1e-10);

        let mid = mnms_state(0.25, MnmsRegion::I).unwrap();
        assert_abs_diff_eq!(mixedness(&mid).participation_ratio, 1.6, epsilon = 1e-10);

        let mixed = mnms_state(0.25, MnmsRegion::II).unwrap();
        assert!(mixed
            .matrix()
            .sub(DensityMatrix::maximally_mixed(4).matrix())
            .max_abs()
            < 1e-12);
        assert!(mnms_state(0.3, MnmsRegion::II).is_err());
    }

    #[test]
    fn mnms_chsh_concurrence_relation() {
        // region I: B = 2 sqrt(1 + C^2) with C = 1 - 2x
        for k in 0..=10 {
            let x = 0.05 * k as f64;
            let spec = BellDiagonalSpectrum::new([1.0 - x, x, 0.0, 0.0]).unwrap();
            let c = 1.0 - 2.0 * x;
            assert_abs_diff_eq!(
                chsh_max_bell_diagonal(&spec),
                2.0 * (1.0 + c * c).sqrt(),
                epsilon = 1e-12
            );
            let rho = mnms_state(x, MnmsRegion::I).unwrap();
            assert_abs_diff_eq!(concurrence(&rho).unwrap(), c, epsilon = 1e-7);
        }
    }

    #[test]
    fn mems_examples() {
        let pure = mems_state(1.0).unwrap();
        assert_abs_diff_eq!(concurrence(&pure).unwrap(), 1.0, epsilon = 1e-7);
        assert_abs_diff_eq!(
            mixedness(&mems_state(2.0 / 3.0).unwrap()).participation_ratio,
            1.8,
            epsilon = 1e-9
        );
        for k in 0..=10 {
            let x = 0.1 * k as f64;
            assert_abs_diff_eq!(
                concurrence(&mems_state(x).unwrap()).unwrap(),
                x,
                epsilon = 1e-7
            );
        }
    }

    #[test]
    fn mems_chsh_examples() {
        assert_abs_diff_eq!(chsh_max_mems(0.0).unwrap(), 2.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(
            chsh_max_mems(1.0 / std::f64::consts::SQRT_2).unwrap(),
            2.0,
            epsilon = 1e-12
        );
        let third = 1.0 / 3.0;
        assert_abs_diff_eq!(
            chsh_max_mems(third).unwrap(),
            TSIRELSON / 3.0,
            epsilon = 1e-12
        );
        // MEMS never exceed MNMS at equal concurrence
        for k in 1..10 {
            let c = 0.1 * k as f64;
            assert!(2.0 * (1.0 + c * c).sqrt() > TSIRELSON * c);
        }
    }

    #[test]
    fn pure_superposition_examples() {
        let bell = PureSuperposition::new([1.0, 0.0, 0.0, 0.0]).unwrap();
        assert_abs_diff_eq!(chsh_max_pure(&bell), TSIRELSON, epsilon = 1e-12);
        assert_abs_diff_eq!(pure_concurrence_sq(&bell), 1.0, epsilon = 1e-12);

        let h = std::f64::consts::FRAC_1_SQRT_2;
        let product = PureSuperposition::new([h, h, 0.0, 0.0]).unwrap();
        assert_abs_diff_eq!(chsh_max_pure(&product), 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(pure_concurrence_sq(&product), 0.0, epsilon = 1e-12);

        let phi_pair = PureSuperposition::new([h, 0.0, 0.0, h]).unwrap();
        assert_abs_diff_eq!(chsh_max_pure(&phi_pair), TSIRELSON, epsilon = 1e-12);
    }

    #[test]
    fn pure_relation_b_sq_is_4c_sq_plus_4() {
        let mut rng_state = 12345u64;
        let mut next = || {
            rng_state = rng_state.wrapping_mul(6364136223846793005).wrapping_add(1);
            (rng_state >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
        };
        for _ in 0..200 {
            let raw = [next(), next(), next(), next()];
            let n: f64 = raw.iter().map(|c| c * c).sum::<f64>().sqrt();
            let psi = PureSuperposition::new(raw.map(|c| c / n)).unwrap();
            let b = chsh_max_pure(&psi);
            assert_abs_diff_eq!(b * b, 4.0 * pure_concurrence_sq(&psi) + 4.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn superposition_example_matches_optimizer() {
        assert_abs_diff_eq!(superposition_example_theta(0.0).unwrap(), TSIRELSON, epsilon = 1e-12);
        assert_abs_diff_eq!(superposition_example_theta(1.0).unwrap(), 2.0, epsilon = 1e-12);
        let alpha = 0.5f64.sqrt();
        assert_abs_diff_eq!(
            superposition_example_theta(alpha).unwrap(),
            2.0 * 1.25f64.sqrt(),
            epsilon = 1e-12
        );
        // cross-check against the direct optimizer on the explicit state
        let beta = (1.0 - alpha * alpha).sqrt();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let psi = PureSuperposition::new([beta, 0.0, alpha * h, alpha * h]).unwrap();
        let rep = maximize_violation(&psi.state(), BellFamily::Chsh, 40, 3).unwrap();
        assert_abs_diff_eq!(
            rep.value,
            superposition_example_theta(alpha).unwrap(),
            epsilon = 1e-6
        );
    }

    #[test]
    fn theorem1_examples() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let single = theorem1_lower_bound(
            &[PureSuperposition::new([1.0, 0.0, 0.0, 0.0]).unwrap()],
            &[1.0],
        )
        .unwrap();
        assert_abs_diff_eq!(single.bound, single.actual, epsilon = 1e-12);

        let pair = theorem1_lower_bound(
            &[
                PureSuperposition::new([1.0, 0.0, 0.0, 0.0]).unwrap(),
                PureSuperposition::new([0.0, 1.0, 0.0, 0.0]).unwrap(),
            ],
            &[h, h],
        )
        .unwrap();
        assert_abs_diff_eq!(pair.bound, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(pair.actual, 2.0, epsilon = 1e-12);

        let bad = theorem1_lower_bound(
            &[
                PureSuperposition::new([1.0, 0.0, 0.0, 0.0]).unwrap(),
                PureSuperposition::new([1.0, 0.0, 0.0, 0.0]).unwrap(),
            ],
            &[h, h],
        );
        assert!(matches!(bad, Err(Error::NotOrthogonal { .. })));
    }

    #[test]
    fn frontier_csv_round_trip() {
        let points: Vec<FrontierPoint> = (0..=30)
            .map(|k| chsh_frontier_R(1.0 + 0.1 * k as f64).unwrap())
            .collect();
        let mut buf = Vec::new();
        write_frontier_csv(&points, &mut buf).unwrap();
        let back = read_frontier_csv(buf.as_slice()).unwrap();
        assert_eq!(points.len(), back.len());
        for (a, b) in points.iter().zip(back.iter()) {
            assert_eq!(a.measure, b.measure);
            assert_eq!(a.family_state, b.family_state);
            assert_abs_diff_eq!(a.b_max, b.b_max, epsilon = 1e-9);
        }
    }

    #[test]
    fn closed_form_matches_optimizer_on_random_spectra() {
        for seed in 0..20u64 {
            let mut s = seed.wrapping_mul(0x9E3779B97F4A7C15).wrapping_add(1);
            let mut next = || {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                ((s >> 11) as f64 / (1u64 << 53) as f64).max(1e-12)
            };
            let draws = [-next().ln(), -next().ln(), -next().ln(), -next().ln()];
            let total: f64 = draws.iter().sum();
            let spec = BellDiagonalSpectrum::new(draws.map(|d| d / total)).unwrap();
            let closed = chsh_max_bell_diagonal(&spec);
            let rep = maximize_violation(&spec.state(), BellFamily::Chsh, 30, seed).unwrap();
            assert_abs_diff_eq!(rep.value, closed, epsilon = 1e-6);
        }
    }
}
