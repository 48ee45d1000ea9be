//! Bell operators (CHSH, Mermin, MABK) built from observer settings, and a
//! deterministic multi-start maximization of their expectation value over
//! all settings.
//!
//! The optimizer never forms the 2^n x 2^n operator. The expectation is
//! multilinear in the 2n measurement vectors, so it contracts the state's
//! Pauli correlation tensor instead, and each coordinate step replaces one
//! vector by its (unit-normalized) linear coefficient, which is the exact
//! conditional maximum.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::{dot_sigma, pauli, ComplexMatrix, C64};
use crate::state::DensityMatrix;

/// Per-party measurement directions: the two unit vectors a and b.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PartySettings {
    pub a: [f64; 3],
    pub b: [f64; 3],
}

/// Spherical angles (theta, phi) with v = (sin t cos p, sin t sin p, cos t).
pub fn unit_vector(theta: f64, phi: f64) -> [f64; 3] {
    [
        theta.sin() * phi.cos(),
        theta.sin() * phi.sin(),
        theta.cos(),
    ]
}

pub fn vector_angles(v: [f64; 3]) -> (f64, f64) {
    let theta = v[2].clamp(-1.0, 1.0).acos();
    let mut phi = v[1].atan2(v[0]);
    if phi < 0.0 {
        phi += 2.0 * std::f64::consts::PI;
    }
    (theta, phi)
}

/// Measurement settings for all parties.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObserverSettings {
    parties: Vec<PartySettings>,
}

impl ObserverSettings {
    /// Build from angle pairs: for each party ((theta_a, phi_a), (theta_b, phi_b)).
    pub fn from_angles(angles: &[((f64, f64), (f64, f64))]) -> Self {
        let parties = angles
            .iter()
            .map(|&((ta, pa), (tb, pb))| PartySettings {
                a: unit_vector(ta, pa),
                b: unit_vector(tb, pb),
            })
            .collect();
        Self { parties }
    }

    /// Build from unit vectors; each is normalized defensively.
    pub fn from_vectors(parties: &[([f64; 3], [f64; 3])]) -> Self {
        let norm = |v: [f64; 3]| {
            let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            [v[0] / n, v[1] / n, v[2] / n]
        };
        Self {
            parties: parties
                .iter()
                .map(|&(a, b)| PartySettings {
                    a: norm(a),
                    b: norm(b),
                })
                .collect(),
        }
    }

    pub fn n_parties(&self) -> usize {
        self.parties.len()
    }

    pub fn party(&self, j: usize) -> &PartySettings {
        &self.parties[j]
    }

    pub fn parties(&self) -> &[PartySettings] {
        &self.parties
    }

    fn vector(&self, party: usize, choice: usize) -> [f64; 3] {
        match choice {
            0 => self.parties[party].a,
            _ => self.parties[party].b,
        }
    }

    /// Angles ((theta, phi) for a then b, per party).
    pub fn angles(&self) -> Vec<((f64, f64), (f64, f64))> {
        self.parties
            .iter()
            .map(|p| (vector_angles(p.a), vector_angles(p.b)))
            .collect()
    }
}

/// Bell-inequality family: classical (LVM) bound and quantum maximum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BellFamily {
    Chsh,
    Mermin,
    Mabk4,
    /// n-party generalized MABK; only the closed forms are available for
    /// n > 4 (no operator is constructed).
    MabkN(usize),
}

impl BellFamily {
    pub fn n_parties(&self) -> usize {
        match self {
            BellFamily::Chsh => 2,
            BellFamily::Mermin => 3,
            BellFamily::Mabk4 => 4,
            BellFamily::MabkN(n) => *n,
        }
    }

    pub fn lvm_bound(&self) -> f64 {
        match self {
            BellFamily::Chsh => 2.0,
            BellFamily::Mermin => 2.0,
            BellFamily::Mabk4 => 4.0,
            BellFamily::MabkN(n) => match n {
                2 => 2.0,
                3 => 2.0,
                4 => 4.0,
                // generalized normalization: quantum_max / 2^((n-1)/2)
                _ => 2.0,
            },
        }
    }

    pub fn quantum_max(&self) -> f64 {
        match self {
            BellFamily::Chsh => 2.0 * std::f64::consts::SQRT_2,
            BellFamily::Mermin => 4.0,
            BellFamily::Mabk4 => 4.0 * std::f64::consts::SQRT_2,
            BellFamily::MabkN(n) => 2f64.powf((*n as f64 + 1.0) / 2.0),
        }
    }

    /// Signed correlator terms: (sign, setting choice per party), choice 0
    /// picks a_j and choice 1 picks b_j.
    pub fn terms(&self) -> Vec<(f64, Vec<usize>)> {
        match self {
            BellFamily::Chsh | BellFamily::MabkN(2) => vec![
                (1.0, vec![0, 0]),
                (1.0, vec![0, 1]),
                (1.0, vec![1, 0]),
                (-1.0, vec![1, 1]),
            ],
            BellFamily::Mermin | BellFamily::MabkN(3) => vec![
                (1.0, vec![0, 0, 0]),
                (-1.0, vec![0, 1, 1]),
                (-1.0, vec![1, 0, 1]),
                (-1.0, vec![1, 1, 0]),
            ],
            // Mermin-Klyshko form for an even party count: the 16 signed
            // correlators carry a global factor 1/2, which puts the quantum
            // maximum at 2^(5/2) = 4*sqrt(2) on the four-party GHZ state.
            BellFamily::Mabk4 | BellFamily::MabkN(4) => (0..16)
                .map(|mask: usize| {
                    let choices: Vec<usize> = (0..4).map(|k| (mask >> (3 - k)) & 1).collect();
                    let n_b = choices.iter().sum::<usize>();
                    let sign = if n_b == 0 || n_b >= 3 { 0.5 } else { -0.5 };
                    (sign, choices)
                })
                .collect(),
            BellFamily::MabkN(n) => panic!("no explicit operator terms for n = {n} parties"),
        }
    }
}

fn check_party_count(s: &ObserverSettings, expected: usize) -> Result<()> {
    if s.n_parties() != expected {
        return Err(Error::WrongPartyCount {
            expected,
            got: s.n_parties(),
        });
    }
    Ok(())
}

fn build_operator(family: BellFamily, s: &ObserverSettings) -> ComplexMatrix {
    let n = family.n_parties();
    let dim = 1usize << n;
    let mut out = ComplexMatrix::zeros(dim);
    for (sign, choices) in family.terms() {
        let mut term = dot_sigma(s.vector(0, choices[0]));
        for (k, &c) in choices.iter().enumerate().skip(1) {
            term = term.kron(&dot_sigma(s.vector(k, c)));
        }
        out = out.add(&term.scale(C64::new(sign, 0.0)));
    }
    out
}

/// CHSH operator A1 B1 + A1 B2 + A2 B1 - A2 B2 as a 4x4 matrix.
pub fn chsh_operator(s: &ObserverSettings) -> Result<ComplexMatrix> {
    check_party_count(s, 2)?;
    Ok(build_operator(BellFamily::Chsh, s))
}

/// Mermin operator B_aaa - B_abb - B_bab - B_bba as an 8x8 matrix.
pub fn mermin_operator(s: &ObserverSettings) -> Result<ComplexMatrix> {
    check_party_count(s, 3)?;
    Ok(build_operator(BellFamily::Mermin, s))
}

/// Four-party MABK operator (16 signed terms) as a 16x16 matrix.
pub fn mabk_operator(s: &ObserverSettings) -> Result<ComplexMatrix> {
    check_party_count(s, 4)?;
    Ok(build_operator(BellFamily::Mabk4, s))
}

/// Re Tr(rho B). Both inputs are Hermitian so the imaginary part vanishes.
pub fn expectation(rho: &DensityMatrix, bell_op: &ComplexMatrix) -> Result<f64> {
    if rho.dim() != bell_op.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            got: bell_op.dim(),
        });
    }
    let t = rho.matrix().trace_product(bell_op);
    debug_assert!(t.im.abs() < 1e-10);
    Ok(t.re)
}

/// Pauli correlation tensor W[u1..un] = Tr(rho sigma_u1 x ... x sigma_un),
/// u in {x, y, z}, party 0 as the leading index.
pub struct CorrelationTensor {
    n: usize,
    w: Vec<f64>,
}

impl CorrelationTensor {
    pub fn compute(rho: &DensityMatrix) -> Self {
        let n = rho.n_qubits();
        let d = rho.dim();
        let sigmas: Vec<ComplexMatrix> = (0..3).map(pauli).collect();
        let size = 3usize.pow(n as u32);
        let mut w = vec![0.0; size];
        for (idx, slot) in w.iter_mut().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for a in 0..d {
                for b in 0..d {
                    // entry (a, b) of the sigma product, times rho(b, a)
                    let mut prod = C64::new(1.0, 0.0);
                    let mut rem = idx;
                    for k in (0..n).rev() {
                        let axis = rem % 3;
                        rem /= 3;
                        let ak = (a >> (n - 1 - k)) & 1;
                        let bk = (b >> (n - 1 - k)) & 1;
                        prod *= sigmas[axis].get(ak, bk);
                        if prod.norm_sqr() == 0.0 {
                            break;
                        }
                    }
                    acc += rho.matrix().get(b, a) * prod;
                }
            }
            *slot = acc.re;
        }
        Self { n, w }
    }

    pub fn n_parties(&self) -> usize {
        self.n
    }

    /// Tensor entry for per-party axes (0 = x, 1 = y, 2 = z).
    pub fn entry(&self, axes: &[usize]) -> f64 {
        debug_assert_eq!(axes.len(), self.n);
        let mut idx = 0;
        for &u in axes {
            idx = idx * 3 + u;
        }
        self.w[idx]
    }

    /// Full contraction with one vector per party.
    fn contract(&self, vectors: &[[f64; 3]]) -> f64 {
        self.fold(vectors, None).0
    }

    /// Contraction leaving party `open` uncontracted: returns the linear
    /// coefficient 3-vector of that party.
    fn gradient(&self, vectors: &[[f64; 3]], open: usize) -> [f64; 3] {
        self.fold(vectors, Some(open)).1
    }

    fn fold(&self, vectors: &[[f64; 3]], open: Option<usize>) -> (f64, [f64; 3]) {
        let mut value = 0.0;
        let mut grad = [0.0; 3];
        let mut axes = vec![0usize; self.n];
        for (idx, &wv) in self.w.iter().enumerate() {
            if wv != 0.0 {
                let mut rem = idx;
                for k in (0..self.n).rev() {
                    axes[k] = rem % 3;
                    rem /= 3;
                }
                let mut prod = wv;
                for k in 0..self.n {
                    if Some(k) != open {
                        prod *= vectors[k][axes[k]];
                    }
                }
                match open {
                    None => value += prod,
                    Some(k) => grad[axes[k]] += prod,
                }
            }
        }
        (value, grad)
    }
}

/// Bell expectation evaluated through the correlation tensor; agrees with
/// `expectation(rho, operator)` to round-off.
pub fn bell_value(tensor: &CorrelationTensor, family: BellFamily, s: &ObserverSettings) -> f64 {
    family
        .terms()
        .iter()
        .map(|(sign, choices)| {
            let vectors: Vec<[f64; 3]> = choices
                .iter()
                .enumerate()
                .map(|(k, &c)| s.vector(k, c))
                .collect();
            sign * tensor.contract(&vectors)
        })
        .sum()
}

/// Outcome of a multi-start settings optimization.
#[derive(Debug, Clone, Serialize)]
pub struct OptimizationReport {
    pub value: f64,
    pub settings: ObserverSettings,
    pub starts: usize,
    pub converged_fraction: f64,
}

fn mix_seed(seed: u64, index: u64) -> u64 {
    // splitmix64 over (seed, index) so start streams are independent and
    // nested: the first k starts are identical for any total count >= k.
    let mut z = seed ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

struct AscentOutcome {
    value: f64,
    vectors: Vec<[f64; 3]>,
    converged: bool,
}

fn ascend(
    tensor: &CorrelationTensor,
    terms: &[(f64, Vec<usize>)],
    mut vectors: Vec<[f64; 3]>,
) -> AscentOutcome {
    let n = tensor.n_parties();
    let eval = |vecs: &Vec<[f64; 3]>| -> f64 {
        terms
            .iter()
            .map(|(sign, choices)| {
                let tv: Vec<[f64; 3]> = choices
                    .iter()
                    .enumerate()
                    .map(|(k, &c)| vecs[2 * k + c])
                    .collect();
                sign * tensor.contract(&tv)
            })
            .sum()
    };
    let mut value = eval(&vectors);
    let mut converged = false;
    for _ in 0..500 {
        for party in 0..n {
            for choice in 0..2 {
                let mut g = [0.0f64; 3];
                for (sign, choices) in terms {
                    if choices[party] != choice {
                        continue;
                    }
                    let tv: Vec<[f64; 3]> = choices
                        .iter()
                        .enumerate()
                        .map(|(k, &c)| vectors[2 * k + c])
                        .collect();
                    let gr = tensor.gradient(&tv, party);
                    for (gi, gri) in g.iter_mut().zip(gr.iter()) {
                        *gi += sign * gri;
                    }
                }
                let norm = (g[0] * g[0] + g[1] * g[1] + g[2] * g[2]).sqrt();
                if norm > 1e-13 {
                    vectors[2 * party + choice] = [g[0] / norm, g[1] / norm, g[2] / norm];
                }
            }
        }
        let next = eval(&vectors);
        if next - value < 1e-12 {
            value = value.max(next);
            converged = true;
            break;
        }
        value = next;
    }
    AscentOutcome {
        value,
        vectors,
        converged,
    }
}

/// Maximize Tr(rho B_family) over all observer settings with `starts`
/// random restarts. Deterministic for a fixed seed and independent of the
/// number of worker threads; nested seeding makes the result monotone in
/// `starts`.
pub fn maximize_violation(
    rho: &DensityMatrix,
    family: BellFamily,
    starts: usize,
    seed: u64,
) -> Result<OptimizationReport> {
    let n = family.n_parties();
    let dim = 1usize << n;
    if rho.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: rho.dim(),
        });
    }
    let starts = starts.max(1);
    let tensor = CorrelationTensor::compute(rho);
    let terms = family.terms();

    let outcomes: Vec<AscentOutcome> = (0..starts)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, i as u64));
            let vectors: Vec<[f64; 3]> = (0..2 * n)
                .map(|_| {
                    let theta: f64 = rng.gen_range(0.0..std::f64::consts::PI);
                    let phi: f64 = rng.gen_range(0.0..2.0 * std::f64::consts::PI);
                    unit_vector(theta, phi)
                })
                .collect();
            ascend(&tensor, &terms, vectors)
        })
        .collect();

    let mut best = 0usize;
    for (i, o) in outcomes.iter().enumerate() {
        if o.value > outcomes[best].value {
            best = i;
        }
    }
    let best_value = outcomes[best].value;
    let near = outcomes
        .iter()
        .filter(|o| o.converged && o.value >= best_value - 1e-8)
        .count();
    let party_vectors: Vec<([f64; 3], [f64; 3])> = (0..n)
        .map(|k| (outcomes[best].vectors[2 * k], outcomes[best].vectors[2 * k + 1]))
        .collect();
    Ok(OptimizationReport {
        value: best_value,
        settings: ObserverSettings::from_vectors(&party_vectors),
        starts,
        converged_fraction: near as f64 / starts as f64,
    })
}

/// Default restart counts that saturate the closed-form oracles.
pub fn default_starts(family: BellFamily) -> usize {
    match family {
        BellFamily::Chsh | BellFamily::MabkN(2) => 50,
        BellFamily::Mermin | BellFamily::MabkN(3) => 200,
        _ => 500,
    }
}

/// Canonical CHSH settings reaching 2*sqrt(2) on |Phi+>.
pub fn canonical_chsh_settings() -> ObserverSettings {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    ObserverSettings::from_vectors(&[
        ([1.0, 0.0, 0.0], [0.0, 0.0, -1.0]),
        ([h, 0.0, -h], [h, 0.0, h]),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::{BasisSet, DensityMatrix};
    use approx::assert_abs_diff_eq;

    fn phi_plus() -> DensityMatrix {
        DensityMatrix::pure(BasisSet::bell(0.0).vector(0)).unwrap()
    }

    fn ghz(n: usize) -> DensityMatrix {
        DensityMatrix::pure(BasisSet::ghz(n).vector(0)).unwrap()
    }

    fn random_settings(n: usize, seed: u64) -> ObserverSettings {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let angles: Vec<((f64, f64), (f64, f64))> = (0..n)
            .map(|_| {
                let mut pair = || {
                    (
                        rng.gen_range(0.0..std::f64::consts::PI),
                        rng.gen_range(0.0..2.0 * std::f64::consts::PI),
                    )
                };
                (pair(), pair())
            })
            .collect();
        ObserverSettings::from_angles(&angles)
    }

    #[test]
    fn canonical_chsh_reaches_tsirelson() {
        let b = chsh_operator(&canonical_chsh_settings()).unwrap();
        let v = expectation(&phi_plus(), &b).unwrap();
        assert_abs_diff_eq!(v, 2.0 * std::f64::consts::SQRT_2, epsilon = 1e-12);
    }

    #[test]
    fn chsh_operator_traceless_and_squared_trace() {
        for seed in 0..20 {
            let b = chsh_operator(&random_settings(2, seed)).unwrap();
            assert!(b.trace().norm() < 1e-12);
            assert_abs_diff_eq!(b.trace_product(&b).re, 16.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn mermin_squared_trace_is_32() {
        for seed in 0..20 {
            let b = mermin_operator(&random_settings(3, seed)).unwrap();
            assert!(b.trace().norm() < 1e-12);
            assert_abs_diff_eq!(b.trace_product(&b).re, 32.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn mermin_all_x_y_on_ghz() {
        // a_j = x, b_j = y reaches the algebraic maximum 4 on GHZ
        let s = ObserverSettings::from_vectors(&[
            ([1.0, 0.0, 0.0], [0.0, 1.0, 0.0]),
            ([1.0, 0.0, 0.0], [0.0, 1.0, 0.0]),
            ([1.0, 0.0, 0.0], [0.0, 1.0, 0.0]),
        ]);
        let b = mermin_operator(&s).unwrap();
        assert_abs_diff_eq!(expectation(&ghz(3), &b).unwrap(), 4.0, epsilon = 1e-12);
    }

    #[test]
    fn identity_expectation_vanishes() {
        let s = random_settings(4, 7);
        let b = mabk_operator(&s).unwrap();
        let rho = DensityMatrix::maximally_mixed(16);
        assert_abs_diff_eq!(expectation(&rho, &b).unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn tensor_path_matches_operator_path() {
        for (family, n, seed) in [
            (BellFamily::Chsh, 2usize, 1u64),
            (BellFamily::Mermin, 3, 2),
            (BellFamily::Mabk4, 4, 3),
        ] {
            let rho = crate::testutil::random_density(1 << n, seed);
            let s = random_settings(n, seed + 100);
            let b = build_operator(family, &s);
            let direct = expectation(&rho, &b).unwrap();
            let tensor = CorrelationTensor::compute(&rho);
            assert_abs_diff_eq!(bell_value(&tensor, family, &s), direct, epsilon = 1e-10);
        }
    }

    #[test]
    fn optimizer_finds_tsirelson_on_phi_plus() {
        let rep = maximize_violation(&phi_plus(), BellFamily::Chsh, 50, 1234).unwrap();
        assert_abs_diff_eq!(rep.value, 2.0 * std::f64::consts::SQRT_2, epsilon = 1e-6);
    }

    #[test]
    fn optimizer_on_maximally_mixed_is_zero() {
        let rho = DensityMatrix::maximally_mixed(4);
        let rep = maximize_violation(&rho, BellFamily::Chsh, 10, 5).unwrap();
        assert_abs_diff_eq!(rep.value, 0.0, epsilon = 1e-8);
        assert_abs_diff_eq!(rep.converged_fraction, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn optimizer_ghz4_reaches_mabk_max() {
        let rep = maximize_violation(&ghz(4), BellFamily::Mabk4, 60, 99).unwrap();
        assert_abs_diff_eq!(rep.value, 4.0 * std::f64::consts::SQRT_2, epsilon = 1e-6);
    }

    #[test]
    fn product_state_stays_below_lvm_for_mabk() {
        let mut v = vec![C64::new(0.0, 0.0); 16];
        v[0] = C64::new(1.0, 0.0);
        let rho = DensityMatrix::pure(&v).unwrap();
        let rep = maximize_violation(&rho, BellFamily::Mabk4, 200, 31).unwrap();
        assert!(rep.value <= 4.0 + 1e-8, "product state exceeded LVM: {}", rep.value);
    }

    #[test]
    fn monotone_in_starts_with_nested_seeds() {
        let rho = crate::testutil::random_density(4, 42);
        let lo = maximize_violation(&rho, BellFamily::Chsh, 5, 7).unwrap();
        let hi = maximize_violation(&rho, BellFamily::Chsh, 25, 7).unwrap();
        assert!(hi.value >= lo.value - 1e-12);
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let rho = crate::testutil::random_density(8, 3);
        let a = maximize_violation(&rho, BellFamily::Mermin, 20, 11).unwrap();
        let b = maximize_violation(&rho, BellFamily::Mermin, 20, 11).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
    }

    #[test]
    fn global_z_rotation_leaves_maximum_unchanged() {
        let rho = crate::testutil::random_density(4, 17);
        let base = maximize_violation(&rho, BellFamily::Chsh, 30, 2).unwrap();
        // rotating every optimal vector about z must not change the value
        let ang: f64 = 0.813;
        let rot = |v: [f64; 3]| {
            [
                ang.cos() * v[0] - ang.sin() * v[1],
                ang.sin() * v[0] + ang.cos() * v[1],
                v[2],
            ]
        };
        let rotated = ObserverSettings::from_vectors(
            &base
                .settings
                .parties()
                .iter()
                .map(|p| (rot(p.a), rot(p.b)))
                .collect::<Vec<_>>(),
        );
        let tensor = CorrelationTensor::compute(&rho);
        let v = bell_value(&tensor, BellFamily::Chsh, &rotated);
        assert!(v <= base.value + 1e-6);
    }

    #[test]
    fn wrong_party_count_rejected() {
        assert!(matches!(
            chsh_operator(&random_settings(3, 0)),
            Err(Error::WrongPartyCount { .. })
        ));
    }
}
