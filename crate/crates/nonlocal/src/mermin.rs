//! Three-qubit results: the Mermin maximum for states diagonal in the GHZ
//! (Mermin) basis, the Werner-3 family and its mixedness frontier, PPT and
//! distillability classification, and a reproducible Monte Carlo survey
//! over the spectrum simplex.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::chsh::{csv_err, parse_f64, validate_simplex};
use crate::error::{Error, Result};
use crate::state::{partial_transpose, BasisSet, DensityMatrix};

/// Eigenvalue pairs (lambda_j^+, lambda_j^-), j = 0..3, of a state diagonal
/// in the three-qubit GHZ basis. Canonical form: the eight values sorted
/// decreasing, paired in sequence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MerminDiagonalSpectrum {
    pairs: [[f64; 2]; 4],
}

impl MerminDiagonalSpectrum {
    pub fn new(pairs: [[f64; 2]; 4]) -> Result<Self> {
        let mut flat = [0.0f64; 8];
        for (k, v) in pairs.iter().flatten().enumerate() {
            flat[k] = *v;
        }
        Self::from_values(flat)
    }

    /// Canonicalize eight eigenvalues: sort decreasing, then pair in order.
    pub fn from_values(mut values: [f64; 8]) -> Result<Self> {
        validate_simplex(&values)?;
        values.sort_by(|a, b| b.total_cmp(a));
        let mut pairs = [[0.0; 2]; 4];
        for j in 0..4 {
            pairs[j] = [values[2 * j], values[2 * j + 1]];
        }
        Ok(Self { pairs })
    }

    pub fn pairs(&self) -> [[f64; 2]; 4] {
        self.pairs
    }

    /// Pair differences d_j = lambda_j^+ - lambda_j^-.
    pub fn diffs(&self) -> [f64; 4] {
        self.pairs.map(|[p, m]| p - m)
    }

    /// Pair sums lambda_j^+ + lambda_j^-.
    pub fn sums(&self) -> [f64; 4] {
        self.pairs.map(|[p, m]| p + m)
    }

    /// Eigenvalues in GHZ-basis order (Psi_0^+, Psi_0^-, Psi_1^+, ...).
    pub fn interleaved(&self) -> [f64; 8] {
        let mut out = [0.0; 8];
        for j in 0..4 {
            out[2 * j] = self.pairs[j][0];
            out[2 * j + 1] = self.pairs[j][1];
        }
        out
    }

    /// The diagonal state in the computational basis.
    pub fn state(&self) -> DensityMatrix {
        DensityMatrix::from_diagonal_in_basis(&self.interleaved(), &BasisSet::ghz(3))
            .expect("validated spectrum yields a state")
    }

    pub fn participation_ratio(&self) -> f64 {
        1.0 / self.pairs.iter().flatten().map(|l| l * l).sum::<f64>()
    }
}

/// Upper bound on the Mermin maximum of a diagonal state:
/// 4 sqrt(sum_j (lambda_j^+ - lambda_j^-)^2).
pub fn mermin_bound_diagonal(spectrum: &MerminDiagonalSpectrum) -> f64 {
    4.0 * spectrum.diffs().iter().map(|d| d * d).sum::<f64>().sqrt()
}

/// Exact Mermin maximum of a diagonal state with the optimizing in-plane
/// measurement phases: party k measures along (cos t, sin t, 0) with
/// t = a_phases[k] or b_phases[k].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MerminAngles {
    pub a_phases: [f64; 3],
    pub b_phases: [f64; 3],
    pub value: f64,
}

impl MerminAngles {
    /// The phases as full observer settings for direct evaluation.
    pub fn settings(&self) -> crate::operators::ObserverSettings {
        let vec = |t: f64| [t.cos(), t.sin(), 0.0];
        crate::operators::ObserverSettings::from_vectors(&[
            (vec(self.a_phases[0]), vec(self.b_phases[0])),
            (vec(self.a_phases[1]), vec(self.b_phases[1])),
            (vec(self.a_phases[2]), vec(self.b_phases[2])),
        ])
    }
}

/// The diagonal Mermin expectation for in-plane phases. With the pair
/// differences d_j, each correlator on the pure state pair j is
/// +- cos(sum of signed phases), the sign of party k's phase being minus
/// when bit k of j is clear.
fn mermin_phase_objective(d: &[f64; 4], v: &[f64; 6]) -> f64 {
    // term t picks (a or b) phases per party: aaa, abb, bab, bba
    const PICKS: [[usize; 3]; 4] = [[0, 1, 2], [0, 4, 5], [3, 1, 5], [3, 4, 2]];
    const TERM_SIGN: [f64; 4] = [1.0, -1.0, -1.0, -1.0];
    let mut total = 0.0;
    for (j, &dj) in d.iter().enumerate() {
        if dj == 0.0 {
            continue;
        }
        let s2 = if j & 0b10 != 0 { -1.0 } else { 1.0 };
        let s3 = if j & 0b01 != 0 { -1.0 } else { 1.0 };
        for (pick, sign) in PICKS.iter().zip(TERM_SIGN) {
            // party 1's sign is always minus for j < 4; cosine is even
            let phase = v[pick[0]] + s2 * v[pick[1]] + s3 * v[pick[2]];
            total += dj * sign * phase.cos();
        }
    }
    total
}

/// Exact Mermin maximum of a diagonal state over all measurement settings.
///
/// z-components never contribute for GHZ-diagonal states, so the problem
/// reduces to six in-plane phases. The objective is a sinusoid in each
/// single phase, so coordinate ascent with the exact one-phase update
/// converges to a stationary point; a deterministic set of restarts makes
/// the best one the global maximum in practice. The result agrees with the
/// general-settings optimizer and never exceeds `mermin_bound_diagonal`.
pub fn solve_mermin_angles(spectrum: &MerminDiagonalSpectrum) -> MerminAngles {
    let d = spectrum.diffs();
    let tau = 2.0 * std::f64::consts::PI;
    let half_pi = std::f64::consts::FRAC_PI_2;
    let mut best_v = [0.0f64; 6];
    let mut best_value = f64::NEG_INFINITY;
    let mut rng = ChaCha8Rng::seed_from_u64(0x6d65726d);
    for start in 0..64 {
        let mut v = [0.0f64; 6];
        if start > 0 {
            for vi in &mut v {
                *vi = rng.gen_range(0.0..tau);
            }
        }
        let mut prev = f64::NEG_INFINITY;
        for _ in 0..500 {
            for i in 0..6 {
                // along one phase the objective is a*cos + b*sin + const
                let probe = |t: f64, v: &mut [f64; 6]| {
                    v[i] = t;
                    mermin_phase_objective(&d, v)
                };
                let f0 = probe(0.0, &mut v);
                let fq = probe(half_pi, &mut v);
                let fh = probe(std::f64::consts::PI, &mut v);
                let f3q = probe(3.0 * half_pi, &mut v);
                let a = 0.5 * (f0 - fh);
                let b = 0.5 * (fq - f3q);
                v[i] = if a.abs() + b.abs() > 1e-15 {
                    b.atan2(a)
                } else {
                    0.0
                };
            }
            let value = mermin_phase_objective(&d, &v);
            if (value - prev).abs() < 1e-13 {
                break;
            }
            prev = value;
        }
        let value = mermin_phase_objective(&d, &v);
        if value > best_value {
            best_value = value;
            best_v = v;
        }
    }
    debug_assert!(best_value <= mermin_bound_diagonal(spectrum) + 1e-10);
    MerminAngles {
        a_phases: [best_v[0], best_v[1], best_v[2]],
        b_phases: [best_v[3], best_v[4], best_v[5]],
        value: best_value,
    }
}

/// Three-qubit Werner state x |GHZ><GHZ| + (1 - x)/8 identity.
pub fn werner3(x: f64) -> Result<DensityMatrix> {
    let spectrum = werner3_spectrum(x)?;
    Ok(spectrum.state())
}

/// The GHZ-diagonal spectrum of the three-qubit Werner state.
pub fn werner3_spectrum(x: f64) -> Result<MerminDiagonalSpectrum> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::OutOfRange {
            what: "Werner weight x",
            value: x,
            lo: 0.0,
            hi: 1.0,
        });
    }
    let rest = (1.0 - x) / 8.0;
    let mut values = [rest; 8];
    values[0] += x;
    MerminDiagonalSpectrum::from_values(values)
}

/// Maximum Mermin value at fixed participation ratio R = 1/Tr(rho^2):
/// 4 sqrt((8 - R)/(7R)), normalized so that pure states (R = 1) give 4.
#[allow(non_snake_case)] // R is the standard symbol for the participation ratio
pub fn mermin_frontier_R(r: f64) -> Result<f64> {
    if !(1.0..=8.0).contains(&r) {
        return Err(Error::OutOfRange {
            what: "participation ratio R",
            value: r,
            lo: 1.0,
            hi: 8.0,
        });
    }
    Ok(4.0 * ((8.0 - r) / (7.0 * r)).max(0.0).sqrt())
}

/// The two critical participation ratios: R1 = 32/11 where the frontier
/// crosses the classical bound 2, and R2 = 25/4, the mixedness of the
/// Werner-3 state at its separability threshold x = 1/5.
pub fn critical_ratios() -> (f64, f64) {
    (32.0 / 11.0, 25.0 / 4.0)
}

const PSD_TOL: f64 = 1e-10;

/// Positivity of the partial transposes on the three one-versus-rest cuts,
/// decided from the spectrum alone. Under the cut transposes, GHZ-basis
/// pairs couple as p <-> p XOR m with m = 3, 2, 1 for parties 1, 2, 3, and
/// the transposed blocks have eigenvalues (s_p +- d_{p XOR m}) / 2.
pub fn ppt_flags(spectrum: &MerminDiagonalSpectrum) -> [bool; 3] {
    let s = spectrum.sums();
    let d = spectrum.diffs();
    [3usize, 2, 1].map(|m| (0..4).all(|p| s[p] - d[p ^ m] >= -2.0 * PSD_TOL))
}

/// The same three flags from explicit partial transposition and
/// eigensolves; the spectral shortcut must agree with this path.
pub fn ppt_flags_explicit(spectrum: &MerminDiagonalSpectrum) -> [bool; 3] {
    let rho = spectrum.state();
    [0usize, 1, 2].map(|party| {
        let pt = partial_transpose(&rho, party).expect("valid party index");
        let min = pt
            .eigenvalues_hermitian()
            .last()
            .copied()
            .expect("nonempty spectrum");
        min >= -PSD_TOL
    })
}

/// Joint distillability/nonlocality category.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Category {
    DistillableLocal,
    DistillableNonlocal,
    BoundLocal,
    BoundNonlocal,
}

impl Category {
    pub const ALL: [Category; 4] = [
        Category::DistillableLocal,
        Category::DistillableNonlocal,
        Category::BoundLocal,
        Category::BoundNonlocal,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            Category::DistillableLocal => "distillable_local",
            Category::DistillableNonlocal => "distillable_nonlocal",
            Category::BoundLocal => "bound_local",
            Category::BoundNonlocal => "bound_nonlocal",
        }
    }

    pub fn from_label(s: &str) -> Result<Self> {
        Category::ALL
            .into_iter()
            .find(|c| c.label() == s)
            .ok_or_else(|| Error::Parse(format!("unknown category {s:?}")))
    }

    pub fn index(&self) -> usize {
        Category::ALL.iter().position(|c| c == self).unwrap()
    }
}

/// Distillability and nonlocality classification of a GHZ-diagonal state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DistillabilityReport {
    /// partial transpose positive on cuts 1, 2, 3
    pub ppt_flags: [bool; 3],
    /// GHZ-distillable: negative partial transpose on every cut
    pub distillable: bool,
    /// the Mermin bound used for the nonlocality call
    pub mermin_value: f64,
    pub category: Category,
}

/// Classify a spectrum. A state is called distillable when all three cuts
/// are NPT, and nonlocal when the Mermin bound exceeds 2. The combination
/// bound-entangled + nonlocal never occurs for GHZ-diagonal states.
pub fn classify(spectrum: &MerminDiagonalSpectrum) -> DistillabilityReport {
    let flags = ppt_flags(spectrum);
    let distillable = flags.iter().all(|f| !f);
    let mermin_value = mermin_bound_diagonal(spectrum);
    let nonlocal = mermin_value > 2.0;
    let category = match (distillable, nonlocal) {
        (true, false) => Category::DistillableLocal,
        (true, true) => Category::DistillableNonlocal,
        (false, false) => Category::BoundLocal,
        (false, true) => Category::BoundNonlocal,
    };
    debug_assert!(
        category != Category::BoundNonlocal,
        "a PPT cut is incompatible with a Mermin bound above 2"
    );
    DistillabilityReport {
        ppt_flags: flags,
        distillable,
        mermin_value,
        category,
    }
}

/// A point uniform on the (dim-1)-simplex: unit-exponential draws
/// normalized by their sum.
pub fn sample_simplex<R: Rng>(dim: usize, rng: &mut R) -> Vec<f64> {
    assert!(dim >= 2);
    let mut draws: Vec<f64> = (0..dim)
        .map(|_| -rng.gen_range(f64::MIN_POSITIVE..1.0).ln())
        .collect();
    let total: f64 = draws.iter().sum();
    for d in &mut draws {
        *d /= total;
    }
    draws
}

/// One histogram bin of Mermin-bound values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HistogramBin {
    pub lo: f64,
    pub hi: f64,
    pub density: f64,
}

/// Aggregate result of the Monte Carlo survey.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SurveyStats {
    pub n_samples: u64,
    pub seed: u64,
    pub category_counts: [u64; 4],
    pub category_probs: [f64; 4],
    pub histogram: Vec<HistogramBin>,
}

const SURVEY_CHUNK: u64 = 1 << 16;

fn mix_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Clone)]
struct ChunkTally {
    categories: [u64; 4],
    bins: Vec<u64>,
}

impl ChunkTally {
    fn zero(bins: usize) -> Self {
        Self {
            categories: [0; 4],
            bins: vec![0; bins],
        }
    }

    fn merge(mut self, other: Self) -> Self {
        for (a, b) in self.categories.iter_mut().zip(other.categories) {
            *a += b;
        }
        for (a, b) in self.bins.iter_mut().zip(other.bins) {
            *a += b;
        }
        self
    }
}

fn survey_chunk(seed: u64, chunk_idx: u64, count: u64, bins: usize) -> ChunkTally {
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, chunk_idx));
    let mut tally = ChunkTally::zero(bins);
    for _ in 0..count {
        let draw = sample_simplex(8, &mut rng);
        let mut values = [0.0f64; 8];
        values.copy_from_slice(&draw);
        let spectrum =
            MerminDiagonalSpectrum::from_values(values).expect("simplex sample is a spectrum");
        let report = classify(&spectrum);
        tally.categories[report.category.index()] += 1;
        // values live in [0, 4]
        let bin = ((report.mermin_value / 4.0 * bins as f64) as usize).min(bins - 1);
        tally.bins[bin] += 1;
    }
    tally
}

/// Monte Carlo survey over uniform GHZ-diagonal spectra: category
/// probabilities and the distribution of the Mermin bound. The sample
/// stream is split into fixed-size chunks with independently seeded RNGs
/// and merged associatively, so the result is identical for any worker
/// count and bit-reproducible for a fixed (n, seed).
pub fn survey(n: u64, seed: u64, bins: usize) -> SurveyStats {
    assert!(n >= 1 && bins >= 1);
    let n_chunks = n.div_ceil(SURVEY_CHUNK);
    let tally = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let count = SURVEY_CHUNK.min(n - c * SURVEY_CHUNK);
            survey_chunk(seed, c, count, bins)
        })
        .reduce(|| ChunkTally::zero(bins), ChunkTally::merge);
    let width = 4.0 / bins as f64;
    let histogram = tally
        .bins
        .iter()
        .enumerate()
        .map(|(k, &count)| HistogramBin {
            lo: k as f64 * width,
            hi: (k + 1) as f64 * width,
            density: count as f64 / (n as f64 * width),
        })
        .collect();
    SurveyStats {
        n_samples: n,
        seed,
        category_counts: tally.categories,
        category_probs: tally.categories.map(|c| c as f64 / n as f64),
        histogram,
    }
}

/// Write category counts and probabilities as CSV.
pub fn write_categories_csv<W: std::io::Write>(stats: &SurveyStats, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["category", "count", "probability"])
        .map_err(csv_err)?;
    for (cat, (&count, &prob)) in Category::ALL.iter().zip(
        stats
            .category_counts
            .iter()
            .zip(stats.category_probs.iter()),
    ) {
        w.write_record([
            cat.label().to_string(),
            count.to_string(),
            format!("{prob:.9}"),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Read back the categories CSV as (category, count, probability) rows.
pub fn read_categories_csv<R: std::io::Read>(input: R) -> Result<Vec<(Category, u64, f64)>> {
    let mut r = csv::Reader::from_reader(input);
    let headers = r.headers().map_err(csv_err)?.clone();
    if headers.iter().collect::<Vec<_>>() != ["category", "count", "probability"] {
        return Err(Error::SchemaMismatch {
            details: format!("expected category,count,probability, found {headers:?}"),
        });
    }
    let mut rows = Vec::new();
    for record in r.records() {
        let record = record.map_err(csv_err)?;
        let field = |i: usize| record.get(i).unwrap_or("");
        rows.push((
            Category::from_label(field(0))?,
            field(1)
                .parse()
                .map_err(|_| Error::Parse(format!("bad count {:?}", field(1))))?,
            parse_f64(field(2))?,
        ));
    }
    Ok(rows)
}

/// Write the Mermin-bound histogram as CSV.
pub fn write_histogram_csv<W: std::io::Write>(stats: &SurveyStats, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["bin_lo", "bin_hi", "density"]).map_err(csv_err)?;
    for bin in &stats.histogram {
        w.write_record([
            format!("{:.9}", bin.lo),
            format!("{:.9}", bin.hi),
            format!("{:.9}", bin.density),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Read back the histogram CSV.
pub fn read_histogram_csv<R: std::io::Read>(input: R) -> Result<Vec<HistogramBin>> {
    let mut r = csv::Reader::from_reader(input);
    let headers = r.headers().map_err(csv_err)?.clone();
    if headers.iter().collect::<Vec<_>>() != ["bin_lo", "bin_hi", "density"] {
        return Err(Error::SchemaMismatch {
            details: format!("expected bin_lo,bin_hi,density, found {headers:?}"),
        });
    }
    let mut bins = Vec::new();
    for record in r.records() {
        let record = record.map_err(csv_err)?;
        let field = |i: usize| record.get(i).unwrap_or("");
        bins.push(HistogramBin {
            lo: parse_f64(field(0))?,
            hi: parse_f64(field(1))?,
            density: parse_f64(field(2))?,
        });
    }
    Ok(bins)
}

/// The GHZ state of three qubits as a density matrix.
pub fn ghz3() -> DensityMatrix {
    DensityMatrix::pure(BasisSet::ghz(3).vector(0)).expect("GHZ is a state")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{maximize_violation, BellFamily};
    use crate::state::mixedness;
    use approx::assert_abs_diff_eq;

    fn ghz_spectrum() -> MerminDiagonalSpectrum {
        MerminDiagonalSpectrum::from_values([1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]).unwrap()
    }

    fn random_spectrum(seed: u64) -> MerminDiagonalSpectrum {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let draw = sample_simplex(8, &mut rng);
        let mut values = [0.0; 8];
        values.copy_from_slice(&draw);
        MerminDiagonalSpectrum::from_values(values).unwrap()
    }

    #[test]
    fn bound_examples() {
        assert_abs_diff_eq!(mermin_bound_diagonal(&ghz_spectrum()), 4.0, epsilon = 1e-15);
        let uniform = MerminDiagonalSpectrum::from_values([0.125; 8]).unwrap();
        assert_abs_diff_eq!(mermin_bound_diagonal(&uniform), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(
            mermin_bound_diagonal(&werner3_spectrum(0.5).unwrap()),
            2.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn canonical_sorting() {
        let spectrum =
            MerminDiagonalSpectrum::from_values([0.05, 0.3, 0.1, 0.2, 0.15, 0.1, 0.05, 0.05])
                .unwrap();
        let flat = spectrum.interleaved();
        for w in flat.windows(2) {
            assert!(w[0] >= w[1]);
        }
    }

    #[test]
    fn angle_solve_examples() {
        let sol = solve_mermin_angles(&ghz_spectrum());
        assert_abs_diff_eq!(sol.value, 4.0, epsilon = 1e-10);
        // the reported phases must realize the reported value
        let tensor = crate::operators::CorrelationTensor::compute(&ghz_spectrum().state());
        let realized = crate::operators::bell_value(&tensor, BellFamily::Mermin, &sol.settings());
        assert_abs_diff_eq!(realized, sol.value, epsilon = 1e-9);

        // equal pair differences: the solve meets the bound exactly
        let symmetric =
            MerminDiagonalSpectrum::from_values([0.2, 0.05, 0.2, 0.05, 0.2, 0.05, 0.2, 0.05])
                .unwrap();
        assert_abs_diff_eq!(
            solve_mermin_angles(&symmetric).value,
            mermin_bound_diagonal(&symmetric),
            epsilon = 1e-10
        );
    }

    #[test]
    fn angle_solve_below_bound_with_small_gap() {
        for seed in 0..100 {
            let spectrum = random_spectrum(seed);
            let sol = solve_mermin_angles(&spectrum);
            let bound = mermin_bound_diagonal(&spectrum);
            assert!(sol.value <= bound + 1e-10);
            if bound > 1e-6 {
                assert!(
                    (bound - sol.value) / bound < 0.05,
                    "gap too large at seed {seed}: {} vs {bound}",
                    sol.value
                );
            }
        }
    }

    #[test]
    fn angle_solve_matches_full_optimizer() {
        for seed in 0..12 {
            let spectrum = random_spectrum(100 + seed);
            let sol = solve_mermin_angles(&spectrum);
            let rep =
                maximize_violation(&spectrum.state(), BellFamily::Mermin, 60, seed).unwrap();
            assert_abs_diff_eq!(rep.value, sol.value, epsilon = 1e-6);
        }
    }

    #[test]
    fn werner3_examples() {
        let pure = werner3(1.0).unwrap();
        assert_abs_diff_eq!(mixedness(&pure).participation_ratio, 1.0, epsilon = 1e-9);
        assert!(pure.matrix().sub(ghz3().matrix()).max_abs() < 1e-12);

        let mixed = werner3(0.0).unwrap();
        assert_abs_diff_eq!(mixedness(&mixed).participation_ratio, 8.0, epsilon = 1e-9);

        let half = werner3_spectrum(0.5).unwrap();
        assert_abs_diff_eq!(half.participation_ratio(), 32.0 / 11.0, epsilon = 1e-12);
    }

    #[test]
    fn frontier_examples() {
        assert_abs_diff_eq!(mermin_frontier_R(1.0).unwrap(), 4.0, epsilon = 1e-12);
        assert_abs_diff_eq!(mermin_frontier_R(32.0 / 11.0).unwrap(), 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(mermin_frontier_R(8.0).unwrap(), 0.0, epsilon = 1e-12);
        assert!(mermin_frontier_R(0.5).is_err());
    }

    #[test]
    fn werner3_sits_on_frontier() {
        for k in 1..=9 {
            let x = 0.1 * k as f64;
            let spectrum = werner3_spectrum(x).unwrap();
            let bound = mermin_bound_diagonal(&spectrum);
            let frontier = mermin_frontier_R(spectrum.participation_ratio()).unwrap();
            assert_abs_diff_eq!(bound, frontier, epsilon = 1e-9);
        }
    }

    #[test]
    fn critical_ratio_checks() {
        let (r1, r2) = critical_ratios();
        assert_abs_diff_eq!(mermin_frontier_R(r1).unwrap(), 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r2, 6.25, epsilon = 1e-15);
        let rho = werner3(0.2).unwrap();
        assert_abs_diff_eq!(mixedness(&rho).participation_ratio, 6.25, epsilon = 1e-12);
    }

    #[test]
    fn ppt_examples() {
        assert_eq!(ppt_flags(&ghz_spectrum()), [false, false, false]);
        let uniform = MerminDiagonalSpectrum::from_values([0.125; 8]).unwrap();
        assert_eq!(ppt_flags(&uniform), [true, true, true]);
    }

    #[test]
    fn ppt_inequality_matches_explicit_transpose() {
        for seed in 0..200 {
            let spectrum = random_spectrum(500 + seed);
            assert_eq!(
                ppt_flags(&spectrum),
                ppt_flags_explicit(&spectrum),
                "paths disagree at seed {seed}"
            );
        }
    }

    #[test]
    fn classify_examples() {
        assert_eq!(classify(&ghz_spectrum()).category, Category::DistillableNonlocal);
        let uniform = MerminDiagonalSpectrum::from_values([0.125; 8]).unwrap();
        assert_eq!(classify(&uniform).category, Category::BoundLocal);
        let strong = classify(&werner3_spectrum(0.9).unwrap());
        assert_eq!(strong.category, Category::DistillableNonlocal);
        assert_abs_diff_eq!(strong.mermin_value, 3.6, epsilon = 1e-12);
    }

    #[test]
    fn simplex_sampler_statistics() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut mean = [0.0f64; 8];
        let n = 20_000;
        for _ in 0..n {
            let p = sample_simplex(8, &mut rng);
            assert_abs_diff_eq!(p.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
            for (m, v) in mean.iter_mut().zip(p.iter()) {
                *m += v;
            }
        }
        for m in mean {
            assert_abs_diff_eq!(m / n as f64, 0.125, epsilon = 0.004);
        }
    }

    #[test]
    fn survey_reproducible_and_sane() {
        let a = survey(50_000, 42, 50);
        let b = survey(50_000, 42, 50);
        assert_eq!(a, b);
        assert_eq!(a.category_counts.iter().sum::<u64>(), 50_000);
        assert_eq!(a.category_counts[3], 0, "bound_nonlocal must be empty");
        let integral: f64 = a.histogram.iter().map(|b| b.density * (b.hi - b.lo)).sum();
        assert_abs_diff_eq!(integral, 1.0, epsilon = 1e-9);
        // single-threaded reference must agree with the parallel run
        let serial = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| survey(50_000, 42, 50));
        assert_eq!(a, serial);
    }

    #[test]
    fn survey_csv_round_trip() {
        let stats = survey(10_000, 3, 20);
        let mut buf = Vec::new();
        write_categories_csv(&stats, &mut buf).unwrap();
        let rows = read_categories_csv(buf.as_slice()).unwrap();
        assert_eq!(rows.len(), 4);
        for ((cat, count, _), expect) in rows.iter().zip(Category::ALL.iter()) {
            assert_eq!(cat, expect);
            assert_eq!(*count, stats.category_counts[expect.index()]);
        }
        let mut buf = Vec::new();
        write_histogram_csv(&stats, &mut buf).unwrap();
        let bins = read_histogram_csv(buf.as_slice()).unwrap();
        assert_eq!(bins.len(), stats.histogram.len());
    }

    #[test]
    fn frontier_dominates_random_spectra() {
        for seed in 0..200 {
            let spectrum = random_spectrum(900 + seed);
            let bound = mermin_bound_diagonal(&spectrum);
            let frontier = mermin_frontier_R(spectrum.participation_ratio()).unwrap();
            assert!(bound <= frontier + 1e-6);
        }
    }
}
