//! Reproducible random states for tests and cross-checks.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::matrix::{ComplexMatrix, C64};
use crate::state::DensityMatrix;

/// Random full-rank density matrix rho = G G^dag / Tr(G G^dag) with G a
/// complex Ginibre matrix seeded deterministically.
pub fn random_density(dim: usize, seed: u64) -> DensityMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gauss = |rng: &mut ChaCha8Rng| {
        // Box-Muller
        let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
        let u2: f64 = rng.gen_range(0.0..1.0);
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    };
    let g = ComplexMatrix::from_fn(dim, |_, _| C64::new(gauss(&mut rng), gauss(&mut rng)));
    let gg = g.mul(&g.adjoint());
    let t = gg.trace().re;
    DensityMatrix::new(gg.scale(C64::new(1.0 / t, 0.0))).expect("Ginibre state is valid")
}

/// Random normalized pure state vector.
pub fn random_pure(dim: usize, seed: u64) -> Vec<C64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<C64> = (0..dim)
        .map(|_| {
            C64::new(
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            )
        })
        .collect();
    let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for z in &mut v {
        *z /= n;
    }
    v
}
