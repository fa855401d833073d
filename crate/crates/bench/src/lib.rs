//! Workloads shared by the criterion benches.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use cnc_core::{GaloisField, Gf, Poly, PolyMatrix};

pub fn random_poly(f: &GaloisField, degree: usize, rng: &mut ChaCha8Rng) -> Poly {
    Poly::from_coeffs((0..=degree).map(|_| f.random(rng)).collect())
}

/// Square matrix of random polynomials of the given degree.
pub fn random_matrix(f: &GaloisField, n: usize, degree: usize, seed: u64) -> PolyMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = (0..n).map(|_| (0..n).map(|_| random_poly(f, degree, &mut rng)).collect()).collect();
    PolyMatrix::from_rows(rows).expect("rows have equal length")
}

pub fn random_inputs(f: &GaloisField, dim: usize, steps: usize, seed: u64) -> Vec<Vec<Gf>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..steps).map(|_| (0..dim).map(|_| f.random(&mut rng)).collect()).collect()
}

