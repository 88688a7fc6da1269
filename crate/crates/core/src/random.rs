//! Seeded sampling of unitaries, states and operators.
//!
//! All samplers draw from ChaCha8 (`rand_chacha::ChaCha8Rng`) seeded with
//! `seed_from_u64`, and complex Gaussians as `(a + i b)/√2` with `a, b`
//! standard normal. Given a seed the output is bit-identical across runs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::operator::{CMatrix, DensityMatrix, HermitianOperator, LinearMap, C64};

pub type SeededRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub(crate) fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// `rows × cols` matrix of i.i.d. complex Gaussians (Ginibre ensemble).
pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    let mut m = CMatrix::zeros(rows, cols);
    // fill row by row so the draw order is independent of storage layout
    for i in 0..rows {
        for j in 0..cols {
            m[(i, j)] = complex_gaussian(rng);
        }
    }
    m
}

/// Haar-random unitary: QR of a Ginibre matrix with the phases of `R`'s
/// diagonal absorbed into `Q`.
pub fn random_unitary_with<R: Rng + ?Sized>(d: usize, rng: &mut R) -> LinearMap {
    let g = ginibre(d, d, rng);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..d {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 { rjj / rjj.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..d {
            q[(i, j)] *= phase;
        }
    }
    LinearMap::new(q)
}

pub fn random_unitary(d: usize, seed: u64) -> LinearMap {
    random_unitary_with(d, &mut seeded_rng(seed))
}

/// Uniformly random unit vector, returned as a `d × 1` map.
pub fn random_pure_state_with<R: Rng + ?Sized>(d: usize, rng: &mut R) -> LinearMap {
    loop {
        let v = ginibre(d, 1, rng);
        let n = v.norm();
        if n > 1e-12 {
            return LinearMap::new(v / C64::new(n, 0.0));
        }
    }
}

pub fn random_pure_state(d: usize, seed: u64) -> LinearMap {
    random_pure_state_with(d, &mut seeded_rng(seed))
}

/// Hilbert–Schmidt random density matrix `G G† / Tr[G G†]`.
pub fn random_density_with<R: Rng + ?Sized>(d: usize, rng: &mut R) -> DensityMatrix {
    let g = ginibre(d, d, rng);
    let w = HermitianOperator::symmetrized(&g * g.adjoint());
    let tr = w.trace();
    DensityMatrix::new(w.scale(1.0 / tr)).expect("Wishart matrix is a valid state")
}

pub fn random_density(d: usize, seed: u64) -> DensityMatrix {
    random_density_with(d, &mut seeded_rng(seed))
}

/// Random probability vector, uniform on the simplex.
pub fn random_distribution<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    let e: Vec<f64> = (0..n)
        .map(|_| {
            let u: f64 = rand::RngExt::random(rng);
            -(1.0 - u).ln()
        })
        .collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|x| x / s).collect()
}
