//! Seeded random states for tests, sweeps and the CLI.
//!
//! All generators take an explicit `Rng`; callers that need reproducible
//! output seed a [`rand_chacha::ChaCha8Rng`] (see [`seeded`]).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::linalg::{
    c, identity, kron, symmetric_projector, tensor_product, ComplexMatrix, DensityMatrix,
    SystemLayout, C64,
};

/// Deterministic generator used throughout the crate.
pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    c(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// `n × m` matrix of i.i.d. standard complex Gaussians.
pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| gaussian(rng))
}

/// Haar-random pure state vector.
pub fn random_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<C64> {
    let v: Vec<C64> = (0..n).map(|_| gaussian(rng)).collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / norm).collect()
}

/// Full-rank random state `G G† / tr(G G†)` (Hilbert-Schmidt measure).
pub fn random_density<R: Rng + ?Sized>(layout: SystemLayout, rng: &mut R) -> DensityMatrix {
    let n = layout.total_dim();
    let g = ginibre(n, n, rng);
    DensityMatrix::from_unnormalized(layout, &g * g.adjoint()).expect("Ginibre product is a state")
}

/// Haar-random pure state.
pub fn random_pure<R: Rng + ?Sized>(layout: SystemLayout, rng: &mut R) -> DensityMatrix {
    let v = random_vector(layout.total_dim(), rng);
    DensityMatrix::pure(layout, &v).expect("normalized vector")
}

/// Haar-random unitary via QR of a Ginibre matrix with phase fix.
pub fn random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexMatrix {
    let qr = ginibre(n, n, rng).qr();
    let (q, r) = qr.unpack();
    let phases = ComplexMatrix::from_fn(n, n, |i, j| {
        if i == j {
            let z = r[(i, i)];
            if z.norm() > 0.0 {
                z / z.norm()
            } else {
                c(1.0, 0.0)
            }
        } else {
            c(0.0, 0.0)
        }
    });
    q * phases
}

/// Random state on `C^{lead} ⊗ (C^d)^{⊗k}` whose support on the trailing
/// `k` factors lies in the symmetric subspace. With `lead = 1` the leading
/// factor is omitted from the layout.
pub fn random_symmetric_supported<R: Rng + ?Sized>(
    lead: usize,
    d: usize,
    k: usize,
    rng: &mut R,
) -> Result<DensityMatrix> {
    let proj = kron(&identity(lead), &symmetric_projector(d, k)?);
    let n = proj.nrows();
    let g = ginibre(n, n, rng);
    let m = &proj * &g * g.adjoint() * &proj;
    let layout = if lead == 1 {
        SystemLayout::new(vec![d; k])?
    } else {
        SystemLayout::extension(lead, d, k)?
    };
    DensityMatrix::from_unnormalized(layout, crate::linalg::hermitian_part(&m))
}

/// Random convex mixture of `terms` product states `ρ_A ⊗ ρ_B`.
pub fn random_separable<R: Rng + ?Sized>(
    d_a: usize,
    d_b: usize,
    terms: usize,
    rng: &mut R,
) -> Result<DensityMatrix> {
    let la = SystemLayout::new(vec![d_a])?;
    let lb = SystemLayout::new(vec![d_b])?;
    let states: Vec<DensityMatrix> = (0..terms.max(1))
        .map(|_| tensor_product(&random_density(la.clone(), rng), &random_density(lb.clone(), rng)))
        .collect();
    let raw: Vec<f64> = states.iter().map(|_| rng.random::<f64>() + 1e-3).collect();
    let total: f64 = raw.iter().sum();
    let weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
    DensityMatrix::mixture(&weights, &states)
}
