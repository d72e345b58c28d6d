//! Numerical feasibility oracle for k-symmetric and k-bosonic extensions.
//!
//! The extension set is the intersection of the PSD cone with the affine set
//! of permutation-invariant operators whose `A B_1` marginal is `ρ_AB`. The
//! oracle runs Dykstra's alternating projections between the two, after
//! restricting the search to the face of the cone that can carry an
//! extension at all (directions forced to zero by the kernel of `ρ_AB`).
//! Without that reduction the iteration stalls on rank-deficient marginals,
//! where the two sets only touch.

use serde::Serialize;

use crate::criteria::{ExtensionProblem, Flavor};
use crate::error::{Error, Result};
use crate::linalg::{
    binomial, c, frobenius, guard_factor_space, hermitian_eigh, hermitian_part, identity, kron,
    low_eigenspace, max_abs_diff, min_eigenvalue, spectral_map, symmetric_isometry, ComplexMatrix,
    DensityMatrix, Permutation, SystemLayout,
};

/// Relative gap change below which the gap counts as stabilized.
const STABILIZATION_TOL: f64 = 1e-9;
/// Iterations between the two gap readings compared for stabilization.
const STABILIZATION_WINDOW: usize = 50;
/// Eigenvalues of `ρ_AB` below this span its kernel.
const KERNEL_TOL: f64 = 1e-10;
/// Eigenvalues of the forced-zero operator below this span the face.
const FACE_TOL: f64 = 1e-9;
/// Relative cutoff for the pseudo-inverse of the marginal Gram map.
const PINV_RCOND: f64 = 1e-10;
/// The affine set counts as empty when its best marginal misses by more.
const AFFINE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleConfig {
    /// Declare feasible once the inter-set gap falls to this.
    pub tol_feasible: f64,
    /// A stabilized gap at or above this is declared infeasible.
    pub tol_gap: f64,
    pub max_iters: usize,
    /// Largest side length of the iterate.
    pub dim_limit: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            tol_feasible: 1e-7,
            tol_gap: 1e-6,
            max_iters: 5000,
            dim_limit: 256,
        }
    }
}

impl OracleConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol_feasible > 0.0 && self.tol_gap > 0.0 && self.max_iters > 0 && self.dim_limit > 0) {
            return Err(Error::InvalidParameter("oracle settings must be positive".into()));
        }
        if self.tol_feasible >= self.tol_gap {
            return Err(Error::InvalidParameter(format!(
                "tol_feasible ({}) must be below tol_gap ({})",
                self.tol_feasible, self.tol_gap
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum OracleStatus {
    Feasible,
    Infeasible,
    Undecided,
}

/// State of the final iterate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Certificate {
    /// Frobenius distance of the affine iterate's marginal from `ρ_AB`.
    pub marginal_residual: f64,
    /// Smallest eigenvalue of the affine iterate; absent when no iteration ran.
    pub min_eigenvalue: Option<f64>,
    /// Last Frobenius distance between the cone and affine iterates.
    pub gap: f64,
    /// Dimension of the face the search ran in.
    pub reduced_dim: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleResult {
    pub status: OracleStatus,
    pub residual: f64,
    pub iterations: usize,
    pub certificate: Certificate,
}

/// Nearest PSD matrix in Frobenius norm (negative eigenvalues clipped).
pub fn project_psd(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    spectral_map(m, |x| x.max(0.0)).map(|p| hermitian_part(&p))
}

fn extension_dims(layout: &SystemLayout) -> Result<(usize, usize, usize)> {
    let dims = layout.dims();
    if dims.len() < 2 {
        return Err(Error::Layout(format!("expected [d_A, d_B, ..], got {dims:?}")));
    }
    let d = dims[1];
    if dims[2..].iter().any(|&x| x != d) {
        return Err(Error::Layout(format!("B factors must share a dimension, got {dims:?}")));
    }
    Ok((dims[0], d, dims.len() - 1))
}

/// Basis maps of `I_A ⊗ W_π` for every `π ∈ S_k`.
struct PermutationGroup {
    maps: Vec<Vec<usize>>,
}

impl PermutationGroup {
    fn new(d_a: usize, d: usize, k: usize) -> Result<Self> {
        let block = guard_factor_space(d, k)?;
        let maps = Permutation::all(k)
            .map(|perm| {
                let local = perm.basis_map(d);
                (0..d_a * block)
                    .map(|i| (i / block) * block + local[i % block])
                    .collect()
            })
            .collect();
        Ok(Self { maps })
    }

    /// `(1/k!) Σ_π W_π X W_π†`.
    fn average(&self, x: &ComplexMatrix) -> ComplexMatrix {
        let n = x.nrows();
        let mut out = ComplexMatrix::zeros(n, n);
        for map in &self.maps {
            for j in 0..n {
                let mj = map[j];
                for i in 0..n {
                    out[(map[i], mj)] += x[(i, j)];
                }
            }
        }
        out / c(self.maps.len() as f64, 0.0)
    }
}

/// Group average of `(I_A ⊗ W_π) X (I_A ⊗ W_π)†` over all permutations of the
/// B factors of `layout = [d_A, d_B, .., d_B]`.
pub fn project_permutation_invariant(x: &ComplexMatrix, layout: &SystemLayout) -> Result<ComplexMatrix> {
    let (d_a, d, k) = extension_dims(layout)?;
    if x.nrows() != layout.total_dim() || x.ncols() != x.nrows() {
        return Err(Error::DimensionMismatch {
            expected: layout.total_dim(),
            got: x.nrows(),
        });
    }
    Ok(PermutationGroup::new(d_a, d, k)?.average(x))
}

/// `Tr` over the trailing `rest`-dimensional tensor factor.
fn trace_tail(x: &ComplexMatrix, rest: usize) -> ComplexMatrix {
    let head = x.nrows() / rest;
    ComplexMatrix::from_fn(head, head, |i, j| {
        (0..rest).map(|r| x[(i * rest + r, j * rest + r)]).sum()
    })
}

/// Orthogonal projection onto `{X : Tr_{B_2..B_k} X = ρ_AB}`:
/// `X + ((ρ_AB − Tr_{B_2..B_k} X) ⊗ I) / d_B^{k−1}`.
pub fn project_marginal_affine(x: &ComplexMatrix, target: &DensityMatrix) -> Result<ComplexMatrix> {
    let (_, d_b) = target.bipartite_dims()?;
    let head = target.dim();
    let n = x.nrows();
    if x.ncols() != n || !n.is_multiple_of(head) || !is_power_of(n / head, d_b) {
        return Err(Error::DimensionMismatch {
            expected: head,
            got: n,
        });
    }
    let rest = n / head;
    let delta = target.matrix() - trace_tail(x, rest);
    Ok(x + kron(&delta, &identity(rest)) / c(rest as f64, 0.0))
}

fn is_power_of(mut n: usize, base: usize) -> bool {
    while n > 1 && n.is_multiple_of(base) {
        n /= base;
    }
    n == 1
}

/// The affine set `{Z = Z_sym : marg(Z) = ρ}` inside the face spanned by the
/// columns of `v`, with its orthogonal projection.
struct AffineSet<'a> {
    v: ComplexMatrix,
    v_adj: ComplexMatrix,
    group: Option<&'a PermutationGroup>,
    rest: usize,
    target: ComplexMatrix,
    gram_pinv: ComplexMatrix,
}

impl<'a> AffineSet<'a> {
    fn new(v: ComplexMatrix, group: Option<&'a PermutationGroup>, rest: usize, target: ComplexMatrix) -> Result<Self> {
        let v_adj = v.adjoint();
        let mut set = Self {
            v,
            v_adj,
            group,
            rest,
            target,
            gram_pinv: ComplexMatrix::zeros(0, 0),
        };
        let n = set.target.nrows();
        let mut gram = ComplexMatrix::zeros(n * n, n * n);
        for col in 0..n * n {
            let mut e = ComplexMatrix::zeros(n, n);
            e[col] = c(1.0, 0.0);
            let image = set.marginal(&set.adjoint(&e));
            gram.column_mut(col).copy_from_slice(image.as_slice());
        }
        let (values, vectors) = hermitian_eigh(&hermitian_part(&gram))?;
        let cutoff = PINV_RCOND * values.iter().fold(0.0f64, |a, &x| a.max(x.abs()));
        let inv: Vec<f64> = values
            .iter()
            .map(|&x| if x > cutoff { 1.0 / x } else { 0.0 })
            .collect();
        let scaled = ComplexMatrix::from_fn(vectors.nrows(), vectors.ncols(), |r, col| vectors[(r, col)] * inv[col]);
        set.gram_pinv = &scaled * vectors.adjoint();
        Ok(set)
    }

    fn symmetrize(&self, z: &ComplexMatrix) -> ComplexMatrix {
        match self.group {
            Some(g) => &self.v_adj * g.average(&(&self.v * z * &self.v_adj)) * &self.v,
            None => z.clone(),
        }
    }

    fn marginal(&self, z: &ComplexMatrix) -> ComplexMatrix {
        trace_tail(&(&self.v * z * &self.v_adj), self.rest)
    }

    /// Adjoint of `marginal ∘ symmetrize`.
    fn adjoint(&self, y: &ComplexMatrix) -> ComplexMatrix {
        self.symmetrize(&(&self.v_adj * kron(y, &identity(self.rest)) * &self.v))
    }

    fn project(&self, z: &ComplexMatrix) -> ComplexMatrix {
        let zs = self.symmetrize(z);
        let r = &self.target - self.marginal(&zs);
        let n = r.nrows();
        let y = &self.gram_pinv * ComplexMatrix::from_column_slice(n * n, 1, r.as_slice());
        let y = ComplexMatrix::from_column_slice(n, n, y.as_slice());
        hermitian_part(&(zs + self.adjoint(&y)))
    }
}

fn infeasible_empty(residual: f64, reduced_dim: usize) -> OracleResult {
    OracleResult {
        status: OracleStatus::Infeasible,
        residual,
        iterations: 0,
        certificate: Certificate {
            marginal_residual: residual,
            min_eigenvalue: None,
            gap: residual,
            reduced_dim,
        },
    }
}

/// Decides numerically whether `p.marginal()` has a k-symmetric (or k-bosonic)
/// extension.
///
/// The symmetric flavor iterates on `A ⊗ B^{⊗k}`, the bosonic flavor on
/// `A ⊗ Sym^k(B)`. Runs are deterministic.
pub fn oracle_feasibility(p: &ExtensionProblem, cfg: &OracleConfig) -> Result<OracleResult> {
    cfg.validate()?;
    let rho = p.marginal();
    let (d_a, d_b) = rho.bipartite_dims()?;
    let k = p.k();
    let full = d_a as u128 * (d_b as u128).pow(k as u32);
    let working = match p.flavor() {
        Flavor::Symmetric => full,
        Flavor::Bosonic => d_a as u128 * binomial((d_b + k - 1) as u64, k as u64),
    };
    if working > cfg.dim_limit as u128 {
        return Err(Error::ResourceLimit {
            what: "oracle iterate dimension",
            size: usize::try_from(working).unwrap_or(usize::MAX),
            limit: cfg.dim_limit,
        });
    }
    guard_factor_space(d_b, k)?;
    let full = full as usize;
    let rest = full / rho.dim();

    let (group, v0) = match p.flavor() {
        Flavor::Symmetric => (Some(PermutationGroup::new(d_a, d_b, k)?), identity(full)),
        Flavor::Bosonic => (None, kron(&identity(d_a), &symmetric_isometry(d_b, k)?)),
    };

    // Any extension X satisfies Tr[(Q Q† ⊗ I) W X W†] = 0 for the kernel Q of ρ,
    // so X lives in the common kernel of these operators.
    let kernel = low_eigenspace(rho.matrix(), KERNEL_TOL)?;
    let v = if kernel.ncols() == 0 {
        v0
    } else {
        let forced = kron(&(&kernel * kernel.adjoint()), &identity(rest));
        let forced = match &group {
            Some(g) => g.average(&forced),
            None => forced,
        };
        let restricted = hermitian_part(&(v0.adjoint() * forced * &v0));
        &v0 * low_eigenspace(&restricted, FACE_TOL)?
    };
    let reduced_dim = v.ncols();
    if reduced_dim == 0 {
        return Ok(infeasible_empty(frobenius(rho.matrix()), 0));
    }

    let affine = AffineSet::new(v, group.as_ref(), rest, rho.matrix().clone())?;
    let start = kron(rho.matrix(), &identity(rest)) / c(rest as f64, 0.0);
    let mut x = affine.project(&(&affine.v_adj * start * &affine.v));
    let miss = frobenius(&(affine.marginal(&x) - rho.matrix()));
    if miss > AFFINE_TOL {
        return Ok(infeasible_empty(miss, reduced_dim));
    }

    let mut correction = ComplexMatrix::zeros(reduced_dim, reduced_dim);
    let mut history: Vec<f64> = Vec::with_capacity(cfg.max_iters.min(1 << 16));
    let mut status = OracleStatus::Undecided;
    let mut gap = f64::INFINITY;
    let mut iterations = cfg.max_iters;
    for it in 0..cfg.max_iters {
        let shifted = &x + &correction;
        let y = project_psd(&shifted)?;
        correction = shifted - &y;
        x = affine.project(&y);
        gap = frobenius(&(&y - &x));
        history.push(gap);
        if gap <= cfg.tol_feasible {
            status = OracleStatus::Feasible;
            iterations = it + 1;
            break;
        }
        if it >= STABILIZATION_WINDOW && gap >= cfg.tol_gap {
            let earlier = history[it - STABILIZATION_WINDOW];
            if (earlier - gap).abs() <= STABILIZATION_TOL * gap {
                status = OracleStatus::Infeasible;
                iterations = it + 1;
                break;
            }
        }
    }
    let marginal_residual = frobenius(&(affine.marginal(&x) - rho.matrix()));
    Ok(OracleResult {
        status,
        residual: gap,
        iterations,
        certificate: Certificate {
            marginal_residual,
            min_eigenvalue: Some(min_eigenvalue(&x)?),
            gap,
            reduced_dim,
        },
    })
}

/// `Tr_{B_2..B_k}` of an operator on `A ⊗ B^{⊗k}` whose leading block is
/// `d_A d_B`; exposed for checking candidate extensions.
pub fn ab1_marginal(x: &ComplexMatrix, d_ab: usize) -> Result<ComplexMatrix> {
    if !x.nrows().is_multiple_of(d_ab) || x.ncols() != x.nrows() {
        return Err(Error::DimensionMismatch {
            expected: d_ab,
            got: x.nrows(),
        });
    }
    Ok(trace_tail(x, x.nrows() / d_ab))
}

/// True when `x` is invariant under every permutation of the B factors.
pub fn is_permutation_invariant(x: &ComplexMatrix, layout: &SystemLayout, tol: f64) -> Result<bool> {
    Ok(max_abs_diff(&project_permutation_invariant(x, layout)?, x) <= tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{bell_state, werner_state, BellDiagonalParams, WernerParams};
    use crate::linalg::{diag, partial_trace, tensor_product, DensityMatrix};
    use crate::random::{ginibre, random_density, seeded};

    fn random_hermitian(n: usize, seed: u64) -> ComplexMatrix {
        hermitian_part(&ginibre(n, n, &mut seeded(seed)))
    }

    fn bell(p: [f64; 4]) -> DensityMatrix {
        bell_state(&BellDiagonalParams::new(p).unwrap())
    }

    fn run(rho: DensityMatrix, k: usize, flavor: Flavor) -> OracleResult {
        let p = ExtensionProblem::new(rho, k, flavor).unwrap();
        oracle_feasibility(&p, &OracleConfig::default()).unwrap()
    }

    #[test]
    fn psd_projection() {
        let m = diag(&[1.0, -1.0]);
        assert!(max_abs_diff(&project_psd(&m).unwrap(), &diag(&[1.0, 0.0])) < 1e-15);
        let rho = random_density(SystemLayout::bipartite(2, 2).unwrap(), &mut seeded(1));
        assert!(max_abs_diff(&project_psd(rho.matrix()).unwrap(), rho.matrix()) < 1e-12);
        let h = random_hermitian(6, 2);
        let once = project_psd(&h).unwrap();
        assert!(min_eigenvalue(&once).unwrap() > -1e-12);
        assert!(max_abs_diff(&project_psd(&once).unwrap(), &once) < 1e-12);
    }

    #[test]
    fn permutation_projection() {
        let layout = SystemLayout::extension(2, 2, 2).unwrap();
        let mut rng = seeded(3);
        let l1 = SystemLayout::new(vec![2]).unwrap();
        let (ra, s1, s2) = (
            random_density(l1.clone(), &mut rng),
            random_density(l1.clone(), &mut rng),
            random_density(l1, &mut rng),
        );
        let x = tensor_product(&tensor_product(&ra, &s1), &s2);
        let got = project_permutation_invariant(x.matrix(), &layout).unwrap();
        let swapped = tensor_product(&tensor_product(&ra, &s2), &s1);
        let want = (x.matrix() + swapped.matrix()) * c(0.5, 0.0);
        assert!(max_abs_diff(&got, &want) < 1e-15);
        assert!(max_abs_diff(&project_permutation_invariant(&got, &layout).unwrap(), &got) < 1e-12);
        assert!(is_permutation_invariant(&got, &layout, 1e-12).unwrap());

        let h = random_hermitian(16, 4);
        let l3 = SystemLayout::extension(2, 2, 3).unwrap();
        let p = project_permutation_invariant(&h, &l3).unwrap();
        assert!((crate::linalg::trace(&p) - crate::linalg::trace(&h)).norm() < 1e-12);
    }

    #[test]
    fn marginal_projection() {
        let b = bell([1.0, 0.0, 0.0, 0.0]);
        let mixed = identity(8) / c(8.0, 0.0);
        let out = project_marginal_affine(&mixed, &b).unwrap();
        assert!(max_abs_diff(&ab1_marginal(&out, 4).unwrap(), b.matrix()) < 1e-12);
        assert!((crate::linalg::trace(&out) - c(1.0, 0.0)).norm() < 1e-12);
        assert!(max_abs_diff(&project_marginal_affine(&out, &b).unwrap(), &out) < 1e-12);
        assert!(project_marginal_affine(&identity(12), &b).is_err());
    }

    #[test]
    fn projections_are_nonexpansive() {
        let layout = SystemLayout::extension(2, 2, 2).unwrap();
        let target = random_density(SystemLayout::bipartite(2, 2).unwrap(), &mut seeded(9));
        for seed in 0..10 {
            let a = random_hermitian(8, 100 + seed);
            let b = random_hermitian(8, 200 + seed);
            let before = frobenius(&(&a - &b));
            let ops: [&dyn Fn(&ComplexMatrix) -> ComplexMatrix; 3] = [
                &|m| project_psd(m).unwrap(),
                &|m| project_permutation_invariant(m, &layout).unwrap(),
                &|m| project_marginal_affine(m, &target).unwrap(),
            ];
            for op in ops {
                assert!(frobenius(&(op(&a) - op(&b))) <= before + 1e-12);
            }
        }
    }

    #[test]
    fn product_state_is_extendable() {
        let mut rng = seeded(21);
        let l1 = SystemLayout::new(vec![2]).unwrap();
        let rho = tensor_product(&random_density(l1.clone(), &mut rng), &random_density(l1, &mut rng));
        let r = run(rho, 3, Flavor::Symmetric);
        assert_eq!(r.status, OracleStatus::Feasible);
        assert!(r.residual <= 1e-7);
    }

    #[test]
    fn bell_state_is_not_extendable() {
        for flavor in [Flavor::Symmetric, Flavor::Bosonic] {
            let r = run(bell([1.0, 0.0, 0.0, 0.0]), 2, flavor);
            assert_eq!(r.status, OracleStatus::Infeasible);
        }
    }

    #[test]
    fn werner_example() {
        let w = |psi| werner_state(&WernerParams::new(2, psi).unwrap());
        assert_eq!(run(w(-0.5), 3, Flavor::Symmetric).status, OracleStatus::Infeasible);
        assert_eq!(run(w(-0.25), 3, Flavor::Symmetric).status, OracleStatus::Feasible);
        assert_eq!(run(w(-0.4), 2, Flavor::Symmetric).status, OracleStatus::Feasible);
    }

    #[test]
    fn bosonic_needs_more_than_symmetric() {
        // Two-qutrit Werner states: bosonic threshold is stricter than symmetric.
        let w = werner_state(&WernerParams::new(3, -0.9).unwrap());
        assert_eq!(run(w.clone(), 2, Flavor::Symmetric).status, OracleStatus::Feasible);
        assert_eq!(run(w, 2, Flavor::Bosonic).status, OracleStatus::Infeasible);
    }

    #[test]
    fn feasible_marginals_of_global_states() {
        let mut rng = seeded(8);
        let global = random_density(SystemLayout::new(vec![2, 2, 2]).unwrap(), &mut rng);
        let ab = partial_trace(&global, &[0, 1]).unwrap();
        let ac = partial_trace(&global, &[0, 2]).unwrap();
        let avg = DensityMatrix::new(ab.layout().clone(), (ab.matrix() + ac.matrix()) / c(2.0, 0.0)).unwrap();
        assert_eq!(run(avg, 2, Flavor::Symmetric).status, OracleStatus::Feasible);
    }

    #[test]
    fn resource_guard_and_config() {
        let rho = DensityMatrix::maximally_mixed(SystemLayout::bipartite(2, 2).unwrap());
        let p = ExtensionProblem::symmetric(rho, 8).unwrap();
        assert!(matches!(
            oracle_feasibility(&p, &OracleConfig::default()),
            Err(Error::ResourceLimit { .. })
        ));
        let bad = OracleConfig {
            tol_feasible: 1e-5,
            ..OracleConfig::default()
        };
        assert!(bad.validate().is_err());
    }
}
