//! Derived states whose separability is necessary for extendability, and the
//! PPT-based verdicts built on them.
//!
//! For a bipartite `ρ_AB` with `d_B = dim B`:
//!
//! * [`tilde_state`]: `(d_B ρ_A ⊗ I + k ρ_AB) / (d_B² + k)` must be separable
//!   if `ρ_AB` has a k-symmetric extension.
//! * [`hat_state`]: `(ρ_A ⊗ I + k ρ_AB) / (d_B + k)` must be separable if
//!   `ρ_AB` has a k-bosonic extension.
//! * [`generalized_hat`]: the multi-copy version for a state on
//!   `A ⊗ B^{⊗r}` that is to be extended to `A ⊗ Sym^k(B)`.
//!
//! Separability of the derived state is tested with the partial transpose,
//! which is exact for 2×2 and 2×3 systems and a relaxation otherwise.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{
    binomial, c, identity, kron, min_eigenvalue, partial_trace, partial_transpose, symmetric_projector,
    trace_norm, ComplexMatrix, DensityMatrix, PSD_TOL,
};

/// Eigenvalues of the partial transpose below `-VIOLATION_TOL` prove
/// entanglement of the derived state.
pub const VIOLATION_TOL: f64 = PSD_TOL;

/// Which extension problem is being asked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Flavor {
    Symmetric,
    Bosonic,
}

impl std::str::FromStr for Flavor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "symmetric" => Ok(Flavor::Symmetric),
            "bosonic" => Ok(Flavor::Bosonic),
            other => Err(Error::InvalidParameter(format!("unknown flavor {other:?}"))),
        }
    }
}

/// Does `marginal` have a k-symmetric (or k-bosonic) extension?
#[derive(Debug, Clone, PartialEq)]
pub struct ExtensionProblem {
    marginal: DensityMatrix,
    k: usize,
    flavor: Flavor,
}

impl ExtensionProblem {
    pub fn new(marginal: DensityMatrix, k: usize, flavor: Flavor) -> Result<Self> {
        marginal.bipartite_dims()?;
        if k == 0 {
            return Err(Error::InvalidParameter("extension count k must be at least 1".into()));
        }
        Ok(Self { marginal, k, flavor })
    }

    pub fn symmetric(marginal: DensityMatrix, k: usize) -> Result<Self> {
        Self::new(marginal, k, Flavor::Symmetric)
    }

    pub fn bosonic(marginal: DensityMatrix, k: usize) -> Result<Self> {
        Self::new(marginal, k, Flavor::Bosonic)
    }

    pub fn marginal(&self) -> &DensityMatrix {
        &self.marginal
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn flavor(&self) -> Flavor {
        self.flavor
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Status {
    /// The necessary condition fails: no extension exists.
    Violated,
    /// The necessary condition holds; nothing is proven.
    Inconclusive,
}

/// How separability of the derived state was decided.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeparabilityTest {
    /// PPT on a 2×2 or 2×3 system, where it characterizes separability.
    PptExact,
    /// PPT elsewhere; PPT entangled states exist, so passing proves nothing.
    PptRelaxation,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionVerdict {
    pub status: Status,
    pub criterion: String,
    pub test: SeparabilityTest,
    /// The minimal eigenvalue sits within the tolerance band around zero.
    pub boundary: bool,
    pub witness: BTreeMap<String, f64>,
}

impl CriterionVerdict {
    pub fn is_violated(&self) -> bool {
        self.status == Status::Violated
    }

    /// Minimal eigenvalue of the partial transpose that decided the verdict.
    pub fn min_pt_eigenvalue(&self) -> f64 {
        self.witness["min_pt_eigenvalue"]
    }
}

fn marginal_a_tensor_identity(rho: &DensityMatrix) -> Result<ComplexMatrix> {
    let (_, d_b) = rho.bipartite_dims()?;
    let rho_a = partial_trace(rho, &[0])?;
    Ok(kron(rho_a.matrix(), &identity(d_b)))
}

/// `(d_B ρ_A ⊗ I_B + k ρ_AB) / (d_B² + k)`.
pub fn tilde_state(rho_ab: &DensityMatrix, k: usize) -> Result<DensityMatrix> {
    let (_, d_b) = rho_ab.bipartite_dims()?;
    let db = d_b as f64;
    let kf = k as f64;
    let mixed = marginal_a_tensor_identity(rho_ab)?;
    let m = (mixed * c(db, 0.0) + rho_ab.matrix() * c(kf, 0.0)) / c(db * db + kf, 0.0);
    Ok(DensityMatrix::new_unchecked(rho_ab.layout().clone(), m))
}

/// `(ρ_A ⊗ I_B + k ρ_AB) / (d_B + k)`.
pub fn hat_state(rho_ab: &DensityMatrix, k: usize) -> Result<DensityMatrix> {
    let (_, d_b) = rho_ab.bipartite_dims()?;
    let kf = k as f64;
    let mixed = marginal_a_tensor_identity(rho_ab)?;
    let m = (mixed + rho_ab.matrix() * c(kf, 0.0)) / c(d_b as f64 + kf, 0.0);
    Ok(DensityMatrix::new_unchecked(rho_ab.layout().clone(), m))
}

/// Mixing weights `p_s(k, d, r)`, `s = 0..=r`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralizedCoefficients {
    pub k: usize,
    pub d: usize,
    pub r: usize,
    pub p: Vec<f64>,
}

/// `p_s = C(k, s) C(d+r-1, r-s) / C(d+k+r-1, r)`, a probability
/// distribution over `s` by Vandermonde's identity.
pub fn generalized_coefficients(k: usize, d: usize, r: usize) -> Result<GeneralizedCoefficients> {
    if r == 0 || d < 2 {
        return Err(Error::InvalidParameter(format!(
            "need r >= 1 and d >= 2 (got r={r}, d={d})"
        )));
    }
    if k < r {
        return Err(Error::InvalidParameter(format!(
            "extension count k={k} is smaller than the number of given copies r={r}"
        )));
    }
    let (k64, d64, r64) = (k as u64, d as u64, r as u64);
    let denom = binomial(d64 + k64 + r64 - 1, r64) as f64;
    let p = (0..=r64)
        .map(|s| (binomial(k64, s) * binomial(d64 + r64 - 1, r64 - s)) as f64 / denom)
        .collect();
    Ok(GeneralizedCoefficients { k, d, r, p })
}

/// `Σ_s p_s(k, d_B, r) (I_A ⊗ E_s)(ρ_{A B_1..B_s})` with
/// `E_s(X) = (d_s / d_r) Π⁺_r (X ⊗ I^{⊗(r-s)}) Π⁺_r` and `d_s = C(d+s-1, s)`.
///
/// `rho` lives on `A ⊗ B^{⊗r}` and must be supported on `A ⊗ Sym^r(B)`;
/// with `r = 1` this is [`hat_state`].
pub fn generalized_hat(rho: &DensityMatrix, k: usize) -> Result<DensityMatrix> {
    let dims = rho.layout().dims();
    if dims.len() < 2 {
        return Err(Error::Layout(format!(
            "expected layout [d_A, d_B, ..], got {dims:?}"
        )));
    }
    let d_a = dims[0];
    let d = dims[1];
    if let Some(bad) = dims[1..].iter().find(|&&x| x != d) {
        return Err(Error::Layout(format!(
            "all B factors must share dimension {d}, found {bad}"
        )));
    }
    let r = dims.len() - 1;
    let coeffs = generalized_coefficients(k, d, r)?;
    crate::linalg::check_symmetric_support(rho.matrix(), d_a, d, r)?;

    let proj = kron(&identity(d_a), &symmetric_projector(d, r)?);
    let d_r = binomial((d + r - 1) as u64, r as u64) as f64;
    let n = rho.dim();
    let mut acc = ComplexMatrix::zeros(n, n);
    for (s, &p_s) in coeffs.p.iter().enumerate() {
        let keep: Vec<usize> = (0..=s).collect();
        let rho_s = partial_trace(rho, &keep)?;
        let padded = kron(rho_s.matrix(), &identity(d.pow((r - s) as u32)));
        let d_s = binomial((d + s - 1) as u64, s as u64) as f64;
        acc += (&proj * padded * &proj) * c(p_s * d_s / d_r, 0.0);
    }
    DensityMatrix::new(rho.layout().clone(), crate::linalg::hermitian_part(&acc))
}

/// PPT test across the cut that transposes subsystem `cut`.
pub fn ppt_test(rho: &DensityMatrix, cut: usize) -> Result<CriterionVerdict> {
    let pt = partial_transpose(rho, cut)?;
    let min = min_eigenvalue(&pt)?;
    let dims = rho.layout().dims();
    let exact = dims.len() == 2 && {
        let (a, b) = (dims[0].min(dims[1]), dims[0].max(dims[1]));
        a == 2 && (b == 2 || b == 3) || a == 1
    };
    let mut witness = BTreeMap::new();
    witness.insert("min_pt_eigenvalue".to_string(), min);
    witness.insert("threshold".to_string(), -VIOLATION_TOL);
    Ok(CriterionVerdict {
        status: if min < -VIOLATION_TOL {
            Status::Violated
        } else {
            Status::Inconclusive
        },
        criterion: "ppt".to_string(),
        test: if exact {
            SeparabilityTest::PptExact
        } else {
            SeparabilityTest::PptRelaxation
        },
        boundary: min.abs() < VIOLATION_TOL,
        witness,
    })
}

fn derived_verdict(derived: &DensityMatrix, name: &str, k: usize) -> Result<CriterionVerdict> {
    let mut v = ppt_test(derived, 1)?;
    v.criterion = name.to_string();
    v.witness.insert("k".to_string(), k as f64);
    Ok(v)
}

/// Necessary condition for a k-symmetric extension: PPT of [`tilde_state`].
///
/// Two-qubit inputs with `k = 2` are tested through [`hat_state`] instead,
/// since for two qubits a 2-symmetric extension can always be chosen bosonic.
pub fn symmetric_extension_verdict(p: &ExtensionProblem) -> Result<CriterionVerdict> {
    if p.flavor != Flavor::Symmetric {
        return Err(Error::InvalidParameter(
            "symmetric_extension_verdict needs a symmetric-flavor problem".into(),
        ));
    }
    let dims = p.marginal.bipartite_dims()?;
    if dims == (2, 2) && p.k == 2 {
        derived_verdict(&hat_state(&p.marginal, p.k)?, "hat-ppt", p.k)
    } else {
        derived_verdict(&tilde_state(&p.marginal, p.k)?, "tilde-ppt", p.k)
    }
}

/// Necessary condition for a k-bosonic extension: PPT of [`hat_state`].
pub fn bosonic_extension_verdict(p: &ExtensionProblem) -> Result<CriterionVerdict> {
    if p.flavor != Flavor::Bosonic {
        return Err(Error::InvalidParameter(
            "bosonic_extension_verdict needs a bosonic-flavor problem".into(),
        ));
    }
    derived_verdict(&hat_state(&p.marginal, p.k)?, "hat-ppt", p.k)
}

/// Dispatches on the problem's flavor.
pub fn extension_verdict(p: &ExtensionProblem) -> Result<CriterionVerdict> {
    match p.flavor {
        Flavor::Symmetric => symmetric_extension_verdict(p),
        Flavor::Bosonic => bosonic_extension_verdict(p),
    }
}

/// Trace distance from `ρ_AB` to its tilde state and the universal bound
/// `2 d_B² / (d_B² + k)` on it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DefinettiGap {
    pub gap: f64,
    pub bound: f64,
}

pub fn definetti_gap(rho_ab: &DensityMatrix, k: usize) -> Result<DefinettiGap> {
    let (_, d_b) = rho_ab.bipartite_dims()?;
    let tilde = tilde_state(rho_ab, k)?;
    let gap = trace_norm(&(rho_ab.matrix() - tilde.matrix()))?;
    let d2 = (d_b * d_b) as f64;
    Ok(DefinettiGap {
        gap,
        bound: 2.0 * d2 / (d2 + k as f64),
    })
}

/// `(d_B + 1) σ_AB ≥ σ_A ⊗ I_B`, which implies σ is separable.
pub fn sufficient_separability(sigma: &DensityMatrix) -> Result<bool> {
    let (_, d_b) = sigma.bipartite_dims()?;
    let m = sigma.matrix() * c(d_b as f64 + 1.0, 0.0) - marginal_a_tensor_identity(sigma)?;
    Ok(min_eigenvalue(&m)? >= -PSD_TOL)
}

/// `σ_AB ≤ σ_A ⊗ I_B`, which every separable σ satisfies.
pub fn necessary_separability(sigma: &DensityMatrix) -> Result<bool> {
    let m = marginal_a_tensor_identity(sigma)? - sigma.matrix();
    Ok(min_eigenvalue(&m)? >= -PSD_TOL)
}
