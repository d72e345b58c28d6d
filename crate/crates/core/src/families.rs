//! Bell-diagonal and Werner states with their closed-form extendability
//! conditions, plus the entropic (SSA) and monogamy (CKW) comparison tests.

use crate::error::{Error, Result};
use crate::linalg::{
    c, identity, kron, partial_trace, permutation_operator, spectral_map, trace_norm,
    von_neumann_entropy, ComplexMatrix, DensityMatrix, SystemLayout, C64, PSD_TOL,
};

/// Slack for boundary comparisons of closed-form conditions.
const BOUNDARY_SLACK: f64 = 1e-12;

/// A-marginals closer than this (in trace distance) count as equal.
pub const MARGINAL_MATCH_TOL: f64 = 1e-8;

/// Weights of `|Φ_1⟩ .. |Φ_4⟩` in a Bell-diagonal state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BellDiagonalParams {
    p: [f64; 4],
}

impl BellDiagonalParams {
    pub fn new(p: [f64; 4]) -> Result<Self> {
        if p.iter().any(|&x| !(-BOUNDARY_SLACK..=1.0 + BOUNDARY_SLACK).contains(&x)) {
            return Err(Error::InvalidParameter(format!(
                "Bell-diagonal weights must lie in [0, 1], got {p:?}"
            )));
        }
        let sum: f64 = p.iter().sum();
        if (sum - 1.0).abs() > BOUNDARY_SLACK {
            return Err(Error::InvalidParameter(format!(
                "Bell-diagonal weights must sum to 1, got {sum}"
            )));
        }
        Ok(Self {
            p: p.map(|x| x.clamp(0.0, 1.0)),
        })
    }

    /// `(p1, p2, p3, 1 - p1 - p2 - p3)`.
    pub fn from_first_three(p1: f64, p2: f64, p3: f64) -> Result<Self> {
        Self::new([p1, p2, p3, 1.0 - p1 - p2 - p3])
    }

    pub fn weights(&self) -> [f64; 4] {
        self.p
    }
}

/// `Φ_1 = (|00⟩+|11⟩)/√2, Φ_2 = (|00⟩−|11⟩)/√2, Φ_3 = (|01⟩+|10⟩)/√2,
/// Φ_4 = (|01⟩−|10⟩)/√2`.
pub fn bell_vectors() -> [[C64; 4]; 4] {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let z = c(0.0, 0.0);
    [
        [c(s, 0.0), z, z, c(s, 0.0)],
        [c(s, 0.0), z, z, c(-s, 0.0)],
        [z, c(s, 0.0), c(s, 0.0), z],
        [z, c(s, 0.0), c(-s, 0.0), z],
    ]
}

pub fn bell_state(params: &BellDiagonalParams) -> DensityMatrix {
    let mut m = ComplexMatrix::zeros(4, 4);
    for (w, v) in params.p.iter().zip(bell_vectors()) {
        m += crate::linalg::outer(&v) * c(*w, 0.0);
    }
    DensityMatrix::new_unchecked(SystemLayout::bipartite(2, 2).expect("2x2"), m)
}

/// `1/2 − (Σ p_i² − 4 √(Π p_i))`; nonnegative exactly on the 2-extendable set.
pub fn bell_exact_margin(params: &BellDiagonalParams) -> f64 {
    let sq: f64 = params.p.iter().map(|x| x * x).sum();
    let prod: f64 = params.p.iter().product();
    0.5 - (sq - 4.0 * prod.max(0.0).sqrt())
}

/// Necessary and sufficient condition for a 2-symmetric extension of a
/// Bell-diagonal state.
pub fn bell_exact_2ext(params: &BellDiagonalParams) -> bool {
    bell_exact_margin(params) >= -BOUNDARY_SLACK
}

/// `max p_i ≤ 3/4`, the closed form of PPT on the k = 2 hat state.
pub fn bell_paper_condition(params: &BellDiagonalParams) -> bool {
    params.p.iter().all(|&x| x <= 0.75 + BOUNDARY_SLACK)
}

/// Shannon entropy of the weights in bits (equals `S(AB)`).
pub fn bell_entropy(params: &BellDiagonalParams) -> f64 {
    params
        .p
        .iter()
        .filter(|&&x| x > 0.0)
        .map(|&x| -x * x.log2())
        .sum()
}

/// Strong subadditivity for two copies of a Bell-diagonal marginal,
/// `S(AB) ≥ 1`.
pub fn bell_ssa(params: &BellDiagonalParams) -> bool {
    bell_entropy(params) >= 1.0 - BOUNDARY_SLACK
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WernerParams {
    d: usize,
    psi: f64,
}

impl WernerParams {
    pub fn new(d: usize, psi: f64) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidParameter(format!("Werner dimension must be >= 2, got {d}")));
        }
        if !(-1.0 - BOUNDARY_SLACK..=1.0 + BOUNDARY_SLACK).contains(&psi) {
            return Err(Error::InvalidParameter(format!(
                "Werner parameter must lie in [-1, 1], got {psi}"
            )));
        }
        Ok(Self {
            d,
            psi: psi.clamp(-1.0, 1.0),
        })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn psi(&self) -> f64 {
        self.psi
    }
}

/// `(1+ψ)/2 ρ⁺ + (1−ψ)/2 ρ⁻` with `ρ^±` the normalized projectors onto the
/// symmetric and antisymmetric subspaces; `ψ = tr(ρ F)` for the swap `F`.
pub fn werner_state(params: &WernerParams) -> DensityMatrix {
    let d = params.d;
    let n = d * d;
    let swap = permutation_operator(d, &[1, 0]).expect("two factors").matrix();
    let id = identity(n);
    let sym = (&id + &swap) * c(0.5, 0.0);
    let anti = (&id - &swap) * c(0.5, 0.0);
    let df = d as f64;
    let w_sym = (1.0 + params.psi) / 2.0 / (df * (df + 1.0) / 2.0);
    let w_anti = (1.0 - params.psi) / 2.0 / (df * (df - 1.0) / 2.0);
    let m = sym * c(w_sym, 0.0) + anti * c(w_anti, 0.0);
    DensityMatrix::new_unchecked(SystemLayout::bipartite(d, d).expect("d >= 2"), m)
}

/// Below `−d/k` the tilde criterion proves a Werner state has no
/// k-symmetric extension.
pub fn werner_paper_kext_threshold(d: usize, k: usize) -> f64 {
    -(d as f64) / k as f64
}

/// Werner states are k-symmetric extendable iff `ψ ≥ −(d−1)/k`.
pub fn werner_exact_kext_threshold(d: usize, k: usize) -> f64 {
    -((d - 1) as f64) / k as f64
}

/// Werner parameter of `tilde_state(ρ_W(ψ), k)`: `(d + kψ) / (d² + k)`.
pub fn werner_tilde_map(d: usize, k: usize, psi: f64) -> f64 {
    let (d, k) = (d as f64, k as f64);
    (d + k * psi) / (d * d + k)
}

/// Werner parameter of `hat_state(ρ_W(ψ), k)`: `(1 + kψ) / (d + k)`.
pub fn werner_hat_map(d: usize, k: usize, psi: f64) -> f64 {
    let (d, k) = (d as f64, k as f64);
    (1.0 + k * psi) / (d + k)
}

/// Trace distance `½‖ρ_A − σ_A‖₁` between the A-marginals of two
/// bipartite states.
pub fn a_marginal_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    let (da, _) = rho.bipartite_dims()?;
    let (da2, _) = sigma.bipartite_dims()?;
    if da != da2 {
        return Err(Error::DimensionMismatch {
            expected: da,
            got: da2,
        });
    }
    let ra = partial_trace(rho, &[0])?;
    let sa = partial_trace(sigma, &[0])?;
    Ok(0.5 * trace_norm(&(ra.matrix() - sa.matrix()))?)
}

/// `S(AB) + S(AC) ≥ S(B) + S(C)` for marginals `ρ_AB`, `ρ_AC` sharing A.
pub fn ssa_check(rho_ab: &DensityMatrix, rho_ac: &DensityMatrix) -> Result<bool> {
    let dist = a_marginal_distance(rho_ab, rho_ac)?;
    if dist > MARGINAL_MATCH_TOL {
        return Err(Error::MarginalMismatch(dist));
    }
    let s_ab = von_neumann_entropy(rho_ab);
    let s_ac = von_neumann_entropy(rho_ac);
    let s_b = von_neumann_entropy(&partial_trace(rho_ab, &[1])?);
    let s_c = von_neumann_entropy(&partial_trace(rho_ac, &[1])?);
    Ok(s_ab + s_ac >= s_b + s_c - PSD_TOL)
}

fn require_two_qubits(rho: &DensityMatrix) -> Result<()> {
    match rho.bipartite_dims()? {
        (2, 2) => Ok(()),
        (a, b) => Err(Error::Layout(format!(
            "concurrence needs a two-qubit state, got {a}x{b}"
        ))),
    }
}

/// Wootters concurrence of a two-qubit state.
pub fn wootters_concurrence(rho: &DensityMatrix) -> Result<f64> {
    require_two_qubits(rho)?;
    let y = ComplexMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)]);
    let yy = kron(&y, &y);
    let flipped = &yy * rho.matrix().map(|z| z.conj()) * &yy;
    let sqrt_rho = spectral_map(rho.matrix(), |x| x.max(0.0).sqrt())?;
    let r = crate::linalg::hermitian_part(&(&sqrt_rho * flipped * &sqrt_rho));
    let mut lambdas: Vec<f64> = crate::linalg::hermitian_eigs(&r)?
        .into_iter()
        .map(|x| x.max(0.0).sqrt())
        .collect();
    lambdas.sort_by(|a, b| b.total_cmp(a));
    Ok((lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3]).max(0.0))
}

/// Coffman–Kundu–Wootters monogamy `C_AB² + C_AC² ≤ C_A(BC)²` with the
/// global concurrence `c_abc` supplied by the caller.
pub fn ckw_check(rho_ab: &DensityMatrix, rho_ac: &DensityMatrix, c_abc: f64) -> Result<bool> {
    if !(0.0..=1.0).contains(&c_abc) {
        return Err(Error::InvalidParameter(format!(
            "global concurrence must lie in [0, 1], got {c_abc}"
        )));
    }
    let c_ab = wootters_concurrence(rho_ab)?;
    let c_ac = wootters_concurrence(rho_ac)?;
    Ok(c_ab * c_ab + c_ac * c_ac <= c_abc * c_abc + PSD_TOL)
}
