//! Permutations of identical tensor factors and the operators built from them.

use std::collections::HashMap;

use itertools::Itertools;

use super::{c, max_abs_diff, trace, ComplexMatrix, DensityMatrix};
use crate::error::{Error, Result};

/// Largest `d^k` for which permutation-sum constructions are attempted.
pub const MAX_FACTOR_SPACE: usize = 4096;
/// Largest factor count whose `k!` permutation terms are enumerated.
const MAX_PERMUTED_FACTORS: usize = 8;

/// `C(n, k)` as an exact integer.
pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * u128::from(n - i) / u128::from(i + 1))
}

/// A bijection of `{0, .., k-1}`; `image[m]` is where factor `m` is sent.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Permutation {
    image: Vec<usize>,
}

impl Permutation {
    pub fn new(image: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; image.len()];
        for &x in &image {
            if x >= image.len() || std::mem::replace(&mut seen[x], true) {
                return Err(Error::NotPermutation(image));
            }
        }
        Ok(Self { image })
    }

    pub fn identity(k: usize) -> Self {
        Self {
            image: (0..k).collect(),
        }
    }

    /// Transposition of factors `i` and `j`.
    pub fn swap(k: usize, i: usize, j: usize) -> Result<Self> {
        let mut image: Vec<usize> = (0..k).collect();
        if i >= k || j >= k {
            return Err(Error::NotPermutation(image));
        }
        image.swap(i, j);
        Ok(Self { image })
    }

    /// Every permutation of `k` factors, lexicographic order.
    pub fn all(k: usize) -> impl Iterator<Item = Permutation> {
        (0..k).permutations(k).map(|image| Permutation { image })
    }

    pub fn len(&self) -> usize {
        self.image.len()
    }

    pub fn is_empty(&self) -> bool {
        self.image.is_empty()
    }

    pub fn apply(&self, m: usize) -> usize {
        self.image[m]
    }

    /// `(self ∘ other)(m) = self(other(m))`.
    pub fn compose(&self, other: &Permutation) -> Permutation {
        assert_eq!(self.len(), other.len(), "composing permutations of different size");
        Permutation {
            image: other.image.iter().map(|&m| self.image[m]).collect(),
        }
    }

    pub fn inverse(&self) -> Permutation {
        let mut image = vec![0; self.len()];
        for (m, &p) in self.image.iter().enumerate() {
            image[p] = m;
        }
        Permutation { image }
    }

    /// Basis relabeling on `(C^d)^{⊗k}`: `W e_i = e_{map[i]}`.
    pub(crate) fn basis_map(&self, d: usize) -> Vec<usize> {
        let k = self.len();
        let total = d.pow(k as u32);
        let mut digits = vec![0usize; k];
        let mut out = vec![0usize; k];
        (0..total)
            .map(|mut idx| {
                for m in (0..k).rev() {
                    digits[m] = idx % d;
                    idx /= d;
                }
                for m in 0..k {
                    out[self.image[m]] = digits[m];
                }
                out.iter().fold(0, |acc, &x| acc * d + x)
            })
            .collect()
    }
}

pub(crate) fn guard_factor_space(d: usize, k: usize) -> Result<usize> {
    let size = (d as u128).checked_pow(k as u32).unwrap_or(u128::MAX);
    if size > MAX_FACTOR_SPACE as u128 {
        return Err(Error::ResourceLimit {
            what: "factor space dimension",
            size: usize::try_from(size).unwrap_or(usize::MAX),
            limit: MAX_FACTOR_SPACE,
        });
    }
    if k > MAX_PERMUTED_FACTORS {
        return Err(Error::ResourceLimit {
            what: "permuted factor count",
            size: k,
            limit: MAX_PERMUTED_FACTORS,
        });
    }
    Ok(size as usize)
}

/// The unitary `W_π |i_1 .. i_k⟩ = |i_{π⁻¹(1)} .. i_{π⁻¹(k)}⟩` on `(C^d)^{⊗k}`.
#[derive(Debug, Clone, PartialEq)]
pub struct PermutationOperator {
    d: usize,
    perm: Permutation,
    map: Vec<usize>,
}

impl PermutationOperator {
    pub fn new(d: usize, perm: Permutation) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidParameter("local dimension must be positive".into()));
        }
        guard_factor_space(d, perm.len())?;
        let map = perm.basis_map(d);
        Ok(Self { d, perm, map })
    }

    pub fn local_dim(&self) -> usize {
        self.d
    }

    pub fn factors(&self) -> usize {
        self.perm.len()
    }

    pub fn permutation(&self) -> &Permutation {
        &self.perm
    }

    /// Dense permutation matrix.
    pub fn matrix(&self) -> ComplexMatrix {
        let n = self.map.len();
        let mut m = ComplexMatrix::zeros(n, n);
        for (i, &j) in self.map.iter().enumerate() {
            m[(j, i)] = c(1.0, 0.0);
        }
        m
    }

    /// `W X W†` without forming `W`.
    pub fn conjugate(&self, x: &ComplexMatrix) -> ComplexMatrix {
        let n = self.map.len();
        let mut out = ComplexMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                out[(self.map[i], self.map[j])] = x[(i, j)];
            }
        }
        out
    }
}

/// Builds `W_π` for `k = pi.len()` factors of dimension `d`.
pub fn permutation_operator(d: usize, pi: &[usize]) -> Result<PermutationOperator> {
    PermutationOperator::new(d, Permutation::new(pi.to_vec())?)
}

/// `Π⁺_r = (1/r!) Σ_π W_π`, the projector onto the symmetric subspace of
/// `(C^d)^{⊗r}`.
pub fn symmetric_projector(d: usize, r: usize) -> Result<ComplexMatrix> {
    if d == 0 || r == 0 {
        return Err(Error::InvalidParameter(format!(
            "symmetric projector needs d >= 1 and r >= 1 (got d={d}, r={r})"
        )));
    }
    let n = guard_factor_space(d, r)?;
    let mut acc = ComplexMatrix::zeros(n, n);
    let mut count = 0usize;
    for perm in Permutation::all(r) {
        for (i, j) in perm.basis_map(d).into_iter().enumerate() {
            acc[(j, i)] += c(1.0, 0.0);
        }
        count += 1;
    }
    Ok(acc * c(1.0 / count as f64, 0.0))
}

/// Columns are the normalized occupation-number basis of `Sym^k(C^d)`
/// embedded in `(C^d)^{⊗k}`; the result is an isometry of shape
/// `d^k × C(d+k-1, k)`.
pub fn symmetric_isometry(d: usize, k: usize) -> Result<ComplexMatrix> {
    if d == 0 || k == 0 {
        return Err(Error::InvalidParameter(format!(
            "symmetric subspace needs d >= 1 and k >= 1 (got d={d}, k={k})"
        )));
    }
    let size = (d as u128).checked_pow(k as u32).unwrap_or(u128::MAX);
    if size > MAX_FACTOR_SPACE as u128 {
        return Err(Error::ResourceLimit {
            what: "factor space dimension",
            size: usize::try_from(size).unwrap_or(usize::MAX),
            limit: MAX_FACTOR_SPACE,
        });
    }
    let total = size as usize;
    let mut column_of: HashMap<Vec<usize>, usize> = HashMap::new();
    let mut members: Vec<Vec<usize>> = Vec::new();
    for idx in 0..total {
        let mut digits = Vec::with_capacity(k);
        let mut rest = idx;
        for _ in 0..k {
            digits.push(rest % d);
            rest /= d;
        }
        digits.sort_unstable();
        let col = *column_of.entry(digits).or_insert_with(|| {
            members.push(Vec::new());
            members.len() - 1
        });
        members[col].push(idx);
    }
    let mut v = ComplexMatrix::zeros(total, members.len());
    for (col, rows) in members.iter().enumerate() {
        let amp = 1.0 / (rows.len() as f64).sqrt();
        for &r in rows {
            v[(r, col)] = c(amp, 0.0);
        }
    }
    Ok(v)
}

/// Tolerance on `‖Π⁺ρΠ⁺ − ρ‖` for symmetric-supported inputs.
pub(crate) const SYMMETRIC_SUPPORT_TOL: f64 = 1e-9;

/// Checks `Π ρ Π = ρ` on the trailing `k` factors of dimension `d`
/// (a leading factor of dimension `lead` is left untouched).
pub(crate) fn check_symmetric_support(m: &ComplexMatrix, lead: usize, d: usize, k: usize) -> Result<()> {
    let proj = super::kron(&super::identity(lead), &symmetric_projector(d, k)?);
    let dev = max_abs_diff(&(&proj * m * &proj), m);
    if dev > SYMMETRIC_SUPPORT_TOL {
        return Err(Error::NotSymmetricSupported(dev));
    }
    Ok(())
}

/// The channel `ρ ↦ Tr_{B_1..B_k}[(I ⊗ ρ) Σ_{π ∈ S_{k+1}} W_π]`, normalized to
/// unit trace, for `ρ` supported on the symmetric subspace of `k` factors of
/// dimension `d`.
///
/// The sum over `S_{k+1}` is evaluated term by term.
pub fn twirl_channel(rho_sym: &DensityMatrix, d: usize) -> Result<ComplexMatrix> {
    let dims = rho_sym.layout().dims();
    if dims.iter().any(|&x| x != d) {
        return Err(Error::Layout(format!(
            "twirl input must consist of factors of dimension {d}, got {dims:?}"
        )));
    }
    let k = dims.len();
    guard_factor_space(d, k + 1)?;
    check_symmetric_support(rho_sym.matrix(), 1, d, k)?;

    let rho = rho_sym.matrix();
    let block = rho.nrows();
    let mut out = ComplexMatrix::zeros(d, d);
    for perm in Permutation::all(k + 1) {
        let map = perm.basis_map(d);
        // ((I ⊗ ρ) W)[r, col] = (I ⊗ ρ)[r, map[col]]; trace out B with r = (a, b), col = (a', b).
        for a_out in 0..d {
            for b in 0..block {
                let target = map[a_out * block + b];
                let (a_in, b_in) = (target / block, target % block);
                out[(a_in, a_out)] += rho[(b, b_in)];
            }
        }
    }
    let tr = trace(&out);
    if tr.norm() < f64::MIN_POSITIVE {
        return Err(Error::Trace(1.0));
    }
    Ok(out / tr)
}
