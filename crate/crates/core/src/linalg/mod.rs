//! Dense complex linear algebra over multi-factor tensor spaces.
//!
//! Operators are plain [`ComplexMatrix`] values (row/column indices are the
//! flattened multi-indices of a [`SystemLayout`], first factor most
//! significant). [`DensityMatrix`] couples such a matrix with its layout and
//! guarantees the state invariants.

mod density;
mod permutation;

pub use density::{
    partial_trace, partial_trace_matrix, partial_transpose, partial_transpose_matrix,
    tensor_product, von_neumann_entropy, DensityMatrix, Tolerances,
};
pub use permutation::{
    binomial, permutation_operator, symmetric_isometry, symmetric_projector, twirl_channel, Permutation,
    PermutationOperator, MAX_FACTOR_SPACE,
};
pub(crate) use permutation::{check_symmetric_support, guard_factor_space};

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

pub use nalgebra::Complex;

pub type C64 = Complex<f64>;

/// Dense complex matrix, the carrier of every operator in this crate.
pub type ComplexMatrix = DMatrix<C64>;

/// Hermiticity tolerance (max-entry norm of `M - M†`).
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Allowed deviation of a state's trace from one.
pub const TRACE_TOL: f64 = 1e-10;
/// Eigenvalues down to `-PSD_TOL` still count as nonnegative.
pub const PSD_TOL: f64 = 1e-9;

/// Ordered factor dimensions of a tensor-product space.
#[derive(Debug, Clone, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct SystemLayout {
    dims: Vec<usize>,
}

impl SystemLayout {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::Layout("layout needs at least one factor".into()));
        }
        if let Some(pos) = dims.iter().position(|&d| d == 0) {
            return Err(Error::Layout(format!("factor {pos} has dimension 0")));
        }
        Ok(Self { dims })
    }

    /// `[d_a, d_b]`.
    pub fn bipartite(d_a: usize, d_b: usize) -> Result<Self> {
        Self::new(vec![d_a, d_b])
    }

    /// `[d_a, d_b, d_b, ...]` with `copies` B factors.
    pub fn extension(d_a: usize, d_b: usize, copies: usize) -> Result<Self> {
        let mut dims = vec![d_a];
        dims.extend(std::iter::repeat_n(d_b, copies));
        Self::new(dims)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn factors(&self) -> usize {
        self.dims.len()
    }

    /// Product of all factor dimensions.
    pub fn total_dim(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn concat(&self, other: &SystemLayout) -> SystemLayout {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        SystemLayout { dims }
    }

    /// Returns `(d_a, d_b)` for a two-factor layout.
    pub fn as_bipartite(&self) -> Result<(usize, usize)> {
        match self.dims.as_slice() {
            &[a, b] => Ok((a, b)),
            other => Err(Error::Layout(format!(
                "expected a bipartite layout, got {other:?}"
            ))),
        }
    }
}

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity(n: usize) -> ComplexMatrix {
    ComplexMatrix::identity(n, n)
}

/// Real-diagonal matrix.
pub fn diag(values: &[f64]) -> ComplexMatrix {
    let n = values.len();
    ComplexMatrix::from_fn(n, n, |i, j| if i == j { c(values[i], 0.0) } else { c(0.0, 0.0) })
}

/// Kronecker product of two raw matrices.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

/// `|v⟩⟨v|` for a (not necessarily normalized) vector.
pub fn outer(v: &[C64]) -> ComplexMatrix {
    let n = v.len();
    ComplexMatrix::from_fn(n, n, |i, j| v[i] * v[j].conj())
}

pub fn trace(m: &ComplexMatrix) -> C64 {
    m.diagonal().iter().sum()
}

/// Largest entry modulus.
pub fn max_abs(m: &ComplexMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Max-entry distance between two matrices of equal shape.
pub fn max_abs_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape(), "shape mismatch");
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Frobenius norm.
pub fn frobenius(m: &ComplexMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `max |M - M†|` over entries.
pub fn hermiticity_defect(m: &ComplexMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// `(M + M†) / 2`.
pub fn hermitian_part(m: &ComplexMatrix) -> ComplexMatrix {
    (m + m.adjoint()) * c(0.5, 0.0)
}

fn check_hermitian(m: &ComplexMatrix) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    let scale = max_abs(m).max(1.0);
    let defect = hermiticity_defect(m);
    if defect > HERMITIAN_TOL * scale {
        return Err(Error::NotHermitian(defect));
    }
    Ok(())
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending with
/// eigenvectors in matching column order.
pub fn hermitian_eigh(m: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    check_hermitian(m)?;
    let n = m.nrows();
    if n == 0 {
        return Ok((Vec::new(), ComplexMatrix::zeros(0, 0)));
    }
    let eig = SymmetricEigen::new(hermitian_part(m));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |r, col| eig.eigenvectors[(r, order[col])]);
    Ok((values, vectors))
}

/// Real spectrum of a Hermitian matrix, ascending.
pub fn hermitian_eigs(m: &ComplexMatrix) -> Result<Vec<f64>> {
    hermitian_eigh(m).map(|(values, _)| values)
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue(m: &ComplexMatrix) -> Result<f64> {
    Ok(hermitian_eigs(m)?.first().copied().unwrap_or(0.0))
}

/// Sum of absolute eigenvalues.
pub fn trace_norm(m: &ComplexMatrix) -> Result<f64> {
    Ok(hermitian_eigs(m)?.iter().map(|v| v.abs()).sum())
}

/// Applies `f` to the spectrum: `U f(Λ) U†`.
pub fn spectral_map(m: &ComplexMatrix, f: impl Fn(f64) -> f64) -> Result<ComplexMatrix> {
    let (values, vectors) = hermitian_eigh(m)?;
    let scaled = ComplexMatrix::from_fn(vectors.nrows(), vectors.ncols(), |r, col| {
        vectors[(r, col)] * f(values[col])
    });
    Ok(&scaled * vectors.adjoint())
}

/// Orthonormal basis (as columns) of the eigenspace with eigenvalues
/// `<= threshold`.
pub fn low_eigenspace(m: &ComplexMatrix, threshold: f64) -> Result<ComplexMatrix> {
    let (values, vectors) = hermitian_eigh(m)?;
    let cols: Vec<usize> = (0..values.len()).filter(|&i| values[i] <= threshold).collect();
    Ok(ComplexMatrix::from_fn(vectors.nrows(), cols.len(), |r, col| {
        vectors[(r, cols[col])]
    }))
}
