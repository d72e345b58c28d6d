use super::{
    c, hermitian_eigs, hermiticity_defect, identity, kron, outer, trace, ComplexMatrix,
    SystemLayout, C64, HERMITIAN_TOL, PSD_TOL, TRACE_TOL,
};
use crate::error::{Error, Result};

/// Validation slack used when admitting a matrix as a state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub hermitian: f64,
    pub trace: f64,
    pub psd: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            hermitian: HERMITIAN_TOL,
            trace: TRACE_TOL,
            psd: PSD_TOL,
        }
    }
}

impl Tolerances {
    /// The same slack for all three checks.
    pub fn uniform(tol: f64) -> Self {
        Self {
            hermitian: tol,
            trace: tol,
            psd: tol,
        }
    }
}

/// A Hermitian, trace-one, positive semidefinite matrix together with the
/// tensor layout of the space it acts on.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    layout: SystemLayout,
    mat: ComplexMatrix,
}

impl DensityMatrix {
    /// Validates with the default tolerances.
    pub fn new(layout: SystemLayout, mat: ComplexMatrix) -> Result<Self> {
        Self::with_tolerances(layout, mat, Tolerances::default())
    }

    pub fn with_tolerances(layout: SystemLayout, mat: ComplexMatrix, tol: Tolerances) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::NotSquare {
                rows: mat.nrows(),
                cols: mat.ncols(),
            });
        }
        if layout.total_dim() != mat.nrows() {
            return Err(Error::DimensionMismatch {
                expected: layout.total_dim(),
                got: mat.nrows(),
            });
        }
        if let Some(pos) = mat.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            // nalgebra storage is column-major
            let n = mat.nrows();
            return Err(Error::NonFinite {
                row: pos % n,
                col: pos / n,
            });
        }
        let defect = hermiticity_defect(&mat);
        if defect > tol.hermitian {
            return Err(Error::NotHermitian(defect));
        }
        let tr = trace(&mat);
        let dev = (tr - c(1.0, 0.0)).norm();
        if dev > tol.trace {
            return Err(Error::Trace(dev));
        }
        let min = hermitian_eigs(&super::hermitian_part(&mat))?
            .first()
            .copied()
            .unwrap_or(0.0);
        if min < -tol.psd {
            return Err(Error::NotPsd(min));
        }
        Ok(Self { layout, mat })
    }

    /// Wraps a matrix the caller has constructed to be a valid state.
    pub(crate) fn new_unchecked(layout: SystemLayout, mat: ComplexMatrix) -> Self {
        debug_assert_eq!(layout.total_dim(), mat.nrows());
        Self { layout, mat }
    }

    /// Rescales a Hermitian PSD matrix to unit trace and validates it.
    pub fn from_unnormalized(layout: SystemLayout, mat: ComplexMatrix) -> Result<Self> {
        let tr = trace(&mat).re;
        if tr.abs() < f64::MIN_POSITIVE {
            return Err(Error::Trace(1.0));
        }
        Self::new(layout, mat * c(1.0 / tr, 0.0))
    }

    /// `I / dim`.
    pub fn maximally_mixed(layout: SystemLayout) -> Self {
        let n = layout.total_dim();
        Self::new_unchecked(layout, identity(n) * c(1.0 / n as f64, 0.0))
    }

    /// `|ψ⟩⟨ψ|` for the normalized `psi`.
    pub fn pure(layout: SystemLayout, psi: &[C64]) -> Result<Self> {
        if psi.len() != layout.total_dim() {
            return Err(Error::DimensionMismatch {
                expected: layout.total_dim(),
                got: psi.len(),
            });
        }
        let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidParameter("state vector has zero norm".into()));
        }
        let v: Vec<C64> = psi.iter().map(|z| z / norm).collect();
        Ok(Self::new_unchecked(layout, outer(&v)))
    }

    /// Projector onto a computational basis vector.
    pub fn basis(layout: SystemLayout, index: usize) -> Result<Self> {
        let mut v = vec![c(0.0, 0.0); layout.total_dim()];
        *v.get_mut(index).ok_or_else(|| {
            Error::Layout(format!("basis index {index} out of range"))
        })? = c(1.0, 0.0);
        Self::pure(layout, &v)
    }

    pub fn layout(&self) -> &SystemLayout {
        &self.layout
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.mat
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    /// `(d_a, d_b)` of a bipartite state.
    pub fn bipartite_dims(&self) -> Result<(usize, usize)> {
        self.layout.as_bipartite()
    }

    /// Ascending spectrum.
    pub fn spectrum(&self) -> Vec<f64> {
        hermitian_eigs(&super::hermitian_part(&self.mat)).expect("state is Hermitian")
    }

    /// Convex combination `Σ w_i ρ_i` of states sharing a layout.
    pub fn mixture(weights: &[f64], states: &[DensityMatrix]) -> Result<Self> {
        let first = states
            .first()
            .ok_or_else(|| Error::InvalidParameter("empty mixture".into()))?;
        if weights.len() != states.len() {
            return Err(Error::DimensionMismatch {
                expected: states.len(),
                got: weights.len(),
            });
        }
        let mut acc = ComplexMatrix::zeros(first.dim(), first.dim());
        for (w, s) in weights.iter().zip(states) {
            if s.layout != first.layout {
                return Err(Error::Layout("mixture of states with different layouts".into()));
            }
            if *w < 0.0 {
                return Err(Error::InvalidParameter(format!("negative weight {w}")));
            }
            acc += &s.mat * c(*w, 0.0);
        }
        Self::new(first.layout.clone(), acc)
    }
}

/// `ρ ⊗ σ`, layouts concatenated.
pub fn tensor_product(a: &DensityMatrix, b: &DensityMatrix) -> DensityMatrix {
    DensityMatrix::new_unchecked(a.layout.concat(&b.layout), kron(&a.mat, &b.mat))
}

fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * dims[i + 1];
    }
    s
}

/// Flat offsets contributed by every multi-index over the listed factors.
fn offsets(dims: &[usize], strides: &[usize], factors: &[usize]) -> Vec<usize> {
    let mut out = vec![0usize];
    for &f in factors {
        let mut next = Vec::with_capacity(out.len() * dims[f]);
        for base in &out {
            for digit in 0..dims[f] {
                next.push(base + digit * strides[f]);
            }
        }
        out = next;
    }
    out
}

/// Partial trace of a raw operator keeping the listed factors (result in
/// original factor order).
pub fn partial_trace_matrix(m: &ComplexMatrix, dims: &[usize], keep: &[usize]) -> Result<ComplexMatrix> {
    let total: usize = dims.iter().product();
    if m.nrows() != total || m.ncols() != total {
        return Err(Error::DimensionMismatch {
            expected: total,
            got: m.nrows(),
        });
    }
    let mut keep_sorted = keep.to_vec();
    keep_sorted.sort_unstable();
    keep_sorted.dedup();
    if keep_sorted.is_empty() {
        return Err(Error::Layout("partial trace must keep at least one factor".into()));
    }
    if let Some(&bad) = keep_sorted.iter().find(|&&k| k >= dims.len()) {
        return Err(Error::Layout(format!(
            "subsystem {bad} out of range for {} factors",
            dims.len()
        )));
    }
    let traced: Vec<usize> = (0..dims.len()).filter(|i| !keep_sorted.contains(i)).collect();
    let st = strides(dims);
    let kept_off = offsets(dims, &st, &keep_sorted);
    let traced_off = offsets(dims, &st, &traced);
    let n = kept_off.len();
    Ok(ComplexMatrix::from_fn(n, n, |r, col| {
        traced_off
            .iter()
            .map(|t| m[(kept_off[r] + t, kept_off[col] + t)])
            .sum()
    }))
}

/// Reduced state on the `keep` factors.
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    let mat = partial_trace_matrix(&rho.mat, rho.layout.dims(), keep)?;
    let mut keep_sorted = keep.to_vec();
    keep_sorted.sort_unstable();
    keep_sorted.dedup();
    let layout = SystemLayout::new(keep_sorted.iter().map(|&k| rho.layout.dims()[k]).collect())?;
    Ok(DensityMatrix::new_unchecked(layout, mat))
}

/// Transpose of one tensor factor of a raw operator.
pub fn partial_transpose_matrix(m: &ComplexMatrix, dims: &[usize], subsystem: usize) -> Result<ComplexMatrix> {
    if subsystem >= dims.len() {
        return Err(Error::Layout(format!(
            "subsystem {subsystem} out of range for {} factors",
            dims.len()
        )));
    }
    let total: usize = dims.iter().product();
    if m.nrows() != total || m.ncols() != total {
        return Err(Error::DimensionMismatch {
            expected: total,
            got: m.nrows(),
        });
    }
    let stride = strides(dims)[subsystem];
    let d = dims[subsystem];
    Ok(ComplexMatrix::from_fn(total, total, |r, col| {
        let dr = (r / stride) % d;
        let dc = (col / stride) % d;
        let r2 = r - dr * stride + dc * stride;
        let c2 = col - dc * stride + dr * stride;
        m[(r2, c2)]
    }))
}

/// `ρ^{T_s}`, which is Hermitian but generally not PSD.
pub fn partial_transpose(rho: &DensityMatrix, subsystem: usize) -> Result<ComplexMatrix> {
    partial_transpose_matrix(&rho.mat, rho.layout.dims(), subsystem)
}

/// Eigenvalues below this are treated as zero in the entropy.
const ENTROPY_CLAMP: f64 = 1e-12;

/// von Neumann entropy in bits.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    rho.spectrum()
        .into_iter()
        .filter(|&l| l > ENTROPY_CLAMP)
        .map(|l| -l * l.log2())
        .sum::<f64>()
        .max(0.0)
}

#[cfg(test)]
mod tests {
    use super::super::{max_abs_diff, min_eigenvalue, trace_norm};
    use super::*;

    fn bipartite() -> SystemLayout {
        SystemLayout::bipartite(2, 2).unwrap()
    }

    fn phi_plus() -> DensityMatrix {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        DensityMatrix::pure(bipartite(), &[c(s, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(s, 0.0)]).unwrap()
    }

    fn qubit(p0: f64, coh: C64) -> DensityMatrix {
        let m = ComplexMatrix::from_row_slice(2, 2, &[c(p0, 0.0), coh, coh.conj(), c(1.0 - p0, 0.0)]);
        DensityMatrix::new(SystemLayout::new(vec![2]).unwrap(), m).unwrap()
    }

    #[test]
    fn product_of_mixed_qubits() {
        let half = DensityMatrix::maximally_mixed(SystemLayout::new(vec![2]).unwrap());
        let prod = tensor_product(&half, &half);
        assert_eq!(prod.layout().dims(), &[2, 2]);
        assert!(max_abs_diff(prod.matrix(), &(identity(4) * c(0.25, 0.0))) < 1e-15);
    }

    #[test]
    fn product_of_basis_states() {
        let l = SystemLayout::new(vec![2]).unwrap();
        let prod = tensor_product(&DensityMatrix::basis(l.clone(), 0).unwrap(), &DensityMatrix::basis(l, 1).unwrap());
        let expected = DensityMatrix::basis(bipartite(), 1).unwrap();
        assert!(max_abs_diff(prod.matrix(), expected.matrix()) < 1e-15);
    }

    #[test]
    fn kronecker_matches_double_loop() {
        let a = qubit(0.3, c(0.1, 0.2));
        let b = qubit(0.8, c(-0.2, 0.05));
        let prod = tensor_product(&a, &b);
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        let expected = a.matrix()[(i, j)] * b.matrix()[(k, l)];
                        assert_eq!(prod.matrix()[(2 * i + k, 2 * j + l)], expected);
                    }
                }
            }
        }
    }

    #[test]
    fn marginals_of_standard_states() {
        let a = qubit(0.3, c(0.1, 0.2));
        let b = qubit(0.8, c(-0.2, 0.05));
        let prod = tensor_product(&a, &b);
        let ra = partial_trace(&prod, &[0]).unwrap();
        let rb = partial_trace(&prod, &[1]).unwrap();
        assert!(max_abs_diff(ra.matrix(), a.matrix()) < 1e-15);
        assert!(max_abs_diff(rb.matrix(), b.matrix()) < 1e-15);

        let bell_a = partial_trace(&phi_plus(), &[0]).unwrap();
        assert!(max_abs_diff(bell_a.matrix(), &(identity(2) * c(0.5, 0.0))) < 1e-15);
    }

    #[test]
    fn partial_trace_errors() {
        assert!(matches!(partial_trace(&phi_plus(), &[2]), Err(Error::Layout(_))));
        assert!(matches!(partial_trace(&phi_plus(), &[]), Err(Error::Layout(_))));
        assert!(matches!(partial_transpose(&phi_plus(), 5), Err(Error::Layout(_))));
    }

    #[test]
    fn partial_trace_keeps_middle_factor() {
        // |0⟩⟨0| ⊗ σ ⊗ |1⟩⟨1|, keep the middle factor
        let l = SystemLayout::new(vec![2]).unwrap();
        let s = qubit(0.6, c(0.1, -0.3));
        let three = tensor_product(
            &tensor_product(&DensityMatrix::basis(l.clone(), 0).unwrap(), &s),
            &DensityMatrix::basis(l, 1).unwrap(),
        );
        let mid = partial_trace(&three, &[1]).unwrap();
        assert!(max_abs_diff(mid.matrix(), s.matrix()) < 1e-15);
    }

    #[test]
    fn partial_transpose_examples() {
        let pt = partial_transpose(&phi_plus(), 1).unwrap();
        assert!((min_eigenvalue(&pt).unwrap() + 0.5).abs() < 1e-12);

        let mixed = DensityMatrix::maximally_mixed(bipartite());
        let pt = partial_transpose(&mixed, 0).unwrap();
        assert!(max_abs_diff(&pt, mixed.matrix()) < 1e-15);

        let prod = tensor_product(&qubit(0.3, c(0.1, 0.2)), &qubit(0.8, c(-0.2, 0.05)));
        let pt = partial_transpose(&prod, 1).unwrap();
        assert!(min_eigenvalue(&pt).unwrap() > -1e-12);
        let back = partial_transpose_matrix(&pt, &[2, 2], 1).unwrap();
        assert_eq!(&back, prod.matrix());
    }

    #[test]
    fn trace_norm_examples() {
        let bell = phi_plus();
        assert!((trace_norm(bell.matrix()).unwrap() - 1.0).abs() < 1e-12);
        let diff = bell.matrix() - bell.matrix();
        assert!(trace_norm(&diff).unwrap().abs() < 1e-15);
        let diff = bell.matrix() - identity(4) * c(0.25, 0.0);
        assert!((trace_norm(&diff).unwrap() - 1.5).abs() < 1e-12);
    }

    #[test]
    fn entropy_examples() {
        assert!(von_neumann_entropy(&phi_plus()).abs() < 1e-12);
        let mixed = DensityMatrix::maximally_mixed(bipartite());
        assert!((von_neumann_entropy(&mixed) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn validation_reports_trace_deviation() {
        let m = identity(4) * c(0.225, 0.0);
        let err = DensityMatrix::new(bipartite(), m).unwrap_err();
        assert_eq!(err.to_string(), "trace deviates by 1.0e-1");
    }

    #[test]
    fn validation_rejects_bad_matrices() {
        let mut m = identity(4) * c(0.25, 0.0);
        m[(0, 1)] = c(0.1, 0.0);
        assert!(matches!(DensityMatrix::new(bipartite(), m), Err(Error::NotHermitian(_))));

        let m = super::super::diag(&[1.5, -0.5, 0.0, 0.0]);
        assert!(matches!(DensityMatrix::new(bipartite(), m), Err(Error::NotPsd(_))));

        let m = identity(3) * c(1.0 / 3.0, 0.0);
        assert!(matches!(
            DensityMatrix::new(bipartite(), m),
            Err(Error::DimensionMismatch { .. })
        ));

        let mut m = identity(4) * c(0.25, 0.0);
        m[(2, 2)] = c(f64::NAN, 0.0);
        assert!(matches!(
            DensityMatrix::new(bipartite(), m),
            Err(Error::NonFinite { row: 2, col: 2 })
        ));
    }
}
