//! Overlapping marginals `ρ_{AB_1}, .., ρ_{AB_k}` sharing the system A.
//!
//! If a global state on `A B_1 .. B_k` has these marginals, then permuting
//! the B's and averaging yields a k-symmetric extension of the average
//! marginal. The extension criteria therefore apply to the average.

use serde::Serialize;

use crate::criteria::{extension_verdict, CriterionVerdict, ExtensionProblem, Status};
use crate::error::{Error, Result};
use crate::families::{a_marginal_distance, MARGINAL_MATCH_TOL};
use crate::linalg::{c, ComplexMatrix, DensityMatrix};

/// Marginals `ρ_{AB_i}` on a common bipartite layout, `k ≥ 2` of them.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginalSet {
    marginals: Vec<DensityMatrix>,
}

impl MarginalSet {
    pub fn new(marginals: Vec<DensityMatrix>) -> Result<Self> {
        if marginals.len() < 2 {
            return Err(Error::InvalidParameter(format!(
                "need at least two marginals, got {}",
                marginals.len()
            )));
        }
        let first = marginals[0].bipartite_dims()?;
        for m in &marginals[1..] {
            let dims = m.bipartite_dims()?;
            if dims != first {
                return Err(Error::Layout(format!(
                    "marginal layouts differ: {first:?} vs {dims:?}"
                )));
            }
        }
        Ok(Self { marginals })
    }

    pub fn marginals(&self) -> &[DensityMatrix] {
        &self.marginals
    }

    pub fn k(&self) -> usize {
        self.marginals.len()
    }

    /// Largest trace distance between the first A-marginal and any other.
    pub fn a_marginal_spread(&self) -> Result<f64> {
        let first = &self.marginals[0];
        self.marginals[1..]
            .iter()
            .try_fold(0.0f64, |acc, m| Ok(acc.max(a_marginal_distance(first, m)?)))
    }
}

/// `(1/k) Σ ρ_{AB_i}` posed as a k-symmetric extension problem.
///
/// Fails with [`Error::MarginalMismatch`] when the A-marginals disagree by
/// more than [`MARGINAL_MATCH_TOL`] in trace distance.
pub fn average_marginals(ms: &MarginalSet) -> Result<ExtensionProblem> {
    let spread = ms.a_marginal_spread()?;
    if spread > MARGINAL_MATCH_TOL {
        return Err(Error::MarginalMismatch(spread));
    }
    let n = ms.marginals[0].dim();
    let mut sum = ComplexMatrix::zeros(n, n);
    for m in &ms.marginals {
        sum += m.matrix();
    }
    let avg = DensityMatrix::new_unchecked(
        ms.marginals[0].layout().clone(),
        sum / c(ms.k() as f64, 0.0),
    );
    ExtensionProblem::symmetric(avg, ms.k())
}

/// Which reasoning produced a [`ConsistencyVerdict`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConsistencyRule {
    AveragingTilde,
    AveragingHat,
    MarginalMismatch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ConsistencyStatus {
    /// The averaged marginal has no k-symmetric extension.
    Violated,
    Inconclusive,
    /// The A-marginals already disagree.
    Inconsistent,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConsistencyVerdict {
    pub status: ConsistencyStatus,
    pub rule: ConsistencyRule,
    /// Trace distance between A-marginals (largest pairwise against the first).
    pub a_marginal_distance: f64,
    /// The criterion run on the averaged marginal; absent on mismatch.
    pub verdict: Option<CriterionVerdict>,
}

/// Averages the marginals and runs the k-symmetric extension criterion.
pub fn consistency_verdict(ms: &MarginalSet) -> Result<ConsistencyVerdict> {
    let spread = ms.a_marginal_spread()?;
    let problem = match average_marginals(ms) {
        Ok(p) => p,
        Err(Error::MarginalMismatch(_)) => {
            return Ok(ConsistencyVerdict {
                status: ConsistencyStatus::Inconsistent,
                rule: ConsistencyRule::MarginalMismatch,
                a_marginal_distance: spread,
                verdict: None,
            })
        }
        Err(e) => return Err(e),
    };
    let verdict = extension_verdict(&problem)?;
    let rule = if verdict.criterion.starts_with("hat") {
        ConsistencyRule::AveragingHat
    } else {
        ConsistencyRule::AveragingTilde
    };
    Ok(ConsistencyVerdict {
        status: match verdict.status {
            Status::Violated => ConsistencyStatus::Violated,
            Status::Inconclusive => ConsistencyStatus::Inconclusive,
        },
        rule,
        a_marginal_distance: spread,
        verdict: Some(verdict),
    })
}

/// `ψ_1 + ψ_2 ≥ −1`: the averaging criterion for a pair of two-qubit
/// Werner marginals, in closed form.
pub fn werner_pentagon(psi1: f64, psi2: f64) -> bool {
    psi1 + psi2 >= -1.0
}
