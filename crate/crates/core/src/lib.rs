//! Necessary conditions for the quantum marginal problem.
//!
//! A bipartite state `ρ_AB` has a *k-symmetric extension* if some state on
//! `A B_1 .. B_k` has `ρ_AB` as every `A B_i` marginal, and a *k-bosonic
//! extension* if that state can in addition be supported on the symmetric
//! subspace of the B's. This crate builds derived states whose separability
//! is necessary for either kind of extension, tests them with the partial
//! transpose, and cross-checks the verdicts against closed-form families and
//! an alternating-projections feasibility oracle.
//!
//! ```
//! use qmarginal::criteria::{symmetric_extension_verdict, ExtensionProblem, Status};
//! use qmarginal::families::{werner_state, WernerParams};
//!
//! let rho = werner_state(&WernerParams::new(2, -0.8)?);
//! let verdict = symmetric_extension_verdict(&ExtensionProblem::symmetric(rho, 2)?)?;
//! assert_eq!(verdict.status, Status::Violated);
//! # Ok::<(), qmarginal::Error>(())
//! ```

pub mod consistency;
pub mod criteria;
mod error;
pub mod families;
pub mod linalg;
pub mod oracle;
pub mod random;
pub mod statefile;
pub mod sweep;
pub mod volume;

pub use error::{Error, Result};

// The guide's code blocks run as doctests, one module per chapter.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/states.md")]
    mod states {}
    #[doc = include_str!("../../../book/src/criteria.md")]
    mod criteria {}
    #[doc = include_str!("../../../book/src/families.md")]
    mod families {}
    #[doc = include_str!("../../../book/src/consistency.md")]
    mod consistency {}
    #[doc = include_str!("../../../book/src/oracle.md")]
    mod oracle {}
    #[doc = include_str!("../../../book/src/sweeps.md")]
    mod sweeps {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
