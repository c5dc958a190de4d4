//! Solvers for s-rectangular robust Markov decision processes whose
//! ambiguity sets are φ-divergence balls around a nominal kernel.
//!
//! The robust Bellman update of one state is reduced to a bisection over its
//! value `θ`; each bisection step solves one generalized projection
//!
//! ```text
//!     min d(p, p̄)  s.t.  bᵀp ≤ θ,  p ∈ Δ_S
//! ```
//!
//! per action. [`projection`] implements those projections for KL, Burg,
//! variation and χ² divergences; [`bellman`] builds the operator, robust value
//! iteration and policy extraction on top. [`oracle`] holds slow brute-force
//! references used by the tests and the benchmark harness.
//!
//! ```
//! use rmdp::{project, DivergenceKind, ProjectionQuery};
//!
//! let q = ProjectionQuery::new(vec![0.5, 0.5], vec![0.0, 1.0], 0.25, 1e-9).unwrap();
//! let r = project(DivergenceKind::ChiSquared, &q).unwrap();
//! assert!((r.lower - 0.25).abs() < 1e-12);
//! ```

pub mod bellman;
pub mod bench;
pub mod cli;
pub mod divergence;
pub mod error;
pub mod format;
pub mod instancegen;
pub mod model;
pub mod oracle;
pub mod projection;

pub use bellman::{
    evaluate_policy_robust, extract_policy, nominal_bellman, nominal_value_iteration, robust_bellman,
    robust_bellman_state, robust_value_iteration, BellmanOutcome, PolicyValue, Termination, ViReport,
};
pub use divergence::{divergence, dual_objective, phi, phi_conjugate, ConjugateValue};
pub use error::{Error, Result};
pub use format::{read_instance, write_instance};
pub use model::{
    validate, BisectionTrace, DivergenceKind, InstanceData, MdpInstance, Policy, ProjectionQuery, ProjectionResult,
    ProjectionStatus, ValueVector, Violation,
};
pub use projection::{project, project_burg, project_chi2, project_kl, project_variation};
