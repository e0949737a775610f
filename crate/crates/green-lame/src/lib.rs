//! Numerical study of the multiple Green function `G_n` on a flat torus and
//! of the hyperelliptic Lamé curve attached to it.
//!
//! The crate evaluates Weierstrass elliptic functions through rapidly
//! convergent theta series, builds the torus Green function `G` (and the
//! n-point energy `G_n`) on top of them, locates the trivial critical
//! points of `G_n` (the branch points of the Lamé curve `Y_n`), and computes
//! two quantities attached to each branch point `p`:
//!
//! * `D(p)` — the bubbling-rate invariant, by three independent routes
//!   (closed form, quasi-period area form, regularized quadrature of the
//!   defining integral), and
//! * `H(p) = det D²G_n(p)` — the full `2n × 2n` Hessian determinant,
//!
//! together with the proportionality constant `c_p ≥ 0` that ties them via
//! `H(p) = (-1)^n c_p D(p)`. Every identity in the chain is exposed as a
//! defect that can be measured, reported and gated on.
//!
//! Conventions: lattice `Λ = Z + Z·tau` with `Im tau > 0`, periods
//! `ω₁ = 1`, `ω₂ = tau`, `ω₃ = 1 + tau`, and `e_k = ℘(ω_k/2)`.

pub mod adjunction;
pub mod branch;
pub mod dinv;
pub mod elliptic;
pub mod green;
pub mod lame;
mod linalg;
pub mod oracle;
pub mod report;
pub mod tol;

pub use adjunction::{c_p, det_hessian, hessian_gn, jg_bridge_defect, verify_adjunction, AdjunctionReport};
pub use branch::{enumerate_branch_points, solve_branch_point, BranchPointData, BranchTemplate};
pub use dinv::{d_all, d_area_form, d_closed_form, d_quadrature, phi, phi_jacobian, DResult};
pub use elliptic::{make_lattice, Lattice, TorusPoint};
pub use lame::{newton_on_curve, Configuration, CurvePointData};
pub use report::{verify_tau, InvariantReport};

/// Complex scalar used throughout.
pub type C = num_complex::Complex64;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("Im tau must be positive, got tau = {0}")]
    InvalidTau(C),
    #[error("evaluation {dist:.3e} from a lattice point (allowed distance {min:.1e})")]
    NearPole { dist: f64, min: f64 },
    #[error("degenerate configuration: {0}")]
    Degenerate(String),
    #[error("invalid configuration: {0}")]
    InvalidConfiguration(String),
    #[error("Newton did not converge after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("singular Jacobian in Newton step (near a singular point of the curve)")]
    SingularJacobian,
    #[error("inconsistent {what}: spread {spread:.3e} exceeds {tol:.1e}")]
    Inconsistent { what: &'static str, spread: f64, tol: f64 },
    #[error("unsupported n = {0} for this operation")]
    UnsupportedN(usize),
    #[error("template violation: {0}")]
    TemplateViolation(String),
    #[error("quadrature budget of {0} evaluations exceeded")]
    QuadratureBudget(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
