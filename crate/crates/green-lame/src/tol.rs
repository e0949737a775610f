//! Central tolerances. The underlying theory fixes no numerical precision;
//! these are artifact choices sized against f64 theta-series accuracy
//! (~1e-14 relative) with margin for accumulation.

/// Relative accuracy contract of the elliptic kernel away from poles.
pub const KERNEL_REL: f64 = 1e-12;

/// Hard floor: ℘, ℘', ℘'', ζ refuse to evaluate closer than this to Λ.
pub const POLE_DISTANCE: f64 = 1e-3;

/// Distance at which the Green-function family treats z as a lattice point.
pub const GREEN_POLE_DISTANCE: f64 = 1e-9;

/// Discarded q-series tail bound used to pick the nome cutoff.
pub const NOME_TAIL: f64 = 1e-16;

/// |q| above which convergence is flagged as slow (no SL(2,Z) reduction).
pub const SLOW_NOME: f64 = 0.9;

/// Newton acceptance residual on curve/branch-point systems.
pub const NEWTON_TOL: f64 = 1e-10;

/// Maximum Newton iterations.
pub const NEWTON_MAX_ITER: usize = 50;

/// Armijo backtracking: factor 1/2, at most this many halvings.
pub const NEWTON_MAX_HALVINGS: usize = 12;

/// Two indices form a ± pair when |p_i + p_j| mod Λ is below this; 2-torsion
/// when |2 p_i| mod Λ is. Newton residuals are <= 1e-10, two orders of margin.
pub const PAIR_DETECT: f64 = 1e-8;

/// Branch-point dedup distance on the torus.
pub const DEDUP_DISTANCE: f64 = 1e-6;

/// Relative spread allowed across the n evaluations of C(a) on the curve.
pub const C_SPREAD_REL: f64 = 1e-9;

/// Allowed spread of log K(z) + Σ 2 log|℘(z) - ℘(p_i)| across sample points.
pub const EXP_C_SPREAD: f64 = 1e-8;

/// Allowed mismatch between closed-form quasi-periods of L_p and measured ones.
pub const CHI_AGREEMENT: f64 = 1e-9;

/// n = 2 family merge test: the two ℘(q) = ±sqrt(g2/12) families are treated
/// as one (singular torus) when |sqrt(g2/12)| < this times max_k |e_k|.
pub const SINGULAR_WP_REL: f64 = 1e-3;

/// Default absolute target for the quadrature route of D.
pub const QUAD_ABS_TARGET: f64 = 1e-7;

/// Default evaluation budget for one quadrature of D.
pub const QUAD_BUDGET: usize = 40_000_000;

/// Base finite-difference step (used with Richardson elimination).
pub const FD_STEP: f64 = 1e-5;

/// Condition number above which determinants carry an ill-conditioned warning.
pub const ILL_CONDITIONED: f64 = 1e12;
