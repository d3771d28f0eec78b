//! Numerical tolerances shared across the lab.
//!
//! Every tolerance used by more than one module lives here so the value and
//! its rationale are stated once.

/// Relative defect allowed when checking that a transform round trip or a
/// band projection reproduces its input. A unitary FFT pair on f64 data
/// loses a few ulps per pass; 1e-12 leaves two orders of headroom.
pub const UNITARY_DEFECT: f64 = 1e-12;

/// Relative slack for energy bookkeeping per time step: the splitting
/// substeps are exact maps, so any per-step energy increase beyond roundoff
/// indicates a bug.
pub const ENERGY_STEP_SLACK: f64 = 1e-12;

/// Relative energy drift allowed over an undamped run of 10^3 steps.
pub const CONSERVATION_DRIFT: f64 = 1e-12;

/// Default residual tolerance for the Lanczos extremal eigensolver,
/// measured against the operator norm bound.
pub const LANCZOS_TOL: f64 = 1e-10;

/// Default iteration cap for the Lanczos eigensolver.
pub const LANCZOS_MAX_ITER: usize = 500;

/// Smallest eigenvalue treated as nonzero. Below this floor the
/// observability constant is reported as unbounded rather than as noise.
pub const EIG_FLOOR: f64 = 1e-14;

/// Dense and iterative eigenvalues must agree to this multiple of the
/// iterative tolerance when both paths are feasible.
pub const DENSE_ITER_AGREE_FACTOR: f64 = 10.0;

/// Largest mask size for which the dense Gram matrix may be materialized.
pub const DENSE_GRAM_CAP: usize = 4096;

/// Mask size above which `smallest_eigenvalue` switches from the dense to
/// the iterative path when the caller does not force a method. Kept well
/// below `DENSE_GRAM_CAP`: a dense Hermitian eigensolve beyond ~10^3 rows
/// is slower than Lanczos on a single core.
pub const DENSE_AUTO_LIMIT: usize = 1024;

/// Maximum relative error of the approximate flatness search in d = 3,
/// as a fraction of the point set diameter.
pub const FLATNESS_SLACK: f64 = 0.02;

/// Distance-evaluation error budget for sampled shell manifolds, as a
/// fraction of the shell half-width β.
pub const SHELL_DISTANCE_REL: f64 = 0.01;

/// Hard cap on time steps for a single wave evolution.
pub const STEP_BUDGET: u64 = 10_000_000;
