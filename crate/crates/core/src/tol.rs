//! Tolerance constants shared by constructors, checks and tests.

/// Structural checks: normalization and Hermiticity flags.
pub const STRUCTURAL: f64 = 1e-10;

/// Algebraic identities: orthonormality, reconstructions, round trips.
pub const ALGEBRAIC: f64 = 1e-8;

/// Relative width used to group eigenvalues into degenerate clusters.
pub const DEGENERACY: f64 = 1e-9;

/// Eigenpair residual bound, scaled by `1 + |E|`.
pub const EIGEN_RESIDUAL: f64 = 1e-6;

/// Schmidt coefficients below this fraction of the largest are discarded.
pub const SCHMIDT_CUTOFF: f64 = 1e-12;

/// Minimum captured weight for an eigenbasis expansion.
pub const CAPTURED_WEIGHT: f64 = 0.999;

/// Probabilities at or below this are treated as zero by `collapse`.
pub const ZERO_PROBABILITY: f64 = 1e-14;

/// RMS residual (radians) allowed in the unwrapped-phase line fit.
pub const PHASE_FIT_RESIDUAL: f64 = 1e-6;

/// Largest `dt · max gap / ħ` accepted by gap spectroscopy.
pub const GAP_RESOLUTION: f64 = 0.05;
