//! Named tolerances.
//!
//! Every comparison threshold used by the library and its certification
//! suite lives here, so a retuned bound is visible in one diff hunk and the
//! test suite cannot drift away from the shipped defaults.

/// Two Riemann states are accepted as lying on one isentrope when their
/// specific entropies differ by at most this (absolute).
pub const ENTROPY_MATCH: f64 = 1e-10;

/// Slack allowed on the shock-free condition `c_m <= min(c_L, c_R)`,
/// scaled by `c_L + c_R` so the test is dimensionally sane.
pub const SHOCK_FREE_REL: f64 = 1e-12;

/// Nonpositivity threshold for the reduced bound `G` (absolute; the scan
/// maximum is exactly zero in exact arithmetic).
pub const REDUCED_BOUND_MAX: f64 = 1e-10;

/// Nonpositivity threshold for the production bound `F`, scaled by the
/// reference temperature of the scan combination.
pub const PRODUCTION_BOUND_REL: f64 = 1e-10;

/// Agreement between the scanned critical value of `G` and its closed form,
/// relative to the larger of one and the closed-form magnitude.
pub const CRITICAL_VALUE_REL: f64 = 1e-12;

/// The `y`-gradient of `G` at the interior critical point, relative to the
/// size `e^z` of the terms that cancel there.
pub const CRITICAL_GRAD_REL: f64 = 1e-12;

/// Relative agreement of the in-fan slope identity
/// `|dTheta/dU|^2 = Theta / (c_v (c_v + 1))`.
pub const SLOPE_IDENTITY_REL: f64 = 1e-10;

/// Velocity monotonicity across the sampled profile (absolute on
/// neighbouring differences).
pub const MONOTONE_U: f64 = 1e-12;

/// Young-inequality check slack, scaled by the magnitude of the majorant.
pub const YOUNG_REL: f64 = 1e-12;

/// Per-step conservation defect (change of a conserved total minus the net
/// boundary flux), relative to `max(1, |total|)`.
pub const CONSERVATION_REL: f64 = 1e-11;

/// Entropy floor slack: the discrete minimum entropy may undershoot the
/// isentrope value by at most this much on shipped cases (pure roundoff).
pub const ENTROPY_FLOOR_ABS: f64 = 1e-13;

/// Matching a requested output time when clipping time steps.
pub const TIME_EVENT: f64 = 1e-12;

/// Entropy mismatch `s - S` from a discrete field is clamped to zero when it
/// undershoots by no more than this; exact weak solutions satisfy `s >= S`
/// but cell averages may dip below by roundoff-level truncation.
pub const ENTROPY_UNDERSHOOT: f64 = 1e-12;

/// Half-width (in ln y) of the neighbourhood of y = 1 inside which the
/// z = 0 slice of the reduced bound is allowed to touch zero; outside it
/// the slice must be strictly negative.
pub const UNIQUE_ZERO_LN_NEIGHBORHOOD: f64 = 1e-6;

/// Absolute size allowed for the reduced bound at grid points inside the
/// y = 1 neighbourhood of the z = 0 slice.
pub const UNIQUE_ZERO_AT_ONE: f64 = 1e-12;

/// Strictness floor: "strictly negative" scan values must sit below minus
/// this, so a value that merely rounds to zero cannot pass.
pub const STRICT_NEGATIVE_FLOOR: f64 = 1e-15;

/// The reduced bound must fall below this at the scan corners where the
/// exponential term dominates (largest z with smallest and largest y).
pub const BOUNDARY_FAR_CORNER: f64 = -1e3;

/// The reduced bound must fall below this at the smallest-z scan corners,
/// where divergence in y is only polynomial and the default window reaches
/// values of order -10^2.
pub const BOUNDARY_NEAR_CORNER: f64 = -10.0;
