//! Exact shock-free solutions of the 1-D Riemann problem.
//!
//! For end states on a single isentrope whose velocity jump opens rather
//! than compresses, the exact solution consists of two rarefaction fans
//! joined by a constant middle state. In the self-similar variable
//! `xi = x1 / t` the wave pattern is
//!
//! ```text
//!   left | 1-fan | middle | 2-fan | right
//!        xi1-  xi1+     xi2-   xi2+
//! ```
//!
//! with `xi1- = U_L - c_L`, `xi1+ = U_m - c_m`, `xi2- = U_m + c_m`,
//! `xi2+ = U_R + c_R`. Inside a fan the sound speed is affine in `xi` and
//! the velocity follows from `xi = U -+ c`, which keeps the corresponding
//! Riemann invariant `U +- 2c/(gamma - 1)` exactly constant.

use crate::gas::{GasError, GasParams};
use crate::tol;
use serde::{Deserialize, Serialize};

/// One-dimensional state `(rho, theta, u)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiemannState {
    pub rho: f64,
    pub theta: f64,
    pub u: f64,
}

/// End states of the Riemann problem, left of and right of `x1 = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RiemannData {
    pub left: RiemannState,
    pub right: RiemannState,
}

/// Why a shock-free solution could not be built, or a sampling call was
/// outside its domain.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RiemannError {
    #[error("end states are not on one isentrope: s_left = {s_left}, s_right = {s_right} (tolerance {tol})")]
    EntropyMismatch { s_left: f64, s_right: f64, tol: f64 },
    #[error(
        "data require a shock: middle sound speed {c_middle} exceeds min(c_L, c_R) = {c_bound}"
    )]
    ShockRequired { c_middle: f64, c_bound: f64 },
    #[error("data open a vacuum: middle sound speed {c_middle} is not positive")]
    VacuumFormation { c_middle: f64 },
    #[error("time must be nonnegative, got {0}")]
    NegativeTime(f64),
    #[error(transparent)]
    Gas(#[from] GasError),
}

/// The common entropy of the two end states, or an `EntropyMismatch`.
///
/// Returns the left state's entropy; the right state may differ by at most
/// [`tol::ENTROPY_MATCH`].
pub fn common_entropy(data: &RiemannData, gas: &GasParams) -> Result<f64, RiemannError> {
    let s_left = gas.entropy(data.left.rho, data.left.theta)?;
    let s_right = gas.entropy(data.right.rho, data.right.theta)?;
    if (s_left - s_right).abs() > tol::ENTROPY_MATCH {
        return Err(RiemannError::EntropyMismatch {
            s_left,
            s_right,
            tol: tol::ENTROPY_MATCH,
        });
    }
    Ok(s_left)
}

/// Exact two-rarefaction solution. All stored temperatures are recomputed
/// from the common entropy, so `theta = rho^{1/c_v} e^{S/c_v}` holds at
/// every stored state to roundoff even when the input entropies differ
/// within tolerance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShockFreeSolution {
    pub gas: GasParams,
    /// Common specific entropy `S` of the whole wave.
    pub entropy: f64,
    pub left: RiemannState,
    pub middle: RiemannState,
    pub right: RiemannState,
    /// `xi` extent of the left-going fan, `(U_L - c_L, U_m - c_m)`.
    pub fan1: (f64, f64),
    /// `xi` extent of the right-going fan, `(U_m + c_m, U_R + c_R)`.
    pub fan2: (f64, f64),
}

/// A sampled point together with the spatial slopes of the self-similar
/// profile at fixed `t > 0`. Slopes are identically zero outside the open
/// fan intervals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampledPoint {
    pub state: RiemannState,
    pub du_dx: f64,
    pub dtheta_dx: f64,
}

/// Build the exact shock-free solution, or report why none exists.
///
/// The middle sound speed is the closed form
/// `c_m = (c_L + c_R)/2 - (gamma - 1)(U_R - U_L)/4`; the data are rejected
/// with `ShockRequired` when `c_m` exceeds `min(c_L, c_R)` (one of the
/// "fans" would compress) and with `VacuumFormation` when `c_m <= 0`.
pub fn solve_shock_free(
    data: &RiemannData,
    gas: &GasParams,
) -> Result<ShockFreeSolution, RiemannError> {
    let s = common_entropy(data, gas)?;
    let gm1 = gas.gamma() - 1.0;
    let c_l = gas.sound_speed(data.left.rho, s)?;
    let c_r = gas.sound_speed(data.right.rho, s)?;
    let u_l = data.left.u;
    let u_r = data.right.u;

    let c_m = 0.5 * (c_l + c_r) - 0.25 * gm1 * (u_r - u_l);
    let c_bound = c_l.min(c_r);
    if c_m > c_bound + tol::SHOCK_FREE_REL * (c_l + c_r) {
        return Err(RiemannError::ShockRequired {
            c_middle: c_m,
            c_bound,
        });
    }
    if c_m <= 0.0 {
        return Err(RiemannError::VacuumFormation { c_middle: c_m });
    }

    let u_m = u_l + 2.0 * (c_l - c_m) / gm1;
    let on_isentrope = |rho: f64| gas.temperature_from_entropy(rho, s);
    let state = |rho: f64, u: f64| -> Result<RiemannState, RiemannError> {
        Ok(RiemannState {
            rho,
            theta: on_isentrope(rho)?,
            u,
        })
    };
    // theta = c^2 / gamma on the isentrope, inverted for the density.
    let rho_m = (c_m * c_m / (gas.gamma() * (s / gas.c_v()).exp())).powf(gas.c_v());

    let fan1 = (u_l - c_l, (u_m - c_m).max(u_l - c_l));
    let fan2 = ((u_m + c_m).min(u_r + c_r), u_r + c_r);
    Ok(ShockFreeSolution {
        gas: *gas,
        entropy: s,
        left: state(data.left.rho, u_l)?,
        middle: state(rho_m, u_m)?,
        right: state(data.right.rho, u_r)?,
        fan1,
        fan2,
    })
}

impl ShockFreeSolution {
    /// Sound speeds `(c_L, c_m, c_R)` of the stored states. On the common
    /// isentrope `c^2 = gamma * theta`.
    pub fn sound_speeds(&self) -> (f64, f64, f64) {
        let g = self.gas.gamma();
        (
            (g * self.left.theta).sqrt(),
            (g * self.middle.theta).sqrt(),
            (g * self.right.theta).sqrt(),
        )
    }

    /// State at the self-similar coordinate `xi = x1 / t`.
    ///
    /// Piecewise: left state up to and including `xi1-`, the 1-fan profile
    /// on the open interval, the middle state on the closed interval
    /// between the fans, the 2-fan profile, and the right state from
    /// `xi2+` on. Continuous across every edge.
    pub fn sample(&self, xi: f64) -> RiemannState {
        if xi <= self.fan1.0 {
            self.left
        } else if xi < self.fan1.1 {
            self.fan_state(xi, Fan::Left)
        } else if xi <= self.fan2.0 {
            self.middle
        } else if xi < self.fan2.1 {
            self.fan_state(xi, Fan::Right)
        } else {
            self.right
        }
    }

    /// State and profile slopes at position `x1`, time `t > 0`.
    pub fn sample_with_slopes(&self, t: f64, x1: f64) -> Result<SampledPoint, RiemannError> {
        if t < 0.0 || t.is_nan() {
            return Err(RiemannError::NegativeTime(t));
        }
        if t == 0.0 {
            // Heaviside data; slopes vanish almost everywhere.
            return Ok(SampledPoint {
                state: if x1 <= 0.0 { self.left } else { self.right },
                du_dx: 0.0,
                dtheta_dx: 0.0,
            });
        }
        let xi = x1 / t;
        let state = self.sample(xi);
        let in_fan1 = xi > self.fan1.0 && xi < self.fan1.1;
        let in_fan2 = xi > self.fan2.0 && xi < self.fan2.1;
        if !(in_fan1 || in_fan2) {
            return Ok(SampledPoint {
                state,
                du_dx: 0.0,
                dtheta_dx: 0.0,
            });
        }
        // Inside a fan, c is affine in xi with slope -+(gamma-1)/(gamma+1)
        // and U = xi +- c, so dU/dxi = 2/(gamma+1) on both fans while
        // dTheta/dxi = 2 c c'/gamma changes sign with the fan. Spatial
        // slopes at fixed t pick up a factor 1/t.
        let g = self.gas.gamma();
        let c = (g * state.theta).sqrt();
        let dc_dxi = if in_fan1 {
            -(g - 1.0) / (g + 1.0)
        } else {
            (g - 1.0) / (g + 1.0)
        };
        Ok(SampledPoint {
            state,
            du_dx: 2.0 / ((g + 1.0) * t),
            dtheta_dx: 2.0 * c * dc_dxi / (g * t),
        })
    }

    /// Sample the wave at time `t >= 0` on the given `x1` stations.
    /// `t = 0` returns the Heaviside data (left state for `x1 <= 0`).
    pub fn sample_field(&self, t: f64, x1: &[f64]) -> Result<Vec<RiemannState>, RiemannError> {
        if t < 0.0 || t.is_nan() {
            return Err(RiemannError::NegativeTime(t));
        }
        if t == 0.0 {
            return Ok(x1
                .iter()
                .map(|&x| if x <= 0.0 { self.left } else { self.right })
                .collect());
        }
        Ok(x1.iter().map(|&x| self.sample(x / t)).collect())
    }

    fn fan_state(&self, xi: f64, fan: Fan) -> RiemannState {
        let g = self.gas.gamma();
        let (c_l, _, c_r) = self.sound_speeds();
        let c = match fan {
            Fan::Left => (g - 1.0) / (g + 1.0) * (self.left.u - xi) + 2.0 * c_l / (g + 1.0),
            Fan::Right => (g - 1.0) / (g + 1.0) * (xi - self.right.u) + 2.0 * c_r / (g + 1.0),
        };
        let u = match fan {
            Fan::Left => xi + c,
            Fan::Right => xi - c,
        };
        // theta = c^2/gamma on the isentrope; invert for the density.
        let theta = c * c / g;
        let rho = (theta * (-self.entropy / self.gas.c_v()).exp()).powf(self.gas.c_v());
        RiemannState { rho, theta, u }
    }
}

#[derive(Clone, Copy)]
enum Fan {
    Left,
    Right,
}
