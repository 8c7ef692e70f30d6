//! C ABI over the exact-solution and energy kernels in `rarewave`.
//!
//! Conventions, uniform across the surface:
//!
//! * Handles (`RwGas`, `RwSolution`) are opaque, heap-allocated, and freed
//!   exactly once with their `_free` function. Freeing a null pointer is a
//!   no-op. Handles are immutable after construction, so sharing one across
//!   threads is safe.
//! * Every fallible call returns an [`RwStatus`] and writes results through
//!   out-pointers only on `Ok`. On any other status the out-pointers are
//!   left untouched.
//! * Panics never unwind across the boundary; they surface as
//!   [`RwStatus::Panic`].

// The safety contract is the same for every entry point (valid-or-null
// pointers, out-pointers with room for the advertised count) and is stated
// once above instead of per function.
#![allow(clippy::missing_safety_doc)]

use std::ffi::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};

use rarewave::energy;
use rarewave::gas::{GasError, GasParams};
use rarewave::riemann::{
    solve_shock_free, RiemannData, RiemannError, RiemannState, ShockFreeSolution,
};

/// Result of every fallible call. Zero is success; everything else
/// identifies the first reason the call could not complete.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RwStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// A numeric argument was rejected (nonpositive density or temperature,
    /// nonfinite input, nonpositive heat capacity, ...).
    InvalidArgument = 2,
    /// The two end states do not lie on one isentrope.
    EntropyMismatch = 3,
    /// The end states need a compressive wave; no shock-free solution exists.
    ShockRequired = 4,
    /// The fans would pull the middle sound speed to or below zero.
    VacuumFormation = 5,
    /// A sampling time was negative or NaN.
    NegativeTime = 6,
    /// The underlying implementation panicked; the handle is still valid
    /// but the call performed no work.
    Panic = 7,
}

/// Opaque gas description: heat capacity and derived constants.
pub struct RwGas(GasParams);

/// Opaque exact shock-free solution of a Riemann problem.
pub struct RwSolution(ShockFreeSolution);

fn gas_status(_: &GasError) -> RwStatus {
    // every gas-level failure is a rejected argument
    RwStatus::InvalidArgument
}

fn riemann_status(e: &RiemannError) -> RwStatus {
    match e {
        RiemannError::EntropyMismatch { .. } => RwStatus::EntropyMismatch,
        RiemannError::ShockRequired { .. } => RwStatus::ShockRequired,
        RiemannError::VacuumFormation { .. } => RwStatus::VacuumFormation,
        RiemannError::NegativeTime(_) => RwStatus::NegativeTime,
        RiemannError::Gas(g) => gas_status(g),
    }
}

fn guarded<F: FnOnce() -> RwStatus>(f: F) -> RwStatus {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or(RwStatus::Panic)
}

/// Version of the library, as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn rw_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Static NUL-terminated description of a status code.
#[no_mangle]
pub extern "C" fn rw_status_message(status: RwStatus) -> *const c_char {
    let msg: &'static str = match status {
        RwStatus::Ok => "ok\0",
        RwStatus::NullPointer => "required pointer was null\0",
        RwStatus::InvalidArgument => "argument rejected\0",
        RwStatus::EntropyMismatch => "end states are not on one isentrope\0",
        RwStatus::ShockRequired => "data require a shock\0",
        RwStatus::VacuumFormation => "data open a vacuum\0",
        RwStatus::NegativeTime => "time must be nonnegative\0",
        RwStatus::Panic => "internal panic\0",
    };
    msg.as_ptr() as *const c_char
}

/// Create a gas with heat capacity `c_v > 0`. On success writes a handle
/// that must be released with `rw_gas_free`.
#[no_mangle]
pub unsafe extern "C" fn rw_gas_new(c_v: f64, out: *mut *mut RwGas) -> RwStatus {
    if out.is_null() {
        return RwStatus::NullPointer;
    }
    guarded(|| match GasParams::new(c_v) {
        Ok(gas) => {
            *out = Box::into_raw(Box::new(RwGas(gas)));
            RwStatus::Ok
        }
        Err(e) => gas_status(&e),
    })
}

#[no_mangle]
pub unsafe extern "C" fn rw_gas_free(gas: *mut RwGas) {
    if !gas.is_null() {
        drop(Box::from_raw(gas));
    }
}

/// Adiabatic exponent `(c_v + 1) / c_v`.
#[no_mangle]
pub unsafe extern "C" fn rw_gas_gamma(gas: *const RwGas, out: *mut f64) -> RwStatus {
    if gas.is_null() || out.is_null() {
        return RwStatus::NullPointer;
    }
    *out = (*gas).0.gamma();
    RwStatus::Ok
}

/// Heat capacity the gas was built with.
#[no_mangle]
pub unsafe extern "C" fn rw_gas_heat_capacity(gas: *const RwGas, out: *mut f64) -> RwStatus {
    if gas.is_null() || out.is_null() {
        return RwStatus::NullPointer;
    }
    *out = (*gas).0.c_v();
    RwStatus::Ok
}

/// Specific entropy `c_v ln(theta) - ln(rho)` of a positive state.
#[no_mangle]
pub unsafe extern "C" fn rw_entropy(
    gas: *const RwGas,
    rho: f64,
    theta: f64,
    out: *mut f64,
) -> RwStatus {
    if gas.is_null() || out.is_null() {
        return RwStatus::NullPointer;
    }
    guarded(|| match (*gas).0.entropy(rho, theta) {
        Ok(v) => {
            *out = v;
            RwStatus::Ok
        }
        Err(e) => gas_status(&e),
    })
}

/// Pressure `rho * theta` of a positive state.
#[no_mangle]
pub unsafe extern "C" fn rw_pressure(
    gas: *const RwGas,
    rho: f64,
    theta: f64,
    out: *mut f64,
) -> RwStatus {
    if gas.is_null() || out.is_null() {
        return RwStatus::NullPointer;
    }
    guarded(|| match (*gas).0.pressure(rho, theta) {
        Ok(v) => {
            *out = v;
            RwStatus::Ok
        }
        Err(e) => gas_status(&e),
    })
}

/// Temperature of the state with density `rho` on the isentrope `s`.
#[no_mangle]
pub unsafe extern "C" fn rw_temperature_from_entropy(
    gas: *const RwGas,
    rho: f64,
    s: f64,
    out: *mut f64,
) -> RwStatus {
    if gas.is_null() || out.is_null() {
        return RwStatus::NullPointer;
    }
    guarded(|| match (*gas).0.temperature_from_entropy(rho, s) {
        Ok(v) => {
            *out = v;
            RwStatus::Ok
        }
        Err(e) => gas_status(&e),
    })
}

/// Sound speed of the state with density `rho` on the isentrope `s`.
#[no_mangle]
pub unsafe extern "C" fn rw_sound_speed(
    gas: *const RwGas,
    rho: f64,
    s: f64,
    out: *mut f64,
) -> RwStatus {
    if gas.is_null() || out.is_null() {
        return RwStatus::NullPointer;
    }
    guarded(|| match (*gas).0.sound_speed(rho, s) {
        Ok(v) => {
            *out = v;
            RwStatus::Ok
        }
        Err(e) => gas_status(&e),
    })
}

/// Solve the Riemann problem with end states `(rho, theta, u)` left and
/// right of the origin. Succeeds only when the exact solution is a pair of
/// rarefaction fans; the statuses `RW_STATUS_ENTROPY_MISMATCH`,
/// `RW_STATUS_SHOCK_REQUIRED` and `RW_STATUS_VACUUM_FORMATION` report the
/// three ways the data can fail that requirement. On success writes a
/// handle that must be released with `rw_solution_free`; the gas handle may
/// be freed immediately afterwards.
#[no_mangle]
pub unsafe extern "C" fn rw_solution_new(
    gas: *const RwGas,
    left_rho: f64,
    left_theta: f64,
    left_u: f64,
    right_rho: f64,
    right_theta: f64,
    right_u: f64,
    out: *mut *mut RwSolution,
) -> RwStatus {
    if gas.is_null() || out.is_null() {
        return RwStatus::NullPointer;
    }
    guarded(|| {
        let data = RiemannData {
            left: RiemannState {
                rho: left_rho,
                theta: left_theta,
                u: left_u,
            },
            right: RiemannState {
                rho: right_rho,
                theta: right_theta,
                u: right_u,
            },
        };
        match solve_shock_free(&data, &(*gas).0) {
            Ok(sol) => {
                *out = Box::into_raw(Box::new(RwSolution(sol)));
                RwStatus::Ok
            }
            Err(e) => riemann_status(&e),
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn rw_solution_free(sol: *mut RwSolution) {
    if !sol.is_null() {
        drop(Box::from_raw(sol));
    }
}

/// Common specific entropy of the whole wave.
#[no_mangle]
pub unsafe extern "C" fn rw_solution_entropy(sol: *const RwSolution, out: *mut f64) -> RwStatus {
    if sol.is_null() || out.is_null() {
        return RwStatus::NullPointer;
    }
    *out = (*sol).0.entropy;
    RwStatus::Ok
}

/// Constant state between the two fans.
#[no_mangle]
pub unsafe extern "C" fn rw_solution_middle(
    sol: *const RwSolution,
    rho: *mut f64,
    theta: *mut f64,
    u: *mut f64,
) -> RwStatus {
    if sol.is_null() || rho.is_null() || theta.is_null() || u.is_null() {
        return RwStatus::NullPointer;
    }
    let m = (*sol).0.middle;
    *rho = m.rho;
    *theta = m.theta;
    *u = m.u;
    RwStatus::Ok
}

/// Similarity coordinates `xi = x1 / t` of the four fan edges, ordered
/// `fan1_lo <= fan1_hi <= fan2_lo <= fan2_hi`.
#[no_mangle]
pub unsafe extern "C" fn rw_solution_fan_edges(
    sol: *const RwSolution,
    fan1_lo: *mut f64,
    fan1_hi: *mut f64,
    fan2_lo: *mut f64,
    fan2_hi: *mut f64,
) -> RwStatus {
    if sol.is_null()
        || fan1_lo.is_null()
        || fan1_hi.is_null()
        || fan2_lo.is_null()
        || fan2_hi.is_null()
    {
        return RwStatus::NullPointer;
    }
    let s = &(*sol).0;
    *fan1_lo = s.fan1.0;
    *fan1_hi = s.fan1.1;
    *fan2_lo = s.fan2.0;
    *fan2_hi = s.fan2.1;
    RwStatus::Ok
}

/// State of the self-similar profile at `xi = x1 / t`. Total over all real
/// `xi`; NaN is rejected.
#[no_mangle]
pub unsafe extern "C" fn rw_solution_sample(
    sol: *const RwSolution,
    xi: f64,
    rho: *mut f64,
    theta: *mut f64,
    u: *mut f64,
) -> RwStatus {
    if sol.is_null() || rho.is_null() || theta.is_null() || u.is_null() {
        return RwStatus::NullPointer;
    }
    if xi.is_nan() {
        return RwStatus::InvalidArgument;
    }
    guarded(|| {
        let st = (*sol).0.sample(xi);
        *rho = st.rho;
        *theta = st.theta;
        *u = st.u;
        RwStatus::Ok
    })
}

/// Profile at time `t >= 0` on `len` stations `x1[0..len]`, written to the
/// three parallel output arrays. The pointers may be null only when
/// `len == 0`. At `t == 0` the profile is the initial jump.
#[no_mangle]
pub unsafe extern "C" fn rw_solution_sample_field(
    sol: *const RwSolution,
    t: f64,
    x1: *const f64,
    len: usize,
    rho: *mut f64,
    theta: *mut f64,
    u: *mut f64,
) -> RwStatus {
    if sol.is_null() {
        return RwStatus::NullPointer;
    }
    if len == 0 {
        // still reject a bad time so the status does not depend on len
        if t < 0.0 || t.is_nan() {
            return RwStatus::NegativeTime;
        }
        return RwStatus::Ok;
    }
    if x1.is_null() || rho.is_null() || theta.is_null() || u.is_null() {
        return RwStatus::NullPointer;
    }
    guarded(|| {
        let xs = std::slice::from_raw_parts(x1, len);
        match (*sol).0.sample_field(t, xs) {
            Ok(states) => {
                for (k, st) in states.iter().enumerate() {
                    *rho.add(k) = st.rho;
                    *theta.add(k) = st.theta;
                    *u.add(k) = st.u;
                }
                RwStatus::Ok
            }
            Err(e) => riemann_status(&e),
        }
    })
}

/// Relative energy density of the state `(rho, theta, (u1, u2))` against
/// the reference `(ref_rho, ref_theta, (ref_u1, ref_u2))`. Nonnegative,
/// and zero exactly at the reference.
#[no_mangle]
pub unsafe extern "C" fn rw_relative_energy_density(
    gas: *const RwGas,
    rho: f64,
    theta: f64,
    u1: f64,
    u2: f64,
    ref_rho: f64,
    ref_theta: f64,
    ref_u1: f64,
    ref_u2: f64,
    out: *mut f64,
) -> RwStatus {
    if gas.is_null() || out.is_null() {
        return RwStatus::NullPointer;
    }
    guarded(|| {
        match energy::relative_energy_density(
            &(*gas).0,
            rho,
            theta,
            &[u1, u2],
            ref_rho,
            ref_theta,
            &[ref_u1, ref_u2],
        ) {
            Ok(v) => {
                *out = v;
                RwStatus::Ok
            }
            Err(e) => gas_status(&e),
        }
    })
}

/// Reduced production bound `G(y, z)` for heat capacity `c_v`; nonpositive
/// on its whole domain `y > 0`.
#[no_mangle]
pub unsafe extern "C" fn rw_reduced_bound(c_v: f64, y: f64, z: f64, out: *mut f64) -> RwStatus {
    if out.is_null() {
        return RwStatus::NullPointer;
    }
    if !(c_v.is_finite() && c_v > 0.0) || !(y.is_finite() && y > 0.0) || !z.is_finite() {
        return RwStatus::InvalidArgument;
    }
    *out = energy::reduced_bound(c_v, y, z);
    RwStatus::Ok
}

/// Entropy-production bound of the state `(rho, s)` against the reference
/// `(ref_rho, ref_s)`, including the reference-temperature factor.
#[no_mangle]
pub unsafe extern "C" fn rw_production_bound(
    gas: *const RwGas,
    rho: f64,
    s: f64,
    ref_rho: f64,
    ref_s: f64,
    out: *mut f64,
) -> RwStatus {
    if gas.is_null() || out.is_null() {
        return RwStatus::NullPointer;
    }
    guarded(
        || match energy::production_bound(&(*gas).0, rho, s, ref_rho, ref_s) {
            Ok(v) => {
                *out = v;
                RwStatus::Ok
            }
            Err(e) => gas_status(&e),
        },
    )
}
