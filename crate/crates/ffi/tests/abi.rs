//! Exercises the C surface exactly as a foreign caller would: through the
//! exported symbols, raw pointers, and status codes.

use std::ffi::CStr;
use std::ptr;

use rarewave_ffi::*;

fn gas(c_v: f64) -> *mut RwGas {
    let mut out: *mut RwGas = ptr::null_mut();
    let st = unsafe { rw_gas_new(c_v, &mut out) };
    assert_eq!(st, RwStatus::Ok);
    assert!(!out.is_null());
    out
}

/// Standard case: unit states with a 0.5 velocity jump, c_v = 3/2.
fn standard_solution(g: *const RwGas) -> *mut RwSolution {
    let mut out: *mut RwSolution = ptr::null_mut();
    let st = unsafe { rw_solution_new(g, 1.0, 1.0, 0.0, 1.0, 1.0, 0.5, &mut out) };
    assert_eq!(st, RwStatus::Ok);
    assert!(!out.is_null());
    out
}

const RHO_MIDDLE: f64 = 0.8185818755128092;
const C_LEFT: f64 = 1.2909944487358056; // sqrt(5/3)

#[test]
fn version_and_status_messages_are_static_strings() {
    let v = unsafe { CStr::from_ptr(rw_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));

    let m = unsafe { CStr::from_ptr(rw_status_message(RwStatus::ShockRequired)) };
    assert!(m.to_str().unwrap().contains("shock"));
    let ok = unsafe { CStr::from_ptr(rw_status_message(RwStatus::Ok)) };
    assert_eq!(ok.to_str().unwrap(), "ok");
}

#[test]
fn gas_accessors_and_thermodynamics() {
    let g = gas(1.5);
    unsafe {
        let mut v = f64::NAN;
        assert_eq!(rw_gas_gamma(g, &mut v), RwStatus::Ok);
        assert!((v - 5.0 / 3.0).abs() < 1e-15);

        assert_eq!(rw_gas_heat_capacity(g, &mut v), RwStatus::Ok);
        assert_eq!(v, 1.5);

        assert_eq!(rw_entropy(g, 1.0, 1.0, &mut v), RwStatus::Ok);
        assert_eq!(v, 0.0);

        assert_eq!(rw_pressure(g, 2.0, 3.0, &mut v), RwStatus::Ok);
        assert_eq!(v, 6.0);

        assert_eq!(
            rw_temperature_from_entropy(g, 1.0, 0.0, &mut v),
            RwStatus::Ok
        );
        assert!((v - 1.0).abs() < 1e-15);

        assert_eq!(rw_sound_speed(g, 1.0, 0.0, &mut v), RwStatus::Ok);
        assert!((v - C_LEFT).abs() < 1e-15);

        rw_gas_free(g);
    }
}

#[test]
fn solution_exposes_middle_state_fans_and_entropy() {
    let g = gas(1.5);
    let s = standard_solution(g);
    unsafe {
        // the solution owns its data; the gas handle can go first
        rw_gas_free(g);

        let mut ent = f64::NAN;
        assert_eq!(rw_solution_entropy(s, &mut ent), RwStatus::Ok);
        assert!(ent.abs() < 1e-15);

        let (mut rho, mut theta, mut u) = (0.0, 0.0, 0.0);
        assert_eq!(
            rw_solution_middle(s, &mut rho, &mut theta, &mut u),
            RwStatus::Ok
        );
        assert!((rho - RHO_MIDDLE).abs() < 1e-13);
        assert!((u - 0.25).abs() < 1e-13);
        // middle temperature sits on the common isentrope
        assert!((theta - rho.powf(2.0 / 3.0)).abs() < 1e-13);

        let (mut a, mut b, mut c, mut d) = (0.0, 0.0, 0.0, 0.0);
        assert_eq!(
            rw_solution_fan_edges(s, &mut a, &mut b, &mut c, &mut d),
            RwStatus::Ok
        );
        assert!((a + C_LEFT).abs() < 1e-13);
        assert!((b + 0.9576611154024723).abs() < 1e-13);
        assert!((c - 1.4576611154024723).abs() < 1e-13);
        assert!((d - 1.7909944487358056).abs() < 1e-13);
        assert!(a < b && b < c && c < d);

        rw_solution_free(s);
    }
}

#[test]
fn sampling_matches_the_self_similar_profile() {
    let g = gas(1.5);
    let s = standard_solution(g);
    unsafe {
        let (mut rho, mut theta, mut u) = (0.0, 0.0, 0.0);

        // inside the left fan: xi = u - c and the left invariant u + 3c hold
        let xi = -1.1;
        assert_eq!(
            rw_solution_sample(s, xi, &mut rho, &mut theta, &mut u),
            RwStatus::Ok
        );
        let c = (5.0 / 3.0 * theta).sqrt();
        assert!((u - c - xi).abs() < 1e-12);
        assert!((u + 3.0 * c - 3.0 * C_LEFT).abs() < 1e-12);

        // far fields are the end states
        assert_eq!(
            rw_solution_sample(s, -9.0, &mut rho, &mut theta, &mut u),
            RwStatus::Ok
        );
        assert_eq!((rho, theta, u), (1.0, 1.0, 0.0));
        assert_eq!(
            rw_solution_sample(s, 9.0, &mut rho, &mut theta, &mut u),
            RwStatus::Ok
        );
        assert_eq!((rho, theta, u), (1.0, 1.0, 0.5));

        assert_eq!(
            rw_solution_sample(s, f64::NAN, &mut rho, &mut theta, &mut u),
            RwStatus::InvalidArgument
        );

        // field sampling at t = 0.5: left of both fans, in the middle, right
        let x1 = [-2.0, 0.125, 2.0];
        let (mut rhos, mut thetas, mut us) = ([0.0; 3], [0.0; 3], [0.0; 3]);
        assert_eq!(
            rw_solution_sample_field(
                s,
                0.5,
                x1.as_ptr(),
                3,
                rhos.as_mut_ptr(),
                thetas.as_mut_ptr(),
                us.as_mut_ptr()
            ),
            RwStatus::Ok
        );
        assert_eq!((rhos[0], us[0]), (1.0, 0.0));
        assert!((rhos[1] - RHO_MIDDLE).abs() < 1e-13 && (us[1] - 0.25).abs() < 1e-13);
        assert_eq!((rhos[2], us[2]), (1.0, 0.5));

        // bad time is rejected even before touching the arrays
        assert_eq!(
            rw_solution_sample_field(
                s,
                -1.0,
                x1.as_ptr(),
                3,
                rhos.as_mut_ptr(),
                thetas.as_mut_ptr(),
                us.as_mut_ptr()
            ),
            RwStatus::NegativeTime
        );
        assert_eq!(
            rw_solution_sample_field(
                s,
                -1.0,
                ptr::null(),
                0,
                ptr::null_mut(),
                ptr::null_mut(),
                ptr::null_mut()
            ),
            RwStatus::NegativeTime
        );
        assert_eq!(
            rw_solution_sample_field(
                s,
                0.5,
                ptr::null(),
                0,
                ptr::null_mut(),
                ptr::null_mut(),
                ptr::null_mut()
            ),
            RwStatus::Ok
        );

        rw_solution_free(s);
        rw_gas_free(g);
    }
}

#[test]
fn each_rejection_maps_to_its_status() {
    let g = gas(1.5);
    unsafe {
        let mut out: *mut RwSolution = ptr::null_mut();

        // different isentropes
        assert_eq!(
            rw_solution_new(g, 1.0, 1.0, 0.0, 1.0, 2.0, 0.0, &mut out),
            RwStatus::EntropyMismatch
        );
        assert!(out.is_null());

        // compressive data
        assert_eq!(
            rw_solution_new(g, 1.0, 1.0, 0.0, 1.0, 1.0, -0.5, &mut out),
            RwStatus::ShockRequired
        );
        assert!(out.is_null());

        // separation fast enough to open a vacuum
        assert_eq!(
            rw_solution_new(g, 1.0, 1.0, 0.0, 1.0, 1.0, 8.0, &mut out),
            RwStatus::VacuumFormation
        );
        assert!(out.is_null());

        // nonpositive density is an argument error, not a wave-structure one
        assert_eq!(
            rw_solution_new(g, -1.0, 1.0, 0.0, 1.0, 1.0, 0.0, &mut out),
            RwStatus::InvalidArgument
        );
        assert!(out.is_null());

        rw_gas_free(g);
    }
}

#[test]
fn argument_errors_leave_outputs_untouched() {
    unsafe {
        let mut h: *mut RwGas = ptr::null_mut();
        assert_eq!(rw_gas_new(-1.0, &mut h), RwStatus::InvalidArgument);
        assert_eq!(rw_gas_new(f64::NAN, &mut h), RwStatus::InvalidArgument);
        assert!(h.is_null());

        let g = gas(1.5);
        let mut v = 123.0;
        assert_eq!(rw_entropy(g, -1.0, 1.0, &mut v), RwStatus::InvalidArgument);
        assert_eq!(rw_entropy(g, 1.0, 0.0, &mut v), RwStatus::InvalidArgument);
        assert_eq!(
            rw_reduced_bound(1.5, -1.0, 0.0, &mut v),
            RwStatus::InvalidArgument
        );
        assert_eq!(
            rw_reduced_bound(0.0, 1.0, 0.0, &mut v),
            RwStatus::InvalidArgument
        );
        assert_eq!(
            rw_reduced_bound(1.5, 1.0, f64::NAN, &mut v),
            RwStatus::InvalidArgument
        );
        assert_eq!(v, 123.0);
        rw_gas_free(g);
    }
}

#[test]
fn null_pointers_are_reported_not_dereferenced() {
    unsafe {
        assert_eq!(rw_gas_new(1.5, ptr::null_mut()), RwStatus::NullPointer);

        let mut v = 0.0;
        assert_eq!(rw_gas_gamma(ptr::null(), &mut v), RwStatus::NullPointer);
        assert_eq!(
            rw_entropy(ptr::null(), 1.0, 1.0, &mut v),
            RwStatus::NullPointer
        );

        let g = gas(1.5);
        assert_eq!(rw_gas_gamma(g, ptr::null_mut()), RwStatus::NullPointer);
        assert_eq!(
            rw_solution_new(g, 1.0, 1.0, 0.0, 1.0, 1.0, 0.5, ptr::null_mut()),
            RwStatus::NullPointer
        );

        let s = standard_solution(g);
        let mut rho = 0.0;
        let mut theta = 0.0;
        assert_eq!(
            rw_solution_sample(s, 0.0, &mut rho, &mut theta, ptr::null_mut()),
            RwStatus::NullPointer
        );
        let x1 = [0.0];
        assert_eq!(
            rw_solution_sample_field(
                s,
                0.5,
                x1.as_ptr(),
                1,
                ptr::null_mut(),
                ptr::null_mut(),
                ptr::null_mut()
            ),
            RwStatus::NullPointer
        );

        // freeing null is a defined no-op
        rw_gas_free(ptr::null_mut());
        rw_solution_free(ptr::null_mut());

        rw_solution_free(s);
        rw_gas_free(g);
    }
}

#[test]
fn energy_entry_points_agree_with_closed_forms() {
    let g = gas(1.5);
    unsafe {
        let mut v = f64::NAN;

        // coincident states have exactly zero relative energy
        assert_eq!(
            rw_relative_energy_density(g, 1.2, 0.9, 0.3, -0.2, 1.2, 0.9, 0.3, -0.2, &mut v),
            RwStatus::Ok
        );
        assert_eq!(v, 0.0);

        // separated states have strictly positive relative energy
        assert_eq!(
            rw_relative_energy_density(g, 1.2, 0.9, 0.3, -0.2, 1.0, 1.0, 0.0, 0.0, &mut v),
            RwStatus::Ok
        );
        assert!(v > 1e-3);

        // G(2^{2/3}, 0) = 4/3 - 2^{2/3} at c_v = 3/2
        let exact = 4.0 / 3.0 - 2f64.powf(2.0 / 3.0);
        assert_eq!(
            rw_reduced_bound(1.5, 2f64.powf(2.0 / 3.0), 0.0, &mut v),
            RwStatus::Ok
        );
        assert!((v - exact).abs() < 1e-14);
        assert!(v < 0.0);

        // unit reference temperature: the bound reduces to G itself
        assert_eq!(
            rw_production_bound(g, 2.0, 0.0, 1.0, 0.0, &mut v),
            RwStatus::Ok
        );
        assert!((v - exact).abs() < 1e-14);

        rw_gas_free(g);
    }
}

#[test]
fn generated_header_covers_the_surface() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/include/rarewave.h");
    let header = std::fs::read_to_string(path).expect("build script writes include/rarewave.h");

    assert!(header.contains("RAREWAVE_H"));
    for symbol in [
        "typedef struct RwGas RwGas",
        "typedef struct RwSolution RwSolution",
        "RwStatus",
        "rw_version",
        "rw_status_message",
        "rw_gas_new",
        "rw_gas_free",
        "rw_gas_gamma",
        "rw_gas_heat_capacity",
        "rw_entropy",
        "rw_pressure",
        "rw_temperature_from_entropy",
        "rw_sound_speed",
        "rw_solution_new",
        "rw_solution_free",
        "rw_solution_entropy",
        "rw_solution_middle",
        "rw_solution_fan_edges",
        "rw_solution_sample",
        "rw_solution_sample_field",
        "rw_relative_energy_density",
        "rw_reduced_bound",
        "rw_production_bound",
    ] {
        assert!(header.contains(symbol), "header is missing `{symbol}`");
    }
}
