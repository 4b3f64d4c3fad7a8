use std::ffi::CStr;
use std::ptr;

use gavc_ffi::*;

fn last_error() -> Option<String> {
    let p = gavc_last_error();
    (!p.is_null()).then(|| unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned())
}

#[test]
fn capacities() {
    let mut c = f64::NAN;
    assert_eq!(
        unsafe { gavc_randomized_capacity(1.0, 0.0, 1.0, &mut c) },
        GavcStatus::Ok
    );
    assert_eq!(c, 0.5);
    assert!(last_error().is_none());
    assert_eq!(
        unsafe { gavc_deterministic_capacity(1.0, 2.0, 1.0, &mut c) },
        GavcStatus::Ok
    );
    assert_eq!(c, 0.0);
}

#[test]
fn errors_are_reported() {
    let mut c = 0.0;
    assert_eq!(
        unsafe { gavc_randomized_capacity(-1.0, 0.0, 1.0, &mut c) },
        GavcStatus::InvalidParameter
    );
    assert!(last_error().unwrap().contains("gamma"));
    assert_eq!(
        unsafe { gavc_randomized_capacity(1.0, 0.0, 1.0, ptr::null_mut()) },
        GavcStatus::NullPointer
    );
    assert!(last_error().unwrap().contains("out_bits"));
    // A later success clears the message.
    assert_eq!(
        unsafe { gavc_randomized_capacity(1.0, 0.0, 1.0, &mut c) },
        GavcStatus::Ok
    );
    assert!(last_error().is_none());
}

#[test]
fn dpc_costa_point() {
    let mut r = GavcDpcResult::default();
    assert_eq!(
        unsafe { gavc_dpc_optimize(4.0, 5.0, 1.0, 2.0, 0.01, 1e-9, &mut r) },
        GavcStatus::Ok
    );
    assert_eq!(r.feasible, 1);
    assert!((r.rate_bits - 0.5 * (5.0f64 / 3.0).log2()).abs() < 1e-6);
    assert_eq!(
        unsafe { gavc_dpc_optimize(1.0, 10.0, 1.0, 0.0, 0.01, 1e-9, &mut r) },
        GavcStatus::Ok
    );
    assert_eq!(r.feasible, 0);
    assert_eq!(r.rate_bits, 0.0);
}

#[test]
fn mimo_maxmin() {
    let nu = [1.0, 3.0];
    let mut rate = 0.0;
    let mut powers = [0.0; 2];
    let s = unsafe { gavc_mimo_maxmin(nu.as_ptr(), 2, 4.0, 10.0, 1e-9, &mut rate, powers.as_mut_ptr()) };
    assert_eq!(s, GavcStatus::Ok);
    assert!(rate > 0.0);
    assert!((powers.iter().sum::<f64>() - 4.0).abs() < 1e-6);
    let s = unsafe { gavc_mimo_maxmin(nu.as_ptr(), 2, 4.0, 10.0, 1e-9, &mut rate, ptr::null_mut()) };
    assert_eq!(s, GavcStatus::Ok);
    let s = unsafe { gavc_mimo_maxmin(ptr::null(), 2, 4.0, 10.0, 1e-9, &mut rate, ptr::null_mut()) };
    assert_eq!(s, GavcStatus::NullPointer);
}

#[test]
fn simulator_lifecycle() {
    let mut sim = ptr::null_mut();
    assert_eq!(
        unsafe { gavc_simulator_new(32, 8, 32, 1.0, 3, &mut sim) },
        GavcStatus::Ok
    );
    assert!(!sim.is_null());
    assert_eq!(unsafe { gavc_simulator_codebook_size(sim) }, 8);

    let mut a = GavcTrialResult::default();
    let mut b = GavcTrialResult::default();
    assert_eq!(
        unsafe { gavc_simulator_run(sim, GavcJammer::None, 0.0, 1e-6, 0, 200, 1, &mut a) },
        GavcStatus::Ok
    );
    assert_eq!((a.trials, a.errors), (200, 0));

    for jammer in [GavcJammer::Sphere, GavcJammer::Fixed] {
        unsafe { gavc_simulator_run(sim, jammer, 1.0, 0.5, 0, 300, 9, &mut a) };
        unsafe { gavc_simulator_run(sim, jammer, 1.0, 0.5, 0, 300, 9, &mut b) };
        assert_eq!(a, b);
        assert!(a.ci_low <= a.error_rate && a.error_rate <= a.ci_high);
    }

    assert_eq!(
        unsafe { gavc_simulator_run(sim, GavcJammer::Fixed, 1.0, 0.5, 99, 10, 1, &mut a) },
        GavcStatus::InvalidParameter
    );
    assert_eq!(
        unsafe { gavc_simulator_run(sim, GavcJammer::Sphere, 5.0, 0.5, 0, 0, 1, &mut a) },
        GavcStatus::InvalidParameter
    );
    unsafe { gavc_simulator_free(sim) };
    unsafe { gavc_simulator_free(ptr::null_mut()) };
    assert_eq!(unsafe { gavc_simulator_codebook_size(ptr::null()) }, 0);
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(gavc_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}
