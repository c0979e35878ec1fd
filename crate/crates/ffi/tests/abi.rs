use std::ffi::CStr;
use std::ptr;

use mixcomp_ffi::*;

fn density(dim: usize, re: &[f64]) -> *mut MixDensity {
    let mut h = ptr::null_mut();
    let s = unsafe { mix_density_new(dim, re.as_ptr(), ptr::null(), &mut h) };
    assert_eq!(s, MixStatus::Ok);
    h
}

fn last_error() -> String {
    let p = mix_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_owned()
}

#[test]
fn entropy_and_fidelity() {
    let a = density(2, &[0.9, 0.0, 0.0, 0.1]);
    let b = density(2, &[0.1, 0.0, 0.0, 0.9]);
    let mut x = f64::NAN;
    unsafe {
        assert_eq!(mix_density_dim(a), 2);
        assert_eq!(mix_fidelity(a, b, &mut x), MixStatus::Ok);
        assert!((x - 0.36).abs() < 1e-12);
        assert_eq!(mix_fidelity(a, a, &mut x), MixStatus::Ok);
        assert_eq!(x, 1.0);
        assert_eq!(mix_vn_entropy(a, &mut x), MixStatus::Ok);
        assert!((x - 0.4689955935892812).abs() < 1e-12);
        mix_density_free(a);
        mix_density_free(b);
    }
    assert!(mix_last_error_message().is_null());
}

#[test]
fn complex_entries() {
    let re = [0.5, 0.0, 0.0, 0.5];
    let im = [0.0, -0.5, 0.5, 0.0];
    let mut h = ptr::null_mut();
    let mut s = f64::NAN;
    unsafe {
        assert_eq!(mix_density_new(2, re.as_ptr(), im.as_ptr(), &mut h), MixStatus::Ok);
        assert_eq!(mix_vn_entropy(h, &mut s), MixStatus::Ok);
        mix_density_free(h);
    }
    assert!(s.abs() < 1e-9);
}

#[test]
fn invalid_states_report_codes() {
    let mut h = ptr::null_mut();
    unsafe {
        let s = mix_density_new(2, [1.2, 0.0, 0.0, -0.2].as_ptr(), ptr::null(), &mut h);
        assert_eq!(s, MixStatus::NotPsd);
        assert!(last_error().contains("positive semidefinite"));
        let s = mix_density_new(2, [0.5, 0.1, 0.0, 0.5].as_ptr(), ptr::null(), &mut h);
        assert_eq!(s, MixStatus::NotHermitian);
        let s = mix_density_new(2, [0.5, 0.0, 0.0, 0.6].as_ptr(), ptr::null(), &mut h);
        assert_eq!(s, MixStatus::InvalidTrace);
        assert_eq!(mix_density_new(2, ptr::null(), ptr::null(), &mut h), MixStatus::NullPointer);
        assert_eq!(mix_density_new(0, ptr::null(), ptr::null(), &mut h), MixStatus::DimensionMismatch);
    }
    assert!(h.is_null());
}

#[test]
fn null_handles_are_rejected() {
    let mut x = 0.0;
    unsafe {
        assert_eq!(mix_vn_entropy(ptr::null(), &mut x), MixStatus::NullPointer);
        assert_eq!(mix_holevo(ptr::null(), &mut x), MixStatus::NullPointer);
        assert_eq!(mix_density_dim(ptr::null()), 0);
        mix_density_free(ptr::null_mut());
        mix_ensemble_free(ptr::null_mut());
        mix_string_free(ptr::null_mut());
    }
    assert!(last_error().contains("null"));
}

#[test]
fn ensemble_rates_and_report() {
    let a = density(2, &[0.9, 0.0, 0.0, 0.1]);
    let b = density(2, &[0.1, 0.0, 0.0, 0.9]);
    let states = [a as *const MixDensity, b as *const MixDensity];
    let mut e = ptr::null_mut();
    let (mut chi, mut s, mut lo) = (0.0, 0.0, 0.0);
    unsafe {
        assert_eq!(mix_ensemble_new(2, [0.5, 0.5].as_ptr(), states.as_ptr(), &mut e), MixStatus::Ok);
        mix_density_free(a);
        mix_density_free(b);
        assert_eq!(mix_holevo(e, &mut chi), MixStatus::Ok);
        assert_eq!(mix_upper_bound_rate(e, &mut s), MixStatus::Ok);
        assert_eq!(mix_lower_bound_rate(e, &mut lo), MixStatus::Ok);
        let mut json = ptr::null_mut();
        assert_eq!(mix_rate_report_json(e, &mut json), MixStatus::Ok);
        let text = CStr::from_ptr(json).to_str().unwrap().to_owned();
        mix_string_free(json);
        mix_ensemble_free(e);
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        let xi = v["entries"].as_array().unwrap().iter().find(|x| x["name"] == "Xi").unwrap();
        assert!((xi["rate"].as_f64().unwrap() - 1.5219280948873621).abs() < 1e-9);
    }
    assert_eq!(chi, lo);
    assert!((s - 1.0).abs() < 1e-12);
    assert!((chi - 0.531004406410719).abs() < 1e-9);
}

#[test]
fn ensemble_validation() {
    let a = density(2, &[1.0, 0.0, 0.0, 0.0]);
    let c = density(3, &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
    let mut e = ptr::null_mut();
    unsafe {
        let states = [a as *const MixDensity, c as *const MixDensity];
        assert_eq!(mix_ensemble_new(2, [0.5, 0.5].as_ptr(), states.as_ptr(), &mut e), MixStatus::DimensionMismatch);
        let states = [a as *const MixDensity, a as *const MixDensity];
        assert_eq!(mix_ensemble_new(2, [0.7, 0.5].as_ptr(), states.as_ptr(), &mut e), MixStatus::InvalidProbabilities);
        let states = [a as *const MixDensity, ptr::null()];
        assert_eq!(mix_ensemble_new(2, [0.5, 0.5].as_ptr(), states.as_ptr(), &mut e), MixStatus::NullPointer);
        mix_density_free(a);
        mix_density_free(c);
    }
    assert!(e.is_null());
}

#[test]
fn scalar_rates() {
    let mut x = 0.0;
    unsafe {
        assert_eq!(mix_shannon_entropy(4, [0.25; 4].as_ptr(), &mut x), MixStatus::Ok);
        assert_eq!(x, 2.0);
        assert_eq!(mix_classical_fidelity(2, [0.5, 0.5].as_ptr(), [1.0, 0.0].as_ptr(), &mut x), MixStatus::Ok);
        assert!((x - 0.5).abs() < 1e-12);
        assert_eq!(mix_upsilon_rate(0.0, &mut x), MixStatus::Ok);
        assert!((x - 1.0).abs() < 1e-12);
        assert_eq!(mix_upsilon_rate(0.5, &mut x), MixStatus::Ok);
        assert!(x.abs() < 1e-12);
        assert_eq!(mix_upsilon_rate(0.7, &mut x), MixStatus::Domain);
        assert_eq!(mix_xi_rate(0.5, 0.25, 0.75, &mut x), MixStatus::Ok);
        assert!((x - 1.5).abs() < 1e-12);
        assert_eq!(mix_photographic_negative_q(3, &mut x), MixStatus::Ok);
        assert!((x - 1.2516291673878228).abs() < 1e-9);
        assert_eq!(mix_photographic_negative_q(2, &mut x), MixStatus::Domain);
        assert_eq!(mix_xi_rate(0.5, 0.2, 0.3, ptr::null_mut()), MixStatus::NullPointer);
    }
}

#[test]
fn header_declares_every_export() {
    let header = include_str!("../include/mixcomp.h");
    for name in [
        "mix_density_new", "mix_density_free", "mix_density_dim", "mix_vn_entropy", "mix_fidelity",
        "mix_ensemble_new", "mix_ensemble_free", "mix_holevo", "mix_upper_bound_rate", "mix_lower_bound_rate",
        "mix_shannon_entropy", "mix_classical_fidelity", "mix_upsilon_rate", "mix_xi_rate",
        "mix_photographic_negative_q", "mix_rate_report_json", "mix_string_free", "mix_last_error_message",
        "MIX_STATUS_NOT_PSD",
    ] {
        assert!(header.contains(name), "{name} missing from header");
    }
}
