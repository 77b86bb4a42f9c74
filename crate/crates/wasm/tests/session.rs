use specwave_wasm::{wavelet_profile_native, Session};

#[test]
fn estimate_needs_a_path() {
    let s = Session::new();
    assert!(s.estimate_native(0.05, 0.5, 8, 4.0).is_err());
    assert!(s.times().is_empty());
}

#[test]
fn simulate_then_estimate() {
    let mut s = Session::new();
    s.simulate_native(0.3, 2000, 1.0, true, 7).unwrap();
    let t = s.times();
    assert_eq!(t.len(), 2001);
    assert_eq!(s.values().len(), t.len());
    assert!(t.windows(2).all(|w| w[1] > w[0]));

    let sp = s.estimate_native(0.05, 0.5, 8, 4.0).unwrap();
    assert_eq!(sp.xi().len(), 8);
    assert!(sp.fhat().iter().all(|v| *v >= 0.0));
    assert!(sp.truth().windows(2).all(|w| w[1] < w[0]));
    assert!(sp.slope().is_finite());
    assert!(sp.tau() > 0.0 && sp.lambda() > 0.0);
}

#[test]
fn same_seed_same_path() {
    let mut a = Session::new();
    let mut b = Session::new();
    a.simulate_native(0.6, 300, 0.5, false, 11).unwrap();
    b.simulate_native(0.6, 300, 0.5, false, 11).unwrap();
    assert_eq!(a.values(), b.values());
}

#[test]
fn bad_ratio_rejected() {
    let mut s = Session::new();
    s.simulate_native(0.3, 500, 1.0, true, 1).unwrap();
    assert!(s.estimate_native(0.05, 0.5, 8, 1.0).is_err());
}

#[test]
fn profile_layout() {
    let p = wavelet_profile_native(4.0, 50).unwrap();
    assert_eq!(p.len(), 200);
    // transform half spans (-cap, cap) and vanishes at the ends
    assert_eq!(p[100], -4.0);
    assert_eq!(p[198], 4.0);
    assert!(p[101].abs() < 1e-12 && p[199].abs() < 1e-12);
    assert!(wavelet_profile_native(-1.0, 50).is_err());
}
