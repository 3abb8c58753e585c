use std::f64::consts::TAU;

use gvlab_core::gv::{eta, gv_direct, gv_form, transform_pair, PairChange};
use gvlab_core::scenarios::{catalog, find};
use gvlab_core::ScalarField;

#[test]
fn catalog_names_are_unique_and_buildable() {
    let mut names: Vec<&str> = catalog().iter().map(|s| s.name).collect();
    names.sort_unstable();
    names.dedup();
    assert_eq!(names.len(), catalog().len());
    for s in catalog() {
        s.compatible([12; 3]).unwrap_or_else(|e| panic!("{}: {e}", s.name));
    }
    assert!(find("no-such-scenario").is_err());
}

#[test]
fn shear_gv_converges_to_closed_form() {
    let s = find("shear").unwrap();
    for a in [0.3, 0.5] {
        let exact = TAU.powi(3) * a * a;
        let err = |n: usize| (gv_direct(&s.pair_with([n; 3], a).unwrap()).unwrap() - exact).abs();
        let (coarse, fine) = (err(24), err(48));
        assert!(fine < 1e-4 * exact, "a = {a}: error {fine:e}");
        // fourth-order stencils
        assert!((coarse / fine).log2() > 3.5, "a = {a}: {coarse:e} -> {fine:e}");
    }
}

#[test]
fn vanishing_scenarios() {
    for name in ["foliation", "contact", "warped", "rectifying"] {
        let gv = gv_direct(&find(name).unwrap().pair([32; 3]).unwrap()).unwrap();
        assert!(gv.abs() < 1e-8, "{name}: {gv}");
    }
    // pointwise, not only after integration
    let p = find("rectifying").unwrap().pair([32; 3]).unwrap();
    assert!(gv_form(&eta(&p)).max_abs() < 1e-5);
    let p = find("contact").unwrap().pair([16; 3]).unwrap();
    assert!(eta(&p).max_abs() < 1e-12);
}

#[test]
fn shear_gv_survives_rescaling_by_z_independent_functions() {
    let p = find("shear").unwrap().pair([48; 3]).unwrap();
    let before = gv_direct(&p).unwrap();
    let f = ScalarField::from_fn(p.grid(), |x| 1.0 + 0.4 * (x[0] - x[1]).sin() * x[1].cos());
    let after = gv_direct(&transform_pair(&p, &PairChange::Scale(f)).unwrap()).unwrap();
    assert!((after - before).abs() < 1e-6 * before.abs(), "{before} -> {after}");
}
