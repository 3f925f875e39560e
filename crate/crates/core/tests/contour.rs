use std::f64::consts::{FRAC_PI_2, PI};

use proptest::prelude::*;
use shock_evans::contour_stability::*;
use shock_evans::eigensystem::wedge_bound;
use shock_evans::evans_core::EvansConfig;
use shock_evans::{Complex64 as C64, Error};

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Arc-length position of a boundary point, starting at `−iR` and running counterclockwise.
fn arclength(z: C64, r: f64, rho: f64) -> f64 {
    let tol = 1e-9;
    if z.re > tol && (z.norm() - r).abs() < tol * r {
        r * (z.arg() + FRAC_PI_2)
    } else if z.re > tol || (z.norm() - rho).abs() < tol {
        // Small arc, traversed clockwise from iρ to −iρ.
        PI * r + (r - rho) + rho * (FRAC_PI_2 - z.arg())
    } else if z.im > 0.0 {
        PI * r + (r - z.im)
    } else if z.im == -r {
        0.0
    } else {
        PI * r + (r - rho) + PI * rho + (-z.im - rho)
    }
}

#[test]
fn sixteen_point_contour() {
    let k = build_contour(10.0, 16).unwrap();
    let s = k.samples();
    assert_eq!(s.len(), 16);
    assert_eq!(s[0], c(0.0, -10.0));
    assert_eq!(s[15].re, 0.0);
    assert!(s[15].im < 0.0);
    assert!(s.contains(&c(10.0, 0.0)) && s.contains(&c(0.0, 10.0)));
}

#[test]
fn samples_are_ordered_and_conjugate_symmetric() {
    for n in [16, 17, 64, 255, 256, 1024] {
        let k = build_contour(10.0, n).unwrap();
        let s = k.samples();
        assert_eq!(s.len(), n);
        let pos: Vec<f64> = s.iter().map(|&z| arclength(z, 10.0, DEFAULT_INDENTATION)).collect();
        assert!(pos.windows(2).all(|w| w[1] > w[0]), "n = {n}: {pos:?}");
        for z in s {
            assert!(z.re >= 0.0);
            assert!(s.iter().any(|w| *w == z.conj()), "n = {n}: {z} lacks a mirror");
        }
    }
}

#[test]
fn samples_are_denser_near_origin() {
    let k = build_contour(10.0, 512).unwrap();
    let upper: Vec<f64> = k.samples().iter().filter(|z| z.re == 0.0 && z.im > 0.0).map(|z| z.im).collect();
    let gaps = |lo: f64, hi: f64| {
        let v: Vec<f64> = upper.windows(2).filter(|w| w[0] <= hi && w[1] >= lo).map(|w| (w[0] - w[1]).abs()).collect();
        v.iter().sum::<f64>() / v.len() as f64
    };
    let ratio = gaps(0.05, 0.95) / gaps(1.05, 9.95);
    assert!((ratio - 0.5).abs() < 0.1, "{ratio}");
    let arc = k.samples().iter().filter(|z| z.re > 1e-3).count();
    // Outer arc carries roughly its weighted share of the samples.
    let expect = 512.0 * (FRAC_PI_2 * 10.0) / (FRAC_PI_2 * 10.0 + 11.0);
    assert!((arc as f64 / expect - 1.0).abs() < 0.1, "{arc} vs {expect}");
}

#[test]
fn contour_validation() {
    assert!(build_contour(10.0, 15).is_err());
    assert!(build_contour(10.0, 0).is_err());
    assert!(build_contour(0.0, 64).is_err());
    assert!(build_contour_with(10.0, 64, 20.0).is_err());
}

#[test]
fn radius_ten_encloses_every_wedge() {
    for g in [1.0, 1.5, 5.0 / 3.0, 2.0, 2.5, 3.0] {
        assert!(wedge_bound(g).unwrap() < DEFAULT_RADIUS);
    }
    assert!((wedge_bound(3.0).unwrap() - 4.983).abs() < 1e-3);
}

#[test]
fn winding_elementary_examples() {
    let circle: Vec<C64> = (0..64).map(|k| C64::from_polar(1.0, 2.0 * PI * k as f64 / 64.0)).collect();
    let w = winding_number(&circle, true).unwrap();
    assert_eq!(w.winding_number, 1);
    assert!(w.certified && (w.turns - 1.0).abs() < 1e-12);
    assert_eq!(winding_number(&vec![c(1.0, 0.0); 10], true).unwrap().winding_number, 0);
    let mut z = circle.clone();
    z[5] = c(0.0, 0.0);
    assert!(matches!(winding_number(&z, true), Err(Error::ZeroOnContour { index: 5, .. })));
    let coarse: Vec<C64> = (0..3).map(|k| C64::from_polar(1.0, 2.0 * PI * k as f64 / 3.0)).collect();
    assert!(!winding_certificate(&coarse, true).unwrap().certified);
    assert!(matches!(winding_number(&coarse, true), Err(Error::InsufficientSampling { .. })));
}

#[test]
fn limiting_image_has_zero_winding_for_every_gamma() {
    let cfg = EvansConfig::default();
    let k = build_contour(DEFAULT_RADIUS, 256).unwrap();
    let d: Vec<C64> = limiting_values(&k, &cfg).unwrap().iter().map(|v| v.d).collect();
    let w = winding_number(&d, true).unwrap();
    assert_eq!(w.winding_number, 0);
    // The limiting function does not depend on gamma; only wedge containment does.
    for g in [1.0, 1.5, 5.0 / 3.0, 2.0, 2.5, 3.0] {
        assert!(wedge_bound(g).unwrap() <= k.radius);
    }
}

#[test]
fn refinement_keeps_certified_winding() {
    let cfg = EvansConfig::default();
    let mut seen = Vec::new();
    for n in [64, 128, 256, 512] {
        let k = build_contour(10.0, n).unwrap();
        let d: Vec<C64> = finite_values(shock_evans::shock_model::ShockParams::new(5.0 / 3.0, 1e-2).unwrap(), &k, &cfg)
            .unwrap()
            .iter()
            .map(|v| v.d)
            .collect();
        if let Ok(w) = winding_number(&d, true) {
            seen.push(w.winding_number);
        }
    }
    assert!(seen.len() >= 2);
    assert!(seen.iter().all(|&w| w == seen[0]));
}

#[test]
fn certify_limiting_system() {
    let r = certify_stability(Target::Limiting, &StudyConfig::default()).unwrap();
    assert_eq!(r.verdict, Verdict::StableCertified);
    assert_eq!(r.winding_number, Some(0));
    assert!(r.refinement.last().unwrap().certified);
    assert!(r.min_modulus > 0.1);
    let json = serde_json::to_string(&r).unwrap();
    assert!(json.contains("\"verdict\":\"stable_certified\""));
}

#[test]
fn certify_strong_shock_by_transfer() {
    let r = certify_stability(Target::FiniteMach { gamma: 5.0 / 3.0, v_plus: 1e-3 }, &StudyConfig::default()).unwrap();
    assert_eq!(r.verdict, Verdict::RoucheTransfer);
    assert_eq!(r.reference_winding, Some(0));
    let rel = r.max_rel_error.unwrap();
    assert!(rel < 1.0 && (rel / 0.4098 - 1.0).abs() < 0.3, "{rel}");
}

#[test]
fn exhausted_budget_is_inconclusive() {
    // Sixteen samples on a radius-40 semicircle leave phase steps above π/2.
    let cfg = StudyConfig { radius: 40.0, n_points: 16, refinement_budget: 0, ..StudyConfig::default() };
    let r = certify_stability(Target::Limiting, &cfg).unwrap();
    assert_eq!(r.verdict, Verdict::Inconclusive);
    assert!(r.diagnostic.as_deref().unwrap().contains("budget"), "{:?}", r.diagnostic);
    assert_eq!(r.refinement.len(), 1);
    assert!(!r.refinement[0].certified);
    assert_eq!(r.winding_number, None);

    let refined = certify_stability(Target::Limiting, &StudyConfig { refinement_budget: 4, ..cfg }).unwrap();
    assert_eq!(refined.verdict, Verdict::StableCertified);
    assert_eq!(refined.winding_number, Some(0));
    assert!(refined.refinement.len() > 1);
}

#[test]
fn small_radius_is_inconclusive() {
    let cfg = StudyConfig { radius: 2.0, ..StudyConfig::default() };
    let r = certify_stability(Target::FiniteMach { gamma: 5.0 / 3.0, v_plus: 1e-2 }, &cfg).unwrap();
    assert_eq!(r.verdict, Verdict::Inconclusive);
    assert!(!r.warnings.is_empty());
}

#[test]
fn comparison_with_limit_follows_table_trend() {
    let cfg = EvansConfig::default();
    let k = build_contour(10.0, 256).unwrap();
    let rows = difference_table(5.0 / 3.0, &[1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6], &k, &cfg).unwrap();
    let cmp: Vec<Comparison> = rows.iter().map(|r| r.result.clone().unwrap()).collect();
    assert!(cmp[0].max_rel_error > 1.0 && (cmp[0].max_rel_error / 1.2386 - 1.0).abs() < 0.3);
    assert!((cmp[3].max_rel_error / 0.1487 - 1.0).abs() < 0.3, "{}", cmp[3].max_rel_error);
    // The absolute column depends on the normalization; a factor of two is all that is claimed.
    assert!((cmp[3].max_abs_error / 0.4714).ln().abs() < 2f64.ln(), "{}", cmp[3].max_abs_error);
    for w in cmp.windows(2) {
        assert!(w[1].max_rel_error < w[0].max_rel_error);
        assert!(w[1].max_abs_error < w[0].max_abs_error);
    }
    let direct = compare_to_limit(5.0 / 3.0, 1e-4, &k, &cfg).unwrap();
    assert_eq!(direct, cmp[3]);
}

#[test]
fn difference_table_edge_cases() {
    let cfg = EvansConfig::default();
    let k = build_contour(10.0, 32).unwrap();
    assert!(difference_table(5.0 / 3.0, &[], &k, &cfg).unwrap().is_empty());
    let rows = difference_table(5.0 / 3.0, &[2.0, 1e-3], &k, &cfg).unwrap();
    assert!(rows[0].result.is_err() && rows[1].result.is_ok());
}

#[test]
fn rouche_threshold_one_lies_between_first_rows() {
    let cfg = EvansConfig::default();
    let k = build_contour(10.0, 256).unwrap();
    let r = rouche_bound_search(5.0 / 3.0, 1.0, &k, (1e-6, 1e-1), 1e-3, &cfg).unwrap();
    assert!(r.v_plus > 1e-2 && r.v_plus < 1e-1, "{}", r.v_plus);
    assert!((r.rel_error - 1.0).abs() < 0.02);
}

#[test]
fn rouche_search_is_stable_under_resolution_changes() {
    let cfg = EvansConfig::default();
    let fine = EvansConfig { rtol: cfg.rtol / 2.0, atol: cfg.atol / 2.0, ..cfg };
    let k = build_contour(10.0, 256).unwrap();
    let k2 = build_contour(10.0, 512).unwrap();
    let tol = 1e-3;
    let base = rouche_bound_search(1.5, 0.5, &k, (1e-6, 1e-1), tol, &cfg).unwrap();
    assert!((base.rel_error - 0.5).abs() <= 0.01);
    for other in [
        rouche_bound_search(1.5, 0.5, &k2, (1e-6, 1e-1), tol, &cfg).unwrap(),
        rouche_bound_search(1.5, 0.5, &k, (1e-6, 1e-1), tol, &fine).unwrap(),
    ] {
        assert!((other.v_plus / base.v_plus - 1.0).abs() <= 2.0 * tol, "{} vs {}", other.v_plus, base.v_plus);
    }
}

#[test]
fn rouche_search_validation() {
    let cfg = EvansConfig::default();
    let k = build_contour(10.0, 32).unwrap();
    assert!(rouche_bound_search(1.5, 0.0, &k, (1e-6, 1e-1), 1e-3, &cfg).is_err());
    assert!(rouche_bound_search(1.5, 1.5, &k, (1e-6, 1e-1), 1e-3, &cfg).is_err());
    assert!(rouche_bound_search(1.5, 0.5, &k, (1e-1, 1e-6), 1e-3, &cfg).is_err());
    assert!(matches!(rouche_bound_search(1.5, 0.5, &k, (1e-6, 1e-5), 1e-3, &cfg), Err(Error::Bracket { .. })));
}

fn closed_curve() -> impl Strategy<Value = Vec<C64>> {
    // Random trigonometric polynomial, finely sampled.
    (prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 5), -3.0f64..3.0, -3.0f64..3.0).prop_map(|(coef, cr, ci)| {
        (0..512)
            .map(|k| {
                let t = 2.0 * PI * k as f64 / 512.0;
                coef.iter().enumerate().fold(c(cr, ci), |acc, (j, &(a, b))| acc + c(a, b) * C64::from_polar(1.0, (j as f64 - 2.0) * t))
            })
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn winding_invariant_under_rotation_and_scaling(z in closed_curve(), shift in 0usize..512, s_re in -5.0f64..5.0, s_im in -5.0f64..5.0) {
        let s = c(s_re, s_im);
        prop_assume!(s.norm() > 1e-3);
        let Ok(w) = winding_number(&z, true) else { return Ok(()) };
        let mut rot = z.clone();
        rot.rotate_left(shift);
        prop_assert_eq!(winding_number(&rot, true).unwrap().winding_number, w.winding_number);
        let scaled: Vec<C64> = z.iter().map(|v| v * s).collect();
        prop_assert_eq!(winding_number(&scaled, true).unwrap().winding_number, w.winding_number);
    }

    /// Argument principle: a real polynomial's image of the semicircle winds once per enclosed root.
    #[test]
    fn winding_counts_enclosed_polynomial_roots(
        real_roots in prop::collection::vec(-12.0f64..12.0, 0..3),
        pairs in prop::collection::vec((-12.0f64..12.0, 0.2f64..12.0), 0..3),
    ) {
        let mut roots: Vec<C64> = real_roots.iter().map(|&r| c(r, 0.0)).collect();
        for &(re, im) in &pairs {
            roots.push(c(re, im));
            roots.push(c(re, -im));
        }
        let boundary_distance = |z: C64| (z.norm() - 10.0).abs().min(z.re.abs()).min((z.norm() - DEFAULT_INDENTATION).abs());
        prop_assume!(roots.iter().all(|&z| boundary_distance(z) > 0.2));
        let inside = roots.iter().filter(|z| z.re > 0.0 && z.norm() < 10.0).count() as i64;
        let k = build_contour(10.0, 2048).unwrap();
        let p = |l: C64| roots.iter().fold(c(1.0, 0.0), |acc, r| acc * (l - r));
        let vals: Vec<C64> = k.samples().iter().map(|&l| p(l)).collect();
        let w = winding_number(&vals, true).unwrap();
        prop_assert_eq!(w.winding_number, inside);
        // Conjugate-reversed sequence of a conjugate-symmetric function winds the same way.
        let rev: Vec<C64> = vals.iter().rev().map(|v| v.conj()).collect();
        prop_assert_eq!(winding_number(&rev, true).unwrap().winding_number, inside);
        // Doubling the samples keeps the certified count.
        let k2 = build_contour(10.0, 4096).unwrap();
        let vals2: Vec<C64> = k2.samples().iter().map(|&l| p(l)).collect();
        prop_assert_eq!(winding_number(&vals2, true).unwrap().winding_number, inside);
    }
}
