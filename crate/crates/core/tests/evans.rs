use std::sync::{Arc, OnceLock};

use proptest::prelude::*;
use shock_evans::contour_stability::{build_contour, Contour};
use shock_evans::eigensystem::{limiting_adjoint_vector, EigenSystem, DEFAULT_SPLIT_TOL};
use shock_evans::evans_core::*;
use shock_evans::linalg::{self, Mat3, Vec3};
use shock_evans::shock_model::{Domain, Model, ShockParams};
use shock_evans::Complex64 as C64;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn finite(vp: f64, cfg: &EvansConfig) -> EvansModel {
    EvansModel::build(Model::FiniteMach(ShockParams::new(5.0 / 3.0, vp).unwrap()), cfg).unwrap()
}

fn shared_finite() -> &'static EvansModel {
    static M: OnceLock<EvansModel> = OnceLock::new();
    M.get_or_init(|| finite(1e-3, &EvansConfig::default()))
}

fn rel(a: C64, b: C64) -> f64 {
    (a - b).norm() / b.norm()
}

#[test]
fn conjugate_symmetry_off_axis() {
    let cfg = EvansConfig::default();
    for m in [EvansModel::Limiting, shared_finite().clone()] {
        let d = evans_point(c(1.0, 2.0), &m, &cfg).unwrap().d;
        let e = evans_point(c(1.0, -2.0), &m, &cfg).unwrap().d;
        assert!(rel(e, d.conj()) < 1e-8, "{d} vs {e}");
    }
}

#[test]
fn pairing_is_independent_of_meeting_point() {
    let base = EvansConfig::default();
    let moved = EvansConfig { meeting_point: 1.0, ..base };
    for m in [EvansModel::Limiting, shared_finite().clone()] {
        for lam in [c(0.5, 3.0), c(7.0, 0.0), c(0.0, 9.0)] {
            let d0 = evans_point(lam, &m, &base).unwrap();
            let d1 = evans_point(lam, &m, &moved).unwrap();
            assert_eq!(d1.meeting_point, 1.0);
            assert!(rel(d1.d, d0.d) < 1e-6, "lambda {lam}");
        }
    }
}

#[test]
fn tolerance_robustness() {
    let coarse = EvansConfig::default();
    let fine = EvansConfig { rtol: coarse.rtol / 10.0, atol: coarse.atol / 10.0, profile_tol: coarse.profile_tol / 10.0, ..coarse };
    for vp in [1e-1, 1e-3, 1e-6] {
        let (mc, mf) = (finite(vp, &coarse), finite(vp, &fine));
        for lam in [c(1.0, 1.0), c(0.0, 10.0), c(10.0, 0.0)] {
            let a = evans_point(lam, &mc, &coarse).unwrap().d;
            let b = evans_point(lam, &mf, &fine).unwrap().d;
            assert!(rel(a, b) <= 10.0 * coarse.rtol, "v+ {vp}, lambda {lam}: {:e}", rel(a, b));
        }
    }
}

#[test]
fn domain_robustness() {
    let short = EvansConfig::default();
    let long = EvansConfig { domain: Domain::symmetric(24.0), ..short };
    let mut models = vec![(EvansModel::Limiting, EvansModel::Limiting)];
    for vp in [1e-2, 1e-4, 1e-6] {
        models.push((finite(vp, &short), finite(vp, &long)));
    }
    for (ms, ml) in &models {
        for lam in [c(0.2, 0.5), c(0.0, 10.0), c(10.0, 0.0), c(3.0, 3.0)] {
            let a = evans_point(lam, ms, &short).unwrap().d;
            let b = evans_point(lam, ml, &long).unwrap().d;
            assert!(rel(a, b) <= 1e-4, "lambda {lam}: {:e}", rel(a, b));
        }
    }
}

#[test]
fn empty_contour_gives_empty_output() {
    let cfg = EvansConfig::default();
    let out = evans_on_contour(&Contour::from_samples(vec![]), &EvansModel::Limiting, &cfg).unwrap();
    assert!(out.is_empty());
}

#[test]
fn contour_values_respect_conjugate_symmetry_and_conservation() {
    let cfg = EvansConfig::default();
    let contour = build_contour(10.0, 64).unwrap();
    let vals = evans_on_contour(&contour, shared_finite(), &cfg).unwrap();
    for v in &vals {
        assert!(v.conservation_defect <= 1e-6);
        if let Some(w) = vals.iter().find(|w| (w.lambda - v.lambda.conj()).norm() < 1e-14) {
            assert!(rel(w.d, v.d.conj()) < 1e-8);
        }
    }
}

#[test]
fn strong_shock_image_is_close_to_limit() {
    let cfg = EvansConfig::default();
    let contour = build_contour(10.0, 64).unwrap();
    let d0 = evans_on_contour(&contour, &EvansModel::Limiting, &cfg).unwrap();
    let d = evans_on_contour(&contour, &finite(1e-6, &cfg), &cfg).unwrap();
    let worst = d.iter().zip(&d0).map(|(a, b)| rel(a.d, b.d)).fold(0.0, f64::max);
    assert!(worst < 0.05, "{worst}");
}

#[test]
fn absolute_gap_to_limit_shrinks_with_endstate() {
    let cfg = EvansConfig::default();
    let contour = build_contour(10.0, 128).unwrap();
    let d0 = evans_on_contour(&contour, &EvansModel::Limiting, &cfg).unwrap();
    let mut prev = f64::INFINITY;
    for k in 1..=6 {
        let vp = 10f64.powi(-k);
        let d = evans_on_contour(&contour, &finite(vp, &cfg), &cfg).unwrap();
        let gap = d.iter().zip(&d0).map(|(a, b)| (a.d - b.d).norm()).fold(0.0, f64::max);
        assert!(gap < prev, "v+ {vp}: {gap} !< {prev}");
        prev = gap;
    }
}

// --- mode tracking -------------------------------------------------------

fn arc(n: usize) -> Vec<C64> {
    (0..=n).map(|k| 2.0 * C64::from_polar(1.0, 0.5 * std::f64::consts::PI * k as f64 / n as f64)).collect()
}

fn finite_system() -> EigenSystem {
    EigenSystem::finite(ShockParams::new(5.0 / 3.0, 1e-3).unwrap())
}

fn max_diff(a: &Vec3, b: &Vec3) -> f64 {
    (0..3).map(|i| (a[i] - b[i]).norm()).fold(0.0, f64::max)
}

/// Spectral projector of `A₋(λ)` onto its eigenvalue of largest real part,
/// formed as a Frobenius covariant from the eigenvalues alone.
fn projector(sys: &EigenSystem, lam: C64) -> Mat3 {
    let a = sys.a_minus(lam);
    let mut ev = linalg::eigenvalues(&a);
    ev.sort_by(|x, y| y.re.total_cmp(&x.re));
    let f1 = a.shift(ev[1]).scale((ev[0] - ev[1]).inv());
    let f2 = a.shift(ev[2]).scale((ev[0] - ev[2]).inv());
    f1.mul(&f2)
}

/// RK4 quadrature of Kato's transport equation `r' = P'(λ(t)) r` along the arc.
fn kato_quadrature(sys: &EigenSystem, r0: Vec3, steps: usize) -> Vec3 {
    let lam = |t: f64| 2.0 * C64::from_polar(1.0, t);
    let rhs = |t: f64, r: &Vec3| {
        let h = 1e-5;
        let dp = projector(sys, lam(t + h)).sub(&projector(sys, lam(t - h))).scale(c(0.5 / h, 0.0));
        dp.mul_vec(r)
    };
    let add = |r: &Vec3, k: &Vec3, s: f64| [r[0] + k[0] * s, r[1] + k[1] * s, r[2] + k[2] * s];
    let t1 = 0.5 * std::f64::consts::PI;
    let h = t1 / steps as f64;
    let mut r = r0;
    for i in 0..steps {
        let t = i as f64 * h;
        let k1 = rhs(t, &r);
        let k2 = rhs(t + 0.5 * h, &add(&r, &k1, 0.5 * h));
        let k3 = rhs(t + 0.5 * h, &add(&r, &k2, 0.5 * h));
        let k4 = rhs(t + h, &add(&r, &k3, h));
        r = [0, 1, 2].map(|j| r[j] + (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]) * (h / 6.0));
    }
    r
}

#[test]
fn kato_continuation_matches_transport_quadrature() {
    let sys = finite_system();
    let r0 = continue_modes(&arc(1)[..1], &sys, Side::Minus, TrackScheme::KatoContinuation, DEFAULT_SPLIT_TOL).unwrap().vectors[0];
    let oracle = kato_quadrature(&sys, r0, 400);
    for n in [1, 4, 16] {
        let t = continue_modes(&arc(n), &sys, Side::Minus, TrackScheme::KatoContinuation, DEFAULT_SPLIT_TOL).unwrap();
        let err = max_diff(t.vectors.last().unwrap(), &oracle);
        assert!(err < 1e-9, "n {n}: {err:e}");
    }
}

/// Largest-real-part eigenpair of `M₀ + zM₁ + z²M₂` for a fixed nonsymmetric family.
fn generic_top(z: C64) -> (Vec3, Vec3) {
    let m0 = Mat3([
        [c(0.3, 0.1), c(-1.2, 0.4), c(0.5, 0.0)],
        [c(0.8, -0.6), c(1.1, 0.2), c(-0.7, 0.3)],
        [c(-0.4, 0.9), c(0.2, -0.5), c(-1.5, 0.0)],
    ]);
    let m1 = Mat3([
        [c(0.6, 0.0), c(0.1, 0.0), c(-0.9, 0.0)],
        [c(-0.3, 0.0), c(0.4, 0.0), c(1.3, 0.0)],
        [c(0.7, 0.0), c(-1.1, 0.0), c(0.2, 0.0)],
    ]);
    let m2 = Mat3([
        [c(-0.5, 0.0), c(0.9, 0.0), c(0.1, 0.0)],
        [c(0.2, 0.0), c(-0.8, 0.0), c(0.6, 0.0)],
        [c(1.0, 0.0), c(0.3, 0.0), c(-0.2, 0.0)],
    ]);
    let a = m0.add(&m1.scale(z)).add(&m2.scale(z * z));
    let mut ev = linalg::eigenvalues(&a);
    ev.sort_by(|x, y| y.re.total_cmp(&x.re));
    (linalg::eigenvector(&a, ev[0]), linalg::left_eigenvector(&a, ev[0]))
}

#[test]
fn kato_step_is_second_order_on_generic_family() {
    let end = |n: usize| {
        let zs: Vec<C64> = (0..=n).map(|k| 0.3 * C64::from_polar(1.0, 0.5 * std::f64::consts::PI * k as f64 / n as f64)).collect();
        let (e, mut l_prev) = generic_top(zs[0]);
        let mut r = linalg::normalize_max_entry(&e);
        for &z in &zs[1..] {
            let (e, l) = generic_top(z);
            r = kato_step(&r, &l_prev, &e, &l).expect("no branch flip");
            l_prev = l;
        }
        r
    };
    let v: Vec<Vec3> = [2, 4, 8, 16].iter().map(|&n| end(n)).collect();
    let d: Vec<f64> = v.windows(2).map(|w| max_diff(&w[0], &w[1])).collect();
    assert!(d[0] > 1e-6, "family too benign: {d:?}");
    for w in d.windows(2) {
        let ratio = w[0] / w[1];
        assert!((3.0..5.5).contains(&ratio), "{d:?}");
    }
}

#[test]
fn kato_refinement_on_shock_stencil_is_exact() {
    let sys = finite_system();
    let end = |n: usize| {
        *continue_modes(&arc(n), &sys, Side::Minus, TrackScheme::KatoContinuation, DEFAULT_SPLIT_TOL)
            .unwrap()
            .vectors
            .last()
            .unwrap()
    };
    let (a, b, d) = (end(2), end(4), end(8));
    assert!(max_diff(&a, &b) < 1e-12 && max_diff(&b, &d) < 1e-12);
}

#[test]
fn tracked_vectors_are_eigenvectors_without_flips() {
    let contour = build_contour(10.0, 128).unwrap();
    for sys in [finite_system(), EigenSystem::limiting()] {
        let t = track_contour(&contour, &sys, Side::Minus, TrackScheme::KatoContinuation, DEFAULT_SPLIT_TOL).unwrap();
        for (k, &lam) in contour.samples().iter().enumerate() {
            let m = t.mode(k);
            let a = sys.a_minus(lam);
            let av = a.mul_vec(&m.vector);
            let res = (0..3).map(|i| (av[i] - m.mu * m.vector[i]).norm()).fold(0.0, f64::max) / linalg::norm(&m.vector);
            assert!(res <= 1e-9 * (1.0 + lam.norm()), "k {k}: {res:e}");
        }
        let path = contour.mirror_plan().unwrap().path.clone();
        for w in path.windows(2) {
            let (u, v) = (t.vectors[w[0]], t.vectors[w[1]]);
            assert!(linalg::angle(&u, &v) < 0.5 * std::f64::consts::PI);
        }
    }
}

#[test]
fn single_point_track_is_pointwise() {
    let sys = finite_system();
    let lam = c(2.0, 1.0);
    let k = continue_modes(&[lam], &sys, Side::Minus, TrackScheme::KatoContinuation, DEFAULT_SPLIT_TOL).unwrap();
    let p = continue_modes(&[lam], &sys, Side::Minus, TrackScheme::PointwiseEigenvector, DEFAULT_SPLIT_TOL).unwrap();
    assert_eq!(k.vectors, p.vectors);
    let e = linalg::normalize_max_entry(&linalg::eigenvector(&sys.a_minus(lam), k.rates[0]));
    assert!(max_diff(&k.vectors[0], &e) < 1e-12);
}

#[test]
fn limiting_adjoint_track_is_closed_form() {
    let contour = build_contour(10.0, 64).unwrap();
    let sys = EigenSystem::limiting();
    for scheme in [TrackScheme::KatoContinuation, TrackScheme::PointwiseEigenvector] {
        let t = track_contour(&contour, &sys, Side::PlusAdjoint, scheme, DEFAULT_SPLIT_TOL).unwrap();
        for (k, &lam) in contour.samples().iter().enumerate() {
            let v = t.vectors[k];
            let w = limiting_adjoint_vector(lam);
            // Parallel up to scale.
            assert!(linalg::norm(&linalg::cross(&v, &w)) < 1e-12 * linalg::norm(&v) * linalg::norm(&w));
        }
    }
}

#[test]
fn scheme_names_parse() {
    assert_eq!("kato".parse::<TrackScheme>().unwrap(), TrackScheme::KatoContinuation);
    assert_eq!("pointwise_eigenvector".parse::<TrackScheme>().unwrap(), TrackScheme::PointwiseEigenvector);
    assert!("other".parse::<TrackScheme>().is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn pairing_is_conserved(re in 0.0f64..10.0, im in -10.0f64..10.0, limiting in any::<bool>()) {
        let lam = c(re, im);
        prop_assume!(lam.norm() > 1e-3 && lam.norm() <= 10.0);
        let cfg = EvansConfig::default();
        let m = if limiting { EvansModel::Limiting } else { shared_finite().clone() };
        let v = evans_point(lam, &m, &cfg).unwrap();
        prop_assert!(v.conservation_defect <= 1e-6, "lambda {}: {:e}", lam, v.conservation_defect);
        prop_assert!(v.d.is_finite());
    }
}

#[allow(dead_code)]
fn _assert_send_sync() {
    fn f<T: Send + Sync>() {}
    f::<EvansModel>();
    f::<Arc<EvansModel>>();
}
