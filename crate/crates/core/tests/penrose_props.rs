use krein_core::penrose::{
    classify_stability, critical_parameter, hilbert_transform, landau_dielectric,
    locate_unstable_roots, penrose_contour, winding_number, Classification, ContourGrid,
    PenroseError,
};
use krein_core::profile::{Profile, TabulatedProfile};
use krein_core::Distribution;
use proptest::prelude::*;

/// Symmetric-exclusion midpoint sum for `PV ∫ f0'(p) / (p - u) dp` with
/// `n` node pairs of spacing `h`; the excluded radius around `u` is `h/2`.
fn pv_symmetric(profile: &Distribution, u: f64, h: f64, n: usize) -> f64 {
    let mut s = 0.0;
    for j in 0..n {
        let d = (j as f64 + 0.5) * h;
        s += (profile.derivative(u + d) - profile.derivative(u - d)) / d;
    }
    s * h
}

/// Oracle: the symmetric sum at 10⁶ pairs and half that, Richardson
/// extrapolated in the exclusion radius (the error is O(h²)).
fn hilbert_oracle(profile: &Distribution, u: f64) -> f64 {
    let width = 12.0;
    let n = 1_000_000;
    let fine = pv_symmetric(profile, u, width / n as f64, n);
    let coarse = pv_symmetric(profile, u, 2.0 * width / n as f64, n / 2);
    (4.0 * fine - coarse) / 3.0 / std::f64::consts::PI
}

#[test]
fn hilbert_maxwellian_origin_matches_oracle() {
    let got = hilbert_transform(&Distribution::Maxwellian, 0.0).unwrap();
    let want = hilbert_oracle(&Distribution::Maxwellian, 0.0);
    assert!((got - want).abs() < 1e-7, "{got} vs {want}");
    // Closed form for exp(-p²): H[f0'](0) = -2/sqrt(pi).
    assert!((got + 2.0 / std::f64::consts::PI.sqrt()).abs() < 1e-12);
}

#[test]
fn hilbert_bimaxwellian_matches_oracle() {
    let prof = Profile::BiMaxwellian { c: 1.3 };
    for u in [-2.0, -0.4, 0.0, 0.9, 1.3, 2.7] {
        let got = hilbert_transform(&prof, u).unwrap();
        let want = hilbert_oracle(&prof, u);
        assert!((got - want).abs() < 1e-7, "u={u}: {got} vs {want}");
    }
}

#[test]
fn hilbert_of_flat_profile_vanishes() {
    let p: Vec<f64> = (0..9).map(|i| i as f64 - 4.0).collect();
    let prof = Profile::Tabulated(TabulatedProfile::new(p, vec![0.0; 9]).unwrap());
    for u in [-3.0, 0.0, 0.5, 2.0] {
        assert_eq!(hilbert_transform(&prof, u).unwrap(), 0.0);
    }
}

#[test]
fn hilbert_decays_far_out() {
    let near = hilbert_transform(&Distribution::Maxwellian, 5.0)
        .unwrap()
        .abs();
    let far = hilbert_transform(&Distribution::Maxwellian, 50.0)
        .unwrap()
        .abs();
    assert!(far < near / 50.0);
    assert!(far < 1e-3);
}

#[test]
fn truncated_table_is_rejected() {
    let p: Vec<f64> = (0..9).map(|i| i as f64 * 0.25).collect();
    let f = vec![1.0; 9];
    let prof = Profile::Tabulated(TabulatedProfile::new(p, f).unwrap());
    assert!(matches!(
        hilbert_transform(&prof, 0.3),
        Err(PenroseError::TruncationError { .. })
    ));
}

fn even_profile() -> impl Strategy<Value = Distribution> {
    prop_oneof![
        Just(Profile::Maxwellian),
        (0.0..2.5f64).prop_map(|c| Profile::BiMaxwellian { c })
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn even_profiles_give_mirror_contours(prof in even_profile(), k in 0.2..3.0f64, u in 0.0..4.0f64) {
        let a = landau_dielectric(&prof, k, u).unwrap();
        let b = landau_dielectric(&prof, k, -u).unwrap();
        prop_assert!((a - b.conj()).norm() < 1e-9);
    }

    #[test]
    fn shielding_scales_with_k(prof in even_profile(), k in 0.2..3.0f64, lambda in 0.3..4.0f64, u in -4.0..4.0f64) {
        let a = landau_dielectric(&prof, k, u).unwrap() - 1.0;
        let b = landau_dielectric(&prof, lambda * k, u).unwrap() - 1.0;
        prop_assert!((b - a / (lambda * lambda)).norm() <= 1e-13 * a.norm().max(1.0));
    }

    #[test]
    fn winding_is_grid_robust(c in 0.0..2.5f64, k in 0.3..2.0f64) {
        let prof = Profile::BiMaxwellian { c };
        let base = classify_stability(&prof, k, &ContourGrid { half_width: None, points: 2001 }).unwrap();
        prop_assume!(base.classification != Classification::Marginal);
        let fine = classify_stability(&prof, k, &ContourGrid { half_width: None, points: 4001 }).unwrap();
        prop_assert_eq!(base.winding, fine.winding);
        prop_assert_eq!(base.classification, fine.classification);
    }

    #[test]
    fn winding_matches_newton_oracle(c in 1.2..2.5f64, k in 0.2..0.6f64) {
        let prof = Profile::BiMaxwellian { c };
        let report = classify_stability(&prof, k, &ContourGrid::default()).unwrap();
        let roots = locate_unstable_roots(&prof, k).unwrap();
        // The root search cannot see growth below its floor, so only
        // compare when every root it finds sits clearly above it.
        prop_assume!(roots.iter().all(|r| r.im > 0.05));
        prop_assert_eq!(report.winding, roots.len() as i32);
    }
}

#[test]
fn maxwellian_is_stable_with_mirror_contour() {
    for k in [0.3, 1.0, 2.0] {
        let contour =
            penrose_contour(&Distribution::Maxwellian, k, &ContourGrid::default()).unwrap();
        assert_eq!(winding_number(&contour), 0);
        // Both ends return to ε ≈ 1.
        for e in [contour.eps[0], *contour.eps.last().unwrap()] {
            assert!((e - 1.0).norm() < 0.05 / (k * k));
        }
        let r = classify_stability(&Distribution::Maxwellian, k, &ContourGrid::default()).unwrap();
        assert_eq!(r.classification, Classification::Stable);
    }
}

#[test]
fn wide_bimaxwellian_is_unstable_once() {
    let prof = Distribution::BiMaxwellian { c: 2.0 };
    let r = classify_stability(&prof, 0.5, &ContourGrid::default()).unwrap();
    assert_eq!(r.classification, Classification::Unstable { count: 1 });
    let roots = locate_unstable_roots(&prof, 0.5).unwrap();
    assert_eq!(roots.len(), 1);
    assert!(roots[0].re.abs() < 1e-8);
}

#[test]
fn stable_bracket_has_no_sign_change() {
    let r = critical_parameter(
        |c| Profile::BiMaxwellian { c },
        0.5,
        (0.1, 0.5),
        1e-6,
        &ContourGrid::default(),
    );
    assert_eq!(r, Err(PenroseError::NoSignChange));
}

#[test]
fn bad_wavenumber() {
    assert!(matches!(
        landau_dielectric(&Distribution::Maxwellian, -1.0, 0.0),
        Err(PenroseError::InvalidWavenumber(_))
    ));
}

#[test]
fn langmuir_near_miss_does_not_add_winding() {
    // At small k the contour skims the origin near u ≈ ±9.7, where f0' is
    // around 1e-29; the side it passes on still decides the winding.
    let prof = Distribution::BiMaxwellian { c: 1.2 };
    let r = classify_stability(&prof, 0.2, &ContourGrid::default()).unwrap();
    assert_eq!(r.classification, Classification::Unstable { count: 1 });
    assert_eq!(locate_unstable_roots(&prof, 0.2).unwrap().len(), 1);
}
