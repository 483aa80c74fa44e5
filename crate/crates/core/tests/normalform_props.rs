mod common;

use krein_core::dispersion::{
    counterstream_frequencies, find_discrete_modes, hamiltonian_spectrum, mode_signature, Coupling,
    Signature, SlowBranch, Species,
};
use krein_core::normalform::{
    build_block, galilean_shift, normal_form, symplectic_spectrum, NormalFormClass, QuadraticBlock,
};
use krein_core::scalar::Cplx;
use krein_core::{Block, Family, MultiFluid, Tolerances};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::matched_distance;

fn species() -> impl Strategy<Value = Species<f64>> {
    (0.2..2.0f64, -2.0..2.0f64, 0.05..1.0f64).prop_map(|(rho, u, c2)| Species::new(rho, u, c2))
}

fn family() -> impl Strategy<Value = MultiFluid> {
    prop_oneof![
        (0.2..2.0f64, 0.1..3.0f64).prop_map(|(rho, c)| MultiFluid::sound(rho, c).unwrap()),
        (0.05..2.0f64).prop_map(MultiFluid::counterstream),
        (-1.5..1.5f64, -1.5..1.5f64, 0.2..2.0f64, 0.3..2.0f64)
            .prop_map(|(up, um, beta, c)| MultiFluid::jeans_scaled(up, um, beta, c).unwrap()),
        (
            prop::collection::vec(species(), 1..4),
            prop_oneof![
                Just(Coupling::PlasmaShielded),
                Just(Coupling::Electrostatic),
                Just(Coupling::GravitationalJeans),
            ]
        )
            .prop_map(|(s, c)| MultiFluid::new(s, c).unwrap()),
    ]
}

/// Frequencies `iλ` of the flow.
fn flow_frequencies(block: &Block) -> Vec<Cplx<f64>> {
    symplectic_spectrum(block)
        .unwrap()
        .iter()
        .map(|l| Cplx::new(0.0, 1.0) * l)
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn flow_spectrum_matches_dispersion(eq in family(), k in 0.1..4.0f64) {
        let block = build_block(&eq, k).unwrap();
        let modes = find_discrete_modes(&Family::from(eq), k).unwrap();
        let want = hamiltonian_spectrum(&modes);
        let got = flow_frequencies(&block);
        let scale = want.iter().fold(1.0f64, |s, z| s.max(z.norm()));
        // Near a collision the eigenvalues split like sqrt(roundoff).
        let d = matched_distance(&got, &want);
        prop_assert!(d < 1e-8 * scale || d < 1e-6 * scale && got.iter().any(|z| z.im.abs() < 1e-4 * scale && z.im != 0.0),
            "distance {}", d);
    }

    #[test]
    fn signatures_match_dielectric_energy(eq in family(), k in 0.1..4.0f64) {
        let block = build_block(&eq, k).unwrap();
        let report = normal_form(&block).unwrap();
        let fam = Family::from(eq);
        let roots = find_discrete_modes(&fam, k).unwrap();
        for m in report.modes.iter().filter(|m| m.sigma != 0) {
            let nu = m.omega.re;
            // The mode shows up as a root at +ν or, on the -k branch, at -ν.
            let matched: Vec<_> = roots
                .iter()
                .filter(|r| r.is_neutral() && (r.omega.re.abs() - nu).abs() < 1e-7 * nu.max(1.0))
                .collect();
            prop_assert!(!matched.is_empty(), "no root for ν = {}", nu);
            for r in matched {
                if r.near_pole {
                    continue;
                }
                let (sig, energy) = mode_signature(&fam, k, r.omega.re).unwrap();
                if energy.abs() > 1e-6 {
                    prop_assert_eq!(sig.as_i8(), m.sigma, "ν = {}", nu);
                }
            }
        }
    }

    #[test]
    fn definite_blocks_are_all_positive(seed in 0u64..100_000, n in 1usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let block = QuadraticBlock { k: 1.0, momentum: random_spd(&mut rng, n), position: random_spd(&mut rng, n) };
        let report = normal_form(&block).unwrap();
        prop_assert_eq!(report.classification, NormalFormClass::AllStable);
        prop_assert_eq!(report.modes.len(), n);
        prop_assert!(report.modes.iter().all(|m| m.sigma == 1 && m.omega.re > 0.0));
        prop_assert!(report.reconstruction_error.unwrap() < 1e-9);
    }
}

fn random_spd(rng: &mut impl Rng, n: usize) -> DMatrix<f64> {
    let a = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    &a * a.transpose() + DMatrix::identity(n, n) * 0.3
}

#[test]
fn energy_is_reconstructed_from_normal_coordinates() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let blocks = [
        build_block(&MultiFluid::counterstream(1.3), 1.0).unwrap(),
        build_block(&MultiFluid::sound(1.0, 2.0).unwrap(), 3.0).unwrap(),
        build_block(&MultiFluid::jeans_scaled(0.4, 0.9, 0.7, 0.8).unwrap(), 2.5).unwrap(),
        QuadraticBlock {
            k: 1.0,
            momentum: random_spd(&mut rng, 4),
            position: random_spd(&mut rng, 4),
        },
    ];
    for block in &blocks {
        let report = normal_form(block).unwrap();
        assert_eq!(report.classification, NormalFormClass::AllStable);
        let s = report.transform.as_ref().unwrap();
        let a = block.hessian();
        let n = block.dof();
        let freqs: Vec<f64> = (0..n)
            .map(|i| {
                let col = s.column(i);
                (col.transpose() * &a * col)[(0, 0)]
            })
            .collect();
        for _ in 0..1000 {
            let zeta = DVector::from_fn(2 * n, |_, _| rng.random_range(-1.0..1.0));
            let z = s * &zeta;
            let h = 0.5 * (z.transpose() * &a * &z)[(0, 0)];
            let normal: f64 = (0..n)
                .map(|i| 0.5 * freqs[i] * (zeta[i].powi(2) + zeta[n + i].powi(2)))
                .sum();
            assert!(
                (h - normal).abs() < 1e-9 * normal.abs().max(1.0),
                "{h} vs {normal}"
            );
        }
        // σω from the transform agrees with the reported modes.
        let mut from_s = freqs.clone();
        from_s.sort_by(f64::total_cmp);
        let mut reported: Vec<f64> = report
            .modes
            .iter()
            .map(|m| m.sigma as f64 * m.omega.re)
            .collect();
        reported.sort_by(f64::total_cmp);
        for (x, y) in from_s.iter().zip(&reported) {
            assert!((x - y).abs() < 1e-9 * y.abs().max(1.0));
        }
    }
}

#[test]
fn sound_block_has_two_positive_modes() {
    let r = normal_form(&build_block(&MultiFluid::sound(1.0, 2.0).unwrap(), 3.0).unwrap()).unwrap();
    assert_eq!(r.classification, NormalFormClass::AllStable);
    assert_eq!(r.modes.len(), 2);
    for m in &r.modes {
        assert!((m.omega.re - 6.0).abs() < 1e-12);
        assert_eq!(m.sigma, 1);
    }
}

#[test]
fn exotic_fluid_has_two_growing_directions() {
    let eq = MultiFluid::new(vec![Species::new(1.0, 0.0, -1.0)], Coupling::Uncoupled).unwrap();
    let block = build_block(&eq, 1.5).unwrap();
    let r = normal_form(&block).unwrap();
    assert_eq!(
        r.classification,
        NormalFormClass::UnstablePairs { count: 2 }
    );
    for l in symplectic_spectrum(&block).unwrap() {
        assert!(l.im.abs() < 1e-12);
        assert!((l.re.abs() - 1.5).abs() < 1e-12);
    }
}

#[test]
fn symmetric_counterstream_is_doubly_degenerate() {
    for (u_e, k) in [(1.3, 1.0), (0.9, 2.0), (2.0, 0.4)] {
        let f = counterstream_frequencies(u_e, k).unwrap();
        let SlowBranch::Stable(slow) = f.omega_minus else {
            panic!("slow branch unstable")
        };
        let r = normal_form(&build_block(&MultiFluid::counterstream(u_e), k).unwrap()).unwrap();
        assert_eq!(r.classification, NormalFormClass::AllStable);
        let g = r.grouped(1e-7);
        assert_eq!(g.len(), 2);
        let fast = g
            .iter()
            .find(|x| (x.0 - f.omega_plus).abs() < 1e-9)
            .unwrap();
        let slow = g.iter().find(|x| (x.0 - slow).abs() < 1e-9).unwrap();
        assert_eq!((fast.1, fast.2), (1, 2));
        assert_eq!((slow.1, slow.2), (-1, 2));
        assert_eq!(
            mode_signature(&Family::from(MultiFluid::counterstream(u_e)), k, slow.0)
                .unwrap()
                .0,
            Signature::Negative
        );
    }
}

#[test]
fn unstable_counterstream_reports_pairs() {
    let r = normal_form(&build_block(&MultiFluid::counterstream(0.2), 1.0).unwrap()).unwrap();
    assert!(matches!(
        r.classification,
        NormalFormClass::UnstablePairs { .. }
    ));
    assert!(r.transform.is_none());
}

#[test]
fn galilean_shift_properties() {
    let tol = Tolerances::default();
    let r = normal_form(&build_block(&MultiFluid::counterstream(1.3), 1.0).unwrap()).unwrap();
    let same = galilean_shift(&r, 0.0, &tol);
    assert_eq!(same, r);
    let back = galilean_shift(&galilean_shift(&r, 0.77, &tol), -0.77, &tol);
    for (a, b) in r.modes.iter().zip(&back.modes) {
        assert!((a.omega - b.omega).norm() < 1e-15);
        assert_eq!(a.sigma, b.sigma);
    }
    let fast = r.modes.iter().map(|m| m.omega.re).fold(0.0, f64::max);
    let moved = galilean_shift(&r, fast, &tol);
    assert_eq!(moved.classification, NormalFormClass::Degenerate);
    assert!(moved.modes.iter().any(|m| m.omega.norm() < 1e-15));
    assert!(moved
        .modes
        .iter()
        .zip(&r.modes)
        .all(|(a, b)| a.sigma == b.sigma));
}

#[test]
fn bad_wavenumber() {
    assert!(build_block(&MultiFluid::counterstream(1.0), 0.0).is_err());
}
