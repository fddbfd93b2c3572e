//! Model-independent invariants, checked on synthetic media.

use casimir_fp::casimir::{casimir_pressure, pressure_n0_screened, CasimirJob, QuadratureSettings};
use casimir_fp::electrolyte::ScreeningState;
use casimir_fp::layers::{fresnel_interface, slab_reflection, stack_reflection, LayerStack, Polarization, StackRole};
use casimir_fp::materials::{DielectricModel, DrudeTerm, MaterialsDatabase, ModelKind, OscillatorTerm, StaticPermittivity};
use casimir_fp::optics::{imaginary_axis_media, power_coefficients, transfer_matrix, Medium};
use num_complex::Complex;
use proptest::prelude::*;
use std::sync::Arc;

fn constant(name: &str, eps: f64) -> Arc<DielectricModel<f64>> {
    Arc::new(DielectricModel::constant(name, eps))
}

fn drude_metal() -> Arc<DielectricModel<f64>> {
    let mut m = DielectricModel::oscillators("metal", Vec::new(), 1.0);
    m.kind = ModelKind::DrudeLorentz;
    m.drude_terms = vec![DrudeTerm {
        plasma_frequency: 1.37e16,
        damping: 5.3e13,
    }];
    m.oscillator_terms = vec![OscillatorTerm {
        strength: 2.0,
        resonance: 6.0e15,
        damping: 1.0e15,
    }];
    m.static_permittivity = StaticPermittivity::Infinite;
    m.validate().unwrap();
    Arc::new(m)
}

fn pol() -> impl Strategy<Value = Polarization> {
    prop_oneof![Just(Polarization::TE), Just(Polarization::TM)]
}

fn lossless(eps: f64, thickness: f64, k0: f64) -> Medium<f64> {
    Medium {
        eps: Complex::new(eps, 0.0),
        kz: Complex::new(eps.sqrt() * k0, 0.0),
        thickness,
    }
}

fn lossy(eps: Complex<f64>, thickness: f64, k0: f64) -> Medium<f64> {
    let mut n = eps.sqrt();
    if n.im < 0.0 {
        n = -n;
    }
    Medium {
        eps,
        kz: n * k0,
        thickness,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn interface_amplitude_is_bounded_and_antisymmetric(
        e1 in 1.0f64..120.0, e2 in 1.0f64..120.0, k in 1e4f64..1e9, xi in 0.0f64..1e17, p in pol()
    ) {
        let r12 = fresnel_interface(e1, e2, k, xi, p).unwrap();
        let r21 = fresnel_interface(e2, e1, k, xi, p).unwrap();
        prop_assert!(r12.abs() < 1.0);
        prop_assert_eq!(r12, -r21);
    }

    #[test]
    fn stack_amplitude_is_bounded(
        eps in prop::collection::vec(1.0f64..80.0, 2..5),
        thick in prop::collection::vec(1e-9f64..500e-9, 4),
        k in 1e4f64..1e9, xi in 1e12f64..1e17, p in pol()
    ) {
        let ambient = constant("ambient", eps[0]);
        let mut layers: Vec<_> = eps[1..]
            .iter()
            .zip(&thick)
            .map(|(&e, &t)| casimir_fp::layers::Layer::finite(constant("layer", e), t))
            .collect();
        layers.push(casimir_fp::layers::Layer::half_space(drude_metal()));
        let stack = LayerStack::new(ambient, layers, StackRole::Bottom).unwrap();
        let r = stack_reflection(&stack, k, xi, p).unwrap();
        prop_assert!(r.abs() < 1.0, "{}", r);
    }

    #[test]
    fn slab_matches_transfer_matrix_on_three_media(
        e1 in 1.0f64..80.0, e2 in 1.0f64..80.0, e3 in 1.0f64..80.0,
        l in 1e-9f64..400e-9, k in 1e5f64..1e8, xi in 1e13f64..1e16, p in pol()
    ) {
        let stack = LayerStack::new(
            constant("a", e1),
            vec![
                casimir_fp::layers::Layer::finite(constant("b", e2), l),
                casimir_fp::layers::Layer::half_space(constant("c", e3)),
            ],
            StackRole::Bottom,
        )
        .unwrap();
        let slab = slab_reflection(&stack, k, xi, p).unwrap();
        let (r, _) = transfer_matrix(&imaginary_axis_media(&[e1, e2, e3], &[l], k, xi), p);
        prop_assert!((slab - r.re).abs() < 1e-12, "{} vs {}", slab, r);
        prop_assert!(r.im.abs() < 1e-12);
    }

    #[test]
    fn lossless_stacks_conserve_energy(
        n_in in 1.0f64..2.5, n_out in 1.0f64..2.5,
        layers in prop::collection::vec((1.0f64..6.0, 0.0f64..600e-9), 0..5),
        wavelength in 400e-9f64..1200e-9
    ) {
        let k0 = 2.0 * std::f64::consts::PI / wavelength;
        let mut media = vec![lossless(n_in * n_in, 0.0, k0)];
        media.extend(layers.iter().map(|&(e, d)| lossless(e, d, k0)));
        media.push(lossless(n_out * n_out, 0.0, k0));
        let (r, t, a) = power_coefficients(&media);
        prop_assert!((r + t + a - 1.0).abs() < 1e-10);
        prop_assert!(a.abs() < 1e-12, "absorbance {}", a);
        prop_assert!((0.0..=1.0).contains(&r) && (0.0..=1.0).contains(&t));
    }

    #[test]
    fn lossy_stacks_are_passive(
        layers in prop::collection::vec((-40.0f64..6.0, 0.0f64..5.0, 0.0f64..200e-9), 1..5),
        wavelength in 400e-9f64..1200e-9
    ) {
        let k0 = 2.0 * std::f64::consts::PI / wavelength;
        let mut media = vec![lossless(1.77, 0.0, k0)];
        media.extend(layers.iter().map(|&(re, im, d)| lossy(Complex::new(re, im.max(1e-3)), d, k0)));
        media.push(lossless(2.1, 0.0, k0));
        let (r, t, a) = power_coefficients(&media);
        prop_assert!((r + t + a - 1.0).abs() < 1e-10);
        prop_assert!(a >= -1e-10, "absorbance {}", a);
        prop_assert!(r <= 1.0 + 1e-10 && t >= 0.0);
    }

    #[test]
    fn transmittance_is_reciprocal(
        layers in prop::collection::vec((-40.0f64..6.0, 0.0f64..5.0, 0.0f64..200e-9), 1..5),
        n_a in 1.0f64..2.0, n_b in 1.0f64..2.0,
        wavelength in 400e-9f64..1200e-9
    ) {
        let k0 = 2.0 * std::f64::consts::PI / wavelength;
        let mut forward = vec![lossless(n_a * n_a, 0.0, k0)];
        forward.extend(layers.iter().map(|&(re, im, d)| lossy(Complex::new(re, im), d, k0)));
        forward.push(lossless(n_b * n_b, 0.0, k0));
        let backward: Vec<_> = forward.iter().rev().copied().collect();
        let (_, t_f, _) = power_coefficients(&forward);
        let (_, t_b, _) = power_coefficients(&backward);
        prop_assert!((t_f - t_b).abs() < 1e-10, "{} vs {}", t_f, t_b);
    }
}

fn screened_job(kappa_length: f64, d: f64) -> CasimirJob<f64> {
    let water = constant("liquid", 78.0);
    let metal = drude_metal();
    let top = LayerStack::new(
        water.clone(),
        vec![casimir_fp::layers::Layer::half_space(metal.clone())],
        StackRole::Top,
    )
    .unwrap();
    let bottom = LayerStack::new(
        water,
        vec![
            casimir_fp::layers::Layer::finite(constant("coating", 2.0), 150e-9),
            casimir_fp::layers::Layer::half_space(metal),
        ],
        StackRole::Bottom,
    )
    .unwrap();
    let screening = ScreeningState::with_debye_length(300.0, 78.0, kappa_length).unwrap();
    CasimirJob::new(top, bottom, d, 300.0, screening).unwrap()
}

#[test]
fn static_term_is_continuous_in_kappa() {
    for d in [60e-9, 150e-9] {
        let free = pressure_n0_screened(&screened_job(f64::INFINITY, d)).unwrap();
        let weak = pressure_n0_screened(&screened_job(1e3, d)).unwrap();
        assert!((weak - free).abs() < 1e-3 * free.abs(), "{weak} vs {free}");
        for lambda in [20e-9, 100e-9, 500e-9] {
            let a = pressure_n0_screened(&screened_job(lambda, d)).unwrap();
            let b = pressure_n0_screened(&screened_job(lambda * (1.0 + 1e-6), d)).unwrap();
            assert!((a - b).abs() < 1e-5 * free.abs(), "{lambda}: {a} vs {b}");
        }
        let strong = pressure_n0_screened(&screened_job(0.2e-9, d)).unwrap();
        assert!(strong.abs() < 1e-12 * free.abs(), "{strong}");
    }
}

#[test]
fn refining_the_wavevector_grid_stays_within_error_estimate() {
    for (lambda, d) in [(f64::INFINITY, 40e-9), (30e-9, 120e-9), (1e-6, 400e-9)] {
        let job = screened_job(lambda, d);
        let coarse = casimir_pressure(&job).unwrap();
        let mut fine = job.clone();
        fine.numerics = QuadratureSettings {
            initial_segments: 2 * job.numerics.initial_segments,
            max_segments: 2 * job.numerics.max_segments,
            ..job.numerics
        };
        let refined = casimir_pressure(&fine).unwrap();
        assert!(
            (refined.p_total - coarse.p_total).abs() <= coarse.estimated_error,
            "d = {d}: {} vs {} (estimate {})",
            coarse.p_total,
            refined.p_total,
            coarse.estimated_error
        );
    }
}

#[test]
fn pressure_evaluation_is_bitwise_reproducible() {
    let job = screened_job(100e-9, 90e-9);
    let a = casimir_pressure(&job).unwrap();
    let b = casimir_pressure(&job).unwrap();
    assert_eq!(a.p_total.to_bits(), b.p_total.to_bits());
    assert_eq!(a.n_terms_used, b.n_terms_used);
}

#[test]
fn shipped_database_is_read_only_shareable() {
    fn assert_sync<T: Send + Sync>(_: &T) {}
    let db = MaterialsDatabase::<f64>::bundled();
    assert_sync(&db);
}
