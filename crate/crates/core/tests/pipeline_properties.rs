//! Cross-module invariants of the simulate → reconstruct → integrate chain.

use nalgebra::DMatrix;
use proptest::prelude::*;
use railsense_core::fiber::{
    simulate_frame, simulate_sequence, strain_at_core, CurvatureSample, FiberSpec, NoiseModel,
};
use railsense_core::phantoms::{conformity_bias, ConformityParams, PhantomSpec, RailSpec};
use railsense_core::reconstruct::{profile_from_sequence, ReconstructionSettings};
use railsense_core::seeds::derive_stream_seed;
use std::f64::consts::TAU;

fn base_reference(spec: &FiberSpec) -> DMatrix<f64> {
    DMatrix::from_fn(spec.gratings_per_core, spec.total_cores(), |g, _| {
        spec.base_wavelengths_nm[g]
    })
}

fn constant_field(spec: &FiberSpec, kappa: f64, phi: f64) -> Vec<CurvatureSample> {
    (0..spec.gratings_per_core)
        .map(|g| CurvatureSample::new(spec.grating_position_mm(g), kappa, phi).unwrap())
        .collect()
}

fn all_gratings(spec: &FiberSpec) -> Vec<usize> {
    (0..spec.gratings_per_core).collect()
}

/// Circular distance between two angles, rad.
fn angle_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

proptest! {
    /// Strains over any set of equally spaced outer cores sum to zero.
    #[test]
    fn equally_spaced_strains_sum_to_zero(
        kappa in 0.0..0.2f64,
        phi in 0.0..TAU,
        offset_um in 10.0..60.0f64,
        cores in 3usize..12,
    ) {
        let sample = CurvatureSample::new(0.0, kappa, phi).unwrap();
        let sum: f64 = (0..cores)
            .map(|i| strain_at_core(&sample, TAU * i as f64 / cores as f64, offset_um))
            .sum();
        prop_assert!(sum.abs() < 1e-12, "Σε = {sum}");
    }

    /// Strain is linear in κ at fixed bend direction: doubling κ doubles
    /// every strain exactly.
    #[test]
    fn strain_linear_in_curvature(
        kappa in 1e-6..0.1f64,
        phi in 0.0..TAU,
        angle in 0.0..TAU,
    ) {
        let s1 = CurvatureSample::new(0.0, kappa, phi).unwrap();
        let s2 = CurvatureSample::new(0.0, 2.0 * kappa, phi).unwrap();
        let e1 = strain_at_core(&s1, angle, 35.0);
        let e2 = strain_at_core(&s2, angle, 35.0);
        prop_assert_eq!(2.0 * e1, e2);
    }

    /// Adding a uniform wavelength offset to every channel of a frame
    /// leaves each reconstructed curvature sample unchanged to 1e−12.
    #[test]
    fn common_mode_rejection(
        kappa in 1e-4..0.03f64,
        offset_nm in -1.0..1.0f64,
    ) {
        let spec = FiberSpec::default();
        let field = constant_field(&spec, kappa, 0.0);
        let frame = simulate_frame(&spec, &field, &NoiseModel::noiseless(0)).unwrap();
        let mut shifted = frame.clone();
        shifted.wavelengths.iter_mut().for_each(|w| *w += offset_nm);

        let reference = base_reference(&spec);
        let subset = all_gratings(&spec);
        let settings = ReconstructionSettings::default();
        let clean = profile_from_sequence(
            std::slice::from_ref(&frame), &reference, &spec, &subset, &settings).unwrap();
        let offset = profile_from_sequence(
            std::slice::from_ref(&shifted), &reference, &spec, &subset, &settings).unwrap();
        for (a, b) in clean.samples.iter().zip(&offset.samples) {
            prop_assert!((a.kappa_per_mm - b.kappa_per_mm).abs() < 1e-12);
            if a.direction_defined && b.direction_defined {
                prop_assert!(angle_distance(a.bend_direction_rad, b.bend_direction_rad) < 1e-12);
            }
        }
    }

    /// Scaling all wavelength shifts by λ scales every reconstructed κ by λ
    /// and leaves φ unchanged.
    #[test]
    fn scale_covariance(
        kappa in 1e-4..0.03f64,
        scale in 0.2..3.0f64,
        phi in 0.0..TAU,
    ) {
        let spec = FiberSpec::default();
        let field = constant_field(&spec, kappa, phi);
        let frame = simulate_frame(&spec, &field, &NoiseModel::noiseless(0)).unwrap();
        let reference = base_reference(&spec);
        let mut scaled = frame.clone();
        for g in 0..spec.gratings_per_core {
            for c in 0..spec.total_cores() {
                let shift = frame.wavelengths[(g, c)] - reference[(g, c)];
                scaled.wavelengths[(g, c)] = reference[(g, c)] + scale * shift;
            }
        }
        let subset = all_gratings(&spec);
        let settings = ReconstructionSettings::default();
        let original = profile_from_sequence(
            std::slice::from_ref(&frame), &reference, &spec, &subset, &settings).unwrap();
        let rescaled = profile_from_sequence(
            std::slice::from_ref(&scaled), &reference, &spec, &subset, &settings).unwrap();
        for (a, b) in original.samples.iter().zip(&rescaled.samples) {
            prop_assert!(
                (b.kappa_per_mm - scale * a.kappa_per_mm).abs() < 1e-12 * scale.max(1.0),
                "κ {} -> {} under scale {scale}", a.kappa_per_mm, b.kappa_per_mm
            );
            prop_assert!(angle_distance(a.bend_direction_rad, b.bend_direction_rad) < 1e-9);
        }
    }

    /// Constant-curvature profiles integrate to points on a circle of
    /// radius 1/κ about a common centre, with exact arc-length bookkeeping.
    #[test]
    fn constant_curvature_integrates_to_circle(
        kappa in 1e-4..0.05f64,
        segments in 3usize..20,
    ) {
        let profile = railsense_core::reconstruct::CurvatureProfile {
            grating_indices: (0..segments).collect(),
            samples: (0..segments)
                .map(|i| CurvatureSample::new(i as f64 * 10.0, kappa, 0.0).unwrap())
                .collect(),
            source_frame_count: 1,
            rejected_frame_indices: vec![],
        };
        let shape = railsense_core::shape::integrate_shape(&profile, 10.0).unwrap();
        prop_assert_eq!(shape.arc_length_mm, segments as f64 * 10.0);
        prop_assert_eq!(shape.points.len(), segments + 1);
        let radius = 1.0 / kappa;
        let centre = nalgebra::Point2::new(0.0, radius);
        for p in &shape.points {
            prop_assert!(((p - centre).norm() - radius).abs() < 1e-9);
        }
        let expected_turn = kappa * shape.arc_length_mm;
        prop_assert!((shape.tangents_rad.last().unwrap() - expected_turn).abs() < 1e-12);
    }

    /// Conformity bias and noise scale are monotone in curvature and in
    /// stiffness mismatch.
    #[test]
    fn conformity_monotonicity(
        r_small in 20.0..60.0f64,
        r_gap in 1.0..140.0f64,
        e_soft in 1e-3..1.0f64,
        e_gap in 0.0..2.0f64,
    ) {
        let rail = RailSpec::default();
        let params = ConformityParams::default();
        let softer = {
            let mut p = PhantomSpec::groove_plate();
            p.material = railsense_core::phantoms::PhantomMaterial::Material(
                railsense_core::materials::MaterialSpec {
                    name: "probe-soft".into(),
                    shore_hardness: None,
                    youngs_modulus_mpa: e_soft,
                    modulus_uncertainty_mpa: 0.0,
                });
            p
        };
        let stiffer = {
            let mut p = softer.clone();
            p.material = railsense_core::phantoms::PhantomMaterial::Material(
                railsense_core::materials::MaterialSpec {
                    name: "probe-stiffer".into(),
                    shore_hardness: None,
                    // Closer to the rail modulus: smaller mismatch.
                    youngs_modulus_mpa: e_soft * (1.0 + e_gap),
                    modulus_uncertainty_mpa: 0.0,
                });
            p
        };
        prop_assume!(e_soft * (1.0 + e_gap) <= rail.material.youngs_modulus_mpa);

        let (bias_tight, scale_tight) =
            conformity_bias(&rail, &softer, r_small, &params).unwrap();
        let (bias_wide, scale_wide) =
            conformity_bias(&rail, &softer, r_small + r_gap, &params).unwrap();
        prop_assert!(bias_tight >= bias_wide);
        prop_assert!(scale_tight >= scale_wide);

        let (bias_mismatched, scale_mismatched) =
            conformity_bias(&rail, &softer, r_small, &params).unwrap();
        let (bias_matched, scale_matched) =
            conformity_bias(&rail, &stiffer, r_small, &params).unwrap();
        prop_assert!(bias_mismatched >= bias_matched);
        prop_assert!(scale_mismatched >= scale_matched);
    }
}

/// Zero-noise round trip at each groove radius recovers κ to 1e−9 at every
/// grating.
#[test]
fn noiseless_round_trip_all_radii() {
    let spec = FiberSpec::default();
    let reference = base_reference(&spec);
    let subset = all_gratings(&spec);
    let settings = ReconstructionSettings::default();
    for radius in [30.0, 50.0, 70.0, 90.0, 110.0] {
        let kappa = 1.0 / radius;
        let field = constant_field(&spec, kappa, 0.0);
        let frames =
            simulate_sequence(&spec, &field, &NoiseModel::noiseless(11), 30, 100.0).unwrap();
        let profile =
            profile_from_sequence(&frames, &reference, &spec, &subset, &settings).unwrap();
        for s in &profile.samples {
            let rel = ((s.kappa_per_mm - kappa) / kappa).abs();
            assert!(rel < 1e-9, "R = {radius}: rel err {rel}");
        }
    }
}

/// Reconstructed κ spread grows linearly with the additive wavelength
/// noise: doubling sigma doubles the standard deviation (within 10 %).
#[test]
fn noise_scaling_is_linear() {
    let spec = FiberSpec::default();
    let kappa = 1.0 / 70.0;
    let field = constant_field(&spec, kappa, 0.0);
    let reference = base_reference(&spec);
    let subset = vec![0usize];
    let settings = ReconstructionSettings::default();

    let spread = |sigma: f64| -> f64 {
        let mut kappas = Vec::with_capacity(1000);
        for trial in 0..1000u64 {
            let noise = NoiseModel {
                wavelength_sigma_nm: sigma,
                gain_sigma: 0.0,
                common_mode_sigma_nm: 0.0,
                seed: derive_stream_seed(99, trial),
            };
            let frame = simulate_frame(&spec, &field, &noise).unwrap();
            let profile = profile_from_sequence(
                std::slice::from_ref(&frame),
                &reference,
                &spec,
                &subset,
                &settings,
            )
            .unwrap();
            kappas.push(profile.samples[0].kappa_per_mm);
        }
        let mean = kappas.iter().sum::<f64>() / kappas.len() as f64;
        (kappas.iter().map(|k| (k - mean) * (k - mean)).sum::<f64>() / (kappas.len() - 1) as f64)
            .sqrt()
    };

    let s1 = spread(0.004);
    let s2 = spread(0.008);
    let ratio = s2 / s1;
    assert!(
        (ratio - 2.0).abs() < 0.2,
        "std ratio {ratio} should be ≈ 2 for a 2× sigma ratio"
    );
}

/// Forward determinism under several seeds: regenerating a sequence is
/// bit-identical, and distinct seeds differ.
#[test]
fn forward_determinism_across_seeds() {
    let spec = FiberSpec::default();
    let field = constant_field(&spec, 1.0 / 50.0, 0.0);
    for seed in [1u64, 2, 3] {
        let noise = NoiseModel {
            seed,
            ..NoiseModel::default()
        };
        let a = simulate_sequence(&spec, &field, &noise, 5, 100.0).unwrap();
        let b = simulate_sequence(&spec, &field, &noise, 5, 100.0).unwrap();
        for (fa, fb) in a.iter().zip(&b) {
            assert_eq!(fa.wavelengths, fb.wavelengths);
        }
    }
    let n1 = NoiseModel {
        seed: 1,
        ..NoiseModel::default()
    };
    let n2 = NoiseModel {
        seed: 2,
        ..NoiseModel::default()
    };
    let a = simulate_frame(&spec, &field, &n1).unwrap();
    let b = simulate_frame(&spec, &field, &n2).unwrap();
    assert_ne!(a.wavelengths, b.wavelengths);
}
