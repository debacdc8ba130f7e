//! Geometry and channel-model invariants: exact element distances, steering
//! vector structure, and reproducible synthesis.

use approx::{assert_abs_diff_eq, assert_relative_eq};
use nalgebra::DVector;
use num_complex::Complex64;
use proptest::prelude::*;

use polar_ce::array_channel::{
    element_distance, far_steering, near_steering, near_steering_inv, sample_random_paths,
    synthesize_channel, ArrayGeometry, FrequencyGrid, PathParam, PathSpec,
};
use polar_ce::rng::derive_rng;

fn geom(n: usize) -> ArrayGeometry {
    ArrayGeometry::half_wavelength(n, 100e9).unwrap()
}

#[test]
fn element_distance_matches_law_of_cosines() {
    // Independent check: place the source in Cartesian coordinates and
    // measure the Euclidean distance to each element.
    let g = geom(64);
    let (theta, r): (f64, f64) = (0.37, 5.2);
    // theta is the sine of the physical angle; the array lies on the axis
    // with element n at coordinate delta_n * d.
    let source_axis = r * theta;
    let source_perp = r * (1.0 - theta * theta).sqrt();
    for n in 0..g.num_antennas() {
        let elem = g.element_offset(n) * g.spacing();
        let euclid = ((source_axis - elem).powi(2) + source_perp.powi(2)).sqrt();
        let d = element_distance(&g, n, theta, r).unwrap();
        assert_relative_eq!(d, euclid, max_relative = 1e-12);
    }
}

#[test]
fn element_distance_rejects_bad_inputs() {
    let g = geom(8);
    assert!(element_distance(&g, 8, 0.0, 1.0).is_err());
    assert!(element_distance(&g, 0, 0.0, 0.0).is_err());
    assert!(element_distance(&g, 0, 0.0, -1.0).is_err());
    assert!(element_distance(&g, 0, f64::NAN, 1.0).is_err());
}

#[test]
fn steering_vectors_have_unit_norm() {
    let g = geom(128);
    for &(theta, r) in &[(0.0, 10.0), (0.7, 3.0), (-0.99, 100.0)] {
        assert_relative_eq!(near_steering(&g, theta, r).unwrap().norm(), 1.0, epsilon = 1e-12);
        assert_relative_eq!(far_steering(&g, theta).unwrap().norm(), 1.0, epsilon = 1e-12);
    }
}

#[test]
fn near_steering_at_infinite_distance_is_far_steering() {
    let g = geom(64);
    let theta = 0.42;
    let a = far_steering(&g, theta).unwrap();
    let b = near_steering(&g, theta, f64::INFINITY).unwrap();
    assert_eq!(a, b);
}

#[test]
fn near_steering_converges_to_far_steering_up_to_global_phase() {
    // The spherical-wave vector approaches the planar one as r grows, but
    // carries a residual global phase from the reference-point convention;
    // compare after removing it.
    let g = geom(64);
    let theta = 0.42;
    let a = far_steering(&g, theta).unwrap();
    let mut last_err = f64::INFINITY;
    for &r in &[1e3, 1e5, 1e7] {
        let b = near_steering(&g, theta, r).unwrap();
        let inner = a.dotc(&b);
        let aligned: DVector<Complex64> = &b * (inner.conj() / inner.norm());
        let err = (&a - &aligned).norm();
        assert!(err < last_err, "alignment error must shrink with distance");
        last_err = err;
    }
    // The residual decays like 1/r (the leading Fresnel term).
    assert!(last_err < 1e-5, "residual {last_err} too large at r = 1e7");
}

#[test]
fn near_steering_mirror_symmetry() {
    // delta_{N-1-n} = -delta_n, so negating the angle reverses the element
    // order: b(-theta, r)_n = b(theta, r)_{N-1-n}.
    let g = geom(32);
    let (theta, r) = (0.63, 7.0);
    let b_pos = near_steering(&g, theta, r).unwrap();
    let b_neg = near_steering(&g, -theta, r).unwrap();
    for n in 0..32 {
        let d = (b_neg[n] - b_pos[31 - n]).norm();
        assert!(d < 1e-12, "mirror mismatch at element {n}: {d}");
    }
}

#[test]
fn inverse_distance_form_matches_direct_form() {
    let g = geom(96);
    for &(theta, r) in &[(0.0, 4.0), (0.5, 12.0), (-0.8, 3.0)] {
        let direct = near_steering(&g, theta, r).unwrap();
        let inv = near_steering_inv(&g, theta, 1.0 / r);
        assert!((direct - inv).norm() < 1e-9);
    }
}

#[test]
fn inverse_distance_form_at_zero_matches_far_field_up_to_global_phase() {
    let g = geom(64);
    let theta = -0.31;
    let b = near_steering_inv(&g, theta, 0.0);
    let a = far_steering(&g, theta).unwrap();
    let inner = a.dotc(&b);
    // Perfectly coherent: |<a, b>| = 1.
    assert_abs_diff_eq!(inner.norm(), 1.0, epsilon = 1e-12);
}

#[test]
fn subcarrier_grid_is_symmetric_inside_band() {
    let grid = FrequencyGrid::new(8, 100e6, 100e9).unwrap();
    let freqs: Vec<f64> = (0..8).map(|m| grid.frequency(m)).collect();
    // Symmetric around the carrier...
    for m in 0..4 {
        assert_relative_eq!(
            freqs[m] + freqs[7 - m],
            2.0 * 100e9,
            max_relative = 1e-12
        );
    }
    // ...and strictly inside the bandwidth.
    assert!(freqs[0] > 100e9 - 50e6 && freqs[7] < 100e9 + 50e6);
    assert!(freqs.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn synthesis_is_deterministic_and_scales_with_path_count() {
    let g = geom(32);
    let grid = FrequencyGrid::new(4, 100e6, 100e9).unwrap();
    let paths = vec![
        PathParam::new(Complex64::new(1.0, -0.5), 0.2, 6.0).unwrap(),
        PathParam::new(Complex64::new(-0.3, 0.8), -0.6, f64::INFINITY).unwrap(),
    ];
    let h1 = synthesize_channel(&g, &grid, &paths).unwrap();
    let h2 = synthesize_channel(&g, &grid, &paths).unwrap();
    assert_eq!(h1.matrix, h2.matrix);

    // A single unit-gain path gives ||h_m||^2 = N for every subcarrier.
    let single = vec![PathParam::new(Complex64::new(1.0, 0.0), 0.1, 5.0).unwrap()];
    let h = synthesize_channel(&g, &grid, &single).unwrap();
    for m in 0..4 {
        assert_relative_eq!(h.matrix.column(m).norm().powi(2), 32.0, max_relative = 1e-10);
    }
}

#[test]
fn synthesis_rejects_empty_path_list() {
    let g = geom(8);
    let grid = FrequencyGrid::single(100e9).unwrap();
    assert!(synthesize_channel(&g, &grid, &[]).is_err());
}

#[test]
fn random_paths_respect_ranges_and_are_reproducible() {
    let spec = PathSpec {
        num_paths: 500,
        angle_range: (-0.8, 0.8),
        distance_range: (3.0, 10.0),
    };
    let mut rng = derive_rng(7, 0, 0, 1);
    let paths = sample_random_paths(&mut rng, &spec).unwrap();
    assert_eq!(paths.len(), 500);
    for p in &paths {
        assert!(p.angle >= -0.8 && p.angle < 0.8);
        assert!(p.distance >= 3.0 && p.distance < 10.0);
    }
    // CN(0,1) gains: mean near zero, mean power near one.
    let mean_power: f64 = paths.iter().map(|p| p.gain.norm_sqr()).sum::<f64>() / 500.0;
    assert!((mean_power - 1.0).abs() < 0.15, "mean power {mean_power}");

    let mut rng2 = derive_rng(7, 0, 0, 1);
    assert_eq!(paths, sample_random_paths(&mut rng2, &spec).unwrap());
}

proptest! {
    #[test]
    fn steering_norm_is_one_everywhere(theta in -1.0..1.0f64, r in 0.5..500.0f64) {
        let g = geom(16);
        let b = near_steering(&g, theta, r).unwrap();
        prop_assert!((b.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn delay_form_consistency(theta in -1.0..1.0f64, r in 0.5..500.0f64) {
        let g = geom(16);
        let direct = near_steering(&g, theta, r).unwrap();
        let inv = near_steering_inv(&g, theta, 1.0 / r);
        prop_assert!((direct - inv).norm() < 1e-8);
    }
}
