//! Pilot observation and pre-whitening tests.

use nalgebra::DMatrix;
use num_complex::Complex64;

use polar_ce::array_channel::{synthesize_channel, ArrayGeometry, FrequencyGrid, PathParam};
use polar_ce::observation::{build_whitener, generate_combiner, observe};
use polar_ce::rng::derive_rng;

#[test]
fn combiner_entries_are_scaled_signs() {
    let mut rng = derive_rng(1, 0, 0, 2);
    let c = generate_combiner(&mut rng, 4, 3, 16);
    assert_eq!(c.pilot_len(), 4);
    assert_eq!(c.num_rf(), 3);
    assert_eq!(c.stacked().nrows(), 12);
    let scale = 1.0 / 4.0;
    for v in c.stacked().iter() {
        assert!(v.im == 0.0 && (v.re.abs() - scale).abs() < 1e-15);
    }
    // Slots and the stacked matrix agree.
    for p in 0..4 {
        assert_eq!(c.stacked().rows(p * 3, 3), c.slot(p).rows(0, 3));
    }
}

#[test]
fn noiseless_observation_is_exact() {
    let geom = ArrayGeometry::half_wavelength(32, 100e9).unwrap();
    let grid = FrequencyGrid::new(4, 100e6, 100e9).unwrap();
    let paths = vec![PathParam::new(Complex64::new(0.9, 0.1), 0.3, 6.0).unwrap()];
    let ch = synthesize_channel(&geom, &grid, &paths).unwrap();
    let mut rng = derive_rng(2, 0, 0, 2);
    let comb = generate_combiner(&mut rng, 4, 4, 32);
    let obs = observe(&ch.matrix, &comb, 0.0, &mut rng).unwrap();
    let expected = comb.stacked() * &ch.matrix;
    assert_eq!(obs.y, expected);
}

#[test]
fn observation_rejects_negative_noise_power() {
    let geom = ArrayGeometry::half_wavelength(8, 100e9).unwrap();
    let grid = FrequencyGrid::single(100e9).unwrap();
    let paths = vec![PathParam::new(Complex64::new(1.0, 0.0), 0.0, 5.0).unwrap()];
    let ch = synthesize_channel(&geom, &grid, &paths).unwrap();
    let mut rng = derive_rng(3, 0, 0, 2);
    let comb = generate_combiner(&mut rng, 2, 2, 8);
    assert!(observe(&ch.matrix, &comb, -1.0, &mut rng).is_err());
}

#[test]
fn whitener_factors_the_block_covariance() {
    // D D^H must equal blkdiag(A_p A_p^H) exactly.
    let mut rng = derive_rng(4, 0, 0, 2);
    let comb = generate_combiner(&mut rng, 3, 4, 24);
    let w = build_whitener(&comb);
    let d = w.d_matrix();
    let rows = comb.pilot_len() * comb.num_rf();
    let mut cov = DMatrix::<Complex64>::zeros(rows, rows);
    for p in 0..comb.pilot_len() {
        let block = comb.slot(p) * comb.slot(p).adjoint();
        cov.view_mut((p * 4, p * 4), (4, 4)).copy_from(&block);
    }
    assert!((&d * d.adjoint() - cov).norm() < 1e-12);
}

#[test]
fn whitener_solve_matches_dense_inverse() {
    let mut rng = derive_rng(5, 0, 0, 2);
    let comb = generate_combiner(&mut rng, 4, 4, 32);
    let w = build_whitener(&comb);
    let rhs = DMatrix::<Complex64>::from_fn(16, 3, |i, j| {
        Complex64::new((i + j) as f64 * 0.1 - 0.7, (i * j) as f64 * 0.05)
    });
    let solved = w.solve(&rhs);
    let dense = w
        .d_matrix()
        .lu()
        .solve(&rhs)
        .expect("D is invertible");
    assert!((solved - dense).norm() < 1e-9);
}

#[test]
fn whitened_noise_is_white() {
    // Monte-Carlo covariance of D^{-1} (noise part of y) over many draws
    // approaches sigma^2 I.
    let n = 64;
    let (pilot_len, num_rf) = (8, 4);
    let rows = pilot_len * num_rf;
    let sigma2 = 0.5;
    let mut rng = derive_rng(6, 0, 0, 2);
    let comb = generate_combiner(&mut rng, pilot_len, num_rf, n);
    let w = build_whitener(&comb);
    let channel = DMatrix::<Complex64>::zeros(n, 1);
    let draws = 10_000;
    let mut cov = DMatrix::<Complex64>::zeros(rows, rows);
    for _ in 0..draws {
        let obs = observe(&channel, &comb, sigma2, &mut rng).unwrap();
        let z = w.solve(&obs.y);
        cov += &z * z.adjoint();
    }
    cov /= Complex64::new(draws as f64, 0.0);
    let mut max_err = 0.0f64;
    for i in 0..rows {
        for j in 0..rows {
            let expect = if i == j { sigma2 } else { 0.0 };
            max_err = max_err.max((cov[(i, j)] - Complex64::new(expect, 0.0)).norm());
        }
    }
    assert!(
        max_err < 0.05 * sigma2,
        "whitened covariance max deviation {max_err}"
    );
}
