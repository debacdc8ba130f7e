//! Small complex linear-algebra helpers shared by the estimators.

use nalgebra::{DMatrix, SVD};
use num_complex::Complex64;

/// Relative singular-value cutoff used by every pseudo-inverse solve.
pub const SV_CUTOFF: f64 = 1e-10;

/// Minimum-norm least-squares solution of `a x = b` via SVD with a relative
/// rank cutoff. Rank-deficient systems resolve to the minimum-norm solution.
pub fn lstsq(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let svd = SVD::new(a.clone(), true, true);
    let max_sv = svd.singular_values.max();
    let eps = if max_sv > 0.0 { SV_CUTOFF * max_sv } else { SV_CUTOFF };
    svd.solve(b, eps).expect("SVD computed with u and v_t")
}

/// Moore-Penrose pseudo-inverse with the shared relative cutoff.
pub fn pinv(a: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let svd = SVD::new(a.clone(), true, true);
    let max_sv = svd.singular_values.max();
    let eps = if max_sv > 0.0 { SV_CUTOFF * max_sv } else { SV_CUTOFF };
    svd.pseudo_inverse(eps).expect("SVD computed with u and v_t")
}

/// Squared Frobenius norm.
pub fn fro_norm_sq(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|c| c.norm_sqr()).sum()
}
