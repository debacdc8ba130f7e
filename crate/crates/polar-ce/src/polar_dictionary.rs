//! Polar-domain transform matrix construction and coherence analysis.
//!
//! The dictionary stacks distance rings: ring 0 holds the far-field Fourier
//! columns, ring `s >= 1` samples distances `r_{s,n} = Z_delta (1 - theta_n^2) / s`
//! along the uniform angular grid `theta_n = (2n - N + 1) / N`. Sampling
//! inverse distances at multiples of `1 / Z_delta` makes the coherence of
//! adjacent rings at the same angle equal `|G(beta_delta)|`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::array_channel::{far_steering, near_steering, ArrayGeometry};
use crate::error::{Error, Result};
use crate::fresnel::g_magnitude;

/// Design parameters of the polar dictionary.
#[derive(Debug, Clone)]
pub struct DictionaryConfig {
    pub geometry: ArrayGeometry,
    /// Coherence design parameter `beta_delta`; adjacent rings on the same
    /// angle have approximate coherence `|G(beta_delta)|`.
    pub beta_delta: f64,
    /// Minimum allowable distance ring in meters.
    pub rho_min: f64,
}

impl DictionaryConfig {
    pub fn new(geometry: ArrayGeometry, beta_delta: f64, rho_min: f64) -> Result<Self> {
        if !(beta_delta > 0.0) || !(rho_min > 0.0) {
            return Err(Error::InvalidArgument(
                "beta_delta and rho_min must be positive".into(),
            ));
        }
        Ok(Self {
            geometry,
            beta_delta,
            rho_min,
        })
    }

    /// Threshold distance `Z_delta = N^2 d^2 / (2 lambda_c beta_delta^2)`.
    pub fn z_delta(&self) -> f64 {
        let nd = self.geometry.num_antennas() as f64 * self.geometry.spacing();
        nd * nd / (2.0 * self.geometry.wavelength() * self.beta_delta * self.beta_delta)
    }

    /// The coherence threshold `Delta = |G(beta_delta)|` the sampling targets.
    pub fn coherence_threshold(&self) -> f64 {
        g_magnitude(self.beta_delta)
    }
}

/// Per-column metadata: distance-ring index, angle, and sampled distance
/// (`+inf` on the far-field ring 0).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ColumnMeta {
    pub ring: usize,
    pub angle: f64,
    pub distance: f64,
}

/// The `N x Q` polar-domain transform matrix with per-column metadata.
#[derive(Debug, Clone)]
pub struct PolarDictionary {
    pub matrix: DMatrix<Complex64>,
    pub columns: Vec<ColumnMeta>,
    pub geometry: ArrayGeometry,
    pub num_rings: usize,
    pub beta_delta: f64,
    pub rho_min: f64,
    pub z_delta: f64,
}

impl PolarDictionary {
    pub fn num_columns(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn column(&self, q: usize) -> DVector<Complex64> {
        self.matrix.column(q).into_owned()
    }
}

/// Uniform angular grid `theta_n = (2n - N + 1) / N`.
pub fn grid_angle(n: usize, num_antennas: usize) -> f64 {
    (2.0 * n as f64 - num_antennas as f64 + 1.0) / num_antennas as f64
}

/// Generate the polar-domain transform matrix.
///
/// Rings are generated for `s = 0, 1, 2, ...` while `s == 0` or
/// `Z_delta / s >= rho_min`; ring 0 is the far-field ring (`r = +inf`).
/// A `rho_min` above `Z_delta` degenerates to the pure angular dictionary
/// (one ring), which is returned, not an error.
pub fn build_polar_dictionary(config: &DictionaryConfig) -> Result<PolarDictionary> {
    let geom = &config.geometry;
    let n = geom.num_antennas();
    let z_delta = config.z_delta();

    let mut num_rings = 1;
    while z_delta / num_rings as f64 >= config.rho_min {
        num_rings += 1;
    }

    let mut matrix = DMatrix::<Complex64>::zeros(n, n * num_rings);
    let mut columns = Vec::with_capacity(n * num_rings);
    for s in 0..num_rings {
        for col in 0..n {
            let theta = grid_angle(col, n);
            let (distance, steering) = if s == 0 {
                (f64::INFINITY, far_steering(geom, theta)?)
            } else {
                let r = z_delta * (1.0 - theta * theta) / s as f64;
                (r, near_steering(geom, theta, r)?)
            };
            matrix.set_column(s * n + col, &steering);
            columns.push(ColumnMeta {
                ring: s,
                angle: theta,
                distance,
            });
        }
    }
    Ok(PolarDictionary {
        matrix,
        columns,
        geometry: geom.clone(),
        num_rings,
        beta_delta: config.beta_delta,
        rho_min: config.rho_min,
        z_delta,
    })
}

/// The classical `N x N` angular (Fourier) dictionary `F`.
pub fn build_angular_dictionary(geom: &ArrayGeometry) -> Result<DMatrix<Complex64>> {
    let n = geom.num_antennas();
    let mut f = DMatrix::<Complex64>::zeros(n, n);
    for col in 0..n {
        f.set_column(col, &far_steering(geom, grid_angle(col, n))?);
    }
    Ok(f)
}

/// The angular dictionary packaged as a single-ring [`PolarDictionary`], so
/// the far-field baselines share the polar-domain code paths exactly.
pub fn angular_as_polar(geom: &ArrayGeometry) -> Result<PolarDictionary> {
    let n = geom.num_antennas();
    Ok(PolarDictionary {
        matrix: build_angular_dictionary(geom)?,
        columns: (0..n)
            .map(|col| ColumnMeta {
                ring: 0,
                angle: grid_angle(col, n),
                distance: f64::INFINITY,
            })
            .collect(),
        geometry: geom.clone(),
        num_rings: 1,
        beta_delta: f64::NAN,
        rho_min: f64::INFINITY,
        z_delta: f64::NAN,
    })
}

/// Ablation dictionary: same angular grid, `num_rings` distances uniformly
/// spaced over `[rho_min, rho_max]` with no `1 - theta^2` factor.
pub fn uniform_dictionary(
    geom: &ArrayGeometry,
    num_rings: usize,
    rho_min: f64,
    rho_max: f64,
) -> Result<PolarDictionary> {
    if num_rings == 0 {
        return Err(Error::InvalidArgument("need at least one ring".into()));
    }
    if !(rho_max > rho_min) || !(rho_min > 0.0) {
        return Err(Error::InvalidArgument("need 0 < rho_min < rho_max".into()));
    }
    let n = geom.num_antennas();
    let mut matrix = DMatrix::<Complex64>::zeros(n, n * num_rings);
    let mut columns = Vec::with_capacity(n * num_rings);
    for s in 0..num_rings {
        let r = rho_min + s as f64 / num_rings as f64 * (rho_max - rho_min);
        for col in 0..n {
            let theta = grid_angle(col, n);
            matrix.set_column(s * n + col, &near_steering(geom, theta, r)?);
            columns.push(ColumnMeta {
                ring: s,
                angle: theta,
                distance: r,
            });
        }
    }
    Ok(PolarDictionary {
        matrix,
        columns,
        geometry: geom.clone(),
        num_rings,
        beta_delta: f64::NAN,
        rho_min,
        z_delta: f64::NAN,
    })
}

/// Exact column coherence `|<b1, b2>|` of two unit-norm vectors.
pub fn coherence_exact(b1: &DVector<Complex64>, b2: &DVector<Complex64>) -> Result<f64> {
    if b1.len() != b2.len() {
        return Err(Error::InvalidArgument("length mismatch".into()));
    }
    Ok(b1.dotc(b2).norm())
}

/// Dirichlet-kernel coherence of two same-ring columns:
/// `|sin(N pi dtheta / 2) / (N sin(pi dtheta / 2))|`, 1 at `dtheta = 0`.
pub fn coherence_approx_same_ring(theta_p: f64, theta_q: f64, num_antennas: usize) -> f64 {
    let n = num_antennas as f64;
    let half = std::f64::consts::PI * (theta_q - theta_p) / 2.0;
    let denom = n * half.sin();
    if denom.abs() < 1e-14 {
        // Removable singularity whenever dtheta is a multiple of 2.
        return 1.0;
    }
    ((n * half).sin() / denom).abs()
}

/// Fresnel-approximated coherence of two same-angle columns,
/// `|G(beta)|` with `beta = sqrt(N^2 d^2 (1 - theta^2) / (2 lambda) |1/r_p - 1/r_q|)`.
pub fn coherence_approx_same_angle(geom: &ArrayGeometry, theta: f64, r_p: f64, r_q: f64) -> f64 {
    let nd = geom.num_antennas() as f64 * geom.spacing();
    let du = (1.0 / r_p - 1.0 / r_q).abs();
    let beta = (nd * nd * (1.0 - theta * theta) / (2.0 * geom.wavelength()) * du).sqrt();
    g_magnitude(beta)
}

/// One audited column pair: exact inner-product coherence vs. its closed-form
/// approximation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoherencePair {
    /// The lower ring / angle index of the pair.
    pub ring: usize,
    pub angle_index: usize,
    pub exact: f64,
    pub approx: f64,
    pub abs_error: f64,
    /// Whether both columns sit above the Fresnel validity bound, where the
    /// approximation is meaningful.
    pub within_fresnel_regime: bool,
}

/// Coherence audit of a dictionary against the design approximations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct CoherenceReport {
    /// Maximum off-diagonal coherence over all column pairs.
    pub max_coherence: f64,
    /// Adjacent rings, same angle (rings s and s+1).
    pub adjacent_ring: Vec<CoherencePair>,
    /// Adjacent angles, same ring (angle indices n and n+1).
    pub adjacent_angle: Vec<CoherencePair>,
}

/// Compute the full coherence audit: global max off-diagonal coherence plus
/// adjacent-ring and adjacent-angle exact/approximate comparisons.
pub fn audit_coherence(dict: &PolarDictionary) -> CoherenceReport {
    let n = dict.geometry.num_antennas();
    let q = dict.num_columns();
    let gram = dict.matrix.ad_mul(&dict.matrix);
    let mut max_coherence: f64 = 0.0;
    for i in 0..q {
        for j in (i + 1)..q {
            max_coherence = max_coherence.max(gram[(i, j)].norm());
        }
    }

    let fresnel_bound = dict.geometry.fresnel_validity_bound();
    let mut adjacent_ring = Vec::new();
    for s in 0..dict.num_rings.saturating_sub(1) {
        for col in 0..n {
            let p = s * n + col;
            let q_idx = (s + 1) * n + col;
            let exact = gram[(p, q_idx)].norm();
            let meta_p = dict.columns[p];
            let meta_q = dict.columns[q_idx];
            let approx =
                coherence_approx_same_angle(&dict.geometry, meta_p.angle, meta_p.distance, meta_q.distance);
            adjacent_ring.push(CoherencePair {
                ring: s,
                angle_index: col,
                exact,
                approx,
                abs_error: (exact - approx).abs(),
                within_fresnel_regime: meta_p.distance.min(meta_q.distance) >= fresnel_bound,
            });
        }
    }

    let mut adjacent_angle = Vec::new();
    for s in 0..dict.num_rings {
        for col in 0..n - 1 {
            let p = s * n + col;
            let q_idx = s * n + col + 1;
            let exact = gram[(p, q_idx)].norm();
            let meta_p = dict.columns[p];
            let meta_q = dict.columns[q_idx];
            let approx = coherence_approx_same_ring(meta_p.angle, meta_q.angle, n);
            adjacent_angle.push(CoherencePair {
                ring: s,
                angle_index: col,
                exact,
                approx,
                abs_error: (exact - approx).abs(),
                within_fresnel_regime: meta_p.distance.min(meta_q.distance) >= fresnel_bound,
            });
        }
    }

    CoherenceReport {
        max_coherence,
        adjacent_ring,
        adjacent_angle,
    }
}
