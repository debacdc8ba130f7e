//! Uniform linear array geometry, far-/near-field steering vectors, and
//! multicarrier channel synthesis.
//!
//! The array is a ULA on the y-axis with antenna `n` at coordinate
//! `delta_n * d`, `delta_n = (2n - N + 1) / 2`, so the offsets are symmetric
//! around the array center. Angles are spatial angles (sine of the physical
//! angle), ranging over [-1, 1]. A path distance of `+inf` encodes a
//! far-field ray.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::sample_cn01;

/// Speed of light in m/s.
pub const SPEED_OF_LIGHT: f64 = 2.998e8;

/// Uniform linear array: antenna count, element spacing, carrier wavelength.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrayGeometry {
    num_antennas: usize,
    spacing: f64,
    wavelength: f64,
}

impl ArrayGeometry {
    pub fn new(num_antennas: usize, spacing: f64, wavelength: f64) -> Result<Self> {
        if num_antennas < 2 {
            return Err(Error::InvalidArgument("need at least 2 antennas".into()));
        }
        if !(spacing > 0.0) || !(wavelength > 0.0) {
            return Err(Error::InvalidArgument(
                "spacing and wavelength must be positive".into(),
            ));
        }
        Ok(Self {
            num_antennas,
            spacing,
            wavelength,
        })
    }

    /// Half-wavelength spaced array at carrier frequency `f_c` (Hz).
    pub fn half_wavelength(num_antennas: usize, carrier_frequency: f64) -> Result<Self> {
        if !(carrier_frequency > 0.0) {
            return Err(Error::InvalidArgument("carrier must be positive".into()));
        }
        let lambda = SPEED_OF_LIGHT / carrier_frequency;
        Self::new(num_antennas, lambda / 2.0, lambda)
    }

    pub fn num_antennas(&self) -> usize {
        self.num_antennas
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    pub fn carrier_frequency(&self) -> f64 {
        SPEED_OF_LIGHT / self.wavelength
    }

    /// Carrier wavenumber `k_c = 2 pi / lambda_c`.
    pub fn wavenumber(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.wavelength
    }

    /// Element offset `delta_n = (2n - N + 1) / 2` in units of the spacing.
    pub fn element_offset(&self, n: usize) -> f64 {
        (2.0 * n as f64 - self.num_antennas as f64 + 1.0) / 2.0
    }

    /// Array aperture `D = N d`.
    pub fn aperture(&self) -> f64 {
        self.num_antennas as f64 * self.spacing
    }

    /// Rayleigh distance `2 D^2 / lambda_c`, the near/far-field boundary.
    pub fn rayleigh_distance(&self) -> f64 {
        let d = self.aperture();
        2.0 * d * d / self.wavelength
    }

    /// Distance above which the Fresnel (second-order) expansion of the
    /// element distance is accurate: `0.5 sqrt(D^3 / lambda_c)`.
    pub fn fresnel_validity_bound(&self) -> f64 {
        0.5 * (self.aperture().powi(3) / self.wavelength).sqrt()
    }
}

/// One propagation path: complex gain, spatial angle, distance in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathParam {
    pub gain: Complex64,
    pub angle: f64,
    pub distance: f64,
}

impl PathParam {
    pub fn new(gain: Complex64, angle: f64, distance: f64) -> Result<Self> {
        if !(angle.abs() <= 1.0) {
            return Err(Error::Domain(format!("spatial angle {angle} not in [-1, 1]")));
        }
        if !(distance > 0.0) {
            return Err(Error::Domain(format!("path distance {distance} must be > 0")));
        }
        Ok(Self {
            gain,
            angle,
            distance,
        })
    }

    pub fn is_far_field(&self) -> bool {
        self.distance.is_infinite()
    }
}

/// OFDM subcarrier grid around a carrier frequency.
///
/// Subcarrier `m` (1-based) sits at `f_m = f_c + B (2m - M - 1) / (2M)`,
/// symmetric around `f_c` with span strictly inside the bandwidth.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyGrid {
    num_subcarriers: usize,
    bandwidth: f64,
    carrier: f64,
}

impl FrequencyGrid {
    pub fn new(num_subcarriers: usize, bandwidth: f64, carrier: f64) -> Result<Self> {
        if num_subcarriers == 0 {
            return Err(Error::InvalidArgument("need at least one subcarrier".into()));
        }
        if !(bandwidth >= 0.0) || !(carrier > 0.0) {
            return Err(Error::InvalidArgument(
                "bandwidth must be >= 0 and carrier > 0".into(),
            ));
        }
        if bandwidth / 2.0 >= carrier {
            return Err(Error::InvalidArgument(
                "bandwidth may not reach down to DC".into(),
            ));
        }
        Ok(Self {
            num_subcarriers,
            bandwidth,
            carrier,
        })
    }

    /// A single subcarrier pinned at the carrier frequency.
    pub fn single(carrier: f64) -> Result<Self> {
        Self::new(1, 0.0, carrier)
    }

    pub fn num_subcarriers(&self) -> usize {
        self.num_subcarriers
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn carrier(&self) -> f64 {
        self.carrier
    }

    /// Frequency of subcarrier `m` (0-based index).
    pub fn frequency(&self, m: usize) -> f64 {
        let mm = self.num_subcarriers as f64;
        let m1 = (m + 1) as f64;
        self.carrier + self.bandwidth * (2.0 * m1 - mm - 1.0) / (2.0 * mm)
    }

    /// Wavenumber `k_m = 2 pi f_m / c` of subcarrier `m` (0-based).
    pub fn wavenumber(&self, m: usize) -> f64 {
        2.0 * std::f64::consts::PI * self.frequency(m) / SPEED_OF_LIGHT
    }
}

/// A synthesized multicarrier channel together with the parameters that
/// produced it. Column `m` of `matrix` is the channel at subcarrier `m`.
#[derive(Debug, Clone)]
pub struct ChannelRealization {
    pub geometry: ArrayGeometry,
    pub grid: FrequencyGrid,
    pub paths: Vec<PathParam>,
    pub matrix: DMatrix<Complex64>,
}

/// Exact distance between antenna `n` and a source at `(theta, r)`:
/// `r^(n) = sqrt(r^2 + delta_n^2 d^2 - 2 r theta delta_n d)`.
pub fn element_distance(geom: &ArrayGeometry, n: usize, theta: f64, r: f64) -> Result<f64> {
    if n >= geom.num_antennas() {
        return Err(Error::InvalidArgument(format!("antenna index {n} out of range")));
    }
    if !theta.is_finite() || !r.is_finite() || !(r > 0.0) {
        return Err(Error::InvalidArgument(
            "theta and r must be finite, r > 0".into(),
        ));
    }
    let dd = geom.element_offset(n) * geom.spacing();
    Ok((r * r + dd * dd - 2.0 * r * theta * dd).sqrt())
}

/// Far-field steering vector `a(theta)`, element `n = exp(j pi n theta) / sqrt(N)`.
pub fn far_steering(geom: &ArrayGeometry, theta: f64) -> Result<DVector<Complex64>> {
    if !(theta.abs() <= 1.0) {
        return Err(Error::Domain(format!("spatial angle {theta} not in [-1, 1]")));
    }
    let n = geom.num_antennas();
    let scale = 1.0 / (n as f64).sqrt();
    Ok(DVector::from_fn(n, |i, _| {
        Complex64::from_polar(scale, std::f64::consts::PI * i as f64 * theta)
    }))
}

/// Near-field steering vector `b(theta, r)` from the spherical wavefront:
/// element `n = exp(-j k_c (r^(n) - r)) / sqrt(N)`.
///
/// `r = +inf` returns the far-field vector `a(theta)`.
pub fn near_steering(geom: &ArrayGeometry, theta: f64, r: f64) -> Result<DVector<Complex64>> {
    if !(theta.abs() <= 1.0) {
        return Err(Error::Domain(format!("spatial angle {theta} not in [-1, 1]")));
    }
    if r.is_infinite() && r > 0.0 {
        return far_steering(geom, theta);
    }
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::Domain(format!("distance {r} must be > 0 or +inf")));
    }
    let n = geom.num_antennas();
    let kc = geom.wavenumber();
    let scale = 1.0 / (n as f64).sqrt();
    let mut v = DVector::zeros(n);
    for i in 0..n {
        let rn = element_distance(geom, i, theta, r)?;
        v[i] = Complex64::from_polar(scale, -kc * (rn - r));
    }
    Ok(v)
}

/// Path delay of antenna `n` relative to the array center, written in the
/// inverse distance `u = 1/r`:
///
/// `r^(n) - r = (a^2 u - 2 b) / (sqrt(1 + a^2 u^2 - 2 b u) + 1)`,
///
/// with `a = delta_n d`, `b = theta delta_n d`. Continuous at `u = 0`,
/// where it reaches the planar-wavefront limit `-theta delta_n d`.
pub(crate) fn relative_delay_inv(geom: &ArrayGeometry, n: usize, theta: f64, u: f64) -> f64 {
    let a = geom.element_offset(n) * geom.spacing();
    let b = theta * a;
    let s = (1.0 + a * a * u * u - 2.0 * b * u).sqrt();
    (a * a * u - 2.0 * b) / (s + 1.0)
}

/// Near-field steering vector parameterized by the inverse distance
/// `u = 1/r`, smooth over `u >= 0` including the far-field limit `u = 0`.
///
/// For finite `r` this equals [`near_steering`]; at `u = 0` it equals the
/// analytic limit of the spherical-wave phase, which is `a(theta)` up to a
/// global phase. The maximum-likelihood refinement uses this form so the
/// objective is differentiable in `u` everywhere.
pub fn near_steering_inv(geom: &ArrayGeometry, theta: f64, u: f64) -> DVector<Complex64> {
    let n = geom.num_antennas();
    let kc = geom.wavenumber();
    let scale = 1.0 / (n as f64).sqrt();
    DVector::from_fn(n, |i, _| {
        Complex64::from_polar(scale, -kc * relative_delay_inv(geom, i, theta, u))
    })
}

/// Synthesize the `N x M` multicarrier channel
/// `h_m = sqrt(N/L) sum_l g_l exp(-j k_m r_l) b(theta_l, r_l)`.
///
/// Far-field paths (`r = +inf`) use `a(theta_l)` and drop the unobservable
/// bulk-delay phase.
pub fn synthesize_channel(
    geom: &ArrayGeometry,
    grid: &FrequencyGrid,
    paths: &[PathParam],
) -> Result<ChannelRealization> {
    if paths.is_empty() {
        return Err(Error::InvalidArgument("path list is empty".into()));
    }
    let n = geom.num_antennas();
    let m = grid.num_subcarriers();
    let prefactor = (n as f64 / paths.len() as f64).sqrt();
    let mut h = DMatrix::<Complex64>::zeros(n, m);
    for path in paths {
        let steering = near_steering(geom, path.angle, path.distance)?;
        for sc in 0..m {
            let phase = if path.is_far_field() {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::from_polar(1.0, -grid.wavenumber(sc) * path.distance)
            };
            let w = path.gain * phase * prefactor;
            h.column_mut(sc).axpy(w, &steering, Complex64::new(1.0, 0.0));
        }
    }
    if h.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err(Error::InvalidArgument("non-finite channel entries".into()));
    }
    Ok(ChannelRealization {
        geometry: geom.clone(),
        grid: grid.clone(),
        paths: paths.to_vec(),
        matrix: h,
    })
}

/// How random paths are drawn: count, spatial-angle range, distance range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathSpec {
    pub num_paths: usize,
    pub angle_range: (f64, f64),
    pub distance_range: (f64, f64),
}

impl PathSpec {
    pub fn validate(&self) -> Result<()> {
        if self.num_paths == 0 {
            return Err(Error::InvalidArgument("num_paths must be >= 1".into()));
        }
        let (a0, a1) = self.angle_range;
        let (r0, r1) = self.distance_range;
        if !(a0 < a1) || a0 < -1.0 || a1 > 1.0 {
            return Err(Error::InvalidArgument("bad angle range".into()));
        }
        if !(r0 < r1) || !(r0 > 0.0) {
            return Err(Error::InvalidArgument("bad distance range".into()));
        }
        Ok(())
    }
}

/// Draw i.i.d. paths: `theta ~ U(angle range)`, `r ~ U(distance range)`,
/// `g ~ CN(0, 1)`.
pub fn sample_random_paths<R: Rng>(rng: &mut R, spec: &PathSpec) -> Result<Vec<PathParam>> {
    spec.validate()?;
    (0..spec.num_paths)
        .map(|_| {
            let theta = rng.random_range(spec.angle_range.0..spec.angle_range.1);
            let r = rng.random_range(spec.distance_range.0..spec.distance_range.1);
            PathParam::new(sample_cn01(rng), theta, r)
        })
        .collect()
}
