//! Earth constants and the latitude-parametrized frame matrices.
//!
//! The `e'` frame is the earth-fixed frame turned about its z axis by the
//! local longitude, so the longitude never appears anywhere. The `i0` frame
//! is the inertial frame that coincides with `e'` at alignment start.

use crate::attmath::{rotation_from_vector, Mat3, Vec3};
use crate::error::AlignError;

/// WGS-84 earth rotation rate, rad/s.
pub const WGS84_OMEGA_E: f64 = 7.2921151467e-5;
/// Normal gravity at the equator, m/s^2.
pub const EQUATORIAL_GRAVITY: f64 = 9.7803267714;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EarthModel {
    /// Earth rotation rate, rad/s.
    pub omega_e: f64,
    /// Local gravity magnitude, m/s^2.
    pub g: f64,
}

impl Default for EarthModel {
    fn default() -> Self {
        Self { omega_e: WGS84_OMEGA_E, g: EQUATORIAL_GRAVITY }
    }
}

impl EarthModel {
    pub fn new(omega_e: f64, g: f64) -> Result<Self, AlignError> {
        if !(omega_e > 0.0 && omega_e.is_finite()) {
            return Err(AlignError::invalid("omega_e", format!("must be positive, got {omega_e}")));
        }
        if !(g > 0.0 && g.is_finite()) {
            return Err(AlignError::invalid("g", format!("must be positive, got {g}")));
        }
        Ok(Self { omega_e, g })
    }

    /// Earth rate in the ENU navigation frame at latitude `lat` (rad).
    pub fn omega_ie_n(&self, lat: f64) -> Vec3 {
        let (s, c) = lat.sin_cos();
        Vec3::new(0.0, self.omega_e * c, self.omega_e * s)
    }

    /// Gravity vector in the navigation frame, `[0, 0, -g]`.
    pub fn gravity_n(&self) -> Vec3 {
        Vec3::new(0.0, 0.0, -self.g)
    }

    /// `C_n^{n0}(t)`: the navigation frame after `t` seconds of earth
    /// rotation, expressed in the frame frozen at alignment start.
    pub fn nav_rotation(&self, lat: f64, t: f64) -> Mat3 {
        rotation_from_vector(&(self.omega_ie_n(lat) * t))
    }

    /// `C_{i0}^{e'}(t)`.
    pub fn c_i0_eprime(&self, t: f64) -> Mat3 {
        let (s, c) = (self.omega_e * t).sin_cos();
        Mat3::new(c, s, 0.0, -s, c, 0.0, 0.0, 0.0, 1.0)
    }

    /// Apparent gravity (the negated gravity) seen from `i0`, tracing the
    /// cone `g [cosL cos wt, cosL sin wt, sinL]`.
    pub fn reference_apparent_gravity_i0(&self, lat: f64, t: f64) -> Vec3 {
        let (sl, cl) = lat.sin_cos();
        let (sw, cw) = (self.omega_e * t).sin_cos();
        Vec3::new(cl * cw, cl * sw, sl) * self.g
    }

    /// Latitude-free part of the normalized apparent gravity,
    /// `[cos wt, sin wt, 1]`. The normalized cone vector is
    /// `diag(cosL, cosL, sinL)` times this.
    pub fn normalized_reference_i0(&self, t: f64) -> Vec3 {
        let (sw, cw) = (self.omega_e * t).sin_cos();
        Vec3::new(cw, sw, 1.0)
    }
}

/// `C_{e'}^n(L)`: rows are East, North and Up expressed in `e'`.
pub fn c_eprime_n(lat: f64) -> Mat3 {
    let (s, c) = lat.sin_cos();
    Mat3::new(0.0, 1.0, 0.0, -s, 0.0, c, c, 0.0, s)
}

/// `diag(cos L, cos L, sin L)`.
pub fn latitude_scaling(lat: f64) -> Mat3 {
    let (s, c) = lat.sin_cos();
    Mat3::from_diagonal(&Vec3::new(c, c, s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attmath::{orthonormality_residual, skew};
    use approx::assert_relative_eq;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    #[test]
    fn earth_rate_vector() {
        let e = EarthModel::default();
        assert_eq!(e.omega_ie_n(0.0), Vec3::new(0.0, e.omega_e, 0.0));
        assert_relative_eq!(e.omega_ie_n(FRAC_PI_2), Vec3::new(0.0, 0.0, e.omega_e), epsilon = 1e-20);
        // cos/sin of 30.266 deg, evaluated to 20 digits with mpmath.
        let w = e.omega_ie_n(30.266_f64.to_radians());
        assert_relative_eq!(w.y / e.omega_e, 0.86369479129102350681, epsilon = 1e-15);
        assert_relative_eq!(w.z / e.omega_e, 0.50401518577990816838, epsilon = 1e-15);
        for lat in [-1.2, -0.3, 0.0, 0.7, 1.5] {
            assert_relative_eq!(e.omega_ie_n(lat).norm(), e.omega_e, max_relative = 1e-15);
        }
    }

    #[test]
    fn gravity_points_down() {
        let e = EarthModel::default();
        assert_eq!(e.gravity_n(), Vec3::new(0.0, 0.0, -9.7803267714));
        assert_eq!((-e.gravity_n()).norm(), e.g);
        let e2 = EarthModel::new(7e-5, 3.0).unwrap();
        assert!(e2.gravity_n().z < 0.0);
        assert!(EarthModel::new(-1.0, 9.8).is_err());
        assert!(EarthModel::new(7e-5, 0.0).is_err());
    }

    #[test]
    fn eprime_to_nav_matrix() {
        assert_eq!(c_eprime_n(0.0), Mat3::new(0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0));
        for lat in [-1.4, -0.5, 0.0, 0.52, 1.3] {
            let c = c_eprime_n(lat);
            assert!((c.determinant() - 1.0).abs() < 1e-15);
            assert!(orthonormality_residual(&c) < 1e-15);
            // Local Up in e' is [cosL, 0, sinL]; at t = 0 the cone vector is
            // the same direction seen from i0.
            let e = EarthModel::default();
            let up_eprime = c.transpose() * (-e.gravity_n());
            assert_relative_eq!(up_eprime, e.reference_apparent_gravity_i0(lat, 0.0), epsilon = 1e-14);
        }
    }

    #[test]
    fn earth_turn_matrix() {
        let e = EarthModel::default();
        assert_eq!(e.c_i0_eprime(0.0), Mat3::identity());
        assert_relative_eq!(
            e.c_i0_eprime(PI / e.omega_e),
            Mat3::from_diagonal(&Vec3::new(-1.0, -1.0, 1.0)),
            epsilon = 1e-15
        );
        let mut t1 = 123.0;
        for k in 0..50 {
            let t2 = 37.0 * k as f64 + 0.25;
            assert_relative_eq!(
                e.c_i0_eprime(t1) * e.c_i0_eprime(t2),
                e.c_i0_eprime(t1 + t2),
                epsilon = 1e-14
            );
            t1 += 1000.0;
        }
    }

    #[test]
    fn apparent_gravity_cone() {
        let e = EarthModel::default();
        assert_relative_eq!(
            e.reference_apparent_gravity_i0(FRAC_PI_2, 5000.0),
            Vec3::new(0.0, 0.0, e.g),
            epsilon = 1e-14
        );
        assert_eq!(e.reference_apparent_gravity_i0(0.0, 0.0), Vec3::new(e.g, 0.0, 0.0));
        let v = e.reference_apparent_gravity_i0(FRAC_PI_4, FRAC_PI_2 / e.omega_e);
        let h = std::f64::consts::SQRT_2 / 2.0;
        assert_relative_eq!(v, Vec3::new(0.0, h, h) * e.g, epsilon = 1e-14);

        let lat = 0.6;
        for t in [0.0, 10.0, 3600.0, 40000.0] {
            let v = e.reference_apparent_gravity_i0(lat, t);
            assert_relative_eq!(v.norm(), e.g, max_relative = 1e-13);
            let half_angle = (v.z / v.norm()).acos();
            assert_relative_eq!(half_angle, FRAC_PI_2 - lat, epsilon = 1e-12);
            let split = latitude_scaling(lat) * e.normalized_reference_i0(t);
            assert_relative_eq!(split, v / e.g, epsilon = 1e-15);
        }
    }

    #[test]
    fn nav_rotation_solves_its_kinematics() {
        let e = EarthModel::default();
        let lat = 0.9;
        let h = 1e-3;
        let t = 500.0;
        let d = (e.nav_rotation(lat, t + h) - e.nav_rotation(lat, t - h)) / (2.0 * h);
        let rhs = e.nav_rotation(lat, t) * skew(&e.omega_ie_n(lat));
        assert_relative_eq!(d, rhs, epsilon = 1e-13);
    }
}
