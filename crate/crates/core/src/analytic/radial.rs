//! Motion in the plane z = 0: the effective radial potential
//! `V_r = c^2/(2 r^2) + r^2/2 + r/2` and its Ferrari turning points.

use std::f64::consts::PI;

use serde::Serialize;

use super::AnalyticError;

/// Closeness of `h_r` to the potential minimum treated as a circular orbit.
pub const CIRCULAR_TOL: f64 = 1e-10;

/// Rescaled radial energy and angular momentum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RadialProblem {
    pub h_r: f64,
    pub c_z: f64,
}

impl RadialProblem {
    /// From trap units: `c_z = eta^{3/2} p_phi / sqrt(sigma)`, `h_r = eta h / sigma`.
    pub fn from_trap(h: f64, p_phi: f64, sigma: f64, eta: f64) -> Self {
        Self {
            h_r: eta * h / sigma,
            c_z: eta.powf(1.5) * p_phi / sigma.sqrt(),
        }
    }
}

pub fn v_r(r: f64, c_z: f64) -> f64 {
    let cen = if c_z == 0.0 {
        0.0
    } else {
        0.5 * c_z * c_z / (r * r)
    };
    cen + 0.5 * r * r + 0.5 * r
}

pub fn v_r_prime(r: f64, c_z: f64) -> f64 {
    let cen = if c_z == 0.0 {
        0.0
    } else {
        -c_z * c_z / (r * r * r)
    };
    cen + r + 0.5
}

pub fn v_r_second(r: f64, c_z: f64) -> f64 {
    let cen = if c_z == 0.0 {
        0.0
    } else {
        3.0 * c_z * c_z / (r * r * r * r)
    };
    cen + 1.0
}

/// `r^4 + r^3 - 2 h r^2 + c^2`, whose positive roots are the turning points.
pub fn turning_quartic(r: f64, h_r: f64, c_z: f64) -> f64 {
    let r2 = r * r;
    r2 * r2 + r2 * r - 2.0 * h_r * r2 + c_z * c_z
}

/// Upper bound on `c_z^2` for which energy `h_r` admits a libration.
pub fn librating_bound(h_r: f64) -> f64 {
    27.0 / 512.0 + 9.0 * h_r / 16.0 + h_r * h_r - (9.0 / 64.0 + h_r).powf(1.5)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RadialMinimum {
    pub r_min: f64,
    /// Root of the resolvent cubic of `2 r^4 + r^3 - 2 c^2`.
    pub m00: f64,
    pub d1: f64,
    pub beta: f64,
}

/// Position of the minimum of `V_r`: the positive root of `2 r^4 + r^3 - 2 c^2`.
pub fn radial_minimum(c_z: f64) -> Result<RadialMinimum, AnalyticError> {
    if !c_z.is_finite() {
        return Err(AnalyticError::Domain(
            "angular momentum must be finite".into(),
        ));
    }
    let c2 = c_z * c_z;
    if c2 == 0.0 {
        // V_r = r/2 + r^2/2 is increasing on r >= 0
        return Ok(RadialMinimum {
            r_min: 0.0,
            m00: 1.0 / 32.0,
            d1: 0.0,
            beta: f64::NEG_INFINITY,
        });
    }
    let beta = (-(3.0 / 64.0) * (3.0 / c2).sqrt()).asinh() / 3.0;
    let m00 = 1.0 / 32.0 + 2.0 * (c2 / 3.0).sqrt() * beta.sinh();
    let s = (2.0 * m00).sqrt();
    let d1 = 3.0 / 16.0 - 2.0 * m00 + 1.0 / (32.0 * s);
    let r_min = -0.125 - 0.5 * s + 0.5 * d1.max(0.0).sqrt();
    Ok(RadialMinimum {
        r_min,
        m00,
        d1,
        beta,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TurningPoints {
    pub r1: f64,
    pub r2: f64,
    /// Real root of the resolvent cubic.
    pub m0: f64,
    pub d2: f64,
    pub alpha: f64,
    /// `h_r` sits on the potential minimum: `r1 = r2 = r_min`.
    pub degenerate: bool,
}

/// Inner and outer turning radius at energy `h_r`, by Ferrari's method.
pub fn radial_turning_points(h_r: f64, c_z: f64) -> Result<TurningPoints, AnalyticError> {
    if !(h_r.is_finite() && c_z.is_finite()) {
        return Err(AnalyticError::Domain(
            "energy and angular momentum must be finite".into(),
        ));
    }
    let c2 = c_z * c_z;
    let min = radial_minimum(c_z)?;
    let v_min = v_r(min.r_min, c_z);
    if (h_r - v_min).abs() <= CIRCULAR_TOL {
        return Ok(TurningPoints {
            r1: min.r_min,
            r2: min.r_min,
            m0: f64::NAN,
            d2: 0.0,
            alpha: f64::NAN,
            degenerate: true,
        });
    }
    if h_r < v_min {
        return Err(AnalyticError::BelowMinimum { h: h_r, v_min });
    }
    if c2 == 0.0 {
        let r2 = 0.5 * (-1.0 + (1.0 + 8.0 * h_r).sqrt());
        return Ok(TurningPoints {
            r1: 0.0,
            r2,
            m0: 0.125 + h_r,
            d2: f64::NAN,
            alpha: PI / 3.0,
            degenerate: false,
        });
    }
    let bound = librating_bound(h_r);
    if c2 >= bound {
        return Err(AnalyticError::NoLibration { c2, bound });
    }
    let q = 1.0 + 3.0 * c2 / (h_r * h_r);
    let arg =
        (-1.0 + (27.0 / 16.0) * c2 / (h_r * h_r * h_r) + 9.0 * c2 / (h_r * h_r)) / q.powf(1.5);
    let alpha = arg.clamp(-1.0, 1.0).acos() / 3.0;
    let m0 = 0.125 + (2.0 / 3.0) * h_r * (1.0 + q.sqrt() * alpha.cos());
    let d2 = 0.75 + 4.0 * h_r - 2.0 * m0 - (0.125 + h_r) * (2.0 / m0).sqrt();
    let sd = d2.max(0.0).sqrt();
    let s = (2.0 * m0).sqrt();
    Ok(TurningPoints {
        r1: -0.25 + 0.5 * (s - sd),
        r2: -0.25 + 0.5 * (s + sd),
        m0,
        d2,
        alpha,
        degenerate: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roots_satisfy_quartic() {
        let tp = radial_turning_points(0.2, 0.01).unwrap();
        assert!(tp.r1 < tp.r2 && tp.r1 > 0.0);
        for r in [tp.r1, tp.r2] {
            assert!(turning_quartic(r, 0.2, 0.01).abs() < 1e-15);
            assert!((v_r(r, 0.01) - 0.2).abs() < 1e-12);
        }
        let min = radial_minimum(0.01).unwrap().r_min;
        assert!(tp.r1 < min && min < tp.r2);
    }

    #[test]
    fn zero_angular_momentum_outer_root() {
        let tp = radial_turning_points(0.2, 0.0).unwrap();
        assert_eq!(tp.r1, 0.0);
        assert!((tp.r2 * tp.r2 + tp.r2 - 0.4).abs() < 1e-15);
        let near = radial_turning_points(0.2, 1e-7).unwrap();
        assert!((near.r2 - tp.r2).abs() < 1e-10);
    }

    #[test]
    fn minimum_is_stationary() {
        for c in [1e-3, 1e-2, 0.1, 1.0] {
            let r = radial_minimum(c).unwrap().r_min;
            assert!(v_r_prime(r, c).abs() < 1e-12, "c={c}");
            assert!(v_r_second(r, c) > 0.0);
            assert!(v_r(r, c) < v_r(r + 1e-3, c) && v_r(r, c) < v_r(r - 1e-3, c));
        }
    }

    #[test]
    fn circular_orbit_is_flagged() {
        let c = 0.05;
        let r = radial_minimum(c).unwrap().r_min;
        let tp = radial_turning_points(v_r(r, c), c).unwrap();
        assert!(tp.degenerate);
        assert_eq!(tp.r1, tp.r2);
        assert!(matches!(
            radial_turning_points(v_r(r, c) - 1e-6, c),
            Err(AnalyticError::BelowMinimum { .. })
        ));
    }

    #[test]
    fn bound_matches_minimum_energy() {
        // at the bound the energy equals the potential minimum
        let c = 0.03;
        let r = radial_minimum(c).unwrap().r_min;
        let h = v_r(r, c);
        assert!((librating_bound(h) - c * c).abs() < 1e-12);
    }
}
