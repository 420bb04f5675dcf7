//! Motion along the z-axis, where the flow reduces to `z'' = -4 z - sign(z)`.

use std::f64::consts::PI;

use super::AnalyticError;

pub fn v_z(z: f64) -> f64 {
    2.0 * z * z + z.abs()
}

/// Closed-form axial oscillation through the origin at `t = 0` with `z' > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZAxisMotion {
    pub h_z: f64,
    /// Time spent on each side of the origin; the period is `2T`.
    pub half_period: f64,
    amplitude: f64,
}

impl ZAxisMotion {
    pub fn period(&self) -> f64 {
        2.0 * self.half_period
    }

    /// Phase in `[0, 2T)`.
    fn reduce(&self, t: f64) -> f64 {
        let p = self.period();
        if p == 0.0 {
            return 0.0;
        }
        t.rem_euclid(p)
    }

    pub fn z(&self, t: f64) -> f64 {
        let tt = self.reduce(t);
        let big_t = self.half_period;
        if tt <= big_t {
            -0.25 + self.amplitude * (2.0 * tt - big_t).cos()
        } else {
            0.25 - self.amplitude * (2.0 * tt - 3.0 * big_t).cos()
        }
    }

    pub fn velocity(&self, t: f64) -> f64 {
        let tt = self.reduce(t);
        let big_t = self.half_period;
        if tt <= big_t {
            -2.0 * self.amplitude * (2.0 * tt - big_t).sin()
        } else {
            2.0 * self.amplitude * (2.0 * tt - 3.0 * big_t).sin()
        }
    }

    /// `|z'^2/2 + V_z(z) - h_z|` at time `t`.
    pub fn energy_residual(&self, t: f64) -> f64 {
        let v = self.velocity(t);
        (0.5 * v * v + v_z(self.z(t)) - self.h_z).abs()
    }

    pub fn turning_points(&self) -> (f64, f64) {
        (-(self.amplitude - 0.25), self.amplitude - 0.25)
    }
}

pub fn z_axis_solution(h_z: f64) -> Result<ZAxisMotion, AnalyticError> {
    if !(h_z.is_finite() && h_z > 0.0) {
        return Err(AnalyticError::Domain(format!(
            "axial energy must be positive, got {h_z}"
        )));
    }
    let root = (1.0 + 8.0 * h_z).sqrt();
    let half_period = (1.0 / root).acos();
    debug_assert!((0.0..PI / 2.0).contains(&half_period));
    Ok(ZAxisMotion {
        h_z,
        half_period,
        amplitude: 0.25 * root,
    })
}

/// `(z1, z2)` with `z1 = -z2`; `h_z = 0` gives the rest point.
pub fn z_turning_points(h_z: f64) -> Result<(f64, f64), AnalyticError> {
    if !(h_z.is_finite() && h_z >= 0.0) {
        return Err(AnalyticError::Domain(format!(
            "axial energy must be non-negative, got {h_z}"
        )));
    }
    let z2 = -0.25 + 0.25 * (1.0 + 8.0 * h_z).sqrt();
    Ok((-z2, z2))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn turning_points_are_exact() {
        assert_eq!(z_turning_points(1.0).unwrap(), (-0.5, 0.5));
        assert_eq!(z_turning_points(3.0).unwrap(), (-1.0, 1.0));
        assert_eq!(z_turning_points(0.0).unwrap(), (-0.0, 0.0));
        assert_eq!(v_z(0.5), 1.0);
    }

    #[test]
    fn energy_conserved_along_closed_form() {
        for h in [0.1, 1.0, 10.0] {
            let m = z_axis_solution(h).unwrap();
            for k in 0..1000 {
                let t = k as f64 * 0.0137;
                assert!(m.energy_residual(t) < 1e-12, "h={h} t={t}");
            }
        }
    }

    #[test]
    fn junctions_are_smooth() {
        let m = z_axis_solution(0.7).unwrap();
        let t = m.half_period;
        let e = 1e-9;
        assert!((m.z(t - e) - m.z(t + e)).abs() < 1e-8);
        assert!((m.velocity(t - e) - m.velocity(t + e)).abs() < 1e-7);
        assert!(m.z(0.0).abs() < 1e-15 && m.z(m.period()).abs() < 1e-15);
        assert!((m.z(0.5 * t) - m.turning_points().1).abs() < 1e-15);
    }

    #[test]
    fn small_energy_rests_at_origin() {
        let m = z_axis_solution(1e-14).unwrap();
        assert!(m.half_period < 1e-6);
        assert!(m.z(0.3).abs() < 1e-13);
        assert!(z_axis_solution(0.0).is_err());
    }
}
