//! Motion on the z-axis.
//!
//! On the axis the force is `-sigma sign(z) - 4 delta z`, which jumps at the
//! origin. Each half-line is integrated with its own smooth force, the
//! crossing is located on the dense output and polished with exact re-steps,
//! and the integration restarts on the other branch.

use super::{Dense, DynamicsError, IntegrateOptions, StepFailure, Stepper};
use crate::potential::PotentialParams;

#[derive(Debug, Clone)]
pub struct AxisTrajectory {
    /// `(tau, z, p_z)` at every accepted step and every crossing.
    pub samples: Vec<(f64, f64, f64)>,
    /// Step interpolants with the time at which each stops being valid.
    pub pieces: Vec<(Dense<2>, f64)>,
    /// Times at which `z` passed through zero.
    pub crossings: Vec<f64>,
}

impl AxisTrajectory {
    /// `(z, p_z)` at `tau`.
    pub fn interpolate(&self, tau: f64) -> Option<[f64; 2]> {
        if self.pieces.is_empty() {
            let &(t0, z, p) = self.samples.first()?;
            return (tau >= t0).then_some([z, p]);
        }
        let i = self.pieces.partition_point(|(_, end)| *end < tau);
        self.pieces
            .get(i)
            .filter(|(d, _)| d.t0() <= tau)
            .map(|(d, _)| d.eval(tau))
    }

    pub fn energy(&self, params: &PotentialParams, z: f64, p: f64) -> f64 {
        0.5 * p * p + params.sigma * z.abs() + 2.0 * params.delta * z * z
    }
}

fn branch_of(z: f64, p: f64) -> f64 {
    if z > 0.0 || (z == 0.0 && p > 0.0) {
        1.0
    } else {
        -1.0
    }
}

/// Integrate `(z, p_z)` on the axis from `tau = 0` to `tau_end`.
pub fn integrate_axis(
    z0: f64,
    p0: f64,
    params: &PotentialParams,
    tau_end: f64,
    opts: &IntegrateOptions,
) -> Result<AxisTrajectory, DynamicsError> {
    if !(tau_end.is_finite() && tau_end >= 0.0) || !z0.is_finite() || !p0.is_finite() {
        return Err(DynamicsError::Invalid(
            "axis integration needs finite inputs".into(),
        ));
    }
    let mut out = AxisTrajectory {
        samples: vec![(0.0, z0, p0)],
        pieces: Vec::new(),
        crossings: Vec::new(),
    };
    if z0 == 0.0 && p0 == 0.0 {
        return Ok(out);
    }
    let (sigma, delta) = (params.sigma, params.delta);
    let (mut t, mut y) = (0.0, [z0, p0]);
    let fail = |d: StepFailure| DynamicsError::Invalid(format!("axis integration failed: {d}"));
    while t < tau_end {
        let s = branch_of(y[0], y[1]);
        let f = move |_t: f64, y: &[f64; 2]| Ok([y[1], -sigma * s - 4.0 * delta * y[0]]);
        let mut st = Stepper::new(f, t, y, tau_end, opts.stepper).map_err(fail)?;
        let mut crossed = false;
        while st.t < tau_end {
            st.step(tau_end).map_err(fail)?;
            let dense = st.dense().map_err(fail)?;
            if st.y[0] * s < 0.0 || (st.y[0] == 0.0 && st.t < tau_end) {
                let (t_old, _) = st.last_step_start();
                let mut tc = locate(&dense, t_old, st.t, s);
                let mut yc = st.restep_from_last(tc - t_old).map_err(fail)?;
                for _ in 0..4 {
                    if yc[1] == 0.0 {
                        break;
                    }
                    let dt = -yc[0] / yc[1];
                    if dt.abs() <= 1e-17 * tc.abs().max(1.0) {
                        break;
                    }
                    tc += dt;
                    yc = st.restep_from_last(tc - t_old).map_err(fail)?;
                }
                out.pieces.push((dense, tc));
                out.samples.push((tc, 0.0, yc[1]));
                out.crossings.push(tc);
                t = tc;
                y = [0.0, yc[1]];
                crossed = true;
                break;
            }
            out.pieces.push((dense, st.t));
            out.samples.push((st.t, st.y[0], st.y[1]));
            if st.accepted >= opts.max_steps {
                return Err(DynamicsError::Invalid(
                    "step budget exhausted on the axis".into(),
                ));
            }
        }
        if !crossed {
            t = st.t;
            y = st.y;
        }
    }
    Ok(out)
}

/// Root of `z` in the step `[t0, t1]` from the interpolant.
fn locate(d: &Dense<2>, t0: f64, t1: f64, s: f64) -> f64 {
    let (mut lo, mut hi) = (t0, t1);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if d.eval(mid)[0] * s > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn energy_is_conserved_through_crossings() {
        let p = PotentialParams::raw(1.0, 1.0).unwrap();
        let t = integrate_axis(0.3, 0.0, &p, 10.0, &IntegrateOptions::default()).unwrap();
        assert!(t.crossings.len() >= 8);
        let e0 = t.energy(&p, 0.3, 0.0);
        for &(_, z, pz) in &t.samples {
            assert!((t.energy(&p, z, pz) - e0).abs() < 1e-11);
        }
    }

    #[test]
    fn origin_at_rest_stays() {
        let p = PotentialParams::raw(1.0, 1.0).unwrap();
        let t = integrate_axis(0.0, 0.0, &p, 5.0, &IntegrateOptions::default()).unwrap();
        assert_eq!(t.interpolate(3.0), Some([0.0, 0.0]));
    }
}
