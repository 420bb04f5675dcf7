//! Fixed-step Stormer-Verlet for the reduced cylindrical system.
//!
//! The Hamiltonian is separable, so kick-drift-kick is symplectic and keeps
//! the energy error bounded (no secular drift) on long runs.

use super::{
    rhs_cylindrical, Chart, CylindricalState, DenseStore, DynamicsError, PhaseState, Sample,
    Trajectory,
};
use crate::potential::{h_cylindrical, PotentialParams};

/// Integrate `n_steps` steps of size `h`, recording every `record_every`-th state.
pub fn integrate_verlet(
    s0: &CylindricalState,
    params: &PotentialParams,
    h: f64,
    n_steps: usize,
    record_every: usize,
) -> Result<Trajectory, DynamicsError> {
    if !(h.is_finite() && h > 0.0) {
        return Err(DynamicsError::Invalid(format!(
            "step must be positive, got {h}"
        )));
    }
    let every = record_every.max(1);
    let p_phi = s0.p_phi;
    let energy = |y: &[f64; 5]| h_cylindrical(y[0], y[1], y[2], y[3], p_phi, params);
    let mut y = s0.reduced();
    let mut samples = vec![Sample {
        tau: 0.0,
        state: PhaseState::Cylindrical(*s0),
        energy: energy(&y)?,
        p_phi,
    }];
    let mut force = rhs_cylindrical(&y, p_phi, params)?;
    for n in 1..=n_steps {
        let phi_rate_old = force[4];
        y[2] += 0.5 * h * force[2];
        y[3] += 0.5 * h * force[3];
        y[0] += h * y[2];
        y[1] += h * y[3];
        force = rhs_cylindrical(&y, p_phi, params)?;
        y[2] += 0.5 * h * force[2];
        y[3] += 0.5 * h * force[3];
        y[4] += 0.5 * h * (phi_rate_old + force[4]);
        if n % every == 0 || n == n_steps {
            samples.push(Sample {
                tau: n as f64 * h,
                state: PhaseState::Cylindrical(CylindricalState::from_reduced(&y, p_phi)),
                energy: energy(&y)?,
                p_phi,
            });
        }
    }
    Ok(Trajectory {
        chart: Chart::Cylindrical,
        samples,
        dense: DenseStore::None,
        accepted_steps: n_steps,
        rejected_steps: 0,
        evaluations: n_steps + 1,
    })
}
