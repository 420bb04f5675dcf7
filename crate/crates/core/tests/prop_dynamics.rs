use proptest::prelude::*;

use quadtrap::dynamics::{integrate, CartesianState, IntegrateOptions, PhaseState};
use quadtrap::potential::{h_cartesian, DeltaSource, PotentialParams};

fn params() -> PotentialParams {
    PotentialParams::published(DeltaSource::Caption)
}

fn state() -> impl Strategy<Value = CartesianState> {
    (
        0.02..0.4f64,
        0.0..std::f64::consts::TAU,
        -0.2..0.2f64,
        prop::array::uniform3(-0.3..0.3f64),
    )
        .prop_map(|(r, phi, z, p)| {
            CartesianState::new(r * phi.cos(), r * phi.sin(), z, p[0], p[1], p[2])
        })
}

fn end_state(s: &CartesianState, tau: f64) -> CartesianState {
    let t = integrate(
        &PhaseState::Cartesian(*s),
        &params(),
        tau,
        &IntegrateOptions::default(),
    )
    .unwrap();
    match t.last().unwrap().state {
        PhaseState::Cartesian(c) => c,
        PhaseState::Cylindrical(_) => unreachable!(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn energy_and_angular_momentum_are_conserved(s in state(), tau in 10.0..2000.0f64) {
        let t = integrate(&PhaseState::Cartesian(s), &params(), tau, &IntegrateOptions::default()).unwrap();
        prop_assert!(t.max_relative_energy_drift() < 1e-8, "energy drift {}", t.max_relative_energy_drift());
        prop_assert!(t.max_angular_momentum_drift() < 1e-10, "p_phi drift {}", t.max_angular_momentum_drift());
    }

    #[test]
    fn flow_is_reversible(s in state(), tau in 1.0..200.0f64) {
        let f = end_state(&s, tau);
        let back = end_state(&CartesianState::new(f.x, f.y, f.z, -f.px, -f.py, -f.pz), tau);
        let d = ((back.x - s.x).powi(2) + (back.y - s.y).powi(2) + (back.z - s.z).powi(2)).sqrt();
        prop_assert!(d < 1e-6, "returned {} away", d);
    }

    #[test]
    fn flow_commutes_with_z_reflection(s in state(), tau in 1.0..300.0f64) {
        let a = end_state(&s, tau);
        let b = end_state(&CartesianState::new(s.x, s.y, -s.z, s.px, s.py, -s.pz), tau);
        let d = [a.x - b.x, a.y - b.y, a.z + b.z, a.px - b.px, a.py - b.py, a.pz + b.pz];
        prop_assert!(d.iter().all(|v| v.abs() < 1e-12), "{:?}", d);
    }

    #[test]
    fn motion_stays_inside_the_turning_surface(s in state(), tau in 10.0..1000.0f64) {
        let p = params();
        let h = h_cartesian(&s.to_array(), &p);
        prop_assume!(h <= 0.125);
        // V = sigma rho / 2 + delta rho^2 / 2 with rho = sqrt(r^2 + 4 z^2)
        let rho_max = (-p.sigma + (p.sigma * p.sigma + 8.0 * p.delta * h).sqrt()) / (2.0 * p.delta);
        let t = integrate(&PhaseState::Cartesian(s), &p, tau, &IntegrateOptions::default()).unwrap();
        for smp in &t.samples {
            let c = smp.state.cylindrical();
            prop_assert!(c.r <= rho_max * (1.0 + 1e-9));
            prop_assert!(c.z.abs() <= 0.5 * rho_max * (1.0 + 1e-9));
        }
    }
}
