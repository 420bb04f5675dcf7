use quadtrap::analytic::{solve_cn_orbit, z_axis_solution};
use quadtrap::dynamics::axis::integrate_axis;
use quadtrap::dynamics::{integrate, CylindricalState, IntegrateOptions, PhaseState};
use quadtrap::potential::PotentialParams;

fn dense_opts() -> IntegrateOptions {
    IntegrateOptions {
        keep_dense: true,
        ..IntegrateOptions::default()
    }
}

#[test]
fn z_axis_closed_form_tracks_the_flow() {
    // the rescaled flow is the trap flow with sigma = delta = 1
    let params = PotentialParams::raw(1.0, 1.0).unwrap();
    for h in [0.1, 1.0] {
        let m = z_axis_solution(h).unwrap();
        let t0 = 0.5 * m.half_period;
        let span = 3.0 * m.period();
        let traj = integrate_axis(
            m.z(t0),
            m.velocity(t0),
            &params,
            span,
            &IntegrateOptions::default(),
        )
        .unwrap();
        let mut worst = 0.0f64;
        for k in 0..=3000 {
            let t = span * k as f64 / 3000.0;
            let z = traj.interpolate(t).unwrap()[0];
            worst = worst.max((z - m.z(t0 + t)).abs());
        }
        println!("h={h} worst={worst:e} crossings={}", traj.crossings.len());
        assert!(worst < 1e-8, "h={h} worst={worst:e}");
    }
}

#[test]
fn cn_orbit_tracks_the_radial_flow() {
    for (u, c, eta) in [(0.3, 0.01, 0.05), (0.05, 0.01, 0.2), (1.2, 0.3, 3.567e-5)] {
        let orbit = solve_cn_orbit(u, c, eta).unwrap();
        let params = PotentialParams::raw(1.0, eta).unwrap();
        let s = CylindricalState {
            r: u,
            z: 0.0,
            phi: 0.0,
            p_r: 0.0,
            p_z: 0.0,
            p_phi: c,
        };
        let traj = integrate(
            &PhaseState::Cylindrical(s),
            &params,
            orbit.tau_period,
            &dense_opts(),
        )
        .unwrap();
        let mut worst = 0.0f64;
        let mut worst_res = 0.0f64;
        for k in 0..=200 {
            let t = orbit.tau_period * k as f64 / 200.0;
            let r = traj.interpolate(t).unwrap().cylindrical().r;
            worst = worst.max((r - orbit.r_of_tau(t)).abs());
            worst_res = worst_res.max(orbit.ode_residual(t));
        }
        println!(
            "u={u} c={c} eta={eta} m={} omega={} T={} worst={worst:e} res={worst_res:e}",
            orbit.m, orbit.omega, orbit.tau_period
        );
        assert!(worst < 1e-6, "u={u} worst={worst:e}");
        assert!(worst_res < 1e-8);
    }
}
