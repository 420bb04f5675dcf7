use nalgebra::DMatrix;
use proptest::prelude::*;

use quadtrap::analytic::elliptic::{jacobi_cn, jacobi_sn};
use quadtrap::analytic::radial::{librating_bound, turning_quartic};
use quadtrap::analytic::{radial_minimum, radial_turning_points, solve_cn_orbit, v_r};
use quadtrap::dynamics::{
    integrate, CylindricalState, IntegrateOptions, PhaseState, Stepper, StepperOptions,
};
use quadtrap::potential::{PotentialParams, Rescaling};

/// Positive real roots of `r^4 + r^3 - 2 h r^2 + c^2` from the companion matrix.
fn companion_roots(h: f64, c: f64) -> Vec<f64> {
    // monic, coefficients of r^0..r^3
    let a = [c * c, 0.0, -2.0 * h, 1.0];
    let mut m = DMatrix::<f64>::zeros(4, 4);
    for i in 1..4 {
        m[(i, i - 1)] = 1.0;
    }
    for i in 0..4 {
        m[(i, 3)] = -a[i];
    }
    let mut r: Vec<f64> = m
        .complex_eigenvalues()
        .iter()
        .filter(|z| z.im.abs() < 1e-7 && z.re > 0.0)
        .map(|z| z.re)
        .collect();
    r.sort_by(f64::total_cmp);
    r
}

/// One Newton step on the quartic, which removes the companion solver's own rounding.
fn newton(r: f64, h: f64, c: f64) -> f64 {
    let d = 4.0 * r * r * r + 3.0 * r * r - 4.0 * h * r;
    r - turning_quartic(r, h, c) / d
}

/// Admissible `(h_r, c_z)`: energy above the potential minimum.
fn radial_case() -> impl Strategy<Value = (f64, f64)> {
    (-3.0..0.0f64, -4.0..1.0f64).prop_map(|(lc, lg)| {
        let c = 10f64.powf(lc);
        let v_min = v_r(radial_minimum(c).unwrap().r_min, c);
        (v_min + 10f64.powf(lg) * v_min, c)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn ferrari_matches_companion_matrix((h, c) in radial_case()) {
        prop_assume!(c * c < librating_bound(h));
        let tp = radial_turning_points(h, c).unwrap();
        let oracle: Vec<f64> = companion_roots(h, c).into_iter().map(|r| newton(newton(r, h, c), h, c)).collect();
        prop_assert_eq!(oracle.len(), 2);
        prop_assert!((tp.r1 - oracle[0]).abs() < 1e-11, "r1 {} vs {}", tp.r1, oracle[0]);
        prop_assert!((tp.r2 - oracle[1]).abs() < 1e-11, "r2 {} vs {}", tp.r2, oracle[1]);
    }

    #[test]
    fn cn_and_sn_satisfy_the_pythagorean_identity(x in -50.0..50.0f64, m in 0.0..=1.0f64) {
        let (cn, sn) = (jacobi_cn(x, m).unwrap(), jacobi_sn(x, m).unwrap());
        prop_assert!((cn * cn + sn * sn - 1.0).abs() < 1e-13);
    }
}

/// Radial period of `r'' = c^2/r^3 - 1/2 - eta r` from rest at `u`, measured
/// as twice the time to the next zero of `r'`.
fn measured_period(u: f64, c: f64, eta: f64) -> f64 {
    let f =
        move |_t: f64, y: &[f64; 2]| Ok([y[1], c * c / (y[0] * y[0] * y[0]) - 0.5 - eta * y[0]]);
    let opts = StepperOptions {
        rel_tol: 1e-13,
        abs_tol: 1e-13,
        ..StepperOptions::default()
    };
    let t_end = 1e6;
    let mut st = Stepper::new(f, 0.0, [u, 0.0], t_end, opts).unwrap();
    st.step(t_end).unwrap();
    let sign = st.y[1].signum();
    loop {
        st.step(t_end).unwrap();
        if st.y[1] * sign < 0.0 {
            let (t0, _) = st.last_step_start();
            let d = st.dense().unwrap();
            let (mut lo, mut hi) = (t0, st.t);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if d.eval(mid)[1] * sign > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            return lo + hi;
        }
    }
}

fn cn_case() -> impl Strategy<Value = (f64, f64, f64)> {
    (-2.0..0.3f64, -3.0..-0.5f64, -4.0..0.0f64)
        .prop_map(|(lu, lc, le)| (10f64.powf(lu), 10f64.powf(lc), 10f64.powf(le)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn cn_period_matches_the_flow((u, c, eta) in cn_case()) {
        let orbit = solve_cn_orbit(u, c, eta);
        prop_assume!(orbit.is_ok());
        let orbit = orbit.unwrap();
        prop_assert!((orbit.r_of_s(0.3 + orbit.s_period) - orbit.r_of_s(0.3)).abs() < 1e-10 * u);
        let t = measured_period(u, c, eta);
        prop_assert!((orbit.tau_period - t).abs() < 1e-6 * t, "{} vs {}", orbit.tau_period, t);
        prop_assert!(orbit.p1_residual().abs() < 1e-10 && orbit.p2_residual().abs() < 1e-10);
    }

    // a planar trap orbit, rescaled, solves the parameter-free radial equation
    #[test]
    fn rescaling_maps_solutions(sigma in 0.2..2.0f64, delta in 0.01..1.0f64, r0 in 0.05..1.0f64, pr0 in -0.3..0.3f64, pphi in 0.001..0.05f64, tau in 1.0..20.0f64) {
        let params = PotentialParams::raw(sigma, delta).unwrap();
        let sc = Rescaling::new(&params).unwrap();
        let start = CylindricalState { r: r0, z: 0.0, phi: 0.0, p_r: pr0, p_z: 0.0, p_phi: pphi };
        let traj = integrate(&PhaseState::Cylindrical(start), &params, tau, &IntegrateOptions::default()).unwrap();
        let end = traj.last().unwrap().state.cylindrical();
        let c = sc.angular_momentum(pphi);
        let f = move |_t: f64, y: &[f64; 2]| Ok([y[1], c * c / (y[0] * y[0] * y[0]) - y[0] - 0.5]);
        let ts = sc.time(tau);
        let mut st = Stepper::new(f, 0.0, [sc.length(r0), sc.momentum(pr0)], ts, StepperOptions::default()).unwrap();
        while st.t < ts {
            st.step(ts).unwrap();
        }
        prop_assert!((sc.length_back(st.y[0]) - end.r).abs() < 1e-8 * end.r.max(1e-3));
        let p_scale = (2.0 * traj.initial_energy()).sqrt();
        prop_assert!((sc.momentum_back(st.y[1]) - end.p_r).abs() < 1e-8 * p_scale, "{} vs {}", sc.momentum_back(st.y[1]), end.p_r);
        prop_assert!(end.z.abs() < 1e-14);
    }
}
