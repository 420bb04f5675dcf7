//! Hamiltonian flow in the Cartesian and reduced cylindrical charts.

pub mod axis;
pub mod export;
pub mod rk;
mod tableau;
pub mod verlet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::potential::{h_cartesian, h_cylindrical, PotentialError, PotentialParams};
pub use rk::{Dense, Method, RhsFailure, StepFailure, Stepper, StepperOptions};

/// Below this `sqrt(r^2 + 4 z^2)` the stepper halves its step instead of
/// evaluating the force.
pub const NEAR_ORIGIN: f64 = 1e-10;

/// Smallest accepted relative tolerance, 100 machine epsilons.
pub const MIN_REL_TOL: f64 = 100.0 * f64::EPSILON;

#[derive(Debug, Error)]
pub enum DynamicsError {
    #[error(transparent)]
    Potential(#[from] PotentialError),
    #[error("invalid integration request: {0}")]
    Invalid(String),
    #[error("integration aborted: {}", .0.diagnostic)]
    Aborted(Box<Aborted>),
}

/// Partial result of an integration that could not reach its end time.
#[derive(Debug)]
pub struct Aborted {
    pub partial: Trajectory,
    pub diagnostic: StepFailure,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Chart {
    Cartesian,
    Cylindrical,
}

impl Chart {
    pub fn tag(self) -> u64 {
        match self {
            Chart::Cartesian => 0,
            Chart::Cylindrical => 1,
        }
    }

    pub fn from_tag(tag: u64) -> Option<Self> {
        match tag {
            0 => Some(Chart::Cartesian),
            1 => Some(Chart::Cylindrical),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CartesianState {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub px: f64,
    pub py: f64,
    pub pz: f64,
}

/// Cylindrical state; `p_phi` is conserved and acts as a parameter of the
/// reduced two-degree-of-freedom system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CylindricalState {
    pub r: f64,
    pub z: f64,
    pub phi: f64,
    pub p_r: f64,
    pub p_z: f64,
    pub p_phi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "chart", rename_all = "lowercase")]
pub enum PhaseState {
    Cartesian(CartesianState),
    Cylindrical(CylindricalState),
}

impl CartesianState {
    pub fn new(x: f64, y: f64, z: f64, px: f64, py: f64, pz: f64) -> Self {
        Self {
            x,
            y,
            z,
            px,
            py,
            pz,
        }
    }

    pub fn to_array(&self) -> [f64; 6] {
        [self.x, self.y, self.z, self.px, self.py, self.pz]
    }

    pub fn from_array(a: [f64; 6]) -> Self {
        Self::new(a[0], a[1], a[2], a[3], a[4], a[5])
    }

    pub fn angular_momentum(&self) -> f64 {
        self.x * self.py - self.y * self.px
    }

    pub fn to_cylindrical(&self) -> CylindricalState {
        let r = self.x.hypot(self.y);
        let p_phi = self.angular_momentum();
        if r == 0.0 {
            // on the axis the azimuth is undefined; align it with the transverse momentum
            let pt = self.px.hypot(self.py);
            let phi = if pt > 0.0 {
                self.py.atan2(self.px)
            } else {
                0.0
            };
            return CylindricalState {
                r,
                z: self.z,
                phi,
                p_r: pt,
                p_z: self.pz,
                p_phi,
            };
        }
        let phi = self.y.atan2(self.x);
        let p_r = (self.x * self.px + self.y * self.py) / r;
        CylindricalState {
            r,
            z: self.z,
            phi,
            p_r,
            p_z: self.pz,
            p_phi,
        }
    }
}

impl CylindricalState {
    pub fn to_cartesian(&self) -> Result<CartesianState, PotentialError> {
        if self.r == 0.0 && self.p_phi != 0.0 {
            return Err(PotentialError::Centrifugal { p_phi: self.p_phi });
        }
        let (s, c) = self.phi.sin_cos();
        let pt = if self.r == 0.0 {
            0.0
        } else {
            self.p_phi / self.r
        };
        Ok(CartesianState {
            x: self.r * c,
            y: self.r * s,
            z: self.z,
            px: self.p_r * c - pt * s,
            py: self.p_r * s + pt * c,
            pz: self.p_z,
        })
    }

    /// Integration vector `(r, z, p_r, p_z, phi)`.
    pub fn reduced(&self) -> [f64; 5] {
        [self.r, self.z, self.p_r, self.p_z, self.phi]
    }

    pub fn from_reduced(y: &[f64; 5], p_phi: f64) -> Self {
        Self {
            r: y[0],
            z: y[1],
            phi: y[4],
            p_r: y[2],
            p_z: y[3],
            p_phi,
        }
    }
}

impl PhaseState {
    pub fn chart(&self) -> Chart {
        match self {
            PhaseState::Cartesian(_) => Chart::Cartesian,
            PhaseState::Cylindrical(_) => Chart::Cylindrical,
        }
    }

    pub fn energy(&self, params: &PotentialParams) -> Result<f64, PotentialError> {
        match self {
            PhaseState::Cartesian(c) => Ok(h_cartesian(&c.to_array(), params)),
            PhaseState::Cylindrical(s) => h_cylindrical(s.r, s.z, s.p_r, s.p_z, s.p_phi, params),
        }
    }

    pub fn angular_momentum(&self) -> f64 {
        match self {
            PhaseState::Cartesian(c) => c.angular_momentum(),
            PhaseState::Cylindrical(s) => s.p_phi,
        }
    }

    pub fn cylindrical(&self) -> CylindricalState {
        match self {
            PhaseState::Cartesian(c) => c.to_cylindrical(),
            PhaseState::Cylindrical(s) => *s,
        }
    }

    pub fn cartesian(&self) -> Result<CartesianState, PotentialError> {
        match self {
            PhaseState::Cartesian(c) => Ok(*c),
            PhaseState::Cylindrical(s) => s.to_cartesian(),
        }
    }
}

/// The same point expressed in the other chart.
pub fn convert_chart(state: &PhaseState) -> Result<PhaseState, PotentialError> {
    match state {
        PhaseState::Cartesian(c) => Ok(PhaseState::Cylindrical(c.to_cylindrical())),
        PhaseState::Cylindrical(s) => Ok(PhaseState::Cartesian(s.to_cartesian()?)),
    }
}

/// Time derivative of `(r, z, p_r, p_z, phi)`.
pub fn rhs_cylindrical(
    y: &[f64; 5],
    p_phi: f64,
    params: &PotentialParams,
) -> Result<[f64; 5], PotentialError> {
    let [r, z, p_r, p_z, _] = *y;
    let rho = (r * r + 4.0 * z * z).sqrt();
    if rho < crate::potential::EPS_SING {
        return Err(PotentialError::Singular { norm: 0.5 * rho });
    }
    let (centrifugal, phi_dot) = if p_phi == 0.0 {
        (0.0, 0.0)
    } else if r <= 0.0 {
        return Err(PotentialError::Centrifugal { p_phi });
    } else {
        let r2 = r * r;
        (p_phi * p_phi / (r2 * r), p_phi / r2)
    };
    Ok([
        p_r,
        p_z,
        centrifugal - 0.5 * params.sigma * r / rho - params.delta * r,
        -2.0 * params.sigma * z / rho - 4.0 * params.delta * z,
        phi_dot,
    ])
}

/// Time derivative in the sigma-normalised form, where the force reads
/// `p_phi^2/r^3 - eta r - r / (2 rho)`. Time and momenta are the rescaled ones.
pub fn rhs_cylindrical_normalised(
    y: &[f64; 5],
    p_phi: f64,
    eta: f64,
) -> Result<[f64; 5], PotentialError> {
    let p = PotentialParams::raw(1.0, eta)?;
    rhs_cylindrical(y, p_phi, &p)
}

/// Time derivative of `(x, y, z, p_x, p_y, p_z)`.
pub fn rhs_cartesian(s: &[f64; 6], params: &PotentialParams) -> Result<[f64; 6], PotentialError> {
    let g = crate::potential::grad_v_cartesian(
        &crate::zeeman::FieldPoint::new(s[0], s[1], s[2]),
        params,
    )?;
    Ok([s[3], s[4], s[5], -g[0], -g[1], -g[2]])
}

fn guarded_cyl(y: &[f64; 5], p_phi: f64, params: &PotentialParams) -> Result<[f64; 5], RhsFailure> {
    let rho = (y[0] * y[0] + 4.0 * y[1] * y[1]).sqrt();
    if rho < NEAR_ORIGIN {
        return Err(RhsFailure::NearSingular(format!(
            "field zero approached (rho = {rho:e})"
        )));
    }
    rhs_cylindrical(y, p_phi, params).map_err(|e| RhsFailure::Fatal(e.to_string()))
}

fn guarded_cart(s: &[f64; 6], params: &PotentialParams) -> Result<[f64; 6], RhsFailure> {
    let rho = (s[0] * s[0] + s[1] * s[1] + 4.0 * s[2] * s[2]).sqrt();
    if rho < NEAR_ORIGIN {
        return Err(RhsFailure::NearSingular(format!(
            "field zero approached (rho = {rho:e})"
        )));
    }
    rhs_cartesian(s, params).map_err(|e| RhsFailure::Fatal(e.to_string()))
}

/// Right-hand side closure for the reduced cylindrical system, with the
/// near-origin guard used by the adaptive stepper.
pub fn cylindrical_system(
    p_phi: f64,
    params: PotentialParams,
) -> impl FnMut(f64, &[f64; 5]) -> Result<[f64; 5], RhsFailure> {
    move |_t, y| guarded_cyl(y, p_phi, &params)
}

pub fn cartesian_system(
    params: PotentialParams,
) -> impl FnMut(f64, &[f64; 6]) -> Result<[f64; 6], RhsFailure> {
    move |_t, s| guarded_cart(s, &params)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub tau: f64,
    pub state: PhaseState,
    pub energy: f64,
    pub p_phi: f64,
}

/// Accepted-step samples of one integration.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub chart: Chart,
    pub samples: Vec<Sample>,
    /// One interpolant per accepted step when requested.
    pub dense: DenseStore,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Default)]
pub enum DenseStore {
    #[default]
    None,
    Cylindrical(Vec<Dense<5>>),
    Cartesian(Vec<Dense<6>>),
}

impl Trajectory {
    pub fn initial_energy(&self) -> f64 {
        self.samples.first().map(|s| s.energy).unwrap_or(f64::NAN)
    }

    /// Largest `|H - H0| / max(|H0|, 1e-300)` over the samples.
    pub fn max_relative_energy_drift(&self) -> f64 {
        let h0 = self.initial_energy();
        let d = h0.abs().max(1e-300);
        self.samples
            .iter()
            .map(|s| (s.energy - h0).abs() / d)
            .fold(0.0, f64::max)
    }

    pub fn max_angular_momentum_drift(&self) -> f64 {
        let l0 = self.samples.first().map(|s| s.p_phi).unwrap_or(0.0);
        self.samples
            .iter()
            .map(|s| (s.p_phi - l0).abs())
            .fold(0.0, f64::max)
    }

    pub fn last(&self) -> Option<&Sample> {
        self.samples.last()
    }

    /// State at `tau` from the stored interpolants.
    pub fn interpolate(&self, tau: f64) -> Option<PhaseState> {
        fn find<const N: usize>(v: &[Dense<N>], tau: f64) -> Option<&Dense<N>> {
            let i = v.partition_point(|d| d.t0() + d.h() < tau);
            v.get(i).filter(|d| d.t0() <= tau)
        }
        match &self.dense {
            DenseStore::None => None,
            DenseStore::Cylindrical(v) => {
                let p_phi = self.samples.first()?.p_phi;
                find(v, tau).map(|d| {
                    PhaseState::Cylindrical(CylindricalState::from_reduced(&d.eval(tau), p_phi))
                })
            }
            DenseStore::Cartesian(v) => {
                find(v, tau).map(|d| PhaseState::Cartesian(CartesianState::from_array(d.eval(tau))))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrateOptions {
    pub stepper: StepperOptions,
    pub keep_dense: bool,
    pub max_steps: usize,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        Self {
            stepper: StepperOptions::default(),
            keep_dense: false,
            max_steps: 50_000_000,
        }
    }
}

impl IntegrateOptions {
    pub fn with_tolerances(rel_tol: f64, abs_tol: f64) -> Self {
        let mut o = Self::default();
        o.stepper.rel_tol = rel_tol;
        o.stepper.abs_tol = abs_tol;
        o
    }
}

fn validate_request(tau_end: f64, opts: &IntegrateOptions) -> Result<(), DynamicsError> {
    let (rel, abs) = (opts.stepper.rel_tol, opts.stepper.abs_tol);
    // below ~100 eps the error estimate is pure roundoff
    if !(MIN_REL_TOL..=1e-3).contains(&rel) || !(abs > 0.0 && abs <= 1e-3) {
        return Err(DynamicsError::Invalid(format!(
            "tolerances must lie in [{MIN_REL_TOL:e}, 1e-3] (rel) and (0, 1e-3] (abs), got rel {rel} abs {abs}"
        )));
    }
    if !(tau_end.is_finite() && tau_end >= 0.0) {
        return Err(DynamicsError::Invalid(format!(
            "end time must be finite and non-negative, got {tau_end}"
        )));
    }
    Ok(())
}

/// Integrate from `state0` to `tau_end` in the chart of `state0`.
///
/// Cylindrical states are integrated in the reduced system with `p_phi` as a
/// parameter; Cartesian states use the full six-dimensional flow.
pub fn integrate(
    state0: &PhaseState,
    params: &PotentialParams,
    tau_end: f64,
    opts: &IntegrateOptions,
) -> Result<Trajectory, DynamicsError> {
    validate_request(tau_end, opts)?;
    match state0 {
        PhaseState::Cylindrical(s) => integrate_cylindrical(s, params, tau_end, opts),
        PhaseState::Cartesian(c) => integrate_cartesian(c, params, tau_end, opts),
    }
}

fn integrate_cylindrical(
    s0: &CylindricalState,
    params: &PotentialParams,
    tau_end: f64,
    opts: &IntegrateOptions,
) -> Result<Trajectory, DynamicsError> {
    let p_phi = s0.p_phi;
    let energy = |y: &[f64; 5]| h_cylindrical(y[0], y[1], y[2], y[3], p_phi, params);
    let y0 = s0.reduced();
    let e0 = energy(&y0)?;
    let mut traj = Trajectory {
        chart: Chart::Cylindrical,
        samples: vec![Sample {
            tau: 0.0,
            state: PhaseState::Cylindrical(*s0),
            energy: e0,
            p_phi,
        }],
        dense: if opts.keep_dense {
            DenseStore::Cylindrical(Vec::new())
        } else {
            DenseStore::None
        },
        accepted_steps: 0,
        rejected_steps: 0,
        evaluations: 0,
    };
    if tau_end == 0.0 {
        return Ok(traj);
    }
    let mut st = Stepper::new(
        cylindrical_system(p_phi, *params),
        0.0,
        y0,
        tau_end,
        opts.stepper,
    )
    .map_err(|d| abort(traj.clone(), d))?;
    while st.t < tau_end {
        if st.accepted >= opts.max_steps {
            let d = StepFailure::Fatal {
                t: st.t,
                reason: "step budget exhausted".into(),
            };
            return Err(abort(finish(traj, &st), d));
        }
        if let Err(d) = st.step(tau_end) {
            return Err(abort(finish(traj, &st), d));
        }
        if let DenseStore::Cylindrical(v) = &mut traj.dense {
            match st.dense() {
                Ok(d) => v.push(d),
                Err(d) => return Err(abort(finish(traj, &st), d)),
            }
        }
        let e = energy(&st.y).unwrap_or(f64::NAN);
        traj.samples.push(Sample {
            tau: st.t,
            state: PhaseState::Cylindrical(CylindricalState::from_reduced(&st.y, p_phi)),
            energy: e,
            p_phi,
        });
    }
    Ok(finish(traj, &st))
}

fn integrate_cartesian(
    c0: &CartesianState,
    params: &PotentialParams,
    tau_end: f64,
    opts: &IntegrateOptions,
) -> Result<Trajectory, DynamicsError> {
    let y0 = c0.to_array();
    let mut traj = Trajectory {
        chart: Chart::Cartesian,
        samples: vec![Sample {
            tau: 0.0,
            state: PhaseState::Cartesian(*c0),
            energy: h_cartesian(&y0, params),
            p_phi: c0.angular_momentum(),
        }],
        dense: if opts.keep_dense {
            DenseStore::Cartesian(Vec::new())
        } else {
            DenseStore::None
        },
        accepted_steps: 0,
        rejected_steps: 0,
        evaluations: 0,
    };
    if tau_end == 0.0 {
        return Ok(traj);
    }
    let mut st = Stepper::new(cartesian_system(*params), 0.0, y0, tau_end, opts.stepper)
        .map_err(|d| abort(traj.clone(), d))?;
    while st.t < tau_end {
        if st.accepted >= opts.max_steps {
            let d = StepFailure::Fatal {
                t: st.t,
                reason: "step budget exhausted".into(),
            };
            return Err(abort(finish(traj, &st), d));
        }
        if let Err(d) = st.step(tau_end) {
            return Err(abort(finish(traj, &st), d));
        }
        if let DenseStore::Cartesian(v) = &mut traj.dense {
            match st.dense() {
                Ok(d) => v.push(d),
                Err(d) => return Err(abort(finish(traj, &st), d)),
            }
        }
        let c = CartesianState::from_array(st.y);
        traj.samples.push(Sample {
            tau: st.t,
            state: PhaseState::Cartesian(c),
            energy: h_cartesian(&st.y, params),
            p_phi: c.angular_momentum(),
        });
    }
    Ok(finish(traj, &st))
}

fn finish<F, const N: usize>(mut traj: Trajectory, st: &Stepper<F, N>) -> Trajectory
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N], RhsFailure>,
{
    traj.accepted_steps = st.accepted;
    traj.rejected_steps = st.rejected;
    traj.evaluations = st.evaluations;
    traj
}

fn abort(partial: Trajectory, diagnostic: StepFailure) -> DynamicsError {
    DynamicsError::Aborted(Box::new(Aborted {
        partial,
        diagnostic,
    }))
}

/// The seven published initial conditions `(x, 0, 0, p_x, p_y, p_z)` at h = 0.125.
pub const PUBLISHED_ORBITS: [(&str, [f64; 4]); 7] = [
    ("P1", [0.112615, 0.0, 0.0887981, 0.430698]),
    ("P2", [0.45325, 0.0, 0.0220629, 0.14714]),
    ("P3", [0.228784, 0.199993, 0.0437094, 0.305084]),
    ("Q1", [0.13547, -0.0254729, 0.0738171, 0.419283]),
    ("Q2", [0.190487, 0.150348, 0.052497, 0.358994]),
    ("Q3", [0.145072, -0.0297181, 0.0689313, 0.414046]),
    ("CH", [0.313439, 0.000209503, 0.0319041, 0.302336]),
];

/// Named published initial condition as a Cartesian state.
pub fn published_orbit(name: &str) -> Option<CartesianState> {
    PUBLISHED_ORBITS
        .iter()
        .find(|(n, _)| n.eq_ignore_ascii_case(name))
        .map(|(_, v)| CartesianState::new(v[0], 0.0, 0.0, v[1], v[2], v[3]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_circle_chart_map() {
        let c = CartesianState::new(1.0, 0.0, 0.0, 0.0, 1.0, 0.0);
        let s = c.to_cylindrical();
        assert_eq!((s.r, s.p_r, s.p_phi), (1.0, 0.0, 1.0));
    }

    #[test]
    fn z_axis_is_invariant_for_rhs() {
        let p = PotentialParams::raw(1.0, 0.1).unwrap();
        let d = rhs_cylindrical(&[0.0, 0.3, 0.0, 0.2, 0.0], 0.0, &p).unwrap();
        assert_eq!(d[0], 0.0);
        assert_eq!(d[2], 0.0);
        assert_eq!(d[4], 0.0);
    }

    #[test]
    fn published_p1_angular_momentum() {
        let c = published_orbit("P1").unwrap();
        let s = c.to_cylindrical();
        assert_eq!(s.r, 0.112615);
        assert_eq!(s.p_r, 0.0);
        assert!((s.p_phi - 0.112615 * 0.0887981).abs() < 1e-18);
        assert!((s.p_phi - 0.01).abs() < 1e-5);
    }

    #[test]
    fn rejects_loose_tolerance() {
        let p = PotentialParams::raw(1.0, 0.1).unwrap();
        let s = PhaseState::Cartesian(CartesianState::new(0.1, 0.0, 0.0, 0.0, 0.1, 0.1));
        let o = IntegrateOptions::with_tolerances(1e-2, 1e-10);
        assert!(matches!(
            integrate(&s, &p, 1.0, &o),
            Err(DynamicsError::Invalid(_))
        ));
        let o = IntegrateOptions::with_tolerances(1e-30, 1e-30);
        assert!(matches!(
            integrate(&s, &p, 1.0, &o),
            Err(DynamicsError::Invalid(_))
        ));
    }
}
