//! Closed-form solutions on the invariant submanifolds.
//!
//! Everything here works in the rescaled variables in which the potential is
//! parameter free: `V = rho/2 + rho^2/2` with `rho = sqrt(r^2 + 4 z^2)`, so the
//! axial potential is `2 z^2 + |z|` and the radial one `c^2/(2 r^2) + r^2/2 + r/2`.
//! Use [`crate::potential::Rescaling`] to move between these and trap units.
//! The cn-form radial orbit is the exception: it keeps `eta` explicit and only
//! normalises sigma to one.

pub mod cnorbit;
pub mod elliptic;
pub mod poly;
pub mod quad;
pub mod radial;
pub mod zaxis;

use thiserror::Error;

pub use cnorbit::{solve_cn_orbit, CnCandidate, CnOrbit};
pub use elliptic::{cn_period, ellip_k, jacobi_cn, jacobi_dn, jacobi_sn, EllipticError};
pub use radial::{
    radial_minimum, radial_turning_points, v_r, RadialMinimum, RadialProblem, TurningPoints,
};
pub use zaxis::{v_z, z_axis_solution, z_turning_points, ZAxisMotion};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalyticError {
    #[error("{0}")]
    Domain(String),
    #[error("no librating orbit: c_z^2 = {c2} is not below the bound {bound}")]
    NoLibration { c2: f64, bound: f64 },
    #[error("energy {h} is below the minimum {v_min} of the effective potential")]
    BelowMinimum { h: f64, v_min: f64 },
    #[error("no real (m, omega) solves the consistency system; {} candidates examined", candidates.len())]
    NoRealSolution { candidates: Vec<CnCandidate> },
    #[error(transparent)]
    Elliptic(#[from] EllipticError),
}
