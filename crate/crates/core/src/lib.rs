//! Classical dynamics of a spin-1 diatomic molecule in a magnetic quadrupole trap.
//!
//! The crate builds the trapping potential from molecular and trap constants,
//! integrates the centre-of-mass flow, computes Poincare sections, evaluates
//! closed-form solutions on the invariant submanifolds, and runs the
//! Morales-Ramis eigenvalue test for the homogeneous part of the potential.

pub mod analytic;
pub mod config;
pub mod constants;
pub mod dynamics;
pub mod integrability;
pub mod poincare;
pub mod potential;
pub mod svg;
pub mod zeeman;
