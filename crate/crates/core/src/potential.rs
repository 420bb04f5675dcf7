//! Trapping potential, its parameters, and unit conversions.
//!
//! In trap units the centre-of-mass Hamiltonian is
//! `H = p^2/2 + sigma |B| + 2 delta |B|^2` with `|B|^2 = z^2 + (x^2 + y^2)/4`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constants::PhysicalConstants;
use crate::zeeman::{
    compute_alpha_l, compute_beta_l, FieldPoint, MoleculeSpec, RotorState, TrapSpec,
};

/// Below this field magnitude the gradient is treated as undefined.
pub const EPS_SING: f64 = 1e-14;

/// Published sigma for H2, J = 10, M = -10, varpi = 1/2.
pub const PUBLISHED_SIGMA: f64 = 0.502723;
/// Published delta that accompanies the published sigma.
pub const PUBLISHED_DELTA_TEXT: f64 = 6.01911e-6;
/// Published delta used for the published Poincare sections.
pub const PUBLISHED_DELTA_CAPTION: f64 = 1.79305e-5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PotentialError {
    #[error("sigma = {sigma} <= 0: the state is a high-field seeker and is not trapped")]
    Untrapped { sigma: f64 },
    #[error("gradient undefined at the field zero (|B| = {norm:e})")]
    Singular { norm: f64 },
    #[error("r = 0 with p_phi = {p_phi}: centrifugal term diverges")]
    Centrifugal { p_phi: f64 },
    #[error("invalid input: {0}")]
    Invalid(String),
}

/// Second-order Zeeman averages of an electronic-vibrational state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VibronicConstants {
    pub a1: f64,
    pub a2: f64,
}

impl VibronicConstants {
    /// H2 triplet state, ground vibrational level.
    pub const H2_GROUND: Self = Self {
        a1: 0.5691906099701544,
        a2: 0.1665675408030196,
    };
    /// H2 triplet state, first excited vibrational level.
    pub const H2_FIRST_EXCITED: Self = Self {
        a1: 0.5369997783542894,
        a2: 0.1613113921392951,
    };
}

/// Where a parameter set's delta came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DeltaSource {
    /// Evaluated from the defining formula.
    Computed,
    /// The published value that accompanies sigma.
    Text,
    /// The published value used for the Poincare sections.
    Caption,
    /// Supplied directly by the caller.
    Raw,
}

impl std::str::FromStr for DeltaSource {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "computed" => Ok(Self::Computed),
            "text" => Ok(Self::Text),
            "caption" => Ok(Self::Caption),
            "raw" => Ok(Self::Raw),
            other => Err(format!(
                "unknown delta source `{other}` (expected computed, text or caption)"
            )),
        }
    }
}

/// Coefficients of the dimensionless potential.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PotentialParams {
    pub sigma: f64,
    pub delta: f64,
    pub eta: f64,
    pub delta_source: DeltaSource,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vibronic: Option<VibronicConstants>,
}

impl PotentialParams {
    pub fn raw(sigma: f64, delta: f64) -> Result<Self, PotentialError> {
        Self::with_source(sigma, delta, DeltaSource::Raw, None)
    }

    fn with_source(
        sigma: f64,
        delta: f64,
        delta_source: DeltaSource,
        vibronic: Option<VibronicConstants>,
    ) -> Result<Self, PotentialError> {
        if !sigma.is_finite() || !delta.is_finite() {
            return Err(PotentialError::Invalid(
                "sigma and delta must be finite".into(),
            ));
        }
        if sigma <= 0.0 {
            return Err(PotentialError::Untrapped { sigma });
        }
        if delta < 0.0 {
            return Err(PotentialError::Invalid(format!(
                "delta must be non-negative, got {delta}"
            )));
        }
        Ok(Self {
            sigma,
            delta,
            eta: delta / sigma,
            delta_source,
            vibronic,
        })
    }

    /// Same sigma, delta replaced by one of the published values.
    pub fn with_delta(self, source: DeltaSource, computed: f64) -> Result<Self, PotentialError> {
        let delta = match source {
            DeltaSource::Computed | DeltaSource::Raw => computed,
            DeltaSource::Text => PUBLISHED_DELTA_TEXT,
            DeltaSource::Caption => PUBLISHED_DELTA_CAPTION,
        };
        Self::with_source(self.sigma, delta, source, self.vibronic)
    }

    /// Published sigma together with the chosen delta. `Computed` evaluates the
    /// defining formula for the H2 reference state.
    pub fn published(source: DeltaSource) -> Self {
        let delta = match source {
            DeltaSource::Text => PUBLISHED_DELTA_TEXT,
            DeltaSource::Caption | DeltaSource::Raw => PUBLISHED_DELTA_CAPTION,
            DeltaSource::Computed => {
                reference_h2_params(&PhysicalConstants::default())
                    .expect("reference state is trapped")
                    .delta
            }
        };
        let source = if source == DeltaSource::Raw {
            DeltaSource::Caption
        } else {
            source
        };
        Self::with_source(
            PUBLISHED_SIGMA,
            delta,
            source,
            Some(VibronicConstants::H2_GROUND),
        )
        .expect("published values are valid")
    }

    /// Parameters after scaling sigma to one (`tau' = sqrt(sigma) tau`, `h' = h/sigma`).
    pub fn sigma_normalised(&self) -> Self {
        Self {
            sigma: 1.0,
            delta: self.eta,
            eta: self.eta,
            ..*self
        }
    }
}

/// `(g_S/2) varpi - alpha_L M`.
pub fn compute_sigma(mol: &MoleculeSpec, state: &RotorState, consts: &PhysicalConstants) -> f64 {
    0.5 * mol.g_s * state.varpi - compute_alpha_l(mol, consts) * state.m as f64
}

/// `(beta_L / 2)(A1 - A2 f(J, M))`.
pub fn compute_delta(
    trap: &TrapSpec,
    state: &RotorState,
    vib: &VibronicConstants,
    consts: &PhysicalConstants,
) -> f64 {
    0.5 * compute_beta_l(trap, consts) * (vib.a1 - vib.a2 * state.quadratic_factor())
}

pub fn make_params(
    mol: &MoleculeSpec,
    trap: &TrapSpec,
    state: &RotorState,
    vib: &VibronicConstants,
    consts: &PhysicalConstants,
) -> Result<PotentialParams, PotentialError> {
    if state.j == 0 {
        return Err(PotentialError::Invalid("J must be at least 1".into()));
    }
    if state.m.unsigned_abs() > state.j {
        return Err(PotentialError::Invalid(format!(
            "|M| > J for J = {}, M = {}",
            state.j, state.m
        )));
    }
    let sigma = compute_sigma(mol, state, consts);
    let delta = compute_delta(trap, state, vib, consts);
    PotentialParams::with_source(sigma, delta, DeltaSource::Computed, Some(*vib))
}

/// H2, J = 10, M = -10, varpi = 1/2, ground vibronic constants, 5 T.
pub fn reference_h2_params(consts: &PhysicalConstants) -> Result<PotentialParams, PotentialError> {
    let table = crate::constants::MoleculeTable::builtin();
    let h2 = table.get("H2").expect("H2 preset");
    let state = RotorState {
        j: 10,
        m: -10,
        varpi: 0.5,
    };
    make_params(
        h2,
        &TrapSpec::default(),
        &state,
        &VibronicConstants::H2_GROUND,
        consts,
    )
}

pub fn v_cartesian(p: &FieldPoint, params: &PotentialParams) -> f64 {
    let b2 = p.field_norm_sq();
    params.sigma * b2.sqrt() + 2.0 * params.delta * b2
}

/// `grad V = (sigma/|B| + 4 delta) (x/4, y/4, z)`.
pub fn grad_v_cartesian(
    p: &FieldPoint,
    params: &PotentialParams,
) -> Result<[f64; 3], PotentialError> {
    let b = p.field_norm();
    if b < EPS_SING {
        return Err(PotentialError::Singular { norm: b });
    }
    let k = params.sigma / b + 4.0 * params.delta;
    Ok([k * 0.25 * p.x, k * 0.25 * p.y, k * p.z])
}

/// Cartesian Hamiltonian for `(x, y, z, p_x, p_y, p_z)`.
pub fn h_cartesian(s: &[f64; 6], params: &PotentialParams) -> f64 {
    0.5 * (s[3] * s[3] + s[4] * s[4] + s[5] * s[5])
        + v_cartesian(&FieldPoint::new(s[0], s[1], s[2]), params)
}

/// `sqrt(r^2 + 4 z^2)`, twice the field magnitude.
#[inline]
pub fn rho(r: f64, z: f64) -> f64 {
    (r * r + 4.0 * z * z).sqrt()
}

pub fn h_cylindrical(
    r: f64,
    z: f64,
    p_r: f64,
    p_z: f64,
    p_phi: f64,
    params: &PotentialParams,
) -> Result<f64, PotentialError> {
    let centrifugal = if p_phi == 0.0 {
        0.0
    } else if r == 0.0 {
        return Err(PotentialError::Centrifugal { p_phi });
    } else {
        p_phi * p_phi / (r * r)
    };
    if r < 0.0 {
        return Err(PotentialError::Invalid(format!("negative radius {r}")));
    }
    let q = r * r + 4.0 * z * z;
    Ok(0.5 * (p_r * p_r + p_z * p_z + centrifugal)
        + 0.5 * params.sigma * q.sqrt()
        + 0.5 * params.delta * q)
}

/// Effective radial potential in the plane z = 0.
pub fn v_eff_plane(r: f64, p_phi: f64, params: &PotentialParams) -> f64 {
    let c = if p_phi == 0.0 {
        0.0
    } else {
        0.5 * p_phi * p_phi / (r * r)
    };
    c + 0.5 * params.sigma * r + 0.5 * params.delta * r * r
}

/// Seconds per unit of dimensionless time.
pub fn time_unit_seconds(mol: &MoleculeSpec, trap: &TrapSpec, consts: &PhysicalConstants) -> f64 {
    let beta = compute_beta_l(trap, consts);
    let mass = mol.total_mass_kg(consts);
    consts.bohr_radius * trap.d * (mass * consts.electron_mass).sqrt() / (consts.hbar * beta.sqrt())
}

pub fn tau_to_seconds(
    tau: f64,
    mol: &MoleculeSpec,
    trap: &TrapSpec,
    consts: &PhysicalConstants,
) -> f64 {
    tau * time_unit_seconds(mol, trap, consts)
}

/// One unit of dimensionless energy is `beta_L` Hartree.
pub fn energy_to_kelvin(h: f64, trap: &TrapSpec, consts: &PhysicalConstants) -> f64 {
    h * compute_beta_l(trap, consts) * consts.hartree_kelvin
}

/// Maps trap-unit quantities to the rescaled variables in which the radial
/// and axial potentials become parameter free:
/// `r_s = eta r`, `t_s = sqrt(eta sigma) tau`, `p_s = sqrt(eta / sigma) p`,
/// `h_s = eta h / sigma`, `c_z = eta^{3/2} p_phi / sqrt(sigma)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rescaling {
    pub sigma: f64,
    pub eta: f64,
}

impl Rescaling {
    pub fn new(params: &PotentialParams) -> Result<Self, PotentialError> {
        if params.eta <= 0.0 {
            return Err(PotentialError::Invalid("rescaling needs delta > 0".into()));
        }
        Ok(Self {
            sigma: params.sigma,
            eta: params.eta,
        })
    }

    pub fn length(&self, r: f64) -> f64 {
        self.eta * r
    }
    pub fn length_back(&self, r_s: f64) -> f64 {
        r_s / self.eta
    }
    pub fn time(&self, tau: f64) -> f64 {
        (self.eta * self.sigma).sqrt() * tau
    }
    pub fn time_back(&self, t_s: f64) -> f64 {
        t_s / (self.eta * self.sigma).sqrt()
    }
    pub fn momentum(&self, p: f64) -> f64 {
        (self.eta / self.sigma).sqrt() * p
    }
    pub fn momentum_back(&self, p_s: f64) -> f64 {
        p_s / (self.eta / self.sigma).sqrt()
    }
    pub fn energy(&self, h: f64) -> f64 {
        self.eta * h / self.sigma
    }
    pub fn energy_back(&self, h_s: f64) -> f64 {
        h_s * self.sigma / self.eta
    }
    pub fn angular_momentum(&self, p_phi: f64) -> f64 {
        self.eta.powf(1.5) * p_phi / self.sigma.sqrt()
    }
    pub fn angular_momentum_back(&self, c_z: f64) -> f64 {
        c_z * self.sigma.sqrt() / self.eta.powf(1.5)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corner_value_with_unit_sigma() {
        let p = PotentialParams::raw(1.0, 0.0).unwrap();
        let v = v_cartesian(&FieldPoint::new(1.0, 1.0, 1.0), &p);
        assert!((v - 1.5f64.sqrt()).abs() < 1e-15);
        assert_eq!(v_cartesian(&FieldPoint::new(0.0, 0.0, 0.0), &p), 0.0);
    }

    #[test]
    fn untrapped_state_rejected() {
        let t = crate::constants::MoleculeTable::builtin();
        let h2 = t.get("H2").unwrap();
        let s = RotorState::new(10, 0, 0.0).unwrap();
        let err = make_params(
            h2,
            &TrapSpec::default(),
            &s,
            &VibronicConstants::H2_GROUND,
            &PhysicalConstants::default(),
        );
        assert!(matches!(err, Err(PotentialError::Untrapped { .. })));
    }

    #[test]
    fn unit_radius_energy() {
        let p = PotentialParams::raw(1.0, 0.0).unwrap();
        assert_eq!(h_cylindrical(1.0, 0.0, 0.0, 0.0, 0.0, &p).unwrap(), 0.5);
        assert!(matches!(
            h_cylindrical(0.0, 0.1, 0.0, 0.0, 0.1, &p),
            Err(PotentialError::Centrifugal { .. })
        ));
    }

    #[test]
    fn gradient_singular_at_origin() {
        let p = PotentialParams::raw(1.0, 0.1).unwrap();
        assert!(grad_v_cartesian(&FieldPoint::new(0.0, 0.0, 0.0), &p).is_err());
    }

    #[test]
    fn rescaling_round_trips() {
        let p = PotentialParams::published(DeltaSource::Caption);
        let s = Rescaling::new(&p).unwrap();
        for v in [0.3, -1.7, 12.0] {
            assert!((s.length_back(s.length(v)) - v).abs() < 1e-15 * v.abs().max(1.0));
            assert!((s.time_back(s.time(v)) - v).abs() < 1e-13 * v.abs());
            assert!((s.momentum_back(s.momentum(v)) - v).abs() < 1e-13 * v.abs());
            assert!((s.energy_back(s.energy(v)) - v).abs() < 1e-13 * v.abs());
            assert!((s.angular_momentum_back(s.angular_momentum(v)) - v).abs() < 1e-13 * v.abs());
        }
    }

    #[test]
    fn delta_source_parses() {
        assert_eq!(
            "caption".parse::<DeltaSource>().unwrap(),
            DeltaSource::Caption
        );
        assert!("bogus".parse::<DeltaSource>().is_err());
    }
}
