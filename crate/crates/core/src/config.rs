//! Run configuration: where the potential parameters come from, integrator
//! tolerance overrides, and the flat key-value parameter file.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constants::{ConstantsError, MoleculeTable, PhysicalConstants};
use crate::dynamics::{IntegrateOptions, MIN_REL_TOL};
use crate::potential::{
    make_params, DeltaSource, PotentialError, PotentialParams, VibronicConstants,
};
use crate::zeeman::{RotorState, TrapSpec};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error(transparent)]
    Constants(#[from] ConstantsError),
    #[error(transparent)]
    Potential(#[from] PotentialError),
    #[error("{0}")]
    Invalid(String),
    #[error("malformed parameter file: {0}")]
    Parse(#[from] toml::de::Error),
}

/// Where sigma and delta come from. Preset and raw are mutually exclusive.
#[derive(Debug, Clone, PartialEq)]
pub enum ParamSource {
    /// Published sigma with the delta chosen by the delta source.
    Published,
    /// A molecule preset and rotor state; sigma from the Zeeman coefficients.
    Molecule {
        name: String,
        state: RotorState,
        trap: TrapSpec,
    },
    Raw {
        sigma: f64,
        delta: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: ParamSource,
    pub delta_source: DeltaSource,
    pub rel_tol: Option<f64>,
    pub abs_tol: Option<f64>,
    pub threads: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            params: ParamSource::Published,
            delta_source: DeltaSource::Caption,
            rel_tol: None,
            abs_tol: None,
            threads: None,
        }
    }
}

impl RunConfig {
    pub fn resolve_params(
        &self,
        consts: &PhysicalConstants,
    ) -> Result<PotentialParams, ConfigError> {
        match &self.params {
            ParamSource::Published => Ok(PotentialParams::published(self.delta_source)),
            ParamSource::Raw { sigma, delta } => Ok(PotentialParams::raw(*sigma, *delta)?),
            ParamSource::Molecule { name, state, trap } => {
                let table = MoleculeTable::builtin();
                let mol = table.get(name)?;
                if self.delta_source == DeltaSource::Computed && mol.name != "H2" {
                    return Err(ConfigError::Invalid(format!(
                        "delta can only be computed for H2 (no vibronic constants for {})",
                        mol.name
                    )));
                }
                let p = make_params(mol, trap, state, &VibronicConstants::H2_GROUND, consts)?;
                Ok(p.with_delta(self.delta_source, p.delta)?)
            }
        }
    }

    /// Default integrator options with the tolerance overrides applied.
    pub fn integrate_options(&self) -> Result<IntegrateOptions, ConfigError> {
        let mut o = IntegrateOptions::default();
        if let Some(t) = self.rel_tol {
            o.stepper.rel_tol = t;
        }
        if let Some(t) = self.abs_tol {
            o.stepper.abs_tol = t;
        }
        let (rel, abs) = (o.stepper.rel_tol, o.stepper.abs_tol);
        if !(MIN_REL_TOL..=1e-3).contains(&rel) {
            return Err(ConfigError::Invalid(format!(
                "rel-tol must lie in [{MIN_REL_TOL:e}, 1e-3], got {rel}"
            )));
        }
        if !(abs > 0.0 && abs <= 1e-3) {
            return Err(ConfigError::Invalid(format!(
                "abs-tol must lie in (0, 1e-3], got {abs}"
            )));
        }
        Ok(o)
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FlatParams {
    sigma: f64,
    delta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    eta: Option<f64>,
    #[serde(default = "raw_source")]
    delta_source: DeltaSource,
}

fn raw_source() -> DeltaSource {
    DeltaSource::Raw
}

/// `sigma`, `delta`, `eta`, `delta_source` as flat `key = value` lines.
pub fn params_to_kv(p: &PotentialParams) -> String {
    let flat = FlatParams {
        sigma: p.sigma,
        delta: p.delta,
        eta: Some(p.eta),
        delta_source: p.delta_source,
    };
    toml::to_string(&flat).expect("flat table serialises")
}

/// Inverse of [`params_to_kv`]. `eta`, when present, must equal `delta / sigma`.
pub fn params_from_kv(text: &str) -> Result<PotentialParams, ConfigError> {
    let flat: FlatParams = toml::from_str(text)?;
    let mut p = PotentialParams::raw(flat.sigma, flat.delta)?;
    if let Some(eta) = flat.eta {
        if (eta - p.eta).abs() > 1e-12 * p.eta.abs().max(1e-300) {
            return Err(ConfigError::Invalid(format!(
                "eta = {eta} disagrees with delta/sigma = {}",
                p.eta
            )));
        }
    }
    p.delta_source = flat.delta_source;
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kv_round_trip() {
        let p = PotentialParams::published(DeltaSource::Text);
        let text = params_to_kv(&p);
        assert!(text.contains("delta_source = \"text\""));
        let q = params_from_kv(&text).unwrap();
        assert_eq!(
            (q.sigma, q.delta, q.eta, q.delta_source),
            (p.sigma, p.delta, p.eta, p.delta_source)
        );
    }

    #[test]
    fn kv_rejects_inconsistent_eta() {
        assert!(params_from_kv("sigma = 1.0\ndelta = 0.5\neta = 0.4\n").is_err());
        assert!(params_from_kv("sigma = 1.0\ndelta = 0.5\nfoo = 1\n").is_err());
        let p = params_from_kv("sigma = 2.0\ndelta = 0.5\n").unwrap();
        assert_eq!((p.eta, p.delta_source), (0.25, DeltaSource::Raw));
    }

    #[test]
    fn molecule_source_replaces_delta() {
        let cfg = RunConfig {
            params: ParamSource::Molecule {
                name: "H2".into(),
                state: RotorState {
                    j: 10,
                    m: -10,
                    varpi: 0.5,
                },
                trap: TrapSpec::default(),
            },
            ..RunConfig::default()
        };
        let p = cfg.resolve_params(&PhysicalConstants::default()).unwrap();
        assert!((p.sigma - 0.502723).abs() < 1e-6);
        assert_eq!(p.delta, crate::potential::PUBLISHED_DELTA_CAPTION);
        let other = RunConfig {
            params: ParamSource::Molecule {
                name: "N2".into(),
                state: RotorState {
                    j: 10,
                    m: -10,
                    varpi: 0.5,
                },
                trap: TrapSpec::default(),
            },
            delta_source: DeltaSource::Computed,
            ..RunConfig::default()
        };
        assert!(matches!(
            other.resolve_params(&PhysicalConstants::default()),
            Err(ConfigError::Invalid(_))
        ));
    }

    #[test]
    fn tolerance_overrides_are_checked() {
        let cfg = RunConfig {
            rel_tol: Some(1e-9),
            ..RunConfig::default()
        };
        assert_eq!(cfg.integrate_options().unwrap().stepper.rel_tol, 1e-9);
        let bad = RunConfig {
            abs_tol: Some(0.1),
            ..RunConfig::default()
        };
        assert!(bad.integrate_options().is_err());
        let tiny = RunConfig {
            rel_tol: Some(1e-20),
            ..RunConfig::default()
        };
        assert!(tiny.integrate_options().is_err());
    }
}
