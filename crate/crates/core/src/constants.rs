//! Physical constants and the molecule preset table.
//!
//! Defaults are CODATA 2018 values. A TOML file with the same field names can
//! override any subset of them; the CLI reads its path from `QUADTRAP_CONSTANTS`.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::zeeman::MoleculeSpec;

/// Environment variable naming a TOML file that overrides [`PhysicalConstants`].
pub const CONSTANTS_ENV: &str = "QUADTRAP_CONSTANTS";

const MOLECULE_TABLE: &str = include_str!("../data/molecules.toml");

#[derive(Debug, Error)]
pub enum ConstantsError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed constants or preset file: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("constant `{0}` must be positive and finite")]
    NonPositive(&'static str),
    #[error("unknown molecule `{0}`")]
    UnknownMolecule(String),
    #[error("invalid molecule `{name}`: {reason}")]
    InvalidMolecule { name: String, reason: String },
}

/// SI constants used to build the dimensionless trap parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PhysicalConstants {
    /// Electron mass (kg).
    pub electron_mass: f64,
    /// Unified atomic mass unit (kg).
    pub atomic_mass_unit: f64,
    /// Bohr radius (m).
    pub bohr_radius: f64,
    /// Reduced Planck constant (J s).
    pub hbar: f64,
    /// Elementary charge (C).
    pub elementary_charge: f64,
    /// Atomic unit of energy expressed in kelvin.
    pub hartree_kelvin: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self {
            electron_mass: 9.109_383_701_5e-31,
            atomic_mass_unit: 1.660_539_066_60e-27,
            bohr_radius: 5.291_772_109_03e-11,
            hbar: 1.054_571_817e-34,
            elementary_charge: 1.602_176_634e-19,
            hartree_kelvin: 315_775.23,
        }
    }
}

impl PhysicalConstants {
    /// Electron mass in unified atomic mass units.
    pub fn electron_mass_u(&self) -> f64 {
        self.electron_mass / self.atomic_mass_unit
    }

    pub fn from_toml_str(text: &str) -> Result<Self, ConstantsError> {
        let c: PhysicalConstants = toml::from_str(text)?;
        c.validate()?;
        Ok(c)
    }

    pub fn from_file(path: &Path) -> Result<Self, ConstantsError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConstantsError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    /// Defaults, or the file named by `QUADTRAP_CONSTANTS` when it is set.
    pub fn from_env() -> Result<Self, ConstantsError> {
        match std::env::var_os(CONSTANTS_ENV) {
            Some(p) if !p.is_empty() => Self::from_file(Path::new(&p)),
            _ => Ok(Self::default()),
        }
    }

    fn validate(&self) -> Result<(), ConstantsError> {
        let fields = [
            ("electron_mass", self.electron_mass),
            ("atomic_mass_unit", self.atomic_mass_unit),
            ("bohr_radius", self.bohr_radius),
            ("hbar", self.hbar),
            ("elementary_charge", self.elementary_charge),
            ("hartree_kelvin", self.hartree_kelvin),
        ];
        for (name, v) in fields {
            if !(v.is_finite() && v > 0.0) {
                return Err(ConstantsError::NonPositive(name));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Deserialize)]
struct PresetEntry {
    mass_a: f64,
    mass_b: f64,
    z_a: u32,
    z_b: u32,
    #[serde(default)]
    n_electrons: Option<u32>,
    #[serde(default)]
    g_s: Option<f64>,
    #[serde(default)]
    rotational_constant: f64,
}

/// Named molecule presets, in file order of their names (sorted).
#[derive(Debug, Clone)]
pub struct MoleculeTable {
    entries: BTreeMap<String, MoleculeSpec>,
}

/// Order in which the bundled table lists its molecules.
pub const TABLE_ORDER: [&str; 7] = ["H2", "N2", "O2", "F2", "Cl2", "Br2", "I2"];

impl MoleculeTable {
    /// The bundled seven-molecule table.
    pub fn builtin() -> Self {
        Self::from_toml_str(MOLECULE_TABLE).expect("bundled molecule table is valid")
    }

    pub fn from_toml_str(text: &str) -> Result<Self, ConstantsError> {
        let raw: BTreeMap<String, PresetEntry> = toml::from_str(text)?;
        let mut entries = BTreeMap::new();
        for (name, e) in raw {
            let spec = MoleculeSpec {
                name: name.clone(),
                mass_a: e.mass_a,
                mass_b: e.mass_b,
                z_a: e.z_a,
                z_b: e.z_b,
                n_electrons: e.n_electrons.unwrap_or(e.z_a + e.z_b),
                g_s: e.g_s.unwrap_or(2.0),
                rotational_constant: e.rotational_constant,
            };
            spec.validate()
                .map_err(|reason| ConstantsError::InvalidMolecule {
                    name: name.clone(),
                    reason,
                })?;
            entries.insert(name, spec);
        }
        Ok(Self { entries })
    }

    pub fn from_file(path: &Path) -> Result<Self, ConstantsError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConstantsError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    pub fn get(&self, name: &str) -> Result<&MoleculeSpec, ConstantsError> {
        self.entries
            .get(name)
            .or_else(|| {
                self.entries
                    .iter()
                    .find(|(k, _)| k.eq_ignore_ascii_case(name))
                    .map(|(_, v)| v)
            })
            .ok_or_else(|| ConstantsError::UnknownMolecule(name.to_string()))
    }

    /// Molecules in the canonical table order first, then any extras by name.
    pub fn iter(&self) -> impl Iterator<Item = &MoleculeSpec> {
        let known = TABLE_ORDER.iter().filter_map(|n| self.entries.get(*n));
        let extra = self
            .entries
            .iter()
            .filter(|(n, _)| !TABLE_ORDER.contains(&n.as_str()))
            .map(|(_, m)| m);
        known.chain(extra)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}
