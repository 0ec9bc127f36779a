use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::CureKinetics;
use crate::{Error, Result};

pub const PROPERTY_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToolMaterial {
    pub name: String,
    #[serde(rename = "conductivity_W_per_m_K")]
    pub conductivity: f64,
    #[serde(rename = "density_kg_per_m3")]
    pub density: f64,
    #[serde(rename = "specific_heat_J_per_kg_K")]
    pub specific_heat: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompositeMaterial {
    pub name: String,
    #[serde(rename = "conductivity_W_per_m_K")]
    pub conductivity: f64,
    #[serde(rename = "density_kg_per_m3")]
    pub density: f64,
    #[serde(rename = "specific_heat_J_per_kg_K")]
    pub specific_heat: f64,
    pub resin_volume_fraction: f64,
    #[serde(rename = "resin_density_kg_per_m3")]
    pub resin_density: f64,
    #[serde(rename = "heat_of_reaction_J_per_kg")]
    pub heat_of_reaction: f64,
}

/// Thermal properties of the tool and the composite part.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaterialProps {
    pub tool: ToolMaterial,
    pub part: CompositeMaterial,
}

impl MaterialProps {
    /// `a_t = k / (ρ·Cp)` of the tool, m²/s.
    pub fn tool_diffusivity(&self) -> f64 {
        self.tool.conductivity / (self.tool.density * self.tool.specific_heat)
    }

    /// `a_c = k / (ρ·Cp)` of the part, m²/s.
    pub fn part_diffusivity(&self) -> f64 {
        self.part.conductivity / (self.part.density * self.part.specific_heat)
    }

    /// `b_c = v_r·ρ_r·H_r / (ρ·Cp)`, the temperature rise per unit degree of cure, K.
    pub fn heat_generation(&self) -> f64 {
        self.part.resin_volume_fraction * self.part.resin_density * self.part.heat_of_reaction
            / (self.part.density * self.part.specific_heat)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("tool conductivity", self.tool.conductivity),
            ("tool density", self.tool.density),
            ("tool specific heat", self.tool.specific_heat),
            ("part conductivity", self.part.conductivity),
            ("part density", self.part.density),
            ("part specific heat", self.part.specific_heat),
            ("resin density", self.part.resin_density),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::config(format!("{name} must be positive, got {v}")));
            }
        }
        let vr = self.part.resin_volume_fraction;
        if !(0.0..=1.0).contains(&vr) {
            return Err(Error::config(format!("resin volume fraction must lie in [0, 1], got {vr}")));
        }
        let hr = self.part.heat_of_reaction;
        if !(hr.is_finite() && hr >= 0.0) {
            return Err(Error::config(format!("heat of reaction must be nonnegative, got {hr}")));
        }
        Ok(())
    }
}

/// Versioned material and kinetics property file.
///
/// The thermal property defaults are literature placeholders for Invar 36 and
/// AS4/8552; kinetics defaults are the published 8552 constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyFile {
    pub schema_version: u32,
    pub tool: ToolMaterial,
    pub part: CompositeMaterial,
    pub kinetics: CureKinetics,
}

impl Default for PropertyFile {
    fn default() -> Self {
        PropertyFile {
            schema_version: PROPERTY_SCHEMA_VERSION,
            tool: ToolMaterial {
                name: "Invar 36".into(),
                conductivity: 13.0,
                density: 8100.0,
                specific_heat: 515.0,
            },
            part: CompositeMaterial {
                name: "AS4/8552".into(),
                conductivity: 0.6,
                density: 1580.0,
                specific_heat: 1000.0,
                resin_volume_fraction: 0.426,
                resin_density: 1300.0,
                heat_of_reaction: 574.0e3,
            },
            kinetics: CureKinetics::default(),
        }
    }
}

impl PropertyFile {
    pub fn materials(&self) -> MaterialProps {
        MaterialProps {
            tool: self.tool.clone(),
            part: self.part.clone(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != PROPERTY_SCHEMA_VERSION {
            return Err(Error::config(format!(
                "property file schema version {} is not supported (expected {PROPERTY_SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        self.materials().validate()?;
        self.kinetics.validate()
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let file: PropertyFile = toml::from_str(text).map_err(|e| Error::Parse {
            path: "<properties>".into(),
            message: e.to_string(),
        })?;
        file.validate()?;
        Ok(file)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Parse { message, .. } => Error::Parse {
                path: path.to_path_buf(),
                message,
            },
            other => other,
        })
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("property file serializes")
    }

    /// SHA-256 of the canonical serialization; formatting of the source file
    /// does not affect it.
    pub fn content_hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_toml_string().as_bytes()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_coefficients() {
        let p = PropertyFile::default().materials();
        assert!((p.tool_diffusivity() - 13.0 / (8100.0 * 515.0)).abs() < 1e-20);
        let b = 0.426 * 1300.0 * 574.0e3 / (1580.0 * 1000.0);
        assert!((p.heat_generation() - b).abs() < 1e-12);
    }

    #[test]
    fn toml_round_trip_preserves_hash() {
        let f = PropertyFile::default();
        let text = f.to_toml_string();
        assert!(text.contains("conductivity_W_per_m_K"));
        let back = PropertyFile::from_toml_str(&text).unwrap();
        assert_eq!(back, f);
        assert_eq!(back.content_hash(), f.content_hash());
    }

    #[test]
    fn rejects_wrong_schema_and_bad_values() {
        let mut f = PropertyFile::default();
        f.schema_version = 7;
        assert!(PropertyFile::from_toml_str(&f.to_toml_string()).is_err());
        let mut f = PropertyFile::default();
        f.tool.conductivity = 0.0;
        assert!(f.validate().is_err());
    }

    #[test]
    fn shipped_default_file_parses() {
        let text = include_str!("../../../../config/properties.toml");
        let f = PropertyFile::from_toml_str(text).unwrap();
        assert_eq!(f, PropertyFile::default());
    }
}
