//! Run configuration: a TOML file, overridden field by field by flags.

use std::path::Path;

use serde::{Deserialize, Serialize};
use shellkp::{make_interaction, Geometry, Interaction};

use crate::error::CliError;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu: Option<u32>,
    #[serde(default)]
    pub interaction: InteractionConfig,
    #[serde(default)]
    pub geometry: GeometryConfig,
    #[serde(default)]
    pub bands: BandsConfig,
    #[serde(default)]
    pub spectrum_map: SpectrumMapConfig,
    #[serde(default)]
    pub transfer_norm: TransferNormConfig,
    #[serde(default)]
    pub gap_eigs: GapEigsConfig,
    #[serde(default)]
    pub welsh: WelshConfig,
    #[serde(default)]
    pub m_function: MFunctionConfig,
    #[serde(default)]
    pub oracle_check: OracleCheckConfig,
}

/// Missing entries default to the free interaction `α = β = 0`, `γ = δ = 1`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InteractionConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chi: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub offset: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count_hint: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BandsConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_bands: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub e_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub e_max: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumMapConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub e_cutoff: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l_min: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l_max: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_max: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransferNormConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub energy: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub periods: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GapEigsConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gap_index: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l_min: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l_max: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_max: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WelshConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_wanted: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_max: Option<f64>,
    /// Optional CSV path for the Kepler trace.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MFunctionConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub energy: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilons: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_max: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleCheckConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub configs: Option<usize>,
    /// Coarse grid step in units of `d`; the fine grid uses half of it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::config(format!("bad config: {}", e.message())))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always serializable")
    }

    pub fn interaction(&self) -> Result<Interaction, CliError> {
        let i = &self.interaction;
        Ok(make_interaction(
            i.alpha.unwrap_or(0.0),
            i.beta.unwrap_or(0.0),
            i.gamma.unwrap_or(1.0),
            i.delta.unwrap_or(1.0),
            i.chi.unwrap_or(0.0),
        )?)
    }

    pub fn geometry(&self) -> Result<Geometry, CliError> {
        let g = &self.geometry;
        let d = g.d.unwrap_or(1.0);
        Ok(Geometry::with_offset(d, g.offset.unwrap_or(d / 2.0), g.count_hint.unwrap_or(64))?)
    }

    pub fn nu_or(&self, default: u32) -> Result<u32, CliError> {
        let nu = self.nu.unwrap_or(default);
        if nu < 2 {
            return Err(CliError::config(format!("nu = {nu}: the dimension must satisfy nu >= 2")));
        }
        Ok(nu)
    }
}
