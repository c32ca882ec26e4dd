//! Optional TOML configuration. Command-line flags take precedence.
//!
//! ```toml
//! [fixpoint]
//! tolerance = 1e-12
//! max_iterations = 200
//!
//! [frontier]
//! tol_rel = 1e-3
//!
//! [analyze]
//! fit_window = [100, 1000]
//! a_inf = 0.0
//! b_inf = 0.5
//!
//! [output]
//! format = "json"
//! ```

use std::path::Path;

use serde::Deserialize;

use crate::error::CliError;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default)]
    pub fixpoint: FixpointSection,
    #[serde(default)]
    pub frontier: FrontierSection,
    #[serde(default)]
    pub analyze: AnalyzeSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixpointSection {
    pub tolerance: Option<f64>,
    pub max_iterations: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrontierSection {
    pub tol_rel: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalyzeSection {
    pub fit_window: Option<[usize; 2]>,
    pub a_inf: Option<f64>,
    pub b_inf: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub format: Option<FormatName>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum FormatName {
    Text,
    Json,
}

impl Config {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else { return Ok(Self::default()) };
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }
}
