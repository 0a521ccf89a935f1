use std::path::PathBuf;

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandName {
    Vertices,
    Facets,
    CheckW,
    Optimize,
    Boundary,
    FacetReport,
}

impl CommandName {
    pub fn dir_name(self) -> &'static str {
        match self {
            CommandName::Vertices => "vertices",
            CommandName::Facets => "facets",
            CommandName::CheckW => "check-w",
            CommandName::Optimize => "optimize",
            CommandName::Boundary => "boundary",
            CommandName::FacetReport => "facet-report",
        }
    }
}

/// One job, either assembled from command-line flags or read from a JSON file.
/// The same structure is echoed to `config.json` next to the outputs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    pub command: CommandName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dims: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub objective: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub restarts: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angles: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inequality: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alice: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bob: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

impl JobConfig {
    pub fn new(command: CommandName) -> Self {
        JobConfig {
            command,
            scenario: None,
            dims: None,
            objective: None,
            restarts: None,
            seed: None,
            tol: None,
            angles: None,
            threads: None,
            points: None,
            inequality: None,
            w: None,
            alice: None,
            bob: None,
            out: None,
            label: None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}
