//! Experiment configuration: everything a run needs, serializable so that a
//! config written next to a report reproduces it exactly.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

/// Experiment identifiers, one per subcommand.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Classify,
    Dmu,
    Norms,
    KernelAsymptotics,
    Lacunary,
    Counterexample,
    VerifyThm12,
    VerifyThm13,
    VerifyProp23,
    VerifyPartition,
    VerifyMultiplier,
}

impl Experiment {
    pub fn id(self) -> &'static str {
        match self {
            Experiment::Classify => "classify",
            Experiment::Dmu => "dmu",
            Experiment::Norms => "norms",
            Experiment::KernelAsymptotics => "kernel-asymptotics",
            Experiment::Lacunary => "lacunary",
            Experiment::Counterexample => "counterexample",
            Experiment::VerifyThm12 => "verify-thm12",
            Experiment::VerifyThm13 => "verify-thm13",
            Experiment::VerifyProp23 => "verify-prop23",
            Experiment::VerifyPartition => "verify-partition",
            Experiment::VerifyMultiplier => "verify-multiplier",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    #[default]
    Json,
}

/// One experiment run, fully determined by this value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    /// Weight specs for subcommands taking one or more weights.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub weights: Vec<String>,
    /// Kernel weight of a (kernel, derivative) pair.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<String>,
    /// Derivative weight of a (kernel, derivative) pair.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<String>,
    /// Power-family derivative order for `dmu` without a weight.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classical_beta: Option<f64>,
    /// Coefficient CSV path (`n,re,im`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coeffs: Option<PathBuf>,
    /// Series truncation for kernel work.
    pub trunc: usize,
    /// Radial grid depth in octaves of boundary distance; None keeps the
    /// subcommand default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_depth: Option<u32>,
    /// Corpus seed for randomized suites.
    pub seed: u64,
    /// Lacunary depth.
    pub nmax: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_round_trips_through_json() {
        let config = ExperimentConfig {
            experiment: Experiment::KernelAsymptotics,
            weights: vec!["lograpid:alpha=2".into()],
            omega: Some("constant".into()),
            mu: Some("standard:beta=2".into()),
            classical_beta: Some(0.5),
            coeffs: Some(PathBuf::from("coeffs.csv")),
            trunc: 4096,
            grid_depth: Some(8),
            seed: 42,
            nmax: 20,
            out: Some(PathBuf::from("report.csv")),
            format: Some(Format::Csv),
        };
        let text = serde_json::to_string(&config).unwrap();
        let back: ExperimentConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back, config);
    }

    #[test]
    fn experiment_ids_match_serde_names() {
        for e in [
            Experiment::Classify,
            Experiment::Dmu,
            Experiment::Norms,
            Experiment::KernelAsymptotics,
            Experiment::Lacunary,
            Experiment::Counterexample,
            Experiment::VerifyThm12,
            Experiment::VerifyThm13,
            Experiment::VerifyProp23,
            Experiment::VerifyPartition,
            Experiment::VerifyMultiplier,
        ] {
            let json = serde_json::to_string(&e).unwrap();
            assert_eq!(json, format!("\"{}\"", e.id()));
        }
    }
}
