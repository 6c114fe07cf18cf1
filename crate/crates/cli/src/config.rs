//! Experiment configuration: a JSON file merged under command-line flags.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use qphase::circular::Measure;
use qphase::states::{Basis, StateKind};
use qphase::trajectory::FeedbackPolicy;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum PolicyName {
    Adaptive,
    Nonadaptive,
    Fixed,
}

/// Every parameter any command reads. Unset fields fall back to command
/// defaults.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<StateKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub photons: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub photons_list: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis: Option<Basis>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub policy: Option<PolicyName>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixed_phase: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measure: Option<Measure>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi1_grid: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cap: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub marker_max: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dist: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub multiply_sin2: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("bad config {}: {e}", path.display())))
    }

    /// Fields set in `over` replace those in `self`.
    pub fn overlay(mut self, over: ExperimentConfig) -> Self {
        macro_rules! take {
            ($($f:ident),*) => { $( if over.$f.is_some() { self.$f = over.$f; } )* };
        }
        take!(
            kind,
            photons,
            photons_list,
            basis,
            policy,
            fixed_phase,
            measure,
            trials,
            seed,
            phi1_grid,
            cap,
            marker_max,
            dist,
            multiply_sin2,
            out
        );
        self
    }

    pub fn kind(&self) -> Result<StateKind, CliError> {
        self.kind
            .ok_or_else(|| CliError::Config("--kind is required".into()))
    }

    pub fn photons(&self) -> Result<usize, CliError> {
        self.photons
            .ok_or_else(|| CliError::Config("--photons is required".into()))
    }

    /// `photons_list`, else the single `photons`.
    pub fn photon_list(&self) -> Result<Vec<usize>, CliError> {
        match (&self.photons_list, self.photons) {
            (Some(list), _) if !list.is_empty() => Ok(list.clone()),
            (_, Some(n)) => Ok(vec![n]),
            _ => Err(CliError::Config(
                "--photons-list or --photons is required".into(),
            )),
        }
    }

    pub fn measure(&self) -> Measure {
        self.measure.unwrap_or(Measure::Holevo)
    }

    pub fn policy(&self) -> FeedbackPolicy {
        let measure = self.measure();
        match self.policy.unwrap_or(PolicyName::Adaptive) {
            PolicyName::Adaptive => FeedbackPolicy::adaptive(measure),
            PolicyName::Nonadaptive => FeedbackPolicy::nonadaptive(measure),
            PolicyName::Fixed => FeedbackPolicy::fixed(self.fixed_phase.unwrap_or(0.0), measure),
        }
    }
}

/// Flags shared by every command.
#[derive(Args, Debug, Default)]
pub struct CommonArgs {
    /// Input state.
    #[arg(long)]
    pub kind: Option<StateKind>,
    #[arg(long)]
    pub photons: Option<usize>,
    /// Comma-separated photon numbers.
    #[arg(long, value_delimiter = ',')]
    pub photons_list: Option<Vec<usize>>,
    /// Basis of the written state (state command).
    #[arg(long)]
    pub basis: Option<Basis>,
    #[arg(long, value_enum)]
    pub policy: Option<PolicyName>,
    /// Phase used by `--policy fixed`.
    #[arg(long, allow_negative_numbers = true)]
    pub fixed_phase: Option<f64>,
    #[arg(long)]
    pub measure: Option<Measure>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of initial phases averaged over by enumeration.
    #[arg(long)]
    pub phi1_grid: Option<usize>,
    /// Largest photon number enumeration accepts.
    #[arg(long)]
    pub cap: Option<usize>,
    /// Largest photon number given simulated markers (sweep-fig3).
    #[arg(long)]
    pub marker_max: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON config; flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Print the merged config as JSON and exit.
    #[arg(long)]
    pub print_config: bool,
}

impl CommonArgs {
    pub fn to_config(&self) -> ExperimentConfig {
        ExperimentConfig {
            kind: self.kind,
            photons: self.photons,
            photons_list: self.photons_list.clone(),
            basis: self.basis,
            policy: self.policy,
            fixed_phase: self.fixed_phase,
            measure: self.measure,
            trials: self.trials,
            seed: self.seed,
            phi1_grid: self.phi1_grid,
            cap: self.cap,
            marker_max: self.marker_max,
            dist: None,
            multiply_sin2: None,
            out: self.out.clone(),
        }
    }

    pub fn resolve(&self, extra: ExperimentConfig) -> Result<ExperimentConfig, CliError> {
        let base = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        Ok(base.overlay(self.to_config()).overlay(extra))
    }
}
