use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponents::{GammaKind, InputDistribution, DEFAULT_RHO_MAX};
use crate::expurgation::EvalMethod;

/// Which rate enters the threshold `E_ex − δ_n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RateConvention {
    /// The configured rate.
    Nominal,
    /// `(1/n)·log2(M'_n − 1)`: the union over the `M'_n − 1` competitors of
    /// a codeword sets the rate term, so the per-codeword guarantee holds
    /// exactly at finite n.
    #[default]
    Mother,
}

/// Codeword distribution of the mother code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CodeKind {
    /// Symbols i.i.d. from `q`.
    #[default]
    Iid,
    /// Constant composition nearest to `n·q`.
    Cc,
}

/// Size of the mother code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MotherSize {
    /// `⌈M_n(1+ε)⌉`.
    #[default]
    Eps,
    /// `2M_n − 1`, the classical worst-half expurgation.
    Double,
}

fn default_rho_max() -> f64 {
    DEFAULT_RHO_MAX
}

/// Everything needed to reproduce one experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Channel file; informational when the channel is supplied directly.
    #[serde(default)]
    pub channel_path: PathBuf,
    pub q: InputDistribution,
    pub rate: f64,
    pub eps: f64,
    pub eps1: f64,
    #[serde(default)]
    pub gamma_kind: GammaKind,
    pub n_grid: Vec<usize>,
    pub trials: u64,
    pub master_seed: u64,
    #[serde(default)]
    pub method: EvalMethod,
    #[serde(default = "default_rho_max")]
    pub rho_max: f64,
    #[serde(default)]
    pub rate_convention: RateConvention,
    #[serde(default)]
    pub kind: CodeKind,
    #[serde(default)]
    pub mother_size: MotherSize,
}

impl ExperimentConfig {
    /// Checks the cross-field invariants.
    pub fn validate(&self) -> Result<()> {
        let finite = [self.rate, self.eps, self.eps1, self.rho_max]
            .iter()
            .all(|x| x.is_finite());
        if !finite {
            return Err(Error::invalid(
                "config",
                "rate, eps, eps1 and rho_max must be finite",
            ));
        }
        if !(self.eps1 > 0.0 && self.eps1 < self.eps) {
            return Err(Error::invalid(
                "config",
                format!(
                    "need 0 < eps1 < eps, got eps = {}, eps1 = {}",
                    self.eps, self.eps1
                ),
            ));
        }
        if self.trials == 0 {
            return Err(Error::invalid("config", "trials must be at least 1"));
        }
        if self.n_grid.is_empty() {
            return Err(Error::invalid("config", "n_grid is empty"));
        }
        if self.n_grid[0] == 0 || self.n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid(
                "config",
                "n_grid must hold positive, strictly ascending block lengths",
            ));
        }
        if self.rate < 0.0 {
            return Err(Error::invalid("config", "rate must be nonnegative"));
        }
        if self.rho_max < 1.0 {
            return Err(Error::RhoMaxTooSmall(self.rho_max));
        }
        Ok(())
    }

    /// Parses and validates a JSON configuration.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialization is infallible")
    }
}
