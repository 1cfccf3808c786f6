//! On-disk experiment configuration.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

/// One fully specified run. Together with the code version this determines
/// every output byte.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum ExperimentConfig {
    Simulate(SimulateConfig),
    Sweep(SweepConfig),
    Certify(CertifyConfig),
    Verify(VerifyConfig),
    Enumerate(EnumerateConfig),
}

impl ExperimentConfig {
    pub fn command(&self) -> &'static str {
        match self {
            ExperimentConfig::Simulate(_) => "simulate",
            ExperimentConfig::Sweep(_) => "sweep",
            ExperimentConfig::Certify(_) => "certify",
            ExperimentConfig::Verify(_) => "verify",
            ExperimentConfig::Enumerate(_) => "enumerate",
        }
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).context("serializing config")
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).context("parsing config")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        Self::from_toml(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_toml()?).with_context(|| format!("writing config {}", path.display()))
    }

    pub fn expect_command(self, name: &str) -> Result<Self> {
        if self.command() != name {
            bail!("config is for `{}`, not `{name}`", self.command());
        }
        Ok(self)
    }
}

/// TOML integers are signed 64-bit, so seeds are stored as decimal strings.
mod seed_text {
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(seed: &u64, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&seed.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<u64, D::Error> {
        String::deserialize(d)?.parse().map_err(D::Error::custom)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulateConfig {
    pub alpha: f64,
    pub m: usize,
    pub t_max: usize,
    pub replicas: u64,
    #[serde(with = "seed_text")]
    pub seed: u64,
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub alphas: Vec<f64>,
    pub m: usize,
    pub t_max: usize,
    pub replicas: u64,
    #[serde(with = "seed_text")]
    pub seed: u64,
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertifyConfig {
    /// Certify this α by searching the admissible region.
    pub alpha: Option<f64>,
    /// Bisect for the largest α certified at `p = φ, q = 1`.
    pub max: bool,
    /// Bisection tolerance for `max`.
    pub tol: f64,
    pub p_grid: usize,
    pub q_grid: usize,
    /// Re-validate a certificate file instead of issuing one.
    pub check: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    /// Seeded trials per α in the coupling battery.
    pub trials: u64,
    /// Monte Carlo replicas for the bound inequality.
    pub replicas: u64,
    #[serde(with = "seed_text")]
    pub seed: u64,
    /// Added to `M[1][1]` before the eigenvalue oracles run.
    pub inject_fault: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    FactorFree,
    SelfAvoiding,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum TableSource {
    /// Depth-first enumeration of the path family.
    Enumeration,
    /// The transition recurrence, corrected to the path definition.
    Recurrence,
    /// The transition equations with unshifted two-step terms.
    Uncorrected,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnumerateConfig {
    pub bonds: usize,
    pub family: Family,
    pub source: TableSource,
    pub out: Option<PathBuf>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_every_command() {
        let configs = [
            ExperimentConfig::Simulate(SimulateConfig {
                alpha: 0.1 + 0.2,
                m: 10,
                t_max: 20,
                replicas: 3,
                seed: u64::MAX,
                out: Some("a b/c.csv".into()),
            }),
            ExperimentConfig::Sweep(SweepConfig {
                alphas: vec![0.05, 1.0 / 3.0, 5e-324],
                m: 1,
                t_max: 0,
                replicas: 1,
                seed: 0,
                out: None,
            }),
            ExperimentConfig::Certify(CertifyConfig {
                alpha: None,
                max: true,
                tol: 1e-4,
                p_grid: 200,
                q_grid: 16,
                check: None,
                out: None,
            }),
            ExperimentConfig::Verify(VerifyConfig { trials: 10, replicas: 100, seed: 9, inject_fault: Some(1e-3) }),
            ExperimentConfig::Enumerate(EnumerateConfig {
                bonds: 7,
                family: Family::SelfAvoiding,
                source: TableSource::Uncorrected,
                out: None,
            }),
        ];
        for c in configs {
            let text = c.to_toml().unwrap();
            assert_eq!(ExperimentConfig::from_toml(&text).unwrap(), c, "{text}");
        }
    }

    #[test]
    fn wrong_command_rejected() {
        let c = ExperimentConfig::Verify(VerifyConfig { trials: 1, replicas: 1, seed: 1, inject_fault: None });
        assert!(c.clone().expect_command("verify").is_ok());
        assert!(c.expect_command("sweep").is_err());
    }
}
