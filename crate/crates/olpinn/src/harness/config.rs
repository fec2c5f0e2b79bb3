//! Experiment configuration: TOML schema with hard failure on unknown keys.

use crate::error::{Error, Result};
use crate::problems::SamplingStrategy;
use serde::Deserialize;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Benchmark {
    DiffusionReaction,
    BurgersCase1,
    BurgersCase2,
}

impl Benchmark {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "dr" | "diffusion-reaction" => Ok(Benchmark::DiffusionReaction),
            "burgers-case1" => Ok(Benchmark::BurgersCase1),
            "burgers-case2" => Ok(Benchmark::BurgersCase2),
            other => Err(Error::Config(format!("unknown benchmark '{other}'"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Benchmark::DiffusionReaction => "dr",
            Benchmark::BurgersCase1 => "burgers-case1",
            Benchmark::BurgersCase2 => "burgers-case2",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    VanillaPinn,
    DeeponetExtrapolation,
    Olpinn,
}

impl Variant {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "vanilla-pinn" => Ok(Variant::VanillaPinn),
            "deeponet-extrapolation" => Ok(Variant::DeeponetExtrapolation),
            "olpinn" => Ok(Variant::Olpinn),
            other => Err(Error::Config(format!("unknown model variant '{other}'"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Variant::VanillaPinn => "vanilla-pinn",
            Variant::DeeponetExtrapolation => "deeponet-extrapolation",
            Variant::Olpinn => "olpinn",
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    experiment: RawExperiment,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawExperiment {
    benchmark: String,
    variant: String,
    parameter: f64,
    #[serde(default)]
    include_bc: Option<bool>,
    #[serde(default)]
    strategy: Option<String>,
    seeds: Vec<u64>,
    #[serde(default)]
    epochs: Option<usize>,
    #[serde(default)]
    learning_rate: Option<f64>,
    #[serde(default)]
    pretrained_checkpoint: Option<PathBuf>,
    #[serde(default)]
    out_dir: Option<PathBuf>,
    #[serde(default)]
    reference_file: Option<PathBuf>,
    #[serde(default)]
    weights: Option<RawWeights>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawWeights {
    w1: f64,
    w2: f64,
    w3: f64,
}

/// Validated experiment configuration.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub benchmark: Benchmark,
    pub variant: Variant,
    /// Benchmark parameter: `a` for the diffusion-reaction family, `nu` for
    /// Burgers.
    pub parameter: f64,
    pub include_bc: bool,
    pub strategy: SamplingStrategy,
    pub seeds: Vec<u64>,
    pub epochs: Option<usize>,
    pub learning_rate: Option<f64>,
    pub pretrained_checkpoint: Option<PathBuf>,
    pub out_dir: Option<PathBuf>,
    pub reference_file: Option<PathBuf>,
    pub weights: Option<(f64, f64, f64)>,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: RawFile =
            toml::from_str(text).map_err(|e| Error::Config(format!("config parse: {e}")))?;
        let e = raw.experiment;
        let benchmark = Benchmark::parse(&e.benchmark)?;
        let variant = Variant::parse(&e.variant)?;
        let strategy = match e.strategy.as_deref() {
            None => SamplingStrategy::UniformGrid,
            Some(s) => SamplingStrategy::parse(s).map_err(|err| Error::Config(err.to_string()))?,
        };
        if e.seeds.is_empty() {
            return Err(Error::Config("at least one seed is required".into()));
        }
        let weights = match (&e.weights, variant) {
            (Some(w), Variant::Olpinn) => {
                if w.w1 != w.w2 {
                    return Err(Error::Config(format!(
                        "w1 and w2 must be equal, got {} and {}",
                        w.w1, w.w2
                    )));
                }
                if w.w1 <= 0.0 || w.w3 <= 0.0 {
                    return Err(Error::Config("weights must be positive".into()));
                }
                Some((w.w1, w.w2, w.w3))
            }
            (Some(_), other) => {
                return Err(Error::Config(format!(
                    "weights are only valid for the olpinn variant, not {}",
                    other.name()
                )))
            }
            (None, _) => None,
        };
        if matches!(variant, Variant::Olpinn | Variant::DeeponetExtrapolation)
            && e.pretrained_checkpoint.is_none()
        {
            return Err(Error::Config(format!(
                "variant {} requires pretrained_checkpoint",
                variant.name()
            )));
        }
        Ok(ExperimentConfig {
            benchmark,
            variant,
            parameter: e.parameter,
            include_bc: e.include_bc.unwrap_or(true),
            strategy,
            seeds: e.seeds,
            epochs: e.epochs,
            learning_rate: e.learning_rate,
            pretrained_checkpoint: e.pretrained_checkpoint,
            out_dir: e.out_dir,
            reference_file: e.reference_file,
            weights,
        })
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }
}

/// Pretraining configuration file.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPretrainFile {
    pretrain: RawPretrain,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPretrain {
    benchmark: String,
    #[serde(default)]
    epochs: Option<usize>,
    #[serde(default)]
    learning_rate: Option<f64>,
    #[serde(default)]
    seed: Option<u64>,
    checkpoint: PathBuf,
    #[serde(default)]
    export_dataset: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct PretrainCommandConfig {
    pub benchmark: Benchmark,
    pub epochs: Option<usize>,
    pub learning_rate: Option<f64>,
    pub seed: u64,
    pub checkpoint: PathBuf,
    pub export_dataset: Option<PathBuf>,
}

impl PretrainCommandConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: RawPretrainFile =
            toml::from_str(text).map_err(|e| Error::Config(format!("config parse: {e}")))?;
        Ok(PretrainCommandConfig {
            benchmark: Benchmark::parse(&raw.pretrain.benchmark)?,
            epochs: raw.pretrain.epochs,
            learning_rate: raw.pretrain.learning_rate,
            seed: raw.pretrain.seed.unwrap_or(0),
            checkpoint: raw.pretrain.checkpoint,
            export_dataset: raw.pretrain.export_dataset,
        })
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOOD: &str = r#"
[experiment]
benchmark = "dr"
variant = "olpinn"
parameter = 5.0
seeds = [0, 1, 2]
pretrained_checkpoint = "ckpt/dr.bin"

[experiment.weights]
w1 = 1.0
w2 = 1.0
w3 = 200.0
"#;

    #[test]
    fn parses_valid_config() {
        let cfg = ExperimentConfig::from_toml_str(GOOD).unwrap();
        assert_eq!(cfg.benchmark, Benchmark::DiffusionReaction);
        assert_eq!(cfg.variant, Variant::Olpinn);
        assert_eq!(cfg.weights, Some((1.0, 1.0, 200.0)));
        assert!(cfg.include_bc);
    }

    #[test]
    fn unknown_keys_are_fatal() {
        let bad = GOOD.replace("parameter = 5.0", "parameter = 5.0\nmystery_knob = 3");
        assert!(ExperimentConfig::from_toml_str(&bad).is_err());
    }

    #[test]
    fn unequal_w1_w2_rejected_at_load() {
        let bad = GOOD.replace("w2 = 1.0", "w2 = 2.0");
        let err = ExperimentConfig::from_toml_str(&bad).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn weights_only_for_olpinn() {
        let bad = GOOD.replace("variant = \"olpinn\"", "variant = \"vanilla-pinn\"");
        assert!(ExperimentConfig::from_toml_str(&bad).is_err());
    }

    #[test]
    fn olpinn_requires_checkpoint() {
        let bad = GOOD.replace("pretrained_checkpoint = \"ckpt/dr.bin\"\n", "");
        assert!(ExperimentConfig::from_toml_str(&bad).is_err());
    }
}
