//! Declarative pipeline configuration. A TOML file supplies the base values,
//! command-line flags override them, and the merged result is written into
//! every artifact.

use std::path::{Path, PathBuf};

use anyhow::Context;
use ngramdep::conll::Punctuation;
use ngramdep::parser::{FeatureGroups, LossType, Resources, TrainConfig};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::UsageError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct PipelineConfig {
    pub seed: u64,
    pub jobs: Option<usize>,
    pub strict: bool,
    pub train: TrainSection,
    pub features: FeatureSection,
    pub tables: TableSection,
    pub scan: ScanSection,
    pub eval: EvalSection,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            seed: 1,
            jobs: None,
            strict: false,
            train: TrainSection::default(),
            features: FeatureSection::default(),
            tables: TableSection::default(),
            scan: ScanSection::default(),
            eval: EvalSection::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct TrainSection {
    pub order: u8,
    pub training_k: usize,
    pub iters: usize,
    pub loss_type: String,
    pub single_root: bool,
    /// "f64" or "f32".
    pub scalar: String,
    /// Punctuation tags; empty means "form is all punctuation".
    pub punct_tags: Vec<String>,
}

impl Default for TrainSection {
    fn default() -> Self {
        TrainSection {
            order: 2,
            training_k: 5,
            iters: 10,
            loss_type: "nopunc".into(),
            single_root: true,
            scalar: "f64".into(),
            punct_tags: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct FeatureSection {
    pub groups: Vec<String>,
}

impl Default for FeatureSection {
    fn default() -> Self {
        FeatureSection {
            groups: vec!["baseline".into()],
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct TableSection {
    pub surface: Option<PathBuf>,
    pub surface_paraphrase: Option<PathBuf>,
    pub syntactic: Option<PathBuf>,
    pub syntactic_words: Option<PathBuf>,
    pub syntactic_tags: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct ScanSection {
    /// Minimum count kept after merging; the syntactic default is 10,000.
    pub cutoff: Option<u64>,
    /// "role" or "any".
    pub unary_mode: String,
    pub k_mid: usize,
    pub k_edge: usize,
}

impl Default for ScanSection {
    fn default() -> Self {
        ScanSection {
            cutoff: None,
            unary_mode: "role".into(),
            k_mid: ngramdep::paraphrase::TOP_MID,
            k_edge: ngramdep::paraphrase::TOP_EDGE,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct EvalSection {
    pub include_punct: bool,
    pub resamples: usize,
    pub alpha: f64,
    /// "half-up" or "two-stage".
    pub rounding: String,
}

impl Default for EvalSection {
    fn default() -> Self {
        EvalSection {
            include_punct: false,
            resamples: ngramdep::eval::DEFAULT_RESAMPLES,
            alpha: ngramdep::eval::DEFAULT_ALPHA,
            rounding: "half-up".into(),
        }
    }
}

impl PipelineConfig {
    pub fn load(path: Option<&Path>) -> anyhow::Result<Self> {
        let Some(path) = path else {
            return Ok(PipelineConfig::default());
        };
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        toml::from_str(&text).map_err(|e| UsageError(format!("{}: {e}", path.display())).into())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    pub fn from_toml(text: &str) -> anyhow::Result<Self> {
        toml::from_str(text).map_err(|e| UsageError(e.to_string()).into())
    }

    /// Short hex digest of the effective configuration.
    pub fn digest(&self) -> String {
        let hash = Sha256::digest(self.to_toml().as_bytes());
        hash.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    pub fn punctuation(&self) -> Punctuation {
        if self.train.punct_tags.is_empty() {
            Punctuation::by_form()
        } else {
            Punctuation::by_tags(self.train.punct_tags.iter().map(String::as_str))
        }
    }

    pub fn groups(&self) -> anyhow::Result<FeatureGroups> {
        let mut g = FeatureGroups::none();
        for name in &self.features.groups {
            if !g.set(name, true) {
                let known = FeatureGroups::NAMES.join(", ");
                return Err(UsageError(format!("unknown feature group {name:?}; known groups: {known}")).into());
            }
        }
        Ok(g)
    }

    pub fn train_config(&self) -> anyhow::Result<TrainConfig> {
        let loss: LossType =
            self.train.loss_type.parse().map_err(|e: ngramdep::ParserError| UsageError(e.to_string()))?;
        let config = TrainConfig {
            order: self.train.order,
            k: self.train.training_k,
            iters: self.train.iters,
            loss,
            single_root: self.train.single_root,
            punctuation: self.punctuation(),
            groups: self.groups()?,
        };
        config.validate().map_err(|e| UsageError(e.to_string()))?;
        if !matches!(self.train.scalar.as_str(), "f32" | "f64") {
            return Err(UsageError(format!("scalar must be f32 or f64, got {}", self.train.scalar)).into());
        }
        Ok(config)
    }

    /// Fail before any work when an enabled group lacks its table path.
    pub fn check_table_paths(&self, groups: &FeatureGroups) -> anyhow::Result<()> {
        let t = &self.tables;
        let need = |on: bool, path: &Option<PathBuf>, what: &str| -> anyhow::Result<()> {
            if on && path.is_none() {
                return Err(UsageError(format!("enabled feature groups need the {what} path")).into());
            }
            Ok(())
        };
        need(groups.surface_affinity || groups.surface_second_order, &t.surface, "surface table")?;
        need(
            groups.surface_paraphrase || groups.surface_second_order,
            &t.surface_paraphrase,
            "surface paraphrase",
        )?;
        need(groups.syntactic_first_order || groups.syntactic_second_order, &t.syntactic, "syntactic table")?;
        need(groups.syntactic_paraphrase, &t.syntactic_words, "syntactic words")?;
        need(groups.syntactic_paraphrase, &t.syntactic_tags, "syntactic tags")?;
        Ok(())
    }

    /// Load the tables named in the configuration.
    pub fn load_resources(&self) -> anyhow::Result<Resources> {
        let t = &self.tables;
        let table = |p: &Option<PathBuf>| -> anyhow::Result<_> {
            p.as_deref()
                .map(|p| {
                    let reader = ngramdep::textio::open_text(p).with_context(|| format!("opening {}", p.display()))?;
                    ngramdep::counts::read_table(reader).with_context(|| format!("reading {}", p.display()))
                })
                .transpose()
        };
        let lists = |p: &Option<PathBuf>| -> anyhow::Result<_> {
            p.as_deref()
                .map(|p| {
                    let reader = ngramdep::textio::open_text(p).with_context(|| format!("opening {}", p.display()))?;
                    ngramdep::paraphrase::read_paraphrase(reader).with_context(|| format!("reading {}", p.display()))
                })
                .transpose()
        };
        Ok(Resources {
            surface: table(&t.surface)?,
            surface_paraphrase: lists(&t.surface_paraphrase)?,
            syntactic: table(&t.syntactic)?,
            syntactic_words: lists(&t.syntactic_words)?,
            syntactic_tags: lists(&t.syntactic_tags)?,
        })
    }

    /// Flags that reproduce the training part of this configuration.
    pub fn train_args(&self) -> Vec<String> {
        let t = &self.train;
        let mut args = vec![
            "--seed".to_owned(),
            self.seed.to_string(),
            "train".into(),
            "--order".into(),
            t.order.to_string(),
            "--training-k".into(),
            t.training_k.to_string(),
            "--iters".into(),
            t.iters.to_string(),
            "--loss-type".into(),
            t.loss_type.clone(),
            "--scalar".into(),
            t.scalar.clone(),
            "--groups".into(),
            self.features.groups.join(","),
        ];
        if !t.single_root {
            args.push("--multi-root".into());
        }
        if !t.punct_tags.is_empty() {
            args.push("--punct-tags".into());
            args.push(t.punct_tags.join(","));
        }
        let tables = [
            ("--surface-table", &self.tables.surface),
            ("--surface-paraphrase", &self.tables.surface_paraphrase),
            ("--syntactic-table", &self.tables.syntactic),
            ("--syntactic-words", &self.tables.syntactic_words),
            ("--syntactic-tags", &self.tables.syntactic_tags),
        ];
        for (flag, path) in tables {
            if let Some(p) = path {
                args.push(flag.into());
                args.push(p.display().to_string());
            }
        }
        args
    }
}
