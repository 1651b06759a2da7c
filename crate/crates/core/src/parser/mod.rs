//! Second-order graph-based dependency parser trained with k-best MIRA.

pub mod alphabet;
pub mod decode;
pub mod features;
pub mod mira;
pub mod model;
pub mod projective;
pub mod storage;
pub mod tagger;

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::conll::Punctuation;

pub use alphabet::{Alphabet, FeatureVector};
pub use decode::{decode_first_order, decode_k_best, decode_second_order, ArcScores, DecodeError, DecodeOptions, SiblingScores};
pub use features::{FeatureExtractor, FeatureGroups, Resources};
pub use model::{train, Model, SentenceFeatures, TrainingReport};
pub use tagger::UnigramTagger;

#[derive(Debug, Error)]
pub enum ParserError {
    #[error("training set is empty")]
    EmptyTrainingSet,
    #[error("enabled feature group needs the {0}")]
    MissingResource(&'static str),
    #[error("invalid training configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Decode(#[from] DecodeError),
    #[error("model file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum LossType {
    /// Hamming loss over non-punctuation tokens.
    #[default]
    NoPunc,
    /// Hamming loss over all tokens.
    Punc,
}

impl LossType {
    pub fn as_str(self) -> &'static str {
        match self {
            LossType::NoPunc => "nopunc",
            LossType::Punc => "punc",
        }
    }
}

impl fmt::Display for LossType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LossType {
    type Err = ParserError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "nopunc" => Ok(LossType::NoPunc),
            "punc" => Ok(LossType::Punc),
            _ => Err(ParserError::Config(format!("unknown loss type {s:?}"))),
        }
    }
}

/// Training and decoding settings; defaults are order 2, k 5, 10 iterations
/// and the nopunc loss.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrainConfig {
    pub order: u8,
    pub k: usize,
    pub iters: usize,
    pub loss: LossType,
    pub single_root: bool,
    pub punctuation: Punctuation,
    pub groups: FeatureGroups,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            order: 2,
            k: 5,
            iters: 10,
            loss: LossType::NoPunc,
            single_root: true,
            punctuation: Punctuation::by_form(),
            groups: FeatureGroups::baseline_only(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), ParserError> {
        if self.order != 1 && self.order != 2 {
            return Err(ParserError::Config(format!("order must be 1 or 2, got {}", self.order)));
        }
        if self.k == 0 {
            return Err(ParserError::Config("training-k must be at least 1".into()));
        }
        Ok(())
    }
}
