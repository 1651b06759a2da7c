//! Dependency parsing with features from web-scale n-gram counts.
//!
//! The core is generic over the weight type ([`scalar::Scalar`], f32 or f64);
//! the aliases below fix it to f64.

pub mod conll;
pub mod counts;
pub mod eval;
pub mod paraphrase;
pub mod parser;
pub mod pipeline;
pub mod query;
pub mod scalar;
pub mod surface;
pub mod synthetic;
pub mod syntactic;
pub mod textio;

pub use conll::{DependencyTree, Punctuation, Sentence, Token};
pub use counts::CountTable;
pub use parser::{FeatureGroups, ParserError, Resources, TrainConfig};

pub type Model = parser::Model<f64>;
pub type ModelF32 = parser::Model<f32>;
pub type ArcScores = parser::ArcScores<f64>;
pub type SiblingScores = parser::SiblingScores<f64>;
