use std::collections::HashMap;

use crate::conll::{DependencyTree, Punctuation, Sentence};
use crate::scalar::Scalar;

use super::alphabet::{Alphabet, FeatureVector};
use super::decode::{decode_k_best, ArcScores, DecodeOptions, SiblingScores};
use super::features::{sibling_factors, FeatureExtractor, Resources};
use super::mira::hildreth;
use super::projective::projectivize;
use super::tagger::UnigramTagger;
use super::{LossType, ParserError, TrainConfig};

/// Feature vectors of every candidate arc and sibling factor of a sentence.
#[derive(Clone, Debug)]
pub struct SentenceFeatures {
    n: usize,
    arcs: Vec<FeatureVector>,
    siblings: Vec<FeatureVector>,
}

impl SentenceFeatures {
    pub fn extract(sentence: &Sentence, fx: &FeatureExtractor<'_>, alphabet: &Alphabet, order: u8) -> Self {
        let n = sentence.len();
        let m = n + 1;
        let mut buf = Vec::new();
        let mut arcs = vec![FeatureVector::new(); m * m];
        for h in 0..=n {
            for a in 1..=n {
                if h != a {
                    fx.arc(sentence, h, a, &mut buf);
                    arcs[h * m + a] = alphabet.vectorize(&buf);
                    buf.clear();
                }
            }
        }
        let mut siblings = Vec::new();
        if order >= 2 {
            siblings = vec![FeatureVector::new(); m * m * m];
            for h in 0..=n {
                for c2 in (1..=n).filter(|&c| c != h) {
                    let between = if h < c2 { h + 1..c2 } else { c2 + 1..h };
                    for c1 in std::iter::once(None).chain(between.map(Some)) {
                        fx.sibling(sentence, h, c1, c2, &mut buf);
                        siblings[(h * m + c1.unwrap_or(h)) * m + c2] = alphabet.vectorize(&buf);
                        buf.clear();
                    }
                }
            }
        }
        SentenceFeatures { n, arcs, siblings }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    fn has_siblings(&self) -> bool {
        !self.siblings.is_empty()
    }

    pub fn arc(&self, head: usize, arg: usize) -> &FeatureVector {
        &self.arcs[head * (self.n + 1) + arg]
    }

    pub fn sibling(&self, parent: usize, child1: Option<usize>, child2: usize) -> &FeatureVector {
        let m = self.n + 1;
        &self.siblings[(parent * m + child1.unwrap_or(parent)) * m + child2]
    }

    pub fn scores<S: Scalar>(&self, weights: &[S]) -> (ArcScores<S>, Option<SiblingScores<S>>) {
        let arcs = ArcScores::from_fn(self.n, |h, a| self.arc(h, a).dot(weights));
        let siblings = self
            .has_siblings()
            .then(|| SiblingScores::from_fn(self.n, |h, c1, c2| self.sibling(h, c1, c2).dot(weights)));
        (arcs, siblings)
    }

    /// Sum of the feature vectors of all factors of a tree.
    pub fn tree_vector(&self, heads: &[usize]) -> HashMap<u32, f64> {
        let mut acc = HashMap::new();
        for (i, &h) in heads.iter().enumerate() {
            self.arc(h, i + 1).add_to(&mut acc, 1.0);
        }
        if self.has_siblings() {
            for (h, c1, c2) in sibling_factors(heads) {
                self.sibling(h, c1, c2).add_to(&mut acc, 1.0);
            }
        }
        acc
    }
}

/// Tokens whose predicted head differs from the target head.
pub fn hamming_loss(sentence: &Sentence, target: &[usize], predicted: &[usize], loss: LossType, punct: &Punctuation) -> usize {
    sentence
        .tokens()
        .iter()
        .zip(target.iter().zip(predicted))
        .filter(|(tok, (t, p))| t != p && (loss == LossType::Punc || !punct.is_punct(tok)))
        .count()
}

/// A trained parser. Decoding uses the averaged weights.
#[derive(Clone, Debug, PartialEq)]
pub struct Model<S> {
    pub alphabet: Alphabet,
    pub weights: Vec<S>,
    pub averaged: Vec<S>,
    pub config: TrainConfig,
    pub tagger: UnigramTagger,
    /// Free-form record of how the model was produced.
    pub provenance: String,
}

impl<S: Scalar> Model<S> {
    pub fn zero(alphabet: Alphabet, config: TrainConfig, tagger: UnigramTagger) -> Self {
        let len = alphabet.len();
        Model {
            alphabet,
            weights: vec![S::zero(); len],
            averaged: vec![S::zero(); len],
            config,
            tagger,
            provenance: String::new(),
        }
    }

    pub fn extractor<'a>(&'a self, resources: &'a Resources) -> Result<FeatureExtractor<'a>, ParserError> {
        FeatureExtractor::new(self.config.groups, resources, &self.tagger)
    }

    pub fn features(&self, sentence: &Sentence, resources: &Resources) -> Result<SentenceFeatures, ParserError> {
        let fx = self.extractor(resources)?;
        Ok(SentenceFeatures::extract(sentence, &fx, &self.alphabet, self.config.order))
    }

    fn options(&self, k: usize) -> DecodeOptions {
        DecodeOptions {
            k,
            single_root: self.config.single_root,
        }
    }

    /// k best trees under the averaged weights.
    pub fn k_best(&self, features: &SentenceFeatures, k: usize) -> Result<Vec<(Vec<usize>, S)>, ParserError> {
        let (arcs, sibs) = features.scores(&self.averaged);
        Ok(decode_k_best(&arcs, sibs.as_ref(), self.options(k))?)
    }

    pub fn parse_features(&self, features: &SentenceFeatures) -> Result<DependencyTree, ParserError> {
        let mut best = self.k_best(features, 1)?;
        Ok(DependencyTree::from_heads_unchecked(best.swap_remove(0).0))
    }

    pub fn parse(&self, sentence: &Sentence, resources: &Resources) -> Result<DependencyTree, ParserError> {
        self.parse_features(&self.features(sentence, resources)?)
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct IterationStats {
    pub iteration: usize,
    /// Summed loss of the best candidate before each update.
    pub loss: usize,
    /// Tokens counted by the loss.
    pub tokens: usize,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrainingReport {
    /// Training sentences whose gold tree needed lifting.
    pub projectivized: usize,
    pub lifts: usize,
    pub features: usize,
    pub iterations: Vec<IterationStats>,
}

/// Train with k-best MIRA and averaged weights.
pub fn train<S: Scalar>(
    sentences: &[Sentence],
    config: &TrainConfig,
    resources: &Resources,
) -> Result<(Model<S>, TrainingReport), ParserError> {
    config.validate()?;
    if sentences.is_empty() {
        return Err(ParserError::EmptyTrainingSet);
    }
    let tagger = UnigramTagger::train(sentences)?;
    let fx = FeatureExtractor::new(config.groups, resources, &tagger)?;
    let mut report = TrainingReport::default();

    let targets: Vec<Vec<usize>> = sentences
        .iter()
        .map(|s| {
            let (heads, lifts) = projectivize(&s.gold_heads());
            if lifts > 0 {
                report.projectivized += 1;
                report.lifts += lifts;
            }
            heads
        })
        .collect();

    let mut alphabet = Alphabet::new();
    let mut buf = Vec::new();
    for (s, heads) in sentences.iter().zip(&targets) {
        for (i, &h) in heads.iter().enumerate() {
            fx.arc(s, h, i + 1, &mut buf);
        }
        if config.order >= 2 {
            for (h, c1, c2) in sibling_factors(heads) {
                fx.sibling(s, h, c1, c2, &mut buf);
            }
        }
        for name in buf.drain(..) {
            alphabet.insert(&name);
        }
    }
    alphabet.freeze();
    report.features = alphabet.len();

    let feats: Vec<SentenceFeatures> = sentences
        .iter()
        .map(|s| SentenceFeatures::extract(s, &fx, &alphabet, config.order))
        .collect();
    let mut model = Model::<S>::zero(alphabet, config.clone(), tagger);
    let dim = model.alphabet.len();
    let mut weights = vec![S::zero(); dim];
    let mut total = vec![0.0f64; dim];
    let instances = sentences.len();
    let steps = config.iters * instances;
    let options = DecodeOptions {
        k: config.k,
        single_root: config.single_root,
    };

    for iteration in 1..=config.iters {
        let mut stats = IterationStats {
            iteration,
            ..Default::default()
        };
        for (i, (sf, target)) in feats.iter().zip(&targets).enumerate() {
            let sentence = &sentences[i];
            let (arcs, sibs) = sf.scores(&weights);
            let kbest = decode_k_best(&arcs, sibs.as_ref(), options)?;
            let gold = sf.tree_vector(target);
            let mut a = Vec::with_capacity(kbest.len());
            let mut b = Vec::with_capacity(kbest.len());
            for (rank, (heads, _)) in kbest.iter().enumerate() {
                let loss = hamming_loss(sentence, target, heads, config.loss, &config.punctuation);
                if rank == 0 {
                    stats.loss += loss;
                }
                let mut diff = gold.clone();
                for (idx, v) in sf.tree_vector(heads) {
                    *diff.entry(idx).or_insert(0.0) -= v;
                }
                let diff = FeatureVector::from_map(diff);
                b.push(loss as f64 - diff.dot(&weights).as_f64());
                a.push(diff);
            }
            stats.tokens += match config.loss {
                LossType::Punc => sentence.len(),
                LossType::NoPunc => sentence.tokens().iter().filter(|t| !config.punctuation.is_punct(t)).count(),
            };
            let alpha = hildreth(&a, &b);
            let step = (iteration - 1) * instances + i + 1;
            let remaining = (steps - step + 1) as f64;
            for (alpha, diff) in alpha.iter().zip(&a) {
                if *alpha == 0.0 {
                    continue;
                }
                for &(idx, v) in diff.entries() {
                    weights[idx as usize] += S::of(alpha * v);
                    total[idx as usize] += remaining * alpha * v;
                }
            }
        }
        report.iterations.push(stats);
    }
    model.averaged = if steps == 0 {
        vec![S::zero(); dim]
    } else {
        total.iter().map(|&t| S::of(t / steps as f64)).collect()
    };
    model.weights = weights;
    Ok((model, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::FeatureGroups;

    fn data() -> Vec<Sentence> {
        vec![
            Sentence::from_triples([("the", "DT", 2), ("dog", "NN", 3), ("barks", "VBZ", 0), (".", ".", 3)]).unwrap(),
            Sentence::from_triples([("a", "DT", 2), ("cat", "NN", 3), ("sleeps", "VBZ", 0), (".", ".", 3)]).unwrap(),
        ]
    }

    #[test]
    fn gold_loss_is_zero() {
        let s = &data()[0];
        let gold = s.gold_heads();
        let p = Punctuation::by_form();
        assert_eq!(hamming_loss(s, &gold, &gold, LossType::NoPunc, &p), 0);
        assert_eq!(hamming_loss(s, &gold, &[2, 3, 0, 1], LossType::NoPunc, &p), 0);
        assert_eq!(hamming_loss(s, &gold, &[2, 3, 0, 1], LossType::Punc, &p), 1);
    }

    #[test]
    fn zero_iterations_give_zero_model() {
        let config = TrainConfig {
            iters: 0,
            ..TrainConfig::default()
        };
        let (model, _) = train::<f64>(&data(), &config, &Resources::default()).unwrap();
        assert!(model.averaged.iter().all(|&w| w == 0.0));
        let tree = model.parse(&data()[0], &Resources::default()).unwrap();
        assert_eq!(tree.heads(), &[0, 1, 1, 1]);
    }

    #[test]
    fn learns_tiny_treebank() {
        for order in [1, 2] {
            let config = TrainConfig {
                order,
                ..TrainConfig::default()
            };
            let (model, report) = train::<f32>(&data(), &config, &Resources::default()).unwrap();
            assert_eq!(report.iterations.len(), 10);
            for s in data() {
                assert_eq!(model.parse(&s, &Resources::default()).unwrap().heads(), s.gold_heads().as_slice());
            }
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            train::<f64>(&[], &TrainConfig::default(), &Resources::default()),
            Err(ParserError::EmptyTrainingSet)
        ));
        let config = TrainConfig {
            groups: FeatureGroups::all(),
            ..TrainConfig::default()
        };
        assert!(matches!(
            train::<f64>(&data(), &config, &Resources::default()),
            Err(ParserError::MissingResource(_))
        ));
    }
}
