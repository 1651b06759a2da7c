use std::collections::{BTreeMap, HashMap};

use crate::conll::Sentence;

use super::ParserError;

/// Most frequent training tag per word, used to tag corpus context words.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct UnigramTagger {
    tags: BTreeMap<String, String>,
    default_tag: String,
}

fn modal(counts: &HashMap<&str, u64>) -> String {
    // highest count, ties to the smaller tag string
    let (tag, _) = counts
        .iter()
        .max_by(|a, b| a.1.cmp(b.1).then_with(|| b.0.cmp(a.0)))
        .expect("non-empty tally");
    (*tag).to_owned()
}

impl UnigramTagger {
    pub fn train(sentences: &[Sentence]) -> Result<Self, ParserError> {
        let mut per_word: HashMap<&str, HashMap<&str, u64>> = HashMap::new();
        let mut global: HashMap<&str, u64> = HashMap::new();
        for s in sentences {
            for t in s.tokens() {
                *per_word.entry(&t.form).or_default().entry(&t.fpos).or_insert(0) += 1;
                *global.entry(&t.fpos).or_insert(0) += 1;
            }
        }
        if global.is_empty() {
            return Err(ParserError::EmptyTrainingSet);
        }
        Ok(UnigramTagger {
            tags: per_word.iter().map(|(w, c)| ((*w).to_owned(), modal(c))).collect(),
            default_tag: modal(&global),
        })
    }

    pub fn from_parts(tags: BTreeMap<String, String>, default_tag: String) -> Self {
        UnigramTagger { tags, default_tag }
    }

    pub fn tag<'a>(&'a self, word: &str) -> &'a str {
        self.tags.get(word).map_or(&self.default_tag, String::as_str)
    }

    pub fn default_tag(&self) -> &str {
        &self.default_tag
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, &str)> {
        self.tags.iter().map(|(w, t)| (w.as_str(), t.as_str()))
    }
}
