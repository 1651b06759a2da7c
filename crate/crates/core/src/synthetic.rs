//! Seeded synthetic treebanks and corpora for end-to-end checks.
//!
//! Sub-streams of one ChaCha8 seed: 0 for the separable treebank, 1 for the
//! attachment lexicon, 2 for its sentences and 3 for its corpora.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::conll::Sentence;

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// (tag, head) per position; heads are 1-based, 0 for the root.
const TEMPLATES: [&[(&str, usize)]; 6] = [
    &[("DT", 2), ("NN", 3), ("VBZ", 0), (".", 3)],
    &[("DT", 3), ("JJ", 3), ("NN", 4), ("VBD", 0), ("DT", 6), ("NN", 4), (".", 4)],
    &[("PRP", 2), ("VBD", 0), ("RB", 2), (".", 2)],
    &[("NNP", 2), ("VBZ", 0), ("DT", 4), ("NN", 2), ("IN", 2), ("DT", 7), ("NN", 5), (".", 2)],
    &[("PRP", 2), ("MD", 0), ("VB", 2), ("NNS", 3), ("CC", 4), ("NNS", 4), (".", 2)],
    &[("DT", 2), ("NNS", 3), ("VBP", 0), ("JJ", 3), (".", 3)],
];

fn word(rng: &mut ChaCha8Rng, tag: &str) -> String {
    match tag {
        "." => ".".to_owned(),
        "DT" => ["the", "a", "this"].choose(rng).expect("non-empty").to_string(),
        "IN" => ["in", "on", "with"].choose(rng).expect("non-empty").to_string(),
        "CC" => "and".to_owned(),
        _ => format!("{}{}", tag.to_lowercase(), rng.gen_range(0..12)),
    }
}

/// Sentences whose tree is a function of the tag sequence.
pub fn separable_treebank(seed: u64, count: usize) -> Vec<Sentence> {
    let mut rng = stream(seed, 0);
    (0..count)
        .map(|i| {
            let template = TEMPLATES[i % TEMPLATES.len()];
            let words: Vec<(String, &str, usize)> = template.iter().map(|&(t, h)| (word(&mut rng, t), t, h)).collect();
            Sentence::from_triples(words.iter().map(|(w, t, h)| (w.as_str(), *t, *h))).expect("templates are trees")
        })
        .collect()
}

/// A prepositional attachment task: "DT NN VBD NN IN NN ." where the
/// preposition attaches to the verb or the object according to a hidden
/// lexical compatibility that only the corpora reveal for unseen words.
#[derive(Clone, Debug)]
pub struct AttachmentFixture {
    pub train: Vec<Sentence>,
    pub test: Vec<Sentence>,
    /// Web1T-style lines "tokens<TAB>count".
    pub surface_lines: Vec<String>,
    /// Syntactic n-gram lines.
    pub syntactic_lines: Vec<String>,
}

const PREPOSITIONS: [&str; 4] = ["with", "on", "for", "from"];

struct Lexicon {
    verbs: Vec<String>,
    nouns: Vec<String>,
    /// compatible[word][prep]
    verb_compat: Vec<[bool; 4]>,
    noun_compat: Vec<[bool; 4]>,
}

fn compat_row(rng: &mut ChaCha8Rng) -> [bool; 4] {
    std::array::from_fn(|_| rng.gen_bool(0.5))
}

fn lexicon(rng: &mut ChaCha8Rng, prefix: &str, verbs: usize, nouns: usize) -> Lexicon {
    Lexicon {
        verbs: (0..verbs).map(|i| format!("{prefix}v{i}")).collect(),
        nouns: (0..nouns).map(|i| format!("{prefix}n{i}")).collect(),
        verb_compat: (0..verbs).map(|_| compat_row(rng)).collect(),
        noun_compat: (0..nouns).map(|_| compat_row(rng)).collect(),
    }
}

fn attachment_sentence(rng: &mut ChaCha8Rng, lex: &Lexicon, to_verb: bool) -> Sentence {
    loop {
        let v = rng.gen_range(0..lex.verbs.len());
        let o = rng.gen_range(0..lex.nouns.len());
        let p = rng.gen_range(0..PREPOSITIONS.len());
        let (vc, oc) = (lex.verb_compat[v][p], lex.noun_compat[o][p]);
        if vc == oc || vc != to_verb {
            continue;
        }
        let subj = &lex.nouns[rng.gen_range(0..lex.nouns.len())];
        let pobj = &lex.nouns[rng.gen_range(0..lex.nouns.len())];
        let det = ["the", "a"][rng.gen_range(0..2)];
        let site = if to_verb { 3 } else { 4 };
        let words = [
            (det, "DT", 2),
            (subj.as_str(), "NN", 3),
            (lex.verbs[v].as_str(), "VBD", 0),
            (lex.nouns[o].as_str(), "NN", 3),
            (PREPOSITIONS[p], "IN", site),
            (pobj.as_str(), "NN", 5),
            (".", ".", 3),
        ];
        return Sentence::from_triples(words).expect("fixed shape is a tree");
    }
}

fn corpus_lines(rng: &mut ChaCha8Rng, lex: &Lexicon, surface: &mut Vec<String>, syntactic: &mut Vec<String>) {
    let entries = lex
        .verbs
        .iter()
        .zip(&lex.verb_compat)
        .map(|(w, c)| (w, c, "VBD"))
        .chain(lex.nouns.iter().zip(&lex.noun_compat).map(|(w, c)| (w, c, "NN")));
    for (w, compat, tag) in entries {
        for (p, &ok) in PREPOSITIONS.iter().zip(compat.iter()) {
            let (lo, hi) = if ok { (2_000, 60_000) } else { (1, 30) };
            surface.push(format!("{w} {p}\t{}", rng.gen_range(lo..hi)));
            surface.push(format!("{w} the {p}\t{}", rng.gen_range(lo..hi) / 4));
            let (lo, hi) = if ok { (12_000, 90_000) } else { (50, 4_000) };
            let count = rng.gen_range(lo..hi);
            syntactic.push(format!("{w}\t{w}/{tag}/ROOT/0 {p}/IN/prep/1\t{count}\t2000,{count}"));
        }
    }
}

/// 400 training and 100 held-out sentences; held-out verbs and nouns never
/// occur in training.
pub fn attachment_fixture(seed: u64) -> AttachmentFixture {
    let mut lex_rng = stream(seed, 1);
    let train_lex = lexicon(&mut lex_rng, "tr", 20, 40);
    let test_lex = lexicon(&mut lex_rng, "te", 10, 20);
    let mut rng = stream(seed, 2);
    let train = (0..400).map(|i| attachment_sentence(&mut rng, &train_lex, i % 2 == 0)).collect();
    let test = (0..100).map(|i| attachment_sentence(&mut rng, &test_lex, i % 2 == 0)).collect();
    let mut rng = stream(seed, 3);
    let (mut surface_lines, mut syntactic_lines) = (Vec::new(), Vec::new());
    corpus_lines(&mut rng, &train_lex, &mut surface_lines, &mut syntactic_lines);
    corpus_lines(&mut rng, &test_lex, &mut surface_lines, &mut syntactic_lines);
    AttachmentFixture {
        train,
        test,
        surface_lines,
        syntactic_lines,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn separable_is_deterministic() {
        let a = separable_treebank(1, 50);
        let b = separable_treebank(1, 50);
        assert_eq!(a, b);
        assert_eq!(a.len(), 50);
        assert!(a.iter().all(|s| s.gold_tree().is_projective()));
    }

    #[test]
    fn attachment_vocabularies_are_disjoint() {
        let f = attachment_fixture(1);
        assert_eq!((f.train.len(), f.test.len()), (400, 100));
        let train_words: std::collections::HashSet<&str> =
            f.train.iter().flat_map(|s| s.tokens().iter().map(|t| t.form.as_str())).collect();
        for s in &f.test {
            assert!(!train_words.contains(s.form(3)));
            assert!(!train_words.contains(s.form(4)));
        }
        let to_verb = f.test.iter().filter(|s| s.tokens()[4].gold_head == 3).count();
        assert_eq!(to_verb, 50);
    }
}
