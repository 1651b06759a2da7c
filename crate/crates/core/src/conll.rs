//! CoNLL-X treebank reading and writing, and the sentence/tree data model.
//!
//! Positions are 1-based; position 0 is the artificial root.

use std::fmt::Write as _;
use std::sync::LazyLock;

use regex::Regex;
use thiserror::Error;

/// Placeholder form and tag used for the artificial root.
pub const ROOT_FORM: &str = "<root>";
pub const ROOT_POS: &str = "<root>";

const FILLER: &str = "_";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TreeError {
    #[error("token {token}: head {head} out of range 0..={len}")]
    HeadOutOfRange { token: usize, head: usize, len: usize },
    #[error("token {token} is its own head")]
    SelfLoop { token: usize },
    #[error("token {token} is part of a cycle")]
    Cycle { token: usize },
    #[error("tree has no token attached to the root")]
    NoRoot,
    #[error("tree has {count} tokens attached to the root")]
    MultipleRoots { count: usize },
}

#[derive(Debug, Error)]
pub enum ConllError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("sentence {sentence}: predicted tree has {found} heads, sentence has {expected} tokens")]
    LengthMismatch {
        sentence: usize,
        expected: usize,
        found: usize,
    },
    #[error("{predicted} predicted trees for {sentences} sentences")]
    CountMismatch { sentences: usize, predicted: usize },
    #[error(transparent)]
    Tree(#[from] TreeError),
}

/// Check that `heads` (head of token i+1 at index i) describe a tree over
/// the root. With `single_root`, exactly one token may attach to the root.
pub fn validate_heads(heads: &[usize], single_root: bool) -> Result<(), TreeError> {
    let len = heads.len();
    for (i, &head) in heads.iter().enumerate() {
        let token = i + 1;
        if head > len {
            return Err(TreeError::HeadOutOfRange { token, head, len });
        }
        if head == token {
            return Err(TreeError::SelfLoop { token });
        }
    }
    // 0 = unvisited, 1 = on current path, 2 = reaches root
    let mut state = vec![0u8; len + 1];
    state[0] = 2;
    for start in 1..=len {
        let mut path = Vec::new();
        let mut node = start;
        while state[node] == 0 {
            state[node] = 1;
            path.push(node);
            node = heads[node - 1];
        }
        if state[node] == 1 {
            return Err(TreeError::Cycle { token: node });
        }
        for p in path {
            state[p] = 2;
        }
    }
    let roots = heads.iter().filter(|&&h| h == 0).count();
    if len > 0 && roots == 0 {
        return Err(TreeError::NoRoot);
    }
    if single_root && roots > 1 {
        return Err(TreeError::MultipleRoots { count: roots });
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub index: usize,
    pub form: String,
    pub lemma: String,
    pub cpos: String,
    pub fpos: String,
    pub feats: String,
    pub gold_head: usize,
    pub deprel: String,
    pub phead: String,
    pub pdeprel: String,
}

impl Token {
    /// Token with "_" fillers in the pass-through columns.
    pub fn new(index: usize, form: &str, fpos: &str, gold_head: usize) -> Self {
        Token {
            index,
            form: form.to_owned(),
            lemma: FILLER.to_owned(),
            cpos: fpos.to_owned(),
            fpos: fpos.to_owned(),
            feats: FILLER.to_owned(),
            gold_head,
            deprel: FILLER.to_owned(),
            phead: FILLER.to_owned(),
            pdeprel: FILLER.to_owned(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Sentence {
    tokens: Vec<Token>,
}

impl Sentence {
    /// Build a sentence, validating indices and the gold tree.
    pub fn new(tokens: Vec<Token>) -> Result<Self, TreeError> {
        Self::with_root_policy(tokens, true)
    }

    pub fn with_root_policy(tokens: Vec<Token>, single_root: bool) -> Result<Self, TreeError> {
        let heads: Vec<usize> = tokens.iter().map(|t| t.gold_head).collect();
        validate_heads(&heads, single_root)?;
        Ok(Sentence { tokens })
    }

    /// Convenience constructor from (form, fpos, head) triples.
    pub fn from_triples<'a, I>(triples: I) -> Result<Self, TreeError>
    where
        I: IntoIterator<Item = (&'a str, &'a str, usize)>,
    {
        let tokens = triples
            .into_iter()
            .enumerate()
            .map(|(i, (form, fpos, head))| Token::new(i + 1, form, fpos, head))
            .collect();
        Sentence::new(tokens)
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Token at 1-based `position`.
    pub fn token(&self, position: usize) -> &Token {
        &self.tokens[position - 1]
    }

    /// Form at `position`, with the root placeholder at 0.
    pub fn form(&self, position: usize) -> &str {
        if position == 0 {
            ROOT_FORM
        } else {
            &self.tokens[position - 1].form
        }
    }

    pub fn fpos(&self, position: usize) -> &str {
        if position == 0 {
            ROOT_POS
        } else {
            &self.tokens[position - 1].fpos
        }
    }

    pub fn gold_heads(&self) -> Vec<usize> {
        self.tokens.iter().map(|t| t.gold_head).collect()
    }

    pub fn gold_tree(&self) -> DependencyTree {
        DependencyTree {
            heads: self.gold_heads(),
        }
    }
}

/// Head assignment for a sentence; `heads[i]` is the head of token `i + 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DependencyTree {
    heads: Vec<usize>,
}

impl DependencyTree {
    pub fn new(heads: Vec<usize>, single_root: bool) -> Result<Self, TreeError> {
        validate_heads(&heads, single_root)?;
        Ok(DependencyTree { heads })
    }

    /// Construct without validation; for decoders whose output is a tree by construction.
    pub(crate) fn from_heads_unchecked(heads: Vec<usize>) -> Self {
        DependencyTree { heads }
    }

    pub fn heads(&self) -> &[usize] {
        &self.heads
    }

    pub fn len(&self) -> usize {
        self.heads.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heads.is_empty()
    }

    /// Head of 1-based `position`.
    pub fn head(&self, position: usize) -> usize {
        self.heads[position - 1]
    }

    /// True when no two arcs cross (the root arc included).
    pub fn is_projective(&self) -> bool {
        is_projective(&self.heads)
    }
}

impl AsRef<[usize]> for DependencyTree {
    fn as_ref(&self) -> &[usize] {
        &self.heads
    }
}

pub(crate) fn is_projective(heads: &[usize]) -> bool {
    let arcs: Vec<(usize, usize)> = heads
        .iter()
        .enumerate()
        .map(|(i, &h)| {
            let d = i + 1;
            (h.min(d), h.max(d))
        })
        .collect();
    for (i, &(l1, r1)) in arcs.iter().enumerate() {
        for &(l2, r2) in &arcs[i + 1..] {
            if (l1 < l2 && l2 < r1 && r1 < r2) || (l2 < l1 && l1 < r2 && r2 < r1) {
                return false;
            }
        }
    }
    true
}

#[derive(Clone, Copy, Debug)]
pub struct ReadOptions {
    /// Require exactly one child of the artificial root.
    pub single_root: bool,
}

impl Default for ReadOptions {
    fn default() -> Self {
        ReadOptions { single_root: true }
    }
}

/// Parse CoNLL-X text with the default single-root policy.
pub fn parse_conll(text: &str) -> Result<Vec<Sentence>, ConllError> {
    parse_conll_with(text, ReadOptions::default())
}

pub fn parse_conll_with(text: &str, options: ReadOptions) -> Result<Vec<Sentence>, ConllError> {
    let mut sentences = Vec::new();
    let mut block: Vec<(usize, Token)> = Vec::new();

    for (i, raw) in text.split('\n').enumerate() {
        let line_no = i + 1;
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.starts_with('#') {
            continue;
        }
        if line.trim().is_empty() {
            if !block.is_empty() {
                sentences.push(finish_block(std::mem::take(&mut block), options)?);
            }
            continue;
        }
        let token = parse_row(line, line_no, block.len() + 1)?;
        block.push((line_no, token));
    }
    if !block.is_empty() {
        sentences.push(finish_block(block, options)?);
    }
    Ok(sentences)
}

fn parse_row(line: &str, line_no: usize, expected_id: usize) -> Result<Token, ConllError> {
    let err = |message: String| ConllError::Parse {
        line: line_no,
        message,
    };
    let cols: Vec<&str> = line.split('\t').collect();
    if cols.len() < 8 || cols.len() > 10 {
        return Err(err(format!("expected 10 columns, found {}", cols.len())));
    }
    let id: usize = cols[0]
        .parse()
        .map_err(|_| err(format!("non-integer ID {:?}", cols[0])))?;
    if id != expected_id {
        return Err(err(format!("expected ID {expected_id}, found {id}")));
    }
    let head: usize = cols[6]
        .parse()
        .map_err(|_| err(format!("non-integer HEAD {:?}", cols[6])))?;
    if cols[1].is_empty() {
        return Err(err("empty FORM".to_owned()));
    }
    if cols[4].is_empty() {
        return Err(err("empty FPOS".to_owned()));
    }
    let col = |i: usize| cols.get(i).copied().unwrap_or(FILLER).to_owned();
    Ok(Token {
        index: id,
        form: col(1),
        lemma: col(2),
        cpos: col(3),
        fpos: col(4),
        feats: col(5),
        gold_head: head,
        deprel: col(7),
        phead: col(8),
        pdeprel: col(9),
    })
}

fn finish_block(block: Vec<(usize, Token)>, options: ReadOptions) -> Result<Sentence, ConllError> {
    let first_line = block[0].0;
    let len = block.len();
    for (line, token) in &block {
        if token.gold_head > len {
            return Err(ConllError::Parse {
                line: *line,
                message: format!("HEAD {} out of range for {len} tokens", token.gold_head),
            });
        }
    }
    let line_of = |token: usize| block[token - 1].0;
    let tokens: Vec<Token> = block.iter().map(|(_, t)| t.clone()).collect();
    Sentence::with_root_policy(tokens, options.single_root).map_err(|e| {
        let line = match &e {
            TreeError::HeadOutOfRange { token, .. }
            | TreeError::SelfLoop { token }
            | TreeError::Cycle { token } => line_of(*token),
            TreeError::NoRoot | TreeError::MultipleRoots { .. } => first_line,
        };
        ConllError::Parse {
            line,
            message: e.to_string(),
        }
    })
}

/// Render sentences as CoNLL-X. With `predicted`, the HEAD column holds the
/// predicted heads and DEPREL is "_".
pub fn write_conll(
    sentences: &[Sentence],
    predicted: Option<&[DependencyTree]>,
) -> Result<String, ConllError> {
    if let Some(pred) = predicted {
        if pred.len() != sentences.len() {
            return Err(ConllError::CountMismatch {
                sentences: sentences.len(),
                predicted: pred.len(),
            });
        }
        for (i, (s, t)) in sentences.iter().zip(pred).enumerate() {
            if s.len() != t.len() {
                return Err(ConllError::LengthMismatch {
                    sentence: i + 1,
                    expected: s.len(),
                    found: t.len(),
                });
            }
        }
    }
    let mut out = String::new();
    for (i, sentence) in sentences.iter().enumerate() {
        let tree = predicted.map(|p| &p[i]);
        for token in sentence.tokens() {
            let (head, deprel) = match tree {
                Some(t) => (t.head(token.index), FILLER),
                None => (token.gold_head, token.deprel.as_str()),
            };
            writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
                token.index,
                token.form,
                token.lemma,
                token.cpos,
                token.fpos,
                token.feats,
                head,
                deprel,
                token.phead,
                token.pdeprel
            )
            .expect("writing to a String cannot fail");
        }
        out.push('\n');
    }
    Ok(out)
}

static PUNCT_FORM: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^\p{P}+$").expect("valid punctuation regex"));

/// Punctuation rule shared by the nopunc training loss and evaluation.
///
/// By default a token is punctuation when its form consists entirely of
/// Unicode punctuation characters. A tag set may be given instead.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Punctuation {
    tags: Option<Vec<String>>,
}

impl Punctuation {
    pub fn by_form() -> Self {
        Punctuation { tags: None }
    }

    pub fn by_tags<I, S>(tags: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut tags: Vec<String> = tags.into_iter().map(Into::into).collect();
        tags.sort();
        tags.dedup();
        Punctuation { tags: Some(tags) }
    }

    pub fn tags(&self) -> Option<&[String]> {
        self.tags.as_deref()
    }

    pub fn is_punct(&self, token: &Token) -> bool {
        match &self.tags {
            Some(tags) => tags.binary_search(&token.fpos).is_ok(),
            None => is_punct_form(&token.form),
        }
    }
}

pub fn is_punct_form(form: &str) -> bool {
    PUNCT_FORM.is_match(form)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const TWO: &str = "1\tHe\t_\tPRP\tPRP\t_\t2\tSBJ\t_\t_\n2\tran\t_\tVB\tVBD\t_\t0\tROOT\t_\t_\n\n";

    #[test]
    fn parses_minimal_block() {
        let sentences = parse_conll(TWO).unwrap();
        assert_eq!(sentences.len(), 1);
        assert_eq!(sentences[0].gold_heads(), vec![2, 0]);
        assert_eq!(sentences[0].token(1).deprel, "SBJ");
        assert_eq!(sentences[0].fpos(2), "VBD");
        assert_eq!(sentences[0].form(0), ROOT_FORM);
    }

    #[test]
    fn empty_input_is_empty() {
        assert!(parse_conll("").unwrap().is_empty());
        assert!(parse_conll("\n\n# comment\n").unwrap().is_empty());
    }

    #[test]
    fn head_out_of_range_names_line() {
        let text = "1\tHe\t_\tPRP\tPRP\t_\t5\tSBJ\t_\t_\n2\tran\t_\tVB\tVBD\t_\t0\tROOT\t_\t_\n";
        match parse_conll(text) {
            Err(ConllError::Parse { line, .. }) => assert_eq!(line, 1),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_ids_and_cycles() {
        let gap = "1\ta\t_\tX\tX\t_\t0\t_\t_\t_\n3\tb\t_\tX\tX\t_\t1\t_\t_\t_\n";
        assert!(matches!(parse_conll(gap), Err(ConllError::Parse { line: 2, .. })));
        let nonint = "x\ta\t_\tX\tX\t_\t0\t_\t_\t_\n";
        assert!(matches!(parse_conll(nonint), Err(ConllError::Parse { line: 1, .. })));
        let cyc = "1\ta\t_\tX\tX\t_\t0\t_\t_\t_\n2\tb\t_\tX\tX\t_\t3\t_\t_\t_\n3\tc\t_\tX\tX\t_\t2\t_\t_\t_\n";
        assert!(matches!(parse_conll(cyc), Err(ConllError::Parse { line: 2, .. })));
    }

    #[test]
    fn multi_root_only_with_relaxed_policy() {
        let text = "1\ta\t_\tX\tX\t_\t0\t_\t_\t_\n2\tb\t_\tX\tX\t_\t0\t_\t_\t_\n";
        assert!(parse_conll(text).is_err());
        let relaxed = parse_conll_with(text, ReadOptions { single_root: false }).unwrap();
        assert_eq!(relaxed[0].gold_heads(), vec![0, 0]);
    }

    #[test]
    fn comments_are_skipped() {
        let text = format!("# sent_id = 1\n{TWO}");
        assert_eq!(parse_conll(&text).unwrap().len(), 1);
    }

    #[test]
    fn round_trip_is_byte_exact() {
        let out = write_conll(&parse_conll(TWO).unwrap(), None).unwrap();
        assert_eq!(out, TWO);
    }

    #[test]
    fn predicted_heads_replace_gold() {
        let sentences = parse_conll(TWO).unwrap();
        let pred = [DependencyTree::new(vec![0, 1], true).unwrap()];
        let out = write_conll(&sentences, Some(&pred)).unwrap();
        let heads: Vec<&str> = out.lines().filter(|l| !l.is_empty()).map(|l| l.split('\t').nth(6).unwrap()).collect();
        assert_eq!(heads, vec!["0", "1"]);
        assert!(out.lines().filter(|l| !l.is_empty()).all(|l| l.split('\t').nth(7) == Some("_")));
    }

    #[test]
    fn predicted_length_mismatch_is_error() {
        let sentences = parse_conll(TWO).unwrap();
        let pred = [DependencyTree::new(vec![0], true).unwrap()];
        assert!(matches!(
            write_conll(&sentences, Some(&pred)),
            Err(ConllError::LengthMismatch { .. })
        ));
        assert!(matches!(
            write_conll(&sentences, Some(&[])),
            Err(ConllError::CountMismatch { .. })
        ));
    }

    #[test]
    fn punctuation_by_form_and_tag() {
        assert!(is_punct_form(","));
        assert!(is_punct_form("..."));
        assert!(is_punct_form("«"));
        assert!(!is_punct_form("a,"));
        assert!(!is_punct_form("$"));
        let tok = Token::new(1, "--", ":", 0);
        assert!(Punctuation::by_form().is_punct(&tok));
        assert!(!Punctuation::by_tags(["."]).is_punct(&tok));
        assert!(Punctuation::by_tags([":", "."]).is_punct(&tok));
    }

    #[test]
    fn projectivity() {
        assert!(is_projective(&[2, 0, 2]));
        // 1 -> 3 crosses 2 -> 4
        assert!(!is_projective(&[0, 1, 1, 2]));
    }

    fn brute_is_tree(heads: &[usize], single_root: bool) -> bool {
        let n = heads.len();
        if heads.iter().enumerate().any(|(i, &h)| h > n || h == i + 1) {
            return false;
        }
        for start in 1..=n {
            let mut node = start;
            let mut steps = 0;
            while node != 0 {
                node = heads[node - 1];
                steps += 1;
                if steps > n {
                    return false;
                }
            }
        }
        let roots = heads.iter().filter(|&&h| h == 0).count();
        !(single_root && roots != 1) && (n == 0 || roots >= 1)
    }

    proptest! {
        #[test]
        fn validation_matches_reachability(heads in prop::collection::vec(0usize..8, 1..7), single in any::<bool>()) {
            prop_assert_eq!(validate_heads(&heads, single).is_ok(), brute_is_tree(&heads, single));
        }

        #[test]
        fn valid_trees_round_trip(seed_heads in prop::collection::vec(0usize..6, 1..6)) {
            // make a valid tree: token i attaches to something before it (or root)
            let heads: Vec<usize> = seed_heads.iter().enumerate().map(|(i, &h)| if i == 0 { 0 } else { 1 + h % i }).collect();
            let tokens = heads.iter().enumerate().map(|(i, &h)| Token::new(i + 1, &format!("w{i}"), "NN", h)).collect();
            let s = Sentence::new(tokens).unwrap();
            let text = write_conll(std::slice::from_ref(&s), None).unwrap();
            let back = parse_conll(&text).unwrap();
            prop_assert_eq!(&back, &vec![s]);
            prop_assert_eq!(write_conll(&back, None).unwrap(), text);
        }
    }
}
