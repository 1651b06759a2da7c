//! Enumeration of the head-argument and second-order structures a parser may
//! consider, and their canonical serialization as corpus lookup keys.
//!
//! Every count table key used by the scanners and by the feature extractor is
//! built by a function in this module, so the two sides always agree.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::conll::Sentence;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Direction {
    /// The head precedes the argument.
    HeadLeft,
    /// The head follows the argument.
    HeadRight,
}

impl Direction {
    pub fn of(head: usize, arg: usize) -> Self {
        if head < arg {
            Direction::HeadLeft
        } else {
            Direction::HeadRight
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Direction::HeadLeft => "head-left",
            Direction::HeadRight => "head-right",
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Direction {
    type Err = QueryParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "head-left" => Ok(Direction::HeadLeft),
            "head-right" => Ok(Direction::HeadRight),
            _ => Err(QueryParseError::Field("direction", s.to_owned())),
        }
    }
}

/// Distance bins {1, 2, 3, 4, 5, 6-10, >10}.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DistanceBin {
    One,
    Two,
    Three,
    Four,
    Five,
    SixToTen,
    OverTen,
}

impl DistanceBin {
    pub fn of(distance: usize) -> Self {
        match distance {
            0 | 1 => DistanceBin::One,
            2 => DistanceBin::Two,
            3 => DistanceBin::Three,
            4 => DistanceBin::Four,
            5 => DistanceBin::Five,
            6..=10 => DistanceBin::SixToTen,
            _ => DistanceBin::OverTen,
        }
    }

    pub fn between(a: usize, b: usize) -> Self {
        DistanceBin::of(a.abs_diff(b))
    }

    pub fn as_str(self) -> &'static str {
        match self {
            DistanceBin::One => "1",
            DistanceBin::Two => "2",
            DistanceBin::Three => "3",
            DistanceBin::Four => "4",
            DistanceBin::Five => "5",
            DistanceBin::SixToTen => "6-10",
            DistanceBin::OverTen => "11+",
        }
    }
}

impl fmt::Display for DistanceBin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DistanceBin {
    type Err = QueryParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "1" => DistanceBin::One,
            "2" => DistanceBin::Two,
            "3" => DistanceBin::Three,
            "4" => DistanceBin::Four,
            "5" => DistanceBin::Five,
            "6-10" => DistanceBin::SixToTen,
            "11+" => DistanceBin::OverTen,
            _ => return Err(QueryParseError::Field("distance bin", s.to_owned())),
        })
    }
}

/// A word of a sentence with its fine tag and 1-based position.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WordPos {
    pub form: String,
    pub fpos: String,
    pub position: usize,
}

impl WordPos {
    pub fn at(sentence: &Sentence, position: usize) -> Self {
        WordPos {
            form: sentence.form(position).to_owned(),
            fpos: sentence.fpos(position).to_owned(),
            position,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ArcCandidate {
    pub head: WordPos,
    pub arg: WordPos,
    pub direction: Direction,
    pub surface_distance: usize,
}

impl ArcCandidate {
    pub fn new(head: WordPos, arg: WordPos) -> Self {
        assert_ne!(head.position, arg.position, "arc endpoints must differ");
        let direction = Direction::of(head.position, arg.position);
        let surface_distance = head.position.abs_diff(arg.position);
        ArcCandidate {
            head,
            arg,
            direction,
            surface_distance,
        }
    }

    pub fn bin(&self) -> DistanceBin {
        DistanceBin::of(self.surface_distance)
    }

    pub fn to_row(&self) -> QueryRow {
        QueryRow {
            kind: QueryKind::Arc,
            forms: vec![self.head.form.clone(), self.arg.form.clone()],
            fposes: vec![self.head.fpos.clone(), self.arg.fpos.clone()],
            direction: self.direction,
            bin: self.bin(),
        }
    }

    /// Forms in linear order.
    pub fn to_surface_query(&self) -> Vec<String> {
        linear(&[&self.head, &self.arg])
    }
}

/// A parent with two children on the same side; `child1` lies between the
/// parent and `child2`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TripleQuery {
    pub parent: WordPos,
    pub child1: WordPos,
    pub child2: WordPos,
}

impl TripleQuery {
    /// Triples headed by the artificial root only serve baseline decoding.
    pub fn is_root_parent(&self) -> bool {
        self.parent.position == 0
    }

    pub fn direction(&self) -> Direction {
        Direction::of(self.parent.position, self.child1.position)
    }

    /// Bin of the distance between the two children.
    pub fn children_bin(&self) -> DistanceBin {
        DistanceBin::between(self.child1.position, self.child2.position)
    }

    pub fn sibling(&self) -> SiblingQuery {
        SiblingQuery {
            child1: self.child1.clone(),
            child2: self.child2.clone(),
        }
    }

    pub fn to_row(&self) -> QueryRow {
        QueryRow {
            kind: QueryKind::Triple,
            forms: vec![
                self.parent.form.clone(),
                self.child1.form.clone(),
                self.child2.form.clone(),
            ],
            fposes: vec![
                self.parent.fpos.clone(),
                self.child1.fpos.clone(),
                self.child2.fpos.clone(),
            ],
            direction: self.direction(),
            bin: self.children_bin(),
        }
    }

    pub fn to_surface_query(&self) -> Vec<String> {
        linear(&[&self.parent, &self.child1, &self.child2])
    }
}

/// Two children of one parent, `child1` closer to the parent.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SiblingQuery {
    pub child1: WordPos,
    pub child2: WordPos,
}

impl SiblingQuery {
    /// Side of the (implicit) parent.
    pub fn direction(&self) -> Direction {
        Direction::of(self.child1.position, self.child2.position)
    }

    pub fn to_row(&self) -> QueryRow {
        QueryRow {
            kind: QueryKind::Sibling,
            forms: vec![self.child1.form.clone(), self.child2.form.clone()],
            fposes: vec![self.child1.fpos.clone(), self.child2.fpos.clone()],
            direction: self.direction(),
            bin: DistanceBin::between(self.child1.position, self.child2.position),
        }
    }

    pub fn to_surface_query(&self) -> Vec<String> {
        linear(&[&self.child1, &self.child2])
    }
}

fn linear(words: &[&WordPos]) -> Vec<String> {
    let mut sorted: Vec<&&WordPos> = words.iter().collect();
    sorted.sort_by_key(|w| w.position);
    sorted.into_iter().map(|w| w.form.clone()).collect()
}

/// Every ordered pair of distinct real tokens, n(n-1) in total.
pub fn all_arc_candidates(sentence: &Sentence) -> impl Iterator<Item = ArcCandidate> + '_ {
    let n = sentence.len();
    (1..=n).flat_map(move |h| {
        (1..=n)
            .filter(move |&a| a != h)
            .map(move |a| ArcCandidate::new(WordPos::at(sentence, h), WordPos::at(sentence, a)))
    })
}

/// Arc candidates deduplicated by (forms, tags, direction, distance bin);
/// the first occurrence in (head, argument) order is kept.
pub fn extract_arc_candidates(sentence: &Sentence) -> Vec<ArcCandidate> {
    let mut seen = BTreeSet::new();
    all_arc_candidates(sentence)
        .filter(|arc| seen.insert(arc.to_row()))
        .collect()
}

#[derive(Clone, Debug, Default)]
pub struct SecondOrderCandidates {
    /// Includes root-parent triples; see [`TripleQuery::is_root_parent`].
    pub triples: Vec<TripleQuery>,
    /// Projection of the non-root triples onto their children.
    pub siblings: Vec<SiblingQuery>,
}

/// All (parent, child1, child2) with child1 strictly between parent and
/// child2, deduplicated like arcs.
pub fn extract_second_order_candidates(sentence: &Sentence) -> SecondOrderCandidates {
    let n = sentence.len();
    let mut out = SecondOrderCandidates::default();
    let mut seen_triples = BTreeSet::new();
    let mut seen_siblings = BTreeSet::new();
    for p in 0..=n {
        for c2 in 1..=n {
            if c2 == p {
                continue;
            }
            let between: Vec<usize> = if p < c2 {
                (p + 1..c2).collect()
            } else {
                (c2 + 1..p).rev().collect()
            };
            for c1 in between {
                let triple = TripleQuery {
                    parent: WordPos::at(sentence, p),
                    child1: WordPos::at(sentence, c1),
                    child2: WordPos::at(sentence, c2),
                };
                let root = triple.is_root_parent();
                // root triples are kept per position; they never reach a corpus
                let fresh = root || seen_triples.insert(triple.to_row());
                if !root {
                    let sibling = triple.sibling();
                    if seen_siblings.insert(sibling.to_row()) {
                        out.siblings.push(sibling);
                    }
                }
                if fresh {
                    out.triples.push(triple);
                }
            }
        }
    }
    out
}

/// Kinds of first-order syntactic lookups, in lookup-table order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SyntacticKind {
    HeadWord,
    ArgWord,
    WordToWord,
    WordToWordDir,
    HeadPos,
    ArgPos,
    /// POS of a head with a child on the given side.
    PosChildSide,
    /// POS of an argument with its head on the given side.
    PosHeadSide,
    PosToPos,
    PosToPosDir,
    WordToPos,
    WordToPosDir,
    PosToWord,
    PosToWordDir,
}

impl SyntacticKind {
    pub const ALL: [SyntacticKind; 14] = [
        SyntacticKind::HeadWord,
        SyntacticKind::ArgWord,
        SyntacticKind::WordToWord,
        SyntacticKind::WordToWordDir,
        SyntacticKind::HeadPos,
        SyntacticKind::ArgPos,
        SyntacticKind::PosChildSide,
        SyntacticKind::PosHeadSide,
        SyntacticKind::PosToPos,
        SyntacticKind::PosToPosDir,
        SyntacticKind::WordToPos,
        SyntacticKind::WordToPosDir,
        SyntacticKind::PosToWord,
        SyntacticKind::PosToWordDir,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SyntacticKind::HeadWord => "head-word",
            SyntacticKind::ArgWord => "arg-word",
            SyntacticKind::WordToWord => "word-word",
            SyntacticKind::WordToWordDir => "word-word-dir",
            SyntacticKind::HeadPos => "head-pos",
            SyntacticKind::ArgPos => "arg-pos",
            SyntacticKind::PosChildSide => "pos-child",
            SyntacticKind::PosHeadSide => "pos-head",
            SyntacticKind::PosToPos => "pos-pos",
            SyntacticKind::PosToPosDir => "pos-pos-dir",
            SyntacticKind::WordToPos => "word-pos",
            SyntacticKind::WordToPosDir => "word-pos-dir",
            SyntacticKind::PosToWord => "pos-word",
            SyntacticKind::PosToWordDir => "pos-word-dir",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            SyntacticKind::HeadWord
            | SyntacticKind::ArgWord
            | SyntacticKind::HeadPos
            | SyntacticKind::ArgPos => 1,
            SyntacticKind::PosChildSide
            | SyntacticKind::PosHeadSide
            | SyntacticKind::WordToWord
            | SyntacticKind::PosToPos
            | SyntacticKind::WordToPos
            | SyntacticKind::PosToWord => 2,
            SyntacticKind::WordToWordDir
            | SyntacticKind::PosToPosDir
            | SyntacticKind::WordToPosDir
            | SyntacticKind::PosToWordDir => 3,
        }
    }
}

/// One instantiated first-order syntactic lookup.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SyntacticLookupKey {
    pub kind: SyntacticKind,
    pub payload: Vec<String>,
}

impl SyntacticLookupKey {
    fn new(kind: SyntacticKind, payload: &[&str]) -> Self {
        debug_assert_eq!(payload.len(), kind.arity());
        SyntacticLookupKey {
            kind,
            payload: payload.iter().map(|s| (*s).to_owned()).collect(),
        }
    }

    /// Canonical table key: kind name followed by the payload, space separated.
    pub fn to_key_string(&self) -> String {
        let mut key = self.kind.name().to_owned();
        for p in &self.payload {
            key.push(' ');
            key.push_str(p);
        }
        key
    }
}

fn side(d: Direction, head_side: bool) -> &'static str {
    // child side of the head, or head side of the argument
    match (d, head_side) {
        (Direction::HeadLeft, false) => "right",
        (Direction::HeadRight, false) => "left",
        (Direction::HeadLeft, true) => "left",
        (Direction::HeadRight, true) => "right",
    }
}

/// The 14 lookups for an arc given by its endpoint words and tags.
pub fn lookup_keys_for(
    head_form: &str,
    head_pos: &str,
    arg_form: &str,
    arg_pos: &str,
    direction: Direction,
) -> [SyntacticLookupKey; 14] {
    use SyntacticKind::*;
    let dir = direction.as_str();
    [
        SyntacticLookupKey::new(HeadWord, &[head_form]),
        SyntacticLookupKey::new(ArgWord, &[arg_form]),
        SyntacticLookupKey::new(WordToWord, &[head_form, arg_form]),
        SyntacticLookupKey::new(WordToWordDir, &[head_form, arg_form, dir]),
        SyntacticLookupKey::new(HeadPos, &[head_pos]),
        SyntacticLookupKey::new(ArgPos, &[arg_pos]),
        SyntacticLookupKey::new(PosChildSide, &[head_pos, side(direction, false)]),
        SyntacticLookupKey::new(PosHeadSide, &[arg_pos, side(direction, true)]),
        SyntacticLookupKey::new(PosToPos, &[head_pos, arg_pos]),
        SyntacticLookupKey::new(PosToPosDir, &[head_pos, arg_pos, dir]),
        SyntacticLookupKey::new(WordToPos, &[head_form, arg_pos]),
        SyntacticLookupKey::new(WordToPosDir, &[head_form, arg_pos, dir]),
        SyntacticLookupKey::new(PosToWord, &[head_pos, arg_form]),
        SyntacticLookupKey::new(PosToWordDir, &[head_pos, arg_form, dir]),
    ]
}

pub fn syntactic_lookup_keys(arc: &ArcCandidate) -> [SyntacticLookupKey; 14] {
    lookup_keys_for(
        &arc.head.form,
        &arc.head.fpos,
        &arc.arg.form,
        &arc.arg.fpos,
        arc.direction,
    )
}

/// Affinity patterns: the two query words with 0-3 intervening words.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AffinityPattern {
    Contig,
    Gap1,
    Gap2,
    Gap3,
}

impl AffinityPattern {
    pub const ALL: [AffinityPattern; 4] = [
        AffinityPattern::Contig,
        AffinityPattern::Gap1,
        AffinityPattern::Gap2,
        AffinityPattern::Gap3,
    ];

    pub fn gap(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            AffinityPattern::Contig => "contig",
            AffinityPattern::Gap1 => "gap1",
            AffinityPattern::Gap2 => "gap2",
            AffinityPattern::Gap3 => "gap3",
        }
    }
}

/// Word-only or tag-only variant of a second-order syntactic key.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Variant {
    Word,
    Pos,
}

/// Canonical table keys.
pub mod keys {
    use super::{AffinityPattern, Direction, Variant};

    /// Two words in linear order, as used for paraphrase lists.
    pub fn pair(q1: &str, q2: &str) -> String {
        format!("{q1} {q2}")
    }

    pub fn affinity(pattern: AffinityPattern, q1: &str, q2: &str) -> String {
        format!("{} {q1} {q2}", pattern.name())
    }

    /// Surface triple, words in linear order.
    pub fn surface_triple(q1: &str, q2: &str, q3: &str) -> String {
        format!("triple {q1} {q2} {q3}")
    }

    /// Syntactic triple: parent side, then the three items in linear order.
    pub fn syntactic_triple(variant: Variant, side: Direction, linear: [&str; 3]) -> String {
        let name = match variant {
            Variant::Word => "syn-triple-word",
            Variant::Pos => "syn-triple-pos",
        };
        format!("{name} {side} {} {} {}", linear[0], linear[1], linear[2])
    }

    /// Syntactic sibling pair in linear order.
    pub fn syntactic_sibling(variant: Variant, left: &str, right: &str) -> String {
        let name = match variant {
            Variant::Word => "syn-sib-word",
            Variant::Pos => "syn-sib-pos",
        };
        format!("{name} {left} {right}")
    }

    /// Head-argument pair in role order with direction, for syntactic paraphrases.
    pub fn role_pair(head: &str, arg: &str, direction: Direction) -> String {
        format!("{head} {arg} {direction}")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum QueryKind {
    Arc,
    Triple,
    Sibling,
}

impl QueryKind {
    pub fn as_str(self) -> &'static str {
        match self {
            QueryKind::Arc => "arc",
            QueryKind::Triple => "triple",
            QueryKind::Sibling => "sibling",
        }
    }
}

impl FromStr for QueryKind {
    type Err = QueryParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "arc" => Ok(QueryKind::Arc),
            "triple" => Ok(QueryKind::Triple),
            "sibling" => Ok(QueryKind::Sibling),
            _ => Err(QueryParseError::Field("kind", s.to_owned())),
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum QueryParseError {
    #[error("expected 5 tab-separated fields, found {0}")]
    FieldCount(usize),
    #[error("invalid {0}: {1:?}")]
    Field(&'static str, String),
    #[error("{kind} query needs {expected} words and tags")]
    Arity { kind: &'static str, expected: usize },
}

/// A position-free query structure: one TSV line of a query file.
///
/// Forms and tags are in role order: (head, arg), (parent, child1, child2)
/// or (child1, child2).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QueryRow {
    pub kind: QueryKind,
    pub forms: Vec<String>,
    pub fposes: Vec<String>,
    pub direction: Direction,
    pub bin: DistanceBin,
}

impl QueryRow {
    pub fn to_tsv(&self) -> String {
        format!(
            "{}\t{}\t{}\t{}\t{}",
            self.kind.as_str(),
            self.forms.join(" "),
            self.fposes.join(" "),
            self.direction,
            self.bin
        )
    }

    pub fn parse_tsv(line: &str) -> Result<Self, QueryParseError> {
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 5 {
            return Err(QueryParseError::FieldCount(fields.len()));
        }
        let kind: QueryKind = fields[0].parse()?;
        let forms: Vec<String> = fields[1].split(' ').map(str::to_owned).collect();
        let fposes: Vec<String> = fields[2].split(' ').map(str::to_owned).collect();
        let expected = if kind == QueryKind::Triple { 3 } else { 2 };
        if forms.len() != expected || fposes.len() != expected || forms.iter().chain(&fposes).any(String::is_empty) {
            return Err(QueryParseError::Arity {
                kind: kind.as_str(),
                expected,
            });
        }
        Ok(QueryRow {
            kind,
            forms,
            fposes,
            direction: fields[3].parse()?,
            bin: fields[4].parse()?,
        })
    }

    /// Forms in linear order.
    pub fn linear_forms(&self) -> Vec<&str> {
        self.linear(&self.forms)
    }

    pub fn linear_fposes(&self) -> Vec<&str> {
        self.linear(&self.fposes)
    }

    fn linear<'a>(&self, items: &'a [String]) -> Vec<&'a str> {
        let mut out: Vec<&str> = items.iter().map(String::as_str).collect();
        // head-right arcs and parent-right structures are written right to left
        if self.direction == Direction::HeadRight {
            out.reverse();
        }
        out
    }

    /// Syntactic lookups for an arc row; empty for other kinds.
    pub fn syntactic_keys(&self) -> Vec<String> {
        if self.kind != QueryKind::Arc {
            return Vec::new();
        }
        lookup_keys_for(
            &self.forms[0],
            &self.fposes[0],
            &self.forms[1],
            &self.fposes[1],
            self.direction,
        )
        .iter()
        .map(SyntacticLookupKey::to_key_string)
        .collect()
    }
}

/// A deduplicated, sorted collection of query rows.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct QuerySet {
    rows: BTreeSet<QueryRow>,
}

impl QuerySet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Add all arc, non-root triple and sibling queries of a sentence.
    pub fn add_sentence(&mut self, sentence: &Sentence) {
        for arc in all_arc_candidates(sentence) {
            self.rows.insert(arc.to_row());
        }
        let second = extract_second_order_candidates(sentence);
        for t in second.triples.iter().filter(|t| !t.is_root_parent()) {
            self.rows.insert(t.to_row());
        }
        for s in &second.siblings {
            self.rows.insert(s.to_row());
        }
    }

    pub fn insert(&mut self, row: QueryRow) -> bool {
        self.rows.insert(row)
    }

    pub fn union(&mut self, other: QuerySet) {
        self.rows.extend(other.rows);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn rows(&self) -> impl Iterator<Item = &QueryRow> {
        self.rows.iter()
    }

    pub fn of_kind(&self, kind: QueryKind) -> impl Iterator<Item = &QueryRow> {
        self.rows.iter().filter(move |r| r.kind == kind)
    }

    /// Sorted TSV for one kind, one row per line.
    pub fn to_tsv(&self, kind: QueryKind) -> String {
        let mut lines: Vec<String> = self.of_kind(kind).map(QueryRow::to_tsv).collect();
        lines.sort();
        let mut out = String::new();
        for line in lines {
            out.push_str(&line);
            out.push('\n');
        }
        out
    }

    /// Sorted, deduplicated syntactic lookup keys of all arc rows.
    pub fn syntactic_keys(&self) -> BTreeSet<String> {
        self.of_kind(QueryKind::Arc)
            .flat_map(QueryRow::syntactic_keys)
            .collect()
    }

    /// Parse rows from TSV text; returns the offending 1-based line on error.
    pub fn extend_from_tsv(&mut self, text: &str) -> Result<(), (usize, QueryParseError)> {
        for (i, line) in text.lines().enumerate() {
            if line.is_empty() {
                continue;
            }
            let row = QueryRow::parse_tsv(line).map_err(|e| (i + 1, e))?;
            self.rows.insert(row);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sentence(words: &[(&str, &str, usize)]) -> Sentence {
        Sentence::from_triples(words.iter().copied()).unwrap()
    }

    fn fig1() -> Sentence {
        // could hold a public hearing next week
        sentence(&[
            ("could", "MD", 2),
            ("hold", "VB", 0),
            ("a", "DT", 5),
            ("public", "JJ", 5),
            ("hearing", "NN", 2),
            ("next", "JJ", 7),
            ("week", "NN", 2),
        ])
    }

    fn fig2() -> Sentence {
        // hold a hearing next Tuesday
        sentence(&[
            ("hold", "VB", 0),
            ("a", "DT", 3),
            ("hearing", "NN", 1),
            ("next", "JJ", 5),
            ("Tuesday", "NNP", 1),
        ])
    }

    #[test]
    fn arc_counts() {
        let s = sentence(&[("a", "X", 0), ("b", "X", 1), ("c", "X", 1)]);
        assert_eq!(extract_arc_candidates(&s).len(), 6);
        assert_eq!(all_arc_candidates(&s).count(), 6);
        let one = sentence(&[("a", "X", 0)]);
        assert!(extract_arc_candidates(&one).is_empty());
    }

    #[test]
    fn dedup_merges_identical_structures() {
        // "x x x": (1,2) and (2,3) share forms, tags, direction and bin
        let s = sentence(&[("x", "X", 0), ("x", "X", 1), ("x", "X", 2)]);
        let arcs = extract_arc_candidates(&s);
        assert_eq!(all_arc_candidates(&s).count(), 6);
        // left/right x distance {1,2} = 4 distinct
        assert_eq!(arcs.len(), 4);
    }

    #[test]
    fn hold_hearing_candidate() {
        let arcs = extract_arc_candidates(&fig1());
        let found = arcs.iter().find(|a| a.head.form == "hold" && a.arg.form == "hearing").unwrap();
        assert_eq!(found.direction, Direction::HeadLeft);
        assert_eq!(found.surface_distance, 3);
    }

    #[test]
    fn three_word_triples() {
        let s = sentence(&[("w1", "A", 0), ("w2", "B", 1), ("w3", "C", 1)]);
        let so = extract_second_order_candidates(&s);
        let non_root: BTreeSet<(usize, usize, usize)> = so
            .triples
            .iter()
            .filter(|t| !t.is_root_parent())
            .map(|t| (t.parent.position, t.child1.position, t.child2.position))
            .collect();
        assert_eq!(non_root, BTreeSet::from([(1, 2, 3), (3, 2, 1)]));
        let two = sentence(&[("w1", "A", 0), ("w2", "B", 1)]);
        assert!(extract_second_order_candidates(&two).triples.iter().all(|t| t.is_root_parent()));
    }

    #[test]
    fn fig2_triple_and_surface_queries() {
        let so = extract_second_order_candidates(&fig2());
        let triple = so
            .triples
            .iter()
            .find(|t| t.parent.form == "hold" && t.child1.form == "hearing" && t.child2.form == "Tuesday")
            .unwrap();
        assert_eq!(triple.to_surface_query(), vec!["hold", "hearing", "Tuesday"]);
        assert_eq!(triple.sibling().to_surface_query(), vec!["hearing", "Tuesday"]);
        assert!(so.siblings.iter().any(|s| s.to_surface_query() == vec!["hearing", "Tuesday"]));
    }

    #[test]
    fn surface_query_is_linear() {
        let s = sentence(&[("a", "X", 5), ("b", "X", 5), ("c", "X", 5), ("d", "X", 5), ("e", "X", 0)]);
        let arc = ArcCandidate::new(WordPos::at(&s, 5), WordPos::at(&s, 2));
        assert_eq!(arc.to_surface_query(), vec!["b", "e"]);
        assert_eq!(arc.to_row().linear_forms(), vec!["b", "e"]);
    }

    #[test]
    fn brute_force_betweenness() {
        let s = sentence(&[("a", "A", 0), ("b", "B", 1), ("c", "C", 1), ("d", "D", 1), ("e", "E", 1)]);
        let n = s.len();
        let mut expected = BTreeSet::new();
        for p in 0..=n {
            for c1 in 1..=n {
                for c2 in 1..=n {
                    let distinct = p != c1 && p != c2 && c1 != c2;
                    if distinct && ((p < c1 && c1 < c2) || (c2 < c1 && c1 < p)) {
                        expected.insert((p, c1, c2));
                    }
                }
            }
        }
        let got: BTreeSet<_> = extract_second_order_candidates(&s)
            .triples
            .iter()
            .map(|t| (t.parent.position, t.child1.position, t.child2.position))
            .collect();
        assert_eq!(got, expected);
    }

    #[test]
    fn table1_lookup_keys() {
        let s = fig1();
        let arc = ArcCandidate::new(WordPos::at(&s, 2), WordPos::at(&s, 5));
        let keys: Vec<String> = syntactic_lookup_keys(&arc).iter().map(|k| k.to_key_string()).collect();
        assert_eq!(
            keys,
            vec![
                "head-word hold",
                "arg-word hearing",
                "word-word hold hearing",
                "word-word-dir hold hearing head-left",
                "head-pos VB",
                "arg-pos NN",
                "pos-child VB right",
                "pos-head NN left",
                "pos-pos VB NN",
                "pos-pos-dir VB NN head-left",
                "word-pos hold NN",
                "word-pos-dir hold NN head-left",
                "pos-word VB hearing",
                "pos-word-dir VB hearing head-left",
            ]
        );
        let kinds: BTreeSet<_> = syntactic_lookup_keys(&arc).iter().map(|k| k.kind).collect();
        assert_eq!(kinds.len(), 14);
    }

    #[test]
    fn word_dir_keys_are_injective() {
        let s = sentence(&[("a", "X", 0), ("b", "Y", 1), ("a", "Y", 1), ("c", "X", 1)]);
        let mut by_key = std::collections::HashMap::new();
        for arc in all_arc_candidates(&s) {
            let k = syntactic_lookup_keys(&arc)[3].to_key_string();
            let id = (arc.head.form.clone(), arc.arg.form.clone(), arc.direction);
            if let Some(prev) = by_key.insert(k, id.clone()) {
                assert_eq!(prev, id);
            }
        }
    }

    #[test]
    fn row_tsv_round_trip_and_errors() {
        let s = fig2();
        for row in QuerySetFor(&s).rows() {
            assert_eq!(&QueryRow::parse_tsv(&row.to_tsv()).unwrap(), row);
        }
        assert!(QueryRow::parse_tsv("arc\ta\tX").is_err());
        assert!(QueryRow::parse_tsv("arc\ta b c\tX Y Z\thead-left\t1").is_err());
        assert!(QueryRow::parse_tsv("arc\ta b\tX Y\tup\t1").is_err());
    }

    #[allow(non_snake_case)]
    fn QuerySetFor(s: &Sentence) -> QuerySet {
        let mut q = QuerySet::new();
        q.add_sentence(s);
        q
    }

    #[test]
    fn query_set_excludes_root() {
        let q = QuerySetFor(&fig2());
        assert!(q.rows().all(|r| r.forms.iter().all(|f| f != crate::conll::ROOT_FORM)));
        assert_eq!(q.of_kind(QueryKind::Arc).count(), 20);
        let tsv = q.to_tsv(QueryKind::Triple);
        let lines: Vec<&str> = tsv.lines().collect();
        let mut sorted = lines.clone();
        sorted.sort();
        assert_eq!(lines, sorted);
    }
}
