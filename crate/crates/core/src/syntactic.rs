//! Scans of syntactic n-gram corpora: counted dependency fragments.

use std::collections::{HashMap, HashSet};
use std::io::BufRead;

use thiserror::Error;

use crate::conll::{validate_heads, TreeError};
use crate::counts::{CountTable, TableMeta};
use crate::paraphrase::{ParaphraseHarvest, Slot};
use crate::query::{keys, lookup_keys_for, Direction, QueryKind, QuerySet, SyntacticKind, Variant};
use crate::surface::{ScanError, ScanStats};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SynToken {
    pub form: String,
    pub fpos: String,
    pub deplabel: String,
    /// Position of the head within the fragment, 0 for the fragment root.
    pub head_index: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SyntacticNgramRecord {
    pub head_word: String,
    pub tokens: Vec<SynToken>,
    pub total_count: u64,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SynRecordError {
    #[error("expected at least 3 tab-separated columns, found {0}")]
    Columns(usize),
    #[error("token {0:?} is not form/tag/label/head")]
    Token(String),
    #[error("non-integer {field} {value:?}")]
    BadInteger { field: &'static str, value: String },
    #[error("empty fragment")]
    Empty,
    #[error(transparent)]
    Tree(#[from] TreeError),
}

fn parse_token(raw: &str) -> Result<SynToken, SynRecordError> {
    // the form may itself contain '/', so split from the right
    let mut parts = raw.rsplitn(4, '/');
    let (Some(head), Some(deplabel), Some(fpos), Some(form)) = (parts.next(), parts.next(), parts.next(), parts.next())
    else {
        return Err(SynRecordError::Token(raw.to_owned()));
    };
    if form.is_empty() || fpos.is_empty() {
        return Err(SynRecordError::Token(raw.to_owned()));
    }
    let head_index = head.parse().map_err(|_| SynRecordError::BadInteger {
        field: "head index",
        value: head.to_owned(),
    })?;
    Ok(SynToken {
        form: form.to_owned(),
        fpos: fpos.to_owned(),
        deplabel: deplabel.to_owned(),
        head_index,
    })
}

/// Parse "head_word<TAB>fragment<TAB>total_count<TAB>year,count...".
pub fn parse_syngram_line(line: &str) -> Result<SyntacticNgramRecord, SynRecordError> {
    let cols: Vec<&str> = line.split('\t').collect();
    if cols.len() < 3 {
        return Err(SynRecordError::Columns(cols.len()));
    }
    if cols[1].is_empty() {
        return Err(SynRecordError::Empty);
    }
    let tokens = cols[1].split(' ').map(parse_token).collect::<Result<Vec<_>, _>>()?;
    let heads: Vec<usize> = tokens.iter().map(|t| t.head_index).collect();
    validate_heads(&heads, true)?;
    let total_count = cols[2].parse().map_err(|_| SynRecordError::BadInteger {
        field: "total count",
        value: cols[2].to_owned(),
    })?;
    Ok(SyntacticNgramRecord {
        head_word: cols[0].to_owned(),
        tokens,
        total_count,
    })
}

/// (head, argument) positions, 1-based, sorted by head then argument.
pub fn record_arcs(record: &SyntacticNgramRecord) -> Vec<(usize, usize)> {
    let mut arcs: Vec<(usize, usize)> = record
        .tokens
        .iter()
        .enumerate()
        .filter(|(_, t)| t.head_index != 0)
        .map(|(i, t)| (t.head_index, i + 1))
        .collect();
    arcs.sort_unstable();
    arcs
}

/// How the unary word and tag lookups fire.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum UnaryMode {
    /// "X (head)" only for the head of an arc, "X (arg)" only for its argument.
    #[default]
    RoleRestricted,
    /// Both unary keys fire for either endpoint of an arc.
    AnyOccurrence,
}

/// Syntactic lookup keys derived from a query set.
#[derive(Clone, Debug, Default)]
pub struct SyntacticQueries {
    first_order: HashSet<String>,
    second_order: HashSet<String>,
    role_pairs: HashSet<String>,
    pub unary_mode: UnaryMode,
}

impl SyntacticQueries {
    pub fn from_query_set(set: &QuerySet) -> Self {
        let mut q = SyntacticQueries::default();
        for row in set.of_kind(QueryKind::Arc) {
            q.first_order.extend(row.syntactic_keys());
            q.role_pairs.insert(keys::role_pair(&row.forms[0], &row.forms[1], row.direction));
        }
        for row in set.of_kind(QueryKind::Triple) {
            let f = row.linear_forms();
            let p = row.linear_fposes();
            q.second_order.insert(keys::syntactic_triple(Variant::Word, row.direction, [f[0], f[1], f[2]]));
            q.second_order.insert(keys::syntactic_triple(Variant::Pos, row.direction, [p[0], p[1], p[2]]));
        }
        for row in set.of_kind(QueryKind::Sibling) {
            let f = row.linear_forms();
            let p = row.linear_fposes();
            q.second_order.insert(keys::syntactic_sibling(Variant::Word, f[0], f[1]));
            q.second_order.insert(keys::syntactic_sibling(Variant::Pos, p[0], p[1]));
        }
        q
    }

    pub fn with_unary_mode(mut self, mode: UnaryMode) -> Self {
        self.unary_mode = mode;
        self
    }

    pub fn first_order_keys(&self) -> &HashSet<String> {
        &self.first_order
    }

    pub fn second_order_keys(&self) -> &HashSet<String> {
        &self.second_order
    }

    pub fn new_accumulator(&self) -> SyntacticAccumulator {
        SyntacticAccumulator::default()
    }

    pub fn scan_record(&self, record: &SyntacticNgramRecord, acc: &mut SyntacticAccumulator) {
        accumulate_first_order(record, &self.first_order, self.unary_mode, &mut acc.counts);
        accumulate_second_order(record, &self.second_order, &mut acc.counts);
        harvest_syntactic_paraphrase(record, &self.role_pairs, &mut acc.words, &mut acc.tags);
    }
}

/// Every lookup key instantiated by the arcs of a record, with multiplicity.
pub fn first_order_instances(record: &SyntacticNgramRecord, mode: UnaryMode) -> Vec<String> {
    let t = &record.tokens;
    let mut out = Vec::new();
    for (h, a) in record_arcs(record) {
        let (head, arg) = (&t[h - 1], &t[a - 1]);
        let direction = Direction::of(h, a);
        for key in lookup_keys_for(&head.form, &head.fpos, &arg.form, &arg.fpos, direction) {
            out.push(key.to_key_string());
        }
        if mode == UnaryMode::AnyOccurrence {
            // the mirrored unary keys: arg as "(head)", head as "(arg)"
            out.push(format!("{} {}", SyntacticKind::HeadWord.name(), arg.form));
            out.push(format!("{} {}", SyntacticKind::ArgWord.name(), head.form));
            out.push(format!("{} {}", SyntacticKind::HeadPos.name(), arg.fpos));
            out.push(format!("{} {}", SyntacticKind::ArgPos.name(), head.fpos));
        }
    }
    out
}

/// Add the record count to each instantiated first-order key in `keys`.
pub fn accumulate_first_order(
    record: &SyntacticNgramRecord,
    keys: &HashSet<String>,
    mode: UnaryMode,
    table: &mut HashMap<String, u64>,
) {
    for key in first_order_instances(record, mode) {
        if keys.contains(&key) {
            *table.entry(key).or_insert(0) += record.total_count;
        }
    }
}

/// Triple and sibling keys instantiated by a record: every pair of children
/// of one parent, in linear order. Triples need both children on one side.
pub fn second_order_instances(record: &SyntacticNgramRecord) -> Vec<String> {
    let t = &record.tokens;
    let n = t.len();
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); n + 1];
    for (h, a) in record_arcs(record) {
        children[h].push(a);
    }
    let mut out = Vec::new();
    for (p, kids) in children.iter().enumerate().skip(1) {
        for (i, &l) in kids.iter().enumerate() {
            for &r in &kids[i + 1..] {
                let (tl, tr, tp) = (&t[l - 1], &t[r - 1], &t[p - 1]);
                out.push(keys::syntactic_sibling(Variant::Word, &tl.form, &tr.form));
                out.push(keys::syntactic_sibling(Variant::Pos, &tl.fpos, &tr.fpos));
                if p < l {
                    let side = Direction::HeadLeft;
                    out.push(keys::syntactic_triple(Variant::Word, side, [&tp.form, &tl.form, &tr.form]));
                    out.push(keys::syntactic_triple(Variant::Pos, side, [&tp.fpos, &tl.fpos, &tr.fpos]));
                } else if p > r {
                    let side = Direction::HeadRight;
                    out.push(keys::syntactic_triple(Variant::Word, side, [&tl.form, &tr.form, &tp.form]));
                    out.push(keys::syntactic_triple(Variant::Pos, side, [&tl.fpos, &tr.fpos, &tp.fpos]));
                }
            }
        }
    }
    out
}

pub fn accumulate_second_order(record: &SyntacticNgramRecord, keys: &HashSet<String>, table: &mut HashMap<String, u64>) {
    for key in second_order_instances(record) {
        if keys.contains(&key) {
            *table.entry(key).or_insert(0) += record.total_count;
        }
    }
}

/// For each arc whose role pair is queried, tally every other fragment token
/// by its position relative to the arc endpoints.
pub fn harvest_syntactic_paraphrase(
    record: &SyntacticNgramRecord,
    role_pairs: &HashSet<String>,
    words: &mut ParaphraseHarvest,
    tags: &mut ParaphraseHarvest,
) {
    let t = &record.tokens;
    for (h, a) in record_arcs(record) {
        let key = keys::role_pair(&t[h - 1].form, &t[a - 1].form, Direction::of(h, a));
        if !role_pairs.contains(&key) {
            continue;
        }
        let (lo, hi) = (h.min(a), h.max(a));
        for (i, tok) in t.iter().enumerate() {
            let pos = i + 1;
            let slot = if pos < lo {
                Slot::Before
            } else if pos > hi {
                Slot::After
            } else if pos > lo && pos < hi {
                Slot::Mid
            } else {
                continue;
            };
            words.add(&key, slot, &tok.form, record.total_count);
            tags.add(&key, slot, &tok.fpos, record.total_count);
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SyntacticAccumulator {
    pub counts: HashMap<String, u64>,
    pub words: ParaphraseHarvest,
    pub tags: ParaphraseHarvest,
}

impl SyntacticAccumulator {
    pub fn merge(&mut self, other: SyntacticAccumulator) {
        for (k, c) in other.counts {
            *self.counts.entry(k).or_insert(0) += c;
        }
        self.words.merge(other.words);
        self.tags.merge(other.tags);
    }

    /// Raw counts; the frequency cutoff is applied by the caller.
    pub fn to_table(&self, meta: TableMeta) -> CountTable {
        CountTable::from_counts(meta, self.counts.iter().map(|(k, &c)| (k.clone(), c)))
    }
}

pub fn scan_syngram_lines<R: BufRead>(
    reader: R,
    queries: &SyntacticQueries,
    acc: &mut SyntacticAccumulator,
    strict: bool,
) -> Result<ScanStats, ScanError> {
    let mut stats = ScanStats::default();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        match parse_syngram_line(&line) {
            Ok(record) => {
                stats.records += 1;
                queries.scan_record(&record, acc);
            }
            Err(e) if strict => {
                return Err(ScanError::Syntactic {
                    line: i + 1,
                    message: e.to_string(),
                })
            }
            Err(_) => stats.malformed += 1,
        }
    }
    Ok(stats)
}
