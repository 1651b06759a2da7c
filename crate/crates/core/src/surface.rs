//! Streaming scans of surface n-gram corpora (Web1T and Google Books formats).
//!
//! Matching is exact and case-sensitive. A wildcard matches exactly one token
//! of any kind, and a pattern is counted at every offset where it matches
//! inside an n-gram.

use std::collections::{BTreeMap, HashMap};
use std::io::BufRead;
use std::ops::AddAssign;

use thiserror::Error;

use crate::counts::{CountTable, TableMeta};
use crate::paraphrase::{ParaphraseHarvest, Slot};
use crate::query::{keys, AffinityPattern, QueryKind, QuerySet};

/// Longest n-gram in either corpus.
pub const MAX_NGRAM: usize = 5;

/// Offsets of the second and third word for the six triple configurations:
/// (q1 q2 q3), (q1 * q2 q3), (q1 q2 * q3), (q1 * q2 * q3), (q1 * * q2 q3), (q1 q2 * * q3).
const TRIPLE_CONFIGS: [(usize, usize); 6] = [(1, 2), (2, 3), (1, 3), (2, 4), (3, 4), (1, 4)];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NgramRecord {
    pub tokens: Vec<String>,
    pub count: u64,
}

impl NgramRecord {
    pub fn new(tokens: &[&str], count: u64) -> Self {
        NgramRecord {
            tokens: tokens.iter().map(|t| (*t).to_owned()).collect(),
            count,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RecordError {
    #[error("missing tab separator")]
    MissingTab,
    #[error("expected {expected} tab-separated columns, found {found}")]
    Columns { expected: usize, found: usize },
    #[error("non-integer {field} {value:?}")]
    BadInteger { field: &'static str, value: String },
    #[error("n-gram has {0} tokens, at most 5 allowed")]
    TooManyTokens(usize),
    #[error("empty token in n-gram")]
    EmptyToken,
}

fn split_tokens(ngram: &str) -> Result<Vec<String>, RecordError> {
    let tokens: Vec<String> = ngram.split(' ').map(str::to_owned).collect();
    if tokens.iter().any(String::is_empty) {
        return Err(RecordError::EmptyToken);
    }
    if tokens.len() > MAX_NGRAM {
        return Err(RecordError::TooManyTokens(tokens.len()));
    }
    Ok(tokens)
}

fn parse_int<T: std::str::FromStr>(field: &'static str, value: &str) -> Result<T, RecordError> {
    value.parse().map_err(|_| RecordError::BadInteger {
        field,
        value: value.to_owned(),
    })
}

/// Parse "w1 w2 ... wk<TAB>count".
pub fn parse_web1t_line(line: &str) -> Result<NgramRecord, RecordError> {
    let (ngram, count) = line.split_once('\t').ok_or(RecordError::MissingTab)?;
    Ok(NgramRecord {
        tokens: split_tokens(ngram)?,
        count: parse_int("count", count)?,
    })
}

/// Parse "ngram<TAB>year<TAB>match_count<TAB>volume_count"; the volume count
/// is discarded.
pub fn parse_books_line(line: &str) -> Result<(NgramRecord, i32), RecordError> {
    let cols: Vec<&str> = line.split('\t').collect();
    if cols.len() == 1 {
        return Err(RecordError::MissingTab);
    }
    if cols.len() != 4 {
        return Err(RecordError::Columns {
            expected: 4,
            found: cols.len(),
        });
    }
    let year = parse_int("year", cols[1])?;
    let count = parse_int("match_count", cols[2])?;
    let _: u64 = parse_int("volume_count", cols[3])?;
    Ok((
        NgramRecord {
            tokens: split_tokens(cols[0])?,
            count,
        },
        year,
    ))
}

/// Occurrences of a word pair with 0-3 intervening words.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct AffinityCounts {
    pub contig: u64,
    pub gap1: u64,
    pub gap2: u64,
    pub gap3: u64,
}

impl AffinityCounts {
    pub fn total(&self) -> u64 {
        self.contig + self.gap1 + self.gap2 + self.gap3
    }

    pub fn get(&self, pattern: AffinityPattern) -> u64 {
        match pattern {
            AffinityPattern::Contig => self.contig,
            AffinityPattern::Gap1 => self.gap1,
            AffinityPattern::Gap2 => self.gap2,
            AffinityPattern::Gap3 => self.gap3,
        }
    }

    fn slot_mut(&mut self, gap: usize) -> &mut u64 {
        match gap {
            0 => &mut self.contig,
            1 => &mut self.gap1,
            2 => &mut self.gap2,
            _ => &mut self.gap3,
        }
    }

    /// Counts recorded under the affinity keys of `(q1, q2)` in `table`.
    pub fn from_table(table: &CountTable, q1: &str, q2: &str) -> Self {
        let mut counts = AffinityCounts::default();
        for pattern in AffinityPattern::ALL {
            *counts.slot_mut(pattern.gap()) = table.get(&keys::affinity(pattern, q1, q2));
        }
        counts
    }
}

impl AddAssign for AffinityCounts {
    fn add_assign(&mut self, rhs: Self) {
        self.contig += rhs.contig;
        self.gap1 += rhs.gap1;
        self.gap2 += rhs.gap2;
        self.gap3 += rhs.gap3;
    }
}

/// Surface queries in linear order, indexed by first word.
#[derive(Clone, Debug, Default)]
pub struct SurfaceQueries {
    pairs: Vec<(String, String)>,
    triples: Vec<[String; 3]>,
    pair_ids: HashMap<(String, String), usize>,
    pairs_by_first: HashMap<String, Vec<usize>>,
    triples_by_first: HashMap<String, Vec<usize>>,
}

impl SurfaceQueries {
    pub fn new<P, T>(pairs: P, triples: T) -> Self
    where
        P: IntoIterator<Item = (String, String)>,
        T: IntoIterator<Item = [String; 3]>,
    {
        let mut q = SurfaceQueries::default();
        for pair in pairs {
            if q.pair_ids.contains_key(&pair) {
                continue;
            }
            let id = q.pairs.len();
            q.pairs_by_first.entry(pair.0.clone()).or_default().push(id);
            q.pair_ids.insert(pair.clone(), id);
            q.pairs.push(pair);
        }
        let mut seen = std::collections::HashSet::new();
        for triple in triples {
            if !seen.insert(triple.clone()) {
                continue;
            }
            let id = q.triples.len();
            q.triples_by_first.entry(triple[0].clone()).or_default().push(id);
            q.triples.push(triple);
        }
        q
    }

    /// Arc and sibling rows become linear-order pairs; triple rows become
    /// linear-order triples.
    pub fn from_query_set(set: &QuerySet) -> Self {
        let pairs = set
            .rows()
            .filter(|r| r.kind != QueryKind::Triple)
            .map(|r| {
                let f = r.linear_forms();
                (f[0].to_owned(), f[1].to_owned())
            });
        let triples = set.of_kind(QueryKind::Triple).map(|r| {
            let f = r.linear_forms();
            [f[0].to_owned(), f[1].to_owned(), f[2].to_owned()]
        });
        SurfaceQueries::new(pairs.collect::<Vec<_>>(), triples.collect::<Vec<_>>())
    }

    pub fn pairs(&self) -> &[(String, String)] {
        &self.pairs
    }

    pub fn triples(&self) -> &[[String; 3]] {
        &self.triples
    }

    pub fn new_accumulator(&self) -> SurfaceAccumulator {
        SurfaceAccumulator {
            affinity: vec![AffinityCounts::default(); self.pairs.len()],
            triples: vec![0; self.triples.len()],
            paraphrase: HashMap::new(),
        }
    }

    /// Add one record's contributions to `acc`.
    pub fn scan_record(&self, record: &NgramRecord, acc: &mut SurfaceAccumulator) {
        let t = &record.tokens;
        let n = t.len();
        for i in 0..n {
            if let Some(ids) = self.pairs_by_first.get(&t[i]) {
                for &id in ids {
                    let q2 = &self.pairs[id].1;
                    for gap in 0..=3 {
                        let j = i + gap + 1;
                        if j < n && &t[j] == q2 {
                            *acc.affinity[id].slot_mut(gap) += record.count;
                        }
                    }
                }
            }
            if let Some(ids) = self.triples_by_first.get(&t[i]) {
                for &id in ids {
                    let [_, q2, q3] = &self.triples[id];
                    for (a, b) in TRIPLE_CONFIGS {
                        if i + b < n && &t[i + a] == q2 && &t[i + b] == q3 {
                            acc.triples[id] += record.count;
                        }
                    }
                }
            }
        }
        if n == 3 {
            let windows = [
                (1, 2, 0, Slot::Before),
                (0, 2, 1, Slot::Mid),
                (0, 1, 2, Slot::After),
            ];
            for (q1, q2, ctx, slot) in windows {
                // avoid allocating a key for every window
                if let Some(ids) = self.pairs_by_first.get(&t[q1]) {
                    if let Some(&id) = ids.iter().find(|&&id| self.pairs[id].1 == t[q2]) {
                        let slots = acc.paraphrase.entry(id).or_default();
                        *slots[slot as usize].entry(t[ctx].clone()).or_insert(0) += record.count;
                    }
                }
            }
        }
    }
}

/// Per-shard scan state; shards merge by field-wise sums.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SurfaceAccumulator {
    affinity: Vec<AffinityCounts>,
    triples: Vec<u64>,
    paraphrase: HashMap<usize, [BTreeMap<String, u64>; 3]>,
}

impl SurfaceAccumulator {
    /// Merge another shard scanned against the same queries.
    pub fn merge(&mut self, other: SurfaceAccumulator) {
        assert_eq!(self.affinity.len(), other.affinity.len(), "shards scanned different queries");
        for (a, b) in self.affinity.iter_mut().zip(other.affinity) {
            *a += b;
        }
        for (a, b) in self.triples.iter_mut().zip(other.triples) {
            *a += b;
        }
        for (id, slots) in other.paraphrase {
            let mine = self.paraphrase.entry(id).or_default();
            for (dst, src) in mine.iter_mut().zip(slots) {
                for (w, c) in src {
                    *dst.entry(w).or_insert(0) += c;
                }
            }
        }
    }

    pub fn affinity(&self, queries: &SurfaceQueries) -> BTreeMap<(String, String), AffinityCounts> {
        queries.pairs.iter().cloned().zip(self.affinity.iter().copied()).collect()
    }

    pub fn triple_counts(&self, queries: &SurfaceQueries) -> BTreeMap<[String; 3], u64> {
        queries.triples.iter().cloned().zip(self.triples.iter().copied()).collect()
    }

    pub fn paraphrase(&self, queries: &SurfaceQueries) -> ParaphraseHarvest {
        let mut harvest = ParaphraseHarvest::new();
        for (&id, slots) in &self.paraphrase {
            let (q1, q2) = &queries.pairs[id];
            let key = keys::pair(q1, q2);
            for slot in Slot::ALL {
                for (w, &c) in &slots[slot as usize] {
                    harvest.add(&key, slot, w, c);
                }
            }
        }
        harvest
    }

    /// Count table with the four affinity keys per pair and one key per triple.
    pub fn to_table(&self, queries: &SurfaceQueries, meta: TableMeta) -> CountTable {
        let mut table = CountTable::new(meta);
        for ((q1, q2), counts) in queries.pairs.iter().zip(&self.affinity) {
            for pattern in AffinityPattern::ALL {
                table.add(keys::affinity(pattern, q1, q2), counts.get(pattern));
            }
        }
        for ([q1, q2, q3], &count) in queries.triples.iter().zip(&self.triples) {
            table.add(keys::surface_triple(q1, q2, q3), count);
        }
        table
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CorpusFormat {
    Web1T,
    Books,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ScanStats {
    pub records: u64,
    pub malformed: u64,
}

impl AddAssign for ScanStats {
    fn add_assign(&mut self, rhs: Self) {
        self.records += rhs.records;
        self.malformed += rhs.malformed;
    }
}

#[derive(Debug, Error)]
pub enum ScanError {
    #[error("line {line}: {source}")]
    Record { line: usize, source: RecordError },
    #[error("line {line}: {message}")]
    Syntactic { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Stream a corpus file. Malformed lines are counted and skipped, or fail
/// the scan when `strict`.
pub fn scan_lines<R: BufRead>(
    reader: R,
    format: CorpusFormat,
    queries: &SurfaceQueries,
    acc: &mut SurfaceAccumulator,
    strict: bool,
) -> Result<ScanStats, ScanError> {
    let mut stats = ScanStats::default();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let parsed = match format {
            CorpusFormat::Web1T => parse_web1t_line(&line),
            CorpusFormat::Books => parse_books_line(&line).map(|(r, _)| r),
        };
        match parsed {
            Ok(record) => {
                stats.records += 1;
                queries.scan_record(&record, acc);
            }
            Err(source) if strict => return Err(ScanError::Record { line: i + 1, source }),
            Err(_) => stats.malformed += 1,
        }
    }
    Ok(stats)
}

/// Affinity counts for each `(q1, q2)` pair in linear order.
pub fn scan_affinity<'a, I>(records: I, pairs: &[(String, String)]) -> BTreeMap<(String, String), AffinityCounts>
where
    I: IntoIterator<Item = &'a NgramRecord>,
{
    let queries = SurfaceQueries::new(pairs.to_vec(), Vec::new());
    let mut acc = queries.new_accumulator();
    for r in records {
        queries.scan_record(r, &mut acc);
    }
    acc.affinity(&queries)
}

/// Summed counts of each linear-order triple over the six configurations.
pub fn scan_triple_counts<'a, I>(records: I, triples: &[[String; 3]]) -> BTreeMap<[String; 3], u64>
where
    I: IntoIterator<Item = &'a NgramRecord>,
{
    let queries = SurfaceQueries::new(Vec::new(), triples.to_vec());
    let mut acc = queries.new_accumulator();
    for r in records {
        queries.scan_record(r, &mut acc);
    }
    acc.triple_counts(&queries)
}

/// Context words of 3-gram records (* q1 q2), (q1 * q2) and (q1 q2 *).
pub fn scan_paraphrase<'a, I>(records: I, pairs: &[(String, String)]) -> ParaphraseHarvest
where
    I: IntoIterator<Item = &'a NgramRecord>,
{
    let queries = SurfaceQueries::new(pairs.to_vec(), Vec::new());
    let mut acc = queries.new_accumulator();
    for r in records {
        queries.scan_record(r, &mut acc);
    }
    acc.paraphrase(&queries)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(a: &str, b: &str) -> (String, String) {
        (a.to_owned(), b.to_owned())
    }

    #[test]
    fn web1t_lines() {
        assert_eq!(parse_web1t_line("hold a hearing\t42").unwrap(), NgramRecord::new(&["hold", "a", "hearing"], 42));
        assert_eq!(parse_web1t_line("hold\t200").unwrap().tokens.len(), 1);
        assert_eq!(parse_web1t_line("a b c d e f\t9"), Err(RecordError::TooManyTokens(6)));
        assert_eq!(parse_web1t_line("a b"), Err(RecordError::MissingTab));
        assert!(matches!(parse_web1t_line("a b\tx"), Err(RecordError::BadInteger { .. })));
        assert_eq!(parse_web1t_line("a  b\t1"), Err(RecordError::EmptyToken));
    }

    #[test]
    fn books_lines() {
        let (r, year) = parse_books_line("hold a hearing\t1999\t12\t7").unwrap();
        assert_eq!((r.count, year), (12, 1999));
        assert!(matches!(parse_books_line("hold a hearing\t19x9\t12\t7"), Err(RecordError::BadInteger { field: "year", .. })));
        assert!(matches!(parse_books_line("hold\t1999\t12"), Err(RecordError::Columns { .. })));
    }

    #[test]
    fn books_years_sum_downstream() {
        let lines = "hold hearing\t1999\t12\t7\nhold hearing\t2000\t30\t9\n";
        let q = SurfaceQueries::new(vec![pair("hold", "hearing")], vec![]);
        let mut acc = q.new_accumulator();
        scan_lines(lines.as_bytes(), CorpusFormat::Books, &q, &mut acc, true).unwrap();
        assert_eq!(acc.affinity(&q)[&pair("hold", "hearing")].contig, 42);
    }

    fn corpus() -> Vec<NgramRecord> {
        vec![
            NgramRecord::new(&["hold", "hearing"], 12),
            NgramRecord::new(&["hold", "a", "hearing"], 7),
            NgramRecord::new(&["hold", "a", "public", "hearing"], 3),
            NgramRecord::new(&["hold", "a", "very", "public", "hearing"], 2),
        ]
    }

    #[test]
    fn affinity_example() {
        let out = scan_affinity(&corpus(), &[pair("hold", "hearing"), pair("hearing", "hold")]);
        assert_eq!(out[&pair("hold", "hearing")], AffinityCounts { contig: 12, gap1: 7, gap2: 3, gap3: 2 });
        assert_eq!(out[&pair("hearing", "hold")], AffinityCounts::default());
        let rep = scan_affinity(&[NgramRecord::new(&["hold", "hold", "hearing"], 5)], &[pair("hold", "hearing")]);
        assert_eq!(rep[&pair("hold", "hearing")], AffinityCounts { contig: 5, gap1: 5, gap2: 0, gap3: 0 });
    }

    #[test]
    fn triple_example() {
        let triple = ["hold".to_owned(), "hearing".to_owned(), "Tuesday".to_owned()];
        let recs = vec![
            NgramRecord::new(&["hold", "hearing", "Tuesday"], 4),
            NgramRecord::new(&["hold", "a", "hearing", "Tuesday"], 2),
            NgramRecord::new(&["hold", "hearing", "next", "Tuesday"], 1),
        ];
        assert_eq!(scan_triple_counts(&recs, std::slice::from_ref(&triple))[&triple], 7);
        let gapped = vec![NgramRecord::new(&["hold", "a", "hearing", "on", "Tuesday"], 3)];
        assert_eq!(scan_triple_counts(&gapped, std::slice::from_ref(&triple))[&triple], 3);
        assert_eq!(scan_triple_counts(&corpus(), std::slice::from_ref(&triple))[&triple], 0);
    }

    #[test]
    fn paraphrase_example() {
        let recs = vec![
            NgramRecord::new(&["hold", "public", "hearing"], 9),
            NgramRecord::new(&["hold", "a", "hearing"], 7),
            NgramRecord::new(&["will", "hold", "hearing"], 4),
            NgramRecord::new(&["hold", "hearing", "today"], 5),
        ];
        let h = scan_paraphrase(&recs, &[pair("hold", "hearing")]);
        let mid = h.slot("hold hearing", Slot::Mid).unwrap();
        assert_eq!(mid.len(), 2);
        assert_eq!((mid["public"], mid["a"]), (9, 7));
        assert_eq!(h.slot("hold hearing", Slot::Before).unwrap()["will"], 4);
        assert_eq!(h.slot("hold hearing", Slot::After).unwrap()["today"], 5);
        let lists = crate::paraphrase::finalize_paraphrase(&h, 20, 5);
        assert_eq!(lists.get("hold hearing", Slot::Mid)[0].0, "public");
        assert!(scan_paraphrase(&recs, &[pair("absent", "query")]).is_empty());
    }

    #[test]
    fn lenient_and_strict_modes() {
        let q = SurfaceQueries::new(vec![pair("a", "b")], vec![]);
        let text = "a b\t3\nbroken line\na b\t2\n";
        let mut acc = q.new_accumulator();
        let stats = scan_lines(text.as_bytes(), CorpusFormat::Web1T, &q, &mut acc, false).unwrap();
        assert_eq!(stats, ScanStats { records: 2, malformed: 1 });
        assert_eq!(acc.affinity(&q)[&pair("a", "b")].contig, 5);
        let mut acc = q.new_accumulator();
        assert!(matches!(
            scan_lines(text.as_bytes(), CorpusFormat::Web1T, &q, &mut acc, true),
            Err(ScanError::Record { line: 2, .. })
        ));
    }

    #[test]
    fn table_keys() {
        let q = SurfaceQueries::new(
            vec![pair("hold", "hearing")],
            vec![["hold".to_owned(), "hearing".to_owned(), "Tuesday".to_owned()]],
        );
        let mut acc = q.new_accumulator();
        for r in corpus() {
            q.scan_record(&r, &mut acc);
        }
        let table = acc.to_table(&q, TableMeta::new("web1t", "x"));
        assert_eq!(table.get("contig hold hearing"), 12);
        assert_eq!(table.get("gap3 hold hearing"), 2);
        assert!(!table.contains("triple hold hearing Tuesday"));
        assert_eq!(AffinityCounts::from_table(&table, "hold", "hearing").total(), 24);
    }
}
