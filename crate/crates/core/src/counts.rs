//! Persistent count tables and count bucketing.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{self, BufRead, Write};

use thiserror::Error;

/// Default cutoff for syntactic n-gram tables.
pub const SYNTACTIC_CUTOFF: u64 = 10_000;
/// Default cutoff for surface n-gram tables.
pub const SURFACE_CUTOFF: u64 = 0;

const META_PREFIX: &str = "#meta";

#[derive(Debug, Error)]
pub enum CountError {
    #[error("negative frequency {0}")]
    NegativeFrequency(i64),
    #[error("tables differ in {field}: {left:?} vs {right:?}")]
    MetaMismatch {
        field: String,
        left: String,
        right: String,
    },
    #[error("missing #meta header {0:?}")]
    MissingMeta(&'static str),
    #[error("line {line}: duplicate key {key:?}")]
    DuplicateKey { line: usize, key: String },
    #[error("line {line}: key {key:?} is not in ascending order")]
    Unsorted { line: usize, key: String },
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// A bucketed count label: a non-negative multiple of 5.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BucketLabel(u32);

impl BucketLabel {
    pub fn new(value: u32) -> Option<Self> {
        value.is_multiple_of(5).then_some(BucketLabel(value))
    }

    pub fn value(self) -> u32 {
        self.0
    }
}

impl fmt::Display for BucketLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// `floor(log2(frequency) / 5) * 5`, computed on the integer bit length.
///
/// A zero frequency has no bucket at all (it is not bucket 0).
pub fn bucketize(frequency: u64) -> Option<BucketLabel> {
    if frequency == 0 {
        return None;
    }
    let floor_log2 = 63 - frequency.leading_zeros();
    Some(BucketLabel(floor_log2 / 5 * 5))
}

/// [`bucketize`] for signed inputs, rejecting negative frequencies.
pub fn bucketize_signed(frequency: i64) -> Result<Option<BucketLabel>, CountError> {
    u64::try_from(frequency)
        .map(bucketize)
        .map_err(|_| CountError::NegativeFrequency(frequency))
}

/// Every label from 0 up to and including `bucket`, ascending.
pub fn cumulative_buckets(bucket: BucketLabel) -> Vec<BucketLabel> {
    (0..=bucket.0).step_by(5).map(BucketLabel).collect()
}

/// Provenance of a table.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct TableMeta {
    /// Corpus identifier, e.g. "web1t", "books" or "syntactic".
    pub source: String,
    /// Hash of the scan configuration.
    pub config: String,
    /// Minimum count applied; 0 when no cutoff ran.
    pub cutoff: u64,
    pub extra: BTreeMap<String, String>,
}

impl TableMeta {
    pub fn new(source: &str, config: &str) -> Self {
        TableMeta {
            source: source.to_owned(),
            config: config.to_owned(),
            cutoff: 0,
            extra: BTreeMap::new(),
        }
    }
}

/// Key to count map, the run-time feature lookup store.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct CountTable {
    entries: BTreeMap<String, u64>,
    pub meta: TableMeta,
}

impl CountTable {
    pub fn new(meta: TableMeta) -> Self {
        CountTable {
            entries: BTreeMap::new(),
            meta,
        }
    }

    /// Build from (key, count) pairs, summing repeated keys. Zero counts are dropped.
    pub fn from_counts<I, K>(meta: TableMeta, counts: I) -> Self
    where
        I: IntoIterator<Item = (K, u64)>,
        K: Into<String>,
    {
        let mut table = CountTable::new(meta);
        for (key, count) in counts {
            table.add(key, count);
        }
        table
    }

    pub fn add<K: Into<String>>(&mut self, key: K, count: u64) {
        if count == 0 {
            return;
        }
        let key = key.into();
        debug_assert!(!key.contains(['\t', '\n']), "table keys cannot hold tabs or newlines");
        *self.entries.entry(key).or_insert(0) += count;
    }

    /// Count for `key`, 0 when absent.
    pub fn get(&self, key: &str) -> u64 {
        self.entries.get(key).copied().unwrap_or(0)
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u64)> {
        self.entries.iter().map(|(k, &v)| (k.as_str(), v))
    }
}

/// Remove entries below `min_count`; the boundary is kept.
pub fn apply_cutoff(table: &CountTable, min_count: u64) -> CountTable {
    let mut meta = table.meta.clone();
    meta.cutoff = min_count;
    CountTable {
        entries: table
            .entries
            .iter()
            .filter(|(_, &c)| c >= min_count)
            .map(|(k, &c)| (k.clone(), c))
            .collect(),
        meta,
    }
}

/// Key-wise sum of two shards of the same scan.
pub fn merge_tables(a: &CountTable, b: &CountTable) -> Result<CountTable, CountError> {
    let mismatch = |field: &str, left: &str, right: &str| CountError::MetaMismatch {
        field: field.to_owned(),
        left: left.to_owned(),
        right: right.to_owned(),
    };
    if a.meta.source != b.meta.source {
        return Err(mismatch("source", &a.meta.source, &b.meta.source));
    }
    if a.meta.config != b.meta.config {
        return Err(mismatch("config", &a.meta.config, &b.meta.config));
    }
    if a.meta.extra != b.meta.extra {
        return Err(mismatch("extra metadata", &format!("{:?}", a.meta.extra), &format!("{:?}", b.meta.extra)));
    }
    let mut merged = a.clone();
    merged.meta.cutoff = a.meta.cutoff.max(b.meta.cutoff);
    for (k, &c) in &b.entries {
        *merged.entries.entry(k.clone()).or_insert(0) += c;
    }
    Ok(merged)
}

/// Write "#meta" headers then "key<TAB>count" lines in byte order.
pub fn write_table<W: Write>(table: &CountTable, sink: &mut W) -> io::Result<()> {
    let meta = &table.meta;
    writeln!(sink, "{META_PREFIX}\tsource\t{}", meta.source)?;
    writeln!(sink, "{META_PREFIX}\tconfig\t{}", meta.config)?;
    writeln!(sink, "{META_PREFIX}\tcutoff\t{}", meta.cutoff)?;
    for (name, value) in &meta.extra {
        writeln!(sink, "{META_PREFIX}\t{name}\t{value}")?;
    }
    for (key, count) in &table.entries {
        writeln!(sink, "{key}\t{count}")?;
    }
    Ok(())
}

pub fn table_to_string(table: &CountTable) -> String {
    let mut buf = Vec::new();
    write_table(table, &mut buf).expect("writing to memory cannot fail");
    String::from_utf8(buf).expect("table content is UTF-8")
}

pub fn read_table<R: BufRead>(source: R) -> Result<CountTable, CountError> {
    let mut source_id = None;
    let mut config = None;
    let mut cutoff = None;
    let mut extra = BTreeMap::new();
    let mut entries = BTreeMap::new();
    let mut last_key: Option<String> = None;

    for (i, line) in source.lines().enumerate() {
        let line = line?;
        let line_no = i + 1;
        let malformed = |message: String| CountError::Malformed {
            line: line_no,
            message,
        };
        if let Some(rest) = line.strip_prefix(META_PREFIX) {
            if !entries.is_empty() {
                return Err(malformed("#meta header after table entries".to_owned()));
            }
            let mut parts = rest.strip_prefix('\t').unwrap_or("").splitn(2, '\t');
            let name = parts.next().unwrap_or("");
            let value = parts
                .next()
                .ok_or_else(|| malformed("#meta line needs a name and a value".to_owned()))?;
            let slot = match name {
                "source" => &mut source_id,
                "config" => &mut config,
                "cutoff" => {
                    let v: u64 = value
                        .parse()
                        .map_err(|_| malformed(format!("non-integer cutoff {value:?}")))?;
                    if cutoff.replace(v).is_some() {
                        return Err(malformed("duplicate cutoff header".to_owned()));
                    }
                    continue;
                }
                _ => {
                    if extra.insert(name.to_owned(), value.to_owned()).is_some() {
                        return Err(malformed(format!("duplicate header {name:?}")));
                    }
                    continue;
                }
            };
            if slot.replace(value.to_owned()).is_some() {
                return Err(malformed(format!("duplicate header {name:?}")));
            }
            continue;
        }
        let (key, count) = line
            .rsplit_once('\t')
            .ok_or_else(|| malformed("expected key<TAB>count".to_owned()))?;
        if key.is_empty() {
            return Err(malformed("empty key".to_owned()));
        }
        let count: u64 = count
            .parse()
            .map_err(|_| malformed(format!("malformed count {count:?}")))?;
        if let Some(prev) = &last_key {
            match prev.as_str().cmp(key) {
                std::cmp::Ordering::Equal => {
                    return Err(CountError::DuplicateKey {
                        line: line_no,
                        key: key.to_owned(),
                    })
                }
                std::cmp::Ordering::Greater => {
                    return Err(CountError::Unsorted {
                        line: line_no,
                        key: key.to_owned(),
                    })
                }
                std::cmp::Ordering::Less => {}
            }
        }
        last_key = Some(key.to_owned());
        entries.insert(key.to_owned(), count);
    }

    Ok(CountTable {
        entries,
        meta: TableMeta {
            source: source_id.ok_or(CountError::MissingMeta("source"))?,
            config: config.ok_or(CountError::MissingMeta("config"))?,
            cutoff: cutoff.ok_or(CountError::MissingMeta("cutoff"))?,
            extra,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn table(entries: &[(&str, u64)]) -> CountTable {
        CountTable::from_counts(TableMeta::new("test", "cfg"), entries.iter().map(|&(k, c)| (k, c)))
    }

    /// Independent reference: repeated halving.
    fn reference_bucket(f: u64) -> u32 {
        let mut log = 0;
        let mut x = f;
        while x > 1 {
            x /= 2;
            log += 1;
        }
        log / 5 * 5
    }

    #[test]
    fn bucket_examples() {
        assert_eq!(bucketize(1).unwrap().value(), 0);
        assert_eq!(bucketize(32).unwrap().value(), 5);
        assert_eq!(bucketize(15_000).unwrap().value(), 10);
        assert_eq!(bucketize(80_129_000).unwrap().value(), 25);
        assert_eq!(bucketize(0), None);
        assert!(matches!(bucketize_signed(-1), Err(CountError::NegativeFrequency(-1))));
        assert_eq!(bucketize_signed(31).unwrap().unwrap().value(), 0);
    }

    #[test]
    fn bucket_boundaries() {
        for k in 1..=12u32 {
            let p = 1u64 << (5 * k);
            assert_eq!(bucketize(p).unwrap().value(), 5 * k);
            assert_eq!(bucketize(p - 1).unwrap().value(), 5 * (k - 1));
        }
    }

    #[test]
    fn cumulative() {
        let vals = |b: u32| cumulative_buckets(BucketLabel::new(b).unwrap()).iter().map(|l| l.value()).collect::<Vec<_>>();
        assert_eq!(vals(0), vec![0]);
        assert_eq!(vals(10), vec![0, 5, 10]);
        assert_eq!(vals(25).len(), 6);
        assert!(BucketLabel::new(3).is_none());
    }

    #[test]
    fn cutoff_is_inclusive() {
        let t = table(&[("k1", 9999), ("k2", 10_000)]);
        let cut = apply_cutoff(&t, 10_000);
        assert_eq!(cut.iter().collect::<Vec<_>>(), vec![("k2", 10_000)]);
        assert_eq!(cut.meta.cutoff, 10_000);
        assert_eq!(apply_cutoff(&t, 0).iter().count(), 2);
        assert!(apply_cutoff(&table(&[]), 10).is_empty());
    }

    #[test]
    fn cutoff_must_follow_full_merge() {
        // each shard alone is below the cutoff; only the merged count passes
        let a = table(&[("k", 6000)]);
        let b = table(&[("k", 6000)]);
        let merged_then_cut = apply_cutoff(&merge_tables(&a, &b).unwrap(), 10_000);
        let cut_then_merged = merge_tables(&apply_cutoff(&a, 10_000), &apply_cutoff(&b, 10_000)).unwrap();
        assert_eq!(merged_then_cut.get("k"), 12_000);
        assert_eq!(cut_then_merged.get("k"), 0);
    }

    #[test]
    fn merge_examples() {
        assert_eq!(merge_tables(&table(&[("k", 3)]), &table(&[("k", 4)])).unwrap().get("k"), 7);
        let u = merge_tables(&table(&[("a", 1)]), &table(&[("b", 2)])).unwrap();
        assert_eq!(u.len(), 2);
        let other = CountTable::from_counts(TableMeta::new("other", "cfg"), [("k", 1)]);
        assert!(matches!(merge_tables(&table(&[]), &other), Err(CountError::MetaMismatch { .. })));
    }

    #[test]
    fn read_errors() {
        let header = "#meta\tsource\tx\n#meta\tconfig\tc\n#meta\tcutoff\t0\n";
        assert!(matches!(
            read_table(format!("{header}a\t1\na\t2\n").as_bytes()),
            Err(CountError::DuplicateKey { line: 5, .. })
        ));
        assert!(matches!(
            read_table(format!("{header}b\t1\na\t2\n").as_bytes()),
            Err(CountError::Unsorted { line: 5, .. })
        ));
        assert!(matches!(
            read_table(format!("{header}a\tx\n").as_bytes()),
            Err(CountError::Malformed { line: 4, .. })
        ));
        assert!(matches!(
            read_table("#meta\tsource\tx\n#meta\tcutoff\t0\na\t1\n".as_bytes()),
            Err(CountError::MissingMeta("config"))
        ));
        assert!(matches!(read_table("a\t1\n".as_bytes()), Err(CountError::MissingMeta(_))));
    }

    #[test]
    fn keys_with_spaces_round_trip() {
        let mut t = table(&[("contig hold hearing", 12), ("gap1 hold hearing", 7)]);
        t.meta.extra.insert("command".into(), "scan --kind web1t".into());
        let text = table_to_string(&t);
        let back = read_table(text.as_bytes()).unwrap();
        assert_eq!(back, t);
        assert_eq!(table_to_string(&back), text);
    }

    proptest! {
        #[test]
        fn bucket_matches_reference(f in 1u64..(1 << 40)) {
            prop_assert_eq!(bucketize(f).unwrap().value(), reference_bucket(f));
        }

        #[test]
        fn bucket_monotone(a in 1u64..u64::MAX, b in 1u64..u64::MAX) {
            let (lo, hi) = (a.min(b), a.max(b));
            prop_assert!(bucketize(lo) <= bucketize(hi));
        }

        #[test]
        fn merge_commutative_associative(
            a in prop::collection::btree_map("[a-e]{1,2}", 1u64..100, 0..8),
            b in prop::collection::btree_map("[a-e]{1,2}", 1u64..100, 0..8),
            c in prop::collection::btree_map("[a-e]{1,2}", 1u64..100, 0..8),
        ) {
            let mk = |m: &BTreeMap<String, u64>| CountTable::from_counts(TableMeta::new("s", "h"), m.clone());
            let (ta, tb, tc) = (mk(&a), mk(&b), mk(&c));
            prop_assert_eq!(merge_tables(&ta, &tb).unwrap(), merge_tables(&tb, &ta).unwrap());
            let left = merge_tables(&merge_tables(&ta, &tb).unwrap(), &tc).unwrap();
            let right = merge_tables(&ta, &merge_tables(&tb, &tc).unwrap()).unwrap();
            prop_assert_eq!(left, right);
        }
    }
}
