//! Context-word harvests for paraphrase-style features.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{self, BufRead, Write};
use std::str::FromStr;

use thiserror::Error;

/// Number of context words kept between the query words.
pub const TOP_MID: usize = 20;
/// Number of context words kept before and after the query words.
pub const TOP_EDGE: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Slot {
    Before,
    Mid,
    After,
}

impl Slot {
    pub const ALL: [Slot; 3] = [Slot::Before, Slot::Mid, Slot::After];

    pub fn as_str(self) -> &'static str {
        match self {
            Slot::Before => "before",
            Slot::Mid => "mid",
            Slot::After => "after",
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Slot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Slot {
    type Err = ParaphraseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "before" => Ok(Slot::Before),
            "mid" => Ok(Slot::Mid),
            "after" => Ok(Slot::After),
            _ => Err(ParaphraseError::Malformed {
                line: 0,
                message: format!("unknown slot {s:?}"),
            }),
        }
    }
}

#[derive(Debug, Error)]
pub enum ParaphraseError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Per query and slot, summed counts of each context word.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ParaphraseHarvest {
    tallies: BTreeMap<String, [BTreeMap<String, u64>; 3]>,
}

impl ParaphraseHarvest {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, query: &str, slot: Slot, word: &str, count: u64) {
        if count == 0 {
            return;
        }
        let slots = self.tallies.entry(query.to_owned()).or_default();
        *slots[slot.index()].entry(word.to_owned()).or_insert(0) += count;
    }

    pub fn slot(&self, query: &str, slot: Slot) -> Option<&BTreeMap<String, u64>> {
        self.tallies.get(query).map(|s| &s[slot.index()])
    }

    pub fn is_empty(&self) -> bool {
        self.tallies.is_empty()
    }

    pub fn queries(&self) -> impl Iterator<Item = &str> {
        self.tallies.keys().map(String::as_str)
    }

    pub fn merge(&mut self, other: ParaphraseHarvest) {
        for (query, slots) in other.tallies {
            let mine = self.tallies.entry(query).or_default();
            for (dst, src) in mine.iter_mut().zip(slots) {
                for (word, count) in src {
                    *dst.entry(word).or_insert(0) += count;
                }
            }
        }
    }
}

/// Ranked top context words per query and slot.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ParaphraseLists {
    lists: BTreeMap<String, [Vec<(String, u64)>; 3]>,
}

impl ParaphraseLists {
    pub fn get(&self, query: &str, slot: Slot) -> &[(String, u64)] {
        self.lists
            .get(query)
            .map(|s| s[slot.index()].as_slice())
            .unwrap_or(&[])
    }

    pub fn contains(&self, query: &str) -> bool {
        self.lists.contains_key(query)
    }

    pub fn len(&self) -> usize {
        self.lists.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lists.is_empty()
    }
}

/// Sort each slot by count descending (ties lexicographic) and keep the top
/// `k_mid` words between and `k_edge` words before and after.
pub fn finalize_paraphrase(harvest: &ParaphraseHarvest, k_mid: usize, k_edge: usize) -> ParaphraseLists {
    let mut lists = BTreeMap::new();
    for (query, slots) in &harvest.tallies {
        let ranked: [Vec<(String, u64)>; 3] = std::array::from_fn(|i| {
            let keep = if i == Slot::Mid.index() { k_mid } else { k_edge };
            let mut words: Vec<(String, u64)> = slots[i].iter().map(|(w, &c)| (w.clone(), c)).collect();
            words.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
            words.truncate(keep);
            words
        });
        lists.insert(query.clone(), ranked);
    }
    ParaphraseLists { lists }
}

/// TSV lines "query-key<TAB>slot<TAB>rank<TAB>word<TAB>count", rank from 1.
pub fn write_paraphrase<W: Write>(lists: &ParaphraseLists, sink: &mut W) -> io::Result<()> {
    for (query, slots) in &lists.lists {
        for slot in Slot::ALL {
            for (rank, (word, count)) in slots[slot.index()].iter().enumerate() {
                writeln!(sink, "{query}\t{slot}\t{}\t{word}\t{count}", rank + 1)?;
            }
        }
    }
    Ok(())
}

pub fn read_paraphrase<R: BufRead>(source: R) -> Result<ParaphraseLists, ParaphraseError> {
    let mut lists: BTreeMap<String, [Vec<(String, u64)>; 3]> = BTreeMap::new();
    for (i, line) in source.lines().enumerate() {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let malformed = |message: String| ParaphraseError::Malformed {
            line: i + 1,
            message,
        };
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 5 {
            return Err(malformed(format!("expected 5 fields, found {}", fields.len())));
        }
        let slot: Slot = fields[1]
            .parse()
            .map_err(|_| malformed(format!("unknown slot {:?}", fields[1])))?;
        let rank: usize = fields[2]
            .parse()
            .map_err(|_| malformed(format!("bad rank {:?}", fields[2])))?;
        let count: u64 = fields[4]
            .parse()
            .map_err(|_| malformed(format!("bad count {:?}", fields[4])))?;
        let entry = &mut lists.entry(fields[0].to_owned()).or_default()[slot.index()];
        if rank != entry.len() + 1 {
            return Err(malformed(format!("rank {rank} out of sequence")));
        }
        entry.push((fields[3].to_owned(), count));
    }
    Ok(ParaphraseLists { lists })
}
