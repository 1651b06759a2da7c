//! Brute-force oracles and randomized fixtures shared by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, HashMap, HashSet};

use ngramdep::conll::Sentence;
use ngramdep::surface::NgramRecord;
use ngramdep::syntactic::{parse_syngram_line, SyntacticNgramRecord};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// ---------------------------------------------------------------- trees

/// Every way to hang tokens lo..=hi under an outside head `h` as a sequence
/// of projective subtrees.
fn forests(lo: usize, hi: usize, h: usize) -> Vec<Vec<(usize, usize)>> {
    if lo > hi {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for end in lo..=hi {
        let rest = forests(end + 1, hi, h);
        for k in lo..=end {
            let left = forests(lo, k - 1, k);
            let right = forests(k + 1, end, k);
            for l in &left {
                for r in &right {
                    for tail in &rest {
                        let mut v = vec![(k, h)];
                        v.extend(l);
                        v.extend(r);
                        v.extend(tail);
                        out.push(v);
                    }
                }
            }
        }
    }
    out
}

fn to_heads(n: usize, pairs: &[(usize, usize)]) -> Vec<usize> {
    let mut heads = vec![usize::MAX; n];
    for &(d, h) in pairs {
        heads[d - 1] = h;
    }
    heads
}

/// All projective trees over n tokens with exactly one root dependent.
pub fn projective_trees(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for r in 1..=n {
        for l in forests(1, r - 1, r) {
            for rt in forests(r + 1, n, r) {
                let mut pairs = vec![(r, 0)];
                pairs.extend(&l);
                pairs.extend(&rt);
                out.push(to_heads(n, &pairs));
            }
        }
    }
    out
}

/// All projective trees, any number of root dependents.
pub fn projective_forests(n: usize) -> Vec<Vec<usize>> {
    forests(1, n, 0).iter().map(|p| to_heads(n, p)).collect()
}

/// Filter over all n^n head vectors, for cross-checking the enumerator.
pub fn projective_trees_by_filter(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut heads = vec![0usize; n];
    loop {
        if is_single_root_tree(&heads) && crosses_nothing(&heads) {
            out.push(heads.clone());
        }
        let mut i = 0;
        loop {
            if i == n {
                return out;
            }
            heads[i] += 1;
            if heads[i] <= n {
                break;
            }
            heads[i] = 0;
            i += 1;
        }
    }
}

fn is_single_root_tree(heads: &[usize]) -> bool {
    let n = heads.len();
    if heads.iter().filter(|&&h| h == 0).count() != 1 {
        return false;
    }
    for d in 1..=n {
        if heads[d - 1] == d {
            return false;
        }
        let mut x = d;
        for _ in 0..=n {
            if x == 0 {
                break;
            }
            x = heads[x - 1];
        }
        if x != 0 {
            return false;
        }
    }
    true
}

fn crosses_nothing(heads: &[usize]) -> bool {
    let arcs: Vec<(usize, usize)> = heads.iter().enumerate().map(|(i, &h)| (h.min(i + 1), h.max(i + 1))).collect();
    arcs.iter().all(|&(a, b)| arcs.iter().all(|&(c, d)| !(a < c && c < b && b < d)))
}

pub fn arc_sum(arc: &dyn Fn(usize, usize) -> f64, heads: &[usize]) -> f64 {
    heads.iter().enumerate().map(|(i, &h)| arc(h, i + 1)).sum()
}

/// Arc scores plus one sibling term per child: children of a head are
/// chained outward from the head on each side, the nearest one pairing with
/// "no previous sibling".
pub fn second_order_sum(
    arc: &dyn Fn(usize, usize) -> f64,
    sib: &dyn Fn(usize, Option<usize>, usize) -> f64,
    heads: &[usize],
) -> f64 {
    let n = heads.len();
    let mut total = arc_sum(arc, heads);
    for p in 0..=n {
        let kids: Vec<usize> = (1..=n).filter(|&c| heads[c - 1] == p).collect();
        let mut left: Vec<usize> = kids.iter().copied().filter(|&c| c < p).collect();
        left.sort_by_key(|&c| p - c);
        let mut right: Vec<usize> = kids.iter().copied().filter(|&c| c > p).collect();
        right.sort_by_key(|&c| c - p);
        for side in [left, right] {
            let mut prev = None;
            for c in side {
                total += sib(p, prev, c);
                prev = Some(c);
            }
        }
    }
    total
}

/// Trees sorted best first: score descending, then head vector ascending.
pub fn ranked(trees: Vec<Vec<usize>>, score: impl Fn(&[usize]) -> f64) -> Vec<(Vec<usize>, f64)> {
    let mut all: Vec<(Vec<usize>, f64)> = trees.into_iter().map(|t| {
        let s = score(&t);
        (t, s)
    }).collect();
    all.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then_with(|| a.0.cmp(&b.0)));
    all
}

// ------------------------------------------------------------ corpora

pub const WORDS: [&str; 12] = ["hold", "a", "hearing", "on", "Tuesday", "the", "court", "will", "public", "next", ",", "of"];
pub const TAGS: [&str; 8] = ["VB", "DT", "NN", "IN", "JJ", "NNP", "VBD", "RB"];

pub fn random_surface_lines(rng: &mut ChaCha8Rng, count: usize, vocab: usize) -> Vec<String> {
    (0..count)
        .map(|_| {
            let len = rng.gen_range(1..=5);
            let toks: Vec<&str> = (0..len).map(|_| WORDS[rng.gen_range(0..vocab)]).collect();
            format!("{}\t{}", toks.join(" "), rng.gen_range(1..1000))
        })
        .collect()
}

pub fn random_books_lines(rng: &mut ChaCha8Rng, count: usize, vocab: usize) -> Vec<String> {
    (0..count)
        .map(|_| {
            let len = rng.gen_range(1..=5);
            let toks: Vec<&str> = (0..len).map(|_| WORDS[rng.gen_range(0..vocab)]).collect();
            format!("{}\t{}\t{}\t{}", toks.join(" "), rng.gen_range(1900..2009), rng.gen_range(1..500), rng.gen_range(1..9))
        })
        .collect()
}

/// Web1T records parsed by hand, independent of the library parser.
pub fn records_of(lines: &[String]) -> Vec<NgramRecord> {
    lines
        .iter()
        .map(|l| {
            let (toks, count) = l.split_once('\t').unwrap();
            let toks: Vec<&str> = toks.split(' ').collect();
            NgramRecord::new(&toks, count.parse().unwrap())
        })
        .collect()
}

/// Random fragments: each token after the first in a random order attaches
/// to a token already placed.
pub fn random_syngram_lines(rng: &mut ChaCha8Rng, count: usize, vocab: usize) -> Vec<String> {
    (0..count)
        .map(|_| {
            let len = rng.gen_range(1..=5);
            let mut order: Vec<usize> = (1..=len).collect();
            order.shuffle(rng);
            let mut heads = vec![0usize; len + 1];
            for i in 1..len {
                heads[order[i]] = order[rng.gen_range(0..i)];
            }
            let toks: Vec<String> = (1..=len)
                .map(|p| format!("{}/{}/dep/{}", WORDS[rng.gen_range(0..vocab)], TAGS[rng.gen_range(0..TAGS.len())], heads[p]))
                .collect();
            let c = rng.gen_range(1..5000);
            format!("{}\t{}\t{c}\t1999,{c}", WORDS[0], toks.join(" "))
        })
        .collect()
}

pub fn syn_records_of(lines: &[String]) -> Vec<SyntacticNgramRecord> {
    lines.iter().map(|l| parse_syngram_line(l).unwrap()).collect()
}

pub fn random_sentence(rng: &mut ChaCha8Rng, vocab: usize) -> Sentence {
    let n = rng.gen_range(2..=7);
    let trees = projective_trees(n);
    let heads = trees.choose(rng).unwrap();
    let words: Vec<(&str, &str, usize)> = heads
        .iter()
        .map(|&h| (WORDS[rng.gen_range(0..vocab)], TAGS[rng.gen_range(0..TAGS.len())], h))
        .collect();
    Sentence::from_triples(words).unwrap()
}

// ------------------------------------------------------ surface oracles

/// Counts of (q1, k wildcards, q2) for k = 0..3 at every offset.
pub fn oracle_affinity(records: &[NgramRecord], q1: &str, q2: &str) -> [u64; 4] {
    let mut out = [0; 4];
    for r in records {
        for i in 0..r.tokens.len() {
            for j in i + 1..r.tokens.len() {
                if j - i - 1 <= 3 && r.tokens[i] == q1 && r.tokens[j] == q2 {
                    out[j - i - 1] += r.count;
                }
            }
        }
    }
    out
}

/// Occurrences of q1 .. q2 .. q3 whose gaps are one of the six configurations.
pub fn oracle_triple(records: &[NgramRecord], q: [&str; 3]) -> u64 {
    let allowed = [(0, 0), (1, 0), (0, 1), (1, 1), (2, 0), (0, 2)];
    let mut total = 0;
    for r in records {
        let t = &r.tokens;
        for i in 0..t.len() {
            for j in i + 1..t.len() {
                for k in j + 1..t.len() {
                    if t[i] == q[0] && t[j] == q[1] && t[k] == q[2] && allowed.contains(&(j - i - 1, k - j - 1)) {
                        total += r.count;
                    }
                }
            }
        }
    }
    total
}

/// Before, mid and after tallies from trigram records.
pub fn oracle_paraphrase(records: &[NgramRecord], q1: &str, q2: &str) -> [BTreeMap<String, u64>; 3] {
    let mut out: [BTreeMap<String, u64>; 3] = Default::default();
    for r in records.iter().filter(|r| r.tokens.len() == 3) {
        let t = &r.tokens;
        if t[1] == q1 && t[2] == q2 {
            *out[0].entry(t[0].clone()).or_default() += r.count;
        }
        if t[0] == q1 && t[2] == q2 {
            *out[1].entry(t[1].clone()).or_default() += r.count;
        }
        if t[0] == q1 && t[1] == q2 {
            *out[2].entry(t[2].clone()).or_default() += r.count;
        }
    }
    out
}

// ---------------------------------------------------- syntactic oracles

fn arcs(r: &SyntacticNgramRecord) -> Vec<(usize, usize)> {
    r.tokens.iter().enumerate().filter(|(_, t)| t.head_index != 0).map(|(i, t)| (t.head_index, i + 1)).collect()
}

/// Count for one first-order key string, by testing the key's predicate on
/// every arc of every record.
pub fn oracle_first_order(records: &[SyntacticNgramRecord], key: &str) -> u64 {
    let parts: Vec<&str> = key.split(' ').collect();
    let (kind, p) = (parts[0], &parts[1..]);
    let mut total = 0;
    for r in records {
        for (h, a) in arcs(r) {
            let (hw, hp) = (r.tokens[h - 1].form.as_str(), r.tokens[h - 1].fpos.as_str());
            let (aw, ap) = (r.tokens[a - 1].form.as_str(), r.tokens[a - 1].fpos.as_str());
            let dir = if h < a { "head-left" } else { "head-right" };
            let hit = match kind {
                "head-word" => p == [hw],
                "arg-word" => p == [aw],
                "word-word" => p == [hw, aw],
                "word-word-dir" => p == [hw, aw, dir],
                "head-pos" => p == [hp],
                "arg-pos" => p == [ap],
                "pos-child" => p == [hp, if a > h { "right" } else { "left" }],
                "pos-head" => p == [ap, if h < a { "left" } else { "right" }],
                "pos-pos" => p == [hp, ap],
                "pos-pos-dir" => p == [hp, ap, dir],
                "word-pos" => p == [hw, ap],
                "word-pos-dir" => p == [hw, ap, dir],
                "pos-word" => p == [hp, aw],
                "pos-word-dir" => p == [hp, aw, dir],
                other => panic!("unknown kind {other}"),
            };
            if hit {
                total += r.total_count;
            }
        }
    }
    total
}

/// Count for one second-order key: every (parent, child, child) choice
/// whose linear layout and strings match.
pub fn oracle_second_order(records: &[SyntacticNgramRecord], key: &str) -> u64 {
    let parts: Vec<&str> = key.split(' ').collect();
    let mut total = 0;
    for r in records {
        let n = r.tokens.len();
        let word = |i: usize, pos: bool| {
            let t = &r.tokens[i - 1];
            if pos { t.fpos.as_str() } else { t.form.as_str() }
        };
        for p in 1..=n {
            for c1 in 1..=n {
                if r.tokens[c1 - 1].head_index != p {
                    continue;
                }
                for c2 in c1 + 1..=n {
                    if r.tokens[c2 - 1].head_index != p {
                        continue;
                    }
                    let hit = match parts[0] {
                        "syn-sib-word" => parts[1..] == [word(c1, false), word(c2, false)],
                        "syn-sib-pos" => parts[1..] == [word(c1, true), word(c2, true)],
                        "syn-triple-word" | "syn-triple-pos" => {
                            let pos = parts[0] == "syn-triple-pos";
                            match parts[1] {
                                "head-left" => p < c1 && parts[2..] == [word(p, pos), word(c1, pos), word(c2, pos)],
                                "head-right" => p > c2 && parts[2..] == [word(c1, pos), word(c2, pos), word(p, pos)],
                                _ => panic!("bad side"),
                            }
                        }
                        other => panic!("unknown kind {other}"),
                    };
                    if hit {
                        total += r.total_count;
                    }
                }
            }
        }
    }
    total
}

pub type SlotTallies = [BTreeMap<String, u64>; 3];

/// Word and tag tallies around every arc matching (head, arg, direction).
pub fn oracle_syntactic_paraphrase(
    records: &[SyntacticNgramRecord],
    head: &str,
    arg: &str,
    dir: &str,
) -> (SlotTallies, SlotTallies) {
    let mut words: SlotTallies = Default::default();
    let mut tags: SlotTallies = Default::default();
    for r in records {
        for (h, a) in arcs(r) {
            let d = if h < a { "head-left" } else { "head-right" };
            if r.tokens[h - 1].form != head || r.tokens[a - 1].form != arg || d != dir {
                continue;
            }
            for (i, t) in r.tokens.iter().enumerate() {
                let pos = i + 1;
                let slot = if pos < h.min(a) {
                    0
                } else if pos > h.max(a) {
                    2
                } else if pos != h && pos != a {
                    1
                } else {
                    continue;
                };
                *words[slot].entry(t.form.clone()).or_default() += r.total_count;
                *tags[slot].entry(t.fpos.clone()).or_default() += r.total_count;
            }
        }
    }
    (words, tags)
}

/// `count` distinct random first-order keys over the fixture vocabulary.
pub fn random_first_order_keys(rng: &mut ChaCha8Rng, count: usize, vocab: usize) -> HashSet<String> {
    let dirs = ["head-left", "head-right"];
    let sides = ["left", "right"];
    distinct(count, || {
        {
            let w1 = WORDS[rng.gen_range(0..vocab)];
            let w2 = WORDS[rng.gen_range(0..vocab)];
            let t1 = TAGS[rng.gen_range(0..TAGS.len())];
            let t2 = TAGS[rng.gen_range(0..TAGS.len())];
            let d = dirs[rng.gen_range(0..2)];
            let s = sides[rng.gen_range(0..2)];
            match rng.gen_range(0..14) {
                0 => format!("head-word {w1}"),
                1 => format!("arg-word {w1}"),
                2 => format!("word-word {w1} {w2}"),
                3 => format!("word-word-dir {w1} {w2} {d}"),
                4 => format!("head-pos {t1}"),
                5 => format!("arg-pos {t1}"),
                6 => format!("pos-child {t1} {s}"),
                7 => format!("pos-head {t1} {s}"),
                8 => format!("pos-pos {t1} {t2}"),
                9 => format!("pos-pos-dir {t1} {t2} {d}"),
                10 => format!("word-pos {w1} {t2}"),
                11 => format!("word-pos-dir {w1} {t2} {d}"),
                12 => format!("pos-word {t1} {w2}"),
                _ => format!("pos-word-dir {t1} {w2} {d}"),
            }
        }
    })
}

fn distinct(count: usize, mut make: impl FnMut() -> String) -> HashSet<String> {
    let mut out = HashSet::new();
    while out.len() < count {
        out.insert(make());
    }
    out
}

pub fn random_second_order_keys(rng: &mut ChaCha8Rng, count: usize, vocab: usize) -> HashSet<String> {
    distinct(count, || {
        {
            let pos = rng.gen_bool(0.5);
            let item = |rng: &mut ChaCha8Rng| {
                if pos {
                    TAGS[rng.gen_range(0..TAGS.len())]
                } else {
                    WORDS[rng.gen_range(0..vocab)]
                }
            };
            let (a, b, c) = (item(rng), item(rng), item(rng));
            let variant = if pos { "pos" } else { "word" };
            match rng.gen_range(0..3) {
                0 => format!("syn-sib-{variant} {a} {b}"),
                1 => format!("syn-triple-{variant} head-left {a} {b} {c}"),
                _ => format!("syn-triple-{variant} head-right {a} {b} {c}"),
            }
        }
    })
}

/// Tally maps for comparing paraphrase harvests slot by slot.
pub fn harvest_slots(h: &ngramdep::paraphrase::ParaphraseHarvest, query: &str) -> [BTreeMap<String, u64>; 3] {
    use ngramdep::paraphrase::Slot;
    Slot::ALL.map(|s| h.slot(query, s).cloned().unwrap_or_default())
}

pub fn counts_map(pairs: impl IntoIterator<Item = (String, u64)>) -> HashMap<String, u64> {
    let mut m = HashMap::new();
    for (k, v) in pairs {
        if v > 0 {
            *m.entry(k).or_insert(0) += v;
        }
    }
    m
}
