//! Attachment scores, per-tag breakdowns, query coverage and paired bootstrap tests.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::conll::{Punctuation, Sentence};
use crate::counts::CountTable;
use crate::query::{keys, AffinityPattern, QueryKind, QuerySet};

pub const DEFAULT_RESAMPLES: usize = 10_000;
pub const DEFAULT_ALPHA: f64 = 0.05;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("{gold} gold sentences but {predicted} predictions")]
    CountMismatch { gold: usize, predicted: usize },
    #[error("sentence {sentence}: {expected} tokens but {found} predicted heads")]
    LengthMismatch { sentence: usize, expected: usize, found: usize },
    #[error("bootstrap needs at least 2 sentences, got {0}")]
    TooFewSentences(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EvalOptions {
    pub exclude_punct: bool,
    pub punctuation: Punctuation,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            exclude_punct: true,
            punctuation: Punctuation::by_form(),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct TagStats {
    pub frequency: usize,
    pub correct: usize,
    pub errors: usize,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct EvalReport {
    /// Correct over scored tokens; 0 when nothing is scored.
    pub uas: f64,
    pub correct: usize,
    pub scored_tokens: usize,
    pub excluded_tokens: usize,
    /// Keyed by gold argument tag.
    pub per_pos: BTreeMap<String, TagStats>,
}

/// Per sentence: (correct, scored) counts.
fn sentence_counts<P: AsRef<[usize]>>(
    gold: &[Sentence],
    predicted: &[P],
    options: &EvalOptions,
    mut visit: impl FnMut(&str, bool, bool),
) -> Result<Vec<(usize, usize)>, EvalError> {
    if gold.len() != predicted.len() {
        return Err(EvalError::CountMismatch {
            gold: gold.len(),
            predicted: predicted.len(),
        });
    }
    let mut out = Vec::with_capacity(gold.len());
    for (i, (s, p)) in gold.iter().zip(predicted).enumerate() {
        let p = p.as_ref();
        if p.len() != s.len() {
            return Err(EvalError::LengthMismatch {
                sentence: i + 1,
                expected: s.len(),
                found: p.len(),
            });
        }
        let (mut correct, mut scored) = (0, 0);
        for (tok, &head) in s.tokens().iter().zip(p) {
            let excluded = options.exclude_punct && options.punctuation.is_punct(tok);
            let ok = head == tok.gold_head;
            visit(&tok.fpos, excluded, ok);
            if !excluded {
                scored += 1;
                correct += usize::from(ok);
            }
        }
        out.push((correct, scored));
    }
    Ok(out)
}

pub fn uas<P: AsRef<[usize]>>(gold: &[Sentence], predicted: &[P], options: &EvalOptions) -> Result<EvalReport, EvalError> {
    let mut report = EvalReport::default();
    let counts = sentence_counts(gold, predicted, options, |tag, excluded, ok| {
        if excluded {
            report.excluded_tokens += 1;
            return;
        }
        let e = report.per_pos.entry(tag.to_owned()).or_default();
        e.frequency += 1;
        if ok {
            e.correct += 1;
        } else {
            e.errors += 1;
        }
    })?;
    report.correct = counts.iter().map(|c| c.0).sum();
    report.scored_tokens = counts.iter().map(|c| c.1).sum();
    report.uas = if report.scored_tokens == 0 {
        0.0
    } else {
        report.correct as f64 / report.scored_tokens as f64
    };
    Ok(report)
}

pub fn per_pos_breakdown<P: AsRef<[usize]>>(
    gold: &[Sentence],
    predicted: &[P],
    options: &EvalOptions,
) -> Result<BTreeMap<String, TagStats>, EvalError> {
    Ok(uas(gold, predicted, options)?.per_pos)
}

/// How one-decimal percentages are rounded.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Rounding {
    /// Round the magnitude half up to one decimal.
    #[default]
    HalfUp,
    /// Round half up to two decimals, then that value half up to one.
    TwoStage,
}

fn div_half_up(num: u128, den: u128) -> u128 {
    (2 * num + den) / (2 * den)
}

/// `100 * num / den` to one decimal, computed exactly on integers.
pub fn format_percent(num: i64, den: u64, rounding: Rounding) -> String {
    if den == 0 {
        return "0.0".to_owned();
    }
    let mag = num.unsigned_abs() as u128;
    let den = den as u128;
    let tenths = match rounding {
        Rounding::HalfUp => div_half_up(1000 * mag, den),
        Rounding::TwoStage => div_half_up(div_half_up(10_000 * mag, den), 10),
    };
    let sign = if num < 0 && tenths > 0 { "-" } else { "" };
    format!("{sign}{}.{}", tenths / 10, tenths % 10)
}

/// One row of a two-system comparison by gold argument tag.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TagComparison {
    pub tag: String,
    pub frequency: usize,
    pub base: usize,
    pub comb: usize,
}

impl TagComparison {
    pub fn gain(&self) -> i64 {
        self.comb as i64 - self.base as i64
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Comparison {
    /// Sorted by frequency, descending, then tag.
    pub rows: Vec<TagComparison>,
}

impl Comparison {
    pub fn total_gain(&self) -> i64 {
        self.rows.iter().map(TagComparison::gain).sum()
    }

    /// Share of the overall error reduction owed to one row, in percent;
    /// "0.0" when the systems tie overall.
    pub fn share(&self, row: &TagComparison, rounding: Rounding) -> String {
        let total = self.total_gain();
        if total == 0 {
            return "0.0".to_owned();
        }
        let (num, den) = if total < 0 { (-row.gain(), total.unsigned_abs()) } else { (row.gain(), total as u64) };
        format_percent(num, den, rounding)
    }

    /// Keep the `top` most frequent tags and fold the rest into "Other".
    pub fn top(&self, top: usize) -> Comparison {
        if self.rows.len() <= top {
            return self.clone();
        }
        let mut rows = self.rows[..top].to_vec();
        let mut other = TagComparison {
            tag: "Other".into(),
            frequency: 0,
            base: 0,
            comb: 0,
        };
        for r in &self.rows[top..] {
            other.frequency += r.frequency;
            other.base += r.base;
            other.comb += r.comb;
        }
        rows.push(other);
        Comparison { rows }
    }

    /// Aligned plain-text table with columns Tag, Freq, base, comb, %.
    pub fn to_text(&self, rounding: Rounding) -> String {
        let mut lines = vec![["Tag".to_owned(), "Freq".into(), "base".into(), "comb".into(), "%".into()]];
        for r in &self.rows {
            lines.push([
                r.tag.clone(),
                r.frequency.to_string(),
                r.base.to_string(),
                r.comb.to_string(),
                self.share(r, rounding),
            ]);
        }
        let widths: Vec<usize> = (0..5).map(|c| lines.iter().map(|l| l[c].len()).max().unwrap_or(0)).collect();
        let mut out = String::new();
        for l in &lines {
            out.push_str(&format!("{:<w$}", l[0], w = widths[0]));
            for c in 1..5 {
                out.push_str(&format!("  {:>w$}", l[c], w = widths[c]));
            }
            out.push('\n');
        }
        out
    }

    pub fn to_tsv(&self, rounding: Rounding) -> String {
        let mut out = String::from("tag\tfreq\tbase\tcomb\tpercent\n");
        for r in &self.rows {
            out.push_str(&format!("{}\t{}\t{}\t{}\t{}\n", r.tag, r.frequency, r.base, r.comb, self.share(r, rounding)));
        }
        out
    }
}

pub fn compare_per_pos<P: AsRef<[usize]>, Q: AsRef<[usize]>>(
    gold: &[Sentence],
    base: &[P],
    comb: &[Q],
    options: &EvalOptions,
) -> Result<Comparison, EvalError> {
    let a = per_pos_breakdown(gold, base, options)?;
    let b = per_pos_breakdown(gold, comb, options)?;
    let mut rows: Vec<TagComparison> = a
        .iter()
        .map(|(tag, s)| TagComparison {
            tag: tag.clone(),
            frequency: s.frequency,
            base: s.correct,
            comb: b[tag].correct,
        })
        .collect();
    rows.sort_by(|x, y| y.frequency.cmp(&x.frequency).then_with(|| x.tag.cmp(&y.tag)));
    Ok(Comparison { rows })
}

/// A corpus query: covered when any of its table keys is present.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoverageQuery {
    pub id: String,
    pub keys: Vec<String>,
}

/// Surface queries: each linear word pair (four affinity keys) and each triple.
pub fn surface_coverage_queries(set: &QuerySet) -> Vec<CoverageQuery> {
    let mut seen = BTreeMap::new();
    for row in set.rows() {
        let f = row.linear_forms();
        let (id, keys) = if row.kind == QueryKind::Triple {
            let k = keys::surface_triple(f[0], f[1], f[2]);
            (k.clone(), vec![k])
        } else {
            let ks = AffinityPattern::ALL.iter().map(|&p| keys::affinity(p, f[0], f[1])).collect();
            (keys::pair(f[0], f[1]), ks)
        };
        seen.entry(id).or_insert(keys);
    }
    seen.into_iter().map(|(id, keys)| CoverageQuery { id, keys }).collect()
}

/// Syntactic queries: one per first-order lookup key.
pub fn syntactic_coverage_queries(set: &QuerySet) -> Vec<CoverageQuery> {
    set.syntactic_keys()
        .into_iter()
        .map(|k| CoverageQuery {
            id: k.clone(),
            keys: vec![k],
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoverageReport {
    pub total: usize,
    pub missing: BTreeSet<String>,
}

impl CoverageReport {
    pub fn fraction(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.missing.len() as f64 / self.total as f64
        }
    }

    pub fn percent(&self, rounding: Rounding) -> String {
        format_percent(self.missing.len() as i64, self.total as u64, rounding)
    }

    /// Queries missing from both tables, over the same query total.
    pub fn intersection(&self, other: &CoverageReport) -> CoverageReport {
        CoverageReport {
            total: self.total.max(other.total),
            missing: self.missing.intersection(&other.missing).cloned().collect(),
        }
    }
}

pub fn coverage_report(queries: &[CoverageQuery], table: &CountTable) -> CoverageReport {
    CoverageReport {
        total: queries.len(),
        missing: queries
            .iter()
            .filter(|q| !q.keys.iter().any(|k| table.contains(k)))
            .map(|q| q.id.clone())
            .collect(),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BootstrapResult {
    pub p_value: f64,
    /// True when the second system scores at least as high on the full set.
    pub second_is_better: bool,
    pub uas_a: f64,
    pub uas_b: f64,
}

impl BootstrapResult {
    pub fn significant(&self, alpha: f64) -> bool {
        self.p_value < alpha
    }
}

/// Paired bootstrap over sentences. Resample `i` draws from its own ChaCha8
/// stream `i` under `seed`, so the result does not depend on evaluation order.
pub fn bootstrap_significance<P: AsRef<[usize]>, Q: AsRef<[usize]>>(
    gold: &[Sentence],
    a: &[P],
    b: &[Q],
    resamples: usize,
    seed: u64,
    options: &EvalOptions,
) -> Result<BootstrapResult, EvalError> {
    if gold.len() < 2 {
        return Err(EvalError::TooFewSentences(gold.len()));
    }
    let ca = sentence_counts(gold, a, options, |_, _, _| {})?;
    let cb = sentence_counts(gold, b, options, |_, _, _| {})?;
    let total = |c: &[(usize, usize)]| c.iter().map(|x| x.0).sum::<usize>();
    let scored: usize = ca.iter().map(|x| x.1).sum();
    let (ta, tb) = (total(&ca), total(&cb));
    let second_is_better = tb >= ta;
    let (worse, better) = if second_is_better { (&ca, &cb) } else { (&cb, &ca) };
    let n = gold.len();
    let mut not_better = 0usize;
    for i in 0..resamples {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        let (mut w, mut bt) = (0usize, 0usize);
        for _ in 0..n {
            let j = rng.gen_range(0..n);
            w += worse[j].0;
            bt += better[j].0;
        }
        // both systems share the scored-token count of every resample
        if bt <= w {
            not_better += 1;
        }
    }
    let ratio = |c: usize| if scored == 0 { 0.0 } else { c as f64 / scored as f64 };
    Ok(BootstrapResult {
        p_value: if resamples == 0 { 1.0 } else { not_better as f64 / resamples as f64 },
        second_is_better,
        uas_a: ratio(ta),
        uas_b: ratio(tb),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counts::TableMeta;

    fn sent(words: &[(&str, &str, usize)]) -> Sentence {
        Sentence::from_triples(words.iter().copied()).unwrap()
    }

    #[test]
    fn uas_basics() {
        let g = vec![sent(&[("a", "DT", 2), ("b", "NN", 0), ("c", "NN", 2)])];
        let opts = EvalOptions::default();
        let r = uas(&g, &[vec![2, 0, 1]], &opts).unwrap();
        assert_eq!((r.correct, r.scored_tokens), (2, 3));
        assert!((r.uas - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(uas(&g, &[vec![2, 0, 2]], &opts).unwrap().uas, 1.0);
        assert_eq!(r.per_pos["NN"], TagStats { frequency: 2, correct: 1, errors: 1 });
        let p = vec![sent(&[("a", "DT", 2), ("b", "NN", 0), (",", ",", 2)])];
        let r = uas(&p, &[vec![2, 0, 1]], &opts).unwrap();
        assert_eq!((r.uas, r.scored_tokens, r.excluded_tokens), (1.0, 2, 1));
        assert!(matches!(uas(&g, &[vec![2, 0]], &opts), Err(EvalError::LengthMismatch { .. })));
        assert!(matches!(uas(&g, &Vec::<Vec<usize>>::new(), &opts), Err(EvalError::CountMismatch { .. })));
    }

    #[test]
    fn percent_rounding() {
        assert_eq!(format_percent(1, 4, Rounding::HalfUp), "25.0");
        assert_eq!(format_percent(1, 8, Rounding::HalfUp), "12.5");
        assert_eq!(format_percent(1, 16, Rounding::HalfUp), "6.3");
        assert_eq!(format_percent(-1, 16, Rounding::HalfUp), "-6.3");
        assert_eq!(format_percent(2, 308, Rounding::HalfUp), "0.6");
        assert_eq!(format_percent(2, 308, Rounding::TwoStage), "0.7");
        assert_eq!(format_percent(0, 5, Rounding::HalfUp), "0.0");
    }

    #[test]
    fn identical_systems_share_zero() {
        let g = vec![sent(&[("a", "DT", 2), ("b", "NN", 0)])];
        let c = compare_per_pos(&g, &[vec![0, 0]], &[vec![0, 0]], &EvalOptions::default()).unwrap();
        assert!(c.rows.iter().all(|r| c.share(r, Rounding::HalfUp) == "0.0"));
        assert!(c.to_text(Rounding::HalfUp).starts_with("Tag"));
    }

    #[test]
    fn coverage_and_intersection() {
        let queries: Vec<CoverageQuery> = (0..4)
            .map(|i| CoverageQuery {
                id: format!("q{i}"),
                keys: vec![format!("k{i}")],
            })
            .collect();
        let t1 = CountTable::from_counts(TableMeta::new("a", "x"), [("k0", 1u64), ("k1", 1), ("k2", 1)]);
        let r1 = coverage_report(&queries, &t1);
        assert_eq!(r1.missing.len(), 1);
        assert_eq!(r1.percent(Rounding::HalfUp), "25.0");
        let empty = coverage_report(&queries, &CountTable::new(TableMeta::new("a", "x")));
        assert_eq!(empty.fraction(), 1.0);
        assert_eq!(r1.intersection(&empty).missing, r1.missing);
    }

    #[test]
    fn bootstrap_identical_is_insignificant() {
        let g: Vec<Sentence> = (0..10).map(|_| sent(&[("a", "DT", 2), ("b", "NN", 0)])).collect();
        let p: Vec<Vec<usize>> = g.iter().map(|_| vec![2, 0]).collect();
        let r = bootstrap_significance(&g, &p, &p, 200, 1, &EvalOptions::default()).unwrap();
        assert_eq!(r.p_value, 1.0);
        assert!(bootstrap_significance(&g[..1], &p[..1], &p[..1], 10, 1, &EvalOptions::default()).is_err());
    }
}
