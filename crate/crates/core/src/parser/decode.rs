//! Projective decoding: first-order Eisner and second-order sibling DP, both k-best.
//!
//! Trees are ranked by score, highest first. Equal scores are ordered by
//! the head vector `heads[1..=n]` compared lexicographically, smaller first.
//! Every DP cell keeps its k best entries under this order together with the
//! heads it assigns, so the order holds exactly for the final k-best list.

use std::cmp::Ordering;

use thiserror::Error;

use crate::conll::DependencyTree;
use crate::scalar::Scalar;

use super::features::sibling_factors;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DecodeError {
    #[error("cannot decode an empty sentence")]
    EmptySentence,
    #[error("k must be at least 1")]
    ZeroK,
    #[error("score tables cover {arcs} and {siblings} tokens")]
    SizeMismatch { arcs: usize, siblings: usize },
}

/// `s(h, a)` for heads `0..=n` and arguments `1..=n`.
#[derive(Clone, Debug, PartialEq)]
pub struct ArcScores<S> {
    n: usize,
    data: Vec<S>,
}

impl<S: Scalar> ArcScores<S> {
    pub fn zeros(n: usize) -> Self {
        ArcScores {
            n,
            data: vec![S::zero(); (n + 1) * (n + 1)],
        }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> S) -> Self {
        let mut s = Self::zeros(n);
        for h in 0..=n {
            for a in 1..=n {
                if h != a {
                    s.set(h, a, f(h, a));
                }
            }
        }
        s
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, head: usize, arg: usize) -> S {
        self.data[head * (self.n + 1) + arg]
    }

    pub fn set(&mut self, head: usize, arg: usize, v: S) {
        self.data[head * (self.n + 1) + arg] = v;
    }
}

/// `s(h, c1, c2)`: child `c2` of `h` whose previous sibling on the same side
/// is `c1`, or `None` for the first child.
#[derive(Clone, Debug, PartialEq)]
pub struct SiblingScores<S> {
    n: usize,
    data: Vec<S>,
}

impl<S: Scalar> SiblingScores<S> {
    pub fn zeros(n: usize) -> Self {
        let m = n + 1;
        SiblingScores {
            n,
            data: vec![S::zero(); m * m * m],
        }
    }

    /// Fill every well-formed factor: `c1` strictly between `h` and `c2`, or none.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, Option<usize>, usize) -> S) -> Self {
        let mut s = Self::zeros(n);
        for h in 0..=n {
            for c2 in 1..=n {
                if c2 == h {
                    continue;
                }
                s.set(h, None, c2, f(h, None, c2));
                let between = if h < c2 { h + 1..c2 } else { c2 + 1..h };
                for c1 in between {
                    s.set(h, Some(c1), c2, f(h, Some(c1), c2));
                }
            }
        }
        s
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn index(&self, h: usize, c1: Option<usize>, c2: usize) -> usize {
        let m = self.n + 1;
        (h * m + c1.unwrap_or(h)) * m + c2
    }

    pub fn get(&self, h: usize, c1: Option<usize>, c2: usize) -> S {
        self.data[self.index(h, c1, c2)]
    }

    pub fn set(&mut self, h: usize, c1: Option<usize>, c2: usize, v: S) {
        let i = self.index(h, c1, c2);
        self.data[i] = v;
    }
}

/// Factorized score of a tree given as `heads[i]` = head of token `i + 1`.
pub fn tree_score<S: Scalar>(arcs: &ArcScores<S>, siblings: Option<&SiblingScores<S>>, heads: &[usize]) -> S {
    let mut score = S::zero();
    for (i, &h) in heads.iter().enumerate() {
        score += arcs.get(h, i + 1);
    }
    if let Some(sib) = siblings {
        for (h, c1, c2) in sibling_factors(heads) {
            score += sib.get(h, c1, c2);
        }
    }
    score
}

/// Canonical ranking: higher score first, then smaller head vector.
pub fn rank<S: Scalar>(a: &(Vec<usize>, S), b: &(Vec<usize>, S)) -> Ordering {
    b.1.partial_cmp(&a.1).unwrap_or(Ordering::Equal).then_with(|| a.0.cmp(&b.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DecodeOptions {
    pub k: usize,
    /// Exactly one token attached to the root.
    pub single_root: bool,
}

impl Default for DecodeOptions {
    fn default() -> Self {
        DecodeOptions { k: 1, single_root: true }
    }
}

#[derive(Clone, Debug)]
struct Entry<S> {
    score: S,
    heads: Vec<u32>,
}

#[derive(Clone, Copy)]
enum Piece<'a> {
    Run(&'a [u32]),
    One(u32),
}

impl<'a> Piece<'a> {
    fn iter(self) -> impl Iterator<Item = u32> + 'a {
        let (run, one) = match self {
            Piece::Run(r) => (r, None),
            Piece::One(h) => (&[][..], Some(h)),
        };
        run.iter().copied().chain(one)
    }
}

const EMPTY: Piece<'static> = Piece::Run(&[]);

struct Cand<'a, S> {
    score: S,
    pieces: [Piece<'a>; 3],
}

impl<'a, S: Scalar> Cand<'a, S> {
    fn heads(&self) -> impl Iterator<Item = u32> + 'a {
        let [a, b, c] = self.pieces;
        a.iter().chain(b.iter()).chain(c.iter())
    }

    fn cmp(&self, other: &Self) -> Ordering {
        other
            .score
            .partial_cmp(&self.score)
            .unwrap_or(Ordering::Equal)
            .then_with(|| self.heads().cmp(other.heads()))
    }
}

fn select<S: Scalar>(mut cands: Vec<Cand<'_, S>>, k: usize) -> Vec<Entry<S>> {
    if cands.len() > k {
        cands.select_nth_unstable_by(k - 1, |a, b| a.cmp(b));
        cands.truncate(k);
    }
    cands.sort_by(|a, b| a.cmp(b));
    cands
        .into_iter()
        .map(|c| Entry {
            score: c.score,
            heads: c.heads().collect(),
        })
        .collect()
}

struct Chart<S> {
    m: usize,
    cells: [Vec<Vec<Entry<S>>>; 5],
}

const CR: usize = 0;
const CL: usize = 1;
const IR: usize = 2;
const IL: usize = 3;
const SIB: usize = 4;

impl<S: Scalar> Chart<S> {
    fn new(n: usize) -> Self {
        let m = n + 1;
        let mut chart = Chart {
            m,
            cells: std::array::from_fn(|_| vec![Vec::new(); m * m]),
        };
        for s in 0..m {
            for table in [CR, CL] {
                chart.cells[table][s * m + s] = vec![Entry {
                    score: S::zero(),
                    heads: Vec::new(),
                }];
            }
        }
        chart
    }

    fn get(&self, table: usize, s: usize, t: usize) -> &[Entry<S>] {
        &self.cells[table][s * self.m + t]
    }
}

fn pairs<'a, S: Scalar>(
    a: &'a [Entry<S>],
    b: &'a [Entry<S>],
    extra: S,
    layout: impl Fn(&'a [u32], &'a [u32]) -> [Piece<'a>; 3],
    out: &mut Vec<Cand<'a, S>>,
) {
    for x in a {
        for y in b {
            out.push(Cand {
                score: x.score + y.score + extra,
                pieces: layout(&x.heads, &y.heads),
            });
        }
    }
}

/// k-best projective trees, best first, as `(heads, score)` with `heads[i]`
/// the head of token `i + 1`. Sibling scores select the second-order model.
pub fn decode_k_best<S: Scalar>(
    arcs: &ArcScores<S>,
    siblings: Option<&SiblingScores<S>>,
    options: DecodeOptions,
) -> Result<Vec<(Vec<usize>, S)>, DecodeError> {
    let n = arcs.n();
    if n == 0 {
        return Err(DecodeError::EmptySentence);
    }
    if options.k == 0 {
        return Err(DecodeError::ZeroK);
    }
    if let Some(sib) = siblings {
        if sib.n() != n {
            return Err(DecodeError::SizeMismatch {
                arcs: n,
                siblings: sib.n(),
            });
        }
    }
    let k = options.k;
    let first = if options.single_root { 1 } else { 0 };
    let mut chart: Chart<S> = Chart::new(n);
    for w in 1..=n {
        for s in first..=n - w {
            let t = s + w;
            let mut new_cells: [Option<Vec<Entry<S>>>; 5] = Default::default();
            {
                let c = &chart;
                if siblings.is_some() && s > 0 {
                    let mut cands = Vec::new();
                    for r in s..t {
                        pairs(c.get(CR, s, r), c.get(CL, r + 1, t), S::zero(), |x, y| [Piece::Run(x), Piece::Run(y), EMPTY], &mut cands);
                    }
                    new_cells[SIB] = Some(select(cands, k));
                }
                new_cells[IR] = Some(match siblings {
                    None => {
                        let mut cands = Vec::new();
                        let arc = arcs.get(s, t);
                        let hs = s as u32;
                        for r in s..t {
                            pairs(c.get(CR, s, r), c.get(CL, r + 1, t), arc, |x, y| [Piece::Run(x), Piece::Run(y), Piece::One(hs)], &mut cands);
                        }
                        select(cands, k)
                    }
                    Some(sib) => {
                        let mut cands = Vec::new();
                        let arc = arcs.get(s, t);
                        let hs = s as u32;
                        for x in c.get(CL, s + 1, t) {
                            cands.push(Cand {
                                score: x.score + arc + sib.get(s, None, t),
                                pieces: [Piece::Run(&x.heads), Piece::One(hs), EMPTY],
                            });
                        }
                        for r in s + 1..t {
                            let extra = arc + sib.get(s, Some(r), t);
                            pairs(c.get(IR, s, r), c.get(SIB, r, t), extra, |x, y| [Piece::Run(x), Piece::Run(y), Piece::One(hs)], &mut cands);
                        }
                        select(cands, k)
                    }
                });
            }
            chart.cells[IR][s * chart.m + t] = new_cells[IR].take().unwrap();
            if let Some(cell) = new_cells[SIB].take() {
                chart.cells[SIB][s * chart.m + t] = cell;
            }
            if s > 0 {
                let c = &chart;
                let arc = arcs.get(t, s);
                let ht = t as u32;
                let mut cands = Vec::new();
                match siblings {
                    None => {
                        for r in s..t {
                            pairs(c.get(CR, s, r), c.get(CL, r + 1, t), arc, |x, y| [Piece::One(ht), Piece::Run(x), Piece::Run(y)], &mut cands);
                        }
                    }
                    Some(sib) => {
                        for x in c.get(CR, s, t - 1) {
                            cands.push(Cand {
                                score: x.score + arc + sib.get(t, None, s),
                                pieces: [Piece::One(ht), Piece::Run(&x.heads), EMPTY],
                            });
                        }
                        for r in s + 1..t {
                            let extra = arc + sib.get(t, Some(r), s);
                            pairs(c.get(SIB, s, r), c.get(IL, r, t), extra, |x, y| [Piece::One(ht), Piece::Run(x), Piece::Run(y)], &mut cands);
                        }
                    }
                }
                new_cells[IL] = Some(select(cands, k));
            }
            if let Some(cell) = new_cells[IL].take() {
                chart.cells[IL][s * chart.m + t] = cell;
            }
            {
                let c = &chart;
                let mut cands = Vec::new();
                for r in s + 1..=t {
                    pairs(c.get(IR, s, r), c.get(CR, r, t), S::zero(), |x, y| [Piece::Run(x), Piece::Run(y), EMPTY], &mut cands);
                }
                new_cells[CR] = Some(select(cands, k));
                if s > 0 {
                    let mut cands = Vec::new();
                    for r in s..t {
                        pairs(c.get(CL, s, r), c.get(IL, r, t), S::zero(), |x, y| [Piece::Run(x), Piece::Run(y), EMPTY], &mut cands);
                    }
                    new_cells[CL] = Some(select(cands, k));
                }
            }
            chart.cells[CR][s * chart.m + t] = new_cells[CR].take().unwrap();
            if let Some(cell) = new_cells[CL].take() {
                chart.cells[CL][s * chart.m + t] = cell;
            }
        }
    }
    let best = if options.single_root {
        let c = &chart;
        let mut cands = Vec::new();
        for h in 1..=n {
            let mut extra = arcs.get(0, h);
            if let Some(sib) = siblings {
                extra += sib.get(0, None, h);
            }
            pairs(c.get(CL, 1, h), c.get(CR, h, n), extra, |x, y| [Piece::Run(x), Piece::One(0), Piece::Run(y)], &mut cands);
        }
        select(cands, k)
    } else {
        chart.get(CR, 0, n).to_vec()
    };
    Ok(best
        .into_iter()
        .map(|e| (e.heads.into_iter().map(|h| h as usize).collect(), e.score))
        .collect())
}

/// Best first-order projective single-root tree.
pub fn decode_first_order<S: Scalar>(arcs: &ArcScores<S>) -> Result<(DependencyTree, S), DecodeError> {
    let mut best = decode_k_best(arcs, None, DecodeOptions::default())?;
    let (heads, score) = best.swap_remove(0);
    Ok((DependencyTree::from_heads_unchecked(heads), score))
}

/// k best second-order projective single-root trees, best first.
pub fn decode_second_order<S: Scalar>(
    arcs: &ArcScores<S>,
    siblings: &SiblingScores<S>,
    k: usize,
) -> Result<Vec<(DependencyTree, S)>, DecodeError> {
    let options = DecodeOptions { k, single_root: true };
    Ok(decode_k_best(arcs, Some(siblings), options)?
        .into_iter()
        .map(|(h, s)| (DependencyTree::from_heads_unchecked(h), s))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_token_example() {
        let mut arcs = ArcScores::<f64>::zeros(2);
        arcs.set(0, 1, 1.0);
        arcs.set(0, 2, 0.0);
        arcs.set(1, 2, 2.0);
        arcs.set(2, 1, 0.5);
        let (tree, score) = decode_first_order(&arcs).unwrap();
        assert_eq!(tree.heads(), &[0, 1]);
        assert_eq!(score, 3.0);
    }

    #[test]
    fn degenerate_inputs() {
        let (tree, _) = decode_first_order(&ArcScores::<f64>::zeros(1)).unwrap();
        assert_eq!(tree.heads(), &[0]);
        assert_eq!(decode_first_order(&ArcScores::<f64>::zeros(0)).unwrap_err(), DecodeError::EmptySentence);
        let s = SiblingScores::zeros(3);
        assert_eq!(decode_second_order(&ArcScores::<f64>::zeros(3), &s, 0).unwrap_err(), DecodeError::ZeroK);
    }

    #[test]
    fn ties_pick_smallest_head_vector() {
        // every tree scores 0; [0,1,1] is the smallest head vector of a
        // single-root projective tree over three tokens
        let (tree, _) = decode_first_order(&ArcScores::<f32>::zeros(3)).unwrap();
        assert_eq!(tree.heads(), &[0, 1, 1]);
        let best = decode_second_order(&ArcScores::<f32>::zeros(3), &SiblingScores::zeros(3), 3).unwrap();
        let heads: Vec<&[usize]> = best.iter().map(|(t, _)| t.heads()).collect();
        assert_eq!(heads, vec![&[0, 1, 1][..], &[0, 1, 2], &[0, 3, 1]]);
    }

    #[test]
    fn multi_root_mode() {
        let arcs = ArcScores::<f64>::from_fn(3, |h, _| if h == 0 { 1.0 } else { 0.0 });
        let opts = DecodeOptions { k: 1, single_root: false };
        let best = decode_k_best(&arcs, None, opts).unwrap();
        assert_eq!(best[0], (vec![0, 0, 0], 3.0));
        let sib = SiblingScores::zeros(3);
        let best = decode_k_best(&arcs, Some(&sib), opts).unwrap();
        assert_eq!(best[0], (vec![0, 0, 0], 3.0));
    }

    #[test]
    fn reported_scores_match_factorization() {
        let arcs = ArcScores::<f64>::from_fn(4, |h, a| ((h * 7 + a * 3) % 5) as f64 - 2.0);
        let sib = SiblingScores::from_fn(4, |h, c1, c2| ((h + c1.unwrap_or(9) * 2 + c2) % 4) as f64 - 1.5);
        for (tree, score) in decode_second_order(&arcs, &sib, 5).unwrap() {
            assert_eq!(tree_score(&arcs, Some(&sib), tree.heads()), score);
        }
    }
}
