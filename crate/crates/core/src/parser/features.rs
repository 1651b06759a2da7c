//! Feature templates: baseline arc and sibling templates plus corpus count
//! features.
//!
//! Every feature is a string. Baseline arc templates are emitted twice, once
//! plain and once conjoined with direction and distance bin. For an arc with
//! surface distance `d` there are `2 * (16 + d)` baseline strings for a real
//! head and `2 * (9 + d)` for the root, counted with multiplicity.

use crate::conll::Sentence;
use crate::counts::{bucketize, cumulative_buckets, CountTable};
use crate::paraphrase::{ParaphraseLists, Slot};
use crate::query::{keys, lookup_keys_for, AffinityPattern, Direction, DistanceBin, Variant};

use super::tagger::UnigramTagger;
use super::ParserError;

/// Marker for the missing first sibling.
pub const FIRST: &str = "<first>";
const BOS: &str = "<s>";
const EOS: &str = "</s>";

/// Enabled feature groups.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FeatureGroups {
    pub baseline: bool,
    pub surface_affinity: bool,
    pub surface_paraphrase: bool,
    pub surface_second_order: bool,
    pub syntactic_first_order: bool,
    pub syntactic_second_order: bool,
    pub syntactic_paraphrase: bool,
}

impl Default for FeatureGroups {
    fn default() -> Self {
        FeatureGroups::baseline_only()
    }
}

impl FeatureGroups {
    pub const NAMES: [&'static str; 7] = [
        "baseline",
        "surface-affinity",
        "surface-paraphrase",
        "surface-second-order",
        "syntactic-first-order",
        "syntactic-second-order",
        "syntactic-paraphrase",
    ];

    pub fn none() -> Self {
        FeatureGroups {
            baseline: false,
            surface_affinity: false,
            surface_paraphrase: false,
            surface_second_order: false,
            syntactic_first_order: false,
            syntactic_second_order: false,
            syntactic_paraphrase: false,
        }
    }

    pub fn baseline_only() -> Self {
        FeatureGroups {
            baseline: true,
            ..FeatureGroups::none()
        }
    }

    pub fn all() -> Self {
        FeatureGroups {
            baseline: true,
            surface_affinity: true,
            surface_paraphrase: true,
            surface_second_order: true,
            syntactic_first_order: true,
            syntactic_second_order: true,
            syntactic_paraphrase: true,
        }
    }

    fn flags(&self) -> [bool; 7] {
        [
            self.baseline,
            self.surface_affinity,
            self.surface_paraphrase,
            self.surface_second_order,
            self.syntactic_first_order,
            self.syntactic_second_order,
            self.syntactic_paraphrase,
        ]
    }

    pub fn get(&self, name: &str) -> Option<bool> {
        let i = Self::NAMES.iter().position(|n| *n == name)?;
        Some(self.flags()[i])
    }

    pub fn set(&mut self, name: &str, on: bool) -> bool {
        let slot = match name {
            "baseline" => &mut self.baseline,
            "surface-affinity" => &mut self.surface_affinity,
            "surface-paraphrase" => &mut self.surface_paraphrase,
            "surface-second-order" => &mut self.surface_second_order,
            "syntactic-first-order" => &mut self.syntactic_first_order,
            "syntactic-second-order" => &mut self.syntactic_second_order,
            "syntactic-paraphrase" => &mut self.syntactic_paraphrase,
            _ => return false,
        };
        *slot = on;
        true
    }

    /// Names of the enabled groups, comma separated.
    pub fn to_list(&self) -> String {
        Self::NAMES
            .iter()
            .zip(self.flags())
            .filter(|(_, on)| *on)
            .map(|(n, _)| *n)
            .collect::<Vec<_>>()
            .join(",")
    }

    pub fn from_list(list: &str) -> Option<Self> {
        let mut g = FeatureGroups::none();
        for name in list.split(',').filter(|s| !s.is_empty()) {
            if !g.set(name.trim(), true) {
                return None;
            }
        }
        Some(g)
    }
}

/// Count tables and context-word lists used by the count features.
#[derive(Clone, Debug, Default)]
pub struct Resources {
    /// Affinity and surface triple counts.
    pub surface: Option<CountTable>,
    /// Surface context words, keyed by word pair in linear order.
    pub surface_paraphrase: Option<ParaphraseLists>,
    /// First- and second-order syntactic counts.
    pub syntactic: Option<CountTable>,
    /// Syntactic context words and tags, keyed by role pair.
    pub syntactic_words: Option<ParaphraseLists>,
    pub syntactic_tags: Option<ParaphraseLists>,
}

impl Resources {
    /// Fail if an enabled group lacks its table.
    pub fn check(&self, groups: &FeatureGroups) -> Result<(), ParserError> {
        let missing = |name: &'static str| Err(ParserError::MissingResource(name));
        if (groups.surface_affinity || groups.surface_second_order) && self.surface.is_none() {
            return missing("surface count table");
        }
        if (groups.surface_paraphrase || groups.surface_second_order) && self.surface_paraphrase.is_none() {
            return missing("surface paraphrase lists");
        }
        if (groups.syntactic_first_order || groups.syntactic_second_order) && self.syntactic.is_none() {
            return missing("syntactic count table");
        }
        if groups.syntactic_paraphrase && (self.syntactic_words.is_none() || self.syntactic_tags.is_none()) {
            return missing("syntactic paraphrase lists");
        }
        Ok(())
    }
}

/// `prefix:bucket=B` and `prefix:bucket>=b` for every cumulative label.
pub fn bucket_features(prefix: &str, count: u64, out: &mut Vec<String>) {
    if let Some(b) = bucketize(count) {
        out.push(format!("{prefix}:bucket={b}"));
        for c in cumulative_buckets(b) {
            out.push(format!("{prefix}:bucket>={c}"));
        }
    }
}

fn pos_at(s: &Sentence, i: isize) -> &str {
    if i < 0 {
        BOS
    } else if i as usize > s.len() {
        EOS
    } else {
        s.fpos(i as usize)
    }
}

/// Baseline templates for the arc `head -> arg`.
pub fn baseline_arc_features(s: &Sentence, head: usize, arg: usize, out: &mut Vec<String>) {
    let (hw, hp, aw, ap) = (s.form(head), s.fpos(head), s.form(arg), s.fpos(arg));
    let dir = Direction::of(head, arg);
    let bin = DistanceBin::between(head, arg);
    let mut emit = |name: String| {
        out.push(format!("{name}&{dir}&{bin}"));
        out.push(name);
    };
    if head != 0 {
        emit(format!("A01:{hw} {hp}"));
        emit(format!("A02:{hw}"));
        emit(format!("A07:{hw} {hp} {aw} {ap}"));
        emit(format!("A09:{hw} {aw} {ap}"));
        emit(format!("A10:{hw} {hp} {ap}"));
        emit(format!("A11:{hw} {hp} {aw}"));
        emit(format!("A12:{hw} {aw}"));
    }
    emit(format!("A03:{hp}"));
    emit(format!("A04:{aw} {ap}"));
    emit(format!("A05:{aw}"));
    emit(format!("A06:{ap}"));
    emit(format!("A08:{hp} {aw} {ap}"));
    emit(format!("A13:{hp} {ap}"));
    let (lo, hi) = (head.min(arg), head.max(arg));
    for b in lo + 1..hi {
        emit(format!("B:{hp} {} {ap}", s.fpos(b)));
    }
    let (h, a) = (head as isize, arg as isize);
    emit(format!("C1:{hp} {} {} {ap}", pos_at(s, h + 1), pos_at(s, a - 1)));
    emit(format!("C2:{} {hp} {} {ap}", pos_at(s, h - 1), pos_at(s, a - 1)));
    emit(format!("C3:{hp} {} {ap} {}", pos_at(s, h + 1), pos_at(s, a + 1)));
    emit(format!("C4:{} {hp} {ap} {}", pos_at(s, h - 1), pos_at(s, a + 1)));
}

/// Baseline templates for `child2` attached to `parent` next to `child1`
/// (`None` for the first child on that side).
pub fn baseline_sibling_features(s: &Sentence, parent: usize, child1: Option<usize>, child2: usize, out: &mut Vec<String>) {
    let hp = s.fpos(parent);
    let (c1w, c1p, bin) = match child1 {
        Some(c) => (s.form(c), s.fpos(c), DistanceBin::between(c, child2).as_str()),
        None => (FIRST, FIRST, "first"),
    };
    let (c2w, c2p) = (s.form(child2), s.fpos(child2));
    let dir = Direction::of(parent, child2);
    let mut emit = |name: String| {
        out.push(format!("{name}&{dir}&{bin}"));
        out.push(format!("{name}&{dir}"));
    };
    emit(format!("S1:{hp} {c1p} {c2p}"));
    emit(format!("S2:{c1p} {c2p}"));
    emit(format!("S3:{c1w} {c2w}"));
    emit(format!("S4:{c1w} {c2p}"));
    emit(format!("S5:{c1p} {c2w}"));
}

/// Builds feature strings for one configuration of groups and resources.
#[derive(Clone, Copy, Debug)]
pub struct FeatureExtractor<'a> {
    pub groups: FeatureGroups,
    pub resources: &'a Resources,
    pub tagger: &'a UnigramTagger,
}

fn linear(s: &Sentence, a: usize, b: usize) -> (&str, &str) {
    if a < b {
        (s.form(a), s.form(b))
    } else {
        (s.form(b), s.form(a))
    }
}

impl<'a> FeatureExtractor<'a> {
    pub fn new(groups: FeatureGroups, resources: &'a Resources, tagger: &'a UnigramTagger) -> Result<Self, ParserError> {
        resources.check(&groups)?;
        Ok(FeatureExtractor {
            groups,
            resources,
            tagger,
        })
    }

    pub fn arc(&self, s: &Sentence, head: usize, arg: usize, out: &mut Vec<String>) {
        if self.groups.baseline {
            baseline_arc_features(s, head, arg, out);
        }
        self.count_arc_features(s, head, arg, out);
    }

    pub fn sibling(&self, s: &Sentence, parent: usize, child1: Option<usize>, child2: usize, out: &mut Vec<String>) {
        if self.groups.baseline {
            baseline_sibling_features(s, parent, child1, child2, out);
        }
        if let Some(c1) = child1 {
            self.count_sibling_features(s, parent, c1, child2, out);
        }
    }

    /// Corpus count features of an arc; nothing for a root head.
    pub fn count_arc_features(&self, s: &Sentence, head: usize, arg: usize, out: &mut Vec<String>) {
        if head == 0 {
            return;
        }
        let g = &self.groups;
        let (hw, hp, aw, ap) = (s.form(head), s.fpos(head), s.form(arg), s.fpos(arg));
        let dir = Direction::of(head, arg);
        let bin = DistanceBin::between(head, arg);
        let (q1, q2) = linear(s, head, arg);
        if g.surface_affinity {
            let table = self.resources.surface.as_ref().expect("checked");
            let total: u64 = AffinityPattern::ALL
                .iter()
                .map(|&p| table.get(&keys::affinity(p, q1, q2)))
                .sum();
            bucket_features(&format!("sa:affinity:{hp}:{ap}:{dir}:{bin}"), total, out);
        }
        if g.surface_paraphrase {
            let lists = self.resources.surface_paraphrase.as_ref().expect("checked");
            self.surface_context(lists, &keys::pair(q1, q2), &format!("sp:{{slot}}:{hp}:{ap}"), out);
        }
        if g.syntactic_first_order {
            let table = self.resources.syntactic.as_ref().expect("checked");
            for key in lookup_keys_for(hw, hp, aw, ap, dir) {
                let count = table.get(&key.to_key_string());
                bucket_features(&format!("syn:{}:{hp}:{ap}:{dir}:{bin}", key.kind.name()), count, out);
            }
        }
        if g.syntactic_paraphrase {
            let key = keys::role_pair(hw, aw, dir);
            let words = self.resources.syntactic_words.as_ref().expect("checked");
            let tags = self.resources.syntactic_tags.as_ref().expect("checked");
            for slot in Slot::ALL {
                for (w, _) in words.get(&key, slot) {
                    out.push(format!("synp:{slot}:{hp}:{ap}:w={w}"));
                }
                for (t, _) in tags.get(&key, slot) {
                    out.push(format!("synp:{slot}:{hp}:{ap}:t={t}"));
                }
            }
        }
    }

    /// Context words of a surface pair and the distinct unigram tags of those
    /// words; `template` contains `{slot}`.
    fn surface_context(&self, lists: &ParaphraseLists, key: &str, template: &str, out: &mut Vec<String>) {
        for slot in Slot::ALL {
            let prefix = template.replace("{slot}", slot.as_str());
            let list = lists.get(key, slot);
            let mut tags: Vec<&str> = Vec::new();
            for (w, _) in list {
                out.push(format!("{prefix}:w={w}"));
                let t = self.tagger.tag(w);
                if !tags.contains(&t) {
                    tags.push(t);
                }
            }
            for t in tags {
                out.push(format!("{prefix}:t={t}"));
            }
        }
    }

    /// Corpus count features of a real sibling pair; nothing for a root parent.
    pub fn count_sibling_features(&self, s: &Sentence, parent: usize, child1: usize, child2: usize, out: &mut Vec<String>) {
        if parent == 0 {
            return;
        }
        let g = &self.groups;
        let (pp, c1p, c2p) = (s.fpos(parent), s.fpos(child1), s.fpos(child2));
        let dir = Direction::of(parent, child2);
        let bin = DistanceBin::between(child1, child2);
        let mut order = [parent, child1, child2];
        order.sort_unstable();
        let tail = format!("{pp}:{c1p}:{c2p}:{dir}:{bin}");
        if g.surface_second_order {
            let table = self.resources.surface.as_ref().expect("checked");
            let [x, y, z] = order.map(|i| s.form(i));
            bucket_features(&format!("s3:triple:{tail}"), table.get(&keys::surface_triple(x, y, z)), out);
            let (q1, q2) = linear(s, child1, child2);
            let total: u64 = AffinityPattern::ALL
                .iter()
                .map(|&p| table.get(&keys::affinity(p, q1, q2)))
                .sum();
            bucket_features(&format!("ss:sibling:{tail}"), total, out);
            let lists = self.resources.surface_paraphrase.as_ref().expect("checked");
            self.surface_context(lists, &keys::pair(q1, q2), &format!("ssp:{{slot}}:{pp}:{c1p}:{c2p}"), out);
        }
        if g.syntactic_second_order {
            let table = self.resources.syntactic.as_ref().expect("checked");
            let forms = order.map(|i| s.form(i));
            let tags = order.map(|i| s.fpos(i));
            let word = keys::syntactic_triple(Variant::Word, dir, forms);
            let pos = keys::syntactic_triple(Variant::Pos, dir, tags);
            bucket_features(&format!("y3w:{tail}"), table.get(&word), out);
            bucket_features(&format!("y3p:{tail}"), table.get(&pos), out);
            let (l, r) = (child1.min(child2), child1.max(child2));
            let sw = keys::syntactic_sibling(Variant::Word, s.form(l), s.form(r));
            let sp = keys::syntactic_sibling(Variant::Pos, s.fpos(l), s.fpos(r));
            bucket_features(&format!("ysw:{tail}"), table.get(&sw), out);
            bucket_features(&format!("ysp:{tail}"), table.get(&sp), out);
        }
    }
}

/// Second-order factors of a tree: `(parent, previous sibling, child)` for
/// every child, siblings taken inside-out on each side of the parent.
pub fn sibling_factors(heads: &[usize]) -> Vec<(usize, Option<usize>, usize)> {
    let n = heads.len();
    let mut out = Vec::new();
    for p in 0..=n {
        let mut prev = None;
        for c in (1..p).rev().filter(|&c| heads[c - 1] == p) {
            out.push((p, prev, c));
            prev = Some(c);
        }
        let mut prev = None;
        for c in (p + 1..=n).filter(|&c| heads[c - 1] == p) {
            out.push((p, prev, c));
            prev = Some(c);
        }
    }
    out
}
