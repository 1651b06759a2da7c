use std::collections::HashMap;

use crate::scalar::Scalar;

/// Feature strings mapped to dense indices.
///
/// Strings are collected while the alphabet is open. Freezing sorts them,
/// so indices depend only on the set of strings and not on insertion order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Alphabet {
    names: Vec<String>,
    index: HashMap<String, u32>,
    frozen: bool,
}

impl Alphabet {
    pub fn new() -> Self {
        Self::default()
    }

    /// A frozen alphabet over the given strings.
    pub fn from_names<I: IntoIterator<Item = String>>(names: I) -> Self {
        let mut a = Alphabet::new();
        for name in names {
            a.insert(&name);
        }
        a.freeze();
        a
    }

    /// Add a string to an open alphabet; ignored once frozen.
    pub fn insert(&mut self, name: &str) {
        if self.frozen || self.index.contains_key(name) {
            return;
        }
        self.index.insert(name.to_owned(), self.names.len() as u32);
        self.names.push(name.to_owned());
    }

    pub fn freeze(&mut self) {
        if self.frozen {
            return;
        }
        self.names.sort_unstable();
        self.index = self
            .names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), i as u32))
            .collect();
        self.frozen = true;
    }

    pub fn is_frozen(&self) -> bool {
        self.frozen
    }

    pub fn get(&self, name: &str) -> Option<u32> {
        self.index.get(name).copied()
    }

    pub fn name(&self, index: u32) -> &str {
        &self.names[index as usize]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    /// Known strings as a vector; repeated strings add up, unknown ones are dropped.
    pub fn vectorize<'a, I: IntoIterator<Item = &'a String>>(&self, names: I) -> FeatureVector {
        FeatureVector::from_indices(names.into_iter().filter_map(|n| self.get(n)))
    }
}

/// Sparse vector with unique, ascending indices.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FeatureVector {
    entries: Vec<(u32, f64)>,
}

impl FeatureVector {
    pub fn new() -> Self {
        Self::default()
    }

    /// Each occurrence of an index adds 1.0.
    pub fn from_indices<I: IntoIterator<Item = u32>>(indices: I) -> Self {
        let mut idx: Vec<u32> = indices.into_iter().collect();
        idx.sort_unstable();
        let mut entries: Vec<(u32, f64)> = Vec::with_capacity(idx.len());
        for i in idx {
            match entries.last_mut() {
                Some((j, v)) if *j == i => *v += 1.0,
                _ => entries.push((i, 1.0)),
            }
        }
        FeatureVector { entries }
    }

    pub fn from_map(map: HashMap<u32, f64>) -> Self {
        let mut entries: Vec<(u32, f64)> = map.into_iter().filter(|&(_, v)| v != 0.0).collect();
        entries.sort_unstable_by_key(|e| e.0);
        FeatureVector { entries }
    }

    pub fn entries(&self) -> &[(u32, f64)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn dot<S: Scalar>(&self, weights: &[S]) -> S {
        let mut sum = S::zero();
        for &(i, v) in &self.entries {
            let w = weights[i as usize];
            sum += if v == 1.0 { w } else { w * S::of(v) };
        }
        sum
    }

    pub fn dot_vec(&self, other: &FeatureVector) -> f64 {
        let (mut i, mut j, mut sum) = (0, 0, 0.0);
        let (a, b) = (&self.entries, &other.entries);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    sum += a[i].1 * b[j].1;
                    i += 1;
                    j += 1;
                }
            }
        }
        sum
    }

    /// Add `scale * self` into a dense accumulator.
    pub fn add_to(&self, acc: &mut HashMap<u32, f64>, scale: f64) {
        for &(i, v) in &self.entries {
            *acc.entry(i).or_insert(0.0) += scale * v;
        }
    }
}
