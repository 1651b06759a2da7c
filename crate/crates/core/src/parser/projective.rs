/// Does `ancestor` dominate `node` (reflexively) in the tree `heads`?
fn dominates(heads: &[usize], ancestor: usize, mut node: usize) -> bool {
    loop {
        if node == ancestor {
            return true;
        }
        if node == 0 {
            return false;
        }
        node = heads[node - 1];
    }
}

/// Dependents whose arc spans a token the head does not dominate.
pub fn non_projective_arcs(heads: &[usize]) -> Vec<usize> {
    (1..=heads.len())
        .filter(|&d| {
            let h = heads[d - 1];
            let (lo, hi) = (h.min(d), h.max(d));
            (lo + 1..hi).any(|k| !dominates(heads, h, k))
        })
        .collect()
}

/// Make a tree projective by repeatedly lifting the shortest non-projective
/// arc (leftmost dependent on ties) to the grandparent. Returns the new heads
/// and the number of lifts.
pub fn projectivize(heads: &[usize]) -> (Vec<usize>, usize) {
    let mut heads = heads.to_vec();
    let mut lifts = 0;
    loop {
        let bad = non_projective_arcs(&heads);
        let Some(&d) = bad.iter().min_by_key(|&&d| (heads[d - 1].abs_diff(d), d)) else {
            return (heads, lifts);
        };
        let h = heads[d - 1];
        heads[d - 1] = heads[h - 1];
        lifts += 1;
    }
}
