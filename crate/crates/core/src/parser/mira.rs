//! Hildreth's procedure for the k-constraint MIRA quadratic program.

use super::alphabet::FeatureVector;

pub const HILDRETH_EPS: f64 = 1e-8;
pub const HILDRETH_MAX_ITER: usize = 10_000;
const ZERO: f64 = 1e-12;

/// Multipliers `alpha >= 0` for `min ||dw||^2 / 2` subject to
/// `a_i . dw >= b_i`, with `dw = sum alpha_i a_i`.
pub fn hildreth(a: &[FeatureVector], b: &[f64]) -> Vec<f64> {
    let k = a.len();
    assert_eq!(k, b.len(), "one bound per constraint");
    let mut alpha = vec![0.0; k];
    if k == 0 {
        return alpha;
    }
    let gram: Vec<Vec<f64>> = (0..k).map(|i| (0..k).map(|j| a[i].dot_vec(&a[j])).collect()).collect();
    let mut f = b.to_vec();
    let mut kkt = f.clone();
    let argmax = |v: &[f64]| {
        let mut best = 0;
        for (i, &x) in v.iter().enumerate() {
            if x > v[best] {
                best = i;
            }
        }
        best
    };
    let mut i = argmax(&kkt);
    let mut iter = 0;
    while kkt[i] >= HILDRETH_EPS && iter < HILDRETH_MAX_ITER {
        let diff = if gram[i][i] <= ZERO { 0.0 } else { f[i] / gram[i][i] };
        let add = if alpha[i] + diff < 0.0 { -alpha[i] } else { diff };
        alpha[i] += add;
        for j in 0..k {
            f[j] -= add * gram[i][j];
            kkt[j] = if alpha[j] > ZERO { f[j].abs() } else { f[j] };
        }
        i = argmax(&kkt);
        iter += 1;
    }
    alpha
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_constraint_closed_form() {
        // alpha = b / ||a||^2
        let a = FeatureVector::from_indices([0, 1, 1]);
        let alpha = hildreth(&[a], &[10.0]);
        assert!((alpha[0] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn satisfied_constraints_stay_zero() {
        let a = FeatureVector::from_indices([0]);
        assert_eq!(hildreth(std::slice::from_ref(&a), &[-1.0]), vec![0.0]);
        assert_eq!(hildreth(&[FeatureVector::new()], &[3.0]), vec![0.0]);
    }

    #[test]
    fn two_constraints_satisfied_at_solution() {
        let a1 = FeatureVector::from_indices([0, 1]);
        let a2 = FeatureVector::from_indices([1, 2]);
        let b = [1.0, 2.0];
        let alpha = hildreth(&[a1.clone(), a2.clone()], &b);
        // dw = alpha1 a1 + alpha2 a2 must satisfy both margins
        let mut dw = std::collections::HashMap::new();
        a1.add_to(&mut dw, alpha[0]);
        a2.add_to(&mut dw, alpha[1]);
        let dw = FeatureVector::from_map(dw);
        assert!(a1.dot_vec(&dw) >= b[0] - 1e-6);
        assert!(a2.dot_vec(&dw) >= b[1] - 1e-6);
        assert!(alpha.iter().all(|&x| x >= 0.0));
    }
}
