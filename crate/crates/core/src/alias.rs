//! Walker alias table for O(1) categorical sampling.
//!
//! Built once per environment (Vose's method) and then queried once per
//! event, which is what makes the forward voter kernel event-count bound
//! rather than site-count bound.

use rand::distributions::Uniform;
use rand::Rng;

/// Precomputed alias table over a fixed finite distribution.
///
/// Index draws use u32 uniforms so streams are identical on every
/// platform word size.
#[derive(Debug, Clone)]
pub struct AliasTable {
    prob: Vec<f64>,
    alias: Vec<usize>,
    index: Uniform<u32>,
}

impl AliasTable {
    /// Build the table from unnormalized non-negative weights.
    ///
    /// Panics if the weights are empty, contain a negative or non-finite
    /// entry, or sum to zero.
    pub fn new(weights: &[f64]) -> Self {
        let n = weights.len();
        assert!(n > 0, "alias table needs at least one weight");
        let total: f64 = weights.iter().sum();
        assert!(
            total > 0.0 && total.is_finite(),
            "weights must sum to a positive finite value"
        );
        for w in weights {
            assert!(*w >= 0.0 && w.is_finite(), "weights must be non-negative");
        }
        let mut prob: Vec<f64> = weights.iter().map(|w| w * n as f64 / total).collect();
        let mut alias = vec![0usize; n];
        let mut small: Vec<usize> = Vec::with_capacity(n);
        let mut large: Vec<usize> = Vec::with_capacity(n);
        for (i, p) in prob.iter().enumerate() {
            if *p < 1.0 {
                small.push(i);
            } else {
                large.push(i);
            }
        }
        while let (Some(s), Some(l)) = (small.pop(), large.pop()) {
            alias[s] = l;
            prob[l] = (prob[l] + prob[s]) - 1.0;
            if prob[l] < 1.0 {
                small.push(l);
            } else {
                large.push(l);
            }
        }
        // leftovers are 1 up to rounding
        for i in small.into_iter().chain(large) {
            prob[i] = 1.0;
        }
        assert!(prob.len() <= u32::MAX as usize);
        AliasTable {
            index: Uniform::from(0..prob.len() as u32),
            prob,
            alias,
        }
    }

    /// Number of categories.
    pub fn len(&self) -> usize {
        self.prob.len()
    }

    /// True when the table has no categories (never, by construction).
    pub fn is_empty(&self) -> bool {
        self.prob.is_empty()
    }

    /// Draw one category index.
    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let i = rng.sample(self.index) as usize;
        if rng.gen::<f64>() < self.prob[i] {
            i
        } else {
            self.alias[i]
        }
    }
}
