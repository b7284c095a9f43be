//! Deterministic random streams.
//!
//! Every simulation takes an explicit stream so that replicas are
//! reproducible bit-for-bit across platforms and thread counts. Streams are
//! ChaCha8 generators (counter-based, platform independent) keyed by a
//! SplitMix64 finalizer over `(master_seed, stream label, replica index)`.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The generator handed to every simulation kernel.
pub type Stream = ChaCha8Rng;

/// SplitMix64 finalizer step.
#[inline]
pub fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// FNV-1a over the label bytes, so stream identities are human-readable.
fn label_hash(label: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Derive the stream for `(master_seed, label, replica)`.
///
/// The 256-bit ChaCha key is produced by running the SplitMix64 finalizer
/// over the concatenated fields; identical inputs give identical streams.
pub fn derive_stream(master_seed: u64, label: &str, replica: u64) -> Stream {
    let mut state = master_seed
        ^ label_hash(label).rotate_left(17)
        ^ replica.wrapping_mul(0x9e37_79b9_7f4a_7c15).rotate_left(32);
    let mut seed = [0u8; 32];
    for chunk in seed.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    Stream::from_seed(seed)
}

/// Exponential draw with the given mean, via inverse CDF.
///
/// Uses `-mean * ln(1 - u)` with `u` uniform on `[0, 1)`, so the result is
/// strictly positive and finite for `mean > 0`.
#[inline]
pub fn sample_exp<R: Rng + ?Sized>(rng: &mut R, mean: f64) -> f64 {
    let u: f64 = rng.gen();
    -mean * (1.0 - u).ln()
}

/// Standard normal draw (polar Marsaglia method).
pub fn sample_standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let u = 2.0 * rng.gen::<f64>() - 1.0;
        let v = 2.0 * rng.gen::<f64>() - 1.0;
        let s = u * u + v * v;
        if s > 0.0 && s < 1.0 {
            return u * ((-2.0 * s.ln()) / s).sqrt();
        }
    }
}

/// Poisson draw; Knuth's product method below mean 10, Hormann's PTRS
/// transformed rejection above (exact and O(1) for any mean).
pub fn sample_poisson<R: Rng + ?Sized>(rng: &mut R, mean: f64) -> u64 {
    assert!(mean >= 0.0 && mean.is_finite());
    if mean == 0.0 {
        return 0;
    }
    if mean < 10.0 {
        let limit = (-mean).exp();
        let mut product = 1.0f64;
        let mut count = 0u64;
        loop {
            product *= 1.0 - rng.gen::<f64>(); // uniform in (0, 1]
            if product <= limit {
                return count;
            }
            count += 1;
        }
    }
    let b = 0.931 + 2.53 * mean.sqrt();
    let a = -0.059 + 0.024_83 * b;
    let inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    let v_r = 0.9277 - 3.6224 / (b - 2.0);
    loop {
        let u = rng.gen::<f64>() - 0.5;
        let v = rng.gen::<f64>();
        let us = 0.5 - u.abs();
        let k = ((2.0 * a / us + b) * u + mean + 0.43).floor();
        if us >= 0.07 && v <= v_r {
            return k as u64;
        }
        if k < 0.0 || (us < 0.013 && v > us) {
            continue;
        }
        let lhs = (v * inv_alpha / (a / (us * us) + b)).ln();
        let rhs = k * mean.ln() - mean - crate::stats::ln_gamma(k + 1.0);
        if lhs <= rhs {
            return k as u64;
        }
    }
}

/// Gamma(shape, 1) draw by Marsaglia-Tsang squeeze, valid for any
/// positive shape.
///
/// Event-driven kernels use this to draw a whole Erlang waiting time in
/// one step: the sum of `k` unit exponentials is Gamma(k, 1).
pub fn sample_gamma<R: Rng + ?Sized>(rng: &mut R, shape: f64) -> f64 {
    assert!(shape > 0.0);
    if shape < 1.0 {
        // boost: Gamma(a) = Gamma(a+1) * U^{1/a}
        let g = sample_gamma(rng, shape + 1.0);
        let u: f64 = 1.0 - rng.gen::<f64>();
        return g * u.powf(1.0 / shape);
    }
    let d = shape - 1.0 / 3.0;
    let c = 1.0 / (9.0 * d).sqrt();
    loop {
        let x = sample_standard_normal(rng);
        let v = 1.0 + c * x;
        if v <= 0.0 {
            continue;
        }
        let v3 = v * v * v;
        let u: f64 = 1.0 - rng.gen::<f64>();
        if u.ln() < 0.5 * x * x + d - d * v3 + d * v3.ln() {
            return d * v3;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_inputs_identical_stream() {
        let mut a = derive_stream(42, "unit", 7);
        let mut b = derive_stream(42, "unit", 7);
        for _ in 0..1000 {
            assert_eq!(a.gen::<u64>(), b.gen::<u64>());
        }
    }

    #[test]
    fn replica_index_changes_stream() {
        let mut a = derive_stream(42, "unit", 0);
        let mut b = derive_stream(42, "unit", 1);
        assert_ne!(a.gen::<u64>(), b.gen::<u64>());
    }

    #[test]
    fn label_changes_stream() {
        let mut a = derive_stream(42, "alpha", 0);
        let mut b = derive_stream(42, "beta", 0);
        assert_ne!(a.gen::<u64>(), b.gen::<u64>());
    }

    #[test]
    fn exponential_is_positive_and_has_right_mean() {
        let mut rng = derive_stream(1, "exp", 0);
        let n = 200_000;
        let mut sum = 0.0;
        for _ in 0..n {
            let x = sample_exp(&mut rng, 2.0);
            assert!(x > 0.0 && x.is_finite());
            sum += x;
        }
        let mean = sum / n as f64;
        // stderr of the mean is 2/sqrt(n) ~ 0.0045
        assert!((mean - 2.0).abs() < 4.0 * 2.0 / (n as f64).sqrt());
    }

    #[test]
    fn normal_moments() {
        let mut rng = derive_stream(1, "normal", 0);
        let n = 400_000;
        let (mut sum, mut sq) = (0.0, 0.0);
        for _ in 0..n {
            let x = sample_standard_normal(&mut rng);
            sum += x;
            sq += x * x;
        }
        let nf = n as f64;
        assert!((sum / nf).abs() < 4.0 / nf.sqrt());
        assert!((sq / nf - 1.0).abs() < 4.0 * 2f64.sqrt() / nf.sqrt());
    }

    #[test]
    fn poisson_pmf_at_moderate_mean() {
        use crate::stats::chi_square_gof;
        let mut rng = derive_stream(1, "poisson-pmf", 0);
        let lambda = 8.0;
        let max_k = 24usize;
        let mut counts = vec![0u64; max_k + 1];
        for _ in 0..200_000 {
            counts[(sample_poisson(&mut rng, lambda) as usize).min(max_k)] += 1;
        }
        let mut probs = vec![0.0; max_k + 1];
        let mut pmf = (-lambda).exp();
        let mut cum = 0.0;
        for (k, p) in probs.iter_mut().enumerate().take(max_k) {
            *p = pmf;
            cum += pmf;
            pmf *= lambda / (k as f64 + 1.0);
        }
        probs[max_k] = 1.0 - cum;
        let gof = chi_square_gof(&counts, &probs);
        assert!(gof.p_value > 0.001, "chi2 p = {}", gof.p_value);
    }

    #[test]
    fn poisson_moments_across_regimes() {
        let mut rng = derive_stream(1, "poisson-mom", 0);
        for mean in [3.0f64, 50.0, 200_000.0] {
            let n = 50_000;
            let (mut sum, mut sq) = (0.0, 0.0);
            for _ in 0..n {
                let x = sample_poisson(&mut rng, mean) as f64;
                sum += x;
                sq += x * x;
            }
            let nf = n as f64;
            let m = sum / nf;
            let var = sq / nf - m * m;
            assert!(
                (m - mean).abs() < 4.0 * (mean / nf).sqrt(),
                "mean {mean}: {m}"
            );
            assert!(
                (var - mean).abs() < 6.0 * mean * (2.0 / nf).sqrt(),
                "mean {mean}: var {var}"
            );
        }
    }

    #[test]
    fn gamma_matches_erlang_moments() {
        // Gamma(k,1) against the sum-of-exponentials moments, both for a
        // large integer shape (the kernel use case) and a fractional one
        let mut rng = derive_stream(1, "gamma", 0);
        for shape in [0.5f64, 3.0, 1000.0] {
            let n = 100_000;
            let (mut sum, mut sq) = (0.0, 0.0);
            for _ in 0..n {
                let x = sample_gamma(&mut rng, shape);
                assert!(x > 0.0 && x.is_finite());
                sum += x;
                sq += x * x;
            }
            let nf = n as f64;
            let mean = sum / nf;
            let var = sq / nf - mean * mean;
            // mean k with sd sqrt(k/n), variance k with sd ~ k sqrt(2/n + ...)
            assert!(
                (mean - shape).abs() < 4.0 * (shape / nf).sqrt(),
                "shape {shape}: mean {mean}"
            );
            assert!(
                (var - shape).abs() < 5.0 * shape * (2.0 / nf).sqrt() + 4.0 * (shape / nf).sqrt(),
                "shape {shape}: var {var}"
            );
        }
    }
}
