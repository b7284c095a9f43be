//! Heavy-tailed weight landscapes, their extreme-value rescaling and the
//! limiting ranked environment.
//!
//! A landscape is a ranked vector of positive mean waiting times
//! `w_1 >= ... >= w_n` drawn i.i.d. from a law with survival
//! `t^{-alpha} L(t)`, together with the scaling constant `a_n` solving
//! `n * P(w > a_n) = 1`. The limiting environment is the ranked sequence
//! `xi_i = (chi_1 + ... + chi_i)^{-1/alpha}` built from a standard
//! exponential stream.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::stats::pairwise_sum;

/// Relative tolerance on the defining equation `n * S(a_n) = 1`.
const SCALE_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Error, PartialEq)]
pub enum EnvError {
    #[error("tail index alpha must lie in (0,1), got {0}")]
    InvalidAlpha(f64),
    #[error("scale xmin must be positive and finite, got {0}")]
    InvalidXmin(f64),
    #[error("beta = {beta} leaves the survival function non-monotone for alpha = {alpha}")]
    InvalidBeta { alpha: f64, beta: f64 },
    #[error("sample size must be at least 1")]
    EmptySample,
    #[error("truncation depth must be at least 1")]
    EmptyDepth,
    #[error("scale solver failed to bracket a root at n = {0}")]
    SolverFailure(usize),
    #[error("chi stream must be strictly positive, finite and yield strictly decreasing xi")]
    DegenerateStream,
    #[error("lambda = {0} is too close to a pole of the summand")]
    PoleProximity(f64),
}

/// Slowly varying correction `L` in the tail law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum TailFamily {
    /// `L = 1`: survival is exactly `(t/xmin)^{-alpha}`.
    ParetoExact,
    /// `L(t) = log(e + t)^beta`, exercising L-independence of the limit.
    ParetoLogPerturbed { beta: f64 },
}

impl TailFamily {
    pub fn name(&self) -> &'static str {
        match self {
            TailFamily::ParetoExact => "pareto_exact",
            TailFamily::ParetoLogPerturbed { .. } => "pareto_log_perturbed",
        }
    }

    pub fn beta(&self) -> Option<f64> {
        match self {
            TailFamily::ParetoExact => None,
            TailFamily::ParetoLogPerturbed { beta } => Some(*beta),
        }
    }
}

/// A heavy-tailed waiting-time law with tail index in (0,1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailLaw {
    alpha: f64,
    family: TailFamily,
    xmin: f64,
}

impl TailLaw {
    pub fn new(alpha: f64, family: TailFamily, xmin: f64) -> Result<Self, EnvError> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(EnvError::InvalidAlpha(alpha));
        }
        if !(xmin > 0.0 && xmin.is_finite()) {
            return Err(EnvError::InvalidXmin(xmin));
        }
        if let TailFamily::ParetoLogPerturbed { beta } = family {
            // monotone survival requires beta/alpha < ~3.146; stay clear
            if !beta.is_finite() || beta > 3.0 * alpha {
                return Err(EnvError::InvalidBeta { alpha, beta });
            }
        }
        Ok(TailLaw {
            alpha,
            family,
            xmin,
        })
    }

    /// Canonical exact Pareto with `xmin = 1`.
    pub fn pareto(alpha: f64) -> Result<Self, EnvError> {
        Self::new(alpha, TailFamily::ParetoExact, 1.0)
    }

    /// Canonical log-perturbed family with `xmin = 1`.
    pub fn pareto_log_perturbed(alpha: f64, beta: f64) -> Result<Self, EnvError> {
        Self::new(alpha, TailFamily::ParetoLogPerturbed { beta }, 1.0)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn family(&self) -> TailFamily {
        self.family
    }

    pub fn xmin(&self) -> f64 {
        self.xmin
    }

    /// Survival function `P(w > t)`, clamped to `[0, 1]`.
    pub fn survival(&self, t: f64) -> f64 {
        let s = t / self.xmin;
        if s <= 0.0 {
            return 1.0;
        }
        let raw = match self.family {
            TailFamily::ParetoExact => s.powf(-self.alpha),
            TailFamily::ParetoLogPerturbed { beta } => {
                s.powf(-self.alpha) * (std::f64::consts::E + s).ln().powf(beta)
            }
        };
        raw.min(1.0)
    }

    /// Lower support bound: the point where the survival reaches 1.
    pub fn support_edge(&self) -> f64 {
        match self.family {
            TailFamily::ParetoExact => self.xmin,
            TailFamily::ParetoLogPerturbed { .. } => self.inverse_survival_raw(1.0),
        }
    }

    /// Inverse survival: the weight whose survival level is `u`.
    ///
    /// This is the inverse-CDF sampling transform; `u = 0.25` at
    /// `alpha = 1/2` on the exact Pareto gives `u^{-2} = 16`.
    pub fn quantile_from_survival(&self, u: f64) -> f64 {
        assert!(u > 0.0 && u <= 1.0, "survival level must be in (0,1]");
        match self.family {
            TailFamily::ParetoExact => self.xmin * u.powf(-1.0 / self.alpha),
            TailFamily::ParetoLogPerturbed { .. } => self.inverse_survival_raw(u),
        }
    }

    /// One inverse-CDF draw.
    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u = 1.0 - rng.gen::<f64>(); // in (0, 1]
        self.quantile_from_survival(u)
    }

    /// Monotone bisection for the unclamped survival, solving
    /// `raw_survival(t) = u` to relative precision ~1e-15.
    fn inverse_survival_raw(&self, u: f64) -> f64 {
        let raw = |t: f64| -> f64 {
            let s = t / self.xmin;
            match self.family {
                TailFamily::ParetoExact => s.powf(-self.alpha),
                TailFamily::ParetoLogPerturbed { beta } => {
                    s.powf(-self.alpha) * (std::f64::consts::E + s).ln().powf(beta)
                }
            }
        };
        // bracket: raw is strictly decreasing, -> infinity at 0+, -> 0 at
        // infinity
        let mut lo = self.xmin;
        while raw(lo) < u {
            lo *= 0.5;
        }
        let mut hi = lo.max(self.xmin);
        while raw(hi) >= u {
            hi *= 2.0;
            assert!(hi.is_finite(), "failed to bracket inverse survival");
        }
        for _ in 0..200 {
            let mid = (lo * hi).sqrt();
            if raw(mid) >= u {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-15 * hi {
                break;
            }
        }
        0.5 * (lo + hi)
    }
}

/// A finite ranked weight landscape with its scaling constant.
#[derive(Debug, Clone, PartialEq)]
pub struct Environment {
    n: usize,
    weights: Vec<f64>,
    a_n: f64,
    total: f64,
}

impl Environment {
    /// Wrap raw weights: sorts descending (stable in draw order on ties)
    /// and records the total mass.
    pub fn from_weights(mut weights: Vec<f64>, a_n: f64) -> Result<Self, EnvError> {
        if weights.is_empty() {
            return Err(EnvError::EmptySample);
        }
        if weights.iter().any(|w| !(*w > 0.0 && w.is_finite())) {
            return Err(EnvError::DegenerateStream);
        }
        weights.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let total = pairwise_sum(&weights);
        Ok(Environment {
            n: weights.len(),
            weights,
            a_n,
            total,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Weight of the site with rank `i` (0-based; rank 0 is the heaviest).
    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn a_n(&self) -> f64 {
        self.a_n
    }

    pub fn total(&self) -> f64 {
        self.total
    }
}

/// Draw `n` i.i.d. weights from `law` and rank them.
pub fn sample_weights<R: Rng + ?Sized>(
    law: &TailLaw,
    n: usize,
    rng: &mut R,
) -> Result<Environment, EnvError> {
    if n == 0 {
        return Err(EnvError::EmptySample);
    }
    let a_n = scale_constant(law, n)?;
    let weights: Vec<f64> = (0..n).map(|_| law.sample(rng)).collect();
    Environment::from_weights(weights, a_n)
}

/// The scaling constant `a_n` with `n * P(w > a_n) = 1`.
///
/// Closed form `xmin * n^{1/alpha}` for the exact Pareto; monotone
/// bisection on the explicit survival otherwise, to relative tolerance
/// 1e-10 on the defining equation.
pub fn scale_constant(law: &TailLaw, n: usize) -> Result<f64, EnvError> {
    if n == 0 {
        return Err(EnvError::EmptySample);
    }
    match law.family {
        TailFamily::ParetoExact => Ok(law.xmin * (n as f64).powf(1.0 / law.alpha)),
        TailFamily::ParetoLogPerturbed { .. } => {
            let target = 1.0 / n as f64;
            let mut lo = law.support_edge();
            if law.survival(lo) < target {
                return Err(EnvError::SolverFailure(n));
            }
            let mut hi = lo;
            let mut guard = 0;
            while law.survival(hi) >= target {
                hi *= 2.0;
                guard += 1;
                if guard > 2000 || !hi.is_finite() {
                    return Err(EnvError::SolverFailure(n));
                }
            }
            for _ in 0..200 {
                let mid = (lo * hi).sqrt();
                if law.survival(mid) >= target {
                    lo = mid;
                } else {
                    hi = mid;
                }
                let a = 0.5 * (lo + hi);
                let resid = n as f64 * law.survival(a) - 1.0;
                if resid.abs() <= SCALE_TOLERANCE {
                    return Ok(a);
                }
            }
            Err(EnvError::SolverFailure(n))
        }
    }
}

/// A truncated realization of the limiting ranked environment.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitEnvironment {
    alpha: f64,
    depth: usize,
    xi: Vec<f64>,
    partial_mass: f64,
}

impl LimitEnvironment {
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn xi(&self) -> &[f64] {
        &self.xi
    }

    /// `xi_{i+1}` in ranked order (0-based index).
    pub fn xi_at(&self, i: usize) -> f64 {
        self.xi[i]
    }

    /// Mass of the truncation, `sum_{i <= depth} xi_i`.
    pub fn partial_mass(&self) -> f64 {
        self.partial_mass
    }

    /// Mass of the first `n` entries.
    pub fn mass_of(&self, n: usize) -> f64 {
        pairwise_sum(&self.xi[..n])
    }

    /// Realized `sup_i xi_i * i^{1/alpha}` over the truncation (1-based
    /// rank). Diagnostic for the `xi_i ~ i^{-1/alpha}` comparison and the
    /// constant in the jump-count threshold.
    pub fn realized_sup_constant(&self) -> f64 {
        self.xi
            .iter()
            .enumerate()
            .map(|(i, x)| x * ((i + 1) as f64).powf(1.0 / self.alpha))
            .fold(0.0, f64::max)
    }

    /// Upper estimate of the mass beyond the truncation,
    /// `C * (alpha/(1-alpha)) * depth^{1 - 1/alpha}` with the realized
    /// sup constant `C`.
    pub fn tail_mass_bound(&self) -> f64 {
        let c = self.realized_sup_constant();
        c * (self.alpha / (1.0 - self.alpha))
            * (self.depth as f64).powf(1.0 - 1.0 / self.alpha)
    }

    /// Ranked-vector view of the truncation.
    pub fn ranked(&self) -> RankedVector {
        RankedVector::new(self.xi.clone())
    }

    /// Ranked-vector view of the first `n` entries.
    pub fn ranked_prefix(&self, n: usize) -> RankedVector {
        RankedVector::new(self.xi[..n].to_vec())
    }
}

/// Draw `xi_1 > ... > xi_depth` from a fresh exponential stream.
pub fn sample_limit_environment<R: Rng + ?Sized>(
    alpha: f64,
    depth: usize,
    rng: &mut R,
) -> Result<LimitEnvironment, EnvError> {
    let chis: Vec<f64> = (0..depth)
        .map(|_| crate::stream::sample_exp(rng, 1.0))
        .collect();
    limit_environment_from_chis(alpha, &chis)
}

/// Build the environment that realizes exactly the given strictly
/// decreasing positive values, by inverting the cumulative-sum
/// construction. Deterministic companion of `sample_limit_environment`.
pub fn limit_environment_from_values(
    alpha: f64,
    values: &[f64],
) -> Result<LimitEnvironment, EnvError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(EnvError::InvalidAlpha(alpha));
    }
    let mut chis = Vec::with_capacity(values.len());
    let mut prev = 0.0;
    for v in values {
        if !(*v > 0.0 && v.is_finite()) {
            return Err(EnvError::DegenerateStream);
        }
        let cum = v.powf(-alpha);
        chis.push(cum - prev);
        prev = cum;
    }
    limit_environment_from_chis(alpha, &chis)
}

/// Deterministic construction from an injected chi stream (test hook and
/// replay path).
pub fn limit_environment_from_chis(alpha: f64, chis: &[f64]) -> Result<LimitEnvironment, EnvError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(EnvError::InvalidAlpha(alpha));
    }
    if chis.is_empty() {
        return Err(EnvError::EmptyDepth);
    }
    let mut xi = Vec::with_capacity(chis.len());
    let mut cum = 0.0;
    let mut prev = f64::INFINITY;
    for chi in chis {
        if !(*chi > 0.0 && chi.is_finite()) {
            return Err(EnvError::DegenerateStream);
        }
        cum += chi;
        let x = cum.powf(-1.0 / alpha);
        if !(x < prev) || x <= 0.0 {
            return Err(EnvError::DegenerateStream);
        }
        prev = x;
        xi.push(x);
    }
    let partial_mass = pairwise_sum(&xi);
    Ok(LimitEnvironment {
        alpha,
        depth: xi.len(),
        xi,
        partial_mass,
    })
}

/// A summable non-negative ranked sequence, truncated to finite length.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedVector {
    entries: Vec<f64>,
    mass: f64,
}

impl RankedVector {
    pub fn new(entries: Vec<f64>) -> Self {
        assert!(
            entries.iter().all(|x| *x >= 0.0 && x.is_finite()),
            "ranked vector entries must be non-negative"
        );
        let mass = pairwise_sum(&entries);
        RankedVector { entries, mass }
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Divide a ranked landscape by its scaling constant.
pub fn rescale_ranked(env: &Environment) -> RankedVector {
    RankedVector::new(env.weights.iter().map(|w| w / env.a_n).collect())
}

/// `Z(lambda) = sum_x lambda xi_x / (1 + lambda xi_x)` over the
/// truncation.
pub fn z_lambda(xi: &RankedVector, lambda: f64) -> Result<f64, EnvError> {
    let mut terms = Vec::with_capacity(xi.entries.len());
    for x in &xi.entries {
        let denom = 1.0 + lambda * x;
        if denom.abs() < 1e-12 {
            return Err(EnvError::PoleProximity(lambda));
        }
        terms.push(lambda * x / denom);
    }
    Ok(pairwise_sum(&terms))
}

/// `l^1` distance between two ranked vectors, the shorter zero-padded.
pub fn ell1_distance(a: &RankedVector, b: &RankedVector) -> f64 {
    let n = a.entries.len().max(b.entries.len());
    let get = |v: &RankedVector, i: usize| v.entries.get(i).copied().unwrap_or(0.0);
    let diffs: Vec<f64> = (0..n).map(|i| (get(a, i) - get(b, i)).abs()).collect();
    pairwise_sum(&diffs)
}

/// JSON document for a finite environment. Doubles survive the round trip
/// value-exactly (shortest round-trip decimal formatting).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvironmentDoc {
    pub alpha: f64,
    pub family: String,
    pub beta: Option<f64>,
    pub n: usize,
    pub a_n: f64,
    pub weights: Vec<f64>,
    pub seed_provenance: String,
}

impl EnvironmentDoc {
    pub fn new(env: &Environment, law: &TailLaw, seed_provenance: impl Into<String>) -> Self {
        EnvironmentDoc {
            alpha: law.alpha(),
            family: law.family().name().to_string(),
            beta: law.family().beta(),
            n: env.n(),
            a_n: env.a_n(),
            weights: env.weights().to_vec(),
            seed_provenance: seed_provenance.into(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("environment doc serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn environment(&self) -> Result<Environment, EnvError> {
        Environment::from_weights(self.weights.clone(), self.a_n)
    }
}

/// JSON document for a truncated limit environment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitEnvironmentDoc {
    pub alpha: f64,
    pub depth: usize,
    pub xi: Vec<f64>,
    pub seed_provenance: String,
}

impl LimitEnvironmentDoc {
    pub fn new(xi: &LimitEnvironment, seed_provenance: impl Into<String>) -> Self {
        LimitEnvironmentDoc {
            alpha: xi.alpha(),
            depth: xi.depth(),
            xi: xi.xi().to_vec(),
            seed_provenance: seed_provenance.into(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("limit environment doc serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stream::derive_stream;

    #[test]
    fn inverse_cdf_arithmetic() {
        let law = TailLaw::pareto(0.5).unwrap();
        assert_eq!(law.quantile_from_survival(0.25), 16.0);
    }

    #[test]
    fn singleton_environment() {
        let law = TailLaw::pareto(0.5).unwrap();
        let mut rng = derive_stream(17, "env-single", 0);
        let env = sample_weights(&law, 1, &mut rng).unwrap();
        assert_eq!(env.n(), 1);
        assert_eq!(env.total(), env.weights()[0]);
        assert_eq!(env.a_n(), 1.0);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert_eq!(
            TailLaw::pareto(1.0).unwrap_err(),
            EnvError::InvalidAlpha(1.0)
        );
        assert_eq!(
            TailLaw::pareto(0.0).unwrap_err(),
            EnvError::InvalidAlpha(0.0)
        );
        assert!(TailLaw::new(0.5, TailFamily::ParetoExact, 0.0).is_err());
        assert!(TailLaw::pareto_log_perturbed(0.2, 5.0).is_err());
        let law = TailLaw::pareto(0.5).unwrap();
        let mut rng = derive_stream(17, "env-bad", 0);
        assert_eq!(
            sample_weights(&law, 0, &mut rng).unwrap_err(),
            EnvError::EmptySample
        );
    }

    #[test]
    fn scale_constant_pareto_closed_form() {
        let law = TailLaw::pareto(0.5).unwrap();
        assert_eq!(scale_constant(&law, 4).unwrap(), 16.0);
        assert_eq!(scale_constant(&law, 1).unwrap(), 1.0);
        // n * a_n^{-alpha} = 1 up to float rounding at larger n
        for n in [10usize, 1000, 100_000] {
            let a = scale_constant(&law, n).unwrap();
            assert!((n as f64 * a.powf(-0.5) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn scale_constant_log_perturbed_bisection() {
        let law = TailLaw::pareto_log_perturbed(0.5, 1.0).unwrap();
        let a = scale_constant(&law, 100).unwrap();
        let check = 100.0 * a.powf(-0.5) * (std::f64::consts::E + a).ln();
        assert!(
            (check - 1.0).abs() <= 1e-10,
            "defining equation residual {}",
            check - 1.0
        );
    }

    #[test]
    fn limit_environment_from_unit_chis() {
        let xi = limit_environment_from_chis(0.5, &[1.0, 1.0, 1.0]).unwrap();
        assert_eq!(xi.xi(), &[1.0, 0.25, 1.0 / 9.0]);
        assert!((xi.partial_mass() - (1.0 + 0.25 + 1.0 / 9.0)).abs() < 1e-15);
    }

    #[test]
    fn limit_environment_depth_one() {
        let chi = 0.7;
        let xi = limit_environment_from_chis(0.4, &[chi]).unwrap();
        assert_eq!(xi.xi(), &[chi.powf(-1.0 / 0.4)]);
    }

    #[test]
    fn sampled_limit_environment_strictly_decreasing() {
        let mut rng = derive_stream(23, "env-xi", 0);
        let xi = sample_limit_environment(0.5, 4096, &mut rng).unwrap();
        for w in xi.xi().windows(2) {
            assert!(w[0] > w[1]);
        }
        assert!(xi.xi().iter().all(|x| *x > 0.0));
    }

    #[test]
    fn rescale_examples() {
        let env = Environment::from_weights(vec![16.0, 4.0], 16.0).unwrap();
        let r = rescale_ranked(&env);
        assert_eq!(r.entries(), &[1.0, 0.25]);
        assert!((r.mass() - 1.25).abs() < 1e-15);

        let env = Environment::from_weights(vec![8.0], 8.0).unwrap();
        let r = rescale_ranked(&env);
        assert_eq!(r.entries(), &[1.0]);
        assert_eq!(r.mass(), 1.0);
    }

    #[test]
    fn rescale_preserves_ratios() {
        let mut rng = derive_stream(23, "env-ratio", 0);
        let law = TailLaw::pareto(0.5).unwrap();
        let env = sample_weights(&law, 64, &mut rng).unwrap();
        let r = rescale_ranked(&env);
        for i in 0..env.n() {
            for j in (i + 1)..env.n() {
                let orig = env.weights()[i] / env.weights()[j];
                let scaled = r.entries()[i] / r.entries()[j];
                assert!((orig / scaled - 1.0).abs() <= 1e-12);
            }
        }
        assert!((r.mass() - env.total() / env.a_n()).abs() <= 1e-12 * r.mass());
    }

    #[test]
    fn z_lambda_examples() {
        let one = RankedVector::new(vec![1.0]);
        assert_eq!(z_lambda(&one, 1.0).unwrap(), 0.5);
        assert_eq!(z_lambda(&one, 0.0).unwrap(), 0.0);
        let xi = RankedVector::new(vec![0.5, 0.25]);
        assert!((z_lambda(&xi, 2.0).unwrap() - 5.0 / 6.0).abs() < 1e-15);
        // pole guard
        assert!(matches!(
            z_lambda(&one, -1.0),
            Err(EnvError::PoleProximity(_))
        ));
    }

    #[test]
    fn z_lambda_monotone_on_grid() {
        let xi = RankedVector::new(vec![2.0, 0.5, 0.125, 0.03]);
        let mut prev = 0.0;
        for k in 1..=40 {
            let lambda = 0.25 * k as f64;
            let z = z_lambda(&xi, lambda).unwrap();
            assert!(z > prev);
            prev = z;
        }
    }

    #[test]
    fn ell1_examples() {
        let a = RankedVector::new(vec![1.0, 0.5, 0.25]);
        assert_eq!(ell1_distance(&a, &a), 0.0);
        let b = RankedVector::new(vec![1.0, 0.0]);
        let c = RankedVector::new(vec![0.0, 1.0]);
        assert_eq!(ell1_distance(&b, &c), 2.0);
        let d = RankedVector::new(vec![1.0, 0.5, 0.0]);
        assert_eq!(ell1_distance(&a, &d), 0.25);
        // zero padding
        let e = RankedVector::new(vec![1.0, 0.5]);
        assert_eq!(ell1_distance(&a, &e), 0.25);
    }

    #[test]
    fn environment_doc_round_trip_is_value_exact() {
        let law = TailLaw::pareto_log_perturbed(0.5, 1.0).unwrap();
        let mut rng = derive_stream(23, "env-doc", 0);
        let env = sample_weights(&law, 32, &mut rng).unwrap();
        let doc = EnvironmentDoc::new(&env, &law, "master=23/env-doc/0");
        let text = doc.to_json();
        let back = EnvironmentDoc::from_json(&text).unwrap();
        assert_eq!(doc, back);
        let env2 = back.environment().unwrap();
        assert_eq!(env.weights(), env2.weights());
        assert_eq!(env.a_n(), env2.a_n());
    }

    #[test]
    fn limit_doc_round_trip() {
        let mut rng = derive_stream(23, "xi-doc", 0);
        let xi = sample_limit_environment(0.3, 64, &mut rng).unwrap();
        let doc = LimitEnvironmentDoc::new(&xi, "master=23/xi-doc/0");
        let back = LimitEnvironmentDoc::from_json(&doc.to_json()).unwrap();
        assert_eq!(doc, back);
    }

    #[test]
    fn survival_decreasing_for_perturbed_family() {
        let law = TailLaw::pareto_log_perturbed(0.5, 1.0).unwrap();
        let mut prev = f64::INFINITY;
        let mut t = law.support_edge();
        for _ in 0..60 {
            let s = law.survival(t);
            assert!(s <= prev + 1e-15);
            prev = s;
            t *= 1.5;
        }
    }
}
