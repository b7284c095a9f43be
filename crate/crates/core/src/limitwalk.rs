//! The single-walker theory on the slow sites: the walk `X^{(n)}` with
//! holdings governed by `xi` and uniform (lazy) jumps, its trace and
//! excursion structure, the closed-form incursion laws, the entrance law
//! from uniform starts, and the dense matrix oracle used to cross-check
//! simulation against uniformized transition probabilities.

use std::collections::BTreeSet;

use num_complex::Complex64;
use rand::distributions::Uniform;
use rand::Rng;
use thiserror::Error;

use crate::dense::{symmetric_eigenvalues, SquareMatrix};
use crate::env::LimitEnvironment;
use crate::stats::pairwise_sum;
use crate::stream::sample_exp;

/// Dense-matrix dimension cap for the oracle operations.
pub const DENSE_CAP: usize = 2048;

/// Poisson-tail mass dropped per row by uniformization.
const UNIFORMIZATION_TOL: f64 = 1e-13;

/// Recorded-event budget for materialized walk paths.
pub const WALK_EVENT_CAP: u64 = 50_000_000;

/// Calibrated constant for the pair-meeting probability bound
/// `P(meet in A before T) <= c/(xi_x xi_y) (T xi(A) + sum_A xi_z^2)`.
///
/// Fitted once on reference environments (master seed 0x5EED, alpha 0.5,
/// n = 64, four realizations, worst fitted ratio 0.174) and frozen with a
/// ~3x margin for quenched spread. A coupling argument also gives the
/// looser universal value e^2.
pub const MEETING_BOUND_C: f64 = 0.5;

/// Calibrated constant for the entrance-law tail bound
/// `R_t(beyond [N]) <= c t N^{1 - 1/alpha}`.
///
/// Fitted once on reference environments (master seed 0x5EED, alpha 0.5,
/// depth 512, eight realizations, worst fitted ratio 9.5 at t = 0.25,
/// N = 16) and frozen with a ~2x margin for quenched spread.
pub const ENTRANCE_TAIL_C: f64 = 20.0;

#[derive(Debug, Error, PartialEq)]
pub enum WalkError {
    #[error("dimension {0} exceeds the dense-matrix cap {DENSE_CAP}")]
    CapExceeded(usize),
    #[error("path never visits the target set within its horizon")]
    NeverVisits,
    #[error("start site {start} outside range {n}")]
    StartOutOfRange { start: usize, n: usize },
    #[error("invalid site set: {0}")]
    BadSet(String),
    #[error("requested n = {n} exceeds the truncation depth {depth}")]
    DepthTooSmall { n: usize, depth: usize },
    #[error("n must be at least {0}")]
    TooFewSites(usize),
    #[error("lambda = {0} is too close to a pole")]
    PoleProximity(f64),
    #[error("walk exceeded the recorded-event budget {0}")]
    SizeCap(u64),
}

/// Whether a jump target may be the current site.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum JumpConvention {
    /// Uniform over all `n` sites (the paper's convention; self-jumps are
    /// recorded but hold the position).
    Lazy,
    /// Uniform over the other `n - 1` sites.
    NonLazy,
}

/// How a walk is started.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WalkStart {
    Site(usize),
    Uniform,
}

/// A piecewise-constant right-continuous trajectory with every clock ring
/// recorded (self-jumps included, so the traced jump chain is observable).
#[derive(Debug, Clone, PartialEq)]
pub struct WalkPath {
    start: usize,
    horizon: f64,
    jump_times: Vec<f64>,
    positions: Vec<usize>,
}

impl WalkPath {
    pub fn start(&self) -> usize {
        self.start
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn jump_times(&self) -> &[f64] {
        &self.jump_times
    }

    pub fn positions(&self) -> &[usize] {
        &self.positions
    }

    pub fn events(&self) -> usize {
        self.jump_times.len()
    }

    /// Position at time `t` (right-continuous).
    pub fn position_at(&self, t: f64) -> usize {
        let idx = self.jump_times.partition_point(|s| *s <= t);
        if idx == 0 {
            self.start
        } else {
            self.positions[idx - 1]
        }
    }

    /// Completed holdings as `(site, duration)` pairs; the final segment
    /// cut by the horizon is censored and excluded.
    pub fn holdings(&self) -> Vec<(usize, f64)> {
        let mut out = Vec::with_capacity(self.jump_times.len());
        let mut prev_t = 0.0;
        let mut prev_p = self.start;
        for (t, p) in self.jump_times.iter().zip(&self.positions) {
            out.push((prev_p, t - prev_t));
            prev_t = *t;
            prev_p = *p;
        }
        out
    }

    /// Piecewise-constant segments `(t0, t1, position)` covering
    /// `[0, horizon]`.
    fn pieces(&self) -> impl Iterator<Item = (f64, f64, usize, bool)> + '_ {
        let k = self.jump_times.len();
        (0..=k).map(move |i| {
            let t0 = if i == 0 { 0.0 } else { self.jump_times[i - 1] };
            let t1 = if i < k {
                self.jump_times[i]
            } else {
                self.horizon
            };
            let p = if i == 0 { self.start } else { self.positions[i - 1] };
            // last piece ends at the horizon, not with a firing
            (t0, t1, p, i < k)
        })
    }
}

fn check_holdings(holdings: &[f64]) {
    assert!(
        holdings.iter().all(|h| *h > 0.0 && h.is_finite()),
        "mean holdings must be positive and finite"
    );
}

/// Simulate on an explicit mean-holding landscape; the spec-level walk on
/// xi wraps this with the lazy convention.
pub fn simulate_walk_on<R: Rng + ?Sized>(
    holdings: &[f64],
    start: usize,
    horizon: f64,
    convention: JumpConvention,
    rng: &mut R,
) -> Result<WalkPath, WalkError> {
    check_holdings(holdings);
    let n = holdings.len();
    if start >= n {
        return Err(WalkError::StartOutOfRange { start, n });
    }
    let uniform = Uniform::from(0..n as u32);
    let mut jump_times = Vec::new();
    let mut positions = Vec::new();
    let mut pos = start;
    let mut clock = 0.0;
    loop {
        clock += sample_exp(rng, holdings[pos]);
        if clock > horizon {
            break;
        }
        let target = match convention {
            JumpConvention::Lazy => rng.sample(uniform) as usize,
            JumpConvention::NonLazy => {
                if n == 1 {
                    pos
                } else {
                    let mut y = rng.sample(uniform) as usize;
                    while y == pos {
                        y = rng.sample(uniform) as usize;
                    }
                    y
                }
            }
        };
        jump_times.push(clock);
        positions.push(target);
        pos = target;
        if jump_times.len() as u64 >= WALK_EVENT_CAP {
            return Err(WalkError::SizeCap(WALK_EVENT_CAP));
        }
    }
    Ok(WalkPath {
        start,
        horizon,
        jump_times,
        positions,
    })
}

/// The walk on the first `n` slow sites of the truncated limit
/// environment (lazy convention).
pub fn simulate_walk<R: Rng + ?Sized>(
    xi: &LimitEnvironment,
    n: usize,
    start: usize,
    horizon: f64,
    rng: &mut R,
) -> Result<WalkPath, WalkError> {
    if n > xi.depth() {
        return Err(WalkError::DepthTooSmall { n, depth: xi.depth() });
    }
    simulate_walk_on(&xi.xi()[..n], start, horizon, JumpConvention::Lazy, rng)
}

/// Marginal position at time `t` without materializing the path.
pub fn walk_position_at<R: Rng + ?Sized>(
    holdings: &[f64],
    start: WalkStart,
    t: f64,
    rng: &mut R,
) -> usize {
    let n = holdings.len();
    let uniform = Uniform::from(0..n as u32);
    let mut pos = match start {
        WalkStart::Site(x) => x,
        WalkStart::Uniform => rng.sample(uniform) as usize,
    };
    let mut clock = sample_exp(rng, holdings[pos]);
    while clock <= t {
        pos = rng.sample(uniform) as usize;
        clock += sample_exp(rng, holdings[pos]);
    }
    pos
}

/// Trace of the path on `a`: the clock runs only while the position is in
/// `a`; excursions collapse to single jumps landing at the re-entry site.
pub fn trace(path: &WalkPath, a: &BTreeSet<usize>) -> Result<WalkPath, WalkError> {
    if a.is_empty() {
        return Err(WalkError::BadSet("trace set is empty".into()));
    }
    let mut inside_clock = 0.0;
    let mut start: Option<usize> = None;
    let mut jump_times = Vec::new();
    let mut positions = Vec::new();
    // pending ring fired from inside a, waiting for the next inside piece
    let mut pending: Option<f64> = None;
    for (t0, t1, p, fired) in path.pieces() {
        if a.contains(&p) {
            if start.is_none() {
                start = Some(p);
            } else if let Some(psi) = pending.take() {
                jump_times.push(psi);
                positions.push(p);
            }
            inside_clock += t1 - t0;
            if fired {
                pending = Some(inside_clock);
            }
        }
    }
    Ok(WalkPath {
        start: start.ok_or(WalkError::NeverVisits)?,
        horizon: inside_clock,
        jump_times,
        positions,
    })
}

/// Which kind of interval a censored path tail belongs to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IntervalKind {
    Incursion,
    Excursion,
}

/// Excursion/incursion decomposition of a path relative to a set.
#[derive(Debug, Clone, PartialEq)]
pub struct ExcursionStats {
    /// Maximal intervals spent outside the set, after the first hit.
    pub excursions: Vec<f64>,
    /// Maximal intervals spent inside the set.
    pub incursions: Vec<f64>,
    /// First hitting time of the set; `None` encodes "never" (the path
    /// stayed outside for its whole horizon).
    pub first_hit: Option<f64>,
    /// Set when the final interval was cut by the horizon rather than
    /// completed; it is still included in its list.
    pub tail_censored: Option<IntervalKind>,
}

impl ExcursionStats {
    /// Incursions with a censored trailing interval dropped, for unbiased
    /// length statistics.
    pub fn completed_incursions(&self) -> &[f64] {
        let cut = usize::from(self.tail_censored == Some(IntervalKind::Incursion));
        &self.incursions[..self.incursions.len() - cut]
    }

    /// Excursions with a censored trailing interval dropped.
    pub fn completed_excursions(&self) -> &[f64] {
        let cut = usize::from(self.tail_censored == Some(IntervalKind::Excursion));
        &self.excursions[..self.excursions.len() - cut]
    }

    /// CSV rows `(kind, length)` with kinds `T0`, `I`, `E`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("kind,length\n");
        if let Some(t0) = self.first_hit {
            out.push_str(&format!("T0,{}\n", fmt17(t0)));
        }
        for i in &self.incursions {
            out.push_str(&format!("I,{}\n", fmt17(*i)));
        }
        for e in &self.excursions {
            out.push_str(&format!("E,{}\n", fmt17(*e)));
        }
        out
    }
}

/// Decompose `path` into maximal intervals inside/outside `a`.
pub fn excursion_stats(path: &WalkPath, a: &BTreeSet<usize>) -> ExcursionStats {
    let mut stats = ExcursionStats {
        excursions: Vec::new(),
        incursions: Vec::new(),
        first_hit: None,
        tail_censored: None,
    };
    let mut run_len = 0.0;
    let mut run_inside: Option<bool> = None; // None while before the first hit
    for (t0, t1, p, _fired) in path.pieces() {
        let inside = a.contains(&p);
        match run_inside {
            None => {
                if inside {
                    stats.first_hit = Some(t0);
                    run_inside = Some(true);
                    run_len = t1 - t0;
                }
            }
            Some(current) if current == inside => run_len += t1 - t0,
            Some(current) => {
                if current {
                    stats.incursions.push(run_len);
                } else {
                    stats.excursions.push(run_len);
                }
                run_inside = Some(inside);
                run_len = t1 - t0;
            }
        }
    }
    if let Some(current) = run_inside {
        if current {
            stats.incursions.push(run_len);
            stats.tail_censored = Some(IntervalKind::Incursion);
        } else {
            stats.excursions.push(run_len);
            stats.tail_censored = Some(IntervalKind::Excursion);
        }
    }
    stats
}

/// Real time at which the path has accumulated `t` units of time inside
/// `a`, or `None` when the path's total inside time falls short.
pub fn real_time_for_inside_time(path: &WalkPath, a: &BTreeSet<usize>, t: f64) -> Option<f64> {
    let mut inside = 0.0;
    for (t0, t1, p, _fired) in path.pieces() {
        if a.contains(&p) {
            if inside + (t1 - t0) >= t {
                return Some(t0 + (t - inside));
            }
            inside += t1 - t0;
        }
    }
    None
}

fn check_incursion_set(
    xi: &LimitEnvironment,
    a: &BTreeSet<usize>,
    m: usize,
) -> Result<(), WalkError> {
    if m > xi.depth() {
        return Err(WalkError::DepthTooSmall { n: m, depth: xi.depth() });
    }
    if a.is_empty() {
        return Err(WalkError::BadSet("set is empty".into()));
    }
    if let Some(x) = a.iter().find(|x| **x >= m) {
        return Err(WalkError::BadSet(format!("site {x} outside [m]")));
    }
    if a.len() >= m {
        return Err(WalkError::BadSet("set must be a proper subset of [m]".into()));
    }
    Ok(())
}

/// Closed-form mean incursion length
/// `E I^A = (m / (m - |A|)) (1/|A|) sum_{x in A} xi_x`.
pub fn incursion_mean_formula(
    xi: &LimitEnvironment,
    a: &BTreeSet<usize>,
    m: usize,
) -> Result<f64, WalkError> {
    check_incursion_set(xi, a, m)?;
    let sum: f64 = a.iter().map(|x| xi.xi_at(*x)).sum();
    let k = a.len() as f64;
    Ok((m as f64 / (m as f64 - k)) * sum / k)
}

/// Closed-form Laplace transform of the incursion length,
/// `E e^{-lambda I^A}`.
pub fn incursion_laplace(
    xi: &LimitEnvironment,
    a: &BTreeSet<usize>,
    m: usize,
    lambda: f64,
) -> Result<f64, WalkError> {
    check_incursion_set(xi, a, m)?;
    let mut sum_inv = 0.0;
    for x in a {
        let denom = 1.0 + lambda * xi.xi_at(*x);
        if denom.abs() < 1e-12 {
            return Err(WalkError::PoleProximity(lambda));
        }
        sum_inv += 1.0 / denom;
    }
    let m = m as f64;
    let k = a.len() as f64;
    let outer = m - sum_inv;
    if outer.abs() < 1e-9 * m {
        return Err(WalkError::PoleProximity(lambda));
    }
    Ok((m - k) * (sum_inv / k) / outer)
}

/// Value of the limiting excursion characteristic function together with
/// the reported bound on the truncated tail's contribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExcursionCf {
    pub value: Complex64,
    /// `|lambda| * (estimated mass beyond the truncation)`; the caller
    /// decides whether the truncation is deep enough for its purpose.
    pub tail_remainder: f64,
}

/// Characteristic function of the limiting excursion length seen from
/// site `y`: `psi(lambda) = 1 / (1 - sum_{x != y} i lambda xi_x / (1 - i
/// lambda xi_x))`, evaluated over the truncation.
pub fn excursion_cf_limit(xi: &LimitEnvironment, y: usize, lambda: f64) -> ExcursionCf {
    let i_lambda = Complex64::new(0.0, lambda);
    let mut sum = Complex64::new(0.0, 0.0);
    for (x, v) in xi.xi().iter().enumerate() {
        if x == y {
            continue;
        }
        let z = i_lambda * v;
        sum += z / (Complex64::new(1.0, 0.0) - z);
    }
    ExcursionCf {
        value: Complex64::new(1.0, 0.0) / (Complex64::new(1.0, 0.0) - sum),
        tail_remainder: lambda.abs() * xi.tail_mass_bound(),
    }
}

/// Monte Carlo estimate of the uniform-start marginal `R_t^m` on `[m]`.
///
/// The estimate is a normalized count vector: the integer counts sum to
/// `replicas` exactly; the float entries `c_i / replicas` sum to 1 up to
/// one rounding per addition (within `m * eps`).
pub fn entrance_law_estimate<R: Rng + ?Sized>(
    xi: &LimitEnvironment,
    m: usize,
    t: f64,
    replicas: u64,
    rng: &mut R,
) -> Result<Vec<f64>, WalkError> {
    Ok(normalize_counts(&entrance_law_counts(xi, m, t, replicas, rng)?, replicas))
}

/// The raw position counts behind `entrance_law_estimate`, for callers
/// that resample or re-normalize.
pub fn entrance_law_counts<R: Rng + ?Sized>(
    xi: &LimitEnvironment,
    m: usize,
    t: f64,
    replicas: u64,
    rng: &mut R,
) -> Result<Vec<u64>, WalkError> {
    if m > xi.depth() {
        return Err(WalkError::DepthTooSmall { n: m, depth: xi.depth() });
    }
    if m == 0 {
        return Err(WalkError::TooFewSites(1));
    }
    assert!(t > 0.0, "entrance law needs t > 0");
    let holdings = &xi.xi()[..m];
    let mut counts = vec![0u64; m];
    for _ in 0..replicas {
        counts[walk_position_at(holdings, WalkStart::Uniform, t, rng)] += 1;
    }
    Ok(counts)
}

/// Counts to probabilities.
pub fn normalize_counts(counts: &[u64], total: u64) -> Vec<f64> {
    counts.iter().map(|c| *c as f64 / total as f64).collect()
}

/// Stationary law `mu(x) = xi_x / sum_{y <= n} xi_y` on explicit rates.
pub fn stationary_from_rates(xi: &[f64]) -> Vec<f64> {
    let mass = pairwise_sum(xi);
    xi.iter().map(|x| x / mass).collect()
}

/// Stationary law of the walk on the first `n` slow sites.
pub fn stationary_distribution(xi: &LimitEnvironment, n: usize) -> Result<Vec<f64>, WalkError> {
    if n > xi.depth() {
        return Err(WalkError::DepthTooSmall { n, depth: xi.depth() });
    }
    Ok(stationary_from_rates(&xi.xi()[..n]))
}

fn check_dense(n: usize, depth: usize) -> Result<(), WalkError> {
    if n > DENSE_CAP {
        return Err(WalkError::CapExceeded(n));
    }
    if n > depth {
        return Err(WalkError::DepthTooSmall { n, depth });
    }
    if n == 0 {
        return Err(WalkError::TooFewSites(1));
    }
    Ok(())
}

/// Generator on explicit mean holdings: off-diagonal `1/(n xi_x)`,
/// diagonal `-(n-1)/(n xi_x)` (lazy convention), rows summing to 0.
pub fn generator_from_rates(xi: &[f64]) -> SquareMatrix {
    check_holdings(xi);
    let n = xi.len();
    let mut g = SquareMatrix::zeros(n);
    for x in 0..n {
        let r = 1.0 / (n as f64 * xi[x]);
        for y in 0..n {
            g[(x, y)] = if x == y { -(n as f64 - 1.0) * r } else { r };
        }
    }
    g
}

/// Generator of the walk on the first `n` slow sites.
pub fn generator_matrix(xi: &LimitEnvironment, n: usize) -> Result<SquareMatrix, WalkError> {
    check_dense(n, xi.depth())?;
    Ok(generator_from_rates(&xi.xi()[..n]))
}

/// Row-stochastic transition matrix `P_t`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    matrix: SquareMatrix,
}

impl TransitionMatrix {
    fn new(matrix: SquareMatrix) -> Self {
        let n = matrix.dim();
        for i in 0..n {
            let sum: f64 = matrix.row(i).iter().sum();
            debug_assert!((sum - 1.0).abs() < 1e-11, "row {i} sums to {sum}");
        }
        TransitionMatrix { matrix }
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        self.matrix.row(i)
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.matrix[(i, j)]
    }

    pub fn matrix(&self) -> &SquareMatrix {
        &self.matrix
    }

    /// Worst absolute deviation of a row sum from 1.
    pub fn max_row_sum_deviation(&self) -> f64 {
        (0..self.dim())
            .map(|i| (self.row(i).iter().sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Row-major CSV with 17-significant-digit decimals.
    pub fn to_csv(&self) -> String {
        matrix_to_csv(&self.matrix)
    }
}

/// `exp(t G)` by uniformization: Poisson-weighted powers of the
/// uniformized kernel, truncated once the remaining Poisson mass drops
/// below 1e-13 per row.
pub fn semigroup_from_rates(xi: &[f64], t: f64) -> TransitionMatrix {
    check_holdings(xi);
    assert!(t >= 0.0, "time must be non-negative");
    let n = xi.len();
    if n == 1 || t == 0.0 {
        return TransitionMatrix::new(SquareMatrix::identity(n));
    }
    let exit = |x: usize| (n as f64 - 1.0) / (n as f64 * xi[x]);
    let lam = (0..n).map(exit).fold(0.0, f64::max);
    let lt = lam * t;
    if lt == 0.0 {
        return TransitionMatrix::new(SquareMatrix::identity(n));
    }
    // K = I + G/lam
    let mut kernel = SquareMatrix::zeros(n);
    for x in 0..n {
        let r = 1.0 / (n as f64 * xi[x] * lam);
        for y in 0..n {
            kernel[(x, y)] = if x == y {
                1.0 - (n as f64 - 1.0) * r
            } else {
                r
            };
        }
    }
    let mut acc = SquareMatrix::zeros(n);
    let mut power = SquareMatrix::identity(n);
    let mut log_w = -lt;
    let mut cum = 0.0;
    let max_terms = (lt + 60.0 * (lt + 1.0).sqrt() + 200.0) as u64;
    let mut k: u64 = 0;
    loop {
        let w = log_w.exp();
        if w > 0.0 {
            acc.add_scaled(&power, w);
            cum += w;
        }
        if 1.0 - cum <= UNIFORMIZATION_TOL || k >= max_terms {
            break;
        }
        k += 1;
        log_w += lt.ln() - (k as f64).ln();
        power = power.matmul(&kernel);
        if k.is_multiple_of(64) {
            renormalize_rows(&mut power);
        }
    }
    // close the series: the dropped mass plus the float drift of the
    // incrementally computed Poisson weights (~1e-11 relative at large
    // lambda t) is projected out row by row
    renormalize_rows(&mut acc);
    TransitionMatrix::new(acc)
}

fn renormalize_rows(m: &mut SquareMatrix) {
    let n = m.dim();
    for i in 0..n {
        let sum: f64 = m.row(i).iter().sum();
        if sum > 0.0 {
            let inv = 1.0 / sum;
            for j in 0..n {
                m[(i, j)] *= inv;
            }
        }
    }
}

/// Semigroup of the walk on the first `n` slow sites.
pub fn semigroup_matrix(
    xi: &LimitEnvironment,
    n: usize,
    t: f64,
) -> Result<TransitionMatrix, WalkError> {
    check_dense(n, xi.depth())?;
    Ok(semigroup_from_rates(&xi.xi()[..n], t))
}

/// Total variation distance between two probability rows.
pub fn tv_distance(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p
        .iter()
        .zip(q)
        .map(|(a, b)| (a - b).abs())
        .sum::<f64>()
}

/// `(exact TV between rows x and y of P_t, coupling bound e^{-t/xi_1})`.
pub fn coupled_pair_tv_from_rates(xi: &[f64], x: usize, y: usize, t: f64) -> (f64, f64) {
    let p = semigroup_from_rates(xi, t);
    let tv = tv_distance(p.row(x), p.row(y));
    let xi_max = xi.iter().fold(0.0f64, |a, b| a.max(*b));
    (tv, (-t / xi_max).exp())
}

pub fn coupled_pair_tv(
    xi: &LimitEnvironment,
    n: usize,
    x: usize,
    y: usize,
    t: f64,
) -> Result<(f64, f64), WalkError> {
    check_dense(n, xi.depth())?;
    if x >= n || y >= n {
        return Err(WalkError::StartOutOfRange { start: x.max(y), n });
    }
    Ok(coupled_pair_tv_from_rates(&xi.xi()[..n], x, y, t))
}

/// Spectral gap of `-G` via the mu-symmetrized form
/// `A_xy = -sqrt(r_x r_y)/n`, `A_xx = (n-1) r_x / n`, whose spectrum is
/// real; returns the smallest nonzero eigenvalue.
pub fn spectral_gap_from_rates(xi: &[f64]) -> f64 {
    check_holdings(xi);
    let n = xi.len();
    assert!(n >= 2, "spectral gap needs at least two sites");
    let mut a = SquareMatrix::zeros(n);
    let rates: Vec<f64> = xi.iter().map(|h| 1.0 / h).collect();
    for x in 0..n {
        for y in 0..n {
            a[(x, y)] = if x == y {
                (n as f64 - 1.0) * rates[x] / n as f64
            } else {
                -(rates[x] * rates[y]).sqrt() / n as f64
            };
        }
    }
    let eig = symmetric_eigenvalues(&a);
    eig[1]
}

pub fn spectral_gap(xi: &LimitEnvironment, n: usize) -> Result<f64, WalkError> {
    check_dense(n, xi.depth())?;
    if n < 2 {
        return Err(WalkError::TooFewSites(2));
    }
    Ok(spectral_gap_from_rates(&xi.xi()[..n]))
}

/// `|<P_t f, g>_mu - <f, P_t g>_mu|` on the matrix oracle.
pub fn self_adjointness_from_rates(xi: &[f64], t: f64, f: &[f64], g: &[f64]) -> f64 {
    let n = xi.len();
    assert_eq!(f.len(), n);
    assert_eq!(g.len(), n);
    let p = semigroup_from_rates(xi, t);
    let mu = stationary_from_rates(xi);
    let pf = p.matrix().vecmul_right(f);
    let pg = p.matrix().vecmul_right(g);
    let lhs: f64 = (0..n).map(|x| mu[x] * pf[x] * g[x]).sum();
    let rhs: f64 = (0..n).map(|x| mu[x] * f[x] * pg[x]).sum();
    (lhs - rhs).abs()
}

pub fn self_adjointness_check(
    xi: &LimitEnvironment,
    n: usize,
    t: f64,
    f: &[f64],
    g: &[f64],
) -> Result<f64, WalkError> {
    check_dense(n, xi.depth())?;
    Ok(self_adjointness_from_rates(&xi.xi()[..n], t, f, g))
}

/// Pair meeting bound `c/(xi_x xi_y) (T xi(A) + sum_{z in A} xi_z^2)`.
pub fn meeting_probability_bound(
    xi: &LimitEnvironment,
    x: usize,
    y: usize,
    a: &BTreeSet<usize>,
    t_max: f64,
    c: f64,
) -> f64 {
    assert!(x != y, "meeting bound is for distinct starts");
    assert!(c > 0.0);
    let mass: f64 = a.iter().map(|z| xi.xi_at(*z)).sum();
    let sq: f64 = a.iter().map(|z| xi.xi_at(*z) * xi.xi_at(*z)).sum();
    c / (xi.xi_at(x) * xi.xi_at(y)) * (t_max * mass + sq)
}

/// Meeting-probability lower bound via the stationary overlap. The
/// printed threshold `mu(x) >= a^{-1} e^{t/xi_1}` exceeds 1 for t > 0;
/// `corrected` selects the decaying exponent instead.
pub fn meeting_time_lower_bound(
    xi: &LimitEnvironment,
    t: f64,
    a_param: f64,
    corrected: bool,
) -> f64 {
    assert!(a_param > 0.0 && a_param < 1.0);
    let mu = stationary_from_rates(xi.xi());
    let sign = if corrected { -1.0 } else { 1.0 };
    let threshold = (sign * t / xi.xi_at(0)).exp() / a_param;
    let mut sum = 0.0;
    for m in &mu {
        if *m >= threshold {
            sum += m * m;
        } else {
            break; // mu is ranked decreasing
        }
    }
    (1.0 - a_param) * (1.0 - a_param) * sum
}

/// Simulate two independent lazy walks from `x` and `y` and report
/// whether they co-occupy some site of `a` before `t_max`.
pub fn two_walks_meet_in<R: Rng + ?Sized>(
    holdings: &[f64],
    x: usize,
    y: usize,
    a: &BTreeSet<usize>,
    t_max: f64,
    rng: &mut R,
) -> bool {
    let n = holdings.len();
    let uniform = Uniform::from(0..n as u32);
    let mut pos = [x, y];
    if pos[0] == pos[1] && a.contains(&pos[0]) {
        return true;
    }
    let mut next = [
        sample_exp(rng, holdings[pos[0]]),
        sample_exp(rng, holdings[pos[1]]),
    ];
    loop {
        let mover = usize::from(next[1] < next[0]);
        let t = next[mover];
        if t > t_max {
            return false;
        }
        pos[mover] = rng.sample(uniform) as usize;
        if pos[0] == pos[1] && a.contains(&pos[0]) {
            return true;
        }
        next[mover] = t + sample_exp(rng, holdings[pos[mover]]);
    }
}

fn fmt17(v: f64) -> String {
    format!("{:.16e}", v)
}

/// Row-major CSV with 17-significant-digit decimals.
pub fn matrix_to_csv(m: &SquareMatrix) -> String {
    let mut out = String::new();
    for i in 0..m.dim() {
        let row: Vec<String> = m.row(i).iter().map(|v| fmt17(*v)).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}
