//! The graphical representation: one Poisson field of (time, site, target)
//! update events, read forward as the voter model and backward as the
//! coalescing dual. Both directions consume the same materialized log, so
//! the duality identity holds pathwise, not just in law.

use std::collections::BTreeSet;
use std::io::{self, Read, Write};

use rand::distributions::Uniform;
use rand::Rng;
use thiserror::Error;

use crate::alias::AliasTable;
use crate::env::Environment;
use crate::stats::pairwise_sum;
use crate::stream::sample_exp;
use crate::voter::OpinionState;

/// Refuse to materialize logs whose expected event count exceeds this.
pub const DEFAULT_EVENT_CAP: f64 = 5e7;

const DUMP_MAGIC: [u8; 2] = *b"GL";
const DUMP_VERSION: u16 = 1;

#[derive(Debug, Error)]
pub enum GraphicalError {
    #[error("horizon must be positive, got {0}")]
    BadHorizon(f64),
    #[error("expected event count {expected:.3e} exceeds the cap {cap:.3e}")]
    SizeCap { expected: f64, cap: f64 },
    #[error("state over {got} sites does not match log over {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("support contains site {0}, outside the log range")]
    SiteOutOfRange(usize),
    #[error("binary log is malformed: {0}")]
    MalformedDump(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// A single clock ring: `site` copies the opinion of `target`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpdateEvent {
    pub time: f64,
    pub site: usize,
    pub target: usize,
}

/// The materialized Poisson field on `[0, horizon]`.
#[derive(Debug, Clone, PartialEq)]
pub struct EventLog {
    n: usize,
    horizon: f64,
    events: Vec<UpdateEvent>,
    rates: Vec<f64>,
}

impl EventLog {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn events(&self) -> &[UpdateEvent] {
        &self.events
    }

    /// Per-site clock rates `1/w_x`.
    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    /// Mean waiting times recovered from the rates.
    pub fn weights(&self) -> Vec<f64> {
        self.rates.iter().map(|r| 1.0 / r).collect()
    }

    /// Index of the first event with time beyond `t`.
    fn prefix_len(&self, t: f64) -> usize {
        self.events.partition_point(|e| e.time <= t)
    }

    /// Little-endian binary dump: 16-byte header (magic, version, n,
    /// horizon) then one (f64, u32, u32) record per event.
    pub fn dump_binary<W: Write>(&self, out: &mut W) -> Result<(), GraphicalError> {
        out.write_all(&DUMP_MAGIC)?;
        out.write_all(&DUMP_VERSION.to_le_bytes())?;
        out.write_all(&(self.n as u32).to_le_bytes())?;
        out.write_all(&self.horizon.to_le_bytes())?;
        for e in &self.events {
            out.write_all(&e.time.to_le_bytes())?;
            out.write_all(&(e.site as u32).to_le_bytes())?;
            out.write_all(&(e.target as u32).to_le_bytes())?;
        }
        Ok(())
    }

    /// Read a dump back; `rates` are not stored, so the caller supplies
    /// the environment it was generated from.
    pub fn read_binary<R: Read>(input: &mut R, env: &Environment) -> Result<Self, GraphicalError> {
        let mut header = [0u8; 16];
        input.read_exact(&mut header)?;
        if header[0..2] != DUMP_MAGIC {
            return Err(GraphicalError::MalformedDump("bad magic".into()));
        }
        let version = u16::from_le_bytes([header[2], header[3]]);
        if version != DUMP_VERSION {
            return Err(GraphicalError::MalformedDump(format!(
                "unsupported version {version}"
            )));
        }
        let n = u32::from_le_bytes(header[4..8].try_into().unwrap()) as usize;
        if n != env.n() {
            return Err(GraphicalError::DimensionMismatch {
                expected: n,
                got: env.n(),
            });
        }
        let horizon = f64::from_le_bytes(header[8..16].try_into().unwrap());
        let mut events = Vec::new();
        let mut record = [0u8; 16];
        loop {
            match input.read_exact(&mut record) {
                Ok(()) => {}
                Err(e) if e.kind() == io::ErrorKind::UnexpectedEof => break,
                Err(e) => return Err(e.into()),
            }
            events.push(UpdateEvent {
                time: f64::from_le_bytes(record[0..8].try_into().unwrap()),
                site: u32::from_le_bytes(record[8..12].try_into().unwrap()) as usize,
                target: u32::from_le_bytes(record[12..16].try_into().unwrap()) as usize,
            });
        }
        Ok(EventLog {
            n,
            horizon,
            events,
            rates: env.weights().iter().map(|w| 1.0 / w).collect(),
        })
    }

    /// Assemble a log from explicit events (tests and replay).
    pub fn from_events(
        n: usize,
        horizon: f64,
        events: Vec<UpdateEvent>,
        rates: Vec<f64>,
    ) -> Self {
        debug_assert!(events.windows(2).all(|w| w[0].time < w[1].time));
        EventLog {
            n,
            horizon,
            events,
            rates,
        }
    }
}

/// Generate the Poisson field for `env` on `[0, horizon]`.
///
/// Total rate is `R = sum_x 1/w_x`; each event picks its site with
/// probability proportional to `1/w_x` and a uniform target (self
/// included, so the dual rates are exactly `1/(N w_x)` for every pair).
pub fn generate_log<R: Rng + ?Sized>(
    env: &Environment,
    horizon: f64,
    rng: &mut R,
) -> Result<EventLog, GraphicalError> {
    generate_log_with_cap(env, horizon, DEFAULT_EVENT_CAP, rng)
}

pub fn generate_log_with_cap<R: Rng + ?Sized>(
    env: &Environment,
    horizon: f64,
    cap: f64,
    rng: &mut R,
) -> Result<EventLog, GraphicalError> {
    if !(horizon > 0.0) {
        return Err(GraphicalError::BadHorizon(horizon));
    }
    let rates: Vec<f64> = env.weights().iter().map(|w| 1.0 / w).collect();
    let total_rate = pairwise_sum(&rates);
    let expected = total_rate * horizon;
    if expected > cap {
        return Err(GraphicalError::SizeCap { expected, cap });
    }
    let alias = AliasTable::new(&rates);
    let n = env.n();
    let target = Uniform::from(0..n as u32);
    let mut events = Vec::with_capacity((expected * 1.05) as usize + 16);
    let mut clock = 0.0;
    loop {
        clock += sample_exp(rng, 1.0 / total_rate);
        if clock > horizon {
            break;
        }
        events.push(UpdateEvent {
            time: clock,
            site: alias.sample(rng),
            target: rng.sample(target) as usize,
        });
    }
    Ok(EventLog {
        n,
        horizon,
        events,
        rates,
    })
}

/// Run the voter model forward through the whole log.
pub fn forward_voter(log: &EventLog, eta0: &OpinionState) -> Result<OpinionState, GraphicalError> {
    forward_voter_until(log, eta0, log.horizon)
}

/// Run the voter model forward through events with time <= `t`.
pub fn forward_voter_until(
    log: &EventLog,
    eta0: &OpinionState,
    t: f64,
) -> Result<OpinionState, GraphicalError> {
    if eta0.n() != log.n {
        return Err(GraphicalError::DimensionMismatch {
            expected: log.n,
            got: eta0.n(),
        });
    }
    let mut state = eta0.clone();
    apply_events(&log.events[..log.prefix_len(t)], &mut state, &log.rates);
    Ok(state)
}

fn apply_events(events: &[UpdateEvent], state: &mut OpinionState, rates: &[f64]) {
    for e in events {
        let bit = state.bit(e.target);
        state.assign(e.site, bit, 1.0 / rates[e.site]);
    }
}

/// Trace lineages backward from time `t` to time 0.
///
/// Scanning events in decreasing time, every lineage sitting at the
/// event's site moves to its target; lineages merge on contact. Returns
/// the occupied set at time 0.
pub fn backward_dual(
    log: &EventLog,
    support: &BTreeSet<usize>,
    t: f64,
) -> Result<BTreeSet<usize>, GraphicalError> {
    if let Some(site) = support.iter().find(|x| **x >= log.n) {
        return Err(GraphicalError::SiteOutOfRange(*site));
    }
    let mut lineages = support.clone();
    for e in log.events[..log.prefix_len(t)].iter().rev() {
        if lineages.remove(&e.site) {
            lineages.insert(e.target);
        }
    }
    Ok(lineages)
}

/// The pathwise duality pair
/// `(1{eta_t = 1 on A}, 1{eta_0 = 1 on backward_dual(A, t)})`.
///
/// The two bits agree for every log, initial state, set and time; the
/// identity is exact on the shared randomness, not statistical.
pub fn duality_indicator_pair(
    log: &EventLog,
    eta0: &OpinionState,
    a: &BTreeSet<usize>,
    t: f64,
) -> Result<(bool, bool), GraphicalError> {
    let eta_t = forward_voter_until(log, eta0, t)?;
    let forward_bit = eta_t.all_ones_on(a);
    let ancestors = backward_dual(log, a, t)?;
    let backward_bit = eta0.all_ones_on(&ancestors);
    Ok((forward_bit, backward_bit))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{sample_weights, TailLaw};
    use crate::stream::derive_stream;

    fn env_from(weights: &[f64]) -> Environment {
        Environment::from_weights(weights.to_vec(), 1.0).unwrap()
    }

    fn set(xs: &[usize]) -> BTreeSet<usize> {
        xs.iter().copied().collect()
    }

    #[test]
    fn vanishing_horizon_gives_empty_log() {
        let env = env_from(&[1.0, 1.0]);
        let mut rng = derive_stream(41, "graph", 0);
        let log = generate_log(&env, 1e-300, &mut rng).unwrap();
        assert!(log.events().is_empty());
        let eta = OpinionState::from_bits(vec![true, false], env.weights());
        let out = forward_voter(&log, &eta).unwrap();
        assert_eq!(out, eta);
        assert_eq!(backward_dual(&log, &set(&[0, 1]), 1e-300).unwrap(), set(&[0, 1]));
    }

    #[test]
    fn single_site_log_only_references_site_zero() {
        let env = env_from(&[0.5]);
        let mut rng = derive_stream(41, "graph", 1);
        let log = generate_log(&env, 50.0, &mut rng).unwrap();
        assert!(!log.events().is_empty());
        for e in log.events() {
            assert_eq!(e.site, 0);
            assert_eq!(e.target, 0);
        }
    }

    #[test]
    fn times_strictly_increasing_and_within_horizon() {
        let env = env_from(&[1.0, 2.0, 4.0]);
        let mut rng = derive_stream(41, "graph", 2);
        let log = generate_log(&env, 100.0, &mut rng).unwrap();
        for w in log.events().windows(2) {
            assert!(w[0].time < w[1].time);
        }
        assert!(log.events().last().unwrap().time <= 100.0);
    }

    #[test]
    fn size_cap_refuses_oversized_logs() {
        let env = env_from(&[1.0, 1.0]);
        let mut rng = derive_stream(41, "graph", 3);
        assert!(matches!(
            generate_log_with_cap(&env, 1e9, 1e6, &mut rng),
            Err(GraphicalError::SizeCap { .. })
        ));
    }

    #[test]
    fn forward_single_event_copies_opinion() {
        let env = env_from(&[1.0, 1.0]);
        let events = vec![UpdateEvent {
            time: 0.5,
            site: 1,
            target: 0,
        }];
        let log = EventLog::from_events(2, 1.0, events, vec![1.0, 1.0]);
        let eta = OpinionState::from_bits(vec![true, false], env.weights());
        let out = forward_voter(&log, &eta).unwrap();
        assert_eq!(out.bits(), &[true, true]);
    }

    #[test]
    fn all_ones_is_absorbing_under_any_log() {
        let law = TailLaw::pareto(0.5).unwrap();
        let mut rng = derive_stream(41, "graph", 4);
        let env = sample_weights(&law, 8, &mut rng).unwrap();
        let log = generate_log(&env, 30.0, &mut rng).unwrap();
        let eta = OpinionState::constant(8, true, env.weights());
        let out = forward_voter(&log, &eta).unwrap();
        assert_eq!(out.ones(), 8);
    }

    #[test]
    fn backward_one_step_trace_and_merge() {
        let events = vec![UpdateEvent {
            time: 0.25,
            site: 1,
            target: 0,
        }];
        let log = EventLog::from_events(2, 1.0, events, vec![1.0, 1.0]);
        assert_eq!(backward_dual(&log, &set(&[1]), 0.75).unwrap(), set(&[0]));
        // both lineages land on site 0: coalescence
        assert_eq!(backward_dual(&log, &set(&[0, 1]), 0.75).unwrap(), set(&[0]));
        // tracing from before the event sees nothing
        assert_eq!(backward_dual(&log, &set(&[1]), 0.1).unwrap(), set(&[1]));
    }

    #[test]
    fn duality_trivial_cases() {
        let env = env_from(&[1.0, 2.0, 1.0]);
        let mut rng = derive_stream(41, "graph", 5);
        let log = generate_log(&env, 10.0, &mut rng).unwrap();
        let ones = OpinionState::constant(3, true, env.weights());
        let zeros = OpinionState::constant(3, false, env.weights());
        let a = set(&[0, 2]);
        assert_eq!(
            duality_indicator_pair(&log, &ones, &a, 5.0).unwrap(),
            (true, true)
        );
        assert_eq!(
            duality_indicator_pair(&log, &zeros, &a, 5.0).unwrap(),
            (false, false)
        );
    }

    #[test]
    fn prefix_then_remainder_equals_whole_log() {
        let law = TailLaw::pareto(0.5).unwrap();
        let mut rng = derive_stream(41, "graph", 6);
        let env = sample_weights(&law, 12, &mut rng).unwrap();
        let log = generate_log(&env, 40.0, &mut rng).unwrap();
        let bits: Vec<bool> = (0..12).map(|_| rng.gen()).collect();
        let eta = OpinionState::from_bits(bits, env.weights());
        let whole = forward_voter(&log, &eta).unwrap();
        let cut = log.horizon() / 3.0;
        let mid = forward_voter_until(&log, &eta, cut).unwrap();
        let mut resumed = mid;
        let k = log.prefix_len(cut);
        apply_events(&log.events()[k..], &mut resumed, log.rates());
        assert_eq!(whole.bits(), resumed.bits());
    }

    #[test]
    fn backward_dual_is_monotone_in_support() {
        let law = TailLaw::pareto(0.5).unwrap();
        for replica in 0..50 {
            let mut rng = derive_stream(41, "graph-mono", replica);
            let env = sample_weights(&law, 10, &mut rng).unwrap();
            let log = generate_log(&env, 25.0, &mut rng).unwrap();
            let a: BTreeSet<usize> = (0..10).filter(|_| rng.gen::<f64>() < 0.3).collect();
            let mut b = a.clone();
            for x in 0..10 {
                if rng.gen::<f64>() < 0.3 {
                    b.insert(x);
                }
            }
            let t = rng.gen::<f64>() * 25.0;
            let da = backward_dual(&log, &a, t).unwrap();
            let db = backward_dual(&log, &b, t).unwrap();
            assert!(da.is_subset(&db));
        }
    }

    #[test]
    fn binary_dump_round_trips_bit_exactly() {
        let law = TailLaw::pareto(0.5).unwrap();
        let mut rng = derive_stream(41, "graph", 7);
        let env = sample_weights(&law, 6, &mut rng).unwrap();
        let log = generate_log(&env, 20.0, &mut rng).unwrap();
        let mut buf = Vec::new();
        log.dump_binary(&mut buf).unwrap();
        assert_eq!(buf.len(), 16 + 16 * log.events().len());
        let back = EventLog::read_binary(&mut buf.as_slice(), &env).unwrap();
        assert_eq!(log, back);
    }

    #[test]
    fn out_of_range_support_is_rejected() {
        let log = EventLog::from_events(2, 1.0, vec![], vec![1.0, 1.0]);
        assert!(matches!(
            backward_dual(&log, &set(&[5]), 0.5),
            Err(GraphicalError::SiteOutOfRange(5))
        ));
    }
}
