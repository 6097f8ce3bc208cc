//! Deterministic discrete-event core: virtual clock, event calendar and
//! seeded random streams.
//!
//! A [`Simulation`] owns one calendar and one clock and is confined to a
//! single replication. Events with equal timestamps execute in insertion
//! order, so a run is a pure function of its inputs and seeds.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Simulated time in seconds.
pub type SimTime = f64;

/// Virtual clock of one replication.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimClock {
    now: SimTime,
    horizon: SimTime,
}

impl SimClock {
    pub fn new(horizon: SimTime) -> Self {
        assert!(
            horizon >= 0.0 && horizon.is_finite(),
            "horizon must be a finite non-negative time, got {horizon}"
        );
        Self { now: 0.0, horizon }
    }

    pub fn now(&self) -> SimTime {
        self.now
    }

    pub fn horizon(&self) -> SimTime {
        self.horizon
    }

    fn advance_to(&mut self, time: SimTime) {
        debug_assert!(time >= self.now, "clock moved backwards: {} -> {time}", self.now);
        debug_assert!(time <= self.horizon);
        self.now = time;
    }
}

/// An executed (or pending) event.
#[derive(Debug, Clone, PartialEq)]
pub struct Event<P> {
    pub time: SimTime,
    pub sequence: u64,
    pub payload: P,
}

struct Pending<P>(Event<P>);

impl<P> PartialEq for Pending<P> {
    fn eq(&self, other: &Self) -> bool {
        self.0.sequence == other.0.sequence
    }
}

impl<P> Eq for Pending<P> {}

impl<P> PartialOrd for Pending<P> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<P> Ord for Pending<P> {
    // BinaryHeap is a max-heap; invert so the earliest (time, sequence) pops first.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .0
            .time
            .total_cmp(&self.0.time)
            .then_with(|| other.0.sequence.cmp(&self.0.sequence))
    }
}

/// Event calendar plus clock.
pub struct Simulation<P> {
    clock: SimClock,
    calendar: BinaryHeap<Pending<P>>,
    next_sequence: u64,
    executed: u64,
}

impl<P> Simulation<P> {
    pub fn new(horizon: SimTime) -> Self {
        Self {
            clock: SimClock::new(horizon),
            calendar: BinaryHeap::new(),
            next_sequence: 0,
            executed: 0,
        }
    }

    pub fn now(&self) -> SimTime {
        self.clock.now()
    }

    pub fn clock(&self) -> SimClock {
        self.clock
    }

    /// Number of events executed so far.
    pub fn executed(&self) -> u64 {
        self.executed
    }

    /// Number of events still in the calendar.
    pub fn pending(&self) -> usize {
        self.calendar.len()
    }

    /// Puts an event in the calendar and returns its sequence number.
    ///
    /// Panics when `time` lies before the current clock or is not finite:
    /// scheduling into the past is a model bug.
    pub fn schedule(&mut self, time: SimTime, payload: P) -> u64 {
        assert!(
            time.is_finite() && time >= self.clock.now(),
            "event scheduled in the past or at a non-finite time: t={time}, now={}",
            self.clock.now()
        );
        let sequence = self.next_sequence;
        self.next_sequence += 1;
        self.calendar.push(Pending(Event {
            time,
            sequence,
            payload,
        }));
        sequence
    }

    pub fn schedule_in(&mut self, delay: SimTime, payload: P) -> u64 {
        assert!(delay >= 0.0, "negative delay {delay}");
        self.schedule(self.clock.now() + delay, payload)
    }

    /// Pops the next event if it is due at or before `until` (and the
    /// horizon), advancing the clock to its timestamp.
    pub fn next_event(&mut self, until: SimTime) -> Option<Event<P>> {
        let limit = until.min(self.clock.horizon());
        match self.calendar.peek() {
            Some(Pending(ev)) if ev.time <= limit => {}
            _ => return None,
        }
        let Pending(event) = self.calendar.pop()?;
        self.clock.advance_to(event.time);
        self.executed += 1;
        Some(event)
    }

    /// Executes every event with time <= `until` (capped at the horizon) in
    /// (time, sequence) order and returns how many were executed.
    ///
    /// The handler receives the simulation so it can schedule follow-up
    /// events. After the call the clock rests at `min(until, horizon)`.
    pub fn run<F>(&mut self, until: SimTime, mut handler: F) -> u64
    where
        F: FnMut(&mut Self, Event<P>),
    {
        let before = self.executed;
        while let Some(event) = self.next_event(until) {
            handler(self, event);
        }
        let end = until.min(self.clock.horizon());
        if end > self.clock.now() {
            self.clock.advance_to(end);
        }
        self.executed - before
    }
}

/// Labels for the independent random streams of one replication.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StreamId {
    LaneWeights(u32),
    LaneArrivals(u32),
    Custom(u64),
}

impl StreamId {
    fn code(self) -> u64 {
        match self {
            StreamId::LaneWeights(lane) => (1 << 56) | lane as u64,
            StreamId::LaneArrivals(lane) => (2 << 56) | lane as u64,
            StreamId::Custom(x) => (3 << 56) ^ x,
        }
    }
}

/// SplitMix64 finalizer; used to derive well-spread seeds from structured ids.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Combines a seed with further words into a new seed.
pub fn derive_seed(seed: u64, words: &[u64]) -> u64 {
    words
        .iter()
        .fold(mix64(seed), |acc, &w| mix64(acc ^ mix64(w)))
}

/// Creates the generator for one (seed, stream) pair. Identical pairs always
/// yield identical draw sequences, independent of thread or run.
pub fn random_stream(seed: u64, stream: StreamId) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, &[stream.code()]))
}
