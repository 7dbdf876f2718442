use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::time::SimTime;

/// A scheduled action together with its firing time and insertion sequence.
#[derive(Debug, Clone)]
pub struct Event<A> {
    pub time: SimTime,
    pub sequence: u64,
    pub action: A,
}

impl<A> PartialEq for Event<A> {
    fn eq(&self, other: &Self) -> bool {
        self.time == other.time && self.sequence == other.sequence
    }
}

impl<A> Eq for Event<A> {}

impl<A> PartialOrd for Event<A> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<A> Ord for Event<A> {
    // Reversed so the max-heap pops the earliest (time, sequence) first.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .time
            .cmp(&self.time)
            .then_with(|| other.sequence.cmp(&self.sequence))
    }
}

/// Deterministic event queue. Events fire in `(time, sequence)` order, so
/// events at the same instant fire in the order they were scheduled.
#[derive(Debug)]
pub struct Scheduler<A> {
    now: SimTime,
    next_sequence: u64,
    heap: BinaryHeap<Event<A>>,
}

impl<A> Default for Scheduler<A> {
    fn default() -> Self {
        Self::new()
    }
}

impl<A> Scheduler<A> {
    pub fn new() -> Self {
        Self {
            now: SimTime::ZERO,
            next_sequence: 0,
            heap: BinaryHeap::new(),
        }
    }

    pub fn now(&self) -> SimTime {
        self.now
    }

    pub fn pending(&self) -> usize {
        self.heap.len()
    }

    /// Schedules `action` at absolute time `at`.
    ///
    /// Panics if `at` lies in the past: that is always a simulator bug.
    pub fn schedule(&mut self, at: SimTime, action: A) {
        assert!(
            at >= self.now,
            "event scheduled in the past: at={} now={}",
            at,
            self.now
        );
        let sequence = self.next_sequence;
        self.next_sequence += 1;
        self.heap.push(Event {
            time: at,
            sequence,
            action,
        });
    }

    pub fn schedule_in(&mut self, delay: SimTime, action: A) {
        let at = self.now + delay;
        self.schedule(at, action);
    }

    /// Pops the next event with `time <= t_end`, advancing the clock to it.
    pub fn pop_due(&mut self, t_end: SimTime) -> Option<Event<A>> {
        if self.heap.peek()?.time > t_end {
            return None;
        }
        let ev = self.heap.pop()?;
        self.now = ev.time;
        Some(ev)
    }

    /// Moves the clock forward to `t` once no earlier events remain.
    pub fn advance_to(&mut self, t: SimTime) {
        if t > self.now {
            self.now = t;
        }
    }

    /// Runs every event with `time <= t_end` through `handler`, then sets the
    /// clock to `t_end`.
    pub fn run_until<F>(&mut self, t_end: SimTime, mut handler: F)
    where
        F: FnMut(&mut Self, SimTime, A),
    {
        while let Some(ev) = self.pop_due(t_end) {
            handler(self, ev.time, ev.action);
        }
        self.advance_to(t_end);
    }
}
