//! Simulation clock.

use std::fmt;
use std::ops::{Add, AddAssign, Sub};

const NANOS_PER_SEC: u64 = 1_000_000_000;

/// Simulated time in integer nanoseconds since the start of a run.
///
/// Integer time keeps long runs free of accumulated rounding drift.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SimTime(u64);

impl SimTime {
    pub const ZERO: SimTime = SimTime(0);
    pub const MAX: SimTime = SimTime(u64::MAX);

    pub const fn from_nanos(nanos: u64) -> Self {
        SimTime(nanos)
    }

    pub const fn from_millis(ms: u64) -> Self {
        SimTime(ms * 1_000_000)
    }

    pub const fn from_secs(s: u64) -> Self {
        SimTime(s * NANOS_PER_SEC)
    }

    /// Rounds to the nearest nanosecond. Negative and NaN inputs clamp to zero.
    pub fn from_secs_f64(s: f64) -> Self {
        // `as` saturates and maps NaN to zero.
        SimTime((s * NANOS_PER_SEC as f64).round() as u64)
    }

    pub const fn as_nanos(self) -> u64 {
        self.0
    }

    pub fn as_secs_f64(self) -> f64 {
        self.0 as f64 / NANOS_PER_SEC as f64
    }

    pub fn saturating_sub(self, rhs: SimTime) -> SimTime {
        SimTime(self.0.saturating_sub(rhs.0))
    }

    /// Time needed to put `bytes` on a wire of `bandwidth_bps`, rounded up to
    /// the next nanosecond.
    pub fn serialization(bytes: u32, bandwidth_bps: u64) -> SimTime {
        assert!(bandwidth_bps > 0, "bandwidth must be positive");
        let bits = u128::from(bytes) * 8 * u128::from(NANOS_PER_SEC);
        let bw = u128::from(bandwidth_bps);
        SimTime(bits.div_ceil(bw) as u64)
    }
}

impl Add for SimTime {
    type Output = SimTime;

    fn add(self, rhs: SimTime) -> SimTime {
        SimTime(self.0.saturating_add(rhs.0))
    }
}

impl AddAssign for SimTime {
    fn add_assign(&mut self, rhs: SimTime) {
        *self = *self + rhs;
    }
}

impl Sub for SimTime {
    type Output = SimTime;

    fn sub(self, rhs: SimTime) -> SimTime {
        SimTime(
            self.0
                .checked_sub(rhs.0)
                .expect("SimTime subtraction underflow"),
        )
    }
}

impl fmt::Display for SimTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.9}s", self.as_secs_f64())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn serialization_of_data_packet() {
        assert_eq!(
            SimTime::serialization(1000, 1_000_000),
            SimTime::from_millis(8)
        );
        assert_eq!(
            SimTime::serialization(1000, 100_000),
            SimTime::from_millis(80)
        );
    }

    #[test]
    fn no_drift_over_long_runs() {
        // 1000-byte packets on 0.1 Mbps for 100 s: exactly 1250 gaps.
        let gap = SimTime::serialization(1000, 100_000);
        let mut t = SimTime::ZERO;
        for _ in 0..1250 {
            t += gap;
        }
        assert_eq!(t, SimTime::from_secs(100));
    }

    #[test]
    fn secs_round_trip() {
        assert_eq!(SimTime::from_secs_f64(0.018).as_nanos(), 18_000_000);
        assert_eq!(SimTime::from_secs_f64(-1.0), SimTime::ZERO);
        assert_eq!(SimTime::from_secs_f64(2.5).as_secs_f64(), 2.5);
    }
}
