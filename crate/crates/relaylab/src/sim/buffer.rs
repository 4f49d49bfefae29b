//! Drop-tail relay buffer with conservation accounting.

use crate::error::{Error, Result};

/// Byte buffer between the backhaul and access hops of one relayed UE.
///
/// Every byte offered is counted as an arrival whether or not it fits;
/// the identity `arrivals == departures + drops + queued` holds at all
/// times.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelayBuffer {
    capacity: u64,
    queued: u64,
    arrivals: u64,
    departures: u64,
    drops: u64,
}

impl RelayBuffer {
    pub fn new(capacity: u64) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::domain("relay buffer capacity must be >= 1 byte"));
        }
        Ok(RelayBuffer {
            capacity,
            queued: 0,
            arrivals: 0,
            departures: 0,
            drops: 0,
        })
    }

    /// Offers `bytes` to the buffer; the overflow is dropped (drop-tail).
    /// Returns the accepted count.
    pub fn offer(&mut self, bytes: u64) -> u64 {
        self.arrivals += bytes;
        let accepted = bytes.min(self.capacity - self.queued);
        self.queued += accepted;
        self.drops += bytes - accepted;
        accepted
    }

    /// Dequeues up to `bytes`; returns the amount actually taken.
    pub fn take(&mut self, bytes: u64) -> u64 {
        let taken = bytes.min(self.queued);
        self.queued -= taken;
        self.departures += taken;
        taken
    }

    pub fn queued(&self) -> u64 {
        self.queued
    }

    pub fn capacity(&self) -> u64 {
        self.capacity
    }

    pub fn arrivals(&self) -> u64 {
        self.arrivals
    }

    pub fn departures(&self) -> u64 {
        self.departures
    }

    pub fn drops(&self) -> u64 {
        self.drops
    }

    /// Conservation identity; structurally true, asserted by tests.
    pub fn is_balanced(&self) -> bool {
        self.arrivals == self.departures + self.drops + self.queued
    }
}
