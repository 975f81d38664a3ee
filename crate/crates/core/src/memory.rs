//! Instrumented accounting of auxiliary memory.
//!
//! Data structures that are not part of a graph or partition register their
//! allocations with a [`MemoryTracker`]. The tracker keeps the live byte count
//! and the peak since the last [`MemoryTracker::reset_peak`], which gives
//! deterministic per-phase peaks independent of the allocator or OS.

use std::sync::atomic::{AtomicUsize, Ordering};

#[derive(Debug, Default)]
pub struct MemoryTracker {
    current: AtomicUsize,
    peak: AtomicUsize,
}

impl MemoryTracker {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&self, bytes: usize) {
        let now = self.current.fetch_add(bytes, Ordering::Relaxed) + bytes;
        self.peak.fetch_max(now, Ordering::Relaxed);
    }

    pub fn sub(&self, bytes: usize) {
        self.current.fetch_sub(bytes, Ordering::Relaxed);
    }

    /// Registers `bytes` until the returned guard is dropped.
    pub fn track(&self, bytes: usize) -> Tracked<'_> {
        self.add(bytes);
        Tracked { tracker: self, bytes }
    }

    pub fn current(&self) -> usize {
        self.current.load(Ordering::Relaxed)
    }

    pub fn peak(&self) -> usize {
        self.peak.load(Ordering::Relaxed)
    }

    /// Starts a new measurement window: the peak restarts at the live count.
    pub fn reset_peak(&self) {
        self.peak.store(self.current(), Ordering::Relaxed);
    }
}

/// RAII registration of an auxiliary allocation.
#[derive(Debug)]
pub struct Tracked<'a> {
    tracker: &'a MemoryTracker,
    bytes: usize,
}

impl Tracked<'_> {
    pub fn bytes(&self) -> usize {
        self.bytes
    }

    /// Adjusts the registered size after the underlying structure grew or shrank.
    pub fn resize(&mut self, bytes: usize) {
        if bytes > self.bytes {
            self.tracker.add(bytes - self.bytes);
        } else {
            self.tracker.sub(self.bytes - bytes);
        }
        self.bytes = bytes;
    }
}

impl Drop for Tracked<'_> {
    fn drop(&mut self) {
        self.tracker.sub(self.bytes);
    }
}
