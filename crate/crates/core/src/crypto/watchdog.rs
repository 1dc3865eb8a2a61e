//! Process-wide PRF collision watchdog.
//!
//! Matching is only correct if no two distinct PRF inputs share an output.
//! While enabled, every PRF evaluation is recorded as `output -> input
//! fingerprint`; a repeated output with a different fingerprint is a
//! collision and aborts the process with a panic.

use std::collections::HashMap;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Mutex, MutexGuard};

use sha2::{Digest, Sha256};

use super::PrfOutput;

/// Default evaluation budget.
pub const DEFAULT_CAPACITY: usize = 10_000_000;

static ENABLED: AtomicBool = AtomicBool::new(false);
static STATE: Mutex<Option<CollisionWatchdog>> = Mutex::new(None);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WatchdogStats {
    pub evaluations: u64,
    pub recorded: usize,
    pub collisions: u64,
    pub capacity: usize,
}

#[derive(Debug)]
pub struct CollisionWatchdog {
    seen: HashMap<u128, u64>,
    capacity: usize,
    evaluations: u64,
    collisions: u64,
}

impl CollisionWatchdog {
    pub fn new(capacity: usize) -> Self {
        Self {
            seen: HashMap::new(),
            capacity,
            evaluations: 0,
            collisions: 0,
        }
    }

    /// Returns `true` if this evaluation collided with an earlier distinct input.
    pub fn record(&mut self, key: &[u8], message: &[u8], output: &PrfOutput) -> bool {
        self.evaluations += 1;
        let fp = fingerprint(key, message);
        let out = u128::from_le_bytes(output.0);
        match self.seen.get(&out) {
            Some(&prev) if prev != fp => {
                self.collisions += 1;
                true
            }
            Some(_) => false,
            None => {
                if self.seen.len() < self.capacity {
                    self.seen.insert(out, fp);
                }
                false
            }
        }
    }

    pub fn stats(&self) -> WatchdogStats {
        WatchdogStats {
            evaluations: self.evaluations,
            recorded: self.seen.len(),
            collisions: self.collisions,
            capacity: self.capacity,
        }
    }
}

fn fingerprint(key: &[u8], message: &[u8]) -> u64 {
    let mut h = Sha256::new();
    h.update((key.len() as u64).to_le_bytes());
    h.update(key);
    h.update(message);
    let d = h.finalize();
    u64::from_le_bytes(d[..8].try_into().expect("8 bytes"))
}

fn state() -> MutexGuard<'static, Option<CollisionWatchdog>> {
    STATE.lock().unwrap_or_else(|e| e.into_inner())
}

/// Start (or restart) recording with the given evaluation budget.
pub fn enable(capacity: usize) {
    *state() = Some(CollisionWatchdog::new(capacity));
    ENABLED.store(true, Ordering::SeqCst);
}

/// Stop recording and return the final statistics.
pub fn disable() -> Option<WatchdogStats> {
    ENABLED.store(false, Ordering::SeqCst);
    state().take().map(|w| w.stats())
}

pub fn stats() -> Option<WatchdogStats> {
    state().as_ref().map(|w| w.stats())
}

pub fn is_enabled() -> bool {
    ENABLED.load(Ordering::Relaxed)
}

pub(crate) fn observe(key: &[u8], message: &[u8], output: &PrfOutput) {
    if !is_enabled() {
        return;
    }
    let collided = {
        let mut guard = state();
        match guard.as_mut() {
            Some(w) => w.record(key, message, output),
            None => false,
        }
    };
    if collided {
        panic!("PRF collision detected on output {output:?}");
    }
}
