//! Oracles shared with the core property tests.
#![allow(dead_code)]

#[path = "../../../core/tests/support/mod.rs"]
mod oracle;

pub use oracle::*;

use std::time::{Duration, Instant};

/// Outcome of one acceptance criterion.
pub struct Verdict {
    pub pass: bool,
    pub detail: String,
}

impl Verdict {
    pub fn check(pass: bool, detail: impl Into<String>) -> Self {
        Verdict { pass, detail: detail.into() }
    }
}

pub fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed())
}

/// Running maximum that also remembers where it happened.
#[derive(Default)]
pub struct Worst {
    pub value: f64,
    pub at: String,
}

impl Worst {
    pub fn see(&mut self, v: f64, at: impl FnOnce() -> String) {
        // NaN counts as worst
        if v.is_nan() || v > self.value {
            self.value = v;
            self.at = at();
        }
    }
}
