use std::sync::atomic::{AtomicI64, Ordering};

/// Source of event timestamps (UTC epoch milliseconds).
pub trait Clock: Send + Sync {
    fn now_ms(&self) -> i64;
}

#[derive(Debug, Default, Clone, Copy)]
pub struct SystemClock;

impl Clock for SystemClock {
    fn now_ms(&self) -> i64 {
        chrono::Utc::now().timestamp_millis()
    }
}

/// Deterministic clock: each reading advances by `step_ms`.
#[derive(Debug)]
pub struct StepClock {
    next: AtomicI64,
    step_ms: i64,
}

impl StepClock {
    pub fn new(start_ms: i64, step_ms: i64) -> Self {
        StepClock { next: AtomicI64::new(start_ms), step_ms }
    }
}

impl Clock for StepClock {
    fn now_ms(&self) -> i64 {
        self.next.fetch_add(self.step_ms, Ordering::SeqCst)
    }
}
