/// Discrete simulation time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimClock {
    pub step_seconds: u64,
    /// Steps taken so far.
    pub now: u64,
}

impl SimClock {
    pub fn new(step_seconds: u64) -> Self {
        SimClock { step_seconds, now: 0 }
    }

    /// Start of the current step in seconds.
    pub fn seconds(&self) -> u64 {
        self.now * self.step_seconds
    }

    /// End of the current step in seconds.
    pub fn step_end(&self) -> u64 {
        (self.now + 1) * self.step_seconds
    }

    pub fn advance(&mut self) {
        self.now += 1;
    }
}

/// Per-peer access link.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LinkBudget {
    pub download_bps: u64,
    pub upload_bps: u64,
}

impl LinkBudget {
    /// Bytes the uplink can move in `seconds`.
    pub fn upload_bytes(&self, seconds: u64) -> f64 {
        self.upload_bps as f64 * seconds as f64 / 8.0
    }

    pub fn download_bytes(&self, seconds: u64) -> f64 {
        self.download_bps as f64 * seconds as f64 / 8.0
    }
}
