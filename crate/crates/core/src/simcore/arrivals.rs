use rand::Rng;
use rand_distr::{Distribution, Exp};

use crate::config::WaitDistribution;

/// Think time between a finished download and the next request.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrivalProcess {
    pub mean_wait_seconds: f64,
    pub distribution: WaitDistribution,
}

impl ArrivalProcess {
    pub fn new(mean_wait_seconds: f64, distribution: WaitDistribution) -> Self {
        assert!(mean_wait_seconds > 0.0, "mean wait must be positive");
        ArrivalProcess {
            mean_wait_seconds,
            distribution,
        }
    }

    /// One strictly positive waiting time in seconds.
    pub fn sample_wait<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let mean = self.mean_wait_seconds;
        match self.distribution {
            WaitDistribution::Fixed => mean,
            WaitDistribution::Uniform => 2.0 * mean * (1.0 - rng.random::<f64>()),
            WaitDistribution::Exponential => {
                let exp = Exp::new(1.0 / mean).expect("positive rate");
                loop {
                    let w: f64 = exp.sample(rng);
                    if w > 0.0 {
                        return w;
                    }
                }
            }
        }
    }
}

/// Free-function form of [`ArrivalProcess::sample_wait`] with a fresh
/// generator seeded from `seed`.
pub fn sample_wait(process: &ArrivalProcess, seed: u64) -> f64 {
    process.sample_wait(&mut crate::rng::seeded(seed))
}
