use rand::Rng;

use super::{CategoryId, PreferenceProfile, ProfileChange};

/// Post-download feedback strength. The step for one update is
/// `base_strength / profile.len()`, so broad interests move more slowly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeedbackParams {
    pub base_strength: f64,
    /// Lower clamp keeping quantifiers strictly positive.
    pub epsilon: f64,
    /// Probability that a completed download lowers the quantifier.
    pub negative_probability: f64,
}

impl Default for FeedbackParams {
    fn default() -> Self {
        FeedbackParams {
            base_strength: 0.5,
            epsilon: 1e-6,
            negative_probability: 0.2,
        }
    }
}

/// `Q + s(1 - Q)` for positive feedback, `Q - sQ` for negative, clamped to
/// `[epsilon, 1]`.
pub fn feedback_step(q: f64, strength: f64, negative: bool, epsilon: f64) -> f64 {
    let next = if negative { q - strength * q } else { q + strength * (1.0 - q) };
    next.clamp(epsilon, 1.0)
}

/// Feedback for a download of `category`. A missing category is inserted on
/// positive feedback and ignored on negative feedback.
pub fn feedback_change(
    profile: &PreferenceProfile,
    category: CategoryId,
    negative: bool,
    params: &FeedbackParams,
) -> Option<ProfileChange> {
    let old = profile.get(category);
    if old.is_none() && negative {
        return None;
    }
    let strength = params.base_strength / profile.len().max(1) as f64;
    let new = feedback_step(old.unwrap_or(0.0), strength, negative, params.epsilon);
    Some(ProfileChange { category, old, new })
}

/// Draws the feedback sign and returns the updated profile.
pub fn apply_download_feedback<R: Rng>(
    profile: &PreferenceProfile,
    category: CategoryId,
    params: &FeedbackParams,
    rng: &mut R,
) -> PreferenceProfile {
    let negative = rng.random::<f64>() < params.negative_probability;
    let mut out = profile.clone();
    if let Some(c) = feedback_change(profile, category, negative, params) {
        c.apply(&mut out);
    }
    out
}
