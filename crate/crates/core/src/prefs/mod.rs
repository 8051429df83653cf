//! Preference profiles, mutual influence between buddies, post-download
//! feedback and demand prediction.

mod demand;
mod feedback;
mod influence;
mod profile;

pub use demand::{demand_score, predict_demand, similarity, DemandIndex, DemandWeights};
pub use feedback::{apply_download_feedback, feedback_change, feedback_step, FeedbackParams};
pub use influence::{
    aggregated_update, apply_influence, influence_change, neighborhood_stats, pull_toward_one,
    single_buddy_update, CategoryStat, MiModel, NeighborhoodStats, ProfileChange,
};
pub use profile::{write_profiles, CategoryId, PreferenceProfile};
