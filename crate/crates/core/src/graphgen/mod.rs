//! Social graph generation and structural analysis.

mod analysis;
mod ba;
mod edgelist;
mod graph;
mod toivonen;

pub use analysis::{
    assign_sat_peers, average_clustering, graph_properties, local_clustering, local_triangles,
    p_nsn, total_triangles, GraphProperties,
};
pub use ba::{generate_ba, BaParams};
pub use edgelist::{export_edge_list, import_edge_list};
pub use graph::SocialGraph;
pub use toivonen::{generate_toivonen, ToParams};

/// Which growth model to use.
#[derive(Debug, Clone, PartialEq)]
pub enum GraphModel {
    Ba(BaParams),
    To(ToParams),
}

impl GraphModel {
    pub fn name(&self) -> &'static str {
        match self {
            GraphModel::Ba(_) => "ba",
            GraphModel::To(_) => "to",
        }
    }

    pub fn generate(&self, n: usize, seed: u64) -> Result<SocialGraph, crate::error::ConfigError> {
        match self {
            GraphModel::Ba(p) => generate_ba(n, *p, seed),
            GraphModel::To(p) => generate_toivonen(n, p, seed),
        }
    }

    pub fn validate(&self, n: usize) -> Result<(), crate::error::ConfigError> {
        match self {
            GraphModel::Ba(p) => p.validate(n),
            GraphModel::To(p) => p.validate(n),
        }
    }
}
