//! Splits graphs: realisation of circular split systems as drawable
//! networks, their layout, clustering and export.

mod cluster;
mod graph;
pub(crate) mod io;
mod layout;

pub use cluster::{cluster_styles, StyleClusters, CLUSTER_METHOD};
pub use graph::{build_splits_graph, verify_graph_metric, GraphEdge, SplitsGraph};
pub use io::{
    format_graph, format_interchange, parse_graph, parse_interchange, read_interchange, to_dot, to_svg,
    write_interchange,
};
pub use layout::{equal_angle_layout, split_angles};
