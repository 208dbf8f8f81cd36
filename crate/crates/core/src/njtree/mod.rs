//! Tree model: neighbor-joining, tree metrics, sister pairs and Newick I/O.

pub mod newick;
pub mod nj;
pub mod tree;

pub use newick::{parse_newick, read_newick, to_newick};
pub use nj::nj;
pub use tree::{
    cherries, ls_fit, ls_fit_values, tree_distance_matrix, tree_path_lengths, Edge, PhyloTree,
};
