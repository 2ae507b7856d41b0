//! The four-node worked example: a correlation matrix, its tree
//! approximation and the resulting CAM, as published to four decimals.

use crate::graph::TreeStructure;
use crate::matrix::CorrelationMatrix;

pub const FOUR_NODE_SIGMA: [[f64; 4]; 4] = [
    [1.0, 0.9, 0.9, 0.6],
    [0.9, 1.0, 0.8, 0.3],
    [0.9, 0.8, 1.0, 0.7],
    [0.6, 0.3, 0.7, 1.0],
];

/// Tree edges, 0-based.
pub const FOUR_NODE_TREE: [(usize, usize); 3] = [(0, 1), (0, 2), (2, 3)];

pub const FOUR_NODE_MODEL: [[f64; 4]; 4] = [
    [1.0, 0.9, 0.9, 0.63],
    [0.9, 1.0, 0.81, 0.567],
    [0.9, 0.81, 1.0, 0.7],
    [0.63, 0.567, 0.7, 1.0],
];

pub const FOUR_NODE_CAM: [[f64; 4]; 4] = [
    [1.0, 0.0, 0.0412, -0.0588],
    [0.0474, 1.0, 0.3042, -0.5098],
    [0.0474, -0.0526, 1.0, 0.0],
    [0.9789, -1.2632, 0.1421, 1.0],
];

pub fn four_node_sigma() -> CorrelationMatrix {
    let rows: Vec<Vec<f64>> = FOUR_NODE_SIGMA.iter().map(|r| r.to_vec()).collect();
    CorrelationMatrix::from_rows(&rows).expect("reference matrix is a valid correlation matrix")
}

pub fn four_node_tree() -> TreeStructure {
    TreeStructure::new(4, FOUR_NODE_TREE.to_vec()).expect("reference tree spans four vertices")
}
