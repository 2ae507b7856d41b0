//! Quality of covariance selection for zero-mean Gaussian graphical models.
//!
//! Given a correlation matrix Σ_X and a model Σ_M selected for some graph
//! structure, the correlation approximation matrix `Δ = Σ_X Σ_M⁻¹` and its
//! spectrum determine the information divergences between the two
//! Gaussians, the exact AUC of the log-likelihood ratio test that tells them
//! apart, and closed-form bounds on that AUC.
//!
//! ```
//! use covsel::{analyze, reference, QuadratureConfig};
//!
//! let sigma = reference::four_node_sigma();
//! let tree = reference::four_node_tree();
//! let report = analyze(&sigma, tree.edge_set(), &QuadratureConfig::default()).unwrap();
//! assert!(report.auc_lower <= report.auc && report.auc <= report.auc_upper);
//! ```

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bessel;
pub mod bounds;
pub mod chow_liu;
pub mod divergence;
pub mod error;
pub mod generators;
pub mod graph;
pub mod matrix;
pub mod oracle;
pub mod quadrature;
pub mod reference;
pub mod report;
pub mod spectral;
pub mod trees;

pub use bounds::{bound_report, chernoff_lower, feasible_region_curve, kl_upper_bound, BoundReport};
pub use chow_liu::chow_liu_tree;
pub use divergence::{divergences_from_spectrum, DivergenceSet};
pub use error::{Error, Result};
pub use graph::{covariance_select, EdgeSet, ModelCovariance, TreeStructure};
pub use matrix::{cam, cam_spectrum, CamMatrix, CamSpectrum, CorrelationMatrix};
pub use quadrature::QuadratureConfig;
pub use report::{analyze, QualityReport};
pub use spectral::{auc_exact, cdf_ldelta, one_minus_auc};
