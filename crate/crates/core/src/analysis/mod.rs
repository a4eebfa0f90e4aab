//! Statistical layer for analyzing arbitrage opportunities: standardization,
//! PCA, KMeans++ clustering with an inertia elbow, and OLS with the usual
//! diagnostics. Everything is implemented directly on [`Matrix`].

use thiserror::Error;

pub mod features;
pub mod kmeans;
pub mod matrix;
pub mod ols;
pub mod pca;
pub mod special;
pub mod standardize;

pub use features::{
    build_features, regress_decay, DecayRegression, Exclusion, FeatureRow, FeatureTable,
};
pub use kmeans::{elbow, kmeanspp, ClusterReport, KMeansConfig};
pub use matrix::Matrix;
pub use ols::{ols, RegressionReport};
pub use pca::{pca, PcaResult};
pub use standardize::{standardize, Scaling, Standardization};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error("need at least {needed} rows, got {got}")]
    TooFewRows { needed: usize, got: usize },
    #[error("column `{0}` has zero variance")]
    ZeroVariance(String),
    #[error("column `{0}` is linearly dependent on the preceding columns")]
    RankDeficient(String),
    #[error("k = {k} exceeds the {n} rows available")]
    KTooLarge { k: usize, n: usize },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("invalid argument: {0}")]
    Invalid(String),
    #[error("non-finite value in `{0}`")]
    NonFinite(String),
    #[error("numerical failure: {0}")]
    Numeric(String),
}
