// SPDX-License-Identifier: MIT OR Apache-2.0

//! Comparing time series through step-function embeddings.
//!
//! Each series is segmented by permutation-calibrated binary segmentation,
//! replaced by the step function of its segment means (or variances) and
//! compared with normalized `L^p` distances and an `L^2` alignment. The
//! resulting matrices can be checked against a geographic context and
//! clustered hierarchically or spectrally.
//!
//! ```
//! use stepdist::{embed, lp_distance, DetectionParams, PNorm, TimeSeries};
//!
//! let a = TimeSeries::new("a", (0..200).map(|t| if t < 100 { 0.0 } else { 5.0 }).collect()).unwrap();
//! let b = TimeSeries::new("b", vec![2.5; 200]).unwrap();
//! let params = DetectionParams::default();
//! let d = lp_distance(&embed(&a, &params).unwrap(), &embed(&b, &params).unwrap(), PNorm::ONE).unwrap();
//! assert!((d - 2.5).abs() < 1e-12);
//! ```

pub mod changepoint;
pub mod clustering;
pub mod error;
pub mod geo;
pub mod ingest;
pub mod matrices;
pub mod pipeline;
pub mod series;
pub mod set_metrics;
pub mod stepfn;
pub mod synthetic;

pub use changepoint::{detect_change_points, segment_statistics, Attribute, ChangePointSet, DetectionParams};
pub use clustering::{
    eigengap_k, hierarchical_cluster, laplacian_spectrum, spectral_cluster, ClusterAssignment, Dendrogram, Linkage,
    Merge,
};
pub use error::{Error, Result};
pub use geo::{geo_distance_matrix, haversine_km, StationMetadata, EARTH_RADIUS_KM};
pub use matrices::{
    alignment_matrix, consistency_matrix, matrix_norm, normalized_distance_matrix, to_affinity,
    unscaled_distance_matrix, LabeledSquareMatrix, MatrixKind,
};
pub use series::TimeSeries;
pub use set_metrics::{hausdorff, mj_semi_metric, modified_hausdorff};
pub use stepfn::{
    are_equivalent, embed, embed_with_change_points, inner_product, lp_distance, lp_norm, magnitude, normalize,
    Embedding, PNorm, StepFunction,
};
