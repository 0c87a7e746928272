//! Biologically-inspired foveated image transform and certification toolkit.
//!
//! The pipeline simulates peripheral vision: Gaussian photoreceptor noise,
//! eccentricity-adaptive Gaussian blur of a color and a grayscale copy
//! (acuity falls off with distance from the fixation point), and an
//! acuity-weighted blend that desaturates the periphery. Around it sit
//! fixation utilities (heatmap-driven scanpaths, deterministic grids, score
//! aggregation) and a randomized-smoothing certifier with exact binomial
//! confidence bounds that can certify any [`certify::Classifier`] —
//! including one wrapped behind the transform.

pub mod acuity;
pub mod certify;
pub mod error;
pub mod fixation;
pub mod foveate;
pub mod geometry;
pub mod image;
pub mod rng;
pub mod stats;

pub use acuity::{
    acuity_envelope, apply_viewing_distance, build_acuity_table, photopic_acuity,
    scotopic_acuity, AcuityBin, AcuityParams, AcuityTable,
};
pub use certify::{
    certified_accuracy, certify, clopper_pearson_lower, CertificationResult, CertifyOutcome,
    CertifyParams, CertifySeed, Classifier, ConstantClassifier, LinearClassifier,
    NearestCentroidClassifier, RBlurClassifier,
};
pub use error::{Error, Result};
pub use certify::argmax_lowest;
pub use fixation::{
    aggregate_scores, any_correct, argmax_scanpath, center_bias_heatmap, five_fixations,
    fixation_grid, mask_heatmap, sample_scanpath, Heatmap, Scanpath,
};
pub use foveate::{
    adaptive_blur, add_gaussian_noise, blend, gaussian_blur_fixed, rblur, to_grayscale,
    BlurChannel, RBlur, RBlurConfig,
};
pub use image::Image;
pub use geometry::{
    eccentricity, eccentricity_map, eccentricity_map_for, EccentricityMap, FixationPoint,
    VisualField,
};
pub use stats::{std_normal_cdf, std_normal_quantile};
