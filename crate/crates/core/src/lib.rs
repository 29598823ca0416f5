//! Horizon-first vanishing point detection.
//!
//! Segments are lifted to the Gaussian sphere, the zenith is found by
//! RANSAC among near-vertical segments, and horizon candidates sampled from
//! a prior are scored by the horizontal VPs they support.

pub mod error;
pub mod eval;
pub mod fsio;
pub mod geom;
pub mod hvp;
mod linalg;
pub mod params;
pub mod prior;
pub mod segments;
pub mod synth;
pub mod zenith;

pub use error::{Error, Result};
pub use eval::{auc, horizon_error, run_benchmark, run_mode, Ablation, BenchReport, ErrorRecord, GroundTruth};
pub use geom::{angle, consistency, join, lift_point, meet, CameraFrame, ImageLine, SphereLine, SpherePoint};
pub use hvp::{detect, detect_empty, DetectionResult};
pub use params::AlgorithmParams;
pub use prior::{fit_gaussian, no_context_prior, squash, unsquash, CategoricalPrior, HorizonParam, HorizonPrior};
pub use segments::{load_segments, LineSegment, SegmentSet};
pub use synth::{make_scene, SceneSpec, SyntheticScene};
pub use zenith::{detect_zenith, ZenithResult};
