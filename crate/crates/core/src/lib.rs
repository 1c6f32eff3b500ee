//! Text binarization by sliding-window size uniformity over edge boxes.
//!
//! The pipeline converts an image to gray, preprocesses it, extracts one-pixel
//! edges from an iterative global threshold, filters the edge bounding boxes
//! and keeps only boxes whose sizes agree with their neighbours. Otsu and
//! Niblack baselines plus a synthetic corpus generator are included for
//! comparison.

pub mod baselines;
pub mod compare;
pub mod config;
pub mod edge_boxes;
pub mod edge_detect;
pub mod font;
pub mod image;
pub mod kv;
pub mod metrics;
pub mod pipeline;
pub mod pnm;
pub mod preprocess;
pub mod sliding;
pub mod synth;

pub use config::{ConfigError, PipelineConfig};
pub use image::{BinaryImage, ColorImage, GrayImage, Histogram, ImageError};
pub use metrics::{evaluate, EvalReport};
pub use pipeline::{binarize_color, binarize_pipeline, Method, PipelineOutput, StageReport};
pub use pnm::{PnmError, PnmImage};
