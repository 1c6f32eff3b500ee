//! Pipeline configuration in the flat `key = value` grammar.
//!
//! | key | default |
//! |-----|---------|
//! | `entropy_threshold` | 4.75 bits (the legacy value 38 enhances every image) |
//! | `contrast_steepness` | 15 |
//! | `extension_gap` | 80 |
//! | `smoothing_mask` | `1 1 1 1 2 1 1 1 1` (row-major) |
//! | `smoothing_divisor` | 10 |
//! | `threshold_tolerance` | 0.5 |
//! | `threshold_max_iterations` | 256 |
//! | `aspect_min` / `aspect_max` | 0.1 / 10 |
//! | `containment_filter` | true |
//! | `size_metric` | `height` (`width`, `area`) |
//! | `size_tolerance_mode` | `relative` (`absolute`) |
//! | `size_tolerance` | 0.2 |
//! | `niblack_window` | 15 |
//! | `niblack_k` | -0.2 |
//!
//! Unknown or repeated keys are rejected.

use std::collections::HashSet;
use std::fmt::Write as _;

use thiserror::Error;

use crate::baselines::NiblackParams;
use crate::edge_boxes::AspectBounds;
use crate::edge_detect::IterativeThresholdParams;
use crate::kv::{self, KvError};
use crate::preprocess::{PreprocessParams, SmoothingMask};
use crate::sliding::{DifferenceThreshold, SizeMetric};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error(transparent)]
    Syntax(#[from] KvError),
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub preprocess: PreprocessParams,
    pub threshold: IterativeThresholdParams,
    pub aspect: AspectBounds,
    pub containment_filter: bool,
    pub size_metric: SizeMetric,
    pub size_tolerance: DifferenceThreshold,
    pub niblack: NiblackParams,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            preprocess: PreprocessParams::default(),
            threshold: IterativeThresholdParams::default(),
            aspect: AspectBounds::default(),
            containment_filter: true,
            size_metric: SizeMetric::Height,
            size_tolerance: DifferenceThreshold::default(),
            niblack: NiblackParams::default(),
        }
    }
}

const KEYS: &[&str] = &[
    "entropy_threshold",
    "contrast_steepness",
    "extension_gap",
    "smoothing_mask",
    "smoothing_divisor",
    "threshold_tolerance",
    "threshold_max_iterations",
    "aspect_min",
    "aspect_max",
    "containment_filter",
    "size_metric",
    "size_tolerance_mode",
    "size_tolerance",
    "niblack_window",
    "niblack_k",
];

impl PipelineConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = PipelineConfig::default();
        let mut weights = *cfg.preprocess.smoothing_mask.weights();
        let mut divisor = cfg.preprocess.smoothing_mask.divisor();
        let mut relative = true;
        let mut tolerance = 0.2;
        let mut seen = HashSet::new();

        for e in kv::parse(text)? {
            if !KEYS.contains(&e.key) {
                return Err(e.error(format!("unknown key {}", e.key)).into());
            }
            if !seen.insert(e.key) {
                return Err(e.error(format!("duplicate key {}", e.key)).into());
            }
            match e.key {
                "entropy_threshold" => cfg.preprocess.entropy_threshold = e.parse()?,
                "contrast_steepness" => cfg.preprocess.contrast_steepness = e.parse()?,
                "extension_gap" => cfg.preprocess.extension_gap = e.parse()?,
                "smoothing_mask" => {
                    let vals: Vec<u32> = e
                        .value
                        .split_whitespace()
                        .map(|v| {
                            v.parse()
                                .map_err(|_| e.error(format!("invalid mask weight {v:?}")))
                        })
                        .collect::<Result<_, _>>()?;
                    if vals.len() != 9 {
                        return Err(e.error("smoothing_mask needs 9 weights").into());
                    }
                    for (i, v) in vals.into_iter().enumerate() {
                        weights[i / 3][i % 3] = v;
                    }
                }
                "smoothing_divisor" => divisor = e.parse()?,
                "threshold_tolerance" => cfg.threshold.tolerance = e.parse()?,
                "threshold_max_iterations" => cfg.threshold.max_iterations = e.parse()?,
                "aspect_min" => cfg.aspect.min = e.parse()?,
                "aspect_max" => cfg.aspect.max = e.parse()?,
                "containment_filter" => cfg.containment_filter = e.parse()?,
                "size_metric" => {
                    cfg.size_metric = e.value.parse().map_err(|m: String| e.error(m))?
                }
                "size_tolerance_mode" => {
                    relative = match e.value {
                        "relative" => true,
                        "absolute" => false,
                        _ => {
                            return Err(e
                                .error("size_tolerance_mode must be relative or absolute")
                                .into())
                        }
                    }
                }
                "size_tolerance" => tolerance = e.parse()?,
                "niblack_window" => cfg.niblack.window = e.parse()?,
                "niblack_k" => cfg.niblack.k = e.parse()?,
                _ => unreachable!("filtered by KEYS"),
            }
        }

        cfg.preprocess.smoothing_mask = SmoothingMask::new(weights, divisor)
            .map_err(|err| ConfigError::Invalid(err.to_string()))?;
        cfg.size_tolerance = if relative {
            DifferenceThreshold::Relative(tolerance)
        } else {
            DifferenceThreshold::Absolute(tolerance)
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |m: String| Err(ConfigError::Invalid(m));
        self.preprocess
            .validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        self.niblack
            .validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        if !self.preprocess.entropy_threshold.is_finite() {
            return invalid("entropy_threshold must be finite".into());
        }
        if !(self.threshold.tolerance.is_finite() && self.threshold.tolerance > 0.0) {
            return invalid(format!(
                "threshold_tolerance must be positive, got {}",
                self.threshold.tolerance
            ));
        }
        if self.threshold.max_iterations == 0 {
            return invalid("threshold_max_iterations must be at least 1".into());
        }
        let AspectBounds { min, max } = self.aspect;
        if !(min.is_finite() && max.is_finite() && 0.0 < min && min <= max) {
            return invalid(format!(
                "aspect bounds must satisfy 0 < min <= max, got [{min}, {max}]"
            ));
        }
        let tol = match self.size_tolerance {
            DifferenceThreshold::Relative(v) | DifferenceThreshold::Absolute(v) => v,
        };
        if !(tol.is_finite() && tol > 0.0) {
            return invalid(format!("size_tolerance must be positive, got {tol}"));
        }
        Ok(())
    }

    /// Every key with its effective value; parses back to an equal config.
    pub fn to_kv(&self) -> String {
        let mut s = String::new();
        let p = &self.preprocess;
        let w = p.smoothing_mask.weights();
        let _ = writeln!(s, "entropy_threshold = {}", p.entropy_threshold);
        let _ = writeln!(s, "contrast_steepness = {}", p.contrast_steepness);
        let _ = writeln!(s, "extension_gap = {}", p.extension_gap);
        let mask: Vec<String> = w.iter().flatten().map(u32::to_string).collect();
        let _ = writeln!(s, "smoothing_mask = {}", mask.join(" "));
        let _ = writeln!(s, "smoothing_divisor = {}", p.smoothing_mask.divisor());
        let _ = writeln!(s, "threshold_tolerance = {}", self.threshold.tolerance);
        let _ = writeln!(
            s,
            "threshold_max_iterations = {}",
            self.threshold.max_iterations
        );
        let _ = writeln!(s, "aspect_min = {}", self.aspect.min);
        let _ = writeln!(s, "aspect_max = {}", self.aspect.max);
        let _ = writeln!(s, "containment_filter = {}", self.containment_filter);
        let _ = writeln!(s, "size_metric = {}", self.size_metric);
        let (mode, tol) = match self.size_tolerance {
            DifferenceThreshold::Relative(v) => ("relative", v),
            DifferenceThreshold::Absolute(v) => ("absolute", v),
        };
        let _ = writeln!(s, "size_tolerance_mode = {mode}");
        let _ = writeln!(s, "size_tolerance = {tol}");
        let _ = writeln!(s, "niblack_window = {}", self.niblack.window);
        let _ = writeln!(s, "niblack_k = {}", self.niblack.k);
        s
    }
}
