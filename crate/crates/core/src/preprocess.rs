//! Entropy-gated contrast enhancement, smoothing and gray-level extension.
//!
//! The chain always runs in the same order: the entropy of the input decides
//! whether the sigmoid contrast stretch is applied, the result is smoothed with
//! a 3x3 mask, and a narrow gray range is finally stretched to `[0, 255]`.
//! Every stage rounds half up and clamps to `[0, 255]`.

use thiserror::Error;

use crate::image::{GrayImage, Histogram};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PreprocessError {
    #[error("entropy of an empty histogram is undefined")]
    EmptyHistogram,
    #[error("smoothing mask weights sum to {sum} but divisor is {divisor}")]
    MaskDivisor { sum: u32, divisor: u32 },
    #[error("contrast steepness must be positive and finite, got {0}")]
    Steepness(f64),
    #[error("extension gap must be in (0, 255], got {0}")]
    ExtensionGap(u32),
}

/// A 3x3 non-negative integer convolution mask with its divisor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SmoothingMask {
    weights: [[u32; 3]; 3],
    divisor: u32,
}

impl SmoothingMask {
    pub fn new(weights: [[u32; 3]; 3], divisor: u32) -> Result<Self, PreprocessError> {
        let sum = weights.iter().flatten().sum();
        if divisor == 0 || sum != divisor {
            return Err(PreprocessError::MaskDivisor { sum, divisor });
        }
        Ok(Self { weights, divisor })
    }

    pub fn weights(&self) -> &[[u32; 3]; 3] {
        &self.weights
    }

    pub fn divisor(&self) -> u32 {
        self.divisor
    }
}

impl Default for SmoothingMask {
    /// Center-weighted box, divisor 10.
    fn default() -> Self {
        Self {
            weights: [[1, 1, 1], [1, 2, 1], [1, 1, 1]],
            divisor: 10,
        }
    }
}

/// Legacy entropy threshold on an unknown scale. It cannot be reached by a
/// 256-bin entropy in bits (at most 8), so using it as the threshold
/// enhances every image.
pub const LEGACY_ENTROPY_THRESHOLD: f64 = 38.0;

#[derive(Debug, Clone, PartialEq)]
pub struct PreprocessParams {
    /// Contrast enhancement runs when the input entropy (bits) is below this.
    pub entropy_threshold: f64,
    /// Sigmoid steepness `v`; larger values give a gentler stretch.
    pub contrast_steepness: f64,
    /// Gray-level extension fires when `max - min < extension_gap`.
    pub extension_gap: u32,
    pub smoothing_mask: SmoothingMask,
}

impl Default for PreprocessParams {
    fn default() -> Self {
        Self {
            entropy_threshold: 4.75,
            contrast_steepness: 15.0,
            extension_gap: 80,
            smoothing_mask: SmoothingMask::default(),
        }
    }
}

impl PreprocessParams {
    pub fn validate(&self) -> Result<(), PreprocessError> {
        if !(self.contrast_steepness.is_finite() && self.contrast_steepness > 0.0) {
            return Err(PreprocessError::Steepness(self.contrast_steepness));
        }
        if self.extension_gap == 0 || self.extension_gap > 255 {
            return Err(PreprocessError::ExtensionGap(self.extension_gap));
        }
        SmoothingMask::new(self.smoothing_mask.weights, self.smoothing_mask.divisor)?;
        Ok(())
    }
}

#[inline]
fn round_clamp(v: f64) -> u8 {
    (v + 0.5).floor().clamp(0.0, 255.0) as u8
}

/// Shannon entropy in bits of the gray-level distribution.
pub fn entropy(h: &Histogram) -> Result<f64, PreprocessError> {
    if h.is_empty() {
        return Err(PreprocessError::EmptyHistogram);
    }
    let total = h.total() as f64;
    let sum: f64 = h
        .bins()
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / total;
            -p * p.log2()
        })
        .sum();
    // A single occupied bin yields -0.0.
    Ok(sum.max(0.0))
}

/// Sigmoid stretch `255 / (1 + exp((mean - T) / v))` around the image mean.
pub fn enhance_contrast(img: &GrayImage, steepness: f64) -> GrayImage {
    let avg = img.mean();
    let lut: Vec<u8> = (0..=255u32)
        .map(|t| round_clamp(255.0 / (1.0 + ((avg - t as f64) / steepness).exp())))
        .collect();
    img.map(|v| lut[v as usize])
}

/// 3x3 weighted average with edge-replicated borders.
pub fn smooth(img: &GrayImage, mask: &SmoothingMask) -> GrayImage {
    let d = mask.divisor as u64;
    GrayImage::from_fn(img.width(), img.height(), |x, y| {
        let mut acc = 0u64;
        for (dy, row) in mask.weights.iter().enumerate() {
            for (dx, &w) in row.iter().enumerate() {
                if w == 0 {
                    continue;
                }
                let v = img.get_clamped(x as isize + dx as isize - 1, y as isize + dy as isize - 1);
                acc += w as u64 * v as u64;
            }
        }
        // floor(acc / d + 1/2)
        ((2 * acc + d) / (2 * d)).min(255) as u8
    })
}

/// Stretches the gray range to `[0, 255]` when it spans fewer than `gap` levels.
///
/// Constant images and images whose span already reaches `gap` are returned
/// unchanged.
pub fn extend_grayscale(img: &GrayImage, gap: u32) -> GrayImage {
    let (lo, hi) = img.min_max();
    let span = (hi - lo) as u32;
    if span == 0 || span >= gap {
        return img.clone();
    }
    img.map(|s| {
        let num = (s - lo) as u32 * 255;
        ((2 * num + span) / (2 * span)).min(255) as u8
    })
}

/// Intermediate images of one preprocessing run.
#[derive(Debug, Clone)]
pub struct PreprocessTrace {
    pub entropy: f64,
    pub contrast_enhanced: bool,
    /// Output of the contrast stage (a copy of the input when the gate is closed).
    pub contrast: GrayImage,
    pub smoothed: GrayImage,
    pub extension_applied: bool,
    pub extended: GrayImage,
}

pub fn preprocess_traced(img: &GrayImage, params: &PreprocessParams) -> PreprocessTrace {
    let entropy = entropy(&img.histogram()).expect("images are never empty");
    let contrast_enhanced = entropy < params.entropy_threshold;
    let contrast = if contrast_enhanced {
        enhance_contrast(img, params.contrast_steepness)
    } else {
        img.clone()
    };
    let smoothed = smooth(&contrast, &params.smoothing_mask);
    let extended = extend_grayscale(&smoothed, params.extension_gap);
    let extension_applied = extended != smoothed;
    PreprocessTrace {
        entropy,
        contrast_enhanced,
        contrast,
        smoothed,
        extension_applied,
        extended,
    }
}

pub fn preprocess(img: &GrayImage, params: &PreprocessParams) -> GrayImage {
    preprocess_traced(img, params).extended
}
