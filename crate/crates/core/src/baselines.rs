//! Reference binarizers: Otsu's global threshold and Niblack's local threshold.

use thiserror::Error;

use crate::edge_detect::binarize_at;
use crate::image::{BinaryImage, GrayImage, Histogram};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BaselineError {
    #[error("niblack window must be odd and at least 3, got {0}")]
    Window(usize),
    #[error("niblack k must be finite, got {0}")]
    Weight(f64),
}

/// Threshold `t` maximizing the between-class variance of `{v < t}` and
/// `{v >= t}`. Ties go to the smallest `t`; a histogram with at most one
/// occupied level returns 0.
pub fn otsu_threshold(h: &Histogram) -> u8 {
    let total = h.total() as i128;
    let total_sum: i128 = h
        .bins()
        .iter()
        .enumerate()
        .map(|(v, &c)| v as i128 * c as i128)
        .sum();

    let mut best_t = 0u8;
    let mut best = 0.0f64;
    let mut n_low = 0i128;
    let mut s_low = 0i128;
    for t in 1..=255usize {
        n_low += h.bins()[t - 1] as i128;
        s_low += (t - 1) as i128 * h.bins()[t - 1] as i128;
        let n_high = total - n_low;
        if n_low == 0 || n_high == 0 {
            continue;
        }
        // w0 w1 (m0 - m1)^2 = (N S0 - S n0)^2 / (N^2 n0 n1); N^2 is common to all t.
        let diff = (total * s_low - total_sum * n_low) as f64;
        let score = diff * diff / (n_low as f64 * n_high as f64);
        if score > best {
            best = score;
            best_t = t as u8;
        }
    }
    best_t
}

/// If more than half the pixels are foreground, flip so text is the minority.
fn minority_foreground(b: BinaryImage) -> BinaryImage {
    if 2 * b.count_foreground() > b.len() {
        b.complement()
    } else {
        b
    }
}

/// Global Otsu split with the minority class rendered white.
pub fn otsu_binarize(img: &GrayImage) -> BinaryImage {
    let t = otsu_threshold(&img.histogram());
    minority_foreground(binarize_at(img, t as f64))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NiblackParams {
    /// Odd window side length.
    pub window: usize,
    pub k: f64,
}

impl Default for NiblackParams {
    fn default() -> Self {
        Self {
            window: 15,
            k: -0.2,
        }
    }
}

impl NiblackParams {
    pub fn validate(&self) -> Result<(), BaselineError> {
        if self.window < 3 || self.window.is_multiple_of(2) {
            return Err(BaselineError::Window(self.window));
        }
        if !self.k.is_finite() {
            return Err(BaselineError::Weight(self.k));
        }
        Ok(())
    }
}

/// Windowed mean and standard deviation over an edge-replicated image.
///
/// Backed by summed-area tables of values and squared values built on the
/// padded image, so each pixel costs four lookups per table.
pub struct LocalStats {
    width: usize,
    height: usize,
    window: usize,
    padded_width: usize,
    sum: Vec<u64>,
    sum_sq: Vec<u64>,
}

impl LocalStats {
    pub fn new(img: &GrayImage, window: usize) -> Self {
        let r = (window / 2) as isize;
        let (w, h) = (img.width(), img.height());
        let pw = w + 2 * r as usize;
        let ph = h + 2 * r as usize;
        // Tables carry a leading zero row and column.
        let stride = pw + 1;
        let mut sum = vec![0u64; stride * (ph + 1)];
        let mut sum_sq = vec![0u64; stride * (ph + 1)];
        for py in 0..ph {
            let mut row = 0u64;
            let mut row_sq = 0u64;
            for px in 0..pw {
                let v = img.get_clamped(px as isize - r, py as isize - r) as u64;
                row += v;
                row_sq += v * v;
                let i = (py + 1) * stride + px + 1;
                sum[i] = sum[i - stride] + row;
                sum_sq[i] = sum_sq[i - stride] + row_sq;
            }
        }
        Self {
            width: w,
            height: h,
            window,
            padded_width: pw,
            sum,
            sum_sq,
        }
    }

    fn rect(table: &[u64], stride: usize, x: usize, y: usize, n: usize) -> u64 {
        table[(y + n) * stride + x + n] + table[y * stride + x]
            - table[y * stride + x + n]
            - table[(y + n) * stride + x]
    }

    /// `(mean, std_dev)` of the window centered on `(x, y)`.
    pub fn at(&self, x: usize, y: usize) -> (f64, f64) {
        debug_assert!(x < self.width && y < self.height);
        let stride = self.padded_width + 1;
        let n = self.window;
        // Padded coordinates of the window's top-left corner are (x, y).
        let s = Self::rect(&self.sum, stride, x, y, n) as f64;
        let sq = Self::rect(&self.sum_sq, stride, x, y, n) as f64;
        let count = (n * n) as f64;
        let mean = s / count;
        let var = (sq / count - mean * mean).max(0.0);
        (mean, var.sqrt())
    }
}

/// Niblack: a pixel is text when it is darker than `m + k s` of its window.
pub fn niblack_binarize(
    img: &GrayImage,
    params: &NiblackParams,
) -> Result<BinaryImage, BaselineError> {
    params.validate()?;
    let stats = LocalStats::new(img, params.window);
    Ok(BinaryImage::from_fn(img.width(), img.height(), |x, y| {
        let (m, s) = stats.at(x, y);
        (img.get(x, y) as f64) < m + params.k * s
    }))
}
