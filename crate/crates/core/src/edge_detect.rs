//! Iterative (isodata) global thresholding and erosion-based edge extraction.

use crate::image::{BinaryImage, GrayImage, Histogram};

/// Stopping rule for [`iterative_threshold_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterativeThresholdParams {
    /// Stop once successive thresholds differ by less than this.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for IterativeThresholdParams {
    fn default() -> Self {
        Self {
            tolerance: 0.5,
            max_iterations: 256,
        }
    }
}

/// Outcome of the isodata recurrence.
///
/// Every pixel carries unit weight in the class means.
#[derive(Debug, Clone, PartialEq)]
pub struct IterativeThresholdResult {
    pub threshold: f64,
    /// Number of recurrence steps taken.
    pub iterations: usize,
    /// `T^0, T^1, ..., T^k`; the last entry equals `threshold`.
    pub history: Vec<f64>,
}

pub fn iterative_threshold(img: &GrayImage) -> IterativeThresholdResult {
    iterative_threshold_with(img, &IterativeThresholdParams::default())
}

pub fn iterative_threshold_with(
    img: &GrayImage,
    params: &IterativeThresholdParams,
) -> IterativeThresholdResult {
    histogram_threshold(&img.histogram(), params)
}

/// Same recurrence evaluated on a histogram. Returns threshold 0 for an empty
/// histogram.
pub fn histogram_threshold(
    hist: &Histogram,
    params: &IterativeThresholdParams,
) -> IterativeThresholdResult {
    let Some((lo, hi)) = hist.occupied_range() else {
        return IterativeThresholdResult {
            threshold: 0.0,
            iterations: 0,
            history: vec![0.0],
        };
    };

    // Prefix sums of counts and of value-weighted counts.
    let mut count_prefix = [0u64; 257];
    let mut sum_prefix = [0u64; 257];
    for (v, &c) in hist.bins().iter().enumerate() {
        count_prefix[v + 1] = count_prefix[v] + c;
        sum_prefix[v + 1] = sum_prefix[v] + c * v as u64;
    }
    let total_count = count_prefix[256];
    let total_sum = sum_prefix[256];

    let mut t = (lo as f64 + hi as f64) / 2.0;
    let mut history = vec![t];
    let mut iterations = 0;
    while iterations < params.max_iterations {
        // Values v < t form the lower class; ceil(t) is the first value at or above t.
        let split = (t.ceil().max(0.0) as usize).min(256);
        let (n_low, s_low) = (count_prefix[split], sum_prefix[split]);
        let (n_high, s_high) = (total_count - n_low, total_sum - s_low);
        let mean_low = if n_low == 0 {
            t
        } else {
            s_low as f64 / n_low as f64
        };
        let mean_high = if n_high == 0 {
            t
        } else {
            s_high as f64 / n_high as f64
        };
        let next = (mean_low + mean_high) / 2.0;
        iterations += 1;
        history.push(next);
        let done = (next - t).abs() < params.tolerance;
        t = next;
        if done {
            break;
        }
    }
    IterativeThresholdResult {
        threshold: t,
        iterations,
        history,
    }
}

/// Foreground is every pixel with value `>= t`.
pub fn binarize_at(img: &GrayImage, t: f64) -> BinaryImage {
    let data = img.data().iter().map(|&v| v as f64 >= t).collect();
    BinaryImage::new(img.width(), img.height(), data).expect("same dimensions")
}

/// 3x3 structuring element; the center is always part of the footprint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StructuringElement {
    footprint: [[bool; 3]; 3],
}

impl StructuringElement {
    /// Returns `None` when the center is not set.
    pub fn new(footprint: [[bool; 3]; 3]) -> Option<Self> {
        footprint[1][1].then_some(Self { footprint })
    }

    pub fn square() -> Self {
        Self {
            footprint: [[true; 3]; 3],
        }
    }

    pub fn cross() -> Self {
        Self {
            footprint: [
                [false, true, false],
                [true, true, true],
                [false, true, false],
            ],
        }
    }

    pub fn footprint(&self) -> &[[bool; 3]; 3] {
        &self.footprint
    }

    fn offsets(&self) -> impl Iterator<Item = (isize, isize)> + '_ {
        self.footprint.iter().enumerate().flat_map(|(dy, row)| {
            row.iter()
                .enumerate()
                .filter(|(_, &on)| on)
                .map(move |(dx, _)| (dx as isize - 1, dy as isize - 1))
        })
    }
}

impl Default for StructuringElement {
    fn default() -> Self {
        Self::square()
    }
}

/// Binary erosion; pixels outside the image count as background.
pub fn erode(img: &BinaryImage, se: &StructuringElement) -> BinaryImage {
    let offsets: Vec<(isize, isize)> = se.offsets().collect();
    BinaryImage::from_fn(img.width(), img.height(), |x, y| {
        img.get(x, y)
            && offsets
                .iter()
                .all(|&(dx, dy)| img.get_or_false(x as isize + dx, y as isize + dy))
    })
}

/// Object boundary: `img AND NOT erode(img)`.
pub fn boundary(img: &BinaryImage, se: &StructuringElement) -> BinaryImage {
    img.difference(&erode(img, se))
}

/// Every stage of [`extract_edges_traced`].
#[derive(Debug, Clone)]
pub struct EdgeTrace {
    pub threshold: IterativeThresholdResult,
    /// `f >= T*` before orientation.
    pub global: BinaryImage,
    /// True when `global` was complemented so that foreground is the minority.
    pub inverted: bool,
    pub foreground: BinaryImage,
    pub edges: BinaryImage,
}

pub fn extract_edges_traced(
    img: &GrayImage,
    params: &IterativeThresholdParams,
    se: &StructuringElement,
) -> EdgeTrace {
    let threshold = iterative_threshold_with(img, params);
    let global = binarize_at(img, threshold.threshold);
    let inverted = 2 * global.count_foreground() > global.len();
    let foreground = if inverted {
        global.complement()
    } else {
        global.clone()
    };
    let edges = boundary(&foreground, se);
    EdgeTrace {
        threshold,
        global,
        inverted,
        foreground,
        edges,
    }
}

/// One-pixel-wide edges of the minority class after iterative thresholding.
pub fn extract_edges(img: &GrayImage) -> BinaryImage {
    extract_edges_traced(
        img,
        &IterativeThresholdParams::default(),
        &StructuringElement::default(),
    )
    .edges
}
