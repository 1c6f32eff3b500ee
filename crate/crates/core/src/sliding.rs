//! Character-size uniformity threshold and final rendering.
//!
//! Edge-box sizes are sorted and scanned left to right. A window opens at the
//! current element and absorbs following elements while they stay within the
//! difference threshold of the window's first element. Windows of two or more
//! elements are evidence of uniformly sized characters; the smallest member
//! over all such windows becomes the size threshold `t_s`, and boxes smaller
//! than `t_s` are dropped.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::edge_boxes::EdgeBox;
use crate::image::BinaryImage;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SlidingError {
    #[error("size list is empty")]
    EmptySizes,
    #[error("sizes must be positive and finite, got {0}")]
    InvalidSize(f64),
    #[error("difference threshold must be positive and finite, got {0}")]
    InvalidThreshold(f64),
}

/// Which box dimension counts as its "size".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SizeMetric {
    #[default]
    Height,
    Width,
    Area,
}

impl SizeMetric {
    pub fn of(self, b: &EdgeBox) -> f64 {
        match self {
            SizeMetric::Height => b.height() as f64,
            SizeMetric::Width => b.width() as f64,
            SizeMetric::Area => b.area() as f64,
        }
    }
}

impl fmt::Display for SizeMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SizeMetric::Height => "height",
            SizeMetric::Width => "width",
            SizeMetric::Area => "area",
        })
    }
}

impl FromStr for SizeMetric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "height" => Ok(SizeMetric::Height),
            "width" => Ok(SizeMetric::Width),
            "area" => Ok(SizeMetric::Area),
            other => Err(format!("unknown size metric {other:?}")),
        }
    }
}

/// Allowed spread between a window's first element and its members.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DifferenceThreshold {
    /// `ratio * LP`.
    Relative(f64),
    Absolute(f64),
}

impl Default for DifferenceThreshold {
    fn default() -> Self {
        DifferenceThreshold::Relative(0.2)
    }
}

impl DifferenceThreshold {
    pub fn at(self, left: f64) -> f64 {
        match self {
            DifferenceThreshold::Relative(r) => r * left,
            DifferenceThreshold::Absolute(a) => a,
        }
    }

    fn value(self) -> f64 {
        match self {
            DifferenceThreshold::Relative(v) | DifferenceThreshold::Absolute(v) => v,
        }
    }
}

/// A run of the sorted size array, `start..=end`.
#[derive(Debug, Clone, PartialEq)]
pub struct SizeWindow {
    pub start_index: usize,
    pub end_index: usize,
    pub member_sizes: Vec<f64>,
    pub window_min: f64,
}

impl SizeWindow {
    /// A single size is not a group.
    pub fn is_valid(&self) -> bool {
        self.end_index > self.start_index
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UniformityResult {
    pub sorted: Vec<f64>,
    /// Every frozen window, singletons included, in scan order.
    pub windows: Vec<SizeWindow>,
    /// Minimum over valid windows; 0 when there are none.
    pub t_s: f64,
}

impl UniformityResult {
    pub fn valid_windows(&self) -> impl Iterator<Item = &SizeWindow> {
        self.windows.iter().filter(|w| w.is_valid())
    }
}

pub fn uniformity_threshold(
    sizes: &[f64],
    th: DifferenceThreshold,
) -> Result<UniformityResult, SlidingError> {
    if sizes.is_empty() {
        return Err(SlidingError::EmptySizes);
    }
    if let Some(&bad) = sizes.iter().find(|s| !(s.is_finite() && **s > 0.0)) {
        return Err(SlidingError::InvalidSize(bad));
    }
    if !(th.value().is_finite() && th.value() > 0.0) {
        return Err(SlidingError::InvalidThreshold(th.value()));
    }

    let mut sorted = sizes.to_vec();
    sorted.sort_by(f64::total_cmp);

    let mut windows = Vec::new();
    let mut start = 0;
    while start < sorted.len() {
        let left = sorted[start];
        let limit = th.at(left);
        let mut end = start;
        while end + 1 < sorted.len() && sorted[end + 1] - left <= limit {
            end += 1;
        }
        windows.push(SizeWindow {
            start_index: start,
            end_index: end,
            member_sizes: sorted[start..=end].to_vec(),
            // Sorted ascending, so the first member is the minimum.
            window_min: left,
        });
        start = end + 1;
    }

    let t_s = windows
        .iter()
        .filter(|w| w.is_valid())
        .map(|w| w.window_min)
        .min_by(f64::total_cmp)
        .unwrap_or(0.0);

    Ok(UniformityResult {
        sorted,
        windows,
        t_s,
    })
}

/// Splits boxes into `size >= t_s` (retained) and the rest (removed).
pub fn apply_size_threshold(
    boxes: &[EdgeBox],
    t_s: f64,
    metric: SizeMetric,
) -> (Vec<EdgeBox>, Vec<EdgeBox>) {
    boxes.iter().partition(|b| metric.of(b) >= t_s)
}

/// Text polarity decided for one retained box.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoxPolarity {
    pub label: u32,
    /// Class of the global binarization taken as text inside this box.
    pub text_class: bool,
    /// The surrounding border was split evenly and the darker class was chosen.
    pub tie: bool,
}

#[derive(Debug, Clone)]
pub struct RenderOutput {
    pub image: BinaryImage,
    pub polarities: Vec<BoxPolarity>,
}

/// Counts `(true pixels, total)` on the one-pixel ring just outside `b`,
/// falling back to the box's own frame when the box fills the whole image.
fn border_occupancy(global: &BinaryImage, b: &EdgeBox) -> (usize, usize) {
    let (w, h) = (global.width() as isize, global.height() as isize);
    let (x0, y0, x1, y1) = (
        b.x_min as isize - 1,
        b.y_min as isize - 1,
        b.x_max as isize + 1,
        b.y_max as isize + 1,
    );
    let ring = |x0: isize, y0: isize, x1: isize, y1: isize| {
        let mut on = 0;
        let mut total = 0;
        let mut visit = |x: isize, y: isize| {
            if x >= 0 && y >= 0 && x < w && y < h {
                total += 1;
                on += global.get(x as usize, y as usize) as usize;
            }
        };
        for x in x0..=x1 {
            visit(x, y0);
            if y1 != y0 {
                visit(x, y1);
            }
        }
        for y in y0 + 1..y1 {
            visit(x0, y);
            if x1 != x0 {
                visit(x1, y);
            }
        }
        (on, total)
    };
    let outer = ring(x0, y0, x1, y1);
    if outer.1 > 0 {
        outer
    } else {
        ring(x0 + 1, y0 + 1, x1 - 1, y1 - 1)
    }
}

/// Renders retained boxes as white text on black.
///
/// `global` is the `f >= T*` classification. Inside each box the class that is
/// rarer on the box's surrounding border is taken as text. On a tie the
/// below-threshold (darker) class is used.
pub fn render_binary(global: &BinaryImage, retained: &[EdgeBox]) -> RenderOutput {
    let (w, h) = (global.width(), global.height());
    let mut data = vec![false; w * h];
    let mut polarities = Vec::with_capacity(retained.len());
    for b in retained {
        let (on, total) = border_occupancy(global, b);
        let tie = 2 * on == total;
        let text_class = if tie { false } else { 2 * on < total };
        polarities.push(BoxPolarity {
            label: b.label,
            text_class,
            tie,
        });
        for y in b.y_min..=b.y_max.min(h - 1) {
            for x in b.x_min..=b.x_max.min(w - 1) {
                if global.get(x, y) == text_class {
                    data[y * w + x] = true;
                }
            }
        }
    }
    RenderOutput {
        image: BinaryImage::new(w, h, data).expect("same dimensions"),
        polarities,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn boxed(label: u32, height: usize) -> EdgeBox {
        EdgeBox {
            label,
            x_min: 0,
            y_min: 0,
            x_max: 0,
            y_max: height - 1,
            pixel_count: height,
        }
    }

    fn mins(r: &UniformityResult) -> Vec<f64> {
        r.valid_windows().map(|w| w.window_min).collect()
    }

    #[test]
    fn hand_traced_windows() {
        let r = uniformity_threshold(
            &[500.0, 102.0, 98.0, 105.0, 100.0],
            DifferenceThreshold::Absolute(10.0),
        )
        .unwrap();
        assert_eq!(r.sorted, vec![98.0, 100.0, 102.0, 105.0, 500.0]);
        assert_eq!(r.windows.len(), 2);
        assert_eq!(r.windows[0].member_sizes, vec![98.0, 100.0, 102.0, 105.0]);
        assert_eq!((r.windows[0].start_index, r.windows[0].end_index), (0, 3));
        assert!(!r.windows[1].is_valid());
        assert_eq!(r.t_s, 98.0);

        let boxes: Vec<EdgeBox> = [98, 100, 102, 105, 500]
            .iter()
            .enumerate()
            .map(|(i, &s)| boxed(i as u32 + 1, s))
            .collect();
        let (kept, removed) = apply_size_threshold(&boxes, r.t_s, SizeMetric::Height);
        assert_eq!(kept.len(), 5);
        assert!(removed.is_empty());
    }

    #[test]
    fn uniform_sizes_form_one_window() {
        let r = uniformity_threshold(&[7.0; 6], DifferenceThreshold::Absolute(0.5)).unwrap();
        assert_eq!(r.windows.len(), 1);
        assert_eq!(r.t_s, 7.0);
    }

    #[test]
    fn no_valid_window_keeps_everything() {
        let r = uniformity_threshold(&[10.0, 400.0], DifferenceThreshold::Absolute(5.0)).unwrap();
        assert_eq!(r.t_s, 0.0);
        assert_eq!(r.valid_windows().count(), 0);
    }

    #[test]
    fn relative_threshold_scales_with_size() {
        // 20 * 1.2 = 24 joins, 25 does not; 100 * 1.2 = 120 joins 110 and 118.
        let r = uniformity_threshold(
            &[20.0, 24.0, 25.0, 100.0, 110.0, 118.0],
            DifferenceThreshold::default(),
        )
        .unwrap();
        assert_eq!(mins(&r), vec![20.0, 100.0]);
        assert!(!r.windows[1].is_valid());
        assert_eq!(r.t_s, 20.0);
    }

    #[test]
    fn errors() {
        assert_eq!(
            uniformity_threshold(&[], DifferenceThreshold::default()),
            Err(SlidingError::EmptySizes)
        );
        assert_eq!(
            uniformity_threshold(&[0.0], DifferenceThreshold::default()),
            Err(SlidingError::InvalidSize(0.0))
        );
        assert_eq!(
            uniformity_threshold(&[1.0], DifferenceThreshold::Absolute(0.0)),
            Err(SlidingError::InvalidThreshold(0.0))
        );
    }

    #[test]
    fn size_threshold_partition() {
        let boxes = [boxed(1, 50), boxed(2, 98), boxed(3, 120)];
        let (kept, removed) = apply_size_threshold(&boxes, 98.0, SizeMetric::Height);
        assert_eq!(kept.iter().map(|b| b.label).collect::<Vec<_>>(), vec![2, 3]);
        assert_eq!(removed.iter().map(|b| b.label).collect::<Vec<_>>(), vec![1]);
        let (kept, _) = apply_size_threshold(&boxes, 0.0, SizeMetric::Height);
        assert_eq!(kept.len(), 3);
    }

    #[test]
    fn metric_parsing() {
        for m in [SizeMetric::Height, SizeMetric::Width, SizeMetric::Area] {
            assert_eq!(m.to_string().parse::<SizeMetric>(), Ok(m));
        }
        assert!("depth".parse::<SizeMetric>().is_err());
    }

    fn frame_box(label: u32, x0: usize, y0: usize, x1: usize, y1: usize) -> EdgeBox {
        EdgeBox {
            label,
            x_min: x0,
            y_min: y0,
            x_max: x1,
            y_max: y1,
            pixel_count: 1,
        }
    }

    #[test]
    fn dark_glyph_on_light_ground() {
        // global is f >= T: the light ground is true, the glyph false.
        let glyph = |x: usize, y: usize| {
            (4..7).contains(&x) && (3..12).contains(&y) || (3..12).contains(&x) && y == 11
        };
        let global = BinaryImage::from_fn(16, 16, |x, y| !glyph(x, y));
        let out = render_binary(&global, &[frame_box(1, 3, 3, 11, 11)]);
        assert_eq!(out.image, BinaryImage::from_fn(16, 16, glyph));
        assert!(!out.polarities[0].text_class);
        assert!(!out.polarities[0].tie);
    }

    #[test]
    fn glyph_filling_its_frame() {
        // An E covers 16 of the 20 frame pixels of its own box.
        let e = |x: usize, y: usize| {
            (2..7).contains(&x) && (2..9).contains(&y) && (x == 2 || y == 2 || y == 5 || y == 8)
        };
        let global = BinaryImage::from_fn(10, 11, |x, y| !e(x, y));
        let out = render_binary(&global, &[frame_box(1, 2, 2, 6, 8)]);
        assert_eq!(out.image, BinaryImage::from_fn(10, 11, e));
    }

    #[test]
    fn nothing_retained_is_black() {
        let global = BinaryImage::from_fn(8, 8, |x, _| x % 2 == 0);
        assert_eq!(render_binary(&global, &[]).image.count_foreground(), 0);
    }

    #[test]
    fn both_polarities_render_white() {
        // Left half: light ground with a dark bar. Right half: dark ground with a light bar.
        let dark_word = |x: usize, y: usize| (4..10).contains(&x) && (6..14).contains(&y);
        let light_word = |x: usize, y: usize| (24..30).contains(&x) && (6..14).contains(&y);
        let global = BinaryImage::from_fn(36, 20, |x, y| {
            if x < 18 {
                !dark_word(x, y)
            } else {
                light_word(x, y)
            }
        });
        let boxes = [frame_box(1, 4, 6, 9, 13), frame_box(2, 24, 6, 29, 13)];
        let out = render_binary(&global, &boxes);
        assert_eq!(
            out.image,
            BinaryImage::from_fn(36, 20, |x, y| dark_word(x, y) || light_word(x, y))
        );
        assert_eq!(
            out.polarities
                .iter()
                .map(|p| p.text_class)
                .collect::<Vec<_>>(),
            vec![false, true]
        );
    }

    #[test]
    fn even_border_falls_back_to_darker_class() {
        // Ring around the 2x2 box at (2,2): columns < 3 true, the rest false -> 6 of 12.
        let global = BinaryImage::from_fn(6, 6, |x, _| x < 3);
        let out = render_binary(&global, &[frame_box(1, 2, 2, 3, 3)]);
        assert!(out.polarities[0].tie);
        assert!(!out.polarities[0].text_class);
        assert_eq!(out.image.count_foreground(), 2);
    }

    #[test]
    fn full_image_box_uses_its_own_frame() {
        let global = BinaryImage::from_fn(5, 5, |x, y| (1..4).contains(&x) && (1..4).contains(&y));
        let out = render_binary(&global, &[frame_box(1, 0, 0, 4, 4)]);
        assert!(out.polarities[0].text_class);
        assert_eq!(out.image, global);
    }

    /// Every valid partition of `sorted` into consecutive runs where each run
    /// stays within `th` of its first element and cannot absorb the next one.
    fn brute_force_runs(sorted: &[f64], th: DifferenceThreshold) -> Vec<(usize, usize)> {
        let n = sorted.len();
        let mut found = Vec::new();
        for cuts in 0u32..(1 << (n - 1)) {
            let mut runs = Vec::new();
            let mut start = 0;
            for i in 0..n {
                if i == n - 1 || cuts & (1 << i) != 0 {
                    runs.push((start, i));
                    start = i + 1;
                }
            }
            let ok = runs.iter().all(|&(s, e)| {
                let within = (s..=e).all(|j| sorted[j] - sorted[s] <= th.at(sorted[s]));
                let maximal = e + 1 >= n || sorted[e + 1] - sorted[s] > th.at(sorted[s]);
                within && maximal
            });
            if ok {
                found.push(runs);
            }
        }
        assert_eq!(found.len(), 1, "maximal run partition must be unique");
        found.pop().unwrap()
    }

    proptest! {
        #[test]
        fn scan_matches_exhaustive_runs(sizes in proptest::collection::vec(1u32..=20, 1..=8), abs in proptest::bool::ANY, t in 1u32..6) {
            let sizes: Vec<f64> = sizes.into_iter().map(f64::from).collect();
            let th = if abs { DifferenceThreshold::Absolute(t as f64) } else { DifferenceThreshold::Relative(0.1 * t as f64) };
            let r = uniformity_threshold(&sizes, th).unwrap();
            let runs: Vec<(usize, usize)> = r.windows.iter().map(|w| (w.start_index, w.end_index)).collect();
            prop_assert_eq!(&runs, &brute_force_runs(&r.sorted, th));
        }

        #[test]
        fn permutation_invariant(sizes in proptest::collection::vec(1u32..100, 1..30), rot in 0usize..30) {
            let a: Vec<f64> = sizes.iter().map(|&s| s as f64).collect();
            let mut b = a.clone();
            b.reverse();
            let r = rot % b.len();
            b.rotate_left(r);
            let th = DifferenceThreshold::default();
            prop_assert_eq!(uniformity_threshold(&a, th).unwrap(), uniformity_threshold(&b, th).unwrap());
        }

        #[test]
        fn scale_covariant(sizes in proptest::collection::vec(1u32..100, 1..30), abs in 1u32..10, k in 0i32..6) {
            let c = 2f64.powi(k);
            let base: Vec<f64> = sizes.iter().map(|&s| s as f64).collect();
            let scaled: Vec<f64> = base.iter().map(|s| s * c).collect();
            for (th, th_scaled) in [
                (DifferenceThreshold::Absolute(abs as f64), DifferenceThreshold::Absolute(abs as f64 * c)),
                (DifferenceThreshold::default(), DifferenceThreshold::default()),
            ] {
                let r1 = uniformity_threshold(&base, th).unwrap();
                let r2 = uniformity_threshold(&scaled, th_scaled).unwrap();
                prop_assert_eq!(r2.t_s, r1.t_s * c);
                let kept1: Vec<bool> = base.iter().map(|&s| s >= r1.t_s).collect();
                let kept2: Vec<bool> = scaled.iter().map(|&s| s >= r2.t_s).collect();
                prop_assert_eq!(kept1, kept2);
            }
        }

        #[test]
        fn threshold_is_zero_or_a_member(sizes in proptest::collection::vec(1u32..50, 1..20)) {
            let s: Vec<f64> = sizes.iter().map(|&v| v as f64).collect();
            let r = uniformity_threshold(&s, DifferenceThreshold::default()).unwrap();
            prop_assert!(r.t_s == 0.0 || s.contains(&r.t_s));
        }

        #[test]
        fn raising_threshold_never_grows_retained(sizes in proptest::collection::vec(1usize..50, 0..20), a in 0.0f64..60.0, b in 0.0f64..60.0) {
            let boxes: Vec<EdgeBox> = sizes.iter().enumerate().map(|(i, &s)| boxed(i as u32 + 1, s)).collect();
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let (k_lo, _) = apply_size_threshold(&boxes, lo, SizeMetric::Height);
            let (k_hi, _) = apply_size_threshold(&boxes, hi, SizeMetric::Height);
            prop_assert!(k_hi.iter().all(|b| k_lo.contains(b)));
        }

        #[test]
        fn render_stays_inside_boxes(bits in proptest::collection::vec(any::<bool>(), 400), raw in proptest::collection::vec((0usize..20, 0usize..20, 0usize..8, 0usize..8), 0..5)) {
            let global = BinaryImage::new(20, 20, bits).unwrap();
            let boxes: Vec<EdgeBox> = raw.iter().enumerate().map(|(i, &(x, y, w, h))| frame_box(i as u32 + 1, x, y, (x + w).min(19), (y + h).min(19))).collect();
            let out = render_binary(&global, &boxes);
            for y in 0..20 {
                for x in 0..20 {
                    if out.image.get(x, y) {
                        prop_assert!(boxes.iter().any(|b| b.contains_point(x, y)));
                    }
                }
            }
        }
    }
}
