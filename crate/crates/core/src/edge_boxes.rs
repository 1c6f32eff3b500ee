//! Edge boxes: 8-connected edge components, their bounding boxes, and the
//! geometric filters that discard non-character boxes.

use std::fmt;

use crate::image::BinaryImage;

/// Bounding box of one 8-connected edge component. Coordinates are inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct EdgeBox {
    pub label: u32,
    pub x_min: usize,
    pub y_min: usize,
    pub x_max: usize,
    pub y_max: usize,
    pub pixel_count: usize,
}

impl EdgeBox {
    pub fn width(&self) -> usize {
        self.x_max - self.x_min + 1
    }

    pub fn height(&self) -> usize {
        self.y_max - self.y_min + 1
    }

    pub fn area(&self) -> usize {
        self.width() * self.height()
    }

    /// `width / height`.
    pub fn aspect_ratio(&self) -> f64 {
        self.width() as f64 / self.height() as f64
    }

    /// True when `inner` lies strictly inside `self` on all four sides.
    pub fn strictly_contains(&self, inner: &EdgeBox) -> bool {
        inner.x_min > self.x_min
            && inner.x_max < self.x_max
            && inner.y_min > self.y_min
            && inner.y_max < self.y_max
    }

    pub fn contains_point(&self, x: usize, y: usize) -> bool {
        (self.x_min..=self.x_max).contains(&x) && (self.y_min..=self.y_max).contains(&y)
    }
}

impl fmt::Display for EdgeBox {
    /// `label x_min y_min x_max y_max pixel_count`
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} {} {} {} {}",
            self.label, self.x_min, self.y_min, self.x_max, self.y_max, self.pixel_count
        )
    }
}

/// Component labels (0 for background) and one box per label.
///
/// Labels are `1..=boxes.len()` in raster order of each component's first
/// pixel, and `boxes[i].label == i + 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledEdgeMap {
    pub width: usize,
    pub height: usize,
    pub labels: Vec<u32>,
    pub boxes: Vec<EdgeBox>,
}

impl LabeledEdgeMap {
    pub fn label_at(&self, x: usize, y: usize) -> u32 {
        self.labels[y * self.width + x]
    }
}

struct DisjointSet {
    parent: Vec<u32>,
}

impl DisjointSet {
    fn new() -> Self {
        // Slot 0 is the background and never merged.
        Self { parent: vec![0] }
    }

    fn make(&mut self) -> u32 {
        let id = self.parent.len() as u32;
        self.parent.push(id);
        id
    }

    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let grand = self.parent[self.parent[x as usize] as usize];
            self.parent[x as usize] = grand;
            x = grand;
        }
        x
    }

    fn union(&mut self, a: u32, b: u32) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // Keep the smaller id as root so roots follow raster order.
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi as usize] = lo;
        }
    }
}

/// Two-pass union-find labeling with 8-connectivity.
pub fn label_components(edges: &BinaryImage) -> LabeledEdgeMap {
    let (w, h) = (edges.width(), edges.height());
    let mut provisional = vec![0u32; w * h];
    let mut sets = DisjointSet::new();

    for y in 0..h {
        for x in 0..w {
            if !edges.get(x, y) {
                continue;
            }
            // Previously visited neighbours: W, NW, N, NE.
            let mut neighbours = [0u32; 4];
            if x > 0 {
                neighbours[0] = provisional[y * w + x - 1];
            }
            if y > 0 {
                let up = (y - 1) * w;
                if x > 0 {
                    neighbours[1] = provisional[up + x - 1];
                }
                neighbours[2] = provisional[up + x];
                if x + 1 < w {
                    neighbours[3] = provisional[up + x + 1];
                }
            }
            let mut label = 0;
            for &n in neighbours.iter().filter(|&&n| n != 0) {
                if label == 0 {
                    label = n;
                } else {
                    sets.union(label, n);
                }
            }
            if label == 0 {
                label = sets.make();
            }
            provisional[y * w + x] = label;
        }
    }

    // Second pass: resolve roots, compact labels, accumulate boxes.
    let mut compact = vec![0u32; sets.parent.len()];
    let mut boxes: Vec<EdgeBox> = Vec::new();
    let mut labels = provisional;
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            if labels[i] == 0 {
                continue;
            }
            let root = sets.find(labels[i]) as usize;
            if compact[root] == 0 {
                boxes.push(EdgeBox {
                    label: boxes.len() as u32 + 1,
                    x_min: x,
                    y_min: y,
                    x_max: x,
                    y_max: y,
                    pixel_count: 0,
                });
                compact[root] = boxes.len() as u32;
            }
            let label = compact[root];
            labels[i] = label;
            let b = &mut boxes[label as usize - 1];
            b.x_min = b.x_min.min(x);
            b.x_max = b.x_max.max(x);
            b.y_max = y;
            b.pixel_count += 1;
        }
    }

    LabeledEdgeMap {
        width: w,
        height: h,
        labels,
        boxes,
    }
}

/// Why a filter discarded a box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RejectReason {
    AspectRatio {
        ratio: f64,
    },
    /// Inner boundary of a character: the listed box contains it and holds at
    /// most two boxes.
    InnerBoundary {
        container: u32,
    },
    /// Encloses this many boxes, so it is a frame rather than a character.
    Container {
        enclosed: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FilterOutcome {
    pub kept: Vec<EdgeBox>,
    pub rejected: Vec<(EdgeBox, RejectReason)>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AspectBounds {
    pub min: f64,
    pub max: f64,
}

impl Default for AspectBounds {
    fn default() -> Self {
        Self {
            min: 0.1,
            max: 10.0,
        }
    }
}

/// Keeps boxes with `min <= width / height <= max`.
pub fn filter_aspect_ratio(boxes: &[EdgeBox], bounds: AspectBounds) -> FilterOutcome {
    let mut out = FilterOutcome::default();
    for b in boxes {
        let ratio = b.aspect_ratio();
        if (bounds.min..=bounds.max).contains(&ratio) {
            out.kept.push(*b);
        } else {
            out.rejected.push((*b, RejectReason::AspectRatio { ratio }));
        }
    }
    out
}

/// Nested-box rule.
///
/// For every box, count the other boxes strictly inside it (at any depth).
/// One or two enclosed boxes are the inner boundaries of a character and are
/// dropped; three or more make the outer box a frame, which is dropped while
/// its contents survive. All decisions are taken against the input set in a
/// single pass, so the result does not depend on box order.
pub fn containment_filter(boxes: &[EdgeBox]) -> FilterOutcome {
    let n = boxes.len();
    // Lowest label among the small containers holding each box.
    let mut inner_of: Vec<Option<u32>> = vec![None; n];
    let mut frame_of: Vec<Option<usize>> = vec![None; n];

    // Sorting by x_min lets the scan for enclosed boxes stop early.
    let mut by_x: Vec<usize> = (0..n).collect();
    by_x.sort_by_key(|&i| (boxes[i].x_min, i));

    let mut enclosed = Vec::new();
    for (pos, &outer) in by_x.iter().enumerate() {
        let ob = &boxes[outer];
        enclosed.clear();
        for &inner in &by_x[pos + 1..] {
            let ib = &boxes[inner];
            if ib.x_min >= ob.x_max {
                break;
            }
            if ob.strictly_contains(ib) {
                enclosed.push(inner);
            }
        }
        match enclosed.len() {
            0 => {}
            1 | 2 => {
                for &i in &enclosed {
                    inner_of[i] = Some(inner_of[i].map_or(ob.label, |c| c.min(ob.label)));
                }
            }
            k => frame_of[outer] = Some(k),
        }
    }

    let reason = inner_of.into_iter().zip(frame_of).map(|(inner, frame)| {
        inner
            .map(|container| RejectReason::InnerBoundary { container })
            .or(frame.map(|enclosed| RejectReason::Container { enclosed }))
    });

    let mut out = FilterOutcome::default();
    for (b, r) in boxes.iter().zip(reason) {
        match r {
            None => out.kept.push(*b),
            Some(r) => out.rejected.push((*b, r)),
        }
    }
    out
}
