//! The full sliding-window binarization chain and its per-stage report.

use std::fmt::{self, Write as _};
use std::path::Path;
use std::str::FromStr;

use crate::baselines::{niblack_binarize, otsu_binarize, BaselineError};
use crate::config::PipelineConfig;
use crate::edge_boxes::{containment_filter, filter_aspect_ratio, label_components, EdgeBox};
use crate::edge_detect::{extract_edges_traced, StructuringElement};
use crate::image::{BinaryImage, ColorImage, GrayImage};
use crate::pnm::{self, PnmError, PnmImage};
use crate::preprocess::preprocess_traced;
use crate::sliding::{apply_size_threshold, render_binary, uniformity_threshold};

/// Counts and thresholds recorded while running the pipeline.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct StageReport {
    pub width: usize,
    pub height: usize,
    pub entropy: f64,
    pub contrast_enhanced: bool,
    pub extension_applied: bool,
    pub edge_threshold: f64,
    pub threshold_iterations: usize,
    pub foreground_inverted: bool,
    pub edge_pixels: usize,
    pub boxes_labeled: usize,
    pub boxes_after_aspect: usize,
    pub boxes_after_containment: usize,
    pub valid_windows: usize,
    pub size_threshold: f64,
    pub boxes_retained: usize,
    pub boxes_removed_by_size: usize,
    pub polarity_ties: usize,
    pub foreground_pixels: usize,
}

impl fmt::Display for StageReport {
    /// One `key = value` line per field.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "width = {}", self.width)?;
        writeln!(f, "height = {}", self.height)?;
        writeln!(f, "entropy = {:.6}", self.entropy)?;
        writeln!(f, "contrast_enhanced = {}", self.contrast_enhanced)?;
        writeln!(f, "extension_applied = {}", self.extension_applied)?;
        writeln!(f, "edge_threshold = {:.6}", self.edge_threshold)?;
        writeln!(f, "threshold_iterations = {}", self.threshold_iterations)?;
        writeln!(f, "foreground_inverted = {}", self.foreground_inverted)?;
        writeln!(f, "edge_pixels = {}", self.edge_pixels)?;
        writeln!(f, "boxes_labeled = {}", self.boxes_labeled)?;
        writeln!(f, "boxes_after_aspect = {}", self.boxes_after_aspect)?;
        writeln!(
            f,
            "boxes_after_containment = {}",
            self.boxes_after_containment
        )?;
        writeln!(f, "valid_windows = {}", self.valid_windows)?;
        writeln!(f, "size_threshold = {}", self.size_threshold)?;
        writeln!(f, "boxes_retained = {}", self.boxes_retained)?;
        writeln!(f, "boxes_removed_by_size = {}", self.boxes_removed_by_size)?;
        writeln!(f, "polarity_ties = {}", self.polarity_ties)?;
        writeln!(f, "foreground_pixels = {}", self.foreground_pixels)
    }
}

/// A full-size intermediate image.
#[derive(Debug, Clone)]
pub enum StageImage {
    Gray(GrayImage),
    Binary(BinaryImage),
}

#[derive(Debug, Clone)]
pub struct Stage {
    pub name: &'static str,
    pub image: StageImage,
}

impl Stage {
    /// `NN_name.pgm` or `NN_name.pbm`, numbered from 1 in pipeline order.
    pub fn file_name(&self, index: usize) -> String {
        let ext = match self.image {
            StageImage::Gray(_) => "pgm",
            StageImage::Binary(_) => "pbm",
        };
        format!("{:02}_{}.{ext}", index + 1, self.name)
    }
}

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub binary: BinaryImage,
    pub report: StageReport,
    pub stages: Vec<Stage>,
    /// Boxes that survived every filter, with their labels from the edge map.
    pub retained: Vec<EdgeBox>,
}

impl PipelineOutput {
    /// Writes every stage image plus `report.txt` and `boxes.txt` into `dir`.
    pub fn dump(&self, dir: &Path) -> Result<(), PnmError> {
        std::fs::create_dir_all(dir)?;
        for (i, stage) in self.stages.iter().enumerate() {
            let path = dir.join(stage.file_name(i));
            match &stage.image {
                StageImage::Gray(g) => pnm::write_gray(g, path)?,
                StageImage::Binary(b) => pnm::write_binary(b, path)?,
            }
        }
        std::fs::write(dir.join("report.txt"), self.report.to_string())?;
        let mut boxes = String::new();
        for b in &self.retained {
            let _ = writeln!(boxes, "{b}");
        }
        std::fs::write(dir.join("boxes.txt"), boxes)?;
        Ok(())
    }
}

/// Edge map in gray with retained box outlines in white.
fn draw_boxes(edges: &BinaryImage, boxes: &[EdgeBox]) -> GrayImage {
    let mut data: Vec<u8> = edges
        .data()
        .iter()
        .map(|&e| if e { 128 } else { 0 })
        .collect();
    let w = edges.width();
    for b in boxes {
        for x in b.x_min..=b.x_max {
            data[b.y_min * w + x] = 255;
            data[b.y_max * w + x] = 255;
        }
        for y in b.y_min..=b.y_max {
            data[y * w + b.x_min] = 255;
            data[y * w + b.x_max] = 255;
        }
    }
    GrayImage::new(w, edges.height(), data).expect("same dimensions")
}

pub fn binarize_pipeline(img: &GrayImage, cfg: &PipelineConfig) -> PipelineOutput {
    let mut report = StageReport {
        width: img.width(),
        height: img.height(),
        ..Default::default()
    };
    let mut stages = vec![Stage {
        name: "gray",
        image: StageImage::Gray(img.clone()),
    }];

    let pre = preprocess_traced(img, &cfg.preprocess);
    report.entropy = pre.entropy;
    report.contrast_enhanced = pre.contrast_enhanced;
    report.extension_applied = pre.extension_applied;

    let edge = extract_edges_traced(
        &pre.extended,
        &cfg.threshold,
        &StructuringElement::default(),
    );
    report.edge_threshold = edge.threshold.threshold;
    report.threshold_iterations = edge.threshold.iterations;
    report.foreground_inverted = edge.inverted;
    report.edge_pixels = edge.edges.count_foreground();

    let labeled = label_components(&edge.edges);
    report.boxes_labeled = labeled.boxes.len();

    let aspect = filter_aspect_ratio(&labeled.boxes, cfg.aspect);
    report.boxes_after_aspect = aspect.kept.len();

    let candidates = if cfg.containment_filter {
        containment_filter(&aspect.kept).kept
    } else {
        aspect.kept
    };
    report.boxes_after_containment = candidates.len();

    let sizes: Vec<f64> = candidates.iter().map(|b| cfg.size_metric.of(b)).collect();
    let (retained, removed) = match uniformity_threshold(&sizes, cfg.size_tolerance) {
        Ok(u) => {
            report.valid_windows = u.valid_windows().count();
            report.size_threshold = u.t_s;
            apply_size_threshold(&candidates, u.t_s, cfg.size_metric)
        }
        // No boxes survived the filters.
        Err(_) => (Vec::new(), Vec::new()),
    };
    report.boxes_retained = retained.len();
    report.boxes_removed_by_size = removed.len();

    let rendered = render_binary(&edge.global, &retained);
    report.polarity_ties = rendered.polarities.iter().filter(|p| p.tie).count();
    report.foreground_pixels = rendered.image.count_foreground();

    stages.extend([
        Stage {
            name: "contrast",
            image: StageImage::Gray(pre.contrast),
        },
        Stage {
            name: "smoothed",
            image: StageImage::Gray(pre.smoothed),
        },
        Stage {
            name: "extended",
            image: StageImage::Gray(pre.extended),
        },
        Stage {
            name: "threshold",
            image: StageImage::Binary(edge.global),
        },
        Stage {
            name: "edges",
            image: StageImage::Binary(edge.edges.clone()),
        },
        Stage {
            name: "boxes",
            image: StageImage::Gray(draw_boxes(&edge.edges, &retained)),
        },
        Stage {
            name: "binary",
            image: StageImage::Binary(rendered.image.clone()),
        },
    ]);

    PipelineOutput {
        binary: rendered.image,
        report,
        stages,
        retained,
    }
}

pub fn binarize_color(img: &ColorImage, cfg: &PipelineConfig) -> PipelineOutput {
    binarize_pipeline(&img.to_grayscale(), cfg)
}

/// Binarization method selectable from the command line and in comparisons.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Sliding,
    Otsu,
    Niblack,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Sliding, Method::Otsu, Method::Niblack];

    pub fn name(self) -> &'static str {
        match self {
            Method::Sliding => "sliding",
            Method::Otsu => "otsu",
            Method::Niblack => "niblack",
        }
    }

    pub fn run(self, img: &GrayImage, cfg: &PipelineConfig) -> Result<BinaryImage, BaselineError> {
        match self {
            Method::Sliding => Ok(binarize_pipeline(img, cfg).binary),
            Method::Otsu => Ok(otsu_binarize(img)),
            Method::Niblack => niblack_binarize(img, &cfg.niblack),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| format!("unknown method {s:?}"))
    }
}

/// Grayscale input from any decoded NetPBM image.
pub fn input_gray(img: &PnmImage) -> GrayImage {
    img.to_gray()
}
