//! The fixed synthetic benchmark corpus and per-method scoring over a directory.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use thiserror::Error;

use crate::config::PipelineConfig;
use crate::metrics::{evaluate, DimensionMismatch};
use crate::pipeline::Method;
use crate::pnm::{self, PnmError};
use crate::synth::{generate, Polarity, StripeAngle, SynthError, SynthSpec, TextItem, Texture};

pub const CORPUS_SEED: u64 = 42;
pub const CORPUS_SIZE: usize = 256;

#[derive(Debug, Error)]
pub enum CompareError {
    #[error("{0}: {1}")]
    Image(PathBuf, PnmError),
    #[error("{0}: {1}")]
    Dimensions(PathBuf, DimensionMismatch),
    #[error("{0}: {1}")]
    Synth(PathBuf, SynthError),
    #[error("no *.pgm images with matching *.truth.pbm in {0}")]
    EmptyCorpus(PathBuf),
    #[error("cannot read directory {0}: {1}")]
    Dir(PathBuf, std::io::Error),
    #[error("{0}: method {1} failed: {2}")]
    Method(PathBuf, Method, String),
}

impl CompareError {
    pub fn is_io(&self) -> bool {
        match self {
            CompareError::Dir(..) => true,
            CompareError::Image(_, e) => e.is_io(),
            _ => false,
        }
    }
}

fn textures() -> [(&'static str, Texture); 4] {
    [
        ("constant", Texture::Constant { level: 128 }),
        (
            "stripes",
            Texture::Stripes {
                period: 2,
                angle: StripeAngle::Deg90,
                low: 100,
                high: 160,
            },
        ),
        (
            "checker",
            Texture::Checkerboard {
                period: 4,
                low: 100,
                high: 160,
            },
        ),
        (
            "noise",
            Texture::Noise {
                level: 128,
                amplitude: 60,
            },
        ),
    ]
}

fn layout(spec: SynthSpec, variant: &str) -> SynthSpec {
    match variant {
        "dark" | "light" => {
            let p = if variant == "dark" {
                Polarity::DarkOnLight
            } else {
                Polarity::LightOnDark
            };
            spec.with_text(TextItem::new("SLIDING", 24, 24, 28, p))
                .with_text(TextItem::new("WINDOW 42", 24, 80, 28, p))
                .with_text(TextItem::new("TEXT BIN", 24, 136, 28, p))
                .with_text(TextItem::new("ONE.SIZE", 24, 192, 28, p))
        }
        _ => spec
            .with_text(TextItem::new("HEADLINE", 8, 16, 35, Polarity::DarkOnLight))
            .with_text(TextItem::new(
                "SMALL TEXT 07",
                8,
                76,
                21,
                Polarity::DarkOnLight,
            ))
            .with_text(TextItem::new("BIG 2", 8, 120, 35, Polarity::DarkOnLight))
            .with_text(TextItem::new(
                "MIXED SIZE 9",
                8,
                184,
                21,
                Polarity::DarkOnLight,
            )),
    }
}

/// The twelve benchmark specs, named `texture_variant`, in name order.
pub fn acceptance_corpus() -> Vec<(String, SynthSpec)> {
    let mut out = Vec::new();
    for (tname, texture) in textures() {
        for variant in ["dark", "light", "mixed"] {
            let spec = SynthSpec::new(CORPUS_SIZE, CORPUS_SIZE, texture, CORPUS_SEED);
            out.push((format!("{tname}_{variant}"), layout(spec, variant)));
        }
    }
    out.sort_by(|a, b| a.0.cmp(&b.0));
    out
}

/// Writes `NAME.pgm`, `NAME.truth.pbm` and `NAME.spec` for each entry.
pub fn write_corpus(dir: &Path, corpus: &[(String, SynthSpec)]) -> Result<(), CompareError> {
    std::fs::create_dir_all(dir).map_err(|e| CompareError::Dir(dir.to_path_buf(), e))?;
    for (name, spec) in corpus {
        let pgm = dir.join(format!("{name}.pgm"));
        let (img, truth) = generate(spec).map_err(|e| CompareError::Synth(pgm.clone(), e))?;
        pnm::write_gray(&img, &pgm).map_err(|e| CompareError::Image(pgm.clone(), e))?;
        let pbm = dir.join(format!("{name}.truth.pbm"));
        pnm::write_binary(&truth, &pbm).map_err(|e| CompareError::Image(pbm, e))?;
        let sp = dir.join(format!("{name}.spec"));
        std::fs::write(&sp, spec.to_kv()).map_err(|e| CompareError::Image(sp, e.into()))?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareRow {
    pub image: String,
    pub method: Method,
    pub precision: f64,
    pub recall: f64,
    pub f_measure: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    /// Sorted by image name, then method.
    pub rows: Vec<CompareRow>,
}

impl Comparison {
    pub fn rows_for(&self, method: Method) -> impl Iterator<Item = &CompareRow> {
        self.rows.iter().filter(move |r| r.method == method)
    }

    pub fn row(&self, image: &str, method: Method) -> Option<&CompareRow> {
        self.rows
            .iter()
            .find(|r| r.image == image && r.method == method)
    }

    /// Mean precision, recall and F of one method over all images.
    pub fn mean(&self, method: Method) -> CompareRow {
        let rows: Vec<_> = self.rows_for(method).collect();
        let n = rows.len().max(1) as f64;
        CompareRow {
            image: "mean".into(),
            method,
            precision: rows.iter().map(|r| r.precision).sum::<f64>() / n,
            recall: rows.iter().map(|r| r.recall).sum::<f64>() / n,
            f_measure: rows.iter().map(|r| r.f_measure).sum::<f64>() / n,
        }
    }

    fn all_rows(&self) -> impl Iterator<Item = CompareRow> + '_ {
        self.rows
            .iter()
            .cloned()
            .chain(Method::ALL.into_iter().map(|m| self.mean(m)))
    }

    /// One row per image and method, then one `mean` row per method.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("image,method,precision,recall,f_measure\n");
        for r in self.all_rows() {
            let _ = writeln!(
                s,
                "{},{},{:.6},{:.6},{:.6}",
                r.image, r.method, r.precision, r.recall, r.f_measure
            );
        }
        s
    }

    pub fn to_table(&self) -> String {
        let width = self
            .rows
            .iter()
            .map(|r| r.image.len())
            .max()
            .unwrap_or(0)
            .max(5);
        let mut s = format!(
            "{:<width$}  {:<8}  {:>9}  {:>9}  {:>9}\n",
            "image", "method", "precision", "recall", "f_measure"
        );
        for r in self.all_rows() {
            let _ = writeln!(
                s,
                "{:<width$}  {:<8}  {:>9.3}  {:>9.3}  {:>9.3}",
                r.image,
                r.method.name(),
                r.precision,
                r.recall,
                r.f_measure
            );
        }
        s
    }
}

/// `(name, image path, truth path)` for every `NAME.pgm` with a `NAME.truth.pbm`.
pub fn corpus_entries(dir: &Path) -> Result<Vec<(String, PathBuf, PathBuf)>, CompareError> {
    let read = std::fs::read_dir(dir).map_err(|e| CompareError::Dir(dir.to_path_buf(), e))?;
    let mut out = Vec::new();
    for entry in read {
        let path = entry
            .map_err(|e| CompareError::Dir(dir.to_path_buf(), e))?
            .path();
        let Some(file) = path.file_name().and_then(|f| f.to_str()) else {
            continue;
        };
        let Some(name) = file.strip_suffix(".pgm") else {
            continue;
        };
        let truth = dir.join(format!("{name}.truth.pbm"));
        if truth.is_file() {
            out.push((name.to_string(), path.clone(), truth));
        }
    }
    out.sort();
    Ok(out)
}

pub fn compare_dir(
    dir: &Path,
    cfg: &PipelineConfig,
    methods: &[Method],
) -> Result<Comparison, CompareError> {
    let entries = corpus_entries(dir)?;
    if entries.is_empty() {
        return Err(CompareError::EmptyCorpus(dir.to_path_buf()));
    }
    let per_image: Vec<Vec<CompareRow>> = entries
        .par_iter()
        .map(|(name, img_path, truth_path)| {
            let img = pnm::read_image(img_path)
                .map_err(|e| CompareError::Image(img_path.clone(), e))?
                .to_gray();
            let truth = match pnm::read_image(truth_path)
                .map_err(|e| CompareError::Image(truth_path.clone(), e))?
            {
                pnm::PnmImage::Binary(b) => b,
                _ => {
                    return Err(CompareError::Image(
                        truth_path.clone(),
                        PnmError::MalformedHeader("ground truth must be a PBM".into()),
                    ))
                }
            };
            methods
                .iter()
                .map(|&m| {
                    let pred = m
                        .run(&img, cfg)
                        .map_err(|e| CompareError::Method(img_path.clone(), m, e.to_string()))?;
                    let r = evaluate(&pred, &truth)
                        .map_err(|e| CompareError::Dimensions(img_path.clone(), e))?;
                    Ok(CompareRow {
                        image: name.clone(),
                        method: m,
                        precision: r.precision,
                        recall: r.recall,
                        f_measure: r.f_measure,
                    })
                })
                .collect()
        })
        .collect::<Result<_, _>>()?;
    let mut rows: Vec<CompareRow> = per_image.into_iter().flatten().collect();
    rows.sort_by(|a, b| a.image.cmp(&b.image).then(a.method.cmp(&b.method)));
    Ok(Comparison { rows })
}
