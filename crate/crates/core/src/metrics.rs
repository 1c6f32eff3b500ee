//! Pixel-level precision, recall and F-measure against a ground-truth mask.

use std::fmt;

use thiserror::Error;

use crate::image::BinaryImage;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error(
    "prediction is {pred_width}x{pred_height} but ground truth is {truth_width}x{truth_height}"
)]
pub struct DimensionMismatch {
    pub pred_width: usize,
    pub pred_height: usize,
    pub truth_width: usize,
    pub truth_height: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalReport {
    pub true_positive: usize,
    pub false_positive: usize,
    pub false_negative: usize,
    pub precision: f64,
    pub recall: f64,
    pub f_measure: f64,
}

/// `hits / (hits + misses)`; an empty denominator scores 1 only when the other
/// side is empty too.
fn ratio(hits: usize, misses: usize, other_misses: usize) -> f64 {
    match hits + misses {
        0 if other_misses == 0 => 1.0,
        0 => 0.0,
        d => hits as f64 / d as f64,
    }
}

pub fn evaluate(pred: &BinaryImage, truth: &BinaryImage) -> Result<EvalReport, DimensionMismatch> {
    if (pred.width(), pred.height()) != (truth.width(), truth.height()) {
        return Err(DimensionMismatch {
            pred_width: pred.width(),
            pred_height: pred.height(),
            truth_width: truth.width(),
            truth_height: truth.height(),
        });
    }
    let (mut tp, mut fp, mut fneg) = (0, 0, 0);
    for (&p, &t) in pred.data().iter().zip(truth.data()) {
        match (p, t) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fneg += 1,
            (false, false) => {}
        }
    }
    let precision = ratio(tp, fp, fneg);
    let recall = ratio(tp, fneg, fp);
    let f_measure = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    Ok(EvalReport {
        true_positive: tp,
        false_positive: fp,
        false_negative: fneg,
        precision,
        recall,
        f_measure,
    })
}

impl fmt::Display for EvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "true_positive = {}", self.true_positive)?;
        writeln!(f, "false_positive = {}", self.false_positive)?;
        writeln!(f, "false_negative = {}", self.false_negative)?;
        writeln!(f, "precision = {:.3}", self.precision)?;
        writeln!(f, "recall = {:.3}", self.recall)?;
        write!(f, "f_measure = {:.3}", self.f_measure)
    }
}
