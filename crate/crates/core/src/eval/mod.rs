//! Confusion-matrix evaluation, training-curve export, and the alpha-grid
//! sweep harness.
//!
//! Metric arithmetic is exact: all derived quantities are rationals over
//! the integer counts (`accuracy * total == tp + tn` holds with no rounding),
//! converted to floating point only for display.

pub mod curves;
pub mod sweep;

use crate::dataset::Label;
use crate::error::{Error, Result};
use crate::util::font;
use crate::Scalar;
use num::rational::Ratio;
use num::{ToPrimitive, Zero};
use std::fmt::Write as _;
use std::path::Path;

/// Exact rational metric value.
pub type Exact = Ratio<u64>;

/// Binary confusion counts; the positive class is `infected`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct ConfusionMatrix {
    pub true_pos: u64,
    pub false_pos: u64,
    pub false_neg: u64,
    pub true_neg: u64,
}

impl ConfusionMatrix {
    pub fn new(true_pos: u64, false_pos: u64, false_neg: u64, true_neg: u64) -> Self {
        Self {
            true_pos,
            false_pos,
            false_neg,
            true_neg,
        }
    }

    pub fn total(&self) -> u64 {
        self.true_pos + self.false_pos + self.false_neg + self.true_neg
    }
}

/// Count predictions against ground truth at a decision threshold.
/// A probability exactly on the threshold is classified `infected`.
pub fn confusion<F: Scalar>(y_true: &[Label], y_prob: &[F], threshold: F) -> Result<ConfusionMatrix> {
    if y_true.len() != y_prob.len() {
        return Err(Error::Input(format!(
            "label/probability length mismatch: {} vs {}",
            y_true.len(),
            y_prob.len()
        )));
    }
    if y_true.is_empty() {
        return Err(Error::Input("confusion requires at least one sample".into()));
    }
    let mut cm = ConfusionMatrix::new(0, 0, 0, 0);
    for (label, &p) in y_true.iter().zip(y_prob) {
        if !(p >= F::zero() && p <= F::one()) {
            return Err(Error::Input(format!("probability {p} outside [0, 1]")));
        }
        let predicted_infected = p >= threshold;
        match (label, predicted_infected) {
            (Label::Infected, true) => cm.true_pos += 1,
            (Label::Infected, false) => cm.false_neg += 1,
            (Label::Notinfected, true) => cm.false_pos += 1,
            (Label::Notinfected, false) => cm.true_neg += 1,
        }
    }
    Ok(cm)
}

/// Per-class precision/recall/F1 as exact rationals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassMetrics {
    pub precision: Exact,
    pub recall: Exact,
    pub f1: Exact,
    pub support: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MetricsReport {
    pub accuracy: Exact,
    pub infected: ClassMetrics,
    pub notinfected: ClassMetrics,
    pub macro_f1: Exact,
    /// Notes about degenerate (zero-denominator) metrics reported as 0.
    pub annotations: Vec<String>,
}

fn ratio_or_zero(num: u64, den: u64, what: &str, notes: &mut Vec<String>) -> Exact {
    if den == 0 {
        notes.push(format!("{what}: denominator zero; reported as 0"));
        Exact::zero()
    } else {
        Exact::new(num, den)
    }
}

fn f1_of(p: Exact, r: Exact, what: &str, notes: &mut Vec<String>) -> Exact {
    let sum = p + r;
    if sum.is_zero() {
        notes.push(format!("{what}: precision + recall is 0; reported as 0"));
        Exact::zero()
    } else {
        Exact::from_integer(2) * p * r / sum
    }
}

/// Derive accuracy, per-class precision/recall/F1, and macro F1 from counts.
pub fn metrics(cm: &ConfusionMatrix) -> Result<MetricsReport> {
    let total = cm.total();
    if total == 0 {
        return Err(Error::Input("confusion matrix has zero total".into()));
    }
    let mut notes = Vec::new();

    let accuracy = Exact::new(cm.true_pos + cm.true_neg, total);

    let inf_precision = ratio_or_zero(
        cm.true_pos,
        cm.true_pos + cm.false_pos,
        "infected precision",
        &mut notes,
    );
    let inf_recall = ratio_or_zero(
        cm.true_pos,
        cm.true_pos + cm.false_neg,
        "infected recall",
        &mut notes,
    );
    let inf_f1 = f1_of(inf_precision, inf_recall, "infected f1", &mut notes);

    // For the negative class, the roles of the counts swap.
    let not_precision = ratio_or_zero(
        cm.true_neg,
        cm.true_neg + cm.false_neg,
        "notinfected precision",
        &mut notes,
    );
    let not_recall = ratio_or_zero(
        cm.true_neg,
        cm.true_neg + cm.false_pos,
        "notinfected recall",
        &mut notes,
    );
    let not_f1 = f1_of(not_precision, not_recall, "notinfected f1", &mut notes);

    let macro_f1 = (inf_f1 + not_f1) / Exact::from_integer(2);

    Ok(MetricsReport {
        accuracy,
        infected: ClassMetrics {
            precision: inf_precision,
            recall: inf_recall,
            f1: inf_f1,
            support: cm.true_pos + cm.false_neg,
        },
        notinfected: ClassMetrics {
            precision: not_precision,
            recall: not_recall,
            f1: not_f1,
            support: cm.true_neg + cm.false_pos,
        },
        macro_f1,
        annotations: notes,
    })
}

/// Exact rational to display float.
pub fn exact_to_f64(v: Exact) -> f64 {
    v.to_f64().expect("metric ratio fits f64")
}

impl MetricsReport {
    /// Structured text rendering with a stable key order.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let line = |out: &mut String, key: &str, v: Exact| {
            writeln!(out, "{key}: {:.6} ({}/{})", exact_to_f64(v), v.numer(), v.denom()).unwrap();
        };
        line(&mut out, "accuracy", self.accuracy);
        line(&mut out, "infected.precision", self.infected.precision);
        line(&mut out, "infected.recall", self.infected.recall);
        line(&mut out, "infected.f1", self.infected.f1);
        writeln!(out, "infected.support: {}", self.infected.support).unwrap();
        line(&mut out, "notinfected.precision", self.notinfected.precision);
        line(&mut out, "notinfected.recall", self.notinfected.recall);
        line(&mut out, "notinfected.f1", self.notinfected.f1);
        writeln!(out, "notinfected.support: {}", self.notinfected.support).unwrap();
        line(&mut out, "macro_f1", self.macro_f1);
        for note in &self.annotations {
            writeln!(out, "note: {note}").unwrap();
        }
        out
    }

    /// Delimited table rendering (`metric,class,value`).
    pub fn to_table(&self) -> String {
        let mut out = String::from("metric,class,value\n");
        let row = |out: &mut String, metric: &str, class: &str, v: Exact| {
            writeln!(out, "{metric},{class},{}", exact_to_f64(v)).unwrap();
        };
        row(&mut out, "accuracy", "", self.accuracy);
        row(&mut out, "precision", "infected", self.infected.precision);
        row(&mut out, "recall", "infected", self.infected.recall);
        row(&mut out, "f1", "infected", self.infected.f1);
        writeln!(out, "support,infected,{}", self.infected.support).unwrap();
        row(&mut out, "precision", "notinfected", self.notinfected.precision);
        row(&mut out, "recall", "notinfected", self.notinfected.recall);
        row(&mut out, "f1", "notinfected", self.notinfected.f1);
        writeln!(out, "support,notinfected,{}", self.notinfected.support).unwrap();
        row(&mut out, "macro_f1", "", self.macro_f1);
        out
    }
}

/// Render the confusion matrix as a labeled 2x2 heatmap PNG.
pub fn render_confusion_png(cm: &ConfusionMatrix, path: &Path) -> Result<()> {
    const CELL: u32 = 140;
    const LEFT: u32 = 110;
    const TOP: u32 = 60;
    let width = LEFT + 2 * CELL + 20;
    let height = TOP + 2 * CELL + 20;
    let mut img = image::RgbImage::from_pixel(width, height, image::Rgb([255, 255, 255]));

    let counts = [
        [cm.true_pos, cm.false_neg],
        [cm.false_pos, cm.true_neg],
    ];
    let max = counts.iter().flatten().copied().max().unwrap_or(0).max(1);

    for (r, row) in counts.iter().enumerate() {
        for (c, &v) in row.iter().enumerate() {
            let x0 = LEFT + c as u32 * CELL;
            let y0 = TOP + r as u32 * CELL;
            let intensity = v as f64 / max as f64;
            // white -> blue ramp
            let shade = |base: u8| (255.0 - intensity * (255.0 - base as f64)).round() as u8;
            let color = image::Rgb([shade(30), shade(90), shade(160)]);
            for y in y0..y0 + CELL {
                for x in x0..x0 + CELL {
                    img.put_pixel(x, y, color);
                }
            }
            let text = v.to_string();
            let tw = font::text_width(&text, 2) as i64;
            let text_color = if intensity > 0.5 { [255, 255, 255] } else { [20, 20, 20] };
            font::draw_text(
                &mut img,
                x0 as i64 + (CELL as i64 - tw) / 2,
                y0 as i64 + CELL as i64 / 2 - 7,
                &text,
                2,
                text_color,
            );
        }
    }

    // cell borders
    for i in 0..=2u32 {
        let x = LEFT + i * CELL;
        for y in TOP..=TOP + 2 * CELL {
            img.put_pixel(x, y, image::Rgb([60, 60, 60]));
        }
        let y = TOP + i * CELL;
        for x in LEFT..=LEFT + 2 * CELL {
            img.put_pixel(x, y, image::Rgb([60, 60, 60]));
        }
    }

    let axis = [20, 20, 20];
    font::draw_text(&mut img, LEFT as i64, 8, "predicted", 1, axis);
    font::draw_text(&mut img, (LEFT + CELL / 2 - 30) as i64, 30, "infected", 1, axis);
    font::draw_text(&mut img, (LEFT + CELL + CELL / 2 - 40) as i64, 30, "notinfected", 1, axis);
    font::draw_text(&mut img, 4, (TOP - 20) as i64, "true", 1, axis);
    font::draw_text(&mut img, 4, (TOP + CELL / 2) as i64, "infected", 1, axis);
    font::draw_text(&mut img, 4, (TOP + CELL + CELL / 2) as i64, "notinfected", 1, axis);

    crate::util::save_png(&img, path)
}
