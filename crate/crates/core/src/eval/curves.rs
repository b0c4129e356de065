//! Training-curve export: accuracy and loss plots plus the raw table.

use crate::error::{Error, Result};
use crate::model::train::{TrainingHistory, HISTORY_HEADER};
use crate::util::plot::{LineChart, Series, SERIES_COLORS};
use crate::util::save_png;
use std::path::{Path, PathBuf};

pub struct CurveArtifacts {
    pub accuracy_png: PathBuf,
    pub loss_png: PathBuf,
    pub table_csv: PathBuf,
}

/// Write `accuracy.png`, `loss.png`, and `history.csv` into `out_dir`.
/// Filenames are fixed and the renderer embeds no timestamps, so repeated
/// exports of the same history are byte-identical.
pub fn export_curves(history: &TrainingHistory, out_dir: &Path) -> Result<CurveArtifacts> {
    if history.epochs.is_empty() {
        return Err(Error::Input("cannot export an empty training history".into()));
    }
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;

    let series = |f: &dyn Fn(&crate::model::EpochRecord) -> f64| -> Vec<(f64, f64)> {
        history
            .epochs
            .iter()
            .map(|r| (r.epoch as f64, f(r)))
            .collect()
    };

    let accuracy_chart = LineChart {
        title: "accuracy".into(),
        x_label: "epoch".into(),
        y_label: "accuracy".into(),
        series: vec![
            Series {
                label: "train".into(),
                color: SERIES_COLORS[0],
                points: series(&|r| r.train_accuracy),
            },
            Series {
                label: "val".into(),
                color: SERIES_COLORS[1],
                points: series(&|r| r.val_accuracy),
            },
        ],
    };
    let loss_chart = LineChart {
        title: "loss".into(),
        x_label: "epoch".into(),
        y_label: "loss".into(),
        series: vec![
            Series {
                label: "train".into(),
                color: SERIES_COLORS[0],
                points: series(&|r| r.train_loss),
            },
            Series {
                label: "val".into(),
                color: SERIES_COLORS[1],
                points: series(&|r| r.val_loss),
            },
        ],
    };

    let accuracy_png = out_dir.join("accuracy.png");
    let loss_png = out_dir.join("loss.png");
    let table_csv = out_dir.join("history.csv");
    save_png(&accuracy_chart.render(), &accuracy_png)?;
    save_png(&loss_chart.render(), &loss_png)?;
    std::fs::write(&table_csv, history.to_csv()).map_err(|e| Error::io(&table_csv, e))?;

    Ok(CurveArtifacts {
        accuracy_png,
        loss_png,
        table_csv,
    })
}

/// Re-parse a written history table.
pub fn read_history_table(path: &Path) -> Result<TrainingHistory> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let _ = HISTORY_HEADER; // format documented next to the writer
    TrainingHistory::parse_csv(&text)
}
