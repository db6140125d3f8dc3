//! Artifact writers. Numbers use the same 9-significant-digit form as the
//! loss curves.

use std::path::Path;

use swag_core::training::{format_sig, TrainReport};
use swag_core::Matrix;

use crate::error::CliResult;

pub fn write_file(path: &Path, bytes: &[u8]) -> CliResult<()> {
    std::fs::write(path, bytes).map_err(|source| {
        swag_core::Error::Io {
            path: path.to_owned(),
            source,
        }
        .into()
    })
}

pub fn create_dir(dir: &Path) -> CliResult<()> {
    std::fs::create_dir_all(dir).map_err(|source| {
        swag_core::Error::Io {
            path: dir.to_owned(),
            source,
        }
        .into()
    })
}

/// `x,y_true,y_pred` for a scalar model, sorted by `x`.
pub fn predictions_csv(x: &Matrix, y_true: &Matrix, y_pred: &Matrix) -> String {
    let mut rows: Vec<(f64, f64, f64)> = (0..x.cols())
        .map(|c| (x.get(0, c), y_true.get(0, c), y_pred.get(0, c)))
        .collect();
    rows.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out = String::from("x,y_true,y_pred\n");
    for (x, t, p) in rows {
        out.push_str(&format!(
            "{},{},{}\n",
            format_sig(x, 9),
            format_sig(t, 9),
            format_sig(p, 9)
        ));
    }
    out
}

/// `epoch,<name>...` of training losses, one column per report.
pub fn compare_csv(names: &[&str], reports: &[TrainReport]) -> String {
    let mut out = String::from("epoch");
    for name in names {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    let epochs = reports.iter().map(|r| r.records.len()).max().unwrap_or(0);
    for e in 0..epochs {
        out.push_str(&(e + 1).to_string());
        for r in reports {
            out.push(',');
            if let Some(rec) = r.records.get(e) {
                out.push_str(&format_sig(rec.train_loss, 9));
            }
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use swag_core::training::EpochRecord;

    #[test]
    fn predictions_are_sorted() {
        let x = Matrix::row_vector(&[0.5, 0.25]);
        let t = Matrix::row_vector(&[1.0, 2.0]);
        let p = Matrix::row_vector(&[3.0, 4.0]);
        assert_eq!(
            predictions_csv(&x, &t, &p),
            "x,y_true,y_pred\n0.25,2,4\n0.5,1,3\n"
        );
    }

    #[test]
    fn compare_columns() {
        let report = |losses: &[f64]| TrainReport {
            config_name: "m".into(),
            seed: 0,
            wall_seconds: 0.0,
            records: losses
                .iter()
                .enumerate()
                .map(|(i, &l)| EpochRecord {
                    epoch: i + 1,
                    train_loss: l,
                    test_loss: l,
                    test_accuracy: None,
                })
                .collect(),
            classification: false,
        };
        let csv = compare_csv(&["a", "b"], &[report(&[1.0, 0.5]), report(&[2.0, 1.5])]);
        assert_eq!(csv, "epoch,a,b\n1,1,2\n2,0.5,1.5\n");
    }
}
