use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphbuild::Label;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub loss_total: f64,
    pub loss_l1: f64,
    pub loss_l2: f64,
    pub loss_l3: f64,
    pub val_f1: f64,
}

/// One node's embedding at one epoch.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotRecord {
    pub epoch: usize,
    pub node_id: usize,
    pub label: Label,
    pub coords: Vec<f64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainTrace {
    pub epochs: Vec<EpochRecord>,
    pub best_epoch: usize,
    pub snapshots: Vec<SnapshotRecord>,
}

impl TrainTrace {
    pub fn last_epoch(&self) -> Option<usize> {
        self.epochs.last().map(|r| r.epoch)
    }

    pub fn best(&self) -> Option<&EpochRecord> {
        self.epochs.iter().find(|r| r.epoch == self.best_epoch)
    }

    /// Distinct snapshot epochs in ascending order.
    pub fn snapshot_epochs(&self) -> Vec<usize> {
        let mut epochs: Vec<usize> = self.snapshots.iter().map(|s| s.epoch).collect();
        epochs.dedup();
        epochs
    }

    /// `epoch,loss_total,loss_l1,loss_l2,loss_l3,val_f1`
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = String::from("epoch,loss_total,loss_l1,loss_l2,loss_l3,val_f1\n");
        for r in &self.epochs {
            out.push_str(&format!(
                "{},{:?},{:?},{:?},{:?},{:?}\n",
                r.epoch, r.loss_total, r.loss_l1, r.loss_l2, r.loss_l3, r.val_f1
            ));
        }
        write_file(path, out.as_bytes())
    }

    /// `epoch,node_id,label,x,y[,z]`; label is 1 for interest, 0 otherwise.
    pub fn write_snapshots_csv(&self, path: &Path) -> Result<()> {
        let dim = self.snapshots.first().map_or(2, |s| s.coords.len());
        let mut out = String::from("epoch,node_id,label");
        for axis in ["x", "y", "z"].iter().take(dim.max(2)) {
            out.push(',');
            out.push_str(axis);
        }
        out.push('\n');
        for s in &self.snapshots {
            out.push_str(&format!("{},{},{}", s.epoch, s.node_id, s.label.code()));
            for c in &s.coords {
                out.push_str(&format!(",{c:?}"));
            }
            out.push('\n');
        }
        write_file(path, out.as_bytes())
    }
}

pub(crate) fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(bytes).map_err(|e| Error::io(path, e))
}

/// Reads a snapshot CSV written by [`TrainTrace::write_snapshots_csv`].
pub fn read_snapshots_csv(path: &Path) -> Result<Vec<SnapshotRecord>> {
    let parse_err = |row: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        row,
        message,
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| parse_err(0, e.to_string()))?;
    let header = reader.headers().map_err(|e| parse_err(1, e.to_string()))?.clone();
    let expected = ["epoch", "node_id", "label", "x", "y"];
    if header.len() < 5 || header.len() > 6 || header.iter().zip(expected).any(|(h, e)| h != e) {
        return Err(parse_err(1, "expected header epoch,node_id,label,x,y[,z]".into()));
    }
    let mut out = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| parse_err(0, e.to_string()))?;
        let row = record.position().map_or(0, |p| p.line() as usize);
        let int = |i: usize| {
            record[i]
                .trim()
                .parse::<usize>()
                .map_err(|_| parse_err(row, format!("bad integer `{}`", &record[i])))
        };
        let label =
            Label::from_code(&record[2]).ok_or_else(|| parse_err(row, format!("bad label `{}`", &record[2])))?;
        let coords = (3..record.len())
            .map(|i| {
                record[i]
                    .trim()
                    .parse::<f64>()
                    .map_err(|_| parse_err(row, format!("bad coordinate `{}`", &record[i])))
            })
            .collect::<Result<Vec<_>>>()?;
        out.push(SnapshotRecord {
            epoch: int(0)?,
            node_id: int(1)?,
            label,
            coords,
        });
    }
    Ok(out)
}
