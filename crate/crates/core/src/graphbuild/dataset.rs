use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numcore::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Label {
    Interest,
    NonInterest,
}

impl Label {
    /// CSV encoding: 1 = interest, 0 = non-interest.
    pub fn code(self) -> u8 {
        match self {
            Label::Interest => 1,
            Label::NonInterest => 0,
        }
    }

    pub fn from_code(code: &str) -> Option<Label> {
        match code.trim() {
            "1" => Some(Label::Interest),
            "0" => Some(Label::NonInterest),
            _ => None,
        }
    }

    pub fn is_interest(self) -> bool {
        self == Label::Interest
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Label::Interest => "interest",
            Label::NonInterest => "non-interest",
        })
    }
}

/// Node features plus one label per node.
#[derive(Debug, Clone)]
pub struct Dataset {
    name: String,
    features: Matrix,
    labels: Vec<Label>,
}

impl Dataset {
    /// Validates shapes and rejects rows that are non-finite or all-zero
    /// (cosine similarity is undefined for those).
    pub fn new(name: impl Into<String>, features: Matrix, labels: Vec<Label>) -> Result<Self> {
        if features.rows() < 2 {
            return Err(Error::param(format!(
                "a dataset needs at least 2 nodes, got {}",
                features.rows()
            )));
        }
        if labels.len() != features.rows() {
            return Err(Error::Dimension {
                op: "dataset labels",
                left: features.shape(),
                right: (labels.len(), 1),
            });
        }
        for i in 0..features.rows() {
            let row = features.row(i);
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::param(format!("node {i} has a non-finite feature")));
            }
            if row.iter().all(|&v| v == 0.0) {
                return Err(Error::param(format!("node {i} has an all-zero feature row")));
            }
        }
        Ok(Dataset {
            name: name.into(),
            features,
            labels,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn features(&self) -> &Matrix {
        &self.features
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn nodes_with(&self, label: Label) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.labels[i] == label).collect()
    }

    /// Writes the dataset in the CSV layout accepted by [`load_dataset`].
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
        let mut header: Vec<String> = (0..self.features.cols()).map(|j| format!("f{j}")).collect();
        header.push("label".into());
        w.write_record(&header).map_err(|e| csv_error(path, e))?;
        for i in 0..self.len() {
            let mut record: Vec<String> = self.features.row(i).iter().map(|v| format!("{v:?}")).collect();
            record.push(self.labels[i].code().to_string());
            w.write_record(&record).map_err(|e| csv_error(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    let row = e.position().map_or(0, |p| p.line() as usize);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Parse {
            path: path.to_path_buf(),
            row,
            message: format!("{other:?}"),
        },
    }
}

/// Reads a dataset CSV: a header row, numeric feature columns, and a final
/// `label` column holding 1 (interest) or 0 (non-interest).
///
/// Row numbers in errors are 1-based file lines, so the first data row is 2.
pub fn load_dataset(path: &Path) -> Result<Dataset> {
    let parse_err = |row: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        row,
        message,
    };

    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;

    let header = reader.headers().map_err(|e| csv_error(path, e))?.clone();
    if header.is_empty() || header.iter().all(|h| h.trim().is_empty()) {
        return Err(parse_err(1, "empty file: missing header row".into()));
    }
    if header.iter().next_back().map(str::trim) != Some("label") {
        return Err(parse_err(1, "missing `label` column (must be the last column)".into()));
    }
    let width = header.len();
    if width < 2 {
        return Err(parse_err(1, "no feature columns".into()));
    }

    let mut data = Vec::new();
    let mut labels = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let row = record.position().map_or(0, |p| p.line() as usize);
        if record.len() != width {
            return Err(parse_err(
                row,
                format!("expected {width} fields, found {}", record.len()),
            ));
        }
        for (j, field) in record.iter().take(width - 1).enumerate() {
            let value: f64 = field
                .trim()
                .parse()
                .map_err(|_| parse_err(row, format!("column `{}`: `{field}` is not a number", &header[j])))?;
            if !value.is_finite() {
                return Err(parse_err(row, format!("column `{}` is not finite", &header[j])));
            }
            data.push(value);
        }
        if data[data.len() - (width - 1)..].iter().all(|&v| v == 0.0) {
            return Err(parse_err(
                row,
                "all-zero feature row (cosine similarity undefined)".into(),
            ));
        }
        let label = Label::from_code(&record[width - 1])
            .ok_or_else(|| parse_err(row, format!("label `{}` is not 0 or 1", &record[width - 1])))?;
        labels.push(label);
    }
    if labels.is_empty() {
        return Err(parse_err(1, "no data rows".into()));
    }

    let features = Matrix::from_vec(labels.len(), width - 1, data)?;
    let name = path
        .file_stem()
        .map_or_else(|| "dataset".to_string(), |s| s.to_string_lossy().into_owned());
    Dataset::new(name, features, labels)
}

#[cfg(test)]
mod tests {
    use std::io::Write;

    use super::*;

    fn write(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn well_formed_file() {
        let f = write("f0,f1,label\n1.0,0.5,1\n0.2,0.1,0\n-3,2e-1,1\n");
        let ds = load_dataset(f.path()).unwrap();
        assert_eq!(ds.len(), 3);
        assert_eq!(ds.features().shape(), (3, 2));
        assert_eq!(ds.labels(), &[Label::Interest, Label::NonInterest, Label::Interest]);
        assert_eq!(ds.features()[(2, 1)], 0.2);
    }

    #[test]
    fn text_in_feature_column_names_the_row() {
        let f = write("f0,f1,label\n1.0,0.5,1\n0.2,abc,0\n");
        match load_dataset(f.path()) {
            Err(Error::Parse { row, message, .. }) => {
                assert_eq!(row, 3);
                assert!(message.contains("abc"), "{message}");
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn empty_file_is_rejected() {
        let f = write("");
        assert!(matches!(load_dataset(f.path()), Err(Error::Parse { .. })));
        let f = write("f0,label\n");
        assert!(matches!(load_dataset(f.path()), Err(Error::Parse { .. })));
    }

    #[test]
    fn missing_label_column() {
        let f = write("f0,f1\n1,2\n3,4\n");
        assert!(matches!(load_dataset(f.path()), Err(Error::Parse { row: 1, .. })));
    }

    #[test]
    fn ragged_row_and_bad_label() {
        let f = write("f0,f1,label\n1,2,1\n3,1\n");
        assert!(matches!(load_dataset(f.path()), Err(Error::Parse { row: 3, .. })));
        let f = write("f0,label\n1,1\n3,2\n");
        assert!(matches!(load_dataset(f.path()), Err(Error::Parse { row: 3, .. })));
    }

    #[test]
    fn zero_norm_row_is_rejected_at_load() {
        let f = write("f0,f1,label\n1,2,1\n0,0,0\n");
        assert!(matches!(load_dataset(f.path()), Err(Error::Parse { row: 3, .. })));
    }

    #[test]
    fn csv_round_trip() {
        let features = Matrix::from_rows(&[[0.1, 1.0 / 3.0], [-2.5, 1e-9]]).unwrap();
        let ds = Dataset::new("x", features, vec![Label::NonInterest, Label::Interest]).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.csv");
        ds.write_csv(&path).unwrap();
        let back = load_dataset(&path).unwrap();
        assert_eq!(back.features(), ds.features());
        assert_eq!(back.labels(), ds.labels());
        assert_eq!(back.name(), "x");
    }
}
