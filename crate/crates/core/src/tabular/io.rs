use super::{DataError, Dataset};
use ndarray::Array2;
use std::collections::HashMap;
use std::fs::File;
use std::path::Path;

/// A CSV file read as text cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawTable {
    columns: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl RawTable {
    /// Builds a table, checking the rectangular shape. Duplicate column names
    /// get a `.1`, `.2`, ... suffix so every name is unique.
    pub fn new(columns: Vec<String>, rows: Vec<Vec<String>>) -> Result<Self, DataError> {
        let expected = columns.len();
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != expected) {
            return Err(DataError::RaggedRow {
                row: i + 1,
                expected,
                found: r.len(),
            });
        }
        Ok(RawTable {
            columns: dedupe(columns),
            rows,
        })
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn rows(&self) -> &[Vec<String>] {
        &self.rows
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub(crate) fn require(&self, name: &str) -> Result<usize, DataError> {
        self.column_index(name)
            .ok_or_else(|| DataError::MissingColumn(name.to_string()))
    }

    /// Replaces the column names, keeping the rows.
    pub fn rename_columns(self, columns: Vec<String>) -> Result<Self, DataError> {
        RawTable::new(columns, self.rows)
    }

    /// Appends the rows of `other`, which must have the same width.
    pub fn concat(mut self, other: RawTable) -> Result<Self, DataError> {
        let expected = self.columns.len();
        if let Some((i, r)) = other.rows.iter().enumerate().find(|(_, r)| r.len() != expected) {
            return Err(DataError::RaggedRow {
                row: self.rows.len() + i + 1,
                expected,
                found: r.len(),
            });
        }
        self.rows.extend(other.rows);
        Ok(self)
    }
}

fn dedupe(columns: Vec<String>) -> Vec<String> {
    let mut seen: HashMap<String, usize> = HashMap::new();
    columns
        .into_iter()
        .map(|c| {
            let k = seen.entry(c.clone()).or_insert(0);
            let name = if *k == 0 { c } else { format!("{c}.{k}") };
            *k += 1;
            name
        })
        .collect()
}

/// Reads an RFC-4180 CSV file. Cells are whitespace-trimmed and blank lines
/// skipped. Without a header the columns are named `col0`, `col1`, ...
///
/// Ragged rows are reported by 1-based data row number.
pub fn load_csv(path: impl AsRef<Path>, has_header: bool) -> Result<RawTable, DataError> {
    load_csv_with(path, has_header, None)
}

/// Like [`load_csv`], additionally skipping lines that start with `comment`.
pub fn load_csv_with(path: impl AsRef<Path>, has_header: bool, comment: Option<u8>) -> Result<RawTable, DataError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| DataError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(comment)
        .from_reader(file);

    let mut records = reader.records();
    let columns = if has_header {
        match records.next() {
            Some(r) => r?.iter().map(str::to_string).collect::<Vec<_>>(),
            None => return Err(DataError::MissingHeader),
        }
    } else {
        Vec::new()
    };

    let mut rows = Vec::new();
    for record in records {
        rows.push(record?.iter().map(str::to_string).collect::<Vec<_>>());
    }
    let columns = if has_header {
        columns
    } else {
        let width = rows.first().map_or(0, Vec::len);
        (0..width).map(|i| format!("col{i}")).collect()
    };
    RawTable::new(columns, rows)
}

const LABEL: &str = "label";
const PROTECTED: &str = "protected";
const WEIGHT: &str = "weight";

/// Writes a dataset as CSV: the feature columns, then `label`, `protected`
/// and `weight`. Reals use the shortest representation that round-trips.
pub fn write_dataset_csv(ds: &Dataset, path: impl AsRef<Path>) -> Result<(), DataError> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|source| DataError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut w = csv::Writer::from_writer(file);
    let mut header: Vec<&str> = ds.feature_names().iter().map(String::as_str).collect();
    header.extend([LABEL, PROTECTED, WEIGHT]);
    w.write_record(&header)?;
    let mut record: Vec<String> = Vec::with_capacity(header.len());
    for (i, row) in ds.features().rows().into_iter().enumerate() {
        record.clear();
        record.extend(row.iter().map(|v| v.to_string()));
        record.push(ds.labels()[i].to_string());
        record.push(ds.protected()[i].to_string());
        record.push(ds.weights()[i].to_string());
        w.write_record(&record)?;
    }
    w.flush().map_err(|source| DataError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(())
}

/// Reads the format produced by [`write_dataset_csv`].
pub fn read_dataset_csv(path: impl AsRef<Path>) -> Result<Dataset, DataError> {
    let path = path.as_ref();
    let table = load_csv(path, true)?;
    let label_col = table.require(LABEL)?;
    let protected_col = table.require(PROTECTED)?;
    let weight_col = table.require(WEIGHT)?;
    let feature_cols: Vec<usize> = (0..table.columns().len())
        .filter(|c| ![label_col, protected_col, weight_col].contains(c))
        .collect();

    let n = table.n_rows();
    let d = feature_cols.len();
    let mut features = Array2::zeros((n, d));
    let mut labels = Vec::with_capacity(n);
    let mut protected = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for (i, row) in table.rows().iter().enumerate() {
        for (j, &c) in feature_cols.iter().enumerate() {
            features[[i, j]] = parse_real(&row[c], i + 1, &table.columns()[c])?;
        }
        labels.push(parse_bit(&row[label_col], i + 1, LABEL)?);
        protected.push(parse_bit(&row[protected_col], i + 1, PROTECTED)?);
        weights.push(parse_real(&row[weight_col], i + 1, WEIGHT)?);
    }
    let names = feature_cols.iter().map(|&c| table.columns()[c].clone()).collect();
    let provenance = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    Dataset::with_all(features, labels, protected, weights, names, Vec::new(), provenance)
}

/// Columns of a predictions file: `pred,label,protected[,weight]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Predictions {
    pub preds: Vec<u8>,
    pub labels: Vec<u8>,
    pub protected: Vec<u8>,
    /// All ones when the file has no `weight` column.
    pub weights: Vec<f64>,
}

/// Reads a predictions CSV with header `pred,label,protected[,weight]`.
/// Extra columns are ignored.
pub fn read_predictions_csv(path: impl AsRef<Path>) -> Result<Predictions, DataError> {
    let table = load_csv(path, true)?;
    let pred_col = table.require("pred")?;
    let label_col = table.require(LABEL)?;
    let protected_col = table.require(PROTECTED)?;
    let weight_col = table.column_index(WEIGHT);
    let n = table.n_rows();
    let mut out = Predictions {
        preds: Vec::with_capacity(n),
        labels: Vec::with_capacity(n),
        protected: Vec::with_capacity(n),
        weights: Vec::with_capacity(n),
    };
    for (i, row) in table.rows().iter().enumerate() {
        out.preds.push(parse_bit(&row[pred_col], i + 1, "pred")?);
        out.labels.push(parse_bit(&row[label_col], i + 1, LABEL)?);
        out.protected.push(parse_bit(&row[protected_col], i + 1, PROTECTED)?);
        let w = match weight_col {
            Some(c) => parse_real(&row[c], i + 1, WEIGHT)?,
            None => 1.0,
        };
        if !(w.is_finite() && w > 0.0) {
            return Err(DataError::BadWeight { row: i + 1, weight: w });
        }
        out.weights.push(w);
    }
    Ok(out)
}

pub(crate) fn parse_real(cell: &str, row: usize, column: &str) -> Result<f64, DataError> {
    cell.parse::<f64>().map_err(|_| DataError::BadNumber {
        row,
        column: column.to_string(),
        value: cell.to_string(),
    })
}

pub(crate) fn parse_bit(cell: &str, row: usize, column: &str) -> Result<u8, DataError> {
    match cell {
        "0" => Ok(0),
        "1" => Ok(1),
        _ => Err(DataError::NotBinary {
            row,
            column: column.to_string(),
            value: cell.to_string(),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn file_with(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn reads_header_and_rows() {
        let f = file_with("a,b\n1,2\n3,4");
        let t = load_csv(f.path(), true).unwrap();
        assert_eq!(t.columns(), ["a", "b"]);
        assert_eq!(t.rows(), [vec!["1", "2"], vec!["3", "4"]]);
    }

    #[test]
    fn headerless_names_columns() {
        let f = file_with("1, x\n2, y\n");
        let t = load_csv(f.path(), false).unwrap();
        assert_eq!(t.columns(), ["col0", "col1"]);
        assert_eq!(t.rows()[1], ["2", "y"]);
    }

    #[test]
    fn empty_file_is_missing_header() {
        let f = file_with("");
        assert!(matches!(load_csv(f.path(), true), Err(DataError::MissingHeader)));
    }

    #[test]
    fn ragged_row_names_row() {
        let f = file_with("a,b\n1,2,3\n");
        match load_csv(f.path(), true) {
            Err(e @ DataError::RaggedRow { row: 1, .. }) => assert!(e.to_string().contains("row 1")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn duplicate_columns_are_suffixed() {
        let f = file_with("a,b,a\n1,2,3\n");
        let t = load_csv(f.path(), true).unwrap();
        assert_eq!(t.columns(), ["a", "b", "a.1"]);
    }

    #[test]
    fn missing_file_is_io_error() {
        assert!(matches!(
            load_csv("/nonexistent/definitely/not.csv", true),
            Err(DataError::Io { .. })
        ));
    }

    #[test]
    fn dataset_csv_roundtrip() {
        let features = Array2::from_shape_vec((3, 2), vec![0.1, -2.5, 1.0 / 3.0, 4.0, 1e-17, 7.25]).unwrap();
        let ds = Dataset::new(
            features,
            vec![1, 0, 1],
            vec![0, 1, 1],
            vec!["f0".into(), "f1".into()],
            "x",
        )
        .unwrap()
        .with_weights(vec![0.75, 2.0, 2.0 / 3.0])
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ds.csv");
        write_dataset_csv(&ds, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("f0,f1,label,protected,weight\n"));
        let back = read_dataset_csv(&path).unwrap();
        assert_eq!(back.features(), ds.features());
        assert_eq!(back.labels(), ds.labels());
        assert_eq!(back.protected(), ds.protected());
        assert_eq!(back.weights(), ds.weights());
    }

    #[test]
    fn predictions_with_and_without_weight() {
        let f = file_with("pred,label,protected\n1,1,0\n0,1,1\n");
        let p = read_predictions_csv(f.path()).unwrap();
        assert_eq!(p.preds, [1, 0]);
        assert_eq!(p.weights, [1.0, 1.0]);
        let f = file_with("label,pred,weight,protected\n1,1,2.5,0\n");
        assert_eq!(read_predictions_csv(f.path()).unwrap().weights, [2.5]);
        let f = file_with("pred,label\n1,1\n");
        assert!(matches!(read_predictions_csv(f.path()), Err(DataError::MissingColumn(c)) if c == "protected"));
        let f = file_with("pred,label,protected,weight\n1,1,0,0\n");
        assert!(matches!(
            read_predictions_csv(f.path()),
            Err(DataError::BadWeight { row: 1, .. })
        ));
    }
}
