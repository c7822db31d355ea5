//! Dataset ingestion and persistence.
//!
//! Matrices are plain comma-separated text: one matrix row per line, `#` lines
//! are comments, no header. Labels live next to the matrix in `<stem>.labels`,
//! one integer per line. Graph files are the dense n×n weight matrix in the
//! same format, preceded by a `# builder=...` provenance comment.

mod pca;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::graph::{Provenance, SimilarityGraph};

pub use pca::{pca_fit_transform, PcaModel};

/// How samples are laid out in a matrix file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Orientation {
    /// Each line of the file is one sample.
    SamplesAsRows,
    /// Each column of the file is one sample.
    #[default]
    SamplesAsColumns,
}

/// Dense data matrix with samples as columns and optional ground-truth labels.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    values: DMatrix<f64>,
    labels: Option<Vec<usize>>,
    name: String,
}

impl DataMatrix {
    pub fn new(values: DMatrix<f64>, name: impl Into<String>) -> Result<Self> {
        if values.nrows() < 1 {
            return Err(Error::Empty("data matrix needs at least one row".into()));
        }
        if values.ncols() < 2 {
            return Err(Error::InvalidArgument(format!(
                "data matrix needs at least 2 samples, got {}",
                values.ncols()
            )));
        }
        if let Some(pos) = values.iter().position(|x| !x.is_finite()) {
            let (r, c) = (pos % values.nrows(), pos / values.nrows());
            return Err(Error::Validation(format!("non-finite entry at ({r}, {c})")));
        }
        Ok(Self {
            values,
            labels: None,
            name: name.into(),
        })
    }

    /// Attach labels, remapping them to contiguous 0-based ids in sorted order.
    pub fn with_labels<T: Ord + Copy>(mut self, labels: &[T]) -> Result<Self> {
        if labels.len() != self.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} labels for {} samples",
                labels.len(),
                self.len()
            )));
        }
        self.labels = Some(canonicalize_labels(labels));
        Ok(self)
    }

    pub fn without_labels(mut self) -> Self {
        self.labels = None;
        self
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn into_values(self) -> DMatrix<f64> {
        self.values
    }

    pub fn labels(&self) -> Option<&[usize]> {
        self.labels.as_deref()
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Ambient dimension m.
    pub fn dim(&self) -> usize {
        self.values.nrows()
    }

    /// Sample count n.
    pub fn len(&self) -> usize {
        self.values.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.values.ncols() == 0
    }

    /// Number of distinct labels, if labelled.
    pub fn num_classes(&self) -> Option<usize> {
        self.labels
            .as_ref()
            .map(|l| l.iter().copied().max().map_or(0, |m| m + 1))
    }

    /// Same labels and name, new values (must keep the sample count).
    pub(crate) fn map_values(&self, values: DMatrix<f64>) -> Result<Self> {
        let mut out = DataMatrix::new(values, self.name.clone())?;
        if let Some(l) = &self.labels {
            out = out.with_labels(l)?;
        }
        Ok(out)
    }
}

/// Map arbitrary label values onto `0..l` in ascending order of value.
pub fn canonicalize_labels<T: Ord + Copy>(labels: &[T]) -> Vec<usize> {
    let mut distinct: Vec<T> = labels.to_vec();
    distinct.sort();
    distinct.dedup();
    labels
        .iter()
        .map(|l| distinct.binary_search(l).expect("label present"))
        .collect()
}

/// Path of the label file that accompanies a matrix file.
pub fn labels_path(matrix_path: &Path) -> PathBuf {
    matrix_path.with_extension("labels")
}

fn read_rows(path: &Path) -> Result<(Vec<Vec<f64>>, Vec<String>)> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let comments = text
        .lines()
        .filter_map(|l| l.trim_start().strip_prefix('#'))
        .map(|c| c.trim().to_string())
        .collect();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            row: idx,
            column: 0,
            message: e.to_string(),
        })?;
        let line = record.position().map_or(idx + 1, |p| p.line() as usize);
        let mut row = Vec::with_capacity(record.len());
        for (col, tok) in record.iter().enumerate() {
            let value: f64 = tok.parse().map_err(|_| Error::Parse {
                path: path.to_path_buf(),
                row: line,
                column: col + 1,
                message: format!("not a number: {tok:?}"),
            })?;
            if !value.is_finite() {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    row: line,
                    column: col + 1,
                    message: format!("non-finite value {tok:?}"),
                });
            }
            row.push(value);
        }
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    row: line,
                    column: row.len(),
                    message: format!("ragged row: expected {} fields, found {}", first.len(), row.len()),
                });
            }
        }
        rows.push(row);
    }
    if rows.is_empty() || rows[0].is_empty() {
        return Err(Error::Empty(format!("{} contains no numeric rows", path.display())));
    }
    Ok((rows, comments))
}

/// Read a raw matrix exactly as laid out in the file (file rows become matrix rows).
pub fn read_matrix(path: impl AsRef<Path>) -> Result<DMatrix<f64>> {
    let (rows, _) = read_rows(path.as_ref())?;
    let (r, c) = (rows.len(), rows[0].len());
    Ok(DMatrix::from_row_iterator(r, c, rows.into_iter().flatten()))
}

/// Write a raw matrix, one matrix row per line, with optional `#` comment lines first.
/// Floats use the shortest representation that parses back to the same bits.
pub fn write_matrix(path: impl AsRef<Path>, values: &DMatrix<f64>, header: &[String]) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::new();
    for line in header {
        out.push_str("# ");
        out.push_str(line);
        out.push('\n');
    }
    for r in 0..values.nrows() {
        let row: Vec<String> = values.row(r).iter().map(|x| format!("{x:?}")).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    write_text(path, &out)
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))
}

/// Load a data matrix, transposing if samples are stored as rows. Labels are
/// picked up from the sibling `.labels` file when it exists.
pub fn load_matrix(path: impl AsRef<Path>, orientation: Orientation) -> Result<DataMatrix> {
    let path = path.as_ref();
    let raw = read_matrix(path)?;
    let values = match orientation {
        Orientation::SamplesAsRows => raw.transpose(),
        Orientation::SamplesAsColumns => raw,
    };
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let data = DataMatrix::new(values, name)?;
    let lp = labels_path(path);
    if lp.exists() {
        let labels = load_labels(&lp)?;
        return data.with_labels(&labels);
    }
    Ok(data)
}

/// Save a data matrix (and its labels, if any, to the sibling `.labels` file).
pub fn save_matrix(
    data: &DataMatrix,
    path: impl AsRef<Path>,
    orientation: Orientation,
    header: &[String],
) -> Result<()> {
    let path = path.as_ref();
    match orientation {
        Orientation::SamplesAsColumns => write_matrix(path, data.values(), header)?,
        Orientation::SamplesAsRows => write_matrix(path, &data.values().transpose(), header)?,
    }
    if let Some(labels) = data.labels() {
        save_labels(labels_path(path), labels)?;
    }
    Ok(())
}

pub fn load_labels(path: impl AsRef<Path>) -> Result<Vec<i64>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut labels = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        labels.push(t.parse::<i64>().map_err(|_| Error::Parse {
            path: path.to_path_buf(),
            row: i + 1,
            column: 1,
            message: format!("not an integer label: {t:?}"),
        })?);
    }
    if labels.is_empty() {
        return Err(Error::Empty(format!("{} contains no labels", path.display())));
    }
    Ok(labels)
}

pub fn save_labels(path: impl AsRef<Path>, labels: &[usize]) -> Result<()> {
    let mut out = String::with_capacity(labels.len() * 3);
    for l in labels {
        out.push_str(&l.to_string());
        out.push('\n');
    }
    write_text(path.as_ref(), &out)
}

pub fn save_graph(graph: &SimilarityGraph, path: impl AsRef<Path>) -> Result<()> {
    write_matrix(path, graph.weights(), &[graph.provenance().to_string()])
}

/// Load a dense graph file and check symmetry, non-negativity and a zero diagonal.
pub fn load_graph(path: impl AsRef<Path>) -> Result<SimilarityGraph> {
    let path = path.as_ref();
    let (rows, comments) = read_rows(path)?;
    let (r, c) = (rows.len(), rows[0].len());
    let weights = DMatrix::from_row_iterator(r, c, rows.into_iter().flatten());
    let provenance = comments
        .iter()
        .find_map(|c| c.parse::<Provenance>().ok())
        .unwrap_or(Provenance::External);
    SimilarityGraph::new(weights, provenance)
}
