//! Dense observation matrices and the CSV interchange format.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// `n × p` matrix of finite observations, stored row-major.
///
/// Row index is the object's identity: bootstrap samples, assignments and
/// intersections all refer to objects by their row.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    values: Vec<f64>,
    n: usize,
    p: usize,
}

impl DataMatrix {
    pub fn new(n: usize, p: usize, values: Vec<f64>) -> Result<Self> {
        if n < 2 {
            return Err(Error::TooFewRows { required: 2, found: n });
        }
        if p == 0 {
            return Err(Error::InvalidArgument("data must have at least one column".into()));
        }
        if values.len() != n * p {
            return Err(Error::DimensionMismatch {
                expected: n * p,
                found: values.len(),
            });
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                row: pos / p + 1,
                column: pos % p + 1,
                value: values[pos],
            });
        }
        Ok(Self { values, n, p })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let p = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        let mut values = Vec::with_capacity(rows.len() * p);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != p {
                return Err(Error::Ragged {
                    row: i + 1,
                    expected: p,
                    found: r.len(),
                });
            }
            values.extend_from_slice(r);
        }
        Self::new(rows.len(), p, values)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn p(&self) -> usize {
        self.p
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.p..(i + 1) * self.p]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.values.chunks_exact(self.p)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn column_means(&self) -> Vec<f64> {
        let mut means = vec![0.0; self.p];
        for r in self.rows() {
            for (m, v) in means.iter_mut().zip(r) {
                *m += v;
            }
        }
        means.iter_mut().for_each(|m| *m /= self.n as f64);
        means
    }

    /// Per-column `(min, max)`.
    pub fn bounds(&self) -> Vec<(f64, f64)> {
        let mut b = vec![(f64::INFINITY, f64::NEG_INFINITY); self.p];
        for r in self.rows() {
            for ((lo, hi), &v) in b.iter_mut().zip(r) {
                *lo = lo.min(v);
                *hi = hi.max(v);
            }
        }
        b
    }

    /// For every row, the smallest row index holding bit-identical values.
    /// Rows sharing a class are indistinguishable to any clustering.
    pub fn value_classes(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.n).collect();
        order.sort_by(|&a, &b| {
            self.row(a)
                .iter()
                .zip(self.row(b))
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.cmp(&b))
        });
        let mut class = vec![0; self.n];
        let mut rep = order[0];
        for w in order.windows(2) {
            if self.row(w[0]) != self.row(w[1]) {
                rep = w[1];
            }
            class[w[1]] = rep;
        }
        class[order[0]] = order[0];
        class
    }

    pub fn distinct_row_count(&self) -> usize {
        self.value_classes()
            .iter()
            .enumerate()
            .filter(|(i, &c)| *i == c)
            .count()
    }

    /// New matrix holding the listed rows, in order (duplicates allowed).
    pub fn select_rows(&self, ids: &[usize]) -> Result<DataMatrix> {
        let mut values = Vec::with_capacity(ids.len() * self.p);
        for &i in ids {
            if i >= self.n {
                return Err(Error::InvalidArgument(format!("row {i} out of range")));
            }
            values.extend_from_slice(self.row(i));
        }
        DataMatrix::new(ids.len(), self.p, values)
    }
}

#[inline]
pub(crate) fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Reads a dataset: one object per record, comma separated, optional header.
pub fn read_csv<R: Read>(reader: R, has_header: bool) -> Result<DataMatrix> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(has_header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut values = Vec::new();
    let mut p = None;
    let mut n = 0;
    for (idx, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let row = idx + 1;
        if rec.iter().all(|c| c.is_empty()) {
            continue;
        }
        let expected = *p.get_or_insert(rec.len());
        if rec.len() != expected {
            return Err(Error::Ragged {
                row,
                expected,
                found: rec.len(),
            });
        }
        for (c, cell) in rec.iter().enumerate() {
            let v: f64 = cell.parse().map_err(|_| Error::Parse {
                row,
                column: c + 1,
                text: cell.to_string(),
            })?;
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    row,
                    column: c + 1,
                    value: v,
                });
            }
            values.push(v);
        }
        n += 1;
    }
    if n < 2 {
        return Err(Error::TooFewRows { required: 2, found: n });
    }
    DataMatrix::new(n, p.unwrap_or(0), values)
}

pub fn load_csv(path: impl AsRef<Path>, has_header: bool) -> Result<DataMatrix> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_csv(file, has_header)
}

/// Writes the dataset using shortest round-trip formatting, so that
/// [`read_csv`] recovers it exactly.
pub fn write_csv<W: Write>(writer: W, data: &DataMatrix, header: Option<&[String]>) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    if let Some(h) = header {
        if h.len() != data.p() {
            return Err(Error::DimensionMismatch {
                expected: data.p(),
                found: h.len(),
            });
        }
        w.write_record(h)?;
    }
    for r in data.rows() {
        w.write_record(r.iter().map(|v| v.to_string()))?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn save_csv(path: impl AsRef<Path>, data: &DataMatrix, header: Option<&[String]>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    write_csv(file, data, header)
}
