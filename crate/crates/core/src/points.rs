//! Finite point sets in `R^n` and their CSV form.
//!
//! CSV layout: a header row `x1,...,xn` optionally followed by `weight`, then one
//! point per row with `.` as decimal separator.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// `‖x‖_r` for `r ∈ [1, ∞]`.
pub fn lr_norm(x: &[f64], r: f64) -> f64 {
    if r == 2.0 {
        x.iter().map(|v| v * v).sum::<f64>().sqrt()
    } else if r == 1.0 {
        x.iter().map(|v| v.abs()).sum()
    } else if r.is_infinite() {
        x.iter().fold(0.0, |m, v| m.max(v.abs()))
    } else {
        // scale by the largest entry to keep powers in range
        let m = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if m == 0.0 {
            return 0.0;
        }
        m * x.iter().map(|v| (v.abs() / m).powf(r)).sum::<f64>().powf(1.0 / r)
    }
}

/// `‖x - y‖_r`
pub fn lr_distance(x: &[f64], y: &[f64], r: f64) -> f64 {
    if r == 2.0 {
        return x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    }
    let diff: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
    lr_norm(&diff, r)
}

/// Points stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    dim: usize,
    coords: Vec<f64>,
}

impl PointSet {
    pub fn new(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::domain("points must have dimension at least 1"));
        }
        if !coords.len().is_multiple_of(dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: coords.len() % dim,
            });
        }
        if let Some(bad) = coords.iter().find(|v| !v.is_finite()) {
            return Err(Error::domain(format!("non-finite coordinate {bad}")));
        }
        Ok(PointSet { dim, coords })
    }

    pub fn empty(dim: usize) -> Self {
        assert!(dim > 0);
        PointSet { dim, coords: Vec::new() }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows
            .first()
            .map(|r| r.len())
            .ok_or_else(|| Error::domain("point set is empty"))?;
        let mut coords = Vec::with_capacity(dim * rows.len());
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    actual: row.len(),
                });
            }
            coords.extend_from_slice(row);
        }
        PointSet::new(dim, coords)
    }

    /// Points on the real line.
    pub fn from_scalars(xs: &[f64]) -> Result<Self> {
        PointSet::new(1, xs.to_vec())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    pub fn push(&mut self, p: &[f64]) {
        assert_eq!(p.len(), self.dim, "point dimension");
        self.coords.extend_from_slice(p);
    }

    pub fn extend(&mut self, other: &PointSet) {
        assert_eq!(other.dim, self.dim, "point dimension");
        self.coords.extend_from_slice(&other.coords);
    }

    pub fn scaled(&self, c: f64) -> PointSet {
        PointSet {
            dim: self.dim,
            coords: self.coords.iter().map(|v| v * c).collect(),
        }
    }

    /// Applies `f` to every point, writing the image into the provided buffer.
    pub fn map_points(&self, out_dim: usize, mut f: impl FnMut(&[f64], &mut [f64])) -> PointSet {
        let mut coords = vec![0.0; out_dim * self.len()];
        for (p, out) in self.iter().zip(coords.chunks_exact_mut(out_dim)) {
            f(p, out);
        }
        PointSet { dim: out_dim, coords }
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.iter().map(|p| p.to_vec()).collect()
    }

    /// The closest pair `(i, j, ‖x_i − x_j‖_2)`, or `None` for fewer than two points.
    pub fn closest_pair(&self) -> Option<(usize, usize, f64)> {
        let mut best: Option<(usize, usize, f64)> = None;
        for i in 0..self.len() {
            for j in (i + 1)..self.len() {
                let d = lr_distance(self.point(i), self.point(j), 2.0);
                if best.is_none_or(|b| d < b.2) {
                    best = Some((i, j, d));
                }
            }
        }
        best
    }

    /// Parses the CSV layout, returning the points and the weight column if present.
    pub fn from_csv_str(text: &str) -> Result<(PointSet, Option<Vec<f64>>)> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let headers = reader.headers()?.clone();
        let names: Vec<&str> = headers.iter().collect();
        let has_weight = names.last() == Some(&"weight");
        let dim = names.len() - usize::from(has_weight);
        if dim == 0 {
            return Err(Error::Parse("header must name at least one coordinate column x1".into()));
        }
        for (k, name) in names.iter().take(dim).enumerate() {
            if *name != format!("x{}", k + 1) {
                return Err(Error::Parse(format!(
                    "header column {} is '{name}', expected 'x{}'",
                    k + 1,
                    k + 1
                )));
            }
        }
        let mut coords = Vec::new();
        let mut weights = Vec::new();
        for (line, record) in reader.records().enumerate() {
            let record = record?;
            if record.len() != names.len() {
                return Err(Error::Parse(format!(
                    "row {} has {} fields, expected {}",
                    line + 1,
                    record.len(),
                    names.len()
                )));
            }
            for (k, field) in record.iter().enumerate() {
                let v: f64 = field
                    .parse()
                    .map_err(|_| Error::Parse(format!("row {}: cannot parse '{field}' as a number", line + 1)))?;
                if !v.is_finite() {
                    return Err(Error::Parse(format!("row {}: non-finite value '{field}'", line + 1)));
                }
                if k < dim {
                    coords.push(v);
                } else {
                    weights.push(v);
                }
            }
        }
        if coords.is_empty() {
            return Err(Error::Parse("no points in CSV input".into()));
        }
        let points = PointSet::new(dim, coords)?;
        Ok((points, has_weight.then_some(weights)))
    }

    pub fn to_csv(&self, weights: Option<&[f64]>) -> String {
        if let Some(w) = weights {
            assert_eq!(w.len(), self.len(), "one weight per point");
        }
        let mut writer = csv::Writer::from_writer(Vec::new());
        let mut header: Vec<String> = (1..=self.dim).map(|k| format!("x{k}")).collect();
        if weights.is_some() {
            header.push("weight".into());
        }
        writer.write_record(&header).expect("in-memory write");
        for (i, p) in self.iter().enumerate() {
            let mut row: Vec<String> = p.iter().map(|v| format!("{v:?}")).collect();
            if let Some(w) = weights {
                row.push(format!("{:?}", w[i]));
            }
            writer.write_record(&row).expect("in-memory write");
        }
        String::from_utf8(writer.into_inner().expect("in-memory flush")).expect("ascii output")
    }
}

impl Serialize for PointSet {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_rows().serialize(s)
    }
}

impl<'de> Deserialize<'de> for PointSet {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(d)?;
        PointSet::from_rows(&rows).map_err(serde::de::Error::custom)
    }
}
