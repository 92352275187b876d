use serde::{Deserialize, Serialize};
use std::io::{Read, Write};
use std::path::Path;

use crate::{Error, Result};

/// Row-major `N × d` point set with optional positive importance weights.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointBatch {
    dim: usize,
    points: Vec<f64>,
    weights: Option<Vec<f64>>,
}

impl PointBatch {
    pub fn new(dim: usize, points: Vec<f64>) -> Result<Self> {
        if dim == 0 || points.len() % dim != 0 {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: points.len(),
            });
        }
        Ok(PointBatch { dim, points, weights: None })
    }

    pub fn with_weights(dim: usize, points: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        let mut batch = Self::new(dim, points)?;
        if weights.len() != batch.len() {
            return Err(Error::DimensionMismatch {
                expected: batch.len(),
                got: weights.len(),
            });
        }
        if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::Config("importance weights must be positive and finite".into()));
        }
        batch.weights = Some(weights);
        Ok(batch)
    }

    pub fn empty(dim: usize) -> Self {
        PointBatch {
            dim,
            points: Vec::new(),
            weights: None,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    /// Flat row-major coordinates.
    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn weights(&self) -> Option<&[f64]> {
        self.weights.as_deref()
    }

    pub fn without_weights(mut self) -> Self {
        self.weights = None;
        self
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header: Vec<String> = (1..=self.dim).map(|k| format!("x{k}")).collect();
        if self.weights.is_some() {
            header.push("w".into());
        }
        w.write_record(&header)?;
        for i in 0..self.len() {
            let mut row: Vec<String> = self.point(i).iter().map(|v| format!("{v:e}")).collect();
            if let Some(ws) = &self.weights {
                row.push(format!("{:e}", ws[i]));
            }
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let header = r.headers()?.clone();
        let has_w = header.iter().last() == Some("w");
        let dim = header.len() - usize::from(has_w);
        for (k, name) in header.iter().take(dim).enumerate() {
            if name != format!("x{}", k + 1) {
                return Err(Error::Config(format!("unexpected column '{name}' in point file")));
            }
        }
        let mut points = Vec::new();
        let mut weights = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            for (k, field) in rec.iter().enumerate() {
                let v: f64 = field
                    .trim()
                    .parse()
                    .map_err(|_| Error::Config(format!("bad number '{field}' in point file")))?;
                if k < dim {
                    points.push(v);
                } else {
                    weights.push(v);
                }
            }
        }
        if has_w {
            Self::with_weights(dim, points, weights)
        } else {
            Self::new(dim, points)
        }
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }

    pub fn load_csv(path: &Path) -> Result<Self> {
        Self::read_csv(std::fs::File::open(path)?)
    }
}

/// Concatenates `additional` after `current`. If either side carries weights,
/// the other side's missing weights default to 1.
pub fn augment_points(current: &PointBatch, additional: &PointBatch) -> Result<PointBatch> {
    if additional.is_empty() {
        return Ok(current.clone());
    }
    if current.dim != additional.dim {
        return Err(Error::DimensionMismatch {
            expected: current.dim,
            got: additional.dim,
        });
    }
    let mut points = current.points.clone();
    points.extend_from_slice(&additional.points);
    let weights = match (&current.weights, &additional.weights) {
        (None, None) => None,
        (a, b) => {
            let mut w = a.clone().unwrap_or_else(|| vec![1.0; current.len()]);
            w.extend(b.clone().unwrap_or_else(|| vec![1.0; additional.len()]));
            Some(w)
        }
    };
    Ok(PointBatch {
        dim: current.dim,
        points,
        weights,
    })
}
