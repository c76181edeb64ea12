//! Observational sample matrix with named columns.

use ndarray::{Array2, ArrayView1, ArrayView2, Axis};

use crate::error::{Error, Result};

/// N×D sample matrix plus column names. Entries are validated finite at
/// construction so model inputs can assume it.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    names: Vec<String>,
    data: Array2<f64>,
}

/// Per-column affine standardization metadata.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Standardization {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Dataset {
    pub fn new(names: Vec<String>, data: Array2<f64>) -> Result<Self> {
        if names.len() != data.ncols() {
            return Err(Error::Data(format!(
                "{} column names for {} columns",
                names.len(),
                data.ncols()
            )));
        }
        let mut seen = std::collections::HashSet::new();
        for name in &names {
            if !seen.insert(name.as_str()) {
                return Err(Error::Data(format!("duplicate column name {name:?}")));
            }
        }
        if let Some(bad) = data.iter().position(|v| !v.is_finite()) {
            let (r, c) = (bad / data.ncols(), bad % data.ncols());
            return Err(Error::Data(format!(
                "non-finite value at row {r}, column {:?}",
                names[c]
            )));
        }
        Ok(Self { names, data })
    }

    pub fn n_samples(&self) -> usize {
        self.data.nrows()
    }

    pub fn n_vars(&self) -> usize {
        self.data.ncols()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn data(&self) -> ArrayView2<'_, f64> {
        self.data.view()
    }

    pub fn column(&self, j: usize) -> ArrayView1<'_, f64> {
        self.data.column(j)
    }

    pub fn row(&self, i: usize) -> ArrayView1<'_, f64> {
        self.data.row(i)
    }

    /// Dataset restricted to the given columns, in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> Result<Self> {
        for &c in cols {
            if c >= self.n_vars() {
                return Err(Error::Data(format!("column index {c} out of range")));
            }
        }
        let names = cols.iter().map(|&c| self.names[c].clone()).collect();
        let data = self.data.select(Axis(1), cols);
        Self::new(names, data)
    }

    /// Column means and standard deviations (population, guarded below by
    /// a floor so constant columns do not divide by zero).
    pub fn standardization(&self) -> Standardization {
        let n = self.n_samples().max(1) as f64;
        let mean: Vec<f64> = self
            .data
            .axis_iter(Axis(1))
            .map(|c| c.sum() / n)
            .collect();
        let std: Vec<f64> = self
            .data
            .axis_iter(Axis(1))
            .zip(&mean)
            .map(|(c, &m)| {
                let var = c.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n;
                var.sqrt().max(1e-12)
            })
            .collect();
        Standardization { mean, std }
    }

    /// Standardized copy of the data under the given metadata.
    pub fn standardized(&self, s: &Standardization) -> Array2<f64> {
        let mut out = self.data.clone();
        for (j, mut col) in out.axis_iter_mut(Axis(1)).enumerate() {
            col.mapv_inplace(|v| (v - s.mean[j]) / s.std[j]);
        }
        out
    }
}

impl Standardization {
    /// Identity map for d variables (used when standardization is off).
    pub fn identity(d: usize) -> Self {
        Self {
            mean: vec![0.0; d],
            std: vec![1.0; d],
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .enumerate()
            .map(|(j, v)| (v - self.mean[j]) / self.std[j])
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn rejects_duplicate_names() {
        let err = Dataset::new(
            vec!["a".into(), "a".into()],
            array![[1.0, 2.0]],
        )
        .unwrap_err();
        assert!(matches!(err, Error::Data(_)));
    }

    #[test]
    fn rejects_non_finite() {
        let err = Dataset::new(vec!["a".into()], array![[f64::NAN]]).unwrap_err();
        assert!(err.to_string().contains("non-finite"));
    }

    #[test]
    fn standardize_roundtrip() {
        let ds = Dataset::new(
            vec!["a".into(), "b".into()],
            array![[1.0, 10.0], [3.0, 30.0], [5.0, 20.0]],
        )
        .unwrap();
        let s = ds.standardization();
        let z = ds.standardized(&s);
        for j in 0..2 {
            let col = z.column(j);
            let m = col.sum() / 3.0;
            assert!(m.abs() < 1e-12);
        }
    }
}
