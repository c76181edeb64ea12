//! Dataset CSV and graph JSON serialization.
//!
//! CSV is comma-separated UTF-8 with a header row of variable names.
//! Floats are written with the shortest representation that parses back to
//! the same bits, so save→load roundtrips are lossless.

use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::graph::Dag;

pub fn save_csv(path: &Path, ds: &Dataset) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(ds.names())?;
    let mut record = csv::StringRecord::new();
    for i in 0..ds.n_samples() {
        record.clear();
        for v in ds.row(i) {
            record.push_field(&format!("{v}"));
        }
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

pub fn load_csv(path: &Path) -> Result<Dataset> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_path(path)
        .map_err(|e| Error::Data(format!("{}: {e}", path.display())))?;
    let names: Vec<String> = r
        .headers()
        .map_err(|e| Error::Data(format!("{}: bad header: {e}", path.display())))?
        .iter()
        .map(str::to_owned)
        .collect();
    let d = names.len();
    let mut values = Vec::new();
    let mut n = 0usize;
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| Error::Data(format!("{}: row {}: {e}", path.display(), line + 2)))?;
        if rec.len() != d {
            return Err(Error::Data(format!(
                "{}: row {} has {} fields, expected {}",
                path.display(),
                line + 2,
                rec.len(),
                d
            )));
        }
        for (c, field) in rec.iter().enumerate() {
            let v: f64 = field.trim().parse().map_err(|_| {
                Error::Data(format!(
                    "{}: row {}, column {:?}: non-numeric cell {field:?}",
                    path.display(),
                    line + 2,
                    names[c]
                ))
            })?;
            values.push(v);
        }
        n += 1;
    }
    let data = Array2::from_shape_vec((n, d), values)
        .map_err(|e| Error::Data(format!("{}: {e}", path.display())))?;
    Dataset::new(names, data)
}

#[derive(Serialize, Deserialize)]
struct GraphFile {
    nodes: Vec<String>,
    edges: Vec<[usize; 2]>,
}

pub fn save_graph_json(path: &Path, dag: &Dag) -> Result<()> {
    let file = GraphFile {
        nodes: dag.names().to_vec(),
        edges: dag.edges().into_iter().map(|(i, j)| [i, j]).collect(),
    };
    let json = serde_json::to_string_pretty(&file)?;
    std::fs::write(path, json)?;
    Ok(())
}

pub fn load_graph_json(path: &Path) -> Result<Dag> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Data(format!("{}: {e}", path.display())))?;
    let file: GraphFile = serde_json::from_str(&text)
        .map_err(|e| Error::Data(format!("{}: {e}", path.display())))?;
    let edges: Vec<(usize, usize)> = file.edges.iter().map(|&[i, j]| (i, j)).collect();
    Dag::new(file.nodes, &edges)
}
