//! JSON file formats for measures and codebooks.
//!
//! Serialization uses shortest-round-trip decimal floats, so a write/read
//! cycle reproduces every coordinate and weight exactly.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::{Codebook, DiscreteMeasure, Point};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MeasureFile {
    dim: usize,
    points: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    weights: Option<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CodebookFile {
    dim: usize,
    centers: Vec<Vec<f64>>,
}

fn check_rows(dim: usize, rows: &[Vec<f64>], what: &str) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::Format(format!("{what}: empty point list")));
    }
    for (i, row) in rows.iter().enumerate() {
        if row.len() != dim {
            return Err(Error::Format(format!(
                "{what}: row {i} has {} coordinates, header says {dim}",
                row.len()
            )));
        }
    }
    Ok(())
}

/// Reads a measure file. Omitted weights mean the uniform measure on the
/// listed points.
pub fn read_measure(path: &Path) -> Result<DiscreteMeasure<f64>> {
    let text = fs::read_to_string(path)?;
    let file: MeasureFile =
        serde_json::from_str(&text).map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
    check_rows(file.dim, &file.points, "measure")?;
    let points: Vec<Point<f64>> = file.points.into_iter().map(Point::new).collect();
    match file.weights {
        None => DiscreteMeasure::empirical(&points),
        Some(w) => DiscreteMeasure::new(points, w),
    }
}

pub fn write_measure(path: &Path, mu: &DiscreteMeasure<f64>) -> Result<()> {
    let file = MeasureFile {
        dim: mu.dim(),
        points: mu.support().iter().map(|p| p.coords().to_vec()).collect(),
        weights: Some(mu.weights().to_vec()),
    };
    fs::write(path, serde_json::to_string_pretty(&file)?)?;
    Ok(())
}

pub fn read_codebook(path: &Path) -> Result<Codebook<f64>> {
    let text = fs::read_to_string(path)?;
    let file: CodebookFile =
        serde_json::from_str(&text).map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
    check_rows(file.dim, &file.centers, "codebook")?;
    Codebook::new(file.centers.into_iter().map(Point::new).collect())
}

pub fn write_codebook(path: &Path, book: &Codebook<f64>) -> Result<()> {
    let file = CodebookFile {
        dim: book.dim(),
        centers: book.centers().iter().map(|p| p.coords().to_vec()).collect(),
    };
    fs::write(path, serde_json::to_string_pretty(&file)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn measure_round_trips_exactly() {
        let dir = std::env::temp_dir().join("wassquant-io-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("mu.json");
        let mu = DiscreteMeasure::new(
            vec![
                Point::new(vec![0.1, 0.2]),
                Point::new(vec![1.0 / 3.0, -0.7]),
            ],
            vec![0.25, 0.75],
        )
        .unwrap();
        write_measure(&path, &mu).unwrap();
        let back = read_measure(&path).unwrap();
        assert_eq!(back.support(), mu.support());
        assert_eq!(back.weights(), mu.weights());
    }

    #[test]
    fn uniform_weights_when_omitted() {
        let dir = std::env::temp_dir().join("wassquant-io-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("uniform.json");
        std::fs::write(&path, r#"{"dim":1,"points":[[0.0],[2.0]]}"#).unwrap();
        let mu = read_measure(&path).unwrap();
        assert_eq!(mu.weights(), &[0.5, 0.5]);
    }

    #[test]
    fn rejects_ragged_rows_and_unknown_fields() {
        let dir = std::env::temp_dir().join("wassquant-io-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("bad.json");
        std::fs::write(&path, r#"{"dim":2,"points":[[0.0]]}"#).unwrap();
        assert!(matches!(read_measure(&path), Err(Error::Format(_))));
        std::fs::write(&path, r#"{"dim":1,"points":[[0.0]],"extra":1}"#).unwrap();
        assert!(matches!(read_measure(&path), Err(Error::Format(_))));
    }
}
