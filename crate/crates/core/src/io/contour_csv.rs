//! Contours stored as `x,z` rows in mm, one vertex per row.

use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::{Contour, Point};

/// Reads a closed contour. A first row that is not numeric is taken as a
/// header and skipped.
pub fn parse_contour_csv(reader: impl std::io::Read, origin: &Path) -> Result<Contour> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut points = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record?;
        let line = record.position().map_or(i as u64 + 1, |p| p.line());
        let table_error = |msg: String| Error::Table {
            path: origin.to_path_buf(),
            line,
            msg,
        };
        if record.len() != 2 {
            return Err(table_error(format!(
                "expected 2 columns (x,z), found {}",
                record.len()
            )));
        }
        match (record[0].parse::<f64>(), record[1].parse::<f64>()) {
            (Ok(x), Ok(z)) => points.push(Point::new(x, z)),
            _ if i == 0 => continue,
            _ => {
                return Err(table_error(format!(
                    "non-numeric coordinates `{},{}`",
                    &record[0], &record[1]
                )))
            }
        }
    }
    Contour::closed(points)
}

pub fn read_contour_csv(path: impl AsRef<Path>) -> Result<Contour> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_contour_csv(file, path)
}
