//! File formats.
//!
//! Point cloud (`.msp`): text, one record per line, `x y [z] region weight`
//! with region `mu` (interior) or `bd` (boundary); `#` starts a comment.
//!
//! Distance matrix (`.msd`): binary, magic `MSDM1`, point count as u64
//! little-endian, then `n*n` row-major f64 little-endian.
//!
//! Field (`.fld`): text, `index value` per line, `#` comments.

use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use crate::functionals::ScalarField;
use crate::space::{MetricSpec, PointCloudSpace, PointId, PointRecord, Region};
use crate::{Error, Result};

const MATRIX_MAGIC: &[u8; 5] = b"MSDM1";

pub fn parse_points<R: Read>(reader: R) -> Result<Vec<PointRecord>> {
    let mut records = Vec::new();
    let mut dim: Option<usize> = None;
    for (lineno, line) in BufReader::new(reader).lines().enumerate() {
        let line = line?;
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = body.split_whitespace().collect();
        if tokens.len() < 4 || tokens.len() > 5 {
            return Err(Error::Format(format!(
                "line {}: expected `x y [z] region weight`",
                lineno + 1
            )));
        }
        let ncoords = tokens.len() - 2;
        if *dim.get_or_insert(ncoords) != ncoords {
            return Err(Error::Format(format!(
                "line {}: inconsistent coordinate count",
                lineno + 1
            )));
        }
        let mut coords = Vec::with_capacity(ncoords);
        for t in &tokens[..ncoords] {
            coords.push(parse_f64(t, lineno)?);
        }
        let region = match tokens[ncoords] {
            "mu" => Region::Interior,
            "bd" => Region::Boundary,
            other => {
                return Err(Error::Format(format!(
                    "line {}: unknown region `{other}` (expected mu|bd)",
                    lineno + 1
                )))
            }
        };
        let weight = parse_f64(tokens[ncoords + 1], lineno)?;
        if !(weight > 0.0) {
            return Err(Error::Format(format!(
                "line {}: weight must be positive",
                lineno + 1
            )));
        }
        records.push(PointRecord {
            coords,
            region,
            weight,
        });
    }
    Ok(records)
}

fn parse_f64(t: &str, lineno: usize) -> Result<f64> {
    t.parse::<f64>()
        .map_err(|_| Error::Format(format!("line {}: bad number `{t}`", lineno + 1)))
}

pub fn load_space(path: &Path) -> Result<PointCloudSpace> {
    let file = std::fs::File::open(path)?;
    let records = parse_points(file)?;
    PointCloudSpace::new(records, MetricSpec::Euclidean)
}

pub fn load_space_with_matrix(points: &Path, matrix: &Path) -> Result<PointCloudSpace> {
    let file = std::fs::File::open(points)?;
    let records = parse_points(file)?;
    let m = read_distance_matrix(matrix, records.len())?;
    PointCloudSpace::new(records, MetricSpec::Matrix(m))
}

pub fn save_space(space: &PointCloudSpace, path: &Path) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "# metsob point cloud: x y{} region weight", if space.dim() == 3 { " z" } else { "" })?;
    for id in 0..space.n_points() {
        for c in space.point(id) {
            write!(out, "{c:.17} ")?;
        }
        let tag = match space.region_of(id) {
            Region::Interior => "mu",
            Region::Boundary => "bd",
        };
        writeln!(out, "{tag} {:.17}", space.weight(id))?;
    }
    Ok(())
}

pub fn read_distance_matrix(path: &Path, n: usize) -> Result<Vec<f64>> {
    let mut file = std::fs::File::open(path)?;
    let mut magic = [0u8; 5];
    file.read_exact(&mut magic)?;
    if &magic != MATRIX_MAGIC {
        return Err(Error::Format("bad distance matrix magic".into()));
    }
    let mut count = [0u8; 8];
    file.read_exact(&mut count)?;
    let count = u64::from_le_bytes(count) as usize;
    if count != n {
        return Err(Error::Format(format!(
            "distance matrix is for {count} points, point file has {n}"
        )));
    }
    let mut buf = Vec::new();
    file.read_to_end(&mut buf)?;
    if buf.len() != n * n * 8 {
        return Err(Error::Format("distance matrix payload truncated".into()));
    }
    Ok(buf
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect())
}

pub fn write_distance_matrix(path: &Path, n: usize, data: &[f64]) -> Result<()> {
    if data.len() != n * n {
        return Err(Error::Format("matrix size mismatch".into()));
    }
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    out.write_all(MATRIX_MAGIC)?;
    out.write_all(&(n as u64).to_le_bytes())?;
    for v in data {
        out.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

/// Field files address points by their global id in the space file.
pub fn load_field(space: &PointCloudSpace, region: Region, path: &Path) -> Result<ScalarField> {
    let file = std::fs::File::open(path)?;
    let mut values = vec![f64::NAN; space.ids(region).len()];
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let mut it = body.split_whitespace();
        let (Some(a), Some(b), None) = (it.next(), it.next(), it.next()) else {
            return Err(Error::Format(format!("line {}: expected `index value`", lineno + 1)));
        };
        let id: PointId = a
            .parse()
            .map_err(|_| Error::Format(format!("line {}: bad index `{a}`", lineno + 1)))?;
        if id >= space.n_points() || space.region_of(id) != region {
            return Err(Error::NoSuchPoint(id));
        }
        values[space.region_slot(id)] = parse_f64(b, lineno)?;
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Format("field does not cover its region with finite values".into()));
    }
    Ok(ScalarField { region, values })
}

pub fn save_field(space: &PointCloudSpace, field: &ScalarField, path: &Path) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    for (slot, &id) in space.ids(field.region).iter().enumerate() {
        writeln!(out, "{id} {:.17}", field.values[slot])?;
    }
    Ok(())
}
