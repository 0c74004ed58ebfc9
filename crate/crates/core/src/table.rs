//! CSV loaders for tabulated radial and angular parts.
//!
//! Radial: header `omega,P`, one row per node. Angular: header
//! `theta,phi,Theta` in long format covering a full rectangular grid.
//! Lines starting with `#` are ignored.

use std::io::Read;
use std::path::Path;

use crate::angular::AngularTable;
use crate::error::{Error, Result};
use crate::radial::RadialTable;

fn reader<R: Read>(input: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(input)
}

fn table_error(e: impl std::fmt::Display) -> Error {
    Error::Table(e.to_string())
}

fn check_header<R: Read>(rdr: &mut csv::Reader<R>, expected: &[&str]) -> Result<()> {
    let header = rdr.headers().map_err(table_error)?;
    let got: Vec<&str> = header.iter().collect();
    if got != expected {
        return Err(Error::Table(format!(
            "expected header {}, found {}",
            expected.join(","),
            got.join(",")
        )));
    }
    Ok(())
}

fn parse_row<const N: usize>(record: &csv::StringRecord, line: u64) -> Result<[f64; N]> {
    if record.len() != N {
        return Err(Error::Table(format!(
            "line {line}: expected {N} fields, found {}",
            record.len()
        )));
    }
    let mut out = [0.0; N];
    for (slot, field) in out.iter_mut().zip(record.iter()) {
        *slot = field
            .parse::<f64>()
            .map_err(|_| Error::Table(format!("line {line}: '{field}' is not a number")))?;
        if !slot.is_finite() {
            return Err(Error::Table(format!("line {line}: non-finite value")));
        }
    }
    Ok(out)
}

fn rows<const N: usize, R: Read>(input: R, header: &[&str]) -> Result<Vec<[f64; N]>> {
    let mut rdr = reader(input);
    check_header(&mut rdr, header)?;
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(table_error)?;
        let line = rec.position().map_or(0, |p| p.line());
        out.push(parse_row::<N>(&rec, line)?);
    }
    Ok(out)
}

pub fn read_radial<R: Read>(input: R) -> Result<RadialTable> {
    let data = rows::<2, _>(input, &["omega", "P"])?;
    if let Some(r) = data.iter().find(|r| r[1] < 0.0) {
        return Err(Error::Table(format!(
            "negative density {} at ω = {}",
            r[1], r[0]
        )));
    }
    let (omega, density) = data.into_iter().map(|r| (r[0], r[1])).unzip();
    RadialTable::new(omega, density).map_err(|e| Error::Table(e.to_string()))
}

pub fn read_angular<R: Read>(input: R) -> Result<AngularTable> {
    let data = rows::<3, _>(input, &["theta", "phi", "Theta"])?;
    if let Some(r) = data.iter().find(|r| r[2] < 0.0) {
        return Err(Error::Table(format!(
            "negative density at θ = {}, φ = {}",
            r[0], r[1]
        )));
    }
    // a rectangular grid repeats bit-identical node values
    let nodes = |j: usize| {
        let mut v: Vec<f64> = data.iter().map(|r| r[j]).collect();
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    };
    let (theta, phi) = (nodes(0), nodes(1));
    let (nt, np) = (theta.len(), phi.len());
    if data.len() != nt * np {
        return Err(Error::Table(format!(
            "{} rows do not form a full {nt}×{np} (θ, φ) grid",
            data.len()
        )));
    }
    let mut values = vec![f64::NAN; nt * np];
    for r in &data {
        let i = theta.partition_point(|x| *x < r[0]);
        let k = phi.partition_point(|x| *x < r[1]);
        let slot = &mut values[i * np + k];
        if !slot.is_nan() {
            return Err(Error::Table(format!(
                "duplicate node θ = {}, φ = {}",
                r[0], r[1]
            )));
        }
        *slot = r[2];
    }
    AngularTable::new(theta, phi, values).map_err(|e| Error::Table(e.to_string()))
}

pub fn load_radial(path: &Path) -> Result<RadialTable> {
    let f =
        std::fs::File::open(path).map_err(|e| Error::Table(format!("{}: {e}", path.display())))?;
    read_radial(f)
}

pub fn load_angular(path: &Path) -> Result<AngularTable> {
    let f =
        std::fs::File::open(path).map_err(|e| Error::Table(format!("{}: {e}", path.display())))?;
    read_angular(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{PI, TAU};

    #[test]
    fn reads_radial_table() {
        let text = "# uniform effective measure on [0, 1]\nomega,P\n0.5,4\n1,1\n0.75, 1.7777777777777777\n";
        // out-of-order rows are a table error from the model layer
        assert!(read_radial(text.as_bytes()).is_err());
        let text = "omega,P\n0.5,4\n0.75,1.7777777777777777\n1,1\n";
        let t = read_radial(text.as_bytes()).unwrap();
        assert_eq!(t.omega(), &[0.5, 0.75, 1.0]);
    }

    #[test]
    fn rejects_bad_radial_input() {
        for text in [
            "w,P\n0,1\n1,1\n",
            "omega,P\n0,1\n1,-1\n",
            "omega,P\n0,1\n1,abc\n",
            "omega,P\n0,1,2\n1,1,1\n",
            "omega,P\n",
        ] {
            assert!(
                matches!(read_radial(text.as_bytes()), Err(Error::Table(_))),
                "{text}"
            );
        }
    }

    #[test]
    fn reads_angular_grid_in_any_row_order() {
        let thetas = [0.0, PI / 2.0, PI];
        let phis = [0.0, TAU / 3.0, 2.0 * TAU / 3.0];
        let mut text = String::from("theta,phi,Theta\n");
        for p in phis.iter().rev() {
            for t in thetas {
                text += &format!("{t:.17e},{p:.17e},{}\n", 1.0 / (4.0 * PI));
            }
        }
        let tab = read_angular(text.as_bytes()).unwrap();
        assert_eq!(tab.theta().len(), 3);
        assert_eq!(tab.phi().len(), 3);
        assert!((tab.moments().unwrap().xi() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_incomplete_angular_grid() {
        let text = format!("theta,phi,Theta\n0,0,1\n{PI},0,1\n0,1,1\n");
        assert!(matches!(
            read_angular(text.as_bytes()),
            Err(Error::Table(_))
        ));
        let dup = format!("theta,phi,Theta\n0,0,1\n{PI},0,1\n0,0,1\n{PI},0,1\n");
        assert!(read_angular(dup.as_bytes()).is_err());
    }

    #[test]
    fn loads_from_disk() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("radial.csv");
        std::fs::write(&path, "omega,P\n0,0\n1,3\n").unwrap();
        assert_eq!(load_radial(&path).unwrap().omega().len(), 2);
        assert!(load_radial(&dir.path().join("missing.csv")).is_err());
    }
}
