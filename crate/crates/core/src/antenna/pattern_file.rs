//! Pattern-grid text file format.
//!
//! Line-oriented, linear amplitudes:
//!
//! ```text
//! theta_step,phi_step
//! theta_deg,phi_deg,re_etheta,im_etheta,re_ephi,im_ephi
//! ...
//! ```
//!
//! One row per cell center in theta-major order. The loader rebuilds the
//! grid from the header and rejects rows that do not match the expected cell
//! centers, rows with non-finite values, and files with missing or trailing
//! rows.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex;

use crate::antenna::{ComplexGainPair, ElementPattern};
use crate::error::{Error, Result};
use crate::geometry::make_grid;
use crate::scalar::{c, Scalar};

/// Writes a pattern in the pattern-grid format.
pub fn write_pattern<T: Scalar, W: Write>(pattern: &ElementPattern<T>, mut out: W) -> Result<()> {
    let grid = pattern.grid();
    writeln!(out, "{},{}", grid.theta_step_deg(), grid.phi_step_deg())?;
    for (point, s) in grid.points().iter().zip(pattern.samples()) {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            point.theta_deg(),
            point.phi_deg(),
            s.e_theta.re,
            s.e_theta.im,
            s.e_phi.re,
            s.e_phi.im
        )?;
    }
    Ok(())
}

/// Writes a pattern to `path`.
pub fn save_pattern_file<T: Scalar>(pattern: &ElementPattern<T>, path: impl AsRef<Path>) -> Result<()> {
    let file = File::create(path)?;
    write_pattern(pattern, BufWriter::new(file))
}

/// Loads a pattern from `path`. See the module docs for the format.
pub fn load_pattern_file<T: Scalar>(path: impl AsRef<Path>) -> Result<ElementPattern<T>> {
    let file = File::open(path)?;
    load_pattern_reader(BufReader::new(file))
}

/// Loads a pattern from any reader.
pub fn load_pattern_reader<T: Scalar, R: Read>(reader: R) -> Result<ElementPattern<T>> {
    let mut lines = BufReader::new(reader).lines();

    let header = lines
        .next()
        .ok_or_else(|| Error::parse(1, "empty file, expected 'theta_step,phi_step' header"))??;
    let fields: Vec<&str> = header.trim().split(',').collect();
    if fields.len() != 2 {
        return Err(Error::parse(1, "header must be 'theta_step,phi_step'"));
    }
    let theta_step = parse_field::<T>(fields[0], 1, "theta_step")?;
    let phi_step = parse_field::<T>(fields[1], 1, "phi_step")?;
    let grid = Arc::new(make_grid(theta_step, phi_step)?);

    let tol = c::<T>(1e-6);
    let mut samples = Vec::with_capacity(grid.len());
    for (idx, point) in grid.points().iter().enumerate() {
        let line_no = idx + 2;
        let line = match lines.next() {
            Some(line) => line?,
            None => {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!(
                        "missing row for cell (theta={}, phi={})",
                        point.theta_deg(),
                        point.phi_deg()
                    ),
                })
            }
        };
        let fields: Vec<&str> = line.trim().split(',').collect();
        if fields.len() != 6 {
            return Err(Error::parse(line_no, "expected 6 comma-separated fields"));
        }
        let theta = parse_field::<T>(fields[0], line_no, "theta_deg")?;
        let phi = parse_field::<T>(fields[1], line_no, "phi_deg")?;
        if (theta - point.theta_deg()).abs() > tol || (phi - point.phi_deg()).abs() > tol {
            return Err(Error::Parse {
                line: line_no,
                msg: format!(
                    "expected cell (theta={}, phi={}), found (theta={theta}, phi={phi})",
                    point.theta_deg(),
                    point.phi_deg()
                ),
            });
        }
        let et_re = parse_field::<T>(fields[2], line_no, "re_etheta")?;
        let et_im = parse_field::<T>(fields[3], line_no, "im_etheta")?;
        let ep_re = parse_field::<T>(fields[4], line_no, "re_ephi")?;
        let ep_im = parse_field::<T>(fields[5], line_no, "im_ephi")?;
        samples.push(ComplexGainPair::new(
            Complex::new(et_re, et_im),
            Complex::new(ep_re, ep_im),
        ));
    }

    if let Some(extra) = lines.next() {
        let extra = extra?;
        if !extra.trim().is_empty() {
            return Err(Error::parse(grid.len() + 2, "unexpected trailing data"));
        }
    }

    ElementPattern::new(grid, samples)
}

fn parse_field<T: Scalar>(s: &str, line: usize, name: &str) -> Result<T> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| Error::Parse {
            line,
            msg: format!("cannot parse {name} from '{s}'"),
        })?;
    if !v.is_finite() {
        return Err(Error::Parse {
            line,
            msg: format!("{name} is not finite: '{s}'"),
        });
    }
    Ok(c(v))
}
