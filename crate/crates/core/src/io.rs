//! CSV serialization for grid data and study tables.
//!
//! All floating-point output uses 17 significant digits (`{:.16e}`), which
//! round-trips f64 exactly; files written by two runs of the same study are
//! therefore byte-identical precisely when the computed numbers are.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::asymptotics::DecayReport;
use crate::error::{Error, Result};
use crate::grid::{Domain, GridFunction};

/// f64 to 17 significant digits, round-trip exact.
pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes a grid function: a header line with the domain parameters, a
/// column header, then one `index,re,im` row per grid point in flattened
/// order.
pub fn write_grid_csv(path: &Path, f: &GridFunction) -> Result<()> {
    let domain = f.domain();
    let file = File::create(path)?;
    let mut w = BufWriter::new(file);
    writeln!(
        w,
        "# d={} n={} l={}",
        domain.dimension(),
        domain.points_per_axis(),
        format_f64(domain.half_width())
    )?;
    writeln!(w, "index,re,im")?;
    for (idx, v) in f.values().iter().enumerate() {
        writeln!(w, "{},{},{}", idx, format_f64(v.re), format_f64(v.im))?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a grid function written by [`write_grid_csv`].
pub fn read_grid_csv(path: &Path) -> Result<GridFunction> {
    let file = File::open(path)?;
    let mut lines = BufReader::new(file).lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty grid file".into()))??;
    let header = header
        .strip_prefix('#')
        .ok_or_else(|| Error::Parse("missing domain header".into()))?
        .trim();
    let mut d = None;
    let mut n = None;
    let mut l = None;
    for token in header.split_whitespace() {
        let (key, value) = token
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("malformed header token '{token}'")))?;
        match key {
            "d" => d = Some(value.parse::<usize>().map_err(|e| Error::Parse(e.to_string()))?),
            "n" => n = Some(value.parse::<usize>().map_err(|e| Error::Parse(e.to_string()))?),
            "l" => l = Some(value.parse::<f64>().map_err(|e| Error::Parse(e.to_string()))?),
            other => return Err(Error::Parse(format!("unknown header key '{other}'"))),
        }
    }
    let (d, n, l) = match (d, n, l) {
        (Some(d), Some(n), Some(l)) => (d, n, l),
        _ => return Err(Error::Parse("header must define d, n and l".into())),
    };
    let domain = Domain::new(d, n, l)?;
    let columns = lines
        .next()
        .ok_or_else(|| Error::Parse("missing column header".into()))??;
    if columns.trim() != "index,re,im" {
        return Err(Error::Parse(format!("unexpected column header '{columns}'")));
    }
    let mut values = Vec::with_capacity(domain.len());
    for (row, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split(',');
        let idx: usize = parts
            .next()
            .ok_or_else(|| Error::Parse(format!("row {row}: missing index")))?
            .trim()
            .parse()
            .map_err(|e| Error::Parse(format!("row {row}: {e}")))?;
        if idx != values.len() {
            return Err(Error::Parse(format!(
                "row {row}: index {idx} out of order (expected {})",
                values.len()
            )));
        }
        let re: f64 = parts
            .next()
            .ok_or_else(|| Error::Parse(format!("row {row}: missing re")))?
            .trim()
            .parse()
            .map_err(|e| Error::Parse(format!("row {row}: {e}")))?;
        let im: f64 = parts
            .next()
            .ok_or_else(|| Error::Parse(format!("row {row}: missing im")))?
            .trim()
            .parse()
            .map_err(|e| Error::Parse(format!("row {row}: {e}")))?;
        if parts.next().is_some() {
            return Err(Error::Parse(format!("row {row}: too many columns")));
        }
        values.push(Complex64::new(re, im));
    }
    if values.len() != domain.len() {
        return Err(Error::Parse(format!(
            "grid file has {} rows, domain needs {}",
            values.len(),
            domain.len()
        )));
    }
    GridFunction::from_values(domain, values)
}

/// Reads a per-point scalar table: one `i[,j[,k]],value` row per grid point
/// (d index columns), every point present exactly once, any order. A single
/// leading header row (e.g. `i,j,kappa`) is tolerated.
pub fn read_scalar_table_csv(path: &Path, domain: &Domain) -> Result<Vec<f64>> {
    let file = File::open(path)?;
    let d = domain.dimension();
    let n = domain.points_per_axis();
    let mut values = vec![f64::NAN; domain.len()];
    let mut seen = vec![false; domain.len()];
    let mut first_row = true;
    for (row, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let parts: Vec<&str> = trimmed.split(',').collect();
        if parts.len() != d + 1 {
            return Err(Error::Parse(format!(
                "row {row}: expected {} columns, got {}",
                d + 1,
                parts.len()
            )));
        }
        let is_header = first_row && parts[0].trim().parse::<usize>().is_err();
        first_row = false;
        if is_header {
            continue;
        }
        let mut flat = 0usize;
        for part in &parts[..d] {
            let axis_index: usize = part
                .trim()
                .parse()
                .map_err(|e| Error::Parse(format!("row {row}: {e}")))?;
            if axis_index >= n {
                return Err(Error::Parse(format!(
                    "row {row}: index {axis_index} out of range (n = {n})"
                )));
            }
            flat = flat * n + axis_index;
        }
        if seen[flat] {
            return Err(Error::Parse(format!("row {row}: duplicate grid point")));
        }
        seen[flat] = true;
        values[flat] = parts[d]
            .trim()
            .parse()
            .map_err(|e| Error::Parse(format!("row {row}: {e}")))?;
    }
    if let Some(missing) = seen.iter().position(|&s| !s) {
        return Err(Error::Parse(format!(
            "table is missing grid point with flattened index {missing}"
        )));
    }
    Ok(values)
}

/// Writes a decay report: `t,norm,envelope` rows, where the envelope column
/// is norm·t^{|exponent|}.
pub fn write_decay_csv(path: &Path, report: &DecayReport) -> Result<()> {
    let file = File::create(path)?;
    let mut w = BufWriter::new(file);
    writeln!(w, "t,norm,envelope")?;
    let mult = report.theoretical_exponent.abs();
    for (&t, &norm) in report.times.iter().zip(&report.norms) {
        writeln!(
            w,
            "{},{},{}",
            format_f64(t),
            format_f64(norm),
            format_f64(norm * t.powf(mult))
        )?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_roundtrip_is_exact() {
        let dir = std::env::temp_dir().join(format!("vord-io-test-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let domain = Domain::new(2, 8, std::f64::consts::PI).unwrap();
        let f = GridFunction::from_fn(domain, |x| {
            Complex64::new((13.7 * x[0]).sin() * 1e-7, (5.0 + x[1]).ln())
        });
        let path = dir.join("grid.csv");
        write_grid_csv(&path, &f).unwrap();
        let g = read_grid_csv(&path).unwrap();
        assert_eq!(f.domain(), g.domain());
        // 17-significant-digit formatting round-trips every bit.
        for (a, b) in f.values().iter().zip(g.values()) {
            assert_eq!(a.re.to_bits(), b.re.to_bits());
            assert_eq!(a.im.to_bits(), b.im.to_bits());
        }
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn malformed_grid_files_are_rejected() {
        let dir = std::env::temp_dir().join(format!("vord-io-bad-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("bad.csv");
        for contents in [
            "",
            "index,re,im\n0,1.0,2.0\n",
            "# d=2 n=8 l=1.0\nwrong,header\n",
            "# d=2 n=8 l=1.0\nindex,re,im\n1,0.0,0.0\n",
            "# d=9 n=8 l=1.0\nindex,re,im\n",
        ] {
            std::fs::write(&path, contents).unwrap();
            assert!(read_grid_csv(&path).is_err(), "accepted: {contents:?}");
        }
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn scalar_table_roundtrip_and_validation() {
        let dir = std::env::temp_dir().join(format!("vord-io-table-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let domain = Domain::new(2, 8, 1.0).unwrap();
        let path = dir.join("table.csv");
        // Rows deliberately out of order: the reader keys on indices.
        let mut rows = Vec::new();
        for i in (0..8).rev() {
            for j in 0..8 {
                rows.push(format!("{i},{j},{}", format_f64((i * 8 + j) as f64 * 0.01)));
            }
        }
        std::fs::write(&path, rows.join("\n")).unwrap();
        let values = read_scalar_table_csv(&path, &domain).unwrap();
        assert_eq!(values.len(), 64);
        assert!((values[9] - 0.09).abs() < 1e-15);
        // A missing point must be reported.
        std::fs::write(&path, rows[..rows.len() - 1].join("\n")).unwrap();
        assert!(read_scalar_table_csv(&path, &domain).is_err());
        // A duplicate point must be reported.
        let mut dup = rows.clone();
        dup.push(rows[0].clone());
        std::fs::write(&path, dup.join("\n")).unwrap();
        assert!(read_scalar_table_csv(&path, &domain).is_err());
        // A single leading header row is tolerated; a second one is not.
        let mut with_header = vec!["i,j,kappa".to_string()];
        with_header.extend(rows.iter().cloned());
        std::fs::write(&path, with_header.join("\n")).unwrap();
        let values = read_scalar_table_csv(&path, &domain).unwrap();
        assert!((values[9] - 0.09).abs() < 1e-15);
        let mut double_header = vec!["i,j,kappa".to_string(), "i,j,kappa".to_string()];
        double_header.extend(rows.iter().cloned());
        std::fs::write(&path, double_header.join("\n")).unwrap();
        assert!(read_scalar_table_csv(&path, &domain).is_err());
        std::fs::remove_dir_all(&dir).ok();
    }
}
