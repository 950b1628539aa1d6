//! `vord compare`: numeric diff of two run directories. Schemas must match
//! (same kind, same output file list); numeric tokens are compared by
//! relative deviation, everything else must match exactly.

use std::path::Path;

use anyhow::bail;

use crate::manifest::RunManifest;

pub struct FileDiff {
    pub name: String,
    pub identical_bytes: bool,
    pub max_rel_dev: f64,
    pub compared_values: usize,
}

pub struct DiffReport {
    pub files: Vec<FileDiff>,
    pub max_rel_dev: f64,
}

/// Token-wise numeric comparison of one pair of CSV files.
fn diff_file(a: &Path, b: &Path) -> anyhow::Result<FileDiff> {
    let name = a
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let text_a = std::fs::read_to_string(a)?;
    let text_b = std::fs::read_to_string(b)?;
    if text_a == text_b {
        let values = text_a
            .lines()
            .map(|l| l.split(',').filter(|t| t.trim().parse::<f64>().is_ok()).count())
            .sum();
        return Ok(FileDiff { name, identical_bytes: true, max_rel_dev: 0.0, compared_values: values });
    }

    let lines_a: Vec<&str> = text_a.lines().collect();
    let lines_b: Vec<&str> = text_b.lines().collect();
    if lines_a.len() != lines_b.len() {
        bail!("{name}: row count differs ({} vs {})", lines_a.len(), lines_b.len());
    }
    let mut max_rel = 0.0f64;
    let mut compared = 0usize;
    for (row, (la, lb)) in lines_a.iter().zip(&lines_b).enumerate() {
        let toks_a: Vec<&str> = la.split(',').collect();
        let toks_b: Vec<&str> = lb.split(',').collect();
        if toks_a.len() != toks_b.len() {
            bail!("{name} row {row}: column count differs");
        }
        for (ta, tb) in toks_a.iter().zip(&toks_b) {
            match (ta.trim().parse::<f64>(), tb.trim().parse::<f64>()) {
                (Ok(xa), Ok(xb)) => {
                    let scale = xa.abs().max(xb.abs());
                    if scale > 0.0 {
                        max_rel = max_rel.max((xa - xb).abs() / scale);
                    }
                    compared += 1;
                }
                _ => {
                    if ta != tb {
                        bail!("{name} row {row}: non-numeric mismatch `{ta}` vs `{tb}`");
                    }
                }
            }
        }
    }
    Ok(FileDiff { name, identical_bytes: false, max_rel_dev: max_rel, compared_values: compared })
}

pub fn compare_runs(dir_a: &Path, dir_b: &Path) -> anyhow::Result<DiffReport> {
    let man_a = RunManifest::load(dir_a)?;
    let man_b = RunManifest::load(dir_b)?;
    if man_a.kind != man_b.kind {
        bail!("schema mismatch: kind {} vs {}", man_a.kind, man_b.kind);
    }
    if man_a.outputs != man_b.outputs {
        bail!(
            "schema mismatch: output lists differ ({} vs {} files)",
            man_a.outputs.len(),
            man_b.outputs.len()
        );
    }
    let mut files = Vec::new();
    let mut max_rel = 0.0f64;
    for name in &man_a.outputs {
        let diff = diff_file(&dir_a.join(name), &dir_b.join(name))?;
        max_rel = max_rel.max(diff.max_rel_dev);
        files.push(diff);
    }
    Ok(DiffReport { files, max_rel_dev: max_rel })
}
