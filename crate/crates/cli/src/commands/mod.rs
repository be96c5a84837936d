pub mod analyze;
pub mod estimate;
pub mod sample_init;
pub mod schedule_info;
pub mod simulate;

use std::path::{Path, PathBuf};

use sigleak_core::{io as core_io, Tensor};

use crate::error::{as_io, CliError};

/// Lists input tensors (.slt, .ppm, .pgm) in deterministic name order and
/// loads them; shapes must agree.
pub fn load_input_dir(dir: &Path) -> Result<(Vec<PathBuf>, Vec<Tensor>), CliError> {
    let entries = std::fs::read_dir(dir)
        .map_err(|e| CliError::io(format!("cannot read {}: {e}", dir.display())))?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| {
            matches!(
                p.extension().and_then(|e| e.to_str()),
                Some("slt") | Some("ppm") | Some("pgm")
            )
        })
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(CliError::io(format!(
            "no .slt/.ppm/.pgm inputs in {}",
            dir.display()
        )));
    }
    let mut tensors = Vec::with_capacity(paths.len());
    for path in &paths {
        let tensor = match path.extension().and_then(|e| e.to_str()) {
            Some("slt") => as_io(core_io::read_tensor(path), &path.display().to_string())?,
            _ => as_io(core_io::read_pnm(path), &path.display().to_string())?,
        };
        if let Some(first) = tensors.first() {
            let first: &Tensor = first;
            if first.shape() != tensor.shape() {
                return Err(CliError::io(format!(
                    "{} has shape {:?}, expected {:?}",
                    path.display(),
                    tensor.shape(),
                    first.shape()
                )));
            }
        }
        tensors.push(tensor);
    }
    Ok((paths, tensors))
}

/// Parses an `.slt` dtype flag.
pub fn parse_dtype(text: &str) -> Result<core_io::Dtype, CliError> {
    match text {
        "f32" => Ok(core_io::Dtype::F32),
        "f64" => Ok(core_io::Dtype::F64),
        other => Err(CliError::usage(format!("unknown dtype `{other}` (expected f32 or f64)"))),
    }
}
