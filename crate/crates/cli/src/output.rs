use std::io::Write;
use std::path::Path;

use crate::error::{CliError, CliResult};

/// Write via a temp file in the target directory, then rename, so a failed
/// run never leaves a partial file behind.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let fail = |e: &dyn std::fmt::Display| CliError::output(format!("cannot write {}: {e}", path.display()));
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| fail(&e))?;
    tmp.write_all(bytes).map_err(|e| fail(&e))?;
    tmp.flush().map_err(|e| fail(&e))?;
    tmp.persist(path).map_err(|e| fail(&e.error))?;
    Ok(())
}

/// Write several outputs, checking every target directory before the first write.
pub fn write_all_atomic(files: &[(&Path, Vec<u8>)]) -> CliResult<()> {
    for (path, _) in files {
        let dir = match path.parent() {
            Some(p) if !p.as_os_str().is_empty() => p,
            _ => Path::new("."),
        };
        if !dir.is_dir() {
            return Err(CliError::output(format!(
                "cannot write {}: directory {} does not exist",
                path.display(),
                dir.display()
            )));
        }
    }
    for (path, bytes) in files {
        write_atomic(path, bytes)?;
    }
    Ok(())
}
