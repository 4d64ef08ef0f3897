//! Output directory handling: a lock file for the duration of a command and
//! artifact writing with a provenance header.

use std::fs::{self, OpenOptions};
use std::path::{Path, PathBuf};

use invharm_core::export::with_header;

use crate::error::CliError;

pub const LOCK_FILE: &str = ".invharm.lock";

/// Exclusive hold on an output directory; released on drop.
#[derive(Debug)]
pub struct OutputDir {
    dir: PathBuf,
    lock: PathBuf,
    written: Vec<PathBuf>,
}

impl OutputDir {
    pub fn acquire(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(CliError::io(dir))?;
        let lock = dir.join(LOCK_FILE);
        match OpenOptions::new().write(true).create_new(true).open(&lock) {
            Ok(_) => Ok(Self { dir: dir.to_path_buf(), lock, written: Vec::new() }),
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => Err(CliError::Locked(dir.to_path_buf())),
            Err(e) => Err(CliError::Io { path: lock, source: e }),
        }
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    /// Writes `body` to `name` under `# key: value` provenance lines.
    pub fn write(&mut self, name: &str, meta: &[(&str, String)], body: &str) -> Result<PathBuf, CliError> {
        let path = self.path(name);
        fs::write(&path, with_header(meta, body)).map_err(CliError::io(&path))?;
        self.written.push(path.clone());
        Ok(path)
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }
}

impl Drop for OutputDir {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.lock);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn second_acquire_fails_until_release() {
        let tmp = tempfile::tempdir().unwrap();
        let first = OutputDir::acquire(tmp.path()).unwrap();
        assert!(matches!(OutputDir::acquire(tmp.path()), Err(CliError::Locked(_))));
        drop(first);
        assert!(!tmp.path().join(LOCK_FILE).exists());
        OutputDir::acquire(tmp.path()).unwrap();
    }
}
