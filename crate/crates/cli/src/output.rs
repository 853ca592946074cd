//! Staged artifact writing: every file is rendered to a temporary file in
//! the destination directory first and only renamed into place once all of
//! them were written.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use tempfile::NamedTempFile;

use crate::CliError;

pub struct Artifacts {
    root: PathBuf,
    staged: Vec<(NamedTempFile, PathBuf)>,
}

impl Artifacts {
    /// Creates `root` if needed and checks that it accepts new files.
    pub fn new(root: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(root).map_err(|e| {
            CliError::Input(format!(
                "cannot create output directory {}: {e}",
                root.display()
            ))
        })?;
        NamedTempFile::new_in(root).map_err(|e| {
            CliError::Input(format!(
                "output directory {} is not writable: {e}",
                root.display()
            ))
        })?;
        Ok(Self {
            root: root.to_path_buf(),
            staged: Vec::new(),
        })
    }

    pub fn add<F>(&mut self, relative: &str, render: F) -> Result<(), CliError>
    where
        F: FnOnce(&mut dyn Write) -> std::io::Result<()>,
    {
        let dest = self.root.join(relative);
        let dir = dest.parent().unwrap_or(&self.root).to_path_buf();
        fs::create_dir_all(&dir).map_err(|e| io_err(&dir, e))?;
        let mut tmp = NamedTempFile::new_in(&dir).map_err(|e| io_err(&dir, e))?;
        {
            let mut w = BufWriter::new(tmp.as_file_mut());
            render(&mut w).map_err(|e| io_err(&dest, e))?;
            w.flush().map_err(|e| io_err(&dest, e))?;
        }
        self.staged.push((tmp, dest));
        Ok(())
    }

    pub fn add_json<T: Serialize>(&mut self, relative: &str, value: &T) -> Result<(), CliError> {
        self.add(relative, |w| {
            serde_json::to_writer_pretty(&mut *w, value)?;
            writeln!(w)
        })
    }

    /// Moves every staged file into place.
    pub fn commit(self) -> Result<Vec<PathBuf>, CliError> {
        let mut written = Vec::with_capacity(self.staged.len());
        for (tmp, dest) in self.staged {
            tmp.persist(&dest).map_err(|e| io_err(&dest, e.error))?;
            written.push(dest);
        }
        Ok(written)
    }
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Input(format!("{}: {e}", path.display()))
}
