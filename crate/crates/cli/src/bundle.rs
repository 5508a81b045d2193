//! Results bundles: a directory that appears complete or not at all.
//!
//! Files are written into a hidden staging directory next to the target and
//! moved into place by a single rename on commit.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::CliError;

#[derive(Debug)]
pub struct Bundle {
    target: PathBuf,
    staging: PathBuf,
    force: bool,
    committed: bool,
    warnings: Vec<String>,
}

impl Bundle {
    pub fn create(target: &Path, force: bool) -> Result<Self, CliError> {
        if target.exists() && !force {
            return Err(CliError::OutputExists(target.to_path_buf()));
        }
        let name = target
            .file_name()
            .ok_or_else(|| CliError::io("output path", std::io::Error::other("output path has no final component")))?;
        let parent = match target.parent() {
            Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
            _ => PathBuf::from("."),
        };
        fs::create_dir_all(&parent).map_err(|e| CliError::io(format!("creating {}", parent.display()), e))?;
        let staging = parent.join(format!(".{}.partial-{}", name.to_string_lossy(), std::process::id()));
        if staging.exists() {
            fs::remove_dir_all(&staging).map_err(|e| CliError::io("clearing stale staging directory", e))?;
        }
        fs::create_dir(&staging).map_err(|e| CliError::io(format!("creating {}", staging.display()), e))?;
        Ok(Self {
            target: target.to_path_buf(),
            staging,
            force,
            committed: false,
            warnings: Vec::new(),
        })
    }

    /// Writes `name` through `fill`.
    pub fn write<F>(&self, name: &str, fill: F) -> Result<(), CliError>
    where
        F: FnOnce(&mut dyn Write) -> std::io::Result<()>,
    {
        let path = self.staging.join(name);
        let file = fs::File::create(&path).map_err(|e| CliError::io(format!("creating {name}"), e))?;
        let mut out = BufWriter::new(file);
        fill(&mut out)
            .and_then(|_| out.flush())
            .map_err(|e| CliError::io(format!("writing {name}"), e))
    }

    pub fn staged_path(&self, name: &str) -> PathBuf {
        self.staging.join(name)
    }

    pub fn warn(&mut self, message: impl Into<String>) {
        let message = message.into();
        log::warn!("{message}");
        self.warnings.push(message);
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// Moves the staged files into place and returns the final path.
    pub fn commit(mut self) -> Result<PathBuf, CliError> {
        if !self.warnings.is_empty() {
            let text = self.warnings.join("\n") + "\n";
            fs::write(self.staging.join("warnings.txt"), text).map_err(|e| CliError::io("writing warnings.txt", e))?;
        }
        if self.target.exists() {
            if !self.force {
                return Err(CliError::OutputExists(self.target.clone()));
            }
            fs::remove_dir_all(&self.target)
                .map_err(|e| CliError::io(format!("removing {}", self.target.display()), e))?;
        }
        fs::rename(&self.staging, &self.target)
            .map_err(|e| CliError::io(format!("moving results to {}", self.target.display()), e))?;
        self.committed = true;
        Ok(self.target.clone())
    }
}

impl Drop for Bundle {
    fn drop(&mut self) {
        if !self.committed {
            let _ = fs::remove_dir_all(&self.staging);
        }
    }
}
