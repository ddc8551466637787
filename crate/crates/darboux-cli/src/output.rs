//! Output files are written atomically: contents go to a temporary file in
//! the target directory, which is then renamed over the destination.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use tempfile::NamedTempFile;

pub fn write_atomic(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir)
        .with_context(|| format!("creating output directory {}", dir.display()))?;
    let mut tmp = NamedTempFile::new_in(dir)
        .with_context(|| format!("creating temporary file in {}", dir.display()))?;
    tmp.write_all(contents.as_bytes())
        .context("writing output contents")?;
    let target = dir.join(name);
    tmp.persist(&target)
        .with_context(|| format!("renaming into place at {}", target.display()))?;
    Ok(target)
}
