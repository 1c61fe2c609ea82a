use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

/// Files of one run, written together: if any write fails, everything
/// written so far (and the output directory, if this run created it) is
/// removed.
#[derive(Default)]
pub struct Outputs {
    files: Vec<(PathBuf, Vec<u8>)>,
}

impl Outputs {
    pub fn add(&mut self, path: impl Into<PathBuf>, bytes: impl Into<Vec<u8>>) {
        self.files.push((path.into(), bytes.into()));
    }

    pub fn add_json(&mut self, path: impl Into<PathBuf>, value: &impl Serialize) -> Result<()> {
        let mut bytes = serde_json::to_vec_pretty(value)?;
        bytes.push(b'\n');
        self.add(path, bytes);
        Ok(())
    }

    pub fn commit(self) -> Result<()> {
        let mut created_dirs: Vec<PathBuf> = Vec::new();
        let mut written: Vec<PathBuf> = Vec::new();
        let result = (|| -> Result<()> {
            for (path, bytes) in &self.files {
                if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                    create_dirs(parent, &mut created_dirs)?;
                }
                fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))?;
                written.push(path.clone());
            }
            Ok(())
        })();
        if result.is_err() {
            for path in &written {
                let _ = fs::remove_file(path);
            }
            for dir in created_dirs.iter().rev() {
                let _ = fs::remove_dir(dir);
            }
        }
        result
    }
}

fn create_dirs(dir: &Path, created: &mut Vec<PathBuf>) -> Result<()> {
    if dir.is_dir() {
        return Ok(());
    }
    if let Some(parent) = dir.parent().filter(|p| !p.as_os_str().is_empty()) {
        create_dirs(parent, created)?;
    }
    fs::create_dir(dir).with_context(|| format!("creating {}", dir.display()))?;
    created.push(dir.to_path_buf());
    Ok(())
}

pub fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn failed_commit_leaves_nothing_behind() {
        let tmp = tempfile::tempdir().unwrap();
        let out = tmp.path().join("run");
        let mut o = Outputs::default();
        o.add(out.join("a.txt"), "a");
        // a directory where a file should go makes the second write fail
        fs::create_dir_all(tmp.path().join("blocked")).unwrap();
        o.add(tmp.path().join("blocked"), "b");
        assert!(o.commit().is_err());
        assert!(!out.exists());
    }

    #[test]
    fn commit_writes_everything() {
        let tmp = tempfile::tempdir().unwrap();
        let mut o = Outputs::default();
        o.add(tmp.path().join("x/y/z.txt"), "z");
        o.add_json(tmp.path().join("x/v.json"), &[1, 2]).unwrap();
        o.commit().unwrap();
        assert_eq!(read(&tmp.path().join("x/y/z.txt")).unwrap(), "z");
        assert!(read(&tmp.path().join("x/v.json")).unwrap().ends_with("]\n"));
    }
}
