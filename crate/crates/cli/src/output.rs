use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use svarica::{Error, Result};

/// Artifact directory that deletes what it wrote unless committed.
pub struct Outputs {
    dir: PathBuf,
    created_dir: bool,
    files: Vec<PathBuf>,
    committed: bool,
}

impl Outputs {
    pub fn create(dir: &Path) -> Result<Self> {
        let created_dir = !dir.exists();
        fs::create_dir_all(dir)?;
        Ok(Self { dir: dir.to_path_buf(), created_dir, files: Vec::new(), committed: false })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// Registers `name` for cleanup and returns its path.
    pub fn path(&mut self, name: &str) -> PathBuf {
        let p = self.dir.join(name);
        self.files.push(p.clone());
        p
    }

    pub fn file(&mut self, name: &str) -> Result<fs::File> {
        Ok(fs::File::create(self.path(name))?)
    }

    pub fn write_string(&mut self, name: &str, contents: &str) -> Result<()> {
        fs::write(self.path(name), contents)?;
        Ok(())
    }

    /// Names of every registered artifact, in write order.
    pub fn names(&self) -> Vec<String> {
        self.files.iter().filter_map(|p| p.file_name()).map(|n| n.to_string_lossy().into_owned()).collect()
    }

    /// Writes `manifest.toml` and keeps every artifact.
    pub fn commit<C: Serialize>(mut self, subcommand: &str, seed: Option<u64>, config: &C) -> Result<()> {
        #[derive(Serialize)]
        struct Run<'a> {
            tool: &'a str,
            version: &'a str,
            subcommand: &'a str,
            #[serde(skip_serializing_if = "Option::is_none")]
            seed: Option<u64>,
            artifacts: Vec<String>,
        }
        #[derive(Serialize)]
        struct Manifest<'a, C> {
            run: Run<'a>,
            config: &'a C,
        }
        let mut artifacts = self.names();
        artifacts.push("manifest.toml".into());
        let manifest = Manifest {
            run: Run { tool: env!("CARGO_PKG_NAME"), version: env!("CARGO_PKG_VERSION"), subcommand, seed, artifacts },
            config,
        };
        let text = toml::to_string(&manifest).map_err(|e| Error::Config(e.to_string()))?;
        self.write_string("manifest.toml", &text)?;
        self.committed = true;
        Ok(())
    }
}

impl Drop for Outputs {
    fn drop(&mut self) {
        if self.committed {
            return;
        }
        for f in &self.files {
            let _ = fs::remove_file(f);
        }
        if self.created_dir {
            let _ = fs::remove_dir(&self.dir);
        }
    }
}
