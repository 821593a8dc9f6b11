//! Output files with reproducibility headers.
//!
//! Every file starts with a comment line carrying the toolkit version, the
//! config hash and the seed, so identical inputs yield byte-identical
//! outputs and any result can be traced back to its scenario.

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use sha2::{Digest, Sha256};

pub struct Reporter {
    out_dir: PathBuf,
    header: String,
}

impl Reporter {
    pub fn new(out_dir: &Path, config_text: &str, seed: u64) -> Result<Reporter> {
        std::fs::create_dir_all(out_dir)
            .with_context(|| format!("cannot create output dir {}", out_dir.display()))?;
        let mut hasher = Sha256::new();
        hasher.update(config_text.as_bytes());
        let hash = hasher.finalize();
        let hex: String = hash.iter().take(8).map(|b| format!("{b:02x}")).collect();
        Ok(Reporter {
            out_dir: out_dir.to_path_buf(),
            header: format!(
                "# nlds {} config={hex} seed={seed}",
                env!("CARGO_PKG_VERSION")
            ),
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }

    /// Writes a file with the reproducibility header prepended.
    pub fn write(&self, name: &str, body: &str) -> Result<PathBuf> {
        let path = self.path(name);
        let mut f = std::fs::File::create(&path)
            .with_context(|| format!("cannot create {}", path.display()))?;
        writeln!(f, "{}", self.header)?;
        f.write_all(body.as_bytes())?;
        Ok(path)
    }
}

/// Fixed-format float rendering for CSV cells: shortest round-trip form.
pub fn fmt(v: f64) -> String {
    format!("{v}")
}
