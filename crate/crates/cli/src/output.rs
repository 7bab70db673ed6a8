use std::fs;
use std::path::{Path, PathBuf};

use amalgam_core::Result;
use serde::Serialize;

/// Writes files into the output directory and announces each path.
pub struct OutDir {
    dir: PathBuf,
}

impl OutDir {
    pub fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self { dir: dir.to_path_buf() })
    }

    pub fn write(&self, name: &str, contents: &str) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, contents)?;
        println!("wrote {}", path.display());
        Ok(())
    }

    pub fn write_json<T: Serialize>(&self, name: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(name, &text)
    }
}

/// Percentages are shown to one decimal; files keep full precision.
pub fn pct(x: f64) -> String {
    format!("{x:.1}")
}
