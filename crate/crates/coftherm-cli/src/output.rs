//! Artifact emission helpers: stdout plus optional `--out-dir` files,
//! and the per-run manifest of resolved options.

use std::path::Path;

use anyhow::{Context, Result};

/// Six significant digits for human-readable table cells (JSON keeps
/// full precision).
pub fn sig6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    format!("{x:.5e}")
}

/// Print to stdout and, when an output directory is set, also write the
/// same bytes to `<out_dir>/<file_name>`.
pub fn emit(out_dir: Option<&Path>, file_name: &str, content: &str) -> Result<()> {
    print!("{content}");
    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir)
            .with_context(|| format!("cannot create {}", dir.display()))?;
        let path = dir.join(file_name);
        std::fs::write(&path, content)
            .with_context(|| format!("cannot write {}", path.display()))?;
    }
    Ok(())
}

/// Write `<out_dir>/manifest.json` recording the resolved options.
pub fn write_manifest(out_dir: Option<&Path>, options: &serde_json::Value) -> Result<()> {
    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir)
            .with_context(|| format!("cannot create {}", dir.display()))?;
        let path = dir.join("manifest.json");
        std::fs::write(&path, format!("{:#}\n", options))
            .with_context(|| format!("cannot write {}", path.display()))?;
    }
    Ok(())
}

/// Write a side artifact only when an out-dir is present.
pub fn emit_side(out_dir: Option<&Path>, file_name: &str, content: &str) -> Result<()> {
    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir)
            .with_context(|| format!("cannot create {}", dir.display()))?;
        let path = dir.join(file_name);
        std::fs::write(&path, content)
            .with_context(|| format!("cannot write {}", path.display()))?;
    }
    Ok(())
}
