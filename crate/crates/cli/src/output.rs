use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde_json::{json, Value};

/// Provenance embedded in every artifact. No timestamps, so reruns with the
/// same inputs produce identical bytes.
pub fn meta(seeds: Value) -> Value {
    let args: Vec<String> = std::env::args().collect();
    json!({
        "tool": "tg",
        "version": env!("CARGO_PKG_VERSION"),
        "command_line": args,
        "seeds": seeds,
    })
}

/// One-line comment form of [`meta`] for text formats.
pub fn meta_line(meta: &Value) -> String {
    meta.to_string()
}

/// Writes `path` through a temporary sibling that is renamed on success and
/// removed on failure, so no partial file is ever left behind.
pub fn write_atomic(path: &Path, body: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    let tmp = tmp_path(path);
    let result = (|| -> Result<()> {
        let f = File::create(&tmp).with_context(|| format!("cannot create {}", tmp.display()))?;
        let mut w = BufWriter::new(f);
        body(&mut w)?;
        w.flush()?;
        drop(w);
        fs::rename(&tmp, path).with_context(|| format!("cannot write {}", path.display()))?;
        Ok(())
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result
}

fn tmp_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".partial");
    path.with_file_name(name)
}

/// Writes to `path` atomically, or to stdout when no path is given.
pub fn write_or_stdout(path: Option<&Path>, body: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    match path {
        Some(p) => write_atomic(p, body),
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            body(&mut lock)?;
            lock.flush()?;
            Ok(())
        }
    }
}

pub fn write_json<T: serde::Serialize>(path: Option<&Path>, value: &T) -> Result<()> {
    write_or_stdout(path, |w| {
        serde_json::to_writer_pretty(&mut *w, value)?;
        writeln!(w)?;
        Ok(())
    })
}
