//! Atomic file output and terminal tables.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use revrank_core::evaluation::ClassificationReport;
use serde::Serialize;
use tempfile::NamedTempFile;

use crate::error::{CliError, Result};

/// Writes through a temporary file in the target directory, then renames it
/// into place, so readers never see a partial file.
pub fn write_atomic(path: &Path, fill: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    let out_err = |source| CliError::Output {
        path: path.to_path_buf(),
        source,
    };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).map_err(out_err)?;
    let mut tmp = NamedTempFile::new_in(dir).map_err(out_err)?;
    {
        let mut w = std::io::BufWriter::new(tmp.as_file_mut());
        fill(&mut w)?;
        w.flush().map_err(out_err)?;
    }
    tmp.persist(path).map_err(|e| out_err(e.error))?;
    log::info!("wrote {}", path.display());
    Ok(())
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(revrank_core::Error::from)?;
    write_atomic(path, |w| {
        w.write_all(text.as_bytes())
            .and_then(|_| w.write_all(b"\n"))
            .map_err(|source| CliError::Output {
                path: path.to_path_buf(),
                source,
            })
    })
}

/// Per-class precision, recall, F1 and support, one block per classifier.
pub fn class_table(rows: &[(&str, &ClassificationReport)]) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<12}{:>6}{:>11}{:>9}{:>10}{:>9}",
        "Classifier", "Class", "Precision", "Recall", "F1-score", "Support"
    );
    for (name, report) in rows {
        for (i, m) in report.per_class.iter().enumerate() {
            let label = if i == 0 { *name } else { "" };
            let _ = writeln!(
                s,
                "{:<12}{:>6}{:>11.4}{:>9.4}{:>10.4}{:>9}",
                label, m.label, m.precision, m.recall, m.f1, m.support
            );
        }
        let auc = report.auc.map_or("undefined".to_string(), |a| format!("{a:.4}"));
        let _ = writeln!(s, "{:<12}accuracy {:.4}  auc {}", "", report.accuracy, auc);
    }
    s
}
