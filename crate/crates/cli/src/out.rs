use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::Value;

use crate::Fail;

/// Pretty JSON with sorted keys and a trailing newline.
pub fn render(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values always serialize");
    s.push('\n');
    s
}

/// Writes through a sibling temporary file and a rename.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), Fail> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().ok_or_else(|| Fail::Io(format!("{} is not a file path", path.display())))?;
    let tmp: PathBuf = dir.join(format!(".{}.tmp", name.to_string_lossy()));
    let io = |e: std::io::Error| Fail::Io(format!("{}: {e}", path.display()));
    {
        let mut f = fs::File::create(&tmp).map_err(io)?;
        f.write_all(contents).map_err(io)?;
        f.sync_all().map_err(io)?;
    }
    fs::rename(&tmp, path).map_err(io)
}

/// The report goes to `out` when given, otherwise to stdout.
pub fn emit(v: &Value, out: Option<&Path>) -> Result<(), Fail> {
    let text = render(v);
    match out {
        Some(p) => write_atomic(p, text.as_bytes()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Rows of strings as CSV.
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<(), Fail> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| Fail::Io(e.to_string());
    w.write_record(header).map_err(err)?;
    for r in rows {
        w.write_record(r).map_err(err)?;
    }
    let bytes = w.into_inner().map_err(|e| Fail::Io(e.to_string()))?;
    write_atomic(path, &bytes)
}

pub fn read_json(path: &Path) -> Result<Value, Fail> {
    let text = fs::read_to_string(path).map_err(|e| Fail::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Fail::Core(besov_core::Error::Parse(format!("{}: {e}", path.display()))))
}
