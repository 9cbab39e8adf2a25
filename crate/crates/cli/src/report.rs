//! Result records and output plumbing.

use std::ffi::OsString;
use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use bohr_core::Complex;

use crate::error::CliError;

/// Machine-readable outcome of one command. Keys serialize in a fixed order
/// and floats in shortest round-trip form, so equal inputs give equal bytes.
#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Record {
    pub command: String,
    pub inputs_digest: String,
    pub result: Value,
    pub witnesses: Value,
    pub residuals: Value,
    pub seed: Option<u64>,
}

impl Record {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("records always serialize");
        s.push('\n');
        s
    }
}

/// SHA-256 over the argument vector (minus the output path) and the bytes of
/// every input file, each length-prefixed.
pub fn inputs_digest(args: &[OsString], files: &[&[u8]]) -> String {
    let mut h = Sha256::new();
    let mut skip = false;
    for a in args.iter().skip(1) {
        let s = a.to_string_lossy();
        if skip {
            skip = false;
            continue;
        }
        if s == "--out" {
            skip = true;
            continue;
        }
        if s.starts_with("--out=") {
            continue;
        }
        h.update((s.len() as u64).to_le_bytes());
        h.update(s.as_bytes());
    }
    for f in files {
        h.update((f.len() as u64).to_le_bytes());
        h.update(f);
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// JSON number, or a string for the non-finite values JSON cannot carry.
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else if x.is_nan() {
        json!("nan")
    } else if x > 0.0 {
        json!("inf")
    } else {
        json!("-inf")
    }
}

pub fn complex(z: Complex) -> Value {
    json!({ "re": num(z.re), "im": num(z.im) })
}

/// `re,im` CSV with a header row; `{}` formatting is locale independent.
pub fn points_csv(points: &[Complex]) -> String {
    let mut s = String::with_capacity(points.len() * 40 + 8);
    s.push_str("re,im\n");
    for p in points {
        s.push_str(&format!("{},{}\n", p.re, p.im));
    }
    s
}

/// Writes to `out` atomically (temporary file in the same directory, then
/// rename), or to stdout.
pub fn write_output(out: Option<&Path>, content: &str) -> Result<(), CliError> {
    let io = |path: &Path| {
        let path = path.display().to_string();
        move |source| CliError::Io { path, source }
    };
    match out {
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(content.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(io(Path::new("<stdout>")))
        }
        Some(path) => {
            let dir = match path.parent() {
                Some(p) if !p.as_os_str().is_empty() => p,
                _ => Path::new("."),
            };
            let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io(path))?;
            tmp.write_all(content.as_bytes()).map_err(io(path))?;
            tmp.as_file().sync_all().map_err(io(path))?;
            tmp.persist(path).map_err(|e| io(path)(e.error))?;
            Ok(())
        }
    }
}
