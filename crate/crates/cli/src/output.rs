//! Output plumbing: atomic writes, round-trippable float formatting
//! (17 significant digits in JSON and CSV), and the run manifest every
//! result file embeds.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::ser::Formatter;

use crate::errors::CliError;

/// Reproducibility record embedded in every result document.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub inputs: Vec<String>,
    /// Fully resolved parameter set (sorted keys, deterministic).
    pub parameters: serde_json::Map<String, serde_json::Value>,
    pub tool_version: String,
    pub seed: Option<u64>,
}

impl RunManifest {
    pub fn new(command: &str, inputs: Vec<String>, seed: Option<u64>) -> Self {
        RunManifest {
            command: command.to_string(),
            inputs,
            parameters: serde_json::Map::new(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
        }
    }

    pub fn param(&mut self, key: &str, value: impl Serialize) {
        self.parameters.insert(
            key.to_string(),
            serde_json::to_value(value).expect("serializable parameter"),
        );
    }
}

/// JSON formatter printing every float with 17 significant digits, so a
/// reader recovers the exact binary value.
struct SigDigits;

impl Formatter for SigDigits {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()>
    where
        W: ?Sized + Write,
    {
        write!(writer, "{}", fmt_f64(value))
    }
}

/// `{:.16e}` gives one digit before the point and 16 after: 17
/// significant digits, valid as a JSON number.
pub fn fmt_f64(value: f64) -> String {
    format!("{value:.16e}")
}

pub fn to_json_string(value: &impl Serialize) -> Result<String, CliError> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SigDigits);
    value
        .serialize(&mut ser)
        .map_err(|e| CliError::Other(format!("serialization failed: {e}")))?;
    let mut out = String::from_utf8(buf).expect("serde_json emits utf-8");
    out.push('\n');
    Ok(out)
}

/// Write-then-rename so readers never observe a partial file.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    let tmp: PathBuf = dir.join(format!(
        ".{}.tmp-{}",
        path.file_name()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "out".to_string()),
        std::process::id()
    ));
    std::fs::write(&tmp, contents)
        .map_err(|e| CliError::Other(format!("cannot write {}: {e}", tmp.display())))?;
    std::fs::rename(&tmp, path)
        .map_err(|e| CliError::Other(format!("cannot rename into {}: {e}", path.display())))?;
    Ok(())
}

/// Emit to `--out` when given, stdout otherwise.
pub fn emit(out: Option<&Path>, contents: &str) -> Result<(), CliError> {
    match out {
        Some(path) => write_atomic(path, contents),
        None => {
            print!("{contents}");
            Ok(())
        }
    }
}

/// The manifest line embedded at the top of CSV outputs.
pub fn manifest_comment(manifest: &RunManifest) -> Result<String, CliError> {
    let mut line = String::from("# manifest: ");
    let json = to_json_string(manifest)?;
    line.push_str(json.trim_end());
    line.push('\n');
    Ok(line)
}
