use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::CliError;
use crate::manifest::{manifest_path, RunManifest};

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    #[serde(flatten)]
    result: &'a T,
    manifest: &'a RunManifest,
}

fn write_bytes(out: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, bytes).map_err(|source| CliError::Io { path: path.display().to_string(), source }),
        None => std::io::stdout()
            .write_all(bytes)
            .map_err(|source| CliError::Io { path: "<stdout>".into(), source }),
    }
}

fn finish(out: Option<&Path>, manifest: &RunManifest, bytes: &[u8]) -> Result<(), CliError> {
    write_bytes(out, bytes)?;
    if let Some(path) = out {
        let side = manifest_path(path);
        let mut text = serde_json::to_vec_pretty(manifest).expect("manifest serializes");
        text.push(b'\n');
        write_bytes(Some(&side), &text)?;
    }
    Ok(())
}

fn record_output(out: Option<&Path>, manifest: &mut RunManifest) {
    manifest.outputs = out.map(|p| vec![p.display().to_string(), manifest_path(p).display().to_string()]).unwrap_or_default();
}

/// JSON document with the manifest embedded under `manifest`.
pub fn emit_json<T: Serialize>(out: Option<&Path>, manifest: &mut RunManifest, result: &T) -> Result<(), CliError> {
    record_output(out, manifest);
    let mut bytes = serde_json::to_vec_pretty(&Envelope { result, manifest }).expect("result serializes");
    bytes.push(b'\n');
    finish(out, manifest, &bytes)
}

/// RFC 4180 CSV (CRLF line endings, minimal quoting).
pub fn emit_csv(
    out: Option<&Path>,
    manifest: &mut RunManifest,
    fill: impl FnOnce(&mut csv::Writer<Vec<u8>>) -> Result<(), csv::Error>,
) -> Result<(), CliError> {
    record_output(out, manifest);
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(Vec::new());
    fill(&mut w)?;
    let bytes = w.into_inner().map_err(|e| CliError::Io { path: "<csv buffer>".into(), source: e.into_error() })?;
    finish(out, manifest, &bytes)
}
