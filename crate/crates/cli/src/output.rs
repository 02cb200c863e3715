//! Output files with embedded run metadata.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::params::Params;
use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

pub fn build_id() -> String {
    format!(
        "trigraph-{}+{}",
        env!("CARGO_PKG_VERSION"),
        option_env!("TRIGRAPH_BUILD_ID").unwrap_or("local")
    )
}

#[derive(Clone, Debug, Serialize)]
pub struct Meta {
    pub schema_version: u32,
    pub seed: Option<u64>,
    pub config_hash: String,
    pub build: String,
    pub params: BTreeMap<String, String>,
}

impl Meta {
    pub fn new(p: &Params, seed: Option<u64>) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            seed,
            config_hash: p.hash(),
            build: build_id(),
            params: p.entries().clone(),
        }
    }

    /// First line of every CSV and edge-list file.
    pub fn comment(&self) -> String {
        let seed = self.seed.map_or("none".to_string(), |s| s.to_string());
        format!(
            "# trigraph schema={} seed={} config_hash={} build={}",
            self.schema_version, seed, self.config_hash, self.build
        )
    }
}

/// Writes `path` with the metadata comment line followed by `body`.
pub fn write_text<F>(path: &Path, meta: &Meta, body: F) -> Result<(), CliError>
where
    F: FnOnce(&mut dyn Write) -> trigraph::Result<()>,
{
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "{}", meta.comment())?;
    body(&mut w)?;
    w.flush()?;
    Ok(())
}

/// JSON object `value` with a `meta` field added.
pub fn with_meta<T: Serialize>(value: &T, meta: &Meta) -> Result<serde_json::Value, CliError> {
    let mut v = serde_json::to_value(value)?;
    match v.as_object_mut() {
        Some(obj) => {
            obj.insert("meta".into(), serde_json::to_value(meta)?);
            Ok(v)
        }
        None => Ok(serde_json::json!({ "value": v, "meta": meta })),
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T, meta: &Meta) -> Result<(), CliError> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, &with_meta(value, meta)?)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

/// Prints one line to stdout; a closed pipe (e.g. `| head`) is not an error.
pub fn emit(line: &str) -> Result<(), CliError> {
    let mut out = std::io::stdout().lock();
    match writeln!(out, "{line}").and_then(|_| out.flush()) {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        r => Ok(r?),
    }
}
