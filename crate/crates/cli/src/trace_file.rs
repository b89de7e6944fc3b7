use std::fs;
use std::io;
use std::path::Path;

use lpoa_core::driver::RunTrace;
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

/// Timing data, kept apart from the deterministic part of the trace.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Metadata {
    pub wall_ms_total: f64,
    pub wall_ms_per_iteration: Vec<f64>,
}

/// On-disk trace: the run trace plus a schema version and metadata.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraceDocument {
    pub schema_version: u32,
    #[serde(flatten)]
    pub trace: RunTrace,
    #[serde(default)]
    pub metadata: Metadata,
}

impl TraceDocument {
    pub fn new(trace: RunTrace) -> Self {
        let metadata =
            Metadata { wall_ms_total: trace.wall_ms.iter().sum(), wall_ms_per_iteration: trace.wall_ms.clone() };
        Self { schema_version: SCHEMA_VERSION, trace, metadata }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("trace serializes")
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let doc: Self = serde_json::from_str(text).map_err(|e| e.to_string())?;
        if doc.schema_version != SCHEMA_VERSION {
            return Err(format!("unsupported schema_version {}", doc.schema_version));
        }
        Ok(doc)
    }
}

/// Writes through a temporary sibling file and renames it into place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> io::Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = path.with_file_name(format!(".{name}.tmp{}", std::process::id()));
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path)
}
