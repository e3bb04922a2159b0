//! Instance loading shared by the CLI and tests.

use std::path::Path;

use thiserror::Error;
use wdn_core::Network;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InstanceFormat {
    Auto,
    Json,
    Inp,
}

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("cannot read `{path}`: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("cannot infer format of `{0}`; pass --format")]
    UnknownExtension(String),
    #[error(transparent)]
    Native(#[from] ingest_io::NativeError),
    #[error(transparent)]
    Inp(#[from] ingest_io::InpError),
}

/// Load a network from a native JSON or EPANET-INP file. INP imports may
/// carry warnings.
pub fn load_instance(
    path: &Path,
    format: InstanceFormat,
) -> Result<(Network, Vec<String>), InstanceError> {
    let text = std::fs::read_to_string(path).map_err(|source| InstanceError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let format = match format {
        InstanceFormat::Auto => match path.extension().and_then(|e| e.to_str()) {
            Some("json") => InstanceFormat::Json,
            Some("inp") => InstanceFormat::Inp,
            _ => return Err(InstanceError::UnknownExtension(path.display().to_string())),
        },
        other => other,
    };
    match format {
        InstanceFormat::Json => Ok((ingest_io::parse_native(&text)?, Vec::new())),
        InstanceFormat::Inp => {
            let imp = ingest_io::parse_inp(&text)?;
            Ok((imp.network, imp.warnings))
        }
        InstanceFormat::Auto => unreachable!(),
    }
}
