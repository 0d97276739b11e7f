use std::fmt;
use std::path::PathBuf;

use kgprobe_core::exam::RunError;
use kgprobe_core::gateway::GatewayError;
use kgprobe_core::ingest::IngestError;
use kgprobe_core::metrics::MetricError;
use kgprobe_core::pkg::PkgError;
use kgprobe_core::registry::RegistryError;
use kgprobe_core::FormatError;

pub const USAGE: u8 = 2;
pub const IO: u8 = 3;
pub const UPSTREAM: u8 = 4;
pub const DATA: u8 = 5;

#[derive(Debug)]
pub struct Usage(pub String);

impl fmt::Display for Usage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

#[derive(Debug)]
pub struct Refused(pub PathBuf);

impl fmt::Display for Refused {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} exists; pass --force to overwrite", self.0.display())
    }
}

impl std::error::Error for Refused {}

fn gateway_code(e: &GatewayError) -> u8 {
    match e {
        GatewayError::Unavailable { .. } | GatewayError::Protocol { .. } | GatewayError::MalformedResponse(_) => {
            UPSTREAM
        }
        GatewayError::InvalidRequest(_) | GatewayError::Credential(_) => USAGE,
    }
}

fn classify(cause: &(dyn std::error::Error + 'static)) -> Option<u8> {
    if cause.is::<Usage>() {
        return Some(USAGE);
    }
    if cause.is::<Refused>() || cause.is::<std::io::Error>() {
        return Some(IO);
    }
    if let Some(e) = cause.downcast_ref::<RegistryError>() {
        return Some(match e {
            RegistryError::Unknown { .. } => USAGE,
            RegistryError::Backend(g) => gateway_code(g),
        });
    }
    if let Some(e) = cause.downcast_ref::<GatewayError>() {
        return Some(gateway_code(e));
    }
    if let Some(e) = cause.downcast_ref::<IngestError>() {
        return Some(match e {
            IngestError::Unavailable { .. } | IngestError::Protocol { .. } | IngestError::Malformed { .. } => UPSTREAM,
            IngestError::Config(_) => USAGE,
            IngestError::Io(_) => IO,
            IngestError::EmptyFrontier | IngestError::EmptyGraph | IngestError::Fixture(_) => DATA,
        });
    }
    if let Some(e) = cause.downcast_ref::<RunError>() {
        return Some(match e {
            RunError::Config(_) => USAGE,
            RunError::ExamineeUnavailable { .. } => UPSTREAM,
            RunError::Log(_) => IO,
            RunError::Pkg(_) => DATA,
        });
    }
    if let Some(e) = cause.downcast_ref::<MetricError>() {
        return Some(match e {
            MetricError::UnknownDimension(_) => USAGE,
            _ => DATA,
        });
    }
    if let Some(e) = cause.downcast_ref::<FormatError>() {
        return Some(match e {
            FormatError::Io(_) => IO,
            _ => DATA,
        });
    }
    if cause.is::<PkgError>() || cause.is::<serde_json::Error>() {
        return Some(DATA);
    }
    None
}

/// Status for a failed command: the first recognised cause in the chain
/// decides, configuration problems count as usage errors.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    err.chain().find_map(classify).unwrap_or(USAGE)
}
