//! Run manifest: what was run, with which constants, and what it produced.

use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use super::config::RunConfig;
use crate::error::Result;
use crate::ledger::CoeffLedger;
use crate::scalar::Real;
use crate::shear::HypothesisCertificate;

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest<T> {
    pub tool_version: String,
    pub command: String,
    /// Config file the run was loaded from.
    pub source: String,
    pub config: RunConfig,
    pub ledger: CoeffLedger<T>,
    pub hypothesis: HypothesisCertificate<T>,
    /// Seconds since the Unix epoch.
    pub started: f64,
    pub finished: f64,
    pub outputs: Vec<String>,
    pub exit_status: i32,
}

impl<T: Real> RunManifest<T> {
    /// Manifests are written last, atomically.
    pub fn write(&self, path: &Path) -> Result<()> {
        super::write_json(path, self)
    }
}

pub fn unix_now() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0)
}
