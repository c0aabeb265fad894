use std::path::Path;

use anyhow::Context;
use funnel_core::config::ParamFile;
use serde::{Deserialize, Serialize};

use crate::{IntegrateArgs, MapArgs, SteadyArgs, SweepArgs, VibresArgs};

/// A replayable subcommand with its arguments.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "name", content = "args", rename_all = "kebab-case")]
pub enum Invocation {
    Steady(SteadyArgs),
    Sweep(SweepArgs),
    Vibres(VibresArgs),
    Integrate(IntegrateArgs),
    BistableMap(MapArgs),
}

impl Invocation {
    pub fn name(&self) -> &'static str {
        match self {
            Invocation::Steady(_) => "steady",
            Invocation::Sweep(_) => "sweep",
            Invocation::Vibres(_) => "vibres",
            Invocation::Integrate(_) => "integrate",
            Invocation::BistableMap(_) => "bistable-map",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: Invocation,
    pub config: ParamFile,
    pub seed: u64,
    pub tool_version: String,
    pub sequential: bool,
    /// Output files relative to the output directory, manifest excluded.
    pub outputs: Vec<String>,
    pub wall_clock_s: f64,
}

pub const MANIFEST_FILE: &str = "manifest.json";

impl RunManifest {
    pub fn write(&self, dir: &Path) -> anyhow::Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(dir.join(MANIFEST_FILE), text + "\n")?;
        Ok(())
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
        let m: RunManifest = serde_json::from_str(&text)
            .map_err(|e| funnel_core::Error::Config(format!("malformed manifest {}: {e}", path.display())))?;
        m.config.validate()?;
        Ok(m)
    }
}
