use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::PipelineConfig;
use crate::error::{CliError, CliResult};

pub const STDOUT: &str = "<stdout>";

pub fn digest(bytes: &[u8]) -> String {
    format!("sha256:{}", hex::encode(Sha256::digest(bytes)))
}

/// Provenance record written next to a command's main output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub args: Vec<String>,
    pub seed: u64,
    pub config_digest: String,
    /// Fully resolved config, flags applied; feed it back with --config to
    /// reproduce the run.
    pub config: PipelineConfig,
    pub inputs: BTreeMap<String, String>,
    pub outputs: BTreeMap<String, String>,
    pub started_unix_ms: u64,
    pub wall_clock_seconds: f64,
}

impl RunManifest {
    pub fn path_for(output: &Path) -> PathBuf {
        let mut name = output.as_os_str().to_owned();
        name.push(".manifest.json");
        PathBuf::from(name)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| CliError::InputFormat(format!("{}: {e}", path.display())))
    }
}

/// Tracks what a command read and wrote so the manifest can be emitted.
pub struct RunContext {
    pub config: PipelineConfig,
    pub output: Option<PathBuf>,
    command: String,
    args: Vec<String>,
    pool: rayon::ThreadPool,
    inputs: BTreeMap<String, String>,
    outputs: BTreeMap<String, String>,
    started: Instant,
    started_unix_ms: u64,
}

impl RunContext {
    pub fn new(
        config: PipelineConfig,
        output: Option<PathBuf>,
        jobs: Option<usize>,
        command: &str,
        args: Vec<String>,
    ) -> CliResult<Self> {
        if jobs == Some(0) {
            return Err(CliError::Usage("--jobs must be positive".into()));
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.unwrap_or(0))
            .build()
            .map_err(|e| CliError::Invariant(format!("thread pool: {e}")))?;
        let started_unix_ms = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_millis() as u64)
            .unwrap_or(0);
        Ok(Self {
            config,
            output,
            command: command.to_string(),
            args,
            pool,
            inputs: BTreeMap::new(),
            outputs: BTreeMap::new(),
            started: Instant::now(),
            started_unix_ms,
        })
    }

    /// Runs `f` on the worker pool sized by --jobs.
    pub fn install<R: Send>(&self, f: impl FnOnce() -> R + Send) -> R {
        self.pool.install(f)
    }

    pub fn read_input(&mut self, path: &Path) -> CliResult<Vec<u8>> {
        let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
        self.inputs.insert(path.display().to_string(), digest(&bytes));
        Ok(bytes)
    }

    pub fn write_file(&mut self, path: &Path, bytes: &[u8]) -> CliResult<()> {
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            std::fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
        }
        std::fs::write(path, bytes).map_err(|e| CliError::io(path, e))?;
        self.outputs.insert(path.display().to_string(), digest(bytes));
        Ok(())
    }

    /// Writes the main result to --output, or stdout.
    pub fn write_main(&mut self, bytes: &[u8]) -> CliResult<()> {
        match self.output.clone() {
            Some(path) => self.write_file(&path, bytes),
            None => {
                let mut out = std::io::stdout().lock();
                out.write_all(bytes)
                    .and_then(|_| out.flush())
                    .map_err(|e| CliError::io(Path::new(STDOUT), e))?;
                self.outputs.insert(STDOUT.to_string(), digest(bytes));
                Ok(())
            }
        }
    }

    pub fn manifest(&self) -> RunManifest {
        let config_json = self.config.to_canonical_json();
        RunManifest {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: self.command.clone(),
            args: self.args.clone(),
            seed: self.config.seed,
            config_digest: digest(config_json.as_bytes()),
            config: self.config.clone(),
            inputs: self.inputs.clone(),
            outputs: self.outputs.clone(),
            started_unix_ms: self.started_unix_ms,
            wall_clock_seconds: self.started.elapsed().as_secs_f64(),
        }
    }

    /// Writes `<output>.manifest.json` when --output was given.
    pub fn finish(self) -> CliResult<Option<PathBuf>> {
        let Some(output) = &self.output else {
            log::info!("no --output given; manifest not written");
            return Ok(None);
        };
        let path = RunManifest::path_for(output);
        let text = serde_json::to_string_pretty(&self.manifest()).expect("manifest serializes");
        std::fs::write(&path, text + "\n").map_err(|e| CliError::io(&path, e))?;
        log::info!("manifest written to {}", path.display());
        Ok(Some(path))
    }
}
