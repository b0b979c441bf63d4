//! The `det3d` command-line tool as a library, so the commands can be
//! driven from tests.

pub mod args;
pub mod commands;
pub mod config;
pub mod error;
pub mod manifest;

pub use args::Cli;
pub use config::PipelineConfig;
pub use error::{CliError, CliResult};
pub use manifest::{RunContext, RunManifest};

/// Resolves the config (flags over file over defaults), runs the command
/// and writes its manifest.
pub fn run(cli: &Cli, argv: Vec<String>) -> CliResult<()> {
    let mut config = match &cli.global.config {
        Some(path) => PipelineConfig::load(path)?,
        None => PipelineConfig::default(),
    };
    if let Some(seed) = cli.global.seed {
        config.seed = seed;
    }
    cli.command.apply_overrides(&mut config);
    config.validate()?;
    let mut ctx = RunContext::new(
        config,
        cli.global.output.clone(),
        cli.global.jobs,
        cli.command.name(),
        argv,
    )?;
    cli.command.execute(&mut ctx)?;
    ctx.finish()?;
    Ok(())
}
