use std::process::ExitCode;

use clap::Parser;
use det3d_cli::Cli;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("DET3D_LOG", "warn")).init();
    let cli = Cli::parse();
    match det3d_cli::run(&cli, std::env::args().skip(1).collect()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("det3d: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
