//! The `revkit` command line: argument grammar, config files, manifests
//! and the subcommands.

pub mod args;
mod commands;
pub mod config;
pub mod output;

use std::ffi::OsString;
use std::io::Write;

use clap::{CommandFactory, FromArgMatches};

use args::Cli;
use output::{config_hash, default_manifest_path, CliError, Manifest};

/// Parses `argv` (program name first), runs the subcommand and returns the
/// process exit code: 0 on success, 1 on data errors, 2 on usage errors.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let json_errors = argv.iter().any(|a| a == "--json-errors");
    let report = |e: &CliError| {
        let mut err = std::io::stderr().lock();
        if json_errors {
            let _ = writeln!(err, "{}", e.to_json());
        } else {
            let _ = writeln!(err, "revkit: error: {e}");
        }
        e.exit_code()
    };

    let cmd = Cli::command();
    let argv = match config::inject(&cmd, argv) {
        Ok(a) => a,
        Err(e) => return report(&e),
    };
    let matches = match cmd.try_get_matches_from(argv) {
        Ok(m) => m,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return 0;
            }
            if json_errors {
                return report(&CliError::Usage(e.kind().to_string() + ": " + e.to_string().lines().next().unwrap_or("")));
            }
            let _ = e.print();
            return 2;
        }
    };
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(c) => c,
        Err(e) => return report(&CliError::Usage(e.to_string())),
    };
    let _ = env_logger::Builder::new()
        .parse_filters(&cli.global.log_level)
        .format_timestamp(None)
        .try_init();

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.global.threads {
        if n == 0 {
            return report(&CliError::Usage("--threads must be at least 1".into()));
        }
        pool = pool.num_threads(n);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => return report(&CliError::data(format!("thread pool: {e}"))),
    };
    let result = pool.install(|| {
        let done = commands::dispatch(&cli)?;
        let path = cli
            .global
            .manifest
            .clone()
            .or_else(|| done.outputs.first().map(|o| default_manifest_path(o)));
        if let Some(path) = path {
            Manifest {
                command: cli.command.name(),
                seed: cli.global.seed,
                config_hash: config_hash(&cli.command, cli.global.seed),
                inputs: done.inputs,
                outputs: done.outputs,
                metadata: done.metadata,
            }
            .write(&path)?;
        }
        Ok(())
    });
    match result {
        Ok(()) => 0,
        Err(e) => report(&e),
    }
}
