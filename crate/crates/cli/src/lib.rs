//! The `koslinker` command line: ingest, train, links and serve.

pub mod commands;
pub mod config;
pub mod serve;

use std::io::Write;

use anyhow::{Context, Result};

pub use config::{Cli, Command};

pub fn run(cli: Cli, out: &mut dyn Write) -> Result<()> {
    match &cli.command {
        Command::Ingest(a) => commands::ingest_cmd(a, out).map(drop),
        Command::Train(a) => commands::train_cmd(a, out).map(drop),
        Command::Links(a) => commands::links_cmd(a, out).map(drop),
        Command::Synthesize(a) => commands::synthesize_cmd(a, out),
        Command::Serve(a) => tokio::runtime::Runtime::new()
            .context("cannot start the runtime")?
            .block_on(serve::serve(a)),
    }
}
