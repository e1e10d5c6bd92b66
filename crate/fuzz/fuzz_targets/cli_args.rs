//! Fuzz target for command-line parsing.
//!
//! Splits the input on NUL bytes into an argument vector, parses it and
//! resolves the run configuration without solving anything.

#![no_main]
use clap::Parser;
use dglimit::cli::{Cli, Command, RunConfig};
use libfuzzer_sys::fuzz_target;

const MAX_INPUT_SIZE: usize = 4096;

fuzz_target!(|data: &[u8]| {
    if data.len() > MAX_INPUT_SIZE {
        return;
    }
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let args = std::iter::once("dglimit").chain(text.split('\0'));
    let Ok(cli) = Cli::try_parse_from(args) else {
        return;
    };
    let (Command::Run(a) | Command::Convergence(a)) = &cli.command;
    // Config files are covered by their own target; skip file access here.
    if a.config.is_some() {
        return;
    }
    let _ = RunConfig::from_args(a);
});
