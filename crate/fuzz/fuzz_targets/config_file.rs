//! Fuzz target for TOML run configuration files.
//!
//! Parses arbitrary text as a config file and merges it with empty
//! command-line flags. Neither step may panic.

#![no_main]
use dglimit::cli::{parse_config_file, RunArgs, RunConfig};
use libfuzzer_sys::fuzz_target;

const MAX_INPUT_SIZE: usize = 16 * 1024;

fuzz_target!(|data: &[u8]| {
    if data.len() > MAX_INPUT_SIZE {
        return;
    }
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(file) = parse_config_file(text) {
        if let Ok(cfg) = RunConfig::merge(file, &RunArgs::default()) {
            assert!(cfg.nx >= 1, "merged config has no cells");
            let _ = cfg.output_dir();
        }
    }
});
