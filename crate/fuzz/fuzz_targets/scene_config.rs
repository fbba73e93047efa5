#![no_main]

use libfuzzer_sys::fuzz_target;
use prequant_cli::config::SceneConfig;
use prequant_cli::{run, Command, Options};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if SceneConfig::parse(text).is_err() {
        return;
    }
    // commands whose cost is bounded by config validation limits
    for cmd in [Command::Holonomy, Command::Cocycle] {
        let _ = run(cmd, text, &Options::default());
    }
});
