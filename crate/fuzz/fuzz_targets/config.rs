#![no_main]
use lattice_shells::config::{Overrides, RunConfig};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &str| {
    // Small cap so accepted inputs never enumerate large lattices later.
    let overrides = Overrides { cap: Some(1 << 12), ..Default::default() };
    let _ = RunConfig::parse(data, &overrides);
});
