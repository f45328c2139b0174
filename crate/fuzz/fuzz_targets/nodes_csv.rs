#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    // must never panic; malformed input returns a parse error
    let _ = siot_trust::graph::parse_nodes_csv(data);
});
