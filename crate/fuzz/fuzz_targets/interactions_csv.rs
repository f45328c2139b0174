#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let _ = siot_trust::graph::parse_interactions_csv(data);
});
