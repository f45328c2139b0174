#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    // both ground-truth table parsers share the input
    let _ = siot_trust::aggregate::read_ground_truth_pairs(data);
    let _ = siot_trust::sim::read_ground_truth_nodes(data);
});
