#![no_main]

use libfuzzer_sys::fuzz_target;
use siot_trust::graph::{
    assemble_trace, parse_communities_csv, parse_friends_csv, parse_interactions_csv,
    parse_nodes_csv,
};

// Full ingestion path: the input is split into the four trace files on
// 0xFF bytes, parsed, and assembled with referential validation.
fuzz_target!(|data: &[u8]| {
    let mut sections = data.splitn(4, |&b| b == 0xFF);
    let nodes = sections.next().unwrap_or_default();
    let friends = sections.next().unwrap_or_default();
    let communities = sections.next().unwrap_or_default();
    let interactions = sections.next().unwrap_or_default();

    let (Ok(nodes), Ok(friends), Ok(communities), Ok(interactions)) = (
        parse_nodes_csv(nodes),
        parse_friends_csv(friends),
        parse_communities_csv(communities),
        parse_interactions_csv(interactions),
    ) else {
        return;
    };
    if let Ok(ingest) = assemble_trace(nodes, friends, communities, interactions) {
        // assembled graphs must uphold their invariants
        let _ = ingest.graph.interacting_pairs();
        let _ = ingest.graph.pair_stats();
    }
});
