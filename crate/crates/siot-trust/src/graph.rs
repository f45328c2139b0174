//! Social-network data model and trace ingestion.
//!
//! A trace is four CSV files (`nodes.csv`, `friends.csv`, `communities.csv`,
//! `interactions.csv`) describing devices, their declared friendships,
//! their interest-community memberships, and a time-ordered message log.
//! Ingestion validates everything up front so the rest of the crate can
//! assume a well-formed [`SocialGraph`].

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense node identifier, `0..node_count`.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default,
)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Ordered (trustor, trustee) pair. `(i, j)` and `(j, i)` are distinct
/// because trust is directional.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
pub struct PairKey {
    pub trustor: NodeId,
    pub trustee: NodeId,
}

impl PairKey {
    pub fn new(trustor: NodeId, trustee: NodeId) -> Self {
        Self { trustor, trustee }
    }

    /// The same pair seen from the other side.
    pub fn reversed(self) -> Self {
        Self {
            trustor: self.trustee,
            trustee: self.trustor,
        }
    }
}

impl fmt::Display for PairKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.trustor, self.trustee)
    }
}

/// One directed message/transaction event between two nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InteractionRecord {
    /// Seconds since the start of the trace.
    pub timestamp: u64,
    pub source: NodeId,
    pub target: NodeId,
    /// Number of messages exchanged in this event; always >= 1.
    pub messages: u64,
    pub success: bool,
}

/// Immutable social graph: symmetric friendships, community memberships,
/// and a timestamp-sorted interaction log.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SocialGraph {
    friends: Vec<BTreeSet<NodeId>>,
    communities: Vec<BTreeSet<u64>>,
    interactions: Vec<InteractionRecord>,
}

/// Aggregate message/interaction counts for one unordered pair.
///
/// The key orders the endpoints as `(low, high)`; `msgs_low_to_high` is the
/// total message volume sent by the lower-numbered node.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PairStats {
    pub records: u64,
    pub failures: u64,
    pub msgs_low_to_high: u64,
    pub msgs_high_to_low: u64,
}

impl SocialGraph {
    /// Build a graph from already-validated parts. Used by the simulator;
    /// trace files go through [`assemble_trace`] instead.
    pub fn from_parts(
        node_count: u32,
        friend_pairs: &[(NodeId, NodeId)],
        memberships: &[(NodeId, u64)],
        mut interactions: Vec<InteractionRecord>,
    ) -> Result<Self> {
        let n = node_count as usize;
        let mut friends = vec![BTreeSet::new(); n];
        for &(a, b) in friend_pairs {
            check_node(a, node_count)?;
            check_node(b, node_count)?;
            if a == b {
                return Err(Error::Validation(format!("self-friendship on node {a}")));
            }
            friends[a.index()].insert(b);
            friends[b.index()].insert(a);
        }
        let mut communities = vec![BTreeSet::new(); n];
        for &(node, community) in memberships {
            check_node(node, node_count)?;
            communities[node.index()].insert(community);
        }
        for rec in &interactions {
            check_node(rec.source, node_count)?;
            check_node(rec.target, node_count)?;
            if rec.source == rec.target {
                return Err(Error::Validation(format!(
                    "self-interaction on node {}",
                    rec.source
                )));
            }
            if rec.messages == 0 {
                return Err(Error::Validation(
                    "interaction with zero messages".to_string(),
                ));
            }
        }
        interactions.sort_by_key(|r| r.timestamp);
        Ok(Self {
            friends,
            communities,
            interactions,
        })
    }

    pub fn node_count(&self) -> u32 {
        self.friends.len() as u32
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.node_count()).map(NodeId)
    }

    /// Friend set of `node`.
    pub fn friends(&self, node: NodeId) -> &BTreeSet<NodeId> {
        &self.friends[node.index()]
    }

    /// Community memberships of `node`.
    pub fn communities(&self, node: NodeId) -> &BTreeSet<u64> {
        &self.communities[node.index()]
    }

    /// Interaction log, sorted by timestamp (stable on ties).
    pub fn interactions(&self) -> &[InteractionRecord] {
        &self.interactions
    }

    /// All friendships, one `(low, high)` entry per unordered pair.
    pub fn friend_pairs(&self) -> Vec<(NodeId, NodeId)> {
        let mut pairs = Vec::new();
        for i in self.nodes() {
            for &j in self.friends(i) {
                if i < j {
                    pairs.push((i, j));
                }
            }
        }
        pairs
    }

    /// All community memberships as `(node, community)` rows.
    pub fn membership_pairs(&self) -> Vec<(NodeId, u64)> {
        let mut rows = Vec::new();
        for node in self.nodes() {
            for &c in self.communities(node) {
                rows.push((node, c));
            }
        }
        rows
    }

    /// Friends common to `i` and `j`, excluding the two nodes themselves.
    pub fn common_friends(&self, i: NodeId, j: NodeId) -> BTreeSet<NodeId> {
        self.friends[i.index()]
            .intersection(&self.friends[j.index()])
            .copied()
            .filter(|&r| r != i && r != j)
            .collect()
    }

    /// Every ordered pair with at least one interaction between the two
    /// nodes, in ascending `(trustor, trustee)` order.
    pub fn interacting_pairs(&self) -> Vec<PairKey> {
        let mut set = BTreeSet::new();
        for rec in &self.interactions {
            set.insert((rec.source, rec.target));
            set.insert((rec.target, rec.source));
        }
        set.into_iter()
            .map(|(a, b)| PairKey::new(a, b))
            .collect()
    }

    /// Per-pair aggregates over the whole interaction log, keyed by
    /// `(low, high)` node id.
    pub fn pair_stats(&self) -> BTreeMap<(NodeId, NodeId), PairStats> {
        let mut stats: BTreeMap<(NodeId, NodeId), PairStats> = BTreeMap::new();
        for rec in &self.interactions {
            let (low, high) = if rec.source < rec.target {
                (rec.source, rec.target)
            } else {
                (rec.target, rec.source)
            };
            let entry = stats.entry((low, high)).or_default();
            entry.records += 1;
            if !rec.success {
                entry.failures += 1;
            }
            if rec.source == low {
                entry.msgs_low_to_high += rec.messages;
            } else {
                entry.msgs_high_to_low += rec.messages;
            }
        }
        stats
    }
}

fn check_node(node: NodeId, node_count: u32) -> Result<()> {
    if node.0 >= node_count {
        return Err(Error::Validation(format!(
            "node id {node} out of range (node count {node_count})"
        )));
    }
    Ok(())
}

/// Result of ingesting a trace: the dense graph plus the original id of
/// each dense node (identity when the source ids were already `0..N-1`).
#[derive(Debug, Clone)]
pub struct TraceIngest {
    pub graph: SocialGraph,
    pub original_ids: Vec<u64>,
}

impl TraceIngest {
    /// True when the source node ids were already dense `0..N-1`.
    pub fn identity_mapping(&self) -> bool {
        self.original_ids
            .iter()
            .enumerate()
            .all(|(dense, &orig)| orig == dense as u64)
    }
}

// ---------------------------------------------------------------------------
// CSV parsing
// ---------------------------------------------------------------------------

pub const NODES_FILE: &str = "nodes.csv";
pub const FRIENDS_FILE: &str = "friends.csv";
pub const COMMUNITIES_FILE: &str = "communities.csv";
pub const INTERACTIONS_FILE: &str = "interactions.csv";

/// Raw interaction row before node-id remapping.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RawInteraction {
    pub timestamp: u64,
    pub source: u64,
    pub target: u64,
    pub messages: u64,
    pub success: bool,
}

fn csv_reader<R: Read>(input: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(input)
}

fn record_line(record: &csv::StringRecord) -> u64 {
    record.position().map(|p| p.line()).unwrap_or(0)
}

fn parse_err(file: &str, line: u64, message: impl Into<String>) -> Error {
    Error::Parse {
        file: file.to_string(),
        line,
        message: message.into(),
    }
}

fn map_csv_err(file: &str, err: csv::Error) -> Error {
    let line = match err.position() {
        Some(pos) => pos.line(),
        None => 0,
    };
    parse_err(file, line, err.to_string())
}

fn check_header(
    file: &str,
    reader: &mut csv::Reader<impl Read>,
    expected: &[&str],
) -> Result<()> {
    let headers = reader.headers().map_err(|e| map_csv_err(file, e))?;
    let got: Vec<&str> = headers.iter().collect();
    if got != expected {
        return Err(parse_err(
            file,
            1,
            format!("expected header `{}`, got `{}`", expected.join(","), got.join(",")),
        ));
    }
    Ok(())
}

fn field_u64(file: &str, record: &csv::StringRecord, idx: usize, name: &str) -> Result<u64> {
    let line = record_line(record);
    let raw = record
        .get(idx)
        .ok_or_else(|| parse_err(file, line, format!("missing field `{name}`")))?;
    raw.parse::<u64>()
        .map_err(|_| parse_err(file, line, format!("field `{name}` is not a non-negative integer: `{raw}`")))
}

fn expect_fields(file: &str, record: &csv::StringRecord, n: usize) -> Result<()> {
    if record.len() != n {
        return Err(parse_err(
            file,
            record_line(record),
            format!("expected {n} fields, got {}", record.len()),
        ));
    }
    Ok(())
}

/// Parse `nodes.csv` (`node_id`). Rejects duplicate ids.
pub fn parse_nodes_csv<R: Read>(input: R) -> Result<Vec<u64>> {
    let file = NODES_FILE;
    let mut reader = csv_reader(input);
    check_header(file, &mut reader, &["node_id"])?;
    let mut seen = BTreeSet::new();
    let mut nodes = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| map_csv_err(file, e))?;
        expect_fields(file, &record, 1)?;
        let id = field_u64(file, &record, 0, "node_id")?;
        if !seen.insert(id) {
            return Err(parse_err(
                file,
                record_line(&record),
                format!("duplicate node id {id}"),
            ));
        }
        nodes.push(id);
    }
    Ok(nodes)
}

/// Parse `friends.csv` (`node_id,friend_id`). Rows are directed; the
/// graph assembly symmetrizes them.
pub fn parse_friends_csv<R: Read>(input: R) -> Result<Vec<(u64, u64)>> {
    let file = FRIENDS_FILE;
    let mut reader = csv_reader(input);
    check_header(file, &mut reader, &["node_id", "friend_id"])?;
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| map_csv_err(file, e))?;
        expect_fields(file, &record, 2)?;
        let a = field_u64(file, &record, 0, "node_id")?;
        let b = field_u64(file, &record, 1, "friend_id")?;
        rows.push((a, b));
    }
    Ok(rows)
}

/// Parse `communities.csv` (`node_id,community_id`).
pub fn parse_communities_csv<R: Read>(input: R) -> Result<Vec<(u64, u64)>> {
    let file = COMMUNITIES_FILE;
    let mut reader = csv_reader(input);
    check_header(file, &mut reader, &["node_id", "community_id"])?;
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| map_csv_err(file, e))?;
        expect_fields(file, &record, 2)?;
        let node = field_u64(file, &record, 0, "node_id")?;
        let community = field_u64(file, &record, 1, "community_id")?;
        rows.push((node, community));
    }
    Ok(rows)
}

/// Parse `interactions.csv`
/// (`timestamp,source,target,messages,success` with success in {0,1}).
pub fn parse_interactions_csv<R: Read>(input: R) -> Result<Vec<RawInteraction>> {
    let file = INTERACTIONS_FILE;
    let mut reader = csv_reader(input);
    check_header(
        file,
        &mut reader,
        &["timestamp", "source", "target", "messages", "success"],
    )?;
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| map_csv_err(file, e))?;
        expect_fields(file, &record, 5)?;
        let line = record_line(&record);
        let timestamp = field_u64(file, &record, 0, "timestamp")?;
        let source = field_u64(file, &record, 1, "source")?;
        let target = field_u64(file, &record, 2, "target")?;
        let messages = field_u64(file, &record, 3, "messages")?;
        if messages == 0 {
            return Err(parse_err(file, line, "field `messages` must be >= 1"));
        }
        let success = match record.get(4) {
            Some("0") => false,
            Some("1") => true,
            other => {
                return Err(parse_err(
                    file,
                    line,
                    format!("field `success` must be 0 or 1, got `{}`", other.unwrap_or("")),
                ))
            }
        };
        rows.push(RawInteraction {
            timestamp,
            source,
            target,
            messages,
            success,
        });
    }
    Ok(rows)
}

/// Assemble parsed rows into a validated graph.
///
/// Source node ids may be sparse; they are remapped to dense `0..N-1` in
/// ascending order of the original id, and the mapping is returned in
/// [`TraceIngest::original_ids`]. Friendships are symmetrized by union,
/// interactions sorted by timestamp (stable on ties).
pub fn assemble_trace(
    nodes: Vec<u64>,
    friends: Vec<(u64, u64)>,
    memberships: Vec<(u64, u64)>,
    interactions: Vec<RawInteraction>,
) -> Result<TraceIngest> {
    let mut original_ids = nodes;
    original_ids.sort_unstable();
    if original_ids.len() > u32::MAX as usize {
        return Err(Error::Validation("too many nodes".to_string()));
    }
    let node_count = original_ids.len() as u32;
    let index: BTreeMap<u64, NodeId> = original_ids
        .iter()
        .enumerate()
        .map(|(dense, &orig)| (orig, NodeId(dense as u32)))
        .collect();
    let resolve = |file: &str, id: u64| -> Result<NodeId> {
        index.get(&id).copied().ok_or_else(|| Error::UnknownNode {
            file: file.to_string(),
            line: 0,
            id,
        })
    };

    let mut friend_pairs = Vec::with_capacity(friends.len());
    for (a, b) in friends {
        let a = resolve(FRIENDS_FILE, a)?;
        let b = resolve(FRIENDS_FILE, b)?;
        if a == b {
            return Err(Error::Validation(format!("self-friendship on node {a}")));
        }
        friend_pairs.push((a, b));
    }

    let mut member_pairs = Vec::with_capacity(memberships.len());
    for (node, community) in memberships {
        let node = resolve(COMMUNITIES_FILE, node)?;
        member_pairs.push((node, community));
    }

    let mut records = Vec::with_capacity(interactions.len());
    for raw in interactions {
        let source = resolve(INTERACTIONS_FILE, raw.source)?;
        let target = resolve(INTERACTIONS_FILE, raw.target)?;
        if source == target {
            return Err(Error::Validation(format!(
                "self-interaction on node {source}"
            )));
        }
        records.push(InteractionRecord {
            timestamp: raw.timestamp,
            source,
            target,
            messages: raw.messages,
            success: raw.success,
        });
    }

    let graph = SocialGraph::from_parts(node_count, &friend_pairs, &member_pairs, records)?;
    Ok(TraceIngest {
        graph,
        original_ids,
    })
}

fn open(dir: &Path, name: &str) -> Result<std::fs::File> {
    let path = dir.join(name);
    std::fs::File::open(&path).map_err(|e| Error::io(path, e))
}

/// Ingest the four trace CSVs from `dir`.
pub fn ingest_trace(dir: &Path) -> Result<TraceIngest> {
    let nodes = parse_nodes_csv(open(dir, NODES_FILE)?)?;
    let friends = parse_friends_csv(open(dir, FRIENDS_FILE)?)?;
    let memberships = parse_communities_csv(open(dir, COMMUNITIES_FILE)?)?;
    let interactions = parse_interactions_csv(open(dir, INTERACTIONS_FILE)?)?;
    assemble_trace(nodes, friends, memberships, interactions)
}

/// Write the four trace CSVs for `graph` into `dir` (created if missing).
/// Friendships are emitted once per unordered pair; node ids are dense.
pub fn write_trace(dir: &Path, graph: &SocialGraph) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let write = |name: &str, body: String| -> Result<()> {
        let path = dir.join(name);
        let mut f = std::fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
        f.write_all(body.as_bytes()).map_err(|e| Error::io(&path, e))
    };

    let mut nodes = String::from("node_id\n");
    for node in graph.nodes() {
        nodes.push_str(&format!("{node}\n"));
    }
    write(NODES_FILE, nodes)?;

    let mut friends = String::from("node_id,friend_id\n");
    for i in graph.nodes() {
        for &j in graph.friends(i) {
            if i < j {
                friends.push_str(&format!("{i},{j}\n"));
            }
        }
    }
    write(FRIENDS_FILE, friends)?;

    let mut communities = String::from("node_id,community_id\n");
    for node in graph.nodes() {
        for &c in graph.communities(node) {
            communities.push_str(&format!("{node},{c}\n"));
        }
    }
    write(COMMUNITIES_FILE, communities)?;

    let mut interactions = String::from("timestamp,source,target,messages,success\n");
    for rec in graph.interactions() {
        interactions.push_str(&format!(
            "{},{},{},{},{}\n",
            rec.timestamp,
            rec.source,
            rec.target,
            rec.messages,
            u8::from(rec.success)
        ));
    }
    write(INTERACTIONS_FILE, interactions)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph_from_strs(
        nodes: &str,
        friends: &str,
        communities: &str,
        interactions: &str,
    ) -> Result<TraceIngest> {
        assemble_trace(
            parse_nodes_csv(nodes.as_bytes())?,
            parse_friends_csv(friends.as_bytes())?,
            parse_communities_csv(communities.as_bytes())?,
            parse_interactions_csv(interactions.as_bytes())?,
        )
    }

    const NODES2: &str = "node_id\n0\n1\n";
    const EMPTY_FRIENDS: &str = "node_id,friend_id\n";
    const EMPTY_COMMUNITIES: &str = "node_id,community_id\n";
    const EMPTY_INTERACTIONS: &str = "timestamp,source,target,messages,success\n";

    #[test]
    fn friendship_is_symmetrized() {
        let ingest = graph_from_strs(
            NODES2,
            "node_id,friend_id\n0,1\n",
            EMPTY_COMMUNITIES,
            EMPTY_INTERACTIONS,
        )
        .unwrap();
        let g = ingest.graph;
        assert_eq!(g.friends(NodeId(0)).iter().copied().collect::<Vec<_>>(), vec![NodeId(1)]);
        assert_eq!(g.friends(NodeId(1)).iter().copied().collect::<Vec<_>>(), vec![NodeId(0)]);
    }

    #[test]
    fn interactions_sorted_by_timestamp() {
        let ingest = graph_from_strs(
            NODES2,
            EMPTY_FRIENDS,
            EMPTY_COMMUNITIES,
            "timestamp,source,target,messages,success\n5,0,1,1,1\n3,1,0,2,0\n",
        )
        .unwrap();
        let ts: Vec<u64> = ingest.graph.interactions().iter().map(|r| r.timestamp).collect();
        assert_eq!(ts, vec![3, 5]);
    }

    #[test]
    fn timestamp_sort_is_stable() {
        let ingest = graph_from_strs(
            "node_id\n0\n1\n2\n",
            EMPTY_FRIENDS,
            EMPTY_COMMUNITIES,
            "timestamp,source,target,messages,success\n7,0,1,1,1\n7,1,2,1,1\n7,0,2,1,1\n",
        )
        .unwrap();
        let targets: Vec<u32> = ingest.graph.interactions().iter().map(|r| r.target.0).collect();
        assert_eq!(targets, vec![1, 2, 2]);
    }

    #[test]
    fn self_friendship_rejected() {
        let err = graph_from_strs(
            NODES2,
            "node_id,friend_id\n0,0\n",
            EMPTY_COMMUNITIES,
            EMPTY_INTERACTIONS,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Validation(_)), "{err}");
    }

    #[test]
    fn dangling_node_rejected() {
        let err = graph_from_strs(
            NODES2,
            "node_id,friend_id\n0,7\n",
            EMPTY_COMMUNITIES,
            EMPTY_INTERACTIONS,
        )
        .unwrap_err();
        assert!(matches!(err, Error::UnknownNode { id: 7, .. }), "{err}");
    }

    #[test]
    fn malformed_row_reports_line() {
        let err = parse_interactions_csv(
            "timestamp,source,target,messages,success\n1,0,1,1,1\nbogus,0,1,1,1\n".as_bytes(),
        )
        .unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other}"),
        }
    }

    #[test]
    fn comment_lines_ignored() {
        let nodes = parse_nodes_csv("node_id\n# a comment\n0\n1\n".as_bytes()).unwrap();
        assert_eq!(nodes, vec![0, 1]);
    }

    #[test]
    fn zero_messages_rejected() {
        let err = parse_interactions_csv(
            "timestamp,source,target,messages,success\n1,0,1,0,1\n".as_bytes(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Parse { .. }), "{err}");
    }

    #[test]
    fn success_flag_must_be_binary() {
        let err = parse_interactions_csv(
            "timestamp,source,target,messages,success\n1,0,1,1,yes\n".as_bytes(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Parse { .. }), "{err}");
    }

    #[test]
    fn sparse_ids_remapped_dense() {
        let ingest = graph_from_strs(
            "node_id\n10\n3\n42\n",
            "node_id,friend_id\n10,3\n",
            "node_id,community_id\n42,5\n",
            "timestamp,source,target,messages,success\n0,10,42,1,1\n",
        )
        .unwrap();
        assert_eq!(ingest.original_ids, vec![3, 10, 42]);
        assert!(!ingest.identity_mapping());
        let g = &ingest.graph;
        assert_eq!(g.node_count(), 3);
        // original 10 -> dense 1, original 3 -> dense 0, original 42 -> dense 2
        assert!(g.friends(NodeId(1)).contains(&NodeId(0)));
        assert!(g.communities(NodeId(2)).contains(&5));
        assert_eq!(g.interactions()[0].source, NodeId(1));
        assert_eq!(g.interactions()[0].target, NodeId(2));
    }

    #[test]
    fn interacting_pairs_both_directions() {
        let ingest = graph_from_strs(
            NODES2,
            EMPTY_FRIENDS,
            EMPTY_COMMUNITIES,
            "timestamp,source,target,messages,success\n0,0,1,1,1\n",
        )
        .unwrap();
        let pairs = ingest.graph.interacting_pairs();
        assert_eq!(
            pairs,
            vec![
                PairKey::new(NodeId(0), NodeId(1)),
                PairKey::new(NodeId(1), NodeId(0))
            ]
        );
    }

    #[test]
    fn interacting_pairs_empty_log() {
        let ingest =
            graph_from_strs(NODES2, EMPTY_FRIENDS, EMPTY_COMMUNITIES, EMPTY_INTERACTIONS).unwrap();
        assert!(ingest.graph.interacting_pairs().is_empty());
    }

    #[test]
    fn all_pairs_interacting_gives_n_times_n_minus_1() {
        // 76 nodes, one record per unordered pair.
        let n = 76u32;
        let mut body = String::from("timestamp,source,target,messages,success\n");
        for i in 0..n {
            for j in (i + 1)..n {
                body.push_str(&format!("0,{i},{j},1,1\n"));
            }
        }
        let mut nodes = String::from("node_id\n");
        for i in 0..n {
            nodes.push_str(&format!("{i}\n"));
        }
        let ingest =
            graph_from_strs(&nodes, EMPTY_FRIENDS, EMPTY_COMMUNITIES, &body).unwrap();
        assert_eq!(ingest.graph.interacting_pairs().len(), 76 * 75);
    }

    #[test]
    fn common_friends_excludes_endpoints() {
        let ingest = graph_from_strs(
            "node_id\n0\n1\n2\n3\n",
            "node_id,friend_id\n0,1\n0,2\n3,2\n",
            EMPTY_COMMUNITIES,
            EMPTY_INTERACTIONS,
        )
        .unwrap();
        let g = &ingest.graph;
        let cf: Vec<NodeId> = g.common_friends(NodeId(0), NodeId(3)).into_iter().collect();
        assert_eq!(cf, vec![NodeId(2)]);
        // mutual friendship is not a common friend
        assert!(g.common_friends(NodeId(0), NodeId(1)).is_empty());
    }

    #[test]
    fn pair_stats_aggregates_directionally() {
        let ingest = graph_from_strs(
            NODES2,
            EMPTY_FRIENDS,
            EMPTY_COMMUNITIES,
            "timestamp,source,target,messages,success\n0,0,1,3,1\n1,1,0,2,0\n2,0,1,4,0\n",
        )
        .unwrap();
        let stats = ingest.graph.pair_stats();
        let s = stats[&(NodeId(0), NodeId(1))];
        assert_eq!(s.records, 3);
        assert_eq!(s.failures, 2);
        assert_eq!(s.msgs_low_to_high, 7);
        assert_eq!(s.msgs_high_to_low, 2);
    }
}
