//! The four social trust features for an ordered (trustor, trustee) pair,
//! plus the weighted-sum baseline aggregate kept for comparison runs.
//!
//! All features land in `[0, 1]`; degenerate denominators (a trustor with
//! at most one friend, no community memberships, no exchanged messages)
//! score 0 so that missing social evidence never raises trust.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{NodeId, PairKey, PairStats, SocialGraph};

/// Index of one of the four features, in canonical order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FeatureId {
    Fs,
    Coi,
    Cop,
    Reward,
}

impl FeatureId {
    pub const ALL: [FeatureId; 4] = [
        FeatureId::Fs,
        FeatureId::Coi,
        FeatureId::Cop,
        FeatureId::Reward,
    ];

    pub fn index(self) -> usize {
        match self {
            FeatureId::Fs => 0,
            FeatureId::Coi => 1,
            FeatureId::Cop => 2,
            FeatureId::Reward => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            FeatureId::Fs => "fs",
            FeatureId::Coi => "coi",
            FeatureId::Cop => "cop",
            FeatureId::Reward => "reward",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        FeatureId::ALL.into_iter().find(|f| f.name() == name)
    }
}

/// The 4-tuple of direct-trust features for one ordered pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct TrustFeatureVector {
    pub t_fs: f64,
    pub t_coi: f64,
    pub t_cop: f64,
    pub t_reward: f64,
}

impl TrustFeatureVector {
    pub fn as_array(&self) -> [f64; 4] {
        [self.t_fs, self.t_coi, self.t_cop, self.t_reward]
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        Self {
            t_fs: a[0],
            t_coi: a[1],
            t_cop: a[2],
            t_reward: a[3],
        }
    }

    pub fn get(&self, id: FeatureId) -> f64 {
        self.as_array()[id.index()]
    }

    /// All components finite and in `[0, 1]`.
    pub fn in_range(&self) -> bool {
        self.as_array()
            .iter()
            .all(|v| v.is_finite() && (0.0..=1.0).contains(v))
    }
}

/// Weights for the linear baseline aggregate. Must be non-negative and
/// sum to 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BaselineWeights {
    pub w1: f64,
    pub w2: f64,
    pub w3: f64,
    pub w4: f64,
}

impl BaselineWeights {
    pub fn new(w1: f64, w2: f64, w3: f64, w4: f64) -> Result<Self> {
        let w = Self { w1, w2, w3, w4 };
        for v in [w1, w2, w3, w4] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::Config(format!("baseline weight {v} is invalid")));
            }
        }
        let sum = w1 + w2 + w3 + w4;
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::Config(format!(
                "baseline weights sum to {sum}, expected 1"
            )));
        }
        Ok(w)
    }

    /// Equal weights, 0.25 each.
    pub fn uniform() -> Self {
        Self {
            w1: 0.25,
            w2: 0.25,
            w3: 0.25,
            w4: 0.25,
        }
    }
}

/// Binary entropy with base-2 logarithm and the `0 log 0 = 0` convention,
/// so a perfectly balanced exchange scores exactly 1.
fn binary_entropy(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
}

/// Friendship similarity: `|F_i ∩ F_j| / (|F_i| - 1)`, clamped to `[0, 1]`.
/// Scores 0 when the trustor has at most one friend.
///
/// The intersection is taken over the raw friend sets; the clamp covers
/// the over-unity case where the trustee is not among the trustor's
/// friends but every trustor friend is shared.
pub fn friendship_similarity(graph: &SocialGraph, i: NodeId, j: NodeId) -> f64 {
    debug_assert_ne!(i, j);
    let fi = graph.friends(i);
    if fi.len() <= 1 {
        return 0.0;
    }
    let shared = fi.intersection(graph.friends(j)).count();
    (shared as f64 / (fi.len() - 1) as f64).clamp(0.0, 1.0)
}

/// Community-of-interest similarity: `|C_i ∩ C_j| / |C_i|`, 0 when the
/// trustor belongs to no community.
pub fn community_of_interest(graph: &SocialGraph, i: NodeId, j: NodeId) -> f64 {
    debug_assert_ne!(i, j);
    let ci = graph.communities(i);
    if ci.is_empty() {
        return 0.0;
    }
    let shared = ci.intersection(graph.communities(j)).count();
    shared as f64 / ci.len() as f64
}

fn pair_volumes(graph: &SocialGraph, i: NodeId, j: NodeId) -> (u64, u64) {
    let mut from_i = 0u64;
    let mut from_j = 0u64;
    for rec in graph.interactions() {
        if rec.source == i && rec.target == j {
            from_i += rec.messages;
        } else if rec.source == j && rec.target == i {
            from_j += rec.messages;
        }
    }
    (from_i, from_j)
}

fn cooperativeness_from_volumes(from_trustor: u64, from_trustee: u64) -> f64 {
    let total = from_trustor + from_trustee;
    if total == 0 {
        return 0.0;
    }
    binary_entropy(from_trustor as f64 / total as f64)
}

/// Cooperativeness: binary entropy of the trustor's share of the pair's
/// total message volume. 1 for a balanced exchange, 0 for a one-way one
/// (or when no messages were exchanged).
pub fn cooperativeness(graph: &SocialGraph, i: NodeId, j: NodeId) -> f64 {
    debug_assert_ne!(i, j);
    let (from_i, from_j) = pair_volumes(graph, i, j);
    cooperativeness_from_volumes(from_i, from_j)
}

fn reward_from_counts(interactions: u64, failures: u64) -> f64 {
    let int = interactions as f64;
    let unsuccessful = failures as f64;
    ((int - unsuccessful).abs() / int) * (-(unsuccessful / int)).exp()
}

/// Reward/punishment: success fraction with an exponential penalty on the
/// failure fraction, over all interactions between the pair (both
/// directions). Errors when the pair never interacted.
pub fn reward(graph: &SocialGraph, i: NodeId, j: NodeId) -> Result<f64> {
    debug_assert_ne!(i, j);
    let mut count = 0u64;
    let mut failures = 0u64;
    for rec in graph.interactions() {
        let between = (rec.source == i && rec.target == j) || (rec.source == j && rec.target == i);
        if between {
            count += 1;
            if !rec.success {
                failures += 1;
            }
        }
    }
    if count == 0 {
        return Err(Error::UndefinedFeature {
            trustor: i.0,
            trustee: j.0,
            reason: "no interactions between the pair".to_string(),
        });
    }
    Ok(reward_from_counts(count, failures))
}

/// All four features for the ordered pair `(i, j)`.
pub fn feature_vector(graph: &SocialGraph, i: NodeId, j: NodeId) -> Result<TrustFeatureVector> {
    Ok(TrustFeatureVector {
        t_fs: friendship_similarity(graph, i, j),
        t_coi: community_of_interest(graph, i, j),
        t_cop: cooperativeness(graph, i, j),
        t_reward: reward(graph, i, j)?,
    })
}

fn vector_from_stats(
    graph: &SocialGraph,
    pair: PairKey,
    stats: &PairStats,
) -> TrustFeatureVector {
    let (from_trustor, from_trustee) = if pair.trustor < pair.trustee {
        (stats.msgs_low_to_high, stats.msgs_high_to_low)
    } else {
        (stats.msgs_high_to_low, stats.msgs_low_to_high)
    };
    TrustFeatureVector {
        t_fs: friendship_similarity(graph, pair.trustor, pair.trustee),
        t_coi: community_of_interest(graph, pair.trustor, pair.trustee),
        t_cop: cooperativeness_from_volumes(from_trustor, from_trustee),
        t_reward: reward_from_counts(stats.records, stats.failures),
    }
}

/// Feature vectors for every interacting pair, in ascending pair order.
/// Equivalent to calling the four feature operations per pair, computed
/// in one pass over the interaction log.
pub fn feature_matrix(graph: &SocialGraph) -> Vec<(PairKey, TrustFeatureVector)> {
    let stats = graph.pair_stats();
    let mut rows = Vec::new();
    for ((low, high), s) in &stats {
        rows.push((PairKey::new(*low, *high), vector_from_stats(graph, PairKey::new(*low, *high), s)));
        rows.push((PairKey::new(*high, *low), vector_from_stats(graph, PairKey::new(*high, *low), s)));
    }
    rows.sort_by_key(|(pair, _)| *pair);
    rows
}

/// Eq-style linear aggregate of the four features.
pub fn baseline_weighted_trust(v: &TrustFeatureVector, w: &BaselineWeights) -> f64 {
    w.w1 * v.t_fs + w.w2 * v.t_coi + w.w3 * v.t_cop + w.w4 * v.t_reward
}

// ---------------------------------------------------------------------------
// Feature-matrix CSV
// ---------------------------------------------------------------------------

pub const FEATURES_HEADER: &str = "trustor,trustee,t_fs,t_coi,t_cop,t_reward";
const FEATURES_FILE: &str = "features.csv";

/// Write the feature matrix CSV (`trustor,trustee,t_fs,t_coi,t_cop,t_reward`,
/// six decimal digits).
pub fn write_feature_matrix<W: Write>(
    mut out: W,
    rows: &[(PairKey, TrustFeatureVector)],
) -> std::io::Result<()> {
    writeln!(out, "{FEATURES_HEADER}")?;
    for (pair, v) in rows {
        writeln!(
            out,
            "{},{},{:.6},{:.6},{:.6},{:.6}",
            pair.trustor, pair.trustee, v.t_fs, v.t_coi, v.t_cop, v.t_reward
        )?;
    }
    Ok(())
}

/// Read a feature matrix CSV back. Values must be finite and in `[0, 1]`.
pub fn read_feature_matrix<R: Read>(input: R) -> Result<Vec<(PairKey, TrustFeatureVector)>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(input);
    let parse_err = |line: u64, message: String| Error::Parse {
        file: FEATURES_FILE.to_string(),
        line,
        message,
    };
    {
        let headers = reader.headers().map_err(|e| {
            parse_err(1, e.to_string())
        })?;
        let got = headers.iter().collect::<Vec<_>>().join(",");
        if got != FEATURES_HEADER {
            return Err(parse_err(1, format!("expected header `{FEATURES_HEADER}`, got `{got}`")));
        }
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            parse_err(line, e.to_string())
        })?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if record.len() != 6 {
            return Err(parse_err(line, format!("expected 6 fields, got {}", record.len())));
        }
        let id = |idx: usize, name: &str| -> Result<NodeId> {
            let raw = record.get(idx).unwrap_or("");
            raw.parse::<u32>()
                .map(NodeId)
                .map_err(|_| parse_err(line, format!("field `{name}` is not a node id: `{raw}`")))
        };
        let val = |idx: usize, name: &str| -> Result<f64> {
            let raw = record.get(idx).unwrap_or("");
            let v: f64 = raw
                .parse()
                .map_err(|_| parse_err(line, format!("field `{name}` is not a number: `{raw}`")))?;
            if !v.is_finite() || !(0.0..=1.0).contains(&v) {
                return Err(parse_err(line, format!("field `{name}` out of [0,1]: `{raw}`")));
            }
            Ok(v)
        };
        let trustor = id(0, "trustor")?;
        let trustee = id(1, "trustee")?;
        if trustor == trustee {
            return Err(parse_err(line, format!("self-pair ({trustor}, {trustee})")));
        }
        rows.push((
            PairKey::new(trustor, trustee),
            TrustFeatureVector {
                t_fs: val(2, "t_fs")?,
                t_coi: val(3, "t_coi")?,
                t_cop: val(4, "t_cop")?,
                t_reward: val(5, "t_reward")?,
            },
        ));
    }
    Ok(rows)
}

/// Convenience: features keyed by pair.
pub fn feature_map(graph: &SocialGraph) -> BTreeMap<PairKey, TrustFeatureVector> {
    feature_matrix(graph).into_iter().collect()
}
