//! Trust-score estimation: fuse a trustor's direct trust label with the
//! recommendations of common friends into a single binary verdict.
//!
//! The branch structure is transcribed literally from the estimation
//! algorithm, including its asymmetries:
//!
//! * no recommendations → the direct label decides (a neutral direct label
//!   resolves to untrustworthy, the conservative default);
//! * direct untrustworthy → stays untrustworthy unless the trustworthy
//!   share `|T| / (total + 1)` reaches the threshold θ;
//! * direct trustworthy → mirrored, with the untrustworthy share;
//! * direct neutral → decided purely by `|T| > |U|`, ignoring θ.
//!
//! The `+ 1` in the share denominators is kept verbatim (the trustor's own
//! implicit vote), and both threshold comparisons use `>=`.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::cluster::TrustLabel;
use crate::error::{Error, Result};
use crate::graph::{NodeId, PairKey, SocialGraph};

/// Counts of trustworthy / untrustworthy / neutral opinions collected
/// from common friends.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecommendationSet {
    pub t_count: u64,
    pub u_count: u64,
    pub n_count: u64,
}

impl RecommendationSet {
    pub fn new(t_count: u64, u_count: u64, n_count: u64) -> Self {
        Self {
            t_count,
            u_count,
            n_count,
        }
    }

    pub fn total(&self) -> u64 {
        self.t_count + self.u_count + self.n_count
    }
}

/// Threshold configuration for recommendation overrides.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AggregationConfig {
    pub theta: f64,
}

impl AggregationConfig {
    pub const DEFAULT_THETA: f64 = 0.7;

    pub fn new(theta: f64) -> Result<Self> {
        if !theta.is_finite() || theta <= 0.0 || theta > 1.0 {
            return Err(Error::Config(format!("theta must be in (0, 1], got {theta}")));
        }
        Ok(Self { theta })
    }
}

impl Default for AggregationConfig {
    fn default() -> Self {
        Self {
            theta: Self::DEFAULT_THETA,
        }
    }
}

/// Final binary trust verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum TrustVerdict {
    Untrustworthy,
    Trustworthy,
}

impl TrustVerdict {
    pub fn as_u8(self) -> u8 {
        match self {
            TrustVerdict::Untrustworthy => 0,
            TrustVerdict::Trustworthy => 1,
        }
    }

    pub fn from_bool(trustworthy: bool) -> Self {
        if trustworthy {
            TrustVerdict::Trustworthy
        } else {
            TrustVerdict::Untrustworthy
        }
    }
}

impl From<TrustVerdict> for u8 {
    fn from(v: TrustVerdict) -> u8 {
        v.as_u8()
    }
}

impl TryFrom<u8> for TrustVerdict {
    type Error = String;
    fn try_from(value: u8) -> std::result::Result<Self, String> {
        match value {
            0 => Ok(TrustVerdict::Untrustworthy),
            1 => Ok(TrustVerdict::Trustworthy),
            _ => Err(format!("invalid trust verdict {value}")),
        }
    }
}

impl std::fmt::Display for TrustVerdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.as_u8().fmt(f)
    }
}

/// Tally the opinions of every common friend of `(i, j)` that has a
/// direct-trust entry toward the trustee `j`. Common friends without an
/// entry contribute nothing.
pub fn collect_recommendations(
    graph: &SocialGraph,
    labels_by_pair: &BTreeMap<PairKey, TrustLabel>,
    i: NodeId,
    j: NodeId,
) -> RecommendationSet {
    let mut recs = RecommendationSet::default();
    for r in graph.common_friends(i, j) {
        match labels_by_pair.get(&PairKey::new(r, j)) {
            Some(TrustLabel::Trustworthy) => recs.t_count += 1,
            Some(TrustLabel::Untrustworthy) => recs.u_count += 1,
            Some(TrustLabel::Neutral) => recs.n_count += 1,
            None => {}
        }
    }
    recs
}

/// The trust-score estimation algorithm.
pub fn estimate_trust(
    direct: TrustLabel,
    recs: &RecommendationSet,
    cfg: &AggregationConfig,
) -> TrustVerdict {
    let t = recs.t_count;
    let u = recs.u_count;
    let n = recs.n_count;
    let total = recs.total();

    if total == 0 {
        // final trust = direct trust; neutral resolves to untrustworthy
        return match direct {
            TrustLabel::Trustworthy => TrustVerdict::Trustworthy,
            TrustLabel::Untrustworthy | TrustLabel::Neutral => TrustVerdict::Untrustworthy,
        };
    }

    match direct {
        TrustLabel::Untrustworthy => {
            if u >= t || (n >= t && n >= u) {
                TrustVerdict::Untrustworthy
            } else {
                let p_t = t as f64 / (total + 1) as f64;
                TrustVerdict::from_bool(p_t >= cfg.theta)
            }
        }
        TrustLabel::Trustworthy => {
            if t >= u || (n >= t && n >= u) {
                TrustVerdict::Trustworthy
            } else {
                let p_u = u as f64 / (total + 1) as f64;
                if p_u >= cfg.theta {
                    TrustVerdict::Untrustworthy
                } else {
                    TrustVerdict::Trustworthy
                }
            }
        }
        TrustLabel::Neutral => TrustVerdict::from_bool(t > u),
    }
}

/// One evaluated pair: the direct label, the collected recommendation
/// counts, and the final verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerdictRow {
    pub pair: PairKey,
    pub direct: TrustLabel,
    pub recommendations: RecommendationSet,
    pub verdict: TrustVerdict,
}

/// Run the estimation algorithm for every interacting pair, with the
/// collected recommendation counts retained per pair. `labels_by_pair`
/// must cover all interacting pairs.
pub fn estimate_all_detailed(
    graph: &SocialGraph,
    labels_by_pair: &BTreeMap<PairKey, TrustLabel>,
    cfg: &AggregationConfig,
) -> Result<Vec<VerdictRow>> {
    let mut rows = Vec::new();
    for pair in graph.interacting_pairs() {
        let direct = *labels_by_pair.get(&pair).ok_or_else(|| {
            Error::Contract(format!("no direct-trust label for interacting pair {pair}"))
        })?;
        let recommendations =
            collect_recommendations(graph, labels_by_pair, pair.trustor, pair.trustee);
        let verdict = estimate_trust(direct, &recommendations, cfg);
        rows.push(VerdictRow {
            pair,
            direct,
            recommendations,
            verdict,
        });
    }
    Ok(rows)
}

/// Verdicts for every interacting pair, keyed by pair.
pub fn estimate_all(
    graph: &SocialGraph,
    labels_by_pair: &BTreeMap<PairKey, TrustLabel>,
    cfg: &AggregationConfig,
) -> Result<BTreeMap<PairKey, TrustVerdict>> {
    Ok(estimate_all_detailed(graph, labels_by_pair, cfg)?
        .into_iter()
        .map(|row| (row.pair, row.verdict))
        .collect())
}

/// For each θ, the fraction of ground-truth pairs whose verdict matches.
/// Pairs in `ground_truth` that are not interacting pairs are ignored.
pub fn theta_sweep(
    graph: &SocialGraph,
    labels_by_pair: &BTreeMap<PairKey, TrustLabel>,
    ground_truth: &BTreeMap<PairKey, TrustVerdict>,
    thetas: &[f64],
) -> Result<Vec<(f64, f64)>> {
    let mut curve = Vec::with_capacity(thetas.len());
    for &theta in thetas {
        let cfg = AggregationConfig::new(theta)?;
        let verdicts = estimate_all(graph, labels_by_pair, &cfg)?;
        let mut agree = 0u64;
        let mut evaluated = 0u64;
        for (pair, expected) in ground_truth {
            if let Some(v) = verdicts.get(pair) {
                evaluated += 1;
                if v == expected {
                    agree += 1;
                }
            }
        }
        if evaluated == 0 {
            return Err(Error::Infeasible(
                "ground truth covers no interacting pair".to_string(),
            ));
        }
        curve.push((theta, agree as f64 / evaluated as f64));
    }
    Ok(curve)
}

// ---------------------------------------------------------------------------
// Verdict / sweep CSV
// ---------------------------------------------------------------------------

pub const VERDICTS_HEADER: &str = "trustor,trustee,direct_label,t_count,u_count,n_count,verdict";
pub const SWEEP_HEADER: &str = "theta,accuracy";

/// Write the verdict table
/// (`trustor,trustee,direct_label,t_count,u_count,n_count,verdict`).
pub fn write_verdicts_csv<W: Write>(mut out: W, rows: &[VerdictRow]) -> std::io::Result<()> {
    writeln!(out, "{VERDICTS_HEADER}")?;
    for row in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            row.pair.trustor,
            row.pair.trustee,
            row.direct,
            row.recommendations.t_count,
            row.recommendations.u_count,
            row.recommendations.n_count,
            row.verdict
        )?;
    }
    Ok(())
}

/// Write a θ-accuracy curve (`theta,accuracy`).
pub fn write_theta_sweep_csv<W: Write>(mut out: W, curve: &[(f64, f64)]) -> std::io::Result<()> {
    writeln!(out, "{SWEEP_HEADER}")?;
    for (theta, accuracy) in curve {
        writeln!(out, "{theta},{accuracy:.6}")?;
    }
    Ok(())
}

/// Read a ground-truth pair table (`trustor,trustee,expected`).
pub fn read_ground_truth_pairs<R: Read>(input: R) -> Result<BTreeMap<PairKey, TrustVerdict>> {
    const FILE: &str = "ground_truth_pairs.csv";
    const HEADER: &str = "trustor,trustee,expected";
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(input);
    let parse_err = |line: u64, message: String| Error::Parse {
        file: FILE.to_string(),
        line,
        message,
    };
    {
        let headers = reader.headers().map_err(|e| parse_err(1, e.to_string()))?;
        let got = headers.iter().collect::<Vec<_>>().join(",");
        if got != HEADER {
            return Err(parse_err(1, format!("expected header `{HEADER}`, got `{got}`")));
        }
    }
    let mut out = BTreeMap::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            parse_err(line, e.to_string())
        })?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if record.len() != 3 {
            return Err(parse_err(line, format!("expected 3 fields, got {}", record.len())));
        }
        let id = |idx: usize, name: &str| -> Result<NodeId> {
            let raw = record.get(idx).unwrap_or("");
            raw.parse::<u32>()
                .map(NodeId)
                .map_err(|_| parse_err(line, format!("field `{name}` is not a node id: `{raw}`")))
        };
        let trustor = id(0, "trustor")?;
        let trustee = id(1, "trustee")?;
        if trustor == trustee {
            return Err(parse_err(line, format!("self-pair ({trustor}, {trustee})")));
        }
        let expected = match record.get(2) {
            Some("0") => TrustVerdict::Untrustworthy,
            Some("1") => TrustVerdict::Trustworthy,
            other => {
                return Err(parse_err(
                    line,
                    format!("field `expected` must be 0 or 1, got `{}`", other.unwrap_or("")),
                ))
            }
        };
        out.insert(PairKey::new(trustor, trustee), expected);
    }
    Ok(out)
}
