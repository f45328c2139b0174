//! Unsupervised labeling: Lloyd's k-means over the 4-D feature space,
//! elbow-based cluster-count selection, and the cluster → trust-label
//! mapping by centroid norm.

use std::io::{Read, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{NodeId, PairKey};
use crate::seed::derive_seed;

/// Three-valued direct-trust class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum TrustLabel {
    Untrustworthy,
    Trustworthy,
    Neutral,
}

impl TrustLabel {
    pub fn as_u8(self) -> u8 {
        match self {
            TrustLabel::Untrustworthy => 0,
            TrustLabel::Trustworthy => 1,
            TrustLabel::Neutral => 2,
        }
    }

    pub fn from_u8(value: u8) -> Option<Self> {
        match value {
            0 => Some(TrustLabel::Untrustworthy),
            1 => Some(TrustLabel::Trustworthy),
            2 => Some(TrustLabel::Neutral),
            _ => None,
        }
    }

    pub const ALL: [TrustLabel; 3] = [
        TrustLabel::Untrustworthy,
        TrustLabel::Trustworthy,
        TrustLabel::Neutral,
    ];
}

impl From<TrustLabel> for u8 {
    fn from(l: TrustLabel) -> u8 {
        l.as_u8()
    }
}

impl TryFrom<u8> for TrustLabel {
    type Error = String;
    fn try_from(value: u8) -> std::result::Result<Self, String> {
        TrustLabel::from_u8(value).ok_or_else(|| format!("invalid trust label {value}"))
    }
}

impl std::fmt::Display for TrustLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.as_u8().fmt(f)
    }
}

/// One k-means run: centroids, per-sample assignments, final cost, and the
/// cost after every Lloyd iteration (non-increasing).
#[derive(Debug, Clone)]
pub struct ClusteringResult {
    pub k: usize,
    pub centroids: Vec<[f64; 4]>,
    pub assignments: Vec<usize>,
    pub cost: f64,
    pub cost_trace: Vec<f64>,
}

fn squared_distance(a: &[f64; 4], b: &[f64; 4]) -> f64 {
    let mut acc = 0.0;
    for i in 0..4 {
        let d = a[i] - b[i];
        acc += d * d;
    }
    acc
}

fn nearest_centroid(sample: &[f64; 4], centroids: &[[f64; 4]]) -> (usize, f64) {
    let mut best = 0usize;
    let mut best_d = squared_distance(sample, &centroids[0]);
    for (idx, c) in centroids.iter().enumerate().skip(1) {
        let d = squared_distance(sample, c);
        if d < best_d {
            best_d = d;
            best = idx;
        }
    }
    (best, best_d)
}

fn total_cost(samples: &[[f64; 4]], centroids: &[[f64; 4]], assignments: &[usize]) -> f64 {
    samples
        .iter()
        .zip(assignments)
        .map(|(s, &a)| squared_distance(s, &centroids[a]))
        .sum()
}

fn validate_samples(samples: &[[f64; 4]]) -> Result<()> {
    if samples.is_empty() {
        return Err(Error::Infeasible("no samples to cluster".to_string()));
    }
    for (i, s) in samples.iter().enumerate() {
        if s.iter().any(|v| !v.is_finite() || !(0.0..=1.0).contains(v)) {
            return Err(Error::Infeasible(format!(
                "sample {i} is outside [0,1]^4: {s:?}"
            )));
        }
    }
    Ok(())
}

/// Distinct sample values, in first-appearance order. Bit patterns are
/// compared so the dedup is exact and deterministic.
fn distinct_samples(samples: &[[f64; 4]]) -> Vec<[f64; 4]> {
    let mut seen = std::collections::BTreeSet::new();
    let mut out = Vec::new();
    for s in samples {
        let key = [
            s[0].to_bits(),
            s[1].to_bits(),
            s[2].to_bits(),
            s[3].to_bits(),
        ];
        if seen.insert(key) {
            out.push(*s);
        }
    }
    out
}

/// Lloyd's k-means from `k` distinct samples chosen uniformly at random
/// (seeded). Iterates until the assignments stabilize or `max_iters` is
/// reached. Deterministic given the seed.
pub fn kmeans(
    samples: &[[f64; 4]],
    k: usize,
    rng_seed: u64,
    max_iters: usize,
) -> Result<ClusteringResult> {
    if k == 0 {
        return Err(Error::Infeasible("k must be >= 1".to_string()));
    }
    validate_samples(samples)?;
    let distinct = distinct_samples(samples);
    if k > distinct.len() {
        return Err(Error::Infeasible(format!(
            "k = {k} exceeds the {} distinct samples",
            distinct.len()
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut centroids: Vec<[f64; 4]> = rand::seq::index::sample(&mut rng, distinct.len(), k)
        .into_iter()
        .map(|i| distinct[i])
        .collect();

    let mut assignments: Vec<usize> = samples
        .iter()
        .map(|s| nearest_centroid(s, &centroids).0)
        .collect();
    let mut cost_trace = vec![total_cost(samples, &centroids, &assignments)];

    for _ in 0..max_iters {
        // update step: centroid = mean of its members; empty clusters keep
        // their previous centroid
        let mut sums = vec![[0.0f64; 4]; k];
        let mut counts = vec![0usize; k];
        for (s, &a) in samples.iter().zip(&assignments) {
            counts[a] += 1;
            for d in 0..4 {
                sums[a][d] += s[d];
            }
        }
        for c in 0..k {
            if counts[c] > 0 {
                for d in 0..4 {
                    centroids[c][d] = sums[c][d] / counts[c] as f64;
                }
            }
        }

        let new_assignments: Vec<usize> = samples
            .iter()
            .map(|s| nearest_centroid(s, &centroids).0)
            .collect();
        let cost = total_cost(samples, &centroids, &new_assignments);
        debug_assert!(
            cost <= cost_trace.last().unwrap() + 1e-9,
            "k-means cost increased: {} -> {}",
            cost_trace.last().unwrap(),
            cost
        );
        cost_trace.push(cost);
        let converged = new_assignments == assignments;
        assignments = new_assignments;
        if converged {
            break;
        }
    }

    let cost = *cost_trace.last().unwrap();
    Ok(ClusteringResult {
        k,
        centroids,
        assignments,
        cost,
        cost_trace,
    })
}

/// Best of `restarts` seeded k-means runs (lowest final cost; earliest
/// restart wins ties).
pub fn kmeans_best_of(
    samples: &[[f64; 4]],
    k: usize,
    rng_seed: u64,
    restarts: usize,
    max_iters: usize,
) -> Result<ClusteringResult> {
    if restarts == 0 {
        return Err(Error::Infeasible("restarts must be >= 1".to_string()));
    }
    let mut best: Option<ClusteringResult> = None;
    for r in 0..restarts {
        let run = kmeans(samples, k, derive_seed(rng_seed, r as u64), max_iters)?;
        if best.as_ref().is_none_or(|b| run.cost < b.cost) {
            best = Some(run);
        }
    }
    Ok(best.unwrap())
}

/// Outcome of the elbow search: the chosen k and the cost curve
/// (one entry per k in `[k_min, k_max]`).
#[derive(Debug, Clone)]
pub struct ElbowSelection {
    pub chosen_k: usize,
    pub costs: Vec<(usize, f64)>,
}

/// Default number of seeded restarts per k during elbow selection.
pub const ELBOW_RESTARTS: usize = 5;

/// Default iteration cap for a single Lloyd run.
pub const KMEANS_MAX_ITERS: usize = 300;

/// Elbow method: run best-of-`restarts` k-means for each k in
/// `[k_min, k_max]` and pick the interior k maximizing the second
/// difference `cost(k-1) - 2 cost(k) + cost(k+1)` of the cost curve.
/// Ties break toward smaller k. Degenerate ranges (fewer than three
/// points on the curve) return `k_min`.
pub fn elbow_select_k(
    samples: &[[f64; 4]],
    k_min: usize,
    k_max: usize,
    rng_seed: u64,
    restarts: usize,
    max_iters: usize,
) -> Result<ElbowSelection> {
    if k_min == 0 || k_min > k_max {
        return Err(Error::Infeasible(format!(
            "invalid k range [{k_min}, {k_max}]"
        )));
    }
    validate_samples(samples)?;
    let distinct = distinct_samples(samples).len();
    if k_max > distinct {
        return Err(Error::Infeasible(format!(
            "k_max = {k_max} exceeds the {distinct} distinct samples"
        )));
    }

    let mut costs = Vec::with_capacity(k_max - k_min + 1);
    for k in k_min..=k_max {
        let run = kmeans_best_of(samples, k, derive_seed(rng_seed, k as u64), restarts, max_iters)?;
        costs.push((k, run.cost));
    }

    if costs.len() < 3 {
        return Ok(ElbowSelection {
            chosen_k: k_min,
            costs,
        });
    }

    let mut chosen_k = costs[1].0;
    let mut best_curvature = f64::NEG_INFINITY;
    for w in costs.windows(3) {
        let (k, c) = w[1];
        let curvature = w[0].1 - 2.0 * c + w[2].1;
        if curvature > best_curvature {
            best_curvature = curvature;
            chosen_k = k;
        }
    }
    Ok(ElbowSelection { chosen_k, costs })
}

/// Map a 3-cluster result to trust labels by centroid norm: the cluster
/// nearest the origin is untrustworthy, the farthest is trustworthy, the
/// remaining one neutral. Equal norms break toward the lower cluster
/// index on the untrustworthy side.
pub fn label_clusters(result: &ClusteringResult) -> Result<Vec<TrustLabel>> {
    if result.k != 3 {
        return Err(Error::Contract(format!(
            "cluster labeling requires k = 3, got k = {}",
            result.k
        )));
    }
    let mut order: Vec<usize> = (0..3).collect();
    let norm = |idx: usize| -> f64 {
        result.centroids[idx]
            .iter()
            .map(|v| v * v)
            .sum::<f64>()
            .sqrt()
    };
    order.sort_by(|&a, &b| {
        norm(a)
            .partial_cmp(&norm(b))
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let mut cluster_label = [TrustLabel::Neutral; 3];
    cluster_label[order[0]] = TrustLabel::Untrustworthy;
    cluster_label[order[2]] = TrustLabel::Trustworthy;
    Ok(result
        .assignments
        .iter()
        .map(|&a| cluster_label[a])
        .collect())
}

// ---------------------------------------------------------------------------
// Labels CSV
// ---------------------------------------------------------------------------

pub const LABELS_HEADER: &str = "trustor,trustee,label";
const LABELS_FILE: &str = "labels.csv";

/// Write per-pair trust labels (`trustor,trustee,label`).
pub fn write_labels_csv<W: Write>(
    mut out: W,
    rows: &[(PairKey, TrustLabel)],
) -> std::io::Result<()> {
    writeln!(out, "{LABELS_HEADER}")?;
    for (pair, label) in rows {
        writeln!(out, "{},{},{}", pair.trustor, pair.trustee, label)?;
    }
    Ok(())
}

/// Read per-pair trust labels back.
pub fn read_labels_csv<R: Read>(input: R) -> Result<Vec<(PairKey, TrustLabel)>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(input);
    let parse_err = |line: u64, message: String| Error::Parse {
        file: LABELS_FILE.to_string(),
        line,
        message,
    };
    {
        let headers = reader.headers().map_err(|e| parse_err(1, e.to_string()))?;
        let got = headers.iter().collect::<Vec<_>>().join(",");
        if got != LABELS_HEADER {
            return Err(parse_err(1, format!("expected header `{LABELS_HEADER}`, got `{got}`")));
        }
    }
    let mut rows = Vec::new();
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
        let raw = record.get(2).unwrap_or("");
        let label = raw
            .parse::<u8>()
            .ok()
            .and_then(TrustLabel::from_u8)
            .ok_or_else(|| parse_err(line, format!("field `label` must be 0, 1, or 2: `{raw}`")))?;
        rows.push((PairKey::new(trustor, trustee), label));
    }
    Ok(rows)
}
