//! End-to-end experiment harness: generate a trace, extract features,
//! cluster and label, train the forest, run the estimation algorithm, and
//! score everything against the planted ground truth. All randomness is
//! derived from the simulation seed.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::aggregate::{
    estimate_all_detailed, theta_sweep, AggregationConfig, TrustVerdict, VerdictRow,
};
use crate::cluster::{
    elbow_select_k, kmeans_best_of, label_clusters, TrustLabel, ELBOW_RESTARTS, KMEANS_MAX_ITERS,
};
use crate::error::{Error, Result};
use crate::features::{feature_matrix, TrustFeatureVector};
use crate::forest::{train_forest, SplitSpec, DEFAULT_MAX_DEPTH, DEFAULT_TREE_COUNT};
use crate::graph::PairKey;
use crate::seed::derive_seed;
use crate::sim::{apply_attack, apply_trace_attack, generate_trace, AttackSpec, SimConfig};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Knobs for the learning/aggregation stages of the pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineParams {
    pub theta: f64,
    pub k_min: usize,
    pub k_max: usize,
    pub elbow_restarts: usize,
    /// Restarts for the final 3-cluster labeling run. Higher than the
    /// elbow's best-of-5: the labeling must reliably pick up the small
    /// misbehaving clusters, not just a good overall cost curve.
    pub cluster_restarts: usize,
    pub kmeans_max_iters: usize,
    pub tree_count: usize,
    pub max_depth: usize,
    pub train_fraction: f64,
    /// θ values evaluated for the report's accuracy curve.
    pub sweep_thetas: Vec<f64>,
}

impl Default for PipelineParams {
    fn default() -> Self {
        Self {
            theta: AggregationConfig::DEFAULT_THETA,
            k_min: 1,
            k_max: 8,
            elbow_restarts: ELBOW_RESTARTS,
            cluster_restarts: 48,
            kmeans_max_iters: KMEANS_MAX_ITERS,
            tree_count: DEFAULT_TREE_COUNT,
            max_depth: DEFAULT_MAX_DEPTH,
            train_fraction: SplitSpec::DEFAULT_TRAIN_FRACTION,
            sweep_thetas: (1..=9).map(|i| i as f64 / 10.0).collect(),
        }
    }
}

/// One point of the k-means cost curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KCost {
    pub k: usize,
    pub cost: f64,
}

/// One point of the θ-accuracy curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThetaAccuracy {
    pub theta: f64,
    pub accuracy: f64,
}

/// Verdict quality against a planted truth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerdictMetrics {
    /// Fraction of evaluated pairs whose verdict matches the truth.
    pub accuracy: f64,
    /// Fraction of truly-untrustworthy pairs judged trustworthy.
    pub false_trust_rate: f64,
    /// Fraction of truly-trustworthy pairs judged untrustworthy.
    pub false_distrust_rate: f64,
    pub evaluated_pairs: usize,
}

/// Everything a pipeline run measured.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResults {
    pub pair_count: usize,
    pub chosen_k: usize,
    pub elbow_costs: Vec<KCost>,
    pub clustering_cost: f64,
    pub label_counts: [usize; 3],
    pub forest_holdout_accuracy: f64,
    pub feature_importances: [f64; 4],
    pub metrics: VerdictMetrics,
    pub theta_sweep: Vec<ThetaAccuracy>,
}

/// Serializable record of one full experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema_version: u32,
    pub sim: SimConfig,
    pub attack: AttackSpec,
    pub pipeline: PipelineParams,
    pub results: ExperimentResults,
}

impl ExperimentReport {
    pub fn to_json_string(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("report serialization");
        out.push('\n');
        out
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let report: ExperimentReport =
            serde_json::from_str(text).map_err(|e| Error::ModelFormat(e.to_string()))?;
        if report.schema_version != REPORT_SCHEMA_VERSION {
            return Err(Error::ModelFormat(format!(
                "unsupported report schema version {}",
                report.schema_version
            )));
        }
        Ok(report)
    }
}

// sub-seed tags, all derived from the simulation seed
const SEED_TRACE_ATTACK: u64 = 0x10;
const SEED_LABEL_ATTACK: u64 = 0x11;
const SEED_ELBOW: u64 = 0x12;
const SEED_CLUSTER: u64 = 0x13;
const SEED_SPLIT: u64 = 0x14;

/// Compare verdict rows against expected binary labels.
pub fn score_verdicts(
    rows: &[VerdictRow],
    expected: &BTreeMap<PairKey, TrustVerdict>,
) -> Result<VerdictMetrics> {
    let mut agree = 0usize;
    let mut evaluated = 0usize;
    let mut truth_trust = 0usize;
    let mut truth_distrust = 0usize;
    let mut false_trust = 0usize;
    let mut false_distrust = 0usize;
    for row in rows {
        let Some(&truth) = expected.get(&row.pair) else {
            continue;
        };
        evaluated += 1;
        if row.verdict == truth {
            agree += 1;
        }
        match truth {
            TrustVerdict::Trustworthy => {
                truth_trust += 1;
                if row.verdict == TrustVerdict::Untrustworthy {
                    false_distrust += 1;
                }
            }
            TrustVerdict::Untrustworthy => {
                truth_distrust += 1;
                if row.verdict == TrustVerdict::Trustworthy {
                    false_trust += 1;
                }
            }
        }
    }
    if evaluated == 0 {
        return Err(Error::Infeasible(
            "ground truth covers no evaluated pair".to_string(),
        ));
    }
    let rate = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
    Ok(VerdictMetrics {
        accuracy: agree as f64 / evaluated as f64,
        false_trust_rate: rate(false_trust, truth_distrust),
        false_distrust_rate: rate(false_distrust, truth_trust),
        evaluated_pairs: evaluated,
    })
}

/// The trace and direct-trust table produced by the unsupervised half of
/// the pipeline (generation, optional trace attack, features, elbow
/// diagnostic, 3-cluster labeling).
pub struct LabeledTrace {
    pub graph: crate::graph::SocialGraph,
    pub truth: crate::sim::GroundTruth,
    pub features: Vec<(PairKey, TrustFeatureVector)>,
    /// Aligned with `features`.
    pub labels: Vec<TrustLabel>,
    pub chosen_k: usize,
    pub elbow_costs: Vec<(usize, f64)>,
    pub clustering_cost: f64,
}

impl LabeledTrace {
    pub fn labels_by_pair(&self) -> BTreeMap<PairKey, TrustLabel> {
        self.features
            .iter()
            .zip(&self.labels)
            .map(|((pair, _), &label)| (*pair, label))
            .collect()
    }
}

/// Generate a trace and produce its direct-trust labels: features for
/// every interacting pair, an elbow diagnostic over the configured k
/// range, and a 3-cluster k-means labeling (warned about when the elbow
/// disagrees with 3). Trace-level attacks rewrite the interaction log
/// before feature extraction.
pub fn label_trace(
    sim: &SimConfig,
    attack: &AttackSpec,
    pipeline: &PipelineParams,
) -> Result<LabeledTrace> {
    let seed = sim.rng_seed;
    let (clean_graph, truth) = generate_trace(sim)?;
    let graph =
        apply_trace_attack(&clean_graph, &truth, attack, derive_seed(seed, SEED_TRACE_ATTACK))?;

    let features = feature_matrix(&graph);
    let samples: Vec<[f64; 4]> = features.iter().map(|(_, v)| v.as_array()).collect();

    let elbow = elbow_select_k(
        &samples,
        pipeline.k_min,
        pipeline.k_max,
        derive_seed(seed, SEED_ELBOW),
        pipeline.elbow_restarts,
        pipeline.kmeans_max_iters,
    )?;
    if elbow.chosen_k != 3 {
        log::warn!(
            "elbow selected k = {} on this trace; labeling still uses the 3 trust classes",
            elbow.chosen_k
        );
    }

    let clustering = kmeans_best_of(
        &samples,
        3,
        derive_seed(seed, SEED_CLUSTER),
        pipeline.cluster_restarts,
        pipeline.kmeans_max_iters,
    )?;
    let labels = label_clusters(&clustering)?;

    Ok(LabeledTrace {
        graph,
        truth,
        features,
        labels,
        chosen_k: elbow.chosen_k,
        elbow_costs: elbow.costs,
        clustering_cost: clustering.cost,
    })
}

/// Run the full pipeline once. The direct-trust table always comes from a
/// 3-cluster k-means labeling; recommendation attacks perturb the table
/// before the estimation algorithm runs, trace attacks rewrite the
/// interaction log before feature extraction. The forest is trained on
/// the unperturbed labels.
pub fn run_experiment(
    sim: &SimConfig,
    attack: &AttackSpec,
    pipeline: &PipelineParams,
) -> Result<ExperimentReport> {
    let seed = sim.rng_seed;
    let labeled = label_trace(sim, attack, pipeline)?;
    let mut label_counts = [0usize; 3];
    for l in &labeled.labels {
        label_counts[l.as_u8() as usize] += 1;
    }

    let labels_by_pair = labeled.labels_by_pair();
    let features: Vec<TrustFeatureVector> = labeled.features.iter().map(|(_, v)| *v).collect();
    let split = SplitSpec::new(pipeline.train_fraction, derive_seed(seed, SEED_SPLIT))?;
    let (model, forest_holdout_accuracy) = train_forest(
        &features,
        &labeled.labels,
        &split,
        pipeline.tree_count,
        pipeline.max_depth,
    )?;

    let attacked_labels = apply_attack(
        &labels_by_pair,
        &labeled.graph,
        &labeled.truth,
        attack,
        derive_seed(seed, SEED_LABEL_ATTACK),
    );

    let cfg = AggregationConfig::new(pipeline.theta)?;
    let verdict_rows = estimate_all_detailed(&labeled.graph, &attacked_labels, &cfg)?;
    let metrics = score_verdicts(&verdict_rows, &labeled.truth.expected)?;

    let sweep = theta_sweep(
        &labeled.graph,
        &attacked_labels,
        &labeled.truth.expected,
        &pipeline.sweep_thetas,
    )?
    .into_iter()
    .map(|(theta, accuracy)| ThetaAccuracy { theta, accuracy })
    .collect();

    Ok(ExperimentReport {
        schema_version: REPORT_SCHEMA_VERSION,
        sim: sim.clone(),
        attack: *attack,
        pipeline: pipeline.clone(),
        results: ExperimentResults {
            pair_count: labeled.features.len(),
            chosen_k: labeled.chosen_k,
            elbow_costs: labeled
                .elbow_costs
                .iter()
                .map(|&(k, cost)| KCost { k, cost })
                .collect(),
            clustering_cost: labeled.clustering_cost,
            label_counts,
            forest_holdout_accuracy,
            feature_importances: model.feature_importances(),
            metrics,
            theta_sweep: sweep,
        },
    })
}
