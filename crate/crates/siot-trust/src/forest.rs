//! From-scratch multi-class random forest over the four trust features:
//! bootstrapped trees, Gini impurity splits on 2-of-4 candidate features,
//! majority-vote prediction, and mean-decrease-in-impurity feature
//! importances. Models serialize to a versioned JSON document that
//! round-trips bit-exactly.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cluster::TrustLabel;
use crate::error::{Error, Result};
use crate::features::{FeatureId, TrustFeatureVector};
use crate::seed::derive_seed;

pub const MODEL_SCHEMA_VERSION: u32 = 1;

/// Train/holdout split parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub rng_seed: u64,
}

impl SplitSpec {
    pub const DEFAULT_TRAIN_FRACTION: f64 = 0.8;

    pub fn new(train_fraction: f64, rng_seed: u64) -> Result<Self> {
        if !train_fraction.is_finite() || train_fraction <= 0.0 || train_fraction >= 1.0 {
            return Err(Error::Config(format!(
                "train fraction must be in (0, 1), got {train_fraction}"
            )));
        }
        Ok(Self {
            train_fraction,
            rng_seed,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
enum TreeNode {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        votes: [u32; 3],
    },
}

/// One decision tree; nodes are stored in preorder, children always after
/// their parent.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionTree {
    nodes: Vec<TreeNode>,
}

impl DecisionTree {
    fn predict(&self, x: &[f64; 4]) -> TrustLabel {
        let mut idx = 0usize;
        loop {
            match &self.nodes[idx] {
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    idx = if x[*feature] <= *threshold { *left } else { *right };
                }
                TreeNode::Leaf { votes } => return argmax_label(votes),
            }
        }
    }
}

/// Class with the most votes; ties break toward the lower class value
/// (untrustworthy first).
fn argmax_label(votes: &[u32; 3]) -> TrustLabel {
    let mut best = 0usize;
    for c in 1..3 {
        if votes[c] > votes[best] {
            best = c;
        }
    }
    TrustLabel::from_u8(best as u8).unwrap()
}

/// A trained forest.
#[derive(Debug, Clone, PartialEq)]
pub struct ForestModel {
    trees: Vec<DecisionTree>,
    max_depth: usize,
    feature_importances: [f64; 4],
    rng_seed: u64,
    degenerate: bool,
}

impl ForestModel {
    pub fn tree_count(&self) -> usize {
        self.trees.len()
    }

    pub fn max_depth(&self) -> usize {
        self.max_depth
    }

    pub fn rng_seed(&self) -> u64 {
        self.rng_seed
    }

    /// True when the training set had a single class and the forest
    /// degenerated to constant leaves.
    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    /// Normalized mean decrease in Gini impurity, ordered (FS, CoI, CoP,
    /// Reward). Non-negative, sums to 1.
    pub fn feature_importances(&self) -> [f64; 4] {
        self.feature_importances
    }
}

pub const DEFAULT_TREE_COUNT: usize = 100;
pub const DEFAULT_MAX_DEPTH: usize = 8;
/// Candidate features drawn per split: floor(sqrt(4)).
const CANDIDATES_PER_SPLIT: usize = 2;
const MIN_TRAIN_SAMPLES: usize = 10;

fn gini(counts: &[u32; 3]) -> f64 {
    let n: u32 = counts.iter().sum();
    if n == 0 {
        return 0.0;
    }
    let n = n as f64;
    1.0 - counts
        .iter()
        .map(|&c| {
            let p = c as f64 / n;
            p * p
        })
        .sum::<f64>()
}

struct TreeBuilder<'a> {
    xs: &'a [[f64; 4]],
    ys: &'a [u8],
    max_depth: usize,
    total: f64,
    nodes: Vec<TreeNode>,
    importances: [f64; 4],
}

impl TreeBuilder<'_> {
    fn class_counts(&self, members: &[u32]) -> [u32; 3] {
        let mut counts = [0u32; 3];
        for &i in members {
            counts[self.ys[i as usize] as usize] += 1;
        }
        counts
    }

    /// Grow a node from `members` (indices into the bootstrap sample) and
    /// return its index.
    fn grow(&mut self, members: &[u32], depth: usize, rng: &mut ChaCha8Rng) -> usize {
        let counts = self.class_counts(members);
        let node_gini = gini(&counts);
        let make_leaf = |nodes: &mut Vec<TreeNode>| {
            nodes.push(TreeNode::Leaf { votes: counts });
            nodes.len() - 1
        };
        if depth >= self.max_depth || members.len() < 2 || node_gini == 0.0 {
            return make_leaf(&mut self.nodes);
        }

        let mut candidates: Vec<usize> = rand::seq::index::sample(rng, 4, CANDIDATES_PER_SPLIT)
            .into_iter()
            .collect();
        candidates.sort_unstable();

        let mut best: Option<(f64, usize, f64)> = None; // (gain, feature, threshold)
        for &feature in &candidates {
            let mut column: Vec<(f64, u8)> = members
                .iter()
                .map(|&i| (self.xs[i as usize][feature], self.ys[i as usize]))
                .collect();
            column.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
            let n = column.len() as f64;
            let mut left = [0u32; 3];
            let mut right = counts;
            for w in 0..column.len() - 1 {
                let (value, class) = column[w];
                left[class as usize] += 1;
                right[class as usize] -= 1;
                let next_value = column[w + 1].0;
                if next_value <= value {
                    continue; // not a boundary between distinct values
                }
                let n_left = (w + 1) as f64;
                let n_right = n - n_left;
                let gain =
                    node_gini - (n_left / n) * gini(&left) - (n_right / n) * gini(&right);
                if best.is_none_or(|(g, _, _)| gain > g) {
                    best = Some((gain, feature, (value + next_value) / 2.0));
                }
            }
        }

        let Some((gain, feature, threshold)) = best else {
            return make_leaf(&mut self.nodes);
        };
        if gain <= 1e-12 {
            return make_leaf(&mut self.nodes);
        }

        self.importances[feature] += (members.len() as f64 / self.total) * gain;

        let (left_members, right_members): (Vec<u32>, Vec<u32>) = members
            .iter()
            .partition(|&&i| self.xs[i as usize][feature] <= threshold);

        let idx = self.nodes.len();
        self.nodes.push(TreeNode::Leaf { votes: [0; 3] }); // placeholder
        let left = self.grow(&left_members, depth + 1, rng);
        let right = self.grow(&right_members, depth + 1, rng);
        self.nodes[idx] = TreeNode::Split {
            feature,
            threshold,
            left,
            right,
        };
        idx
    }
}

/// Train a forest on an 80/20 (by default) seeded shuffle split and return
/// it with the held-out accuracy.
///
/// A single-class training set produces a degenerate constant forest
/// (logged as a warning) with uniform feature importances.
pub fn train_forest(
    features: &[TrustFeatureVector],
    labels: &[TrustLabel],
    split: &SplitSpec,
    tree_count: usize,
    max_depth: usize,
) -> Result<(ForestModel, f64)> {
    if features.len() != labels.len() {
        return Err(Error::Validation(format!(
            "feature rows ({}) and label rows ({}) differ",
            features.len(),
            labels.len()
        )));
    }
    if features.len() < MIN_TRAIN_SAMPLES {
        return Err(Error::InsufficientData(format!(
            "need at least {MIN_TRAIN_SAMPLES} samples, got {}",
            features.len()
        )));
    }
    if tree_count == 0 || max_depth == 0 {
        return Err(Error::Config(
            "tree count and max depth must be >= 1".to_string(),
        ));
    }
    for (i, v) in features.iter().enumerate() {
        if !v.in_range() {
            return Err(Error::Validation(format!(
                "feature row {i} is outside [0,1]^4"
            )));
        }
    }

    let n = features.len();
    let xs: Vec<[f64; 4]> = features.iter().map(|v| v.as_array()).collect();
    let ys: Vec<u8> = labels.iter().map(|l| l.as_u8()).collect();

    let mut order: Vec<u32> = (0..n as u32).collect();
    let mut shuffle_rng = ChaCha8Rng::seed_from_u64(derive_seed(split.rng_seed, 0));
    order.shuffle(&mut shuffle_rng);
    let train_count = ((n as f64 * split.train_fraction).round() as usize).clamp(1, n - 1);
    let (train_idx, test_idx) = order.split_at(train_count);

    let train_x: Vec<[f64; 4]> = train_idx.iter().map(|&i| xs[i as usize]).collect();
    let train_y: Vec<u8> = train_idx.iter().map(|&i| ys[i as usize]).collect();

    let first = train_y[0];
    let degenerate = train_y.iter().all(|&y| y == first);
    if degenerate {
        log::warn!("training set has a single class ({first}); forest degenerates to constant leaves");
    }

    let mut trees = Vec::with_capacity(tree_count);
    let mut importance_acc = [0.0f64; 4];
    let mut trees_with_splits = 0usize;
    for t in 0..tree_count {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(split.rng_seed, 1 + t as u64));
        let bootstrap: Vec<u32> = (0..train_x.len())
            .map(|_| rng.random_range(0..train_x.len()) as u32)
            .collect();
        let mut builder = TreeBuilder {
            xs: &train_x,
            ys: &train_y,
            max_depth,
            total: bootstrap.len() as f64,
            nodes: Vec::new(),
            importances: [0.0; 4],
        };
        builder.grow(&bootstrap, 0, &mut rng);
        let tree_total: f64 = builder.importances.iter().sum();
        if tree_total > 0.0 {
            trees_with_splits += 1;
            for (acc, imp) in importance_acc.iter_mut().zip(&builder.importances) {
                *acc += imp / tree_total;
            }
        }
        trees.push(DecisionTree {
            nodes: builder.nodes,
        });
    }

    let feature_importances = if trees_with_splits == 0 {
        [0.25; 4]
    } else {
        let sum: f64 = importance_acc.iter().sum();
        std::array::from_fn(|f| importance_acc[f] / sum)
    };

    let model = ForestModel {
        trees,
        max_depth,
        feature_importances,
        rng_seed: split.rng_seed,
        degenerate,
    };

    let mut correct = 0usize;
    for &i in test_idx {
        if predict(&model, &features[i as usize]).as_u8() == ys[i as usize] {
            correct += 1;
        }
    }
    let held_out_accuracy = correct as f64 / test_idx.len() as f64;
    Ok((model, held_out_accuracy))
}

/// Majority class vote over all trees; ties break toward the lower class
/// value, i.e. toward untrustworthy.
pub fn predict(model: &ForestModel, v: &TrustFeatureVector) -> TrustLabel {
    let x = v.as_array();
    let mut votes = [0u32; 3];
    for tree in &model.trees {
        votes[tree.predict(&x).as_u8() as usize] += 1;
    }
    argmax_label(&votes)
}

/// Labels over a `resolution`×`resolution` lattice of cell centers in
/// `[0,1]²` for the chosen feature pair; the other two features are held
/// at the values in `fixed`. Rows are `(x, y, label)` in row-major order.
pub fn decision_boundary_grid(
    model: &ForestModel,
    feature_pair: (FeatureId, FeatureId),
    resolution: usize,
    fixed: &TrustFeatureVector,
) -> Result<Vec<(f64, f64, TrustLabel)>> {
    if feature_pair.0 == feature_pair.1 {
        return Err(Error::Config("grid features must differ".to_string()));
    }
    if resolution == 0 {
        return Err(Error::Config("grid resolution must be >= 1".to_string()));
    }
    let mut rows = Vec::with_capacity(resolution * resolution);
    for yi in 0..resolution {
        let y = (yi as f64 + 0.5) / resolution as f64;
        for xi in 0..resolution {
            let x = (xi as f64 + 0.5) / resolution as f64;
            let mut point = fixed.as_array();
            point[feature_pair.0.index()] = x;
            point[feature_pair.1.index()] = y;
            let label = predict(model, &TrustFeatureVector::from_array(point));
            rows.push((x, y, label));
        }
    }
    Ok(rows)
}

// ---------------------------------------------------------------------------
// Plot-data CSV
// ---------------------------------------------------------------------------

pub const GRID_HEADER: &str = "x,y,label";
pub const IMPORTANCE_HEADER: &str = "feature,importance";

/// Write a decision-boundary grid (`x,y,label`).
pub fn write_grid_csv<W: std::io::Write>(
    mut out: W,
    rows: &[(f64, f64, TrustLabel)],
) -> std::io::Result<()> {
    writeln!(out, "{GRID_HEADER}")?;
    for (x, y, label) in rows {
        writeln!(out, "{x:.6},{y:.6},{label}")?;
    }
    Ok(())
}

/// Write feature importances (`feature,importance`).
pub fn write_importances_csv<W: std::io::Write>(
    mut out: W,
    importances: &[f64; 4],
) -> std::io::Result<()> {
    writeln!(out, "{IMPORTANCE_HEADER}")?;
    for f in FeatureId::ALL {
        writeln!(out, "{},{:.6}", f.name(), importances[f.index()])?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Model JSON document
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum NodeDoc {
    Split {
        feature: usize,
        /// Decimal string; parses back to the identical f64.
        threshold: String,
        left: usize,
        right: usize,
    },
    Leaf {
        votes: [u32; 3],
    },
}

#[derive(Serialize, Deserialize)]
struct TreeDoc {
    nodes: Vec<NodeDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelDoc {
    schema_version: u32,
    rng_seed: u64,
    tree_count: usize,
    max_depth: usize,
    degenerate: bool,
    feature_importances: [f64; 4],
    trees: Vec<TreeDoc>,
}

impl ForestModel {
    /// Serialize to the versioned JSON model document.
    pub fn to_json_string(&self) -> String {
        let doc = ModelDoc {
            schema_version: MODEL_SCHEMA_VERSION,
            rng_seed: self.rng_seed,
            tree_count: self.trees.len(),
            max_depth: self.max_depth,
            degenerate: self.degenerate,
            feature_importances: self.feature_importances,
            trees: self
                .trees
                .iter()
                .map(|tree| TreeDoc {
                    nodes: tree
                        .nodes
                        .iter()
                        .map(|node| match node {
                            TreeNode::Split {
                                feature,
                                threshold,
                                left,
                                right,
                            } => NodeDoc::Split {
                                feature: *feature,
                                threshold: format!("{threshold}"),
                                left: *left,
                                right: *right,
                            },
                            TreeNode::Leaf { votes } => NodeDoc::Leaf { votes: *votes },
                        })
                        .collect(),
                })
                .collect(),
        };
        let mut out = serde_json::to_string_pretty(&doc).expect("model serialization");
        out.push('\n');
        out
    }

    /// Parse and validate a model document.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let doc: ModelDoc =
            serde_json::from_str(text).map_err(|e| Error::ModelFormat(e.to_string()))?;
        if doc.schema_version != MODEL_SCHEMA_VERSION {
            return Err(Error::ModelFormat(format!(
                "unsupported schema version {}",
                doc.schema_version
            )));
        }
        if doc.trees.is_empty() || doc.tree_count != doc.trees.len() {
            return Err(Error::ModelFormat(format!(
                "tree_count {} does not match {} trees",
                doc.tree_count,
                doc.trees.len()
            )));
        }
        for v in doc.feature_importances {
            if !v.is_finite() || v < -1e-12 {
                return Err(Error::ModelFormat(format!("invalid importance {v}")));
            }
        }
        let mut trees = Vec::with_capacity(doc.trees.len());
        for (t, tree) in doc.trees.iter().enumerate() {
            if tree.nodes.is_empty() {
                return Err(Error::ModelFormat(format!("tree {t} has no nodes")));
            }
            let len = tree.nodes.len();
            let mut nodes = Vec::with_capacity(len);
            for (i, node) in tree.nodes.iter().enumerate() {
                match node {
                    NodeDoc::Split {
                        feature,
                        threshold,
                        left,
                        right,
                    } => {
                        if *feature >= 4 {
                            return Err(Error::ModelFormat(format!(
                                "tree {t} node {i}: feature index {feature} out of range"
                            )));
                        }
                        // children strictly after the parent: no cycles
                        if *left <= i || *right <= i || *left >= len || *right >= len {
                            return Err(Error::ModelFormat(format!(
                                "tree {t} node {i}: child indices ({left}, {right}) invalid"
                            )));
                        }
                        let threshold: f64 = threshold.parse().map_err(|_| {
                            Error::ModelFormat(format!(
                                "tree {t} node {i}: threshold `{threshold}` is not a number"
                            ))
                        })?;
                        if !threshold.is_finite() || !(0.0..=1.0).contains(&threshold) {
                            return Err(Error::ModelFormat(format!(
                                "tree {t} node {i}: threshold {threshold} outside [0,1]"
                            )));
                        }
                        nodes.push(TreeNode::Split {
                            feature: *feature,
                            threshold,
                            left: *left,
                            right: *right,
                        });
                    }
                    NodeDoc::Leaf { votes } => nodes.push(TreeNode::Leaf { votes: *votes }),
                }
            }
            trees.push(DecisionTree { nodes });
        }
        Ok(ForestModel {
            trees,
            max_depth: doc.max_depth,
            feature_importances: doc.feature_importances,
            rng_seed: doc.rng_seed,
            degenerate: doc.degenerate,
        })
    }
}
