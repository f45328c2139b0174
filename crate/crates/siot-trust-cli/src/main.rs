//! `siot-trust`: ingest or synthesize interaction traces, extract social
//! trust features, label them by clustering, train the forest classifier,
//! and fuse direct trust with recommendations into final verdicts.
//!
//! Exit codes: 0 success, 1 user/input error, 2 internal invariant
//! violation. Set `SIOT_TRUST_LOG` (e.g. `info`, `debug`) for logging.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use siot_trust::aggregate::{
    estimate_all_detailed, read_ground_truth_pairs, theta_sweep, write_theta_sweep_csv,
    write_verdicts_csv, AggregationConfig,
};
use siot_trust::cluster::{
    elbow_select_k, kmeans_best_of, label_clusters, read_labels_csv, write_labels_csv,
};
use siot_trust::error::{Error, Result};
use siot_trust::experiment::{run_experiment, PipelineParams};
use siot_trust::features::{
    feature_matrix, read_feature_matrix, write_feature_matrix, FeatureId, TrustFeatureVector,
};
use siot_trust::forest::{
    decision_boundary_grid, train_forest, write_grid_csv, write_importances_csv, SplitSpec,
};
use siot_trust::graph::ingest_trace;
use siot_trust::sim::{generate_trace, write_sim_outputs, AttackKind, AttackSpec, SimConfig};

/// The six feature pairings used for scatter and boundary plot data.
const PLOT_PAIRS: [(FeatureId, FeatureId); 6] = [
    (FeatureId::Fs, FeatureId::Coi),
    (FeatureId::Fs, FeatureId::Reward),
    (FeatureId::Fs, FeatureId::Cop),
    (FeatureId::Coi, FeatureId::Reward),
    (FeatureId::Coi, FeatureId::Cop),
    (FeatureId::Reward, FeatureId::Cop),
];

#[derive(Parser)]
#[command(name = "siot-trust", version, about = "Social trust engine for device networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Ingest a trace directory and write the per-pair feature matrix.
    Features(FeaturesArgs),
    /// Cluster a feature matrix, select k by the elbow curve, and write
    /// per-pair trust labels plus scatter plot data.
    Label(LabelArgs),
    /// Train the random-forest classifier on features and labels.
    Train(TrainArgs),
    /// Fuse direct labels with recommendations into final verdicts.
    Aggregate(AggregateArgs),
    /// Generate a synthetic trace (optionally running the full pipeline).
    Simulate(SimulateArgs),
}

#[derive(Args)]
struct FeaturesArgs {
    /// Directory holding nodes.csv, friends.csv, communities.csv,
    /// interactions.csv.
    #[arg(long)]
    trace_dir: PathBuf,
    /// Output feature-matrix CSV.
    #[arg(long)]
    out: PathBuf,
    /// Where to write the dense-id mapping when the source ids were
    /// sparse (default: node_map.csv next to --out).
    #[arg(long)]
    map_out: Option<PathBuf>,
}

#[derive(Args)]
struct LabelArgs {
    /// Input feature-matrix CSV.
    #[arg(long)]
    features: PathBuf,
    /// Output labels CSV.
    #[arg(long)]
    out: PathBuf,
    /// Directory for the six scatter plot-data files (default: the
    /// directory of --out).
    #[arg(long)]
    plot_dir: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    k_min: usize,
    #[arg(long, default_value_t = 8)]
    k_max: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Seeded restarts per k in the elbow search.
    #[arg(long, default_value_t = 5)]
    restarts: usize,
    /// Seeded restarts for the final 3-cluster labeling run.
    #[arg(long, default_value_t = 48)]
    cluster_restarts: usize,
    #[arg(long, default_value_t = 300)]
    max_iters: usize,
}

#[derive(Args)]
struct TrainArgs {
    /// Input feature-matrix CSV.
    #[arg(long)]
    features: PathBuf,
    /// Input labels CSV (same pairs as the feature matrix).
    #[arg(long)]
    labels: PathBuf,
    /// Output model JSON document.
    #[arg(long)]
    model_out: PathBuf,
    /// Output importances CSV (default: feature_importance.csv next to
    /// --model-out).
    #[arg(long)]
    importances_out: Option<PathBuf>,
    #[arg(long, default_value_t = 100)]
    trees: usize,
    #[arg(long, default_value_t = 8)]
    max_depth: usize,
    #[arg(long, default_value_t = 0.8)]
    train_fraction: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also write decision-boundary grids for the six feature pairs into
    /// this directory.
    #[arg(long)]
    grid_dir: Option<PathBuf>,
    #[arg(long, default_value_t = 100)]
    grid_resolution: usize,
    /// Value the two non-grid features are held at.
    #[arg(long, default_value_t = 0.5)]
    grid_fixed: f64,
}

#[derive(Args)]
struct AggregateArgs {
    /// Directory holding the trace CSVs (for friendships).
    #[arg(long)]
    trace_dir: PathBuf,
    /// Input labels CSV (direct trust per ordered pair).
    #[arg(long)]
    labels: PathBuf,
    /// Output verdicts CSV.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0.7)]
    theta: f64,
    /// Comma-separated θ values for an accuracy sweep (requires
    /// --ground-truth).
    #[arg(long, value_delimiter = ',')]
    sweep: Vec<f64>,
    /// Ground-truth pairs CSV (trustor,trustee,expected).
    #[arg(long)]
    ground_truth: Option<PathBuf>,
    /// Output CSV for the sweep (default: theta_sweep.csv next to --out).
    #[arg(long)]
    sweep_out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    /// Directory for the trace and ground-truth CSVs.
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long, default_value_t = 76)]
    nodes: u32,
    #[arg(long, default_value_t = 0.2)]
    malicious_fraction: f64,
    #[arg(long, default_value_t = 4)]
    communities: u32,
    #[arg(long, default_value_t = 18_226)]
    interactions: u64,
    #[arg(long, default_value_t = 345_600)]
    duration_secs: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Share of its honest community mates each malicious node exploits.
    #[arg(long, default_value_t = 0.3)]
    victim_fraction: f64,
    /// Attack to inject: ballot_stuffing, bad_mouthing, self_promoting,
    /// whitewashing, or none.
    #[arg(long, default_value = "none")]
    attack: String,
    #[arg(long, default_value_t = 0.0)]
    attacker_fraction: f64,
    #[arg(long, default_value_t = 0.0)]
    intensity: f64,
    /// Run the full pipeline and write report.json into --out-dir.
    #[arg(long)]
    full_pipeline: bool,
    #[arg(long, default_value_t = 0.7)]
    theta: f64,
    #[arg(long, default_value_t = 100)]
    trees: usize,
    #[arg(long, default_value_t = 8)]
    max_depth: usize,
    #[arg(long, default_value_t = 1)]
    k_min: usize,
    #[arg(long, default_value_t = 8)]
    k_max: usize,
    #[arg(long, default_value_t = 0.8)]
    train_fraction: f64,
}

fn write_file(path: &Path, body: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
    }
    std::fs::write(path, body).map_err(|e| Error::io(path, e))
}

fn open_file(path: &Path) -> Result<std::fs::File> {
    std::fs::File::open(path).map_err(|e| Error::io(path, e))
}

fn cmd_features(args: &FeaturesArgs) -> Result<()> {
    let ingest = ingest_trace(&args.trace_dir)?;
    let rows = feature_matrix(&ingest.graph);
    let mut buf = Vec::new();
    write_feature_matrix(&mut buf, &rows).map_err(|e| Error::io(&args.out, e))?;
    write_file(&args.out, &buf)?;
    println!("wrote {} feature rows to {}", rows.len(), args.out.display());

    if !ingest.identity_mapping() {
        let map_path = args
            .map_out
            .clone()
            .unwrap_or_else(|| sibling(&args.out, "node_map.csv"));
        let mut body = String::from("dense_id,original_id\n");
        for (dense, original) in ingest.original_ids.iter().enumerate() {
            body.push_str(&format!("{dense},{original}\n"));
        }
        write_file(&map_path, body.as_bytes())?;
        println!("source node ids were sparse; mapping written to {}", map_path.display());
    }
    Ok(())
}

fn sibling(path: &Path, name: &str) -> PathBuf {
    path.parent()
        .map(|p| p.join(name))
        .unwrap_or_else(|| PathBuf::from(name))
}

fn cmd_label(args: &LabelArgs) -> Result<()> {
    let rows = read_feature_matrix(open_file(&args.features)?)?;
    let samples: Vec<[f64; 4]> = rows.iter().map(|(_, v)| v.as_array()).collect();

    let elbow = elbow_select_k(
        &samples,
        args.k_min,
        args.k_max,
        args.seed,
        args.restarts,
        args.max_iters,
    )?;
    println!("chosen k = {}", elbow.chosen_k);
    for (k, cost) in &elbow.costs {
        log::info!("elbow cost k={k}: {cost:.6}");
    }
    if elbow.chosen_k != 3 {
        eprintln!(
            "warning: elbow selected k = {}; labels still use the 3 trust classes",
            elbow.chosen_k
        );
    }

    let clustering = kmeans_best_of(&samples, 3, args.seed, args.cluster_restarts, args.max_iters)?;
    let labels = label_clusters(&clustering)?;

    let labeled: Vec<_> = rows
        .iter()
        .zip(&labels)
        .map(|((pair, _), &label)| (*pair, label))
        .collect();
    let mut buf = Vec::new();
    write_labels_csv(&mut buf, &labeled).map_err(|e| Error::io(&args.out, e))?;
    write_file(&args.out, &buf)?;
    println!("wrote {} labels to {}", labeled.len(), args.out.display());

    let plot_dir = args
        .plot_dir
        .clone()
        .unwrap_or_else(|| args.out.parent().map(Path::to_path_buf).unwrap_or_default());
    for (fx, fy) in PLOT_PAIRS {
        let mut body = String::from("x,y,label\n");
        for ((_, v), label) in rows.iter().zip(&labels) {
            body.push_str(&format!("{:.6},{:.6},{}\n", v.get(fx), v.get(fy), label));
        }
        let path = plot_dir.join(format!("scatter_{}_{}.csv", fx.name(), fy.name()));
        write_file(&path, body.as_bytes())?;
    }
    println!("wrote {} scatter files to {}", PLOT_PAIRS.len(), plot_dir.display());
    Ok(())
}

fn cmd_train(args: &TrainArgs) -> Result<()> {
    let feature_rows = read_feature_matrix(open_file(&args.features)?)?;
    let label_rows = read_labels_csv(open_file(&args.labels)?)?;
    if feature_rows.len() != label_rows.len() {
        return Err(Error::Validation(format!(
            "feature rows ({}) and label rows ({}) differ",
            feature_rows.len(),
            label_rows.len()
        )));
    }
    let by_pair: BTreeMap<_, _> = label_rows.into_iter().collect();
    let mut features = Vec::with_capacity(feature_rows.len());
    let mut labels = Vec::with_capacity(feature_rows.len());
    for (pair, v) in &feature_rows {
        let label = by_pair.get(pair).copied().ok_or_else(|| {
            Error::Validation(format!("labels file has no entry for pair {pair}"))
        })?;
        features.push(*v);
        labels.push(label);
    }

    let split = SplitSpec::new(args.train_fraction, args.seed)?;
    let (model, accuracy) = train_forest(&features, &labels, &split, args.trees, args.max_depth)?;

    write_file(&args.model_out, model.to_json_string().as_bytes())?;
    let importances = model.feature_importances();
    let importances_path = args
        .importances_out
        .clone()
        .unwrap_or_else(|| sibling(&args.model_out, "feature_importance.csv"));
    let mut buf = Vec::new();
    write_importances_csv(&mut buf, &importances).map_err(|e| Error::io(&importances_path, e))?;
    write_file(&importances_path, &buf)?;

    println!("held-out accuracy: {accuracy:.4}");
    println!(
        "feature importances: fs={:.4} coi={:.4} cop={:.4} reward={:.4}",
        importances[0], importances[1], importances[2], importances[3]
    );
    if model.is_degenerate() {
        eprintln!("warning: training set had a single class; model is a constant predictor");
    }

    if let Some(grid_dir) = &args.grid_dir {
        let fixed = TrustFeatureVector::from_array([args.grid_fixed; 4]);
        for (fx, fy) in PLOT_PAIRS {
            let grid = decision_boundary_grid(&model, (fx, fy), args.grid_resolution, &fixed)?;
            let mut buf = Vec::new();
            write_grid_csv(&mut buf, &grid).map_err(|e| Error::io(grid_dir, e))?;
            let path = grid_dir.join(format!("grid_{}_{}.csv", fx.name(), fy.name()));
            write_file(&path, &buf)?;
        }
        println!("wrote {} decision grids to {}", PLOT_PAIRS.len(), grid_dir.display());
    }
    Ok(())
}

fn cmd_aggregate(args: &AggregateArgs) -> Result<()> {
    let cfg = AggregationConfig::new(args.theta)?;
    let ingest = ingest_trace(&args.trace_dir)?;
    let labels: BTreeMap<_, _> = read_labels_csv(open_file(&args.labels)?)?
        .into_iter()
        .collect();
    for pair in ingest.graph.interacting_pairs() {
        if !labels.contains_key(&pair) {
            return Err(Error::Validation(format!(
                "labels file has no entry for interacting pair {pair}"
            )));
        }
    }

    let rows = estimate_all_detailed(&ingest.graph, &labels, &cfg)?;
    let mut buf = Vec::new();
    write_verdicts_csv(&mut buf, &rows).map_err(|e| Error::io(&args.out, e))?;
    write_file(&args.out, &buf)?;
    println!("wrote {} verdicts to {}", rows.len(), args.out.display());

    if !args.sweep.is_empty() {
        let Some(truth_path) = &args.ground_truth else {
            return Err(Error::Config(
                "--sweep requires --ground-truth".to_string(),
            ));
        };
        let truth = read_ground_truth_pairs(open_file(truth_path)?)?;
        let curve = theta_sweep(&ingest.graph, &labels, &truth, &args.sweep)?;
        let sweep_path = args
            .sweep_out
            .clone()
            .unwrap_or_else(|| sibling(&args.out, "theta_sweep.csv"));
        let mut buf = Vec::new();
        write_theta_sweep_csv(&mut buf, &curve).map_err(|e| Error::io(&sweep_path, e))?;
        write_file(&sweep_path, &buf)?;
        for (theta, accuracy) in &curve {
            println!("theta {theta}: accuracy {accuracy:.4}");
        }
        println!("wrote sweep to {}", sweep_path.display());
    }
    Ok(())
}

fn cmd_simulate(args: &SimulateArgs) -> Result<()> {
    let kind = AttackKind::from_name(&args.attack).ok_or_else(|| {
        Error::Config(format!(
            "unknown attack kind `{}` (expected ballot_stuffing, bad_mouthing, self_promoting, whitewashing, or none)",
            args.attack
        ))
    })?;
    let attack = AttackSpec::new(kind, args.attacker_fraction, args.intensity)?;
    let sim = SimConfig {
        node_count: args.nodes,
        malicious_fraction: args.malicious_fraction,
        community_count: args.communities,
        interaction_count: args.interactions,
        duration_secs: args.duration_secs,
        rng_seed: args.seed,
        victim_fraction: args.victim_fraction,
        ..SimConfig::default()
    };

    let (graph, truth) = generate_trace(&sim)?;
    write_sim_outputs(&args.out_dir, &graph, &truth)?;
    println!(
        "wrote {}-node trace with {} interactions to {}",
        graph.node_count(),
        graph.interactions().len(),
        args.out_dir.display()
    );

    if args.full_pipeline {
        let pipeline = PipelineParams {
            theta: args.theta,
            k_min: args.k_min,
            k_max: args.k_max,
            tree_count: args.trees,
            max_depth: args.max_depth,
            train_fraction: args.train_fraction,
            ..PipelineParams::default()
        };
        let report = run_experiment(&sim, &attack, &pipeline)?;
        let path = args.out_dir.join("report.json");
        write_file(&path, report.to_json_string().as_bytes())?;
        println!(
            "pipeline: chosen k = {}, forest accuracy {:.4}, verdict accuracy {:.4}",
            report.results.chosen_k,
            report.results.forest_holdout_accuracy,
            report.results.metrics.accuracy
        );
        println!("wrote report to {}", path.display());
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Features(args) => cmd_features(args),
        Command::Label(args) => cmd_label(args),
        Command::Train(args) => cmd_train(args),
        Command::Aggregate(args) => cmd_aggregate(args),
        Command::Simulate(args) => cmd_simulate(args),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("SIOT_TRUST_LOG")).init();

    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // help/version are not errors
            let code = if err.use_stderr() { 1 } else { 0 };
            let _ = err.print();
            let _ = std::io::stdout().flush();
            return ExitCode::from(code);
        }
    };

    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
