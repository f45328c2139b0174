//! Acceptance suite: one test per release criterion, each printing a
//! PASS line with the measured numbers (run with `--nocapture` to see
//! them). Oracles here are kept independent of the library code paths
//! they check.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use siot_trust::aggregate::{estimate_trust, AggregationConfig, RecommendationSet};
use siot_trust::cluster::{elbow_select_k, kmeans, kmeans_best_of, TrustLabel};
use siot_trust::experiment::{label_trace, run_experiment, PipelineParams};
use siot_trust::features::{
    community_of_interest, cooperativeness, feature_vector, friendship_similarity, reward,
    TrustFeatureVector,
};
use siot_trust::forest::{train_forest, SplitSpec};
use siot_trust::graph::{assemble_trace, NodeId, RawInteraction, SocialGraph};
use siot_trust::seed::derive_seed;
use siot_trust::sim::{AttackKind, AttackSpec, SimConfig};

// ---------------------------------------------------------------------------
// Criterion 1: the four feature formulas against hand-derived counts
// ---------------------------------------------------------------------------

/// Independent evaluation of the four formulas from raw counts that were
/// enumerated by hand for each fixture.
struct HandCounts {
    shared_friends: u64,
    trustor_friends: u64,
    shared_communities: u64,
    trustor_communities: u64,
    msgs_from_trustor: u64,
    msgs_from_trustee: u64,
    interactions: u64,
    failures: u64,
}

impl HandCounts {
    fn fs(&self) -> f64 {
        if self.trustor_friends <= 1 {
            return 0.0;
        }
        (self.shared_friends as f64 / (self.trustor_friends - 1) as f64).clamp(0.0, 1.0)
    }

    fn coi(&self) -> f64 {
        if self.trustor_communities == 0 {
            return 0.0;
        }
        self.shared_communities as f64 / self.trustor_communities as f64
    }

    fn cop(&self) -> f64 {
        let total = self.msgs_from_trustor + self.msgs_from_trustee;
        if total == 0 {
            return 0.0;
        }
        let p = self.msgs_from_trustor as f64 / total as f64;
        if p <= 0.0 || p >= 1.0 {
            return 0.0;
        }
        -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
    }

    fn rew(&self) -> f64 {
        let int = self.interactions as f64;
        let u = self.failures as f64;
        ((int - u).abs() / int) * (-(u / int)).exp()
    }
}

/// One deterministic fixture graph; the per-pair counts asserted below
/// were derived by hand from these membership and log tables.
fn fixture_graph() -> SocialGraph {
    let nodes: Vec<u64> = (0..8).collect();
    // friendships (symmetrized on load):
    // 0: {1,2,3}   1: {0,2,4}   2: {0,1,3,4}   3: {0,2}   4: {1,2,5}
    // 5: {4}       6: {7}       7: {6}
    let friends = vec![
        (0, 1),
        (0, 2),
        (0, 3),
        (1, 2),
        (1, 4),
        (2, 3),
        (2, 4),
        (4, 5),
        (6, 7),
    ];
    // communities:
    // 0: {10,11}   1: {10}   2: {10,11,12}   3: {12}   4: {11}   5: {}
    // 6: {10}      7: {13}
    let communities = vec![
        (0, 10),
        (0, 11),
        (1, 10),
        (2, 10),
        (2, 11),
        (2, 12),
        (3, 12),
        (4, 11),
        (6, 10),
        (7, 13),
    ];
    // interaction log (timestamp, source, target, messages, success)
    let interactions: Vec<RawInteraction> = [
        (0u64, 0u64, 1u64, 3u64, true),
        (1, 1, 0, 1, true),
        (2, 0, 1, 2, false),
        (3, 2, 3, 5, true),
        (4, 3, 2, 5, false),
        (5, 0, 2, 7, true),
        (6, 4, 5, 1, false),
        (7, 4, 5, 1, false),
        (8, 5, 4, 6, true),
        (9, 6, 7, 4, true),
        (10, 6, 7, 2, true),
        (11, 6, 7, 1, true),
        (12, 1, 4, 9, true),
        (13, 4, 1, 3, false),
    ]
    .into_iter()
    .map(|(timestamp, source, target, messages, success)| RawInteraction {
        timestamp,
        source,
        target,
        messages,
        success,
    })
    .collect();
    assemble_trace(nodes, friends, communities, interactions)
        .unwrap()
        .graph
}

#[test]
fn criterion_1_formula_unit_suite() {
    let started = std::time::Instant::now();
    let g = fixture_graph();

    // (trustor, trustee, hand-enumerated counts)
    let cases: Vec<(u32, u32, HandCounts)> = vec![
        // F0={1,2,3} F1={0,2,4}: shared {2}; C0={10,11} C1={10}; msgs 0->1: 3+2=5, 1->0: 1;
        // interactions between {0,1}: 3, failures 1
        (0, 1, HandCounts { shared_friends: 1, trustor_friends: 3, shared_communities: 1, trustor_communities: 2, msgs_from_trustor: 5, msgs_from_trustee: 1, interactions: 3, failures: 1 }),
        (1, 0, HandCounts { shared_friends: 1, trustor_friends: 3, shared_communities: 1, trustor_communities: 1, msgs_from_trustor: 1, msgs_from_trustee: 5, interactions: 3, failures: 1 }),
        // F2={0,1,3,4} F3={0,2}: shared {0}; C2={10,11,12} C3={12}
        (2, 3, HandCounts { shared_friends: 1, trustor_friends: 4, shared_communities: 1, trustor_communities: 3, msgs_from_trustor: 5, msgs_from_trustee: 5, interactions: 2, failures: 1 }),
        (3, 2, HandCounts { shared_friends: 1, trustor_friends: 2, shared_communities: 1, trustor_communities: 1, msgs_from_trustor: 5, msgs_from_trustee: 5, interactions: 2, failures: 1 }),
        // F0={1,2,3} F2={0,1,3,4}: shared {1,3}; one-way messaging 0->2
        (0, 2, HandCounts { shared_friends: 2, trustor_friends: 3, shared_communities: 2, trustor_communities: 2, msgs_from_trustor: 7, msgs_from_trustee: 0, interactions: 1, failures: 0 }),
        (2, 0, HandCounts { shared_friends: 2, trustor_friends: 4, shared_communities: 2, trustor_communities: 3, msgs_from_trustor: 0, msgs_from_trustee: 7, interactions: 1, failures: 0 }),
        // F4={1,2,5} F5={4}: no shared friends; C5 empty; all failures 4->5
        (4, 5, HandCounts { shared_friends: 0, trustor_friends: 3, shared_communities: 0, trustor_communities: 1, msgs_from_trustor: 2, msgs_from_trustee: 6, interactions: 3, failures: 2 }),
        (5, 4, HandCounts { shared_friends: 0, trustor_friends: 1, shared_communities: 0, trustor_communities: 0, msgs_from_trustor: 6, msgs_from_trustee: 2, interactions: 3, failures: 2 }),
        // 6 and 7: isolated mutual friends, one-way chat, all successes
        (6, 7, HandCounts { shared_friends: 0, trustor_friends: 1, shared_communities: 0, trustor_communities: 1, msgs_from_trustor: 7, msgs_from_trustee: 0, interactions: 3, failures: 0 }),
        (7, 6, HandCounts { shared_friends: 0, trustor_friends: 1, shared_communities: 0, trustor_communities: 1, msgs_from_trustor: 0, msgs_from_trustee: 7, interactions: 3, failures: 0 }),
        // F1={0,2,4} F4={1,2,5}: shared {2}
        (1, 4, HandCounts { shared_friends: 1, trustor_friends: 3, shared_communities: 0, trustor_communities: 1, msgs_from_trustor: 9, msgs_from_trustee: 3, interactions: 2, failures: 1 }),
        (4, 1, HandCounts { shared_friends: 1, trustor_friends: 3, shared_communities: 0, trustor_communities: 1, msgs_from_trustor: 3, msgs_from_trustee: 9, interactions: 2, failures: 1 }),
    ];

    let mut checked = 0;
    for (i, j, hand) in &cases {
        let (i, j) = (NodeId(*i), NodeId(*j));
        let fs = friendship_similarity(&g, i, j);
        let coi = community_of_interest(&g, i, j);
        let cop = cooperativeness(&g, i, j);
        let rew = reward(&g, i, j).unwrap();
        assert!((fs - hand.fs()).abs() < 1e-9, "fs({i},{j}) = {fs} vs {}", hand.fs());
        assert!((coi - hand.coi()).abs() < 1e-9, "coi({i},{j}) = {coi} vs {}", hand.coi());
        assert!((cop - hand.cop()).abs() < 1e-9, "cop({i},{j}) = {cop} vs {}", hand.cop());
        assert!((rew - hand.rew()).abs() < 1e-9, "rew({i},{j}) = {rew} vs {}", hand.rew());
        let v = feature_vector(&g, i, j).unwrap();
        assert_eq!(v.as_array(), [fs, coi, cop, rew]);
        checked += 4;
    }

    // frozen spot values computed independently at high precision
    let g2 = {
        let interactions = vec![
            RawInteraction { timestamp: 0, source: 0, target: 1, messages: 3, success: true },
            RawInteraction { timestamp: 1, source: 1, target: 0, messages: 1, success: false },
        ];
        assemble_trace((0..2).collect(), vec![], vec![], interactions).unwrap().graph
    };
    assert!((cooperativeness(&g2, NodeId(0), NodeId(1)) - 0.811_278_124_459_132_9).abs() < 1e-9);
    // (2 - 1)/2 * exp(-1/2)
    assert!((reward(&g2, NodeId(0), NodeId(1)).unwrap() - 0.303_265_329_856_316_7).abs() < 1e-9);
    checked += 2;

    assert!(checked >= 20, "only {checked} formula evaluations");
    println!(
        "criterion 1: PASS ({checked} formula checks at 1e-9 in {:.2?})",
        started.elapsed()
    );
}

// ---------------------------------------------------------------------------
// Criterion 2: exhaustive agreement with a literal transcription of the
// estimation pseudocode
// ---------------------------------------------------------------------------

/// Second, independent transcription: a line-by-line translation of the
/// published pseudocode, with the no-recommendation clause falling
/// through into the branch structure exactly as written.
fn pseudocode_oracle(direct: u8, t: u64, u: u64, n: u64, theta: f64) -> u8 {
    let total = t + u + n;
    let mut final_trust: Option<u8> = None;
    if total == 0 {
        final_trust = Some(direct); // Final Trust = Direct Trust
    }
    let verdict = if direct == 0 {
        if u >= t || (n >= t && n >= u) {
            0
        } else {
            let p_t = t as f64 / (total + 1) as f64;
            if p_t >= theta {
                1
            } else {
                0
            }
        }
    } else if direct == 1 {
        if t >= u || (n >= t && n >= u) {
            1
        } else {
            let p_u = u as f64 / (total + 1) as f64;
            if p_u >= theta {
                0
            } else {
                1
            }
        }
    } else if t > u {
        1
    } else {
        0
    };
    match final_trust {
        // a neutral direct label is not a legal binary output; the branch
        // structure resolves it, and 0/1 direct labels pass through
        Some(d @ (0 | 1)) => d,
        _ => verdict,
    }
}

#[test]
fn criterion_2_algorithm_oracle_equivalence() {
    let started = std::time::Instant::now();
    let mut cases = 0u64;
    for direct_raw in 0u8..=2 {
        let direct = TrustLabel::from_u8(direct_raw).unwrap();
        for total in 0u64..=12 {
            for t in 0..=total {
                for u in 0..=(total - t) {
                    let n = total - t - u;
                    for step in 1..=19 {
                        let theta = step as f64 * 0.05;
                        let cfg = AggregationConfig::new(theta).unwrap();
                        let recs = RecommendationSet::new(t, u, n);
                        let got = estimate_trust(direct, &recs, &cfg).as_u8();
                        let expected = pseudocode_oracle(direct_raw, t, u, n, theta);
                        assert_eq!(
                            got, expected,
                            "disagreement at direct={direct_raw} t={t} u={u} n={n} theta={theta}"
                        );
                        cases += 1;
                    }
                }
            }
        }
    }
    assert!(cases >= 13_650, "only {cases} cases");
    println!(
        "criterion 2: PASS ({cases} cases, zero disagreements, in {:.2?})",
        started.elapsed()
    );
}

// ---------------------------------------------------------------------------
// Criterion 3: k-means cost monotonicity and brute-force parity
// ---------------------------------------------------------------------------

/// Exhaustive optimal partition into at most `k` clusters (canonical
/// assignment enumeration); independent of the k-means implementation.
fn brute_force_optimal_cost(samples: &[[f64; 4]], k: usize) -> f64 {
    let n = samples.len();
    assert!(n <= 12 && k <= 3);
    let mut best = f64::INFINITY;
    let mut assignment = vec![0usize; n];
    loop {
        let mut max_used = 0usize;
        let mut canonical = true;
        for &a in &assignment {
            if a > max_used {
                canonical = false;
                break;
            }
            if a == max_used {
                max_used += 1;
            }
        }
        if canonical {
            let mut sums = vec![[0.0f64; 4]; k];
            let mut counts = vec![0usize; k];
            for (s, &a) in samples.iter().zip(&assignment) {
                counts[a] += 1;
                for d in 0..4 {
                    sums[a][d] += s[d];
                }
            }
            let mut cost = 0.0;
            for (s, &a) in samples.iter().zip(&assignment) {
                for d in 0..4 {
                    let diff = s[d] - sums[a][d] / counts[a] as f64;
                    cost += diff * diff;
                }
            }
            if cost < best {
                best = cost;
            }
        }
        let mut pos = n;
        loop {
            if pos == 0 {
                return best;
            }
            pos -= 1;
            assignment[pos] += 1;
            if assignment[pos] < k {
                break;
            }
            assignment[pos] = 0;
        }
    }
}

#[test]
fn criterion_3_kmeans_properties() {
    let started = std::time::Instant::now();
    let mut parity_checked = 0;
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(0xDA7A, seed));
        // 60 small datasets get the brute-force parity check as well
        let (n, k) = if seed < 60 {
            (rng.random_range(5..=12), rng.random_range(1..=3usize))
        } else {
            (rng.random_range(13..=60), rng.random_range(1..=6usize))
        };
        let samples: Vec<[f64; 4]> = (0..n)
            .map(|_| std::array::from_fn(|_| rng.random_range(0.0..=1.0)))
            .collect();

        let run = kmeans(&samples, k, derive_seed(0xAAA, seed), 300).unwrap();
        for w in run.cost_trace.windows(2) {
            assert!(w[1] <= w[0] + 1e-9, "cost increased on dataset {seed}: {w:?}");
        }

        if n <= 12 && k <= 3 {
            let best = kmeans_best_of(&samples, k, derive_seed(0xC0DE, seed), 64, 300).unwrap();
            let optimal = brute_force_optimal_cost(&samples, k);
            assert!(
                (best.cost - optimal).abs() < 1e-6,
                "dataset {seed}: lloyd {} vs optimal {optimal}",
                best.cost
            );
            parity_checked += 1;
        }
    }
    assert!(parity_checked >= 50);
    println!(
        "criterion 3: PASS (100 monotone cost traces, {parity_checked} brute-force parities, in {:.2?})",
        started.elapsed()
    );
}

// ---------------------------------------------------------------------------
// Criterion 4: elbow recovery on synthetic Gaussian blobs
// ---------------------------------------------------------------------------

/// Three Gaussian blobs in [0,1]^4 with sigma 0.03 and centers at pairwise
/// distance in [0.5, 0.65] (satisfying sigma <= 0.05, distance >= 0.5).
fn gaussian_blobs(seed: u64) -> Vec<[f64; 4]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centers: Vec<[f64; 4]> = Vec::new();
    while centers.len() < 3 {
        let c: [f64; 4] = std::array::from_fn(|_| rng.random_range(0.1..=0.9));
        let ok = centers.iter().all(|p| {
            let d: f64 = p
                .iter()
                .zip(&c)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            (0.5..=0.65).contains(&d)
        });
        if ok {
            centers.push(c);
        }
    }
    let noise = Normal::new(0.0, 0.03).unwrap();
    let mut samples = Vec::with_capacity(360);
    for c in &centers {
        for _ in 0..120 {
            samples.push(std::array::from_fn(|d| {
                (c[d] + noise.sample(&mut rng)).clamp(0.0, 1.0)
            }));
        }
    }
    samples
}

#[test]
fn criterion_4_elbow_recovery() {
    let started = std::time::Instant::now();
    let mut hits = 0;
    for seed in 0..100u64 {
        let samples = gaussian_blobs(derive_seed(0xB10B, seed));
        let selection =
            elbow_select_k(&samples, 1, 8, derive_seed(0xE1B0, seed), 5, 300).unwrap();
        if selection.chosen_k == 3 {
            hits += 1;
        }
    }
    assert!(hits >= 95, "elbow recovered 3 on only {hits}/100 seeds");
    println!(
        "criterion 4: PASS (elbow chose 3 on {hits}/100 blob seeds in {:.2?})",
        started.elapsed()
    );
}

// ---------------------------------------------------------------------------
// Criterion 5: forest sanity on the single-threshold separable fixture
// ---------------------------------------------------------------------------

#[test]
fn criterion_5_forest_sanity() {
    let started = std::time::Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5EED);
    let n = 2_000;
    let mut features = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let v = TrustFeatureVector::from_array(std::array::from_fn(|_| rng.random_range(0.0..=1.0)));
        labels.push(if v.t_coi > 0.5 {
            TrustLabel::Trustworthy
        } else {
            TrustLabel::Untrustworthy
        });
        features.push(v);
    }
    let split = SplitSpec::new(0.8, 41).unwrap();
    let (model, accuracy) = train_forest(&features, &labels, &split, 100, 8).unwrap();
    let importances = model.feature_importances();
    let sum: f64 = importances.iter().sum();

    assert!(accuracy >= 0.98, "held-out accuracy {accuracy}");
    assert!(importances[1] >= 0.8, "coi importance {}", importances[1]);
    assert!((sum - 1.0).abs() < 1e-9, "importances sum {sum}");
    println!(
        "criterion 5: PASS (accuracy {accuracy:.4}, coi importance {:.4}, sum-1 {:.1e}, in {:.2?})",
        importances[1],
        (sum - 1.0).abs(),
        started.elapsed()
    );
}

// ---------------------------------------------------------------------------
// Criteria 6 and 7: end-to-end synthetic pipeline and attack resilience
// ---------------------------------------------------------------------------

const ACCEPTANCE_SEEDS: std::ops::Range<u64> = 0..10;

fn default_sim(seed: u64) -> SimConfig {
    SimConfig {
        rng_seed: seed,
        ..SimConfig::default()
    }
}

#[test]
fn criterion_6_end_to_end_pipeline() {
    let started = std::time::Instant::now();
    let pipeline = PipelineParams::default();
    let mut acc = [0.0f64; 3]; // at theta 0.3, 0.7, 0.9
    let mut min_acc = f64::INFINITY;
    for seed in ACCEPTANCE_SEEDS {
        let report = run_experiment(&default_sim(seed), &AttackSpec::none(), &pipeline).unwrap();
        min_acc = min_acc.min(report.results.metrics.accuracy);
        for point in &report.results.theta_sweep {
            for (slot, target) in [(0usize, 0.3f64), (1, 0.7), (2, 0.9)] {
                if (point.theta - target).abs() < 1e-12 {
                    acc[slot] += point.accuracy;
                }
            }
        }
    }
    let n = ACCEPTANCE_SEEDS.end as f64;
    let (a03, a07, a09) = (acc[0] / n, acc[1] / n, acc[2] / n);

    assert!(a07 >= 0.85, "mean accuracy at theta 0.7 is {a07:.4}");
    assert!(a07 >= a03, "theta 0.7 accuracy {a07:.4} below theta 0.3 {a03:.4}");
    assert!(a07 >= a09, "theta 0.7 accuracy {a07:.4} below theta 0.9 {a09:.4}");
    println!(
        "criterion 6: PASS (mean accuracy 0.3/0.7/0.9 = {a03:.4}/{a07:.4}/{a09:.4}, per-seed min {min_acc:.4}, in {:.2?})",
        started.elapsed()
    );
}

#[test]
fn criterion_7_ballot_stuffing_resilience() {
    let started = std::time::Instant::now();
    let attack = AttackSpec::new(AttackKind::BallotStuffing, 0.3, 1.0).unwrap();
    let mut ft_05 = 0.0;
    let mut ft_07 = 0.0;
    for seed in ACCEPTANCE_SEEDS {
        let sim = default_sim(seed);
        for (theta, out) in [(0.5, &mut ft_05), (0.7, &mut ft_07)] {
            let pipeline = PipelineParams {
                theta,
                ..PipelineParams::default()
            };
            let report = run_experiment(&sim, &attack, &pipeline).unwrap();
            *out += report.results.metrics.false_trust_rate;
        }
    }
    let n = ACCEPTANCE_SEEDS.end as f64;
    let (ft_05, ft_07) = (ft_05 / n, ft_07 / n);
    assert!(
        ft_07 <= ft_05,
        "false-trust at theta 0.7 ({ft_07:.4}) above theta 0.5 ({ft_05:.4})"
    );
    println!(
        "criterion 7: PASS (mean false-trust rate {ft_07:.4} at theta 0.7 vs {ft_05:.4} at 0.5, in {:.2?})",
        started.elapsed()
    );
}

// ---------------------------------------------------------------------------
// Criterion 9: cluster geometry on the end-to-end synthetic run
// ---------------------------------------------------------------------------

#[test]
fn criterion_9_cluster_geometry() {
    let started = std::time::Instant::now();
    let pipeline = PipelineParams::default();
    let mut high = [0usize; 3]; // label counts in the coi/reward >= 0.4 region
    let mut low = [0usize; 3]; // label counts in the coi/reward <= 0.2 region
    for seed in ACCEPTANCE_SEEDS {
        let labeled = label_trace(&default_sim(seed), &AttackSpec::none(), &pipeline).unwrap();
        for ((_, v), label) in labeled.features.iter().zip(&labeled.labels) {
            if v.t_coi >= 0.4 && v.t_reward >= 0.4 {
                high[label.as_u8() as usize] += 1;
            }
            if v.t_coi <= 0.2 && v.t_reward <= 0.2 {
                low[label.as_u8() as usize] += 1;
            }
        }
    }
    let high_total: usize = high.iter().sum();
    let low_total: usize = low.iter().sum();
    assert!(high_total > 0 && low_total > 0, "empty regions: {high:?} {low:?}");
    let trustworthy_share = high[TrustLabel::Trustworthy.as_u8() as usize] as f64 / high_total as f64;
    let untrustworthy_share = low[TrustLabel::Untrustworthy.as_u8() as usize] as f64 / low_total as f64;
    assert!(
        trustworthy_share >= 0.7,
        "high region only {trustworthy_share:.3} trustworthy ({high:?})"
    );
    assert!(
        untrustworthy_share >= 0.7,
        "low region only {untrustworthy_share:.3} untrustworthy ({low:?})"
    );
    println!(
        "criterion 9: PASS (coi,reward >= 0.4 region {:.1}% trustworthy of {high_total}; <= 0.2 region {:.1}% untrustworthy of {low_total}; in {:.2?})",
        trustworthy_share * 100.0,
        untrustworthy_share * 100.0,
        started.elapsed()
    );
}

// criterion 8 (byte-identical CLI reruns) lives in the CLI crate's
// acceptance suite, next to the binary it drives.

#[test]
fn experiment_report_mentions_attack_block() {
    let sim = SimConfig {
        node_count: 30,
        interaction_count: 2_000,
        rng_seed: 5,
        ..SimConfig::default()
    };
    let attack = AttackSpec::new(AttackKind::BallotStuffing, 0.2, 1.0).unwrap();
    let report = run_experiment(&sim, &attack, &PipelineParams::default()).unwrap();
    let text = report.to_json_string();
    assert!(text.contains("ballot_stuffing"));
}
