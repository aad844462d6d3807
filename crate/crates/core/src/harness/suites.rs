//! The experiment suites behind `run`.
//!
//! Every suite forks one child source per trial from the root seed, so
//! trials are independent streams and the whole report is reproducible from
//! (suite, params, seed). Tolerances come from three places and each metric
//! says which: observed three-standard-error bands for mean statistics, the
//! sampling-lemma plan for rate targets, and one-sided bounds for
//! ceiling/floor claims.

use super::{
    predict, ExperimentReport, ExperimentSpec, HarnessError, MetricReport, PredictParams,
    SuiteParams,
};
use crate::bloom;
use crate::bounds::{self, BoundQuery, ChernoffVariant};
use crate::count_min::{CmsParams, CountMinSketch, HeavyHitterTracker, StreamMode};
use crate::cuckoo::CuckooTable;
use crate::fks::FksTable;
use crate::hashing::HashFunctionHandle;
use crate::lsh::{BitVector, PlebIndex, REPLICA_FAILURE_BOUND};
use crate::mincut::{karger_contract, two_cliques_with_bridge};
use crate::rng::{Discrete, Method, RandomSource};
use crate::skiplist::SkipList;
use crate::sorting::{quickselect, quicksort};
use crate::treap::Treap;

const SUITES: &[(&str, &str)] = &[
    (
        "geometric_mean",
        "calibration: trials-to-first-success mean and variance",
    ),
    (
        "coupon_collector",
        "calibration: mean throws to fill every bin",
    ),
    (
        "quicksort_mean_comparisons",
        "mean comparisons vs 2(n+1)H_n - 4n",
    ),
    (
        "quickselect_mean_bound",
        "mean selection comparisons stay under 4n",
    ),
    (
        "karger_bridge_success",
        "single-run min-cut success rate floor",
    ),
    ("treap_depth", "per-rank mean depth vs H_j + H_(n-j+1) - 2"),
    (
        "treap_delete_rotations",
        "delete rotations vs 2 - 1/l - 1/(n-l+1)",
    ),
    (
        "skiplist_space",
        "mean forward links per element vs 1/(1-p)",
    ),
    (
        "hash_universality",
        "exhaustive family collision/independence checks",
    ),
    (
        "fks_build",
        "perfect-hash builds: collisions, space, probe count",
    ),
    (
        "cuckoo_fill",
        "fill runs: residency, probes, displacements, rehashes",
    ),
    (
        "bloom_fp",
        "false negatives and false-positive rate vs exact form",
    ),
    (
        "cms_zipf",
        "sketch dimensions, error bands, heavy-hitter recall",
    ),
    (
        "lsh_planted",
        "planted-neighbor recall, soundness, candidate budget",
    ),
    (
        "bounds_golden",
        "tail-bound calculators against golden values",
    ),
];

pub fn available_suites() -> Vec<&'static str> {
    SUITES.iter().map(|(name, _)| *name).collect()
}

pub fn suite_description(name: &str) -> Option<&'static str> {
    SUITES
        .iter()
        .find(|(suite, _)| *suite == name)
        .map(|(_, desc)| *desc)
}

pub(super) fn run_suite(spec: &ExperimentSpec) -> Result<ExperimentReport, HarnessError> {
    let p = &spec.params;
    let seed = spec.seed;
    let (metrics, trials, bits_consumed) = match spec.suite.as_str() {
        "geometric_mean" => geometric_mean(p, seed)?,
        "coupon_collector" => coupon_collector(p, seed)?,
        "quicksort_mean_comparisons" => quicksort_mean(p, seed)?,
        "quickselect_mean_bound" => quickselect_bound(p, seed)?,
        "karger_bridge_success" => karger_bridge(p, seed)?,
        "treap_depth" => treap_depth(p, seed)?,
        "treap_delete_rotations" => treap_delete_rotations(p, seed)?,
        "skiplist_space" => skiplist_space(p, seed)?,
        "hash_universality" => hash_universality()?,
        "fks_build" => fks_build(p, seed)?,
        "cuckoo_fill" => cuckoo_fill(p, seed)?,
        "bloom_fp" => bloom_fp(p, seed)?,
        "cms_zipf" => cms_zipf(p, seed)?,
        "lsh_planted" => lsh_planted(p, seed)?,
        "bounds_golden" => bounds_golden()?,
        other => {
            return Err(HarnessError::UnknownSuite(
                other.to_string(),
                available_suites().join(", "),
            ))
        }
    };
    Ok(ExperimentReport {
        version: 1,
        suite: spec.suite.clone(),
        seed,
        trials,
        metrics,
        bits_consumed,
        runtime_ms: None,
    })
}

type SuiteOutput = (Vec<MetricReport>, u64, u64);

fn mean_and_se(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    if samples.len() < 2 {
        return (mean, 0.0);
    }
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn binomial_se(rate: f64, trials: u64) -> f64 {
    (rate.max(1e-12) * (1.0 - rate).max(1e-12) / trials as f64).sqrt()
}

const THREE_SE: &str = "three_standard_errors";

fn trial_error(trial: u64) -> impl FnOnce(&dyn std::fmt::Display) -> HarnessError {
    move |e| HarnessError::TrialFailed {
        trial,
        message: e.to_string(),
    }
}

// --- calibration suites ----------------------------------------------------

fn geometric_mean(params: &SuiteParams, seed: u64) -> Result<SuiteOutput, HarnessError> {
    let p = params.p.unwrap_or(0.5);
    let trials = params.trials.unwrap_or(100_000);
    let root = RandomSource::new(seed);
    let mut bits = 0u64;
    let mut samples = Vec::with_capacity(trials as usize);
    for t in 0..trials {
        let mut src = root.fork(t);
        let sample = src.geometric(p).map_err(|e| trial_error(t)(&e))?;
        samples.push(sample.value as f64);
        bits += src.bits_consumed();
    }
    let predicted = predict(
        "geometric_mean",
        &PredictParams {
            p: Some(p),
            ..Default::default()
        },
    )?;
    let (mean, se) = mean_and_se(&samples);
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (trials as f64 - 1.0);
    let m4 = samples.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / trials as f64;
    let se_var = ((m4 - var * var).max(0.0) / trials as f64).sqrt();
    let var_predicted = (1.0 - p) / (p * p);
    let metrics = vec![
        MetricReport::band("geometric_mean_trials", mean, predicted, 3.0 * se, THREE_SE),
        MetricReport::band(
            "geometric_variance",
            var,
            var_predicted,
            3.0 * se_var,
            "three_standard_errors(plug_in_fourth_moment)",
        ),
    ];
    Ok((metrics, trials, bits))
}

fn coupon_collector(params: &SuiteParams, seed: u64) -> Result<SuiteOutput, HarnessError> {
    let n = params.n.unwrap_or(100);
    let trials = match params.trials {
        Some(t) => t,
        None => bounds::trials_needed(0.02, 0.01, 1.0)?.n_trials,
    };
    let root = RandomSource::new(seed);
    let mut bits = 0u64;
    let mut samples = Vec::with_capacity(trials as usize);
    for t in 0..trials {
        let mut src = root.fork(t);
        let mut seen = vec![false; n as usize];
        let mut filled = 0u64;
        let mut throws = 0u64;
        while filled < n {
            let bin = src.uniform_below(n, Method::Rejection) as usize;
            throws += 1;
            if !seen[bin] {
                seen[bin] = true;
                filled += 1;
            }
        }
        samples.push(throws as f64);
        bits += src.bits_consumed();
    }
    let predicted = predict(
        "coupon_collector",
        &PredictParams {
            n: Some(n),
            ..Default::default()
        },
    )?;
    let (mean, se) = mean_and_se(&samples);
    let metrics = vec![MetricReport::band(
        "coupon_collector_mean_throws",
        mean,
        predicted,
        3.0 * se,
        THREE_SE,
    )];
    Ok((metrics, trials, bits))
}

// --- classic algorithms ------------------------------------------------------

fn quicksort_mean(params: &SuiteParams, seed: u64) -> Result<SuiteOutput, HarnessError> {
    let n = params.n.unwrap_or(100);
    let eps = params.eps.unwrap_or(0.02);
    let delta = params.delta.unwrap_or(0.01);
    let plan = bounds::trials_needed(eps, delta, 1.0)?;
    let trials = params.trials.unwrap_or(plan.n_trials);
    let keys: Vec<u32> = (0..n as u32).collect();
    let root = RandomSource::new(seed);
    let mut bits = 0u64;
    let mut total = 0u64;
    for t in 0..trials {
        let mut src = root.fork(t);
        let trace = quicksort(&mut src, &keys).map_err(|e| trial_error(t)(&e))?;
        total += trace.comparisons;
        bits += src.bits_consumed();
    }
    let observed = total as f64 / trials as f64;
    let predicted = predict(
        "quicksort_comparisons",
        &PredictParams {
            n: Some(n),
            ..Default::default()
        },
    )?;
    let metrics = vec![MetricReport::band(
        "quicksort_mean_comparisons",
        observed,
        predicted,
        eps * predicted,
        &format!("sampling_lemma(eps={eps},delta={delta},rho=1)"),
    )];
    Ok((metrics, trials, bits))
}

fn quickselect_bound(params: &SuiteParams, seed: u64) -> Result<SuiteOutput, HarnessError> {
    let n = params.n.unwrap_or(1000);
    let trials = params.trials.unwrap_or(10_000);
    let keys: Vec<u32> = (0..n as u32).collect();
    let root = RandomSource::new(seed);
    let mut bits = 0u64;
    let mut total = 0u64;
    for t in 0..trials {
        let mut src = root.fork(t);
        let k = 1 + src.uniform_below(n, Method::Rejection) as usize;
        let trace = quickselect(&mut src, &keys, k).map_err(|e| trial_error(t)(&e))?;
        total += trace.comparisons;
        bits += src.bits_consumed();
    }
    let observed = total as f64 / trials as f64;
    let metrics = vec![MetricReport::at_most(
        "quickselect_mean_comparisons",
        observed,
        4.0 * n as f64,
    )];
    Ok((metrics, trials, bits))
}

fn karger_bridge(params: &SuiteParams, seed: u64) -> Result<SuiteOutput, HarnessError> {
    let trials = params.trials.unwrap_or(100_000);
    let graph = two_cliques_with_bridge(4);
    let floor = predict(
        "karger_success_floor",
        &PredictParams {
            n: Some(graph.vertex_count() as u64),
            ..Default::default()
        },
    )?;
    let root = RandomSource::new(seed);
    let mut bits = 0u64;
    let mut hits = 0u64;
    for t in 0..trials {
        let mut src = root.fork(t);
        let cut = karger_contract(&mut src, &graph).map_err(|e| trial_error(t)(&e))?;
        if cut.cut_size == 1 {
            hits += 1;
        }
        bits += src.bits_consumed();
    }
    let observed = hits as f64 / trials as f64;
    let metrics = vec![MetricReport::at_least(
        "karger_single_run_success_rate",
        observed,
        floor,
    )];
    Ok((metrics, trials, bits))
}

// --- ordered dictionaries ----------------------------------------------------

fn treap_depth(params: &SuiteParams, seed: u64) -> Result<SuiteOutput, HarnessError> {
    let n = params.n.unwrap_or(1000);
    let rebuilds = params.trials.unwrap_or(1000);
    let ranks = [1u64, (n / 2).max(1), n];
    let root = RandomSource::new(seed);
    let mut bits = 0u64;
    let mut depths: Vec<Vec<f64>> = vec![Vec::with_capacity(rebuilds as usize); ranks.len()];
    for t in 0..rebuilds {
        let mut src = root.fork(t);
        let mut treap = Treap::new();
        for key in 1..=n {
            treap
                .insert(key, &mut src)
                .map_err(|e| trial_error(t)(&e))?;
        }
        for (slot, &rank) in ranks.iter().enumerate() {
            let outcome = treap.search(&rank);
            if !outcome.found {
                return Err(HarnessError::TrialFailed {
                    trial: t,
                    message: format!("rank {rank} missing"),
                });
            }
            depths[slot].push(outcome.depth as f64);
        }
        bits += src.bits_consumed();
    }
    let mut metrics = Vec::new();
    for (slot, &rank) in ranks.iter().enumerate() {
        let predicted = predict(
            "treap_depth",
            &PredictParams {
                n: Some(n),
                rank: Some(rank),
                ..Default::default()
            },
        )?;
        let (mean, se) = mean_and_se(&depths[slot]);
        metrics.push(MetricReport::band(
            &format!("treap_depth_rank_{rank}"),
            mean,
            predicted,
            3.0 * se,
            THREE_SE,
        ));
    }
    // Exact small case: all 3! priority orders of three keys put the middle
    // key at mean depth exactly 1.
    let mut total_depth = 0usize;
    let orders = [
        [3u64, 2, 1],
        [3, 1, 2],
        [2, 3, 1],
        [1, 3, 2],
        [2, 1, 3],
        [1, 2, 3],
    ];
    for priorities in orders {
        let mut treap = Treap::new();
        for (key, &priority) in [1u64, 2, 3].iter().zip(priorities.iter()) {
            treap
                .insert_with_priority(*key, priority)
                .map_err(|e| trial_error(0)(&e))?;
        }
        total_depth += treap.search(&2).depth;
    }
    metrics.push(MetricReport::band(
        "treap_depth_exhaustive_n3_middle",
        total_depth as f64 / orders.len() as f64,
        1.0,
        1e-12,
        "exhaustive_enumeration",
    ));
    Ok((metrics, rebuilds, bits))
}

fn treap_delete_rotations(params: &SuiteParams, seed: u64) -> Result<SuiteOutput, HarnessError> {
    let trials = params.trials.unwrap_or(100_000);
    let max_n = params.n.unwrap_or(256);
    let root = RandomSource::new(seed);
    let mut bits = 0u64;
    let mut diffs = Vec::with_capacity(trials as usize);
    let mut rotations_all = Vec::with_capacity(trials as usize);
    for t in 0..trials {
        let mut src = root.fork(t);
        let n = 1 + src.uniform_below(max_n, Method::Rejection);
        let mut treap = Treap::new();
        for key in 1..=n {
            treap
                .insert(key, &mut src)
                .map_err(|e| trial_error(t)(&e))?;
        }
        let rank = 1 + src.uniform_below(n, Method::Rejection);
        let rotations = treap.delete(&rank).map_err(|e| trial_error(t)(&e))? as f64;
        let predicted = predict(
            "treap_delete_rotations",
            &PredictParams {
                n: Some(n),
                rank: Some(rank),
                ..Default::default()
            },
        )?;
        diffs.push(rotations - predicted);
        rotations_all.push(rotations);
        bits += src.bits_consumed();
    }
    let (diff_mean, diff_se) = mean_and_se(&diffs);
    let (global_mean, _) = mean_and_se(&rotations_all);
    let metrics = vec![
        MetricReport::band(
            "treap_delete_rotations_minus_predicted",
            diff_mean,
            0.0,
            3.0 * diff_se,
            THREE_SE,
        ),
        MetricReport::at_most("treap_delete_rotations_global_mean", global_mean, 2.0),
    ];
    Ok((metrics, trials, bits))
}

fn skiplist_space(params: &SuiteParams, seed: u64) -> Result<SuiteOutput, HarnessError> {
    let n = params.n.unwrap_or(10_000);
    let p = params.p.unwrap_or(0.5);
    let builds = params.trials.unwrap_or(1);
    let root = RandomSource::new(seed);
    let mut bits = 0u64;
    let mut heights = Vec::with_capacity((n * builds) as usize);
    for t in 0..builds {
        let mut src = root.fork(t);
        let mut list = SkipList::new(p, n).map_err(|e| trial_error(t)(&e))?;
        for key in 0..n {
            list.insert(key, &mut src).map_err(|e| trial_error(t)(&e))?;
        }
        heights.extend(list.keys_and_heights().iter().map(|&(_, h)| h as f64));
        bits += src.bits_consumed();
    }
    let predicted = predict(
        "skiplist_links",
        &PredictParams {
            p: Some(p),
            ..Default::default()
        },
    )?;
    let (mean, se) = mean_and_se(&heights);
    let metrics = vec![MetricReport::band(
        "skiplist_mean_links_per_element",
        mean,
        predicted,
        3.0 * se,
        THREE_SE,
    )];
    Ok((metrics, builds, bits))
}

// --- hash families -----------------------------------------------------------

fn hash_universality() -> Result<SuiteOutput, HarnessError> {
    let mut metrics = Vec::new();

    // Affine mod-prime family, p = 5 into m = 2 buckets: every distinct
    // pair collides under at most p(p-1)/m = 10 of the 20 members.
    let p = 5u64;
    let m = 2u64;
    let mut worst = 0u64;
    for x in 0..p {
        for y in 0..p {
            if x == y {
                continue;
            }
            let mut collisions = 0u64;
            for a in 1..p {
                for b in 0..p {
                    let h = HashFunctionHandle::mod_p_with(a, b, p, m)
                        .map_err(|e| trial_error(0)(&e))?;
                    if h.eval(x) == h.eval(y) {
                        collisions += 1;
                    }
                }
            }
            worst = worst.max(collisions);
        }
    }
    metrics.push(MetricReport::at_most(
        "mod_p_exhaustive_worst_pair_collision_rate",
        worst as f64 / (p * (p - 1)) as f64,
        1.0 / m as f64,
    ));

    // Multiply-shift, k = 4 to l = 2 bits: over the 8 odd multipliers every
    // distinct pair collides with frequency at most 2^(1-l) = 1/2.
    let family: Vec<HashFunctionHandle> = (0..8u64)
        .map(|i| HashFunctionHandle::multiply_shift_with(2 * i + 1, 4, 2))
        .collect::<Result<_, _>>()
        .map_err(|e| trial_error(0)(&e))?;
    let mut worst = 0usize;
    for x in 0..16u64 {
        for y in 0..16u64 {
            if x != y {
                worst = worst.max(family.iter().filter(|h| h.eval(x) == h.eval(y)).count());
            }
        }
    }
    metrics.push(MetricReport::at_most(
        "multiply_shift_exhaustive_worst_pair_collision_rate",
        worst as f64 / family.len() as f64,
        0.5,
    ));

    // Tabulation with two 1-bit characters: all 16 table fillings. Every
    // triple of distinct keys is jointly uniform (16/8 = 2 fillings per
    // outcome), while the four keys aa,ab,ba,bb always XOR to zero.
    let mut fillings = Vec::new();
    for filling in 0u64..16 {
        let t0 = vec![filling & 1, (filling >> 1) & 1];
        let t1 = vec![(filling >> 2) & 1, (filling >> 3) & 1];
        fillings.push(
            HashFunctionHandle::tabulation_with(vec![t0, t1], 1, 1)
                .map_err(|e| trial_error(0)(&e))?,
        );
    }
    let mut triple_imbalance = 0i64;
    for x in 0..4u64 {
        for y in 0..4u64 {
            for z in 0..4u64 {
                if x == y || y == z || x == z {
                    continue;
                }
                let mut counts = [0i64; 8];
                for h in &fillings {
                    counts[(h.eval(x) << 2 | h.eval(y) << 1 | h.eval(z)) as usize] += 1;
                }
                for c in counts {
                    triple_imbalance = triple_imbalance.max((c - 2).abs());
                }
            }
        }
    }
    metrics.push(MetricReport::band(
        "tabulation_three_wise_joint_imbalance",
        triple_imbalance as f64,
        0.0,
        0.0,
        "exhaustive_enumeration",
    ));
    let xor_worst = fillings
        .iter()
        .map(|h| h.eval(0) ^ h.eval(1) ^ h.eval(2) ^ h.eval(3))
        .max()
        .unwrap_or(0);
    metrics.push(MetricReport::band(
        "tabulation_four_key_xor",
        xor_worst as f64,
        0.0,
        0.0,
        "exhaustive_enumeration",
    ));

    Ok((metrics, 1, 0))
}

// --- hashed storage ----------------------------------------------------------

fn distinct_keys(src: &mut RandomSource, count: usize, bits: u32) -> Vec<u64> {
    let mut seen = std::collections::HashSet::with_capacity(count * 2);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let key = src.next_bits(bits);
        if seen.insert(key) {
            out.push(key);
        }
    }
    out
}

fn fks_build(params: &SuiteParams, seed: u64) -> Result<SuiteOutput, HarnessError> {
    let n = params.n.unwrap_or(10_000) as usize;
    let builds = params.trials.unwrap_or(100);
    let root = RandomSource::new(seed);
    let mut bits = 0u64;
    let mut integrity_violations = 0u64;
    let mut worst_slot_ratio = 0.0f64;
    let mut worst_evals = 0u32;
    let mut lookup_mismatches = 0u64;
    let mut resamples = 0u64;
    for t in 0..builds {
        let mut src = root.fork(t);
        let keys = distinct_keys(&mut src, n, 40);
        let pairs: Vec<(u64, u64)> = keys.iter().map(|&k| (k, k ^ 0xABCD)).collect();
        let table = FksTable::build(&mut src, &pairs).map_err(|e| trial_error(t)(&e))?;
        if table.validate().is_err() {
            integrity_violations += 1;
        }
        worst_slot_ratio = worst_slot_ratio.max(table.total_slots() as f64 / n as f64);
        resamples += table.stats().outer_resamples;
        let members: std::collections::HashSet<u64> = keys.iter().copied().collect();
        for &key in &keys {
            let (value, outcome) = table.lookup(key);
            worst_evals = worst_evals.max(outcome.hash_evals);
            if value != Some(&(key ^ 0xABCD)) {
                lookup_mismatches += 1;
            }
        }
        let mut probed = 0usize;
        while probed < n {
            let probe = src.next_bits(40);
            if members.contains(&probe) {
                continue;
            }
            probed += 1;
            let (value, outcome) = table.lookup(probe);
            worst_evals = worst_evals.max(outcome.hash_evals);
            if value.is_some() {
                lookup_mismatches += 1;
            }
        }
        bits += src.bits_consumed();
    }
    let metrics = vec![
        MetricReport::band(
            "fks_integrity_violations",
            integrity_violations as f64,
            0.0,
            0.0,
            "hard_assertion",
        ),
        MetricReport::at_most("fks_worst_slots_per_key", worst_slot_ratio, 5.0),
        MetricReport::at_most("fks_worst_lookup_hash_evals", worst_evals as f64, 2.0),
        MetricReport::band(
            "fks_lookup_mismatches",
            lookup_mismatches as f64,
            0.0,
            0.0,
            "hard_assertion",
        ),
        MetricReport::at_most(
            "fks_mean_outer_resamples",
            resamples as f64 / builds as f64,
            2.0,
        ),
    ];
    Ok((metrics, builds, bits))
}

fn cuckoo_fill(params: &SuiteParams, seed: u64) -> Result<SuiteOutput, HarnessError> {
    let slots = params.n.unwrap_or(1 << 14) as usize;
    let fills = params.trials.unwrap_or(20);
    let load = 0.45f64;
    let root = RandomSource::new(seed);
    let mut bits = 0u64;
    let mut residency_violations = 0u64;
    let mut worst_probes = 0u32;
    let mut total_displacements = 0u64;
    let mut total_inserts = 0u64;
    let mut worst_rehashes = 0u64;
    for t in 0..fills {
        let mut src = root.fork(t);
        let mut table =
            CuckooTable::with_load_limit(&mut src, slots, load).map_err(|e| trial_error(t)(&e))?;
        let target = (slots as f64 * load).floor() as usize;
        let mut inserted = Vec::with_capacity(target);
        while inserted.len() < target {
            let key = src.uniform_u64();
            if table.contains(key) {
                continue;
            }
            table
                .insert(key, key, &mut src)
                .map_err(|e| trial_error(t)(&e))?;
            inserted.push(key);
        }
        total_inserts += target as u64;
        total_displacements += table.stats().displacements;
        worst_rehashes = worst_rehashes.max(table.stats().rehashes);
        if table.validate().is_err() {
            residency_violations += 1;
        }
        for &key in &inserted {
            let (value, probes) = table.lookup(key);
            worst_probes = worst_probes.max(probes);
            if value != Some(&key) {
                residency_violations += 1;
            }
        }
        for _ in 0..target {
            let probe = src.uniform_u64();
            if inserted.contains(&probe) {
                continue;
            }
            let (_, probes) = table.lookup(probe);
            worst_probes = worst_probes.max(probes);
        }
        bits += src.bits_consumed();
    }
    let metrics = vec![
        MetricReport::band(
            "cuckoo_residency_violations",
            residency_violations as f64,
            0.0,
            0.0,
            "hard_assertion",
        ),
        MetricReport::at_most("cuckoo_worst_lookup_probes", worst_probes as f64, 2.0),
        MetricReport::at_most(
            "cuckoo_mean_displacements_per_insert",
            total_displacements as f64 / total_inserts as f64,
            10.0,
        ),
        MetricReport::at_most("cuckoo_worst_rehashes_per_fill", worst_rehashes as f64, 3.0),
    ];
    Ok((metrics, fills, bits))
}

// --- sketches ----------------------------------------------------------------

fn bloom_fp(params: &SuiteParams, seed: u64) -> Result<SuiteOutput, HarnessError> {
    let n = params.n.unwrap_or(10_000);
    let eps = params.eps.unwrap_or(0.01);
    let probes = params.trials.unwrap_or(100_000);
    let plan = bloom::plan(n, eps).map_err(|e| trial_error(0)(&e))?;
    let mut src = RandomSource::new(seed).fork(0);
    let universe_max = (1u64 << 40) - 1;
    let mut filter =
        bloom::BloomFilter::new(&mut src, plan, universe_max).map_err(|e| trial_error(0)(&e))?;
    let keys = distinct_keys(&mut src, n as usize, 40);
    let members: std::collections::HashSet<u64> = keys.iter().copied().collect();
    for &key in &keys {
        filter.insert(key);
    }
    let false_negatives = keys.iter().filter(|&&k| !filter.query(k)).count();

    let mut hits = 0u64;
    let mut done = 0u64;
    while done < probes {
        let probe = src.next_bits(40);
        if members.contains(&probe) {
            continue;
        }
        done += 1;
        if filter.query(probe) {
            hits += 1;
        }
    }
    let observed = hits as f64 / probes as f64;
    let predicted = plan.false_positive_rate(n);
    let se = binomial_se(predicted, probes);

    // Counting variant under the never-decrement-saturated policy: inserts,
    // deletes of half the keys, and the survivors must all still answer true.
    let mut counting = bloom::CountingBloomFilter::new(&mut src, plan, universe_max, 15)
        .map_err(|e| trial_error(0)(&e))?;
    for &key in &keys {
        counting.insert(key);
    }
    for &key in keys.iter().skip(1).step_by(2) {
        counting.remove(key).map_err(|e| trial_error(0)(&e))?;
    }
    let counting_false_negatives = keys
        .iter()
        .step_by(2)
        .filter(|&&k| !counting.query(k))
        .count();

    let metrics = vec![
        MetricReport::band(
            "bloom_false_negatives",
            false_negatives as f64,
            0.0,
            0.0,
            "hard_assertion",
        ),
        MetricReport::band(
            "bloom_false_positive_rate",
            observed,
            predicted,
            3.0 * se,
            "three_standard_errors(binomial)",
        ),
        MetricReport::band(
            "bloom_counting_false_negatives",
            counting_false_negatives as f64,
            0.0,
            0.0,
            "hard_assertion",
        ),
    ];
    Ok((metrics, probes, src.bits_consumed()))
}

fn zipf_weights(keys: u64, exponent: f64) -> Vec<f64> {
    (1..=keys)
        .map(|r| 1.0 / (r as f64).powf(exponent))
        .collect()
}

fn cms_zipf(params: &SuiteParams, seed: u64) -> Result<SuiteOutput, HarnessError> {
    let eps = params.eps.unwrap_or(0.01);
    let delta = params.delta.unwrap_or(0.01);
    let keys = params.n.unwrap_or(1000);
    let phi = params.phi.unwrap_or(0.05);
    let runs = params.trials.unwrap_or(100);
    let updates = 100_000u64;
    let cms_params = CmsParams::new(eps, delta).map_err(|e| trial_error(0)(&e))?;
    let zipf = Discrete::new(&zipf_weights(keys, 1.2)).map_err(|e| trial_error(0)(&e))?;
    let root = RandomSource::new(seed);
    let mut bits = 0u64;

    // Detailed error-band pass on the first run.
    let mut src = root.fork(0);
    let mut sketch = CountMinSketch::new(&mut src, cms_params, StreamMode::NonNegative, keys * 2)
        .map_err(|e| trial_error(0)(&e))?;
    let mut truth = vec![0i64; keys as usize];
    for _ in 0..updates {
        let index = zipf.sample(&mut src) as u64;
        sketch.update(index, 1).map_err(|e| trial_error(0)(&e))?;
        truth[index as usize] += 1;
    }
    let mut lower_violations = 0u64;
    let mut upper_violations = 0u64;
    let slack = (eps * sketch.l1_mass() as f64) as i64;
    for key in 0..keys {
        let estimate = sketch
            .point_query_min(key)
            .map_err(|e| trial_error(0)(&e))?;
        let exact = truth[key as usize];
        if estimate < exact {
            lower_violations += 1;
        }
        if estimate > exact + slack {
            upper_violations += 1;
        }
    }
    bits += src.bits_consumed();

    // Heavy-hitter recall over seeded runs.
    let mut recall_hits = 0u64;
    for t in 0..runs {
        let mut src = root.fork(1 + t);
        let mut sketch =
            CountMinSketch::new(&mut src, cms_params, StreamMode::NonNegative, keys * 2)
                .map_err(|e| trial_error(t)(&e))?;
        let mut tracker = HeavyHitterTracker::new(phi);
        let mut truth = vec![0i64; keys as usize];
        for _ in 0..updates {
            let index = zipf.sample(&mut src) as u64;
            truth[index as usize] += 1;
            tracker
                .heavy_update(&mut sketch, index, 1)
                .map_err(|e| trial_error(t)(&e))?;
        }
        let threshold = phi * sketch.l1_mass() as f64;
        let all_present = (0..keys)
            .filter(|&k| truth[k as usize] as f64 >= threshold)
            .all(|k| tracker.contains(k));
        if all_present {
            recall_hits += 1;
        }
        bits += src.bits_consumed();
    }

    let upper_rate = upper_violations as f64 / keys as f64;
    let metrics = vec![
        MetricReport::band(
            "cms_width",
            cms_params.width as f64,
            (std::f64::consts::E / eps).ceil(),
            0.0,
            "exact",
        ),
        MetricReport::band(
            "cms_depth",
            cms_params.depth as f64,
            (1.0 / delta).ln().ceil(),
            0.0,
            "exact",
        ),
        MetricReport::band(
            "cms_lower_bound_violations",
            lower_violations as f64,
            0.0,
            0.0,
            "hard_assertion",
        ),
        MetricReport::band(
            "cms_upper_band_violation_rate",
            upper_rate,
            0.0,
            delta + 3.0 * binomial_se(delta, keys),
            "delta_plus_three_standard_errors",
        ),
        MetricReport::at_least(
            "cms_heavy_hitter_recall_rate",
            recall_hits as f64 / runs as f64,
            0.99,
        ),
    ];
    Ok((metrics, runs, bits))
}

fn lsh_planted(params: &SuiteParams, seed: u64) -> Result<SuiteOutput, HarnessError> {
    let dim = params.n.unwrap_or(256) as usize;
    let n_points = 2048usize;
    let r1 = 16u32;
    let r2 = 32u32;
    let delta = params.delta.unwrap_or(0.05);
    let builds = params.trials.unwrap_or(3);
    let queries_per_build = 50usize;
    let root = RandomSource::new(seed);
    let mut bits = 0u64;

    let mut replica_successes = 0u64;
    let mut replica_samples = 0u64;
    let mut aggregate_successes = 0u64;
    let mut aggregate_samples = 0u64;
    let mut soundness_violations = 0u64;
    let mut budget_violations = 0u64;

    for t in 0..builds {
        let mut src = root.fork(t);
        let points: Vec<BitVector> = (0..n_points)
            .map(|_| BitVector::random(&mut src, dim))
            .collect();
        let index =
            PlebIndex::build(&mut src, points, r1, r2, delta).map_err(|e| trial_error(t)(&e))?;
        let budget = 2 * index.params().ell;
        for _ in 0..queries_per_build {
            let anchor = src.uniform_below(n_points as u64, Method::Rejection) as usize;
            let mut query = index.points()[anchor].clone();
            let mut flipped = std::collections::HashSet::new();
            while flipped.len() < r1 as usize {
                let pos = src.uniform_below(dim as u64, Method::Rejection) as usize;
                if flipped.insert(pos) {
                    query.flip(pos);
                }
            }
            let mut any = false;
            for replica in 0..index.replica_count() {
                let outcome = index
                    .query_replica(replica, &query)
                    .map_err(|e| trial_error(t)(&e))?;
                replica_samples += 1;
                if outcome.candidates_examined > budget {
                    budget_violations += 1;
                }
                if let Some((_, distance)) = outcome.result {
                    if distance > r2 {
                        soundness_violations += 1;
                    }
                    replica_successes += 1;
                    any = true;
                }
            }
            aggregate_samples += 1;
            if any {
                aggregate_successes += 1;
            }
        }
        bits += src.bits_consumed();
    }

    let metrics = vec![
        MetricReport::at_least(
            "lsh_replica_success_rate",
            replica_successes as f64 / replica_samples as f64,
            1.0 - REPLICA_FAILURE_BOUND,
        ),
        MetricReport::at_least(
            "lsh_aggregate_success_rate",
            aggregate_successes as f64 / aggregate_samples as f64,
            1.0 - delta,
        ),
        MetricReport::band(
            "lsh_soundness_violations",
            soundness_violations as f64,
            0.0,
            0.0,
            "hard_assertion",
        ),
        MetricReport::band(
            "lsh_candidate_budget_violations",
            budget_violations as f64,
            0.0,
            0.0,
            "hard_assertion",
        ),
    ];
    Ok((metrics, builds, bits))
}

// --- bound calculators ---------------------------------------------------------

fn bounds_golden() -> Result<SuiteOutput, HarnessError> {
    let mut metrics = Vec::new();

    let q = BoundQuery {
        mu: 1.0,
        delta: 1.0,
        ..Default::default()
    };
    let classic = bounds::chernoff_upper(&q, ChernoffVariant::Classic)?;
    metrics.push(MetricReport::band(
        "chernoff_classic_mu1_delta1",
        classic,
        std::f64::consts::E / 4.0,
        1e-12,
        "exact",
    ));

    let just_over_third = BoundQuery {
        mu: 1.0,
        delta: 1.8100001,
        ..Default::default()
    };
    let rejected = bounds::chernoff_upper(&just_over_third, ChernoffVariant::Third).is_err();
    metrics.push(MetricReport::band(
        "chernoff_third_window_rejection",
        rejected as u64 as f64,
        1.0,
        0.0,
        "exact",
    ));
    let just_over_fourth = BoundQuery {
        mu: 1.0,
        delta: 4.1100001,
        ..Default::default()
    };
    let rejected = bounds::chernoff_upper(&just_over_fourth, ChernoffVariant::Fourth).is_err();
    metrics.push(MetricReport::band(
        "chernoff_fourth_window_rejection",
        rejected as u64 as f64,
        1.0,
        0.0,
        "exact",
    ));

    let mut worst_rel_err = 0.0f64;
    for n in 1..=100u64 {
        let nf = n as f64;
        let value = bounds::kuw_expected_rounds(0.0, nf, |x| x.ceil() / nf)?;
        let exact = nf * bounds::harmonic(n);
        worst_rel_err = worst_rel_err.max((value - exact).abs() / exact);
    }
    metrics.push(MetricReport::at_most(
        "kuw_full_collection_worst_relative_error",
        worst_rel_err,
        1e-6,
    ));

    Ok((metrics, 1, 0))
}
