//! NC-guided test generation, the Random@K baseline and the MAX sweep.
//!
//! Randomness is keyed, never sequential: seed `i` of a campaign uses
//! `Rng::new(master_seed).fork(i)`, and inside a seed the trial of operator
//! `op` at iteration `t` draws from `seed_rng.fork(t).fork(op.number())`.
//! The Random@K chain draws step `t` from `seed_rng.fork(t)`. Results are
//! therefore independent of scheduling and of `jobs`.

mod cache;

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ast::SourceUnit;
use crate::coverage::{new_neurons, CoverageOracle, NeuronSet, OracleError, DEFAULT_THRESHOLD};
use crate::mutators::{
    applicable, apply, noise_fraction, Mutation, MutationError, MutationOutcome, OperatorId, Rng,
};

pub use cache::OracleCache;

pub const DEFAULT_MAX_MUTATIONS: usize = 3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FuzzConfig {
    pub max_mutations: usize,
    pub activation_threshold: f64,
    pub master_seed: u64,
    pub operator_set: Vec<OperatorId>,
}

impl Default for FuzzConfig {
    fn default() -> Self {
        FuzzConfig {
            max_mutations: DEFAULT_MAX_MUTATIONS,
            activation_threshold: DEFAULT_THRESHOLD,
            master_seed: 0,
            operator_set: OperatorId::ALL.to_vec(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("max mutations must be at least 1")]
    MaxMutations,
    #[error("activation threshold {0} is outside [0, 1]")]
    Threshold(String),
    #[error("operator set is empty")]
    EmptyOperatorSet,
    #[error("operator {0} is listed twice")]
    DuplicateOperator(OperatorId),
}

impl FuzzConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.max_mutations == 0 {
            return Err(ConfigError::MaxMutations);
        }
        if !(0.0..=1.0).contains(&self.activation_threshold) {
            return Err(ConfigError::Threshold(self.activation_threshold.to_string()));
        }
        if self.operator_set.is_empty() {
            return Err(ConfigError::EmptyOperatorSet);
        }
        let mut seen = BTreeSet::new();
        for &op in &self.operator_set {
            if !seen.insert(op) {
                return Err(ConfigError::DuplicateOperator(op));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("corpus contains no usable seed")]
    EmptyCorpus,
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Mutation(#[from] MutationError),
    #[error("no operator applies to the current program of seed {0}")]
    NoApplicableOperator(String),
    #[error("could not start worker pool: {0}")]
    Pool(String),
}

/// A corpus program paired with the neurons its untouched text activates.
#[derive(Clone, Debug, PartialEq)]
pub struct SeedEntry {
    pub id: String,
    pub unit: SourceUnit,
    pub baseline_nc: NeuronSet,
}

impl SeedEntry {
    pub fn new(id: impl Into<String>, unit: SourceUnit, cache: &OracleCache<'_>) -> Result<Self, OracleError> {
        let baseline_nc = cache.activated(unit.text())?;
        Ok(SeedEntry { id: id.into(), unit, baseline_nc })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GeneratedTest {
    pub outcome: MutationOutcome,
    /// Newly activated neurons relative to the lineage's accumulated set
    /// before this test. Always ≥ 1 for guided tests; may be 0 for baseline
    /// tests.
    pub new_neuron_count: usize,
    /// Accumulated set after this test.
    pub nc_after: NeuronSet,
    /// Neurons activated by the mutant itself.
    pub activated: NeuronSet,
    pub operator_trace: Vec<OperatorId>,
}

impl GeneratedTest {
    pub fn new_vs_seed(&self, seed: &SeedEntry) -> usize {
        new_neurons(&self.activated, &seed.baseline_nc).len()
    }

    pub fn noise_fraction(&self, seed: &SeedEntry) -> f64 {
        noise_fraction(&seed.unit, &self.outcome.mutant)
    }
}

/// Everything one seed produced.
#[derive(Clone, Debug, PartialEq)]
pub struct SeedRun {
    pub seed_id: String,
    /// `None` when the oracle rejected the untouched seed.
    pub seed: Option<SeedEntry>,
    pub tests: Vec<GeneratedTest>,
    /// Oracle queries issued for this seed, counting cache hits.
    pub oracle_calls: usize,
    /// Why the seed stopped early, when it did.
    pub error: Option<String>,
}

/// A named, parsed corpus program.
#[derive(Clone, Debug, PartialEq)]
pub struct Seed {
    pub id: String,
    pub unit: SourceUnit,
}

/// Runs the greedy coverage-guided loop on one seed.
///
/// Each iteration tries every applicable operator once on the current
/// program and keeps the first mutant with the largest number of neurons
/// outside the accumulated set. The loop stops after `max_mutations`
/// emissions or as soon as no mutant adds a neuron.
pub fn fuzz_seed(
    seed: &SeedEntry,
    cache: &OracleCache<'_>,
    cfg: &FuzzConfig,
    rng: &Rng,
) -> Result<SeedRun, OracleError> {
    let mut run = SeedRun {
        seed_id: seed.id.clone(),
        seed: Some(seed.clone()),
        tests: Vec::new(),
        oracle_calls: 1,
        error: None,
    };
    let mut current = seed.unit.clone();
    let mut nc_p = seed.baseline_nc.clone();
    let mut trace = Vec::new();
    for iteration in 1..=cfg.max_mutations {
        let step = rng.fork(iteration as u64);
        let mut best: Option<(Mutation, NeuronSet)> = None;
        let mut best_count = 0;
        for &op in &cfg.operator_set {
            if !applicable(&current, op) {
                continue;
            }
            let mut trial = step.fork(op.number() as u64);
            let mutation = match apply(&current, op, &mut trial) {
                Ok(m) => m,
                Err(e) => {
                    log::warn!("seed {}: {e}", seed.id);
                    continue;
                }
            };
            run.oracle_calls += 1;
            let activated = match cache.activated(mutation.mutant.text()) {
                Ok(a) => a,
                Err(e) if !e.is_fatal() => {
                    log::warn!("seed {}: {e}", seed.id);
                    run.error = Some(e.to_string());
                    return Ok(run);
                }
                Err(e) => return Err(e),
            };
            let gain = new_neurons(&activated, &nc_p).len();
            if gain > best_count {
                best_count = gain;
                best = Some((mutation, activated));
            }
        }
        let Some((mutation, activated)) = best else {
            log::debug!("seed {}: no new neurons at iteration {iteration}", seed.id);
            break;
        };
        nc_p = activated.union(&nc_p);
        trace.push(mutation.operator);
        current = mutation.mutant.clone();
        run.tests.push(GeneratedTest {
            outcome: mutation.into_outcome(seed.id.clone(), iteration),
            new_neuron_count: best_count,
            nc_after: nc_p.clone(),
            activated,
            operator_trace: trace.clone(),
        });
    }
    Ok(run)
}

fn pool(jobs: usize) -> Result<rayon::ThreadPool, EngineError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| EngineError::Pool(e.to_string()))
}

fn for_each_seed<F>(seeds: &[Seed], jobs: usize, f: F) -> Result<Vec<SeedRun>, EngineError>
where
    F: Fn(usize, &Seed) -> Result<SeedRun, EngineError> + Sync,
{
    if seeds.is_empty() {
        return Err(EngineError::EmptyCorpus);
    }
    let results: Vec<Result<SeedRun, EngineError>> = pool(jobs)?
        .install(|| seeds.par_iter().enumerate().map(|(i, s)| f(i, s)).collect());
    results.into_iter().collect()
}

fn seed_entry(seed: &Seed, cache: &OracleCache<'_>) -> Result<Result<SeedEntry, SeedRun>, OracleError> {
    match SeedEntry::new(seed.id.clone(), seed.unit.clone(), cache) {
        Ok(entry) => Ok(Ok(entry)),
        Err(e) if !e.is_fatal() => {
            log::warn!("seed {}: {e}", seed.id);
            Ok(Err(SeedRun {
                seed_id: seed.id.clone(),
                seed: None,
                tests: Vec::new(),
                oracle_calls: 1,
                error: Some(e.to_string()),
            }))
        }
        Err(e) => Err(e),
    }
}

/// Runs [`fuzz_seed`] over every seed; results come back in seed order.
pub fn fuzz_corpus(
    seeds: &[Seed],
    oracle: &dyn CoverageOracle,
    cfg: &FuzzConfig,
    jobs: usize,
) -> Result<Vec<SeedRun>, EngineError> {
    cfg.validate()?;
    let cache = OracleCache::new(oracle, cfg.activation_threshold);
    let master = Rng::new(cfg.master_seed);
    let runs = for_each_seed(seeds, jobs, |i, seed| {
        let entry = match seed_entry(seed, &cache)? {
            Ok(entry) => entry,
            Err(run) => return Ok(run),
        };
        Ok(fuzz_seed(&entry, &cache, cfg, &master.fork(i as u64))?)
    })?;
    let (hits, misses) = cache.stats();
    log::info!("oracle cache: {hits} hits, {misses} misses");
    Ok(runs)
}

/// A chain of `k` mutations, each drawn uniformly among the operators of
/// `operators` that apply to the previous mutant.
pub fn random_at_k(
    seed_id: &str,
    unit: &SourceUnit,
    k: usize,
    operators: &[OperatorId],
    rng: &Rng,
) -> Result<Vec<MutationOutcome>, EngineError> {
    let mut out: Vec<MutationOutcome> = Vec::with_capacity(k);
    let mut current = unit.clone();
    for step in 1..=k {
        let candidates: Vec<OperatorId> =
            operators.iter().copied().filter(|&op| applicable(&current, op)).collect();
        if candidates.is_empty() {
            return Err(EngineError::NoApplicableOperator(seed_id.to_string()));
        }
        let mut r = rng.fork(step as u64);
        let op = *r.pick(&candidates);
        let mutation = apply(&current, op, &mut r)?;
        current = mutation.mutant.clone();
        out.push(mutation.into_outcome(seed_id, step));
    }
    Ok(out)
}

/// Random@K over a corpus, with every mutant scored by the oracle so the
/// result can be compared against a guided campaign.
pub fn baseline_corpus(
    seeds: &[Seed],
    oracle: &dyn CoverageOracle,
    cfg: &FuzzConfig,
    k: usize,
    jobs: usize,
) -> Result<Vec<SeedRun>, EngineError> {
    cfg.validate()?;
    if k == 0 {
        return Err(ConfigError::MaxMutations.into());
    }
    let cache = OracleCache::new(oracle, cfg.activation_threshold);
    let master = Rng::new(cfg.master_seed);
    for_each_seed(seeds, jobs, |i, seed| {
        let entry = match seed_entry(seed, &cache)? {
            Ok(entry) => entry,
            Err(run) => return Ok(run),
        };
        let mut run = SeedRun {
            seed_id: seed.id.clone(),
            seed: Some(entry.clone()),
            tests: Vec::new(),
            oracle_calls: 1,
            error: None,
        };
        let chain = match random_at_k(&seed.id, &seed.unit, k, &cfg.operator_set, &master.fork(i as u64)) {
            Ok(chain) => chain,
            Err(e) => {
                run.error = Some(e.to_string());
                return Ok(run);
            }
        };
        let mut nc = entry.baseline_nc.clone();
        let mut trace = Vec::new();
        for outcome in chain {
            run.oracle_calls += 1;
            let activated = match cache.activated(outcome.mutant.text()) {
                Ok(a) => a,
                Err(e) if !e.is_fatal() => {
                    run.error = Some(e.to_string());
                    break;
                }
                Err(e) => return Err(e.into()),
            };
            let gain = new_neurons(&activated, &nc).len();
            nc = activated.union(&nc);
            trace.push(outcome.operator);
            run.tests.push(GeneratedTest {
                outcome,
                new_neuron_count: gain,
                nc_after: nc.clone(),
                activated,
                operator_trace: trace.clone(),
            });
        }
        Ok(run)
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub max: usize,
    pub mean_noise_fraction: f64,
    pub seeds: usize,
}

/// Mean noise fraction after `MAX` random mutations, for each requested MAX.
///
/// Each seed draws one chain as long as the largest MAX and every row reads
/// a prefix of it, so rows differ only in chain length.
pub fn sweep_max(
    seeds: &[Seed],
    max_values: &[usize],
    operators: &[OperatorId],
    master_seed: u64,
    jobs: usize,
) -> Result<Vec<SweepRow>, EngineError> {
    if max_values.is_empty() || max_values.contains(&0) {
        return Err(ConfigError::MaxMutations.into());
    }
    if seeds.is_empty() {
        return Err(EngineError::EmptyCorpus);
    }
    let longest = *max_values.iter().max().expect("non-empty");
    let master = Rng::new(master_seed);
    let noise: Vec<Result<Vec<f64>, EngineError>> = pool(jobs)?.install(|| {
        seeds
            .par_iter()
            .enumerate()
            .map(|(i, seed)| {
                let chain = random_at_k(&seed.id, &seed.unit, longest, operators, &master.fork(i as u64))?;
                Ok(chain.iter().map(|o| noise_fraction(&seed.unit, &o.mutant)).collect())
            })
            .collect()
    });
    let noise: Vec<Vec<f64>> = noise.into_iter().collect::<Result<_, _>>()?;
    Ok(max_values
        .iter()
        .map(|&max| {
            let sum: f64 = noise.iter().map(|n| n[max - 1]).sum();
            SweepRow { max, mean_noise_fraction: sum / noise.len() as f64, seeds: noise.len() }
        })
        .collect())
}
