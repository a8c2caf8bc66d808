//! The generational loop: population initialization, one-generation
//! execution (grooming, cooperation, reproduction, mutation), and full
//! simulation runs with per-generation records.
//!
//! # Reproducibility
//!
//! Every simulation consumes a single [`SimRng`] (ChaCha8, seeded via
//! `seed_from_u64`) in a fixed order:
//!
//! 1. initialization: per member, the `s` draw then the `q` draw;
//! 2. each generation: grooming rows in groomer index order (per action:
//!    the stranger coin, then one target draw), then the cooperation stage
//!    in groomee index order (one shuffle of each non-empty eligible list),
//!    then one roulette draw per offspring in offspring order, then — when
//!    mutating — per offspring the `s` noise draw followed by the `q`
//!    noise draw.
//!
//! Given the same `(env, seed)` the result is bit-identical.

use rand::{Rng, SeedableRng};
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::model::{
    cooperation_stage, grooming_stage, grooming_stage_logged, Environment, FitnessVector,
    GroomingEventSample, RelationshipMatrix, Strategy,
};

/// The random generator backing all simulations.
pub type SimRng = rand_chacha::ChaCha8Rng;

/// One simulation stream for the given seed.
pub fn seeded_rng(seed: u64) -> SimRng {
    SimRng::seed_from_u64(seed)
}

/// Standard deviation of the initial `s` distribution (mean 0).
pub const INIT_S_SIGMA: f64 = 5.0;
/// Standard deviation of the per-generation `s` mutation noise.
pub const MUTATE_S_SIGMA: f64 = 0.2;
/// Standard deviation of the per-generation `q` mutation noise.
pub const MUTATE_Q_SIGMA: f64 = 0.05;

/// The groomer population of one generation; length stays `n_groomers`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Population(Vec<Strategy>);

impl Population {
    pub fn new(members: Vec<Strategy>) -> Self {
        Self(members)
    }

    pub fn members(&self) -> &[Strategy] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn mean_s(&self) -> f64 {
        mean(self.0.iter().map(Strategy::s))
    }

    pub fn mean_q(&self) -> f64 {
        mean(self.0.iter().map(Strategy::q))
    }

    pub fn median_s(&self) -> f64 {
        median(self.0.iter().map(Strategy::s).collect())
    }

    pub fn median_q(&self) -> f64 {
        median(self.0.iter().map(Strategy::q).collect())
    }
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut n = 0u32;
    for v in values {
        sum += v;
        n += 1;
    }
    sum / f64::from(n)
}

/// Median with the even-length convention of averaging the two central
/// values.
fn median(mut values: Vec<f64>) -> f64 {
    values.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite values"));
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    }
}

/// Population variance (divide by n).
fn variance(values: &[f64]) -> f64 {
    let m = mean(values.iter().copied());
    values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / values.len() as f64
}

/// Per-generation population summary, serialized as one JSON-Lines record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationRecord {
    pub generation: u32,
    pub mean_s: f64,
    pub median_s: f64,
    pub var_s: f64,
    pub mean_q: f64,
    pub median_q: f64,
    pub var_q: f64,
    pub total_fitness: u64,
    pub max_fitness: u32,
}

impl GenerationRecord {
    pub fn measure(generation: u32, pop: &Population, fitness: &FitnessVector) -> Self {
        let s_values: Vec<f64> = pop.members().iter().map(Strategy::s).collect();
        let q_values: Vec<f64> = pop.members().iter().map(Strategy::q).collect();
        Self {
            generation,
            mean_s: mean(s_values.iter().copied()),
            median_s: median(s_values.clone()),
            var_s: variance(&s_values),
            mean_q: mean(q_values.iter().copied()),
            median_q: median(q_values.clone()),
            var_q: variance(&q_values),
            total_fitness: fitness.total(),
            max_fitness: fitness.max(),
        }
    }
}

/// Everything a finished simulation produces. A deterministic function of
/// `(env, seed)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationResult {
    pub env: Environment,
    pub seed: u64,
    pub records: Vec<GenerationRecord>,
    pub final_population: Population,
    pub final_w: RelationshipMatrix,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grooming_event_log: Option<Vec<GroomingEventSample>>,
}

/// Draws the initial population: `s ~ Normal(0, 5.0)` and `q` uniform on
/// the unit interval, one member at a time (`s` draw then `q` draw).
pub fn init_population<R: Rng + ?Sized>(env: &Environment, rng: &mut R) -> Population {
    let s_dist = Normal::new(0.0, INIT_S_SIGMA).expect("valid sigma");
    let members = (0..env.n_groomers())
        .map(|_| {
            let s = s_dist.sample(rng);
            let q = rng.random::<f64>();
            Strategy::new(s, q).expect("draws satisfy strategy invariants")
        })
        .collect();
    Population(members)
}

/// Fitness-proportional sampling with replacement: each offspring's parent
/// is drawn independently with probability `f_i / sum(f)`. A zero fitness
/// total falls back to a uniform choice over all parents.
pub fn roulette_select<R: Rng + ?Sized>(
    fitness: &FitnessVector,
    n_offspring: usize,
    rng: &mut R,
) -> Vec<usize> {
    let total = fitness.total();
    if total == 0 {
        return (0..n_offspring).map(|_| rng.random_range(0..fitness.len())).collect();
    }
    let mut cumulative = Vec::with_capacity(fitness.len());
    let mut acc = 0u64;
    for &f in fitness.as_slice() {
        acc += u64::from(f);
        cumulative.push(acc);
    }
    (0..n_offspring)
        .map(|_| {
            let x = rng.random_range(0..total);
            cumulative.partition_point(|&c| c <= x)
        })
        .collect()
}

/// Gaussian mutation: `s' = s + Normal(0, 0.2)` unclamped,
/// `q' = q + Normal(0, 0.05)` clamped to `[0, 1]`. Consumes the `s` noise
/// draw first.
pub fn mutate<R: Rng + ?Sized>(parent: &Strategy, rng: &mut R) -> Strategy {
    let s_noise = Normal::new(0.0, MUTATE_S_SIGMA).expect("valid sigma").sample(rng);
    let q_noise = Normal::new(0.0, MUTATE_Q_SIGMA).expect("valid sigma").sample(rng);
    let s = parent.s() + s_noise;
    let q = (parent.q() + q_noise).clamp(0.0, 1.0);
    Strategy::new(s, q).expect("mutation preserves strategy invariants")
}

/// Runs one full generation: fresh zero matrix, grooming per groomer in
/// index order, cooperation, roulette selection of `n_groomers` offspring,
/// and (when `mutate_offspring`) mutation of every offspring. The record
/// summarizes the pre-selection population together with its fitness.
pub fn run_generation<R: Rng + ?Sized>(
    pop: &Population,
    env: &Environment,
    generation: u32,
    rng: &mut R,
    mutate_offspring: bool,
) -> (Population, GenerationRecord, RelationshipMatrix, FitnessVector) {
    run_generation_logged(pop, env, generation, rng, mutate_offspring, None)
}

/// [`run_generation`] with an optional sink receiving every grooming
/// partner-selection exposure of the generation.
pub fn run_generation_logged<R: Rng + ?Sized>(
    pop: &Population,
    env: &Environment,
    generation: u32,
    rng: &mut R,
    mutate_offspring: bool,
    mut event_log: Option<&mut Vec<GroomingEventSample>>,
) -> (Population, GenerationRecord, RelationshipMatrix, FitnessVector) {
    debug_assert_eq!(pop.len(), env.groomer_count());
    let mut w = RelationshipMatrix::for_env(env);
    for (i, strategy) in pop.members().iter().enumerate() {
        match event_log.as_mut() {
            Some(log) => {
                grooming_stage_logged(strategy, w.row_mut(i), env, rng, i as u32, log);
            }
            None => grooming_stage(strategy, w.row_mut(i), env, rng),
        }
    }
    let fitness = cooperation_stage(&w, env, rng);
    debug_assert!(fitness.total() <= u64::from(env.r_c()) * u64::from(env.n_groomees()));
    let record = GenerationRecord::measure(generation, pop, &fitness);
    let parents = roulette_select(&fitness, pop.len(), rng);
    let members = parents
        .into_iter()
        .map(|p| {
            let parent = &pop.members()[p];
            if mutate_offspring {
                mutate(parent, rng)
            } else {
                *parent
            }
        })
        .collect();
    (Population(members), record, w, fitness)
}

/// Runs `t_generations` generations from a fresh seeded stream and collects
/// per-generation records, the final population, and the final generation's
/// relationship matrix.
pub fn run_simulation(env: &Environment, seed: u64) -> SimulationResult {
    run_simulation_logged(env, seed, false)
}

/// [`run_simulation`] variant that can capture the grooming event log of
/// the final generation (every partner-selection candidate exposure).
pub fn run_simulation_logged(
    env: &Environment,
    seed: u64,
    capture_event_log: bool,
) -> SimulationResult {
    let mut rng = SimRng::seed_from_u64(seed);
    let mut pop = init_population(env, &mut rng);
    let t = env.t_generations();
    let mut records = Vec::with_capacity(t as usize);
    let mut final_w = RelationshipMatrix::for_env(env);
    let mut event_log: Option<Vec<GroomingEventSample>> = None;
    for generation in 0..t {
        let last = generation + 1 == t;
        let mut log_buffer = if capture_event_log && last { Some(Vec::new()) } else { None };
        let (next, record, w, _fitness) = run_generation_logged(
            &pop,
            env,
            generation,
            &mut rng,
            true,
            log_buffer.as_mut(),
        );
        records.push(record);
        if last {
            final_w = w;
            event_log = log_buffer;
        }
        pop = next;
    }
    SimulationResult {
        env: *env,
        seed,
        records,
        final_population: pop,
        final_w,
        grooming_event_log: event_log,
    }
}
