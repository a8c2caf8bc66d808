//! Domain types and the two within-generation stages: the grooming stage
//! (relationship construction) and the cooperation stage (fitness
//! assignment).
//!
//! Groomers hold a heritable strategy `(s, q)`. During a generation each
//! groomer spends `r_g` grooming actions; each action either targets a
//! stranger (a groomee with zero relationship count) with probability `q`
//! or an existing partner drawn via the selection kernel with probability
//! `1 - q`. Groomees then each cooperate with their top `r_c` groomers by
//! relationship count, and those cooperation counts are the groomers'
//! fitness.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kernel::KernelTable;

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("strategy parameter s must be finite (got {0})")]
    NonFiniteShape(f64),
    #[error("strategy parameter q must lie in [0, 1] (got {0})")]
    StrangerRateOutOfRange(f64),
    #[error("{name} must be at least 1 (got {value})")]
    ParameterBound { name: &'static str, value: u32 },
    #[error("relationship row has no positive entries")]
    AllZeroRow,
    #[error("matrix rows must be non-empty and of equal length")]
    RaggedMatrix,
}

/// A groomer's heritable strategy: kernel shape `s` (unbounded, finite) and
/// stranger-grooming probability `q` in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StrategyRaw")]
pub struct Strategy {
    s: f64,
    q: f64,
}

#[derive(Deserialize)]
struct StrategyRaw {
    s: f64,
    q: f64,
}

impl TryFrom<StrategyRaw> for Strategy {
    type Error = ModelError;

    fn try_from(raw: StrategyRaw) -> Result<Self, ModelError> {
        Strategy::new(raw.s, raw.q)
    }
}

impl Strategy {
    pub fn new(s: f64, q: f64) -> Result<Self, ModelError> {
        if !s.is_finite() {
            return Err(ModelError::NonFiniteShape(s));
        }
        if !(0.0..=1.0).contains(&q) {
            return Err(ModelError::StrangerRateOutOfRange(q));
        }
        Ok(Self { s, q })
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn q(&self) -> f64 {
        self.q
    }
}

/// The parameter bundle defining one simulation: `n_groomers` (N),
/// `n_groomees` (M), cooperation capacity `r_c` per groomee, grooming
/// actions `r_g` per groomer per generation, and generation count
/// `t_generations` (T). All must be at least 1.
///
/// `r_c` may exceed `n_groomers`; it is clamped at use (a groomee
/// cooperates with at most `min(r_c, eligible)` groomers).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "EnvironmentRaw")]
pub struct Environment {
    n_groomers: u32,
    n_groomees: u32,
    r_c: u32,
    r_g: u32,
    t_generations: u32,
}

#[derive(Deserialize)]
struct EnvironmentRaw {
    n_groomers: u32,
    n_groomees: u32,
    r_c: u32,
    r_g: u32,
    t_generations: u32,
}

impl TryFrom<EnvironmentRaw> for Environment {
    type Error = ModelError;

    fn try_from(raw: EnvironmentRaw) -> Result<Self, ModelError> {
        Environment::new(raw.n_groomers, raw.n_groomees, raw.r_c, raw.r_g, raw.t_generations)
    }
}

impl Environment {
    pub fn new(
        n_groomers: u32,
        n_groomees: u32,
        r_c: u32,
        r_g: u32,
        t_generations: u32,
    ) -> Result<Self, ModelError> {
        for (name, value) in [
            ("n_groomers", n_groomers),
            ("n_groomees", n_groomees),
            ("r_c", r_c),
            ("r_g", r_g),
            ("t_generations", t_generations),
        ] {
            if value < 1 {
                return Err(ModelError::ParameterBound { name, value });
            }
        }
        Ok(Self { n_groomers, n_groomees, r_c, r_g, t_generations })
    }

    pub fn n_groomers(&self) -> u32 {
        self.n_groomers
    }

    pub fn n_groomees(&self) -> u32 {
        self.n_groomees
    }

    pub fn r_c(&self) -> u32 {
        self.r_c
    }

    pub fn r_g(&self) -> u32 {
        self.r_g
    }

    pub fn t_generations(&self) -> u32 {
        self.t_generations
    }

    pub fn groomer_count(&self) -> usize {
        self.n_groomers as usize
    }

    pub fn groomee_count(&self) -> usize {
        self.n_groomees as usize
    }
}

/// N x M grid of non-negative grooming counts for one generation;
/// `get(i, j)` is the number of grooming events from groomer `i` to
/// groomee `j`. After a completed grooming stage every row sums to `r_g`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "Vec<Vec<u32>>", try_from = "Vec<Vec<u32>>")]
pub struct RelationshipMatrix {
    n_groomers: usize,
    n_groomees: usize,
    w: Vec<u32>,
}

impl RelationshipMatrix {
    pub fn zeros(n_groomers: usize, n_groomees: usize) -> Self {
        Self { n_groomers, n_groomees, w: vec![0; n_groomers * n_groomees] }
    }

    pub fn for_env(env: &Environment) -> Self {
        Self::zeros(env.groomer_count(), env.groomee_count())
    }

    pub fn from_rows(rows: Vec<Vec<u32>>) -> Result<Self, ModelError> {
        let n_groomers = rows.len();
        let n_groomees = rows.first().map_or(0, Vec::len);
        if n_groomers == 0 || n_groomees == 0 || rows.iter().any(|r| r.len() != n_groomees) {
            return Err(ModelError::RaggedMatrix);
        }
        Ok(Self { n_groomers, n_groomees, w: rows.into_iter().flatten().collect() })
    }

    pub fn n_groomers(&self) -> usize {
        self.n_groomers
    }

    pub fn n_groomees(&self) -> usize {
        self.n_groomees
    }

    #[inline]
    pub fn get(&self, groomer: usize, groomee: usize) -> u32 {
        self.w[groomer * self.n_groomees + groomee]
    }

    pub fn row(&self, groomer: usize) -> &[u32] {
        &self.w[groomer * self.n_groomees..(groomer + 1) * self.n_groomees]
    }

    pub fn row_mut(&mut self, groomer: usize) -> &mut [u32] {
        &mut self.w[groomer * self.n_groomees..(groomer + 1) * self.n_groomees]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[u32]> {
        self.w.chunks_exact(self.n_groomees)
    }

    /// All strictly positive entries, pooled over the whole matrix.
    pub fn positive_entries(&self) -> impl Iterator<Item = u32> + '_ {
        self.w.iter().copied().filter(|&v| v > 0)
    }
}

impl From<RelationshipMatrix> for Vec<Vec<u32>> {
    fn from(m: RelationshipMatrix) -> Self {
        m.rows().map(<[u32]>::to_vec).collect()
    }
}

impl TryFrom<Vec<Vec<u32>>> for RelationshipMatrix {
    type Error = ModelError;

    fn try_from(rows: Vec<Vec<u32>>) -> Result<Self, ModelError> {
        Self::from_rows(rows)
    }
}

/// Per-groomer cooperation counts received in one generation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FitnessVector(Vec<u32>);

impl FitnessVector {
    pub fn new(counts: Vec<u32>) -> Self {
        Self(counts)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, groomer: usize) -> u32 {
        self.0[groomer]
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    pub fn total(&self) -> u64 {
        self.0.iter().map(|&f| u64::from(f)).sum()
    }

    pub fn max(&self) -> u32 {
        self.0.iter().copied().max().unwrap_or(0)
    }
}

/// Relationship strengths normalized by the row maximum:
/// `d_j = w_j / max(w_row)`. The maximal entry maps to exactly 1 and zero
/// entries map to 0. An all-zero (or empty) row is an error; the caller
/// must route such rows to stranger selection instead.
pub fn normalized_strengths(w_row: &[u32]) -> Result<Vec<f64>, ModelError> {
    let max = w_row.iter().copied().max().unwrap_or(0);
    if max == 0 {
        return Err(ModelError::AllZeroRow);
    }
    Ok(w_row.iter().map(|&w| f64::from(w) / f64::from(max)).collect())
}

/// One candidate exposure recorded during a partner-selection event:
/// the groomer acting, the candidate's pre-event relationship count, and
/// whether that candidate was the one chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroomingEventSample {
    pub groomer: u32,
    pub w: u32,
    pub chosen: bool,
}

/// Runs one groomer's grooming stage: exactly `r_g` events are added to
/// `w_row`, so its sum increases by exactly `r_g`.
///
/// Each event first draws the stranger coin. With probability `q` it
/// grooms a uniformly random stranger (an entry with `w = 0`); otherwise
/// the target is drawn from the kernel law normalized over all groomees,
/// where a column with count `w` weighs `(w / max)^s` for `s >= 0` and
/// `(1 - w / max)^(-s)` for `s < 0`. Zero-strength columns therefore carry
/// no weight under `s > 0` but share the maximal weight under `s < 0`, so
/// weak-tie strategies keep founding new relationships even at `q = 0`.
/// If one of the two pools is empty the other is used regardless of the
/// coin; both cannot be empty since the row is non-empty.
pub fn grooming_stage<R: Rng + ?Sized>(
    strategy: &Strategy,
    w_row: &mut [u32],
    env: &Environment,
    rng: &mut R,
) {
    groom_row(strategy, w_row, env, rng, None);
}

/// [`grooming_stage`] variant that appends one [`GroomingEventSample`] per
/// partner exposure of every kernel-selection event. Coin-branch stranger
/// events are not kernel selections and are not logged; a kernel event won
/// by a stranger still logs its partner exposures as unchosen.
pub fn grooming_stage_logged<R: Rng + ?Sized>(
    strategy: &Strategy,
    w_row: &mut [u32],
    env: &Environment,
    rng: &mut R,
    groomer: u32,
    log: &mut Vec<GroomingEventSample>,
) {
    groom_row(strategy, w_row, env, rng, Some((groomer, log)));
}

fn groom_row<R: Rng + ?Sized>(
    strategy: &Strategy,
    w_row: &mut [u32],
    env: &Environment,
    rng: &mut R,
    mut log: Option<(u32, &mut Vec<GroomingEventSample>)>,
) {
    debug_assert_eq!(w_row.len(), env.groomee_count());
    // Partners kept in ascending index order; strangers in swap-removal order.
    let mut partners: Vec<usize> = (0..w_row.len()).filter(|&j| w_row[j] > 0).collect();
    let mut strangers: Vec<usize> = (0..w_row.len()).filter(|&j| w_row[j] == 0).collect();
    let mut max_w = partners.iter().map(|&j| w_row[j]).max().unwrap_or(0);
    let mut table = KernelTable::new(strategy.s());
    let mut weights: Vec<f64> = Vec::with_capacity(w_row.len());

    enum Target {
        StrangerAt(usize),
        PartnerAt(usize),
    }

    for _ in 0..env.r_g() {
        let coin: f64 = rng.random();
        let target = if !strangers.is_empty() && (partners.is_empty() || coin < strategy.q()) {
            // The deliberate stranger branch, and the fallback when no
            // partner exists yet (a fresh row has uniform kernel weights
            // anyway, all of them on strangers).
            Target::StrangerAt(rng.random_range(0..strangers.len()))
        } else {
            // Kernel selection over the whole row: partners individually,
            // strangers sharing the zero-strength weight.
            let block = table.block_weights(w_row, &partners, strangers.len(), max_w, &mut weights);
            let stranger_total = block.stranger_unit * strangers.len() as f64;
            let total = block.total_partner + stranger_total;
            let target = if total <= 0.0 {
                // Only reachable with s < 0, no strangers, and every
                // partner at the maximum: uniform among partners.
                Target::PartnerAt(rng.random_range(0..partners.len()))
            } else {
                let u = rng.random::<f64>() * total;
                let mut acc = 0.0;
                let mut picked = None;
                let mut last_positive = None;
                for (pos, &weight) in weights.iter().enumerate() {
                    if weight > 0.0 {
                        acc += weight;
                        last_positive = Some(pos);
                        if u < acc {
                            picked = Some(pos);
                            break;
                        }
                    }
                }
                match picked {
                    Some(pos) => Target::PartnerAt(pos),
                    None if !strangers.is_empty() && stranger_total > 0.0 => {
                        Target::StrangerAt(rng.random_range(0..strangers.len()))
                    }
                    // Round-off pushed `u` past the final accumulation.
                    None => Target::PartnerAt(last_positive.expect("positive total")),
                }
            };
            // Every kernel event exposes each partner once, whether or not
            // a stranger ends up winning the draw.
            if let Some((groomer, log)) = log.as_mut() {
                let chosen_pos = match target {
                    Target::PartnerAt(pos) => Some(pos),
                    Target::StrangerAt(_) => None,
                };
                for (p, &cand) in partners.iter().enumerate() {
                    log.push(GroomingEventSample {
                        groomer: *groomer,
                        w: w_row[cand],
                        chosen: Some(p) == chosen_pos,
                    });
                }
            }
            target
        };

        match target {
            Target::StrangerAt(k) => {
                let j = strangers.swap_remove(k);
                w_row[j] = 1;
                let pos = partners.partition_point(|&p| p < j);
                partners.insert(pos, j);
                max_w = max_w.max(1);
            }
            Target::PartnerAt(pos) => {
                let j = partners[pos];
                w_row[j] += 1;
                max_w = max_w.max(w_row[j]);
            }
        }
    }
}

/// Runs the cooperation stage over a completed relationship matrix.
///
/// For each groomee independently: groomers with a positive relationship
/// count are ranked by that count descending and the top
/// `min(r_c, eligible)` each receive one unit of fitness. Ties are broken
/// by a uniform random permutation among equal counts (the eligible list is
/// shuffled, then stably sorted), so columns with all-distinct counts are
/// unaffected by the random draws.
pub fn cooperation_stage<R: Rng + ?Sized>(
    w: &RelationshipMatrix,
    env: &Environment,
    rng: &mut R,
) -> FitnessVector {
    rank_columns(w, env, rng, true)
}

fn rank_columns<R: Rng + ?Sized>(
    w: &RelationshipMatrix,
    env: &Environment,
    rng: &mut R,
    require_positive: bool,
) -> FitnessVector {
    let n = w.n_groomers();
    let mut fitness = vec![0u32; n];
    let mut eligible: Vec<usize> = Vec::with_capacity(n);
    for j in 0..w.n_groomees() {
        eligible.clear();
        eligible.extend((0..n).filter(|&i| !require_positive || w.get(i, j) > 0));
        if eligible.is_empty() {
            continue;
        }
        eligible.shuffle(rng);
        eligible.sort_by_key(|&i| std::cmp::Reverse(w.get(i, j)));
        let winners = eligible.len().min(env.r_c() as usize);
        for &i in &eligible[..winners] {
            fitness[i] += 1;
        }
    }
    FitnessVector(fitness)
}

/// Test-only cooperation variant without the positive-relationship
/// eligibility rule: every groomer is ranked in every column, including
/// zero counts. Used to check selection neutrality when `r_c >= n`.
#[cfg(test)]
pub(crate) fn cooperation_stage_ignoring_eligibility<R: Rng + ?Sized>(
    w: &RelationshipMatrix,
    env: &Environment,
    rng: &mut R,
) -> FitnessVector {
    rank_columns(w, env, rng, false)
}
