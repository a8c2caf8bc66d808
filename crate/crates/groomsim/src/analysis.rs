//! Post-hoc analytics over finished runs: four-trend classification,
//! average-gradient-of-selection (AGoS) fields and orbits, relationship-
//! strength distributions with log-log power-law fits, per-strength
//! grooming-probability profiles, and the q-transition curve.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::evolution::{run_generation, Population, SimRng};
use crate::model::{Environment, GroomingEventSample, RelationshipMatrix, Strategy};
use crate::seedmix::absorb;
use crate::sweep::SweepCellResult;

/// Default standard deviation when sampling a population around a grid
/// point for AGoS estimation.
pub const AGOS_SAMPLE_SIGMA: f64 = 0.2;
/// Default replicate count for AGoS cells.
pub const AGOS_DEFAULT_REPLICATES: u32 = 30;
/// Default per-component noise when integrating orbits.
pub const ORBIT_NOISE_SIGMA: f64 = 0.01;
/// Profile points are dropped unless their strength value has strictly
/// more than this many candidate exposures.
pub const PROFILE_MIN_EXPOSURES: u64 = 20;

#[derive(Debug, Error, PartialEq)]
pub enum AnalysisError {
    #[error("classification inputs must be finite (median_s={median_s}, median_q={median_q})")]
    NonFiniteInput { median_s: f64, median_q: f64 },
    #[error("axis range is malformed: low={low}, high={high}, step={step}")]
    BadAxisRange { low: f64, high: f64, step: f64 },
    #[error("relationship matrix has no positive entries")]
    NoPositiveEntries,
    #[error("grooming event log is empty")]
    EmptyEventLog,
}

/// The four evolutionary outcomes, assigned from the final population's
/// median `(s, q)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TrendLabel {
    /// Concentrated investment: large `s`, typically small `q`.
    Trend1,
    /// Proportional investment with broad partnering: `0 <= s < 2`, large `q`.
    Trend2,
    /// Proportional investment with restricted partnering: `0 <= s < 2`, small `q`.
    Trend3,
    /// Diffuse weak-tie investment: `s < 0`.
    Trend4,
}

impl fmt::Display for TrendLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            TrendLabel::Trend1 => "Trend1",
            TrendLabel::Trend2 => "Trend2",
            TrendLabel::Trend3 => "Trend3",
            TrendLabel::Trend4 => "Trend4",
        };
        f.write_str(name)
    }
}

impl FromStr for TrendLabel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "Trend1" => Ok(TrendLabel::Trend1),
            "Trend2" => Ok(TrendLabel::Trend2),
            "Trend3" => Ok(TrendLabel::Trend3),
            "Trend4" => Ok(TrendLabel::Trend4),
            other => Err(format!("unknown trend label: {other}")),
        }
    }
}

/// Classification thresholds. The defaults split at `s >= 2` (Trend1),
/// `s < 0` (Trend4), and `q >= 0.5` (Trend2 vs Trend3).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrendThresholds {
    pub s_high: f64,
    pub s_low: f64,
    pub q_split: f64,
}

impl Default for TrendThresholds {
    fn default() -> Self {
        Self { s_high: 2.0, s_low: 0.0, q_split: 0.5 }
    }
}

/// Assigns one of the four trend labels with the default thresholds.
pub fn classify_trend(median_s: f64, median_q: f64) -> Result<TrendLabel, AnalysisError> {
    classify_trend_with(&TrendThresholds::default(), median_s, median_q)
}

/// Assigns a trend label: `Trend4` below `s_low`, `Trend1` at or above
/// `s_high`, otherwise `Trend2`/`Trend3` split at `q_split`. Total over all
/// finite inputs.
pub fn classify_trend_with(
    thresholds: &TrendThresholds,
    median_s: f64,
    median_q: f64,
) -> Result<TrendLabel, AnalysisError> {
    if !median_s.is_finite() || !median_q.is_finite() {
        return Err(AnalysisError::NonFiniteInput { median_s, median_q });
    }
    Ok(if median_s < thresholds.s_low {
        TrendLabel::Trend4
    } else if median_s >= thresholds.s_high {
        TrendLabel::Trend1
    } else if median_q >= thresholds.q_split {
        TrendLabel::Trend2
    } else {
        TrendLabel::Trend3
    })
}

/// AGoS estimate at one `(s, q)` grid point: the mean one-generation
/// displacement of the population means.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GradientCell {
    pub s_center: f64,
    pub q_center: f64,
    pub ds: f64,
    pub dq: f64,
    pub replicates: u32,
}

/// One AGoS replicate: sample a population of `n_groomers` strategies with
/// `s_i ~ Normal(s, sigma)` and `q_i ~ Normal(q, sigma)` clamped to
/// `[0, 1]`, run one generation without mutation, and return the change in
/// the population means. With `sample_sigma = 0` the population is clonal
/// and the result is exactly `(0, 0)`.
pub fn agos_replicate<R: Rng + ?Sized>(
    s: f64,
    q: f64,
    env: &Environment,
    sample_sigma: f64,
    rng: &mut R,
) -> (f64, f64) {
    let s_dist = Normal::new(s, sample_sigma).expect("valid sigma");
    let q_dist = Normal::new(q, sample_sigma).expect("valid sigma");
    let members: Vec<Strategy> = (0..env.n_groomers())
        .map(|_| {
            let si = s_dist.sample(rng);
            let qi = q_dist.sample(rng).clamp(0.0, 1.0);
            Strategy::new(si, qi).expect("sampled strategy is valid")
        })
        .collect();
    let pop = Population::new(members);
    let (next, _record, _w, _fitness) = run_generation(&pop, env, 0, rng, false);
    (next.mean_s() - pop.mean_s(), next.mean_q() - pop.mean_q())
}

/// Averages [`agos_replicate`] over `replicates` runs drawn sequentially
/// from `rng`. Running with `replicates = n` consumes the same stream as
/// `n` single-replicate calls, so the n-replicate value equals the mean of
/// the n single-replicate values.
pub fn agos_cell<R: Rng + ?Sized>(
    s: f64,
    q: f64,
    env: &Environment,
    replicates: u32,
    sample_sigma: f64,
    rng: &mut R,
) -> GradientCell {
    assert!(replicates >= 1, "replicates must be at least 1");
    let mut sum_ds = 0.0;
    let mut sum_dq = 0.0;
    for _ in 0..replicates {
        let (ds, dq) = agos_replicate(s, q, env, sample_sigma, rng);
        sum_ds += ds;
        sum_dq += dq;
    }
    GradientCell {
        s_center: s,
        q_center: q,
        ds: sum_ds / f64::from(replicates),
        dq: sum_dq / f64::from(replicates),
        replicates,
    }
}

/// An inclusive lattice axis: points `low + i * step` up to `high`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisRange {
    pub low: f64,
    pub high: f64,
    pub step: f64,
}

impl AxisRange {
    pub fn new(low: f64, high: f64, step: f64) -> Result<Self, AnalysisError> {
        if !(low.is_finite() && high.is_finite() && step > 0.0 && high >= low) {
            return Err(AnalysisError::BadAxisRange { low, high, step });
        }
        Ok(Self { low, high, step })
    }

    /// Lattice points; counting tolerates the floating-point remainder of
    /// ranges like `[0, 1]` step `0.05`.
    pub fn points(&self) -> Vec<f64> {
        let count = ((self.high - self.low) / self.step + 1e-9).floor() as usize + 1;
        (0..count).map(|i| self.low + i as f64 * self.step).collect()
    }
}

/// Default AGoS lattice: `s` in `[-4, 4]` step `0.5`.
pub fn default_s_range() -> AxisRange {
    AxisRange { low: -4.0, high: 4.0, step: 0.5 }
}

/// Default AGoS lattice: `q` in `[0, 1]` step `0.05`.
pub fn default_q_range() -> AxisRange {
    AxisRange { low: 0.0, high: 1.0, step: 0.05 }
}

/// Evaluates [`agos_cell`] on every lattice point (s-major order), in
/// parallel. Each cell consumes its own stream seeded from
/// `(base_seed, s index, q index)`, so results do not depend on the degree
/// of parallelism.
pub fn agos_grid(
    s_range: &AxisRange,
    q_range: &AxisRange,
    env: &Environment,
    replicates: u32,
    sample_sigma: f64,
    base_seed: u64,
) -> Vec<GradientCell> {
    let s_points = s_range.points();
    let q_points = q_range.points();
    let cells: Vec<(usize, usize, f64, f64)> = s_points
        .iter()
        .enumerate()
        .flat_map(|(i, &s)| q_points.iter().enumerate().map(move |(j, &q)| (i, j, s, q)))
        .collect();
    cells
        .into_par_iter()
        .map(|(i, j, s, q)| {
            let seed = absorb(absorb(base_seed, i as u64), j as u64);
            let mut rng = SimRng::seed_from_u64(seed);
            agos_cell(s, q, env, replicates, sample_sigma, &mut rng)
        })
        .collect()
}

/// Integrates a typical orbit from `start`: each step adds the AGoS
/// gradient evaluated at the current point (no grid interpolation) plus
/// independent Gaussian noise per component, clamping `q` to `[0, 1]`.
/// Returns the full visited sequence including the start, so the
/// trajectory has `steps + 1` entries.
pub fn integrate_orbit<R: Rng + ?Sized>(
    start: (f64, f64),
    env: &Environment,
    steps: u32,
    noise_sigma: f64,
    replicates_per_step: u32,
    rng: &mut R,
) -> Vec<(f64, f64)> {
    integrate_orbit_with(start, steps, noise_sigma, rng, |s, q, rng| {
        let cell = agos_cell(s, q, env, replicates_per_step, AGOS_SAMPLE_SIGMA, rng);
        (cell.ds, cell.dq)
    })
}

/// Orbit integration over an arbitrary gradient evaluator; the public
/// entry point passes the AGoS estimator. Per step the gradient draws
/// first, then the `s` noise, then the `q` noise.
pub fn integrate_orbit_with<R, F>(
    start: (f64, f64),
    steps: u32,
    noise_sigma: f64,
    rng: &mut R,
    mut gradient: F,
) -> Vec<(f64, f64)>
where
    R: Rng + ?Sized,
    F: FnMut(f64, f64, &mut R) -> (f64, f64),
{
    let noise = Normal::new(0.0, noise_sigma).expect("valid sigma");
    let (mut s, mut q) = start;
    let mut trajectory = Vec::with_capacity(steps as usize + 1);
    trajectory.push((s, q));
    for _ in 0..steps {
        let (ds, dq) = gradient(s, q, rng);
        let ns = noise.sample(rng);
        let nq = noise.sample(rng);
        s += ds + ns;
        q = (q + dq + nq).clamp(0.0, 1.0);
        trajectory.push((s, q));
    }
    trajectory
}

/// Pooled distribution of positive relationship strengths from one
/// generation: histogram, complementary CDF over distinct values, and a
/// least-squares line fit to the log-log CCDF.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrengthDistribution {
    pub histogram: BTreeMap<u32, u64>,
    /// `(w, fraction of entries >= w)` over distinct observed `w`,
    /// ascending; the minimum observed `w` maps to exactly 1.
    pub ccdf: Vec<(u32, f64)>,
    pub powerlaw_slope: f64,
    pub powerlaw_r2: f64,
}

impl StrengthDistribution {
    pub fn total_entries(&self) -> u64 {
        self.histogram.values().sum()
    }

    pub fn max_strength(&self) -> u32 {
        self.histogram.keys().next_back().copied().unwrap_or(0)
    }

    /// Median of the pooled positive entries (averaging the two central
    /// values for even totals).
    pub fn median_strength(&self) -> f64 {
        let total = self.total_entries();
        let lower_rank = (total + 1) / 2;
        let upper_rank = total / 2 + 1;
        let mut seen = 0u64;
        let mut lower = None;
        for (&w, &count) in &self.histogram {
            seen += count;
            if lower.is_none() && seen >= lower_rank {
                lower = Some(w);
            }
            if seen >= upper_rank {
                let lo = lower.expect("lower rank reached at or before upper");
                return if total % 2 == 0 {
                    (f64::from(lo) + f64::from(w)) / 2.0
                } else {
                    f64::from(w)
                };
            }
        }
        unreachable!("ranks lie within the histogram")
    }
}

/// Builds the strength distribution from all strictly positive entries of
/// a completed relationship matrix (zeros encode absent relationships and
/// are excluded). A single distinct value yields the degenerate-fit
/// convention `slope = 0, r2 = 0`.
pub fn strength_distribution(
    w: &RelationshipMatrix,
) -> Result<StrengthDistribution, AnalysisError> {
    let mut histogram: BTreeMap<u32, u64> = BTreeMap::new();
    for v in w.positive_entries() {
        *histogram.entry(v).or_insert(0) += 1;
    }
    if histogram.is_empty() {
        return Err(AnalysisError::NoPositiveEntries);
    }
    let total: u64 = histogram.values().sum();
    let mut ccdf = Vec::with_capacity(histogram.len());
    let mut tail = total;
    for (&value, &count) in &histogram {
        ccdf.push((value, tail as f64 / total as f64));
        tail -= count;
    }
    let points: Vec<(f64, f64)> = ccdf
        .iter()
        .map(|&(value, fraction)| (f64::from(value).ln(), fraction.ln()))
        .collect();
    let (powerlaw_slope, powerlaw_r2) = fit_line(&points);
    Ok(StrengthDistribution { histogram, ccdf, powerlaw_slope, powerlaw_r2 })
}

/// Ordinary least squares through `(x, y)` points, returning
/// `(slope, r_squared)`; fewer than two points return the degenerate
/// convention `(0, 0)`.
fn fit_line(points: &[(f64, f64)]) -> (f64, f64) {
    if points.len() < 2 {
        return (0.0, 0.0);
    }
    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mean_x) * (p.0 - mean_x)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let ss_res: f64 = points
        .iter()
        .map(|p| {
            let r = p.1 - (slope * p.0 + intercept);
            r * r
        })
        .sum();
    let ss_tot: f64 = points.iter().map(|p| (p.1 - mean_y) * (p.1 - mean_y)).sum();
    if ss_tot == 0.0 {
        return (slope, 0.0);
    }
    (slope, 1.0 - ss_res / ss_tot)
}

/// One row of the grooming-probability profile: quartiles across groomers
/// of the per-groomer selection probability at relationship strength `w`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfilePoint {
    pub w: u32,
    pub p25: f64,
    pub p50: f64,
    pub p75: f64,
    pub n_exposures: u64,
}

/// Per-strength selection probability profile from a grooming event log.
///
/// For each strength value `w`: every groomer's selection rate is the
/// fraction of its candidate exposures at `w` that were chosen, and the
/// 25th/50th/75th percentiles of those per-groomer rates are reported.
/// Strength values with 20 or fewer pooled exposures are dropped.
pub fn strategy_profile(
    event_log: &[GroomingEventSample],
) -> Result<Vec<ProfilePoint>, AnalysisError> {
    if event_log.is_empty() {
        return Err(AnalysisError::EmptyEventLog);
    }
    // (w, groomer) -> (exposures, chosen)
    let mut counts: BTreeMap<u32, BTreeMap<u32, (u64, u64)>> = BTreeMap::new();
    for sample in event_log {
        let entry = counts
            .entry(sample.w)
            .or_default()
            .entry(sample.groomer)
            .or_insert((0, 0));
        entry.0 += 1;
        if sample.chosen {
            entry.1 += 1;
        }
    }
    let mut profile = Vec::new();
    for (&w, per_groomer) in &counts {
        let n_exposures: u64 = per_groomer.values().map(|&(e, _)| e).sum();
        if n_exposures <= PROFILE_MIN_EXPOSURES {
            continue;
        }
        let mut rates: Vec<f64> = per_groomer
            .values()
            .map(|&(exposures, chosen)| chosen as f64 / exposures as f64)
            .collect();
        rates.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite rates"));
        profile.push(ProfilePoint {
            w,
            p25: percentile(&rates, 25.0),
            p50: percentile(&rates, 50.0),
            p75: percentile(&rates, 75.0),
            n_exposures,
        });
    }
    Ok(profile)
}

/// Linear-interpolation percentile over ascending `sorted`.
fn percentile(sorted: &[f64], pct: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let rank = pct / 100.0 * (sorted.len() - 1) as f64;
    let lo = rank.floor() as usize;
    let hi = rank.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        let frac = rank - lo as f64;
        sorted[lo] + (sorted[hi] - sorted[lo]) * frac
    }
}

/// One row of the q-transition table for a fixed `r_g`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransitionRow {
    pub log_rc_over_m: f64,
    pub r_c: u32,
    pub m: u32,
    pub median_q: f64,
    pub n_replicates: u32,
}

/// Restricts sweep results to Trend2/Trend3 replicates at the given `r_g`,
/// groups them by `(r_c, m)`, and emits the replicate-median of the final
/// median `q` per group, sorted ascending by `ln(r_c / m)`.
pub fn transition_curve(results: &[SweepCellResult], r_g: u32) -> Vec<TransitionRow> {
    let mut groups: BTreeMap<(u32, u32), Vec<f64>> = BTreeMap::new();
    for r in results {
        if r.r_g == r_g && matches!(r.trend, TrendLabel::Trend2 | TrendLabel::Trend3) {
            groups.entry((r.r_c, r.m)).or_default().push(r.final_median_q);
        }
    }
    let mut rows: Vec<TransitionRow> = groups
        .into_iter()
        .map(|((r_c, m), mut qs)| {
            qs.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite q"));
            let n = qs.len();
            let median_q = if n % 2 == 1 { qs[n / 2] } else { (qs[n / 2 - 1] + qs[n / 2]) / 2.0 };
            TransitionRow {
                log_rc_over_m: (f64::from(r_c) / f64::from(m)).ln(),
                r_c,
                m,
                median_q,
                n_replicates: n as u32,
            }
        })
        .collect();
    rows.sort_by(|a, b| {
        a.log_rc_over_m
            .total_cmp(&b.log_rc_over_m)
            .then(a.r_c.cmp(&b.r_c))
            .then(a.m.cmp(&b.m))
    });
    rows
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::RelationshipMatrix;

    #[test]
    fn classification_follows_stated_rule() {
        assert_eq!(classify_trend(3.5, 0.1).unwrap(), TrendLabel::Trend1);
        assert_eq!(classify_trend(1.0, 0.8).unwrap(), TrendLabel::Trend2);
        assert_eq!(classify_trend(0.8, 0.1).unwrap(), TrendLabel::Trend3);
        assert_eq!(classify_trend(-2.0, 0.6).unwrap(), TrendLabel::Trend4);
        // Boundaries: s = 2 -> Trend1, s = 0 stays out of Trend4,
        // q = 0.5 -> Trend2.
        assert_eq!(classify_trend(2.0, 0.9).unwrap(), TrendLabel::Trend1);
        assert_eq!(classify_trend(0.0, 0.5).unwrap(), TrendLabel::Trend2);
        assert_eq!(classify_trend(0.0, 0.49).unwrap(), TrendLabel::Trend3);
        assert!(classify_trend(f64::NAN, 0.5).is_err());
        assert!(classify_trend(0.5, f64::NAN).is_err());
    }

    #[test]
    fn trend_label_round_trips_strings() {
        for label in [TrendLabel::Trend1, TrendLabel::Trend2, TrendLabel::Trend3, TrendLabel::Trend4] {
            assert_eq!(label.to_string().parse::<TrendLabel>().unwrap(), label);
        }
        assert!("Trend5".parse::<TrendLabel>().is_err());
    }

    #[test]
    fn clone_population_gradient_is_exactly_zero() {
        let env = Environment::new(20, 4, 2, 30, 1).unwrap();
        let mut rng = SimRng::seed_from_u64(5);
        let cell = agos_cell(0.7, 0.3, &env, 5, 0.0, &mut rng);
        assert_eq!(cell.ds, 0.0);
        assert_eq!(cell.dq, 0.0);
    }

    #[test]
    fn replicate_mean_identity() {
        let env = Environment::new(10, 3, 1, 15, 1).unwrap();
        let mut rng_a = SimRng::seed_from_u64(77);
        let many = agos_cell(0.5, 0.5, &env, 12, AGOS_SAMPLE_SIGMA, &mut rng_a);
        let mut rng_b = SimRng::seed_from_u64(77);
        let mut sum_ds = 0.0;
        let mut sum_dq = 0.0;
        for _ in 0..12 {
            let single = agos_cell(0.5, 0.5, &env, 1, AGOS_SAMPLE_SIGMA, &mut rng_b);
            sum_ds += single.ds;
            sum_dq += single.dq;
        }
        assert_eq!(many.ds, sum_ds / 12.0);
        assert_eq!(many.dq, sum_dq / 12.0);
    }

    #[test]
    fn axis_points_hit_requested_lattice() {
        let s = AxisRange::new(-1.0, 1.0, 1.0).unwrap();
        let q = AxisRange::new(0.0, 1.0, 0.5).unwrap();
        assert_eq!(s.points(), vec![-1.0, 0.0, 1.0]);
        assert_eq!(q.points(), vec![0.0, 0.5, 1.0]);
        assert_eq!(default_q_range().points().len(), 21);
        assert_eq!(default_s_range().points().len(), 17);
        assert!(AxisRange::new(0.0, 1.0, 0.0).is_err());
        assert!(AxisRange::new(1.0, 0.0, 0.5).is_err());
    }

    #[test]
    fn grid_covers_lattice_in_order() {
        let env = Environment::new(5, 2, 1, 5, 1).unwrap();
        let s = AxisRange::new(-1.0, 1.0, 1.0).unwrap();
        let q = AxisRange::new(0.0, 1.0, 0.5).unwrap();
        let cells = agos_grid(&s, &q, &env, 2, AGOS_SAMPLE_SIGMA, 9);
        assert_eq!(cells.len(), 9);
        let centers: Vec<(f64, f64)> = cells.iter().map(|c| (c.s_center, c.q_center)).collect();
        let expect: Vec<(f64, f64)> = s
            .points()
            .into_iter()
            .flat_map(|sv| q.points().into_iter().map(move |qv| (sv, qv)))
            .collect();
        assert_eq!(centers, expect);
        // Same seed, same grid.
        let again = agos_grid(&s, &q, &env, 2, AGOS_SAMPLE_SIGMA, 9);
        assert_eq!(cells, again);
    }

    #[test]
    fn orbit_with_zero_gradient_and_noise_is_constant() {
        let mut rng = SimRng::seed_from_u64(1);
        let traj =
            integrate_orbit_with((0.3, 0.5), 10, 0.0, &mut rng, |_, _, _| (0.0, 0.0));
        assert_eq!(traj.len(), 11);
        assert!(traj.iter().all(|&p| p == (0.3, 0.5)));
    }

    #[test]
    fn orbit_clamps_q() {
        let mut rng = SimRng::seed_from_u64(2);
        let traj =
            integrate_orbit_with((0.0, 0.9), 5, 0.0, &mut rng, |_, _, _| (0.1, 0.2));
        assert_eq!(traj.len(), 6);
        assert!(traj.iter().all(|&(_, q)| (0.0..=1.0).contains(&q)));
        assert_eq!(traj.last().unwrap().1, 1.0);
    }

    #[test]
    fn ccdf_counts_single_row() {
        let w = RelationshipMatrix::from_rows(vec![vec![5, 3, 1, 1]]).unwrap();
        let d = strength_distribution(&w).unwrap();
        assert_eq!(d.ccdf, vec![(1, 1.0), (3, 0.5), (5, 0.25)]);
        assert_eq!(d.total_entries(), 4);
        assert_eq!(d.max_strength(), 5);
        assert_eq!(d.median_strength(), 2.0);
    }

    #[test]
    fn ccdf_is_monotone_and_anchored_at_one() {
        let w = RelationshipMatrix::from_rows(vec![vec![2, 9, 4, 4, 0], vec![7, 2, 2, 1, 1]])
            .unwrap();
        let d = strength_distribution(&w).unwrap();
        assert_eq!(d.ccdf.first().unwrap().1, 1.0);
        for pair in d.ccdf.windows(2) {
            assert!(pair[1].1 <= pair[0].1);
        }
        let entries: u64 = d.histogram.values().sum();
        assert_eq!(entries, 9);
    }

    #[test]
    fn degenerate_distribution_uses_zero_fit_convention() {
        let w = RelationshipMatrix::from_rows(vec![vec![4, 4], vec![4, 4]]).unwrap();
        let d = strength_distribution(&w).unwrap();
        assert_eq!(d.ccdf, vec![(4, 1.0)]);
        assert_eq!(d.powerlaw_slope, 0.0);
        assert_eq!(d.powerlaw_r2, 0.0);
    }

    #[test]
    fn no_positive_entries_is_an_error() {
        let w = RelationshipMatrix::zeros(2, 2);
        assert_eq!(strength_distribution(&w), Err(AnalysisError::NoPositiveEntries));
    }

    #[test]
    fn synthetic_inverse_square_counts_fit_slope_minus_one() {
        // Counts c(w) = K/w - K/(w+1) ~ K w^-2, with the final bucket
        // absorbing the remaining tail, telescope to tail sums of exactly
        // K/w. The CCDF is therefore (1/w) * (1 + O(1/K)) at every observed
        // point and the log-log fit recovers slope -1.
        let k = 1_000_000u64;
        let mut entries: Vec<u32> = Vec::new();
        for w in 1..=100u64 {
            let count = if w == 100 { k / w } else { k / w - k / (w + 1) };
            entries.extend(std::iter::repeat(w as u32).take(count as usize));
        }
        let matrix = RelationshipMatrix::from_rows(vec![entries]).unwrap();
        let d = strength_distribution(&matrix).unwrap();
        assert!(
            (d.powerlaw_slope + 1.0).abs() < 0.1,
            "slope {}",
            d.powerlaw_slope
        );
        assert!(d.powerlaw_r2 > 0.99, "r2 {}", d.powerlaw_r2);
    }

    #[test]
    fn profile_single_groomer_percentiles_collapse() {
        let mut log = Vec::new();
        for i in 0..30 {
            log.push(GroomingEventSample { groomer: 0, w: 1, chosen: i < 15 });
        }
        let profile = strategy_profile(&log).unwrap();
        assert_eq!(profile.len(), 1);
        let p = profile[0];
        assert_eq!(p.w, 1);
        assert_eq!((p.p25, p.p50, p.p75), (0.5, 0.5, 0.5));
        assert_eq!(p.n_exposures, 30);
    }

    #[test]
    fn profile_drops_sparse_strengths() {
        let mut log = Vec::new();
        for i in 0..30 {
            log.push(GroomingEventSample { groomer: 0, w: 1, chosen: i % 2 == 0 });
        }
        for _ in 0..10 {
            log.push(GroomingEventSample { groomer: 0, w: 2, chosen: false });
        }
        let profile = strategy_profile(&log).unwrap();
        assert_eq!(profile.iter().filter(|p| p.w == 2).count(), 0);
        assert_eq!(profile.len(), 1);
        // Exactly 20 exposures is still dropped (the floor is "more than 20").
        let boundary: Vec<GroomingEventSample> = (0..20)
            .map(|_| GroomingEventSample { groomer: 0, w: 3, chosen: true })
            .collect();
        assert!(strategy_profile(&boundary).unwrap().is_empty());
        assert_eq!(strategy_profile(&[]), Err(AnalysisError::EmptyEventLog));
    }

    #[test]
    fn profile_percentiles_span_groomers() {
        let mut log = Vec::new();
        // Three groomers at w = 1 with rates 0.0, 0.5, 1.0.
        for groomer in 0..3u32 {
            for i in 0..10 {
                let chosen = match groomer {
                    0 => false,
                    1 => i % 2 == 0,
                    _ => true,
                };
                log.push(GroomingEventSample { groomer, w: 1, chosen });
            }
        }
        let profile = strategy_profile(&log).unwrap();
        assert_eq!(profile.len(), 1);
        let p = profile[0];
        assert_eq!(p.n_exposures, 30);
        assert_eq!((p.p25, p.p50, p.p75), (0.25, 0.5, 0.75));
    }

    fn cell(r_c: u32, m: u32, q: f64, trend: TrendLabel) -> SweepCellResult {
        SweepCellResult {
            r_g: 300,
            r_c,
            m,
            replicate: 0,
            seed: 0,
            final_median_s: 1.0,
            final_median_q: q,
            trend,
        }
    }

    #[test]
    fn transition_orders_by_log_ratio() {
        let results = vec![
            cell(15, 45, 0.8, TrendLabel::Trend2),
            cell(5, 200, 0.1, TrendLabel::Trend3),
            cell(5, 5, 0.1, TrendLabel::Trend1),
        ];
        let rows = transition_curve(&results, 300);
        assert_eq!(rows.len(), 2);
        assert_eq!((rows[0].r_c, rows[0].m), (5, 200));
        assert_eq!((rows[1].r_c, rows[1].m), (15, 45));
        assert!(rows[0].log_rc_over_m < rows[1].log_rc_over_m);
        assert_eq!(rows[0].log_rc_over_m, (5.0f64 / 200.0).ln());
    }

    #[test]
    fn transition_takes_replicate_median() {
        let mut results = Vec::new();
        for (rep, q) in [(0u32, 0.1), (1, 0.2), (2, 0.3)] {
            let mut c = cell(10, 40, q, TrendLabel::Trend3);
            c.replicate = rep;
            results.push(c);
        }
        let rows = transition_curve(&results, 300);
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].median_q, 0.2);
        assert_eq!(rows[0].n_replicates, 3);
        // Wrong r_g filters everything out; empty output is not an error.
        assert!(transition_curve(&results, 100).is_empty());
    }
}
