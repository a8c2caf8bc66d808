//! Experiment-grid execution: runs every `(r_g, r_c, m, replicate)` cell of
//! a sweep specification with a bounded worker pool, checkpoints each
//! completed simulation durably, and aggregates per-cell trend frequencies.
//!
//! Layout under the output directory:
//!
//! - `sweep.csv` — one row per finished simulation, sorted by
//!   `(r_g, r_c, m, replicate)`, rewritten at the end of every run;
//! - `sweep/<r_g>/<r_c>_<m>/rep<k>.jsonl` — the per-generation records of
//!   each simulation;
//! - `manifest.jsonl` — internal checkpoint state, one line per finished
//!   simulation, appended and flushed as workers complete. A rep file is
//!   only trusted once its manifest line exists, so interrupting a sweep at
//!   any point leaves a resumable state and `run_sweep` on the same
//!   directory recomputes nothing that already finished.

use std::collections::BTreeMap;
use std::fs::{self, File, OpenOptions};
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::{classify_trend, TrendLabel};
use crate::evolution::run_simulation;
use crate::meta::FileMeta;
use crate::model::{Environment, ModelError};
use crate::seedmix::absorb;

/// Exact header of the sweep result CSV.
pub const SWEEP_CSV_HEADER: &str = "r_g,r_c,m,replicate,seed,final_median_s,final_median_q,trend";
/// Result CSV filename inside the output directory.
pub const SWEEP_CSV_NAME: &str = "sweep.csv";
/// Checkpoint manifest filename inside the output directory.
pub const MANIFEST_NAME: &str = "manifest.jsonl";

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("invalid sweep spec: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("malformed sweep CSV at line {line}: {message}")]
    MalformedCsv { line: usize, message: String },
}

/// The grid parameters held fixed across all cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixedParams {
    pub n_groomers: u32,
    pub t_generations: u32,
}

/// One sweep: the cross product of `r_c_values x m_values x r_g_values`,
/// each cell run `replicates` times with seeds derived from `base_seed`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub r_c_values: Vec<u32>,
    pub m_values: Vec<u32>,
    pub r_g_values: Vec<u32>,
    pub replicates: u32,
    pub base_seed: u64,
    pub fixed: FixedParams,
}

impl SweepSpec {
    /// The full default grid: `r_c` in 5..=50 step 5, `m` in 5..=200 step
    /// 5, `r_g` in {100, 300}, 30 replicates, 100 groomers, 200
    /// generations.
    pub fn default_grid() -> Self {
        Self {
            r_c_values: (1..=10).map(|i| i * 5).collect(),
            m_values: (1..=40).map(|i| i * 5).collect(),
            r_g_values: vec![100, 300],
            replicates: 30,
            base_seed: 0,
            fixed: FixedParams { n_groomers: 100, t_generations: 200 },
        }
    }

    pub fn validate(&self) -> Result<(), SweepError> {
        for (name, values) in [
            ("r_c_values", &self.r_c_values),
            ("m_values", &self.m_values),
            ("r_g_values", &self.r_g_values),
        ] {
            if values.is_empty() {
                return Err(SweepError::InvalidSpec(format!("{name} must be non-empty")));
            }
            if values.windows(2).any(|p| p[0] >= p[1]) {
                return Err(SweepError::InvalidSpec(format!(
                    "{name} must be strictly increasing (got {values:?})"
                )));
            }
            if values[0] == 0 {
                return Err(SweepError::InvalidSpec(format!("{name} must be positive")));
            }
        }
        if self.replicates == 0 {
            return Err(SweepError::InvalidSpec("replicates must be at least 1".into()));
        }
        // Surface bad fixed params before any work starts.
        Environment::new(
            self.fixed.n_groomers,
            self.m_values[0],
            self.r_c_values[0],
            self.r_g_values[0],
            self.fixed.t_generations,
        )?;
        Ok(())
    }

    /// All jobs in output order: sorted by `(r_g, r_c, m, replicate)`.
    pub fn jobs(&self) -> Vec<JobKey> {
        let mut jobs = Vec::with_capacity(self.job_count());
        for &r_g in &self.r_g_values {
            for &r_c in &self.r_c_values {
                for &m in &self.m_values {
                    for replicate in 0..self.replicates {
                        jobs.push(JobKey { r_g, r_c, m, replicate });
                    }
                }
            }
        }
        jobs
    }

    pub fn job_count(&self) -> usize {
        self.r_c_values.len()
            * self.m_values.len()
            * self.r_g_values.len()
            * self.replicates as usize
    }

    fn environment(&self, key: &JobKey) -> Result<Environment, ModelError> {
        Environment::new(
            self.fixed.n_groomers,
            key.m,
            key.r_c,
            key.r_g,
            self.fixed.t_generations,
        )
    }
}

/// Identity of one simulation inside a sweep. Field order gives the
/// derived `Ord` the output sort order `(r_g, r_c, m, replicate)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct JobKey {
    pub r_g: u32,
    pub r_c: u32,
    pub m: u32,
    pub replicate: u32,
}

/// Outcome of one finished simulation: the final population's median
/// strategy values and the trend they classify to under the default
/// thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepCellResult {
    pub r_g: u32,
    pub r_c: u32,
    pub m: u32,
    pub replicate: u32,
    pub seed: u64,
    pub final_median_s: f64,
    pub final_median_q: f64,
    pub trend: TrendLabel,
}

impl SweepCellResult {
    pub fn key(&self) -> JobKey {
        JobKey { r_g: self.r_g, r_c: self.r_c, m: self.m, replicate: self.replicate }
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            self.r_g,
            self.r_c,
            self.m,
            self.replicate,
            self.seed,
            self.final_median_s,
            self.final_median_q,
            self.trend
        )
    }
}

/// Derives the simulation seed for one grid cell replicate.
///
/// The mixer is fixed bit-exactly: starting from `base_seed`, absorb
/// `r_c`, `m`, `r_g`, then `replicate` in that order, where
/// `absorb(state, word) = splitmix64(state XOR (word + 0x9e3779b97f4a7c15))`
/// and `splitmix64` is the standard finalizer (xor-shift 30, multiply
/// `0xbf58476d1ce4e5b9`, xor-shift 27, multiply `0x94d049bb133111eb`,
/// xor-shift 31). Distinct tuples land on distinct seeds with overwhelming
/// probability.
pub fn derive_seed(base_seed: u64, r_c: u32, m: u32, r_g: u32, replicate: u32) -> u64 {
    let mut state = base_seed;
    for word in [r_c, m, r_g, replicate] {
        state = absorb(state, u64::from(word));
    }
    state
}

/// Relative path of one cell's generation-record file.
pub fn rep_file_path(out_dir: &Path, key: &JobKey) -> PathBuf {
    out_dir
        .join("sweep")
        .join(key.r_g.to_string())
        .join(format!("{}_{}", key.r_c, key.m))
        .join(format!("rep{}.jsonl", key.replicate))
}

/// Runs (or resumes) a sweep into `out_dir` with `parallelism` workers.
///
/// Finished simulations recorded in the manifest are skipped; everything
/// else is executed, checkpointed, and merged. The returned results — and
/// `sweep.csv` — are sorted by `(r_g, r_c, m, replicate)`, so output does
/// not depend on the degree of parallelism or on interruptions.
pub fn run_sweep(
    spec: &SweepSpec,
    parallelism: usize,
    out_dir: &Path,
    reproducible: bool,
) -> Result<Vec<SweepCellResult>, SweepError> {
    spec.validate()?;
    fs::create_dir_all(out_dir)?;
    let jobs = spec.jobs();
    let manifest_path = out_dir.join(MANIFEST_NAME);
    let finished = load_manifest(&manifest_path, spec)?;
    let pending: Vec<JobKey> =
        jobs.iter().copied().filter(|k| !finished.contains_key(k)).collect();

    let mut results: Vec<SweepCellResult> = finished.into_values().collect();
    if !pending.is_empty() {
        let manifest = OpenOptions::new().create(true).append(true).open(&manifest_path)?;
        let sink = Mutex::new(Sink { manifest: BufWriter::new(manifest), results: Vec::new() });
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(parallelism.max(1))
            .build()
            .map_err(|e| SweepError::InvalidSpec(format!("worker pool: {e}")))?;
        pool.install(|| {
            pending
                .par_iter()
                .try_for_each(|key| run_cell(spec, key, out_dir, reproducible, &sink))
        })?;
        results.extend(sink.into_inner().expect("sink lock poisoned").results);
    }

    results.sort_by_key(SweepCellResult::key);
    let meta = FileMeta::new("sweep", spec, Some(spec.base_seed), reproducible);
    crate::meta::write_csv(
        &out_dir.join(SWEEP_CSV_NAME),
        &meta,
        SWEEP_CSV_HEADER,
        results.iter().map(SweepCellResult::csv_row),
    )?;
    Ok(results)
}

struct Sink {
    manifest: BufWriter<File>,
    results: Vec<SweepCellResult>,
}

fn run_cell(
    spec: &SweepSpec,
    key: &JobKey,
    out_dir: &Path,
    reproducible: bool,
    sink: &Mutex<Sink>,
) -> Result<(), SweepError> {
    let seed = derive_seed(spec.base_seed, key.r_c, key.m, key.r_g, key.replicate);
    let env = spec.environment(key)?;
    let sim = run_simulation(&env, seed);
    let result = SweepCellResult {
        r_g: key.r_g,
        r_c: key.r_c,
        m: key.m,
        replicate: key.replicate,
        seed,
        final_median_s: sim.final_population.median_s(),
        final_median_q: sim.final_population.median_q(),
        trend: classify_trend(
            sim.final_population.median_s(),
            sim.final_population.median_q(),
        )
        .expect("medians of a valid population are finite"),
    };

    let rep_path = rep_file_path(out_dir, key);
    fs::create_dir_all(rep_path.parent().expect("rep file has a parent"))?;
    let rep_meta = FileMeta::new(
        "sweep",
        &serde_json::json!({
            "r_g": key.r_g,
            "r_c": key.r_c,
            "m": key.m,
            "replicate": key.replicate,
            "env": env,
        }),
        Some(seed),
        reproducible,
    );
    crate::meta::write_jsonl(&rep_path, &rep_meta, &sim.records)?;

    // The manifest line lands only after the rep file is fully on disk.
    let mut sink = sink.lock().expect("sink lock poisoned");
    serde_json::to_writer(&mut sink.manifest, &result)?;
    sink.manifest.write_all(b"\n")?;
    sink.manifest.flush()?;
    sink.results.push(result);
    Ok(())
}

/// Loads finished results from a manifest, keeping only lines that belong
/// to this spec (matching job key and derived seed); anything else is
/// recomputed.
fn load_manifest(
    path: &Path,
    spec: &SweepSpec,
) -> Result<BTreeMap<JobKey, SweepCellResult>, SweepError> {
    let mut finished = BTreeMap::new();
    let file = match File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(finished),
        Err(e) => return Err(e.into()),
    };
    let keys: std::collections::BTreeSet<JobKey> = spec.jobs().into_iter().collect();
    for line in BufReader::new(file).lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        // Torn or foreign lines are treated as unfinished work.
        let Ok(result) = serde_json::from_str::<SweepCellResult>(&line) else {
            continue;
        };
        let key = result.key();
        if keys.contains(&key)
            && result.seed == derive_seed(spec.base_seed, key.r_c, key.m, key.r_g, key.replicate)
        {
            finished.insert(key, result);
        }
    }
    Ok(finished)
}

/// Parses a sweep result CSV (as written by [`run_sweep`]), skipping the
/// meta comment line and the header row.
pub fn parse_sweep_csv<R: BufRead>(reader: R) -> Result<Vec<SweepCellResult>, SweepError> {
    let mut results = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') || trimmed == SWEEP_CSV_HEADER {
            continue;
        }
        let bad = |message: &str| SweepError::MalformedCsv {
            line: idx + 1,
            message: message.to_string(),
        };
        let fields: Vec<&str> = trimmed.split(',').collect();
        if fields.len() != 8 {
            return Err(bad(&format!("expected 8 fields, got {}", fields.len())));
        }
        results.push(SweepCellResult {
            r_g: fields[0].parse().map_err(|_| bad("r_g"))?,
            r_c: fields[1].parse().map_err(|_| bad("r_c"))?,
            m: fields[2].parse().map_err(|_| bad("m"))?,
            replicate: fields[3].parse().map_err(|_| bad("replicate"))?,
            seed: fields[4].parse().map_err(|_| bad("seed"))?,
            final_median_s: fields[5].parse().map_err(|_| bad("final_median_s"))?,
            final_median_q: fields[6].parse().map_err(|_| bad("final_median_q"))?,
            trend: fields[7].parse().map_err(|_| bad("trend"))?,
        });
    }
    Ok(results)
}

/// Per-cell trend counts over replicates, grouped by `(r_g, r_c, m)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrendFrequencyRow {
    pub r_g: u32,
    pub r_c: u32,
    pub m: u32,
    pub n_replicates: u32,
    pub trend1: u32,
    pub trend2: u32,
    pub trend3: u32,
    pub trend4: u32,
}

pub fn trend_frequencies(results: &[SweepCellResult]) -> Vec<TrendFrequencyRow> {
    let mut groups: BTreeMap<(u32, u32, u32), [u32; 4]> = BTreeMap::new();
    for r in results {
        let counts = groups.entry((r.r_g, r.r_c, r.m)).or_insert([0; 4]);
        let slot = match r.trend {
            TrendLabel::Trend1 => 0,
            TrendLabel::Trend2 => 1,
            TrendLabel::Trend3 => 2,
            TrendLabel::Trend4 => 3,
        };
        counts[slot] += 1;
    }
    groups
        .into_iter()
        .map(|((r_g, r_c, m), c)| TrendFrequencyRow {
            r_g,
            r_c,
            m,
            n_replicates: c.iter().sum(),
            trend1: c[0],
            trend2: c[1],
            trend3: c[2],
            trend4: c[3],
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_spec() -> SweepSpec {
        SweepSpec {
            r_c_values: vec![1, 2],
            m_values: vec![2, 3],
            r_g_values: vec![4],
            replicates: 2,
            base_seed: 99,
            fixed: FixedParams { n_groomers: 4, t_generations: 3 },
        }
    }

    #[test]
    fn default_grid_matches_published_protocol() {
        let spec = SweepSpec::default_grid();
        spec.validate().unwrap();
        assert_eq!(spec.r_c_values.first(), Some(&5));
        assert_eq!(spec.r_c_values.last(), Some(&50));
        assert_eq!(spec.r_c_values.len(), 10);
        assert_eq!(spec.m_values.len(), 40);
        assert_eq!(spec.m_values.last(), Some(&200));
        assert_eq!(spec.r_g_values, vec![100, 300]);
        assert_eq!(spec.replicates, 30);
        // 10 * 40 * 30 simulations per r_g value.
        assert_eq!(spec.job_count(), 2 * 12_000);
    }

    #[test]
    fn spec_validation_rejects_malformed_grids() {
        let mut spec = tiny_spec();
        spec.m_values = vec![];
        assert!(matches!(spec.validate(), Err(SweepError::InvalidSpec(_))));
        let mut spec = tiny_spec();
        spec.r_c_values = vec![5, 5];
        assert!(spec.validate().is_err());
        let mut spec = tiny_spec();
        spec.r_g_values = vec![300, 100];
        assert!(spec.validate().is_err());
        let mut spec = tiny_spec();
        spec.replicates = 0;
        assert!(spec.validate().is_err());
        let mut spec = tiny_spec();
        spec.fixed.n_groomers = 0;
        assert!(spec.validate().is_err());
    }

    #[test]
    fn derive_seed_is_deterministic_and_tuple_sensitive() {
        let a = derive_seed(0, 5, 5, 300, 0);
        assert_eq!(a, derive_seed(0, 5, 5, 300, 0));
        assert_ne!(a, derive_seed(1, 5, 5, 300, 0));
        assert_ne!(a, derive_seed(0, 5, 5, 100, 0));
        // Symmetric tuples must not collide.
        assert_ne!(derive_seed(0, 5, 10, 300, 0), derive_seed(0, 10, 5, 300, 0));
    }

    #[test]
    fn derive_seed_replicates_distinct_at_one_grid_point() {
        let mut seen = std::collections::BTreeSet::new();
        for replicate in 0..1000 {
            assert!(seen.insert(derive_seed(0, 5, 5, 300, replicate)));
        }
    }

    #[test]
    fn jobs_are_sorted_and_complete() {
        let spec = tiny_spec();
        let jobs = spec.jobs();
        assert_eq!(jobs.len(), 8);
        let mut sorted = jobs.clone();
        sorted.sort();
        assert_eq!(jobs, sorted);
    }

    #[test]
    fn csv_rows_parse_back() {
        let result = SweepCellResult {
            r_g: 300,
            r_c: 5,
            m: 45,
            replicate: 3,
            seed: 0xdead_beef,
            final_median_s: 1.25,
            final_median_q: 0.0625,
            trend: TrendLabel::Trend2,
        };
        let text = format!("{}\n{}\n{}\n", "# {}", SWEEP_CSV_HEADER, result.csv_row());
        let parsed = parse_sweep_csv(text.as_bytes()).unwrap();
        assert_eq!(parsed, vec![result]);
        assert!(parse_sweep_csv("1,2,3\n".as_bytes()).is_err());
    }

    #[test]
    fn trend_frequencies_sum_to_replicates() {
        let spec = tiny_spec();
        let results: Vec<SweepCellResult> = spec
            .jobs()
            .into_iter()
            .map(|k| SweepCellResult {
                r_g: k.r_g,
                r_c: k.r_c,
                m: k.m,
                replicate: k.replicate,
                seed: 0,
                final_median_s: if k.replicate == 0 { 3.0 } else { -1.0 },
                final_median_q: 0.2,
                trend: if k.replicate == 0 { TrendLabel::Trend1 } else { TrendLabel::Trend4 },
            })
            .collect();
        let rows = trend_frequencies(&results);
        assert_eq!(rows.len(), 4);
        for row in rows {
            assert_eq!(row.n_replicates, 2);
            assert_eq!(row.trend1 + row.trend2 + row.trend3 + row.trend4, 2);
        }
    }
}
