//! The five subcommand bodies. Every emitted file begins with a metadata
//! header (a `#` comment line in CSVs, a `_meta` field in JSON, a `_meta`
//! first line in JSON-Lines) recording version, resolved config, and seed.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use clap::parser::ArgMatches;
use groomsim::analysis::{strategy_profile, strength_distribution, transition_curve, AxisRange};
use groomsim::evolution::{run_simulation_logged, seeded_rng, SimulationResult};
use groomsim::meta::{self, FileMeta};
use groomsim::model::Environment;
use groomsim::sweep::{parse_sweep_csv, run_sweep, trend_frequencies, SweepError, SweepSpec};
use serde::Serialize;

use crate::args::{AgosArgs, AnalyzeArgs, OrbitArgs, RunArgs, SweepArgs};
use crate::config::{
    self, AgosConfig, AgosConfigFile, AnalyzeConfig, AnalyzeConfigFile, Overlay, OrbitConfig,
    OrbitConfigFile, RunConfig, RunConfigFile,
};
use crate::CliError;

fn ensure_dir(path: &Path) -> Result<(), CliError> {
    fs::create_dir_all(path)
        .map_err(|e| CliError::Runtime(format!("creating {}: {e}", path.display())))
}

fn write_err(path: &Path) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |e| CliError::Runtime(format!("writing {}: {e}", path.display()))
}

pub fn run(args: RunArgs, matches: &ArgMatches) -> Result<(), CliError> {
    let file: RunConfigFile =
        args.config.as_ref().map(|p| config::load(p)).transpose()?.unwrap_or_default();
    let o = Overlay::new(matches);
    let cfg = RunConfig {
        rc: o.require("rc", args.rc, file.rc)?,
        m: o.require("m", args.m, file.m)?,
        rg: o.pick("rg", args.rg, file.rg),
        t: o.pick("t", args.t, file.t),
        n: o.pick("n", args.n, file.n),
        seed: o.pick("seed", args.seed, file.seed),
        out: o.require("out", args.out, file.out)?,
        capture_event_log: o.pick(
            "capture_event_log",
            args.capture_event_log,
            file.capture_event_log,
        ),
        reproducible: o.pick("reproducible", args.reproducible, file.reproducible),
    };
    let env = Environment::new(cfg.n, cfg.m, cfg.rc, cfg.rg, cfg.t)
        .map_err(|e| CliError::Usage(e.to_string()))?;

    let result = run_simulation_logged(&env, cfg.seed, cfg.capture_event_log);
    ensure_dir(&cfg.out)?;
    let meta = FileMeta::new("run", &cfg, Some(cfg.seed), cfg.reproducible);
    let result_path = cfg.out.join("result.json");
    meta::write_json_document(&result_path, &meta, &result).map_err(write_err(&result_path))?;
    let records_path = cfg.out.join("records.jsonl");
    meta::write_jsonl(&records_path, &meta, &result.records).map_err(write_err(&records_path))?;
    println!(
        "run: {} generations, final median s {:.4}, median q {:.4} -> {}",
        result.records.len(),
        result.final_population.median_s(),
        result.final_population.median_q(),
        cfg.out.display()
    );
    Ok(())
}

pub fn sweep(args: SweepArgs, matches: &ArgMatches) -> Result<(), CliError> {
    let o = Overlay::new(matches);
    let spec_path = o.require("config", args.config, None)?;
    let mut spec: SweepSpec = config::load(&spec_path)?;
    if let Some(seed) = args.seed {
        spec.base_seed = seed;
    }
    let out = o.require("out", args.out, None)?;
    let results = run_sweep(&spec, args.parallelism.max(1), &out, args.reproducible)
        .map_err(|e| match e {
            SweepError::InvalidSpec(_) | SweepError::Model(_) => CliError::Usage(e.to_string()),
            other => CliError::Runtime(other.to_string()),
        })?;
    println!(
        "sweep: {} simulations ({} jobs) -> {}",
        results.len(),
        spec.job_count(),
        out.display()
    );
    Ok(())
}

pub fn agos(args: AgosArgs, matches: &ArgMatches) -> Result<(), CliError> {
    let file: AgosConfigFile =
        args.config.as_ref().map(|p| config::load(p)).transpose()?.unwrap_or_default();
    let o = Overlay::new(matches);
    let cfg = AgosConfig {
        rc: o.require("rc", args.rc, file.rc)?,
        m: o.require("m", args.m, file.m)?,
        rg: o.pick("rg", args.rg, file.rg),
        n: o.pick("n", args.n, file.n),
        replicates: o.pick("replicates", args.replicates, file.replicates),
        sample_sigma: o.pick("sample_sigma", args.sample_sigma, file.sample_sigma),
        s_min: o.pick("s_min", args.s_min, file.s_min),
        s_max: o.pick("s_max", args.s_max, file.s_max),
        s_step: o.pick("s_step", args.s_step, file.s_step),
        q_min: o.pick("q_min", args.q_min, file.q_min),
        q_max: o.pick("q_max", args.q_max, file.q_max),
        q_step: o.pick("q_step", args.q_step, file.q_step),
        seed: o.pick("seed", args.seed, file.seed),
        out: o.require("out", args.out, file.out)?,
        reproducible: o.pick("reproducible", args.reproducible, file.reproducible),
    };
    if cfg.replicates < 1 {
        return Err(CliError::Usage("replicates must be at least 1".into()));
    }
    let env = Environment::new(cfg.n, cfg.m, cfg.rc, cfg.rg, 1)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let s_range = AxisRange::new(cfg.s_min, cfg.s_max, cfg.s_step)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let q_range = AxisRange::new(cfg.q_min, cfg.q_max, cfg.q_step)
        .map_err(|e| CliError::Usage(e.to_string()))?;

    let cells = groomsim::analysis::agos_grid(
        &s_range,
        &q_range,
        &env,
        cfg.replicates,
        cfg.sample_sigma,
        cfg.seed,
    );
    ensure_dir(&cfg.out)?;
    let meta = FileMeta::new("agos", &cfg, Some(cfg.seed), cfg.reproducible);
    let path = cfg.out.join("agos.csv");
    meta::write_csv(
        &path,
        &meta,
        "s,q,ds,dq,replicates",
        cells.iter().map(|c| {
            format!("{},{},{},{},{}", c.s_center, c.q_center, c.ds, c.dq, c.replicates)
        }),
    )
    .map_err(write_err(&path))?;
    println!("agos: {} cells -> {}", cells.len(), path.display());
    Ok(())
}

pub fn orbit(args: OrbitArgs, matches: &ArgMatches) -> Result<(), CliError> {
    let file: OrbitConfigFile =
        args.config.as_ref().map(|p| config::load(p)).transpose()?.unwrap_or_default();
    let o = Overlay::new(matches);
    let cfg = OrbitConfig {
        rc: o.require("rc", args.rc, file.rc)?,
        m: o.require("m", args.m, file.m)?,
        rg: o.pick("rg", args.rg, file.rg),
        n: o.pick("n", args.n, file.n),
        s0: o.pick("s0", args.s0, file.s0),
        q0: o.pick("q0", args.q0, file.q0),
        steps: o.pick("steps", args.steps, file.steps),
        noise_sigma: o.pick("noise_sigma", args.noise_sigma, file.noise_sigma),
        replicates: o.pick("replicates", args.replicates, file.replicates),
        sample_sigma: o.pick("sample_sigma", args.sample_sigma, file.sample_sigma),
        seed: o.pick("seed", args.seed, file.seed),
        out: o.require("out", args.out, file.out)?,
        reproducible: o.pick("reproducible", args.reproducible, file.reproducible),
    };
    if cfg.steps < 1 || cfg.replicates < 1 {
        return Err(CliError::Usage("steps and replicates must be at least 1".into()));
    }
    if !(0.0..=1.0).contains(&cfg.q0) || cfg.noise_sigma < 0.0 {
        return Err(CliError::Usage(
            "q0 must lie in [0, 1] and noise-sigma must be non-negative".into(),
        ));
    }
    let env = Environment::new(cfg.n, cfg.m, cfg.rc, cfg.rg, 1)
        .map_err(|e| CliError::Usage(e.to_string()))?;

    let mut rng = seeded_rng(cfg.seed);
    let trajectory = groomsim::analysis::integrate_orbit(
        (cfg.s0, cfg.q0),
        &env,
        cfg.steps,
        cfg.noise_sigma,
        cfg.replicates,
        &mut rng,
    );
    ensure_dir(&cfg.out)?;
    let meta = FileMeta::new("orbit", &cfg, Some(cfg.seed), cfg.reproducible);
    let path = cfg.out.join("orbit.csv");
    meta::write_csv(
        &path,
        &meta,
        "step,s,q",
        trajectory.iter().enumerate().map(|(i, (s, q))| format!("{i},{s},{q}")),
    )
    .map_err(write_err(&path))?;
    println!("orbit: {} steps -> {}", cfg.steps, path.display());
    Ok(())
}

pub fn analyze(args: AnalyzeArgs, matches: &ArgMatches) -> Result<(), CliError> {
    let file: AnalyzeConfigFile =
        args.config.as_ref().map(|p| config::load(p)).transpose()?.unwrap_or_default();
    let o = Overlay::new(matches);
    let cfg = AnalyzeConfig {
        result: if args.result.is_some() { args.result.clone() } else { file.result },
        sweep_csv: if args.sweep_csv.is_some() { args.sweep_csv.clone() } else { file.sweep_csv },
        seed: o.pick("seed", args.seed, file.seed),
        out: o.require("out", args.out, file.out)?,
        reproducible: o.pick("reproducible", args.reproducible, file.reproducible),
    };
    if cfg.result.is_none() && cfg.sweep_csv.is_none() {
        return Err(CliError::Usage(
            "nothing to analyze: pass --result and/or --sweep-csv".into(),
        ));
    }
    ensure_dir(&cfg.out)?;
    let meta = FileMeta::new("analyze", &cfg, Some(cfg.seed), cfg.reproducible);

    if let Some(result_path) = &cfg.result {
        let text = fs::read_to_string(result_path)
            .map_err(|e| CliError::Usage(format!("result file {}: {e}", result_path.display())))?;
        let result: SimulationResult = serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("result file {}: {e}", result_path.display())))?;
        analyze_result(&result, &cfg.out, &meta)?;
    }

    if let Some(csv_path) = &cfg.sweep_csv {
        let file = fs::File::open(csv_path)
            .map_err(|e| CliError::Usage(format!("sweep CSV {}: {e}", csv_path.display())))?;
        let results = parse_sweep_csv(std::io::BufReader::new(file))
            .map_err(|e| CliError::Usage(format!("sweep CSV {}: {e}", csv_path.display())))?;
        analyze_sweep(&results, &cfg.out, &meta)?;
    }
    Ok(())
}

fn analyze_result(
    result: &SimulationResult,
    out: &Path,
    meta: &FileMeta,
) -> Result<(), CliError> {
    let dist = strength_distribution(&result.final_w)
        .map_err(|e| CliError::Usage(format!("strength distribution: {e}")))?;

    let hist_path = out.join("strength_histogram.csv");
    meta::write_csv(
        &hist_path,
        meta,
        "w,count",
        dist.histogram.iter().map(|(w, c)| format!("{w},{c}")),
    )
    .map_err(write_err(&hist_path))?;

    let ccdf_path = out.join("strength_ccdf.csv");
    meta::write_csv(
        &ccdf_path,
        meta,
        "w,fraction_ge",
        dist.ccdf.iter().map(|(w, f)| format!("{w},{f}")),
    )
    .map_err(write_err(&ccdf_path))?;

    #[derive(Serialize)]
    struct FitSummary {
        powerlaw_slope: f64,
        powerlaw_r2: f64,
        n_distinct_strengths: usize,
        n_entries: u64,
        max_strength: u32,
        median_strength: f64,
    }
    let fit_path = out.join("strength_fit.json");
    meta::write_json_document(
        &fit_path,
        meta,
        &FitSummary {
            powerlaw_slope: dist.powerlaw_slope,
            powerlaw_r2: dist.powerlaw_r2,
            n_distinct_strengths: dist.ccdf.len(),
            n_entries: dist.total_entries(),
            max_strength: dist.max_strength(),
            median_strength: dist.median_strength(),
        },
    )
    .map_err(write_err(&fit_path))?;
    println!(
        "analyze: strength distribution ({} entries, slope {:.3}, r2 {:.3})",
        dist.total_entries(),
        dist.powerlaw_slope,
        dist.powerlaw_r2
    );

    match &result.grooming_event_log {
        Some(log) if !log.is_empty() => {
            let profile = strategy_profile(log)
                .map_err(|e| CliError::Usage(format!("strategy profile: {e}")))?;
            let path = out.join("strategy_profile.csv");
            meta::write_csv(
                &path,
                meta,
                "w,p25,p50,p75,n_exposures",
                profile.iter().map(|p| {
                    format!("{},{},{},{},{}", p.w, p.p25, p.p50, p.p75, p.n_exposures)
                }),
            )
            .map_err(write_err(&path))?;
            println!("analyze: strategy profile ({} strength values)", profile.len());
        }
        _ => {
            eprintln!(
                "note: result has no grooming event log (re-run with --capture-event-log); \
                 skipping strategy profile"
            );
        }
    }
    Ok(())
}

fn analyze_sweep(
    results: &[groomsim::sweep::SweepCellResult],
    out: &Path,
    meta: &FileMeta,
) -> Result<(), CliError> {
    let freq_path = out.join("trend_frequencies.csv");
    let rows = trend_frequencies(results);
    meta::write_csv(
        &freq_path,
        meta,
        "r_g,r_c,m,n_replicates,trend1,trend2,trend3,trend4",
        rows.iter().map(|r| {
            format!(
                "{},{},{},{},{},{},{},{}",
                r.r_g, r.r_c, r.m, r.n_replicates, r.trend1, r.trend2, r.trend3, r.trend4
            )
        }),
    )
    .map_err(write_err(&freq_path))?;

    let r_g_values: BTreeSet<u32> = results.iter().map(|r| r.r_g).collect();
    for r_g in r_g_values {
        let rows = transition_curve(results, r_g);
        let path = out.join(format!("transition_rg{r_g}.csv"));
        meta::write_csv(
            &path,
            meta,
            "log_rc_over_m,r_c,m,median_q,n_replicates",
            rows.iter().map(|r| {
                format!("{},{},{},{},{}", r.log_rc_over_m, r.r_c, r.m, r.median_q, r.n_replicates)
            }),
        )
        .map_err(write_err(&path))?;
    }
    println!("analyze: {} sweep rows -> trend frequencies + transition curves", results.len());
    Ok(())
}
