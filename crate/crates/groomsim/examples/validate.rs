//! Scratch harness for the remaining qualitative checks.

use groomsim::analysis::{
    agos_cell, classify_trend, integrate_orbit, strength_distribution, TrendLabel,
    AGOS_SAMPLE_SIGMA,
};
use groomsim::evolution::SimRng;
use groomsim::model::Environment;
use groomsim::sweep::derive_seed;
use rand::SeedableRng;
use rayon::prelude::*;
use std::time::Instant;

fn env(r_c: u32, m: u32, r_g: u32) -> Environment {
    Environment::new(100, m, r_c, r_g, 200).unwrap()
}

fn main() {
    // --- AGoS signs at (s, q) = (0, 0.5), 30 replicates ---
    for (r_c, m) in [(5u32, 5u32), (50, 200), (15, 45), (5, 200)] {
        let t = Instant::now();
        let e = Environment::new(100, m, r_c, 300, 1).unwrap();
        let mut rng = SimRng::seed_from_u64(1000 + u64::from(r_c) * 1000 + u64::from(m));
        let cell = agos_cell(0.0, 0.5, &e, 30, AGOS_SAMPLE_SIGMA, &mut rng);
        println!(
            "AGoS ({r_c},{m}) @ (0,0.5): ds={:+.4} dq={:+.4}  [{:.1?}]",
            cell.ds,
            cell.dq,
            t.elapsed()
        );
    }

    // --- AGoS magnitude comparison at (5,200): |ds| for s<-1 vs s>0 ---
    {
        let e = Environment::new(100, 200, 5, 300, 1).unwrap();
        let pts_neg: Vec<f64> = vec![-4.0, -3.0, -2.0, -1.5];
        let pts_pos: Vec<f64> = vec![0.5, 1.0, 1.5, 2.0];
        let q = 0.3;
        let grab = |s: f64| {
            let mut rng = SimRng::seed_from_u64((s * 10.0) as i64 as u64 ^ 0xabcd);
            agos_cell(s, q, &e, 10, AGOS_SAMPLE_SIGMA, &mut rng).ds
        };
        let neg: Vec<f64> = pts_neg.iter().map(|&s| grab(s)).collect();
        let pos: Vec<f64> = pts_pos.iter().map(|&s| grab(s)).collect();
        println!("(5,200) |ds| at s<-1: {neg:?}");
        println!("(5,200) |ds| at s>0:  {pos:?}");
    }

    // --- Strength distribution at the Trend2 anchor (15,45) and Trend3 (5,200) ---
    for (r_c, m) in [(15u32, 45u32), (5, 200)] {
        let t = Instant::now();
        let stats: Vec<(f64, f64, bool)> = (0..10u32)
            .into_par_iter()
            .map(|rep| {
                let e = env(r_c, m, 300);
                let sim = groomsim::run_simulation(&e, derive_seed(7, r_c, m, 300, rep));
                let d = strength_distribution(&sim.final_w).unwrap();
                let ratio = f64::from(d.max_strength()) / d.median_strength();
                (d.powerlaw_r2, ratio, d.powerlaw_r2 >= 0.85 && ratio >= 5.0)
            })
            .collect();
        let passes = stats.iter().filter(|s| s.2).count();
        println!("distribution ({r_c},{m}): pass {passes}/10  [{:.1?}]", t.elapsed());
        for (r2, ratio, _) in &stats {
            print!(" (r2={r2:.3},mx/md={ratio:.1})");
        }
        println!();
    }

    // --- R_g shift: largest M with Trend2/3 majority at R_c=5 ---
    for r_g in [100u32, 300] {
        let t = Instant::now();
        for m in [50u32, 100, 150, 200] {
            let trends: Vec<TrendLabel> = (0..10u32)
                .into_par_iter()
                .map(|rep| {
                    let e = env(5, m, r_g);
                    let sim = groomsim::run_simulation(&e, derive_seed(11, 5, m, r_g, rep));
                    classify_trend(
                        sim.final_population.median_s(),
                        sim.final_population.median_q(),
                    )
                    .unwrap()
                })
                .collect();
            let t23 = trends
                .iter()
                .filter(|t| matches!(t, TrendLabel::Trend2 | TrendLabel::Trend3))
                .count();
            println!("R_g={r_g} M={m}: trend2/3 {t23}/10");
        }
        println!("  [{:.1?}]", t.elapsed());
    }

    // --- Orbits from (0, 0.5) at (5,5) ---
    {
        let t = Instant::now();
        let e = Environment::new(100, 5, 5, 300, 1).unwrap();
        let finals: Vec<(f64, f64)> = (0..10u64)
            .into_par_iter()
            .map(|seed| {
                let mut rng = SimRng::seed_from_u64(seed);
                let traj = integrate_orbit((0.0, 0.5), &e, 200, 0.01, 5, &mut rng);
                *traj.last().unwrap()
            })
            .collect();
        let good = finals.iter().filter(|&&(s, q)| s > 1.0 && q < 0.3).count();
        println!("orbit (5,5) from (0,0.5): {good}/10 end with s>1, q<0.3  [{:.1?}]", t.elapsed());
        println!("  finals: {finals:?}");
    }
}
