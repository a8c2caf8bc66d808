//! Scratch harness: run the four anchor cells and report trend counts.

use groomsim::analysis::classify_trend;
use groomsim::model::Environment;
use groomsim::sweep::derive_seed;
use rayon::prelude::*;
use std::time::Instant;

fn main() {
    let seeds: Vec<u32> = (0..10).collect();
    for (r_c, m) in [(5u32, 5u32), (15, 45), (5, 200), (50, 200)] {
        let start = Instant::now();
        let outcomes: Vec<(f64, f64)> = seeds
            .par_iter()
            .map(|&rep| {
                let env = Environment::new(100, m, r_c, 300, 200).unwrap();
                let seed = derive_seed(0, r_c, m, 300, rep);
                let sim = groomsim::run_simulation(&env, seed);
                (sim.final_population.median_s(), sim.final_population.median_q())
            })
            .collect();
        let mut counts = [0u32; 4];
        for &(s, q) in &outcomes {
            let t = classify_trend(s, q).unwrap();
            counts[match t {
                groomsim::TrendLabel::Trend1 => 0,
                groomsim::TrendLabel::Trend2 => 1,
                groomsim::TrendLabel::Trend3 => 2,
                groomsim::TrendLabel::Trend4 => 3,
            }] += 1;
        }
        println!(
            "(R_c={r_c:2}, M={m:3}): trends {:?}  elapsed {:.1?}",
            counts,
            start.elapsed()
        );
        for (i, &(s, q)) in outcomes.iter().enumerate() {
            println!("   rep{i}: s={s:+.3} q={q:.3}");
        }
    }
}
