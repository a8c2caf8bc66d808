//! Deterministic, seedable simulator of the evolution of social grooming
//! strategies `(s, q)` in a two-stage game.
//!
//! Groomers build relationships with groomees during a grooming stage,
//! driven by a beta-shaped partner-selection kernel ([`kernel`]) over
//! normalized relationship strengths; groomees then cooperate with their
//! top-ranked groomers, and those cooperation counts drive
//! fitness-proportional reproduction with Gaussian mutation
//! ([`evolution`]). A sweep harness ([`sweep`]) runs parameter grids with
//! replicates and durable checkpoints, and [`analysis`] classifies
//! outcomes into four evolutionary trends, estimates selection-gradient
//! fields and orbits, and summarizes relationship-strength distributions.
//!
//! All randomness flows from per-simulation ChaCha8 streams seeded by a
//! `u64`, with a documented draw order (see [`evolution`]), so every
//! artifact is reproducible bit-for-bit from `(config, seed)`.

pub mod analysis;
pub mod evolution;
pub mod kernel;
pub mod meta;
pub mod model;
mod seedmix;
pub mod sweep;

pub use analysis::{classify_trend, TrendLabel};
pub use evolution::{run_simulation, SimRng, SimulationResult};
pub use model::{Environment, Strategy};
pub use sweep::{run_sweep, SweepSpec};
