//! Deterministic cycle-level timeline of one coordinator driving `n` units.
//!
//! Each iteration runs three sequential phases at the coordinator:
//!
//! 1. dispatch: unit `i` (1-based) starts at `ceil(i · d_eff)` cycles;
//! 2. payload: every unit works `payload_cycles` once started;
//! 3. join: once the last unit has finished, results are collected one
//!    unit at a time, `join_cycles` each.
//!
//! The coordinator then spends `per_iteration_seq_cycles` preparing the next
//! iteration. If a period floor is set, an iteration never ends earlier than
//! the floor (a fixed synchronization clock).
//!
//! `d_eff = dispatch_cycles · (1 + g(n))`, where `g` is the configured
//! [`Looping`] growth term.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{alpha_from_speedup, AlphaEstimate, Looping};

/// Cycles in a 1 ms synchronization period at 1 GHz.
pub const BIOLOGY_CLOCK_CYCLES: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub n: u64,
    pub dispatch_cycles: u64,
    pub join_cycles: u64,
    pub payload_cycles: u64,
    #[serde(default = "one")]
    pub iterations: u64,
    #[serde(default)]
    pub per_iteration_seq_cycles: u64,
    #[serde(default)]
    pub period_floor_cycles: Option<u64>,
    #[serde(default)]
    pub looping: Looping,
}

fn one() -> u64 {
    1
}

impl SimConfig {
    /// Single-iteration fork/join with constant dispatch cost.
    pub fn fork_join(n: u64, dispatch: u64, join: u64, payload: u64) -> Self {
        Self {
            n,
            dispatch_cycles: dispatch,
            join_cycles: join,
            payload_cycles: payload,
            iterations: 1,
            per_iteration_seq_cycles: 0,
            period_floor_cycles: None,
            looping: Looping::Constant,
        }
    }

    pub fn with_units(mut self, n: u64) -> Self {
        self.n = n;
        self
    }

    pub fn with_looping(mut self, looping: Looping) -> Self {
        self.looping = looping;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 1 {
            return Err(Error::InvalidParameter("simulation needs n >= 1".into()));
        }
        if self.iterations < 1 {
            return Err(Error::InvalidParameter(
                "simulation needs at least one iteration".into(),
            ));
        }
        let lambda = self.looping.lambda();
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "looping coefficient must be >= 0, got {lambda}"
            )));
        }
        Ok(())
    }

    /// Effective per-unit dispatch cost at this config's `n`, in fractional cycles.
    pub fn effective_dispatch(&self) -> f64 {
        self.dispatch_cycles as f64 * (1.0 + self.looping.growth(self.n))
    }

    /// First-order sequential fraction implied by the per-unit overheads,
    /// `(d + j) / w`, valid when the coordinator phases are small against the payload.
    pub fn first_order_one_minus_alpha(&self) -> f64 {
        (self.dispatch_cycles + self.join_cycles) as f64 / self.payload_cycles as f64
    }

    /// The looping form expressed as growth of the analytic sequential
    /// fraction: the simulator's `λ` scaled by `d / w`.
    pub fn analytic_looping(&self) -> Looping {
        let scale = self.dispatch_cycles as f64 / self.payload_cycles as f64;
        match self.looping {
            Looping::Constant => Looping::Constant,
            Looping::LinearInN(l) => Looping::LinearInN(l * scale),
            Looping::LogInN(l) => Looping::LogInN(l * scale),
        }
    }
}

/// Result of one simulated run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimOutcome {
    pub n: u64,
    pub total_cycles: u64,
    /// Cycles the same work takes on a single unit.
    pub reference_cycles: u64,
    pub speedup: f64,
    /// `None` when α is undefined (n < 2) or the run is slower than one unit.
    pub alpha_eff: Option<AlphaEstimate>,
    pub payload_cycles: u64,
    pub overhead_cycles: u64,
    pub idle_cycles: u64,
    pub payload_fraction: f64,
    pub overhead_fraction: f64,
    pub idle_fraction: f64,
}

impl SimOutcome {
    /// Payload work delivered per cycle; a single busy unit delivers 1.
    pub fn payload_rate(&self) -> f64 {
        self.payload_cycles as f64 / self.total_cycles as f64
    }

    pub fn one_minus_alpha_eff(&self) -> Option<f64> {
        self.alpha_eff.map(|a| a.one_minus_alpha())
    }
}

/// Runs the timeline for `cfg`.
pub fn simulate(cfg: &SimConfig) -> Result<SimOutcome> {
    cfg.validate()?;
    let n = cfg.n;
    let d_eff = cfg.effective_dispatch();
    let w = cfg.payload_cycles;

    let mut clock: u64 = 0;
    let mut overhead: u64 = 0;
    for _ in 0..cfg.iterations {
        let iteration_start = clock;

        // Dispatch: the coordinator addresses one unit at a time.
        let mut last_finish = iteration_start;
        let mut dispatch_end = iteration_start;
        for i in 1..=n {
            let start = iteration_start + (i as f64 * d_eff).ceil() as u64;
            dispatch_end = start;
            last_finish = last_finish.max(start + w);
        }
        overhead += dispatch_end - iteration_start;

        // Join: collected one by one after the last unit is done.
        let mut t = last_finish;
        for _ in 0..n {
            t += cfg.join_cycles;
        }
        overhead += t - last_finish;

        t += cfg.per_iteration_seq_cycles;
        overhead += cfg.per_iteration_seq_cycles;

        let elapsed = t - iteration_start;
        clock = iteration_start + cfg.period_floor_cycles.map_or(elapsed, |f| elapsed.max(f));
    }

    let total = clock;
    let payload = n * w * cfg.iterations;
    let reference = payload + cfg.iterations * cfg.per_iteration_seq_cycles;
    let capacity = n * total;
    let idle = capacity.saturating_sub(payload + overhead);
    let speedup = if total == 0 {
        1.0
    } else {
        reference as f64 / total as f64
    };
    let alpha_eff = if n >= 2 && total > 0 {
        alpha_from_speedup(speedup, n).ok()
    } else {
        None
    };
    let frac = |x: u64| {
        if capacity == 0 {
            0.0
        } else {
            x as f64 / capacity as f64
        }
    };
    Ok(SimOutcome {
        n,
        total_cycles: total,
        reference_cycles: reference,
        speedup,
        alpha_eff,
        payload_cycles: payload,
        overhead_cycles: overhead,
        idle_cycles: idle,
        payload_fraction: frac(payload),
        overhead_fraction: frac(overhead),
        idle_fraction: frac(idle),
    })
}

/// Simulates `template` at every unit count in `n_values` (ascending).
pub fn sweep_n(template: &SimConfig, n_values: &[u64]) -> Result<Vec<(u64, SimOutcome)>> {
    if n_values.is_empty() {
        return Err(Error::InvalidParameter("sweep needs at least one n".into()));
    }
    if n_values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter(
            "sweep n values must be strictly ascending".into(),
        ));
    }
    n_values
        .par_iter()
        .map(|&n| simulate(&template.with_units(n)).map(|o| (n, o)))
        .collect()
}

/// Index of the sweep point with the highest payload rate.
pub fn peak_index(sweep: &[(u64, SimOutcome)]) -> Option<usize> {
    sweep
        .iter()
        .enumerate()
        .max_by(|a, b| a.1 .1.payload_rate().total_cmp(&b.1 .1.payload_rate()))
        .map(|(i, _)| i)
}

/// Long single-shot run with little coordination: HPL-like.
pub fn hpl_preset() -> SimConfig {
    SimConfig::fork_join(1, 1, 1, 10_000_000)
}

/// Many short iterations with coordinator work in between: HPCG-like.
pub fn hpcg_preset() -> SimConfig {
    SimConfig {
        iterations: 100,
        per_iteration_seq_cycles: 1_000,
        ..SimConfig::fork_join(1, 1, 1, 10_000)
    }
}

/// Brain-simulation-like: tiny payload per step, locked to a 1 ms period at 1 GHz.
pub fn brain_preset() -> SimConfig {
    SimConfig {
        iterations: 100,
        period_floor_cycles: Some(BIOLOGY_CLOCK_CYCLES),
        ..SimConfig::fork_join(1, 1, 1, 100)
    }
}
