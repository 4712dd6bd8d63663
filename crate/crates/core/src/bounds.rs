//! Lower bounds on the sequential fraction `1 − α`, each computed as if a
//! single limiting factor acted alone.
//!
//! A bound is the number of clock cycles that cannot be parallelized divided
//! by the number of cycles in the measurement window, so every bound depends
//! on how long the benchmark ran.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{AlphaEstimate, AlphaSource, ContributionLabel, ContributionSet};

/// Signal speed used for cable round trips, m/s (vacuum; refractive index ignored).
pub const SPEED_OF_LIGHT_M_PER_S: f64 = 2.998e8;

/// Published whole-figure estimate of the OS fork/join limit on a zero-sized
/// machine. Kept for reference; `os_bound` derives its own value.
pub const PUBLISHED_OS_LIMIT: f64 = 5e-8;

/// Typical interconnect latency range, seconds.
pub const NETWORK_LATENCY_S: (f64, f64) = (100e-9, 200e-9);

/// Typical processor-to-processor message time, seconds.
pub const MESSAGE_TIME_S: f64 = 500e-9;

/// Typical context switch cost, cycles.
pub const CONTEXT_SWITCH_CYCLES: u64 = 20_000;

/// Admissible memory-access scaling factors.
pub const ACCESS_FACTOR_RANGE: (f64, f64) = (1.0, 100.0);

/// The period over which a benchmark is timed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeasurementWindow {
    duration_s: f64,
    clock_hz: f64,
}

impl MeasurementWindow {
    pub fn new(duration_s: f64, clock_hz: f64) -> Result<Self> {
        if !(duration_s > 0.0 && duration_s.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "window duration must be > 0 s, got {duration_s}"
            )));
        }
        if !(clock_hz > 0.0 && clock_hz.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "clock must be > 0 Hz, got {clock_hz}"
            )));
        }
        if duration_s * clock_hz < 1.0 {
            return Err(Error::InvalidParameter(
                "measurement window is shorter than one clock cycle".into(),
            ));
        }
        Ok(Self {
            duration_s,
            clock_hz,
        })
    }

    pub fn duration_s(&self) -> f64 {
        self.duration_s
    }

    pub fn clock_hz(&self) -> f64 {
        self.clock_hz
    }

    pub fn total_cycles(&self) -> f64 {
        self.duration_s * self.clock_hz
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BoundKind {
    ClockQuantum,
    Propagation,
    Addressing,
    OsContextSwitch,
    InstructionAccess,
}

impl BoundKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            BoundKind::ClockQuantum => "clock_quantum",
            BoundKind::Propagation => "propagation",
            BoundKind::Addressing => "addressing",
            BoundKind::OsContextSwitch => "os_context_switch",
            BoundKind::InstructionAccess => "instruction_access",
        }
    }

    pub fn contribution_label(&self) -> ContributionLabel {
        match self {
            BoundKind::ClockQuantum => ContributionLabel::Other,
            BoundKind::Propagation => ContributionLabel::Propagation,
            BoundKind::Addressing => ContributionLabel::Addressing,
            BoundKind::OsContextSwitch => ContributionLabel::OS,
            BoundKind::InstructionAccess => ContributionLabel::Compute,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundResult {
    pub kind: BoundKind,
    pub sequential_cycles: u64,
    pub window: MeasurementWindow,
    pub one_minus_alpha_bound: f64,
    /// `1 / one_minus_alpha_bound`; infinite when nothing is sequential.
    pub max_gain: f64,
}

impl BoundResult {
    fn new(kind: BoundKind, sequential_cycles: u64, window: MeasurementWindow) -> Self {
        let one_minus_alpha_bound = sequential_cycles as f64 / window.total_cycles();
        Self {
            kind,
            sequential_cycles,
            window,
            one_minus_alpha_bound,
            max_gain: 1.0 / one_minus_alpha_bound,
        }
    }

    /// The bound read as an assumed α, e.g. to draw a reference prediction curve.
    pub fn as_alpha(&self) -> Result<AlphaEstimate> {
        AlphaEstimate::from_one_minus_alpha(
            self.one_minus_alpha_bound.min(1.0),
            AlphaSource::Assumed,
        )
    }
}

/// Fork plus join: two clock periods is the irreducible sequential part.
pub fn clock_quantum_bound(w: &MeasurementWindow) -> BoundResult {
    BoundResult::new(BoundKind::ClockQuantum, 2, *w)
}

/// Signal round trip over a cable of `distance_m`, rounded up to whole cycles.
pub fn propagation_bound(distance_m: f64, w: &MeasurementWindow) -> Result<BoundResult> {
    if !(distance_m > 0.0 && distance_m.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "distance must be > 0 m, got {distance_m}"
        )));
    }
    let round_trip_s = 2.0 * distance_m / SPEED_OF_LIGHT_M_PER_S;
    let cycles = (round_trip_s * w.clock_hz()).ceil().max(1.0) as u64;
    Ok(BoundResult::new(BoundKind::Propagation, cycles, *w))
}

/// One addressing step per unit (or per cluster head when clustered).
pub fn addressing_bound(n: u64, cluster_factor: f64, w: &MeasurementWindow) -> Result<BoundResult> {
    if n < 1 {
        return Err(Error::InvalidParameter("unit count must be >= 1".into()));
    }
    if !(cluster_factor >= 1.0 && cluster_factor <= n as f64) {
        return Err(Error::InvalidClustering {
            factor: cluster_factor,
            units: n,
        });
    }
    let cycles = (n as f64 / cluster_factor).ceil() as u64;
    Ok(BoundResult::new(BoundKind::Addressing, cycles, *w))
}

/// Fork and join each pay one context switch.
pub fn os_bound(context_switch_cycles: u64, w: &MeasurementWindow) -> BoundResult {
    BoundResult::new(BoundKind::OsContextSwitch, 2 * context_switch_cycles, *w)
}

/// Scales a bound for instruction access slower than one cycle (cache ≈5×, far memory ≈100×).
pub fn access_scaling(bound: &BoundResult, access_factor: f64) -> Result<BoundResult> {
    let (lo, hi) = ACCESS_FACTOR_RANGE;
    if !(lo..=hi).contains(&access_factor) {
        return Err(Error::OutOfModelRange(format!(
            "access factor {access_factor} outside [{lo}, {hi}]"
        )));
    }
    if access_factor == 1.0 {
        return Ok(*bound);
    }
    let cycles = (bound.sequential_cycles as f64 * access_factor).ceil() as u64;
    Ok(BoundResult::new(
        BoundKind::InstructionAccess,
        cycles,
        bound.window,
    ))
}

/// Sums bounds measured on one window into a contribution set.
pub fn contributions_from_bounds(bounds: &[BoundResult]) -> Result<ContributionSet> {
    let mut set = ContributionSet::new();
    if let Some(first) = bounds.first() {
        if bounds.iter().any(|b| b.window != first.window) {
            return Err(Error::InvalidParameter(
                "bounds must share one measurement window to be combined".into(),
            ));
        }
    }
    for b in bounds {
        set.insert(b.kind.contribution_label(), b.one_minus_alpha_bound)?;
    }
    Ok(set)
}
