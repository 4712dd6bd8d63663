//! Splits the sequential time of a dual-precision benchmark pair into a fixed
//! housekeeping part `F0` and a part `F16` proportional to operand length.
//!
//! With `k` the operand-length ratio (4 for 64-bit vs 16-bit):
//!
//! ```text
//! serial:      time16 = F0 + F16            time64 = F0 + k·F16
//! time-aware:  time16² = F0² + F16²         time64² = F0² + (k·F16)²
//! ```
//!
//! Both models admit a non-negative solution exactly when
//! `time16 ≤ time64 ≤ k·time16`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{alpha_from_efficiency, AlphaEstimate};

/// 64-bit over 16-bit operand length.
pub const DEFAULT_LENGTH_RATIO: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SummingModel {
    Serial,
    TimeAware,
}

impl SummingModel {
    pub fn as_str(&self) -> &'static str {
        match self {
            SummingModel::Serial => "serial",
            SummingModel::TimeAware => "timeaware",
        }
    }
}

/// HPL efficiencies at two operand lengths on the same machine.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DualPrecisionMeasurement {
    pub eff64: f64,
    pub eff16: f64,
    pub n: u64,
    /// Measured 16-bit over 64-bit payload performance.
    pub perf_ratio: f64,
}

impl DualPrecisionMeasurement {
    pub fn new(eff64: f64, eff16: f64, n: u64, perf_ratio: f64) -> Result<Self> {
        Self::with_length_ratio(eff64, eff16, n, perf_ratio, DEFAULT_LENGTH_RATIO)
    }

    pub fn with_length_ratio(
        eff64: f64,
        eff16: f64,
        n: u64,
        perf_ratio: f64,
        length_ratio: f64,
    ) -> Result<Self> {
        for (name, e) in [("eff64", eff64), ("eff16", eff16)] {
            if !(e > 0.0 && e <= 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must lie in (0, 1], got {e}"
                )));
            }
        }
        if !(1.0..=length_ratio).contains(&perf_ratio) {
            return Err(Error::OutOfModelRange(format!(
                "performance ratio {perf_ratio} outside [1, {length_ratio}]"
            )));
        }
        Ok(Self {
            eff64,
            eff16,
            n,
            perf_ratio,
        })
    }
}

/// Sequential fractions and the derived times on a common time scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeasuredTimes {
    pub one_minus_alpha64: f64,
    pub one_minus_alpha16: f64,
    pub time64: f64,
    pub time16: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecompositionResult {
    pub time64: f64,
    pub time16: f64,
    /// Housekeeping time.
    pub f0: f64,
    /// Time for manipulating 16 bits of operand.
    pub f16: f64,
    pub model: SummingModel,
    pub length_ratio: f64,
}

/// Converts the pair of efficiencies into times on the 64-bit run's scale.
///
/// The 16-bit run finishes `perf_ratio` times sooner, so its sequential
/// fraction is divided by that ratio.
pub fn times_from_measurement(m: &DualPrecisionMeasurement) -> Result<MeasuredTimes> {
    if m.n < 2 {
        return Err(Error::DegenerateInstance(format!(
            "need at least 2 units, got {}",
            m.n
        )));
    }
    let a64 = alpha_from_efficiency(m.eff64, m.n)?.one_minus_alpha();
    let a16 = alpha_from_efficiency(m.eff16, m.n)?.one_minus_alpha();
    Ok(MeasuredTimes {
        one_minus_alpha64: a64,
        one_minus_alpha16: a16,
        time64: a64,
        time16: a16 / m.perf_ratio,
    })
}

fn check_band(time16: f64, time64: f64, k: f64) -> Result<()> {
    if !(time16.is_finite() && time64.is_finite()) || time16 < 0.0 || time64 < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "times must be finite and non-negative, got ({time16}, {time64})"
        )));
    }
    if !(k > 1.0 && k.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "length ratio must be > 1, got {k}"
        )));
    }
    if time64 < time16 {
        return Err(Error::InvertedTimes { time16, time64 });
    }
    if time64 > k * time16 {
        return Err(Error::NegativeHousekeeping {
            time16,
            time64,
            ratio: k,
        });
    }
    Ok(())
}

pub fn decompose(
    model: SummingModel,
    time16: f64,
    time64: f64,
    length_ratio: f64,
) -> Result<DecompositionResult> {
    check_band(time16, time64, length_ratio)?;
    let k = length_ratio;
    let (f0, f16) = match model {
        SummingModel::Serial => {
            let f16 = (time64 - time16) / (k - 1.0);
            ((time16 - f16).max(0.0), f16)
        }
        SummingModel::TimeAware => {
            let f16 = ((time64 * time64 - time16 * time16) / (k * k - 1.0)).sqrt();
            ((time16 * time16 - f16 * f16).max(0.0).sqrt(), f16)
        }
    };
    Ok(DecompositionResult {
        time64,
        time16,
        f0,
        f16,
        model,
        length_ratio,
    })
}

pub fn decompose_serial(time16: f64, time64: f64) -> Result<DecompositionResult> {
    decompose(SummingModel::Serial, time16, time64, DEFAULT_LENGTH_RATIO)
}

pub fn decompose_timeaware(time16: f64, time64: f64) -> Result<DecompositionResult> {
    decompose(
        SummingModel::TimeAware,
        time16,
        time64,
        DEFAULT_LENGTH_RATIO,
    )
}

/// Rebuilds `(time16, time64)` from `(f0, f16)` under the given model.
pub fn compose(model: SummingModel, f0: f64, f16: f64, length_ratio: f64) -> (f64, f64) {
    let k = length_ratio;
    match model {
        SummingModel::Serial => (f0 + f16, f0 + k * f16),
        SummingModel::TimeAware => (
            (f0 * f0 + f16 * f16).sqrt(),
            (f0 * f0 + k * k * f16 * f16).sqrt(),
        ),
    }
}

/// `time64 / time16` as implied by the decomposition; equals the length ratio iff `F0 = 0`.
pub fn expected_perf_ratio(d: &DecompositionResult) -> f64 {
    let (t16, t64) = compose(d.model, d.f0, d.f16, d.length_ratio);
    t64 / t16
}

/// Effective parallelism of a run that performs the bookkeeping of a
/// floating workload but (almost) no floating operations.
pub fn fp0_alpha(e_ops: f64, nominal: f64, n: u64) -> Result<AlphaEstimate> {
    if !(e_ops > 0.0 && e_ops <= nominal) {
        return Err(Error::InconsistentMeasurement(format!(
            "achieved rate {e_ops:e} must lie in (0, nominal {nominal:e}]"
        )));
    }
    alpha_from_efficiency(e_ops / nominal, n)
}
