//! Forward predictions: payload-vs-nominal curves, the (N, 1−α) efficiency
//! surface, HPL/HPCG gain ratios and snapshot-to-snapshot validation.
//!
//! Every prediction here extrapolates from a single snapshot and is
//! optimistic; reports carry an `extrapolation` flag to say so.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ingest::{DerivedRecord, SystemSnapshot};
use crate::model::{
    efficiency, efficiency_with_sequential, payload_performance, saturation_limit, AlphaEstimate,
    Looping, SystemConfig,
};

/// Published range of the HPL-to-HPCG efficiency ratio at equal core count.
pub const PUBLISHED_GAIN_RATIO_BAND: (f64, f64) = (200.0, 500.0);

/// Relative change in per-core peak treated as a hardware change between stages.
const HARDWARE_CHANGE_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Order {
    FirstOrder,
    /// Sequential fraction grows with N by the given looping term.
    SecondOrder(Looping),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvePoint {
    pub n: u64,
    pub nominal: f64,
    pub payload: f64,
    pub efficiency: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PredictionCurve {
    pub alpha: AlphaEstimate,
    pub p_single: f64,
    pub order: Order,
    pub points: Vec<CurvePoint>,
}

impl PredictionCurve {
    /// First-order saturation level `p_single / (1 − α)`.
    pub fn saturation(&self) -> f64 {
        saturation_limit(self.p_single, &self.alpha)
    }

    pub fn peak_index(&self) -> Option<usize> {
        self.points
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.payload.total_cmp(&b.1.payload))
            .map(|(i, _)| i)
    }
}

fn check_ascending(n_values: &[u64]) -> Result<()> {
    if n_values.is_empty() {
        return Err(Error::InvalidParameter("n range is empty".into()));
    }
    if n_values[0] < 1 {
        return Err(Error::InvalidParameter("n values must be >= 1".into()));
    }
    if n_values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter(
            "n values must be strictly ascending".into(),
        ));
    }
    Ok(())
}

/// Payload performance over `n_values` for a unit of peak `p_single`.
pub fn curve(
    alpha: &AlphaEstimate,
    p_single: f64,
    n_values: &[u64],
    order: Order,
) -> Result<PredictionCurve> {
    check_ascending(n_values)?;
    if !(p_single > 0.0 && p_single.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "single-unit performance must be > 0, got {p_single}"
        )));
    }
    if let Order::SecondOrder(l) = order {
        if !(l.lambda() >= 0.0 && l.lambda().is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "looping coefficient must be >= 0, got {}",
                l.lambda()
            )));
        }
    }
    let points = n_values
        .iter()
        .map(|&n| {
            let cfg = SystemConfig {
                n,
                p_single,
                clock_hz: 1.0,
            };
            let (eff, payload) = match order {
                Order::FirstOrder => (efficiency(alpha, n), payload_performance(&cfg, alpha)),
                Order::SecondOrder(looping) => {
                    let e =
                        efficiency_with_sequential(alpha.one_minus_alpha() + looping.growth(n), n);
                    (e, e * cfg.nominal())
                }
            };
            CurvePoint {
                n,
                nominal: cfg.nominal(),
                payload,
                efficiency: eff,
            }
        })
        .collect();
    Ok(PredictionCurve {
        alpha: *alpha,
        p_single,
        order,
        points,
    })
}

/// `points` log-spaced unit counts from `lo` to `hi` inclusive, rounded and de-duplicated.
pub fn log_grid(lo: u64, hi: u64, points: usize) -> Result<Vec<u64>> {
    if lo < 1 || hi < lo || points == 0 {
        return Err(Error::InvalidParameter(format!(
            "bad grid {lo}:{hi}:{points}"
        )));
    }
    let mut out: Vec<u64> = log_space(lo as f64, hi as f64, points)?
        .into_iter()
        .map(|x| x.round() as u64)
        .collect();
    out.dedup();
    Ok(out)
}

/// `points` log-spaced values from `lo` to `hi` inclusive.
pub fn log_space(lo: f64, hi: f64, points: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi >= lo && hi.is_finite()) || points == 0 {
        return Err(Error::InvalidParameter(format!(
            "bad log range {lo}:{hi}:{points}"
        )));
    }
    if points == 1 {
        return Ok(vec![lo]);
    }
    let (a, b) = (lo.ln(), hi.ln());
    let step = (b - a) / (points - 1) as f64;
    Ok((0..points)
        .map(|i| {
            if i == points - 1 {
                hi
            } else if i == 0 {
                lo
            } else {
                (a + step * i as f64).exp()
            }
        })
        .collect())
}

/// Efficiency over a grid of unit counts and sequential fractions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SurfaceGrid {
    pub n_axis: Vec<u64>,
    pub one_minus_alpha_axis: Vec<f64>,
    /// `values[i][j]` is the efficiency at `one_minus_alpha_axis[i]`, `n_axis[j]`.
    pub values: Vec<Vec<f64>>,
}

pub fn surface(n_axis: &[u64], one_minus_alpha_axis: &[f64]) -> Result<SurfaceGrid> {
    if n_axis.is_empty() || one_minus_alpha_axis.is_empty() {
        return Err(Error::InvalidParameter(
            "surface axes must be non-empty".into(),
        ));
    }
    if n_axis.contains(&0) {
        return Err(Error::InvalidParameter("n axis must be positive".into()));
    }
    let alphas = one_minus_alpha_axis
        .iter()
        .map(|&x| {
            if x > 0.0 {
                AlphaEstimate::assumed(x)
            } else {
                Err(Error::InvalidParameter(format!(
                    "1 - alpha axis must be positive, got {x}"
                )))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let values = alphas
        .iter()
        .map(|a| n_axis.iter().map(|&n| efficiency(a, n)).collect())
        .collect();
    Ok(SurfaceGrid {
        n_axis: n_axis.to_vec(),
        one_minus_alpha_axis: one_minus_alpha_axis.to_vec(),
        values,
    })
}

/// HPL efficiency over HPCG efficiency at the same unit count.
pub fn gain_ratio(alpha_hpl: &AlphaEstimate, alpha_hpcg: &AlphaEstimate, n: u64) -> f64 {
    efficiency(alpha_hpl, n) / efficiency(alpha_hpcg, n)
}

pub fn within_published_band(ratio: f64) -> bool {
    let (lo, hi) = PUBLISHED_GAIN_RATIO_BAND;
    (lo..=hi).contains(&ratio)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub predicted_payload: f64,
    pub measured_payload: f64,
    /// `(predicted − measured) / measured`.
    pub relative_error: f64,
    pub predicted_efficiency: f64,
    pub measured_efficiency: f64,
    pub extrapolation: bool,
    pub warnings: Vec<String>,
}

/// Predicts `later`'s payload performance from `prior`'s α and compares.
pub fn validate_successor(
    prior: &DerivedRecord,
    later: &SystemSnapshot,
) -> Result<ValidationReport> {
    let alpha = prior.alpha.ok_or_else(|| {
        Error::DegenerateInstance(format!(
            "prior record '{}' {} has no alpha",
            prior.snapshot.name, prior.snapshot.epoch
        ))
    })?;
    if later.cores_used < 2 {
        return Err(Error::DegenerateInstance(format!(
            "later record '{}' uses {} core(s)",
            later.name, later.cores_used
        )));
    }
    let cfg = SystemConfig::new(
        later.cores_used,
        later.p_single(),
        later.clock_hz.unwrap_or(1.0),
    )?;
    let predicted_payload = payload_performance(&cfg, &alpha);
    let measured_payload = later.r_max;

    let mut warnings = Vec::new();
    if prior.snapshot.name != later.name {
        warnings.push(format!(
            "machine names differ: '{}' vs '{}'",
            prior.snapshot.name, later.name
        ));
    }
    if prior.snapshot.workload != later.workload {
        warnings.push(format!(
            "workloads differ: {} vs {}",
            prior.snapshot.workload, later.workload
        ));
    }
    let p_prior = prior.snapshot.p_single();
    if ((later.p_single() - p_prior) / p_prior).abs() > HARDWARE_CHANGE_TOLERANCE {
        warnings.push(format!(
            "per-core peak changed from {:e} to {:e} flop/s: hardware change, prediction not comparable",
            p_prior,
            later.p_single()
        ));
    }

    Ok(ValidationReport {
        predicted_payload,
        measured_payload,
        relative_error: (predicted_payload - measured_payload) / measured_payload,
        predicted_efficiency: efficiency(&alpha, later.cores_used),
        measured_efficiency: later.efficiency(),
        extrapolation: true,
        warnings,
    })
}
