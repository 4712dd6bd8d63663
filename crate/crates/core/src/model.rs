//! Closed-form Amdahl relations between speedup, efficiency, effective
//! parallelism and payload performance.
//!
//! All interesting values of α sit within 1e-13…1e-5 of 1, so the sequential
//! fraction `1 − α` is the stored quantity and α is derived from it. The
//! common denominator `N·(1−α) + α` is evaluated as `1 + (N−1)·(1−α)`, which
//! is algebraically identical and keeps full precision for tiny `1 − α`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Slack allowed when checking measured ratios against their admissible range.
const RANGE_SLACK: f64 = 1e-12;

/// Where an α value came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AlphaSource {
    FromEfficiency,
    FromSpeedup,
    FromContributions,
    Assumed,
}

/// Effective parallelism α, stored through its sequential fraction `1 − α`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AlphaEstimate {
    one_minus_alpha: f64,
    source: AlphaSource,
}

impl AlphaEstimate {
    pub fn from_one_minus_alpha(one_minus_alpha: f64, source: AlphaSource) -> Result<Self> {
        if !(0.0..=1.0).contains(&one_minus_alpha) {
            return Err(Error::InvalidParameter(format!(
                "1 - alpha must lie in [0, 1], got {one_minus_alpha}"
            )));
        }
        Ok(Self {
            one_minus_alpha,
            source,
        })
    }

    pub fn from_alpha(alpha: f64, source: AlphaSource) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::InvalidParameter(format!(
                "alpha must lie in [0, 1], got {alpha}"
            )));
        }
        Self::from_one_minus_alpha(1.0 - alpha, source)
    }

    /// An α taken as given rather than measured.
    pub fn assumed(one_minus_alpha: f64) -> Result<Self> {
        Self::from_one_minus_alpha(one_minus_alpha, AlphaSource::Assumed)
    }

    pub fn alpha(&self) -> f64 {
        1.0 - self.one_minus_alpha
    }

    pub fn one_minus_alpha(&self) -> f64 {
        self.one_minus_alpha
    }

    pub fn source(&self) -> AlphaSource {
        self.source
    }

    /// Upper bound on the performance gain, `1 / (1 − α)`; infinite for α = 1.
    pub fn max_gain(&self) -> f64 {
        1.0 / self.one_minus_alpha
    }
}

/// A machine of `n` identical processing units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    pub n: u64,
    /// Payload performance of one unit, flop/s.
    pub p_single: f64,
    pub clock_hz: f64,
}

impl SystemConfig {
    pub fn new(n: u64, p_single: f64, clock_hz: f64) -> Result<Self> {
        if n < 1 {
            return Err(Error::InvalidParameter("unit count must be >= 1".into()));
        }
        if !(p_single > 0.0 && p_single.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "single-unit performance must be > 0, got {p_single}"
            )));
        }
        if !(clock_hz > 0.0 && clock_hz.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "clock frequency must be > 0, got {clock_hz}"
            )));
        }
        Ok(Self {
            n,
            p_single,
            clock_hz,
        })
    }

    /// Nominal (peak) performance `N · P_single`.
    pub fn nominal(&self) -> f64 {
        self.n as f64 * self.p_single
    }
}

/// How coordinator housekeeping grows with the number of units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "form", content = "lambda", rename_all = "snake_case")]
pub enum Looping {
    #[default]
    Constant,
    LinearInN(f64),
    LogInN(f64),
}

impl Looping {
    /// Additive growth term at `n` units: 0, `λ·n` or `λ·log2(n)`.
    pub fn growth(&self, n: u64) -> f64 {
        match *self {
            Looping::Constant => 0.0,
            Looping::LinearInN(lambda) => lambda * n as f64,
            Looping::LogInN(lambda) => lambda * (n as f64).log2(),
        }
    }

    pub fn lambda(&self) -> f64 {
        match *self {
            Looping::Constant => 0.0,
            Looping::LinearInN(l) | Looping::LogInN(l) => l,
        }
    }
}

/// `E = 1 / (N·(1−α) + α)`.
pub fn efficiency(alpha: &AlphaEstimate, n: u64) -> f64 {
    efficiency_with_sequential(alpha.one_minus_alpha(), n)
}

/// Efficiency for a raw sequential fraction, which may exceed the [0, 1]
/// range of a proper α when N-dependent housekeeping is folded in.
pub(crate) fn efficiency_with_sequential(one_minus_alpha: f64, n: u64) -> f64 {
    1.0 / (1.0 + (n.max(1) - 1) as f64 * one_minus_alpha)
}

/// `S = N / (N·(1−α) + α)`, evaluated as `efficiency · N`.
pub fn speedup(alpha: &AlphaEstimate, n: u64) -> f64 {
    efficiency(alpha, n) * n as f64
}

/// Inverts the speedup relation: `α = N/(N−1) · (S−1)/S`.
pub fn alpha_from_speedup(s: f64, n: u64) -> Result<AlphaEstimate> {
    if n < 2 {
        return Err(Error::DegenerateInstance(format!(
            "alpha is undefined for {n} processing unit(s)"
        )));
    }
    let nf = n as f64;
    if !s.is_finite() || s < 1.0 - RANGE_SLACK || s > nf * (1.0 + RANGE_SLACK) {
        return Err(Error::InconsistentMeasurement(format!(
            "speedup {s} outside [1, {n}]"
        )));
    }
    // 1 − α = (N − S) / (S·(N − 1))
    let oma = ((nf - s) / (s * (nf - 1.0))).clamp(0.0, 1.0);
    AlphaEstimate::from_one_minus_alpha(oma, AlphaSource::FromSpeedup)
}

/// Inverts the efficiency relation: `α = (E·N − 1) / (E·(N−1))`.
pub fn alpha_from_efficiency(e: f64, n: u64) -> Result<AlphaEstimate> {
    if n < 2 {
        return Err(Error::DegenerateInstance(format!(
            "alpha is undefined for {n} processing unit(s)"
        )));
    }
    let nf = n as f64;
    let floor = 1.0 / nf;
    if !e.is_finite() || e < floor * (1.0 - RANGE_SLACK) || e > 1.0 + RANGE_SLACK {
        return Err(Error::InconsistentMeasurement(format!(
            "efficiency {e} outside [1/{n}, 1]"
        )));
    }
    // 1 − α = (1 − E) / (E·(N − 1))
    let oma = ((1.0 - e) / (e * (nf - 1.0))).clamp(0.0, 1.0);
    AlphaEstimate::from_one_minus_alpha(oma, AlphaSource::FromEfficiency)
}

/// `P = N·P_single / (N·(1−α) + α)`.
pub fn payload_performance(cfg: &SystemConfig, alpha: &AlphaEstimate) -> f64 {
    efficiency(alpha, cfg.n) * cfg.nominal()
}

/// The value payload performance approaches as N grows without bound.
pub fn saturation_limit(p_single: f64, alpha: &AlphaEstimate) -> f64 {
    p_single / alpha.one_minus_alpha()
}

/// Origin of a sequential contribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ContributionLabel {
    Net,
    Compute,
    OS,
    SW,
    Addressing,
    Propagation,
    Other,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Contribution {
    pub label: ContributionLabel,
    pub one_minus_alpha: f64,
}

/// Named sequential fractions that add up to the total `1 − α`.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ContributionSet {
    entries: Vec<Contribution>,
}

impl ContributionSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, label: ContributionLabel, one_minus_alpha: f64) -> Result<()> {
        if !(one_minus_alpha >= 0.0 && one_minus_alpha.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "contribution {label:?} must be >= 0, got {one_minus_alpha}"
            )));
        }
        if self.entries.iter().any(|c| c.label == label) {
            return Err(Error::InvalidParameter(format!(
                "contribution {label:?} listed twice"
            )));
        }
        self.entries.push(Contribution {
            label,
            one_minus_alpha,
        });
        Ok(())
    }

    pub fn with(mut self, label: ContributionLabel, one_minus_alpha: f64) -> Result<Self> {
        self.insert(label, one_minus_alpha)?;
        Ok(self)
    }

    pub fn entries(&self) -> &[Contribution] {
        &self.entries
    }

    pub fn total_one_minus_alpha(&self) -> f64 {
        self.entries.iter().map(|c| c.one_minus_alpha).sum()
    }

    /// Collapses the set into one α; fails when the fractions reach 1.
    pub fn to_alpha(&self) -> Result<AlphaEstimate> {
        let total = self.total_one_minus_alpha();
        if total >= 1.0 {
            return Err(Error::OverSubscribedContributions { total });
        }
        AlphaEstimate::from_one_minus_alpha(total, AlphaSource::FromContributions)
    }
}

/// Payload performance with the sequential fraction split into contributions.
pub fn payload_performance_split(cfg: &SystemConfig, contribs: &ContributionSet) -> Result<f64> {
    Ok(payload_performance(cfg, &contribs.to_alpha()?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn oma(x: f64) -> AlphaEstimate {
        AlphaEstimate::assumed(x).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn speedup_extremes() {
        assert_eq!(
            speedup(
                &AlphaEstimate::from_alpha(0.0, AlphaSource::Assumed).unwrap(),
                1000
            ),
            1.0
        );
        assert_eq!(speedup(&oma(0.0), 1000), 1000.0);
    }

    #[test]
    fn fugaku_speedup_over_n() {
        let n = 7_299_072;
        let e = speedup(&oma(3.25e-8), n) / n as f64;
        assert!((e - 0.808).abs() <= 0.002, "{e}");
    }

    #[test]
    fn summit_efficiency() {
        let e = efficiency(&oma(14.7e-8), 2_414_592);
        assert!((e - 0.74).abs() <= 0.01, "{e}");
        assert_eq!(efficiency(&oma(0.3), 1), 1.0);
        assert_eq!(efficiency(&oma(0.0), 10_000_000), 1.0);
    }

    #[test]
    fn alpha_from_speedup_edges() {
        assert_eq!(alpha_from_speedup(1.0, 64).unwrap().alpha(), 0.0);
        assert_eq!(alpha_from_speedup(64.0, 64).unwrap().alpha(), 1.0);
        assert!(matches!(
            alpha_from_speedup(1.0, 1),
            Err(Error::DegenerateInstance(_))
        ));
        assert!(matches!(
            alpha_from_speedup(65.0, 64),
            Err(Error::InconsistentMeasurement(_))
        ));
        assert!(matches!(
            alpha_from_speedup(0.5, 64),
            Err(Error::InconsistentMeasurement(_))
        ));
    }

    #[test]
    fn alpha_from_two_unit_timeline() {
        // n=2, dispatch=1, join=1, payload=100: 200 cycles of work in 104.
        let a = alpha_from_speedup(200.0 / 104.0, 2).unwrap();
        assert!(rel(a.alpha(), 0.96) < 1e-12, "{}", a.alpha());
    }

    #[test]
    fn alpha_from_efficiency_table_rows() {
        assert_eq!(alpha_from_efficiency(1.0, 1024).unwrap().alpha(), 1.0);
        let f = alpha_from_efficiency(0.808, 7_299_072).unwrap();
        assert!(rel(f.one_minus_alpha(), 3.25e-8) < 0.02);
        let s = alpha_from_efficiency(0.74, 2_414_592).unwrap();
        assert!(rel(s.one_minus_alpha(), 14.7e-8) < 0.02);
    }

    #[test]
    fn alpha_from_efficiency_rejects_bad_input() {
        assert!(matches!(
            alpha_from_efficiency(0.001, 100),
            Err(Error::InconsistentMeasurement(_))
        ));
        assert!(matches!(
            alpha_from_efficiency(1.2, 100),
            Err(Error::InconsistentMeasurement(_))
        ));
        assert!(matches!(
            alpha_from_efficiency(0.5, 1),
            Err(Error::DegenerateInstance(_))
        ));
        // E = 1/N is the fully sequential boundary.
        assert_eq!(alpha_from_efficiency(0.01, 100).unwrap().alpha(), 0.0);
    }

    #[test]
    fn payload_examples() {
        let cfg = SystemConfig::new(1, 1e9, 1e9).unwrap();
        assert_eq!(payload_performance(&cfg, &oma(0.2)), 1e9);
        assert!(rel(saturation_limit(1e9, &oma(1e-7)), 1e16) < 1e-15);

        let n = 2_414_592;
        let r_peak = 200.794_9e15;
        let cfg = SystemConfig::new(n, r_peak / n as f64, 1e9).unwrap();
        let a = oma(14.7e-8);
        let p = payload_performance(&cfg, &a);
        assert_eq!(p, efficiency(&a, n) * n as f64 * (r_peak / n as f64));
        assert!(rel(p, 0.74 * r_peak) < 0.01);
    }

    #[test]
    fn split_reduces_to_plain_form() {
        let cfg = SystemConfig::new(1_000_000, 1e9, 1e9).unwrap();
        let one = ContributionSet::new()
            .with(ContributionLabel::SW, 3e-7)
            .unwrap();
        assert_eq!(
            payload_performance_split(&cfg, &one).unwrap(),
            payload_performance(&cfg, &oma(3e-7))
        );

        let two = ContributionSet::new()
            .with(ContributionLabel::Net, 1e-7)
            .unwrap()
            .with(ContributionLabel::Compute, 1e-7)
            .unwrap();
        let direct = 1e6 * 1e9 / (1.0 + (1e6 - 1.0) * (1e-7 + 1e-7));
        assert!(rel(payload_performance_split(&cfg, &two).unwrap(), direct) < 1e-14);

        assert_eq!(
            payload_performance_split(&cfg, &ContributionSet::new()).unwrap(),
            1e15
        );
    }

    #[test]
    fn contribution_set_errors() {
        let mut set = ContributionSet::new();
        set.insert(ContributionLabel::OS, 0.6).unwrap();
        assert!(set.insert(ContributionLabel::OS, 0.1).is_err());
        assert!(set.insert(ContributionLabel::Net, -0.1).is_err());
        set.insert(ContributionLabel::Net, 0.4).unwrap();
        let cfg = SystemConfig::new(10, 1.0, 1.0).unwrap();
        assert!(matches!(
            payload_performance_split(&cfg, &set),
            Err(Error::OverSubscribedContributions { .. })
        ));
    }

    #[test]
    fn alpha_estimate_validation() {
        assert!(AlphaEstimate::assumed(-1e-9).is_err());
        assert!(AlphaEstimate::assumed(1.5).is_err());
        assert!(AlphaEstimate::assumed(f64::NAN).is_err());
        assert!(SystemConfig::new(0, 1.0, 1.0).is_err());
        assert!(SystemConfig::new(1, 0.0, 1.0).is_err());
        assert!(SystemConfig::new(1, 1.0, -1.0).is_err());
    }

    #[test]
    fn looping_growth() {
        assert_eq!(Looping::Constant.growth(1 << 20), 0.0);
        assert_eq!(Looping::LinearInN(1e-6).growth(1_000_000), 1.0);
        assert_eq!(Looping::LogInN(0.5).growth(1024), 5.0);
    }
}
