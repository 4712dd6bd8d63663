use amdahl_lens::precision::{
    compose, decompose, decompose_serial, decompose_timeaware, expected_perf_ratio,
    times_from_measurement, DualPrecisionMeasurement, SummingModel,
};
use amdahl_lens::Error;
use proptest::prelude::*;

fn models() -> impl Strategy<Value = SummingModel> {
    prop_oneof![Just(SummingModel::Serial), Just(SummingModel::TimeAware)]
}

proptest! {
    #[test]
    fn compose_inverts_decompose(model in models(), t16 in 1e-12f64..1e-4, q in 1.0f64..4.0, k in 1.5f64..8.0) {
        let t64 = t16 * q.min(k);
        let d = decompose(model, t16, t64, k).unwrap();
        let (b16, b64) = compose(model, d.f0, d.f16, k);
        prop_assert!(((b16 - t16) / t16).abs() < 1e-9);
        prop_assert!(((b64 - t64) / t64).abs() < 1e-9);
        prop_assert!(d.f0 >= 0.0 && d.f16 >= 0.0);
    }

    #[test]
    fn compose_then_decompose(model in models(), f0 in 0.0f64..1e-6, f16 in 1e-12f64..1e-6) {
        let (t16, t64) = compose(model, f0, f16, 4.0);
        let d = decompose(model, t16, t64, 4.0).unwrap();
        prop_assert!((d.f16 - f16).abs() <= 1e-9 * (f0 + f16));
        prop_assert!((d.f0 - f0).abs() <= 1e-6 * (f0 + f16));
    }

    #[test]
    fn implied_ratio_matches_times(model in models(), t16 in 1e-10f64..1e-6, q in 1.0f64..4.0) {
        let d = decompose(model, t16, t16 * q, 4.0).unwrap();
        prop_assert!((expected_perf_ratio(&d) - q).abs() < 1e-9 * q);
    }
}

#[test]
fn equal_times_are_pure_housekeeping() {
    for d in [
        decompose_serial(2e-8, 2e-8).unwrap(),
        decompose_timeaware(2e-8, 2e-8).unwrap(),
    ] {
        assert_eq!(d.f16, 0.0);
        assert!((d.f0 - 2e-8).abs() < 1e-22);
    }
}

#[test]
fn band_edges() {
    assert!(decompose_serial(1e-8, 4e-8).unwrap().f0.abs() < 1e-22);
    assert!(matches!(
        decompose_serial(2e-8, 1e-8),
        Err(Error::InvertedTimes { .. })
    ));
    assert!(matches!(
        decompose_timeaware(1e-8, 4.0001e-8),
        Err(Error::NegativeHousekeeping { .. })
    ));
}

#[test]
fn timeaware_fugaku_closed_form() {
    let m = DualPrecisionMeasurement::new(0.808, 0.691, 7_299_072, 3.42).unwrap();
    let t = times_from_measurement(&m).unwrap();
    let d = decompose_timeaware(t.time16, t.time64).unwrap();
    // Independent arithmetic on the same inputs.
    let n: f64 = 7_299_071.0;
    let t64: f64 = (1.0 - 0.808) / (0.808 * n);
    let t16: f64 = (1.0 - 0.691) / (0.691 * n) / 3.42;
    let f16 = ((t64 * t64 - t16 * t16) / 15.0).sqrt();
    let f0 = (t16 * t16 - f16 * f16).sqrt();
    assert!(((d.f16 - f16) / f16).abs() < 1e-12);
    assert!(((d.f0 - f0) / f0).abs() < 1e-12);
    // Pythagorean summing attributes less to operand width than serial summing.
    let s = decompose_serial(t.time16, t.time64).unwrap();
    assert!(d.f16 > s.f16 * 0.5 && d.f0 > 0.0);
}

#[test]
fn perf_ratio_range_enforced() {
    assert!(DualPrecisionMeasurement::new(0.8, 0.7, 100, 0.9).is_err());
    assert!(DualPrecisionMeasurement::new(0.8, 0.7, 100, 4.5).is_err());
}
