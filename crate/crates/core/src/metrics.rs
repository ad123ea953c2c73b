//! Self-consumption and self-sufficiency accounting.
//!
//! Hourly production and consumption are reconciled into exported and
//! imported energy with no storage in between: whatever production exceeds
//! consumption leaves for the grid, whatever consumption exceeds production
//! is drawn from it. Window metrics are ratios of summed components:
//!
//! ```text
//! SCR = Σ(E_produced − E_exported) / Σ E_produced
//! SSR = Σ(E_produced − E_exported) / Σ E_consumed
//! ```
//!
//! The separately reported "mean hourly" rates average the per-hour ratios
//! over daylight hours (hours with production) and are a distinct quantity.

use crate::{Classify, FailureKind};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MetricsError {
    /// The metric's denominator is zero over the window.
    #[error("{metric} undefined: window has zero {denominator}")]
    Undefined {
        metric: &'static str,
        denominator: &'static str,
    },
    #[error("ledger horizons differ: {left} vs {right} hours")]
    HorizonMismatch { left: usize, right: usize },
    #[error("invalid ledger: {0}")]
    InvalidLedger(String),
}

impl Classify for MetricsError {
    fn kind(&self) -> FailureKind {
        match self {
            MetricsError::Undefined { .. } => FailureKind::Numerical,
            _ => FailureKind::Input,
        }
    }
}

/// One hour of energy accounting [kWh].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HourEnergy {
    pub produced_kwh: f64,
    pub consumed_kwh: f64,
    pub exported_kwh: f64,
    pub imported_kwh: f64,
}

impl HourEnergy {
    /// Reconciles one hour from production and consumption alone.
    pub fn reconcile(produced_kwh: f64, consumed_kwh: f64) -> Self {
        Self {
            produced_kwh,
            consumed_kwh,
            exported_kwh: (produced_kwh - consumed_kwh).max(0.0),
            imported_kwh: (consumed_kwh - produced_kwh).max(0.0),
        }
    }

    /// Locally produced energy consumed on site.
    pub fn self_consumed_kwh(&self) -> f64 {
        self.produced_kwh - self.exported_kwh
    }
}

/// Per-hour energy ledger over a window.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EnergyLedger {
    pub hours: Vec<HourEnergy>,
}

impl EnergyLedger {
    /// Builds a ledger from aligned production and consumption series.
    pub fn from_series(produced: &[f64], consumed: &[f64]) -> Result<Self, MetricsError> {
        if produced.len() != consumed.len() {
            return Err(MetricsError::HorizonMismatch {
                left: produced.len(),
                right: consumed.len(),
            });
        }
        for (i, (&p, &c)) in produced.iter().zip(consumed).enumerate() {
            if !(p >= 0.0) || !(c >= 0.0) {
                return Err(MetricsError::InvalidLedger(format!(
                    "negative or non-finite energy at hour {i}: produced {p}, consumed {c}"
                )));
            }
        }
        Ok(Self {
            hours: produced
                .iter()
                .zip(consumed)
                .map(|(&p, &c)| HourEnergy::reconcile(p, c))
                .collect(),
        })
    }

    pub fn push_hour(&mut self, produced_kwh: f64, consumed_kwh: f64) {
        self.hours.push(HourEnergy::reconcile(produced_kwh, consumed_kwh));
    }

    pub fn len(&self) -> usize {
        self.hours.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hours.is_empty()
    }

    pub fn total_produced_kwh(&self) -> f64 {
        self.hours.iter().map(|h| h.produced_kwh).sum()
    }

    pub fn total_consumed_kwh(&self) -> f64 {
        self.hours.iter().map(|h| h.consumed_kwh).sum()
    }

    pub fn total_exported_kwh(&self) -> f64 {
        self.hours.iter().map(|h| h.exported_kwh).sum()
    }

    pub fn total_imported_kwh(&self) -> f64 {
        self.hours.iter().map(|h| h.imported_kwh).sum()
    }
}

/// Window self-consumption rate: share of produced energy used on site.
pub fn scr(ledger: &EnergyLedger) -> Result<f64, MetricsError> {
    let produced = ledger.total_produced_kwh();
    if produced <= 0.0 {
        return Err(MetricsError::Undefined {
            metric: "SCR",
            denominator: "production",
        });
    }
    Ok((produced - ledger.total_exported_kwh()) / produced)
}

/// Window self-sufficiency rate: share of consumption covered on site.
pub fn ssr(ledger: &EnergyLedger) -> Result<f64, MetricsError> {
    let consumed = ledger.total_consumed_kwh();
    if consumed <= 0.0 {
        return Err(MetricsError::Undefined {
            metric: "SSR",
            denominator: "consumption",
        });
    }
    Ok((ledger.total_produced_kwh() - ledger.total_exported_kwh()) / consumed)
}

/// Mean of per-hour SCR over daylight hours (production > 0).
pub fn mean_hourly_scr(ledger: &EnergyLedger) -> Option<f64> {
    let daylight: Vec<f64> = ledger
        .hours
        .iter()
        .filter(|h| h.produced_kwh > 0.0)
        .map(|h| h.self_consumed_kwh() / h.produced_kwh)
        .collect();
    if daylight.is_empty() {
        None
    } else {
        Some(daylight.iter().sum::<f64>() / daylight.len() as f64)
    }
}

/// Mean of per-hour SSR over daylight hours with non-zero consumption.
pub fn mean_hourly_ssr(ledger: &EnergyLedger) -> Option<f64> {
    let daylight: Vec<f64> = ledger
        .hours
        .iter()
        .filter(|h| h.produced_kwh > 0.0 && h.consumed_kwh > 0.0)
        .map(|h| h.self_consumed_kwh() / h.consumed_kwh)
        .collect();
    if daylight.is_empty() {
        None
    } else {
        Some(daylight.iter().sum::<f64>() / daylight.len() as f64)
    }
}

/// Per-arm aggregate numbers.
#[derive(Debug, Clone, PartialEq)]
pub struct ArmSummary {
    pub total_produced_kwh: f64,
    pub total_consumed_kwh: f64,
    pub total_exported_kwh: f64,
    pub total_imported_kwh: f64,
    /// Window-sum ratios (Σ-based).
    pub scr_window: Option<f64>,
    pub ssr_window: Option<f64>,
    /// Daylight means of hourly ratios — a distinct quantity from the
    /// window-sum ratios above.
    pub mean_hourly_scr: Option<f64>,
    pub mean_hourly_ssr: Option<f64>,
}

impl ArmSummary {
    pub fn of(ledger: &EnergyLedger) -> Self {
        Self {
            total_produced_kwh: ledger.total_produced_kwh(),
            total_consumed_kwh: ledger.total_consumed_kwh(),
            total_exported_kwh: ledger.total_exported_kwh(),
            total_imported_kwh: ledger.total_imported_kwh(),
            scr_window: scr(ledger).ok(),
            ssr_window: ssr(ledger).ok(),
            mean_hourly_scr: mean_hourly_scr(ledger),
            mean_hourly_ssr: mean_hourly_ssr(ledger),
        }
    }
}

/// Controlled-vs-baseline comparison over the same horizon and weather.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonSummary {
    pub controlled: ArmSummary,
    pub baseline: ArmSummary,
    /// (controlled − baseline) / baseline · 100, on total consumption.
    pub consumption_delta_pct: f64,
    /// Absolute deltas on the window ratios, when both are defined.
    pub scr_delta: Option<f64>,
    pub ssr_delta: Option<f64>,
}

/// Compares two ledgers hour-aligned over the same horizon.
pub fn compare(
    controlled: &EnergyLedger,
    baseline: &EnergyLedger,
) -> Result<ComparisonSummary, MetricsError> {
    if controlled.len() != baseline.len() {
        return Err(MetricsError::HorizonMismatch {
            left: controlled.len(),
            right: baseline.len(),
        });
    }
    let c = ArmSummary::of(controlled);
    let b = ArmSummary::of(baseline);
    let consumption_delta_pct = if b.total_consumed_kwh > 0.0 {
        (c.total_consumed_kwh - b.total_consumed_kwh) / b.total_consumed_kwh * 100.0
    } else {
        0.0
    };
    let scr_delta = match (c.scr_window, b.scr_window) {
        (Some(x), Some(y)) => Some(x - y),
        _ => None,
    };
    let ssr_delta = match (c.ssr_window, b.ssr_window) {
        (Some(x), Some(y)) => Some(x - y),
        _ => None,
    };
    Ok(ComparisonSummary {
        controlled: c,
        baseline: b,
        consumption_delta_pct,
        scr_delta,
        ssr_delta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reconcile_splits_export_and_import() {
        let h = HourEnergy::reconcile(10.0, 4.0);
        assert_eq!(h.exported_kwh, 6.0);
        assert_eq!(h.imported_kwh, 0.0);
        assert_eq!(h.self_consumed_kwh(), 4.0);

        let h = HourEnergy::reconcile(2.0, 5.0);
        assert_eq!(h.exported_kwh, 0.0);
        assert_eq!(h.imported_kwh, 3.0);
    }

    #[test]
    fn scr_examples() {
        // Nothing exported when consumption covers production.
        let ledger = EnergyLedger::from_series(&[3.0, 2.0], &[5.0, 2.0]).unwrap();
        assert_eq!(scr(&ledger).unwrap(), 1.0);

        // Single hour: produced 10, consumed 4 → exported 6 → SCR 0.4.
        let ledger = EnergyLedger::from_series(&[10.0], &[4.0]).unwrap();
        assert_eq!(scr(&ledger).unwrap(), 0.4);

        let dark = EnergyLedger::from_series(&[0.0, 0.0], &[1.0, 1.0]).unwrap();
        assert!(matches!(
            scr(&dark),
            Err(MetricsError::Undefined { metric: "SCR", .. })
        ));
    }

    #[test]
    fn ssr_examples() {
        let dark = EnergyLedger::from_series(&[0.0, 0.0], &[1.0, 2.0]).unwrap();
        assert_eq!(ssr(&dark).unwrap(), 0.0);

        // Single hour: produced 10, consumed 4 → SSR (10 − 6)/4 = 1.
        let ledger = EnergyLedger::from_series(&[10.0], &[4.0]).unwrap();
        assert_eq!(ssr(&ledger).unwrap(), 1.0);

        let idle = EnergyLedger::from_series(&[1.0], &[0.0]).unwrap();
        assert!(matches!(
            ssr(&idle),
            Err(MetricsError::Undefined { metric: "SSR", .. })
        ));
    }

    #[test]
    fn identical_ledgers_compare_to_zero_deltas() {
        let ledger = EnergyLedger::from_series(&[5.0, 0.0, 3.0], &[4.0, 2.0, 3.5]).unwrap();
        let summary = compare(&ledger, &ledger).unwrap();
        assert_eq!(summary.consumption_delta_pct, 0.0);
        assert_eq!(summary.scr_delta, Some(0.0));
        assert_eq!(summary.ssr_delta, Some(0.0));
    }

    /// The benchmark 15-day totals: 494.54 vs 565.38 kWh is a −12.5% delta.
    #[test]
    fn reference_totals_give_the_reported_delta() {
        let controlled = EnergyLedger::from_series(&[0.0], &[494.54]).unwrap();
        let baseline = EnergyLedger::from_series(&[0.0], &[565.38]).unwrap();
        let summary = compare(&controlled, &baseline).unwrap();
        assert!((summary.consumption_delta_pct - (-12.53)).abs() < 0.01);
    }

    /// Two-day ledgers small enough to check against hand arithmetic.
    #[test]
    fn matches_manual_spreadsheet_arithmetic() {
        // Hours: (produced, consumed)
        //   (0,2) (4,3) (6,6) (2,5)   day 1
        //   (0,1) (5,2) (3,3) (1,4)   day 2
        // Exports: 0,1,0,0, 0,3,0,0        → Σ 4
        // Imports: 2,0,0,3, 1,0,0,3        → Σ 9
        // Σ produced = 21, Σ consumed = 26, self-consumed = 21 − 4 = 17
        // SCR = 17/21, SSR = 17/26
        let produced = [0.0, 4.0, 6.0, 2.0, 0.0, 5.0, 3.0, 1.0];
        let consumed = [2.0, 3.0, 6.0, 5.0, 1.0, 2.0, 3.0, 4.0];
        let ledger = EnergyLedger::from_series(&produced, &consumed).unwrap();
        assert_eq!(ledger.total_exported_kwh(), 4.0);
        assert_eq!(ledger.total_imported_kwh(), 9.0);
        assert!((scr(&ledger).unwrap() - 17.0 / 21.0).abs() < 1e-15);
        assert!((ssr(&ledger).unwrap() - 17.0 / 26.0).abs() < 1e-15);

        // Daylight hourly SCRs: 4/4? no — hours with production:
        //   (4,3)→3/4, (6,6)→1, (2,5)→1, (5,2)→2/5, (3,3)→1, (1,4)→1
        let want_mean_scr = (0.75 + 1.0 + 1.0 + 0.4 + 1.0 + 1.0) / 6.0;
        assert!((mean_hourly_scr(&ledger).unwrap() - want_mean_scr).abs() < 1e-15);
    }

    #[test]
    fn horizon_mismatch_is_rejected() {
        let a = EnergyLedger::from_series(&[1.0], &[1.0]).unwrap();
        let b = EnergyLedger::from_series(&[1.0, 2.0], &[1.0, 2.0]).unwrap();
        assert!(matches!(
            compare(&a, &b),
            Err(MetricsError::HorizonMismatch { left: 1, right: 2 })
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(50))]

        /// produced − exported = consumed − imported per hour. One side of
        /// the identity re-subtracts a rounded difference, so it holds to a
        /// rounding ulp rather than bitwise.
        #[test]
        fn ledger_identity(
            produced in proptest::collection::vec(0.0..50.0f64, 1..30),
            consumed in proptest::collection::vec(0.0..50.0f64, 1..30),
        ) {
            let n = produced.len().min(consumed.len());
            let ledger = EnergyLedger::from_series(&produced[..n], &consumed[..n]).unwrap();
            for h in &ledger.hours {
                let lhs = h.produced_kwh - h.exported_kwh;
                let rhs = h.consumed_kwh - h.imported_kwh;
                let scale = h.produced_kwh.max(h.consumed_kwh).max(1.0);
                prop_assert!((lhs - rhs).abs() <= 1e-12 * scale);
                prop_assert!(h.exported_kwh >= 0.0 && h.imported_kwh >= 0.0);
                // One of the two grid flows is exactly zero every hour.
                prop_assert!(h.exported_kwh == 0.0 || h.imported_kwh == 0.0);
            }
        }

        /// Both rates live in [0, 1] whenever defined, and scaling all
        /// energies leaves them unchanged.
        #[test]
        fn rates_bounded_and_scale_invariant(
            produced in proptest::collection::vec(0.0..50.0f64, 4..20),
            consumed in proptest::collection::vec(0.0..50.0f64, 4..20),
            scale in 0.01..100.0f64,
        ) {
            let n = produced.len().min(consumed.len());
            let ledger = EnergyLedger::from_series(&produced[..n], &consumed[..n]).unwrap();
            let scaled_p: Vec<f64> = produced[..n].iter().map(|v| v * scale).collect();
            let scaled_c: Vec<f64> = consumed[..n].iter().map(|v| v * scale).collect();
            let scaled = EnergyLedger::from_series(&scaled_p, &scaled_c).unwrap();

            if let Ok(v) = scr(&ledger) {
                prop_assert!((0.0..=1.0).contains(&v));
                prop_assert!((scr(&scaled).unwrap() - v).abs() < 1e-12);
            }
            if let Ok(v) = ssr(&ledger) {
                prop_assert!((0.0..=1.0 + 1e-12).contains(&v));
                prop_assert!((ssr(&scaled).unwrap() - v).abs() < 1e-12);
            }
        }

        /// Window metrics are ratios of summed components, not means of
        /// hourly ratios.
        #[test]
        fn window_metric_is_sum_ratio(
            produced in proptest::collection::vec(0.1..50.0f64, 4..20),
            consumed in proptest::collection::vec(0.1..50.0f64, 4..20),
        ) {
            let n = produced.len().min(consumed.len());
            let ledger = EnergyLedger::from_series(&produced[..n], &consumed[..n]).unwrap();
            let sum_self: f64 = ledger.hours.iter().map(|h| h.self_consumed_kwh()).sum();
            let direct = sum_self / ledger.total_produced_kwh();
            prop_assert!((scr(&ledger).unwrap() - direct).abs() < 1e-12);
        }
    }
}
