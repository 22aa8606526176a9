//! Paired multi-outcome / binarised critical visibilities.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::bell::bell_critical_visibility_with;
use super::conic::SolveOptions;
use super::pm::pm_critical_visibility_with;
use super::steering::steering_critical_visibility_with;
use crate::error::Result;
use crate::scenarios::{
    binarise_assemblage, binarise_bell, binarise_pm, Assemblage, BellBehavior, PmBehavior, VisibilityFamily,
};

/// Allowed amount by which the binarised visibility may fall below the
/// multi-outcome one.
pub const MONOTONICITY_TOL: f64 = 1e-6;

#[derive(Clone, Debug)]
pub enum BatteryInstance {
    Bell {
        label: String,
        family: VisibilityFamily<BellBehavior>,
    },
    Pm {
        label: String,
        family: VisibilityFamily<PmBehavior>,
        message_dimension: usize,
    },
    Steering {
        label: String,
        family: VisibilityFamily<Assemblage>,
    },
}

impl BatteryInstance {
    pub fn label(&self) -> &str {
        match self {
            BatteryInstance::Bell { label, .. }
            | BatteryInstance::Pm { label, .. }
            | BatteryInstance::Steering { label, .. } => label,
        }
    }

    /// `(v_multi, v_bin)` from the certificates of both solves.
    pub fn solve_pair(&self, options: &SolveOptions) -> Result<(f64, f64)> {
        match self {
            BatteryInstance::Bell { family, .. } => {
                let multi = bell_critical_visibility_with(family, options)?;
                let bin = bell_critical_visibility_with(&family.map(binarise_bell)?, options)?;
                Ok((multi.certificate.v_critical, bin.certificate.v_critical))
            }
            BatteryInstance::Pm {
                family,
                message_dimension,
                ..
            } => {
                let multi = pm_critical_visibility_with(family, *message_dimension, options)?;
                let bin = pm_critical_visibility_with(&family.map(binarise_pm)?, *message_dimension, options)?;
                Ok((multi.certificate.v_critical, bin.certificate.v_critical))
            }
            BatteryInstance::Steering { family, .. } => {
                let multi = steering_critical_visibility_with(family, options)?;
                let bin = steering_critical_visibility_with(&family.map(binarise_assemblage)?, options)?;
                Ok((multi.certificate.v_critical, bin.certificate.v_critical))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairResult {
    pub label: String,
    pub v_multi: f64,
    pub v_bin: f64,
    /// `v_bin - v_multi`.
    pub gap: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BatteryReport {
    pub results: Vec<PairResult>,
    pub min_gap: f64,
    pub mean_gap: f64,
    pub max_gap: f64,
    /// Labels with `gap < -MONOTONICITY_TOL`.
    pub violations: Vec<String>,
}

impl BatteryReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Solves every instance in both forms in parallel. Results keep input order.
pub fn monotonicity_battery(instances: &[BatteryInstance], options: &SolveOptions) -> Result<BatteryReport> {
    let results = instances
        .par_iter()
        .map(|inst| {
            inst.solve_pair(options).map(|(v_multi, v_bin)| PairResult {
                label: inst.label().to_string(),
                v_multi,
                v_bin,
                gap: v_bin - v_multi,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let gaps: Vec<f64> = results.iter().map(|r| r.gap).collect();
    let n = gaps.len().max(1) as f64;
    Ok(BatteryReport {
        min_gap: gaps.iter().copied().fold(f64::INFINITY, f64::min),
        max_gap: gaps.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        mean_gap: gaps.iter().sum::<f64>() / n,
        violations: results
            .iter()
            .filter(|r| r.gap < -MONOTONICITY_TOL)
            .map(|r| r.label.clone())
            .collect(),
        results,
    })
}
