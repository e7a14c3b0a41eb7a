//! Pathwise verification of the competitive analysis: critical thresholds,
//! the dual candidate and its constraint checks, the budget-augmentation
//! coupling, and the classic primal-dual candidate with its obstruction.

mod bounds;
mod classic;
mod coupling;
mod profile;

pub use bounds::{
    build_certificate, check_decomposable, check_price_monotone, check_shortfall,
    check_threshold_bound, DualCertificate,
};
pub use classic::{classic_pd_average, classic_pd_candidate, ClassicDuals};
pub use coupling::{check_augmentation, AugmentedCoupling};
pub(crate) use coupling::check_augmentation_inner;
pub use profile::{critical_profile, CriticalProfile, ThresholdPiece};

use serde::Serialize;

use crate::algorithms::{FractionalAllocation, TradeoffFunction};
use crate::instance::Instance;
use crate::offline::{BenchmarkKind, OfflineResult};

/// Absolute comparison tolerance scaled to the magnitude of the quantity.
pub fn tol_for(scale: f64) -> f64 {
    1e-9 * scale.abs().max(1.0)
}

/// One failed inequality.
#[derive(Debug, Clone, Serialize)]
pub struct Violation {
    pub location: String,
    pub magnitude: f64,
}

/// Outcome of one checker: how many inequalities were evaluated and which
/// failed. Checkers report, they never panic.
#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub name: String,
    pub checks: usize,
    pub violations: Vec<Violation>,
    /// Largest violation magnitude, 0 when clean.
    pub worst: f64,
}

impl CheckReport {
    pub fn new(name: impl Into<String>) -> Self {
        CheckReport { name: name.into(), checks: 0, violations: Vec::new(), worst: 0.0 }
    }

    /// Record one inequality `lhs >= rhs - tol`.
    pub fn require(&mut self, lhs: f64, rhs: f64, tol: f64, location: impl FnOnce() -> String) {
        self.checks += 1;
        let gap = rhs - lhs;
        if gap > tol {
            self.worst = self.worst.max(gap);
            if self.violations.len() < 100 {
                self.violations.push(Violation { location: location(), magnitude: gap });
            }
        }
    }

    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn merge(&mut self, other: CheckReport) {
        self.checks += other.checks;
        self.worst = self.worst.max(other.worst);
        self.violations.extend(other.violations);
        self.violations.truncate(100);
    }
}

/// One benchmark window: the moments of arrival `arrival` that the offline
/// solution gives to the focal resource, placed as `[start, end)` inside
/// the arrival's unit interval.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct OptWindow {
    pub arrival: usize,
    pub start: f64,
    pub end: f64,
}

/// All benchmark windows of one resource, with the budget units they carry.
#[derive(Debug, Clone, Serialize)]
pub struct OptWindows {
    pub resource: usize,
    pub windows: Vec<OptWindow>,
    /// OPT_i in budget units: sum of b_it (end - start).
    pub units: f64,
    pub source: BenchmarkKind,
}

/// Translate an offline solution into per-resource moment windows. Fractions
/// of the same arrival granted to different resources are stacked one after
/// another inside `[t, t+1)` so windows never overlap.
pub fn opt_windows(inst: &Instance, result: &OfflineResult) -> Vec<OptWindows> {
    let n = inst.n();
    let mut out: Vec<OptWindows> = (0..n)
        .map(|resource| OptWindows {
            resource,
            windows: Vec::new(),
            units: 0.0,
            source: result.kind,
        })
        .collect();
    let mut offsets = vec![0.0f64; inst.t_len()];
    for (i, share) in result.per_resource.iter().enumerate() {
        for &(t, fraction) in &share.matched {
            if fraction <= 0.0 {
                continue;
            }
            let start = t as f64 + offsets[t - 1];
            let end = start + fraction;
            offsets[t - 1] += fraction;
            debug_assert!(offsets[t - 1] <= 1.0 + 1e-9);
            out[i].windows.push(OptWindow { arrival: t, start, end });
            out[i].units += inst.bid(i, t) * fraction;
        }
    }
    out
}

/// Integral of the moment price process over `[a, b)`: at matched moments
/// the process equals the matched resource's bid price, elsewhere it is 0.
pub fn lambda_integral(
    run: &FractionalAllocation,
    inst: &Instance,
    seeds: &[f64],
    tradeoff: &TradeoffFunction<f64>,
    a: f64,
    b: f64,
) -> f64 {
    let mut acc = 0.0;
    for seg in &run.segments {
        let lo = seg.start.max(a);
        let hi = seg.end.min(b);
        if hi > lo {
            let discount = 1.0 - tradeoff.eval(seeds[seg.resource]);
            acc += (hi - lo) * seg.rate() * inst.reward(seg.resource) * discount;
        }
    }
    acc
}

/// Net price integral over all moments: equals
/// sum_j f-ALG_j r_j (1 - g(y_j)) segment-exactly.
pub fn lambda_net(
    run: &FractionalAllocation,
    inst: &Instance,
    seeds: &[f64],
    tradeoff: &TradeoffFunction<f64>,
) -> f64 {
    run.consumed
        .iter()
        .enumerate()
        .map(|(j, &c)| c * inst.reward(j) * (1.0 - tradeoff.eval(seeds[j])))
        .sum()
}

/// The price maximum over available resources at moment `tau`.
pub fn lambda_at(
    run: &FractionalAllocation,
    inst: &Instance,
    seeds: &[f64],
    tradeoff: &TradeoffFunction<f64>,
    tau: f64,
) -> f64 {
    (0..inst.n())
        .filter(|&j| run.available_at(j, tau))
        .map(|j| inst.bid_at(j, tau) * inst.reward(j) * (1.0 - tradeoff.eval(seeds[j])))
        .fold(0.0, f64::max)
}

/// Uniform grid on [0, 1] plus the profile's threshold values, where the
/// bound inequalities change regime.
pub fn y_grid(points: usize, profile: Option<&CriticalProfile>) -> Vec<f64> {
    let mut grid: Vec<f64> = (0..points)
        .map(|k| k as f64 / (points.max(2) - 1) as f64)
        .collect();
    if let Some(p) = profile {
        for &v in &p.v_set {
            // the threshold itself plus a nudge to either side: exactly at
            // v the focal price ties the competitor and the a.e. bounds
            // change regime
            grid.push(v);
            grid.push((v - 1e-7).max(0.0));
            grid.push((v + 1e-7).min(1.0));
        }
    }
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    grid
}
