//! Ledger analysis: best trial, top-3 mean, per-hyperparameter marginals.

use super::{DimKind, DimSpec, SearchSpace, TrialRecord, TrialStatus};
use crate::error::{Error, Result};
use crate::strategy::{StrategyConfig, StrategyKind};
use serde::{Deserialize, Serialize};

/// Score statistics of one value bin of one hyperparameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginalBin {
    pub bin: String,
    pub count: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub std: Option<f64>,
}

/// Marginal table of one hyperparameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Marginal {
    pub dim: String,
    pub bins: Vec<MarginalBin>,
}

impl Marginal {
    /// Spread of bin means; a crude signal of the dimension's influence.
    pub fn range(&self) -> f64 {
        let means: Vec<f64> = self.bins.iter().filter_map(|b| b.mean).collect();
        match (
            means.iter().cloned().reduce(f64::min),
            means.iter().cloned().reduce(f64::max),
        ) {
            (Some(lo), Some(hi)) => hi - lo,
            _ => 0.0,
        }
    }
}

/// Summary of a search ledger.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LedgerReport {
    pub trials: usize,
    pub ok: usize,
    pub failed: usize,
    pub best_trial_id: u64,
    pub best_score: f64,
    pub best_config: StrategyConfig,
    /// Ids of the up-to-three best trials by score.
    pub top3: Vec<u64>,
    /// Mean score of the top-3 trials (over however many exist).
    pub top3_mean: f64,
    pub marginals: Vec<Marginal>,
}

/// Summarizes a ledger. Needs at least one successful trial.
pub fn summarize_ledger(records: &[TrialRecord]) -> Result<LedgerReport> {
    let ok: Vec<&TrialRecord> = records
        .iter()
        .filter(|r| r.status == TrialStatus::Ok)
        .collect();
    if ok.is_empty() {
        return Err(Error::EmptyLedger);
    }
    let mut ranked = ok.clone();
    // Best first; ties resolved by trial id for a stable report.
    ranked.sort_by(|a, b| {
        b.score
            .partial_cmp(&a.score)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.trial_id.cmp(&b.trial_id))
    });
    let best = ranked[0];
    let top: Vec<&TrialRecord> = ranked.iter().take(3).copied().collect();
    let top3_mean = top.iter().map(|r| r.score.unwrap_or(0.0)).sum::<f64>() / top.len() as f64;

    let marginals = match space_of(&ok) {
        Some(space) => build_marginals(&space, &ok),
        None => Vec::new(),
    };
    Ok(LedgerReport {
        trials: records.len(),
        ok: ok.len(),
        failed: records.len() - ok.len(),
        best_trial_id: best.trial_id,
        best_score: best.score.expect("ok trial"),
        best_config: best.config.clone(),
        top3: top.iter().map(|r| r.trial_id).collect(),
        top3_mean,
        marginals,
    })
}

/// The search space the ledger's configs belong to, if they share one.
fn space_of(ok: &[&TrialRecord]) -> Option<SearchSpace> {
    let first = &ok.first()?.config.kind;
    let space = match first {
        StrategyKind::Smart { .. } => SearchSpace::Smart,
        StrategyKind::Rand { .. } => SearchSpace::Rand,
        _ => return None,
    };
    ok.iter()
        .all(|r| space.encode(&r.config).is_some())
        .then_some(space)
}

fn build_marginals(space: &SearchSpace, ok: &[&TrialRecord]) -> Vec<Marginal> {
    space
        .dims()
        .iter()
        .enumerate()
        .map(|(d, spec)| {
            let edges = bin_edges(spec);
            let mut sums = vec![(0usize, 0.0f64, 0.0f64); edges.len()];
            for r in ok {
                let values = space.encode(&r.config).expect("checked by space_of");
                let v = values[d];
                let idx = edges
                    .iter()
                    .position(|(lo, hi, _)| v >= *lo && v <= *hi)
                    .expect("bins cover the dimension");
                let s = r.score.expect("ok trial");
                sums[idx].0 += 1;
                sums[idx].1 += s;
                sums[idx].2 += s * s;
            }
            let bins = edges
                .iter()
                .zip(&sums)
                .map(|((_, _, label), &(count, sum, sum_sq))| {
                    if count == 0 {
                        MarginalBin {
                            bin: label.clone(),
                            count,
                            mean: None,
                            std: None,
                        }
                    } else {
                        let mean = sum / count as f64;
                        let var = (sum_sq / count as f64 - mean * mean).max(0.0);
                        MarginalBin {
                            bin: label.clone(),
                            count,
                            mean: Some(mean),
                            std: Some(var.sqrt()),
                        }
                    }
                })
                .collect();
            Marginal {
                dim: spec.name.to_string(),
                bins,
            }
        })
        .collect()
}

/// (lo, hi, label) triples covering the dimension: one bin per categorical
/// value, width-5 bins for magnitudes, ten bins for the unit interval.
fn bin_edges(spec: &DimSpec) -> Vec<(f64, f64, String)> {
    match spec.kind {
        DimKind::Categorical => (spec.lo as i64..=spec.hi as i64)
            .map(|v| (v as f64, v as f64, v.to_string()))
            .collect(),
        DimKind::Integer => {
            let mut out = Vec::new();
            let mut lo = spec.lo as i64;
            while lo <= spec.hi as i64 {
                let hi = (lo + 4).min(spec.hi as i64);
                // Merge a trailing 1-wide remainder into the previous bin.
                let hi = if spec.hi as i64 - hi < 2 {
                    spec.hi as i64
                } else {
                    hi
                };
                out.push((lo as f64, hi as f64, format!("{lo}-{hi}")));
                lo = hi + 1;
            }
            out
        }
        DimKind::Continuous => (0..10)
            .map(|i| {
                let lo = spec.lo + (spec.hi - spec.lo) * i as f64 / 10.0;
                let hi = spec.lo + (spec.hi - spec.lo) * (i + 1) as f64 / 10.0;
                // Right-open bins except the last, which is closed.
                let upper = if i == 9 {
                    hi
                } else {
                    hi - f64::EPSILON * hi.abs().max(1.0)
                };
                (lo, upper, format!("[{lo:.1},{hi:.1})"))
            })
            .collect(),
    }
}

/// Plain-text rendering of a report.
pub fn render_text(report: &LedgerReport) -> String {
    use std::fmt::Write;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "trials: {} ({} ok, {} failed)",
        report.trials, report.ok, report.failed
    );
    let _ = writeln!(
        out,
        "best: trial {} score {:.6}",
        report.best_trial_id, report.best_score
    );
    let _ = writeln!(
        out,
        "best config: {}",
        serde_json::to_string(&report.best_config).unwrap_or_default()
    );
    let _ = writeln!(
        out,
        "top-3 mean: {:.6} (trials {:?})",
        report.top3_mean, report.top3
    );
    for marginal in &report.marginals {
        let _ = writeln!(out, "\nmarginal {}:", marginal.dim);
        let _ = writeln!(
            out,
            "  {:<12} {:>6} {:>10} {:>10}",
            "bin", "count", "mean", "std"
        );
        for bin in &marginal.bins {
            match (bin.mean, bin.std) {
                (Some(mean), Some(std)) => {
                    let _ = writeln!(
                        out,
                        "  {:<12} {:>6} {:>10.4} {:>10.4}",
                        bin.bin, bin.count, mean, std
                    );
                }
                _ => {
                    let _ = writeln!(
                        out,
                        "  {:<12} {:>6} {:>10} {:>10}",
                        bin.bin, bin.count, "-", "-"
                    );
                }
            }
        }
    }
    out
}
