//! Tree-structured Parzen estimator suggestion over a strategy space.
//!
//! Completed trials are split at the gamma score quantile into good and bad
//! sets; each dimension gets a density per set (kernel estimates for
//! numeric dimensions, smoothed counts for categorical ones). Candidates
//! are drawn from the good densities and the one maximizing the
//! good-to-bad log-density ratio wins. Scores are maximized.

use super::{DimKind, DimSpec, SearchSpace, TrialRecord, TrialStatus};
use crate::strategy::StrategyConfig;
use rand::Rng;

/// TPE knobs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TpeParams {
    /// Fraction of trials forming the good set.
    pub gamma: f64,
    /// Candidates drawn from the good density per suggestion.
    pub n_candidates: usize,
    /// Completed trials required before the model kicks in; below this the
    /// suggestion is uniform, exactly matching random search's stream.
    pub n_startup: usize,
}

impl Default for TpeParams {
    fn default() -> Self {
        TpeParams {
            gamma: 0.25,
            n_candidates: 24,
            n_startup: 10,
        }
    }
}

/// Suggests the next configuration given the trial history.
///
/// Failed trials are excluded from the model. Histories that are too small
/// or fully degenerate (all scores equal) fall back to uniform sampling.
pub fn tpe_suggest(
    history: &[TrialRecord],
    space: &SearchSpace,
    params: &TpeParams,
    rng: &mut impl Rng,
) -> StrategyConfig {
    let mut observed: Vec<(Vec<f64>, f64)> = history
        .iter()
        .filter(|r| r.status == TrialStatus::Ok)
        .filter_map(|r| Some((space.encode(&r.config)?, r.score?)))
        .collect();
    if observed.len() < params.n_startup.max(2) {
        return space.sample_uniform(rng);
    }
    let degenerate = observed.windows(2).all(|w| w[0].1 == w[1].1);
    if degenerate {
        return space.sample_uniform(rng);
    }
    // Best first; ties keep history order for determinism.
    observed.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(std::cmp::Ordering::Equal));
    let n = observed.len();
    let n_good = ((params.gamma * n as f64).ceil() as usize).clamp(1, n - 1);
    let (good, bad) = observed.split_at(n_good);

    let dims = space.dims();
    let good_densities: Vec<DimDensity> = dims
        .iter()
        .enumerate()
        .map(|(d, spec)| DimDensity::fit(spec, good.iter().map(|(v, _)| v[d])))
        .collect();
    let bad_densities: Vec<DimDensity> = dims
        .iter()
        .enumerate()
        .map(|(d, spec)| DimDensity::fit(spec, bad.iter().map(|(v, _)| v[d])))
        .collect();

    let mut best_values: Option<Vec<f64>> = None;
    let mut best_ratio = f64::NEG_INFINITY;
    for _ in 0..params.n_candidates {
        let candidate: Vec<f64> = good_densities.iter().map(|d| d.sample(rng)).collect();
        let ratio: f64 = candidate
            .iter()
            .zip(good_densities.iter().zip(&bad_densities))
            .map(|(&x, (g, b))| g.log_density(x) - b.log_density(x))
            .sum();
        if ratio > best_ratio {
            best_ratio = ratio;
            best_values = Some(candidate);
        }
    }
    space.decode(&best_values.expect("at least one candidate"))
}

/// One-dimensional density over a search dimension.
enum DimDensity {
    /// Laplace-smoothed value counts.
    Categorical { lo: i64, probs: Vec<f64> },
    /// Equal-weight mixture of a uniform prior and Gaussian kernels at the
    /// observed points.
    Kernel {
        spec: DimSpec,
        points: Vec<f64>,
        bandwidth: f64,
        integer: bool,
    },
}

impl DimDensity {
    fn fit(spec: &DimSpec, values: impl Iterator<Item = f64>) -> Self {
        let points: Vec<f64> = values.collect();
        match spec.kind {
            DimKind::Categorical => {
                let lo = spec.lo as i64;
                let cards = (spec.hi as i64 - lo + 1) as usize;
                let mut counts = vec![1.0f64; cards];
                for &v in &points {
                    counts[(v as i64 - lo) as usize] += 1.0;
                }
                let total: f64 = counts.iter().sum();
                for c in &mut counts {
                    *c /= total;
                }
                DimDensity::Categorical { lo, probs: counts }
            }
            DimKind::Integer | DimKind::Continuous => {
                let integer = spec.kind == DimKind::Integer;
                let width = spec.hi - spec.lo;
                let n = points.len().max(1) as f64;
                let mean = points.iter().sum::<f64>() / n;
                let var = points.iter().map(|p| (p - mean) * (p - mean)).sum::<f64>() / n;
                // Silverman-style bandwidth, widened 1.5x and floored at a
                // tenth of the range: narrow kernels lock onto noise in the
                // early good set and never recover.
                let bandwidth = (1.5 * var.sqrt() * n.powf(-0.2)).max(width * 0.1);
                DimDensity::Kernel {
                    spec: *spec,
                    points,
                    bandwidth,
                    integer,
                }
            }
        }
    }

    fn sample(&self, rng: &mut impl Rng) -> f64 {
        match self {
            DimDensity::Categorical { lo, probs } => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                for (i, &p) in probs.iter().enumerate() {
                    acc += p;
                    if u < acc {
                        return (*lo + i as i64) as f64;
                    }
                }
                (*lo + probs.len() as i64 - 1) as f64
            }
            DimDensity::Kernel {
                spec,
                points,
                bandwidth,
                integer,
            } => {
                // Component 0 is the uniform prior, then one per point.
                let pick = rng.random_range(0..=points.len());
                let raw = if pick == 0 {
                    spec.lo + rng.random::<f64>() * (spec.hi - spec.lo)
                } else {
                    points[pick - 1] + gaussian(rng) * bandwidth
                };
                let clamped = raw.clamp(spec.lo, spec.hi);
                if *integer {
                    clamped.round()
                } else {
                    clamped
                }
            }
        }
    }

    fn log_density(&self, x: f64) -> f64 {
        match self {
            DimDensity::Categorical { lo, probs } => {
                let i = (x as i64 - lo) as usize;
                probs[i].ln()
            }
            DimDensity::Kernel {
                spec,
                points,
                bandwidth,
                ..
            } => {
                let uniform = 1.0 / (spec.hi - spec.lo);
                let mut acc = uniform;
                let norm = 1.0 / (bandwidth * (2.0 * std::f64::consts::PI).sqrt());
                for &p in points {
                    let z = (x - p) / bandwidth;
                    acc += norm * (-0.5 * z * z).exp();
                }
                (acc / (points.len() + 1) as f64).ln()
            }
        }
    }
}

/// Standard normal via Box-Muller; two uniform draws per sample.
fn gaussian(rng: &mut impl Rng) -> f64 {
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}
