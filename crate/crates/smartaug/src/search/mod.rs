//! Strategy search: grid enumeration over the classical two-parameter
//! space, random search, and TPE-style Bayesian optimization over the
//! five-parameter space, all writing the same resumable trial ledger.

mod ledger;
mod report;
mod tpe;

pub use ledger::{Ledger, TrialRecord, TrialStatus};
pub use report::{render_text, summarize_ledger, LedgerReport, Marginal, MarginalBin};
pub use tpe::{tpe_suggest, TpeParams};

use crate::error::{Error, Result};
use crate::eval::TrialEvaluator;
use crate::raster::Magnitude;
use crate::rng;
use crate::strategy::{StrategyConfig, StrategyKind};
use rand::Rng;
use std::path::Path;
use std::time::Instant;

/// The searchable strategy spaces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchSpace {
    /// 5 dimensions: counts, magnitudes and apply probability.
    Smart,
    /// 2 dimensions: op count in [1, list size] and magnitude.
    Rand,
}

impl SearchSpace {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "smart" => Ok(SearchSpace::Smart),
            "rand" => Ok(SearchSpace::Rand),
            other => Err(Error::InvalidSearch(format!("unknown space `{other}`"))),
        }
    }

    pub(crate) fn dims(&self) -> &'static [DimSpec] {
        const SMART: &[DimSpec] = &[
            DimSpec {
                name: "n_color",
                lo: 0.0,
                hi: 7.0,
                kind: DimKind::Categorical,
            },
            DimSpec {
                name: "n_geometric",
                lo: 0.0,
                hi: 5.0,
                kind: DimKind::Categorical,
            },
            DimSpec {
                name: "m_color",
                lo: 0.0,
                hi: 30.0,
                kind: DimKind::Integer,
            },
            DimSpec {
                name: "m_geometric",
                lo: 0.0,
                hi: 30.0,
                kind: DimKind::Integer,
            },
            DimSpec {
                name: "p",
                lo: 0.0,
                hi: 1.0,
                kind: DimKind::Continuous,
            },
        ];
        // The op count tops out at the sampling list size (13 with
        // Identity), not at a hard-coded constant.
        const RAND: &[DimSpec] = &[
            DimSpec {
                name: "n",
                lo: 1.0,
                hi: 13.0,
                kind: DimKind::Categorical,
            },
            DimSpec {
                name: "m",
                lo: 0.0,
                hi: 30.0,
                kind: DimKind::Integer,
            },
        ];
        match self {
            SearchSpace::Smart => SMART,
            SearchSpace::Rand => RAND,
        }
    }

    /// Draws a uniform configuration: integers uniform on their ranges, the
    /// probability uniform on [0, 1]. Dimension order is fixed, so any
    /// sampler built on this shares the exact RNG stream.
    pub fn sample_uniform(&self, rng: &mut impl Rng) -> StrategyConfig {
        let values: Vec<f64> = self
            .dims()
            .iter()
            .map(|d| match d.kind {
                DimKind::Categorical | DimKind::Integer => {
                    rng.random_range(d.lo as i64..=d.hi as i64) as f64
                }
                DimKind::Continuous => d.lo + rng.random::<f64>() * (d.hi - d.lo),
            })
            .collect();
        self.decode(&values)
    }

    /// Builds the strategy config from per-dimension values.
    pub(crate) fn decode(&self, values: &[f64]) -> StrategyConfig {
        let m = |v: f64| Magnitude::new(v as u8).expect("value within dim bounds");
        let kind = match self {
            SearchSpace::Smart => StrategyKind::Smart {
                n_color: values[0] as u32,
                n_geometric: values[1] as u32,
                m_color: m(values[2]),
                m_geometric: m(values[3]),
                p: values[4],
            },
            SearchSpace::Rand => StrategyKind::Rand {
                n: values[0] as u32,
                m: m(values[1]),
            },
        };
        StrategyConfig::new(kind)
    }

    /// Per-dimension values of a config, if it belongs to this space.
    pub(crate) fn encode(&self, cfg: &StrategyConfig) -> Option<Vec<f64>> {
        match (self, &cfg.kind) {
            (
                SearchSpace::Smart,
                StrategyKind::Smart {
                    n_color,
                    n_geometric,
                    m_color,
                    m_geometric,
                    p,
                },
            ) => Some(vec![
                *n_color as f64,
                *n_geometric as f64,
                m_color.value() as f64,
                m_geometric.value() as f64,
                *p,
            ]),
            (SearchSpace::Rand, StrategyKind::Rand { n, m }) => {
                Some(vec![*n as f64, m.value() as f64])
            }
            _ => None,
        }
    }

    /// Whether every dimension of the config sits inside its bounds.
    pub fn contains(&self, cfg: &StrategyConfig) -> bool {
        match self.encode(cfg) {
            Some(values) => values
                .iter()
                .zip(self.dims())
                .all(|(v, d)| *v >= d.lo && *v <= d.hi),
            None => false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum DimKind {
    /// Small unordered integer range, modeled by smoothed counts.
    Categorical,
    /// Ordered integer range, modeled by an integer-kernel density.
    Integer,
    /// Real interval.
    Continuous,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct DimSpec {
    pub name: &'static str,
    pub lo: f64,
    pub hi: f64,
    pub kind: DimKind,
}

/// Search methods.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchMethod {
    /// Full enumeration of N in [1, 3] x M in [0, 30], row-major N then M.
    Grid,
    Random,
    /// TPE-style Bayesian optimization.
    Bo,
}

impl SearchMethod {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "grid" => Ok(SearchMethod::Grid),
            "random" => Ok(SearchMethod::Random),
            "bo" => Ok(SearchMethod::Bo),
            other => Err(Error::InvalidSearch(format!("unknown method `{other}`"))),
        }
    }
}

/// The classical grid: 3 op counts x 31 magnitudes = 93 points.
pub const GRID_N_RANGE: std::ops::RangeInclusive<u32> = 1..=3;
pub const GRID_POINTS: u64 = 93;

/// The grid point at enumeration index `i` (N-major, then M).
pub fn grid_config(i: u64) -> Result<StrategyConfig> {
    if i >= GRID_POINTS {
        return Err(Error::InvalidSearch(format!(
            "grid index {i} outside the {GRID_POINTS}-point grid"
        )));
    }
    let n = *GRID_N_RANGE.start() + (i / 31) as u32;
    let m = Magnitude::new((i % 31) as u8).expect("0..=30");
    Ok(StrategyConfig::new(StrategyKind::Rand { n, m }))
}

/// Everything `run_search` needs besides the evaluator.
#[derive(Debug, Clone)]
pub struct SearchConfig {
    pub method: SearchMethod,
    pub space: SearchSpace,
    pub budget: u64,
    pub seed: u64,
    /// Record real per-trial wall time. Off by default: measured times make
    /// ledger bytes non-reproducible.
    pub measure_time: bool,
    pub tpe: TpeParams,
}

impl SearchConfig {
    pub fn new(method: SearchMethod, space: SearchSpace, budget: u64, seed: u64) -> Result<Self> {
        if budget < 1 {
            return Err(Error::InvalidSearch("budget must be at least 1".into()));
        }
        if method == SearchMethod::Grid && space != SearchSpace::Rand {
            return Err(Error::InvalidSearch(
                "grid search only applies to the rand space".into(),
            ));
        }
        Ok(SearchConfig {
            method,
            space,
            budget,
            seed,
            measure_time: false,
            tpe: TpeParams::default(),
        })
    }
}

/// Runs (or resumes) a search, appending every trial to the ledger at
/// `ledger_path`. Evaluator failures are recorded as failed trials and the
/// search continues. Fully deterministic for deterministic evaluators:
/// per-trial streams are keyed by (seed, trial id), so a resumed run
/// produces byte-identical rows to an uninterrupted one.
pub fn run_search(
    cfg: &SearchConfig,
    evaluator: &dyn TrialEvaluator,
    ledger_path: &Path,
) -> Result<Ledger> {
    let mut ledger = Ledger::load_or_new(ledger_path)?;
    let budget = if cfg.method == SearchMethod::Grid {
        cfg.budget.min(GRID_POINTS)
    } else {
        cfg.budget
    };
    while (ledger.len() as u64) < budget {
        let trial_id = ledger.len() as u64;
        let mut suggest_rng = rng::stream(cfg.seed, &[trial_id, 0]);
        let eval_seed = rng::derive_seed(cfg.seed, &[trial_id, 1]);
        let mut config = match cfg.method {
            SearchMethod::Grid => grid_config(trial_id)?,
            SearchMethod::Random => cfg.space.sample_uniform(&mut suggest_rng),
            SearchMethod::Bo => {
                tpe_suggest(ledger.records(), &cfg.space, &cfg.tpe, &mut suggest_rng)
            }
        };
        config.seed = eval_seed;
        let start = Instant::now();
        let outcome = evaluator.evaluate(&config, eval_seed);
        let wall_time = if cfg.measure_time {
            start.elapsed().as_secs_f64()
        } else {
            0.0
        };
        let record = match outcome {
            Ok(score) => TrialRecord::ok(trial_id, config, eval_seed, score, wall_time),
            Err(diag) => {
                log::warn!("trial {trial_id} failed: {diag}");
                TrialRecord::failed(trial_id, config, eval_seed, diag, wall_time)
            }
        };
        ledger.append(record)?;
    }
    Ok(ledger)
}
