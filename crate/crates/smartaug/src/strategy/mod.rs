//! The five augmentation samplers.
//!
//! Each sampler turns RNG state plus a configuration (and the epoch clock,
//! for the annealed strategy) into a per-image [`AugPlan`]. Samplers are
//! pure given the RNG: callers derive one stream per (seed, epoch, item)
//! so plans are reproducible and independently computable.

mod weights;

pub use weights::WeightTable;

use crate::error::{Error, Result};
use crate::raster::{
    color_ops, geometric_ops, op_spec, rand_ops, AugPlan, Magnitude, OpName, PlanStep, Sign,
};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// A fully resolved augmentation strategy.
///
/// Serialized as a JSON object tagged by `kind`:
///
/// ```json
/// {"kind": "smart", "n_color": 2, "n_geometric": 1,
///  "m_color": 10, "m_geometric": 5, "p": 0.8, "seed": 7}
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyConfig {
    #[serde(flatten)]
    pub kind: StrategyKind,
    /// Root seed for the strategy's random streams. Callers that manage
    /// their own seeds (the search loop, the CLI `--seed` flag) override it.
    #[serde(default)]
    pub seed: u64,
}

impl StrategyConfig {
    pub fn new(kind: StrategyKind) -> Self {
        StrategyConfig { kind, seed: 0 }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.kind.validate()
    }

    /// Parses and validates a JSON strategy document.
    pub fn from_json(json: &str) -> Result<Self> {
        let cfg: StrategyConfig =
            serde_json::from_str(json).map_err(|e| Error::json("strategy config", e))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Samples the plan for one image.
    pub fn sample_plan(&self, clock: &EpochClock, rng: &mut impl Rng) -> AugPlan {
        match &self.kind {
            StrategyKind::Default => sample_default_plan(rng),
            StrategyKind::Trivial => sample_trivial_plan(rng),
            StrategyKind::Rand { n, m } => sample_rand_plan(*n, *m, rng),
            StrategyKind::Smart {
                n_color,
                n_geometric,
                m_color,
                m_geometric,
                p,
            } => sample_smart_plan(*n_color, *n_geometric, *m_color, *m_geometric, *p, rng),
            StrategyKind::SmartSampling { weights } => {
                sample_smartsampling_plan(weights, clock, rng)
            }
        }
    }
}

/// Which sampler to run, with its hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StrategyKind {
    /// Horizontal flip (p=0.5), rotation in [-45, 45] degrees, scaling in
    /// [0.65, 1.35].
    Default,
    /// One uniform op at a uniform magnitude per image.
    Trivial,
    /// `n` ops drawn uniformly with replacement (Identity included), all at
    /// magnitude `m`.
    Rand { n: u32, m: Magnitude },
    /// `n_color`/`n_geometric` distinct ops per group at the group
    /// magnitude, applied with probability `p`.
    Smart {
        n_color: u32,
        n_geometric: u32,
        m_color: Magnitude,
        m_geometric: Magnitude,
        p: f64,
    },
    /// Two weighted ops at a shared magnitude in [5, 30]; the apply
    /// probability anneals linearly over the training epochs.
    SmartSampling {
        #[serde(default = "WeightTable::default_table")]
        weights: WeightTable,
    },
}

impl StrategyKind {
    pub fn validate(&self) -> Result<()> {
        match self {
            StrategyKind::Rand { n, .. } => {
                let len = rand_ops().len() as u32;
                if *n < 1 || *n > len {
                    return Err(Error::InvalidConfig(format!(
                        "rand op count {n} outside [1, {len}]"
                    )));
                }
            }
            StrategyKind::Smart {
                n_color,
                n_geometric,
                p,
                ..
            } => {
                if *n_color > color_ops().len() as u32 {
                    return Err(Error::InvalidConfig(format!(
                        "n_color {n_color} exceeds color list size {}",
                        color_ops().len()
                    )));
                }
                if *n_geometric > geometric_ops().len() as u32 {
                    return Err(Error::InvalidConfig(format!(
                        "n_geometric {n_geometric} exceeds geometric list size {}",
                        geometric_ops().len()
                    )));
                }
                if !(p.is_finite() && (0.0..=1.0).contains(p)) {
                    return Err(Error::InvalidConfig(format!(
                        "probability {p} outside [0, 1]"
                    )));
                }
            }
            _ => {}
        }
        Ok(())
    }

    /// Short name matching the JSON tag.
    pub fn name(&self) -> &'static str {
        match self {
            StrategyKind::Default => "default",
            StrategyKind::Trivial => "trivial",
            StrategyKind::Rand { .. } => "rand",
            StrategyKind::Smart { .. } => "smart",
            StrategyKind::SmartSampling { .. } => "smartsampling",
        }
    }
}

/// Position within a training run, used to anneal the apply probability.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EpochClock {
    epoch: u64,
    total_epochs: u64,
}

impl EpochClock {
    pub fn new(epoch: u64, total_epochs: u64) -> Result<Self> {
        if total_epochs == 0 || epoch >= total_epochs {
            return Err(Error::InvalidConfig(format!(
                "epoch {epoch} outside [0, {total_epochs})"
            )));
        }
        Ok(EpochClock {
            epoch,
            total_epochs,
        })
    }

    /// Clock for strategies that do not anneal; P evaluates to 1.
    pub fn single() -> Self {
        EpochClock {
            epoch: 0,
            total_epochs: 1,
        }
    }

    pub fn epoch(&self) -> u64 {
        self.epoch
    }

    pub fn total_epochs(&self) -> u64 {
        self.total_epochs
    }

    /// The annealed apply probability as an exact rational
    /// `epoch / (total_epochs - 1)`: 0 in the first epoch, 1 in the last.
    /// A single-epoch run is pinned to 1.
    pub fn anneal_ratio(&self) -> (u64, u64) {
        if self.total_epochs == 1 {
            (1, 1)
        } else {
            (self.epoch, self.total_epochs - 1)
        }
    }

    pub fn anneal_probability(&self) -> f64 {
        let (num, den) = self.anneal_ratio();
        num as f64 / den as f64
    }
}

/// Draws `n` distinct elements uniformly without replacement, in draw order
/// (partial Fisher-Yates).
fn draw_without_replacement<T: Copy>(list: &[T], n: usize, rng: &mut impl Rng) -> Vec<T> {
    debug_assert!(n <= list.len());
    let mut pool = list.to_vec();
    for i in 0..n {
        let j = rng.random_range(i..pool.len());
        pool.swap(i, j);
    }
    pool.truncate(n);
    pool
}

fn draw_sign(op: OpName, rng: &mut impl Rng) -> Sign {
    if op_spec(op).signed {
        if rng.random::<bool>() {
            Sign::Plus
        } else {
            Sign::Minus
        }
    } else {
        Sign::Plus
    }
}

/// Samples a plan with `n_color` distinct color ops at `m_color` and
/// `n_geometric` distinct geometric ops at `m_geometric`, color steps
/// first; with probability `1 - p` the image is left untouched.
pub fn sample_smart_plan(
    n_color: u32,
    n_geometric: u32,
    m_color: Magnitude,
    m_geometric: Magnitude,
    p: f64,
    rng: &mut impl Rng,
) -> AugPlan {
    let var: f64 = rng.random();
    if var >= p {
        return AugPlan::skip();
    }
    let mut steps = Vec::with_capacity((n_color + n_geometric) as usize);
    for name in draw_without_replacement(color_ops(), n_color as usize, rng) {
        let sign = draw_sign(name, rng);
        steps.push(PlanStep::Op {
            name,
            magnitude: m_color,
            sign,
        });
    }
    for name in draw_without_replacement(geometric_ops(), n_geometric as usize, rng) {
        let sign = draw_sign(name, rng);
        steps.push(PlanStep::Op {
            name,
            magnitude: m_geometric,
            sign,
        });
    }
    AugPlan::of_steps(steps)
}

/// Samples a plan of exactly two distinct weighted ops sharing one uniform
/// magnitude in [5, 30]; the apply probability comes from the epoch clock.
pub fn sample_smartsampling_plan(
    weights: &WeightTable,
    clock: &EpochClock,
    rng: &mut impl Rng,
) -> AugPlan {
    let p = clock.anneal_probability();
    let var: f64 = rng.random();
    if var >= p {
        return AugPlan::skip();
    }
    let (first, second) = weights.sample_two(rng);
    let magnitude = Magnitude::new(rng.random_range(5..=30u8)).expect("range within bounds");
    let steps = [first, second]
        .into_iter()
        .map(|name| PlanStep::Op {
            name,
            magnitude,
            sign: draw_sign(name, rng),
        })
        .collect();
    AugPlan::of_steps(steps)
}

/// Samples `n` ops uniformly with replacement from `list`, all at
/// magnitude `m`. Always augments; Identity draws supply the no-op mass.
pub fn sample_rand_plan_from(list: &[OpName], n: u32, m: Magnitude, rng: &mut impl Rng) -> AugPlan {
    let steps = (0..n)
        .map(|_| {
            let name = list[rng.random_range(0..list.len())];
            PlanStep::Op {
                name,
                magnitude: m,
                sign: draw_sign(name, rng),
            }
        })
        .collect();
    AugPlan::of_steps(steps)
}

/// [`sample_rand_plan_from`] over the standard 13-op list (with Identity).
pub fn sample_rand_plan(n: u32, m: Magnitude, rng: &mut impl Rng) -> AugPlan {
    sample_rand_plan_from(rand_ops(), n, m, rng)
}

/// Samples one op and one magnitude uniformly from `list` x [0, 30].
pub fn sample_trivial_plan_from(list: &[OpName], rng: &mut impl Rng) -> AugPlan {
    let name = list[rng.random_range(0..list.len())];
    let magnitude = Magnitude::new(rng.random_range(0..=30u8)).expect("range within bounds");
    AugPlan::of_steps(vec![PlanStep::Op {
        name,
        magnitude,
        sign: draw_sign(name, rng),
    }])
}

/// [`sample_trivial_plan_from`] over the standard 13-op list.
pub fn sample_trivial_plan(rng: &mut impl Rng) -> AugPlan {
    sample_trivial_plan_from(rand_ops(), rng)
}

/// The baseline: horizontal flip with probability 0.5, rotation uniform on
/// [-45, 45] degrees, scale factor `1 + u` with `u` uniform on
/// [-0.35, 0.35]. Rotation and scale steps are always present (possibly at
/// identity parameters); all three are geometric.
pub fn sample_default_plan(rng: &mut impl Rng) -> AugPlan {
    let flip: f64 = rng.random();
    let degrees = rng.random_range(-45.0..=45.0);
    let factor = 1.0 + rng.random_range(-0.35..=0.35);
    let mut steps = Vec::with_capacity(3);
    if flip < 0.5 {
        steps.push(PlanStep::HFlip);
    }
    steps.push(PlanStep::Rotate { degrees });
    steps.push(PlanStep::Scale { factor });
    AugPlan::of_steps(steps)
}
