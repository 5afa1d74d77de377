//! Per-operation sampling weights for the weighted two-op sampler.

use crate::error::{Error, Result};
use crate::raster::{smartsampling_ops, OpName};
use rand::Rng;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::collections::BTreeMap;

/// Non-negative sampling weights over the 12-op list (no Identity; the
/// apply-probability gate plays that role).
///
/// Serialized as a `{ "OpName": weight }` JSON map. Missing ops get weight
/// 0; at least two ops must have positive weight.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightTable {
    // Indexed in `smartsampling_ops()` order.
    weights: [f64; 12],
}

impl WeightTable {
    pub fn from_entries(entries: &[(OpName, f64)]) -> Result<Self> {
        let mut weights = [0.0; 12];
        for &(op, w) in entries {
            if op == OpName::Identity {
                return Err(Error::InvalidConfig(
                    "Identity cannot carry a sampling weight".into(),
                ));
            }
            if !w.is_finite() || w < 0.0 {
                return Err(Error::InvalidConfig(format!(
                    "weight for {op} must be finite and non-negative, got {w}"
                )));
            }
            weights[op as usize] = w;
        }
        let table = WeightTable { weights };
        table.check()?;
        Ok(table)
    }

    fn check(&self) -> Result<()> {
        if self.weights.iter().filter(|&&w| w > 0.0).count() < 2 {
            return Err(Error::DegenerateWeights);
        }
        Ok(())
    }

    pub fn weight(&self, op: OpName) -> f64 {
        if op == OpName::Identity {
            0.0
        } else {
            self.weights[op as usize]
        }
    }

    /// Weights normalized to a probability distribution, in
    /// [`smartsampling_ops`] order.
    pub fn probabilities(&self) -> [f64; 12] {
        let total: f64 = self.weights.iter().sum();
        let mut out = self.weights;
        for w in &mut out {
            *w /= total;
        }
        out
    }

    /// Draws two distinct ops, each proportionally to its weight, the second
    /// from the renormalized remainder (weighted without replacement).
    pub fn sample_two(&self, rng: &mut impl Rng) -> (OpName, OpName) {
        let mut pool = self.weights;
        let first = weighted_index(&pool, rng);
        pool[first] = 0.0;
        let second = weighted_index(&pool, rng);
        (smartsampling_ops()[first], smartsampling_ops()[second])
    }

    /// The shipped default table. Values are engineering defaults derived
    /// from published per-op improvement studies on natural-image
    /// classification; rotation dominates. Override via a JSON weights file
    /// for task-specific tables.
    pub fn default_table() -> Self {
        WeightTable::from_entries(&[
            (OpName::Rotate, 0.30),
            (OpName::ShearX, 0.15),
            (OpName::ShearY, 0.15),
            (OpName::TranslateX, 0.10),
            (OpName::TranslateY, 0.10),
            (OpName::AutoContrast, 0.08),
            (OpName::Sharpness, 0.05),
            (OpName::Equalize, 0.04),
            (OpName::Color, 0.03),
        ])
        .expect("static table is valid")
    }
}

fn weighted_index(weights: &[f64; 12], rng: &mut impl Rng) -> usize {
    let total: f64 = weights.iter().sum();
    debug_assert!(total > 0.0);
    let u = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            acc += w;
            last_positive = i;
            if u < acc {
                return i;
            }
        }
    }
    // Float round-off at the top of the cumulative sum.
    last_positive
}

impl Serialize for WeightTable {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let map: BTreeMap<&str, f64> = smartsampling_ops()
            .iter()
            .map(|&op| (op.as_str(), self.weight(op)))
            .collect();
        map.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for WeightTable {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let map: BTreeMap<String, f64> = BTreeMap::deserialize(deserializer)?;
        let mut entries = Vec::with_capacity(map.len());
        for (name, w) in map {
            let op = OpName::parse(&name).map_err(D::Error::custom)?;
            entries.push((op, w));
        }
        WeightTable::from_entries(&entries).map_err(D::Error::custom)
    }
}
