//! The per-image augmentation plan: the replayable record between the
//! samplers and the kernels. Applying the same plan to the same inputs
//! always produces bit-identical outputs.

use super::geometry::{horizontal_flip, scale_about_center};
use super::ops::{magnitude_to_param, op_spec, Magnitude, OpKind, OpName, Sign};
use super::{apply_color_op, apply_geometric_op, LabelMask, Raster};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// One resolved augmentation step.
///
/// `Op` covers the magnitude-mapped operations; the remaining variants are
/// the baseline strategy's continuous-parameter steps, which do not go
/// through the magnitude model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "step", rename_all = "snake_case")]
pub enum PlanStep {
    Op {
        name: OpName,
        magnitude: Magnitude,
        sign: Sign,
    },
    HFlip,
    Rotate {
        degrees: f64,
    },
    Scale {
        factor: f64,
    },
}

impl PlanStep {
    /// True when applying the step cannot change any pixel. Zero magnitude
    /// means identity factor / zero displacement / threshold 256 for every
    /// parameterized op; AutoContrast and Equalize act at any magnitude.
    pub fn is_noop(&self) -> bool {
        match self {
            PlanStep::Op {
                name, magnitude, ..
            } => {
                *name == OpName::Identity
                    || (!op_spec(*name).parameterless && magnitude.value() == 0)
            }
            PlanStep::HFlip => false,
            PlanStep::Rotate { degrees } => *degrees == 0.0,
            PlanStep::Scale { factor } => *factor == 1.0,
        }
    }
}

/// The per-image resolved decision: apply-or-not plus the ordered steps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AugPlan {
    pub augment: bool,
    #[serde(default)]
    pub steps: Vec<PlanStep>,
}

impl AugPlan {
    /// The do-not-augment plan.
    pub fn skip() -> Self {
        AugPlan {
            augment: false,
            steps: Vec::new(),
        }
    }

    pub fn of_steps(steps: Vec<PlanStep>) -> Self {
        AugPlan {
            augment: true,
            steps,
        }
    }

    fn validate(&self) -> Result<()> {
        if !self.augment && !self.steps.is_empty() {
            return Err(Error::InvalidConfig(
                "plan with augment=false must have no steps".into(),
            ));
        }
        Ok(())
    }
}

/// Applies a plan to a paired image and mask.
///
/// Color steps transform the image only; geometric steps warp both planes.
pub fn apply_plan(plan: &AugPlan, image: &Raster, mask: &LabelMask) -> Result<(Raster, LabelMask)> {
    plan.validate()?;
    mask.check_paired(image)?;
    if !plan.augment {
        return Ok((image.clone(), mask.clone()));
    }
    let mut img = image.clone();
    let mut msk = mask.clone();
    for step in &plan.steps {
        match *step {
            PlanStep::Op {
                name,
                magnitude,
                sign,
            } => {
                let op = op_spec(name);
                match op.kind {
                    OpKind::Identity => {}
                    OpKind::Color => {
                        let param = magnitude_to_param(op, magnitude, sign);
                        img = apply_color_op(op, param, &img)?;
                    }
                    OpKind::Geometric => {
                        let param = magnitude_to_param(op, magnitude, sign);
                        let (i, m) = apply_geometric_op(op, param, &img, &msk)?;
                        img = i;
                        msk = m;
                    }
                }
            }
            PlanStep::HFlip => {
                let (i, m) = horizontal_flip(&img, &msk)?;
                img = i;
                msk = m;
            }
            PlanStep::Rotate { degrees } => {
                let t = super::geometry::AffineTransform::rotation_about_center(
                    degrees,
                    img.width(),
                    img.height(),
                );
                let (i, m) = super::geometry::warp_affine(&img, &msk, &t)?;
                img = i;
                msk = m;
            }
            PlanStep::Scale { factor } => {
                let (i, m) = scale_about_center(&img, &msk, factor)?;
                img = i;
                msk = m;
            }
        }
    }
    Ok((img, msk))
}
