//! The operation catalog and the magnitude-to-parameter mapping.
//!
//! Magnitudes are integers in `[0, 30]` mapped linearly onto each
//! operation's parameter range so that larger magnitudes always mean a
//! stronger effect:
//!
//! * enhancement factors (Sharpness, Color, Contrast, Brightness) are
//!   symmetric around the identity factor 1.0: `1 + sign * (m/30) * 0.9`,
//!   spanning (0.1, 1.9);
//! * Solarize maps inverted, `256 - (m/30) * 256`, so a higher magnitude
//!   lowers the threshold and inverts more pixels;
//! * geometric displacements/angles map as `sign * (m/30) * hi`;
//! * AutoContrast, Equalize and Identity take no parameter.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Augmentation operation names.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum OpName {
    Sharpness,
    AutoContrast,
    Equalize,
    Solarize,
    Color,
    Contrast,
    Brightness,
    Rotate,
    ShearX,
    ShearY,
    TranslateX,
    TranslateY,
    Identity,
}

impl OpName {
    /// All operation names, color ops first, then geometric, then Identity.
    pub const ALL: [OpName; 13] = [
        OpName::Sharpness,
        OpName::AutoContrast,
        OpName::Equalize,
        OpName::Solarize,
        OpName::Color,
        OpName::Contrast,
        OpName::Brightness,
        OpName::Rotate,
        OpName::ShearX,
        OpName::ShearY,
        OpName::TranslateX,
        OpName::TranslateY,
        OpName::Identity,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            OpName::Sharpness => "Sharpness",
            OpName::AutoContrast => "AutoContrast",
            OpName::Equalize => "Equalize",
            OpName::Solarize => "Solarize",
            OpName::Color => "Color",
            OpName::Contrast => "Contrast",
            OpName::Brightness => "Brightness",
            OpName::Rotate => "Rotate",
            OpName::ShearX => "ShearX",
            OpName::ShearY => "ShearY",
            OpName::TranslateX => "TranslateX",
            OpName::TranslateY => "TranslateY",
            OpName::Identity => "Identity",
        }
    }

    pub fn parse(name: &str) -> Result<OpName> {
        OpName::ALL
            .iter()
            .copied()
            .find(|op| op.as_str().eq_ignore_ascii_case(name))
            .ok_or_else(|| Error::UnknownOp(name.to_string()))
    }
}

impl std::fmt::Display for OpName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Whether an op edits pixel values, warps geometry, or does nothing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OpKind {
    Color,
    Geometric,
    Identity,
}

impl std::fmt::Display for OpKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            OpKind::Color => f.write_str("color"),
            OpKind::Geometric => f.write_str("geometric"),
            OpKind::Identity => f.write_str("identity"),
        }
    }
}

/// Static description of one augmentation operation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpSpec {
    pub name: OpName,
    pub kind: OpKind,
    /// Parameter bounds (lo, hi).
    pub range: (f64, f64),
    /// Whether a random sign flips the effect direction.
    pub signed: bool,
    /// AutoContrast, Equalize and Identity take no parameter.
    pub parameterless: bool,
}

#[rustfmt::skip]
const CATALOG: [OpSpec; 13] = [
    OpSpec { name: OpName::Sharpness, kind: OpKind::Color, range: (0.1, 1.9), signed: true, parameterless: false },
    OpSpec { name: OpName::AutoContrast, kind: OpKind::Color, range: (0.0, 1.0), signed: false, parameterless: true },
    OpSpec { name: OpName::Equalize, kind: OpKind::Color, range: (0.0, 1.0), signed: false, parameterless: true },
    OpSpec { name: OpName::Solarize, kind: OpKind::Color, range: (0.0, 256.0), signed: false, parameterless: false },
    OpSpec { name: OpName::Color, kind: OpKind::Color, range: (0.1, 1.9), signed: true, parameterless: false },
    OpSpec { name: OpName::Contrast, kind: OpKind::Color, range: (0.1, 1.9), signed: true, parameterless: false },
    OpSpec { name: OpName::Brightness, kind: OpKind::Color, range: (0.1, 1.9), signed: true, parameterless: false },
    OpSpec { name: OpName::Rotate, kind: OpKind::Geometric, range: (0.0, 30.0), signed: true, parameterless: false },
    OpSpec { name: OpName::ShearX, kind: OpKind::Geometric, range: (0.0, 0.3), signed: true, parameterless: false },
    OpSpec { name: OpName::ShearY, kind: OpKind::Geometric, range: (0.0, 0.3), signed: true, parameterless: false },
    OpSpec { name: OpName::TranslateX, kind: OpKind::Geometric, range: (0.0, 0.33), signed: true, parameterless: false },
    OpSpec { name: OpName::TranslateY, kind: OpKind::Geometric, range: (0.0, 0.33), signed: true, parameterless: false },
    OpSpec { name: OpName::Identity, kind: OpKind::Identity, range: (0.0, 0.0), signed: false, parameterless: true },
];

/// Looks up the static spec for an operation.
pub fn op_spec(name: OpName) -> &'static OpSpec {
    &CATALOG[name as usize]
}

/// The 7 color operations.
pub fn color_ops() -> &'static [OpName] {
    &OpName::ALL[..7]
}

/// The 5 geometric operations.
pub fn geometric_ops() -> &'static [OpName] {
    &OpName::ALL[7..12]
}

/// The 12-op list sampled by the weighted strategy (no Identity).
pub fn smartsampling_ops() -> &'static [OpName] {
    &OpName::ALL[..12]
}

/// The 13-op list including Identity, used by the uniform samplers.
pub fn rand_ops() -> &'static [OpName] {
    &OpName::ALL[..13]
}

/// Integer augmentation strength in `[0, 30]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct Magnitude(u8);

impl Magnitude {
    pub const MAX: u8 = 30;

    pub fn new(value: u8) -> Result<Self> {
        if value > Self::MAX {
            return Err(Error::MagnitudeOutOfRange(value as i64));
        }
        Ok(Magnitude(value))
    }

    pub fn value(&self) -> u8 {
        self.0
    }

    /// Fraction of the full range, `value / 30`.
    pub fn fraction(&self) -> f64 {
        self.0 as f64 / Self::MAX as f64
    }
}

impl TryFrom<u8> for Magnitude {
    type Error = Error;
    fn try_from(value: u8) -> Result<Self> {
        Magnitude::new(value)
    }
}

impl From<Magnitude> for u8 {
    fn from(m: Magnitude) -> u8 {
        m.0
    }
}

impl std::fmt::Display for Magnitude {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

/// Direction applied to signed operations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "i8", into = "i8")]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn factor(&self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

impl TryFrom<i8> for Sign {
    type Error = Error;
    fn try_from(value: i8) -> Result<Self> {
        match value {
            1 => Ok(Sign::Plus),
            -1 => Ok(Sign::Minus),
            other => Err(Error::InvalidConfig(format!(
                "sign must be 1 or -1, got {other}"
            ))),
        }
    }
}

impl From<Sign> for i8 {
    fn from(s: Sign) -> i8 {
        match s {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }
}

/// Maps an integer magnitude to the operation's real parameter.
///
/// The sign is ignored for unsigned ops; parameterless ops return 0.0,
/// which their kernels ignore.
pub fn magnitude_to_param(op: &OpSpec, m: Magnitude, sign: Sign) -> f64 {
    let f = m.fraction();
    let s = if op.signed { sign.factor() } else { 1.0 };
    if op.parameterless {
        return 0.0;
    }
    match op.name {
        OpName::Sharpness | OpName::Color | OpName::Contrast | OpName::Brightness => {
            1.0 + s * f * 0.9
        }
        OpName::Solarize => 256.0 - f * 256.0,
        _ => {
            let (lo, hi) = op.range;
            s * (lo + f * (hi - lo))
        }
    }
}
