//! Rotation transform and acquisition score functions.
//!
//! All scores use natural logarithms and `f64` arithmetic. Probabilities
//! are clamped to [`LOG_EPS`] before any logarithm so that hard-zero
//! predictions yield large-but-finite scores instead of infinities.
//! Sign convention: higher score = more novel = selected first.

use ndarray::Array3;

use crate::dataset::{Image, ImageView};
use crate::error::{PalError, Result};

/// Number of rotation classes (0°, 90°, 180°, 270°).
pub const ROTATION_COUNT: usize = 4;

/// Lower clamp applied to probabilities before taking logarithms.
pub const LOG_EPS: f64 = 1e-12;

/// Tolerance on the total mass of a probability vector.
const PMF_SUM_TOL: f64 = 1e-6;

/// A validated probability mass function: finite, non-negative entries that
/// sum to one (within `1e-6`).
#[derive(Debug, Clone, PartialEq)]
pub struct Pmf(Vec<f64>);

impl Pmf {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(PalError::InvalidPmf("empty probability vector".into()));
        }
        for &v in &values {
            if !v.is_finite() || v < 0.0 {
                return Err(PalError::InvalidPmf(format!(
                    "entry {v} is not a probability"
                )));
            }
        }
        let sum: f64 = values.iter().sum();
        if (sum - 1.0).abs() > PMF_SUM_TOL {
            return Err(PalError::InvalidPmf(format!("mass sums to {sum}, not 1")));
        }
        Ok(Self(values))
    }

    /// Exact uniform distribution over `k` classes.
    pub fn uniform(k: usize) -> Self {
        assert!(k > 0, "uniform pmf needs at least one class");
        Self(vec![1.0 / k as f64; k])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    /// Probability of class `i`.
    pub fn prob(&self, i: usize) -> f64 {
        self.0[i]
    }

    /// Index of the largest probability; the first such index on exact ties.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &v) in self.0.iter().enumerate().skip(1) {
            if v > self.0[best] {
                best = i;
            }
        }
        best
    }
}

/// A quarter-turn count in {0, 1, 2, 3}, meaning rotation by 90·i degrees
/// counter-clockwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct RotationIndex(u8);

impl RotationIndex {
    /// All four rotations in order 0°, 90°, 180°, 270°.
    pub const ALL: [RotationIndex; ROTATION_COUNT] = [
        RotationIndex(0),
        RotationIndex(1),
        RotationIndex(2),
        RotationIndex(3),
    ];

    pub fn new(i: u8) -> Result<Self> {
        if i >= ROTATION_COUNT as u8 {
            return Err(PalError::InvalidConfig(format!(
                "rotation index {i} outside 0..4"
            )));
        }
        Ok(Self(i))
    }

    pub fn value(self) -> usize {
        self.0 as usize
    }
}

/// Rotate a (C, H, W) image counter-clockwise by `i` quarter turns. Each
/// channel rotates independently. Non-square images are rejected.
pub fn rotate90(image: ImageView<'_>, i: RotationIndex) -> Result<Image> {
    let (channels, h, w) = image.dim();
    if h != w {
        return Err(PalError::ShapeMismatch {
            expected: "square image".into(),
            got: format!("{h}x{w}"),
        });
    }
    Ok(match i.value() {
        0 => image.to_owned(),
        1 => Array3::from_shape_fn((channels, h, w), |(ch, r, c)| image[[ch, c, w - 1 - r]]),
        2 => Array3::from_shape_fn((channels, h, w), |(ch, r, c)| {
            image[[ch, h - 1 - r, w - 1 - c]]
        }),
        _ => Array3::from_shape_fn((channels, h, w), |(ch, r, c)| image[[ch, h - 1 - c, r]]),
    })
}

fn clamped_ln(p: f64) -> f64 {
    p.max(LOG_EPS).ln()
}

/// Self-supervision confusion score: minus the sum, over the four rotated
/// copies of a sample, of the probability the rotation head assigns to the
/// rotation actually applied. `rotation_probs[i]` is the head's output on
/// the copy rotated by `i` quarter turns. Range [-4, 0]; confidently
/// recognized rotations push the score toward -4, so higher means the
/// sample confuses the rotation head.
pub fn ssl_confusion_score(rotation_probs: &[Pmf; ROTATION_COUNT]) -> Result<f64> {
    for p in rotation_probs {
        if p.len() != ROTATION_COUNT {
            return Err(PalError::InvalidPmf(format!(
                "rotation pmf has {} classes, expected {ROTATION_COUNT}",
                p.len()
            )));
        }
    }
    Ok(-rotation_probs
        .iter()
        .enumerate()
        .map(|(i, p)| p.prob(i))
        .sum::<f64>())
}

/// Classification confusion score: minus the KL divergence from the
/// uniform distribution to the predicted class posterior, `-KL(U || h)`.
/// Always <= 0, with equality exactly when `h` is uniform (up to the
/// probability clamp). Needs at least two classes.
pub fn classification_confusion_score(class_probs: &Pmf) -> Result<f64> {
    if class_probs.len() < 2 {
        return Err(PalError::InvalidPmf(
            "classification confusion needs at least 2 classes".into(),
        ));
    }
    let c = class_probs.len() as f64;
    let u = 1.0 / c;
    Ok(-class_probs
        .values()
        .iter()
        .map(|&q| u * (u.ln() - clamped_ln(q)))
        .sum::<f64>())
}

/// Diversity score component: identical arithmetic to
/// [`ssl_confusion_score`], evaluated with rotation probabilities from the
/// fine-tuned clone of the rotation head rather than the frozen one. Low
/// for samples resembling already-selected ones.
pub fn diversity_component(rotation_probs_from_clone: &[Pmf; ROTATION_COUNT]) -> Result<f64> {
    ssl_confusion_score(rotation_probs_from_clone)
}

/// Shannon entropy in nats, with the `0 ln 0 = 0` convention.
pub fn shannon_entropy(pmf: &Pmf) -> f64 {
    -pmf.values()
        .iter()
        .map(|&p| if p > 0.0 { p * clamped_ln(p) } else { 0.0 })
        .sum::<f64>()
}

/// Hybrid confusion score `s_ssl + lambda1 * s_cls`.
pub fn hybrid_score(s_ssl: f64, s_cls: f64, lambda1: f64) -> f64 {
    debug_assert!(lambda1 >= 0.0);
    s_ssl + lambda1 * s_cls
}

/// Full acquisition score `s_ssl + lambda1 * s_cls + lambda2 * s_div`.
pub fn combined_score(s_ssl: f64, s_cls: f64, s_div: f64, lambda1: f64, lambda2: f64) -> f64 {
    debug_assert!(lambda1 >= 0.0 && lambda2 >= 0.0);
    s_ssl + lambda1 * s_cls + lambda2 * s_div
}

/// Bounded variant of the hybrid score: `s_ssl + lambda1 * H(h)`, replacing
/// the KL-based uncertainty term with Shannon entropy. Satisfies
/// `|result - s_ssl| <= lambda1 * ln(C)`.
pub fn entropy_variant_score(s_ssl: f64, class_probs: &Pmf, lambda1: f64) -> f64 {
    s_ssl + lambda1 * shannon_entropy(class_probs)
}
