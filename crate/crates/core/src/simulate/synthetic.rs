//! Desk-scale synthetic image classes: distinct structured patterns that a
//! small classifier separates easily and whose orientation is (for most
//! classes) recoverable, so rotation prediction has something to learn.
//! One class — concentric rings — is four-fold rotation-symmetric by
//! construction, exercising the case where rotation confusion alone is
//! uninformative and the classification-confusion term has to carry the
//! ranking. Every class spans a per-sample difficulty range (crisp through
//! washed-out and noisy), so novelty varies within classes and not just
//! between them.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::dataset::{ClassLabel, Dataset, Image, ImageSet, SampleId};
use crate::error::{PalError, Result};

/// Per-pixel additive Gaussian noise level for a perfectly crisp sample.
const NOISE_SD_BASE: f64 = 0.06;

/// Extra noise applied to the hardest samples on top of the base level.
const NOISE_SD_SPAN: f64 = 0.18;

/// Fraction of pattern contrast lost by the hardest samples. Kept mild so
/// even the hardest samples stay learnable: heavy noise degrades fine
/// oriented detail long before it hides the coarse class shape, which is
/// how difficult photographs behave.
const CONTRAST_LOSS: f64 = 0.20;

/// Pixel values are clamped into this range after noise.
const PIXEL_MIN: f32 = 0.02;
const PIXEL_MAX: f32 = 0.98;

/// Generate `class_count * samples_per_class` square grayscale images,
/// sample-major by class (ids `0..per` are class 0, and so on). Fixed
/// seeds give bit-identical datasets.
///
/// Base patterns, cycled with inversion for higher class indices:
/// 0: horizontal sine stripes with a downward brightness ramp;
/// 1: a bright blob near the top-left corner;
/// 2: a soft horizontal edge, brighter at the bottom;
/// 3: concentric rings about the image center (rotation-symmetric).
pub fn generate_synthetic_dataset(
    class_count: u32,
    samples_per_class: usize,
    image_size: usize,
    seed: u64,
) -> Result<Dataset> {
    if image_size < 8 {
        return Err(PalError::InvalidConfig(format!(
            "image_size must be at least 8, got {image_size}"
        )));
    }
    if class_count == 0 || samples_per_class == 0 {
        return Err(PalError::InvalidConfig(
            "class_count and samples_per_class must be positive".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut images = Vec::with_capacity(class_count as usize * samples_per_class);
    let mut labels = Vec::with_capacity(images.capacity());
    for class in 0..class_count {
        for _ in 0..samples_per_class {
            images.push(render_sample(class, image_size, &mut rng));
            labels.push(class);
        }
    }
    Dataset::new(ImageSet::from_images(images)?, labels, class_count)
}

fn render_sample(class: ClassLabel, size: usize, rng: &mut ChaCha8Rng) -> Image {
    let base = class % 4;
    let invert = (class / 4) % 2 == 1;
    let s1 = (size - 1) as f64;

    // small per-sample randomization so samples within a class differ by
    // more than pixel noise; kept narrow so class centroids stay sharp
    let phase: f64 = rng.gen::<f64>() * 0.15;
    let jx: f64 = (rng.gen::<f64>() - 0.5) * 0.16;
    let jy: f64 = (rng.gen::<f64>() - 0.5) * 0.16;

    // per-sample difficulty: the cube keeps most samples crisp while a
    // tail is progressively degraded — washed-out contrast plus heavier
    // noise — so each class spans easy through genuinely hard examples
    // the way photographic pools do
    let hardness: f64 = rng.gen::<f64>().powi(3);
    let contrast = 1.0 - CONTRAST_LOSS * hardness;
    let noise = Normal::new(0.0, NOISE_SD_BASE + NOISE_SD_SPAN * hardness).unwrap();

    let mut img = Image::zeros((1, size, size));
    for r in 0..size {
        for c in 0..size {
            let x = c as f64 / s1;
            let y = r as f64 / s1;
            let v = match base {
                // horizontal stripes, brighter toward the bottom
                0 => {
                    let stripes = (std::f64::consts::TAU * (2.0 * y + phase)).sin();
                    0.5 + 0.4 * stripes * (0.4 + 0.6 * y)
                }
                // corner blob
                1 => {
                    let dx = x - (0.25 + jx);
                    let dy = y - (0.25 + jy);
                    0.15 + 0.75 * (-(dx * dx + dy * dy) / 0.08).exp()
                }
                // soft horizontal edge
                2 => {
                    let t = 0.5 + jy;
                    let z = (y - t) / 0.08;
                    0.2 + 0.6 / (1.0 + (-z).exp())
                }
                // concentric rings about the center: the radial coordinate
                // is invariant under quarter-turns of the pixel grid
                _ => {
                    let rad = ((x - 0.5).powi(2) + (y - 0.5).powi(2)).sqrt();
                    0.5 + 0.4 * (std::f64::consts::TAU * (3.0 * rad + phase)).cos()
                }
            };
            let v = 0.5 + contrast * (v - 0.5) + noise.sample(rng);
            let v = if invert { 1.0 - v } else { v };
            img[[0, r, c]] = (v as f32).clamp(PIXEL_MIN, PIXEL_MAX);
        }
    }
    img
}

/// A disjoint train/evaluation partition of a dataset's sample ids.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitIndices {
    pub train: Vec<SampleId>,
    pub test: Vec<SampleId>,
}

/// Stratified split: per true class, `round(test_fraction * class size)`
/// samples go to the test side, chosen uniformly per seed. Both sides come
/// back sorted by id.
pub fn stratified_split(dataset: &Dataset, test_fraction: f64, seed: u64) -> Result<SplitIndices> {
    if !(0.0..1.0).contains(&test_fraction) {
        return Err(PalError::InvalidConfig(format!(
            "test_fraction must be in [0, 1), got {test_fraction}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for class in 0..dataset.class_count {
        let members: Vec<SampleId> = dataset
            .ids()
            .filter(|&id| dataset.true_label(id) == class)
            .collect();
        let take = (test_fraction * members.len() as f64).round() as usize;
        let chosen: std::collections::BTreeSet<usize> =
            rand::seq::index::sample(&mut rng, members.len(), take)
                .into_iter()
                .collect();
        for (i, &id) in members.iter().enumerate() {
            if chosen.contains(&i) {
                test.push(id);
            } else {
                train.push(id);
            }
        }
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok(SplitIndices { train, test })
}
