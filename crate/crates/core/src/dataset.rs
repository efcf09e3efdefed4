//! Datasets: square images with per-sample class labels, plus the on-disk
//! manifest format (JSON manifest + flat little-endian f32 tensor file).

use std::collections::BTreeMap;
use std::fs;
use std::io::{Read, Seek, SeekFrom, Write};
use std::path::Path;

use ndarray::{Array3, ArrayView3};
use serde::{Deserialize, Serialize};

use crate::error::{PalError, Result};

/// Index of a sample within a fixed dataset ordering. Stable across a run.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct SampleId(pub u32);

impl SampleId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl std::fmt::Display for SampleId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Class index assigned by an oracle or ground truth.
pub type ClassLabel = u32;

/// Owned image tensor, channel-first (C, H, W), values in [0, 1].
pub type Image = Array3<f32>;

/// Borrowed image tensor, channel-first (C, H, W).
pub type ImageView<'a> = ArrayView3<'a, f32>;

/// A collection of identically shaped square images, stored contiguously.
///
/// Strategies and networks only ever see this type; class labels travel
/// separately (true labels in [`Dataset`], oracle labels in the pool).
#[derive(Debug, Clone, PartialEq)]
pub struct ImageSet {
    channels: usize,
    side: usize,
    data: Vec<f32>,
}

impl ImageSet {
    /// Build from per-sample (C, H, W) tensors. All images must share one
    /// square shape and hold values in [0, 1].
    pub fn from_images(images: Vec<Image>) -> Result<Self> {
        let first = images
            .first()
            .ok_or_else(|| PalError::Dataset("dataset has no samples".into()))?;
        let (c, h, w) = first.dim();
        if h != w {
            return Err(PalError::Dataset(format!(
                "images must be square, got {h}x{w}"
            )));
        }
        let mut data = Vec::with_capacity(images.len() * c * h * w);
        for (i, img) in images.iter().enumerate() {
            if img.dim() != (c, h, w) {
                return Err(PalError::Dataset(format!(
                    "sample {i} has shape {:?}, expected {:?}",
                    img.dim(),
                    (c, h, w)
                )));
            }
            for &v in img.iter() {
                if !(0.0..=1.0).contains(&v) {
                    return Err(PalError::Dataset(format!(
                        "sample {i} has pixel value {v} outside [0, 1]"
                    )));
                }
            }
            data.extend(img.iter().copied());
        }
        Ok(Self {
            channels: c,
            side: h,
            data,
        })
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.sample_len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    /// Side length of the square images.
    pub fn side(&self) -> usize {
        self.side
    }

    fn sample_len(&self) -> usize {
        self.channels * self.side * self.side
    }

    /// Borrow sample `id` as a (C, H, W) view.
    pub fn image(&self, id: SampleId) -> ImageView<'_> {
        let n = self.sample_len();
        let start = id.index() * n;
        ArrayView3::from_shape(
            (self.channels, self.side, self.side),
            &self.data[start..start + n],
        )
        .expect("contiguous sample slice")
    }

    /// Subset by ids, re-indexed densely in the given order.
    pub fn subset(&self, ids: &[SampleId]) -> Self {
        let n = self.sample_len();
        let mut data = Vec::with_capacity(ids.len() * n);
        for id in ids {
            let start = id.index() * n;
            data.extend_from_slice(&self.data[start..start + n]);
        }
        Self {
            channels: self.channels,
            side: self.side,
            data,
        }
    }
}

/// A fixed pool of images with ground-truth labels.
///
/// True labels are consumed only by the simulation layer (oracle
/// construction and held-out evaluation); query strategies receive the
/// [`ImageSet`] alone.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub images: ImageSet,
    pub true_labels: Vec<ClassLabel>,
    pub class_count: u32,
}

impl Dataset {
    pub fn new(images: ImageSet, true_labels: Vec<ClassLabel>, class_count: u32) -> Result<Self> {
        if true_labels.len() != images.len() {
            return Err(PalError::Dataset(format!(
                "{} labels for {} images",
                true_labels.len(),
                images.len()
            )));
        }
        if class_count == 0 {
            return Err(PalError::Dataset("class_count must be positive".into()));
        }
        if let Some(&bad) = true_labels.iter().find(|&&l| l >= class_count) {
            return Err(PalError::Dataset(format!(
                "label {bad} out of range for {class_count} classes"
            )));
        }
        Ok(Self {
            images,
            true_labels,
            class_count,
        })
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = SampleId> + '_ {
        (0..self.len() as u32).map(SampleId)
    }

    pub fn true_label(&self, id: SampleId) -> ClassLabel {
        self.true_labels[id.index()]
    }

    /// Subset by ids, re-indexed densely in the given order.
    pub fn subset(&self, ids: &[SampleId]) -> Self {
        Self {
            images: self.images.subset(ids),
            true_labels: ids.iter().map(|&id| self.true_label(id)).collect(),
            class_count: self.class_count,
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct ManifestSample {
    id: u32,
    label: ClassLabel,
    file: String,
    /// Byte offset of the sample's tensor within `file`.
    offset: u64,
}

#[derive(Debug, Serialize, Deserialize)]
struct Manifest {
    height: usize,
    width: usize,
    channels: usize,
    class_count: u32,
    samples: Vec<ManifestSample>,
}

const DATA_FILE: &str = "images.bin";
const MANIFEST_FILE: &str = "manifest.json";

/// Write a dataset directory: `manifest.json` plus a flat binary of f32
/// little-endian tensors, sample-major and row-major (H, W, C order).
pub fn save_dataset(dataset: &Dataset, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let side = dataset.images.side();
    let channels = dataset.images.channels();
    let sample_bytes = (side * side * channels * 4) as u64;

    let mut bin = Vec::with_capacity(dataset.len() * sample_bytes as usize);
    let mut samples = Vec::with_capacity(dataset.len());
    for id in dataset.ids() {
        samples.push(ManifestSample {
            id: id.0,
            label: dataset.true_label(id),
            file: DATA_FILE.to_string(),
            offset: id.0 as u64 * sample_bytes,
        });
        let img = dataset.images.image(id);
        // internal layout is (C, H, W); the file stores row-major H x W x C
        for r in 0..side {
            for c in 0..side {
                for ch in 0..channels {
                    bin.extend_from_slice(&img[[ch, r, c]].to_le_bytes());
                }
            }
        }
    }
    fs::write(dir.join(DATA_FILE), &bin)?;

    let manifest = Manifest {
        height: side,
        width: side,
        channels,
        class_count: dataset.class_count,
        samples,
    };
    let mut f = fs::File::create(dir.join(MANIFEST_FILE))?;
    serde_json::to_writer_pretty(&mut f, &manifest)?;
    f.write_all(b"\n")?;
    Ok(())
}

/// Load a dataset directory written by [`save_dataset`] (or any directory
/// following the same manifest schema).
pub fn load_dataset(dir: &Path) -> Result<Dataset> {
    let manifest_path = dir.join(MANIFEST_FILE);
    let manifest: Manifest = serde_json::from_str(&fs::read_to_string(&manifest_path)?)?;
    if manifest.height != manifest.width {
        return Err(PalError::Dataset(format!(
            "manifest declares non-square images {}x{}",
            manifest.height, manifest.width
        )));
    }
    let side = manifest.height;
    let channels = manifest.channels;
    let sample_len = side * side * channels;

    for (pos, s) in manifest.samples.iter().enumerate() {
        if s.id as usize != pos {
            return Err(PalError::Dataset(format!(
                "manifest sample ids must be dense and ordered; found id {} at position {pos}",
                s.id
            )));
        }
    }

    let mut handles: BTreeMap<String, fs::File> = BTreeMap::new();
    let mut images = Vec::with_capacity(manifest.samples.len());
    let mut labels = Vec::with_capacity(manifest.samples.len());
    let mut buf = vec![0u8; sample_len * 4];
    for s in &manifest.samples {
        let file = match handles.get_mut(&s.file) {
            Some(f) => f,
            None => {
                let f = fs::File::open(dir.join(&s.file))?;
                handles.entry(s.file.clone()).or_insert(f)
            }
        };
        file.seek(SeekFrom::Start(s.offset))?;
        file.read_exact(&mut buf)?;
        let mut img = Array3::<f32>::zeros((channels, side, side));
        let mut k = 0;
        for r in 0..side {
            for c in 0..side {
                for ch in 0..channels {
                    img[[ch, r, c]] = f32::from_le_bytes(buf[k..k + 4].try_into().unwrap());
                    k += 4;
                }
            }
        }
        images.push(img);
        labels.push(s.label);
    }

    Dataset::new(ImageSet::from_images(images)?, labels, manifest.class_count)
}
