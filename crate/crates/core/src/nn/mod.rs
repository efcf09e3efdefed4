//! Trainable models: the task classifier, the two-headed scoring network
//! (rotation head + classification head over a shared convolutional
//! backbone), their training loops, and the clone-and-fine-tune mechanism
//! behind the diversity score.
//!
//! Training is single-threaded and bit-deterministic per seed. Both
//! `train_task` and `train_scoring` re-initialize parameters from the
//! config seed every call (the input network only supplies the
//! architecture): networks are trained from scratch each query round,
//! never warm-started.

pub mod checkpoint;
mod layers;

use ndarray::{Array2, Array4};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dataset::{ClassLabel, ImageSet, ImageView, SampleId};
use crate::error::{PalError, Result};
use crate::pool::{Hyperparameters, OptimizerKind, PoolState};
use crate::scoring::{rotate90, Pmf, RotationIndex, ROTATION_COUNT};

use layers::{
    maxpool2_backward, maxpool2_forward, relu_backward, relu_forward, softmax_cross_entropy,
    softmax_f64, ConvCache, ConvLayer, LinearLayer, Param, PoolCache,
};

/// Inference batch size; a chunking detail with no effect on outputs.
const PREDICT_CHUNK: usize = 128;

/// Shape of the convolutional backbone. Each block is conv3x3 -> ReLU ->
/// 2x2 max pool, so every block halves the spatial side.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Architecture {
    pub input_channels: usize,
    pub input_side: usize,
    /// Output channels of each conv block, in order.
    pub conv_channels: Vec<usize>,
}

impl Architecture {
    /// Two-block default sized for small square inputs.
    pub fn small(input_channels: usize, input_side: usize) -> Self {
        Self {
            input_channels,
            input_side,
            conv_channels: vec![8, 16],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let blocks = self.conv_channels.len();
        if !(1..=4).contains(&blocks) {
            return Err(PalError::InvalidConfig(format!(
                "backbone needs 1..=4 conv blocks, got {blocks}"
            )));
        }
        if self.input_channels == 0 || self.conv_channels.iter().any(|&c| c == 0) {
            return Err(PalError::InvalidConfig(
                "channel counts must be positive".into(),
            ));
        }
        if self.input_side % (1 << blocks) != 0 || self.input_side == 0 {
            return Err(PalError::InvalidConfig(format!(
                "input side {} not divisible by 2^{blocks}",
                self.input_side
            )));
        }
        Ok(())
    }

    /// Length of the flattened backbone output.
    pub fn feature_len(&self) -> usize {
        let blocks = self.conv_channels.len();
        let side = self.input_side >> blocks;
        side * side * self.conv_channels[blocks - 1]
    }

    fn check_images(&self, images: &ImageSet) -> Result<()> {
        if images.channels() != self.input_channels || images.side() != self.input_side {
            return Err(PalError::ShapeMismatch {
                expected: format!("{}x{}x{}", self.input_channels, self.input_side, self.input_side),
                got: format!("{}x{}x{}", images.channels(), images.side(), images.side()),
            });
        }
        Ok(())
    }

    fn check_image(&self, image: &ImageView<'_>) -> Result<()> {
        let (c, h, w) = image.dim();
        if c != self.input_channels || h != self.input_side || w != self.input_side {
            return Err(PalError::ShapeMismatch {
                expected: format!("{}x{}x{}", self.input_channels, self.input_side, self.input_side),
                got: format!("{c}x{h}x{w}"),
            });
        }
        Ok(())
    }
}

/// Shared convolutional feature extractor.
#[derive(Debug, Clone, PartialEq)]
struct Backbone {
    convs: Vec<ConvLayer>,
}

struct BackboneCache {
    blocks: Vec<(ConvCache, Array4<f32>, PoolCache)>,
    feat_shape: (usize, usize, usize, usize),
}

impl Backbone {
    fn new(arch: &Architecture, rng: &mut ChaCha8Rng) -> Self {
        let mut convs = Vec::new();
        let mut in_ch = arch.input_channels;
        for &out_ch in &arch.conv_channels {
            convs.push(ConvLayer::new(in_ch, out_ch, rng));
            in_ch = out_ch;
        }
        Self { convs }
    }

    fn forward(&self, x: &Array4<f32>) -> (Array2<f32>, BackboneCache) {
        let mut cur = x.clone();
        let mut blocks = Vec::with_capacity(self.convs.len());
        for conv in &self.convs {
            let (y, ccache) = conv.forward(&cur);
            let (a, mask) = relu_forward(&y);
            let (p, pcache) = maxpool2_forward(&a);
            blocks.push((ccache, mask, pcache));
            cur = p;
        }
        let dim = cur.dim();
        let feats = cur
            .into_shape_with_order((dim.0, dim.1 * dim.2 * dim.3))
            .expect("flatten backbone output");
        (
            feats,
            BackboneCache {
                blocks,
                feat_shape: dim,
            },
        )
    }

    fn backward(&mut self, cache: &BackboneCache, dfeat: &Array2<f32>) {
        let (b, c, h, w) = cache.feat_shape;
        let mut grad = dfeat
            .clone()
            .into_shape_with_order((b, c, h, w))
            .expect("unflatten feature gradient");
        for (conv, (ccache, mask, pcache)) in
            self.convs.iter_mut().zip(cache.blocks.iter()).rev()
        {
            let da = maxpool2_backward(pcache, &grad);
            let dy = relu_backward(mask, &da);
            grad = conv.backward(ccache, &dy);
        }
    }

    fn params_mut(&mut self) -> Vec<&mut Param> {
        self.convs.iter_mut().flat_map(|c| c.params_mut()).collect()
    }

    fn param_blocks(&self) -> Vec<&ndarray::ArrayD<f32>> {
        self.convs.iter().flat_map(|c| c.param_blocks()).collect()
    }

    fn param_blocks_mut(&mut self) -> Vec<&mut ndarray::ArrayD<f32>> {
        self.convs
            .iter_mut()
            .flat_map(|c| c.param_blocks_mut())
            .collect()
    }
}

/// The classifier trained on oracle labels each round; its accuracy is the
/// quantity active learning tries to maximize per label spent.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskNetwork {
    arch: Architecture,
    class_count: u32,
    backbone: Backbone,
    head: LinearLayer,
}

impl TaskNetwork {
    /// Fresh network with seeded fan-in initialization; parameters are
    /// drawn in declaration order (backbone blocks, then head).
    pub fn new(arch: Architecture, class_count: u32, seed: u64) -> Result<Self> {
        arch.validate()?;
        if class_count == 0 {
            return Err(PalError::InvalidConfig("class_count must be positive".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let backbone = Backbone::new(&arch, &mut rng);
        let head = LinearLayer::new(arch.feature_len(), class_count as usize, &mut rng);
        Ok(Self {
            arch,
            class_count,
            backbone,
            head,
        })
    }

    pub fn architecture(&self) -> &Architecture {
        &self.arch
    }

    pub fn class_count(&self) -> u32 {
        self.class_count
    }

    /// Class posterior for a single image.
    pub fn predict_class_probs(&self, x: ImageView<'_>) -> Result<Pmf> {
        self.arch.check_image(&x)?;
        let batch = single_batch(&x);
        let (feats, _) = self.backbone.forward(&batch);
        let (logits, _) = self.head.forward(&feats);
        Pmf::new(softmax_f64(logits.row(0).as_slice().unwrap()))
    }

    /// Class posteriors for many samples, batched for speed; identical
    /// results to calling [`Self::predict_class_probs`] per sample.
    pub fn predict_class_probs_batch(
        &self,
        images: &ImageSet,
        ids: &[SampleId],
    ) -> Result<Vec<Pmf>> {
        self.arch.check_images(images)?;
        let mut out = Vec::with_capacity(ids.len());
        for chunk in ids.chunks(PREDICT_CHUNK) {
            let batch = assemble_batch(images, chunk);
            let (feats, _) = self.backbone.forward(&batch);
            let (logits, _) = self.head.forward(&feats);
            for row in logits.rows() {
                out.push(Pmf::new(softmax_f64(row.as_slice().unwrap()))?);
            }
        }
        Ok(out)
    }

    /// Penultimate activations (flattened backbone output); the default
    /// embedding for the core-set baseline.
    pub fn embed(&self, x: ImageView<'_>) -> Result<Vec<f32>> {
        self.arch.check_image(&x)?;
        let batch = single_batch(&x);
        let (feats, _) = self.backbone.forward(&batch);
        Ok(feats.row(0).to_vec())
    }

    /// Batched [`Self::embed`].
    pub fn embed_batch(&self, images: &ImageSet, ids: &[SampleId]) -> Result<Vec<Vec<f32>>> {
        self.arch.check_images(images)?;
        let mut out = Vec::with_capacity(ids.len());
        for chunk in ids.chunks(PREDICT_CHUNK) {
            let batch = assemble_batch(images, chunk);
            let (feats, _) = self.backbone.forward(&batch);
            for row in feats.rows() {
                out.push(row.to_vec());
            }
        }
        Ok(out)
    }

    /// Zero the output layer, forcing uniform predictions. Diagnostic hook.
    pub fn zero_final_layer(&mut self) {
        self.head.zero();
    }

    fn params_mut(&mut self) -> Vec<&mut Param> {
        let mut v = self.backbone.params_mut();
        v.extend(self.head.params_mut());
        v
    }

    pub(crate) fn param_blocks(&self) -> Vec<&ndarray::ArrayD<f32>> {
        let mut v = self.backbone.param_blocks();
        v.extend(self.head.param_blocks());
        v
    }

    pub(crate) fn param_blocks_mut(&mut self) -> Vec<&mut ndarray::ArrayD<f32>> {
        let mut v = self.backbone.param_blocks_mut();
        v.extend(self.head.param_blocks_mut());
        v
    }
}

/// The two-headed scoring network: a rotation head (4 outputs) and a class
/// head sharing one backbone. Used only to rank unlabeled samples.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoringNetwork {
    arch: Architecture,
    class_count: u32,
    backbone: Backbone,
    ssl_head: LinearLayer,
    cls_head: LinearLayer,
}

impl ScoringNetwork {
    /// Fresh network with seeded fan-in initialization; parameters are
    /// drawn in declaration order (backbone, rotation head, class head).
    pub fn new(arch: Architecture, class_count: u32, seed: u64) -> Result<Self> {
        arch.validate()?;
        if class_count == 0 {
            return Err(PalError::InvalidConfig("class_count must be positive".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let backbone = Backbone::new(&arch, &mut rng);
        let ssl_head = LinearLayer::new(arch.feature_len(), ROTATION_COUNT, &mut rng);
        let cls_head = LinearLayer::new(arch.feature_len(), class_count as usize, &mut rng);
        Ok(Self {
            arch,
            class_count,
            backbone,
            ssl_head,
            cls_head,
        })
    }

    pub fn architecture(&self) -> &Architecture {
        &self.arch
    }

    pub fn class_count(&self) -> u32 {
        self.class_count
    }

    /// Rotation posterior (4 classes) for a single image.
    pub fn predict_rotation_probs(&self, x: ImageView<'_>) -> Result<Pmf> {
        self.arch.check_image(&x)?;
        let batch = single_batch(&x);
        let (feats, _) = self.backbone.forward(&batch);
        let (logits, _) = self.ssl_head.forward(&feats);
        Pmf::new(softmax_f64(logits.row(0).as_slice().unwrap()))
    }

    /// Class posterior for a single image (the uncertainty head).
    pub fn predict_class_probs(&self, x: ImageView<'_>) -> Result<Pmf> {
        self.arch.check_image(&x)?;
        let batch = single_batch(&x);
        let (feats, _) = self.backbone.forward(&batch);
        let (logits, _) = self.cls_head.forward(&feats);
        Pmf::new(softmax_f64(logits.row(0).as_slice().unwrap()))
    }

    /// Rotation posteriors for many samples after rotating each by
    /// `rotation`; batched, identical results to the per-sample path.
    pub fn predict_rotation_probs_batch(
        &self,
        images: &ImageSet,
        ids: &[SampleId],
        rotation: RotationIndex,
    ) -> Result<Vec<Pmf>> {
        self.arch.check_images(images)?;
        let mut out = Vec::with_capacity(ids.len());
        for chunk in ids.chunks(PREDICT_CHUNK) {
            let batch = assemble_rotated_batch(images, chunk, rotation)?;
            let (feats, _) = self.backbone.forward(&batch);
            let (logits, _) = self.ssl_head.forward(&feats);
            for row in logits.rows() {
                out.push(Pmf::new(softmax_f64(row.as_slice().unwrap()))?);
            }
        }
        Ok(out)
    }

    /// Batched class posteriors from the uncertainty head.
    pub fn predict_class_probs_batch(
        &self,
        images: &ImageSet,
        ids: &[SampleId],
    ) -> Result<Vec<Pmf>> {
        self.arch.check_images(images)?;
        let mut out = Vec::with_capacity(ids.len());
        for chunk in ids.chunks(PREDICT_CHUNK) {
            let batch = assemble_batch(images, chunk);
            let (feats, _) = self.backbone.forward(&batch);
            let (logits, _) = self.cls_head.forward(&feats);
            for row in logits.rows() {
                out.push(Pmf::new(softmax_f64(row.as_slice().unwrap()))?);
            }
        }
        Ok(out)
    }

    /// Zero both output heads, forcing uniform predictions. Diagnostic hook.
    pub fn zero_final_layers(&mut self) {
        self.ssl_head.zero();
        self.cls_head.zero();
    }

    fn cls_step_params(&mut self) -> Vec<&mut Param> {
        let mut v = self.backbone.params_mut();
        v.extend(self.cls_head.params_mut());
        v
    }

    fn ssl_step_params(&mut self) -> Vec<&mut Param> {
        let mut v = self.backbone.params_mut();
        v.extend(self.ssl_head.params_mut());
        v
    }

    pub(crate) fn param_blocks(&self) -> Vec<&ndarray::ArrayD<f32>> {
        let mut v = self.backbone.param_blocks();
        v.extend(self.ssl_head.param_blocks());
        v.extend(self.cls_head.param_blocks());
        v
    }

    pub(crate) fn param_blocks_mut(&mut self) -> Vec<&mut ndarray::ArrayD<f32>> {
        let mut v = self.backbone.param_blocks_mut();
        v.extend(self.ssl_head.param_blocks_mut());
        v.extend(self.cls_head.param_blocks_mut());
        v
    }
}

/// Deep, independent copy of the scoring network for fine-tuning: mutating
/// the clone leaves the original bit-identical. The class head is copied
/// too but frozen downstream.
pub fn clone_ssl(net: &ScoringNetwork) -> ScoringNetwork {
    net.clone()
}

/// One training run's settings. The loss is fixed to cross-entropy.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f32,
    /// Zero is permitted and means no update.
    pub epochs: usize,
    pub batch_size: usize,
    pub optimizer: OptimizerKind,
    pub seed: u64,
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0) {
            return Err(PalError::InvalidConfig(
                "learning_rate must be positive".into(),
            ));
        }
        if self.batch_size == 0 {
            return Err(PalError::InvalidConfig("batch_size must be positive".into()));
        }
        Ok(())
    }

    /// Task-network settings drawn from shared hyperparameters.
    pub fn for_task(hp: &Hyperparameters) -> Self {
        Self {
            learning_rate: hp.task_lr,
            epochs: hp.epochs_main,
            batch_size: hp.batch_size,
            optimizer: hp.optimizer,
            seed: hp.seed,
        }
    }

    /// Scoring-network settings drawn from shared hyperparameters.
    pub fn for_scoring(hp: &Hyperparameters) -> Self {
        Self {
            learning_rate: hp.scoring_lr,
            epochs: hp.epochs_main,
            batch_size: hp.batch_size,
            optimizer: hp.optimizer,
            seed: hp.seed,
        }
    }

    /// Clone fine-tuning settings drawn from shared hyperparameters.
    pub fn for_finetune(hp: &Hyperparameters) -> Self {
        Self {
            learning_rate: hp.scoring_lr,
            epochs: hp.epochs_finetune,
            batch_size: hp.batch_size,
            optimizer: hp.optimizer,
            seed: hp.seed,
        }
    }
}

/// Mean training loss per epoch for the task network.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainStats {
    pub epoch_losses: Vec<f64>,
}

/// Mean training losses per epoch for the scoring network's two heads.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoringTrainStats {
    pub cls_epoch_losses: Vec<f64>,
    pub ssl_epoch_losses: Vec<f64>,
}

fn single_batch(x: &ImageView<'_>) -> Array4<f32> {
    let (c, h, w) = x.dim();
    let mut batch = Array4::<f32>::zeros((1, c, h, w));
    batch.index_axis_mut(ndarray::Axis(0), 0).assign(x);
    batch
}

fn assemble_batch(images: &ImageSet, ids: &[SampleId]) -> Array4<f32> {
    let (c, s) = (images.channels(), images.side());
    let mut batch = Array4::<f32>::zeros((ids.len(), c, s, s));
    for (i, &id) in ids.iter().enumerate() {
        batch
            .index_axis_mut(ndarray::Axis(0), i)
            .assign(&images.image(id));
    }
    batch
}

fn assemble_rotated_batch(
    images: &ImageSet,
    ids: &[SampleId],
    rotation: RotationIndex,
) -> Result<Array4<f32>> {
    let (c, s) = (images.channels(), images.side());
    let mut batch = Array4::<f32>::zeros((ids.len(), c, s, s));
    for (i, &id) in ids.iter().enumerate() {
        let rotated = rotate90(images.image(id), rotation)?;
        batch.index_axis_mut(ndarray::Axis(0), i).assign(&rotated);
    }
    Ok(batch)
}

fn apply_all(params: Vec<&mut Param>, kind: OptimizerKind, lr: f32) {
    for p in params {
        p.apply(kind, lr);
    }
}

fn check_labels(pairs: &[(SampleId, ClassLabel)], class_count: u32) -> Result<()> {
    if let Some((id, l)) = pairs.iter().find(|(_, l)| *l >= class_count) {
        return Err(PalError::InvalidConfig(format!(
            "oracle label {l} for sample {id} out of range for {class_count} classes"
        )));
    }
    Ok(())
}

/// RNG used for epoch shuffles: same seed as initialization but a distinct
/// stream, so changing the epoch count never perturbs initial weights.
fn shuffle_rng(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    rng
}

/// Train a task network from a fresh initialization on the labeled pool's
/// (image, oracle label) pairs. The input network supplies only the
/// architecture and class count; its parameters are ignored and it is left
/// unmodified.
pub fn train_task(
    net: &TaskNetwork,
    pool: &PoolState,
    images: &ImageSet,
    cfg: &TrainConfig,
) -> Result<(TaskNetwork, TrainStats)> {
    cfg.validate()?;
    net.arch.check_images(images)?;
    if pool.labeled_len() == 0 {
        return Err(PalError::EmptyLabeledPool);
    }
    let pairs = pool.labeled_pairs();
    check_labels(&pairs, net.class_count)?;

    let mut fresh = TaskNetwork::new(net.arch.clone(), net.class_count, cfg.seed)?;
    let mut order: Vec<usize> = (0..pairs.len()).collect();
    let mut rng = shuffle_rng(cfg.seed);
    let mut epoch_losses = Vec::with_capacity(cfg.epochs);

    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        for chunk in order.chunks(cfg.batch_size) {
            let ids: Vec<SampleId> = chunk.iter().map(|&i| pairs[i].0).collect();
            let labels: Vec<usize> = chunk.iter().map(|&i| pairs[i].1 as usize).collect();
            let batch = assemble_batch(images, &ids);
            let (feats, bcache) = fresh.backbone.forward(&batch);
            let (logits, hcache) = fresh.head.forward(&feats);
            let (loss, dlogits) = softmax_cross_entropy(&logits, &labels);
            let dfeat = fresh.head.backward(&hcache, &dlogits);
            fresh.backbone.backward(&bcache, &dfeat);
            apply_all(fresh.params_mut(), cfg.optimizer, cfg.learning_rate);
            loss_sum += loss * ids.len() as f64;
        }
        epoch_losses.push(loss_sum / pairs.len() as f64);
    }
    Ok((fresh, TrainStats { epoch_losses }))
}

/// Train a scoring network from a fresh initialization on the labeled
/// pool. Per batch: one classification-head update using oracle labels,
/// then four rotation-head updates (one per quarter turn) whose labels are
/// the synthetic rotation indices — no oracle involvement. All updates
/// flow through the shared backbone.
pub fn train_scoring(
    net: &ScoringNetwork,
    pool: &PoolState,
    images: &ImageSet,
    cfg: &TrainConfig,
) -> Result<(ScoringNetwork, ScoringTrainStats)> {
    cfg.validate()?;
    net.arch.check_images(images)?;
    if pool.labeled_len() == 0 {
        return Err(PalError::EmptyLabeledPool);
    }
    let pairs = pool.labeled_pairs();
    check_labels(&pairs, net.class_count)?;

    let mut fresh = ScoringNetwork::new(net.arch.clone(), net.class_count, cfg.seed)?;
    let mut order: Vec<usize> = (0..pairs.len()).collect();
    let mut rng = shuffle_rng(cfg.seed);
    let mut cls_epoch_losses = Vec::with_capacity(cfg.epochs);
    let mut ssl_epoch_losses = Vec::with_capacity(cfg.epochs);

    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut cls_sum = 0.0;
        let mut ssl_sum = 0.0;
        for chunk in order.chunks(cfg.batch_size) {
            let ids: Vec<SampleId> = chunk.iter().map(|&i| pairs[i].0).collect();
            let labels: Vec<usize> = chunk.iter().map(|&i| pairs[i].1 as usize).collect();

            let batch = assemble_batch(images, &ids);
            let (feats, bcache) = fresh.backbone.forward(&batch);
            let (logits, hcache) = fresh.cls_head.forward(&feats);
            let (loss, dlogits) = softmax_cross_entropy(&logits, &labels);
            let dfeat = fresh.cls_head.backward(&hcache, &dlogits);
            fresh.backbone.backward(&bcache, &dfeat);
            apply_all(fresh.cls_step_params(), cfg.optimizer, cfg.learning_rate);
            cls_sum += loss * ids.len() as f64;

            ssl_sum += ssl_updates(&mut fresh, images, &ids, cfg)? * ids.len() as f64;
        }
        cls_epoch_losses.push(cls_sum / pairs.len() as f64);
        ssl_epoch_losses.push(ssl_sum / pairs.len() as f64);
    }
    Ok((
        fresh,
        ScoringTrainStats {
            cls_epoch_losses,
            ssl_epoch_losses,
        },
    ))
}

/// Run the four per-rotation updates on one batch; returns the mean
/// rotation loss across the four passes.
fn ssl_updates(
    net: &mut ScoringNetwork,
    images: &ImageSet,
    ids: &[SampleId],
    cfg: &TrainConfig,
) -> Result<f64> {
    let mut total = 0.0;
    for rotation in RotationIndex::ALL {
        let batch = assemble_rotated_batch(images, ids, rotation)?;
        let labels = vec![rotation.value(); ids.len()];
        let (feats, bcache) = net.backbone.forward(&batch);
        let (logits, hcache) = net.ssl_head.forward(&feats);
        let (loss, dlogits) = softmax_cross_entropy(&logits, &labels);
        let dfeat = net.ssl_head.backward(&hcache, &dlogits);
        net.backbone.backward(&bcache, &dfeat);
        apply_all(net.ssl_step_params(), cfg.optimizer, cfg.learning_rate);
        total += loss;
    }
    Ok(total / ROTATION_COUNT as f64)
}

/// Continue training a clone's backbone and rotation head on the selected
/// samples using rotation self-supervision only — oracle labels are never
/// consumed. Unlike the `train_*` functions this does not re-initialize:
/// it picks up from the clone's current parameters. The class head stays
/// frozen.
pub fn finetune_ssl(
    mut clone: ScoringNetwork,
    selected: &[SampleId],
    images: &ImageSet,
    cfg: &TrainConfig,
) -> Result<ScoringNetwork> {
    cfg.validate()?;
    clone.arch.check_images(images)?;
    if selected.is_empty() {
        return Err(PalError::InvalidConfig(
            "fine-tuning needs a non-empty selected set".into(),
        ));
    }
    let mut order: Vec<usize> = (0..selected.len()).collect();
    let mut rng = shuffle_rng(cfg.seed);
    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        for chunk in order.chunks(cfg.batch_size) {
            let ids: Vec<SampleId> = chunk.iter().map(|&i| selected[i]).collect();
            ssl_updates(&mut clone, images, &ids, cfg)?;
        }
    }
    Ok(clone)
}
