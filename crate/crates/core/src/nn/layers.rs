//! Trainable layers: 3x3 same-padding convolution (im2col), ReLU, 2x2 max
//! pooling, and fully connected layers, with hand-derived backward passes
//! and per-parameter optimizer state.
//!
//! Everything here is `f32`, single-threaded, and deterministic given the
//! seed that initialized the parameters.

use ndarray::{Array2, Array4, ArrayD, Axis, IxDyn};
use rand::Rng;

use crate::pool::OptimizerKind;

/// One trainable tensor with its gradient accumulator and Adam state.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Param {
    pub value: ArrayD<f32>,
    pub grad: ArrayD<f32>,
    m: ArrayD<f32>,
    v: ArrayD<f32>,
    t: u64,
}

impl Param {
    pub fn new(value: ArrayD<f32>) -> Self {
        let zeros = ArrayD::zeros(value.raw_dim());
        Self {
            grad: zeros.clone(),
            m: zeros.clone(),
            v: zeros,
            t: 0,
            value,
        }
    }

    /// Apply one optimizer step from the accumulated gradient, then clear it.
    pub fn apply(&mut self, kind: OptimizerKind, lr: f32) {
        match kind {
            OptimizerKind::Sgd => {
                self.value.zip_mut_with(&self.grad, |w, &g| *w -= lr * g);
            }
            OptimizerKind::Adam => {
                const B1: f32 = 0.9;
                const B2: f32 = 0.999;
                const EPS: f32 = 1e-8;
                self.t += 1;
                let c1 = 1.0 - B1.powi(self.t as i32);
                let c2 = 1.0 - B2.powi(self.t as i32);
                self.m.zip_mut_with(&self.grad, |m, &g| *m = B1 * *m + (1.0 - B1) * g);
                self.v
                    .zip_mut_with(&self.grad, |v, &g| *v = B2 * *v + (1.0 - B2) * g * g);
                ndarray::Zip::from(&mut self.value)
                    .and(&self.m)
                    .and(&self.v)
                    .for_each(|w, &m, &v| {
                        *w -= lr * (m / c1) / ((v / c2).sqrt() + EPS);
                    });
            }
        }
        self.grad.fill(0.0);
    }
}

/// Draw a tensor with entries uniform in ±1/sqrt(fan_in), filled in
/// row-major order so initialization is reproducible bit-for-bit.
fn fan_in_init(shape: &[usize], fan_in: usize, rng: &mut impl Rng) -> ArrayD<f32> {
    let bound = 1.0 / (fan_in as f32).sqrt();
    let len: usize = shape.iter().product();
    let data: Vec<f32> = (0..len).map(|_| rng.gen_range(-bound..bound)).collect();
    ArrayD::from_shape_vec(IxDyn(shape), data).expect("shape/product match")
}

/// 3x3 convolution, stride 1, zero padding 1 (shape-preserving).
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct ConvLayer {
    pub w: Param,
    pub b: Param,
    in_ch: usize,
    out_ch: usize,
}

pub(crate) struct ConvCache {
    col: Array2<f32>,
    input_dim: (usize, usize, usize, usize),
}

impl ConvLayer {
    pub fn new(in_ch: usize, out_ch: usize, rng: &mut impl Rng) -> Self {
        let fan_in = in_ch * 9;
        Self {
            w: Param::new(fan_in_init(&[out_ch, in_ch, 3, 3], fan_in, rng)),
            b: Param::new(ArrayD::zeros(IxDyn(&[out_ch]))),
            in_ch,
            out_ch,
        }
    }

    /// Unfold 3x3 neighborhoods: output row (b, r, c), column (ci, kr, kc).
    fn im2col(&self, x: &Array4<f32>) -> Array2<f32> {
        let (bsz, c, h, w) = x.dim();
        let mut col = Array2::<f32>::zeros((bsz * h * w, c * 9));
        for b in 0..bsz {
            for r in 0..h {
                for cc in 0..w {
                    let row = (b * h + r) * w + cc;
                    for ci in 0..c {
                        for kr in 0..3 {
                            let rr = r as isize + kr as isize - 1;
                            if rr < 0 || rr >= h as isize {
                                continue;
                            }
                            for kc in 0..3 {
                                let c2 = cc as isize + kc as isize - 1;
                                if c2 < 0 || c2 >= w as isize {
                                    continue;
                                }
                                col[[row, (ci * 3 + kr) * 3 + kc]] =
                                    x[[b, ci, rr as usize, c2 as usize]];
                            }
                        }
                    }
                }
            }
        }
        col
    }

    pub fn forward(&self, x: &Array4<f32>) -> (Array4<f32>, ConvCache) {
        let (bsz, c, h, w) = x.dim();
        debug_assert_eq!(c, self.in_ch);
        let col = self.im2col(x);
        let w2d = self
            .w
            .value
            .view()
            .into_shape_with_order((self.out_ch, self.in_ch * 9))
            .expect("conv weight reshape");
        // (B*H*W, out)
        let mut out2d = col.dot(&w2d.t());
        let bias = self.b.value.view().into_dimensionality::<ndarray::Ix1>().unwrap();
        for mut row in out2d.rows_mut() {
            row += &bias;
        }
        let y = out2d
            .into_shape_with_order((bsz, h, w, self.out_ch))
            .expect("conv output reshape")
            .permuted_axes([0, 3, 1, 2])
            .as_standard_layout()
            .to_owned();
        (
            y,
            ConvCache {
                col,
                input_dim: (bsz, c, h, w),
            },
        )
    }

    pub fn backward(&mut self, cache: &ConvCache, dy: &Array4<f32>) -> Array4<f32> {
        let (bsz, c, h, w) = cache.input_dim;
        let dy2d = dy
            .view()
            .permuted_axes([0, 2, 3, 1])
            .as_standard_layout()
            .into_shape_with_order((bsz * h * w, self.out_ch))
            .expect("conv dy reshape")
            .to_owned();
        let dw2d = dy2d.t().dot(&cache.col);
        let dw = dw2d
            .into_shape_with_order(IxDyn(&[self.out_ch, self.in_ch, 3, 3]))
            .expect("conv dw reshape");
        self.w.grad += &dw;
        let db = dy2d.sum_axis(Axis(0));
        self.b.grad += &db.into_dyn();

        let w2d = self
            .w
            .value
            .view()
            .into_shape_with_order((self.out_ch, self.in_ch * 9))
            .expect("conv weight reshape");
        let dcol = dy2d.dot(&w2d);
        let mut dx = Array4::<f32>::zeros((bsz, c, h, w));
        for b in 0..bsz {
            for r in 0..h {
                for cc in 0..w {
                    let row = (b * h + r) * w + cc;
                    for ci in 0..c {
                        for kr in 0..3 {
                            let rr = r as isize + kr as isize - 1;
                            if rr < 0 || rr >= h as isize {
                                continue;
                            }
                            for kc in 0..3 {
                                let c2 = cc as isize + kc as isize - 1;
                                if c2 < 0 || c2 >= w as isize {
                                    continue;
                                }
                                dx[[b, ci, rr as usize, c2 as usize]] +=
                                    dcol[[row, (ci * 3 + kr) * 3 + kc]];
                            }
                        }
                    }
                }
            }
        }
        dx
    }

    pub fn params_mut(&mut self) -> [&mut Param; 2] {
        [&mut self.w, &mut self.b]
    }

    pub fn param_blocks(&self) -> [&ArrayD<f32>; 2] {
        [&self.w.value, &self.b.value]
    }

    pub fn param_blocks_mut(&mut self) -> [&mut ArrayD<f32>; 2] {
        [&mut self.w.value, &mut self.b.value]
    }
}

/// Elementwise max(x, 0); gradient is zero at exactly zero.
pub(crate) fn relu_forward(x: &Array4<f32>) -> (Array4<f32>, Array4<f32>) {
    let mask = x.mapv(|v| if v > 0.0 { 1.0 } else { 0.0 });
    (x * &mask, mask)
}

pub(crate) fn relu_backward(mask: &Array4<f32>, dy: &Array4<f32>) -> Array4<f32> {
    dy * mask
}

pub(crate) struct PoolCache {
    /// Index 0..4 of the winning cell in each 2x2 window, scan order
    /// (0,0), (0,1), (1,0), (1,1); ties go to the earliest cell.
    argmax: Array4<u8>,
    input_dim: (usize, usize, usize, usize),
}

/// 2x2 max pooling with stride 2. Input height/width must be even.
pub(crate) fn maxpool2_forward(x: &Array4<f32>) -> (Array4<f32>, PoolCache) {
    let (bsz, c, h, w) = x.dim();
    debug_assert!(h % 2 == 0 && w % 2 == 0);
    let (oh, ow) = (h / 2, w / 2);
    let mut y = Array4::<f32>::zeros((bsz, c, oh, ow));
    let mut argmax = Array4::<u8>::zeros((bsz, c, oh, ow));
    for b in 0..bsz {
        for ci in 0..c {
            for r in 0..oh {
                for cc in 0..ow {
                    let mut best = f32::NEG_INFINITY;
                    let mut bi = 0u8;
                    for k in 0..4u8 {
                        let v = x[[b, ci, 2 * r + (k / 2) as usize, 2 * cc + (k % 2) as usize]];
                        if v > best {
                            best = v;
                            bi = k;
                        }
                    }
                    y[[b, ci, r, cc]] = best;
                    argmax[[b, ci, r, cc]] = bi;
                }
            }
        }
    }
    (
        y,
        PoolCache {
            argmax,
            input_dim: (bsz, c, h, w),
        },
    )
}

pub(crate) fn maxpool2_backward(cache: &PoolCache, dy: &Array4<f32>) -> Array4<f32> {
    let (bsz, c, h, w) = cache.input_dim;
    let mut dx = Array4::<f32>::zeros((bsz, c, h, w));
    let (_, _, oh, ow) = dy.dim();
    for b in 0..bsz {
        for ci in 0..c {
            for r in 0..oh {
                for cc in 0..ow {
                    let k = cache.argmax[[b, ci, r, cc]];
                    dx[[b, ci, 2 * r + (k / 2) as usize, 2 * cc + (k % 2) as usize]] +=
                        dy[[b, ci, r, cc]];
                }
            }
        }
    }
    dx
}

/// Fully connected layer `y = x W^T + b`.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct LinearLayer {
    pub w: Param,
    pub b: Param,
    in_features: usize,
}

pub(crate) struct LinearCache {
    x: Array2<f32>,
}

impl LinearLayer {
    pub fn new(in_features: usize, out_features: usize, rng: &mut impl Rng) -> Self {
        Self {
            w: Param::new(fan_in_init(&[out_features, in_features], in_features, rng)),
            b: Param::new(ArrayD::zeros(IxDyn(&[out_features]))),
            in_features,
        }
    }

    pub fn forward(&self, x: &Array2<f32>) -> (Array2<f32>, LinearCache) {
        debug_assert_eq!(x.ncols(), self.in_features);
        let w2d = self
            .w
            .value
            .view()
            .into_dimensionality::<ndarray::Ix2>()
            .unwrap();
        let mut y = x.dot(&w2d.t());
        let bias = self.b.value.view().into_dimensionality::<ndarray::Ix1>().unwrap();
        for mut row in y.rows_mut() {
            row += &bias;
        }
        (y, LinearCache { x: x.clone() })
    }

    pub fn backward(&mut self, cache: &LinearCache, dy: &Array2<f32>) -> Array2<f32> {
        let dw = dy.t().dot(&cache.x);
        self.w.grad += &dw.into_dyn();
        self.b.grad += &dy.sum_axis(Axis(0)).into_dyn();
        let w2d = self
            .w
            .value
            .view()
            .into_dimensionality::<ndarray::Ix2>()
            .unwrap();
        dy.dot(&w2d)
    }

    /// Zero the weights and bias, forcing constant (hence, after softmax,
    /// uniform) outputs. Diagnostic hook.
    pub fn zero(&mut self) {
        self.w.value.fill(0.0);
        self.b.value.fill(0.0);
    }

    pub fn params_mut(&mut self) -> [&mut Param; 2] {
        [&mut self.w, &mut self.b]
    }

    pub fn param_blocks(&self) -> [&ArrayD<f32>; 2] {
        [&self.w.value, &self.b.value]
    }

    pub fn param_blocks_mut(&mut self) -> [&mut ArrayD<f32>; 2] {
        [&mut self.w.value, &mut self.b.value]
    }
}

/// Mean cross-entropy loss over a batch and its gradient with respect to
/// the logits: `(softmax - onehot) / B`.
pub(crate) fn softmax_cross_entropy(
    logits: &Array2<f32>,
    labels: &[usize],
) -> (f64, Array2<f32>) {
    let bsz = logits.nrows();
    debug_assert_eq!(bsz, labels.len());
    let mut dlogits = Array2::<f32>::zeros(logits.raw_dim());
    let mut loss = 0.0f64;
    for (i, row) in logits.rows().into_iter().enumerate() {
        let max = row.iter().copied().fold(f32::NEG_INFINITY, f32::max);
        let exps: Vec<f32> = row.iter().map(|&v| (v - max).exp()).collect();
        let sum: f32 = exps.iter().sum();
        for (j, &e) in exps.iter().enumerate() {
            let p = e / sum;
            dlogits[[i, j]] = (p - if j == labels[i] { 1.0 } else { 0.0 }) / bsz as f32;
        }
        loss += -((exps[labels[i]] / sum).max(f32::MIN_POSITIVE) as f64).ln();
    }
    (loss / bsz as f64, dlogits)
}

/// Numerically stable softmax computed in f64 from f32 logits; used at
/// prediction time so emitted PMFs sum to 1 to near machine precision.
pub(crate) fn softmax_f64(logits: &[f32]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f32::NEG_INFINITY, f32::max) as f64;
    let exps: Vec<f64> = logits.iter().map(|&v| (v as f64 - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}
