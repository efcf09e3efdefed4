//! Analytical probes: score-component correlations, the bounded-vs-unbounded
//! uncertainty-term comparison, and the closed-form optimal mixing weight
//! with brute-force verification.

use std::ops::RangeInclusive;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{PalError, Result};
use crate::record::ScoreRecord;
use crate::scoring::{classification_confusion_score, entropy_variant_score, Pmf};

/// Pearson and Spearman correlation between two score components.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    pub r_p: f64,
    pub r_s: f64,
    pub n: usize,
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Center and scale to mean 0, variance 1 (population convention,
/// divisor n). Zero-variance input is rejected.
pub fn standardize(x: &[f64]) -> Result<Vec<f64>> {
    if x.len() < 2 {
        return Err(PalError::Degenerate(
            "standardize needs at least 2 values".into(),
        ));
    }
    let m = mean(x);
    let var = x.iter().map(|&v| (v - m) * (v - m)).sum::<f64>() / x.len() as f64;
    if var <= 0.0 {
        return Err(PalError::Degenerate("zero variance".into()));
    }
    let sd = var.sqrt();
    Ok(x.iter().map(|&v| (v - m) / sd).collect())
}

fn check_pair(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(PalError::Degenerate(format!(
            "length mismatch: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 3 {
        return Err(PalError::Degenerate(
            "correlation needs at least 3 points".into(),
        ));
    }
    Ok(())
}

/// Product-moment correlation. Rejects length mismatch, n < 3, and
/// zero-variance input.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    check_pair(x, y)?;
    let xs = standardize(x)?;
    let ys = standardize(y)?;
    Ok(xs.iter().zip(&ys).map(|(a, b)| a * b).sum::<f64>() / x.len() as f64)
}

/// 1-based ranks with ties assigned their average rank.
fn average_ranks(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && x[idx[j + 1]] == x[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            ranks[k] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// Rank correlation: Pearson applied to average ranks.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    check_pair(x, y)?;
    pearson(&average_ranks(x), &average_ranks(y))
}

/// Correlations between the `s_ssl` and `s_cls` columns of a score dump.
pub fn component_correlations(scores: &[ScoreRecord]) -> Result<CorrelationReport> {
    if scores.len() < 3 {
        return Err(PalError::Degenerate(format!(
            "need at least 3 score records, got {}",
            scores.len()
        )));
    }
    let ssl: Vec<f64> = scores.iter().map(|r| r.s_ssl).collect();
    let cls: Vec<f64> = scores.iter().map(|r| r.s_cls).collect();
    Ok(CorrelationReport {
        r_p: pearson(&ssl, &cls)?,
        r_s: spearman(&ssl, &cls)?,
        n: scores.len(),
    })
}

/// Fixed self-supervision score used by [`overshadow_probe`]; the probe's
/// assertions concern differences from this baseline, so its value is
/// arbitrary.
pub const PROBE_S_SSL: f64 = -1.0;

/// One row of the overshadow table: scores for the binary posterior
/// `h = (1 - 10^-k, 10^-k)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OvershadowRow {
    pub k: u32,
    pub s_hybrid: f64,
    pub s_entropy_variant: f64,
}

/// Compare the KL-based hybrid score against the bounded entropy variant as
/// the class posterior `h = (1 - 10^-k, 10^-k)` hardens. The hybrid column
/// falls without bound while the entropy column stays within
/// `lambda1 * ln 2` of the fixed baseline [`PROBE_S_SSL`]. `k` must stay
/// within 1..=12, the range where the probability clamp does not bite.
pub fn overshadow_probe(lambda1: f64, k_range: RangeInclusive<u32>) -> Result<Vec<OvershadowRow>> {
    if *k_range.start() < 1 || *k_range.end() > 12 {
        return Err(PalError::InvalidConfig(format!(
            "k range {:?} outside clamp validity 1..=12",
            k_range
        )));
    }
    if !lambda1.is_finite() || lambda1 < 0.0 {
        return Err(PalError::InvalidConfig(
            "lambda1 must be finite and non-negative".into(),
        ));
    }
    let mut rows = Vec::new();
    for k in k_range {
        let eps = 10f64.powi(-(k as i32));
        let h = Pmf::new(vec![1.0 - eps, eps])?;
        rows.push(OvershadowRow {
            k,
            s_hybrid: PROBE_S_SSL + lambda1 * classification_confusion_score(&h)?,
            s_entropy_variant: entropy_variant_score(PROBE_S_SSL, &h, lambda1),
        });
    }
    Ok(rows)
}

/// Three equal-length score vectors standardized to mean 0 / variance 1,
/// with their pairwise covariances (equal to correlations after
/// standardization).
#[derive(Debug, Clone, PartialEq)]
pub struct StandardizedScoreTriple {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub w: Vec<f64>,
    pub sigma_uv: f64,
    pub sigma_uw: f64,
    pub sigma_vw: f64,
}

fn covariance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() / a.len() as f64
}

impl StandardizedScoreTriple {
    /// Standardize three raw vectors and record their covariances.
    pub fn new(u: &[f64], v: &[f64], w: &[f64]) -> Result<Self> {
        if u.len() != v.len() || u.len() != w.len() {
            return Err(PalError::Degenerate("vectors must share a length".into()));
        }
        if u.len() < 3 {
            return Err(PalError::Degenerate(
                "triple needs at least 3 points".into(),
            ));
        }
        let u = standardize(u)?;
        let v = standardize(v)?;
        let w = standardize(w)?;
        let sigma_uv = covariance(&u, &v);
        let sigma_uw = covariance(&u, &w);
        let sigma_vw = covariance(&v, &w);
        Ok(Self {
            u,
            v,
            w,
            sigma_uv,
            sigma_uw,
            sigma_vw,
        })
    }
}

/// Grid resolution of the brute-force verification in [`optimal_alpha`].
pub const ALPHA_GRID_STEP: f64 = 1e-4;

/// Closed-form optimal mixing weight plus its brute-force check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaResult {
    pub alpha_star: f64,
    pub correlation_at_star: f64,
    pub grid_argmax: f64,
    pub grid_max: f64,
}

/// The correlation between `alpha*v + sqrt(1-alpha^2)*w` and `u` as a
/// function of the mixing weight, for standardized vectors.
fn mixed_correlation(alpha: f64, sigma_uv: f64, sigma_uw: f64) -> f64 {
    alpha * sigma_uv + (1.0 - alpha * alpha).max(0.0).sqrt() * sigma_uw
}

/// Maximize the correlation of a two-component mixture with the reference
/// vector: `alpha_star = sigma_uv / sqrt(sigma_uv^2 + sigma_uw^2)`,
/// verified against a dense grid search over `alpha` in [0, 1]. Both
/// covariances must be positive.
pub fn optimal_alpha(triple: &StandardizedScoreTriple) -> Result<AlphaResult> {
    let (suv, suw) = (triple.sigma_uv, triple.sigma_uw);
    if suv <= 0.0 || suw <= 0.0 {
        return Err(PalError::Degenerate(format!(
            "optimal_alpha needs positive covariances, got sigma_uv={suv}, sigma_uw={suw}"
        )));
    }
    let alpha_star = suv / (suv * suv + suw * suw).sqrt();
    let correlation_at_star = mixed_correlation(alpha_star, suv, suw);

    let steps = (1.0 / ALPHA_GRID_STEP).round() as usize;
    let mut grid_argmax = 0.0;
    let mut grid_max = f64::NEG_INFINITY;
    for i in 0..=steps {
        let alpha = i as f64 * ALPHA_GRID_STEP;
        let g = mixed_correlation(alpha, suv, suw);
        if g > grid_max {
            grid_max = g;
            grid_argmax = alpha;
        }
    }
    Ok(AlphaResult {
        alpha_star,
        correlation_at_star,
        grid_argmax,
        grid_max,
    })
}

/// Generate a random standardized triple whose covariances are positive by
/// construction: `v` and `w` are noisy mixtures of `u`'s source signal.
pub fn random_positive_triple(n: usize, rng: &mut impl Rng) -> Result<StandardizedScoreTriple> {
    let noise = |rng: &mut dyn rand::RngCore| rng.gen::<f64>() * 2.0 - 1.0;
    let z: Vec<f64> = (0..n).map(|_| noise(rng)).collect();
    let a = rng.gen_range(0.5..1.0);
    let b = rng.gen_range(0.3..0.8);
    let c = rng.gen_range(0.5..1.0);
    let d = rng.gen_range(0.3..0.8);
    let v: Vec<f64> = z.iter().map(|&zi| a * zi + b * noise(rng)).collect();
    let w: Vec<f64> = z.iter().map(|&zi| c * zi + d * noise(rng)).collect();
    StandardizedScoreTriple::new(&z, &v, &w)
}

/// Aggregate outcome of running [`optimal_alpha`] over many random
/// positive-covariance triples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaProbeSummary {
    pub triples: usize,
    /// Largest |grid_argmax - alpha_star| observed.
    pub max_alpha_gap: f64,
    /// Largest correlation_at_star - grid_max observed (grid can only
    /// undershoot the closed form).
    pub max_corr_gap: f64,
    /// Smallest correlation_at_star - max(sigma_uv, sigma_uw): positive
    /// means the mixture beats both single components everywhere.
    pub min_margin: f64,
}

/// Run the closed-form-vs-grid comparison over `triples` random triples of
/// length `n`.
pub fn alpha_probe(triples: usize, n: usize, seed: u64) -> Result<AlphaProbeSummary> {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut max_alpha_gap: f64 = 0.0;
    let mut max_corr_gap: f64 = 0.0;
    let mut min_margin = f64::INFINITY;
    for _ in 0..triples {
        let triple = random_positive_triple(n, &mut rng)?;
        let res = optimal_alpha(&triple)?;
        max_alpha_gap = max_alpha_gap.max((res.grid_argmax - res.alpha_star).abs());
        max_corr_gap = max_corr_gap.max(res.correlation_at_star - res.grid_max);
        min_margin = min_margin
            .min(res.correlation_at_star - triple.sigma_uv.max(triple.sigma_uw));
    }
    Ok(AlphaProbeSummary {
        triples,
        max_alpha_gap,
        max_corr_gap,
        min_margin,
    })
}

/// Per-round component correlations inside a diagnostics report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundCorrelation {
    pub round: u32,
    #[serde(flatten)]
    pub report: CorrelationReport,
}

/// The overshadow table plus the parameters that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OvershadowSection {
    pub lambda1: f64,
    pub s_ssl: f64,
    pub rows: Vec<OvershadowRow>,
}

/// Single JSON report emitted per run directory. The correlation section
/// is absent when the run produced no score dumps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub correlations_per_round: Option<Vec<RoundCorrelation>>,
    pub overshadow: OvershadowSection,
    pub alpha_probe: AlphaProbeSummary,
}
