//! Forward values of the synthesis training objectives, computed in `f64`
//! over tensors produced elsewhere (discriminator scores and features,
//! backbone features, refinement-network logits). Expectations are
//! arithmetic means over all elements.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::{LabelMap, Tensor};

/// Number of backbone feature layers compared by the perceptual term.
pub const PERCEPTUAL_LAYERS: usize = 5;
/// Epoch at which the synthesized-image refinement terms switch on.
pub const DEFAULT_WARMUP_EPOCHS: u32 = 80;
/// Probability floor applied before the logarithm in the consistency term.
pub const PROB_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LossWeights {
    pub lambda_adv: f64,
    pub lambda_fm: f64,
    pub lambda_perc: f64,
    pub lambda_ref: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        LossWeights {
            lambda_adv: 1.0,
            lambda_fm: 10.0,
            lambda_perc: 10.0,
            lambda_ref: 1.0,
        }
    }
}

impl LossWeights {
    pub fn validate(&self) -> Result<()> {
        let all = [self.lambda_adv, self.lambda_fm, self.lambda_perc, self.lambda_ref];
        if all.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::Config(format!(
                "loss weights must be finite and non-negative, got {all:?}"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RefineSchedule {
    pub gamma: u32,
    pub epoch: u32,
}

impl RefineSchedule {
    pub fn new(epoch: u32) -> Self {
        RefineSchedule {
            gamma: DEFAULT_WARMUP_EPOCHS,
            epoch,
        }
    }

    pub fn warmed_up(&self) -> bool {
        self.epoch >= self.gamma
    }
}

fn nonempty(t: &Tensor, what: &'static str) -> Result<Vec<f64>> {
    if t.is_empty() {
        return Err(Error::Empty(what));
    }
    Ok(t.to_f64_vec())
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Discriminator hinge loss: `E[max(0, 1 - real)] + E[max(0, 1 + fake)]`.
pub fn adv_d(real_scores: &Tensor, fake_scores: &Tensor) -> Result<f64> {
    let real = nonempty(real_scores, "real scores")?;
    let fake = nonempty(fake_scores, "fake scores")?;
    let real_term: Vec<f64> = real.iter().map(|&r| -(r - 1.0).min(0.0)).collect();
    let fake_term: Vec<f64> = fake.iter().map(|&f| -(-1.0 - f).min(0.0)).collect();
    Ok(mean(&real_term) + mean(&fake_term))
}

/// Generator adversarial loss: the negated mean fake score.
pub fn adv_g(fake_scores: &Tensor) -> Result<f64> {
    Ok(-mean(&nonempty(fake_scores, "fake scores")?))
}

fn paired_l1(real: &[Tensor], fake: &[Tensor]) -> Result<Vec<(f64, usize)>> {
    if real.is_empty() {
        return Err(Error::Empty("feature stack"));
    }
    if real.len() != fake.len() {
        return Err(Error::Shape(format!(
            "feature stacks have {} and {} layers",
            real.len(),
            fake.len()
        )));
    }
    real.iter()
        .zip(fake)
        .enumerate()
        .map(|(i, (r, f))| {
            if r.shape() != f.shape() {
                return Err(Error::Shape(format!(
                    "layer {i}: {:?} vs {:?}",
                    r.shape(),
                    f.shape()
                )));
            }
            if r.is_empty() {
                return Err(Error::Empty("feature layer"));
            }
            let l1 = r
                .to_f64_vec()
                .iter()
                .zip(f.to_f64_vec())
                .map(|(a, b)| (a - b).abs())
                .sum();
            Ok((l1, r.len()))
        })
        .collect()
}

/// Discriminator feature matching: per-layer L1 divided by the layer's
/// element count, summed over layers.
pub fn feature_match(real: &[Tensor], fake: &[Tensor]) -> Result<f64> {
    Ok(paired_l1(real, fake)?
        .into_iter()
        .map(|(l1, n)| l1 / n as f64)
        .sum())
}

/// Perceptual loss: unnormalised L1 per backbone layer, summed. With
/// `per_element` set each layer is divided by its element count instead.
pub fn perceptual(real: &[Tensor], fake: &[Tensor], per_element: bool) -> Result<f64> {
    Ok(paired_l1(real, fake)?
        .into_iter()
        .map(|(l1, n)| if per_element { l1 / n as f64 } else { l1 })
        .sum())
}

/// Class scores before softmax, `(batch, classes, height, width)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LogitMap {
    pub batch: usize,
    pub classes: usize,
    pub height: usize,
    pub width: usize,
    pub values: Vec<f64>,
}

impl LogitMap {
    /// Accepts `(B, K, H, W)` or a single `(K, H, W)` item.
    pub fn from_tensor(t: &Tensor) -> Result<Self> {
        let (batch, classes, height, width) = match *t.shape() {
            [b, k, h, w] => (b, k, h, w),
            [k, h, w] => (1, k, h, w),
            ref s => return Err(Error::Shape(format!("logits must be 3-D or 4-D, got {s:?}"))),
        };
        if batch * classes * height * width == 0 {
            return Err(Error::Empty("logit map"));
        }
        Ok(LogitMap {
            batch,
            classes,
            height,
            width,
            values: t.to_f64_vec(),
        })
    }

    fn plane(&self) -> usize {
        self.height * self.width
    }

    /// Log-softmax over classes at one pixel of one item, max-shifted.
    fn log_softmax(&self, b: usize, p: usize, out: &mut [f64]) {
        let plane = self.plane();
        let base = b * self.classes * plane + p;
        let logit = |k: usize| self.values[base + k * plane];
        let max = (0..self.classes).map(logit).fold(f64::NEG_INFINITY, f64::max);
        let log_z = (0..self.classes).map(|k| (logit(k) - max).exp()).sum::<f64>().ln();
        for (k, o) in out.iter_mut().enumerate() {
            *o = logit(k) - max - log_z;
        }
    }

    fn same_shape(&self, other: &LogitMap) -> bool {
        (self.batch, self.classes, self.height, self.width)
            == (other.batch, other.classes, other.height, other.width)
    }
}

/// Per-pixel cross-entropy against the mask, averaged over pixels then over
/// the batch. Serves both the real-image and the synthesized-image terms.
pub fn ref_ce(logits: &LogitMap, masks: &[LabelMap]) -> Result<f64> {
    if masks.len() != logits.batch {
        return Err(Error::Shape(format!(
            "{} masks for a batch of {}",
            masks.len(),
            logits.batch
        )));
    }
    let mut log_p = vec![0f64; logits.classes];
    let mut item_means = Vec::with_capacity(logits.batch);
    for (b, mask) in masks.iter().enumerate() {
        if (mask.height(), mask.width()) != (logits.height, logits.width) {
            return Err(Error::Shape(format!(
                "mask {}x{} vs logits {}x{}",
                mask.height(),
                mask.width(),
                logits.height,
                logits.width
            )));
        }
        if mask.num_classes() != logits.classes {
            return Err(Error::Shape(format!(
                "mask has {} classes, logits {}",
                mask.num_classes(),
                logits.classes
            )));
        }
        let mut sum = 0f64;
        for (p, &label) in mask.labels().iter().enumerate() {
            logits.log_softmax(b, p, &mut log_p);
            sum -= log_p[label as usize];
        }
        item_means.push(sum / logits.plane() as f64);
    }
    Ok(mean(&item_means))
}

/// Cross-entropy of the fake-image class distribution against the
/// real-image one, summed over classes and averaged over pixels.
pub fn ref_consistency(real: &LogitMap, fake: &LogitMap) -> Result<f64> {
    if !real.same_shape(fake) {
        return Err(Error::Shape(format!(
            "logit maps differ: {}x{}x{}x{} vs {}x{}x{}x{}",
            real.batch,
            real.classes,
            real.height,
            real.width,
            fake.batch,
            fake.classes,
            fake.height,
            fake.width
        )));
    }
    let k = real.classes;
    let (mut lp_real, mut lp_fake) = (vec![0f64; k], vec![0f64; k]);
    let mut sum = 0f64;
    for b in 0..real.batch {
        for p in 0..real.plane() {
            real.log_softmax(b, p, &mut lp_real);
            fake.log_softmax(b, p, &mut lp_fake);
            sum -= lp_real
                .iter()
                .zip(&lp_fake)
                .map(|(&lr, &lf)| lr.exp() * lf.exp().max(PROB_FLOOR).ln())
                .sum::<f64>();
        }
    }
    Ok(sum / (real.batch * real.plane()) as f64)
}

/// Refinement loss under the warm-up schedule: only the real-image term
/// before epoch `gamma`, all three terms from then on.
pub fn ref_total(schedule: RefineSchedule, real_term: f64, fake_term: f64, consistency: f64) -> f64 {
    if schedule.warmed_up() {
        real_term + fake_term + consistency
    } else {
        real_term
    }
}

/// Weighted generator objective.
pub fn total(weights: &LossWeights, adv_g: f64, fm: f64, perc: f64, refine: f64) -> f64 {
    weights.lambda_adv * adv_g
        + weights.lambda_fm * fm
        + weights.lambda_perc * perc
        + weights.lambda_ref * refine
}
