//! Evaluation metrics over externally extracted features and predictions:
//! Fréchet distance between fitted Gaussians, confusion-matrix scores
//! (mIoU, pixel accuracy, frequency-weighted IoU), and class-masked
//! perceptual diversity (mCSD / mOCD).

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::raster::{LabelMap, Tensor};

/// Eigenvalues of a covariance may dip this far below zero (scaled by
/// `max(1, largest eigenvalue)`) before the matrix is rejected.
pub const PSD_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianStats {
    pub mean: DVector<f64>,
    /// Unbiased (divisor `n - 1`) and exactly symmetric.
    pub cov: DMatrix<f64>,
    pub samples: usize,
}

impl GaussianStats {
    pub fn dim(&self) -> usize {
        self.mean.len()
    }
}

/// Fits mean and unbiased covariance to the rows of an `(n, dim)` tensor.
pub fn fit_gaussian(features: &Tensor) -> Result<GaussianStats> {
    let &[n, dim] = features.shape() else {
        return Err(Error::Shape(format!(
            "features must be 2-D (n, dim), got {:?}",
            features.shape()
        )));
    };
    fit_gaussian_rows(n, dim, &features.to_f64_vec())
}

/// Same as [`fit_gaussian`] over a row-major `n x dim` slice.
pub fn fit_gaussian_rows(n: usize, dim: usize, rows: &[f64]) -> Result<GaussianStats> {
    if n < 2 {
        return Err(Error::NotEnoughSamples(n));
    }
    if dim == 0 {
        return Err(Error::Shape("feature dimension must be positive".into()));
    }
    if rows.len() != n * dim {
        return Err(Error::Shape(format!(
            "{} values for {n} rows of {dim}",
            rows.len()
        )));
    }
    let x = DMatrix::from_row_slice(n, dim, rows);
    let mean = x.row_mean().transpose();
    let mut centered = x;
    for mut row in centered.row_iter_mut() {
        row -= mean.transpose();
    }
    let mut cov = centered.transpose() * &centered / (n - 1) as f64;
    symmetrize(&mut cov);
    Ok(GaussianStats {
        mean,
        cov,
        samples: n,
    })
}

fn symmetrize(m: &mut DMatrix<f64>) {
    let t = m.transpose();
    *m += t;
    *m *= 0.5;
}

fn checked_eigen(cov: &DMatrix<f64>) -> Result<SymmetricEigen<f64, nalgebra::Dyn>> {
    let eig = SymmetricEigen::new(cov.clone());
    let max = eig.eigenvalues.iter().copied().fold(1.0, f64::max);
    if let Some(&bad) = eig
        .eigenvalues
        .iter()
        .find(|&&l| l < -PSD_TOLERANCE * max)
    {
        return Err(Error::IndefiniteCovariance(bad));
    }
    Ok(eig)
}

/// Principal square root of a positive semidefinite matrix.
fn psd_sqrt(eig: &SymmetricEigen<f64, nalgebra::Dyn>) -> DMatrix<f64> {
    let roots = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
    &eig.eigenvectors * DMatrix::from_diagonal(&roots) * eig.eigenvectors.transpose()
}

/// `||mu_a - mu_b||^2 + Tr(C_a + C_b - 2 (C_a C_b)^{1/2})`.
///
/// The trace of the cross term is taken as the sum of square roots of the
/// eigenvalues of the symmetric matrix `C_a^{1/2} C_b C_a^{1/2}`, which has
/// the same spectrum as `C_a C_b`.
pub fn frechet_distance(a: &GaussianStats, b: &GaussianStats) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::Shape(format!(
            "feature dimensions differ: {} vs {}",
            a.dim(),
            b.dim()
        )));
    }
    let eig_a = checked_eigen(&a.cov)?;
    checked_eigen(&b.cov)?;
    let root_a = psd_sqrt(&eig_a);
    let mut inner = &root_a * &b.cov * &root_a;
    symmetrize(&mut inner);
    let cross: f64 = SymmetricEigen::new(inner)
        .eigenvalues
        .iter()
        .map(|&l| l.max(0.0).sqrt())
        .sum();
    let mean_term = (&a.mean - &b.mean).norm_squared();
    let d = mean_term + a.cov.trace() + b.cov.trace() - 2.0 * cross;
    Ok(d.max(0.0))
}

/// `K x K` pixel counts; entry `(i, j)` counts pixels of true class `i`
/// predicted as `j`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConfusionMatrix {
    num_classes: usize,
    counts: Vec<u64>,
    ignore: Option<usize>,
}

impl ConfusionMatrix {
    pub fn new(num_classes: usize, ignore: Option<usize>) -> Self {
        ConfusionMatrix {
            num_classes,
            counts: vec![0; num_classes * num_classes],
            ignore,
        }
    }

    pub fn from_counts(num_classes: usize, counts: Vec<u64>) -> Result<Self> {
        if counts.len() != num_classes * num_classes {
            return Err(Error::Shape(format!(
                "{} counts for {num_classes} classes",
                counts.len()
            )));
        }
        Ok(ConfusionMatrix {
            num_classes,
            counts,
            ignore: None,
        })
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn ignore(&self) -> Option<usize> {
        self.ignore
    }

    pub fn get(&self, truth: usize, pred: usize) -> u64 {
        self.counts[truth * self.num_classes + pred]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Adds one prediction/truth pair. Pixels whose true class is the
    /// ignored class are skipped.
    pub fn accumulate(&mut self, pred: &LabelMap, truth: &LabelMap) -> Result<()> {
        if (pred.height(), pred.width()) != (truth.height(), truth.width()) {
            return Err(Error::Shape(format!(
                "prediction {}x{} vs truth {}x{}",
                pred.height(),
                pred.width(),
                truth.height(),
                truth.width()
            )));
        }
        if pred.num_classes() != self.num_classes || truth.num_classes() != self.num_classes {
            return Err(Error::Shape(format!(
                "class counts {} / {} do not match matrix size {}",
                pred.num_classes(),
                truth.num_classes(),
                self.num_classes
            )));
        }
        let k = self.num_classes;
        for (&p, &t) in pred.labels().iter().zip(truth.labels()) {
            if Some(t as usize) == self.ignore {
                continue;
            }
            self.counts[t as usize * k + p as usize] += 1;
        }
        Ok(())
    }

    /// Sums two shards computed over disjoint image sets.
    pub fn merge(&mut self, other: &ConfusionMatrix) -> Result<()> {
        if other.num_classes != self.num_classes || other.ignore != self.ignore {
            return Err(Error::Shape("cannot merge differently shaped matrices".into()));
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        Ok(())
    }

    fn row_sum(&self, i: usize) -> u64 {
        (0..self.num_classes).map(|j| self.get(i, j)).sum()
    }

    fn col_sum(&self, j: usize) -> u64 {
        (0..self.num_classes).map(|i| self.get(i, j)).sum()
    }

    /// IoU per class; `None` for the ignored class and for classes absent
    /// from both truth and prediction.
    pub fn class_iou(&self) -> Vec<Option<f64>> {
        (0..self.num_classes)
            .map(|i| {
                if Some(i) == self.ignore {
                    return None;
                }
                let tp = self.get(i, i);
                let union = self.row_sum(i) + self.col_sum(i) - tp;
                (union > 0).then(|| tp as f64 / union as f64)
            })
            .collect()
    }

    fn nonempty(&self) -> Result<u64> {
        match self.total() {
            0 => Err(Error::Empty("confusion matrix")),
            t => Ok(t),
        }
    }
}

pub fn confusion(pred: &LabelMap, truth: &LabelMap, ignore: Option<usize>) -> Result<ConfusionMatrix> {
    let mut cm = ConfusionMatrix::new(truth.num_classes(), ignore);
    cm.accumulate(pred, truth)?;
    Ok(cm)
}

/// Mean IoU over classes with a nonzero union.
pub fn miou(cm: &ConfusionMatrix) -> Result<f64> {
    cm.nonempty()?;
    let ious: Vec<f64> = cm.class_iou().into_iter().flatten().collect();
    Ok(ious.iter().sum::<f64>() / ious.len() as f64)
}

pub fn accuracy(cm: &ConfusionMatrix) -> Result<f64> {
    let total = cm.nonempty()?;
    let diag: u64 = (0..cm.num_classes).map(|i| cm.get(i, i)).sum();
    Ok(diag as f64 / total as f64)
}

/// IoU weighted by each class's share of true pixels.
pub fn fwiou(cm: &ConfusionMatrix) -> Result<f64> {
    let total = cm.nonempty()?;
    Ok(cm
        .class_iou()
        .iter()
        .enumerate()
        .filter_map(|(i, iou)| iou.map(|v| cm.row_sum(i) as f64 / total as f64 * v))
        .sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SegmentationScores {
    pub miou: f64,
    pub accuracy: f64,
    pub fwiou: f64,
}

pub fn segmentation_scores(cm: &ConfusionMatrix) -> Result<SegmentationScores> {
    Ok(SegmentationScores {
        miou: miou(cm)?,
        accuracy: accuracy(cm)?,
        fwiou: fwiou(cm)?,
    })
}

/// One generated image pair: its per-pixel perceptual distance map and the
/// label map both images were synthesised from.
#[derive(Debug, Clone, PartialEq)]
pub struct DistancePair {
    pub distances: Vec<f32>,
    pub labels: LabelMap,
}

impl DistancePair {
    pub fn new(distances: Vec<f32>, labels: LabelMap) -> Result<Self> {
        if distances.len() != labels.height() * labels.width() {
            return Err(Error::Shape(format!(
                "{} distances for a {}x{} label map",
                distances.len(),
                labels.height(),
                labels.width()
            )));
        }
        if let Some(d) = distances.iter().find(|d| !d.is_finite() || **d < 0.0) {
            return Err(Error::Invalid(format!("distance {d} is not a finite non-negative value")));
        }
        Ok(DistancePair { distances, labels })
    }

    /// From an `(H, W)` or `(1, H, W)` distance tensor.
    pub fn from_tensor(distances: &Tensor, labels: LabelMap) -> Result<Self> {
        let hw = match *distances.shape() {
            [h, w] | [1, h, w] => (h, w),
            ref s => return Err(Error::Shape(format!("distance map must be 2-D, got {s:?}"))),
        };
        if hw != (labels.height(), labels.width()) {
            return Err(Error::Shape(format!(
                "distance map {}x{} vs labels {}x{}",
                hw.0,
                hw.1,
                labels.height(),
                labels.width()
            )));
        }
        let values = distances.to_f64_vec().into_iter().map(|v| v as f32).collect();
        Self::new(values, labels)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiversityReport {
    pub lpips_mean: f64,
    pub mcsd: f64,
    pub mocd: f64,
    /// Mean distance inside each class region, `None` when absent.
    pub class_specific: Vec<Option<f64>>,
    /// Mean distance outside each class region, `None` when the class is
    /// absent or covers every pixel.
    pub other_classes: Vec<Option<f64>>,
    /// Classes with no pixels in any pair.
    pub skipped_classes: Vec<usize>,
    /// Present classes whose complement is empty, left out of mOCD.
    pub empty_complements: Vec<usize>,
}

/// Pixel-pooled mean distances per class and outside each class, averaged
/// over the classes that occur.
pub fn diversity(pairs: &[DistancePair], num_classes: usize) -> Result<DiversityReport> {
    if pairs.is_empty() {
        return Err(Error::Empty("distance pairs"));
    }
    let mut sums = vec![0f64; num_classes];
    let mut counts = vec![0u64; num_classes];
    let mut total_sum = 0f64;
    let mut total_count = 0u64;
    for pair in pairs {
        for (&d, &l) in pair.distances.iter().zip(pair.labels.labels()) {
            let l = l as usize;
            if l >= num_classes {
                return Err(Error::LabelOutOfRange {
                    label: l as u32,
                    x: 0,
                    y: 0,
                    num_classes,
                });
            }
            sums[l] += f64::from(d);
            counts[l] += 1;
            total_sum += f64::from(d);
            total_count += 1;
        }
    }
    let class_specific: Vec<Option<f64>> = (0..num_classes)
        .map(|c| (counts[c] > 0).then(|| sums[c] / counts[c] as f64))
        .collect();
    let other_classes: Vec<Option<f64>> = (0..num_classes)
        .map(|c| {
            let rest = total_count - counts[c];
            (counts[c] > 0 && rest > 0).then(|| (total_sum - sums[c]) / rest as f64)
        })
        .collect();
    let mean_of = |v: &[Option<f64>]| {
        let present: Vec<f64> = v.iter().flatten().copied().collect();
        if present.is_empty() {
            0.0
        } else {
            present.iter().sum::<f64>() / present.len() as f64
        }
    };
    Ok(DiversityReport {
        lpips_mean: total_sum / total_count as f64,
        mcsd: mean_of(&class_specific),
        mocd: mean_of(&other_classes),
        skipped_classes: (0..num_classes).filter(|&c| counts[c] == 0).collect(),
        empty_complements: (0..num_classes)
            .filter(|&c| counts[c] > 0 && counts[c] == total_count)
            .collect(),
        class_specific,
        other_classes,
    })
}
