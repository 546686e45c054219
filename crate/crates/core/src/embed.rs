//! Hybrid semantic embedding: one-hot class layout concatenated with the
//! descriptor channels, plus the reduced-resolution copies consumed by
//! coarser generator stages.

use crate::error::{Error, Result};
use crate::gsd::DescriptorTensor;
use crate::raster::Tensor;

#[derive(Debug, Clone, PartialEq)]
pub struct HybridEmbedding {
    pub batch: usize,
    /// Number of leading one-hot channels; also the split index.
    pub num_classes: usize,
    pub descriptor_channels: usize,
    pub height: usize,
    pub width: usize,
    /// `(batch, num_classes + descriptor_channels, height, width)`.
    pub values: Vec<f32>,
}

impl HybridEmbedding {
    pub fn channels(&self) -> usize {
        self.num_classes + self.descriptor_channels
    }

    pub fn split_index(&self) -> usize {
        self.num_classes
    }

    pub fn to_tensor(&self) -> Tensor {
        Tensor::from_f32(
            vec![self.batch, self.channels(), self.height, self.width],
            self.values.clone(),
        )
        .expect("embedding values are finite")
    }

    /// Recovers the `(B, K, H, W)` one-hot block and the `(B, G, H, W)`
    /// descriptor block.
    pub fn split(&self) -> (Tensor, Tensor) {
        let plane = self.height * self.width;
        let item = self.channels() * plane;
        let cut = self.num_classes * plane;
        let mut onehot = Vec::with_capacity(self.batch * cut);
        let mut gsd = Vec::with_capacity(self.batch * (item - cut));
        for chunk in self.values.chunks_exact(item) {
            onehot.extend_from_slice(&chunk[..cut]);
            gsd.extend_from_slice(&chunk[cut..]);
        }
        let dims = |c| vec![self.batch, c, self.height, self.width];
        (
            Tensor::from_f32(dims(self.num_classes), onehot).expect("finite"),
            Tensor::from_f32(dims(self.descriptor_channels), gsd).expect("finite"),
        )
    }
}

/// Concatenates one-hot channels (first) and descriptor channels.
/// `onehot` is `(B, K, H, W)` or, for a single item, `(K, H, W)`.
pub fn assemble(onehot: &Tensor, gsd: &DescriptorTensor) -> Result<HybridEmbedding> {
    let (batch, k, h, w) = match *onehot.shape() {
        [b, k, h, w] => (b, k, h, w),
        [k, h, w] => (1, k, h, w),
        ref s => {
            return Err(Error::Shape(format!(
                "one-hot tensor must be 3-D or 4-D, got {s:?}"
            )))
        }
    };
    if (batch, h, w) != (gsd.batch, gsd.height, gsd.width) {
        return Err(Error::Shape(format!(
            "one-hot is {batch}x{h}x{w} (BxHxW) but descriptors are {}x{}x{}",
            gsd.batch, gsd.height, gsd.width
        )));
    }
    let hot = onehot
        .as_f32()
        .ok_or_else(|| Error::Dtype("one-hot tensor must be float32".into()))?;
    let plane = h * w;
    for b in 0..batch {
        for p in 0..plane {
            let mut sum = 0f32;
            for c in 0..k {
                let v = hot[(b * k + c) * plane + p];
                if v != 0.0 && v != 1.0 {
                    return Err(Error::Invalid(format!("one-hot channel holds {v}")));
                }
                sum += v;
            }
            if sum != 1.0 {
                return Err(Error::Invalid(format!(
                    "pixel {p} of item {b} has {sum} active classes"
                )));
            }
        }
    }
    let g = gsd.channels();
    let mut values = Vec::with_capacity(batch * (k + g) * plane);
    for b in 0..batch {
        values.extend_from_slice(&hot[b * k * plane..(b + 1) * k * plane]);
        values.extend_from_slice(gsd.item(b));
    }
    Ok(HybridEmbedding {
        batch,
        num_classes: k,
        descriptor_channels: g,
        height: h,
        width: w,
        values,
    })
}

/// Target resolutions, finest first; each must divide the one before it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PyramidSpec {
    scales: Vec<(usize, usize)>,
}

impl PyramidSpec {
    pub fn new(scales: Vec<(usize, usize)>) -> Result<Self> {
        if scales.is_empty() {
            return Err(Error::Config("pyramid needs at least one scale".into()));
        }
        if scales.iter().any(|&(h, w)| h == 0 || w == 0) {
            return Err(Error::Config("pyramid scales must be positive".into()));
        }
        for pair in scales.windows(2) {
            let ((h0, w0), (h1, w1)) = (pair[0], pair[1]);
            if h0 % h1 != 0 || w0 % w1 != 0 {
                return Err(Error::Config(format!(
                    "scale {h1}x{w1} does not divide {h0}x{w0}"
                )));
            }
        }
        Ok(PyramidSpec { scales })
    }

    /// Square scales, e.g. `[256, 128, 64]`.
    pub fn square(sizes: &[usize]) -> Result<Self> {
        Self::new(sizes.iter().map(|&s| (s, s)).collect())
    }

    /// Halving chain starting at `(height, width)` with `levels` entries.
    pub fn halving(height: usize, width: usize, levels: usize) -> Result<Self> {
        Self::new(
            (0..levels)
                .map(|l| (height >> l, width >> l))
                .collect(),
        )
    }

    pub fn scales(&self) -> &[(usize, usize)] {
        &self.scales
    }
}

/// Reduces the embedding to every pyramid scale. One-hot channels are
/// reduced by majority vote per block with ties going to the lowest class
/// id; descriptor channels by block mean. Each level is computed from the
/// full-resolution input.
pub fn downsample(e: &HybridEmbedding, spec: &PyramidSpec) -> Result<Vec<HybridEmbedding>> {
    spec.scales()
        .iter()
        .map(|&(h, w)| downsample_to(e, h, w))
        .collect()
}

fn downsample_to(e: &HybridEmbedding, h: usize, w: usize) -> Result<HybridEmbedding> {
    if !e.height.is_multiple_of(h) || !e.width.is_multiple_of(w) {
        return Err(Error::Shape(format!(
            "scale {h}x{w} does not divide {}x{}",
            e.height, e.width
        )));
    }
    let (fy, fx) = (e.height / h, e.width / w);
    let (k, c) = (e.num_classes, e.channels());
    let (src_plane, dst_plane) = (e.height * e.width, h * w);
    let block = (fy * fx) as f64;
    let mut values = vec![0f32; e.batch * c * dst_plane];
    let mut votes = vec![0usize; k];

    for b in 0..e.batch {
        let src = &e.values[b * c * src_plane..(b + 1) * c * src_plane];
        let dst = &mut values[b * c * dst_plane..(b + 1) * c * dst_plane];
        for by in 0..h {
            for bx in 0..w {
                let cells = (by * fy..(by + 1) * fy)
                    .flat_map(|y| (bx * fx..(bx + 1) * fx).map(move |x| y * e.width + x));
                votes.iter_mut().for_each(|v| *v = 0);
                for p in cells.clone() {
                    for (cls, v) in votes.iter_mut().enumerate() {
                        if src[cls * src_plane + p] == 1.0 {
                            *v += 1;
                        }
                    }
                }
                let winner = votes
                    .iter()
                    .enumerate()
                    .fold((0, 0), |best, (cls, &n)| if n > best.1 { (cls, n) } else { best })
                    .0;
                let q = by * w + bx;
                if k > 0 {
                    dst[winner * dst_plane + q] = 1.0;
                }
                for ch in k..c {
                    let sum: f64 = cells
                        .clone()
                        .map(|p| f64::from(src[ch * src_plane + p]))
                        .sum();
                    dst[ch * dst_plane + q] = (sum / block) as f32;
                }
            }
        }
    }
    Ok(HybridEmbedding {
        height: h,
        width: w,
        values,
        ..e.clone()
    })
}

/// Nearest-neighbour enlargement by an integer factor per axis.
pub fn upsample_nearest(e: &HybridEmbedding, height: usize, width: usize) -> Result<HybridEmbedding> {
    if !height.is_multiple_of(e.height) || !width.is_multiple_of(e.width) {
        return Err(Error::Shape(format!(
            "{height}x{width} is not a multiple of {}x{}",
            e.height, e.width
        )));
    }
    let (fy, fx) = (height / e.height, width / e.width);
    let c = e.channels();
    let mut values = Vec::with_capacity(e.batch * c * height * width);
    for plane in e.values.chunks_exact(e.height * e.width) {
        for y in 0..height {
            for x in 0..width {
                values.push(plane[(y / fy) * e.width + x / fx]);
            }
        }
    }
    Ok(HybridEmbedding {
        height,
        width,
        values,
        ..e.clone()
    })
}
