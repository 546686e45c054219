//! Dense log-polar contour descriptors.
//!
//! For every pixel of an instance, the instance's contour points are placed
//! in a polar frame centred on that pixel, distances are rescaled so the
//! farthest contour point sits at 2, and the points are counted into an
//! `n_rho x n_theta` log-polar histogram normalised to unit mass. The
//! per-pixel histograms are written channel-first into a
//! `(batch, n_rho * n_theta, height, width)` tensor which is finally
//! standardised per batch item.
//!
//! Channel layout: `channel = (radial_bin - 1) * n_theta + (angular_bin - 1)`.

use std::f64::consts::TAU;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::contour::{self, Pixel};
use crate::error::{Error, Result};
use crate::raster::{InstanceMap, Tensor};

pub const DEFAULT_N_RHO: usize = 6;
pub const DEFAULT_N_THETA: usize = 12;
pub const DEFAULT_R_INNER: f64 = 0.125;
pub const DEFAULT_R_OUTER: f64 = 2.0;
pub const DEFAULT_EPSILON: f64 = 1e-8;

/// Which values feed the mean and standard deviation used to standardise a
/// batch item.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Standardization {
    /// Every channel of every pixel, background zeros included.
    #[default]
    Tensor,
    /// Only the descriptors of instance pixels. Background pixels still
    /// receive the standardised image of a raw zero.
    InstancePixels,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GsdConfig {
    pub n_rho: usize,
    pub n_theta: usize,
    pub r_inner: f64,
    pub r_outer: f64,
    pub epsilon: f64,
    pub standardization: Standardization,
}

impl Default for GsdConfig {
    fn default() -> Self {
        GsdConfig {
            n_rho: DEFAULT_N_RHO,
            n_theta: DEFAULT_N_THETA,
            r_inner: DEFAULT_R_INNER,
            r_outer: DEFAULT_R_OUTER,
            epsilon: DEFAULT_EPSILON,
            standardization: Standardization::Tensor,
        }
    }
}

impl GsdConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_rho == 0 || self.n_theta == 0 {
            return Err(Error::Config(format!(
                "bin counts must be positive, got n_rho={} n_theta={}",
                self.n_rho, self.n_theta
            )));
        }
        if !(self.r_inner > 0.0 && self.r_inner < self.r_outer && self.r_outer.is_finite()) {
            return Err(Error::Config(format!(
                "need 0 < r_inner < r_outer, got {} and {}",
                self.r_inner, self.r_outer
            )));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::Config(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: GsdConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn channels(&self) -> usize {
        self.n_rho * self.n_theta
    }

    pub fn channel(&self, radial_bin: usize, angular_bin: usize) -> usize {
        (radial_bin - 1) * self.n_theta + (angular_bin - 1)
    }
}

/// Position of a contour point relative to a query pixel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarPoint {
    pub r: f64,
    /// Counter-clockwise angle in `[0, 2pi)`, measured with the image y axis
    /// flipped to point up.
    pub theta: f64,
}

pub fn polar_coords(query: Pixel, point: Pixel) -> PolarPoint {
    let dx = point.x as f64 - query.x as f64;
    let up = query.y as f64 - point.y as f64;
    let r = (dx * dx + up * up).sqrt();
    let theta = up.atan2(dx);
    let theta = if theta < 0.0 { theta + TAU } else { theta };
    PolarPoint { r, theta }
}

/// Rescales distances so the largest maps to 2. All-zero input stays zero.
pub fn normalize_radii(rs: &[f64]) -> Vec<f64> {
    let r_max = rs.iter().copied().fold(0.0, f64::max);
    if r_max == 0.0 {
        return vec![0.0; rs.len()];
    }
    rs.iter().map(|&r| 2.0 * r / r_max).collect()
}

/// Upper bin edges, log-spaced from `r_inner` to `r_outer` inclusive.
pub fn radial_edges(cfg: &GsdConfig) -> Vec<f64> {
    let n = cfg.n_rho;
    if n == 1 {
        return vec![cfg.r_outer];
    }
    let (lo, hi) = (cfg.r_inner.log10(), cfg.r_outer.log10());
    let mut edges: Vec<f64> = (0..n)
        .map(|k| 10f64.powf(lo + (hi - lo) * (k as f64 / (n - 1) as f64)))
        .collect();
    edges[0] = cfg.r_inner;
    edges[n - 1] = cfg.r_outer;
    edges
}

/// 1-based index of the first edge not below `r_norm`. Values past the last
/// edge are clamped into the last bin; the flag reports the clamp.
pub fn radial_bin(r_norm: f64, edges: &[f64]) -> (usize, bool) {
    match edges.iter().position(|&e| r_norm <= e) {
        Some(k) => (k + 1, false),
        None => (edges.len(), true),
    }
}

/// 1-based angular bin of `theta` in `[0, 2pi)`.
pub fn angular_bin(theta: f64, n_theta: usize) -> usize {
    let width = TAU / n_theta as f64;
    let bin = 1 + (theta / width).floor() as usize;
    bin.min(n_theta)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointHistogram {
    /// Normalised mass per channel, in channel layout order.
    pub values: Vec<f64>,
    /// Number of contour points counted.
    pub count: usize,
    /// Points whose normalised radius fell past the last edge.
    pub clamped: usize,
}

/// Log-polar histogram of `contour` seen from `query`.
pub fn point_histogram(query: Pixel, contour: &[Pixel], cfg: &GsdConfig) -> PointHistogram {
    let edges = radial_edges(cfg);
    let polar: Vec<PolarPoint> = contour.iter().map(|&p| polar_coords(query, p)).collect();
    let radii: Vec<f64> = polar.iter().map(|p| p.r).collect();
    let mut counts = vec![0u32; cfg.channels()];
    let mut clamped = 0;
    for (p, r_norm) in polar.iter().zip(normalize_radii(&radii)) {
        let (rb, over) = radial_bin(r_norm, &edges);
        clamped += usize::from(over);
        counts[cfg.channel(rb, angular_bin(p.theta, cfg.n_theta))] += 1;
    }
    let total = contour.len() as f64 + cfg.epsilon;
    PointHistogram {
        values: counts.iter().map(|&c| f64::from(c) / total).collect(),
        count: contour.len(),
        clamped,
    }
}

/// Descriptor stack for a batch of instance maps.
#[derive(Debug, Clone, PartialEq)]
pub struct DescriptorTensor {
    pub batch: usize,
    pub height: usize,
    pub width: usize,
    pub config: GsdConfig,
    /// `(batch, channels, height, width)`, row-major.
    pub values: Vec<f32>,
    /// `(batch, height, width)`: whether the pixel belongs to an instance.
    pub coverage: Vec<bool>,
    /// Contour points whose radius was clamped into the last bin.
    pub clamped_radial: usize,
}

impl DescriptorTensor {
    pub fn channels(&self) -> usize {
        self.config.channels()
    }

    fn item_len(&self) -> usize {
        self.channels() * self.height * self.width
    }

    pub fn item(&self, b: usize) -> &[f32] {
        let n = self.item_len();
        &self.values[b * n..(b + 1) * n]
    }

    /// All channel values at one pixel.
    pub fn histogram_at(&self, b: usize, x: usize, y: usize) -> Vec<f32> {
        let plane = self.height * self.width;
        let item = self.item(b);
        (0..self.channels())
            .map(|c| item[c * plane + y * self.width + x])
            .collect()
    }

    pub fn to_tensor(&self) -> Tensor {
        Tensor::from_f32(
            vec![self.batch, self.channels(), self.height, self.width],
            self.values.clone(),
        )
        .expect("descriptor values are finite")
    }

    /// Wraps a `(B, C, H, W)` float32 tensor. Coverage is inferred as "any
    /// channel nonzero", which holds for raw descriptors.
    pub fn from_tensor(tensor: &Tensor, config: GsdConfig) -> Result<Self> {
        let &[batch, channels, height, width] = tensor.shape() else {
            return Err(Error::Shape(format!(
                "descriptor tensor must be 4-D, got {:?}",
                tensor.shape()
            )));
        };
        if channels != config.channels() {
            return Err(Error::Shape(format!(
                "{channels} channels but config implies {}",
                config.channels()
            )));
        }
        let values = tensor
            .as_f32()
            .ok_or_else(|| Error::Dtype("descriptor tensor must be float32".into()))?
            .to_vec();
        let plane = height * width;
        let coverage = (0..batch * plane)
            .map(|i| {
                let (b, p) = (i / plane, i % plane);
                (0..channels).any(|c| values[(b * channels + c) * plane + p] != 0.0)
            })
            .collect();
        Ok(DescriptorTensor {
            batch,
            height,
            width,
            config,
            values,
            coverage,
            clamped_radial: 0,
        })
    }
}

/// Per-offset polar lookups for one raster size. Entries are produced by
/// [`polar_coords`] and [`angular_bin`], so lookups agree exactly with the
/// direct computation.
struct OffsetTable {
    width: usize,
    height: usize,
    radius: Vec<f64>,
    angle_bin: Vec<u16>,
}

impl OffsetTable {
    fn new(width: usize, height: usize, n_theta: usize) -> Self {
        let (tw, th) = (2 * width - 1, 2 * height - 1);
        let mut radius = Vec::with_capacity(tw * th);
        let mut angle_bin = Vec::with_capacity(tw * th);
        // query sits at (width-1, height-1); the point ranges over the table
        let query = Pixel::new(width - 1, height - 1);
        for py in 0..th {
            for px in 0..tw {
                let polar = polar_coords(query, Pixel::new(px, py));
                radius.push(polar.r);
                angle_bin.push(angular_bin(polar.theta, n_theta) as u16);
            }
        }
        OffsetTable {
            width,
            height,
            radius,
            angle_bin,
        }
    }

    #[inline]
    fn index(&self, query: Pixel, point: Pixel) -> usize {
        let px = point.x + self.width - 1 - query.x;
        let py = point.y + self.height - 1 - query.y;
        py * (2 * self.width - 1) + px
    }
}

fn histogram_into(
    query: Pixel,
    contour: &[Pixel],
    table: &OffsetTable,
    edges: &[f64],
    cfg: &GsdConfig,
    counts: &mut [u32],
    out: &mut [f32],
) -> usize {
    counts.iter_mut().for_each(|c| *c = 0);
    let r_max = contour
        .iter()
        .map(|&p| table.radius[table.index(query, p)])
        .fold(0.0, f64::max);
    let mut clamped = 0;
    for &p in contour {
        let i = table.index(query, p);
        let r_norm = if r_max == 0.0 {
            0.0
        } else {
            2.0 * table.radius[i] / r_max
        };
        let (rb, over) = radial_bin(r_norm, edges);
        clamped += usize::from(over);
        counts[cfg.channel(rb, table.angle_bin[i] as usize)] += 1;
    }
    let total = contour.len() as f64 + cfg.epsilon;
    for (o, &c) in out.iter_mut().zip(counts.iter()) {
        *o = (f64::from(c) / total) as f32;
    }
    clamped
}

/// Unstandardised descriptors. Pixels outside every instance are zero.
pub fn compute_raw_batch(batch: &[InstanceMap], cfg: &GsdConfig) -> Result<DescriptorTensor> {
    cfg.validate()?;
    let first = batch.first().ok_or(Error::Empty("instance batch"))?;
    let (h, w) = (first.height(), first.width());
    if let Some(m) = batch.iter().find(|m| (m.height(), m.width()) != (h, w)) {
        return Err(Error::Shape(format!(
            "batch mixes {h}x{w} with {}x{}",
            m.height(),
            m.width()
        )));
    }
    let channels = cfg.channels();
    let plane = h * w;
    let edges = radial_edges(cfg);
    let table = OffsetTable::new(w, h, cfg.n_theta);

    let mut values = vec![0f32; batch.len() * channels * plane];
    let mut coverage = vec![false; batch.len() * plane];
    let mut clamped_radial = 0;

    for (b, inst) in batch.iter().enumerate() {
        let item = &mut values[b * channels * plane..(b + 1) * channels * plane];
        for region in contour::regions(inst) {
            // pixel-major scratch, scattered into channel-first layout below
            let mut scratch = vec![0f32; region.pixels.len() * channels];
            let clamped: usize = scratch
                .par_chunks_mut(channels)
                .zip(region.pixels.par_iter())
                .map_init(
                    || vec![0u32; channels],
                    |counts, (out, &q)| {
                        histogram_into(q, &region.contour, &table, &edges, cfg, counts, out)
                    },
                )
                .sum();
            clamped_radial += clamped;
            for (hist, q) in scratch.chunks_exact(channels).zip(&region.pixels) {
                let p = q.y * w + q.x;
                coverage[b * plane + p] = true;
                for (c, &v) in hist.iter().enumerate() {
                    item[c * plane + p] = v;
                }
            }
        }
    }

    Ok(DescriptorTensor {
        batch: batch.len(),
        height: h,
        width: w,
        config: *cfg,
        values,
        coverage,
        clamped_radial,
    })
}

/// Descriptors standardised per batch item according to
/// `cfg.standardization`.
pub fn compute_batch(batch: &[InstanceMap], cfg: &GsdConfig) -> Result<DescriptorTensor> {
    let raw = compute_raw_batch(batch, cfg)?;
    Ok(standardize(&raw, cfg.standardization))
}

/// Subtracts the mean and divides by `std + epsilon`, per batch item, using
/// population moments. A constant moment set maps every value to zero.
pub fn standardize(raw: &DescriptorTensor, mode: Standardization) -> DescriptorTensor {
    let channels = raw.channels();
    let plane = raw.height * raw.width;
    let eps = raw.config.epsilon;
    let mut out = raw.clone();
    for b in 0..raw.batch {
        let item = raw.item(b);
        let cover = &raw.coverage[b * plane..(b + 1) * plane];
        let selected = |i: usize| match mode {
            Standardization::Tensor => true,
            Standardization::InstancePixels => cover[i % plane],
        };
        let mut n = 0usize;
        let mut sum = 0f64;
        let mut first: Option<f32> = None;
        let mut constant = true;
        for (i, &v) in item.iter().enumerate() {
            if selected(i) {
                n += 1;
                sum += f64::from(v);
                match first {
                    None => first = Some(v),
                    Some(f) => constant &= f == v,
                }
            }
        }
        let dst = &mut out.values[b * channels * plane..(b + 1) * channels * plane];
        if n == 0 || constant {
            dst.iter_mut().for_each(|v| *v = 0.0);
            continue;
        }
        let mean = sum / n as f64;
        let mut sq = 0f64;
        for (i, &v) in item.iter().enumerate() {
            if selected(i) {
                let d = f64::from(v) - mean;
                sq += d * d;
            }
        }
        let denom = (sq / n as f64).sqrt() + eps;
        for (d, &v) in dst.iter_mut().zip(item) {
            *d = ((f64::from(v) - mean) / denom) as f32;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn polar_examples() {
        let o = Pixel::new(0, 0);
        let p = polar_coords(o, Pixel::new(1, 0));
        assert_eq!((p.r, p.theta), (1.0, 0.0));
        let p = polar_coords(o, Pixel::new(0, 1));
        assert_eq!(p.r, 1.0);
        assert!((p.theta - 1.5 * PI).abs() < 1e-15);
        let p = polar_coords(o, Pixel::new(3, 4));
        assert_eq!(p.r, 5.0);
        assert!((p.theta - (TAU + (-4f64).atan2(3.0))).abs() < 1e-15);
        assert!((p.theta - 5.3559).abs() < 1e-4);
        let p = polar_coords(Pixel::new(2, 2), Pixel::new(2, 2));
        assert_eq!((p.r, p.theta), (0.0, 0.0));
        // west of the pole is exactly pi, never -pi
        let p = polar_coords(Pixel::new(2, 0), Pixel::new(0, 0));
        assert_eq!(p.theta, PI);
    }

    #[test]
    fn normalize_examples() {
        assert_eq!(normalize_radii(&[3.0, 4.0, 5.0]), vec![1.2, 1.6, 2.0]);
        assert_eq!(normalize_radii(&[7.0]), vec![2.0]);
        assert_eq!(normalize_radii(&[0.0, 0.0]), vec![0.0, 0.0]);
    }

    #[test]
    fn edges_and_radial_bins() {
        let cfg = GsdConfig::default();
        let edges = radial_edges(&cfg);
        let expected = [0.125, 0.2177, 0.3789, 0.6598, 1.1487, 2.0];
        for (e, x) in edges.iter().zip(expected) {
            assert!((e - x).abs() < 1e-4, "{e} vs {x}");
        }
        assert!(edges.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(radial_bin(0.0, &edges), (1, false));
        assert_eq!(radial_bin(2.0, &edges), (6, false));
        assert_eq!(radial_bin(0.5, &edges), (4, false));
        assert_eq!(radial_bin(2.5, &edges), (6, true));

        let two = GsdConfig {
            n_rho: 2,
            ..cfg
        };
        assert_eq!(radial_edges(&two), vec![0.125, 2.0]);
        let one = GsdConfig { n_rho: 1, ..cfg };
        assert_eq!(radial_edges(&one), vec![2.0]);
    }

    #[test]
    fn angular_bin_examples() {
        assert_eq!(angular_bin(0.0, 12), 1);
        assert_eq!(angular_bin(PI, 12), 7);
        assert_eq!(angular_bin(TAU - 1e-9, 12), 12);
        assert_eq!(angular_bin(TAU, 12), 12);
    }

    #[test]
    fn axis_directions_land_on_exact_bins() {
        // quarter turns must shift bins by exactly n_theta / 4
        for n in [4, 8, 12, 16, 24] {
            let o = Pixel::new(5, 5);
            let bins: Vec<usize> = [(6, 5), (5, 4), (4, 5), (5, 6)]
                .iter()
                .map(|&(x, y)| angular_bin(polar_coords(o, Pixel::new(x, y)).theta, n))
                .collect();
            assert_eq!(bins, vec![1, 1 + n / 4, 1 + n / 2, 1 + 3 * n / 4], "n={n}");
        }
    }

    #[test]
    fn config_validation() {
        assert!(GsdConfig::default().validate().is_ok());
        let bad = GsdConfig {
            r_inner: 2.0,
            ..GsdConfig::default()
        };
        assert!(bad.validate().is_err());
        assert!(GsdConfig {
            n_theta: 0,
            ..GsdConfig::default()
        }
        .validate()
        .is_err());
        assert!(GsdConfig {
            epsilon: 0.0,
            ..GsdConfig::default()
        }
        .validate()
        .is_err());
        assert!(GsdConfig::from_json(r#"{"n_rho": 4}"#).unwrap().n_rho == 4);
        assert!(GsdConfig::from_json(r#"{"n_rh": 4}"#).is_err());
    }

    #[test]
    fn single_point_east() {
        let cfg = GsdConfig::default();
        let h = point_histogram(Pixel::new(0, 0), &[Pixel::new(3, 0)], &cfg);
        let c = cfg.channel(cfg.n_rho, 1);
        assert_eq!(h.values[c], 1.0 / (1.0 + cfg.epsilon));
        assert_eq!(h.values.iter().filter(|&&v| v != 0.0).count(), 1);
    }

    #[test]
    fn symmetric_pair_on_x_axis() {
        let cfg = GsdConfig::default();
        let h = point_histogram(Pixel::new(3, 0), &[Pixel::new(5, 0), Pixel::new(1, 0)], &cfg);
        let east = cfg.channel(cfg.n_rho, 1);
        let west = cfg.channel(cfg.n_rho, angular_bin(PI, cfg.n_theta));
        assert_eq!(h.values[east], h.values[west]);
        assert_eq!(h.values[east], 1.0 / (2.0 + cfg.epsilon));
    }

    #[test]
    fn all_zero_map_standardizes_to_zero() {
        let inst = InstanceMap::zeros(4, 4).unwrap();
        let d = compute_batch(&[inst], &GsdConfig::default()).unwrap();
        assert!(d.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn standardize_two_values() {
        let cfg = GsdConfig {
            n_rho: 1,
            n_theta: 1,
            ..GsdConfig::default()
        };
        let raw = DescriptorTensor {
            batch: 1,
            height: 1,
            width: 4,
            config: cfg,
            values: vec![0.0, 2.0, 2.0, 0.0],
            coverage: vec![true; 4],
            clamped_radial: 0,
        };
        let s = standardize(&raw, Standardization::Tensor);
        for (v, e) in s.values.iter().zip([-1.0, 1.0, 1.0, -1.0]) {
            assert!((f64::from(*v) - e).abs() < 1e-7);
        }
        let constant = DescriptorTensor {
            values: vec![0.3; 4],
            ..raw
        };
        assert!(standardize(&constant, Standardization::Tensor)
            .values
            .iter()
            .all(|&v| v == 0.0));
    }

    #[test]
    fn instance_pixel_standardization_uses_only_covered_pixels() {
        let cfg = GsdConfig {
            n_rho: 1,
            n_theta: 1,
            ..GsdConfig::default()
        };
        let raw = DescriptorTensor {
            batch: 1,
            height: 1,
            width: 3,
            config: cfg,
            values: vec![1.0, 3.0, 0.0],
            coverage: vec![true, true, false],
            clamped_radial: 0,
        };
        let s = standardize(&raw, Standardization::InstancePixels);
        // moments over {1, 3}: mean 2, std 1
        let expect = [-1.0, 1.0, -2.0];
        for (v, e) in s.values.iter().zip(expect) {
            assert!((f64::from(*v) - e).abs() < 1e-6, "{v} vs {e}");
        }
    }

    #[test]
    fn table_path_matches_direct_histograms() {
        let inst = InstanceMap::from_rows(&[
            [0, 1, 1, 0, 0, 2],
            [1, 1, 1, 1, 0, 2],
            [0, 1, 1, 1, 2, 2],
            [0, 0, 1, 0, 2, 0],
        ])
        .unwrap();
        let cfg = GsdConfig::default();
        let raw = compute_raw_batch(std::slice::from_ref(&inst), &cfg).unwrap();
        for region in contour::regions(&inst) {
            for &q in &region.pixels {
                let direct = point_histogram(q, &region.contour, &cfg);
                let got = raw.histogram_at(0, q.x, q.y);
                let want: Vec<f32> = direct.values.iter().map(|&v| v as f32).collect();
                assert_eq!(got, want);
            }
        }
    }

    #[test]
    fn batch_shape_mismatch_rejected() {
        let a = InstanceMap::zeros(2, 2).unwrap();
        let b = InstanceMap::zeros(2, 3).unwrap();
        assert!(compute_raw_batch(&[a, b], &GsdConfig::default()).is_err());
        assert!(compute_raw_batch(&[], &GsdConfig::default()).is_err());
    }
}
