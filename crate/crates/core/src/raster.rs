//! Raster and tensor types shared by every other module.
//!
//! All multi-dimensional data is row-major and channel-first, so a batch of
//! per-pixel feature stacks has shape `(batch, channels, height, width)`.

use std::fs;
use std::path::Path;

use image::{DynamicImage, ImageBuffer, Luma};
use serde::{Deserialize, Serialize};

use crate::container;
use crate::error::{Error, Result};

/// Element type of a [`Tensor`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DType {
    U8,
    I32,
    F32,
    F64,
}

impl DType {
    pub fn size(self) -> usize {
        match self {
            DType::U8 => 1,
            DType::I32 | DType::F32 => 4,
            DType::F64 => 8,
        }
    }

    pub fn is_float(self) -> bool {
        matches!(self, DType::F32 | DType::F64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TensorData {
    U8(Vec<u8>),
    I32(Vec<i32>),
    F32(Vec<f32>),
    F64(Vec<f64>),
}

impl TensorData {
    pub fn len(&self) -> usize {
        match self {
            TensorData::U8(v) => v.len(),
            TensorData::I32(v) => v.len(),
            TensorData::F32(v) => v.len(),
            TensorData::F64(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dtype(&self) -> DType {
        match self {
            TensorData::U8(_) => DType::U8,
            TensorData::I32(_) => DType::I32,
            TensorData::F32(_) => DType::F32,
            TensorData::F64(_) => DType::F64,
        }
    }
}

/// Dense row-major n-dimensional array. Float tensors never hold NaN or
/// infinities.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    shape: Vec<usize>,
    data: TensorData,
}

impl Tensor {
    pub fn new(shape: Vec<usize>, data: TensorData) -> Result<Self> {
        let count: usize = shape.iter().product();
        if count != data.len() {
            return Err(Error::Shape(format!(
                "shape {:?} holds {} elements but {} were supplied",
                shape,
                count,
                data.len()
            )));
        }
        let first_bad = match &data {
            TensorData::F32(v) => v.iter().position(|x| !x.is_finite()),
            TensorData::F64(v) => v.iter().position(|x| !x.is_finite()),
            _ => None,
        };
        if let Some(i) = first_bad {
            return Err(Error::NonFinite(i));
        }
        Ok(Tensor { shape, data })
    }

    pub fn from_f32(shape: Vec<usize>, values: Vec<f32>) -> Result<Self> {
        Self::new(shape, TensorData::F32(values))
    }

    pub fn from_f64(shape: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        Self::new(shape, TensorData::F64(values))
    }

    pub fn scalar(value: f64) -> Result<Self> {
        Self::from_f64(Vec::new(), vec![value])
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn ndim(&self) -> usize {
        self.shape.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn dtype(&self) -> DType {
        self.data.dtype()
    }

    pub fn data(&self) -> &TensorData {
        &self.data
    }

    pub fn into_parts(self) -> (Vec<usize>, TensorData) {
        (self.shape, self.data)
    }

    pub fn as_f32(&self) -> Option<&[f32]> {
        match &self.data {
            TensorData::F32(v) => Some(v),
            _ => None,
        }
    }

    /// Values widened to `f64`, whatever the stored dtype.
    pub fn to_f64_vec(&self) -> Vec<f64> {
        match &self.data {
            TensorData::U8(v) => v.iter().map(|&x| f64::from(x)).collect(),
            TensorData::I32(v) => v.iter().map(|&x| f64::from(x)).collect(),
            TensorData::F32(v) => v.iter().map(|&x| f64::from(x)).collect(),
            TensorData::F64(v) => v.clone(),
        }
    }

    /// Values as non-negative integer ids. Fails on float tensors and on
    /// negative entries.
    pub fn to_ids(&self) -> Result<Vec<u32>> {
        match &self.data {
            TensorData::U8(v) => Ok(v.iter().map(|&x| u32::from(x)).collect()),
            TensorData::I32(v) => v
                .iter()
                .map(|&x| u32::try_from(x).map_err(|_| Error::NegativeLabel(i64::from(x))))
                .collect(),
            _ => Err(Error::Dtype(format!(
                "integer data required, found {:?}",
                self.dtype()
            ))),
        }
    }
}

/// Per-pixel class ids in `0..num_classes`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMap {
    height: usize,
    width: usize,
    num_classes: usize,
    labels: Vec<u32>,
}

impl LabelMap {
    /// Builds a label map. `num_classes` defaults to `max label + 1`; an
    /// explicit value must cover every label present.
    pub fn new(
        height: usize,
        width: usize,
        labels: Vec<u32>,
        num_classes: Option<usize>,
    ) -> Result<Self> {
        check_dims(height, width, labels.len())?;
        let max = labels.iter().copied().max().unwrap_or(0) as usize;
        let num_classes = match num_classes {
            Some(k) => {
                if let Some(i) = labels.iter().position(|&l| l as usize >= k) {
                    return Err(Error::LabelOutOfRange {
                        label: labels[i],
                        x: i % width,
                        y: i / width,
                        num_classes: k,
                    });
                }
                k
            }
            None => max + 1,
        };
        Ok(LabelMap {
            height,
            width,
            num_classes,
            labels,
        })
    }

    /// Convenience constructor from nested rows.
    pub fn from_rows<R: AsRef<[u32]>>(rows: &[R], num_classes: Option<usize>) -> Result<Self> {
        let height = rows.len();
        let width = rows.first().map_or(0, |r| r.as_ref().len());
        if rows.iter().any(|r| r.as_ref().len() != width) {
            return Err(Error::Shape("ragged rows".into()));
        }
        let labels = rows.iter().flat_map(|r| r.as_ref().iter().copied()).collect();
        Self::new(height, width, labels, num_classes)
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn get(&self, x: usize, y: usize) -> u32 {
        self.labels[y * self.width + x]
    }

    /// Same labels under a different class count.
    pub fn with_num_classes(&self, num_classes: usize) -> Result<Self> {
        Self::new(
            self.height,
            self.width,
            self.labels.clone(),
            Some(num_classes),
        )
    }
}

/// Per-pixel instance ids; 0 marks pixels that belong to no instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstanceMap {
    height: usize,
    width: usize,
    ids: Vec<u32>,
}

impl InstanceMap {
    pub fn new(height: usize, width: usize, ids: Vec<u32>) -> Result<Self> {
        check_dims(height, width, ids.len())?;
        Ok(InstanceMap { height, width, ids })
    }

    pub fn from_rows<R: AsRef<[u32]>>(rows: &[R]) -> Result<Self> {
        let height = rows.len();
        let width = rows.first().map_or(0, |r| r.as_ref().len());
        if rows.iter().any(|r| r.as_ref().len() != width) {
            return Err(Error::Shape("ragged rows".into()));
        }
        Self::new(
            height,
            width,
            rows.iter().flat_map(|r| r.as_ref().iter().copied()).collect(),
        )
    }

    pub fn zeros(height: usize, width: usize) -> Result<Self> {
        Self::new(height, width, vec![0; height * width])
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn ids(&self) -> &[u32] {
        &self.ids
    }

    pub fn get(&self, x: usize, y: usize) -> u32 {
        self.ids[y * self.width + x]
    }

    /// Sorted distinct nonzero ids.
    pub fn instance_ids(&self) -> Vec<u32> {
        let mut ids: Vec<u32> = self.ids.iter().copied().filter(|&i| i != 0).collect();
        ids.sort_unstable();
        ids.dedup();
        ids
    }

    pub fn contains(&self, id: u32) -> bool {
        self.ids.contains(&id)
    }
}

fn check_dims(height: usize, width: usize, len: usize) -> Result<()> {
    if height == 0 || width == 0 {
        return Err(Error::Shape(format!(
            "raster must be non-empty, got {height}x{width}"
        )));
    }
    if height * width != len {
        return Err(Error::Shape(format!(
            "{height}x{width} raster needs {} pixels, got {len}",
            height * width
        )));
    }
    Ok(())
}

/// Expands a label map into a `(K, H, W)` float32 indicator stack.
pub fn one_hot(map: &LabelMap) -> Tensor {
    let plane = map.height * map.width;
    let mut data = vec![0f32; map.num_classes * plane];
    for (i, &label) in map.labels.iter().enumerate() {
        data[label as usize * plane + i] = 1.0;
    }
    Tensor::from_f32(vec![map.num_classes, map.height, map.width], data)
        .expect("one-hot shape is consistent by construction")
}

/// Stacks the one-hot encodings of equally sized maps into `(B, K, H, W)`.
pub fn one_hot_batch(maps: &[LabelMap]) -> Result<Tensor> {
    let first = maps.first().ok_or(Error::Empty("label map batch"))?;
    let (k, h, w) = (first.num_classes, first.height, first.width);
    let mut data = Vec::with_capacity(maps.len() * k * h * w);
    for map in maps {
        if (map.num_classes, map.height, map.width) != (k, h, w) {
            return Err(Error::Shape(format!(
                "batch mixes {}x{} K={} with {}x{} K={}",
                h, w, k, map.height, map.width, map.num_classes
            )));
        }
        match one_hot(map).into_parts().1 {
            TensorData::F32(v) => data.extend_from_slice(&v),
            _ => unreachable!(),
        }
    }
    Tensor::from_f32(vec![maps.len(), k, h, w], data)
}

/// Class metadata stored next to label rasters.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassSidecar {
    pub num_classes: usize,
    #[serde(default)]
    pub class_names: Vec<String>,
}

impl ClassSidecar {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let sidecar: ClassSidecar = serde_json::from_str(&text)?;
        if !sidecar.class_names.is_empty() && sidecar.class_names.len() != sidecar.num_classes {
            return Err(Error::Config(format!(
                "sidecar lists {} class names for {} classes",
                sidecar.class_names.len(),
                sidecar.num_classes
            )));
        }
        Ok(sidecar)
    }
}

/// Reads a single-channel integer raster: an 8/16-bit grayscale PNG or a
/// GSDT container holding a 2-D integer tensor.
fn load_id_raster(path: &Path) -> Result<(usize, usize, Vec<u32>)> {
    if container::is_container(path)? {
        let tensor = container::read_tensor(path)?;
        return match tensor.shape() {
            &[h, w] => Ok((h, w, tensor.to_ids()?)),
            other => Err(Error::Shape(format!(
                "label container must be 2-D, got shape {other:?}"
            ))),
        };
    }
    let img = image::open(path).map_err(|source| Error::Image {
        path: path.to_path_buf(),
        source,
    })?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    let ids = match img {
        DynamicImage::ImageLuma8(buf) => buf.into_raw().into_iter().map(u32::from).collect(),
        DynamicImage::ImageLuma16(buf) => buf.into_raw().into_iter().map(u32::from).collect(),
        other => return Err(Error::MultiChannel(other.color().channel_count())),
    };
    Ok((h, w, ids))
}

pub fn load_label_map(path: &Path, num_classes: Option<usize>) -> Result<LabelMap> {
    let (h, w, labels) = load_id_raster(path)?;
    LabelMap::new(h, w, labels, num_classes)
}

/// Loads one or more instance maps. Rasters and 2-D containers yield one
/// map; a 3-D `(B, H, W)` container yields a batch.
pub fn load_instance_maps(path: &Path) -> Result<Vec<InstanceMap>> {
    if container::is_container(path)? {
        let tensor = container::read_tensor(path)?;
        let ids = tensor.to_ids()?;
        return match *tensor.shape() {
            [h, w] => Ok(vec![InstanceMap::new(h, w, ids)?]),
            [b, h, w] => ids
                .chunks(h * w)
                .take(b)
                .map(|c| InstanceMap::new(h, w, c.to_vec()))
                .collect(),
            ref other => Err(Error::Shape(format!(
                "instance container must be 2-D or 3-D, got shape {other:?}"
            ))),
        };
    }
    let (h, w, ids) = load_id_raster(path)?;
    Ok(vec![InstanceMap::new(h, w, ids)?])
}

/// Writes a label map as a grayscale PNG, 8-bit when every label fits.
pub fn save_label_map(path: &Path, map: &LabelMap) -> Result<()> {
    let (w, h) = (map.width as u32, map.height as u32);
    let max = map.labels.iter().copied().max().unwrap_or(0);
    let result = if max <= u32::from(u8::MAX) {
        let raw: Vec<u8> = map.labels.iter().map(|&l| l as u8).collect();
        ImageBuffer::<Luma<u8>, _>::from_raw(w, h, raw)
            .expect("buffer size matches")
            .save(path)
    } else if max <= u32::from(u16::MAX) {
        let raw: Vec<u16> = map.labels.iter().map(|&l| l as u16).collect();
        ImageBuffer::<Luma<u16>, _>::from_raw(w, h, raw)
            .expect("buffer size matches")
            .save(path)
    } else {
        return Err(Error::Invalid(format!(
            "label {max} does not fit a 16-bit raster"
        )));
    };
    result.map_err(|source| Error::Image {
        path: path.to_path_buf(),
        source,
    })
}
