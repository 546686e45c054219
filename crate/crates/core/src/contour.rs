//! Instance pixel sets and their boundary pixels.
//!
//! A boundary pixel is an instance pixel with at least one 4-neighbour
//! outside the instance, or one lying on the raster border. Both point sets
//! are emitted in row-major scan order.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::InstanceMap;

/// Pixel coordinate: `x` is the column, `y` the row. Serializes as `[x, y]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(from = "[usize; 2]", into = "[usize; 2]")]
pub struct Pixel {
    pub x: usize,
    pub y: usize,
}

impl Pixel {
    pub const fn new(x: usize, y: usize) -> Self {
        Pixel { x, y }
    }
}

impl From<[usize; 2]> for Pixel {
    fn from([x, y]: [usize; 2]) -> Self {
        Pixel { x, y }
    }
}

impl From<Pixel> for [usize; 2] {
    fn from(p: Pixel) -> Self {
        [p.x, p.y]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContourSet {
    pub id: u32,
    pub points: Vec<Pixel>,
}

/// Everything the descriptor needs about one instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstanceRegion {
    pub id: u32,
    pub pixels: Vec<Pixel>,
    pub contour: Vec<Pixel>,
}

fn is_boundary(inst: &InstanceMap, id: u32, x: usize, y: usize) -> bool {
    let (w, h) = (inst.width(), inst.height());
    if x == 0 || y == 0 || x + 1 == w || y + 1 == h {
        return true;
    }
    inst.get(x - 1, y) != id
        || inst.get(x + 1, y) != id
        || inst.get(x, y - 1) != id
        || inst.get(x, y + 1) != id
}

fn check_id(inst: &InstanceMap, id: u32) -> Result<()> {
    if id == 0 {
        return Err(Error::ReservedInstance);
    }
    if !inst.contains(id) {
        return Err(Error::MissingInstance(id));
    }
    Ok(())
}

pub fn instance_pixels(inst: &InstanceMap, id: u32) -> Result<Vec<Pixel>> {
    check_id(inst, id)?;
    let w = inst.width();
    Ok(inst
        .ids()
        .iter()
        .enumerate()
        .filter(|&(_, &v)| v == id)
        .map(|(i, _)| Pixel::new(i % w, i / w))
        .collect())
}

pub fn extract_contours(inst: &InstanceMap, id: u32) -> Result<ContourSet> {
    let points = instance_pixels(inst, id)?
        .into_iter()
        .filter(|p| is_boundary(inst, id, p.x, p.y))
        .collect();
    Ok(ContourSet { id, points })
}

/// Contours of every nonzero instance, ordered by id.
pub fn all_contours(inst: &InstanceMap) -> Vec<ContourSet> {
    regions(inst)
        .into_iter()
        .map(|r| ContourSet {
            id: r.id,
            points: r.contour,
        })
        .collect()
}

/// Pixel and contour sets of every nonzero instance in a single scan,
/// ordered by id.
pub fn regions(inst: &InstanceMap) -> Vec<InstanceRegion> {
    let w = inst.width();
    let mut by_id: BTreeMap<u32, InstanceRegion> = BTreeMap::new();
    for (i, &id) in inst.ids().iter().enumerate() {
        if id == 0 {
            continue;
        }
        let (x, y) = (i % w, i / w);
        let region = by_id.entry(id).or_insert_with(|| InstanceRegion {
            id,
            pixels: Vec::new(),
            contour: Vec::new(),
        });
        region.pixels.push(Pixel::new(x, y));
        if is_boundary(inst, id, x, y) {
            region.contour.push(Pixel::new(x, y));
        }
    }
    by_id.into_values().collect()
}
