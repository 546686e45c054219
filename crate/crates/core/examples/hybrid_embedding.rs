//! One-hot layout plus descriptors, at a pyramid of scales.
//!
//! `cargo run --example hybrid_embedding`

use gsdkit::components::instances_from_labels;
use gsdkit::embed::{assemble, downsample, PyramidSpec};
use gsdkit::gsd::{compute_batch, GsdConfig};
use gsdkit::raster::one_hot;
use gsdkit::selftest::fixtures;

fn main() -> gsdkit::Result<()> {
    let mut rng = fixtures::rng(11);
    let labels = fixtures::random_labels(&mut rng, 32, 32, 3);
    let inst = instances_from_labels(&labels, None);
    let gsd = compute_batch(&[inst], &GsdConfig::default())?;

    let e = assemble(&one_hot(&labels), &gsd)?;
    println!("embedding: {} channels, descriptors start at {}", e.channels(), e.split_index());

    for level in downsample(&e, &PyramidSpec::halving(32, 32, 4)?)? {
        let (layout, desc) = level.split();
        println!("{:>2}x{:<2} layout {:?} descriptors {:?}", level.height, level.width, layout.shape(), desc.shape());
    }
    Ok(())
}
