//! Class-specific and other-class diversity from distance maps.
//!
//! `cargo run --example diversity`

use gsdkit::metrics::{diversity, DistancePair};
use gsdkit::LabelMap;

fn main() -> gsdkit::Result<()> {
    // left half class 0 at distance 0.2, right half class 1 at 0.4
    let labels: Vec<u32> = (0..16).map(|i| u32::from(i % 4 >= 2)).collect();
    let distances = labels.iter().map(|&l| if l == 0 { 0.2 } else { 0.4 }).collect();
    let pair = DistancePair::new(distances, LabelMap::new(4, 4, labels, Some(2))?)?;

    let r = diversity(&[pair], 2)?;
    println!("LPIPS mean {:.3}  mCSD {:.3}  mOCD {:.3}", r.lpips_mean, r.mcsd, r.mocd);
    println!("per class inside {:?}, outside {:?}", r.class_specific, r.other_classes);
    Ok(())
}
