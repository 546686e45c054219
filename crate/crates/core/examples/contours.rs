//! Contour extraction and instance synthesis from a class map.
//!
//! `cargo run --example contours`

use gsdkit::components::instances_from_labels;
use gsdkit::contour::{all_contours, extract_contours};
use gsdkit::LabelMap;

fn main() -> gsdkit::Result<()> {
    let labels = LabelMap::from_rows(
        &[
            [0, 0, 0, 0, 0, 0],
            [0, 1, 1, 1, 0, 0],
            [0, 1, 1, 1, 0, 2],
            [0, 1, 1, 1, 0, 2],
            [0, 0, 0, 0, 0, 0],
        ],
        None,
    )?;
    // class 0 is background here, so it gets no instance
    let inst = instances_from_labels(&labels, Some(0));
    println!("instances: {:?}", inst.instance_ids());

    for set in all_contours(&inst) {
        println!("id {} has {} contour points", set.id, set.points.len());
    }
    let first = extract_contours(&inst, 1)?;
    println!("{}", serde_json::to_string(&first.points)?);
    Ok(())
}
