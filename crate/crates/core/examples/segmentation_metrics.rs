//! mIoU, pixel accuracy and FWIoU accumulated over several images.
//!
//! `cargo run --example segmentation_metrics`

use gsdkit::metrics::{segmentation_scores, ConfusionMatrix};
use gsdkit::selftest::fixtures;

fn main() -> gsdkit::Result<()> {
    let mut rng = fixtures::rng(5);
    let k = 6;
    for ignore in [None, Some(0)] {
        let mut cm = ConfusionMatrix::new(k, ignore);
        for _ in 0..10 {
            let truth = fixtures::random_labels(&mut rng, 16, 16, k);
            cm.accumulate(&truth.clone(), &truth)?;
            cm.accumulate(&fixtures::random_labels(&mut rng, 16, 16, k), &truth)?;
        }
        let s = segmentation_scores(&cm)?;
        println!(
            "ignore {ignore:?}: mIoU {:.4}  accuracy {:.4}  FWIoU {:.4}  over {} pixels",
            s.miou,
            s.accuracy,
            s.fwiou,
            cm.total()
        );
    }
    Ok(())
}
