//! Dense descriptors for a synthetic instance map.
//!
//! `cargo run --example compute_descriptors`

use gsdkit::gsd::{compute_raw_batch, standardize, GsdConfig};
use gsdkit::selftest::fixtures;

fn main() -> gsdkit::Result<()> {
    let mut rng = fixtures::rng(7);
    let inst = fixtures::random_blobs(&mut rng, 64, 64, 4);
    let cfg = GsdConfig::default();

    let raw = compute_raw_batch(std::slice::from_ref(&inst), &cfg)?;
    println!(
        "{} instances -> descriptor tensor {}x{}x{}x{} ({} rho x {} theta bins)",
        inst.instance_ids().len(),
        raw.batch,
        raw.channels(),
        raw.height,
        raw.width,
        cfg.n_rho,
        cfg.n_theta
    );

    let (x, y) = (0..64 * 64)
        .map(|i| (i % 64, i / 64))
        .find(|&(x, y)| inst.get(x, y) != 0)
        .expect("fixture has instance pixels");
    let h = raw.histogram_at(0, x, y);
    println!("raw histogram at ({x},{y}) sums to {:.9}", h.iter().map(|&v| f64::from(v)).sum::<f64>());

    let out = standardize(&raw, cfg.standardization);
    let v = out.item(0);
    let mean = v.iter().map(|&x| f64::from(x)).sum::<f64>() / v.len() as f64;
    println!("standardised mean {mean:.2e}");
    Ok(())
}
