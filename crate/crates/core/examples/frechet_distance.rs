//! Fréchet distance between two Gaussian fits.
//!
//! `cargo run --example frechet_distance`

use gsdkit::metrics::{fit_gaussian, frechet_distance};
use gsdkit::selftest::fixtures;

fn main() -> gsdkit::Result<()> {
    let mut rng = fixtures::rng(3);
    let real = fixtures::random_tensor(&mut rng, &[500, 16], 1.0);
    let fake = fixtures::random_tensor(&mut rng, &[500, 16], 1.5);

    let (a, b) = (fit_gaussian(&real)?, fit_gaussian(&fake)?);
    println!("d(real, real) = {:.3e}", frechet_distance(&a, &a)?);
    println!("d(real, fake) = {:.6}", frechet_distance(&a, &b)?);
    Ok(())
}
