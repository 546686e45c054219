//! Forward values of the training losses on small random tensors.
//!
//! `cargo run --example loss_oracles`

use gsdkit::loss::{self, LogitMap, LossWeights, RefineSchedule};
use gsdkit::selftest::fixtures;

fn main() -> gsdkit::Result<()> {
    let mut rng = fixtures::rng(9);
    let real = fixtures::random_tensor(&mut rng, &[2, 1, 4, 4], 2.0);
    let fake = fixtures::random_tensor(&mut rng, &[2, 1, 4, 4], 2.0);
    let adv_d = loss::adv_d(&real, &fake)?;
    let adv_g = loss::adv_g(&fake)?;

    let layers = |rng: &mut _| -> Vec<_> {
        (0..loss::PERCEPTUAL_LAYERS)
            .map(|i| fixtures::random_tensor(rng, &[2, 4 << i, 8 >> (i / 2), 8 >> (i / 2)], 1.0))
            .collect()
    };
    let (fr, ff) = (layers(&mut rng), layers(&mut rng));
    let fm = loss::feature_match(&fr, &ff)?;
    let perc = loss::perceptual(&fr, &ff, false)?;

    let logits_real = LogitMap::from_tensor(&fixtures::random_tensor(&mut rng, &[2, 3, 4, 4], 3.0))?;
    let logits_fake = LogitMap::from_tensor(&fixtures::random_tensor(&mut rng, &[2, 3, 4, 4], 3.0))?;
    let masks: Vec<_> = (0..2).map(|_| fixtures::random_labels(&mut rng, 4, 4, 3)).collect();
    let (ce_real, ce_fake) = (loss::ref_ce(&logits_real, &masks)?, loss::ref_ce(&logits_fake, &masks)?);
    let cons = loss::ref_consistency(&logits_real, &logits_fake)?;

    println!("adv_d {adv_d:.6}  adv_g {adv_g:.6}  fm {fm:.6}  perc {perc:.3}");
    println!("ref_ce real {ce_real:.6}  fake {ce_fake:.6}  consistency {cons:.6}");
    for epoch in [79, 80] {
        let refine = loss::ref_total(RefineSchedule::new(epoch), ce_real, ce_fake, cons);
        let total = loss::total(&LossWeights::default(), adv_g, fm, perc, refine);
        println!("epoch {epoch}: ref {refine:.6}  generator total {total:.3}");
    }
    Ok(())
}
