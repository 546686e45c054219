mod common;

use gsdkit::components::instances_from_labels;
use gsdkit::contour::{self, Pixel};
use gsdkit::embed::{self, PyramidSpec};
use gsdkit::gsd::{self, compute_raw_batch, point_histogram, GsdConfig};
use gsdkit::loss;
use gsdkit::metrics::{self, DistancePair};
use gsdkit::raster::one_hot;
use gsdkit::{InstanceMap, LabelMap, Tensor};
use proptest::prelude::*;

fn instance_map(max_side: usize, max_id: u32) -> impl Strategy<Value = InstanceMap> {
    (1..=max_side, 1..=max_side).prop_flat_map(move |(h, w)| {
        prop::collection::vec(0..=max_id, h * w).prop_map(move |ids| InstanceMap::new(h, w, ids).unwrap())
    })
}

fn label_map(max_side: usize, k: usize) -> impl Strategy<Value = LabelMap> {
    (1..=max_side, 1..=max_side).prop_flat_map(move |(h, w)| {
        prop::collection::vec(0..k as u32, h * w)
            .prop_map(move |l| LabelMap::new(h, w, l, Some(k)).unwrap())
    })
}

fn floats(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-5.0f64..5.0, n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn contour_is_subset_of_instance(m in instance_map(10, 3)) {
        for r in contour::regions(&m) {
            prop_assert!(!r.contour.is_empty());
            for p in &r.contour {
                prop_assert_eq!(m.get(p.x, p.y), r.id);
            }
            prop_assert!(r.contour.len() <= r.pixels.len());
        }
    }

    #[test]
    fn raw_translation_invariance(m in instance_map(8, 2), dx in 0usize..4, dy in 0usize..4) {
        let (h, w) = (m.height(), m.width());
        let (bh, bw) = (h + 4, w + 4);
        let mut a = vec![0u32; bh * bw];
        let mut b = vec![0u32; bh * bw];
        for y in 0..h {
            for x in 0..w {
                // pad by one so the raster border never touches the instance
                a[(y + 1) * bw + x + 1] = m.get(x, y);
                b[(y + 1 + dy.min(2)) * bw + x + 1 + dx.min(2)] = m.get(x, y);
            }
        }
        let cfg = GsdConfig::default();
        let ra = compute_raw_batch(&[InstanceMap::new(bh, bw, a).unwrap()], &cfg).unwrap();
        let rb = compute_raw_batch(&[InstanceMap::new(bh, bw, b).unwrap()], &cfg).unwrap();
        for y in 0..h {
            for x in 0..w {
                prop_assert_eq!(
                    ra.histogram_at(0, x + 1, y + 1),
                    rb.histogram_at(0, x + 1 + dx.min(2), y + 1 + dy.min(2))
                );
            }
        }
    }

    #[test]
    fn histogram_mass_is_n_over_n_plus_eps(
        pts in prop::collection::vec((0usize..20, 0usize..20), 1..30),
        qx in 0usize..20,
        qy in 0usize..20,
    ) {
        let contour: Vec<Pixel> = pts.iter().map(|&(x, y)| Pixel::new(x, y)).collect();
        let h = point_histogram(Pixel::new(qx, qy), &contour, &GsdConfig::default());
        let n = contour.len() as f64;
        prop_assert!((h.values.iter().sum::<f64>() - n / (n + 1e-8)).abs() <= 1e-9);
        prop_assert!(h.values.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn standardized_moments(m in instance_map(12, 3)) {
        let cfg = GsdConfig::default();
        let raw = compute_raw_batch(std::slice::from_ref(&m), &cfg).unwrap();
        let out = gsd::standardize(&raw, cfg.standardization);
        let v = out.item(0);
        let n = v.len() as f64;
        let mean = v.iter().map(|&x| f64::from(x)).sum::<f64>() / n;
        if raw.values.iter().all(|&x| x == raw.values[0]) {
            prop_assert!(v.iter().all(|&x| x == 0.0));
        } else {
            let sd = (v.iter().map(|&x| (f64::from(x) - mean).powi(2)).sum::<f64>() / n).sqrt();
            prop_assert!(mean.abs() < 1e-5);
            prop_assert!((sd - 1.0).abs() < 1e-3);
        }
    }

    #[test]
    fn one_hot_partitions_pixels(l in label_map(10, 5)) {
        let t = one_hot(&l);
        let v = t.as_f32().unwrap();
        let plane = l.height() * l.width();
        for p in 0..plane {
            let s: f32 = (0..5).map(|c| v[c * plane + p]).sum();
            prop_assert_eq!(s, 1.0);
            prop_assert_eq!(v[l.labels()[p] as usize * plane + p], 1.0);
        }
    }

    #[test]
    fn components_stay_within_one_class(l in label_map(10, 3)) {
        let inst = instances_from_labels(&l, None);
        let mut class_of = std::collections::HashMap::new();
        for (i, &id) in inst.ids().iter().enumerate() {
            prop_assert!(id != 0);
            let c = *class_of.entry(id).or_insert(l.labels()[i]);
            prop_assert_eq!(c, l.labels()[i]);
        }
    }

    #[test]
    fn pyramid_keeps_one_hot(
        labels in prop::collection::vec(0u32..4, 64),
        ids in prop::collection::vec(0u32..3, 64),
    ) {
        let l = LabelMap::new(8, 8, labels, Some(4)).unwrap();
        let m = InstanceMap::new(8, 8, ids).unwrap();
        let cfg = GsdConfig::default();
        let d = gsd::compute_batch(&[m], &cfg).unwrap();
        let e = embed::assemble(&one_hot(&l), &d).unwrap();
        for level in embed::downsample(&e, &PyramidSpec::square(&[8, 4, 2, 1]).unwrap()).unwrap() {
            let (oh, g) = level.split();
            prop_assert_eq!(g.shape()[1], cfg.channels());
            let v = oh.as_f32().unwrap();
            let plane = level.height * level.width;
            for p in 0..plane {
                let s: f32 = (0..4).map(|c| v[c * plane + p]).sum();
                prop_assert_eq!(s, 1.0);
            }
        }
    }

    #[test]
    fn confusion_scores_bounded_and_perfect_on_identity(l in label_map(8, 6), p in label_map(8, 6)) {
        let cm = metrics::confusion(&l, &l, None).unwrap();
        let s = metrics::segmentation_scores(&cm).unwrap();
        prop_assert_eq!((s.miou, s.accuracy), (1.0, 1.0));
        // frequency weights are summed in floating point
        prop_assert!((s.fwiou - 1.0).abs() < 1e-12);
        if (p.height(), p.width()) == (l.height(), l.width()) {
            let s = metrics::segmentation_scores(&metrics::confusion(&p, &l, None).unwrap()).unwrap();
            for v in [s.miou, s.accuracy, s.fwiou] {
                prop_assert!((0.0..=1.0).contains(&v));
            }
        }
    }

    #[test]
    fn single_class_lpips_equals_mcsd(d in prop::collection::vec(0.0f32..1.0, 16)) {
        let pair = DistancePair::new(d, LabelMap::new(4, 4, vec![0; 16], Some(1)).unwrap()).unwrap();
        let r = metrics::diversity(&[pair], 1).unwrap();
        prop_assert_eq!(r.lpips_mean, r.mcsd);
    }

    #[test]
    fn frechet_symmetric_nonnegative(a in floats(40), b in floats(40)) {
        let sa = metrics::fit_gaussian_rows(20, 2, &a).unwrap();
        let sb = metrics::fit_gaussian_rows(20, 2, &b).unwrap();
        let ab = metrics::frechet_distance(&sa, &sb).unwrap();
        let ba = metrics::frechet_distance(&sb, &sa).unwrap();
        prop_assert!(ab >= 0.0);
        prop_assert!((ab - ba).abs() <= 1e-9 * ab.max(1.0));
    }

    #[test]
    fn feature_losses_are_symmetric_and_subadditive(a in floats(24), b in floats(24), c in floats(24)) {
        let t = |v: &Vec<f64>| vec![
            Tensor::from_f64(vec![1, 2, 2, 2], v[..8].to_vec()).unwrap(),
            Tensor::from_f64(vec![1, 4, 2, 2], v[8..].to_vec()).unwrap(),
        ];
        let (ta, tb, tc) = (t(&a), t(&b), t(&c));
        for per in [false, true] {
            let d = |x: &[Tensor], y: &[Tensor]| loss::perceptual(x, y, per).unwrap();
            prop_assert_eq!(d(&ta, &tb), d(&tb, &ta));
            prop_assert!(d(&ta, &tc) <= d(&ta, &tb) + d(&tb, &tc) + 1e-9);
            prop_assert_eq!(d(&ta, &ta), 0.0);
        }
        prop_assert_eq!(loss::feature_match(&ta, &tb).unwrap(), loss::perceptual(&ta, &tb, true).unwrap());
    }

    #[test]
    fn hinge_loss_is_nonnegative(r in floats(10), f in floats(10)) {
        let rt = Tensor::from_f64(vec![10], r).unwrap();
        let ft = Tensor::from_f64(vec![10], f).unwrap();
        prop_assert!(loss::adv_d(&rt, &ft).unwrap() >= 0.0);
    }
}
