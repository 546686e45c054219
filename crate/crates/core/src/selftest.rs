//! Built-in verification suites behind the `selftest` subcommand.
//!
//! Each suite checks a fast path against a deliberately naive
//! recomputation, or checks an invariant, on seeded synthetic fixtures.
//! Results are deterministic for a given build.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::container;
use crate::contour;
use crate::embed::{self, PyramidSpec};
use crate::gsd::{self, GsdConfig, Standardization};
use crate::loss::{self, LogitMap, LossWeights, RefineSchedule};
use crate::metrics::{self, DistancePair, GaussianStats};
use crate::raster::{one_hot, InstanceMap, LabelMap, Tensor, TensorData};

/// Seeded fixture generators shared by the suites and the test targets.
pub mod fixtures {
    use super::*;

    pub fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    /// Instance map of overlapping random ellipses; later instances
    /// overwrite earlier ones. Some ids may end up fully covered.
    pub fn random_blobs(rng: &mut impl Rng, h: usize, w: usize, instances: u32) -> InstanceMap {
        let mut ids = vec![0u32; h * w];
        for id in 1..=instances {
            let cx = rng.random_range(0.0..w as f64);
            let cy = rng.random_range(0.0..h as f64);
            let rx = rng.random_range(0.8..(w as f64 / 2.5).max(1.0));
            let ry = rng.random_range(0.8..(h as f64 / 2.5).max(1.0));
            for y in 0..h {
                for x in 0..w {
                    let (u, v) = ((x as f64 - cx) / rx, (y as f64 - cy) / ry);
                    if u * u + v * v <= 1.0 {
                        ids[y * w + x] = id;
                    }
                }
            }
        }
        InstanceMap::new(h, w, ids).expect("non-empty raster")
    }

    /// Filled axis-aligned rectangle with the given id on a zero background.
    pub fn rectangle(h: usize, w: usize, x0: usize, y0: usize, rw: usize, rh: usize) -> InstanceMap {
        let mut ids = vec![0u32; h * w];
        for y in y0..y0 + rh {
            for x in x0..x0 + rw {
                ids[y * w + x] = 1;
            }
        }
        InstanceMap::new(h, w, ids).expect("non-empty raster")
    }

    pub fn random_labels(rng: &mut impl Rng, h: usize, w: usize, k: usize) -> LabelMap {
        let labels = (0..h * w).map(|_| rng.random_range(0..k as u32)).collect();
        LabelMap::new(h, w, labels, Some(k)).expect("labels below k")
    }

    pub fn random_tensor(rng: &mut impl Rng, shape: &[usize], scale: f64) -> Tensor {
        let n = shape.iter().product();
        let v = (0..n).map(|_| rng.random_range(-scale..scale)).collect();
        Tensor::from_f64(shape.to_vec(), v).expect("finite")
    }

    /// Rotates a square-free raster a quarter turn counter-clockwise as seen
    /// on screen: pixel `(x, y)` moves to `(y, w - 1 - x)`.
    pub fn rotate_ccw(inst: &InstanceMap) -> InstanceMap {
        let (h, w) = (inst.height(), inst.width());
        let mut ids = vec![0u32; h * w];
        for y in 0..h {
            for x in 0..w {
                ids[(w - 1 - x) * h + y] = inst.get(x, y);
            }
        }
        InstanceMap::new(w, h, ids).expect("non-empty raster")
    }
}

/// Outcome of one suite.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SuiteResult {
    pub module: &'static str,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SelftestSummary {
    pub suites: Vec<SuiteResult>,
    pub passed: usize,
    pub failed: usize,
}

impl SelftestSummary {
    pub fn all_passed(&self) -> bool {
        self.failed == 0
    }
}

#[derive(Debug, Clone, Default)]
pub struct SelftestOptions {
    /// Test hook: name of a suite whose fast-path output is perturbed
    /// before comparison, so the suite must report a failure.
    pub inject_fault: Option<String>,
}

type Check = fn(bool) -> Result<String, String>;

const SUITES: &[(&str, &str, Check)] = &[
    ("config", "defaults", check_defaults),
    ("raster-core", "one_hot_partition", check_one_hot),
    ("raster-core", "container_round_trip", check_container),
    ("contour", "boundary_brute_force", check_contours),
    ("gsd", "radial_edges", check_edges),
    ("gsd", "brute_force_equivalence", check_gsd_brute_force),
    ("gsd", "histogram_mass", check_mass),
    ("gsd", "translation", check_translation),
    ("gsd", "rotation", check_rotation),
    ("gsd", "standardize_moments", check_moments),
    ("hybrid-embed", "assemble_split_pyramid", check_embed),
    ("metrics", "frechet_closed_form", check_frechet),
    ("metrics", "segmentation_brute_force", check_segmentation),
    ("metrics", "diversity_constant_regions", check_diversity),
    ("loss-kernels", "scalar_parity", check_losses),
];

pub fn suite_names() -> Vec<&'static str> {
    SUITES.iter().map(|s| s.1).collect()
}

pub fn run_selftest(opts: &SelftestOptions) -> SelftestSummary {
    let suites: Vec<SuiteResult> = SUITES
        .iter()
        .map(|&(module, name, check)| {
            let fault = opts.inject_fault.as_deref() == Some(name);
            let (passed, detail) = match check(fault) {
                Ok(d) => (true, d),
                Err(d) => (false, d),
            };
            SuiteResult {
                module,
                name,
                passed,
                detail,
            }
        })
        .collect();
    let passed = suites.iter().filter(|s| s.passed).count();
    SelftestSummary {
        failed: suites.len() - passed,
        passed,
        suites,
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn perturb(fault: bool, v: f64) -> f64 {
    if fault {
        v + 0.5
    } else {
        v
    }
}

fn check_defaults(fault: bool) -> Result<String, String> {
    let g = GsdConfig::default();
    let w = LossWeights::default();
    let gamma = perturb(fault, f64::from(RefineSchedule::new(0).gamma));
    ensure(g.n_rho == 6 && g.n_theta == 12, || {
        format!("bins {}x{}", g.n_rho, g.n_theta)
    })?;
    ensure(g.epsilon == 1e-8, || format!("epsilon {}", g.epsilon))?;
    ensure(gamma == 80.0, || format!("gamma {gamma}"))?;
    ensure(
        (w.lambda_adv, w.lambda_fm, w.lambda_perc, w.lambda_ref) == (1.0, 10.0, 10.0, 1.0),
        || format!("weights {w:?}"),
    )?;
    ensure(loss::PERCEPTUAL_LAYERS == 5, || "perceptual layers".into())?;
    Ok("n_rho=6 n_theta=12 gamma=80 eps=1e-8 lambda=(1,10,10,1) M=5".into())
}

fn check_one_hot(fault: bool) -> Result<String, String> {
    let mut rng = fixtures::rng(11);
    for _ in 0..20 {
        let map = fixtures::random_labels(&mut rng, 16, 16, 7);
        let t = one_hot(&map);
        let v = t.as_f32().unwrap();
        for p in 0..256 {
            let sum: f32 = (0..7).map(|c| v[c * 256 + p]).sum();
            ensure(perturb(fault, f64::from(sum)) == 1.0, || {
                format!("pixel {p} sums to {sum}")
            })?;
        }
    }
    Ok("20 random 16x16 maps".into())
}

fn check_container(fault: bool) -> Result<String, String> {
    let tensors = [
        Tensor::new(vec![2, 3], TensorData::U8(vec![0, 1, 2, 253, 254, 255])).unwrap(),
        Tensor::new(vec![3], TensorData::I32(vec![i32::MIN, 0, i32::MAX])).unwrap(),
        Tensor::from_f32(vec![2, 1, 2], vec![-0.0, 1e-38, 3.5, -7.25]).unwrap(),
        Tensor::from_f64(vec![], vec![std::f64::consts::PI]).unwrap(),
    ];
    for t in &tensors {
        let mut bytes = container::encode(t).map_err(|e| e.to_string())?;
        if fault {
            let n = bytes.len();
            bytes[n - 1] ^= 1;
        }
        let back = container::decode(&bytes).map_err(|e| e.to_string())?;
        ensure(&back == t, || format!("{:?} changed in round trip", t.dtype()))?;
        ensure(container::encode(&back).unwrap() == bytes, || "bytes differ".into())?;
    }
    Ok("u8/i32/f32/f64".into())
}

fn naive_boundary(inst: &InstanceMap, id: u32, x: usize, y: usize) -> bool {
    let (w, h) = (inst.width() as isize, inst.height() as isize);
    [(-1isize, 0isize), (1, 0), (0, -1), (0, 1)].iter().any(|&(dx, dy)| {
        let (nx, ny) = (x as isize + dx, y as isize + dy);
        nx < 0 || ny < 0 || nx >= w || ny >= h || inst.get(nx as usize, ny as usize) != id
    })
}

fn check_contours(fault: bool) -> Result<String, String> {
    let mut rng = fixtures::rng(12);
    let mut checked = 0;
    for _ in 0..30 {
        let inst = fixtures::random_blobs(&mut rng, 16, 16, 4);
        for id in inst.instance_ids() {
            let mut got = contour::extract_contours(&inst, id).unwrap().points;
            if fault {
                got.pop();
            }
            let want: Vec<_> = contour::instance_pixels(&inst, id)
                .unwrap()
                .into_iter()
                .filter(|p| naive_boundary(&inst, id, p.x, p.y))
                .collect();
            ensure(got == want, || format!("instance {id} contour differs"))?;
            checked += 1;
        }
    }
    Ok(format!("{checked} instances"))
}

fn check_edges(fault: bool) -> Result<String, String> {
    let cfg = GsdConfig::default();
    let edges = gsd::radial_edges(&cfg);
    let n = cfg.n_rho;
    let (a, b) = (cfg.r_inner.ln(), cfg.r_outer.ln());
    for (k, &e) in edges.iter().enumerate() {
        let want = (a + (b - a) * k as f64 / (n - 1) as f64).exp();
        let e = perturb(fault, e);
        ensure(((e - want) / want).abs() <= 1e-12, || {
            format!("edge {k}: {e} vs {want}")
        })?;
    }
    Ok(format!("{n} edges"))
}

/// Four nested loops straight from the definition: batch item, instance
/// id, query pixel, contour pixel.
pub(crate) fn naive_raw(batch: &[InstanceMap], cfg: &GsdConfig) -> Vec<f32> {
    let (h, w) = (batch[0].height(), batch[0].width());
    let channels = cfg.n_rho * cfg.n_theta;
    let edges = gsd::radial_edges(cfg);
    let mut out = vec![0f32; batch.len() * channels * h * w];
    for (b, inst) in batch.iter().enumerate() {
        let max_id = inst.ids().iter().copied().max().unwrap_or(0);
        for id in 1..=max_id {
            let contour: Vec<(usize, usize)> = (0..h)
                .flat_map(|y| (0..w).map(move |x| (x, y)))
                .filter(|&(x, y)| inst.get(x, y) == id && naive_boundary(inst, id, x, y))
                .collect();
            if contour.is_empty() {
                continue;
            }
            for qy in 0..h {
                for qx in 0..w {
                    if inst.get(qx, qy) != id {
                        continue;
                    }
                    let polar: Vec<(f64, f64)> = contour
                        .iter()
                        .map(|&(px, py)| {
                            let dx = px as f64 - qx as f64;
                            let dy = py as f64 - qy as f64;
                            let r = (dx * dx + dy * dy).sqrt();
                            let mut t = (qy as f64 - py as f64).atan2(dx);
                            if t < 0.0 {
                                t += TAU;
                            }
                            (r, t)
                        })
                        .collect();
                    let r_max = polar.iter().map(|p| p.0).fold(0.0, f64::max);
                    let mut hist = vec![0u32; channels];
                    for &(r, t) in &polar {
                        let rn = if r_max > 0.0 { 2.0 * r / r_max } else { 0.0 };
                        let rb = edges.iter().position(|&e| rn <= e).unwrap_or(cfg.n_rho - 1);
                        let tb = ((t / (TAU / cfg.n_theta as f64)).floor() as usize)
                            .min(cfg.n_theta - 1);
                        hist[rb * cfg.n_theta + tb] += 1;
                    }
                    let n = contour.len() as f64 + cfg.epsilon;
                    for (c, &count) in hist.iter().enumerate() {
                        out[((b * channels + c) * h + qy) * w + qx] = (f64::from(count) / n) as f32;
                    }
                }
            }
        }
    }
    out
}

/// Population-moment standardisation over each whole batch item.
pub(crate) fn naive_standardize(raw: &[f32], batch: usize, eps: f64) -> Vec<f32> {
    let per = raw.len() / batch;
    raw.chunks(per)
        .flat_map(|item| {
            let n = item.len() as f64;
            let mean = item.iter().map(|&v| f64::from(v)).sum::<f64>() / n;
            let var = item
                .iter()
                .map(|&v| (f64::from(v) - mean) * (f64::from(v) - mean))
                .sum::<f64>()
                / n;
            let constant = item.iter().all(|&v| v == item[0]);
            item.iter()
                .map(move |&v| {
                    if constant {
                        0.0
                    } else {
                        ((f64::from(v) - mean) / (var.sqrt() + eps)) as f32
                    }
                })
                .collect::<Vec<_>>()
        })
        .collect()
}

fn check_gsd_brute_force(fault: bool) -> Result<String, String> {
    let cfg = GsdConfig::default();
    let mut rng = fixtures::rng(13);
    let mut batches: Vec<Vec<InstanceMap>> = (0..10)
        .map(|_| {
            (0..2)
                .map(|_| fixtures::random_blobs(&mut rng, 8, 8, 3))
                .collect()
        })
        .collect();
    batches.push(vec![fixtures::random_blobs(&mut rng, 16, 16, 5)]);
    for batch in &batches {
        let raw = gsd::compute_raw_batch(batch, &cfg).map_err(|e| e.to_string())?;
        let mut fast = raw.values.clone();
        if fault {
            fast[0] += 1.0;
        }
        let naive = naive_raw(batch, &cfg);
        ensure(fast == naive, || "raw descriptors differ".into())?;
        let std = gsd::standardize(&raw, Standardization::Tensor);
        ensure(std.values == naive_standardize(&naive, batch.len(), cfg.epsilon), || {
            "standardized descriptors differ".into()
        })?;
    }
    Ok(format!("{} batches, bit-exact", batches.len()))
}

fn check_mass(fault: bool) -> Result<String, String> {
    let cfg = GsdConfig::default();
    let mut rng = fixtures::rng(14);
    let mut pixels = 0;
    for _ in 0..10 {
        let inst = fixtures::random_blobs(&mut rng, 16, 16, 4);
        for region in contour::regions(&inst) {
            let n = region.contour.len() as f64;
            for &q in &region.pixels {
                let h = gsd::point_histogram(q, &region.contour, &cfg);
                let sum = perturb(fault, h.values.iter().sum::<f64>());
                let want = n / (n + cfg.epsilon);
                ensure((sum - want).abs() <= 1e-9, || format!("mass {sum} vs {want}"))?;
                pixels += 1;
            }
        }
    }
    Ok(format!("{pixels} pixels"))
}

fn check_translation(fault: bool) -> Result<String, String> {
    let cfg = GsdConfig::default();
    let mut rng = fixtures::rng(15);
    for _ in 0..5 {
        let small = fixtures::random_blobs(&mut rng, 10, 10, 1);
        let mut moved = vec![0u32; 400];
        for y in 0..10 {
            for x in 0..10 {
                moved[(y + 5) * 20 + x + 5] = small.get(x, y);
            }
        }
        let base = {
            let mut ids = vec![0u32; 400];
            for y in 0..10 {
                for x in 0..10 {
                    ids[y * 20 + x] = small.get(x, y);
                }
            }
            InstanceMap::new(20, 20, ids).unwrap()
        };
        let moved = InstanceMap::new(20, 20, moved).unwrap();
        let a = gsd::compute_raw_batch(&[base], &cfg).map_err(|e| e.to_string())?;
        let b = gsd::compute_raw_batch(&[moved], &cfg).map_err(|e| e.to_string())?;
        for y in 0..10 {
            for x in 0..10 {
                let mut ha = a.histogram_at(0, x, y);
                if fault {
                    ha[0] += 1.0;
                }
                ensure(ha == b.histogram_at(0, x + 5, y + 5), || {
                    format!("pixel ({x},{y}) differs after translation")
                })?;
            }
        }
    }
    Ok("5 blobs shifted by (5,5)".into())
}

/// Integer bin counts of a raw histogram, with the query's own count
/// removed when the query is itself a contour point. That self-count sits at
/// radius 0 and angle 0 and does not rotate with the shape.
pub(crate) fn counts_without_self(hist: &[f32], contour_len: usize, on_contour: bool, eps: f64) -> Vec<i64> {
    let total = contour_len as f64 + eps;
    let mut counts: Vec<i64> = hist
        .iter()
        .map(|&v| (f64::from(v) * total).round() as i64)
        .collect();
    if on_contour {
        counts[0] -= 1;
    }
    counts
}

fn check_rotation(fault: bool) -> Result<String, String> {
    let cfg = GsdConfig::default();
    let shift = cfg.n_theta / 4;
    let mut rng = fixtures::rng(16);
    let mut compared = 0;
    for _ in 0..5 {
        let inst = fixtures::random_blobs(&mut rng, 12, 12, 2);
        let rot = fixtures::rotate_ccw(&inst);
        let a = gsd::compute_raw_batch(std::slice::from_ref(&inst), &cfg).map_err(|e| e.to_string())?;
        let b = gsd::compute_raw_batch(&[rot], &cfg).map_err(|e| e.to_string())?;
        for region in contour::regions(&inst) {
            let n = region.contour.len();
            for &q in &region.pixels {
                let on = region.contour.contains(&q);
                let mut ha = counts_without_self(&a.histogram_at(0, q.x, q.y), n, on, cfg.epsilon);
                if fault {
                    ha[1] += 1;
                }
                let hb = counts_without_self(&b.histogram_at(0, q.y, 11 - q.x), n, on, cfg.epsilon);
                for rb in 0..cfg.n_rho {
                    for tb in 0..cfg.n_theta {
                        let src = ha[rb * cfg.n_theta + tb];
                        let dst = hb[rb * cfg.n_theta + (tb + shift) % cfg.n_theta];
                        ensure(src == dst, || {
                            format!("pixel ({},{}) bin ({rb},{tb}): {src} vs {dst}", q.x, q.y)
                        })?;
                    }
                }
                compared += 1;
            }
        }
    }
    Ok(format!("{compared} pixels, shift {shift} bins"))
}

fn check_moments(fault: bool) -> Result<String, String> {
    let cfg = GsdConfig::default();
    let mut rng = fixtures::rng(17);
    let batch: Vec<InstanceMap> = (0..3)
        .map(|_| fixtures::random_blobs(&mut rng, 16, 16, 4))
        .collect();
    let d = gsd::compute_batch(&batch, &cfg).map_err(|e| e.to_string())?;
    for b in 0..d.batch {
        let item = d.item(b);
        let n = item.len() as f64;
        let mean = perturb(fault, item.iter().map(|&v| f64::from(v)).sum::<f64>() / n);
        let std = (item
            .iter()
            .map(|&v| (f64::from(v) - mean).powi(2))
            .sum::<f64>()
            / n)
            .sqrt();
        ensure(mean.abs() < 1e-5 && (std - 1.0).abs() < 1e-3, || {
            format!("item {b}: mean {mean:e} std {std}")
        })?;
    }
    Ok("3 items".into())
}

fn check_embed(fault: bool) -> Result<String, String> {
    let cfg = GsdConfig::default();
    let mut rng = fixtures::rng(18);
    let labels = fixtures::random_labels(&mut rng, 16, 16, 5);
    let inst = crate::components::instances_from_labels(&labels, None);
    let d = gsd::compute_batch(&[inst], &cfg).map_err(|e| e.to_string())?;
    let hot = one_hot(&labels);
    let e = embed::assemble(&hot, &d).map_err(|e| e.to_string())?;
    let (h2, g2) = e.split();
    ensure(h2.as_f32() == hot.as_f32() && g2.as_f32().unwrap() == d.values.as_slice(), || {
        "split does not recover inputs".into()
    })?;
    let levels = embed::downsample(&e, &PyramidSpec::halving(16, 16, 4).unwrap())
        .map_err(|e| e.to_string())?;
    for l in &levels {
        let plane = l.height * l.width;
        for p in 0..plane {
            let s = perturb(fault, (0..5).map(|c| f64::from(l.values[c * plane + p])).sum());
            ensure(s == 1.0, || format!("{}x{} pixel {p} one-hot sum {s}", l.height, l.width))?;
        }
    }
    Ok("lossless split, 4 pyramid levels".into())
}

fn check_frechet(fault: bool) -> Result<String, String> {
    let mut rng = fixtures::rng(19);
    for _ in 0..200 {
        let (ma, mb) = (rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0));
        let (sa, sb): (f64, f64) = (rng.random_range(0.01..4.0), rng.random_range(0.01..4.0));
        let a = GaussianStats {
            mean: nalgebra::DVector::from_element(1, ma),
            cov: nalgebra::DMatrix::from_element(1, 1, sa * sa),
            samples: 2,
        };
        let b = GaussianStats {
            mean: nalgebra::DVector::from_element(1, mb),
            cov: nalgebra::DMatrix::from_element(1, 1, sb * sb),
            samples: 2,
        };
        let d = perturb(fault, metrics::frechet_distance(&a, &b).map_err(|e| e.to_string())?);
        let want = (ma - mb).powi(2) + (sa - sb).powi(2);
        ensure((d - want).abs() <= 1e-8 * want.max(1.0), || format!("{d} vs {want}"))?;
    }
    Ok("200 scalar gaussians".into())
}

fn check_segmentation(fault: bool) -> Result<String, String> {
    let mut rng = fixtures::rng(20);
    for k in [2usize, 6, 16] {
        for _ in 0..10 {
            let truth = fixtures::random_labels(&mut rng, 16, 16, k);
            let pred = fixtures::random_labels(&mut rng, 16, 16, k);
            let cm = metrics::confusion(&pred, &truth, None).map_err(|e| e.to_string())?;
            let got = metrics::segmentation_scores(&cm).map_err(|e| e.to_string())?;
            let (t, p) = (truth.labels(), pred.labels());
            let mut ious = Vec::new();
            let mut fw = 0.0;
            for c in 0..k as u32 {
                let inter = t.iter().zip(p).filter(|&(&a, &b)| a == c && b == c).count();
                let union = t.iter().zip(p).filter(|&(&a, &b)| a == c || b == c).count();
                if union > 0 {
                    let iou = inter as f64 / union as f64;
                    ious.push(iou);
                    fw += t.iter().filter(|&&a| a == c).count() as f64 / t.len() as f64 * iou;
                }
            }
            let miou = ious.iter().sum::<f64>() / ious.len() as f64;
            let acc = t.iter().zip(p).filter(|(a, b)| a == b).count() as f64 / t.len() as f64;
            let m = perturb(fault, got.miou);
            ensure(m == miou && got.accuracy == acc && got.fwiou == fw, || {
                format!("K={k}: {got:?} vs ({miou}, {acc}, {fw})")
            })?;
        }
    }
    Ok("30 random pairs, K in {2,6,16}".into())
}

fn check_diversity(fault: bool) -> Result<String, String> {
    let labels = LabelMap::from_rows(&[[0, 0, 1, 1], [0, 0, 1, 1], [2, 2, 2, 2]], Some(3))
        .map_err(|e| e.to_string())?;
    let per_class = [0.25f32, 0.5, 0.125];
    let dist: Vec<f32> = labels.labels().iter().map(|&l| per_class[l as usize]).collect();
    let pairs = vec![DistancePair::new(dist, labels).map_err(|e| e.to_string())?; 5];
    let r = metrics::diversity(&pairs, 3).map_err(|e| e.to_string())?;
    let want = per_class.iter().map(|&v| f64::from(v)).sum::<f64>() / 3.0;
    let got = perturb(fault, r.mcsd);
    ensure((got - want).abs() <= 1e-9, || format!("mcsd {got} vs {want}"))?;
    // outside class 0: 4 px of 0.5 and 4 of 0.125; outside 1: 4 of 0.25, 4 of 0.125;
    // outside 2: 4 of 0.25 and 4 of 0.5
    let mocd = ((0.5 + 0.125) / 2.0 + (0.25 + 0.125) / 2.0 + (0.25 + 0.5) / 2.0) / 3.0;
    ensure((r.mocd - mocd).abs() <= 1e-9, || format!("mocd {} vs {mocd}", r.mocd))?;
    Ok("constant-per-class fixture, 5 pairs".into())
}

fn rel_close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-6 * b.abs().max(1e-12) || (a - b).abs() <= 1e-12
}

fn check_losses(fault: bool) -> Result<String, String> {
    let mut rng = fixtures::rng(21);
    let e = |x: crate::Error| x.to_string();
    for _ in 0..20 {
        let shape = [2, 4, 8, 8];
        let real = fixtures::random_tensor(&mut rng, &shape, 2.0);
        let fake = fixtures::random_tensor(&mut rng, &shape, 2.0);
        let (rv, fv) = (real.to_f64_vec(), fake.to_f64_vec());
        let n = rv.len() as f64;

        let mut want_d = 0.0;
        for &r in &rv {
            want_d += if r < 1.0 { 1.0 - r } else { 0.0 } / n;
        }
        for &f in &fv {
            want_d += if f > -1.0 { 1.0 + f } else { 0.0 } / n;
        }
        let got_d = perturb(fault, loss::adv_d(&real, &fake).map_err(e)?);
        ensure(rel_close(got_d, want_d), || format!("adv_d {got_d} vs {want_d}"))?;

        let want_g = -fv.iter().sum::<f64>() / n;
        ensure(rel_close(loss::adv_g(&fake).map_err(e)?, want_g), || "adv_g".into())?;

        let l1: f64 = rv.iter().zip(&fv).map(|(a, b)| (a - b).abs()).sum();
        let stack_r = vec![real.clone(), real.clone()];
        let stack_f = vec![fake.clone(), real.clone()];
        ensure(rel_close(loss::feature_match(&stack_r, &stack_f).map_err(e)?, l1 / n), || {
            "feature_match".into()
        })?;
        ensure(rel_close(loss::perceptual(&stack_r, &stack_f, false).map_err(e)?, l1), || {
            "perceptual".into()
        })?;

        let lr = LogitMap::from_tensor(&real).map_err(e)?;
        let lf = LogitMap::from_tensor(&fake).map_err(e)?;
        let masks: Vec<LabelMap> = (0..2)
            .map(|_| fixtures::random_labels(&mut rng, 8, 8, 4))
            .collect();
        let mut ce = 0.0;
        let mut cons = 0.0;
        for b in 0..2 {
            for p in 0..64 {
                let at = |v: &[f64], k: usize| v[(b * 4 + k) * 64 + p];
                let z_r: f64 = (0..4).map(|k| at(&rv, k).exp()).sum();
                let z_f: f64 = (0..4).map(|k| at(&fv, k).exp()).sum();
                let t = masks[b].labels()[p] as usize;
                ce -= (at(&rv, t).exp() / z_r).ln() / 128.0;
                for k in 0..4 {
                    let pr = at(&rv, k).exp() / z_r;
                    let pf = (at(&fv, k).exp() / z_f).max(1e-12);
                    cons -= pr * pf.ln() / 128.0;
                }
            }
        }
        ensure(rel_close(loss::ref_ce(&lr, &masks).map_err(e)?, ce), || "ref_ce".into())?;
        ensure(rel_close(loss::ref_consistency(&lr, &lf).map_err(e)?, cons), || {
            "ref_consistency".into()
        })?;
    }
    for (epoch, want) in [(79, 1.0), (80, 6.0), (81, 6.0)] {
        let sched = RefineSchedule { gamma: 80, epoch };
        ensure(loss::ref_total(sched, 1.0, 2.0, 3.0) == want, || {
            format!("ref_total at epoch {epoch}")
        })?;
    }
    let w = LossWeights::default();
    ensure(loss::total(&w, 1.0, 1.0, 1.0, 1.0) == 22.0, || "total".into())?;
    Ok("20 random 2x4x8x8 inputs, schedule boundary 79/80/81".into())
}
