//! Brute-force reference implementations shared by the integration tests.
//! Each is written directly from the definitions with explicit loops and
//! float64 arithmetic, without calling the library's own helpers.

#![allow(dead_code)]

use std::f64::consts::TAU;

use gsdkit::{InstanceMap, LabelMap};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Filled rectangle with id 1.
pub fn rect(h: usize, w: usize, x0: usize, y0: usize, rw: usize, rh: usize) -> InstanceMap {
    let mut ids = vec![0u32; h * w];
    for y in y0..y0 + rh {
        for x in x0..x0 + rw {
            ids[y * w + x] = 1;
        }
    }
    InstanceMap::new(h, w, ids).unwrap()
}

/// Up to `n` overlapping random ellipses; later ones paint over earlier.
pub fn blobs(rng: &mut impl Rng, h: usize, w: usize, n: u32) -> InstanceMap {
    let mut ids = vec![0u32; h * w];
    for id in 1..=n {
        let cx = rng.random_range(0.0..w as f64);
        let cy = rng.random_range(0.0..h as f64);
        let ax = rng.random_range(1.0..(w as f64 / 2.0).max(1.5));
        let ay = rng.random_range(1.0..(h as f64 / 2.0).max(1.5));
        for y in 0..h {
            for x in 0..w {
                let (u, v) = ((x as f64 - cx) / ax, (y as f64 - cy) / ay);
                if u * u + v * v <= 1.0 {
                    ids[y * w + x] = id;
                }
            }
        }
    }
    InstanceMap::new(h, w, ids).unwrap()
}

pub fn random_labels(rng: &mut impl Rng, h: usize, w: usize, k: usize) -> LabelMap {
    let labels = (0..h * w).map(|_| rng.random_range(0..k as u32)).collect();
    LabelMap::new(h, w, labels, Some(k)).unwrap()
}

/// `n` upper edges `10^(a + (b - a) k / (n - 1))`, `a = log10(lo)`,
/// `b = log10(hi)`.
pub fn logspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![hi];
    }
    let (a, b) = (lo.log10(), hi.log10());
    let step = (b - a) / (n - 1) as f64;
    let mut v: Vec<f64> = (0..n).map(|k| 10f64.powf(a + step * k as f64)).collect();
    v[0] = lo;
    v[n - 1] = hi;
    v
}

/// Same edges through natural logs; differs from [`logspace`] only by
/// rounding.
pub fn logspace_ln(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| (lo.ln() + (hi.ln() - lo.ln()) * k as f64 / (n - 1) as f64).exp())
        .collect()
}

fn on_boundary(ids: &[u32], h: usize, w: usize, x: usize, y: usize) -> bool {
    let id = ids[y * w + x];
    if x == 0 || y == 0 || x == w - 1 || y == h - 1 {
        return true;
    }
    ids[y * w + x - 1] != id
        || ids[y * w + x + 1] != id
        || ids[(y - 1) * w + x] != id
        || ids[(y + 1) * w + x] != id
}

/// Raw descriptors, `(B, C, H, W)`, from four nested loops: instance,
/// query pixel, contour point, then the bin tally.
pub fn naive_gsd_raw(batch: &[InstanceMap], n_rho: usize, n_theta: usize, eps: f64) -> Vec<f32> {
    let (h, w) = (batch[0].height(), batch[0].width());
    let c_total = n_rho * n_theta;
    let edges = logspace(0.125, 2.0, n_rho);
    let mut out = vec![0f32; batch.len() * c_total * h * w];
    for (b, inst) in batch.iter().enumerate() {
        let ids = inst.ids();
        let mut present: Vec<u32> = ids.iter().copied().filter(|&i| i != 0).collect();
        present.sort_unstable();
        present.dedup();
        for id in present {
            let mut contour = Vec::new();
            for y in 0..h {
                for x in 0..w {
                    if ids[y * w + x] == id && on_boundary(ids, h, w, x, y) {
                        contour.push((x as f64, y as f64));
                    }
                }
            }
            for qy in 0..h {
                for qx in 0..w {
                    if ids[qy * w + qx] != id {
                        continue;
                    }
                    let (sx, sy) = (qx as f64, qy as f64);
                    let mut r_max = 0f64;
                    for &(px, py) in &contour {
                        r_max = r_max.max(((px - sx).powi(2) + (py - sy).powi(2)).sqrt());
                    }
                    let mut counts = vec![0u64; c_total];
                    for &(px, py) in &contour {
                        let (dx, dy) = (px - sx, py - sy);
                        let r = (dx * dx + dy * dy).sqrt();
                        let mut theta = (sy - py).atan2(dx);
                        if theta < 0.0 {
                            theta += TAU;
                        }
                        let rn = if r_max > 0.0 { 2.0 * r / r_max } else { 0.0 };
                        let mut br = n_rho;
                        for (k, &e) in edges.iter().enumerate() {
                            if rn <= e {
                                br = k + 1;
                                break;
                            }
                        }
                        let bt = (1 + (theta / (TAU / n_theta as f64)).floor() as usize).min(n_theta);
                        counts[(br - 1) * n_theta + (bt - 1)] += 1;
                    }
                    let denom = contour.len() as f64 + eps;
                    for c in 0..c_total {
                        out[((b * c_total + c) * h + qy) * w + qx] = (counts[c] as f64 / denom) as f32;
                    }
                }
            }
        }
    }
    out
}

/// `(v - mean) / (std + eps)` per item with population moments; all zeros
/// when an item is constant.
pub fn naive_standardize(raw: &[f32], batch: usize, eps: f64) -> Vec<f32> {
    let per = raw.len() / batch;
    let mut out = Vec::with_capacity(raw.len());
    for b in 0..batch {
        let item = &raw[b * per..(b + 1) * per];
        if item.iter().all(|&v| v == item[0]) {
            out.extend(std::iter::repeat_n(0f32, per));
            continue;
        }
        let mut s = 0f64;
        for &v in item {
            s += v as f64;
        }
        let mean = s / per as f64;
        let mut q = 0f64;
        for &v in item {
            q += (v as f64 - mean) * (v as f64 - mean);
        }
        let sd = (q / per as f64).sqrt();
        for &v in item {
            out.push(((v as f64 - mean) / (sd + eps)) as f32);
        }
    }
    out
}

/// (mIoU, accuracy, FWIoU) recounted pixel by pixel for each class.
pub fn brute_seg(pairs: &[(LabelMap, LabelMap)], k: usize, ignore: Option<usize>) -> (f64, f64, f64) {
    let mut tp = vec![0u64; k];
    let mut fp = vec![0u64; k];
    let mut fn_ = vec![0u64; k];
    let mut truth_px = vec![0u64; k];
    let mut total = 0u64;
    let mut correct = 0u64;
    for (pred, truth) in pairs {
        for i in 0..pred.labels().len() {
            let (p, t) = (pred.labels()[i] as usize, truth.labels()[i] as usize);
            if Some(t) == ignore {
                continue;
            }
            total += 1;
            truth_px[t] += 1;
            if p == t {
                correct += 1;
                tp[t] += 1;
            } else {
                fp[p] += 1;
                fn_[t] += 1;
            }
        }
    }
    let mut iou_sum = 0f64;
    let mut n = 0usize;
    let mut fw = 0f64;
    for c in 0..k {
        if Some(c) == ignore {
            continue;
        }
        let union = tp[c] + fp[c] + fn_[c];
        if union == 0 {
            continue;
        }
        let iou = tp[c] as f64 / union as f64;
        iou_sum += iou;
        n += 1;
        fw += truth_px[c] as f64 / total as f64 * iou;
    }
    (iou_sum / n as f64, correct as f64 / total as f64, fw)
}

pub fn brute_adv_d(real: &[f64], fake: &[f64]) -> f64 {
    let mut a = 0.0;
    for &r in real {
        a += if r < 1.0 { 1.0 - r } else { 0.0 };
    }
    let mut b = 0.0;
    for &f in fake {
        b += if f > -1.0 { 1.0 + f } else { 0.0 };
    }
    a / real.len() as f64 + b / fake.len() as f64
}

pub fn brute_adv_g(fake: &[f64]) -> f64 {
    let mut s = 0.0;
    for &f in fake {
        s += f;
    }
    -s / fake.len() as f64
}

/// Sum over layers of `|real - fake|_1`, optionally divided by layer size.
pub fn brute_l1_layers(real: &[Vec<f64>], fake: &[Vec<f64>], per_element: bool) -> f64 {
    let mut total = 0.0;
    for (r, f) in real.iter().zip(fake) {
        let mut s = 0.0;
        for i in 0..r.len() {
            s += (r[i] - f[i]).abs();
        }
        total += if per_element { s / r.len() as f64 } else { s };
    }
    total
}

/// Softmax probabilities at one pixel computed without max shifting.
fn softmax_at(logits: &[f64], k: usize, plane: usize, b: usize, p: usize) -> Vec<f64> {
    let z: Vec<f64> = (0..k).map(|c| logits[(b * k + c) * plane + p].exp()).collect();
    let s: f64 = z.iter().sum();
    z.iter().map(|v| v / s).collect()
}

/// Mean over items of the mean per-pixel `-ln p(label)`.
pub fn brute_ce(logits: &[f64], dims: (usize, usize, usize, usize), labels: &[Vec<u32>]) -> f64 {
    let (bn, k, h, w) = dims;
    let plane = h * w;
    let mut acc = 0.0;
    for b in 0..bn {
        let mut s = 0.0;
        for p in 0..plane {
            let pr = softmax_at(logits, k, plane, b, p);
            s += -pr[labels[b][p] as usize].ln();
        }
        acc += s / plane as f64;
    }
    acc / bn as f64
}

/// Per-pixel `-sum_c p_real ln max(p_fake, 1e-12)`, averaged over every
/// pixel of every item.
pub fn brute_consistency(real: &[f64], fake: &[f64], dims: (usize, usize, usize, usize)) -> f64 {
    let (bn, k, h, w) = dims;
    let plane = h * w;
    let mut s = 0.0;
    for b in 0..bn {
        for p in 0..plane {
            let pr = softmax_at(real, k, plane, b, p);
            let pf = softmax_at(fake, k, plane, b, p);
            for c in 0..k {
                s -= pr[c] * pf[c].max(1e-12).ln();
            }
        }
    }
    s / (bn * plane) as f64
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-12)
}
