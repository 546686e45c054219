//! Instance synthesis for inputs that only carry class labels: every
//! 8-connected region of one class becomes its own instance.

use std::collections::VecDeque;

use crate::raster::{InstanceMap, LabelMap};

/// Labels each 8-connected same-class region with a fresh id, starting at 1
/// and numbered in row-major order of each region's first pixel. Pixels of
/// `skip_class` are left at 0.
pub fn instances_from_labels(map: &LabelMap, skip_class: Option<u32>) -> InstanceMap {
    let (w, h) = (map.width(), map.height());
    let labels = map.labels();
    let mut ids = vec![0u32; w * h];
    let mut next = 1u32;
    let mut queue = VecDeque::new();

    for start in 0..w * h {
        let class = labels[start];
        if ids[start] != 0 || Some(class) == skip_class {
            continue;
        }
        ids[start] = next;
        queue.push_back(start);
        while let Some(i) = queue.pop_front() {
            let (x, y) = ((i % w) as isize, (i / w) as isize);
            for dy in -1..=1 {
                for dx in -1..=1 {
                    let (nx, ny) = (x + dx, y + dy);
                    if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                        continue;
                    }
                    let j = ny as usize * w + nx as usize;
                    if ids[j] == 0 && labels[j] == class {
                        ids[j] = next;
                        queue.push_back(j);
                    }
                }
            }
        }
        next += 1;
    }
    InstanceMap::new(h, w, ids).expect("dimensions copied from a valid label map")
}
