use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::PopulationGraph;

/// Fruchterman–Reingold layout on the unit square with linear cooling,
/// rescaled so each axis spans `[0, 1]`. A degenerate axis sits at 0.5.
pub fn layout(graph: &PopulationGraph, iterations: usize, seed: u64) -> Vec<[f64; 2]> {
    let n = graph.node_count();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pos: Vec<[f64; 2]> = (0..n).map(|_| [rng.random::<f64>(), rng.random::<f64>()]).collect();
    if n > 1 {
        let k = (1.0 / n as f64).sqrt();
        let mut disp = vec![[0.0f64; 2]; n];
        for it in 0..iterations {
            let temperature = 0.1 * (1.0 - it as f64 / iterations as f64);
            disp.iter_mut().for_each(|d| *d = [0.0, 0.0]);
            for i in 0..n {
                for j in i + 1..n {
                    let (dx, dy) = (pos[i][0] - pos[j][0], pos[i][1] - pos[j][1]);
                    let dist = (dx * dx + dy * dy).sqrt().max(1e-9);
                    let f = k * k / dist / dist;
                    disp[i][0] += dx * f;
                    disp[i][1] += dy * f;
                    disp[j][0] -= dx * f;
                    disp[j][1] -= dy * f;
                }
            }
            for &(i, j) in graph.edges() {
                let (dx, dy) = (pos[i][0] - pos[j][0], pos[i][1] - pos[j][1]);
                let dist = (dx * dx + dy * dy).sqrt().max(1e-9);
                let f = dist / k;
                disp[i][0] -= dx * f;
                disp[i][1] -= dy * f;
                disp[j][0] += dx * f;
                disp[j][1] += dy * f;
            }
            for (p, d) in pos.iter_mut().zip(&disp) {
                let len = (d[0] * d[0] + d[1] * d[1]).sqrt();
                if len > 0.0 {
                    let step = len.min(temperature) / len;
                    p[0] += d[0] * step;
                    p[1] += d[1] * step;
                }
            }
        }
    }
    for axis in 0..2 {
        let (lo, hi) = pos
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p[axis]), hi.max(p[axis])));
        for p in &mut pos {
            p[axis] = if hi > lo { (p[axis] - lo) / (hi - lo) } else { 0.5 };
        }
    }
    pos
}

/// `node,x,y` CSV.
pub fn write_layout_csv(coords: &[[f64; 2]], path: &Path) -> Result<()> {
    let mut out = String::from("node,x,y\n");
    for (i, [x, y]) in coords.iter().enumerate() {
        out.push_str(&format!("{i},{x},{y}\n"));
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}
