//! Seeded synthetic permeability fields.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{invalid, Result};
use crate::fineop::PermField;
use crate::grid::Grid;

fn smooth_axis(v: &[f64], nx: usize, ny: usize, kernel: &[f64], along_x: bool) -> Vec<f64> {
    let r = (kernel.len() / 2) as isize;
    let mut out = vec![0.0; v.len()];
    for j in 0..ny {
        for i in 0..nx {
            let mut s = 0.0;
            for (t, w) in kernel.iter().enumerate() {
                let o = t as isize - r;
                let (ii, jj) = if along_x {
                    ((i as isize + o).clamp(0, nx as isize - 1) as usize, j)
                } else {
                    (i, (j as isize + o).clamp(0, ny as isize - 1) as usize)
                };
                s += w * v[ii + nx * jj];
            }
            out[i + nx * j] = s;
        }
    }
    out
}

/// Lognormal field: white noise smoothed by a Gaussian of `correlation`
/// cells, standardised, then `K = exp(sqrt(variance) * g)`.
pub fn lognormal(grid: &Grid, seed: u64, variance: f64, correlation: f64) -> Result<PermField> {
    if !(variance >= 0.0 && correlation >= 0.0) {
        return invalid("variance and correlation must be nonnegative");
    }
    let (nx, ny) = (grid.nx, grid.ny);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g: Vec<f64> = (0..nx * ny).map(|_| StandardNormal.sample(&mut rng)).collect();
    if correlation > 0.0 {
        let r = (3.0 * correlation).ceil() as isize;
        let kernel: Vec<f64> = (-r..=r).map(|o| (-0.5 * (o as f64 / correlation).powi(2)).exp()).collect();
        g = smooth_axis(&g, nx, ny, &kernel, true);
        g = smooth_axis(&g, nx, ny, &kernel, false);
    }
    let n = g.len() as f64;
    let mean = g.iter().sum::<f64>() / n;
    let sd = (g.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
    let s = variance.sqrt() / if sd > 0.0 { sd } else { 1.0 };
    PermField::new(grid, g.iter().map(|v| ((v - mean) * s).exp()).collect())
}
