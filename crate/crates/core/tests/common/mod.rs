#![allow(dead_code)]

use std::path::PathBuf;

use mrcm::fineop::{BoundaryCondition, BoundarySpec, PermField, Problem, SourceField};
use mrcm::grid::{FaceId, Grid, Side, Window};
use mrcm::io::{linear_flow_problem, Spe10Dims};
use nalgebra::{DMatrix, DVector};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

/// Dense TPFA system built cell by cell from the geometry. Row-major
/// matrix, right-hand side, and whether cell 0 was pinned.
pub fn dense_oracle(
    grid: &Grid,
    perm: &PermField,
    w: Window,
    bc: &BoundarySpec,
    source: Option<&SourceField>,
) -> (DMatrix<f64>, DVector<f64>) {
    let n = w.nx * w.ny;
    let idx = |i: usize, j: usize| (i - w.i0) + w.nx * (j - w.j0);
    let k = |i: usize, j: usize| perm.values()[i + grid.nx * j];
    let mut a = DMatrix::<f64>::zeros(n, n);
    let mut b = DVector::<f64>::zeros(n);
    let mut any_coupled = false;
    for j in w.j0..w.j0 + w.ny {
        for i in w.i0..w.i0 + w.nx {
            let r = idx(i, j);
            let kc = k(i, j);
            b[r] += source.map_or(0.0, |s| s.values()[i + grid.nx * j]) * grid.hx * grid.hy;
            // (neighbour, face, area, half width)
            let sides: [(Option<(usize, usize)>, FaceId, f64, f64); 4] = [
                ((i > w.i0).then(|| (i - 1, j)), FaceId::x(i, j), grid.hy, grid.hx / 2.0),
                ((i + 1 < w.i0 + w.nx).then(|| (i + 1, j)), FaceId::x(i + 1, j), grid.hy, grid.hx / 2.0),
                ((j > w.j0).then(|| (i, j - 1)), FaceId::y(i, j), grid.hx, grid.hy / 2.0),
                ((j + 1 < w.j0 + w.ny).then(|| (i, j + 1)), FaceId::y(i, j + 1), grid.hx, grid.hy / 2.0),
            ];
            for (nb, face, area, d) in sides {
                match nb {
                    Some((ni, nj)) => {
                        let t = area / (d / kc + d / k(ni, nj));
                        a[(r, r)] += t;
                        a[(r, idx(ni, nj))] -= t;
                    }
                    None => match bc.get(face).expect("perimeter face has a condition") {
                        BoundaryCondition::Dirichlet(g) => {
                            let c = area / (d / kc);
                            a[(r, r)] += c;
                            b[r] += c * g;
                            any_coupled = true;
                        }
                        BoundaryCondition::Robin { beta, lambda } => {
                            let c = area / (d / kc + beta);
                            a[(r, r)] += c;
                            b[r] += c * lambda;
                            any_coupled = true;
                        }
                        BoundaryCondition::Neumann(z) => b[r] -= area * z,
                    },
                }
            }
        }
    }
    if !any_coupled {
        for c in 0..n {
            a[(0, c)] = 0.0;
            a[(c, 0)] = 0.0;
        }
        a[(0, 0)] = 1.0;
        b[0] = 0.0;
    }
    (a, b)
}

pub fn dense_solve(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    a.clone().lu().solve(b).expect("nonsingular oracle system")
}

pub fn random_condition(rng: &mut StdRng, allow_neumann: bool) -> BoundaryCondition {
    match rng.gen_range(0..if allow_neumann { 3 } else { 2 }) {
        0 => BoundaryCondition::Dirichlet(rng.gen_range(-1.0..1.0)),
        1 => BoundaryCondition::Robin { beta: rng.gen_range(0.0..3.0), lambda: rng.gen_range(-1.0..1.0) },
        _ => BoundaryCondition::Neumann(rng.gen_range(-1.0..1.0)),
    }
}

/// Random heterogeneous problem with mixed boundary conditions on a small grid.
pub fn random_problem(seed: u64, nx: usize, ny: usize, log_contrast: f64) -> Problem {
    let mut rng = StdRng::seed_from_u64(seed);
    let g = Grid::new(nx, ny, rng.gen_range(0.5..2.0), rng.gen_range(0.5..2.0)).unwrap();
    let perm =
        PermField::new(&g, (0..nx * ny).map(|_| (log_contrast * rng.gen_range(-0.5..0.5f64)).exp()).collect()).unwrap();
    let src = SourceField::new(&g, (0..nx * ny).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap();
    let bc = BoundarySpec::from_fn(g.window(), |_, side| {
        if side == Side::West {
            random_condition(&mut rng, false)
        } else {
            random_condition(&mut rng, true)
        }
    })
    .unwrap();
    Problem::new(g, perm, bc, src).unwrap()
}

/// Stand-in for an SPE10 layer: seeded lognormal field on the 220×60
/// grid, log-variance 9, clipped to a 1e7 contrast. Not SPE10 data.
pub fn proxy_problem(seed: u64) -> Problem {
    let g = Spe10Dims::MODEL2.layer_grid().unwrap();
    let perm = mrcm::synth::lognormal(&g, seed, 9.0, 4.0).unwrap();
    let h = 1e7f64.sqrt();
    let perm = PermField::new(&g, perm.values().iter().map(|k| k.clamp(1.0 / h, h)).collect()).unwrap();
    linear_flow_problem(&g, perm).unwrap()
}

/// SPE10 permeability file: `SPE10_PERM` or `data/spe_perm.dat` at the
/// workspace root.
pub fn spe10_path() -> PathBuf {
    std::env::var_os("SPE10_PERM")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).ancestors().nth(2).unwrap().join("data/spe_perm.dat"))
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

pub fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}
