//! Interface coupling of subdomain basis functions.
//!
//! Unknowns are one coefficient per basis function. For every coarse face
//! and every coarse test function `t` there are two rows:
//!
//! * flux continuity: the outward fluxes of both neighbours integrate to zero
//!   against `t`;
//! * Robin continuity: `β u·n^i + λ^i`, which equals the interface pressure of
//!   the subdomain solution, agrees across the face weakly against `t`
//!   (the two sides enter with the orientation sign `n^i·n`).
//!
//! The local solutions are affine in the coefficients, so both row families
//! are assembled from the stored traces of each basis function and of the
//! particular solution.

use std::ops::Range;

use nalgebra::{DMatrix, DVector};

use crate::basis::MultiscaleBasis;
use crate::decomp::{restrict_trace, Decomposition, Subdomain};
use crate::error::{invalid, Error, Result};
use crate::fineop::{FlowField, PermField};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CoarseDegree {
    Constant,
    Linear,
}

/// Piecewise polynomial test space on the coarse faces.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CoarseSpace {
    pub degree: CoarseDegree,
}

impl CoarseSpace {
    pub const CONSTANT: CoarseSpace = CoarseSpace { degree: CoarseDegree::Constant };
    pub const LINEAR: CoarseSpace = CoarseSpace { degree: CoarseDegree::Linear };

    pub fn per_face(&self) -> usize {
        match self.degree {
            CoarseDegree::Constant => 1,
            CoarseDegree::Linear => 2,
        }
    }

    /// Edge values of the test functions on a face with `n` fine edges: the
    /// indicator, then (for linear) the zero-mean ramp increasing along the
    /// global axis.
    pub fn test_functions(&self, n: usize) -> Vec<Vec<f64>> {
        let mut out = vec![vec![1.0; n]];
        if self.degree == CoarseDegree::Linear {
            out.push((0..n).map(|e| e as f64 + 0.5 - 0.5 * n as f64).collect());
        }
        out
    }
}

/// Basis functions of one subdomain plus its particular solution.
#[derive(Clone, Debug)]
pub struct SubdomainBases {
    pub particular: MultiscaleBasis,
    pub bases: Vec<MultiscaleBasis>,
}

#[derive(Clone, Debug)]
pub struct InterfaceSystem {
    pub matrix: DMatrix<f64>,
    pub rhs: DVector<f64>,
    /// `(subdomain, basis index)` of each column.
    pub columns: Vec<(usize, usize)>,
}

impl InterfaceSystem {
    pub fn size(&self) -> usize {
        self.columns.len()
    }
}

/// Γ_i positions belonging to coarse face `k`.
fn face_range(sub: &Subdomain, k: usize) -> Range<usize> {
    let start = sub.interface.iter().position(|e| e.coarse_face == k).expect("coarse face on subdomain");
    let len = sub.interface[start..].iter().take_while(|e| e.coarse_face == k).count();
    start..start + len
}

fn inner(a: &[f64], t: &[f64], area: f64) -> f64 {
    a.iter().zip(t).map(|(x, y)| x * y).sum::<f64>() * area
}

pub fn assemble_interface(decomp: &Decomposition, sets: &[SubdomainBases], coarse: &CoarseSpace) -> Result<InterfaceSystem> {
    if sets.len() != decomp.num_subdomains() {
        return Err(Error::InvalidState(format!(
            "{} basis sets for {} subdomains",
            sets.len(),
            decomp.num_subdomains()
        )));
    }
    let mut col_start = Vec::with_capacity(sets.len());
    let mut columns = Vec::new();
    for (i, set) in sets.iter().enumerate() {
        if set.particular.subdomain != i || set.bases.iter().any(|b| b.subdomain != i) {
            return Err(Error::InvalidState(format!("basis set {i} belongs to another subdomain")));
        }
        col_start.push(columns.len());
        columns.extend((0..set.bases.len()).map(|k| (i, k)));
    }
    let rows = decomp.coarse_faces.len() * 2 * coarse.per_face();
    if rows != columns.len() {
        return Err(Error::InvalidState(format!("interface system would be {rows}x{}", columns.len())));
    }
    let n = columns.len();
    let mut matrix = DMatrix::zeros(n, n);
    let mut rhs = DVector::zeros(n);
    let per = coarse.per_face();
    for cf in &decomp.coarse_faces {
        let area = decomp.grid.face_area(cf.axis);
        let tests = coarse.test_functions(cf.edges.len());
        for i in [cf.minus, cf.plus] {
            let sub = &decomp.subdomains[i];
            let range = face_range(sub, cf.id);
            let sign = cf.sign_for(i);
            let set = &sets[i];
            for (t_idx, t) in tests.iter().enumerate() {
                let flux_row = cf.id * 2 * per + t_idx;
                let pres_row = flux_row + per;
                rhs[flux_row] -= inner(&set.particular.flux_trace.values[range.clone()], t, area);
                rhs[pres_row] -= sign * inner(&set.particular.pressure_trace.values[range.clone()], t, area);
                for (k, b) in set.bases.iter().enumerate() {
                    let col = col_start[i] + k;
                    matrix[(flux_row, col)] += inner(&b.flux_trace.values[range.clone()], t, area);
                    matrix[(pres_row, col)] += sign * inner(&b.pressure_trace.values[range.clone()], t, area);
                }
            }
        }
    }
    Ok(InterfaceSystem { matrix, rhs, columns })
}

/// Relative residual accepted from the interface solve.
pub const INTERFACE_RESIDUAL_TOL: f64 = 1e-12;
/// Smallest pivot ratio of the equilibrated system treated as nonsingular.
pub const PIVOT_RATIO_TOL: f64 = 1e-14;

/// Direct solve of the coefficient system. Rows and columns are equilibrated
/// before a fully pivoted LU factorization.
pub fn solve_interface(system: &InterfaceSystem, iteration: usize) -> Result<Vec<f64>> {
    let n = system.size();
    if n == 0 {
        return Ok(Vec::new());
    }
    let singular = |detail: String| Error::SingularInterface { iteration, detail };
    let a = &system.matrix;
    let row_scale: Vec<f64> = (0..n)
        .map(|r| {
            let m = a.row(r).iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            if m > 0.0 {
                1.0 / m
            } else {
                0.0
            }
        })
        .collect();
    if row_scale.contains(&0.0) {
        return Err(singular("zero row".into()));
    }
    let mut scaled = a.clone();
    for r in 0..n {
        scaled.row_mut(r).scale_mut(row_scale[r]);
    }
    let col_scale: Vec<f64> = (0..n)
        .map(|c| {
            let m = scaled.column(c).iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            if m > 0.0 {
                1.0 / m
            } else {
                0.0
            }
        })
        .collect();
    if col_scale.contains(&0.0) {
        return Err(singular("zero column".into()));
    }
    for c in 0..n {
        scaled.column_mut(c).scale_mut(col_scale[c]);
    }
    let lu = scaled.clone().full_piv_lu();
    let u = lu.u();
    let diag: Vec<f64> = (0..n).map(|k| u[(k, k)].abs()).collect();
    let dmax = diag.iter().cloned().fold(0.0, f64::max);
    let dmin = diag.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(dmin > PIVOT_RATIO_TOL * dmax) {
        return Err(singular(format!("pivot ratio {:e}", dmin / dmax)));
    }
    let b = DVector::from_iterator(n, (0..n).map(|r| system.rhs[r] * row_scale[r]));
    let mut y = lu.solve(&b).ok_or_else(|| singular("LU solve failed".into()))?;
    let r = &b - &scaled * &y;
    if let Some(dy) = lu.solve(&r) {
        y += dy;
    }
    let x: Vec<f64> = (0..n).map(|c| y[c] * col_scale[c]).collect();

    let xv = DVector::from_column_slice(&x);
    let res = (&system.rhs - a * &xv).amax();
    let anorm = (0..n).map(|r| a.row(r).iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max);
    let scale = anorm * xv.amax() + system.rhs.amax();
    if scale > 0.0 && res > INTERFACE_RESIDUAL_TOL * scale {
        return Err(singular(format!("relative residual {:e}", res / scale)));
    }
    Ok(x)
}

/// Global multiscale field plus per-subdomain local fields and the jump of
/// the two one-sided skeleton velocities.
#[derive(Clone, Debug)]
pub struct MultiscaleSolution {
    pub field: FlowField,
    pub local: Vec<FlowField>,
    /// `u_minus - u_plus` in the global orientation, in skeleton order.
    pub skeleton_jump: Vec<f64>,
}

impl MultiscaleSolution {
    pub fn max_jump(&self) -> f64 {
        self.skeleton_jump.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

pub fn reconstruct(decomp: &Decomposition, sets: &[SubdomainBases], coefficients: &[f64]) -> Result<MultiscaleSolution> {
    let total: usize = sets.iter().map(|s| s.bases.len()).sum();
    if coefficients.len() != total || sets.len() != decomp.num_subdomains() {
        return invalid(format!("{} coefficients for {total} basis functions", coefficients.len()));
    }
    let grid = &decomp.grid;
    let gw = grid.window();
    let mut field = FlowField::zeros(gw);
    let mut local = Vec::with_capacity(sets.len());
    let mut offset = 0;
    for set in sets {
        let mut f = set.particular.field.clone();
        for b in &set.bases {
            f.axpy(coefficients[offset], &b.field)?;
            offset += 1;
        }
        local.push(f);
    }
    let mut on_skeleton = vec![false; gw.num_faces()];
    for (face, _) in decomp.skeleton_faces() {
        on_skeleton[gw.face_index(face).unwrap()] = true;
    }
    for f in &local {
        for (k, c) in f.window.cells().enumerate() {
            field.pressure[gw.cell_index(c).unwrap()] = f.pressure[k];
        }
        for (k, face) in f.window.faces().enumerate() {
            let g = gw.face_index(face).unwrap();
            if !on_skeleton[g] {
                field.flux[g] = f.flux[k];
            }
        }
    }
    let mut skeleton_jump = Vec::with_capacity(decomp.skeleton_len());
    for cf in &decomp.coarse_faces {
        for &face in &cf.edges {
            let um = local[cf.minus].flux_at(face).unwrap();
            let up = local[cf.plus].flux_at(face).unwrap();
            field.flux[gw.face_index(face).unwrap()] = 0.5 * (um + up);
            skeleton_jump.push(um - up);
        }
    }
    Ok(MultiscaleSolution { field, local, skeleton_jump })
}

/// Largest relative residual of the weak flux and Robin continuity
/// conditions, recomputed from the reconstructed local fields.
pub fn continuity_residuals(
    decomp: &Decomposition,
    perm: &PermField,
    solution: &MultiscaleSolution,
    coarse: &CoarseSpace,
) -> Result<(f64, f64)> {
    let traces: Vec<_> = (0..decomp.num_subdomains())
        .map(|i| restrict_trace(decomp, perm, &solution.local[i], i))
        .collect::<Result<_>>()?;
    let (mut flux_res, mut pres_res) = (0.0_f64, 0.0_f64);
    for cf in &decomp.coarse_faces {
        let area = decomp.grid.face_area(cf.axis);
        for t in coarse.test_functions(cf.edges.len()) {
            let abs_t: Vec<f64> = t.iter().map(|v| v.abs()).collect();
            let (mut fsum, mut fscale, mut psum, mut pscale) = (0.0, 0.0, 0.0, 0.0);
            for i in [cf.minus, cf.plus] {
                let range = face_range(&decomp.subdomains[i], cf.id);
                let (u, p) = &traces[i];
                let uu = &u.values[range.clone()];
                let pp = &p.values[range];
                fsum += inner(uu, &t, area);
                fscale += inner(&uu.iter().map(|v| v.abs()).collect::<Vec<_>>(), &abs_t, area);
                psum += cf.sign_for(i) * inner(pp, &t, area);
                pscale += inner(&pp.iter().map(|v| v.abs()).collect::<Vec<_>>(), &abs_t, area);
            }
            if fscale > 0.0 {
                flux_res = flux_res.max(fsum.abs() / fscale);
            }
            if pscale > 0.0 {
                pres_res = pres_res.max(psum.abs() / pscale);
            }
        }
    }
    Ok((flux_res, pres_res))
}
