//! Multiscale basis functions from oversampled local Robin problems.
//!
//! Each subdomain owns one factored operator on its oversampled window. The
//! boundary of that window splits into physical faces (on ∂Ω, where the
//! global condition types apply) and outer faces, where a Robin condition
//! `-β u·n + p = λ` is imposed. A basis function is the local solution for one
//! datum λ, restricted to the non-overlapping subdomain.

use std::collections::HashMap;

use crate::decomp::{face_pressure, restrict_trace, Decomposition, TraceFunction};
use crate::error::{invalid, Result};
use crate::fineop::{assemble, BoundaryCondition, BoundarySpec, FineSolver, FlowField, PermField, Problem};
use crate::grid::{FaceId, Grid};

/// Robin weight α and the per-face resistance β = α w / K_e, where `w` is the
/// cell width normal to the face and `K_e` the harmonic mean of the adjacent
/// cell permeabilities (the single cell on ∂Ω).
#[derive(Clone, Debug)]
pub struct RobinSpec {
    pub alpha: f64,
    beta: Vec<f64>,
}

impl RobinSpec {
    pub fn new(grid: &Grid, perm: &PermField, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return invalid(format!("alpha must be positive, got {alpha}"));
        }
        let beta = grid
            .window()
            .faces()
            .map(|f| {
                let k = match grid.face_cells(f) {
                    (Some(a), Some(b)) => {
                        let (ka, kb) = (perm.at(a), perm.at(b));
                        2.0 * ka * kb / (ka + kb)
                    }
                    (Some(c), None) | (None, Some(c)) => perm.at(c),
                    (None, None) => unreachable!(),
                };
                alpha * grid.normal_width(f.axis) / k
            })
            .collect();
        Ok(Self { alpha, beta })
    }

    pub fn beta(&self, grid: &Grid, face: FaceId) -> f64 {
        self.beta[grid.face_index(face).expect("face in grid")]
    }
}

/// Robin datum on the outer oversampled boundary of one subdomain, aligned
/// with [`crate::decomp::Subdomain::outer`].
#[derive(Clone, Debug, PartialEq)]
pub struct RobinDatum {
    pub subdomain: usize,
    pub values: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BasisLabel {
    Offline(usize),
    Informed(usize),
    Particular,
}

#[derive(Clone, Debug)]
pub struct MultiscaleBasis {
    pub subdomain: usize,
    pub label: BasisLabel,
    /// Local solution restricted to the subdomain window.
    pub field: FlowField,
    pub flux_trace: TraceFunction,
    pub pressure_trace: TraceFunction,
    /// `-β u·n^i + π` on Γ_i.
    pub robin_trace: TraceFunction,
    pub datum: RobinDatum,
}

/// Indicator data, one per coarse face of the subdomain.
pub fn offline_lambdas(decomp: &Decomposition, i: usize) -> Result<Vec<RobinDatum>> {
    let sub = decomp.subdomain(i)?;
    Ok(sub
        .coarse_faces
        .iter()
        .map(|&k| RobinDatum {
            subdomain: i,
            values: sub.outer.iter().map(|e| if e.coarse_face == k { 1.0 } else { 0.0 }).collect(),
        })
        .collect())
}

/// Extend a Γ_i function to the outer boundary by carrying each side's
/// nearest interface value outward along that side.
pub fn extend_to_oversampled(decomp: &Decomposition, trace: &TraceFunction) -> Result<RobinDatum> {
    let sub = decomp.subdomain(trace.subdomain)?;
    if trace.values.len() != sub.interface.len() {
        return invalid("trace length does not match Γ_i");
    }
    let values = sub
        .outer
        .iter()
        .map(|o| {
            let (best, _) = sub
                .interface
                .iter()
                .enumerate()
                .filter(|(_, e)| e.coarse_face == o.coarse_face)
                .map(|(k, e)| {
                    let along = |f: FaceId| match f.axis {
                        crate::grid::Axis::X => f.j as i64,
                        crate::grid::Axis::Y => f.i as i64,
                    };
                    (k, (along(e.face) - along(o.face)).abs())
                })
                .min_by_key(|(_, d)| *d)
                .expect("coarse face has edges");
            trace.values[best]
        })
        .collect();
    Ok(RobinDatum { subdomain: trace.subdomain, values })
}

/// Robin trace `-β u·n^i + π` of a field on Γ_i.
pub fn robin_trace(decomp: &Decomposition, perm: &PermField, robin: &RobinSpec, field: &FlowField, i: usize) -> Result<TraceFunction> {
    let (flux, pressure) = restrict_trace(decomp, perm, field, i)?;
    let sub = decomp.subdomain(i)?;
    let values = sub
        .interface
        .iter()
        .zip(flux.values.iter().zip(&pressure.values))
        .map(|(e, (u, p))| -robin.beta(&decomp.grid, e.face) * u + p)
        .collect();
    Ok(TraceFunction { subdomain: i, values })
}

/// Informed data: the Robin trace of `current` on the outer oversampled
/// boundary (outward normal of the oversampled window), one masked copy per
/// coarse face. With zero oversampling this is the masked Γ_i trace.
pub fn informed_lambdas(
    decomp: &Decomposition,
    perm: &PermField,
    robin: &RobinSpec,
    i: usize,
    current: &FlowField,
) -> Result<Vec<RobinDatum>> {
    let sub = decomp.subdomain(i)?;
    if !current.window.contains_window(&sub.oversampled) {
        return invalid("current field does not cover the oversampled window");
    }
    let grid = &decomp.grid;
    let mut trace = Vec::with_capacity(sub.outer.len());
    for e in &sub.outer {
        let u = e.sign() * current.flux_at(e.face).unwrap();
        let p = face_pressure(grid, perm, current, e.face, e.inner)?;
        trace.push(-robin.beta(grid, e.face) * u + p);
    }
    Ok(sub
        .coarse_faces
        .iter()
        .map(|&k| RobinDatum {
            subdomain: i,
            values: sub.outer.iter().zip(&trace).map(|(e, v)| if e.coarse_face == k { *v } else { 0.0 }).collect(),
        })
        .collect())
}

/// Factored local operator of one oversampled window.
#[derive(Clone, Debug)]
pub struct LocalSolver {
    pub subdomain: usize,
    solver: FineSolver,
    /// Perimeter position -> outer edge index, `None` on physical faces.
    outer_slot: Vec<Option<usize>>,
}

impl LocalSolver {
    pub fn new(problem: &Problem, decomp: &Decomposition, robin: &RobinSpec, i: usize) -> Result<Self> {
        let sub = decomp.subdomain(i)?;
        let w = sub.oversampled;
        let index: HashMap<FaceId, usize> = sub.outer.iter().enumerate().map(|(k, e)| (e.face, k)).collect();
        let outer_slot: Vec<Option<usize>> =
            w.boundary_faces().iter().map(|(f, _)| index.get(f).copied()).collect();
        let template = Self::boundary(problem, decomp, robin, w, &outer_slot, None, false)?;
        let solver = assemble(&problem.grid, &problem.perm, w, &template, None)?.factor()?;
        Ok(Self { subdomain: i, solver, outer_slot })
    }

    fn boundary(
        problem: &Problem,
        decomp: &Decomposition,
        robin: &RobinSpec,
        w: crate::grid::Window,
        outer_slot: &[Option<usize>],
        datum: Option<&RobinDatum>,
        loaded: bool,
    ) -> Result<BoundarySpec> {
        let faces = w.boundary_faces();
        let conditions = faces
            .iter()
            .zip(outer_slot)
            .map(|(&(face, _), slot)| match slot {
                Some(k) => BoundaryCondition::Robin {
                    beta: robin.beta(&decomp.grid, face),
                    lambda: datum.map_or(0.0, |d| d.values[*k]),
                },
                None => {
                    let bc = problem.bc.get(face).expect("non-outer face lies on the physical boundary");
                    if loaded {
                        bc
                    } else {
                        bc.homogeneous()
                    }
                }
            })
            .collect();
        BoundarySpec::new(w, conditions)
    }

    /// Local solution on the oversampled window. With `loaded`, the actual
    /// source and physical boundary data apply; otherwise both are zero.
    pub fn solve(
        &self,
        problem: &Problem,
        decomp: &Decomposition,
        robin: &RobinSpec,
        datum: Option<&RobinDatum>,
        loaded: bool,
    ) -> Result<FlowField> {
        let sub = decomp.subdomain(self.subdomain)?;
        if let Some(d) = datum {
            if d.subdomain != self.subdomain || d.values.len() != sub.outer.len() {
                return invalid("Robin datum does not match the subdomain's outer boundary");
            }
        }
        let bc = Self::boundary(problem, decomp, robin, sub.oversampled, &self.outer_slot, datum, loaded)?;
        let source = loaded.then_some(&problem.source);
        self.solver.solve(&problem.perm, &bc, source)
    }
}

/// One-shot local solve (factors on every call).
pub fn solve_local(
    problem: &Problem,
    decomp: &Decomposition,
    robin: &RobinSpec,
    i: usize,
    datum: Option<&RobinDatum>,
    loaded: bool,
) -> Result<FlowField> {
    LocalSolver::new(problem, decomp, robin, i)?.solve(problem, decomp, robin, datum, loaded)
}

fn make_basis(
    problem: &Problem,
    decomp: &Decomposition,
    robin: &RobinSpec,
    local: &FlowField,
    label: BasisLabel,
    datum: RobinDatum,
) -> Result<MultiscaleBasis> {
    let i = datum.subdomain;
    let sub = decomp.subdomain(i)?;
    let field = local.restrict(sub.window)?;
    let (flux_trace, pressure_trace) = restrict_trace(decomp, &problem.perm, &field, i)?;
    let robin_trace = TraceFunction {
        subdomain: i,
        values: sub
            .interface
            .iter()
            .zip(flux_trace.values.iter().zip(&pressure_trace.values))
            .map(|(e, (u, p))| -robin.beta(&decomp.grid, e.face) * u + p)
            .collect(),
    };
    Ok(MultiscaleBasis { subdomain: i, label, field, flux_trace, pressure_trace, robin_trace, datum })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BasisKind {
    Offline,
    Informed,
}

/// Basis functions for a family of data on one subdomain.
pub fn build_basis_set(
    problem: &Problem,
    decomp: &Decomposition,
    robin: &RobinSpec,
    local: &LocalSolver,
    data: &[RobinDatum],
    kind: BasisKind,
) -> Result<Vec<MultiscaleBasis>> {
    data.iter()
        .enumerate()
        .map(|(k, d)| {
            let sol = local.solve(problem, decomp, robin, Some(d), false)?;
            let label = match kind {
                BasisKind::Offline => BasisLabel::Offline(k),
                BasisKind::Informed => BasisLabel::Informed(k),
            };
            make_basis(problem, decomp, robin, &sol, label, d.clone())
        })
        .collect()
}

/// Particular solution: zero Robin datum, actual source and physical data.
pub fn particular_solution(
    problem: &Problem,
    decomp: &Decomposition,
    robin: &RobinSpec,
    local: &LocalSolver,
) -> Result<MultiscaleBasis> {
    let sub = decomp.subdomain(local.subdomain)?;
    let datum = RobinDatum { subdomain: sub.id, values: vec![0.0; sub.outer.len()] };
    let sol = local.solve(problem, decomp, robin, None, true)?;
    make_basis(problem, decomp, robin, &sol, BasisLabel::Particular, datum)
}
