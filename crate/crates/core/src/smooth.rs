//! Multiplicative overlapping Schwarz smoothing of a global fine field.
//!
//! A sweep visits the oversampled windows in subdomain order and re-solves
//! the fine problem on each one, with the source and physical data of the
//! global problem. On faces of the window inside Ω the pressure of the
//! neighbouring outside cell is the transmission datum, entered as a Robin
//! condition whose resistance is that cell's half-width over its
//! permeability. The local flux through such a face is then exactly the
//! global two-point flux, so a sweep is a block Gauss-Seidel pass over the
//! overlapping windows and the global fine solution is a fixed point.

use crate::decomp::Decomposition;
use crate::error::Result;
use crate::fineop::{assemble, BoundaryCondition, BoundarySpec, FineSolver, FlowField, Problem};
use crate::grid::{CellId, FaceId, Window};

#[derive(Clone, Debug)]
struct SmoothingWindow {
    window: Window,
    solver: FineSolver,
    /// Per perimeter face: the outside cell and its resistance, or `None` on ∂Ω.
    outside: Vec<Option<(CellId, f64)>>,
}

#[derive(Clone, Debug)]
pub struct Smoother {
    windows: Vec<SmoothingWindow>,
}

fn outside_cell(face: FaceId, inner: CellId) -> CellId {
    let (m, p) = face.neighbours();
    if m == Some(inner) {
        p
    } else {
        m.expect("interior face has two cells")
    }
}

impl Smoother {
    pub fn new(problem: &Problem, decomp: &Decomposition) -> Result<Self> {
        let grid = &problem.grid;
        let windows = decomp
            .subdomains
            .iter()
            .map(|sub| {
                let w = sub.oversampled;
                let outside: Vec<Option<(CellId, f64)>> = w
                    .boundary_faces()
                    .iter()
                    .map(|&(face, side)| {
                        if grid.is_boundary_face(face) {
                            None
                        } else {
                            let c = outside_cell(face, w.inner_cell(face, side));
                            Some((c, grid.half_width(face.axis) / problem.perm.at(c)))
                        }
                    })
                    .collect();
                let bc = Self::boundary(problem, w, &outside, None)?;
                let solver = assemble(grid, &problem.perm, w, &bc, None)?.factor()?;
                Ok(SmoothingWindow { window: w, solver, outside })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { windows })
    }

    fn boundary(
        problem: &Problem,
        w: Window,
        outside: &[Option<(CellId, f64)>],
        field: Option<&FlowField>,
    ) -> Result<BoundarySpec> {
        let conditions = w
            .boundary_faces()
            .iter()
            .zip(outside)
            .map(|(&(face, _), out)| match out {
                Some((c, beta)) => BoundaryCondition::Robin {
                    beta: *beta,
                    lambda: field.map_or(0.0, |f| f.pressure_at(*c).expect("global field")),
                },
                None => problem.bc.get(face).expect("perimeter face on ∂Ω"),
            })
            .collect();
        BoundarySpec::new(w, conditions)
    }

    pub fn smooth_once(&self, problem: &Problem, field: &FlowField) -> Result<FlowField> {
        let mut current = field.clone();
        for sw in &self.windows {
            let bc = Self::boundary(problem, sw.window, &sw.outside, Some(&current))?;
            let local = sw.solver.solve(&problem.perm, &bc, Some(&problem.source))?;
            current.overwrite(&local)?;
        }
        Ok(current)
    }

    /// `steps` sweeps; zero steps returns the input unchanged.
    pub fn smooth(&self, problem: &Problem, field: &FlowField, steps: usize) -> Result<FlowField> {
        let mut current = field.clone();
        for _ in 0..steps {
            current = self.smooth_once(problem, &current)?;
        }
        Ok(current)
    }
}
