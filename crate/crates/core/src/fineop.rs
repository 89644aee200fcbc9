//! Fine-scale two-point flux discretization of Darcy flow on a cell window.
//!
//! Unknowns are cell pressures. Face velocities are recovered afterwards from
//! the two-point formulas, so every solve is exactly conservative per cell.
//! Boundary faces of a window take Dirichlet, Neumann or Robin data; Dirichlet
//! is assembled as Robin with zero resistance so both produce identical bits.

use crate::band::{BandCholesky, BandMatrix};
use crate::error::{invalid, Error, Result};
use crate::grid::{Axis, CellId, FaceId, Grid, Side, Window};

/// Scalar permeability per cell.
#[derive(Clone, Debug, PartialEq)]
pub struct PermField {
    nx: usize,
    ny: usize,
    values: Vec<f64>,
}

impl PermField {
    pub fn new(grid: &Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.num_cells() {
            return invalid(format!(
                "permeability has {} values for {} cells",
                values.len(),
                grid.num_cells()
            ));
        }
        if let Some((k, v)) = values.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v > 0.0)) {
            return invalid(format!("permeability must be positive and finite, cell {k} has {v}"));
        }
        Ok(Self { nx: grid.nx, ny: grid.ny, values })
    }

    pub fn uniform(grid: &Grid, k: f64) -> Result<Self> {
        Self::new(grid, vec![k; grid.num_cells()])
    }

    pub fn at(&self, c: CellId) -> f64 {
        self.values[c.i + self.nx * c.j]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self { nx: self.nx, ny: self.ny, values: self.values.iter().map(|v| v * factor).collect() }
    }
}

/// Volumetric source per cell.
#[derive(Clone, Debug, PartialEq)]
pub struct SourceField {
    nx: usize,
    values: Vec<f64>,
}

impl SourceField {
    pub fn zeros(grid: &Grid) -> Self {
        Self { nx: grid.nx, values: vec![0.0; grid.num_cells()] }
    }

    pub fn new(grid: &Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.num_cells() {
            return invalid(format!("source has {} values for {} cells", values.len(), grid.num_cells()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return invalid("source values must be finite");
        }
        Ok(Self { nx: grid.nx, values })
    }

    pub fn at(&self, c: CellId) -> f64 {
        self.values[c.i + self.nx * c.j]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| *v == 0.0)
    }
}

/// Condition on one boundary face. Neumann data is the outward normal
/// velocity; Robin reads `-beta * u.n + p = lambda` with `n` outward.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BoundaryCondition {
    Dirichlet(f64),
    Neumann(f64),
    Robin { beta: f64, lambda: f64 },
}

impl BoundaryCondition {
    /// Same condition with zero data.
    pub fn homogeneous(self) -> Self {
        match self {
            BoundaryCondition::Dirichlet(_) => BoundaryCondition::Dirichlet(0.0),
            BoundaryCondition::Neumann(_) => BoundaryCondition::Neumann(0.0),
            BoundaryCondition::Robin { beta, .. } => BoundaryCondition::Robin { beta, lambda: 0.0 },
        }
    }
}

/// One condition per perimeter face of a window, in [`Window::boundary_faces`] order.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundarySpec {
    window: Window,
    conditions: Vec<BoundaryCondition>,
}

impl BoundarySpec {
    pub fn new(window: Window, conditions: Vec<BoundaryCondition>) -> Result<Self> {
        let expected = 2 * (window.nx + window.ny);
        if conditions.len() != expected {
            return invalid(format!("{} boundary conditions for {expected} perimeter faces", conditions.len()));
        }
        for bc in &conditions {
            let ok = match *bc {
                BoundaryCondition::Dirichlet(g) => g.is_finite(),
                BoundaryCondition::Neumann(z) => z.is_finite(),
                BoundaryCondition::Robin { beta, lambda } => beta >= 0.0 && beta.is_finite() && lambda.is_finite(),
            };
            if !ok {
                return invalid(format!("bad boundary condition {bc:?}"));
            }
        }
        Ok(Self { window, conditions })
    }

    pub fn from_fn(window: Window, mut f: impl FnMut(FaceId, Side) -> BoundaryCondition) -> Result<Self> {
        let conditions = window.boundary_faces().into_iter().map(|(face, side)| f(face, side)).collect();
        Self::new(window, conditions)
    }

    /// Dirichlet `left` / `right` on the west / east sides, no flow elsewhere.
    pub fn linear_flow(grid: &Grid, left: f64, right: f64) -> Self {
        Self::from_fn(grid.window(), |_, side| match side {
            Side::West => BoundaryCondition::Dirichlet(left),
            Side::East => BoundaryCondition::Dirichlet(right),
            _ => BoundaryCondition::Neumann(0.0),
        })
        .expect("finite data")
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn conditions(&self) -> &[BoundaryCondition] {
        &self.conditions
    }

    pub fn position(&self, face: FaceId) -> Option<usize> {
        let w = &self.window;
        let side = w.boundary_side(face)?;
        Some(match side {
            Side::West => face.j - w.j0,
            Side::East => w.ny + face.j - w.j0,
            Side::South => 2 * w.ny + face.i - w.i0,
            Side::North => 2 * w.ny + w.nx + face.i - w.i0,
        })
    }

    pub fn get(&self, face: FaceId) -> Option<BoundaryCondition> {
        self.position(face).map(|k| self.conditions[k])
    }

    pub fn homogeneous(&self) -> Self {
        Self { window: self.window, conditions: self.conditions.iter().map(|c| c.homogeneous()).collect() }
    }
}

/// Global Darcy problem: mesh, permeability, physical boundary data, source.
#[derive(Clone, Debug)]
pub struct Problem {
    pub grid: Grid,
    pub perm: PermField,
    pub bc: BoundarySpec,
    pub source: SourceField,
}

impl Problem {
    pub fn new(grid: Grid, perm: PermField, bc: BoundarySpec, source: SourceField) -> Result<Self> {
        if perm.dims() != (grid.nx, grid.ny) {
            return invalid("permeability does not match grid");
        }
        if bc.window() != grid.window() {
            return invalid("boundary spec must cover the whole grid perimeter");
        }
        if source.values().len() != grid.num_cells() {
            return invalid("source does not match grid");
        }
        Ok(Self { grid, perm, bc, source })
    }
}

/// Resistance-form transmissibility `A / (d/K + beta)` of a half cell.
fn half_coefficient(area: f64, half: f64, k: f64, beta: f64) -> f64 {
    area / (half / k + beta)
}

/// Total flux per unit pressure drop across a face. Interior faces use the
/// harmonic combination of the two half cells; boundary faces the one half cell.
pub fn face_transmissibility(grid: &Grid, perm: &PermField, face: FaceId) -> Result<f64> {
    grid.face_index(face)?;
    let area = grid.face_area(face.axis);
    let d = grid.half_width(face.axis);
    Ok(match grid.face_cells(face) {
        (Some(a), Some(b)) => area / (d / perm.at(a) + d / perm.at(b)),
        (Some(c), None) | (None, Some(c)) => half_coefficient(area, d, perm.at(c), 0.0),
        (None, None) => unreachable!("face in range has a cell"),
    })
}

/// Global face velocity field (`u . n` with the fixed +x / +y normal) and
/// cell pressures on a window.
#[derive(Clone, Debug, PartialEq)]
pub struct FlowField {
    pub window: Window,
    pub pressure: Vec<f64>,
    pub flux: Vec<f64>,
}

impl FlowField {
    pub fn zeros(window: Window) -> Self {
        Self { window, pressure: vec![0.0; window.num_cells()], flux: vec![0.0; window.num_faces()] }
    }

    pub fn pressure_at(&self, c: CellId) -> Option<f64> {
        self.window.cell_index(c).map(|k| self.pressure[k])
    }

    pub fn flux_at(&self, f: FaceId) -> Option<f64> {
        self.window.face_index(f).map(|k| self.flux[k])
    }

    /// Copy of the sub-window `w`.
    pub fn restrict(&self, w: Window) -> Result<FlowField> {
        if !self.window.contains_window(&w) {
            return invalid(format!("window {w:?} not inside field window {:?}", self.window));
        }
        let pressure = w.cells().map(|c| self.pressure_at(c).unwrap()).collect();
        let flux = w.faces().map(|f| self.flux_at(f).unwrap()).collect();
        Ok(FlowField { window: w, pressure, flux })
    }

    /// Overwrite every cell and face of `other` in this field.
    pub fn overwrite(&mut self, other: &FlowField) -> Result<()> {
        if !self.window.contains_window(&other.window) {
            return invalid("overwrite source outside target window");
        }
        for (k, c) in other.window.cells().enumerate() {
            let t = self.window.cell_index(c).unwrap();
            self.pressure[t] = other.pressure[k];
        }
        for (k, f) in other.window.faces().enumerate() {
            let t = self.window.face_index(f).unwrap();
            self.flux[t] = other.flux[k];
        }
        Ok(())
    }

    /// `self += a * other` on identical windows.
    pub fn axpy(&mut self, a: f64, other: &FlowField) -> Result<()> {
        if self.window != other.window {
            return invalid("axpy on different windows");
        }
        self.pressure.iter_mut().zip(&other.pressure).for_each(|(x, y)| *x += a * y);
        self.flux.iter_mut().zip(&other.flux).for_each(|(x, y)| *x += a * y);
        Ok(())
    }

    /// Largest cellwise mismatch between net outflow and source, relative to
    /// the largest face flow and source magnitude in the window.
    pub fn conservation_residual(&self, grid: &Grid, source: Option<&SourceField>) -> f64 {
        let vol = grid.cell_volume();
        let mut scale = 0.0_f64;
        for (k, f) in self.window.faces().enumerate() {
            scale = scale.max(self.flux[k].abs() * grid.face_area(f.axis));
        }
        if let Some(s) = source {
            for c in self.window.cells() {
                scale = scale.max((s.at(c) * vol).abs());
            }
        }
        if scale == 0.0 {
            return 0.0;
        }
        let mut worst = 0.0_f64;
        for c in self.window.cells() {
            let mut net = 0.0;
            for cf in grid.faces_of_cell(c).expect("window inside grid") {
                net += cf.sign * self.flux_at(cf.face).unwrap() * grid.face_area(cf.face.axis);
            }
            let f = source.map_or(0.0, |s| s.at(c) * vol);
            worst = worst.max((net - f).abs());
        }
        worst / scale
    }
}

/// Assembled cell-pressure system of one window.
#[derive(Clone, Debug)]
pub struct LinearSystem {
    pub grid: Grid,
    pub window: Window,
    bc: BoundarySpec,
    /// Transmissibility to the east / north neighbour (0 on the window edge).
    east: Vec<f64>,
    north: Vec<f64>,
    /// Half-cell coefficient per perimeter face (0 for Neumann).
    boundary_coef: Vec<f64>,
    diag: Vec<f64>,
    pub rhs: Vec<f64>,
    pinned: bool,
}

fn boundary_coefficients(grid: &Grid, perm: &PermField, bc: &BoundarySpec) -> Vec<f64> {
    let w = bc.window();
    w.boundary_faces()
        .iter()
        .zip(bc.conditions())
        .map(|(&(face, side), cond)| {
            let cell = w.inner_cell(face, side);
            let area = grid.face_area(face.axis);
            let d = grid.half_width(face.axis);
            match *cond {
                BoundaryCondition::Dirichlet(_) => half_coefficient(area, d, perm.at(cell), 0.0),
                BoundaryCondition::Robin { beta, .. } => half_coefficient(area, d, perm.at(cell), beta),
                BoundaryCondition::Neumann(_) => 0.0,
            }
        })
        .collect()
}

/// Assemble the pressure system on `window` with boundary data `bc` and
/// optional source `source` (zero when absent).
pub fn assemble(
    grid: &Grid,
    perm: &PermField,
    window: Window,
    bc: &BoundarySpec,
    source: Option<&SourceField>,
) -> Result<LinearSystem> {
    if !grid.window().contains_window(&window) || window.num_cells() == 0 {
        return invalid(format!("window {window:?} not inside grid"));
    }
    if bc.window() != window {
        return invalid("boundary spec does not match window");
    }
    let n = window.num_cells();
    let mut east = vec![0.0; n];
    let mut north = vec![0.0; n];
    let mut diag = vec![0.0; n];
    for (k, c) in window.cells().enumerate() {
        if c.i + 1 < window.i1() {
            let t = face_transmissibility(grid, perm, FaceId::x(c.i + 1, c.j))?;
            east[k] = t;
            diag[k] += t;
            diag[k + 1] += t;
        }
        if c.j + 1 < window.j1() {
            let t = face_transmissibility(grid, perm, FaceId::y(c.i, c.j + 1))?;
            north[k] = t;
            diag[k] += t;
            diag[k + window.nx] += t;
        }
    }
    let boundary_coef = boundary_coefficients(grid, perm, bc);
    for (&(face, side), coef) in window.boundary_faces().iter().zip(&boundary_coef) {
        let k = window.cell_index(window.inner_cell(face, side)).unwrap();
        diag[k] += coef;
    }
    let pinned = boundary_coef.iter().all(|c| *c == 0.0);
    let mut sys = LinearSystem {
        grid: grid.clone(),
        window,
        bc: bc.clone(),
        east,
        north,
        boundary_coef,
        diag,
        rhs: Vec::new(),
        pinned,
    };
    sys.rhs = sys.build_rhs(bc, source)?;
    Ok(sys)
}

impl LinearSystem {
    pub fn size(&self) -> usize {
        self.window.num_cells()
    }

    pub fn is_pinned(&self) -> bool {
        self.pinned
    }

    fn build_rhs(&self, bc: &BoundarySpec, source: Option<&SourceField>) -> Result<Vec<f64>> {
        let w = self.window;
        let vol = self.grid.cell_volume();
        let mut rhs: Vec<f64> = match source {
            Some(s) => w.cells().map(|c| s.at(c) * vol).collect(),
            None => vec![0.0; w.num_cells()],
        };
        let mut magnitude: f64 = rhs.iter().map(|v| v.abs()).sum();
        for ((&(face, side), cond), coef) in w.boundary_faces().iter().zip(bc.conditions()).zip(&self.boundary_coef) {
            let k = w.cell_index(w.inner_cell(face, side)).unwrap();
            let v = match *cond {
                BoundaryCondition::Dirichlet(g) => coef * g,
                BoundaryCondition::Robin { lambda, .. } => coef * lambda,
                BoundaryCondition::Neumann(z) => -self.grid.face_area(face.axis) * z,
            };
            rhs[k] += v;
            magnitude += v.abs();
        }
        if self.pinned {
            let net: f64 = rhs.iter().sum();
            if net.abs() > 1e-12 * magnitude.max(f64::MIN_POSITIVE) {
                return Err(Error::SingularSystem(format!(
                    "all-Neumann window with incompatible data (net source {net:e})"
                )));
            }
            rhs[0] = 0.0;
        }
        Ok(rhs)
    }

    /// Matrix entry `(r, c)` in window cell numbering.
    pub fn entry(&self, r: usize, c: usize) -> f64 {
        if self.pinned && (r == 0 || c == 0) {
            return if r == c { 1.0 } else { 0.0 };
        }
        let nx = self.window.nx;
        if r == c {
            self.diag[r]
        } else if r + 1 == c && !c.is_multiple_of(nx) {
            -self.east[r]
        } else if c + 1 == r && !r.is_multiple_of(nx) {
            -self.east[c]
        } else if r + nx == c {
            -self.north[r]
        } else if c + nx == r {
            -self.north[c]
        } else {
            0.0
        }
    }

    /// Row-major dense copy of the matrix.
    pub fn to_dense(&self) -> Vec<f64> {
        let n = self.size();
        let mut m = vec![0.0; n * n];
        for r in 0..n {
            for c in 0..n {
                m[r * n + c] = self.entry(r, c);
            }
        }
        m
    }

    /// Cell numbering used by the band factorization: the shorter window
    /// axis runs fastest so the half bandwidth is `min(nx, ny)`.
    fn band_order(&self) -> (usize, impl Fn(usize) -> usize) {
        let (nx, ny) = (self.window.nx, self.window.ny);
        let b = nx.min(ny);
        let transpose = nx > ny;
        (b, move |k: usize| if transpose { (k / nx) + ny * (k % nx) } else { k })
    }

    fn band_matrix(&self) -> BandMatrix {
        let n = self.size();
        let nx = self.window.nx;
        let (b, ord) = self.band_order();
        let mut m = BandMatrix::zeros(n, b);
        for k in 0..n {
            m.set(ord(k), ord(k), self.diag[k]);
            if self.east[k] != 0.0 {
                m.set(ord(k + 1), ord(k), -self.east[k]);
            }
            if self.north[k] != 0.0 {
                m.set(ord(k + nx), ord(k), -self.north[k]);
            }
        }
        if self.pinned {
            let p = ord(0);
            for q in p.saturating_sub(b)..(p + b + 1).min(n) {
                m.set(p, q, 0.0);
            }
            m.set(p, p, 1.0);
        }
        m
    }

    pub fn factor(&self) -> Result<FineSolver> {
        let band = self.band_matrix();
        let chol = band.cholesky()?;
        let (_, ord) = self.band_order();
        let perm: Vec<usize> = (0..self.size()).map(ord).collect();
        Ok(FineSolver { system: self.clone(), band, chol, perm })
    }

    pub fn solve(&self) -> Result<FlowField> {
        self.factor()?.solve_rhs(&self.rhs, &self.bc)
    }
}

/// A factored window operator that can be reused for any boundary data with
/// the same condition types and resistances.
#[derive(Clone, Debug)]
pub struct FineSolver {
    system: LinearSystem,
    band: BandMatrix,
    chol: BandCholesky,
    perm: Vec<usize>,
}

/// Relative residual bound accepted from a fine solve.
pub const FINE_RESIDUAL_TOL: f64 = 1e-13;

impl FineSolver {
    pub fn window(&self) -> Window {
        self.system.window
    }

    pub fn boundary(&self) -> &BoundarySpec {
        &self.system.bc
    }

    /// Solve with new boundary values and source.
    pub fn solve(&self, perm: &PermField, bc: &BoundarySpec, source: Option<&SourceField>) -> Result<FlowField> {
        if bc.window() != self.system.window {
            return invalid("boundary spec does not match factored window");
        }
        let coef = boundary_coefficients(&self.system.grid, perm, bc);
        if coef.iter().zip(&self.system.boundary_coef).any(|(a, b)| a.to_bits() != b.to_bits()) {
            return invalid("boundary condition types differ from the factored operator");
        }
        let rhs = self.system.build_rhs(bc, source)?;
        self.solve_rhs(&rhs, bc)
    }

    fn solve_rhs(&self, rhs: &[f64], bc: &BoundarySpec) -> Result<FlowField> {
        let n = rhs.len();
        let mut b = vec![0.0; n];
        for k in 0..n {
            b[self.perm[k]] = rhs[k];
        }
        let mut x = b.clone();
        self.chol.solve_in_place(&mut x);
        // one refinement step
        let ax = self.band.mul_vec(&x);
        let mut r: Vec<f64> = b.iter().zip(&ax).map(|(u, v)| u - v).collect();
        self.chol.solve_in_place(&mut r);
        x.iter_mut().zip(&r).for_each(|(u, d)| *u += d);

        let ax = self.band.mul_vec(&x);
        let res = b.iter().zip(&ax).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max);
        let xn = x.iter().map(|v| v.abs()).fold(0.0, f64::max);
        let bn = b.iter().map(|v| v.abs()).fold(0.0, f64::max);
        let scale = self.band.norm_inf() * xn + bn;
        if scale > 0.0 && res > FINE_RESIDUAL_TOL * scale {
            return Err(Error::SingularSystem(format!("relative residual {:e} after refinement", res / scale)));
        }
        let pressure: Vec<f64> = (0..n).map(|k| x[self.perm[k]]).collect();
        Ok(self.fluxes(pressure, bc))
    }

    fn fluxes(&self, pressure: Vec<f64>, bc: &BoundarySpec) -> FlowField {
        let sys = &self.system;
        let w = sys.window;
        let grid = &sys.grid;
        let mut field = FlowField { window: w, pressure, flux: vec![0.0; w.num_faces()] };
        for k in 0..w.num_cells() {
            let c = w.cell_at(k);
            if sys.east[k] != 0.0 {
                let f = FaceId::x(c.i + 1, c.j);
                let u = sys.east[k] * (field.pressure[k] - field.pressure[k + 1]) / grid.face_area(Axis::X);
                field.flux[w.face_index(f).unwrap()] = u;
            }
            if sys.north[k] != 0.0 {
                let f = FaceId::y(c.i, c.j + 1);
                let u = sys.north[k] * (field.pressure[k] - field.pressure[k + w.nx]) / grid.face_area(Axis::Y);
                field.flux[w.face_index(f).unwrap()] = u;
            }
        }
        for ((&(face, side), cond), coef) in w.boundary_faces().iter().zip(bc.conditions()).zip(&sys.boundary_coef) {
            let pc = field.pressure[w.cell_index(w.inner_cell(face, side)).unwrap()];
            let area = grid.face_area(face.axis);
            let outward = match *cond {
                BoundaryCondition::Dirichlet(g) => coef * (pc - g) / area,
                BoundaryCondition::Robin { lambda, .. } => coef * (pc - lambda) / area,
                BoundaryCondition::Neumann(z) => z,
            };
            field.flux[w.face_index(face).unwrap()] = outward * side.outward_sign();
        }
        field
    }
}

/// Fine solution of the whole problem.
pub fn solve_global(problem: &Problem) -> Result<FlowField> {
    assemble(&problem.grid, &problem.perm, problem.grid.window(), &problem.bc, Some(&problem.source))?.solve()
}
