//! Uniform Cartesian mesh of a rectangle, plus rectangular cell windows.
//!
//! Cells are addressed by lattice coordinates `(i, j)` with `i` along x.
//! An x-normal face `(i, j)` separates cells `(i-1, j)` and `(i, j)`; a
//! y-normal face `(i, j)` separates cells `(i, j-1)` and `(i, j)`. Every face
//! carries the fixed global normal pointing in `+x` or `+y`.
//!
//! A [`Window`] is an axis-aligned block of cells. The whole grid is itself a
//! window, and every enumeration (cells, faces, perimeter faces) is defined
//! per window so local solves and global fields share one indexing scheme.

use crate::error::{invalid, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Axis {
    X,
    Y,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CellId {
    pub i: usize,
    pub j: usize,
}

impl CellId {
    pub fn new(i: usize, j: usize) -> Self {
        Self { i, j }
    }
}

/// Face identified by its normal axis and lattice coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FaceId {
    pub axis: Axis,
    pub i: usize,
    pub j: usize,
}

impl FaceId {
    pub fn x(i: usize, j: usize) -> Self {
        Self { axis: Axis::X, i, j }
    }

    pub fn y(i: usize, j: usize) -> Self {
        Self { axis: Axis::Y, i, j }
    }

    /// Cells on the negative and positive side of the global normal.
    /// Either may fall outside the grid; callers check with a window.
    pub fn neighbours(&self) -> (Option<CellId>, CellId) {
        match self.axis {
            Axis::X => (
                self.i.checked_sub(1).map(|i| CellId::new(i, self.j)),
                CellId::new(self.i, self.j),
            ),
            Axis::Y => (
                self.j.checked_sub(1).map(|j| CellId::new(self.i, j)),
                CellId::new(self.i, self.j),
            ),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    West,
    East,
    South,
    North,
}

impl Side {
    pub const ALL: [Side; 4] = [Side::West, Side::East, Side::South, Side::North];

    /// Sign of the global normal dotted with the outward normal of this side.
    pub fn outward_sign(self) -> f64 {
        match self {
            Side::West | Side::South => -1.0,
            Side::East | Side::North => 1.0,
        }
    }

    pub fn normal_axis(self) -> Axis {
        match self {
            Side::West | Side::East => Axis::X,
            Side::South | Side::North => Axis::Y,
        }
    }
}

/// One face of a cell together with the orientation of the cell's outward
/// normal relative to the face's global normal.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CellFace {
    pub face: FaceId,
    pub side: Side,
    pub sign: f64,
}

/// Axis-aligned block of `nx * ny` cells starting at cell `(i0, j0)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Window {
    pub i0: usize,
    pub j0: usize,
    pub nx: usize,
    pub ny: usize,
}

impl Window {
    pub fn new(i0: usize, j0: usize, nx: usize, ny: usize) -> Self {
        Self { i0, j0, nx, ny }
    }

    pub fn i1(&self) -> usize {
        self.i0 + self.nx
    }

    pub fn j1(&self) -> usize {
        self.j0 + self.ny
    }

    pub fn num_cells(&self) -> usize {
        self.nx * self.ny
    }

    pub fn num_x_faces(&self) -> usize {
        (self.nx + 1) * self.ny
    }

    pub fn num_y_faces(&self) -> usize {
        self.nx * (self.ny + 1)
    }

    pub fn num_faces(&self) -> usize {
        self.num_x_faces() + self.num_y_faces()
    }

    pub fn contains_cell(&self, c: CellId) -> bool {
        c.i >= self.i0 && c.i < self.i1() && c.j >= self.j0 && c.j < self.j1()
    }

    pub fn contains_window(&self, other: &Window) -> bool {
        other.i0 >= self.i0 && other.i1() <= self.i1() && other.j0 >= self.j0 && other.j1() <= self.j1()
    }

    pub fn contains_face(&self, f: FaceId) -> bool {
        match f.axis {
            Axis::X => f.i >= self.i0 && f.i <= self.i1() && f.j >= self.j0 && f.j < self.j1(),
            Axis::Y => f.i >= self.i0 && f.i < self.i1() && f.j >= self.j0 && f.j <= self.j1(),
        }
    }

    pub fn cell_index(&self, c: CellId) -> Option<usize> {
        self.contains_cell(c)
            .then(|| (c.i - self.i0) + self.nx * (c.j - self.j0))
    }

    pub fn cell_at(&self, k: usize) -> CellId {
        CellId::new(self.i0 + k % self.nx, self.j0 + k / self.nx)
    }

    pub fn face_index(&self, f: FaceId) -> Option<usize> {
        if !self.contains_face(f) {
            return None;
        }
        let (di, dj) = (f.i - self.i0, f.j - self.j0);
        Some(match f.axis {
            Axis::X => di + (self.nx + 1) * dj,
            Axis::Y => self.num_x_faces() + di + self.nx * dj,
        })
    }

    pub fn face_at(&self, k: usize) -> FaceId {
        let nxf = self.num_x_faces();
        if k < nxf {
            FaceId::x(self.i0 + k % (self.nx + 1), self.j0 + k / (self.nx + 1))
        } else {
            let k = k - nxf;
            FaceId::y(self.i0 + k % self.nx, self.j0 + k / self.nx)
        }
    }

    pub fn cells(&self) -> impl Iterator<Item = CellId> + '_ {
        (0..self.num_cells()).map(move |k| self.cell_at(k))
    }

    pub fn faces(&self) -> impl Iterator<Item = FaceId> + '_ {
        (0..self.num_faces()).map(move |k| self.face_at(k))
    }

    /// Perimeter side of `f`, if `f` lies on this window's boundary.
    pub fn boundary_side(&self, f: FaceId) -> Option<Side> {
        if !self.contains_face(f) {
            return None;
        }
        match f.axis {
            Axis::X if f.i == self.i0 => Some(Side::West),
            Axis::X if f.i == self.i1() => Some(Side::East),
            Axis::Y if f.j == self.j0 => Some(Side::South),
            Axis::Y if f.j == self.j1() => Some(Side::North),
            _ => None,
        }
    }

    /// Faces of one perimeter side, ascending along the side.
    pub fn side_faces(&self, side: Side) -> Vec<FaceId> {
        match side {
            Side::West => (self.j0..self.j1()).map(|j| FaceId::x(self.i0, j)).collect(),
            Side::East => (self.j0..self.j1()).map(|j| FaceId::x(self.i1(), j)).collect(),
            Side::South => (self.i0..self.i1()).map(|i| FaceId::y(i, self.j0)).collect(),
            Side::North => (self.i0..self.i1()).map(|i| FaceId::y(i, self.j1())).collect(),
        }
    }

    /// All perimeter faces: west, east, south, north, each ascending.
    pub fn boundary_faces(&self) -> Vec<(FaceId, Side)> {
        Side::ALL
            .iter()
            .flat_map(|&s| self.side_faces(s).into_iter().map(move |f| (f, s)))
            .collect()
    }

    /// The cell of this window adjacent to a perimeter face.
    pub fn inner_cell(&self, f: FaceId, side: Side) -> CellId {
        match side {
            Side::West | Side::South => f.neighbours().1,
            Side::East | Side::North => f.neighbours().0.expect("east/north face has a minus cell"),
        }
    }

    /// Grow by `layers` cells on each side, clipped to `bounds`.
    pub fn expand(&self, layers: usize, bounds: &Window) -> Window {
        let i0 = self.i0.saturating_sub(layers).max(bounds.i0);
        let j0 = self.j0.saturating_sub(layers).max(bounds.j0);
        let i1 = (self.i1() + layers).min(bounds.i1());
        let j1 = (self.j1() + layers).min(bounds.j1());
        Window::new(i0, j0, i1 - i0, j1 - j0)
    }
}

/// Uniform Cartesian grid of `[0, lx] x [0, ly]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    pub nx: usize,
    pub ny: usize,
    pub lx: f64,
    pub ly: f64,
    pub hx: f64,
    pub hy: f64,
}

impl Grid {
    pub fn new(nx: usize, ny: usize, lx: f64, ly: f64) -> Result<Self> {
        if nx == 0 || ny == 0 {
            return invalid(format!("cell counts must be positive, got {nx}x{ny}"));
        }
        if !(lx > 0.0 && ly > 0.0 && lx.is_finite() && ly.is_finite()) {
            return invalid(format!("domain extents must be positive, got {lx}x{ly}"));
        }
        Ok(Self { nx, ny, lx, ly, hx: lx / nx as f64, hy: ly / ny as f64 })
    }

    pub fn window(&self) -> Window {
        Window::new(0, 0, self.nx, self.ny)
    }

    pub fn num_cells(&self) -> usize {
        self.nx * self.ny
    }

    pub fn num_faces(&self) -> usize {
        self.window().num_faces()
    }

    pub fn cell_volume(&self) -> f64 {
        self.hx * self.hy
    }

    /// Face length (area per unit depth).
    pub fn face_area(&self, axis: Axis) -> f64 {
        match axis {
            Axis::X => self.hy,
            Axis::Y => self.hx,
        }
    }

    /// Distance from a cell centre to a face with the given normal.
    pub fn half_width(&self, axis: Axis) -> f64 {
        match axis {
            Axis::X => 0.5 * self.hx,
            Axis::Y => 0.5 * self.hy,
        }
    }

    /// Cell width along the normal of a face.
    pub fn normal_width(&self, axis: Axis) -> f64 {
        2.0 * self.half_width(axis)
    }

    pub fn cell_index(&self, c: CellId) -> Result<usize> {
        match self.window().cell_index(c) {
            Some(k) => Ok(k),
            None => invalid(format!("cell {c:?} outside {}x{} grid", self.nx, self.ny)),
        }
    }

    pub fn face_index(&self, f: FaceId) -> Result<usize> {
        match self.window().face_index(f) {
            Some(k) => Ok(k),
            None => invalid(format!("face {f:?} outside {}x{} grid", self.nx, self.ny)),
        }
    }

    /// Adjacent cells of a face that exist in the grid (minus side, plus side).
    pub fn face_cells(&self, f: FaceId) -> (Option<CellId>, Option<CellId>) {
        let w = self.window();
        let (m, p) = f.neighbours();
        (m.filter(|c| w.contains_cell(*c)), Some(p).filter(|c| w.contains_cell(*c)))
    }

    pub fn is_boundary_face(&self, f: FaceId) -> bool {
        self.window().boundary_side(f).is_some()
    }

    /// West, east, south and north faces of a cell with outward orientation.
    pub fn faces_of_cell(&self, c: CellId) -> Result<[CellFace; 4]> {
        self.cell_index(c)?;
        let mk = |face, side: Side| CellFace { face, side, sign: side.outward_sign() };
        Ok([
            mk(FaceId::x(c.i, c.j), Side::West),
            mk(FaceId::x(c.i + 1, c.j), Side::East),
            mk(FaceId::y(c.i, c.j), Side::South),
            mk(FaceId::y(c.i, c.j + 1), Side::North),
        ])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spe10_grid_spacing() {
        let g = Grid::new(220, 60, 11.0 / 3.0, 1.0).unwrap();
        assert!((g.hx - 1.0 / 60.0).abs() < 1e-15);
        assert!((g.hy - 1.0 / 60.0).abs() < 1e-15);
    }

    #[test]
    fn single_cell() {
        let g = Grid::new(1, 1, 1.0, 1.0).unwrap();
        assert_eq!(g.num_cells(), 1);
        let boundary = g.window().faces().filter(|f| g.is_boundary_face(*f)).count();
        assert_eq!(boundary, 4);
        assert_eq!(g.num_faces(), 4);
    }

    #[test]
    fn face_counts() {
        let g = Grid::new(3, 2, 3.0, 2.0).unwrap();
        let w = g.window();
        assert_eq!(g.num_cells(), 6);
        assert_eq!(w.num_x_faces(), 8);
        assert_eq!(w.num_y_faces(), 9);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(Grid::new(0, 3, 1.0, 1.0).is_err());
        assert!(Grid::new(3, 3, -1.0, 1.0).is_err());
        assert!(Grid::new(3, 3, 1.0, 0.0).is_err());
        let g = Grid::new(2, 2, 1.0, 1.0).unwrap();
        assert!(g.faces_of_cell(CellId::new(2, 0)).is_err());
    }

    #[test]
    fn cell_face_incidence() {
        let g = Grid::new(2, 2, 1.0, 1.0).unwrap();
        let corner = g.faces_of_cell(CellId::new(0, 0)).unwrap();
        assert_eq!(corner.iter().filter(|cf| g.is_boundary_face(cf.face)).count(), 2);

        let g3 = Grid::new(3, 3, 1.0, 1.0).unwrap();
        let mid = g3.faces_of_cell(CellId::new(1, 1)).unwrap();
        assert!(mid.iter().all(|cf| !g3.is_boundary_face(cf.face)));

        let a = g3.faces_of_cell(CellId::new(0, 1)).unwrap();
        let b = g3.faces_of_cell(CellId::new(1, 1)).unwrap();
        assert_eq!(a[1].face, b[0].face);
        assert_eq!(a[1].sign, -b[0].sign);
    }

    #[test]
    fn signed_incidence_cancels_on_interior_faces() {
        let g = Grid::new(4, 3, 2.0, 1.5).unwrap();
        let mut sum = vec![0.0; g.num_faces()];
        let mut hits = vec![0; g.num_faces()];
        for c in g.window().cells() {
            for cf in g.faces_of_cell(c).unwrap() {
                let k = g.face_index(cf.face).unwrap();
                sum[k] += cf.sign;
                hits[k] += 1;
            }
        }
        for f in g.window().faces() {
            let k = g.face_index(f).unwrap();
            if g.is_boundary_face(f) {
                assert_eq!(hits[k], 1);
            } else {
                assert_eq!(hits[k], 2);
                assert_eq!(sum[k], 0.0);
            }
        }
    }

    #[test]
    fn window_enumeration_round_trips() {
        let w = Window::new(2, 3, 4, 5);
        for k in 0..w.num_cells() {
            assert_eq!(w.cell_index(w.cell_at(k)), Some(k));
        }
        for k in 0..w.num_faces() {
            assert_eq!(w.face_index(w.face_at(k)), Some(k));
        }
        assert_eq!(w.boundary_faces().len(), 2 * 4 + 2 * 5);
    }

    #[test]
    fn expand_clips_to_bounds() {
        let g = Window::new(0, 0, 10, 10);
        let w = Window::new(0, 4, 3, 3).expand(2, &g);
        assert_eq!(w, Window::new(0, 2, 5, 7));
        assert_eq!(Window::new(4, 4, 2, 2).expand(0, &g), Window::new(4, 4, 2, 2));
    }
}
