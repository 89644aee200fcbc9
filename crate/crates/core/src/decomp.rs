//! Non-overlapping subdomains, their oversampled windows, and the skeleton.
//!
//! Coarse faces are numbered vertical interfaces first, then horizontal
//! ones, each row-major. A subdomain's interface list Γ_i is ordered by
//! coarse face id and then along the face, and its outer oversampled
//! boundary list uses the same grouping so that with zero oversampling the
//! two lists coincide entry by entry.

use crate::error::{invalid, Result};
use crate::fineop::{FlowField, PermField};
use crate::grid::{Axis, CellId, FaceId, Grid, Side, Window};

/// A shared interface between two neighbouring subdomains.
#[derive(Clone, Debug, PartialEq)]
pub struct CoarseFace {
    pub id: usize,
    /// Normal axis of the fine faces on this interface.
    pub axis: Axis,
    /// Subdomain on the negative side of the global normal.
    pub minus: usize,
    /// Subdomain on the positive side.
    pub plus: usize,
    /// Fine faces, ascending along the interface.
    pub edges: Vec<FaceId>,
}

impl CoarseFace {
    /// `n^i . n` for subdomain `i` on this face.
    pub fn sign_for(&self, i: usize) -> f64 {
        if i == self.minus {
            1.0
        } else {
            -1.0
        }
    }

    pub fn side_for(&self, i: usize) -> Side {
        match (self.axis, i == self.minus) {
            (Axis::X, true) => Side::East,
            (Axis::X, false) => Side::West,
            (Axis::Y, true) => Side::North,
            (Axis::Y, false) => Side::South,
        }
    }
}

/// Fine face of Γ_i.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InterfaceEdge {
    pub face: FaceId,
    /// `n^i . n`: +1 when the subdomain's outward normal is the global normal.
    pub sign: f64,
    pub coarse_face: usize,
    /// Cell of Ω_i adjacent to the face.
    pub inner: CellId,
}

/// Fine face on the oversampled boundary that is not on the physical boundary.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OuterEdge {
    pub face: FaceId,
    pub side: Side,
    pub coarse_face: usize,
    pub inner: CellId,
}

impl OuterEdge {
    pub fn sign(&self) -> f64 {
        self.side.outward_sign()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Subdomain {
    pub id: usize,
    pub ix: usize,
    pub iy: usize,
    pub window: Window,
    pub oversampled: Window,
    pub coarse_faces: Vec<usize>,
    pub interface: Vec<InterfaceEdge>,
    pub outer: Vec<OuterEdge>,
}

impl Subdomain {
    pub fn num_coarse_faces(&self) -> usize {
        self.coarse_faces.len()
    }
}

#[derive(Clone, Debug)]
pub struct Decomposition {
    pub grid: Grid,
    pub mx: usize,
    pub my: usize,
    pub oversampling: usize,
    pub subdomains: Vec<Subdomain>,
    pub coarse_faces: Vec<CoarseFace>,
}

/// Scalar values on Γ_i, one per interface edge.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceFunction {
    pub subdomain: usize,
    pub values: Vec<f64>,
}

impl Decomposition {
    pub fn new(grid: &Grid, mx: usize, my: usize, oversampling: usize) -> Result<Self> {
        if mx == 0 || my == 0 || !grid.nx.is_multiple_of(mx) || !grid.ny.is_multiple_of(my) {
            return invalid(format!("{mx}x{my} subdomains do not divide a {}x{} grid", grid.nx, grid.ny));
        }
        let (sx, sy) = (grid.nx / mx, grid.ny / my);
        if (mx > 1 && oversampling >= sx) || (my > 1 && oversampling >= sy) {
            return invalid(format!("oversampling {oversampling} must be smaller than the {sx}x{sy} subdomain size"));
        }
        let id = |ix: usize, iy: usize| ix + mx * iy;
        let mut coarse_faces = Vec::new();
        for iy in 0..my {
            for ix in 1..mx {
                let edges = (iy * sy..(iy + 1) * sy).map(|j| FaceId::x(ix * sx, j)).collect();
                let n = coarse_faces.len();
                coarse_faces.push(CoarseFace { id: n, axis: Axis::X, minus: id(ix - 1, iy), plus: id(ix, iy), edges });
            }
        }
        for iy in 1..my {
            for ix in 0..mx {
                let edges = (ix * sx..(ix + 1) * sx).map(|i| FaceId::y(i, iy * sy)).collect();
                let n = coarse_faces.len();
                coarse_faces.push(CoarseFace { id: n, axis: Axis::Y, minus: id(ix, iy - 1), plus: id(ix, iy), edges });
            }
        }

        let bounds = grid.window();
        let mut subdomains = Vec::with_capacity(mx * my);
        for iy in 0..my {
            for ix in 0..mx {
                let i = id(ix, iy);
                let window = Window::new(ix * sx, iy * sy, sx, sy);
                let oversampled = window.expand(oversampling, &bounds);
                let mine: Vec<usize> =
                    coarse_faces.iter().filter(|cf| cf.minus == i || cf.plus == i).map(|cf| cf.id).collect();
                let mut interface = Vec::new();
                let mut outer = Vec::new();
                for &k in &mine {
                    let cf = &coarse_faces[k];
                    let side = cf.side_for(i);
                    for &face in &cf.edges {
                        interface.push(InterfaceEdge {
                            face,
                            sign: cf.sign_for(i),
                            coarse_face: k,
                            inner: window.inner_cell(face, side),
                        });
                    }
                    for face in oversampled.side_faces(side) {
                        outer.push(OuterEdge { face, side, coarse_face: k, inner: oversampled.inner_cell(face, side) });
                    }
                }
                subdomains.push(Subdomain { id: i, ix, iy, window, oversampled, coarse_faces: mine, interface, outer });
            }
        }
        Ok(Self { grid: grid.clone(), mx, my, oversampling, subdomains, coarse_faces })
    }

    pub fn num_subdomains(&self) -> usize {
        self.subdomains.len()
    }

    pub fn subdomain(&self, i: usize) -> Result<&Subdomain> {
        match self.subdomains.get(i) {
            Some(s) => Ok(s),
            None => invalid(format!("subdomain {i} out of range")),
        }
    }

    pub fn skeleton_len(&self) -> usize {
        self.coarse_faces.iter().map(|cf| cf.edges.len()).sum()
    }

    /// Skeleton faces with their coarse face id.
    pub fn skeleton_faces(&self) -> impl Iterator<Item = (FaceId, usize)> + '_ {
        self.coarse_faces.iter().flat_map(|cf| cf.edges.iter().map(move |&f| (f, cf.id)))
    }
}

/// Pressure on a face seen from `inner`. With both neighbours present in the
/// field this is the transmissibility-weighted average that balances the two
/// half-cell fluxes; otherwise it is recovered from the inner half cell and
/// the stored face velocity.
pub fn face_pressure(grid: &Grid, perm: &PermField, field: &FlowField, face: FaceId, inner: CellId) -> Result<f64> {
    let Some(p_in) = field.pressure_at(inner) else {
        return invalid(format!("cell {inner:?} outside field window"));
    };
    let (m, p) = face.neighbours();
    let outer = if m == Some(inner) { Some(p) } else { m };
    let d = grid.half_width(face.axis);
    let t_in = perm.at(inner) / d;
    if let Some(p_out) = outer.and_then(|c| field.pressure_at(c).map(|v| (c, v))) {
        let t_out = perm.at(p_out.0) / d;
        return Ok((t_in * p_in + t_out * p_out.1) / (t_in + t_out));
    }
    let Some(u) = field.flux_at(face) else {
        return invalid(format!("face {face:?} outside field window"));
    };
    let outward = if m == Some(inner) { u } else { -u };
    Ok(p_in - outward / t_in)
}

/// Outward normal velocity and interface pressure of `field` on Γ_i.
pub fn restrict_trace(
    decomp: &Decomposition,
    perm: &PermField,
    field: &FlowField,
    i: usize,
) -> Result<(TraceFunction, TraceFunction)> {
    let sub = decomp.subdomain(i)?;
    if !field.window.contains_window(&sub.window) {
        return invalid(format!("field window {:?} does not cover subdomain {i}", field.window));
    }
    let mut flux = Vec::with_capacity(sub.interface.len());
    let mut pressure = Vec::with_capacity(sub.interface.len());
    for e in &sub.interface {
        flux.push(e.sign * field.flux_at(e.face).unwrap());
        pressure.push(face_pressure(&decomp.grid, perm, field, e.face, e.inner)?);
    }
    Ok((TraceFunction { subdomain: i, values: flux }, TraceFunction { subdomain: i, values: pressure }))
}

/// Keep the values of `trace` on one coarse face and zero the rest.
pub fn mask_to_coarse_face(decomp: &Decomposition, trace: &TraceFunction, coarse_face: usize) -> Result<TraceFunction> {
    let sub = decomp.subdomain(trace.subdomain)?;
    if trace.values.len() != sub.interface.len() {
        return invalid("trace length does not match Γ_i");
    }
    if !sub.coarse_faces.contains(&coarse_face) {
        return invalid(format!("coarse face {coarse_face} not on subdomain {}", trace.subdomain));
    }
    let values = sub
        .interface
        .iter()
        .zip(&trace.values)
        .map(|(e, v)| if e.coarse_face == coarse_face { *v } else { 0.0 })
        .collect();
    Ok(TraceFunction { subdomain: trace.subdomain, values })
}
