//! Multiscale Robin coupled method with oversampling and smoothing for
//! two-dimensional Darcy flow on cell-centred finite volume grids.

pub mod band;
pub mod basis;
pub mod decomp;
pub mod driver;
pub mod error;
pub mod fineop;
pub mod grid;
pub mod io;
pub mod mrcm;
pub mod smooth;
pub mod synth;

pub use driver::{
    reference_solution, relative_error, run_extended, run_reduced, ErrorMetric, Experiment, IterationRecord,
    IterationReport, Method, ProblemSpec, Status,
};
pub use error::{Error, Result};
pub use fineop::{BoundaryCondition, BoundarySpec, FlowField, PermField, Problem, SourceField};
pub use grid::Grid;
