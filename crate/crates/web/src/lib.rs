//! Browser bindings: fine pressure field, RM/EM error curves and single
//! basis functions for a few built-in problems.

use mrcm::basis::{offline_lambdas, LocalSolver, RobinSpec};
use mrcm::decomp::Decomposition;
use mrcm::driver::{reference_solution, ErrorMetric, Experiment, Method, ProblemSpec};
use mrcm::fineop::{PermField, Problem};
use mrcm::grid::Grid;
use mrcm::io::{dipole_problem, linear_flow_problem};
use mrcm::synth::lognormal;
use wasm_bindgen::prelude::*;

/// Cell values on an `nx × ny` grid, row by row from the bottom.
#[wasm_bindgen]
pub struct FieldView {
    nx: usize,
    ny: usize,
    values: Vec<f64>,
    log_perm: Vec<f64>,
}

#[wasm_bindgen]
impl FieldView {
    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn values(&self) -> Vec<f64> {
        self.values.clone()
    }

    /// log10 of the permeability, same layout.
    pub fn log_perm(&self) -> Vec<f64> {
        self.log_perm.clone()
    }
}

/// Per-iteration relative errors of both methods.
#[wasm_bindgen]
pub struct Curves {
    rm_pressure: Vec<f64>,
    rm_flux: Vec<f64>,
    em_pressure: Vec<f64>,
    em_flux: Vec<f64>,
}

#[wasm_bindgen]
impl Curves {
    pub fn rm_pressure(&self) -> Vec<f64> {
        self.rm_pressure.clone()
    }

    pub fn rm_flux(&self) -> Vec<f64> {
        self.rm_flux.clone()
    }

    pub fn em_pressure(&self) -> Vec<f64> {
        self.em_pressure.clone()
    }

    pub fn em_flux(&self) -> Vec<f64> {
        self.em_flux.clone()
    }
}

/// `dipole`, `homogeneous` or `lognormal` (110×30 grid, 11×3 subdomains).
pub fn build(problem: &str, seed: u32, variance: f64) -> Result<(Problem, (usize, usize)), String> {
    let e = |e: mrcm::Error| e.to_string();
    match problem {
        "dipole" => Ok((dipole_problem().map_err(e)?, (4, 4))),
        "homogeneous" => {
            let g = Grid::new(64, 64, 1.0, 1.0).map_err(e)?;
            Ok((linear_flow_problem(&g, PermField::uniform(&g, 1.0).map_err(e)?).map_err(e)?, (4, 4)))
        }
        "lognormal" => {
            let g = Grid::new(110, 30, 11.0 / 3.0, 1.0).map_err(e)?;
            let perm = lognormal(&g, seed as u64, variance, 2.0).map_err(e)?;
            Ok((linear_flow_problem(&g, perm).map_err(e)?, (11, 3)))
        }
        other => Err(format!("unknown problem {other:?}")),
    }
}

fn log_perm(p: &Problem) -> Vec<f64> {
    p.perm.values().iter().map(|k| k.log10()).collect()
}

pub fn fine_pressure_impl(problem: &str, seed: u32, variance: f64) -> Result<FieldView, String> {
    let (p, _) = build(problem, seed, variance)?;
    let f = reference_solution(&p).map_err(|e| e.to_string())?;
    Ok(FieldView { nx: p.grid.nx, ny: p.grid.ny, values: f.pressure, log_perm: log_perm(&p) })
}

pub fn error_curves_impl(
    problem: &str,
    seed: u32,
    variance: f64,
    alpha: f64,
    oversampling: usize,
    smoothing: usize,
    iterations: usize,
) -> Result<Curves, String> {
    let (p, (mx, my)) = build(problem, seed, variance)?;
    let mut spec = ProblemSpec::new(p, mx, my);
    spec.alpha = alpha;
    spec.oversampling = oversampling;
    spec.smoothing_steps = smoothing;
    spec.max_iters = iterations;
    spec.metric = ErrorMetric::L2Both;
    spec.threshold = 1e-14;
    let exp = Experiment::with_reference(spec).map_err(|e| e.to_string())?;
    let rm = exp.run(Method::Reduced).map_err(|e| e.to_string())?;
    let em = exp.run(Method::Extended).map_err(|e| e.to_string())?;
    let pick = |r: &mrcm::IterationReport, m| r.records.iter().map(|x| x.metric(m)).collect();
    Ok(Curves {
        rm_pressure: pick(&rm, ErrorMetric::L2Pressure),
        rm_flux: pick(&rm, ErrorMetric::L2Flux),
        em_pressure: pick(&em, ErrorMetric::L2Pressure),
        em_flux: pick(&em, ErrorMetric::L2Flux),
    })
}

/// Pressure of offline basis function `index` of `subdomain` on its
/// oversampled window; NaN elsewhere.
pub fn basis_function_impl(
    problem: &str,
    seed: u32,
    variance: f64,
    alpha: f64,
    oversampling: usize,
    subdomain: usize,
    index: usize,
) -> Result<FieldView, String> {
    let e = |e: mrcm::Error| e.to_string();
    let (p, (mx, my)) = build(problem, seed, variance)?;
    let d = Decomposition::new(&p.grid, mx, my, oversampling).map_err(e)?;
    let robin = RobinSpec::new(&p.grid, &p.perm, alpha).map_err(e)?;
    let local = LocalSolver::new(&p, &d, &robin, subdomain).map_err(e)?;
    let data = offline_lambdas(&d, subdomain).map_err(e)?;
    let datum = data.get(index).ok_or_else(|| format!("subdomain {subdomain} has {} basis functions", data.len()))?;
    let sol = local.solve(&p, &d, &robin, Some(datum), false).map_err(e)?;
    let mut values = vec![f64::NAN; p.grid.num_cells()];
    for (k, c) in sol.window.cells().enumerate() {
        values[c.i + p.grid.nx * c.j] = sol.pressure[k];
    }
    Ok(FieldView { nx: p.grid.nx, ny: p.grid.ny, values, log_perm: log_perm(&p) })
}

/// Number of offline basis functions of a subdomain.
pub fn basis_count_impl(problem: &str, subdomain: usize) -> Result<usize, String> {
    let (p, (mx, my)) = build(problem, 1, 1.0)?;
    let d = Decomposition::new(&p.grid, mx, my, 0).map_err(|e| e.to_string())?;
    Ok(d.subdomain(subdomain).map_err(|e| e.to_string())?.coarse_faces.len())
}

#[wasm_bindgen]
pub fn fine_pressure(problem: &str, seed: u32, variance: f64) -> Result<FieldView, JsError> {
    fine_pressure_impl(problem, seed, variance).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn error_curves(
    problem: &str,
    seed: u32,
    variance: f64,
    alpha: f64,
    oversampling: usize,
    smoothing: usize,
    iterations: usize,
) -> Result<Curves, JsError> {
    error_curves_impl(problem, seed, variance, alpha, oversampling, smoothing, iterations)
        .map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn basis_function(
    problem: &str,
    seed: u32,
    variance: f64,
    alpha: f64,
    oversampling: usize,
    subdomain: usize,
    index: usize,
) -> Result<FieldView, JsError> {
    basis_function_impl(problem, seed, variance, alpha, oversampling, subdomain, index).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn basis_count(problem: &str, subdomain: usize) -> Result<usize, JsError> {
    basis_count_impl(problem, subdomain).map_err(|e| JsError::new(&e))
}
