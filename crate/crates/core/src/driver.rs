//! Offline-online iteration: the Reduced Method and the Extended Method.
//!
//! Both share the offline stage (piecewise constant data, constant coarse
//! test space, interface solve, reconstruction, smoothing). Online, the
//! Reduced Method replaces the basis with informed functions built from the
//! latest smoothed field; the Extended Method keeps the offline functions,
//! appends the informed ones, and couples with linear coarse test functions.

use crate::basis::{
    build_basis_set, informed_lambdas, offline_lambdas, particular_solution, BasisKind, LocalSolver, MultiscaleBasis,
    RobinSpec,
};
use crate::decomp::Decomposition;
use crate::error::{invalid, Error, Result};
use crate::fineop::{solve_global, FlowField, Problem};
use crate::grid::Grid;
use crate::mrcm::{assemble_interface, reconstruct, solve_interface, CoarseSpace, SubdomainBases};
use crate::smooth::Smoother;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ErrorMetric {
    L2Pressure,
    L2Flux,
    LinfPressure,
    /// Larger of the two relative L2 errors.
    L2Both,
    /// Relative change of the coefficient vector; needs no reference.
    CoefficientChange,
}

impl ErrorMetric {
    pub fn name(self) -> &'static str {
        match self {
            ErrorMetric::L2Pressure => "l2-pressure",
            ErrorMetric::L2Flux => "l2-flux",
            ErrorMetric::LinfPressure => "linf-pressure",
            ErrorMetric::L2Both => "l2-both",
            ErrorMetric::CoefficientChange => "coefficient-change",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [Self::L2Pressure, Self::L2Flux, Self::LinfPressure, Self::L2Both, Self::CoefficientChange]
            .into_iter()
            .find(|m| m.name() == s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    Reduced,
    Extended,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Reduced => "RM",
            Method::Extended => "EM",
        }
    }
}

#[derive(Clone, Debug)]
pub struct ProblemSpec {
    pub problem: Problem,
    pub mx: usize,
    pub my: usize,
    pub oversampling: usize,
    pub alpha: f64,
    pub smoothing_steps: usize,
    pub max_iters: usize,
    pub threshold: f64,
    pub metric: ErrorMetric,
}

impl ProblemSpec {
    /// Paper-default knobs (α = 10, two oversampling layers, four smoothing
    /// steps, threshold 1e-7, at most 100 iterations, flux metric).
    pub fn new(problem: Problem, mx: usize, my: usize) -> Self {
        Self {
            problem,
            mx,
            my,
            oversampling: 2,
            alpha: 10.0,
            smoothing_steps: 4,
            max_iters: 100,
            threshold: 1e-7,
            metric: ErrorMetric::L2Flux,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.threshold > 0.0) {
            return invalid(format!("threshold must be positive, got {}", self.threshold));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return invalid(format!("alpha must be positive, got {}", self.alpha));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    pub l2_pressure: f64,
    pub l2_flux: f64,
    pub linf_pressure: f64,
    pub coefficient_change: f64,
    pub system_size: usize,
    pub wall_time: f64,
}

impl IterationRecord {
    pub fn metric(&self, m: ErrorMetric) -> f64 {
        match m {
            ErrorMetric::L2Pressure => self.l2_pressure,
            ErrorMetric::L2Flux => self.l2_flux,
            ErrorMetric::LinfPressure => self.linf_pressure,
            ErrorMetric::L2Both => self.l2_pressure.max(self.l2_flux),
            ErrorMetric::CoefficientChange => self.coefficient_change,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Converged,
    MaxIterations,
    SingularSystem,
    Diverged,
}

impl Status {
    pub fn name(self) -> &'static str {
        match self {
            Status::Converged => "converged",
            Status::MaxIterations => "max-iterations",
            Status::SingularSystem => "singular-system",
            Status::Diverged => "diverged",
        }
    }
}

#[derive(Clone, Debug)]
pub struct IterationReport {
    pub method: Method,
    pub alpha: f64,
    pub oversampling: usize,
    pub smoothing_steps: usize,
    pub records: Vec<IterationRecord>,
    pub status: Status,
    pub field: FlowField,
}

impl IterationReport {
    /// First iteration whose `metric` is below `threshold`.
    pub fn first_below(&self, metric: ErrorMetric, threshold: f64) -> Option<usize> {
        self.records.iter().find(|r| r.metric(metric) < threshold).map(|r| r.iteration)
    }
}

pub fn reference_solution(problem: &Problem) -> Result<FlowField> {
    solve_global(problem)
}

/// Relative error of `field` against `reference`: volume-weighted L2 over
/// cell pressures, area-weighted L2 over face velocities, or the max-norm
/// over cell pressures.
pub fn relative_error(grid: &Grid, field: &FlowField, reference: &FlowField, metric: ErrorMetric) -> Result<f64> {
    if field.window != reference.window {
        return invalid("field and reference live on different windows");
    }
    let (num, den) = match metric {
        ErrorMetric::L2Pressure => {
            let v = grid.cell_volume();
            let n: f64 = field.pressure.iter().zip(&reference.pressure).map(|(a, b)| v * (a - b).powi(2)).sum();
            let d: f64 = reference.pressure.iter().map(|b| v * b * b).sum();
            (n.sqrt(), d.sqrt())
        }
        ErrorMetric::L2Flux => {
            let (mut n, mut d) = (0.0, 0.0);
            for (k, f) in field.window.faces().enumerate() {
                let a = grid.face_area(f.axis);
                n += a * (field.flux[k] - reference.flux[k]).powi(2);
                d += a * reference.flux[k].powi(2);
            }
            (n.sqrt(), d.sqrt())
        }
        ErrorMetric::LinfPressure => {
            let n = field.pressure.iter().zip(&reference.pressure).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
            let d = reference.pressure.iter().fold(0.0_f64, |m, b| m.max(b.abs()));
            (n, d)
        }
        ErrorMetric::L2Both => {
            let p = relative_error(grid, field, reference, ErrorMetric::L2Pressure)?;
            let f = relative_error(grid, field, reference, ErrorMetric::L2Flux)?;
            return Ok(p.max(f));
        }
        ErrorMetric::CoefficientChange => return invalid("coefficient change is not a field error"),
    };
    if den == 0.0 {
        return invalid(format!("reference has zero {} norm", metric.name()));
    }
    Ok(num / den)
}

/// Metric values above this abort the run as diverged.
pub const DIVERGENCE_LIMIT: f64 = 1e3;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StopDecision {
    Continue,
    Stop(Status),
}

pub fn stopping_check(records: &[IterationRecord], spec: &ProblemSpec) -> StopDecision {
    let Some(last) = records.last() else {
        return StopDecision::Continue;
    };
    let value = last.metric(spec.metric);
    if value < spec.threshold {
        return StopDecision::Stop(Status::Converged);
    }
    if spec.metric != ErrorMetric::CoefficientChange && value > DIVERGENCE_LIMIT {
        return StopDecision::Stop(Status::Diverged);
    }
    if last.iteration >= spec.max_iters {
        return StopDecision::Stop(Status::MaxIterations);
    }
    StopDecision::Continue
}

fn par_map<T, F>(n: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

#[derive(Clone, Copy)]
struct Clock(#[cfg(not(target_arch = "wasm32"))] std::time::Instant);

impl Clock {
    fn start() -> Self {
        #[cfg(not(target_arch = "wasm32"))]
        {
            Clock(std::time::Instant::now())
        }
        #[cfg(target_arch = "wasm32")]
        {
            Clock()
        }
    }

    fn seconds(&self) -> f64 {
        #[cfg(not(target_arch = "wasm32"))]
        {
            self.0.elapsed().as_secs_f64()
        }
        #[cfg(target_arch = "wasm32")]
        {
            0.0
        }
    }
}

/// Everything that is fixed across the iterations of one specification:
/// decomposition, Robin resistances, factored local operators, smoother,
/// particular solutions and offline basis functions.
pub struct Experiment {
    pub spec: ProblemSpec,
    pub decomp: Decomposition,
    pub robin: RobinSpec,
    locals: Vec<LocalSolver>,
    smoother: Smoother,
    particulars: Vec<MultiscaleBasis>,
    offline: Vec<Vec<MultiscaleBasis>>,
    reference: Option<FlowField>,
}

struct Stage {
    field: FlowField,
    coefficients: Vec<f64>,
    system_size: usize,
}

impl Experiment {
    /// Build the offline data. A reference field enables the error metrics;
    /// without one only [`ErrorMetric::CoefficientChange`] is meaningful.
    pub fn new(spec: ProblemSpec, reference: Option<FlowField>) -> Result<Self> {
        spec.validate()?;
        let p = &spec.problem;
        if let Some(r) = &reference {
            if r.window != p.grid.window() {
                return invalid("reference field does not match the grid");
            }
        } else if spec.metric != ErrorMetric::CoefficientChange {
            return invalid(format!("metric {} needs a reference solution", spec.metric.name()));
        }
        let decomp = Decomposition::new(&p.grid, spec.mx, spec.my, spec.oversampling)?;
        let robin = RobinSpec::new(&p.grid, &p.perm, spec.alpha)?;
        let locals = par_map(decomp.num_subdomains(), |i| LocalSolver::new(p, &decomp, &robin, i))?;
        let particulars = par_map(decomp.num_subdomains(), |i| particular_solution(p, &decomp, &robin, &locals[i]))?;
        let offline = par_map(decomp.num_subdomains(), |i| {
            build_basis_set(p, &decomp, &robin, &locals[i], &offline_lambdas(&decomp, i)?, BasisKind::Offline)
        })?;
        let smoother = Smoother::new(p, &decomp)?;
        Ok(Self { spec, decomp, robin, locals, smoother, particulars, offline, reference })
    }

    /// Convenience constructor that computes the fine reference first.
    pub fn with_reference(spec: ProblemSpec) -> Result<Self> {
        let reference = reference_solution(&spec.problem)?;
        Self::new(spec, Some(reference))
    }

    pub fn reference(&self) -> Option<&FlowField> {
        self.reference.as_ref()
    }

    fn informed(&self, current: &FlowField) -> Result<Vec<Vec<MultiscaleBasis>>> {
        let p = &self.spec.problem;
        par_map(self.decomp.num_subdomains(), |i| {
            let data = informed_lambdas(&self.decomp, &p.perm, &self.robin, i, current)?;
            build_basis_set(p, &self.decomp, &self.robin, &self.locals[i], &data, BasisKind::Informed)
        })
    }

    /// Interface solve, reconstruction and smoothing for one basis family.
    fn stage(&self, bases: Vec<Vec<MultiscaleBasis>>, coarse: CoarseSpace, iteration: usize) -> Result<Stage> {
        let sets: Vec<SubdomainBases> = bases
            .into_iter()
            .zip(&self.particulars)
            .map(|(bases, part)| SubdomainBases { particular: part.clone(), bases })
            .collect();
        let system = assemble_interface(&self.decomp, &sets, &coarse)?;
        let coefficients = solve_interface(&system, iteration)?;
        let ms = reconstruct(&self.decomp, &sets, &coefficients)?;
        let field = self.smoother.smooth(&self.spec.problem, &ms.field, self.spec.smoothing_steps)?;
        Ok(Stage { field, coefficients, system_size: system.size() })
    }

    fn record(&self, iteration: usize, stage: &Stage, previous: Option<&[f64]>, clock: Clock) -> Result<IterationRecord> {
        let grid = &self.spec.problem.grid;
        let err = |m| match &self.reference {
            Some(r) => relative_error(grid, &stage.field, r, m),
            None => Ok(f64::NAN),
        };
        let coefficient_change = match previous {
            Some(prev) if prev.len() == stage.coefficients.len() => {
                let d: f64 = prev.iter().zip(&stage.coefficients).map(|(a, b)| (a - b).powi(2)).sum();
                let n: f64 = stage.coefficients.iter().map(|b| b * b).sum();
                if n > 0.0 {
                    (d / n).sqrt()
                } else {
                    d.sqrt()
                }
            }
            _ => f64::INFINITY,
        };
        Ok(IterationRecord {
            iteration,
            l2_pressure: err(ErrorMetric::L2Pressure)?,
            l2_flux: err(ErrorMetric::L2Flux)?,
            linf_pressure: err(ErrorMetric::LinfPressure)?,
            coefficient_change,
            system_size: stage.system_size,
            wall_time: clock.seconds(),
        })
    }

    pub fn run(&self, method: Method) -> Result<IterationReport> {
        let mut records = Vec::new();
        let finish = |records: Vec<IterationRecord>, status, field| IterationReport {
            method,
            alpha: self.spec.alpha,
            oversampling: self.spec.oversampling,
            smoothing_steps: self.spec.smoothing_steps,
            records,
            status,
            field,
        };

        let clock = Clock::start();
        let mut stage = match self.stage(self.offline.clone(), CoarseSpace::CONSTANT, 0) {
            Ok(s) => s,
            Err(Error::SingularInterface { .. }) => {
                return Ok(finish(records, Status::SingularSystem, FlowField::zeros(self.spec.problem.grid.window())))
            }
            Err(e) => return Err(e),
        };
        records.push(self.record(0, &stage, None, clock)?);

        for iteration in 1.. {
            if let StopDecision::Stop(status) = stopping_check(&records, &self.spec) {
                return Ok(finish(records, status, stage.field));
            }
            let clock = Clock::start();
            let informed = self.informed(&stage.field)?;
            let (bases, coarse) = match method {
                Method::Reduced => (informed, CoarseSpace::CONSTANT),
                Method::Extended => {
                    let augmented = self
                        .offline
                        .iter()
                        .zip(informed)
                        .map(|(off, inf)| off.iter().cloned().chain(inf).collect())
                        .collect();
                    (augmented, CoarseSpace::LINEAR)
                }
            };
            let next = match self.stage(bases, coarse, iteration) {
                Ok(s) => s,
                Err(Error::SingularInterface { .. }) => {
                    return Ok(finish(records, Status::SingularSystem, stage.field));
                }
                Err(e) => return Err(e),
            };
            records.push(self.record(iteration, &next, Some(&stage.coefficients), clock)?);
            stage = next;
        }
        unreachable!()
    }
}

pub fn run_reduced(spec: &ProblemSpec) -> Result<IterationReport> {
    Experiment::with_reference(spec.clone())?.run(Method::Reduced)
}

pub fn run_extended(spec: &ProblemSpec) -> Result<IterationReport> {
    Experiment::with_reference(spec.clone())?.run(Method::Extended)
}
