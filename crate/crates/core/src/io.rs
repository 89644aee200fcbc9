//! SPE10 permeability ingestion, experiment configuration and CSV reports.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::driver::{ErrorMetric, IterationReport, Method};
use crate::error::{invalid, Error, Result};
use crate::fineop::{BoundaryCondition, BoundarySpec, PermField, Problem, SourceField};
use crate::grid::{CellId, Grid, Side};

/// Cell counts of an SPE10-style dump, in the file's own axes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Spe10Dims {
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
}

impl Spe10Dims {
    pub const MODEL2: Spe10Dims = Spe10Dims { nx: 60, ny: 220, nz: 85 };

    pub fn cells(&self) -> usize {
        self.nx * self.ny * self.nz
    }

    /// Solver grid for one layer: the file's y axis is horizontal, cells are
    /// square with side 1/nx.
    pub fn layer_grid(&self) -> Result<Grid> {
        Grid::new(self.ny, self.nx, self.ny as f64 / self.nx as f64, 1.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Component {
    #[default]
    Kx,
    Ky,
    Kz,
}

impl Component {
    fn block(self) -> usize {
        match self {
            Component::Kx => 0,
            Component::Ky => 1,
            Component::Kz => 2,
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "kx" => Some(Component::Kx),
            "ky" => Some(Component::Ky),
            "kz" => Some(Component::Kz),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Spe10Layer {
    pub layer: usize,
    pub component: Component,
    pub grid: Grid,
    pub perm: PermField,
}

pub fn load_spe10(path: &Path, layer: usize, component: Component) -> Result<Spe10Layer> {
    load_spe10_with(path, layer, component, Spe10Dims::MODEL2)
}

pub fn load_spe10_with(path: &Path, layer: usize, component: Component, dims: Spe10Dims) -> Result<Spe10Layer> {
    parse_spe10(&read_text(path)?, layer, component, dims)
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

/// Extract a 1-based layer from the text of a three-component dump.
pub fn parse_spe10(text: &str, layer: usize, component: Component, dims: Spe10Dims) -> Result<Spe10Layer> {
    if layer == 0 || layer > dims.nz {
        return invalid(format!("layer {layer} outside 1..={}", dims.nz));
    }
    let expected = 3 * dims.cells();
    let mut count = 0;
    let mut values = Vec::with_capacity(dims.nx * dims.ny);
    let first = component.block() * dims.cells() + (layer - 1) * dims.nx * dims.ny;
    let range = first..first + dims.nx * dims.ny;
    for token in text.split_ascii_whitespace() {
        if range.contains(&count) {
            let v: f64 = token.parse().map_err(|_| Error::Parse {
                location: format!("value {}", count + 1),
                detail: format!("not a number: {token:?}"),
            })?;
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Parse {
                    location: format!("value {}", count + 1),
                    detail: format!("permeability must be positive, got {v}"),
                });
            }
            values.push(v);
        }
        count += 1;
    }
    if count != expected {
        return Err(Error::Parse {
            location: "end of file".into(),
            detail: format!("expected {expected} values, found {count}"),
        });
    }
    // File order: x fastest, then y. Solver: i along file y, j along file x.
    let grid = dims.layer_grid()?;
    let mut perm = vec![0.0; grid.num_cells()];
    for y in 0..dims.ny {
        for x in 0..dims.nx {
            perm[y + grid.nx * x] = values[x + dims.nx * y];
        }
    }
    let perm = PermField::new(&grid, perm)?;
    Ok(Spe10Layer { layer, component, grid, perm })
}

/// Write a single-layer dump (all three components equal to `perm`) that
/// [`load_spe10_with`] reads back exactly with `nz = 1`.
pub fn write_spe10_layer(path: &Path, grid: &Grid, perm: &PermField) -> Result<Spe10Dims> {
    let dims = Spe10Dims { nx: grid.ny, ny: grid.nx, nz: 1 };
    let mut out = String::new();
    for _ in 0..3 {
        for y in 0..dims.ny {
            for x in 0..dims.nx {
                writeln!(out, "{:e}", perm.at(CellId { i: y, j: x })).unwrap();
            }
        }
    }
    fs::write(path, out)?;
    Ok(dims)
}

/// Linear flow on the SPE10 domain: pressure 1 on the left, 0 on the right,
/// no flux on top and bottom, no source.
pub fn linear_flow_problem(grid: &Grid, perm: PermField) -> Result<Problem> {
    Problem::new(grid.clone(), perm, BoundarySpec::linear_flow(grid, 1.0, 0.0), SourceField::zeros(grid))
}

/// Homogeneous dipole benchmark on the unit square: 64×64 cells, unit
/// sources of opposite sign in the 1-based cells (13,13) and (32,32),
/// pressure 1/0 left/right and no flux top/bottom. Decompose with 4×4.
pub fn dipole_problem() -> Result<Problem> {
    let n = 64;
    let grid = Grid::new(n, n, 1.0, 1.0)?;
    let h2 = grid.hx * grid.hy;
    let mut f = vec![0.0; grid.num_cells()];
    f[12 + n * 12] = 1.0 / h2;
    f[31 + n * 31] = -1.0 / h2;
    let perm = PermField::uniform(&grid, 1.0)?;
    let bc = BoundarySpec::from_fn(grid.window(), |_, side| match side {
        Side::West => BoundaryCondition::Dirichlet(1.0),
        Side::East => BoundaryCondition::Dirichlet(0.0),
        _ => BoundaryCondition::Neumann(0.0),
    })?;
    Problem::new(grid.clone(), perm, bc, SourceField::new(&grid, f)?)
}

pub const DIPOLE_SUBDOMAINS: (usize, usize) = (4, 4);
pub const SPE10_SUBDOMAINS: (usize, usize) = (11, 3);

#[derive(Clone, Debug, PartialEq)]
pub enum ProblemSelection {
    /// One SPE10 layer from `perm_file`.
    Spe10 { layer: usize },
    Dipole,
    /// Homogeneous linear flow on an `nx × ny` unit-height grid.
    Homogeneous { nx: usize, ny: usize },
    /// Lognormal synthetic field on the SPE10 grid.
    Synthetic { seed: u64, variance: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MethodSelection {
    Reduced,
    Extended,
    Both,
}

impl MethodSelection {
    pub fn methods(self) -> Vec<Method> {
        match self {
            MethodSelection::Reduced => vec![Method::Reduced],
            MethodSelection::Extended => vec![Method::Extended],
            MethodSelection::Both => vec![Method::Reduced, Method::Extended],
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub problem: ProblemSelection,
    pub perm_file: Option<PathBuf>,
    pub component: Component,
    pub subdomains: Option<(usize, usize)>,
    pub alpha: Vec<f64>,
    pub oversampling: Vec<usize>,
    pub smoothing_steps: Vec<usize>,
    pub method: MethodSelection,
    pub threshold: f64,
    pub max_iters: usize,
    pub metric: ErrorMetric,
    pub out: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            problem: ProblemSelection::Spe10 { layer: 84 },
            perm_file: None,
            component: Component::Kx,
            subdomains: None,
            alpha: vec![10.0],
            oversampling: vec![2],
            smoothing_steps: vec![4],
            method: MethodSelection::Extended,
            threshold: 1e-7,
            max_iters: 100,
            metric: ErrorMetric::L2Flux,
            out: None,
        }
    }
}

fn bad(key: &str, value: &str) -> Error {
    Error::Parse { location: format!("key {key:?}"), detail: format!("cannot parse {value:?}") }
}

fn scalar<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value.trim().parse().map_err(|_| bad(key, value))
}

fn list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    let v: Vec<T> = value.split(',').map(|s| scalar(key, s)).collect::<Result<_>>()?;
    if v.is_empty() {
        return Err(bad(key, value));
    }
    Ok(v)
}

/// `a..b` with both ends powers of ten expands to every decade in between;
/// otherwise a comma-separated list.
pub fn parse_alpha_list(value: &str) -> Result<Vec<f64>> {
    let value = value.trim();
    if let Some((a, b)) = value.split_once("..") {
        let lo: f64 = scalar("alpha", a)?;
        let hi: f64 = scalar("alpha", b)?;
        let (ea, eb) = (lo.log10().round(), hi.log10().round());
        if !(lo > 0.0 && hi >= lo && 10f64.powf(ea) == lo && 10f64.powf(eb) == hi) {
            return Err(bad("alpha", value));
        }
        return Ok((ea as i32..=eb as i32).map(|e| format!("1e{e}").parse().unwrap()).collect());
    }
    let v: Vec<f64> = list("alpha", value)?;
    if v.iter().any(|a| !(*a > 0.0 && a.is_finite())) {
        return Err(bad("alpha", value));
    }
    Ok(v)
}

impl ExperimentConfig {
    /// Set one key. Keys use underscores or dashes interchangeably.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let k = key.trim().replace('-', "_");
        let v = value.trim();
        match k.as_str() {
            "problem" => {
                self.problem = match v {
                    "spe10" => ProblemSelection::Spe10 { layer: self.layer().unwrap_or(84) },
                    "dipole" => ProblemSelection::Dipole,
                    "homogeneous" => ProblemSelection::Homogeneous { nx: 64, ny: 64 },
                    "synthetic" => ProblemSelection::Synthetic { seed: 1, variance: 4.0 },
                    _ => return Err(bad(&k, v)),
                }
            }
            "layer" => {
                let layer: usize = scalar(&k, v)?;
                if layer == 0 {
                    return Err(bad(&k, v));
                }
                self.problem = ProblemSelection::Spe10 { layer };
            }
            "perm_file" => self.perm_file = Some(PathBuf::from(v)),
            "component" => self.component = Component::parse(v).ok_or_else(|| bad(&k, v))?,
            "subdomains" => {
                let (a, b) = v.split_once('x').ok_or_else(|| bad(&k, v))?;
                self.subdomains = Some((scalar(&k, a)?, scalar(&k, b)?));
            }
            "grid" => {
                let (a, b) = v.split_once('x').ok_or_else(|| bad(&k, v))?;
                self.problem = ProblemSelection::Homogeneous { nx: scalar(&k, a)?, ny: scalar(&k, b)? };
            }
            "seed" | "variance" => {
                let (mut seed, mut variance) = match self.problem {
                    ProblemSelection::Synthetic { seed, variance } => (seed, variance),
                    _ => (1, 4.0),
                };
                if k == "seed" {
                    seed = scalar(&k, v)?;
                } else {
                    variance = scalar(&k, v)?;
                }
                self.problem = ProblemSelection::Synthetic { seed, variance };
            }
            "alpha" => self.alpha = parse_alpha_list(v)?,
            "oversampling" | "l" => self.oversampling = list(&k, v)?,
            "smoothing_steps" | "k" => self.smoothing_steps = list(&k, v)?,
            "method" => {
                self.method = match v.to_ascii_lowercase().as_str() {
                    "rm" | "reduced" => MethodSelection::Reduced,
                    "em" | "extended" => MethodSelection::Extended,
                    "both" => MethodSelection::Both,
                    _ => return Err(bad(&k, v)),
                }
            }
            "threshold" => {
                let t: f64 = scalar(&k, v)?;
                if !(t > 0.0) {
                    return Err(bad(&k, v));
                }
                self.threshold = t;
            }
            "max_iters" | "max" => self.max_iters = scalar(&k, v)?,
            "metric" => self.metric = ErrorMetric::parse(v).ok_or_else(|| bad(&k, v))?,
            "out" => self.out = Some(PathBuf::from(v)),
            _ => return Err(Error::Parse { location: format!("key {k:?}"), detail: "unknown key".into() }),
        }
        Ok(())
    }

    fn layer(&self) -> Option<usize> {
        match self.problem {
            ProblemSelection::Spe10 { layer } => Some(layer),
            _ => None,
        }
    }

    /// Parse `key = value` lines over the defaults; `#` starts a comment.
    pub fn parse_str(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        cfg.apply_str(text)?;
        Ok(cfg)
    }

    /// Apply `key = value` lines on top of the current values.
    pub fn apply_str(&mut self, text: &str) -> Result<()> {
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
                location: format!("line {}", n + 1),
                detail: "expected key = value".into(),
            })?;
            self.set(k, v).map_err(|e| match e {
                Error::Parse { location, detail } => {
                    Error::Parse { location: format!("line {}, {location}", n + 1), detail }
                }
                e => e,
            })?;
        }
        Ok(())
    }

    /// Problem instance and default decomposition for the selection.
    pub fn build_problem(&self) -> Result<(Problem, (usize, usize))> {
        let (problem, layout) = match &self.problem {
            ProblemSelection::Spe10 { layer } => {
                let path = self
                    .perm_file
                    .as_deref()
                    .ok_or_else(|| Error::InvalidArgument("SPE10 problem needs a permeability file".into()))?;
                let l = load_spe10(path, *layer, self.component)?;
                (linear_flow_problem(&l.grid, l.perm)?, SPE10_SUBDOMAINS)
            }
            ProblemSelection::Dipole => (dipole_problem()?, DIPOLE_SUBDOMAINS),
            ProblemSelection::Homogeneous { nx, ny } => {
                let g = Grid::new(*nx, *ny, *nx as f64 / *ny as f64, 1.0)?;
                let perm = PermField::uniform(&g, 1.0)?;
                (linear_flow_problem(&g, perm)?, (4, 4))
            }
            ProblemSelection::Synthetic { seed, variance } => {
                let g = Spe10Dims::MODEL2.layer_grid()?;
                let perm = crate::synth::lognormal(&g, *seed, *variance, 4.0)?;
                (linear_flow_problem(&g, perm)?, SPE10_SUBDOMAINS)
            }
        };
        Ok((problem, self.subdomains.unwrap_or(layout)))
    }
}

/// Read a config file (if any), then apply flag overrides in order.
pub fn load_config(path: Option<&Path>, overrides: &[(&str, String)]) -> Result<ExperimentConfig> {
    load_config_over(ExperimentConfig::default(), path, overrides)
}

/// As [`load_config`], starting from `base` instead of the defaults.
pub fn load_config_over(
    base: ExperimentConfig,
    path: Option<&Path>,
    overrides: &[(&str, String)],
) -> Result<ExperimentConfig> {
    let mut cfg = base;
    if let Some(p) = path {
        cfg.apply_str(&read_text(p)?)?;
    }
    for (k, v) in overrides {
        cfg.set(k, v)?;
    }
    Ok(cfg)
}

pub const CSV_HEADER: [&str; 9] =
    ["method", "alpha", "l", "k", "iteration", "l2_pressure", "l2_flux", "linf_pressure", "status"];

fn sci(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_reports<W: std::io::Write>(reports: &[IterationReport], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in reports {
        for rec in &r.records {
            w.write_record([
                r.method.name().to_string(),
                sci(r.alpha),
                r.oversampling.to_string(),
                r.smoothing_steps.to_string(),
                rec.iteration.to_string(),
                sci(rec.l2_pressure),
                sci(rec.l2_flux),
                sci(rec.linf_pressure),
                r.status.name().to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_report(reports: &[IterationReport], path: &Path) -> Result<()> {
    let mut buf = Vec::new();
    write_reports(reports, &mut buf)?;
    fs::write(path, buf)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_shorthand() {
        let a = parse_alpha_list("1e-8..1e8").unwrap();
        assert_eq!(a.len(), 17);
        assert_eq!(a[0], 1e-8);
        assert_eq!(a[8], 1.0);
        assert_eq!(a[16], 1e8);
        assert_eq!(parse_alpha_list("1, 10").unwrap(), vec![1.0, 10.0]);
        assert!(parse_alpha_list("3..1e2").is_err());
        assert!(parse_alpha_list("-1").is_err());
    }

    #[test]
    fn dipole_source_sums_to_zero() {
        let p = dipole_problem().unwrap();
        let v = p.grid.cell_volume();
        let s: f64 = p.source.values().iter().map(|f| f * v).sum();
        assert_eq!(s, 0.0);
        assert_eq!(p.source.at(CellId { i: 12, j: 12 }) * v, 1.0);
    }

    #[test]
    fn tiny_dump_orientation() {
        let dims = Spe10Dims { nx: 2, ny: 3, nz: 2 };
        // value = 1 + x + 10 y + 100 z + 1000 block
        let mut text = String::new();
        for b in 0..3 {
            for z in 0..2 {
                for y in 0..3 {
                    for x in 0..2 {
                        text += &format!("{} ", 1 + x + 10 * y + 100 * z + 1000 * b);
                    }
                }
            }
        }
        let l = parse_spe10(&text, 2, Component::Ky, dims).unwrap();
        assert_eq!((l.grid.nx, l.grid.ny), (3, 2));
        assert_eq!(l.grid.hx, l.grid.hy);
        assert_eq!(l.perm.at(CellId { i: 2, j: 1 }), (1 + 1 + 20 + 100 + 1000) as f64);
        assert!(parse_spe10(&text, 3, Component::Kx, dims).is_err());
        assert!(parse_spe10(&text[..text.len() - 6], 1, Component::Kx, dims).is_err());
    }
}
