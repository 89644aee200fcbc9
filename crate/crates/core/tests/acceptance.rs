//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.
//!
//! The SPE10 criteria read the permeability dump named by `SPE10_PERM`
//! (default `data/spe_perm.dat` at the workspace root).

mod common;

use std::process::ExitCode;
use std::time::Instant;

use common::{dense_oracle, dense_solve, max_abs, max_abs_diff, proxy_problem, random_problem, spe10_path};
use mrcm::decomp::Decomposition;
use mrcm::driver::{reference_solution, ErrorMetric, Experiment, IterationReport, Method, ProblemSpec};
use mrcm::fineop::{assemble, PermField, Problem};
use mrcm::grid::Grid;
use mrcm::io::{dipole_problem, linear_flow_problem, load_spe10, Component};
use mrcm::smooth::Smoother;

type Outcome = Result<String, String>;

fn homogeneous(nx: usize, ny: usize) -> Problem {
    let g = Grid::new(nx, ny, nx as f64 / ny as f64, 1.0).unwrap();
    linear_flow_problem(&g, PermField::uniform(&g, 1.0).unwrap()).unwrap()
}

fn spec(p: &Problem, (mx, my): (usize, usize), alpha: f64, l: usize, k: usize) -> ProblemSpec {
    let mut s = ProblemSpec::new(p.clone(), mx, my);
    s.alpha = alpha;
    s.oversampling = l;
    s.smoothing_steps = k;
    s
}

fn run(s: ProblemSpec, m: Method) -> Result<IterationReport, String> {
    Experiment::with_reference(s).and_then(|e| e.run(m)).map_err(|e| e.to_string())
}

/// Online iterations to reach 1e-7 in `metric`, or `None`.
fn iters(r: &IterationReport, metric: ErrorMetric) -> Option<usize> {
    r.first_below(metric, 1e-7)
}

fn show(n: Option<usize>) -> String {
    n.map_or("-".into(), |v| v.to_string())
}

struct Slices {
    slices: Result<Vec<(usize, Problem)>, String>,
}

impl Slices {
    fn load() -> Self {
        let path = spe10_path();
        if !path.exists() {
            return Self {
                slices: Err(format!("SPE10 permeability file not found at {} (set SPE10_PERM)", path.display())),
            };
        }
        let slices = [42, 84]
            .into_iter()
            .map(|layer| {
                let l = load_spe10(&path, layer, Component::Kx).map_err(|e| e.to_string())?;
                Ok((layer, linear_flow_problem(&l.grid, l.perm).map_err(|e| e.to_string())?))
            })
            .collect();
        Self { slices }
    }

    fn get(&self) -> Result<&[(usize, Problem)], String> {
        self.slices.as_deref().map_err(Clone::clone)
    }
}

fn exactness() -> Outcome {
    let mut detail = Vec::new();
    let mut ok = true;
    for (p, layout) in [(homogeneous(64, 64), (4, 4)), (homogeneous(220, 60), (11, 3))] {
        let t = Instant::now();
        let mut s = spec(&p, layout, 10.0, 2, 4);
        s.max_iters = 0;
        let r = run(s, Method::Reduced)?;
        let secs = t.elapsed().as_secs_f64();
        let rec = &r.records[0];
        ok &= rec.l2_pressure <= 1e-10 && rec.l2_flux <= 1e-10 && secs < 1.0;
        detail.push(format!(
            "{}x{}: p={:.2e} u={:.2e} in {:.2}s",
            layout.0, layout.1, rec.l2_pressure, rec.l2_flux, secs
        ));
    }
    let d = detail.join("; ");
    if ok {
        Ok(d)
    } else {
        Err(d)
    }
}

fn dipole() -> Outcome {
    let t = Instant::now();
    let p = dipole_problem().map_err(|e| e.to_string())?;
    let mut detail = Vec::new();
    let mut ok = true;
    for (k, cap) in [(4, 7), (2, 9)] {
        let mut s = spec(&p, (4, 4), 10.0, 2, k);
        s.metric = ErrorMetric::LinfPressure;
        s.threshold = 1e-12;
        s.max_iters = 20;
        let r = run(s, Method::Extended)?;
        let n = r.records.iter().find(|r| r.linf_pressure <= 1e-12).map(|r| r.iteration);
        ok &= n.is_some_and(|n| n <= cap);
        detail.push(format!("k={k}: {} iterations (cap {cap})", show(n)));
    }
    let secs = t.elapsed().as_secs_f64();
    ok &= secs < 30.0;
    let d = format!("{}; {:.2}s", detail.join(", "), secs);
    if ok {
        Ok(d)
    } else {
        Err(d)
    }
}

fn spe10_fast(slices: &Slices) -> Outcome {
    let mut detail = Vec::new();
    let mut ok = true;
    for (layer, p) in slices.get()? {
        let t = Instant::now();
        let mut s = spec(p, (11, 3), 10.0, 4, 8);
        s.max_iters = 12;
        let r = run(s, Method::Extended)?;
        let n = iters(&r, ErrorMetric::L2Flux);
        let secs = t.elapsed().as_secs_f64();
        ok &= n.is_some_and(|n| n <= 12) && secs < 600.0;
        detail.push(format!("slice {layer}: {} iterations, {:.1}s", show(n), secs));
    }
    let d = detail.join("; ");
    if ok {
        Ok(d)
    } else {
        Err(d)
    }
}

fn alpha_sweep(slices: &Slices) -> Outcome {
    let t = Instant::now();
    let (_, p) = slices.get()?.iter().find(|(l, _)| *l == 84).ok_or("slice 84 missing")?;
    let alphas = [1e-4, 1e-2, 1.0, 10.0, 1e2, 1e4];
    let mut detail = Vec::new();
    let mut ok = true;
    for m in [Method::Reduced, Method::Extended] {
        let mut reports = Vec::new();
        for &a in &alphas {
            let mut s = spec(p, (11, 3), a, 2, 4);
            s.metric = ErrorMetric::L2Both;
            s.max_iters = 100;
            reports.push(run(s, m)?);
        }
        for metric in [ErrorMetric::L2Pressure, ErrorMetric::L2Flux] {
            let counts: Vec<Option<usize>> = reports.iter().map(|r| iters(r, metric)).collect();
            let best = counts.iter().flatten().min().copied();
            let ten = counts[3];
            ok &= matches!((ten, best), (Some(t), Some(b)) if t <= b + 3);
            detail.push(format!(
                "{} {}: [{}]",
                m.name(),
                metric.name(),
                counts.iter().map(|c| show(*c)).collect::<Vec<_>>().join(" ")
            ));
        }
    }
    let secs = t.elapsed().as_secs_f64();
    ok &= secs < 3600.0;
    let d = format!("{}; {:.1}s", detail.join("; "), secs);
    if ok {
        Ok(d)
    } else {
        Err(d)
    }
}

fn study(slices: &Slices, configs: &[(usize, usize)], label: &str, check: fn(&[Option<usize>]) -> bool) -> Outcome {
    let mut detail = Vec::new();
    let mut ok = true;
    for (layer, p) in slices.get()? {
        let reports: Vec<IterationReport> = configs
            .iter()
            .map(|&(l, k)| {
                let mut s = spec(p, (11, 3), 10.0, l, k);
                s.metric = ErrorMetric::L2Both;
                run(s, Method::Extended)
            })
            .collect::<Result<_, _>>()?;
        for metric in [ErrorMetric::L2Pressure, ErrorMetric::L2Flux] {
            let counts: Vec<Option<usize>> = reports.iter().map(|r| iters(r, metric)).collect();
            ok &= check(&counts);
            detail.push(format!(
                "slice {layer} {}: {label} [{}]",
                metric.name(),
                counts.iter().map(|c| show(*c)).collect::<Vec<_>>().join(" ")
            ));
        }
    }
    let d = detail.join("; ");
    if ok {
        Ok(d)
    } else {
        Err(d)
    }
}

fn oversampling(slices: &Slices) -> Outcome {
    study(slices, &[(2, 2), (4, 2)], "l=2,4", |c| matches!((c[0], c[1]), (Some(a), Some(b)) if b < a))
}

fn smoothing(slices: &Slices) -> Outcome {
    study(slices, &[(2, 2), (2, 4), (2, 8)], "k=2,4,8", |c| {
        c.iter().all(Option::is_some) && c.windows(2).all(|w| w[1] <= w[0])
    })
}

fn test_problems(slices: &Slices) -> Vec<(String, Problem, (usize, usize))> {
    let mut v = vec![
        ("homogeneous 64x64".to_string(), homogeneous(64, 64), (4, 4)),
        ("homogeneous 220x60".to_string(), homogeneous(220, 60), (11, 3)),
        ("dipole".to_string(), dipole_problem().unwrap(), (4, 4)),
    ];
    if let Ok(s) = slices.get() {
        v.extend(s.iter().map(|(l, p)| (format!("slice {l}"), p.clone(), (11, 3))));
    }
    v
}

fn system_size(slices: &Slices) -> Outcome {
    let mut ok = true;
    let mut detail = Vec::new();
    let mut problems = test_problems(slices);
    problems.push(("lognormal proxy".to_string(), proxy_problem(2), (11, 3)));
    for (name, p, layout) in problems {
        let mut s = spec(&p, layout, 10.0, 2, 2);
        s.threshold = 1e-300;
        s.max_iters = 2;
        let e = Experiment::with_reference(s).map_err(|e| e.to_string())?;
        let rm = e.run(Method::Reduced).map_err(|e| e.to_string())?;
        let em = e.run(Method::Extended).map_err(|e| e.to_string())?;
        let pairs: Vec<_> = rm.records.iter().zip(&em.records).skip(1).collect();
        ok &= !pairs.is_empty() && pairs.iter().all(|(a, b)| b.system_size == 2 * a.system_size);
        detail.push(format!("{name}: {}/{}", pairs[0].0.system_size, pairs[0].1.system_size));
    }
    if slices.get().is_err() {
        detail.push("SPE10 slices not available".into());
    }
    let d = detail.join("; ");
    if ok {
        Ok(d)
    } else {
        Err(d)
    }
}

fn fine_oracle(slices: &Slices) -> Outcome {
    let mut worst_entry = 0.0_f64;
    let mut worst_solve = 0.0_f64;
    let mut cases = 0;
    for nx in 1..=10 {
        for ny in 1..=10 {
            let p = random_problem((nx * 17 + ny) as u64, nx, ny, 8.0);
            let w = p.grid.window();
            let sys = assemble(&p.grid, &p.perm, w, &p.bc, Some(&p.source)).map_err(|e| e.to_string())?;
            let (a, b) = dense_oracle(&p.grid, &p.perm, w, &p.bc, Some(&p.source));
            let dense = sys.to_dense();
            let n = w.num_cells();
            for r in 0..n {
                for c in 0..n {
                    worst_entry = worst_entry.max((dense[r * n + c] - a[(r, c)]).abs());
                }
            }
            let x = dense_solve(&a, &b);
            let sol = sys.solve().map_err(|e| e.to_string())?;
            worst_solve = worst_solve.max(max_abs_diff(&sol.pressure, x.as_slice()) / max_abs(x.as_slice()).max(1.0));
            cases += 1;
        }
    }
    let mut ok = worst_entry <= 1e-13 && worst_solve <= 1e-11;
    let mut detail = vec![format!("{cases} grids: entry {worst_entry:.1e}, solve {worst_solve:.1e}")];
    let mut problems: Vec<_> = test_problems(slices).into_iter().map(|t| (true, t)).collect();
    // Contrast-1e7 stand-in: reported, not assessed (its residuals sit at
    // the double precision floor of about 2e-11).
    problems.push((false, ("lognormal proxy".to_string(), proxy_problem(2), (11, 3))));
    for (assessed, (name, p, (mx, my))) in problems {
        let fine = reference_solution(&p).map_err(|e| e.to_string())?;
        let cons = fine.conservation_residual(&p.grid, Some(&p.source));
        let d = Decomposition::new(&p.grid, mx, my, 2).map_err(|e| e.to_string())?;
        let smoothed = Smoother::new(&p, &d).and_then(|s| s.smooth_once(&p, &fine)).map_err(|e| e.to_string())?;
        let drift = (max_abs_diff(&smoothed.pressure, &fine.pressure) / max_abs(&fine.pressure))
            .max(max_abs_diff(&smoothed.flux, &fine.flux) / max_abs(&fine.flux));
        if assessed {
            ok &= cons <= 1e-11 && drift <= 1e-11;
        }
        let note = if assessed { "" } else { " (not assessed)" };
        detail.push(format!("{name}: conservation {cons:.1e}, fixed point {drift:.1e}{note}"));
    }
    let d = detail.join("; ");
    if ok {
        Ok(d)
    } else {
        Err(d)
    }
}

fn main() -> ExitCode {
    let slices = Slices::load();
    let criteria: [(&str, Box<dyn Fn() -> Outcome>); 8] = [
        ("exactness on homogeneous linear flow", Box::new(exactness)),
        ("dipole L-infinity convergence", Box::new(dipole)),
        ("SPE10 extended method, l=4 k=8", Box::new(|| spe10_fast(&slices))),
        ("alpha = 10 near-optimal on slice 84", Box::new(|| alpha_sweep(&slices))),
        ("oversampling reduces iterations", Box::new(|| oversampling(&slices))),
        ("smoothing reduces iterations", Box::new(|| smoothing(&slices))),
        ("extended system is twice the reduced one", Box::new(|| system_size(&slices))),
        ("fine operator oracle and invariants", Box::new(|| fine_oracle(&slices))),
    ];
    let mut failed = 0;
    for (n, (name, check)) in criteria.iter().enumerate() {
        let (tag, detail) = match check() {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("{tag} {} {name}: {detail}", n + 1);
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
