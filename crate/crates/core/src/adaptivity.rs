//! Dörfler marking and the solve–estimate–mark–refine loop.

use std::io::Write;
use std::sync::Arc;
use std::time::Instant;

use crate::benchmarks::{error_norms, ProblemKind, ProblemSpec};
use crate::error::{Error, Result};
use crate::estimators::{estimate_biharmonic, estimate_vk, EstimatorBreakdown};
use crate::forms::{assemble_vk_load, Integration, RhsVariant};
use crate::mesh::Triangulation;
use crate::morley_space::{MorleyFunction, MorleySpace};
use crate::solvers::{solve_biharmonic, solve_vk_newton, NewtonOptions, NewtonTrace};

/// Minimal set of triangles whose indicators sum to at least `theta` times
/// the total, chosen greedily by decreasing indicator (ties by id).
///
/// `indicators` are the squared local estimators η(T)². The result is sorted
/// by triangle id.
pub fn dorfler_mark(indicators: &[f64], theta: f64) -> Result<Vec<usize>> {
    if !(theta > 0.0 && theta <= 1.0) {
        return Err(Error::InvalidParameter(format!("theta must lie in (0, 1], got {theta}")));
    }
    if let Some(t) = indicators.iter().position(|v| !(*v >= 0.0 && v.is_finite())) {
        return Err(Error::InvalidParameter(format!("indicator of triangle {t} is {}", indicators[t])));
    }
    let mut order: Vec<usize> = (0..indicators.len()).collect();
    order.sort_by(|&a, &b| indicators[b].total_cmp(&indicators[a]).then(a.cmp(&b)));
    // summing in greedy order makes the last partial sum equal the total
    let total: f64 = order.iter().map(|&t| indicators[t]).sum();
    if total == 0.0 {
        return Err(Error::ZeroIndicators);
    }
    let goal = theta * total;
    let mut sum = 0.0;
    let mut marked = Vec::new();
    for &t in &order {
        if sum >= goal {
            break;
        }
        sum += indicators[t];
        marked.push(t);
    }
    marked.sort_unstable();
    Ok(marked)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    Uniform,
    #[default]
    Adaptive,
}

impl std::str::FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(Mode::Uniform),
            "adaptive" => Ok(Mode::Adaptive),
            _ => Err(Error::InvalidParameter(format!("unknown mode '{s}' (expected uniform or adaptive)"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct AfemOptions {
    pub theta: f64,
    /// Meshes with more free dofs than this are not solved.
    pub max_ndof: usize,
    pub mode: Mode,
    pub quad_degree: usize,
    pub newton: NewtonOptions,
    pub rhs_variant: RhsVariant,
    /// Start Newton from the previous level's solution instead of the linear guess.
    pub warm_start: bool,
}

impl Default for AfemOptions {
    fn default() -> Self {
        Self {
            theta: 0.25,
            max_ndof: 20_000,
            mode: Mode::Adaptive,
            quad_degree: 4,
            newton: NewtonOptions::default(),
            rhs_variant: RhsVariant::Morley,
            warm_start: false,
        }
    }
}

/// One row of a run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LevelRecord {
    pub level: usize,
    pub ndof: usize,
    pub err_energy: Option<f64>,
    pub err_h1_ih: Option<f64>,
    pub eta: f64,
    pub mu_nc: f64,
    pub mu_ih: f64,
    pub eta_f: f64,
    pub eta_1: f64,
    pub eta_2: f64,
    pub osc: f64,
    pub marked: usize,
    pub newton_iters: Option<usize>,
    pub final_residual: Option<f64>,
    pub seconds: f64,
    pub num_triangles: usize,
    pub min_diameter: f64,
}

impl LevelRecord {
    /// Sum of the two error components, if known.
    pub fn total_error(&self) -> Option<f64> {
        Some(self.err_energy? + self.err_h1_ih?)
    }
}

pub const CSV_HEADER: [&str; 13] = [
    "level",
    "ndof",
    "err_energy",
    "err_h1_ih",
    "eta",
    "mu_nc",
    "mu_ih",
    "eta_f",
    "eta_1",
    "eta_2",
    "marked",
    "newton_iters",
    "seconds",
];

#[derive(Debug, Clone, Default)]
pub struct RunRecord {
    pub label: String,
    pub levels: Vec<LevelRecord>,
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl RunRecord {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(CSV_HEADER)?;
        for r in &self.levels {
            w.write_record([
                r.level.to_string(),
                r.ndof.to_string(),
                opt(r.err_energy.map(|v| format!("{v:.10e}"))),
                opt(r.err_h1_ih.map(|v| format!("{v:.10e}"))),
                format!("{:.10e}", r.eta),
                format!("{:.10e}", r.mu_nc),
                format!("{:.10e}", r.mu_ih),
                format!("{:.10e}", r.eta_f),
                format!("{:.10e}", r.eta_1),
                format!("{:.10e}", r.eta_2),
                r.marked.to_string(),
                opt(r.newton_iters),
                format!("{:.3}", r.seconds),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Newton summary per level: `level,newton_iters,final_residual`.
    pub fn write_newton_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["level", "newton_iters", "final_residual"])?;
        for r in self.levels.iter().filter(|r| r.newton_iters.is_some()) {
            w.write_record([
                r.level.to_string(),
                opt(r.newton_iters),
                opt(r.final_residual.map(|v| format!("{v:.3e}"))),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Discrete solution on one level.
#[derive(Debug, Clone)]
pub enum Solution {
    Biharmonic(MorleyFunction),
    VonKarman {
        psi1: MorleyFunction,
        psi2: MorleyFunction,
        trace: NewtonTrace,
    },
}

/// Everything known about a level once it has been estimated and marked.
pub struct LevelState<'a> {
    pub record: &'a LevelRecord,
    pub mesh: &'a Triangulation,
    pub solution: &'a Solution,
    pub estimator: &'a EstimatorBreakdown,
    pub marked: &'a [usize],
}

/// Result of [`afem_loop`]: the rows computed so far and the error that
/// stopped the loop, if any.
#[derive(Debug)]
pub struct RunOutcome {
    pub record: RunRecord,
    pub error: Option<Error>,
}

impl RunOutcome {
    pub fn into_result(self) -> Result<RunRecord> {
        match self.error {
            None => Ok(self.record),
            Some(e) => Err(e),
        }
    }
}

/// Evaluates `u` on a refined mesh: dofs are read off the parent triangle's
/// polynomial (vertex values, normal derivatives at face midpoints), then
/// projected onto M_0.
pub fn transfer(u: &MorleyFunction, parent: &[usize], space: &Arc<MorleySpace>) -> MorleyFunction {
    let mesh = space.mesh();
    let mut coeffs = vec![0.0; space.ndof()];
    for t in 0..mesh.num_triangles() {
        let p = parent[t];
        for v in mesh.triangle(t) {
            coeffs[space.vertex_dof(v)] = u.local_jet(p, mesh.vertex(v)).0;
        }
    }
    for f in 0..mesh.num_faces() {
        let p = parent[mesh.face(f).plus];
        let g = u.local_jet(p, mesh.face_midpoint(f)).1;
        let nu = mesh.face_normal(f);
        coeffs[space.face_dof(f)] = g[0] * nu[0] + g[1] * nu[1];
    }
    let mut out = MorleyFunction::from_coeffs(space.clone(), coeffs).expect("length matches");
    out.restrict_to_m0();
    out
}

/// Runs SOLVE → ESTIMATE → MARK → REFINE until the next mesh would exceed
/// `max_ndof` free dofs. `observer` sees every completed level.
pub fn afem_loop(problem: &ProblemSpec, opts: &AfemOptions, mut observer: impl FnMut(&LevelState<'_>)) -> RunOutcome {
    let mut record = RunRecord {
        label: problem.label.clone(),
        levels: Vec::new(),
    };
    match run_levels(problem, opts, &mut record, &mut observer) {
        Ok(()) => RunOutcome { record, error: None },
        Err(e) => RunOutcome { record, error: Some(e) },
    }
}

fn run_levels(
    problem: &ProblemSpec,
    opts: &AfemOptions,
    record: &mut RunRecord,
    observer: &mut impl FnMut(&LevelState<'_>),
) -> Result<()> {
    if !(opts.theta > 0.0 && opts.theta <= 1.0) {
        return Err(Error::InvalidParameter(format!("theta must lie in (0, 1], got {}", opts.theta)));
    }
    let integration = Integration::new(opts.quad_degree, problem.singularity);
    let error_integration = Integration::new(opts.quad_degree.max(8), problem.singularity);
    let mut mesh = problem.initial_mesh.clone();
    let mut previous: Option<(Solution, Vec<usize>)> = None;
    for level in 0.. {
        let start = Instant::now();
        let space = Arc::new(MorleySpace::new(Arc::new(mesh.clone())));
        let ndof = space.num_free();
        if ndof > opts.max_ndof {
            if level == 0 {
                return Err(Error::InvalidParameter(format!(
                    "max_ndof {} is below the initial NDOF {ndof}",
                    opts.max_ndof
                )));
            }
            break;
        }
        let mut row = LevelRecord {
            level,
            ndof,
            num_triangles: mesh.num_triangles(),
            min_diameter: mesh.min_diameter(),
            ..Default::default()
        };
        let (solution, estimator) = match &problem.kind {
            ProblemKind::Biharmonic { eps, load } => {
                let u = solve_biharmonic(&space, *eps, load.as_ref(), &integration)?;
                let est = estimate_biharmonic(&u, *eps, load.as_ref(), &integration)?;
                if let Some(exact) = &problem.exact {
                    let e = error_norms(&[&u], exact, Some(*eps), &error_integration)?;
                    row.err_energy = Some(e.energy);
                    row.err_h1_ih = Some(e.h1_ih);
                }
                (Solution::Biharmonic(u), est)
            }
            ProblemKind::VonKarman { loads } => {
                let load = assemble_vk_load(&space, loads[0].as_ref(), loads[1].as_ref(), &integration, opts.rhs_variant);
                let initial = match (&previous, opts.warm_start) {
                    (Some((Solution::VonKarman { psi1, psi2, .. }, parent)), true) => {
                        Some((transfer(psi1, parent, &space), transfer(psi2, parent, &space)))
                    }
                    _ => None,
                };
                let sol = solve_vk_newton(&space, &load, initial, &opts.newton)?;
                let est = estimate_vk(&sol.psi1, &sol.psi2, [loads[0].as_ref(), loads[1].as_ref()], &integration)?;
                if let Some(exact) = &problem.exact {
                    let e = error_norms(&[&sol.psi1, &sol.psi2], exact, None, &error_integration)?;
                    row.err_energy = Some(e.energy);
                    row.err_h1_ih = Some(e.h1_ih);
                }
                row.newton_iters = Some(sol.trace.iterations);
                row.final_residual = Some(sol.trace.final_residual());
                (
                    Solution::VonKarman {
                        psi1: sol.psi1,
                        psi2: sol.psi2,
                        trace: sol.trace,
                    },
                    est,
                )
            }
        };
        let totals = estimator.totals();
        row.eta = totals.eta;
        row.mu_nc = totals.mu_nc;
        row.mu_ih = totals.mu_ih;
        row.eta_f = totals.eta_f;
        row.eta_1 = totals.eta_1;
        row.eta_2 = totals.eta_2;
        row.osc = totals.osc;
        let marked = match opts.mode {
            Mode::Uniform => (0..mesh.num_triangles()).collect(),
            Mode::Adaptive => dorfler_mark(&estimator.indicators(), opts.theta)?,
        };
        row.marked = marked.len();
        let refinement = match opts.mode {
            Mode::Uniform => mesh.uniform_refine(),
            Mode::Adaptive => mesh.refine(&marked),
        };
        row.seconds = start.elapsed().as_secs_f64();
        log::info!(
            "{} level {level}: ndof {ndof}, eta {:.4e}, error {:?}",
            record.label,
            row.eta,
            row.total_error()
        );
        observer(&LevelState {
            record: &row,
            mesh: &mesh,
            solution: &solution,
            estimator: &estimator,
            marked: &marked,
        });
        record.levels.push(row);
        mesh = refinement.mesh;
        previous = Some((solution, refinement.parent));
    }
    Ok(())
}
