use super::config::{Mode, SimulationConfig};
use crate::adaptivity::{coarsen, mark_max, mark_min, project_l2, refine, transfer_refine, DiscreteField};
use crate::assembly::{assemble, sample_field, Geometry, HeatSource, Material, SystemMatrices};
use crate::error::{Error, Result};
use crate::hierarchy::HierarchicalSpace;
use crate::solver::{backward_euler_step, estimate, Energies, Estimate, SolverOptions, StateVector};
use crate::spline::TensorSpace;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

/// Data shared by every solve of a run.
#[derive(Clone, Debug)]
pub struct StepContext {
    pub material: Material,
    pub source: HeatSource,
    pub geometry: Geometry,
    pub n_gauss: usize,
    pub solver: SolverOptions,
    pub dt: f64,
    pub alpha_r: f64,
    pub m: usize,
    pub tol: f64,
}

impl StepContext {
    pub fn from_config(cfg: &SimulationConfig) -> Self {
        Self {
            material: cfg.material,
            source: cfg.source.clone(),
            geometry: cfg.geometry(),
            n_gauss: cfg.n_gauss(),
            solver: SolverOptions { rel_tol: cfg.solver_tol, ..SolverOptions::default() },
            dt: cfg.dt,
            alpha_r: cfg.alpha_r,
            m: cfg.effective_m(),
            tol: cfg.tol,
        }
    }
}

/// One backward Euler solve with its estimate.
struct Solve {
    sys: SystemMatrices,
    theta_new: StateVector,
    delta: Vec<f64>,
    estimate: Estimate,
    iterations: usize,
}

fn solve(ctx: &StepContext, space: &HierarchicalSpace, theta_t: &StateVector) -> Result<Solve> {
    let t_new = theta_t.time + ctx.dt;
    let sys = assemble(space, ctx.geometry, &ctx.material, &ctx.source, t_new, ctx.n_gauss)?;
    let out = backward_euler_step(&sys, theta_t, ctx.dt, ctx.solver)?;
    let est = estimate(&sys.quadrature, &ctx.material, &ctx.source, &out.theta, theta_t, ctx.dt)?;
    Ok(Solve { sys, theta_new: out.theta, delta: out.delta, estimate: est, iterations: out.stats.iterations })
}

/// Result of the iterative refinement of one time step.
#[derive(Clone, Debug)]
pub struct IterateOutcome {
    pub space: HierarchicalSpace,
    pub sys: SystemMatrices,
    /// Previous state, transferred to `space`.
    pub theta_old: StateVector,
    pub theta_new: StateVector,
    pub delta: Vec<f64>,
    pub estimate: Estimate,
    pub iterations: usize,
    pub marked: usize,
    pub solver_iterations: usize,
}

/// Solves, estimates and refines up to `i_max` times while the estimate
/// stays at or above the tolerance; the previous state follows each
/// refinement by exact transfer.
pub fn adaptive_iterate(
    ctx: &StepContext,
    mut space: HierarchicalSpace,
    mut theta_t: StateVector,
    i_max: usize,
) -> Result<IterateOutcome> {
    let mut s = solve(ctx, &space, &theta_t)?;
    let mut i = 0;
    let mut marked = 0;
    while i < i_max && s.estimate.total >= ctx.tol {
        let set = mark_max(&s.estimate, ctx.alpha_r)?;
        log::debug!("iteration {i}: eps = {:.4e}, marked {:?}", s.estimate.total, set.cells);
        let old = space.clone();
        let report = refine(&mut space, &set, ctx.m)?;
        marked += set.len();
        if report.subdivided.is_empty() {
            break;
        }
        theta_t = transfer_refine(&old, &space, &theta_t)?;
        i += 1;
        s = solve(ctx, &space, &theta_t)?;
    }
    Ok(IterateOutcome {
        space,
        sys: s.sys,
        theta_old: theta_t,
        theta_new: s.theta_new,
        delta: s.delta,
        estimate: s.estimate,
        iterations: i,
        marked,
        solver_iterations: s.iterations,
    })
}

/// Diagnostics of one time step.
#[derive(Clone, Debug, PartialEq)]
pub struct StepRecord {
    /// 1-based step index.
    pub step: usize,
    pub t: f64,
    pub n_dofs: usize,
    /// Active cells per level of the mesh the step was solved on.
    pub cells_per_level: Vec<usize>,
    pub eps_total: f64,
    pub e_i: f64,
    pub e_t: f64,
    pub wall_ms: f64,
    pub marked_r: usize,
    pub marked_c: usize,
    pub reactivated: usize,
    pub cells_before_coarsening: usize,
    pub cells_after_coarsening: usize,
    pub max_active_level: usize,
    /// Admissibility of the mesh handed to the next step.
    pub admissible: bool,
    /// `|1^T M d - dt 1^T f| / |dt 1^T f|` of the final solve.
    pub balance: f64,
    pub solver_iterations: usize,
}

impl StepRecord {
    fn csv_row(&self) -> String {
        let cells: Vec<String> = self.cells_per_level.iter().map(usize::to_string).collect();
        format!(
            "{},{},{},{},{},{},{},{:.3},{},{},{}",
            self.step,
            self.t,
            self.n_dofs,
            cells.join(","),
            self.eps_total,
            self.e_i,
            self.e_t,
            self.wall_ms,
            self.marked_r,
            self.marked_c,
            self.reactivated
        )
    }
}

/// Header of `steps.csv` for a hierarchy with `levels` levels.
pub fn steps_header(levels: usize) -> String {
    let cells: Vec<String> = (0..levels).map(|l| format!("cells_l{l}")).collect();
    format!("step,t,n_dofs,{},eps_total,E_i,E_T,wall_ms,marked_r,marked_c,reactivated", cells.join(","))
}

/// Final state and per-step diagnostics of a run.
#[derive(Clone, Debug)]
pub struct RunOutput {
    pub records: Vec<StepRecord>,
    pub space: HierarchicalSpace,
    pub theta: StateVector,
}

struct Outputs {
    dir: PathBuf,
    steps: BufWriter<File>,
    sample_n: usize,
    every: usize,
}

impl Outputs {
    fn create(dir: &Path, cfg: &SimulationConfig) -> Result<Self> {
        fs::create_dir_all(dir)?;
        let mut steps = BufWriter::new(File::create(dir.join("steps.csv"))?);
        writeln!(steps, "{}", steps_header(cfg.levels()))?;
        steps.flush()?;
        Ok(Self { dir: dir.to_path_buf(), steps, sample_n: cfg.sample_n, every: cfg.snapshot_every })
    }

    fn record(&mut self, r: &StepRecord) -> Result<()> {
        writeln!(self.steps, "{}", r.csv_row())?;
        self.steps.flush()?;
        Ok(())
    }

    fn snapshot(&self, step: usize, space: &HierarchicalSpace, theta: &StateVector, geom: Geometry) -> Result<()> {
        if self.every == 0 || !step.is_multiple_of(self.every) {
            return Ok(());
        }
        space.mesh().write_jsonl(BufWriter::new(File::create(self.dir.join(format!("mesh_{step:04}.jsonl")))?))?;
        let field = sample_field(space, theta, geom, self.sample_n)?;
        field.write_vtk(BufWriter::new(File::create(self.dir.join(format!("field_{step:04}.vtk")))?))?;
        field.write_csv(BufWriter::new(File::create(self.dir.join(format!("field_{step:04}.csv")))?))?;
        Ok(())
    }
}

/// Initial space of a run: the base cells, or the uniform tensor mesh.
pub fn initial_space(cfg: &SimulationConfig) -> Result<HierarchicalSpace> {
    let base = TensorSpace::uniform(cfg.degree, cfg.base_cells, cfg.base_cells);
    match cfg.mode {
        Mode::Uniform(k) => HierarchicalSpace::uniform(base, k),
        _ => HierarchicalSpace::build_initial(base, cfg.max_levels),
    }
}

fn balance(sys: &SystemMatrices, delta: &[f64], dt: f64) -> f64 {
    let heat: f64 = sys.mass.matvec(delta).iter().sum();
    let injected = dt * sys.load.iter().sum::<f64>();
    let diff = (heat - injected).abs();
    if injected == 0.0 {
        diff
    } else {
        diff / injected.abs()
    }
}

/// Runs the time loop: the first step refines up to its own cap, every
/// later step refines, then marks, coarsens and projects the solution onto
/// the coarsened space. Artifacts go to `out` when given.
pub fn run(cfg: &SimulationConfig, out: Option<&Path>) -> Result<RunOutput> {
    cfg.validate()?;
    let ctx = StepContext::from_config(cfg);
    let adaptive = !matches!(cfg.mode, Mode::Uniform(_));
    let mut outputs = out.map(|d| Outputs::create(d, cfg)).transpose()?;
    let mut space = initial_space(cfg)?;
    let mut theta = StateVector::constant(&space, cfg.material.theta0, 0.0);
    let mut records = Vec::with_capacity(cfg.n_steps);

    for step in 1..=cfg.n_steps {
        let clock = Instant::now();
        let cap = match (adaptive, step) {
            (false, _) => 0,
            (true, 1) => cfg.i_max_first(),
            (true, _) => cfg.i_max_rest,
        };
        let it = adaptive_iterate(&ctx, space, theta, cap)?;
        let energies = Energies::compute(&it.sys, &it.theta_new, &it.theta_old, cfg.dt)?;
        let mesh = it.space.mesh();
        let mut record = StepRecord {
            step,
            t: it.theta_new.time,
            n_dofs: it.space.n_dofs(),
            cells_per_level: mesh.active_per_level().to_vec(),
            eps_total: it.estimate.total,
            e_i: energies.internal,
            e_t: energies.total,
            wall_ms: 0.0,
            marked_r: it.marked,
            marked_c: 0,
            reactivated: 0,
            cells_before_coarsening: mesh.n_active(),
            cells_after_coarsening: mesh.n_active(),
            max_active_level: mesh.max_active_level(),
            admissible: true,
            balance: balance(&it.sys, &it.delta, cfg.dt),
            solver_iterations: it.solver_iterations,
        };
        if let Some(o) = &outputs {
            o.snapshot(step, &it.space, &it.theta_new, ctx.geometry)?;
        }

        if adaptive && cfg.coarsen && step > 1 {
            let marked = mark_min(&it.estimate, cfg.alpha_c)?;
            let mut coarse = it.space.clone();
            let report = coarsen(&mut coarse, &marked, ctx.m)?;
            record.marked_c = marked.len();
            record.reactivated = report.reactivated.len();
            if report.reactivated.is_empty() {
                space = it.space;
                theta = it.theta_new;
            } else {
                let field = DiscreteField::new(&it.space, &it.theta_new)?;
                theta = project_l2(&coarse, &field, it.theta_new.time)?.theta;
                space = coarse;
            }
        } else {
            space = it.space;
            theta = it.theta_new;
        }
        record.cells_after_coarsening = space.mesh().n_active();
        if adaptive {
            record.admissible = space.is_admissible(ctx.m);
        }
        record.wall_ms = clock.elapsed().as_secs_f64() * 1e3;
        log::info!(
            "step {step}: t = {:.4e}, dofs = {}, eps = {:.4e}, cells {} -> {}",
            record.t,
            record.n_dofs,
            record.eps_total,
            record.cells_before_coarsening,
            record.cells_after_coarsening
        );
        if let Some(o) = outputs.as_mut() {
            o.record(&record)?;
        }
        records.push(record);
    }
    Ok(RunOutput { records, space, theta })
}

/// Reads a config file and runs it.
pub fn run_file(config: &Path, out: Option<&Path>) -> Result<RunOutput> {
    let text = fs::read_to_string(config)?;
    let cfg = SimulationConfig::parse(&text).map_err(|e| Error::Config(format!("{}: {e}", config.display())))?;
    run(&cfg, out)
}
