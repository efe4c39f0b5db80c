//! Explicit RK4 time stepping of the full system in the fixed domain.
//!
//! Each stage evaluates ∂ₜψ = v·N, rebuilds the graph map, solves for the
//! pressure and forms the tendencies of v and F. After a step v is projected
//! back to the div^φ-free set and the bottom traces are reset.

use crate::config::{PressureForm, RunConfig};
use crate::diagnostics::{self, DiagnosticsRecord};
use crate::elliptic::{pressure_rhs, pressure_rhs_consistent, PoissonSolver, TopCondition};
use crate::error::{Error, Result};
use crate::graphmap::{mean_curvature, Cutoff, GraphMap};
use crate::grid::{Grid, SurfaceField, VectorField, VolumeField};
use crate::state::{build_initial_data_with, enforce_bottom, kinematic_rate, History, State};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepOptions {
    pub pressure: PressureForm,
    /// 2/3-rule truncation of every tendency.
    pub dealias: bool,
    /// Exponential filter of order 36 applied to the new state.
    pub filter: bool,
    pub project: bool,
    /// Refuse steps above the stability bound.
    pub check_cfl: bool,
}

impl Default for StepOptions {
    fn default() -> Self {
        Self {
            pressure: PressureForm::Consistent,
            dealias: true,
            filter: false,
            project: true,
            check_cfl: true,
        }
    }
}

impl StepOptions {
    pub fn from_config(cfg: &RunConfig) -> Self {
        Self {
            pressure: cfg.pressure,
            dealias: cfg.dealias,
            filter: cfg.filter,
            project: cfg.project,
            check_cfl: true,
        }
    }
}

/// Time derivatives of (ψ, v, F) at one stage, with the pressure that produced them.
#[derive(Clone, Debug)]
pub struct Tendencies {
    pub psi: SurfaceField,
    pub v: VectorField,
    pub f: [VectorField; 3],
    pub q: VolumeField,
}

#[derive(Clone, Debug)]
pub struct Evolver {
    grid: Grid,
    cutoff: Cutoff,
    solver: PoissonSolver,
    pub options: StepOptions,
}

impl Evolver {
    pub fn new(grid: &Grid, cutoff: &Cutoff, solver: PoissonSolver, options: StepOptions) -> Self {
        Self {
            grid: grid.clone(),
            cutoff: cutoff.clone(),
            solver,
            options,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn cutoff(&self) -> &Cutoff {
        &self.cutoff
    }

    pub fn solver(&self) -> &PoissonSolver {
        &self.solver
    }

    /// Tendencies at `state`; `state.q` seeds the pressure solve.
    pub fn stage(&self, state: &State) -> Result<Tendencies> {
        let grid = &self.grid;
        let psi_t = kinematic_rate(&state.psi, &state.v, grid);
        let gm = GraphMap::build(grid, &self.cutoff, &state.psi, &psi_t, state.t)?;
        let w = gm.vertical_speed(&state.v);

        let mut a_star = VectorField::from_fn(|i| -gm.advect_with(&state.v, &w, &state.v[i]));
        for fk in &state.f {
            for i in 0..3 {
                a_star[i] += &gm.directional(fk, &fk[i]);
            }
        }
        let (rhs, bottom) = match self.options.pressure {
            PressureForm::Consistent => pressure_rhs_consistent(&a_star, &state.v, &gm),
            PressureForm::Constrained => pressure_rhs(&state.v, &state.f, &gm),
        };
        let top = mean_curvature(&state.psi, grid) * (-state.sigma);
        let q = self
            .solver
            .solve(&gm, &rhs, TopCondition::Dirichlet(&top), &bottom, Some(&state.q))?
            .field;

        let grad_q = gm.grad(&q);
        let mut dv = a_star.sub(&grad_q);
        let mut df: [VectorField; 3] = std::array::from_fn(|j| {
            let fj = &state.f[j];
            VectorField::from_fn(|i| gm.directional(fj, &state.v[i]) - gm.advect_with(&state.v, &w, &fj[i]))
        });
        let mut dpsi = psi_t;
        if self.options.dealias {
            grid.truncate_two_thirds(&mut dpsi);
            for c in dv.0.iter_mut().chain(df.iter_mut().flat_map(|x| x.0.iter_mut())) {
                grid.truncate_two_thirds(c);
            }
        }
        Ok(Tendencies {
            psi: dpsi,
            v: dv,
            f: df,
            q,
        })
    }

    /// Largest stable step: 0.5·min(Δx/max|v|, √(Δx³/(πσ)), Δz·c₀/max|v·N − ∂ₜφ|).
    pub fn cfl_bound(&self, state: &State) -> Result<f64> {
        let gm = state.graph_map(&self.grid, &self.cutoff)?;
        Ok(cfl_bound(&gm, state))
    }

    fn advance(&self, state: &State, k: &Tendencies, dt: f64) -> State {
        State {
            t: state.t + dt,
            psi: &state.psi + &(&k.psi * dt),
            v: state.v.axpy(dt, &k.v),
            f: std::array::from_fn(|j| state.f[j].axpy(dt, &k.f[j])),
            q: k.q.clone(),
            sigma: state.sigma,
        }
    }

    /// One RK4 step. `k1` may carry the tendencies already computed at `state`;
    /// the returned tendencies belong to the new state and can be passed on.
    pub fn step_with(&self, state: &State, dt: f64, k1: Option<Tendencies>) -> Result<(State, Tendencies)> {
        let grid = &self.grid;
        if self.options.check_cfl {
            let bound = self.cfl_bound(state)?;
            if dt > bound * (1.0 + 1e-12) {
                return Err(Error::CflViolation { dt, suggested: bound });
            }
        }
        let k1 = match k1 {
            Some(k) => k,
            None => self.stage(state)?,
        };
        let k2 = self.stage(&self.advance(state, &k1, 0.5 * dt))?;
        let k3 = self.stage(&self.advance(state, &k2, 0.5 * dt))?;
        let k4 = self.stage(&self.advance(state, &k3, dt))?;

        let c = [dt / 6.0, dt / 3.0, dt / 3.0, dt / 6.0];
        let ks = [&k1, &k2, &k3, &k4];
        let mut next = State {
            t: state.t + dt,
            psi: state.psi.clone(),
            v: state.v.clone(),
            f: state.f.clone(),
            q: k4.q.clone(),
            sigma: state.sigma,
        };
        for (ci, k) in c.iter().zip(ks) {
            next.psi.scaled_add(*ci, &k.psi);
            for i in 0..3 {
                next.v[i].scaled_add(*ci, &k.v[i]);
                for j in 0..3 {
                    next.f[j][i].scaled_add(*ci, &k.f[j][i]);
                }
            }
        }
        if self.options.filter {
            grid.exponential_filter(&mut next.psi, 36);
            for comp in next.v.0.iter_mut().chain(next.f.iter_mut().flat_map(|x| x.0.iter_mut())) {
                grid.exponential_filter(comp, 36);
            }
        }
        if self.options.project {
            let gm = next.graph_map(grid, &self.cutoff)?;
            next.v = self.solver.project_divfree(&gm, &next.v)?;
        }
        enforce_bottom(&mut next);
        if !next.is_finite() {
            return Err(Error::DegenerateMap {
                min_jacobian: f64::NAN,
                t: next.t,
            });
        }
        let k_next = self.stage(&next)?;
        next.q = k_next.q.clone();
        Ok((next, k_next))
    }

    pub fn step_rk4(&self, state: &State, dt: f64) -> Result<State> {
        Ok(self.step_with(state, dt, None)?.0)
    }
}

pub fn cfl_bound(gm: &GraphMap, state: &State) -> f64 {
    let grid = gm.grid();
    let dx = grid.min_dx();
    let vmax = state.v.max_abs();
    let mut bound = f64::INFINITY;
    if vmax > 0.0 {
        bound = bound.min(dx / vmax);
    }
    if state.sigma > 0.0 {
        bound = bound.min((dx.powi(3) / (std::f64::consts::PI * state.sigma)).sqrt());
    }
    let n = gm.normal();
    let rel = (&state.v.dot(&n) - &gm.phi_t).iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if rel > 0.0 {
        bound = bound.min(grid.min_dz() * gm.c0 / rel);
    }
    0.5 * bound
}

/// Pressure consistent with `state`, for initial data that did not come from the stepper.
pub fn stage_pressure(evolver: &Evolver, state: &State) -> Result<VolumeField> {
    Ok(evolver.stage(state)?.q)
}

#[derive(Debug)]
pub struct RunOutput {
    pub grid: Grid,
    pub cutoff: Cutoff,
    pub initial: State,
    pub final_state: State,
    pub history: History,
    pub records: Vec<DiagnosticsRecord>,
    /// (step index, state) at the snapshot cadence, including the first and last.
    pub snapshots: Vec<(usize, State)>,
    pub dt: f64,
    pub steps: usize,
    /// Set when the run stopped early; everything before it is kept.
    pub error: Option<Error>,
}

/// Number of steps and the uniform step that lands exactly on `t_final`.
pub fn step_plan(dt: f64, t_final: f64) -> (usize, f64) {
    if t_final <= 0.0 {
        return (0, dt);
    }
    let n = (t_final / dt - 1e-9).ceil().max(1.0) as usize;
    (n, t_final / n as f64)
}

/// Build the initial data for `cfg` and integrate to `t_final`.
pub fn run(cfg: &RunConfig) -> Result<RunOutput> {
    run_with(cfg, |_, _| {})
}

/// As [`run`], calling `observe` after every recorded step.
pub fn run_with(cfg: &RunConfig, mut observe: impl FnMut(&State, &DiagnosticsRecord)) -> Result<RunOutput> {
    cfg.validate()?;
    let grid = cfg.init.grid()?;
    let cutoff = cfg.init.make_cutoff(&grid)?;
    let solver = PoissonSolver::with_options(&grid, cfg.solver);
    let initial = build_initial_data_with(&cfg.init, &grid, &cutoff, &solver)?;
    let evolver = Evolver::new(&grid, &cutoff, solver, StepOptions::from_config(cfg));
    let (steps, dt) = step_plan(cfg.dt, cfg.t_final);

    let mut history = History::new(cfg.history_len.max(cfg.k_max + 1));
    let mut records = Vec::with_capacity(steps + 1);
    let mut snapshots = vec![(0, initial.clone())];
    let mut state = initial.clone();
    // the stepper's own pressure replaces the constrained q₀ from the first stage on
    let mut k = None;
    history.push(state.clone())?;
    let gm = state.graph_map(&grid, &cutoff)?;
    let rec = diagnostics::record(&state, &gm, &history, cfg.k_max, dt);
    observe(&state, &rec);
    records.push(rec);

    let mut error = None;
    for n in 1..=steps {
        match evolver.step_with(&state, dt, k.take()) {
            Ok((next, k_next)) => {
                state = next;
                k = Some(k_next);
            }
            Err(e) => {
                error = Some(e);
                break;
            }
        }
        history.push(state.clone())?;
        let gm = match state.graph_map(&grid, &cutoff) {
            Ok(gm) => gm,
            Err(e) => {
                error = Some(e);
                break;
            }
        };
        let rec = diagnostics::record(&state, &gm, &history, cfg.k_max, dt);
        observe(&state, &rec);
        records.push(rec);
        if n % cfg.snapshot_every == 0 || n == steps {
            snapshots.push((n, state.clone()));
        }
    }
    Ok(RunOutput {
        grid,
        cutoff,
        initial,
        final_state: state,
        history,
        records,
        snapshots,
        dt,
        steps,
        error,
    })
}
