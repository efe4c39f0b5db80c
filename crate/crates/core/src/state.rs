//! Unknowns at one instant, initial-data recipes, and constraint residuals.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::elliptic::{pressure_rhs, PoissonSolver, TopCondition};
use crate::error::{Error, Result};
use crate::graphmap::{mean_curvature, Cutoff, GraphMap};
use crate::grid::{Grid, SurfaceField, TanAxis, VectorField, VolumeField};

#[derive(Clone, Debug, PartialEq)]
pub struct State {
    pub t: f64,
    pub psi: SurfaceField,
    pub v: VectorField,
    /// Columns F₁, F₂, F₃; `f[j][i]` is the entry F_{ij}.
    pub f: [VectorField; 3],
    pub q: VolumeField,
    pub sigma: f64,
}

impl State {
    pub fn rest(grid: &Grid, sigma: f64) -> Self {
        Self {
            t: 0.0,
            psi: grid.zeros_surface(),
            v: VectorField::zeros(grid),
            f: std::array::from_fn(|_| VectorField::zeros(grid)),
            q: grid.zeros_volume(),
            sigma,
        }
    }

    /// ∂ₜψ = v·N on Σ.
    pub fn kinematic_rate(&self, grid: &Grid) -> SurfaceField {
        kinematic_rate(&self.psi, &self.v, grid)
    }

    /// Graph map of this state, with ∂ₜψ taken from the kinematic condition.
    pub fn graph_map(&self, grid: &Grid, cutoff: &Cutoff) -> Result<GraphMap> {
        GraphMap::build(grid, cutoff, &self.psi, &self.kinematic_rate(grid), self.t)
    }

    pub fn is_finite(&self) -> bool {
        self.psi.iter().all(|x| x.is_finite())
            && self.v.is_finite()
            && self.f.iter().all(|c| c.is_finite())
            && self.q.iter().all(|x| x.is_finite())
    }
}

pub fn kinematic_rate(psi: &SurfaceField, v: &VectorField, grid: &Grid) -> SurfaceField {
    let p1 = grid.d_tan(psi, TanAxis::X1);
    let p2 = grid.d_tan(psi, TanAxis::X2);
    &grid.top(&v[2]) - &(&p1 * &grid.top(&v[0])) - &p2 * &grid.top(&v[1])
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Trig {
    Cos,
    Sin,
}

/// One term `amp·cos(k₁x₁ + k₂x₂)` or `amp·sin(…)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mode {
    pub amp: f64,
    pub trig: Trig,
    pub k1: i32,
    pub k2: i32,
}

impl Mode {
    pub fn cos(amp: f64, k1: i32, k2: i32) -> Self {
        Self { amp, trig: Trig::Cos, k1, k2 }
    }

    pub fn sin(amp: f64, k1: i32, k2: i32) -> Self {
        Self { amp, trig: Trig::Sin, k1, k2 }
    }

    fn phase(&self, x1: f64, x2: f64) -> f64 {
        self.k1 as f64 * x1 + self.k2 as f64 * x2
    }

    pub fn eval(&self, x1: f64, x2: f64) -> f64 {
        let th = self.phase(x1, x2);
        match self.trig {
            Trig::Cos => self.amp * th.cos(),
            Trig::Sin => self.amp * th.sin(),
        }
    }

    /// d/dθ of the trigonometric factor, times amp.
    fn eval_shifted(&self, x1: f64, x2: f64) -> f64 {
        let th = self.phase(x1, x2);
        match self.trig {
            Trig::Cos => -self.amp * th.sin(),
            Trig::Sin => self.amp * th.cos(),
        }
    }

    pub fn wavenumber(&self) -> f64 {
        ((self.k1 * self.k1 + self.k2 * self.k2) as f64).sqrt()
    }
}

/// Sum of Fourier modes; text form `0.1*cos(1,0) + 0.05*sin(0,1)`, or `0`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Modes(pub Vec<Mode>);

impl Modes {
    pub fn eval(&self, x1: f64, x2: f64) -> f64 {
        self.0.iter().map(|m| m.eval(x1, x2)).sum()
    }

    pub fn sample(&self, grid: &Grid) -> SurfaceField {
        grid.surface_fn(|a, b| self.eval(a, b))
    }

    pub fn sup_bound(&self) -> f64 {
        self.0.iter().map(|m| m.amp.abs()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for Modes {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "0");
        }
        for (n, m) in self.0.iter().enumerate() {
            if n > 0 {
                write!(f, " + ")?;
            }
            let name = match m.trig {
                Trig::Cos => "cos",
                Trig::Sin => "sin",
            };
            write!(f, "{:?}*{}({},{})", m.amp, name, m.k1, m.k2)?;
        }
        Ok(())
    }
}

impl FromStr for Modes {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() || s == "0" {
            return Ok(Modes::default());
        }
        let bad = |t: &str| Error::Config(format!("bad mode term '{t}', expected AMP*cos(K1,K2) or AMP*sin(K1,K2)"));
        let mut out = Vec::new();
        for term in s.split('+') {
            let term = term.trim();
            let (amp, rest) = term.split_once('*').ok_or_else(|| bad(term))?;
            let amp: f64 = amp.trim().parse().map_err(|_| bad(term))?;
            let rest = rest.trim();
            let trig = if let Some(r) = rest.strip_prefix("cos") {
                (Trig::Cos, r)
            } else if let Some(r) = rest.strip_prefix("sin") {
                (Trig::Sin, r)
            } else {
                return Err(bad(term));
            };
            let inner = trig.1.trim().strip_prefix('(').and_then(|r| r.strip_suffix(')')).ok_or_else(|| bad(term))?;
            let (a, b) = inner.split_once(',').ok_or_else(|| bad(term))?;
            let k1: i32 = a.trim().parse().map_err(|_| bad(term))?;
            let k2: i32 = b.trim().parse().map_err(|_| bad(term))?;
            out.push(Mode { amp, trig: trig.0, k1, k2 });
        }
        Ok(Modes(out))
    }
}

/// Recipe for a velocity or a deformation column.
#[derive(Clone, Debug, Default, PartialEq)]
pub enum VectorRecipe {
    #[default]
    Zero,
    /// (c₁(x̄), c₂(x̄), 0), constant in depth.
    Shear { c1: Modes, c2: Modes },
    /// ∇^φΦ for Φ(y) = Σ a·trig(k·ȳ)·cosh(|k|(y₃+b))/cosh(|k|b), harmonic in the physical domain.
    Potential(Modes),
    /// ∇^φs × 𝐍/J for a surface stream function s(x̄); tangential to Σ and Σ_b.
    Stream(Modes),
}

impl fmt::Display for VectorRecipe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VectorRecipe::Zero => write!(f, "zero"),
            VectorRecipe::Shear { c1, c2 } => write!(f, "shear: {c1} | {c2}"),
            VectorRecipe::Potential(m) => write!(f, "potential: {m}"),
            VectorRecipe::Stream(m) => write!(f, "stream: {m}"),
        }
    }
}

impl FromStr for VectorRecipe {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "zero" {
            return Ok(VectorRecipe::Zero);
        }
        let (kind, body) = s
            .split_once(':')
            .ok_or_else(|| Error::Config(format!("bad vector recipe '{s}'")))?;
        match kind.trim() {
            "shear" => {
                let (a, b) = body.split_once('|').unwrap_or((body, "0"));
                Ok(VectorRecipe::Shear {
                    c1: a.parse()?,
                    c2: b.parse()?,
                })
            }
            "potential" => Ok(VectorRecipe::Potential(body.parse()?)),
            "stream" => Ok(VectorRecipe::Stream(body.parse()?)),
            other => Err(Error::Config(format!("unknown vector recipe kind '{other}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CutoffChoice {
    Linear,
    Plateau { delta0: f64 },
}

impl fmt::Display for CutoffChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CutoffChoice::Linear => write!(f, "linear"),
            CutoffChoice::Plateau { delta0 } => write!(f, "plateau:{delta0:?}"),
        }
    }
}

impl FromStr for CutoffChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "linear" {
            return Ok(CutoffChoice::Linear);
        }
        if let Some(d) = s.strip_prefix("plateau:") {
            let delta0 = d.trim().parse().map_err(|_| Error::Config(format!("bad plateau width '{d}'")))?;
            return Ok(CutoffChoice::Plateau { delta0 });
        }
        Err(Error::Config(format!("unknown cutoff '{s}', expected linear or plateau:DELTA0")))
    }
}

/// Seeded random surface perturbation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RandomModes {
    pub count: usize,
    pub amplitude: f64,
    pub kmax: i32,
}

#[derive(Clone, Debug, PartialEq)]
pub struct InitSpec {
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
    pub depth: f64,
    pub psi: Modes,
    pub random: Option<RandomModes>,
    pub seed: u64,
    pub v: VectorRecipe,
    pub f: [VectorRecipe; 3],
    pub sigma: f64,
    pub cutoff: CutoffChoice,
}

impl Default for InitSpec {
    fn default() -> Self {
        Self {
            nx: 32,
            ny: 32,
            nz: 17,
            depth: 1.0,
            psi: Modes::default(),
            random: None,
            seed: 0,
            v: VectorRecipe::Zero,
            f: Default::default(),
            sigma: 1.0,
            cutoff: CutoffChoice::Linear,
        }
    }
}

impl InitSpec {
    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.nx, self.ny, self.nz, self.depth)
    }

    /// Surface modes including the seeded random part.
    pub fn surface_modes(&self) -> Modes {
        let mut modes = self.psi.clone();
        if let Some(r) = self.random {
            let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
            for _ in 0..r.count {
                let k1 = rng.random_range(-r.kmax..=r.kmax);
                let k2 = rng.random_range(0..=r.kmax);
                let amp = r.amplitude * rng.random_range(-1.0..=1.0);
                let trig = if rng.random_bool(0.5) { Trig::Cos } else { Trig::Sin };
                if k1 != 0 || k2 != 0 {
                    modes.0.push(Mode { amp, trig, k1, k2 });
                }
            }
        }
        modes
    }

    pub fn make_cutoff(&self, grid: &Grid) -> Result<Cutoff> {
        let sup = self.surface_modes().sup_bound();
        match self.cutoff {
            CutoffChoice::Linear => Ok(Cutoff::linear(grid, sup)),
            CutoffChoice::Plateau { delta0 } => Cutoff::plateau(grid, delta0, sup),
        }
    }
}

/// Evaluate a recipe on the current geometry, before any projection.
pub fn sample_recipe(recipe: &VectorRecipe, gm: &GraphMap) -> VectorField {
    let grid = gm.grid();
    let b = grid.depth();
    match recipe {
        VectorRecipe::Zero => VectorField::zeros(grid),
        VectorRecipe::Shear { c1, c2 } => VectorField([
            grid.extend(&c1.sample(grid)),
            grid.extend(&c2.sample(grid)),
            grid.zeros_volume(),
        ]),
        VectorRecipe::Potential(modes) => {
            let shape = grid.volume_shape();
            let mut out = VectorField::zeros(grid);
            for m in &modes.0 {
                let k = m.wavenumber();
                if k == 0.0 {
                    continue;
                }
                let ck = (k * b).cosh();
                let field = |c: usize| {
                    VolumeField::from_shape_fn(shape, |(kz, j, i)| {
                        let (y1, y2) = (grid.x1()[i], grid.x2()[j]);
                        let y3 = gm.phi[[kz, j, i]];
                        match c {
                            0 => m.k1 as f64 * m.eval_shifted(y1, y2) * (k * (y3 + b)).cosh() / ck,
                            1 => m.k2 as f64 * m.eval_shifted(y1, y2) * (k * (y3 + b)).cosh() / ck,
                            _ => k * m.eval(y1, y2) * (k * (y3 + b)).sinh() / ck,
                        }
                    })
                };
                for c in 0..3 {
                    out[c] += &field(c);
                }
            }
            out
        }
        VectorRecipe::Stream(modes) => {
            let s = modes.sample(grid);
            let s1 = grid.extend(&grid.d_tan(&s, TanAxis::X1));
            let s2 = grid.extend(&grid.d_tan(&s, TanAxis::X2));
            VectorField([
                &s2 * &gm.inv_jac,
                -(&s1 * &gm.inv_jac),
                &(&(&s2 * &gm.phi1) - &(&s1 * &gm.phi2)) * &gm.inv_jac,
            ])
        }
    }
}

fn zero_bottom(f: &mut VolumeField) {
    let nz = f.shape()[0];
    f.index_axis_mut(ndarray::Axis(0), nz - 1).fill(0.0);
}

/// Overwrite v₃ and F_{3j} on Σ_b with zero.
pub fn enforce_bottom(state: &mut State) {
    zero_bottom(&mut state.v[2]);
    for c in state.f.iter_mut() {
        zero_bottom(&mut c[2]);
    }
}

/// Initial state: recipes sampled on the graph map of ψ₀, v projected to
/// div^φ-free, F columns projected with flux-preserving data, q₀ from the
/// constrained pressure problem with q₀ = −σκ(ψ₀) on Σ.
pub fn build_initial_data(spec: &InitSpec, grid: &Grid) -> Result<State> {
    let cutoff = spec.make_cutoff(grid)?;
    let solver = PoissonSolver::new(grid);
    build_initial_data_with(spec, grid, &cutoff, &solver)
}

pub fn build_initial_data_with(spec: &InitSpec, grid: &Grid, cutoff: &Cutoff, solver: &PoissonSolver) -> Result<State> {
    let psi = spec.surface_modes().sample(grid);
    let gm0 = GraphMap::build(grid, cutoff, &psi, &grid.zeros_surface(), 0.0)?;
    let mut v = sample_recipe(&spec.v, &gm0);
    if spec.v != VectorRecipe::Zero {
        v = solver.project_divfree(&gm0, &v)?;
    }
    let mut f: [VectorField; 3] = std::array::from_fn(|_| VectorField::zeros(grid));
    for (j, recipe) in spec.f.iter().enumerate() {
        if *recipe != VectorRecipe::Zero {
            let raw = sample_recipe(recipe, &gm0);
            f[j] = solver.project_divfree_neumann(&gm0, &raw)?.0;
        }
    }
    let mut state = State {
        t: 0.0,
        psi,
        v,
        f,
        q: grid.zeros_volume(),
        sigma: spec.sigma,
    };
    enforce_bottom(&mut state);
    let gm = state.graph_map(grid, cutoff)?;
    state.q = initial_pressure(&state, &gm, solver)?;
    Ok(state)
}

/// q₀ from −Δ^φq = ∂v∂v − ∂F∂F, q = −σκ on Σ, bottom data from the normal momentum trace.
pub fn initial_pressure(state: &State, gm: &GraphMap, solver: &PoissonSolver) -> Result<VolumeField> {
    let grid = gm.grid();
    let (rhs, bottom) = pressure_rhs(&state.v, &state.f, gm);
    let top = mean_curvature(&state.psi, grid) * (-state.sigma);
    Ok(solver.solve(gm, &rhs, TopCondition::Dirichlet(&top), &bottom, None)?.field)
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ConstraintResiduals {
    pub div_v: f64,
    /// max over columns of ‖div^φF_j‖₀
    pub div_f: f64,
    /// max over columns of |F_j·N|_{L∞(Σ)}
    pub fn_top: f64,
    /// max over columns of |F_{3j}|_{L∞(Σ_b)}
    pub f3_bottom: f64,
    pub v3_bottom: f64,
}

impl ConstraintResiduals {
    pub fn max(&self) -> f64 {
        [self.div_v, self.div_f, self.fn_top, self.f3_bottom, self.v3_bottom]
            .into_iter()
            .fold(0.0, f64::max)
    }
}

fn sup(f: &SurfaceField) -> f64 {
    f.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

pub fn constraint_residuals(state: &State, gm: &GraphMap) -> ConstraintResiduals {
    let grid = gm.grid();
    let n = gm.normal_top();
    let mut r = ConstraintResiduals {
        div_v: grid.norm0(&gm.div(&state.v)),
        v3_bottom: sup(&grid.bottom(&state.v[2])),
        ..Default::default()
    };
    for c in &state.f {
        r.div_f = r.div_f.max(grid.norm0(&gm.div(c)));
        let fnt = &(&(&grid.top(&c[0]) * &n[0]) + &(&grid.top(&c[1]) * &n[1])) + &(&grid.top(&c[2]) * &n[2]);
        r.fn_top = r.fn_top.max(sup(&fnt));
        r.f3_bottom = r.f3_bottom.max(sup(&grid.bottom(&c[2])));
    }
    r
}

/// The most recent states at a uniform time step, oldest first.
#[derive(Clone, Debug)]
pub struct History {
    capacity: usize,
    states: VecDeque<State>,
}

impl History {
    pub const DEFAULT_LEN: usize = 5;

    pub fn new(capacity: usize) -> Self {
        Self {
            capacity: capacity.max(Self::DEFAULT_LEN),
            states: VecDeque::new(),
        }
    }

    pub fn from_states(states: impl IntoIterator<Item = State>) -> Result<Self> {
        let states: Vec<State> = states.into_iter().collect();
        let mut h = Self::new(states.len());
        for s in states {
            h.push(s)?;
        }
        Ok(h)
    }

    pub fn push(&mut self, state: State) -> Result<()> {
        if let Some(last) = self.states.back() {
            if !(state.t > last.t) {
                return Err(Error::NonUniformHistory);
            }
            if self.states.len() >= 2 {
                let dt = last.t - self.states[self.states.len() - 2].t;
                let new_dt = state.t - last.t;
                if (new_dt - dt).abs() > 1e-9 * dt.abs().max(1e-300) {
                    return Err(Error::NonUniformHistory);
                }
            }
        }
        if self.states.len() == self.capacity {
            self.states.pop_front();
        }
        self.states.push_back(state);
        Ok(())
    }

    /// Drop everything and start again from `state` (used after a step-size change).
    pub fn reset(&mut self, state: State) {
        self.states.clear();
        self.states.push_back(state);
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn latest(&self) -> Option<&State> {
        self.states.back()
    }

    pub fn states(&self) -> impl DoubleEndedIterator<Item = &State> + ExactSizeIterator {
        self.states.iter()
    }

    pub fn get(&self, i: usize) -> Option<&State> {
        self.states.get(i)
    }

    pub fn dt(&self) -> Option<f64> {
        (self.states.len() >= 2).then(|| self.states[1].t - self.states[0].t)
    }

    pub fn require(&self, needed: usize) -> Result<()> {
        if self.states.len() < needed {
            Err(Error::InsufficientHistory {
                needed,
                available: self.states.len(),
            })
        } else {
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modes_round_trip() {
        let m: Modes = "0.1*cos(1,0) + -0.05*sin(0,2)".parse().unwrap();
        assert_eq!(m.0.len(), 2);
        assert_eq!(m.0[1], Mode::sin(-0.05, 0, 2));
        let again: Modes = m.to_string().parse().unwrap();
        assert_eq!(m, again);
        assert!("0.1*tan(1,0)".parse::<Modes>().is_err());
        assert_eq!("0".parse::<Modes>().unwrap(), Modes::default());
    }

    #[test]
    fn recipe_round_trip() {
        for text in ["zero", "shear: 1.0*cos(0,1) | 0", "potential: 0.4*cos(1,0)", "stream: 0.2*sin(0,1)"] {
            let r: VectorRecipe = text.parse().unwrap();
            let again: VectorRecipe = r.to_string().parse().unwrap();
            assert_eq!(r, again);
        }
        assert!("vortex: 1*cos(1,1)".parse::<VectorRecipe>().is_err());
    }

    #[test]
    fn random_modes_are_seeded() {
        let spec = InitSpec {
            random: Some(RandomModes {
                count: 4,
                amplitude: 0.01,
                kmax: 3,
            }),
            seed: 7,
            ..Default::default()
        };
        assert_eq!(spec.surface_modes(), spec.surface_modes());
        let other = InitSpec { seed: 8, ..spec.clone() };
        assert_ne!(spec.surface_modes(), other.surface_modes());
    }

    fn shear_spec() -> InitSpec {
        InitSpec {
            nx: 16,
            ny: 16,
            nz: 9,
            v: "shear: 1.0*cos(0,1) | 0".parse().unwrap(),
            f: ["stream: 0.2*sin(0,1)".parse().unwrap(), VectorRecipe::Zero, VectorRecipe::Zero],
            ..Default::default()
        }
    }

    #[test]
    fn shear_data_is_exact() {
        let spec = shear_spec();
        let grid = spec.grid().unwrap();
        let s = build_initial_data(&spec, &grid).unwrap();
        let expected_v = grid.volume_fn(|_, b, _| b.cos());
        assert!((&s.v[0] - &expected_v).iter().all(|e| e.abs() < 1e-12));
        let expected_f = grid.volume_fn(|_, b, _| 0.2 * b.cos());
        assert!((&s.f[0][0] - &expected_f).iter().all(|e| e.abs() < 1e-12));
        assert!(s.q.iter().all(|x| x.abs() < 1e-12));
        let gm = s.graph_map(&grid, &spec.make_cutoff(&grid).unwrap()).unwrap();
        assert!(constraint_residuals(&s, &gm).max() < 1e-12);
    }

    #[test]
    fn rest_data_has_zero_pressure() {
        let spec = InitSpec {
            nx: 8,
            ny: 8,
            nz: 9,
            ..Default::default()
        };
        let grid = spec.grid().unwrap();
        let s = build_initial_data(&spec, &grid).unwrap();
        assert!(s.q.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn vertical_ramp_has_unit_divergence() {
        let grid = Grid::new(8, 8, 9, 1.0).unwrap();
        let mut s = State::rest(&grid, 1.0);
        s.v[2] = grid.volume_fn(|_, _, z| z + 1.0);
        let gm = s.graph_map(&grid, &Cutoff::linear(&grid, 0.0)).unwrap();
        let r = constraint_residuals(&s, &gm);
        assert!(r.v3_bottom < 1e-15);
        let vol = (4.0 * std::f64::consts::PI.powi(2)).sqrt();
        assert!((r.div_v - vol).abs() < 1e-12);
    }

    #[test]
    fn stream_columns_are_tangential() {
        let spec = InitSpec {
            nx: 16,
            ny: 16,
            nz: 17,
            psi: "0.1*cos(1,0) + 0.05*sin(0,1)".parse().unwrap(),
            f: [
                "stream: 0.2*sin(0,1)".parse().unwrap(),
                "stream: 0.1*cos(1,1)".parse().unwrap(),
                VectorRecipe::Zero,
            ],
            v: "potential: 0.3*cos(1,0)".parse().unwrap(),
            ..Default::default()
        };
        let grid = spec.grid().unwrap();
        let s = build_initial_data(&spec, &grid).unwrap();
        let gm = s.graph_map(&grid, &spec.make_cutoff(&grid).unwrap()).unwrap();
        let r = constraint_residuals(&s, &gm);
        assert!(r.fn_top < 1e-12, "{r:?}");
        assert!(r.f3_bottom == 0.0 && r.v3_bottom == 0.0);
        assert!(r.div_f < 1e-8 && r.div_v < 1e-8, "{r:?}");
    }

    #[test]
    fn history_requires_uniform_steps() {
        let grid = Grid::new(8, 8, 9, 1.0).unwrap();
        let at = |t: f64| State {
            t,
            ..State::rest(&grid, 1.0)
        };
        let mut h = History::new(5);
        for n in 0..7 {
            h.push(at(0.1 * n as f64)).unwrap();
        }
        assert_eq!(h.len(), 5);
        assert!((h.dt().unwrap() - 0.1).abs() < 1e-12);
        assert!(matches!(h.push(at(0.65)), Err(Error::NonUniformHistory)));
        assert!(matches!(h.push(at(0.0)), Err(Error::NonUniformHistory)));
        assert!(matches!(h.require(6), Err(Error::InsufficientHistory { needed: 6, available: 5 })));
    }
}
