//! Energies, the Rayleigh–Taylor monitor, and the operator-lemma battery.

use std::io::Write;

use crate::error::{Error, Result};
use crate::fd;
use crate::graphmap::{area_element, Cutoff, GraphMap};
use crate::grid::{Grid, SurfaceField, TanAxis, VectorField, VolumeField};
use crate::state::{constraint_residuals, sample_recipe, ConstraintResiduals, History, Modes, State, VectorRecipe};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub e_cons: f64,
    pub e_high: f64,
    pub constraints: ConstraintResiduals,
    pub rt_min: f64,
    pub dt: f64,
}

impl DiagnosticsRecord {
    pub const CSV_HEADER: &'static str = "t,E_cons,E_high,div_v,div_F,FN_top,v3_bot,F3_bot,rt_min,dt";

    pub fn csv_row(&self) -> String {
        let c = &self.constraints;
        format!(
            "{:.17e},{:.17e},{:.17e},{:.6e},{:.6e},{:.6e},{:.6e},{:.6e},{:.17e},{:.17e}",
            self.t, self.e_cons, self.e_high, c.div_v, c.div_f, c.fn_top, c.v3_bottom, c.f3_bottom, self.rt_min, self.dt
        )
    }

    pub fn is_finite(&self) -> bool {
        [self.t, self.e_cons, self.e_high, self.rt_min].iter().all(|x| x.is_finite())
    }
}

pub fn write_csv(mut out: impl Write, records: &[DiagnosticsRecord]) -> std::io::Result<()> {
    writeln!(out, "{}", DiagnosticsRecord::CSV_HEADER)?;
    for r in records {
        writeln!(out, "{}", r.csv_row())?;
    }
    Ok(())
}

/// ½Σₖ∫|F_k|²J + ½∫|v|²J + σ∫_Σ√(1+|∇̄ψ|²).
pub fn conserved_energy(state: &State, gm: &GraphMap) -> f64 {
    let grid = gm.grid();
    let mut dens = state.v.norm_sq();
    for c in &state.f {
        dens += &c.norm_sq();
    }
    0.5 * gm.integrate(&dens) + state.sigma * grid.quad_surface(&area_element(&state.psi, grid))
}

fn surface_gradient_norm(grid: &Grid, psi: &SurfaceField, s: usize) -> f64 {
    let p1 = grid.d_tan(psi, TanAxis::X1);
    let p2 = grid.d_tan(psi, TanAxis::X2);
    (grid.sobolev_norm_surface(&p1, s).powi(2) + grid.sobolev_norm_surface(&p2, s).powi(2)).sqrt()
}

/// Truncated high-order energy: Σ_{k≤K} (‖∂ₜᵏF‖_{4−k} + ‖∂ₜᵏv‖_{4−k} + |√σ∂ₜᵏ∇̄ψ|_{4−k})
/// + Σ_{k≤min(K,3)} ‖∂ₜᵏq‖_{4−k}, with time derivatives by finite differences
/// over the history at its latest time.
pub fn higher_energy(hist: &History, grid: &Grid, k_max: usize) -> Result<f64> {
    if k_max > 4 {
        return Err(Error::InvalidMultiIndex(format!("k_max = {k_max} exceeds 4")));
    }
    hist.require(k_max + 1)?;
    let states: Vec<&State> = hist.states().collect();
    let ts: Vec<f64> = states.iter().map(|s| s.t).collect();
    let latest = *states.last().expect("non-empty history");
    let w = fd::weights(latest.t, &ts, k_max);
    let combine = |k: usize, get: &dyn Fn(&State) -> VolumeField| -> VolumeField {
        if k == 0 {
            return get(latest);
        }
        let mut acc = grid.zeros_volume();
        for (wj, s) in w[k].iter().zip(&states) {
            acc.scaled_add(*wj, &get(s));
        }
        acc
    };
    let mut e = 0.0;
    for k in 0..=k_max {
        let s = 4 - k;
        let v = VectorField::from_fn(|i| combine(k, &|st: &State| st.v[i].clone()));
        e += v.sobolev_norm(grid, s);
        let mut f2 = 0.0;
        for j in 0..3 {
            let fj = VectorField::from_fn(|i| combine(k, &|st: &State| st.f[j][i].clone()));
            f2 += fj.sobolev_norm(grid, s).powi(2);
        }
        e += f2.sqrt();
        let psi = if k == 0 {
            latest.psi.clone()
        } else {
            let mut acc = grid.zeros_surface();
            for (wj, st) in w[k].iter().zip(&states) {
                acc.scaled_add(*wj, &st.psi);
            }
            acc
        };
        e += latest.sigma.max(0.0).sqrt() * surface_gradient_norm(grid, &psi, s);
        if k <= 3 {
            let q = combine(k, &|st: &State| st.q.clone());
            e += grid.sobolev_norm(&q, s);
        }
    }
    Ok(e)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RtReport {
    /// min over Σ of −∂₃q
    pub rt_min: f64,
    pub holds: bool,
}

pub fn rt_monitor(q: &VolumeField, grid: &Grid, c0_req: f64) -> RtReport {
    let d3 = grid.d_vert(q);
    let rt_min = grid.top(&d3).iter().map(|x| -x).fold(f64::INFINITY, f64::min);
    RtReport {
        rt_min,
        holds: rt_min >= c0_req,
    }
}

/// Per-step record. E_high uses as many time levels as the history holds, up to `k_max`.
pub fn record(state: &State, gm: &GraphMap, hist: &History, k_max: usize, dt: f64) -> DiagnosticsRecord {
    let grid = gm.grid();
    let k = k_max.min(hist.len().saturating_sub(1));
    DiagnosticsRecord {
        t: state.t,
        e_cons: conserved_energy(state, gm),
        e_high: higher_energy(hist, grid, k).unwrap_or(f64::NAN),
        constraints: constraint_residuals(state, gm),
        rt_min: rt_monitor(&state.q, grid, 0.0).rt_min,
        dt,
    }
}

/// One residual of the lemma battery.
#[derive(Clone, Debug, PartialEq)]
pub struct LemmaRow {
    pub lemma: &'static str,
    pub field: String,
    pub residual: f64,
    pub tolerance: f64,
}

impl LemmaRow {
    pub fn passed(&self) -> bool {
        self.residual <= self.tolerance
    }

    pub const CSV_HEADER: &'static str = "lemma,field,residual,tolerance,pass";

    pub fn csv_row(&self) -> String {
        format!("{},{},{:.6e},{:.1e},{}", self.lemma, self.field, self.residual, self.tolerance, self.passed())
    }
}

/// max over i < j of ‖∂ᵢ^φ∂ⱼ^φf − ∂ⱼ^φ∂ᵢ^φf‖₀, relative to ‖f‖₂.
pub fn commutation_residual(gm: &GraphMap, f: &VolumeField) -> f64 {
    let grid = gm.grid();
    let g = gm.grad(f);
    let mut worst: f64 = 0.0;
    for i in 0..3 {
        for j in i + 1..3 {
            let d = &gm.partial(i, &g[j]) - &gm.partial(j, &g[i]);
            worst = worst.max(grid.norm0(&d));
        }
    }
    worst / grid.sobolev_norm(f, 2).max(f64::MIN_POSITIVE)
}

/// Integration by parts against the outward boundary normals: N on Σ, −e₃ on Σ_b.
/// Returns the largest component defect relative to the integrals of the absolute integrands.
pub fn ibp_residual(gm: &GraphMap, f: &VolumeField, g: &VolumeField) -> f64 {
    let grid = gm.grid();
    let n = gm.normal_top();
    let fg = f * g;
    let (top, bottom) = (grid.top(&fg), grid.bottom(&fg));
    let mut worst: f64 = 0.0;
    let abs_int = |x: &VolumeField| gm.integrate(&x.mapv(f64::abs));
    for i in 0..3 {
        let (pa, pb) = (&gm.partial(i, f) * g, f * &gm.partial(i, g));
        let ts = &top * &n[i];
        let a = gm.integrate(&pa);
        let b = gm.integrate(&pb);
        let s = grid.quad_surface(&ts);
        let sb = if i == 2 { -grid.quad_surface(&bottom) } else { 0.0 };
        let mut scale = abs_int(&pa) + abs_int(&pb) + grid.quad_surface(&ts.mapv(f64::abs));
        if i == 2 {
            scale += grid.quad_surface(&bottom.mapv(f64::abs));
        }
        worst = worst.max((a + b - s - sb).abs() / scale.max(f64::MIN_POSITIVE));
    }
    worst
}

/// Surface translating in x₁ at `speed`, carried by v = speed·e₁ + ∇^φs × 𝐍/J.
/// The kinematic condition and div^φv = 0 hold by construction.
#[derive(Clone, Debug, PartialEq)]
pub struct TravelingFlow {
    pub surface: Modes,
    pub speed: f64,
    pub stream: Modes,
}

impl TravelingFlow {
    pub fn psi(&self, grid: &Grid, t: f64) -> SurfaceField {
        grid.surface_fn(|a, b| self.surface.eval(a - self.speed * t, b))
    }

    pub fn graph_map(&self, grid: &Grid, cutoff: &Cutoff, t: f64) -> Result<GraphMap> {
        let psi = self.psi(grid, t);
        let psi_t = grid.d_tan(&psi, TanAxis::X1) * (-self.speed);
        GraphMap::build(grid, cutoff, &psi, &psi_t, t)
    }

    pub fn velocity(&self, gm: &GraphMap) -> VectorField {
        let mut v = sample_recipe(&VectorRecipe::Stream(self.stream.clone()), gm);
        v[0] += self.speed;
        v
    }
}

/// |d/dt ∫fJ − ∫(D_t^φf)J| relative to the size of the two integrand parts.
/// `f(t)` and `f_t(t)` are sampled by the caller; the time derivative on the left
/// is a sixth-order centered difference with step `h`.
pub fn transport_residual(
    grid: &Grid,
    cutoff: &Cutoff,
    flow: &TravelingFlow,
    t0: f64,
    h: f64,
    f: &dyn Fn(f64) -> VolumeField,
    f_t: &dyn Fn(f64) -> VolumeField,
) -> Result<f64> {
    let nodes: Vec<f64> = (-3..=3).map(|j| t0 + j as f64 * h).collect();
    let w = fd::weights(t0, &nodes, 1);
    let mut lhs = 0.0;
    for (wj, &t) in w[1].iter().zip(&nodes) {
        if *wj != 0.0 {
            lhs += wj * flow.graph_map(grid, cutoff, t)?.integrate(&f(t));
        }
    }
    let gm = flow.graph_map(grid, cutoff, t0)?;
    let v = flow.velocity(&gm);
    let ft = f_t(t0);
    let adv = gm.advect(&v, &f(t0));
    let rhs = gm.integrate(&(&ft + &adv));
    let scale = gm.integrate(&ft.mapv(f64::abs)) + gm.integrate(&adv.mapv(f64::abs));
    Ok((lhs - rhs).abs() / scale.max(f64::MIN_POSITIVE))
}

/// The manufactured scalar used by the battery, in flattened coordinates.
pub fn manufactured_scalar(grid: &Grid, t: f64) -> VolumeField {
    grid.volume_fn(|a, b, z| (a + 2.0 * b - 0.7 * t).sin() * (1.0 + z + 0.5 * z * z) + b.cos() * z.exp() * t.cos())
}

pub fn manufactured_scalar_t(grid: &Grid, t: f64) -> VolumeField {
    grid.volume_fn(|a, b, z| -0.7 * (a + 2.0 * b - 0.7 * t).cos() * (1.0 + z + 0.5 * z * z) - b.cos() * z.exp() * t.sin())
}

/// Commutation, integration-by-parts and transport residuals on manufactured
/// data over the surface `psi`.
pub fn lemma_checks(grid: &Grid, cutoff: &Cutoff, psi: &Modes, tolerance: f64) -> Result<Vec<LemmaRow>> {
    let flow = TravelingFlow {
        surface: psi.clone(),
        speed: 1.0,
        stream: "0.2*sin(0,1) + 0.1*cos(1,1)".parse()?,
    };
    let gm = flow.graph_map(grid, cutoff, 0.0)?;
    let v = flow.velocity(&gm);
    let f1 = manufactured_scalar(grid, 0.0);
    let f2 = grid.volume_fn(|a, b, z| a.cos() * b.sin() * z.exp());
    let f3 = grid.volume_fn(|a, b, z| (2.0 * a - b).cos() * (1.5 * z).cosh());
    let mut rows = Vec::new();
    let named = [("f1", &f1), ("f2", &f2), ("f3", &f3), ("v1", &v[0]), ("v3", &v[2])];
    for (name, f) in named {
        rows.push(LemmaRow {
            lemma: "commutation",
            field: name.to_string(),
            residual: commutation_residual(&gm, f),
            tolerance,
        });
    }
    for (a, b) in [(0, 1), (1, 2), (0, 3), (2, 4)] {
        rows.push(LemmaRow {
            lemma: "integration_by_parts",
            field: format!("{}*{}", named[a].0, named[b].0),
            residual: ibp_residual(&gm, named[a].1, named[b].1),
            tolerance,
        });
    }
    let ms = |t: f64| manufactured_scalar(grid, t);
    let mst = |t: f64| manufactured_scalar_t(grid, t);
    rows.push(LemmaRow {
        lemma: "transport",
        field: "f1".into(),
        residual: transport_residual(grid, cutoff, &flow, 0.0, 0.02, &ms, &mst)?,
        tolerance,
    });
    let steady = |_t: f64| f2.clone();
    let zero = |_t: f64| grid.zeros_volume();
    rows.push(LemmaRow {
        lemma: "transport",
        field: "f2".into(),
        residual: transport_residual(grid, cutoff, &flow, 0.0, 0.02, &steady, &zero)?,
        tolerance,
    });
    Ok(rows)
}
