//! Boundary-value problems for the twisted Laplacian −Δ^φ = −div^φ∘∇^φ.
//!
//! The discrete operator is the composition of the collocation derivatives,
//! with the top and bottom planes replaced by boundary rows. It is solved by
//! restarted GMRES, right-preconditioned with the flat (ψ ≡ 0) operator,
//! which is block diagonal in the tangential Fourier modes.

use std::sync::{Arc, OnceLock};

use nalgebra::DMatrix;
use ndarray::{s, Axis};
use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::graphmap::GraphMap;
use crate::grid::{Grid, SurfaceField, TanAxis, VectorField, VolumeField};

/// Condition imposed on Σ.
#[derive(Clone, Copy, Debug)]
pub enum TopCondition<'a> {
    /// W = data
    Dirichlet(&'a SurfaceField),
    /// ∇^φW·N = data
    Neumann(&'a SurfaceField),
}

impl TopCondition<'_> {
    fn kind(&self) -> TopKind {
        match self {
            TopCondition::Dirichlet(_) => TopKind::Dirichlet,
            TopCondition::Neumann(_) => TopKind::Neumann,
        }
    }

    fn data(&self) -> &SurfaceField {
        match self {
            TopCondition::Dirichlet(d) | TopCondition::Neumann(d) => d,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum TopKind {
    Dirichlet,
    Neumann,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverOptions {
    /// Relative tolerance on the RMS residual, scaled by (1 + RMS of the data).
    pub tol: f64,
    pub max_iter: usize,
    pub restart: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            max_iter: 500,
            restart: 40,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Solution {
    pub field: VolumeField,
    pub iterations: usize,
    /// RMS of the final residual over all collocation rows.
    pub residual: f64,
}

/// Per-mode inverses of the flat operator.
struct FlatPreconditioner {
    nz: usize,
    /// Row-major nz×nz inverse for every (j, i) mode.
    inverses: Vec<Vec<f64>>,
}

impl FlatPreconditioner {
    fn new(grid: &Grid, top: TopKind) -> Self {
        let nz = grid.nz();
        let d = grid.vertical_matrix();
        let dm = DMatrix::from_fn(nz, nz, |r, c| d[[r, c]]);
        let d2 = &dm * &dm;
        let (kx, ky) = grid.derivative_wavenumbers();
        let mut inverses = Vec::with_capacity(kx.len() * ky.len());
        for k2 in &ky {
            for k1 in &kx {
                let kk = k1 * k1 + k2 * k2;
                let mut m = -d2.clone();
                for r in 0..nz {
                    m[(r, r)] += kk;
                }
                for c in 0..nz {
                    m[(0, c)] = match top {
                        TopKind::Dirichlet => f64::from(c == 0),
                        TopKind::Neumann => dm[(0, c)],
                    };
                    m[(nz - 1, c)] = dm[(nz - 1, c)];
                }
                if top == TopKind::Neumann && kk == 0.0 {
                    // the constant mode is free; pin it for the preconditioner only
                    for c in 0..nz {
                        m[(nz - 1, c)] = f64::from(c == nz - 1);
                    }
                }
                let inv = m.try_inverse().expect("flat operator block is invertible");
                let mut flat = Vec::with_capacity(nz * nz);
                for r in 0..nz {
                    for c in 0..nz {
                        flat.push(inv[(r, c)]);
                    }
                }
                inverses.push(flat);
            }
        }
        Self { nz, inverses }
    }

    fn apply(&self, grid: &Grid, r: &VolumeField) -> VolumeField {
        let mut spec = grid.fft_planes(r);
        let nz = self.nz;
        let (ny, nx) = (grid.ny(), grid.nx());
        let mut col = vec![Complex64::new(0.0, 0.0); nz];
        for j in 0..ny {
            for i in 0..nx {
                let inv = &self.inverses[j * nx + i];
                for k in 0..nz {
                    col[k] = spec[[k, j, i]];
                }
                for k in 0..nz {
                    let row = &inv[k * nz..(k + 1) * nz];
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (a, c) in row.iter().zip(&col) {
                        acc += c * a;
                    }
                    spec[[k, j, i]] = acc;
                }
            }
        }
        grid.ifft_planes(spec)
    }
}

/// Solver with cached flat preconditioners; cheap to clone and share.
#[derive(Clone)]
pub struct PoissonSolver {
    grid: Grid,
    pub options: SolverOptions,
    dirichlet: Arc<OnceLock<FlatPreconditioner>>,
    neumann: Arc<OnceLock<FlatPreconditioner>>,
}

impl std::fmt::Debug for PoissonSolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PoissonSolver").field("grid", &self.grid).field("options", &self.options).finish()
    }
}

impl PoissonSolver {
    pub fn new(grid: &Grid) -> Self {
        Self::with_options(grid, SolverOptions::default())
    }

    pub fn with_options(grid: &Grid, options: SolverOptions) -> Self {
        Self {
            grid: grid.clone(),
            options,
            dirichlet: Arc::new(OnceLock::new()),
            neumann: Arc::new(OnceLock::new()),
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    fn preconditioner(&self, top: TopKind) -> &FlatPreconditioner {
        match top {
            TopKind::Dirichlet => self.dirichlet.get_or_init(|| FlatPreconditioner::new(&self.grid, top)),
            TopKind::Neumann => self.neumann.get_or_init(|| FlatPreconditioner::new(&self.grid, top)),
        }
    }

    /// Solve −Δ^φW = rhs in Ω with the given top condition and ∇^φW·e₃ = neu_bottom on Σ_b.
    pub fn solve(
        &self,
        gm: &GraphMap,
        rhs: &VolumeField,
        top: TopCondition<'_>,
        neu_bottom: &SurfaceField,
        guess: Option<&VolumeField>,
    ) -> Result<Solution> {
        let grid = &self.grid;
        grid.check_volume(rhs)?;
        grid.check_surface(top.data())?;
        grid.check_surface(neu_bottom)?;
        let kind = top.kind();
        let nz = grid.nz();
        let mut b = rhs.clone();
        b.index_axis_mut(Axis(0), 0).assign(top.data());
        b.index_axis_mut(Axis(0), nz - 1).assign(neu_bottom);

        let pre = self.preconditioner(kind);
        let x0 = match guess {
            Some(g) => {
                grid.check_volume(g)?;
                g.clone()
            }
            None => grid.zeros_volume(),
        };
        let target = self.options.tol * (1.0 + rms(&b));
        let (field, iterations, residual) = gmres(
            |x| apply_operator(gm, x, kind),
            |r| pre.apply(grid, r),
            &b,
            x0,
            target,
            self.options.restart,
            self.options.max_iter,
        );
        if residual > target || !residual.is_finite() {
            return Err(Error::NonConvergence {
                iterations,
                residual,
                target,
            });
        }
        Ok(Solution {
            field,
            iterations,
            residual,
        })
    }

    /// X − ∇^φθ with −Δ^φθ = −div^φX, θ = 0 on Σ, ∂₃^φθ = 0 on Σ_b.
    pub fn project_divfree(&self, gm: &GraphMap, x: &VectorField) -> Result<VectorField> {
        let grid = &self.grid;
        let rhs = -gm.div(x);
        let zero = grid.zeros_surface();
        let theta = self.solve(gm, &rhs, TopCondition::Dirichlet(&zero), &zero, None)?;
        Ok(x.sub(&gm.grad(&theta.field)))
    }

    /// Projection that keeps X·N on Σ: both boundaries carry homogeneous Neumann
    /// data. Returns the projected field and the compatibility defect
    /// ∫_Σ X·N − ∫_{Σ_b} X₃ (zero for tangential data).
    pub fn project_divfree_neumann(&self, gm: &GraphMap, x: &VectorField) -> Result<(VectorField, f64)> {
        let grid = &self.grid;
        let defect = compatibility_defect(gm, x);
        let rhs = -gm.div(x);
        let zero = grid.zeros_surface();
        let theta = self.solve(gm, &rhs, TopCondition::Neumann(&zero), &zero, None)?;
        Ok((x.sub(&gm.grad(&theta.field)), defect))
    }
}

/// Discrete −Δ^φ with boundary rows.
fn apply_operator(gm: &GraphMap, theta: &VolumeField, top: TopKind) -> VolumeField {
    let nz = gm.grid().nz();
    let g = gm.grad(theta);
    let mut out = -gm.div(&g);
    let top_row = match top {
        TopKind::Dirichlet => theta.index_axis(Axis(0), 0).to_owned(),
        TopKind::Neumann => {
            let p1 = gm.phi1.index_axis(Axis(0), 0);
            let p2 = gm.phi2.index_axis(Axis(0), 0);
            &g[2].index_axis(Axis(0), 0) - &(&p1 * &g[0].index_axis(Axis(0), 0)) - &p2 * &g[1].index_axis(Axis(0), 0)
        }
    };
    out.index_axis_mut(Axis(0), 0).assign(&top_row);
    out.index_axis_mut(Axis(0), nz - 1).assign(&g[2].index_axis(Axis(0), nz - 1));
    out
}

/// Discrete operator of [`PoissonSolver::solve`] with Dirichlet top, exposed
/// for residual checks and manufactured solutions.
pub fn apply_dirichlet_operator(gm: &GraphMap, theta: &VolumeField) -> VolumeField {
    apply_operator(gm, theta, TopKind::Dirichlet)
}

/// −Δ^φθ on every node, without boundary rows.
pub fn neg_laplacian(gm: &GraphMap, theta: &VolumeField) -> VolumeField {
    -gm.laplacian(theta)
}

fn rms(f: &VolumeField) -> f64 {
    (f.iter().map(|x| x * x).sum::<f64>() / f.len() as f64).sqrt()
}

fn dot(a: &VolumeField, b: &VolumeField) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

/// Restarted right-preconditioned GMRES. `target` is on the RMS residual.
fn gmres(
    op: impl Fn(&VolumeField) -> VolumeField,
    pre: impl Fn(&VolumeField) -> VolumeField,
    b: &VolumeField,
    mut x: VolumeField,
    target: f64,
    restart: usize,
    max_iter: usize,
) -> (VolumeField, usize, f64) {
    let scale = (b.len() as f64).sqrt();
    let mut iters = 0;
    let mut r = b - &op(&x);
    let mut res = r.iter().map(|v| v * v).sum::<f64>().sqrt() / scale;
    while res > target && iters < max_iter {
        let beta = res * scale;
        let mut basis: Vec<VolumeField> = vec![&r / beta];
        let mut h: Vec<Vec<f64>> = Vec::new();
        let mut cs: Vec<f64> = Vec::new();
        let mut sn: Vec<f64> = Vec::new();
        let mut g = vec![beta];
        for j in 0..restart {
            let mut w = op(&pre(&basis[j]));
            let mut col = vec![0.0; j + 2];
            for (i, vi) in basis.iter().enumerate() {
                col[i] = dot(&w, vi);
                w.scaled_add(-col[i], vi);
            }
            let norm = w.iter().map(|v| v * v).sum::<f64>().sqrt();
            col[j + 1] = norm;
            for i in 0..j {
                let t = cs[i] * col[i] + sn[i] * col[i + 1];
                col[i + 1] = -sn[i] * col[i] + cs[i] * col[i + 1];
                col[i] = t;
            }
            let denom = col[j].hypot(col[j + 1]);
            let (c, s) = if denom == 0.0 { (1.0, 0.0) } else { (col[j] / denom, col[j + 1] / denom) };
            col[j] = denom;
            col[j + 1] = 0.0;
            cs.push(c);
            sn.push(s);
            g.push(-s * g[j]);
            g[j] *= c;
            h.push(col);
            iters += 1;
            let est = g[j + 1].abs() / scale;
            if est <= target || iters >= max_iter || norm == 0.0 {
                break;
            }
            basis.push(w / norm);
        }
        // back substitution on the triangular Hessenberg factor
        let m = h.len();
        let mut y = vec![0.0; m];
        for i in (0..m).rev() {
            let mut acc = g[i];
            for k in i + 1..m {
                acc -= h[k][i] * y[k];
            }
            y[i] = acc / h[i][i];
        }
        let mut update = b.clone();
        update.fill(0.0);
        for (yi, vi) in y.iter().zip(&basis) {
            update.scaled_add(*yi, vi);
        }
        x += &pre(&update);
        r = b - &op(&x);
        res = r.iter().map(|v| v * v).sum::<f64>().sqrt() / scale;
    }
    (x, iters, res)
}

/// One-shot solve with default options and Dirichlet top data.
pub fn solve_poisson_phi(
    rhs: &VolumeField,
    dir_top: &SurfaceField,
    neu_bottom: &SurfaceField,
    gm: &GraphMap,
    grid: &Grid,
) -> Result<VolumeField> {
    PoissonSolver::new(grid)
        .solve(gm, rhs, TopCondition::Dirichlet(dir_top), neu_bottom, None)
        .map(|s| s.field)
}

/// One-shot divergence-free projection.
pub fn project_divfree(x: &VectorField, gm: &GraphMap, grid: &Grid) -> Result<VectorField> {
    PoissonSolver::new(grid).project_divfree(gm, x)
}

/// ∫_Σ X·N − ∫_{Σ_b} X₃, the flux balance that an all-Neumann problem requires to vanish.
pub fn compatibility_defect(gm: &GraphMap, x: &VectorField) -> f64 {
    let grid = gm.grid();
    let n = gm.normal_top();
    let top: SurfaceField = (0..3).map(|i| &grid.top(&x[i]) * &n[i]).fold(grid.zeros_surface(), |a, b| a + b);
    grid.quad_surface(&top) - grid.quad_surface(&grid.bottom(&x[2]))
}

/// Twisted gradients ∂ᵢ^φ Xₗ, indexed `[l][i]`.
pub fn gradient_table(gm: &GraphMap, x: &VectorField) -> [VectorField; 3] {
    std::array::from_fn(|l| gm.grad(&x[l]))
}

/// Σ_{i,l} ∂ᵢXₗ ∂ₗXᵢ
fn contraction(g: &[VectorField; 3]) -> VolumeField {
    let mut out = &g[0][0] * &g[0][0];
    for l in 0..3 {
        for i in 0..3 {
            if (l, i) != (0, 0) {
                out += &(&g[l][i] * &g[i][l]);
            }
        }
    }
    out
}

/// Pressure data from the constrained form of the momentum equation:
/// rhs = ∂ᵢvₗ∂ₗvᵢ − ∂ᵢF_{lk}∂ₗF_{ik}, and the bottom trace of (F_k·∇^φ)F_{3k}.
pub fn pressure_rhs(v: &VectorField, f: &[VectorField; 3], gm: &GraphMap) -> (VolumeField, SurfaceField) {
    let mut rhs = contraction(&gradient_table(gm, v));
    let mut force3 = gm.grid().zeros_volume();
    for fk in f {
        let gf = gradient_table(gm, fk);
        rhs -= &contraction(&gf);
        force3 += &fk.dot(&gf[2]);
    }
    (rhs, gm.grid().bottom(&force3))
}

/// Pressure data that keeps the discrete div^φv stationary in the interior,
/// given the pressure-free tendency `a_star` of v. Uses ∂ₜψ from the graph map.
pub fn pressure_rhs_consistent(a_star: &VectorField, v: &VectorField, gm: &GraphMap) -> (VolumeField, SurfaceField) {
    let grid = gm.grid();
    let (nz, ny, nx) = grid.volume_shape();
    let psi1 = grid.d_tan(&gm.psi, TanAxis::X1);
    let psi2 = grid.d_tan(&gm.psi, TanAxis::X2);
    let pt1 = grid.d_tan(&gm.psi_t, TanAxis::X1);
    let pt2 = grid.d_tan(&gm.psi_t, TanAxis::X2);
    let d3: Vec<VolumeField> = v.iter().map(|c| grid.d_vert(c)).collect();
    let mut m = grid.zeros_volume();
    for k in 0..nz {
        let (chi, dchi) = (gm.chi[k], gm.dchi[k]);
        for j in 0..ny {
            for i in 0..nx {
                let ij = gm.inv_jac[[k, j, i]];
                let pt = gm.psi_t[[j, i]];
                // time derivatives of φτ/J and 1/J
                let a1t = chi * pt1[[j, i]] * ij - chi * psi1[[j, i]] * dchi * pt * ij * ij;
                let a2t = chi * pt2[[j, i]] * ij - chi * psi2[[j, i]] * dchi * pt * ij * ij;
                let it = -dchi * pt * ij * ij;
                m[[k, j, i]] = -a1t * d3[0][[k, j, i]] - a2t * d3[1][[k, j, i]] + it * d3[2][[k, j, i]];
            }
        }
    }
    let rhs = -(gm.div(a_star) + m);
    (rhs, grid.bottom(&a_star[2]))
}

/// Norms entering the div-curl estimate for X at order s.
#[derive(Clone, Debug, PartialEq)]
pub struct HodgeReport {
    pub norm_s: f64,
    pub div_norm: f64,
    pub curl_norm: f64,
    pub tangential_norm: f64,
    pub norm0: f64,
    /// ‖X‖ₛ² over the sum of the other four squares; `None` when that sum is zero.
    pub ratio: Option<f64>,
}

pub fn hodge_report(x: &VectorField, gm: &GraphMap, s: usize) -> Result<HodgeReport> {
    if !(1..=4).contains(&s) {
        return Err(Error::InvalidMultiIndex(format!("hodge order must be in 1..=4, got {s}")));
    }
    let grid = gm.grid();
    let norm_s = x.sobolev_norm(grid, s);
    let div = gm.div(x);
    let div_norm = grid.sobolev_norm(&div, s - 1);
    let curl_norm = gm.curl(x).sobolev_norm(grid, s - 1);
    let mut tan2 = 0.0;
    for a in 0..=s {
        for c in x.iter() {
            let d = grid.d_tan_n(&grid.d_tan_n(c, TanAxis::X1, a), TanAxis::X2, s - a);
            tan2 += grid.norm0(&d).powi(2);
        }
    }
    let tangential_norm = tan2.sqrt();
    let norm0 = x.norm0(grid);
    let denom = div_norm.powi(2) + curl_norm.powi(2) + tan2 + norm0.powi(2);
    let ratio = (denom > 0.0).then(|| norm_s.powi(2) / denom);
    Ok(HodgeReport {
        norm_s,
        div_norm,
        curl_norm,
        tangential_norm,
        norm0,
        ratio,
    })
}

/// Interior rows only, used where boundary rows carry boundary conditions.
pub fn interior(f: &VolumeField) -> ndarray::ArrayView3<'_, f64> {
    let nz = f.shape()[0];
    f.slice(s![1..nz - 1, .., ..])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphmap::Cutoff;

    fn map(grid: &Grid, psi: impl Fn(f64, f64) -> f64) -> GraphMap {
        let psi = grid.surface_fn(psi);
        let sup = psi.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        GraphMap::build(grid, &Cutoff::linear(grid, sup), &psi, &grid.zeros_surface(), 0.0).unwrap()
    }

    #[test]
    fn zero_data_gives_zero() {
        let g = Grid::new(8, 8, 9, 1.0).unwrap();
        let gm = map(&g, |a, _| 0.1 * a.cos());
        let w = solve_poisson_phi(&g.zeros_volume(), &g.zeros_surface(), &g.zeros_surface(), &gm, &g).unwrap();
        assert!(w.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn flat_harmonic_manufactured_solution() {
        let g = Grid::new(16, 16, 17, 1.0).unwrap();
        let gm = map(&g, |_, _| 0.0);
        let exact = g.volume_fn(|a, _, z| a.cos() * z.exp());
        let top = g.surface_fn(|a, _| a.cos());
        let bot = g.surface_fn(|a, _| a.cos() * (-1.0f64).exp());
        let w = solve_poisson_phi(&g.zeros_volume(), &top, &bot, &gm, &g).unwrap();
        let err = (&w - &exact).iter().fold(0.0f64, |m, e| m.max(e.abs()));
        assert!(err < 1e-10, "{err}");
    }

    #[test]
    fn operator_consistent_manufactured_solution() {
        let g = Grid::new(16, 16, 17, 1.0).unwrap();
        let gm = map(&g, |a, b| 0.05 * (a + b).cos());
        let exact = g.volume_fn(|a, b, z| (a - b).sin() * (1.3 * z).cosh() + a.cos() * z);
        let rhs = neg_laplacian(&gm, &exact);
        let top = g.top(&exact);
        let bot = g.bottom(&gm.partial(2, &exact));
        let sol = PoissonSolver::new(&g)
            .solve(&gm, &rhs, TopCondition::Dirichlet(&top), &bot, None)
            .unwrap();
        let err = (&sol.field - &exact).iter().fold(0.0f64, |m, e| m.max(e.abs()));
        assert!(err < 1e-8, "{err}");
        assert!(sol.iterations < 100, "{}", sol.iterations);
    }

    #[test]
    fn neumann_top_solution_up_to_constant() {
        let g = Grid::new(16, 16, 17, 1.0).unwrap();
        let gm = map(&g, |a, _| 0.05 * a.sin());
        let exact = g.volume_fn(|a, b, z| a.cos() * b.sin() * (z + 0.5).powi(2));
        let rhs = neg_laplacian(&gm, &exact);
        let gr = gm.grad(&exact);
        let n = gm.normal();
        let top = g.top(&gr.dot(&n));
        let bot = g.bottom(&gr[2]);
        let sol = PoissonSolver::new(&g)
            .solve(&gm, &rhs, TopCondition::Neumann(&top), &bot, None)
            .unwrap();
        let diff = &sol.field - &exact;
        let mean = diff.mean().unwrap();
        let err = diff.iter().fold(0.0f64, |m, e| m.max((e - mean).abs()));
        assert!(err < 1e-8, "{err}");
    }

    #[test]
    fn weak_form_is_symmetric() {
        let g = Grid::new(16, 16, 17, 1.0).unwrap();
        let gm = map(&g, |a, b| 0.1 * a.cos() + 0.05 * b.sin());
        // θ = 0 on top and ∂₃θ = 0 on the bottom
        let f = g.volume_fn(|a, b, z| (a + b).cos() * z * (z + 2.0));
        let h = g.volume_fn(|a, _, z| (a.sin() + 0.5) * z * (z + 2.0));
        let lhs = gm.integrate(&(&neg_laplacian(&gm, &f) * &h));
        let rhs = gm.integrate(&gm.grad(&f).dot(&gm.grad(&h)));
        assert!((lhs - rhs).abs() <= 1e-8 * rhs.abs().max(1.0), "{lhs} vs {rhs}");
    }

    #[test]
    fn projection_examples() {
        let g = Grid::new(16, 16, 17, 1.0).unwrap();
        let flat = map(&g, |_, _| 0.0);
        let e3 = VectorField([g.zeros_volume(), g.zeros_volume(), g.volume_fn(|_, _, _| 1.0)]);
        let p = project_divfree(&e3, &flat, &g).unwrap();
        assert!(p.sub(&e3).max_abs() < 1e-10);

        let gm = map(&g, |a, b| 0.1 * a.cos() + 0.05 * b.sin());
        let theta = g.volume_fn(|a, b, z| (a + 2.0 * b).sin() * z * (z + 2.0));
        let x = gm.grad(&theta);
        let p = project_divfree(&x, &gm, &g).unwrap();
        assert!(p.max_abs() < 1e-8, "{}", p.max_abs());

        let solver = PoissonSolver::new(&g);
        let y = VectorField([
            g.volume_fn(|a, b, z| (a - b).sin() * z.exp()),
            g.volume_fn(|a, _, z| a.cos() * z),
            g.volume_fn(|_, b, z| b.sin() * (z + 1.0)),
        ]);
        let p1 = solver.project_divfree(&gm, &y).unwrap();
        let p2 = solver.project_divfree(&gm, &p1).unwrap();
        assert!(p2.sub(&p1).max_abs() < 1e-8);
        let div = gm.div(&p1);
        let bound = 1e-8 * (1.0 + y.sobolev_norm(&g, 1));
        let interior_div = interior(&div).iter().fold(0.0f64, |m, e| m.max(e.abs()));
        assert!(interior_div < 1e-7, "{interior_div}");
        assert!(g.norm0(&div) < bound, "{}", g.norm0(&div));
    }

    #[test]
    fn shear_pressure_data_vanishes() {
        let g = Grid::new(16, 16, 9, 1.0).unwrap();
        let gm = map(&g, |_, _| 0.0);
        let zero = VectorField::zeros(&g);
        let shear_v = VectorField([g.volume_fn(|_, b, _| b.cos()), g.zeros_volume(), g.zeros_volume()]);
        let shear_f = VectorField([g.volume_fn(|_, b, _| 0.2 * b.cos()), g.zeros_volume(), g.zeros_volume()]);
        let zf = [zero.clone(), zero.clone(), zero.clone()];
        let (rhs, bot) = pressure_rhs(&zero, &zf, &gm);
        assert!(rhs.iter().chain(bot.iter()).all(|&x| x == 0.0));
        let (rhs, _) = pressure_rhs(&shear_v, &zf, &gm);
        assert!(rhs.iter().all(|x| x.abs() < 1e-14));
        let (rhs, bot) = pressure_rhs(&zero, &[shear_f, zero.clone(), zero.clone()], &gm);
        assert!(rhs.iter().chain(bot.iter()).all(|x| x.abs() < 1e-14));
    }

    #[test]
    fn hodge_report_of_shear() {
        let g = Grid::new(16, 16, 9, 1.0).unwrap();
        let gm = map(&g, |_, _| 0.0);
        let x = VectorField([g.volume_fn(|_, b, _| b.cos()), g.zeros_volume(), g.zeros_volume()]);
        let r = hodge_report(&x, &gm, 1).unwrap();
        let pi2 = std::f64::consts::PI.powi(2);
        assert!(r.div_norm < 1e-12);
        // curl = (0, 0, sin x₂), ‖·‖₀² = 2π²
        assert!((r.curl_norm - (2.0 * pi2).sqrt()).abs() < 1e-8);
        assert!((r.norm0 - (2.0 * pi2).sqrt()).abs() < 1e-8);
        assert!((r.tangential_norm - (2.0 * pi2).sqrt()).abs() < 1e-8);
        assert!((r.norm_s - (4.0 * pi2).sqrt()).abs() < 1e-8);
        let zero = hodge_report(&VectorField::zeros(&g), &gm, 2).unwrap();
        assert_eq!(zero.ratio, None);
        assert!(hodge_report(&x, &gm, 0).is_err());
    }
}
