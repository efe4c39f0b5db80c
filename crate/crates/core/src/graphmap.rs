//! Graphical coordinates: the cutoff χ, the extension φ = x₃ + χ(x₃)ψ, and the
//! twisted operators built from the cofactor matrix A.

use ndarray::{Array1, Array2, Axis, Zip};

use crate::error::{Error, Result};
use crate::grid::{Grid, SurfaceField, TanAxis, VectorField, VolumeField};

/// Vertical profile of the cutoff.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CutoffProfile {
    /// χ ≡ 1 on (−δ₀, 0], a C² monotone ramp of width `width` below it, χ ≡ 0 beneath.
    /// The ramp slope rises to its maximum through cubic smoothsteps of width `corner`.
    Plateau { delta0: f64, width: f64, corner: f64 },
    /// χ = 1 + x₃/b. No plateau, but J = ∂₃φ is independent of x₃, so the twisted
    /// operators stay exact on polynomial-in-x₃ data.
    Linear,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Cutoff {
    pub profile: CutoffProfile,
    depth: f64,
    /// 1/(1 + sup|ψ₀|)
    pub lip: f64,
    /// χ at the vertical nodes.
    pub chi: Array1<f64>,
    /// χ' at the vertical nodes.
    pub dchi: Array1<f64>,
}

/// Plateau cutoff with max|χ'| ≤ 1/(1 + ψ₀_sup).
pub fn make_cutoff(grid: &Grid, delta0: f64, psi0_sup: f64) -> Result<Cutoff> {
    Cutoff::plateau(grid, delta0, psi0_sup)
}

impl Cutoff {
    pub fn plateau(grid: &Grid, delta0: f64, psi0_sup: f64) -> Result<Self> {
        let b = grid.depth();
        if !(delta0 > 0.0) || !(psi0_sup >= 0.0) || !psi0_sup.is_finite() {
            return Err(Error::InvalidCutoff(format!(
                "need delta0 > 0 and psi0_sup >= 0, got {delta0}, {psi0_sup}"
            )));
        }
        let needed = 1.0 + psi0_sup;
        let available = b - delta0;
        if available <= needed {
            return Err(Error::InfeasibleCutoff { needed, available });
        }
        if delta0 >= b / 4.0 {
            return Err(Error::InvalidCutoff(format!("delta0 = {delta0} must be below b/4 = {}", b / 4.0)));
        }
        let slack = available - needed;
        // leave 10% of the slack as a zero layer above the bottom
        let width = needed + 0.9 * slack;
        let corner = (0.5 * width).min(0.9 * slack);
        let profile = CutoffProfile::Plateau { delta0, width, corner };
        Ok(Self::sample(grid, profile, 1.0 / needed))
    }

    pub fn linear(grid: &Grid, psi0_sup: f64) -> Self {
        Self::sample(grid, CutoffProfile::Linear, 1.0 / (1.0 + psi0_sup.abs()))
    }

    fn sample(grid: &Grid, profile: CutoffProfile, lip: f64) -> Self {
        let depth = grid.depth();
        let mut chi = Array1::zeros(grid.nz());
        let mut dchi = Array1::zeros(grid.nz());
        for (k, &z) in grid.x3().iter().enumerate() {
            let (c, d) = eval_profile(profile, depth, z);
            chi[k] = c;
            dchi[k] = d;
        }
        Self {
            profile,
            depth,
            lip,
            chi,
            dchi,
        }
    }

    /// (χ, χ') at an arbitrary x₃ ∈ [−b, 0].
    pub fn eval(&self, x3: f64) -> (f64, f64) {
        eval_profile(self.profile, self.depth, x3)
    }

    pub fn max_slope(&self) -> f64 {
        match self.profile {
            CutoffProfile::Plateau { width, corner, .. } => 1.0 / (width - corner),
            CutoffProfile::Linear => 1.0 / self.depth,
        }
    }

    /// Whether max|χ'| respects the 1/(1 + sup|ψ₀|) bound.
    pub fn satisfies_bound(&self) -> bool {
        self.max_slope() <= self.lip * (1.0 + 1e-12)
    }
}

fn smoothstep_integral(t: f64) -> f64 {
    // ∫₀ᵗ (3s² − 2s³) ds
    t * t * t - 0.5 * t * t * t * t
}

fn eval_profile(profile: CutoffProfile, depth: f64, z: f64) -> (f64, f64) {
    match profile {
        CutoffProfile::Linear => (1.0 + z / depth, 1.0 / depth),
        CutoffProfile::Plateau { delta0, width, corner } => {
            let m = 1.0 / (width - corner);
            let u = z + delta0 + width;
            if u >= width {
                (1.0, 0.0)
            } else if u <= 0.0 {
                (0.0, 0.0)
            } else if u < corner {
                let t = u / corner;
                (m * corner * smoothstep_integral(t), m * t * t * (3.0 - 2.0 * t))
            } else if u > width - corner {
                let t = (width - u) / corner;
                (1.0 - m * corner * smoothstep_integral(t), m * t * t * (3.0 - 2.0 * t))
            } else {
                (m * (0.5 * corner + u - corner), m)
            }
        }
    }
}

/// Geometry of the graph map at one instant.
#[derive(Clone, Debug)]
pub struct GraphMap {
    grid: Grid,
    pub t: f64,
    pub psi: SurfaceField,
    pub psi_t: SurfaceField,
    pub chi: Array1<f64>,
    pub dchi: Array1<f64>,
    pub phi: VolumeField,
    /// ∂₁φ = χ∂₁ψ
    pub phi1: VolumeField,
    /// ∂₂φ = χ∂₂ψ
    pub phi2: VolumeField,
    /// J = ∂₃φ = 1 + χ'ψ
    pub jac: VolumeField,
    pub inv_jac: VolumeField,
    /// ∂ₜφ = χ∂ₜψ
    pub phi_t: VolumeField,
    /// min J over the nodes
    pub c0: f64,
}

impl GraphMap {
    pub fn build(grid: &Grid, cutoff: &Cutoff, psi: &SurfaceField, psi_t: &SurfaceField, t: f64) -> Result<Self> {
        grid.check_surface(psi)?;
        grid.check_surface(psi_t)?;
        let (nz, ny, nx) = grid.volume_shape();
        let psi1 = grid.d_tan(psi, TanAxis::X1);
        let psi2 = grid.d_tan(psi, TanAxis::X2);
        let chi = cutoff.chi.clone();
        let dchi = cutoff.dchi.clone();
        let shape = (nz, ny, nx);
        let x3 = grid.x3();
        let phi = VolumeField::from_shape_fn(shape, |(k, j, i)| x3[k] + chi[k] * psi[[j, i]]);
        let phi1 = VolumeField::from_shape_fn(shape, |(k, j, i)| chi[k] * psi1[[j, i]]);
        let phi2 = VolumeField::from_shape_fn(shape, |(k, j, i)| chi[k] * psi2[[j, i]]);
        let jac = VolumeField::from_shape_fn(shape, |(k, j, i)| 1.0 + dchi[k] * psi[[j, i]]);
        let phi_t = VolumeField::from_shape_fn(shape, |(k, j, i)| chi[k] * psi_t[[j, i]]);
        let c0 = jac.iter().copied().fold(f64::INFINITY, f64::min);
        if !(c0 > 0.0) {
            return Err(Error::DegenerateMap { min_jacobian: c0, t });
        }
        let inv_jac = jac.mapv(|j| 1.0 / j);
        Ok(Self {
            grid: grid.clone(),
            t,
            psi: psi.clone(),
            psi_t: psi_t.clone(),
            chi,
            dchi,
            phi,
            phi1,
            phi2,
            jac,
            inv_jac,
            phi_t,
            c0,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Entry A_{ij} of the cofactor matrix as a field.
    pub fn cofactor(&self, i: usize, j: usize) -> VolumeField {
        match (i, j) {
            (0, 0) | (1, 1) => self.grid.volume_fn(|_, _, _| 1.0),
            (0, _) | (1, _) => self.grid.zeros_volume(),
            (2, 0) => -(&self.phi1 * &self.inv_jac),
            (2, 1) => -(&self.phi2 * &self.inv_jac),
            (2, 2) => self.inv_jac.clone(),
            _ => panic!("cofactor index out of range"),
        }
    }

    /// Interior normal 𝐍 = (−∂₁φ, −∂₂φ, 1).
    pub fn normal(&self) -> VectorField {
        VectorField([-&self.phi1, -&self.phi2, self.grid.volume_fn(|_, _, _| 1.0)])
    }

    /// Surface normal N = (−∂₁ψ, −∂₂ψ, 1).
    pub fn normal_top(&self) -> [SurfaceField; 3] {
        [
            -self.grid.d_tan(&self.psi, TanAxis::X1),
            -self.grid.d_tan(&self.psi, TanAxis::X2),
            self.grid.surface_fn(|_, _| 1.0),
        ]
    }

    /// ∂ᵢ^φ f for i ∈ {0, 1, 2}, given the flat derivatives (∂₁f, ∂₂f, ∂₃f).
    fn twist(&self, i: usize, d: &[VolumeField; 3]) -> VolumeField {
        match i {
            0 => twisted_tan(&d[0], &self.phi1, &self.inv_jac, &d[2]),
            1 => twisted_tan(&d[1], &self.phi2, &self.inv_jac, &d[2]),
            2 => &d[2] * &self.inv_jac,
            _ => panic!("component index out of range"),
        }
    }

    fn flat_gradient(&self, f: &VolumeField) -> [VolumeField; 3] {
        [
            self.grid.d_tan(f, TanAxis::X1),
            self.grid.d_tan(f, TanAxis::X2),
            self.grid.d_vert(f),
        ]
    }

    /// ∂ᵢ^φ f = A_{ji}∂ⱼ f (component index 0-based).
    pub fn partial(&self, i: usize, f: &VolumeField) -> VolumeField {
        match i {
            0 | 1 => {
                let axis = if i == 0 { TanAxis::X1 } else { TanAxis::X2 };
                let phi_tau = if i == 0 { &self.phi1 } else { &self.phi2 };
                twisted_tan(&self.grid.d_tan(f, axis), phi_tau, &self.inv_jac, &self.grid.d_vert(f))
            }
            2 => &self.grid.d_vert(f) * &self.inv_jac,
            _ => panic!("component index out of range"),
        }
    }

    pub fn grad(&self, f: &VolumeField) -> VectorField {
        let d = self.flat_gradient(f);
        VectorField::from_fn(|i| self.twist(i, &d))
    }

    pub fn div(&self, x: &VectorField) -> VolumeField {
        let d3: Vec<VolumeField> = x.iter().map(|c| self.grid.d_vert(c)).collect();
        let mut out = self.grid.d_tan(&x[0], TanAxis::X1) + self.grid.d_tan(&x[1], TanAxis::X2);
        let vert = &(&d3[2] - &(&self.phi1 * &d3[0])) - &(&self.phi2 * &d3[1]);
        Zip::from(&mut out)
            .and(&vert)
            .and(&self.inv_jac)
            .for_each(|o, &c, &ij| *o += c * ij);
        out
    }

    /// J·div^φ X in conservative form: ∂τ(J Xτ) + ∂₃(X·𝐍).
    pub fn div_conservative(&self, x: &VectorField) -> VolumeField {
        let xn = &x[2] - &(&self.phi1 * &x[0]) - &self.phi2 * &x[1];
        self.grid.d_tan(&(&self.jac * &x[0]), TanAxis::X1)
            + self.grid.d_tan(&(&self.jac * &x[1]), TanAxis::X2)
            + self.grid.d_vert(&xn)
    }

    pub fn curl(&self, x: &VectorField) -> VectorField {
        let g: Vec<VectorField> = x.iter().map(|c| self.grad(c)).collect();
        VectorField([
            &g[2][1] - &g[1][2],
            &g[0][2] - &g[2][0],
            &g[1][0] - &g[0][1],
        ])
    }

    pub fn laplacian(&self, f: &VolumeField) -> VolumeField {
        self.div(&self.grad(f))
    }

    /// (X·∇^φ) f
    pub fn directional(&self, x: &VectorField, f: &VolumeField) -> VolumeField {
        let g = self.grad(f);
        x.dot(&g)
    }

    /// (X·∇^φ) Y componentwise.
    pub fn directional_vec(&self, x: &VectorField, y: &VectorField) -> VectorField {
        VectorField::from_fn(|i| self.directional(x, &y[i]))
    }

    /// The vertical transport speed W = (v·𝐍 − ∂ₜφ)/J.
    pub fn vertical_speed(&self, v: &VectorField) -> VolumeField {
        let mut w = &v[2] - &self.phi_t;
        Zip::from(&mut w)
            .and(&v[0])
            .and(&v[1])
            .and(&self.phi1)
            .and(&self.phi2)
            .and(&self.inv_jac)
            .for_each(|w, &a, &b, &p1, &p2, &ij| *w = (*w - p1 * a - p2 * b) * ij);
        w
    }

    /// Advective part v̄·∂̄f + W∂₃f of D_t^φ.
    pub fn advect(&self, v: &VectorField, f: &VolumeField) -> VolumeField {
        let w = self.vertical_speed(v);
        self.advect_with(v, &w, f)
    }

    pub(crate) fn advect_with(&self, v: &VectorField, w: &VolumeField, f: &VolumeField) -> VolumeField {
        let mut out = &v[0] * &self.grid.d_tan(f, TanAxis::X1);
        out += &(&v[1] * &self.grid.d_tan(f, TanAxis::X2));
        out += &(w * &self.grid.d_vert(f));
        out
    }

    /// D_t^φ f = f_t + v̄·∂̄f + (v·𝐍 − ∂ₜφ)∂₃^φ f.
    pub fn material_derivative(&self, f_t: &VolumeField, f: &VolumeField, v: &VectorField) -> VolumeField {
        f_t + &self.advect(v, f)
    }

    /// Integral ∫_Ω f J.
    pub fn integrate(&self, f: &VolumeField) -> f64 {
        self.grid.quad_volume(&(f * &self.jac))
    }

    pub fn top(&self, f: &VolumeField) -> SurfaceField {
        self.grid.top(f)
    }
}

fn twisted_tan(d_tau: &VolumeField, phi_tau: &VolumeField, inv_jac: &VolumeField, d3: &VolumeField) -> VolumeField {
    let mut out = d_tau.clone();
    Zip::from(&mut out)
        .and(phi_tau)
        .and(inv_jac)
        .and(d3)
        .for_each(|o, &p, &ij, &d| *o -= p * ij * d);
    out
}

/// κ = ∇̄·(∇̄ψ/√(1+|∇̄ψ|²)).
pub fn mean_curvature(psi: &SurfaceField, grid: &Grid) -> SurfaceField {
    let p1 = grid.d_tan(psi, TanAxis::X1);
    let p2 = grid.d_tan(psi, TanAxis::X2);
    let g = Zip::from(&p1).and(&p2).map_collect(|&a, &b| 1.0 / (1.0 + a * a + b * b).sqrt());
    grid.d_tan(&(&p1 * &g), TanAxis::X1) + grid.d_tan(&(&p2 * &g), TanAxis::X2)
}

/// Surface area element √(1+|∇̄ψ|²).
pub fn area_element(psi: &SurfaceField, grid: &Grid) -> SurfaceField {
    let p1 = grid.d_tan(psi, TanAxis::X1);
    let p2 = grid.d_tan(psi, TanAxis::X2);
    Zip::from(&p1).and(&p2).map_collect(|&a, &b| (1.0 + a * a + b * b).sqrt())
}

/// Restriction of a volume field to a plane index (0 = top).
pub fn plane(f: &VolumeField, k: usize) -> Array2<f64> {
    f.index_axis(Axis(0), k).to_owned()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn flat(grid: &Grid) -> GraphMap {
        let c = Cutoff::linear(grid, 0.0);
        GraphMap::build(grid, &c, &grid.zeros_surface(), &grid.zeros_surface(), 0.0).unwrap()
    }

    #[test]
    fn plateau_cutoff_example() {
        let g = Grid::new(8, 8, 65, 4.0).unwrap();
        let c = make_cutoff(&g, 0.5, 1.0).unwrap();
        assert_eq!(c.eval(0.0), (1.0, 0.0));
        assert_eq!(c.eval(-4.0), (0.0, 0.0));
        assert!(c.max_slope() <= 0.5 && c.satisfies_bound());
        for z in [-0.1, -0.3, -0.49] {
            assert_eq!(c.eval(z).1, 0.0);
        }
        assert!(c.dchi.iter().all(|&d| (0.0..=0.5).contains(&d)));
    }

    #[test]
    fn plateau_cutoff_is_c2_and_integrates_its_slope() {
        let g = Grid::new(8, 8, 9, 4.0).unwrap();
        let c = make_cutoff(&g, 0.5, 1.0).unwrap();
        let h = 1e-4;
        let mut max_second: f64 = 0.0;
        let mut z = -4.0 + h;
        while z < -h {
            let (cm, dm) = c.eval(z - h);
            let (c0, _) = c.eval(z);
            let (cp, dp) = c.eval(z + h);
            let fd1 = (cp - cm) / (2.0 * h);
            assert!((fd1 - c.eval(z).1).abs() < 1e-6, "slope mismatch at {z}");
            let second = (cp - 2.0 * c0 + cm) / (h * h);
            max_second = max_second.max(second.abs());
            // continuity of χ'
            assert!((dp - dm).abs() < 1e-3);
            z += 0.01;
        }
        assert!(max_second < 10.0);
    }

    #[test]
    fn infeasible_cutoff_is_rejected() {
        let g = Grid::new(8, 8, 9, 1.0).unwrap();
        match make_cutoff(&g, 0.5, 1.0) {
            Err(Error::InfeasibleCutoff { needed, available }) => {
                assert_eq!(needed, 2.0);
                assert_eq!(available, 0.5);
            }
            other => panic!("expected infeasible cutoff, got {other:?}"),
        }
    }

    #[test]
    fn flat_map_is_identity() {
        let g = Grid::new(8, 8, 9, 1.0).unwrap();
        let gm = flat(&g);
        assert_eq!(gm.c0, 1.0);
        assert!((&gm.phi - &g.volume_fn(|_, _, z| z)).iter().all(|e| e.abs() < 1e-15));
        for i in 0..3 {
            for j in 0..3 {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!(gm.cofactor(i, j).iter().all(|&a| a == expected));
            }
        }
        let n = gm.normal_top();
        assert!(n[0].iter().chain(n[1].iter()).all(|&x| x == 0.0));
    }

    #[test]
    fn top_normal_of_cosine_surface() {
        let g = Grid::new(16, 16, 9, 1.0).unwrap();
        let psi = g.surface_fn(|x, _| 0.1 * x.cos());
        let gm = GraphMap::build(&g, &Cutoff::linear(&g, 0.1), &psi, &g.zeros_surface(), 0.0).unwrap();
        let n = gm.normal_top();
        let expected = g.surface_fn(|x, _| 0.1 * x.sin());
        assert!((&n[0] - &expected).iter().all(|e| e.abs() < 1e-14));
        // 𝐍 on Σ equals N and is vertical on Σ_b
        let nn = gm.normal();
        assert!((&g.top(&nn[0]) - &n[0]).iter().all(|e| e.abs() < 1e-14));
        assert!(g.bottom(&nn[0]).iter().all(|e| e.abs() < 1e-14));
    }

    #[test]
    fn degenerate_map_is_rejected() {
        let g = Grid::new(8, 8, 9, 1.0).unwrap();
        let psi = g.surface_fn(|x, _| -1.5 * x.cos().max(0.0));
        let r = GraphMap::build(&g, &Cutoff::linear(&g, 1.5), &psi, &g.zeros_surface(), 0.25);
        assert!(matches!(r, Err(Error::DegenerateMap { t, .. }) if t == 0.25));
    }

    #[test]
    fn flat_operators_match_analytic() {
        let g = Grid::new(16, 16, 17, 1.0).unwrap();
        let gm = flat(&g);
        // X = ∇(cos x₁ eˣ³), div X = 0
        let x = VectorField([
            g.volume_fn(|a, _, z| -a.sin() * z.exp()),
            g.zeros_volume(),
            g.volume_fn(|a, _, z| a.cos() * z.exp()),
        ]);
        assert!(gm.div(&x).iter().all(|e| e.abs() < 1e-10));
        let y = VectorField([g.volume_fn(|a, _, _| a.sin()), g.zeros_volume(), g.zeros_volume()]);
        let dy = gm.div(&y);
        assert!((&dy - &g.volume_fn(|a, _, _| a.cos())).iter().all(|e| e.abs() < 1e-10));
    }

    #[test]
    fn curl_of_gradient_vanishes() {
        let g = Grid::new(32, 32, 17, 1.0).unwrap();
        let psi = g.surface_fn(|a, b| 0.1 * a.cos() + 0.05 * b.sin());
        let gm = GraphMap::build(&g, &Cutoff::linear(&g, 0.15), &psi, &g.zeros_surface(), 0.0).unwrap();
        let f = g.volume_fn(|a, b, z| (a + 2.0 * b).sin() * (z * 0.7).cosh());
        let c = gm.curl(&gm.grad(&f));
        assert!(c.max_abs() < 1e-8, "{}", c.max_abs());
    }

    #[test]
    fn gradient_matches_chain_rule_pullback() {
        // F(x) = g(x̄, φ(x)); ∇^φF should be (∇g)(x̄, φ). The oracle gradient of g
        // is taken by centered differences in physical coordinates.
        let g = Grid::new(32, 32, 17, 1.0).unwrap();
        let psi = g.surface_fn(|a, _| 0.1 * a.cos());
        let gm = GraphMap::build(&g, &Cutoff::linear(&g, 0.1), &psi, &g.zeros_surface(), 0.0).unwrap();
        let phys = |y1: f64, y2: f64, y3: f64| y1.sin() * y2.cos() * y3.exp();
        let f = VolumeField::from_shape_fn(g.volume_shape(), |(k, j, i)| phys(g.x1()[i], g.x2()[j], gm.phi[[k, j, i]]));
        let grad = gm.grad(&f);
        let err_at = |h: f64| {
            let mut err: f64 = 0.0;
            for ((k, j, i), &p) in gm.phi.indexed_iter() {
                let (y1, y2) = (g.x1()[i], g.x2()[j]);
                let fd = [
                    (phys(y1 + h, y2, p) - phys(y1 - h, y2, p)) / (2.0 * h),
                    (phys(y1, y2 + h, p) - phys(y1, y2 - h, p)) / (2.0 * h),
                    (phys(y1, y2, p + h) - phys(y1, y2, p - h)) / (2.0 * h),
                ];
                for c in 0..3 {
                    err = err.max((fd[c] - grad[c][[k, j, i]]).abs());
                }
            }
            err
        };
        let (e1, e2) = (err_at(1e-2), err_at(5e-3));
        assert!(e1 < 1e-4, "{e1}");
        let order = (e1 / e2).log2();
        assert!((order - 2.0).abs() < 0.05, "order {order}");
    }

    #[test]
    fn material_derivative_examples() {
        let g = Grid::new(16, 16, 9, 1.0).unwrap();
        let gm = flat(&g);
        let zero_v = VectorField::zeros(&g);
        let f = g.volume_fn(|a, b, z| a.cos() * b.sin() + z);
        let ft = g.volume_fn(|a, _, _| a.sin());
        assert!((&gm.material_derivative(&ft, &f, &zero_v) - &ft).iter().all(|e| e.abs() < 1e-15));

        let psi = g.surface_fn(|a, _| 0.1 * a.cos());
        let psit = g.surface_fn(|a, _| 0.3 * a.sin());
        let gm2 = GraphMap::build(&g, &Cutoff::linear(&g, 0.1), &psi, &psit, 0.0).unwrap();
        let ones = g.volume_fn(|_, _, _| 1.0);
        let v = VectorField([ones.clone(), f.clone(), ft.clone()]);
        let d = gm2.material_derivative(&g.zeros_volume(), &ones, &v);
        assert!(d.iter().all(|e| e.abs() < 1e-12));

        // f = cos(x₁ − t) advected by e₁
        let t = 0.3;
        let f = g.volume_fn(|a, _, _| (a - t).cos());
        let ft = g.volume_fn(|a, _, _| (a - t).sin());
        let e1 = VectorField([ones, g.zeros_volume(), g.zeros_volume()]);
        assert!(gm.material_derivative(&ft, &f, &e1).iter().all(|e| e.abs() < 1e-13));
    }

    #[test]
    fn mean_curvature_examples() {
        let g = Grid::new(32, 32, 5, 1.0).unwrap();
        assert!(mean_curvature(&g.zeros_surface(), &g).iter().all(|&k| k == 0.0));
        let psi = g.surface_fn(|a, _| 0.1 * a.cos());
        let k = mean_curvature(&psi, &g);
        assert!((k[[0, 0]] + 0.1).abs() < 1e-12);
        // x₁ = π/2 is node 8 of 32
        assert!((g.x1()[8] - PI / 2.0).abs() < 1e-15);
        assert!(k[[3, 8]].abs() < 1e-12);
    }

    #[test]
    fn conservative_divergence_agrees() {
        let g = Grid::new(32, 32, 17, 1.0).unwrap();
        let psi = g.surface_fn(|a, b| 0.1 * a.cos() + 0.05 * b.sin());
        let gm = GraphMap::build(&g, &Cutoff::linear(&g, 0.15), &psi, &g.zeros_surface(), 0.0).unwrap();
        let x = VectorField([
            g.volume_fn(|a, b, z| (a + b).sin() * z.exp()),
            g.volume_fn(|a, _, z| a.cos() * z),
            g.volume_fn(|_, b, z| b.sin() * z * z),
        ]);
        let lhs = &gm.div(&x) * &gm.jac;
        let rhs = gm.div_conservative(&x);
        assert!((&lhs - &rhs).iter().all(|e| e.abs() < 1e-10));
    }
}
