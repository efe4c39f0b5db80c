//! Residual batteries behind `capelast verify`: operators, lemmas, alinhac, elliptic.

use std::fmt;
use std::str::FromStr;

use crate::alinhac::{Calculus, FieldName, Identity, MultiIndex};
use crate::diagnostics::lemma_checks;
use crate::error::{Error, Result};
use crate::graphmap::{mean_curvature, Cutoff, GraphMap};
use crate::grid::{Grid, VectorField, VolumeField};
use crate::state::{History, Modes, State};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Operators,
    Lemmas,
    Alinhac,
    Elliptic,
}

impl Suite {
    pub const ALL: [Suite; 4] = [Suite::Operators, Suite::Lemmas, Suite::Alinhac, Suite::Elliptic];
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Suite::Operators => "operators",
            Suite::Lemmas => "lemmas",
            Suite::Alinhac => "alinhac",
            Suite::Elliptic => "elliptic",
        })
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.to_string() == s)
            .ok_or_else(|| Error::Config(format!("unknown suite '{s}' (expected operators, lemmas, alinhac or elliptic)")))
    }
}

/// Whether the residual must stay below the tolerance or reach at least it.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Bound {
    AtMost,
    AtLeast,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckRow {
    pub identity: String,
    pub alpha: String,
    pub resolution: String,
    pub residual: f64,
    pub tolerance: f64,
    pub bound: Bound,
}

impl CheckRow {
    pub const CSV_HEADER: &'static str = "identity,alpha,resolution,residual,tolerance,passed";

    fn at_most(identity: impl Into<String>, alpha: impl Into<String>, grid: &Grid, residual: f64, tolerance: f64) -> Self {
        Self {
            identity: identity.into(),
            alpha: alpha.into(),
            resolution: resolution(grid),
            residual,
            tolerance,
            bound: Bound::AtMost,
        }
    }

    pub fn passed(&self) -> bool {
        match self.bound {
            Bound::AtMost => self.residual <= self.tolerance,
            Bound::AtLeast => self.residual >= self.tolerance,
        }
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{:.6e},{:.1e},{}",
            self.identity,
            self.alpha,
            self.resolution,
            self.residual,
            self.tolerance,
            self.passed()
        )
    }
}

fn resolution(grid: &Grid) -> String {
    format!("{}x{}x{}", grid.nx(), grid.ny(), grid.nz())
}

pub fn write_rows(mut out: impl std::io::Write, rows: &[CheckRow]) -> std::io::Result<()> {
    writeln!(out, "{}", CheckRow::CSV_HEADER)?;
    for r in rows {
        writeln!(out, "{}", r.csv_row())?;
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VerifyOptions {
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
    pub depth: f64,
    /// History length for the alinhac suite.
    pub history: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            nx: 32,
            ny: 32,
            nz: 17,
            depth: 1.0,
            history: 5,
        }
    }
}

/// The reference surface of every battery.
pub fn reference_surface() -> Modes {
    "0.1*cos(1,0) + 0.05*sin(0,1)".parse().expect("valid modes")
}

pub fn run_suite(suite: Suite, opts: &VerifyOptions) -> Result<Vec<CheckRow>> {
    let grid = Grid::new(opts.nx, opts.ny, opts.nz, opts.depth)?;
    match suite {
        Suite::Operators => operators(&grid),
        Suite::Lemmas => lemmas(&grid),
        Suite::Alinhac => alinhac(&grid, opts.history),
        Suite::Elliptic => {
            let coarse = Grid::new(opts.nx / 2, opts.ny / 2, opts.nz / 2 + 1, opts.depth)?;
            elliptic(&coarse, &grid)
        }
    }
}

fn max_rel(a: &VolumeField, b: &VolumeField) -> f64 {
    let scale = b.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(1.0);
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs())) / scale
}

/// Twisted derivatives against closed forms on the reference surface.
pub fn operators(grid: &Grid) -> Result<Vec<CheckRow>> {
    let modes = reference_surface();
    let cutoff = Cutoff::linear(grid, modes.sup_bound());
    let psi = modes.sample(grid);
    let gm = GraphMap::build(grid, &cutoff, &psi, &grid.zeros_surface(), 0.0)?;
    // f(y) = sin y₁ cos y₂ e^{y₃} composed with the map, so ∇^φ f is its physical gradient
    let at = |g: &dyn Fn(f64, f64, f64) -> f64| {
        let (nz, ny, nx) = grid.volume_shape();
        VolumeField::from_shape_fn((nz, ny, nx), |(k, j, i)| g(grid.x1()[i], grid.x2()[j], gm.phi[[k, j, i]]))
    };
    let f = at(&|a, b, c| a.sin() * b.cos() * c.exp());
    let grad = [
        at(&|a, b, c| a.cos() * b.cos() * c.exp()),
        at(&|a, b, c| -a.sin() * b.sin() * c.exp()),
        f.clone(),
    ];
    let tol = 1e-8;
    let mut rows = Vec::new();
    let g = gm.grad(&f);
    for i in 0..3 {
        rows.push(CheckRow::at_most("gradient", format!("e{}", i + 1), grid, max_rel(&g[i], &grad[i]), tol));
    }
    rows.push(CheckRow::at_most("laplacian", "-", grid, max_rel(&gm.laplacian(&f), &(-&f)), tol));
    let curl = gm.curl(&g);
    let zero = grid.zeros_volume();
    let worst = curl.iter().map(|c| max_rel(c, &zero)).fold(0.0, f64::max);
    rows.push(CheckRow::at_most("curl_grad", "-", grid, worst, tol));
    let x = VectorField(grad.clone());
    rows.push(CheckRow::at_most("div", "-", grid, max_rel(&gm.div(&x), &(-&f)), tol));
    // κ of A cos x₁
    let amp = 0.1;
    let wave = grid.surface_fn(|a, _| amp * a.cos());
    let kappa = mean_curvature(&wave, grid);
    let exact = grid.surface_fn(|a, _| -amp * a.cos() / (1.0 + (amp * a.sin()).powi(2)).powf(1.5));
    let err = kappa.iter().zip(&exact).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    rows.push(CheckRow::at_most("mean_curvature", "-", grid, err, tol));
    Ok(rows)
}

pub fn lemmas(grid: &Grid) -> Result<Vec<CheckRow>> {
    let modes = reference_surface();
    let cutoff = Cutoff::linear(grid, modes.sup_bound());
    let tol = 1e-8;
    Ok(lemma_checks(grid, &cutoff, &modes, tol)?
        .into_iter()
        .map(|r| CheckRow::at_most(r.lemma, r.field, grid, r.residual, r.tolerance))
        .collect())
}

/// Surface of the manufactured history.
pub fn manufactured_psi(t: f64, x1: f64, x2: f64) -> f64 {
    0.1 * (x1 - t).cos() + 0.05 * x2.sin() * (1.0 + 0.5 * t)
}

/// Velocity of the manufactured history, component `i`.
pub fn manufactured_v(i: usize, t: f64, x1: f64, x2: f64, x3: f64) -> f64 {
    match i {
        0 => (x2 + 0.3 * t).cos() * (1.0 + 0.5 * x3),
        1 => (x1 - t).sin() * x3.exp(),
        _ => 0.2 * (x1 + x2).sin() * (1.0 + x3) * (1.0 + t),
    }
}

/// `len` states ending at `t_end`, spaced by `dt`, filled from the manufactured closures.
pub fn manufactured_history(grid: &Grid, len: usize, t_end: f64, dt: f64, steady: bool) -> Result<History> {
    let mut h = History::new(len.max(1));
    for m in 0..len {
        let t = t_end - (len - 1 - m) as f64 * dt;
        let tt = if steady { t_end } else { t };
        let mut s = State::rest(grid, 0.0);
        s.t = t;
        s.psi = grid.surface_fn(|a, b| manufactured_psi(tt, a, b));
        s.v = VectorField::from_fn(|i| grid.volume_fn(|a, b, c| manufactured_v(i, tt, a, b, c)));
        s.f[0] = VectorField::from_fn(|i| grid.volume_fn(|a, b, c| 0.5 * manufactured_v((i + 1) % 3, tt, b, a, c)));
        s.f[2] = VectorField::from_fn(|i| grid.volume_fn(|a, b, c| 0.3 * manufactured_v(2 - i, tt, a + b, a - b, c)));
        s.q = grid.volume_fn(|a, b, c| (a + tt).cos() * b.sin() * (c * c + 1.0));
        h.push(s)?;
    }
    Ok(h)
}

/// Snapshots the Alinhac suite needs for its Δt order claim.
pub const ALINHAC_MIN_HISTORY: usize = 5;

/// Spatial |α| ≤ 2 identities, the α₀ = 1 order study and the curl commutators.
pub fn alinhac(grid: &Grid, history: usize) -> Result<Vec<CheckRow>> {
    // fewer nodes and the time derivatives can't reach fourth order
    if history < ALINHAC_MIN_HISTORY {
        return Err(Error::InsufficientHistory {
            needed: ALINHAC_MIN_HISTORY,
            available: history,
        });
    }
    let cutoff = Cutoff::linear(grid, 0.2);
    let tol = 1e-8;
    let mut rows = Vec::new();
    let fields = [FieldName::V(0), FieldName::V(2), FieldName::F(1, 0), FieldName::Q];

    let h = manufactured_history(grid, history, 0.3, 1e-3, false)?;
    let cal = Calculus::new(&h, grid, &cutoff)?;
    for a in MultiIndex::all(2, 0) {
        for which in Identity::ALL {
            let worst = fields
                .iter()
                .map(|&name| cal.residual(&cal.field(name), a, which))
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .fold(0.0, f64::max);
            rows.push(CheckRow::at_most(which.to_string(), a.to_string(), grid, worst, tol));
        }
    }

    // observed order in Δt for α₀ = 1
    for a in [MultiIndex::new(1, 0, 0)?, MultiIndex::new(1, 1, 0)?] {
        for which in Identity::ALL {
            let mut r = [0.0; 2];
            for (slot, dt) in r.iter_mut().zip([0.04, 0.02]) {
                let h = manufactured_history(grid, history, 0.3, dt, false)?;
                let cal = Calculus::new(&h, grid, &cutoff)?;
                *slot = cal.residual(&cal.field(FieldName::V(1)), a, which)?;
            }
            rows.push(CheckRow {
                identity: format!("{which}_order"),
                alpha: a.to_string(),
                resolution: resolution(grid),
                residual: (r[0] / r[1]).log2(),
                tolerance: 3.5,
                bound: Bound::AtLeast,
            });
        }
    }

    let steady = manufactured_history(grid, history, 0.3, 0.05, true)?;
    let cr = Calculus::new(&steady, grid, &cutoff)?.curl_commutators()?;
    rows.push(CheckRow::at_most("curl_Dt", "-", grid, cr.r1, tol));
    rows.push(CheckRow::at_most("curl_F", "-", grid, cr.r2, tol));
    Ok(rows)
}

/// Exact solution of the manufactured Poisson problem in physical coordinates.
pub fn poisson_exact(y1: f64, y2: f64, y3: f64) -> f64 {
    (y1.sin() + 0.5 * y2.cos()).exp() * (2.0 * y3).cos()
}

fn poisson_source(y1: f64, y2: f64, y3: f64) -> f64 {
    let e = poisson_exact(y1, y2, y3);
    let lap = y1.cos().powi(2) - y1.sin() + 0.25 * y2.sin().powi(2) - 0.5 * y2.cos() - 4.0;
    -lap * e
}

/// Max relative error of solve_poisson_phi on the manufactured problem over the reference surface.
pub fn poisson_error(grid: &Grid) -> Result<f64> {
    let modes = reference_surface();
    let cutoff = Cutoff::linear(grid, modes.sup_bound());
    let psi = modes.sample(grid);
    let gm = GraphMap::build(grid, &cutoff, &psi, &grid.zeros_surface(), 0.0)?;
    let (nz, ny, nx) = grid.volume_shape();
    let at = |g: fn(f64, f64, f64) -> f64| {
        VolumeField::from_shape_fn((nz, ny, nx), |(k, j, i)| g(grid.x1()[i], grid.x2()[j], gm.phi[[k, j, i]]))
    };
    let exact = at(poisson_exact);
    let rhs = at(poisson_source);
    let top = grid.top(&exact);
    let b = grid.depth();
    let bottom = grid.surface_fn(|a, c| -2.0 * (a.sin() + 0.5 * c.cos()).exp() * (-2.0 * b).sin());
    let theta = crate::elliptic::solve_poisson_phi(&rhs, &top, &bottom, &gm, grid)?;
    Ok(max_rel(&theta, &exact))
}

pub fn elliptic(coarse: &Grid, fine: &Grid) -> Result<Vec<CheckRow>> {
    let ec = poisson_error(coarse)?;
    let ef = poisson_error(fine)?;
    let ratio = ec / ef;
    Ok(vec![
        CheckRow::at_most("poisson_error", "-", coarse, ec, 1.0),
        CheckRow::at_most("poisson_error", "-", fine, ef, 1e-6),
        CheckRow {
            identity: "poisson_ratio".into(),
            alpha: "-".into(),
            resolution: format!("{}/{}", resolution(coarse), resolution(fine)),
            residual: ratio,
            tolerance: 100.0,
            bound: Bound::AtLeast,
        },
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.to_string().parse::<Suite>().unwrap(), s);
        }
        assert!("nope".parse::<Suite>().is_err());
    }

    #[test]
    fn operators_pass_at_moderate_resolution() {
        let grid = Grid::new(24, 24, 15, 1.0).unwrap();
        for r in operators(&grid).unwrap() {
            assert!(r.passed(), "{}", r.csv_row());
        }
    }

    #[test]
    fn poisson_manufactured_source_matches_the_laplacian() {
        // centered differences of the exact solution as an independent check of the source
        let h = 1e-3;
        let (y1, y2, y3) = (0.7, -1.2, -0.4);
        let f = poisson_exact;
        let lap = (f(y1 + h, y2, y3) + f(y1 - h, y2, y3) + f(y1, y2 + h, y3) + f(y1, y2 - h, y3) + f(y1, y2, y3 + h)
            + f(y1, y2, y3 - h)
            - 6.0 * f(y1, y2, y3))
            / (h * h);
        assert!((poisson_source(y1, y2, y3) + lap).abs() < 1e-5);
    }

    #[test]
    fn short_history_is_a_precondition_error() {
        let grid = Grid::new(8, 8, 7, 1.0).unwrap();
        assert!(matches!(alinhac(&grid, 4), Err(Error::InsufficientHistory { .. })));
    }
}
