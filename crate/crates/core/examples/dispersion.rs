//! Period of a small capillary wave against ω² = σk³tanh(kb).

use std::f64::consts::PI;

use capelast::elliptic::PoissonSolver;
use capelast::evolve::{Evolver, StepOptions};
use capelast::state::{build_initial_data_with, InitSpec};

fn main() -> capelast::Result<()> {
    for (k, sigma) in [(1, 1.0), (2, 0.5)] {
        let spec = InitSpec {
            psi: format!("0.001*cos({k},0)").parse()?,
            sigma,
            ..InitSpec::default()
        };
        let grid = spec.grid()?;
        let cutoff = spec.make_cutoff(&grid)?;
        let solver = PoissonSolver::new(&grid);
        let mut s = build_initial_data_with(&spec, &grid, &cutoff, &solver)?;
        let ev = Evolver::new(&grid, &cutoff, solver, StepOptions::default());

        let kf = k as f64;
        let period = 2.0 * PI / (sigma * kf.powi(3) * (kf * grid.depth()).tanh()).sqrt();
        let dt = period / (period / ev.cfl_bound(&s)?).ceil();
        let mut k1 = None;
        let mut zeros = Vec::new();
        while zeros.len() < 2 {
            let (t0, y0) = (s.t, s.psi[[0, 0]]);
            let (next, kn) = ev.step_with(&s, dt, k1.take())?;
            s = next;
            k1 = Some(kn);
            let y = s.psi[[0, 0]];
            if y0 * y < 0.0 {
                zeros.push(t0 + (s.t - t0) * y0 / (y0 - y));
            }
        }
        let measured = 2.0 * (zeros[1] - zeros[0]);
        println!(
            "k = {k}, sigma = {sigma}: period {measured:.6}, theory {period:.6}, rel. error {:.2e}",
            (measured - period) / period
        );
    }
    Ok(())
}
