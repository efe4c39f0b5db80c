//! Distances to the σ = 0 solution as surface tension vanishes.
//!
//! cargo run --release --example sigma_sweep -- configs/sweep.cfg

use capelast::config::RunConfig;
use capelast::limit::sweep_sigma;

fn main() -> capelast::Result<()> {
    let path = std::env::args().nth(1).unwrap_or_else(|| "configs/sweep.cfg".into());
    let cfg = RunConfig::from_path(path.as_ref())?;
    let (report, members) = sweep_sigma(&cfg, &[1e-1, 1e-2, 1e-3, 1e-4, 0.0])?;
    print!("{}", report.summary());
    for m in &members {
        println!("sigma {:e}: {} steps, {} snapshots", m.sigma, m.steps, m.snapshots.len());
    }
    Ok(())
}
