//! Evolve a config file and print the diagnostics trace.
//!
//! cargo run --release --example simulate -- configs/capillary.cfg

use capelast::config::RunConfig;
use capelast::evolve::run;

fn main() -> capelast::Result<()> {
    let path = std::env::args().nth(1).unwrap_or_else(|| "configs/capillary.cfg".into());
    let cfg = RunConfig::from_path(path.as_ref())?;
    let out = run(&cfg)?;
    let e0 = out.records[0].e_cons;
    println!("{:>8} {:>22} {:>10} {:>10} {:>10} {:>10}", "t", "E_cons", "drift", "div_F", "FN_top", "rt_min");
    for r in &out.records {
        let c = &r.constraints;
        println!(
            "{:8.4} {:22.15e} {:10.2e} {:10.2e} {:10.2e} {:10.3}",
            r.t,
            r.e_cons,
            (r.e_cons - e0).abs() / e0,
            c.div_f,
            c.fn_top,
            r.rt_min
        );
    }
    if let Some(e) = out.error {
        eprintln!("stopped early: {e}");
    }
    Ok(())
}
