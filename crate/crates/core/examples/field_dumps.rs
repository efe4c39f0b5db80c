//! Write a state as binary field dumps and read one back.

use capelast::io::{dump_state, read_dump};
use capelast::state::{build_initial_data, InitSpec};

fn main() -> capelast::Result<()> {
    let spec = InitSpec {
        nx: 16,
        ny: 16,
        nz: 9,
        psi: "0.05*cos(1,1)".parse()?,
        v: "potential: 0.2*cos(1,0)".parse()?,
        ..InitSpec::default()
    };
    let grid = spec.grid()?;
    let state = build_initial_data(&spec, &grid)?;
    let dir = std::env::temp_dir().join("capelast_dumps");
    std::fs::create_dir_all(&dir)?;
    for e in dump_state(&dir, &grid, 0, &state)? {
        let d = read_dump(&dir.join(&e.path))?;
        let max = d.data.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        println!("{:<4} {:?} {}x{}x{} max |f| = {max:.4e}", e.field, d.kind, d.nx, d.ny, d.nz);
    }
    println!("written to {}", dir.display());
    Ok(())
}
