//! Operator identities of the flattened calculus on a curved surface.

use capelast::diagnostics::{lemma_checks, LemmaRow};
use capelast::graphmap::Cutoff;
use capelast::state::Modes;
use capelast::Grid;

fn main() -> capelast::Result<()> {
    let psi: Modes = "0.1*cos(1,0) + 0.05*sin(0,1)".parse()?;
    for n in [16, 32] {
        let grid = Grid::new(n, n, n / 2 + 1, 1.0)?;
        let cutoff = Cutoff::linear(&grid, psi.sup_bound());
        println!("{n}x{n}x{}", n / 2 + 1);
        println!("{}", LemmaRow::CSV_HEADER);
        for row in lemma_checks(&grid, &cutoff, &psi, 1e-8)? {
            println!("{}", row.csv_row());
        }
    }
    Ok(())
}
