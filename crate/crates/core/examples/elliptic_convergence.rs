//! Spectral convergence of the flattened Poisson solver on a manufactured solution.

use capelast::verify::poisson_error;
use capelast::Grid;

fn main() -> capelast::Result<()> {
    let mut prev: Option<f64> = None;
    for n in [8, 12, 16, 24, 32] {
        let grid = Grid::new(n, n, n / 2 + 1, 1.0)?;
        let e = poisson_error(&grid)?;
        match prev {
            Some(p) => println!("{n:>3}x{n}x{:<3} error {e:.3e}  ratio {:.1}", n / 2 + 1, p / e),
            None => println!("{n:>3}x{n}x{:<3} error {e:.3e}", n / 2 + 1),
        }
        prev = Some(e);
    }
    Ok(())
}
