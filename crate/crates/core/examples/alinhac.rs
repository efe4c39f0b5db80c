//! Commutator identities for D^α applied to ∂ᵢ^φ and to the material
//! derivative, on a manufactured moving history.

use capelast::alinhac::{alinhac_residual, curl_commutator_residuals, FieldName, Identity, MultiIndex};
use capelast::graphmap::Cutoff;
use capelast::verify::manufactured_history;
use capelast::Grid;

fn main() -> capelast::Result<()> {
    let grid = Grid::new(32, 32, 13, 1.0)?;
    let cutoff = Cutoff::linear(&grid, 0.2);
    let hist = manufactured_history(&grid, 5, 0.3, 1e-3, false)?;
    println!("{:<10} {:<8} {:>12}", "alpha", "identity", "residual");
    for a in MultiIndex::all(2, 1) {
        for which in Identity::ALL {
            let r = alinhac_residual(&hist, &grid, &cutoff, FieldName::V(0), a, which)?;
            println!("{:<10} {:<8} {:>12.3e}", a.to_string(), which.to_string(), r);
        }
    }
    let steady = manufactured_history(&grid, 5, 0.3, 1e-3, true)?;
    let c = curl_commutator_residuals(&steady, &grid, &cutoff)?;
    println!("curl commutators on a steady state: {:.3e} {:.3e}", c.r1, c.r2);
    Ok(())
}
