//! The iterative Poisson solver against a dense LU solve of the same
//! collocation system, assembled here from textbook differentiation matrices.

use std::f64::consts::PI;

use capelast::elliptic::{PoissonSolver, SolverOptions, TopCondition};
use capelast::graphmap::{Cutoff, GraphMap};
use capelast::{Grid, SurfaceField, VolumeField};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Periodic first derivative on n equispaced points (n even): ½(−1)^{i−j} cot((i−j)h/2).
fn fourier_matrix(n: usize) -> DMatrix<f64> {
    let h = 2.0 * PI / n as f64;
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            0.0
        } else {
            let d = i as f64 - j as f64;
            let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
            0.5 * sign / (d * h / 2.0).tan()
        }
    })
}

/// Chebyshev-Lobatto derivative on x_j = cos(jπ/N), j = 0..=N.
fn cheb_matrix(np: usize) -> DMatrix<f64> {
    let n = np - 1;
    let x: Vec<f64> = (0..np).map(|j| (PI * j as f64 / n as f64).cos()).collect();
    let c = |j: usize| if j == 0 || j == n { 2.0 } else { 1.0 };
    let mut d = DMatrix::from_fn(np, np, |i, j| {
        if i == j {
            0.0
        } else {
            let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
            c(i) / c(j) * sign / (x[i] - x[j])
        }
    });
    for i in 0..np {
        let s: f64 = (0..np).filter(|&j| j != i).map(|j| d[(i, j)]).sum();
        d[(i, i)] = -s;
    }
    d
}

fn kron(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    a.kronecker(b)
}

fn psi(y1: f64, y2: f64) -> (f64, f64, f64) {
    (0.1 * y1.cos() + 0.05 * y2.sin(), -0.1 * y1.sin(), 0.05 * y2.cos())
}

#[test]
fn gmres_matches_dense_lu_on_curved_slab() {
    let (nx, ny, nz, b) = (8, 8, 9, 1.0);
    let grid = Grid::new(nx, ny, nz, b).unwrap();
    let n = nx * ny * nz;
    let idx = |k: usize, j: usize, i: usize| (k * ny + j) * nx + i;

    let (ix, iy, iz) = (DMatrix::identity(nx, nx), DMatrix::identity(ny, ny), DMatrix::identity(nz, nz));
    let d1 = kron(&kron(&iz, &iy), &fourier_matrix(nx));
    let d2 = kron(&kron(&iz, &fourier_matrix(ny)), &ix);
    let d3 = kron(&kron(&(cheb_matrix(nz) * (2.0 / b)), &iy), &ix);

    // geometry from the closed form of ψ and χ = 1 + x₃/b
    let mut a1 = DVector::zeros(n);
    let mut a2 = DVector::zeros(n);
    let mut ij = DVector::zeros(n);
    for k in 0..nz {
        let x3 = ((PI * k as f64 / (nz - 1) as f64).cos() - 1.0) * b / 2.0;
        let chi = 1.0 + x3 / b;
        for j in 0..ny {
            for i in 0..nx {
                let (p, p1, p2) = psi(2.0 * PI * i as f64 / nx as f64, 2.0 * PI * j as f64 / ny as f64);
                let jac = 1.0 + p / b;
                a1[idx(k, j, i)] = chi * p1 / jac;
                a2[idx(k, j, i)] = chi * p2 / jac;
                ij[idx(k, j, i)] = 1.0 / jac;
            }
        }
    }
    let g1 = &d1 - DMatrix::from_diagonal(&a1) * &d3;
    let g2 = &d2 - DMatrix::from_diagonal(&a2) * &d3;
    let g3 = DMatrix::from_diagonal(&ij) * &d3;
    let mut a = -(&g1 * &g1 + &g2 * &g2 + &g3 * &g3);
    for j in 0..ny {
        for i in 0..nx {
            let top = idx(0, j, i);
            a.row_mut(top).fill(0.0);
            a[(top, top)] = 1.0;
            let bot = idx(nz - 1, j, i);
            a.row_mut(bot).copy_from(&g3.row(bot));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let rhs = VolumeField::from_shape_fn((nz, ny, nx), |(k, j, i)| {
        (grid.x1()[i]).cos() * (grid.x3()[k]).exp() + 0.3 * (grid.x2()[j]).sin() + 0.05 * rng.random_range(-1.0..1.0)
    });
    let top = SurfaceField::from_shape_fn((ny, nx), |(j, i)| (grid.x1()[i] + grid.x2()[j]).sin());
    let bottom = SurfaceField::from_shape_fn((ny, nx), |(j, _)| 0.2 * (2.0 * grid.x2()[j]).cos());

    let mut full = DVector::from_iterator(n, rhs.iter().copied());
    for j in 0..ny {
        for i in 0..nx {
            full[idx(0, j, i)] = top[[j, i]];
            full[idx(nz - 1, j, i)] = bottom[[j, i]];
        }
    }
    let dense = a.lu().solve(&full).expect("dense system is nonsingular");

    let cutoff = Cutoff::linear(&grid, 0.15);
    let psi_field = SurfaceField::from_shape_fn((ny, nx), |(j, i)| psi(grid.x1()[i], grid.x2()[j]).0);
    let gm = GraphMap::build(&grid, &cutoff, &psi_field, &grid.zeros_surface(), 0.0).unwrap();
    let solver = PoissonSolver::with_options(
        &grid,
        SolverOptions {
            tol: 1e-13,
            ..SolverOptions::default()
        },
    );
    let got = solver
        .solve(&gm, &rhs, TopCondition::Dirichlet(&top), &bottom, None)
        .unwrap()
        .field;
    let scale = dense.amax();
    let err = got.iter().zip(dense.iter()).fold(0.0f64, |m, (x, y)| m.max((x - y).abs())) / scale;
    assert!(err < 1e-10, "relative difference {err:e}");
}
