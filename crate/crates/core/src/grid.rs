//! Collocation grid on the periodic slab T² × (−b, 0).
//!
//! Tangential directions use uniform Fourier nodes on [0, 2π); the vertical
//! direction uses Chebyshev–Gauss–Lobatto nodes mapped onto [−b, 0], ordered
//! from the top (x₃ = 0, index 0) to the bottom (x₃ = −b, index nz − 1).
//!
//! Volume fields are stored as `(nz, ny, nx)` arrays so that x₁ is the fastest
//! index and every horizontal plane is contiguous.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Index, IndexMut};
use std::sync::Arc;

use ndarray::{Array, Array1, Array2, Array3, ArrayViewMut1, Axis, Dimension, Zip};
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Scalar samples on the surface torus, shape `(ny, nx)`.
pub type SurfaceField = Array2<f64>;
/// Scalar samples on the slab, shape `(nz, ny, nx)`.
pub type VolumeField = Array3<f64>;

/// Tangential direction selector for the Fourier derivatives.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TanAxis {
    X1,
    X2,
}

impl TanAxis {
    pub const BOTH: [TanAxis; 2] = [TanAxis::X1, TanAxis::X2];

    pub fn index(self) -> usize {
        match self {
            TanAxis::X1 => 0,
            TanAxis::X2 => 1,
        }
    }

    fn array_axis(self, ndim: usize) -> Axis {
        match self {
            TanAxis::X1 => Axis(ndim - 1),
            TanAxis::X2 => Axis(ndim - 2),
        }
    }
}

#[derive(Clone)]
struct FftPair {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl FftPair {
    fn new(planner: &mut FftPlanner<f64>, n: usize) -> Self {
        Self {
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }
}

/// Integer wavenumber of FFT bin `m` for a transform of length `n`.
pub fn wavenumber(m: usize, n: usize) -> i64 {
    if m <= n / 2 {
        m as i64
    } else {
        m as i64 - n as i64
    }
}

/// Wavenumber used by the derivative operators: the Nyquist bin is dropped.
fn derivative_wavenumber(m: usize, n: usize) -> f64 {
    if 2 * m == n {
        0.0
    } else {
        wavenumber(m, n) as f64
    }
}

#[derive(Clone)]
pub struct Grid {
    nx: usize,
    ny: usize,
    nz: usize,
    depth: f64,
    x1: Array1<f64>,
    x2: Array1<f64>,
    x3: Array1<f64>,
    /// Clenshaw–Curtis weights on [−b, 0].
    wz: Array1<f64>,
    /// Chebyshev collocation derivative d/dx₃.
    dz: Array2<f64>,
    fft_x: FftPair,
    fft_y: FftPair,
    /// Apply 2/3-rule truncation to nonlinear tendencies.
    pub dealias: bool,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("nx", &self.nx)
            .field("ny", &self.ny)
            .field("nz", &self.nz)
            .field("depth", &self.depth)
            .field("dealias", &self.dealias)
            .finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.nx == other.nx && self.ny == other.ny && self.nz == other.nz && self.depth == other.depth
    }
}

impl Grid {
    pub fn new(nx: usize, ny: usize, nz: usize, depth: f64) -> Result<Self> {
        if nx < 4 || !nx.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!("nx must be even and >= 4, got {nx}")));
        }
        if ny < 4 || !ny.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!("ny must be even and >= 4, got {ny}")));
        }
        if nz < 5 {
            return Err(Error::InvalidGrid(format!("nz must be >= 5, got {nz}")));
        }
        if !(depth > 0.0 && depth.is_finite()) {
            return Err(Error::InvalidGrid(format!("depth must be positive, got {depth}")));
        }

        let x1 = Array1::from_shape_fn(nx, |i| 2.0 * PI * i as f64 / nx as f64);
        let x2 = Array1::from_shape_fn(ny, |j| 2.0 * PI * j as f64 / ny as f64);
        let n = nz - 1;
        let s = chebyshev_nodes(n);
        let x3 = s.mapv(|s| (s - 1.0) * depth / 2.0);
        let wz = clenshaw_curtis(n) * (depth / 2.0);
        let dz = chebyshev_matrix(&s) * (2.0 / depth);

        let mut planner = FftPlanner::new();
        let fft_x = FftPair::new(&mut planner, nx);
        let fft_y = FftPair::new(&mut planner, ny);

        Ok(Self {
            nx,
            ny,
            nz,
            depth,
            x1,
            x2,
            x3,
            wz,
            dz,
            fft_x,
            fft_y,
            dealias: true,
        })
    }

    pub fn nx(&self) -> usize {
        self.nx
    }
    pub fn ny(&self) -> usize {
        self.ny
    }
    pub fn nz(&self) -> usize {
        self.nz
    }
    pub fn depth(&self) -> f64 {
        self.depth
    }
    pub fn x1(&self) -> &Array1<f64> {
        &self.x1
    }
    pub fn x2(&self) -> &Array1<f64> {
        &self.x2
    }
    /// Vertical nodes, strictly decreasing from 0 to −b.
    pub fn x3(&self) -> &Array1<f64> {
        &self.x3
    }
    pub fn vertical_weights(&self) -> &Array1<f64> {
        &self.wz
    }
    pub fn vertical_matrix(&self) -> &Array2<f64> {
        &self.dz
    }

    /// Area element of one tangential node.
    pub fn area_weight(&self) -> f64 {
        (2.0 * PI / self.nx as f64) * (2.0 * PI / self.ny as f64)
    }

    pub fn volume_shape(&self) -> (usize, usize, usize) {
        (self.nz, self.ny, self.nx)
    }

    pub fn surface_shape(&self) -> (usize, usize) {
        (self.ny, self.nx)
    }

    /// Smallest tangential spacing.
    pub fn min_dx(&self) -> f64 {
        2.0 * PI / self.nx.max(self.ny) as f64
    }

    /// Smallest vertical node spacing (at the ends of the Chebyshev grid).
    pub fn min_dz(&self) -> f64 {
        self.x3
            .windows(2)
            .into_iter()
            .map(|w| (w[0] - w[1]).abs())
            .fold(f64::INFINITY, f64::min)
    }

    pub fn zeros_volume(&self) -> VolumeField {
        Array3::zeros(self.volume_shape())
    }

    pub fn zeros_surface(&self) -> SurfaceField {
        Array2::zeros(self.surface_shape())
    }

    pub fn volume_fn(&self, f: impl Fn(f64, f64, f64) -> f64) -> VolumeField {
        Array3::from_shape_fn(self.volume_shape(), |(k, j, i)| f(self.x1[i], self.x2[j], self.x3[k]))
    }

    pub fn surface_fn(&self, f: impl Fn(f64, f64) -> f64) -> SurfaceField {
        Array2::from_shape_fn(self.surface_shape(), |(j, i)| f(self.x1[i], self.x2[j]))
    }

    /// Constant-in-x₃ extension of a surface field.
    pub fn extend(&self, s: &SurfaceField) -> VolumeField {
        Array3::from_shape_fn(self.volume_shape(), |(_, j, i)| s[[j, i]])
    }

    /// Field depending on x₃ only.
    pub fn column(&self, f: impl Fn(f64) -> f64) -> VolumeField {
        let vals = self.x3.mapv(f);
        Array3::from_shape_fn(self.volume_shape(), |(k, _, _)| vals[k])
    }

    pub fn top(&self, f: &VolumeField) -> SurfaceField {
        f.index_axis(Axis(0), 0).to_owned()
    }

    pub fn bottom(&self, f: &VolumeField) -> SurfaceField {
        f.index_axis(Axis(0), self.nz - 1).to_owned()
    }

    pub fn check_volume(&self, f: &VolumeField) -> Result<()> {
        check_shape(f.shape(), &[self.nz, self.ny, self.nx])
    }

    pub fn check_surface(&self, f: &SurfaceField) -> Result<()> {
        check_shape(f.shape(), &[self.ny, self.nx])
    }

    /// Fourier-spectral tangential derivative of a surface or volume field.
    pub fn d_tan<D: Dimension>(&self, f: &Array<f64, D>, axis: TanAxis) -> Array<f64, D> {
        self.d_tan_n(f, axis, 1)
    }

    /// `order`-th tangential derivative as a single Fourier multiplier, identical
    /// to `order` successive applications of [`Grid::d_tan`].
    pub fn d_tan_n<D: Dimension>(&self, f: &Array<f64, D>, axis: TanAxis, order: usize) -> Array<f64, D> {
        if order == 0 {
            return f.clone();
        }
        let (n, fft) = match axis {
            TanAxis::X1 => (self.nx, &self.fft_x),
            TanAxis::X2 => (self.ny, &self.fft_y),
        };
        let mult: Vec<Complex64> = (0..n)
            .map(|m| {
                let k = derivative_wavenumber(m, n);
                Complex64::new(0.0, k).powi(order as i32) / n as f64
            })
            .collect();
        let mut out = f.clone();
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        for lane in out.lanes_mut(axis.array_axis(f.ndim())) {
            filter_lane(lane, &mut buf, fft, &mult);
        }
        out
    }

    /// Chebyshev collocation derivative in x₃.
    pub fn d_vert(&self, f: &VolumeField) -> VolumeField {
        let flat = f
            .view()
            .into_shape_with_order((self.nz, self.ny * self.nx))
            .expect("volume field is contiguous");
        self.dz
            .dot(&flat)
            .into_shape_with_order(self.volume_shape())
            .expect("shape preserved")
    }

    pub fn d_vert_n(&self, f: &VolumeField, order: usize) -> VolumeField {
        (0..order).fold(f.clone(), |acc, _| self.d_vert(&acc))
    }

    /// Clenshaw–Curtis × trapezoid quadrature over Ω. Any Jacobian weight must
    /// already be multiplied into `f`.
    pub fn quad_volume(&self, f: &VolumeField) -> f64 {
        let mut total = 0.0;
        for (k, plane) in f.outer_iter().enumerate() {
            total += self.wz[k] * plane.sum();
        }
        total * self.area_weight()
    }

    pub fn quad_surface(&self, f: &SurfaceField) -> f64 {
        f.sum() * self.area_weight()
    }

    /// L² norm over Ω in the flattened coordinates.
    pub fn norm0(&self, f: &VolumeField) -> f64 {
        self.quad_volume(&f.mapv(|x| x * x)).max(0.0).sqrt()
    }

    pub fn norm0_surface(&self, f: &SurfaceField) -> f64 {
        self.quad_surface(&f.mapv(|x| x * x)).max(0.0).sqrt()
    }

    /// Hˢ norm: square root of the summed squared L² norms of every mixed
    /// derivative ∂₁ᵃ∂₂ᵇ∂₃ᶜ with a + b + c ≤ s.
    pub fn sobolev_norm(&self, f: &VolumeField, s: usize) -> f64 {
        let mut total = 0.0;
        for a in 0..=s {
            let fa = self.d_tan_n(f, TanAxis::X1, a);
            for b in 0..=(s - a) {
                let mut fab = self.d_tan_n(&fa, TanAxis::X2, b);
                for c in 0..=(s - a - b) {
                    if c > 0 {
                        fab = self.d_vert(&fab);
                    }
                    total += self.quad_volume(&fab.mapv(|x| x * x));
                }
            }
        }
        total.max(0.0).sqrt()
    }

    /// Surface Hˢ norm with tangential derivatives only.
    pub fn sobolev_norm_surface(&self, f: &SurfaceField, s: usize) -> f64 {
        let mut total = 0.0;
        for a in 0..=s {
            let fa = self.d_tan_n(f, TanAxis::X1, a);
            for b in 0..=(s - a) {
                let fab = self.d_tan_n(&fa, TanAxis::X2, b);
                total += self.quad_surface(&fab.mapv(|x| x * x));
            }
        }
        total.max(0.0).sqrt()
    }

    /// 2/3-rule truncation of the tangential spectrum.
    pub fn truncate_two_thirds<D: Dimension>(&self, f: &mut Array<f64, D>) {
        let (kx, ky) = ((self.nx / 3) as i64, (self.ny / 3) as i64);
        self.apply_plane_multiplier(f, |k1, k2| {
            if k1.abs() <= kx && k2.abs() <= ky {
                1.0
            } else {
                0.0
            }
        });
    }

    /// Exponential spectral filter exp(−36 (|k|/k_max)^order) on each tangential axis.
    pub fn exponential_filter<D: Dimension>(&self, f: &mut Array<f64, D>, order: i32) {
        let (hx, hy) = ((self.nx / 2) as f64, (self.ny / 2) as f64);
        self.apply_plane_multiplier(f, |k1, k2| {
            (-36.0 * ((k1.abs() as f64 / hx).powi(order) + (k2.abs() as f64 / hy).powi(order))).exp()
        });
    }

    /// Forward 2D FFT of every horizontal plane (unnormalized).
    pub(crate) fn fft_planes(&self, f: &VolumeField) -> Array3<Complex64> {
        let mut spec = f.mapv(|x| Complex64::new(x, 0.0));
        let mut buf = vec![Complex64::new(0.0, 0.0); self.nx.max(self.ny)];
        transform_lanes(&mut spec, Axis(2), &self.fft_x.forward, &mut buf[..self.nx]);
        transform_lanes(&mut spec, Axis(1), &self.fft_y.forward, &mut buf[..self.ny]);
        spec
    }

    /// Inverse of [`Grid::fft_planes`], returning the real part.
    pub(crate) fn ifft_planes(&self, mut spec: Array3<Complex64>) -> VolumeField {
        let mut buf = vec![Complex64::new(0.0, 0.0); self.nx.max(self.ny)];
        transform_lanes(&mut spec, Axis(2), &self.fft_x.inverse, &mut buf[..self.nx]);
        transform_lanes(&mut spec, Axis(1), &self.fft_y.inverse, &mut buf[..self.ny]);
        let scale = 1.0 / (self.nx * self.ny) as f64;
        spec.mapv(|c| c.re * scale)
    }

    /// Wavenumbers seen by the derivative operators (Nyquist set to zero).
    pub fn derivative_wavenumbers(&self) -> (Vec<f64>, Vec<f64>) {
        (
            (0..self.nx).map(|m| derivative_wavenumber(m, self.nx)).collect(),
            (0..self.ny).map(|m| derivative_wavenumber(m, self.ny)).collect(),
        )
    }

    fn apply_plane_multiplier<D: Dimension>(&self, f: &mut Array<f64, D>, mult: impl Fn(i64, i64) -> f64) {
        let ndim = f.ndim();
        let (nx, ny) = (self.nx, self.ny);
        let mut spec: Array<Complex64, D> = f.mapv(|x| Complex64::new(x, 0.0));
        let mut buf = vec![Complex64::new(0.0, 0.0); nx.max(ny)];
        transform_lanes(&mut spec, TanAxis::X1.array_axis(ndim), &self.fft_x.forward, &mut buf[..nx]);
        transform_lanes(&mut spec, TanAxis::X2.array_axis(ndim), &self.fft_y.forward, &mut buf[..ny]);
        let scale = 1.0 / (nx * ny) as f64;
        let table = Array2::from_shape_fn((ny, nx), |(j, i)| mult(wavenumber(i, nx), wavenumber(j, ny)) * scale);
        {
            let planes = spec.len() / (nx * ny);
            let mut view = spec
                .view_mut()
                .into_shape_with_order((planes, ny, nx))
                .expect("field is contiguous");
            for mut plane in view.outer_iter_mut() {
                Zip::from(&mut plane).and(&table).for_each(|c, m| *c *= *m);
            }
        }
        transform_lanes(&mut spec, TanAxis::X1.array_axis(ndim), &self.fft_x.inverse, &mut buf[..nx]);
        transform_lanes(&mut spec, TanAxis::X2.array_axis(ndim), &self.fft_y.inverse, &mut buf[..ny]);
        Zip::from(f).and(&spec).for_each(|x, c| *x = c.re);
    }
}

fn filter_lane(mut lane: ArrayViewMut1<f64>, buf: &mut [Complex64], fft: &FftPair, mult: &[Complex64]) {
    for (b, x) in buf.iter_mut().zip(lane.iter()) {
        *b = Complex64::new(*x, 0.0);
    }
    fft.forward.process(buf);
    for (b, m) in buf.iter_mut().zip(mult) {
        *b *= m;
    }
    fft.inverse.process(buf);
    for (x, b) in lane.iter_mut().zip(buf.iter()) {
        *x = b.re;
    }
}

fn transform_lanes<D: Dimension>(spec: &mut Array<Complex64, D>, axis: Axis, fft: &Arc<dyn Fft<f64>>, buf: &mut [Complex64]) {
    for mut lane in spec.lanes_mut(axis) {
        for (b, x) in buf.iter_mut().zip(lane.iter()) {
            *b = *x;
        }
        fft.process(buf);
        for (x, b) in lane.iter_mut().zip(buf.iter()) {
            *x = *b;
        }
    }
}

fn check_shape(got: &[usize], expected: &[usize]) -> Result<()> {
    if got == expected {
        Ok(())
    } else {
        Err(Error::ShapeMismatch {
            expected: expected.to_vec(),
            got: got.to_vec(),
        })
    }
}

/// Chebyshev–Gauss–Lobatto nodes cos(kπ/n), k = 0..n, on [−1, 1] (decreasing).
fn chebyshev_nodes(n: usize) -> Array1<f64> {
    // sin form keeps the nodes exactly antisymmetric and the endpoints exact
    Array1::from_shape_fn(n + 1, |k| (PI * (n as f64 - 2.0 * k as f64) / (2.0 * n as f64)).sin())
}

fn chebyshev_matrix(x: &Array1<f64>) -> Array2<f64> {
    let n = x.len() - 1;
    let c = |i: usize| {
        let base = if i == 0 || i == n { 2.0 } else { 1.0 };
        if i.is_multiple_of(2) {
            base
        } else {
            -base
        }
    };
    let mut d = Array2::zeros((n + 1, n + 1));
    for i in 0..=n {
        for j in 0..=n {
            if i != j {
                d[[i, j]] = c(i) / c(j) / (x[i] - x[j]);
            }
        }
    }
    // negative-sum trick for the diagonal
    for i in 0..=n {
        let s: f64 = (0..=n).filter(|&j| j != i).map(|j| d[[i, j]]).sum();
        d[[i, i]] = -s;
    }
    d
}

/// Clenshaw–Curtis weights on [−1, 1] for the nodes cos(kπ/n).
fn clenshaw_curtis(n: usize) -> Array1<f64> {
    let theta: Vec<f64> = (0..=n).map(|k| PI * k as f64 / n as f64).collect();
    let mut w = Array1::zeros(n + 1);
    let nf = n as f64;
    let mut v = vec![1.0; n.saturating_sub(1)];
    if n.is_multiple_of(2) {
        w[0] = 1.0 / (nf * nf - 1.0);
        w[n] = w[0];
        for k in 1..n / 2 {
            let kf = k as f64;
            for (idx, vi) in v.iter_mut().enumerate() {
                *vi -= 2.0 * (2.0 * kf * theta[idx + 1]).cos() / (4.0 * kf * kf - 1.0);
            }
        }
        for (idx, vi) in v.iter_mut().enumerate() {
            *vi -= (nf * theta[idx + 1]).cos() / (nf * nf - 1.0);
        }
    } else {
        w[0] = 1.0 / (nf * nf);
        w[n] = w[0];
        for k in 1..=(n - 1) / 2 {
            let kf = k as f64;
            for (idx, vi) in v.iter_mut().enumerate() {
                *vi -= 2.0 * (2.0 * kf * theta[idx + 1]).cos() / (4.0 * kf * kf - 1.0);
            }
        }
    }
    for (idx, vi) in v.iter().enumerate() {
        w[idx + 1] = 2.0 * vi / nf;
    }
    w
}

/// Three volume components, indexed 0..3 for directions 1..3.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField(pub [VolumeField; 3]);

impl VectorField {
    pub fn zeros(grid: &Grid) -> Self {
        Self([grid.zeros_volume(), grid.zeros_volume(), grid.zeros_volume()])
    }

    pub fn from_fn(f: impl FnMut(usize) -> VolumeField) -> Self {
        Self(std::array::from_fn(f))
    }

    pub fn dot(&self, other: &VectorField) -> VolumeField {
        &self.0[0] * &other.0[0] + &self.0[1] * &other.0[1] + &self.0[2] * &other.0[2]
    }

    pub fn norm_sq(&self) -> VolumeField {
        self.dot(self)
    }

    pub fn scaled(&self, a: f64) -> VectorField {
        VectorField::from_fn(|i| &self.0[i] * a)
    }

    /// self + a·other
    pub fn axpy(&self, a: f64, other: &VectorField) -> VectorField {
        VectorField::from_fn(|i| &self.0[i] + &(&other.0[i] * a))
    }

    pub fn sub(&self, other: &VectorField) -> VectorField {
        VectorField::from_fn(|i| &self.0[i] - &other.0[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = &VolumeField> {
        self.0.iter()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().flat_map(|c| c.iter()).fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.iter().all(|x| x.is_finite()))
    }

    /// √(Σ‖Xᵢ‖₀²)
    pub fn norm0(&self, grid: &Grid) -> f64 {
        self.0.iter().map(|c| grid.norm0(c).powi(2)).sum::<f64>().sqrt()
    }

    pub fn sobolev_norm(&self, grid: &Grid, s: usize) -> f64 {
        self.0.iter().map(|c| grid.sobolev_norm(c, s).powi(2)).sum::<f64>().sqrt()
    }
}

impl Index<usize> for VectorField {
    type Output = VolumeField;
    fn index(&self, i: usize) -> &VolumeField {
        &self.0[i]
    }
}

impl IndexMut<usize> for VectorField {
    fn index_mut(&mut self, i: usize) -> &mut VolumeField {
        &mut self.0[i]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Grid {
        Grid::new(8, 8, 9, 1.0).unwrap()
    }

    #[test]
    fn vertical_nodes_are_mapped_lobatto_points() {
        let g = grid();
        for k in 0..9 {
            let expected = ((k as f64 * PI / 8.0).cos() - 1.0) / 2.0;
            assert!((g.x3()[k] - expected).abs() < 1e-15);
        }
        assert_eq!(g.x3()[0], 0.0);
        assert_eq!(g.x3()[8], -1.0);
        assert!(g.x3().windows(2).into_iter().all(|w| w[0] > w[1]));
    }

    #[test]
    fn volume_weights_sum_to_slab_volume() {
        let g = Grid::new(8, 8, 9, 1.0).unwrap();
        assert!((g.quad_volume(&g.volume_fn(|_, _, _| 1.0)) - 4.0 * PI * PI).abs() < 1e-12);
        let g = Grid::new(6, 10, 12, 2.5).unwrap();
        let vol = g.quad_volume(&g.volume_fn(|_, _, _| 1.0));
        assert!((vol / (4.0 * PI * PI * 2.5) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(matches!(Grid::new(7, 8, 9, 1.0), Err(Error::InvalidGrid(_))));
        assert!(matches!(Grid::new(2, 8, 9, 1.0), Err(Error::InvalidGrid(_))));
        assert!(matches!(Grid::new(8, 9, 9, 1.0), Err(Error::InvalidGrid(_))));
        assert!(matches!(Grid::new(8, 8, 4, 1.0), Err(Error::InvalidGrid(_))));
        assert!(matches!(Grid::new(8, 8, 9, 0.0), Err(Error::InvalidGrid(_))));
        assert!(matches!(Grid::new(8, 8, 9, -1.0), Err(Error::InvalidGrid(_))));
    }

    #[test]
    fn tangential_derivative_of_cosine() {
        let g = grid();
        let f = g.volume_fn(|x, _, _| x.cos());
        let df = g.d_tan(&f, TanAxis::X1);
        let exact = g.volume_fn(|x, _, _| -x.sin());
        assert!((&df - &exact).iter().all(|e| e.abs() < 1e-14));
        let c = g.volume_fn(|_, _, _| 3.0);
        assert!(g.d_tan(&c, TanAxis::X2).iter().all(|e| e.abs() < 1e-14));
    }

    #[test]
    fn tangential_derivative_matches_finite_differences() {
        // centered differences on the same periodic grid, error O(Δ²)
        let fd_err = |n: usize| {
            let g = Grid::new(n, n, 5, 1.0).unwrap();
            let f = g.surface_fn(|x, y| (2.0 * x).cos() * y.sin());
            let df = g.d_tan(&f, TanAxis::X2);
            let h = 2.0 * PI / n as f64;
            let mut err: f64 = 0.0;
            for j in 0..n {
                for i in 0..n {
                    let fd = (f[[(j + 1) % n, i]] - f[[(j + n - 1) % n, i]]) / (2.0 * h);
                    err = err.max((fd - df[[j, i]]).abs());
                }
            }
            err
        };
        let (e1, e2) = (fd_err(16), fd_err(32));
        assert!(e1 < 0.05 && e2 < e1);
        let order = (e1 / e2).log2();
        assert!((order - 2.0).abs() < 0.1, "observed order {order}");
    }

    #[test]
    fn vertical_derivative_of_polynomials() {
        let g = grid();
        let f = g.column(|z| z);
        assert!(g.d_vert(&f).iter().all(|d| (d - 1.0).abs() < 1e-13));
        let f2 = g.column(|z| z * z);
        let err = &g.d_vert(&f2) - &g.column(|z| 2.0 * z);
        assert!(err.iter().all(|e| e.abs() < 1e-13));
    }

    #[test]
    fn vertical_derivative_beats_finite_difference_oracle() {
        // second-order one-sided/centered differences on the Chebyshev nodes
        let g = Grid::new(4, 4, 17, 1.0).unwrap();
        let f = g.column(f64::exp);
        let d = g.d_vert(&f);
        let z = g.x3();
        let mut fd_err: f64 = 0.0;
        let mut sp_err: f64 = 0.0;
        for k in 1..16 {
            let (h0, h1) = (z[k - 1] - z[k], z[k] - z[k + 1]);
            let (fm, f0, fp) = (z[k + 1].exp(), z[k].exp(), z[k - 1].exp());
            let fd = (h1 * h1 * fp - h0 * h0 * fm + (h0 * h0 - h1 * h1) * f0) / (h0 * h1 * (h0 + h1));
            fd_err = fd_err.max((fd - z[k].exp()).abs());
            sp_err = sp_err.max((d[[k, 0, 0]] - z[k].exp()).abs());
        }
        assert!(fd_err < 1e-2);
        assert!(sp_err < 1e-12 && sp_err < fd_err);
    }

    #[test]
    fn quadrature_examples() {
        let g = grid();
        assert!(g.quad_volume(&g.volume_fn(|x, _, _| x.cos())).abs() < 1e-13);
        let s = g.surface_fn(|x, _| x.cos().powi(2));
        assert!((g.quad_surface(&s) - 2.0 * PI * PI).abs() < 1e-12);
    }

    #[test]
    fn sobolev_norm_examples() {
        let g = grid();
        let f = g.volume_fn(|x, _, _| x.cos());
        assert!((g.sobolev_norm(&f, 0) - PI * 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(g.sobolev_norm(&g.zeros_volume(), 3), 0.0);
        // direct oracle: ‖f‖² + ‖∂₁f‖² + ‖∂₂f‖² + ‖∂₃f‖² = 2π² + 2π²
        let oracle = (g.quad_volume(&f.mapv(|x| x * x))
            + g.quad_volume(&g.volume_fn(|x, _, _| x.sin().powi(2))))
        .sqrt();
        assert!((g.sobolev_norm(&f, 1) - oracle).abs() < 1e-12);
        assert!((oracle - 2.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn two_thirds_truncation_removes_high_modes() {
        let g = Grid::new(16, 16, 5, 1.0).unwrap();
        let mut f = g.surface_fn(|x, y| x.cos() + (7.0 * x).sin() * y.cos());
        g.truncate_two_thirds(&mut f);
        let kept = g.surface_fn(|x, _| x.cos());
        assert!((&f - &kept).iter().all(|e| e.abs() < 1e-13));
    }
}
