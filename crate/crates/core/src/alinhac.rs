//! Tangential-derivative calculus: good unknowns, the commutator remainders
//! C_τ, C₃, D and the curl commutator identities, evaluated on a history.
//!
//! Every quantity is carried as a [`Series`] over the history times and only
//! the latest level is reported. Time derivatives are the derivatives of the
//! interpolating polynomial through all stored levels, so they commute exactly
//! with each other and with spatial derivatives; ∂ₜφ is taken the same way.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fd;
use crate::graphmap::Cutoff;
use crate::grid::{Grid, TanAxis, VolumeField};
use crate::state::{History, State};

/// α = (α₀; α₁, α₂): time order, then tangential orders.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct MultiIndex {
    pub t: usize,
    pub x1: usize,
    pub x2: usize,
}

impl MultiIndex {
    pub const MAX_ORDER: usize = 4;

    pub fn new(t: usize, x1: usize, x2: usize) -> Result<Self> {
        let a = Self { t, x1, x2 };
        if a.order() > Self::MAX_ORDER {
            return Err(Error::InvalidMultiIndex(format!("|{a}| = {} exceeds {}", a.order(), Self::MAX_ORDER)));
        }
        Ok(a)
    }

    pub fn order(&self) -> usize {
        self.t + self.x1 + self.x2
    }

    pub fn is_spatial(&self) -> bool {
        self.t == 0
    }

    fn components(&self) -> [usize; 3] {
        [self.t, self.x1, self.x2]
    }

    fn unit(i: usize) -> Self {
        let mut c = [0; 3];
        c[i] = 1;
        Self {
            t: c[0],
            x1: c[1],
            x2: c[2],
        }
    }

    fn minus_unit(&self, i: usize) -> Self {
        let mut c = self.components();
        c[i] -= 1;
        Self {
            t: c[0],
            x1: c[1],
            x2: c[2],
        }
    }

    /// Every α with |α| ≤ `max` and at most `max_t` time derivatives, in a fixed order.
    pub fn all(max: usize, max_t: usize) -> Vec<Self> {
        let mut out = Vec::new();
        for n in 1..=max.min(Self::MAX_ORDER) {
            for t in 0..=n.min(max_t) {
                for x1 in (0..=n - t).rev() {
                    out.push(Self { t, x1, x2: n - t - x1 });
                }
            }
        }
        out
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({};{},{})", self.t, self.x1, self.x2)
    }
}

impl FromStr for MultiIndex {
    type Err = Error;

    /// Accepts `(a0;a1,a2)` or `a0,a1,a2`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidMultiIndex(format!("cannot parse '{s}'"));
        let inner = s.trim().trim_start_matches('(').trim_end_matches(')');
        let parts: Vec<usize> = inner
            .split([';', ','])
            .map(|p| p.trim().parse().map_err(|_| bad()))
            .collect::<Result<_>>()?;
        match parts[..] {
            [t, x1, x2] => Self::new(t, x1, x2),
            _ => Err(bad()),
        }
    }
}

/// A named unknown stored in [`State`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FieldName {
    V(usize),
    /// F_{ij}: row i, column j.
    F(usize, usize),
    Q,
}

impl FieldName {
    pub fn extract(&self, s: &State) -> VolumeField {
        match *self {
            FieldName::V(i) => s.v[i].clone(),
            FieldName::F(i, j) => s.f[j][i].clone(),
            FieldName::Q => s.q.clone(),
        }
    }

    pub fn all() -> Vec<Self> {
        let mut out: Vec<Self> = (0..3).map(FieldName::V).collect();
        for i in 0..3 {
            for j in 0..3 {
                out.push(FieldName::F(i, j));
            }
        }
        out.push(FieldName::Q);
        out
    }
}

impl fmt::Display for FieldName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldName::V(i) => write!(f, "v{}", i + 1),
            FieldName::F(i, j) => write!(f, "F{}{}", i + 1, j + 1),
            FieldName::Q => write!(f, "q"),
        }
    }
}

impl FromStr for FieldName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("unknown field '{s}'"));
        let digit = |c: u8| match c {
            b'1'..=b'3' => Ok((c - b'1') as usize),
            _ => Err(bad()),
        };
        match s.as_bytes() {
            [b'v', i] => Ok(FieldName::V(digit(*i)?)),
            [b'F', i, j] => Ok(FieldName::F(digit(*i)?, digit(*j)?)),
            [b'q'] => Ok(FieldName::Q),
            _ => Err(bad()),
        }
    }
}

/// Which commutation identity to check.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Identity {
    /// D^α∂_τ^φ f = ∂_τ^φ G + C_τ(f), τ = 1, 2.
    Tangential(usize),
    /// D^α∂₃^φ f = ∂₃^φ G + C₃(f).
    Vertical,
    /// D^αD_t^φ f = D_t^φ G + D(f).
    Material,
}

impl Identity {
    pub const ALL: [Identity; 4] = [Identity::Tangential(1), Identity::Tangential(2), Identity::Vertical, Identity::Material];
}

impl fmt::Display for Identity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Identity::Tangential(t) => write!(f, "C_tau{t}"),
            Identity::Vertical => write!(f, "C_3"),
            Identity::Material => write!(f, "D"),
        }
    }
}

/// Values of one field at every history time.
#[derive(Clone, Debug)]
pub struct Series {
    times: Arc<Vec<f64>>,
    levels: Vec<VolumeField>,
}

impl Series {
    pub fn new(times: Arc<Vec<f64>>, levels: Vec<VolumeField>) -> Self {
        assert_eq!(times.len(), levels.len());
        Self { times, levels }
    }

    pub fn latest(&self) -> &VolumeField {
        self.levels.last().expect("non-empty series")
    }

    pub fn into_latest(mut self) -> VolumeField {
        self.levels.pop().expect("non-empty series")
    }

    pub fn levels(&self) -> &[VolumeField] {
        &self.levels
    }

    fn map(&self, f: impl Fn(&VolumeField) -> VolumeField) -> Series {
        Series {
            times: self.times.clone(),
            levels: self.levels.iter().map(f).collect(),
        }
    }

    fn zip(&self, other: &Series, f: impl Fn(&VolumeField, &VolumeField) -> VolumeField) -> Series {
        Series {
            times: self.times.clone(),
            levels: self.levels.iter().zip(&other.levels).map(|(a, b)| f(a, b)).collect(),
        }
    }

    fn mul(&self, o: &Series) -> Series {
        self.zip(o, |a, b| a * b)
    }

    fn add(&self, o: &Series) -> Series {
        self.zip(o, |a, b| a + b)
    }

    fn sub(&self, o: &Series) -> Series {
        self.zip(o, |a, b| a - b)
    }

    fn neg(&self) -> Series {
        self.map(|a| -a)
    }

    fn recip(&self) -> Series {
        self.map(|a| a.mapv(f64::recip))
    }

    /// k-th time derivative at every node, through all nodes.
    fn d_t(&self, k: usize) -> Result<Series> {
        if k == 0 {
            return Ok(self.clone());
        }
        let n = self.times.len();
        if n < k + 1 {
            return Err(Error::InsufficientHistory { needed: k + 1, available: n });
        }
        let levels = (0..n)
            .map(|m| {
                let w = &fd::weights(self.times[m], &self.times, k)[k];
                let mut acc = VolumeField::zeros(self.levels[0].raw_dim());
                for (wj, l) in w.iter().zip(&self.levels) {
                    acc.scaled_add(*wj, l);
                }
                acc
            })
            .collect();
        Ok(Series {
            times: self.times.clone(),
            levels,
        })
    }
}

fn spatial_then_time(grid: &Grid, s: &Series, a: MultiIndex) -> Result<Series> {
    let spatial = s.map(|l| {
        let mut out = l.clone();
        if a.x1 > 0 {
            out = grid.d_tan_n(&out, TanAxis::X1, a.x1);
        }
        if a.x2 > 0 {
            out = grid.d_tan_n(&out, TanAxis::X2, a.x2);
        }
        out
    });
    spatial.d_t(a.t)
}

/// History-backed calculus on the moving geometry.
#[derive(Debug)]
pub struct Calculus {
    grid: Grid,
    times: Arc<Vec<f64>>,
    states: Vec<State>,
    phi: Series,
    phi1: Series,
    phi2: Series,
    jac: Series,
    inv_jac: Series,
    phi_t: Series,
}

impl Calculus {
    pub fn new(hist: &History, grid: &Grid, cutoff: &Cutoff) -> Result<Self> {
        hist.require(1)?;
        let states: Vec<State> = hist.states().cloned().collect();
        for s in &states {
            grid.check_surface(&s.psi)?;
        }
        let times = Arc::new(states.iter().map(|s| s.t).collect::<Vec<_>>());
        let nz = grid.nz();
        let chi = |k: usize| cutoff.chi[k];
        let per_level = |make: &dyn Fn(&State) -> VolumeField| Series {
            times: times.clone(),
            levels: states.iter().map(make).collect(),
        };
        let column = |s: &ndarray::Array2<f64>, weight: &dyn Fn(usize) -> f64| {
            let (ny, nx) = s.dim();
            VolumeField::from_shape_fn((nz, ny, nx), |(k, j, i)| weight(k) * s[[j, i]])
        };
        let phi = per_level(&|s| &grid.column(|x3| x3) + &column(&s.psi, &chi));
        let phi1 = per_level(&|s| column(&grid.d_tan(&s.psi, TanAxis::X1), &chi));
        let phi2 = per_level(&|s| column(&grid.d_tan(&s.psi, TanAxis::X2), &chi));
        let jac = per_level(&|s| column(&s.psi, &|k| cutoff.dchi[k]).mapv(|x| 1.0 + x));
        if let Some(min) = jac.levels.iter().flat_map(|l| l.iter()).copied().reduce(f64::min) {
            if min <= 0.0 {
                return Err(Error::DegenerateMap {
                    min_jacobian: min,
                    t: *times.last().unwrap_or(&0.0),
                });
            }
        }
        let inv_jac = jac.recip();
        let phi_t = if states.len() > 1 {
            phi.d_t(1)?
        } else {
            phi.map(|l| VolumeField::zeros(l.raw_dim()))
        };
        Ok(Self {
            grid: grid.clone(),
            times,
            states,
            phi,
            phi1,
            phi2,
            jac,
            inv_jac,
            phi_t,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn field(&self, name: FieldName) -> Series {
        Series {
            times: self.times.clone(),
            levels: self.states.iter().map(|s| name.extract(s)).collect(),
        }
    }

    /// Wrap per-level values supplied by the caller.
    pub fn series(&self, levels: Vec<VolumeField>) -> Result<Series> {
        if levels.len() != self.times.len() {
            return Err(Error::InsufficientHistory {
                needed: self.times.len(),
                available: levels.len(),
            });
        }
        for l in &levels {
            self.grid.check_volume(l)?;
        }
        Ok(Series::new(self.times.clone(), levels))
    }

    pub fn phi(&self) -> &Series {
        &self.phi
    }

    fn d_tan(&self, s: &Series, axis: TanAxis) -> Series {
        s.map(|l| self.grid.d_tan(l, axis))
    }

    fn d3(&self, s: &Series) -> Series {
        s.map(|l| self.grid.d_vert(l))
    }

    /// D^α applied level by level.
    pub fn d_alpha(&self, s: &Series, a: MultiIndex) -> Result<Series> {
        spatial_then_time(&self.grid, s, a)
    }

    /// ∂ᵢ^φ for i = 1, 2, 3.
    pub fn partial(&self, i: usize, s: &Series) -> Series {
        let d3 = self.d3(s).mul(&self.inv_jac);
        match i {
            1 => self.d_tan(s, TanAxis::X1).sub(&self.phi1.mul(&d3)),
            2 => self.d_tan(s, TanAxis::X2).sub(&self.phi2.mul(&d3)),
            _ => d3,
        }
    }

    /// v·N − ∂ₜφ.
    fn relative_flux(&self, v: &[Series; 3]) -> Series {
        v[2].sub(&v[0].mul(&self.phi1)).sub(&v[1].mul(&self.phi2)).sub(&self.phi_t)
    }

    /// D_t^φ s = ∂ₜs + v̄·∂̄s + (v·N − ∂ₜφ)/∂₃φ · ∂₃s.
    pub fn material(&self, s: &Series, v: &[Series; 3]) -> Result<Series> {
        let dt = if self.times.len() > 1 {
            s.d_t(1)?
        } else {
            s.map(|l| VolumeField::zeros(l.raw_dim()))
        };
        let w = self.relative_flux(v).mul(&self.inv_jac);
        Ok(dt
            .add(&v[0].mul(&self.d_tan(s, TanAxis::X1)))
            .add(&v[1].mul(&self.d_tan(s, TanAxis::X2)))
            .add(&w.mul(&self.d3(s))))
    }

    /// [D^α, a, b] = D^α(ab) − (D^αa)b − a(D^αb).
    pub fn triple(&self, a_idx: MultiIndex, a: &Series, b: &Series) -> Result<Series> {
        let dab = self.d_alpha(&a.mul(b), a_idx)?;
        Ok(dab
            .sub(&self.d_alpha(a, a_idx)?.mul(b))
            .sub(&a.mul(&self.d_alpha(b, a_idx)?)))
    }

    /// [D^α, g]h = D^α(gh) − g D^αh.
    pub fn commutator(&self, a_idx: MultiIndex, g: &Series, h: &Series) -> Result<Series> {
        Ok(self.d_alpha(&g.mul(h), a_idx)?.sub(&g.mul(&self.d_alpha(h, a_idx)?)))
    }

    /// Σ_β (α_β/|α|)[D^{α−β}, 1/(∂₃φ)²]D^β∂₃φ over unit β ≤ α, which closes
    /// D^α(1/∂₃φ) = −D^α∂₃φ/(∂₃φ)² − (this).
    fn reciprocal_bracket(&self, a: MultiIndex) -> Result<Series> {
        let inv_j2 = self.inv_jac.mul(&self.inv_jac);
        let total = a.order() as f64;
        let mut acc: Option<Series> = None;
        for (i, &ai) in a.components().iter().enumerate() {
            if ai == 0 {
                continue;
            }
            let dj = self.d_alpha(&self.jac, MultiIndex::unit(i))?;
            let term = self.commutator(a.minus_unit(i), &inv_j2, &dj)?.map(|l| l * (ai as f64 / total));
            acc = Some(match acc {
                Some(s) => s.add(&term),
                None => term,
            });
        }
        acc.ok_or_else(|| Error::InvalidMultiIndex("|α| = 0".into()))
    }

    fn require_nonzero(a: MultiIndex) -> Result<()> {
        if a.order() == 0 {
            return Err(Error::InvalidMultiIndex("remainders need |α| ≥ 1".into()));
        }
        Ok(())
    }

    /// G = D^αf − D^αφ ∂₃^φf.
    pub fn good_unknown(&self, f: &Series, a: MultiIndex) -> Result<Series> {
        Self::require_nonzero(a)?;
        let dphi = self.d_alpha(&self.phi, a)?;
        Ok(self.d_alpha(f, a)?.sub(&dphi.mul(&self.partial(3, f))))
    }

    /// C_τ(f) = D^αφ ∂_τ^φ∂₃^φf + C_τ'(f).
    pub fn remainder_ctau(&self, f: &Series, a: MultiIndex, tau: usize) -> Result<Series> {
        Self::require_nonzero(a)?;
        if !(1..=2).contains(&tau) {
            return Err(Error::InvalidMultiIndex(format!("tangential index {tau} is not 1 or 2")));
        }
        let phi_tau = if tau == 1 { &self.phi1 } else { &self.phi2 };
        let d3f = self.d3(f);
        let dphi = self.d_alpha(&self.phi, a)?;
        let lead = dphi.mul(&self.partial(tau, &self.partial(3, f)));
        let c1 = self.triple(a, &phi_tau.mul(&self.inv_jac), &d3f)?;
        let c2 = d3f.mul(&self.triple(a, phi_tau, &self.inv_jac)?);
        let c3 = d3f.mul(phi_tau).mul(&self.reciprocal_bracket(a)?);
        Ok(lead.sub(&c1).sub(&c2).add(&c3))
    }

    /// C₃(f) = D^αφ (∂₃^φ)²f + C₃'(f).
    pub fn remainder_c3(&self, f: &Series, a: MultiIndex) -> Result<Series> {
        Self::require_nonzero(a)?;
        let d3f = self.d3(f);
        let dphi = self.d_alpha(&self.phi, a)?;
        let lead = dphi.mul(&self.partial(3, &self.partial(3, f)));
        let c1 = self.triple(a, &self.inv_jac, &d3f)?;
        let c2 = d3f.mul(&self.reciprocal_bracket(a)?);
        Ok(lead.add(&c1).sub(&c2))
    }

    /// D(f) = D^αφ D_t^φ∂₃^φf + D'(f), with v taken from the history.
    pub fn remainder_d(&self, f: &Series, a: MultiIndex, v: &[Series; 3]) -> Result<Series> {
        Self::require_nonzero(a)?;
        let d3f = self.d3(f);
        let dphi = self.d_alpha(&self.phi, a)?;
        let lead = dphi.mul(&self.material(&self.partial(3, f), v)?);

        let w = self.relative_flux(v);
        let c = w.mul(&self.inv_jac);
        let mut rem = self.commutator(a, &v[0], &self.d_tan(f, TanAxis::X1))?;
        rem = rem.add(&self.commutator(a, &v[1], &self.d_tan(f, TanAxis::X2))?);
        rem = rem.add(&self.triple(a, &c, &d3f)?);
        rem = rem.add(&self.triple(a, &self.inv_jac, &w)?.mul(&d3f));
        rem = rem.sub(&w.mul(&d3f).mul(&self.reciprocal_bracket(a)?));
        // [D^α, v]N = D^α(v·N) − v·D^αN, with D^αN = (−∂₁D^αφ, −∂₂D^αφ, 0)
        let v_dot_n = v[2].sub(&v[0].mul(&self.phi1)).sub(&v[1].mul(&self.phi2));
        let v_dot_dn = v[0]
            .mul(&self.d_tan(&dphi, TanAxis::X1))
            .add(&v[1].mul(&self.d_tan(&dphi, TanAxis::X2)))
            .neg();
        let vn_bracket = self.d_alpha(&v_dot_n, a)?.sub(&v_dot_dn);
        rem = rem.add(&self.inv_jac.mul(&d3f).mul(&vn_bracket));
        Ok(lead.add(&rem))
    }

    fn velocity(&self) -> [Series; 3] {
        std::array::from_fn(|i| self.field(FieldName::V(i)))
    }

    /// Both sides of the chosen identity at the latest time.
    pub fn identity_sides(&self, f: &Series, a: MultiIndex, which: Identity) -> Result<(VolumeField, VolumeField)> {
        let g = self.good_unknown(f, a)?;
        let (lhs, rhs) = match which {
            Identity::Tangential(tau) => (
                self.d_alpha(&self.partial(tau, f), a)?,
                self.partial(tau, &g).add(&self.remainder_ctau(f, a, tau)?),
            ),
            Identity::Vertical => (
                self.d_alpha(&self.partial(3, f), a)?,
                self.partial(3, &g).add(&self.remainder_c3(f, a)?),
            ),
            Identity::Material => {
                let v = self.velocity();
                (
                    self.d_alpha(&self.material(f, &v)?, a)?,
                    self.material(&g, &v)?.add(&self.remainder_d(f, a, &v)?),
                )
            }
        };
        Ok((lhs.into_latest(), rhs.into_latest()))
    }

    /// ‖LHS − RHS‖₀ of the chosen identity at the latest time.
    pub fn residual(&self, f: &Series, a: MultiIndex, which: Identity) -> Result<f64> {
        let (l, r) = self.identity_sides(f, a, which)?;
        Ok(self.grid.norm0(&(&l - &r)))
    }

    fn curl(&self, x: &[Series; 3]) -> [Series; 3] {
        let p = |i: usize, s: &Series| self.partial(i, s);
        [
            p(2, &x[2]).sub(&p(3, &x[1])),
            p(3, &x[0]).sub(&p(1, &x[2])),
            p(1, &x[1]).sub(&p(2, &x[0])),
        ]
    }

    /// (X·∇^φ)s.
    fn directional(&self, x: &[Series; 3], s: &Series) -> Series {
        x[0].mul(&self.partial(1, s))
            .add(&x[1].mul(&self.partial(2, s)))
            .add(&x[2].mul(&self.partial(3, s)))
    }

    /// Residuals of [curl^φ, D_t^φ]v and Σ_k [curl^φ, (F_k·∇^φ)]F_k against their
    /// first-order closed forms, at the latest time.
    pub fn curl_commutators(&self) -> Result<CurlResiduals> {
        let v = self.velocity();
        let eps = |i: usize| ((i + 1) % 3, (i + 2) % 3);

        let dv: [Series; 3] = [0, 1, 2].map(|b| self.material(&v[b], &v)).try_map_ok()?;
        let lhs1 = self.curl(&dv);
        let cv = self.curl(&v);
        let mut r1 = self.grid.zeros_volume();
        for (i, lhs) in lhs1.iter().enumerate() {
            let (a, b) = eps(i);
            let transported = self.material(&cv[i], &v)?;
            // ε^{iαβ}∂_α^φ v_k ∂_k^φ v_β over the two nonzero (α, β) orderings
            let rhs = self.directional(&self.grad_component(&v, a), &v[b])
                .sub(&self.directional(&self.grad_component(&v, b), &v[a]));
            let diff = lhs.sub(&transported).sub(&rhs).into_latest();
            r1 += &diff.mapv(|x| x * x);
        }

        let mut r2 = self.grid.zeros_volume();
        let mut acc_lhs: Option<[Series; 3]> = None;
        let mut acc_rhs: Option<[Series; 3]> = None;
        for k in 0..3 {
            let fk: [Series; 3] = std::array::from_fn(|i| self.field(FieldName::F(i, k)));
            let force: [Series; 3] = std::array::from_fn(|b| self.directional(&fk, &fk[b]));
            let cf = self.curl(&fk);
            let curl_force = self.curl(&force);
            let lhs: [Series; 3] = std::array::from_fn(|i| curl_force[i].sub(&self.directional(&fk, &cf[i])));
            let rhs: [Series; 3] = std::array::from_fn(|i| {
                let (a, b) = eps(i);
                self.directional(&self.grad_component(&fk, a), &fk[b])
                    .sub(&self.directional(&self.grad_component(&fk, b), &fk[a]))
            });
            acc_lhs = Some(match acc_lhs {
                Some(s) => std::array::from_fn(|i| s[i].add(&lhs[i])),
                None => lhs,
            });
            acc_rhs = Some(match acc_rhs {
                Some(s) => std::array::from_fn(|i| s[i].add(&rhs[i])),
                None => rhs,
            });
        }
        if let (Some(l), Some(r)) = (acc_lhs, acc_rhs) {
            for i in 0..3 {
                let d = l[i].sub(&r[i]).into_latest();
                r2 += &d.mapv(|x| x * x);
            }
        }
        Ok(CurlResiduals {
            r1: self.grid.quad_volume(&r1).sqrt(),
            r2: self.grid.quad_volume(&r2).sqrt(),
        })
    }

    /// The vector (∂_a^φ X_k)_k, indexed from zero.
    fn grad_component(&self, x: &[Series; 3], a: usize) -> [Series; 3] {
        std::array::from_fn(|k| self.partial(a + 1, &x[k]))
    }
}

trait TryMapOk<T> {
    fn try_map_ok(self) -> Result<[T; 3]>;
}

impl<T> TryMapOk<T> for [Result<T>; 3] {
    fn try_map_ok(self) -> Result<[T; 3]> {
        let [a, b, c] = self;
        Ok([a?, b?, c?])
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurlResiduals {
    pub r1: f64,
    pub r2: f64,
}

/// D^α of a stored field at the latest time.
pub fn tangential_derivative(hist: &History, grid: &Grid, field: FieldName, a: MultiIndex) -> Result<VolumeField> {
    hist.require(a.t + 1)?;
    let states: Vec<&State> = hist.states().collect();
    let times = Arc::new(states.iter().map(|s| s.t).collect::<Vec<_>>());
    let series = Series::new(times, states.iter().map(|s| field.extract(s)).collect());
    Ok(spatial_then_time(grid, &series, a)?.into_latest())
}

pub fn good_unknown(hist: &History, grid: &Grid, cutoff: &Cutoff, field: FieldName, a: MultiIndex) -> Result<VolumeField> {
    let c = Calculus::new(hist, grid, cutoff)?;
    Ok(c.good_unknown(&c.field(field), a)?.into_latest())
}

pub fn remainder_ctau(
    hist: &History,
    grid: &Grid,
    cutoff: &Cutoff,
    field: FieldName,
    a: MultiIndex,
    tau: usize,
) -> Result<VolumeField> {
    let c = Calculus::new(hist, grid, cutoff)?;
    Ok(c.remainder_ctau(&c.field(field), a, tau)?.into_latest())
}

pub fn remainder_c3(hist: &History, grid: &Grid, cutoff: &Cutoff, field: FieldName, a: MultiIndex) -> Result<VolumeField> {
    let c = Calculus::new(hist, grid, cutoff)?;
    Ok(c.remainder_c3(&c.field(field), a)?.into_latest())
}

pub fn remainder_d(hist: &History, grid: &Grid, cutoff: &Cutoff, field: FieldName, a: MultiIndex) -> Result<VolumeField> {
    let c = Calculus::new(hist, grid, cutoff)?;
    let v = c.velocity();
    Ok(c.remainder_d(&c.field(field), a, &v)?.into_latest())
}

pub fn alinhac_residual(
    hist: &History,
    grid: &Grid,
    cutoff: &Cutoff,
    field: FieldName,
    a: MultiIndex,
    which: Identity,
) -> Result<f64> {
    let c = Calculus::new(hist, grid, cutoff)?;
    c.residual(&c.field(field), a, which)
}

pub fn curl_commutator_residuals(hist: &History, grid: &Grid, cutoff: &Cutoff) -> Result<CurlResiduals> {
    Calculus::new(hist, grid, cutoff)?.curl_commutators()
}
