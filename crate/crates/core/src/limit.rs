//! Zero-surface-tension sweeps: one run per σ from shared initial recipes,
//! H² distances between members, and the Rayleigh–Taylor gate on the verdict.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::evolve::run;
use crate::grid::Grid;
use crate::state::State;

/// |Δψ|_{H²(Σ)} + ‖Δv‖_{H²} + Σⱼ‖ΔFⱼ‖_{H²}.
pub fn distance(a: &State, b: &State, grid: &Grid) -> f64 {
    let mut d = grid.sobolev_norm_surface(&(&a.psi - &b.psi), 2) + a.v.sub(&b.v).sobolev_norm(grid, 2);
    for j in 0..3 {
        d += a.f[j].sub(&b.f[j]).sobolev_norm(grid, 2);
    }
    d
}

/// One completed (or aborted) member of a sweep.
#[derive(Clone, Debug)]
pub struct MemberRun {
    pub sigma: f64,
    pub snapshots: Vec<(usize, State)>,
    /// Minimum of rt_min over every recorded step.
    pub rt_min: f64,
    pub steps: usize,
    pub error: Option<String>,
}

impl MemberRun {
    pub fn completed(&self) -> bool {
        self.error.is_none()
    }
}

/// sup over shared snapshot steps of the member distance.
pub fn snapshot_distance(a: &MemberRun, b: &MemberRun, grid: &Grid) -> Result<f64> {
    let mut sup: f64 = 0.0;
    let mut shared = 0;
    for (n, sa) in &a.snapshots {
        if let Some((_, sb)) = b.snapshots.iter().find(|(m, _)| m == n) {
            sup = sup.max(distance(sa, sb, grid));
            shared += 1;
        }
    }
    if shared == 0 {
        return Err(Error::InvalidSweep("members share no snapshot times".into()));
    }
    Ok(sup)
}

#[derive(Clone, Debug, PartialEq)]
pub enum Verdict {
    /// The distance sequence decreases strictly.
    Monotone,
    NotMonotone,
    /// RT condition failed in some member; convergence is not asserted either way.
    Withheld { rt_min: f64 },
    /// A member aborted.
    Void { sigma: f64, reason: String },
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Verdict::Monotone => write!(f, "monotone"),
            Verdict::NotMonotone => write!(f, "not-monotone"),
            Verdict::Withheld { .. } => write!(f, "withheld"),
            Verdict::Void { .. } => write!(f, "void"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DistanceRow {
    pub sigma_i: f64,
    pub sigma_j: f64,
    pub distance: f64,
    pub rt_min_i: f64,
}

#[derive(Clone, Debug)]
pub struct SweepReport {
    pub sigmas: Vec<f64>,
    pub rt_c0: f64,
    /// rt_min per member, in list order.
    pub rt_mins: Vec<f64>,
    /// d(σᵢ, σᵢ₊₁) for consecutive members.
    pub consecutive: Vec<DistanceRow>,
    /// d(σᵢ, 0) when the list ends with σ = 0.
    pub to_zero: Vec<DistanceRow>,
    pub verdict: Verdict,
}

impl SweepReport {
    pub const CSV_HEADER: &'static str = "sigma_i,sigma_j,distance,rt_min_i,verdict";

    /// Consecutive rows followed by the d(σ, 0) rows, without repeating the
    /// last consecutive pair when it is already a d(σ, 0) row.
    pub fn rows(&self) -> impl Iterator<Item = &DistanceRow> {
        let skip_last = !self.to_zero.is_empty();
        let n = self.consecutive.len() - usize::from(skip_last && !self.consecutive.is_empty());
        self.consecutive[..n].iter().chain(&self.to_zero)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{}", Self::CSV_HEADER);
        for r in self.rows() {
            let _ = writeln!(
                s,
                "{:e},{:e},{:.17e},{:.17e},{}",
                r.sigma_i, r.sigma_j, r.distance, r.rt_min_i, self.verdict
            );
        }
        s
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "sigma sweep over {:?}", self.sigmas);
        for (sig, rt) in self.sigmas.iter().zip(&self.rt_mins) {
            let _ = writeln!(s, "  sigma = {sig:<8e} rt_min = {rt:.4e}");
        }
        for r in self.rows() {
            let _ = writeln!(s, "  d({:e}, {:e}) = {:.6e}", r.sigma_i, r.sigma_j, r.distance);
        }
        let _ = match &self.verdict {
            Verdict::Monotone => writeln!(s, "verdict: distances decrease strictly"),
            Verdict::NotMonotone => writeln!(s, "verdict: distances do NOT decrease strictly"),
            Verdict::Withheld { rt_min } => writeln!(
                s,
                "verdict: WITHHELD, sign condition failed (rt_min = {rt_min:.4e} < {:.4e})",
                self.rt_c0
            ),
            Verdict::Void { sigma, reason } => writeln!(s, "verdict: VOID, member sigma = {sigma:e} aborted: {reason}"),
        };
        s
    }
}

fn check_sigmas(sigmas: &[f64]) -> Result<()> {
    if sigmas.is_empty() {
        return Err(Error::InvalidSweep("empty sigma list".into()));
    }
    if sigmas.iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
        return Err(Error::InvalidSweep(format!("sigmas must be finite and non-negative: {sigmas:?}")));
    }
    if sigmas.windows(2).any(|w| w[1] > w[0]) {
        return Err(Error::InvalidSweep(format!("sigmas must not increase: {sigmas:?}")));
    }
    Ok(())
}

/// Run one member: the base config with σ replaced.
pub fn run_member(base: &RunConfig, sigma: f64) -> Result<MemberRun> {
    let mut cfg = base.clone();
    cfg.init.sigma = sigma;
    let out = run(&cfg)?;
    let rt_min = out.records.iter().map(|r| r.rt_min).fold(f64::INFINITY, f64::min);
    Ok(MemberRun {
        sigma,
        snapshots: out.snapshots,
        rt_min,
        steps: out.steps,
        error: out.error.map(|e| e.to_string()),
    })
}

/// Run every member (in parallel) and reduce them into a report.
pub fn sweep_sigma(base: &RunConfig, sigmas: &[f64]) -> Result<(SweepReport, Vec<MemberRun>)> {
    check_sigmas(sigmas)?;
    base.validate()?;
    let members: Vec<MemberRun> = sigmas
        .par_iter()
        .map(|&s| run_member(base, s))
        .collect::<Result<_>>()?;
    let grid = base.init.grid()?;
    let report = reduce(&members, &grid, base.rt_c0)?;
    Ok((report, members))
}

/// d(σᵢ, 0) for each member against a σ = 0 run.
pub fn limit_compare(members: &[MemberRun], zero: &MemberRun, grid: &Grid) -> Result<Vec<DistanceRow>> {
    if zero.sigma != 0.0 {
        return Err(Error::InvalidSweep(format!("reference run has sigma = {:e}, not 0", zero.sigma)));
    }
    members
        .iter()
        .map(|m| {
            Ok(DistanceRow {
                sigma_i: m.sigma,
                sigma_j: 0.0,
                distance: snapshot_distance(m, zero, grid)?,
                rt_min_i: m.rt_min,
            })
        })
        .collect()
}

fn strictly_decreasing(rows: &[DistanceRow]) -> bool {
    rows.windows(2).all(|w| w[1].distance < w[0].distance)
}

/// Build the report from finished members, in list order.
pub fn reduce(members: &[MemberRun], grid: &Grid, rt_c0: f64) -> Result<SweepReport> {
    let sigmas: Vec<f64> = members.iter().map(|m| m.sigma).collect();
    let rt_mins: Vec<f64> = members.iter().map(|m| m.rt_min).collect();
    let mut consecutive = Vec::new();
    for w in members.windows(2) {
        consecutive.push(DistanceRow {
            sigma_i: w[0].sigma,
            sigma_j: w[1].sigma,
            distance: snapshot_distance(&w[0], &w[1], grid)?,
            rt_min_i: w[0].rt_min,
        });
    }
    let to_zero = match members.split_last() {
        Some((last, rest)) if last.sigma == 0.0 && !rest.is_empty() => limit_compare(rest, last, grid)?,
        _ => Vec::new(),
    };
    let worst_rt = rt_mins.iter().copied().fold(f64::INFINITY, f64::min);
    let verdict = if let Some(m) = members.iter().find(|m| !m.completed()) {
        Verdict::Void {
            sigma: m.sigma,
            reason: m.error.clone().unwrap_or_default(),
        }
    } else if !(worst_rt >= rt_c0) {
        Verdict::Withheld { rt_min: worst_rt }
    } else {
        let rows = if to_zero.is_empty() { &consecutive } else { &to_zero };
        if strictly_decreasing(rows) {
            Verdict::Monotone
        } else {
            Verdict::NotMonotone
        }
    };
    Ok(SweepReport {
        sigmas,
        rt_c0,
        rt_mins,
        consecutive,
        to_zero,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config() -> RunConfig {
        let mut c = RunConfig::default();
        c.init.nx = 8;
        c.init.ny = 8;
        c.init.nz = 7;
        c.dt = 0.02;
        c.t_final = 0.06;
        c.snapshot_every = 1;
        c.rt_c0 = 0.0;
        c
    }

    fn member(sigma: f64, rt_min: f64, error: Option<&str>) -> MemberRun {
        let grid = Grid::new(8, 8, 7, 1.0).unwrap();
        let mut s = State::rest(&grid, sigma);
        s.psi.fill(sigma);
        MemberRun {
            sigma,
            snapshots: vec![(0, s)],
            rt_min,
            steps: 0,
            error: error.map(String::from),
        }
    }

    #[test]
    fn rest_data_gives_zero_distances() {
        let (report, members) = sweep_sigma(&small_config(), &[1e-2, 1e-2, 0.0]).unwrap();
        assert_eq!(members.len(), 3);
        assert!(report.consecutive.iter().chain(&report.to_zero).all(|r| r.distance == 0.0));
        // equal distances are not strictly decreasing
        assert_eq!(report.verdict, Verdict::NotMonotone);
    }

    #[test]
    fn duplicate_sigma_gives_zero_distance() {
        let mut c = small_config();
        c.init.psi = "0.01*cos(1,0)".parse().unwrap();
        let (report, _) = sweep_sigma(&c, &[1e-2, 1e-2]).unwrap();
        assert_eq!(report.consecutive[0].distance, 0.0);
    }

    #[test]
    fn sweep_is_deterministic() {
        let mut c = small_config();
        c.init.psi = "0.01*cos(1,0)".parse().unwrap();
        c.init.v = "potential: 0.1*cos(1,0)".parse().unwrap();
        let (a, _) = sweep_sigma(&c, &[1e-1, 1e-2, 0.0]).unwrap();
        let (b, _) = sweep_sigma(&c, &[1e-1, 1e-2, 0.0]).unwrap();
        assert_eq!(a.to_csv(), b.to_csv());
        assert!(a.to_zero.iter().all(|r| r.distance > 0.0));
    }

    #[test]
    fn rejects_bad_lists() {
        let c = small_config();
        assert!(matches!(sweep_sigma(&c, &[1e-3, 1e-2]), Err(Error::InvalidSweep(_))));
        assert!(matches!(sweep_sigma(&c, &[]), Err(Error::InvalidSweep(_))));
        assert!(matches!(sweep_sigma(&c, &[-1.0]), Err(Error::InvalidSweep(_))));
    }

    #[test]
    fn verdict_gating() {
        let grid = Grid::new(8, 8, 7, 1.0).unwrap();
        let ok = [member(0.3, 1.0, None), member(0.1, 1.0, None), member(0.0, 1.0, None)];
        let r = reduce(&ok, &grid, 0.5).unwrap();
        assert_eq!(r.verdict, Verdict::Monotone);
        assert!(r.to_zero[0].distance > r.to_zero[1].distance);

        let weak = [member(0.3, 1.0, None), member(0.1, 0.2, None), member(0.0, 1.0, None)];
        assert_eq!(reduce(&weak, &grid, 0.5).unwrap().verdict, Verdict::Withheld { rt_min: 0.2 });
        assert!(reduce(&weak, &grid, 0.5).unwrap().summary().contains("WITHHELD"));

        let broken = [member(0.3, 1.0, None), member(0.0, 1.0, Some("degenerate"))];
        assert!(matches!(reduce(&broken, &grid, 0.5).unwrap().verdict, Verdict::Void { .. }));

        let zero = member(0.0, 1.0, None);
        assert_eq!(limit_compare(std::slice::from_ref(&zero), &zero, &grid).unwrap()[0].distance, 0.0);
        assert!(limit_compare(&ok[..1], &ok[1], &grid).is_err());
    }
}
