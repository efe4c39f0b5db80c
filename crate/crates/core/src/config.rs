//! Run configuration and its sectioned key-value text form.
//!
//! ```text
//! [grid]
//! nx = 32
//! depth = 1.0
//!
//! [surface]
//! psi = 0.01*cos(1,0)
//! ```
//!
//! Blank lines and `#` comments are ignored. Keys left out take their defaults;
//! unknown sections or keys are errors.

use std::fmt::Write as _;
use std::path::Path;

use crate::elliptic::SolverOptions;
use crate::error::{Error, Result};
use crate::state::{InitSpec, RandomModes};

/// Which pressure problem the stepper solves at each stage.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PressureForm {
    /// Source chosen so the discrete div^φv has zero time derivative in the interior.
    Consistent,
    /// ∂ᵢvₗ∂ₗvᵢ − ∂ᵢF_{lk}∂ₗF_{ik}, valid when div^φv = 0 exactly.
    Constrained,
}

impl PressureForm {
    fn name(self) -> &'static str {
        match self {
            PressureForm::Consistent => "consistent",
            PressureForm::Constrained => "constrained",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub init: InitSpec,
    pub dt: f64,
    pub t_final: f64,
    pub pressure: PressureForm,
    pub dealias: bool,
    pub filter: bool,
    /// Project v after every step.
    pub project: bool,
    pub snapshot_every: usize,
    /// Highest time derivative in the truncated high-order energy.
    pub k_max: usize,
    pub history_len: usize,
    /// Required lower bound on −∂₃q for the sign-condition verdicts.
    pub rt_c0: f64,
    /// Write field dumps at the snapshot cadence.
    pub dumps: bool,
    pub solver: SolverOptions,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            init: InitSpec::default(),
            dt: 0.01,
            t_final: 0.0,
            pressure: PressureForm::Consistent,
            dealias: true,
            filter: false,
            project: true,
            snapshot_every: 10,
            k_max: 1,
            history_len: 5,
            rt_c0: 0.1,
            dumps: true,
            solver: SolverOptions::default(),
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("cannot parse '{value}' for key '{key}'")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "yes" | "on" => Ok(true),
        "false" | "no" | "off" => Ok(false),
        _ => Err(Error::Config(format!("expected true/false for '{key}', got '{value}'"))),
    }
}

impl RunConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        text.parse()
    }

    fn set(&mut self, section: &str, key: &str, value: &str) -> Result<()> {
        let init = &mut self.init;
        let random = init.random.get_or_insert(RandomModes {
            count: 0,
            amplitude: 0.0,
            kmax: 0,
        });
        match (section, key) {
            ("grid", "nx") => init.nx = parse_num(key, value)?,
            ("grid", "ny") => init.ny = parse_num(key, value)?,
            ("grid", "nz") => init.nz = parse_num(key, value)?,
            ("grid", "depth") => init.depth = parse_num(key, value)?,
            ("grid", "cutoff") => init.cutoff = value.parse()?,
            ("surface", "psi") => init.psi = value.parse()?,
            ("surface", "random_count") => random.count = parse_num(key, value)?,
            ("surface", "random_amplitude") => random.amplitude = parse_num(key, value)?,
            ("surface", "random_kmax") => random.kmax = parse_num(key, value)?,
            ("surface", "seed") => init.seed = parse_num(key, value)?,
            ("fields", "v") => init.v = value.parse()?,
            ("fields", "f1") => init.f[0] = value.parse()?,
            ("fields", "f2") => init.f[1] = value.parse()?,
            ("fields", "f3") => init.f[2] = value.parse()?,
            ("physics", "sigma") => init.sigma = parse_num(key, value)?,
            ("time", "dt") => self.dt = parse_num(key, value)?,
            ("time", "t_final") => self.t_final = parse_num(key, value)?,
            ("time", "pressure") => {
                self.pressure = match value {
                    "consistent" => PressureForm::Consistent,
                    "constrained" => PressureForm::Constrained,
                    _ => return Err(Error::Config(format!("unknown pressure form '{value}'"))),
                }
            }
            ("time", "dealias") => self.dealias = parse_bool(key, value)?,
            ("time", "filter") => self.filter = parse_bool(key, value)?,
            ("time", "project") => self.project = parse_bool(key, value)?,
            ("output", "snapshot_every") => self.snapshot_every = parse_num(key, value)?,
            ("output", "k_max") => self.k_max = parse_num(key, value)?,
            ("output", "history") => self.history_len = parse_num(key, value)?,
            ("output", "rt_c0") => self.rt_c0 = parse_num(key, value)?,
            ("output", "dumps") => self.dumps = parse_bool(key, value)?,
            ("solver", "tol") => self.solver.tol = parse_num(key, value)?,
            ("solver", "max_iter") => self.solver.max_iter = parse_num(key, value)?,
            ("solver", "restart") => self.solver.restart = parse_num(key, value)?,
            _ => return Err(Error::Config(format!("unknown key '{key}' in section [{section}]"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.init.grid()?;
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Config(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_final >= 0.0 && self.t_final.is_finite()) {
            return Err(Error::Config(format!("t_final must be non-negative, got {}", self.t_final)));
        }
        if !(self.init.sigma >= 0.0) {
            return Err(Error::Config(format!("sigma must be non-negative, got {}", self.init.sigma)));
        }
        if self.snapshot_every == 0 {
            return Err(Error::Config("snapshot_every must be at least 1".into()));
        }
        if self.k_max > 4 {
            return Err(Error::Config(format!("k_max must be at most 4, got {}", self.k_max)));
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let i = &self.init;
        let r = i.random.unwrap_or(RandomModes {
            count: 0,
            amplitude: 0.0,
            kmax: 0,
        });
        let mut s = String::new();
        let _ = writeln!(s, "[grid]");
        let _ = writeln!(s, "nx = {}", i.nx);
        let _ = writeln!(s, "ny = {}", i.ny);
        let _ = writeln!(s, "nz = {}", i.nz);
        let _ = writeln!(s, "depth = {:?}", i.depth);
        let _ = writeln!(s, "cutoff = {}", i.cutoff);
        let _ = writeln!(s, "\n[surface]");
        let _ = writeln!(s, "psi = {}", i.psi);
        let _ = writeln!(s, "random_count = {}", r.count);
        let _ = writeln!(s, "random_amplitude = {:?}", r.amplitude);
        let _ = writeln!(s, "random_kmax = {}", r.kmax);
        let _ = writeln!(s, "seed = {}", i.seed);
        let _ = writeln!(s, "\n[fields]");
        let _ = writeln!(s, "v = {}", i.v);
        for (n, f) in i.f.iter().enumerate() {
            let _ = writeln!(s, "f{} = {}", n + 1, f);
        }
        let _ = writeln!(s, "\n[physics]");
        let _ = writeln!(s, "sigma = {:?}", i.sigma);
        let _ = writeln!(s, "\n[time]");
        let _ = writeln!(s, "dt = {:?}", self.dt);
        let _ = writeln!(s, "t_final = {:?}", self.t_final);
        let _ = writeln!(s, "pressure = {}", self.pressure.name());
        let _ = writeln!(s, "dealias = {}", self.dealias);
        let _ = writeln!(s, "filter = {}", self.filter);
        let _ = writeln!(s, "project = {}", self.project);
        let _ = writeln!(s, "\n[output]");
        let _ = writeln!(s, "snapshot_every = {}", self.snapshot_every);
        let _ = writeln!(s, "k_max = {}", self.k_max);
        let _ = writeln!(s, "history = {}", self.history_len);
        let _ = writeln!(s, "rt_c0 = {:?}", self.rt_c0);
        let _ = writeln!(s, "dumps = {}", self.dumps);
        let _ = writeln!(s, "\n[solver]");
        let _ = writeln!(s, "tol = {:?}", self.solver.tol);
        let _ = writeln!(s, "max_iter = {}", self.solver.max_iter);
        let _ = writeln!(s, "restart = {}", self.solver.restart);
        s
    }
}

impl std::str::FromStr for RunConfig {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        let mut section = String::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                let name = name.trim();
                if !["grid", "surface", "fields", "physics", "time", "output", "solver"].contains(&name) {
                    return Err(Error::Config(format!("line {}: unknown section [{name}]", lineno + 1)));
                }
                section = name.to_string();
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", lineno + 1)))?;
            if section.is_empty() {
                return Err(Error::Config(format!("line {}: key outside of a section", lineno + 1)));
            }
            cfg.set(&section, key.trim(), value.trim())
                .map_err(|e| Error::Config(format!("line {}: {e}", lineno + 1)))?;
        }
        if cfg.init.random.is_some_and(|r| r.count == 0) {
            cfg.init.random = None;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const SAMPLE: &str = "
# capillary run
[grid]
nx = 16
ny = 16
nz = 9
depth = 1.0

[surface]
psi = 0.01*cos(1,0)

[fields]
v = shear: 1.0*cos(0,1) | 0
f1 = stream: 0.2*sin(0,1)

[physics]
sigma = 0.1

[time]
dt = 0.025
t_final = 0.5
";

    #[test]
    fn parses_sample() {
        let c: RunConfig = SAMPLE.parse().unwrap();
        assert_eq!(c.init.nx, 16);
        assert_eq!(c.init.sigma, 0.1);
        assert_eq!(c.t_final, 0.5);
        assert!(c.init.random.is_none());
        assert_eq!(c.pressure, PressureForm::Consistent);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        assert!("[grid]\nnq = 3\n".parse::<RunConfig>().is_err());
        assert!("[mesh]\n".parse::<RunConfig>().is_err());
        assert!("[grid]\nnx = 7\n".parse::<RunConfig>().is_err());
        assert!("nx = 8\n".parse::<RunConfig>().is_err());
        assert!("[time]\ndt = -1\n".parse::<RunConfig>().is_err());
    }

    #[test]
    fn round_trip_is_idempotent() {
        let c: RunConfig = SAMPLE.parse().unwrap();
        let text = c.to_text();
        let again: RunConfig = text.parse().unwrap();
        assert_eq!(c, again);
        assert_eq!(text, again.to_text());
    }

    proptest! {
        #[test]
        fn round_trip_random_configs(
            nx in 2usize..20, nz in 5usize..30, depth in 0.1f64..5.0, amp in -1.0f64..1.0,
            k1 in -4i32..5, sigma in 0.0f64..2.0, dt in 1e-4f64..0.1, seed in any::<u64>(),
            count in 0usize..4,
        ) {
            let mut c = RunConfig::default();
            c.init.nx = 2 * nx.max(2);
            c.init.nz = nz;
            c.init.depth = depth;
            c.init.psi = format!("{amp:?}*cos({k1},1)").parse().unwrap();
            c.init.sigma = sigma;
            c.init.seed = seed;
            c.init.random = (count > 0).then_some(RandomModes { count, amplitude: 0.01, kmax: 3 });
            c.dt = dt;
            let text = c.to_text();
            let parsed: RunConfig = text.parse().unwrap();
            prop_assert_eq!(&parsed, &c);
            prop_assert_eq!(parsed.to_text(), text);
        }
    }
}
