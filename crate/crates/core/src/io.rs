//! Field dumps and the run manifest.
//!
//! A dump is an ASCII header line `CAPELAST1 nx ny nz b kind` followed by the
//! samples as little-endian f64 in row-major (z, y, x) order. Surface dumps
//! use nz = 1.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid, SurfaceField, VolumeField};
use crate::state::State;

const MAGIC: &str = "CAPELAST1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DumpKind {
    Volume,
    Surface,
}

impl DumpKind {
    fn name(self) -> &'static str {
        match self {
            DumpKind::Volume => "volume",
            DumpKind::Surface => "surface",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Dump {
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
    pub depth: f64,
    pub kind: DumpKind,
    pub data: Vec<f64>,
}

impl Dump {
    pub fn volume(&self) -> Result<VolumeField> {
        VolumeField::from_shape_vec((self.nz, self.ny, self.nx), self.data.clone())
            .map_err(|e| Error::Dump(e.to_string()))
    }

    pub fn surface(&self) -> Result<SurfaceField> {
        SurfaceField::from_shape_vec((self.ny, self.nx), self.data.clone()).map_err(|e| Error::Dump(e.to_string()))
    }
}

fn write_raw<'a>(path: &Path, grid: &Grid, kind: DumpKind, data: impl Iterator<Item = &'a f64>) -> Result<()> {
    let nz = if kind == DumpKind::Volume { grid.nz() } else { 1 };
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "{MAGIC} {} {} {} {:?} {}", grid.nx(), grid.ny(), nz, grid.depth(), kind.name())?;
    for x in data {
        w.write_all(&x.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_volume(path: &Path, grid: &Grid, f: &VolumeField) -> Result<()> {
    grid.check_volume(f)?;
    write_raw(path, grid, DumpKind::Volume, f.iter())
}

pub fn write_surface(path: &Path, grid: &Grid, f: &SurfaceField) -> Result<()> {
    grid.check_surface(f)?;
    write_raw(path, grid, DumpKind::Surface, f.iter())
}

pub fn read_dump(path: &Path) -> Result<Dump> {
    let mut r = BufReader::new(File::open(path)?);
    let mut header = String::new();
    r.read_line(&mut header)?;
    let parts: Vec<&str> = header.split_whitespace().collect();
    let bad = |what: &str| Error::Dump(format!("{}: {what}", path.display()));
    if parts.len() != 6 || parts[0] != MAGIC {
        return Err(bad("not a field dump"));
    }
    let num = |s: &str| s.parse::<usize>().map_err(|_| bad("bad dimension"));
    let (nx, ny, nz) = (num(parts[1])?, num(parts[2])?, num(parts[3])?);
    let depth: f64 = parts[4].parse().map_err(|_| bad("bad depth"))?;
    let kind = match parts[5] {
        "volume" => DumpKind::Volume,
        "surface" => DumpKind::Surface,
        _ => return Err(bad("bad kind")),
    };
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    let count = nx * ny * nz;
    if bytes.len() != 8 * count {
        return Err(bad(&format!("expected {count} samples, found {} bytes", bytes.len())));
    }
    let data = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect();
    Ok(Dump {
        nx,
        ny,
        nz,
        depth,
        kind,
        data,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DumpEntry {
    pub step: usize,
    pub t: f64,
    pub field: String,
    pub kind: DumpKind,
    pub path: PathBuf,
}

/// Write ψ, v, F and q of one state into `dir`; returns the manifest entries.
pub fn dump_state(dir: &Path, grid: &Grid, step: usize, state: &State) -> Result<Vec<DumpEntry>> {
    let mut entries = Vec::new();
    let mut put = |field: String, kind: DumpKind, write: &dyn Fn(&Path) -> Result<()>| -> Result<()> {
        let name = PathBuf::from(format!("{field}_{step:06}.bin"));
        write(&dir.join(&name))?;
        entries.push(DumpEntry {
            step,
            t: state.t,
            field,
            kind,
            path: name,
        });
        Ok(())
    };
    put("psi".into(), DumpKind::Surface, &|p| write_surface(p, grid, &state.psi))?;
    for i in 0..3 {
        put(format!("v{}", i + 1), DumpKind::Volume, &|p| write_volume(p, grid, &state.v[i]))?;
    }
    for j in 0..3 {
        for i in 0..3 {
            put(format!("F{}{}", i + 1, j + 1), DumpKind::Volume, &|p| write_volume(p, grid, &state.f[j][i]))?;
        }
    }
    put("q".into(), DumpKind::Volume, &|p| write_volume(p, grid, &state.q))?;
    Ok(entries)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format: String,
    pub config: String,
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
    pub depth: f64,
    pub sigma: f64,
    /// Time of the last completed step.
    pub t: f64,
    pub dt: f64,
    pub steps_planned: usize,
    pub steps_done: usize,
    pub t_final: f64,
    pub diagnostics: PathBuf,
    pub dumps: Vec<DumpEntry>,
    /// Why the run stopped early, if it did.
    pub error: Option<String>,
}

impl Manifest {
    pub fn write(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        serde_json::to_writer_pretty(&mut w, self)?;
        writeln!(w)?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        Ok(serde_json::from_reader(BufReader::new(File::open(path)?))?)
    }
}
