//! End-to-end runs of the `capelast` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use capelast::io::{read_dump, DumpKind, Manifest};

fn capelast(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_capelast"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

fn csv_column(path: &Path, name: &str) -> Vec<f64> {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let col = lines.next().unwrap().split(',').position(|h| h == name).unwrap();
    lines.map(|l| l.split(',').nth(col).unwrap().parse().unwrap()).collect()
}

const REST: &str = "[grid]\nnx = 8\nny = 8\nnz = 7\n[physics]\nsigma = 1.0\n[time]\ndt = 0.05\nt_final = 0.2\n";

const CAPILLARY: &str = "\
[grid]
nx = 16
ny = 16
nz = 9
[surface]
psi = 0.01*cos(1,0)
random_count = 3
random_amplitude = 0.001
random_kmax = 3
seed = 11
[fields]
f1 = stream: 0.5*sin(0,1)
[physics]
sigma = 0.1
[time]
dt = 0.05
t_final = 0.2
[output]
snapshot_every = 2
";

#[test]
fn missing_config_exits_2() {
    let o = capelast(&["simulate"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
    assert_eq!(code(&capelast(&["simulate", "--config", "/no/such/file.cfg"])), 2);
}

#[test]
fn rest_state_keeps_energy() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "rest.cfg", REST);
    let out = dir.path().join("out");
    let o = capelast(&["simulate", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let e = csv_column(&out.join("diagnostics.csv"), "E_cons");
    assert_eq!(e.len(), 5);
    assert!(e.iter().all(|x| *x == e[0]));
}

#[test]
fn capillary_run_writes_everything() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "cap.cfg", CAPILLARY);
    let out = dir.path().join("out");
    let o = capelast(&["simulate", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));

    let m = Manifest::read(&out.join("manifest.json")).unwrap();
    assert_eq!((m.nx, m.ny, m.nz, m.depth, m.sigma), (16, 16, 9, 1.0, 0.1));
    assert_eq!((m.steps_planned, m.steps_done), (4, 4));
    assert!((m.t - 0.2).abs() < 1e-12);
    assert!(m.error.is_none());
    // steps 0, 2, 4 with 14 fields each
    assert_eq!(m.dumps.len(), 3 * 14);
    for e in &m.dumps {
        let d = read_dump(&out.join(&e.path)).unwrap();
        assert_eq!((d.nx, d.ny, d.kind), (16, 16, e.kind));
        assert_eq!(d.nz, if e.kind == DumpKind::Volume { 9 } else { 1 });
        assert!(d.data.iter().all(|x| x.is_finite()));
    }
    let psi0 = m.dumps.iter().find(|e| e.field == "psi" && e.step == 0).unwrap();
    let psi0 = read_dump(&out.join(&psi0.path)).unwrap().surface().unwrap();
    // the cos(x₁) mode plus a small random perturbation
    assert!((psi0[[0, 0]] - 0.01).abs() < 0.01);

    // same seed and config, bitwise identical output
    let again = dir.path().join("again");
    assert_eq!(code(&capelast(&["simulate", "--config", &cfg, "--out", again.to_str().unwrap()])), 0);
    assert_eq!(
        fs::read(out.join("diagnostics.csv")).unwrap(),
        fs::read(again.join("diagnostics.csv")).unwrap()
    );
    let other = dir.path().join("other");
    let o = capelast(&["simulate", "--config", &cfg, "--out", other.to_str().unwrap(), "--seed", "12"]);
    assert_eq!(code(&o), 0);
    assert_ne!(
        fs::read(out.join("diagnostics.csv")).unwrap(),
        fs::read(other.join("diagnostics.csv")).unwrap()
    );
}

#[test]
fn aborted_run_exits_1_with_partial_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "cap.cfg", CAPILLARY);
    let out = dir.path().join("out");
    // far beyond the capillary time step bound
    let o = capelast(&["simulate", "--config", &cfg, "--out", out.to_str().unwrap(), "--dt", "0.2", "--nx", "32", "--ny", "32"]);
    assert_eq!(code(&o), 1);
    let m = Manifest::read(&out.join("manifest.json")).unwrap();
    assert!(m.error.is_some());
    assert!(m.steps_done < m.steps_planned);
    assert!(!csv_column(&out.join("diagnostics.csv"), "t").is_empty());
}

#[test]
fn verify_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let o = capelast(&["verify", "--suite", "operators", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let table = fs::read_to_string(dir.path().join("verify_operators.csv")).unwrap();
    assert!(table.starts_with("identity,alpha,resolution,residual"));
    assert!(table.contains("32x32x17"));

    assert_eq!(code(&capelast(&["verify", "--suite", "nonsense"])), 2);

    let short = write(dir.path(), "short.cfg", "[output]\nhistory = 3\n");
    let o = capelast(&["verify", "--suite", "alinhac", "--config", &short]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("history"));

    // too coarse for the lemma tolerances; the table is still written
    let o = capelast(&["verify", "--suite", "lemmas", "--nx", "4", "--ny", "4", "--nz", "5"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stdout).contains("false"));
}

#[test]
fn sweep_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "sweep.cfg",
        "[grid]\nnx = 8\nny = 8\nnz = 7\n[surface]\npsi = 0.01*cos(1,0)\n[time]\ndt = 0.02\nt_final = 0.06\n[output]\nsnapshot_every = 1\nrt_c0 = 0.0\n",
    );
    let out = dir.path().join("dup");
    let o = capelast(&["sweep-sigma", "--config", &cfg, "--sigmas", "0.1,0.1", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let d = csv_column(&out.join("sweep.csv"), "distance");
    assert_eq!(d, vec![0.0]);

    let out = dir.path().join("abort");
    let o = capelast(&["sweep-sigma", "--config", &cfg, "--sigmas", "1000,0", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(fs::read_to_string(out.join("sweep.csv")).unwrap().contains("void"));

    assert_eq!(code(&capelast(&["sweep-sigma", "--config", &cfg, "--sigmas", "0,0.1"])), 2);
}
