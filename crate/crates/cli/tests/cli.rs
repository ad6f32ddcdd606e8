use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use edscat::marchenko::{build_kernel_from_data, nystrom_solution, recover_potentials, KernelConfig, NystromConfig};
use edscat::model::io::{self, Document};
use edscat::model::{
    build_triplets, BoundState, BoundStateTriplets, PotentialPair, ScatteringMatrixData, SpatialGrid, Variant,
};
use edscat::numerics::{max_abs, max_abs_diff};
use num_complex::Complex64 as C64;
use serde_json::Value;

struct Scratch(PathBuf);

impl Scratch {
    fn new(tag: &str) -> Self {
        let dir = std::env::temp_dir().join(format!("edscat-cli-{tag}-{}", std::process::id()));
        let _ = fs::remove_dir_all(&dir);
        fs::create_dir_all(&dir).unwrap();
        Scratch(dir)
    }

    fn path(&self, name: &str) -> PathBuf {
        self.0.join(name)
    }

    fn put(&self, name: &str, doc: &Document) -> PathBuf {
        let p = self.path(name);
        fs::write(&p, io::to_string(doc)).unwrap();
        p
    }
}

impl Drop for Scratch {
    fn drop(&mut self) {
        let _ = fs::remove_dir_all(&self.0);
    }
}

fn edscat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_edscat")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> Value {
    let out = edscat(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    if out.stdout.is_empty() {
        return Value::Null;
    }
    serde_json::from_slice(&out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn load(p: &Path) -> Document {
    io::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

fn scattering(p: &Path) -> ScatteringMatrixData {
    match load(p) {
        Document::Scattering(d) => d,
        _ => panic!("not scattering data"),
    }
}

fn potential(p: &Path) -> PotentialPair {
    match load(p) {
        Document::Potential(d) => d,
        _ => panic!("not a potential"),
    }
}

fn gaussian(grid: SpatialGrid) -> PotentialPair {
    PotentialPair::from_fn(
        grid,
        Variant::EnergyDependent,
        |x| C64::new((-x * x).exp(), 0.0),
        |x| C64::new(0.5 * (-x * x).exp(), 0.0),
    )
    .unwrap()
}

fn num(v: &Value, key: &str) -> f64 {
    v[key].as_f64().unwrap_or_else(|| panic!("report lacks {key}: {v}"))
}

fn two_state() -> BoundStateTriplets {
    build_triplets(
        &[BoundState::simple(C64::new(0.0, 1.0), C64::new(2.0, 0.0))],
        &[BoundState::simple(C64::new(0.0, -1.0), C64::new(-2.0, 0.0))],
    )
    .unwrap()
}

#[test]
fn direct_zero_potential_is_free() {
    let dir = Scratch::new("zero");
    let g = SpatialGrid::new(-5.0, 5.0, 101).unwrap();
    for v in [Variant::EnergyDependent, Variant::Uv, Variant::Ps] {
        let inp = dir.put("zero.json", &Document::Potential(PotentialPair::zeros(g, v)));
        let out = dir.path("data.json");
        let rep = ok(&["direct", s(&inp), "-o", s(&out), "--spectral", "-5:5:40"]);
        assert!(num(&rep, "residual.relation") < 1e-12);
        assert!(num(&rep, "residual.wronskian_drift") < 1e-12);
        let d = scattering(&out);
        let one = C64::new(1.0, 0.0);
        assert!(d.t.iter().chain(&d.t_bar).all(|t| (t - one).norm() < 1e-12));
        assert!(max_abs(&d.r).max(max_abs(&d.l)).max(max_abs(&d.r_bar)).max(max_abs(&d.l_bar)) < 1e-12);
    }
}

#[test]
fn direct_gaussian_relation_and_plots() {
    let dir = Scratch::new("gauss");
    let inp = dir.put("g.json", &Document::Potential(gaussian(SpatialGrid::new(-8.0, 8.0, 401).unwrap())));
    let out = dir.path("data.json");
    let rep_path = dir.path("report.json");
    let prefix = dir.path("plot");
    ok(&[
        "direct",
        s(&inp),
        "-o",
        s(&out),
        "--spectral",
        "-10:10:201",
        "--report",
        s(&rep_path),
        "--plot",
        s(&prefix),
    ]);
    let rep: Value = serde_json::from_str(&fs::read_to_string(&rep_path).unwrap()).unwrap();
    assert!(num(&rep, "residual.relation") < 1e-6);
    assert_eq!(rep["input_digest"].as_str().unwrap().len(), 64);
    assert!(num(&rep, "wall_time_s") >= 0.0);
    let t = fs::read_to_string(dir.path("plot_T.dat")).unwrap();
    assert_eq!(t.lines().count(), 202);
    assert_eq!(t.lines().nth(1).unwrap().split_whitespace().count(), 3);
    assert_eq!(scattering(&out).t.len(), 201);
}

#[test]
fn direct_is_deterministic() {
    let dir = Scratch::new("det");
    let inp = dir.put("g.json", &Document::Potential(gaussian(SpatialGrid::new(-8.0, 8.0, 201).unwrap())));
    let (a, b) = (dir.path("a.json"), dir.path("b.json"));
    ok(&["direct", s(&inp), "-o", s(&a), "--spectral", "-4:4:20"]);
    ok(&["direct", s(&inp), "-o", s(&b), "--spectral", "-4:4:20"]);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn malformed_input_exits_2_without_outputs() {
    let dir = Scratch::new("bad");
    let inp = dir.path("bad.json");
    fs::write(&inp, "{ \"schema\": \"potential-pair/1\", \"grid\": ").unwrap();
    let out = dir.path("data.json");
    let rep = dir.path("report.json");
    let o = edscat(&["direct", s(&inp), "-o", s(&out), "--report", s(&rep)]);
    assert_eq!(o.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["exit_code"], 2);
    assert!(!out.exists() && !rep.exists());
    assert_eq!(fs::read_dir(&dir.0).unwrap().count(), 1);
}

#[test]
fn bad_flags_exit_2() {
    assert_eq!(edscat(&["direct", "x", "-o", "y", "--tol", "nonsense=1"]).status.code(), Some(2));
    assert_eq!(edscat(&["direct", "x", "-o", "y", "--grid", "1:2"]).status.code(), Some(2));
}

#[test]
fn numerical_failure_exits_3() {
    let dir = Scratch::new("num");
    // a coarse spectral grid cannot resolve the kernel range: Nyquist guard
    let data = dir.path("d.json");
    let g = gaussian(SpatialGrid::new(-8.0, 8.0, 201).unwrap());
    let gin = dir.put("g.json", &Document::Potential(g));
    ok(&["direct", s(&gin), "-o", s(&data), "--spectral", "-1:1:4"]);
    let out = dir.path("inv.json");
    let o = edscat(&["invert", s(&data), "-o", s(&out), "--grid", "-8:8:81"]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(!out.exists());
}

#[test]
fn invert_zero_data_gives_zero_potential() {
    let dir = Scratch::new("invzero");
    let g = SpatialGrid::new(-5.0, 5.0, 101).unwrap();
    let inp = dir.put("zero.json", &Document::Potential(PotentialPair::zeros(g, Variant::EnergyDependent)));
    let data = dir.path("data.json");
    ok(&["direct", s(&inp), "-o", s(&data), "--spectral", "-20:20:400"]);
    for m in ["marchenko5", "alternate"] {
        let out = dir.path("pot.json");
        let rep = ok(&["invert", s(&data), "-o", s(&out), "--grid", "-5:5:51", "--method", m]);
        assert!(num(&rep, "residual.phase_disagreement") < 1e-12);
        let p = potential(&out);
        assert_eq!(p.max_abs(), 0.0);
    }
}

#[test]
fn synth_empty_triplets() {
    let dir = Scratch::new("synth0");
    let inp = dir.put("t.json", &Document::Triplets(Variant::Uv, BoundStateTriplets::empty()));
    let (data, pot) = (dir.path("d.json"), dir.path("p.json"));
    ok(&["synth", s(&inp), "--data-out", s(&data), "--potential-out", s(&pot), "--spectral", "-4:4:40"]);
    let d = scattering(&data);
    assert!(d.is_reflectionless() && d.t.iter().all(|t| *t == C64::new(1.0, 0.0)));
    assert_eq!(potential(&pot).max_abs(), 0.0);
}

#[test]
fn synth_one_state_decoupled() {
    let dir = Scratch::new("synth1");
    let t = build_triplets(&[BoundState::simple(C64::new(0.0, 1.0), C64::new(2.0, 0.0))], &[]).unwrap();
    let inp = dir.put("t.json", &Document::Triplets(Variant::Uv, t));
    let (data, pot) = (dir.path("d.json"), dir.path("p.json"));
    ok(&[
        "synth",
        s(&inp),
        "--data-out",
        s(&data),
        "--potential-out",
        s(&pot),
        "--grid",
        "0:10:101",
        "--variant",
        "uv",
        "--tol",
        "output_decay=10",
    ]);
    let p = potential(&pot);
    assert_eq!(p.variant, Variant::Uv);
    assert!(max_abs(&p.first) < 1e-14);
    for (k, x) in p.grid.points().into_iter().enumerate() {
        assert!((p.second[k] - 4.0 * (-2.0 * x).exp()).norm() < 1e-12);
    }
    let d = scattering(&data);
    assert!(d.is_reflectionless());
    let o = edscat(&["synth", s(&inp), "--data-out", s(&data), "--potential-out", s(&pot), "--variant", "qr"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn synth_two_state_matches_nystrom() {
    let dir = Scratch::new("synth2");
    let t = two_state();
    let inp = dir.put("t.json", &Document::Triplets(Variant::Uv, t.clone()));
    let (data, pot) = (dir.path("d.json"), dir.path("p.json"));
    ok(&[
        "synth",
        s(&inp),
        "--data-out",
        s(&data),
        "--potential-out",
        s(&pot),
        "--grid",
        "-1:14:301",
        "--tol",
        "output_decay=10",
    ]);
    let d = scattering(&data);
    let p = potential(&pot);
    let kernel = build_kernel_from_data(&d, &t, p.grid, &KernelConfig::default()).unwrap();
    let sol = nystrom_solution(&kernel, &NystromConfig::default()).unwrap();
    let rec = recover_potentials(&sol, 10.0).unwrap();
    let err = max_abs_diff(&rec.potentials.first, &p.first).max(max_abs_diff(&rec.potentials.second, &p.second));
    assert!(err < 1e-8, "{err}");
}

#[test]
fn reflectionless_roundtrip_through_direct() {
    let dir = Scratch::new("rl");
    let inp = dir.put("t.json", &Document::Triplets(Variant::EnergyDependent, two_state()));
    let (data, pot) = (dir.path("d.json"), dir.path("p.json"));
    ok(&[
        "synth",
        s(&inp),
        "--data-out",
        s(&data),
        "--potential-out",
        s(&pot),
        "--spectral",
        "-200:200:2000",
        "--grid",
        "-12.5:12.5:1001",
    ]);
    let rec = dir.path("rec.json");
    ok(&["invert", s(&data), "-o", s(&rec), "--triplets", s(&inp), "--grid", "-12.5:12.5:1001"]);
    assert!(max_abs_diff(&potential(&rec).first, &potential(&pot).first) < 1e-12);
    let back = dir.path("back.json");
    ok(&["direct", s(&rec), "-o", s(&back), "--spectral", "-5:5:41", "--tol", "decay=1e-9"]);
    let b = scattering(&back);
    assert!(max_abs(&b.r).max(max_abs(&b.r_bar)) < 1e-3);
}

#[test]
fn methods_agree_on_gaussian_data() {
    let dir = Scratch::new("methods");
    let inp = dir.put("g.json", &Document::Potential(gaussian(SpatialGrid::new(-6.0, 6.0, 481).unwrap())));
    let data = dir.path("d.json");
    ok(&["direct", s(&inp), "-o", s(&data), "--spectral", "-40:40:1600"]);
    let (a, b) = (dir.path("a.json"), dir.path("b.json"));
    ok(&["invert", s(&data), "-o", s(&a), "--grid", "-6:6:121"]);
    let rep = ok(&["invert", s(&data), "-o", s(&b), "--grid", "-6:6:121", "--method", "alternate"]);
    assert_eq!(rep["method"], "alternate");
    let (pa, pb) = (potential(&a), potential(&b));
    let err = max_abs_diff(&pa.first, &pb.first).max(max_abs_diff(&pa.second, &pb.second));
    assert!(err < 2e-2, "{err}");
}

#[test]
fn roundtrip_zero_and_decay_violation() {
    let dir = Scratch::new("rt");
    let g = SpatialGrid::new(-5.0, 5.0, 101).unwrap();
    let inp = dir.put("zero.json", &Document::Potential(PotentialPair::zeros(g, Variant::EnergyDependent)));
    let rep = ok(&["roundtrip", s(&inp), "--spectral", "-20:20:400"]);
    assert_eq!(num(&rep, "error.q_abs"), 0.0);
    assert_eq!(num(&rep, "error.r_abs"), 0.0);

    // written with a loose tolerance, read back with the default one
    let wide = PotentialPair::with_decay_tol(
        g,
        g.points().iter().map(|x| C64::new((-x * x / 4.0).exp(), 0.0)).collect(),
        vec![C64::new(0.0, 0.0); 101],
        Variant::EnergyDependent,
        1.0,
    )
    .unwrap();
    let mut text = io::to_string(&Document::Potential(wide));
    text = text.replace("\"decay_tol\": 1.0", "\"decay_tol\": 1e-10");
    let bad = dir.path("wide.json");
    fs::write(&bad, text).unwrap();
    let o = edscat(&["roundtrip", s(&bad)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("decay"));
}

#[test]
fn roundtrip_gaussian_reports_errors() {
    let dir = Scratch::new("rtg");
    let inp = dir.put("g.json", &Document::Potential(gaussian(SpatialGrid::new(-6.0, 6.0, 481).unwrap())));
    let rep = ok(&["roundtrip", s(&inp), "--grid", "-6:6:121"]);
    assert!(num(&rep, "error.q_rel") < 1e-2);
    assert!(num(&rep, "error.r_rel") < 1e-2);
    assert!(num(&rep, "error.phase") < 1e-3);
    assert!(num(&rep, "wall_time_s") > 0.0);
}
