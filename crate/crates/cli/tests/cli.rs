use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use funnel_core::config::ParamFile;

fn funnel(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_funnel")).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, cfg: &ParamFile) -> PathBuf {
    let path = dir.join("params.toml");
    fs::write(&path, cfg.to_toml_string()).unwrap();
    path
}

fn quick() -> ParamFile {
    ParamFile { record_s: 40.0, noise_seeds: 4, ..ParamFile::default() }
}

fn data_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn steady_three_roots_inside_window() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("o");
    let o = funnel(&["--out", out.to_str().unwrap(), "steady", "--detuning-hz", "-5000"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = data_rows(&fs::read_to_string(out.join("steady.csv")).unwrap());
    assert_eq!(rows.len(), 3);
    let stab: Vec<&str> = rows.iter().map(|r| r[4].as_str()).collect();
    assert_eq!(stab, ["stable", "unstable", "stable"]);
    assert!(out.join("manifest.json").exists());
}

#[test]
fn steady_straight_trap_is_lorentzian() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = ParamFile { funnel_length_m: 1e12, f0_zn: 2.0, ..ParamFile::default() };
    let path = write_config(tmp.path(), &cfg);
    let out = tmp.path().join("o");
    let o = funnel(&[
        "--config",
        path.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "steady",
        "--detuning-hz",
        "-300,0,300",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = data_rows(&fs::read_to_string(out.join("steady.csv")).unwrap());
    assert_eq!(rows.len(), 3);
    let p = cfg.trap();
    let f0 = p.reduced_drive(cfg.drive().f0_force);
    for r in rows {
        let delta = funnel_core::units::hz_to_rad(r[0].parse().unwrap());
        let u: f64 = r[2].parse().unwrap();
        let lorentz = f0 * f0 / (0.25 * p.damping * p.damping + delta * delta);
        assert!((u - lorentz).abs() < 1e-6 * lorentz, "{u} vs {lorentz}");
    }
}

#[test]
fn missing_key_exits_with_configuration_code() {
    let tmp = tempfile::tempdir().unwrap();
    let text: String = ParamFile::default()
        .to_toml_string()
        .lines()
        .filter(|l| !l.starts_with("mass_u"))
        .map(|l| format!("{l}\n"))
        .collect();
    let path = tmp.path().join("bad.toml");
    fs::write(&path, text).unwrap();
    let o = funnel(&["--config", path.to_str().unwrap(), "--out", tmp.path().to_str().unwrap(), "steady"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("mass_u"), "{}", stderr(&o));
}

#[test]
fn out_of_domain_value_names_the_key() {
    let tmp = tempfile::tempdir().unwrap();
    let path = write_config(tmp.path(), &ParamFile { f0_zn: 45.0, ..ParamFile::default() });
    let o = funnel(&["--config", path.to_str().unwrap(), "--out", tmp.path().to_str().unwrap(), "steady"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("f0_zn"));
}

#[test]
fn unknown_format_is_a_usage_error() {
    let o = funnel(&["--format", "xlsx", "steady"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn full_model_duration_cap() {
    let tmp = tempfile::tempdir().unwrap();
    let o = funnel(&["--out", tmp.path().to_str().unwrap(), "integrate", "--model", "full", "--duration-s", "0.1"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn integrate_envelope_writes_trajectory() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("o");
    let o = funnel(&["--out", out.to_str().unwrap(), "integrate", "--duration-s", "0.002"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(out.join("trajectory_envelope.csv")).unwrap();
    assert!(text.lines().find(|l| !l.starts_with('#')).unwrap() == "t_s,alpha_abs_um,z_um");
    assert_eq!(data_rows(&text).len(), 201);
}

#[test]
fn sweep_reports_negative_jumps() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("o");
    let o = funnel(&["--out", out.to_str().unwrap(), "sweep", "--drives-zn", "0.5,10"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let s = json(&out.join("summary.json"));
    let drives = s["drives"].as_array().unwrap();
    assert!(drives[0]["ascending_jumps_hz"].as_array().unwrap().is_empty());
    assert_eq!(drives[0]["hysteresis_width_hz"].as_f64().unwrap(), 0.0);
    let up = drives[1]["ascending_jumps_hz"][0].as_f64().unwrap();
    let down = drives[1]["descending_jumps_hz"][0].as_f64().unwrap();
    assert!(down < up && up < 0.0);
    assert!(out.join("sweep_01_descending.csv").exists());
}

#[test]
fn bistable_map_threshold() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("o");
    let o = funnel(&["--out", out.to_str().unwrap(), "bistable-map", "--drives-zn", "1,2,3,30"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = data_rows(&fs::read_to_string(out.join("bistable_map.csv")).unwrap());
    let flags: Vec<&str> = rows.iter().map(|r| r[1].as_str()).collect();
    assert_eq!(flags, ["0", "0", "1", "1"]);
}

fn bundle_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.file_name().unwrap() != "manifest.json")
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    v.sort();
    v
}

#[test]
fn vibres_bundle_is_reproducible_and_replayable() {
    let tmp = tempfile::tempdir().unwrap();
    let path = write_config(tmp.path(), &quick());
    let run = |out: &Path, seq: bool| {
        let mut args = vec!["--config", path.to_str().unwrap(), "--out", out.to_str().unwrap(), "--seed", "7"];
        if seq {
            args.push("--sequential");
        }
        args.push("vibres");
        let o = funnel(&args);
        assert!(o.status.success(), "{}", stderr(&o));
    };
    let (a, b, c) = (tmp.path().join("a"), tmp.path().join("b"), tmp.path().join("c"));
    run(&a, false);
    run(&b, true);
    assert_eq!(bundle_files(&a), bundle_files(&b));

    let manifest = json(&a.join("manifest.json"));
    assert_eq!(manifest["seed"].as_u64(), Some(7));
    let listed: Vec<&str> = manifest["outputs"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
    for name in ["config.toml", "trace_e.csv", "spectrum_a.csv", "tune_curve.csv", "summary.json"] {
        assert!(listed.contains(&name), "{name} missing from manifest");
    }
    let o = funnel(&["--out", c.to_str().unwrap(), "replay", a.join("manifest.json").to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(bundle_files(&a), bundle_files(&c));

    let s = json(&a.join("summary.json"));
    assert!(s["enhancement_e_vs_a"]["median"].as_f64().unwrap() >= 10.0);
}

#[test]
fn different_seeds_change_noise_only() {
    let tmp = tempfile::tempdir().unwrap();
    let path = write_config(tmp.path(), &quick());
    let mut traces = Vec::new();
    for seed in ["1", "2"] {
        let out = tmp.path().join(seed);
        let o = funnel(&[
            "--config",
            path.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "--seed",
            seed,
            "vibres",
            "--stages",
            "a",
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        traces.push(fs::read_to_string(out.join("trace_a.csv")).unwrap());
    }
    assert_ne!(traces[0], traces[1]);
    assert_eq!(data_rows(&traces[0]).len(), data_rows(&traces[1]).len());
}
