use std::fs;
use std::path::Path;
use std::process::{Command, Output};
use std::time::Instant;

fn halbach(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_halbach"))
        .arg("--out")
        .arg(out)
        .args(args)
        .output()
        .expect("binary runs")
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(str::to_string).collect();
    let rows = lines.map(|l| l.split(',').map(str::to_string).collect()).collect();
    (header, rows)
}

fn column(header: &[String], rows: &[Vec<String>], name: &str) -> Vec<f64> {
    let i = header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"));
    rows.iter().map(|r| r[i].parse().unwrap()).collect()
}

fn reference_config(dir: &Path, nm: usize, back_iron: bool) -> std::path::PathBuf {
    let out = dir.join("seed");
    assert!(halbach(&out, &["sizing"]).status.success());
    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    let text = manifest["config"]
        .as_str()
        .unwrap()
        .replace("n_magnets_per_pole = 2", &format!("n_magnets_per_pole = {nm}"))
        .replace("back_iron = false", &format!("back_iron = {back_iron}"));
    let path = dir.join(format!("nm{nm}_{back_iron}.cfg"));
    fs::write(&path, text).unwrap();
    path
}

#[test]
fn laplace_and_vector_maps_agree() {
    let tmp = tempfile::tempdir().unwrap();
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    assert!(halbach(&a, &["fields", "--grid", "32x16"]).status.success());
    assert!(halbach(&b, &["fields", "--grid", "32x16", "--model", "poisson-vector"]).status.success());
    let (ha, ra) = read_csv(&a.join("fields.csv"));
    let (hb, rb) = read_csv(&b.join("fields.csv"));
    assert_eq!(ra.len(), 32 * 16);
    for name in ["Bx", "By"] {
        let (p, q) = (column(&ha, &ra, name), column(&hb, &rb, name));
        let scale = p.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for (u, v) in p.iter().zip(&q) {
            assert!((u - v).abs() <= 1e-10 * scale, "{name}: {u} vs {v}");
        }
    }
    assert!(rb.iter().all(|r| r[9] == "poisson-vector"));
    assert!(a.join("harmonics.csv").exists());
}

#[test]
fn fd_field_map_writes_residual_log() {
    let tmp = tempfile::tempdir().unwrap();
    let out = halbach(tmp.path(), &["fields", "--fd", "--grid", "64x64"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (h, r) = read_csv(&tmp.path().join("residual_log.csv"));
    assert_eq!(h, ["iteration", "residual"]);
    assert!(!r.is_empty());
    let (_, rows) = read_csv(&tmp.path().join("fields.csv"));
    assert!(rows.iter().all(|r| r[9] == "fd"));
}

#[test]
fn quick_commands_write_their_tables() {
    let tmp = tempfile::tempdir().unwrap();
    let start = Instant::now();
    for cmd in ["force", "emf", "normal"] {
        let out = halbach(tmp.path(), &[cmd]);
        assert!(out.status.success(), "{cmd}: {}", String::from_utf8_lossy(&out.stderr));
    }
    assert!(start.elapsed().as_secs_f64() < 10.0);

    let (h, r) = read_csv(&tmp.path().join("force.csv"));
    assert_eq!(h, ["t", "F_phase_1", "F_phase_2", "F_phase_3", "F_total", "tau"]);
    assert_eq!(r.len(), 720);
    let (h, r) = read_csv(&tmp.path().join("force_angle.csv"));
    assert_eq!(h, ["x0", "F_mean"]);
    assert_eq!(r.len(), 360);
    let (h, r) = read_csv(&tmp.path().join("emf.csv"));
    assert_eq!(h, ["t", "E_1", "E_2", "E_3"]);
    assert_eq!(r.len(), 720);

    let (h, r) = read_csv(&tmp.path().join("normal.csv"));
    assert_eq!(r.len(), 11);
    assert!(column(&h, &r, "Fy_net").iter().all(|&v| v == 0.0));
    assert!(column(&h, &r, "Fy_top").iter().all(|&v| v > 0.0));
    assert!(tmp.path().join("normal_stress.csv").exists());

    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "normal");
    assert!(manifest["duration_s"].as_f64().unwrap() >= 0.0);
    assert_eq!(manifest["n_max"], 199);
}

#[test]
fn force_summary_matches_table_mean() {
    let tmp = tempfile::tempdir().unwrap();
    assert!(halbach(tmp.path(), &["force", "--samples", "360"]).status.success());
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("manifest.json")).unwrap()).unwrap();
    let (h, r) = read_csv(&tmp.path().join("force.csv"));
    let total = column(&h, &r, "F_total");
    let mean = total.iter().sum::<f64>() / total.len() as f64;
    let reported = manifest["summary"]["mean_force_N"].as_f64().unwrap();
    assert!((mean - reported).abs() < 1e-9 * reported);
    let (lo, hi) = total.iter().fold((f64::MAX, f64::MIN), |(a, b), &v| (a.min(v), b.max(v)));
    let ripple = manifest["summary"]["ripple_pct"].as_f64().unwrap();
    assert!((100.0 * (hi - lo) / mean - ripple).abs() < 1e-9);
}

#[test]
fn misaligned_config_gives_net_pull() {
    let tmp = tempfile::tempdir().unwrap();
    let base = reference_config(tmp.path(), 2, false);
    let text = fs::read_to_string(&base).unwrap().replace("gap_offset_m = 0", "gap_offset_m = 0.0002");
    let cfg = tmp.path().join("offset.cfg");
    fs::write(&cfg, text).unwrap();
    let out = tmp.path().join("n");
    assert!(halbach(&out, &["--config", cfg.to_str().unwrap(), "normal"]).status.success());
    let (h, r) = read_csv(&out.join("normal.csv"));
    let net = column(&h, &r, "Fy_net");
    assert_eq!(net[0], 0.0);
    assert!(net.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn sweep_ranks_by_loss_exponent() {
    let tmp = tempfile::tempdir().unwrap();
    let mut best_hc = Vec::new();
    for beta in ["0", "0.5"] {
        let out = tmp.path().join(beta);
        let run = halbach(&out, &["sweep", "--hm", "0.01", "--hc", "0.002:0.02:10", "--beta", beta]);
        assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
        let (h, r) = read_csv(&out.join("sweep.csv"));
        assert_eq!(r.len(), 10);
        assert!(r.iter().all(|row| row[8].is_empty() && row[9].is_empty()));
        let score = column(&h, &r, "score");
        let hc = column(&h, &r, "h_c");
        let i = (0..score.len()).max_by(|&a, &b| score[a].total_cmp(&score[b])).unwrap();
        best_hc.push(hc[i]);
    }
    assert!(best_hc[1] < best_hc[0], "{best_hc:?}");
}

#[test]
fn extended_sweep_fills_quality_columns() {
    let tmp = tempfile::tempdir().unwrap();
    let run = halbach(
        tmp.path(),
        &["sweep", "--hc", "0.002:0.006:3", "--thd-exp", "0.5", "--ripple-exp", "0.5", "--cost-drive", "2"],
    );
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let (h, r) = read_csv(&tmp.path().join("sweep.csv"));
    let ripple = column(&h, &r, "ripple_pct");
    let thd = column(&h, &r, "emf_thd");
    assert!(ripple.iter().all(|v| *v > 0.0 && *v < 100.0));
    assert!(thd.iter().all(|v| *v > 0.0 && *v < 1.0));
}

#[test]
fn optimizer_trace_covers_every_evaluation() {
    let tmp = tempfile::tempdir().unwrap();
    let run = halbach(tmp.path(), &["optimize", "--coarse", "5", "--passes", "2"]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("manifest.json")).unwrap()).unwrap();
    let (h, r) = read_csv(&tmp.path().join("trace.csv"));
    assert_eq!(r.len() as u64, manifest["summary"]["evaluations"].as_u64().unwrap());
    let passes = column(&h, &r, "pass");
    assert_eq!(passes.iter().filter(|&&p| p == 0.0).count(), 25);
    let best = manifest["summary"]["best"]["score"].as_f64().unwrap();
    assert!(column(&h, &r, "score").iter().all(|&s| s <= best));
    for (name, lo, hi) in [("h_m", 0.002, 0.02), ("h_c", 0.001, 0.02)] {
        assert!(column(&h, &r, name).iter().all(|&v| v >= lo - 1e-15 && v <= hi + 1e-15));
    }
}

#[test]
fn sizing_prints_three_estimates() {
    let tmp = tempfile::tempdir().unwrap();
    let run = halbach(tmp.path(), &["sizing", "--b-av", "0.5", "--j-av", "1e7"]);
    assert!(run.status.success());
    let text = String::from_utf8(run.stdout).unwrap();
    let values: Vec<f64> = text.lines().map(|l| l.split_whitespace().nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(values.len(), 3);
    assert!((values[0] - 2.0e4).abs() < 1e-9);
    assert!((values[1] - 2.0e4 * 0.04 * 0.04).abs() < 1e-9);
    assert!((values[2] - 1e14 / 5.8e7).abs() < 1e-3);
}

#[test]
fn verify_passes_on_reference_designs() {
    let tmp = tempfile::tempdir().unwrap();
    for nm in 2..=5 {
        for bi in [false, true] {
            let cfg = reference_config(tmp.path(), nm, bi);
            let out = tmp.path().join(format!("v{nm}{bi}"));
            let run = halbach(&out, &["--config", cfg.to_str().unwrap(), "verify", "--skip-fd"]);
            let stdout = String::from_utf8_lossy(&run.stdout);
            assert!(run.status.success(), "nm={nm} bi={bi}\n{stdout}");
            assert!(stdout.lines().all(|l| l.starts_with("PASS")));
        }
    }
}

#[test]
fn verify_with_fd_oracle() {
    let tmp = tempfile::tempdir().unwrap();
    let run = halbach(tmp.path(), &["verify", "--grid", "512x256"]);
    let stdout = String::from_utf8_lossy(&run.stdout);
    assert!(run.status.success(), "{stdout}");
    assert!(stdout.lines().any(|l| l.starts_with("PASS fd-oracle")));
}

#[test]
fn flipped_boundary_sign_fails_verification() {
    let tmp = tempfile::tempdir().unwrap();
    for model in ["laplace", "poisson-scalar", "poisson-vector"] {
        let run = halbach(tmp.path(), &["verify", "--skip-fd", "--model", model, "--flip", "2,2"]);
        assert_eq!(run.status.code(), Some(1), "{model}");
        let stdout = String::from_utf8_lossy(&run.stdout);
        assert!(stdout.lines().any(|l| l.starts_with("FAIL boundary-residual")), "{model}\n{stdout}");
    }
}

#[test]
fn usage_errors_exit_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    let cases: [&[&str]; 5] = [
        &["fields", "--grid", "12"],
        &["--config", "/does/not/exist.cfg", "force"],
        &["fields", "--y0", "-0.001"],
        &["sweep", "--thd-exp", "1"],
        &["optimize", "--hm", "0.02:0.01"],
    ];
    for args in cases {
        assert_eq!(halbach(tmp.path(), args).status.code(), Some(2), "{args:?}");
    }
    let bad = tmp.path().join("bad.cfg");
    fs::write(&bad, "lambda_m = 0.04\n").unwrap();
    assert_eq!(halbach(tmp.path(), &["--config", bad.to_str().unwrap(), "force"]).status.code(), Some(2));
}

#[test]
fn back_iron_domain_is_bounded() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = reference_config(tmp.path(), 3, true);
    let c = cfg.to_str().unwrap();
    let out = tmp.path().join("f");
    assert_eq!(halbach(&out, &["--config", c, "fields", "--y1", "0.05"]).status.code(), Some(2));
    assert!(halbach(&out, &["--config", c, "fields", "--grid", "8x8", "--y1", "0.0115"]).status.success());
}

#[test]
fn nmax_flag_overrides_config() {
    let tmp = tempfile::tempdir().unwrap();
    assert!(halbach(tmp.path(), &["--nmax", "9", "fields", "--grid", "4x4"]).status.success());
    let (_, rows) = read_csv(&tmp.path().join("harmonics.csv"));
    assert_eq!(rows.len(), 5);
    assert_eq!(halbach(tmp.path(), &["--nmax", "8", "force"]).status.code(), Some(2));
}
