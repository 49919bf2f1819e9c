use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use adiabatic_cli::output::sha256_hex;
use adiabatic_cli::{export_user_spectra, load_user_spectra};
use adiabatic_core::spectra::segment_snapshot;
use tempfile::TempDir;

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("config.toml");
    std::fs::write(&path, text).unwrap();
    path
}

fn adiabatic(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_adiabatic"))
        .args(args)
        .output()
        .unwrap()
}

fn run(dir: &Path, command: &str, config: &str, extra: &[&str]) -> (Output, PathBuf) {
    let cfg = write_config(dir, config);
    let out = dir.join("out");
    let mut args = vec![
        command,
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    (adiabatic(&args), out)
}

/// Data rows of a CSV written by the tool, header comments skipped.
fn rows(path: &Path) -> Vec<Vec<String>> {
    let text = std::fs::read_to_string(path).unwrap();
    let body: String = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| format!("{l}\n"))
        .collect();
    let mut reader = csv::Reader::from_reader(body.as_bytes());
    reader
        .records()
        .map(|r| r.unwrap().iter().map(str::to_string).collect())
        .collect()
}

fn manifest(out: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap()
}

fn assert_success(output: &Output) {
    assert!(
        output.status.success(),
        "exit {:?}\nstdout: {}\nstderr: {}",
        output.status.code(),
        String::from_utf8_lossy(&output.stdout),
        String::from_utf8_lossy(&output.stderr)
    );
}

#[test]
fn segment_table_follows_odd_rule() {
    let dir = TempDir::new().unwrap();
    let (output, out) = run(
        dir.path(),
        "levelmap",
        "model = \"segment\"\n[segment]\na1 = 1.0\na2 = 3.0\nlevels = 100\n",
        &[],
    );
    assert_success(&output);
    let table = rows(&out.join("levelmap.csv"));
    assert_eq!(table.len(), 100);
    for row in &table {
        let k: u64 = row[0].parse().unwrap();
        let kbar: u64 = row[3].parse().unwrap();
        if k % 2 == 1 {
            assert_eq!(kbar, 2 * k + 1);
        } else {
            assert_eq!(kbar, k / 2 + k / 6);
        }
        assert_eq!(row[1], row[4], "group preserved at k={k}");
    }
    // Empty k0 list: only the map table.
    let files: Vec<String> = manifest(&out)["files"]
        .as_array()
        .unwrap()
        .iter()
        .map(|f| f["name"].as_str().unwrap().to_string())
        .collect();
    assert_eq!(files, vec!["levelmap.csv"]);
}

#[test]
fn spin_defaults_follow_shift_law() {
    let dir = TempDir::new().unwrap();
    let (output, out) = run(
        dir.path(),
        "levelmap",
        "model = \"spin\"\n[trajectory]\nk0 = [6]\n",
        &[],
    );
    assert_success(&output);
    let table = rows(&out.join("levelmap.csv"));
    assert_eq!(table.len(), 50);
    for row in &table {
        let k: u64 = row[0].parse().unwrap();
        let kbar: u64 = row[3].parse().unwrap();
        let expected = match k {
            2 => 1,
            k if k % 2 == 0 => k - 2,
            k => k + 2,
        };
        assert_eq!(kbar, expected);
    }
    let traj = rows(&out.join("trajectory_k6.csv"));
    let ks: Vec<u64> = traj.iter().take(7).map(|r| r[1].parse().unwrap()).collect();
    assert_eq!(ks, vec![6, 4, 2, 1, 3, 5, 7]);
    let ln: f64 = traj[1][2].parse().unwrap();
    assert!((ln - 4f64.ln()).abs() < 1e-15);
    assert_eq!(traj[1][2], traj[1][3]);
}

#[test]
fn outputs_are_deterministic_and_checksummed() {
    let dir = TempDir::new().unwrap();
    let config = "model = \"bernoulli\"\nseed = 11\n[bernoulli]\nlevels = 300\n[trajectory]\nk0 = [5, 40]\nstep_limit = 30\nescape_threshold = 1000000000\n";
    let (first, out) = run(dir.path(), "trajectory", config, &[]);
    assert_success(&first);
    let m = manifest(&out);
    let mut snapshot = Vec::new();
    for f in m["files"].as_array().unwrap() {
        let name = f["name"].as_str().unwrap();
        let bytes = std::fs::read(out.join(name)).unwrap();
        assert_eq!(f["sha256"].as_str().unwrap(), sha256_hex(&bytes), "{name}");
        snapshot.push((name.to_string(), bytes));
    }
    assert!(snapshot
        .iter()
        .any(|(n, _)| n == "trajectory_backward_k40.csv"));
    assert!(snapshot.iter().any(|(n, _)| n == "returns_k5.csv"));

    let (second, out) = run(dir.path(), "trajectory", config, &[]);
    assert_success(&second);
    for (name, bytes) in &snapshot {
        assert_eq!(
            &std::fs::read(out.join(name)).unwrap(),
            bytes,
            "{name} changed between runs"
        );
    }
    assert_eq!(manifest(&out)["config_sha256"], m["config_sha256"]);

    // A different seed changes the configuration hash and the data.
    let (third, out) = run(dir.path(), "trajectory", config, &["--seed", "12"]);
    assert_success(&third);
    let m3 = manifest(&out);
    assert_ne!(m3["config_sha256"], m["config_sha256"]);
    assert_eq!(m3["seeds"][0], 12);
    let header = std::fs::read_to_string(out.join("trajectories.csv")).unwrap();
    assert!(header.contains(&format!(
        "# config_sha256: {}",
        m3["config_sha256"].as_str().unwrap()
    )));
}

#[test]
fn montecarlo_reports_reference_and_slopes() {
    let dir = TempDir::new().unwrap();
    let config = "model = \"bernoulli\"\n[bernoulli]\nbeta = 0.5\ngamma = 0.25\nk_start = 10000\ntrials = 400\nlln_seeds = 10\nlln_periods = 50\n";
    let (output, out) = run(dir.path(), "montecarlo", config, &["--quiet"]);
    assert_success(&output);
    assert!(output.stdout.is_empty());
    let est = &rows(&out.join("montecarlo.csv"))[0];
    let reference: f64 = est[6].parse().unwrap();
    assert!((reference - 0.14384103622589045).abs() < 1e-15);
    let slopes = rows(&out.join("lln_slopes.csv"));
    assert_eq!(slopes.len(), 10);
    assert_eq!(manifest(&out)["seeds"].as_array().unwrap().len(), 10);

    let control = "model = \"bernoulli\"\n[bernoulli]\nbeta = 0.4\ngamma = 0.4\nk_start = 10000\ntrials = 400\nlln_seeds = 2\nlln_periods = 5\n";
    let (output, out) = run(dir.path(), "montecarlo", control, &[]);
    assert_success(&output);
    let est = &rows(&out.join("montecarlo.csv"))[0];
    let (mean, se): (f64, f64) = (est[4].parse().unwrap(), est[5].parse().unwrap());
    assert_eq!(est[6], "0.0");
    assert!(mean.abs() < 3.0 * se + 2.0 / 100.0);
}

#[test]
fn tdse_summary_reports_prediction() {
    let dir = TempDir::new().unwrap();
    let (output, out) = run(
        dir.path(),
        "tdse",
        "model = \"tdse\"\n[tdse]\nk0 = 3\nepsilon = 0.05\n",
        &[],
    );
    assert_success(&output);
    let summary = &rows(&out.join("tdse_summary.csv"))[0];
    assert_eq!(summary[1], "7");
    assert!(String::from_utf8_lossy(&output.stdout).contains("predicted k=7"));
    let checkpoints: Vec<String> = rows(&out.join("tdse_checkpoints.csv"))
        .iter()
        .map(|r| r[0].clone())
        .collect();
    for label in ["start", "tau1-", "tau1+", "tau2-", "tau2+", "end"] {
        assert_eq!(checkpoints.iter().filter(|l| *l == label).count(), 12);
    }
    assert!(manifest(&out)["derived"]["dt"].as_f64().unwrap() > 0.0);

    let (output, out) = run(
        dir.path(),
        "tdse",
        "model = \"tdse\"\n[tdse]\nschedule = \"identity\"\nk0 = 2\nepsilon = 0.05\n",
        &[],
    );
    assert_success(&output);
    let summary = &rows(&out.join("tdse_summary.csv"))[0];
    assert_eq!((summary[1].as_str(), summary[2].as_str()), ("2", "2"));
    assert!(rows(&out.join("tdse_energy.csv")).len() > 100);
}

#[test]
fn user_spectra_round_trip() {
    let dir = TempDir::new().unwrap();
    let s1 = segment_snapshot(1.0, 40).unwrap();
    let s2 = segment_snapshot(3.0, 120).unwrap();
    let path = dir.path().join("pair.txt");
    export_user_spectra(&path, &s1, &s2).unwrap();
    let (r1, r2) = load_user_spectra(&path).unwrap();
    // Reloaded lists are complete, so they resolve every level of the prefix.
    for (loaded, original) in [(&r1, &s1), (&r2, &s2)] {
        assert_eq!(loaded.group1(), original.group1());
        assert_eq!(loaded.group2(), original.group2());
        let n = original.level_count();
        assert!(loaded.level_count() >= n);
        assert_eq!(
            &loaded.indicators().values()[..n],
            original.indicators().values()
        );
    }

    let (output, out) = run(
        dir.path(),
        "levelmap",
        "model = \"user-spectra\"\n[user_spectra]\npath = \"pair.txt\"\n",
        &[],
    );
    assert_success(&output);
    let table = rows(&out.join("levelmap.csv"));
    assert_eq!(table.len(), r1.level_count());
    assert_eq!(table[2][3], "7");
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let code = |o: &Output| o.status.code().unwrap();

    let (o, _) = run(
        dir.path(),
        "levelmap",
        "model = \"segment\"\nbogus = 1\n",
        &[],
    );
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("bogus"));

    assert_eq!(code(&adiabatic(&["levelmap"])), 2);

    let (o, _) = run(dir.path(), "montecarlo", "model = \"segment\"\n", &[]);
    assert_eq!(code(&o), 2);

    std::fs::write(
        dir.path().join("tie.txt"),
        "[tau1]\nG1 1.5\nG2 1.5\n[tau2]\nG1 1\nG2 2\n",
    )
    .unwrap();
    let (o, _) = run(
        dir.path(),
        "levelmap",
        "model = \"user-spectra\"\n[user_spectra]\npath = \"tie.txt\"\n",
        &[],
    );
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("1.5"));

    std::fs::write(
        dir.path().join("bad.txt"),
        "[tau1]\nG1 1\nG1 oops\n[tau2]\n",
    )
    .unwrap();
    let (o, _) = run(
        dir.path(),
        "levelmap",
        "model = \"user-spectra\"\n[user_spectra]\npath = \"bad.txt\"\n",
        &[],
    );
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains(":3:"));

    // The second snapshot has fewer group I levels, so level 2 has no image.
    std::fs::write(
        dir.path().join("short.txt"),
        "[tau1]\nG1 1\nG1 2\nG2 3\n[tau2]\nG1 1\nG2 3\n",
    )
    .unwrap();
    let (o, _) = run(
        dir.path(),
        "levelmap",
        "model = \"user-spectra\"\n[user_spectra]\npath = \"short.txt\"\n",
        &[],
    );
    assert_eq!(code(&o), 4);

    let fresh = TempDir::new().unwrap();
    let (o, out) = run(fresh.path(), "validate-config", "model = \"spin\"\n", &[]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stdout).contains("valid"));
    assert!(!out.exists());
}
