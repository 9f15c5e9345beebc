use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn gibbsdim(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gibbsdim"))
        .current_dir(dir)
        .env_remove("GIBBSDIM_SEED")
        .env_remove("GIBBSDIM_THREADS")
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn ineq_check_prints_rhs_and_k0() {
    let tmp = tempfile::tempdir().unwrap();
    let o = gibbsdim(
        tmp.path(),
        &[
            "ineq-check",
            "--alpha",
            "1.2",
            "--delta",
            "0.05",
            "--eta",
            "0.45",
            "--k-hi",
            "300",
            "--n-hi",
            "100",
        ],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let out = stdout(&o);
    assert!(out.contains("RHS 1.36304"), "{out}");
    assert!(out.contains("k0 = "), "{out}");
    let csv = fs::read_to_string(tmp.path().join("gibbsdim-out/ineq-check/ineq.csv")).unwrap();
    assert_eq!(csv.lines().nth(1), Some("k,max_lhs"));
    assert_eq!(csv.lines().count(), 2 + 299);
}

#[test]
fn ineq_check_without_k0_fails_with_rhs() {
    let tmp = tempfile::tempdir().unwrap();
    let o = gibbsdim(tmp.path(), &["ineq-check", "--k-hi", "100", "--n-hi", "100"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("RHS 0.62895"));
    assert!(stdout(&o).contains("FAIL k0 found"));
    let manifest = fs::read_to_string(tmp.path().join("gibbsdim-out/ineq-check/manifest.txt")).unwrap();
    assert!(manifest.contains("FAIL k0 found"));
}

#[test]
fn config_errors_exit_2_with_line_number() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("run.cfg"), "# batch\norbits = 3\nlength = many\n").unwrap();
    let o = gibbsdim(tmp.path(), &["dimension", "--config", "run.cfg"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("config line 3"), "{}", stderr(&o));
    assert!(!tmp.path().join("gibbsdim-out").exists());

    fs::write(tmp.path().join("run.cfg"), "orbits = 3\nshape = round\n").unwrap();
    let o = gibbsdim(tmp.path(), &["dimension", "--config", "run.cfg"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("config line 2"), "{}", stderr(&o));

    let o = gibbsdim(tmp.path(), &["dimension", "--measure", "cantor"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--measure"), "{}", stderr(&o));
}

#[test]
fn flags_override_file_values() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(
        tmp.path().join("run.cfg"),
        "orbits = 2\nlength = 500\nseed = 1\noutput = a\n",
    )
    .unwrap();
    let o = gibbsdim(
        tmp.path(),
        &["orbit-stats", "--config", "run.cfg", "--seed", "9", "--checks", "off"],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let csv = fs::read_to_string(tmp.path().join("a/orbit-stats/orbit_stats.csv")).unwrap();
    assert!(csv.lines().next().unwrap().contains("seed=9;"));
}

#[test]
fn output_is_identical_across_thread_counts() {
    let (one, four) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for (dir, threads) in [(&one, "1"), (&four, "4")] {
        let o = gibbsdim(
            dir.path(),
            &[
                "orbit-stats",
                "--orbits",
                "12",
                "--length",
                "2000",
                "--seed",
                "5",
                "--threads",
                threads,
                "--checks",
                "off",
            ],
        );
        assert_eq!(o.status.code(), Some(0));
    }
    for file in ["orbit_stats.csv", "blowup.csv"] {
        let read =
            |d: &tempfile::TempDir| fs::read_to_string(d.path().join("gibbsdim-out/orbit-stats").join(file)).unwrap();
        assert!(read(&one) == read(&four), "{file} differs");
    }
    let csv = fs::read_to_string(one.path().join("gibbsdim-out/orbit-stats/orbit_stats.csv")).unwrap();
    assert_eq!(
        csv.lines().nth(1),
        Some("orbit_id,n,cum_log_p,cum_log_r,max_X,argmax,S_trimmed")
    );
    assert_eq!(csv.lines().count(), 2 + 12 * 3);
}

#[test]
fn every_file_starts_with_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let o = gibbsdim(
        tmp.path(),
        &[
            "dimension",
            "--orbits",
            "4",
            "--length",
            "1e4",
            "--k0",
            "100",
            "--window-start",
            "1000",
        ],
    );
    assert!(o.status.code().is_some_and(|c| c <= 1), "{}", stdout(&o));
    let dir = tmp.path().join("gibbsdim-out/dimension");
    let mut names: Vec<String> = fs::read_dir(&dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(
        names,
        ["case_split_max.csv", "estimates.csv", "manifest.txt", "trend.csv"]
    );
    for name in &names {
        let text = fs::read_to_string(dir.join(name)).unwrap();
        assert!(
            text.starts_with("# manifest: partition=gauss; measure=logsquare;"),
            "{name}"
        );
    }
    let estimates = fs::read_to_string(dir.join("estimates.csv")).unwrap();
    assert_eq!(
        estimates.lines().nth(1),
        Some("orbit_id,n,kind,log_measure,log_length,ratio,flag")
    );
    assert!(estimates.contains(",case_split[k0=100;case="));
}

#[test]
fn oracle_matches_volume_lemma() {
    let tmp = tempfile::tempdir().unwrap();
    let o = gibbsdim(
        tmp.path(),
        &[
            "oracle",
            "--measure",
            "geometric:0.5",
            "--orbits",
            "20",
            "--length",
            "1e4",
        ],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("h/lambda = 0.9099"), "{}", stdout(&o));
}

#[test]
fn forced_excursion_passes_its_checks() {
    let tmp = tempfile::tempdir().unwrap();
    let o = gibbsdim(
        tmp.path(),
        &["forced-excursion", "--position", "1000", "--log-digits", "1e3,1e9,1e12"],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let csv = fs::read_to_string(tmp.path().join("gibbsdim-out/forced-excursion/excursion.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2 + 3);
}

#[test]
fn series_check_reports_convergence() {
    let tmp = tempfile::tempdir().unwrap();
    let o = gibbsdim(
        tmp.path(),
        &["series-check", "--length", "1e5", "--checkpoints", "1e3,1e4,1e5"],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("PASS criterion series converges"));
}

#[test]
fn report_runs_selected_criteria() {
    let tmp = tempfile::tempdir().unwrap();
    let o = gibbsdim(tmp.path(), &["report", "--criteria", "3,10"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let out = stdout(&o);
    assert!(
        out.contains("PASS criterion 3") && out.contains("PASS criterion 10"),
        "{out}"
    );
    let csv = fs::read_to_string(tmp.path().join("gibbsdim-out/report/report.csv")).unwrap();
    assert_eq!(
        csv.lines().skip(1).collect::<Vec<_>>(),
        ["criterion,result", "3,PASS", "10,PASS"]
    );
}

#[test]
fn env_seed_is_picked_up() {
    let tmp = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_gibbsdim"))
        .current_dir(tmp.path())
        .env("GIBBSDIM_SEED", "77")
        .args(["orbit-stats", "--orbits", "1", "--length", "100", "--checks", "off"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("seed=77;"));
}
