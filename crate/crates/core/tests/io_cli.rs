use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use num_rational::Rational64;
use proptest::prelude::*;

use amoebot::dynamics::Record;
use amoebot::io::config::RunConfig;
use amoebot::io::files::{parse_trajectory_csv, trajectory_csv};
use amoebot::lattice::AxialCoord;
use amoebot::system::ParticleSystem;

fn amoebot(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_amoebot")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn small_run(dir: &Path, extra: &[&str]) -> Output {
    let mut args = vec![
        "run",
        "--initial",
        "hexagon:2",
        "--iterations",
        "20000",
        "--record-interval",
        "1000",
        "--trials",
        "2",
        "--seed",
        "9",
        "--output-dir",
        dir.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    amoebot(&args)
}

#[test]
fn oracle_prints_three_particle_drifts() {
    let o = amoebot(&["oracle", "--n", "3", "--lambda", "4"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("states=7"));
    assert!(out.contains("drift1=1/48"));
    assert!(out.contains("drift1=1/24"));
    assert!(out.contains("specialized_rule_matches=true"));
}

#[test]
fn oracle_rejects_bad_arguments() {
    let o = amoebot(&["oracle", "--n", "9"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("`n`"));
    let o = amoebot(&["oracle", "--lambda", "abc"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("`lambda`"));
}

#[test]
fn zero_iterations_writes_single_row() {
    let dir = tempfile::tempdir().unwrap();
    let o = amoebot(&["run", "--iterations", "0", "--output-dir", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("trial_000.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[1].starts_with("0,"));
    assert!(dir.path().join("trial_000_t0.snap").exists());
}

#[test]
fn reruns_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert!(small_run(a.path(), &[]).status.success());
    assert!(small_run(b.path(), &[]).status.success());
    for name in ["trial_000.csv", "trial_001.csv", "summary.txt", "trial_001_t20000.snap"] {
        let x = fs::read(a.path().join(name)).unwrap();
        let y = fs::read(b.path().join(name)).unwrap();
        assert_eq!(x, y, "{name}");
    }
    let c = tempfile::tempdir().unwrap();
    assert!(small_run(c.path(), &["--seed", "10"]).status.success());
    assert_ne!(
        fs::read(a.path().join("trial_000.csv")).unwrap(),
        fs::read(c.path().join("trial_000.csv")).unwrap()
    );
}

#[test]
fn config_errors_name_the_key() {
    let dir = tempfile::tempdir().unwrap();
    for (args, key) in [
        (vec!["--lambda", "-1"], "lambda"),
        (vec!["--dim-prob", "3/2"], "dim_prob"),
        (vec!["--kernel", "hexagonal"], "kernel"),
        (vec!["--set", "colour=blue"], "colour"),
        (vec!["--record-interval", "0"], "record_interval"),
    ] {
        let o = small_run(dir.path(), &args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(stderr(&o).contains(key), "{args:?}: {}", stderr(&o));
    }
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "lambda = 4\ntrials = many\n").unwrap();
    let o = amoebot(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("trials"));
}

#[test]
fn config_file_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = dir.path().join("run.cfg");
    fs::write(
        &cfg,
        format!(
            "# compression of a short line\ninitial = line:6\nmode = compression\niterations = 5000\nrecord_interval = 500\noutput_dir = {}\n",
            out.display()
        ),
    )
    .unwrap();
    let o = amoebot(&["run", "--config", cfg.to_str().unwrap(), "--set", "seed=3"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let written = RunConfig::from_file(&out.join("config.txt")).unwrap();
    assert_eq!(written.seed, 3);
    assert_eq!(written.iterations, 5000);
    let rows = fs::read_to_string(out.join("trial_000.csv")).unwrap().lines().count();
    assert_eq!(rows, 1 + 11);
}

#[test]
fn verify_single_criterion() {
    let o = amoebot(&["verify", "-c", "1"]);
    assert!(o.status.success(), "{}", stdout(&o));
    let out = stdout(&o);
    assert_eq!(out.lines().filter(|l| l.starts_with("[PASS]")).count(), 1);
    assert_eq!(amoebot(&["verify", "-c", "42"]).status.code(), Some(2));
}

#[test]
fn msd_and_render_read_run_output() {
    let dir = tempfile::tempdir().unwrap();
    assert!(small_run(dir.path(), &[]).status.success());
    let msd = dir.path().join("msd.csv");
    let o = amoebot(&[
        "msd",
        dir.path().join("trial_000.csv").to_str().unwrap(),
        dir.path().join("trial_001.csv").to_str().unwrap(),
        "-o",
        msd.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("gamma="));
    assert!(fs::read_to_string(&msd).unwrap().starts_with("lag,msd\n0,0\n"));

    let snap = dir.path().join("trial_000_t0.snap");
    let o = amoebot(&["render", snap.to_str().unwrap(), "--format", "ascii"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).matches('@').count() + stdout(&o).matches('o').count(), 19);
    let svg = dir.path().join("pic.svg");
    let o = amoebot(&["render", snap.to_str().unwrap(), "-o", svg.to_str().unwrap()]);
    assert!(o.status.success());
    let text = fs::read_to_string(svg).unwrap();
    assert!(text.starts_with("<svg"));
    assert_eq!(text.matches("<circle").count(), 19);
}

#[test]
fn render_reports_bad_snapshot() {
    let dir = tempfile::tempdir().unwrap();
    let snap = dir.path().join("bad.snap");
    fs::write(&snap, "n=2\n0 0\n").unwrap();
    let o = amoebot(&["render", snap.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("bad.snap"));
}

fn blob() -> impl Strategy<Value = ParticleSystem> {
    prop::collection::vec(0usize..6, 0..40).prop_map(|steps| {
        // a random walk that leaves a particle on each new cell
        let mut at = AxialCoord::new(0, 0);
        let mut cells = vec![at];
        for d in steps {
            at = at.step(d);
            if !cells.contains(&at) {
                cells.push(at);
            }
        }
        ParticleSystem::new(cells).unwrap()
    })
}

proptest! {
    #[test]
    fn snapshot_round_trip(s in blob()) {
        let back = ParticleSystem::from_snapshot(&s.to_snapshot()).unwrap();
        prop_assert_eq!(back.sorted_coords(), s.sorted_coords());
        prop_assert_eq!(back.edge_count(), s.edge_count());
    }

    #[test]
    fn trajectory_csv_round_trip(
        rows in prop::collection::vec((1u64..1000, -1e6f64..1e6, -5000i64..5000, 1i64..200, 0usize..500, 0usize..50), 1..30)
    ) {
        let mut t = 0;
        let records: Vec<Record> = rows
            .into_iter()
            .map(|(dt, x, yn, yd, e, l)| {
                t += dt;
                Record { t, centroid_x: x, centroid_y: Rational64::new(yn, yd), edges: e, lit_count: l }
            })
            .collect();
        let back = parse_trajectory_csv(&trajectory_csv(&records)).unwrap();
        prop_assert_eq!(back.len(), records.len());
        for (a, b) in back.iter().zip(&records) {
            prop_assert_eq!(a.t, b.t);
            prop_assert_eq!(a.centroid_y, b.centroid_y);
            prop_assert_eq!((a.edges, a.lit_count), (b.edges, b.lit_count));
            prop_assert!((a.centroid_x - b.centroid_x).abs() <= 1e-11 * b.centroid_x.abs().max(1.0));
        }
    }
}
