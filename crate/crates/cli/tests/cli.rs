//! End-to-end tests of the binary's contract: exit codes, report shape,
//! and determinism.

use std::process::{Command, Output};

fn juntalab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_juntalab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf8 stdout")
}

#[test]
fn verify_reports_all_passing_checks() {
    let out = juntalab(&[
        "verify",
        "--space",
        "cube:n=6,p=0.5",
        "--fn",
        "random:seed=7",
        "--check",
        "lemma-la,bakry,hyper",
    ]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let text = stdout_of(&out);
    assert!(text.starts_with("check,left,right,slack,pass\n"), "{text}");
    for check in ["lemma-la,", "bakry,", "hyper,"] {
        assert!(text.contains(check), "missing {check} in {text}");
    }
    assert!(text.contains("# summary: 3 passed, 0 failed"), "{text}");
    // every row ends in a pass verdict
    for row in text.lines().skip(1).filter(|l| !l.starts_with('#')) {
        assert!(row.ends_with(",true"), "row not passing: {row}");
    }
}

#[test]
fn extraction_prints_a_certificate() {
    let out = juntalab(&[
        "junta",
        "extract",
        "--space",
        "torus:n=3,m=3",
        "--fn",
        "planted-junta:k=2,noise=0.01",
        "--eps",
        "0.2",
    ]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let text = stdout_of(&out);
    for field in [
        "kept_set=",
        "eta=",
        "t=",
        "alpha=",
        "bound_la=",
        "bound_bakry=",
        "measured_error=",
        "epsilon=",
        "retries=",
    ] {
        assert!(text.contains(field), "missing {field} in {text}");
    }
}

#[test]
fn empty_check_list_is_a_usage_error() {
    let out = juntalab(&[
        "verify",
        "--space",
        "cube:n=4",
        "--fn",
        "majority",
        "--check",
        "",
    ]);
    assert_eq!(out.status.code(), Some(2), "{out:?}");
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("no checks requested"), "{err}");
}

#[test]
fn sweep_grids_have_the_advertised_cardinality() {
    let out = juntalab(&[
        "sweep",
        "--space",
        "cube:n=5",
        "--fn",
        "majority",
        "--check",
        "lemma-la",
        "--grid",
        "t=0.1,0.2,0.4",
        "--grid",
        "eta=0.05,0.1",
    ]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let text = stdout_of(&out);
    let rows: Vec<&str> = text
        .lines()
        .filter(|l| l.starts_with("lemma-la["))
        .collect();
    assert_eq!(rows.len(), 6, "{text}");
    // row-major order, first axis outermost
    assert!(rows[0].starts_with("lemma-la[t=0.1,eta=0.05]"));
    assert!(rows[1].starts_with("lemma-la[t=0.1,eta=0.1]"));
    assert!(rows[5].starts_with("lemma-la[t=0.4,eta=0.1]"));
}

#[test]
fn torus_gap_sweep_matches_the_closed_form() {
    let out = juntalab(&[
        "sweep",
        "--space",
        "torus:n=1,m=2",
        "--check",
        "spectral-gap",
        "--grid",
        "m=2..8",
    ]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let text = stdout_of(&out);
    let rows: Vec<&str> = text
        .lines()
        .filter(|l| l.starts_with("spectral-gap["))
        .collect();
    assert_eq!(rows.len(), 7, "{text}");
    for (i, row) in rows.iter().enumerate() {
        let m = (i + 2) as f64;
        let want = (1.0 - (2.0 * std::f64::consts::PI / m).cos()) / 2.0;
        let left: f64 = row.split(',').nth(1).unwrap().parse().unwrap();
        assert!((left - want).abs() <= 1e-9, "m={m}: {row}");
        assert!(row.ends_with(",true"));
    }
}

#[test]
fn empty_grid_is_a_usage_error() {
    let out = juntalab(&[
        "sweep",
        "--space",
        "cube:n=4",
        "--fn",
        "majority",
        "--check",
        "bakry",
        "--grid",
        "t=",
    ]);
    assert_eq!(out.status.code(), Some(2), "{out:?}");
    let no_grid = juntalab(&[
        "sweep",
        "--space",
        "cube:n=4",
        "--fn",
        "majority",
        "--check",
        "bakry",
    ]);
    assert_eq!(no_grid.status.code(), Some(2), "{no_grid:?}");
}

#[test]
fn capacity_overruns_exit_three() {
    let out = juntalab(&[
        "verify",
        "--space",
        "cube:n=25",
        "--fn",
        "majority",
        "--check",
        "spectral-gap",
    ]);
    assert_eq!(out.status.code(), Some(3), "{out:?}");
    let tightened = juntalab(&[
        "verify",
        "--space",
        "cube:n=8",
        "--fn",
        "majority",
        "--check",
        "spectral-gap",
        "--budget-states",
        "100",
    ]);
    assert_eq!(tightened.status.code(), Some(3), "{tightened:?}");
}

#[test]
fn failing_checks_exit_one() {
    // the boundary identity needs a fine grid; at 65 nodes the quadrature
    // bias exceeds the tolerance, so the row must fail and the exit be 1
    let out = juntalab(&[
        "continuous",
        "verify",
        "--potential",
        "gaussian",
        "--nodes",
        "65",
        "--n",
        "2",
        "--set",
        "halfspace:axis=1,c=0",
        "--check",
        "influence-set",
    ]);
    assert_eq!(out.status.code(), Some(1), "{out:?}");
    let text = stdout_of(&out);
    assert!(text.contains("set-boundary-identity"), "{text}");
    assert!(text.contains(",false"), "{text}");
}

#[test]
fn reports_are_byte_deterministic() {
    let args = [
        "continuous",
        "verify",
        "--potential",
        "gaussian",
        "--nodes",
        "65",
        "--n",
        "2",
        "--fn",
        "random-poly:degree=3,terms=4,seed=5",
        "--check",
        "commutation,ledoux,chain",
        "--t",
        "0.3",
    ];
    let first = juntalab(&args);
    let second = juntalab(&args);
    assert_eq!(first.status.code(), Some(0), "{first:?}");
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn out_flag_writes_the_same_bytes() {
    let dir = std::env::temp_dir().join("juntalab-out-test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("report.txt");
    let out = juntalab(&[
        "verify",
        "--space",
        "slice:n=5,k=2",
        "--fn",
        "random",
        "--check",
        "spectral-gap",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let written = std::fs::read(&path).unwrap();
    assert_eq!(written, out.stdout);
    std::fs::remove_file(&path).unwrap();
}

#[test]
fn config_files_feed_flags_and_lose_to_explicit_ones() {
    let dir = std::env::temp_dir().join("juntalab-cfg-test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("scenario.cfg");
    std::fs::write(
        &path,
        "[scenario]\nspace=cube:n=4\nfn=parity\ncheck=spectral-gap,bakry\n",
    )
    .unwrap();
    let out = juntalab(&["verify", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    assert!(stdout_of(&out).contains("# summary: 2 passed"));
    let narrowed = juntalab(&[
        "verify",
        "--config",
        path.to_str().unwrap(),
        "--check",
        "bakry",
    ]);
    assert!(stdout_of(&narrowed).contains("# summary: 1 passed"));
    std::fs::remove_file(&path).unwrap();
}

#[test]
fn help_names_every_subcommand() {
    let out = juntalab(&["help"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout_of(&out);
    for word in ["spaces info", "verify", "junta extract", "slice", "continuous", "sweep"] {
        assert!(text.contains(word), "help missing {word}");
    }
    for sub in ["verify", "junta", "slice", "continuous", "sweep", "spaces"] {
        let topic = juntalab(&["help", sub]);
        assert_eq!(topic.status.code(), Some(0), "help {sub}");
        assert!(!topic.stdout.is_empty());
    }
}

#[test]
fn unknown_flags_and_checks_explain_themselves() {
    let out = juntalab(&[
        "verify",
        "--space",
        "cube:n=4",
        "--fn",
        "majority",
        "--check",
        "nonsense",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("unknown check 'nonsense'"), "{err}");
    assert!(err.contains("spectral-gap"), "should list alternatives: {err}");

    let flag = juntalab(&["verify", "--nonsense", "1"]);
    assert_eq!(flag.status.code(), Some(2));
    let err = String::from_utf8(flag.stderr).unwrap();
    assert!(err.contains("unknown flag"), "{err}");
}
