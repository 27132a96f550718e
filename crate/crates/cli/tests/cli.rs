use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_smin-lab"))
        .args(args)
        .current_dir(dir)
        .env("SMINLAB_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

/// The `config:` block echoed at the top of stdout.
fn echoed_config(o: &Output) -> String {
    let text = stdout(o);
    let body = text.strip_prefix("config:\n").expect("config block first");
    let end = body.find("\n}\n").expect("end of config block");
    body[..end + 2].to_string()
}

#[test]
fn tail_writes_one_row_per_grid_point() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        &[
            "tail", "--dist", "gaussian", "--n", "30", "--trials", "200", "--shift", "zero", "--t-grid",
            "0.05:0.5:10", "--seed", "42", "--out", "tail.csv",
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(dir.path().join("tail.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 11);
    assert!(lines[0].starts_with("t,trials,hits,p_hat,ci_low,ci_high"));
    assert!(lines[1..].iter().all(|l| l.contains(",gaussian,zero,42")));
}

#[test]
fn echoed_config_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let first = run(
        &[
            "tail", "--dist", "bernoulli", "--n", "12", "--trials", "100", "--shift", "identity:2", "--t-grid",
            "0.01:1:5", "--geom", "--seed", "3", "--out", "a.json",
        ],
        dir.path(),
    );
    assert_eq!(first.status.code(), Some(0));
    fs::write(dir.path().join("config.json"), echoed_config(&first)).unwrap();
    let second = run(&["tail", "--config", "config.json", "--out", "b.json"], dir.path());
    assert_eq!(second.status.code(), Some(0), "{}", String::from_utf8_lossy(&second.stderr));

    let points = |name: &str| {
        let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join(name)).unwrap()).unwrap();
        (v["config"].clone(), v["points"].clone())
    };
    assert_eq!(points("a.json"), points("b.json"));
}

#[test]
fn config_conflicts_with_experiment_flags() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("c.json"), "{}").unwrap();
    let o = run(&["tail", "--config", "c.json", "--n", "5"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_2_with_synopsis() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        vec!["tail", "--nope"],
        vec!["tail", "--t-grid", "1:0:3"],
        vec!["tail", "--shift", "rotate:1"],
        vec!["tail", "--n", "0"],
        vec!["lemma-check", "--suite", "everything"],
        vec!["alphaeta-demo"],
        vec!["alphaeta-demo", "--cube", "--n", "5"],
        vec!["graph-decompose", "missing.txt"],
        vec!["frobnicate"],
    ] {
        let o = run(&args, dir.path());
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(String::from_utf8_lossy(&o.stderr).contains("Usage:"), "{args:?}");
    }
}

#[test]
fn every_verb_documents_its_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let expected: [(&str, &[&str]); 6] = [
        ("tail", &["--t-grid", "[default: 0.05:0.5:10]", "--geom", "--config", "[default: smin-scaled]"]),
        ("counterexample", &["--tau", "[default: 2500]", "[default: 50]"]),
        ("distance-profile", &["--ks", "[default: 2,4,8,16,32]", "--a"]),
        ("lemma-check", &["--suite", "--instances", "pivot 10000"]),
        ("alphaeta-demo", &["--cube", "--structure", "[default: 40]", "[default: 10]"]),
        ("graph-decompose", &["--vertex", "--depth", "[default: exact]"]),
    ];
    for (verb, needles) in expected {
        let o = run(&[verb, "--help"], dir.path());
        assert_eq!(o.status.code(), Some(0));
        let text = stdout(&o);
        for needle in needles {
            assert!(text.contains(needle), "{verb} help lacks {needle}");
        }
    }
}

#[test]
fn lemma_check_passes_and_reports() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["lemma-check", "--suite", "q-sets", "--instances", "200", "--seed", "7", "--out", "r.json"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("PASS"));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("r.json")).unwrap()).unwrap();
    assert_eq!(v["failures"], 0);
    assert_eq!(v["instances"], 200);
}

#[test]
fn alphaeta_cube_demo() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["alphaeta-demo", "--cube", "--n", "4", "--k", "10", "--atoms", "40"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("exact P(E) = 0.142061"), "{text}");
    assert!(text.contains("4/K = 0.4: true"));
}

#[test]
fn alphaeta_structure_file() {
    let dir = tempfile::tempdir().unwrap();
    let doc = r#"{"factors":[[0.5,0.5],[0.5,0.5]],"psi":[1,2],"lambda":[1],
        "classes":[[1,1,2,2],[1,1,1,1]],"event":[0,3],"event_partition":[[1,1],[1,1]]}"#;
    fs::write(dir.path().join("s.json"), doc).unwrap();
    let o = run(&["alphaeta-demo", "--structure", "s.json"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("section sum 1.500000"));
}

#[test]
fn graph_decompose_reports_steps() {
    let dir = tempfile::tempdir().unwrap();
    // a star at vertex 2 plus one pendant edge; vertex 1 is isolated
    fs::write(dir.path().join("g.txt"), "# star\n2 3\n2 4\n2 5\n2 6\n5 6\n").unwrap();
    let o = run(
        &["graph-decompose", "g.txt", "--vertex", "1", "--depth", "2", "--level", "1", "--out", "d.json"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("d.json")).unwrap()).unwrap();
    assert_eq!(v["n"], 6);
    assert_eq!(v["steps"][0]["residual_edges"], 5);
    // removing vertex 2 leaves one edge, at most half of five
    assert_eq!(v["steps"][1]["s"], serde_json::json!([2]));
    assert_eq!(v["steps"][1]["residual_edges"], 1);

    let busy = run(&["graph-decompose", "g.txt", "--vertex", "2"], dir.path());
    assert_eq!(busy.status.code(), Some(2));
}

#[test]
fn counterexample_and_profile_emit_tables() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["counterexample", "--n", "10", "--tau", "100", "--trials", "100", "--out", "c.csv"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(dir.path().join("c.csv")).unwrap();
    assert_eq!(text.lines().count(), 1 + 1 + 3 + 2);
    assert!(text.starts_with("event,constant,threshold,hits"));

    let o = run(
        &["distance-profile", "--n", "20", "--trials", "100", "--a", "0.2", "--ks", "1,2,4", "--out", "p.csv"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(dir.path().join("p.csv")).unwrap();
    assert_eq!(text.lines().count(), 4);
}
