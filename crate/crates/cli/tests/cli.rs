use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;
use whiteboard::adversary::{witness_order, SweepReport};
use whiteboard::graph::LabeledGraph;

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_whiteboard"))
        .args(args)
        .output()
        .expect("spawn whiteboard")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write_graph(dir: &TempDir, name: &str, n: usize, edges: &[(usize, usize)]) -> PathBuf {
    let g = LabeledGraph::from_edges(n, edges.iter().copied()).unwrap();
    let path = dir.path().join(name);
    fs::write(&path, g.to_file_string()).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn class_c_gadget_on_path_has_no_square() {
    let dir = TempDir::new().unwrap();
    let p3 = write_graph(&dir, "p3.graph", 3, &[(1, 2), (2, 3)]);
    let c = dir.path().join("c.graph");
    let o = bin(&["gen", "--kind", "class-c", "--base", s(&p3), "--i", "1", "--j", "3", "--out", s(&c)]);
    assert_eq!(o.status.code(), Some(0), "{o:?}");
    let o = bin(&["oracle", "--graph", s(&c), "--problem", "square"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "false\n");
}

#[test]
fn mis_run_prints_set() {
    let dir = TempDir::new().unwrap();
    let p3 = write_graph(&dir, "p3.graph", 3, &[(1, 2), (2, 3)]);
    let o = bin(&[
        "run", "--graph", s(&p3), "--protocol", "mis", "--x", "2", "--model", "simsync", "--scheduler", "fixed:2,1,3",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "{2}\n");
}

#[test]
fn disconnected_spanning_tree_sweep_deadlocks() {
    let dir = TempDir::new().unwrap();
    let g = write_graph(&dir, "d.graph", 4, &[(1, 2), (3, 4)]);
    let report = dir.path().join("r.json");
    let o = bin(&[
        "sweep", "--graph", s(&g), "--protocol", "spanning-tree", "--root", "1", "--model", "freeasync", "--report",
        s(&report),
    ]);
    assert_eq!(o.status.code(), Some(2));
    let r: SweepReport = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert!(!r.deadlocks.is_empty());
    assert!(r.failures.is_empty());
    for w in &r.deadlocks {
        let order = witness_order(w, 4);
        let sched = format!("fixed:{}", order.iter().map(ToString::to_string).collect::<Vec<_>>().join(","));
        let o = bin(&[
            "run", "--graph", s(&g), "--protocol", "spanning-tree", "--root", "1", "--model", "freeasync",
            "--scheduler", &sched,
        ]);
        assert_eq!(o.status.code(), Some(2), "{sched}");
    }
}

#[test]
fn run_on_disconnected_graph_writes_partial_trace() {
    let dir = TempDir::new().unwrap();
    let g = write_graph(&dir, "d.graph", 3, &[(1, 2)]);
    let trace = dir.path().join("t.jsonl");
    let o = bin(&[
        "run", "--graph", s(&g), "--protocol", "spanning-tree", "--root", "1", "--model", "freeasync", "--scheduler",
        "min-id", "--trace", s(&trace),
    ]);
    assert_eq!(o.status.code(), Some(2));
    let text = fs::read_to_string(&trace).unwrap();
    assert!(text.lines().last().unwrap().starts_with("{\"deadlock\""));
}

#[test]
fn gen_round_trips_through_run() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("tc.graph");
    assert_eq!(bin(&["gen", "--kind", "two-cliques", "--n", "3", "--out", s(&out)]).status.code(), Some(0));
    let text = fs::read_to_string(&out).unwrap();
    let g: LabeledGraph = text.parse().unwrap();
    assert_eq!(g.to_file_string(), text);
    let o = bin(&["run", "--graph", s(&out), "--protocol", "num-edges", "--model", "simasync", "--scheduler", "min-id"]);
    assert_eq!(stdout(&o), format!("{}\n", g.edge_count()));
    let o = bin(&[
        "run", "--graph", s(&out), "--protocol", "two-cliques", "--model", "simsync", "--scheduler", "random:4",
    ]);
    assert_eq!((o.status.code(), stdout(&o).as_str()), (Some(0), "true\n"));
}

#[test]
fn seeded_traces_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let g = write_graph(&dir, "g.graph", 6, &[(1, 2), (2, 3), (3, 4), (4, 5), (5, 6), (1, 4), (2, 6)]);
    let mut traces = Vec::new();
    for k in 0..2 {
        let t = dir.path().join(format!("t{k}.jsonl"));
        let o = bin(&[
            "run", "--graph", s(&g), "--protocol", "bfs", "--root", "3", "--model", "freesync", "--scheduler",
            "random:99", "--trace", s(&t),
        ]);
        assert_eq!(o.status.code(), Some(0));
        traces.push(fs::read(&t).unwrap());
    }
    assert_eq!(traces[0], traces[1]);
    let text = String::from_utf8(traces.pop().unwrap()).unwrap();
    assert!(text.lines().last().unwrap().starts_with("{\"output\""));
}

#[test]
fn sweep_witnesses_replay_through_run() {
    let dir = TempDir::new().unwrap();
    let g = write_graph(&dir, "p4.graph", 4, &[(1, 2), (2, 3), (3, 4)]);
    let report = dir.path().join("r.json");
    let o = bin(&[
        "sweep", "--graph", s(&g), "--protocol", "mis", "--x", "1", "--model", "simsync", "--report", s(&report),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r: SweepReport = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert!(r.exhaustive && r.is_clean());
    assert!(r.distinct_outputs.len() >= 2);
    for (k, order) in [vec![1, 2, 3, 4], vec![1, 4, 3, 2], vec![4, 3, 2, 1]].iter().enumerate() {
        let sched = format!(
            "fixed:{}",
            order.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
        );
        let o = bin(&["run", "--graph", s(&g), "--protocol", "mis", "--x", "1", "--model", "simsync", "--scheduler", &sched]);
        assert_eq!(o.status.code(), Some(0), "order {k}");
        let printed = stdout(&o);
        assert!(r.distinct_outputs.iter().any(|out| format!("{out}\n") == printed), "{printed}");
    }
}

#[test]
fn audit_prints_json() {
    let o = bin(&["audit", "--family", "all-graphs", "--n", "4"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["family_size"], "64");
    assert_eq!(v["bits_needed"], 6);
}

#[test]
fn usage_errors_exit_3() {
    let dir = TempDir::new().unwrap();
    let g = write_graph(&dir, "g.graph", 3, &[(1, 2)]);
    let cases: Vec<Vec<&str>> = vec![
        vec!["frobnicate"],
        vec!["run", "--graph", s(&g), "--protocol", "mis", "--model", "simsync", "--scheduler", "min-id"],
        vec!["run", "--graph", s(&g), "--protocol", "mis", "--x", "9", "--model", "simsync", "--scheduler", "min-id"],
        vec!["run", "--graph", s(&g), "--protocol", "bfs", "--root", "1", "--model", "simsync", "--scheduler", "min-id"],
        vec!["run", "--graph", s(&g), "--protocol", "num-edges", "--model", "simasync", "--scheduler", "fixed:1,1,2"],
        vec!["run", "--graph", "/nonexistent", "--protocol", "num-edges", "--model", "simasync", "--scheduler", "min-id"],
        vec!["oracle", "--graph", s(&g), "--problem", "square", "--bogus"],
        vec!["oracle", "--graph", s(&g), "--problem", "two-cliques"],
    ];
    for args in cases {
        let o = bin(&args);
        assert_eq!(o.status.code(), Some(3), "{args:?}");
        assert!(o.stdout.is_empty(), "{args:?}");
        assert!(!o.stderr.is_empty(), "{args:?}");
    }
}

#[test]
fn oracle_problems() {
    let dir = TempDir::new().unwrap();
    let g = write_graph(&dir, "g.graph", 4, &[(1, 2), (2, 3)]);
    let ask = |extra: &[&str]| {
        let mut args = vec!["oracle", "--graph", s(&g)];
        args.extend_from_slice(extra);
        stdout(&bin(&args))
    };
    assert_eq!(ask(&["--problem", "connectivity"]), "false\n");
    assert_eq!(ask(&["--problem", "num-edges"]), "2\n");
    assert_eq!(ask(&["--problem", "bfs", "--root", "1"]), "{1:0, 2:1, 3:2, 4:unreachable}\n");
    assert_eq!(ask(&["--problem", "spanning-tree", "--root", "1"]), "not-connected\n");
    assert_eq!(ask(&["--problem", "mis", "--x", "2"]), "{2, 4}\n");
    assert_eq!(ask(&["--problem", "build"]), "0100\n1010\n0100\n0000\n");
}
