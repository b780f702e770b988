use std::collections::BTreeSet;
use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn tm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tm")).args(args).output().unwrap()
}

fn out(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn check_empty_model() {
    let o = tm(&["check", &fixture("empty.tm")]);
    assert_eq!(o.status.code(), Some(0));
    assert!(out(&o).contains("total"));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(tm(&["check"]).status.code(), Some(2));
    assert_eq!(
        tm(&["check", "--frobnicate", &fixture("empty.tm")]).status.code(),
        Some(2)
    );
    assert_eq!(tm(&["check", "/no/such/file.tm"]).status.code(), Some(2));
    let o = tm(&[
        "simulate",
        &fixture("airport.tm"),
        "--chronology",
        "B",
        "--choose",
        "luggage",
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn invalid_model_reports_position() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.tm");
    std::fs::write(
        &p,
        "model bad {\n  thimac a \"A\" { stages: create, process; }\n  flow f: a.process -> a.create;\n}\n",
    )
    .unwrap();
    let o = tm(&["check", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let first = out(&o).lines().next().unwrap().to_string();
    assert!(first.starts_with(&format!("{}:3:", p.display())), "{first}");
    assert!(first.contains("error: E-CREATE-INFLOW"), "{first}");
}

#[test]
fn syntax_errors_go_to_stderr() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("broken.tm");
    std::fs::write(&p, "model m {\n  thimac\n").unwrap();
    let o = tm(&["check", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("broken.tm:"));
}

#[test]
fn behavior_dot_matches_chronology() {
    let o = tm(&["render", &fixture("airport.tm"), "--level", "behavior"]);
    assert!(o.status.success());
    let dot = out(&o);
    // Minimal DOT reader: `"X" [` declares a node, `"X" -> "Y";` an edge.
    let mut nodes = BTreeSet::new();
    let mut edges = BTreeSet::new();
    for line in dot.lines().map(str::trim) {
        let parts: Vec<&str> = line.split('"').collect();
        if line.contains(" -> ") && parts.len() >= 4 {
            edges.insert((parts[1].to_string(), parts[3].to_string()));
        } else if parts.len() >= 3 && parts[2].trim_start().starts_with('[') {
            nodes.insert(parts[1].to_string());
        }
    }
    let want_nodes: BTreeSet<String> = (1..=14).map(|i| format!("E{i}")).collect();
    assert_eq!(nodes, want_nodes);
    let src = std::fs::read_to_string(fixture("airport.tm")).unwrap();
    let doc = tm_core::dsl::parse_str(&src).unwrap().document;
    let want_edges: BTreeSet<(String, String)> = doc.chronologies[0]
        .edges
        .iter()
        .map(|(a, b)| (a.to_string(), b.to_string()))
        .collect();
    assert_eq!(edges, want_edges);
}

#[test]
fn render_to_file_is_stable() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.dot");
    let b = dir.path().join("b.dot");
    for p in [&a, &b] {
        let o = tm(&[
            "render",
            &fixture("airport.tm"),
            "--level",
            "overlay",
            "-o",
            p.to_str().unwrap(),
        ]);
        assert!(o.status.success());
        assert!(o.stdout.is_empty());
    }
    let text = std::fs::read(&a).unwrap();
    assert_eq!(text, std::fs::read(&b).unwrap());
    let text = String::from_utf8(text).unwrap();
    let src = std::fs::read_to_string(fixture("airport.tm")).unwrap();
    let doc = tm_core::dsl::parse_str(&src).unwrap().document;
    assert_eq!(text.matches("subgraph \"cluster_").count(), doc.model.thimac_count());
    assert_eq!(text.matches("[shape=box").count(), 14);
}

#[test]
fn unknown_highlight_fails() {
    let o = tm(&["render", &fixture("airport.tm"), "--highlight", "f1,nope"]);
    assert_eq!(o.status.code(), Some(1));
    let o = tm(&["render", &fixture("airport.tm"), "--highlight", "f1,counter.process"]);
    assert_eq!(out(&o).matches("color=red").count(), 2);
}

#[test]
fn simulate_scripted_and_bad_choices() {
    let air = fixture("airport.tm");
    let o = tm(&[
        "simulate",
        &air,
        "--chronology",
        "B",
        "--choose",
        "luggage=E2",
        "--choose",
        "schengen=E10",
    ]);
    assert_eq!(
        out(&o).trim(),
        "trace sim = [E2 @ 0, E6 @ 1, E7 @ 2, E8 @ 3, E10 @ 4, E11 @ 5, E12 @ 6, E13 @ 7, E14 @ 8];"
    );
    let o = tm(&["simulate", &air, "--chronology", "B", "--choose", "luggage=E9"]);
    assert_eq!(o.status.code(), Some(1));
    let o = tm(&["simulate", &air, "--chronology", "nope", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn runs_respects_bound() {
    let o = tm(&["runs", &fixture("airport.tm"), "--chronology", "B", "--bound", "3"]);
    assert_eq!(o.status.code(), Some(1));
    let o = tm(&["runs", &fixture("liar.tm"), "--chronology", "B"]);
    assert_eq!(out(&o), "[E1,E2,E3]\n");
}

#[test]
fn desugar_full_model_is_refused() {
    assert_eq!(tm(&["desugar", &fixture("airport.tm")]).status.code(), Some(1));
}
