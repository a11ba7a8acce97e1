use std::path::PathBuf;
use std::process::{Command, Output};

use questgraph_cli::dot::looks_like_dot;
use questgraph_cli::machine_file::MachineFile;

fn machines() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("machines")
}

fn questgraph(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_questgraph"))
        .args(args)
        .env_remove("QUESTGRAPH_BUDGET")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn machine(name: &str) -> String {
    machines().join(name).to_string_lossy().into_owned()
}

#[test]
fn cfl_run_agrees() {
    let o = questgraph(&["run", "cfl-nfqdp", &machine("anbn_grammar.json"), "aabb"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "accept / oracle: accept / AGREE");
}

#[test]
fn dpda_run_agrees() {
    let o = questgraph(&["run", "dpda-fqdp", &machine("dyck_dpda.json"), "aababb"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("accept / oracle: accept / AGREE"));
    let o = questgraph(&["run", "dpda-fqdp", &machine("dyck_dpda.json"), "abb"]);
    assert_eq!(stdout(&o).trim(), "reject / oracle: reject / AGREE");
}

#[test]
fn every_construction_runs_on_its_example() {
    let cases = [
        ("tm-qg", "anbn_marker_tm.json", "aabb"),
        ("tm-rqdp", "scripted_tm.json", "0248"),
        ("tm-rqdp", "unary_increment_tm.json", "11"),
        ("lm-fsm", "div3_fsm.json", "1001"),
        ("lm-fsm", "no_aa_fsm.json", "abaa"),
        ("lm-fsm", "parity_lm.json", "0110"),
        ("dpda-fqdp", "balanced_dpda.json", "aabbab"),
    ];
    for (c, file, input) in cases {
        let o = questgraph(&["run", c, &machine(file), input]);
        assert_eq!(o.status.code(), Some(0), "{c} {file}: {}", stdout(&o));
        assert!(stdout(&o).ends_with("AGREE\n"));
    }
}

#[test]
fn input_errors_exit_2() {
    let o = questgraph(&["run", "tm-qg", "/nonexistent/machine.json", "1"]);
    assert_eq!(o.status.code(), Some(2));
    let o = questgraph(&["run", "tm-qg", &machine("div3_fsm.json"), "1"]);
    assert_eq!(o.status.code(), Some(2));
    let o = questgraph(&["run", "nope", &machine("div3_fsm.json"), "1"]);
    assert_eq!(o.status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"kind\": \"tm\",\n \"start\": [}").unwrap();
    let o = questgraph(&["run", "tm-qg", bad.to_str().unwrap(), "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
}

#[test]
fn budget_exhaustion_exits_3_and_keeps_the_trace() {
    let dir = tempfile::tempdir().unwrap();
    let dot = dir.path().join("partial.dot");
    let o = questgraph(&[
        "run",
        "tm-rqdp",
        &machine("unary_increment_tm.json"),
        "1111",
        "--budget",
        "2",
        "--trace-dot",
        dot.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).contains("budget exhausted"));
    assert!(looks_like_dot(&std::fs::read_to_string(dot).unwrap()));
}

#[test]
fn budget_comes_from_the_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_questgraph"))
        .args(["run", "tm-qg", &machine("unary_increment_tm.json"), "111"])
        .env("QUESTGRAPH_BUDGET", "1")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn dot_traces_are_well_formed() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("tm-qg", "anbn_marker_tm.json", "ab"),
        ("dpda-fqdp", "dyck_dpda.json", "aababb"),
        ("cfl-nfqdp", "anbn_grammar.json", "aabb"),
        ("tm-rqdp", "scripted_tm.json", "0248"),
    ];
    for (c, file, input) in cases {
        let path = dir.path().join(format!("{c}.dot"));
        let o = questgraph(&["run", c, &machine(file), input, "--trace-dot", path.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0));
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(looks_like_dot(&text), "{c}: {text}");
        assert!(text.contains("peripheries=2"), "{c}: focus not marked");
        if c == "tm-rqdp" {
            assert!(text.contains("[label=\"ret\"]") && text.contains("[label=\"R\"]"));
        }
    }
}

#[test]
fn machine_files_round_trip() {
    for entry in std::fs::read_dir(machines()).unwrap() {
        let path = entry.unwrap().path();
        let text = std::fs::read_to_string(&path).unwrap();
        let m = MachineFile::parse(&text).unwrap().into_machine().unwrap();
        let again = MachineFile::from_machine(&m).to_json();
        let back = MachineFile::parse(&again).unwrap().into_machine().unwrap();
        assert_eq!(back, m, "{}", path.display());
        assert_eq!(again.trim(), text.trim(), "{} is not in canonical form", path.display());
    }
}

#[test]
fn bench_writes_one_row_per_run() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out.csv");
    let o = questgraph(&["bench", "--variants", "qg,rqdp", "--N", "8,16,32,64", "--C", "4", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let csv = std::fs::read_to_string(&out).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("variant,N,C,raw_ops,weighted_cost,wall_ms"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 8);
    for row in rows {
        let f: Vec<&str> = row.split(',').collect();
        assert_eq!(f.len(), 6);
        f[1].parse::<usize>().unwrap();
        f[3].parse::<usize>().unwrap();
        f[4].parse::<f64>().unwrap();
        f[5].parse::<f64>().unwrap();
    }
}

#[test]
fn bench_fits_and_skips() {
    let o = questgraph(&["bench", "--variants", "qg", "--N", "8,16,32,64,128"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stderr).contains("qg"));
    let o = questgraph(&["bench", "--variants", "fqdp", "--N", "20"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stderr).contains("warning"));
    assert_eq!(stdout(&o).trim(), "variant,N,C,raw_ops,weighted_cost,wall_ms");
    let o = questgraph(&["bench", "--N", ""]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn graph_command() {
    let dir = tempfile::tempdir().unwrap();
    let chain = dir.path().join("chain.txt");
    std::fs::write(&chain, "# four-node chain\na b\nb c\nc d\n").unwrap();
    let o = questgraph(&["graph", chain.to_str().unwrap(), "--emit", "mcg"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 6);

    let star = dir.path().join("star.txt");
    std::fs::write(&star, "a h\nb h\nc h\nd h\ne h\n").unwrap();
    let out = dir.path().join("star.bmcg");
    let o = questgraph(&["graph", star.to_str().unwrap(), "--C", "2", "--emit", "bmcg", "-o", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(std::fs::read_to_string(&out).unwrap().contains("# proxies for the widest node = 3"));

    let cyc = dir.path().join("cycle.txt");
    std::fs::write(&cyc, "a b\nb a\n").unwrap();
    let o = questgraph(&["graph", cyc.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("cycle closed by edge"));
}
