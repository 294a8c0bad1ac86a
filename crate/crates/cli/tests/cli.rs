use revamp::generators;
use revamp::netlist::{aig_to_mig, write_aiger, write_mig};
use std::path::Path;
use std::process::{Command, Output};

fn revamp(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_revamp")).args(args).current_dir(dir).env_remove("REVAMP_CORPUS").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn setup() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("adder2.aag"), write_aiger(&generators::ripple_adder(2)).unwrap()).unwrap();
    let mig = aig_to_mig(&generators::full_adder()).unwrap();
    std::fs::write(dir.path().join("fa.mig"), write_mig(&mig).unwrap()).unwrap();
    dir
}

#[test]
fn cover_prints_hex_truth_tables() {
    let dir = setup();
    let o = revamp(&["cover", "--k", "4", "adder2.aag"], dir.path());
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["k"], 4);
    let luts = v["luts"].as_array().unwrap();
    assert!(!luts.is_empty());
    assert!(luts.iter().all(|l| l["function"].as_str().unwrap().chars().all(|c| c.is_ascii_hexdigit())));
}

#[test]
fn map_area_then_verify_and_simulate() {
    let dir = setup();
    let o = revamp(&["map-area", "--k", "4", "--rows", "8", "--cols", "8", "adder2.aag", "-o", "p.rvmp", "--report", "r.json"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("r.json")).unwrap()).unwrap();
    assert_eq!(report["#C"].as_u64().unwrap(), report["I_total"].as_u64().unwrap() + 2);
    assert_eq!(report["k"], 4);
    assert!(report.get("Min_Dev").is_some());

    let v = revamp(&["verify", "adder2.aag", "p.rvmp"], dir.path());
    assert_eq!(v.status.code(), Some(0));
    let res: serde_json::Value = serde_json::from_str(&stdout(&v)).unwrap();
    assert_eq!(res["passed"], true);
    assert_eq!(res["mode"], "exhaustive");
    assert_eq!(res["vectors"], 32);

    // a0 a1 b0 b1 cin = 1 1 1 0 0 -> 3 + 1 = 4 on s0 s1 cout
    std::fs::write(dir.path().join("v.txt"), "11100\n00000\n").unwrap();
    let s = revamp(&["simulate", "p.rvmp", "--inputs", "v.txt", "--trace", "t.json"], dir.path());
    assert!(s.status.success(), "{}", String::from_utf8_lossy(&s.stderr));
    let lines: Vec<String> = stdout(&s).lines().filter(|l| !l.starts_with('#')).map(String::from).collect();
    assert_eq!(lines, vec!["11100 001", "00000 000"]);
    let traces: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("t.json")).unwrap()).unwrap();
    assert_eq!(traces.as_array().unwrap().len(), 2);
}

#[test]
fn verify_reports_mismatch_with_exit_code_one() {
    let dir = setup();
    assert!(revamp(&["map-delay", "--cols", "4", "fa.mig", "-o", "fa.rvmp", "--report", "fa.json"], dir.path()).status.success());
    let ok = revamp(&["verify", "fa.mig", "fa.rvmp", "--random", "64", "--seed", "9"], dir.path());
    assert_eq!(ok.status.code(), Some(0));

    // same interface, different function
    let mut wrong = revamp::netlist::LogicNetwork::new(revamp::netlist::NetworkKind::Aig);
    let pis: Vec<_> = generators::full_adder().pi_names().into_iter().map(|n| wrong.add_pi(n)).collect();
    let x = wrong.add_and(pis[0], pis[1]);
    let y = wrong.add_and(pis[1], pis[2]);
    wrong.add_output(x, "s");
    wrong.add_output(y, "c");
    std::fs::write(dir.path().join("bad.aag"), write_aiger(&wrong).unwrap()).unwrap();
    let bad = revamp(&["verify", "bad.aag", "fa.rvmp"], dir.path());
    assert_eq!(bad.status.code(), Some(1));
    let res: serde_json::Value = serde_json::from_str(&stdout(&bad)).unwrap();
    assert_eq!(res["passed"], false);
    assert!(res["counterexample"].is_object());
}

#[test]
fn map_minimal_needs_single_output() {
    let dir = setup();
    let o = revamp(&["map-minimal", "fa.mig", "-o", "m.json"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let mut maj = revamp::netlist::LogicNetwork::new(revamp::netlist::NetworkKind::Mig);
    let [a, b, c] = ["a", "b", "c"].map(|n| maj.add_pi(n));
    let g = maj.add_maj(a, !b, c);
    maj.add_output(g, "f");
    std::fs::write(dir.path().join("maj.mig"), write_mig(&maj).unwrap()).unwrap();
    let o = revamp(&["map-minimal", "maj.mig", "-o", "m.json", "--report", "m.r.json"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(revamp(&["verify", "maj.mig", "m.json"], dir.path()).status.code(), Some(0));
}

#[test]
fn disassemble_lists_instructions() {
    let dir = setup();
    assert!(revamp(&["map-delay", "--cols", "3", "fa.mig", "-o", "d.json", "--report", "d.r.json"], dir.path()).status.success());
    let o = revamp(&["disassemble", "d.json"], dir.path());
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("# S_D "));
    assert!(text.lines().any(|l| l.starts_with("Read ")));
    assert!(text.lines().any(|l| l.starts_with("Apply ")));
}

#[test]
fn infeasible_area_layout_is_an_error() {
    let dir = setup();
    let o = revamp(&["map-area", "--k", "2", "--rows", "4", "--cols", "2", "adder2.aag", "-o", "p.rvmp"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Min_Dev"));
}

#[test]
fn bench_over_corpus_directory() {
    let dir = setup();
    let o = revamp(
        &["bench", "--corpus", ".", "--flow", "area,delay", "--k", "4", "--rows", "8", "--cols", "4,8,16", "--format", "json"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows: Vec<serde_json::Value> = serde_json::from_str(&stdout(&o)).unwrap();
    // adder2 (AIG): 3 area + 3 delay rows; fa (MIG): 3 delay rows
    assert_eq!(rows.len(), 9);
    assert_eq!(rows[0]["benchmark"], "adder2");
    assert_eq!(rows[0]["flow"], "area");
    assert_eq!(rows[8]["benchmark"], "fa");
    assert!(rows.iter().all(|r| r["#C"].as_u64().unwrap() == r["I_total"].as_u64().unwrap() + 2));
}

#[test]
fn bench_empty_corpus_prints_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let o = revamp(&["bench", "--corpus", "."], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).is_empty());
}
