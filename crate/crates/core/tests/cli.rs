use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn ringclass(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ringclass"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("ringclass-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn read_json(path: &PathBuf) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn classgroup_prints_structure() {
    let out = ringclass(&["classgroup", "-23"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("h(D) = 3"));
    assert!(text.contains("structure: Z/3"));
    assert!(text.contains("(1, 1, 6) (2, -1, 3) (2, 1, 3)"));

    let text = stdout(&ringclass(&["classgroup", "-84"]));
    assert!(text.contains("structure: Z/2 x Z/2"));
    assert!(text.contains("#Pic[2] = 4"));
}

#[test]
fn hilbert_prints_the_polynomial() {
    let out = ringclass(&["hilbert", "-23"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).trim(), "x^3 + 3491750*x^2 - 5151296875*x + 12771880859375");
    assert_eq!(stdout(&ringclass(&["hilbert", "-4"])).trim(), "x - 1728");
}

#[test]
fn lvalue_checks_the_class_number_formula() {
    let text = stdout(&ringclass(&["lvalue", "-4"]));
    assert!(text.contains("L(1, chi_-4) = 0.78539816339"));
    assert!(text.contains("consistent"));
    assert_eq!(ringclass(&["lvalue", "-16"]).status.code(), Some(1));
}

#[test]
fn bound_heegner_writes_an_audited_report() {
    let path = scratch("heegner.json");
    let out = ringclass(&["bound-heegner", "--r", "2", "--c5", "1", "--deg-pi", "1", "--json", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let report = read_json(&path);
    let threshold = report["threshold"].as_str().expect("threshold is a decimal string");
    assert!(threshold.bytes().all(|b| b.is_ascii_digit()));
    assert_eq!(report["exceptional_field_caveat"], true);
    let names: Vec<&str> = report["audit"].as_array().unwrap().iter().map(|a| a["name"].as_str().unwrap()).collect();
    assert_eq!(&names[..4], ["c5", "c6", "annihilator", "c7"]);
    assert!(names.contains(&"log_crossing"));
}

#[test]
fn eps_grid_restricts_the_search() {
    let text = stdout(&ringclass(&["bound-heegner", "--r", "2", "--c5", "1", "--deg-pi", "1", "--eps-grid", "0.07,0.04"]));
    // both eps1 values are admissible at even exponent 3; the smaller c8 at 0.07 wins
    assert!(text.contains("epsilon1: 0.07  epsilon2: 0.04"), "{text}");
}

#[test]
fn bound_ao_strips_fibres_first() {
    let out = ringclass(&["bound-ao", "--curve", "(x - 3)*(x*y - 1)"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("curve: x*y - 1"));
    assert!(text.contains("removed fibre: x = 3"));
    assert!(text.contains("c9 = 1"));
}

#[test]
fn sieve_json_schema() {
    let path = scratch("sieve.json");
    let out = ringclass(&["sieve", "--curve", "x + y - 1728", "--cap", "6", "--json", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let report = read_json(&path);
    let keys: Vec<&String> = report.as_object().unwrap().keys().collect();
    for key in ["curve", "z_prime", "c11", "cap", "cap_vs_bound", "hits"] {
        assert!(keys.iter().any(|k| *k == key), "missing {key}");
    }
    assert_eq!(report["cap"], "6");
    assert_eq!(report["cap_vs_bound"], "cap_below_bound");
    assert!(report["c11"]["audit"].as_array().unwrap().iter().all(|a| a["formula"].is_string()));
    for hit in report["hits"].as_array().unwrap() {
        assert!(hit["d1"].is_string() && hit["d2"].is_string() && hit["witness_poly"].is_string());
        assert!(hit["same_cm_field"].is_boolean());
    }
}

#[test]
fn curve_from_file() {
    let path = scratch("curve.txt");
    std::fs::write(&path, "x*y - 1\n").unwrap();
    let out = ringclass(&["sieve", "--curve", path.to_str().unwrap(), "--cap", "8"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("hits: 0"));
}

#[test]
fn exit_codes() {
    assert_eq!(ringclass(&["sieve", "--curve", "x - 5"]).status.code(), Some(2));
    assert_eq!(ringclass(&["sieve", "--curve", "(y + 1)*(y - 2)"]).status.code(), Some(2));
    assert_eq!(ringclass(&["sieve", "--curve", "x + y", "--cap", "5000"]).status.code(), Some(3));
    assert_eq!(ringclass(&["sieve", "--curve", "x +* y"]).status.code(), Some(4));
    assert_eq!(ringclass(&["sieve", "--curve", "0"]).status.code(), Some(4));
    assert_eq!(ringclass(&["classgroup"]).status.code(), Some(4));
    assert_eq!(ringclass(&["--help"]).status.code(), Some(0));
}

#[test]
fn parse_errors_name_the_position() {
    let out = ringclass(&["sieve", "--curve", "x + y)"]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("position 5"));
}
