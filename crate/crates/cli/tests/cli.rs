use std::process::Command;

use locsym_cli::main_with;

const BIN: &str = env!("CARGO_BIN_EXE_locsym");

fn fixture(name: &str) -> String {
    format!("{}/tests/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn run(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = main_with(std::iter::once("locsym").chain(args.iter().copied()), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

#[test]
fn exit_codes_from_the_binary() {
    let status = |args: &[&str]| Command::new(BIN).args(args).output().unwrap().status.code();
    assert_eq!(status(&["check", "ring3", "mutex", "--oracle"]), Some(0));
    assert_eq!(status(&["check", &fixture("broken_ring3.lmu"), "mutex"]), Some(1));
    assert_eq!(status(&["check", &fixture("bad_syntax.lmu"), "mutex"]), Some(2));
    assert_eq!(status(&["check", "no_such_model", "mutex"]), Some(2));
    assert_eq!(status(&["--cap", "10", "invariant", "ring5", "--oracle"]), Some(3));
    assert_eq!(status(&["frobnicate"]), Some(2));
    assert_eq!(status(&["--help"]), Some(0));
}

#[test]
fn broken_model_reports_a_trace() {
    let (code, out, _) = run(&["check", &fixture("broken_ring3.lmu"), "mutex", "--oracle"]);
    assert_eq!(code, 1);
    assert!(out.contains("local fails"), "{out}");
    assert!(out.contains("trace:"), "{out}");
    assert!(out.contains("p0(state=E)"), "{out}");
}

#[test]
fn parse_errors_name_the_position() {
    let (code, _, err) = run(&["check", &fixture("bad_syntax.lmu"), "mutex"]);
    assert_eq!(code, 2);
    assert!(err.contains("bad_syntax.lmu:3:"), "{err}");
}

#[test]
fn json_check_report() {
    let (code, out, _) = run(&["check", "ring3", "mutex", "--oracle", "--json"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["formula_class"], "universal");
    let verdict = &v["verdicts"][0];
    assert_eq!(verdict["local"], true);
    assert_eq!(verdict["claim"], "holds_globally");
    assert_eq!(verdict["oracle"]["global"], true);
    assert_eq!(verdict["oracle"]["agrees"], true);
    assert_eq!(verdict["class"].as_array().unwrap().len(), 3);
    // keys are emitted in sorted order
    let keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
    assert!(out.find("\"classes\"").unwrap() < out.find("\"formula\"").unwrap());
}

#[test]
fn inline_formulas_and_single_nodes() {
    let (code, out, _) = run(&["check", "red_black_ring", "EF inE", "--node", "p1"]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("node p1"), "{out}");
    let (code, _, err) = run(&["check", "ring3", "mutex", "--node", "q9"]);
    assert_eq!(code, 2);
    assert!(err.contains("q9"));
}

#[test]
fn non_outward_model_gets_no_transfer() {
    let (code, out, _) = run(&["check", "non_outward", "mayGet", "--oracle"]);
    assert_eq!(code, 1);
    assert!(out.contains("local holds"), "{out}");
    assert!(out.contains("no transfer result applies"), "{out}");
    assert!(out.contains("global: fails"), "{out}");
}

#[test]
fn other_subcommands() {
    let (code, out, _) = run(&["balance", "red_black_ring"]);
    assert_eq!(code, 0);
    assert_eq!(out.matches("class {").count(), 2, "{out}");

    let (code, out, _) = run(&["invariant", "ring3", "--dump", "--oracle"]);
    assert_eq!(code, 0);
    assert!(out.contains("θ_p0: 10 states"), "{out}");
    assert!(out.contains("oracle: covers 36 reachable states"), "{out}");

    let (code, out, _) = run(&["outward", "non_outward"]);
    assert_eq!(code, 0);
    assert_eq!(out.matches("not outward-facing").count(), 2, "{out}");

    let (code, out, _) = run(&["tiles", "torus_tile"]);
    assert_eq!(code, 0);
    assert!(out.contains("balance: true"), "{out}");

    let dump = std::env::temp_dir().join(format!("locsym-spaces-{}.txt", std::process::id()));
    let (code, out, _) = run(&["spaces", "ring3", "--node", "p0", "--global", "--dump", dump.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(out.contains("local space of p0: 10 states"), "{out}");
    assert!(out.contains("global space of p0: 36 states"), "{out}");
    assert!(std::fs::read_to_string(&dump).unwrap().contains("# global"));
    std::fs::remove_file(dump).unwrap();
}

#[test]
fn generated_family_reparses_and_checks() {
    let (code, text, _) = run(&["tiles", "ring3", "--generate", "ring", "4", "--exactly", "1", "tok"]);
    assert_eq!(code, 0);
    let path = std::env::temp_dir().join(format!("locsym-ring4-{}.lmu", std::process::id()));
    std::fs::write(&path, text).unwrap();
    let (code, out, _) = run(&["check", path.to_str().unwrap(), "mutex", "--oracle"]);
    std::fs::remove_file(&path).unwrap();
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("on ring4"), "{out}");

    let (code, _, err) = run(&["tiles", "ring3", "--generate", "mesh", "4"]);
    assert_eq!(code, 2);
    assert!(err.contains("mesh"));
}

#[test]
fn counting_report() {
    let (code, out, _) = run(&["report", "counting", "3", "6", "2", "--json"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["counter_size"], "28");
    assert_eq!(v["two_pow_m"], "8");
    assert_eq!(v["local_size"], "9");
}
