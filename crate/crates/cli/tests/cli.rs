use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn ciel(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ciel")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn proofs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/data/proofs")
}

#[test]
fn verdicts_and_exit_codes() {
    let o = ciel(&["sat", "p & ~p"]);
    assert_eq!((stdout(&o).trim(), code(&o)), ("UNSAT", 1));
    let o = ciel(&["valid", "C[q] p -> p"]);
    assert_eq!((stdout(&o).trim(), code(&o)), ("VALID", 0));
    let o = ciel(&["valid", "p -> C[q] p"]);
    assert!(stdout(&o).starts_with("INVALID"));
    assert_eq!(code(&o), 1);
    assert_eq!(code(&ciel(&["sat", "C[a &"])), 2);
    assert_eq!(code(&ciel(&["frobnicate"])), 2);
    assert_eq!(code(&ciel(&["sat", "C[a] p", "--cap-closure", "2"])), 3);
    assert_eq!(code(&ciel(&["sat", "p", "--cap-types", "0"])), 2);
}

#[test]
fn witness_reverifies_under_check() {
    let dir = tempfile::tempdir().unwrap();
    let witness = dir.path().join("w.json");
    let dot = dir.path().join("w.dot");
    let formula = "~C[a | b] p & C[a] C[b] p & C[b] C[a] p";
    let o = ciel(&["sat", formula, "--witness", witness.to_str().unwrap(), "--emit-dot", dot.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    let world = out.split("world ").nth(1).unwrap().split(' ').next().unwrap();
    for strict in [false, true] {
        let mut args = vec!["check", formula, "--model", witness.to_str().unwrap(), "--world", world];
        if strict {
            args.push("--strict");
        }
        let o = ciel(&args);
        assert_eq!((stdout(&o).trim(), code(&o)), ("true", 0));
    }
    assert!(std::fs::read_to_string(dot).unwrap().starts_with("graph model {"));
    let o = ciel(&["check", "p & ~p", "--model", witness.to_str().unwrap(), "--world", world]);
    assert_eq!((stdout(&o).trim(), code(&o)), ("false", 1));
    let o = ciel(&["check", "p", "--model", witness.to_str().unwrap(), "--world", "nowhere"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn translations() {
    let o = ciel(&["translate", "ciel2mu", "C[q] p"]);
    assert_eq!(
        stdout(&o).trim(),
        "nu z. p & [edge] ([pi1] ~q | [pi2] z) & [pi2^-] ([pi1] ~q | [edge^-] z)"
    );
    let o = ciel(&["translate", "gel2ciel", "C{a, b} p"]);
    assert_eq!(stdout(&o).trim(), "C[p_a | p_b] p");
    assert_eq!(code(&ciel(&["translate", "ciel2gel", "C[a] p"])), 2);

    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("m.json");
    std::fs::write(
        &model,
        r#"{"worlds": ["x"], "agents": [{"name": "ann", "valuation": {"a": true}}, {"name": "bob", "valuation": {"a": false}}]}"#,
    )
    .unwrap();
    let o = ciel(&["translate", "ciel2gel", "C[a] p & C[true] q", "--model", model.to_str().unwrap()]);
    assert_eq!(stdout(&o).trim(), "C{ann} p & C{ann, bob} q");
    let o = ciel(&["translate", "ciel2gel", "C[false] p", "--model", model.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
}

#[test]
fn proofs() {
    for entry in std::fs::read_dir(proofs_dir()).unwrap() {
        let path = entry.unwrap().path();
        let o = ciel(&["prove", "--check", path.to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{}: {}", path.display(), stdout(&o));
        assert!(stdout(&o).starts_with("accepted"));
    }
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.proof");
    std::fs::write(&bad, "1. p -> p ; Taut\n2. q -> q ; Taut\n3. q ; MP 1 2\n").unwrap();
    let o = ciel(&["prove", "--check", bad.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("line 3"));

    let generated = dir.path().join("ind.proof");
    let o = ciel(&["prove", "--ind", "3", "--phi", "p & ~q"]);
    assert_eq!(code(&o), 0);
    std::fs::write(&generated, stdout(&o)).unwrap();
    assert_eq!(code(&ciel(&["prove", "--check", generated.to_str().unwrap()])), 0);
}

#[test]
fn muddy_children() {
    let o = ciel(&["muddy", "--n", "1", "--k", "3", "--counters", "1", "--check"]);
    assert_eq!((stdout(&o).trim(), code(&o)), ("round on row 1: holds", 0));
    let o = ciel(&["muddy", "--n", "1", "--k", "2", "--emit-model"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("\"worlds\""));
    let o = ciel(&["muddy", "--n", "1", "--k", "2", "--emit-formulas"]);
    assert!(stdout(&o).contains("initial: C[true] (p_1_1 | p_1_2)"));
    assert_eq!(code(&ciel(&["muddy", "--n", "1", "--k", "1"])), 2);
    assert_eq!(code(&ciel(&["muddy", "--n", "3", "--k", "4"])), 3);
}

#[test]
fn deterministic() {
    for args in [
        &["gen", "--seed", "11", "--count", "20"][..],
        &["gen", "--seed", "11", "--count", "3", "--kind", "model"][..],
        &["sat", "~C[a | b] p & C[a] C[b] p", "--stats"][..],
    ] {
        assert_eq!(stdout(&ciel(args)), stdout(&ciel(args)));
    }
    assert_ne!(stdout(&ciel(&["gen", "--seed", "1"])), stdout(&ciel(&["gen", "--seed", "2"])));
}

#[test]
fn parse_forms() {
    let o = ciel(&["parse", "p -> q"]);
    assert_eq!(stdout(&o).trim(), "p -> q");
    let o = ciel(&["parse", "--syntax", "mu", "nu z. p & [r] z"]);
    assert_eq!(stdout(&o).trim(), "nu z. p & [r] z");
    assert_eq!(code(&ciel(&["parse", "--syntax", "mu", "nu z. ~z"])), 2);
    let o = ciel(&["parse", "--ast", "C[a] p"]);
    assert!(stdout(&o).contains("Atom("));
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("f.txt");
    std::fs::write(&f, "C[a] (p & q)\n").unwrap();
    let o = ciel(&["parse", &format!("@{}", f.display())]);
    assert_eq!(stdout(&o).trim(), "C[a] (p & q)");
}
