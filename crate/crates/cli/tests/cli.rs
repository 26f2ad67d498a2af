use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_adicfactor")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn render_counts_circles() {
    let out = run(&["render", "--example", "ternary", "--stage", "4"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).matches("<circle").count(), 14);
}

#[test]
fn hadamard_check_passes() {
    let out = run(&["verify", "hadamard", "--n", "3"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    assert!(stdout(&out).contains("residuals: [0, 0, 0]"));
}

#[test]
fn malformed_input_exits_with_two() {
    let dir = std::env::temp_dir().join(format!("adicfactor-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.json");
    std::fs::write(&bad, "{\"levels\": [").unwrap();
    let out = run(&["validate", "--diagram", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("parse"));
    assert_eq!(run(&["validate", "--example", "no-such-diagram"]).status.code(), Some(2));
    assert_eq!(run(&["vershik", "--example", "binary", "--path", "prefix=[7] tail=allmin"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn seeded_witness_is_deterministic() {
    let args = [
        "quotient", "--pair", "binary", "--path", "prefix=[1] tail=periodic:[0]",
        "--other", "prefix=[] tail=periodic:[0]", "--eps", "1/8", "--samples", "20", "--seed", "3",
    ];
    let (a, b) = (run(&args), run(&args));
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(stdout(&a), stdout(&b));
    assert!(stdout(&a).contains("verified: true"));
}

#[test]
fn extended_map_moves_fibre_coordinates() {
    let out = run(&["dps", "--assignment", "interval", "--path", "prefix=[2,0] tail=identity", "--coord", "9/16"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    assert!(stdout(&out).contains("3/16"));
}

#[test]
fn dimension_group_of_binary() {
    let out = run(&["dimgroup", "--example", "binary", "--depth", "2"]);
    assert!(stdout(&out).contains("group: Z[1/2]"));
}
