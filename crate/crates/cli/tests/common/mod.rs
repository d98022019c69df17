//! Transcript cases shared by the CLI tests and the acceptance run.
//!
//! Each case runs the built binary from the workspace root with
//! `--fixtures fixtures`, so transcripts carry no absolute paths. Set
//! `BIONET_UPDATE_GOLDEN=1` to rewrite the files under `tests/golden/`.

#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use bionet_core::{fixtures, Net};
use serde_json::Value;

pub struct Case {
    pub name: &'static str,
    pub args: &'static [&'static str],
    pub exit: i32,
}

const fn case(name: &'static str, exit: i32, args: &'static [&'static str]) -> Case {
    Case { name, args, exit }
}

/// Every subcommand appears with each exit code it can produce.
pub const CASES: &[Case] = &[
    case("classify-io", 0, &["classify", "--net", "toy-move"]),
    case("classify-bio", 0, &["classify", "--net", "paper-net-1.json"]),
    case("classify-missing", 65, &["classify", "--net", "no-such-net"]),
    case("classify-no-net", 64, &["classify"]),
    case("reach-paper", 0, &["reach", "--net", "paper-net-1", "--from", r#"{"p":6}"#, "--to", r#"{"q":1,"r":1}"#]),
    case("reach-false", 0, &["reach", "--net", "toy-move", "--from", r#"{"a":3}"#, "--to", r#"{"b":3}"#]),
    case(
        "reach-footprint",
        0,
        &["reach", "--net", "paper-net-1", "--from", r#"{"p":6}"#, "--to", r#"{"q":1,"r":1}"#, "--engine", "footprint"],
    ),
    case(
        "reach-cube",
        0,
        &["reach", "--net", "toy-kill", "--from", r#"{"a":3,"b":1}"#, "--to", r#"{"b":1}"#, "--engine", "cube"],
    ),
    case(
        "reach-capped",
        2,
        &["reach", "--net", "toy-dup", "--from", r#"{"a":9,"b":1}"#, "--to", r#"{"b":9}"#, "--cap-per-place", "9"],
    ),
    case("reach-bad-place", 65, &["reach", "--net", "toy-move", "--from", r#"{"z":1}"#, "--to", r#"{"b":1}"#]),
    case("reach-bad-json", 65, &["reach", "--net", "toy-move", "--from", "{", "--to", r#"{"b":1}"#]),
    case(
        "reach-small-caps",
        64,
        &["reach", "--net", "toy-move", "--from", r#"{"a":40}"#, "--to", r#"{"b":40}"#, "--cap-per-place", "5"],
    ),
    case("reach-bad-engine", 64, &["reach", "--net", "toy-move", "--from", "{}", "--to", "{}", "--engine", "magic"]),
    case("cover-paper", 0, &["cover", "--net", "paper-net-1", "--from", r#"{"p":6}"#, "--to", r#"{"r":1}"#]),
    case(
        "cover-reduction",
        0,
        &["cover", "--net", "paper-net-1", "--from", r#"{"p":6}"#, "--to", r#"{"r":1}"#, "--engine", "reduction"],
    ),
    case(
        "cover-cube",
        0,
        &["cover", "--net", "toy-move", "--from", r#"{"a":2,"b":1}"#, "--to", r#"{"b":4}"#, "--engine", "cube"],
    ),
    case(
        "cover-capped",
        2,
        &["cover", "--net", "paper-net-1", "--from", r#"{"p":6}"#, "--to", r#"{"p":7}"#, "--cap-per-place", "8"],
    ),
    case("cover-missing-to", 64, &["cover", "--net", "toy-move", "--from", "{}"]),
    case("min-len-paper", 0, &["min-len", "--net", "paper-net-1", "--from", r#"{"p":6}"#, "--to", r#"{"q":1,"r":1}"#]),
    case(
        "min-len-capped",
        2,
        &["min-len", "--net", "paper-net-1", "--from", r#"{"p":6}"#, "--to", r#"{"q":1,"r":1}"#, "--max-blocks", "2"],
    ),
    case("min-len-bad-marking", 65, &["min-len", "--net", "toy-move", "--from", "[1]", "--to", "{}"]),
    case(
        "cube-reach-true",
        0,
        &[
            "cube-reach",
            "--net",
            "toy-move",
            "--cube-from",
            r#"{"lower":{"a":1,"b":1},"upper":{"a":"inf","b":"inf"}}"#,
            "--cube-to",
            r#"{"lower":{"a":0},"upper":{"a":0}}"#,
        ],
    ),
    case(
        "cube-reach-unstable",
        2,
        &[
            "cube-reach",
            "--net",
            "toy-kill",
            "--cube-from",
            r#"{"lower":{"a":1,"b":1},"upper":{"a":3,"b":1}}"#,
            "--cube-to",
            r#"{"lower":{"b":1},"upper":{"a":0,"b":1}}"#,
            "--smoke-rep",
            "1",
        ],
    ),
    case("cube-reach-bad-cube", 65, &["cube-reach", "--net", "toy-move", "--cube-from", r#"{"lower":{"z":1}}"#, "--cube-to", "{}"]),
    case(
        "cube-cover-true",
        0,
        &[
            "cube-cover",
            "--net",
            "paper-net-1",
            "--cube-from",
            r#"{"lower":{"p":6},"upper":{"p":6,"q":0,"r":0}}"#,
            "--cube-to",
            r#"{"lower":{"q":1,"r":1},"upper":{"p":0,"q":1,"r":1}}"#,
        ],
    ),
    case(
        "cube-cover-false",
        0,
        &[
            "cube-cover",
            "--net",
            "toy-move",
            "--cube-from",
            r#"{"lower":{"a":1},"upper":{"a":"inf","b":0}}"#,
            "--cube-to",
            r#"{"lower":{"b":1},"upper":{"a":"inf","b":"inf"}}"#,
        ],
    ),
    case("cube-cover-no-args", 64, &["cube-cover", "--net", "toy-move"]),
    case("pre-star-point", 0, &["pre-star", "--net", "toy-kill", "--to", r#"{"b":1}"#]),
    case(
        "pre-star-cube",
        0,
        &["pre-star", "--net", "toy-move", "--cube-to", r#"{"lower":{"a":0,"b":2},"upper":{"a":0,"b":"inf"}}"#],
    ),
    case("pre-star-unstable", 2, &["pre-star", "--net", "toy-kill", "--to", r#"{"b":1}"#, "--smoke-rep", "1"]),
    case("pre-star-both", 64, &["pre-star", "--net", "toy-kill", "--to", "{}", "--cube-to", "{}"]),
    case("live-set-toy-loop", 0, &["live-set", "--net", "toy-loop"]),
    case("live-set-twin-loops", 0, &["live-set", "--net", "twin-loops"]),
    case("live-set-missing", 65, &["live-set", "--net", "missing.json"]),
    case("live-true", 0, &["live", "--net", "toy-loop", "--from", r#"{"a":3}"#]),
    case("live-false", 0, &["live", "--net", "toy-move", "--from", r#"{"a":1,"b":1}"#]),
    case("live-bad-flag", 64, &["live", "--net", "toy-move", "--from", "{}", "--tracked-cap", "x"]),
    case(
        "shorten-fig4",
        0,
        &[
            "shorten",
            "--net",
            "paper-net-1",
            "--history",
            "fixtures/fig4-history.json",
            "--decoration",
            "fixtures/fig4-decoration.json",
        ],
    ),
    case("shorten-default-decoration", 0, &["shorten", "--net", "paper-net-1", "--history", "fixtures/fig4-history.json"]),
    case("shorten-bad-history", 65, &["shorten", "--net", "paper-net-1", "--history", r#"{"bad":1}"#]),
    case(
        "validate-fig4",
        0,
        &[
            "validate-history",
            "--net",
            "paper-net-1",
            "--history",
            "fixtures/fig4-history.json",
            "--decoration",
            "fixtures/fig4-decoration.json",
        ],
    ),
    case("validate-missing-file", 65, &["validate-history", "--net", "paper-net-1", "--history", "fixtures/none.json"]),
    case("flatten-toy-move", 0, &["flatten", "--net", "toy-move"]),
    case(
        "flatten-pattern",
        0,
        &["flatten", "--net", "toy-move", "--k", "1", "--from", r#"{"a":2,"b":1}"#, "--to", r#"{"a":0,"b":3}"#],
    ),
    case(
        "flatten-pattern-capped",
        2,
        &["flatten", "--net", "toy-move", "--k", "1", "--from", r#"{"a":2}"#, "--to", r#"{"b":2}"#],
    ),
    case("flatten-not-io", 65, &["flatten", "--net", "paper-net-1"]),
    case("flatten-from-without-to", 64, &["flatten", "--net", "toy-move", "--from", "{}"]),
    case("oracle-diff-seed-1", 0, &["oracle-diff", "--seed", "1", "--n", "2", "--instances", "100"]),
    case("oracle-diff-empty", 0, &["oracle-diff", "--instances", "0"]),
    case("oracle-diff-broken-engine", 2, &["oracle-diff", "--family", "toy-kill", "--smoke-rep", "1", "--instances", "9"]),
    case("oracle-diff-zero-places", 64, &["oracle-diff", "--n", "0"]),
    case("bounds-paper", 0, &["bounds", "--net", "paper-net-1", "--m", "1", "--m-prime", "6"]),
    case("bounds-missing-m", 64, &["bounds", "--net", "paper-net-1", "--m-prime", "6"]),
    case("bounds-missing-net", 65, &["bounds", "--net", "nothing", "--m", "1", "--m-prime", "1"]),
    case("unknown-command", 64, &["frobnicate"]),
];

pub fn workspace_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").canonicalize().expect("workspace root")
}

pub fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

pub struct Run {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn run(bin: &Path, args: &[&str]) -> Run {
    let out = Command::new(bin)
        .current_dir(workspace_root())
        .arg("--fixtures")
        .arg("fixtures")
        .args(args)
        .output()
        .expect("binary runs");
    Run {
        code: out.status.code().expect("exited normally"),
        stdout: String::from_utf8(out.stdout).expect("utf-8 stdout"),
        stderr: String::from_utf8(out.stderr).expect("utf-8 stderr"),
    }
}

fn shell_quote(arg: &str) -> String {
    if arg.chars().all(|c| c.is_ascii_alphanumeric() || "-_./".contains(c)) {
        arg.to_string()
    } else {
        format!("'{arg}'")
    }
}

/// The transcript stored on disk for one run.
pub fn transcript(args: &[&str], run: &Run) -> String {
    let cmd: Vec<String> = args.iter().map(|a| shell_quote(a)).collect();
    format!(
        "$ bionet {}\nexit {}\n--- stdout\n{}--- stderr\n{}",
        cmd.join(" "),
        run.code,
        run.stdout,
        run.stderr
    )
}

/// Replays every witness a report carries; returns how many were checked.
pub fn replay_witnesses(report: &Value, fixtures_dir: &Path) -> Result<usize, String> {
    let Some(name) = report["net"].as_str() else { return Ok(0) };
    let net = match fs::read_to_string(fixtures_dir.join(format!("{name}.json"))) {
        Ok(text) => Net::parse(&text).map_err(|e| e.to_string())?,
        Err(_) => fixtures::by_name(name).ok_or(format!("unknown net {name}"))?,
    };
    let mut checked = 0;
    for key in ["witness", "pattern_witness", "sequence"] {
        let w = &report["result"][key];
        if !w["blocks"].is_array() {
            continue;
        }
        let from = ["from", "initial"]
            .iter()
            .find_map(|k| report["query"].get(*k))
            .ok_or(format!("{key} without a source marking"))?;
        let from = net.marking_from_json(from).map_err(|e| e.to_string())?;
        let seq = net.sequence_from_json(&w["blocks"]).map_err(|e| e.to_string())?;
        let end = net.apply_sequence(&from, &seq).map_err(|e| format!("{key} does not replay: {e}"))?;
        let claimed = net.marking_from_json(&w["reaches"]).map_err(|e| e.to_string())?;
        if end != claimed {
            return Err(format!("{key} ends in {end}, report claims {claimed}"));
        }
        if seq.accelerated_length() as u64 != w["accelerated_length"].as_u64().unwrap_or(u64::MAX) {
            return Err(format!("{key} length mismatch"));
        }
        checked += 1;
    }
    Ok(checked)
}

/// Outcome of checking every case against its golden transcript.
pub struct Summary {
    pub cases: usize,
    pub witnesses: usize,
    pub failures: Vec<String>,
}

pub fn check_all(bin: &Path) -> Summary {
    let update = std::env::var_os("BIONET_UPDATE_GOLDEN").is_some();
    let dir = golden_dir();
    let fixtures_dir = workspace_root().join("fixtures");
    let mut summary = Summary { cases: 0, witnesses: 0, failures: Vec::new() };
    for case in CASES {
        summary.cases += 1;
        let first = run(bin, case.args);
        let text = transcript(case.args, &first);
        let path = dir.join(format!("{}.txt", case.name));
        if first.code != case.exit {
            summary.failures.push(format!("{}: exit {} (expected {}): {}", case.name, first.code, case.exit, first.stderr.trim()));
        }
        let second = run(bin, case.args);
        if second.stdout != first.stdout || second.stderr != first.stderr || second.code != first.code {
            summary.failures.push(format!("{}: output differs between two runs", case.name));
        }
        if first.code == 0 || first.code == 2 {
            match serde_json::from_str::<Value>(&first.stdout) {
                Ok(report) => {
                    let again = serde_json::to_string_pretty(&report).expect("serializes") + "\n";
                    if again != first.stdout {
                        summary.failures.push(format!("{}: report does not round-trip byte for byte", case.name));
                    }
                    match replay_witnesses(&report, &fixtures_dir) {
                        Ok(k) => summary.witnesses += k,
                        Err(e) => summary.failures.push(format!("{}: {e}", case.name)),
                    }
                }
                Err(e) => summary.failures.push(format!("{}: stdout is not JSON: {e}", case.name)),
            }
        } else if !first.stdout.is_empty() {
            summary.failures.push(format!("{}: error exit with output on stdout", case.name));
        }
        if update {
            fs::create_dir_all(&dir).expect("golden dir");
            fs::write(&path, &text).expect("golden written");
            continue;
        }
        match fs::read_to_string(&path) {
            Ok(expected) if expected == text => {}
            Ok(_) => summary.failures.push(format!("{}: transcript differs from {}", case.name, path.display())),
            Err(_) => summary.failures.push(format!("{}: no golden file at {}", case.name, path.display())),
        }
    }
    summary
}
