use std::path::PathBuf;
use std::process::Command;

use cadorder::cli::{run, Cli};
use clap::CommandFactory;
use sha2::{Digest, Sha256};

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name).to_string_lossy().into_owned()
}

fn call(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("cadorder").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

const S3: [&str; 4] = ["--poly", "x1*x2*x3 - 1", "--poly", "x1^2 - x2^2*x3"];

#[test]
fn choose_worked_example() {
    let mut args = vec!["choose", "--heuristic", "gmods", "--seed", "7"];
    args.extend(S3);
    let (code, out, _) = call(&args);
    assert_eq!(code, 0);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("x3 > x2 > x1"));
    assert_eq!(lines.next(), Some("class 6"));
}

#[test]
fn choose_with_custom_names_and_problem_file() {
    let (code, out, _) = call(&[
        "choose",
        "--heuristic",
        "Brown",
        "--vars",
        "x,y",
        "--poly",
        "x^5 + 5*x^4 + 5*x^3 - 5*x^2 - 6*x - 2*y",
    ]);
    assert_eq!(code, 0);
    assert!(out.starts_with("y > x\n"));
    let problems = fixture("hand_problems.jsonl");
    let (code, out, _) = call(&["choose", "--heuristic", "mods", "--problems", &problems, "--id", "p2"]);
    assert_eq!(code, 0);
    assert!(out.starts_with("x1 > x2 > x3\nclass 1\n"), "{out}");
}

#[test]
fn project_prints_basis_and_raw() {
    let mut args = vec!["project", "--var", "x3"];
    args.extend(S3);
    assert_eq!(call(&args).1, "x1^3 - x2\nx1\nx2\n");
    args.push("--raw");
    assert_eq!(call(&args).1, "x1*x2\n-1\n-x2^2\nx1^2\nx1^3*x2 - x2^2\n");
}

#[test]
fn features_vector_and_list() {
    let mut args = vec!["features"];
    args.extend(S3);
    let (code, out, _) = call(&args);
    assert_eq!(code, 0);
    assert_eq!(out.lines().count(), 82);
    assert!(out.contains("sum(max(v_3(S))),2\n"));
    let (_, list, _) = call(&["features", "--list", "--poly", "x1"]);
    assert_eq!(list.lines().count(), 81);
}

#[test]
fn rank_top_six() {
    let shap = fixture("reference_shap.csv");
    let (code, out, _) = call(&["rank", "--shap", &shap, "--vote", "dowdall", "--top", "6"]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().next(), Some("sum(max(v_i(S)))"));
    assert_eq!(out.lines().count(), 6);
    let (code, _, err) = call(&["rank", "--shap", &shap, "--top", "19"]);
    assert_eq!(code, 1);
    assert!(err.contains("top 19"));
}

#[test]
fn rank_writes_stage_files() {
    let dir = tempfile::tempdir().unwrap();
    let shap = fixture("shap_three_models.csv");
    let out_dir = dir.path().join("stages");
    let (code, out, _) =
        call(&["rank", "--shap", &shap, "--vote", "borda", "--out-dir", out_dir.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(out.starts_with("feature,score,score_decimal\n"));
    for f in ["raw.csv", "variable_merged.csv", "proportional.csv", "voted_borda.csv"] {
        assert!(out_dir.join(f).exists(), "{f}");
    }
    let raw = std::fs::read_to_string(out_dir.join("raw.csv")).unwrap();
    assert_eq!(raw.lines().count(), 1 + 3 * 81);
}

#[test]
fn evaluate_and_survival() {
    let problems = fixture("hand_problems.jsonl");
    let timings = fixture("hand_timings.csv");
    let (code, out, _) = call(&[
        "evaluate",
        "--problems",
        &problems,
        "--timings",
        &timings,
        "--heuristic",
        "Brown",
        "--heuristic",
        "virtual-best",
        "--format",
        "csv",
    ]);
    assert_eq!(code, 0);
    assert_eq!(
        out,
        "Name,Accuracy,Total time,Markup,Completed\nBrown,50.00,121.5,29.750,1.0\nvirtual-best,100.00,2.5,0.000,2.0\n"
    );
    let (code, out, _) =
        call(&["survival", "--problems", &problems, "--timings", &timings, "--heuristic", "virtual-best"]);
    assert_eq!(code, 0);
    assert_eq!(out, "heuristic,time,completed\nvirtual-best,1,1\nvirtual-best,1.5,2\n");
}

#[test]
fn triples_leaderboard() {
    let problems = fixture("hand_problems.jsonl");
    let timings = fixture("hand_timings.csv");
    let shap = fixture("reference_shap.csv");
    let (code, out, err) = call(&[
        "triples",
        "--problems",
        &problems,
        "--timings",
        &timings,
        "--shap",
        &shap,
        "--format",
        "csv",
    ]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(out.lines().count(), 121);
    let (code, _, _) = call(&[
        "triples",
        "--problems",
        &problems,
        "--timings",
        &timings,
        "--top-features",
        "SumMaxV,AvgAvgV",
    ]);
    assert_eq!(code, 1);
}

#[test]
fn input_errors_exit_one() {
    let (code, _, err) = call(&["evaluate", "--problems", "missing.jsonl", "--timings", "missing.csv"]);
    assert_eq!(code, 1);
    assert!(err.contains("missing.jsonl"));
    assert_eq!(call(&["choose", "--heuristic", "NotAFeature", "--poly", "x1"]).0, 1);
    assert_eq!(call(&["choose", "--poly", "x1 +"]).0, 1);
    assert_eq!(call(&["project", "--var", "y", "--poly", "x1"]).0, 1);
    assert_eq!(call(&["frobnicate"]).0, 1);
    assert_eq!(call(&["choose", "--no-such-flag"]).0, 1);
}

#[test]
fn help_exits_zero() {
    let (code, out, _) = call(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("evaluate"));
    let (code, out, _) = call(&["evaluate", "--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("--penalty-factor") && out.contains("[default: 2]"));
}

#[test]
fn every_argument_is_documented() {
    let mut cmd = Cli::command();
    cmd.build();
    fn walk(cmd: &clap::Command, path: &str) {
        for arg in cmd.get_arguments() {
            let id = arg.get_id().as_str();
            if id == "help" || id == "version" {
                continue;
            }
            assert!(arg.get_help().is_some(), "{path} --{id} has no help text");
        }
        for sub in cmd.get_subcommands() {
            assert!(sub.get_about().is_some(), "{path} {} has no description", sub.get_name());
            walk(sub, &format!("{path} {}", sub.get_name()));
        }
    }
    walk(&cmd, "cadorder");
}

fn digest(args: &[&str]) -> String {
    let out = Command::new(env!("CARGO_BIN_EXE_cadorder")).args(args).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    format!("{:x}", Sha256::digest(&out.stdout))
}

#[test]
fn binary_output_is_reproducible() {
    let problems = fixture("hand_problems.jsonl");
    let timings = fixture("hand_timings.csv");
    let args = [
        "evaluate",
        "--problems",
        &problems,
        "--timings",
        &timings,
        "--heuristic",
        "random",
        "--heuristic",
        "gmods",
        "--reps",
        "200",
        "--seed",
        "5",
    ];
    assert_eq!(digest(&args), digest(&args));
    let out =
        Command::new(env!("CARGO_BIN_EXE_cadorder")).args(["choose", "--poly", "x1 +"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}
