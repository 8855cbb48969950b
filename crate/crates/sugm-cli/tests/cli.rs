use std::fs;
use std::io::BufReader;
use std::path::PathBuf;
use std::process::{Command, Output};

use sugm::expectation::read_matrix_csv;
use sugm::model::{ModelConfig, ProbabilityRule};
use sugm::sampler::read_edges_csv;
use sugm::sweep::{read_records, RecordStatus, RECORD_HEADER};

fn sugm_bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sugm"))
}

fn repo_config(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn run(args: &[&str]) -> Output {
    sugm_bin().args(args).output().expect("binary should spawn")
}

fn stdout_of(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).expect("stdout is utf-8")
}

#[test]
fn no_arguments_is_a_usage_error() {
    let output = run(&[]);
    assert_eq!(output.status.code(), Some(1));
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let output = run(&["sample", "--definitely-not-a-flag"]);
    assert_eq!(output.status.code(), Some(1));
}

#[test]
fn help_exits_zero_and_lists_subcommands() {
    let output = run(&["--help"]);
    assert_eq!(output.status.code(), Some(0));
    let text = stdout_of(&output);
    for subcommand in ["sample", "expect", "error", "sweep", "verify", "check"] {
        assert!(text.contains(subcommand), "help should mention {subcommand}");
    }
}

#[test]
fn sample_writes_a_parseable_edge_list_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let config = repo_config("uniform.json");
    let out = dir.path().join("edges.csv");
    let args = [
        "sample",
        "--config",
        config.to_str().unwrap(),
        "--n",
        "30",
        "--seed",
        "1",
        "--out",
        out.to_str().unwrap(),
    ];
    let output = run(&args);
    assert_eq!(output.status.code(), Some(0), "{output:?}");
    let first = fs::read(&out).unwrap();
    assert!(first.starts_with(b"i,j,weight"));
    let matrix = read_edges_csv(30, &mut BufReader::new(first.as_slice())).unwrap();
    assert!((0..30).any(|i| (0..30).any(|j| matrix.get(i, j) > 0.0)), "graph should be nonempty");

    let second_run = run(&args);
    assert_eq!(second_run.status.code(), Some(0));
    assert_eq!(fs::read(&out).unwrap(), first, "same seed must give the same bytes");
}

#[test]
fn expect_emits_both_matrices_with_count_dominating_indicator() {
    let dir = tempfile::tempdir().unwrap();
    let config = repo_config("uniform.json");
    let base = dir.path().join("expected");
    let output = run(&[
        "expect",
        "--config",
        config.to_str().unwrap(),
        "--n",
        "12",
        "--out",
        base.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(0), "{output:?}");
    let weighted_path = dir.path().join("expected.weighted.csv");
    let unweighted_path = dir.path().join("expected.unweighted.csv");
    let weighted =
        read_matrix_csv(&mut BufReader::new(fs::File::open(&weighted_path).unwrap())).unwrap();
    let unweighted =
        read_matrix_csv(&mut BufReader::new(fs::File::open(&unweighted_path).unwrap())).unwrap();
    assert_eq!(weighted.n(), 12);
    assert_eq!(unweighted.n(), 12);
    for i in 0..12 {
        for j in 0..12 {
            let w = weighted.get(i, j);
            let u = unweighted.get(i, j);
            assert!((0.0..=1.0).contains(&u), "probability entry ({i}, {j}) = {u}");
            assert!(w >= u - 1e-15, "expected count must dominate probability at ({i}, {j})");
        }
    }
}

#[test]
fn error_prints_one_record_per_variant() {
    let config = repo_config("uniform.json");
    let output = run(&[
        "error",
        "--config",
        config.to_str().unwrap(),
        "--n",
        "40",
        "--seed",
        "9",
    ]);
    assert_eq!(output.status.code(), Some(0), "{output:?}");
    let text = stdout_of(&output);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], RECORD_HEADER);
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("40,0,weighted,"));
    assert!(lines[2].starts_with("40,0,unweighted,"));
    let records = read_records(text.as_bytes()).unwrap();
    assert!(records.iter().all(|r| r.status == RecordStatus::Ok), "{records:?}");
}

#[test]
fn sweep_is_byte_identical_across_runs_and_emits_svg() {
    let dir = tempfile::tempdir().unwrap();
    let config = repo_config("uniform.json");
    let first_csv = dir.path().join("a.csv");
    let second_csv = dir.path().join("b.csv");
    let plot = dir.path().join("a.svg");
    let base_args = |csv: &PathBuf| {
        vec![
            "sweep".to_string(),
            "--config".into(),
            config.to_str().unwrap().into(),
            "--sizes".into(),
            "12,16".into(),
            "--trials".into(),
            "2".into(),
            "--seed".into(),
            "11".into(),
            "--out".into(),
            csv.to_str().unwrap().into(),
        ]
    };
    let mut first_args = base_args(&first_csv);
    first_args.push("--plot".into());
    first_args.push(plot.to_str().unwrap().into());
    let first = sugm_bin().args(&first_args).output().unwrap();
    assert_eq!(first.status.code(), Some(0), "{first:?}");
    let second = sugm_bin().args(&base_args(&second_csv)).output().unwrap();
    assert_eq!(second.status.code(), Some(0), "{second:?}");

    let first_bytes = fs::read(&first_csv).unwrap();
    assert_eq!(first_bytes, fs::read(&second_csv).unwrap(), "sweep must be reproducible");
    assert!(first_bytes.starts_with(RECORD_HEADER.as_bytes()));
    let records = read_records(first_bytes.as_slice()).unwrap();
    assert_eq!(records.len(), 2 * 2 * 2);

    let svg = fs::read_to_string(&plot).unwrap();
    assert!(svg.starts_with("<svg"));
    assert!(svg.trim_end().ends_with("</svg>"));
}

#[test]
fn verify_passes_on_a_random_model() {
    let output = run(&["verify", "--seed", "3"]);
    assert_eq!(output.status.code(), Some(0), "{output:?}");
    let text = stdout_of(&output);
    let check_lines: Vec<&str> = text.lines().filter(|l| l.contains("worst margin")).collect();
    assert_eq!(check_lines.len(), 13, "one line per check:\n{text}");
    assert!(check_lines.iter().all(|l| l.starts_with("pass")), "{text}");
}

#[test]
fn verify_rejects_oversized_models_with_capacity_exit_code() {
    // Links plus triangles at n = 7 is 56 placements, over the exact
    // enumeration cap.
    let config = repo_config("uniform.json");
    let output = run(&["verify", "--config", config.to_str().unwrap(), "--n", "7"]);
    assert_eq!(output.status.code(), Some(2), "{output:?}");
}

#[test]
fn check_passes_scaling_families_and_fails_broken_ones() {
    let config = repo_config("uniform.json");
    let good = run(&["check", "--config", config.to_str().unwrap(), "--n", "100"]);
    assert_eq!(good.status.code(), Some(0), "{good:?}");
    assert!(stdout_of(&good).contains("pass"));

    // Link exponent 1.5 sits outside the admissible window (0, 1).
    let dir = tempfile::tempdir().unwrap();
    let broken_path = dir.path().join("broken.json");
    let broken = ModelConfig::uniform_links_triangles((5.0, 1.5), (1.0, 1.4));
    fs::write(&broken_path, broken.to_json()).unwrap();
    let bad = run(&["check", "--config", broken_path.to_str().unwrap(), "--n", "100"]);
    assert_eq!(bad.status.code(), Some(3), "{bad:?}");
    assert!(stdout_of(&bad).contains("fail"));
}

#[test]
fn usage_errors_from_bad_grids_exit_one() {
    let config = repo_config("uniform.json");
    let unsorted = run(&[
        "sweep",
        "--config",
        config.to_str().unwrap(),
        "--sizes",
        "16,12",
        "--trials",
        "1",
    ]);
    assert_eq!(unsorted.status.code(), Some(1), "{unsorted:?}");

    let bad_epsilon = run(&[
        "error",
        "--config",
        config.to_str().unwrap(),
        "--n",
        "20",
        "--epsilon",
        "2.0",
    ]);
    assert_eq!(bad_epsilon.status.code(), Some(1), "{bad_epsilon:?}");

    let bad_alpha = run(&[
        "error",
        "--config",
        config.to_str().unwrap(),
        "--n",
        "20",
        "--alpha",
        "-0.5",
    ]);
    assert_eq!(bad_alpha.status.code(), Some(1), "{bad_alpha:?}");
}

#[test]
fn repo_configs_match_their_preset_constructors() {
    let uniform = ModelConfig::load(repo_config("uniform.json")).unwrap();
    assert_eq!(uniform, ModelConfig::uniform_links_triangles((5.0, 0.65), (1.0, 1.4)));

    // The preset derives the second community share as 1 - 0.7, which is
    // not exactly the literal 0.3 stored in the JSON; compare fields.
    let block = ModelConfig::load(repo_config("block.json")).unwrap();
    let preset = ModelConfig::two_block_links_triangles(0.7, 7.0, 2.0, 0.8, 1.0, 0.1, 1.5);
    assert_eq!(block.types.len(), preset.types.len());
    for (got, want) in block.types.iter().zip(&preset.types) {
        assert_eq!(got.name, want.name);
        assert_eq!(got.size, want.size);
        assert_eq!(got.edges, want.edges);
        match (&got.rule, &want.rule) {
            (
                ProbabilityRule::Block { split: s1, within: w1, across: a1, exponent: e1 },
                ProbabilityRule::Block { split: s2, within: w2, across: a2, exponent: e2 },
            ) => {
                assert_eq!((w1, a1, e1), (w2, a2, e2));
                assert_eq!(s1.len(), s2.len());
                for (x, y) in s1.iter().zip(s2) {
                    assert!((x - y).abs() < 1e-12);
                }
            }
            other => panic!("expected block rules, got {other:?}"),
        }
    }

    let distance = ModelConfig::load(repo_config("distance.json")).unwrap();
    assert_eq!(distance, ModelConfig::distance_links_triangles(0.03, 0.00005, 0.0001));
}
