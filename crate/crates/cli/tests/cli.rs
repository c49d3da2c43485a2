use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use sparc_cli::bundle::{catalog_text, json_text, network_text, profile_text, Manifest};
use sparc_cli::inspect::{load, Loaded};
use sparc_cli::pipeline::{run_pipeline, Overrides, PipelineConfig};
use tempfile::TempDir;

fn toy() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/toy")
}

fn tool(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sparc-tool"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn run_toy(dir: &Path) -> Output {
    let config = toy().join("config.toml");
    tool(&[
        "run",
        "--config",
        config.to_str().unwrap(),
        "--output-dir",
        dir.to_str().unwrap(),
    ])
}

fn bundle_files(dir: &Path) -> Vec<PathBuf> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    files.sort();
    files
}

#[test]
fn toy_run_completes_with_every_report() {
    let out = TempDir::new().unwrap();
    let o = run_toy(out.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let names: Vec<String> = bundle_files(out.path())
        .iter()
        .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
        .collect();
    for expected in [
        "MANIFEST",
        "stats.json",
        "derivability_toy_p.tsv",
        "derivability_toy_p_f.tsv",
        "derivability_toy_p_random.tsv",
        "ce_profile.tsv",
        "sparc.tsv",
        "predicted.tsv",
        "eval_toy_sparc.json",
        "pairs_toy_sparc.tsv",
        "correlation.json",
        "consensus.tsv",
        "eval_toy_consensus.json",
    ] {
        assert!(
            names.iter().any(|n| n == expected),
            "missing {expected}: {names:?}"
        );
    }
    let (_, manifest) =
        Manifest::parse(&fs::read_to_string(out.path().join("MANIFEST")).unwrap()).unwrap();
    assert!(manifest.complete);
    assert_eq!(manifest.entries.len() + 1, names.len());
}

#[test]
fn missing_functional_network_names_the_stage() {
    let dir = TempDir::new().unwrap();
    let text = fs::read_to_string(toy().join("config.toml"))
        .unwrap()
        .replace("functional.tsv", "no_such_file.tsv");
    let config = dir.path().join("config.toml");
    fs::write(&config, text).unwrap();
    for name in ["physical.tsv", "benchmarks.tsv", "clusters.tsv"] {
        fs::copy(toy().join(name), dir.path().join(name)).unwrap();
    }
    let o = tool(&["run", "--config", config.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(
        stderr(&o).contains("stage `load-functional` failed"),
        "{}",
        stderr(&o)
    );

    let (_, manifest) =
        Manifest::parse(&fs::read_to_string(dir.path().join("out/MANIFEST")).unwrap()).unwrap();
    assert!(!manifest.complete);
    assert_eq!(manifest.failed_stage.as_deref(), Some("load-functional"));
}

#[test]
fn late_failure_keeps_partial_outputs() {
    let dir = TempDir::new().unwrap();
    let mut config = PipelineConfig::load(&toy().join("config.toml")).unwrap();
    config.apply(&Overrides {
        output_dir: Some(dir.path().to_path_buf()),
        ..Overrides::default()
    });
    config.scored[2].network = dir.path().join("missing.tsv");
    let err = run_pipeline(&config).unwrap_err();
    assert_eq!(err.stage, "consensus");
    let (_, manifest) =
        Manifest::parse(&fs::read_to_string(dir.path().join("MANIFEST")).unwrap()).unwrap();
    assert!(!manifest.complete);
    assert!(manifest.entries.iter().any(|e| e.file == "sparc.tsv"));
    assert!(dir.path().join("sparc.tsv").exists());
}

#[test]
fn identical_runs_are_byte_identical() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    assert!(run_toy(a.path()).status.success());
    assert!(run_toy(b.path()).status.success());
    let (fa, fb) = (bundle_files(a.path()), bundle_files(b.path()));
    assert_eq!(fa.len(), fb.len());
    for (x, y) in fa.iter().zip(&fb) {
        assert_eq!(x.file_name(), y.file_name());
        assert_eq!(
            fs::read(x).unwrap(),
            fs::read(y).unwrap(),
            "{}",
            x.display()
        );
    }
}

#[test]
fn seed_override_changes_only_seeded_content() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    assert!(run_toy(a.path()).status.success());
    let config = toy().join("config.toml");
    let o = tool(&[
        "run",
        "--config",
        config.to_str().unwrap(),
        "--output-dir",
        b.path().to_str().unwrap(),
        "--seed",
        "7",
    ]);
    assert!(o.status.success());
    let text = fs::read_to_string(b.path().join("stats.json")).unwrap();
    assert!(text.contains("\"seed\": 7"));
    assert_ne!(
        text,
        fs::read_to_string(a.path().join("stats.json")).unwrap()
    );
}

#[test]
fn inspect_summarises_each_report() {
    let out = TempDir::new().unwrap();
    assert!(run_toy(out.path()).status.success());
    for file in bundle_files(out.path()) {
        let o = tool(&["inspect", file.to_str().unwrap()]);
        assert!(o.status.success(), "{}: {}", file.display(), stderr(&o));
        assert!(!stdout(&o).is_empty());
    }
    let d = stdout(&tool(&[
        "inspect",
        out.path().join("derivability_toy_p.tsv").to_str().unwrap(),
    ]));
    assert!(d.contains("|D_P|: ") && d.contains("|D_N|: ") && d.contains("CE histogram"));
    let e = stdout(&tool(&[
        "inspect",
        out.path().join("eval_toy_sparc.json").to_str().unwrap(),
    ]));
    assert!(e.contains("Pr: ") && e.contains("Rc: "));
}

#[test]
fn truncated_reports_fail_with_a_byte_offset() {
    let out = TempDir::new().unwrap();
    assert!(run_toy(out.path()).status.success());
    for file in bundle_files(out.path()) {
        let text = fs::read(&file).unwrap();
        let cut = out.path().join("cut");
        fs::write(&cut, &text[..text.len() - 7]).unwrap();
        let o = tool(&["inspect", cut.to_str().unwrap()]);
        assert!(
            !o.status.success(),
            "{} accepted after truncation",
            file.display()
        );
        assert!(
            stderr(&o).contains("byte offset"),
            "{}: {}",
            file.display(),
            stderr(&o)
        );
    }
}

#[test]
fn unrecognised_file_is_a_parse_error() {
    let o = tool(&["inspect", toy().join("physical.tsv").to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("unrecognised"));
}

fn body(text: &str) -> Vec<&str> {
    text.lines().filter(|l| !l.starts_with('#')).collect()
}

#[test]
fn every_emitted_file_round_trips() {
    let out = TempDir::new().unwrap();
    assert!(run_toy(out.path()).status.success());
    for file in bundle_files(out.path()) {
        let text = fs::read_to_string(&file).unwrap();
        let again = match load(&text).unwrap() {
            Loaded::Derivability(h, r) => {
                let mut v = Vec::new();
                r.write_tsv(&h, &mut v).unwrap();
                String::from_utf8(v).unwrap()
            }
            Loaded::Sparc(h, r) => {
                let mut v = Vec::new();
                r.write_tsv(&h, &mut v).unwrap();
                String::from_utf8(v).unwrap()
            }
            Loaded::Eval(h, r) => r.to_json(&h),
            Loaded::Pairs(h, pairs) => {
                let mut v = Vec::new();
                // pairs are re-emitted through an eval report carrying them
                let report = sparc_core::benchmatch::EvalReport {
                    config: Default::default(),
                    benchmark_count: 0,
                    predicted_count: 0,
                    matched_count: 0,
                    derivable_count: 0,
                    derived_count: 0,
                    precision: 0.0,
                    recall: 0.0,
                    pair_matches: pairs,
                    best_matches: Vec::new(),
                };
                report.write_pairs_tsv(&h, &mut v).unwrap();
                String::from_utf8(v).unwrap()
            }
            Loaded::Profile(h, rows) => {
                let k = text
                    .lines()
                    .find_map(|l| l.strip_prefix("# k: "))
                    .unwrap()
                    .parse()
                    .unwrap();
                profile_text(&rows, k, &h)
            }
            Loaded::Manifest(h, m) => m.to_text(&h),
            Loaded::Stats(doc) => json_text(&doc),
            Loaded::Correlation(doc) => json_text(&doc),
            Loaded::Catalog(set) => {
                let h = sparc_core::report::ReportHeader::new("", "", "", None);
                let rewritten = catalog_text(&set, &h);
                assert_eq!(body(&rewritten), body(&text), "{}", file.display());
                continue;
            }
            Loaded::Network(g) => {
                let h = sparc_core::report::ReportHeader::new("", "", "", None);
                let rewritten = network_text(&g, &h, &[]);
                assert_eq!(body(&rewritten), body(&text), "{}", file.display());
                assert!(matches!(load(&rewritten).unwrap(), Loaded::Network(x) if x == g));
                continue;
            }
        };
        assert_eq!(again, text, "{}", file.display());
    }
}

#[test]
fn subcommands_work_on_the_toy_files() {
    let dir = TempDir::new().unwrap();
    let t = |name: &str| toy().join(name).to_string_lossy().into_owned();
    let o = |name: &str| dir.path().join(name).to_string_lossy().into_owned();

    let r = tool(&["stats", "--network", &t("physical.tsv")]);
    assert!(r.status.success());
    assert!(stdout(&r).contains("\"protein_count\": 27"));

    let r = tool(&[
        "merge",
        "--physical",
        &t("physical.tsv"),
        "--functional",
        &t("functional.tsv"),
        "--out",
        &o("pf.tsv"),
    ]);
    assert!(r.status.success(), "{}", stderr(&r));
    let r = tool(&[
        "random-net",
        "--nodes-from",
        &t("functional.tsv"),
        "--seed",
        "3",
        "--out",
        &o("rand.tsv"),
    ]);
    assert!(r.status.success(), "{}", stderr(&r));
    assert!(tool(&["inspect", &o("rand.tsv")]).status.success());

    let r = tool(&[
        "derivability",
        "--network",
        &t("physical.tsv"),
        "--benchmarks",
        &t("benchmarks.tsv"),
        "--out",
        &o("d.tsv"),
    ]);
    assert!(r.status.success(), "{}", stderr(&r));
    assert!(stdout(&r).contains("|D_P|: 4"));
    let r = tool(&[
        "ce-profile",
        "--network",
        &t("physical.tsv"),
        "--benchmarks",
        &t("benchmarks.tsv"),
    ]);
    assert!(r.status.success());
    assert_eq!(
        stdout(&r).lines().filter(|l| !l.starts_with('#')).count(),
        12
    );

    let r = tool(&[
        "mcl",
        "--network",
        &t("physical.tsv"),
        "--inflation",
        "2.5",
        "--out",
        &o("mcl.tsv"),
    ]);
    assert!(r.status.success(), "{}", stderr(&r));

    let r = tool(&[
        "sparc",
        "--clusters",
        &t("clusters.tsv"),
        "--physical",
        &t("physical.tsv"),
        "--functional",
        &t("functional.tsv"),
        "--delta",
        "0.40",
        "--max-growth",
        "20",
        "--seedless",
        "--out",
        &o("sparc.tsv"),
        "--catalog",
        &o("pred.tsv"),
    ]);
    assert!(r.status.success(), "{}", stderr(&r));
    assert!(fs::read_to_string(o("sparc.tsv"))
        .unwrap()
        .contains("# seed: none"));

    let r = tool(&[
        "evaluate",
        "--benchmarks",
        &t("benchmarks.tsv"),
        "--predictions",
        &o("pred.tsv"),
        "--network",
        &t("physical.tsv"),
        "--jmin",
        "0.50",
        "--k",
        "4",
        "--out",
        &o("eval.json"),
        "--pairs",
        &o("pairs.tsv"),
    ]);
    assert!(r.status.success(), "{}", stderr(&r));
    let r = tool(&[
        "correlate",
        "--derivability",
        &o("d.tsv"),
        "--eval",
        &o("eval.json"),
        "--score",
        "es",
    ]);
    assert!(r.status.success(), "{}", stderr(&r));
    assert!(stdout(&r).contains("pearson r"));

    let r = tool(&[
        "consensus",
        "--in",
        &o("pred.tsv"),
        "--in",
        &o("pred.tsv"),
        "--in",
        &o("pred.tsv"),
        "--pair-min",
        "0.70",
        "--out",
        &o("cons.tsv"),
    ]);
    assert!(r.status.success(), "{}", stderr(&r));
    let r = tool(&[
        "consensus",
        "--in",
        &o("pred.tsv"),
        "--in",
        &o("pred.tsv"),
        "--out",
        &o("cons2.tsv"),
    ]);
    assert!(!r.status.success());
}

#[test]
fn bad_edge_list_reports_the_line() {
    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("bad.tsv");
    fs::write(&bad, "A\tB\t0.5\nA\tC\t1.5\n").unwrap();
    let r = tool(&["stats", "--network", bad.to_str().unwrap()]);
    assert!(!r.status.success());
    assert!(stderr(&r).contains("line 2"), "{}", stderr(&r));
}
