//! End-to-end command-line flows that touch the filesystem: scenario configs
//! in, reports and sample CSVs out, and the full verification battery.

use cct::cli::dispatch;
use cct::icebergsim::{SimConfig, SimReport};

fn run(args: &[&str]) -> (i32, String, String) {
    let args: Vec<String> = args.iter().map(ToString::to_string).collect();
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = dispatch(&args, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn scratch_dir(tag: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("cct-test-{tag}-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn simulate_reads_config_and_writes_report() {
    let dir = scratch_dir("simulate");
    let config_path = dir.join("scenario.json");
    let report_path = dir.join("report.json");
    let csv_path = dir.join("samples.csv");
    let config_text = r#"{
        "n": 2,
        "c": 2,
        "theta": 0.25,
        "p0": 0.2,
        "routers": [
            { "preset": "uniform" },
            { "preset": "extremal", "j": 1, "timer_k": 9 }
        ],
        "horizon": 20000,
        "seed": 31337,
        "global_threshold": 0.9
    }"#;
    std::fs::write(&config_path, config_text).unwrap();

    let (code, stdout, stderr) = run(&[
        "simulate",
        "--config",
        config_path.to_str().unwrap(),
        "--out",
        report_path.to_str().unwrap(),
        "--samples-csv",
        csv_path.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "stderr: {stderr}");
    assert!(stdout.is_empty(), "report goes to --out, not stdout");

    // The emitted report re-parses to an equal value.
    let text = std::fs::read_to_string(&report_path).unwrap();
    let report = SimReport::from_json(&text).unwrap();
    assert_eq!(report.to_json(), text.trim_end());
    assert_eq!(
        report.message_count,
        report
            .inter_flush_samples
            .iter()
            .map(Vec::len)
            .sum::<usize>() as u64
    );

    // So does the config itself.
    let config = SimConfig::from_json(config_text).unwrap();
    assert_eq!(SimConfig::from_json(&config.to_json()).unwrap(), config);

    // Samples CSV has one row per completed cycle.
    let csv = std::fs::read_to_string(&csv_path).unwrap();
    assert_eq!(csv.lines().count() - 1, report.message_count as usize);

    // Identical invocation replays identically.
    let (code, _, _) = run(&[
        "simulate",
        "--config",
        config_path.to_str().unwrap(),
        "--out",
        report_path.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let replay = std::fs::read_to_string(&report_path).unwrap();
    assert_eq!(replay.trim_end(), report.to_json());

    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn simulate_rejects_bad_config_with_domain_exit() {
    let dir = scratch_dir("badconfig");
    let config_path = dir.join("scenario.json");
    std::fs::write(&config_path, r#"{ "n": 2, "c": 5 }"#).unwrap();
    let (code, _, stderr) = run(&["simulate", "--config", config_path.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(stderr.contains("invalid simulation config"));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn verify_battery_passes_with_default_seed() {
    let (code, stdout, stderr) = run(&["verify"]);
    assert_eq!(code, 0, "stderr: {stderr}");
    assert_eq!(stdout.matches("PASS").count(), 5);
    assert!(!stdout.contains("FAIL"));

    // Seed override is honored and reported in JSON form.
    let (code, stdout, _) = run(&["verify", "--seed", "0xBEEF", "--format", "json"]);
    assert_eq!(code, 0);
    let parsed: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(parsed["seed"], 0xBEEF);
    assert_eq!(parsed["passed"], true);
}

#[test]
fn mc_and_exact_methods_agree_on_the_cli() {
    let (code, exact_out, _) = run(&["dist", "--p", "0.5,0.5", "--c", "2", "--kmax", "3"]);
    assert_eq!(code, 0);
    let (code, mc_out, _) = run(&[
        "dist",
        "--p",
        "0.5,0.5",
        "--c",
        "2",
        "--kmax",
        "3",
        "--method",
        "mc",
        "--replicates",
        "200000",
        "--seed",
        "5",
    ]);
    assert_eq!(code, 0);
    // Exact value at k = 3 sits inside the Monte-Carlo interval.
    let exact: f64 = exact_out
        .lines()
        .nth(4)
        .unwrap()
        .split(',')
        .nth(1)
        .unwrap()
        .parse()
        .unwrap();
    let mc_fields: Vec<f64> = mc_out
        .lines()
        .nth(4)
        .unwrap()
        .split(',')
        .take(4)
        .map(|f| f.parse().unwrap())
        .collect();
    assert!((exact - 0.25).abs() < 1e-12);
    assert!(mc_fields[2] <= exact && exact <= mc_fields[3]);
}
