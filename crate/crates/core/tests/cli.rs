//! Exit-code contract and output-format checks for the command-line
//! binary: 0 success, 1 protocol-level abort (reason string printed
//! verbatim), 2 invalid input, 3 verification failure.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::json;

use sqrng::attack::{CollectiveAttack, GeneralAttack};
use sqrng::bits::BitString;
use sqrng::postprocess::from_output_format;
use sqrng::toeplitz_hash;

fn bin(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sqrng"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn success_paths_exit_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin(
        &[
            "simulate", "--rounds", "1000", "--tests", "100", "--q", "0", "--seed", "7", "--out",
            "t.json",
        ],
        dir.path(),
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    // A noiseless run reports a clean conditional distribution.
    assert!(stdout(&out).contains("P(+|acc) = 1.0"), "{}", stdout(&out));
    assert!(dir.path().join("t.json").exists());
    assert!(dir.path().join("t.json.manifest.json").exists());

    let out = bin(&["rate", "--q", "0.1"], dir.path());
    assert_eq!(code(&out), 0);
    assert!(
        stdout(&out).contains("bound = 0.5310044064107189"),
        "{}",
        stdout(&out)
    );

    // The transcript written above doubles as a statistics source.
    let out = bin(&["rate", "--stats", "t.json"], dir.path());
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("abort = false"));
}

#[test]
fn rate_abort_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin(&["rate", "--q", "0.5"], dir.path());
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).contains("bound = 0.0"));
    assert!(stdout(&out).contains("abort = true"));
}

#[test]
fn invalid_inputs_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    // Domain violation caught by the library.
    let out = bin(
        &["simulate", "--rounds", "0", "--tests", "0", "--q", "0"],
        dir.path(),
    );
    assert_eq!(code(&out), 2);

    // Flag conflict caught by the parser.
    let out = bin(&["rate", "--q", "0.1", "--stats", "x.json"], dir.path());
    assert_eq!(code(&out), 2);

    // Unknown flag.
    let out = bin(&["rate", "--q", "0.1", "--bogus"], dir.path());
    assert_eq!(code(&out), 2);

    // Q outside [0, 0.5].
    let out = bin(&["rate", "--q", "0.7"], dir.path());
    assert_eq!(code(&out), 2);

    // Malformed transcript.
    std::fs::write(dir.path().join("bad.json"), "{\"nope\": 1}").unwrap();
    let out = bin(
        &["extract", "--transcript", "bad.json", "--out", "x.txt"],
        dir.path(),
    );
    assert_eq!(code(&out), 2);
}

fn simulate_transcript(dir: &Path, rounds: u32, tests: u32, q: f64, name: &str) {
    let out = bin(
        &[
            "simulate",
            "--rounds",
            &rounds.to_string(),
            "--tests",
            &tests.to_string(),
            "--q",
            &q.to_string(),
            "--seed",
            "5",
            "--out",
            name,
        ],
        dir,
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn extract_abort_reasons_are_verbatim() {
    let dir = tempfile::tempdir().unwrap();

    // Saturated noise: the bound dies and extraction refuses.
    simulate_transcript(dir.path(), 2000, 500, 0.5, "noisy.json");
    let out = bin(
        &[
            "extract",
            "--transcript",
            "noisy.json",
            "--margin",
            "0.05",
            "--out",
            "x.txt",
        ],
        dir.path(),
    );
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).lines().any(|l| l == "noise-too-high"));
    assert!(!dir.path().join("x.txt").exists());

    // No reflected rounds at all: statistics cannot be formed.
    simulate_transcript(dir.path(), 500, 0, 0.0, "untested.json");
    let out = bin(
        &["extract", "--transcript", "untested.json", "--out", "y.txt"],
        dir.path(),
    );
    assert_eq!(code(&out), 1);
    assert!(stdout(&out)
        .lines()
        .any(|l| l == "insufficient-test-rounds"));

    // Statistics that claim a coherence no physical state allows.
    simulate_transcript(dir.path(), 400, 100, 0.0, "base.json");
    let text = std::fs::read_to_string(dir.path().join("base.json")).unwrap();
    let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
    v["stats"] = json!({
        "p_ac": [[0.5, 0.0], [0.0, 0.5]],
        "p_plus_acc": 1.0,
        "p_minus_acc": 0.0,
        "slack": 1e-9,
    });
    std::fs::write(dir.path().join("tampered.json"), v.to_string()).unwrap();
    let out = bin(
        &["extract", "--transcript", "tampered.json", "--out", "z.txt"],
        dir.path(),
    );
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).lines().any(|l| l == "inconsistent-statistics"));
}

/// A transcript whose measure rounds are exactly balanced over the four
/// (bit, message) cells and whose reflected rounds all came back "+".
/// Its statistics are the ideal noiseless ones, so the bound is exactly
/// 1 and extraction at margin 0 keeps every raw bit.
fn balanced_transcript() -> String {
    json!({
        "config": {
            "n_rounds": 8,
            "n_test": 4,
            "channel": {"q": 0.0, "mode": "dependent"},
            "rng_seed": 0,
        },
        "rounds": null,
        "raw_len": 4,
        "raw_hex": "a0",
        "stats": {
            "p_ac": [[0.25, 0.25], [0.25, 0.25]],
            "p_plus_acc": 1.0,
            "p_minus_acc": 0.0,
        },
        "missing_stats": [],
        "seed_cost_bits": 0.0,
    })
    .to_string()
}

#[test]
fn ideal_noiseless_transcript_keeps_every_raw_bit() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("ideal.json"), balanced_transcript()).unwrap();
    let out = bin(
        &[
            "extract",
            "--transcript",
            "ideal.json",
            "--margin",
            "0",
            "--seed",
            "3",
            "--out",
            "bits.txt",
        ],
        dir.path(),
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).contains("ell = 4"));
    let written =
        from_output_format(&std::fs::read_to_string(dir.path().join("bits.txt")).unwrap()).unwrap();
    assert_eq!(written.len(), 4);
    assert!(dir.path().join("bits.txt.seed").exists());
}

#[test]
fn explicit_hash_seed_is_used_and_no_seed_file_written() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("ideal.json"), balanced_transcript()).unwrap();
    // ell = 4 needs a 7-bit seed; 0xee keeps the canonical zero pad.
    std::fs::write(dir.path().join("seed.txt"), "ell=7\nee\n").unwrap();
    let out = bin(
        &[
            "extract",
            "--transcript",
            "ideal.json",
            "--margin",
            "0",
            "--hash-seed",
            "seed.txt",
            "--out",
            "bits.txt",
        ],
        dir.path(),
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(!dir.path().join("bits.txt.seed").exists());

    let written =
        from_output_format(&std::fs::read_to_string(dir.path().join("bits.txt")).unwrap()).unwrap();
    let raw = BitString::from_hex("a0", 4).unwrap();
    let seed = BitString::from_hex("ee", 7).unwrap();
    assert_eq!(written, toeplitz_hash(&raw, &seed, 4).unwrap());

    // A wrong-length explicit seed is a structural error, not an abort.
    std::fs::write(dir.path().join("short.txt"), "ell=3\ne0\n").unwrap();
    let out = bin(
        &[
            "extract",
            "--transcript",
            "ideal.json",
            "--margin",
            "0",
            "--hash-seed",
            "short.txt",
            "--out",
            "bits.txt",
        ],
        dir.path(),
    );
    assert_eq!(code(&out), 2);
}

fn honest_two_round_attack_json() -> String {
    let single = CollectiveAttack::honest_noiseless().to_general().unwrap();
    GeneralAttack::product_power(&single, 2)
        .unwrap()
        .to_json()
        .unwrap()
}

#[test]
fn attack_file_reports_accept_probability() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("honest.json"),
        honest_two_round_attack_json(),
    )
    .unwrap();
    let out = bin(
        &[
            "verify-reduction",
            "--attack-file",
            "honest.json",
            "--theta",
            "01",
            "--out",
            "report.json",
        ],
        dir.path(),
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    // One reflected round: acceptance must come out at 1/2.
    assert!(text.contains("accept probability = 0.5"), "{text}");
    assert!(text.contains("expected accept = 0.5"), "{text}");
    assert!(text.contains("all passed = true"), "{text}");

    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap())
            .unwrap();
    assert_eq!(report["attacks"], 1);
    assert_eq!(report["all_passed"], true);
}

#[test]
fn corrupted_attack_file_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    // Breaking the isometry amplitudes violates the gram condition.
    let corrupted = honest_two_round_attack_json().replace("0.4999999999999999", "0.9");
    assert_ne!(corrupted, honest_two_round_attack_json());
    std::fs::write(dir.path().join("broken.json"), corrupted).unwrap();
    let out = bin(
        &[
            "verify-reduction",
            "--attack-file",
            "broken.json",
            "--theta",
            "01",
        ],
        dir.path(),
    );
    assert_eq!(code(&out), 2);

    // --attack-file without --theta is a usage error.
    std::fs::write(
        dir.path().join("honest.json"),
        honest_two_round_attack_json(),
    )
    .unwrap();
    let out = bin(
        &["verify-reduction", "--attack-file", "honest.json"],
        dir.path(),
    );
    assert_eq!(code(&out), 2);
}

#[test]
fn impossible_tolerance_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("honest.json"),
        honest_two_round_attack_json(),
    )
    .unwrap();
    // Float dust in the acceptance probability cannot meet a negative
    // tolerance, so the check must report failure, not error.
    let out = bin(
        &[
            "verify-reduction",
            "--attack-file",
            "honest.json",
            "--theta",
            "01",
            "--tol=-1",
        ],
        dir.path(),
    );
    assert_eq!(code(&out), 3);
    assert!(stdout(&out).contains("all passed = false"));
}

#[test]
fn curve_spot_values_and_endpoints() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin(
        &[
            "curve",
            "--q-min",
            "0",
            "--q-max",
            "0.5",
            "--steps",
            "101",
            "--mode",
            "both",
            "--out",
            "curve.csv",
        ],
        dir.path(),
    );
    assert_eq!(code(&out), 0);

    let parse = |name: &str| -> Vec<(f64, f64)> {
        std::fs::read_to_string(dir.path().join(name))
            .unwrap()
            .lines()
            .skip(1)
            .map(|l| {
                let mut it = l.split(',');
                let q: f64 = it.next().unwrap().parse().unwrap();
                it.next().unwrap();
                let rate: f64 = it.next().unwrap().parse().unwrap();
                (q, rate)
            })
            .collect()
    };
    let dep = parse("curve.dependent.csv");
    let ind = parse("curve.independent.csv");
    assert_eq!(dep.len(), 101);
    assert!((dep[0].1 - 1.0).abs() < 1e-12);
    assert!(dep[100].1.abs() < 1e-12);
    // Q = 0.1 sits at index 20 on this grid.
    assert!((dep[20].0 - 0.1).abs() < 1e-12);
    assert!((dep[20].1 - 0.5310044064107189).abs() < 1e-12);
    assert!((ind[20].1 - 0.3199229542717201).abs() < 1e-12);
}
