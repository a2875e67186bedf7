//! Drives the C surface the way a C caller would: through raw
//! pointers, status codes and packed byte buffers.

use std::ffi::{CStr, CString};
use std::ptr;

use sqrng_ffi::*;

fn cstr(p: *const std::ffi::c_char) -> String {
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_string()
}

#[test]
fn version_is_the_package_version() {
    assert_eq!(cstr(sqrng_version()), env!("CARGO_PKG_VERSION"));
}

#[test]
fn scalar_helpers_match_reference_values() {
    let mut h = 0.0f64;
    assert_eq!(
        unsafe { sqrng_binary_entropy(0.1, &mut h) },
        SqrngStatus::Ok
    );
    assert!((h - 0.4689955935892812).abs() < 1e-15);

    let mut rate = 0.0f64;
    assert_eq!(
        unsafe { sqrng_closed_form_rate(0.1, &mut rate) },
        SqrngStatus::Ok
    );
    assert!((rate - 0.5310044064107189).abs() < 1e-15);

    let mut qfr = 0.0f64;
    assert_eq!(
        unsafe { sqrng_channel_qfr(0.1, 0, &mut qfr) },
        SqrngStatus::Ok
    );
    assert_eq!(qfr, 0.1);
    assert_eq!(
        unsafe { sqrng_channel_qfr(0.1, 1, &mut qfr) },
        SqrngStatus::Ok
    );
    assert!((qfr - 0.18).abs() < 1e-15);

    // Domain violations report InvalidArgument and set the message.
    assert_eq!(
        unsafe { sqrng_binary_entropy(1.5, &mut h) },
        SqrngStatus::InvalidArgument
    );
    assert!(cstr(sqrng_last_error()).contains("1.5"));
    assert_eq!(
        unsafe { sqrng_channel_qfr(0.1, 7, &mut qfr) },
        SqrngStatus::InvalidArgument
    );
}

#[test]
fn null_pointers_are_rejected_not_crashed() {
    assert_eq!(
        unsafe { sqrng_binary_entropy(0.5, ptr::null_mut()) },
        SqrngStatus::NullPointer
    );
    assert_eq!(
        unsafe { sqrng_entropy_bound(ptr::null(), ptr::null_mut()) },
        SqrngStatus::NullPointer
    );
    assert_eq!(unsafe { sqrng_transcript_raw_len(ptr::null()) }, 0);
    assert!(unsafe { sqrng_transcript_seed_cost_bits(ptr::null()) }.is_nan());
    assert!(unsafe { sqrng_extraction_abort_reason(ptr::null()) }.is_null());
    unsafe {
        sqrng_stats_free(ptr::null_mut());
        sqrng_transcript_free(ptr::null_mut());
        sqrng_extraction_free(ptr::null_mut());
        sqrng_attack_free(ptr::null_mut());
        sqrng_string_free(ptr::null_mut());
    }
}

#[test]
fn stats_pipeline_matches_closed_form() {
    let mut stats = ptr::null_mut();
    assert_eq!(
        unsafe { sqrng_stats_from_depolarization(0.1, 0, &mut stats) },
        SqrngStatus::Ok
    );
    let mut report = SqrngRateReport {
        lambda_plus: 0.0,
        lambda_minus: 0.0,
        overlap2re_plus: 0.0,
        overlap2re_minus: 0.0,
        term_plus: 0.0,
        term_minus: 0.0,
        bound: 0.0,
        abort: true,
    };
    assert_eq!(
        unsafe { sqrng_entropy_bound(stats, &mut report) },
        SqrngStatus::Ok
    );
    assert!((report.bound - 0.5310044064107189).abs() < 1e-12);
    assert!((report.lambda_plus - 0.9).abs() < 1e-12);
    assert!(!report.abort);
    unsafe { sqrng_stats_free(stats) };

    // Hand-built statistics go through the same constructor checks.
    let p_ac = [0.25f64, 0.25, 0.25, 0.25];
    let mut stats = ptr::null_mut();
    assert_eq!(
        unsafe { sqrng_stats_new(p_ac.as_ptr(), 1.0, 0.0, 1e-9, &mut stats) },
        SqrngStatus::Ok
    );
    assert_eq!(
        unsafe { sqrng_entropy_bound(stats, &mut report) },
        SqrngStatus::Ok
    );
    assert!((report.bound - 1.0).abs() < 1e-12);
    unsafe { sqrng_stats_free(stats) };

    // Joints that do not normalize are flagged as inconsistent.
    let bad = [0.9f64, 0.9, 0.9, 0.9];
    let mut stats = ptr::null_mut();
    assert_eq!(
        unsafe { sqrng_stats_new(bad.as_ptr(), 1.0, 0.0, 1e-9, &mut stats) },
        SqrngStatus::InconsistentStatistics
    );
    // Out-of-range scalars are plain invalid arguments.
    let p_ac = [0.25f64, 0.25, 0.25, 0.25];
    assert_eq!(
        unsafe { sqrng_stats_new(p_ac.as_ptr(), 1.7, 0.0, 1e-9, &mut stats) },
        SqrngStatus::InvalidArgument
    );
}

#[test]
fn simulate_extract_round_trip() {
    let mut transcript = ptr::null_mut();
    assert_eq!(
        unsafe { sqrng_simulate(4000, 400, 0.0, 0, 11, false, &mut transcript) },
        SqrngStatus::Ok
    );
    assert_eq!(unsafe { sqrng_transcript_raw_len(transcript) }, 3600);
    assert!(unsafe { sqrng_transcript_seed_cost_bits(transcript) } > 0.0);

    let mut raw = vec![0u8; 3600usize.div_ceil(8)];
    assert_eq!(
        unsafe { sqrng_transcript_raw_bytes(transcript, raw.as_mut_ptr(), raw.len()) },
        SqrngStatus::Ok
    );
    assert_eq!(
        unsafe { sqrng_transcript_raw_bytes(transcript, raw.as_mut_ptr(), 3) },
        SqrngStatus::BufferTooSmall
    );

    let mut stats = ptr::null_mut();
    assert_eq!(
        unsafe { sqrng_transcript_stats(transcript, &mut stats) },
        SqrngStatus::Ok
    );
    let mut report = SqrngRateReport {
        lambda_plus: 0.0,
        lambda_minus: 0.0,
        overlap2re_plus: 0.0,
        overlap2re_minus: 0.0,
        term_plus: 0.0,
        term_minus: 0.0,
        bound: 0.0,
        abort: true,
    };
    assert_eq!(
        unsafe { sqrng_entropy_bound(stats, &mut report) },
        SqrngStatus::Ok
    );
    assert!(
        report.bound > 0.9,
        "noiseless bound came out at {}",
        report.bound
    );
    unsafe { sqrng_stats_free(stats) };

    // JSON round trip preserves the raw string.
    let mut json = ptr::null_mut();
    assert_eq!(
        unsafe { sqrng_transcript_to_json(transcript, &mut json) },
        SqrngStatus::Ok
    );
    let mut back = ptr::null_mut();
    assert_eq!(
        unsafe { sqrng_transcript_from_json(json, &mut back) },
        SqrngStatus::Ok
    );
    assert_eq!(unsafe { sqrng_transcript_raw_len(back) }, 3600);
    let mut raw2 = vec![0u8; raw.len()];
    assert_eq!(
        unsafe { sqrng_transcript_raw_bytes(back, raw2.as_mut_ptr(), raw2.len()) },
        SqrngStatus::Ok
    );
    assert_eq!(raw, raw2);
    unsafe {
        sqrng_string_free(json);
        sqrng_transcript_free(back);
    }

    // Extraction: deterministic in the seed, output sized by ell.
    let mut extraction = ptr::null_mut();
    assert_eq!(
        unsafe { sqrng_extract(transcript, 0.05, -1.0, 21, &mut extraction) },
        SqrngStatus::Ok
    );
    assert!(unsafe { sqrng_extraction_abort_reason(extraction) }.is_null());
    let ell = unsafe { sqrng_extraction_ell(extraction) };
    assert!(ell > 3000, "ell = {ell}");
    let rate = unsafe { sqrng_extraction_rate_used(extraction) };
    assert!(rate > 0.8 && rate < 1.0);
    let seed_len = unsafe { sqrng_extraction_hash_seed_len(extraction) };
    assert_eq!(seed_len, 3600 + ell - 1);

    let mut bits_a = vec![0u8; ell.div_ceil(8)];
    assert_eq!(
        unsafe { sqrng_extraction_output_bytes(extraction, bits_a.as_mut_ptr(), bits_a.len()) },
        SqrngStatus::Ok
    );
    let mut extraction_b = ptr::null_mut();
    assert_eq!(
        unsafe { sqrng_extract(transcript, 0.05, -1.0, 21, &mut extraction_b) },
        SqrngStatus::Ok
    );
    let mut bits_b = vec![0u8; bits_a.len()];
    assert_eq!(
        unsafe { sqrng_extraction_output_bytes(extraction_b, bits_b.as_mut_ptr(), bits_b.len()) },
        SqrngStatus::Ok
    );
    assert_eq!(bits_a, bits_b);
    unsafe {
        sqrng_extraction_free(extraction);
        sqrng_extraction_free(extraction_b);
        sqrng_transcript_free(transcript);
    }
}

#[test]
fn extraction_abort_reasons_come_through() {
    // Full noise: nothing can be certified.
    let mut transcript = ptr::null_mut();
    assert_eq!(
        unsafe { sqrng_simulate(2000, 500, 0.5, 0, 5, false, &mut transcript) },
        SqrngStatus::Ok
    );
    let mut extraction = ptr::null_mut();
    assert_eq!(
        unsafe { sqrng_extract(transcript, 0.05, -1.0, 1, &mut extraction) },
        SqrngStatus::Ok
    );
    assert_eq!(
        cstr(unsafe { sqrng_extraction_abort_reason(extraction) }),
        "noise-too-high"
    );
    assert_eq!(unsafe { sqrng_extraction_ell(extraction) }, 0);
    let mut buf = [0u8; 1];
    assert_eq!(
        unsafe { sqrng_extraction_hash_seed_bytes(extraction, buf.as_mut_ptr(), 1) },
        SqrngStatus::MissingStatistics
    );
    unsafe {
        sqrng_extraction_free(extraction);
        sqrng_transcript_free(transcript);
    }

    // No test rounds: statistics are missing entirely.
    let mut transcript = ptr::null_mut();
    assert_eq!(
        unsafe { sqrng_simulate(100, 0, 0.0, 0, 5, false, &mut transcript) },
        SqrngStatus::Ok
    );
    let mut stats = ptr::null_mut();
    assert_eq!(
        unsafe { sqrng_transcript_stats(transcript, &mut stats) },
        SqrngStatus::MissingStatistics
    );
    let mut extraction = ptr::null_mut();
    assert_eq!(
        unsafe { sqrng_extract(transcript, 0.0, -1.0, 1, &mut extraction) },
        SqrngStatus::Ok
    );
    assert_eq!(
        cstr(unsafe { sqrng_extraction_abort_reason(extraction) }),
        "insufficient-test-rounds"
    );
    unsafe {
        sqrng_extraction_free(extraction);
        sqrng_transcript_free(transcript);
    }
}

#[test]
fn toeplitz_buffer_interface_matches_library() {
    // raw = 1010, seed = 1110111 (7 bits), ell = 4.
    let raw_bytes = [0b1010_0000u8];
    let seed_bytes = [0b1110_1110u8];
    let mut out = [0u8; 1];
    assert_eq!(
        unsafe {
            sqrng_toeplitz_hash(
                raw_bytes.as_ptr(),
                4,
                seed_bytes.as_ptr(),
                7,
                4,
                out.as_mut_ptr(),
                1,
            )
        },
        SqrngStatus::Ok
    );
    let raw = sqrng::bits::BitString::from_hex("a0", 4).unwrap();
    let seed = sqrng::bits::BitString::from_hex("ee", 7).unwrap();
    let expect = sqrng::toeplitz_hash(&raw, &seed, 4).unwrap();
    let expect_byte: u8 = expect
        .iter()
        .enumerate()
        .map(|(i, b)| b << (7 - i))
        .fold(0, |acc, x| acc | x);
    assert_eq!(out[0], expect_byte);

    // Wrong seed length surfaces the library error.
    assert_eq!(
        unsafe {
            sqrng_toeplitz_hash(
                raw_bytes.as_ptr(),
                4,
                seed_bytes.as_ptr(),
                6,
                4,
                out.as_mut_ptr(),
                1,
            )
        },
        SqrngStatus::InvalidArgument
    );
}

#[test]
fn attack_sampling_and_reduction_check() {
    let mut attack = ptr::null_mut();
    assert_eq!(
        unsafe { sqrng_attack_sample(2, 3, 17, &mut attack) },
        SqrngStatus::Ok
    );
    let theta = CString::new("01").unwrap();
    let mut report = SqrngReductionReport {
        accept_probability: 0.0,
        expected_accept: 0.0,
        state_fidelity: 0.0,
        passed: false,
    };
    assert_eq!(
        unsafe { sqrng_verify_reduction(attack, theta.as_ptr(), 1e-9, &mut report) },
        SqrngStatus::Ok
    );
    assert!(report.passed);
    assert_eq!(report.expected_accept, 0.5);
    assert!((report.accept_probability - 0.5).abs() < 1e-12);
    assert!(report.state_fidelity > 1.0 - 1e-12);

    // Round trip through JSON preserves verification.
    let mut json = ptr::null_mut();
    assert_eq!(
        unsafe { sqrng_attack_to_json(attack, &mut json) },
        SqrngStatus::Ok
    );
    let mut back = ptr::null_mut();
    assert_eq!(
        unsafe { sqrng_attack_from_json(json, &mut back) },
        SqrngStatus::Ok
    );
    let mut report2 = SqrngReductionReport {
        accept_probability: 0.0,
        expected_accept: 0.0,
        state_fidelity: 0.0,
        passed: false,
    };
    assert_eq!(
        unsafe { sqrng_verify_reduction(back, theta.as_ptr(), 1e-9, &mut report2) },
        SqrngStatus::Ok
    );
    assert!(report2.passed);
    unsafe {
        sqrng_string_free(json);
        sqrng_attack_free(back);
    }

    // Schedule length must match the attack's round count.
    let bad_theta = CString::new("011").unwrap();
    assert_eq!(
        unsafe { sqrng_verify_reduction(attack, bad_theta.as_ptr(), 1e-9, &mut report) },
        SqrngStatus::InvalidArgument
    );
    unsafe { sqrng_attack_free(attack) };

    let garbage = CString::new("{\"rounds\": 1}").unwrap();
    let mut broken = ptr::null_mut();
    assert_eq!(
        unsafe { sqrng_attack_from_json(garbage.as_ptr(), &mut broken) },
        SqrngStatus::InvalidArgument
    );
}

/// The committed header must stay in sync with the crate surface and,
/// when a C compiler is around, must actually compile as C.
#[test]
fn header_is_current_and_compiles() {
    let header_path = concat!(env!("CARGO_MANIFEST_DIR"), "/include/sqrng.h");
    let header = std::fs::read_to_string(header_path).unwrap();
    for symbol in [
        "sqrng_version",
        "sqrng_last_error",
        "sqrng_binary_entropy",
        "sqrng_closed_form_rate",
        "sqrng_channel_qfr",
        "sqrng_stats_new",
        "sqrng_stats_from_depolarization",
        "sqrng_stats_free",
        "sqrng_entropy_bound",
        "sqrng_simulate",
        "sqrng_transcript_from_json",
        "sqrng_transcript_to_json",
        "sqrng_transcript_raw_len",
        "sqrng_transcript_raw_bytes",
        "sqrng_transcript_stats",
        "sqrng_transcript_seed_cost_bits",
        "sqrng_transcript_free",
        "sqrng_extract",
        "sqrng_extraction_ell",
        "sqrng_extraction_rate_used",
        "sqrng_extraction_abort_reason",
        "sqrng_extraction_output_bytes",
        "sqrng_extraction_hash_seed_len",
        "sqrng_extraction_hash_seed_bytes",
        "sqrng_extraction_free",
        "sqrng_toeplitz_hash",
        "sqrng_attack_sample",
        "sqrng_attack_from_json",
        "sqrng_attack_to_json",
        "sqrng_attack_free",
        "sqrng_verify_reduction",
        "sqrng_string_free",
        "SQRNG_STATUS_BUFFER_TOO_SMALL",
    ] {
        assert!(header.contains(symbol), "header lost {symbol}");
    }

    let cc_available = std::process::Command::new("cc")
        .arg("--version")
        .output()
        .is_ok_and(|o| o.status.success());
    if !cc_available {
        eprintln!("note: no C compiler found, skipping syntax check");
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let tu = dir.path().join("use_header.c");
    std::fs::write(
        &tu,
        "#include \"sqrng.h\"\n\
         int main(void) {\n\
           double h = 0.0;\n\
           SqrngStatus s = sqrng_binary_entropy(0.5, &h);\n\
           return s == SQRNG_STATUS_OK ? 0 : 1;\n\
         }\n",
    )
    .unwrap();
    let out = std::process::Command::new("cc")
        .arg("-fsyntax-only")
        .arg("-Wall")
        .arg("-Werror")
        .arg(format!(
            "-I{}",
            std::path::Path::new(header_path)
                .parent()
                .unwrap()
                .display()
        ))
        .arg(&tu)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "header failed C compilation:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
}
