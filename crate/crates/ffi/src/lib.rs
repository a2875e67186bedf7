//! C interface: opaque handles over the library types, status codes
//! instead of Result, and a panic guard on every entry point so no
//! unwind ever crosses the language boundary.
//!
//! Conventions: functions returning `SqrngStatus` write results through
//! out-pointers and leave them untouched on failure; handle getters
//! return a sentinel (0, NaN or NULL) when passed NULL. Bit buffers are
//! packed most-significant-bit-first within bytes, matching the
//! library's hex serialization. `sqrng_last_error` describes the most
//! recent failure on the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use sqrng::attack::{sample_random_attack, verify_reduction, GeneralAttack, OperationSchedule};
use sqrng::bits::BitString;
use sqrng::error::Error;
use sqrng::postprocess::{
    extract, AbortReason, ExtractionConfig, ExtractionResult, HashSeedSource,
};
use sqrng::protocol::{run_protocol, ProtocolConfig, Transcript};
use sqrng::rate::{
    closed_form_rate, depolarization_stats, entropy_bound, ChannelMode, ChannelModel, ObservedStats,
};
use sqrng::seeding::{substream, LABEL_ATTACKS};
use sqrng::{binary_entropy, toeplitz_hash};

/// Result of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum SqrngStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InconsistentStatistics = 3,
    MissingStatistics = 4,
    BufferTooSmall = 5,
    Panic = 6,
}

/// Observed protocol statistics.
pub struct SqrngStats(ObservedStats);

/// A finished protocol run.
pub struct SqrngTranscript(Transcript);

/// Output of the extraction step.
pub struct SqrngExtraction(ExtractionResult);

/// A multi-round server attack.
pub struct SqrngAttack(GeneralAttack);

/// Plain-struct mirror of the rate report. Lambda entries are NaN for
/// messages with zero mass.
#[repr(C)]
pub struct SqrngRateReport {
    pub lambda_plus: f64,
    pub lambda_minus: f64,
    pub overlap2re_plus: f64,
    pub overlap2re_minus: f64,
    pub term_plus: f64,
    pub term_minus: f64,
    pub bound: f64,
    pub abort: bool,
}

/// Outcome of one reduction check.
#[repr(C)]
pub struct SqrngReductionReport {
    pub accept_probability: f64,
    pub expected_accept: f64,
    pub state_fidelity: f64,
    pub passed: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg).unwrap_or_else(|_| CString::new("invalid error text").unwrap());
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn fail(e: Error) -> SqrngStatus {
    let status = match e {
        Error::InconsistentStatistics(_) => SqrngStatus::InconsistentStatistics,
        Error::MissingStatistics { .. } => SqrngStatus::MissingStatistics,
        _ => SqrngStatus::InvalidArgument,
    };
    set_last_error(e.to_string());
    status
}

fn null_arg(name: &str) -> SqrngStatus {
    set_last_error(format!("{name} is NULL"));
    SqrngStatus::NullPointer
}

/// Runs the body under a panic guard.
fn guarded(f: impl FnOnce() -> SqrngStatus) -> SqrngStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => {
            set_last_error("internal panic".into());
            SqrngStatus::Panic
        }
    }
}

fn parse_mode(mode: c_int) -> Result<ChannelMode, SqrngStatus> {
    match mode {
        0 => Ok(ChannelMode::Dependent),
        1 => Ok(ChannelMode::Independent),
        _ => {
            set_last_error(format!(
                "mode {mode} is not 0 (dependent) or 1 (independent)"
            ));
            Err(SqrngStatus::InvalidArgument)
        }
    }
}

unsafe fn read_cstr<'a>(ptr: *const c_char, name: &str) -> Result<&'a str, SqrngStatus> {
    if ptr.is_null() {
        return Err(null_arg(name));
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        set_last_error(format!("{name} is not valid UTF-8"));
        SqrngStatus::InvalidArgument
    })
}

fn pack_msb(bits: &BitString) -> Vec<u8> {
    let mut bytes = vec![0u8; bits.len().div_ceil(8)];
    for (i, b) in bits.iter().enumerate() {
        bytes[i / 8] |= b << (7 - (i % 8));
    }
    bytes
}

unsafe fn unpack_msb(ptr: *const u8, bit_len: usize, name: &str) -> Result<BitString, SqrngStatus> {
    if bit_len > 0 && ptr.is_null() {
        return Err(null_arg(name));
    }
    let bytes = std::slice::from_raw_parts(ptr, bit_len.div_ceil(8));
    let mut bits = Vec::with_capacity(bit_len);
    for i in 0..bit_len {
        bits.push((bytes[i / 8] >> (7 - (i % 8))) & 1);
    }
    BitString::new(bits).map_err(fail)
}

unsafe fn write_bits_out(
    bits: &BitString,
    out: *mut u8,
    capacity: usize,
) -> Result<(), SqrngStatus> {
    let need = bits.len().div_ceil(8);
    if need > 0 && out.is_null() {
        return Err(null_arg("out"));
    }
    if capacity < need {
        set_last_error(format!("need {need} bytes, caller provided {capacity}"));
        return Err(SqrngStatus::BufferTooSmall);
    }
    let packed = pack_msb(bits);
    std::ptr::copy_nonoverlapping(packed.as_ptr(), out, need);
    Ok(())
}

/// Library version as a static string; never freed by the caller.
#[no_mangle]
pub extern "C" fn sqrng_version() -> *const c_char {
    static VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    VERSION.as_ptr().cast()
}

/// Message for the calling thread's most recent failure, or NULL.
/// Valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn sqrng_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| {
        slot.borrow()
            .as_ref()
            .map_or(std::ptr::null(), |c| c.as_ptr())
    })
}

/// Frees a string returned by a `*_to_json` function.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn sqrng_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Binary entropy of `p` in bits, written to `out`.
///
/// # Safety
/// `out` must be valid for one f64 write.
#[no_mangle]
pub unsafe extern "C" fn sqrng_binary_entropy(p: f64, out: *mut f64) -> SqrngStatus {
    guarded(|| {
        if out.is_null() {
            return null_arg("out");
        }
        match binary_entropy(p) {
            Ok(h) => {
                *out = h;
                SqrngStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Secure rate of a depolarizing channel with flip rate `q_fr`.
///
/// # Safety
/// `out` must be valid for one f64 write.
#[no_mangle]
pub unsafe extern "C" fn sqrng_closed_form_rate(q_fr: f64, out: *mut f64) -> SqrngStatus {
    guarded(|| {
        if out.is_null() {
            return null_arg("out");
        }
        match closed_form_rate(q_fr) {
            Ok(rate) => {
                *out = rate;
                SqrngStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Reflected-round flip rate for depolarizing parameter `q` under mode
/// 0 (dependent, Q_FR = Q) or 1 (independent, Q_FR = 2Q(1-Q)).
///
/// # Safety
/// `out` must be valid for one f64 write.
#[no_mangle]
pub unsafe extern "C" fn sqrng_channel_qfr(q: f64, mode: c_int, out: *mut f64) -> SqrngStatus {
    guarded(|| {
        if out.is_null() {
            return null_arg("out");
        }
        let mode = match parse_mode(mode) {
            Ok(m) => m,
            Err(s) => return s,
        };
        match ChannelModel::new(q, mode) {
            Ok(channel) => {
                *out = channel.q_fr();
                SqrngStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Builds statistics from raw probabilities. `p_ac` is row-major over
/// (returned bit a, message c): [P(0,+), P(0,-), P(1,+), P(1,-)].
///
/// # Safety
/// `p_ac` must point to 4 f64 values; `out` receives an owned handle.
#[no_mangle]
pub unsafe extern "C" fn sqrng_stats_new(
    p_ac: *const f64,
    p_plus_acc: f64,
    p_minus_acc: f64,
    slack: f64,
    out: *mut *mut SqrngStats,
) -> SqrngStatus {
    guarded(|| {
        if p_ac.is_null() {
            return null_arg("p_ac");
        }
        if out.is_null() {
            return null_arg("out");
        }
        let p = std::slice::from_raw_parts(p_ac, 4);
        match ObservedStats::new([[p[0], p[1]], [p[2], p[3]]], p_plus_acc, p_minus_acc, slack) {
            Ok(stats) => {
                *out = Box::into_raw(Box::new(SqrngStats(stats)));
                SqrngStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Exact statistics of an honest run over a depolarizing channel.
///
/// # Safety
/// `out` receives an owned handle.
#[no_mangle]
pub unsafe extern "C" fn sqrng_stats_from_depolarization(
    q: f64,
    mode: c_int,
    out: *mut *mut SqrngStats,
) -> SqrngStatus {
    guarded(|| {
        if out.is_null() {
            return null_arg("out");
        }
        let mode = match parse_mode(mode) {
            Ok(m) => m,
            Err(s) => return s,
        };
        match ChannelModel::new(q, mode) {
            Ok(channel) => {
                *out = Box::into_raw(Box::new(SqrngStats(depolarization_stats(&channel))));
                SqrngStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// # Safety
/// `stats` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn sqrng_stats_free(stats: *mut SqrngStats) {
    if !stats.is_null() {
        drop(Box::from_raw(stats));
    }
}

/// Computes the secure-rate bound from statistics into `report`.
///
/// # Safety
/// `stats` must be a live handle; `report` valid for one struct write.
#[no_mangle]
pub unsafe extern "C" fn sqrng_entropy_bound(
    stats: *const SqrngStats,
    report: *mut SqrngRateReport,
) -> SqrngStatus {
    guarded(|| {
        let Some(stats) = stats.as_ref() else {
            return null_arg("stats");
        };
        if report.is_null() {
            return null_arg("report");
        }
        match entropy_bound(&stats.0) {
            Ok(r) => {
                *report = SqrngRateReport {
                    lambda_plus: r.lambda[0].unwrap_or(f64::NAN),
                    lambda_minus: r.lambda[1].unwrap_or(f64::NAN),
                    overlap2re_plus: r.inner2re[0],
                    overlap2re_minus: r.inner2re[1],
                    term_plus: r.term[0],
                    term_minus: r.term[1],
                    bound: r.bound,
                    abort: r.abort,
                };
                SqrngStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Runs the protocol. Mode is 0 (dependent) or 1 (independent);
/// `keep_rounds` stores per-round records in the transcript.
///
/// # Safety
/// `out` receives an owned handle.
#[no_mangle]
pub unsafe extern "C" fn sqrng_simulate(
    rounds: usize,
    tests: usize,
    q: f64,
    mode: c_int,
    seed: u64,
    keep_rounds: bool,
    out: *mut *mut SqrngTranscript,
) -> SqrngStatus {
    guarded(|| {
        if out.is_null() {
            return null_arg("out");
        }
        let mode = match parse_mode(mode) {
            Ok(m) => m,
            Err(s) => return s,
        };
        let result = ChannelModel::new(q, mode)
            .and_then(|channel| ProtocolConfig::new(rounds, tests, channel, seed))
            .and_then(|config| run_protocol(&config, keep_rounds));
        match result {
            Ok(t) => {
                *out = Box::into_raw(Box::new(SqrngTranscript(t)));
                SqrngStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Parses a transcript from its JSON interchange form.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` receives an owned
/// handle.
#[no_mangle]
pub unsafe extern "C" fn sqrng_transcript_from_json(
    text: *const c_char,
    out: *mut *mut SqrngTranscript,
) -> SqrngStatus {
    guarded(|| {
        if out.is_null() {
            return null_arg("out");
        }
        let text = match read_cstr(text, "text") {
            Ok(t) => t,
            Err(s) => return s,
        };
        match Transcript::from_json(text) {
            Ok(t) => {
                *out = Box::into_raw(Box::new(SqrngTranscript(t)));
                SqrngStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Serializes a transcript to JSON; free the string with
/// `sqrng_string_free`.
///
/// # Safety
/// `transcript` must be a live handle; `out` receives an owned string.
#[no_mangle]
pub unsafe extern "C" fn sqrng_transcript_to_json(
    transcript: *const SqrngTranscript,
    out: *mut *mut c_char,
) -> SqrngStatus {
    guarded(|| {
        let Some(t) = transcript.as_ref() else {
            return null_arg("transcript");
        };
        if out.is_null() {
            return null_arg("out");
        }
        match t.0.to_json() {
            Ok(json) => match CString::new(json) {
                Ok(c) => {
                    *out = c.into_raw();
                    SqrngStatus::Ok
                }
                Err(_) => {
                    set_last_error("JSON contained an interior NUL".into());
                    SqrngStatus::InvalidArgument
                }
            },
            Err(e) => fail(e),
        }
    })
}

/// Number of raw bits in the transcript; 0 for NULL.
///
/// # Safety
/// `transcript` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sqrng_transcript_raw_len(transcript: *const SqrngTranscript) -> usize {
    catch_unwind(AssertUnwindSafe(|| {
        transcript.as_ref().map_or(0, |t| t.0.raw().len())
    }))
    .unwrap_or(0)
}

/// Copies the raw bits, packed MSB-first, into `out`.
///
/// # Safety
/// `transcript` must be a live handle; `out` must hold `capacity`
/// writable bytes.
#[no_mangle]
pub unsafe extern "C" fn sqrng_transcript_raw_bytes(
    transcript: *const SqrngTranscript,
    out: *mut u8,
    capacity: usize,
) -> SqrngStatus {
    guarded(|| {
        let Some(t) = transcript.as_ref() else {
            return null_arg("transcript");
        };
        match write_bits_out(t.0.raw(), out, capacity) {
            Ok(()) => SqrngStatus::Ok,
            Err(s) => s,
        }
    })
}

/// Copies the transcript's statistics into a fresh handle; fails with
/// `MissingStatistics` when a round kind had zero samples.
///
/// # Safety
/// `transcript` must be a live handle; `out` receives an owned handle.
#[no_mangle]
pub unsafe extern "C" fn sqrng_transcript_stats(
    transcript: *const SqrngTranscript,
    out: *mut *mut SqrngStats,
) -> SqrngStatus {
    guarded(|| {
        let Some(t) = transcript.as_ref() else {
            return null_arg("transcript");
        };
        if out.is_null() {
            return null_arg("out");
        }
        match t.0.stats() {
            Some(stats) => {
                *out = Box::into_raw(Box::new(SqrngStats(stats.clone())));
                SqrngStatus::Ok
            }
            None => {
                set_last_error("transcript has no statistics".into());
                SqrngStatus::MissingStatistics
            }
        }
    })
}

/// Entropy consumed by the schedule choice, in bits; NaN for NULL.
///
/// # Safety
/// `transcript` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sqrng_transcript_seed_cost_bits(
    transcript: *const SqrngTranscript,
) -> f64 {
    catch_unwind(AssertUnwindSafe(|| {
        transcript
            .as_ref()
            .map_or(f64::NAN, |t| t.0.seed_cost_bits())
    }))
    .unwrap_or(f64::NAN)
}

/// # Safety
/// `transcript` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn sqrng_transcript_free(transcript: *mut SqrngTranscript) {
    if !transcript.is_null() {
        drop(Box::from_raw(transcript));
    }
}

/// Runs length selection and hashing on a transcript. A negative
/// `threshold_qfr` disables the noise threshold; the hash seed is
/// derived from `seed`. Aborts are reported through the handle, not the
/// status code.
///
/// # Safety
/// `transcript` must be a live handle; `out` receives an owned handle.
#[no_mangle]
pub unsafe extern "C" fn sqrng_extract(
    transcript: *const SqrngTranscript,
    margin: f64,
    threshold_qfr: f64,
    seed: u64,
    out: *mut *mut SqrngExtraction,
) -> SqrngStatus {
    guarded(|| {
        let Some(t) = transcript.as_ref() else {
            return null_arg("transcript");
        };
        if out.is_null() {
            return null_arg("out");
        }
        let config = ExtractionConfig {
            margin,
            threshold_qfr: (threshold_qfr >= 0.0).then_some(threshold_qfr),
            hash_seed: HashSeedSource::Derive(seed),
        };
        match extract(&t.0, &config) {
            Ok(result) => {
                *out = Box::into_raw(Box::new(SqrngExtraction(result)));
                SqrngStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Extracted bit count; 0 for NULL or aborted extraction.
///
/// # Safety
/// `extraction` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sqrng_extraction_ell(extraction: *const SqrngExtraction) -> usize {
    catch_unwind(AssertUnwindSafe(|| {
        extraction.as_ref().map_or(0, |e| e.0.ell)
    }))
    .unwrap_or(0)
}

/// Rate used for length selection; NaN for NULL.
///
/// # Safety
/// `extraction` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sqrng_extraction_rate_used(extraction: *const SqrngExtraction) -> f64 {
    catch_unwind(AssertUnwindSafe(|| {
        extraction.as_ref().map_or(f64::NAN, |e| e.0.rate_used)
    }))
    .unwrap_or(f64::NAN)
}

/// Abort reason as a static string (`noise-too-high`,
/// `inconsistent-statistics`, `insufficient-test-rounds`), or NULL when
/// the extraction produced output.
///
/// # Safety
/// `extraction` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sqrng_extraction_abort_reason(
    extraction: *const SqrngExtraction,
) -> *const c_char {
    catch_unwind(AssertUnwindSafe(|| {
        let Some(e) = extraction.as_ref() else {
            return std::ptr::null();
        };
        match e.0.aborted {
            Some(AbortReason::NoiseTooHigh) => c"noise-too-high".as_ptr(),
            Some(AbortReason::InconsistentStatistics) => c"inconsistent-statistics".as_ptr(),
            Some(AbortReason::InsufficientTestRounds) => c"insufficient-test-rounds".as_ptr(),
            None => std::ptr::null(),
        }
    }))
    .unwrap_or(std::ptr::null())
}

/// Copies the extracted bits, packed MSB-first, into `out`.
///
/// # Safety
/// `extraction` must be a live handle; `out` must hold `capacity`
/// writable bytes.
#[no_mangle]
pub unsafe extern "C" fn sqrng_extraction_output_bytes(
    extraction: *const SqrngExtraction,
    out: *mut u8,
    capacity: usize,
) -> SqrngStatus {
    guarded(|| {
        let Some(e) = extraction.as_ref() else {
            return null_arg("extraction");
        };
        match write_bits_out(&e.0.output, out, capacity) {
            Ok(()) => SqrngStatus::Ok,
            Err(s) => s,
        }
    })
}

/// Length in bits of the hash seed that was used; 0 when aborted.
///
/// # Safety
/// `extraction` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sqrng_extraction_hash_seed_len(
    extraction: *const SqrngExtraction,
) -> usize {
    catch_unwind(AssertUnwindSafe(|| {
        extraction
            .as_ref()
            .and_then(|e| e.0.hash_seed.as_ref())
            .map_or(0, BitString::len)
    }))
    .unwrap_or(0)
}

/// Copies the hash seed bits, packed MSB-first, into `out`.
///
/// # Safety
/// `extraction` must be a live handle; `out` must hold `capacity`
/// writable bytes.
#[no_mangle]
pub unsafe extern "C" fn sqrng_extraction_hash_seed_bytes(
    extraction: *const SqrngExtraction,
    out: *mut u8,
    capacity: usize,
) -> SqrngStatus {
    guarded(|| {
        let Some(e) = extraction.as_ref() else {
            return null_arg("extraction");
        };
        let Some(seed) = e.0.hash_seed.as_ref() else {
            set_last_error("aborted extraction has no hash seed".into());
            return SqrngStatus::MissingStatistics;
        };
        match write_bits_out(seed, out, capacity) {
            Ok(()) => SqrngStatus::Ok,
            Err(s) => s,
        }
    })
}

/// # Safety
/// `extraction` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn sqrng_extraction_free(extraction: *mut SqrngExtraction) {
    if !extraction.is_null() {
        drop(Box::from_raw(extraction));
    }
}

/// Toeplitz-hashes `raw_bits` input bits down to `ell` output bits. The
/// seed must hold exactly `raw_bits + ell - 1` bits; all buffers are
/// packed MSB-first.
///
/// # Safety
/// `raw` and `seed` must hold enough bytes for their bit counts; `out`
/// must hold `out_capacity` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn sqrng_toeplitz_hash(
    raw: *const u8,
    raw_bits: usize,
    seed: *const u8,
    seed_bits: usize,
    ell: usize,
    out: *mut u8,
    out_capacity: usize,
) -> SqrngStatus {
    guarded(|| {
        let raw = match unpack_msb(raw, raw_bits, "raw") {
            Ok(b) => b,
            Err(s) => return s,
        };
        let seed = match unpack_msb(seed, seed_bits, "seed") {
            Ok(b) => b,
            Err(s) => return s,
        };
        match toeplitz_hash(&raw, &seed, ell) {
            Ok(hashed) => match write_bits_out(&hashed, out, out_capacity) {
                Ok(()) => SqrngStatus::Ok,
                Err(s) => s,
            },
            Err(e) => fail(e),
        }
    })
}

/// Samples an isometry-valid attack on `rounds` rounds with output
/// ancilla dimension `d_out`, deterministically from `seed`.
///
/// # Safety
/// `out` receives an owned handle.
#[no_mangle]
pub unsafe extern "C" fn sqrng_attack_sample(
    rounds: usize,
    d_out: usize,
    seed: u64,
    out: *mut *mut SqrngAttack,
) -> SqrngStatus {
    guarded(|| {
        if out.is_null() {
            return null_arg("out");
        }
        let mut rng = substream(seed, LABEL_ATTACKS);
        match sample_random_attack(rounds, d_out, &mut rng) {
            Ok(attack) => {
                *out = Box::into_raw(Box::new(SqrngAttack(attack)));
                SqrngStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Parses an attack from its JSON interchange form.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` receives an owned
/// handle.
#[no_mangle]
pub unsafe extern "C" fn sqrng_attack_from_json(
    text: *const c_char,
    out: *mut *mut SqrngAttack,
) -> SqrngStatus {
    guarded(|| {
        if out.is_null() {
            return null_arg("out");
        }
        let text = match read_cstr(text, "text") {
            Ok(t) => t,
            Err(s) => return s,
        };
        match GeneralAttack::from_json(text) {
            Ok(attack) => {
                *out = Box::into_raw(Box::new(SqrngAttack(attack)));
                SqrngStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Serializes an attack to JSON; free the string with
/// `sqrng_string_free`.
///
/// # Safety
/// `attack` must be a live handle; `out` receives an owned string.
#[no_mangle]
pub unsafe extern "C" fn sqrng_attack_to_json(
    attack: *const SqrngAttack,
    out: *mut *mut c_char,
) -> SqrngStatus {
    guarded(|| {
        let Some(a) = attack.as_ref() else {
            return null_arg("attack");
        };
        if out.is_null() {
            return null_arg("out");
        }
        match a.0.to_json() {
            Ok(json) => match CString::new(json) {
                Ok(c) => {
                    *out = c.into_raw();
                    SqrngStatus::Ok
                }
                Err(_) => {
                    set_last_error("JSON contained an interior NUL".into());
                    SqrngStatus::InvalidArgument
                }
            },
            Err(e) => fail(e),
        }
    })
}

/// # Safety
/// `attack` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn sqrng_attack_free(attack: *mut SqrngAttack) {
    if !attack.is_null() {
        drop(Box::from_raw(attack));
    }
}

/// Checks the acceptance reduction for one attack against a schedule
/// string like "0110" (1 = measure-resend, 0 = reflect).
///
/// # Safety
/// `attack` must be a live handle; `theta` a NUL-terminated string;
/// `report` valid for one struct write.
#[no_mangle]
pub unsafe extern "C" fn sqrng_verify_reduction(
    attack: *const SqrngAttack,
    theta: *const c_char,
    tol: f64,
    report: *mut SqrngReductionReport,
) -> SqrngStatus {
    guarded(|| {
        let Some(a) = attack.as_ref() else {
            return null_arg("attack");
        };
        if report.is_null() {
            return null_arg("report");
        }
        let theta = match read_cstr(theta, "theta") {
            Ok(t) => t,
            Err(s) => return s,
        };
        let result = OperationSchedule::parse(theta)
            .and_then(|schedule| verify_reduction(&a.0, &schedule, tol));
        match result {
            Ok(r) => {
                *report = SqrngReductionReport {
                    accept_probability: r.accept_probability,
                    expected_accept: r.expected_accept,
                    state_fidelity: r.state_fidelity,
                    passed: r.passed,
                };
                SqrngStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}
