//! C interface to the scenario runner.
//!
//! Every call returns a [`MeaningStatus`]. On failure the message is kept per
//! thread and can be read with [`meaning_last_error`]. Handles are opaque and
//! must be released with their `_free` function. Strings returned to the
//! caller are released with [`meaning_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use meaning_core::error::{Error, ErrorKind};
use meaning_core::scenario::Scenario;
use meaning_core::sim::{run_episode, EpisodeReport, VERSION};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeaningStatus {
    Ok = 0,
    Io = 1,
    InvalidArgument = 2,
    Parse = 3,
    Domain = 4,
    ResourceLimit = 5,
    NotApplicable = 6,
    Internal = 7,
}

/// A parsed scenario.
pub struct MeaningScenario {
    inner: Scenario,
}

/// The result of running a scenario's episode.
pub struct MeaningEpisode {
    inner: EpisodeReport,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> MeaningStatus {
    match err.kind() {
        ErrorKind::Io => MeaningStatus::Io,
        ErrorKind::Parse => MeaningStatus::Parse,
        ErrorKind::Domain => MeaningStatus::Domain,
        ErrorKind::ResourceLimit => MeaningStatus::ResourceLimit,
        ErrorKind::NotApplicable => MeaningStatus::NotApplicable,
        ErrorKind::Internal => MeaningStatus::Internal,
    }
}

enum Failure {
    Core(Error),
    Arg(&'static str),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> MeaningStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            MeaningStatus::Ok
        }
        Ok(Err(Failure::Core(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Ok(Err(Failure::Arg(msg))) => {
            set_error(msg.to_string());
            MeaningStatus::InvalidArgument
        }
        Err(_) => {
            set_error("internal panic".to_string());
            MeaningStatus::Internal
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &'static str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::Arg(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Failure::Arg("string is not UTF-8"))
}

unsafe fn out_ptr<'a, T>(p: *mut T) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or(Failure::Arg("null output pointer"))
}

/// Message of the last call on this thread if it failed, otherwise null.
/// Valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn meaning_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn meaning_version() -> *const c_char {
    static V: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    debug_assert_eq!(&V[..V.len() - 1], VERSION);
    V.as_ptr().cast()
}

/// Parses a scenario from YAML text.
///
/// # Safety
/// `yaml` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn meaning_scenario_from_yaml(yaml: *const c_char, out: *mut *mut MeaningScenario) -> MeaningStatus {
    guard(|| {
        let out = out_ptr(out)?;
        let scn = Scenario::from_yaml(text(yaml, "null yaml")?)?;
        scn.validate()?;
        *out = Box::into_raw(Box::new(MeaningScenario { inner: scn }));
        Ok(())
    })
}

/// Reads and parses a scenario file.
///
/// # Safety
/// `path` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn meaning_scenario_from_path(path: *const c_char, out: *mut *mut MeaningScenario) -> MeaningStatus {
    guard(|| {
        let out = out_ptr(out)?;
        let scn = Scenario::from_path(text(path, "null path")?)?;
        scn.validate()?;
        *out = Box::into_raw(Box::new(MeaningScenario { inner: scn }));
        Ok(())
    })
}

/// # Safety
/// `scn` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn meaning_scenario_free(scn: *mut MeaningScenario) {
    if !scn.is_null() {
        drop(Box::from_raw(scn));
    }
}

/// # Safety
/// `scn` must be a live scenario handle.
#[no_mangle]
pub unsafe extern "C" fn meaning_scenario_set_seed(scn: *mut MeaningScenario, seed: u64) -> MeaningStatus {
    guard(|| {
        out_ptr(scn)?.inner.seed = seed;
        Ok(())
    })
}

/// Number of statements in the language of `organism`, or of the whole
/// scenario when `organism` is null.
///
/// # Safety
/// `scn` must be a live handle, `organism` null or a NUL-terminated string,
/// `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn meaning_scenario_language_size(
    scn: *const MeaningScenario,
    organism: *const c_char,
    out: *mut usize,
) -> MeaningStatus {
    guard(|| {
        let scn = scn.as_ref().ok_or(Failure::Arg("null scenario"))?;
        let out = out_ptr(out)?;
        let built = scn.inner.build()?;
        *out = if organism.is_null() {
            built.full.len()
        } else {
            built.organism(text(organism, "null organism")?)?.language().len()
        };
        Ok(())
    })
}

/// Runs the scenario's episode.
///
/// # Safety
/// `scn` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn meaning_episode_run(scn: *const MeaningScenario, out: *mut *mut MeaningEpisode) -> MeaningStatus {
    guard(|| {
        let scn = scn.as_ref().ok_or(Failure::Arg("null scenario"))?;
        let out = out_ptr(out)?;
        let report = run_episode(&scn.inner)?;
        *out = Box::into_raw(Box::new(MeaningEpisode { inner: report }));
        Ok(())
    })
}

/// # Safety
/// `ep` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn meaning_episode_free(ep: *mut MeaningEpisode) {
    if !ep.is_null() {
        drop(Box::from_raw(ep));
    }
}

unsafe fn episode<'a>(ep: *const MeaningEpisode) -> Result<&'a EpisodeReport, Failure> {
    ep.as_ref().map(|e| &e.inner).ok_or(Failure::Arg("null episode"))
}

/// Steps, spoken steps, affected steps and meant steps.
///
/// # Safety
/// `ep` must be a live handle; each output pointer may be null.
#[no_mangle]
pub unsafe extern "C" fn meaning_episode_counts(
    ep: *const MeaningEpisode,
    steps: *mut usize,
    spoken: *mut usize,
    affected: *mut usize,
    meant: *mut usize,
) -> MeaningStatus {
    guard(|| {
        let m = &episode(ep)?.metrics;
        for (p, v) in [(steps, m.steps), (spoken, m.spoken), (affected, m.affected), (meant, m.meant)] {
            if let Some(p) = p.as_mut() {
                *p = v;
            }
        }
        Ok(())
    })
}

unsafe fn rate(ep: *const MeaningEpisode, out: *mut f64, pick: fn(&EpisodeReport) -> Option<f64>, what: &str) -> MeaningStatus {
    guard(|| {
        let r = episode(ep)?;
        let out = out_ptr(out)?;
        *out = pick(r).ok_or_else(|| Error::NotApplicable(format!("{what} is undefined for this episode")))?;
        Ok(())
    })
}

/// Matched over spoken steps. `MEANING_STATUS_NOT_APPLICABLE` if nothing was said.
///
/// # Safety
/// `ep` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn meaning_episode_match_rate(ep: *const MeaningEpisode, out: *mut f64) -> MeaningStatus {
    rate(ep, out, |r| r.metrics.match_rate, "match rate")
}

/// Meant over affected steps. `MEANING_STATUS_NOT_APPLICABLE` if no one was affected.
///
/// # Safety
/// `ep` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn meaning_episode_meaning_rate(ep: *const MeaningEpisode, out: *mut f64) -> MeaningStatus {
    rate(ep, out, |r| r.metrics.meaning_rate, "meaning rate")
}

/// The full episode report as JSON. Free with [`meaning_string_free`].
///
/// # Safety
/// `ep` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn meaning_episode_to_json(ep: *const MeaningEpisode, out: *mut *mut c_char) -> MeaningStatus {
    guard(|| {
        let r = episode(ep)?;
        let out = out_ptr(out)?;
        let json = serde_json::to_string(r).map_err(|e| Error::Internal(e.to_string()))?;
        *out = CString::new(json).map_err(|e| Error::Internal(e.to_string()))?.into_raw();
        Ok(())
    })
}

/// # Safety
/// `s` must be null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn meaning_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
