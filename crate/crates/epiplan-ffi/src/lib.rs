//! C bindings for the epiplan pipeline.
//!
//! The interface follows the usual C-library conventions: callers hold
//! opaque handles ([`EpConfig`], [`EpSession`]), every fallible call returns
//! an [`EpStatus`] code, and the message for the most recent failure on the
//! current thread is available through [`ep_last_error_message`]. Results
//! are written through caller-supplied out-pointers.
//!
//! Handles are not synchronised; sharing one handle across threads requires
//! external locking. Distinct handles are independent. Every entry point
//! catches panics and reports them as [`EpStatus::Panic`] instead of
//! unwinding across the boundary.
//!
//! The build script regenerates `include/epiplan.h` from this file with
//! cbindgen whenever it changes.

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::os::raw::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use epiplan::config::RunConfig;
use epiplan::pipeline::{run_baseline, BaselineAgent, Session};
use epiplan::{storage, Error};

/// Status code returned by every fallible function.
///
/// Anything other than `Ok` leaves a human-readable explanation in
/// [`ep_last_error_message`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EpStatus {
    /// The call succeeded.
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// A configuration key or value was rejected.
    InvalidConfig = 3,
    /// An argument was structurally valid but unusable (bad agent name,
    /// malformed track, dimension mismatch).
    InvalidInput = 4,
    /// The operation needs state that has not been built yet, such as
    /// training before the collection phases have run.
    MissingData = 5,
    /// Reading or writing an artifact failed.
    Io = 6,
    /// A panic was caught at the boundary; this indicates a bug.
    Panic = 7,
}

/// Evaluation results, mirroring the pipeline's metrics line.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpMetrics {
    /// Fraction of the lap target completed, averaged over evaluation laps.
    pub success_rate: f64,
    /// Mean driving speed in km/h over the evaluation episode.
    pub avg_speed_kmh: f64,
    /// Environment steps stored in memory when the measurement was taken.
    pub env_interactions: u64,
    /// Episodes stored in memory when the measurement was taken.
    pub episodes: u32,
}

/// Opaque run configuration. Create with [`ep_config_new`], adjust with
/// [`ep_config_set`], release with [`ep_config_free`].
pub struct EpConfig {
    inner: RunConfig,
}

/// Opaque pipeline session: episodic memory, encoder, and latent grid for
/// one configuration. Create with [`ep_session_new`], drive through the
/// phase functions, release with [`ep_session_free`].
pub struct EpSession {
    inner: Session,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(message: &str) {
    let sanitized: Vec<u8> = message.bytes().filter(|&b| b != 0).collect();
    let owned = CString::new(sanitized).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = owned);
}

fn status_for(err: &Error) -> EpStatus {
    match err {
        Error::InvalidConfig(_) | Error::UnknownConfigKey(_) => EpStatus::InvalidConfig,
        Error::TrackGeneration(_)
        | Error::InvalidTrack(_)
        | Error::EpisodeDone
        | Error::DimensionMismatch(_) => EpStatus::InvalidInput,
        Error::EmptyInput(_) | Error::EmptyGrid | Error::NotFound(_) => EpStatus::MissingData,
        Error::VersionMismatch { .. } | Error::Parse { .. } | Error::Io { .. } => EpStatus::Io,
    }
}

fn report(err: Error) -> EpStatus {
    let status = status_for(&err);
    set_last_error(&err.to_string());
    status
}

/// Runs `body` with panics converted to [`EpStatus::Panic`].
fn guard(body: impl FnOnce() -> EpStatus) -> EpStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".to_string());
            set_last_error(&format!("internal panic: {msg}"));
            EpStatus::Panic
        }
    }
}

/// Converts a required C string argument, reporting null/UTF-8 failures.
///
/// # Safety
/// `ptr` must be null or point to a NUL-terminated string.
unsafe fn required_str<'a>(ptr: *const c_char, what: &str) -> Result<&'a str, EpStatus> {
    if ptr.is_null() {
        set_last_error(&format!("{what} must not be null"));
        return Err(EpStatus::NullArgument);
    }
    match CStr::from_ptr(ptr).to_str() {
        Ok(s) => Ok(s),
        Err(_) => {
            set_last_error(&format!("{what} is not valid UTF-8"));
            Err(EpStatus::InvalidUtf8)
        }
    }
}

macro_rules! require_nonnull {
    ($ptr:expr, $what:literal) => {
        match unsafe { $ptr.as_ref() } {
            Some(r) => r,
            None => {
                set_last_error(concat!($what, " must not be null"));
                return EpStatus::NullArgument;
            }
        }
    };
}

macro_rules! require_nonnull_mut {
    ($ptr:expr, $what:literal) => {
        match unsafe { $ptr.as_mut() } {
            Some(r) => r,
            None => {
                set_last_error(concat!($what, " must not be null"));
                return EpStatus::NullArgument;
            }
        }
    };
}

/// Returns the library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ep_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Returns the message for the most recent failure on the calling thread,
/// or an empty string if nothing has failed yet.
///
/// The pointer stays valid until the next epiplan call on this thread.
#[no_mangle]
pub extern "C" fn ep_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Allocates a configuration populated with the library defaults.
///
/// Returns null only if allocation fails. Free with [`ep_config_free`].
#[no_mangle]
pub extern "C" fn ep_config_new() -> *mut EpConfig {
    Box::into_raw(Box::new(EpConfig {
        inner: RunConfig::default(),
    }))
}

/// Releases a configuration. Passing null is a no-op.
///
/// # Safety
/// `config` must be null or a pointer from [`ep_config_new`] that has not
/// been freed.
#[no_mangle]
pub unsafe extern "C" fn ep_config_free(config: *mut EpConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

/// Assigns one configuration key, e.g. `ep_config_set(cfg, "g", "50")`.
///
/// Accepts the same keys and value spellings as the CLI's `--set`.
///
/// # Safety
/// `config` must be a live [`ep_config_new`] pointer; `key` and `value`
/// must be NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn ep_config_set(
    config: *mut EpConfig,
    key: *const c_char,
    value: *const c_char,
) -> EpStatus {
    guard(|| {
        let config = require_nonnull_mut!(config, "config");
        let key = match unsafe { required_str(key, "key") } {
            Ok(s) => s,
            Err(status) => return status,
        };
        let value = match unsafe { required_str(value, "value") } {
            Ok(s) => s,
            Err(status) => return status,
        };
        match config.inner.set(key, value) {
            Ok(()) => EpStatus::Ok,
            Err(e) => report(e),
        }
    })
}

/// Checks the full configuration for consistency, as session creation would.
///
/// # Safety
/// `config` must be a live [`ep_config_new`] pointer.
#[no_mangle]
pub unsafe extern "C" fn ep_config_validate(config: *const EpConfig) -> EpStatus {
    guard(|| {
        let config = require_nonnull!(config, "config");
        match config.inner.validate() {
            Ok(()) => EpStatus::Ok,
            Err(e) => report(e),
        }
    })
}

/// Creates a session from a configuration and stores the handle in `out`.
///
/// The configuration is copied; it may be freed or reused afterwards.
///
/// # Safety
/// `config` must be a live [`ep_config_new`] pointer and `out` a valid
/// destination for one pointer.
#[no_mangle]
pub unsafe extern "C" fn ep_session_new(
    config: *const EpConfig,
    out: *mut *mut EpSession,
) -> EpStatus {
    guard(|| {
        let config = require_nonnull!(config, "config");
        let out = require_nonnull_mut!(out, "out");
        match Session::new(config.inner.clone()) {
            Ok(session) => {
                *out = Box::into_raw(Box::new(EpSession { inner: session }));
                EpStatus::Ok
            }
            Err(e) => report(e),
        }
    })
}

/// Releases a session. Passing null is a no-op.
///
/// # Safety
/// `session` must be null or a pointer from [`ep_session_new`] that has not
/// been freed.
#[no_mangle]
pub unsafe extern "C" fn ep_session_free(session: *mut EpSession) {
    if !session.is_null() {
        drop(Box::from_raw(session));
    }
}

/// Phase 1: collects straight-driving episodes on the training tracks.
///
/// # Safety
/// `session` must be a live [`ep_session_new`] pointer.
#[no_mangle]
pub unsafe extern "C" fn ep_session_phase1(session: *mut EpSession) -> EpStatus {
    guard(|| {
        let session = require_nonnull_mut!(session, "session");
        match session.inner.phase1() {
            Ok(()) => EpStatus::Ok,
            Err(e) => report(e),
        }
    })
}

/// Phase 2: explores states the phase-1 memory marks unsafe.
///
/// Fails with [`EpStatus::MissingData`] until phase 1 has run.
///
/// # Safety
/// `session` must be a live [`ep_session_new`] pointer.
#[no_mangle]
pub unsafe extern "C" fn ep_session_phase2(session: *mut EpSession) -> EpStatus {
    guard(|| {
        let session = require_nonnull_mut!(session, "session");
        match session.inner.phase2() {
            Ok(()) => EpStatus::Ok,
            Err(e) => report(e),
        }
    })
}

/// Phase 3: planner-driven training episodes.
///
/// On success, writes the final episode's training success percentage to
/// `final_success_pct` when that pointer is non-null. Fails with
/// [`EpStatus::MissingData`] until the collection phases have run.
///
/// # Safety
/// `session` must be a live [`ep_session_new`] pointer; `final_success_pct`
/// must be null or a valid destination for one double.
#[no_mangle]
pub unsafe extern "C" fn ep_session_train(
    session: *mut EpSession,
    final_success_pct: *mut f64,
) -> EpStatus {
    guard(|| {
        let session = require_nonnull_mut!(session, "session");
        match session.inner.train(None) {
            Ok(curve) => {
                if let Some(out) = unsafe { final_success_pct.as_mut() } {
                    *out = curve.last().map_or(0.0, |point| point.success_pct);
                }
                EpStatus::Ok
            }
            Err(e) => report(e),
        }
    })
}

/// Evaluates the trained planner on the held-out track.
///
/// # Safety
/// `session` must be a live [`ep_session_new`] pointer and `out` a valid
/// destination for one [`EpMetrics`].
#[no_mangle]
pub unsafe extern "C" fn ep_session_evaluate(
    session: *const EpSession,
    out: *mut EpMetrics,
) -> EpStatus {
    guard(|| {
        let session = require_nonnull!(session, "session");
        let out = require_nonnull_mut!(out, "out");
        match session.inner.evaluate() {
            Ok(m) => {
                *out = EpMetrics {
                    success_rate: m.success_rate,
                    avg_speed_kmh: m.avg_speed_kmh,
                    env_interactions: m.env_interactions,
                    episodes: m.episodes,
                };
                EpStatus::Ok
            }
            Err(e) => report(e),
        }
    })
}

/// Runs a memoryless baseline agent (`"random"` or `"centerline"`) on the
/// held-out track using the session's configuration.
///
/// # Safety
/// `config` must be a live [`ep_config_new`] pointer, `agent` a
/// NUL-terminated string, and `out` a valid destination for one
/// [`EpMetrics`].
#[no_mangle]
pub unsafe extern "C" fn ep_baseline_run(
    config: *const EpConfig,
    agent: *const c_char,
    out: *mut EpMetrics,
) -> EpStatus {
    guard(|| {
        let config = require_nonnull!(config, "config");
        let out = require_nonnull_mut!(out, "out");
        let agent = match unsafe { required_str(agent, "agent") } {
            Ok(s) => s,
            Err(status) => return status,
        };
        let Some(agent) = BaselineAgent::from_str(agent) else {
            set_last_error(&format!(
                "unknown baseline agent `{agent}` (expected `random` or `centerline`)"
            ));
            return EpStatus::InvalidInput;
        };
        match run_baseline(&config.inner, agent) {
            Ok(m) => {
                *out = EpMetrics {
                    success_rate: m.success_rate,
                    avg_speed_kmh: m.avg_speed_kmh,
                    env_interactions: m.env_interactions,
                    episodes: m.episodes,
                };
                EpStatus::Ok
            }
            Err(e) => report(e),
        }
    })
}

/// Writes the session's artifacts (`config.txt`, `db.txt`, `masks.txt`,
/// `encoder.txt`) into `dir`, creating it if necessary. The files use the
/// same formats as the CLI, so a saved session can be picked up there.
///
/// # Safety
/// `session` must be a live [`ep_session_new`] pointer and `dir` a
/// NUL-terminated path.
#[no_mangle]
pub unsafe extern "C" fn ep_session_save(
    session: *const EpSession,
    dir: *const c_char,
) -> EpStatus {
    guard(|| {
        let session = require_nonnull!(session, "session");
        let dir = match unsafe { required_str(dir, "dir") } {
            Ok(s) => Path::new(s),
            Err(status) => return status,
        };
        let result = session
            .inner
            .cfg()
            .save(&dir.join("config.txt"))
            .and_then(|()| {
                storage::save_db(
                    session.inner.db(),
                    session.inner.encoder(),
                    &dir.join("db.txt"),
                    &dir.join("masks.txt"),
                )
            })
            .and_then(|()| storage::save_encoder(session.inner.encoder(), &dir.join("encoder.txt")));
        match result {
            Ok(()) => EpStatus::Ok,
            Err(e) => report(e),
        }
    })
}
