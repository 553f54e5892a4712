//! C interface to the enumeration framework.
//!
//! A run is configured through an opaque `MtsRun` handle and executed with
//! `mts_run_execute`. Every function returns an `MtsStatus`; on failure a
//! description is available from `mts_last_error` on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, c_void, CStr, CString};
use std::io::{self, Write};
use std::panic::{self, AssertUnwindSafe};
use std::ptr;

use mts::app::AppKind;
use mts::cli::{self, parse_args};
use mts::scheduler::{next_budget, Params};

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MtsStatus {
    Ok = 0,
    /// A required pointer was null or a string was not UTF-8.
    NullArgument = 1,
    UnknownApp = 2,
    /// Unknown option, missing or invalid option value.
    InvalidOption = 3,
    /// The input could not be parsed or the run could not be set up.
    InvalidInput = 4,
    /// Emergency stop or worker failure.
    Aborted = 5,
    /// A clean stop was honored before the enumeration finished.
    Stopped = 6,
    /// An internal error; the handle should be freed.
    Internal = 7,
}

/// Receives output bytes; `data` is valid only during the call.
pub type MtsOutputFn = Option<unsafe extern "C" fn(user: *mut c_void, data: *const c_char, len: usize)>;

/// A configured run.
pub struct MtsRun {
    app: AppKind,
    input: Vec<u8>,
    options: Vec<String>,
    output: MtsOutputFn,
    user: *mut c_void,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

unsafe fn str_arg<'a>(p: *const c_char) -> Result<&'a str, MtsStatus> {
    if p.is_null() {
        set_error("null pointer argument");
        return Err(MtsStatus::NullArgument);
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        set_error("argument is not valid UTF-8");
        MtsStatus::NullArgument
    })
}

fn guard(f: impl FnOnce() -> MtsStatus) -> MtsStatus {
    panic::catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| {
        set_error("internal panic");
        MtsStatus::Internal
    })
}

/// Creates a run of application `app` ("topsort" or "spantree") on the
/// NUL-terminated input text. Returns null on failure, with the reason in
/// `*status` when `status` is not null.
///
/// # Safety
/// `app` and `input` must be null or valid NUL-terminated strings; `status`
/// must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mts_run_new(app: *const c_char, input: *const c_char, status: *mut MtsStatus) -> *mut MtsRun {
    clear_error();
    let mut handle = ptr::null_mut();
    let st = guard(|| {
        let (app, input) = match (str_arg(app), str_arg(input)) {
            (Ok(a), Ok(i)) => (a, i),
            (Err(e), _) | (_, Err(e)) => return e,
        };
        let kind = match AppKind::from_name(app) {
            Ok(k) => k,
            Err(e) => {
                set_error(e.to_string());
                return MtsStatus::UnknownApp;
            }
        };
        handle = Box::into_raw(Box::new(MtsRun {
            app: kind,
            input: input.as_bytes().to_vec(),
            options: Vec::new(),
            output: None,
            user: ptr::null_mut(),
        }));
        MtsStatus::Ok
    });
    if !status.is_null() {
        *status = st;
    }
    handle
}

/// Sets a framework or application option such as "-maxnodes" or
/// "-countonly". `value` is null for options without a parameter.
///
/// # Safety
/// `run` must come from `mts_run_new`; strings as for `mts_run_new`.
#[no_mangle]
pub unsafe extern "C" fn mts_run_set_option(run: *mut MtsRun, name: *const c_char, value: *const c_char) -> MtsStatus {
    clear_error();
    guard(|| {
        let Some(run) = run.as_mut() else {
            set_error("null run handle");
            return MtsStatus::NullArgument;
        };
        let name = match str_arg(name) {
            Ok(n) => n,
            Err(e) => return e,
        };
        if !name.starts_with('-') || name.starts_with("--") {
            set_error(format!("unknown option {name}"));
            return MtsStatus::InvalidOption;
        }
        let mut tokens = run.options.clone();
        tokens.push(name.to_string());
        if !value.is_null() {
            match str_arg(value) {
                Ok(v) => tokens.push(v.to_string()),
                Err(e) => return e,
            }
        }
        let mut argv = vec![run.app.name().to_string()];
        argv.extend(tokens.iter().cloned());
        match parse_args(&argv) {
            Ok(cli::Command::Run(_)) => {
                run.options = tokens;
                MtsStatus::Ok
            }
            Ok(_) => {
                set_error(format!("unexpected option {name}"));
                MtsStatus::InvalidOption
            }
            Err(e) => {
                set_error(e.to_string());
                MtsStatus::InvalidOption
            }
        }
    })
}

/// Installs the output callback. Without one, output is discarded.
///
/// # Safety
/// `run` must come from `mts_run_new`. `user` is passed back verbatim.
#[no_mangle]
pub unsafe extern "C" fn mts_run_set_output(run: *mut MtsRun, callback: MtsOutputFn, user: *mut c_void) -> MtsStatus {
    clear_error();
    let Some(run) = run.as_mut() else {
        set_error("null run handle");
        return MtsStatus::NullArgument;
    };
    run.output = callback;
    run.user = user;
    MtsStatus::Ok
}

struct CallbackWriter {
    f: MtsOutputFn,
    user: *mut c_void,
}

impl Write for CallbackWriter {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        if let Some(f) = self.f {
            // SAFETY: the caller promised a valid callback for the run's lifetime.
            unsafe { f(self.user, buf.as_ptr().cast(), buf.len()) };
        }
        Ok(buf.len())
    }
    fn flush(&mut self) -> io::Result<()> {
        Ok(())
    }
}

/// Runs the enumeration. `workers == 0` runs standalone in the calling
/// thread; otherwise a master drives that many worker threads. The node
/// total (root included) is stored in `*total` when not null.
///
/// # Safety
/// `run` must come from `mts_run_new`; `total` must be null or valid for
/// writes.
#[no_mangle]
pub unsafe extern "C" fn mts_run_execute(run: *mut MtsRun, workers: u32, total: *mut u64) -> MtsStatus {
    clear_error();
    guard(|| {
        let Some(run) = run.as_ref() else {
            set_error("null run handle");
            return MtsStatus::NullArgument;
        };
        let mut argv = vec![run.app.name().to_string()];
        argv.extend(run.options.iter().cloned());
        if workers > 0 {
            argv.extend(["--workers".to_string(), workers.to_string()]);
        }
        argv.push("-".into());
        let mut out = CallbackWriter {
            f: run.output,
            user: run.user,
        };
        let mut err = Vec::new();
        let report = cli::run_command(&argv, &mut run.input.as_slice(), &mut out, &mut err);
        if let (Some(t), false) = (report.total_nodes, total.is_null()) {
            *total = t;
        }
        let status = match report.code {
            cli::EXIT_OK => MtsStatus::Ok,
            cli::EXIT_USAGE => MtsStatus::InvalidInput,
            cli::EXIT_ABORT => MtsStatus::Aborted,
            cli::EXIT_STOPPED => MtsStatus::Stopped,
            _ => MtsStatus::Internal,
        };
        if status != MtsStatus::Ok {
            let msg = String::from_utf8_lossy(&err);
            let first = msg.lines().next().unwrap_or("run failed");
            set_error(first.strip_prefix("mts: ").unwrap_or(first));
        }
        status
    })
}

/// Frees a run handle. Null is ignored.
///
/// # Safety
/// `run` must be null or come from `mts_run_new`, and not be used again.
#[no_mangle]
pub unsafe extern "C" fn mts_run_free(run: *mut MtsRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}

/// The scheduler's budget rule. `max_depth == 0` means unbounded on input
/// and output.
///
/// # Safety
/// `out_depth` and `out_nodes` must be valid for writes.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn mts_next_budget(
    joblist_size: u64,
    workers: u64,
    max_depth: u64,
    max_nodes: u64,
    scale: u64,
    lmin: u64,
    lmax: u64,
    out_depth: *mut u64,
    out_nodes: *mut u64,
) -> MtsStatus {
    clear_error();
    if out_depth.is_null() || out_nodes.is_null() {
        set_error("null output pointer");
        return MtsStatus::NullArgument;
    }
    let p = Params {
        max_depth: (max_depth > 0).then_some(max_depth),
        max_nodes,
        scale,
        lmin,
        lmax,
        ..Params::default()
    };
    if let Err(e) = p.validate() {
        set_error(e.to_string());
        return MtsStatus::InvalidOption;
    }
    if workers == 0 {
        set_error("workers must be positive");
        return MtsStatus::InvalidOption;
    }
    let b = next_budget(joblist_size as usize, workers as usize, &p);
    *out_depth = b.max_depth().unwrap_or(0);
    *out_nodes = b.max_nodes().unwrap_or(0);
    MtsStatus::Ok
}

/// Description of the last failure on this thread, or null. Valid until
/// the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn mts_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn mts_version() -> *const c_char {
    static VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    VERSION.as_ptr().cast()
}
