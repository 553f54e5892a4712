use std::ffi::{c_char, c_void, CStr, CString};
use std::process::Command;
use std::ptr;

use mts_ffi::*;

unsafe extern "C" fn collect(user: *mut c_void, data: *const c_char, len: usize) {
    let buf = &mut *(user as *mut Vec<u8>);
    buf.extend_from_slice(std::slice::from_raw_parts(data.cast::<u8>(), len));
}

fn last_error() -> String {
    let p = mts_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn new_run(app: &str, input: &str) -> *mut MtsRun {
    let (app, input) = (CString::new(app).unwrap(), CString::new(input).unwrap());
    let mut st = MtsStatus::Internal;
    let run = unsafe { mts_run_new(app.as_ptr(), input.as_ptr(), &mut st) };
    assert_eq!(st, MtsStatus::Ok);
    assert!(!run.is_null());
    run
}

fn set(run: *mut MtsRun, name: &str, value: Option<&str>) -> MtsStatus {
    let name = CString::new(name).unwrap();
    let value = value.map(|v| CString::new(v).unwrap());
    unsafe { mts_run_set_option(run, name.as_ptr(), value.as_ref().map_or(ptr::null(), |v| v.as_ptr())) }
}

fn execute(run: *mut MtsRun, workers: u32) -> (MtsStatus, u64, String) {
    let mut buf: Vec<u8> = Vec::new();
    let mut total = 0u64;
    unsafe {
        assert_eq!(
            mts_run_set_output(run, Some(collect), (&mut buf as *mut Vec<u8>).cast()),
            MtsStatus::Ok
        );
        let st = mts_run_execute(run, workers, &mut total);
        (st, total, String::from_utf8(buf).unwrap())
    }
}

#[test]
fn standalone_and_parallel_runs_agree() {
    let run = new_run("topsort", "4 1\n1 2\n");
    let (st, total, out) = execute(run, 0);
    assert_eq!(st, MtsStatus::Ok);
    assert_eq!(total, 12);
    assert!(out.contains("number of permutations=12"), "{out}");
    let mut a: Vec<_> = out.lines().filter(|l| l.contains("d=")).collect();

    assert_eq!(set(run, "-maxnodes", Some("2")), MtsStatus::Ok);
    let (st, total, out2) = execute(run, 3);
    assert_eq!((st, total), (MtsStatus::Ok, 12));
    let mut b: Vec<_> = out2.lines().filter(|l| l.contains("d=")).collect();
    a.sort();
    b.sort();
    assert_eq!(a, b);
    unsafe { mts_run_free(run) };
}

#[test]
fn spantree_count_only() {
    let run = new_run("spantree", "4 6\n1 2\n1 3\n1 4\n2 3\n2 4\n3 4\n");
    assert_eq!(set(run, "-countonly", None), MtsStatus::Ok);
    let (st, total, out) = execute(run, 2);
    assert_eq!((st, total), (MtsStatus::Ok, 16));
    assert_eq!(out.trim(), "number of spanning trees=16");
    unsafe { mts_run_free(run) };
}

#[test]
fn errors_are_reported() {
    let app = CString::new("lrs").unwrap();
    let input = CString::new("1 0").unwrap();
    let mut st = MtsStatus::Ok;
    let run = unsafe { mts_run_new(app.as_ptr(), input.as_ptr(), &mut st) };
    assert!(run.is_null());
    assert_eq!(st, MtsStatus::UnknownApp);
    assert!(last_error().contains("lrs"));

    let run = unsafe { mts_run_new(ptr::null(), input.as_ptr(), &mut st) };
    assert!(run.is_null());
    assert_eq!(st, MtsStatus::NullArgument);

    let run = new_run("topsort", "3 1\n2 1\n");
    assert_eq!(set(run, "-maxnodes", Some("0")), MtsStatus::InvalidOption);
    assert!(last_error().contains("-maxnodes"), "{}", last_error());
    assert_eq!(set(run, "-bogus", None), MtsStatus::InvalidOption);
    assert_eq!(set(run, "--workers", Some("2")), MtsStatus::InvalidOption);
    let (st, _, _) = execute(run, 0);
    assert_eq!(st, MtsStatus::InvalidInput);
    assert!(last_error().contains("(2, 1)"), "{}", last_error());
    unsafe {
        assert_eq!(
            mts_run_execute(ptr::null_mut(), 0, ptr::null_mut()),
            MtsStatus::NullArgument
        );
        mts_run_free(run);
        mts_run_free(ptr::null_mut());
    }
}

#[test]
fn budget_rule() {
    let (mut d, mut n) = (99, 99);
    unsafe {
        assert_eq!(mts_next_budget(0, 4, 2, 5000, 40, 1, 3, &mut d, &mut n), MtsStatus::Ok);
        assert_eq!((d, n), (2, 5000));
        assert_eq!(mts_next_budget(8, 4, 2, 5000, 40, 1, 3, &mut d, &mut n), MtsStatus::Ok);
        assert_eq!((d, n), (0, 5000));
        assert_eq!(mts_next_budget(13, 4, 2, 5000, 40, 1, 3, &mut d, &mut n), MtsStatus::Ok);
        assert_eq!((d, n), (0, 200000));
        assert_eq!(
            mts_next_budget(1, 4, 2, 5000, 40, 3, 1, &mut d, &mut n),
            MtsStatus::InvalidOption
        );
        assert_eq!(
            mts_next_budget(1, 4, 2, 5000, 40, 1, 3, ptr::null_mut(), &mut n),
            MtsStatus::NullArgument
        );
    }
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(mts_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

// Compiles a small C program against the generated header and the static
// library, when a C compiler is available.
#[test]
fn c_program_links_against_header() {
    let Ok(cc) = Command::new("cc").arg("--version").output() else {
        eprintln!("no C compiler; skipping");
        return;
    };
    assert!(cc.status.success());
    let root = std::path::Path::new(env!("CARGO_MANIFEST_DIR"));
    let target = root
        .join("../../target")
        .join(if cfg!(debug_assertions) { "debug" } else { "release" });
    let lib = target.join("libmts_ffi.a");
    if !lib.exists() {
        eprintln!("{} not built; skipping", lib.display());
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let exe = dir.path().join("smoke");
    let status = Command::new("cc")
        .arg(root.join("tests/smoke.c"))
        .arg("-I")
        .arg(root.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "total=16 trees=16");
}
