use std::ffi::{c_char, CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use lassokit::cset::are_isomorphic;
use lassokit::fixtures::*;
use lassokit::io::*;
use lassokit_ffi::*;

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

/// Takes ownership of a library string.
unsafe fn take(s: *mut c_char) -> String {
    let out = CStr::from_ptr(s).to_str().unwrap().to_owned();
    lk_string_free(s);
    out
}

unsafe fn last_error() -> String {
    let p = lk_last_error();
    assert!(!p.is_null(), "a failed call leaves a message");
    CStr::from_ptr(p).to_string_lossy().into_owned()
}

unsafe fn hom(json: &str) -> *mut LkHom {
    let mut h = ptr::null_mut();
    assert_eq!(lk_hom_from_json(c(json).as_ptr(), &mut h), LkStatus::Ok);
    h
}

unsafe fn decomposition(json: &str) -> *mut LkDecomposition {
    let mut d = ptr::null_mut();
    assert_eq!(lk_decomposition_from_json(c(json).as_ptr(), &mut d), LkStatus::Ok);
    d
}

#[test]
fn instance_round_trip() {
    unsafe {
        let json = instance_to_json(&path3());
        let mut x = ptr::null_mut();
        assert_eq!(lk_instance_from_json(c(&json).as_ptr(), &mut x), LkStatus::Ok);
        let mut s = ptr::null_mut();
        assert_eq!(lk_instance_to_json(x, &mut s), LkStatus::Ok);
        assert_eq!(parse_instance(&take(s)).unwrap(), path3());
        lk_instance_free(x);
    }
}

#[test]
fn contract_with_cc() {
    unsafe {
        let f = hom(&hom_to_json(&path_first_edge()));
        let mut k = ptr::null_mut();
        assert_eq!(lk_contract(f, c("cc").as_ptr(), &mut k), LkStatus::Ok);
        let mut x = ptr::null_mut();
        assert_eq!(lk_contraction_result(k, &mut x), LkStatus::Ok);
        let mut s = ptr::null_mut();
        assert_eq!(lk_instance_to_json(x, &mut s), LkStatus::Ok);
        assert_eq!(parse_instance(&take(s)).unwrap().carriers(), &[2, 2]);
        assert_eq!(lk_contraction_to_json(k, &mut s), LkStatus::Ok);
        assert_eq!(parse_contraction(&take(s)).unwrap().lasso, "cc");
        lk_instance_free(x);
        lk_contraction_free(k);
        lk_hom_free(f);
    }
}

#[test]
fn failures_carry_status_and_message() {
    unsafe {
        let mut x = ptr::null_mut();
        assert_eq!(lk_instance_from_json(c("{").as_ptr(), &mut x), LkStatus::Parse);
        assert!(x.is_null());
        assert!(!last_error().is_empty());

        assert_eq!(lk_instance_from_json(ptr::null(), &mut x), LkStatus::InvalidArgument);
        assert!(last_error().contains("null"));

        let fold = hom(&hom_to_json(&folding_map()));
        let mut k = ptr::null_mut();
        assert_eq!(lk_contract(fold, c("cc").as_ptr(), &mut k), LkStatus::Precondition);
        assert!(last_error().contains('V'));
        assert_eq!(lk_contract(fold, c("nonsense").as_ptr(), &mut k), LkStatus::Parse);
        lk_hom_free(fold);

        // A success clears the message.
        let mut s = ptr::null_mut();
        assert_eq!(lk_check(c("cc").as_ptr(), ptr::null(), 1, 1, false, &mut s), LkStatus::Ok);
        lk_string_free(s);
        assert!(lk_last_error().is_null());
    }
}

#[test]
fn pushforward_pullback_and_colimit() {
    unsafe {
        let d = decomposition(&decomposition_to_json(&path_decomposition()));
        let f = hom(&hom_to_json(&path_first_edge()));
        for method in [LkMethod::Images, LkMethod::Span] {
            let mut out = ptr::null_mut();
            assert_eq!(lk_pushforward(d, f, c("cc").as_ptr(), method, &mut out), LkStatus::Ok);
            let mut x = ptr::null_mut();
            assert_eq!(lk_colimit(out, &mut x), LkStatus::Ok);
            let mut s = ptr::null_mut();
            assert_eq!(lk_instance_to_json(x, &mut s), LkStatus::Ok);
            assert_eq!(parse_instance(&take(s)).unwrap().carriers(), &[2, 2]);
            lk_instance_free(x);
            lk_decomposition_free(out);
        }
        let fold = hom(&hom_to_json(&folding_map()));
        let mut pb = ptr::null_mut();
        assert_eq!(lk_pullback(d, fold, &mut pb), LkStatus::Ok);
        let mut s = ptr::null_mut();
        assert_eq!(lk_decomposition_to_json(pb, &mut s), LkStatus::Ok);
        let pulled = parse_decomposition(&take(s)).unwrap();
        assert_eq!(pulled.bags[0].carrier(0), 3);
        assert_eq!(pulled.bags[1].carrier(0), 2);
        let mut x = ptr::null_mut();
        assert_eq!(lk_colimit(pb, &mut x), LkStatus::Ok);
        assert_eq!(lk_instance_to_json(x, &mut s), LkStatus::Ok);
        assert!(are_isomorphic(&parse_instance(&take(s)).unwrap(), folding_map().dom()));
        lk_instance_free(x);
        lk_decomposition_free(pb);
        lk_hom_free(fold);
        lk_hom_free(f);
        lk_decomposition_free(d);
    }
}

#[test]
fn check_reports_failures_and_bounds() {
    unsafe {
        let mut s = ptr::null_mut();
        let status = lk_check(c("smoothing").as_ptr(), ptr::null(), 2, 3, false, &mut s);
        assert_eq!(status, LkStatus::CheckFailed);
        assert!(take(s).contains("pushout_not_preserved"));
        let status = lk_check(c("rgrph:deloop").as_ptr(), ptr::null(), 2, 3, true, &mut s);
        assert_eq!(status, LkStatus::CheckFailed);
        lk_string_free(s);
        let status = lk_check(c("cc").as_ptr(), c("Grph").as_ptr(), 50, 1, false, &mut s);
        assert_eq!(status, LkStatus::BoundExceeded);
    }
}

#[test]
fn freeing_null_is_harmless() {
    unsafe {
        lk_instance_free(ptr::null_mut());
        lk_hom_free(ptr::null_mut());
        lk_decomposition_free(ptr::null_mut());
        lk_contraction_free(ptr::null_mut());
        lk_string_free(ptr::null_mut());
    }
}

const C_PROGRAM: &str = r#"
#include <stdio.h>
#include <string.h>
#include "lassokit.h"

int main(int argc, char **argv) {
    if (argc != 2) return 10;
    LkHom *sub = NULL;
    if (lk_hom_from_json(argv[1], &sub) != LK_STATUS_OK) return 11;
    LkContraction *c = NULL;
    if (lk_contract(sub, "cc", &c) != LK_STATUS_OK) return 12;
    char *json = NULL;
    if (lk_contraction_to_json(c, &json) != LK_STATUS_OK) return 13;
    if (strstr(json, "\"lasso\"") == NULL) return 14;
    lk_string_free(json);
    LkInstance *bad = NULL;
    if (lk_instance_from_json("[]", &bad) != LK_STATUS_PARSE) return 15;
    if (lk_last_error() == NULL) return 16;
    lk_contraction_free(c);
    lk_hom_free(sub);
    puts("ok");
    return 0;
}
"#;

/// Builds the cdylib, which test runs do not produce, and returns its
/// directory.
fn artifact_dir() -> PathBuf {
    let build = Command::new(env!("CARGO"))
        .args(["build", "--quiet", "-p", "lassokit-ffi", "--lib"])
        .output()
        .expect("cargo runs");
    assert!(build.status.success(), "{}", String::from_utf8_lossy(&build.stderr));
    let exe = std::env::current_exe().unwrap();
    exe.parent().and_then(|deps| deps.parent()).unwrap().to_path_buf()
}

#[test]
fn header_compiles_and_links_from_c() {
    let dir = tempfile::TempDir::new().unwrap();
    let src = dir.path().join("smoke.c");
    std::fs::write(&src, C_PROGRAM).unwrap();
    let include = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include");
    let libdir = artifact_dir();
    assert!(libdir.join("liblassokit_ffi.so").exists(), "cdylib missing in {}", libdir.display());
    let exe = dir.path().join("smoke");
    let build = Command::new("cc")
        .arg(&src)
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(&include)
        .arg("-L")
        .arg(&libdir)
        .arg("-llassokit_ffi")
        .arg("-o")
        .arg(&exe)
        .output()
        .expect("a C compiler is installed");
    assert!(build.status.success(), "{}", String::from_utf8_lossy(&build.stderr));
    let run = Command::new(&exe)
        .arg(hom_to_json(&path_first_edge()))
        .env("LD_LIBRARY_PATH", &libdir)
        .output()
        .unwrap();
    assert_eq!(run.status.code(), Some(0), "{}", String::from_utf8_lossy(&run.stderr));
    assert_eq!(String::from_utf8_lossy(&run.stdout).trim(), "ok");
}
