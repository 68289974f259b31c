use std::ffi::{CStr, CString};
use std::ptr;

use basislift_ffi::*;

fn matrix(rows: usize, cols: usize, entries: &[i64]) -> *mut BlMatrix {
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { bl_matrix_new(rows, cols, entries.as_ptr(), &mut m) }, BlStatus::Ok);
    m
}

fn modulus(p: u64, nu: u32) -> *mut BlModulus {
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { bl_modulus_new(p, nu, &mut m) }, BlStatus::Ok);
    m
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(bl_last_error_message()) }.to_string_lossy().into_owned()
}

#[test]
fn finite_lift_round_trip() {
    let a = matrix(2, 2, &[3, 4, 1, 3]);
    let md = modulus(2, 3);
    let mut lift = ptr::null_mut();
    unsafe {
        assert_eq!(bl_lift_finite(a, md, &mut lift), BlStatus::Ok);
        assert_eq!(bl_lift_rows(lift), 2);
        let mut report = BlVerifyReport::default();
        assert_eq!(bl_lift_verify(lift, &mut report), BlStatus::Ok);
        assert!(report.all_ok && report.unimodular_ok && report.congruence_failures == 0);

        let mut basis = ptr::null_mut();
        assert_eq!(bl_lift_basis(lift, &mut basis), BlStatus::Ok);
        let mut u = 0i64;
        let mut y = 0i64;
        let mut x = 0i64;
        for row in 0..2 {
            assert_eq!(bl_lift_unit(lift, row, &mut u), BlStatus::Ok);
            for col in 0..2 {
                bl_matrix_get(basis, row, col, &mut y);
                bl_matrix_get(a, row, col, &mut x);
                assert_eq!((y - u * x).rem_euclid(8), 0);
            }
        }
        let mut pivot = 9usize;
        assert_eq!(bl_lift_pivot(lift, 0, &mut pivot), BlStatus::Ok);
        assert!(pivot < 2);
        assert_eq!(bl_lift_unit(lift, 5, &mut u), BlStatus::InvalidArgument);

        let json = bl_lift_to_json(lift);
        let text = CStr::from_ptr(json).to_str().unwrap().to_owned();
        bl_string_free(json);
        assert!(text.contains("\"engine\": \"finite\"") || text.contains("\"engine\":\"finite\""), "{text}");

        bl_matrix_free(basis);
        bl_lift_free(lift);
        bl_matrix_free(a);
        bl_modulus_free(md);
    }
}

#[test]
fn stream_handle() {
    let a = matrix(3, 3, &[1, 2, 0, 0, 1, 5, 4, 0, 1]);
    let md = modulus(5, 2);
    let mut s = ptr::null_mut();
    unsafe {
        assert_eq!(bl_stream_new(a, md, BlExtension::Identity, &mut s), BlStatus::Ok);
        assert_eq!(bl_stream_step(s), BlStatus::Ok);
        assert_eq!(bl_stream_loops(s), 1);
        let mut lift = ptr::null_mut();
        assert_eq!(bl_stream_run_until(s, 3, 12, &mut lift), BlStatus::Ok);
        assert!(bl_stream_stable_prefix(s) >= 3);
        let mut report = BlVerifyReport::default();
        assert_eq!(bl_lift_verify(lift, &mut report), BlStatus::Ok);
        assert!(report.all_ok);
        bl_lift_free(lift);
        bl_stream_free(s);

        let mut lift = ptr::null_mut();
        assert_eq!(bl_lift_stream(a, md, &mut lift), BlStatus::Ok);
        assert_eq!(bl_lift_rows(lift), 3);
        bl_lift_free(lift);
        bl_matrix_free(a);
        bl_modulus_free(md);
    }
}

#[test]
fn error_codes() {
    let mut md = ptr::null_mut();
    unsafe {
        assert_eq!(bl_modulus_new(6, 1, &mut md), BlStatus::NotPrime);
        assert!(md.is_null());
        assert_eq!(bl_modulus_from_prime_power(12, &mut md), BlStatus::NotAPrimePower);
        assert_eq!(bl_modulus_from_prime_power(27, &mut md), BlStatus::Ok);
        let mut q = 0;
        assert_eq!(bl_modulus_value(md, &mut q), BlStatus::Ok);
        assert_eq!(q, 27);

        let a = matrix(2, 2, &[3, 0, 0, 1]);
        let mut lift = ptr::null_mut();
        assert_eq!(bl_lift_finite(a, md, &mut lift), BlStatus::NotABasisModP);
        assert!(last_error().contains("row 0"), "{}", last_error());
        assert_eq!(bl_lift_finite(ptr::null(), md, &mut lift), BlStatus::NullPointer);
        let mut m = ptr::null_mut();
        assert_eq!(bl_matrix_new(2, 2, ptr::null(), &mut m), BlStatus::NullPointer);
        assert!(m.is_null());

        let mut s = ptr::null_mut();
        let stuck = matrix(1, 1, &[3]);
        assert_eq!(bl_stream_new(stuck, md, BlExtension::ZeroPadded, &mut s), BlStatus::Ok);
        assert_eq!(bl_stream_run_until(s, 1, 4, &mut lift), BlStatus::NotABasisModP);
        bl_stream_free(s);
        bl_matrix_free(stuck);
        bl_matrix_free(a);
        bl_modulus_free(md);
        bl_modulus_free(ptr::null_mut());
    }
}

#[test]
fn overflow_and_parse() {
    let text = CString::new("1 2\n99999999999999999999999 1\n").unwrap();
    let mut m = ptr::null_mut();
    unsafe {
        assert_eq!(bl_matrix_parse(text.as_ptr(), &mut m), BlStatus::Ok);
        assert_eq!((bl_matrix_rows(m), bl_matrix_cols(m)), (1, 2));
        let mut x = 0;
        assert_eq!(bl_matrix_get(m, 0, 0, &mut x), BlStatus::Overflow);
        assert_eq!(bl_matrix_get(m, 0, 1, &mut x), BlStatus::Ok);
        assert_eq!(x, 1);
        assert_eq!(bl_matrix_get(m, 1, 0, &mut x), BlStatus::InvalidArgument);
        let s = bl_matrix_to_string(m);
        assert_eq!(CStr::from_ptr(s).to_str().unwrap(), "1 2\n99999999999999999999999 1\n");
        bl_string_free(s);
        bl_matrix_free(m);

        let bad = CString::new("2 2\n1 x\n").unwrap();
        let mut m = ptr::null_mut();
        assert_eq!(bl_matrix_parse(bad.as_ptr(), &mut m), BlStatus::ParseError);
    }
}

#[test]
fn header_declares_every_export() {
    let header = include_str!("../include/basislift.h");
    let source = include_str!("../src/lib.rs");
    let mut count = 0;
    for line in source.lines() {
        if let Some(rest) = line.split("extern \"C\" fn ").nth(1) {
            let name = rest.split('(').next().unwrap();
            assert!(header.contains(&format!("{name}(")), "{name} missing from header");
            count += 1;
        }
    }
    assert!(count > 20);
}

// Compiles examples/smoke.c against the static library when a C compiler is
// on PATH.
#[test]
fn c_smoke_program() {
    use std::path::PathBuf;
    use std::process::Command;

    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    if Command::new(&cc).arg("--version").output().is_err() {
        eprintln!("skipping: no C compiler");
        return;
    }
    let crate_dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let target = std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf();
    let lib = target.join("libbasislift_ffi.a");
    if !lib.exists() {
        eprintln!("skipping: {} not built", lib.display());
        return;
    }
    let exe = target.join("basislift_smoke");
    let status = Command::new(&cc)
        .args(["-std=c99", "-Wall", "-Werror", "-o"])
        .arg(&exe)
        .arg(crate_dir.join("examples/smoke.c"))
        .arg("-I")
        .arg(crate_dir.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm"])
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "exit {:?}", out.status);
    assert!(String::from_utf8_lossy(&out.stdout).contains("basislift-lift/1"));
}
