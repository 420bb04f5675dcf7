use std::ffi::CStr;
use std::process::Command;
use std::ptr;

use quadtrap_ffi::*;

fn last_error() -> String {
    let mut buf = [0 as std::ffi::c_char; 256];
    unsafe { qt_last_error(buf.as_mut_ptr(), buf.len()) };
    unsafe { CStr::from_ptr(buf.as_ptr()) }
        .to_string_lossy()
        .into_owned()
}

#[test]
fn params_round_trip() {
    let mut p = ptr::null_mut();
    assert_eq!(
        unsafe { qt_params_published(QtDeltaSource::Caption, &mut p) },
        QtStatus::Ok
    );
    let mut v = [0.0; 3];
    assert_eq!(unsafe { qt_params_values(p, v.as_mut_ptr()) }, QtStatus::Ok);
    assert_eq!(v[0], 0.502723);
    assert_eq!(v[1], 1.79305e-5);
    assert_eq!(v[2], v[1] / v[0]);
    unsafe { qt_params_free(p) };
}

#[test]
fn bad_params_report_an_error() {
    let mut p = ptr::null_mut();
    assert_eq!(
        unsafe { qt_params_raw(-1.0, 0.0, &mut p) },
        QtStatus::InvalidArgument
    );
    assert!(p.is_null());
    assert!(last_error().contains("sigma"), "{}", last_error());
    assert_eq!(
        unsafe { qt_params_raw(1.0, 0.0, ptr::null_mut()) },
        QtStatus::NullPointer
    );
    assert_eq!(
        unsafe { qt_params_values(ptr::null(), ptr::null_mut()) },
        QtStatus::NullPointer
    );
}

#[test]
fn error_message_truncates() {
    let mut p = ptr::null_mut();
    unsafe { qt_params_raw(f64::NAN, 0.0, &mut p) };
    let mut buf = [1 as std::ffi::c_char; 4];
    let full = unsafe { qt_last_error(buf.as_mut_ptr(), buf.len()) };
    assert!(full > 3);
    assert_eq!(buf[3], 0);
    assert_eq!(unsafe { qt_last_error(ptr::null_mut(), 0) }, full);
}

#[test]
fn orbit_conserves_energy() {
    let mut p = ptr::null_mut();
    unsafe { qt_params_published(QtDeltaSource::Caption, &mut p) };
    let state = [0.112615, 0.0, 0.0, 0.0, 0.0887981, 0.430698];
    let mut t = ptr::null_mut();
    assert_eq!(
        unsafe { qt_orbit_integrate(p, state.as_ptr(), 50.0, 0.0, 0.0, &mut t) },
        QtStatus::Ok
    );
    let n = unsafe { qt_trajectory_len(t) };
    assert!(n > 10);
    let (mut first, mut last) = ([0.0; 9], [0.0; 9]);
    unsafe {
        qt_trajectory_sample(t, 0, first.as_mut_ptr());
        qt_trajectory_sample(t, n - 1, last.as_mut_ptr());
    }
    assert_eq!(last[0], 50.0);
    assert!((last[8] - first[8]).abs() < 1e-10);
    assert_eq!(
        unsafe { qt_trajectory_sample(t, n, last.as_mut_ptr()) },
        QtStatus::OutOfRange
    );
    unsafe {
        qt_trajectory_free(t);
        qt_params_free(p);
    }
}

#[test]
fn small_section() {
    let mut p = ptr::null_mut();
    unsafe { qt_params_published(QtDeltaSource::Caption, &mut p) };
    let mut s = ptr::null_mut();
    assert_eq!(
        unsafe { qt_section_compute(p, 0.125, 0.01, 2, 5, &mut s) },
        QtStatus::Ok
    );
    assert_eq!(unsafe { qt_section_seed_count(s) }, 2);
    for seed in 0..2 {
        assert_eq!(unsafe { qt_section_point_count(s, seed) }, 5);
        let mut pt = [0.0; 3];
        assert_eq!(
            unsafe { qt_section_point(s, seed, 4, pt.as_mut_ptr()) },
            QtStatus::Ok
        );
        assert!(pt[0] > 0.0 && pt[1] > 0.0);
    }
    assert_eq!(
        unsafe { qt_section_compute(p, -5.0, 0.01, 2, 5, &mut s) },
        QtStatus::InvalidArgument
    );
    assert!(s.is_null());
    unsafe { qt_params_free(p) };
}

#[test]
fn closed_forms() {
    let mut z = [0.0; 2];
    assert_eq!(
        unsafe { qt_zaxis_state(1.0, 0.0, z.as_mut_ptr()) },
        QtStatus::Ok
    );
    assert!(z[0].abs() < 1e-15 && (z[1] - 2f64.sqrt()).abs() < 1e-15);
    let mut r = [0.0; 2];
    assert_eq!(
        unsafe { qt_radial_turning_points(0.2, 0.0, r.as_mut_ptr()) },
        QtStatus::Ok
    );
    assert!((r[1] * r[1] + r[1] - 0.4).abs() < 1e-14);
    assert_eq!(
        unsafe { qt_zaxis_state(-1.0, 0.0, z.as_mut_ptr()) },
        QtStatus::InvalidArgument
    );
}

#[test]
fn galois_witness() {
    let num = [0i64, 1, 4];
    let den = [1i64, 1, 1];
    let (mut v, mut wn, mut wd) = (7, 0, 0);
    let s = unsafe {
        qt_galois_check(
            1,
            1,
            num.as_ptr(),
            den.as_ptr(),
            3,
            &mut v,
            &mut wn,
            &mut wd,
        )
    };
    assert_eq!(s, QtStatus::Ok);
    assert_eq!((v, wn, wd), (0, 4, 1));
    let s = unsafe {
        qt_galois_check(
            2,
            1,
            num.as_ptr(),
            den.as_ptr(),
            3,
            &mut v,
            &mut wn,
            &mut wd,
        )
    };
    assert_eq!((s, v), (QtStatus::Ok, 1));
    let s = unsafe {
        qt_galois_check(
            1,
            0,
            num.as_ptr(),
            den.as_ptr(),
            3,
            &mut v,
            &mut wn,
            &mut wd,
        )
    };
    assert_eq!(s, QtStatus::InvalidArgument);
}

#[test]
fn version_is_the_crate_version() {
    let v = unsafe { CStr::from_ptr(qt_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_compiles_as_c() {
    let dir = env!("CARGO_MANIFEST_DIR");
    let Ok(status) = Command::new("cc")
        .args([
            "-std=c99",
            "-Wall",
            "-Werror",
            "-fsyntax-only",
            "-x",
            "c",
            "-",
        ])
        .arg(format!("-I{dir}/include"))
        .stdin(std::process::Stdio::piped())
        .spawn()
        .and_then(|mut c| {
            use std::io::Write;
            c.stdin
                .take()
                .unwrap()
                .write_all(b"#include \"quadtrap.h\"\nint main(void) { return QT_STATUS_OK; }\n")?;
            c.wait()
        })
    else {
        eprintln!("no C compiler; skipped");
        return;
    };
    assert!(status.success());
}

#[test]
fn c_program_links_against_the_static_library() {
    let dir = env!("CARGO_MANIFEST_DIR");
    let profile = if cfg!(debug_assertions) {
        "debug"
    } else {
        "release"
    };
    let lib = std::path::Path::new(dir).join(format!("../../target/{profile}/libquadtrap_ffi.a"));
    if !lib.exists() {
        eprintln!("{} not built; skipped", lib.display());
        return;
    }
    let exe = std::env::temp_dir().join(format!("quadtrap_smoke_{}", std::process::id()));
    let Ok(cc) = Command::new("cc")
        .arg(format!("{dir}/examples/smoke.c"))
        .arg(format!("-I{dir}/include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
    else {
        eprintln!("no C compiler; skipped");
        return;
    };
    assert!(cc.success());
    let out = Command::new(&exe).output().unwrap();
    let _ = std::fs::remove_file(&exe);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.starts_with("tau=10 energy=0.1250001"), "{text}");
}
