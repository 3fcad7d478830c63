use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use isoembed_ffi::*;

fn last_error() -> String {
    let p = iso_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn matrix_entry_points() {
    let a = [2.0, 0.5, 0.0, 0.5, 1.5, 0.2, 0.0, 0.2, 1.0];
    let mut b = [0.0; 9];
    let mut back = [0.0; 9];
    unsafe {
        assert_eq!(iso_phi(a.as_ptr(), 3, b.as_mut_ptr()), IsoStatus::Ok);
        let mut cone = IsoConeReport::default();
        assert_eq!(iso_cone_report(b.as_ptr(), 3, &mut cone), IsoStatus::Ok);
        assert!(cone.is_spd && cone.member && cone.eps_gap > 0.0);
        assert_eq!(iso_phi_inverse(b.as_ptr(), 3, 1e-9, back.as_mut_ptr()), IsoStatus::Ok);
    }
    for (x, y) in a.iter().zip(back) {
        assert!((x - y).abs() < 1e-12);
    }
}

#[test]
fn errors_are_reported_per_thread() {
    let asym = [1.0, 2.0, 0.0, 1.0];
    let mut out = [0.0; 4];
    unsafe {
        assert_eq!(iso_phi(asym.as_ptr(), 2, out.as_mut_ptr()), IsoStatus::Precondition);
        let msg = last_error();
        std::thread::spawn(|| assert!(iso_last_error_message().is_null())).join().unwrap();
        assert_eq!(last_error(), msg);
        assert_eq!(iso_phi(ptr::null(), 2, out.as_mut_ptr()), IsoStatus::NullPointer);
        assert!(last_error().contains("matrix"));
        assert_eq!(iso_phi(asym.as_ptr(), 0, out.as_mut_ptr()), IsoStatus::InvalidArgument);
        let outside = [1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 5.0];
        let mut a = [0.0; 9];
        assert_eq!(iso_phi_inverse(outside.as_ptr(), 3, 1e-9, a.as_mut_ptr()), IsoStatus::Domain);
        assert_eq!(iso_phi_inverse(outside.as_ptr(), 3, -1.0, a.as_mut_ptr()), IsoStatus::InvalidArgument);
    }
}

#[test]
fn family_handles() {
    unsafe {
        let mut f = ptr::null_mut();
        let axes = [1.0, 1.3, 0.8, 1.1];
        assert_eq!(iso_family_ellipsoid(axes.as_ptr(), 4, &mut f), IsoStatus::Ok);
        assert_eq!(iso_family_dim(f), 3);
        let mut v = IsoPointValues::default();
        let x = [0.2, -0.4, 0.3];
        assert_eq!(iso_family_evaluate(f, IsoChart::South, x.as_ptr(), 3, &mut v), IsoStatus::Ok);
        assert!(v.mean_curvature > 0.0 && v.gauss_residual < 1e-8 && v.codazzi_residual < 1e-8);
        assert_eq!(iso_family_evaluate(f, IsoChart::North, x.as_ptr(), 2, &mut v), IsoStatus::InvalidArgument);
        let far = [2.5, 0.0, 0.0];
        assert_eq!(iso_family_evaluate(f, IsoChart::North, far.as_ptr(), 3, &mut v), IsoStatus::ChartOverflow);
        iso_family_free(f);
        iso_family_free(ptr::null_mut());

        let bad = [1.0, -1.0, 1.0];
        assert_eq!(iso_family_ellipsoid(bad.as_ptr(), 3, &mut f), IsoStatus::Precondition);
        assert!(!last_error().is_empty());

        let cfg = CString::new("[family]\nkind = \"round-sphere\"\ndim = 2\nradius = 2.0\n").unwrap();
        assert_eq!(iso_family_from_config(cfg.as_ptr(), &mut f), IsoStatus::Ok);
        assert_eq!(iso_family_dim(f), 2);
        iso_family_free(f);
        let cfg = CString::new("[family]\nkind = \"torus\"\n").unwrap();
        assert_eq!(iso_family_from_config(cfg.as_ptr(), &mut f), IsoStatus::Config);
    }
}

#[test]
fn run_reports() {
    let cfg = CString::new(
        "seed = 2\n[family]\nkind = \"ellipsoid\"\naxes = [1.0, 1.2, 0.9, 1.05]\n[grid]\nresolution = 5\n",
    )
    .unwrap();
    unsafe {
        let mut r = ptr::null_mut();
        assert_eq!(iso_run(IsoCommand::Solve, cfg.as_ptr(), &mut r), IsoStatus::Ok);
        assert!(iso_report_pass(r));
        assert_eq!(iso_report_section_count(r), 2);
        let json = CStr::from_ptr(iso_report_json(r)).to_str().unwrap();
        let parsed = isoembed::cli::RunReport::from_json(json).unwrap();
        assert_eq!(parsed.command, "solve");
        iso_report_free(r);

        let bad = CString::new("[family]\nkind = \"round-sphere\"\ndim = 3\nradius = 1.0\n[grid]\nresolution = 4\n").unwrap();
        assert_eq!(iso_run(IsoCommand::Verify, bad.as_ptr(), &mut r), IsoStatus::Config);
        assert!(last_error().contains("resolution"));
        assert!(!iso_report_pass(ptr::null()));
        assert!(iso_report_json(ptr::null()).is_null());
    }
}

#[test]
fn sigma_and_version() {
    let x = [1.0, 2.0, 3.0];
    let mut s = 0.0;
    unsafe {
        assert_eq!(iso_sigma(3, x.as_ptr(), 3, &mut s), IsoStatus::Ok);
        assert_eq!(s, 6.0);
        assert_eq!(iso_sigma(1, x.as_ptr(), 3, ptr::null_mut()), IsoStatus::NullPointer);
        let v = CStr::from_ptr(iso_version()).to_str().unwrap();
        assert_eq!(v, env!("CARGO_PKG_VERSION"));
    }
}

/// Directory holding the library artifacts of this build.
fn artifact_dir() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    // target/<profile>/deps/abi-<hash>
    exe.parent().and_then(Path::parent).unwrap().to_path_buf()
}

#[test]
fn c_program_links_against_the_static_library() {
    let crate_dir = Path::new(env!("CARGO_MANIFEST_DIR"));
    let lib_dir = artifact_dir();
    assert!(lib_dir.join("libisoembed_ffi.a").exists(), "static library missing in {}", lib_dir.display());
    let out_dir = tempfile::tempdir().unwrap();
    let exe = out_dir.path().join("smoke");
    let status = Command::new("cc")
        .arg(crate_dir.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(crate_dir.join("include"))
        .arg("-o")
        .arg(&exe)
        .arg(lib_dir.join("libisoembed_ffi.a"))
        .args(["-lpthread", "-ldl", "-lm"])
        .status()
        .expect("a C compiler is available");
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("ok "));
}
