use std::ffi::CStr;
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use swipt_noma::siso;
use swipt_noma::system::SisoInstance;
use swipt_noma_ffi::*;

fn last_error() -> String {
    let p = swipt_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn siso_round_trip_matches_library() {
    let mut inst = ptr::null_mut();
    let mut sol = ptr::null_mut();
    unsafe {
        assert_eq!(swipt_instance_new_siso(1.0, 10.0, 2.0, &mut inst), SwiptStatus::Ok);
        assert_eq!(swipt_instance_antennas(inst), 1);
        assert_eq!(swipt_solve_siso(inst, 1.0, 0.0, &mut sol), SwiptStatus::Ok);
        let direct = siso::gss_solve(&SisoInstance::new(1.0, 10.0, 2.0).unwrap(), 1.0, siso::DEFAULT_GSS_EPS);
        assert_eq!(swipt_solution_status(sol), SwiptSolveStatus::Optimal);
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * b.abs().max(1.0);
        assert!(close(swipt_solution_beta(sol), direct.beta));
        assert!(close(swipt_solution_alpha(sol), direct.alpha));
        assert!(close(swipt_solution_objective(sol), direct.objective));
        assert_eq!(swipt_solution_iterations(sol), direct.iterations);
        swipt_solution_free(sol);
        swipt_instance_free(inst);
    }
}

#[test]
fn sca_on_sampled_instance_returns_beamformers() {
    let mut inst = ptr::null_mut();
    let mut sol = ptr::null_mut();
    unsafe {
        assert_eq!(swipt_instance_sample(5, 0, 2, 30.0, &mut inst), SwiptStatus::Ok);
        assert_eq!(swipt_instance_antennas(inst), 2);
        let (mut h1, mut h2, mut g) = (0.0, 0.0, 0.0);
        assert_eq!(swipt_instance_gains(inst, &mut h1, &mut h2, &mut g), SwiptStatus::Ok);
        assert!(h1 > 0.0 && h2 > 0.0 && g > 0.0);
        assert_eq!(swipt_solve_sca(inst, 1.0, 0.0, 0, &mut sol), SwiptStatus::Ok);
        assert_ne!(swipt_solution_status(sol), SwiptSolveStatus::Infeasible);
        assert!(swipt_solution_alpha(sol).is_nan());
        let mut buf = [[0.0f64; 2]; 4];
        let [a, b, c, d] = &mut buf;
        assert_eq!(
            swipt_solution_beamformers(sol, 2, a.as_mut_ptr(), b.as_mut_ptr(), c.as_mut_ptr(), d.as_mut_ptr()),
            SwiptStatus::Ok
        );
        assert_eq!(
            swipt_solution_beamformers(sol, 3, a.as_mut_ptr(), b.as_mut_ptr(), c.as_mut_ptr(), d.as_mut_ptr()),
            SwiptStatus::DimensionMismatch
        );
        let power: f64 = buf.iter().flatten().map(|v| v * v).sum();
        assert!(power > 0.5 && power <= 1.0 + 1e-6, "total power {power}");
        swipt_solution_free(sol);
        swipt_instance_free(inst);
    }
}

#[test]
fn exhaustive_agrees_with_sca_on_explicit_channels() {
    let h1_re = [0.8, 0.1];
    let h1_im = [0.0, 0.3];
    let h2_re = [2.0, -1.0];
    let h2_im = [0.5, 0.0];
    let mut inst = ptr::null_mut();
    let (mut s1, mut s2) = (ptr::null_mut(), ptr::null_mut());
    unsafe {
        assert_eq!(
            swipt_instance_new_miso(
                2,
                h1_re.as_ptr(),
                h1_im.as_ptr(),
                h2_re.as_ptr(),
                h2_im.as_ptr(),
                0.5,
                &mut inst
            ),
            SwiptStatus::Ok
        );
        assert_eq!(swipt_solve_sca(inst, 0.5, 0.0, 0, &mut s1), SwiptStatus::Ok);
        assert_eq!(swipt_solve_exhaustive(inst, 0.5, 21, &mut s2), SwiptStatus::Ok);
        let (a, b) = (swipt_solution_objective(s1), swipt_solution_objective(s2));
        assert!(a >= b * (1.0 - 1e-3), "sca {a} vs lattice {b}");
        swipt_solution_free(s1);
        swipt_solution_free(s2);
        swipt_instance_free(inst);
    }
}

#[test]
fn errors_are_reported_with_messages() {
    let mut inst = ptr::null_mut();
    let mut sol = ptr::null_mut();
    unsafe {
        assert_eq!(
            swipt_instance_new_siso(-1.0, 1.0, 1.0, &mut inst),
            SwiptStatus::InvalidArgument
        );
        assert!(inst.is_null());
        assert!(!last_error().is_empty());
        assert_eq!(
            swipt_instance_new_siso(1.0, 1.0, 1.0, ptr::null_mut()),
            SwiptStatus::NullPointer
        );
        assert_eq!(
            swipt_solve_siso(ptr::null(), 1.0, 0.0, &mut sol),
            SwiptStatus::NullPointer
        );
        assert_eq!(last_error(), "instance is NULL");

        assert_eq!(swipt_instance_sample(1, 0, 2, 30.0, &mut inst), SwiptStatus::Ok);
        assert_eq!(
            swipt_solve_siso(inst, 1.0, 0.0, &mut sol),
            SwiptStatus::DimensionMismatch
        );
        assert_eq!(
            swipt_solve_sca(inst, -2.0, 0.0, 0, &mut sol),
            SwiptStatus::InvalidArgument
        );
        assert_eq!(
            swipt_solve_exhaustive(inst, 1.0, 1, &mut sol),
            SwiptStatus::InvalidArgument
        );
        swipt_instance_free(inst);

        assert_eq!(
            swipt_instance_sample(1, 0, 0, 30.0, &mut inst),
            SwiptStatus::InvalidArgument
        );
        let zeros = [0.0; 2];
        assert_eq!(
            swipt_instance_new_miso(
                0,
                zeros.as_ptr(),
                zeros.as_ptr(),
                zeros.as_ptr(),
                zeros.as_ptr(),
                1.0,
                &mut inst
            ),
            SwiptStatus::DimensionMismatch
        );
    }
}

#[test]
fn infeasible_target_yields_infeasible_status() {
    let mut inst = ptr::null_mut();
    let mut sol = ptr::null_mut();
    unsafe {
        assert_eq!(swipt_instance_new_siso(1.0, 10.0, 2.0, &mut inst), SwiptStatus::Ok);
        assert_eq!(swipt_solve_siso(inst, 100.0, 0.0, &mut sol), SwiptStatus::Ok);
        assert_eq!(swipt_solution_status(sol), SwiptSolveStatus::Infeasible);
        swipt_solution_free(sol);
        swipt_instance_free(inst);
        swipt_solution_free(ptr::null_mut());
        swipt_instance_free(ptr::null_mut());
    }
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/swipt_noma.h")).unwrap();
    for name in [
        "swipt_last_error",
        "swipt_instance_new_siso",
        "swipt_instance_new_miso",
        "swipt_instance_sample",
        "swipt_instance_antennas",
        "swipt_instance_gains",
        "swipt_instance_free",
        "swipt_solve_siso",
        "swipt_solve_sca",
        "swipt_solve_exhaustive",
        "swipt_solution_status",
        "swipt_solution_beta",
        "swipt_solution_alpha",
        "swipt_solution_objective",
        "swipt_solution_iterations",
        "swipt_solution_beamformers",
        "swipt_solution_free",
        "typedef struct SwiptInstance SwiptInstance",
        "SWIPT_STATUS_OK = 0",
    ] {
        assert!(header.contains(name), "header lacks {name}");
    }
}

/// Builds the C program against the static library when a C compiler and the
/// archive are both present.
#[test]
fn c_program_links_and_runs() {
    let profile_dir = std::env::current_exe()
        .unwrap()
        .parent()
        .unwrap()
        .parent()
        .unwrap()
        .to_path_buf();
    let lib = profile_dir.join("libswipt_noma_ffi.a");
    if !lib.exists() || Command::new("cc").arg("--version").output().is_err() {
        eprintln!("skipping: no static library or C compiler");
        return;
    }
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let exe = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("ffi_smoke");
    let status = Command::new("cc")
        .arg(manifest.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lm", "-lpthread", "-ldl", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "exit {:?}", out.status.code());
    let fields: Vec<f64> = String::from_utf8(out.stdout)
        .unwrap()
        .split_whitespace()
        .map(|s| s.parse().unwrap())
        .collect();
    let direct = siso::gss_solve(&SisoInstance::new(1.0, 10.0, 2.0).unwrap(), 1.0, siso::DEFAULT_GSS_EPS);
    assert!((fields[0] - direct.beta).abs() < 1e-8);
    assert!((fields[1] - direct.alpha).abs() < 1e-8);
    assert!((fields[2] - direct.objective).abs() < 1e-8 * direct.objective);
}
