use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use bvarx::sim::VarDgp;
use bvarx_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(bvarx_last_error()).to_string_lossy().into_owned() }
}

fn panel_csv() -> String {
    VarDgp::toy(2, 1, 1).simulate(120, 5).unwrap().to_csv_string()
}

fn load(csv: &str) -> *mut BvarxPanel {
    let text = CString::new(csv).unwrap();
    let names = [CString::new("y1").unwrap(), CString::new("y2").unwrap()];
    let endog: Vec<*const std::ffi::c_char> = names.iter().map(|s| s.as_ptr()).collect();
    let x = CString::new("x1").unwrap();
    let exog = [x.as_ptr()];
    let mut out = ptr::null_mut();
    let rc = unsafe { bvarx_panel_from_csv(text.as_ptr(), endog.as_ptr(), 2, exog.as_ptr(), 1, &mut out) };
    assert_eq!(rc, BVARX_OK, "{}", last_error());
    out
}

const HYPER: BvarxHyper =
    BvarxHyper { p: 2, lambda0: 0.2, lambda1: 0.05, lambda3: 1.0, lambda4: 0.1, lambda5: 0.0, mu5: 1.0, mu6: 0.0 };

#[test]
fn panel_fit_forecast_round_trip() {
    let panel = load(&panel_csv());
    let (mut t, mut m, mut k) = (0, 0, 0);
    assert_eq!(unsafe { bvarx_panel_shape(panel, &mut t, &mut m, &mut k) }, BVARX_OK);
    assert_eq!((t, m, k), (120, 2, 1));

    let mut post = ptr::null_mut();
    assert_eq!(unsafe { bvarx_fit(panel, &HYPER, &mut post) }, BVARX_OK, "{}", last_error());
    let mut coef = vec![0.0; 64];
    let (mut d, mut c) = (0, 0);
    assert_eq!(unsafe { bvarx_posterior_coefficients(post, coef.as_mut_ptr(), coef.len(), &mut d, &mut c) }, BVARX_OK);
    assert_eq!((d, c), (1 + 2 * 2 + 1, 2));
    let mut tiny = [0.0; 2];
    assert_eq!(unsafe { bvarx_posterior_coefficients(post, tiny.as_mut_ptr(), 2, &mut d, &mut c) }, BVARX_ERR_INVALID);

    let h = 6;
    let run = |seed: u64| {
        let (mut pt, mut lo, mut hi) = (vec![0.0; h * 2], vec![0.0; h * 2], vec![0.0; h * 2]);
        let lower = [0.0f64, f64::NEG_INFINITY];
        let rc = unsafe {
            bvarx_forecast(post, panel, h, 400, 0.5, seed, lower.as_ptr(), ptr::null(), pt.as_mut_ptr(), lo.as_mut_ptr(), hi.as_mut_ptr())
        };
        (rc, pt, lo, hi)
    };
    let (rc, pt, lo, hi) = run(3);
    assert_eq!(rc, BVARX_OK, "{}", last_error());
    for i in 0..h * 2 {
        assert!(lo[i] <= pt[i] && pt[i] <= hi[i], "cell {i}");
    }
    assert_eq!(run(3).1, pt);
    assert_eq!(run(3).2, lo);

    unsafe {
        bvarx_posterior_free(post);
        bvarx_panel_free(panel);
        bvarx_posterior_free(ptr::null_mut());
        bvarx_panel_free(ptr::null_mut());
    }
}

#[test]
fn errors_map_to_status_codes() {
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { bvarx_panel_from_csv(ptr::null(), ptr::null(), 0, ptr::null(), 0, &mut out) }, BVARX_ERR_NULL);
    assert!(last_error().contains("csv"));

    let text = CString::new("date,a\n2000-01,1\n2000-03,2\n").unwrap();
    let a = CString::new("a").unwrap();
    let names = [a.as_ptr()];
    let rc = unsafe { bvarx_panel_from_csv(text.as_ptr(), names.as_ptr(), 1, ptr::null(), 0, &mut out) };
    assert_eq!(rc, BVARX_ERR_DATA);
    assert!(out.is_null());
    assert!(last_error().contains("gap"), "{}", last_error());

    let panel = load(&panel_csv());
    let mut post = ptr::null_mut();
    let bad = BvarxHyper { lambda0: 0.0, ..HYPER };
    assert_eq!(unsafe { bvarx_fit(panel, &bad, &mut post) }, BVARX_ERR_INVALID);
    assert!(post.is_null());
    unsafe { bvarx_panel_free(panel) };
}

#[test]
fn metrics_match_the_library() {
    let a = [1.0, 2.0, 3.0, 4.0];
    let f = [1.5, 1.5, 3.5, 3.0];
    let mut v = 0.0;
    unsafe {
        assert_eq!(bvarx_rmse(a.as_ptr(), f.as_ptr(), 4, &mut v), BVARX_OK);
        assert_eq!(v, bvarx::metrics::rmse(&a, &f).unwrap());
        assert_eq!(bvarx_smape(a.as_ptr(), f.as_ptr(), 4, 1, &mut v), BVARX_OK);
        assert_eq!(v, bvarx::metrics::smape(&a, &f, bvarx::metrics::SmapeMode::Percent).unwrap().value);
        assert_eq!(bvarx_theil_u1(a.as_ptr(), f.as_ptr(), 4, &mut v), BVARX_OK);
        assert_eq!(v, bvarx::metrics::theil_u1(&a, &f).unwrap());
        assert_eq!(bvarx_mdape(a.as_ptr(), f.as_ptr(), 4, &mut v), BVARX_OK);
        assert_eq!(v, bvarx::metrics::mdape(&a, &f).unwrap().value);
        let ins = [0.0, 1.0, 3.0, 2.0];
        assert_eq!(bvarx_mase(a.as_ptr(), f.as_ptr(), 4, ins.as_ptr(), 4, 1, &mut v), BVARX_OK);
        assert_eq!(v, bvarx::metrics::mase(&a, &f, &ins, 1).unwrap());
        assert_eq!(bvarx_rmse(a.as_ptr(), f.as_ptr(), 0, &mut v), BVARX_ERR_INVALID);
        assert_eq!(bvarx_rmse(a.as_ptr(), f.as_ptr(), 4, ptr::null_mut()), BVARX_ERR_NULL);

        let losses = [1.0, 1.0, 2.0, 2.0, 0.5, 0.5, 3.0, 3.0];
        let (mut s, mut p) = (0.0, 0.0);
        assert_eq!(bvarx_dm_test(losses.as_ptr(), 4, 2, 1, &mut s, &mut p), BVARX_OK);
        assert_eq!((s, p), (0.0, 1.0));
    }
}

fn target_dir() -> PathBuf {
    // <target>/<profile>/deps/api-<hash>
    let exe = std::env::current_exe().unwrap();
    exe.parent().unwrap().parent().unwrap().to_path_buf()
}

#[test]
fn header_compiles_and_links_from_c() {
    let lib = target_dir().join("libbvarx_ffi.a");
    let header_dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include");
    assert!(header_dir.join("bvarx.h").exists());
    let tmp = tempfile::tempdir().unwrap();
    let src = tmp.path().join("main.c");
    std::fs::write(
        &src,
        r#"#include <stdio.h>
#include "bvarx.h"
int main(void) {
    double a[3] = {1.0, 2.0, 3.0}, f[3] = {1.0, 2.0, 5.0}, v = 0.0;
    if (bvarx_rmse(a, f, 3, &v) != BVARX_OK) return 1;
    if (bvarx_rmse(a, f, 3, NULL) != BVARX_ERR_NULL) return 2;
    BvarxPanel *p = NULL;
    if (bvarx_panel_from_csv(NULL, NULL, 0, NULL, 0, &p) != BVARX_ERR_NULL || p != NULL) return 3;
    printf("%.12f %s\n", v, bvarx_version());
    return 0;
}
"#,
    )
    .unwrap();
    let exe = tmp.path().join("main");
    let status = Command::new("cc")
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(&header_dir)
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .expect("C compiler available");
    assert!(status.success(), "C compile/link failed");
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "exit {:?}", out.status.code());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("1.154700538379"), "{text}");
}
