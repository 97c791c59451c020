use std::ffi::{CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use commlab_ffi::*;

fn last_error() -> String {
    let p = commlab_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn grid(d: usize, n: usize, l: f64) -> *mut CommlabGrid {
    let mut g = ptr::null_mut();
    assert_eq!(unsafe { commlab_grid_new(d, n, l, &mut g) }, CommlabStatus::Ok);
    g
}

fn field(g: *const CommlabGrid, re: &[f64], im: &[f64]) -> *mut CommlabField {
    let mut f = ptr::null_mut();
    let status = unsafe { commlab_field_new(g, CommlabSide::Spatial, re.as_ptr(), im.as_ptr(), re.len(), &mut f) };
    assert_eq!(status, CommlabStatus::Ok);
    f
}

fn read(f: *const CommlabField, len: usize) -> (Vec<f64>, Vec<f64>) {
    let mut re = vec![0.0; len];
    let mut im = vec![0.0; len];
    assert_eq!(unsafe { commlab_field_read(f, re.as_mut_ptr(), im.as_mut_ptr(), len) }, CommlabStatus::Ok);
    (re, im)
}

#[test]
fn transform_roundtrip_through_the_abi() {
    let g = grid(1, 64, 2.0);
    let len = unsafe { commlab_grid_len(g) };
    assert_eq!(len, 64);
    let re: Vec<f64> = (0..len).map(|i| (i as f64 * 0.37).sin()).collect();
    let im: Vec<f64> = (0..len).map(|i| (i as f64 * 0.11).cos()).collect();
    let u = field(g, &re, &im);
    let (mut uh, mut back) = (ptr::null_mut(), ptr::null_mut());
    unsafe {
        assert_eq!(commlab_forward_ft(u, &mut uh), CommlabStatus::Ok);
        assert_eq!(commlab_inverse_ft(uh, &mut back), CommlabStatus::Ok);
    }
    let (r2, i2) = read(back, len);
    let err = re.iter().zip(&r2).chain(im.iter().zip(&i2)).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(err < 1e-12);
    unsafe {
        commlab_field_free(back);
        commlab_field_free(uh);
        commlab_field_free(u);
        commlab_grid_free(g);
    }
}

#[test]
fn commutator_with_constant_symbol_vanishes() {
    let g = grid(1, 32, 2.0);
    let b: Vec<f64> = (0..32).map(|i| 1.0 + (i as f64 / 5.0).sin()).collect();
    let bf = field(g, &b, &[0.0; 32]);
    let u = field(g, &[1.0; 32], &[0.5; 32]);
    let sym = CString::new("constant(2)").unwrap();
    let mut op = ptr::null_mut();
    let mut cu = ptr::null_mut();
    unsafe {
        assert_eq!(commlab_operator_commutator(sym.as_ptr(), false, bf, &mut op), CommlabStatus::Ok);
        assert_eq!(commlab_operator_apply(op, u, false, &mut cu), CommlabStatus::Ok);
    }
    let (re, im) = read(cu, 32);
    assert!(re.iter().chain(&im).all(|v| v.abs() < 1e-12));
    unsafe {
        commlab_field_free(cu);
        commlab_operator_free(op);
        commlab_field_free(u);
        commlab_field_free(bf);
        commlab_grid_free(g);
    }
}

#[test]
fn sign_multiplier_has_unit_norm() {
    let g = grid(1, 64, 2.0);
    let sym = CString::new("sign").unwrap();
    let mut op = ptr::null_mut();
    let mut norm = 0.0;
    unsafe {
        assert_eq!(commlab_operator_multiplier(g, sym.as_ptr(), false, &mut op), CommlabStatus::Ok);
        assert_eq!(commlab_operator_norm(op, 200, &mut norm), CommlabStatus::Ok);
        commlab_operator_free(op);
        commlab_grid_free(g);
    }
    assert!((norm - 1.0).abs() < 1e-6, "{norm}");
}

#[test]
fn errors_carry_codes_and_messages() {
    let mut g = ptr::null_mut();
    assert_eq!(unsafe { commlab_grid_new(1, 7, 2.0, &mut g) }, CommlabStatus::InvalidArgument);
    assert!(g.is_null());
    assert!(last_error().contains("grid"));

    assert_eq!(unsafe { commlab_grid_new(1, 8, 2.0, ptr::null_mut()) }, CommlabStatus::NullPointer);

    let g = grid(2, 8, 1.0);
    let sym = CString::new("sign").unwrap();
    let mut op = ptr::null_mut();
    assert_eq!(unsafe { commlab_operator_multiplier(g, sym.as_ptr(), false, &mut op) }, CommlabStatus::InvalidArgument);
    assert!(last_error().contains("one-dimensional"));

    let mut f = ptr::null_mut();
    let short = [0.0; 3];
    let status = unsafe { commlab_field_new(g, CommlabSide::Spatial, short.as_ptr(), ptr::null(), 3, &mut f) };
    assert_eq!(status, CommlabStatus::InvalidArgument);
    unsafe {
        commlab_grid_free(g);
        commlab_grid_free(ptr::null_mut());
    }
}

#[test]
fn version_is_a_c_string() {
    let v = unsafe { CStr::from_ptr(commlab_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn generated_header_compiles_as_c() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/commlab.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for name in ["commlab_grid_new", "commlab_operator_commutator", "COMMLAB_STATUS_OK", "commlab_last_error_message"] {
        assert!(text.contains(name), "header lacks {name}");
    }
    let Ok(status) = Command::new("cc").args(["-fsyntax-only", "-x", "c", "-std=c99"]).arg(&header).status() else {
        eprintln!("no C compiler found, skipping the syntax check");
        return;
    };
    assert!(status.success());
}
