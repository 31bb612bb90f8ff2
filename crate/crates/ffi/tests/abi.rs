use std::ptr;

use heightlab_ffi::*;

fn torus(dims: &[usize]) -> *mut HlTorus {
    let mut t = ptr::null_mut();
    assert_eq!(unsafe { hl_torus_new(dims.as_ptr(), dims.len(), &mut t) }, HlStatus::Ok);
    t
}

fn last_error() -> String {
    let mut buf = vec![0 as std::os::raw::c_char; 256];
    let needed = unsafe { hl_last_error_message(buf.as_mut_ptr(), buf.len()) };
    assert!(needed >= 1);
    unsafe { std::ffi::CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned()
}

#[test]
fn counts_cycle_functions() {
    let t = torus(&[6]);
    assert_eq!(unsafe { hl_torus_vertex_count(t) }, 6);
    let mut bc = ptr::null_mut();
    assert_eq!(unsafe { hl_bc_one_point(t, 0, &mut bc) }, HlStatus::Ok);
    let mut n = 0u64;
    assert_eq!(unsafe { hl_count(bc, HL_MODEL_HOM, &mut n) }, HlStatus::Ok);
    assert_eq!(n, 20);
    assert_eq!(unsafe { hl_count(bc, 7, &mut n) }, HlStatus::InvalidArgument);
    assert_eq!(last_error(), "unknown model 7");
    unsafe {
        hl_bc_free(bc);
        hl_torus_free(t);
    }
}

#[test]
fn sample_roundtrip() {
    let t = torus(&[2, 8]);
    let mut bc = ptr::null_mut();
    assert_eq!(unsafe { hl_bc_one_point(t, 0, &mut bc) }, HlStatus::Ok);
    let mut f = ptr::null_mut();
    assert_eq!(unsafe { hl_sample(bc, HL_MODEL_HOM, 42, &mut f) }, HlStatus::Ok);
    let n = unsafe { hl_function_len(f) };
    assert_eq!(n, 16);
    let mut values = vec![0i64; n];
    assert_eq!(unsafe { hl_function_values(f, values.as_mut_ptr(), n) }, HlStatus::Ok);
    assert_eq!(values[0], 0);
    assert!(values.iter().enumerate().all(|(v, h)| (h - (v as i64 / 8 + v as i64 % 8)).rem_euclid(2) == 0));
    assert_eq!(unsafe { hl_function_values(f, values.as_mut_ptr(), 3) }, HlStatus::InvalidArgument);
    let (mut range, mut walls, mut ls) = (0usize, 0usize, 0usize);
    assert_eq!(unsafe { hl_function_range(f, &mut range) }, HlStatus::Ok);
    assert!(range >= 2);
    assert_eq!(unsafe { hl_wall_count(f, bc, &mut walls) }, HlStatus::Ok);
    assert!(walls <= 4);
    assert_eq!(unsafe { hl_level_set_length(f, bc, 1, &mut ls) }, HlStatus::Ok);
    assert_eq!(unsafe { hl_level_set_length(f, bc, 99, &mut ls) }, HlStatus::InvalidArgument);
    unsafe {
        hl_function_free(f);
        hl_bc_free(bc);
        hl_torus_free(t);
    }
}

#[test]
fn errors_are_reported() {
    let dims = [3usize, 4];
    let mut t = ptr::null_mut();
    assert_eq!(unsafe { hl_torus_new(dims.as_ptr(), 2, &mut t) }, HlStatus::InvalidArgument);
    assert!(t.is_null());
    assert!(last_error().contains("odd"));
    assert_eq!(unsafe { hl_torus_new(ptr::null(), 2, &mut t) }, HlStatus::NullPointer);
    let cube = torus(&[4, 4]);
    let mut bc = ptr::null_mut();
    assert_eq!(unsafe { hl_bc_zero(cube, &mut bc) }, HlStatus::Ok);
    let mut f = ptr::null_mut();
    assert_eq!(unsafe { hl_sample(bc, HL_MODEL_HOM, 1, &mut f) }, HlStatus::Ok);
    let mut walls = 0usize;
    assert_eq!(unsafe { hl_wall_count(f, bc, &mut walls) }, HlStatus::NotSupported);
    assert_eq!(unsafe { hl_count(ptr::null(), HL_MODEL_HOM, ptr::null_mut()) }, HlStatus::NullPointer);
    unsafe {
        hl_function_free(f);
        hl_bc_free(bc);
        hl_torus_free(cube);
        hl_torus_free(ptr::null_mut());
    }
}

#[test]
fn header_declares_the_api() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/heightlab.h")).unwrap();
    for symbol in [
        "typedef struct HlTorus HlTorus;",
        "hl_torus_new",
        "hl_count",
        "hl_sample",
        "hl_function_values",
        "hl_last_error_message",
        "HL_STATUS_BUDGET_EXCEEDED",
        "HL_MODEL_LIP",
    ] {
        assert!(header.contains(symbol), "missing {symbol}");
    }
}
