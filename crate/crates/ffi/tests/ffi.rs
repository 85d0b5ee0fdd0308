use std::ffi::CString;
use std::ptr;

use rolesim_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0u8; 256];
    let len = unsafe { rolesim_last_error_message(buf.as_mut_ptr().cast(), buf.len()) };
    buf.truncate(len.min(255));
    String::from_utf8(buf).unwrap()
}

unsafe fn path_graph() -> *mut RolesimGraph {
    let src = [0usize, 1, 2];
    let dst = [1usize, 2, 3];
    let mut g = ptr::null_mut();
    let st = rolesim_graph_new(4, src.as_ptr(), dst.as_ptr(), ptr::null(), 3, &mut g);
    assert_eq!(st, RolesimStatus::Ok);
    g
}

#[test]
fn graph_lifecycle_and_errors() {
    unsafe {
        let g = path_graph();
        assert_eq!(rolesim_graph_node_count(g), 4);
        assert_eq!(rolesim_graph_edge_count(g), 3);
        rolesim_graph_free(g);

        let src = [0usize];
        let dst = [7usize];
        let mut bad = ptr::null_mut();
        let st = rolesim_graph_new(4, src.as_ptr(), dst.as_ptr(), ptr::null(), 1, &mut bad);
        assert_eq!(st, RolesimStatus::InvalidArgument);
        assert!(bad.is_null());
        assert!(!last_error().is_empty());

        let st = rolesim_graph_new(4, ptr::null(), ptr::null(), ptr::null(), 1, &mut bad);
        assert_eq!(st, RolesimStatus::NullPointer);
        assert_eq!(rolesim_graph_node_count(ptr::null()), 0);
        rolesim_graph_free(ptr::null_mut());
    }
}

#[test]
fn file_round_trip_and_io_errors() {
    let dir = tempfile::tempdir().unwrap();
    let file = CString::new(dir.path().join("g.tsv").to_str().unwrap()).unwrap();
    let missing = CString::new(dir.path().join("none.tsv").to_str().unwrap()).unwrap();
    unsafe {
        let g = path_graph();
        assert_eq!(rolesim_graph_save(g, file.as_ptr()), RolesimStatus::Ok);
        let mut h = ptr::null_mut();
        assert_eq!(rolesim_graph_load(file.as_ptr(), &mut h), RolesimStatus::Ok);
        assert_eq!(rolesim_graph_edge_count(h), 3);
        let mut p = ptr::null_mut();
        assert_eq!(
            rolesim_graph_load(missing.as_ptr(), &mut p),
            RolesimStatus::Io
        );
        let mut q = ptr::null_mut();
        assert_eq!(
            rolesim_partition_load(missing.as_ptr(), &mut q),
            RolesimStatus::Io
        );
        rolesim_graph_free(g);
        rolesim_graph_free(h);
    }
}

#[test]
fn full_and_lowrank_similarity_agree() {
    unsafe {
        let g = path_graph();
        let mut s = ptr::null_mut();
        let mut iters = 0usize;
        let st = rolesim_full_similarity(g, 0.0, 1e-13, 10_000, &mut s, &mut iters);
        assert_eq!(st, RolesimStatus::Ok);
        assert!(iters > 0);
        assert_eq!(rolesim_matrix_dim(s), 4);
        let mut dense = vec![0.0; 16];
        assert_eq!(
            rolesim_matrix_copy(s, dense.as_mut_ptr(), 16),
            RolesimStatus::Ok
        );
        assert_eq!(dense[4 + 2], rolesim_matrix_get(s, 1, 2));
        assert!(rolesim_matrix_get(s, 4, 0).is_nan());
        let mut small = [0.0; 4];
        assert_eq!(
            rolesim_matrix_copy(s, small.as_mut_ptr(), 4),
            RolesimStatus::InvalidArgument
        );

        let mut x = ptr::null_mut();
        let st = rolesim_lowrank_similarity(g, 4, 0.0, 1e-13, 10_000, &mut x, ptr::null_mut());
        assert_eq!(st, RolesimStatus::Ok);
        assert_eq!(rolesim_factor_rank(x), 4);
        assert_eq!(rolesim_factor_dim(x), 4);
        let mut factor = vec![0.0; 16];
        assert_eq!(
            rolesim_factor_copy(x, factor.as_mut_ptr(), 16),
            RolesimStatus::Ok
        );
        for i in 0..4 {
            for j in 0..4 {
                let from_rows: f64 = (0..4).map(|k| factor[i * 4 + k] * factor[j * 4 + k]).sum();
                let full = dense[i * 4 + j];
                assert!((rolesim_factor_similarity(x, i, j) - full).abs() < 1e-8 * (1.0 + full));
                assert!((from_rows - full).abs() < 1e-8 * (1.0 + full));
            }
        }
        rolesim_factor_free(x);
        rolesim_matrix_free(s);
        rolesim_graph_free(g);
    }
}

#[test]
fn beta_above_bound_is_rejected_and_iteration_limit_reported() {
    unsafe {
        let g = path_graph();
        let bound = rolesim_beta_max_easy(g);
        assert!(bound.is_finite() && bound > 0.0);
        let mut s = ptr::null_mut();
        let st = rolesim_full_similarity(g, 2.0 * bound, 1e-9, 100, &mut s, ptr::null_mut());
        assert_eq!(st, RolesimStatus::InvalidArgument);
        assert!(s.is_null());

        let mut iters = 0;
        let st = rolesim_full_similarity(g, 0.0, 1e-15, 1, &mut s, &mut iters);
        assert_eq!(st, RolesimStatus::NotConverged);
        assert_eq!(iters, 1);
        assert!(!s.is_null());
        rolesim_matrix_free(s);
        rolesim_graph_free(g);
    }
}

#[test]
fn generated_roles_are_recovered() {
    unsafe {
        let mut g = ptr::null_mut();
        let mut truth = ptr::null_mut();
        let st = rolesim_generate(
            RolesimPreset::Community,
            3,
            15,
            1.0,
            0.0,
            1,
            &mut g,
            &mut truth,
        );
        assert_eq!(st, RolesimStatus::Ok);
        assert_eq!(rolesim_graph_node_count(g), 45);
        assert_eq!(rolesim_partition_cluster_count(truth), 3);

        let mut found = ptr::null_mut();
        assert_eq!(
            rolesim_extract_roles(g, 10, 0.0, 1.0, 0, &mut found),
            RolesimStatus::Ok
        );
        let mut score = 0.0;
        assert_eq!(rolesim_nmi(found, truth, &mut score), RolesimStatus::Ok);
        assert_eq!(score, 1.0);

        let mut labels = vec![0usize; 45];
        assert_eq!(
            rolesim_partition_copy(found, labels.as_mut_ptr(), 45),
            RolesimStatus::Ok
        );
        let mut copy = ptr::null_mut();
        assert_eq!(
            rolesim_partition_new(labels.as_ptr(), 45, &mut copy),
            RolesimStatus::Ok
        );
        assert_eq!(rolesim_partition_len(copy), 45);

        let short = [0usize, 1];
        let mut other = ptr::null_mut();
        assert_eq!(
            rolesim_partition_new(short.as_ptr(), 2, &mut other),
            RolesimStatus::Ok
        );
        assert_eq!(
            rolesim_nmi(copy, other, &mut score),
            RolesimStatus::InvalidArgument
        );

        for p in [truth, found, copy, other] {
            rolesim_partition_free(p);
        }
        rolesim_graph_free(g);
    }
}

#[test]
fn error_message_is_truncated_safely() {
    unsafe {
        let mut g = ptr::null_mut();
        rolesim_graph_new(0, ptr::null(), ptr::null(), ptr::null(), 0, &mut g);
        let mut buf = [1 as std::ffi::c_char; 4];
        let full = rolesim_last_error_message(buf.as_mut_ptr(), buf.len());
        assert!(full > 3);
        assert_eq!(buf[3], 0);
        assert_eq!(rolesim_last_error_message(ptr::null_mut(), 0), full);
    }
}

#[test]
fn header_declares_the_api() {
    let header_path = concat!(env!("CARGO_MANIFEST_DIR"), "/include/rolesim.h");
    let header = std::fs::read_to_string(header_path).unwrap();
    for symbol in [
        "ROLESIM_STATUS_NOT_CONVERGED = 4",
        "typedef struct RolesimGraph RolesimGraph;",
        "rolesim_graph_new(",
        "rolesim_full_similarity(",
        "rolesim_lowrank_similarity(",
        "rolesim_extract_roles(",
        "rolesim_nmi(",
        "rolesim_last_error_message(",
    ] {
        assert!(header.contains(symbol), "header lacks {symbol}");
    }

    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    let dir = tempfile::tempdir().unwrap();
    let source = dir.path().join("use.c");
    std::fs::write(
        &source,
        format!(
            "#include \"{header_path}\"\nint main(void) {{ RolesimGraph *g = 0; return (int)rolesim_graph_node_count(g); }}\n"
        ),
    )
    .unwrap();
    match std::process::Command::new(&cc)
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only"])
        .arg(&source)
        .output()
    {
        Ok(out) => assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        ),
        Err(_) => eprintln!("no C compiler found; skipped header compilation"),
    }
}
