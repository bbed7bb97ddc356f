use std::ffi::{c_char, CStr, CString};
use std::path::Path;
use std::ptr;

use rmfnn::cli::{cmd_train, TrainCommandConfig};
use rmfnn::problems::ProblemId;
use rmfnn::surrogate::{load_bundle, Method, Surrogate};
use rmfnn_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0 as c_char; 512];
    unsafe { rmfnn_last_error_message(buf.as_mut_ptr(), buf.len()) };
    unsafe { CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned()
}

fn train_small(dir: &Path) {
    let mut cfg = TrainCommandConfig {
        problem: ProblemId::PulsedOscillator,
        method: Method::Hfnn,
        n_hf: 60,
        k: 5,
        l: 3,
        mse_points: 200,
        out: dir.to_path_buf(),
        ..TrainCommandConfig::default()
    };
    cfg.train.epochs = 5;
    cfg.train.batch_size = 8;
    cmd_train(&cfg).unwrap();
}

#[test]
fn bundle_round_trip_matches_rust() {
    let dir = tempfile::tempdir().unwrap();
    train_small(dir.path());
    let path = CString::new(dir.path().to_str().unwrap()).unwrap();
    let mut handle: *mut RmfnnBundle = ptr::null_mut();
    assert_eq!(unsafe { rmfnn_bundle_load(path.as_ptr(), &mut handle) }, RmfnnStatus::Ok);
    assert!(!handle.is_null());

    let mut dim = 0usize;
    assert_eq!(unsafe { rmfnn_bundle_input_dim(handle, &mut dim) }, RmfnnStatus::Ok);
    assert_eq!(dim, 4);

    let rust = load_bundle(dir.path()).unwrap();
    let pts = [[10.0, 1.0, 0.1, 4.2], [40.0, 5.5, 0.05, 4.4]];
    let mut y = 0.0;
    assert_eq!(unsafe { rmfnn_bundle_predict(handle, pts[0].as_ptr(), 4, &mut y) }, RmfnnStatus::Ok);
    assert_eq!(y.to_bits(), rust.predict(&pts[0]).unwrap().to_bits());

    let flat: Vec<f64> = pts.iter().flatten().copied().collect();
    let mut ys = [0.0; 2];
    assert_eq!(
        unsafe { rmfnn_bundle_predict_batch(handle, flat.as_ptr(), 2, 4, ys.as_mut_ptr()) },
        RmfnnStatus::Ok
    );
    assert_eq!(ys[1].to_bits(), rust.predict(&pts[1]).unwrap().to_bits());

    let (mut v, mut se) = (0.0, 0.0);
    assert_eq!(unsafe { rmfnn_bundle_mc(handle, 1000, 3, &mut v, &mut se) }, RmfnnStatus::Ok);
    let est = rmfnn::uq::mc_estimate(&rust, &rust.manifest.domain, 1000, 3).unwrap();
    assert_eq!(v.to_bits(), est.value.to_bits());
    assert!(se > 0.0);

    unsafe { rmfnn_bundle_free(handle) };
}

#[test]
fn errors_carry_status_and_message() {
    let missing = CString::new("/nonexistent/bundle").unwrap();
    let mut handle: *mut RmfnnBundle = ptr::null_mut();
    assert_eq!(unsafe { rmfnn_bundle_load(missing.as_ptr(), &mut handle) }, RmfnnStatus::Io);
    assert!(handle.is_null());
    assert!(!last_error().is_empty());

    assert_eq!(unsafe { rmfnn_bundle_load(ptr::null(), &mut handle) }, RmfnnStatus::NullPointer);
    assert!(last_error().contains("path"));

    let mut y = 0.0;
    assert_eq!(
        unsafe { rmfnn_bundle_predict(ptr::null(), [1.0].as_ptr(), 1, &mut y) },
        RmfnnStatus::NullPointer
    );

    let name = CString::new("ivp").unwrap();
    assert_eq!(
        unsafe { rmfnn_problem_reference(name.as_ptr(), [0.3, 0.1].as_ptr(), 2, &mut y) },
        RmfnnStatus::InvalidArgument
    );
    let bogus = CString::new("nope").unwrap();
    assert_eq!(
        unsafe { rmfnn_problem_reference(bogus.as_ptr(), [0.3].as_ptr(), 1, &mut y) },
        RmfnnStatus::InvalidArgument
    );
}

#[test]
fn problem_reference_and_costs() {
    let name = CString::new("ivp").unwrap();
    let mut y = 0.0;
    assert_eq!(
        unsafe { rmfnn_problem_reference(name.as_ptr(), [0.3].as_ptr(), 1, &mut y) },
        RmfnnStatus::Ok
    );
    assert_eq!(y, rmfnn::problems::ivp_exact(0.3));

    let inputs = RmfnnCostInputs {
        w_hf: 2.0,
        w_dnn: 0.5,
        w_t1: 3.0,
        w_t2: 4.0,
        n_i: 10,
        n: 100,
        n_theta: 1000,
        ..Default::default()
    };
    let (mut a, mut b) = (RmfnnCostTotals::default(), RmfnnCostTotals::default());
    assert_eq!(unsafe { rmfnn_cost_totals(&inputs, &mut a, &mut b) }, RmfnnStatus::Ok);
    assert_eq!(a.w_rmfnn, 10.0 * 2.0 + 1000.0 * 0.5);
    assert_eq!(a.w_hfm, 2000.0);
    assert_eq!(a.w_hfnn, 100.0 * 2.0 + 1000.0 * 0.5);
    assert_eq!(b.w_rmfnn, a.w_rmfnn + 7.0);
    assert_eq!(b.w_hfnn, a.w_hfnn + 4.0);

    let bad = RmfnnCostInputs { w_hf: -1.0, ..inputs };
    assert_eq!(
        unsafe { rmfnn_cost_totals(&bad, ptr::null_mut(), ptr::null_mut()) },
        RmfnnStatus::InvalidArgument
    );
    assert!(last_error().contains("w_hf"));
}

#[test]
fn version_is_a_c_string() {
    let v = unsafe { CStr::from_ptr(rmfnn_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

/// The generated header must compile as C when a compiler is present.
#[test]
fn header_compiles_as_c() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/rmfnn.h");
    assert!(header.exists());
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("use.c");
    std::fs::write(
        &src,
        format!(
            "#include \"{}\"\nint main(void) {{ RmfnnBundle *b = 0; double y; \
             return rmfnn_bundle_predict(b, 0, 0, &y) == RMFNN_STATUS_OK; }}\n",
            header.display()
        ),
    )
    .unwrap();
    match std::process::Command::new("cc").arg("-fsyntax-only").arg("-Wall").arg(&src).output() {
        Ok(out) => assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr)),
        Err(_) => eprintln!("no C compiler; skipped"),
    }
}
