use std::ffi::{CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use mw2v::model::{save_model, train, TrainingConfig};
use mw2v::synthetic::drift_pair;
use mw2v_ffi::*;

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn model_file(dir: &Path) -> CString {
    let config = TrainingConfig {
        dim: 6,
        epochs: 1,
        subsample: None,
        ..Default::default()
    };
    let (model, _) = train(&drift_pair(2_000, 3), &config).unwrap();
    let path = dir.join("m.mw2v");
    save_model(&model, &path).unwrap();
    c(path.to_str().unwrap())
}

fn last_error() -> String {
    let p = mw2v_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn load_query_free() {
    let dir = tempfile::tempdir().unwrap();
    let path = model_file(dir.path());
    unsafe {
        let mut m = ptr::null_mut();
        assert_eq!(mw2v_model_load(path.as_ptr(), &mut m), Mw2vStatus::Ok);
        assert_eq!(mw2v_model_dim(m), 6);
        assert_eq!(mw2v_model_slice_count(m), 2);
        assert!(mw2v_model_vocab_size(m) > 20);
        assert_eq!(CStr::from_ptr(mw2v_model_slice_id(m, 1)).to_str().unwrap(), "s2");
        assert!(mw2v_model_slice_id(m, 2).is_null());

        let mut v = [0f32; 6];
        let (s1, bank) = (c("s1"), c("bank"));
        assert_eq!(mw2v_model_vector(m, s1.as_ptr(), bank.as_ptr(), v.as_mut_ptr(), 6), Mw2vStatus::Ok);
        assert!(v.iter().any(|&x| x != 0.0));
        assert_eq!(
            mw2v_model_vector(m, s1.as_ptr(), bank.as_ptr(), v.as_mut_ptr(), 5),
            Mw2vStatus::BufferTooSmall
        );

        let mut out = [Mw2vNeighbor::default(); 4];
        let mut n = 0;
        let status = mw2v_model_neighbors(m, s1.as_ptr(), bank.as_ptr(), ptr::null(), 4, true, out.as_mut_ptr(), 4, &mut n);
        assert_eq!(status, Mw2vStatus::Ok);
        assert_eq!(n, 4);
        assert!(out.windows(2).all(|w| w[0].cosine >= w[1].cosine));
        for nb in &out {
            let word = CStr::from_ptr(mw2v_model_word(m, nb.word_index)).to_str().unwrap();
            assert_ne!(word, "bank");
        }
        mw2v_model_free(m);
    }
}

#[test]
fn errors_set_status_and_message() {
    let dir = tempfile::tempdir().unwrap();
    let path = model_file(dir.path());
    unsafe {
        let mut m = ptr::null_mut();
        let missing = c("/nonexistent/model.mw2v");
        assert_eq!(mw2v_model_load(missing.as_ptr(), &mut m), Mw2vStatus::Io);
        assert!(m.is_null());
        assert!(last_error().contains("nonexistent"));
        assert_eq!(mw2v_model_load(ptr::null(), &mut m), Mw2vStatus::NullPointer);

        assert_eq!(mw2v_model_load(path.as_ptr(), &mut m), Mw2vStatus::Ok);
        let mut v = [0f32; 6];
        let (s1, s9, nope) = (c("s1"), c("s9"), c("zzzz"));
        assert_eq!(mw2v_model_vector(m, s9.as_ptr(), nope.as_ptr(), v.as_mut_ptr(), 6), Mw2vStatus::UnknownSlice);
        assert_eq!(mw2v_model_vector(m, s1.as_ptr(), nope.as_ptr(), v.as_mut_ptr(), 6), Mw2vStatus::UnknownWord);
        assert!(last_error().contains("zzzz"));
        let bad = [0xffu8, 0];
        assert_eq!(
            mw2v_model_vector(m, bad.as_ptr().cast(), nope.as_ptr(), v.as_mut_ptr(), 6),
            Mw2vStatus::InvalidUtf8
        );
        mw2v_model_free(m);

        assert_eq!(mw2v_model_dim(ptr::null()), 0);
        mw2v_model_free(ptr::null_mut());
    }
}

#[test]
fn corrupted_file_fails_checksum() {
    let dir = tempfile::tempdir().unwrap();
    let path = model_file(dir.path());
    let file = path.to_str().unwrap();
    let mut bytes = std::fs::read(file).unwrap();
    let mid = bytes.len() / 2;
    bytes[mid] ^= 1;
    std::fs::write(file, bytes).unwrap();
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { mw2v_model_load(path.as_ptr(), &mut m) }, Mw2vStatus::Checksum);
}

#[test]
fn header_compiles_as_c() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/mw2v.h");
    assert!(header.exists());
    let Ok(status) = Command::new("cc")
        .args(["-fsyntax-only", "-Wall", "-Werror", "-x", "c"])
        .arg(&header)
        .status()
    else {
        eprintln!("no C compiler found; skipping");
        return;
    };
    assert!(status.success());
}
