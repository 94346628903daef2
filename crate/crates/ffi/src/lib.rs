//! C ABI over a loaded `mw2v` model.
//!
//! A model is opened with [`mw2v_model_load`] and released with
//! [`mw2v_model_free`]. Fallible calls return an [`Mw2vStatus`]; on failure
//! [`mw2v_last_error`] describes the most recent error of the calling
//! thread. Strings are NUL-terminated UTF-8. Pointers returned by the
//! library stay valid until the model is freed.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use mw2v::corpus::{GlobalIndex, SliceId};
use mw2v::eval::{nearest_neighbors, ComposedEmbeddings};
use mw2v::model::read_embeddings;
use mw2v::Error;

/// Result code of a fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mw2vStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Io = 3,
    /// Malformed file, bad magic, unsupported version or truncation.
    Format = 4,
    Checksum = 5,
    UnknownSlice = 6,
    UnknownWord = 7,
    InvalidArgument = 8,
    /// The output buffer is shorter than required.
    BufferTooSmall = 9,
    /// A Rust panic was caught at the boundary.
    Panic = 10,
    Other = 11,
}

/// One neighbour returned by [`mw2v_model_neighbors`].
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Mw2vNeighbor {
    /// Global word index; see [`mw2v_model_word`].
    pub word_index: u32,
    pub cosine: f64,
}

/// Opaque model handle.
pub struct Mw2vModel {
    emb: ComposedEmbeddings,
    words: Vec<CString>,
    slices: Vec<CString>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: impl Into<String>) {
    let mut bytes = message.into().into_bytes();
    bytes.retain(|&b| b != 0);
    let message = CString::new(bytes).expect("NUL bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(message));
}

fn status_of(err: &Error) -> Mw2vStatus {
    match err {
        Error::File { .. } | Error::Io(_) => Mw2vStatus::Io,
        Error::BadMagic
        | Error::UnsupportedVersion { .. }
        | Error::Truncated
        | Error::Format { .. }
        | Error::Json(_) => Mw2vStatus::Format,
        Error::Checksum { .. } => Mw2vStatus::Checksum,
        Error::UnknownSlice(_) => Mw2vStatus::UnknownSlice,
        Error::UnknownWord { .. } => Mw2vStatus::UnknownWord,
        Error::InvalidInput(_) | Error::ZeroVector => Mw2vStatus::InvalidArgument,
        _ => Mw2vStatus::Other,
    }
}

struct Failure(Mw2vStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

/// Runs `body`, recording any failure or panic as the thread's last error.
fn guard(body: impl FnOnce() -> Result<(), Failure>) -> Mw2vStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => Mw2vStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("panic inside mw2v");
            Mw2vStatus::Panic
        }
    }
}

/// # Safety
/// `p` is null or a valid NUL-terminated string.
unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure(Mw2vStatus::NullPointer, format!("{name} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(Mw2vStatus::InvalidUtf8, format!("{name} is not valid UTF-8")))
}

/// # Safety
/// `p` is null or a valid NUL-terminated string.
unsafe fn slice_arg(p: *const c_char, name: &str) -> Result<SliceId, Failure> {
    Ok(SliceId::new(str_arg(p, name)?)?)
}

fn model_ref<'a>(model: *const Mw2vModel) -> Result<&'a Mw2vModel, Failure> {
    // SAFETY: non-null handles come from `mw2v_model_load`.
    unsafe { model.as_ref() }.ok_or_else(|| Failure(Mw2vStatus::NullPointer, "model is null".into()))
}

fn to_cstring(s: &str) -> CString {
    CString::new(s).unwrap_or_else(|_| CString::new(s.replace('\0', "")).unwrap())
}

/// Opens a binary model, a TSV export directory or a JSON export and
/// stores a new handle in `*out`.
///
/// # Safety
/// `path` is a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn mw2v_model_load(path: *const c_char, out: *mut *mut Mw2vModel) -> Mw2vStatus {
    guard(|| {
        if out.is_null() {
            return Err(Failure(Mw2vStatus::NullPointer, "out is null".into()));
        }
        *out = ptr::null_mut();
        let emb = read_embeddings(str_arg(path, "path")?)?;
        let words = emb.words().iter().map(|w| to_cstring(w)).collect();
        let slices = emb.slices().iter().map(|s| to_cstring(s.id().as_str())).collect();
        *out = Box::into_raw(Box::new(Mw2vModel { emb, words, slices }));
        Ok(())
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `model` is null or a handle from [`mw2v_model_load`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mw2v_model_free(model: *mut Mw2vModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Embedding dimension, 0 for a null handle.
///
/// # Safety
/// `model` is null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mw2v_model_dim(model: *const Mw2vModel) -> usize {
    model.as_ref().map_or(0, |m| m.emb.dim())
}

/// Size of the global vocabulary, 0 for a null handle.
///
/// # Safety
/// `model` is null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mw2v_model_vocab_size(model: *const Mw2vModel) -> usize {
    model.as_ref().map_or(0, |m| m.words.len())
}

/// # Safety
/// `model` is null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mw2v_model_slice_count(model: *const Mw2vModel) -> usize {
    model.as_ref().map_or(0, |m| m.slices.len())
}

/// Id of slice `index`, or null when out of range.
///
/// # Safety
/// `model` is null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mw2v_model_slice_id(model: *const Mw2vModel, index: usize) -> *const c_char {
    model
        .as_ref()
        .and_then(|m| m.slices.get(index))
        .map_or(ptr::null(), |s| s.as_ptr())
}

/// Word with global index `index`, or null when out of range.
///
/// # Safety
/// `model` is null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mw2v_model_word(model: *const Mw2vModel, index: u32) -> *const c_char {
    model
        .as_ref()
        .and_then(|m| m.words.get(index as usize))
        .map_or(ptr::null(), |w| w.as_ptr())
}

/// Copies the composed vector of `word` in `slice` into `out`, which holds
/// `len >= dim` floats.
///
/// # Safety
/// Strings are NUL-terminated; `out` points to `len` writable floats.
#[no_mangle]
pub unsafe extern "C" fn mw2v_model_vector(
    model: *const Mw2vModel,
    slice: *const c_char,
    word: *const c_char,
    out: *mut f32,
    len: usize,
) -> Mw2vStatus {
    guard(|| {
        let m = model_ref(model)?;
        let slice = slice_arg(slice, "slice")?;
        let word = str_arg(word, "word")?;
        if out.is_null() {
            return Err(Failure(Mw2vStatus::NullPointer, "out is null".into()));
        }
        let (_, _, v) = m.emb.lookup(&slice, word)?;
        if len < v.len() {
            return Err(Failure(
                Mw2vStatus::BufferTooSmall,
                format!("buffer holds {len} floats, need {}", v.len()),
            ));
        }
        std::slice::from_raw_parts_mut(out, v.len()).copy_from_slice(v);
        Ok(())
    })
}

/// Up to `k` nearest neighbours by cosine of `word` in `slice`, searched
/// in `target_slice` (null means `slice`). Writes at most `capacity`
/// entries to `out` and the number written to `*count`.
///
/// # Safety
/// Strings are null or NUL-terminated as documented; `out` points to
/// `capacity` writable entries and `count` is writable.
#[no_mangle]
pub unsafe extern "C" fn mw2v_model_neighbors(
    model: *const Mw2vModel,
    slice: *const c_char,
    word: *const c_char,
    target_slice: *const c_char,
    k: usize,
    exclude_query: bool,
    out: *mut Mw2vNeighbor,
    capacity: usize,
    count: *mut usize,
) -> Mw2vStatus {
    guard(|| {
        let m = model_ref(model)?;
        let slice = slice_arg(slice, "slice")?;
        let word = str_arg(word, "word")?;
        let target = if target_slice.is_null() {
            slice.clone()
        } else {
            slice_arg(target_slice, "target_slice")?
        };
        if out.is_null() || count.is_null() {
            return Err(Failure(Mw2vStatus::NullPointer, "out or count is null".into()));
        }
        *count = 0;
        if capacity < k {
            return Err(Failure(
                Mw2vStatus::BufferTooSmall,
                format!("buffer holds {capacity} neighbours, k is {k}"),
            ));
        }
        let (_, _, query) = m.emb.lookup(&slice, word)?;
        let found = nearest_neighbors(&m.emb, query, &target, k, exclude_query.then_some(word))?;
        let out = std::slice::from_raw_parts_mut(out, capacity);
        for (slot, n) in out.iter_mut().zip(&found) {
            let GlobalIndex(word_index) = n.index;
            *slot = Mw2vNeighbor {
                word_index,
                cosine: n.cosine,
            };
        }
        *count = found.len();
        Ok(())
    })
}

/// Message of the last failed call on this thread, or null. Valid until
/// the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn mw2v_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}
