//! C ABI for the `bnbp` library.
//!
//! Every function returns a [`BnbpStatus`]; results are written through out
//! pointers. On failure the message is available from
//! [`bnbp_last_error_message`] on the same thread until the next failing
//! call. Corpora and samplers are opaque handles released with their
//! `_free` functions. Panics are caught at the boundary and reported as
//! [`BnbpStatus::Panic`].
//!
//! Pointer arguments are checked for null; handles must come from this
//! library and must not be used after being freed.

// Entry points are safe to call with null pointers, so they are not marked
// `unsafe`; the remaining pointer contract is the C caller's.
#![allow(clippy::not_unsafe_ptr_arg_deref)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use bnbp::asymptotics::{phi_3bnbp, phi_bnbp, phi_j_bnbp, xi_3bnbp, xi_bnbp, Asymptotic};
use bnbp::commands::settings::{parse_settings, sampler_config};
use bnbp::corpus::Corpus;
use bnbp::counts::negbin_ln_pmf;
use bnbp::hbnbp::Sampler;
use bnbp::Error;

/// Result code of every exported function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BnbpStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// A parameter or setting is invalid.
    InvalidArgument = 2,
    /// The operation is undefined on the given input.
    Domain = 3,
    /// A numerical routine failed.
    Numeric = 4,
    /// The requested expectation is infinite.
    Divergent = 5,
    /// Malformed input data or an unreadable file.
    Data = 6,
    /// An output buffer is too small; the required length was written.
    BufferTooSmall = 7,
    /// Internal panic (a bug).
    Panic = 8,
}

/// Parsed bag-of-words corpus.
pub struct BnbpCorpus(Corpus);

/// Posterior sampler for the hierarchical admixture model.
pub struct BnbpSampler(Sampler);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> BnbpStatus {
    match e {
        Error::Parameter(_) | Error::Usage(_) => BnbpStatus::InvalidArgument,
        Error::Domain(_) => BnbpStatus::Domain,
        Error::Numeric(_) => BnbpStatus::Numeric,
        Error::Divergent(_) => BnbpStatus::Divergent,
        Error::Data(_) | Error::Io(_) | Error::Json(_) => BnbpStatus::Data,
    }
}

/// Failure raised inside a wrapper body.
struct Failure(BnbpStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(name: &str) -> Failure {
    Failure(BnbpStatus::NullPointer, format!("{name} is null"))
}

fn guard(body: impl FnOnce() -> Result<(), Failure>) -> BnbpStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => BnbpStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            BnbpStatus::Panic
        }
    }
}

fn write<T>(out: *mut T, value: T, name: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(name));
    }
    // SAFETY: checked non-null; the caller guarantees it points to writable T.
    unsafe { out.write(value) };
    Ok(())
}

fn c_str<'a>(p: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(name));
    }
    // SAFETY: checked non-null; the caller guarantees a NUL-terminated string.
    unsafe { CStr::from_ptr(p) }
        .to_str()
        .map_err(|_| Failure(BnbpStatus::Data, format!("{name} is not valid UTF-8")))
}

fn handle<'a, T>(p: *const T, name: &str) -> Result<&'a T, Failure> {
    // SAFETY: the caller passes a handle obtained from this library.
    unsafe { p.as_ref() }.ok_or_else(|| null(name))
}

fn handle_mut<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, Failure> {
    // SAFETY: the caller passes a handle obtained from this library and does
    // not use it concurrently.
    unsafe { p.as_mut() }.ok_or_else(|| null(name))
}

fn write_pair(v: Asymptotic, exact: *mut f64, asymptote: *mut f64) -> Result<(), Failure> {
    write(exact, v.exact, "exact")?;
    if !asymptote.is_null() {
        write(asymptote, v.asymptote, "asymptote")?;
    }
    Ok(())
}

/// Message of the last failure on this thread, or null if none. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn bnbp_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Expected number of data points of the negative binomial process over a
/// beta process. `asymptote` may be null.
#[no_mangle]
pub extern "C" fn bnbp_expected_points(
    r: f64,
    mass: f64,
    concentration: f64,
    exact: *mut f64,
    asymptote: *mut f64,
) -> BnbpStatus {
    guard(|| write_pair(xi_bnbp(r, mass, concentration)?, exact, asymptote))
}

/// Expected number of clusters. `discount` = 0 gives the beta process, a
/// value in (0, 1) the three-parameter process. `asymptote` may be null.
#[no_mangle]
pub extern "C" fn bnbp_expected_clusters(
    r: f64,
    mass: f64,
    concentration: f64,
    discount: f64,
    exact: *mut f64,
    asymptote: *mut f64,
) -> BnbpStatus {
    guard(|| {
        let v = if discount == 0.0 {
            phi_bnbp(r, mass, concentration)?
        } else {
            phi_3bnbp(r, mass, concentration, discount)?
        };
        write_pair(v, exact, asymptote)
    })
}

/// Expected number of data points of the three-parameter process.
#[no_mangle]
pub extern "C" fn bnbp_expected_points_3bp(
    r: f64,
    mass: f64,
    concentration: f64,
    discount: f64,
    exact: *mut f64,
) -> BnbpStatus {
    guard(|| {
        write(
            exact,
            xi_3bnbp(r, mass, concentration, discount)?.exact,
            "exact",
        )
    })
}

/// Expected number of clusters of size exactly `j` (beta process).
/// `asymptote` may be null.
#[no_mangle]
pub extern "C" fn bnbp_expected_clusters_of_size(
    j: u64,
    r: f64,
    mass: f64,
    concentration: f64,
    exact: *mut f64,
    asymptote: *mut f64,
) -> BnbpStatus {
    guard(|| write_pair(phi_j_bnbp(j, r, mass, concentration)?, exact, asymptote))
}

/// Log probability of `k` under the negative binomial law NB(r, b).
#[no_mangle]
pub extern "C" fn bnbp_negbin_ln_pmf(k: u64, r: f64, b: f64, out: *mut f64) -> BnbpStatus {
    guard(|| write(out, negbin_ln_pmf(k, r, b)?, "out"))
}

/// Parses a corpus from text in the library's corpus format.
#[no_mangle]
pub extern "C" fn bnbp_corpus_from_text(
    text: *const c_char,
    out: *mut *mut BnbpCorpus,
) -> BnbpStatus {
    guard(|| {
        let corpus = Corpus::read(c_str(text, "text")?.as_bytes(), None)?;
        write(out, Box::into_raw(Box::new(BnbpCorpus(corpus))), "out")
    })
}

/// Reads a corpus file.
#[no_mangle]
pub extern "C" fn bnbp_corpus_read(path: *const c_char, out: *mut *mut BnbpCorpus) -> BnbpStatus {
    guard(|| {
        let corpus = Corpus::read_path(std::path::Path::new(c_str(path, "path")?), None)?;
        write(out, Box::into_raw(Box::new(BnbpCorpus(corpus))), "out")
    })
}

#[no_mangle]
pub extern "C" fn bnbp_corpus_num_documents(
    corpus: *const BnbpCorpus,
    out: *mut usize,
) -> BnbpStatus {
    guard(|| write(out, handle(corpus, "corpus")?.0.documents.len(), "out"))
}

/// Releases a corpus; null is ignored.
#[no_mangle]
pub extern "C" fn bnbp_corpus_free(corpus: *mut BnbpCorpus) {
    if !corpus.is_null() {
        // SAFETY: the pointer came from Box::into_raw in this library.
        drop(unsafe { Box::from_raw(corpus) });
    }
}

/// Creates a sampler over `corpus` from `key = value` settings (one per
/// line; null or empty for defaults). The corpus may be freed afterwards.
#[no_mangle]
pub extern "C" fn bnbp_sampler_new(
    corpus: *const BnbpCorpus,
    settings: *const c_char,
    out: *mut *mut BnbpSampler,
) -> BnbpStatus {
    guard(|| {
        let corpus = &handle(corpus, "corpus")?.0;
        let text = if settings.is_null() {
            ""
        } else {
            c_str(settings, "settings")?
        };
        let config = sampler_config(&parse_settings(text)?)?;
        let sampler = Sampler::new(corpus, config)?;
        write(out, Box::into_raw(Box::new(BnbpSampler(sampler))), "out")
    })
}

/// Runs `sweeps` Gibbs sweeps.
#[no_mangle]
pub extern "C" fn bnbp_sampler_sweep(sampler: *mut BnbpSampler, sweeps: usize) -> BnbpStatus {
    guard(|| {
        let s = &mut handle_mut(sampler, "sampler")?.0;
        for _ in 0..sweeps {
            s.sweep();
        }
        Ok(())
    })
}

/// Number of instantiated components.
#[no_mangle]
pub extern "C" fn bnbp_sampler_num_components(
    sampler: *const BnbpSampler,
    out: *mut usize,
) -> BnbpStatus {
    guard(|| {
        write(
            out,
            handle(sampler, "sampler")?.0.state.num_components(),
            "out",
        )
    })
}

/// Number of components whose shared weight exceeds `threshold`.
#[no_mangle]
pub extern "C" fn bnbp_sampler_used_components(
    sampler: *const BnbpSampler,
    threshold: f64,
    out: *mut usize,
) -> BnbpStatus {
    guard(|| {
        write(
            out,
            handle(sampler, "sampler")?
                .0
                .state
                .used_components(threshold),
            "out",
        )
    })
}

/// Copies the shared component weights into `buffer` of length `capacity`
/// and writes their count to `written`. If the buffer is too small, nothing
/// is copied, the required length is written and `BufferTooSmall` returned.
#[no_mangle]
pub extern "C" fn bnbp_sampler_copy_weights(
    sampler: *const BnbpSampler,
    buffer: *mut f64,
    capacity: usize,
    written: *mut usize,
) -> BnbpStatus {
    guard(|| {
        let b0 = &handle(sampler, "sampler")?.0.state.b0;
        write(written, b0.len(), "written")?;
        if b0.len() > capacity {
            return Err(Failure(
                BnbpStatus::BufferTooSmall,
                format!("buffer holds {capacity} values, {} needed", b0.len()),
            ));
        }
        if buffer.is_null() && !b0.is_empty() {
            return Err(null("buffer"));
        }
        // SAFETY: buffer is non-null with room for `capacity` >= len values.
        unsafe { ptr::copy_nonoverlapping(b0.as_ptr(), buffer, b0.len()) };
        Ok(())
    })
}

/// Releases a sampler; null is ignored.
#[no_mangle]
pub extern "C" fn bnbp_sampler_free(sampler: *mut BnbpSampler) {
    if !sampler.is_null() {
        // SAFETY: the pointer came from Box::into_raw in this library.
        drop(unsafe { Box::from_raw(sampler) });
    }
}
