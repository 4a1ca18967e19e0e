//! C ABI over the core crate. Objects are opaque handles released with the
//! matching `_free` call. Fallible calls return an [`HsStatus`] and write
//! results through out-pointers; the message for the last failure on the
//! calling thread is available from [`hs_last_error_message`].

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::slice;

use hecke_spectra::error::Error;
use hecke_spectra::lowlying::{pair_density, PwTestFunction, SymmetryType};
use hecke_spectra::measures::{normalize_with, MeasureKind, MeasureSpec, Quadrature, TorusPoint, TorusRule};
use hecke_spectra::padic_hecke::{Cocharacter, HeckeAlgebra, HeckeElement};
use hecke_spectra::satake::{satake_params_from_eigenvalues, satake_transform_in, SymLaurent};
use hecke_spectra::weyl_law::{main_term, CountKind, GroupDims, MainTermParams};
use num_complex::Complex64;

/// Result codes of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    BudgetExceeded = 3,
    Numeric = 4,
    Panic = 5,
}

/// Spherical Hecke algebra of PGL(n) at one prime.
pub struct HsHecke(HeckeAlgebra);

/// Symmetric Laurent polynomial on the torus.
pub struct HsLaurent(SymLaurent);

/// Normalized measure on the tempered torus with its quadrature rule.
pub struct HsMeasure {
    spec: MeasureSpec,
    rule: TorusRule,
}

pub const HS_MEASURE_PLANCHEREL: u32 = 0;
pub const HS_MEASURE_SATO_TATE: u32 = 1;

pub const HS_SYMMETRY_U: u32 = 0;
pub const HS_SYMMETRY_SO_EVEN: u32 = 1;
pub const HS_SYMMETRY_SO_ODD: u32 = 2;
pub const HS_SYMMETRY_O: u32 = 3;

pub const HS_COUNT_NONEQUIVARIANT: u32 = 0;
pub const HS_COUNT_EQUIVARIANT: u32 = 1;

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior nul removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> HsStatus {
    match e {
        Error::BudgetExceeded { .. } => HsStatus::BudgetExceeded,
        Error::RootFinding { .. } | Error::Quadrature(_) | Error::Envelope { .. } => HsStatus::Numeric,
        _ => HsStatus::InvalidInput,
    }
}

enum Failure {
    Null(&'static str),
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> HsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            HsStatus::Ok
        }
        Ok(Err(Failure::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            HsStatus::NullPointer
        }
        Ok(Err(Failure::Core(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            HsStatus::Panic
        }
    }
}

unsafe fn borrow<'a, T>(ptr: *const T, what: &'static str) -> Result<&'a T, Failure> {
    ptr.as_ref().ok_or(Failure::Null(what))
}

unsafe fn out<'a, T>(ptr: *mut T, what: &'static str) -> Result<&'a mut T, Failure> {
    ptr.as_mut().ok_or(Failure::Null(what))
}

unsafe fn array<'a, T>(ptr: *const T, len: usize, what: &'static str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if ptr.is_null() {
        return Err(Failure::Null(what));
    }
    Ok(slice::from_raw_parts(ptr, len))
}

unsafe fn array_mut<'a, T>(ptr: *mut T, len: usize, what: &'static str) -> Result<&'a mut [T], Failure> {
    if len == 0 {
        return Ok(&mut []);
    }
    if ptr.is_null() {
        return Err(Failure::Null(what));
    }
    Ok(slice::from_raw_parts_mut(ptr, len))
}

fn cocharacter(h: &HsHecke, omega: &[i64]) -> Result<Cocharacter, Failure> {
    if omega.len() != h.0.rank() {
        return Err(Error::invalid(format!("omega has {} entries, expected {}", omega.len(), h.0.rank())).into());
    }
    Ok(Cocharacter::new(omega.to_vec())?)
}

/// Creates the Hecke algebra of PGL(`n`) at the prime `p`.
///
/// # Safety
/// `out_handle` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn hs_hecke_new(n: usize, p: u64, out_handle: *mut *mut HsHecke) -> HsStatus {
    guard(|| {
        let slot = out(out_handle, "out_handle")?;
        *slot = Box::into_raw(Box::new(HsHecke(HeckeAlgebra::new(n, p)?)));
        Ok(())
    })
}

/// Releases a Hecke algebra handle. Null is ignored.
///
/// # Safety
/// `h` must come from [`hs_hecke_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn hs_hecke_free(h: *mut HsHecke) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Number of left cosets in the double coset of `omega`.
///
/// # Safety
/// `h` must be a live handle and `omega` must point to `len` integers.
#[no_mangle]
pub unsafe extern "C" fn hs_hecke_degree(h: *const HsHecke, omega: *const i64, len: usize, out_degree: *mut u64) -> HsStatus {
    guard(|| {
        let h = borrow(h, "h")?;
        let w = cocharacter(h, array(omega, len, "omega")?)?;
        *out(out_degree, "out_degree")? = h.0.degree(&w)?;
        Ok(())
    })
}

/// Satake transform of the characteristic function of the double coset of `omega`.
///
/// # Safety
/// `h` must be a live handle, `omega` must point to `len` integers and
/// `out_handle` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hs_hecke_satake(
    h: *const HsHecke,
    omega: *const i64,
    len: usize,
    out_handle: *mut *mut HsLaurent,
) -> HsStatus {
    guard(|| {
        let h = borrow(h, "h")?;
        let w = cocharacter(h, array(omega, len, "omega")?)?;
        let f = satake_transform_in(&h.0, &HeckeElement::basis(&w, h.0.prime()))?;
        *out(out_handle, "out_handle")? = Box::into_raw(Box::new(HsLaurent(f)));
        Ok(())
    })
}

/// Evaluates `f` at the torus point with the given `n` angles.
///
/// # Safety
/// `f` must be a live handle, `angles` must point to `len` doubles and the
/// outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn hs_laurent_eval(
    f: *const HsLaurent,
    angles: *const f64,
    len: usize,
    out_re: *mut f64,
    out_im: *mut f64,
) -> HsStatus {
    guard(|| {
        let f = borrow(f, "f")?;
        let angles = array(angles, len, "angles")?;
        if len != f.0.rank() {
            return Err(Error::invalid(format!("expected {} angles, got {len}", f.0.rank())).into());
        }
        let z = f.0.torus_evaluator().eval(angles);
        *out(out_re, "out_re")? = z.re;
        *out(out_im, "out_im")? = z.im;
        Ok(())
    })
}

/// Releases a Laurent polynomial handle. Null is ignored.
///
/// # Safety
/// `f` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn hs_laurent_free(f: *mut HsLaurent) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// Recovers the `len + 1` Satake parameters from `len` Hecke eigenvalues.
///
/// # Safety
/// The eigenvalue arrays must hold `len` doubles, the root arrays `len + 1`.
#[no_mangle]
pub unsafe extern "C" fn hs_satake_params_from_eigenvalues(
    p: u64,
    lambda_re: *const f64,
    lambda_im: *const f64,
    len: usize,
    roots_re: *mut f64,
    roots_im: *mut f64,
    out_residual: *mut f64,
) -> HsStatus {
    guard(|| {
        let re = array(lambda_re, len, "lambda_re")?;
        let im = array(lambda_im, len, "lambda_im")?;
        let lambdas: Vec<Complex64> = re.iter().zip(im).map(|(&a, &b)| Complex64::new(a, b)).collect();
        let ex = satake_params_from_eigenvalues(&lambdas, p)?;
        let rr = array_mut(roots_re, len + 1, "roots_re")?;
        let ri = array_mut(roots_im, len + 1, "roots_im")?;
        for (k, z) in ex.parameter.values().iter().enumerate() {
            rr[k] = z.re;
            ri[k] = z.im;
        }
        if !out_residual.is_null() {
            *out_residual = ex.residual;
        }
        Ok(())
    })
}

/// Creates a normalized measure of kind `HS_MEASURE_*` on the rank-`n` torus.
/// The prime is ignored for the Sato-Tate measure.
///
/// # Safety
/// `out_handle` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hs_measure_new(kind: u32, n: usize, p: u64, out_handle: *mut *mut HsMeasure) -> HsStatus {
    guard(|| {
        let slot = out(out_handle, "out_handle")?;
        let kind = match kind {
            HS_MEASURE_PLANCHEREL => MeasureKind::Plancherel { p },
            HS_MEASURE_SATO_TATE => MeasureKind::SatoTate,
            k => return Err(Error::invalid(format!("unknown measure kind {k}")).into()),
        };
        let q = Quadrature::default();
        let spec = normalize_with(&MeasureSpec::new(kind, n)?, &q)?;
        let rule = TorusRule::for_spec(&spec, &q)?;
        *slot = Box::into_raw(Box::new(HsMeasure { spec, rule }));
        Ok(())
    })
}

/// Normalized density at the point with `n` angles summing to zero mod 2 pi.
///
/// # Safety
/// `m` must be a live handle and `angles` must point to `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn hs_measure_density(m: *const HsMeasure, angles: *const f64, len: usize, out_value: *mut f64) -> HsStatus {
    guard(|| {
        let m = borrow(m, "m")?;
        let x = TorusPoint::new(array(angles, len, "angles")?)?;
        if x.rank() != m.spec.n {
            return Err(Error::invalid(format!("expected {} angles, got {len}", m.spec.n)).into());
        }
        *out(out_value, "out_value")? = m.spec.density(&x)?;
        Ok(())
    })
}

/// Integral of `f` against the measure.
///
/// # Safety
/// Both handles must be live and the outputs writable.
#[no_mangle]
pub unsafe extern "C" fn hs_measure_pair(
    m: *const HsMeasure,
    f: *const HsLaurent,
    out_re: *mut f64,
    out_im: *mut f64,
) -> HsStatus {
    guard(|| {
        let m = borrow(m, "m")?;
        let f = borrow(f, "f")?;
        let z = m.rule.pair(&f.0)?;
        *out(out_re, "out_re")? = z.re;
        *out(out_im, "out_im")? = z.im;
        Ok(())
    })
}

/// Releases a measure handle. Null is ignored.
///
/// # Safety
/// `m` must come from [`hs_measure_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn hs_measure_free(m: *mut HsMeasure) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Pairing of the one-level density of symmetry `HS_SYMMETRY_*` with the
/// Fejer-type test function of Fourier support `[-beta, beta]`.
///
/// # Safety
/// `out_value` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hs_pair_density(symmetry: u32, beta: f64, out_value: *mut f64) -> HsStatus {
    guard(|| {
        let s = match symmetry {
            HS_SYMMETRY_U => SymmetryType::U,
            HS_SYMMETRY_SO_EVEN => SymmetryType::SoEven,
            HS_SYMMETRY_SO_ODD => SymmetryType::SoOdd,
            HS_SYMMETRY_O => SymmetryType::O,
            k => return Err(Error::invalid(format!("unknown symmetry type {k}")).into()),
        };
        *out(out_value, "out_value")? = pair_density(s, &PwTestFunction::new(beta)?)?;
        Ok(())
    })
}

/// Weyl-law main term for PGL(`n`) acting on an ambient space of dimension `ambient`.
///
/// # Safety
/// `out_value` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hs_main_term(
    kind: u32,
    n: u32,
    ambient: u32,
    vol: f64,
    d_sigma: u32,
    n_z: u32,
    mu: f64,
    out_value: *mut f64,
) -> HsStatus {
    guard(|| {
        let kind = match kind {
            HS_COUNT_NONEQUIVARIANT => CountKind::Nonequivariant,
            HS_COUNT_EQUIVARIANT => CountKind::Equivariant,
            k => return Err(Error::invalid(format!("unknown count kind {k}")).into()),
        };
        let dims = GroupDims::new(n, ambient)?;
        let params = MainTermParams { vol, d_sigma, delta_alpha: 1, n_z_alpha: n_z };
        *out(out_value, "out_value")? = main_term(kind, &dims, &params, mu)?;
        Ok(())
    })
}

/// Message for the last failed call on this thread, or null. The pointer
/// stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn hs_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static nul-terminated string.
#[no_mangle]
pub extern "C" fn hs_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
