//! C interface to phasekit.
//!
//! States and densities are opaque handles created by the `phasekit_state_*`
//! and `phasekit_density_*` constructors and released with the matching
//! `_free`. Every fallible call returns a [`PhasekitStatus`]; on failure the
//! message is available from [`phasekit_last_error`] on the same thread until
//! the next failing call.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use phasekit::modes::{density_from_state, make_number_state};
use phasekit::relations::{check_relation_at, check_relation_min_with};
use phasekit::series::{poisson_kernel, sine_cot_sum};
use phasekit::{
    make_coherent_phase_state, make_coherent_state, make_rotor_wavepacket, make_two_mode_superposition,
    make_two_peak_density, momentum_stats, Complex, ExtremumKind, ModeExpansion, PhaseDensity, PhaseError,
    PhaseProfile, RelationReport, Truncation, UncertaintyResult, WindowedStats,
};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhasekitStatus {
    Ok = 0,
    InvalidInput = 1,
    Unsupported = 2,
    ModeCapExceeded = 3,
    Resolution = 4,
    DegenerateProjection = 5,
    Convergence = 6,
    NullPointer = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhasekitExtremumKind {
    Minimum = 0,
    Maximum = 1,
    Flat = 2,
    NonExtremal = 3,
}

/// Opaque normalized mode expansion.
pub struct PhasekitState(ModeExpansion);

/// Opaque phase density, either from a wavefunction or piecewise constant.
pub struct PhasekitDensity(PhaseDensity);

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct PhasekitWindowedStats {
    pub alpha: f64,
    pub mean: f64,
    pub variance: f64,
    pub edge_density: f64,
    /// A `PhasekitExtremumKind` value.
    pub kind: i32,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct PhasekitUncertainty {
    pub alpha0: f64,
    pub delta_theta: f64,
    pub variance: f64,
    pub edge_density_at_min: f64,
    pub n_extrema_found: usize,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct PhasekitRelation {
    pub alpha: f64,
    pub delta_l: f64,
    pub delta_theta: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub satisfied: bool,
    pub at_global_min: bool,
}

impl From<WindowedStats> for PhasekitWindowedStats {
    fn from(w: WindowedStats) -> Self {
        let kind = match w.kind {
            ExtremumKind::Minimum => PhasekitExtremumKind::Minimum,
            ExtremumKind::Maximum => PhasekitExtremumKind::Maximum,
            ExtremumKind::Flat => PhasekitExtremumKind::Flat,
            ExtremumKind::NonExtremal => PhasekitExtremumKind::NonExtremal,
        };
        Self {
            alpha: w.alpha,
            mean: w.mean,
            variance: w.variance,
            edge_density: w.edge_density,
            kind: kind as i32,
        }
    }
}

impl From<UncertaintyResult> for PhasekitUncertainty {
    fn from(u: UncertaintyResult) -> Self {
        Self {
            alpha0: u.alpha0,
            delta_theta: u.delta_theta,
            variance: u.variance,
            edge_density_at_min: u.edge_density_at_min,
            n_extrema_found: u.n_extrema_found,
        }
    }
}

impl From<RelationReport> for PhasekitRelation {
    fn from(r: RelationReport) -> Self {
        Self {
            alpha: r.alpha,
            delta_l: r.delta_l,
            delta_theta: r.delta_theta,
            lhs: r.lhs,
            rhs: r.rhs,
            margin: r.margin,
            satisfied: r.satisfied,
            at_global_min: r.at_global_min,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

enum Failure {
    Phase(PhaseError),
    Null(&'static str),
}

impl From<PhaseError> for Failure {
    fn from(e: PhaseError) -> Self {
        Failure::Phase(e)
    }
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &PhaseError) -> PhasekitStatus {
    match e {
        PhaseError::InvalidInput(_) => PhasekitStatus::InvalidInput,
        PhaseError::Unsupported(_) => PhasekitStatus::Unsupported,
        PhaseError::ModeCapExceeded { .. } => PhasekitStatus::ModeCapExceeded,
        PhaseError::Resolution(_) => PhasekitStatus::Resolution,
        PhaseError::DegenerateProjection => PhasekitStatus::DegenerateProjection,
        PhaseError::Convergence(_) => PhasekitStatus::Convergence,
    }
}

fn guard<F: FnOnce() -> Result<(), Failure>>(f: F) -> PhasekitStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PhasekitStatus::Ok,
        Ok(Err(Failure::Phase(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Ok(Err(Failure::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            PhasekitStatus::NullPointer
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("internal panic: {msg}"));
            PhasekitStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null(what))
}

unsafe fn write<T>(out: *mut T, value: T, what: &'static str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::Null(what));
    }
    out.write(value);
    Ok(())
}

fn truncation(tail_tol: f64) -> Truncation {
    if tail_tol > 0.0 {
        Truncation::new(tail_tol)
    } else {
        Truncation::default()
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn phasekit_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failing call on this thread, or NULL. The pointer is
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn phasekit_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

unsafe fn emit_state(out: *mut *mut PhasekitState, s: ModeExpansion) -> Result<(), Failure> {
    write(out, Box::into_raw(Box::new(PhasekitState(s))), "out")
}

/// State with coefficients `re[i] + i im[i]` on modes `l_min + i`,
/// normalized on construction. `im` may be NULL for real coefficients.
///
/// # Safety
/// `re` (and `im` when non-null) must point to `n` readable doubles; `out`
/// must be writable.
#[no_mangle]
pub unsafe extern "C" fn phasekit_state_from_coeffs(
    l_min: i64,
    re: *const f64,
    im: *const f64,
    n: usize,
    out: *mut *mut PhasekitState,
) -> PhasekitStatus {
    guard(|| {
        if re.is_null() {
            return Err(Failure::Null("re"));
        }
        let re = std::slice::from_raw_parts(re, n);
        let coeffs: Vec<Complex> = if im.is_null() {
            re.iter().map(|&x| Complex::new(x, 0.0)).collect()
        } else {
            let im = std::slice::from_raw_parts(im, n);
            re.iter().zip(im).map(|(&a, &b)| Complex::new(a, b)).collect()
        };
        let s = ModeExpansion::new(l_min, coeffs, false)?.normalized()?;
        emit_state(out, s)
    })
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn phasekit_state_number(l: i64, out: *mut *mut PhasekitState) -> PhasekitStatus {
    guard(|| emit_state(out, make_number_state(l)?))
}

/// Poisson-kernel packet of width `epsilon` centered at `beta`. A
/// non-positive `tail_tol` selects the default truncation.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn phasekit_state_wavepacket(
    epsilon: f64,
    beta: f64,
    tail_tol: f64,
    out: *mut *mut PhasekitState,
) -> PhasekitStatus {
    guard(|| emit_state(out, make_rotor_wavepacket(epsilon, beta, truncation(tail_tol))?))
}

/// `cos γ e^{ilθ} + sin γ e^{-iβ} e^{iLθ}`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn phasekit_state_two_mode(
    l: i64,
    big_l: i64,
    gamma: f64,
    beta: f64,
    out: *mut *mut PhasekitState,
) -> PhasekitStatus {
    guard(|| emit_state(out, make_two_mode_superposition(l, big_l, gamma, beta)?))
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn phasekit_state_coherent_phase(
    zeta_re: f64,
    zeta_im: f64,
    tail_tol: f64,
    out: *mut *mut PhasekitState,
) -> PhasekitStatus {
    guard(|| {
        emit_state(
            out,
            make_coherent_phase_state(Complex::new(zeta_re, zeta_im), truncation(tail_tol))?,
        )
    })
}

/// Oscillator coherent state with amplitude `r` and phase `β`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn phasekit_state_coherent(
    r: f64,
    beta: f64,
    tail_tol: f64,
    out: *mut *mut PhasekitState,
) -> PhasekitStatus {
    guard(|| emit_state(out, make_coherent_state(r, beta, truncation(tail_tol))?))
}

/// # Safety
/// `state` must be NULL or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn phasekit_state_free(state: *mut PhasekitState) {
    if !state.is_null() {
        drop(Box::from_raw(state));
    }
}

/// # Safety
/// `state` must be a live handle; `l_min` and `len` must be writable.
#[no_mangle]
pub unsafe extern "C" fn phasekit_state_shape(
    state: *const PhasekitState,
    l_min: *mut i64,
    len: *mut usize,
) -> PhasekitStatus {
    guard(|| {
        let s = &deref(state, "state")?.0;
        write(l_min, s.l_min(), "l_min")?;
        write(len, s.len(), "len")
    })
}

/// Copies up to `cap` coefficients into `re` and `im`.
///
/// # Safety
/// `state` must be a live handle; `re` and `im` must hold `cap` doubles.
#[no_mangle]
pub unsafe extern "C" fn phasekit_state_coeffs(
    state: *const PhasekitState,
    re: *mut f64,
    im: *mut f64,
    cap: usize,
) -> PhasekitStatus {
    guard(|| {
        let s = &deref(state, "state")?.0;
        if re.is_null() || im.is_null() {
            return Err(Failure::Null("re/im"));
        }
        if cap < s.len() {
            return Err(
                PhaseError::InvalidInput(format!("buffer holds {cap} coefficients, state has {}", s.len())).into(),
            );
        }
        for (i, c) in s.coeffs().iter().enumerate() {
            re.add(i).write(c.re);
            im.add(i).write(c.im);
        }
        Ok(())
    })
}

/// # Safety
/// `state` must be a live handle; `mean` and `std` must be writable.
#[no_mangle]
pub unsafe extern "C" fn phasekit_state_momentum(
    state: *const PhasekitState,
    mean: *mut f64,
    std: *mut f64,
) -> PhasekitStatus {
    guard(|| {
        let m = momentum_stats(&deref(state, "state")?.0)?;
        write(mean, m.mean, "mean")?;
        write(std, m.std, "std")
    })
}

/// # Safety
/// `state` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn phasekit_state_windowed_stats(
    state: *const PhasekitState,
    alpha: f64,
    out: *mut PhasekitWindowedStats,
) -> PhasekitStatus {
    guard(|| {
        let p = PhaseProfile::new(&deref(state, "state")?.0)?;
        write(out, p.stats(alpha).into(), "out")
    })
}

/// Window-minimized uncertainty with `grid_n` origins for bracketing.
///
/// # Safety
/// `state` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn phasekit_state_uncertainty(
    state: *const PhasekitState,
    grid_n: usize,
    out: *mut PhasekitUncertainty,
) -> PhasekitStatus {
    guard(|| {
        let p = PhaseProfile::new(&deref(state, "state")?.0)?;
        write(out, p.uncertainty(grid_n)?.into(), "out")
    })
}

/// # Safety
/// `state` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn phasekit_relation_at(
    state: *const PhasekitState,
    alpha: f64,
    out: *mut PhasekitRelation,
) -> PhasekitStatus {
    guard(|| write(out, check_relation_at(&deref(state, "state")?.0, alpha)?.into(), "out"))
}

/// # Safety
/// `state` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn phasekit_relation_min(
    state: *const PhasekitState,
    grid_n: usize,
    out: *mut PhasekitRelation,
) -> PhasekitStatus {
    guard(|| {
        write(
            out,
            check_relation_min_with(&deref(state, "state")?.0, grid_n)?.into(),
            "out",
        )
    })
}

unsafe fn emit_density(out: *mut *mut PhasekitDensity, d: PhaseDensity) -> Result<(), Failure> {
    write(out, Box::into_raw(Box::new(PhasekitDensity(d))), "out")
}

/// Two opposite flat packets of width `delta` centred on `±π/2`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn phasekit_density_two_peak(delta: f64, out: *mut *mut PhasekitDensity) -> PhasekitStatus {
    guard(|| emit_density(out, make_two_peak_density(delta)?))
}

/// # Safety
/// `state` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn phasekit_density_from_state(
    state: *const PhasekitState,
    out: *mut *mut PhasekitDensity,
) -> PhasekitStatus {
    guard(|| emit_density(out, density_from_state(&deref(state, "state")?.0)?))
}

/// # Safety
/// `density` must be NULL or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn phasekit_density_free(density: *mut PhasekitDensity) {
    if !density.is_null() {
        drop(Box::from_raw(density));
    }
}

/// `ρ(θ)`.
///
/// # Safety
/// `density` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn phasekit_density_eval(
    density: *const PhasekitDensity,
    theta: f64,
    out: *mut f64,
) -> PhasekitStatus {
    guard(|| write(out, deref(density, "density")?.0.eval(theta), "out"))
}

/// # Safety
/// `density` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn phasekit_density_windowed_stats(
    density: *const PhasekitDensity,
    alpha: f64,
    out: *mut PhasekitWindowedStats,
) -> PhasekitStatus {
    guard(|| {
        let p = PhaseProfile::new(&deref(density, "density")?.0)?;
        write(out, p.stats(alpha).into(), "out")
    })
}

/// # Safety
/// `density` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn phasekit_density_uncertainty(
    density: *const PhasekitDensity,
    grid_n: usize,
    out: *mut PhasekitUncertainty,
) -> PhasekitStatus {
    guard(|| {
        let p = PhaseProfile::new(&deref(density, "density")?.0)?;
        write(out, p.uncertainty(grid_n)?.into(), "out")
    })
}

/// Poisson kernel at width `epsilon`, normalized against dθ/2π.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn phasekit_poisson_kernel(theta: f64, epsilon: f64, out: *mut f64) -> PhasekitStatus {
    guard(|| write(out, poisson_kernel(theta, epsilon)?, "out"))
}

/// Damped `Σ 2 sin(nθ)`, which tends to `cot(θ/2)`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn phasekit_sine_cot_sum(theta: f64, epsilon: f64, out: *mut f64) -> PhasekitStatus {
    guard(|| write(out, sine_cot_sum(theta, epsilon)?, "out"))
}
