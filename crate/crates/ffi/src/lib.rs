//! C ABI over the `qdopt` engine.
//!
//! Objects cross the boundary as opaque handles created by `*_new`-style
//! functions and released by the matching `*_free`. Every fallible call
//! returns a [`QdoptStatus`]; the message of the most recent failure on the
//! calling thread is available from [`qdopt_last_error_message`].

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr};
use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use qdopt::analysis::{zero_point_sigma, ChainModel};
use qdopt::grid::{AxisSpec, GridSpec};
use qdopt::observables::{bond_length_stats, nuclear_marginal};
use qdopt::operators::{auto_cap, build_h2plus_reduced, build_harmonic, build_point_charge_electronic};
use qdopt::propagator::{evolve_to_ground_state, PropagatorParams, SplitOperator};
use qdopt::{Error, ErrorCategory, HamiltonianModel, ParticleMasses, WaveFunction};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QdoptStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Numeric = 3,
    Io = 4,
    Config = 5,
    Panic = 6,
}

/// Opaque grid handle.
pub struct QdoptGrid(GridSpec);
/// Opaque Hamiltonian handle.
pub struct QdoptModel(HamiltonianModel);
/// Opaque wavefunction handle.
pub struct QdoptWavefunction(WaveFunction);

thread_local! {
    static LAST_ERROR: RefCell<Vec<u8>> = const { RefCell::new(Vec::new()) };
}

fn set_error(msg: &str) {
    LAST_ERROR.with(|e| {
        let mut v = msg.as_bytes().to_vec();
        v.retain(|b| *b != 0);
        *e.borrow_mut() = v;
    });
}

fn status_of(err: &Error) -> QdoptStatus {
    match err {
        Error::InvalidArgument(_) | Error::GridMismatch(_) | Error::OffGrid { .. } => QdoptStatus::InvalidArgument,
        _ => match err.category() {
            ErrorCategory::Config => QdoptStatus::Config,
            ErrorCategory::Numeric => QdoptStatus::Numeric,
            ErrorCategory::Io => QdoptStatus::Io,
        },
    }
}

fn guard<F>(f: F) -> QdoptStatus
where
    F: FnOnce() -> Result<(), QdoptStatus>,
{
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => QdoptStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("panic inside qdopt");
            QdoptStatus::Panic
        }
    }
}

fn check<T>(r: qdopt::Result<T>) -> Result<T, QdoptStatus> {
    r.map_err(|e| {
        set_error(&e.to_string());
        status_of(&e)
    })
}

fn null() -> QdoptStatus {
    set_error("null pointer argument");
    QdoptStatus::NullPointer
}

unsafe fn deref<'a, T>(p: *const T) -> Result<&'a T, QdoptStatus> {
    p.as_ref().ok_or_else(null)
}

unsafe fn out<'a, T>(p: *mut T) -> Result<&'a mut T, QdoptStatus> {
    p.as_mut().ok_or_else(null)
}

fn boxed<T>(v: T) -> *mut T {
    Box::into_raw(Box::new(v))
}

/// Version string, valid for the life of the process.
#[no_mangle]
pub extern "C" fn qdopt_version() -> *const c_char {
    concat!("qdopt ", env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length without the NUL.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn qdopt_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr(), buf.cast::<u8>(), n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Creates a grid from per-axis point counts, steps and offsets.
///
/// # Safety
/// The three arrays must hold `ndim` elements; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qdopt_grid_new(
    ndim: usize,
    n_points: *const usize,
    steps: *const f64,
    offsets: *const f64,
    out_grid: *mut *mut QdoptGrid,
) -> QdoptStatus {
    guard(|| {
        let o = out(out_grid)?;
        if n_points.is_null() || steps.is_null() || offsets.is_null() {
            return Err(null());
        }
        let n = std::slice::from_raw_parts(n_points, ndim);
        let s = std::slice::from_raw_parts(steps, ndim);
        let f = std::slice::from_raw_parts(offsets, ndim);
        let axes = check((0..ndim).map(|i| AxisSpec::new(n[i], s[i], f[i])).collect())?;
        *o = boxed(QdoptGrid(check(GridSpec::new(axes))?));
        Ok(())
    })
}

/// The 32-point, 0.075 bohr four-axis grid `(R_x, R_y, r_cx, r_cy)`.
///
/// # Safety
/// `out_grid` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qdopt_grid_reference_reduced(out_grid: *mut *mut QdoptGrid) -> QdoptStatus {
    guard(|| {
        *out(out_grid)? = boxed(QdoptGrid(GridSpec::reduced_h2plus(AxisSpec::reference())));
        Ok(())
    })
}

/// Number of grid points, or 0 for a null handle.
///
/// # Safety
/// `grid` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qdopt_grid_len(grid: *const QdoptGrid) -> usize {
    grid.as_ref().map_or(0, |g| g.0.len())
}

/// # Safety
/// `grid` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qdopt_grid_free(grid: *mut QdoptGrid) {
    if !grid.is_null() {
        drop(Box::from_raw(grid));
    }
}

fn resolve_cap(grid: &GridSpec, cap: f64) -> f64 {
    if cap > 0.0 {
        cap
    } else {
        auto_cap(grid, 0, 1.min(grid.ndim() - 1))
    }
}

/// Reduced two-nuclei-one-electron model. `cap <= 0` selects `1/√(dx²+dy²)`.
///
/// # Safety
/// `grid` must be a live handle and `out_model` writable.
#[no_mangle]
pub unsafe extern "C" fn qdopt_model_h2plus_reduced(
    grid: *const QdoptGrid,
    m1: f64,
    m2: f64,
    m_e: f64,
    cap: f64,
    out_model: *mut *mut QdoptModel,
) -> QdoptStatus {
    guard(|| {
        let g = &deref(grid)?.0;
        let o = out(out_model)?;
        let masses = check(ParticleMasses::new(m1, m2, m_e))?;
        *o = boxed(QdoptModel(check(build_h2plus_reduced(g, &masses, resolve_cap(g, cap)))?));
        Ok(())
    })
}

/// Electron between two fixed unit charges at `(±r_sep/2, 0)`. `cap <= 0` selects the automatic cap.
///
/// # Safety
/// `grid` must be a live handle and `out_model` writable.
#[no_mangle]
pub unsafe extern "C" fn qdopt_model_point_charge(
    grid: *const QdoptGrid,
    r_sep: f64,
    cap: f64,
    out_model: *mut *mut QdoptModel,
) -> QdoptStatus {
    guard(|| {
        let g = &deref(grid)?.0;
        let o = out(out_model)?;
        *o = boxed(QdoptModel(check(build_point_charge_electronic(g, r_sep, resolve_cap(g, cap)))?));
        Ok(())
    })
}

/// # Safety
/// `grid` must be a live handle and `out_model` writable.
#[no_mangle]
pub unsafe extern "C" fn qdopt_model_harmonic(
    grid: *const QdoptGrid,
    mass: f64,
    omega: f64,
    out_model: *mut *mut QdoptModel,
) -> QdoptStatus {
    guard(|| {
        let g = &deref(grid)?.0;
        let o = out(out_model)?;
        *o = boxed(QdoptModel(check(build_harmonic(g, mass, omega))?));
        Ok(())
    })
}

/// # Safety
/// `model` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qdopt_model_free(model: *mut QdoptModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Normalized Gaussian of width `alpha` centred on the origin.
///
/// # Safety
/// `grid` must be a live handle and `out_wf` writable.
#[no_mangle]
pub unsafe extern "C" fn qdopt_wavefunction_gaussian(
    grid: *const QdoptGrid,
    alpha: f64,
    out_wf: *mut *mut QdoptWavefunction,
) -> QdoptStatus {
    guard(|| {
        let g = &deref(grid)?.0;
        let o = out(out_wf)?;
        *o = boxed(QdoptWavefunction(check(WaveFunction::gaussian(g.clone(), alpha))?));
        Ok(())
    })
}

/// Number of amplitudes, or 0 for a null handle.
///
/// # Safety
/// `wf` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qdopt_wavefunction_len(wf: *const QdoptWavefunction) -> usize {
    wf.as_ref().map_or(0, |w| w.0.len())
}

/// Copies the amplitudes as interleaved `(re, im)` pairs; `len` counts doubles.
///
/// # Safety
/// `dst` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn qdopt_wavefunction_copy_amplitudes(
    wf: *const QdoptWavefunction,
    dst: *mut f64,
    len: usize,
) -> QdoptStatus {
    guard(|| {
        let w = &deref(wf)?.0;
        if dst.is_null() {
            return Err(null());
        }
        if len < 2 * w.len() {
            set_error(&format!("buffer holds {len} doubles, need {}", 2 * w.len()));
            return Err(QdoptStatus::InvalidArgument);
        }
        let d = std::slice::from_raw_parts_mut(dst, 2 * w.len());
        for (pair, z) in d.chunks_exact_mut(2).zip(w.amplitudes()) {
            pair[0] = z.re;
            pair[1] = z.im;
        }
        Ok(())
    })
}

/// Writes the state as a `WPK1` dump.
///
/// # Safety
/// `path` must be a NUL-terminated UTF-8 string.
#[no_mangle]
pub unsafe extern "C" fn qdopt_wavefunction_write_dump(wf: *const QdoptWavefunction, path: *const c_char) -> QdoptStatus {
    guard(|| {
        let w = &deref(wf)?.0;
        let p = path_arg(path)?;
        let f = check(File::create(p).map_err(Error::from))?;
        check(w.write_dump(BufWriter::new(f)))
    })
}

/// Reads a `WPK1` dump.
///
/// # Safety
/// `path` must be a NUL-terminated UTF-8 string and `out_wf` writable.
#[no_mangle]
pub unsafe extern "C" fn qdopt_wavefunction_read_dump(
    path: *const c_char,
    out_wf: *mut *mut QdoptWavefunction,
) -> QdoptStatus {
    guard(|| {
        let o = out(out_wf)?;
        let p = path_arg(path)?;
        let f = check(File::open(p).map_err(Error::from))?;
        *o = boxed(QdoptWavefunction(check(WaveFunction::read_dump(BufReader::new(f)))?));
        Ok(())
    })
}

unsafe fn path_arg<'a>(path: *const c_char) -> Result<&'a str, QdoptStatus> {
    if path.is_null() {
        return Err(null());
    }
    CStr::from_ptr(path).to_str().map_err(|_| {
        set_error("path is not valid UTF-8");
        QdoptStatus::InvalidArgument
    })
}

/// # Safety
/// `wf` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qdopt_wavefunction_free(wf: *mut QdoptWavefunction) {
    if !wf.is_null() {
        drop(Box::from_raw(wf));
    }
}

/// `⟨ψ|H|ψ⟩ / ⟨ψ|ψ⟩`.
///
/// # Safety
/// Handles must be live; `energy` writable.
#[no_mangle]
pub unsafe extern "C" fn qdopt_energy(
    wf: *const QdoptWavefunction,
    model: *const QdoptModel,
    energy: *mut f64,
) -> QdoptStatus {
    guard(|| {
        let w = &deref(wf)?.0;
        let m = &deref(model)?.0;
        *out(energy)? = check(qdopt::propagator::energy(w, m))?;
        Ok(())
    })
}

/// Relaxes `wf` in place towards the ground state of `model`.
///
/// # Safety
/// Handles must be live; output pointers writable (any may be null to skip).
#[no_mangle]
pub unsafe extern "C" fn qdopt_evolve(
    wf: *mut QdoptWavefunction,
    model: *const QdoptModel,
    d_tau: f64,
    max_steps: usize,
    energy_tol: f64,
    check_every: usize,
    energy_out: *mut f64,
    steps_out: *mut usize,
    converged_out: *mut c_int,
) -> QdoptStatus {
    guard(|| {
        let w = &mut out(wf)?.0;
        let m = &deref(model)?.0;
        let params = PropagatorParams {
            d_tau,
            max_steps,
            energy_tol,
            check_every,
            renormalize_every: 1,
        };
        let (psi, report) = check(evolve_to_ground_state(w, m, &params))?;
        *w = psi;
        if let Some(e) = energy_out.as_mut() {
            *e = report.final_energy;
        }
        if let Some(s) = steps_out.as_mut() {
            *s = report.steps_taken;
        }
        if let Some(c) = converged_out.as_mut() {
            *c = report.converged as c_int;
        }
        Ok(())
    })
}

/// Applies `n_steps` plain Trotter steps with per-step renormalization.
///
/// # Safety
/// Handles must be live.
#[no_mangle]
pub unsafe extern "C" fn qdopt_trotter_steps(
    wf: *mut QdoptWavefunction,
    model: *const QdoptModel,
    d_tau: f64,
    n_steps: usize,
) -> QdoptStatus {
    guard(|| {
        let w = &mut out(wf)?.0;
        let m = &deref(model)?.0;
        if !w.grid().same_axes(m.grid()) {
            set_error("state and model grids differ");
            return Err(QdoptStatus::InvalidArgument);
        }
        if !(d_tau > 0.0 && d_tau.is_finite()) {
            set_error("d_tau must be positive");
            return Err(QdoptStatus::InvalidArgument);
        }
        let op = SplitOperator::new(m, d_tau);
        check(op.run(w.amplitudes_mut(), n_steps, 1))?;
        check(w.normalize())?;
        Ok(())
    })
}

/// Mean, standard deviation and mode of `|R|` from a four-axis reduced state.
///
/// # Safety
/// `wf` must be live; outputs writable.
#[no_mangle]
pub unsafe extern "C" fn qdopt_bond_stats(
    wf: *const QdoptWavefunction,
    mean: *mut f64,
    std: *mut f64,
    mode: *mut f64,
) -> QdoptStatus {
    guard(|| {
        let w = &deref(wf)?.0;
        let (mean, std, mode) = (out(mean)?, out(std)?, out(mode)?);
        let s = bond_length_stats(&check(nuclear_marginal(w))?);
        *mean = s.mean;
        *std = s.std;
        *mode = s.mode;
        Ok(())
    })
}

/// Draws `n_obs` bond lengths from the nuclear marginal of `wf`.
///
/// # Safety
/// `wf` must be live; `bond_lengths` must hold `n_obs` doubles.
#[no_mangle]
pub unsafe extern "C" fn qdopt_sample_bond_lengths(
    wf: *const QdoptWavefunction,
    n_obs: usize,
    seed: u64,
    bond_lengths: *mut f64,
) -> QdoptStatus {
    guard(|| {
        let w = &deref(wf)?.0;
        if bond_lengths.is_null() {
            return Err(null());
        }
        let marginal = check(nuclear_marginal(w))?;
        let run = qdopt::sampler::sample(&marginal, n_obs, seed);
        let dst = std::slice::from_raw_parts_mut(bond_lengths, n_obs);
        for (d, r) in dst.iter_mut().zip(&run.records) {
            *d = r.bond_length;
        }
        Ok(())
    })
}

/// Lowest-mode zero-point width of a free-ended chain, exact and small-`n`.
///
/// # Safety
/// Outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn qdopt_chain_sigma(
    n_masses: usize,
    mass: f64,
    spring_k: f64,
    exact: *mut f64,
    approx: *mut f64,
) -> QdoptStatus {
    guard(|| {
        let (exact, approx) = (out(exact)?, out(approx)?);
        let model = check(ChainModel::new(n_masses, mass, spring_k))?;
        let s = check(zero_point_sigma(&model, 1))?;
        *exact = s.exact;
        *approx = s.approx.unwrap_or(f64::NAN);
        Ok(())
    })
}
