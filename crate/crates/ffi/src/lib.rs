//! C interface to `wulff-mc`.
//!
//! Shapes and simulations are opaque heap handles released with their
//! `_free` function. Every call returns a [`WulffmcStatus`]; on failure a
//! message is available from [`wulffmc_last_error`] on the same thread.
//! Panics are caught at the boundary and reported as `WULFFMC_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;

use wulff_mc::geometry::{make_shape, Dimension, Direction, GeometryError, Shape, ShapeFamily};
use wulff_mc::interaction::{pair_energy, Interaction, PairError};
use wulff_mc::sampler::{initialize_state, run, EnsembleParams, InitOptions, RunSchedule, SamplerError, SimulationState};
use wulff_mc::search::lattice_energy_oracle;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WulffmcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// A pair distance inside the hard core.
    HardCore = 3,
    Geometry = 4,
    Sampler = 5,
    Panic = 6,
}

/// Means and block standard errors from [`wulffmc_simulation_run`].
#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct WulffmcEstimate {
    pub total_energy: f64,
    pub total_energy_se: f64,
    pub potential_energy: f64,
    pub potential_energy_se: f64,
    pub volume: f64,
    pub volume_se: f64,
    pub displacement_acceptance: f64,
    pub volume_acceptance: f64,
}

/// Immutable container shape, canonical with volume 10.
pub struct WulffmcShape {
    inner: Arc<Shape>,
}

/// One Markov chain with its ensemble parameters.
pub struct WulffmcSimulation {
    state: SimulationState,
    params: EnsembleParams,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

struct Failure(WulffmcStatus, String);

impl From<GeometryError> for Failure {
    fn from(e: GeometryError) -> Self {
        Failure(WulffmcStatus::Geometry, e.to_string())
    }
}

impl From<SamplerError> for Failure {
    fn from(e: SamplerError) -> Self {
        let status = match e {
            SamplerError::InvalidParams(_) | SamplerError::InvalidSchedule(_) => WulffmcStatus::InvalidArgument,
            SamplerError::Geometry(_) => WulffmcStatus::Geometry,
            _ => WulffmcStatus::Sampler,
        };
        Failure(status, e.to_string())
    }
}

impl From<PairError> for Failure {
    fn from(e: PairError) -> Self {
        let status = match e {
            PairError::HardCore(_) => WulffmcStatus::HardCore,
            PairError::NotANumber => WulffmcStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

fn set_error(message: &str) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn invalid(message: impl Into<String>) -> Failure {
    Failure(WulffmcStatus::InvalidArgument, message.into())
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> WulffmcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            WulffmcStatus::Ok
        }
        Ok(Err(Failure(status, message))) => {
            set_error(&message);
            status
        }
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(&format!("panic: {message}"));
            WulffmcStatus::Panic
        }
    }
}

unsafe fn out_ref<'a, T>(ptr: *mut T) -> Result<&'a mut T, Failure> {
    ptr.as_mut().ok_or(Failure(WulffmcStatus::NullPointer, "null output pointer".into()))
}

unsafe fn handle<'a, T>(ptr: *const T) -> Result<&'a T, Failure> {
    ptr.as_ref().ok_or(Failure(WulffmcStatus::NullPointer, "null handle".into()))
}

unsafe fn handle_mut<'a, T>(ptr: *mut T) -> Result<&'a mut T, Failure> {
    ptr.as_mut().ok_or(Failure(WulffmcStatus::NullPointer, "null handle".into()))
}

fn dimension(d: u32) -> Result<Dimension, Failure> {
    Dimension::new(d as usize).map_err(Failure::from)
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn wulffmc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or an empty string. The
/// pointer stays valid until the next call on this thread.
#[no_mangle]
pub extern "C" fn wulffmc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Pair energy at distance `r`; `WULFFMC_STATUS_HARD_CORE` for `r < 1`.
///
/// # Safety
/// `out` must be null or point to writable memory for one `double`.
#[no_mangle]
pub unsafe extern "C" fn wulffmc_pair_energy(r: f64, out: *mut f64) -> WulffmcStatus {
    guard(|| {
        let out = out_ref(out)?;
        *out = pair_energy(r)?;
        Ok(())
    })
}

/// Energy per particle of the infinite triangular lattice with `spacing`.
///
/// # Safety
/// `out` must be null or point to writable memory for one `double`.
#[no_mangle]
pub unsafe extern "C" fn wulffmc_lattice_energy(spacing: f64, out: *mut f64) -> WulffmcStatus {
    guard(|| {
        let out = out_ref(out)?;
        *out = lattice_energy_oracle(spacing)?;
        Ok(())
    })
}

fn emit_shape(family: ShapeFamily, dim: Dimension, out: *mut *mut WulffmcShape) -> Result<(), Failure> {
    let out = unsafe { out_ref(out)? };
    let shape = make_shape(&family, dim)?;
    *out = Box::into_raw(Box::new(WulffmcShape { inner: Arc::new(shape) }));
    Ok(())
}

/// Disk (`dimension == 2`) or sphere (`dimension == 3`).
///
/// # Safety
/// `out` must be null or point to writable memory for one pointer.
#[no_mangle]
pub unsafe extern "C" fn wulffmc_shape_ball(dimension_: u32, out: *mut *mut WulffmcShape) -> WulffmcStatus {
    guard(|| emit_shape(ShapeFamily::Ball, dimension(dimension_)?, out))
}

/// Regular polygon with `sides >= 3`.
///
/// # Safety
/// `out` must be null or point to writable memory for one pointer.
#[no_mangle]
pub unsafe extern "C" fn wulffmc_shape_regular_polygon(sides: u32, out: *mut *mut WulffmcShape) -> WulffmcStatus {
    guard(|| emit_shape(ShapeFamily::RegularPolygon { sides: sides as usize }, Dimension::Two, out))
}

/// # Safety
/// `out` must be null or point to writable memory for one pointer.
#[no_mangle]
pub unsafe extern "C" fn wulffmc_shape_cuboctahedron(out: *mut *mut WulffmcShape) -> WulffmcStatus {
    guard(|| emit_shape(ShapeFamily::Cuboctahedron, Dimension::Three, out))
}

/// Shape from its JSON record, as written in `best_shape.json`.
///
/// # Safety
/// `json` must be null or a NUL-terminated string; `out` must be null or
/// point to writable memory for one pointer.
#[no_mangle]
pub unsafe extern "C" fn wulffmc_shape_from_json(json: *const c_char, out: *mut *mut WulffmcShape) -> WulffmcStatus {
    guard(|| {
        if json.is_null() {
            return Err(Failure(WulffmcStatus::NullPointer, "null string".into()));
        }
        let out = out_ref(out)?;
        let text = CStr::from_ptr(json).to_str().map_err(|e| invalid(e.to_string()))?;
        let shape: Shape = serde_json::from_str(text).map_err(|e| invalid(e.to_string()))?;
        *out = Box::into_raw(Box::new(WulffmcShape { inner: Arc::new(shape) }));
        Ok(())
    })
}

/// # Safety
/// `shape` must be a live handle; `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn wulffmc_shape_dimension(shape: *const WulffmcShape, out: *mut u32) -> WulffmcStatus {
    guard(|| {
        let s = handle(shape)?;
        *out_ref(out)? = s.inner.dimension().get() as u32;
        Ok(())
    })
}

/// # Safety
/// `shape` must be a live handle; `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn wulffmc_shape_volume(shape: *const WulffmcShape, out: *mut f64) -> WulffmcStatus {
    guard(|| {
        let s = handle(shape)?;
        *out_ref(out)? = s.inner.volume();
        Ok(())
    })
}

/// Radial function along `(x, y, z)`, normalized internally. Planar shapes
/// ignore `z`.
///
/// # Safety
/// `shape` must be a live handle; `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn wulffmc_shape_radius(
    shape: *const WulffmcShape,
    x: f64,
    y: f64,
    z: f64,
    out: *mut f64,
) -> WulffmcStatus {
    guard(|| {
        let s = handle(shape)?;
        let dim = s.inner.dimension();
        let z = if dim == Dimension::Two { 0.0 } else { z };
        let dir = Direction::new([x, y, z], dim)?;
        *out_ref(out)? = s.inner.radius(&dir);
        Ok(())
    })
}

/// Releases a shape. Simulations built from it keep their own reference.
///
/// # Safety
/// `shape` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn wulffmc_shape_free(shape: *mut WulffmcShape) {
    if !shape.is_null() {
        drop(Box::from_raw(shape));
    }
}

/// New chain by random insertion. `volume_cap <= 0` means no cap, which
/// requires `pressure > 0`. A nonzero `ideal` disables the interaction.
///
/// # Safety
/// `shape` must be a live handle; `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn wulffmc_simulation_new(
    shape: *const WulffmcShape,
    particles: usize,
    beta: f64,
    pressure: f64,
    volume_cap: f64,
    ideal: i32,
    seed: u64,
    out: *mut *mut WulffmcSimulation,
) -> WulffmcStatus {
    guard(|| {
        let s = handle(shape)?;
        let out = out_ref(out)?;
        let mut params = EnsembleParams::new(s.inner.dimension(), particles, beta, pressure);
        if volume_cap > 0.0 {
            params.volume_cap = Some(volume_cap);
        }
        if ideal != 0 {
            params.interaction = Interaction::Ideal;
        }
        let state = initialize_state(s.inner.clone(), &params, &InitOptions::default(), seed)?;
        *out = Box::into_raw(Box::new(WulffmcSimulation { state, params }));
        Ok(())
    })
}

/// Runs `count` plain sweeps with the current step sizes.
///
/// # Safety
/// `sim` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn wulffmc_simulation_sweeps(sim: *mut WulffmcSimulation, count: u64) -> WulffmcStatus {
    guard(|| {
        let sim = handle_mut(sim)?;
        let vm = RunSchedule::default().volume_moves_per_sweep;
        for _ in 0..count {
            sim.state.sweep(&sim.params, vm);
        }
        Ok(())
    })
}

/// Burn-in with step tuning, then `sweeps` measured sweeps sampled every
/// `thin` sweeps and split into `blocks` blocks.
///
/// # Safety
/// `sim` must be a live handle; `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn wulffmc_simulation_run(
    sim: *mut WulffmcSimulation,
    burn_in: u64,
    sweeps: u64,
    thin: u64,
    blocks: usize,
    out: *mut WulffmcEstimate,
) -> WulffmcStatus {
    guard(|| {
        let sim = handle_mut(sim)?;
        let out = out_ref(out)?;
        let schedule = RunSchedule { burn_in, sweeps, thin, blocks, ..RunSchedule::default() };
        let r = run(&mut sim.state, &sim.params, &schedule)?;
        *out = WulffmcEstimate {
            total_energy: r.total_energy.mean,
            total_energy_se: r.total_energy.std_error,
            potential_energy: r.potential_energy.mean,
            potential_energy_se: r.potential_energy.std_error,
            volume: r.volume.mean,
            volume_se: r.volume.std_error,
            displacement_acceptance: r.displacement_acceptance,
            volume_acceptance: r.volume_acceptance,
        };
        Ok(())
    })
}

/// Cached potential energy of the current state.
///
/// # Safety
/// `sim` must be a live handle; `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn wulffmc_simulation_energy(sim: *const WulffmcSimulation, out: *mut f64) -> WulffmcStatus {
    guard(|| {
        let sim = handle(sim)?;
        *out_ref(out)? = sim.state.potential_energy();
        Ok(())
    })
}

/// # Safety
/// `sim` must be a live handle; `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn wulffmc_simulation_volume(sim: *const WulffmcSimulation, out: *mut f64) -> WulffmcStatus {
    guard(|| {
        let sim = handle(sim)?;
        *out_ref(out)? = sim.state.volume();
        Ok(())
    })
}

/// Copies positions as `x y z` triples into `buffer`, which holds `len`
/// doubles and must fit `3 * N`. `written` receives the particle count.
///
/// # Safety
/// `sim` must be a live handle; `buffer` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn wulffmc_simulation_positions(
    sim: *const WulffmcSimulation,
    buffer: *mut f64,
    len: usize,
    written: *mut usize,
) -> WulffmcStatus {
    guard(|| {
        let sim = handle(sim)?;
        let positions = sim.state.configuration().positions();
        let need = 3 * positions.len();
        if len < need {
            return Err(invalid(format!("buffer holds {len} doubles, {need} needed")));
        }
        if buffer.is_null() && need > 0 {
            return Err(Failure(WulffmcStatus::NullPointer, "null buffer".into()));
        }
        if need > 0 {
            let dst = std::slice::from_raw_parts_mut(buffer, need);
            for (chunk, p) in dst.chunks_exact_mut(3).zip(positions) {
                chunk.copy_from_slice(p);
            }
        }
        if !written.is_null() {
            *written = positions.len();
        }
        Ok(())
    })
}

/// # Safety
/// `sim` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn wulffmc_simulation_free(sim: *mut WulffmcSimulation) {
    if !sim.is_null() {
        drop(Box::from_raw(sim));
    }
}
