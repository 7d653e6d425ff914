//! C ABI over `qlink-core`.
//!
//! Conventions:
//! * Every fallible call returns a [`QlinkStatus`]; results come back through
//!   out-pointers that are written only on success.
//! * On failure a human-readable message is stored per thread and can be
//!   copied out with [`qlink_last_error_message`].
//! * Scenarios and tables are opaque handles owned by the caller and released
//!   with their `_free` functions. Freeing NULL is a no-op.
//! * Strings passed in must be NUL-terminated UTF-8. Strings passed out are
//!   copied into caller buffers; the return value is the size needed
//!   including the terminating NUL, so a call with `len = 0` sizes the buffer.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use qlink_core::channel::{
    Aperture, AtmosphereModel, BeamParams, ChannelModel, DetectorModel, PointingModel, StrayLightModel,
};
use qlink_core::geometry::{elevation_angle, slant_range, EarthModel, LinkGeometry, OrbitConfig};
use qlink_core::maqkd::{binary_entropy, secret_key_rate};
use qlink_core::repeater::{qnd_time, RepeaterConfig};
use qlink_core::scenario::{self, ResultTable, Scenario, ScenarioBuilder};
use qlink_core::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QlinkStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Validation = 3,
    Parse = 4,
    UnknownPreset = 5,
    UnknownFigure = 6,
    Domain = 7,
    Io = 8,
    OutOfRange = 9,
    Panic = 10,
}

/// Opaque scenario handle.
pub struct QlinkScenario {
    builder: ScenarioBuilder,
    scenario: Scenario,
}

/// Opaque result-table handle.
pub struct QlinkTable {
    table: ResultTable,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(message: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = message);
}

fn fail(status: QlinkStatus, message: impl Into<String>) -> QlinkStatus {
    set_error(message.into());
    status
}

fn status_of(err: &Error) -> QlinkStatus {
    match err {
        Error::Validation { .. } => QlinkStatus::Validation,
        Error::Parse { .. } => QlinkStatus::Parse,
        Error::UnknownPreset(_) => QlinkStatus::UnknownPreset,
        Error::UnknownFigure(_) => QlinkStatus::UnknownFigure,
        Error::Io(_) => QlinkStatus::Io,
        Error::BelowHorizon { .. } | Error::InvalidElevation(_) | Error::DegenerateInput(_) | Error::Domain(_) => {
            QlinkStatus::Domain
        }
    }
}

fn from_error(err: Error) -> QlinkStatus {
    let status = status_of(&err);
    fail(status, err.to_string())
}

/// Runs `body`, converting panics into `QlinkStatus::Panic`.
fn guard(body: impl FnOnce() -> QlinkStatus) -> QlinkStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => fail(QlinkStatus::Panic, "internal panic"),
    }
}

unsafe fn read_str<'a>(p: *const c_char) -> Result<&'a str, QlinkStatus> {
    if p.is_null() {
        return Err(fail(QlinkStatus::NullPointer, "null string argument"));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(QlinkStatus::InvalidUtf8, "string argument is not UTF-8"))
}

/// Copies `text` plus a NUL into `buf` (truncating if needed) and returns the full size needed.
unsafe fn copy_out(text: &str, buf: *mut c_char, len: usize) -> usize {
    let needed = text.len() + 1;
    if !buf.is_null() && len > 0 {
        let n = text.len().min(len - 1);
        ptr::copy_nonoverlapping(text.as_ptr() as *const c_char, buf, n);
        *buf.add(n) = 0;
    }
    needed
}

unsafe fn write<T>(out: *mut T, value: T) -> QlinkStatus {
    if out.is_null() {
        return fail(QlinkStatus::NullPointer, "null output pointer");
    }
    *out = value;
    QlinkStatus::Ok
}

macro_rules! tri {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(status) => return status,
        }
    };
}

fn core<T>(r: qlink_core::Result<T>) -> Result<T, QlinkStatus> {
    r.map_err(from_error)
}

/// Copies the calling thread's last error message into `buf`.
///
/// Returns the buffer size needed for the whole message including the NUL.
///
/// # Safety
/// `buf` must be NULL or point to at least `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn qlink_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| copy_out(&e.borrow(), buf, len))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn qlink_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

unsafe fn new_scenario(builder: ScenarioBuilder, out: *mut *mut QlinkScenario) -> QlinkStatus {
    if out.is_null() {
        return fail(QlinkStatus::NullPointer, "null output pointer");
    }
    let scenario = tri!(core(builder.build()));
    *out = Box::into_raw(Box::new(QlinkScenario { builder, scenario }));
    QlinkStatus::Ok
}

/// Creates a scenario from a bundled preset.
///
/// # Safety
/// `name` must be a NUL-terminated string; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qlink_scenario_from_preset(name: *const c_char, out: *mut *mut QlinkScenario) -> QlinkStatus {
    guard(|| {
        let name = tri!(read_str(name));
        let mut builder = ScenarioBuilder::new();
        tri!(core(builder.apply_preset(name).map(|_| ())));
        new_scenario(builder, out)
    })
}

/// Creates a scenario from the text of a scenario file.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qlink_scenario_from_str(text: *const c_char, out: *mut *mut QlinkScenario) -> QlinkStatus {
    guard(|| {
        let text = tri!(read_str(text));
        let mut builder = ScenarioBuilder::new();
        tri!(core(builder.apply_text(text).map(|_| ())));
        new_scenario(builder, out)
    })
}

/// Creates a scenario from a file on disk.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qlink_scenario_from_file(path: *const c_char, out: *mut *mut QlinkScenario) -> QlinkStatus {
    guard(|| {
        let path = tri!(read_str(path));
        let text = tri!(core(
            std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{path}: {e}")))
        ));
        let mut builder = ScenarioBuilder::new();
        tri!(core(builder.apply_text(&text).map(|_| ())));
        new_scenario(builder, out)
    })
}

/// Overrides one key. On failure the scenario is left unchanged.
///
/// # Safety
/// `scenario` must be a live handle; `key` and `value` NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn qlink_scenario_set(
    scenario: *mut QlinkScenario,
    key: *const c_char,
    value: *const c_char,
) -> QlinkStatus {
    guard(|| {
        let Some(handle) = scenario.as_mut() else {
            return fail(QlinkStatus::NullPointer, "null scenario");
        };
        let key = tri!(read_str(key));
        let value = tri!(read_str(value));
        let mut next = handle.builder.clone();
        tri!(core(next.set(key, value).map(|_| ())));
        let built = tri!(core(next.build()));
        handle.builder = next;
        handle.scenario = built;
        QlinkStatus::Ok
    })
}

/// Evaluates the scenario's sweep into a new table.
///
/// # Safety
/// `scenario` must be a live handle; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qlink_scenario_run(scenario: *const QlinkScenario, out: *mut *mut QlinkTable) -> QlinkStatus {
    guard(|| {
        let Some(handle) = scenario.as_ref() else {
            return fail(QlinkStatus::NullPointer, "null scenario");
        };
        let table = scenario::run(&handle.scenario);
        write(out, Box::into_raw(Box::new(QlinkTable { table })))
    })
}

/// Runs the bundled preset behind a figure id (`fig3a` .. `fig6b`).
///
/// # Safety
/// `figure` must be a NUL-terminated string; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qlink_reproduce(figure: *const c_char, out: *mut *mut QlinkTable) -> QlinkStatus {
    guard(|| {
        let figure = tri!(read_str(figure));
        if out.is_null() {
            return fail(QlinkStatus::NullPointer, "null output pointer");
        }
        let table = tri!(core(scenario::reproduce(figure)));
        write(out, Box::into_raw(Box::new(QlinkTable { table })))
    })
}

/// # Safety
/// `scenario` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qlink_scenario_free(scenario: *mut QlinkScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// # Safety
/// `table` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qlink_table_free(table: *mut QlinkTable) {
    if !table.is_null() {
        drop(Box::from_raw(table));
    }
}

/// Number of data rows; 0 for NULL.
///
/// # Safety
/// `table` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qlink_table_rows(table: *const QlinkTable) -> usize {
    table.as_ref().map_or(0, |t| t.table.rows.len())
}

/// Number of columns; 0 for NULL.
///
/// # Safety
/// `table` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qlink_table_columns(table: *const QlinkTable) -> usize {
    table.as_ref().map_or(0, |t| t.table.columns.len())
}

/// Reads one cell. "No key" and degenerate cells read as NaN.
///
/// # Safety
/// `table` must be a live handle; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qlink_table_value(
    table: *const QlinkTable,
    row: usize,
    column: usize,
    out: *mut f64,
) -> QlinkStatus {
    let Some(t) = table.as_ref() else {
        return fail(QlinkStatus::NullPointer, "null table");
    };
    match t.table.rows.get(row).and_then(|r| r.get(column)) {
        Some(&v) => write(out, v),
        None => fail(
            QlinkStatus::OutOfRange,
            format!("cell ({row}, {column}) is outside the table"),
        ),
    }
}

/// Copies a column name; returns the size needed, or 0 when out of range.
///
/// # Safety
/// `table` must be a live handle; `buf` NULL or `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn qlink_table_column_name(
    table: *const QlinkTable,
    column: usize,
    buf: *mut c_char,
    len: usize,
) -> usize {
    match table.as_ref().and_then(|t| t.table.columns.get(column)) {
        Some(name) => copy_out(name, buf, len),
        None => 0,
    }
}

/// Copies a column's unit; returns the size needed, or 0 when out of range.
///
/// # Safety
/// As [`qlink_table_column_name`].
#[no_mangle]
pub unsafe extern "C" fn qlink_table_column_unit(
    table: *const QlinkTable,
    column: usize,
    buf: *mut c_char,
    len: usize,
) -> usize {
    match table.as_ref().and_then(|t| t.table.units.get(column)) {
        Some(unit) => copy_out(unit, buf, len),
        None => 0,
    }
}

/// Serializes the table as CSV; returns the size needed, or 0 for NULL.
///
/// # Safety
/// `table` must be NULL or a live handle; `buf` NULL or `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn qlink_table_to_csv(table: *const QlinkTable, buf: *mut c_char, len: usize) -> usize {
    match table.as_ref() {
        Some(t) => copy_out(&t.table.to_csv(), buf, len),
        None => 0,
    }
}

fn orbit_and_earth(altitude_km: f64) -> Result<(OrbitConfig, EarthModel), QlinkStatus> {
    Ok((core(OrbitConfig::new(altitude_km))?, EarthModel::default()))
}

/// Slant range from a ground point to a satellite `ground_arc_km` away along the surface.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qlink_slant_range_km(ground_arc_km: f64, altitude_km: f64, out: *mut f64) -> QlinkStatus {
    guard(|| {
        let (orbit, earth) = tri!(orbit_and_earth(altitude_km));
        if ground_arc_km.is_nan() || ground_arc_km < 0.0 {
            return fail(QlinkStatus::Domain, "ground arc must be >= 0");
        }
        write(out, slant_range(ground_arc_km, &orbit, &earth))
    })
}

/// Elevation angle (radians) of a satellite `ground_arc_km` away along the surface.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qlink_elevation_rad(ground_arc_km: f64, altitude_km: f64, out: *mut f64) -> QlinkStatus {
    guard(|| {
        let (orbit, earth) = tri!(orbit_and_earth(altitude_km));
        let el = tri!(core(elevation_angle(ground_arc_km, &orbit, &earth)));
        write(out, el)
    })
}

/// Total transmission of one hop: diffraction times atmosphere.
///
/// `elevation_rad <= 0` selects an inter-satellite hop (no atmosphere).
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qlink_hop_transmission(
    path_km: f64,
    elevation_rad: f64,
    divergence_urad: f64,
    wavelength_nm: f64,
    rx_radius_m: f64,
    zenith_transmissivity: f64,
    out: *mut f64,
) -> QlinkStatus {
    guard(|| {
        let link = if elevation_rad > 0.0 {
            core(LinkGeometry::space_ground(path_km, elevation_rad, 0.0))
        } else {
            core(LinkGeometry::inter_satellite(path_km, 0.0))
        };
        let link = tri!(link);
        let channel = ChannelModel {
            beam: tri!(core(BeamParams::from_divergence(
                wavelength_nm * 1e-9,
                1.0,
                divergence_urad * 1e-6
            ))),
            rx: tri!(core(Aperture::new(rx_radius_m))),
            atmosphere: tri!(core(AtmosphereModel::new(zenith_transmissivity))),
            pointing: PointingModel::default(),
            stray: StrayLightModel::default(),
        };
        let budget = tri!(core(channel.hop(&link)));
        write(out, budget.eta_total)
    })
}

/// Binary entropy in bits.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qlink_binary_entropy(e: f64, out: *mut f64) -> QlinkStatus {
    guard(|| {
        let h = tri!(core(binary_entropy(e)));
        write(out, h)
    })
}

/// Secret bits per channel use, clamped at zero. Total: never fails.
#[no_mangle]
pub extern "C" fn qlink_secret_key_rate(yield_per_use: f64, qber_x: f64, qber_z: f64, ec_inefficiency: f64) -> f64 {
    secret_key_rate(yield_per_use, qber_x, qber_z, ec_inefficiency)
}

/// Entanglement-distribution time (seconds) of a QND-heralded chain.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qlink_qnd_time(
    p0_avg: f64,
    nesting_level: u32,
    source_rate_hz: f64,
    source_efficiency: f64,
    qnd_efficiency: f64,
    memory_efficiency: f64,
    detector_efficiency: f64,
    out: *mut f64,
) -> QlinkStatus {
    guard(|| {
        let config = RepeaterConfig {
            nesting_level,
            source_rate_hz,
            source_efficiency,
            qnd_efficiency,
            detector: DetectorModel {
                efficiency: detector_efficiency,
                dark_prob_per_window: 0.0,
            },
            ..RepeaterConfig::default()
        }
        .with_memory_efficiency(memory_efficiency);
        if !(0.0..=1.0).contains(&memory_efficiency) {
            return fail(QlinkStatus::Validation, "memory efficiency must lie in [0, 1]");
        }
        let result = tri!(core(qnd_time(&config, p0_avg)));
        write(out, result.total_time_s)
    })
}
