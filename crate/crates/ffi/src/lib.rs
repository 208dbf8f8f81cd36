//! C ABI over the `vernacular` library.
//!
//! Objects cross the boundary as opaque handles created by `vn_*` functions
//! and released with the matching `*_free`. Fallible calls return a
//! [`VnStatus`]; on failure a description is available from
//! [`vn_last_error_message`] on the same thread. Strings returned to the
//! caller are NUL-terminated, owned by the caller and released with
//! [`vn_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use vernacular::ingest::{format_trait_csv, parse_trait_csv};
use vernacular::neighbornet::{delta_score, neighbor_net, SplitSystem};
use vernacular::njtree::{ls_fit_values, nj, parse_newick, to_newick, tree_path_lengths, PhyloTree};
use vernacular::seriation::seriate;
use vernacular::simulate::{diagnose_with, simulate, SimConfig, SimMode};
use vernacular::splitsgraph::{
    build_splits_graph, equal_angle_layout, format_interchange, parse_interchange, to_dot, to_svg,
};
use vernacular::synthetic::taxon_labels;
use vernacular::{distance_matrix, DistanceMatrix, Error, Metric, TraitCatalog, TraitMatrix, TraitVector};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VnStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Dimension = 3,
    EmptyInput = 4,
    InsufficientData = 5,
    Parse = 6,
    Validation = 7,
    Size = 8,
    UnknownClass = 9,
    Convergence = 10,
    Io = 11,
    Config = 12,
    Panic = 13,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VnMetric {
    Hamming = 0,
    HammingNormalized = 1,
    Jaccard = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VnSimMode {
    Line = 0,
    Tree = 1,
    Network = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct VnDiagnosis {
    pub delta: f64,
    pub tree_fit: f64,
    pub seriation_criterion: usize,
}

pub struct VnTraitMatrix(TraitMatrix);
pub struct VnDistanceMatrix(DistanceMatrix);
pub struct VnTree(PhyloTree);
pub struct VnSplitSystem(SplitSystem);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("NUL bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> VnStatus {
    match e {
        Error::Dimension(_) => VnStatus::Dimension,
        Error::EmptyInput(_) => VnStatus::EmptyInput,
        Error::InsufficientData(_) => VnStatus::InsufficientData,
        Error::Parse { .. } => VnStatus::Parse,
        Error::Validation(_) => VnStatus::Validation,
        Error::Size(_) => VnStatus::Size,
        Error::UnknownClass(_) => VnStatus::UnknownClass,
        Error::Convergence { .. } => VnStatus::Convergence,
        Error::Io { .. } => VnStatus::Io,
        Error::Config(_) => VnStatus::Config,
    }
}

enum Failure {
    Status(VnStatus, String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

/// Runs `f`, translating errors and panics into a status and the
/// thread-local message.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> VnStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            VnStatus::Ok
        }
        Ok(Err(Failure::Lib(e))) => {
            set_error(&format!("{}: {e}", e.category()));
            status_of(&e)
        }
        Ok(Err(Failure::Status(s, msg))) => {
            set_error(&msg);
            s
        }
        Err(_) => {
            set_error("internal panic");
            VnStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure::Status(VnStatus::NullPointer, format!("{what} is null"))
}

unsafe fn borrow<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure::Status(VnStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn emit<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn emit_string(out: *mut *mut c_char, s: String) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    let c = CString::new(s).map_err(|_| Failure::Status(VnStatus::Validation, "string contains NUL".into()))?;
    *out = c.into_raw();
    Ok(())
}

unsafe fn release<T>(p: *mut T) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

fn metric(m: VnMetric) -> Metric {
    match m {
        VnMetric::Hamming => Metric::Hamming,
        VnMetric::HammingNormalized => Metric::HammingNormalized,
        VnMetric::Jaccard => Metric::Jaccard,
    }
}

/// Message describing the last failed call on this thread; empty after a
/// success. The pointer stays valid until the next `vn_*` call on the
/// same thread.
#[no_mangle]
pub extern "C" fn vn_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn vn_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `s` must be null or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn vn_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses trait CSV text (`building_id,<trait…>` header).
///
/// # Safety
/// `csv` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn vn_trait_matrix_from_csv(
    csv: *const c_char,
    out: *mut *mut VnTraitMatrix,
) -> VnStatus {
    guard(|| {
        let m = parse_trait_csv(text(csv, "csv")?, None)?;
        emit(out, VnTraitMatrix(m))
    })
}

/// Builds a matrix from `n_taxa × n_traits` row-major cells (0 or 1);
/// taxa are labelled `t1…` and traits `1…`.
///
/// # Safety
/// `bits` must point to `n_taxa * n_traits` readable bytes.
#[no_mangle]
pub unsafe extern "C" fn vn_trait_matrix_from_bits(
    n_taxa: usize,
    n_traits: usize,
    bits: *const u8,
    out: *mut *mut VnTraitMatrix,
) -> VnStatus {
    guard(|| {
        if bits.is_null() && n_taxa * n_traits > 0 {
            return Err(null("bits"));
        }
        let cells = if n_taxa * n_traits == 0 {
            &[][..]
        } else {
            std::slice::from_raw_parts(bits, n_taxa * n_traits)
        };
        if let Some(b) = cells.iter().find(|&&b| b > 1) {
            return Err(Failure::Status(VnStatus::Validation, format!("cell value {b} is not 0 or 1")));
        }
        let rows = cells
            .chunks(n_traits.max(1))
            .take(n_taxa)
            .map(|r| TraitVector::new(r.iter().map(|&b| b == 1).collect()))
            .collect();
        let m = TraitMatrix::new(TraitCatalog::numbered(n_traits)?, taxon_labels(n_taxa), rows)?;
        emit(out, VnTraitMatrix(m))
    })
}

/// # Safety
/// `m` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn vn_trait_matrix_n_taxa(m: *const VnTraitMatrix) -> usize {
    m.as_ref().map_or(0, |m| m.0.n_taxa())
}

/// # Safety
/// `m` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn vn_trait_matrix_n_traits(m: *const VnTraitMatrix) -> usize {
    m.as_ref().map_or(0, |m| m.0.n_traits())
}

/// # Safety
/// `m` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn vn_trait_matrix_to_csv(m: *const VnTraitMatrix, out: *mut *mut c_char) -> VnStatus {
    guard(|| {
        let m = borrow(m, "matrix")?;
        emit_string(out, format_trait_csv(&m.0)?)
    })
}

/// # Safety
/// `m` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn vn_trait_matrix_free(m: *mut VnTraitMatrix) {
    release(m)
}

/// Pairwise distances between the rows of `m`.
///
/// # Safety
/// `m` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn vn_distance_matrix(
    m: *const VnTraitMatrix,
    metric_kind: VnMetric,
    out: *mut *mut VnDistanceMatrix,
) -> VnStatus {
    guard(|| {
        let m = borrow(m, "matrix")?;
        emit(out, VnDistanceMatrix(distance_matrix(&m.0, metric(metric_kind))?))
    })
}

/// Wraps an `n × n` row-major matrix; taxa are labelled `t1…`.
///
/// # Safety
/// `values` must point to `n * n` readable doubles.
#[no_mangle]
pub unsafe extern "C" fn vn_distance_from_values(
    n: usize,
    values: *const f64,
    out: *mut *mut VnDistanceMatrix,
) -> VnStatus {
    guard(|| {
        if values.is_null() && n > 0 {
            return Err(null("values"));
        }
        let cells = if n == 0 { &[][..] } else { std::slice::from_raw_parts(values, n * n) };
        let rows = cells.chunks(n.max(1)).take(n).map(<[f64]>::to_vec).collect();
        emit(out, VnDistanceMatrix(DistanceMatrix::new(taxon_labels(n), rows)?))
    })
}

/// # Safety
/// `d` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn vn_distance_len(d: *const VnDistanceMatrix) -> usize {
    d.as_ref().map_or(0, |d| d.0.len())
}

/// Entry `(i, j)`, or NaN when out of range or `d` is null.
///
/// # Safety
/// `d` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn vn_distance_get(d: *const VnDistanceMatrix, i: usize, j: usize) -> f64 {
    match d.as_ref() {
        Some(d) if i < d.0.len() && j < d.0.len() => d.0.get(i, j),
        _ => f64::NAN,
    }
}

/// # Safety
/// `d` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn vn_distance_free(d: *mut VnDistanceMatrix) {
    release(d)
}

/// Mean quartet delta; exhaustive up to 20 taxa, seeded sample above.
///
/// # Safety
/// `d` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn vn_delta_score(d: *const VnDistanceMatrix, seed: u64, out: *mut f64) -> VnStatus {
    guard(|| {
        let d = borrow(d, "distances")?;
        let v = delta_score(&d.0, None, seed)?;
        *out.as_mut().ok_or_else(|| null("output pointer"))? = v;
        Ok(())
    })
}

/// Neighbor-joining tree.
///
/// # Safety
/// `d` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn vn_nj(d: *const VnDistanceMatrix, clamp_negative: bool, out: *mut *mut VnTree) -> VnStatus {
    guard(|| {
        let d = borrow(d, "distances")?;
        emit(out, VnTree(nj(&d.0, clamp_negative)?))
    })
}

/// # Safety
/// `newick` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn vn_tree_from_newick(newick: *const c_char, out: *mut *mut VnTree) -> VnStatus {
    guard(|| emit(out, VnTree(parse_newick(text(newick, "newick")?)?)))
}

/// # Safety
/// `t` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn vn_tree_to_newick(t: *const VnTree, precision: usize, out: *mut *mut c_char) -> VnStatus {
    guard(|| {
        let t = borrow(t, "tree")?;
        emit_string(out, to_newick(&t.0, precision))
    })
}

/// Percentage of squared distance explained by the tree's path lengths.
/// Leaves are matched to matrix rows by position.
///
/// # Safety
/// `d` and `t` must be live handles and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn vn_tree_fit(d: *const VnDistanceMatrix, t: *const VnTree, out: *mut f64) -> VnStatus {
    guard(|| {
        let (d, t) = (borrow(d, "distances")?, borrow(t, "tree")?);
        let v = ls_fit_values(&d.0, &tree_path_lengths(&t.0))?;
        *out.as_mut().ok_or_else(|| null("output pointer"))? = v;
        Ok(())
    })
}

/// # Safety
/// `t` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn vn_tree_free(t: *mut VnTree) {
    release(t)
}

/// Neighbor-net split system; splits lighter than `weight_threshold` are
/// dropped.
///
/// # Safety
/// `d` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn vn_neighbor_net(
    d: *const VnDistanceMatrix,
    weight_threshold: f64,
    out: *mut *mut VnSplitSystem,
) -> VnStatus {
    guard(|| {
        let d = borrow(d, "distances")?;
        emit(out, VnSplitSystem(neighbor_net(&d.0, weight_threshold)?))
    })
}

/// # Safety
/// `s` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn vn_splits_len(s: *const VnSplitSystem) -> usize {
    s.as_ref().map_or(0, |s| s.0.len())
}

/// Weight of split `k`, or NaN when out of range or `s` is null.
///
/// # Safety
/// `s` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn vn_splits_weight(s: *const VnSplitSystem, k: usize) -> f64 {
    match s.as_ref() {
        Some(s) if k < s.0.len() => s.0.splits()[k].weight,
        _ => f64::NAN,
    }
}

/// # Safety
/// `s` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn vn_splits_to_interchange(s: *const VnSplitSystem, out: *mut *mut c_char) -> VnStatus {
    guard(|| {
        let s = borrow(s, "split system")?;
        emit_string(out, format_interchange(&s.0))
    })
}

/// # Safety
/// `text_in` must be a valid NUL-terminated string and `out` a valid
/// pointer.
#[no_mangle]
pub unsafe extern "C" fn vn_splits_from_interchange(
    text_in: *const c_char,
    out: *mut *mut VnSplitSystem,
) -> VnStatus {
    guard(|| emit(out, VnSplitSystem(parse_interchange(text(text_in, "interchange text")?)?)))
}

/// Splits graph of `s` with equal-angle layout, rendered as DOT
/// (`as_svg = false`) or SVG.
///
/// # Safety
/// `s` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn vn_splits_graph_render(
    s: *const VnSplitSystem,
    as_svg: bool,
    out: *mut *mut c_char,
) -> VnStatus {
    guard(|| {
        let s = borrow(s, "split system")?;
        let mut g = build_splits_graph(&s.0)?;
        g.set_coords(equal_angle_layout(&g, &s.0)?)?;
        let rendered = if as_svg { to_svg(&g, None)? } else { to_dot(&g, None) };
        emit_string(out, rendered)
    })
}

/// # Safety
/// `s` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn vn_splits_free(s: *mut VnSplitSystem) {
    release(s)
}

/// Seriates `m`; writes the taxon order (length `n_taxa`) into `order`
/// and the embedded-absence count into `criterion`.
///
/// # Safety
/// `m` must be a live handle, `order` must have room for `n_taxa`
/// entries and `criterion` must be valid.
#[no_mangle]
pub unsafe extern "C" fn vn_seriate(
    m: *const VnTraitMatrix,
    restarts: usize,
    seed: u64,
    order: *mut usize,
    criterion: *mut usize,
) -> VnStatus {
    guard(|| {
        let m = borrow(m, "matrix")?;
        if order.is_null() || criterion.is_null() {
            return Err(null("output pointer"));
        }
        let r = seriate(&m.0, restarts, seed)?;
        std::slice::from_raw_parts_mut(order, r.order.len()).copy_from_slice(&r.order);
        *criterion = r.criterion;
        Ok(())
    })
}

/// Simulated trait matrix under the given transmission model.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn vn_simulate(
    mode: VnSimMode,
    n_taxa: usize,
    n_traits: usize,
    flip_rate: f64,
    borrow_rate: f64,
    seed: u64,
    out: *mut *mut VnTraitMatrix,
) -> VnStatus {
    guard(|| {
        let mode = match mode {
            VnSimMode::Line => SimMode::Line,
            VnSimMode::Tree => SimMode::Tree,
            VnSimMode::Network => SimMode::Network,
        };
        let cfg = SimConfig {
            mode,
            n_taxa,
            n_traits,
            flip_rate,
            borrow_rate,
            seed,
        };
        emit(out, VnTraitMatrix(simulate(&cfg)?.matrix))
    })
}

/// Delta score, neighbor-joining fit and seriation criterion of `m`.
///
/// # Safety
/// `m` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn vn_diagnose(
    m: *const VnTraitMatrix,
    metric_kind: VnMetric,
    seed: u64,
    out: *mut VnDiagnosis,
) -> VnStatus {
    guard(|| {
        let m = borrow(m, "matrix")?;
        let d = diagnose_with(&m.0, metric(metric_kind), seed)?;
        *out.as_mut().ok_or_else(|| null("output pointer"))? = VnDiagnosis {
            delta: d.delta,
            tree_fit: d.tree_fit,
            seriation_criterion: d.seriation_criterion,
        };
        Ok(())
    })
}

/// Static name of a status code, matching the command-line error categories.
#[no_mangle]
pub extern "C" fn vn_status_name(status: VnStatus) -> *const c_char {
    let s: &'static str = match status {
        VnStatus::Ok => "ok\0",
        VnStatus::NullPointer => "null-pointer\0",
        VnStatus::InvalidUtf8 => "invalid-utf8\0",
        VnStatus::Dimension => "dimension\0",
        VnStatus::EmptyInput => "empty-input\0",
        VnStatus::InsufficientData => "insufficient-data\0",
        VnStatus::Parse => "parse\0",
        VnStatus::Validation => "validation\0",
        VnStatus::Size => "size\0",
        VnStatus::UnknownClass => "unknown-class\0",
        VnStatus::Convergence => "convergence\0",
        VnStatus::Io => "io\0",
        VnStatus::Config => "config\0",
        VnStatus::Panic => "panic\0",
    };
    s.as_ptr().cast()
}
