//! C interface to the endorank library.
//!
//! Digraphs live behind opaque handles owned by the caller and released with
//! [`endorank_digraph_free`]. Every fallible function returns an
//! [`EndorankStatus`]; on failure a textual description is available from
//! [`endorank_last_error_message`] until the next failing call on the same
//! thread. Output buffers are caller-allocated. The C header is generated
//! into `include/endorank.h` at build time.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::fmt::Display;
use std::slice;

use endorank::deduction::{deduce, union_probability, DeductionPlan, SkillDeductionMatrix};
use endorank::graph::{load_endorsement_digraph, EndorsementDigraph, GraphError};
use endorank::metrics::{count_ties, kendall_tau, spearman_rho, DEFAULT_TIE_TOLERANCE};
use endorank::pagerank::{pagerank, rank_positions_with_tolerance, PageRankParams};

/// Result of a call. Anything other than `OK` leaves a message readable via
/// `endorank_last_error_message`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EndorankStatus {
    /// The call succeeded.
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// A scalar or array argument was out of its documented range.
    InvalidArgument = 2,
    /// The arcs do not form a valid endorsement digraph.
    InvalidGraph = 3,
    /// Reading the digraph file failed.
    Io = 4,
    /// Power iteration stopped at the iteration cap; scores were still
    /// written and describe the last iterate.
    NotConverged = 5,
}

/// Opaque endorsement digraph handle.
pub struct EndorankDigraph {
    inner: EndorsementDigraph,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn fail(status: EndorankStatus, msg: impl Display) -> EndorankStatus {
    let text = CString::new(msg.to_string())
        .unwrap_or_else(|_| CString::new("error text contained a nul byte").unwrap());
    LAST_ERROR.with(|e| *e.borrow_mut() = text);
    status
}

fn graph_fail(err: GraphError) -> EndorankStatus {
    let status = match err {
        GraphError::Io(_) => EndorankStatus::Io,
        _ => EndorankStatus::InvalidGraph,
    };
    fail(status, err)
}

/// Message describing the most recent failure on this thread. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn endorank_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static nul-terminated string.
#[no_mangle]
pub extern "C" fn endorank_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

unsafe fn digraph<'a>(d: *const EndorankDigraph) -> Option<&'a EndorsementDigraph> {
    d.as_ref().map(|h| &h.inner)
}

unsafe fn finite_slice<'a>(p: *const f64, n: usize) -> Result<&'a [f64], EndorankStatus> {
    if p.is_null() {
        return Err(fail(EndorankStatus::NullArgument, "score array is null"));
    }
    let s = slice::from_raw_parts(p, n);
    if s.iter().any(|v| !v.is_finite()) {
        return Err(fail(
            EndorankStatus::InvalidArgument,
            "scores must be finite",
        ));
    }
    Ok(s)
}

fn emit(out: *mut *mut EndorankDigraph, d: EndorsementDigraph) -> EndorankStatus {
    unsafe { *out = Box::into_raw(Box::new(EndorankDigraph { inner: d })) };
    EndorankStatus::Ok
}

/// Builds a digraph on `n_members` members from parallel arc arrays of
/// length `n_arcs`. `weights` may be null, meaning every arc has weight 1;
/// otherwise each weight must lie in (0, 1]. Self-loops and duplicate arcs
/// are rejected. On success `*out` owns the digraph.
///
/// # Safety
/// `tails`, `heads`, and `weights` (when non-null) must point to `n_arcs`
/// readable elements, and `out` must be a valid writable pointer.
#[no_mangle]
pub unsafe extern "C" fn endorank_digraph_from_arcs(
    n_members: usize,
    n_arcs: usize,
    tails: *const usize,
    heads: *const usize,
    weights: *const f64,
    out: *mut *mut EndorankDigraph,
) -> EndorankStatus {
    if out.is_null() || (n_arcs > 0 && (tails.is_null() || heads.is_null())) {
        return fail(EndorankStatus::NullArgument, "required pointer is null");
    }
    let tails = slice::from_raw_parts(tails, n_arcs);
    let heads = slice::from_raw_parts(heads, n_arcs);
    let arcs: Vec<(usize, usize, f64)> = (0..n_arcs)
        .map(|i| {
            let w = if weights.is_null() {
                1.0
            } else {
                *weights.add(i)
            };
            (tails[i], heads[i], w)
        })
        .collect();
    match EndorsementDigraph::new(n_members, &arcs) {
        Ok(d) => emit(out, d),
        Err(e) => graph_fail(e),
    }
}

/// Loads a digraph on `n_members` members from the text format written by
/// the endorank tool: one `tail head [weight]` line per arc after a first
/// line holding the member count.
///
/// # Safety
/// `path` must be a nul-terminated string and `out` a valid writable
/// pointer.
#[no_mangle]
pub unsafe extern "C" fn endorank_digraph_load(
    path: *const c_char,
    n_members: usize,
    out: *mut *mut EndorankDigraph,
) -> EndorankStatus {
    if path.is_null() || out.is_null() {
        return fail(EndorankStatus::NullArgument, "required pointer is null");
    }
    let path = match CStr::from_ptr(path).to_str() {
        Ok(p) => p,
        Err(_) => return fail(EndorankStatus::InvalidArgument, "path is not valid UTF-8"),
    };
    match load_endorsement_digraph(path, n_members) {
        Ok(d) => emit(out, d),
        Err(e) => graph_fail(e),
    }
}

/// Releases a digraph. Null is ignored.
///
/// # Safety
/// `d` must have come from this library and not have been freed before.
#[no_mangle]
pub unsafe extern "C" fn endorank_digraph_free(d: *mut EndorankDigraph) {
    if !d.is_null() {
        drop(Box::from_raw(d));
    }
}

/// Number of members, or 0 for a null handle.
///
/// # Safety
/// `d` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn endorank_digraph_members(d: *const EndorankDigraph) -> usize {
    digraph(d).map_or(0, |g| g.n())
}

/// Number of arcs, or 0 for a null handle.
///
/// # Safety
/// `d` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn endorank_digraph_arc_count(d: *const EndorankDigraph) -> usize {
    digraph(d).map_or(0, |g| g.arc_count())
}

/// Weight of the arc `tail -> head`, or NaN when the arc is absent or the
/// handle is null.
///
/// # Safety
/// `d` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn endorank_digraph_weight(
    d: *const EndorankDigraph,
    tail: usize,
    head: usize,
) -> f64 {
    digraph(d)
        .and_then(|g| g.weight(tail, head))
        .unwrap_or(f64::NAN)
}

/// Weighted PageRank scores of every member, written to `scores_out` (length
/// = member count). `alpha` is the damping factor in (0, 1); iteration stops
/// once the L1 step falls below `tolerance` or after `max_iterations` steps.
/// When the cap is hit the last iterate is still written, `*converged_out`
/// (if non-null) is set to false, and the call returns `NOT_CONVERGED`.
///
/// # Safety
/// `scores_out` must hold one f64 per member; `converged_out` may be null.
#[no_mangle]
pub unsafe extern "C" fn endorank_pagerank(
    d: *const EndorankDigraph,
    alpha: f64,
    tolerance: f64,
    max_iterations: usize,
    scores_out: *mut f64,
    converged_out: *mut bool,
) -> EndorankStatus {
    let Some(g) = digraph(d) else {
        return fail(EndorankStatus::NullArgument, "digraph handle is null");
    };
    if scores_out.is_null() {
        return fail(EndorankStatus::NullArgument, "score buffer is null");
    }
    let params = PageRankParams {
        alpha,
        personalization: None,
        tolerance,
        max_iterations,
    };
    match pagerank(g, &params) {
        Ok(r) => {
            slice::from_raw_parts_mut(scores_out, g.n()).copy_from_slice(&r.scores);
            if !converged_out.is_null() {
                *converged_out = r.converged;
            }
            if r.converged {
                EndorankStatus::Ok
            } else {
                fail(
                    EndorankStatus::NotConverged,
                    format!("no convergence within {max_iterations} iterations"),
                )
            }
        }
        Err(e) => fail(EndorankStatus::InvalidArgument, e),
    }
}

/// Competition ranking of `n` scores: `positions_out[i]` is the 1-based
/// position of member `i`, and members whose scores differ by no more than
/// one part in 10^9 share a position.
///
/// # Safety
/// `scores` and `positions_out` must hold `n` elements each.
#[no_mangle]
pub unsafe extern "C" fn endorank_rank_positions(
    scores: *const f64,
    n: usize,
    positions_out: *mut usize,
) -> EndorankStatus {
    let s = match finite_slice(scores, n) {
        Ok(s) => s,
        Err(status) => return status,
    };
    if positions_out.is_null() {
        return fail(EndorankStatus::NullArgument, "position buffer is null");
    }
    let positions = rank_positions_with_tolerance(s, DEFAULT_TIE_TOLERANCE);
    slice::from_raw_parts_mut(positions_out, n).copy_from_slice(&positions);
    EndorankStatus::Ok
}

/// Enriches the digraph of `main_skill` with endorsements deduced from the
/// other skills. `digraphs` holds one handle per skill, all on the same
/// member set, and `pi` is the row-major `n_skills` x `n_skills` deduction
/// matrix: `pi[k * n_skills + j]` is the probability that an endorsement for
/// skill `k` implies one for skill `j`. On success `*out` owns the enriched
/// digraph.
///
/// # Safety
/// `digraphs` must hold `n_skills` live handles, `pi` must hold
/// `n_skills * n_skills` elements, and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn endorank_deduce(
    digraphs: *const *const EndorankDigraph,
    n_skills: usize,
    pi: *const f64,
    main_skill: usize,
    out: *mut *mut EndorankDigraph,
) -> EndorankStatus {
    if digraphs.is_null() || pi.is_null() || out.is_null() {
        return fail(EndorankStatus::NullArgument, "required pointer is null");
    }
    let handles = slice::from_raw_parts(digraphs, n_skills);
    let mut owned = Vec::with_capacity(n_skills);
    for (k, &h) in handles.iter().enumerate() {
        match digraph(h) {
            Some(g) => owned.push(g.clone()),
            None => {
                return fail(
                    EndorankStatus::NullArgument,
                    format!("digraph handle {k} is null"),
                )
            }
        }
    }
    let flat = slice::from_raw_parts(pi, n_skills * n_skills);
    let rows: Vec<Vec<f64>> = flat.chunks(n_skills).map(|r| r.to_vec()).collect();
    let matrix = match SkillDeductionMatrix::new(rows) {
        Ok(m) => m,
        Err(e) => return fail(EndorankStatus::InvalidArgument, e),
    };
    let plan = match DeductionPlan::for_main(&matrix, main_skill) {
        Ok(p) => p,
        Err(e) => return fail(EndorankStatus::InvalidArgument, e),
    };
    match deduce(&owned, &matrix, &plan) {
        Ok(d) => emit(out, d),
        Err(e) => fail(EndorankStatus::InvalidArgument, e),
    }
}

/// Probability of the union of two independent events, the core of the
/// deduction step. Returns NaN unless both arguments lie in [0, 1].
#[no_mangle]
pub extern "C" fn endorank_union_probability(existing: f64, pi: f64) -> f64 {
    if !(0.0..=1.0).contains(&existing) || !(0.0..=1.0).contains(&pi) {
        return f64::NAN;
    }
    union_probability(existing, pi)
}

/// Spearman rank correlation between two score vectors of length `n`, using
/// fractional ranks for ties. Requires `n >= 2` and some variation in each
/// vector.
///
/// # Safety
/// `a` and `b` must hold `n` elements each; `rho_out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn endorank_spearman_rho(
    a: *const f64,
    b: *const f64,
    n: usize,
    rho_out: *mut f64,
) -> EndorankStatus {
    correlation(a, b, n, rho_out, spearman_rho)
}

/// Kendall tau-b rank correlation between two score vectors of length `n`.
/// Requires `n >= 2` and some variation in each vector.
///
/// # Safety
/// `a` and `b` must hold `n` elements each; `tau_out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn endorank_kendall_tau(
    a: *const f64,
    b: *const f64,
    n: usize,
    tau_out: *mut f64,
) -> EndorankStatus {
    correlation(a, b, n, tau_out, kendall_tau)
}

unsafe fn correlation(
    a: *const f64,
    b: *const f64,
    n: usize,
    out: *mut f64,
    f: fn(&[f64], &[f64]) -> Result<f64, endorank::metrics::MetricsError>,
) -> EndorankStatus {
    if n < 2 {
        return fail(
            EndorankStatus::InvalidArgument,
            "need at least two members",
        );
    }
    let (a, b) = match (finite_slice(a, n), finite_slice(b, n)) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(s), _) | (_, Err(s)) => return s,
    };
    if out.is_null() {
        return fail(EndorankStatus::NullArgument, "output pointer is null");
    }
    match f(a, b) {
        Ok(v) => {
            *out = v;
            EndorankStatus::Ok
        }
        Err(e) => fail(EndorankStatus::InvalidArgument, e),
    }
}

/// Number of members of `scores` involved in a tie: scores within
/// `tolerance` (relative) of each other count as tied. Pass a negative
/// tolerance to use the default of one part in 10^9.
///
/// # Safety
/// `scores` must hold `n` elements; `ties_out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn endorank_count_ties(
    scores: *const f64,
    n: usize,
    tolerance: f64,
    ties_out: *mut usize,
) -> EndorankStatus {
    let s = match finite_slice(scores, n) {
        Ok(s) => s,
        Err(status) => return status,
    };
    if ties_out.is_null() {
        return fail(EndorankStatus::NullArgument, "output pointer is null");
    }
    if tolerance.is_nan() {
        return fail(EndorankStatus::InvalidArgument, "tolerance is NaN");
    }
    let tol = if tolerance < 0.0 {
        DEFAULT_TIE_TOLERANCE
    } else {
        tolerance
    };
    *ties_out = count_ties(s, tol);
    EndorankStatus::Ok
}
