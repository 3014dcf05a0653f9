//! Standard, weighted, and personalized PageRank by sparse power iteration.
//!
//! The transition matrix is never materialized: each iteration streams the
//! arcs of the digraph, treats members without out-weight as linking
//! uniformly to everyone (or to the personalization vector when one is
//! supplied), and mixes in the restart term. Summation runs in ascending
//! member order, so results are bit-reproducible across runs.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{EndorsementDigraph, MemberId};
use crate::metrics::{descending_order, tie_run_bounds, DEFAULT_TIE_TOLERANCE};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PageRankParams {
    /// Damping factor in (0, 1): probability of following a link rather than
    /// restarting.
    pub alpha: f64,
    /// Restart distribution; `None` means uniform 1/n. Must be a probability
    /// vector of length n when present.
    pub personalization: Option<Vec<f64>>,
    /// L1 distance between successive iterates at which iteration stops.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for PageRankParams {
    fn default() -> Self {
        PageRankParams {
            alpha: 0.85,
            personalization: None,
            tolerance: 1e-12,
            max_iterations: 1000,
        }
    }
}

#[derive(Debug, Error)]
pub enum PageRankError {
    #[error("damping factor must lie in (0, 1), got {0}")]
    BadAlpha(f64),
    #[error("personalization vector {0}")]
    BadPersonalization(String),
    #[error("digraph has no members")]
    Empty,
}

/// Authority scores of all members: strictly positive, summing to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct RankVector {
    pub scores: Vec<f64>,
    pub iterations_used: usize,
    /// L1 distance between the last two iterates.
    pub residual: f64,
    /// False when `max_iterations` ran out before `residual <= tolerance`;
    /// the scores are still the best iterate available.
    pub converged: bool,
}

/// Row `i` of the dense transition matrix: out-weights normalized to sum 1,
/// or uniform 1/n when `i` has no out-weight.
pub fn transition_row(d: &EndorsementDigraph, i: MemberId) -> Vec<f64> {
    let n = d.n();
    let mut row = vec![0.0; n];
    let total = d.out_weight_sum(i);
    if total > 0.0 {
        let (targets, weights) = d.out_neighbors(i);
        for (&j, &w) in targets.iter().zip(weights) {
            row[j] = w / total;
        }
    } else {
        row.fill(1.0 / n as f64);
    }
    row
}

/// Left Perron vector of the damped transition matrix, by power iteration.
///
/// Non-convergence within `max_iterations` is not an error: the result is
/// returned with `converged == false` and the final residual.
pub fn pagerank(
    d: &EndorsementDigraph,
    params: &PageRankParams,
) -> Result<RankVector, PageRankError> {
    let n = d.n();
    if n == 0 {
        return Err(PageRankError::Empty);
    }
    if !(params.alpha > 0.0 && params.alpha < 1.0) {
        return Err(PageRankError::BadAlpha(params.alpha));
    }
    let restart = match &params.personalization {
        Some(v) => {
            if v.len() != n {
                return Err(PageRankError::BadPersonalization(format!(
                    "has length {}, digraph has {} members",
                    v.len(),
                    n
                )));
            }
            if v.iter().any(|&p| !p.is_finite() || p < 0.0) {
                return Err(PageRankError::BadPersonalization(
                    "entries must be finite and non-negative".into(),
                ));
            }
            let sum: f64 = v.iter().sum();
            if (sum - 1.0).abs() > 1e-9 {
                return Err(PageRankError::BadPersonalization(format!(
                    "entries sum to {sum}, expected 1"
                )));
            }
            v.clone()
        }
        None => vec![1.0 / n as f64; n],
    };

    let alpha = params.alpha;
    let out_sum: Vec<f64> = (0..n).map(|v| d.out_weight_sum(v)).collect();
    let mut x = restart.clone();
    let mut next = vec![0.0; n];
    let mut iterations_used = 0;
    let mut residual = f64::INFINITY;
    let mut converged = false;

    for iteration in 1..=params.max_iterations {
        let mut dangling = 0.0;
        for i in 0..n {
            if out_sum[i] == 0.0 {
                dangling += x[i];
            }
        }
        next.fill(0.0);
        for i in 0..n {
            if out_sum[i] == 0.0 {
                continue;
            }
            let (targets, weights) = d.out_neighbors(i);
            for (&j, &w) in targets.iter().zip(weights) {
                next[j] += alpha * x[i] * w / out_sum[i];
            }
        }
        for j in 0..n {
            next[j] += alpha * dangling * restart[j] + (1.0 - alpha) * restart[j];
        }
        residual = x
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b).abs())
            .sum();
        std::mem::swap(&mut x, &mut next);
        iterations_used = iteration;
        if residual <= params.tolerance {
            converged = true;
            break;
        }
    }

    let sum: f64 = x.iter().sum();
    for s in &mut x {
        *s /= sum;
    }
    Ok(RankVector {
        scores: x,
        iterations_used,
        residual,
        converged,
    })
}

/// Competition-ranking positions (1, 2, 2, 4): position 1 is the highest
/// score, and members tied within the default tolerance share the best
/// position of their group.
pub fn rank_positions(r: &RankVector) -> Vec<usize> {
    rank_positions_with_tolerance(&r.scores, DEFAULT_TIE_TOLERANCE)
}

pub fn rank_positions_with_tolerance(scores: &[f64], tol: f64) -> Vec<usize> {
    let order = descending_order(scores);
    let bounds = tie_run_bounds(scores, &order, tol);
    let mut positions = vec![0; scores.len()];
    for w in bounds.windows(2) {
        for &m in &order[w[0]..w[1]] {
            positions[m] = w[0] + 1;
        }
    }
    positions
}
