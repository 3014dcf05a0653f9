//! Reproducible synthetic datasets: a contact network grown by preferential
//! attachment with triangle closing, per-skill endorsement digraphs whose
//! endorsed sets match a target co-occurrence matrix, and injected spam
//! alliances.
//!
//! All randomness flows from one 64-bit seed through a counter-based
//! generator with a separate stream per phase, so adding a phase never
//! perturbs the draws of an earlier one.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{EndorsementDigraph, MemberGraph, MemberId, SkillId, SkillSet};

/// Average endorsements per endorsed member; divides a skill's arc target
/// into the size of its endorsed set.
pub const ARCS_PER_ENDORSED: f64 = 1.6;

/// Proposal budget of the endorsed-set annealing pass.
pub const ANNEALING_BUDGET: usize = 100_000;

pub const STREAM_BASE: u64 = 0;
pub const STREAM_SKILLS: u64 = 1;

/// Stream of a spam injection: one per (skill, alliance size) point, so
/// sweeping alliance sizes reuses the host dataset untouched.
pub fn spam_stream(skill: SkillId, n_assistants: usize) -> u64 {
    2 + skill as u64 * 16 + n_assistants as u64
}

pub fn phase_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Error)]
pub enum GenError {
    #[error("generator config {0}")]
    Config(String),
    #[error(
        "co-occurrence targets infeasible: residual {residual:.4} exceeds tolerance {tolerance} \
         (achieved matrix attached)"
    )]
    Infeasible {
        residual: f64,
        tolerance: f64,
        achieved: Vec<Vec<f64>>,
    },
    #[error("skill {skill}: placed {placed} of {target} endorsement arcs")]
    ArcShortfall {
        skill: SkillId,
        target: usize,
        placed: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorConfig {
    pub seed: u64,
    pub n_target: usize,
    /// Probability of closing each candidate triangle when a member arrives.
    pub triangle_closing_prob: f64,
    pub skills: SkillSet,
    pub skill_arc_targets: Vec<usize>,
    /// Desired fraction of members endorsed for the row skill that are also
    /// endorsed for the column skill. Diagonal must be 1.
    pub cooccurrence_target: Vec<Vec<f64>>,
    /// Largest acceptable absolute per-entry deviation from the target.
    #[serde(default = "default_cooccurrence_tolerance")]
    pub cooccurrence_tolerance: f64,
}

fn default_cooccurrence_tolerance() -> f64 {
    0.05
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<(), GenError> {
        if self.n_target < 2 {
            return Err(GenError::Config(format!(
                "needs at least 2 members, got {}",
                self.n_target
            )));
        }
        if !(0.0..=1.0).contains(&self.triangle_closing_prob) {
            return Err(GenError::Config(format!(
                "triangle closing probability {} outside [0, 1]",
                self.triangle_closing_prob
            )));
        }
        let l = self.skills.len();
        if l == 0 {
            return Err(GenError::Config("has no skills".into()));
        }
        if self.skill_arc_targets.len() != l {
            return Err(GenError::Config(format!(
                "{} skills but {} arc targets",
                l,
                self.skill_arc_targets.len()
            )));
        }
        if self.cooccurrence_target.len() != l
            || self.cooccurrence_target.iter().any(|row| row.len() != l)
        {
            return Err(GenError::Config(format!(
                "co-occurrence target must be {l} x {l}"
            )));
        }
        for (i, row) in self.cooccurrence_target.iter().enumerate() {
            for (j, &t) in row.iter().enumerate() {
                if !t.is_finite() || !(0.0..=1.0).contains(&t) {
                    return Err(GenError::Config(format!(
                        "co-occurrence target ({i}, {j}) is {t}, must lie in [0, 1]"
                    )));
                }
                if i == j && t != 1.0 {
                    return Err(GenError::Config(format!(
                        "co-occurrence target diagonal ({i}, {i}) is {t}, must be 1"
                    )));
                }
            }
        }
        if !(self.cooccurrence_tolerance > 0.0) {
            return Err(GenError::Config(format!(
                "co-occurrence tolerance {} must be positive",
                self.cooccurrence_tolerance
            )));
        }
        for (k, &target) in self.skill_arc_targets.iter().enumerate() {
            if endorsed_set_size(target) > self.n_target {
                return Err(GenError::Config(format!(
                    "skill {k} needs {} endorsed members, network has {}",
                    endorsed_set_size(target),
                    self.n_target
                )));
            }
        }
        Ok(())
    }
}

fn endorsed_set_size(arc_target: usize) -> usize {
    (arc_target as f64 / ARCS_PER_ENDORSED).round() as usize
}

/// Endorsed-set sizes consistent with the co-occurrence target. The identity
/// `|A_i ∩ A_j| = target[i][j] |A_i| = target[j][i] |A_j|` forces the size
/// ratios `|A_k| / |A_0| = target[0][k] / target[k][0]`; the first skill is
/// anchored at `arcs / ARCS_PER_ENDORSED` and the rest follow the ratios.
/// Entries of zero leave the ratio undefined, in which case the arc-count
/// ratio stands in. Every set needs at least one member and can hold at most
/// one in-arc per member per endorser, so sizes clamp to `1..=arcs`.
fn endorsed_set_sizes(cfg: &GeneratorConfig) -> Vec<usize> {
    let arcs = &cfg.skill_arc_targets;
    let t = &cfg.cooccurrence_target;
    let anchor = endorsed_set_size(arcs[0]) as f64;
    arcs.iter()
        .enumerate()
        .map(|(k, &a)| {
            let ratio = if k == 0 {
                1.0
            } else if t[0][k] > 0.0 && t[k][0] > 0.0 {
                t[0][k] / t[k][0]
            } else {
                a as f64 / arcs[0] as f64
            };
            ((anchor * ratio).round() as usize).clamp(1, a)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AttachMode {
    /// The alliance has no arcs to or from pre-existing members.
    #[default]
    Isolated,
    /// Each assistant additionally receives one endorsement from a random
    /// pre-existing member, channeling host score into the alliance.
    LinkedToNetwork,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpamAllianceConfig {
    pub skill: SkillId,
    pub n_assistants: usize,
    #[serde(default)]
    pub attach_mode: AttachMode,
}

/// Grows the undirected contact network by sequential arrival: each new
/// member links to one existing member chosen preferentially by degree, then
/// links to each of that member's neighbors independently with the closing
/// probability. Every member therefore has degree at least 1, and the degree
/// distribution is heavy-tailed.
pub fn generate_base_network(cfg: &GeneratorConfig) -> Result<MemberGraph, GenError> {
    cfg.validate()?;
    let n = cfg.n_target;
    let mut rng = phase_rng(cfg.seed, STREAM_BASE);
    let mut adj: Vec<Vec<MemberId>> = vec![Vec::new(); n];
    let mut deg = vec![0usize; n];
    let mut edges: Vec<(MemberId, MemberId)> = Vec::new();
    let add_edge = |u: usize,
                        v: usize,
                        adj: &mut Vec<Vec<MemberId>>,
                        deg: &mut Vec<usize>,
                        edges: &mut Vec<(MemberId, MemberId)>| {
        adj[u].push(v);
        adj[v].push(u);
        deg[u] += 1;
        deg[v] += 1;
        edges.push((u, v));
    };

    add_edge(0, 1, &mut adj, &mut deg, &mut edges);
    for t in 2..n {
        let total: usize = 2 * edges.len();
        let mut x = rng.random_range(0..total);
        let mut anchor = 0;
        for v in 0..t {
            if x < deg[v] {
                anchor = v;
                break;
            }
            x -= deg[v];
        }
        add_edge(anchor, t, &mut adj, &mut deg, &mut edges);
        let candidates: Vec<MemberId> = adj[anchor]
            .iter()
            .copied()
            .filter(|&c| c != t)
            .collect();
        for c in candidates {
            if !adj[t].contains(&c) && rng.random_bool(cfg.triangle_closing_prob) {
                add_edge(t, c, &mut adj, &mut deg, &mut edges);
            }
        }
    }
    Ok(MemberGraph::new(n, &edges).expect("arrival process emits valid edges"))
}

/// Fraction matrix of shared endorsed members: entry (i, j) is the share of
/// members endorsed for skill i that are also endorsed for skill j, where
/// endorsed means positive in-degree. Rows of never-endorsed skills are zero
/// and flagged by a zero endorsed count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cooccurrence {
    pub values: Vec<Vec<f64>>,
    pub endorsed_counts: Vec<usize>,
}

impl Cooccurrence {
    /// Largest absolute deviation from a target matrix, over off-diagonal
    /// entries whose row and column skills both have endorsed members.
    pub fn max_residual(&self, target: &[Vec<f64>]) -> f64 {
        let l = self.values.len();
        let mut worst = 0.0f64;
        for i in 0..l {
            for j in 0..l {
                if i == j || self.endorsed_counts[i] == 0 || self.endorsed_counts[j] == 0 {
                    continue;
                }
                worst = worst.max((self.values[i][j] - target[i][j]).abs());
            }
        }
        worst
    }
}

pub fn measure_cooccurrence(digraphs: &[EndorsementDigraph]) -> Cooccurrence {
    let l = digraphs.len();
    let endorsed: Vec<Vec<bool>> = digraphs
        .iter()
        .map(|d| d.in_degrees().iter().map(|&deg| deg > 0).collect())
        .collect();
    let endorsed_counts: Vec<usize> = endorsed
        .iter()
        .map(|e| e.iter().filter(|&&b| b).count())
        .collect();
    let mut values = vec![vec![0.0; l]; l];
    for i in 0..l {
        if endorsed_counts[i] == 0 {
            continue;
        }
        for j in 0..l {
            let both = endorsed[i]
                .iter()
                .zip(&endorsed[j])
                .filter(|(&a, &b)| a && b)
                .count();
            values[i][j] = both as f64 / endorsed_counts[i] as f64;
        }
    }
    Cooccurrence {
        values,
        endorsed_counts,
    }
}

/// Endorsed-set assignment state under simulated annealing. Swap moves keep
/// every set's size fixed, so only the pairwise overlaps move.
struct SetFit {
    member_of: Vec<Vec<bool>>,
    sets: Vec<Vec<MemberId>>,
    overlap: Vec<Vec<usize>>,
}

impl SetFit {
    fn new(n: usize, sizes: &[usize], rng: &mut ChaCha8Rng) -> Self {
        let l = sizes.len();
        let mut member_of = vec![vec![false; n]; l];
        let mut sets = Vec::with_capacity(l);
        for (k, &m) in sizes.iter().enumerate() {
            let mut pool: Vec<MemberId> = (0..n).collect();
            let (chosen, _) = pool.partial_shuffle(rng, m);
            let mut set = chosen.to_vec();
            set.sort_unstable();
            for &v in &set {
                member_of[k][v] = true;
            }
            sets.push(set);
        }
        let mut overlap = vec![vec![0usize; l]; l];
        for i in 0..l {
            for j in 0..l {
                overlap[i][j] = sets[i]
                    .iter()
                    .filter(|&&v| member_of[j][v])
                    .count();
            }
        }
        SetFit {
            member_of,
            sets,
            overlap,
        }
    }

    fn values(&self) -> Vec<Vec<f64>> {
        let l = self.sets.len();
        let mut values = vec![vec![0.0; l]; l];
        for i in 0..l {
            if self.sets[i].is_empty() {
                continue;
            }
            for j in 0..l {
                values[i][j] = self.overlap[i][j] as f64 / self.sets[i].len() as f64;
            }
        }
        values
    }

    fn cost(&self, target: &[Vec<f64>]) -> f64 {
        let l = self.sets.len();
        let mut cost = 0.0;
        for i in 0..l {
            if self.sets[i].is_empty() {
                continue;
            }
            for j in 0..l {
                if i != j && !self.sets[j].is_empty() {
                    cost += (self.overlap[i][j] as f64 / self.sets[i].len() as f64
                        - target[i][j])
                        .abs();
                }
            }
        }
        cost
    }

    /// Cost change of swapping member `out` for member `inc` in skill k.
    fn swap_delta(&self, k: usize, out: MemberId, inc: MemberId, target: &[Vec<f64>]) -> f64 {
        let l = self.sets.len();
        let m_k = self.sets[k].len() as f64;
        let mut delta = 0.0;
        for j in 0..l {
            if j == k || self.sets[j].is_empty() {
                continue;
            }
            let shift = self.member_of[j][inc] as isize - self.member_of[j][out] as isize;
            if shift == 0 {
                continue;
            }
            let before = self.overlap[k][j] as f64;
            let after = (self.overlap[k][j] as isize + shift) as f64;
            delta += (after / m_k - target[k][j]).abs() - (before / m_k - target[k][j]).abs();
            let m_j = self.sets[j].len() as f64;
            delta +=
                (after / m_j - target[j][k]).abs() - (before / m_j - target[j][k]).abs();
        }
        delta
    }

    fn apply_swap(&mut self, k: usize, out: MemberId, inc: MemberId) {
        let l = self.sets.len();
        for j in 0..l {
            if j == k {
                continue;
            }
            let shift = self.member_of[j][inc] as isize - self.member_of[j][out] as isize;
            self.overlap[k][j] = (self.overlap[k][j] as isize + shift) as usize;
            self.overlap[j][k] = self.overlap[k][j];
        }
        self.member_of[k][out] = false;
        self.member_of[k][inc] = true;
        let slot = self.sets[k].iter().position(|&v| v == out).unwrap();
        self.sets[k][slot] = inc;
    }

    fn max_residual(&self, target: &[Vec<f64>]) -> f64 {
        let l = self.sets.len();
        let mut worst = 0.0f64;
        for i in 0..l {
            for j in 0..l {
                if i == j || self.sets[i].is_empty() || self.sets[j].is_empty() {
                    continue;
                }
                worst = worst.max(
                    (self.overlap[i][j] as f64 / self.sets[i].len() as f64 - target[i][j])
                        .abs(),
                );
            }
        }
        worst
    }
}

fn anneal_sets(
    n: usize,
    sizes: &[usize],
    target: &[Vec<f64>],
    tolerance: f64,
    rng: &mut ChaCha8Rng,
) -> Result<SetFit, GenError> {
    let mut fit = SetFit::new(n, sizes, rng);
    let swappable: Vec<usize> = (0..sizes.len())
        .filter(|&k| sizes[k] > 0 && sizes[k] < n)
        .collect();
    if swappable.is_empty() || fit.max_residual(target) <= tolerance * 0.5 {
        return finish_anneal(fit, target, tolerance);
    }
    let t_start: f64 = 0.05;
    let t_end: f64 = 1e-4;
    let mut cost = fit.cost(target);
    for step in 0..ANNEALING_BUDGET {
        let temp = t_start * (t_end / t_start).powf(step as f64 / ANNEALING_BUDGET as f64);
        let k = swappable[rng.random_range(0..swappable.len())];
        let out = fit.sets[k][rng.random_range(0..fit.sets[k].len())];
        let inc = loop {
            let v = rng.random_range(0..n);
            if !fit.member_of[k][v] {
                break v;
            }
        };
        let delta = fit.swap_delta(k, out, inc, target);
        if delta <= 0.0 || rng.random_bool((-delta / temp).exp()) {
            fit.apply_swap(k, out, inc);
            cost += delta;
            if cost <= 0.0 || (delta < 0.0 && fit.max_residual(target) <= tolerance * 0.5) {
                break;
            }
        }
    }
    finish_anneal(fit, target, tolerance)
}

fn finish_anneal(fit: SetFit, target: &[Vec<f64>], tolerance: f64) -> Result<SetFit, GenError> {
    let residual = fit.max_residual(target);
    if residual > tolerance {
        return Err(GenError::Infeasible {
            residual,
            tolerance,
            achieved: fit.values(),
        });
    }
    Ok(fit)
}

/// One unweighted endorsement digraph per skill, every arc running along a
/// base-network edge.
///
/// Each skill's endorsed set comes from the annealing fit; its first
/// endorsement arrives from a uniformly random contact, and the remaining
/// arcs go to endorsed members chosen preferentially by in-degree, from
/// contacts not yet endorsing them.
pub fn generate_endorsements(
    base: &MemberGraph,
    cfg: &GeneratorConfig,
) -> Result<Vec<EndorsementDigraph>, GenError> {
    cfg.validate()?;
    if base.n() != cfg.n_target {
        return Err(GenError::Config(format!(
            "base network has {} members, config targets {}",
            base.n(),
            cfg.n_target
        )));
    }
    let n = base.n();
    let sizes = endorsed_set_sizes(cfg);
    let mut rng = phase_rng(cfg.seed, STREAM_SKILLS);
    let fit = anneal_sets(
        n,
        &sizes,
        &cfg.cooccurrence_target,
        cfg.cooccurrence_tolerance,
        &mut rng,
    )?;

    let mut digraphs = Vec::with_capacity(sizes.len());
    for (k, &target) in cfg.skill_arc_targets.iter().enumerate() {
        let heads = &fit.sets[k];
        let mut arcs: Vec<(MemberId, MemberId)> = Vec::with_capacity(target);
        let mut in_deg = vec![0usize; n];
        let mut endorsers: Vec<Vec<MemberId>> = vec![Vec::new(); n];
        for &head in heads {
            let tail = *base
                .neighbors(head)
                .choose(&mut rng)
                .expect("every member has a contact");
            arcs.push((tail, head));
            in_deg[head] = 1;
            endorsers[head].push(tail);
        }
        // Extra endorsements favor members with spare endorsement capacity,
        // which tracks how well connected they are. Capacity is capped near
        // three times the skill's average in-degree so no member hoards the
        // skill's endorsement mass.
        let cap = (7 * target).div_ceil(2 * heads.len());
        let capacity = |h: MemberId| cap.min(base.degree(h));
        while arcs.len() < target {
            let open: Vec<MemberId> = heads
                .iter()
                .copied()
                .filter(|&h| in_deg[h] < capacity(h))
                .collect();
            let total: usize = open.iter().map(|&h| capacity(h) - in_deg[h]).sum();
            if total == 0 {
                break;
            }
            let mut x = rng.random_range(0..total);
            let mut head = open[0];
            for &h in &open {
                let slack = capacity(h) - in_deg[h];
                if x < slack {
                    head = h;
                    break;
                }
                x -= slack;
            }
            let free: Vec<MemberId> = base
                .neighbors(head)
                .iter()
                .copied()
                .filter(|t| !endorsers[head].contains(t))
                .collect();
            let tail = *free.choose(&mut rng).expect("head had spare capacity");
            arcs.push((tail, head));
            in_deg[head] += 1;
            endorsers[head].push(tail);
        }
        if arcs.len() * 10 < target * 9 {
            return Err(GenError::ArcShortfall {
                skill: k,
                target,
                placed: arcs.len(),
            });
        }
        digraphs
            .push(EndorsementDigraph::unweighted(n, &arcs).expect("placement emits valid arcs"));
    }

    let measured = measure_cooccurrence(&digraphs);
    let residual = measured.max_residual(&cfg.cooccurrence_target);
    if residual > cfg.cooccurrence_tolerance {
        return Err(GenError::Infeasible {
            residual,
            tolerance: cfg.cooccurrence_tolerance,
            achieved: measured.values,
        });
    }
    Ok(digraphs)
}

/// Appends a spam alliance to the digraph: one leader plus `n_assistants`
/// accomplices, each endorsing the leader and endorsed back by the leader,
/// all with weight 1. Returns the enlarged digraph and the leader's id.
///
/// The alliance touches no pre-existing member unless `attach_mode` links it
/// in, so dropping members n and above restores the host digraph exactly.
pub fn inject_spam_alliance(
    d: &EndorsementDigraph,
    cfg: &SpamAllianceConfig,
    rng: &mut impl Rng,
) -> (EndorsementDigraph, MemberId) {
    assert!(cfg.n_assistants >= 1, "an alliance needs an assistant");
    let n = d.n();
    let leader = n;
    let new_n = n + 1 + cfg.n_assistants;
    let mut arcs: Vec<(MemberId, MemberId, f64)> = d.arcs().collect();
    for a in 0..cfg.n_assistants {
        let assistant = n + 1 + a;
        arcs.push((assistant, leader, 1.0));
        arcs.push((leader, assistant, 1.0));
        if cfg.attach_mode == AttachMode::LinkedToNetwork && n > 0 {
            arcs.push((rng.random_range(0..n), assistant, 1.0));
        }
    }
    let enlarged = EndorsementDigraph::new(new_n, &arcs).expect("alliance arcs are valid");
    (enlarged, leader)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pagerank::{pagerank, rank_positions, PageRankParams};

    fn small_config(seed: u64) -> GeneratorConfig {
        GeneratorConfig {
            seed,
            n_target: 300,
            triangle_closing_prob: 0.15,
            skills: SkillSet::new(vec!["a".into(), "b".into(), "c".into()]),
            skill_arc_targets: vec![60, 45, 40],
            cooccurrence_target: vec![
                vec![1.0, 0.4, 0.3],
                vec![0.5, 1.0, 0.45],
                vec![0.4, 0.465, 1.0],
            ],
            cooccurrence_tolerance: 0.05,
        }
    }

    #[test]
    fn two_members_get_the_forced_edge() {
        let mut cfg = small_config(1);
        cfg.n_target = 2;
        cfg.skill_arc_targets = vec![1, 1, 1];
        let g = generate_base_network(&cfg).unwrap();
        assert_eq!(g.edge_count(), 1);
        assert!(g.has_edge(0, 1));
    }

    #[test]
    fn base_network_is_deterministic() {
        let cfg = small_config(7);
        let a = generate_base_network(&cfg).unwrap();
        let b = generate_base_network(&cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn base_network_is_mostly_one_component() {
        let g = generate_base_network(&small_config(3)).unwrap();
        assert!(g.giant_component_size() * 10 >= g.n() * 9);
    }

    #[test]
    fn different_seeds_give_different_networks() {
        let a = generate_base_network(&small_config(1)).unwrap();
        let b = generate_base_network(&small_config(2)).unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn endorsement_arcs_run_along_base_edges() {
        let cfg = small_config(11);
        let base = generate_base_network(&cfg).unwrap();
        let digraphs = generate_endorsements(&base, &cfg).unwrap();
        assert_eq!(digraphs.len(), 3);
        for d in &digraphs {
            for (u, v, w) in d.arcs() {
                assert_eq!(w, 1.0);
                assert!(base.has_edge(u, v), "arc {u} -> {v} off the base network");
            }
        }
    }

    #[test]
    fn arc_counts_land_within_ten_percent_of_targets() {
        let cfg = small_config(11);
        let base = generate_base_network(&cfg).unwrap();
        let digraphs = generate_endorsements(&base, &cfg).unwrap();
        for (d, &target) in digraphs.iter().zip(&cfg.skill_arc_targets) {
            assert!(d.arc_count() * 10 >= target * 9);
            assert!(d.arc_count() <= target);
        }
    }

    #[test]
    fn measured_cooccurrence_matches_the_target() {
        let cfg = small_config(11);
        let base = generate_base_network(&cfg).unwrap();
        let digraphs = generate_endorsements(&base, &cfg).unwrap();
        let measured = measure_cooccurrence(&digraphs);
        assert!(measured.max_residual(&cfg.cooccurrence_target) <= cfg.cooccurrence_tolerance);
    }

    #[test]
    fn endorsement_generation_is_deterministic() {
        let cfg = small_config(19);
        let base = generate_base_network(&cfg).unwrap();
        let a = generate_endorsements(&base, &cfg).unwrap();
        let b = generate_endorsements(&base, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn single_skill_identity_target_is_trivially_feasible() {
        let cfg = GeneratorConfig {
            seed: 5,
            n_target: 50,
            triangle_closing_prob: 0.1,
            skills: SkillSet::new(vec!["only".into()]),
            skill_arc_targets: vec![20],
            cooccurrence_target: vec![vec![1.0]],
            cooccurrence_tolerance: 0.05,
        };
        let base = generate_base_network(&cfg).unwrap();
        let digraphs = generate_endorsements(&base, &cfg).unwrap();
        assert_eq!(digraphs.len(), 1);
        assert!(digraphs[0].arc_count() >= 18);
    }

    #[test]
    fn impossible_cooccurrence_reports_the_achieved_matrix() {
        // two skills forced to cover most members cannot have near-zero overlap
        let cfg = GeneratorConfig {
            seed: 5,
            n_target: 60,
            triangle_closing_prob: 0.1,
            skills: SkillSet::new(vec!["a".into(), "b".into()]),
            skill_arc_targets: vec![80, 80],
            cooccurrence_target: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            cooccurrence_tolerance: 0.05,
        };
        let base = generate_base_network(&cfg).unwrap();
        match generate_endorsements(&base, &cfg) {
            Err(GenError::Infeasible {
                residual, achieved, ..
            }) => {
                assert!(residual > 0.05);
                assert_eq!(achieved.len(), 2);
            }
            other => panic!("expected infeasible, got {other:?}"),
        }
    }

    #[test]
    fn cooccurrence_counts_shared_endorsed_members() {
        // skill 0 endorses {1, 2, 3, 4}, skill 1 endorses {3, 4}
        let d0 = EndorsementDigraph::unweighted(6, &[(0, 1), (0, 2), (5, 3), (5, 4)]).unwrap();
        let d1 = EndorsementDigraph::unweighted(6, &[(0, 3), (1, 4)]).unwrap();
        let c = measure_cooccurrence(&[d0, d1]);
        assert_eq!(c.endorsed_counts, vec![4, 2]);
        assert_eq!(c.values[0][1], 0.5);
        assert_eq!(c.values[1][0], 1.0);
        assert_eq!(c.values[0][0], 1.0);
    }

    #[test]
    fn identical_endorsed_sets_cooccur_fully() {
        let d0 = EndorsementDigraph::unweighted(4, &[(0, 2), (1, 3)]).unwrap();
        let d1 = EndorsementDigraph::unweighted(4, &[(1, 2), (0, 3)]).unwrap();
        let c = measure_cooccurrence(&[d0, d1]);
        assert_eq!(c.values[0][1], 1.0);
        assert_eq!(c.values[1][0], 1.0);
    }

    #[test]
    fn disjoint_endorsed_sets_do_not_cooccur() {
        let d0 = EndorsementDigraph::unweighted(4, &[(1, 0)]).unwrap();
        let d1 = EndorsementDigraph::unweighted(4, &[(0, 2), (0, 3)]).unwrap();
        let c = measure_cooccurrence(&[d0, d1]);
        assert_eq!(c.values[0][1], 0.0);
        assert_eq!(c.values[1][0], 0.0);
    }

    #[test]
    fn skill_without_endorsements_is_flagged_by_zero_count() {
        let d0 = EndorsementDigraph::unweighted(3, &[(0, 1)]).unwrap();
        let d1 = EndorsementDigraph::unweighted(3, &[]).unwrap();
        let c = measure_cooccurrence(&[d0, d1]);
        assert_eq!(c.endorsed_counts[1], 0);
        assert_eq!(c.values[1], vec![0.0, 0.0]);
    }

    #[test]
    fn alliance_wires_assistants_and_leader_reciprocally() {
        let host = EndorsementDigraph::unweighted(5, &[(0, 1), (2, 3)]).unwrap();
        let cfg = SpamAllianceConfig {
            skill: 0,
            n_assistants: 2,
            attach_mode: AttachMode::Isolated,
        };
        let mut rng = phase_rng(1, spam_stream(0, 2));
        let (spammed, leader) = inject_spam_alliance(&host, &cfg, &mut rng);
        assert_eq!(spammed.n(), 8);
        assert_eq!(leader, 5);
        assert_eq!(spammed.in_degrees()[leader], 2);
        assert_eq!(spammed.out_degree(leader), 2);
        for assistant in 6..8 {
            assert_eq!(spammed.weight(assistant, leader), Some(1.0));
            assert_eq!(spammed.weight(leader, assistant), Some(1.0));
        }
    }

    #[test]
    fn eight_assistants_feed_the_leader_eightfold() {
        let host = EndorsementDigraph::unweighted(4, &[(0, 1)]).unwrap();
        let cfg = SpamAllianceConfig {
            skill: 0,
            n_assistants: 8,
            attach_mode: AttachMode::Isolated,
        };
        let mut rng = phase_rng(1, spam_stream(0, 8));
        let (spammed, leader) = inject_spam_alliance(&host, &cfg, &mut rng);
        assert_eq!(spammed.in_degrees()[leader], 8);
    }

    #[test]
    fn removing_the_alliance_restores_the_host_exactly() {
        let host = EndorsementDigraph::new(6, &[(0, 1, 1.0), (2, 3, 0.4), (4, 5, 0.96)]).unwrap();
        let cfg = SpamAllianceConfig {
            skill: 0,
            n_assistants: 3,
            attach_mode: AttachMode::LinkedToNetwork,
        };
        let mut rng = phase_rng(9, spam_stream(0, 3));
        let (spammed, _) = inject_spam_alliance(&host, &cfg, &mut rng);
        let restored = spammed.restricted_to(6);
        assert_eq!(restored, host);
    }

    #[test]
    fn alliance_leads_an_otherwise_silent_network() {
        let host = EndorsementDigraph::unweighted(5, &[]).unwrap();
        let cfg = SpamAllianceConfig {
            skill: 0,
            n_assistants: 2,
            attach_mode: AttachMode::Isolated,
        };
        let mut rng = phase_rng(1, spam_stream(0, 2));
        let (spammed, leader) = inject_spam_alliance(&host, &cfg, &mut rng);
        let scores = pagerank(&spammed, &PageRankParams::default()).unwrap();
        assert_eq!(rank_positions(&scores)[leader], 1);
    }

    #[test]
    fn linked_alliance_receives_host_endorsements() {
        let host = EndorsementDigraph::unweighted(5, &[(0, 1)]).unwrap();
        let cfg = SpamAllianceConfig {
            skill: 0,
            n_assistants: 2,
            attach_mode: AttachMode::LinkedToNetwork,
        };
        let mut rng = phase_rng(3, spam_stream(0, 2));
        let (spammed, leader) = inject_spam_alliance(&host, &cfg, &mut rng);
        for assistant in leader + 1..spammed.n() {
            let inbound = spammed.in_degrees()[assistant];
            assert_eq!(inbound, 2, "assistant {assistant} should gain a host arc");
        }
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let mut cfg = small_config(1);
        cfg.n_target = 1;
        assert!(matches!(
            generate_base_network(&cfg),
            Err(GenError::Config(_))
        ));

        let mut cfg = small_config(1);
        cfg.cooccurrence_target[0][0] = 0.9;
        assert!(cfg.validate().is_err());

        let mut cfg = small_config(1);
        cfg.skill_arc_targets = vec![10, 10];
        assert!(cfg.validate().is_err());

        let mut cfg = small_config(1);
        cfg.triangle_closing_prob = 1.5;
        assert!(cfg.validate().is_err());

        let mut cfg = small_config(1);
        cfg.skill_arc_targets = vec![10_000, 10, 10];
        assert!(cfg.validate().is_err());
    }
}
