//! Experiment orchestration: dataset persistence, the two-ranking evaluation
//! protocol with optional spam injection, and the CSV writers behind every
//! command.
//!
//! Skills evaluate in parallel but everything is written by one thread in
//! skill order, and each spam injection draws from its own random stream, so
//! outputs are byte-identical regardless of worker count.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{ConfigError, ExperimentConfig};
use crate::deduction::{deduce, DeductionError, DeductionPlan, SkillDeductionMatrix};
use crate::graph::{
    load_endorsement_digraph, load_member_graph, save_endorsement_digraph, save_member_graph,
    EndorsementDigraph, GraphError, MemberGraph, SkillId,
};
use crate::metrics::{
    count_ties, kendall_tau, leader_displacement, score_histogram_in_range, spearman_rho,
    tie_reduction_pct, ExperimentReport, LeaderDisplacement, TieReductionBasis,
    DEFAULT_TIE_TOLERANCE,
};
use crate::netgen::{
    generate_base_network, generate_endorsements, inject_spam_alliance, measure_cooccurrence,
    phase_rng, spam_stream, Cooccurrence, GenError, GeneratorConfig, SpamAllianceConfig,
};
use crate::pagerank::{pagerank, rank_positions, PageRankError, PageRankParams, RankVector};

pub const HISTOGRAM_BINS: usize = 20;
pub const MANIFEST_FILE: &str = "manifest.json";
pub const BASE_FILE: &str = "base.txt";
pub const REPORT_FILE: &str = "report.csv";
pub const SWEEP_FILE: &str = "sweep.csv";

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Gen(#[from] GenError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Deduction(#[from] DeductionError),
    #[error(transparent)]
    PageRank(#[from] PageRankError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("{path}: {source}")]
    Manifest {
        path: String,
        source: serde_json::Error,
    },
}

impl ExperimentError {
    /// Process exit code: 2 for config and input errors, 3 for infeasible
    /// generation targets.
    pub fn exit_code(&self) -> u8 {
        match self {
            ExperimentError::Gen(GenError::Infeasible { .. })
            | ExperimentError::Gen(GenError::ArcShortfall { .. }) => 3,
            _ => 2,
        }
    }
}

/// What `generate` records next to the data files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub generator: GeneratorConfig,
    pub achieved_cooccurrence: Cooccurrence,
    pub skill_arc_counts: Vec<usize>,
    pub base_edge_count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub manifest: DatasetManifest,
    pub base: MemberGraph,
    pub digraphs: Vec<EndorsementDigraph>,
}

pub fn skill_file(skill: SkillId) -> String {
    format!("skill_{skill}.txt")
}

pub fn generate_dataset(cfg: &GeneratorConfig) -> Result<Dataset, ExperimentError> {
    let base = generate_base_network(cfg)?;
    let digraphs = generate_endorsements(&base, cfg)?;
    let achieved = measure_cooccurrence(&digraphs);
    let manifest = DatasetManifest {
        generator: cfg.clone(),
        achieved_cooccurrence: achieved,
        skill_arc_counts: digraphs.iter().map(|d| d.arc_count()).collect(),
        base_edge_count: base.edge_count(),
    };
    Ok(Dataset {
        manifest,
        base,
        digraphs,
    })
}

pub fn write_dataset(dir: &Path, ds: &Dataset) -> Result<(), ExperimentError> {
    fs::create_dir_all(dir)?;
    save_member_graph(dir.join(BASE_FILE), &ds.base)?;
    for (k, d) in ds.digraphs.iter().enumerate() {
        save_endorsement_digraph(dir.join(skill_file(k)), d)?;
    }
    let json = serde_json::to_string_pretty(&ds.manifest).expect("manifest serializes");
    fs::write(dir.join(MANIFEST_FILE), json + "\n")?;
    Ok(())
}

pub fn load_dataset(dir: &Path) -> Result<Dataset, ExperimentError> {
    let manifest_path = dir.join(MANIFEST_FILE);
    let text = fs::read_to_string(&manifest_path)?;
    let manifest: DatasetManifest =
        serde_json::from_str(&text).map_err(|source| ExperimentError::Manifest {
            path: manifest_path.display().to_string(),
            source,
        })?;
    let base = load_member_graph(dir.join(BASE_FILE))?;
    let mut digraphs = Vec::with_capacity(manifest.generator.skills.len());
    for k in 0..manifest.generator.skills.len() {
        digraphs.push(load_endorsement_digraph(dir.join(skill_file(k)), base.n())?);
    }
    Ok(Dataset {
        manifest,
        base,
        digraphs,
    })
}

/// Loads the dataset in `dir` when its manifest matches the generator
/// config; otherwise generates it afresh and writes it there.
pub fn ensure_dataset(dir: &Path, cfg: &GeneratorConfig) -> Result<Dataset, ExperimentError> {
    if dir.join(MANIFEST_FILE).is_file() {
        if let Ok(ds) = load_dataset(dir) {
            if ds.manifest.generator == *cfg {
                return Ok(ds);
            }
        }
    }
    let ds = generate_dataset(cfg)?;
    write_dataset(dir, &ds)?;
    Ok(ds)
}

/// Leader displacement at one alliance size.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweepPoint {
    pub n_assistants: usize,
    pub leader: LeaderDisplacement,
}

/// Everything `evaluate` learns about one skill.
#[derive(Debug, Clone)]
pub struct SkillEvaluation {
    pub report: ExperimentReport,
    pub sweep: Vec<SweepPoint>,
    pub scores_without: RankVector,
    pub scores_with: RankVector,
}

impl SkillEvaluation {
    pub fn converged(&self) -> bool {
        self.scores_without.converged && self.scores_with.converged
    }
}

/// Ranks one skill with and without deduction. When a ranking instance is
/// given, its digraphs replace the dataset's (spam injection enlarges them).
fn rank_pair(
    digraphs: &[EndorsementDigraph],
    matrix: &SkillDeductionMatrix,
    skill: SkillId,
    params: &PageRankParams,
) -> Result<(RankVector, RankVector), ExperimentError> {
    let without = pagerank(&digraphs[skill], params)?;
    let plan = DeductionPlan::for_main(matrix, skill)?;
    let deduced = deduce(digraphs, matrix, &plan)?;
    let with_deduction = pagerank(&deduced, params)?;
    Ok((without, with_deduction))
}

/// Digraphs of the spammed instance: the alliance lands in `skill`'s digraph
/// and every other digraph grows to the enlarged member count.
fn spammed_instance(
    ds: &Dataset,
    skill: SkillId,
    n_assistants: usize,
    cfg: &ExperimentConfig,
) -> (Vec<EndorsementDigraph>, usize) {
    let spam_cfg = SpamAllianceConfig {
        skill,
        n_assistants,
        attach_mode: cfg.spam.as_ref().map(|s| s.attach_mode).unwrap_or_default(),
    };
    let mut rng = phase_rng(cfg.generator.seed, spam_stream(skill, n_assistants));
    let (spammed, leader) = inject_spam_alliance(&ds.digraphs[skill], &spam_cfg, &mut rng);
    let n = spammed.n();
    let digraphs: Vec<EndorsementDigraph> = ds
        .digraphs
        .iter()
        .enumerate()
        .map(|(k, d)| {
            if k == skill {
                spammed.clone()
            } else {
                d.with_members(n)
            }
        })
        .collect();
    (digraphs, leader)
}

/// Runs the full protocol for one skill: both rankings (on the spammed
/// instance when spam is configured, with the smallest alliance of a sweep),
/// rank correlations, tie counts, leader displacement, histograms, and the
/// remaining sweep points.
pub fn evaluate_skill(
    ds: &Dataset,
    cfg: &ExperimentConfig,
    skill: SkillId,
) -> Result<SkillEvaluation, ExperimentError> {
    let params = &cfg.pagerank;
    let matrix = &cfg.deduction_matrix;
    let sizes = cfg.spam.as_ref().map(|s| s.sizes()).unwrap_or_default();

    let (scores_without, scores_with, leader, mut sweep) = if sizes.is_empty() {
        let (a, b) = rank_pair(&ds.digraphs, matrix, skill, params)?;
        (a, b, None, Vec::new())
    } else {
        let (digraphs, leader) = spammed_instance(ds, skill, sizes[0], cfg);
        let (a, b) = rank_pair(&digraphs, matrix, skill, params)?;
        let first = SweepPoint {
            n_assistants: sizes[0],
            leader: leader_displacement(&a, &b, leader),
        };
        (a, b, Some(first.leader.clone()), vec![first])
    };
    for &n_assistants in sizes.iter().skip(1) {
        let (digraphs, leader) = spammed_instance(ds, skill, n_assistants, cfg);
        let (a, b) = rank_pair(&digraphs, matrix, skill, params)?;
        sweep.push(SweepPoint {
            n_assistants,
            leader: leader_displacement(&a, &b, leader),
        });
    }

    let n = scores_without.scores.len();
    let tol = DEFAULT_TIE_TOLERANCE;
    let ties_without = count_ties(&scores_without.scores, tol);
    let ties_with = count_ties(&scores_with.scores, tol);
    let low = lowest(&scores_without.scores).min(lowest(&scores_with.scores));
    let high = highest(&scores_without.scores).max(highest(&scores_with.scores));
    let report = ExperimentReport {
        skill,
        skill_name: cfg.generator.skills.name(skill).to_string(),
        n_members: n,
        n_endorsements: ds.digraphs[skill].arc_count(),
        rho: spearman_rho(&scores_without.scores, &scores_with.scores).ok(),
        tau: kendall_tau(&scores_without.scores, &scores_with.scores).ok(),
        ties_without,
        ties_with,
        tie_reduction_pct: tie_reduction_pct(
            ties_without,
            ties_with,
            n,
            TieReductionBasis::Members,
        ),
        leader,
        histogram_without: score_histogram_in_range(
            &scores_without.scores,
            HISTOGRAM_BINS,
            low,
            high,
        ),
        histogram_with: score_histogram_in_range(&scores_with.scores, HISTOGRAM_BINS, low, high),
    };
    Ok(SkillEvaluation {
        report,
        sweep,
        scores_without,
        scores_with,
    })
}

fn lowest(scores: &[f64]) -> f64 {
    scores.iter().copied().fold(f64::INFINITY, f64::min)
}

fn highest(scores: &[f64]) -> f64 {
    scores.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

#[derive(Debug)]
pub struct EvaluateOutput {
    pub skills: Vec<SkillId>,
    pub evaluations: Vec<SkillEvaluation>,
}

impl EvaluateOutput {
    pub fn non_converged(&self) -> Vec<SkillId> {
        self.skills
            .iter()
            .zip(&self.evaluations)
            .filter(|(_, e)| !e.converged())
            .map(|(&k, _)| k)
            .collect()
    }
}

/// Evaluates the configured skills in parallel and gathers results in skill
/// order.
pub fn run_evaluate(cfg: &ExperimentConfig, ds: &Dataset) -> Result<EvaluateOutput, ExperimentError> {
    let skills = cfg.main_skill.resolve(&cfg.generator.skills)?;
    let evaluations: Vec<SkillEvaluation> = skills
        .par_iter()
        .map(|&k| evaluate_skill(ds, cfg, k))
        .collect::<Result<_, _>>()?;
    Ok(EvaluateOutput {
        skills,
        evaluations,
    })
}

/// Writes every evaluate artifact into `dir`: the report table, per-skill
/// histograms and rankings, and the sweep table when one was run.
pub fn write_evaluate_outputs(
    dir: &Path,
    out: &EvaluateOutput,
) -> Result<Vec<PathBuf>, ExperimentError> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let report_path = dir.join(REPORT_FILE);
    let reports: Vec<&ExperimentReport> = out.evaluations.iter().map(|e| &e.report).collect();
    fs::write(&report_path, render_report_csv(&reports))?;
    written.push(report_path);

    for (k, eval) in out.skills.iter().zip(&out.evaluations) {
        let hist_path = dir.join(format!("histogram_{k}.csv"));
        fs::write(&hist_path, render_histogram_csv(&eval.report))?;
        written.push(hist_path);
        let without_path = dir.join(format!("rank_{k}_without.csv"));
        fs::write(&without_path, render_rank_csv(&eval.scores_without))?;
        written.push(without_path);
        let with_path = dir.join(format!("rank_{k}_with.csv"));
        fs::write(&with_path, render_rank_csv(&eval.scores_with))?;
        written.push(with_path);
    }

    if out.evaluations.iter().any(|e| e.sweep.len() > 1) {
        let sweep_path = dir.join(SWEEP_FILE);
        fs::write(&sweep_path, render_sweep_csv(out))?;
        written.push(sweep_path);
    }
    Ok(written)
}

/// Scores and competition positions, one row per member.
pub fn render_rank_csv(scores: &RankVector) -> String {
    let positions = rank_positions(scores);
    let mut out = String::from("member_index,score,position\n");
    for (i, (s, p)) in scores.scores.iter().zip(&positions).enumerate() {
        let _ = writeln!(out, "{i},{s},{p}");
    }
    out
}

/// The report table: one row per skill plus an AVG row, leader columns only
/// when spam ran.
pub fn render_report_csv(reports: &[&ExperimentReport]) -> String {
    let with_leader = reports.iter().any(|r| r.leader.is_some());
    let mut out = String::from(
        "skill,n_endorsements,rho,tau,ties_without,ties_with,tie_reduction_pct",
    );
    if with_leader {
        out.push_str(",leader_pos_without,leader_pos_with,leader_fall_pct");
    }
    out.push('\n');
    for r in reports {
        let _ = write!(
            out,
            "{},{},{},{},{},{},{}",
            r.skill_name,
            r.n_endorsements,
            r.rho.map(|v| v.to_string()).unwrap_or_default(),
            r.tau.map(|v| v.to_string()).unwrap_or_default(),
            r.ties_without,
            r.ties_with,
            r.tie_reduction_pct,
        );
        if with_leader {
            match &r.leader {
                Some(l) => {
                    let _ = write!(out, ",{},{},{}", l.pos_without, l.pos_with, l.fall_pct);
                }
                None => out.push_str(",,,"),
            }
        }
        out.push('\n');
    }
    if !reports.is_empty() {
        let reduction: Vec<f64> = reports.iter().map(|r| r.tie_reduction_pct as f64).collect();
        let _ = write!(out, "AVG,,,,,,{}", trim_float(mean(&reduction)));
        if with_leader {
            let falls: Vec<f64> = reports
                .iter()
                .filter_map(|r| r.leader.as_ref())
                .map(|l| l.fall_pct as f64)
                .collect();
            if falls.is_empty() {
                out.push_str(",,,");
            } else {
                let _ = write!(out, ",,,{}", trim_float(mean(&falls)));
            }
        }
        out.push('\n');
    }
    out
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

fn trim_float(v: f64) -> String {
    // one decimal, trailing zero trimmed, matching the table's "11.6%" style
    let s = format!("{v:.1}");
    s.strip_suffix(".0").unwrap_or(&s).to_string()
}

/// Shared-edge histograms of both rankings, one row per bin.
pub fn render_histogram_csv(report: &ExperimentReport) -> String {
    let mut out = String::from("bin_low,bin_high,count_without,count_with\n");
    for (a, b) in report.histogram_without.iter().zip(&report.histogram_with) {
        let _ = writeln!(out, "{},{},{},{}", a.low, a.high, a.count, b.count);
    }
    out
}

/// Leader displacement across alliance sizes: three columns per size.
pub fn render_sweep_csv(out: &EvaluateOutput) -> String {
    let sizes: Vec<usize> = out
        .evaluations
        .iter()
        .find(|e| !e.sweep.is_empty())
        .map(|e| e.sweep.iter().map(|p| p.n_assistants).collect())
        .unwrap_or_default();
    let mut text = String::from("skill");
    for a in &sizes {
        let _ = write!(
            text,
            ",leader_pos_without_{a},leader_pos_with_{a},leader_fall_pct_{a}"
        );
    }
    text.push('\n');
    for eval in &out.evaluations {
        text.push_str(&eval.report.skill_name);
        for point in &eval.sweep {
            let l = &point.leader;
            let _ = write!(text, ",{},{},{}", l.pos_without, l.pos_with, l.fall_pct);
        }
        text.push('\n');
    }
    text
}

/// The measured co-occurrence matrix as CSV: a skill-name header, then one
/// row per skill, with that skill's endorsed-member count appended.
pub fn render_cooccurrence_csv(skills: &[&str], c: &Cooccurrence) -> String {
    let mut out = String::from("skill");
    for name in skills {
        let _ = write!(out, ",{name}");
    }
    out.push_str(",endorsed_members\n");
    for (i, name) in skills.iter().enumerate() {
        let _ = write!(out, "{name}");
        for v in &c.values[i] {
            let _ = write!(out, ",{v}");
        }
        let _ = writeln!(out, ",{}", c.endorsed_counts[i]);
    }
    out
}
