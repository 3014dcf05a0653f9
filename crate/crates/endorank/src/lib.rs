//! Authority ranking for endorsement-bearing social networks.
//!
//! Members of a network endorse one another per skill. This crate ranks the
//! members of each skill by weighted PageRank over the skill's endorsement
//! digraph, optionally enriched first with endorsements deduced from related
//! skills, and provides the synthetic network generator and rank-comparison
//! metrics used to evaluate the approach.

pub mod config;
pub mod deduction;
pub mod experiment;
pub mod graph;
pub mod metrics;
pub mod netgen;
pub mod pagerank;

pub use config::{load_config, ConfigError, ExperimentConfig, MainSkill, SpamSettings};
pub use deduction::{
    deduce, union_probability, verify_proposition1, DeductionError, DeductionPlan,
    Proposition1Report, SkillDeductionMatrix,
};
pub use experiment::{
    ensure_dataset, evaluate_skill, generate_dataset, load_dataset, run_evaluate, write_dataset,
    Dataset, DatasetManifest, EvaluateOutput, ExperimentError, SkillEvaluation,
};
pub use graph::{EndorsementDigraph, GraphError, MemberGraph, MemberId, SkillId, SkillSet};
pub use netgen::{
    generate_base_network, generate_endorsements, inject_spam_alliance, measure_cooccurrence,
    AttachMode, Cooccurrence, GenError, GeneratorConfig, SpamAllianceConfig,
};
pub use metrics::{
    count_ties, kendall_tau, leader_displacement, spearman_rho, tie_reduction_pct,
    ExperimentReport, HistogramBin, LeaderDisplacement, MetricsError, TieReductionBasis,
};
pub use pagerank::{pagerank, rank_positions, PageRankError, PageRankParams, RankVector};
