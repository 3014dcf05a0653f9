use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use endorank::config::{load_config, ConfigError, ExperimentConfig, MainSkill};
use endorank::deduction::{deduce, DeductionPlan};
use endorank::experiment::{
    ensure_dataset, generate_dataset, render_cooccurrence_csv, render_rank_csv, run_evaluate,
    write_dataset, write_evaluate_outputs, Dataset, ExperimentError,
};
use endorank::graph::{save_endorsement_digraph, SkillId};
use endorank::netgen::measure_cooccurrence;
use endorank::pagerank::pagerank;

const EXIT_NON_CONVERGENCE: u8 = 4;

/// Authority ranking for endorsement-bearing social networks.
#[derive(Parser)]
#[command(name = "endorank", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Experiment config: a JSON file or a bundled preset (table1, table2, toy).
    #[arg(long)]
    config: String,
    /// Overrides the config's generator seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the config's damping factor.
    #[arg(long)]
    alpha: Option<f64>,
    /// Output override: a directory for generate/evaluate, a file otherwise.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the synthetic dataset into the output directory.
    Generate {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Rank one skill's members and write scores with positions.
    Rank {
        #[command(flatten)]
        common: CommonArgs,
        /// Skill to rank: an index or a name.
        #[arg(long)]
        skill: String,
        /// Enrich the digraph with deduced endorsements before ranking.
        #[arg(long)]
        deduce: bool,
    },
    /// Run the full evaluation protocol and write report, rankings,
    /// histograms, and sweep tables.
    Evaluate {
        #[command(flatten)]
        common: CommonArgs,
        /// Restrict to one skill (index or name) instead of the config's
        /// selection.
        #[arg(long)]
        skill: Option<String>,
    },
    /// Write one skill's deduction-enriched endorsement digraph.
    Deduce {
        #[command(flatten)]
        common: CommonArgs,
        /// Main skill receiving deduced endorsements: an index or a name.
        #[arg(long)]
        skill: String,
    },
    /// Print the measured skill co-occurrence matrix.
    Cooccur {
        #[command(flatten)]
        common: CommonArgs,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn load(common: &CommonArgs) -> Result<ExperimentConfig, ExperimentError> {
    let mut cfg = load_config(&common.config)?;
    if let Some(seed) = common.seed {
        cfg.generator.seed = seed;
    }
    if let Some(alpha) = common.alpha {
        cfg.pagerank.alpha = alpha;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn single_skill(raw: &str, cfg: &ExperimentConfig) -> Result<SkillId, ExperimentError> {
    let resolved = MainSkill::parse(raw).resolve(&cfg.generator.skills)?;
    match resolved.as_slice() {
        [one] => Ok(*one),
        _ => Err(ConfigError::Invalid(format!(
            "{raw:?} does not name a single skill"
        ))
        .into()),
    }
}

fn dataset_for(cfg: &ExperimentConfig) -> Result<Dataset, ExperimentError> {
    ensure_dataset(&cfg.output_dir, &cfg.generator)
}

fn run(cli: Cli) -> Result<ExitCode, ExperimentError> {
    match cli.command {
        Command::Generate { common } => {
            let mut cfg = load(&common)?;
            if let Some(dir) = common.out {
                cfg.output_dir = dir;
            }
            let ds = generate_dataset(&cfg.generator)?;
            write_dataset(&cfg.output_dir, &ds)?;
            println!(
                "wrote dataset to {}: {} members, {} contact edges, {} skills",
                cfg.output_dir.display(),
                ds.base.n(),
                ds.base.edge_count(),
                ds.digraphs.len()
            );
            for (k, count) in ds.manifest.skill_arc_counts.iter().enumerate() {
                println!("  {}: {count} endorsements", cfg.generator.skills.name(k));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Rank {
            common,
            skill,
            deduce: with_deduction,
        } => {
            let cfg = load(&common)?;
            let skill = single_skill(&skill, &cfg)?;
            let ds = dataset_for(&cfg)?;
            let scores = if with_deduction {
                let plan = DeductionPlan::for_main(&cfg.deduction_matrix, skill)?;
                let enriched = deduce(&ds.digraphs, &cfg.deduction_matrix, &plan)?;
                pagerank(&enriched, &cfg.pagerank)?
            } else {
                pagerank(&ds.digraphs[skill], &cfg.pagerank)?
            };
            let path = common.out.unwrap_or_else(|| {
                let suffix = if with_deduction { "_deduced" } else { "" };
                cfg.output_dir.join(format!("rank_{skill}{suffix}.csv"))
            });
            std::fs::write(&path, render_rank_csv(&scores))?;
            println!("wrote {}", path.display());
            if !scores.converged {
                eprintln!(
                    "warning: power iteration stopped at residual {} after {} iterations",
                    scores.residual, scores.iterations_used
                );
                return Ok(ExitCode::from(EXIT_NON_CONVERGENCE));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Evaluate { common, skill } => {
            let mut cfg = load(&common)?;
            if let Some(raw) = skill {
                cfg.main_skill = MainSkill::parse(&raw);
                cfg.validate()?;
            }
            if let Some(dir) = common.out {
                cfg.output_dir = dir;
            }
            let ds = ensure_dataset(&cfg.output_dir, &cfg.generator)?;
            let out = run_evaluate(&cfg, &ds)?;
            let written = write_evaluate_outputs(&cfg.output_dir, &out)?;
            for eval in &out.evaluations {
                let r = &eval.report;
                let fmt2 = |v: Option<f64>| {
                    v.map(|x| format!("{x:.2}")).unwrap_or_else(|| "-".into())
                };
                let leader = match &r.leader {
                    Some(l) => format!(", leader {} -> {}", l.pos_without, l.pos_with),
                    None => String::new(),
                };
                println!(
                    "{}: rho {}, tau {}, ties {} -> {}{}",
                    r.skill_name,
                    fmt2(r.rho),
                    fmt2(r.tau),
                    r.ties_without,
                    r.ties_with,
                    leader
                );
            }
            println!("wrote {} files to {}", written.len(), cfg.output_dir.display());
            let stuck = out.non_converged();
            if !stuck.is_empty() {
                let names: Vec<&str> = stuck
                    .iter()
                    .map(|&k| cfg.generator.skills.name(k))
                    .collect();
                eprintln!(
                    "warning: power iteration did not converge for: {}",
                    names.join(", ")
                );
                return Ok(ExitCode::from(EXIT_NON_CONVERGENCE));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Deduce { common, skill } => {
            let cfg = load(&common)?;
            let skill = single_skill(&skill, &cfg)?;
            let ds = dataset_for(&cfg)?;
            let plan = DeductionPlan::for_main(&cfg.deduction_matrix, skill)?;
            let enriched = deduce(&ds.digraphs, &cfg.deduction_matrix, &plan)?;
            let path = common
                .out
                .unwrap_or_else(|| cfg.output_dir.join(format!("deduced_{skill}.txt")));
            save_endorsement_digraph(&path, &enriched)?;
            println!(
                "wrote {} ({} arcs, {} direct)",
                path.display(),
                enriched.arc_count(),
                ds.digraphs[skill].arc_count()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Cooccur { common } => {
            let cfg = load(&common)?;
            let ds = dataset_for(&cfg)?;
            let measured = measure_cooccurrence(&ds.digraphs);
            let names: Vec<&str> = cfg.generator.skills.iter().collect();
            let csv = render_cooccurrence_csv(&names, &measured);
            print!("{csv}");
            if let Some(path) = common.out {
                std::fs::write(&path, csv)?;
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}
