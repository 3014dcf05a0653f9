//! Experiment configuration: one JSON document drives generation, ranking,
//! evaluation, and spam injection. Three presets bundle ready-to-run setups.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::deduction::SkillDeductionMatrix;
use crate::graph::{SkillId, SkillSet};
use crate::netgen::{AttachMode, GeneratorConfig};
use crate::pagerank::PageRankParams;

pub const PRESET_NAMES: [&str; 3] = ["table1", "table2", "toy"];

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config {0}")]
    Invalid(String),
    #[error("unknown skill {0:?}")]
    UnknownSkill(String),
    #[error("{path}: {source}")]
    Json {
        path: String,
        source: serde_json::Error,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Which skill(s) an evaluation covers: a single index, a skill name, or
/// every skill.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MainSkill {
    Index(SkillId),
    Named(String),
}

impl Default for MainSkill {
    fn default() -> Self {
        MainSkill::Named("all".into())
    }
}

impl fmt::Display for MainSkill {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MainSkill::Index(i) => write!(f, "{i}"),
            MainSkill::Named(s) => f.write_str(s),
        }
    }
}

impl MainSkill {
    /// Parses a command-line `--skill` value: an index, a skill name, or
    /// "all".
    pub fn parse(raw: &str) -> MainSkill {
        match raw.parse::<SkillId>() {
            Ok(i) => MainSkill::Index(i),
            Err(_) => MainSkill::Named(raw.to_string()),
        }
    }

    pub fn resolve(&self, skills: &SkillSet) -> Result<Vec<SkillId>, ConfigError> {
        match self {
            MainSkill::Index(i) => {
                if *i < skills.len() {
                    Ok(vec![*i])
                } else {
                    Err(ConfigError::Invalid(format!(
                        "references skill {i}, dataset has {}",
                        skills.len()
                    )))
                }
            }
            MainSkill::Named(name) if name == "all" => Ok((0..skills.len()).collect()),
            MainSkill::Named(name) => skills
                .index_of(name)
                .map(|i| vec![i])
                .ok_or_else(|| ConfigError::UnknownSkill(name.clone())),
        }
    }
}

/// Spam injection settings: either a fixed alliance size or a sweep over
/// sizes, applied per evaluated skill.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpamSettings {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_assistants: Option<usize>,
    /// Inclusive [min, max] range of alliance sizes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<[usize; 2]>,
    #[serde(default)]
    pub attach_mode: AttachMode,
}

impl SpamSettings {
    pub fn validate(&self) -> Result<(), ConfigError> {
        match (self.n_assistants, self.sweep) {
            (Some(n), None) => {
                if n == 0 {
                    Err(ConfigError::Invalid(
                        "spam alliance needs at least 1 assistant".into(),
                    ))
                } else {
                    Ok(())
                }
            }
            (None, Some([lo, hi])) => {
                if lo >= 1 && lo <= hi {
                    Ok(())
                } else {
                    Err(ConfigError::Invalid(format!(
                        "spam sweep [{lo}, {hi}] needs 1 <= min <= max"
                    )))
                }
            }
            _ => Err(ConfigError::Invalid(
                "spam settings need exactly one of n_assistants or sweep".into(),
            )),
        }
    }

    /// All alliance sizes this setting evaluates, smallest first.
    pub fn sizes(&self) -> Vec<usize> {
        match (self.n_assistants, self.sweep) {
            (Some(n), None) => vec![n],
            (None, Some([lo, hi])) => (lo..=hi).collect(),
            _ => Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub generator: GeneratorConfig,
    pub deduction_matrix: SkillDeductionMatrix,
    #[serde(default)]
    pub main_skill: MainSkill,
    #[serde(default)]
    pub pagerank: PageRankParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spam: Option<SpamSettings>,
    pub output_dir: PathBuf,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.generator
            .validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        if self.deduction_matrix.n_skills() != self.generator.skills.len() {
            return Err(ConfigError::Invalid(format!(
                "deduction matrix covers {} skills, generator defines {}",
                self.deduction_matrix.n_skills(),
                self.generator.skills.len()
            )));
        }
        self.main_skill.resolve(&self.generator.skills)?;
        let p = &self.pagerank;
        if !(p.alpha > 0.0 && p.alpha < 1.0) {
            return Err(ConfigError::Invalid(format!(
                "damping factor {} outside (0, 1)",
                p.alpha
            )));
        }
        if let Some(v) = &p.personalization {
            if v.len() != self.generator.n_target {
                return Err(ConfigError::Invalid(format!(
                    "personalization has {} entries, network has {}",
                    v.len(),
                    self.generator.n_target
                )));
            }
        }
        if let Some(spam) = &self.spam {
            spam.validate()?;
        }
        Ok(())
    }
}

/// Loads a config from a bundled preset name or a JSON file path.
pub fn load_config(spec: &str) -> Result<ExperimentConfig, ConfigError> {
    let (text, label) = match preset_text(spec) {
        Some(text) => (text.to_string(), format!("preset {spec}")),
        None => (
            fs::read_to_string(Path::new(spec))?,
            spec.to_string(),
        ),
    };
    let cfg: ExperimentConfig =
        serde_json::from_str(&text).map_err(|source| ConfigError::Json {
            path: label,
            source,
        })?;
    cfg.validate()?;
    Ok(cfg)
}

fn preset_text(name: &str) -> Option<&'static str> {
    match name {
        "table1" => Some(include_str!("presets/table1.json")),
        "table2" => Some(include_str!("presets/table2.json")),
        "toy" => Some(include_str!("presets/toy.json")),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_presets_parse_and_validate() {
        for name in PRESET_NAMES {
            let cfg = load_config(name).unwrap_or_else(|e| panic!("{name}: {e}"));
            assert_eq!(
                cfg.deduction_matrix.n_skills(),
                cfg.generator.skills.len()
            );
        }
    }

    #[test]
    fn table_presets_describe_the_five_skill_community() {
        let cfg = load_config("table1").unwrap();
        assert_eq!(cfg.generator.n_target, 1493);
        assert_eq!(
            cfg.generator.skill_arc_targets,
            vec![220, 140, 137, 134, 128]
        );
        assert_eq!(cfg.generator.skills.len(), 5);
        assert_eq!(cfg.spam.as_ref().unwrap().sizes(), (2..=8).collect::<Vec<_>>());

        let dense = load_config("table2").unwrap();
        assert_eq!(
            dense.generator.skill_arc_targets,
            vec![427, 1793, 1856, 1406, 1447]
        );
        assert_eq!(dense.spam.as_ref().unwrap().sizes(), vec![2]);
    }

    #[test]
    fn unknown_preset_falls_back_to_missing_file() {
        assert!(matches!(
            load_config("no-such-preset"),
            Err(ConfigError::Io(_))
        ));
    }

    #[test]
    fn config_files_load_from_disk() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("exp.json");
        let cfg = load_config("toy").unwrap();
        std::fs::write(&path, serde_json::to_string_pretty(&cfg).unwrap()).unwrap();
        let loaded = load_config(path.to_str().unwrap()).unwrap();
        assert_eq!(loaded, cfg);
    }

    #[test]
    fn main_skill_accepts_index_name_or_all() {
        let skills = SkillSet::new(vec!["a".into(), "b".into()]);
        assert_eq!(MainSkill::Index(1).resolve(&skills).unwrap(), vec![1]);
        assert_eq!(
            MainSkill::Named("b".into()).resolve(&skills).unwrap(),
            vec![1]
        );
        assert_eq!(
            MainSkill::default().resolve(&skills).unwrap(),
            vec![0, 1]
        );
        assert!(MainSkill::Index(2).resolve(&skills).is_err());
        assert!(MainSkill::Named("z".into()).resolve(&skills).is_err());
        assert_eq!(MainSkill::parse("1"), MainSkill::Index(1));
        assert_eq!(MainSkill::parse("b"), MainSkill::Named("b".into()));
    }

    #[test]
    fn spam_settings_need_exactly_one_mode() {
        let both = SpamSettings {
            n_assistants: Some(2),
            sweep: Some([2, 8]),
            attach_mode: AttachMode::Isolated,
        };
        assert!(both.validate().is_err());
        let neither = SpamSettings {
            n_assistants: None,
            sweep: None,
            attach_mode: AttachMode::Isolated,
        };
        assert!(neither.validate().is_err());
        let bad_sweep = SpamSettings {
            n_assistants: None,
            sweep: Some([0, 4]),
            attach_mode: AttachMode::Isolated,
        };
        assert!(bad_sweep.validate().is_err());
        let inverted = SpamSettings {
            n_assistants: None,
            sweep: Some([5, 3]),
            attach_mode: AttachMode::Isolated,
        };
        assert!(inverted.validate().is_err());
    }

    #[test]
    fn mismatched_matrix_dimension_is_rejected() {
        let mut cfg = load_config("toy").unwrap();
        cfg.deduction_matrix = SkillDeductionMatrix::identity(2);
        assert!(cfg.validate().is_err());
    }
}
