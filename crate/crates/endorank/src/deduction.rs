//! Endorsement deduction: enrich a main skill's digraph with weighted arcs
//! inferred from related skills.
//!
//! Possessing a related skill implies possessing the main skill with some
//! probability, recorded in the skill deduction matrix. An endorsement for a
//! related skill therefore counts as an endorsement for the main skill with
//! that probability, and several such signals for the same arc combine as the
//! union of independent events. Direct endorsements keep weight 1 and
//! saturated weights are left untouched.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{EndorsementDigraph, GraphError, SkillId, SkillSet};

#[derive(Debug, Error)]
pub enum DeductionError {
    #[error("skill deduction matrix {0}")]
    InvalidMatrix(String),
    #[error("deduction plan {0}")]
    InvalidPlan(String),
    #[error("digraph for skill {skill} has {got} members, expected {expected}")]
    MismatchedN {
        skill: SkillId,
        got: usize,
        expected: usize,
    },
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Pairwise skill-implication probabilities: entry (k, t) is the probability
/// that a member skilled in k is also skilled in t. The diagonal is 1 and the
/// matrix is generally asymmetric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct SkillDeductionMatrix {
    n: usize,
    values: Vec<f64>,
}

impl SkillDeductionMatrix {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self, DeductionError> {
        let n = rows.len();
        if n == 0 {
            return Err(DeductionError::InvalidMatrix("is empty".into()));
        }
        let mut values = Vec::with_capacity(n * n);
        for (k, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(DeductionError::InvalidMatrix(format!(
                    "row {k} has {} entries, expected {n}",
                    row.len()
                )));
            }
            for (t, &p) in row.iter().enumerate() {
                if !p.is_finite() || !(0.0..=1.0).contains(&p) {
                    return Err(DeductionError::InvalidMatrix(format!(
                        "entry ({k}, {t}) is {p}, must lie in [0, 1]"
                    )));
                }
                if k == t && p != 1.0 {
                    return Err(DeductionError::InvalidMatrix(format!(
                        "diagonal entry ({k}, {k}) is {p}, must be 1"
                    )));
                }
                values.push(p);
            }
        }
        Ok(SkillDeductionMatrix { n, values })
    }

    pub fn identity(n_skills: usize) -> Self {
        let mut values = vec![0.0; n_skills * n_skills];
        for k in 0..n_skills {
            values[k * n_skills + k] = 1.0;
        }
        SkillDeductionMatrix {
            n: n_skills,
            values,
        }
    }

    pub fn n_skills(&self) -> usize {
        self.n
    }

    /// Probability that skill `from` implies skill `to`.
    pub fn get(&self, from: SkillId, to: SkillId) -> f64 {
        self.values[from * self.n + to]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.values.chunks(self.n).map(|r| r.to_vec()).collect()
    }
}

impl TryFrom<Vec<Vec<f64>>> for SkillDeductionMatrix {
    type Error = DeductionError;
    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self, Self::Error> {
        SkillDeductionMatrix::new(rows)
    }
}

impl From<SkillDeductionMatrix> for Vec<Vec<f64>> {
    fn from(m: SkillDeductionMatrix) -> Self {
        m.rows()
    }
}

/// Which related skills feed the main skill, in fold order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeductionPlan {
    pub main: SkillId,
    pub related: Vec<SkillId>,
}

impl DeductionPlan {
    pub fn new(main: SkillId, related: Vec<SkillId>) -> Result<Self, DeductionError> {
        let plan = DeductionPlan { main, related };
        plan.check_shape()?;
        Ok(plan)
    }

    /// All skills that imply `main` with positive probability, ascending.
    pub fn for_main(pi: &SkillDeductionMatrix, main: SkillId) -> Result<Self, DeductionError> {
        if main >= pi.n_skills() {
            return Err(DeductionError::InvalidPlan(format!(
                "main skill {main} is outside the {} x {} matrix",
                pi.n_skills(),
                pi.n_skills()
            )));
        }
        let related = (0..pi.n_skills())
            .filter(|&k| k != main && pi.get(k, main) > 0.0)
            .collect();
        Ok(DeductionPlan { main, related })
    }

    fn check_shape(&self) -> Result<(), DeductionError> {
        let mut seen = vec![self.main];
        for &k in &self.related {
            if k == self.main {
                return Err(DeductionError::InvalidPlan(format!(
                    "lists the main skill {k} as related to itself"
                )));
            }
            if seen.contains(&k) {
                return Err(DeductionError::InvalidPlan(format!(
                    "lists skill {k} twice"
                )));
            }
            seen.push(k);
        }
        Ok(())
    }

    fn validate(
        &self,
        pi: &SkillDeductionMatrix,
        n_digraphs: usize,
    ) -> Result<(), DeductionError> {
        self.check_shape()?;
        let limit = pi.n_skills().min(n_digraphs);
        for &k in std::iter::once(&self.main).chain(&self.related) {
            if k >= limit {
                return Err(DeductionError::InvalidPlan(format!(
                    "references skill {k}, but only {limit} skills are available"
                )));
            }
        }
        for &k in &self.related {
            if pi.get(k, self.main) == 0.0 {
                return Err(DeductionError::InvalidPlan(format!(
                    "includes skill {k}, which does not imply skill {}",
                    self.main
                )));
            }
        }
        Ok(())
    }
}

/// Probability of the union of two independent events with probabilities
/// `existing` and `pi`. A saturated entry stays exactly 1, and a certain
/// event saturates exactly.
pub fn union_probability(existing: f64, pi: f64) -> f64 {
    debug_assert!((0.0..=1.0).contains(&existing));
    debug_assert!((0.0..=1.0).contains(&pi));
    if existing >= 1.0 || pi >= 1.0 {
        return 1.0;
    }
    (existing + pi * (1.0 - existing)).min(1.0)
}

/// Enriched weighted digraph for the plan's main skill.
///
/// Direct endorsements keep their weight; each related skill k then adds, per
/// arc of its digraph, an independent event of probability pi(k, main) times
/// the arc weight. Only arcs present in at least one input appear in the
/// output, and the result does not depend on the fold order.
pub fn deduce(
    digraphs: &[EndorsementDigraph],
    pi: &SkillDeductionMatrix,
    plan: &DeductionPlan,
) -> Result<EndorsementDigraph, DeductionError> {
    plan.validate(pi, digraphs.len())?;
    let main = &digraphs[plan.main];
    let n = main.n();
    for &k in &plan.related {
        if digraphs[k].n() != n {
            return Err(DeductionError::MismatchedN {
                skill: k,
                got: digraphs[k].n(),
                expected: n,
            });
        }
    }

    let mut arcs = Vec::new();
    let mut row: BTreeMap<usize, f64> = BTreeMap::new();
    for u in 0..n {
        row.clear();
        let (targets, weights) = main.out_neighbors(u);
        for (&v, &w) in targets.iter().zip(weights) {
            row.insert(v, w);
        }
        for &k in &plan.related {
            let p_skill = pi.get(k, plan.main);
            let (targets, weights) = digraphs[k].out_neighbors(u);
            for (&v, &w) in targets.iter().zip(weights) {
                let q = row.entry(v).or_insert(0.0);
                *q = union_probability(*q, p_skill * w);
            }
        }
        arcs.extend(row.iter().map(|(&v, &q)| (u, v, q)));
    }
    Ok(EndorsementDigraph::new(n, &arcs)?)
}

/// Outcome of checking the four deduction guarantees on one input set.
#[derive(Debug, Clone, PartialEq)]
pub struct Proposition1Report {
    /// (a) every weight lies in [0, 1] at every step.
    pub bounded: bool,
    /// (b) no weight ever decreases as related skills fold in.
    pub monotone: bool,
    /// (c) an arc is absent from the output iff absent from every input.
    pub zero_iff_all_zero: bool,
    /// (d) a weight is exactly 1 iff some input has the arc at weight 1 with
    /// an implication probability of 1.
    pub one_iff_certain: bool,
    /// First violation found, if any.
    pub counterexample: Option<String>,
}

impl Proposition1Report {
    pub fn all_pass(&self) -> bool {
        self.bounded && self.monotone && self.zero_iff_all_zero && self.one_iff_certain
    }
}

/// Checks properties (a) through (d) of the deduction recurrence over every
/// prefix of the plan, reporting the first counterexample found.
pub fn verify_proposition1(
    digraphs: &[EndorsementDigraph],
    pi: &SkillDeductionMatrix,
    plan: &DeductionPlan,
) -> Result<Proposition1Report, DeductionError> {
    let mut report = Proposition1Report {
        bounded: true,
        monotone: true,
        zero_iff_all_zero: true,
        one_iff_certain: true,
        counterexample: None,
    };
    let note = |flag: &mut bool, counterexample: &mut Option<String>, msg: String| {
        *flag = false;
        counterexample.get_or_insert(msg);
    };

    let mut steps = Vec::with_capacity(plan.related.len() + 1);
    for len in 0..=plan.related.len() {
        let prefix = DeductionPlan {
            main: plan.main,
            related: plan.related[..len].to_vec(),
        };
        steps.push(deduce(digraphs, pi, &prefix)?);
    }

    for q in &steps {
        for (u, v, w) in q.arcs() {
            if !(0.0..=1.0).contains(&w) {
                note(
                    &mut report.bounded,
                    &mut report.counterexample,
                    format!("weight of arc {u} -> {v} is {w}"),
                );
            }
        }
    }

    for (step, pair) in steps.windows(2).enumerate() {
        for (u, v, w_prev) in pair[0].arcs() {
            let w_next = pair[1].weight(u, v).unwrap_or(0.0);
            if w_next < w_prev {
                note(
                    &mut report.monotone,
                    &mut report.counterexample,
                    format!(
                        "arc {u} -> {v} fell from {w_prev} to {w_next} at fold step {}",
                        step + 1
                    ),
                );
            }
        }
    }

    let last = steps.last().expect("plan has at least the empty prefix");
    let inputs: Vec<SkillId> = std::iter::once(plan.main)
        .chain(plan.related.iter().copied())
        .collect();
    let n = last.n();
    for u in 0..n {
        for v in 0..n {
            if u == v {
                continue;
            }
            let q = last.weight(u, v);
            let endorsed = inputs.iter().any(|&k| digraphs[k].has_arc(u, v));
            if q.is_none() != !endorsed {
                note(
                    &mut report.zero_iff_all_zero,
                    &mut report.counterexample,
                    format!(
                        "arc {u} -> {v}: output {} but inputs {}",
                        if q.is_none() { "absent" } else { "present" },
                        if endorsed { "endorse it" } else { "do not" },
                    ),
                );
            }
            let certain = inputs.iter().any(|&k| {
                digraphs[k].weight(u, v) == Some(1.0) && pi.get(k, plan.main) == 1.0
            });
            if (q == Some(1.0)) != certain {
                note(
                    &mut report.one_iff_certain,
                    &mut report.counterexample,
                    format!(
                        "arc {u} -> {v}: weight {q:?} but a certain endorsement {}",
                        if certain { "exists" } else { "does not exist" },
                    ),
                );
            }
        }
    }
    Ok(report)
}

/// Writes the matrix as CSV: a header row of skill names, then one row of
/// probabilities per skill.
pub fn save_matrix_csv(
    path: impl AsRef<Path>,
    skills: &SkillSet,
    pi: &SkillDeductionMatrix,
) -> Result<(), DeductionError> {
    if skills.len() != pi.n_skills() {
        return Err(DeductionError::InvalidMatrix(format!(
            "has {} skills, name list has {}",
            pi.n_skills(),
            skills.len()
        )));
    }
    let mut out = String::new();
    out.push_str(&skills.iter().collect::<Vec<_>>().join(","));
    out.push('\n');
    for row in pi.rows() {
        let mut line = String::new();
        for (t, p) in row.iter().enumerate() {
            if t > 0 {
                line.push(',');
            }
            let _ = write!(line, "{p}");
        }
        out.push_str(&line);
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn load_matrix_csv(
    path: impl AsRef<Path>,
) -> Result<(SkillSet, SkillDeductionMatrix), DeductionError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    let name = path.display().to_string();
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    let (_, header) = lines.next().ok_or_else(|| DeductionError::Parse {
        path: name.clone(),
        line: 1,
        msg: "missing skill-name header".into(),
    })?;
    let skills: Vec<String> = header.split(',').map(|s| s.trim().to_string()).collect();
    let mut rows = Vec::with_capacity(skills.len());
    for (line_no, line) in lines {
        let row: Vec<f64> = line
            .split(',')
            .map(|field| {
                field.trim().parse::<f64>().map_err(|e| DeductionError::Parse {
                    path: name.clone(),
                    line: line_no,
                    msg: format!("bad probability {:?}: {e}", field.trim()),
                })
            })
            .collect::<Result<_, _>>()?;
        rows.push(row);
    }
    if rows.len() != skills.len() {
        return Err(DeductionError::Parse {
            path: name,
            line: text.lines().count(),
            msg: format!(
                "{} skills named but {} probability rows",
                skills.len(),
                rows.len()
            ),
        });
    }
    Ok((SkillSet::new(skills), SkillDeductionMatrix::new(rows)?))
}
