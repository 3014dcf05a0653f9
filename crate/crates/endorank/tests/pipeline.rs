//! End-to-end behavior of the generate, deduce, rank pipeline on small
//! networks, checked through the library API rather than the CLI.

use endorank::deduction::{deduce, DeductionPlan, SkillDeductionMatrix};
use endorank::graph::{EndorsementDigraph, SkillSet};
use endorank::metrics::{count_ties, score_histogram, score_histogram_in_range, DEFAULT_TIE_TOLERANCE};
use endorank::netgen::{
    generate_base_network, generate_endorsements, inject_spam_alliance, phase_rng, spam_stream,
    AttachMode, GeneratorConfig, SpamAllianceConfig,
};
use endorank::pagerank::{pagerank, rank_positions, PageRankParams};

/// Two members each hold one direct endorsement for the main skill and tie.
/// One of them is also endorsed for a related skill, so deduction hands them
/// a fractional extra endorsement that breaks the tie in their favor.
#[test]
fn deduced_endorsements_break_a_direct_tie() {
    let main = EndorsementDigraph::new(6, &[(0, 2, 1.0), (1, 3, 1.0)]).unwrap();
    let related = EndorsementDigraph::new(6, &[(4, 2, 1.0)]).unwrap();
    let pi = SkillDeductionMatrix::new(vec![vec![1.0, 0.0], vec![0.8, 1.0]]).unwrap();
    let plan = DeductionPlan::for_main(&pi, 0).unwrap();
    let digraphs = [main.clone(), related];

    let enriched = deduce(&digraphs, &pi, &plan).unwrap();
    assert_eq!(enriched.arc_count(), 3);
    assert_eq!(enriched.weight(4, 2), Some(0.8));
    assert_eq!(enriched.weight(0, 2), Some(1.0), "direct arcs keep weight 1");

    let params = PageRankParams::default();
    let before = pagerank(&main, &params).unwrap();
    let after = pagerank(&enriched, &params).unwrap();
    assert!(before.converged && after.converged);

    let pos_before = rank_positions(&before);
    assert_eq!(pos_before[2], 1);
    assert_eq!(pos_before[3], 1, "equal endorsements rank as a tie");

    let pos_after = rank_positions(&after);
    assert_eq!(pos_after[2], 1);
    assert_eq!(pos_after[3], 2, "the deduced endorsement settles the order");

    let ties_before = count_ties(&before.scores, DEFAULT_TIE_TOLERANCE);
    let ties_after = count_ties(&after.scores, DEFAULT_TIE_TOLERANCE);
    assert_eq!(ties_before, 6, "both leaders plus the four unendorsed");
    assert_eq!(ties_after, 4, "only the unendorsed members still tie");
}

fn toy_generator(seed: u64) -> GeneratorConfig {
    GeneratorConfig {
        seed,
        n_target: 60,
        triangle_closing_prob: 0.15,
        skills: SkillSet::new(vec!["a".into(), "b".into(), "c".into()]),
        skill_arc_targets: vec![30, 24, 20],
        cooccurrence_target: vec![
            vec![1.0, 0.5, 0.4],
            vec![0.6, 1.0, 0.5],
            vec![0.5, 0.6, 1.0],
        ],
        cooccurrence_tolerance: 0.08,
    }
}

/// An alliance of two assistants lifts its leader into the top five of the
/// direct ranking on every random network. Deduction pushes the leader down
/// in most runs and clearly on average; at sixty members the deduced honest
/// mass cannot overtake the alliance every single time.
#[test]
fn alliance_reaches_the_top_and_deduction_usually_demotes_it() {
    let pi = SkillDeductionMatrix::new(vec![
        vec![1.0, 0.0, 0.0],
        vec![0.8, 1.0, 0.0],
        vec![0.8, 0.0, 1.0],
    ])
    .unwrap();
    let plan = DeductionPlan::for_main(&pi, 0).unwrap();
    let params = PageRankParams::default();
    let spam = SpamAllianceConfig {
        skill: 0,
        n_assistants: 2,
        attach_mode: AttachMode::Isolated,
    };

    let runs = 40;
    let mut reached_top = 0;
    let mut demoted = 0;
    let mut pairs = Vec::new();
    for seed in 0..runs {
        let cfg = toy_generator(seed);
        let base = generate_base_network(&cfg).unwrap();
        let digraphs = generate_endorsements(&base, &cfg).unwrap();

        let mut rng = phase_rng(seed, spam_stream(0, spam.n_assistants));
        let (spammed, leader) = inject_spam_alliance(&digraphs[0], &spam, &mut rng);
        let n = spammed.n();
        let instance: Vec<EndorsementDigraph> = digraphs
            .iter()
            .enumerate()
            .map(|(k, d)| if k == 0 { spammed.clone() } else { d.with_members(n) })
            .collect();

        let without = pagerank(&instance[0], &params).unwrap();
        let enriched = deduce(&instance, &pi, &plan).unwrap();
        let with_deduction = pagerank(&enriched, &params).unwrap();
        let pos_without = rank_positions(&without)[leader];
        let pos_with = rank_positions(&with_deduction)[leader];
        pairs.push((pos_without, pos_with));
        if pos_without <= 5 {
            reached_top += 1;
        }
        if pos_with > pos_without {
            demoted += 1;
        }
    }
    assert!(
        reached_top * 100 >= runs * 95,
        "leader reached the top five in only {reached_top} of {runs} runs: {pairs:?}"
    );
    assert!(
        demoted * 100 >= runs * 70,
        "leader demoted in only {demoted} of {runs} runs: {pairs:?}"
    );
    let total_without: usize = pairs.iter().map(|p| p.0).sum();
    let total_with: usize = pairs.iter().map(|p| p.1).sum();
    assert!(
        2 * total_with >= 3 * total_without,
        "positions barely moved: {total_without} -> {total_with}"
    );
}

#[test]
fn histogram_counts_cover_every_member() {
    let cfg = toy_generator(11);
    let base = generate_base_network(&cfg).unwrap();
    let digraphs = generate_endorsements(&base, &cfg).unwrap();
    let scores = pagerank(&digraphs[0], &PageRankParams::default())
        .unwrap()
        .scores;

    let bins = score_histogram(&scores, 20);
    assert_eq!(bins.len(), 20);
    assert_eq!(bins.iter().map(|b| b.count).sum::<usize>(), scores.len());
    let min = scores.iter().copied().fold(f64::INFINITY, f64::min);
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    assert_eq!(bins[0].low, min);
    assert_eq!(bins[19].high, max);
    for pair in bins.windows(2) {
        assert_eq!(pair[0].high, pair[1].low, "bins abut");
    }

    let mid_lo = min + (max - min) * 0.25;
    let mid_hi = min + (max - min) * 0.75;
    let clamped = score_histogram_in_range(&scores, 10, mid_lo, mid_hi);
    assert_eq!(
        clamped.iter().map(|b| b.count).sum::<usize>(),
        scores.len(),
        "out-of-range scores clamp into the edge bins"
    );
    assert!(clamped[0].count > 0 && clamped[9].count > 0);
}
