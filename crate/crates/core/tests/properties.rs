mod common;

use std::collections::{BTreeSet, HashMap};

use cocofuzz::ast::{list_blocks, parse, render, SourceUnit};
use cocofuzz::coverage::{
    jaccard_distance, new_neurons, scale_and_threshold, ActivationVector, NeuronId, NeuronSet,
    SyntheticOracle,
};
use cocofuzz::engine::{fuzz_corpus, random_at_k, FuzzConfig, Seed};
use cocofuzz::mutators::{applicable, apply, fresh_identifier, noise_fraction, OperatorId, Rng};
use cocofuzz::report::{campaign_stats, TestRow};
use cocofuzz::mutators::Location;
use proptest::prelude::*;

fn program() -> impl Strategy<Value = SourceUnit> {
    let fixtures = common::fixture_corpus();
    prop_oneof![
        (0..fixtures.len()).prop_map(move |i| fixtures[i].unit.clone()),
        any::<u64>().prop_map(|s| parse(&common::generated_method(s)).unwrap()),
    ]
}

fn operator() -> impl Strategy<Value = OperatorId> {
    (0usize..10).prop_map(|i| OperatorId::ALL[i])
}

fn multiset(unit: &SourceUnit) -> HashMap<(String, String), usize> {
    let mut m = HashMap::new();
    for t in unit.tokens() {
        *m.entry((format!("{:?}", t.kind), t.lexeme.clone())).or_insert(0) += 1;
    }
    m
}

fn is_subsequence(short: &SourceUnit, long: &SourceUnit) -> bool {
    let mut it = long.tokens().iter();
    short.tokens().iter().all(|t| it.any(|u| u == t))
}

fn neuron_set() -> impl Strategy<Value = NeuronSet> {
    proptest::collection::btree_set((0u32..3, 0u32..8), 0..20)
        .prop_map(|s| s.into_iter().map(|(l, p)| NeuronId(l, p)).collect())
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 128, ..ProptestConfig::default() })]

    #[test]
    fn render_round_trips_tokens(unit in program()) {
        let again = parse(&render(&unit)).unwrap();
        prop_assert_eq!(again.tokens(), unit.tokens());
        prop_assert!(!unit.tokens().is_empty());
    }

    #[test]
    fn spans_and_insertion_points_are_well_formed(unit in program()) {
        let len = unit.text().len();
        for s in unit.statements() {
            prop_assert!(s.span.start < s.span.end && s.span.end <= len);
        }
        for (i, a) in unit.statements().iter().enumerate() {
            for b in &unit.statements()[i + 1..] {
                if a.block.is_some() && a.block == b.block {
                    prop_assert!(a.span.end <= b.span.start, "siblings overlap");
                }
            }
        }
        for block in list_blocks(&unit) {
            for &p in &block.insertion_points {
                prop_assert!(block.span.start < p && p < block.span.end);
                prop_assert!(unit.text().is_char_boundary(p));
            }
        }
    }

    #[test]
    fn applicable_implies_apply_succeeds(unit in program(), op in operator(), seed in any::<u64>()) {
        let mut rng = Rng::new(seed);
        let result = apply(&unit, op, &mut rng);
        prop_assert_eq!(applicable(&unit, op), result.is_ok(), "{:?}", result.err());
    }

    #[test]
    fn apply_is_deterministic(unit in program(), op in operator(), seed in any::<u64>()) {
        let a = apply(&unit, op, &mut Rng::new(seed)).ok();
        let b = apply(&unit, op, &mut Rng::new(seed)).ok();
        prop_assert_eq!(a.map(|m| m.mutant.text().to_string()), b.map(|m| m.mutant.text().to_string()));
    }

    #[test]
    fn mutants_keep_the_original_code(unit in program(), op in operator(), seed in any::<u64>()) {
        prop_assume!(applicable(&unit, op));
        let m = apply(&unit, op, &mut Rng::new(seed)).unwrap();
        parse(m.mutant.text()).unwrap();
        if op == OperatorId::Op10 {
            prop_assert_eq!(m.mutant.tokens().len(), unit.tokens().len());
            let Location::Variable(old) = &m.location else { panic!("rename without variable") };
            let diffs: Vec<(String, String)> = unit.tokens().iter().zip(m.mutant.tokens())
                .filter(|(a, b)| a != b)
                .map(|(a, b)| (a.lexeme.clone(), b.lexeme.clone()))
                .collect();
            prop_assert!(!diffs.is_empty());
            let new = &diffs[0].1;
            prop_assert!(diffs.iter().all(|(a, b)| a == old && b == new));
            prop_assert_eq!(new.len(), 8);
        } else {
            prop_assert!(is_subsequence(&unit, &m.mutant));
            let before = multiset(&unit);
            let after = multiset(&m.mutant);
            for (k, n) in before {
                prop_assert!(after.get(&k).copied().unwrap_or(0) >= n);
            }
        }
    }

    #[test]
    fn dead_store_is_never_used(unit in program(), seed in any::<u64>()) {
        let m = apply(&unit, OperatorId::Op1, &mut Rng::new(seed)).unwrap();
        let fresh: Vec<&str> = m.mutant.tokens().iter()
            .map(|t| t.lexeme.as_str())
            .filter(|l| l.len() == 8 && !unit.text().contains(l))
            .collect();
        prop_assert_eq!(fresh.len(), 1);
        let local = m.mutant.locals().iter().find(|l| l.name == fresh[0]).unwrap();
        prop_assert!(local.usage_spans.is_empty());
    }

    #[test]
    fn dead_code_conditions_are_false(unit in program(), op in (4usize..9).prop_map(|i| OperatorId::ALL[i]), seed in any::<u64>()) {
        let m = apply(&unit, op, &mut Rng::new(seed)).unwrap();
        let toks: Vec<&str> = m.mutant.tokens().iter().map(|t| t.lexeme.as_str()).collect();
        let orig: Vec<&str> = unit.tokens().iter().map(|t| t.lexeme.as_str()).collect();
        let start = toks.iter().zip(&orig).position(|(a, b)| a != b).unwrap_or(orig.len());
        let window = &toks[start..];
        let nums: Vec<i64> = window.iter().take(16).filter_map(|l| l.parse().ok()).collect();
        match op {
            OperatorId::Op7 => prop_assert_ne!(nums[0], nums[1]),
            _ => prop_assert!(nums[0] >= nums[1], "{:?}", window),
        }
    }

    #[test]
    fn noise_fraction_bounds(unit in program(), op in operator(), seed in any::<u64>()) {
        prop_assert_eq!(noise_fraction(&unit, &unit), 0.0);
        if let Ok(m) = apply(&unit, op, &mut Rng::new(seed)) {
            let f = noise_fraction(&unit, &m.mutant);
            prop_assert!(f > 0.0 && f <= 1.0);
        }
    }

    #[test]
    fn fresh_identifiers(seed in any::<u64>(), taken in proptest::collection::btree_set("[a-z]{8}", 0..10)) {
        let name = fresh_identifier(&mut Rng::new(seed), &taken);
        prop_assert_eq!(name.len(), 8);
        prop_assert!(name.bytes().all(|b| b.is_ascii_lowercase()));
        prop_assert!(!taken.contains(&name));
    }

    #[test]
    fn scaling_absorbs_affine_maps(
        layers in proptest::collection::vec(proptest::collection::vec(-100.0f64..100.0, 1..12), 1..4),
        scale in 0.01f64..50.0,
        shift in -100.0f64..100.0,
        t in 0.0f64..1.0,
    ) {
        let raw = ActivationVector::new(layers.clone());
        let moved = ActivationVector::new(
            layers.iter().map(|l| l.iter().map(|v| v * scale + shift).collect()).collect(),
        );
        let a = scale_and_threshold(&raw, t);
        let b = scale_and_threshold(&moved, t);
        // Rounding may only flip neurons sitting on the threshold itself.
        for (l, layer) in layers.iter().enumerate() {
            let lo = layer.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = layer.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            for (p, v) in layer.iter().enumerate() {
                let id = NeuronId(l as u32, p as u32);
                let on_edge = hi > lo && (((v - lo) / (hi - lo)) - t).abs() < 1e-9;
                prop_assert!(on_edge || a.contains(id) == b.contains(id), "{:?}", id);
            }
        }
    }

    #[test]
    fn new_neuron_algebra(c in neuron_set(), b in neuron_set()) {
        let n = new_neurons(&c, &b);
        prop_assert!(n.is_disjoint(&b));
        prop_assert!(n.is_subset(&c));
    }

    #[test]
    fn jaccard_is_bounded_and_symmetric(a in neuron_set(), b in neuron_set()) {
        let d = jaccard_distance(&a, &b);
        prop_assert!((0.0..=1.0).contains(&d));
        prop_assert_eq!(d, jaccard_distance(&b, &a));
    }

    #[test]
    fn random_chain_shape(unit in program(), k in 1usize..6, seed in any::<u64>()) {
        let chain = random_at_k("p", &unit, k, &OperatorId::ALL, &Rng::new(seed)).unwrap();
        prop_assert_eq!(chain.iter().map(|o| o.generation).collect::<Vec<_>>(), (1..=k).collect::<Vec<_>>());
        let mut prev = 0.0;
        for o in &chain {
            let f = noise_fraction(&unit, &o.mutant);
            prop_assert!(f >= prev);
            prev = f;
        }
    }

    #[test]
    fn stats_ignore_row_order(rows in proptest::collection::vec((operator(), 0.0f64..1.0, 0.0f64..1.0, 1usize..50), 1..30), seed in any::<u64>()) {
        let rows: Vec<TestRow> = rows.into_iter().map(|(op, j, c, n)| TestRow {
            seed_id: "s".into(), generation: 1, operator: op, trace: vec![op],
            location: Location::Offset(0), new_neurons: n, new_vs_seed: n,
            jaccard: j, noise_fraction: j / 2.0, coverage_ratio: c,
        }).collect();
        let mut shuffled: Vec<&TestRow> = rows.iter().collect();
        let mut rng = Rng::new(seed);
        for i in (1..shuffled.len()).rev() {
            shuffled.swap(i, rng.below(i + 1));
        }
        let ordered: Vec<&TestRow> = rows.iter().collect();
        let a = campaign_stats(&ordered);
        prop_assert_eq!(&a, &campaign_stats(&shuffled));
        let total: f64 = a.operator_histogram.values().map(|h| h.fraction).sum();
        prop_assert!((total - 1.0).abs() < 1e-9);
        prop_assert_eq!(a.operator_histogram.values().map(|h| h.count).sum::<usize>(), rows.len());
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn guided_emissions_gain_neurons(unit in program(), master in any::<u64>(), max in 1usize..5) {
        let oracle = SyntheticOracle::new(&[24, 24], 9);
        let ops = OperatorId::ALL.to_vec();
        let cfg = FuzzConfig { max_mutations: max, master_seed: master, operator_set: ops.clone(), ..FuzzConfig::default() };
        let runs = fuzz_corpus(&[Seed { id: "p".into(), unit }], &oracle, &cfg, 1).unwrap();
        let run = &runs[0];
        prop_assert!(run.tests.len() <= max);
        prop_assert!(run.oracle_calls <= 1 + max * ops.len());
        let mut prev = run.seed.as_ref().unwrap().baseline_nc.clone();
        for (i, t) in run.tests.iter().enumerate() {
            prop_assert!(t.new_neuron_count >= 1);
            prop_assert_eq!(t.outcome.generation, i + 1);
            prop_assert_eq!(t.operator_trace.len(), t.outcome.generation);
            prop_assert!(prev.is_subset(&t.nc_after) && prev.len() < t.nc_after.len());
            prop_assert_eq!(new_neurons(&t.activated, &prev).len(), t.new_neuron_count);
            prev = t.nc_after.clone();
        }
    }
}

#[test]
fn jaccard_is_a_metric_on_five_elements() {
    let subsets: Vec<NeuronSet> = (1u32..32)
        .map(|mask| (0..5).filter(|b| mask & (1 << b) != 0).map(|b| NeuronId(0, b)).collect())
        .collect();
    for a in &subsets {
        assert_eq!(jaccard_distance(a, a), 0.0);
        for b in &subsets {
            let ab = jaccard_distance(a, b);
            assert_eq!(ab, jaccard_distance(b, a));
            assert!(a == b || ab > 0.0);
            for c in &subsets {
                assert!(ab <= jaccard_distance(a, c) + jaccard_distance(c, b) + 1e-12);
            }
        }
    }
}

#[test]
fn new_neurons_on_five_elements() {
    let all: Vec<NeuronSet> = (0u32..32)
        .map(|mask| (0..5).filter(|b| mask & (1 << b) != 0).map(|b| NeuronId(0, b)).collect())
        .collect();
    for c in &all {
        for b in &all {
            let n = new_neurons(c, b);
            let expected: BTreeSet<NeuronId> = c.iter().filter(|id| !b.contains(*id)).collect();
            assert_eq!(n.iter().collect::<BTreeSet<_>>(), expected);
            assert!(n.is_disjoint(b) && n.is_subset(c));
        }
    }
}
