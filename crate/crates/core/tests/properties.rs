use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use dbcount_core::counter::{
    brute_force_count, combine_disjoint, count_models, s_relation, CspNegInstance,
    PartialAssignment, Relation,
};
use dbcount_core::formats::{
    decode_utf8, parse_cspneg, parse_dimacs, parse_input, read_decomposition, write_cspneg,
    write_decomposition, write_dimacs,
};
use dbcount_core::hypergraph::{EdgeId, Hypergraph};
use dbcount_core::testkit::{gen_db_instance, instance_hypergraph, GeneratorConfig};
use num_bigint::BigUint;
use proptest::prelude::*;

fn corpus(target: &str) -> Vec<(String, Vec<u8>)> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../fuzz/corpus")
        .join(target);
    let mut out: Vec<_> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|entry| {
            let p = entry.unwrap().path();
            (p.display().to_string(), fs::read(&p).unwrap())
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds in {}", dir.display());
    out
}

#[test]
fn corpus_seeds_are_accepted() {
    for (name, bytes) in corpus("parse_dimacs") {
        let parsed =
            parse_dimacs(decode_utf8(&bytes).unwrap()).unwrap_or_else(|e| panic!("{name}: {e}"));
        let inst = parsed.to_instance().unwrap();
        let again = parse_dimacs(&write_dimacs(&inst))
            .unwrap()
            .to_instance()
            .unwrap();
        assert_eq!(
            brute_force_count(&inst),
            brute_force_count(&again),
            "{name}"
        );
    }
    for (name, bytes) in corpus("parse_cspneg") {
        let parsed =
            parse_cspneg(decode_utf8(&bytes).unwrap()).unwrap_or_else(|e| panic!("{name}: {e}"));
        let inst = parsed.to_instance().unwrap();
        let again = parse_cspneg(&write_cspneg(&inst))
            .unwrap()
            .to_instance()
            .unwrap();
        assert_eq!(
            brute_force_count(&inst),
            brute_force_count(&again),
            "{name}"
        );
    }
    for (name, bytes) in corpus("read_decomposition") {
        let (h, d) = read_decomposition(decode_utf8(&bytes).unwrap())
            .unwrap_or_else(|e| panic!("{name}: {e}"));
        let (h2, d2) = read_decomposition(&write_decomposition(&d, &h).unwrap()).unwrap();
        assert_eq!((h, d), (h2, d2), "{name}");
    }
}

/// Text that looks enough like the input formats to get past the header.
fn near_format() -> impl Strategy<Value = String> {
    let token = prop_oneof![
        Just("p".to_string()),
        Just("cnf".to_string()),
        Just("cspneg".to_string()),
        Just("s".to_string()),
        Just("c".to_string()),
        Just("0".to_string()),
        Just("\n".to_string()),
        (-5i64..6).prop_map(|v| v.to_string()),
        "[ -~]{0,4}",
    ];
    prop::collection::vec(token, 0..40).prop_map(|ts| ts.join(" "))
}

fn instance(max_vars: usize) -> impl Strategy<Value = CspNegInstance> {
    (1..=max_vars).prop_flat_map(|n| {
        let relation = prop::collection::btree_set(0..n, 1..=n.min(3)).prop_flat_map(|scope| {
            let k = scope.len();
            let scope: Vec<usize> = scope.into_iter().collect();
            prop::collection::vec(prop::collection::vec(any::<bool>(), k), 0..=(1 << k))
                .prop_map(move |tuples| Relation::new(scope.clone(), tuples).unwrap())
        });
        prop::collection::vec(relation, 0..6)
            .prop_map(move |rs| CspNegInstance::new(n, rs).unwrap())
    })
}

fn assignments(vars: &[usize]) -> impl Iterator<Item = PartialAssignment> + '_ {
    (0u64..1 << vars.len()).map(move |bits| {
        vars.iter()
            .enumerate()
            .map(|(i, &v)| (v, bits >> i & 1 == 1))
            .collect()
    })
}

fn extends(r: &Relation, a: &PartialAssignment) -> bool {
    r.tuples()
        .iter()
        .any(|t| r.scope().iter().zip(t).all(|(&v, &b)| a.get(v) == Some(b)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn parsers_never_panic(bytes in prop::collection::vec(any::<u8>(), 0..200), text in near_format()) {
        if let Ok(t) = decode_utf8(&bytes) {
            let _ = parse_input(t);
            let _ = read_decomposition(t);
        }
        let _ = parse_dimacs(&text);
        let _ = parse_cspneg(&text);
        let _ = parse_input(&format!("p cnf 4 2\n{text}"));
        let _ = parse_input(&format!("p cspneg 4 2\n{text}"));
    }

    #[test]
    fn decomposition_json_round_trips(seed in any::<u64>(), edges in 1usize..12) {
        let cfg = GeneratorConfig { seed, edges, ..GeneratorConfig::default() };
        let (inst, d) = gen_db_instance(&cfg);
        let h = instance_hypergraph(&inst);
        let text = write_decomposition(&d, &h).unwrap();
        let (h2, d2) = read_decomposition(&text).unwrap();
        prop_assert_eq!(h, h2);
        prop_assert_eq!(d, d2);
    }

    #[test]
    fn remove_edges_is_order_independent(
        edges in prop::collection::btree_set(prop::collection::btree_set(0usize..8, 1..4), 1..8),
        picks in prop::collection::vec(any::<prop::sample::Index>(), 0..6),
    ) {
        let h = Hypergraph::new(edges.into_iter().map(|e| e.into_iter().collect::<Vec<_>>())).unwrap();
        let ids: Vec<EdgeId> = h.edge_ids().collect();
        let chosen: Vec<EdgeId> =
            picks.iter().map(|i| ids[i.index(ids.len())]).collect::<BTreeSet<_>>().into_iter().collect();
        let at_once = h.remove_edges(&chosen).unwrap();
        let mut forward = h.clone();
        for &e in &chosen {
            forward = forward.remove_edge(e).unwrap();
        }
        let mut backward = h.clone();
        for &e in chosen.iter().rev() {
            backward = backward.remove_edge(e).unwrap();
        }
        prop_assert_eq!(&at_once, &forward);
        prop_assert_eq!(&at_once, &backward);
    }

    #[test]
    fn combine_disjoint_matches_enumeration(
        n in 1usize..=12,
        part_of in prop::collection::vec(0usize..4, 12),
        tuple_bits in prop::collection::vec(any::<u16>(), 0..12),
        fixed in prop::collection::vec(prop::option::of(any::<bool>()), 12),
    ) {
        let x: Vec<usize> = (0..n).collect();
        // Part 3 is "outside": variables of x no disjunct mentions.
        let mut parts: Vec<Vec<usize>> = vec![Vec::new(); 3];
        for v in 0..n {
            if part_of[v] < 3 {
                parts[part_of[v]].push(v);
            }
        }
        parts.retain(|p| !p.is_empty());
        let relations: Vec<Relation> = parts
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let tuples = tuple_bits
                    .iter()
                    .skip(i)
                    .step_by(parts.len())
                    .map(|bits| (0..p.len()).map(|j| bits >> j & 1 == 1).collect())
                    .collect();
                Relation::new(p.clone(), tuples).unwrap()
            })
            .collect();
        let a: PartialAssignment =
            x.iter().filter_map(|&v| fixed[v].map(|b| (v, b))).collect();

        let counted: Vec<(Vec<usize>, BigUint)> = parts
            .iter()
            .zip(&relations)
            .map(|(p, r)| (p.clone(), s_relation(r, p, &a.restrict(p)).unwrap()))
            .collect();
        let got = combine_disjoint(&counted, &x, &a).unwrap();

        let want = assignments(&x)
            .filter(|b| b.is_consistent(&a) && relations.iter().any(|r| extends(r, b)))
            .count();
        prop_assert_eq!(got, BigUint::from(want));
    }

    #[test]
    fn s_relation_with_nothing_fixed(inst in instance(10), extra in 0usize..4) {
        for r in &inst.constraints {
            let mut x: Vec<usize> = r.scope().to_vec();
            x.extend(100..100 + extra);
            let got = s_relation(r, &x, &PartialAssignment::new()).unwrap();
            prop_assert_eq!(got, BigUint::from(r.len()) << extra);
        }
    }

    #[test]
    fn counts_are_bounded_and_anti_monotone(inst in instance(10)) {
        let total = brute_force_count(&inst).unwrap();
        prop_assert!(total <= BigUint::from(1u32) << inst.num_vars);
        if let Ok(n) = count_models(&inst) {
            prop_assert_eq!(&n, &total);
        }
        let mut fewer = inst.clone();
        while fewer.constraints.pop().is_some() {
            prop_assert!(brute_force_count(&fewer).unwrap() >= total);
        }
    }
}
