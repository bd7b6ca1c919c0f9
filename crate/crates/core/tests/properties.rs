use concentratable::measures::{self, ce_distribution, ce_even_weight, ce_purity, CeResult};
use concentratable::oracle::random_unitary;
use concentratable::reductions::{purity, subsets_of, PurityTable};
use concentratable::statevector::parse_mask;
use concentratable::swaptest::{
    all_tested, bitstring, exact_distribution, ones_of, outcome_index, parse_bitstring, OutcomeDistribution,
    ShotHistogram,
};
use concentratable::verify::VerifyReport;
use concentratable::{purity_table, QubitSet, Statevector};
use proptest::prelude::*;
use proptest::sample::subsequence;

fn state_and_subset(max_n: usize) -> impl Strategy<Value = (Statevector, QubitSet)> {
    (1..=max_n, any::<u64>()).prop_flat_map(|(n, seed)| {
        (1..1u64 << n).prop_map(move |mask| {
            (
                Statevector::haar_random(n, seed).unwrap(),
                QubitSet::new(n, mask).unwrap(),
            )
        })
    })
}

fn permutation(n: usize) -> impl Strategy<Value = Vec<usize>> {
    Just((0..n).collect::<Vec<_>>()).prop_shuffle()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn routes_agree((psi, s) in state_and_subset(6)) {
        let p = ce_purity(&psi, s).unwrap().value;
        prop_assert!((p - ce_distribution(&psi, s).unwrap().value).abs() <= 1e-9);
        prop_assert!((p - ce_even_weight(&psi, s).unwrap().value).abs() <= 1e-9);
        prop_assert!(p >= -1e-12 && p <= 1.0 - 0.5f64.powi(s.cardinality() as i32) + 1e-12);
    }

    #[test]
    fn purity_complement_symmetry((psi, s) in state_and_subset(7)) {
        let a = purity(&psi, s).unwrap();
        let b = purity(&psi, s.complement()).unwrap();
        prop_assert!((a - b).abs() <= 1e-10);
        prop_assert!(a >= 0.5f64.powi(s.cardinality() as i32) - 1e-10 && a <= 1.0 + 1e-10);
    }

    #[test]
    fn global_phase_leaves_purity_unchanged((psi, s) in state_and_subset(6), theta in -10.0f64..10.0) {
        let rotated = psi.with_global_phase(theta);
        prop_assert!((purity(&psi, s).unwrap() - purity(&rotated, s).unwrap()).abs() <= 1e-14);
    }

    #[test]
    fn local_unitaries_leave_ce_unchanged((psi, s) in state_and_subset(5), qubit in 0usize..5, seed in any::<u64>()) {
        let qubit = qubit % psi.n_qubits();
        let u = random_unitary(seed);
        let rotated = Statevector::normalized(psi.apply_single_qubit(qubit, &u).unwrap()).unwrap();
        let before = ce_purity(&psi, s).unwrap().value;
        let after = ce_purity(&rotated, s).unwrap().value;
        prop_assert!((before - after).abs() <= 1e-10);
    }

    #[test]
    fn distribution_is_permutation_covariant(
        (n, seed, mask, perm) in (1usize..=5).prop_flat_map(|n| (Just(n), any::<u64>(), 1..1u64 << n, permutation(n)))
    ) {
        let psi = Statevector::haar_random(n, seed).unwrap();
        let tested = QubitSet::new(n, mask).unwrap();
        let moved = psi.permute_qubits(&perm).unwrap();
        let moved_tested = QubitSet::from_qubits(n, &tested.qubits().map(|k| perm[k]).collect::<Vec<_>>()).unwrap();
        let d = exact_distribution(&psi, &psi, tested).unwrap();
        let e = exact_distribution(&moved, &moved, moved_tested).unwrap();
        for z in 0..1usize << tested.cardinality() {
            let ones: Vec<usize> = ones_of(tested, z).qubits().map(|k| perm[k]).collect();
            let z2 = outcome_index(moved_tested, QubitSet::from_qubits(n, &ones).unwrap()).unwrap();
            prop_assert!((d.get(z) - e.get(z2)).abs() <= 1e-13, "z {z}: {} vs {}", d.get(z), e.get(z2));
        }
    }

    #[test]
    fn distributions_are_normalized(n in 1usize..=5, seeds in (any::<u64>(), any::<u64>()), mask in any::<u64>()) {
        let psi = Statevector::haar_random(n, seeds.0).unwrap();
        let phi = Statevector::haar_random(n, seeds.1).unwrap();
        let tested = QubitSet::new(n, (mask % ((1 << n) - 1)) + 1).unwrap();
        let d = exact_distribution(&psi, &phi, tested).unwrap();
        prop_assert!((d.total() - 1.0).abs() <= 1e-10);
        prop_assert!(d.probabilities().iter().all(|&p| p >= 0.0));
    }

    #[test]
    fn trace_distance_is_a_metric(n in 1usize..=4, seeds in (any::<u64>(), any::<u64>(), any::<u64>())) {
        let a = Statevector::haar_random(n, seeds.0).unwrap();
        let b = Statevector::haar_random(n, seeds.1).unwrap();
        let c = Statevector::haar_random(n, seeds.2).unwrap();
        let ab = a.trace_distance(&b).unwrap();
        prop_assert_eq!(ab, b.trace_distance(&a).unwrap());
        prop_assert!(ab <= a.trace_distance(&c).unwrap() + c.trace_distance(&b).unwrap() + 1e-12);
        prop_assert!((0.0..=1.0).contains(&ab));
    }

    #[test]
    fn perturb_hits_distance(n in 1usize..=5, seed in any::<u64>(), eps in 1e-6f64..=1.0) {
        let psi = Statevector::haar_random(n, seed).unwrap();
        let phi = psi.perturb(eps).unwrap();
        prop_assert!((psi.trace_distance(&phi).unwrap() - eps).abs() <= 1e-9);
    }

    #[test]
    fn submasks_are_enumerated_once(mask in 0u64..1 << 12) {
        let s = QubitSet::new(12, mask).unwrap();
        let mut seen: Vec<u64> = subsets_of(s).map(|a| a.mask()).collect();
        prop_assert_eq!(seen.len(), 1usize << s.cardinality());
        prop_assert!(seen.iter().all(|&a| a & !mask == 0));
        seen.sort_unstable();
        seen.dedup();
        prop_assert_eq!(seen.len(), 1usize << s.cardinality());
    }

    #[test]
    fn bitstrings_round_trip(width in 1usize..=14, z in any::<usize>()) {
        let z = z % (1 << width);
        prop_assert_eq!(parse_bitstring(&bitstring(z, width), width).unwrap(), z);
    }

    #[test]
    fn state_json_round_trips(n in 1usize..=6, seed in any::<u64>()) {
        let psi = Statevector::haar_random(n, seed).unwrap();
        prop_assert_eq!(Statevector::from_json_str(&psi.to_json()).unwrap(), psi);
    }

    #[test]
    fn table_and_outcome_json_round_trip((psi, s) in state_and_subset(5), seed in any::<u64>()) {
        let table = purity_table(&psi, s).unwrap();
        prop_assert_eq!(PurityTable::from_json_str(&table.to_json()).unwrap(), table);
        let d = exact_distribution(&psi, &psi, s).unwrap();
        prop_assert_eq!(OutcomeDistribution::from_json_str(&d.to_json()).unwrap(), d);
        let h = concentratable::sample(&psi, &psi, s, 50, seed).unwrap();
        prop_assert_eq!(ShotHistogram::from_json_str(&h.to_json()).unwrap(), h);
    }

    #[test]
    fn ce_results_round_trip((psi, s) in state_and_subset(5)) {
        let r = ce_purity(&psi, s).unwrap();
        prop_assert_eq!(CeResult::from_json_str(&r.to_json()).unwrap(), r.clone());
        let mut buf = Vec::new();
        measures::write_csv(std::slice::from_ref(&r), &mut buf).unwrap();
        let back = measures::read_csv(&buf[..]).unwrap();
        prop_assert_eq!(back[0].value, r.value);
        prop_assert_eq!(back[0].s, r.s);
    }

    #[test]
    fn full_register_outcomes_follow_amplitude_layout(n in 1usize..=6, picks in subsequence((0..6usize).collect::<Vec<_>>(), 0..=6)) {
        let tested = all_tested(n).unwrap();
        let ones: Vec<usize> = picks.into_iter().filter(|&k| k < n).collect();
        let set = QubitSet::from_qubits(n, &ones).unwrap();
        prop_assert_eq!(outcome_index(tested, set).unwrap(), set.index_mask());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn parsers_never_panic(text in ".{0,200}") {
        let _ = Statevector::from_json_str(&text);
        let _ = Statevector::from_json_slice(text.as_bytes());
        let _ = PurityTable::from_json_str(&text);
        let _ = OutcomeDistribution::from_json_str(&text);
        let _ = ShotHistogram::from_json_str(&text);
        let _ = CeResult::from_json_str(&text);
        let _ = VerifyReport::from_json_str(&text);
        let _ = measures::read_csv(text.as_bytes());
        let _ = measures::read_comparison_csv(text.as_bytes());
        let _ = parse_mask(&text);
        let _ = parse_bitstring(&text, 8);
    }

    #[test]
    fn structured_json_never_panics(
        n in 0usize..70,
        mask in any::<u64>(),
        values in proptest::collection::vec(-2.0f64..2.0, 0..10),
        z in "[01x]{0,70}",
    ) {
        let amplitudes: Vec<String> = values.iter().map(|v| format!("[{v},{}]", -v)).collect();
        let _ = Statevector::from_json_str(&format!(r#"{{"n":{n},"amplitudes":[{}]}}"#, amplitudes.join(",")));
        let entries: Vec<String> = values.iter().enumerate().map(|(i, v)| format!(r#"{{"mask":{},"purity":{v}}}"#, mask ^ i as u64)).collect();
        let _ = PurityTable::from_json_str(&format!(r#"{{"n":{n},"entries":[{}]}}"#, entries.join(",")));
        let outcome = format!(r#"{{"tested_mask":{mask},"n":{n},"entries":[{{"z":"{z}","p_or_count":{}}}]}}"#, values.first().copied().unwrap_or(1.0));
        let _ = OutcomeDistribution::from_json_str(&outcome);
        let _ = ShotHistogram::from_json_str(&outcome);
        let _ = CeResult::from_json_str(&format!(r#"{{"value":{},"n":{n},"mask":{mask},"method":"shots"}}"#, values.first().copied().unwrap_or(0.0)));
        let _ = measures::read_csv(format!("n,mask,cardinality,method,value,stderr\n{n},{mask},{},purity_sum,0.1,\n", mask.count_ones()).as_bytes());
    }
}
