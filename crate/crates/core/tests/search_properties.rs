use proptest::prelude::*;
use wzs_core::{
    brute_force_oracle, compute_constant, find_subsequence, is_free, ConstantKind, ModuleSpec,
    OracleBudget, SearchOptions, Sequence, SubseqConstraint, WeightConfig,
};

fn oracle_free(s: &Sequence, module: &ModuleSpec, cfg: &WeightConfig, kind: ConstantKind) -> bool {
    let constraint = match kind {
        ConstantKind::D => SubseqConstraint::AnyNonempty,
        ConstantKind::C => SubseqConstraint::ConsecutiveAnyNonempty,
        ConstantKind::E => {
            if s.len() < module.cardinality() {
                return true;
            }
            SubseqConstraint::ExactLength(module.cardinality())
        }
    };
    let budget = OracleBudget {
        max_len: 16,
        max_vectors: u64::MAX,
    };
    brute_force_oracle(s, module, cfg, constraint, budget)
        .unwrap()
        .is_none()
}

/// 1 + the longest free sequence, by plain DFS over extensions with the
/// brute-force oracle as the freeness test. No symmetry, no incremental state.
fn reference_constant(module: &ModuleSpec, cfg: &WeightConfig, kind: ConstantKind) -> usize {
    let n = module.cardinality();
    let mut best = 0;
    let mut stack: Vec<Vec<usize>> = vec![Vec::new()];
    while let Some(prefix) = stack.pop() {
        best = best.max(prefix.len());
        let start = if kind.order_insensitive() {
            prefix.last().copied().unwrap_or(0)
        } else {
            0
        };
        for x in start..n {
            let mut next = prefix.clone();
            next.push(x);
            if oracle_free(&module.sequence_from_indices(&next), module, cfg, kind) {
                stack.push(next);
            }
        }
    }
    best + 1
}

fn configs(m: u32) -> Vec<WeightConfig> {
    let mut v = vec![
        WeightConfig::plus_minus_one(m),
        WeightConfig::plus_minus_one(m).with_b_one(),
        WeightConfig::ones(m),
        WeightConfig::ones(m).with_b_one(),
    ];
    if m >= 4 {
        v.push(WeightConfig::new(m, &[1, 2], Some(&[1, m as i64 - 1])).unwrap());
    }
    v.dedup();
    v
}

#[test]
fn search_matches_reference_on_small_modules() {
    let modules = [
        ModuleSpec::cyclic(2).unwrap(),
        ModuleSpec::cyclic(3).unwrap(),
        ModuleSpec::cyclic(4).unwrap(),
        ModuleSpec::cyclic(5).unwrap(),
        ModuleSpec::new(2, 2).unwrap(),
    ];
    for module in &modules {
        for cfg in configs(module.modulus()) {
            for kind in ConstantKind::ALL {
                // C_{1,1}(n) = n^2 puts these beyond the ordered reference DFS.
                if kind == ConstantKind::C && cfg.a_set() == [1] && cfg.has_b() && module.cardinality() > 3 {
                    continue;
                }
                let got = compute_constant(module, &cfg, kind, &SearchOptions::default()).unwrap();
                let want = reference_constant(module, &cfg, kind);
                assert_eq!(got.value, want, "{kind} over {module} with {cfg}");
            }
        }
    }
}

#[test]
fn symmetry_reduction_does_not_change_values() {
    for m in 2..=6 {
        let module = ModuleSpec::cyclic(m).unwrap();
        for cfg in configs(m) {
            for kind in ConstantKind::ALL {
                if kind == ConstantKind::C && cfg.a_set() == [1] && cfg.has_b() && m > 3 {
                    continue;
                }
                let on = compute_constant(&module, &cfg, kind, &SearchOptions::default()).unwrap();
                let off = compute_constant(
                    &module,
                    &cfg,
                    kind,
                    &SearchOptions {
                        symmetry: false,
                        ..SearchOptions::default()
                    },
                )
                .unwrap();
                assert_eq!(on.value, off.value, "{kind} over Z_{m} with {cfg}");
                assert!(off.stats.symmetries_used.is_empty());
                assert!(on.stats.nodes_explored <= off.stats.nodes_explored);
            }
        }
    }
}

#[test]
fn extremal_sequences_are_free_and_hereditary() {
    for m in 2..=8 {
        let module = ModuleSpec::cyclic(m).unwrap();
        for cfg in configs(m) {
            for kind in [ConstantKind::D, ConstantKind::E] {
                let cert = compute_constant(&module, &cfg, kind, &SearchOptions::default()).unwrap();
                assert_eq!(cert.extremal.len(), cert.value - 1);
                cert.verify_lower_bound().unwrap();
                assert_eq!(cert.extremal, module.canonical_form(&cert.extremal, &cfg, true));
                if kind == ConstantKind::D {
                    for drop in 0..cert.extremal.len() {
                        let keep: Vec<usize> = (0..cert.extremal.len()).filter(|&i| i != drop).collect();
                        let sub = cert.extremal.subsequence(&keep);
                        if !sub.is_empty() {
                            assert!(is_free(&sub, &module, &cfg, kind).unwrap());
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn adding_b_never_lowers_a_constant() {
    for m in 2..=7 {
        let module = ModuleSpec::cyclic(m).unwrap();
        for kind in ConstantKind::ALL {
            let a = compute_constant(&module, &WeightConfig::plus_minus_one(m), kind, &SearchOptions::default())
                .unwrap();
            let ab = compute_constant(
                &module,
                &WeightConfig::plus_minus_one(m).with_b_one(),
                kind,
                &SearchOptions::default(),
            )
            .unwrap();
            assert!(a.value <= ab.value, "{kind} over Z_{m}: {} > {}", a.value, ab.value);
        }
    }
}

#[test]
fn smaller_caps_are_reported_incomplete() {
    let z6 = ModuleSpec::cyclic(6).unwrap();
    let cfg = WeightConfig::plus_minus_one(6).with_b_one();
    let err = compute_constant(
        &z6,
        &cfg,
        ConstantKind::D,
        &SearchOptions {
            cap: Some(3),
            ..SearchOptions::default()
        },
    )
    .unwrap_err();
    match err {
        wzs_core::Error::SearchIncomplete(cert) => assert_eq!(cert.value, 4),
        other => panic!("unexpected {other}"),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    /// With A = {1,-1} and B = {1} over an even modulus, the weights of a
    /// zero-sum sum to zero mod m, so its length is even.
    #[test]
    fn plus_minus_zero_sums_have_even_length(
        half in 1u32..=5,
        idx in prop::collection::vec(0usize..10, 1..=8),
    ) {
        let m = 2 * half;
        let module = ModuleSpec::cyclic(m).unwrap();
        let idx: Vec<usize> = idx.into_iter().map(|i| i % m as usize).collect();
        let s = module.sequence_from_indices(&idx);
        let cfg = WeightConfig::plus_minus_one(m).with_b_one();
        if let Some(w) = find_subsequence(&s, &module, &cfg, SubseqConstraint::AnyNonempty).unwrap() {
            prop_assert_eq!(w.len() % 2, 0);
        }
        if s.len() % 2 == 1 {
            prop_assert!(find_subsequence(&s, &module, &cfg, SubseqConstraint::FullSequence).unwrap().is_none());
        }
    }

    /// Appending a term can only create zero-sums.
    #[test]
    fn free_sequences_are_prefix_closed(
        m in 2u32..=8,
        idx in prop::collection::vec(0usize..8, 2..=7),
    ) {
        let module = ModuleSpec::cyclic(m).unwrap();
        let idx: Vec<usize> = idx.into_iter().map(|i| i % m as usize).collect();
        let cfg = WeightConfig::plus_minus_one(m).with_b_one();
        for kind in [ConstantKind::D, ConstantKind::C] {
            let full = is_free(&module.sequence_from_indices(&idx), &module, &cfg, kind).unwrap();
            let prefix = is_free(&module.sequence_from_indices(&idx[..idx.len() - 1]), &module, &cfg, kind).unwrap();
            prop_assert!(!full || prefix);
        }
    }
}
