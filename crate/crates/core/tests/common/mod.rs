#![allow(dead_code)]

use proptest::prelude::*;
use wzs_core::oracle::oracle_cost;
use wzs_core::{ModuleSpec, Sequence, SubseqConstraint, WeightConfig};

#[derive(Debug, Clone)]
pub struct Instance {
    pub module: ModuleSpec,
    pub cfg: WeightConfig,
    pub seq: Sequence,
    pub constraint: SubseqConstraint,
}

/// Nonempty subset of `1..m`, drawn from a bitmask.
fn subset(m: u32, mask: u64) -> Vec<i64> {
    let picked: Vec<i64> = (1..m).filter(|v| mask >> v & 1 == 1).map(i64::from).collect();
    if picked.is_empty() {
        vec![1 + (mask % u64::from(m - 1)) as i64]
    } else {
        picked
    }
}

fn constraint_for(tag: u8, exact: usize, len: usize) -> SubseqConstraint {
    match tag % 4 {
        0 => SubseqConstraint::AnyNonempty,
        1 => SubseqConstraint::ExactLength(1 + exact % len),
        2 => SubseqConstraint::FullSequence,
        _ => SubseqConstraint::ConsecutiveAnyNonempty,
    }
}

/// m <= 8, r <= 2, |S| <= 8, random A and optional B. The sequence is cut
/// short when the brute-force enumeration would exceed `max_cost`.
pub fn instance(max_cost: u64) -> impl Strategy<Value = Instance> {
    (2u32..=8, 1u32..=2)
        .prop_flat_map(|(m, r)| {
            let card = (m as usize).pow(r);
            (
                Just(m),
                Just(r),
                any::<u64>(),
                prop::option::of(any::<u64>()),
                prop::collection::vec(0..card, 1..=8),
                any::<u8>(),
                any::<usize>(),
            )
        })
        .prop_map(move |(m, r, a_mask, b_mask, idx, tag, exact)| {
            let module = ModuleSpec::new(m, r).unwrap();
            let a = subset(m, a_mask);
            let b = b_mask.map(|mask| subset(m, mask));
            let cfg = WeightConfig::new(m, &a, b.as_deref()).unwrap();
            let mut len = idx.len();
            while len > 1 && oracle_cost(len, &cfg, constraint_for(tag, exact, len)) > max_cost {
                len -= 1;
            }
            Instance {
                seq: module.sequence_from_indices(&idx[..len]),
                constraint: constraint_for(tag, exact, len),
                module,
                cfg,
            }
        })
}
