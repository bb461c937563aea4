//! Exhaustive reference for the checker: every qualifying index set, every
//! weight vector. Shares nothing with the DP beyond the input types.

use crate::algebra::{ModuleSpec, Scalar, Sequence};
use crate::checker::{SubseqConstraint, Witness};
use crate::error::{Error, Result};
use crate::weights::WeightConfig;

#[derive(Debug, Clone, Copy)]
pub struct OracleBudget {
    pub max_len: usize,
    pub max_vectors: u64,
}

impl Default for OracleBudget {
    fn default() -> Self {
        Self {
            max_len: 12,
            max_vectors: 10_000_000,
        }
    }
}

fn qualifies(mask: u32, k: usize, constraint: SubseqConstraint) -> bool {
    let t = mask.count_ones() as usize;
    match constraint {
        SubseqConstraint::AnyNonempty => t >= 1,
        SubseqConstraint::ExactLength(l) => t == l,
        SubseqConstraint::FullSequence => t == k,
        SubseqConstraint::ConsecutiveAnyNonempty => {
            t >= 1 && {
                let shifted = mask >> mask.trailing_zeros();
                shifted & (shifted + 1) == 0
            }
        }
    }
}

/// Number of weight vectors the enumeration would visit in the worst case.
pub fn oracle_cost(k: usize, cfg: &WeightConfig, constraint: SubseqConstraint) -> u64 {
    let per = (cfg.a_set().len() * cfg.b_set().map_or(1, |b| b.len())) as u64;
    let mut total: u64 = 0;
    for mask in 1u32..(1u32 << k) {
        if qualifies(mask, k, constraint) {
            total = total.saturating_add(per.saturating_pow(mask.count_ones()));
        }
    }
    total
}

pub fn brute_force_oracle(
    s: &Sequence,
    module: &ModuleSpec,
    cfg: &WeightConfig,
    constraint: SubseqConstraint,
    budget: OracleBudget,
) -> Result<Option<Witness>> {
    if s.is_empty() {
        return Err(Error::EmptySequence);
    }
    constraint.validate(s.len())?;
    if module.modulus() != cfg.modulus() {
        return Err(Error::ModulusMismatch {
            module: module.modulus(),
            config: cfg.modulus(),
        });
    }
    let k = s.len();
    if k > budget.max_len {
        return Err(Error::BudgetExceeded(format!(
            "length {k} exceeds oracle cap {}",
            budget.max_len
        )));
    }
    let cost = oracle_cost(k, cfg, constraint);
    if cost > budget.max_vectors {
        return Err(Error::BudgetExceeded(format!(
            "{cost} weight vectors exceed oracle budget {}",
            budget.max_vectors
        )));
    }

    let m = module.modulus() as u64;
    let r = module.rank() as usize;
    let a_set = cfg.a_set();
    let b_set: Vec<Option<u32>> = match cfg.b_set() {
        Some(b) => b.iter().map(|&x| Some(x)).collect(),
        None => vec![None],
    };
    let pairs: Vec<(u32, Option<u32>)> = a_set
        .iter()
        .flat_map(|&a| b_set.iter().map(move |&b| (a, b)))
        .collect();

    for mask in 1u32..(1u32 << k) {
        if !qualifies(mask, k, constraint) {
            continue;
        }
        let idx: Vec<usize> = (0..k).filter(|&i| mask >> i & 1 == 1).collect();
        let mut digits = vec![0usize; idx.len()];
        loop {
            let mut sum = vec![0u64; r];
            let mut ring = 0u64;
            for (d, &i) in digits.iter().zip(&idx) {
                let (a, b) = pairs[*d];
                for (acc, &c) in sum.iter_mut().zip(s.terms()[i].coords()) {
                    *acc = (*acc + a as u64 * c as u64) % m;
                }
                if let Some(b) = b {
                    ring = (ring + b as u64 * a as u64) % m;
                }
            }
            if ring == 0 && sum.iter().all(|&c| c == 0) {
                return Ok(Some(Witness {
                    indices: idx.clone(),
                    a_weights: digits.iter().map(|&d| Scalar(pairs[d].0)).collect(),
                    b_weights: cfg
                        .has_b()
                        .then(|| digits.iter().map(|&d| Scalar(pairs[d].1.unwrap())).collect()),
                }));
            }
            // odometer
            let mut pos = 0;
            loop {
                if pos == digits.len() {
                    break;
                }
                digits[pos] += 1;
                if digits[pos] < pairs.len() {
                    break;
                }
                digits[pos] = 0;
                pos += 1;
            }
            if pos == digits.len() {
                break;
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn remark_sequences_are_free() {
        for (n, vals) in [(4u32, vec![0, 1, 2]), (8, vec![0, 1, 2, 4]), (6, vec![0, 1, 2, 4])] {
            let z = ModuleSpec::cyclic(n).unwrap();
            let s = z.sequence(&vals).unwrap();
            let cfg = WeightConfig::plus_minus_one(n).with_b_one();
            let got =
                brute_force_oracle(&s, &z, &cfg, SubseqConstraint::AnyNonempty, OracleBudget::default())
                    .unwrap();
            assert!(got.is_none(), "{s} in Z_{n}");
        }
    }

    #[test]
    fn refuses_over_budget() {
        let z = ModuleSpec::cyclic(8).unwrap();
        let s = z.sequence(&[1; 13]).unwrap();
        let cfg = WeightConfig::plus_minus_one(8);
        assert!(matches!(
            brute_force_oracle(&s, &z, &cfg, SubseqConstraint::AnyNonempty, OracleBudget::default()),
            Err(Error::BudgetExceeded(_))
        ));
        let tight = OracleBudget {
            max_len: 12,
            max_vectors: 10,
        };
        let s = z.sequence(&[1; 4]).unwrap();
        assert!(matches!(
            brute_force_oracle(&s, &z, &cfg, SubseqConstraint::AnyNonempty, tight),
            Err(Error::BudgetExceeded(_))
        ));
    }

    #[test]
    fn consecutive_masks() {
        assert!(qualifies(0b0110, 4, SubseqConstraint::ConsecutiveAnyNonempty));
        assert!(!qualifies(0b0101, 4, SubseqConstraint::ConsecutiveAnyNonempty));
        assert!(qualifies(0b1000, 4, SubseqConstraint::ConsecutiveAnyNonempty));
        assert_eq!(oracle_cost(3, &WeightConfig::plus_minus_one(5), SubseqConstraint::AnyNonempty), 26);
    }
}
