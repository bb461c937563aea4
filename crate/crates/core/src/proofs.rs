//! Executable constructions: lower-bound sequences and witness extractors.
//!
//! Every extractor re-validates its output with [`Witness::verify`] and
//! reports [`Error::InternalProofViolation`] instead of falling back when a
//! step of the construction does not go through.

use std::collections::BTreeMap;

use crate::algebra::{ModuleSpec, Scalar, Sequence};
use crate::checker::{find_subsequence, SubseqConstraint, Witness};
use crate::error::{Error, Result};
use crate::search::{is_free, ConstantKind};
use crate::weights::WeightConfig;

fn precondition<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::PreconditionViolated(msg.into()))
}

fn violation<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InternalProofViolation(msg.into()))
}

fn check_output(w: Witness, host: &Sequence, module: &ModuleSpec, cfg: &WeightConfig) -> Result<Witness> {
    match w.verify(host, module, cfg) {
        Ok(()) => Ok(w),
        Err(e) => violation(format!("constructed witness does not verify: {e}")),
    }
}

fn require_lower_bound_setting(cfg: &WeightConfig) -> Result<()> {
    if !cfg.has_b() {
        return precondition("the construction needs a B-set");
    }
    if !(cfg.a_in_units() || cfg.b_in_units()) {
        return precondition("needs A or B to consist of units");
    }
    Ok(())
}

fn free_or_empty(s: &Sequence, module: &ModuleSpec, cfg: &WeightConfig, kind: ConstantKind) -> Result<bool> {
    if s.is_empty() {
        return Ok(true);
    }
    is_free(s, module, cfg, kind)
}

/// `(0, x_1, 0, x_2, ..., 0, x_k, 0)` from a sequence with no `A`-weighted
/// zero-sum block of consecutive terms. The result has no `(A,B)`-weighted
/// one, so `C_{A,B} >= 2 C_A`.
pub fn build_interleaved(s_free: &Sequence, module: &ModuleSpec, cfg: &WeightConfig) -> Result<Sequence> {
    require_lower_bound_setting(cfg)?;
    if !free_or_empty(s_free, module, &cfg.classical(), ConstantKind::C)? {
        return Err(Error::InputNotFree(format!(
            "{s_free} has an A-weighted zero-sum block of consecutive terms"
        )));
    }
    let mut out = Sequence::default();
    out.push(module.zero());
    for x in s_free.iter() {
        out.push(x.clone());
        out.push(module.zero());
    }
    if !is_free(&out, module, cfg, ConstantKind::C)? {
        return violation(format!("interleaved sequence {out} is not free"));
    }
    Ok(out)
}

/// `(x_1, ..., x_k, 0)` from an `A`-weighted zero-sum free sequence; the
/// result is `(A,B)`-free, so `D_{A,B} >= D_A + 1`.
pub fn build_appended(s_free: &Sequence, module: &ModuleSpec, cfg: &WeightConfig) -> Result<Sequence> {
    require_lower_bound_setting(cfg)?;
    if !free_or_empty(s_free, module, &cfg.classical(), ConstantKind::D)? {
        return Err(Error::InputNotFree(format!(
            "{s_free} has an A-weighted zero-sum subsequence"
        )));
    }
    let mut out = s_free.clone();
    out.push(module.zero());
    if !is_free(&out, module, cfg, ConstantKind::D)? {
        return violation(format!("appended sequence {out} is not free"));
    }
    Ok(out)
}

/// Whether `C(2k, k) > 2^k`, in overflow-checked arithmetic.
///
/// This is false at `k = 1`, where both sides equal 2.
pub fn binom_exceeds(k: u32) -> Result<bool> {
    if k == 0 {
        return precondition("k must be at least 1");
    }
    let overflow = || Error::Overflow(format!("C(2k, k) or 2^k for k = {k}"));
    let mut c: u64 = 1;
    for i in 1..=k as u64 {
        // c = C(k + i - 1, i - 1) here, so the division is exact.
        c = c.checked_mul(k as u64 + i).ok_or_else(overflow)? / i;
    }
    let p = 1u64.checked_shl(k).ok_or_else(overflow)?;
    Ok(c > p)
}

/// `A = {1, -1}`, `B = {1}` over the module's ring.
pub fn plus_minus_config(module: &ModuleSpec) -> WeightConfig {
    WeightConfig::plus_minus_one(module.modulus()).with_b_one()
}

fn signed_rows(plus: &[usize], minus: &[usize], m: u32) -> Witness {
    let mut rows: Vec<(usize, u32)> = plus
        .iter()
        .map(|&i| (i, 1))
        .chain(minus.iter().map(|&i| (i, m - 1)))
        .collect();
    rows.sort_unstable();
    Witness {
        indices: rows.iter().map(|r| r.0).collect(),
        a_weights: rows.iter().map(|r| Scalar(r.1)).collect(),
        b_weights: Some(vec![Scalar(1); rows.len()]),
    }
}

/// For `|S| = 2k` with `2^k >= |M|` and `k >= 2`: two distinct `k`-subsets
/// with equal sums exist; dropping their common terms and signing one side
/// `+1`, the other `-1` gives a `({1,-1},{1})`-weighted zero-sum.
pub fn pigeonhole_witness(s: &Sequence, module: &ModuleSpec) -> Result<Witness> {
    if !s.len().is_multiple_of(2) {
        return precondition(format!("length {} is odd", s.len()));
    }
    let k = s.len() / 2;
    if k < 2 {
        return precondition("needs k >= 2");
    }
    if k < usize::BITS as usize && (1usize << k) < module.cardinality() {
        return precondition(format!("2^{k} < |M| = {}", module.cardinality()));
    }
    let xs = module.indices_of(s);
    let mut seen: Vec<Option<Vec<usize>>> = vec![None; module.cardinality()];
    let mut comb: Vec<usize> = (0..k).collect();
    let n = xs.len();
    loop {
        let sum = comb.iter().fold(0, |acc, &i| module.add_index(acc, xs[i]));
        match &seen[sum] {
            Some(first) => {
                let plus: Vec<usize> = first.iter().copied().filter(|i| !comb.contains(i)).collect();
                let minus: Vec<usize> = comb.iter().copied().filter(|i| !first.contains(i)).collect();
                let w = signed_rows(&plus, &minus, module.modulus());
                return check_output(w, s, module, &plus_minus_config(module));
            }
            None => seen[sum] = Some(comb.clone()),
        }
        // next k-combination of 0..n in lexicographic order
        let Some(p) = (0..k).rev().find(|&p| comb[p] < n - k + p) else {
            break;
        };
        comb[p] += 1;
        for q in p + 1..k {
            comb[q] = comb[q - 1] + 1;
        }
    }
    violation("no two k-subsets share a sum")
}

/// A `({1,-1},{1})`-weighted zero-sum subsequence of length exactly
/// `m_target` in any `S` with `|S| >= m_target - 2 + d`, where `d` is
/// `D_{A,1}(M)` and the ring has even characteristic.
///
/// Equal terms are paired first; if the pairs alone are too few, a maximal
/// weighted zero-sum subsequence of the unpaired terms is padded with pairs.
pub fn extract_even_length(
    s: &Sequence,
    module: &ModuleSpec,
    m_target: usize,
    d_a1: usize,
) -> Result<Witness> {
    if !module.modulus().is_multiple_of(2) {
        return precondition("ring characteristic must be even");
    }
    if m_target == 0 || !m_target.is_multiple_of(2) {
        return precondition(format!("target length {m_target} must be even and positive"));
    }
    if d_a1 == 0 || s.len() + 2 < m_target + d_a1 {
        return precondition(format!(
            "length {} is below {m_target} - 2 + {d_a1}",
            s.len()
        ));
    }
    let cfg = plus_minus_config(module);
    let m = module.modulus();

    let mut by_value: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, x) in module.indices_of(s).into_iter().enumerate() {
        by_value.entry(x).or_default().push(i);
    }
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    let mut rest: Vec<usize> = Vec::new();
    for positions in by_value.values() {
        for chunk in positions.chunks(2) {
            match chunk {
                [i, j] => pairs.push((*i, *j)),
                [i] => rest.push(*i),
                _ => unreachable!(),
            }
        }
    }
    pairs.sort_unstable();
    rest.sort_unstable();

    let pair_witness = |count: usize| {
        let plus: Vec<usize> = pairs[..count].iter().map(|p| p.0).collect();
        let minus: Vec<usize> = pairs[..count].iter().map(|p| p.1).collect();
        signed_rows(&plus, &minus, m)
    };

    if 2 * pairs.len() >= m_target {
        return check_output(pair_witness(m_target / 2), s, module, &cfg);
    }

    // Grow a weighted zero-sum subsequence of the unpaired terms until the
    // remainder is free.
    let mut chosen: Option<Witness> = None;
    loop {
        let used: Vec<usize> = chosen.as_ref().map_or(vec![], |w| w.indices.clone());
        let remaining: Vec<usize> = rest.iter().copied().filter(|i| !used.contains(i)).collect();
        if remaining.is_empty() {
            break;
        }
        let sub = s.subsequence(&remaining);
        match find_subsequence(&sub, module, &cfg, SubseqConstraint::AnyNonempty)? {
            Some(w) => {
                let w = w.remap(&remaining);
                chosen = Some(match chosen {
                    Some(c) => c.merge(&w),
                    None => w,
                });
            }
            None => break,
        }
    }
    let Some(core) = chosen else {
        return violation(format!(
            "{} unpaired terms but no weighted zero-sum among them",
            rest.len()
        ));
    };
    let l = core.len();
    if l % 2 != 0 {
        return violation(format!("maximal subsequence has odd length {l}"));
    }
    if l > m_target {
        return violation(format!(
            "maximal subsequence has length {l} > target {m_target}"
        ));
    }
    let need = (m_target - l) / 2;
    if need > pairs.len() {
        return violation(format!(
            "need {need} repeated pairs, only {} available",
            pairs.len()
        ));
    }
    let w = core.merge(&pair_witness(need));
    if w.len() != m_target {
        return violation(format!("witness has length {}, not {m_target}", w.len()));
    }
    check_output(w, s, module, &cfg)
}

/// Over `Z_2^r` with `A = B = {1}`: an even-length zero-sum subsequence in
/// any `S` with `|S| >= D(M) + 1`, where `d_classical = D(M)`.
///
/// Takes a zero-sum `T`, removes one of its terms and takes a zero-sum `T'`
/// of the rest; if both are odd their symmetric difference is even and
/// zero-sum.
pub fn extract_z2(s: &Sequence, module: &ModuleSpec, d_classical: usize) -> Result<Witness> {
    if module.modulus() != 2 {
        return precondition("module must be over Z_2");
    }
    if s.len() < d_classical + 1 {
        return precondition(format!(
            "length {} is below D(M) + 1 = {}",
            s.len(),
            d_classical + 1
        ));
    }
    let plain = WeightConfig::ones(2);
    let target = WeightConfig::ones(2).with_b_one();
    let as_target = |indices: Vec<usize>| Witness {
        a_weights: vec![Scalar(1); indices.len()],
        b_weights: Some(vec![Scalar(1); indices.len()]),
        indices,
    };

    let Some(t) = find_subsequence(s, module, &plain, SubseqConstraint::AnyNonempty)? else {
        return violation("no zero-sum subsequence in a sequence of length >= D(M)");
    };
    if t.len() % 2 == 0 {
        return check_output(as_target(t.indices), s, module, &target);
    }
    let dropped = t.indices[0];
    let keep: Vec<usize> = (0..s.len()).filter(|&i| i != dropped).collect();
    let Some(t2) = find_subsequence(&s.subsequence(&keep), module, &plain, SubseqConstraint::AnyNonempty)?
    else {
        return violation("no zero-sum subsequence after removing one term");
    };
    let t2 = t2.remap(&keep);
    if t2.len() % 2 == 0 {
        return check_output(as_target(t2.indices), s, module, &target);
    }
    let u: Vec<usize> = (0..s.len())
        .filter(|i| t.indices.contains(i) != t2.indices.contains(i))
        .collect();
    if u.is_empty() || !u.len().is_multiple_of(2) {
        return violation(format!("symmetric difference has length {}", u.len()));
    }
    check_output(as_target(u), s, module, &target)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interleaved_examples() {
        let z2 = ModuleSpec::cyclic(2).unwrap();
        let s = z2.sequence(&[1]).unwrap();
        let out = build_interleaved(&s, &z2, &WeightConfig::ones(2).with_b_one()).unwrap();
        assert_eq!(out, z2.sequence(&[0, 1, 0]).unwrap());

        let z4 = ModuleSpec::cyclic(4).unwrap();
        let cfg = plus_minus_config(&z4);
        let s = z4.sequence(&[2, 1, 2]).unwrap();
        let out = build_interleaved(&s, &z4, &cfg).unwrap();
        assert_eq!(out.len(), 2 * s.len() + 1);
        assert!(is_free(&out, &z4, &cfg, ConstantKind::C).unwrap());

        let not_free = z4.sequence(&[1, 1]).unwrap();
        assert!(matches!(
            build_interleaved(&not_free, &z4, &cfg),
            Err(Error::InputNotFree(_))
        ));
        assert!(matches!(
            build_interleaved(&s, &z4, &cfg.classical()),
            Err(Error::PreconditionViolated(_))
        ));
    }

    #[test]
    fn appended_examples() {
        let z4 = ModuleSpec::cyclic(4).unwrap();
        let cfg = plus_minus_config(&z4);
        let s = z4.sequence(&[1, 2]).unwrap();
        let out = build_appended(&s, &z4, &cfg).unwrap();
        assert_eq!(out, z4.sequence(&[1, 2, 0]).unwrap());

        let z2 = ModuleSpec::cyclic(2).unwrap();
        let out = build_appended(&z2.sequence(&[1]).unwrap(), &z2, &WeightConfig::ones(2).with_b_one()).unwrap();
        assert_eq!(out, z2.sequence(&[1, 0]).unwrap());

        assert!(matches!(
            build_appended(&z4.sequence(&[1, 3]).unwrap(), &z4, &cfg),
            Err(Error::InputNotFree(_))
        ));
    }

    #[test]
    fn binom_values() {
        assert!(!binom_exceeds(1).unwrap());
        assert!(binom_exceeds(2).unwrap());
        assert!(binom_exceeds(10).unwrap());
        assert!(matches!(binom_exceeds(0), Err(Error::PreconditionViolated(_))));
        assert!(matches!(binom_exceeds(40), Err(Error::Overflow(_))));
    }

    #[test]
    fn pigeonhole_repeated_and_preconditions() {
        let z8 = ModuleSpec::cyclic(8).unwrap();
        let s = z8.sequence(&[3, 3, 3, 3, 3, 3]).unwrap();
        let w = pigeonhole_witness(&s, &z8).unwrap();
        w.verify(&s, &z8, &plus_minus_config(&z8)).unwrap();
        assert_eq!(w.len(), 2);

        let short = z8.sequence(&[1, 2, 3, 4]).unwrap();
        assert!(matches!(pigeonhole_witness(&short, &z8), Err(Error::PreconditionViolated(_))));
        let z2 = ModuleSpec::cyclic(2).unwrap();
        assert!(matches!(
            pigeonhole_witness(&z2.sequence(&[0, 1]).unwrap(), &z2),
            Err(Error::PreconditionViolated(_))
        ));
        // k = 2 over Z_2: six 2-subsets, two sums.
        let s = z2.sequence(&[0, 1, 1, 0]).unwrap();
        let w = pigeonhole_witness(&s, &z2).unwrap();
        w.verify(&s, &z2, &plus_minus_config(&z2)).unwrap();
    }

    #[test]
    fn even_length_pairs_branch() {
        let z4 = ModuleSpec::cyclic(4).unwrap();
        let s = z4.sequence(&[1, 3, 1, 3, 2, 0]).unwrap();
        let w = extract_even_length(&s, &z4, 4, 4).unwrap();
        assert_eq!(w.indices, vec![0, 1, 2, 3]);
        assert_eq!(w.len() % 2, 0);
    }

    #[test]
    fn even_length_preconditions() {
        let z5 = ModuleSpec::cyclic(5).unwrap();
        let s = z5.sequence(&[0; 8]).unwrap();
        assert!(matches!(extract_even_length(&s, &z5, 4, 4), Err(Error::PreconditionViolated(_))));
        let z4 = ModuleSpec::cyclic(4).unwrap();
        let s = z4.sequence(&[0, 1, 2]).unwrap();
        assert!(matches!(extract_even_length(&s, &z4, 4, 4), Err(Error::PreconditionViolated(_))));
        assert!(matches!(extract_even_length(&s, &z4, 3, 1), Err(Error::PreconditionViolated(_))));
    }

    #[test]
    fn even_length_target_below_module_order() {
        // D_{A,1}(8) = 5 and (0,1,2,3,4) has distinct terms, so it has no
        // weighted zero-sum pair; the padding step cannot reach length 2.
        let z8 = ModuleSpec::cyclic(8).unwrap();
        let s = z8.sequence(&[0, 1, 2, 3, 4]).unwrap();
        assert!(matches!(
            extract_even_length(&s, &z8, 2, 5),
            Err(Error::InternalProofViolation(_))
        ));
    }

    #[test]
    fn z2_extractor_examples() {
        let v = ModuleSpec::new(2, 2).unwrap();
        let x = v.element(&[1, 0]).unwrap();
        let y = v.element(&[0, 1]).unwrap();
        let s = Sequence::new(vec![x.clone(), x.clone(), y.clone(), y]);
        let w = extract_z2(&s, &v, 3).unwrap();
        assert_eq!(w.len() % 2, 0);
        assert!(w.a_weights.iter().chain(w.b_weights.as_ref().unwrap()).all(|a| a.value() == 1));
        assert!(matches!(
            extract_z2(&s.subsequence(&[0, 1, 2]), &v, 3),
            Err(Error::PreconditionViolated(_))
        ));
    }
}
