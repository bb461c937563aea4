//! Exact computation of `D_{A,B}`, `C_{A,B}` and `E_{A,B}` as one plus the
//! maximum length of a free sequence.
//!
//! Freeness is hereditary (sub-multisets for D and E, contiguous pieces for
//! C), so the search is a depth-first extension over free sequences only:
//!
//! * D and E enumerate nondecreasing multisets. Each extension updates the
//!   reachable set by one DP layer and rejects the child as soon as the
//!   zero state appears.
//! * C enumerates ordered sequences and only tracks the windows ending at
//!   the newest term.
//!
//! Symmetries fix the first element. For multisets this relies on the
//! search order listing each symmetry orbit as one contiguous block that
//! starts with its representative: the least element of any image `g S`
//! then lies in the same block as the least element of `S`, and some `g`
//! maps it to the representative.

use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{ModuleSpec, Sequence};
use crate::bitset::StateSet;
use crate::checker::{find_subsequence, Kernel, Move, SubseqConstraint};
use crate::error::{Error, Result};
use crate::weights::WeightConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ConstantKind {
    D,
    C,
    E,
}

impl ConstantKind {
    pub const ALL: [ConstantKind; 3] = [ConstantKind::D, ConstantKind::C, ConstantKind::E];

    pub fn as_str(&self) -> &'static str {
        match self {
            ConstantKind::D => "D",
            ConstantKind::C => "C",
            ConstantKind::E => "E",
        }
    }

    /// D and E only see the multiset of terms.
    pub fn order_insensitive(&self) -> bool {
        !matches!(self, ConstantKind::C)
    }

    /// The subsequence constraint this constant quantifies over.
    pub fn constraint(&self, module: &ModuleSpec) -> SubseqConstraint {
        match self {
            ConstantKind::D => SubseqConstraint::AnyNonempty,
            ConstantKind::C => SubseqConstraint::ConsecutiveAnyNonempty,
            ConstantKind::E => SubseqConstraint::ExactLength(module.cardinality()),
        }
    }

    /// Upper bound on the constant for `M = Z_m^r`, where `|M|` is always a
    /// multiple of `m`: `D <= E <= 2|M| - 1` and `C <= |M|^2`.
    pub fn default_cap(&self, module: &ModuleSpec) -> usize {
        let n = module.cardinality();
        match self {
            ConstantKind::D | ConstantKind::E => 2 * n - 1,
            ConstantKind::C => n.saturating_mul(n),
        }
    }
}

impl fmt::Display for ConstantKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ConstantKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "D" | "d" => Ok(ConstantKind::D),
            "C" | "c" => Ok(ConstantKind::C),
            "E" | "e" => Ok(ConstantKind::E),
            other => Err(format!("unknown constant kind '{other}' (expected D, C or E)")),
        }
    }
}

/// True iff `s` has no weighted zero-sum subsequence of the kind's shape.
pub fn is_free(
    s: &Sequence,
    module: &ModuleSpec,
    cfg: &WeightConfig,
    kind: ConstantKind,
) -> Result<bool> {
    if s.is_empty() {
        return Err(Error::EmptySequence);
    }
    if kind == ConstantKind::E && s.len() < module.cardinality() {
        cfg.check_module(module)?;
        return Ok(true);
    }
    Ok(find_subsequence(s, module, cfg, kind.constraint(module))?.is_none())
}

#[derive(Debug, Clone)]
pub struct SearchOptions {
    /// Longest length explored; defaults to the kind's upper bound.
    pub cap: Option<usize>,
    pub symmetry: bool,
    pub max_nodes: Option<u64>,
    /// Depth at which the tree is cut into parallel work units.
    pub split_depth: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            cap: None,
            symmetry: true,
            max_nodes: None,
            split_depth: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchStats {
    pub nodes_explored: u64,
    pub symmetries_used: Vec<String>,
    pub exhaustive: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchOutcome {
    pub length: usize,
    pub witness: Sequence,
    pub exhaustive: bool,
    pub stats: SearchStats,
}

/// A computed constant with its lower-bound witness.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstantCertificate {
    pub kind: ConstantKind,
    pub module: ModuleSpec,
    pub config: WeightConfig,
    pub value: usize,
    pub extremal: Sequence,
    pub stats: SearchStats,
}

impl ConstantCertificate {
    /// Re-checks the lower bound independently of the search: the extremal
    /// sequence has length `value - 1` and is free.
    pub fn verify_lower_bound(&self) -> Result<()> {
        if self.extremal.len() + 1 != self.value {
            return Err(Error::InvalidWitness(format!(
                "extremal has length {}, expected {}",
                self.extremal.len(),
                self.value - 1
            )));
        }
        if self.extremal.is_empty() {
            return Ok(());
        }
        if !is_free(&self.extremal, &self.module, &self.config, self.kind)? {
            return Err(Error::InvalidWitness(format!(
                "extremal {} is not free",
                self.extremal
            )));
        }
        Ok(())
    }
}

trait Tracker: Clone + Send + Sync + Sized {
    fn push(&self, ctx: &Ctx<'_>, x: usize) -> Option<Self>;
}

struct Ctx<'a> {
    kernel: Kernel<'a>,
    moves: Vec<Vec<Move>>,
    /// Target length for E.
    target: usize,
}

/// Sums of nonempty sub-multisets.
#[derive(Clone)]
struct AnyTracker {
    reach: StateSet,
}

impl Tracker for AnyTracker {
    fn push(&self, ctx: &Ctx<'_>, x: usize) -> Option<Self> {
        let k = &ctx.kernel;
        let mvs = &ctx.moves[x];
        // Zero appears iff a move is zero or cancels a reachable state.
        if mvs
            .iter()
            .any(|mv| k.move_state(mv) == 0 || self.reach.contains(k.unapply(0, mv)))
        {
            return None;
        }
        let mut next = self.reach.clone();
        for mv in mvs {
            next.insert(k.move_state(mv));
        }
        for st in self.reach.ones() {
            for mv in mvs {
                next.insert(k.apply(st, mv));
            }
        }
        Some(Self { reach: next })
    }
}

/// Sums of sub-multisets by size, sizes above the target dropped.
#[derive(Clone)]
struct ExactTracker {
    reach: StateSet,
}

impl Tracker for ExactTracker {
    fn push(&self, ctx: &Ctx<'_>, x: usize) -> Option<Self> {
        let k = &ctx.kernel;
        let states = k.states;
        let mvs = &ctx.moves[x];
        let below = (ctx.target - 1) * states;
        if mvs
            .iter()
            .any(|mv| self.reach.contains(below + k.unapply(0, mv)))
        {
            return None;
        }
        let mut next = self.reach.clone();
        for c in (1..ctx.target).rev() {
            let base = (c - 1) * states;
            for idx in self.reach.ones_in(base, base + states) {
                for mv in mvs {
                    next.insert(c * states + k.apply(idx - base, mv));
                }
            }
        }
        Some(Self { reach: next })
    }
}

/// Sums of the windows ending at the last term.
#[derive(Clone)]
struct SuffixTracker {
    windows: StateSet,
}

impl Tracker for SuffixTracker {
    fn push(&self, ctx: &Ctx<'_>, x: usize) -> Option<Self> {
        let k = &ctx.kernel;
        let mvs = &ctx.moves[x];
        if mvs
            .iter()
            .any(|mv| k.move_state(mv) == 0 || self.windows.contains(k.unapply(0, mv)))
        {
            return None;
        }
        let mut next = StateSet::new(k.states);
        for mv in mvs {
            next.insert(k.move_state(mv));
        }
        for st in self.windows.ones() {
            for mv in mvs {
                next.insert(k.apply(st, mv));
            }
        }
        Some(Self { windows: next })
    }
}

/// Element order and admissible first elements.
struct Plan {
    order: Vec<usize>,
    roots: Vec<usize>,
    multiset: bool,
    symmetries: Vec<String>,
}

fn plan(module: &ModuleSpec, cfg: &WeightConfig, kind: ConstantKind, symmetry: bool) -> Plan {
    let n = module.cardinality();
    let multiset = kind.order_insensitive();
    if !symmetry {
        return Plan {
            order: (0..n).collect(),
            roots: (0..n).collect(),
            multiset,
            symmetries: vec![],
        };
    }
    if cfg.translation_valid() {
        // One orbit; its representative 0 already comes first.
        return Plan {
            order: (0..n).collect(),
            roots: vec![0],
            multiset,
            symmetries: vec!["translation".into()],
        };
    }
    let units = module.units();
    let mut placed = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut roots = Vec::new();
    for x in 0..n {
        if placed[x] {
            continue;
        }
        let mut orbit: Vec<usize> = units.iter().map(|&u| module.scale_index(u, x)).collect();
        orbit.sort_unstable();
        orbit.dedup();
        roots.push(order.len());
        for &y in &orbit {
            placed[y] = true;
            order.push(y);
        }
    }
    let symmetries = if units.len() > 1 {
        vec!["unit-scaling".into()]
    } else {
        vec![]
    };
    if multiset {
        Plan {
            order,
            roots,
            multiset,
            symmetries,
        }
    } else {
        // Ordered sequences: any first element maps to its representative.
        let roots = roots.into_iter().map(|p| order[p]).collect();
        Plan {
            order: (0..n).collect(),
            roots,
            multiset,
            symmetries,
        }
    }
}

#[derive(Default)]
struct Acc {
    nodes: u64,
    /// Positions in the search order.
    best: Vec<usize>,
    hit_cap: bool,
}

impl Acc {
    fn offer(&mut self, prefix: &[usize]) {
        if prefix.len() > self.best.len() {
            self.best = prefix.to_vec();
        }
    }

    fn absorb(&mut self, other: Acc) {
        self.nodes += other.nodes;
        self.hit_cap |= other.hit_cap;
        if other.best.len() > self.best.len()
            || (other.best.len() == self.best.len() && other.best < self.best)
        {
            self.best = other.best;
        }
    }
}

struct Budget {
    max: Option<u64>,
    used: AtomicU64,
    aborted: AtomicBool,
}

impl Budget {
    fn charge(&self) -> bool {
        let n = self.used.fetch_add(1, Ordering::Relaxed) + 1;
        if self.max.is_some_and(|max| n > max) {
            self.aborted.store(true, Ordering::Relaxed);
            return false;
        }
        !self.aborted.load(Ordering::Relaxed)
    }
}

struct Unit<T> {
    prefix: Vec<usize>,
    tracker: T,
    from: usize,
}

struct Walker<'a, 'c> {
    ctx: &'a Ctx<'c>,
    plan: &'a Plan,
    cap: usize,
    budget: &'a Budget,
}

impl Walker<'_, '_> {
    fn children(&self, from: usize) -> std::ops::Range<usize> {
        if self.plan.multiset {
            from..self.plan.order.len()
        } else {
            0..self.plan.order.len()
        }
    }

    /// Visits the node `prefix` (already known free) and its subtree.
    fn explore<T: Tracker>(&self, prefix: &mut Vec<usize>, tracker: &T, from: usize, acc: &mut Acc) {
        if !self.budget.charge() {
            return;
        }
        acc.nodes += 1;
        acc.offer(prefix);
        if prefix.len() >= self.cap {
            acc.hit_cap = true;
            return;
        }
        for pos in self.children(from) {
            if let Some(child) = tracker.push(self.ctx, self.plan.order[pos]) {
                prefix.push(pos);
                self.explore(prefix, &child, pos, acc);
                prefix.pop();
            }
        }
    }

    /// Visits nodes shallower than `depth`, collecting the free nodes at
    /// exactly `depth` as work units.
    fn split<T: Tracker>(
        &self,
        prefix: &mut Vec<usize>,
        tracker: &T,
        from: usize,
        depth: usize,
        acc: &mut Acc,
        units: &mut Vec<Unit<T>>,
    ) {
        if prefix.len() == depth {
            units.push(Unit {
                prefix: prefix.clone(),
                tracker: tracker.clone(),
                from,
            });
            return;
        }
        if !prefix.is_empty() {
            if !self.budget.charge() {
                return;
            }
            acc.nodes += 1;
            acc.offer(prefix);
            if prefix.len() >= self.cap {
                acc.hit_cap = true;
                return;
            }
        }
        // For ordered search the order is the identity, so roots double as
        // positions.
        let candidates: Vec<usize> = if prefix.is_empty() {
            self.plan.roots.clone()
        } else {
            self.children(from).collect()
        };
        for pos in candidates {
            if let Some(child) = tracker.push(self.ctx, self.plan.order[pos]) {
                prefix.push(pos);
                self.split(prefix, &child, pos, depth, acc, units);
                prefix.pop();
            }
        }
    }

    fn run<T: Tracker>(&self, root: T, split_depth: usize) -> Acc {
        let mut acc = Acc::default();
        let mut units = Vec::new();
        let depth = split_depth.clamp(1, self.cap);
        self.split(&mut Vec::new(), &root, 0, depth, &mut acc, &mut units);
        let parts: Vec<Acc> = units
            .into_par_iter()
            .map(|mut u| {
                let mut a = Acc::default();
                self.explore(&mut u.prefix, &u.tracker, u.from, &mut a);
                a
            })
            .collect();
        for p in parts {
            acc.absorb(p);
        }
        acc
    }
}

/// Longest free sequence of length at most `cap`.
///
/// `exhaustive` is true iff no free sequence of length `cap` exists, which
/// proves the returned length is the maximum.
pub fn max_free_length(
    module: &ModuleSpec,
    cfg: &WeightConfig,
    kind: ConstantKind,
    cap: usize,
    options: &SearchOptions,
) -> Result<SearchOutcome> {
    if cap == 0 {
        return Err(Error::CapTooSmall);
    }
    let kernel = Kernel::new(module, cfg)?;
    let n = module.cardinality();
    let moves = (0..n).map(|x| kernel.moves(x)).collect();
    let ctx = Ctx {
        kernel,
        moves,
        target: n,
    };
    let plan = plan(module, cfg, kind, options.symmetry);
    let budget = Budget {
        max: options.max_nodes,
        used: AtomicU64::new(0),
        aborted: AtomicBool::new(false),
    };
    let walker = Walker {
        ctx: &ctx,
        plan: &plan,
        cap,
        budget: &budget,
    };
    let states = kernel.states;
    let acc = match kind {
        ConstantKind::D => walker.run(
            AnyTracker {
                reach: StateSet::new(states),
            },
            options.split_depth,
        ),
        ConstantKind::C => walker.run(
            SuffixTracker {
                windows: StateSet::new(states),
            },
            options.split_depth,
        ),
        ConstantKind::E => {
            let mut reach = StateSet::new((n + 1) * states);
            reach.insert(0);
            walker.run(ExactTracker { reach }, options.split_depth)
        }
    };
    if budget.aborted.load(Ordering::Relaxed) {
        return Err(Error::NodeBudgetExceeded(options.max_nodes.unwrap_or(0)));
    }
    let elems: Vec<usize> = acc.best.iter().map(|&p| plan.order[p]).collect();
    let exhaustive = !acc.hit_cap;
    Ok(SearchOutcome {
        length: elems.len(),
        witness: module.sequence_from_indices(&elems),
        exhaustive,
        stats: SearchStats {
            nodes_explored: acc.nodes,
            symmetries_used: plan.symmetries.clone(),
            exhaustive,
        },
    })
}

/// Computes the constant as `1 + max free length`.
///
/// Returns [`Error::SearchIncomplete`] carrying the best lower bound when
/// the cap is reached.
pub fn compute_constant(
    module: &ModuleSpec,
    cfg: &WeightConfig,
    kind: ConstantKind,
    options: &SearchOptions,
) -> Result<ConstantCertificate> {
    let cap = options.cap.unwrap_or_else(|| kind.default_cap(module));
    let outcome = max_free_length(module, cfg, kind, cap, options)?;
    let extremal = module.canonical_form(&outcome.witness, cfg, kind.order_insensitive());
    let cert = ConstantCertificate {
        kind,
        module: *module,
        config: cfg.clone(),
        value: outcome.length + 1,
        extremal,
        stats: outcome.stats,
    };
    if !outcome.exhaustive {
        return Err(Error::SearchIncomplete(Box::new(cert)));
    }
    Ok(cert)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pm1b(m: u32) -> WeightConfig {
        WeightConfig::plus_minus_one(m).with_b_one()
    }

    fn value(m: u32, r: u32, cfg: &WeightConfig, kind: ConstantKind) -> usize {
        let module = ModuleSpec::new(m, r).unwrap();
        let cert = compute_constant(&module, cfg, kind, &SearchOptions::default()).unwrap();
        cert.verify_lower_bound().unwrap();
        cert.value
    }

    #[test]
    fn is_free_examples() {
        let z6 = ModuleSpec::cyclic(6).unwrap();
        let s = z6.sequence(&[0, 1, 2, 4]).unwrap();
        assert!(is_free(&s, &z6, &pm1b(6), ConstantKind::D).unwrap());
        for x in 0..6 {
            let s = z6.sequence(&[x, x]).unwrap();
            assert!(!is_free(&s, &z6, &pm1b(6), ConstantKind::D).unwrap());
        }
        let z4 = ModuleSpec::cyclic(4).unwrap();
        let s = z4.sequence(&[1, 2]).unwrap();
        assert!(is_free(&s, &z4, &WeightConfig::plus_minus_one(4), ConstantKind::D).unwrap());
        assert!(matches!(
            is_free(&Sequence::default(), &z4, &pm1b(4), ConstantKind::D),
            Err(Error::EmptySequence)
        ));
    }

    #[test]
    fn d_values_small() {
        assert_eq!(value(6, 1, &pm1b(6), ConstantKind::D), 5);
        assert_eq!(value(6, 1, &WeightConfig::plus_minus_one(6), ConstantKind::D), 3);
        assert_eq!(value(4, 1, &pm1b(4), ConstantKind::D), 4);
        assert_eq!(value(4, 1, &WeightConfig::plus_minus_one(4), ConstantKind::D), 3);
        for n in 2..=4u32 {
            let cfg = WeightConfig::ones(n).with_b_one();
            assert_eq!(value(n, 1, &cfg, ConstantKind::D), 2 * n as usize - 1);
        }
    }

    #[test]
    fn max_free_length_examples() {
        let z6 = ModuleSpec::cyclic(6).unwrap();
        let out = max_free_length(&z6, &pm1b(6), ConstantKind::D, 11, &SearchOptions::default()).unwrap();
        assert_eq!(out.length, 4);
        assert!(out.exhaustive);
        assert!(is_free(&out.witness, &z6, &pm1b(6), ConstantKind::D).unwrap());

        for r in 1..=3 {
            let v = ModuleSpec::new(2, r).unwrap();
            let cfg = WeightConfig::ones(2).with_b_one();
            let out = max_free_length(&v, &cfg, ConstantKind::D, 2 * v.cardinality() - 1, &SearchOptions::default())
                .unwrap();
            assert_eq!(out.length, r as usize + 1);
            assert!(out.exhaustive);
        }

        let z3 = ModuleSpec::cyclic(3).unwrap();
        let out = max_free_length(&z3, &pm1b(3), ConstantKind::E, 5, &SearchOptions::default()).unwrap();
        assert_eq!((out.length, out.exhaustive), (4, true));
    }

    #[test]
    fn cap_reached_is_not_exhaustive() {
        let z6 = ModuleSpec::cyclic(6).unwrap();
        let out = max_free_length(&z6, &pm1b(6), ConstantKind::D, 3, &SearchOptions::default()).unwrap();
        assert_eq!(out.length, 3);
        assert!(!out.exhaustive);
        let err = compute_constant(
            &z6,
            &pm1b(6),
            ConstantKind::D,
            &SearchOptions {
                cap: Some(3),
                ..Default::default()
            },
        )
        .unwrap_err();
        match err {
            Error::SearchIncomplete(cert) => {
                assert_eq!(cert.value, 4);
                assert!(!cert.stats.exhaustive);
            }
            other => panic!("unexpected {other}"),
        }
        assert!(matches!(
            max_free_length(&z6, &pm1b(6), ConstantKind::D, 0, &SearchOptions::default()),
            Err(Error::CapTooSmall)
        ));
    }

    #[test]
    fn node_budget_aborts() {
        let z6 = ModuleSpec::cyclic(6).unwrap();
        let opts = SearchOptions {
            max_nodes: Some(3),
            ..Default::default()
        };
        assert!(matches!(
            compute_constant(&z6, &pm1b(6), ConstantKind::D, &opts),
            Err(Error::NodeBudgetExceeded(3))
        ));
    }

    #[test]
    fn z2_plus_minus_matches_ones() {
        for kind in ConstantKind::ALL {
            assert_eq!(
                value(2, 1, &pm1b(2), kind),
                value(2, 1, &WeightConfig::ones(2).with_b_one(), kind)
            );
        }
    }

    #[test]
    fn remark_extremal_is_canonical() {
        let z6 = ModuleSpec::cyclic(6).unwrap();
        let cert = compute_constant(&z6, &pm1b(6), ConstantKind::D, &SearchOptions::default()).unwrap();
        assert_eq!(cert.extremal, z6.canonical_form(&cert.extremal, &pm1b(6), true));
        assert_eq!(cert.stats.symmetries_used, vec!["translation".to_string()]);
    }

    #[test]
    fn orbit_blocks_are_contiguous() {
        let z6 = ModuleSpec::cyclic(6).unwrap();
        let p = plan(&z6, &WeightConfig::plus_minus_one(6), ConstantKind::D, true);
        assert_eq!(p.order, vec![0, 1, 5, 2, 4, 3]);
        assert_eq!(p.roots, vec![0, 1, 3, 5]);
        let p = plan(&z6, &WeightConfig::plus_minus_one(6), ConstantKind::C, true);
        assert_eq!(p.roots, vec![0, 1, 2, 3]);
    }
}
