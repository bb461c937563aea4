//! Decision kernel for weighted zero-sum (sub)sequences.
//!
//! Each term `x` may contribute one move `(a x, b a)` for `a` in `A`, `b`
//! in `B`; the second coordinate lives in `Z_m` and is dropped when `B` is
//! absent. A subsequence is a weighted zero-sum iff the joint state
//! `(0, 0)` is reachable using exactly its terms. The reachable sets are
//! computed layer by layer and a witness is recovered by walking the
//! layers backwards.

use serde::{Deserialize, Serialize};

use crate::algebra::{ModuleSpec, Scalar, Sequence};
use crate::bitset::StateSet;
use crate::error::{Error, Result};
use crate::weights::WeightConfig;

/// Which subsequences qualify.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SubseqConstraint {
    AnyNonempty,
    ExactLength(usize),
    FullSequence,
    ConsecutiveAnyNonempty,
}

impl SubseqConstraint {
    pub fn validate(&self, host_len: usize) -> Result<()> {
        match *self {
            SubseqConstraint::ExactLength(l) if l == 0 || l > host_len => Err(
                Error::BadConstraint(format!("exact length {l} outside 1..={host_len}")),
            ),
            _ => Ok(()),
        }
    }
}

/// Per-term weights certifying a weighted zero-sum.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub indices: Vec<usize>,
    pub a_weights: Vec<Scalar>,
    pub b_weights: Option<Vec<Scalar>>,
}

impl Witness {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Re-checks every witness invariant against `host` with plain modular
    /// arithmetic.
    pub fn verify(&self, host: &Sequence, module: &ModuleSpec, cfg: &WeightConfig) -> Result<()> {
        cfg.check_module(module)?;
        let bad = |msg: String| Err(Error::InvalidWitness(msg));
        if self.indices.is_empty() {
            return bad("no indices".into());
        }
        if self.indices.windows(2).any(|w| w[0] >= w[1]) {
            return bad("indices not strictly increasing".into());
        }
        if *self.indices.last().unwrap() >= host.len() {
            return bad("index out of range".into());
        }
        if self.a_weights.len() != self.indices.len() {
            return bad("a_weights length mismatch".into());
        }
        if let Some(a) = self.a_weights.iter().find(|a| !cfg.a_set().contains(&a.value())) {
            return bad(format!("a weight {} not in A", a.value()));
        }
        let m = module.modulus() as u64;
        let mut sum = vec![0u64; module.rank() as usize];
        for (&i, a) in self.indices.iter().zip(&self.a_weights) {
            module.check(&host.terms()[i])?;
            for (acc, &c) in sum.iter_mut().zip(host.terms()[i].coords()) {
                *acc = (*acc + a.value() as u64 * c as u64) % m;
            }
        }
        if sum.iter().any(|&c| c != 0) {
            return bad(format!("weighted sum is {sum:?}, not zero"));
        }
        match (cfg.b_set(), &self.b_weights) {
            (None, None) => Ok(()),
            (Some(b_set), Some(bw)) => {
                if bw.len() != self.indices.len() {
                    return bad("b_weights length mismatch".into());
                }
                if let Some(b) = bw.iter().find(|b| !b_set.contains(&b.value())) {
                    return bad(format!("b weight {} not in B", b.value()));
                }
                let s = bw
                    .iter()
                    .zip(&self.a_weights)
                    .fold(0u64, |acc, (b, a)| (acc + b.value() as u64 * a.value() as u64) % m);
                if s != 0 {
                    return bad(format!("sum of b_i a_i is {s}, not zero"));
                }
                Ok(())
            }
            (None, Some(_)) => bad("b_weights present but B is absent".into()),
            (Some(_), None) => bad("b_weights missing".into()),
        }
    }

    /// Shifts all indices by `offset` (for windows and sub-hosts).
    pub(crate) fn offset(mut self, offset: usize) -> Self {
        for i in &mut self.indices {
            *i += offset;
        }
        self
    }

    /// Re-targets indices through `map` (local position -> host position)
    /// and re-sorts.
    pub fn remap(&self, map: &[usize]) -> Self {
        let mut rows: Vec<(usize, Scalar, Option<Scalar>)> = self
            .indices
            .iter()
            .enumerate()
            .map(|(k, &i)| {
                (
                    map[i],
                    self.a_weights[k],
                    self.b_weights.as_ref().map(|b| b[k]),
                )
            })
            .collect();
        rows.sort_by_key(|r| r.0);
        Witness {
            indices: rows.iter().map(|r| r.0).collect(),
            a_weights: rows.iter().map(|r| r.1).collect(),
            b_weights: self
                .b_weights
                .as_ref()
                .map(|_| rows.iter().map(|r| r.2.unwrap()).collect()),
        }
    }

    /// Disjoint union of two witnesses on the same host.
    pub fn merge(&self, other: &Witness) -> Witness {
        let mut rows: Vec<(usize, Scalar, Option<Scalar>)> = Vec::new();
        for w in [self, other] {
            for (k, &i) in w.indices.iter().enumerate() {
                rows.push((i, w.a_weights[k], w.b_weights.as_ref().map(|b| b[k])));
            }
        }
        rows.sort_by_key(|r| r.0);
        Witness {
            indices: rows.iter().map(|r| r.0).collect(),
            a_weights: rows.iter().map(|r| r.1).collect(),
            b_weights: self
                .b_weights
                .as_ref()
                .map(|_| rows.iter().map(|r| r.2.unwrap()).collect()),
        }
    }
}

/// One admissible contribution of a term.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Move {
    pub a: u32,
    pub b: Option<u32>,
    /// Index of `a x` in the module.
    pub elem: usize,
    /// `b a` in `Z_m` (0 when `B` is absent).
    pub ring: usize,
}

/// Joint state space `M x Z_m` (or `M` alone without `B`).
#[derive(Debug, Clone, Copy)]
pub(crate) struct Kernel<'a> {
    pub module: &'a ModuleSpec,
    pub cfg: &'a WeightConfig,
    pub ring: usize,
    pub states: usize,
}

impl<'a> Kernel<'a> {
    pub fn new(module: &'a ModuleSpec, cfg: &'a WeightConfig) -> Result<Self> {
        cfg.check_module(module)?;
        let ring = if cfg.has_b() {
            module.modulus() as usize
        } else {
            1
        };
        Ok(Self {
            module,
            cfg,
            ring,
            states: module.cardinality() * ring,
        })
    }

    /// Distinct moves for the element with index `x`, first-seen weights kept.
    pub fn moves(&self, x: usize) -> Vec<Move> {
        let m = self.module.modulus() as u64;
        let mut out: Vec<Move> = Vec::new();
        for &a in self.cfg.a_set() {
            let elem = self.module.scale_index(a, x);
            let bs: Vec<Option<u32>> = match self.cfg.b_set() {
                Some(b) => b.iter().map(|&b| Some(b)).collect(),
                None => vec![None],
            };
            for b in bs {
                let ring = b.map_or(0, |b| ((b as u64 * a as u64) % m) as usize);
                if !out.iter().any(|mv| mv.elem == elem && mv.ring == ring) {
                    out.push(Move { a, b, elem, ring });
                }
            }
        }
        out
    }

    #[inline]
    pub fn apply(&self, state: usize, mv: &Move) -> usize {
        let (s, t) = (state / self.ring, state % self.ring);
        let s = self.module.add_index(s, mv.elem);
        let t = (t + mv.ring) % self.ring;
        s * self.ring + t
    }

    #[inline]
    pub fn unapply(&self, state: usize, mv: &Move) -> usize {
        let (s, t) = (state / self.ring, state % self.ring);
        let s = self.module.sub_index(s, mv.elem);
        let t = (t + self.ring - mv.ring % self.ring) % self.ring;
        s * self.ring + t
    }

    /// The state of a single move applied to zero.
    #[inline]
    pub fn move_state(&self, mv: &Move) -> usize {
        mv.elem * self.ring + mv.ring % self.ring
    }
}

#[derive(Debug, Clone, Copy)]
enum Counting {
    /// Every term is used; no count coordinate.
    Full,
    /// Count saturates at 1 (empty vs nonempty).
    Nonempty,
    /// Count runs 0..=L; larger counts are dropped.
    Exact(usize),
}

impl Counting {
    fn slots(self) -> usize {
        match self {
            Counting::Full => 1,
            Counting::Nonempty => 2,
            Counting::Exact(l) => l + 1,
        }
    }

    fn next(self, c: usize) -> Option<usize> {
        match self {
            Counting::Full => Some(0),
            Counting::Nonempty => Some(1),
            Counting::Exact(l) => (c < l).then_some(c + 1),
        }
    }

    fn target(self) -> usize {
        match self {
            Counting::Full => 0,
            Counting::Nonempty => 1,
            Counting::Exact(l) => l,
        }
    }

    /// Counts that step to `c` when a term is taken, in preference order.
    fn prev(self, c: usize) -> Vec<usize> {
        match self {
            Counting::Full => vec![0],
            Counting::Nonempty if c == 1 => vec![1, 0],
            Counting::Nonempty => vec![],
            Counting::Exact(_) => c.checked_sub(1).into_iter().collect(),
        }
    }

    fn allows_skip(self) -> bool {
        !matches!(self, Counting::Full)
    }
}

fn run_layers(kernel: &Kernel<'_>, xs: &[usize], counting: Counting) -> Option<Witness> {
    let states = kernel.states;
    let slots = counting.slots();
    let moves: Vec<Vec<Move>> = xs.iter().map(|&x| kernel.moves(x)).collect();

    let mut layers = Vec::with_capacity(xs.len() + 1);
    let mut first = StateSet::new(slots * states);
    first.insert(0);
    layers.push(first);
    for mvs in &moves {
        let prev = layers.last().unwrap();
        let mut next = if counting.allows_skip() {
            prev.clone()
        } else {
            StateSet::new(slots * states)
        };
        for idx in prev.ones() {
            let (c, st) = (idx / states, idx % states);
            if let Some(nc) = counting.next(c) {
                for mv in mvs {
                    next.insert(nc * states + kernel.apply(st, mv));
                }
            }
        }
        layers.push(next);
    }

    let target = counting.target() * states;
    if !layers.last().unwrap().contains(target) {
        return None;
    }

    let mut cur = target;
    let mut picks: Vec<(usize, Move)> = Vec::new();
    for i in (0..xs.len()).rev() {
        let prev = &layers[i];
        if counting.allows_skip() && prev.contains(cur) {
            continue;
        }
        let (c, st) = (cur / states, cur % states);
        let prev_counts = counting.prev(c);
        let step = moves[i].iter().find_map(|mv| {
            let pst = kernel.unapply(st, mv);
            prev_counts
                .iter()
                .map(|&pc| pc * states + pst)
                .find(|&p| prev.contains(p))
                .map(|p| (p, *mv))
        });
        let (p, mv) = step.expect("reachable state has a reachable predecessor");
        picks.push((i, mv));
        cur = p;
    }
    debug_assert_eq!(cur, 0);
    picks.reverse();
    Some(Witness {
        indices: picks.iter().map(|p| p.0).collect(),
        a_weights: picks.iter().map(|p| Scalar(p.1.a)).collect(),
        b_weights: kernel
            .cfg
            .has_b()
            .then(|| picks.iter().map(|p| Scalar(p.1.b.unwrap())).collect()),
    })
}

/// Witness using every position of `s`, if `s` itself is a weighted
/// zero-sum sequence.
pub fn check_full(s: &Sequence, module: &ModuleSpec, cfg: &WeightConfig) -> Result<Option<Witness>> {
    if s.is_empty() {
        return Err(Error::EmptySequence);
    }
    let kernel = Kernel::new(module, cfg)?;
    for x in s.iter() {
        module.check(x)?;
    }
    Ok(run_layers(&kernel, &module.indices_of(s), Counting::Full))
}

/// Some subsequence of `s` satisfying `constraint` that is a weighted
/// zero-sum, with its witness.
pub fn find_subsequence(
    s: &Sequence,
    module: &ModuleSpec,
    cfg: &WeightConfig,
    constraint: SubseqConstraint,
) -> Result<Option<Witness>> {
    if s.is_empty() {
        return Err(Error::EmptySequence);
    }
    constraint.validate(s.len())?;
    let kernel = Kernel::new(module, cfg)?;
    for x in s.iter() {
        module.check(x)?;
    }
    let xs = module.indices_of(s);
    Ok(match constraint {
        SubseqConstraint::AnyNonempty => run_layers(&kernel, &xs, Counting::Nonempty),
        SubseqConstraint::ExactLength(l) => run_layers(&kernel, &xs, Counting::Exact(l)),
        SubseqConstraint::FullSequence => run_layers(&kernel, &xs, Counting::Full),
        SubseqConstraint::ConsecutiveAnyNonempty => (0..xs.len()).find_map(|start| {
            (start + 1..=xs.len()).find_map(|end| {
                run_layers(&kernel, &xs[start..end], Counting::Full).map(|w| w.offset(start))
            })
        }),
    })
}
