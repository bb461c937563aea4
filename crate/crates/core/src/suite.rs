//! Claim verification over configurable parameter ranges.
//!
//! Every constant a claim needs is computed once, up front and in
//! parallel. Claims are then evaluated against that table, also in
//! parallel, and collected in declaration order so the report does not
//! depend on scheduling.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use chrono::{SecondsFormat, Utc};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{ModuleSpec, Sequence};
use crate::certificate::{compute_cached, Cache, CertificateRecord};
use crate::error::Error;
use crate::proofs::{
    binom_exceeds, build_appended, build_interleaved, extract_even_length, extract_z2,
    pigeonhole_witness,
};
use crate::search::{compute_constant, is_free, ConstantCertificate, ConstantKind, SearchOptions};
use crate::weights::WeightConfig;
use crate::ENGINE_VERSION;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClaimGroup {
    /// Free sequences and values at `n = 4, 6, 8` for `A = {1,-1}`.
    Remark,
    /// `C_{A,1} = 2 C_A`, and `C_A(n) = n` for powers of two.
    CDoubling,
    /// `C_{1,1}(n) = n^2`.
    CSquare,
    /// `D_A + 1 <= D_{A,1} <= 2 D_A` and `2^{D_A} > n`.
    DRelations,
    /// `E_{A,1}(n) = 2n - 1` for odd `n`.
    EOdd,
    /// `E_A <= E_{A,1} <= n - 2 + D_{A,1}` for even `n`.
    EEven,
    /// Closed forms over `Z_2^r` with `A = B = {1}`.
    Z2ClosedForms,
    /// Weighted against classical constants over `Z_2^r`.
    Z2Classical,
    /// `D_{1,1}(n) = E_{1,1}(n) = 2n - 1`.
    KnownValues,
    /// `C(2k, k) > 2^k`.
    Binom,
    /// Lower-bound constructions over every free input.
    LowerBounds,
    EvenExtractor,
    Z2Extractor,
    Pigeonhole,
    /// Evidence for open conjectures; never reported as verified.
    Conjectures,
}

impl ClaimGroup {
    pub const ALL: [ClaimGroup; 15] = [
        ClaimGroup::Remark,
        ClaimGroup::CDoubling,
        ClaimGroup::CSquare,
        ClaimGroup::DRelations,
        ClaimGroup::EOdd,
        ClaimGroup::EEven,
        ClaimGroup::Z2ClosedForms,
        ClaimGroup::Z2Classical,
        ClaimGroup::KnownValues,
        ClaimGroup::Binom,
        ClaimGroup::LowerBounds,
        ClaimGroup::EvenExtractor,
        ClaimGroup::Z2Extractor,
        ClaimGroup::Pigeonhole,
        ClaimGroup::Conjectures,
    ];
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuiteConfig {
    pub groups: Vec<ClaimGroup>,
    pub d_moduli: Vec<u32>,
    pub e_odd_moduli: Vec<u32>,
    pub e_even_moduli: Vec<u32>,
    pub c_moduli: Vec<u32>,
    pub c11_moduli: Vec<u32>,
    /// Ranks for the `D` and `E` rows over `Z_2^r`.
    pub z2_ranks: Vec<u32>,
    /// Ranks for the `C` rows over `Z_2^r`; rank 3 takes about a minute.
    pub z2_c_ranks: Vec<u32>,
    pub known_moduli: Vec<u32>,
    pub binom_k_min: u32,
    pub binom_k_max: u32,
    pub lower_bound_moduli: Vec<u32>,
    pub even_extractor_moduli: Vec<u32>,
    pub z2_extractor_ranks: Vec<u32>,
    pub z2_sample_ranks: Vec<u32>,
    pub z2_samples: usize,
    pub pigeonhole_modulus: u32,
    pub pigeonhole_length: usize,
    pub pigeonhole_samples: usize,
    pub conjecture_moduli: Vec<u32>,
    /// Node budget per constant; `None` is unlimited, `0` skips everything.
    pub max_nodes: Option<u64>,
    pub seed: u64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            groups: ClaimGroup::ALL.to_vec(),
            d_moduli: (2..=10).collect(),
            e_odd_moduli: vec![3, 5, 7],
            e_even_moduli: vec![4, 6, 8],
            c_moduli: vec![2, 3, 4],
            c11_moduli: vec![2, 3],
            z2_ranks: vec![1, 2, 3],
            z2_c_ranks: vec![1, 2],
            known_moduli: vec![2, 3, 4],
            binom_k_min: 2,
            binom_k_max: 30,
            lower_bound_moduli: (2..=8).collect(),
            even_extractor_moduli: vec![4, 6],
            z2_extractor_ranks: vec![1, 2],
            z2_sample_ranks: vec![3],
            z2_samples: 10_000,
            pigeonhole_modulus: 8,
            pigeonhole_length: 6,
            pigeonhole_samples: 1_000,
            conjecture_moduli: vec![2, 4, 6, 8],
            max_nodes: None,
            seed: 0x5EED,
        }
    }
}

impl SuiteConfig {
    pub fn only(groups: &[ClaimGroup]) -> Self {
        Self {
            groups: groups.to_vec(),
            ..Self::default()
        }
    }

    fn has(&self, g: ClaimGroup) -> bool {
        self.groups.contains(&g)
    }

    fn options(&self) -> SearchOptions {
        SearchOptions {
            max_nodes: self.max_nodes,
            ..SearchOptions::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Verified,
    Violated,
    Skipped,
    Consistent,
    Counterexample,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Verified => "verified",
            Status::Violated => "violated",
            Status::Skipped => "skipped",
            Status::Consistent => "consistent",
            Status::Counterexample => "counterexample",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Quantity {
    Int(i64),
    Bool(bool),
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Quantity::Int(v) => write!(f, "{v}"),
            Quantity::Bool(b) => write!(f, "{b}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">")]
    Gt,
}

impl Relation {
    fn holds(self, l: Quantity, r: Quantity) -> bool {
        match (self, l, r) {
            (Relation::Eq, l, r) => l == r,
            (Relation::Le, Quantity::Int(l), Quantity::Int(r)) => l <= r,
            (Relation::Gt, Quantity::Int(l), Quantity::Int(r)) => l > r,
            _ => false,
        }
    }

    fn symbol(self) -> &'static str {
        match self {
            Relation::Eq => "=",
            Relation::Le => "<=",
            Relation::Gt => ">",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Parameters {
    /// `None` for claims that do not involve a module.
    pub modulus: Option<u32>,
    pub rank: Option<u32>,
    pub a_set: Option<Vec<u32>>,
    pub b_set: Option<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClaimResult {
    pub claim_id: String,
    pub parameters: Parameters,
    pub lhs_label: String,
    pub relation: Relation,
    pub rhs_label: String,
    pub lhs: Option<Quantity>,
    pub rhs: Option<Quantity>,
    pub status: Status,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub certificates: Vec<CertificateRecord>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub verified: usize,
    pub violated: usize,
    pub skipped: usize,
    pub consistent: usize,
    pub counterexample: usize,
}

impl Summary {
    pub fn of(rows: &[ClaimResult]) -> Self {
        let mut s = Self::default();
        for r in rows {
            *match r.status {
                Status::Verified => &mut s.verified,
                Status::Violated => &mut s.violated,
                Status::Skipped => &mut s.skipped,
                Status::Consistent => &mut s.consistent,
                Status::Counterexample => &mut s.counterexample,
            } += 1;
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub engine_version: String,
    pub generated_at: String,
    pub config: SuiteConfig,
    pub summary: Summary,
    pub results: Vec<ClaimResult>,
}

impl Report {
    pub fn has_violations(&self) -> bool {
        self.summary.violated > 0
    }
}

// ---------------------------------------------------------------------------
// claim descriptions

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Weights {
    PlusMinus,
    PlusMinusB,
    Ones,
    OnesB,
}

impl Weights {
    fn config(self, m: u32) -> Result<WeightConfig, String> {
        let minus_one = i64::from(m) - 1;
        let a: &[i64] = match self {
            Weights::PlusMinus | Weights::PlusMinusB => &[1, minus_one],
            Weights::Ones | Weights::OnesB => &[1],
        };
        let b: Option<&[i64]> = match self {
            Weights::PlusMinusB | Weights::OnesB => Some(&[1]),
            Weights::PlusMinus | Weights::Ones => None,
        };
        WeightConfig::new(m, a, b).map_err(|e| e.to_string())
    }

    fn suffix(self) -> &'static str {
        match self {
            Weights::PlusMinus => "_A",
            Weights::PlusMinusB => "_{A,1}",
            Weights::Ones => "",
            Weights::OnesB => "_{1,1}",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct Key {
    kind: ConstantKind,
    modulus: u32,
    rank: u32,
    weights: Weights,
}

impl Key {
    fn new(kind: ConstantKind, modulus: u32, rank: u32, weights: Weights) -> Self {
        Self {
            kind,
            modulus,
            rank,
            weights,
        }
    }

    fn label(&self) -> String {
        let m = if self.rank == 1 {
            format!("{}", self.modulus)
        } else {
            format!("Z_{}^{}", self.modulus, self.rank)
        };
        format!("{}{}({m})", self.kind, self.weights.suffix())
    }
}

/// `coef * K + offset`, or `2^K` when `pow2`.
#[derive(Debug, Clone)]
enum Expr {
    Lit(i64),
    Affine { coef: i64, key: Key, offset: i64 },
    Pow2(Key),
}

impl Expr {
    fn of(key: Key) -> Self {
        Expr::Affine {
            coef: 1,
            key,
            offset: 0,
        }
    }

    fn key(&self) -> Option<Key> {
        match self {
            Expr::Lit(_) => None,
            Expr::Affine { key, .. } | Expr::Pow2(key) => Some(*key),
        }
    }

    fn label(&self) -> String {
        match self {
            Expr::Lit(v) => v.to_string(),
            Expr::Pow2(k) => format!("2^{}", k.label()),
            Expr::Affine { coef, key, offset } => {
                let mut s = if *coef == 1 {
                    key.label()
                } else {
                    format!("{coef}*{}", key.label())
                };
                if *offset > 0 {
                    s.push_str(&format!(" + {offset}"));
                } else if *offset < 0 {
                    s.push_str(&format!(" - {}", -offset));
                }
                s
            }
        }
    }

    fn eval(&self, table: &Table) -> Result<i64, String> {
        match self {
            Expr::Lit(v) => Ok(*v),
            Expr::Affine { coef, key, offset } => Ok(coef * table.value(key)? + offset),
            Expr::Pow2(key) => {
                let v = table.value(key)?;
                u32::try_from(v)
                    .ok()
                    .and_then(|e| 1i64.checked_shl(e).filter(|_| e < 63))
                    .ok_or_else(|| format!("2^{v} overflows"))
            }
        }
    }
}

#[derive(Debug, Clone)]
enum Eval {
    Compare { lhs: Expr, rel: Relation, rhs: Expr },
    Free(Vec<i64>),
    Binom(u32),
    Interleave,
    Append,
    EvenExtractor { d_a1: Key },
    Z2Exhaustive { d: Key },
    Z2Sampled { d: Key, samples: usize, seed: u64 },
    Pigeonhole { length: usize, samples: usize, seed: u64 },
}

#[derive(Debug, Clone)]
struct Claim {
    id: &'static str,
    modulus: u32,
    rank: u32,
    /// `None` for claims that do not involve a module.
    weights: Option<Weights>,
    detail: Option<String>,
    conjecture: bool,
    eval: Eval,
}

impl Claim {
    fn compare(id: &'static str, m: u32, r: u32, w: Weights, lhs: Expr, rel: Relation, rhs: Expr) -> Self {
        Self {
            id,
            modulus: m,
            rank: r,
            weights: Some(w),
            detail: None,
            conjecture: false,
            eval: Eval::Compare { lhs, rel, rhs },
        }
    }

    fn other(id: &'static str, m: u32, r: u32, w: Weights, detail: String, eval: Eval) -> Self {
        Self {
            id,
            modulus: m,
            rank: r,
            weights: Some(w),
            detail: Some(detail),
            conjecture: false,
            eval,
        }
    }

    fn keys(&self) -> Vec<Key> {
        match &self.eval {
            Eval::Compare { lhs, rhs, .. } => lhs.key().into_iter().chain(rhs.key()).collect(),
            Eval::EvenExtractor { d_a1: k } | Eval::Z2Exhaustive { d: k } | Eval::Z2Sampled { d: k, .. } => {
                vec![*k]
            }
            _ => Vec::new(),
        }
    }
}

fn claims(cfg: &SuiteConfig) -> Vec<Claim> {
    use ConstantKind::{C, D, E};
    use Relation::{Eq, Gt, Le};
    use Weights::{Ones, OnesB, PlusMinus, PlusMinusB};
    let mut out = Vec::new();
    let k = Key::new;
    let lit = Expr::Lit;
    let affine = |coef, key, offset| Expr::Affine { coef, key, offset };

    for group in ClaimGroup::ALL.iter().filter(|g| cfg.has(**g)) {
        match group {
            ClaimGroup::Remark => {
                for (m, vals) in [(4, vec![0, 1, 2]), (6, vec![0, 1, 2, 4]), (8, vec![0, 1, 2, 4])] {
                    let detail = format!("S = {vals:?}");
                    out.push(Claim::other("remark-free", m, 1, PlusMinusB, detail, Eval::Free(vals)));
                }
                out.push(Claim::compare("remark-value", 6, 1, PlusMinusB, Expr::of(k(D, 6, 1, PlusMinusB)), Eq, lit(5)));
                out.push(Claim::compare("remark-value", 6, 1, PlusMinus, Expr::of(k(D, 6, 1, PlusMinus)), Eq, lit(3)));
                for (m, gap) in [(4, 1), (6, 2), (8, 1)] {
                    out.push(Claim::compare(
                        "remark-gap",
                        m,
                        1,
                        PlusMinusB,
                        Expr::of(k(D, m, 1, PlusMinusB)),
                        Eq,
                        affine(1, k(D, m, 1, PlusMinus), gap),
                    ));
                }
            }
            ClaimGroup::CDoubling => {
                for &m in &cfg.c_moduli {
                    out.push(Claim::compare(
                        "c-doubling",
                        m,
                        1,
                        PlusMinusB,
                        Expr::of(k(C, m, 1, PlusMinusB)),
                        Eq,
                        affine(2, k(C, m, 1, PlusMinus), 0),
                    ));
                    if m.is_power_of_two() {
                        out.push(Claim::compare(
                            "c-power-of-two",
                            m,
                            1,
                            PlusMinus,
                            Expr::of(k(C, m, 1, PlusMinus)),
                            Eq,
                            lit(m as i64),
                        ));
                    }
                }
            }
            ClaimGroup::CSquare => {
                for &m in &cfg.c11_moduli {
                    out.push(Claim::compare(
                        "c11-square",
                        m,
                        1,
                        OnesB,
                        Expr::of(k(C, m, 1, OnesB)),
                        Eq,
                        lit(m as i64 * m as i64),
                    ));
                }
            }
            ClaimGroup::DRelations => {
                for &m in &cfg.d_moduli {
                    let da = k(D, m, 1, PlusMinus);
                    let da1 = k(D, m, 1, PlusMinusB);
                    out.push(Claim::compare("d-lower", m, 1, PlusMinusB, affine(1, da, 1), Le, Expr::of(da1)));
                    out.push(Claim::compare("d-upper", m, 1, PlusMinusB, Expr::of(da1), Le, affine(2, da, 0)));
                    out.push(Claim::compare("d-binom-gap", m, 1, PlusMinus, Expr::Pow2(da), Gt, lit(m as i64)));
                }
            }
            ClaimGroup::EOdd => {
                for &m in &cfg.e_odd_moduli {
                    let mut c = Claim::compare(
                        "e-odd",
                        m,
                        1,
                        PlusMinusB,
                        Expr::of(k(E, m, 1, PlusMinusB)),
                        Eq,
                        lit(2 * m as i64 - 1),
                    );
                    if m % 2 == 0 {
                        c.detail = Some("even modulus".into());
                    }
                    out.push(c);
                }
            }
            ClaimGroup::EEven => {
                for &m in &cfg.e_even_moduli {
                    let mut lower = Claim::compare(
                        "e-even-lower",
                        m,
                        1,
                        PlusMinusB,
                        Expr::of(k(E, m, 1, PlusMinus)),
                        Le,
                        Expr::of(k(E, m, 1, PlusMinusB)),
                    );
                    let mut upper = Claim::compare(
                        "e-even-upper",
                        m,
                        1,
                        PlusMinusB,
                        Expr::of(k(E, m, 1, PlusMinusB)),
                        Le,
                        affine(1, k(D, m, 1, PlusMinusB), m as i64 - 2),
                    );
                    if m % 2 != 0 {
                        lower.detail = Some("odd modulus".into());
                        upper.detail = Some("odd modulus".into());
                    }
                    out.push(lower);
                    out.push(upper);
                }
            }
            ClaimGroup::Z2ClosedForms => {
                let ranks: BTreeSet<u32> = cfg.z2_ranks.iter().chain(&cfg.z2_c_ranks).copied().collect();
                for r in ranks {
                    if cfg.z2_c_ranks.contains(&r) {
                        out.push(Claim::compare("z2-c", 2, r, OnesB, Expr::of(k(C, 2, r, OnesB)), Eq, lit(1 << (r + 1))));
                    }
                    if cfg.z2_ranks.contains(&r) {
                        out.push(Claim::compare("z2-d", 2, r, OnesB, Expr::of(k(D, 2, r, OnesB)), Eq, lit(r as i64 + 2)));
                        out.push(Claim::compare(
                            "z2-e",
                            2,
                            r,
                            OnesB,
                            Expr::of(k(E, 2, r, OnesB)),
                            Eq,
                            lit((1i64 << r) + r as i64),
                        ));
                    }
                }
            }
            ClaimGroup::Z2Classical => {
                let ranks: BTreeSet<u32> = cfg.z2_ranks.iter().chain(&cfg.z2_c_ranks).copied().collect();
                for r in ranks {
                    if cfg.z2_c_ranks.contains(&r) {
                        out.push(Claim::compare(
                            "z2-c-classical",
                            2,
                            r,
                            OnesB,
                            Expr::of(k(C, 2, r, OnesB)),
                            Eq,
                            affine(2, k(C, 2, r, Ones), 0),
                        ));
                    }
                    if cfg.z2_ranks.contains(&r) {
                        out.push(Claim::compare(
                            "z2-d-classical",
                            2,
                            r,
                            OnesB,
                            Expr::of(k(D, 2, r, OnesB)),
                            Eq,
                            affine(1, k(D, 2, r, Ones), 1),
                        ));
                        out.push(Claim::compare(
                            "z2-e-classical",
                            2,
                            r,
                            OnesB,
                            Expr::of(k(E, 2, r, OnesB)),
                            Eq,
                            Expr::of(k(E, 2, r, Ones)),
                        ));
                    }
                }
            }
            ClaimGroup::KnownValues => {
                for &m in &cfg.known_moduli {
                    let target = lit(2 * m as i64 - 1);
                    out.push(Claim::compare("d11-known", m, 1, OnesB, Expr::of(k(D, m, 1, OnesB)), Eq, target.clone()));
                    out.push(Claim::compare("e11-known", m, 1, OnesB, Expr::of(k(E, m, 1, OnesB)), Eq, target));
                }
            }
            ClaimGroup::Binom => {
                for kk in cfg.binom_k_min..=cfg.binom_k_max {
                    let mut c = Claim::other("binom", 0, 0, Ones, format!("k = {kk}"), Eval::Binom(kk));
                    c.weights = None;
                    out.push(c);
                }
            }
            ClaimGroup::LowerBounds => {
                for &m in &cfg.lower_bound_moduli {
                    out.push(Claim::other(
                        "interleave-sweep",
                        m,
                        1,
                        PlusMinusB,
                        "every C_A-free input".into(),
                        Eval::Interleave,
                    ));
                    out.push(Claim::other(
                        "append-sweep",
                        m,
                        1,
                        PlusMinusB,
                        "every D_A-free input".into(),
                        Eval::Append,
                    ));
                }
            }
            ClaimGroup::EvenExtractor => {
                for &m in &cfg.even_extractor_moduli {
                    out.push(Claim::other(
                        "even-extractor",
                        m,
                        1,
                        PlusMinusB,
                        format!("every multiset of length {m} - 2 + D_{{A,1}}({m})"),
                        Eval::EvenExtractor {
                            d_a1: k(D, m, 1, PlusMinusB),
                        },
                    ));
                }
            }
            ClaimGroup::Z2Extractor => {
                for &r in &cfg.z2_extractor_ranks {
                    out.push(Claim::other(
                        "z2-extractor",
                        2,
                        r,
                        OnesB,
                        "every sequence of length D + 1".into(),
                        Eval::Z2Exhaustive { d: k(D, 2, r, Ones) },
                    ));
                }
                for &r in &cfg.z2_sample_ranks {
                    out.push(Claim::other(
                        "z2-extractor-sampled",
                        2,
                        r,
                        OnesB,
                        format!("{} random sequences of length D + 1", cfg.z2_samples),
                        Eval::Z2Sampled {
                            d: k(D, 2, r, Ones),
                            samples: cfg.z2_samples,
                            seed: cfg.seed ^ u64::from(r),
                        },
                    ));
                }
            }
            ClaimGroup::Pigeonhole => {
                out.push(Claim::other(
                    "pigeonhole",
                    cfg.pigeonhole_modulus,
                    1,
                    PlusMinusB,
                    format!(
                        "{} random sequences of length {}",
                        cfg.pigeonhole_samples, cfg.pigeonhole_length
                    ),
                    Eval::Pigeonhole {
                        length: cfg.pigeonhole_length,
                        samples: cfg.pigeonhole_samples,
                        seed: cfg.seed,
                    },
                ));
            }
            ClaimGroup::Conjectures => out.extend(conjecture_claims(&cfg.conjecture_moduli)),
        }
    }
    out
}

fn conjecture_claims(n_list: &[u32]) -> Vec<Claim> {
    let mut out = Vec::new();
    for &n in n_list {
        if n.is_power_of_two() {
            let mut c = Claim::compare(
                "conj-d-power-of-two",
                n,
                1,
                Weights::PlusMinusB,
                Expr::of(Key::new(ConstantKind::D, n, 1, Weights::PlusMinusB)),
                Relation::Eq,
                Expr::Affine {
                    coef: 1,
                    key: Key::new(ConstantKind::D, n, 1, Weights::PlusMinus),
                    offset: 1,
                },
            );
            c.conjecture = true;
            out.push(c);
        }
        let mut c = Claim::compare(
            "conj-e-even",
            n,
            1,
            Weights::PlusMinusB,
            Expr::of(Key::new(ConstantKind::E, n, 1, Weights::PlusMinusB)),
            Relation::Eq,
            Expr::of(Key::new(ConstantKind::E, n, 1, Weights::PlusMinus)),
        );
        c.conjecture = true;
        if n % 2 != 0 {
            c.detail = Some("odd modulus".into());
        }
        out.push(c);
    }
    out
}

// ---------------------------------------------------------------------------
// evaluation

struct Table(BTreeMap<Key, Result<ConstantCertificate, String>>);

impl Table {
    fn build(keys: BTreeSet<Key>, options: &SearchOptions, cache: Option<&Cache>) -> Self {
        let keys: Vec<Key> = keys.into_iter().collect();
        let values: Vec<_> = keys
            .par_iter()
            .map(|k| {
                let module = ModuleSpec::new(k.modulus, k.rank).map_err(|e| e.to_string())?;
                let cfg = k.weights.config(k.modulus)?;
                let got = match cache {
                    Some(c) => compute_cached(c, &module, &cfg, k.kind, options).map(|(cert, _)| cert),
                    None => compute_constant(&module, &cfg, k.kind, options),
                };
                got.map_err(|e| match e {
                    Error::SearchIncomplete(cert) => {
                        format!("{} search incomplete, value >= {}", k.label(), cert.value)
                    }
                    other => format!("{}: {other}", k.label()),
                })
            })
            .collect();
        Table(keys.into_iter().zip(values).collect())
    }

    fn get(&self, key: &Key) -> Result<&ConstantCertificate, String> {
        match self.0.get(key) {
            Some(Ok(c)) => Ok(c),
            Some(Err(e)) => Err(e.clone()),
            None => Err(format!("{} was not computed", key.label())),
        }
    }

    fn value(&self, key: &Key) -> Result<i64, String> {
        self.get(key).map(|c| c.value as i64)
    }
}

struct Outcome {
    lhs_label: String,
    rel: Relation,
    rhs_label: String,
    result: Result<(Quantity, Quantity, Option<String>), String>,
}

fn counted(label: &str, total: usize, failures: Vec<String>) -> Outcome {
    let ok = total - failures.len();
    Outcome {
        lhs_label: format!("{label} succeeded"),
        rel: Relation::Eq,
        rhs_label: "inputs".into(),
        result: Ok((
            Quantity::Int(ok as i64),
            Quantity::Int(total as i64),
            failures.into_iter().next().map(|f| format!("first failure: {f}")),
        )),
    }
}

fn random_sequence(module: &ModuleSpec, len: usize, rng: &mut ChaCha8Rng) -> Sequence {
    (0..len)
        .map(|_| module.element_at(rng.gen_range(0..module.cardinality())))
        .collect()
}

/// Free sequences of every length, grown one term at a time. Ordered for
/// `C`; as nondecreasing multisets otherwise.
fn free_inputs(module: &ModuleSpec, cfg: &WeightConfig, kind: ConstantKind) -> Result<Vec<Sequence>, String> {
    let n = module.cardinality();
    let mut out = Vec::new();
    let mut frontier: Vec<Vec<usize>> = vec![Vec::new()];
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for prefix in frontier {
            let start = if kind.order_insensitive() {
                prefix.last().copied().unwrap_or(0)
            } else {
                0
            };
            for x in start..n {
                let mut cand = prefix.clone();
                cand.push(x);
                let s = module.sequence_from_indices(&cand);
                if is_free(&s, module, cfg, kind).map_err(|e| e.to_string())? {
                    out.push(s);
                    next.push(cand);
                }
            }
        }
        frontier = next;
    }
    Ok(out)
}

fn evaluate(claim: &Claim, table: &Table, cfg: &WeightConfig) -> Outcome {
    let module = ModuleSpec::new(claim.modulus, claim.rank);
    let err = |e: Error| e.to_string();
    match &claim.eval {
        Eval::Compare { lhs, rel, rhs } => Outcome {
            lhs_label: lhs.label(),
            rel: *rel,
            rhs_label: rhs.label(),
            result: (|| Ok((Quantity::Int(lhs.eval(table)?), Quantity::Int(rhs.eval(table)?), None)))(),
        },
        Eval::Free(vals) => Outcome {
            lhs_label: "is_free(S)".into(),
            rel: Relation::Eq,
            rhs_label: "true".into(),
            result: (|| {
                let module = module.map_err(err)?;
                let s = module.sequence(vals).map_err(err)?;
                let free = is_free(&s, &module, cfg, ConstantKind::D).map_err(err)?;
                Ok((Quantity::Bool(free), Quantity::Bool(true), None))
            })(),
        },
        Eval::Binom(k) => Outcome {
            lhs_label: format!("C({}, {k}) > 2^{k}", 2 * k),
            rel: Relation::Eq,
            rhs_label: "true".into(),
            result: binom_exceeds(*k)
                .map(|b| (Quantity::Bool(b), Quantity::Bool(true), None))
                .map_err(err),
        },
        Eval::Interleave | Eval::Append => {
            let interleave = matches!(claim.eval, Eval::Interleave);
            let label = if interleave {
                "build_interleaved"
            } else {
                "build_appended"
            };
            let inputs = module.map_err(err).and_then(|module| {
                let kind = if interleave {
                    ConstantKind::C
                } else {
                    ConstantKind::D
                };
                free_inputs(&module, &cfg.classical(), kind).map(|v| (module, v))
            });
            match inputs {
                Err(e) => Outcome {
                    lhs_label: label.into(),
                    rel: Relation::Eq,
                    rhs_label: "inputs".into(),
                    result: Err(e),
                },
                Ok((module, inputs)) => {
                    let failures: Vec<String> = inputs
                        .par_iter()
                        .filter_map(|s| {
                            let built = if interleave {
                                build_interleaved(s, &module, cfg)
                            } else {
                                build_appended(s, &module, cfg)
                            };
                            built.err().map(|e| format!("{s}: {e}"))
                        })
                        .collect();
                    counted(label, inputs.len(), failures)
                }
            }
        }
        Eval::EvenExtractor { d_a1 } => {
            let run = || -> Result<(usize, Vec<String>), String> {
                let module = module.map_err(err)?;
                let d = table.value(d_a1)? as usize;
                let m = module.modulus() as usize;
                let len = m - 2 + d;
                let inputs = multisets(module.cardinality(), len);
                let failures = inputs
                    .par_iter()
                    .filter_map(|idx| {
                        let s = module.sequence_from_indices(idx);
                        extract_even_length(&s, &module, m, d)
                            .err()
                            .map(|e| format!("{s}: {e}"))
                    })
                    .collect();
                Ok((inputs.len(), failures))
            };
            sweep_outcome("extract_even_length", run())
        }
        Eval::Z2Exhaustive { d } => {
            let run = || -> Result<(usize, Vec<String>), String> {
                let module = module.map_err(err)?;
                let d = table.value(d)? as usize;
                let n = module.cardinality();
                let len = d + 1;
                let total = u32::try_from(len)
                    .ok()
                    .and_then(|l| n.checked_pow(l))
                    .ok_or_else(|| format!("{n}^{len} sequences is too many"))?;
                let failures = (0..total)
                    .into_par_iter()
                    .filter_map(|mut code| {
                        let idx: Vec<usize> = (0..len)
                            .map(|_| {
                                let x = code % n;
                                code /= n;
                                x
                            })
                            .collect();
                        let s = module.sequence_from_indices(&idx);
                        extract_z2(&s, &module, d).err().map(|e| format!("{s}: {e}"))
                    })
                    .collect();
                Ok((total, failures))
            };
            sweep_outcome("extract_z2", run())
        }
        Eval::Z2Sampled { d, samples, seed } => {
            let run = || -> Result<(usize, Vec<String>), String> {
                let module = module.map_err(err)?;
                let d = table.value(d)? as usize;
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let inputs: Vec<Sequence> = (0..*samples)
                    .map(|_| random_sequence(&module, d + 1, &mut rng))
                    .collect();
                let failures = inputs
                    .par_iter()
                    .filter_map(|s| extract_z2(s, &module, d).err().map(|e| format!("{s}: {e}")))
                    .collect();
                Ok((*samples, failures))
            };
            sweep_outcome("extract_z2", run())
        }
        Eval::Pigeonhole {
            length,
            samples,
            seed,
        } => {
            let run = || -> Result<(usize, Vec<String>), String> {
                let module = module.map_err(err)?;
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let inputs: Vec<Sequence> = (0..*samples)
                    .map(|_| random_sequence(&module, *length, &mut rng))
                    .collect();
                let failures = inputs
                    .par_iter()
                    .filter_map(|s| pigeonhole_witness(s, &module).err().map(|e| format!("{s}: {e}")))
                    .collect();
                Ok((*samples, failures))
            };
            sweep_outcome("pigeonhole_witness", run())
        }
    }
}

fn sweep_outcome(label: &str, run: Result<(usize, Vec<String>), String>) -> Outcome {
    match run {
        Ok((total, failures)) => counted(label, total, failures),
        Err(e) => Outcome {
            lhs_label: format!("{label} succeeded"),
            rel: Relation::Eq,
            rhs_label: "inputs".into(),
            result: Err(e),
        },
    }
}

/// Nondecreasing index vectors of length `len` over `0..n`.
fn multisets(n: usize, len: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = vec![0usize; len];
    loop {
        out.push(cur.clone());
        let Some(p) = (0..len).rev().find(|&p| cur[p] + 1 < n) else {
            return out;
        };
        let v = cur[p] + 1;
        for slot in &mut cur[p..] {
            *slot = v;
        }
    }
}

fn to_result(claim: &Claim, table: &Table, budget_zero: bool) -> ClaimResult {
    let cfg = claim.weights.map(|w| w.config(claim.modulus));
    let parameters = match &cfg {
        Some(Ok(cfg)) => Parameters {
            modulus: Some(claim.modulus),
            rank: Some(claim.rank),
            a_set: Some(cfg.a_set().to_vec()),
            b_set: cfg.b_set().map(<[u32]>::to_vec),
            detail: claim.detail.clone(),
        },
        _ => Parameters {
            modulus: claim.weights.map(|_| claim.modulus),
            rank: claim.weights.map(|_| claim.rank),
            a_set: None,
            b_set: None,
            detail: claim.detail.clone(),
        },
    };
    let mut row = ClaimResult {
        claim_id: claim.id.to_string(),
        parameters,
        lhs_label: String::new(),
        relation: Relation::Eq,
        rhs_label: String::new(),
        lhs: None,
        rhs: None,
        status: Status::Skipped,
        note: None,
        certificates: Vec::new(),
    };

    let wrong_parity = matches!(claim.detail.as_deref(), Some("even modulus" | "odd modulus"));
    let outcome = if budget_zero {
        Outcome {
            lhs_label: String::new(),
            rel: Relation::Eq,
            rhs_label: String::new(),
            result: Err("node budget is zero".into()),
        }
    } else if wrong_parity {
        let reason = format!("claim does not apply: {}", claim.detail.as_deref().unwrap_or_default());
        Outcome {
            lhs_label: String::new(),
            rel: Relation::Eq,
            rhs_label: String::new(),
            result: Err(reason),
        }
    } else {
        match cfg {
            Some(Err(e)) => Outcome {
                lhs_label: String::new(),
                rel: Relation::Eq,
                rhs_label: String::new(),
                result: Err(e),
            },
            Some(Ok(cfg)) => evaluate(claim, table, &cfg),
            None => evaluate(claim, table, &WeightConfig::ones(2)),
        }
    };
    row.lhs_label = outcome.lhs_label;
    row.relation = outcome.rel;
    row.rhs_label = outcome.rhs_label;
    match outcome.result {
        Err(reason) => row.note = Some(reason),
        Ok((l, r, note)) => {
            let holds = outcome.rel.holds(l, r);
            row.lhs = Some(l);
            row.rhs = Some(r);
            row.note = note;
            row.status = match (claim.conjecture, holds) {
                (false, true) => Status::Verified,
                (false, false) => Status::Violated,
                (true, true) => Status::Consistent,
                (true, false) => Status::Counterexample,
            };
            if !holds {
                row.certificates = claim
                    .keys()
                    .iter()
                    .filter_map(|k| table.get(k).ok())
                    .map(CertificateRecord::from_certificate)
                    .collect();
            }
        }
    }
    row
}

fn run_claims(claims: &[Claim], cfg: &SuiteConfig, cache: Option<&Cache>) -> Vec<ClaimResult> {
    let budget_zero = cfg.max_nodes == Some(0);
    let keys: BTreeSet<Key> = if budget_zero {
        BTreeSet::new()
    } else {
        claims
            .iter()
            .filter(|c| c.detail.as_deref() != Some("even modulus") && c.detail.as_deref() != Some("odd modulus"))
            .flat_map(Claim::keys)
            .collect()
    };
    let table = Table::build(keys, &cfg.options(), cache);
    claims
        .par_iter()
        .map(|c| to_result(c, &table, budget_zero))
        .collect()
}

/// Every selected claim except the conjecture scan.
pub fn run_suite(cfg: &SuiteConfig, cache: Option<&Cache>) -> Vec<ClaimResult> {
    let claims: Vec<Claim> = claims(cfg).into_iter().filter(|c| !c.conjecture).collect();
    run_claims(&claims, cfg, cache)
}

/// Evidence rows for the open conjectures at the given moduli.
pub fn scan_conjectures(n_list: &[u32], cfg: &SuiteConfig, cache: Option<&Cache>) -> Vec<ClaimResult> {
    run_claims(&conjecture_claims(n_list), cfg, cache)
}

/// Claims and conjectures together, in one pass over the constants.
pub fn build_report(cfg: &SuiteConfig, cache: Option<&Cache>) -> Report {
    let results = run_claims(&claims(cfg), cfg, cache);
    Report {
        engine_version: ENGINE_VERSION.to_string(),
        generated_at: Utc::now().to_rfc3339_opts(SecondsFormat::Secs, true),
        config: cfg.clone(),
        summary: Summary::of(&results),
        results,
    }
}

fn module_label(p: &Parameters) -> String {
    match (p.modulus, p.rank) {
        (Some(m), Some(1)) => format!("Z_{m}"),
        (Some(m), Some(r)) => format!("Z_{m}^{r}"),
        _ => "-".into(),
    }
}

fn set_label(v: &[u32]) -> String {
    let parts: Vec<String> = v.iter().map(u32::to_string).collect();
    format!("{{{}}}", parts.join(","))
}

/// Plain-text table, one line per row, followed by the summary.
pub fn render_text(report: &Report) -> String {
    let headers = ["claim", "M", "A", "B", "lhs", "rel", "rhs", "status", "note"];
    let rows: Vec<[String; 9]> = report
        .results
        .iter()
        .map(|r| {
            let side = |label: &str, q: Option<Quantity>| match q {
                Some(q) if label.is_empty() || *label == q.to_string() => q.to_string(),
                Some(q) => format!("{label} = {q}"),
                None => label.to_string(),
            };
            let note = match (&r.parameters.detail, &r.note) {
                (Some(d), Some(n)) => format!("{d}; {n}"),
                (Some(d), None) => d.clone(),
                (None, Some(n)) => n.clone(),
                (None, None) => String::new(),
            };
            [
                r.claim_id.clone(),
                module_label(&r.parameters),
                r.parameters.a_set.as_deref().map_or("-".into(), set_label),
                r.parameters.b_set.as_deref().map_or("-".into(), set_label),
                side(&r.lhs_label, r.lhs),
                r.relation.symbol().to_string(),
                side(&r.rhs_label, r.rhs),
                r.status.to_string(),
                note,
            ]
        })
        .collect();
    let mut widths = headers.map(str::len);
    for row in &rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: Vec<&str>| {
        let mut s = String::new();
        for (i, (cell, w)) in cells.iter().zip(widths).enumerate() {
            if i + 1 == cells.len() {
                s.push_str(cell);
            } else {
                s.push_str(&format!("{cell:<w$}  "));
            }
        }
        s.trim_end().to_string()
    };
    let mut out = String::new();
    out.push_str(&line(headers.to_vec()));
    out.push('\n');
    for row in &rows {
        out.push_str(&line(row.iter().map(String::as_str).collect()));
        out.push('\n');
    }
    let s = &report.summary;
    out.push_str(&format!(
        "\n{} verified, {} violated, {} skipped, {} consistent, {} counterexample\n",
        s.verified, s.violated, s.skipped, s.consistent, s.counterexample
    ));
    out
}
