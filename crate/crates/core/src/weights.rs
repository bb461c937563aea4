use std::fmt;

use crate::algebra::{gcd, ModuleSpec};
use crate::error::{Error, Result};

/// The weight sets `A` and optional `B`. An absent `B` is the classical
/// `A`-weighted setting, where only `sum a_i x_i = 0` is imposed.
///
/// Sets are stored reduced mod `m`, sorted and deduplicated.
#[derive(Debug, Clone)]
pub struct WeightConfig {
    modulus: u32,
    a_set: Vec<u32>,
    b_set: Option<Vec<u32>>,
    collapsed: bool,
}

impl PartialEq for WeightConfig {
    fn eq(&self, other: &Self) -> bool {
        self.modulus == other.modulus && self.a_set == other.a_set && self.b_set == other.b_set
    }
}

impl Eq for WeightConfig {}

impl std::hash::Hash for WeightConfig {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.modulus.hash(state);
        self.a_set.hash(state);
        self.b_set.hash(state);
    }
}

fn normalize(modulus: u32, values: &[i64], name: &'static str) -> Result<(Vec<u32>, bool)> {
    if values.is_empty() {
        return Err(Error::EmptyWeightSet(name));
    }
    let mut set: Vec<u32> = values
        .iter()
        .map(|&v| v.rem_euclid(modulus as i64) as u32)
        .collect();
    if set.contains(&0) {
        return Err(Error::ZeroWeight(name));
    }
    set.sort_unstable();
    let before = set.len();
    set.dedup();
    let collapsed = set.len() != before;
    Ok((set, collapsed))
}

impl WeightConfig {
    pub fn new(modulus: u32, a_set: &[i64], b_set: Option<&[i64]>) -> Result<Self> {
        if modulus < 2 {
            return Err(Error::InvalidModule { modulus, rank: 1 });
        }
        let (a_set, ca) = normalize(modulus, a_set, "A")?;
        let (b_set, cb) = match b_set {
            Some(b) => {
                let (b, cb) = normalize(modulus, b, "B")?;
                (Some(b), cb)
            }
            None => (None, false),
        };
        Ok(Self {
            modulus,
            a_set,
            b_set,
            collapsed: ca || cb,
        })
    }

    /// `A = {1, -1}`, no `B`.
    pub fn plus_minus_one(modulus: u32) -> Self {
        Self::new(modulus, &[1, -1], None).expect("valid weights")
    }

    /// `A = {1}`, no `B`.
    pub fn ones(modulus: u32) -> Self {
        Self::new(modulus, &[1], None).expect("valid weights")
    }

    /// Same `A`, with `B = {1}`.
    pub fn with_b_one(mut self) -> Self {
        self.b_set = Some(vec![1]);
        self
    }

    /// Same `A`, with `B` dropped.
    pub fn classical(&self) -> Self {
        Self {
            modulus: self.modulus,
            a_set: self.a_set.clone(),
            b_set: None,
            collapsed: false,
        }
    }

    pub fn modulus(&self) -> u32 {
        self.modulus
    }

    pub fn a_set(&self) -> &[u32] {
        &self.a_set
    }

    pub fn b_set(&self) -> Option<&[u32]> {
        self.b_set.as_deref()
    }

    pub fn has_b(&self) -> bool {
        self.b_set.is_some()
    }

    /// True when duplicate residues were merged while building the sets
    /// (e.g. `{1, -1}` over `Z_2`).
    pub fn collapsed_duplicates(&self) -> bool {
        self.collapsed
    }

    /// Translations preserve weighted zero-sums only when `B = {1}`.
    pub fn translation_valid(&self) -> bool {
        self.b_set.as_deref() == Some(&[1][..])
    }

    pub fn is_plus_minus_one(&self) -> bool {
        let mut pm = vec![1, self.modulus - 1];
        pm.sort_unstable();
        pm.dedup();
        self.a_set == pm
    }

    pub fn a_in_units(&self) -> bool {
        self.a_set
            .iter()
            .all(|&a| gcd(a as u64, self.modulus as u64) == 1)
    }

    pub fn b_in_units(&self) -> bool {
        self.b_set.as_ref().is_some_and(|b| {
            b.iter()
                .all(|&x| gcd(x as u64, self.modulus as u64) == 1)
        })
    }

    pub(crate) fn check_module(&self, module: &ModuleSpec) -> Result<()> {
        if module.modulus() != self.modulus {
            return Err(Error::ModulusMismatch {
                module: module.modulus(),
                config: self.modulus,
            });
        }
        Ok(())
    }
}

fn fmt_set(f: &mut fmt::Formatter<'_>, set: &[u32]) -> fmt::Result {
    write!(f, "{{")?;
    for (i, v) in set.iter().enumerate() {
        if i > 0 {
            write!(f, ",")?;
        }
        write!(f, "{v}")?;
    }
    write!(f, "}}")
}

impl fmt::Display for WeightConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "A=")?;
        fmt_set(f, &self.a_set)?;
        match &self.b_set {
            Some(b) => {
                write!(f, " B=")?;
                fmt_set(f, b)
            }
            None => write!(f, " B=none"),
        }
    }
}
