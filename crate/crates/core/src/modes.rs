//! Mode theories: a finite preorder of modes, each carrying a set of
//! structural properties that is monotone along the order.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::prop::Ctx;

/// One of the five structural properties a mode may admit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StructuralProperty {
    /// Weakening.
    W,
    /// Contraction toward the left occurrence.
    CL,
    /// Contraction toward the right occurrence.
    CR,
    /// Left mobility.
    ML,
    /// Right mobility.
    MR,
}

impl StructuralProperty {
    pub const ALL: [StructuralProperty; 5] = [Self::W, Self::CL, Self::CR, Self::ML, Self::MR];

    fn bit(self) -> u8 {
        match self {
            Self::W => 1,
            Self::CL => 2,
            Self::CR => 4,
            Self::ML => 8,
            Self::MR => 16,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::W => "W",
            Self::CL => "CL",
            Self::CR => "CR",
            Self::ML => "ML",
            Self::MR => "MR",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.name() == s)
    }
}

impl fmt::Display for StructuralProperty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A subset of the structural properties.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Sigma(u8);

impl Sigma {
    pub const EMPTY: Sigma = Sigma(0);
    pub const FULL: Sigma = Sigma(31);

    pub fn from_props<I: IntoIterator<Item = StructuralProperty>>(props: I) -> Self {
        let mut s = Sigma::EMPTY;
        for p in props {
            s.insert(p);
        }
        s
    }

    /// Decodes the low five bits (W, CL, CR, ML, MR).
    pub fn from_bits(bits: u8) -> Self {
        Sigma(bits & 31)
    }

    pub fn bits(self) -> u8 {
        self.0
    }

    pub fn contains(self, p: StructuralProperty) -> bool {
        self.0 & p.bit() != 0
    }

    pub fn insert(&mut self, p: StructuralProperty) {
        self.0 |= p.bit();
    }

    pub fn is_superset(self, other: Sigma) -> bool {
        self.0 & other.0 == other.0
    }

    pub fn iter(self) -> impl Iterator<Item = StructuralProperty> {
        StructuralProperty::ALL.into_iter().filter(move |p| self.contains(*p))
    }

    /// Properties of `other` missing from `self`.
    pub fn missing_from(self, other: Sigma) -> impl Iterator<Item = StructuralProperty> {
        other.iter().filter(move |p| !self.contains(*p))
    }

    /// Mobility implied by weakening together with contraction.
    fn implied_mobility(self) -> Sigma {
        use StructuralProperty::*;
        let mut s = self;
        if self.contains(W) && self.contains(CL) {
            s.insert(ML);
        }
        if self.contains(W) && self.contains(CR) {
            s.insert(MR);
        }
        s
    }
}

impl fmt::Display for Sigma {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, p) in self.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{p}")?;
        }
        f.write_str("}")
    }
}

/// Index of a mode inside its [`ModeTheory`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ModeId(pub usize);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModeError {
    #[error("mode `{0}` declared twice")]
    DuplicateMode(String),
    #[error("order declaration mentions unknown mode `{0}`")]
    UnknownModeInOrder(String),
    #[error("unknown mode `{0}`")]
    UnknownMode(String),
    #[error("monotonicity violated: {higher} >= {lower} but {higher} lacks {missing}")]
    MonotonicityViolation {
        higher: String,
        lower: String,
        missing: StructuralProperty,
    },
    #[error("closure violated: mode {mode} has W and contraction but lacks {missing}")]
    ClosureViolation {
        mode: String,
        missing: StructuralProperty,
    },
    #[error("a mode theory needs at least one mode")]
    Empty,
}

/// An unvalidated mode theory as written by the user.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ModeDecls {
    pub modes: Vec<(String, Sigma)>,
    /// Pairs read `left >= right`.
    pub order: Vec<(String, String)>,
}

impl ModeDecls {
    pub fn mode(mut self, name: &str, sigma: Sigma) -> Self {
        self.modes.push((name.to_string(), sigma));
        self
    }

    pub fn geq(mut self, higher: &str, lower: &str) -> Self {
        self.order.push((higher.to_string(), lower.to_string()));
        self
    }
}

/// A validated mode theory. Immutable once built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModeTheory {
    names: Vec<String>,
    sigma: Vec<Sigma>,
    /// `geq[k][m]` iff k >= m in the reflexive-transitive closure.
    geq: Vec<Vec<bool>>,
}

impl ModeTheory {
    /// Validates declarations. With `complete_sigma`, the mobility implied by
    /// weakening together with contraction is inserted instead of being
    /// rejected.
    pub fn validate(decls: &ModeDecls, complete_sigma: bool) -> Result<Self, ModeError> {
        if decls.modes.is_empty() {
            return Err(ModeError::Empty);
        }
        let mut index = BTreeMap::new();
        let mut names = Vec::new();
        let mut sigma = Vec::new();
        for (name, s) in &decls.modes {
            if index.insert(name.clone(), names.len()).is_some() {
                return Err(ModeError::DuplicateMode(name.clone()));
            }
            names.push(name.clone());
            sigma.push(*s);
        }
        let n = names.len();
        let mut geq = vec![vec![false; n]; n];
        for (i, row) in geq.iter_mut().enumerate() {
            row[i] = true;
        }
        for (hi, lo) in &decls.order {
            let h = *index
                .get(hi)
                .ok_or_else(|| ModeError::UnknownModeInOrder(hi.clone()))?;
            let l = *index
                .get(lo)
                .ok_or_else(|| ModeError::UnknownModeInOrder(lo.clone()))?;
            geq[h][l] = true;
        }
        // Warshall
        for k in 0..n {
            for i in 0..n {
                if geq[i][k] {
                    let row = geq[k].clone();
                    for (to, via) in geq[i].iter_mut().zip(row) {
                        *to |= via;
                    }
                }
            }
        }
        for (i, s) in sigma.iter_mut().enumerate() {
            let completed = s.implied_mobility();
            if completed != *s {
                if complete_sigma {
                    *s = completed;
                } else {
                    let missing = s.missing_from(completed).next().expect("differs");
                    return Err(ModeError::ClosureViolation {
                        mode: names[i].clone(),
                        missing,
                    });
                }
            }
        }
        for k in 0..n {
            for m in 0..n {
                if geq[k][m] && !sigma[k].is_superset(sigma[m]) {
                    let missing = sigma[k].missing_from(sigma[m]).next().expect("not superset");
                    return Err(ModeError::MonotonicityViolation {
                        higher: names[k].clone(),
                        lower: names[m].clone(),
                        missing,
                    });
                }
            }
        }
        Ok(ModeTheory { names, sigma, geq })
    }

    /// Benton's linear/non-linear logic: `U > L`, U fully structural, L linear.
    pub fn lnl() -> Self {
        let decls = ModeDecls::default()
            .mode("U", Sigma::FULL)
            .mode("L", Sigma::EMPTY)
            .geq("U", "L");
        Self::validate(&decls, false).expect("LNL is a valid theory")
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn modes(&self) -> impl Iterator<Item = ModeId> {
        (0..self.names.len()).map(ModeId)
    }

    pub fn name(&self, m: ModeId) -> &str {
        &self.names[m.0]
    }

    pub fn lookup(&self, name: &str) -> Result<ModeId, ModeError> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(ModeId)
            .ok_or_else(|| ModeError::UnknownMode(name.to_string()))
    }

    pub fn sigma(&self, m: ModeId) -> Sigma {
        self.sigma[m.0]
    }

    pub fn has(&self, m: ModeId, p: StructuralProperty) -> bool {
        self.sigma[m.0].contains(p)
    }

    /// `k >= m` in the closed preorder.
    pub fn geq(&self, k: ModeId, m: ModeId) -> bool {
        self.geq[k.0][m.0]
    }

    /// Name-based comparison, for front ends.
    pub fn leq_by_name(&self, lower: &str, higher: &str) -> Result<bool, ModeError> {
        Ok(self.geq(self.lookup(higher)?, self.lookup(lower)?))
    }

    /// Declaration of independence: every hypothesis mode is `>= m`.
    pub fn context_geq(&self, ctx: &Ctx, m: ModeId) -> bool {
        ctx.iter().all(|h| self.geq(h.prop.mode(), m))
    }

    /// `|m| ~ n`: whether `n` occurrences of a mode-`m` hypothesis may be
    /// replaced at once.
    pub fn multiplicity_compatible(&self, m: ModeId, n: usize) -> bool {
        use StructuralProperty::*;
        match n {
            0 => self.has(m, W),
            1 => true,
            _ => self.has(m, CL) || self.has(m, CR),
        }
    }

    /// The closed order as explicit `(higher, lower)` pairs.
    pub fn order_pairs(&self) -> Vec<(ModeId, ModeId)> {
        let mut out = Vec::new();
        for k in self.modes() {
            for m in self.modes() {
                if self.geq(k, m) {
                    out.push((k, m));
                }
            }
        }
        out
    }
}
