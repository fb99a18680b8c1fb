//! Propositions, hypotheses and ordered contexts.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Deref, DerefMut};

use thiserror::Error;

use crate::modes::{ModeError, ModeId, ModeTheory};

/// A mode-indexed proposition.
///
/// Binary connectives carry the shared mode of their operands. `Up(m, A)` is
/// the upshift into mode `m` of `A` (which lives at a mode `l <= m`);
/// `Down(m, A)` is the downshift into `m` of `A` (at a mode `k >= m`).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Prop {
    Atom(String, ModeId),
    /// `A >-> B`: consumes its argument from the left.
    LeftImp(Box<Prop>, Box<Prop>),
    /// `A ->> B`: consumes its argument from the right.
    RightImp(Box<Prop>, Box<Prop>),
    With(Box<Prop>, Box<Prop>),
    Plus(Box<Prop>, Box<Prop>),
    Fuse(Box<Prop>, Box<Prop>),
    One(ModeId),
    Up(ModeId, Box<Prop>),
    Down(ModeId, Box<Prop>),
}

impl Prop {
    pub fn atom(name: &str, m: ModeId) -> Prop {
        Prop::Atom(name.to_string(), m)
    }
    pub fn left_imp(a: Prop, b: Prop) -> Prop {
        Prop::LeftImp(Box::new(a), Box::new(b))
    }
    pub fn right_imp(a: Prop, b: Prop) -> Prop {
        Prop::RightImp(Box::new(a), Box::new(b))
    }
    pub fn with(a: Prop, b: Prop) -> Prop {
        Prop::With(Box::new(a), Box::new(b))
    }
    pub fn plus(a: Prop, b: Prop) -> Prop {
        Prop::Plus(Box::new(a), Box::new(b))
    }
    pub fn fuse(a: Prop, b: Prop) -> Prop {
        Prop::Fuse(Box::new(a), Box::new(b))
    }
    pub fn up(m: ModeId, a: Prop) -> Prop {
        Prop::Up(m, Box::new(a))
    }
    pub fn down(m: ModeId, a: Prop) -> Prop {
        Prop::Down(m, Box::new(a))
    }

    /// Mode of a well-formed proposition.
    pub fn mode(&self) -> ModeId {
        match self {
            Prop::Atom(_, m) | Prop::One(m) | Prop::Up(m, _) | Prop::Down(m, _) => *m,
            Prop::LeftImp(a, _)
            | Prop::RightImp(a, _)
            | Prop::With(a, _)
            | Prop::Plus(a, _)
            | Prop::Fuse(a, _) => a.mode(),
        }
    }

    /// Number of connectives and atoms.
    pub fn size(&self) -> usize {
        match self {
            Prop::Atom(..) | Prop::One(_) => 1,
            Prop::Up(_, a) | Prop::Down(_, a) => 1 + a.size(),
            Prop::LeftImp(a, b)
            | Prop::RightImp(a, b)
            | Prop::With(a, b)
            | Prop::Plus(a, b)
            | Prop::Fuse(a, b) => 1 + a.size() + b.size(),
        }
    }

    pub fn is_atom(&self) -> bool {
        matches!(self, Prop::Atom(..))
    }

    /// Checks mode agreement and the shift side conditions, returning the mode.
    pub fn check(&self, theory: &ModeTheory) -> Result<ModeId, PropError> {
        match self {
            Prop::Atom(_, m) | Prop::One(m) => {
                if m.0 >= theory.len() {
                    return Err(PropError::Mode(ModeError::UnknownMode(format!("#{}", m.0))));
                }
                Ok(*m)
            }
            Prop::LeftImp(a, b)
            | Prop::RightImp(a, b)
            | Prop::With(a, b)
            | Prop::Plus(a, b)
            | Prop::Fuse(a, b) => {
                let ma = a.check(theory)?;
                let mb = b.check(theory)?;
                if ma != mb {
                    return Err(PropError::ModeMismatch {
                        subterm: b.display(theory).to_string(),
                        expected: theory.name(ma).to_string(),
                        found: theory.name(mb).to_string(),
                    });
                }
                Ok(ma)
            }
            Prop::Up(m, a) => {
                let l = a.check(theory)?;
                if m.0 >= theory.len() {
                    return Err(PropError::Mode(ModeError::UnknownMode(format!("#{}", m.0))));
                }
                if !theory.geq(*m, l) {
                    return Err(PropError::ShiftViolation {
                        shift: "up",
                        outer: theory.name(*m).to_string(),
                        inner: theory.name(l).to_string(),
                    });
                }
                Ok(*m)
            }
            Prop::Down(m, a) => {
                let k = a.check(theory)?;
                if m.0 >= theory.len() {
                    return Err(PropError::Mode(ModeError::UnknownMode(format!("#{}", m.0))));
                }
                if !theory.geq(k, *m) {
                    return Err(PropError::ShiftViolation {
                        shift: "down",
                        outer: theory.name(*m).to_string(),
                        inner: theory.name(k).to_string(),
                    });
                }
                Ok(*m)
            }
        }
    }

    pub fn display<'a>(&'a self, theory: &'a ModeTheory) -> PropDisplay<'a> {
        PropDisplay { prop: self, theory }
    }

    fn level(&self) -> u8 {
        match self {
            Prop::LeftImp(..) | Prop::RightImp(..) => 1,
            Prop::With(..) | Prop::Plus(..) => 2,
            Prop::Fuse(..) => 3,
            _ => 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PropError {
    #[error("mode mismatch at `{subterm}`: expected {expected}, found {found}")]
    ModeMismatch {
        subterm: String,
        expected: String,
        found: String,
    },
    #[error("{shift}[{outer}] applied to a proposition at mode {inner} violates the mode order")]
    ShiftViolation {
        shift: &'static str,
        outer: String,
        inner: String,
    },
    #[error("unknown atom `{0}`")]
    UnknownAtom(String),
    #[error("atom `{name}` is declared at mode {declared}, used at {used}")]
    AtomMode {
        name: String,
        declared: String,
        used: String,
    },
    #[error(transparent)]
    Mode(#[from] ModeError),
}

/// Printer with minimal parentheses.
pub struct PropDisplay<'a> {
    prop: &'a Prop,
    theory: &'a ModeTheory,
}

impl PropDisplay<'_> {
    fn write(&self, p: &Prop, min: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let paren = p.level() < min;
        if paren {
            f.write_str("(")?;
        }
        let t = self.theory;
        match p {
            Prop::Atom(n, _) => f.write_str(n)?,
            Prop::One(m) => write!(f, "1[{}]", t.name(*m))?,
            Prop::Up(m, a) => {
                write!(f, "up[{}] ", t.name(*m))?;
                self.write(a, 4, f)?;
            }
            Prop::Down(m, a) => {
                write!(f, "down[{}] ", t.name(*m))?;
                self.write(a, 4, f)?;
            }
            Prop::LeftImp(a, b) | Prop::RightImp(a, b) => {
                self.write(a, 2, f)?;
                f.write_str(if matches!(p, Prop::LeftImp(..)) { " >-> " } else { " ->> " })?;
                self.write(b, 1, f)?;
            }
            Prop::With(a, b) | Prop::Plus(a, b) => {
                self.write(a, 2, f)?;
                f.write_str(if matches!(p, Prop::With(..)) { " & " } else { " + " })?;
                self.write(b, 3, f)?;
            }
            Prop::Fuse(a, b) => {
                self.write(a, 3, f)?;
                f.write_str(" * ")?;
                self.write(b, 4, f)?;
            }
        }
        if paren {
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl fmt::Display for PropDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write(self.prop, 0, f)
    }
}

/// A labeled antecedent `x : A`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Hyp {
    pub var: String,
    pub prop: Prop,
}

impl Hyp {
    pub fn new(var: &str, prop: Prop) -> Self {
        Hyp {
            var: var.to_string(),
            prop,
        }
    }
}

/// An ordered context. Variables may repeat (after contraction) but every
/// occurrence of a variable labels the same proposition.
///
/// The ordering is the canonical one used for context sets: length first,
/// then the variable names, then the propositions.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Ctx(pub Vec<Hyp>);

impl Ctx {
    pub fn new() -> Self {
        Ctx(Vec::new())
    }

    pub fn vars(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(|h| h.var.as_str())
    }

    pub fn contains_var(&self, x: &str) -> bool {
        self.0.iter().any(|h| h.var == x)
    }

    pub fn count_var(&self, x: &str) -> usize {
        self.0.iter().filter(|h| h.var == x).count()
    }

    /// Position of the `occ`-th occurrence of `x`.
    pub fn position(&self, x: &str, occ: usize) -> Option<usize> {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, h)| h.var == x)
            .nth(occ)
            .map(|(i, _)| i)
    }

    /// Occurrence index of the hypothesis at `pos` among those sharing its name.
    pub fn occurrence_at(&self, pos: usize) -> usize {
        let x = &self.0[pos].var;
        self.0[..pos].iter().filter(|h| &h.var == x).count()
    }

    pub fn lookup(&self, x: &str) -> Option<&Prop> {
        self.0.iter().find(|h| h.var == x).map(|h| &h.prop)
    }

    /// No variable repeated.
    pub fn is_normal(&self) -> bool {
        let mut seen = std::collections::HashSet::new();
        self.0.iter().all(|h| seen.insert(h.var.as_str()))
    }

    /// All occurrences of a variable label the same proposition.
    pub fn is_consistent(&self) -> bool {
        let mut seen: BTreeMap<&str, &Prop> = BTreeMap::new();
        self.0
            .iter()
            .all(|h| *seen.entry(h.var.as_str()).or_insert(&h.prop) == &h.prop)
    }

    pub fn slice(&self, lo: usize, hi: usize) -> Ctx {
        Ctx(self.0[lo..hi].to_vec())
    }

    pub fn concat(&self, other: &Ctx) -> Ctx {
        let mut v = self.0.clone();
        v.extend(other.0.iter().cloned());
        Ctx(v)
    }

    /// `self[..lo] ++ mid ++ self[hi..]`.
    pub fn splice(&self, lo: usize, hi: usize, mid: &Ctx) -> Ctx {
        let mut v = self.0[..lo].to_vec();
        v.extend(mid.0.iter().cloned());
        v.extend(self.0[hi..].iter().cloned());
        Ctx(v)
    }

    pub fn display<'a>(&'a self, theory: &'a ModeTheory) -> CtxDisplay<'a> {
        CtxDisplay { ctx: self, theory }
    }
}

impl Deref for Ctx {
    type Target = Vec<Hyp>;
    fn deref(&self) -> &Vec<Hyp> {
        &self.0
    }
}

impl DerefMut for Ctx {
    fn deref_mut(&mut self) -> &mut Vec<Hyp> {
        &mut self.0
    }
}

impl FromIterator<Hyp> for Ctx {
    fn from_iter<I: IntoIterator<Item = Hyp>>(iter: I) -> Self {
        Ctx(iter.into_iter().collect())
    }
}

impl Ord for Ctx {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .len()
            .cmp(&other.0.len())
            .then_with(|| self.vars().cmp(other.vars()))
            .then_with(|| self.0.iter().map(|h| &h.prop).cmp(other.0.iter().map(|h| &h.prop)))
    }
}

impl PartialOrd for Ctx {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

pub struct CtxDisplay<'a> {
    ctx: &'a Ctx,
    theory: &'a ModeTheory,
}

impl fmt::Display for CtxDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.ctx.is_empty() {
            return f.write_str(".");
        }
        for (i, h) in self.ctx.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "({} : {})", h.var, h.prop.display(self.theory))?;
        }
        Ok(())
    }
}

/// An unordered context: one proposition per variable.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct UnorderedCtx(BTreeMap<String, Prop>);

impl UnorderedCtx {
    pub fn new() -> Self {
        Self::default()
    }

    /// Fails if `x` is already bound to a different proposition.
    pub fn insert(&mut self, x: &str, p: Prop) -> bool {
        match self.0.get(x) {
            Some(q) => *q == p,
            None => {
                self.0.insert(x.to_string(), p);
                true
            }
        }
    }

    pub fn extended(&self, x: &str, p: &Prop) -> UnorderedCtx {
        let mut g = self.clone();
        g.0.insert(x.to_string(), p.clone());
        g
    }

    pub fn get(&self, x: &str) -> Option<&Prop> {
        self.0.get(x)
    }

    pub fn contains(&self, x: &str) -> bool {
        self.0.contains_key(x)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Prop)> {
        self.0.iter().map(|(k, v)| (k.as_str(), v))
    }

    /// `self ⊇ ctx` as labeled hypotheses.
    pub fn covers(&self, ctx: &Ctx) -> bool {
        ctx.iter().all(|h| self.0.get(&h.var) == Some(&h.prop))
    }

    pub fn union(&self, other: &UnorderedCtx) -> Option<UnorderedCtx> {
        let mut g = self.clone();
        for (x, p) in other.iter() {
            if !g.insert(x, p.clone()) {
                return None;
            }
        }
        Some(g)
    }

    pub fn to_ctx(&self) -> Ctx {
        self.0.iter().map(|(x, p)| Hyp::new(x, p.clone())).collect()
    }
}

impl From<&Ctx> for UnorderedCtx {
    fn from(ctx: &Ctx) -> Self {
        let mut g = UnorderedCtx::new();
        for h in ctx.iter() {
            g.insert(&h.var, h.prop.clone());
        }
        g
    }
}

/// A mode theory together with declared atoms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Signature {
    pub theory: ModeTheory,
    pub atoms: BTreeMap<String, ModeId>,
}

impl Signature {
    pub fn new(theory: ModeTheory) -> Self {
        Signature {
            theory,
            atoms: BTreeMap::new(),
        }
    }

    pub fn with_atom(mut self, name: &str, mode: &str) -> Self {
        let m = self.theory.lookup(mode).expect("known mode");
        self.atoms.insert(name.to_string(), m);
        self
    }

    pub fn atom(&self, name: &str) -> Result<Prop, PropError> {
        self.atoms
            .get(name)
            .map(|m| Prop::Atom(name.to_string(), *m))
            .ok_or_else(|| PropError::UnknownAtom(name.to_string()))
    }

    pub fn mode(&self, name: &str) -> Result<ModeId, ModeError> {
        self.theory.lookup(name)
    }

    /// [`Prop::check`] plus declared-atom checks.
    pub fn check_prop(&self, p: &Prop) -> Result<ModeId, PropError> {
        fn atoms(sig: &Signature, p: &Prop) -> Result<(), PropError> {
            match p {
                Prop::Atom(n, m) => match sig.atoms.get(n) {
                    None => Err(PropError::UnknownAtom(n.clone())),
                    Some(d) if d != m => Err(PropError::AtomMode {
                        name: n.clone(),
                        declared: sig.theory.name(*d).to_string(),
                        used: sig.theory.name(*m).to_string(),
                    }),
                    Some(_) => Ok(()),
                },
                Prop::One(_) => Ok(()),
                Prop::Up(_, a) | Prop::Down(_, a) => atoms(sig, a),
                Prop::LeftImp(a, b)
                | Prop::RightImp(a, b)
                | Prop::With(a, b)
                | Prop::Plus(a, b)
                | Prop::Fuse(a, b) => {
                    atoms(sig, a)?;
                    atoms(sig, b)
                }
            }
        }
        atoms(self, p)?;
        p.check(&self.theory)
    }
}
