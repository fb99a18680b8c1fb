//! Natural deduction with explicit structural rules.
//!
//! The judgment `Γ |- A ⊣ Ω` is checked with `Γ` and `A` given and the output
//! context `Ω` synthesized. Checking is bidirectional: hypotheses, annotations
//! and negative eliminations synthesize their proposition, everything else is
//! checked against a goal. Positive eliminations carry a span, the length of
//! `Ω_L` in the body's output, telling where the bound hypotheses sit.

use std::fmt;

use thiserror::Error;

use crate::modes::ModeTheory;
use crate::parse::{structural_from_form, ParseError, Sexp};
use crate::prop::{Ctx, Hyp, Prop, Signature, UnorderedCtx};
use crate::seq::fmt_path;
use crate::structural::{StructError, Structural};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum NdRule {
    Hyp { x: String },
    /// Type annotation: lets a checked derivation stand where a synthesized
    /// one is required.
    Ann { prop: Prop },
    OneI,
    OneE { span: usize },
    FuseI,
    FuseE { span: usize, left: String, right: String },
    PlusI1,
    PlusI2,
    PlusE { span: usize, x: String },
    WithI,
    WithE1,
    WithE2,
    RightImpI { x: String },
    RightImpE,
    LeftImpI { x: String },
    LeftImpE,
    UpI,
    UpE,
    DownI,
    DownE { span: usize, x: String },
    Struct(Structural),
}

impl NdRule {
    pub fn name(&self) -> &'static str {
        match self {
            NdRule::Hyp { .. } => "hyp",
            NdRule::Ann { .. } => "ann",
            NdRule::OneI => "oneI",
            NdRule::OneE { .. } => "oneE",
            NdRule::FuseI => "fuseI",
            NdRule::FuseE { .. } => "fuseE",
            NdRule::PlusI1 => "plusI1",
            NdRule::PlusI2 => "plusI2",
            NdRule::PlusE { .. } => "plusE",
            NdRule::WithI => "withI",
            NdRule::WithE1 => "withE1",
            NdRule::WithE2 => "withE2",
            NdRule::RightImpI { .. } => "impRI",
            NdRule::RightImpE => "impRE",
            NdRule::LeftImpI { .. } => "impLI",
            NdRule::LeftImpE => "impLE",
            NdRule::UpI => "upI",
            NdRule::UpE => "upE",
            NdRule::DownI => "downI",
            NdRule::DownE { .. } => "downE",
            NdRule::Struct(s) => s.name(),
        }
    }

    pub fn arity(&self) -> usize {
        match self {
            NdRule::Hyp { .. } | NdRule::OneI => 0,
            NdRule::OneE { .. }
            | NdRule::FuseI
            | NdRule::FuseE { .. }
            | NdRule::WithI
            | NdRule::RightImpE
            | NdRule::LeftImpE
            | NdRule::DownE { .. } => 2,
            NdRule::PlusE { .. } => 3,
            _ => 1,
        }
    }

    /// Binders with the children they scope over.
    pub fn binders(&self) -> Vec<(&str, &'static [usize])> {
        match self {
            NdRule::FuseE { left, right, .. } => vec![(left, &[1]), (right, &[1])],
            NdRule::PlusE { x, .. } => vec![(x, &[1, 2])],
            NdRule::DownE { x, .. } => vec![(x, &[1])],
            NdRule::RightImpI { x } | NdRule::LeftImpI { x } => vec![(x, &[0])],
            _ => vec![],
        }
    }

    fn binders_mut(&mut self) -> Vec<&mut String> {
        match self {
            NdRule::FuseE { left, right, .. } => vec![left, right],
            NdRule::PlusE { x, .. }
            | NdRule::DownE { x, .. }
            | NdRule::RightImpI { x }
            | NdRule::LeftImpI { x } => vec![x],
            _ => vec![],
        }
    }

    /// Whether a node of this kind synthesizes its proposition.
    pub fn synthesizes(&self) -> bool {
        matches!(
            self,
            NdRule::Hyp { .. }
                | NdRule::Ann { .. }
                | NdRule::RightImpE
                | NdRule::LeftImpE
                | NdRule::WithE1
                | NdRule::WithE2
                | NdRule::UpE
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct NdDeriv {
    pub rule: NdRule,
    pub children: Vec<NdDeriv>,
}

impl NdDeriv {
    pub fn new(rule: NdRule, children: Vec<NdDeriv>) -> Self {
        NdDeriv { rule, children }
    }

    pub fn leaf(rule: NdRule) -> Self {
        Self::new(rule, vec![])
    }

    pub fn unary(rule: NdRule, d: NdDeriv) -> Self {
        Self::new(rule, vec![d])
    }

    pub fn hyp(x: &str) -> Self {
        Self::leaf(NdRule::Hyp { x: x.to_string() })
    }

    pub fn size(&self) -> usize {
        1 + self.children.iter().map(NdDeriv::size).sum::<usize>()
    }

    /// Whether this node synthesizes, looking through structural nodes.
    pub fn synthesizes(&self) -> bool {
        match &self.rule {
            NdRule::Struct(_) => self.children[0].synthesizes(),
            r => r.synthesizes(),
        }
    }

    pub fn names(&self, out: &mut Vec<String>) {
        match &self.rule {
            NdRule::Hyp { x } => out.push(x.clone()),
            NdRule::Struct(Structural::Weak { var, .. }) => out.push(var.clone()),
            r => out.extend(r.binders().into_iter().map(|(b, _)| b.to_string())),
        }
        for c in &self.children {
            c.names(out);
        }
    }

    pub fn structural_count(&self) -> usize {
        usize::from(matches!(self.rule, NdRule::Struct(_)))
            + self.children.iter().map(NdDeriv::structural_count).sum::<usize>()
    }

    /// Renames free variables by `map` and, with a supply, every binder to a
    /// fresh name.
    pub fn rename(
        &self,
        map: &std::collections::HashMap<String, String>,
        mut supply: Option<&mut crate::fresh::NameSupply>,
    ) -> NdDeriv {
        let mut rule = self.rule.clone();
        match &mut rule {
            NdRule::Hyp { x } | NdRule::Struct(Structural::Weak { var: x, .. }) => {
                if let Some(n) = map.get(x.as_str()) {
                    *x = n.clone();
                }
            }
            _ => {}
        }
        let mut maps = vec![map.clone(); self.children.len()];
        let scopes: Vec<(String, Vec<usize>)> = rule
            .binders()
            .into_iter()
            .map(|(b, s)| (b.to_string(), s.to_vec()))
            .collect();
        let mut new_names = Vec::new();
        for (b, scope) in &scopes {
            let nb = match supply.as_deref_mut() {
                Some(s) => s.fresh(b),
                None => b.clone(),
            };
            for &i in scope {
                maps[i].insert(b.clone(), nb.clone());
            }
            new_names.push(nb);
        }
        for (slot, nb) in rule.binders_mut().into_iter().zip(new_names) {
            *slot = nb;
        }
        let children = self
            .children
            .iter()
            .zip(maps)
            .map(|(c, m)| c.rename(&m, supply.as_deref_mut()))
            .collect();
        NdDeriv { rule, children }
    }

    pub fn freshen(&self, supply: &mut crate::fresh::NameSupply) -> NdDeriv {
        self.rename(&Default::default(), Some(supply))
    }

    pub fn to_sexp(&self, theory: &ModeTheory) -> String {
        let mut s = String::new();
        self.write_sexp(theory, &mut s);
        s
    }

    fn write_sexp(&self, theory: &ModeTheory, out: &mut String) {
        use std::fmt::Write;
        out.push('(');
        match &self.rule {
            NdRule::Struct(s) => out.push_str(&s.to_sexp_head()),
            r => out.push_str(r.name()),
        }
        match &self.rule {
            NdRule::Hyp { x } | NdRule::RightImpI { x } | NdRule::LeftImpI { x } => {
                let _ = write!(out, " {x}");
            }
            NdRule::Ann { prop } => {
                let _ = write!(out, " [{}]", prop.display(theory));
            }
            NdRule::OneE { span } => {
                let _ = write!(out, " {span}");
            }
            NdRule::FuseE { span, left, right } => {
                let _ = write!(out, " {span} ");
                self.children[0].write_sexp(theory, out);
                let _ = write!(out, " ({left} {right}) ");
                self.children[1].write_sexp(theory, out);
                out.push(')');
                return;
            }
            NdRule::PlusE { span, x } | NdRule::DownE { span, x } => {
                let _ = write!(out, " {span} ");
                self.children[0].write_sexp(theory, out);
                let _ = write!(out, " {x}");
                for c in &self.children[1..] {
                    out.push(' ');
                    c.write_sexp(theory, out);
                }
                out.push(')');
                return;
            }
            _ => {}
        }
        for c in &self.children {
            out.push(' ');
            c.write_sexp(theory, out);
        }
        out.push(')');
    }

    pub fn from_sexp(sig: &Signature, s: &Sexp) -> Result<NdDeriv, ParseError> {
        let f = s.form()?;
        let a = f.args;
        let d = |i: usize| NdDeriv::from_sexp(sig, &a[i]);
        if let Some(st) = structural_from_form(&f)? {
            return Ok(NdDeriv::unary(NdRule::Struct(st), d(2)?));
        }
        let node = match f.head {
            "hyp" => {
                f.arity(1)?;
                NdDeriv::hyp(&a[0].var()?)
            }
            "ann" => {
                f.arity(2)?;
                NdDeriv::unary(NdRule::Ann { prop: a[0].prop(sig)? }, d(1)?)
            }
            "oneI" => {
                f.arity(0)?;
                NdDeriv::leaf(NdRule::OneI)
            }
            "oneE" => {
                f.arity(3)?;
                NdDeriv::new(NdRule::OneE { span: a[0].num()? }, vec![d(1)?, d(2)?])
            }
            "fuseI" | "withI" | "impRE" | "impLE" => {
                f.arity(2)?;
                let r = match f.head {
                    "fuseI" => NdRule::FuseI,
                    "withI" => NdRule::WithI,
                    "impRE" => NdRule::RightImpE,
                    _ => NdRule::LeftImpE,
                };
                NdDeriv::new(r, vec![d(0)?, d(1)?])
            }
            "fuseE" => {
                f.arity(4)?;
                let vs = a[2].list()?;
                if vs.len() != 2 {
                    return Err(ParseError::other(a[2].pos, "fuseE binds exactly two variables"));
                }
                NdDeriv::new(
                    NdRule::FuseE {
                        span: a[0].num()?,
                        left: vs[0].var()?,
                        right: vs[1].var()?,
                    },
                    vec![d(1)?, d(3)?],
                )
            }
            "plusI1" | "plusI2" | "withE1" | "withE2" | "upI" | "upE" | "downI" => {
                f.arity(1)?;
                let r = match f.head {
                    "plusI1" => NdRule::PlusI1,
                    "plusI2" => NdRule::PlusI2,
                    "withE1" => NdRule::WithE1,
                    "withE2" => NdRule::WithE2,
                    "upI" => NdRule::UpI,
                    "upE" => NdRule::UpE,
                    _ => NdRule::DownI,
                };
                NdDeriv::unary(r, d(0)?)
            }
            "plusE" => {
                f.arity(5)?;
                NdDeriv::new(
                    NdRule::PlusE {
                        span: a[0].num()?,
                        x: a[2].var()?,
                    },
                    vec![d(1)?, d(3)?, d(4)?],
                )
            }
            "downE" => {
                f.arity(4)?;
                NdDeriv::new(
                    NdRule::DownE {
                        span: a[0].num()?,
                        x: a[2].var()?,
                    },
                    vec![d(1)?, d(3)?],
                )
            }
            "impRI" | "impLI" => {
                f.arity(2)?;
                let x = a[0].var()?;
                let r = if f.head == "impRI" {
                    NdRule::RightImpI { x }
                } else {
                    NdRule::LeftImpI { x }
                };
                NdDeriv::unary(r, d(1)?)
            }
            other => {
                return Err(ParseError::syntax(
                    f.pos,
                    "a natural-deduction rule",
                    format!("`{other}`"),
                ))
            }
        };
        Ok(node)
    }
}

pub fn parse_nd_deriv(sig: &Signature, src: &str) -> Result<NdDeriv, ParseError> {
    NdDeriv::from_sexp(sig, &crate::parse::parse_sexp(src)?)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NdErrorKind {
    #[error("rule does not match: {0}")]
    Mismatch(String),
    #[error("premise outputs disagree: {0}")]
    OutputMismatch(String),
    #[error("scope violation: {0}")]
    ScopeViolation(String),
    #[error("side condition failed: {0}")]
    SideCondition(String),
    #[error("span mismatch: {0}")]
    SpanMismatch(String),
    #[error("binder `{0}` is not fresh")]
    Freshness(String),
    #[error("no hypothesis `{0}` in scope")]
    UnknownVar(String),
    #[error("cannot synthesize a proposition for `{0}`; annotate it")]
    NotSynthesizable(&'static str),
    #[error("expected {expected} premises, found {found}")]
    Arity { expected: usize, found: usize },
    #[error("ill-formed proposition: {0}")]
    IllFormed(String),
    #[error("internal inconsistency: {0}")]
    Invariant(String),
}

impl From<StructError> for NdErrorKind {
    fn from(e: StructError) -> Self {
        match e {
            StructError::NotInScope(v) => NdErrorKind::UnknownVar(v),
            StructError::Shape(s) => NdErrorKind::Mismatch(s),
            other => NdErrorKind::SideCondition(other.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct NdError {
    pub path: Vec<usize>,
    pub rule: &'static str,
    pub kind: NdErrorKind,
}

impl fmt::Display for NdError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "at {} ({}): {}", fmt_path(&self.path), self.rule, self.kind)
    }
}

type NdResult<T> = Result<T, NdError>;

pub(crate) struct Checker<'t> {
    pub theory: &'t ModeTheory,
    path: Vec<usize>,
}

impl<'t> Checker<'t> {
    pub fn new(theory: &'t ModeTheory) -> Self {
        Checker {
            theory,
            path: Vec::new(),
        }
    }

    fn err(&self, d: &NdDeriv, kind: NdErrorKind) -> NdError {
        NdError {
            path: self.path.clone(),
            rule: d.rule.name(),
            kind,
        }
    }

    fn show(&self, p: &Prop) -> String {
        p.display(self.theory).to_string()
    }

    fn child<T>(&mut self, i: usize, f: impl FnOnce(&mut Self) -> NdResult<T>) -> NdResult<T> {
        self.path.push(i);
        let r = f(self);
        if r.is_ok() {
            self.path.pop();
        }
        r
    }

    fn extend(&self, d: &NdDeriv, gamma: &UnorderedCtx, x: &str, p: &Prop) -> NdResult<UnorderedCtx> {
        if gamma.contains(x) {
            return Err(self.err(d, NdErrorKind::Freshness(x.to_string())));
        }
        Ok(gamma.extended(x, p))
    }

    /// Synthesizes the proposition and output context.
    pub fn synth(&mut self, d: &NdDeriv, gamma: &UnorderedCtx) -> NdResult<(Prop, Ctx)> {
        self.arity(d)?;
        match &d.rule {
            NdRule::Hyp { x } => {
                let p = gamma
                    .get(x)
                    .ok_or_else(|| self.err(d, NdErrorKind::UnknownVar(x.clone())))?;
                Ok((p.clone(), Ctx(vec![Hyp::new(x, p.clone())])))
            }
            NdRule::Ann { prop } => {
                prop.check(self.theory)
                    .map_err(|e| self.err(d, NdErrorKind::IllFormed(e.to_string())))?;
                let o = self.child(0, |c| c.check(&d.children[0], gamma, prop))?;
                Ok((prop.clone(), o))
            }
            NdRule::RightImpE | NdRule::LeftImpE => {
                let (fp, fo) = self.child(0, |c| c.synth(&d.children[0], gamma))?;
                let right = matches!(d.rule, NdRule::RightImpE);
                let (a, b) = match (&fp, right) {
                    (Prop::RightImp(a, b), true) | (Prop::LeftImp(a, b), false) => (a, b),
                    _ => {
                        return Err(self.err(
                            d,
                            NdErrorKind::Mismatch(format!(
                                "function has type {}",
                                self.show(&fp)
                            )),
                        ))
                    }
                };
                let ao = self.child(1, |c| c.check(&d.children[1], gamma, a))?;
                let out = if right { fo.concat(&ao) } else { ao.concat(&fo) };
                Ok(((**b).clone(), out))
            }
            NdRule::WithE1 | NdRule::WithE2 => {
                let (p, o) = self.child(0, |c| c.synth(&d.children[0], gamma))?;
                let Prop::With(a, b) = &p else {
                    return Err(self.err(d, NdErrorKind::Mismatch(format!("expected a with, found {}", self.show(&p)))));
                };
                let r = if matches!(d.rule, NdRule::WithE1) { a } else { b };
                Ok(((**r).clone(), o))
            }
            NdRule::UpE => {
                let (p, o) = self.child(0, |c| c.synth(&d.children[0], gamma))?;
                let Prop::Up(_, a) = &p else {
                    return Err(self.err(d, NdErrorKind::Mismatch(format!("expected an upshift, found {}", self.show(&p)))));
                };
                Ok(((**a).clone(), o))
            }
            NdRule::Struct(_) if d.children[0].synthesizes() => {
                let (p, _) = self.child(0, |c| c.synth(&d.children[0], gamma))?;
                let o = self.check(d, gamma, &p)?;
                Ok((p, o))
            }
            _ => Err(self.err(d, NdErrorKind::NotSynthesizable(d.rule.name()))),
        }
    }

    fn arity(&self, d: &NdDeriv) -> NdResult<()> {
        if d.children.len() == d.rule.arity() {
            Ok(())
        } else {
            Err(self.err(
                d,
                NdErrorKind::Arity {
                    expected: d.rule.arity(),
                    found: d.children.len(),
                },
            ))
        }
    }

    /// Checks against `goal` and returns the output context.
    pub fn check(&mut self, d: &NdDeriv, gamma: &UnorderedCtx, goal: &Prop) -> NdResult<Ctx> {
        self.arity(d)?;
        let r = goal.mode();
        let mismatch = |this: &Self, what: &str| {
            this.err(
                d,
                NdErrorKind::Mismatch(format!("expected {what}, goal is {}", this.show(goal))),
            )
        };
        match &d.rule {
            NdRule::Struct(st) => {
                let o = self.child(0, |c| c.check(&d.children[0], gamma, goal))?;
                st.conclusion_of(self.theory, &o, r, |v| gamma.get(v))
                    .map_err(|e| self.err(d, e.into()))
            }
            rule if rule.synthesizes() => {
                let (p, o) = self.synth(d, gamma)?;
                if &p != goal {
                    return Err(self.err(
                        d,
                        NdErrorKind::Mismatch(format!(
                            "synthesized {}, expected {}",
                            self.show(&p),
                            self.show(goal)
                        )),
                    ));
                }
                Ok(o)
            }
            NdRule::OneI => match goal {
                Prop::One(_) => Ok(Ctx::new()),
                _ => Err(mismatch(self, "1")),
            },
            NdRule::FuseI => {
                let Prop::Fuse(a, b) = goal else {
                    return Err(mismatch(self, "a fuse"));
                };
                let l = self.child(0, |c| c.check(&d.children[0], gamma, a))?;
                let rr = self.child(1, |c| c.check(&d.children[1], gamma, b))?;
                Ok(l.concat(&rr))
            }
            NdRule::PlusI1 | NdRule::PlusI2 => {
                let Prop::Plus(a, b) = goal else {
                    return Err(mismatch(self, "a sum"));
                };
                let g = if matches!(d.rule, NdRule::PlusI1) { a } else { b };
                self.child(0, |c| c.check(&d.children[0], gamma, g))
            }
            NdRule::WithI => {
                let Prop::With(a, b) = goal else {
                    return Err(mismatch(self, "a with"));
                };
                let l = self.child(0, |c| c.check(&d.children[0], gamma, a))?;
                let rr = self.child(1, |c| c.check(&d.children[1], gamma, b))?;
                if l != rr {
                    return Err(self.err(
                        d,
                        NdErrorKind::OutputMismatch(format!(
                            "{} vs {}",
                            l.display(self.theory),
                            rr.display(self.theory)
                        )),
                    ));
                }
                Ok(l)
            }
            NdRule::RightImpI { x } | NdRule::LeftImpI { x } => {
                let right = matches!(d.rule, NdRule::RightImpI { .. });
                let (a, b) = match (goal, right) {
                    (Prop::RightImp(a, b), true) | (Prop::LeftImp(a, b), false) => (a, b),
                    _ => return Err(mismatch(self, "a matching implication")),
                };
                let g2 = self.extend(d, gamma, x, a)?;
                let mut o = self.child(0, |c| c.check(&d.children[0], &g2, b))?;
                let h = Hyp::new(x, (**a).clone());
                let end = if right { o.last() } else { o.first() };
                if end != Some(&h) {
                    return Err(self.err(
                        d,
                        NdErrorKind::ScopeViolation(format!(
                            "body output {} does not {} `{x}`",
                            o.display(self.theory),
                            if right { "end with" } else { "start with" }
                        )),
                    ));
                }
                if right {
                    o.pop();
                } else {
                    o.remove(0);
                }
                if o.contains_var(x) {
                    return Err(self.err(d, NdErrorKind::ScopeViolation(format!("`{x}` escapes its scope"))));
                }
                Ok(o)
            }
            NdRule::UpI => {
                let Prop::Up(m, a) = goal else {
                    return Err(mismatch(self, "an upshift"));
                };
                let o = self.child(0, |c| c.check(&d.children[0], gamma, a))?;
                if !self.theory.context_geq(&o, *m) {
                    return Err(self.err(
                        d,
                        NdErrorKind::SideCondition(format!(
                            "output {} is not >= {}",
                            o.display(self.theory),
                            self.theory.name(*m)
                        )),
                    ));
                }
                Ok(o)
            }
            NdRule::DownI => {
                let Prop::Down(_, a) = goal else {
                    return Err(mismatch(self, "a downshift"));
                };
                let o = self.child(0, |c| c.check(&d.children[0], gamma, a))?;
                if !self.theory.context_geq(&o, a.mode()) {
                    return Err(self.err(d, NdErrorKind::Invariant("downI premise output below its mode".into())));
                }
                Ok(o)
            }
            NdRule::OneE { span } | NdRule::FuseE { span, .. } | NdRule::PlusE { span, .. } | NdRule::DownE { span, .. } => {
                self.positive_elim(d, gamma, goal, *span)
            }
            NdRule::Hyp { .. }
            | NdRule::Ann { .. }
            | NdRule::RightImpE
            | NdRule::LeftImpE
            | NdRule::WithE1
            | NdRule::WithE2
            | NdRule::UpE => unreachable!("synthesizing rules handled above"),
        }
    }

    fn positive_elim(&mut self, d: &NdDeriv, gamma: &UnorderedCtx, goal: &Prop, span: usize) -> NdResult<Ctx> {
        let (mp, mo) = self.child(0, |c| c.synth(&d.children[0], gamma))?;
        let m = mp.mode();
        if !self.theory.geq(m, goal.mode()) {
            return Err(self.err(
                d,
                NdErrorKind::SideCondition(format!(
                    "major premise mode {} is not >= {}",
                    self.theory.name(m),
                    self.theory.name(goal.mode())
                )),
            ));
        }
        let wrong = |this: &Self| {
            this.err(
                d,
                NdErrorKind::Mismatch(format!("major premise has type {}", this.show(&mp))),
            )
        };
        // per branch: the bound block and its extended context
        let branches: Vec<Vec<Hyp>> = match (&d.rule, &mp) {
            (NdRule::OneE { .. }, Prop::One(_)) => vec![vec![]],
            (NdRule::FuseE { left, right, .. }, Prop::Fuse(a, b)) => {
                if left == right {
                    return Err(self.err(d, NdErrorKind::Freshness(left.clone())));
                }
                vec![vec![Hyp::new(left, (**a).clone()), Hyp::new(right, (**b).clone())]]
            }
            (NdRule::PlusE { x, .. }, Prop::Plus(a, b)) => {
                vec![vec![Hyp::new(x, (**a).clone())], vec![Hyp::new(x, (**b).clone())]]
            }
            (NdRule::DownE { x, .. }, Prop::Down(_, a)) => vec![vec![Hyp::new(x, (**a).clone())]],
            _ => return Err(wrong(self)),
        };
        let mut sides: Option<(Ctx, Ctx)> = None;
        for (i, block) in branches.iter().enumerate() {
            let mut g2 = gamma.clone();
            for h in block {
                g2 = self.extend(d, &g2, &h.var, &h.prop)?;
            }
            let o = self.child(i + 1, |c| c.check(&d.children[i + 1], &g2, goal))?;
            let k = block.len();
            if span + k > o.len() || o[span..span + k] != block[..] {
                return Err(self.err(
                    d,
                    NdErrorKind::SpanMismatch(format!(
                        "body output {} does not hold the bound hypotheses at {span}",
                        o.display(self.theory)
                    )),
                ));
            }
            let l = o.slice(0, span);
            let rr = o.slice(span + k, o.len());
            for h in block {
                if l.contains_var(&h.var) || rr.contains_var(&h.var) {
                    return Err(self.err(
                        d,
                        NdErrorKind::ScopeViolation(format!("`{}` escapes its scope", h.var)),
                    ));
                }
            }
            match &sides {
                None => sides = Some((l, rr)),
                Some((l0, r0)) => {
                    if *l0 != l || *r0 != rr {
                        return Err(self.err(
                            d,
                            NdErrorKind::OutputMismatch("plusE branches use different contexts".into()),
                        ));
                    }
                }
            }
        }
        let (l, rr) = sides.expect("at least one branch");
        Ok(l.concat(&mo).concat(&rr))
    }
}

/// Checks `d` under `gamma` against `goal` and returns its output context.
pub fn check_nd(theory: &ModeTheory, d: &NdDeriv, gamma: &UnorderedCtx, goal: &Prop) -> Result<Ctx, NdError> {
    let root = |kind| NdError {
        path: vec![],
        rule: d.rule.name(),
        kind,
    };
    goal.check(theory)
        .map_err(|e| root(NdErrorKind::IllFormed(e.to_string())))?;
    for (_, p) in gamma.iter() {
        p.check(theory)
            .map_err(|e| root(NdErrorKind::IllFormed(e.to_string())))?;
    }
    let o = Checker::new(theory).check(d, gamma, goal)?;
    if !gamma.covers(&o) || !theory.context_geq(&o, goal.mode()) {
        return Err(root(NdErrorKind::Invariant(format!(
            "output {} violates the output invariant",
            o.display(theory)
        ))));
    }
    Ok(o)
}

/// Synthesizes the proposition of `d` under `gamma`, if `d` synthesizes.
pub fn synth_nd(theory: &ModeTheory, d: &NdDeriv, gamma: &UnorderedCtx) -> Result<(Prop, Ctx), NdError> {
    Checker::new(theory).synth(d, gamma)
}
