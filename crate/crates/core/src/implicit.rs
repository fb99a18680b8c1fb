//! Natural deduction with implicit structural rules.
//!
//! A skeleton is a derivation without structural rules or positions. Checking
//! computes the set `Ξ` of normal output contexts the skeleton can have. Each
//! member remembers how it arose (the member chosen from every premise and
//! the reduction trace), so an explicit derivation for any member is rebuilt
//! by replay.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::modes::{ModeId, ModeTheory};
use crate::nd::{NdDeriv, NdRule};
use crate::nf::{normal_forms, normal_forms_traced, ContextSet, NfError};
use crate::parse::{ParseError, Sexp};
use crate::prop::{Ctx, Hyp, Prop, Signature, UnorderedCtx};
use crate::seq::fmt_path;
use crate::structural::Structural;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum SkRule {
    Hyp { x: String },
    Ann { prop: Prop },
    OneI,
    OneE,
    FuseI,
    FuseE { left: String, right: String },
    PlusI1,
    PlusI2,
    PlusE { x: String },
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
    DownE { x: String },
}

impl SkRule {
    pub fn name(&self) -> &'static str {
        self.to_nd(0).name()
    }

    pub fn arity(&self) -> usize {
        self.to_nd(0).arity()
    }

    fn synthesizes(&self) -> bool {
        self.to_nd(0).synthesizes()
    }

    fn to_nd(&self, span: usize) -> NdRule {
        match self.clone() {
            SkRule::Hyp { x } => NdRule::Hyp { x },
            SkRule::Ann { prop } => NdRule::Ann { prop },
            SkRule::OneI => NdRule::OneI,
            SkRule::OneE => NdRule::OneE { span },
            SkRule::FuseI => NdRule::FuseI,
            SkRule::FuseE { left, right } => NdRule::FuseE { span, left, right },
            SkRule::PlusI1 => NdRule::PlusI1,
            SkRule::PlusI2 => NdRule::PlusI2,
            SkRule::PlusE { x } => NdRule::PlusE { span, x },
            SkRule::WithI => NdRule::WithI,
            SkRule::WithE1 => NdRule::WithE1,
            SkRule::WithE2 => NdRule::WithE2,
            SkRule::RightImpI { x } => NdRule::RightImpI { x },
            SkRule::RightImpE => NdRule::RightImpE,
            SkRule::LeftImpI { x } => NdRule::LeftImpI { x },
            SkRule::LeftImpE => NdRule::LeftImpE,
            SkRule::UpI => NdRule::UpI,
            SkRule::UpE => NdRule::UpE,
            SkRule::DownI => NdRule::DownI,
            SkRule::DownE { x } => NdRule::DownE { span, x },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Skeleton {
    pub rule: SkRule,
    pub children: Vec<Skeleton>,
}

impl Skeleton {
    pub fn new(rule: SkRule, children: Vec<Skeleton>) -> Self {
        Skeleton { rule, children }
    }

    pub fn size(&self) -> usize {
        1 + self.children.iter().map(Skeleton::size).sum::<usize>()
    }

    /// Drops structural nodes and positions from an explicit derivation.
    pub fn erase(d: &NdDeriv) -> Skeleton {
        let rule = match d.rule.clone() {
            NdRule::Struct(_) => return Skeleton::erase(&d.children[0]),
            NdRule::Hyp { x } => SkRule::Hyp { x },
            NdRule::Ann { prop } => SkRule::Ann { prop },
            NdRule::OneI => SkRule::OneI,
            NdRule::OneE { .. } => SkRule::OneE,
            NdRule::FuseI => SkRule::FuseI,
            NdRule::FuseE { left, right, .. } => SkRule::FuseE { left, right },
            NdRule::PlusI1 => SkRule::PlusI1,
            NdRule::PlusI2 => SkRule::PlusI2,
            NdRule::PlusE { x, .. } => SkRule::PlusE { x },
            NdRule::WithI => SkRule::WithI,
            NdRule::WithE1 => SkRule::WithE1,
            NdRule::WithE2 => SkRule::WithE2,
            NdRule::RightImpI { x } => SkRule::RightImpI { x },
            NdRule::RightImpE => SkRule::RightImpE,
            NdRule::LeftImpI { x } => SkRule::LeftImpI { x },
            NdRule::LeftImpE => SkRule::LeftImpE,
            NdRule::UpI => SkRule::UpI,
            NdRule::UpE => SkRule::UpE,
            NdRule::DownI => SkRule::DownI,
            NdRule::DownE { x, .. } => SkRule::DownE { x },
        };
        Skeleton::new(rule, d.children.iter().map(Skeleton::erase).collect())
    }

    pub fn to_sexp(&self, theory: &ModeTheory) -> String {
        let mut out = String::new();
        self.write_sexp(theory, &mut out);
        out
    }

    fn write_sexp(&self, theory: &ModeTheory, out: &mut String) {
        use std::fmt::Write;
        let _ = write!(out, "({}", self.rule.name());
        let rest: &[Skeleton] = match &self.rule {
            SkRule::Hyp { x } | SkRule::RightImpI { x } | SkRule::LeftImpI { x } => {
                let _ = write!(out, " {x}");
                &self.children
            }
            SkRule::Ann { prop } => {
                let _ = write!(out, " [{}]", prop.display(theory));
                &self.children
            }
            SkRule::FuseE { left, right } => {
                out.push(' ');
                self.children[0].write_sexp(theory, out);
                let _ = write!(out, " ({left} {right})");
                &self.children[1..]
            }
            SkRule::PlusE { x } | SkRule::DownE { x } => {
                out.push(' ');
                self.children[0].write_sexp(theory, out);
                let _ = write!(out, " {x}");
                &self.children[1..]
            }
            _ => &self.children,
        };
        for c in rest {
            out.push(' ');
            c.write_sexp(theory, out);
        }
        out.push(')');
    }

    pub fn from_sexp(sig: &Signature, s: &Sexp) -> Result<Skeleton, ParseError> {
        let f = s.form()?;
        let a = f.args;
        let sk = |i: usize| Skeleton::from_sexp(sig, &a[i]);
        let one = |r: SkRule| -> Result<Skeleton, ParseError> {
            f.arity(1)?;
            Ok(Skeleton::new(r, vec![sk(0)?]))
        };
        let two = |r: SkRule| -> Result<Skeleton, ParseError> {
            f.arity(2)?;
            Ok(Skeleton::new(r, vec![sk(0)?, sk(1)?]))
        };
        match f.head {
            "hyp" => {
                f.arity(1)?;
                Ok(Skeleton::new(SkRule::Hyp { x: a[0].var()? }, vec![]))
            }
            "ann" => {
                f.arity(2)?;
                Ok(Skeleton::new(SkRule::Ann { prop: a[0].prop(sig)? }, vec![sk(1)?]))
            }
            "oneI" => {
                f.arity(0)?;
                Ok(Skeleton::new(SkRule::OneI, vec![]))
            }
            "oneE" => two(SkRule::OneE),
            "fuseI" => two(SkRule::FuseI),
            "withI" => two(SkRule::WithI),
            "impRE" => two(SkRule::RightImpE),
            "impLE" => two(SkRule::LeftImpE),
            "plusI1" => one(SkRule::PlusI1),
            "plusI2" => one(SkRule::PlusI2),
            "withE1" => one(SkRule::WithE1),
            "withE2" => one(SkRule::WithE2),
            "upI" => one(SkRule::UpI),
            "upE" => one(SkRule::UpE),
            "downI" => one(SkRule::DownI),
            "impRI" | "impLI" => {
                f.arity(2)?;
                let x = a[0].var()?;
                let r = if f.head == "impRI" {
                    SkRule::RightImpI { x }
                } else {
                    SkRule::LeftImpI { x }
                };
                Ok(Skeleton::new(r, vec![sk(1)?]))
            }
            "fuseE" => {
                f.arity(3)?;
                let vs = a[1].list()?;
                if vs.len() != 2 {
                    return Err(ParseError::other(a[1].pos, "fuseE binds exactly two variables"));
                }
                let r = SkRule::FuseE {
                    left: vs[0].var()?,
                    right: vs[1].var()?,
                };
                Ok(Skeleton::new(r, vec![sk(0)?, sk(2)?]))
            }
            "plusE" => {
                f.arity(4)?;
                Ok(Skeleton::new(SkRule::PlusE { x: a[1].var()? }, vec![sk(0)?, sk(2)?, sk(3)?]))
            }
            "downE" => {
                f.arity(3)?;
                Ok(Skeleton::new(SkRule::DownE { x: a[1].var()? }, vec![sk(0)?, sk(2)?]))
            }
            other => Err(ParseError::syntax(f.pos, "a skeleton rule", format!("`{other}`"))),
        }
    }
}

pub fn parse_skeleton(sig: &Signature, src: &str) -> Result<Skeleton, ParseError> {
    Skeleton::from_sexp(sig, &crate::parse::parse_sexp(src)?)
}

/// `Ξ1 Ξ2`: pairwise concatenation.
pub fn set_concat(a: &ContextSet, b: &ContextSet) -> ContextSet {
    a.iter().flat_map(|x| b.iter().map(move |y| x.concat(y))).collect()
}

/// `{Ω | Ω (x:A) ∈ Ξ}`.
pub fn filter_ends_with(xi: &ContextSet, h: &Hyp) -> ContextSet {
    xi.iter()
        .filter(|c| c.last() == Some(h))
        .map(|c| c.slice(0, c.len() - 1))
        .collect()
}

/// `{Ω | (x:A) Ω ∈ Ξ}`.
pub fn filter_starts_with(xi: &ContextSet, h: &Hyp) -> ContextSet {
    xi.iter()
        .filter(|c| c.first() == Some(h))
        .map(|c| c.slice(1, c.len()))
        .collect()
}

/// Members of `Ξ` whose every hypothesis has mode `>= m`.
pub fn filter_mode(theory: &ModeTheory, xi: &ContextSet, m: ModeId) -> ContextSet {
    xi.iter().filter(|c| theory.context_geq(c, m)).cloned().collect()
}

/// Every `(Ω_L, Ω_R)` with `Ω_L block Ω_R ∈ Ξ`.
pub fn filter_spans(xi: &ContextSet, block: &[Hyp]) -> BTreeSet<(Ctx, Ctx)> {
    let k = block.len();
    let mut out = BTreeSet::new();
    for c in xi {
        for p in 0..=c.len().saturating_sub(k) {
            if c.len() >= k && c[p..p + k] == *block {
                out.insert((c.slice(0, p), c.slice(p + k, c.len())));
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ImplicitErrorKind {
    #[error("rule does not match: {0}")]
    Mismatch(String),
    #[error("no hypothesis `{0}` in scope")]
    UnknownVar(String),
    #[error("scope violation: `{0}` is already bound")]
    ScopeViolation(String),
    #[error("cannot synthesize a proposition for `{0}`; annotate it")]
    NotSynthesizable(&'static str),
    #[error("ill-formed skeleton: {0}")]
    IllFormedSkeleton(String),
    #[error("major premise mode is not above the goal mode")]
    ModeOrder,
    #[error(transparent)]
    Nf(#[from] NfError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct ImplicitError {
    pub path: Vec<usize>,
    pub rule: &'static str,
    pub kind: ImplicitErrorKind,
}

impl fmt::Display for ImplicitError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "at {} ({}): {}", fmt_path(&self.path), self.rule, self.kind)
    }
}

/// How a member of `Ξ` was obtained: the member used from each premise, the
/// span of positive eliminations, and the reduction steps applied after.
#[derive(Debug, Clone)]
struct Prov {
    picks: Vec<Ctx>,
    span: usize,
    trace: Vec<Structural>,
}

/// `Ξ` at a node together with the provenance tree below it.
#[derive(Debug, Clone)]
pub struct Traced {
    members: BTreeMap<Ctx, Prov>,
    /// Members whose normal forms already cover every member. Rules that
    /// normalize a concatenation only need to combine these.
    seeds: BTreeSet<Ctx>,
    children: Vec<Traced>,
}

impl Traced {
    pub fn xi(&self) -> ContextSet {
        self.members.keys().cloned().collect()
    }
}

struct Checker<'t> {
    theory: &'t ModeTheory,
    path: Vec<usize>,
}

type Members = BTreeMap<Ctx, Prov>;

impl Checker<'_> {
    fn err(&self, s: &Skeleton, kind: ImplicitErrorKind) -> ImplicitError {
        ImplicitError {
            path: self.path.clone(),
            rule: s.rule.name(),
            kind,
        }
    }

    fn child<T>(&mut self, i: usize, f: impl FnOnce(&mut Self) -> Result<T, ImplicitError>) -> Result<T, ImplicitError> {
        self.path.push(i);
        let r = f(self);
        if r.is_ok() {
            self.path.pop();
        }
        r
    }

    fn show(&self, p: &Prop) -> String {
        p.display(self.theory).to_string()
    }

    fn extend(&self, s: &Skeleton, gamma: &UnorderedCtx, h: &Hyp) -> Result<UnorderedCtx, ImplicitError> {
        if gamma.contains(&h.var) {
            return Err(self.err(s, ImplicitErrorKind::ScopeViolation(h.var.clone())));
        }
        Ok(gamma.extended(&h.var, &h.prop))
    }

    /// Normalizes `pre` at mode `r` and records every normal form not seen
    /// yet.
    #[allow(clippy::too_many_arguments)]
    fn normalize(
        &self,
        s: &Skeleton,
        gamma: &UnorderedCtx,
        r: ModeId,
        pre: &Ctx,
        picks: Vec<Ctx>,
        span: usize,
        out: &mut Members,
        seeds: &mut BTreeSet<Ctx>,
    ) -> Result<(), ImplicitError> {
        let nfs = normal_forms_traced(self.theory, gamma, r, pre).map_err(|e| self.err(s, e.into()))?;
        if nfs.contains_key(pre) {
            seeds.insert(pre.clone());
        } else {
            // Shortest first: a greedy cover of the results by their own normal forms.
            let mut by_len: Vec<&Ctx> = nfs.keys().collect();
            by_len.sort_by_key(|c| c.len());
            let mut covered = ContextSet::new();
            for c in by_len {
                if !covered.contains(c) {
                    covered.extend(normal_forms(self.theory, gamma, r, c).map_err(|e| self.err(s, e.into()))?);
                    seeds.insert(c.clone());
                }
            }
        }
        for (c, trace) in nfs {
            out.entry(c).or_insert_with(|| Prov {
                picks: picks.clone(),
                span,
                trace,
            });
        }
        Ok(())
    }

    fn keep(c: &Ctx, picks: Vec<Ctx>) -> (Ctx, Prov) {
        (
            c.clone(),
            Prov {
                picks,
                span: 0,
                trace: vec![],
            },
        )
    }

    fn synth(&mut self, s: &Skeleton, gamma: &UnorderedCtx) -> Result<(Prop, Traced), ImplicitError> {
        self.arity(s)?;
        match &s.rule {
            SkRule::Hyp { x } => {
                let p = gamma
                    .get(x)
                    .ok_or_else(|| self.err(s, ImplicitErrorKind::UnknownVar(x.clone())))?
                    .clone();
                let mut members = Members::new();
                let mut seeds = BTreeSet::new();
                let pre = Ctx(vec![Hyp::new(x, p.clone())]);
                self.normalize(s, gamma, p.mode(), &pre, vec![], 0, &mut members, &mut seeds)?;
                Ok((
                    p,
                    Traced {
                        members,
                        seeds,
                        children: vec![],
                    },
                ))
            }
            SkRule::Ann { prop } => {
                prop.check(self.theory)
                    .map_err(|e| self.err(s, ImplicitErrorKind::Mismatch(e.to_string())))?;
                let t = self.child(0, |c| c.check(&s.children[0], gamma, prop))?;
                let members = t.members.keys().map(|c| Self::keep(c, vec![c.clone()])).collect();
                let seeds = t.seeds.clone();
                Ok((
                    prop.clone(),
                    Traced {
                        members,
                        seeds,
                        children: vec![t],
                    },
                ))
            }
            SkRule::RightImpE | SkRule::LeftImpE => {
                let right = matches!(s.rule, SkRule::RightImpE);
                let (fp, tf) = self.child(0, |c| c.synth(&s.children[0], gamma))?;
                let (a, b) = match (&fp, right) {
                    (Prop::RightImp(a, b), true) | (Prop::LeftImp(a, b), false) => (a, b),
                    _ => {
                        return Err(self.err(
                            s,
                            ImplicitErrorKind::Mismatch(format!("function has type {}", self.show(&fp))),
                        ))
                    }
                };
                let ta = self.child(1, |c| c.check(&s.children[1], gamma, a))?;
                let mut members = Members::new();
                let mut seeds = BTreeSet::new();
                for of in &tf.seeds {
                    for oa in &ta.seeds {
                        let pre = if right { of.concat(oa) } else { oa.concat(of) };
                        let picks = vec![of.clone(), oa.clone()];
                        self.normalize(s, gamma, b.mode(), &pre, picks, 0, &mut members, &mut seeds)?;
                    }
                }
                Ok((
                    (**b).clone(),
                    Traced {
                        members,
                        seeds,
                        children: vec![tf, ta],
                    },
                ))
            }
            SkRule::WithE1 | SkRule::WithE2 | SkRule::UpE => {
                let (p, t) = self.child(0, |c| c.synth(&s.children[0], gamma))?;
                let res = match (&s.rule, &p) {
                    (SkRule::WithE1, Prop::With(a, _)) | (SkRule::WithE2, Prop::With(_, a)) => (**a).clone(),
                    (SkRule::UpE, Prop::Up(_, a)) => (**a).clone(),
                    _ => {
                        return Err(self.err(
                            s,
                            ImplicitErrorKind::Mismatch(format!("premise has type {}", self.show(&p))),
                        ))
                    }
                };
                let mut members = Members::new();
                let mut seeds = BTreeSet::new();
                if matches!(s.rule, SkRule::UpE) {
                    for o in &t.seeds {
                        self.normalize(s, gamma, res.mode(), o, vec![o.clone()], 0, &mut members, &mut seeds)?;
                    }
                } else {
                    members = t.members.keys().map(|c| Self::keep(c, vec![c.clone()])).collect();
                    seeds = t.seeds.clone();
                }
                Ok((
                    res,
                    Traced {
                        members,
                        seeds,
                        children: vec![t],
                    },
                ))
            }
            _ => Err(self.err(s, ImplicitErrorKind::NotSynthesizable(s.rule.name()))),
        }
    }

    fn arity(&self, s: &Skeleton) -> Result<(), ImplicitError> {
        if s.children.len() == s.rule.arity() {
            Ok(())
        } else {
            Err(self.err(
                s,
                ImplicitErrorKind::IllFormedSkeleton(format!(
                    "expected {} premises, found {}",
                    s.rule.arity(),
                    s.children.len()
                )),
            ))
        }
    }

    fn check(&mut self, s: &Skeleton, gamma: &UnorderedCtx, goal: &Prop) -> Result<Traced, ImplicitError> {
        self.arity(s)?;
        let r = goal.mode();
        let mismatch = |this: &Self, what: &str| {
            this.err(
                s,
                ImplicitErrorKind::Mismatch(format!("expected {what}, goal is {}", this.show(goal))),
            )
        };
        if s.rule.synthesizes() {
            let (p, t) = self.synth(s, gamma)?;
            if &p != goal {
                return Err(self.err(
                    s,
                    ImplicitErrorKind::Mismatch(format!(
                        "synthesized {}, expected {}",
                        self.show(&p),
                        self.show(goal)
                    )),
                ));
            }
            return Ok(t);
        }
        let mut members = Members::new();
        let mut seeds = BTreeSet::new();
        let children = match (&s.rule, goal) {
            (SkRule::OneI, Prop::One(_)) => {
                self.normalize(s, gamma, r, &Ctx::new(), vec![], 0, &mut members, &mut seeds)?;
                vec![]
            }
            (SkRule::FuseI, Prop::Fuse(a, b)) => {
                let t1 = self.child(0, |c| c.check(&s.children[0], gamma, a))?;
                let t2 = self.child(1, |c| c.check(&s.children[1], gamma, b))?;
                for o1 in &t1.seeds {
                    for o2 in &t2.seeds {
                        let picks = vec![o1.clone(), o2.clone()];
                        self.normalize(s, gamma, r, &o1.concat(o2), picks, 0, &mut members, &mut seeds)?;
                    }
                }
                vec![t1, t2]
            }
            (SkRule::PlusI1, Prop::Plus(a, _)) | (SkRule::PlusI2, Prop::Plus(_, a)) => {
                let t = self.child(0, |c| c.check(&s.children[0], gamma, a))?;
                members = t.members.keys().map(|c| Self::keep(c, vec![c.clone()])).collect();
                seeds = t.seeds.clone();
                vec![t]
            }
            (SkRule::WithI, Prop::With(a, b)) => {
                let t1 = self.child(0, |c| c.check(&s.children[0], gamma, a))?;
                let t2 = self.child(1, |c| c.check(&s.children[1], gamma, b))?;
                members = t1
                    .members
                    .keys()
                    .filter(|c| t2.members.contains_key(*c))
                    .map(|c| Self::keep(c, vec![c.clone(), c.clone()]))
                    .collect();
                seeds = members.keys().cloned().collect();
                vec![t1, t2]
            }
            (SkRule::RightImpI { x }, Prop::RightImp(a, b)) | (SkRule::LeftImpI { x }, Prop::LeftImp(a, b)) => {
                let right = matches!(s.rule, SkRule::RightImpI { .. });
                let h = Hyp::new(x, (**a).clone());
                let g2 = self.extend(s, gamma, &h)?;
                let t = self.child(0, |c| c.check(&s.children[0], &g2, b))?;
                for c in t.members.keys() {
                    let (end, rest) = if right {
                        (c.last(), c.slice(0, c.len().saturating_sub(1)))
                    } else {
                        (c.first(), c.slice(1.min(c.len()), c.len()))
                    };
                    if end == Some(&h) {
                        members.entry(rest).or_insert(Prov {
                            picks: vec![c.clone()],
                            span: 0,
                            trace: vec![],
                        });
                    }
                }
                seeds = members.keys().cloned().collect();
                vec![t]
            }
            (SkRule::UpI, Prop::Up(m, a)) => {
                let t = self.child(0, |c| c.check(&s.children[0], gamma, a))?;
                members = t
                    .members
                    .keys()
                    .filter(|c| self.theory.context_geq(c, *m))
                    .map(|c| Self::keep(c, vec![c.clone()]))
                    .collect();
                seeds = members.keys().cloned().collect();
                vec![t]
            }
            (SkRule::DownI, Prop::Down(_, a)) => {
                let t = self.child(0, |c| c.check(&s.children[0], gamma, a))?;
                for o in &t.seeds {
                    self.normalize(s, gamma, r, o, vec![o.clone()], 0, &mut members, &mut seeds)?;
                }
                vec![t]
            }
            (SkRule::OneE | SkRule::FuseE { .. } | SkRule::PlusE { .. } | SkRule::DownE { .. }, _) => {
                return self.positive_elim(s, gamma, goal);
            }
            (SkRule::OneI, _) => return Err(mismatch(self, "1")),
            (SkRule::FuseI, _) => return Err(mismatch(self, "a fuse")),
            (SkRule::PlusI1 | SkRule::PlusI2, _) => return Err(mismatch(self, "a sum")),
            (SkRule::WithI, _) => return Err(mismatch(self, "a with")),
            (SkRule::RightImpI { .. } | SkRule::LeftImpI { .. }, _) => {
                return Err(mismatch(self, "a matching implication"))
            }
            (SkRule::UpI, _) => return Err(mismatch(self, "an upshift")),
            (SkRule::DownI, _) => return Err(mismatch(self, "a downshift")),
            _ => unreachable!("synthesizing rules handled above"),
        };
        Ok(Traced {
            members,
            seeds,
            children,
        })
    }

    fn positive_elim(&mut self, s: &Skeleton, gamma: &UnorderedCtx, goal: &Prop) -> Result<Traced, ImplicitError> {
        let r = goal.mode();
        let (mp, tm) = self.child(0, |c| c.synth(&s.children[0], gamma))?;
        if !self.theory.geq(mp.mode(), r) {
            return Err(self.err(s, ImplicitErrorKind::ModeOrder));
        }
        let blocks: Vec<Vec<Hyp>> = match (&s.rule, &mp) {
            (SkRule::OneE, Prop::One(_)) => vec![vec![]],
            (SkRule::FuseE { left, right }, Prop::Fuse(a, b)) => {
                if left == right {
                    return Err(self.err(s, ImplicitErrorKind::ScopeViolation(left.clone())));
                }
                vec![vec![Hyp::new(left, (**a).clone()), Hyp::new(right, (**b).clone())]]
            }
            (SkRule::PlusE { x }, Prop::Plus(a, b)) => {
                vec![vec![Hyp::new(x, (**a).clone())], vec![Hyp::new(x, (**b).clone())]]
            }
            (SkRule::DownE { x }, Prop::Down(_, a)) => vec![vec![Hyp::new(x, (**a).clone())]],
            _ => {
                return Err(self.err(
                    s,
                    ImplicitErrorKind::Mismatch(format!("major premise has type {}", self.show(&mp))),
                ))
            }
        };
        let mut children = vec![tm];
        let mut pairs: Option<BTreeSet<(Ctx, Ctx)>> = None;
        for (i, block) in blocks.iter().enumerate() {
            let mut g2 = gamma.clone();
            for h in block {
                g2 = self.extend(s, &g2, h)?;
            }
            let t = self.child(i + 1, |c| c.check(&s.children[i + 1], &g2, goal))?;
            let ps = filter_spans(&t.xi(), block);
            pairs = Some(match pairs {
                None => ps,
                Some(prev) => prev.intersection(&ps).cloned().collect(),
            });
            children.push(t);
        }
        let mut members = Members::new();
        let mut seeds = BTreeSet::new();
        for (l, rr) in pairs.unwrap_or_default() {
            for om in &children[0].seeds {
                let mut picks = vec![om.clone()];
                picks.extend(blocks.iter().map(|b| l.concat(&Ctx(b.clone())).concat(&rr)));
                let pre = l.concat(om).concat(&rr);
                self.normalize(s, gamma, r, &pre, picks, l.len(), &mut members, &mut seeds)?;
            }
        }
        Ok(Traced {
            members,
            seeds,
            children,
        })
    }
}

/// Computes `Ξ` for `skel` under `gamma` against `goal`, keeping provenance.
pub fn check_implicit_traced(
    theory: &ModeTheory,
    gamma: &UnorderedCtx,
    skel: &Skeleton,
    goal: &Prop,
) -> Result<Traced, ImplicitError> {
    let root = |kind| ImplicitError {
        path: vec![],
        rule: skel.rule.name(),
        kind,
    };
    goal.check(theory)
        .map_err(|e| root(ImplicitErrorKind::IllFormedSkeleton(e.to_string())))?;
    let mut c = Checker {
        theory,
        path: Vec::new(),
    };
    c.check(skel, gamma, goal)
}

/// Computes `Ξ`: the normal output contexts `skel` can be given.
pub fn check_implicit(
    theory: &ModeTheory,
    gamma: &UnorderedCtx,
    skel: &Skeleton,
    goal: &Prop,
) -> Result<ContextSet, ImplicitError> {
    Ok(check_implicit_traced(theory, gamma, skel, goal)?.xi())
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ElaborateError {
    #[error(transparent)]
    Check(#[from] ImplicitError),
    #[error("the target context is not in the computed set")]
    TargetNotInXi,
}

fn replay(skel: &Skeleton, t: &Traced, target: &Ctx) -> NdDeriv {
    let prov = &t.members[target];
    let children = skel
        .children
        .iter()
        .zip(&t.children)
        .zip(&prov.picks)
        .map(|((s, ct), pick)| replay(s, ct, pick))
        .collect();
    let mut d = NdDeriv::new(skel.rule.to_nd(prov.span), children);
    for step in &prov.trace {
        d = NdDeriv::unary(NdRule::Struct(step.clone()), d);
    }
    d
}

/// Builds an explicit derivation of `gamma |- goal ⊣ target` from a skeleton
/// whose `Ξ` contains `target`.
pub fn elaborate(
    theory: &ModeTheory,
    gamma: &UnorderedCtx,
    skel: &Skeleton,
    goal: &Prop,
    target: &Ctx,
) -> Result<NdDeriv, ElaborateError> {
    let t = check_implicit_traced(theory, gamma, skel, goal)?;
    elaborate_from(skel, &t, target)
}

/// As [`elaborate`], reusing a traced check.
pub fn elaborate_from(skel: &Skeleton, t: &Traced, target: &Ctx) -> Result<NdDeriv, ElaborateError> {
    if !t.members.contains_key(target) {
        return Err(ElaborateError::TargetNotInXi);
    }
    Ok(replay(skel, t, target))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modes::{ModeDecls, Sigma, StructuralProperty};
    use crate::nd::{check_nd, parse_nd_deriv};
    use crate::parse::{parse_ctx, parse_prop};
    use StructuralProperty::*;

    const SKEL: &str = "(impRI x (impRI y (downE (hyp x) x' (fuseI (hyp y) (downI (hyp x'))))))";
    const GOAL: &str = "down[m] A ->> B ->> B * down[m] A";

    fn sig(k: &[StructuralProperty], m: &[StructuralProperty]) -> Signature {
        let d = ModeDecls::default()
            .mode("k", Sigma::from_props(k.iter().copied()))
            .mode("m", Sigma::from_props(m.iter().copied()))
            .geq("k", "m");
        Signature::new(ModeTheory::validate(&d, false).unwrap())
            .with_atom("A", "k")
            .with_atom("B", "m")
    }

    fn run(sig: &Signature) -> ContextSet {
        let sk = parse_skeleton(sig, SKEL).unwrap();
        let goal = parse_prop(sig, GOAL).unwrap();
        check_implicit(&sig.theory, &UnorderedCtx::new(), &sk, &goal).unwrap()
    }

    #[test]
    fn mobility_example() {
        assert_eq!(run(&sig(&[ML], &[])), ContextSet::singleton(Ctx::new()));
        assert!(run(&sig(&[MR], &[])).is_empty());
        assert_eq!(run(&sig(&[MR], &[MR])), ContextSet::singleton(Ctx::new()));
        assert_eq!(run(&sig(&[ML], &[ML])), ContextSet::singleton(Ctx::new()));
    }

    #[test]
    fn elaborates_with_one_mobility() {
        let s = sig(&[ML], &[]);
        let sk = parse_skeleton(&s, SKEL).unwrap();
        let goal = parse_prop(&s, GOAL).unwrap();
        let g = UnorderedCtx::new();
        let d = elaborate(&s.theory, &g, &sk, &goal, &Ctx::new()).unwrap();
        assert_eq!(check_nd(&s.theory, &d, &g, &goal).unwrap(), Ctx::new());
        assert_eq!(d.structural_count(), 1);
        let one = parse_ctx(&s, "(z : B)").unwrap();
        assert_eq!(elaborate(&s.theory, &g, &sk, &goal, &one), Err(ElaborateError::TargetNotInXi));
    }

    #[test]
    fn hyp_is_a_singleton() {
        let s = Signature::new(ModeTheory::lnl()).with_atom("A", "L");
        let g = UnorderedCtx::from(&parse_ctx(&s, "(x : A)").unwrap());
        let sk = parse_skeleton(&s, "(hyp x)").unwrap();
        let a = parse_prop(&s, "A").unwrap();
        let xi = check_implicit(&s.theory, &g, &sk, &a).unwrap();
        assert_eq!(xi, ContextSet::singleton(parse_ctx(&s, "(x : A)").unwrap()));
        let d = elaborate(&s.theory, &g, &sk, &a, xi.iter().next().unwrap()).unwrap();
        assert_eq!(d, NdDeriv::hyp("x"));
    }

    #[test]
    fn weakening_elaborates() {
        let s = Signature::new(ModeTheory::lnl()).with_atom("A", "L").with_atom("X", "U");
        let g = UnorderedCtx::from(&parse_ctx(&s, "(x : A) (u : X)").unwrap());
        let sk = parse_skeleton(&s, "(hyp x)").unwrap();
        let a = parse_prop(&s, "A").unwrap();
        let xi = check_implicit(&s.theory, &g, &sk, &a).unwrap();
        assert_eq!(xi.len(), 3);
        for target in &xi {
            let d = elaborate(&s.theory, &g, &sk, &a, target).unwrap();
            assert_eq!(&check_nd(&s.theory, &d, &g, &a).unwrap(), target);
        }
    }

    #[test]
    fn set_operations() {
        let s = Signature::new(ModeTheory::lnl()).with_atom("A", "L").with_atom("X", "U");
        let c = |src: &str| parse_ctx(&s, src).unwrap();
        let xs: ContextSet = [c("(x : A)")].into_iter().collect();
        let ys: ContextSet = [c("(y : A)")].into_iter().collect();
        assert_eq!(set_concat(&ContextSet::singleton(Ctx::new()), &xs), xs);
        assert_eq!(set_concat(&xs, &ys), ContextSet::singleton(c("(x : A) (y : A)")));
        let yx: ContextSet = [c("(y : A) (x : A)")].into_iter().collect();
        let h = Hyp::new("x", parse_prop(&s, "A").unwrap());
        assert_eq!(filter_ends_with(&yx, &h), ys);
        assert!(filter_starts_with(&yx, &h).is_empty());
        let u = s.theory.lookup("U").unwrap();
        let mixed: ContextSet = [c("(u : X)"), c("(x : A)")].into_iter().collect();
        assert_eq!(filter_mode(&s.theory, &mixed, u), ContextSet::singleton(c("(u : X)")));
        let both: ContextSet = [c("(y : A) (x : A)"), c("(x : A) (y : A)")].into_iter().collect();
        let spans = filter_spans(&both, &[h]);
        assert_eq!(spans.len(), 2);
        assert!(spans.contains(&(c("(y : A)"), Ctx::new())));
        assert!(spans.contains(&(Ctx::new(), c("(y : A)"))));
    }

    #[test]
    fn erase_and_roundtrip() {
        let s = sig(&[ML], &[]);
        let d = parse_nd_deriv(
            &s,
            "(impRI x (impRI y (downE 0 (hyp x) x' (mobL 1 0 (fuseI (hyp y) (downI (hyp x')))))))",
        )
        .unwrap();
        let sk = Skeleton::erase(&d);
        assert_eq!(sk.to_sexp(&s.theory), SKEL);
        assert_eq!(parse_skeleton(&s, SKEL).unwrap(), sk);
        let p = "(plusE (ann [B + B] (plusI1 (hyp b))) z (hyp z) (hyp z))";
        assert_eq!(parse_skeleton(&s, p).unwrap().to_sexp(&s.theory), p);
    }
}
