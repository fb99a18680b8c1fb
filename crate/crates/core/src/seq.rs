//! Kernel for the ordered adjoint sequent calculus with explicit structural
//! rules, identity and cut.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::fresh::NameSupply;
use crate::modes::ModeTheory;
use crate::prop::{Ctx, Hyp, Prop};
use crate::structural::{StructError, Structural};

/// A hypothesis named by variable and occurrence index (0-based, left to
/// right). Written `x` or `x#k` in derivations.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct VarRef {
    pub name: String,
    pub occ: usize,
}

impl VarRef {
    pub fn new(name: &str) -> Self {
        VarRef {
            name: name.to_string(),
            occ: 0,
        }
    }

    /// The reference denoting position `pos` of `ctx`.
    pub fn at(ctx: &Ctx, pos: usize) -> Self {
        VarRef {
            name: ctx[pos].var.clone(),
            occ: ctx.occurrence_at(pos),
        }
    }

    pub fn resolve(&self, ctx: &Ctx) -> Result<usize, RuleError> {
        ctx.position(&self.name, self.occ)
            .ok_or_else(|| RuleError::UnknownVar(self.to_string()))
    }
}

impl fmt::Display for VarRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.occ == 0 {
            f.write_str(&self.name)
        } else {
            write!(f, "{}#{}", self.name, self.occ)
        }
    }
}

/// One inference of the sequent calculus, without its premises.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum SeqRule {
    Id { x: VarRef },
    /// Cut on `ctx[lo..hi]` with cut formula `prop` bound to `var` in the
    /// second premise.
    Cut { lo: usize, hi: usize, var: String, prop: Prop },
    OneR,
    OneL { x: VarRef },
    FuseR { split: usize },
    FuseL { x: VarRef, left: String, right: String },
    PlusR1,
    PlusR2,
    PlusL { x: VarRef, y: String },
    WithR,
    WithL1 { x: VarRef, y: String },
    WithL2 { x: VarRef, y: String },
    /// `->>` right rule.
    RightImpR { x: String },
    /// `->>` left rule; the argument context is the `split` hypotheses right
    /// after the principal one.
    RightImpL { f: VarRef, split: usize, y: String },
    /// `>->` right rule.
    LeftImpR { x: String },
    /// `>->` left rule; the argument context is the `split` hypotheses right
    /// before the principal one.
    LeftImpL { f: VarRef, split: usize, y: String },
    UpR,
    UpL { x: VarRef, y: String },
    DownR,
    DownL { x: VarRef, y: String },
    Struct(Structural),
}

impl SeqRule {
    pub fn name(&self) -> &'static str {
        match self {
            SeqRule::Id { .. } => "id",
            SeqRule::Cut { .. } => "cut",
            SeqRule::OneR => "oneR",
            SeqRule::OneL { .. } => "oneL",
            SeqRule::FuseR { .. } => "fuseR",
            SeqRule::FuseL { .. } => "fuseL",
            SeqRule::PlusR1 => "plusR1",
            SeqRule::PlusR2 => "plusR2",
            SeqRule::PlusL { .. } => "plusL",
            SeqRule::WithR => "withR",
            SeqRule::WithL1 { .. } => "withL1",
            SeqRule::WithL2 { .. } => "withL2",
            SeqRule::RightImpR { .. } => "impRr",
            SeqRule::RightImpL { .. } => "impLr",
            SeqRule::LeftImpR { .. } => "impRl",
            SeqRule::LeftImpL { .. } => "impLl",
            SeqRule::UpR => "upR",
            SeqRule::UpL { .. } => "upL",
            SeqRule::DownR => "downR",
            SeqRule::DownL { .. } => "downL",
            SeqRule::Struct(s) => s.name(),
        }
    }

    pub fn arity(&self) -> usize {
        match self {
            SeqRule::Id { .. } | SeqRule::OneR => 0,
            SeqRule::Cut { .. }
            | SeqRule::FuseR { .. }
            | SeqRule::PlusL { .. }
            | SeqRule::WithR
            | SeqRule::RightImpL { .. }
            | SeqRule::LeftImpL { .. } => 2,
            _ => 1,
        }
    }

    /// Principal hypothesis of a left rule.
    pub fn principal(&self) -> Option<&VarRef> {
        match self {
            SeqRule::OneL { x }
            | SeqRule::FuseL { x, .. }
            | SeqRule::PlusL { x, .. }
            | SeqRule::WithL1 { x, .. }
            | SeqRule::WithL2 { x, .. }
            | SeqRule::UpL { x, .. }
            | SeqRule::DownL { x, .. }
            | SeqRule::RightImpL { f: x, .. }
            | SeqRule::LeftImpL { f: x, .. } => Some(x),
            _ => None,
        }
    }

    pub fn principal_mut(&mut self) -> Option<&mut VarRef> {
        match self {
            SeqRule::OneL { x }
            | SeqRule::FuseL { x, .. }
            | SeqRule::PlusL { x, .. }
            | SeqRule::WithL1 { x, .. }
            | SeqRule::WithL2 { x, .. }
            | SeqRule::UpL { x, .. }
            | SeqRule::DownL { x, .. }
            | SeqRule::RightImpL { f: x, .. }
            | SeqRule::LeftImpL { f: x, .. } => Some(x),
            _ => None,
        }
    }

    pub fn is_right_rule(&self) -> bool {
        matches!(
            self,
            SeqRule::OneR
                | SeqRule::FuseR { .. }
                | SeqRule::PlusR1
                | SeqRule::PlusR2
                | SeqRule::WithR
                | SeqRule::RightImpR { .. }
                | SeqRule::LeftImpR { .. }
                | SeqRule::UpR
                | SeqRule::DownR
        )
    }

    /// Binders introduced by this rule, with the premise indices they scope
    /// over.
    pub fn binders(&self) -> Vec<(&str, &'static [usize])> {
        match self {
            SeqRule::Cut { var, .. } => vec![(var, &[1])],
            SeqRule::FuseL { left, right, .. } => vec![(left, &[0]), (right, &[0])],
            SeqRule::PlusL { y, .. } => vec![(y, &[0, 1])],
            SeqRule::WithL1 { y, .. }
            | SeqRule::WithL2 { y, .. }
            | SeqRule::UpL { y, .. }
            | SeqRule::DownL { y, .. } => vec![(y, &[0])],
            SeqRule::RightImpR { x } | SeqRule::LeftImpR { x } => vec![(x, &[0])],
            SeqRule::RightImpL { y, .. } | SeqRule::LeftImpL { y, .. } => vec![(y, &[1])],
            _ => vec![],
        }
    }

    fn binders_mut(&mut self) -> Vec<&mut String> {
        match self {
            SeqRule::Cut { var, .. } => vec![var],
            SeqRule::FuseL { left, right, .. } => vec![left, right],
            SeqRule::PlusL { y, .. }
            | SeqRule::WithL1 { y, .. }
            | SeqRule::WithL2 { y, .. }
            | SeqRule::UpL { y, .. }
            | SeqRule::DownL { y, .. }
            | SeqRule::RightImpL { y, .. }
            | SeqRule::LeftImpL { y, .. } => vec![y],
            SeqRule::RightImpR { x } | SeqRule::LeftImpR { x } => vec![x],
            _ => vec![],
        }
    }

    fn refs_mut(&mut self) -> Vec<&mut String> {
        match self {
            SeqRule::Id { x } => vec![&mut x.name],
            SeqRule::Struct(Structural::Weak { var, .. }) => vec![var],
            other => other.principal_mut().map(|r| &mut r.name).into_iter().collect(),
        }
    }
}

/// A sequent-calculus derivation: a rule with its premise derivations.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SeqDeriv {
    pub rule: SeqRule,
    pub premises: Vec<SeqDeriv>,
}

impl SeqDeriv {
    pub fn new(rule: SeqRule, premises: Vec<SeqDeriv>) -> Self {
        SeqDeriv { rule, premises }
    }

    pub fn leaf(rule: SeqRule) -> Self {
        SeqDeriv {
            rule,
            premises: vec![],
        }
    }

    pub fn id(x: &str) -> Self {
        Self::leaf(SeqRule::Id { x: VarRef::new(x) })
    }

    pub fn unary(rule: SeqRule, d: SeqDeriv) -> Self {
        Self::new(rule, vec![d])
    }

    pub fn size(&self) -> usize {
        1 + self.premises.iter().map(SeqDeriv::size).sum::<usize>()
    }

    pub fn depth(&self) -> usize {
        1 + self.premises.iter().map(SeqDeriv::depth).max().unwrap_or(0)
    }

    pub fn cut_count(&self) -> usize {
        usize::from(matches!(self.rule, SeqRule::Cut { .. }))
            + self.premises.iter().map(SeqDeriv::cut_count).sum::<usize>()
    }

    pub fn is_cut_free(&self) -> bool {
        self.cut_count() == 0
    }

    /// Every variable name mentioned anywhere in the tree.
    pub fn names(&self, out: &mut Vec<String>) {
        let mut r = self.rule.clone();
        out.extend(r.binders_mut().into_iter().map(|s| s.clone()));
        out.extend(r.refs_mut().into_iter().map(|s| s.clone()));
        for p in &self.premises {
            p.names(out);
        }
    }

    /// Renames variables according to `map`. With a supply, every binder is
    /// replaced by a fresh name; otherwise binders keep their names and shadow
    /// the map.
    pub fn rename(&self, map: &HashMap<String, String>, mut supply: Option<&mut NameSupply>) -> SeqDeriv {
        let mut rule = self.rule.clone();
        for r in rule.refs_mut() {
            if let Some(n) = map.get(r.as_str()) {
                *r = n.clone();
            }
        }
        let mut child_maps: Vec<HashMap<String, String>> = vec![map.clone(); self.premises.len()];
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
                child_maps[i].insert(b.clone(), nb.clone());
            }
            new_names.push(nb);
        }
        for (slot, nb) in rule.binders_mut().into_iter().zip(new_names) {
            *slot = nb;
        }
        let premises = self
            .premises
            .iter()
            .zip(child_maps)
            .map(|(p, m)| p.rename(&m, supply.as_deref_mut()))
            .collect();
        SeqDeriv { rule, premises }
    }

    /// Replaces every binder with a fresh name.
    pub fn freshen(&self, supply: &mut NameSupply) -> SeqDeriv {
        self.rename(&HashMap::new(), Some(supply))
    }

    pub fn to_sexp(&self, theory: &ModeTheory) -> String {
        let mut s = String::new();
        self.write_sexp(theory, &mut s);
        s
    }

    fn write_sexp(&self, theory: &ModeTheory, out: &mut String) {
        use std::fmt::Write;
        let name = self.rule.name();
        out.push('(');
        match &self.rule {
            SeqRule::Id { x } => {
                let _ = write!(out, "id {x}");
            }
            SeqRule::Cut { lo, hi, var, prop } => {
                let _ = write!(out, "cut {lo} {hi} {var} [{}]", prop.display(theory));
            }
            SeqRule::OneL { x } => {
                let _ = write!(out, "{name} {x}");
            }
            SeqRule::FuseR { split } => {
                let _ = write!(out, "{name} {split}");
            }
            SeqRule::FuseL { x, left, right } => {
                let _ = write!(out, "{name} {x} {left} {right}");
            }
            SeqRule::PlusL { x, y }
            | SeqRule::WithL1 { x, y }
            | SeqRule::WithL2 { x, y }
            | SeqRule::UpL { x, y }
            | SeqRule::DownL { x, y } => {
                let _ = write!(out, "{name} {x} {y}");
            }
            SeqRule::RightImpR { x } | SeqRule::LeftImpR { x } => {
                let _ = write!(out, "{name} {x}");
            }
            SeqRule::RightImpL { f, split, y } | SeqRule::LeftImpL { f, split, y } => {
                // premises interleave with the binder: (impLr f s D1 y D2)
                let _ = write!(out, "{name} {f} {split} ");
                self.premises[0].write_sexp(theory, out);
                let _ = write!(out, " {y} ");
                self.premises[1].write_sexp(theory, out);
                out.push(')');
                return;
            }
            SeqRule::Struct(s) => out.push_str(&s.to_sexp_head()),
            _ => out.push_str(name),
        }
        for p in &self.premises {
            out.push(' ');
            p.write_sexp(theory, out);
        }
        out.push(')');
    }
}

/// `context |- goal`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Sequent {
    pub ctx: Ctx,
    pub goal: Prop,
}

impl Sequent {
    pub fn new(ctx: Ctx, goal: Prop) -> Self {
        Sequent { ctx, goal }
    }

    pub fn display<'a>(&'a self, theory: &'a ModeTheory) -> SequentDisplay<'a> {
        SequentDisplay { s: self, theory }
    }

    /// Independence presupposition.
    pub fn is_independent(&self, theory: &ModeTheory) -> bool {
        theory.context_geq(&self.ctx, self.goal.mode())
    }
}

pub struct SequentDisplay<'a> {
    s: &'a Sequent,
    theory: &'a ModeTheory,
}

impl fmt::Display for SequentDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} |- {}",
            self.s.ctx.display(self.theory),
            self.s.goal.display(self.theory)
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RuleError {
    #[error("rule does not match: {0}")]
    Mismatch(String),
    #[error("side condition failed: {0}")]
    SideCondition(String),
    #[error("split {split} out of range for a context of length {len}")]
    SplitOutOfRange { split: usize, len: usize },
    #[error("binder `{0}` is not fresh")]
    Freshness(String),
    #[error("independence presupposition violated: {0}")]
    Presupposition(String),
    #[error("no hypothesis `{0}`")]
    UnknownVar(String),
    #[error("expected {expected} premises, found {found}")]
    Arity { expected: usize, found: usize },
    #[error("ill-formed proposition: {0}")]
    IllFormed(String),
}

impl From<StructError> for RuleError {
    fn from(e: StructError) -> Self {
        match e {
            StructError::OutOfRange { pos, len } => RuleError::SplitOutOfRange { split: pos, len },
            StructError::Shape(s) => RuleError::Mismatch(s),
            StructError::NotInScope(v) => RuleError::UnknownVar(v),
            other => RuleError::SideCondition(other.to_string()),
        }
    }
}

/// A checking failure located by the path of premise indices from the root.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("at {} ({rule}): {kind}", fmt_path(path))]
pub struct SeqError {
    pub path: Vec<usize>,
    pub rule: &'static str,
    pub kind: RuleError,
}

pub(crate) fn fmt_path(path: &[usize]) -> String {
    if path.is_empty() {
        "root".to_string()
    } else {
        path.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(".")
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CheckOptions {
    /// Restrict `id` to atomic propositions.
    pub atomic_id: bool,
}

fn fresh(ctx: &Ctx, x: &str) -> Result<(), RuleError> {
    if ctx.contains_var(x) {
        Err(RuleError::Freshness(x.to_string()))
    } else {
        Ok(())
    }
}

fn mismatch(theory: &ModeTheory, what: &str, p: &Prop) -> RuleError {
    RuleError::Mismatch(format!("expected {what}, found {}", p.display(theory)))
}

/// Computes the premises demanded by `rule` for `s`, reading the rule from
/// conclusion to premises.
pub fn apply_rule(
    theory: &ModeTheory,
    s: &Sequent,
    rule: &SeqRule,
    opts: CheckOptions,
) -> Result<Vec<Sequent>, RuleError> {
    let ctx = &s.ctx;
    let goal = &s.goal;
    let r = goal.mode();
    let len = ctx.len();
    let seq = |c: Ctx, g: &Prop| Sequent::new(c, g.clone());
    let replace = |p: usize, hyps: Vec<Hyp>| -> Ctx {
        let mut v = ctx[..p].to_vec();
        v.extend(hyps);
        v.extend(ctx[p + 1..].iter().cloned());
        Ctx(v)
    };
    let out = match rule {
        SeqRule::Id { x } => {
            if len != 1 || ctx[0].var != x.name || x.occ != 0 {
                return Err(RuleError::Mismatch(format!(
                    "id {x} needs the context to be exactly {x}"
                )));
            }
            if &ctx[0].prop != goal {
                return Err(RuleError::Mismatch(format!(
                    "hypothesis {} does not match goal {}",
                    ctx[0].prop.display(theory),
                    goal.display(theory)
                )));
            }
            if opts.atomic_id && !goal.is_atom() {
                return Err(RuleError::SideCondition(format!(
                    "id restricted to atoms, found {}",
                    goal.display(theory)
                )));
            }
            vec![]
        }
        SeqRule::Cut { lo, hi, var, prop } => {
            if lo > hi || *hi > len {
                return Err(RuleError::SplitOutOfRange { split: *hi, len });
            }
            let m = prop
                .check(theory)
                .map_err(|e| RuleError::IllFormed(e.to_string()))?;
            fresh(ctx, var)?;
            let cut_ctx = ctx.slice(*lo, *hi);
            if !theory.context_geq(&cut_ctx, m) {
                return Err(RuleError::SideCondition(format!(
                    "cut context is not >= {}",
                    theory.name(m)
                )));
            }
            if !theory.geq(m, r) {
                return Err(RuleError::SideCondition(format!(
                    "cut mode {} is not >= {}",
                    theory.name(m),
                    theory.name(r)
                )));
            }
            let rest = ctx.splice(*lo, *hi, &Ctx(vec![Hyp::new(var, prop.clone())]));
            vec![seq(cut_ctx, prop), seq(rest, goal)]
        }
        SeqRule::OneR => {
            if !matches!(goal, Prop::One(_)) {
                return Err(mismatch(theory, "1", goal));
            }
            if len != 0 {
                return Err(RuleError::Mismatch("oneR needs an empty context".into()));
            }
            vec![]
        }
        SeqRule::FuseR { split } => {
            let Prop::Fuse(a, b) = goal else {
                return Err(mismatch(theory, "a fuse", goal));
            };
            if *split > len {
                return Err(RuleError::SplitOutOfRange { split: *split, len });
            }
            vec![seq(ctx.slice(0, *split), a), seq(ctx.slice(*split, len), b)]
        }
        SeqRule::PlusR1 | SeqRule::PlusR2 => {
            let Prop::Plus(a, b) = goal else {
                return Err(mismatch(theory, "a sum", goal));
            };
            let g = if matches!(rule, SeqRule::PlusR1) { a } else { b };
            vec![seq(ctx.clone(), g)]
        }
        SeqRule::WithR => {
            let Prop::With(a, b) = goal else {
                return Err(mismatch(theory, "a with", goal));
            };
            vec![seq(ctx.clone(), a), seq(ctx.clone(), b)]
        }
        SeqRule::RightImpR { x } | SeqRule::LeftImpR { x } => {
            let (a, b) = match (rule, goal) {
                (SeqRule::RightImpR { .. }, Prop::RightImp(a, b)) => (a, b),
                (SeqRule::LeftImpR { .. }, Prop::LeftImp(a, b)) => (a, b),
                _ => return Err(mismatch(theory, "a matching implication", goal)),
            };
            fresh(ctx, x)?;
            let h = Hyp::new(x, (**a).clone());
            let mut c = ctx.clone();
            if matches!(rule, SeqRule::RightImpR { .. }) {
                c.push(h);
            } else {
                c.insert(0, h);
            }
            vec![seq(c, b)]
        }
        SeqRule::UpR => {
            let Prop::Up(_, a) = goal else {
                return Err(mismatch(theory, "an upshift", goal));
            };
            vec![seq(ctx.clone(), a)]
        }
        SeqRule::DownR => {
            let Prop::Down(_, a) = goal else {
                return Err(mismatch(theory, "a downshift", goal));
            };
            let k = a.mode();
            if !theory.context_geq(ctx, k) {
                return Err(RuleError::SideCondition(format!(
                    "downR needs the context >= {}",
                    theory.name(k)
                )));
            }
            vec![seq(ctx.clone(), a)]
        }
        SeqRule::OneL { x } => {
            let p = x.resolve(ctx)?;
            if !matches!(ctx[p].prop, Prop::One(_)) {
                return Err(mismatch(theory, "1", &ctx[p].prop));
            }
            vec![seq(replace(p, vec![]), goal)]
        }
        SeqRule::FuseL { x, left, right } => {
            let p = x.resolve(ctx)?;
            let Prop::Fuse(a, b) = &ctx[p].prop else {
                return Err(mismatch(theory, "a fuse", &ctx[p].prop));
            };
            fresh(ctx, left)?;
            fresh(ctx, right)?;
            if left == right {
                return Err(RuleError::Freshness(left.clone()));
            }
            let c = replace(
                p,
                vec![Hyp::new(left, (**a).clone()), Hyp::new(right, (**b).clone())],
            );
            vec![seq(c, goal)]
        }
        SeqRule::PlusL { x, y } => {
            let p = x.resolve(ctx)?;
            let Prop::Plus(a, b) = &ctx[p].prop else {
                return Err(mismatch(theory, "a sum", &ctx[p].prop));
            };
            fresh(ctx, y)?;
            vec![
                seq(replace(p, vec![Hyp::new(y, (**a).clone())]), goal),
                seq(replace(p, vec![Hyp::new(y, (**b).clone())]), goal),
            ]
        }
        SeqRule::WithL1 { x, y } | SeqRule::WithL2 { x, y } => {
            let p = x.resolve(ctx)?;
            let Prop::With(a, b) = &ctx[p].prop else {
                return Err(mismatch(theory, "a with", &ctx[p].prop));
            };
            fresh(ctx, y)?;
            let c = if matches!(rule, SeqRule::WithL1 { .. }) { a } else { b };
            vec![seq(replace(p, vec![Hyp::new(y, (**c).clone())]), goal)]
        }
        SeqRule::UpL { x, y } => {
            let p = x.resolve(ctx)?;
            let Prop::Up(_, a) = &ctx[p].prop else {
                return Err(mismatch(theory, "an upshift", &ctx[p].prop));
            };
            fresh(ctx, y)?;
            let l = a.mode();
            if !theory.geq(l, r) {
                return Err(RuleError::SideCondition(format!(
                    "upL needs {} >= {}",
                    theory.name(l),
                    theory.name(r)
                )));
            }
            vec![seq(replace(p, vec![Hyp::new(y, (**a).clone())]), goal)]
        }
        SeqRule::DownL { x, y } => {
            let p = x.resolve(ctx)?;
            let Prop::Down(_, a) = &ctx[p].prop else {
                return Err(mismatch(theory, "a downshift", &ctx[p].prop));
            };
            fresh(ctx, y)?;
            vec![seq(replace(p, vec![Hyp::new(y, (**a).clone())]), goal)]
        }
        SeqRule::RightImpL { f, split, y } | SeqRule::LeftImpL { f, split, y } => {
            let p = f.resolve(ctx)?;
            let right = matches!(rule, SeqRule::RightImpL { .. });
            let (a, b) = match (&ctx[p].prop, right) {
                (Prop::RightImp(a, b), true) | (Prop::LeftImp(a, b), false) => (a, b),
                (other, _) => return Err(mismatch(theory, "a matching implication", other)),
            };
            fresh(ctx, y)?;
            let (lo, hi) = if right {
                if p + 1 + split > len {
                    return Err(RuleError::SplitOutOfRange { split: *split, len });
                }
                (p + 1, p + 1 + split)
            } else {
                if *split > p {
                    return Err(RuleError::SplitOutOfRange { split: *split, len });
                }
                (p - split, p)
            };
            let arg = ctx.slice(lo, hi);
            let m = a.mode();
            if !theory.context_geq(&arg, m) {
                return Err(RuleError::SideCondition(format!(
                    "argument context is not >= {}",
                    theory.name(m)
                )));
            }
            let (l, h) = if right { (p, hi) } else { (lo, p + 1) };
            let rest = ctx.splice(l, h, &Ctx(vec![Hyp::new(y, (**b).clone())]));
            vec![seq(arg, a), seq(rest, goal)]
        }
        SeqRule::Struct(st) => {
            let c = st.premise_of(theory, ctx, r)?;
            vec![seq(c, goal)]
        }
    };
    debug_assert!(out.iter().all(|p| p.ctx.is_consistent()));
    Ok(out)
}

/// Checks that `d` derives `s`.
pub fn check_seq(
    theory: &ModeTheory,
    d: &SeqDeriv,
    s: &Sequent,
    opts: CheckOptions,
) -> Result<(), SeqError> {
    let root_err = |kind| SeqError {
        path: vec![],
        rule: d.rule.name(),
        kind,
    };
    if let Err(e) = s.goal.check(theory) {
        return Err(root_err(RuleError::IllFormed(e.to_string())));
    }
    for h in s.ctx.iter() {
        if let Err(e) = h.prop.check(theory) {
            return Err(root_err(RuleError::IllFormed(e.to_string())));
        }
    }
    if !s.is_independent(theory) {
        return Err(root_err(RuleError::Presupposition(format!(
            "context is not >= {}",
            theory.name(s.goal.mode())
        ))));
    }
    if !s.ctx.is_consistent() {
        return Err(root_err(RuleError::Presupposition(
            "a variable labels two different propositions".into(),
        )));
    }
    let mut path = Vec::new();
    check_node(theory, d, s, opts, &mut path)
}

fn check_node(
    theory: &ModeTheory,
    d: &SeqDeriv,
    s: &Sequent,
    opts: CheckOptions,
    path: &mut Vec<usize>,
) -> Result<(), SeqError> {
    let err = |kind, path: &Vec<usize>| SeqError {
        path: path.clone(),
        rule: d.rule.name(),
        kind,
    };
    if d.premises.len() != d.rule.arity() {
        return Err(err(
            RuleError::Arity {
                expected: d.rule.arity(),
                found: d.premises.len(),
            },
            path,
        ));
    }
    let premises = apply_rule(theory, s, &d.rule, opts).map_err(|k| err(k, path))?;
    for (i, (pd, ps)) in d.premises.iter().zip(&premises).enumerate() {
        path.push(i);
        check_node(theory, pd, ps, opts, path)?;
        path.pop();
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modes::{ModeDecls, ModeId, Sigma, StructuralProperty};

    /// Modes k > m with the given properties; atoms A@k, B@m.
    fn mobility_theory(k: &[StructuralProperty], m: &[StructuralProperty]) -> ModeTheory {
        let d = ModeDecls::default()
            .mode("k", Sigma::from_props(k.iter().copied()))
            .mode("m", Sigma::from_props(m.iter().copied()))
            .geq("k", "m");
        ModeTheory::validate(&d, false).unwrap()
    }

    fn swap_goal() -> (Prop, Prop, Prop) {
        let (k, m) = (ModeId(0), ModeId(1));
        let a = Prop::atom("A", k);
        let b = Prop::atom("B", m);
        let da = Prop::down(m, a.clone());
        let goal = Prop::right_imp(da.clone(), Prop::right_imp(b.clone(), Prop::fuse(b, da)));
        (goal, a, Prop::atom("B", m))
    }

    fn swap_proof() -> SeqDeriv {
        use SeqRule::*;
        SeqDeriv::unary(
            RightImpR { x: "x".into() },
            SeqDeriv::unary(
                RightImpR { x: "y".into() },
                SeqDeriv::unary(
                    DownL {
                        x: VarRef::new("x"),
                        y: "x'".into(),
                    },
                    SeqDeriv::unary(
                        Struct(Structural::MobL { from: 1, to: 0 }),
                        SeqDeriv::new(
                            FuseR { split: 1 },
                            vec![SeqDeriv::id("y"), SeqDeriv::unary(DownR, SeqDeriv::id("x'"))],
                        ),
                    ),
                ),
            ),
        )
    }

    #[test]
    fn mobility_example_checks_with_left_mobility() {
        use StructuralProperty::*;
        let t = mobility_theory(&[ML], &[]);
        let (goal, _, _) = swap_goal();
        let s = Sequent::new(Ctx::new(), goal);
        check_seq(&t, &swap_proof(), &s, CheckOptions::default()).unwrap();
    }

    #[test]
    fn mobility_example_fails_with_right_mobility() {
        use StructuralProperty::*;
        let t = mobility_theory(&[MR], &[]);
        let (goal, _, _) = swap_goal();
        let s = Sequent::new(Ctx::new(), goal);
        let e = check_seq(&t, &swap_proof(), &s, CheckOptions::default()).unwrap_err();
        assert_eq!(e.rule, "mobL");
        assert_eq!(e.path, vec![0, 0, 0]);
        assert!(matches!(e.kind, RuleError::SideCondition(_)));
    }

    #[test]
    fn identity_and_atomic_restriction() {
        let t = ModeTheory::lnl();
        let l = t.lookup("L").unwrap();
        let a = Prop::atom("A", l);
        let s = Sequent::new(Ctx(vec![Hyp::new("x", a.clone())]), a.clone());
        check_seq(&t, &SeqDeriv::id("x"), &s, CheckOptions { atomic_id: true }).unwrap();
        let one = Prop::One(l);
        let s1 = Sequent::new(Ctx(vec![Hyp::new("x", one.clone())]), one);
        assert!(check_seq(&t, &SeqDeriv::id("x"), &s1, CheckOptions { atomic_id: true }).is_err());
        check_seq(&t, &SeqDeriv::id("x"), &s1, CheckOptions::default()).unwrap();
    }

    #[test]
    fn apply_rule_examples() {
        let t = ModeTheory::lnl();
        let l = t.lookup("L").unwrap();
        let a = Prop::atom("A", l);
        let b = Prop::atom("B", l);
        let s = Sequent::new(Ctx(vec![]), Prop::right_imp(a.clone(), b.clone()));
        let ps = apply_rule(&t, &s, &SeqRule::RightImpR { x: "x".into() }, CheckOptions::default()).unwrap();
        assert_eq!(ps, vec![Sequent::new(Ctx(vec![Hyp::new("x", a.clone())]), b.clone())]);

        let c = Ctx(vec![Hyp::new("x", a.clone()), Hyp::new("y", b.clone())]);
        let w = SeqRule::Struct(Structural::Weak {
            var: "x".into(),
            pos: 0,
        });
        let s2 = Sequent::new(c.clone(), b.clone());
        assert!(matches!(
            apply_rule(&t, &s2, &w, CheckOptions::default()),
            Err(RuleError::SideCondition(_))
        ));

        let s3 = Sequent::new(c, Prop::fuse(a.clone(), b.clone()));
        let ps = apply_rule(&t, &s3, &SeqRule::FuseR { split: 1 }, CheckOptions::default()).unwrap();
        assert_eq!(ps[0].ctx[0].var, "x");
        assert_eq!(ps[1].ctx[0].var, "y");
        assert!(matches!(
            apply_rule(&t, &s3, &SeqRule::FuseR { split: 3 }, CheckOptions::default()),
            Err(RuleError::SplitOutOfRange { .. })
        ));
    }

    #[test]
    fn presupposition_is_checked() {
        let t = ModeTheory::lnl();
        let (u, l) = (t.lookup("U").unwrap(), t.lookup("L").unwrap());
        let s = Sequent::new(Ctx(vec![Hyp::new("y", Prop::atom("B", l))]), Prop::atom("A", u));
        let e = check_seq(&t, &SeqDeriv::id("y"), &s, CheckOptions::default()).unwrap_err();
        assert!(matches!(e.kind, RuleError::Presupposition(_)));
    }

    #[test]
    fn freshness_is_enforced() {
        let t = ModeTheory::lnl();
        let l = t.lookup("L").unwrap();
        let a = Prop::atom("A", l);
        let s = Sequent::new(
            Ctx(vec![Hyp::new("x", a.clone())]),
            Prop::right_imp(a.clone(), a.clone()),
        );
        let e = apply_rule(&t, &s, &SeqRule::RightImpR { x: "x".into() }, CheckOptions::default());
        assert_eq!(e, Err(RuleError::Freshness("x".into())));
    }

    #[test]
    fn rename_freshens_scoped_binders() {
        let d = swap_proof();
        let mut supply = NameSupply::new();
        let r = d.freshen(&mut supply);
        let t = mobility_theory(&[StructuralProperty::ML], &[]);
        let (goal, _, _) = swap_goal();
        check_seq(&t, &r, &Sequent::new(Ctx::new(), goal), CheckOptions::default()).unwrap();
        assert_ne!(r, d);
    }
}
