//! Substitution on natural-deduction derivations and the translations between
//! the sequent calculus and natural deduction.

use thiserror::Error;

use crate::fresh::NameSupply;
use crate::modes::ModeTheory;
use crate::nd::{check_nd, Checker, NdDeriv, NdError, NdErrorKind, NdRule};
use crate::prop::{Ctx, Prop, UnorderedCtx};
use crate::seq::{apply_rule, check_seq, CheckOptions, SeqDeriv, SeqError, SeqRule, Sequent, VarRef};
use crate::structural::Expansion;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TranslateError {
    #[error(transparent)]
    Seq(#[from] SeqError),
    #[error(transparent)]
    Nd(#[from] NdError),
}

fn internal(rule: &'static str, msg: impl Into<String>) -> NdError {
    NdError {
        path: vec![],
        rule,
        kind: NdErrorKind::Invariant(msg.into()),
    }
}

/// The context and goal of each child of `d`, given those of `d`.
fn child_judgments(
    theory: &ModeTheory,
    d: &NdDeriv,
    gamma: &UnorderedCtx,
    goal: &Prop,
) -> Result<Vec<(UnorderedCtx, Prop)>, NdError> {
    let synth = |i: usize| Checker::new(theory).synth(&d.children[i], gamma).map(|(p, _)| p);
    let same = |p: &Prop| (gamma.clone(), p.clone());
    let bad = || internal(d.rule.name(), "derivation does not match its goal");
    let v = match (&d.rule, goal) {
        (NdRule::Hyp { .. } | NdRule::OneI, _) => vec![],
        (NdRule::Ann { prop }, _) => vec![same(prop)],
        (NdRule::Struct(_), _) => vec![same(goal)],
        (NdRule::FuseI, Prop::Fuse(a, b)) | (NdRule::WithI, Prop::With(a, b)) => vec![same(a), same(b)],
        (NdRule::PlusI1, Prop::Plus(a, _)) | (NdRule::PlusI2, Prop::Plus(_, a)) => vec![same(a)],
        (NdRule::RightImpI { x }, Prop::RightImp(a, b)) | (NdRule::LeftImpI { x }, Prop::LeftImp(a, b)) => {
            vec![(gamma.extended(x, a), (**b).clone())]
        }
        (NdRule::UpI, Prop::Up(_, a)) | (NdRule::DownI, Prop::Down(_, a)) => vec![same(a)],
        (NdRule::RightImpE | NdRule::LeftImpE, _) => {
            let f = synth(0)?;
            let (Prop::RightImp(a, _) | Prop::LeftImp(a, _)) = &f else {
                return Err(bad());
            };
            let a = (**a).clone();
            vec![same(&f), same(&a)]
        }
        (NdRule::WithE1 | NdRule::WithE2 | NdRule::UpE, _) => vec![same(&synth(0)?)],
        (NdRule::OneE { .. }, _) => vec![same(&synth(0)?), same(goal)],
        (NdRule::FuseE { left, right, .. }, _) => {
            let m = synth(0)?;
            let Prop::Fuse(a, b) = &m else { return Err(bad()) };
            let g = gamma.extended(left, a).extended(right, b);
            vec![same(&m), (g, goal.clone())]
        }
        (NdRule::PlusE { x, .. }, _) => {
            let m = synth(0)?;
            let Prop::Plus(a, b) = &m else { return Err(bad()) };
            vec![
                same(&m),
                (gamma.extended(x, a), goal.clone()),
                (gamma.extended(x, b), goal.clone()),
            ]
        }
        (NdRule::DownE { x, .. }, _) => {
            let m = synth(0)?;
            let Prop::Down(_, a) = &m else { return Err(bad()) };
            vec![same(&m), (gamma.extended(x, a), goal.clone())]
        }
        _ => return Err(bad()),
    };
    Ok(v)
}

fn output(theory: &ModeTheory, d: &NdDeriv, gamma: &UnorderedCtx, goal: &Prop) -> Result<Ctx, NdError> {
    Checker::new(theory).check(d, gamma, goal)
}

fn union(a: &UnorderedCtx, b: &UnorderedCtx) -> Result<UnorderedCtx, NdError> {
    a.union(b)
        .ok_or_else(|| internal("subst", "contexts bind a variable to different propositions"))
}

struct Subst<'a> {
    theory: &'a ModeTheory,
    d1: &'a NdDeriv,
    x: &'a str,
    block: Ctx,
    supply: NameSupply,
}

impl Subst<'_> {
    fn walk(&mut self, d: &NdDeriv, gamma: &UnorderedCtx, goal: &Prop) -> Result<NdDeriv, NdError> {
        if let NdRule::Hyp { x } = &d.rule {
            if x == self.x {
                let copy = self.d1.freshen(&mut self.supply);
                return Ok(if copy.synthesizes() {
                    copy
                } else {
                    let p = gamma.get(x).expect("substituted variable in scope").clone();
                    NdDeriv::unary(NdRule::Ann { prop: p }, copy)
                });
            }
            return Ok(d.clone());
        }
        let judgments = child_judgments(self.theory, d, gamma, goal)?;
        let mut children = Vec::with_capacity(d.children.len());
        for (c, (g, p)) in d.children.iter().zip(&judgments) {
            children.push(self.walk(c, g, p)?);
        }
        let exp = Expansion {
            var: self.x,
            block: &self.block,
        };
        let mut rule = d.rule.clone();
        match &mut rule {
            NdRule::Struct(st) => {
                let prem = output(self.theory, &d.children[0], gamma, goal)?;
                let concl = output(self.theory, d, gamma, goal)?;
                let chain = exp.lift(st, &prem, &concl);
                let mut out = children.pop().expect("structural child");
                for r in chain.into_iter().rev() {
                    out = NdDeriv::unary(NdRule::Struct(r), out);
                }
                return Ok(out);
            }
            NdRule::OneE { span } | NdRule::FuseE { span, .. } | NdRule::PlusE { span, .. } | NdRule::DownE { span, .. } => {
                let (g, p) = &judgments[1];
                let body = output(self.theory, &d.children[1], g, p)?;
                *span = exp.map(&body, *span);
            }
            _ => {}
        }
        Ok(NdDeriv::new(rule, children))
    }
}

/// Substitutes `d1` (`gamma1 |- a ⊣ Ω_A`) for the hypothesis `x : a` in `d2`
/// (`gamma2 |- goal ⊣ Ω`), giving a derivation whose output is `Ω` with every
/// occurrence of `x` replaced by `Ω_A`. Returns the new derivation and the
/// merged context it lives in.
#[allow(clippy::too_many_arguments)]
pub fn substitute(
    theory: &ModeTheory,
    d1: &NdDeriv,
    gamma1: &UnorderedCtx,
    a: &Prop,
    x: &str,
    d2: &NdDeriv,
    gamma2: &UnorderedCtx,
    goal: &Prop,
) -> Result<(NdDeriv, UnorderedCtx), NdError> {
    let block = check_nd(theory, d1, gamma1, a)?;
    if gamma2.get(x) != Some(a) {
        return Err(internal("subst", format!("`{x}` is not bound to the substituted proposition")));
    }
    check_nd(theory, d2, gamma2, goal)?;
    let mut supply = NameSupply::new();
    let mut names = Vec::new();
    d1.names(&mut names);
    d2.names(&mut names);
    supply.avoid(names);
    supply.avoid(gamma1.iter().map(|(v, _)| v.to_string()));
    supply.avoid(gamma2.iter().map(|(v, _)| v.to_string()));
    let d2 = d2.freshen(&mut supply);
    let mut s = Subst {
        theory,
        d1,
        x,
        block,
        supply,
    };
    let out = s.walk(&d2, gamma2, goal)?;
    let mut g2 = UnorderedCtx::new();
    for (v, p) in gamma2.iter().filter(|(v, _)| *v != x) {
        g2.insert(v, p.clone());
    }
    Ok((out, union(gamma1, &g2)?))
}

struct SeqToNd<'a> {
    theory: &'a ModeTheory,
}

impl SeqToNd<'_> {
    fn premise_gamma(gamma: &UnorderedCtx, s: &Sequent) -> Result<UnorderedCtx, NdError> {
        union(gamma, &UnorderedCtx::from(&s.ctx))
    }

    fn subst_elim(
        &self,
        n: NdDeriv,
        gamma: &UnorderedCtx,
        y: &str,
        cont: &SeqDeriv,
        cs: &Sequent,
    ) -> Result<NdDeriv, NdError> {
        let g1 = Self::premise_gamma(gamma, cs)?;
        let m = self.tr(cont, cs, &g1)?;
        let b = cs.ctx.lookup(y).expect("continuation binds y").clone();
        Ok(substitute(self.theory, &n, gamma, &b, y, &m, &g1, &cs.goal)?.0)
    }

    fn tr(&self, d: &SeqDeriv, s: &Sequent, gamma: &UnorderedCtx) -> Result<NdDeriv, NdError> {
        let prems = apply_rule(self.theory, s, &d.rule, CheckOptions::default())
            .map_err(|e| internal(d.rule.name(), e.to_string()))?;
        let sub = |i: usize| -> Result<NdDeriv, NdError> {
            let g = Self::premise_gamma(gamma, &prems[i])?;
            self.tr(&d.premises[i], &prems[i], &g)
        };
        let pos = |x: &VarRef| x.resolve(&s.ctx).map_err(|e| internal(d.rule.name(), e.to_string()));
        let nd = match &d.rule {
            SeqRule::Id { x } => NdDeriv::hyp(&x.name),
            SeqRule::OneR => NdDeriv::leaf(NdRule::OneI),
            SeqRule::FuseR { .. } => NdDeriv::new(NdRule::FuseI, vec![sub(0)?, sub(1)?]),
            SeqRule::PlusR1 => NdDeriv::unary(NdRule::PlusI1, sub(0)?),
            SeqRule::PlusR2 => NdDeriv::unary(NdRule::PlusI2, sub(0)?),
            SeqRule::WithR => NdDeriv::new(NdRule::WithI, vec![sub(0)?, sub(1)?]),
            SeqRule::RightImpR { x } => NdDeriv::unary(NdRule::RightImpI { x: x.clone() }, sub(0)?),
            SeqRule::LeftImpR { x } => NdDeriv::unary(NdRule::LeftImpI { x: x.clone() }, sub(0)?),
            SeqRule::UpR => NdDeriv::unary(NdRule::UpI, sub(0)?),
            SeqRule::DownR => NdDeriv::unary(NdRule::DownI, sub(0)?),
            SeqRule::RightImpL { f, y, .. } | SeqRule::LeftImpL { f, y, .. } => {
                let e = if matches!(d.rule, SeqRule::RightImpL { .. }) {
                    NdRule::RightImpE
                } else {
                    NdRule::LeftImpE
                };
                let n = NdDeriv::new(e, vec![NdDeriv::hyp(&f.name), sub(0)?]);
                self.subst_elim(n, gamma, y, &d.premises[1], &prems[1])?
            }
            SeqRule::WithL1 { x, y } | SeqRule::WithL2 { x, y } | SeqRule::UpL { x, y } => {
                let e = match d.rule {
                    SeqRule::WithL1 { .. } => NdRule::WithE1,
                    SeqRule::WithL2 { .. } => NdRule::WithE2,
                    _ => NdRule::UpE,
                };
                let n = NdDeriv::unary(e, NdDeriv::hyp(&x.name));
                self.subst_elim(n, gamma, y, &d.premises[0], &prems[0])?
            }
            SeqRule::OneL { x } => {
                NdDeriv::new(NdRule::OneE { span: pos(x)? }, vec![NdDeriv::hyp(&x.name), sub(0)?])
            }
            SeqRule::FuseL { x, left, right } => NdDeriv::new(
                NdRule::FuseE {
                    span: pos(x)?,
                    left: left.clone(),
                    right: right.clone(),
                },
                vec![NdDeriv::hyp(&x.name), sub(0)?],
            ),
            SeqRule::PlusL { x, y } => NdDeriv::new(
                NdRule::PlusE {
                    span: pos(x)?,
                    x: y.clone(),
                },
                vec![NdDeriv::hyp(&x.name), sub(0)?, sub(1)?],
            ),
            SeqRule::DownL { x, y } => NdDeriv::new(
                NdRule::DownE {
                    span: pos(x)?,
                    x: y.clone(),
                },
                vec![NdDeriv::hyp(&x.name), sub(0)?],
            ),
            SeqRule::Struct(st) => NdDeriv::unary(NdRule::Struct(st.clone()), sub(0)?),
            SeqRule::Cut { var, prop, .. } => {
                let g0 = Self::premise_gamma(gamma, &prems[0])?;
                let d1 = self.tr(&d.premises[0], &prems[0], &g0)?;
                let g1 = Self::premise_gamma(gamma, &prems[1])?;
                let d2 = self.tr(&d.premises[1], &prems[1], &g1)?;
                substitute(self.theory, &d1, &g0, prop, var, &d2, &g1, &s.goal)?.0
            }
        };
        Ok(nd)
    }
}

/// Translates a sequent derivation of `s` into natural deduction under the
/// hypotheses of `s`. The result checks with output `s.ctx`.
pub fn seq_to_nd(theory: &ModeTheory, d: &SeqDeriv, s: &Sequent) -> Result<NdDeriv, TranslateError> {
    check_seq(theory, d, s, CheckOptions::default())?;
    // Natural deduction keeps every hypothesis in scope, so binders must be
    // distinct from each other and from the root context.
    let mut binders = Vec::new();
    seq_binders(d, &mut binders);
    let mut seen: std::collections::HashSet<&str> = s.ctx.vars().collect();
    let clash = !binders.iter().all(|b| seen.insert(b));
    let d = if clash {
        let mut supply = NameSupply::new();
        let mut names = Vec::new();
        d.names(&mut names);
        supply.avoid(names);
        supply.avoid(s.ctx.vars().map(str::to_string));
        d.freshen(&mut supply)
    } else {
        d.clone()
    };
    let gamma = UnorderedCtx::from(&s.ctx);
    Ok(SeqToNd { theory }.tr(&d, s, &gamma)?)
}

fn seq_binders(d: &SeqDeriv, out: &mut Vec<String>) {
    out.extend(d.rule.binders().into_iter().map(|(b, _)| b.to_string()));
    for p in &d.premises {
        seq_binders(p, out);
    }
}

struct NdToSeq<'a> {
    theory: &'a ModeTheory,
    supply: NameSupply,
}

impl NdToSeq<'_> {
    /// Cuts a major premise into a left rule whose principal hypothesis is
    /// the fresh cut variable.
    fn cut_into(
        &mut self,
        major: SeqDeriv,
        prop: Prop,
        lo: usize,
        hi: usize,
        left: impl FnOnce(VarRef) -> SeqDeriv,
        var: String,
    ) -> SeqDeriv {
        let cont = left(VarRef::new(&var));
        SeqDeriv::new(SeqRule::Cut { lo, hi, var, prop }, vec![major, cont])
    }

    fn tr(&mut self, d: &NdDeriv, gamma: &UnorderedCtx, goal: &Prop) -> Result<(SeqDeriv, Ctx), NdError> {
        let theory = self.theory;
        let js = child_judgments(theory, d, gamma, goal)?;
        let mut subs = Vec::with_capacity(js.len());
        for (c, (g, p)) in d.children.iter().zip(&js) {
            subs.push(self.tr(c, g, p)?);
        }
        let out = output(theory, d, gamma, goal)?;
        let mut it = subs.into_iter();
        let mut next = || take(&mut it);
        let seq = match &d.rule {
            NdRule::Hyp { x } => SeqDeriv::id(x),
            NdRule::Ann { .. } => next().0,
            NdRule::OneI => SeqDeriv::leaf(SeqRule::OneR),
            NdRule::FuseI => {
                let (a, oa) = next();
                let (b, _) = next();
                SeqDeriv::new(SeqRule::FuseR { split: oa.len() }, vec![a, b])
            }
            NdRule::PlusI1 => SeqDeriv::unary(SeqRule::PlusR1, next().0),
            NdRule::PlusI2 => SeqDeriv::unary(SeqRule::PlusR2, next().0),
            NdRule::WithI => {
                let (a, _) = next();
                let (b, _) = next();
                SeqDeriv::new(SeqRule::WithR, vec![a, b])
            }
            NdRule::RightImpI { x } => SeqDeriv::unary(SeqRule::RightImpR { x: x.clone() }, next().0),
            NdRule::LeftImpI { x } => SeqDeriv::unary(SeqRule::LeftImpR { x: x.clone() }, next().0),
            NdRule::UpI => SeqDeriv::unary(SeqRule::UpR, next().0),
            NdRule::DownI => SeqDeriv::unary(SeqRule::DownR, next().0),
            NdRule::Struct(st) => SeqDeriv::unary(SeqRule::Struct(st.clone()), next().0),
            NdRule::RightImpE | NdRule::LeftImpE => {
                let (sf, of) = next();
                let (sa, oa) = next();
                let fp = js[0].1.clone();
                let (f, y) = (self.supply.fresh("f"), self.supply.fresh("y"));
                let right = matches!(d.rule, NdRule::RightImpE);
                let (lo, hi) = if right { (0, of.len()) } else { (oa.len(), oa.len() + of.len()) };
                let split = oa.len();
                let yv = y.clone();
                self.cut_into(
                    sf,
                    fp,
                    lo,
                    hi,
                    |f| {
                        let r = if right {
                            SeqRule::RightImpL { f, split, y }
                        } else {
                            SeqRule::LeftImpL { f, split, y }
                        };
                        SeqDeriv::new(r, vec![sa, SeqDeriv::id(&yv)])
                    },
                    f,
                )
            }
            NdRule::WithE1 | NdRule::WithE2 | NdRule::UpE => {
                let (s0, o0) = next();
                let (f, y) = (self.supply.fresh("f"), self.supply.fresh("y"));
                let yv = y.clone();
                let rule = d.rule.clone();
                self.cut_into(
                    s0,
                    js[0].1.clone(),
                    0,
                    o0.len(),
                    |x| {
                        let r = match rule {
                            NdRule::WithE1 => SeqRule::WithL1 { x, y },
                            NdRule::WithE2 => SeqRule::WithL2 { x, y },
                            _ => SeqRule::UpL { x, y },
                        };
                        SeqDeriv::unary(r, SeqDeriv::id(&yv))
                    },
                    f,
                )
            }
            NdRule::OneE { span } | NdRule::FuseE { span, .. } | NdRule::PlusE { span, .. } | NdRule::DownE { span, .. } => {
                let (sm, om) = next();
                let bodies: Vec<SeqDeriv> = it.map(|(b, _)| b).collect();
                let f = self.supply.fresh("f");
                let rule = d.rule.clone();
                self.cut_into(
                    sm,
                    js[0].1.clone(),
                    *span,
                    *span + om.len(),
                    |x| match rule {
                        NdRule::OneE { .. } => SeqDeriv::new(SeqRule::OneL { x }, bodies),
                        NdRule::FuseE { left, right, .. } => {
                            SeqDeriv::new(SeqRule::FuseL { x, left, right }, bodies)
                        }
                        NdRule::PlusE { x: y, .. } => SeqDeriv::new(SeqRule::PlusL { x, y }, bodies),
                        NdRule::DownE { x: y, .. } => SeqDeriv::new(SeqRule::DownL { x, y }, bodies),
                        _ => unreachable!(),
                    },
                    f,
                )
            }
        };
        Ok((seq, out))
    }
}

fn take(it: &mut std::vec::IntoIter<(SeqDeriv, Ctx)>) -> (SeqDeriv, Ctx) {
    it.next().expect("child translation")
}

/// Translates a natural-deduction derivation of `gamma |- goal` into a
/// sequent derivation of `Ω |- goal`, where `Ω` is its output context.
/// Annotations are erased; eliminations become cuts against left rules.
pub fn nd_to_seq(
    theory: &ModeTheory,
    d: &NdDeriv,
    gamma: &UnorderedCtx,
    goal: &Prop,
) -> Result<(SeqDeriv, Sequent), NdError> {
    let out = check_nd(theory, d, gamma, goal)?;
    let mut supply = NameSupply::new();
    let mut names = Vec::new();
    d.names(&mut names);
    supply.avoid(names);
    supply.avoid(gamma.iter().map(|(v, _)| v.to_string()));
    let (s, _) = NdToSeq { theory, supply }.tr(d, gamma, goal)?;
    Ok((s, Sequent::new(out, goal.clone())))
}
