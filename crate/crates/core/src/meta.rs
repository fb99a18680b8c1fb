//! Multicut admissibility, cut elimination and identity expansion.
//!
//! `mcut(D, E, x)` takes `D : Ω_A |- A` and `E : Δ |- C` where `x : A` occurs
//! any number of times in `Δ`, and returns a cut-free derivation of `Δ` with
//! every occurrence of `x` replaced by `Ω_A`. The cases follow the last rule
//! of `E` first and fall back to the last rule of `D` when `E` is principal
//! on `x`.

use thiserror::Error;

use crate::fresh::NameSupply;
use crate::modes::ModeTheory;
use crate::prop::{Ctx, Hyp, Prop};
use crate::seq::{apply_rule, check_seq, CheckOptions, SeqDeriv, SeqRule, Sequent, VarRef};
use crate::structural::{Expansion, Structural};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetaError {
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("ill-formed proposition: {0}")]
    IllFormed(String),
    #[error("internal error: {0}")]
    Internal(String),
}

type Result<T> = std::result::Result<T, MetaError>;

fn expand_except(ctx: &Ctx, x: &str, block: &Ctx, keep: Option<usize>) -> Ctx {
    let mut out = Ctx::new();
    for (i, h) in ctx.iter().enumerate() {
        if h.var == x && Some(i) != keep {
            out.extend(block.iter().cloned());
        } else {
            out.push(h.clone());
        }
    }
    out
}

fn substituted(sd: &Sequent, se: &Sequent, x: &str) -> Sequent {
    Sequent::new(expand_except(&se.ctx, x, &sd.ctx, None), se.goal.clone())
}

fn shift(st: &Structural, q: usize) -> Structural {
    match st {
        Structural::Weak { var, pos } => Structural::Weak {
            var: var.clone(),
            pos: pos + q,
        },
        Structural::MobL { from, to } => Structural::MobL {
            from: from + q,
            to: to + q,
        },
        Structural::MobR { from, to } => Structural::MobR {
            from: from + q,
            to: to + q,
        },
        Structural::ContrL { first, second } => Structural::ContrL {
            first: first + q,
            second: second + q,
        },
        Structural::ContrR { first, second } => Structural::ContrR {
            first: first + q,
            second: second + q,
        },
    }
}

/// Wraps `d` in a chain of structural rules listed conclusion-first.
fn wrap_chain(chain: Vec<Structural>, d: SeqDeriv) -> SeqDeriv {
    chain
        .into_iter()
        .rev()
        .fold(d, |acc, st| SeqDeriv::unary(SeqRule::Struct(st), acc))
}

struct Meta<'t> {
    theory: &'t ModeTheory,
    supply: NameSupply,
}

impl Meta<'_> {
    fn premises(&self, d: &SeqDeriv, s: &Sequent) -> Result<Vec<Sequent>> {
        apply_rule(self.theory, s, &d.rule, CheckOptions::default()).map_err(|e| {
            MetaError::Internal(format!(
                "{} does not apply to {}: {e}",
                d.rule.name(),
                s.display(self.theory)
            ))
        })
    }

    /// Renames free `from` to `to`, recomputing occurrence indices.
    fn rename_free(&self, e: &SeqDeriv, se: &Sequent, from: &str, to: &str) -> Result<SeqDeriv> {
        let ps = self.premises(e, se)?;
        let ctx: Ctx = se
            .ctx
            .iter()
            .map(|h| {
                if h.var == from {
                    Hyp::new(to, h.prop.clone())
                } else {
                    h.clone()
                }
            })
            .collect();
        let mut rule = e.rule.clone();
        match &mut rule {
            SeqRule::Id { x } => {
                if x.name == from {
                    x.name = to.to_string();
                }
            }
            SeqRule::Struct(Structural::Weak { var, .. }) => {
                if var == from {
                    *var = to.to_string();
                }
            }
            other => {
                if let Some(r) = other.principal_mut() {
                    let p = r.resolve(&se.ctx).map_err(|k| MetaError::Internal(k.to_string()))?;
                    *r = VarRef::at(&ctx, p);
                }
            }
        }
        let premises = e
            .premises
            .iter()
            .zip(&ps)
            .map(|(d, s)| self.rename_free(d, s, from, to))
            .collect::<Result<_>>()?;
        Ok(SeqDeriv::new(rule, premises))
    }

    /// Multicut: replaces every occurrence of `x` in `se` by the context of
    /// `sd`.
    fn mcut(&mut self, d: &SeqDeriv, sd: &Sequent, e: &SeqDeriv, se: &Sequent, x: &str) -> Result<SeqDeriv> {
        if se.ctx.count_var(x) == 0 {
            return Ok(e.clone());
        }
        let d = d.freshen(&mut self.supply);
        if let SeqRule::Id { x: y } = &d.rule {
            return self.rename_free(e, se, x, &y.name);
        }
        let exp = Expansion {
            var: x,
            block: &sd.ctx,
        };
        let ps = self.premises(e, se)?;
        match &e.rule {
            SeqRule::Id { .. } => Ok(d),
            SeqRule::Cut { .. } => Err(MetaError::Precondition("derivation contains a cut".into())),
            SeqRule::Struct(st) => {
                let inner = self.mcut(&d, sd, &e.premises[0], &ps[0], x)?;
                Ok(wrap_chain(exp.lift(st, &ps[0].ctx, &se.ctx), inner))
            }
            rule => {
                let principal = match rule.principal() {
                    Some(r) => {
                        let p = r.resolve(&se.ctx).map_err(|k| MetaError::Internal(k.to_string()))?;
                        (se.ctx[p].var == x).then_some(p)
                    }
                    None => None,
                };
                let mut subs = Vec::with_capacity(ps.len());
                for (ei, si) in e.premises.iter().zip(&ps) {
                    subs.push(self.mcut(&d, sd, ei, si, x)?);
                }
                let new_ctx = expand_except(&se.ctx, x, &sd.ctx, principal);
                let rule2 = self.map_rule(rule, &se.ctx, &exp, &new_ctx)?;
                let e2 = SeqDeriv::new(rule2, subs);
                match principal {
                    None => Ok(e2),
                    Some(_) => {
                        let se2 = Sequent::new(new_ctx, se.goal.clone());
                        self.principal(&d, sd, &e2, &se2, x)
                    }
                }
            }
        }
    }

    /// Re-expresses a logical rule of `E` in the expanded context.
    fn map_rule(&self, rule: &SeqRule, old: &Ctx, exp: &Expansion<'_>, new: &Ctx) -> Result<SeqRule> {
        let mut r = rule.clone();
        let p = match rule.principal() {
            Some(v) => Some(v.resolve(old).map_err(|k| MetaError::Internal(k.to_string()))?),
            None => None,
        };
        match &mut r {
            SeqRule::FuseR { split } => *split = exp.map(old, *split),
            SeqRule::RightImpL { split, .. } => {
                let p = p.unwrap();
                *split = exp.map(old, p + 1 + *split) - exp.map(old, p + 1);
            }
            SeqRule::LeftImpL { split, .. } => {
                let p = p.unwrap();
                *split = exp.map(old, p) - exp.map(old, p - *split);
            }
            _ => {}
        }
        if let (Some(p), Some(v)) = (p, r.principal_mut()) {
            *v = VarRef::at(new, exp.map(old, p));
        }
        Ok(r)
    }

    /// `E` ends in a left rule on the single occurrence of `x`.
    fn principal(&mut self, d: &SeqDeriv, sd: &Sequent, e: &SeqDeriv, se: &Sequent, x: &str) -> Result<SeqDeriv> {
        let q = se
            .ctx
            .position(x, 0)
            .ok_or_else(|| MetaError::Internal("principal occurrence vanished".into()))?;
        let psd = self.premises(d, sd)?;
        let pse = self.premises(e, se)?;
        let mismatch = || {
            MetaError::Internal(format!(
                "principal case {} against {}",
                d.rule.name(),
                e.rule.name()
            ))
        };
        let sub = |a: &Sequent, b: &Sequent, v: &str| substituted(a, b, v);
        match (&d.rule, &e.rule) {
            (SeqRule::RightImpR { x: z }, SeqRule::RightImpL { y, .. })
            | (SeqRule::LeftImpR { x: z }, SeqRule::LeftImpL { y, .. }) => {
                let f = self.mcut(&e.premises[0], &pse[0], &d.premises[0], &psd[0], z)?;
                let sf = sub(&pse[0], &psd[0], z);
                self.mcut(&f, &sf, &e.premises[1], &pse[1], y)
            }
            (SeqRule::FuseR { .. }, SeqRule::FuseL { left, right, .. }) => {
                let g = self.mcut(&d.premises[0], &psd[0], &e.premises[0], &pse[0], left)?;
                let sg = sub(&psd[0], &pse[0], left);
                self.mcut(&d.premises[1], &psd[1], &g, &sg, right)
            }
            (SeqRule::OneR, SeqRule::OneL { .. }) => Ok(e.premises[0].clone()),
            (SeqRule::PlusR1, SeqRule::PlusL { y, .. }) => {
                self.mcut(&d.premises[0], &psd[0], &e.premises[0], &pse[0], y)
            }
            (SeqRule::PlusR2, SeqRule::PlusL { y, .. }) => {
                self.mcut(&d.premises[0], &psd[0], &e.premises[1], &pse[1], y)
            }
            (SeqRule::WithR, SeqRule::WithL1 { y, .. }) => {
                self.mcut(&d.premises[0], &psd[0], &e.premises[0], &pse[0], y)
            }
            (SeqRule::WithR, SeqRule::WithL2 { y, .. }) => {
                self.mcut(&d.premises[1], &psd[1], &e.premises[0], &pse[0], y)
            }
            (SeqRule::DownR, SeqRule::DownL { y, .. }) | (SeqRule::UpR, SeqRule::UpL { y, .. }) => {
                self.mcut(&d.premises[0], &psd[0], &e.premises[0], &pse[0], y)
            }
            (r, _) if r.is_right_rule() => Err(mismatch()),
            (SeqRule::Id { .. }, _) => {
                let SeqRule::Id { x: y } = &d.rule else { unreachable!() };
                self.rename_free(e, se, x, &y.name)
            }
            (SeqRule::Cut { .. }, _) => Err(MetaError::Precondition("derivation contains a cut".into())),
            (SeqRule::Struct(st), _) => {
                let inner = self.mcut(&d.premises[0], &psd[0], e, se, x)?;
                Ok(SeqDeriv::unary(SeqRule::Struct(shift(st, q)), inner))
            }
            (rule, _) => {
                // left rule of D: lift it into the surrounding context
                let mut subs = Vec::with_capacity(psd.len());
                // the argument premise of an implication keeps its own goal
                let argument = matches!(rule, SeqRule::RightImpL { .. } | SeqRule::LeftImpL { .. });
                for (i, (di, si)) in d.premises.iter().zip(&psd).enumerate() {
                    if !(argument && i == 0) {
                        subs.push(self.mcut(di, si, e, se, x)?);
                    } else {
                        subs.push(di.clone());
                    }
                }
                let big = se.ctx.splice(q, q + 1, &sd.ctx);
                let mut r = rule.clone();
                let v = r.principal_mut().ok_or_else(mismatch)?;
                let p = v.resolve(&sd.ctx).map_err(|k| MetaError::Internal(k.to_string()))?;
                *v = VarRef::at(&big, p + q);
                Ok(SeqDeriv::new(r, subs))
            }
        }
    }

    fn eliminate(&mut self, d: &SeqDeriv, s: &Sequent) -> Result<SeqDeriv> {
        let ps = self.premises(d, s)?;
        let subs = d
            .premises
            .iter()
            .zip(&ps)
            .map(|(di, si)| self.eliminate(di, si))
            .collect::<Result<Vec<_>>>()?;
        match &d.rule {
            SeqRule::Cut { var, .. } => self.mcut(&subs[0], &ps[0], &subs[1], &ps[1], var),
            rule => Ok(SeqDeriv::new(rule.clone(), subs)),
        }
    }
}

fn supply_for(ds: &[&SeqDeriv], ss: &[&Sequent]) -> NameSupply {
    let mut names = Vec::new();
    for d in ds {
        d.names(&mut names);
    }
    for s in ss {
        names.extend(s.ctx.vars().map(str::to_string));
    }
    let mut supply = NameSupply::new();
    supply.avoid(names);
    supply
}

fn precheck(theory: &ModeTheory, d: &SeqDeriv, s: &Sequent, what: &str) -> Result<()> {
    check_seq(theory, d, s, CheckOptions::default())
        .map_err(|e| MetaError::Precondition(format!("{what} does not check: {e}")))
}

/// Admissibility of multicut. `d` derives `sd = Ω_A |- A`, `e` derives
/// `se = Δ |- C`; the result derives `Δ` with each `x` replaced by `Ω_A`.
pub fn admit_multicut(
    theory: &ModeTheory,
    d: &SeqDeriv,
    sd: &Sequent,
    e: &SeqDeriv,
    se: &Sequent,
    x: &str,
) -> Result<SeqDeriv> {
    precheck(theory, d, sd, "D")?;
    precheck(theory, e, se, "E")?;
    if !d.is_cut_free() || !e.is_cut_free() {
        return Err(MetaError::Precondition("inputs must be cut-free".into()));
    }
    if sd.ctx.contains_var(x) {
        return Err(MetaError::Precondition(format!("`{x}` occurs in the context of D")));
    }
    let m = sd.goal.mode();
    let n = se.ctx.count_var(x);
    if !theory.multiplicity_compatible(m, n) {
        return Err(MetaError::Precondition(format!(
            "{n} occurrences of `{x}` are not allowed at mode {}",
            theory.name(m)
        )));
    }
    if se.ctx.iter().any(|h| h.var == x && h.prop != sd.goal) {
        return Err(MetaError::Precondition(format!("`{x}` is not labeled by the cut formula")));
    }
    if !theory.geq(m, se.goal.mode()) {
        return Err(MetaError::Precondition("cut mode is below the goal mode".into()));
    }
    let mut meta = Meta {
        theory,
        supply: supply_for(&[d, e], &[sd, se]),
    };
    let d0 = d.freshen(&mut meta.supply);
    let e0 = e.freshen(&mut meta.supply);
    meta.mcut(&d0, sd, &e0, se, x)
}

/// Replaces every cut, innermost first, by multicut admissibility.
pub fn eliminate_cuts(theory: &ModeTheory, d: &SeqDeriv, s: &Sequent) -> Result<SeqDeriv> {
    precheck(theory, d, s, "input")?;
    if d.is_cut_free() {
        return Ok(d.clone());
    }
    let mut meta = Meta {
        theory,
        supply: supply_for(&[d], &[s]),
    };
    let d0 = d.freshen(&mut meta.supply);
    meta.eliminate(&d0, s)
}

/// A derivation of `(x : A) |- A` using `id` only on atoms.
pub fn expand_identity(theory: &ModeTheory, a: &Prop, x: &str) -> Result<SeqDeriv> {
    a.check(theory).map_err(|e| MetaError::IllFormed(e.to_string()))?;
    let mut supply = NameSupply::new();
    supply.avoid([x]);
    Ok(expand(a, x, &mut supply))
}

fn expand(a: &Prop, x: &str, s: &mut NameSupply) -> SeqDeriv {
    let xr = || VarRef::new(x);
    match a {
        Prop::Atom(..) => SeqDeriv::id(x),
        Prop::One(_) => SeqDeriv::unary(SeqRule::OneL { x: xr() }, SeqDeriv::leaf(SeqRule::OneR)),
        Prop::RightImp(a1, b1) | Prop::LeftImp(a1, b1) => {
            let z = s.fresh("z");
            let y = s.fresh("y");
            let arg = expand(a1, &z, s);
            let body = expand(b1, &y, s);
            if matches!(a, Prop::RightImp(..)) {
                SeqDeriv::unary(
                    SeqRule::RightImpR { x: z },
                    SeqDeriv::new(SeqRule::RightImpL { f: xr(), split: 1, y }, vec![arg, body]),
                )
            } else {
                SeqDeriv::unary(
                    SeqRule::LeftImpR { x: z },
                    SeqDeriv::new(SeqRule::LeftImpL { f: xr(), split: 1, y }, vec![arg, body]),
                )
            }
        }
        Prop::With(a1, b1) => {
            let (y1, y2) = (s.fresh("y"), s.fresh("y"));
            let l = expand(a1, &y1, s);
            let r = expand(b1, &y2, s);
            SeqDeriv::new(
                SeqRule::WithR,
                vec![
                    SeqDeriv::unary(SeqRule::WithL1 { x: xr(), y: y1 }, l),
                    SeqDeriv::unary(SeqRule::WithL2 { x: xr(), y: y2 }, r),
                ],
            )
        }
        Prop::Plus(a1, b1) => {
            let y = s.fresh("y");
            let l = expand(a1, &y, s);
            let r = expand(b1, &y, s);
            SeqDeriv::new(
                SeqRule::PlusL { x: xr(), y },
                vec![SeqDeriv::unary(SeqRule::PlusR1, l), SeqDeriv::unary(SeqRule::PlusR2, r)],
            )
        }
        Prop::Fuse(a1, b1) => {
            let (y1, y2) = (s.fresh("y"), s.fresh("y"));
            let l = expand(a1, &y1, s);
            let r = expand(b1, &y2, s);
            SeqDeriv::unary(
                SeqRule::FuseL {
                    x: xr(),
                    left: y1,
                    right: y2,
                },
                SeqDeriv::new(SeqRule::FuseR { split: 1 }, vec![l, r]),
            )
        }
        Prop::Down(_, a1) => {
            let y = s.fresh("y");
            let inner = expand(a1, &y, s);
            SeqDeriv::unary(SeqRule::DownL { x: xr(), y }, SeqDeriv::unary(SeqRule::DownR, inner))
        }
        Prop::Up(_, a1) => {
            let y = s.fresh("y");
            let inner = expand(a1, &y, s);
            SeqDeriv::unary(SeqRule::UpR, SeqDeriv::unary(SeqRule::UpL { x: xr(), y }, inner))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modes::{ModeDecls, Sigma, StructuralProperty};
    use crate::parse::{parse_prop, parse_seq_deriv, parse_sequent};
    use crate::prop::Signature;

    fn lnl() -> Signature {
        Signature::new(ModeTheory::lnl())
            .with_atom("P", "L")
            .with_atom("Q", "L")
            .with_atom("R", "L")
            .with_atom("X", "U")
    }

    fn elim_ok(sig: &Signature, seq: &str, deriv: &str) -> SeqDeriv {
        let s = parse_sequent(sig, seq).unwrap();
        let d = parse_seq_deriv(sig, deriv).unwrap();
        check_seq(&sig.theory, &d, &s, CheckOptions::default()).unwrap();
        let r = eliminate_cuts(&sig.theory, &d, &s).unwrap();
        assert!(r.is_cut_free());
        check_seq(&sig.theory, &r, &s, CheckOptions::default())
            .unwrap_or_else(|e| panic!("{e}\n{}", r.to_sexp(&sig.theory)));
        r
    }

    #[test]
    fn cut_of_identities() {
        let sig = lnl();
        let r = elim_ok(&sig, "(x : P) |- P", "(cut 0 1 z [P] (id x) (id z))");
        assert_eq!(r, SeqDeriv::id("x"));
    }

    #[test]
    fn cut_free_input_unchanged() {
        let sig = lnl();
        let src = "(fuseR 1 (id x) (id y))";
        let r = elim_ok(&sig, "(x : P) (y : Q) |- P * Q", src);
        assert_eq!(r.to_sexp(&sig.theory), src);
    }

    #[test]
    fn principal_cases() {
        let sig = lnl();
        elim_ok(
            &sig,
            "(a : P) (b : Q) |- P * Q",
            "(cut 0 2 z [P * Q] (fuseR 1 (id a) (id b)) (fuseL z u v (fuseR 1 (id u) (id v))))",
        );
        elim_ok(
            &sig,
            "(f : P ->> Q) (a : P) |- Q",
            "(cut 0 1 g [P ->> Q] (impRr w (impLr f 1 (id w) y (id y))) (cut 0 2 h [Q] (impLr g 1 (id a) y (id y)) (id h)))",
        );
        elim_ok(
            &sig,
            "(a : P) |- P + Q",
            "(cut 0 1 z [Q + P] (plusR2 (id a)) (plusL z y (plusR2 (id y)) (plusR1 (id y))))",
        );
        elim_ok(
            &sig,
            "(a : P) |- P",
            "(cut 0 1 z [P & P] (withR (id a) (id a)) (withL2 z y (id y)))",
        );
        elim_ok(&sig, ". |- 1[L]", "(cut 0 0 z [1[L]] (oneR) (oneL z (oneR)))");
    }

    #[test]
    fn structural_cases_use_monotonicity() {
        let sig = lnl();
        // contraction on a persistent cut formula whose context is persistent
        elim_ok(
            &sig,
            "(u : X) |- X * X",
            "(cut 0 1 z [up[U] X] (upR (id u)) (contrL 0 1 (fuseR 1 (upL z a (id a)) (upL z b (id b)))))",
        );
        // weakening
        elim_ok(
            &sig,
            "(u : X) (p : P) |- P",
            "(cut 0 1 z [up[U] X] (upR (id u)) (weak z 0 (id p)))",
        );
    }

    #[test]
    fn commuting_into_d() {
        let sig = lnl();
        elim_ok(
            &sig,
            "(c : P * Q) |- P * Q",
            "(cut 0 1 z [P * Q] (fuseL c a b (fuseR 1 (id a) (id b))) (id z))",
        );
        elim_ok(
            &sig,
            "(c : P * Q) |- P * Q",
            "(cut 0 1 z [P * Q] (fuseL c a b (fuseR 1 (id a) (id b))) (fuseL z u v (fuseR 1 (id u) (id v))))",
        );
        // the argument of f has the cut formula as its goal but stays put
        elim_ok(
            &sig,
            "(f : P ->> P) (a : P) (b : Q) |- P * Q",
            "(cut 0 2 z [P] (impLr f 1 (id a) y (id y)) (fuseR 1 (id z) (id b)))",
        );
    }

    #[test]
    fn mobility_example_with_cut() {
        use StructuralProperty::*;
        let d = ModeDecls::default()
            .mode("k", Sigma::from_props([ML]))
            .mode("m", Sigma::EMPTY)
            .geq("k", "m");
        let sig = Signature::new(ModeTheory::validate(&d, false).unwrap())
            .with_atom("A", "k")
            .with_atom("B", "m");
        elim_ok(
            &sig,
            "(x : down[m] A) (y : B) |- B * down[m] A",
            "(cut 0 1 w [down[m] A] (downL x x' (downR (id x'))) (downL w x' (mobL 1 0 (fuseR 1 (id y) (downR (id x'))))))",
        );
    }

    #[test]
    fn identity_expansion_checks_atomically() {
        let sig = lnl();
        for src in [
            "P",
            "P ->> Q",
            "P >-> Q",
            "down[L] up[U] X",
            "(P * Q) & (1[L] + R)",
            "up[U] X ->> X",
        ] {
            let a = parse_prop(&sig, src).unwrap();
            let d = expand_identity(&sig.theory, &a, "x").unwrap();
            let s = Sequent::new(Ctx(vec![Hyp::new("x", a.clone())]), a);
            check_seq(&sig.theory, &d, &s, CheckOptions { atomic_id: true })
                .unwrap_or_else(|e| panic!("{src}: {e}"));
        }
    }

    #[test]
    fn multicut_with_two_occurrences() {
        let sig = lnl();
        let d = parse_seq_deriv(&sig, "(upR (id u))").unwrap();
        let sd = parse_sequent(&sig, "(u : X) |- up[U] X").unwrap();
        let e = parse_seq_deriv(&sig, "(fuseR 1 (upL z a (id a)) (upL z b (id b)))").unwrap();
        let se = parse_sequent(&sig, "(z : up[U] X) (z : up[U] X) |- X * X").unwrap();
        let r = admit_multicut(&sig.theory, &d, &sd, &e, &se, "z").unwrap();
        let target = parse_sequent(&sig, "(u : X) (u : X) |- X * X").unwrap();
        check_seq(&sig.theory, &r, &target, CheckOptions::default()).unwrap();

        let lin = parse_seq_deriv(&sig, "(id p)").unwrap();
        let slin = parse_sequent(&sig, "(p : P) |- P").unwrap();
        let e2 = parse_seq_deriv(&sig, "(contrL 0 1 (id z))").unwrap();
        let se2 = parse_sequent(&sig, "(z : P) |- P").unwrap();
        assert!(admit_multicut(&sig.theory, &lin, &slin, &e2, &se2, "z").is_err());
    }
}
