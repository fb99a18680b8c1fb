//! Structural rules shared by the sequent calculus and explicit natural
//! deduction.
//!
//! Every rule relates a *premise* context to a *conclusion* context with the
//! same positional reading in both systems. The sequent checker computes the
//! premise from the conclusion; the natural-deduction checker computes the
//! conclusion (the output context) from the premise.
//!
//! | rule              | premise                    | conclusion               |
//! |-------------------|----------------------------|--------------------------|
//! | `weak x p`        | Ω without position `p`     | Ω with `x` at `p`        |
//! | `mobL i j` (j<=i) | `x` at `i`                 | `x` at `j`               |
//! | `mobR i j` (j>=i) | `x` at `i`                 | `x` at `j`               |
//! | `contrL i j` (i<j)| copies at `i` and `j`      | copy at `j` dropped      |
//! | `contrR i j` (i<j)| copies at `i` and `j`      | copy at `i` dropped      |

use thiserror::Error;

use crate::modes::{ModeId, ModeTheory, StructuralProperty};
use crate::prop::{Ctx, Hyp, Prop};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Structural {
    Weak { var: String, pos: usize },
    MobL { from: usize, to: usize },
    MobR { from: usize, to: usize },
    ContrL { first: usize, second: usize },
    ContrR { first: usize, second: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StructError {
    #[error("position {pos} out of range for a context of length {len}")]
    OutOfRange { pos: usize, len: usize },
    #[error("{rule} requires {prop} for `{var}`")]
    Missing {
        rule: &'static str,
        var: String,
        prop: StructuralProperty,
    },
    #[error("{0}")]
    Shape(String),
    #[error("weakened `{var}` at mode {mode} is not above the goal mode {goal}")]
    ModeOrder {
        var: String,
        mode: String,
        goal: String,
    },
    #[error("`{0}` is not in scope")]
    NotInScope(String),
}

impl Structural {
    pub fn name(&self) -> &'static str {
        match self {
            Structural::Weak { .. } => "weak",
            Structural::MobL { .. } => "mobL",
            Structural::MobR { .. } => "mobR",
            Structural::ContrL { .. } => "contrL",
            Structural::ContrR { .. } => "contrR",
        }
    }

    fn need(
        theory: &ModeTheory,
        rule: &'static str,
        h: &Hyp,
        p: StructuralProperty,
    ) -> Result<(), StructError> {
        if theory.has(h.prop.mode(), p) {
            Ok(())
        } else {
            Err(StructError::Missing {
                rule,
                var: h.var.clone(),
                prop: p,
            })
        }
    }

    fn range(pos: usize, len: usize) -> Result<(), StructError> {
        if pos < len {
            Ok(())
        } else {
            Err(StructError::OutOfRange { pos, len })
        }
    }

    fn geq_goal(theory: &ModeTheory, h: &Hyp, goal: ModeId) -> Result<(), StructError> {
        if theory.geq(h.prop.mode(), goal) {
            Ok(())
        } else {
            Err(StructError::ModeOrder {
                var: h.var.clone(),
                mode: theory.name(h.prop.mode()).to_string(),
                goal: theory.name(goal).to_string(),
            })
        }
    }

    /// Computes the premise context from the conclusion (sequent direction).
    pub fn premise_of(
        &self,
        theory: &ModeTheory,
        conclusion: &Ctx,
        goal: ModeId,
    ) -> Result<Ctx, StructError> {
        use StructuralProperty::*;
        let len = conclusion.len();
        let mut ctx = conclusion.clone();
        match self {
            Structural::Weak { var, pos } => {
                Self::range(*pos, len)?;
                let h = &conclusion[*pos];
                if &h.var != var {
                    return Err(StructError::Shape(format!(
                        "weak names `{var}` but position {pos} holds `{}`",
                        h.var
                    )));
                }
                Self::need(theory, "weak", h, W)?;
                Self::geq_goal(theory, h, goal)?;
                ctx.remove(*pos);
            }
            Structural::MobL { from, to } | Structural::MobR { from, to } => {
                let left = matches!(self, Structural::MobL { .. });
                if (left && to > from) || (!left && to < from) {
                    return Err(StructError::Shape(format!(
                        "{} cannot move from {from} to {to}",
                        self.name()
                    )));
                }
                Self::range(*to, len)?;
                Self::range(*from, len)?;
                let h = ctx.remove(*to);
                Self::need(theory, self.name(), &h, if left { ML } else { MR })?;
                ctx.insert(*from, h);
            }
            Structural::ContrL { first, second } => {
                if first >= second {
                    return Err(StructError::Shape("contrL needs first < second".into()));
                }
                Self::range(*first, len)?;
                if *second > len {
                    return Err(StructError::OutOfRange { pos: *second, len });
                }
                let h = conclusion[*first].clone();
                Self::need(theory, "contrL", &h, CL)?;
                ctx.insert(*second, h);
            }
            Structural::ContrR { first, second } => {
                if first >= second {
                    return Err(StructError::Shape("contrR needs first < second".into()));
                }
                Self::range(second - 1, len)?;
                let h = conclusion[second - 1].clone();
                Self::need(theory, "contrR", &h, CR)?;
                ctx.insert(*first, h);
            }
        }
        Ok(ctx)
    }

    /// Computes the conclusion context from the premise (natural-deduction
    /// direction). `scope` resolves weakened variables.
    pub fn conclusion_of<'p>(
        &self,
        theory: &ModeTheory,
        premise: &Ctx,
        goal: ModeId,
        scope: impl Fn(&str) -> Option<&'p Prop>,
    ) -> Result<Ctx, StructError> {
        use StructuralProperty::*;
        let len = premise.len();
        let mut ctx = premise.clone();
        match self {
            Structural::Weak { var, pos } => {
                if *pos > len {
                    return Err(StructError::OutOfRange { pos: *pos, len });
                }
                let prop = scope(var).ok_or_else(|| StructError::NotInScope(var.clone()))?;
                let h = Hyp::new(var, prop.clone());
                Self::need(theory, "weak", &h, W)?;
                Self::geq_goal(theory, &h, goal)?;
                ctx.insert(*pos, h);
            }
            Structural::MobL { from, to } | Structural::MobR { from, to } => {
                let left = matches!(self, Structural::MobL { .. });
                if (left && to > from) || (!left && to < from) {
                    return Err(StructError::Shape(format!(
                        "{} cannot move from {from} to {to}",
                        self.name()
                    )));
                }
                Self::range(*from, len)?;
                Self::range(*to, len)?;
                let h = ctx.remove(*from);
                Self::need(theory, self.name(), &h, if left { ML } else { MR })?;
                ctx.insert(*to, h);
            }
            Structural::ContrL { first, second } | Structural::ContrR { first, second } => {
                if first >= second {
                    return Err(StructError::Shape(format!(
                        "{} needs first < second",
                        self.name()
                    )));
                }
                Self::range(*second, len)?;
                if premise[*first] != premise[*second] {
                    return Err(StructError::Shape(format!(
                        "positions {first} and {second} hold different hypotheses"
                    )));
                }
                if matches!(self, Structural::ContrL { .. }) {
                    Self::need(theory, "contrL", &premise[*first], CL)?;
                    ctx.remove(*second);
                } else {
                    Self::need(theory, "contrR", &premise[*first], CR)?;
                    ctx.remove(*first);
                }
            }
        }
        Ok(ctx)
    }

    pub fn to_sexp_head(&self) -> String {
        match self {
            Structural::Weak { var, pos } => format!("weak {var} {pos}"),
            Structural::MobL { from, to } => format!("mobL {from} {to}"),
            Structural::MobR { from, to } => format!("mobR {from} {to}"),
            Structural::ContrL { first, second } => format!("contrL {first} {second}"),
            Structural::ContrR { first, second } => format!("contrR {first} {second}"),
        }
    }
}

/// Replacement of every occurrence of `var` by `block`.
#[derive(Debug, Clone)]
pub struct Expansion<'a> {
    pub var: &'a str,
    pub block: &'a Ctx,
}

impl Expansion<'_> {
    /// Maps a boundary (or position) in `ctx` to the expanded context.
    pub fn map(&self, ctx: &Ctx, p: usize) -> usize {
        let c = ctx[..p].iter().filter(|h| h.var == self.var).count();
        p + c * self.block.len() - c
    }

    pub fn apply(&self, ctx: &Ctx) -> Ctx {
        let mut out = Ctx::new();
        for h in ctx.iter() {
            if h.var == self.var {
                out.extend(self.block.iter().cloned());
            } else {
                out.push(h.clone());
            }
        }
        out
    }

    /// Lifts a structural rule through the expansion. The result is a chain
    /// listed conclusion-first; it is a single rule unless the rule acts on
    /// the expanded variable, in which case each block element is handled.
    pub fn lift(&self, rule: &Structural, premise: &Ctx, conclusion: &Ctx) -> Vec<Structural> {
        let len = self.block.len();
        match rule {
            Structural::Weak { var, pos } => {
                let p = self.map(conclusion, *pos);
                if var == self.var {
                    self.block
                        .iter()
                        .map(|h| Structural::Weak {
                            var: h.var.clone(),
                            pos: p,
                        })
                        .collect()
                } else {
                    vec![Structural::Weak {
                        var: var.clone(),
                        pos: p,
                    }]
                }
            }
            Structural::MobL { from, to } | Structural::MobR { from, to } => {
                let a = self.map(premise, *from);
                let b = self.map(conclusion, *to);
                let left = matches!(rule, Structural::MobL { .. });
                if premise[*from].var != self.var {
                    let r = if left {
                        Structural::MobL { from: a, to: b }
                    } else {
                        Structural::MobR { from: a, to: b }
                    };
                    return vec![r];
                }
                if left {
                    (0..len)
                        .rev()
                        .map(|e| Structural::MobL {
                            from: a + e,
                            to: b + e,
                        })
                        .collect()
                } else {
                    (0..len)
                        .map(|e| Structural::MobR {
                            from: a + e,
                            to: b + e,
                        })
                        .collect()
                }
            }
            Structural::ContrL { first, second } => {
                let i = self.map(premise, *first);
                let j = self.map(premise, *second);
                if premise[*first].var != self.var {
                    return vec![Structural::ContrL { first: i, second: j }];
                }
                (0..len)
                    .map(|t| Structural::ContrL {
                        first: i + t,
                        second: j + t,
                    })
                    .collect()
            }
            Structural::ContrR { first, second } => {
                let i = self.map(premise, *first);
                let j = self.map(premise, *second);
                if premise[*first].var != self.var {
                    return vec![Structural::ContrR { first: i, second: j }];
                }
                (0..len)
                    .map(|t| Structural::ContrR {
                        first: i + t,
                        second: j + 1 + 2 * t - len,
                    })
                    .collect()
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modes::{ModeDecls, Sigma};

    fn setup() -> (ModeTheory, ModeId) {
        let t = ModeTheory::validate(&ModeDecls::default().mode("u", Sigma::FULL), false).unwrap();
        (t, ModeId(0))
    }

    fn ctx(names: &[&str], m: ModeId) -> Ctx {
        names
            .iter()
            .map(|n| Hyp::new(n, Prop::atom(&n.to_uppercase(), m)))
            .collect()
    }

    #[test]
    fn directions_agree() {
        let (t, m) = setup();
        let premise = ctx(&["a", "b", "c", "b"], m);
        let rules = [
            Structural::MobL { from: 2, to: 0 },
            Structural::MobR { from: 0, to: 3 },
            Structural::ContrL { first: 1, second: 3 },
            Structural::ContrR { first: 1, second: 3 },
        ];
        for r in rules {
            let c = r.conclusion_of(&t, &premise, m, |_| None).unwrap();
            let back = r.premise_of(&t, &c, m).unwrap();
            assert_eq!(back, premise, "{r:?}");
        }
        let p = Prop::atom("Z", m);
        let w = Structural::Weak {
            var: "z".into(),
            pos: 2,
        };
        let c = w.conclusion_of(&t, &premise, m, |_| Some(&p)).unwrap();
        assert_eq!(c[2].var, "z");
        assert_eq!(w.premise_of(&t, &c, m).unwrap(), premise);
    }

    #[test]
    fn lifted_chains_reach_the_expanded_contexts() {
        let (t, m) = setup();
        let block = ctx(&["p", "q"], m);
        let ex = Expansion {
            var: "x",
            block: &block,
        };
        let premise = ctx(&["a", "x", "b", "x", "c"], m);
        let rules = [
            Structural::MobL { from: 3, to: 0 },
            Structural::MobR { from: 1, to: 4 },
            Structural::ContrL { first: 1, second: 3 },
            Structural::ContrR { first: 1, second: 3 },
            Structural::MobL { from: 4, to: 1 },
        ];
        for r in rules {
            let conclusion = r.conclusion_of(&t, &premise, m, |_| None).unwrap();
            let chain = ex.lift(&r, &premise, &conclusion);
            let mut cur = ex.apply(&conclusion);
            for s in &chain {
                cur = s.premise_of(&t, &cur, m).unwrap();
            }
            assert_eq!(cur, ex.apply(&premise), "{r:?}");
        }
        let conclusion = ctx(&["a", "x", "b"], m);
        let w = Structural::Weak {
            var: "x".into(),
            pos: 1,
        };
        let mut cur = ex.apply(&conclusion);
        for s in ex.lift(&w, &ctx(&["a", "b"], m), &conclusion) {
            cur = s.premise_of(&t, &cur, m).unwrap();
        }
        assert_eq!(cur, ctx(&["a", "b"], m));
    }

    #[test]
    fn side_conditions() {
        let t = ModeTheory::lnl();
        let l = t.lookup("L").unwrap();
        let c = ctx(&["a", "b"], l);
        assert!(matches!(
            Structural::MobL { from: 1, to: 0 }.premise_of(&t, &c, l),
            Err(StructError::Missing { .. })
        ));
        assert!(matches!(
            Structural::Weak {
                var: "a".into(),
                pos: 0
            }
            .premise_of(&t, &c, l),
            Err(StructError::Missing { .. })
        ));
        assert!(matches!(
            Structural::MobL { from: 0, to: 1 }.premise_of(&t, &c, l),
            Err(StructError::Shape(_))
        ));
    }
}
