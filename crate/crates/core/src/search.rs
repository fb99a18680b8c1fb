//! Bounded backward proof search over cut-free sequent derivations.
//!
//! Iterative deepening over every rule instance, with loop detection on
//! sequents (up to renaming) along the current branch and a failure cache
//! that is only consulted when the cached failure did not depend on the
//! branch above it.

use std::collections::HashMap;

use crate::modes::ModeTheory;
use crate::prop::{Ctx, Prop};
use crate::seq::{apply_rule, CheckOptions, SeqDeriv, SeqRule, Sequent, VarRef};
use crate::structural::Structural;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchBudget {
    pub max_depth: usize,
    /// Longest run of consecutive structural rules on one branch.
    pub max_structural_run: usize,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget {
            max_depth: 12,
            max_structural_run: 4,
        }
    }
}

impl SearchBudget {
    pub fn depth(max_depth: usize) -> Self {
        SearchBudget {
            max_depth,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Provable(SeqDeriv),
    NotProvable,
    Unknown,
}

/// Sequent up to renaming: variables numbered by first occurrence.
type Canon = (Vec<(u32, Prop)>, Prop);

fn canon(s: &Sequent) -> Canon {
    let mut ids: Vec<&str> = Vec::new();
    let ctx = s
        .ctx
        .iter()
        .map(|h| {
            let i = match ids.iter().position(|v| *v == h.var) {
                Some(i) => i,
                None => {
                    ids.push(&h.var);
                    ids.len() - 1
                }
            };
            (i as u32, h.prop.clone())
        })
        .collect();
    (ctx, s.goal.clone())
}

fn fresh_name(ctx: &Ctx, hint: &str, also: Option<&str>) -> String {
    let taken = |n: &str| ctx.contains_var(n) || also == Some(n);
    if !taken(hint) {
        return hint.to_string();
    }
    (1..)
        .map(|i| format!("{hint}{i}"))
        .find(|n| !taken(n))
        .expect("unbounded")
}

/// Every backward rule instance for `s`, in search order: identity, then
/// invertible rules, then structural rules, then the rest.
pub fn candidate_rules(s: &Sequent) -> Vec<SeqRule> {
    let ctx = &s.ctx;
    let n = ctx.len();
    let mut id = Vec::new();
    let mut inv = Vec::new();
    let mut structural = Vec::new();
    let mut rest = Vec::new();
    if n == 1 {
        id.push(SeqRule::Id {
            x: VarRef::new(&ctx[0].var),
        });
    }
    match &s.goal {
        Prop::RightImp(..) => inv.push(SeqRule::RightImpR {
            x: fresh_name(ctx, "x", None),
        }),
        Prop::LeftImp(..) => inv.push(SeqRule::LeftImpR {
            x: fresh_name(ctx, "x", None),
        }),
        Prop::With(..) => inv.push(SeqRule::WithR),
        Prop::Up(..) => inv.push(SeqRule::UpR),
        Prop::One(_) => rest.push(SeqRule::OneR),
        Prop::Fuse(..) => rest.extend((0..=n).map(|split| SeqRule::FuseR { split })),
        Prop::Plus(..) => rest.extend([SeqRule::PlusR1, SeqRule::PlusR2]),
        Prop::Down(..) => rest.push(SeqRule::DownR),
        Prop::Atom(..) => {}
    }
    for p in 0..n {
        let x = VarRef::at(ctx, p);
        let y = || fresh_name(ctx, &format!("{}'", ctx[p].var), None);
        match &ctx[p].prop {
            Prop::One(_) => inv.push(SeqRule::OneL { x }),
            Prop::Fuse(..) => {
                let left = fresh_name(ctx, &format!("{}1", ctx[p].var), None);
                let right = fresh_name(ctx, &format!("{}2", ctx[p].var), Some(&left));
                inv.push(SeqRule::FuseL { x, left, right });
            }
            Prop::Plus(..) => inv.push(SeqRule::PlusL { x, y: y() }),
            Prop::Down(..) => inv.push(SeqRule::DownL { x, y: y() }),
            Prop::With(..) => {
                rest.push(SeqRule::WithL1 { x: x.clone(), y: y() });
                rest.push(SeqRule::WithL2 { x, y: y() });
            }
            Prop::Up(..) => rest.push(SeqRule::UpL { x, y: y() }),
            Prop::RightImp(..) => {
                for split in 0..n - p {
                    rest.push(SeqRule::RightImpL {
                        f: x.clone(),
                        split,
                        y: y(),
                    });
                }
            }
            Prop::LeftImp(..) => {
                for split in 0..=p {
                    rest.push(SeqRule::LeftImpL {
                        f: x.clone(),
                        split,
                        y: y(),
                    });
                }
            }
            Prop::Atom(..) => {}
        }
    }
    for p in 0..n {
        structural.push(Structural::Weak {
            var: ctx[p].var.clone(),
            pos: p,
        });
    }
    for first in 0..n {
        for second in first + 1..=n {
            structural.push(Structural::ContrL { first, second });
        }
    }
    for second in 1..=n {
        for first in 0..second {
            structural.push(Structural::ContrR { first, second });
        }
    }
    for from in 0..n {
        for to in 0..n {
            if to < from {
                structural.push(Structural::MobL { from, to });
            } else if to > from {
                structural.push(Structural::MobR { from, to });
            }
        }
    }
    id.into_iter()
        .chain(inv)
        .chain(structural.into_iter().map(SeqRule::Struct))
        .chain(rest)
        .collect()
}

struct Searcher<'t> {
    theory: &'t ModeTheory,
    budget: SearchBudget,
    /// Sequents on the current branch, root first.
    branch: Vec<Canon>,
    /// Depth and structural run at which a sequent is known to fail, and
    /// whether that failure involved a budget cutoff.
    failed: HashMap<Canon, (usize, usize, bool)>,
    nodes: usize,
}

struct Outcome {
    proof: Option<SeqDeriv>,
    /// Some branch was cut off by the budget rather than exhausted.
    cutoff: bool,
    /// Shallowest branch index a loop check matched.
    loop_floor: usize,
}

impl Searcher<'_> {
    fn dfs(&mut self, s: &Sequent, depth: usize, run: usize) -> Outcome {
        self.nodes += 1;
        let key = canon(s);
        if let Some(&(d, r, cut)) = self.failed.get(&key) {
            if !cut || (d >= depth && r <= run) {
                return Outcome {
                    proof: None,
                    cutoff: cut,
                    loop_floor: usize::MAX,
                };
            }
        }
        if depth == 0 {
            return Outcome {
                proof: None,
                cutoff: true,
                loop_floor: usize::MAX,
            };
        }
        let here = self.branch.len();
        self.branch.push(key.clone());
        let mut cutoff = false;
        let mut floor = usize::MAX;
        let mut found = None;
        'rules: for rule in candidate_rules(s) {
            let is_struct = matches!(rule, SeqRule::Struct(_));
            if is_struct && run >= self.budget.max_structural_run {
                cutoff = true;
                continue;
            }
            let Ok(premises) = apply_rule(self.theory, s, &rule, CheckOptions::default()) else {
                continue;
            };
            for p in &premises {
                let k = canon(p);
                if let Some(i) = self.branch.iter().position(|b| *b == k) {
                    floor = floor.min(i);
                    continue 'rules;
                }
            }
            let mut subs = Vec::with_capacity(premises.len());
            for p in &premises {
                let o = self.dfs(p, depth - 1, if is_struct { run + 1 } else { 0 });
                cutoff |= o.cutoff;
                floor = floor.min(o.loop_floor);
                match o.proof {
                    Some(d) => subs.push(d),
                    None => continue 'rules,
                }
            }
            found = Some(SeqDeriv::new(rule, subs));
            break;
        }
        self.branch.pop();
        if found.is_none() && floor >= here {
            let e = self.failed.entry(key).or_insert((depth, run, cutoff));
            if depth >= e.0 {
                *e = (depth, run, cutoff);
            }
        }
        Outcome {
            proof: found,
            cutoff,
            loop_floor: if floor >= here { usize::MAX } else { floor },
        }
    }
}

fn run(theory: &ModeTheory, s: &Sequent, budget: SearchBudget) -> (Option<SeqDeriv>, bool) {
    let mut st = Searcher {
        theory,
        budget,
        branch: Vec::new(),
        failed: HashMap::new(),
        nodes: 0,
    };
    let mut cutoff = true;
    for depth in 1..=budget.max_depth {
        let o = st.dfs(s, depth, 0);
        if o.proof.is_some() {
            return (o.proof, false);
        }
        cutoff = o.cutoff;
        if !cutoff {
            break;
        }
    }
    (None, cutoff)
}

/// Searches for a cut-free derivation of `s` within `budget`.
pub fn prove(theory: &ModeTheory, s: &Sequent, budget: SearchBudget) -> Option<SeqDeriv> {
    if !s.is_independent(theory) || !s.ctx.is_consistent() {
        return None;
    }
    run(theory, s, budget).0
}

/// Three-valued search: `NotProvable` only when the loop-checked search space
/// was exhausted without any budget cutoff.
pub fn decide_small(theory: &ModeTheory, s: &Sequent, budget: SearchBudget) -> Verdict {
    if !s.is_independent(theory) {
        return Verdict::NotProvable;
    }
    match run(theory, s, budget) {
        (Some(d), _) => Verdict::Provable(d),
        (None, false) => Verdict::NotProvable,
        (None, true) => Verdict::Unknown,
    }
}
