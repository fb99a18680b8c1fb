//! Context reduction under implicit structural rules and the finite sets of
//! normal forms it produces.
//!
//! A reduction step `Ω ⇒ Ω'` is one weakening, contraction or mobility move.
//! Each step is reported as the structural rule with premise output `Ω` and
//! conclusion output `Ω'`, so a trace replays directly as explicit natural
//! deduction.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::modes::{ModeId, ModeTheory, StructuralProperty};
use crate::prop::{Ctx, Hyp, UnorderedCtx};
use crate::structural::Structural;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NfError {
    #[error("presupposition violated: {0}")]
    Presupposition(String),
}

/// A finite set of ordered contexts in canonical order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ContextSet(BTreeSet<Ctx>);

impl ContextSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn singleton(c: Ctx) -> Self {
        ContextSet(BTreeSet::from([c]))
    }

    pub fn insert(&mut self, c: Ctx) -> bool {
        self.0.insert(c)
    }

    pub fn contains(&self, c: &Ctx) -> bool {
        self.0.contains(c)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Ctx> {
        self.0.iter()
    }

    pub fn union(&self, other: &ContextSet) -> ContextSet {
        ContextSet(self.0.union(&other.0).cloned().collect())
    }

    pub fn intersection(&self, other: &ContextSet) -> ContextSet {
        ContextSet(self.0.intersection(&other.0).cloned().collect())
    }

    pub fn is_subset(&self, other: &ContextSet) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn is_disjoint(&self, other: &ContextSet) -> bool {
        self.0.is_disjoint(&other.0)
    }

    pub fn display<'a>(&'a self, theory: &'a ModeTheory) -> ContextSetDisplay<'a> {
        ContextSetDisplay { set: self, theory }
    }
}

impl Extend<Ctx> for ContextSet {
    fn extend<I: IntoIterator<Item = Ctx>>(&mut self, iter: I) {
        self.0.extend(iter);
    }
}

impl FromIterator<Ctx> for ContextSet {
    fn from_iter<I: IntoIterator<Item = Ctx>>(iter: I) -> Self {
        ContextSet(iter.into_iter().collect())
    }
}

impl IntoIterator for ContextSet {
    type Item = Ctx;
    type IntoIter = std::collections::btree_set::IntoIter<Ctx>;
    fn into_iter(self) -> Self::IntoIter {
        self.0.into_iter()
    }
}

impl<'a> IntoIterator for &'a ContextSet {
    type Item = &'a Ctx;
    type IntoIter = std::collections::btree_set::Iter<'a, Ctx>;
    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

/// One context per line.
pub struct ContextSetDisplay<'a> {
    set: &'a ContextSet,
    theory: &'a ModeTheory,
}

impl fmt::Display for ContextSetDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in self.set.iter() {
            writeln!(f, "{}", c.display(self.theory))?;
        }
        Ok(())
    }
}

/// No variable repeats.
pub fn is_normal(ctx: &Ctx) -> bool {
    ctx.is_normal()
}

type State = Vec<u16>;

/// Hypotheses of `Γ` interned with the structural moves each one allows.
struct Space {
    hyps: Vec<Hyp>,
    index: HashMap<String, u16>,
    weak: Vec<bool>,
    cl: Vec<bool>,
    cr: Vec<bool>,
    ml: Vec<bool>,
    mr: Vec<bool>,
}

impl Space {
    fn new(theory: &ModeTheory, gamma: &UnorderedCtx, r: ModeId) -> Self {
        use StructuralProperty::*;
        let hyps: Vec<Hyp> = gamma.iter().map(|(x, p)| Hyp::new(x, p.clone())).collect();
        let has = |p| -> Vec<bool> { hyps.iter().map(|h| theory.has(h.prop.mode(), p)).collect() };
        let weak = hyps
            .iter()
            .map(|h| theory.has(h.prop.mode(), W) && theory.geq(h.prop.mode(), r))
            .collect();
        Space {
            index: hyps
                .iter()
                .enumerate()
                .map(|(i, h)| (h.var.clone(), i as u16))
                .collect(),
            weak,
            cl: has(CL),
            cr: has(CR),
            ml: has(ML),
            mr: has(MR),
            hyps,
        }
    }

    fn intern(&self, ctx: &Ctx) -> State {
        ctx.iter().map(|h| self.index[&h.var]).collect()
    }

    fn extern_(&self, s: &[u16]) -> Ctx {
        Ctx(s.iter().map(|&i| self.hyps[i as usize].clone()).collect())
    }

    fn is_normal(s: &[u16]) -> bool {
        let mut seen = BTreeSet::new();
        s.iter().all(|i| seen.insert(*i))
    }

    /// A repeated hypothesis that no contraction can remove never reaches a
    /// normal form.
    fn dead(&self, s: &[u16]) -> bool {
        let mut seen = BTreeSet::new();
        s.iter()
            .any(|&i| !seen.insert(i) && !self.cl[i as usize] && !self.cr[i as usize])
    }

    /// Every single step from `s`. Weakening steps are flagged.
    fn steps(&self, s: &[u16], restricted: bool, out: &mut Vec<(Structural, State, bool)>) {
        let n = s.len();
        for (x, _) in self.hyps.iter().enumerate() {
            let x = x as u16;
            if !self.weak[x as usize] || (restricted && s.contains(&x)) {
                continue;
            }
            for p in 0..=n {
                let mut t = s.to_vec();
                t.insert(p, x);
                let rule = Structural::Weak {
                    var: self.hyps[x as usize].var.clone(),
                    pos: p,
                };
                out.push((rule, t, true));
            }
        }
        for i in 0..n {
            for j in i + 1..n {
                if s[i] != s[j] {
                    continue;
                }
                let h = s[i] as usize;
                if self.cl[h] {
                    let mut t = s.to_vec();
                    t.remove(j);
                    out.push((Structural::ContrL { first: i, second: j }, t, false));
                }
                if self.cr[h] {
                    let mut t = s.to_vec();
                    t.remove(i);
                    out.push((Structural::ContrR { first: i, second: j }, t, false));
                }
            }
        }
        for from in 0..n {
            let h = s[from] as usize;
            let mut moved = |to: usize, left: bool| {
                let mut t = s.to_vec();
                let v = t.remove(from);
                t.insert(to, v);
                let rule = if left {
                    Structural::MobL { from, to }
                } else {
                    Structural::MobR { from, to }
                };
                out.push((rule, t, false));
            };
            if self.ml[h] {
                for to in 0..from {
                    moved(to, true);
                }
            }
            if self.mr[h] {
                for to in from + 1..n {
                    moved(to, false);
                }
            }
        }
    }
}

fn presuppose(theory: &ModeTheory, gamma: &UnorderedCtx, r: ModeId, omega: &Ctx) -> Result<(), NfError> {
    if !gamma.covers(omega) {
        return Err(NfError::Presupposition(format!(
            "{} is not drawn from the unordered context",
            omega.display(theory)
        )));
    }
    if !theory.context_geq(omega, r) {
        return Err(NfError::Presupposition(format!(
            "{} is not >= {}",
            omega.display(theory),
            theory.name(r)
        )));
    }
    Ok(())
}

/// Every single reduction step from `omega`, as the structural rule and the
/// resulting context.
pub fn reduce_steps(theory: &ModeTheory, gamma: &UnorderedCtx, r: ModeId, omega: &Ctx) -> Vec<(Structural, Ctx)> {
    let space = Space::new(theory, gamma, r);
    let mut out = Vec::new();
    space.steps(&space.intern(omega), true, &mut out);
    out.into_iter().map(|(rule, t, _)| (rule, space.extern_(&t))).collect()
}

/// Normal forms together with one reduction path to each, in step order.
pub fn normal_forms_traced(
    theory: &ModeTheory,
    gamma: &UnorderedCtx,
    r: ModeId,
    omega: &Ctx,
) -> Result<BTreeMap<Ctx, Vec<Structural>>, NfError> {
    presuppose(theory, gamma, r, omega)?;
    let space = Space::new(theory, gamma, r);
    let start = space.intern(omega);
    let mut states: Vec<State> = vec![start.clone()];
    let mut parent: Vec<Option<(usize, Structural)>> = vec![None];
    let mut seen: HashMap<State, usize> = HashMap::from([(start, 0)]);
    let mut queue = VecDeque::from([0usize]);
    let mut buf = Vec::new();
    let mut normal = Vec::new();
    while let Some(i) = queue.pop_front() {
        let s = states[i].clone();
        if space.dead(&s) {
            continue;
        }
        if Space::is_normal(&s) {
            normal.push(i);
        }
        buf.clear();
        space.steps(&s, true, &mut buf);
        for (rule, t, _) in buf.drain(..) {
            if seen.contains_key(&t) {
                continue;
            }
            let j = states.len();
            seen.insert(t.clone(), j);
            states.push(t);
            parent.push(Some((i, rule)));
            queue.push_back(j);
        }
    }
    let mut out = BTreeMap::new();
    for i in normal {
        let mut path = Vec::new();
        let mut k = i;
        while let Some((p, rule)) = &parent[k] {
            path.push(rule.clone());
            k = *p;
        }
        path.reverse();
        out.insert(space.extern_(&states[i]), path);
    }
    Ok(out)
}

/// `NF_{Γ,r}(Ω)`: every normal context reachable from `omega`.
pub fn normal_forms(theory: &ModeTheory, gamma: &UnorderedCtx, r: ModeId, omega: &Ctx) -> Result<ContextSet, NfError> {
    presuppose(theory, gamma, r, omega)?;
    let space = Space::new(theory, gamma, r);
    let start = space.intern(omega);
    let mut seen: std::collections::HashSet<State> = [start.clone()].into();
    let mut queue = VecDeque::from([start]);
    let mut buf = Vec::new();
    let mut out = ContextSet::new();
    while let Some(s) = queue.pop_front() {
        if space.dead(&s) {
            continue;
        }
        if Space::is_normal(&s) {
            out.insert(space.extern_(&s));
        }
        buf.clear();
        space.steps(&s, true, &mut buf);
        for (_, t, _) in buf.drain(..) {
            if seen.insert(t.clone()) {
                queue.push_back(t);
            }
        }
    }
    Ok(out)
}

/// Normal forms when weakening may also add hypotheses already present,
/// allowing at most `bound` weakening steps. A test oracle.
///
/// A hypothesis with mobility in both directions can reach every position
/// without cost, so states are taken up to the placement of such
/// hypotheses: only their multiplicities are kept, and the others form an
/// ordered word.
pub fn normal_forms_unrestricted(
    theory: &ModeTheory,
    gamma: &UnorderedCtx,
    r: ModeId,
    omega: &Ctx,
    bound: usize,
) -> ContextSet {
    normal_forms_unrestricted_capped(theory, gamma, r, omega, bound, usize::MAX).expect("uncapped")
}

/// As [`normal_forms_unrestricted`], giving up with `None` once more than
/// `max_states` states have been recorded.
pub fn normal_forms_unrestricted_capped(
    theory: &ModeTheory,
    gamma: &UnorderedCtx,
    r: ModeId,
    omega: &Ctx,
    bound: usize,
    max_states: usize,
) -> Option<ContextSet> {
    let space = Space::new(theory, gamma, r);
    let free: Vec<bool> = (0..space.hyps.len()).map(|i| space.ml[i] && space.mr[i]).collect();
    let contracts = |i: usize| space.cl[i] || space.cr[i];
    let mut counts = vec![0u16; space.hyps.len()];
    let mut word = Vec::new();
    for i in space.intern(omega) {
        if free[i as usize] {
            counts[i as usize] += 1;
        } else {
            word.push(i);
        }
    }
    type Class = (State, Vec<u16>);
    let start: Class = (word, counts);
    let mut best: HashMap<Class, usize> = HashMap::from([(start.clone(), 0)]);
    let mut queue = VecDeque::from([(start, 0usize)]);
    let mut out = ContextSet::new();
    while let Some(((w, c), k)) = queue.pop_front() {
        if best[&(w.clone(), c.clone())] < k
            || space.dead(&w)
            || c.iter().enumerate().any(|(i, &n)| n > 1 && !contracts(i))
        {
            continue;
        }
        if Space::is_normal(&w) && c.iter().all(|&n| n <= 1) {
            let f: Vec<u16> = (0..c.len()).filter(|&i| c[i] == 1).map(|i| i as u16).collect();
            for s in shuffles(&w, &f) {
                out.insert(space.extern_(&s));
            }
        }
        let mut next: Vec<(Class, bool)> = Vec::new();
        for x in 0..space.hyps.len() {
            if !space.weak[x] {
                continue;
            }
            if free[x] {
                let mut c2 = c.clone();
                c2[x] += 1;
                next.push(((w.clone(), c2), true));
            } else {
                for p in 0..=w.len() {
                    let mut w2 = w.clone();
                    w2.insert(p, x as u16);
                    next.push(((w2, c.clone()), true));
                }
            }
        }
        for x in 0..c.len() {
            if c[x] > 1 && contracts(x) {
                let mut c2 = c.clone();
                c2[x] -= 1;
                next.push(((w.clone(), c2), false));
            }
        }
        let mut buf = Vec::new();
        space.steps(&w, true, &mut buf);
        for (rule, w2, weak) in buf {
            if !weak {
                debug_assert!(!matches!(rule, Structural::Weak { .. }));
                next.push(((w2, c.clone()), false));
            }
        }
        for (cls, weak) in next {
            let k2 = k + usize::from(weak);
            if k2 > bound || best.get(&cls).is_some_and(|&b| b <= k2) {
                continue;
            }
            best.insert(cls.clone(), k2);
            if best.len() > max_states {
                return None;
            }
            if weak {
                queue.push_back((cls, k2));
            } else {
                queue.push_front((cls, k2));
            }
        }
    }
    Some(out)
}

/// Every interleaving of `w` with some ordering of `f`.
fn shuffles(w: &[u16], f: &[u16]) -> Vec<State> {
    let mut out = vec![w.to_vec()];
    for &x in f {
        let mut grown = Vec::new();
        for s in &out {
            for p in 0..=s.len() {
                let mut t = s.clone();
                t.insert(p, x);
                grown.push(t);
            }
        }
        out = grown;
    }
    out
}

/// `NF_{Γ,r}(Ξ)`, the union of the normal forms of the members.
pub fn nf_lift(theory: &ModeTheory, gamma: &UnorderedCtx, r: ModeId, xi: &ContextSet) -> Result<ContextSet, NfError> {
    let mut out = ContextSet::new();
    for c in xi {
        out = out.union(&normal_forms(theory, gamma, r, c)?);
    }
    Ok(out)
}
