//! Random theories, propositions and checked derivations for the property suites.
#![allow(dead_code)]

use ordal::modes::{ModeDecls, StructuralProperty as Sp};
use ordal::nd::NdDeriv;
use ordal::seq::SeqRule;
use ordal::{
    check_nd, check_seq, seq_to_nd, CheckOptions, Ctx, Hyp, ModeId, ModeTheory, Prop, SeqDeriv, Sequent, Sigma,
    Signature, Structural, UnorderedCtx, VarRef,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type R = ChaCha8Rng;

pub fn rng(seed: u64) -> R {
    ChaCha8Rng::seed_from_u64(seed)
}

const ALL: [Sp; 5] = [Sp::W, Sp::CL, Sp::CR, Sp::ML, Sp::MR];

fn random_sigma(rng: &mut R, below: Sigma, p: f64) -> Sigma {
    let mut s = below;
    for q in ALL {
        if rng.gen_bool(p) {
            s.insert(q);
        }
    }
    s
}

/// A theory with 2 or 3 modes named `a`, `b`, `c`, from the top down, and
/// atoms `P<mode>` and `Q<mode>` at each.
pub fn random_signature(rng: &mut R) -> Signature {
    let n = rng.gen_range(2..=3);
    let low = random_sigma(rng, Sigma::EMPTY, 0.3);
    let mut decls = ModeDecls::default();
    let names = ["a", "b", "c"];
    if n == 2 {
        let hi = random_sigma(rng, low, 0.4);
        decls = decls.mode("a", hi).mode("b", low).geq("a", "b");
    } else if rng.gen_bool(0.5) {
        let mid = random_sigma(rng, low, 0.3);
        let hi = random_sigma(rng, mid, 0.3);
        decls = decls.mode("a", hi).mode("b", mid).mode("c", low).geq("a", "b").geq("b", "c");
    } else {
        // two incomparable modes above a common bottom
        let x = random_sigma(rng, low, 0.4);
        let y = random_sigma(rng, low, 0.4);
        decls = decls.mode("a", x).mode("b", y).mode("c", low).geq("a", "c").geq("b", "c");
    }
    let t = ModeTheory::validate(&decls, true).expect("generated theory is valid");
    let mut sig = Signature::new(t);
    for m in &names[..n] {
        sig = sig.with_atom(&format!("P{m}"), m).with_atom(&format!("Q{m}"), m);
    }
    sig
}

/// LNL with atoms `P`, `Q` at L and `X` at U.
pub fn lnl() -> Signature {
    Signature::new(ModeTheory::lnl())
        .with_atom("P", "L")
        .with_atom("Q", "L")
        .with_atom("X", "U")
}

pub fn atoms_at(sig: &Signature, m: ModeId) -> Vec<Prop> {
    sig.atoms
        .iter()
        .filter(|(_, &k)| k == m)
        .map(|(n, &k)| Prop::atom(n, k))
        .collect()
}

fn lower(t: &ModeTheory, m: ModeId) -> Vec<ModeId> {
    t.modes().filter(|&k| k != m && t.geq(m, k)).collect()
}

fn higher(t: &ModeTheory, m: ModeId) -> Vec<ModeId> {
    t.modes().filter(|&k| k != m && t.geq(k, m)).collect()
}

/// A well-formed proposition at mode `m` with roughly `size` connectives.
pub fn random_prop(sig: &Signature, rng: &mut R, m: ModeId, size: usize) -> Prop {
    let t = &sig.theory;
    let leaf = |rng: &mut R| {
        let atoms = atoms_at(sig, m);
        if atoms.is_empty() || rng.gen_bool(0.15) {
            Prop::One(m)
        } else {
            atoms.choose(rng).unwrap().clone()
        }
    };
    if size <= 1 {
        return leaf(rng);
    }
    let k = rng.gen_range(0..8);
    let l = rng.gen_range(1..size);
    let bin = |rng: &mut R, f: fn(Prop, Prop) -> Prop| {
        f(random_prop(sig, rng, m, l), random_prop(sig, rng, m, size - l))
    };
    match k {
        0 => bin(rng, Prop::fuse),
        1 => bin(rng, Prop::with),
        2 => bin(rng, Prop::plus),
        3 => bin(rng, Prop::right_imp),
        4 => bin(rng, Prop::left_imp),
        5 => match lower(t, m).choose(rng) {
            Some(&k) => Prop::up(m, random_prop(sig, rng, k, size - 1)),
            None => bin(rng, Prop::fuse),
        },
        6 => match higher(t, m).choose(rng) {
            Some(&k) => Prop::down(m, random_prop(sig, rng, k, size - 1)),
            None => bin(rng, Prop::with),
        },
        _ => leaf(rng),
    }
}

pub fn random_mode(t: &ModeTheory, rng: &mut R) -> ModeId {
    *t.modes().collect::<Vec<_>>().choose(rng).unwrap()
}

/// Grows random derivations bottom-up from identities, one rule at a time,
/// keeping only steps that `check_seq` accepts.
pub struct DerivGen<'s> {
    pub sig: &'s Signature,
    pub rng: R,
    next: usize,
    /// Whether cuts may be introduced.
    pub cuts: bool,
    /// Whether structural rules may be introduced.
    pub structural: bool,
    /// Largest proposition size for fresh formulas.
    pub prop_size: usize,
}

type Pair = (SeqDeriv, Sequent);

impl<'s> DerivGen<'s> {
    pub fn new(sig: &'s Signature, seed: u64) -> Self {
        DerivGen {
            sig,
            rng: rng(seed),
            next: 0,
            cuts: false,
            structural: true,
            prop_size: 3,
        }
    }

    fn t(&self) -> &'s ModeTheory {
        &self.sig.theory
    }

    fn fresh(&mut self) -> String {
        self.next += 1;
        format!("v{}", self.next)
    }

    fn prop(&mut self, m: ModeId) -> Prop {
        let size = self.rng.gen_range(1..=self.prop_size);
        random_prop(self.sig, &mut self.rng, m, size)
    }

    fn ok(&self, p: Pair) -> Option<Pair> {
        check_seq(self.t(), &p.0, &p.1, CheckOptions::default()).ok().map(|_| p)
    }

    /// `(x : A) |- A` for a random `A` at `m`.
    pub fn leaf(&mut self, m: ModeId) -> Pair {
        if self.rng.gen_bool(0.1) {
            return (SeqDeriv::leaf(SeqRule::OneR), Sequent::new(Ctx::default(), Prop::One(m)));
        }
        let x = self.fresh();
        let a = self.prop(m);
        (SeqDeriv::id(&x), Sequent::new(Ctx(vec![Hyp::new(&x, a.clone())]), a))
    }

    /// A checked derivation with about `steps` rule applications over the
    /// leaf, whose goal stays at mode `m` when `keep` is set.
    pub fn gen_at(&mut self, m: ModeId, steps: usize, keep: bool) -> Pair {
        let start = self.leaf(m);
        self.grow(start, steps, if keep { Some(m) } else { None }, None)
    }

    pub fn gen(&mut self, steps: usize) -> Pair {
        let m = random_mode(self.t(), &mut self.rng);
        self.gen_at(m, steps, false)
    }

    /// Applies up to `steps` random extensions to `p`. `keep` pins the goal
    /// mode; `protect` names a hypothesis that must survive untouched.
    pub fn grow(&mut self, mut p: Pair, steps: usize, keep: Option<ModeId>, protect: Option<&str>) -> Pair {
        let mut budget = steps;
        let mut tries = 0;
        while budget > 0 && tries < steps * 8 {
            tries += 1;
            let sub = (budget / 2).min(4);
            if let Some(q) = self.step(&p, sub, protect) {
                if keep.is_some_and(|m| q.1.goal.mode() != m) {
                    continue;
                }
                if protect.is_some_and(|x| q.1.ctx.count_var(x) != 1) {
                    continue;
                }
                budget = budget.saturating_sub(1 + q.0.size().saturating_sub(p.0.size() + 1) / 2);
                p = q;
            }
        }
        p
    }

    fn pick_hyp(&mut self, s: &Sequent, protect: Option<&str>) -> Option<usize> {
        let c: Vec<usize> = (0..s.ctx.len())
            .filter(|&i| protect != Some(s.ctx[i].var.as_str()))
            .collect();
        c.choose(&mut self.rng).copied()
    }

    fn step(&mut self, p: &Pair, sub: usize, protect: Option<&str>) -> Option<Pair> {
        let (d, s) = p;
        let t = self.t();
        let r = s.goal.mode();
        let ctx = &s.ctx;
        let unary = |rule: SeqRule, ctx: Ctx, goal: Prop| (SeqDeriv::unary(rule, d.clone()), Sequent::new(ctx, goal));
        let k = self.rng.gen_range(0..19);
        let out = match k {
            0 => {
                let (d2, s2) = self.gen_at(r, sub, true);
                let (l, rr) = if self.rng.gen_bool(0.5) {
                    ((d.clone(), s.clone()), (d2, s2))
                } else {
                    ((d2, s2), (d.clone(), s.clone()))
                };
                let split = l.1.ctx.len();
                let goal = Prop::fuse(l.1.goal.clone(), rr.1.goal.clone());
                (
                    SeqDeriv::new(SeqRule::FuseR { split }, vec![l.0, rr.0]),
                    Sequent::new(l.1.ctx.concat(&rr.1.ctx), goal),
                )
            }
            1 => {
                let b = self.prop(r);
                if self.rng.gen_bool(0.5) {
                    unary(SeqRule::PlusR1, ctx.clone(), Prop::plus(s.goal.clone(), b))
                } else {
                    unary(SeqRule::PlusR2, ctx.clone(), Prop::plus(b, s.goal.clone()))
                }
            }
            2 => (
                SeqDeriv::new(SeqRule::WithR, vec![d.clone(), d.clone()]),
                Sequent::new(ctx.clone(), Prop::with(s.goal.clone(), s.goal.clone())),
            ),
            3 | 4 => {
                let right = k == 3;
                let h = if right { ctx.last()? } else { ctx.first()? };
                if ctx.count_var(&h.var) != 1 || protect == Some(h.var.as_str()) {
                    return None;
                }
                let rest = if right { ctx.slice(0, ctx.len() - 1) } else { ctx.slice(1, ctx.len()) };
                let (rule, goal) = if right {
                    (SeqRule::RightImpR { x: h.var.clone() }, Prop::right_imp(h.prop.clone(), s.goal.clone()))
                } else {
                    (SeqRule::LeftImpR { x: h.var.clone() }, Prop::left_imp(h.prop.clone(), s.goal.clone()))
                };
                unary(rule, rest, goal)
            }
            5 => {
                let m = *higher(t, r).choose(&mut self.rng)?;
                unary(SeqRule::UpR, ctx.clone(), Prop::up(m, s.goal.clone()))
            }
            6 => {
                let m = *lower(t, r).choose(&mut self.rng)?;
                unary(SeqRule::DownR, ctx.clone(), Prop::down(m, s.goal.clone()))
            }
            7 => {
                // left rules replacing one hypothesis by a compound one
                let i = self.pick_hyp(s, protect)?;
                let h = &ctx[i];
                let m = h.prop.mode();
                let x = self.fresh();
                let xr = VarRef::new(&x);
                let y = h.var.clone();
                let (rule, prop) = match self.rng.gen_range(0..4) {
                    0 => {
                        let c = self.prop(m);
                        (SeqRule::WithL1 { x: xr, y }, Prop::with(h.prop.clone(), c))
                    }
                    1 => {
                        let c = self.prop(m);
                        (SeqRule::WithL2 { x: xr, y }, Prop::with(c, h.prop.clone()))
                    }
                    2 => {
                        let n = *lower(t, m).choose(&mut self.rng)?;
                        (SeqRule::DownL { x: xr, y }, Prop::down(n, h.prop.clone()))
                    }
                    _ => {
                        let n = *higher(t, m).choose(&mut self.rng)?;
                        (SeqRule::UpL { x: xr, y }, Prop::up(n, h.prop.clone()))
                    }
                };
                if ctx.count_var(&h.var) != 1 {
                    return None;
                }
                let mut c = ctx.clone();
                c.0[i] = Hyp::new(&x, prop);
                unary(rule, c, s.goal.clone())
            }
            8 => {
                let i = self.pick_hyp(s, protect)?;
                let h = &ctx[i];
                if ctx.count_var(&h.var) != 1 {
                    return None;
                }
                let x = self.fresh();
                let mut c = ctx.clone();
                c.0[i] = Hyp::new(&x, Prop::plus(h.prop.clone(), h.prop.clone()));
                (
                    SeqDeriv::new(
                        SeqRule::PlusL {
                            x: VarRef::new(&x),
                            y: h.var.clone(),
                        },
                        vec![d.clone(), d.clone()],
                    ),
                    Sequent::new(c, s.goal.clone()),
                )
            }
            9 => {
                if ctx.len() < 2 {
                    return None;
                }
                let i = self.rng.gen_range(0..ctx.len() - 1);
                let (a, b) = (&ctx[i], &ctx[i + 1]);
                if a.prop.mode() != b.prop.mode()
                    || protect.is_some_and(|p| p == a.var || p == b.var)
                    || ctx.count_var(&a.var) != 1
                    || ctx.count_var(&b.var) != 1
                {
                    return None;
                }
                let x = self.fresh();
                let c = ctx.splice(i, i + 2, &Ctx(vec![Hyp::new(&x, Prop::fuse(a.prop.clone(), b.prop.clone()))]));
                unary(
                    SeqRule::FuseL {
                        x: VarRef::new(&x),
                        left: a.var.clone(),
                        right: b.var.clone(),
                    },
                    c,
                    s.goal.clone(),
                )
            }
            10 => {
                let m = *t.modes().filter(|&m| t.geq(m, r)).collect::<Vec<_>>().choose(&mut self.rng)?;
                let x = self.fresh();
                let pos = self.rng.gen_range(0..=ctx.len());
                let mut c = ctx.clone();
                c.0.insert(pos, Hyp::new(&x, Prop::One(m)));
                unary(SeqRule::OneL { x: VarRef::new(&x) }, c, s.goal.clone())
            }
            11 | 12 => {
                // implication on the left; the argument comes from a fresh derivation
                let i = self.pick_hyp(s, protect)?;
                let h = ctx[i].clone();
                if ctx.count_var(&h.var) != 1 {
                    return None;
                }
                let m = h.prop.mode();
                let (da, sa) = self.gen_at(m, sub, true);
                let f = self.fresh();
                let right = k == 11;
                let fprop = if right {
                    Prop::right_imp(sa.goal.clone(), h.prop.clone())
                } else {
                    Prop::left_imp(sa.goal.clone(), h.prop.clone())
                };
                let fh = Ctx(vec![Hyp::new(&f, fprop)]);
                let mid = if right { fh.concat(&sa.ctx) } else { sa.ctx.concat(&fh) };
                let c = ctx.splice(i, i + 1, &mid);
                let split = sa.ctx.len();
                let rule = if right {
                    SeqRule::RightImpL {
                        f: VarRef::new(&f),
                        split,
                        y: h.var.clone(),
                    }
                } else {
                    SeqRule::LeftImpL {
                        f: VarRef::new(&f),
                        split,
                        y: h.var.clone(),
                    }
                };
                (SeqDeriv::new(rule, vec![da, d.clone()]), Sequent::new(c, s.goal.clone()))
            }
            13 if self.structural => {
                let ms: Vec<ModeId> = t.modes().filter(|&m| t.geq(m, r) && t.has(m, Sp::W)).collect();
                let m = *ms.choose(&mut self.rng)?;
                let x = self.fresh();
                let a = self.prop(m);
                let pos = self.rng.gen_range(0..=ctx.len());
                let mut c = ctx.clone();
                c.0.insert(pos, Hyp::new(&x, a));
                unary(SeqRule::Struct(Structural::Weak { var: x, pos }), c, s.goal.clone())
            }
            14 | 15 if self.structural && ctx.len() >= 2 => {
                let from = self.rng.gen_range(0..ctx.len());
                let to = self.rng.gen_range(0..ctx.len());
                let st = if to < from {
                    Structural::MobL { from, to }
                } else if to > from {
                    Structural::MobR { from, to }
                } else {
                    return None;
                };
                let c = st.conclusion_of(t, ctx, r, |_| None).ok()?;
                unary(SeqRule::Struct(st), c, s.goal.clone())
            }
            16 if self.structural => {
                // duplicate the whole derivation, then merge copies where allowed
                let mut q = (
                    SeqDeriv::new(SeqRule::FuseR { split: ctx.len() }, vec![d.clone(), d.clone()]),
                    Sequent::new(ctx.concat(ctx), Prop::fuse(s.goal.clone(), s.goal.clone())),
                );
                let n = ctx.len();
                for i in (0..n).rev() {
                    let h = &ctx[i];
                    let cl = t.has(h.prop.mode(), Sp::CL);
                    let cr = t.has(h.prop.mode(), Sp::CR);
                    let (first, second) = (i, n + i);
                    let st = match (cl, cr) {
                        (true, true) if self.rng.gen_bool(0.5) => Structural::ContrR { first, second },
                        (true, _) => Structural::ContrL { first, second },
                        (_, true) => Structural::ContrR { first, second },
                        _ => continue,
                    };
                    let Ok(c) = st.conclusion_of(t, &q.1.ctx, r, |_| None) else { continue };
                    q = (SeqDeriv::unary(SeqRule::Struct(st), q.0), Sequent::new(c, q.1.goal.clone()));
                }
                if !q.1.ctx.is_normal() {
                    return None;
                }
                q
            }
            17 | 18 if self.cuts => {
                // cut a fresh derivation of some hypothesis' formula into it
                let i = self.pick_hyp(s, protect)?;
                let h = ctx[i].clone();
                if ctx.count_var(&h.var) != 1 {
                    return None;
                }
                let m = h.prop.mode();
                let (d1, s1) = self.cut_provider(&h.prop, sub)?;
                debug_assert_eq!(s1.goal.mode(), m);
                let var = h.var.clone();
                let c = ctx.splice(i, i + 1, &s1.ctx);
                let rule = SeqRule::Cut {
                    lo: i,
                    hi: i + s1.ctx.len(),
                    var,
                    prop: h.prop.clone(),
                };
                (SeqDeriv::new(rule, vec![d1, d.clone()]), Sequent::new(c, s.goal.clone()))
            }
            _ => return None,
        };
        self.ok(out)
    }

    /// A derivation of some `Ω |- A`: either a grown identity on `A` or a
    /// cut of such into something else.
    pub fn cut_provider(&mut self, a: &Prop, steps: usize) -> Option<Pair> {
        let x = self.fresh();
        let m = a.mode();
        let base = (SeqDeriv::id(&x), Sequent::new(Ctx(vec![Hyp::new(&x, a.clone())]), a.clone()));
        // left rules on the seed keep the goal fixed at `A`
        let mut p = base;
        for _ in 0..steps {
            let before = p.0.size();
            if let Some(q) = self.step(&p, 1, None) {
                if q.1.goal == *a && q.0.size() > before {
                    p = q;
                }
            }
        }
        debug_assert_eq!(p.1.goal.mode(), m);
        Some(p)
    }

    /// A checked derivation containing at least one cut, built by cutting a
    /// provider into a grown derivation at a protected hypothesis.
    pub fn gen_with_cut(&mut self, steps: usize) -> Pair {
        loop {
            let (d, s) = self.gen(steps);
            let saved = self.cuts;
            self.cuts = true;
            let mut p = (d, s);
            for _ in 0..steps * 4 {
                if p.0.cut_count() > 0 && self.rng.gen_bool(0.3) {
                    break;
                }
                if let Some(q) = self.step(&p, 2, None) {
                    p = q;
                }
            }
            self.cuts = saved;
            if p.0.cut_count() > 0 {
                return p;
            }
        }
    }
}

/// A checked explicit ND derivation, obtained by translating a random
/// sequent derivation; returns it with Γ, the goal and its output context.
pub fn random_nd(g: &mut DerivGen<'_>, steps: usize) -> (NdDeriv, UnorderedCtx, Prop, Ctx) {
    let (d, s) = g.gen(steps);
    let t = &g.sig.theory;
    let nd = seq_to_nd(t, &d, &s).expect("translation of a checked derivation");
    let gamma = UnorderedCtx::from(&s.ctx);
    let out = check_nd(t, &nd, &gamma, &s.goal).expect("translated derivation checks");
    (nd, gamma, s.goal, out)
}

/// Every hypothesis named anywhere in a checked derivation.
pub fn all_hyps(t: &ModeTheory, d: &SeqDeriv, s: &Sequent, out: &mut std::collections::BTreeMap<String, Prop>) {
    for h in s.ctx.iter() {
        out.insert(h.var.clone(), h.prop.clone());
    }
    if let Ok(ps) = ordal::seq::apply_rule(t, s, &d.rule, CheckOptions::default()) {
        for (c, p) in d.premises.iter().zip(&ps) {
            all_hyps(t, c, p, out);
        }
    }
}

/// Whether the implicit checker stays cheap on this derivation: context sets
/// are at least as large as the normal forms of the endsequent, and grow with
/// the number of weakenable names in scope.
pub fn implicit_tractable(t: &ModeTheory, d: &SeqDeriv, s: &Sequent) -> bool {
    let mut hs = std::collections::BTreeMap::new();
    all_hyps(t, d, s, &mut hs);
    let weak = hs.values().filter(|p| t.has(p.mode(), Sp::W)).count();
    if weak > WEAK_NAMES || s.ctx.len() > 6 {
        return false;
    }
    let gamma = UnorderedCtx::from(&s.ctx);
    ordal::nf::normal_forms(t, &gamma, s.goal.mode(), &s.ctx).is_ok_and(|nf| nf.len() <= 200)
}

pub const WEAK_NAMES: usize = 5;

/// Every subderivation of a checked derivation with its endsequent, root first.
pub fn subderivations(t: &ModeTheory, d: &SeqDeriv, s: &Sequent) -> Vec<(SeqDeriv, Sequent)> {
    let mut out = vec![(d.clone(), s.clone())];
    if let Ok(ps) = ordal::seq::apply_rule(t, s, &d.rule, CheckOptions::default()) {
        for (c, p) in d.premises.iter().zip(&ps) {
            out.extend(subderivations(t, c, p));
        }
    }
    out
}
