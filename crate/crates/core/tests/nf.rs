mod common;

use std::collections::{BTreeSet, VecDeque};

use ordal::modes::StructuralProperty as Sp;
use ordal::nf::normal_forms_unrestricted_capped;
use ordal::{normal_forms, ContextSet, Ctx, Hyp, ModeId, ModeTheory, Prop, Signature, UnorderedCtx};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

pub struct State {
    pub sig: Signature,
    pub gamma: Vec<Hyp>,
    pub r: ModeId,
    pub omega: Ctx,
}

/// A random Γ of `n` small hypotheses, a goal mode and an `Ω` of length up
/// to `len` drawn from the part of Γ above it. Repeats are allowed.
fn state(seed: u64, n: usize, len: usize) -> State {
    let mut rng = common::rng(seed);
    let sig = common::random_signature(&mut rng);
    let t = &sig.theory;
    let gamma: Vec<Hyp> = (0..n)
        .map(|i| {
            let m = common::random_mode(t, &mut rng);
            Hyp::new(&format!("x{i}"), common::random_prop(&sig, &mut rng, m, 1))
        })
        .collect();
    let r = common::random_mode(t, &mut rng);
    let above: Vec<&Hyp> = gamma.iter().filter(|h| t.geq(h.prop.mode(), r)).collect();
    let k = if above.is_empty() { 0 } else { rng.gen_range(0..=len) };
    let omega = Ctx((0..k).map(|_| (*above.choose(&mut rng).unwrap()).clone()).collect());
    State { sig, gamma, r, omega }
}

fn unordered(gamma: &[Hyp]) -> UnorderedCtx {
    UnorderedCtx::from(&Ctx(gamma.to_vec()))
}

/// Breadth-first closure under the output-context rules, read directly:
/// weaken in any admissible hypothesis, contract two copies keeping either
/// one, move a hypothesis any distance. Contexts never exceed `cap`.
fn naive(t: &ModeTheory, gamma: &[Hyp], r: ModeId, omega: &Ctx, cap: usize) -> ContextSet {
    let has = |h: &Hyp, p| t.has(h.prop.mode(), p);
    let mut seen: BTreeSet<Ctx> = BTreeSet::new();
    let mut queue = VecDeque::from([omega.clone()]);
    seen.insert(omega.clone());
    let mut out = ContextSet::new();
    while let Some(c) = queue.pop_front() {
        if c.is_normal() {
            out.insert(c.clone());
        }
        let mut next = Vec::new();
        if c.len() < cap {
            for h in gamma {
                if has(h, Sp::W) && t.geq(h.prop.mode(), r) {
                    for p in 0..=c.len() {
                        let mut d = c.clone();
                        d.insert(p, h.clone());
                        next.push(d);
                    }
                }
            }
        }
        for i in 0..c.len() {
            for j in i + 1..c.len() {
                if c[i].var == c[j].var {
                    if has(&c[i], Sp::CL) {
                        let mut d = c.clone();
                        d.remove(j);
                        next.push(d);
                    }
                    if has(&c[i], Sp::CR) {
                        let mut d = c.clone();
                        d.remove(i);
                        next.push(d);
                    }
                }
            }
            for j in 0..c.len() {
                let left = j < i && has(&c[i], Sp::ML);
                let right = j > i && has(&c[i], Sp::MR);
                if left || right {
                    let mut d = c.clone();
                    let h = d.remove(i);
                    d.insert(j, h);
                    next.push(d);
                }
            }
        }
        for d in next {
            if seen.insert(d.clone()) {
                queue.push_back(d);
            }
        }
    }
    out
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn members_are_normal_admissible_and_closed(seed: u64) {
        let st = state(seed, 5, 4);
        let t = &st.sig.theory;
        let g = unordered(&st.gamma);
        let nf = normal_forms(t, &g, st.r, &st.omega).unwrap();
        for c in &nf {
            prop_assert!(c.is_normal());
            prop_assert!(g.covers(c));
            prop_assert!(t.context_geq(c, st.r));
            prop_assert!(normal_forms(t, &g, st.r, c).unwrap().is_subset(&nf));
        }
        if st.omega.is_normal() {
            prop_assert!(nf.contains(&st.omega));
        }
    }

    #[test]
    fn agrees_with_the_naive_closure(seed: u64) {
        let st = state(seed, 3, 3);
        let t = &st.sig.theory;
        let g = unordered(&st.gamma);
        let nf = normal_forms(t, &g, st.r, &st.omega).unwrap();
        let cap = st.omega.len() + st.gamma.len() + 2;
        prop_assert_eq!(nf, naive(t, &st.gamma, st.r, &st.omega, cap));
    }

    #[test]
    fn restricted_weakening_loses_nothing(seed: u64) {
        let st = state(seed, 6, 5);
        let t = &st.sig.theory;
        let g = unordered(&st.gamma);
        let nf = normal_forms(t, &g, st.r, &st.omega).unwrap();
        let un = normal_forms_unrestricted_capped(t, &g, st.r, &st.omega, 2 * st.gamma.len(), 200_000);
        prop_assume!(un.is_some());
        prop_assert_eq!(nf, un.unwrap());
    }

    /// Without weakening or contraction the normal forms are the
    /// permutations in which every inverted pair could be uncrossed: the
    /// left one moves right or the right one moves left.
    #[test]
    fn mobility_only_permutations(seed: u64, n in 1usize..=5) {
        let mut rng = common::rng(seed);
        let mut sig = common::random_signature(&mut rng);
        // strip weakening and contraction everywhere
        let t0 = &sig.theory;
        let mut decls = ordal::ModeDecls::default();
        for m in t0.modes() {
            let s = ordal::Sigma::from_props(t0.sigma(m).iter().filter(|p| matches!(p, Sp::ML | Sp::MR)));
            decls = decls.mode(t0.name(m), s);
        }
        for (k, m) in t0.order_pairs() {
            decls = decls.geq(t0.name(k), t0.name(m));
        }
        let atoms = sig.atoms.clone();
        sig = Signature::new(ModeTheory::validate(&decls, false).unwrap());
        sig.atoms = atoms;
        let t = &sig.theory;
        let bottom = t.modes().find(|&r| t.modes().all(|m| t.geq(m, r))).unwrap();
        let omega = Ctx((0..n)
            .map(|i| {
                let m = common::random_mode(t, &mut rng);
                Hyp::new(&format!("x{i}"), Prop::One(m))
            })
            .collect());
        let g = UnorderedCtx::from(&omega);
        let nf = normal_forms(t, &g, bottom, &omega).unwrap();
        let can = |i: usize, p| t.has(omega[i].prop.mode(), p);
        let mut expect = ContextSet::new();
        for perm in permutations(n) {
            let rank = |i: usize| perm.iter().position(|&j| j == i).unwrap();
            let ok = (0..n).all(|i| (i + 1..n).all(|j| rank(j) > rank(i) || can(i, Sp::MR) || can(j, Sp::ML)));
            if ok {
                expect.insert(Ctx(perm.iter().map(|&i| omega[i].clone()).collect()));
            }
        }
        prop_assert_eq!(nf, expect);
    }
}

#[test]
fn weakening_example() {
    let sig = common::lnl();
    let t = &sig.theory;
    let gamma = ordal::parse::parse_ctx(&sig, "(x : X) (p : P)").unwrap();
    let l = t.lookup("L").unwrap();
    let omega = ordal::parse::parse_ctx(&sig, "(p : P)").unwrap();
    let nf = normal_forms(t, &UnorderedCtx::from(&gamma), l, &omega).unwrap();
    let shown: Vec<String> = nf.iter().map(|c| c.display(t).to_string()).collect();
    assert_eq!(shown, ["(p : P)", "(p : P) (x : X)", "(x : X) (p : P)"]);
}
