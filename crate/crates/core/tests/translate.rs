mod common;

use ordal::{check_nd, check_seq, nd_to_seq, seq_to_nd, substitute, CheckOptions, Ctx, UnorderedCtx};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(160))]

    #[test]
    fn sequent_to_nd_and_back(seed: u64, cut in any::<bool>()) {
        let mut rng = common::rng(seed);
        let sig = common::random_signature(&mut rng);
        let t = &sig.theory;
        let mut g = common::DerivGen::new(&sig, seed);
        let (d, s) = if cut { g.gen_with_cut(3) } else { g.gen(6) };

        let nd = seq_to_nd(t, &d, &s).unwrap();
        let gamma = UnorderedCtx::from(&s.ctx);
        prop_assert_eq!(check_nd(t, &nd, &gamma, &s.goal).unwrap(), s.ctx.clone());

        let (back, s2) = nd_to_seq(t, &nd, &gamma, &s.goal).unwrap();
        prop_assert_eq!(&s2, &s);
        prop_assert!(check_seq(t, &back, &s2, CheckOptions::default()).is_ok());

        // and once more through natural deduction
        let nd2 = seq_to_nd(t, &back, &s2).unwrap();
        prop_assert_eq!(check_nd(t, &nd2, &gamma, &s.goal).unwrap(), s.ctx.clone());
    }

    #[test]
    fn substitution_replaces_every_occurrence(seed: u64) {
        let mut rng = common::rng(seed);
        let sig = common::random_signature(&mut rng);
        let t = &sig.theory;
        let mut g = common::DerivGen::new(&sig, seed);
        let (d, s) = g.gen(5);
        let subs = common::subderivations(t, &d, &s);
        let (e, se) = &subs[seed as usize % subs.len()];
        let Some(h) = se.ctx.iter().next().cloned() else { return Ok(()) };
        let (p, sp) = g.cut_provider(&h.prop, 2).unwrap();

        let d2 = seq_to_nd(t, e, se).unwrap();
        let gamma2 = UnorderedCtx::from(&se.ctx);
        let d1 = seq_to_nd(t, &p, &sp).unwrap();
        let gamma1 = UnorderedCtx::from(&sp.ctx);
        let (r, gamma) = substitute(t, &d1, &gamma1, &h.prop, &h.var, &d2, &gamma2, &se.goal).unwrap();

        let expect: Ctx = se
            .ctx
            .iter()
            .flat_map(|k| if k.var == h.var { sp.ctx.0.clone() } else { vec![k.clone()] })
            .collect();
        prop_assert_eq!(check_nd(t, &r, &gamma, &se.goal).unwrap(), expect);
    }
}
