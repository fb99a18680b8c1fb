//! Bundled fixtures, checked end to end.

use ordal::modes::StructuralProperty as Sp;
use ordal::nf::normal_forms;
use ordal::parse::parse_ctx;
use ordal::workspace::{parse_workspace, ProofTag};
use ordal::UnorderedCtx;

use crate::check::{check_workspace, Options};

pub const LNL: &str = include_str!("../examples/lnl.oal");
pub const MOBILITY: &str = include_str!("../examples/mobility.oal");
pub const NF_EXAMPLE: &str = include_str!("../examples/nf_example.oal");
pub const SECURITY: &str = include_str!("../examples/security.oal");

fn all_ok(src: &str) -> Result<bool, String> {
    let ws = parse_workspace(src, false).map_err(|e| e.to_string())?;
    Ok(check_workspace(&ws, Options::default()).iter().all(|r| r.ok()))
}

/// Whether every skeleton block of the mobility fixture passes under the given modes.
fn mobility_skeletons(k: &str, m: &str) -> Result<bool, String> {
    let src = MOBILITY
        .replace("mode k {ML}", &format!("mode k {{{k}}}"))
        .replace("mode m {}", &format!("mode m {{{m}}}"));
    let ws = parse_workspace(&src, false).map_err(|e| e.to_string())?;
    let reports = check_workspace(&ws, Options::default());
    Ok(reports
        .iter()
        .flat_map(|r| &r.blocks)
        .filter(|b| b.tag == ProofTag::Skeleton.name())
        .all(|b| b.failure.is_none()))
}

fn nf_example() -> Result<bool, String> {
    let ws = parse_workspace(NF_EXAMPLE, false).map_err(|e| e.to_string())?;
    let r = &check_workspace(&ws, Options::default())[0];
    let xi = r.blocks.iter().find_map(|b| b.xi.clone()).ok_or("no skeleton block")?;
    let t = &ws.sig.theory;
    let shown: Vec<String> = xi.iter().map(|c| c.display(t).to_string()).collect();
    Ok(shown == ["(y : B)", "(x : A) (y : B)", "(y : B) (x : A)"])
}

/// Every reordering the normal-form search reaches agrees with a pairwise rule:
/// an inverted pair needs the left one to move right or the right one to move left.
fn security_orders() -> Result<bool, String> {
    let ws = parse_workspace(SECURITY, false).map_err(|e| e.to_string())?;
    let t = &ws.sig.theory;
    let start = parse_ctx(&ws.sig, "(p : L) (a : A) (h : H) (q : L)").map_err(|e| e.to_string())?;
    let gamma = UnorderedCtx::from(&start);
    let op = t.lookup("op").map_err(|e| e.to_string())?;
    let reach = normal_forms(t, &gamma, op, &start).map_err(|e| e.to_string())?;
    let can = |h: &ordal::Hyp, p: Sp| t.sigma(h.prop.mode()).contains(p);
    let mut count = 0;
    for perm in permutations(start.len()) {
        let target = ordal::Ctx(perm.iter().map(|&i| start[i].clone()).collect());
        let rank = |i: usize| perm.iter().position(|&j| j == i).unwrap();
        let mut allowed = true;
        for i in 0..start.len() {
            for j in i + 1..start.len() {
                if rank(j) < rank(i) && !can(&start[i], Sp::MR) && !can(&start[j], Sp::ML) {
                    allowed = false;
                }
            }
        }
        count += usize::from(allowed);
        if allowed != reach.contains(&target) {
            return Ok(false);
        }
    }
    Ok(count == 12 && reach.len() == 12)
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

pub fn run() -> bool {
    let cases: Vec<(&str, Result<bool, String>)> = vec![
        ("lnl fixture", all_ok(LNL)),
        ("mobility fixture", all_ok(MOBILITY)),
        ("nf fixture", all_ok(NF_EXAMPLE)),
        ("security fixture", all_ok(SECURITY)),
        ("mobility: k {ML}, m {}", mobility_skeletons("ML", "")),
        ("mobility: k {ML}, m {ML}", mobility_skeletons("ML", "ML")),
        ("mobility: k {MR}, m {MR}", mobility_skeletons("MR", "MR")),
        ("mobility rejects k {MR}, m {}", mobility_skeletons("MR", "").map(|b| !b)),
        ("weakening normal forms", nf_example()),
        ("security reorderings", security_orders()),
    ];
    let mut ok = true;
    for (name, res) in cases {
        match res {
            Ok(true) => println!("pass {name}"),
            Ok(false) => {
                ok = false;
                println!("FAIL {name}");
            }
            Err(e) => {
                ok = false;
                println!("FAIL {name}: {e}");
            }
        }
    }
    ok
}
