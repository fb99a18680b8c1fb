//! Checking every proof block of a workspace.

use ordal::implicit::{check_implicit_traced, elaborate_from};
use ordal::nf::ContextSet;
use ordal::workspace::{ProofBody, Theorem, Workspace};
use ordal::{check_nd, check_seq, CheckOptions, NdDeriv, UnorderedCtx};
use serde::Serialize;

#[derive(Debug, Clone, Copy, Default)]
pub struct Options {
    pub atomic_id: bool,
    pub elaborate: bool,
}

#[derive(Debug, Clone)]
pub struct BlockReport {
    pub tag: &'static str,
    pub line: usize,
    pub failure: Option<Failure>,
    pub xi: Option<ContextSet>,
    pub elaborated: Option<NdDeriv>,
}

#[derive(Debug, Clone)]
pub struct Failure {
    pub path: Vec<usize>,
    pub message: String,
}

#[derive(Debug, Clone)]
pub struct TheoremReport {
    pub name: String,
    pub blocks: Vec<BlockReport>,
}

impl TheoremReport {
    pub fn ok(&self) -> bool {
        self.blocks.iter().all(|b| b.failure.is_none())
    }
}

/// One machine-readable record per theorem.
#[derive(Debug, Serialize)]
pub struct JsonRecord<'a> {
    pub name: &'a str,
    pub status: &'static str,
    pub xi_size: Option<usize>,
    pub failure_path: Option<String>,
    pub message: Option<&'a str>,
}

impl TheoremReport {
    pub fn json(&self) -> JsonRecord<'_> {
        let first = self.blocks.iter().find_map(|b| b.failure.as_ref());
        JsonRecord {
            name: &self.name,
            status: match (self.blocks.is_empty(), first) {
                (true, _) => "open",
                (false, None) => "ok",
                (false, Some(_)) => "fail",
            },
            xi_size: self.blocks.iter().find_map(|b| b.xi.as_ref().map(ContextSet::len)),
            failure_path: first.map(|f| path_string(&f.path)),
            message: first.map(|f| f.message.as_str()),
        }
    }
}

pub fn path_string(p: &[usize]) -> String {
    if p.is_empty() {
        "root".to_string()
    } else {
        p.iter().map(usize::to_string).collect::<Vec<_>>().join(".")
    }
}

fn fail(path: Vec<usize>, message: impl Into<String>) -> Option<Failure> {
    Some(Failure {
        path,
        message: message.into(),
    })
}

fn check_theorem(ws: &Workspace, th: &Theorem, opts: Options) -> TheoremReport {
    let t = &ws.sig.theory;
    let s = &th.sequent;
    let gamma = UnorderedCtx::from(&s.ctx);
    let blocks = th
        .proofs
        .iter()
        .map(|p| {
            let mut r = BlockReport {
                tag: p.body.tag().name(),
                line: p.pos.line,
                failure: None,
                xi: None,
                elaborated: None,
            };
            match &p.body {
                ProofBody::Seq(d) => {
                    let o = CheckOptions {
                        atomic_id: opts.atomic_id,
                    };
                    if let Err(e) = check_seq(t, d, s, o) {
                        r.failure = fail(e.path.clone(), e.to_string());
                    }
                }
                ProofBody::Nd(d) => match check_nd(t, d, &gamma, &s.goal) {
                    Ok(out) if out == s.ctx => {}
                    Ok(out) => {
                        r.failure = fail(
                            vec![],
                            format!(
                                "output context {} differs from {}",
                                out.display(t),
                                s.ctx.display(t)
                            ),
                        )
                    }
                    Err(e) => r.failure = fail(e.path.clone(), e.to_string()),
                },
                ProofBody::Skeleton(sk) => match check_implicit_traced(t, &gamma, sk, &s.goal) {
                    Err(e) => r.failure = fail(e.path.clone(), e.to_string()),
                    Ok(traced) => {
                        let xi = traced.xi();
                        if !s.ctx.is_normal() {
                            r.failure = fail(vec![], "skeleton blocks need a theorem context without repeated variables");
                        } else if !xi.contains(&s.ctx) {
                            r.failure = fail(vec![], "the theorem context is not among the admissible output contexts");
                        } else if opts.elaborate {
                            match elaborate_from(sk, &traced, &s.ctx) {
                                Ok(d) => r.elaborated = Some(d),
                                Err(e) => r.failure = fail(vec![], e.to_string()),
                            }
                        }
                        r.xi = Some(xi);
                    }
                },
            }
            r
        })
        .collect();
    TheoremReport {
        name: th.name.clone(),
        blocks,
    }
}

pub fn check_workspace(ws: &Workspace, opts: Options) -> Vec<TheoremReport> {
    ws.theorems.iter().map(|th| check_theorem(ws, th, opts)).collect()
}
