//! `.oal` files: a signature, theorems and proof blocks.
//!
//! ```text
//! % comment
//! mode U {W, CL, CR, ML, MR}
//! mode L {}
//! order U > L
//! atom P @ L
//! thm swap : (x : P) |- P
//! proof swap seq = (id x) end
//! ```
//!
//! Every item but `proof` fits on one line. A proof block is tagged `seq`
//! (the default), `nd` or `skeleton` and holds one s-expression.

use crate::implicit::Skeleton;
use crate::modes::{ModeDecls, ModeTheory, Sigma, StructuralProperty};
use crate::nd::NdDeriv;
use crate::parse::{read_sexp, seq_deriv_from_sexp, tokenize, ParseError, Parser, Pos, Tok};
use crate::prop::Signature;
use crate::seq::{SeqDeriv, Sequent};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProofTag {
    Seq,
    Nd,
    Skeleton,
}

impl ProofTag {
    pub fn name(self) -> &'static str {
        match self {
            ProofTag::Seq => "seq",
            ProofTag::Nd => "nd",
            ProofTag::Skeleton => "skeleton",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProofBody {
    Seq(SeqDeriv),
    Nd(NdDeriv),
    Skeleton(Skeleton),
}

impl ProofBody {
    pub fn tag(&self) -> ProofTag {
        match self {
            ProofBody::Seq(_) => ProofTag::Seq,
            ProofBody::Nd(_) => ProofTag::Nd,
            ProofBody::Skeleton(_) => ProofTag::Skeleton,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Proof {
    pub pos: Pos,
    pub body: ProofBody,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Theorem {
    pub name: String,
    pub pos: Pos,
    pub sequent: Sequent,
    pub proofs: Vec<Proof>,
}

#[derive(Debug, Clone)]
pub struct Workspace {
    pub decls: ModeDecls,
    pub sig: Signature,
    pub theorems: Vec<Theorem>,
}

struct Item<'a> {
    keyword: String,
    pos: Pos,
    /// Text after the keyword and where it starts.
    body: &'a str,
    body_pos: Pos,
}

struct Scanner<'a> {
    src: &'a str,
    i: usize,
    pos: Pos,
}

impl<'a> Scanner<'a> {
    fn advance(&mut self, n: usize) {
        for c in self.src[self.i..self.i + n].chars() {
            if c == '\n' {
                self.pos.line += 1;
                self.pos.col = 1;
            } else {
                self.pos.col += 1;
            }
        }
        self.i += n;
    }

    fn rest(&self) -> &'a str {
        &self.src[self.i..]
    }

    fn skip_blank(&mut self) {
        loop {
            let r = self.rest();
            let t = r.trim_start();
            self.advance(r.len() - t.len());
            if t.starts_with('%') {
                self.advance(t.find('\n').unwrap_or(t.len()));
            } else {
                return;
            }
        }
    }

    fn word(&mut self) -> String {
        let r = self.rest();
        let n = r
            .find(|c: char| !(c.is_alphanumeric() || c == '_'))
            .unwrap_or(r.len());
        let w = r[..n].to_string();
        self.advance(n);
        w
    }

    fn line(&mut self) -> (&'a str, Pos) {
        let r = self.rest();
        let n = r.find('\n').unwrap_or(r.len());
        let pos = self.pos;
        self.advance(n);
        (&r[..n], pos)
    }

    fn items(mut self) -> Result<Vec<Item<'a>>, ParseError> {
        let mut out = Vec::new();
        loop {
            self.skip_blank();
            if self.i >= self.src.len() {
                return Ok(out);
            }
            let pos = self.pos;
            let keyword = self.word();
            match keyword.as_str() {
                "mode" | "order" | "atom" | "thm" => {
                    let (body, body_pos) = self.line();
                    out.push(Item { keyword, pos, body, body_pos });
                }
                "proof" => {
                    let start = self.i;
                    let body_pos = self.pos;
                    let eq = self.rest().find('=').ok_or_else(|| {
                        ParseError::syntax(body_pos, "`=` after the proof header", "end of input")
                    })?;
                    self.advance(eq + 1);
                    let (_, n) = read_sexp(self.rest(), self.pos)?;
                    self.advance(n);
                    self.skip_blank();
                    let end_pos = self.pos;
                    let w = self.word();
                    if w != "end" {
                        let found = if w.is_empty() { "end of input".to_string() } else { format!("`{w}`") };
                        return Err(ParseError::syntax(end_pos, "`end`", found));
                    }
                    let body = &self.src[start..self.i - 3];
                    out.push(Item { keyword, pos, body, body_pos });
                }
                "" => {
                    let c = self.rest().chars().next().unwrap();
                    return Err(ParseError::syntax(pos, "an item", format!("`{c}`")));
                }
                other => {
                    return Err(ParseError::syntax(
                        pos,
                        "`mode`, `order`, `atom`, `thm` or `proof`",
                        format!("`{other}`"),
                    ))
                }
            }
        }
    }
}

/// Token-level cursor for the one-line items, which are read before a
/// signature exists.
struct Toks {
    toks: Vec<(Tok, Pos)>,
    i: usize,
}

impl Toks {
    fn new(src: &str, base: Pos) -> Result<Self, ParseError> {
        Ok(Toks { toks: tokenize(src, base)?, i: 0 })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.i].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.i].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.i].0.clone();
        if self.i + 1 < self.toks.len() {
            self.i += 1;
        }
        t
    }

    fn expect(&mut self, t: Tok) -> Result<(), ParseError> {
        if *self.peek() == t {
            self.bump();
            Ok(())
        } else {
            Err(ParseError::syntax(self.pos(), t.to_string(), self.peek()))
        }
    }

    fn ident(&mut self, what: &str) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            other => Err(ParseError::syntax(self.pos(), what, other)),
        }
    }

    fn end(&self) -> Result<(), ParseError> {
        match self.peek() {
            Tok::Eof => Ok(()),
            t => Err(ParseError::syntax(self.pos(), "end of line", t)),
        }
    }
}

fn parse_mode(it: &Item) -> Result<(String, Sigma), ParseError> {
    let mut t = Toks::new(it.body, it.body_pos)?;
    let name = t.ident("a mode name")?;
    let mut sigma = Sigma::EMPTY;
    if *t.peek() == Tok::LBrace {
        t.bump();
        while *t.peek() != Tok::RBrace {
            let pos = t.pos();
            let p = t.ident("a structural property")?;
            let prop = StructuralProperty::from_name(&p).ok_or_else(|| {
                ParseError::syntax(pos, "one of W, CL, CR, ML, MR", format!("`{p}`"))
            })?;
            sigma.insert(prop);
            if *t.peek() == Tok::Comma {
                t.bump();
            } else {
                break;
            }
        }
        t.expect(Tok::RBrace)?;
    }
    t.end()?;
    Ok((name, sigma))
}

fn parse_order(it: &Item) -> Result<Vec<(String, String)>, ParseError> {
    let mut t = Toks::new(it.body, it.body_pos)?;
    let mut chain = vec![t.ident("a mode name")?];
    t.expect(Tok::Gt)?;
    chain.push(t.ident("a mode name")?);
    while *t.peek() == Tok::Gt {
        t.bump();
        chain.push(t.ident("a mode name")?);
    }
    t.end()?;
    Ok(chain.windows(2).map(|w| (w[0].clone(), w[1].clone())).collect())
}

fn parse_atom(it: &Item) -> Result<(String, String, Pos), ParseError> {
    let mut t = Toks::new(it.body, it.body_pos)?;
    let name = t.ident("an atom name")?;
    t.expect(Tok::At)?;
    let pos = t.pos();
    let mode = t.ident("a mode name")?;
    t.end()?;
    Ok((name, mode, pos))
}

fn parse_thm(sig: &Signature, it: &Item) -> Result<(String, Sequent), ParseError> {
    let mut p = Parser::new(sig, it.body, it.body_pos)?;
    let name = p.ident("a theorem name")?;
    p.expect(Tok::Colon)?;
    let s = p.sequent()?;
    p.expect_eof()?;
    Ok((name, s))
}

fn parse_proof(sig: &Signature, it: &Item) -> Result<(String, Proof), ParseError> {
    let eq = it.body.find('=').expect("scanner found `=`");
    let mut t = Toks::new(&it.body[..eq], it.body_pos)?;
    let name = t.ident("a theorem name")?;
    let tag = match t.peek().clone() {
        Tok::Ident(s) => {
            let pos = t.pos();
            t.bump();
            match s.as_str() {
                "seq" => ProofTag::Seq,
                "nd" => ProofTag::Nd,
                "skeleton" => ProofTag::Skeleton,
                _ => return Err(ParseError::syntax(pos, "`seq`, `nd` or `skeleton`", format!("`{s}`"))),
            }
        }
        _ => ProofTag::Seq,
    };
    t.end()?;
    let mut sp = Scanner {
        src: it.body,
        i: 0,
        pos: it.body_pos,
    };
    sp.advance(eq + 1);
    let (sexp, _) = read_sexp(sp.rest(), sp.pos)?;
    let body = match tag {
        ProofTag::Seq => ProofBody::Seq(seq_deriv_from_sexp(sig, &sexp)?),
        ProofTag::Nd => ProofBody::Nd(NdDeriv::from_sexp(sig, &sexp)?),
        ProofTag::Skeleton => ProofBody::Skeleton(Skeleton::from_sexp(sig, &sexp)?),
    };
    Ok((name, Proof { pos: it.pos, body }))
}

/// Parses a workspace. With `complete_sigma`, mobility implied by weakening
/// and contraction is added instead of being rejected.
pub fn parse_workspace(src: &str, complete_sigma: bool) -> Result<Workspace, ParseError> {
    let items = Scanner {
        src,
        i: 0,
        pos: Pos::START,
    }
    .items()?;
    let mut decls = ModeDecls::default();
    let mut first_mode = None;
    for it in &items {
        match it.keyword.as_str() {
            "mode" => {
                first_mode.get_or_insert(it.pos);
                let (n, s) = parse_mode(it)?;
                if decls.modes.iter().any(|(m, _)| *m == n) {
                    return Err(ParseError::new(it.pos, crate::modes::ModeError::DuplicateMode(n)));
                }
                decls.modes.push((n, s));
            }
            "order" => decls.order.extend(parse_order(it)?),
            _ => {}
        }
    }
    let theory = ModeTheory::validate(&decls, complete_sigma)
        .map_err(|e| ParseError::new(first_mode.unwrap_or(Pos::START), e))?;
    let mut sig = Signature::new(theory);
    for it in items.iter().filter(|it| it.keyword == "atom") {
        let (name, mode, pos) = parse_atom(it)?;
        sig.theory.lookup(&mode).map_err(|e| ParseError::new(pos, e))?;
        if sig.atom(&name).is_ok() {
            return Err(ParseError::other(it.pos, format!("atom `{name}` declared twice")));
        }
        sig = sig.with_atom(&name, &mode);
    }
    let mut theorems: Vec<Theorem> = Vec::new();
    for it in items.iter().filter(|it| it.keyword == "thm") {
        let (name, sequent) = parse_thm(&sig, it)?;
        if theorems.iter().any(|t| t.name == name) {
            return Err(ParseError::other(it.pos, format!("theorem `{name}` declared twice")));
        }
        theorems.push(Theorem {
            name,
            pos: it.pos,
            sequent,
            proofs: vec![],
        });
    }
    for it in items.iter().filter(|it| it.keyword == "proof") {
        let (name, proof) = parse_proof(&sig, it)?;
        let th = theorems
            .iter_mut()
            .find(|t| t.name == name)
            .ok_or_else(|| ParseError::other(it.pos, format!("proof for unknown theorem `{name}`")))?;
        th.proofs.push(proof);
    }
    Ok(Workspace { decls, sig, theorems })
}

#[cfg(test)]
mod tests {
    use super::*;

    const SRC: &str = "% linear/nonlinear
mode U {W, CL, CR, ML, MR}
mode L {}
order U > L
atom P @ L
atom X @ U

thm ident : (x : P) |- P
proof ident = (id x) end
proof ident nd =
  (hyp x)
end
thm bang : . |- down[L] up[U] X ->> 1[L]  % comment
proof bang skeleton = (impRI b (downE (hyp b) u (oneI))) end
";

    #[test]
    fn parses_items() {
        let ws = parse_workspace(SRC, false).unwrap();
        assert_eq!(ws.theorems.len(), 2);
        assert_eq!(ws.theorems[0].proofs.len(), 2);
        assert_eq!(ws.theorems[0].proofs[1].body.tag(), ProofTag::Nd);
        assert_eq!(ws.theorems[1].proofs[0].body.tag(), ProofTag::Skeleton);
        assert_eq!(ws.theorems[1].proofs[0].pos, Pos { line: 14, col: 1 });
    }

    #[test]
    fn reports_positions() {
        let e = parse_workspace("mode L {}\nthm t : (x : Q) |- Q\n", false).unwrap_err();
        assert_eq!(e.pos.line, 2);
        let e = parse_workspace("mode k {W}\nmode m {}\norder m > k\n", false).unwrap_err();
        assert!(matches!(e.kind, crate::parse::ParseErrorKind::Mode(_)));
        let e = parse_workspace("mode L {}\nproof t = (id x)\n", false).unwrap_err();
        assert!(e.to_string().contains("`end`"), "{e}");
        let e = parse_workspace("mode L {}\nlemma t\n", false).unwrap_err();
        assert_eq!(e.pos, Pos { line: 2, col: 1 });
    }
}
