//! Concrete syntax: propositions, contexts, sequents, s-expressions and
//! sequent derivations.

use std::fmt;

use thiserror::Error;

use crate::modes::{ModeError, ModeId};
use crate::prop::{Ctx, Hyp, Prop, PropError, Signature};
use crate::seq::{SeqDeriv, SeqRule, Sequent, VarRef};
use crate::structural::Structural;

/// A 1-based line and column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl Pos {
    pub const START: Pos = Pos { line: 1, col: 1 };

    fn advance(&mut self, c: char) {
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("expected {expected}, found {found}")]
    Syntax { expected: String, found: String },
    #[error(transparent)]
    Prop(#[from] PropError),
    #[error(transparent)]
    Mode(#[from] ModeError),
    #[error("{0}")]
    Other(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{pos}: {kind}")]
pub struct ParseError {
    pub pos: Pos,
    pub kind: ParseErrorKind,
}

impl ParseError {
    pub fn new(pos: Pos, kind: impl Into<ParseErrorKind>) -> Self {
        ParseError {
            pos,
            kind: kind.into(),
        }
    }

    pub fn syntax(pos: Pos, expected: impl Into<String>, found: impl fmt::Display) -> Self {
        ParseError {
            pos,
            kind: ParseErrorKind::Syntax {
                expected: expected.into(),
                found: found.to_string(),
            },
        }
    }

    pub fn other(pos: Pos, msg: impl Into<String>) -> Self {
        ParseError {
            pos,
            kind: ParseErrorKind::Other(msg.into()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Num(usize),
    LParen,
    RParen,
    LBrack,
    RBrack,
    LBrace,
    RBrace,
    LeftImp,
    RightImp,
    Star,
    Amp,
    Plus,
    Dot,
    Colon,
    Comma,
    Turnstile,
    Gt,
    At,
    Eq,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::Ident(s) => return write!(f, "`{s}`"),
            Tok::Num(n) => return write!(f, "`{n}`"),
            Tok::LParen => "`(`",
            Tok::RParen => "`)`",
            Tok::LBrack => "`[`",
            Tok::RBrack => "`]`",
            Tok::LBrace => "`{`",
            Tok::RBrace => "`}`",
            Tok::LeftImp => "`>->`",
            Tok::RightImp => "`->>`",
            Tok::Star => "`*`",
            Tok::Amp => "`&`",
            Tok::Plus => "`+`",
            Tok::Dot => "`.`",
            Tok::Colon => "`:`",
            Tok::Comma => "`,`",
            Tok::Turnstile => "`|-`",
            Tok::Gt => "`>`",
            Tok::At => "`@`",
            Tok::Eq => "`=`",
            Tok::Eof => "end of input",
        };
        f.write_str(s)
    }
}

pub fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

pub fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '\''
}

/// Splits `src` into tokens; `base` is the position of its first character.
/// `%` starts a comment running to the end of the line.
pub fn tokenize(src: &str, base: Pos) -> Result<Vec<(Tok, Pos)>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut pos = base;
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let start = pos;
        if c == '%' {
            while i < chars.len() && chars[i] != '\n' {
                pos.advance(chars[i]);
                i += 1;
            }
            continue;
        }
        if c.is_whitespace() {
            pos.advance(c);
            i += 1;
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 3)].iter().collect();
        let (tok, n) = if rest.starts_with(">->") {
            (Tok::LeftImp, 3)
        } else if rest.starts_with("->>") {
            (Tok::RightImp, 3)
        } else if rest.starts_with("|-") {
            (Tok::Turnstile, 2)
        } else if is_ident_start(c) {
            let mut j = i;
            while j < chars.len() && is_ident_char(chars[j]) {
                j += 1;
            }
            (Tok::Ident(chars[i..j].iter().collect()), j - i)
        } else if c.is_ascii_digit() {
            let mut j = i;
            while j < chars.len() && chars[j].is_ascii_digit() {
                j += 1;
            }
            let s: String = chars[i..j].iter().collect();
            let n = s
                .parse()
                .map_err(|_| ParseError::other(start, format!("number `{s}` too large")))?;
            (Tok::Num(n), j - i)
        } else {
            let t = match c {
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                '[' => Tok::LBrack,
                ']' => Tok::RBrack,
                '{' => Tok::LBrace,
                '}' => Tok::RBrace,
                '*' => Tok::Star,
                '&' => Tok::Amp,
                '+' => Tok::Plus,
                '.' => Tok::Dot,
                ':' => Tok::Colon,
                ',' => Tok::Comma,
                '>' => Tok::Gt,
                '@' => Tok::At,
                '=' => Tok::Eq,
                other => return Err(ParseError::syntax(start, "a token", format!("`{other}`"))),
            };
            (t, 1)
        };
        for _ in 0..n {
            pos.advance(chars[i]);
            i += 1;
        }
        out.push((tok, start));
    }
    out.push((Tok::Eof, pos));
    Ok(out)
}

/// Recursive-descent parser over a token stream.
pub struct Parser<'s> {
    toks: Vec<(Tok, Pos)>,
    i: usize,
    sig: &'s Signature,
}

impl<'s> Parser<'s> {
    pub fn new(sig: &'s Signature, src: &str, base: Pos) -> Result<Self, ParseError> {
        Ok(Parser {
            toks: tokenize(src, base)?,
            i: 0,
            sig,
        })
    }

    pub fn peek(&self) -> &Tok {
        &self.toks[self.i].0
    }

    pub fn pos(&self) -> Pos {
        self.toks[self.i].1
    }

    pub fn bump(&mut self) -> Tok {
        let t = self.toks[self.i].0.clone();
        if self.i + 1 < self.toks.len() {
            self.i += 1;
        }
        t
    }

    pub fn expect(&mut self, t: Tok) -> Result<(), ParseError> {
        if *self.peek() == t {
            self.bump();
            Ok(())
        } else {
            Err(ParseError::syntax(self.pos(), t.to_string(), self.peek()))
        }
    }

    pub fn ident(&mut self, what: &str) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            other => Err(ParseError::syntax(self.pos(), what, other)),
        }
    }

    pub fn at_eof(&self) -> bool {
        *self.peek() == Tok::Eof
    }

    pub fn expect_eof(&self) -> Result<(), ParseError> {
        if self.at_eof() {
            Ok(())
        } else {
            Err(ParseError::syntax(self.pos(), "end of input", self.peek()))
        }
    }

    fn mode_arg(&mut self) -> Result<ModeId, ParseError> {
        self.expect(Tok::LBrack)?;
        let pos = self.pos();
        let name = self.ident("a mode name")?;
        let m = self.sig.mode(&name).map_err(|e| ParseError::new(pos, e))?;
        self.expect(Tok::RBrack)?;
        Ok(m)
    }

    /// A proposition, checked against the signature.
    pub fn prop(&mut self) -> Result<Prop, ParseError> {
        let pos = self.pos();
        let p = self.imp()?;
        self.sig.check_prop(&p).map_err(|e| ParseError::new(pos, e))?;
        Ok(p)
    }

    fn imp(&mut self) -> Result<Prop, ParseError> {
        let a = self.additive()?;
        match self.peek() {
            Tok::LeftImp => {
                self.bump();
                Ok(Prop::left_imp(a, self.imp()?))
            }
            Tok::RightImp => {
                self.bump();
                Ok(Prop::right_imp(a, self.imp()?))
            }
            _ => Ok(a),
        }
    }

    fn additive(&mut self) -> Result<Prop, ParseError> {
        let mut a = self.fuse()?;
        loop {
            match self.peek() {
                Tok::Amp => {
                    self.bump();
                    a = Prop::with(a, self.fuse()?);
                }
                Tok::Plus => {
                    self.bump();
                    a = Prop::plus(a, self.fuse()?);
                }
                _ => return Ok(a),
            }
        }
    }

    fn fuse(&mut self) -> Result<Prop, ParseError> {
        let mut a = self.unary()?;
        while *self.peek() == Tok::Star {
            self.bump();
            a = Prop::fuse(a, self.unary()?);
        }
        Ok(a)
    }

    fn unary(&mut self) -> Result<Prop, ParseError> {
        let pos = self.pos();
        match self.bump() {
            Tok::LParen => {
                let p = self.imp()?;
                self.expect(Tok::RParen)?;
                Ok(p)
            }
            Tok::Num(1) => Ok(Prop::One(self.mode_arg()?)),
            Tok::Ident(s) if s == "up" => {
                let m = self.mode_arg()?;
                Ok(Prop::up(m, self.unary()?))
            }
            Tok::Ident(s) if s == "down" => {
                let m = self.mode_arg()?;
                Ok(Prop::down(m, self.unary()?))
            }
            Tok::Ident(s) => self.sig.atom(&s).map_err(|e| ParseError::new(pos, e)),
            other => Err(ParseError::syntax(pos, "a proposition", other)),
        }
    }

    /// `.` or a sequence of `(x : A)`.
    pub fn ctx(&mut self) -> Result<Ctx, ParseError> {
        if *self.peek() == Tok::Dot {
            self.bump();
            return Ok(Ctx::new());
        }
        let mut c = Ctx::new();
        while *self.peek() == Tok::LParen {
            self.bump();
            let x = self.ident("a variable")?;
            self.expect(Tok::Colon)?;
            let p = self.prop()?;
            self.expect(Tok::RParen)?;
            c.push(Hyp::new(&x, p));
        }
        if c.is_empty() {
            return Err(ParseError::syntax(self.pos(), "a context", self.peek()));
        }
        Ok(c)
    }

    pub fn sequent(&mut self) -> Result<Sequent, ParseError> {
        let ctx = self.ctx()?;
        self.expect(Tok::Turnstile)?;
        let goal = self.prop()?;
        Ok(Sequent::new(ctx, goal))
    }
}

pub fn parse_prop(sig: &Signature, src: &str) -> Result<Prop, ParseError> {
    parse_prop_at(sig, src, Pos::START)
}

pub fn parse_prop_at(sig: &Signature, src: &str, base: Pos) -> Result<Prop, ParseError> {
    let mut p = Parser::new(sig, src, base)?;
    let r = p.prop()?;
    p.expect_eof()?;
    Ok(r)
}

pub fn parse_ctx(sig: &Signature, src: &str) -> Result<Ctx, ParseError> {
    let mut p = Parser::new(sig, src, Pos::START)?;
    let r = p.ctx()?;
    p.expect_eof()?;
    Ok(r)
}

pub fn parse_sequent(sig: &Signature, src: &str) -> Result<Sequent, ParseError> {
    let mut p = Parser::new(sig, src, Pos::START)?;
    let r = p.sequent()?;
    p.expect_eof()?;
    Ok(r)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SexpKind {
    Atom(String),
    /// Bracketed text, kept verbatim for a second-stage parser.
    Raw(String),
    List(Vec<Sexp>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sexp {
    pub kind: SexpKind,
    pub pos: Pos,
}

/// Reads one s-expression from the start of `src` (after whitespace and
/// comments). Returns it with the number of bytes consumed.
pub fn read_sexp(src: &str, base: Pos) -> Result<(Sexp, usize), ParseError> {
    let mut r = SexpReader {
        src,
        i: 0,
        pos: base,
    };
    let s = r.read()?;
    Ok((s, r.i))
}

/// Reads exactly one s-expression spanning all of `src`.
pub fn parse_sexp(src: &str) -> Result<Sexp, ParseError> {
    let mut r = SexpReader {
        src,
        i: 0,
        pos: Pos::START,
    };
    let s = r.read()?;
    r.skip_ws();
    if r.i < src.len() {
        return Err(ParseError::syntax(r.pos, "end of input", r.peek_char().unwrap()));
    }
    Ok(s)
}

struct SexpReader<'a> {
    src: &'a str,
    i: usize,
    pos: Pos,
}

impl SexpReader<'_> {
    fn peek_char(&self) -> Option<char> {
        self.src[self.i..].chars().next()
    }

    fn next_char(&mut self) -> Option<char> {
        let c = self.peek_char()?;
        self.i += c.len_utf8();
        self.pos.advance(c);
        Some(c)
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.peek_char() {
            if c == '%' {
                while let Some(c) = self.peek_char() {
                    if c == '\n' {
                        break;
                    }
                    self.next_char();
                }
            } else if c.is_whitespace() {
                self.next_char();
            } else {
                break;
            }
        }
    }

    fn read(&mut self) -> Result<Sexp, ParseError> {
        self.skip_ws();
        let pos = self.pos;
        match self.peek_char() {
            None => Err(ParseError::syntax(pos, "an s-expression", "end of input")),
            Some('(') => {
                self.next_char();
                let mut items = Vec::new();
                loop {
                    self.skip_ws();
                    match self.peek_char() {
                        Some(')') => {
                            self.next_char();
                            return Ok(Sexp {
                                kind: SexpKind::List(items),
                                pos,
                            });
                        }
                        None => return Err(ParseError::syntax(self.pos, "`)`", "end of input")),
                        _ => items.push(self.read()?),
                    }
                }
            }
            Some('[') => {
                self.next_char();
                let start = self.i;
                let mut depth = 1;
                loop {
                    match self.next_char() {
                        None => return Err(ParseError::syntax(self.pos, "`]`", "end of input")),
                        Some('[') => depth += 1,
                        Some(']') => {
                            depth -= 1;
                            if depth == 0 {
                                break;
                            }
                        }
                        Some(_) => {}
                    }
                }
                let text = self.src[start..self.i - 1].to_string();
                Ok(Sexp {
                    kind: SexpKind::Raw(text),
                    pos,
                })
            }
            Some(c) if c == ')' || c == ']' => Err(ParseError::syntax(pos, "an s-expression", format!("`{c}`"))),
            Some(_) => {
                let start = self.i;
                while let Some(c) = self.peek_char() {
                    if c.is_whitespace() || "()[]%".contains(c) {
                        break;
                    }
                    self.next_char();
                }
                Ok(Sexp {
                    kind: SexpKind::Atom(self.src[start..self.i].to_string()),
                    pos,
                })
            }
        }
    }
}

impl Sexp {
    pub fn atom(&self, what: &str) -> Result<&str, ParseError> {
        match &self.kind {
            SexpKind::Atom(s) => Ok(s),
            _ => Err(ParseError::syntax(self.pos, what, "a list")),
        }
    }

    pub fn var(&self) -> Result<String, ParseError> {
        let s = self.atom("a variable")?;
        let mut cs = s.chars();
        if cs.next().is_some_and(is_ident_start) && cs.all(is_ident_char) {
            Ok(s.to_string())
        } else {
            Err(ParseError::syntax(self.pos, "a variable", format!("`{s}`")))
        }
    }

    /// `x` or `x#k`.
    pub fn var_ref(&self) -> Result<VarRef, ParseError> {
        let s = self.atom("a variable reference")?;
        let (name, occ) = match s.split_once('#') {
            Some((n, k)) => (
                n,
                k.parse()
                    .map_err(|_| ParseError::syntax(self.pos, "an occurrence index", format!("`{k}`")))?,
            ),
            None => (s, 0),
        };
        let probe = Sexp {
            kind: SexpKind::Atom(name.to_string()),
            pos: self.pos,
        };
        Ok(VarRef {
            name: probe.var()?,
            occ,
        })
    }

    pub fn num(&self) -> Result<usize, ParseError> {
        let s = self.atom("a number")?;
        s.parse()
            .map_err(|_| ParseError::syntax(self.pos, "a number", format!("`{s}`")))
    }

    /// Bracketed proposition.
    pub fn prop(&self, sig: &Signature) -> Result<Prop, ParseError> {
        match &self.kind {
            SexpKind::Raw(s) => parse_prop_at(
                sig,
                s,
                Pos {
                    line: self.pos.line,
                    col: self.pos.col + 1,
                },
            ),
            _ => Err(ParseError::syntax(self.pos, "a bracketed proposition", "something else")),
        }
    }

    pub fn form(&self) -> Result<Form<'_>, ParseError> {
        match &self.kind {
            SexpKind::List(items) => match items.first() {
                Some(h) => Ok(Form {
                    head: h.atom("a rule name")?,
                    args: &items[1..],
                    pos: self.pos,
                }),
                None => Err(ParseError::syntax(self.pos, "a rule name", "`()`")),
            },
            _ => Err(ParseError::syntax(self.pos, "a parenthesized rule", "an atom")),
        }
    }

    pub fn list(&self) -> Result<&[Sexp], ParseError> {
        match &self.kind {
            SexpKind::List(items) => Ok(items),
            _ => Err(ParseError::syntax(self.pos, "a list", "an atom")),
        }
    }
}

/// A rule application `(head args...)`.
pub struct Form<'a> {
    pub head: &'a str,
    pub args: &'a [Sexp],
    pub pos: Pos,
}

impl Form<'_> {
    pub fn arity(&self, n: usize) -> Result<(), ParseError> {
        if self.args.len() == n {
            Ok(())
        } else {
            Err(ParseError::other(
                self.pos,
                format!("`{}` takes {n} arguments, found {}", self.head, self.args.len()),
            ))
        }
    }
}

/// Structural nodes shared by the sequent and natural-deduction formats.
/// Returns `None` if `f` is not structural; on success the last argument is
/// the premise.
pub fn structural_from_form(f: &Form<'_>) -> Result<Option<Structural>, ParseError> {
    let s = match f.head {
        "weak" => {
            f.arity(3)?;
            Structural::Weak {
                var: f.args[0].var()?,
                pos: f.args[1].num()?,
            }
        }
        "mobL" | "mobR" | "contrL" | "contrR" => {
            f.arity(3)?;
            let (a, b) = (f.args[0].num()?, f.args[1].num()?);
            match f.head {
                "mobL" => Structural::MobL { from: a, to: b },
                "mobR" => Structural::MobR { from: a, to: b },
                "contrL" => Structural::ContrL { first: a, second: b },
                _ => Structural::ContrR { first: a, second: b },
            }
        }
        _ => return Ok(None),
    };
    Ok(Some(s))
}

/// Converts an s-expression into a sequent derivation.
pub fn seq_deriv_from_sexp(sig: &Signature, s: &Sexp) -> Result<SeqDeriv, ParseError> {
    let f = s.form()?;
    let a = f.args;
    let d = |i: usize| seq_deriv_from_sexp(sig, &a[i]);
    if let Some(st) = structural_from_form(&f)? {
        return Ok(SeqDeriv::unary(SeqRule::Struct(st), d(2)?));
    }
    let node = match f.head {
        "id" => {
            f.arity(1)?;
            SeqDeriv::leaf(SeqRule::Id { x: a[0].var_ref()? })
        }
        "cut" => {
            f.arity(6)?;
            SeqDeriv::new(
                SeqRule::Cut {
                    lo: a[0].num()?,
                    hi: a[1].num()?,
                    var: a[2].var()?,
                    prop: a[3].prop(sig)?,
                },
                vec![d(4)?, d(5)?],
            )
        }
        "oneR" => {
            f.arity(0)?;
            SeqDeriv::leaf(SeqRule::OneR)
        }
        "oneL" => {
            f.arity(2)?;
            SeqDeriv::unary(SeqRule::OneL { x: a[0].var_ref()? }, d(1)?)
        }
        "fuseR" => {
            f.arity(3)?;
            SeqDeriv::new(SeqRule::FuseR { split: a[0].num()? }, vec![d(1)?, d(2)?])
        }
        "fuseL" => {
            f.arity(4)?;
            SeqDeriv::unary(
                SeqRule::FuseL {
                    x: a[0].var_ref()?,
                    left: a[1].var()?,
                    right: a[2].var()?,
                },
                d(3)?,
            )
        }
        "plusR1" | "plusR2" | "upR" | "downR" => {
            f.arity(1)?;
            let r = match f.head {
                "plusR1" => SeqRule::PlusR1,
                "plusR2" => SeqRule::PlusR2,
                "upR" => SeqRule::UpR,
                _ => SeqRule::DownR,
            };
            SeqDeriv::unary(r, d(0)?)
        }
        "plusL" => {
            f.arity(4)?;
            SeqDeriv::new(
                SeqRule::PlusL {
                    x: a[0].var_ref()?,
                    y: a[1].var()?,
                },
                vec![d(2)?, d(3)?],
            )
        }
        "withR" => {
            f.arity(2)?;
            SeqDeriv::new(SeqRule::WithR, vec![d(0)?, d(1)?])
        }
        "withL1" | "withL2" | "upL" | "downL" => {
            f.arity(3)?;
            let (x, y) = (a[0].var_ref()?, a[1].var()?);
            let r = match f.head {
                "withL1" => SeqRule::WithL1 { x, y },
                "withL2" => SeqRule::WithL2 { x, y },
                "upL" => SeqRule::UpL { x, y },
                _ => SeqRule::DownL { x, y },
            };
            SeqDeriv::unary(r, d(2)?)
        }
        "impRr" | "impRl" => {
            f.arity(2)?;
            let x = a[0].var()?;
            let r = if f.head == "impRr" {
                SeqRule::RightImpR { x }
            } else {
                SeqRule::LeftImpR { x }
            };
            SeqDeriv::unary(r, d(1)?)
        }
        "impLr" | "impLl" => {
            f.arity(5)?;
            let (fv, split, y) = (a[0].var_ref()?, a[1].num()?, a[3].var()?);
            let r = if f.head == "impLr" {
                SeqRule::RightImpL { f: fv, split, y }
            } else {
                SeqRule::LeftImpL { f: fv, split, y }
            };
            SeqDeriv::new(r, vec![d(2)?, d(4)?])
        }
        other => {
            return Err(ParseError::syntax(
                f.pos,
                "a sequent rule",
                format!("`{other}`"),
            ))
        }
    };
    Ok(node)
}

pub fn parse_seq_deriv(sig: &Signature, src: &str) -> Result<SeqDeriv, ParseError> {
    seq_deriv_from_sexp(sig, &parse_sexp(src)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modes::ModeTheory;

    fn lnl() -> Signature {
        Signature::new(ModeTheory::lnl())
            .with_atom("P", "L")
            .with_atom("Q", "L")
            .with_atom("A", "L")
            .with_atom("B", "L")
            .with_atom("X", "U")
    }

    #[test]
    fn precedence_and_associativity() {
        let sig = lnl();
        let t = &sig.theory;
        let p = parse_prop(&sig, "P >-> Q").unwrap();
        assert!(matches!(p, Prop::LeftImp(..)));
        let p = parse_prop(&sig, "A ->> B ->> A * B").unwrap();
        let Prop::RightImp(_, r) = &p else { panic!() };
        assert!(matches!(**r, Prop::RightImp(..)));
        assert_eq!(p.display(t).to_string(), "A ->> B ->> A * B");
        let p = parse_prop(&sig, "A * B * P").unwrap();
        let Prop::Fuse(l, _) = &p else { panic!() };
        assert!(matches!(**l, Prop::Fuse(..)));
        let p = parse_prop(&sig, "A & B + P * Q").unwrap();
        let Prop::Plus(l, r) = &p else { panic!() };
        assert!(matches!(**l, Prop::With(..)));
        assert!(matches!(**r, Prop::Fuse(..)));
    }

    #[test]
    fn bang_encoding() {
        let sig = lnl();
        let p = parse_prop(&sig, "down[L] up[U] P").unwrap();
        let (u, l) = (sig.mode("U").unwrap(), sig.mode("L").unwrap());
        assert_eq!(p, Prop::down(l, Prop::up(u, Prop::atom("P", l))));
        assert_eq!(p.mode(), l);
    }

    #[test]
    fn errors_carry_positions() {
        let sig = lnl();
        let e = parse_prop(&sig, "(A * B").unwrap_err();
        assert_eq!(e.pos, Pos { line: 1, col: 7 });
        assert!(matches!(e.kind, ParseErrorKind::Syntax { .. }));
        let e = parse_prop(&sig, "A * Z").unwrap_err();
        assert_eq!(e.pos.col, 5);
        assert!(matches!(e.kind, ParseErrorKind::Prop(PropError::UnknownAtom(_))));
        let e = parse_prop(&sig, "up[L] X").unwrap_err();
        assert!(matches!(e.kind, ParseErrorKind::Prop(PropError::ShiftViolation { .. })));
        let e = parse_prop(&sig, "A * X").unwrap_err();
        assert!(matches!(e.kind, ParseErrorKind::Prop(PropError::ModeMismatch { .. })));
    }

    #[test]
    fn contexts_and_sequents() {
        let sig = lnl();
        let s = parse_sequent(&sig, "(x : A) (y : B ->> A) |- A * 1[L]").unwrap();
        assert_eq!(s.ctx.len(), 2);
        assert_eq!(s.ctx.display(&sig.theory).to_string(), "(x : A) (y : B ->> A)");
        assert!(parse_ctx(&sig, ".").unwrap().is_empty());
        assert!(parse_ctx(&sig, "").is_err());
    }

    #[test]
    fn sexp_reader() {
        let s = parse_sexp("(cut 0 1 x [A * (B)] (id y) % note\n (id x))").unwrap();
        let items = s.list().unwrap();
        assert_eq!(items.len(), 7);
        assert_eq!(items[4].kind, SexpKind::Raw("A * (B)".into()));
        assert_eq!(items[6].pos, Pos { line: 2, col: 2 });
        assert!(parse_sexp("(id x").is_err());
        assert!(parse_sexp("(id x))").is_err());
    }

    #[test]
    fn seq_derivations_roundtrip() {
        let sig = lnl();
        let srcs = [
            "(id x)",
            "(cut 0 1 z [A ->> B] (id x) (id z))",
            "(impLr f 1 (id a) y (id y))",
            "(fuseL x#1 a b (fuseR 1 (id a) (id b)))",
            "(weak u 0 (contrL 0 2 (mobR 1 3 (oneR))))",
            "(plusL p y (plusR2 (id y)) (plusR1 (id y)))",
        ];
        for src in srcs {
            let d = parse_seq_deriv(&sig, src).unwrap();
            assert_eq!(d.to_sexp(&sig.theory), src);
        }
        let e = parse_seq_deriv(&sig, "(fuseR x (id a) (id b))").unwrap_err();
        assert_eq!(e.pos.col, 8);
        assert!(parse_seq_deriv(&sig, "(frob x)").is_err());
    }
}
