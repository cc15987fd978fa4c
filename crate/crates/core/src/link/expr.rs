//! Linear-ish integer expressions over case unknowns, with exact and
//! interval evaluation.

use std::fmt;

use crate::arith::Rational;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    Const(Rational),
    Var(usize),
    Alpha,
    Qhat,
    Floor,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Cmp {
    Eq,
    Ge,
    Le,
}

impl fmt::Display for Cmp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Cmp::Eq => "=",
            Cmp::Ge => ">=",
            Cmp::Le => "<=",
        })
    }
}

/// `lhs cmp rhs`, stored as `lhs - rhs cmp 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Relation {
    pub text: String,
    pub cmp: Cmp,
    pub diff: Expr,
}

/// Values the symbols of an expression range over.
pub struct Env<'a> {
    /// Values of the first `assigned.len()` unknowns.
    pub assigned: &'a [i64],
    /// Declared `[min, max]` of every unknown.
    pub bounds: &'a [(i64, i64)],
    pub alpha: Rational,
    pub qhat: i64,
    pub floor: Option<i64>,
}

type Interval = (Rational, Rational);

impl Expr {
    /// Exact value; every referenced unknown must be assigned.
    pub fn eval(&self, env: &Env) -> Rational {
        let (lo, hi) = self.interval(env);
        debug_assert_eq!(lo, hi);
        lo
    }

    /// An enclosure of the values over all completions of `env`.
    pub fn interval(&self, env: &Env) -> Interval {
        let point = |x: Rational| (x, x);
        match self {
            Expr::Const(c) => point(*c),
            Expr::Var(i) => match env.assigned.get(*i) {
                Some(&v) => point(Rational::from(v)),
                None => (
                    Rational::from(env.bounds[*i].0),
                    Rational::from(env.bounds[*i].1),
                ),
            },
            Expr::Alpha => point(env.alpha),
            Expr::Qhat => point(Rational::from(env.qhat)),
            Expr::Floor => point(Rational::from(env.floor.expect("validated case"))),
            Expr::Neg(a) => {
                let (lo, hi) = a.interval(env);
                (-hi, -lo)
            }
            Expr::Add(a, b) => {
                let (a0, a1) = a.interval(env);
                let (b0, b1) = b.interval(env);
                (a0 + b0, a1 + b1)
            }
            Expr::Sub(a, b) => {
                let (a0, a1) = a.interval(env);
                let (b0, b1) = b.interval(env);
                (a0 - b1, a1 - b0)
            }
            Expr::Mul(a, b) => {
                let (a0, a1) = a.interval(env);
                let (b0, b1) = b.interval(env);
                let p = [a0 * b0, a0 * b1, a1 * b0, a1 * b1];
                (*p.iter().min().unwrap(), *p.iter().max().unwrap())
            }
        }
    }

    pub fn uses_floor(&self) -> bool {
        match self {
            Expr::Floor => true,
            Expr::Neg(a) => a.uses_floor(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) => a.uses_floor() || b.uses_floor(),
            _ => false,
        }
    }
}

impl Relation {
    pub fn holds(&self, env: &Env) -> bool {
        let v = self.diff.eval(env);
        match self.cmp {
            Cmp::Eq => v.is_zero(),
            Cmp::Ge => !v.is_negative(),
            Cmp::Le => !v.is_positive(),
        }
    }

    /// False only if no completion of `env` can satisfy the relation.
    pub fn feasible(&self, env: &Env) -> bool {
        let (lo, hi) = self.diff.interval(env);
        match self.cmp {
            Cmp::Eq => !lo.is_positive() && !hi.is_negative(),
            Cmp::Ge => !hi.is_negative(),
            Cmp::Le => !lo.is_positive(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Num(i128),
    Ident(String),
    Op(char),
    Cmp(Cmp),
}

fn lex(s: &str) -> Result<Vec<Tok>> {
    let mut out = Vec::new();
    let mut chars = s.chars().peekable();
    while let Some(&c) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
        } else if c.is_ascii_digit() {
            let mut n = String::new();
            while let Some(&d) = chars.peek().filter(|d| d.is_ascii_digit()) {
                n.push(d);
                chars.next();
            }
            out.push(Tok::Num(
                n.parse()
                    .map_err(|_| Error::Parse(format!("number {n} too large")))?,
            ));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let mut id = String::new();
            while let Some(&d) = chars
                .peek()
                .filter(|d| d.is_ascii_alphanumeric() || **d == '_')
            {
                id.push(d);
                chars.next();
            }
            out.push(Tok::Ident(id));
        } else if "+-*()".contains(c) {
            out.push(Tok::Op(c));
            chars.next();
        } else if c == '=' {
            out.push(Tok::Cmp(Cmp::Eq));
            chars.next();
        } else if c == '>' || c == '<' {
            chars.next();
            if chars.next() != Some('=') {
                return Err(Error::Parse(format!("expected '=' after '{c}' in {s:?}")));
            }
            out.push(Tok::Cmp(if c == '>' { Cmp::Ge } else { Cmp::Le }));
        } else {
            return Err(Error::Parse(format!("unexpected character {c:?} in {s:?}")));
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<Tok>,
    pos: usize,
    names: &'a [String],
    src: &'a str,
}

impl Parser<'_> {
    fn err(&self, what: &str) -> Error {
        Error::Parse(format!("{what} in {:?}", self.src))
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn eat_op(&mut self, op: char) -> bool {
        if self.peek() == Some(&Tok::Op(op)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut acc = self.term()?;
        loop {
            if self.eat_op('+') {
                acc = Expr::Add(Box::new(acc), Box::new(self.term()?));
            } else if self.eat_op('-') {
                acc = Expr::Sub(Box::new(acc), Box::new(self.term()?));
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut acc = self.factor()?;
        while self.eat_op('*') {
            acc = Expr::Mul(Box::new(acc), Box::new(self.factor()?));
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<Expr> {
        if self.eat_op('-') {
            return Ok(Expr::Neg(Box::new(self.factor()?)));
        }
        if self.eat_op('(') {
            let e = self.expr()?;
            if !self.eat_op(')') {
                return Err(self.err("missing ')'"));
            }
            return Ok(e);
        }
        let tok = self
            .peek()
            .cloned()
            .ok_or_else(|| self.err("unexpected end"))?;
        self.pos += 1;
        match tok {
            Tok::Num(n) => Ok(Expr::Const(Rational::new(n, 1))),
            Tok::Ident(id) => match id.as_str() {
                "alpha" => Ok(Expr::Alpha),
                "qhat" => Ok(Expr::Qhat),
                "m" => Ok(Expr::Floor),
                _ => self
                    .names
                    .iter()
                    .position(|n| *n == id)
                    .map(Expr::Var)
                    .ok_or_else(|| self.err(&format!("undeclared unknown {id:?}"))),
            },
            _ => Err(self.err("expected a term")),
        }
    }
}

/// Symbols with a fixed meaning that unknowns may not shadow.
pub const RESERVED: [&str; 3] = ["alpha", "qhat", "m"];

pub fn parse_expr(s: &str, names: &[String]) -> Result<Expr> {
    let mut p = Parser {
        toks: lex(s)?,
        pos: 0,
        names,
        src: s,
    };
    let e = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(p.err("trailing input"));
    }
    Ok(e)
}

pub fn parse_relation(s: &str, names: &[String]) -> Result<Relation> {
    let toks = lex(s)?;
    let cmps: Vec<usize> = toks
        .iter()
        .enumerate()
        .filter(|(_, t)| matches!(t, Tok::Cmp(_)))
        .map(|(i, _)| i)
        .collect();
    let [at] = cmps[..] else {
        return Err(Error::Parse(format!(
            "expected exactly one of =, >=, <= in {s:?}"
        )));
    };
    let Tok::Cmp(cmp) = toks[at] else {
        unreachable!()
    };
    let side = |toks: Vec<Tok>| -> Result<Expr> {
        let mut p = Parser {
            toks,
            pos: 0,
            names,
            src: s,
        };
        let e = p.expr()?;
        if p.pos != p.toks.len() {
            return Err(p.err("trailing input"));
        }
        Ok(e)
    };
    let lhs = side(toks[..at].to_vec())?;
    let rhs = side(toks[at + 1..].to_vec())?;
    Ok(Relation {
        text: s.trim().to_string(),
        cmp,
        diff: Expr::Sub(Box::new(lhs), Box::new(rhs)),
    })
}
