//! A small expression language in `x` and `u`.
//!
//! Grammar: `+ - * / ^`, unary minus, `sin cos exp`, numeric literals,
//! `pi`, and the variables `x`, `u`. `^` binds tighter than unary minus
//! and is right-associative.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Const(f64),
    X,
    U,
    Neg(Arc<Node>),
    Add(Arc<Node>, Arc<Node>),
    Sub(Arc<Node>, Arc<Node>),
    Mul(Arc<Node>, Arc<Node>),
    Div(Arc<Node>, Arc<Node>),
    Pow(Arc<Node>, Arc<Node>),
    Sin(Arc<Node>),
    Cos(Arc<Node>),
    Exp(Arc<Node>),
    /// Only produced by differentiation of `a^b` with `b` depending on `u`.
    Ln(Arc<Node>),
}

/// A parsed expression together with its source text and a compiled
/// postfix program used for evaluation.
#[derive(Debug, Clone)]
pub struct Expr {
    src: String,
    root: Arc<Node>,
    prog: Arc<[Op]>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Op {
    Const(f64),
    X,
    U,
    Neg,
    Add,
    Sub,
    Mul,
    Div,
    Powi(i32),
    Pow,
    Sin,
    Cos,
    Exp,
    Ln,
}

const STACK: usize = 32;

fn compile(node: &Node, out: &mut Vec<Op>) {
    match node {
        Node::Const(c) => out.push(Op::Const(*c)),
        Node::X => out.push(Op::X),
        Node::U => out.push(Op::U),
        Node::Neg(a) => {
            compile(a, out);
            out.push(Op::Neg);
        }
        Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
            compile(a, out);
            compile(b, out);
            out.push(match node {
                Node::Add(..) => Op::Add,
                Node::Sub(..) => Op::Sub,
                Node::Mul(..) => Op::Mul,
                _ => Op::Div,
            });
        }
        Node::Pow(a, b) => {
            compile(a, out);
            match b.as_ref() {
                Node::Const(e) if e.fract() == 0.0 && e.abs() < 64.0 => {
                    out.push(Op::Powi(*e as i32))
                }
                _ => {
                    compile(b, out);
                    out.push(Op::Pow);
                }
            }
        }
        Node::Sin(a) | Node::Cos(a) | Node::Exp(a) | Node::Ln(a) => {
            compile(a, out);
            out.push(match node {
                Node::Sin(_) => Op::Sin,
                Node::Cos(_) => Op::Cos,
                Node::Exp(_) => Op::Exp,
                _ => Op::Ln,
            });
        }
    }
}

/// Maximum stack depth of a postfix program.
fn depth(prog: &[Op]) -> usize {
    let mut d: isize = 0;
    let mut max = 0;
    for op in prog {
        d += match op {
            Op::Const(_) | Op::X | Op::U => 1,
            Op::Add | Op::Sub | Op::Mul | Op::Div | Op::Pow => -1,
            _ => 0,
        };
        max = max.max(d);
    }
    max as usize
}

fn run(prog: &[Op], x: f64, u: f64) -> f64 {
    let mut st = [0.0f64; STACK];
    let mut sp = 0usize;
    for op in prog {
        match *op {
            Op::Const(c) => {
                st[sp] = c;
                sp += 1;
            }
            Op::X => {
                st[sp] = x;
                sp += 1;
            }
            Op::U => {
                st[sp] = u;
                sp += 1;
            }
            Op::Neg => st[sp - 1] = -st[sp - 1],
            Op::Add => {
                sp -= 1;
                st[sp - 1] += st[sp];
            }
            Op::Sub => {
                sp -= 1;
                st[sp - 1] -= st[sp];
            }
            Op::Mul => {
                sp -= 1;
                st[sp - 1] *= st[sp];
            }
            Op::Div => {
                sp -= 1;
                st[sp - 1] /= st[sp];
            }
            Op::Powi(e) => st[sp - 1] = st[sp - 1].powi(e),
            Op::Pow => {
                sp -= 1;
                st[sp - 1] = st[sp - 1].powf(st[sp]);
            }
            Op::Sin => st[sp - 1] = st[sp - 1].sin(),
            Op::Cos => st[sp - 1] = st[sp - 1].cos(),
            Op::Exp => st[sp - 1] = st[sp - 1].exp(),
            Op::Ln => st[sp - 1] = st[sp - 1].ln(),
        }
    }
    st[0]
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        self.root == other.root
    }
}

impl Expr {
    pub fn parse(src: &str) -> Result<Self> {
        let tokens = lex(src)?;
        let mut p = Parser {
            toks: &tokens,
            pos: 0,
            src,
        };
        let root = p.expr()?;
        if p.pos != tokens.len() {
            return Err(p.err(format!("unexpected token {:?}", tokens[p.pos])));
        }
        Self::build(src.to_string(), root)
    }

    pub fn constant(c: f64) -> Self {
        Self::build(format!("{c}"), Arc::new(Node::Const(c))).expect("constant")
    }

    fn build(src: String, root: Arc<Node>) -> Result<Self> {
        let mut prog = Vec::new();
        compile(&root, &mut prog);
        if depth(&prog) > STACK {
            return Err(Error::Expr {
                src,
                msg: format!("nesting deeper than {STACK}"),
            });
        }
        Ok(Self {
            src,
            root,
            prog: prog.into(),
        })
    }

    fn from_node(root: Arc<Node>) -> Self {
        let src = root.to_string();
        match Self::build(src, root.clone()) {
            Ok(e) => e,
            // Derivatives of very deep expressions fall back to tree evaluation.
            Err(_) => Self {
                src: root.to_string(),
                root,
                prog: Arc::from(Vec::new()),
            },
        }
    }

    pub fn source(&self) -> &str {
        &self.src
    }

    pub fn node(&self) -> &Node {
        &self.root
    }

    #[inline]
    pub fn eval(&self, x: f64, u: f64) -> f64 {
        if self.prog.is_empty() {
            self.root.eval(x, u)
        } else {
            run(&self.prog, x, u)
        }
    }

    pub fn depends_on_x(&self) -> bool {
        self.root.has(&Node::X)
    }

    pub fn depends_on_u(&self) -> bool {
        self.root.has(&Node::U)
    }

    /// The expression at a fixed `x`, with constant subtrees folded.
    pub fn at_x(&self, x: f64) -> Self {
        Self::from_node(self.root.fix_x(x))
    }

    /// Symbolic partial derivative with respect to `u`.
    pub fn diff_u(&self) -> Self {
        Self::from_node(self.root.diff_u())
    }
}

impl Node {
    pub fn eval(&self, x: f64, u: f64) -> f64 {
        match self {
            Node::Const(c) => *c,
            Node::X => x,
            Node::U => u,
            Node::Neg(a) => -a.eval(x, u),
            Node::Add(a, b) => a.eval(x, u) + b.eval(x, u),
            Node::Sub(a, b) => a.eval(x, u) - b.eval(x, u),
            Node::Mul(a, b) => a.eval(x, u) * b.eval(x, u),
            Node::Div(a, b) => a.eval(x, u) / b.eval(x, u),
            Node::Pow(a, b) => {
                let base = a.eval(x, u);
                match b.as_ref() {
                    Node::Const(e) if *e == 2.0 => base * base,
                    Node::Const(e) if *e == 3.0 => base * base * base,
                    Node::Const(e) if e.fract() == 0.0 && e.abs() < 64.0 => base.powi(*e as i32),
                    _ => base.powf(b.eval(x, u)),
                }
            }
            Node::Sin(a) => a.eval(x, u).sin(),
            Node::Cos(a) => a.eval(x, u).cos(),
            Node::Exp(a) => a.eval(x, u).exp(),
            Node::Ln(a) => a.eval(x, u).ln(),
        }
    }

    fn has(&self, var: &Node) -> bool {
        match self {
            Node::Const(_) => false,
            Node::X | Node::U => self == var,
            Node::Neg(a) | Node::Sin(a) | Node::Cos(a) | Node::Exp(a) | Node::Ln(a) => a.has(var),
            Node::Add(a, b)
            | Node::Sub(a, b)
            | Node::Mul(a, b)
            | Node::Div(a, b)
            | Node::Pow(a, b) => a.has(var) || b.has(var),
        }
    }

    fn diff_u(&self) -> Arc<Node> {
        use Node::*;
        match self {
            Const(_) | X => konst(0.0),
            U => konst(1.0),
            Neg(a) => neg(a.diff_u()),
            Add(a, b) => add(a.diff_u(), b.diff_u()),
            Sub(a, b) => sub(a.diff_u(), b.diff_u()),
            Mul(a, b) => add(mul(a.diff_u(), b.clone()), mul(a.clone(), b.diff_u())),
            Div(a, b) => div(
                sub(mul(a.diff_u(), b.clone()), mul(a.clone(), b.diff_u())),
                pow(b.clone(), konst(2.0)),
            ),
            Pow(a, b) => {
                if !b.has(&U) {
                    // b a^(b-1) a'
                    let e = match b.as_ref() {
                        Const(c) => konst(c - 1.0),
                        _ => sub(b.clone(), konst(1.0)),
                    };
                    mul(mul(b.clone(), pow(a.clone(), e)), a.diff_u())
                } else {
                    // a^b (b' ln a + b a'/a)
                    let inner = add(
                        mul(b.diff_u(), Arc::new(Ln(a.clone()))),
                        div(mul(b.clone(), a.diff_u()), a.clone()),
                    );
                    mul(Arc::new(self.clone()), inner)
                }
            }
            Sin(a) => mul(Arc::new(Cos(a.clone())), a.diff_u()),
            Cos(a) => neg(mul(Arc::new(Sin(a.clone())), a.diff_u())),
            Exp(a) => mul(Arc::new(self.clone()), a.diff_u()),
            Ln(a) => div(a.diff_u(), a.clone()),
        }
    }

    /// The tree with `x` replaced by a constant and constant subtrees folded.
    fn fix_x(&self, x: f64) -> Arc<Node> {
        use Node::*;
        let unary = |a: &Arc<Node>, f: fn(f64) -> f64, wrap: fn(Arc<Node>) -> Node| {
            let a = a.fix_x(x);
            match a.as_const() {
                Some(c) => konst(f(c)),
                None => Arc::new(wrap(a)),
            }
        };
        match self {
            Const(c) => konst(*c),
            X => konst(x),
            U => Arc::new(U),
            Neg(a) => neg(a.fix_x(x)),
            Add(a, b) => add(a.fix_x(x), b.fix_x(x)),
            Sub(a, b) => sub(a.fix_x(x), b.fix_x(x)),
            Mul(a, b) => mul(a.fix_x(x), b.fix_x(x)),
            Div(a, b) => {
                let (a, b) = (a.fix_x(x), b.fix_x(x));
                match (a.as_const(), b.as_const()) {
                    (Some(p), Some(q)) => konst(p / q),
                    _ => div(a, b),
                }
            }
            Pow(a, b) => {
                let (a, b) = (a.fix_x(x), b.fix_x(x));
                match (a.as_const(), b.as_const()) {
                    (Some(_), Some(_)) => konst(Node::Pow(a, b).eval(0.0, 0.0)),
                    _ => pow(a, b),
                }
            }
            Sin(a) => unary(a, f64::sin, Sin),
            Cos(a) => unary(a, f64::cos, Cos),
            Exp(a) => unary(a, f64::exp, Exp),
            Ln(a) => unary(a, f64::ln, Ln),
        }
    }

    fn as_const(&self) -> Option<f64> {
        match self {
            Node::Const(c) => Some(*c),
            _ => None,
        }
    }
}

fn konst(c: f64) -> Arc<Node> {
    Arc::new(Node::Const(c))
}

fn neg(a: Arc<Node>) -> Arc<Node> {
    match a.as_const() {
        Some(c) => konst(-c),
        None => Arc::new(Node::Neg(a)),
    }
}

fn add(a: Arc<Node>, b: Arc<Node>) -> Arc<Node> {
    match (a.as_const(), b.as_const()) {
        (Some(x), Some(y)) => konst(x + y),
        (Some(0.0), None) => b,
        (None, Some(0.0)) => a,
        _ => Arc::new(Node::Add(a, b)),
    }
}

fn sub(a: Arc<Node>, b: Arc<Node>) -> Arc<Node> {
    match (a.as_const(), b.as_const()) {
        (Some(x), Some(y)) => konst(x - y),
        (Some(0.0), None) => neg(b),
        (None, Some(0.0)) => a,
        _ => Arc::new(Node::Sub(a, b)),
    }
}

fn mul(a: Arc<Node>, b: Arc<Node>) -> Arc<Node> {
    match (a.as_const(), b.as_const()) {
        (Some(x), Some(y)) => konst(x * y),
        (Some(0.0), _) | (_, Some(0.0)) => konst(0.0),
        (Some(1.0), None) => b,
        (None, Some(1.0)) => a,
        _ => Arc::new(Node::Mul(a, b)),
    }
}

fn div(a: Arc<Node>, b: Arc<Node>) -> Arc<Node> {
    match (a.as_const(), b.as_const()) {
        (Some(0.0), _) => konst(0.0),
        (_, Some(1.0)) => a,
        _ => Arc::new(Node::Div(a, b)),
    }
}

fn pow(a: Arc<Node>, b: Arc<Node>) -> Arc<Node> {
    match b.as_const() {
        Some(0.0) => konst(1.0),
        Some(1.0) => a,
        _ => Arc::new(Node::Pow(a, b)),
    }
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Const(c) => {
                if *c < 0.0 {
                    write!(f, "({c})")
                } else {
                    write!(f, "{c}")
                }
            }
            Node::X => write!(f, "x"),
            Node::U => write!(f, "u"),
            Node::Neg(a) => write!(f, "(-{a})"),
            Node::Add(a, b) => write!(f, "({a}+{b})"),
            Node::Sub(a, b) => write!(f, "({a}-{b})"),
            Node::Mul(a, b) => write!(f, "({a}*{b})"),
            Node::Div(a, b) => write!(f, "({a}/{b})"),
            Node::Pow(a, b) => write!(f, "({a}^{b})"),
            Node::Sin(a) => write!(f, "sin({a})"),
            Node::Cos(a) => write!(f, "cos({a})"),
            Node::Exp(a) => write!(f, "exp({a})"),
            Node::Ln(a) => write!(f, "ln({a})"),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.src)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
}

fn lex(src: &str) -> Result<Vec<Tok>> {
    let err = |msg: String| Error::Expr {
        src: src.to_string(),
        msg,
    };
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            ' ' | '\t' | '\n' => i += 1,
            '0'..='9' | '.' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                    i += 1;
                }
                if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                    let mut j = i + 1;
                    if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                        j += 1;
                    }
                    if j < chars.len() && chars[j].is_ascii_digit() {
                        i = j;
                        while i < chars.len() && chars[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let text: String = chars[start..i].iter().collect();
                let v: f64 = text
                    .parse()
                    .map_err(|_| err(format!("bad number {text:?}")))?;
                out.push(Tok::Num(v));
            }
            'a'..='z' | 'A'..='Z' | '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                out.push(Tok::Ident(chars[start..i].iter().collect()));
            }
            '+' | '-' | '*' | '/' | '^' => {
                out.push(Tok::Op(c));
                i += 1;
            }
            '\u{2212}' => {
                out.push(Tok::Op('-'));
                i += 1;
            }
            '\u{00d7}' => {
                out.push(Tok::Op('*'));
                i += 1;
            }
            '(' => {
                out.push(Tok::LParen);
                i += 1;
            }
            ')' => {
                out.push(Tok::RParen);
                i += 1;
            }
            other => return Err(err(format!("unexpected character {other:?}"))),
        }
    }
    if out.is_empty() {
        return Err(err("empty expression".into()));
    }
    Ok(out)
}

struct Parser<'a> {
    toks: &'a [Tok],
    pos: usize,
    src: &'a str,
}

impl Parser<'_> {
    fn err(&self, msg: String) -> Error {
        Error::Expr {
            src: self.src.to_string(),
            msg,
        }
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn expr(&mut self) -> Result<Arc<Node>> {
        let mut lhs = self.term()?;
        while let Some(Tok::Op(op @ ('+' | '-'))) = self.peek() {
            let op = *op;
            self.pos += 1;
            let rhs = self.term()?;
            lhs = Arc::new(if op == '+' {
                Node::Add(lhs, rhs)
            } else {
                Node::Sub(lhs, rhs)
            });
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Arc<Node>> {
        let mut lhs = self.unary()?;
        while let Some(Tok::Op(op @ ('*' | '/'))) = self.peek() {
            let op = *op;
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = Arc::new(if op == '*' {
                Node::Mul(lhs, rhs)
            } else {
                Node::Div(lhs, rhs)
            });
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Arc<Node>> {
        match self.peek() {
            Some(Tok::Op('-')) => {
                self.pos += 1;
                Ok(Arc::new(Node::Neg(self.unary()?)))
            }
            Some(Tok::Op('+')) => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Arc<Node>> {
        let base = self.atom()?;
        if let Some(Tok::Op('^')) = self.peek() {
            self.pos += 1;
            let exp = self.unary()?;
            return Ok(Arc::new(Node::Pow(base, exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Arc<Node>> {
        let tok = self
            .peek()
            .cloned()
            .ok_or_else(|| self.err("unexpected end of input".into()))?;
        self.pos += 1;
        match tok {
            Tok::Num(v) => Ok(konst(v)),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect_rparen()?;
                Ok(e)
            }
            Tok::Ident(name) => match name.as_str() {
                "x" => Ok(Arc::new(Node::X)),
                "u" => Ok(Arc::new(Node::U)),
                "pi" => Ok(konst(std::f64::consts::PI)),
                "sin" | "cos" | "exp" => {
                    if self.peek() != Some(&Tok::LParen) {
                        return Err(self.err(format!("{name} needs a parenthesised argument")));
                    }
                    self.pos += 1;
                    let arg = self.expr()?;
                    self.expect_rparen()?;
                    Ok(Arc::new(match name.as_str() {
                        "sin" => Node::Sin(arg),
                        "cos" => Node::Cos(arg),
                        _ => Node::Exp(arg),
                    }))
                }
                other => Err(self.err(format!("unknown identifier {other:?}"))),
            },
            other => Err(self.err(format!("unexpected token {other:?}"))),
        }
    }

    fn expect_rparen(&mut self) -> Result<()> {
        if self.peek() == Some(&Tok::RParen) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err("missing ')'".into()))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(s: &str, x: f64, u: f64) -> f64 {
        Expr::parse(s).unwrap().eval(x, u)
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(ev("1+2*3", 0.0, 0.0), 7.0);
        assert_eq!(ev("2^3^2", 0.0, 0.0), 512.0);
        assert_eq!(ev("-2^2", 0.0, 0.0), -4.0);
        assert_eq!(ev("(1-u)*u", 0.0, 0.25), 0.1875);
        assert_eq!(ev("8/2/2", 0.0, 0.0), 2.0);
        assert!((ev("1+0.05*sin(2*pi*x)", 0.25, 0.0) - 1.05).abs() < 1e-15);
        assert_eq!(ev("2e-1*u", 0.0, 10.0), 2.0);
    }

    #[test]
    fn unicode_operators() {
        assert_eq!(ev("3\u{2212}2\u{00d7}u", 0.0, 1.0), 1.0);
    }

    #[test]
    fn errors() {
        for bad in ["", "1+", "sin x", "foo", "(1", "1 $ 2", "u ln"] {
            assert!(Expr::parse(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn derivatives_match_differences() {
        let exprs = [
            "u*(1-u)",
            "u^3*(1+0.5*sin(2*pi*x))",
            "exp(-u)*cos(u*x)",
            "u/(1+u^2)",
            "u^u",
            "-u^2.5",
        ];
        for s in exprs {
            let e = Expr::parse(s).unwrap();
            let d = e.diff_u();
            for &(x, u) in &[(0.1, 0.3), (0.7, 1.2), (0.0, 2.0)] {
                let h = 1e-6;
                let fd = (e.eval(x, u + h) - e.eval(x, u - h)) / (2.0 * h);
                assert!(
                    (fd - d.eval(x, u)).abs() < 1e-6 * (1.0 + fd.abs()),
                    "{s} at {u}: {fd} vs {}",
                    d.eval(x, u)
                );
            }
        }
    }

    #[test]
    fn program_matches_tree() {
        for src in [
            "u*(u-0.2)*(1+0.05*cos(2*pi*x))",
            "-u^2.5/(1+exp(-x))",
            "2^-u",
            "sin(u)^3",
        ] {
            let e = Expr::parse(src).unwrap();
            for &(x, u) in &[(0.2, 0.4), (1.3, 2.2)] {
                assert_eq!(e.eval(x, u), e.node().eval(x, u), "{src}");
            }
        }
    }

    #[test]
    fn deep_nesting_is_rejected() {
        let deep = format!("{}u{}", "(".repeat(40), "+1)".repeat(40));
        assert!(Expr::parse(&deep).is_ok());
        let deep_right = format!("{}1{}", "u*(".repeat(40), ")".repeat(40));
        assert!(Expr::parse(&deep_right).is_err());
    }

    #[test]
    fn fixing_x_folds_constants() {
        let e = Expr::parse("(1 + 0.5*cos(2*pi*x))*u*(u - 0.2)").unwrap();
        for &x in &[0.0, 0.3, 0.77] {
            let f = e.at_x(x);
            assert!(!f.depends_on_x());
            for &u in &[0.0, 0.1, 0.9] {
                assert!((f.eval(9.0, u) - e.eval(x, u)).abs() < 1e-15);
            }
        }
        assert_eq!(
            Expr::parse("sin(x)^2").unwrap().at_x(1.0).node().as_const(),
            Some(1f64.sin().powi(2))
        );
    }

    #[test]
    fn variable_dependence() {
        assert!(!Expr::parse("u*(1-u)").unwrap().depends_on_x());
        assert!(Expr::parse("1+sin(x)").unwrap().depends_on_x());
        assert!(!Expr::parse("1").unwrap().depends_on_u());
    }

    #[test]
    fn display_roundtrip_of_derivative() {
        let d = Expr::parse("u^2*sin(x)").unwrap().diff_u();
        let back = Expr::parse(d.source()).unwrap();
        assert!((back.eval(0.3, 0.6) - d.eval(0.3, 0.6)).abs() < 1e-15);
    }
}
