//! Unary and binary operators.
//!
//! Every operator is identified by a canonical printed lambda, e.g.
//! `(x, y) -> max(x / 0.85, y)`. Builtins are ordinary operators whose
//! canonical form happens to be known up front; parsing a lambda that prints
//! to a builtin's form yields that builtin. The registry hands out one shared
//! definition (and one stable id) per canonical form.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};
use crate::types::{Elem, Scalar};
use crate::with_value_kind;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BuiltinUnary {
    Identity,
    Abs,
    Neg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BuiltinBinary {
    Plus,
    Minus,
    Times,
    Div,
    Min,
    Max,
    First,
    Second,
    AbsDiff,
}

impl BuiltinUnary {
    const ALL: [BuiltinUnary; 3] = [BuiltinUnary::Identity, BuiltinUnary::Abs, BuiltinUnary::Neg];

    fn canonical(self) -> &'static str {
        match self {
            BuiltinUnary::Identity => "(x) -> x",
            BuiltinUnary::Abs => "(x) -> abs(x)",
            BuiltinUnary::Neg => "(x) -> -x",
        }
    }

    #[inline]
    pub fn apply<T: Elem>(self, x: T) -> T {
        match self {
            BuiltinUnary::Identity => x,
            BuiltinUnary::Abs => x.abs_of(),
            BuiltinUnary::Neg => x.neg_of(),
        }
    }
}

impl BuiltinBinary {
    const ALL: [BuiltinBinary; 9] = [
        BuiltinBinary::Plus,
        BuiltinBinary::Minus,
        BuiltinBinary::Times,
        BuiltinBinary::Div,
        BuiltinBinary::Min,
        BuiltinBinary::Max,
        BuiltinBinary::First,
        BuiltinBinary::Second,
        BuiltinBinary::AbsDiff,
    ];

    fn canonical(self) -> &'static str {
        match self {
            BuiltinBinary::Plus => "(x, y) -> x + y",
            BuiltinBinary::Minus => "(x, y) -> x - y",
            BuiltinBinary::Times => "(x, y) -> x * y",
            BuiltinBinary::Div => "(x, y) -> x / y",
            BuiltinBinary::Min => "(x, y) -> min(x, y)",
            BuiltinBinary::Max => "(x, y) -> max(x, y)",
            BuiltinBinary::First => "(x, y) -> x",
            BuiltinBinary::Second => "(x, y) -> y",
            BuiltinBinary::AbsDiff => "(x, y) -> abs(x - y)",
        }
    }

    #[inline]
    pub fn apply<T: Elem>(self, x: T, y: T) -> T {
        match self {
            BuiltinBinary::Plus => x.add(y),
            BuiltinBinary::Minus => x.sub(y),
            BuiltinBinary::Times => x.mul(y),
            BuiltinBinary::Div => x.div(y),
            BuiltinBinary::Min => x.min_of(y),
            BuiltinBinary::Max => x.max_of(y),
            BuiltinBinary::First => x,
            BuiltinBinary::Second => y,
            BuiltinBinary::AbsDiff => x.sub(y).abs_of(),
        }
    }
}

// ---------------------------------------------------------------------------
// Expression language
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Arith {
    Add,
    Sub,
    Mul,
    Div,
}

impl Arith {
    fn symbol(self) -> &'static str {
        match self {
            Arith::Add => "+",
            Arith::Sub => "-",
            Arith::Mul => "*",
            Arith::Div => "/",
        }
    }

    fn precedence(self) -> u8 {
        match self {
            Arith::Add | Arith::Sub => 1,
            Arith::Mul | Arith::Div => 2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Func {
    Abs,
    Min,
    Max,
}

impl Func {
    fn from_name(name: &str) -> Option<Func> {
        match name {
            "abs" => Some(Func::Abs),
            "min" => Some(Func::Min),
            "max" => Some(Func::Max),
            _ => None,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Func::Abs => "abs",
            Func::Min => "min",
            Func::Max => "max",
        }
    }

    fn arity(self) -> usize {
        match self {
            Func::Abs => 1,
            Func::Min | Func::Max => 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Ast {
    /// Parameter by position.
    Var(usize),
    Lit(f64),
    Neg(Box<Ast>),
    Bin(Arith, Box<Ast>, Box<Ast>),
    Call(Func, Vec<Ast>),
}

impl Ast {
    fn eval<T: Elem>(&self, args: &[T; 2]) -> T {
        match self {
            Ast::Var(i) => args[*i],
            Ast::Lit(v) => T::from_f64(*v),
            Ast::Neg(a) => a.eval(args).neg_of(),
            Ast::Bin(op, a, b) => {
                let (a, b) = (a.eval(args), b.eval(args));
                match op {
                    Arith::Add => a.add(b),
                    Arith::Sub => a.sub(b),
                    Arith::Mul => a.mul(b),
                    Arith::Div => a.div(b),
                }
            }
            Ast::Call(f, xs) => match f {
                Func::Abs => xs[0].eval(args).abs_of(),
                Func::Min => xs[0].eval(args).min_of(xs[1].eval(args)),
                Func::Max => xs[0].eval(args).max_of(xs[1].eval(args)),
            },
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Ast::Bin(op, _, _) => op.precedence(),
            Ast::Neg(_) => 3,
            _ => 4,
        }
    }

    fn print(&self, out: &mut String) {
        const NAMES: [&str; 2] = ["x", "y"];
        match self {
            Ast::Var(i) => out.push_str(NAMES[*i]),
            Ast::Lit(v) => {
                if *v < 0.0 || (*v == 0.0 && v.is_sign_negative()) {
                    out.push('(');
                    out.push_str(&format!("{v}"));
                    out.push(')');
                } else {
                    out.push_str(&format!("{v}"));
                }
            }
            Ast::Neg(a) => {
                out.push('-');
                if a.precedence() < 3 {
                    out.push('(');
                    a.print(out);
                    out.push(')');
                } else {
                    a.print(out);
                }
            }
            Ast::Bin(op, a, b) => {
                let p = op.precedence();
                let wrap_left = a.precedence() < p;
                let wrap_right = b.precedence() <= p;
                if wrap_left {
                    out.push('(');
                }
                a.print(out);
                if wrap_left {
                    out.push(')');
                }
                out.push(' ');
                out.push_str(op.symbol());
                out.push(' ');
                if wrap_right {
                    out.push('(');
                }
                b.print(out);
                if wrap_right {
                    out.push(')');
                }
            }
            Ast::Call(f, xs) => {
                out.push_str(f.name());
                out.push('(');
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    x.print(out);
                }
                out.push(')');
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Token {
    Num(f64),
    Ident(String),
    LParen,
    RParen,
    Comma,
    Arrow,
    Op(char),
}

fn tokenize(src: &str) -> std::result::Result<Vec<Token>, String> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '(' => {
                out.push(Token::LParen);
                i += 1;
            }
            ')' => {
                out.push(Token::RParen);
                i += 1;
            }
            ',' => {
                out.push(Token::Comma);
                i += 1;
            }
            '-' if chars.get(i + 1) == Some(&'>') => {
                out.push(Token::Arrow);
                i += 2;
            }
            '+' | '-' | '*' | '/' => {
                out.push(Token::Op(c));
                i += 1;
            }
            c if c.is_ascii_digit() || c == '.' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                    i += 1;
                }
                if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                    i += 1;
                    if i < chars.len() && (chars[i] == '+' || chars[i] == '-') {
                        i += 1;
                    }
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
                let text: String = chars[start..i].iter().collect();
                // Julia-style float32 suffix, e.g. `0.0f0`
                if i + 1 < chars.len() && chars[i] == 'f' && chars[i + 1].is_ascii_digit() {
                    i += 2;
                }
                let v = text
                    .parse::<f64>()
                    .map_err(|_| format!("bad number `{text}`"))?;
                out.push(Token::Num(v));
            }
            c if c.is_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                out.push(Token::Ident(chars[start..i].iter().collect()));
            }
            other => return Err(format!("unexpected character `{other}`")),
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    params: Vec<String>,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn expect(&mut self, want: Token) -> std::result::Result<(), String> {
        match self.next() {
            Some(t) if t == want => Ok(()),
            other => Err(format!("expected {want:?}, found {other:?}")),
        }
    }

    fn expr(&mut self) -> std::result::Result<Ast, String> {
        let mut lhs = self.term()?;
        while let Some(Token::Op(c @ ('+' | '-'))) = self.peek() {
            let op = if *c == '+' { Arith::Add } else { Arith::Sub };
            self.pos += 1;
            let rhs = self.term()?;
            lhs = Ast::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> std::result::Result<Ast, String> {
        let mut lhs = self.unary()?;
        while let Some(Token::Op(c @ ('*' | '/'))) = self.peek() {
            let op = if *c == '*' { Arith::Mul } else { Arith::Div };
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = Ast::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> std::result::Result<Ast, String> {
        if let Some(Token::Op('-')) = self.peek() {
            self.pos += 1;
            return Ok(Ast::Neg(Box::new(self.unary()?)));
        }
        self.atom()
    }

    fn atom(&mut self) -> std::result::Result<Ast, String> {
        match self.next() {
            Some(Token::Num(v)) => Ok(Ast::Lit(v)),
            Some(Token::LParen) => {
                let e = self.expr()?;
                self.expect(Token::RParen)?;
                Ok(e)
            }
            Some(Token::Ident(name)) => {
                if let Some(i) = self.params.iter().position(|p| *p == name && p != "_") {
                    return Ok(Ast::Var(i));
                }
                let f = Func::from_name(&name).ok_or_else(|| format!("unknown name `{name}`"))?;
                self.expect(Token::LParen)?;
                let mut args = vec![self.expr()?];
                while let Some(Token::Comma) = self.peek() {
                    self.pos += 1;
                    args.push(self.expr()?);
                }
                self.expect(Token::RParen)?;
                if args.len() != f.arity() {
                    return Err(format!("{} takes {} argument(s)", f.name(), f.arity()));
                }
                Ok(Ast::Call(f, args))
            }
            other => Err(format!("unexpected {other:?}")),
        }
    }
}

/// Parses `(a, b) -> body`, `a -> body`, or a bare symbol (`+`, `max`, ...).
fn parse_lambda(src: &str) -> std::result::Result<(usize, Ast), String> {
    let trimmed = src.trim();
    let bare = match trimmed {
        "+" => Some("(x, y) -> x + y"),
        "-" => Some("(x, y) -> x - y"),
        "*" => Some("(x, y) -> x * y"),
        "/" => Some("(x, y) -> x / y"),
        "min" => Some("(x, y) -> min(x, y)"),
        "max" => Some("(x, y) -> max(x, y)"),
        "abs" => Some("(x) -> abs(x)"),
        _ => None,
    };
    let tokens = tokenize(bare.unwrap_or(trimmed))?;
    let arrow = tokens
        .iter()
        .position(|t| *t == Token::Arrow)
        .ok_or("expected a lambda `(x, y) -> ...`")?;
    let head = &tokens[..arrow];
    let inner = match head {
        [Token::LParen, rest @ .., Token::RParen] => rest,
        other => other,
    };
    let mut params = Vec::new();
    for (i, t) in inner.iter().enumerate() {
        match (i % 2, t) {
            (0, Token::Ident(name)) => params.push(name.clone()),
            (1, Token::Comma) => {}
            _ => return Err("malformed parameter list".into()),
        }
    }
    if params.is_empty() || params.len() > 2 {
        return Err(format!(
            "expected 1 or 2 parameters, found {}",
            params.len()
        ));
    }
    let mut parser = Parser {
        tokens: tokens[arrow + 1..].to_vec(),
        pos: 0,
        params,
    };
    let body = parser.expr()?;
    if parser.pos != parser.tokens.len() {
        return Err("trailing input after expression".into());
    }
    Ok((parser.params.len(), body))
}

fn canonical_of(arity: usize, body: &Ast) -> String {
    let mut s = String::from(if arity == 1 { "(x) -> " } else { "(x, y) -> " });
    body.print(&mut s);
    s
}

// ---------------------------------------------------------------------------
// Registry and operator handles
// ---------------------------------------------------------------------------

#[derive(Debug)]
enum Body {
    Unary(BuiltinUnary),
    Binary(BuiltinBinary),
    Expr(Ast),
}

#[derive(Debug)]
struct OpDef {
    id: u64,
    arity: usize,
    canonical: String,
    body: Body,
}

#[derive(Default)]
struct Registry {
    by_canonical: HashMap<String, Arc<OpDef>>,
    next_id: u64,
}

impl Registry {
    fn insert(&mut self, arity: usize, canonical: String, body: Body) -> Arc<OpDef> {
        if let Some(def) = self.by_canonical.get(&canonical) {
            return def.clone();
        }
        self.next_id += 1;
        let def = Arc::new(OpDef {
            id: self.next_id,
            arity,
            canonical: canonical.clone(),
            body,
        });
        self.by_canonical.insert(canonical, def.clone());
        def
    }
}

fn registry() -> &'static Mutex<Registry> {
    static REGISTRY: OnceLock<Mutex<Registry>> = OnceLock::new();
    REGISTRY.get_or_init(|| {
        // builtins take ids 1..=12 in declaration order
        let mut reg = Registry::default();
        for u in BuiltinUnary::ALL {
            reg.insert(1, u.canonical().to_string(), Body::Unary(u));
        }
        for b in BuiltinBinary::ALL {
            reg.insert(2, b.canonical().to_string(), Body::Binary(b));
        }
        Mutex::new(reg)
    })
}

fn register(src: &str, want_arity: usize) -> Result<Arc<OpDef>> {
    let (arity, ast) = parse_lambda(src).map_err(|reason| Error::OperatorParse {
        source_text: src.to_string(),
        reason,
    })?;
    if arity != want_arity {
        return Err(Error::Arity {
            expected: want_arity,
            found: arity,
        });
    }
    let canonical = canonical_of(arity, &ast);
    let mut reg = registry().lock().expect("operator registry poisoned");
    Ok(reg.insert(arity, canonical, Body::Expr(ast)))
}

fn builtin_def(canonical: &str) -> Arc<OpDef> {
    registry()
        .lock()
        .expect("operator registry poisoned")
        .by_canonical
        .get(canonical)
        .cloned()
        .expect("builtins are registered at init")
}

/// Kernel-ready unary function.
pub type UnaryFn<T> = Arc<dyn Fn(T) -> T + Send + Sync>;
/// Kernel-ready binary function.
pub type BinaryFn<T> = Arc<dyn Fn(T, T) -> T + Send + Sync>;
/// Element-wise combination of two equal-length slices into a third.
pub type ZipDyn<T> = dyn Fn(&[T], &[T], &mut [T]) + Send + Sync;
pub type ZipFn<T> = Arc<ZipDyn<T>>;
/// Left fold of a slice from a starting accumulator.
pub type FoldFn<T> = Arc<dyn Fn(T, &[T]) -> T + Send + Sync>;

fn zip_with<T: Elem>(f: impl Fn(T, T) -> T + Send + Sync + 'static) -> ZipFn<T> {
    Arc::new(move |a: &[T], b: &[T], out: &mut [T]| {
        for ((o, &x), &y) in out.iter_mut().zip(a).zip(b) {
            *o = f(x, y);
        }
    })
}

fn fold_with<T: Elem>(f: impl Fn(T, T) -> T + Send + Sync + 'static) -> FoldFn<T> {
    Arc::new(move |acc: T, xs: &[T]| xs.iter().fold(acc, |a, &x| f(a, x)))
}

/// Expands `$make` once per builtin so each gets an inlined loop body.
macro_rules! per_builtin {
    ($b:expr, $make:ident) => {
        match $b {
            BuiltinBinary::Plus => $make(|x: T, y: T| x.add(y)),
            BuiltinBinary::Minus => $make(|x: T, y: T| x.sub(y)),
            BuiltinBinary::Times => $make(|x: T, y: T| x.mul(y)),
            BuiltinBinary::Div => $make(|x: T, y: T| x.div(y)),
            BuiltinBinary::Min => $make(|x: T, y: T| x.min_of(y)),
            BuiltinBinary::Max => $make(|x: T, y: T| x.max_of(y)),
            BuiltinBinary::First => $make(|x: T, _: T| x),
            BuiltinBinary::Second => $make(|_: T, y: T| y),
            BuiltinBinary::AbsDiff => $make(|x: T, y: T| x.sub(y).abs_of()),
        }
    };
}

/// A registered one-argument operator.
#[derive(Clone)]
pub struct UnaryOp(Arc<OpDef>);

/// A registered two-argument operator.
#[derive(Clone)]
pub struct BinaryOp(Arc<OpDef>);

impl UnaryOp {
    /// Parses and registers a lambda such as `(x) -> x + 1`.
    pub fn parse(src: &str) -> Result<UnaryOp> {
        register(src, 1).map(UnaryOp)
    }

    pub fn identity() -> UnaryOp {
        UnaryOp(builtin_def(BuiltinUnary::Identity.canonical()))
    }

    pub fn abs() -> UnaryOp {
        UnaryOp(builtin_def(BuiltinUnary::Abs.canonical()))
    }

    pub fn neg() -> UnaryOp {
        UnaryOp(builtin_def(BuiltinUnary::Neg.canonical()))
    }

    pub fn id(&self) -> u64 {
        self.0.id
    }

    pub fn arity(&self) -> usize {
        self.0.arity
    }

    pub fn canonical_form(&self) -> &str {
        &self.0.canonical
    }

    pub fn builtin(&self) -> Option<BuiltinUnary> {
        match self.0.body {
            Body::Unary(u) => Some(u),
            _ => None,
        }
    }

    pub fn call<T: Elem>(&self, x: T) -> T {
        match &self.0.body {
            Body::Unary(u) => u.apply(x),
            Body::Expr(ast) => ast.eval(&[x, x]),
            Body::Binary(_) => unreachable!("unary op with binary body"),
        }
    }

    pub fn call_scalar(&self, x: Scalar) -> Scalar {
        with_value_kind!(x.kind(), T => self.call(T::from_scalar(x)).to_scalar())
    }

    pub fn typed<T: Elem>(&self) -> UnaryFn<T> {
        match &self.0.body {
            Body::Unary(BuiltinUnary::Identity) => Arc::new(|x| x),
            Body::Unary(BuiltinUnary::Abs) => Arc::new(|x: T| x.abs_of()),
            Body::Unary(BuiltinUnary::Neg) => Arc::new(|x: T| x.neg_of()),
            _ => {
                let def = self.0.clone();
                Arc::new(move |x| match &def.body {
                    Body::Expr(ast) => ast.eval(&[x, x]),
                    _ => unreachable!("builtins handled above"),
                })
            }
        }
    }
}

impl BinaryOp {
    /// Parses and registers a lambda such as `(x, y) -> max(x / 0.85, y)`,
    /// or a bare symbol (`+`, `-`, `*`, `/`, `min`, `max`).
    pub fn parse(src: &str) -> Result<BinaryOp> {
        register(src, 2).map(BinaryOp)
    }

    pub fn builtin_op(op: BuiltinBinary) -> BinaryOp {
        BinaryOp(builtin_def(op.canonical()))
    }

    pub fn plus() -> BinaryOp {
        Self::builtin_op(BuiltinBinary::Plus)
    }

    pub fn minus() -> BinaryOp {
        Self::builtin_op(BuiltinBinary::Minus)
    }

    pub fn times() -> BinaryOp {
        Self::builtin_op(BuiltinBinary::Times)
    }

    pub fn div() -> BinaryOp {
        Self::builtin_op(BuiltinBinary::Div)
    }

    pub fn min() -> BinaryOp {
        Self::builtin_op(BuiltinBinary::Min)
    }

    pub fn max() -> BinaryOp {
        Self::builtin_op(BuiltinBinary::Max)
    }

    pub fn first() -> BinaryOp {
        Self::builtin_op(BuiltinBinary::First)
    }

    pub fn second() -> BinaryOp {
        Self::builtin_op(BuiltinBinary::Second)
    }

    pub fn abs_diff() -> BinaryOp {
        Self::builtin_op(BuiltinBinary::AbsDiff)
    }

    pub fn id(&self) -> u64 {
        self.0.id
    }

    pub fn arity(&self) -> usize {
        self.0.arity
    }

    pub fn canonical_form(&self) -> &str {
        &self.0.canonical
    }

    pub fn builtin(&self) -> Option<BuiltinBinary> {
        match self.0.body {
            Body::Binary(b) => Some(b),
            _ => None,
        }
    }

    pub fn call<T: Elem>(&self, x: T, y: T) -> T {
        match &self.0.body {
            Body::Binary(b) => b.apply(x, y),
            Body::Expr(ast) => ast.eval(&[x, y]),
            Body::Unary(_) => unreachable!("binary op with unary body"),
        }
    }

    /// Applies to two scalars of the same kind (the second is cast if not).
    pub fn call_scalar(&self, x: Scalar, y: Scalar) -> Scalar {
        with_value_kind!(x.kind(), T => self.call(T::from_scalar(x), T::from_scalar(y)).to_scalar())
    }

    pub fn typed<T: Elem>(&self) -> BinaryFn<T> {
        match &self.0.body {
            // one closure per builtin so calls skip the operator match
            Body::Binary(b) => {
                fn boxed<T: Elem>(f: impl Fn(T, T) -> T + Send + Sync + 'static) -> BinaryFn<T> {
                    Arc::new(f)
                }
                per_builtin!(b, boxed)
            }
            _ => {
                let def = self.0.clone();
                Arc::new(move |x, y| match &def.body {
                    Body::Expr(ast) => ast.eval(&[x, y]),
                    _ => unreachable!("builtins handled above"),
                })
            }
        }
    }

    /// Slice form of [`BinaryOp::typed`]; builtins get a dedicated loop.
    pub fn typed_zip<T: Elem>(&self) -> ZipFn<T> {
        match &self.0.body {
            Body::Binary(b) => per_builtin!(b, zip_with),
            _ => {
                let f = self.typed::<T>();
                Arc::new(move |a: &[T], b: &[T], out: &mut [T]| {
                    for ((o, &x), &y) in out.iter_mut().zip(a).zip(b) {
                        *o = f(x, y);
                    }
                })
            }
        }
    }

    /// Sequential left fold with this operator, in slice order.
    pub fn typed_fold<T: Elem>(&self) -> FoldFn<T> {
        match &self.0.body {
            Body::Binary(b) => per_builtin!(b, fold_with),
            _ => {
                let f = self.typed::<T>();
                Arc::new(move |acc: T, xs: &[T]| xs.iter().fold(acc, |a, &x| f(a, x)))
            }
        }
    }
}

impl fmt::Debug for UnaryOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "UnaryOp#{}[{}]", self.0.id, self.0.canonical)
    }
}

impl fmt::Debug for BinaryOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BinaryOp#{}[{}]", self.0.id, self.0.canonical)
    }
}

impl PartialEq for UnaryOp {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }
}

impl PartialEq for BinaryOp {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_forms_round_trip_through_the_parser() {
        for b in BuiltinBinary::ALL {
            let parsed = BinaryOp::parse(b.canonical()).unwrap();
            assert_eq!(parsed.builtin(), Some(b), "{}", b.canonical());
            assert_eq!(parsed.canonical_form(), b.canonical());
        }
        for u in BuiltinUnary::ALL {
            assert_eq!(UnaryOp::parse(u.canonical()).unwrap().builtin(), Some(u));
        }
    }

    #[test]
    fn lambdas_canonicalize_parameter_names() {
        let a = BinaryOp::parse("(_, x) -> x").unwrap();
        assert_eq!(a, BinaryOp::second());
        let b = BinaryOp::parse("(a, b) -> abs(a - b)").unwrap();
        assert_eq!(b, BinaryOp::abs_diff());
        assert_eq!(BinaryOp::parse("+").unwrap(), BinaryOp::plus());
        let c = UnaryOp::parse("v -> v + 1").unwrap();
        assert_eq!(c.canonical_form(), "(x) -> x + 1");
        assert_eq!(c.id(), UnaryOp::parse("(x) -> (x) + 1").unwrap().id());
    }

    #[test]
    fn user_lambda_evaluates() {
        let op = BinaryOp::parse("(x, y) -> max(x / 0.85, y)").unwrap();
        assert_eq!(op.canonical_form(), "(x, y) -> max(x / 0.85, y)");
        assert!((op.call(1.7f64, 0.5) - 2.0).abs() < 1e-12);
        assert_eq!(op.call(0.0f32, 1.0 / 0.85), 1.0 / 0.85);
        let julia = BinaryOp::parse("(x, y) -> x * 2.0f0 - y").unwrap();
        assert_eq!(julia.call(3i32, 1), 5);
    }

    #[test]
    fn precedence_is_preserved_when_printing() {
        let op = BinaryOp::parse("(x, y) -> (x - y) - (x - y) * 2").unwrap();
        assert_eq!(op.canonical_form(), "(x, y) -> x - y - (x - y) * 2");
        let op2 = BinaryOp::parse("(x, y) -> x - (y - 1)").unwrap();
        assert_eq!(op2.canonical_form(), "(x, y) -> x - (y - 1)");
        assert_eq!(op2.call(5i64, 3), 3);
        let neg = UnaryOp::parse("(x) -> -(x + 1)").unwrap();
        assert_eq!(neg.call(2i32), -3);
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(
            BinaryOp::parse("(x) -> x"),
            Err(Error::Arity {
                expected: 2,
                found: 1
            })
        ));
        assert!(matches!(
            BinaryOp::parse("(x, y) -> z"),
            Err(Error::OperatorParse { .. })
        ));
        assert!(matches!(
            UnaryOp::parse("x +"),
            Err(Error::OperatorParse { .. })
        ));
        assert!(matches!(
            BinaryOp::parse("(x, y) -> min(x)"),
            Err(Error::OperatorParse { .. })
        ));
    }

    #[test]
    fn typed_matches_call() {
        let op = BinaryOp::parse("(x, y) -> x * x + y").unwrap();
        let f = op.typed::<i64>();
        assert_eq!(f(3, 4), op.call(3i64, 4));
        assert_eq!(
            BinaryOp::times().call_scalar(Scalar::F32(2.0), Scalar::F32(4.0)),
            Scalar::F32(8.0)
        );
    }
}
