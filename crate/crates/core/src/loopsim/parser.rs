//! Lexer and recursive-descent parser for loop programs.
//!
//! ```text
//! program := init* "while" "(" "True" ")" ":" body+ "end"
//! init    := ident ":=" (dist | expr)
//! body    := ident ":=" (dist | expr | branch)
//! dist    := ("Uniform" | "Normal" | "Beta") "(" expr "," expr ")"
//! branch  := expr "{" number "}" expr
//! ```
//!
//! Statements end at a newline or `;`; `#` starts a comment.

use std::collections::HashSet;

use super::ast::{BinOp, Dist, Expr, Func, LoopProgram, Rhs, Statement};
use crate::error::ParseError;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Num(f64),
    Assign,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Colon,
    Sep,
    Plus,
    Minus,
    Star,
    Slash,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Num(v) => format!("number {v}"),
            Tok::Assign => "`:=`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Sep => "end of statement".into(),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

const RESERVED: &[&str] = &[
    "while", "True", "end", "Uniform", "Normal", "Beta", "sin", "cos", "min", "max", "abs",
];

fn lex(src: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        let start = (line, col);
        let push = |out: &mut Vec<Token>, tok| {
            out.push(Token {
                tok,
                line: start.0,
                column: start.1,
            })
        };
        match c {
            '\n' => {
                push(&mut out, Tok::Sep);
                i += 1;
                line += 1;
                col = 1;
                continue;
            }
            c if c.is_whitespace() => {}
            '#' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
                continue;
            }
            ';' => push(&mut out, Tok::Sep),
            '(' => push(&mut out, Tok::LParen),
            ')' => push(&mut out, Tok::RParen),
            '{' => push(&mut out, Tok::LBrace),
            '}' => push(&mut out, Tok::RBrace),
            ',' => push(&mut out, Tok::Comma),
            '+' => push(&mut out, Tok::Plus),
            '-' => push(&mut out, Tok::Minus),
            '*' => push(&mut out, Tok::Star),
            '/' => push(&mut out, Tok::Slash),
            ':' => {
                if chars.get(i + 1) == Some(&'=') {
                    push(&mut out, Tok::Assign);
                    i += 2;
                    col += 2;
                    continue;
                }
                push(&mut out, Tok::Colon);
            }
            c if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) => {
                let s = i;
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
                let text: String = chars[s..i].iter().collect();
                let v: f64 = text.parse().map_err(|_| ParseError::Syntax {
                    line,
                    column: col,
                    message: format!("malformed number `{text}`"),
                })?;
                if !v.is_finite() {
                    return Err(ParseError::Syntax {
                        line,
                        column: col,
                        message: format!("number `{text}` is out of range"),
                    });
                }
                push(&mut out, Tok::Num(v));
                col += i - s;
                continue;
            }
            c if c.is_alphabetic() || c == '_' => {
                let s = i;
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                push(&mut out, Tok::Ident(chars[s..i].iter().collect()));
                col += i - s;
                continue;
            }
            other => {
                return Err(ParseError::Syntax {
                    line,
                    column: col,
                    message: format!("unexpected character `{other}`"),
                })
            }
        }
        i += 1;
        col += 1;
    }
    out.push(Token {
        tok: Tok::Eof,
        line,
        column: col,
    });
    Ok(out)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    vars: Vec<String>,
    defined: HashSet<usize>,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn next(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error_at(&self, t: &Token, message: impl Into<String>) -> ParseError {
        ParseError::Syntax {
            line: t.line,
            column: t.column,
            message: message.into(),
        }
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<Token, ParseError> {
        let t = self.next();
        if t.tok == want {
            Ok(t)
        } else {
            Err(self.error_at(&t, format!("expected {what}, found {}", t.tok.describe())))
        }
    }

    fn skip_separators(&mut self) {
        while self.peek().tok == Tok::Sep {
            self.next();
        }
    }

    fn is_ident(&self, name: &str) -> bool {
        matches!(&self.peek().tok, Tok::Ident(s) if s == name)
    }

    fn slot(&mut self, name: &str) -> usize {
        match self.vars.iter().position(|v| v == name) {
            Some(i) => i,
            None => {
                self.vars.push(name.to_string());
                self.vars.len() - 1
            }
        }
    }

    fn program(mut self) -> Result<LoopProgram, ParseError> {
        let mut init = Vec::new();
        self.skip_separators();
        while !self.is_ident("while") {
            if self.peek().tok == Tok::Eof {
                let t = self.peek().clone();
                return Err(self.error_at(&t, "expected `while (True):` loop"));
            }
            init.push(self.statement(false)?);
            self.skip_separators();
        }
        let outputs: Vec<usize> = {
            let mut seen = Vec::new();
            for s in &init {
                if !seen.contains(&s.target) {
                    seen.push(s.target);
                }
            }
            seen
        };
        self.next();
        self.expect(Tok::LParen, "`(`")?;
        let t = self.next();
        if t.tok != Tok::Ident("True".into()) {
            return Err(self.error_at(&t, "only `while (True)` loops are supported"));
        }
        self.expect(Tok::RParen, "`)`")?;
        self.expect(Tok::Colon, "`:`")?;
        let mut body = Vec::new();
        self.skip_separators();
        while !self.is_ident("end") {
            let t = self.peek().clone();
            match &t.tok {
                Tok::Eof => return Err(self.error_at(&t, "expected `end` after the loop body")),
                Tok::Ident(s) if s == "while" => return Err(ParseError::NestedLoop { line: t.line }),
                _ => {}
            }
            body.push(self.statement(true)?);
            self.skip_separators();
        }
        let end = self.next();
        if body.is_empty() {
            return Err(self.error_at(&end, "loop body is empty"));
        }
        self.skip_separators();
        let t = self.peek().clone();
        if t.tok != Tok::Eof {
            return Err(self.error_at(&t, format!("unexpected {} after `end`", t.tok.describe())));
        }
        Ok(LoopProgram {
            vars: self.vars,
            init,
            body,
            outputs,
        })
    }

    fn statement(&mut self, in_body: bool) -> Result<Statement, ParseError> {
        let t = self.next();
        let name = match t.tok {
            Tok::Ident(ref s) if RESERVED.contains(&s.as_str()) => {
                return Err(self.error_at(&t, format!("`{s}` is reserved and cannot be assigned")))
            }
            Tok::Ident(ref s) => s.clone(),
            ref other => {
                return Err(self.error_at(&t, format!("expected a variable name, found {}", other.describe())))
            }
        };
        self.expect(Tok::Assign, "`:=`")?;
        let rhs = self.rhs(in_body)?;
        let end = self.peek().clone();
        if !matches!(end.tok, Tok::Sep | Tok::Eof) {
            return Err(self.error_at(&end, format!("expected end of statement, found {}", end.tok.describe())));
        }
        let target = self.slot(&name);
        self.defined.insert(target);
        Ok(Statement { target, rhs })
    }

    fn rhs(&mut self, in_body: bool) -> Result<Rhs, ParseError> {
        if let Tok::Ident(s) = &self.peek().tok {
            if let Some(d) = Dist::from_name(s) {
                if *self.peek_at(1) == Tok::LParen {
                    self.next();
                    self.next();
                    let a = self.expr()?;
                    self.expect(Tok::Comma, "`,`")?;
                    let b = self.expr()?;
                    self.expect(Tok::RParen, "`)`")?;
                    return Ok(Rhs::Draw(d, a, b));
                }
            }
        }
        let first = self.expr()?;
        if self.peek().tok != Tok::LBrace {
            return Ok(Rhs::Expr(first));
        }
        let brace = self.next();
        if !in_body {
            return Err(self.error_at(&brace, "probabilistic branches are only allowed in the loop body"));
        }
        let negative = if self.peek().tok == Tok::Minus {
            self.next();
            true
        } else {
            false
        };
        let t = self.next();
        let p = match t.tok {
            Tok::Num(v) => {
                if negative {
                    -v
                } else {
                    v
                }
            }
            ref other => {
                return Err(self.error_at(&t, format!("expected a branch probability, found {}", other.describe())))
            }
        };
        if !(0.0..=1.0).contains(&p) {
            return Err(ParseError::BadProbability {
                line: t.line,
                probability: p,
            });
        }
        self.expect(Tok::RBrace, "`}`")?;
        let second = self.expr()?;
        Ok(Rhs::Branch(first, p, second))
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek().tok {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.next();
            let rhs = self.term()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek().tok {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.next();
            let rhs = self.unary()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.peek().tok == Tok::Minus {
            self.next();
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let t = self.next();
        match t.tok {
            Tok::Num(v) => Ok(Expr::Num(v)),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::Ident(ref name) => {
                if self.peek().tok == Tok::LParen {
                    let Some(f) = Func::from_name(name) else {
                        if Dist::from_name(name).is_some() {
                            return Err(self.error_at(&t, format!(
                                "`{name}(...)` draws must be the whole right-hand side of an assignment"
                            )));
                        }
                        return Err(ParseError::UnknownFunction {
                            line: t.line,
                            name: name.clone(),
                        });
                    };
                    self.next();
                    let mut args = vec![self.expr()?];
                    while self.peek().tok == Tok::Comma {
                        self.next();
                        args.push(self.expr()?);
                    }
                    self.expect(Tok::RParen, "`)`")?;
                    if args.len() != f.arity() {
                        return Err(self.error_at(&t, format!(
                            "`{name}` takes {} argument(s), got {}",
                            f.arity(),
                            args.len()
                        )));
                    }
                    return Ok(Expr::Call(f, args));
                }
                if RESERVED.contains(&name.as_str()) {
                    return Err(self.error_at(&t, format!("unexpected keyword `{name}`")));
                }
                match self.vars.iter().position(|v| v == name) {
                    Some(i) if self.defined.contains(&i) => Ok(Expr::Var(i)),
                    _ => Err(ParseError::UseBeforeAssign {
                        line: t.line,
                        name: name.clone(),
                    }),
                }
            }
            ref other => Err(self.error_at(&t, format!("expected an expression, found {}", other.describe()))),
        }
    }
}

/// Parses program text.
pub fn parse(src: &str) -> Result<LoopProgram, ParseError> {
    Parser {
        toks: lex(src)?,
        pos: 0,
        vars: Vec::new(),
        defined: HashSet::new(),
    }
    .program()
}

/// A single-variable expression compiled for repeated evaluation.
#[derive(Debug, Clone)]
pub struct CompiledFunction {
    expr: Expr,
}

impl CompiledFunction {
    pub fn eval(&self, x: f64) -> f64 {
        self.expr.eval(&[x])
    }
}

/// Compiles an expression in the single variable `var`.
pub fn compile_function(src: &str, var: &str) -> Result<CompiledFunction, ParseError> {
    let mut p = Parser {
        toks: lex(src)?,
        pos: 0,
        vars: vec![var.to_string()],
        defined: HashSet::from([0]),
    };
    p.skip_separators();
    let expr = p.expr()?;
    p.skip_separators();
    let t = p.peek().clone();
    if t.tok != Tok::Eof {
        return Err(p.error_at(&t, format!("unexpected {}", t.tok.describe())));
    }
    Ok(CompiledFunction { expr })
}
