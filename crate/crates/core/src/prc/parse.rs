//! Text format for recurrence modules.
//!
//! ```text
//! algebra { z/0 s/1 }
//! def add = rec { z(x) => x; s(n, x)[y] => s(y) }
//! def double(x) = add(x, x)
//! def twice = comp(add; proj(1,1), proj(1,1))
//! ```
//!
//! A `rec` clause `c(z1, .., zk, x1, .., xm)[y1, .., yk] => e` binds the
//! constructor's arguments, the parameters and the recursive results; the
//! body is a term over those names, constructors and earlier definitions.
//! `%` starts a comment.

use std::collections::BTreeMap;

use super::{PrDef, PrError, PrModule, Signature};

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Sym(&'static str),
}

struct Lexed {
    tok: Tok,
    line: usize,
    col: usize,
}

fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || "_^~.'#$@•&*|".contains(c)
}

fn lex(text: &str) -> Result<Vec<Lexed>, PrError> {
    let mut out = Vec::new();
    for (li, line) in text.lines().enumerate() {
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let (line, col) = (li + 1, i + 1);
            if c == '%' {
                break;
            } else if c.is_whitespace() {
                i += 1;
            } else if is_ident_char(c) {
                let start = i;
                while i < chars.len() && is_ident_char(chars[i]) {
                    i += 1;
                }
                out.push(Lexed { tok: Tok::Ident(chars[start..i].iter().collect()), line, col });
            } else {
                let sym = match (c, chars.get(i + 1)) {
                    ('=', Some('>')) => "=>",
                    ('=', _) => "=",
                    ('{', _) => "{",
                    ('}', _) => "}",
                    ('(', _) => "(",
                    (')', _) => ")",
                    ('[', _) => "[",
                    (']', _) => "]",
                    (';', _) => ";",
                    (',', _) => ",",
                    ('/', _) => "/",
                    _ => return Err(PrError::Parse { line, col, msg: format!("unexpected character `{c}`") }),
                };
                i += sym.len();
                out.push(Lexed { tok: Tok::Sym(sym), line, col });
            }
        }
    }
    Ok(out)
}

/// A value-level term over bound variables.
enum Expr {
    Var(usize),
    App(String, Vec<Expr>),
}

struct Parser {
    toks: Vec<Lexed>,
    pos: usize,
    module: Option<PrModule>,
}

pub fn parse_module(text: &str) -> Result<PrModule, PrError> {
    let mut p = Parser { toks: lex(text)?, pos: 0, module: None };
    p.algebra()?;
    while p.pos < p.toks.len() {
        p.definition()?;
    }
    Ok(p.module.expect("set by algebra"))
}

impl Parser {
    fn err<T>(&self, msg: impl Into<String>) -> Result<T, PrError> {
        let (line, col) = self.toks.get(self.pos).or(self.toks.last()).map(|t| (t.line, t.col)).unwrap_or((1, 1));
        Err(PrError::Parse { line, col, msg: msg.into() })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn eat(&mut self, sym: &str) -> bool {
        if matches!(self.peek(), Some(Tok::Sym(s)) if *s == sym) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, sym: &str) -> Result<(), PrError> {
        if self.eat(sym) {
            Ok(())
        } else {
            self.err(format!("expected `{sym}`"))
        }
    }

    fn ident(&mut self) -> Result<String, PrError> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => self.err("expected an identifier"),
        }
    }

    fn number(&mut self) -> Result<usize, PrError> {
        let s = self.ident()?;
        match s.parse() {
            Ok(n) => Ok(n),
            Err(_) => {
                self.pos -= 1;
                self.err(format!("expected a number, found `{s}`"))
            }
        }
    }

    fn keyword(&mut self, kw: &str) -> bool {
        if matches!(self.peek(), Some(Tok::Ident(s)) if s == kw) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn module(&self) -> &PrModule {
        self.module.as_ref().expect("set by algebra")
    }

    fn algebra(&mut self) -> Result<(), PrError> {
        if !self.keyword("algebra") {
            return self.err("expected `algebra { ... }`");
        }
        self.expect("{")?;
        let mut cons = Vec::new();
        while !self.eat("}") {
            let c = self.ident()?;
            self.expect("/")?;
            cons.push((c, self.number()?));
        }
        let sig = Signature::new(cons).or_else(|e| self.err(e.to_string()))?;
        self.module = Some(PrModule::new(sig));
        Ok(())
    }

    fn names(&mut self, close: &str) -> Result<Vec<String>, PrError> {
        let mut out = Vec::new();
        if self.eat(close) {
            return Ok(out);
        }
        loop {
            out.push(self.ident()?);
            if self.eat(close) {
                return Ok(out);
            }
            self.expect(",")?;
        }
    }

    fn definition(&mut self) -> Result<(), PrError> {
        if !self.keyword("def") {
            return self.err("expected `def`");
        }
        let at = self.pos;
        let name = self.ident()?;
        let def = if self.eat("(") {
            let params = self.names(")")?;
            self.expect("=")?;
            let e = self.expr(&params)?;
            self.lower(&e, params.len())
        } else {
            self.expect("=")?;
            self.function()?
        };
        let res = self.module.as_mut().expect("set by algebra").define(&name, def);
        res.map(|_| ()).or_else(|e| {
            self.pos = at;
            self.err(format!("in `{name}`: {e}"))
        })
    }

    /// Point-free function expression.
    fn function(&mut self) -> Result<PrDef, PrError> {
        if self.keyword("rec") {
            return self.recurrence();
        }
        if self.keyword("proj") {
            self.expect("(")?;
            let index = self.number()?;
            self.expect(",")?;
            let arity = self.number()?;
            self.expect(")")?;
            return Ok(PrDef::Projection { index, arity });
        }
        if self.keyword("comp") {
            self.expect("(")?;
            let outer = self.function()?;
            self.expect(";")?;
            let mut inner = vec![self.function()?];
            while self.eat(",") {
                inner.push(self.function()?);
            }
            self.expect(")")?;
            let arity = self.module().arity(&inner[0]).or_else(|e| self.err(e.to_string()))?;
            return Ok(PrDef::Composition { outer: Box::new(outer), inner, arity });
        }
        if matches!(self.toks.get(self.pos + 1).map(|t| &t.tok), Some(Tok::Sym("("))) {
            let e = self.expr(&[])?;
            return Ok(self.lower(&e, 0));
        }
        let name = self.ident()?;
        self.callee(&name)
    }

    fn callee(&self, name: &str) -> Result<PrDef, PrError> {
        if self.module().algebra.arity(name).is_some() {
            Ok(PrDef::Constructor(name.to_string()))
        } else if self.module().get(name).is_some() {
            Ok(PrDef::Call(name.to_string()))
        } else {
            self.err(format!("unknown function `{name}`"))
        }
    }

    fn recurrence(&mut self) -> Result<PrDef, PrError> {
        self.expect("{")?;
        let mut cases = BTreeMap::new();
        let mut params = None;
        while !self.eat("}") {
            let c = self.ident()?;
            let Some(k) = self.module().algebra.arity(&c) else {
                self.pos -= 1;
                return self.err(format!("`{c}` is not a constructor"));
            };
            let bound = if self.eat("(") { self.names(")")? } else { Vec::new() };
            if bound.len() < k {
                return self.err(format!("`{c}` takes {k} arguments"));
            }
            let m = bound.len() - k;
            if *params.get_or_insert(m) != m {
                return self.err("clauses disagree on the number of parameters");
            }
            let ys = if self.eat("[") { self.names("]")? } else { Vec::new() };
            if ys.len() != k {
                return self.err(format!("`{c}` clause needs {k} recursive results in `[...]`"));
            }
            self.expect("=>")?;
            // Case functions take (x̄, z̄, ȳ).
            let mut vars: Vec<String> = bound[k..].to_vec();
            vars.extend(bound[..k].iter().cloned());
            vars.extend(ys);
            let e = self.expr(&vars)?;
            if cases.insert(c.clone(), self.lower(&e, vars.len())).is_some() {
                return self.err(format!("two clauses for `{c}`"));
            }
            if !self.eat(";") && !matches!(self.peek(), Some(Tok::Sym("}"))) {
                return self.err("expected `;` or `}`");
            }
        }
        Ok(PrDef::Recurrence { params: params.unwrap_or(0), cases })
    }

    fn expr(&mut self, vars: &[String]) -> Result<Expr, PrError> {
        let name = self.ident()?;
        if !self.eat("(") {
            if let Some(i) = vars.iter().rposition(|v| *v == name) {
                return Ok(Expr::Var(i));
            }
            self.callee(&name)?;
            return Ok(Expr::App(name, Vec::new()));
        }
        self.callee(&name)?;
        let mut args = Vec::new();
        if !self.eat(")") {
            loop {
                args.push(self.expr(vars)?);
                if self.eat(")") {
                    break;
                }
                self.expect(",")?;
            }
        }
        Ok(Expr::App(name, args))
    }

    fn lower(&self, e: &Expr, arity: usize) -> PrDef {
        match e {
            Expr::Var(i) => PrDef::Projection { index: i + 1, arity },
            Expr::App(f, args) => {
                let outer = self.callee(f).expect("checked while parsing");
                PrDef::Composition {
                    outer: Box::new(outer),
                    inner: args.iter().map(|a| self.lower(a, arity)).collect(),
                    arity,
                }
            }
        }
    }
}
