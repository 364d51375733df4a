use crate::structure::{free_identifier, is_ident_char, Kind, Term, Vocabulary};

use super::{Guard, Program, Revision, Script, SyntaxError, Test, KEYWORDS};

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    LBrace,
    RBrace,
    LBrack,
    RBrack,
    LParen,
    RParen,
    Comma,
    Semi,
    Slash,
    Plus,
    Minus,
    Arrow,
    Assign,
    EqEq,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::LBrack => "`[`".into(),
            Tok::RBrack => "`]`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Semi => "`;`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Arrow => "`<-`".into(),
            Tok::Assign => "`:=`".into(),
            Tok::EqEq => "`==`".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(text: &str) -> Result<Vec<Spanned>, SyntaxError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '%' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let (tok, len) = match (c, chars.get(i + 1).copied()) {
            ('<', Some('-')) => (Tok::Arrow, 2),
            (':', Some('=')) => (Tok::Assign, 2),
            ('=', Some('=')) => (Tok::EqEq, 2),
            ('{', _) => (Tok::LBrace, 1),
            ('}', _) => (Tok::RBrace, 1),
            ('[', _) => (Tok::LBrack, 1),
            (']', _) => (Tok::RBrack, 1),
            ('(', _) => (Tok::LParen, 1),
            (')', _) => (Tok::RParen, 1),
            (',', _) => (Tok::Comma, 1),
            (';', _) => (Tok::Semi, 1),
            ('/', _) => (Tok::Slash, 1),
            ('+', _) => (Tok::Plus, 1),
            ('-', _) => (Tok::Minus, 1),
            _ if is_ident_char(c) => {
                let start = i;
                let mut j = i;
                while j < chars.len() && is_ident_char(chars[j]) {
                    j += 1;
                }
                (Tok::Ident(chars[start..j].iter().collect()), j - start)
            }
            _ => return Err(SyntaxError::Parse { line, col, message: format!("unexpected character `{c}`") }),
        };
        out.push(Spanned { tok, line, col });
        i += len;
        col += len;
    }
    Ok(out)
}

/// Recursive-descent parser over a vocabulary that it may extend with the
/// fresh token used by assignment and compound-address sugar.
pub struct Parser<'v> {
    toks: Vec<Spanned>,
    pos: usize,
    vocab: &'v mut Vocabulary,
    temp: &'v mut Option<String>,
}

impl<'v> Parser<'v> {
    pub fn new(text: &str, vocab: &'v mut Vocabulary, temp: &'v mut Option<String>) -> Result<Self, SyntaxError> {
        Ok(Parser { toks: lex(text)?, pos: 0, vocab, temp })
    }

    fn here(&self) -> (usize, usize) {
        match self.toks.get(self.pos).or(self.toks.last()) {
            Some(t) => (t.line, t.col),
            None => (1, 1),
        }
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, SyntaxError> {
        let (line, col) = self.here();
        Err(SyntaxError::Parse { line, col, message: message.into() })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.toks.get(self.pos + k).map(|s| &s.tok)
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == Some(t) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: Tok) -> Result<(), SyntaxError> {
        if self.eat(&t) {
            return Ok(());
        }
        match self.peek() {
            Some(found) => self.err(format!("expected {}, found {}", t.describe(), found.describe())),
            None => self.err(format!("expected {}, found end of input", t.describe())),
        }
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(s)) if s == kw)
    }

    fn ident(&mut self) -> Result<String, SyntaxError> {
        match self.peek().cloned() {
            Some(Tok::Ident(s)) => {
                self.pos += 1;
                Ok(s)
            }
            Some(t) => self.err(format!("expected identifier, found {}", t.describe())),
            None => self.err("expected identifier, found end of input"),
        }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    fn temp(&mut self) -> String {
        if let Some(t) = self.temp.as_ref() {
            return t.clone();
        }
        let name = free_identifier(self.vocab, "b");
        self.vocab.add_function(&name, 0).expect("fresh identifier");
        *self.temp = Some(name.clone());
        name
    }

    fn symbol_check(&self, name: &str, kind: Kind, arity: usize, at: (usize, usize)) -> Result<(), SyntaxError> {
        let (line, col) = at;
        let sym = self
            .vocab
            .get(name)
            .ok_or_else(|| SyntaxError::UnknownIdentifier { line, col, name: name.to_string() })?;
        if sym.kind != kind {
            return Err(SyntaxError::Kind {
                line,
                col,
                name: name.to_string(),
                expected: kind_word(kind).into(),
                found: kind_word(sym.kind).into(),
            });
        }
        if sym.arity != arity {
            return Err(SyntaxError::Arity { line, col, name: name.to_string(), expected: sym.arity, found: arity });
        }
        Ok(())
    }

    fn term_args(&mut self) -> Result<Vec<Term>, SyntaxError> {
        let mut args = Vec::new();
        if self.eat(&Tok::LParen) && !self.eat(&Tok::RParen) {
            loop {
                args.push(self.term()?);
                if self.eat(&Tok::RParen) {
                    break;
                }
                self.expect(Tok::Comma)?;
            }
        }
        Ok(args)
    }

    /// A term whose head is a function identifier.
    pub fn term(&mut self) -> Result<Term, SyntaxError> {
        let at = self.here();
        let head = self.ident()?;
        let args = self.term_args()?;
        self.symbol_check(&head, Kind::Function, args.len(), at)?;
        Ok(Term { head, args })
    }

    /// Head identifier and arguments, validated against the given kind.
    fn application(&mut self, kind: Kind) -> Result<(String, Vec<Term>), SyntaxError> {
        let at = self.here();
        let head = self.ident()?;
        let args = self.term_args()?;
        self.symbol_check(&head, kind, args.len(), at)?;
        Ok((head, args))
    }

    pub fn guard(&mut self) -> Result<Guard, SyntaxError> {
        let mut g = self.conj()?;
        while self.is_keyword("or") {
            self.pos += 1;
            g = Guard::or(g, self.conj()?);
        }
        Ok(g)
    }

    fn conj(&mut self) -> Result<Guard, SyntaxError> {
        let mut g = self.negation()?;
        while self.is_keyword("and") {
            self.pos += 1;
            g = Guard::and(g, self.negation()?);
        }
        Ok(g)
    }

    fn negation(&mut self) -> Result<Guard, SyntaxError> {
        if self.is_keyword("not") {
            self.pos += 1;
            return Ok(Guard::not(self.negation()?));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Guard, SyntaxError> {
        if self.eat(&Tok::LParen) {
            let g = self.guard()?;
            self.expect(Tok::RParen)?;
            return Ok(g);
        }
        if self.is_keyword("true") {
            self.pos += 1;
            return Ok(Guard::True);
        }
        if self.is_keyword("false") {
            self.pos += 1;
            return Ok(Guard::False);
        }
        if self.is_keyword("def") {
            self.pos += 1;
            return Ok(Guard::def(self.term()?));
        }
        let is_relation = match self.peek() {
            Some(Tok::Ident(s)) => self.vocab.get(s).is_some_and(|sym| sym.kind == Kind::Relation),
            _ => false,
        };
        if is_relation {
            let (r, args) = self.application(Kind::Relation)?;
            return Ok(Guard::Test(Test::Rel(r, args)));
        }
        let lhs = self.term()?;
        self.expect(Tok::EqEq)?;
        let rhs = self.term()?;
        Ok(Guard::Test(Test::Eq(lhs, rhs)))
    }

    fn bracketed_guard(&mut self) -> Result<Guard, SyntaxError> {
        self.expect(Tok::LBrack)?;
        let g = self.guard()?;
        self.expect(Tok::RBrack)?;
        Ok(g)
    }

    fn block(&mut self) -> Result<Vec<Program>, SyntaxError> {
        self.expect(Tok::LBrace)?;
        let mut out = Vec::new();
        while !self.eat(&Tok::RBrace) {
            if self.at_end() {
                return self.err("unclosed `{`");
            }
            if self.eat(&Tok::Semi) {
                continue;
            }
            out.push(self.statement()?);
        }
        Ok(out)
    }

    /// Statements until end of input.
    pub fn statements(&mut self) -> Result<Vec<Program>, SyntaxError> {
        let mut out = Vec::new();
        while !self.at_end() {
            if self.eat(&Tok::Semi) {
                continue;
            }
            out.push(self.statement()?);
        }
        Ok(out)
    }

    fn statement(&mut self) -> Result<Program, SyntaxError> {
        if self.peek() == Some(&Tok::LBrace) {
            return Ok(Program::Seq(self.block()?));
        }
        let kw = match self.peek() {
            Some(Tok::Ident(s)) => s.clone(),
            Some(t) => return self.err(format!("expected a statement, found {}", t.describe())),
            None => return self.err("expected a statement"),
        };
        // A keyword followed by `+`, `-`, `<-`, `:=` or `(` would be an identifier use,
        // but keywords cannot be declared, so they always start their construct.
        match kw.as_str() {
            "if" => {
                self.pos += 1;
                let guard = self.bracketed_guard()?;
                let then = self.block()?;
                let els = if self.peek() == Some(&Tok::LBrace) { self.block()? } else { Vec::new() };
                Ok(Program::If { guard, then, els })
            }
            "do" => {
                self.pos += 1;
                let guard = self.bracketed_guard()?;
                if self.peek() == Some(&Tok::LBrack) {
                    let variant = self.variant()?;
                    let body = self.block()?;
                    Ok(Program::DoVariant { guard, variant, body })
                } else {
                    let body = self.block()?;
                    Ok(Program::Do { guard, body })
                }
            }
            "drop" => {
                self.pos += 1;
                let (f, args) = self.application(Kind::Function)?;
                Ok(Program::Rev(Revision::FuncContr { f, args }))
            }
            "new" | "del" => {
                self.pos += 1;
                let (f, args) = self.application(Kind::Function)?;
                let inception = kw == "new";
                if args.is_empty() {
                    return Ok(Program::Rev(if inception { Revision::Inception(f) } else { Revision::Deletion(f) }));
                }
                let c = self.temp();
                let target = Term { head: f.clone(), args: args.clone() };
                Ok(if inception {
                    Program::Seq(vec![
                        Program::Rev(Revision::Inception(c.clone())),
                        Program::Rev(Revision::FuncExt { f, args, value: Term::token(&c) }),
                        Program::Rev(Revision::FuncContr { f: c, args: vec![] }),
                    ])
                } else {
                    Program::Seq(vec![
                        Program::Rev(Revision::FuncExt { f: c.clone(), args: vec![], value: target }),
                        Program::Rev(Revision::Deletion(c)),
                    ])
                })
            }
            _ => self.update(),
        }
    }

    fn variant(&mut self) -> Result<Vec<String>, SyntaxError> {
        self.expect(Tok::LBrack)?;
        let mut out = Vec::new();
        loop {
            let (line, col) = self.here();
            let name = self.ident()?;
            let sym = self
                .vocab
                .get(&name)
                .ok_or_else(|| SyntaxError::UnknownIdentifier { line, col, name: name.clone() })?;
            if sym.arity == 0 {
                return Err(SyntaxError::NullaryVariant { line, col, name });
            }
            out.push(name);
            if self.eat(&Tok::RBrack) {
                break;
            }
            self.expect(Tok::Comma)?;
        }
        Ok(out)
    }

    fn update(&mut self) -> Result<Program, SyntaxError> {
        if matches!(self.peek_at(1), Some(Tok::Plus) | Some(Tok::Minus)) {
            let at = self.here();
            let r = self.ident()?;
            let add = self.eat(&Tok::Plus);
            if !add {
                self.expect(Tok::Minus)?;
            }
            let args = self.term_args()?;
            self.symbol_check(&r, Kind::Relation, args.len(), at)?;
            return Ok(Program::Rev(if add { Revision::RelExt { r, args } } else { Revision::RelContr { r, args } }));
        }
        let (f, args) = self.application(Kind::Function)?;
        if self.eat(&Tok::Arrow) {
            let value = self.term()?;
            return Ok(Program::Rev(Revision::FuncExt { f, args, value }));
        }
        if self.eat(&Tok::Assign) {
            let value = self.term()?;
            let b = self.temp();
            return Ok(Program::Seq(vec![
                Program::Rev(Revision::FuncExt { f: b.clone(), args: vec![], value }),
                Program::Rev(Revision::FuncContr { f: f.clone(), args: args.clone() }),
                Program::Rev(Revision::FuncExt { f, args, value: Term::token(&b) }),
                Program::Rev(Revision::FuncContr { f: b, args: vec![] }),
            ]));
        }
        self.err("expected `<-` or `:=`")
    }

    fn vocab_header(&mut self) -> Result<(), SyntaxError> {
        if !self.is_keyword("vocab") {
            return self.err("program must start with a `vocab { ... }` header");
        }
        self.pos += 1;
        self.expect(Tok::LBrace)?;
        let mut kind = None;
        while !self.eat(&Tok::RBrace) {
            if self.at_end() {
                return self.err("unclosed vocabulary header");
            }
            if self.is_keyword("fn") {
                self.pos += 1;
                kind = Some(Kind::Function);
                continue;
            }
            if self.is_keyword("rel") {
                self.pos += 1;
                kind = Some(Kind::Relation);
                continue;
            }
            if self.eat(&Tok::Comma) || self.eat(&Tok::Semi) {
                continue;
            }
            let Some(k) = kind else { return self.err("expected `fn` or `rel`") };
            let (line, col) = self.here();
            let name = self.ident()?;
            if KEYWORDS.contains(&name.as_str()) {
                return Err(SyntaxError::Reserved { line, col, name });
            }
            self.expect(Tok::Slash)?;
            let arity_text = self.ident()?;
            let arity: usize = match arity_text.parse() {
                Ok(a) => a,
                Err(_) => return self.err(format!("bad arity `{arity_text}`")),
            };
            self.vocab.add(&name, k, arity).map_err(|e| SyntaxError::Parse { line, col, message: e.to_string() })?;
        }
        Ok(())
    }
}

fn kind_word(k: Kind) -> &'static str {
    match k {
        Kind::Function => "function",
        Kind::Relation => "relation",
    }
}

/// Parses a program file: a vocabulary header followed by statements.
pub fn parse_program(text: &str) -> Result<Script, SyntaxError> {
    let mut vocab = Vocabulary::new();
    let mut temp = None;
    let body = {
        let mut p = Parser::new(text, &mut vocab, &mut temp)?;
        p.vocab_header()?;
        p.statements()?
    };
    Ok(Script { vocab, body })
}

/// Parses statements against an existing vocabulary. Sugar may add the
/// fresh token recorded in `temp` (created on first use).
pub fn parse_body(text: &str, vocab: &mut Vocabulary, temp: &mut Option<String>) -> Result<Vec<Program>, SyntaxError> {
    Parser::new(text, vocab, temp)?.statements()
}

pub fn parse_guard(text: &str, vocab: &Vocabulary) -> Result<Guard, SyntaxError> {
    let mut v = vocab.clone();
    let mut temp = None;
    let mut p = Parser::new(text, &mut v, &mut temp)?;
    let g = p.guard()?;
    if !p.at_end() {
        return p.err("trailing input after guard");
    }
    Ok(g)
}
