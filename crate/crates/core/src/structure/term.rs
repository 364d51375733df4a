use std::collections::HashSet;
use std::fmt;

use serde::Serialize;

use super::{StructureError, Vocabulary};

/// A closed term: an identifier applied to argument terms.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Term {
    pub head: String,
    pub args: Vec<Term>,
}

impl Term {
    pub fn token(name: impl Into<String>) -> Self {
        Term { head: name.into(), args: Vec::new() }
    }

    pub fn app(head: impl Into<String>, args: Vec<Term>) -> Self {
        Term { head: head.into(), args }
    }

    /// Unary chain `f(g(h(base)))` given the pointers innermost first.
    pub fn chain<S: AsRef<str>>(base: &str, pointers: &[S]) -> Self {
        pointers
            .iter()
            .fold(Term::token(base), |t, p| Term::app(p.as_ref(), vec![t]))
    }

    pub fn height(&self) -> usize {
        1 + self.args.iter().map(Term::height).max().unwrap_or(0)
    }

    /// Number of syntax-tree nodes.
    pub fn tree_size(&self) -> usize {
        1 + self.args.iter().map(Term::tree_size).sum::<usize>()
    }

    /// Checks that every head is a function identifier applied to the right
    /// number of arguments.
    pub fn check(&self, vocab: &Vocabulary) -> Result<(), StructureError> {
        let sym = vocab
            .get(&self.head)
            .ok_or_else(|| StructureError::UnknownIdentifier(self.head.clone()))?;
        if sym.kind != super::Kind::Function {
            return Err(StructureError::RelationInTerm(self.head.clone()));
        }
        if sym.arity != self.args.len() {
            return Err(StructureError::ArityMismatch {
                name: self.head.clone(),
                expected: sym.arity,
                found: self.args.len(),
            });
        }
        self.args.iter().try_for_each(|a| a.check(vocab))
    }

    /// Distinct sub-terms, each listed after all of its own sub-terms.
    pub fn subterms(&self) -> Vec<&Term> {
        fn walk<'a>(t: &'a Term, seen: &mut HashSet<&'a Term>, out: &mut Vec<&'a Term>) {
            if seen.contains(t) {
                return;
            }
            for a in &t.args {
                walk(a, seen, out);
            }
            seen.insert(t);
            out.push(t);
        }
        let mut out = Vec::new();
        walk(self, &mut HashSet::new(), &mut out);
        out
    }

    /// Parses `f(a, g(b))`-style text. Identifiers use the same character
    /// class as the program language.
    pub fn parse(text: &str) -> Result<Term, StructureError> {
        let chars: Vec<char> = text.chars().collect();
        let mut pos = 0;
        let t = parse_term(&chars, &mut pos)?;
        skip_ws(&chars, &mut pos);
        if pos != chars.len() {
            return Err(StructureError::Syntax { line: 1, message: format!("trailing input in term `{text}`") });
        }
        Ok(t)
    }
}

pub(crate) fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || matches!(c, '_' | '\'' | '.' | '^' | '#' | '$' | '@' | '•' | '~' | '&' | '*' | '|')
        || (!c.is_ascii() && !c.is_whitespace())
}

fn skip_ws(chars: &[char], pos: &mut usize) {
    while *pos < chars.len() && chars[*pos].is_whitespace() {
        *pos += 1;
    }
}

fn parse_term(chars: &[char], pos: &mut usize) -> Result<Term, StructureError> {
    skip_ws(chars, pos);
    let start = *pos;
    while *pos < chars.len() && is_ident_char(chars[*pos]) {
        *pos += 1;
    }
    if start == *pos {
        return Err(StructureError::Syntax { line: 1, message: "expected identifier".into() });
    }
    let head: String = chars[start..*pos].iter().collect();
    skip_ws(chars, pos);
    let mut args = Vec::new();
    if *pos < chars.len() && chars[*pos] == '(' {
        *pos += 1;
        skip_ws(chars, pos);
        if *pos < chars.len() && chars[*pos] == ')' {
            *pos += 1;
        } else {
            loop {
                args.push(parse_term(chars, pos)?);
                skip_ws(chars, pos);
                match chars.get(*pos) {
                    Some(',') => *pos += 1,
                    Some(')') => {
                        *pos += 1;
                        break;
                    }
                    _ => {
                        return Err(StructureError::Syntax { line: 1, message: "expected `,` or `)`".into() })
                    }
                }
            }
        }
    }
    Ok(Term { head, args })
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.head)?;
        if !self.args.is_empty() {
            f.write_str("(")?;
            for (i, a) in self.args.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{a}")?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}
