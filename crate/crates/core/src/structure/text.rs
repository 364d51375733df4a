//! Plain-text reading and writing of structures.
//!
//! ```text
//! fn e/0
//! fn 0/1
//! node 0
//! node 1
//! e () -> 0
//! 0 (0) -> 1
//! ```
//!
//! Shorthand headers expand to word or term structures; several headers
//! (and an explicit part, if any) are combined with [`oplus`].

use std::collections::HashMap;
use std::fmt::Write as _;

use super::{
    is_ident_char, oplus, term_structure, word_structure_with, Kind, NodeId, PartialStructure, StructureError,
    Term, Tuple, Vocabulary,
};

fn syntax(line: usize, message: impl Into<String>) -> StructureError {
    StructureError::Syntax { line, message: message.into() }
}

struct Cursor {
    chars: Vec<char>,
    pos: usize,
    line: usize,
}

impl Cursor {
    fn new(src: &str, line: usize) -> Self {
        Cursor { chars: src.chars().collect(), pos: 0, line }
    }

    fn ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.ws();
        self.chars.get(self.pos).copied()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), StructureError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(syntax(self.line, format!("expected `{c}`")))
        }
    }

    fn ident(&mut self) -> Result<String, StructureError> {
        self.ws();
        let start = self.pos;
        while self.pos < self.chars.len() && is_ident_char(self.chars[self.pos]) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(syntax(self.line, "expected identifier"));
        }
        Ok(self.chars[start..self.pos].iter().collect())
    }

    /// Identifier followed by `/arity`; the identifier may itself be numeric.
    fn decl(&mut self) -> Result<(String, usize), StructureError> {
        self.ws();
        let start = self.pos;
        while self.pos < self.chars.len() && self.chars[self.pos] != '/' && !self.chars[self.pos].is_whitespace() {
            self.pos += 1;
        }
        let name: String = self.chars[start..self.pos].iter().collect();
        if name.is_empty() || !name.chars().all(is_ident_char) {
            return Err(syntax(self.line, format!("bad identifier `{name}`")));
        }
        self.expect('/')?;
        Ok((name, self.number()? as usize))
    }

    fn number(&mut self) -> Result<u32, StructureError> {
        self.ws();
        let start = self.pos;
        while self.pos < self.chars.len() && self.chars[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        let s: String = self.chars[start..self.pos].iter().collect();
        s.parse().map_err(|_| syntax(self.line, "expected a natural number"))
    }

    fn quoted(&mut self) -> Result<String, StructureError> {
        self.expect('"')?;
        let start = self.pos;
        while self.pos < self.chars.len() && self.chars[self.pos] != '"' {
            self.pos += 1;
        }
        if self.pos == self.chars.len() {
            return Err(syntax(self.line, "unterminated string"));
        }
        let s = self.chars[start..self.pos].iter().collect();
        self.pos += 1;
        Ok(s)
    }

    fn done(&mut self) -> bool {
        self.peek().is_none()
    }
}

fn word_header(c: &mut Cursor) -> Result<PartialStructure, StructureError> {
    let mut nil = None;
    let mut alpha: Vec<(char, String)> = Vec::new();
    loop {
        match c.peek() {
            Some('"') => break,
            None => return Err(syntax(c.line, "word header needs a quoted string")),
            _ => {}
        }
        let key = c.ident()?;
        c.expect('=')?;
        match key.as_str() {
            "nil" => nil = Some(c.ident()?),
            "alpha" => loop {
                c.ws();
                let ch = *c.chars.get(c.pos).ok_or_else(|| syntax(c.line, "expected alphabet character"))?;
                c.pos += 1;
                c.expect(':')?;
                alpha.push((ch, c.ident()?));
                if !c.eat(',') {
                    break;
                }
            },
            other => return Err(syntax(c.line, format!("unknown word option `{other}`"))),
        }
    }
    let w = c.quoted()?;
    let nil = nil.ok_or_else(|| syntax(c.line, "word header needs nil=<token>"))?;
    let pairs: Vec<(char, &str)> = alpha.iter().map(|(ch, p)| (*ch, p.as_str())).collect();
    word_structure_with(&pairs, &nil, &w)
}

fn infer_vocab(t: &Term, v: &mut Vocabulary) -> Result<(), StructureError> {
    v.ensure(&t.head, Kind::Function, t.args.len())?;
    t.args.iter().try_for_each(|a| infer_vocab(a, v))
}

fn term_header(c: &mut Cursor) -> Result<PartialStructure, StructureError> {
    let text = c.quoted()?;
    let t = Term::parse(&text).map_err(|_| syntax(c.line, format!("bad term `{text}`")))?;
    let mut v = Vocabulary::new();
    infer_vocab(&t, &mut v)?;
    term_structure(&t, &v)
}

/// Reads a structure from its text form.
pub fn parse_structure(text: &str) -> Result<PartialStructure, StructureError> {
    let mut vocab = Vocabulary::new();
    let mut nodes: Vec<u32> = Vec::new();
    let mut entries: Vec<(usize, String, Vec<u32>, Option<u32>)> = Vec::new();
    let mut headers = Vec::new();
    let mut explicit = false;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('%').next().unwrap_or("");
        let mut c = Cursor::new(line, line_no);
        if c.done() {
            continue;
        }
        let save = c.pos;
        let first = c.ident().ok();
        let is_entry = c.peek() == Some('(');
        match first.as_deref() {
            Some("fn") | Some("rel") if !is_entry => {
                let kind = if first.as_deref() == Some("fn") { Kind::Function } else { Kind::Relation };
                while !c.done() {
                    let (name, arity) = c.decl()?;
                    vocab.add(&name, kind, arity).map_err(|e| syntax(line_no, e.to_string()))?;
                }
                explicit = true;
            }
            Some("node") if !is_entry => {
                while !c.done() {
                    nodes.push(c.number()?);
                }
                explicit = true;
            }
            Some("word") if !is_entry => headers.push(word_header(&mut c)?),
            Some("term") if !is_entry => headers.push(term_header(&mut c)?),
            _ => {
                c.pos = save;
                let name = c.ident()?;
                c.expect('(')?;
                let mut args = Vec::new();
                if !c.eat(')') {
                    loop {
                        args.push(c.number()?);
                        if c.eat(')') {
                            break;
                        }
                        c.expect(',')?;
                    }
                }
                let value = if c.eat('-') {
                    c.expect('>')?;
                    Some(c.number()?)
                } else {
                    None
                };
                entries.push((line_no, name, args, value));
                explicit = true;
            }
        }
        if !c.done() {
            return Err(syntax(line_no, "trailing input"));
        }
    }
    let mut parts = Vec::new();
    if explicit {
        let mut s = PartialStructure::new(vocab);
        for n in &nodes {
            if s.contains_node(NodeId(*n)) {
                return Err(syntax(0, format!("node {n} declared twice")));
            }
            s.insert_node(NodeId(*n));
        }
        for (line, name, args, value) in entries {
            let id = s.id(&name).map_err(|e| syntax(line, e.to_string()))?;
            let kind = s.vocab().symbol(id).kind;
            let args: Tuple = args.into_iter().map(NodeId).collect();
            let res = match (kind, value) {
                (Kind::Function, Some(v)) => s.define(id, &args, NodeId(v)).map(|_| ()),
                (Kind::Relation, None) => s.relate(id, &args).map(|_| ()),
                (Kind::Function, None) => Err(syntax(line, format!("function entry `{name}` needs `-> <node>`"))),
                (Kind::Relation, Some(_)) => Err(syntax(line, format!("relation `{name}` takes no value"))),
            };
            res.map_err(|e| match e {
                StructureError::Syntax { .. } => e,
                other => syntax(line, other.to_string()),
            })?;
        }
        parts.push(s);
    }
    parts.extend(headers);
    match parts.len() {
        0 => Err(StructureError::EmptyUniverse),
        1 => Ok(parts.pop().expect("one part")),
        _ => oplus(&parts),
    }
}

/// Writes a structure in the explicit text form, with its own node ids.
pub fn print_structure(s: &PartialStructure) -> String {
    let mut out = String::new();
    for sym in s.vocab().iter() {
        let _ = writeln!(out, "{} {}/{}", sym.kind, sym.name, sym.arity);
    }
    for n in s.nodes() {
        let _ = writeln!(out, "node {n}");
    }
    let renum: HashMap<NodeId, NodeId> = s.nodes().map(|n| (n, n)).collect();
    write_entries(s, &renum, &mut out);
    out
}

/// Emits all entries whose nodes are in `labels`, under the relabeling,
/// sorted per identifier in declaration order.
pub(super) fn write_entries(s: &PartialStructure, labels: &HashMap<NodeId, NodeId>, out: &mut String) {
    let join = |args: &[NodeId]| args.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(",");
    for (id, sym) in s.vocab().iter().enumerate() {
        match sym.kind {
            Kind::Function => {
                let mut rows: Vec<(Vec<NodeId>, NodeId)> = s
                    .function_entries(id)
                    .filter_map(|(args, v)| {
                        let a: Option<Vec<NodeId>> = args.iter().map(|x| labels.get(x).copied()).collect();
                        Some((a?, *labels.get(&v)?))
                    })
                    .collect();
                rows.sort();
                for (a, v) in rows {
                    let _ = writeln!(out, "{} ({}) -> {}", sym.name, join(&a), v);
                }
            }
            Kind::Relation => {
                let mut rows: Vec<Vec<NodeId>> = s
                    .relation_tuples(id)
                    .filter_map(|args| args.iter().map(|x| labels.get(x).copied()).collect())
                    .collect();
                rows.sort();
                for a in rows {
                    let _ = writeln!(out, "{} ({})", sym.name, join(&a));
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structure::{canonical_form, word_structure};

    #[test]
    fn explicit_round_trip() {
        let s = word_structure(&["0", "1"], "e", "011").unwrap();
        let text = print_structure(&s);
        let back = parse_structure(&text).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn word_header_matches_builder() {
        let s = parse_structure("% input\nword nil=e alpha=0:0,1:1 \"011\"\n").unwrap();
        let t = word_structure(&["0", "1"], "e", "011").unwrap();
        assert_eq!(canonical_form(&s), canonical_form(&t));
    }

    #[test]
    fn headers_combine() {
        let s = parse_structure("word nil=z alpha=s:s \"sss\"\nword nil=e alpha=0:0,1:1 \"01\"\n").unwrap();
        assert_eq!(s.node_count(), 7);
        assert_eq!(s.size().0, 5);
    }

    #[test]
    fn term_header() {
        let s = parse_structure("term \"g(c, c)\"").unwrap();
        assert_eq!(s.node_count(), 2);
        assert!(s.token("•").is_some());
    }

    #[test]
    fn relation_entries_and_errors() {
        let s = parse_structure("rel R/2\nfn c/0\nnode 0 1\nR (0,1)\nR(1,1)\nc () -> 0\n").unwrap();
        assert_eq!(s.size().0, 2);
        assert!(parse_structure("fn f/1\nnode 0\nf (0) -> 3\n").is_err());
        assert!(parse_structure("fn f/1\nnode 0\ng (0) -> 0\n").is_err());
        assert!(parse_structure("").is_err());
    }
}
