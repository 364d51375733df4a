//! Abstract syntax, concrete grammar, and printer for ST and STV programs.
//!
//! ```text
//! vocab { fn e/0 fn 0/1 fn 1/1 fn a/0 }
//! a <- e;
//! do [def 0(a) or def 1(a)] {
//!   if [def 0(a)] { a := 0(a) } { a := 1(a) }
//! }
//! ```

mod build;
mod parser;
mod print;

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::structure::{Term, Vocabulary};

pub use build::ProgramBuilder;
pub use parser::{parse_body, parse_guard, parse_program, Parser};
pub use print::{guard_text, pretty_print, print_body, revision_text};

/// Words that cannot be used as identifiers in program text.
pub const KEYWORDS: &[&str] =
    &["vocab", "fn", "rel", "do", "if", "def", "not", "and", "or", "true", "false", "drop", "new", "del"];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SyntaxError {
    #[error("{line}:{col}: {message}")]
    Parse { line: usize, col: usize, message: String },
    #[error("{line}:{col}: unknown identifier `{name}`")]
    UnknownIdentifier { line: usize, col: usize, name: String },
    #[error("{line}:{col}: `{name}` expects {expected} arguments, found {found}")]
    Arity { line: usize, col: usize, name: String, expected: usize, found: usize },
    #[error("{line}:{col}: `{name}` is a {found}, expected a {expected}")]
    Kind { line: usize, col: usize, name: String, expected: String, found: String },
    #[error("{line}:{col}: variant component `{name}` must have positive arity")]
    NullaryVariant { line: usize, col: usize, name: String },
    #[error("{line}:{col}: `{name}` is a reserved word")]
    Reserved { line: usize, col: usize, name: String },
    #[error("vocabulary: {0}")]
    Vocabulary(String),
}

/// An elementary test on the current structure.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub enum Test {
    /// The address is defined.
    Def(Term),
    /// Both addresses are defined and denote the same node.
    Eq(Term, Term),
    /// All addresses are defined and their tuple is in the relation.
    Rel(String, Vec<Term>),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub enum Guard {
    True,
    False,
    Test(Test),
    Not(Box<Guard>),
    And(Box<Guard>, Box<Guard>),
    Or(Box<Guard>, Box<Guard>),
}

impl Guard {
    pub fn def(t: Term) -> Guard {
        Guard::Test(Test::Def(t))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(g: Guard) -> Guard {
        Guard::Not(Box::new(g))
    }

    pub fn and(a: Guard, b: Guard) -> Guard {
        Guard::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Guard, b: Guard) -> Guard {
        Guard::Or(Box::new(a), Box::new(b))
    }

    /// Disjunction of all guards, `false` when empty.
    pub fn any(gs: impl IntoIterator<Item = Guard>) -> Guard {
        gs.into_iter().reduce(Guard::or).unwrap_or(Guard::False)
    }

    /// Conjunction of all guards, `true` when empty.
    pub fn all(gs: impl IntoIterator<Item = Guard>) -> Guard {
        gs.into_iter().reduce(Guard::and).unwrap_or(Guard::True)
    }

    pub fn tests(&self) -> Vec<&Test> {
        fn walk<'a>(g: &'a Guard, out: &mut Vec<&'a Test>) {
            match g {
                Guard::True | Guard::False => {}
                Guard::Test(t) => out.push(t),
                Guard::Not(a) => walk(a, out),
                Guard::And(a, b) | Guard::Or(a, b) => {
                    walk(a, out);
                    walk(b, out);
                }
            }
        }
        let mut out = Vec::new();
        walk(self, &mut out);
        out
    }
}

/// One of the six atomic structure updates.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub enum Revision {
    FuncExt { f: String, args: Vec<Term>, value: Term },
    FuncContr { f: String, args: Vec<Term> },
    RelExt { r: String, args: Vec<Term> },
    RelContr { r: String, args: Vec<Term> },
    Inception(String),
    Deletion(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum RevisionKind {
    FuncExt,
    FuncContr,
    RelExt,
    RelContr,
    Inception,
    Deletion,
}

impl RevisionKind {
    pub const ALL: [RevisionKind; 6] = [
        RevisionKind::FuncExt,
        RevisionKind::FuncContr,
        RevisionKind::RelExt,
        RevisionKind::RelContr,
        RevisionKind::Inception,
        RevisionKind::Deletion,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RevisionKind::FuncExt => "fext",
            RevisionKind::FuncContr => "fcontr",
            RevisionKind::RelExt => "rext",
            RevisionKind::RelContr => "rcontr",
            RevisionKind::Inception => "new",
            RevisionKind::Deletion => "del",
        }
    }
}

impl fmt::Display for RevisionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl Revision {
    pub fn kind(&self) -> RevisionKind {
        match self {
            Revision::FuncExt { .. } => RevisionKind::FuncExt,
            Revision::FuncContr { .. } => RevisionKind::FuncContr,
            Revision::RelExt { .. } => RevisionKind::RelExt,
            Revision::RelContr { .. } => RevisionKind::RelContr,
            Revision::Inception(_) => RevisionKind::Inception,
            Revision::Deletion(_) => RevisionKind::Deletion,
        }
    }

    /// The identifier an extension adds to, if this is an extension.
    pub fn eigen_extended(&self) -> Option<&str> {
        match self {
            Revision::FuncExt { f, .. } => Some(f),
            Revision::RelExt { r, .. } => Some(r),
            _ => None,
        }
    }

    /// Extensions and inceptions may enlarge the structure.
    pub fn is_growing(&self) -> bool {
        matches!(self, Revision::FuncExt { .. } | Revision::RelExt { .. } | Revision::Inception(_))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub enum Program {
    Rev(Revision),
    Seq(Vec<Program>),
    If { guard: Guard, then: Vec<Program>, els: Vec<Program> },
    /// Unannotated loop: repeats while the guard holds.
    Do { guard: Guard, body: Vec<Program> },
    /// Loop with a variant: re-entered only after a pass that removed a
    /// tuple from some variant component.
    DoVariant { guard: Guard, variant: Vec<String>, body: Vec<Program> },
}

impl Program {
    /// Child blocks with their location labels.
    pub fn blocks(&self) -> Vec<(&'static str, &[Program])> {
        match self {
            Program::Rev(_) => vec![],
            Program::Seq(b) => vec![("", b.as_slice())],
            Program::If { then, els, .. } => vec![("then", then.as_slice()), ("else", els.as_slice())],
            Program::Do { body, .. } | Program::DoVariant { body, .. } => vec![("body", body.as_slice())],
        }
    }

    fn blocks_mut(&mut self) -> Vec<&mut Vec<Program>> {
        match self {
            Program::Rev(_) => vec![],
            Program::Seq(b) => vec![b],
            Program::If { then, els, .. } => vec![then, els],
            Program::Do { body, .. } | Program::DoVariant { body, .. } => vec![body],
        }
    }

    pub fn guard(&self) -> Option<&Guard> {
        match self {
            Program::If { guard, .. } | Program::Do { guard, .. } | Program::DoVariant { guard, .. } => Some(guard),
            _ => None,
        }
    }

    /// Renames identifiers everywhere (revisions, guards, variants).
    pub fn rename(&mut self, map: &dyn Fn(&str) -> String) {
        fn term(t: &mut Term, map: &dyn Fn(&str) -> String) {
            t.head = map(&t.head);
            t.args.iter_mut().for_each(|a| term(a, map));
        }
        fn guard(g: &mut Guard, map: &dyn Fn(&str) -> String) {
            match g {
                Guard::True | Guard::False => {}
                Guard::Test(Test::Def(t)) => term(t, map),
                Guard::Test(Test::Eq(a, b)) => {
                    term(a, map);
                    term(b, map);
                }
                Guard::Test(Test::Rel(r, args)) => {
                    *r = map(r);
                    args.iter_mut().for_each(|a| term(a, map));
                }
                Guard::Not(a) => guard(a, map),
                Guard::And(a, b) | Guard::Or(a, b) => {
                    guard(a, map);
                    guard(b, map);
                }
            }
        }
        match self {
            Program::Rev(r) => match r {
                Revision::FuncExt { f, args, value } => {
                    *f = map(f);
                    args.iter_mut().for_each(|a| term(a, map));
                    term(value, map);
                }
                Revision::FuncContr { f, args } => {
                    *f = map(f);
                    args.iter_mut().for_each(|a| term(a, map));
                }
                Revision::RelExt { r, args } | Revision::RelContr { r, args } => {
                    *r = map(r);
                    args.iter_mut().for_each(|a| term(a, map));
                }
                Revision::Inception(c) | Revision::Deletion(c) => *c = map(c),
            },
            Program::If { guard: g, .. } | Program::Do { guard: g, .. } => guard(g, map),
            Program::DoVariant { guard: g, variant, .. } => {
                guard(g, map);
                variant.iter_mut().for_each(|v| *v = map(v));
            }
            Program::Seq(_) => {}
        }
        for b in self.blocks_mut() {
            b.iter_mut().for_each(|p| p.rename(map));
        }
    }

    /// Every revision in this subtree with its location.
    pub fn revisions<'a>(&'a self, loc: &Location, out: &mut Vec<(Location, &'a Revision)>) {
        if let Program::Rev(r) = self {
            out.push((loc.clone(), r));
        }
        for (label, block) in self.blocks() {
            for (i, p) in block.iter().enumerate() {
                p.revisions(&loc.child(label, i), out);
            }
        }
    }

    pub fn contains_plain_loop(&self) -> bool {
        matches!(self, Program::Do { .. })
            || self.blocks().iter().any(|(_, b)| b.iter().any(Program::contains_plain_loop))
    }

    pub fn loop_count(&self) -> usize {
        let own = usize::from(matches!(self, Program::Do { .. } | Program::DoVariant { .. }));
        own + self.blocks().iter().flat_map(|(_, b)| b.iter()).map(Program::loop_count).sum::<usize>()
    }
}

/// A program together with the vocabulary it runs over.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Script {
    pub vocab: Vocabulary,
    pub body: Vec<Program>,
}

impl Script {
    pub fn revisions(&self) -> Vec<(Location, &Revision)> {
        let mut out = Vec::new();
        for (i, p) in self.body.iter().enumerate() {
            p.revisions(&Location::root().child("", i), &mut out);
        }
        out
    }

    pub fn is_plain_st(&self) -> bool {
        !self.body.iter().any(|p| {
            fn has_variant(p: &Program) -> bool {
                matches!(p, Program::DoVariant { .. })
                    || p.blocks().iter().any(|(_, b)| b.iter().any(has_variant))
            }
            has_variant(p)
        })
    }

    pub fn loop_count(&self) -> usize {
        self.body.iter().map(Program::loop_count).sum()
    }
}

impl fmt::Display for Script {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&pretty_print(self))
    }
}

/// Structural path to a statement, e.g. `/3/body/1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Location(pub String);

impl Location {
    pub fn root() -> Self {
        Location(String::new())
    }

    pub fn child(&self, label: &str, index: usize) -> Location {
        if label.is_empty() {
            Location(format!("{}/{}", self.0, index))
        } else {
            Location(format!("{}/{}/{}", self.0, label, index))
        }
    }

    pub fn is_within(&self, other: &Location) -> bool {
        self.0 == other.0 || self.0.starts_with(&format!("{}/", other.0))
    }
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            f.write_str("/")
        } else {
            f.write_str(&self.0)
        }
    }
}
