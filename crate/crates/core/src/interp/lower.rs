//! Name resolution: programs are lowered to identifier indices once, before
//! execution, and each statement gets its preorder number.

use crate::structure::{Kind, Term, Vocabulary};
use crate::syntax::{Guard, Program, Revision, Test};

use super::RunError;

#[derive(Debug, Clone)]
pub(crate) struct LTerm {
    pub head: usize,
    pub args: Vec<LTerm>,
}

#[derive(Debug, Clone)]
pub(crate) enum LTest {
    Def(LTerm),
    Eq(LTerm, LTerm),
    Rel(usize, Vec<LTerm>),
}

#[derive(Debug, Clone)]
pub(crate) enum LGuard {
    True,
    False,
    Test(LTest),
    Not(Box<LGuard>),
    And(Box<LGuard>, Box<LGuard>),
    Or(Box<LGuard>, Box<LGuard>),
}

#[derive(Debug, Clone)]
pub(crate) enum LRev {
    FuncExt { f: usize, args: Vec<LTerm>, value: LTerm },
    FuncContr { f: usize, args: Vec<LTerm> },
    RelExt { r: usize, args: Vec<LTerm> },
    RelContr { r: usize, args: Vec<LTerm> },
    Inception(usize),
    Deletion(usize),
}

#[derive(Debug, Clone)]
pub(crate) enum LProg {
    Rev(usize, LRev),
    Seq(usize, Vec<LProg>),
    If(usize, LGuard, Vec<LProg>, Vec<LProg>),
    Do(usize, LGuard, Vec<LProg>),
    DoVariant(usize, LGuard, Vec<usize>, Vec<LProg>),
}

pub(crate) struct Lowering<'v> {
    vocab: &'v Vocabulary,
    next: usize,
}

impl<'v> Lowering<'v> {
    pub fn new(vocab: &'v Vocabulary) -> Self {
        Lowering { vocab, next: 0 }
    }

    fn id(&self, name: &str, kind: Kind, arity: usize) -> Result<usize, RunError> {
        let i = self.vocab.lookup(name).ok_or_else(|| RunError::Static(format!("unknown identifier `{name}`")))?;
        let s = self.vocab.symbol(i);
        if s.kind != kind || s.arity != arity {
            return Err(RunError::Static(format!(
                "`{name}` is declared {} {}/{} but used as {kind} of arity {arity}",
                s.kind, s.name, s.arity
            )));
        }
        Ok(i)
    }

    pub fn term(&self, t: &Term) -> Result<LTerm, RunError> {
        let head = self.id(&t.head, Kind::Function, t.args.len())?;
        let args = t.args.iter().map(|a| self.term(a)).collect::<Result<_, _>>()?;
        Ok(LTerm { head, args })
    }

    fn terms(&self, ts: &[Term]) -> Result<Vec<LTerm>, RunError> {
        ts.iter().map(|t| self.term(t)).collect()
    }

    pub fn test(&self, t: &Test) -> Result<LTest, RunError> {
        Ok(match t {
            Test::Def(a) => LTest::Def(self.term(a)?),
            Test::Eq(a, b) => LTest::Eq(self.term(a)?, self.term(b)?),
            Test::Rel(r, args) => LTest::Rel(self.id(r, Kind::Relation, args.len())?, self.terms(args)?),
        })
    }

    pub fn guard(&self, g: &Guard) -> Result<LGuard, RunError> {
        Ok(match g {
            Guard::True => LGuard::True,
            Guard::False => LGuard::False,
            Guard::Test(t) => LGuard::Test(self.test(t)?),
            Guard::Not(a) => LGuard::Not(Box::new(self.guard(a)?)),
            Guard::And(a, b) => LGuard::And(Box::new(self.guard(a)?), Box::new(self.guard(b)?)),
            Guard::Or(a, b) => LGuard::Or(Box::new(self.guard(a)?), Box::new(self.guard(b)?)),
        })
    }

    pub fn revision(&self, r: &Revision) -> Result<LRev, RunError> {
        Ok(match r {
            Revision::FuncExt { f, args, value } => LRev::FuncExt {
                f: self.id(f, Kind::Function, args.len())?,
                args: self.terms(args)?,
                value: self.term(value)?,
            },
            Revision::FuncContr { f, args } => {
                LRev::FuncContr { f: self.id(f, Kind::Function, args.len())?, args: self.terms(args)? }
            }
            Revision::RelExt { r, args } => {
                LRev::RelExt { r: self.id(r, Kind::Relation, args.len())?, args: self.terms(args)? }
            }
            Revision::RelContr { r, args } => {
                LRev::RelContr { r: self.id(r, Kind::Relation, args.len())?, args: self.terms(args)? }
            }
            Revision::Inception(c) => LRev::Inception(self.id(c, Kind::Function, 0)?),
            Revision::Deletion(c) => LRev::Deletion(self.id(c, Kind::Function, 0)?),
        })
    }

    fn block(&mut self, ps: &[Program]) -> Result<Vec<LProg>, RunError> {
        ps.iter().map(|p| self.program(p)).collect()
    }

    /// Lowers a statement; numbers are assigned in preorder.
    pub fn program(&mut self, p: &Program) -> Result<LProg, RunError> {
        let id = self.next;
        self.next += 1;
        Ok(match p {
            Program::Rev(r) => LProg::Rev(id, self.revision(r)?),
            Program::Seq(ps) => LProg::Seq(id, self.block(ps)?),
            Program::If { guard, then, els } => {
                let g = self.guard(guard)?;
                let t = self.block(then)?;
                let e = self.block(els)?;
                LProg::If(id, g, t, e)
            }
            Program::Do { guard, body } => {
                let g = self.guard(guard)?;
                LProg::Do(id, g, self.block(body)?)
            }
            Program::DoVariant { guard, variant, body } => {
                let g = self.guard(guard)?;
                let mut vs = Vec::with_capacity(variant.len());
                for v in variant {
                    let i = self
                        .vocab
                        .lookup(v)
                        .ok_or_else(|| RunError::Static(format!("unknown variant component `{v}`")))?;
                    vs.push(i);
                }
                LProg::DoVariant(id, g, vs, self.block(body)?)
            }
        })
    }

    pub fn body(&mut self, ps: &[Program]) -> Result<Vec<LProg>, RunError> {
        self.block(ps)
    }
}

/// Statements of a body in the preorder used for statement numbers.
pub fn preorder(body: &[Program]) -> Vec<&Program> {
    fn walk<'a>(p: &'a Program, out: &mut Vec<&'a Program>) {
        out.push(p);
        for (_, b) in p.blocks() {
            b.iter().for_each(|q| walk(q, out));
        }
    }
    let mut out = Vec::new();
    body.iter().for_each(|p| walk(p, &mut out));
    out
}
