//! Primitive recursion over free term algebras: definitions, a direct
//! evaluator, a text format, and compilation to STV programs.

mod compile;
mod parse;

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::structure::{
    oplus, term_structure_rooted, PartialStructure, StructureError, Term, Vocabulary, ROOT_TOKEN,
};
use crate::syntax::SyntaxError;

pub use compile::{bound_transform, compile_explicit, compile_pr, CompiledPr};
pub use parse::parse_module;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PrError {
    #[error("{line}:{col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },
    #[error("unknown name `{0}`")]
    UnknownName(String),
    #[error("`{0}` is already defined")]
    Duplicate(String),
    #[error("{context}: expected arity {expected}, found {found}")]
    Arity { context: String, expected: usize, found: usize },
    #[error("projection {index} out of range for arity {arity}")]
    Projection { index: usize, arity: usize },
    #[error("recurrence lacks a case for constructor `{0}`")]
    MissingCase(String),
    #[error("recurrence has a case for `{0}`, which is not a constructor")]
    ExtraCase(String),
    #[error("the algebra needs at least one nullary constructor")]
    NoNullary,
    #[error("{0}")]
    Unsupported(String),
    #[error("argument is not a term of the algebra: {0}")]
    BadArgument(String),
    #[error(transparent)]
    Structure(#[from] StructureError),
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
}

/// Constructors of a free term algebra, in declaration order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Signature {
    constructors: Vec<(String, usize)>,
}

impl Signature {
    pub fn new<S: Into<String>>(constructors: impl IntoIterator<Item = (S, usize)>) -> Result<Self, PrError> {
        let mut out = Vec::<(String, usize)>::new();
        for (c, k) in constructors {
            let c = c.into();
            if out.iter().any(|(d, _)| *d == c) || c == ROOT_TOKEN {
                return Err(PrError::Duplicate(c));
            }
            out.push((c, k));
        }
        if !out.iter().any(|(_, k)| *k == 0) {
            return Err(PrError::NoNullary);
        }
        Ok(Signature { constructors: out })
    }

    pub fn arity(&self, c: &str) -> Option<usize> {
        self.constructors.iter().find(|(d, _)| d == c).map(|(_, k)| *k)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, usize)> {
        self.constructors.iter().map(|(c, k)| (c.as_str(), *k))
    }

    pub fn vocabulary(&self) -> Vocabulary {
        Vocabulary::functional(self.iter()).expect("constructor names are distinct")
    }
}

/// A primitive-recursive function over a signature. Projection indices are
/// 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum PrDef {
    Constructor(String),
    Projection { index: usize, arity: usize },
    /// `outer(inner_1(x̄), .., inner_m(x̄))` with `x̄` of length `arity`.
    Composition { outer: Box<PrDef>, inner: Vec<PrDef>, arity: usize },
    /// `f(c(z̄), x̄) = g_c(x̄, z̄, f(z_1, x̄), .., f(z_k, x̄))`, one `g_c` per
    /// constructor; `params` is the length of `x̄`.
    Recurrence { params: usize, cases: BTreeMap<String, PrDef> },
    /// A definition of the enclosing module, by name.
    Call(String),
}

impl fmt::Display for PrDef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PrDef::Constructor(c) | PrDef::Call(c) => write!(f, "{c}"),
            PrDef::Projection { index, arity } => write!(f, "proj({index},{arity})"),
            PrDef::Composition { outer, inner, arity } => {
                write!(f, "comp[{arity}]({outer};")?;
                for (i, h) in inner.iter().enumerate() {
                    write!(f, "{}{h}", if i == 0 { " " } else { ", " })?;
                }
                write!(f, ")")
            }
            PrDef::Recurrence { params, cases } => {
                write!(f, "rec[{params}] {{")?;
                for (c, g) in cases {
                    write!(f, " {c} => {g};")?;
                }
                write!(f, " }}")
            }
        }
    }
}

/// A signature and named definitions, each referring only to earlier ones.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PrModule {
    pub algebra: Signature,
    defs: BTreeMap<String, PrDef>,
    order: Vec<String>,
}

impl PrModule {
    pub fn new(algebra: Signature) -> Self {
        PrModule { algebra, defs: BTreeMap::new(), order: Vec::new() }
    }

    pub fn parse(text: &str) -> Result<Self, PrError> {
        parse_module(text)
    }

    /// Adds a definition after checking its arities; returns its arity.
    pub fn define(&mut self, name: &str, def: PrDef) -> Result<usize, PrError> {
        if self.defs.contains_key(name) || self.algebra.arity(name).is_some() {
            return Err(PrError::Duplicate(name.to_string()));
        }
        let k = self.arity(&def)?;
        self.defs.insert(name.to_string(), def);
        self.order.push(name.to_string());
        Ok(k)
    }

    pub fn get(&self, name: &str) -> Option<&PrDef> {
        self.defs.get(name)
    }

    /// Definition names in the order they were added.
    pub fn names(&self) -> &[String] {
        &self.order
    }

    /// Arity of `def`, validating it against the signature.
    pub fn arity(&self, def: &PrDef) -> Result<usize, PrError> {
        match def {
            PrDef::Constructor(c) => self.algebra.arity(c).ok_or_else(|| PrError::UnknownName(c.clone())),
            PrDef::Call(n) => self.arity(self.get(n).ok_or_else(|| PrError::UnknownName(n.clone()))?),
            PrDef::Projection { index, arity } => {
                if *index == 0 || index > arity {
                    return Err(PrError::Projection { index: *index, arity: *arity });
                }
                Ok(*arity)
            }
            PrDef::Composition { outer, inner, arity } => {
                let k = self.arity(outer)?;
                if k != inner.len() {
                    return Err(PrError::Arity { context: format!("outer function {outer}"), expected: k, found: inner.len() });
                }
                for h in inner {
                    let m = self.arity(h)?;
                    if m != *arity {
                        return Err(PrError::Arity { context: format!("inner function {h}"), expected: *arity, found: m });
                    }
                }
                Ok(*arity)
            }
            PrDef::Recurrence { params, cases } => {
                for c in cases.keys() {
                    if self.algebra.arity(c).is_none() {
                        return Err(PrError::ExtraCase(c.clone()));
                    }
                }
                for (c, k) in self.algebra.iter() {
                    let g = cases.get(c).ok_or_else(|| PrError::MissingCase(c.to_string()))?;
                    let m = self.arity(g)?;
                    if m != params + 2 * k {
                        return Err(PrError::Arity { context: format!("case {c}"), expected: params + 2 * k, found: m });
                    }
                }
                Ok(params + 1)
            }
        }
    }

    /// The named definition, or an error naming it.
    pub fn lookup(&self, name: &str) -> Result<&PrDef, PrError> {
        self.get(name).ok_or_else(|| PrError::UnknownName(name.to_string()))
    }
}

/// Evaluates `def` on closed terms of the module's algebra.
pub fn eval_pr(module: &PrModule, def: &PrDef, args: &[Term]) -> Result<Term, PrError> {
    let k = module.arity(def)?;
    if k != args.len() {
        return Err(PrError::Arity { context: format!("{def}"), expected: k, found: args.len() });
    }
    let vocab = module.algebra.vocabulary();
    for a in args {
        a.check(&vocab).map_err(|_| PrError::BadArgument(a.to_string()))?;
    }
    Ok(eval(module, def, args))
}

fn eval(module: &PrModule, def: &PrDef, args: &[Term]) -> Term {
    match def {
        PrDef::Constructor(c) => Term::app(c.clone(), args.to_vec()),
        PrDef::Call(n) => eval(module, &module.defs[n], args),
        PrDef::Projection { index, .. } => args[index - 1].clone(),
        PrDef::Composition { outer, inner, .. } => {
            let vals: Vec<Term> = inner.iter().map(|h| eval(module, h, args)).collect();
            eval(module, outer, &vals)
        }
        PrDef::Recurrence { cases, .. } => {
            let mut memo = HashMap::new();
            recur(module, cases, &args[0], &args[1..], &mut memo)
        }
    }
}

fn recur(
    module: &PrModule,
    cases: &BTreeMap<String, PrDef>,
    w: &Term,
    xs: &[Term],
    memo: &mut HashMap<Term, Term>,
) -> Term {
    if let Some(v) = memo.get(w) {
        return v.clone();
    }
    let mut gargs = xs.to_vec();
    gargs.extend(w.args.iter().cloned());
    for z in &w.args {
        let y = recur(module, cases, z, xs, memo);
        gargs.push(y);
    }
    let v = eval(module, &cases[&w.head], &gargs);
    memo.insert(w.clone(), v.clone());
    v
}

/// Name of constructor `c` in the copy of the algebra holding argument `i`
/// (1-based) of a compiled function.
pub fn input_name(c: &str, i: usize) -> String {
    format!("{c}.{i}")
}

/// Token denoting argument `i` in the input of a compiled function.
pub fn input_root(i: usize) -> String {
    format!("{ROOT_TOKEN}.{i}")
}

fn renamed(t: &Term, i: usize) -> Term {
    Term::app(input_name(&t.head, i), t.args.iter().map(|a| renamed(a, i)).collect())
}

/// Vocabulary of argument `i` of a compiled function.
pub fn input_vocabulary(algebra: &Signature, i: usize) -> Vocabulary {
    let mut v = Vocabulary::new();
    for (c, k) in algebra.iter() {
        v.add_function(&input_name(c, i), k).expect("distinct names");
    }
    v.add_function(&input_root(i), 0).expect("distinct names");
    v
}

/// The input structure of a compiled function applied to `args`: the sum
/// of the argument term structures, argument `i` over its own copy of the
/// algebra and rooted at [`input_root`].
pub fn pr_input(algebra: &Signature, args: &[Term]) -> Result<PartialStructure, PrError> {
    let vocab = algebra.vocabulary();
    let mut parts = Vec::new();
    for (i, a) in args.iter().enumerate() {
        a.check(&vocab).map_err(|_| PrError::BadArgument(a.to_string()))?;
        let v = input_vocabulary(algebra, i + 1);
        parts.push(term_structure_rooted(&renamed(a, i + 1), &v, &input_root(i + 1))?);
    }
    Ok(oplus(&parts)?)
}

/// Identifiers kept in the output of a compiled function: the constructors
/// and `•`.
pub fn pr_output_names(algebra: &Signature) -> Vec<String> {
    algebra.iter().map(|(c, _)| c.to_string()).chain([ROOT_TOKEN.to_string()]).collect()
}

/// The term denoted by token `root` in a structure whose functions are
/// constructors of `algebra`; `None` if the token is undefined or some node
/// is not built by a constructor.
pub fn read_term(s: &PartialStructure, algebra: &Signature, root: &str) -> Option<Term> {
    let mut built: HashMap<crate::structure::NodeId, (String, Vec<crate::structure::NodeId>)> = HashMap::new();
    for (c, _) in algebra.iter() {
        let Some(f) = s.vocab().lookup(c) else { continue };
        for (args, v) in s.function_entries(f) {
            built.entry(v).or_insert_with(|| (c.to_string(), args.to_vec()));
        }
    }
    fn go(
        n: crate::structure::NodeId,
        built: &HashMap<crate::structure::NodeId, (String, Vec<crate::structure::NodeId>)>,
        memo: &mut HashMap<crate::structure::NodeId, Term>,
        depth: usize,
    ) -> Option<Term> {
        if let Some(t) = memo.get(&n) {
            return Some(t.clone());
        }
        if depth > built.len() {
            return None;
        }
        let (c, args) = built.get(&n)?;
        let args = args.iter().map(|a| go(*a, built, memo, depth + 1)).collect::<Option<Vec<_>>>()?;
        let t = Term::app(c.clone(), args);
        memo.insert(n, t.clone());
        Some(t)
    }
    go(s.token(root)?, &built, &mut HashMap::new(), 0)
}

/// Natural number `n` as a term over `z/0, s/1`.
pub fn numeral(n: usize) -> Term {
    Term::chain("z", &vec!["s"; n])
}

/// Inverse of [`numeral`].
pub fn numeral_value(t: &Term) -> Option<usize> {
    let mut n = 0;
    let mut cur = t;
    loop {
        match (cur.head.as_str(), cur.args.as_slice()) {
            ("z", []) => return Some(n),
            ("s", [a]) => {
                n += 1;
                cur = a;
            }
            _ => return None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nat() -> PrModule {
        PrModule::parse(
            "algebra { z/0 s/1 }
             def add = rec { z(x) => x; s(n, x)[y] => s(y) }
             def double(x) = add(x, x)
             def mul = rec { z(x) => z; s(n, x)[y] => add(x, y) }",
        )
        .unwrap()
    }

    #[test]
    fn arithmetic() {
        let m = nat();
        for a in 0..5 {
            for b in 0..5 {
                let add = eval_pr(&m, &PrDef::Call("add".into()), &[numeral(a), numeral(b)]).unwrap();
                assert_eq!(numeral_value(&add), Some(a + b));
                let mul = eval_pr(&m, &PrDef::Call("mul".into()), &[numeral(a), numeral(b)]).unwrap();
                assert_eq!(numeral_value(&mul), Some(a * b));
            }
            let d = eval_pr(&m, m.lookup("double").unwrap(), &[numeral(a)]).unwrap();
            assert_eq!(numeral_value(&d), Some(2 * a));
        }
    }

    #[test]
    fn arity_errors() {
        let mut m = nat();
        let bad = PrDef::Composition {
            outer: Box::new(PrDef::Call("add".into())),
            inner: vec![PrDef::Projection { index: 1, arity: 1 }],
            arity: 1,
        };
        assert!(matches!(m.define("bad", bad), Err(PrError::Arity { .. })));
        let mut cases = BTreeMap::new();
        cases.insert("z".to_string(), PrDef::Projection { index: 1, arity: 1 });
        let r = PrDef::Recurrence { params: 1, cases };
        assert_eq!(m.define("partial", r), Err(PrError::MissingCase("s".into())));
        assert!(eval_pr(&m, &PrDef::Call("add".into()), &[numeral(1)]).is_err());
        assert!(Signature::new([("s", 1)]).is_err());
    }

    #[test]
    fn input_and_readback() {
        let m = nat();
        let s = pr_input(&m.algebra, &[numeral(2), numeral(0)]).unwrap();
        assert_eq!(s.node_count(), 4);
        assert!(s.token("•.1").is_some() && s.token("z.2") == s.token("•.2"));
        let t = crate::structure::term_structure(&numeral(3), &m.algebra.vocabulary()).unwrap();
        assert_eq!(read_term(&t, &m.algebra, ROOT_TOKEN), Some(numeral(3)));
    }
}
