//! Compilation of recurrence definitions to STV programs.
//!
//! Values live in a hash-consed heap: for each constructor `c` of arity `k`
//! a function `c.h` with exact inverses `c.h_inv_1 .. c.h_inv_k`, plus a
//! pointer `id` mapping every heap node to itself. A node is created only if
//! its constructor entry is undefined, so every value is represented once and
//! composition simply passes heap nodes around.
//!
//! A recurrence on `w` runs four loops over the heap nodes below `w`:
//!
//! 1. a depth-first walk whose stack is a token plus a `below` pointer; each
//!    pass moves one inverse entry (or, when popping, the `id` entry) of the
//!    current node to a shadow, so the heap inverses and `id` form its
//!    variant, and popped nodes are chained in post-order;
//! 2. a pass over that chain moving the shadows back and copying the chain;
//! 3. a pass over the copy computing `r(p)` for each node from the results of
//!    its children;
//! 4. a pass clearing `r` and the visited marks.
//!
//! Every loop consumes its own chain, so nested recurrences compile to
//! nested variant loops.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::stdlib::{dup_chain, expansion_within, ExpansionOptions};
use crate::structure::{Kind, Vocabulary, ROOT_TOKEN};
use crate::syntax::{Program, ProgramBuilder, Script, SyntaxError};

use super::{input_name, input_root, input_vocabulary, pr_output_names, PrDef, PrError, PrModule};

struct HeapCons {
    cons: String,
    arity: usize,
    heap: String,
    inv: Vec<String>,
}

struct Heap {
    cons: Vec<HeapCons>,
    id: String,
}

impl Heap {
    fn declare(b: &mut ProgramBuilder, module: &PrModule) -> Heap {
        let cons = module
            .algebra
            .iter()
            .map(|(c, k)| {
                let heap = b.fresh_fn(&format!("{c}.h"), k);
                let inv = (1..=k).map(|i| b.fresh_fn(&format!("{heap}_inv_{i}"), 1)).collect();
                HeapCons { cons: c.to_string(), arity: k, heap, inv }
            })
            .collect();
        let id = b.fresh_fn("id", 1);
        Heap { cons, id }
    }

    fn get(&self, c: &str) -> &HeapCons {
        self.cons.iter().find(|h| h.cons == c).expect("constructor of the algebra")
    }

    fn inverses(&self) -> impl Iterator<Item = &String> {
        self.cons.iter().flat_map(|h| h.inv.iter())
    }
}

fn apply(f: &str, args: &[String]) -> String {
    if args.is_empty() {
        f.to_string()
    } else {
        format!("{f}({})", args.join(", "))
    }
}

/// Names of one post-order walk over the heap below a node.
struct Walk {
    top: String,
    cur: String,
    child: String,
    below: String,
    visited: String,
    shadows: Vec<Vec<String>>,
    shadow_id: String,
    list: String,
    first: String,
    last: String,
    list2: String,
    first2: String,
    last2: String,
    p: String,
    q: String,
}

struct Compiler<'m> {
    b: ProgramBuilder,
    module: &'m PrModule,
    heap: Heap,
}

impl<'m> Compiler<'m> {
    fn push(&mut self, text: &str) -> Result<(), PrError> {
        Ok(self.b.push(text)?)
    }

    fn token(&mut self, hint: &str) -> String {
        self.b.fresh_fn(hint, 0)
    }

    /// Makes sure the heap node `c(args)` exists and returns its term.
    fn hashcons(&mut self, c: &str, args: &[String]) -> Result<String, PrError> {
        let h = self.heap.get(c);
        let t = apply(&h.heap, args);
        let mut body = vec![format!("new {t}")];
        for (inv, a) in h.inv.iter().zip(args) {
            body.push(format!("{inv}({t}) <- {a}"));
        }
        body.push(format!("{}({t}) <- {t}", self.heap.id));
        self.push(&format!("if [not def {t}] {{ {} }}", body.join("; ")))?;
        Ok(t)
    }

    /// Appends code leaving the value of `def` on the heap nodes `args` in
    /// token `result`.
    fn compile(&mut self, def: &PrDef, args: &[String], result: &str) -> Result<(), PrError> {
        match def {
            PrDef::Constructor(c) => {
                let t = self.hashcons(c, args)?;
                self.push(&format!("{result} := {t}"))
            }
            PrDef::Projection { index, .. } => self.push(&format!("{result} := {}", args[index - 1])),
            PrDef::Call(n) => {
                let d = self.module.lookup(n)?;
                self.compile(d, args, result)
            }
            PrDef::Composition { outer, inner, .. } => {
                let temps: Vec<String> = inner.iter().map(|_| self.token("v")).collect();
                for (h, t) in inner.iter().zip(&temps) {
                    self.compile(h, args, t)?;
                }
                self.compile(outer, &temps, result)?;
                for t in &temps {
                    self.push(&format!("drop {t}"))?;
                }
                Ok(())
            }
            PrDef::Recurrence { cases, .. } => self.recurrence(cases, &args[0], &args[1..], result),
        }
    }

    fn walk_names(&mut self) -> Walk {
        let shadows = self
            .heap
            .cons
            .iter()
            .map(|h| h.inv.iter().map(|i| format!("{i}^")).collect::<Vec<_>>())
            .collect::<Vec<_>>();
        Walk {
            top: self.token("top"),
            cur: self.token("cur"),
            child: self.token("child"),
            below: self.b.fresh_fn("below", 1),
            visited: self.b.fresh_rel("V", 1),
            shadows: shadows.iter().map(|hs| hs.iter().map(|s| self.b.fresh_fn(s, 1)).collect()).collect(),
            shadow_id: self.b.fresh_fn("id^", 1),
            list: self.b.fresh_fn("L", 1),
            first: self.token("first"),
            last: self.token("last"),
            list2: self.b.fresh_fn("L", 1),
            first2: self.token("first"),
            last2: self.token("last"),
            p: self.token("p"),
            q: self.token("q"),
        }
    }

    fn append(list: &str, first: &str, last: &str, x: &str) -> String {
        format!("if [def {first}] {{ {list}({last}) <- {x}; {last} := {x} }} {{ {first} <- {x}; {last} <- {x} }}")
    }

    fn advance(list: &str, p: &str, q: &str) -> String {
        format!("{q} := {list}({p}); drop {list}({p}); {p} := {q}; drop {q}")
    }

    /// Chains the heap nodes below `root` in post-order on `list2`, starting
    /// at `first2`, leaving them marked visited.
    fn collect(&mut self, w: &Walk, root: &str) -> Result<(), PrError> {
        let Walk { top, cur, child, below, visited, shadow_id, list, first, last, p, q, .. } = w;
        let id = self.heap.id.clone();

        let mut pop = format!("{shadow_id}({cur}) <- {id}({cur}); drop {id}({cur}); ");
        pop += &Self::append(list, first, last, cur);
        pop += &format!("; {top} := {below}({cur}); drop {below}({cur})");
        let mut step = pop;
        for (h, shs) in self.heap.cons.iter().zip(&w.shadows).rev() {
            for (inv, sh) in h.inv.iter().zip(shs).rev() {
                step = format!(
                    "if [def {inv}({cur})] {{
                       {child} := {inv}({cur}); {sh}({cur}) <- {child}; drop {inv}({cur})
                       if [not {visited}({child})] {{ {visited}+ ({child}); {below}({child}) <- {cur}; {top} := {child} }}
                       drop {child}
                     }} {{ {step} }}"
                );
            }
        }
        let mut variant: Vec<String> = self.heap.inverses().cloned().collect();
        variant.push(id.clone());
        let variant: Vec<&str> = variant.iter().map(String::as_str).collect();

        self.push(&format!("{top} := {root}; {visited}+ ({top})"))?;
        self.b.do_variant(&format!("def {top}"), &variant, |b| {
            b.push(&format!("{cur} := {top}"))?;
            b.push(&step)?;
            b.push(&format!("drop {cur}"))
        })?;

        let mut restore = String::new();
        for (h, shs) in self.heap.cons.iter().zip(&w.shadows) {
            for (inv, sh) in h.inv.iter().zip(shs) {
                restore += &format!("if [def {sh}({p})] {{ {inv}({p}) <- {sh}({p}); drop {sh}({p}) }}\n");
            }
        }
        restore += &format!("{id}({p}) <- {shadow_id}({p}); drop {shadow_id}({p})\n");
        restore += &Self::append(&w.list2, &w.first2, &w.last2, p);
        restore += "\n";
        restore += &Self::advance(list, p, q);
        self.push(&format!("{p} := {first}"))?;
        self.b.do_variant(&format!("def {p}"), &[list.as_str()], |b| b.push(&restore))?;
        self.push(&format!("drop {first}; drop {last}"))?;
        Ok(())
    }

    /// Runs `body` on every node of the post-order copy, consuming it and
    /// rebuilding the first chain for [`Compiler::release`].
    fn scan<F>(&mut self, w: &Walk, body: F) -> Result<(), PrError>
    where
        F: FnOnce(&mut Self) -> Result<(), PrError>,
    {
        let Walk { list, first, last, list2, first2, last2, p, q, .. } = w;
        self.push(&format!("{p} := {first2}"))?;
        let guard = self.b.guard(&format!("def {p}"))?;
        let mut stmts = self.capture(body)?;
        stmts.extend(self.b.parse(&format!("{}\n{}", Self::append(list, first, last, p), Self::advance(list2, p, q)))?);
        self.b.push_program(Program::DoVariant { guard, variant: vec![list2.clone()], body: stmts });
        self.push(&format!("drop {first2}; drop {last2}"))
    }

    /// Statements appended by `f`, removed from the program.
    fn capture<F>(&mut self, f: F) -> Result<Vec<Program>, PrError>
    where
        F: FnOnce(&mut Self) -> Result<(), PrError>,
    {
        let mark = self.b.statement_count();
        f(self)?;
        Ok(self.b.take_from(mark))
    }

    /// Clears `r` and the visited marks on the nodes chained by [`Compiler::scan`].
    fn release(&mut self, w: &Walk, r: &str) -> Result<(), PrError> {
        let Walk { visited, list, first, last, p, q, .. } = w;
        self.push(&format!("{p} := {first}"))?;
        let body = format!("drop {r}({p}); {visited}- ({p}); {}", Self::advance(list, p, q));
        self.b.do_variant(&format!("def {p}"), &[list.as_str()], |b| b.push(&body))?;
        self.push(&format!("drop {first}; drop {last}"))
    }

    fn recurrence(&mut self, cases: &BTreeMap<String, PrDef>, w: &str, xs: &[String], result: &str) -> Result<(), PrError> {
        let walk = self.walk_names();
        let r = self.b.fresh_fn("r", 1);
        self.collect(&walk, w)?;
        let p = walk.p.clone();
        let cons: Vec<(String, usize, String, Vec<String>)> =
            self.heap.cons.iter().map(|h| (h.cons.clone(), h.arity, h.heap.clone(), h.inv.clone())).collect();
        self.scan(&walk, |c| {
            let res = c.token("res");
            let mut branches = Vec::new();
            for (con, k, heap, inv) in &cons {
                let zs: Vec<String> = (0..*k).map(|_| c.token("z")).collect();
                let ys: Vec<String> = (0..*k).map(|_| c.token("y")).collect();
                let guard = if *k == 0 { format!("{p} == {heap}") } else { format!("def {}({p})", inv[0]) };
                let stmts = c.capture(|c| {
                    for ((z, y), i) in zs.iter().zip(&ys).zip(inv) {
                        c.push(&format!("{z} := {i}({p}); {y} := {r}({z})"))?;
                    }
                    let mut args = xs.to_vec();
                    args.extend(zs.iter().cloned());
                    args.extend(ys.iter().cloned());
                    c.compile(&cases[con], &args, &res)?;
                    c.push(&format!("{r}({p}) <- {res}; drop {res}"))?;
                    for t in zs.iter().chain(&ys) {
                        c.push(&format!("drop {t}"))?;
                    }
                    Ok(())
                })?;
                branches.push((c.b.guard(&guard)?, stmts));
            }
            let chain = branches
                .into_iter()
                .rev()
                .fold(Vec::new(), |els, (guard, then)| vec![Program::If { guard, then, els }]);
            for s in chain {
                c.b.push_program(s);
            }
            Ok(())
        })?;
        self.push(&format!("{result} := {r}({w})"))?;
        self.release(&walk, &r)
    }
}

/// A compiled recurrence definition with its input and output conventions.
#[derive(Debug, Clone, Serialize)]
pub struct CompiledPr {
    #[serde(skip)]
    pub script: Script,
    /// Number of arguments; argument `i` is given over constructors
    /// [`input_name`]`(c, i)` with root [`input_root`]`(i)`.
    pub arity: usize,
    /// Output identifiers: the constructors and `•`.
    pub output: Vec<String>,
}

/// Compiles definition `name` of `module`. On the sum of the argument term
/// structures (see [`super::pr_input`]) the program's output, reduced to
/// [`CompiledPr::output`] and restricted to its accessible part, is the term
/// structure of the function's value.
pub fn compile_pr(module: &PrModule, name: &str) -> Result<CompiledPr, PrError> {
    let def = module.lookup(name)?.clone();
    compile_def(module, &def)
}

/// Compiles an explicit definition: a constructor, projection or
/// composition whose parts are constructors, projections, compositions or
/// earlier definitions.
pub fn compile_explicit(module: &PrModule, def: &PrDef) -> Result<CompiledPr, PrError> {
    match def {
        PrDef::Recurrence { .. } => Err(PrError::Unsupported("a recurrence is not an explicit definition".into())),
        _ => compile_def(module, def),
    }
}

fn compile_def(module: &PrModule, def: &PrDef) -> Result<CompiledPr, PrError> {
    let arity = module.arity(def)?;
    let mut inputs = Vocabulary::new();
    for i in 1..=arity {
        inputs = inputs.merged(&input_vocabulary(&module.algebra, i))?;
    }
    // Roots only name nodes the constructors already reach; listing them
    // among the tokens would break the children-first order of the import.
    let mut constructors = Vocabulary::new();
    for i in 1..=arity {
        for (c, k) in module.algebra.iter() {
            constructors.add_function(&input_name(c, i), k)?;
        }
    }
    let output = pr_output_names(&module.algebra);
    let mut base = inputs.merged(&module.algebra.vocabulary())?;
    base.ensure(ROOT_TOKEN, Kind::Function, 0)?;

    let mut b0 = ProgramBuilder::new(base);
    let heap = Heap::declare(&mut b0, module);
    let exp = expansion_within(&constructors, b0.vocab(), ExpansionOptions { quasi_inverses: true, duplicates: false })?;
    let mut b = ProgramBuilder::new(exp.script.vocab.clone());
    for p in exp.script.body {
        b.push_program(p);
    }
    let mut c = Compiler { b, module, heap };

    // Import: walk the enumerator, children before parents, and map every
    // input node to its heap node through `imp`.
    let imp = c.b.fresh_fn("imp", 1);
    let (p, q) = (c.token("p"), c.token("q"));
    let (head, succ) = (exp.enumerator.head.clone(), exp.enumerator.succ.clone());
    let cons: Vec<(String, usize)> = module.algebra.iter().map(|(c, k)| (c.to_string(), k)).collect();
    let stmts = c.capture(|c| {
        let mut branches = Vec::new();
        for i in 1..=arity {
            for (con, k) in &cons {
                let name = input_name(con, i);
                let (guard, args) = if *k == 0 {
                    (format!("{p} == {name}"), Vec::new())
                } else {
                    let inv = &exp.inverses[&name];
                    (format!("def {}({p})", inv[0]), inv.iter().map(|f| format!("{imp}({f}({p}))")).collect())
                };
                let then = c.capture(|c| {
                    let t = c.hashcons(con, &args)?;
                    c.push(&format!("{imp}({p}) <- {t}"))
                })?;
                branches.push((c.b.guard(&guard)?, then));
            }
        }
        for s in branches.into_iter().rev().fold(Vec::new(), |els, (guard, then)| vec![Program::If { guard, then, els }]) {
            c.b.push_program(s);
        }
        c.push(&format!("{q} := {succ}({p}); drop {succ}({p}); {p} := {q}; drop {q}"))
    })?;
    c.push(&format!("{p} := {head}"))?;
    let guard = c.b.guard(&format!("def {p}"))?;
    c.b.push_program(Program::DoVariant { guard, variant: vec![succ.clone()], body: stmts });

    let args: Vec<String> = (1..=arity)
        .map(|i| {
            let x = c.token("x");
            c.push(&format!("{x} := {imp}({})", input_root(i))).map(|_| x)
        })
        .collect::<Result<_, _>>()?;
    let res = c.token("res");
    c.compile(def, &args, &res)?;

    // Export: rebuild the result's heap nodes over the plain constructors.
    let walk = c.walk_names();
    let out = c.b.fresh_fn("out", 1);
    c.collect(&walk, &res)?;
    let p = walk.p.clone();
    let heap: Vec<(String, usize, String, Vec<String>)> =
        c.heap.cons.iter().map(|h| (h.cons.clone(), h.arity, h.heap.clone(), h.inv.clone())).collect();
    c.scan(&walk, |c| {
        let mut branches = Vec::new();
        for (con, k, hp, inv) in &heap {
            let guard = if *k == 0 { format!("{p} == {hp}") } else { format!("def {}({p})", inv[0]) };
            let args: Vec<String> = inv.iter().map(|f| format!("{out}({f}({p}))")).collect();
            let t = apply(con, &args);
            let then = c.b.parse(&format!("if [not def {t}] {{ new {t} }}\n{out}({p}) <- {t}"))?;
            branches.push((c.b.guard(&guard)?, then));
        }
        for s in branches.into_iter().rev().fold(Vec::new(), |els, (guard, then)| vec![Program::If { guard, then, els }]) {
            c.b.push_program(s);
        }
        Ok(())
    })?;
    c.push(&format!("{ROOT_TOKEN} <- {out}({res})"))?;

    Ok(CompiledPr { script: c.b.build(), arity, output })
}

/// Makes an ST program STV given a unary recurrence `f` over `z/0, s/1`
/// bounding its loops: on an input with `n` accessible nodes, each plain loop
/// of `p` may re-enter at most `f(n)` times in total. The result first lists
/// the accessible nodes of the input (over `input`, or the whole vocabulary
/// of `p`), computes `f(n)` as a chain, copies the chain once per plain loop,
/// and then runs `p` with every plain loop consuming one link of its copy per
/// pass. Loops that already carry a variant are kept as they are.
pub fn bound_transform(p: &Script, input: Option<&Vocabulary>, f: &PrModule, fname: &str) -> Result<Script, PrError> {
    let numeric = f.algebra.iter().collect::<Vec<_>>();
    if numeric != [("z", 0), ("s", 1)] {
        return Err(PrError::Unsupported("the bounding function must be over the algebra { z/0 s/1 }".into()));
    }
    let def = f.lookup(fname)?.clone();
    if f.arity(&def)? != 1 {
        return Err(PrError::Unsupported("the bounding function must be unary".into()));
    }
    let w = input.cloned().unwrap_or_else(|| p.vocab.clone());
    let mut b0 = ProgramBuilder::new(p.vocab.merged(&w)?);
    let heap = Heap::declare(&mut b0, f);
    let exp = expansion_within(&w, b0.vocab(), ExpansionOptions::default())?;
    let mut b = ProgramBuilder::new(exp.script.vocab.clone());
    for s in exp.script.body {
        b.push_program(s);
    }
    let mut c = Compiler { b, module: f, heap };

    // Count the listed nodes as a heap numeral.
    let (cur, q, num) = (c.token("p"), c.token("q"), c.token("n"));
    let (head, succ) = (&exp.enumerator.head, &exp.enumerator.succ);
    let zero = c.hashcons("z", &[])?;
    c.push(&format!("{num} := {zero}; {cur} := {head}"))?;
    let stmts = c.capture(|c| {
        let t = c.hashcons("s", std::slice::from_ref(&num))?;
        c.push(&format!("{num} := {t}"))?;
        c.push(&format!("{q} := {succ}({cur}); drop {succ}({cur}); {cur} := {q}; drop {q}"))
    })?;
    let guard = c.b.guard(&format!("def {cur}"))?;
    c.b.push_program(Program::DoVariant { guard, variant: vec![succ.clone()], body: stmts });

    let res = c.token("m");
    c.compile(&def, &[num], &res)?;
    let walk = c.walk_names();
    c.collect(&walk, &res)?;

    let loops = count_plain_loops(&p.body);
    let mut budgets = Vec::new();
    for _ in 0..loops {
        let t = c.b.fresh_fn("t", 1);
        let k = c.token("k");
        dup_chain(&mut c.b, &walk.first2, std::slice::from_ref(&walk.list2), std::slice::from_ref(&t))?;
        c.push(&format!("{k} := {}", walk.first2))?;
        budgets.push((t, k));
    }
    let nx = c.token("nx");
    let mut next = 0;
    let body = annotate(&mut c.b, &p.body, &budgets, &nx, &mut next)?;
    for s in body {
        c.b.push_program(s);
    }
    Ok(c.b.build())
}

fn count_plain_loops(body: &[Program]) -> usize {
    body.iter()
        .map(|p| {
            let own = usize::from(matches!(p, Program::Do { .. }));
            own + p.blocks().iter().map(|(_, b)| count_plain_loops(b)).sum::<usize>()
        })
        .sum()
}

fn annotate(
    b: &mut ProgramBuilder,
    body: &[Program],
    budgets: &[(String, String)],
    nx: &str,
    next: &mut usize,
) -> Result<Vec<Program>, SyntaxError> {
    body.iter().map(|p| annotate_one(b, p, budgets, nx, next)).collect()
}

fn annotate_one(
    b: &mut ProgramBuilder,
    p: &Program,
    budgets: &[(String, String)],
    nx: &str,
    next: &mut usize,
) -> Result<Program, SyntaxError> {
    Ok(match p {
        Program::Do { guard, body } => {
            let (t, k) = &budgets[*next];
            *next += 1;
            let mut inner = b.parse(&format!("{nx} := {t}({k}); drop {t}({k}); {k} := {nx}; drop {nx}"))?;
            inner.extend(annotate(b, body, budgets, nx, next)?);
            Program::DoVariant { guard: guard.clone(), variant: vec![t.clone()], body: inner }
        }
        Program::DoVariant { guard, variant, body } => Program::DoVariant {
            guard: guard.clone(),
            variant: variant.clone(),
            body: annotate(b, body, budgets, nx, next)?,
        },
        Program::If { guard, then, els } => Program::If {
            guard: guard.clone(),
            then: annotate(b, then, budgets, nx, next)?,
            els: annotate(b, els, budgets, nx, next)?,
        },
        Program::Seq(ps) => Program::Seq(annotate(b, ps, budgets, nx, next)?),
        Program::Rev(_) => p.clone(),
    })
}
