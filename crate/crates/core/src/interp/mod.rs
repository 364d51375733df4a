//! Operational semantics of ST and STV programs.
//!
//! Revisions whose preconditions fail (an undefined address, an already
//! defined target, a defined inception token) leave the structure unchanged.
//! Tests are strict: an undefined address makes equations and relational
//! tests false. One step is charged per executed revision and per guard
//! evaluation.

mod lower;

use std::collections::BTreeMap;
use std::io::Write;

use serde::Serialize;
use smallvec::SmallVec;
use thiserror::Error;

use crate::structure::{NodeId, PartialStructure, StructureError, Vocabulary};
use crate::syntax::{Guard, Revision, RevisionKind, Script, Test};

use lower::{LGuard, LProg, LRev, LTerm, LTest, Lowering};
pub use lower::preorder;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RunError {
    #[error("{0}")]
    Static(String),
    #[error("input does not fit the program vocabulary: {0}")]
    Input(#[from] StructureError),
    #[error("fuel exhausted after {0} steps")]
    FuelExhausted(u64),
}

/// One pass of a variant loop.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PassRecord {
    /// Preorder number of the loop statement.
    pub node: usize,
    /// Pass index within this execution of the loop, from 0.
    pub pass: u64,
    /// Total tuples in the variant components when the pass began and ended.
    pub variant_before: u64,
    pub variant_after: u64,
    /// Tuples removed from variant components during the pass.
    pub removed: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Trace {
    pub steps: u64,
    pub initial_size: u64,
    pub max_size: u64,
    pub final_size: u64,
    pub guard_evaluations: u64,
    /// Executed revisions per kind, in [`RevisionKind::ALL`] order.
    pub revision_counts: BTreeMap<String, u64>,
    pub contraction_log: Vec<PassRecord>,
}

impl Trace {
    /// Configurations entered, counting the initial one.
    pub fn configurations(&self) -> u64 {
        self.steps + 1
    }

    pub fn summary_line(&self, halted: bool) -> String {
        format!("steps={} max_size={} halted={}", self.steps, self.max_size, halted)
    }
}

#[derive(Debug, Clone)]
pub enum Outcome {
    Halted { result: PartialStructure, trace: Trace },
    FuelExhausted { trace: Trace },
}

impl Outcome {
    pub fn trace(&self) -> &Trace {
        match self {
            Outcome::Halted { trace, .. } | Outcome::FuelExhausted { trace } => trace,
        }
    }

    pub fn halted(&self) -> Option<&PartialStructure> {
        match self {
            Outcome::Halted { result, .. } => Some(result),
            Outcome::FuelExhausted { .. } => None,
        }
    }

    pub fn into_result(self) -> Result<(PartialStructure, Trace), RunError> {
        match self {
            Outcome::Halted { result, trace } => Ok((result, trace)),
            Outcome::FuelExhausted { trace } => Err(RunError::FuelExhausted(trace.steps)),
        }
    }
}

/// Hooks called during execution. All methods default to no-ops.
pub trait Observer {
    fn revision(&mut self, _step: u64, _kind: RevisionKind, _size: u64) {}
    /// A statement (by preorder number) starts executing.
    fn enter(&mut self, _node: usize, _size: u64) {}
    fn exit(&mut self, _node: usize, _size: u64) {}
    /// Called before each guard evaluation of a loop.
    fn loop_head(&mut self, _node: usize, _s: &PartialStructure) {}
}

pub struct NoObserver;

impl Observer for NoObserver {}

/// Writes one `step=<n> rev=<kind> size=<k>` line per revision.
pub struct TraceWriter<W: Write> {
    pub out: W,
}

impl<W: Write> Observer for TraceWriter<W> {
    fn revision(&mut self, step: u64, kind: RevisionKind, size: u64) {
        let _ = writeln!(self.out, "step={step} rev={kind} size={size}");
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    pub fuel: Option<u64>,
    pub log_contractions: bool,
}

impl RunOptions {
    pub fn unlimited() -> Self {
        RunOptions::default()
    }

    pub fn with_fuel(fuel: u64) -> Self {
        RunOptions { fuel: Some(fuel), log_contractions: false }
    }
}

struct Exhausted;

struct Machine<'o> {
    s: PartialStructure,
    fuel: Option<u64>,
    log: bool,
    trace: Trace,
    kind_counts: [u64; 6],
    removed: Vec<u64>,
    observer: &'o mut dyn Observer,
}

type Args = SmallVec<[NodeId; 2]>;

impl Machine<'_> {
    fn tick(&mut self) -> Result<(), Exhausted> {
        if self.fuel.is_some_and(|f| self.trace.steps >= f) {
            return Err(Exhausted);
        }
        self.trace.steps += 1;
        Ok(())
    }

    fn guard(&mut self, g: &LGuard) -> Result<bool, Exhausted> {
        self.tick()?;
        self.trace.guard_evaluations += 1;
        Ok(guard_in(&self.s, g))
    }

    fn revision(&mut self, r: &LRev) -> Result<(), Exhausted> {
        self.tick()?;
        apply_lowered(&mut self.s, r, &mut self.removed);
        let kind = match r {
            LRev::FuncExt { .. } => RevisionKind::FuncExt,
            LRev::FuncContr { .. } => RevisionKind::FuncContr,
            LRev::RelExt { .. } => RevisionKind::RelExt,
            LRev::RelContr { .. } => RevisionKind::RelContr,
            LRev::Inception(_) => RevisionKind::Inception,
            LRev::Deletion(_) => RevisionKind::Deletion,
        };
        self.kind_counts[kind as usize] += 1;
        let size = self.s.size().0;
        self.trace.max_size = self.trace.max_size.max(size);
        self.observer.revision(self.trace.steps, kind, size);
        Ok(())
    }

    fn removed_from(&self, ids: &[usize]) -> u64 {
        ids.iter().map(|&i| self.removed[i]).sum()
    }

    fn variant_size(&self, ids: &[usize]) -> u64 {
        ids.iter().map(|&i| self.s.table_len(i) as u64).sum()
    }

    fn block(&mut self, ps: &[LProg]) -> Result<(), Exhausted> {
        ps.iter().try_for_each(|p| self.exec(p))
    }

    fn exec(&mut self, p: &LProg) -> Result<(), Exhausted> {
        let node = match p {
            LProg::Rev(n, _) | LProg::Seq(n, _) | LProg::If(n, ..) | LProg::Do(n, ..) | LProg::DoVariant(n, ..) => *n,
        };
        self.observer.enter(node, self.s.size().0);
        match p {
            LProg::Rev(_, r) => self.revision(r)?,
            LProg::Seq(_, ps) => self.block(ps)?,
            LProg::If(_, g, t, e) => {
                if self.guard(g)? {
                    self.block(t)?
                } else {
                    self.block(e)?
                }
            }
            LProg::Do(_, g, body) => loop {
                self.observer.loop_head(node, &self.s);
                if !self.guard(g)? {
                    break;
                }
                self.block(body)?;
            },
            LProg::DoVariant(_, g, variant, body) => {
                self.observer.loop_head(node, &self.s);
                if self.guard(g)? {
                    let mut pass = 0;
                    loop {
                        let before = self.removed_from(variant);
                        let size_before = if self.log { self.variant_size(variant) } else { 0 };
                        self.block(body)?;
                        let removed = self.removed_from(variant) - before;
                        if self.log {
                            let rec = PassRecord {
                                node,
                                pass,
                                variant_before: size_before,
                                variant_after: self.variant_size(variant),
                                removed,
                            };
                            self.trace.contraction_log.push(rec);
                        }
                        pass += 1;
                        if removed == 0 {
                            break;
                        }
                        self.observer.loop_head(node, &self.s);
                        if !self.guard(g)? {
                            break;
                        }
                    }
                }
            }
        }
        self.observer.exit(node, self.s.size().0);
        Ok(())
    }
}

fn eval_in(s: &PartialStructure, t: &LTerm) -> Option<NodeId> {
    let mut args = Args::new();
    for a in &t.args {
        args.push(eval_in(s, a)?);
    }
    s.apply(t.head, &args)
}

fn eval_all_in(s: &PartialStructure, ts: &[LTerm]) -> Option<Args> {
    ts.iter().map(|t| eval_in(s, t)).collect()
}

/// Applies a lowered revision, adding removal counts per identifier.
fn apply_lowered(s: &mut PartialStructure, r: &LRev, removed: &mut [u64]) {
    match r {
        LRev::FuncExt { f, args, value } => {
            if let (Some(xs), Some(v)) = (eval_all_in(s, args), eval_in(s, value)) {
                if s.apply(*f, &xs).is_none() {
                    s.define(*f, &xs, v).expect("lowered revision is well-sorted");
                }
            }
        }
        LRev::FuncContr { f, args } => {
            if let Some(xs) = eval_all_in(s, args) {
                if s.undefine(*f, &xs) {
                    removed[*f] += 1;
                }
            }
        }
        LRev::RelExt { r, args } => {
            if let Some(xs) = eval_all_in(s, args) {
                s.relate(*r, &xs).expect("lowered revision is well-sorted");
            }
        }
        LRev::RelContr { r, args } => {
            if let Some(xs) = eval_all_in(s, args) {
                if s.unrelate(*r, &xs) {
                    removed[*r] += 1;
                }
            }
        }
        LRev::Inception(c) => {
            if s.apply(*c, &[]).is_none() {
                let n = s.add_node();
                s.define(*c, &[], n).expect("token is undefined");
            }
        }
        LRev::Deletion(c) => {
            if let Some(n) = s.apply(*c, &[]) {
                for (id, count) in s.delete_node(n) {
                    removed[id] += count as u64;
                }
            }
        }
    }
}

/// Expansion of the input to the program vocabulary, new identifiers empty.
pub fn expand_input(s: &PartialStructure, w: &Vocabulary) -> Result<PartialStructure, RunError> {
    Ok(s.expand(w)?)
}

pub fn eval_test(s: &PartialStructure, t: &Test) -> Result<bool, RunError> {
    let lt = Lowering::new(s.vocab()).test(t)?;
    Ok(test_in(s, &lt))
}

pub fn eval_guard(s: &PartialStructure, g: &Guard) -> Result<bool, RunError> {
    let lg = Lowering::new(s.vocab()).guard(g)?;
    Ok(guard_in(s, &lg))
}

fn test_in(s: &PartialStructure, t: &LTest) -> bool {
    match t {
        LTest::Def(a) => eval_in(s, a).is_some(),
        LTest::Eq(a, b) => matches!((eval_in(s, a), eval_in(s, b)), (Some(x), Some(y)) if x == y),
        LTest::Rel(r, args) => eval_all_in(s, args).is_some_and(|xs| s.holds(*r, &xs)),
    }
}

fn guard_in(s: &PartialStructure, g: &LGuard) -> bool {
    match g {
        LGuard::True => true,
        LGuard::False => false,
        LGuard::Test(t) => test_in(s, t),
        LGuard::Not(a) => !guard_in(s, a),
        LGuard::And(a, b) => guard_in(s, a) && guard_in(s, b),
        LGuard::Or(a, b) => guard_in(s, a) || guard_in(s, b),
    }
}

/// Applies one revision to a copy of `s`.
pub fn apply_revision(s: &PartialStructure, r: &Revision) -> Result<PartialStructure, RunError> {
    let lr = Lowering::new(s.vocab()).revision(r)?;
    let mut out = s.clone();
    let mut removed = vec![0; s.vocab().len()];
    apply_lowered(&mut out, &lr, &mut removed);
    Ok(out)
}

/// Runs `script` on the expansion of `input` to the script vocabulary.
pub fn run(script: &Script, input: &PartialStructure, opts: RunOptions) -> Result<Outcome, RunError> {
    run_observed(script, input, opts, &mut NoObserver)
}

pub fn run_observed(
    script: &Script,
    input: &PartialStructure,
    opts: RunOptions,
    observer: &mut dyn Observer,
) -> Result<Outcome, RunError> {
    let body = Lowering::new(&script.vocab).body(&script.body)?;
    let s = expand_input(input, &script.vocab)?;
    let size = s.size().0;
    let mut m = Machine {
        removed: vec![0; script.vocab.len()],
        s,
        fuel: opts.fuel,
        log: opts.log_contractions,
        trace: Trace { initial_size: size, max_size: size, ..Trace::default() },
        kind_counts: [0; 6],
        observer,
    };
    let res = m.block(&body);
    let mut trace = std::mem::take(&mut m.trace);
    trace.final_size = m.s.size().0;
    for k in RevisionKind::ALL {
        trace.revision_counts.insert(k.name().to_string(), m.kind_counts[k as usize]);
    }
    Ok(match res {
        Ok(()) => Outcome::Halted { result: m.s, trace },
        Err(Exhausted) => Outcome::FuelExhausted { trace },
    })
}

/// Runs the program, then keeps only the named identifiers and the nodes
/// accessible through them.
pub fn run_transducer<S: AsRef<str>>(
    script: &Script,
    input: &PartialStructure,
    output: &[S],
    fuel: Option<u64>,
) -> Result<PartialStructure, RunError> {
    let (result, _) = run(script, input, RunOptions { fuel, log_contractions: false })?.into_result()?;
    Ok(result.reduct(output)?.accessible_part())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structure::{canonical_form, word_structure, Term};
    use crate::syntax::parse_program;

    fn t(s: &str) -> Term {
        Term::parse(s).unwrap()
    }

    fn bits(w: &str) -> PartialStructure {
        word_structure(&["0", "1"], "e", w).unwrap()
    }

    #[test]
    fn strict_tests() {
        let s = bits("011");
        assert!(eval_test(&s, &Test::Def(t("0(e)"))).unwrap());
        assert!(!eval_test(&s, &Test::Def(t("1(e)"))).unwrap());
        assert!(eval_test(&s, &Test::Eq(t("0(e)"), t("0(e)"))).unwrap());
        assert!(!eval_test(&s, &Test::Eq(t("1(e)"), t("1(e)"))).unwrap());
        let mut v = s.vocab().clone();
        v.add_relation("R", 1).unwrap();
        let s = s.expand(&v).unwrap();
        assert!(!eval_test(&s, &Test::Rel("R".into(), vec![t("e")])).unwrap());
    }

    #[test]
    fn extension_and_noops() {
        let mut v = Vocabulary::functional([("a", 0), ("c", 0), ("0", 1)]).unwrap();
        v.add_relation("R", 1).unwrap();
        let mut s = PartialStructure::new(v);
        let x = s.add_node();
        let y = s.add_node();
        s.define_by_name("a", &[], x).unwrap();
        s.define_by_name("c", &[], y).unwrap();
        let ext = Revision::FuncExt { f: "0".into(), args: vec![t("a")], value: t("c") };
        let s1 = apply_revision(&s, &ext).unwrap();
        assert_eq!(s1.size().0, 1);
        let again = Revision::FuncExt { f: "0".into(), args: vec![t("a")], value: t("a") };
        let s2 = apply_revision(&s1, &again).unwrap();
        assert_eq!(s2, s1);
        let dangling = Revision::FuncExt { f: "0".into(), args: vec![t("0(c)")], value: t("a") };
        assert_eq!(apply_revision(&s1, &dangling).unwrap(), s1);
    }

    #[test]
    fn deletion_removes_adjacent_tuples() {
        let mut v = bits("011").vocab().clone();
        v.add_function("m", 0).unwrap();
        let s = bits("011").expand(&v).unwrap();
        let s = apply_revision(&s, &Revision::FuncExt { f: "m".into(), args: vec![], value: t("0(e)") }).unwrap();
        let s = apply_revision(&s, &Revision::Deletion("m".into())).unwrap();
        assert_eq!(s.node_count(), 3);
        assert_eq!(s.size().0, 1);
    }

    #[test]
    fn false_guard_loop_costs_one_step() {
        let p = parse_program("vocab { fn e/0 fn 0/1 fn 1/1 } do [false] { drop 0(e) }").unwrap();
        let out = run(&p, &bits("01"), RunOptions::unlimited()).unwrap();
        let (res, trace) = out.into_result().unwrap();
        assert_eq!(trace.steps, 1);
        assert_eq!(canonical_form(&res), canonical_form(&bits("01")));
    }

    #[test]
    fn variant_loop_without_contraction_runs_once() {
        let p = parse_program("vocab { fn e/0 fn 0/1 fn 1/1 rel R/1 } do [true] [0] { R+ (e) }").unwrap();
        let (res, trace) = run(&p, &bits("0"), RunOptions::unlimited()).unwrap().into_result().unwrap();
        assert_eq!(trace.steps, 2);
        assert_eq!(res.size().0, 2);
    }

    #[test]
    fn fuel_exhaustion() {
        let p = parse_program("vocab { fn e/0 fn 0/1 fn 1/1 } do [true] { }").unwrap();
        let out = run(&p, &bits(""), RunOptions::with_fuel(5)).unwrap();
        assert!(matches!(out, Outcome::FuelExhausted { ref trace } if trace.steps == 5));
    }

    #[test]
    fn input_vocabulary_conflict() {
        let p = parse_program("vocab { fn e/1 }").unwrap();
        assert!(matches!(run(&p, &bits(""), RunOptions::unlimited()), Err(RunError::Input(_))));
    }
}
