use std::collections::HashMap;

use num_bigint::BigUint;
use serde::Serialize;

use crate::interp::{run_observed, Observer, Outcome, RunOptions};
use crate::structure::PartialStructure;
use crate::syntax::{Location, Program, Script};

use super::bound::{bound_of, eval_bound_u64, literal_bound_of, BoundFunction, BoundValue};
use super::{check_stv, AnalysisError};

#[derive(Debug, Clone)]
pub struct PrBoundOptions {
    /// Bound values above the cap are treated as overflow, which admits any
    /// size within the cap.
    pub cap: BigUint,
    pub fuel: Option<u64>,
    /// Use the constant base case instead of `succ`/`id`.
    pub literal: bool,
}

impl Default for PrBoundOptions {
    fn default() -> Self {
        PrBoundOptions { cap: BigUint::from(1u32) << 256, fuel: None, literal: false }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Falsification {
    /// Index of the input in the corpus.
    pub input: usize,
    /// Offending statement, or `None` for the whole program.
    pub location: Option<Location>,
    pub entry_size: u64,
    pub exit_size: u64,
    pub bound: BoundValue,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct PrBoundReport {
    pub inputs: usize,
    /// Inputs on which the run ran out of fuel; these are not checked.
    pub fuel_exhausted: usize,
    /// Statement executions compared against their bounds.
    pub instances: u64,
    /// Comparisons where the bound exceeded the cap.
    pub overflowed: u64,
    pub falsifications: Vec<Falsification>,
}

impl PrBoundReport {
    pub fn ok(&self) -> bool {
        self.falsifications.is_empty()
    }
}

const MAX_RECORDED: usize = 64;

/// Statements in preorder with their locations.
pub fn located_preorder(body: &[Program]) -> Vec<(Location, &Program)> {
    fn walk<'a>(p: &'a Program, loc: Location, out: &mut Vec<(Location, &'a Program)>) {
        out.push((loc.clone(), p));
        for (label, b) in p.blocks() {
            for (i, q) in b.iter().enumerate() {
                walk(q, loc.child(label, i), out);
            }
        }
    }
    let mut out = Vec::new();
    for (i, p) in body.iter().enumerate() {
        walk(p, Location::root().child("", i), &mut out);
    }
    out
}

struct Checker<'a> {
    input: usize,
    bounds: &'a [BoundFunction],
    locations: &'a [Location],
    cap: &'a BigUint,
    memo: HashMap<(usize, u64), BoundValue>,
    stack: Vec<(usize, u64)>,
    report: &'a mut PrBoundReport,
    falsified: u64,
}

impl Observer for Checker<'_> {
    fn enter(&mut self, node: usize, size: u64) {
        self.stack.push((node, size));
    }

    fn exit(&mut self, node: usize, size: u64) {
        let (n, entry) = self.stack.pop().expect("balanced enter/exit");
        debug_assert_eq!(n, node);
        let b = &self.bounds[node];
        let cap = self.cap;
        let v = self.memo.entry((node, entry)).or_insert_with(|| eval_bound_u64(b, entry, Some(cap)));
        self.report.instances += 1;
        if *v == BoundValue::Overflow {
            self.report.overflowed += 1;
        }
        if !v.admits(&BigUint::from(size), Some(cap)) {
            self.falsified += 1;
            if self.report.falsifications.len() < MAX_RECORDED {
                self.report.falsifications.push(Falsification {
                    input: self.input,
                    location: Some(self.locations[node].clone()),
                    entry_size: entry,
                    exit_size: size,
                    bound: v.clone(),
                });
            }
        }
    }
}

/// Runs `script` on every input and checks the size bound: the output and
/// the largest intermediate structure are within `b_P(size(input))`, and
/// every executed statement leaves a structure within its own bound applied
/// to the size at which it was entered.
pub fn check_pr_bound(
    script: &Script,
    inputs: &[PartialStructure],
    opts: &PrBoundOptions,
) -> Result<PrBoundReport, AnalysisError> {
    let stv = check_stv(script);
    if !stv.ok {
        return Err(AnalysisError::NotStv(stv.violations));
    }
    let statements = located_preorder(&script.body);
    let assign: fn(&Program) -> BoundFunction = if opts.literal { literal_bound_of } else { bound_of };
    let bounds: Vec<BoundFunction> = statements.iter().map(|(_, p)| assign(p)).collect();
    let locations: Vec<Location> = statements.into_iter().map(|(l, _)| l).collect();
    let whole = if opts.literal { super::literal_bound(script) } else { super::bound_of_block(&script.body) };

    let mut report = PrBoundReport { inputs: inputs.len(), ..PrBoundReport::default() };
    for (i, s) in inputs.iter().enumerate() {
        let mut checker = Checker {
            input: i,
            bounds: &bounds,
            locations: &locations,
            cap: &opts.cap,
            memo: HashMap::new(),
            stack: Vec::new(),
            report: &mut report,
            falsified: 0,
        };
        let outcome = run_observed(script, s, RunOptions { fuel: opts.fuel, log_contractions: false }, &mut checker)?;
        let Outcome::Halted { trace, .. } = outcome else {
            report.fuel_exhausted += 1;
            continue;
        };
        let v = eval_bound_u64(&whole, trace.initial_size, Some(&opts.cap));
        report.instances += 1;
        if v == BoundValue::Overflow {
            report.overflowed += 1;
        }
        if !v.admits(&BigUint::from(trace.max_size), Some(&opts.cap)) && report.falsifications.len() < MAX_RECORDED {
            report.falsifications.push(Falsification {
                input: i,
                location: None,
                entry_size: trace.initial_size,
                exit_size: trace.max_size,
                bound: v,
            });
        }
    }
    Ok(report)
}
