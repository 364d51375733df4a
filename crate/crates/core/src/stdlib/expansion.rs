//! Structure expansions for an arbitrary vocabulary: a height-monotone
//! enumerator of the accessible nodes, quasi-inverses of the functions, and
//! duplicates of the functions.
//!
//! The enumerator is a chain: token `a` is its head, pointer `e` the
//! successor and unary relation `E` the set listed so far. Nodes of tokens
//! are listed first. Each pass of the main loop scans every tuple of listed
//! nodes for every function `g`; a value not yet in `E` is added to `E` and
//! to a pending chain (token `b`, pointer `d`), which is appended to `e` at
//! the end of the pass. Pass `m` therefore lists exactly the nodes of height
//! `m + 1`. Flag token `f` records whether the pass found a node.
//!
//! The main loop's variant is the set of functions being enumerated: when a
//! value is first found through an entry, the entry is moved to a shadow
//! function, so every pass that lists a node also contracts a variant
//! component. The shadows are moved back after the loop. Scans over the
//! enumerator consume a copy of `e` made by [`dup_chain`], one copy per
//! nesting level for functions of higher arity.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::structure::{Kind, PartialStructure, Vocabulary};
use crate::syntax::{ProgramBuilder, Script, SyntaxError};

use super::chain::dup_chain;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ExpansionOptions {
    pub quasi_inverses: bool,
    pub duplicates: bool,
}

/// Identifiers holding the enumerator in the expanded structure.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EnumeratorWitness {
    pub head: String,
    pub succ: String,
    pub listed: String,
}

impl EnumeratorWitness {
    /// Nodes listed from the head along the successor pointer; `None` if the
    /// walk revisits a node.
    pub fn listing(&self, s: &PartialStructure) -> Option<Vec<crate::structure::NodeId>> {
        let succ = s.vocab().lookup(&self.succ)?;
        let mut out = Vec::new();
        let mut cur = s.token(&self.head);
        while let Some(n) = cur {
            if out.contains(&n) {
                return None;
            }
            out.push(n);
            cur = s.apply(succ, &[n]);
        }
        Some(out)
    }
}

#[derive(Debug, Clone)]
pub struct Expansion {
    pub script: Script,
    pub enumerator: EnumeratorWitness,
    /// For each function of positive arity `k`, its `k` quasi-inverse
    /// components.
    pub inverses: BTreeMap<String, Vec<String>>,
    /// For each function of positive arity, the name of its duplicate.
    pub duplicates: BTreeMap<String, String>,
}

struct Names {
    head: String,
    succ: String,
    listed: String,
    flag: String,
    tail: String,
    pend: String,
    pend_head: String,
    pend_tail: String,
    value: String,
    next: String,
    copies: Vec<String>,
    cursors: Vec<String>,
}

type Body<'a> = &'a dyn Fn(&mut ProgramBuilder, &str) -> Result<(), SyntaxError>;

/// Runs `body` with the cursors over every `k`-tuple of listed nodes.
fn scan(b: &mut ProgramBuilder, n: &Names, depth: usize, k: usize, body: Body) -> Result<(), SyntaxError> {
    if depth == k {
        return body(b, &n.cursors[..k].join(", "));
    }
    let (copy, t, nx) = (&n.copies[depth], &n.cursors[depth], &n.next);
    dup_chain(b, &n.head, std::slice::from_ref(&n.succ), std::slice::from_ref(copy))?;
    b.push(&format!("{t} := {}", n.head))?;
    b.do_variant(&format!("def {t}"), &[copy.as_str()], |b| {
        scan(b, n, depth + 1, k, body)?;
        b.push(&format!("{nx} := {copy}({t}); drop {copy}({t}); {t} := {nx}; drop {nx}"))
    })
}

fn generate(w: &Vocabulary, reserved: &Vocabulary, opts: ExpansionOptions) -> Result<Expansion, SyntaxError> {
    let base = reserved.merged(w).map_err(|e| SyntaxError::Vocabulary(e.to_string()))?;
    let mut b = ProgramBuilder::new(base);
    let tokens: Vec<String> = w.iter().filter(|s| s.kind == Kind::Function && s.arity == 0).map(|s| s.name.clone()).collect();
    let funcs: Vec<(String, usize)> =
        w.iter().filter(|s| s.kind == Kind::Function && s.arity > 0).map(|s| (s.name.clone(), s.arity)).collect();
    let max_arity = funcs.iter().map(|f| f.1).max().unwrap_or(0);

    let head = b.fresh_fn("a", 0);
    let succ = b.fresh_fn("e", 1);
    let listed = b.fresh_rel("E", 1);
    let pend = b.fresh_fn("d", 1);
    let pend_head = b.fresh_fn("b", 0);
    let flag = b.fresh_fn("f", 0);
    let tail = b.fresh_fn("z", 0);
    let pend_tail = b.fresh_fn("y", 0);
    let value = b.fresh_fn("x", 0);
    let next = b.fresh_fn("n", 0);
    let copies = (1..=max_arity).map(|i| b.fresh_fn(&format!("{succ}{i}_"), 1)).collect();
    let cursors = (1..=max_arity).map(|i| b.fresh_fn(&format!("t{i}"), 0)).collect();
    let n = Names {
        head,
        succ,
        listed,
        flag,
        tail,
        pend,
        pend_head,
        pend_tail,
        value,
        next,
        copies,
        cursors,
    };
    let shadows: Vec<String> = funcs.iter().map(|(g, k)| b.fresh_fn(&format!("{g}^"), *k)).collect();
    let mut inverses = BTreeMap::new();
    if opts.quasi_inverses {
        for (g, k) in &funcs {
            let inv: Vec<String> = (1..=*k).map(|i| b.fresh_fn(&format!("{g}_inv_{i}"), 1)).collect();
            inverses.insert(g.clone(), inv);
        }
    }
    let mut duplicates = BTreeMap::new();
    if opts.duplicates {
        for (g, k) in &funcs {
            duplicates.insert(g.clone(), b.fresh_fn(&format!("{g}'"), *k));
        }
    }

    let Names { head: a, succ: e, listed: big_e, flag: f, tail: z, pend: d, pend_head: pb, pend_tail: pt, .. } = &n;
    let (x, nx) = (&n.value, &n.next);

    for c in &tokens {
        b.push(&format!(
            "if [def {c} and not {big_e}({c})] {{
              {big_e}+ ({c}); {f} <- {c}
              if [def {a}] {{ {e}({z}) <- {c}; {z} := {c} }} {{ {a} <- {c}; {z} <- {c} }}
            }}"
        ))?;
    }

    if !funcs.is_empty() {
        let variant: Vec<&str> = funcs.iter().map(|(g, _)| g.as_str()).collect();
        b.do_variant(&format!("def {f}"), &variant, |b| {
            b.push(&format!("drop {f}"))?;
            for (i, (g, k)) in funcs.iter().enumerate() {
                let shadow = &shadows[i];
                let inv = inverses.get(g);
                scan(b, &n, 0, *k, &|b, args| {
                    b.push(&format!(
                        "{x} := {g}({args})
                        if [def {x} and not {big_e}({x})] {{
                          {big_e}+ ({x}); {f} <- {x}
                          {shadow}({args}) <- {x}; drop {g}({args})
                          if [def {pb}] {{ {d}({pt}) <- {x}; {pt} := {x} }} {{ {pb} <- {x}; {pt} <- {x} }}
                        }}"
                    ))?;
                    if let Some(inv) = inv {
                        let defs: Vec<String> = inv
                            .iter()
                            .zip(&n.cursors)
                            .map(|(gi, t)| format!("{gi}({x}) <- {t}"))
                            .collect();
                        b.push(&format!("if [def {x} and not def {}({x})] {{ {} }}", inv[0], defs.join("; ")))?;
                    }
                    b.push(&format!("drop {x}"))
                })?;
            }
            let q = nx;
            b.push(&format!(
                "if [def {pb}] {{
                  {e}({z}) <- {pb}
                  {z} := {pb}
                  do [def {d}({z})] [{d}] {{ {e}({z}) <- {d}({z}); {q} := {d}({z}); drop {d}({z}); {z} := {q}; drop {q} }}
                  drop {pb}; drop {pt}
                }}"
            ))
        })?;
    }

    for (i, (g, k)) in funcs.iter().enumerate() {
        let shadow = &shadows[i];
        scan(&mut b, &n, 0, *k, &|b, args| {
            b.push(&format!("if [def {shadow}({args})] {{ {g}({args}) <- {shadow}({args}); drop {shadow}({args}) }}"))
        })?;
    }
    for (g, k) in &funcs {
        if let Some(dup) = duplicates.get(g) {
            scan(&mut b, &n, 0, *k, &|b, args| b.push(&format!("if [def {g}({args})] {{ {dup}({args}) <- {g}({args}) }}")))?;
        }
    }
    b.push(&format!("drop {z}; drop {f}"))?;

    let enumerator = EnumeratorWitness { head: n.head.clone(), succ: n.succ.clone(), listed: n.listed.clone() };
    Ok(Expansion { script: b.build(), enumerator, inverses, duplicates })
}

/// Program expanding any `w`-structure with a height-monotone enumerator of
/// its accessible nodes.
pub fn enumerator(w: &Vocabulary) -> Expansion {
    generate(w, &Vocabulary::new(), ExpansionOptions::default()).expect("generated text parses")
}

/// The enumerator program, additionally defining `g_inv_1 .. g_inv_k` for
/// every function `g` of arity `k > 0`: for each node in the image of `g`
/// reached through accessible arguments, the arguments of the first entry
/// found with that value.
pub fn quasi_inverse(w: &Vocabulary) -> Expansion {
    generate(w, &Vocabulary::new(), ExpansionOptions { quasi_inverses: true, duplicates: false }).expect("generated text parses")
}

/// The enumerator program, additionally copying every function `g` of
/// positive arity to `g'` on tuples of accessible nodes.
pub fn duplicate_functions(w: &Vocabulary) -> Expansion {
    generate(w, &Vocabulary::new(), ExpansionOptions { quasi_inverses: false, duplicates: true }).expect("generated text parses")
}

pub fn expansion(w: &Vocabulary, opts: ExpansionOptions) -> Expansion {
    generate(w, &Vocabulary::new(), opts).expect("generated text parses")
}

/// [`expansion`] over `w` for a program whose vocabulary also contains
/// `reserved`: auxiliary names avoid `reserved`, whose identifiers are
/// declared but not enumerated. Fails if the two disagree on a signature.
pub fn expansion_within(w: &Vocabulary, reserved: &Vocabulary, opts: ExpansionOptions) -> Result<Expansion, SyntaxError> {
    generate(w, reserved, opts)
}
