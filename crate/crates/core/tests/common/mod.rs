//! Fixtures shared by the integration tests: random corpora, recurrence
//! modules and program mutations.

#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::Rng;

use stv_core::structure::{Kind, NodeId, PartialStructure, Term, Vocabulary};
use stv_core::syntax::{Program, Revision, Script};

pub const NAT: &str = "algebra { z/0 s/1 }
def add = rec { z(x) => x; s(n, x)[y] => s(y) }
def double(x) = add(x, x)";

pub const WORDS: &str = "algebra { e/0 0/1 1/1 }
def append = rec { e(x) => x; 0(u, x)[y] => 0(y); 1(u, x)[y] => 1(y) }";

/// Trees and unary naturals share one algebra; `size` counts the leaf and
/// node constructors of a tree.
pub const TREES: &str = "algebra { leaf/0 node/2 z/0 s/1 }
def add = rec { z(x) => x; s(n, x)[y] => s(y); leaf(x) => x; node(l, r, x)[a, b] => x }
def size = rec { leaf => s(z); node(l, r)[a, b] => s(add(a, b)); z => z; s(n)[y] => z }";

/// Word term with the first letter outermost, over nil `e`.
pub fn word_term(w: &str) -> Term {
    w.chars().rev().fold(Term::token("e"), |t, c| Term::app(c.to_string(), vec![t]))
}

pub fn random_word(rng: &mut impl Rng, max_len: usize) -> String {
    let len = rng.gen_range(0..=max_len);
    (0..len).map(|_| if rng.gen() { '1' } else { '0' }).collect()
}

/// Every binary word of length at most `max_len`.
pub fn all_words(max_len: usize, alphabet: &[char]) -> Vec<String> {
    let mut out = vec![String::new()];
    let mut layer = vec![String::new()];
    for _ in 0..max_len {
        layer = layer.iter().flat_map(|w| alphabet.iter().map(move |c| format!("{w}{c}"))).collect();
        out.extend(layer.iter().cloned());
    }
    out
}

/// All `leaf`/`node` trees of height at most `h`.
pub fn all_trees(h: usize) -> Vec<Term> {
    let mut trees = vec![Term::token("leaf")];
    for _ in 1..h {
        let mut next = vec![Term::token("leaf")];
        for l in &trees {
            for r in &trees {
                next.push(Term::app("node", vec![l.clone(), r.clone()]));
            }
        }
        trees = next;
    }
    trees
}

/// A random tree of height exactly `h`.
pub fn random_tree(rng: &mut impl Rng, h: usize) -> Term {
    if h == 1 {
        return Term::token("leaf");
    }
    let full = random_tree(rng, h - 1);
    let other_height = rng.gen_range(1..h);
    let other = random_tree(rng, other_height);
    let (l, r) = if rng.gen() { (full, other) } else { (other, full) };
    Term::app("node", vec![l, r])
}

/// A random accessible functional structure with at most `max_nodes`
/// nodes and arities at most 2. Every new node is created as the value of
/// an entry whose arguments already exist, so all nodes are accessible.
pub fn random_structure(rng: &mut impl Rng, max_nodes: usize) -> PartialStructure {
    let tokens = rng.gen_range(1..=2);
    let pointers = rng.gen_range(1..=2);
    let binaries = rng.gen_range(0..=2);
    let mut entries: Vec<(String, usize)> = Vec::new();
    entries.extend((0..tokens).map(|i| (format!("c{i}"), 0)));
    entries.extend((0..pointers).map(|i| (format!("f{i}"), 1)));
    entries.extend((0..binaries).map(|i| (format!("g{i}"), 2)));
    let vocab = Vocabulary::functional(entries.iter().map(|(n, a)| (n.as_str(), *a))).unwrap();
    let mut s = PartialStructure::new(vocab);
    let target = rng.gen_range(1..=max_nodes);

    let mut nodes: Vec<NodeId> = Vec::new();
    for (name, _) in entries.iter().filter(|(_, a)| *a == 0) {
        let v = if nodes.is_empty() || (nodes.len() < target && rng.gen()) {
            let n = s.add_node();
            nodes.push(n);
            n
        } else {
            *nodes.choose(rng).unwrap()
        };
        s.define_by_name(name, &[], v).unwrap();
    }
    let functions: Vec<&(String, usize)> = entries.iter().filter(|(_, a)| *a > 0).collect();
    let extra = rng.gen_range(0..=target);
    let mut attempts = 0;
    while (nodes.len() < target || attempts < extra) && attempts < 20 * max_nodes {
        attempts += 1;
        let (name, arity) = functions.choose(rng).unwrap();
        let args: Vec<NodeId> = (0..*arity).map(|_| *nodes.choose(rng).unwrap()).collect();
        let f = s.vocab().lookup(name).unwrap();
        if s.apply(f, &args).is_some() {
            continue;
        }
        let v = if nodes.len() < target && rng.gen_bool(0.7) {
            let n = s.add_node();
            nodes.push(n);
            n
        } else {
            *nodes.choose(rng).unwrap()
        };
        s.define(f, &args, v).unwrap();
    }
    s
}

/// One mutant per variant loop: the loop body gains an extension of its
/// first variant component.
pub fn variant_mutants(script: &Script) -> Vec<Script> {
    let Some(token) = script.vocab.tokens().next().map(|s| s.name.clone()) else {
        return Vec::new();
    };
    let total = count_variant_loops(&script.body);
    (0..total)
        .map(|target| {
            let mut m = script.clone();
            let mut seen = 0;
            mutate(&mut m.body, target, &mut seen, &script.vocab, &token);
            m
        })
        .collect()
}

fn count_variant_loops(body: &[Program]) -> usize {
    body.iter()
        .map(|p| {
            let own = usize::from(matches!(p, Program::DoVariant { .. }));
            own + p.blocks().iter().map(|(_, b)| count_variant_loops(b)).sum::<usize>()
        })
        .sum()
}

fn mutate(body: &mut [Program], target: usize, seen: &mut usize, vocab: &Vocabulary, token: &str) {
    for p in body.iter_mut() {
        match p {
            Program::DoVariant { variant, body, .. } => {
                if *seen == target {
                    let comp = &variant[0];
                    let sym = vocab.symbol(vocab.lookup(comp).unwrap());
                    let args = vec![Term::token(token); sym.arity];
                    let rev = if sym.kind == Kind::Relation {
                        Revision::RelExt { r: comp.clone(), args }
                    } else {
                        Revision::FuncExt { f: comp.clone(), args, value: Term::token(token) }
                    };
                    body.push(Program::Rev(rev));
                }
                *seen += 1;
                mutate(body, target, seen, vocab, token);
            }
            Program::Seq(b) | Program::Do { body: b, .. } => mutate(b, target, seen, vocab, token),
            Program::If { then, els, .. } => {
                mutate(then, target, seen, vocab, token);
                mutate(els, target, seen, vocab, token);
            }
            Program::Rev(_) => {}
        }
    }
}
