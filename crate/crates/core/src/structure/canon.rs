//! Canonical encoding of the accessible part of a structure.
//!
//! Accessible nodes are labeled level by level: at each height, a node's key
//! is the least (identifier position, argument labels) over its defining
//! entries whose arguments sit at lower heights. Keys are distinct within a
//! level because a function's value is determined by its arguments, so the
//! labeling commutes with isomorphism.

use std::collections::HashMap;
use std::fmt;
use std::fmt::Write as _;

use serde::Serialize;

use super::text::write_entries;
use super::{NodeId, PartialStructure};

/// Text in the explicit structure format with nodes numbered `0..n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct CanonicalForm(pub String);

impl CanonicalForm {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for CanonicalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Canonical labeling of accessible nodes, in label order.
pub fn canonical_order(s: &PartialStructure) -> Vec<NodeId> {
    let acc = s.accessibility();
    let mut levels: Vec<Vec<NodeId>> = Vec::new();
    for (&n, &h) in &acc.heights {
        if levels.len() < h {
            levels.resize(h, Vec::new());
        }
        levels[h - 1].push(n);
    }
    let mut keys: HashMap<NodeId, (usize, Vec<u32>)> = HashMap::new();
    let mut label: HashMap<NodeId, u32> = HashMap::new();
    let mut order = Vec::with_capacity(acc.len());
    // Candidate entries grouped by the height of their value.
    let mut by_level: Vec<Vec<(usize, Vec<NodeId>, NodeId)>> = vec![Vec::new(); levels.len()];
    for (f, sym) in s.vocab().iter().enumerate() {
        if sym.kind != super::Kind::Function {
            continue;
        }
        for (args, v) in s.function_entries(f) {
            let Some(&hv) = acc.heights.get(&v) else { continue };
            let fits = args.iter().all(|a| acc.heights.get(a).is_some_and(|&ha| ha < hv));
            if fits {
                by_level[hv - 1].push((f, args.to_vec(), v));
            }
        }
    }
    for (lvl, nodes) in levels.iter().enumerate() {
        for (f, args, v) in &by_level[lvl] {
            let key = (*f, args.iter().map(|a| label[a]).collect::<Vec<u32>>());
            match keys.get(v) {
                Some(k) if *k <= key => {}
                _ => {
                    keys.insert(*v, key);
                }
            }
        }
        let mut sorted = nodes.clone();
        sorted.sort_by(|a, b| keys[a].cmp(&keys[b]));
        for n in sorted {
            label.insert(n, order.len() as u32);
            order.push(n);
        }
    }
    order
}

/// Encodes the accessible part of `s` so that two structures over the same
/// vocabulary get equal encodings exactly when their accessible parts are
/// isomorphic.
pub fn canonical_form(s: &PartialStructure) -> CanonicalForm {
    let order = canonical_order(s);
    let labels: HashMap<NodeId, NodeId> = order.iter().enumerate().map(|(i, n)| (*n, NodeId(i as u32))).collect();
    let mut out = String::new();
    for sym in s.vocab().iter() {
        let _ = writeln!(out, "{} {}/{}", sym.kind, sym.name, sym.arity);
    }
    for i in 0..order.len() {
        let _ = writeln!(out, "node {i}");
    }
    write_entries(s, &labels, &mut out);
    CanonicalForm(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structure::{parse_structure, word_structure, Vocabulary};

    #[test]
    fn renumbering_invariance() {
        let a = word_structure(&["0", "1"], "e", "01").unwrap();
        let mut b = PartialStructure::new(a.vocab().clone());
        let n = [b.add_node(), b.add_node(), b.add_node()];
        b.define_by_name("1", &[n[1]], n[0]).unwrap();
        b.define_by_name("0", &[n[2]], n[1]).unwrap();
        b.define_by_name("e", &[], n[2]).unwrap();
        assert_eq!(canonical_form(&a), canonical_form(&b));
    }

    #[test]
    fn distinguishes_words() {
        let a = word_structure(&["0", "1"], "e", "01").unwrap();
        let b = word_structure(&["0", "1"], "e", "10").unwrap();
        assert_ne!(canonical_form(&a), canonical_form(&b));
    }

    #[test]
    fn ignores_inaccessible() {
        let a = word_structure(&["0", "1"], "e", "01").unwrap();
        let mut b = a.clone();
        let x = b.add_node();
        let y = b.add_node();
        b.define_by_name("0", &[x], y).unwrap();
        assert_eq!(canonical_form(&a), canonical_form(&b));
    }

    #[test]
    fn idempotent_on_dag() {
        let v = Vocabulary::functional([("c", 0), ("d", 0), ("g", 2)]).unwrap();
        let mut s = PartialStructure::new(v);
        let c = s.add_node();
        let d = s.add_node();
        let x = s.add_node();
        s.define_by_name("c", &[], c).unwrap();
        s.define_by_name("d", &[], d).unwrap();
        s.define_by_name("g", &[c, d], x).unwrap();
        s.define_by_name("g", &[d, c], x).unwrap();
        s.define_by_name("g", &[x, x], c).unwrap();
        let f = canonical_form(&s);
        let again = canonical_form(&parse_structure(f.as_str()).unwrap());
        assert_eq!(f, again);
    }
}
