//! Finite partial structures over a vocabulary of function and relation
//! identifiers.
//!
//! A structure is a finite universe of opaque nodes together with a partial
//! function for each function identifier and a set of tuples for each
//! relation identifier. Term structures and word structures are the
//! standard encodings of free-algebra elements and strings.

mod canon;
mod term;
mod text;
mod vocab;

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;

use serde::Serialize;
use smallvec::SmallVec;
use thiserror::Error;

pub use canon::{canonical_form, canonical_order, CanonicalForm};
pub use term::Term;
pub(crate) use term::is_ident_char;
pub use text::{parse_structure, print_structure};
pub use vocab::{free_identifier, Kind, Symbol, Vocabulary};

/// Reserved token denoting the whole term in a term structure.
pub const ROOT_TOKEN: &str = "•";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StructureError {
    #[error("identifier `{0}` declared twice")]
    DuplicateIdentifier(String),
    #[error("unknown identifier `{0}`")]
    UnknownIdentifier(String),
    #[error("relation identifier `{0}` used in term position")]
    RelationInTerm(String),
    #[error("function identifier `{0}` used as a relation")]
    FunctionAsRelation(String),
    #[error("`{name}` expects {expected} arguments, found {found}")]
    ArityMismatch { name: String, expected: usize, found: usize },
    #[error("conflicting declarations of `{name}`: {expected} vs {found}")]
    ArityConflict { name: String, expected: String, found: String },
    #[error("node {0} is not in the universe")]
    UnknownNode(u32),
    #[error("function `{0}` is already defined at that argument tuple")]
    AlreadyDefined(String),
    #[error("identifier `{0}` occurs in more than one component")]
    Collision(String),
    #[error("term structures need a purely functional vocabulary (found relation `{0}`)")]
    RelationalVocabulary(String),
    #[error("character `{0}` is not in the alphabet")]
    NotInAlphabet(char),
    #[error("the universe must be non-empty")]
    EmptyUniverse,
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
}

/// Identity of a node within one structure. Carries no meaning beyond that.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct NodeId(pub u32);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

pub type Tuple = SmallVec<[NodeId; 2]>;

#[derive(Debug, Clone, PartialEq, Eq)]
enum Table {
    Func(BTreeMap<Tuple, NodeId>),
    Rel(BTreeSet<Tuple>),
}

impl Table {
    fn for_kind(kind: Kind) -> Self {
        match kind {
            Kind::Function => Table::Func(BTreeMap::new()),
            Kind::Relation => Table::Rel(BTreeSet::new()),
        }
    }

    fn len(&self) -> usize {
        match self {
            Table::Func(m) => m.len(),
            Table::Rel(s) => s.len(),
        }
    }
}

/// Count of tuples in the graphs of positive-arity functions and in relations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct StructureSize(pub u64);

impl fmt::Display for StructureSize {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone)]
pub struct PartialStructure {
    vocab: Vocabulary,
    universe: BTreeSet<NodeId>,
    next_node: u32,
    tables: Vec<Table>,
    size: u64,
}

impl PartialEq for PartialStructure {
    fn eq(&self, other: &Self) -> bool {
        self.vocab == other.vocab && self.universe == other.universe && self.tables == other.tables
    }
}

impl Eq for PartialStructure {}

/// Accessible nodes with their heights (length of a shortest address).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Accessibility {
    pub heights: BTreeMap<NodeId, usize>,
    /// Number of defining entries (tokens included) per accessible node whose
    /// arguments are all accessible.
    pub entry_counts: BTreeMap<NodeId, usize>,
    /// A shortest address for each accessible node.
    pub addresses: BTreeMap<NodeId, Term>,
}

impl Accessibility {
    pub fn contains(&self, n: NodeId) -> bool {
        self.heights.contains_key(&n)
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.heights.keys().copied()
    }

    pub fn len(&self) -> usize {
        self.heights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heights.is_empty()
    }
}

impl PartialStructure {
    /// A structure with an empty universe; add nodes before use.
    pub fn new(vocab: Vocabulary) -> Self {
        let tables = vocab.iter().map(|s| Table::for_kind(s.kind)).collect();
        PartialStructure { vocab, universe: BTreeSet::new(), next_node: 0, tables, size: 0 }
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn add_node(&mut self) -> NodeId {
        let n = NodeId(self.next_node);
        self.next_node += 1;
        self.universe.insert(n);
        n
    }

    /// Inserts a node with a caller-chosen id (used by the text reader).
    pub fn insert_node(&mut self, n: NodeId) {
        self.universe.insert(n);
        self.next_node = self.next_node.max(n.0 + 1);
    }

    pub fn contains_node(&self, n: NodeId) -> bool {
        self.universe.contains(&n)
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.universe.iter().copied()
    }

    pub fn node_count(&self) -> usize {
        self.universe.len()
    }

    pub fn id(&self, name: &str) -> Result<usize, StructureError> {
        self.vocab.lookup(name).ok_or_else(|| StructureError::UnknownIdentifier(name.to_string()))
    }

    /// Value of function `f` at `args`, if defined.
    pub fn apply(&self, f: usize, args: &[NodeId]) -> Option<NodeId> {
        match &self.tables[f] {
            Table::Func(m) => m.get(args).copied(),
            Table::Rel(_) => None,
        }
    }

    pub fn holds(&self, r: usize, args: &[NodeId]) -> bool {
        match &self.tables[r] {
            Table::Rel(s) => s.contains(args),
            Table::Func(_) => false,
        }
    }

    pub fn token(&self, name: &str) -> Option<NodeId> {
        self.vocab.lookup(name).and_then(|i| self.apply(i, &[]))
    }

    fn check_nodes(&self, args: &[NodeId]) -> Result<(), StructureError> {
        match args.iter().find(|n| !self.universe.contains(n)) {
            Some(n) => Err(StructureError::UnknownNode(n.0)),
            None => Ok(()),
        }
    }

    fn check_arity(&self, id: usize, found: usize) -> Result<(), StructureError> {
        let s = self.vocab.symbol(id);
        if s.arity != found {
            return Err(StructureError::ArityMismatch { name: s.name.clone(), expected: s.arity, found });
        }
        Ok(())
    }

    /// Adds `f(args) = value`. Returns false when already defined with that value.
    pub fn define(&mut self, f: usize, args: &[NodeId], value: NodeId) -> Result<bool, StructureError> {
        self.check_arity(f, args.len())?;
        self.check_nodes(args)?;
        self.check_nodes(&[value])?;
        let positive = !args.is_empty();
        let name = || self.vocab.symbol(f).name.clone();
        match &self.tables[f] {
            Table::Func(m) => match m.get(args) {
                Some(v) if *v == value => return Ok(false),
                Some(_) => return Err(StructureError::AlreadyDefined(name())),
                None => {}
            },
            Table::Rel(_) => return Err(StructureError::FunctionAsRelation(name())),
        }
        if let Table::Func(m) = &mut self.tables[f] {
            m.insert(Tuple::from_slice(args), value);
        }
        if positive {
            self.size += 1;
        }
        Ok(true)
    }

    pub fn define_by_name(&mut self, f: &str, args: &[NodeId], value: NodeId) -> Result<bool, StructureError> {
        let id = self.id(f)?;
        self.define(id, args, value)
    }

    /// Removes the entry of `f` at `args`; returns whether one was removed.
    pub fn undefine(&mut self, f: usize, args: &[NodeId]) -> bool {
        let positive = !args.is_empty();
        match &mut self.tables[f] {
            Table::Func(m) => {
                let removed = m.remove(args).is_some();
                if removed && positive {
                    self.size -= 1;
                }
                removed
            }
            Table::Rel(_) => false,
        }
    }

    pub fn relate(&mut self, r: usize, args: &[NodeId]) -> Result<bool, StructureError> {
        self.check_arity(r, args.len())?;
        self.check_nodes(args)?;
        match &mut self.tables[r] {
            Table::Rel(s) => {
                let added = s.insert(Tuple::from_slice(args));
                if added {
                    self.size += 1;
                }
                Ok(added)
            }
            Table::Func(_) => Err(StructureError::RelationInTerm(self.vocab.symbol(r).name.clone())),
        }
    }

    pub fn relate_by_name(&mut self, r: &str, args: &[NodeId]) -> Result<bool, StructureError> {
        let id = self.id(r)?;
        self.relate(id, args)
    }

    pub fn unrelate(&mut self, r: usize, args: &[NodeId]) -> bool {
        match &mut self.tables[r] {
            Table::Rel(s) => {
                let removed = s.remove(args);
                if removed {
                    self.size -= 1;
                }
                removed
            }
            Table::Func(_) => false,
        }
    }

    /// Removes a node and every tuple mentioning it. Returns, per identifier,
    /// how many tuples were removed (identifiers with no removals omitted).
    pub fn delete_node(&mut self, n: NodeId) -> Vec<(usize, usize)> {
        if !self.universe.remove(&n) {
            return Vec::new();
        }
        let mut removed = Vec::new();
        for (id, table) in self.tables.iter_mut().enumerate() {
            let positive = self.vocab.symbol(id).arity > 0;
            let before = table.len();
            match table {
                Table::Func(m) => m.retain(|k, v| *v != n && !k.contains(&n)),
                Table::Rel(s) => s.retain(|k| !k.contains(&n)),
            }
            let gone = before - table.len();
            if gone > 0 {
                if positive {
                    self.size -= gone as u64;
                }
                removed.push((id, gone));
            }
        }
        removed
    }

    /// Number of tuples currently in the interpretation of identifier `id`.
    pub fn table_len(&self, id: usize) -> usize {
        self.tables[id].len()
    }

    pub fn function_entries(&self, f: usize) -> impl Iterator<Item = (&[NodeId], NodeId)> + '_ {
        let map = match &self.tables[f] {
            Table::Func(m) => Some(m),
            Table::Rel(_) => None,
        };
        map.into_iter().flat_map(|m| m.iter().map(|(k, v)| (k.as_slice(), *v)))
    }

    pub fn relation_tuples(&self, r: usize) -> impl Iterator<Item = &[NodeId]> + '_ {
        let set = match &self.tables[r] {
            Table::Rel(s) => Some(s),
            Table::Func(_) => None,
        };
        set.into_iter().flat_map(|s| s.iter().map(|k| k.as_slice()))
    }

    /// Tuples of positive-arity functions plus relation tuples; tokens excluded.
    pub fn size(&self) -> StructureSize {
        StructureSize(self.size)
    }

    /// Value of a closed term, or `None` when some application is undefined.
    pub fn eval_term(&self, t: &Term) -> Result<Option<NodeId>, StructureError> {
        t.check(&self.vocab)?;
        Ok(self.eval_checked(t))
    }

    fn eval_checked(&self, t: &Term) -> Option<NodeId> {
        let f = self.vocab.lookup(&t.head)?;
        let mut args: Tuple = SmallVec::new();
        for a in &t.args {
            args.push(self.eval_checked(a)?);
        }
        self.apply(f, &args)
    }

    pub fn accessibility(&self) -> Accessibility {
        // Each function entry waits on its arguments not yet known accessible.
        let mut waiting: Vec<(usize, Tuple, NodeId, usize)> = Vec::new();
        let mut by_node: HashMap<NodeId, Vec<usize>> = HashMap::new();
        let mut acc = Accessibility::default();
        let mut queue = VecDeque::new();
        for (f, sym) in self.vocab.iter().enumerate() {
            if sym.kind != Kind::Function {
                continue;
            }
            for (args, v) in self.function_entries(f) {
                let idx = waiting.len();
                let mut distinct: Vec<NodeId> = args.to_vec();
                distinct.sort();
                distinct.dedup();
                for a in &distinct {
                    by_node.entry(*a).or_default().push(idx);
                }
                waiting.push((f, Tuple::from_slice(args), v, distinct.len()));
                if args.is_empty() {
                    *acc.entry_counts.entry(v).or_default() += 1;
                    if let std::collections::btree_map::Entry::Vacant(e) = acc.heights.entry(v) {
                        e.insert(1);
                        acc.addresses.insert(v, Term::token(&sym.name));
                        queue.push_back(v);
                    }
                }
            }
        }
        while let Some(n) = queue.pop_front() {
            let h = acc.heights[&n];
            for &idx in by_node.get(&n).map(Vec::as_slice).unwrap_or(&[]) {
                let entry = &mut waiting[idx];
                entry.3 -= 1;
                if entry.3 > 0 {
                    continue;
                }
                let (f, args, v) = (entry.0, entry.1.clone(), entry.2);
                *acc.entry_counts.entry(v).or_default() += 1;
                if let std::collections::btree_map::Entry::Vacant(e) = acc.heights.entry(v) {
                    e.insert(h + 1);
                    let addr = Term::app(
                        self.vocab.symbol(f).name.clone(),
                        args.iter().map(|a| acc.addresses[a].clone()).collect(),
                    );
                    acc.addresses.insert(v, addr);
                    queue.push_back(v);
                }
            }
        }
        acc
    }

    pub fn accessible_nodes(&self) -> BTreeSet<NodeId> {
        self.accessibility().heights.into_keys().collect()
    }

    pub fn is_accessible(&self) -> bool {
        self.accessibility().len() == self.universe.len()
    }

    /// Accessible, and every node has exactly one address.
    pub fn is_free(&self) -> bool {
        let acc = self.accessibility();
        acc.len() == self.universe.len() && acc.entry_counts.values().all(|&c| c == 1)
    }

    /// Expansion to a larger vocabulary; new identifiers start empty.
    pub fn expand(&self, wider: &Vocabulary) -> Result<PartialStructure, StructureError> {
        for s in self.vocab.iter() {
            match wider.get(&s.name) {
                Some(w) if w.kind == s.kind && w.arity == s.arity => {}
                Some(w) => {
                    return Err(StructureError::ArityConflict {
                        name: s.name.clone(),
                        expected: format!("{} {}/{}", s.kind, s.name, s.arity),
                        found: format!("{} {}/{}", w.kind, w.name, w.arity),
                    })
                }
                None => return Err(StructureError::UnknownIdentifier(s.name.clone())),
            }
        }
        let mut out = PartialStructure::new(wider.clone());
        out.universe = self.universe.clone();
        out.next_node = self.next_node;
        for (i, s) in self.vocab.iter().enumerate() {
            let j = wider.lookup(&s.name).expect("checked above");
            out.tables[j] = self.tables[i].clone();
        }
        out.size = self.size;
        Ok(out)
    }

    /// Forgets every identifier not named, keeping the universe.
    pub fn reduct<S: AsRef<str>>(&self, names: &[S]) -> Result<PartialStructure, StructureError> {
        let vocab = self.vocab.restricted(names)?;
        let mut out = PartialStructure::new(vocab);
        out.universe = self.universe.clone();
        out.next_node = self.next_node;
        for (j, s) in out.vocab.clone().iter().enumerate() {
            let i = self.vocab.lookup(&s.name).expect("restricted");
            out.tables[j] = self.tables[i].clone();
            if s.arity > 0 {
                out.size += out.tables[j].len() as u64;
            }
        }
        Ok(out)
    }

    /// Drops inaccessible nodes and the tuples that mention them.
    pub fn accessible_part(&self) -> PartialStructure {
        let acc = self.accessible_nodes();
        let mut out = self.clone();
        for n in self.universe.iter().filter(|n| !acc.contains(n)) {
            out.delete_node(*n);
        }
        out
    }
}

/// Tuple of structures over pairwise disjoint vocabularies, presented as one
/// structure over the union vocabulary and the disjoint union of universes.
pub fn oplus(parts: &[PartialStructure]) -> Result<PartialStructure, StructureError> {
    let mut vocab = Vocabulary::new();
    for p in parts {
        for s in p.vocab.iter() {
            if vocab.contains(&s.name) {
                return Err(StructureError::Collision(s.name.clone()));
            }
            vocab.add(&s.name, s.kind, s.arity)?;
        }
    }
    let mut out = PartialStructure::new(vocab);
    for p in parts {
        let map: HashMap<NodeId, NodeId> = p.nodes().map(|n| (n, out.add_node())).collect();
        for (i, s) in p.vocab.iter().enumerate() {
            let j = out.vocab.lookup(&s.name).expect("added above");
            match &p.tables[i] {
                Table::Func(m) => {
                    for (k, v) in m {
                        let args: Tuple = k.iter().map(|a| map[a]).collect();
                        out.define(j, &args, map[v])?;
                    }
                }
                Table::Rel(set) => {
                    for k in set {
                        let args: Tuple = k.iter().map(|a| map[a]).collect();
                        out.relate(j, &args)?;
                    }
                }
            }
        }
    }
    Ok(out)
}

/// The free structure of the sub-terms of `t`; the reserved token `•`
/// (added to the vocabulary when absent) denotes `t` itself.
pub fn term_structure(t: &Term, vocab: &Vocabulary) -> Result<PartialStructure, StructureError> {
    term_structure_rooted(t, vocab, ROOT_TOKEN)
}

/// [`term_structure`] with `root` in place of `•`.
pub fn term_structure_rooted(t: &Term, vocab: &Vocabulary, root: &str) -> Result<PartialStructure, StructureError> {
    if let Some(r) = vocab.iter().find(|s| s.kind == Kind::Relation) {
        return Err(StructureError::RelationalVocabulary(r.name.clone()));
    }
    t.check(vocab)?;
    let mut full = vocab.clone();
    full.ensure(root, Kind::Function, 0)?;
    let mut s = PartialStructure::new(full);
    let mut nodes: HashMap<&Term, NodeId> = HashMap::new();
    for sub in t.subterms() {
        let n = s.add_node();
        let args: Tuple = sub.args.iter().map(|a| nodes[a]).collect();
        let f = s.id(&sub.head)?;
        s.define(f, &args, n)?;
        nodes.insert(sub, n);
    }
    let r = s.id(root)?;
    s.define(r, &[], nodes[t])?;
    Ok(s)
}

/// The string structure of `w`: a chain from the `nil` token, one pointer
/// step per character. `alphabet` maps each character to its pointer name.
pub fn word_structure_with(alphabet: &[(char, &str)], nil: &str, w: &str) -> Result<PartialStructure, StructureError> {
    let mut vocab = Vocabulary::new();
    vocab.add_function(nil, 0)?;
    for (_, p) in alphabet {
        vocab.add_function(p, 1)?;
    }
    let mut pointers = Vec::with_capacity(w.len());
    for c in w.chars() {
        let p = alphabet.iter().find(|(a, _)| *a == c).ok_or(StructureError::NotInAlphabet(c))?;
        pointers.push(p.1);
    }
    let mut s = PartialStructure::new(vocab);
    let mut cur = s.add_node();
    s.define(0, &[], cur)?;
    for p in pointers {
        let next = s.add_node();
        let f = s.id(p)?;
        s.define(f, &[cur], next)?;
        cur = next;
    }
    Ok(s)
}

/// Word structure where each alphabet entry is a one-character identifier
/// naming itself.
pub fn word_structure(alphabet: &[&str], nil: &str, w: &str) -> Result<PartialStructure, StructureError> {
    let mut pairs = Vec::with_capacity(alphabet.len());
    for a in alphabet {
        let mut cs = a.chars();
        match (cs.next(), cs.next()) {
            (Some(c), None) => pairs.push((c, *a)),
            _ => return Err(StructureError::Syntax { line: 0, message: format!("alphabet entry `{a}` is not one character") }),
        }
    }
    word_structure_with(&pairs, nil, w)
}

/// Reads back the word spelled from the `nil` token along the given pointers.
/// Stops at the first node with no outgoing pointer; returns `None` if the
/// token is undefined or a node has two outgoing pointers.
pub fn read_word(s: &PartialStructure, alphabet: &[(char, &str)], nil: &str) -> Option<String> {
    let ids: Vec<(char, usize)> = alphabet.iter().filter_map(|(c, p)| s.vocab.lookup(p).map(|i| (*c, i))).collect();
    let mut cur = s.token(nil)?;
    let mut out = String::new();
    let mut seen = BTreeSet::new();
    loop {
        if !seen.insert(cur) {
            return None;
        }
        let mut next = None;
        for (c, f) in &ids {
            if let Some(n) = s.apply(*f, &[cur]) {
                if next.is_some() {
                    return None;
                }
                next = Some((*c, n));
            }
        }
        match next {
            Some((c, n)) => {
                out.push(c);
                cur = n;
            }
            None => return Some(out),
        }
    }
}
