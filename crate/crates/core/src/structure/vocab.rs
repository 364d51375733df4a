use std::collections::HashMap;
use std::fmt;

use serde::Serialize;

use super::StructureError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Kind {
    Function,
    Relation,
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Kind::Function => f.write_str("fn"),
            Kind::Relation => f.write_str("rel"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Symbol {
    pub name: String,
    pub kind: Kind,
    pub arity: usize,
}

impl Symbol {
    pub fn is_token(&self) -> bool {
        self.kind == Kind::Function && self.arity == 0
    }

    pub fn is_pointer(&self) -> bool {
        self.kind == Kind::Function && self.arity == 1
    }
}

/// Function and relation identifiers with their arities.
///
/// Declaration order is significant: it is the identifier order used to
/// break ties when canonicalizing structures.
#[derive(Debug, Clone, Default)]
pub struct Vocabulary {
    entries: Vec<Symbol>,
    index: HashMap<String, usize>,
}

impl PartialEq for Vocabulary {
    fn eq(&self, other: &Self) -> bool {
        self.entries == other.entries
    }
}

impl Eq for Vocabulary {}

impl Vocabulary {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a purely functional vocabulary from `(name, arity)` pairs.
    pub fn functional<'a, I>(entries: I) -> Result<Self, StructureError>
    where
        I: IntoIterator<Item = (&'a str, usize)>,
    {
        let mut v = Vocabulary::new();
        for (name, arity) in entries {
            v.add_function(name, arity)?;
        }
        Ok(v)
    }

    pub fn add(&mut self, name: &str, kind: Kind, arity: usize) -> Result<usize, StructureError> {
        if self.index.contains_key(name) {
            return Err(StructureError::DuplicateIdentifier(name.to_string()));
        }
        let id = self.entries.len();
        self.entries.push(Symbol { name: name.to_string(), kind, arity });
        self.index.insert(name.to_string(), id);
        Ok(id)
    }

    pub fn add_function(&mut self, name: &str, arity: usize) -> Result<usize, StructureError> {
        self.add(name, Kind::Function, arity)
    }

    pub fn add_relation(&mut self, name: &str, arity: usize) -> Result<usize, StructureError> {
        self.add(name, Kind::Relation, arity)
    }

    /// Adds the identifier unless an identical declaration is already present.
    pub fn ensure(&mut self, name: &str, kind: Kind, arity: usize) -> Result<usize, StructureError> {
        match self.lookup(name) {
            Some(id) => {
                let s = &self.entries[id];
                if s.kind == kind && s.arity == arity {
                    Ok(id)
                } else {
                    Err(StructureError::ArityConflict {
                        name: name.to_string(),
                        expected: format!("{} {}/{}", s.kind, s.name, s.arity),
                        found: format!("{kind} {name}/{arity}"),
                    })
                }
            }
            None => self.add(name, kind, arity),
        }
    }

    pub fn lookup(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn get(&self, name: &str) -> Option<&Symbol> {
        self.lookup(name).map(|i| &self.entries[i])
    }

    pub fn symbol(&self, id: usize) -> &Symbol {
        &self.entries[id]
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Symbol> {
        self.entries.iter()
    }

    pub fn tokens(&self) -> impl Iterator<Item = &Symbol> {
        self.entries.iter().filter(|s| s.is_token())
    }

    pub fn functions(&self) -> impl Iterator<Item = &Symbol> {
        self.entries.iter().filter(|s| s.kind == Kind::Function)
    }

    pub fn max_arity(&self) -> usize {
        self.entries.iter().map(|s| s.arity).max().unwrap_or(0)
    }

    /// True when every identifier of `self` occurs in `other` with the same kind and arity.
    pub fn is_subset_of(&self, other: &Vocabulary) -> bool {
        self.entries
            .iter()
            .all(|s| other.get(&s.name).is_some_and(|o| o.kind == s.kind && o.arity == s.arity))
    }

    /// Union that keeps `self`'s order and appends unseen identifiers of `other`.
    pub fn merged(&self, other: &Vocabulary) -> Result<Vocabulary, StructureError> {
        let mut out = self.clone();
        for s in other.iter() {
            out.ensure(&s.name, s.kind, s.arity)?;
        }
        Ok(out)
    }

    /// Restriction to the named identifiers, in the order given.
    pub fn restricted<S: AsRef<str>>(&self, names: &[S]) -> Result<Vocabulary, StructureError> {
        let mut out = Vocabulary::new();
        for n in names {
            let s = self
                .get(n.as_ref())
                .ok_or_else(|| StructureError::UnknownIdentifier(n.as_ref().to_string()))?;
            out.add(&s.name, s.kind, s.arity)?;
        }
        Ok(out)
    }
}

impl fmt::Display for Vocabulary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.entries.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{} {}/{}", s.kind, s.name, s.arity)?;
        }
        Ok(())
    }
}

/// Returns a name absent from `vocab`, derived from `hint` by suffixing the
/// least natural that makes it unused.
pub fn free_identifier(vocab: &Vocabulary, hint: &str) -> String {
    if !vocab.contains(hint) {
        return hint.to_string();
    }
    (1..)
        .map(|i| format!("{hint}{i}"))
        .find(|n| !vocab.contains(n))
        .expect("unbounded search")
}
