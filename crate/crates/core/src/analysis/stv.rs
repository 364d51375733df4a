use std::fmt;

use serde::Serialize;

use crate::syntax::{Location, Program, Script};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum ViolationKind {
    /// A loop body extends a component of an enclosing variant.
    VariantExtended,
    /// A variant component is a token.
    NullaryComponent,
    /// A variant component is not declared.
    UnknownComponent,
    /// A loop without a variant.
    PlainLoop,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Violation {
    pub kind: ViolationKind,
    /// Location of the offending loop.
    pub loop_location: Location,
    pub component: Option<String>,
    /// Location of the offending revision, for extensions.
    pub revision: Option<Location>,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            ViolationKind::VariantExtended => write!(
                f,
                "loop {}: variant component `{}` is extended at {}",
                self.loop_location,
                self.component.as_deref().unwrap_or("?"),
                self.revision.as_ref().map(ToString::to_string).unwrap_or_default()
            ),
            ViolationKind::NullaryComponent => write!(
                f,
                "loop {}: variant component `{}` has arity 0",
                self.loop_location,
                self.component.as_deref().unwrap_or("?")
            ),
            ViolationKind::UnknownComponent => write!(
                f,
                "loop {}: variant component `{}` is not declared",
                self.loop_location,
                self.component.as_deref().unwrap_or("?")
            ),
            ViolationKind::PlainLoop => write!(f, "loop {} has no variant", self.loop_location),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StvReport {
    pub ok: bool,
    pub violations: Vec<Violation>,
}

struct Checker<'a> {
    script: &'a Script,
    out: Vec<Violation>,
}

impl Checker<'_> {
    fn walk(&mut self, p: &Program, loc: &Location, enclosing: &[(Location, String)]) {
        match p {
            Program::Rev(r) => {
                if let Some(eigen) = r.eigen_extended() {
                    for (lp, comp) in enclosing.iter().filter(|(_, c)| c == eigen) {
                        self.out.push(Violation {
                            kind: ViolationKind::VariantExtended,
                            loop_location: lp.clone(),
                            component: Some(comp.clone()),
                            revision: Some(loc.clone()),
                        });
                    }
                }
            }
            Program::Do { body, .. } => {
                self.out.push(Violation {
                    kind: ViolationKind::PlainLoop,
                    loop_location: loc.clone(),
                    component: None,
                    revision: None,
                });
                self.block("body", body, loc, enclosing);
            }
            Program::DoVariant { variant, body, .. } => {
                let mut inner = enclosing.to_vec();
                for c in variant {
                    let kind = match self.script.vocab.get(c) {
                        None => Some(ViolationKind::UnknownComponent),
                        Some(s) if s.arity == 0 => Some(ViolationKind::NullaryComponent),
                        Some(_) => None,
                    };
                    if let Some(kind) = kind {
                        self.out.push(Violation {
                            kind,
                            loop_location: loc.clone(),
                            component: Some(c.clone()),
                            revision: None,
                        });
                    }
                    inner.push((loc.clone(), c.clone()));
                }
                self.block("body", body, loc, &inner);
            }
            Program::Seq(_) | Program::If { .. } => {
                for (label, b) in p.blocks() {
                    self.block(label, b, loc, enclosing);
                }
            }
        }
    }

    fn block(&mut self, label: &str, ps: &[Program], loc: &Location, enclosing: &[(Location, String)]) {
        for (i, q) in ps.iter().enumerate() {
            self.walk(q, &loc.child(label, i), enclosing);
        }
    }
}

/// Checks that the script is an STV program: every loop has a variant of
/// positive-arity identifiers, none of which is extended inside the loop.
pub fn check_stv(script: &Script) -> StvReport {
    let mut c = Checker { script, out: Vec::new() };
    c.block("", &script.body, &Location::root(), &[]);
    let mut violations = c.out;
    violations.sort();
    StvReport { ok: violations.is_empty(), violations }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_program;

    const HEADER: &str = "vocab { fn e/0 fn 0/1 fn 1/1 fn a/0 fn b/0 rel R/1 }\n";

    fn check(body: &str) -> StvReport {
        check_stv(&parse_program(&format!("{HEADER}{body}")).unwrap())
    }

    #[test]
    fn extension_of_variant_component() {
        let r = check("do [def 0(a)] [0] { 0(a) <- b }");
        assert!(!r.ok);
        assert_eq!(r.violations.len(), 1);
        let v = &r.violations[0];
        assert_eq!(v.kind, ViolationKind::VariantExtended);
        assert_eq!(v.loop_location.to_string(), "/0");
        assert_eq!(v.revision.as_ref().unwrap().to_string(), "/0/body/0");
    }

    #[test]
    fn nested_loops_inherit_enclosing_variants() {
        let r = check("do [true] [0] { do [true] [1] { if [true] { } { 0(a) <- e } } }");
        assert_eq!(r.violations.len(), 1);
        assert_eq!(r.violations[0].loop_location.to_string(), "/0");
        assert_eq!(r.violations[0].revision.as_ref().unwrap().to_string(), "/0/body/0/body/0/else/0");
        assert!(check("do [true] [0] { drop 0(a); R+ (a) } do [true] [R] { 0(a) <- e; R- (a) }").ok);
    }

    #[test]
    fn plain_loops_rejected() {
        let r = check("do [true] { }");
        assert_eq!(r.violations[0].kind, ViolationKind::PlainLoop);
    }

    #[test]
    fn nullary_component_from_ast() {
        let mut s = parse_program(&format!("{HEADER}do [true] [0] {{ }}")).unwrap();
        if let Program::DoVariant { variant, .. } = &mut s.body[0] {
            variant.push("a".into());
        }
        let r = check_stv(&s);
        assert_eq!(r.violations[0].kind, ViolationKind::NullaryComponent);
    }
}
