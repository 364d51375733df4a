use std::fmt::Write as _;

use crate::structure::Term;

use super::{Guard, Program, Revision, Script, Test};

const INDENT: &str = "  ";

fn args(ts: &[Term]) -> String {
    ts.iter().map(Term::to_string).collect::<Vec<_>>().join(", ")
}

fn application(head: &str, ts: &[Term]) -> String {
    if ts.is_empty() {
        head.to_string()
    } else {
        format!("{head}({})", args(ts))
    }
}

fn precedence(g: &Guard) -> u8 {
    match g {
        Guard::Or(..) => 1,
        Guard::And(..) => 2,
        Guard::Not(_) => 3,
        _ => 4,
    }
}

fn guard_at(g: &Guard, min: u8, out: &mut String) {
    let wrap = precedence(g) < min;
    if wrap {
        out.push('(');
    }
    match g {
        Guard::True => out.push_str("true"),
        Guard::False => out.push_str("false"),
        Guard::Test(Test::Def(t)) => {
            let _ = write!(out, "def {t}");
        }
        Guard::Test(Test::Eq(a, b)) => {
            let _ = write!(out, "{a} == {b}");
        }
        Guard::Test(Test::Rel(r, ts)) => out.push_str(&application(r, ts)),
        Guard::Not(a) => {
            out.push_str("not ");
            guard_at(a, 3, out);
        }
        Guard::And(a, b) => {
            guard_at(a, 2, out);
            out.push_str(" and ");
            guard_at(b, 3, out);
        }
        Guard::Or(a, b) => {
            guard_at(a, 1, out);
            out.push_str(" or ");
            guard_at(b, 2, out);
        }
    }
    if wrap {
        out.push(')');
    }
}

pub fn guard_text(g: &Guard) -> String {
    let mut s = String::new();
    guard_at(g, 0, &mut s);
    s
}

pub fn revision_text(r: &Revision) -> String {
    match r {
        Revision::FuncExt { f, args, value } => format!("{} <- {value}", application(f, args)),
        Revision::FuncContr { f, args } => format!("drop {}", application(f, args)),
        Revision::RelExt { r, args: ts } => format!("{r}+ ({})", args(ts)),
        Revision::RelContr { r, args: ts } => format!("{r}- ({})", args(ts)),
        Revision::Inception(c) => format!("new {c}"),
        Revision::Deletion(c) => format!("del {c}"),
    }
}

fn block(ps: &[Program], depth: usize, out: &mut String) {
    out.push_str("{\n");
    for p in ps {
        statement(p, depth + 1, out);
    }
    out.push_str(&INDENT.repeat(depth));
    out.push('}');
}

fn statement(p: &Program, depth: usize, out: &mut String) {
    out.push_str(&INDENT.repeat(depth));
    match p {
        Program::Rev(r) => {
            out.push_str(&revision_text(r));
            out.push(';');
        }
        Program::Seq(ps) => block(ps, depth, out),
        Program::If { guard, then, els } => {
            let _ = write!(out, "if [{}] ", guard_text(guard));
            block(then, depth, out);
            out.push(' ');
            block(els, depth, out);
        }
        Program::Do { guard, body } => {
            let _ = write!(out, "do [{}] ", guard_text(guard));
            block(body, depth, out);
        }
        Program::DoVariant { guard, variant, body } => {
            let _ = write!(out, "do [{}] [{}] ", guard_text(guard), variant.join(", "));
            block(body, depth, out);
        }
    }
    out.push('\n');
}

/// Prints statements without a vocabulary header.
pub fn print_body(ps: &[Program]) -> String {
    let mut out = String::new();
    for p in ps {
        statement(p, 0, &mut out);
    }
    out
}

/// Concrete syntax of a script; parsing it back yields the same script.
pub fn pretty_print(s: &Script) -> String {
    let mut out = String::from("vocab {\n");
    for sym in s.vocab.iter() {
        let _ = writeln!(out, "{INDENT}{} {}/{}", sym.kind, sym.name, sym.arity);
    }
    out.push_str("}\n");
    out.push_str(&print_body(&s.body));
    out
}

#[cfg(test)]
mod tests {
    use super::super::parse_program;
    use super::*;

    #[test]
    fn round_trip_nested() {
        let text = "vocab { fn e/0 fn 0/1 fn 1/1 fn a/0 rel R/2 }\n\
            a := e;\n\
            do [def 0(a) or def 1(a)] [0, 1] {\n\
              if [not (def 0(a) and R(a, e))] { R+ (a, e) } { R- (a, e); drop 1(a) }\n\
              { new 0(a); }\n\
            }";
        let s = parse_program(text).unwrap();
        let printed = pretty_print(&s);
        let again = parse_program(&printed).unwrap();
        assert_eq!(again, s);
        assert_eq!(pretty_print(&again), printed);
    }

    #[test]
    fn indentation_is_deterministic() {
        let s = parse_program("vocab { fn a/0 } do [def a] { if [true] { drop a } { } }").unwrap();
        assert_eq!(
            pretty_print(&s),
            "vocab {\n  fn a/0\n}\ndo [def a] {\n  if [true] {\n    drop a;\n  } {\n  }\n}\n"
        );
    }

    #[test]
    fn guard_parenthesization() {
        let a = Guard::def(Term::token("a"));
        let g = Guard::and(a.clone(), Guard::and(a.clone(), Guard::or(a.clone(), a.clone())));
        assert_eq!(guard_text(&g), "def a and (def a and (def a or def a))");
    }
}
