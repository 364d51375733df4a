//! Building blocks shared by the generators: chain traversal and chain
//! duplication.

use crate::syntax::{ProgramBuilder, SyntaxError};

/// `def p(c) or def q(c) ...` over the given pointers.
pub(crate) fn any_def(pointers: &[String], cursor: &str) -> String {
    pointers.iter().map(|p| format!("def {p}({cursor})")).collect::<Vec<_>>().join(" or ")
}

/// Nested conditionals selecting the first defined pointer at `cursor` and
/// running `body(p, i)` for it.
pub(crate) fn switch(pointers: &[String], cursor: &str, body: &dyn Fn(&str, usize) -> String) -> String {
    fn go(ps: &[String], i: usize, cursor: &str, body: &dyn Fn(&str, usize) -> String) -> String {
        let p = &ps[i];
        let then = body(p, i);
        if i + 1 == ps.len() {
            format!("if [def {p}({cursor})] {{ {then} }}")
        } else {
            format!("if [def {p}({cursor})] {{ {then} }} {{ {} }}", go(ps, i + 1, cursor, body))
        }
    }
    go(pointers, 0, cursor, body)
}

pub(crate) fn strings(xs: &[&str]) -> Vec<String> {
    xs.iter().map(|s| s.to_string()).collect()
}

/// Appends statements that copy the chain starting at token `head` along
/// `pointers` onto `copies`, on the same nodes. The original pointers are
/// consumed by a first loop, which writes the copy and a temporary second
/// copy, and rebuilt from the temporary copy by a second loop; both loops
/// have their consumed identifiers as variant. `copies` must be declared and
/// empty along the chain.
pub fn dup_chain(b: &mut ProgramBuilder, head: &str, pointers: &[String], copies: &[String]) -> Result<(), SyntaxError> {
    assert_eq!(pointers.len(), copies.len());
    let hats: Vec<String> = pointers.iter().map(|p| b.fresh_fn(&format!("{p}^"), 1)).collect();
    let cur = b.fresh_fn("a", 0);
    let prev = b.fresh_fn("b", 0);

    b.push(&format!("{cur} := {head}"))?;
    let consume = switch(pointers, &cur, &|p, i| {
        let (c, h) = (&copies[i], &hats[i]);
        format!("{c}({cur}) <- {p}({cur}); {h}({cur}) <- {p}({cur}); {cur} := {p}({cur}); drop {p}({prev})")
    });
    let variant: Vec<&str> = pointers.iter().map(String::as_str).collect();
    b.do_variant(&any_def(pointers, &cur), &variant, |b| {
        b.push(&format!("{prev} := {cur}"))?;
        b.push(&consume)
    })?;

    b.push(&format!("{cur} := {head}"))?;
    let restore = switch(&hats, &cur, &|h, i| {
        let p = &pointers[i];
        format!("{p}({cur}) <- {h}({cur}); drop {h}({cur}); {cur} := {p}({cur})")
    });
    let hat_variant: Vec<&str> = hats.iter().map(String::as_str).collect();
    b.do_variant(&any_def(&hats, &cur), &hat_variant, |b| b.push(&restore))?;
    b.push(&format!("drop {cur}; drop {prev}"))
}
