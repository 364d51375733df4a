//! Programs over binary words: concatenation, multiplication, duplication
//! and exponentiation.
//!
//! Words are chains: the nil token denotes the first node and each letter is
//! a pointer to the next node, so `T("01")` is `e -0-> x -1-> y`. Cursors
//! advance through a conditional on which pointer is defined, since
//! assigning an undefined term clears the cursor. The multiplication
//! programs move the string input onto hatted pointers before building the
//! output on a fresh nil, so the output holds exactly `n` copies.

use crate::structure::{oplus, word_structure_with, PartialStructure, StructureError, Vocabulary};
use crate::syntax::{parse_program, ProgramBuilder, Script, SyntaxError};

use super::chain::{dup_chain, strings};

pub const BITS: [(char, &str); 2] = [('0', "0"), ('1', "1")];
pub const HAT_BITS: [(char, &str); 2] = [('0', "0^"), ('1', "1^")];
pub const BAR_BITS: [(char, &str); 2] = [('0', "0~"), ('1', "1~")];

/// `T(u) ⊕ T̂(v)`: `u` over `e, 0, 1` and `v` over `e^, 0^, 1^`.
pub fn concat_input(u: &str, v: &str) -> Result<PartialStructure, StructureError> {
    oplus(&[word_structure_with(&BITS, "e", u)?, word_structure_with(&HAT_BITS, "e^", v)?])
}

/// Unary numeral `n` over token `z` and pointer `s`.
pub fn unary(n: usize) -> PartialStructure {
    word_structure_with(&[('1', "s")], "z", &"1".repeat(n)).expect("fixed alphabet")
}

/// `T(n) ⊕ T(w)` with `n` over `z, s` and `w` over `e, 0, 1`.
pub fn mult_input(n: usize, w: &str) -> Result<PartialStructure, StructureError> {
    oplus(&[unary(n), word_structure_with(&BITS, "e", w)?])
}

fn bits_vocab(extra: &[(&str, usize)]) -> Vocabulary {
    let base = [("e", 0), ("0", 1), ("1", 1)];
    Vocabulary::functional(base.iter().chain(extra).copied()).expect("distinct names")
}

const CONCAT_HEADER: &str = "vocab { fn e/0 fn 0/1 fn 1/1 fn e^/0 fn 0^/1 fn 1^/1 fn a/0 fn b/0 fn c/0 }";

const STEP_A: &str = "if [def 0(a)] { a := 0(a) } { a := 1(a) }";

/// Concatenation by splicing `v` onto the end of `u`; uses no inception.
/// Input [`concat_input`], output reduct `e, 0, 1`.
pub fn concat_splice() -> Script {
    parse_program(&format!(
        "{CONCAT_HEADER}
        a <- e
        do [def 0(a) or def 1(a)] {{ {STEP_A} }}
        0(a) <- 0^(e^); 1(a) <- 1^(e^)
        {STEP_A}
        do [def 0^(a) or def 1^(a)] {{
          0(a) <- 0^(a); 1(a) <- 1^(a)
          {STEP_A}
        }}"
    ))
    .expect("fixed program")
}

/// Concatenation by copying `v` onto new nodes after `u`, leaving the
/// hatted input intact. Input [`concat_input`], output reduct `e, 0, 1`.
pub fn concat_copy() -> Script {
    parse_program(&format!(
        "{CONCAT_HEADER}
        a <- e
        do [def 0(a) or def 1(a)] {{ {STEP_A} }}
        b <- e^
        do [def 0^(b) or def 1^(b)] {{
          new c
          if [def 0^(b)] {{ 0(a) <- c; a := c; b := 0^(b) }} {{ 1(a) <- c; a := c; b := 1^(b) }}
          drop c
        }}"
    ))
    .expect("fixed program")
}

/// Moves the word at `e` onto `0^, 1^` rooted at `e^` and puts `e` on a
/// fresh node. The loop consumes `0, 1` when `variant` is set.
fn move_to_hats(variant: bool) -> String {
    let v = if variant { " [0, 1]" } else { "" };
    format!(
        "a <- e
        do [def 0(a) or def 1(a)]{v} {{
          if [def 0(a)] {{ 0^(a) <- 0(a); c := 0(a); drop 0(a); a := c }}
            {{ 1^(a) <- 1(a); c := 1(a); drop 1(a); a := c }}
        }}
        e^ <- e; drop e; new e; drop c; a := e"
    )
}

/// `n` copies of `w`. Input [`mult_input`], output reduct `e, 0, 1`.
pub fn string_mult() -> Script {
    let prelude = move_to_hats(false);
    parse_program(&format!(
        "vocab {{ fn z/0 fn s/1 fn e/0 fn 0/1 fn 1/1 fn e^/0 fn 0^/1 fn 1^/1 fn a/0 fn b/0 fn c/0 fn i/0 }}
        {prelude}
        i <- z
        do [def s(i)] {{
          i := s(i)
          b := e^
          do [def 0^(b) or def 1^(b)] {{
            new c
            if [def 0^(b)] {{ 0(a) <- c; b := 0^(b) }} {{ 1(a) <- c; b := 1^(b) }}
            a := c; drop c
          }}
        }}"
    ))
    .expect("fixed program")
}

/// Duplicates the word onto `e~, 0~, 1~` on the same nodes, keeping
/// `e, 0, 1`. Input `T(w)`.
pub fn string_dup() -> Script {
    let mut b = ProgramBuilder::new(bits_vocab(&[("e~", 0), ("0~", 1), ("1~", 1)]));
    b.push("e~ <- e").expect("fixed text");
    dup_chain(&mut b, "e", &strings(&["0", "1"]), &strings(&["0~", "1~"])).expect("fixed text");
    b.build()
}

/// Duplicates both inputs and moves a cursor to the end of `u`, consuming
/// the copy of `u`. Returns the builder and the cursor token.
fn concat_prelude() -> Result<(ProgramBuilder, String), SyntaxError> {
    let mut b = ProgramBuilder::new(bits_vocab(&[
        ("e^", 0),
        ("0^", 1),
        ("1^", 1),
        ("0~", 1),
        ("1~", 1),
        ("0^~", 1),
        ("1^~", 1),
    ]));
    dup_chain(&mut b, "e", &strings(&["0", "1"]), &strings(&["0~", "1~"]))?;
    dup_chain(&mut b, "e^", &strings(&["0^", "1^"]), &strings(&["0^~", "1^~"]))?;
    let a = b.fresh_fn("a", 0);
    b.push(&format!("{a} <- e"))?;
    b.push(&format!(
        "do [def 0~({a}) or def 1~({a})] [0~, 1~] {{
          if [def 0~({a})] {{ drop 0~({a}); {a} := 0({a}) }} {{ drop 1~({a}); {a} := 1({a}) }}
        }}"
    ))?;
    Ok((b, a))
}

/// Splicing concatenation with both inputs duplicated first; the copies
/// serve as loop variants. Input [`concat_input`].
pub fn stv_concat_splice() -> Script {
    let build = || -> Result<Script, SyntaxError> {
        let (mut b, a) = concat_prelude()?;
        b.push(&format!(
            "0({a}) <- 0^(e^); 1({a}) <- 1^(e^)
            if [def 0({a})] {{ {a} := 0({a}) }} {{ {a} := 1({a}) }}
            do [def 0^~({a}) or def 1^~({a})] [0^~, 1^~] {{
              if [def 0^~({a})] {{ 0({a}) <- 0^({a}); drop 0^~({a}); {a} := 0({a}) }}
                {{ 1({a}) <- 1^({a}); drop 1^~({a}); {a} := 1({a}) }}
            }}"
        ))?;
        Ok(b.build())
    };
    build().expect("fixed program")
}

/// Copying concatenation with both inputs duplicated first. Input
/// [`concat_input`]; the hatted input is left intact.
pub fn stv_concat_copy() -> Script {
    let build = || -> Result<Script, SyntaxError> {
        let (mut b, a) = concat_prelude()?;
        let cur = b.fresh_fn("b", 0);
        let c = b.fresh_fn("c", 0);
        b.push(&format!(
            "{cur} <- e^
            do [def 0^~({cur}) or def 1^~({cur})] [0^~, 1^~] {{
              new {c}
              if [def 0^({cur})] {{ 0({a}) <- {c}; {a} := {c}; drop 0^~({cur}); {cur} := 0^({cur}) }}
                {{ 1({a}) <- {c}; {a} := {c}; drop 1^~({cur}); {cur} := 1^({cur}) }}
              drop {c}
            }}"
        ))?;
        Ok(b.build())
    };
    build().expect("fixed program")
}

/// Multiplication with `s` consumed by the outer loop and a fresh copy of
/// the template consumed by the inner loop. Input [`mult_input`].
pub fn stv_mult() -> Script {
    let build = || -> Result<Script, SyntaxError> {
        let v = Vocabulary::functional([
            ("z", 0),
            ("s", 1),
            ("e", 0),
            ("0", 1),
            ("1", 1),
            ("e^", 0),
            ("0^", 1),
            ("1^", 1),
            ("0^~", 1),
            ("1^~", 1),
            ("a", 0),
            ("b", 0),
            ("c", 0),
            ("i", 0),
        ])
        .expect("distinct names");
        let mut b = ProgramBuilder::new(v);
        b.push(&move_to_hats(true))?;
        b.push("i <- z")?;
        b.do_variant("def s(i)", &["s"], |b| {
            b.push("c := s(i); drop s(i); i := c; drop c")?;
            dup_chain(b, "e^", &strings(&["0^", "1^"]), &strings(&["0^~", "1^~"]))?;
            b.push(
                "b := e^
                do [def 0^~(b) or def 1^~(b)] [0^~, 1^~] {
                  new c
                  if [def 0^(b)] { 0(a) <- c; drop 0^~(b); b := 0^(b) } { 1(a) <- c; drop 1^~(b); b := 1^(b) }
                  a := c; drop c
                }",
            )
        })?;
        Ok(b.build())
    };
    build().expect("fixed program")
}

/// Maps the unary numeral `n` (over `z, s`) to a chain of `2^n` pointer
/// steps over `y, t`. Each pass of the main loop consumes one `s` entry,
/// makes two copies of `t`, walks one to the end of the chain and appends
/// one new node per entry of the other.
pub fn exponentiation() -> Script {
    let build = || -> Result<Script, SyntaxError> {
        let v = Vocabulary::functional([
            ("z", 0),
            ("s", 1),
            ("y", 0),
            ("t", 1),
            ("t1", 1),
            ("t2", 1),
            ("a", 0),
            ("c", 0),
            ("d", 0),
            ("i", 0),
        ])
            .expect("distinct names");
        let mut b = ProgramBuilder::new(v);
        b.push("new y; new c; t(y) <- c; drop c; i <- z")?;
        b.do_variant("def s(i)", &["s"], |b| {
            b.push("c := s(i); drop s(i); i := c; drop c")?;
            dup_chain(b, "y", &strings(&["t"]), &strings(&["t1"]))?;
            dup_chain(b, "y", &strings(&["t"]), &strings(&["t2"]))?;
            b.push(
                "a := y
                do [def t2(a)] [t2] { c := t2(a); drop t2(a); a := c }
                d := y
                do [def t1(d)] [t1] { c := t1(d); drop t1(d); d := c; drop c; new c; t(a) <- c; a := c; drop c }
                drop a; drop d",
            )
        })?;
        Ok(b.build())
    };
    build().expect("fixed program")
}

/// Length of the chain from token `head` along `pointer`, if it is a simple
/// path.
pub fn chain_length(s: &PartialStructure, head: &str, pointer: &str) -> Option<usize> {
    crate::structure::read_word(s, &[('1', pointer)], head).map(|w| w.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::check_stv;
    use crate::interp::{run_transducer, run, RunOptions};
    use crate::structure::{canonical_form, read_word, word_structure};

    fn concat_out(p: &Script, u: &str, v: &str) -> PartialStructure {
        run_transducer(p, &concat_input(u, v).unwrap(), &["e", "0", "1"], None).unwrap()
    }

    fn word(w: &str) -> PartialStructure {
        word_structure(&["0", "1"], "e", w).unwrap()
    }

    #[test]
    fn concatenations() {
        for p in [concat_splice(), concat_copy(), stv_concat_splice(), stv_concat_copy()] {
            for (u, v) in [("01", "1"), ("", "0110"), ("10", ""), ("", ""), ("111", "000")] {
                let out = concat_out(&p, u, v);
                assert_eq!(canonical_form(&out), canonical_form(&word(&format!("{u}{v}"))), "{u}·{v}");
            }
        }
        assert!(!concat_splice().is_plain_st() || concat_splice().loop_count() == 2);
        assert!(check_stv(&stv_concat_splice()).ok);
        assert!(check_stv(&stv_concat_copy()).ok);
    }

    #[test]
    fn copying_keeps_second_input() {
        let (out, _) =
            run(&concat_copy(), &concat_input("01", "110").unwrap(), RunOptions::unlimited()).unwrap().into_result().unwrap();
        assert_eq!(read_word(&out, &HAT_BITS, "e^").as_deref(), Some("110"));
        let r = out.reduct(&["e", "0", "1"]).unwrap().accessible_part();
        assert_eq!(r.node_count(), 6);
    }

    #[test]
    fn multiplication() {
        for p in [string_mult(), stv_mult()] {
            for (n, w) in [(2, "01"), (0, "10"), (3, "1"), (1, "")] {
                let out = run_transducer(&p, &mult_input(n, w).unwrap(), &["e", "0", "1"], None).unwrap();
                assert_eq!(canonical_form(&out), canonical_form(&word(&w.repeat(n))), "{n}·{w}");
            }
        }
        assert!(check_stv(&stv_mult()).ok);
    }

    #[test]
    fn duplication() {
        let p = string_dup();
        assert!(check_stv(&p).ok);
        let (out, _) = run(&p, &word("011"), RunOptions::unlimited()).unwrap().into_result().unwrap();
        assert_eq!(read_word(&out, &BITS, "e").as_deref(), Some("011"));
        assert_eq!(read_word(&out, &BAR_BITS, "e~").as_deref(), Some("011"));
        assert_eq!(out.size().0, 6);
    }

    #[test]
    fn powers_of_two() {
        let p = exponentiation();
        assert!(check_stv(&p).ok);
        for n in 0..6 {
            let (out, _) = run(&p, &unary(n), RunOptions::unlimited()).unwrap().into_result().unwrap();
            assert_eq!(chain_length(&out, "y", "t"), Some(1 << n));
        }
    }
}
