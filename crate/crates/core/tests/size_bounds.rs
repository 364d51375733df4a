mod common;

use common::{NAT, WORDS};
use stv_core::analysis::{bound, check_pr_bound, eval_bound_u64, BoundValue, PrBoundOptions};
use stv_core::interp::{run, RunOptions};
use stv_core::num_bigint::BigUint;
use stv_core::prc::{compile_pr, numeral, pr_input, PrModule};
use stv_core::stdlib;
use stv_core::structure::{parse_structure, word_structure, PartialStructure};
use stv_core::syntax::{parse_program, Script};

fn words() -> Vec<PartialStructure> {
    ["", "0", "1", "01", "0110", "111000"].iter().map(|w| word_structure(&["0", "1"], "e", w).unwrap()).collect()
}

fn assert_bounded(name: &str, p: &Script, inputs: &[PartialStructure]) {
    let r = check_pr_bound(p, inputs, &PrBoundOptions::default()).unwrap();
    assert!(r.ok(), "{name}: {:?}", r.falsifications);
    assert_eq!(r.fuel_exhausted, 0, "{name}");
    assert!(r.instances > 0, "{name}");
}

#[test]
fn string_and_expansion_programs_respect_their_bounds() {
    let words = words();
    let pairs: Vec<_> = [("", ""), ("0", ""), ("", "1"), ("01", "10"), ("0110", "1")]
        .iter()
        .map(|(u, v)| stdlib::concat_input(u, v).unwrap())
        .collect();
    let mults: Vec<_> = [(0, ""), (0, "1"), (2, "01"), (3, "1"), (1, "")]
        .iter()
        .map(|(n, w)| stdlib::mult_input(*n, w).unwrap())
        .collect();
    let unary: Vec<_> = (0..6).map(stdlib::unary).collect();
    assert_bounded("dup", &stdlib::string_dup(), &words);
    assert_bounded("splice", &stdlib::stv_concat_splice(), &pairs);
    assert_bounded("copy", &stdlib::stv_concat_copy(), &pairs);
    assert_bounded("mult", &stdlib::stv_mult(), &mults);
    assert_bounded("exp", &stdlib::exponentiation(), &unary);
    assert_bounded("enumerator", &stdlib::enumerator(words[0].vocab()).script, &words);
    assert_bounded("quasi-inverse", &stdlib::quasi_inverse(words[0].vocab()).script, &words);
}

#[test]
fn compiled_recurrences_respect_their_bounds() {
    let nat = PrModule::parse(NAT).unwrap();
    let inputs: Vec<_> = (0..3).map(|a| pr_input(&nat.algebra, &[numeral(a), numeral(2)]).unwrap()).collect();
    assert_bounded("add", &compile_pr(&nat, "add").unwrap().script, &inputs);
    let words = PrModule::parse(WORDS).unwrap();
    let e = stv_core::structure::Term::token("e");
    let inputs = vec![pr_input(&words.algebra, &[e.clone(), e]).unwrap()];
    assert_bounded("append", &compile_pr(&words, "append").unwrap().script, &inputs);
}

#[test]
fn single_extension_bound() {
    let p = parse_program("vocab { fn e/0 fn f/1 }\nf(e) <- e").unwrap();
    let b = bound(&p).unwrap();
    assert_eq!(eval_bound_u64(&b, 5, None), BoundValue::Value(BigUint::from(6u32)));
}

/// A variant loop whose variant is empty still runs one pass, so a body
/// that extends a pointer grows a size-0 input to size 1 while the iterated
/// bound allows 0 passes. The repaired bound is falsified only at size 0.
#[test]
fn empty_variant_loop_exceeds_bound_at_size_zero() {
    let p = parse_program("vocab { fn a/1 fn g/0 fn h/1 }\ndo [not def g] [a] { new g; h(g) <- g }").unwrap();
    let empty = parse_structure("fn a/1\nfn g/0\nfn h/1\nnode 0").unwrap();
    assert_eq!(empty.size().0, 0);
    let (out, _) = run(&p, &empty, RunOptions::unlimited()).unwrap().into_result().unwrap();
    assert_eq!(out.size().0, 1);
    let b = bound(&p).unwrap();
    assert_eq!(eval_bound_u64(&b, 0, None), BoundValue::Value(BigUint::from(0u32)));
    let r = check_pr_bound(&p, &[empty], &PrBoundOptions::default()).unwrap();
    assert!(!r.ok());

    let one = parse_structure("fn a/1\nfn g/0\nfn h/1\nnode 0\na (0) -> 0").unwrap();
    assert_eq!(one.size().0, 1);
    let r = check_pr_bound(&p, &[one], &PrBoundOptions::default()).unwrap();
    assert!(r.ok(), "{:?}", r.falsifications);
}

/// The pass that ends a variant loop contracts nothing yet may still grow
/// the structure. With two growing revisions per pass and a one-tuple
/// variant, two passes add four tuples where the iterated bound allows
/// three.
#[test]
fn final_loop_pass_exceeds_bound_at_size_one() {
    let p = parse_program(
        "vocab { fn x/0 fn a/1 fn h/1 fn k/1 fn m/1 fn q/1 }
         do [true] [a] { drop a(x); if [def h(x)] { m(x) <- x; q(x) <- x } { h(x) <- x; k(x) <- x } }",
    )
    .unwrap();
    let input = parse_structure("fn x/0\nfn a/1\nfn h/1\nfn k/1\nfn m/1\nfn q/1\nnode 0\nx () -> 0\na (0) -> 0").unwrap();
    assert_eq!(input.size().0, 1);
    let (out, trace) = run(&p, &input, RunOptions::unlimited()).unwrap().into_result().unwrap();
    assert_eq!((out.size().0, trace.max_size), (4, 4));
    assert_eq!(eval_bound_u64(&bound(&p).unwrap(), 1, None), BoundValue::Value(BigUint::from(3u32)));
    assert!(!check_pr_bound(&p, &[input], &PrBoundOptions::default()).unwrap().ok());
}
