//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line per
//! criterion and exits non-zero if any fails. Tolerances are exact unless a
//! constant below says otherwise.

mod common;

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;
use stv_core::analysis::{bound, check_pr_bound, check_stv, eval_bound_u64, BoundValue, PrBoundOptions};
use stv_core::interp::{run, run_transducer, RunOptions};
use stv_core::num_bigint::BigUint;
use stv_core::prc::{bound_transform, compile_pr, eval_pr, numeral, pr_input, read_term, PrModule};
use stv_core::stdlib::{self, BAR_BITS};
use stv_core::structure::{
    canonical_form, term_structure, word_structure, word_structure_with, PartialStructure, Term, ROOT_TOKEN,
};
use stv_core::syntax::{parse_program, Script};
use stv_core::tm::{compile_tm, machines, simulate_tm, TmOutcome};

const SEED: u64 = 0x5eed_2026;
const CONCAT_PAIRS: usize = 200;
const CONCAT_MAX_LEN: usize = 64;
const MULT_MAX_N: usize = 16;
const MULT_MAX_LEN: usize = 16;
const MULT_WORDS_PER_N: usize = 8;
const DUP_MAX_LEN: usize = 64;
const EXP_MAX_N: usize = 12;
const STRUCTURES: usize = 100;
const STRUCTURE_MAX_NODES: usize = 40;
/// Sum of argument heights for the recurrence comparisons.
const PR_TOTAL_HEIGHT: usize = 8;
/// Trees up to this height are enumerated exhaustively; taller ones (up to
/// the total height) are sampled.
const TREE_EXHAUSTIVE_HEIGHT: usize = 5;
const TREE_SAMPLES_PER_HEIGHT: usize = 40;
const PR_TIME_LIMIT: Duration = Duration::from_secs(60);
const TM_MAX_LEN: usize = 10;
const TM_FUEL: u64 = 10_000_000;
const WORD_SAMPLES: usize = 100;
const WORD_SAMPLE_MAX_LEN: usize = 200;

type Verdict = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn rng(stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(SEED);
    r.set_stream(stream);
    r
}

fn word(w: &str) -> PartialStructure {
    word_structure(&["0", "1"], "e", w).unwrap()
}

fn halt(p: &Script, input: &PartialStructure) -> PartialStructure {
    run(p, input, RunOptions::unlimited()).unwrap().into_result().unwrap().0
}

fn concat_corpus() -> Vec<(String, String)> {
    let mut r = rng(1);
    let mut pairs = vec![(String::new(), String::new())];
    while pairs.len() < CONCAT_PAIRS {
        pairs.push((random_word(&mut r, CONCAT_MAX_LEN), random_word(&mut r, CONCAT_MAX_LEN)));
    }
    pairs
}

fn structure_corpus() -> Vec<PartialStructure> {
    let mut r = rng(3);
    (0..STRUCTURES).map(|_| random_structure(&mut r, STRUCTURE_MAX_NODES)).collect()
}

fn budget_module() -> PrModule {
    PrModule::parse(&format!("{NAT}\ndef budget(x) = double(x)")).unwrap()
}

fn transformed_splice() -> Script {
    let input = stdlib::concat_input("", "").unwrap();
    bound_transform(&stdlib::concat_splice(), Some(input.vocab()), &budget_module(), "budget").unwrap()
}

fn criterion_1() -> Verdict {
    let programs = [
        ("splice", stdlib::concat_splice()),
        ("copy", stdlib::concat_copy()),
        ("stv-splice", stdlib::stv_concat_splice()),
        ("stv-copy", stdlib::stv_concat_copy()),
    ];
    let pairs = concat_corpus();
    for (u, v) in &pairs {
        let input = stdlib::concat_input(u, v).unwrap();
        let want = canonical_form(&word(&format!("{u}{v}")));
        for (name, p) in &programs {
            let out = run_transducer(p, &input, &["e", "0", "1"], None).map_err(|e| e.to_string())?;
            ensure!(canonical_form(&out) == want, "{name} on ({u}, {v})");
        }
    }
    let mut r = rng(2);
    let mut mults = 0;
    for p in [stdlib::string_mult(), stdlib::stv_mult()] {
        for n in 0..=MULT_MAX_N {
            let mut words = vec![String::new(), "1".repeat(MULT_MAX_LEN)];
            while words.len() < MULT_WORDS_PER_N {
                words.push(random_word(&mut r, MULT_MAX_LEN));
            }
            for w in &words {
                let out = run_transducer(&p, &stdlib::mult_input(n, w).unwrap(), &["e", "0", "1"], None)
                    .map_err(|e| e.to_string())?;
                ensure!(canonical_form(&out) == canonical_form(&word(&w.repeat(n))), "mult {n}·{w}");
                mults += 1;
            }
        }
    }
    Ok(format!("{} concat pairs x 4 programs, {mults} multiplications", pairs.len()))
}

fn criterion_2() -> Verdict {
    let mut r = rng(4);
    let dup = stdlib::string_dup();
    for len in 0..=DUP_MAX_LEN {
        let w: String = (0..len).map(|_| if r.gen() { '1' } else { '0' }).collect();
        let out = halt(&dup, &word(&w));
        let plain = out.reduct(&["e", "0", "1"]).unwrap().accessible_part();
        let barred = out.reduct(&["e~", "0~", "1~"]).unwrap().accessible_part();
        ensure!(canonical_form(&plain) == canonical_form(&word(&w)), "first copy of {w}");
        let want = word_structure_with(&BAR_BITS, "e~", &w).unwrap();
        ensure!(canonical_form(&barred) == canonical_form(&want), "second copy of {w}");
    }
    let exp = stdlib::exponentiation();
    for n in 0..=EXP_MAX_N {
        let out = halt(&exp, &stdlib::unary(n));
        let len = stdlib::chain_length(&out, "y", "t");
        ensure!(len == Some(1 << n), "exponentiation {n}: chain {len:?}");
    }
    Ok(format!("duplication |w| <= {DUP_MAX_LEN}, exponentiation n <= {EXP_MAX_N}"))
}

fn criterion_3(corpus: &[PartialStructure]) -> Verdict {
    let mut listed = 0;
    for (i, s) in corpus.iter().enumerate() {
        let x = stdlib::enumerator(s.vocab());
        ensure!(check_stv(&x.script).ok, "structure {i}: enumerator is not STV");
        let out = halt(&x.script, s);
        let Some(listing) = x.enumerator.listing(&out) else {
            return Err(format!("structure {i}: enumeration repeats a node"));
        };
        let acc = s.accessibility();
        let set: BTreeSet<_> = listing.iter().copied().collect();
        ensure!(set == s.accessible_nodes(), "structure {i}: enumeration is not the accessible set");
        let succ = out.vocab().lookup(&x.enumerator.succ).unwrap();
        ensure!(out.apply(succ, &[*listing.last().unwrap()]).is_none(), "structure {i}: successor past the end");
        let heights: Vec<usize> = listing.iter().map(|n| acc.heights[n]).collect();
        ensure!(heights.windows(2).all(|w| w[0] <= w[1]), "structure {i}: heights {heights:?}");
        listed += listing.len();
    }
    Ok(format!("{} structures, {listed} nodes enumerated", corpus.len()))
}

fn criterion_4(corpus: &[PartialStructure]) -> Verdict {
    let mut checked = 0;
    for (i, s) in corpus.iter().enumerate() {
        let x = stdlib::quasi_inverse(s.vocab());
        ensure!(check_stv(&x.script).ok, "structure {i}: quasi-inverse program is not STV");
        let out = halt(&x.script, s);
        let names: Vec<&str> = s.vocab().iter().map(|sym| sym.name.as_str()).collect();
        ensure!(out.reduct(&names).unwrap() == *s, "structure {i}: input changed");
        for sym in s.vocab().functions().filter(|f| f.arity > 0) {
            let f = out.vocab().lookup(&sym.name).unwrap();
            let inv: Vec<usize> = x.inverses[&sym.name].iter().map(|g| out.vocab().lookup(g).unwrap()).collect();
            let image: BTreeSet<_> = s.function_entries(f).map(|(_, v)| v).collect();
            for v in image {
                let args: Option<Vec<_>> = inv.iter().map(|&g| out.apply(g, &[v])).collect();
                let Some(args) = args else {
                    return Err(format!("structure {i}: {} has no inverse at {v:?}", sym.name));
                };
                ensure!(out.apply(f, &args) == Some(v), "structure {i}: {} law fails at {v:?}", sym.name);
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} image points"))
}

/// STV programs with their inputs: the string programs, the expansion
/// programs, compiled recurrences and a bound-transformed program.
fn stv_corpus(structures: &[PartialStructure]) -> Vec<(String, Script, Vec<PartialStructure>)> {
    let mut r = rng(5);
    let words: Vec<_> = (0..12).map(|_| word(&random_word(&mut r, 12))).collect();
    let pairs: Vec<_> = concat_corpus()
        .iter()
        .take(12)
        .map(|(u, v)| stdlib::concat_input(&u[..u.len().min(12)], &v[..v.len().min(12)]).unwrap())
        .collect();
    let mults: Vec<_> = (0..6).map(|n| stdlib::mult_input(n, &random_word(&mut r, 5)).unwrap()).collect();
    let unary: Vec<_> = (0..8).map(stdlib::unary).collect();
    let small: Vec<_> = structures.iter().filter(|s| s.node_count() <= 15).take(10).cloned().collect();
    let mut out = vec![
        ("string_dup".into(), stdlib::string_dup(), words.clone()),
        ("stv_concat_splice".into(), stdlib::stv_concat_splice(), pairs.clone()),
        ("stv_concat_copy".into(), stdlib::stv_concat_copy(), pairs.clone()),
        ("stv_mult".into(), stdlib::stv_mult(), mults),
        ("exponentiation".into(), stdlib::exponentiation(), unary),
        ("concat_splice bounded".into(), transformed_splice(), pairs[..4].to_vec()),
    ];
    for (i, s) in small.iter().enumerate() {
        let v = s.vocab();
        out.push((format!("enumerator #{i}"), stdlib::enumerator(v).script, vec![s.clone()]));
        out.push((format!("quasi_inverse #{i}"), stdlib::quasi_inverse(v).script, vec![s.clone()]));
        out.push((format!("duplicate_functions #{i}"), stdlib::duplicate_functions(v).script, vec![s.clone()]));
    }
    out.push(("enumerator words".into(), stdlib::enumerator(words[0].vocab()).script, words.clone()));

    let nat = PrModule::parse(NAT).unwrap();
    let nat_pairs: Vec<_> =
        (0..4).flat_map(|a| (0..4).map(move |b| (a, b))).map(|(a, b)| pr_input(&nat.algebra, &[numeral(a), numeral(b)]).unwrap()).collect();
    out.push(("compiled add".into(), compile_pr(&nat, "add").unwrap().script, nat_pairs));
    let singles: Vec<_> = (0..6).map(|a| pr_input(&nat.algebra, &[numeral(a)]).unwrap()).collect();
    out.push(("compiled double".into(), compile_pr(&nat, "double").unwrap().script, singles));
    let wm = PrModule::parse(WORDS).unwrap();
    let wpairs: Vec<_> = [("", ""), ("01", "1"), ("110", ""), ("1", "0101")]
        .iter()
        .map(|(u, v)| pr_input(&wm.algebra, &[word_term(u), word_term(v)]).unwrap())
        .collect();
    out.push(("compiled append".into(), compile_pr(&wm, "append").unwrap().script, wpairs));
    let tm = PrModule::parse(TREES).unwrap();
    let trees: Vec<_> = all_trees(3).iter().map(|t| pr_input(&tm.algebra, std::slice::from_ref(t)).unwrap()).collect();
    out.push(("compiled tree size".into(), compile_pr(&tm, "size").unwrap().script, trees));
    out
}

fn criterion_5(corpus: &[(String, Script, Vec<PartialStructure>)]) -> Verdict {
    let mut instances = 0;
    for (name, p, inputs) in corpus {
        let r = check_pr_bound(p, inputs, &PrBoundOptions::default()).map_err(|e| format!("{name}: {e}"))?;
        ensure!(r.ok(), "{name}: {} falsifications, first {:?}", r.falsifications.len(), r.falsifications[0]);
        ensure!(r.fuel_exhausted == 0, "{name}: ran out of fuel");
        instances += r.instances;
    }
    let single = parse_program("vocab { fn e/0 fn 0/1 fn 1/1 fn f/1 }\nf(e) <- e").unwrap();
    let b = bound(&single).map_err(|e| e.to_string())?;
    ensure!(eval_bound_u64(&b, 5, None) == BoundValue::Value(BigUint::from(6u32)), "single extension at 5");
    let inputs: Vec<_> = ["", "0", "0110"].iter().map(|w| word(w)).collect();
    let literal = PrBoundOptions { literal: true, ..PrBoundOptions::default() };
    let lit = check_pr_bound(&single, &inputs, &literal).map_err(|e| e.to_string())?;
    ensure!(!lit.ok(), "the constant base case was not falsified");
    Ok(format!(
        "{} programs, {instances} bound instances, 0 falsifications; constant base case falsified {} times",
        corpus.len(),
        lit.falsifications.len()
    ))
}

fn criterion_6(corpus: &[(String, Script, Vec<PartialStructure>)]) -> Verdict {
    let mut mutants = 0;
    for (name, p, inputs) in corpus {
        ensure!(check_stv(p).ok, "{name}: not STV");
        for s in inputs {
            let halted = run(p, s, RunOptions::unlimited()).map_err(|e| format!("{name}: {e}"))?.halted().is_some();
            ensure!(halted, "{name}: did not halt");
        }
        for m in variant_mutants(p) {
            ensure!(!check_stv(&m).ok, "{name}: mutant accepted");
            mutants += 1;
        }
    }
    Ok(format!("{} programs halted, {mutants} mutants rejected", corpus.len()))
}

fn compare_pr(m: &PrModule, name: &str, args: &[Term], oracle: &Term) -> Result<(), String> {
    let compiled = compile_pr(m, name).map_err(|e| e.to_string())?;
    let expected = eval_pr(m, m.lookup(name).unwrap(), args).map_err(|e| e.to_string())?;
    ensure!(expected == *oracle, "{name}{args:?}: evaluator gives {expected}, oracle {oracle}");
    let input = pr_input(&m.algebra, args).unwrap();
    let out = run_transducer(&compiled.script, &input, &compiled.output, None).map_err(|e| e.to_string())?;
    let want = term_structure(&expected, &m.algebra.vocabulary()).unwrap();
    ensure!(canonical_form(&out) == canonical_form(&want), "{name}{args:?}: compiled output differs");
    ensure!(read_term(&out, &m.algebra, ROOT_TOKEN).as_ref() == Some(&expected), "{name}{args:?}: unreadable output");
    Ok(())
}

fn criterion_7() -> Verdict {
    let start = Instant::now();
    let mut tuples = 0;
    let nat = PrModule::parse(NAT).unwrap();
    // A numeral n has height n + 1.
    for a in 0..PR_TOTAL_HEIGHT {
        for b in 0..PR_TOTAL_HEIGHT {
            if (a + 1) + (b + 1) <= PR_TOTAL_HEIGHT {
                compare_pr(&nat, "add", &[numeral(a), numeral(b)], &numeral(a + b))?;
                tuples += 1;
            }
        }
        compare_pr(&nat, "double", &[numeral(a)], &numeral(2 * a))?;
        tuples += 1;
    }
    let wm = PrModule::parse(WORDS).unwrap();
    let words = all_words(PR_TOTAL_HEIGHT - 2, &['0', '1']);
    for u in &words {
        for v in &words {
            if (u.len() + 1) + (v.len() + 1) <= PR_TOTAL_HEIGHT {
                compare_pr(&wm, "append", &[word_term(u), word_term(v)], &word_term(&format!("{u}{v}")))?;
                tuples += 1;
            }
        }
    }
    let tm = PrModule::parse(TREES).unwrap();
    let mut trees = all_trees(TREE_EXHAUSTIVE_HEIGHT);
    let mut r = rng(7);
    for h in TREE_EXHAUSTIVE_HEIGHT + 1..=PR_TOTAL_HEIGHT {
        trees.extend((0..TREE_SAMPLES_PER_HEIGHT).map(|_| random_tree(&mut r, h)));
    }
    for t in &trees {
        compare_pr(&tm, "size", std::slice::from_ref(t), &numeral(t.tree_size()))?;
        tuples += 1;
    }
    let elapsed = start.elapsed();
    ensure!(elapsed < PR_TIME_LIMIT, "took {elapsed:?}");
    Ok(format!("{tuples} argument tuples in {:.1}s", elapsed.as_secs_f64()))
}

fn criterion_8() -> Verdict {
    let mut runs = 0;
    for (name, text) in [("identity", machines::IDENTITY), ("successor", machines::UNARY_SUCCESSOR), ("flip", machines::BIT_FLIP)] {
        let m = machines::load(text);
        let c = compile_tm(&m).map_err(|e| e.to_string())?;
        for w in all_words(TM_MAX_LEN, &m.input) {
            let want = match simulate_tm(&m, &w, TM_FUEL) {
                TmOutcome::Printed(tape) => m.output_word(&tape),
                other => return Err(format!("{name} on {w}: oracle {other:?}")),
            };
            let out = run_transducer(&c.script, &m.input_structure(&w).unwrap(), &m.output_names(), Some(TM_FUEL))
                .map_err(|e| format!("{name} on {w}: {e}"))?;
            ensure!(m.decode(&out).as_deref() == Some(want.as_str()), "{name} on {w}");
            let expected = m.input_structure(&want).unwrap();
            ensure!(canonical_form(&out) == canonical_form(&expected), "{name} on {w}: structure differs");
            runs += 1;
        }
    }
    Ok(format!("3 machines, {runs} inputs"))
}

fn criterion_9() -> Verdict {
    let plain = stdlib::concat_splice();
    let bounded = transformed_splice();
    let report = check_stv(&bounded);
    ensure!(report.ok, "transformed program is not STV: {:?}", report.violations);
    let pairs = concat_corpus();
    for (u, v) in &pairs {
        let input = stdlib::concat_input(u, v).unwrap();
        let a = run_transducer(&plain, &input, &["e", "0", "1"], None).map_err(|e| e.to_string())?;
        let b = run_transducer(&bounded, &input, &["e", "0", "1"], None).map_err(|e| e.to_string())?;
        ensure!(canonical_form(&a) == canonical_form(&b), "outputs differ on ({u}, {v})");
    }
    Ok(format!("{} pairs, budget 2n", pairs.len()))
}

fn criterion_10() -> Verdict {
    let mut r = rng(10);
    for _ in 0..WORD_SAMPLES {
        let w = random_word(&mut r, WORD_SAMPLE_MAX_LEN);
        let size = word(&w).size().0;
        ensure!(size == w.len() as u64, "size {size} for |w| = {}", w.len());
    }
    Ok(format!("{WORD_SAMPLES} words"))
}

fn main() -> ExitCode {
    let structures = structure_corpus();
    let corpus = stv_corpus(&structures);
    let titles = [
        "string programs match concatenation and repetition",
        "duplication and exponentiation",
        "enumerator lists accessible nodes by height",
        "quasi-inverse law",
        "size bound holds on the STV corpus",
        "STV programs halt and mutants are rejected",
        "compiled recurrences match the evaluator",
        "compiled Turing transducers match the simulator",
        "bound-transformed concatenation keeps its outputs",
        "word structure size is word length",
    ];
    let results: Vec<(Verdict, Duration)> = std::thread::scope(|scope| {
        let jobs: Vec<Box<dyn Fn() -> Verdict + Send + Sync + '_>> = vec![
            Box::new(criterion_1),
            Box::new(criterion_2),
            Box::new(|| criterion_3(&structures)),
            Box::new(|| criterion_4(&structures)),
            Box::new(|| criterion_5(&corpus)),
            Box::new(|| criterion_6(&corpus)),
            Box::new(criterion_7),
            Box::new(criterion_8),
            Box::new(criterion_9),
            Box::new(criterion_10),
        ];
        let handles: Vec<_> = jobs
            .into_iter()
            .map(|job| {
                scope.spawn(move || {
                    let t = Instant::now();
                    let v = std::panic::catch_unwind(std::panic::AssertUnwindSafe(&job))
                        .unwrap_or_else(|_| Err("panicked".into()));
                    (v, t.elapsed())
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    let mut failed = 0;
    for (i, ((verdict, took), title)) in results.iter().zip(titles).enumerate() {
        let (tag, detail) = match verdict {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("criterion {:>2} {tag} [{:>6.2}s] {title}: {detail}", i + 1, took.as_secs_f64());
    }
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
