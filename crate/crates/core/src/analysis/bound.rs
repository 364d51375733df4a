use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::syntax::{Program, Revision, Script};

use super::{check_stv, AnalysisError};

/// Expression for a function on the naturals, built compositionally from a
/// program.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum BoundFunction {
    Succ,
    Id,
    /// The constant function; only produced by [`literal_bound`].
    Const(u64),
    /// `Compose(b, a)` is `n ↦ b(a(n))`.
    Compose(Box<BoundFunction>, Box<BoundFunction>),
    Max(Box<BoundFunction>, Box<BoundFunction>),
    /// `Iter(b)` is `n ↦ b^[n](n)`.
    Iter(Box<BoundFunction>),
}

impl fmt::Display for BoundFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundFunction::Succ => f.write_str("succ"),
            BoundFunction::Id => f.write_str("id"),
            BoundFunction::Const(k) => write!(f, "(const {k})"),
            BoundFunction::Compose(b, a) => write!(f, "(compose {b} {a})"),
            BoundFunction::Max(a, b) => write!(f, "(max {a} {b})"),
            BoundFunction::Iter(b) => write!(f, "(iter {b})"),
        }
    }
}

impl Serialize for BoundFunction {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl BoundFunction {
    pub fn compose(outer: BoundFunction, inner: BoundFunction) -> BoundFunction {
        BoundFunction::Compose(Box::new(outer), Box::new(inner))
    }

    pub fn max(a: BoundFunction, b: BoundFunction) -> BoundFunction {
        BoundFunction::Max(Box::new(a), Box::new(b))
    }

    pub fn iter(b: BoundFunction) -> BoundFunction {
        BoundFunction::Iter(Box::new(b))
    }

    /// Number of nodes in the expression tree.
    pub fn node_count(&self) -> usize {
        match self {
            BoundFunction::Succ | BoundFunction::Id | BoundFunction::Const(_) => 1,
            BoundFunction::Compose(a, b) | BoundFunction::Max(a, b) => 1 + a.node_count() + b.node_count(),
            BoundFunction::Iter(b) => 1 + b.node_count(),
        }
    }

    /// Nesting depth of `Iter` nodes.
    pub fn iter_depth(&self) -> usize {
        match self {
            BoundFunction::Succ | BoundFunction::Id | BoundFunction::Const(_) => 0,
            BoundFunction::Compose(a, b) | BoundFunction::Max(a, b) => a.iter_depth().max(b.iter_depth()),
            BoundFunction::Iter(b) => 1 + b.iter_depth(),
        }
    }

    /// `(a, k)` with `self(n) = a·n + k` for all n, when such a form exists.
    fn affine(&self) -> Option<(BigUint, BigUint)> {
        match self {
            BoundFunction::Succ => Some((BigUint::one(), BigUint::one())),
            BoundFunction::Id => Some((BigUint::one(), BigUint::zero())),
            BoundFunction::Const(k) => Some((BigUint::zero(), BigUint::from(*k))),
            BoundFunction::Compose(b, a) => {
                let (ab, kb) = b.affine()?;
                let (aa, ka) = a.affine()?;
                Some((&ab * &aa, &ab * &ka + kb))
            }
            BoundFunction::Max(x, y) => {
                let (ax, kx) = x.affine()?;
                let (ay, ky) = y.affine()?;
                if ax >= ay && kx >= ky {
                    Some((ax, kx))
                } else if ay >= ax && ky >= kx {
                    Some((ay, ky))
                } else {
                    None
                }
            }
            BoundFunction::Iter(_) => None,
        }
    }
}

/// Result of evaluating a bound under a magnitude cap.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum BoundValue {
    Value(BigUint),
    /// The value exceeds the cap.
    Overflow,
}

impl BoundValue {
    pub fn value(&self) -> Option<&BigUint> {
        match self {
            BoundValue::Value(v) => Some(v),
            BoundValue::Overflow => None,
        }
    }

    /// Whether `x ≤` this value. Overflow means the value exceeds the cap,
    /// so this holds whenever `x` is within the cap.
    pub fn admits(&self, x: &BigUint, cap: Option<&BigUint>) -> bool {
        match self {
            BoundValue::Value(v) => x <= v,
            BoundValue::Overflow => cap.is_none_or(|c| x <= c),
        }
    }
}

impl fmt::Display for BoundValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundValue::Value(v) => write!(f, "{v}"),
            BoundValue::Overflow => f.write_str("overflow"),
        }
    }
}

impl Serialize for BoundValue {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

struct Overflow;

fn check(v: BigUint, cap: Option<&BigUint>) -> Result<BigUint, Overflow> {
    match cap {
        Some(c) if &v > c => Err(Overflow),
        _ => Ok(v),
    }
}

fn eval(b: &BoundFunction, n: BigUint, cap: Option<&BigUint>) -> Result<BigUint, Overflow> {
    if let Some((a, k)) = b.affine() {
        return check(a * n + k, cap);
    }
    match b {
        BoundFunction::Compose(outer, inner) => {
            let m = eval(inner, n, cap)?;
            eval(outer, m, cap)
        }
        BoundFunction::Max(x, y) => {
            let p = eval(x, n.clone(), cap)?;
            let q = eval(y, n, cap)?;
            Ok(p.max(q))
        }
        BoundFunction::Iter(body) => match body.affine() {
            Some((a, k)) => iter_affine(&a, &k, n, cap),
            None => {
                let mut x = n.clone();
                let mut i = BigUint::zero();
                while i < n {
                    let y = eval(body, x.clone(), cap)?;
                    if y == x {
                        break;
                    }
                    x = y;
                    i += 1u32;
                }
                Ok(x)
            }
        },
        _ => unreachable!("leaves are affine"),
    }
}

/// `g^[n](n)` for `g(x) = a·x + k`.
fn iter_affine(a: &BigUint, k: &BigUint, n: BigUint, cap: Option<&BigUint>) -> Result<BigUint, Overflow> {
    if n.is_zero() {
        return Ok(n);
    }
    if a.is_zero() {
        return check(k.clone(), cap);
    }
    if a.is_one() {
        return check(&n * k + &n, cap);
    }
    if let Some(c) = cap {
        // a^n·n alone exceeds the cap once n·log2(a) > bits(c).
        let bits = (a.bits() - 1).saturating_mul(n.to_u64().unwrap_or(u64::MAX));
        if bits > c.bits() {
            return Err(Overflow);
        }
    }
    let e = n.to_u32().ok_or(Overflow)?;
    let p = a.pow(e);
    let geometric = (&p - 1u32) / (a - 1u32);
    check(p * n + k * geometric, cap)
}

/// Evaluates `b` at `n`, reporting overflow if the result exceeds `cap`.
pub fn eval_bound(b: &BoundFunction, n: &BigUint, cap: Option<&BigUint>) -> BoundValue {
    if cap.is_some_and(|c| n > c) {
        return BoundValue::Overflow;
    }
    match eval(b, n.clone(), cap) {
        Ok(v) => BoundValue::Value(v),
        Err(Overflow) => BoundValue::Overflow,
    }
}

pub fn eval_bound_u64(b: &BoundFunction, n: u64, cap: Option<&BigUint>) -> BoundValue {
    eval_bound(b, &BigUint::from(n), cap)
}

fn revision_base(r: &Revision) -> BoundFunction {
    if r.is_growing() {
        BoundFunction::Succ
    } else {
        BoundFunction::Id
    }
}

fn literal_base(r: &Revision) -> BoundFunction {
    BoundFunction::Const(u64::from(r.is_growing()))
}

fn assign(p: &Program, base: &dyn Fn(&Revision) -> BoundFunction) -> BoundFunction {
    match p {
        Program::Rev(r) => base(r),
        Program::Seq(ps) => assign_block(ps, base),
        Program::If { then, els, .. } => BoundFunction::max(assign_block(then, base), assign_block(els, base)),
        Program::Do { body, .. } | Program::DoVariant { body, .. } => BoundFunction::iter(assign_block(body, base)),
    }
}

fn assign_block(ps: &[Program], base: &dyn Fn(&Revision) -> BoundFunction) -> BoundFunction {
    let mut it = ps.iter();
    let Some(first) = it.next() else {
        return BoundFunction::Id;
    };
    it.fold(assign(first, base), |acc, q| BoundFunction::compose(assign(q, base), acc))
}

/// Bound of a single statement, without checking the STV rules.
pub fn bound_of(p: &Program) -> BoundFunction {
    assign(p, &revision_base)
}

/// Constant-base-case bound of a single statement.
pub fn literal_bound_of(p: &Program) -> BoundFunction {
    assign(p, &literal_base)
}

/// Bound of a statement sequence, without checking the STV rules.
pub fn bound_of_block(ps: &[Program]) -> BoundFunction {
    assign_block(ps, &revision_base)
}

/// Size bound of an STV program: extensions and inceptions map to `succ`,
/// other revisions to `id`, sequencing to composition, conditionals to
/// `max` and variant loops to `iter`.
pub fn bound(script: &Script) -> Result<BoundFunction, AnalysisError> {
    let report = check_stv(script);
    if !report.ok {
        return Err(AnalysisError::NotStv(report.violations));
    }
    Ok(bound_of_block(&script.body))
}

/// The bound with constant base case: 1 for extensions and inceptions, 0 for
/// other revisions. Kept for comparison; it does not bound output sizes.
pub fn literal_bound(script: &Script) -> BoundFunction {
    assign_block(&script.body, &literal_base)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_program;
    use proptest::prelude::*;

    fn n(v: u64) -> BigUint {
        BigUint::from(v)
    }

    fn at(b: &BoundFunction, x: u64) -> BigUint {
        eval_bound_u64(b, x, None).value().cloned().unwrap()
    }

    // Direct unfolding of the definition, with no fast paths.
    fn naive(b: &BoundFunction, x: BigUint) -> BigUint {
        match b {
            BoundFunction::Succ => x + 1u32,
            BoundFunction::Id => x,
            BoundFunction::Const(k) => n(*k),
            BoundFunction::Compose(o, i) => naive(o, naive(i, x)),
            BoundFunction::Max(p, q) => naive(p, x.clone()).max(naive(q, x)),
            BoundFunction::Iter(body) => {
                let mut y = x.clone();
                let mut i = BigUint::zero();
                while i < x {
                    y = naive(body, y);
                    i += 1u32;
                }
                y
            }
        }
    }

    use BoundFunction::{Id, Succ};

    #[test]
    fn small_values() {
        assert_eq!(at(&Id, 7), n(7));
        assert_eq!(at(&Succ, 5), n(6));
        assert_eq!(at(&BoundFunction::iter(Succ), 4), n(8));
        assert_eq!(at(&BoundFunction::iter(BoundFunction::iter(Succ)), 3), n(24));
        assert_eq!(at(&BoundFunction::iter(Succ), 0), n(0));
    }

    #[test]
    fn program_bounds() {
        let s = parse_program("vocab { fn a/0 fn f/1 fn g/1 }\nf(a) <- a").unwrap();
        let b = bound(&s).unwrap();
        assert_eq!(b, Succ);
        assert_eq!(at(&b, 5), n(6));
        let s = parse_program("vocab { fn a/0 fn f/1 fn g/1 }\nf(a) <- a; g(a) <- a; drop f(a); f(a) <- a").unwrap();
        assert_eq!(at(&bound(&s).unwrap(), 10), n(13));
        let s = parse_program("vocab { fn a/0 fn f/1 fn g/1 }\ndo [true] [f] { g(a) <- a }").unwrap();
        let b = bound(&s).unwrap();
        assert_eq!(b.to_string(), "(iter succ)");
        assert_eq!(at(&b, 9), n(18));
        let s = parse_program("vocab { fn a/0 fn f/1 }\ndo [true] { f(a) <- a }").unwrap();
        assert!(bound(&s).is_err());
    }

    #[test]
    fn overflow_is_reported() {
        let tower = BoundFunction::iter(BoundFunction::iter(BoundFunction::iter(Succ)));
        let cap = n(1) << 64;
        assert_eq!(eval_bound_u64(&tower, 100, Some(&cap)), BoundValue::Overflow);
        assert_eq!(eval_bound_u64(&tower, 2, Some(&cap)), BoundValue::Value(n(2048)));
        assert!(BoundValue::Overflow.admits(&n(5), Some(&cap)));
        assert!(!BoundValue::Value(n(4)).admits(&n(5), Some(&cap)));
    }

    #[test]
    fn literal_base_case_is_constant() {
        let s = parse_program("vocab { fn a/0 fn f/1 }\nf(a) <- a").unwrap();
        assert_eq!(at(&literal_bound(&s), 5), n(1));
    }

    fn arb_bound() -> impl Strategy<Value = BoundFunction> {
        let leaf = prop_oneof![Just(Succ), Just(Id)];
        leaf.prop_recursive(4, 24, 2, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone()).prop_map(|(a, b)| BoundFunction::compose(a, b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| BoundFunction::max(a, b)),
                inner.prop_map(BoundFunction::iter),
            ]
        })
    }

    proptest! {
        #[test]
        fn fast_paths_agree_with_unfolding(b in arb_bound(), x in 0u64..5) {
            prop_assume!(b.iter_depth() <= 2);
            prop_assert_eq!(at(&b, x), naive(&b, n(x)));
        }

        #[test]
        fn bounds_are_monotone_and_inflationary(b in arb_bound(), x in 0u64..6, d in 0u64..4) {
            let cap = n(1) << 4096;
            let lo = eval_bound_u64(&b, x, Some(&cap));
            let hi = eval_bound_u64(&b, x + d, Some(&cap));
            prop_assert!(lo.admits(&n(x), Some(&cap)));
            if let BoundValue::Value(v) = &lo {
                prop_assert!(hi.admits(v, Some(&cap)));
            }
        }
    }
}
