//! Exact rational interval arithmetic for sign questions over parameter boxes.

use std::collections::BTreeMap;

use num_traits::{Signed, Zero};

use crate::syntax::{CmpOp, Formula, Rational, Term};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interval {
    pub lo: Rational,
    pub hi: Rational,
}

impl Interval {
    pub fn new(lo: Rational, hi: Rational) -> Interval {
        debug_assert!(lo <= hi);
        Interval { lo, hi }
    }

    pub fn point(v: Rational) -> Interval {
        Interval {
            lo: v.clone(),
            hi: v,
        }
    }

    fn add(&self, o: &Interval) -> Interval {
        Interval::new(&self.lo + &o.lo, &self.hi + &o.hi)
    }

    fn neg(&self) -> Interval {
        Interval::new(-&self.hi, -&self.lo)
    }

    fn mul(&self, o: &Interval) -> Interval {
        let c = [
            &self.lo * &o.lo,
            &self.lo * &o.hi,
            &self.hi * &o.lo,
            &self.hi * &o.hi,
        ];
        let lo = c.iter().min().expect("nonempty").clone();
        let hi = c.iter().max().expect("nonempty").clone();
        Interval::new(lo, hi)
    }

    fn scale(&self, k: &Rational) -> Interval {
        self.mul(&Interval::point(k.clone()))
    }

    fn pow(&self, e: u32) -> Interval {
        if e == 0 {
            return Interval::point(Rational::from_integer(1.into()));
        }
        let mut acc = self.clone();
        for _ in 1..e {
            acc = acc.mul(self);
        }
        if e % 2 == 0 && self.lo.is_negative() && self.hi.is_positive() {
            acc.lo = Rational::zero();
        }
        acc
    }
}

/// Interval enclosure of a term; `None` if a name has no interval.
pub fn eval_interval(t: &Term, env: &BTreeMap<String, Interval>) -> Option<Interval> {
    let go = |t: &Term| eval_interval(t, env);
    let unit = || {
        Interval::new(
            Rational::from_integer((-1).into()),
            Rational::from_integer(1.into()),
        )
    };
    Some(match t {
        Term::Var(n) | Term::Param(n) => env.get(n)?.clone(),
        Term::Const(c) => Interval::point(c.clone()),
        Term::Neg(a) => go(a)?.neg(),
        Term::Add(a, b) => go(a)?.add(&go(b)?),
        Term::Sub(a, b) => go(a)?.add(&go(b)?.neg()),
        Term::Mul(a, b) => go(a)?.mul(&go(b)?),
        Term::Div(a, d) => go(a)?.scale(&d.recip()),
        Term::Pow(a, e) => go(a)?.pow(*e),
        Term::Sin(a) | Term::Cos(a) => {
            go(a)?;
            unit()
        }
        Term::Norm(_) => return None,
    })
}

/// `Some(true)` if the comparison holds on the whole box, `Some(false)` if it
/// fails on the whole box, `None` if undecided.
pub fn decide_cmp(op: CmpOp, a: &Term, b: &Term, env: &BTreeMap<String, Interval>) -> Option<bool> {
    let d = eval_interval(&Term::sub(a.clone(), b.clone()), env)?;
    let (lo, hi) = (&d.lo, &d.hi);
    let z = Rational::zero();
    match op {
        CmpOp::Lt if *hi < z => Some(true),
        CmpOp::Lt if *lo >= z => Some(false),
        CmpOp::Le if *hi <= z => Some(true),
        CmpOp::Le if *lo > z => Some(false),
        CmpOp::Gt if *lo > z => Some(true),
        CmpOp::Gt if *hi <= z => Some(false),
        CmpOp::Ge if *lo >= z => Some(true),
        CmpOp::Ge if *hi < z => Some(false),
        CmpOp::Eq if lo.is_zero() && hi.is_zero() => Some(true),
        CmpOp::Eq if *lo > z || *hi < z => Some(false),
        CmpOp::Ne if *lo > z || *hi < z => Some(true),
        CmpOp::Ne if lo.is_zero() && hi.is_zero() => Some(false),
        _ => None,
    }
}

/// Three-valued evaluation of a quantifier-free formula over a box.
pub fn decide_formula(f: &Formula, env: &BTreeMap<String, Interval>) -> Option<bool> {
    let go = |g: &Formula| decide_formula(g, env);
    match f {
        Formula::True => Some(true),
        Formula::False => Some(false),
        Formula::Cmp(op, a, b) => decide_cmp(*op, a, b, env),
        Formula::Not(a) => go(a).map(|v| !v),
        Formula::And(a, b) => match (go(a), go(b)) {
            (Some(false), _) | (_, Some(false)) => Some(false),
            (Some(true), Some(true)) => Some(true),
            _ => None,
        },
        Formula::Or(a, b) => match (go(a), go(b)) {
            (Some(true), _) | (_, Some(true)) => Some(true),
            (Some(false), Some(false)) => Some(false),
            _ => None,
        },
        Formula::Implies(a, b) => match (go(a), go(b)) {
            (Some(false), _) | (_, Some(true)) => Some(true),
            (Some(true), Some(false)) => Some(false),
            _ => None,
        },
        _ => None,
    }
}
