//! Exact arithmetic on numbers of the form `a + b*sqrt(d)`.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::rational::{self, Rational};

/// `a + b*sqrt(d)` with `d` a non-square integer, or `b = 0` and `d = 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuadraticSurd {
    a: Rational,
    b: Rational,
    d: BigInt,
}

fn perfect_sqrt(n: &BigInt) -> Option<BigInt> {
    let s = n.sqrt();
    (&s * &s == *n).then_some(s)
}

fn sign_of(q: &Rational) -> Ordering {
    q.cmp(&Rational::zero())
}

impl QuadraticSurd {
    pub fn new(a: Rational, b: Rational, d: BigInt) -> Self {
        assert!(!d.is_negative(), "negative radicand");
        if b.is_zero() || d.is_zero() {
            return Self::rational(a);
        }
        if let Some(s) = perfect_sqrt(&d) {
            return Self::rational(a + b * Rational::from_integer(s));
        }
        Self { a, b, d }
    }

    pub fn rational(a: Rational) -> Self {
        Self {
            a,
            b: Rational::zero(),
            d: BigInt::zero(),
        }
    }

    /// `sqrt(q)` for rational `q >= 0`, as `sqrt(p*q')/q'`.
    pub fn sqrt(q: &Rational) -> Self {
        assert!(!q.is_negative(), "negative radicand");
        let d = q.numer() * q.denom();
        Self::new(Rational::zero(), Rational::new(BigInt::one(), q.denom().clone()), d)
    }

    pub fn a(&self) -> &Rational {
        &self.a
    }

    pub fn b(&self) -> &Rational {
        &self.b
    }

    pub fn d(&self) -> &BigInt {
        &self.d
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    pub fn add_rational(&self, q: &Rational) -> Self {
        Self {
            a: &self.a + q,
            ..self.clone()
        }
    }

    pub fn scale(&self, q: &Rational) -> Self {
        Self::new(&self.a * q, &self.b * q, self.d.clone())
    }

    /// Sign of `x + y*sqrt(d)`.
    fn signum_parts(x: &Rational, y: &Rational, d: &BigInt) -> Ordering {
        let sx = sign_of(x);
        let sy = if d.is_zero() { Ordering::Equal } else { sign_of(y) };
        if sy == Ordering::Equal || sx == sy {
            return sx;
        }
        if sx == Ordering::Equal {
            return sy;
        }
        // opposite signs: the larger square wins
        let lhs = x * x;
        let rhs = y * y * Rational::from_integer(d.clone());
        match lhs.cmp(&rhs) {
            Ordering::Greater => sx,
            Ordering::Less => sy,
            Ordering::Equal => Ordering::Equal,
        }
    }

    pub fn signum(&self) -> Ordering {
        Self::signum_parts(&self.a, &self.b, &self.d)
    }

    pub fn cmp_rational(&self, q: &Rational) -> Ordering {
        Self::signum_parts(&(&self.a - q), &self.b, &self.d)
    }

    pub fn cmp_int(&self, n: &BigInt) -> Ordering {
        self.cmp_rational(&Rational::from_integer(n.clone()))
    }

    pub fn floor(&self) -> BigInt {
        if self.is_rational() {
            return rational::floor(&self.a);
        }
        let mut k = self.estimate();
        while self.cmp_int(&k) == Ordering::Less {
            k -= 1;
        }
        loop {
            let next = &k + 1;
            if self.cmp_int(&next) == Ordering::Less {
                return k;
            }
            k = next;
        }
    }

    pub fn ceil(&self) -> BigInt {
        let f = self.floor();
        if self.cmp_int(&f) == Ordering::Equal {
            f
        } else {
            f + 1
        }
    }

    /// Integer within a small distance of the value.
    fn estimate(&self) -> BigInt {
        let t = &self.b * &self.b * Rational::from_integer(self.d.clone());
        let root = rational::floor(&t).sqrt();
        let root = Rational::from_integer(root);
        let guess = if self.b.is_negative() {
            &self.a - root
        } else {
            &self.a + root
        };
        rational::floor(&guess)
    }

    pub fn to_f64(&self) -> f64 {
        rational::to_f64(&self.a) + rational::to_f64(&self.b) * self.d.to_f64().unwrap_or(f64::NAN).sqrt()
    }
}

impl fmt::Display for QuadraticSurd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_rational() {
            return write!(f, "{}", rational::format(&self.a));
        }
        write!(
            f,
            "{} + {}*sqrt({})",
            rational::format(&self.a),
            rational::format(&self.b),
            self.d
        )
    }
}

/// `lhs > base + sqrt(radicand)`, decided exactly.
pub fn cmp_exceeds_sqrt(lhs: &Rational, base: &Rational, radicand: &Rational) -> bool {
    assert!(!radicand.is_negative(), "negative radicand");
    let gap = lhs - base;
    if !gap.is_positive() {
        return false;
    }
    &gap * &gap > *radicand
}

/// `floor(base + sqrt(radicand))`.
pub fn floor_add_sqrt(base: &Rational, radicand: &Rational) -> BigInt {
    QuadraticSurd::sqrt(radicand).add_rational(base).floor()
}

/// `ceil(base + sqrt(radicand))`.
pub fn ceil_add_sqrt(base: &Rational, radicand: &Rational) -> BigInt {
    QuadraticSurd::sqrt(radicand).add_rational(base).ceil()
}
