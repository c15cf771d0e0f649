//! Non-pencil tests and birationality bounds.
//!
//! Every bound is a maximum of integer-valued terms. A [`Term`] keeps the raw
//! expression so a certificate can recheck `m >= term` by comparing `m` with
//! the expression directly instead of recomputing floors.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::basket::{Basket, FanoNumerics};
use crate::error::{Error, Result};
use crate::rational::{self, int, ratio, Rational};
use crate::surd::{cmp_exceeds_sqrt, QuadraticSurd};

/// `x = value`, or `0 < x < value` when `strict_upper` is set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RationalBound {
    #[serde(with = "rational::serde_str")]
    pub value: Rational,
    pub strict_upper: bool,
}

impl RationalBound {
    pub fn exact(value: Rational) -> Self {
        Self {
            value,
            strict_upper: false,
        }
    }

    pub fn below(value: Rational) -> Self {
        Self {
            value,
            strict_upper: true,
        }
    }

    /// Largest possible `floor(x)`.
    pub fn floor(&self) -> BigInt {
        if self.strict_upper {
            rational::ceil(&self.value) - 1
        } else {
            rational::floor(&self.value)
        }
    }

    /// Largest possible `ceil(x)`.
    pub fn ceil(&self) -> BigInt {
        rational::ceil(&self.value)
    }
}

impl std::fmt::Display for RationalBound {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let op = if self.strict_upper { "<" } else { "=" };
        write!(f, "{op} {}", rational::format(&self.value))
    }
}

/// `a(m0)`.
pub fn a_of(m0: u32) -> u32 {
    if m0 >= 2 {
        6
    } else {
        1
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CriterionParams {
    pub m0: u32,
    pub a_m0: u32,
    pub m1: u32,
    pub mu0: RationalBound,
    pub nu0: u32,
    pub r_max: u32,
    pub r_x: u64,
    /// Lower bound for `N_0`.
    pub n0: u64,
}

impl CriterionParams {
    pub fn new(m0: u32, m1: u32, mu0: RationalBound, nu0: u32, r_max: u32, r_x: u64, n0: u64) -> Result<Self> {
        let p = Self {
            m0,
            a_m0: a_of(m0),
            m1,
            mu0,
            nu0,
            r_max,
            r_x,
            n0,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |why: &str| Err(Error::InvalidConstraints(format!("criterion parameters: {why}")));
        if self.m0 == 0 || self.m1 == 0 || self.nu0 == 0 || self.r_max == 0 || self.r_x == 0 {
            return bad("m0, m1, nu0, r_max and r_X must be positive");
        }
        if self.a_m0 != a_of(self.m0) {
            return bad("a(m0) must be 6 for m0 >= 2 and 1 otherwise");
        }
        if self.n0 == 0 {
            return bad("N0 lower bound must be at least 1");
        }
        if self.mu0.value <= Rational::zero() {
            return bad("mu0' must be positive");
        }
        Ok(())
    }

    fn nu_r(&self) -> Rational {
        int(i64::from(self.nu0) * i64::from(self.r_max))
    }

    fn rx_over_n0(&self) -> Rational {
        Rational::new(BigInt::from(self.r_x), BigInt::from(self.n0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rounding {
    Floor,
    Ceil,
    CeilMinusOne,
}

/// `round(coef * mu0' + offset)` for `coef >= 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Term {
    pub label: &'static str,
    pub coef: Rational,
    pub offset: QuadraticSurd,
    pub rounding: Rounding,
}

impl Term {
    fn constant(label: &'static str, n: i64) -> Self {
        Self {
            label,
            coef: Rational::zero(),
            offset: QuadraticSurd::rational(int(n)),
            rounding: Rounding::Floor,
        }
    }

    fn new(label: &'static str, coef: Rational, offset: QuadraticSurd, rounding: Rounding) -> Self {
        Self {
            label,
            coef,
            offset,
            rounding,
        }
    }

    fn depends_on_mu(&self) -> bool {
        !self.coef.is_zero()
    }

    /// The expression with `mu0'` replaced by its value or supremum.
    pub fn at_endpoint(&self, mu: &RationalBound) -> QuadraticSurd {
        self.offset.add_rational(&(&self.coef * &mu.value))
    }

    /// Supremum of the rounded term over every admissible `mu0'`.
    pub fn value(&self, mu: &RationalBound) -> BigInt {
        let x = self.at_endpoint(mu);
        let strict = mu.strict_upper && self.depends_on_mu();
        match self.rounding {
            Rounding::Floor if strict => x.ceil() - 1,
            Rounding::Floor => x.floor(),
            Rounding::Ceil => x.ceil(),
            Rounding::CeilMinusOne => x.ceil() - 1,
        }
    }

    /// Checks `m >= term` from the unrounded expression.
    pub fn admits(&self, m: &BigInt, mu: &RationalBound) -> bool {
        let x = self.at_endpoint(mu);
        let strict = mu.strict_upper && self.depends_on_mu();
        let m1 = m + BigInt::one();
        match self.rounding {
            // floor(x) <= m  iff  x < m + 1; for x < X this holds for all x iff X <= m + 1
            Rounding::Floor if strict => x.cmp_int(&m1) != Ordering::Greater,
            Rounding::Floor => x.cmp_int(&m1) == Ordering::Less,
            Rounding::Ceil => x.cmp_int(m) != Ordering::Greater,
            Rounding::CeilMinusOne => x.cmp_int(&m1) != Ordering::Greater,
        }
    }

    pub fn describe(&self, mu: &RationalBound) -> String {
        let inner = self.at_endpoint(mu);
        match self.rounding {
            Rounding::Floor if !self.depends_on_mu() && inner.is_rational() => inner.to_string(),
            Rounding::Floor => format!("floor({inner})"),
            Rounding::Ceil => format!("ceil({inner})"),
            Rounding::CeilMinusOne => format!("ceil({inner}) - 1"),
        }
    }
}

/// A bound `m >= max(terms)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundSpec {
    pub mu0: RationalBound,
    pub terms: Vec<Term>,
}

impl BoundSpec {
    pub fn value(&self) -> BigInt {
        self.terms
            .iter()
            .map(|t| t.value(&self.mu0))
            .max()
            .unwrap_or_default()
            .max(BigInt::one())
    }

    /// Whether `m` satisfies every term.
    pub fn holds_at(&self, m: &BigInt) -> bool {
        m.is_positive() && self.terms.iter().all(|t| t.admits(m, &self.mu0))
    }

    /// The value satisfies every term and `value - 1` fails at least one.
    pub fn is_tight(&self) -> bool {
        let m = self.value();
        self.holds_at(&m) && (m.is_one() || !self.holds_at(&(&m - 1)))
    }
}

fn base_term(p: &CriterionParams, with_m1: bool) -> Term {
    let mut n = i64::from(p.m0) + i64::from(p.a_m0);
    if with_m1 {
        n += i64::from(p.m1);
        Term::constant("m0 + m1 + a(m0)", n)
    } else {
        Term::constant("m0 + a(m0)", n)
    }
}

fn rat_term(label: &'static str, coef: Rational, offset: Rational, r: Rounding) -> Term {
    Term::new(label, coef, QuadraticSurd::rational(offset), r)
}

pub fn thm_bc_spec(variant: u8, p: &CriterionParams) -> Result<BoundSpec> {
    p.validate()?;
    let m1 = int(i64::from(p.m1));
    let r = int(i64::from(p.r_max));
    let mut terms = vec![base_term(p, true)];
    match variant {
        1 => terms.push(rat_term("floor(3 mu0') + 3 m1", int(3), int(3) * &m1, Rounding::Floor)),
        2 => {
            terms.push(rat_term(
                "floor(5/3 mu0' + 5/3 m1)",
                ratio(5, 3),
                ratio(5, 3) * &m1,
                Rounding::Floor,
            ));
            terms.push(rat_term(
                "floor(mu0') + m1 + 2 r_max",
                int(1),
                &m1 + int(2) * &r,
                Rounding::Floor,
            ));
        }
        3 => terms.push(rat_term(
            "floor(mu0') + m1 + 2 nu0 r_max",
            int(1),
            &m1 + int(2) * p.nu_r(),
            Rounding::Floor,
        )),
        v => return Err(Error::InvalidConstraints(format!("no bc variant {v}"))),
    }
    Ok(BoundSpec {
        mu0: p.mu0.clone(),
        terms,
    })
}

pub fn bir_bound_thm_bc(variant: u8, p: &CriterionParams) -> Result<BigInt> {
    Ok(thm_bc_spec(variant, p)?.value())
}

pub fn bc2_spec(p: &CriterionParams, beta: &Rational) -> Result<BoundSpec> {
    p.validate()?;
    if beta < &int(8) {
        return Err(Error::InvalidBeta(rational::format(beta)));
    }
    // 4 nu r / (1 + sqrt(1 - 8/beta)) = (beta nu r / 2)(1 - sqrt(1 - 8/beta))
    let half = beta * p.nu_r() / int(2);
    let root = QuadraticSurd::sqrt(&(int(1) - int(8) / beta));
    let middle = root.scale(&-half.clone()).add_rational(&half);
    let outer = QuadraticSurd::sqrt(&(beta * p.rx_over_n0()));
    Ok(BoundSpec {
        mu0: p.mu0.clone(),
        terms: vec![
            base_term(p, false),
            Term::new(
                "ceil(mu0' + 4 nu0 r_max / (1 + sqrt(1 - 8/beta))) - 1",
                int(1),
                middle,
                Rounding::CeilMinusOne,
            ),
            Term::new("floor(mu0' + sqrt(beta r_X / N0))", int(1), outer, Rounding::Floor),
        ],
    })
}

pub fn bir_bound_bc2(p: &CriterionParams, beta: &Rational) -> Result<BigInt> {
    Ok(bc2_spec(p, beta)?.value())
}

/// Outcome of a criterion that has an applicability gate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Applicability<T> {
    Applies(T),
    Inapplicable(String),
}

impl<T> Applicability<T> {
    pub fn applied(self) -> Option<T> {
        match self {
            Self::Applies(t) => Some(t),
            Self::Inapplicable(_) => None,
        }
    }

    pub fn map<U>(self, f: impl FnOnce(T) -> U) -> Applicability<U> {
        match self {
            Self::Applies(t) => Applicability::Applies(f(t)),
            Self::Inapplicable(why) => Applicability::Inapplicable(why),
        }
    }
}

/// `(nu0 r_max)^2 >= r_X / (2 N0)`.
pub fn usage2_gate(p: &CriterionParams) -> bool {
    let nr = p.nu_r();
    &nr * &nr >= p.rx_over_n0() / int(2)
}

/// The `beta` at which the second usage form coincides with [`bc2_spec`].
pub fn usage2_beta(p: &CriterionParams) -> Rational {
    let s = int(2) * p.nu_r() + p.rx_over_n0() / p.nu_r();
    &s * &s / p.rx_over_n0()
}

pub fn usage_spec(variant: u8, p: &CriterionParams) -> Result<Applicability<BoundSpec>> {
    p.validate()?;
    let nr = p.nu_r();
    let spec = match variant {
        1 => BoundSpec {
            mu0: p.mu0.clone(),
            terms: vec![
                base_term(p, false),
                rat_term(
                    "ceil(mu0') + 4 nu0 r_max - 1",
                    int(1),
                    int(4) * &nr - int(1),
                    Rounding::Ceil,
                ),
                Term::new(
                    "floor(mu0' + sqrt(8 r_X / N0))",
                    int(1),
                    QuadraticSurd::sqrt(&(int(8) * p.rx_over_n0())),
                    Rounding::Floor,
                ),
            ],
        },
        2 => {
            if !usage2_gate(p) {
                return Ok(Applicability::Inapplicable(format!(
                    "(nu0 r_max)^2 = {} < r_X / (2 N0) = {}",
                    rational::format(&(&nr * &nr)),
                    rational::format(&(p.rx_over_n0() / int(2)))
                )));
            }
            BoundSpec {
                mu0: p.mu0.clone(),
                terms: vec![
                    base_term(p, false),
                    rat_term(
                        "floor(mu0' + 2 nu0 r_max + r_X / (N0 nu0 r_max))",
                        int(1),
                        int(2) * &nr + p.rx_over_n0() / &nr,
                        Rounding::Floor,
                    ),
                ],
            }
        }
        v => return Err(Error::InvalidConstraints(format!("no usage variant {v}"))),
    };
    Ok(Applicability::Applies(spec))
}

pub fn bir_bound_usage(variant: u8, p: &CriterionParams) -> Result<Applicability<BigInt>> {
    Ok(usage_spec(variant, p)?.map(|s| s.value()))
}

/// `(1/12) m(m+1)(2m+1) k3 + 1 - 2m/t`.
pub fn plurigenus_lower_bound(m: u32, t: &Rational, k3: &Rational) -> Rational {
    let m = i64::from(m);
    ratio(m * (m + 1) * (2 * m + 1), 12) * k3 + int(1) - int(2 * m) / t
}

/// `P_{-m} > r_X k3 m + 1`.
pub fn nonpencil_np1(m: u32, p_m: &BigInt, r_x: u64, k3: &Rational) -> bool {
    let rhs = int(r_x as i64) * k3 * int(i64::from(m)) + int(1);
    Rational::from_integer(p_m.clone()) > rhs
}

/// `P_{-m} > 12m + 1`.
pub fn nonpencil_12m(m: u32, p_m: &BigInt) -> bool {
    *p_m > BigInt::from(12 * u64::from(m) + 1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Np2Variant {
    /// radicand term `6 r_X`
    CartierIndex,
    /// radicand term `72 / k3`
    Degree,
}

impl TryFrom<u8> for Np2Variant {
    type Error = Error;

    fn try_from(v: u8) -> Result<Self> {
        Self::from_index(v)
    }
}

impl From<Np2Variant> for u8 {
    fn from(v: Np2Variant) -> u8 {
        v.index()
    }
}

impl Np2Variant {
    pub fn from_index(v: u8) -> Result<Self> {
        match v {
            1 => Ok(Self::CartierIndex),
            2 => Ok(Self::Degree),
            _ => Err(Error::InvalidConstraints(format!("no np2 variant {v}"))),
        }
    }

    pub fn index(self) -> u8 {
        match self {
            Self::CartierIndex => 1,
            Self::Degree => 2,
        }
    }
}

/// Conditions `m >= t`, `m >= r_max t / 3` and `m > -3/4 + sqrt(radicand)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SqrtThreshold {
    pub t: Rational,
    pub r_max: u32,
    pub radicand: Rational,
}

impl SqrtThreshold {
    fn base() -> Rational {
        ratio(-3, 4)
    }

    pub fn holds_at(&self, m: u64) -> bool {
        let m = int(m as i64);
        m >= self.t
            && int(3) * &m >= int(i64::from(self.r_max)) * &self.t
            && cmp_exceeds_sqrt(&m, &Self::base(), &self.radicand)
    }

    pub fn min_m(&self) -> u64 {
        let c1 = rational::ceil(&self.t);
        let c2 = rational::ceil(&(int(i64::from(self.r_max)) * &self.t / int(3)));
        let c3 = QuadraticSurd::sqrt(&self.radicand).add_rational(&Self::base()).floor() + 1;
        let m = c1.max(c2).max(c3).max(BigInt::one());
        m.to_u64().expect("threshold fits in u64")
    }
}

fn check_positive(what: &str, q: &Rational) -> Result<()> {
    if q.is_positive() {
        Ok(())
    } else {
        Err(Error::InvalidConstraints(format!(
            "{what} must be positive, got {}",
            rational::format(q)
        )))
    }
}

pub fn np2_threshold(t: &Rational, k3: &Rational, r_x: u64, r_max: u32, variant: Np2Variant) -> Result<SqrtThreshold> {
    check_positive("t", t)?;
    check_positive("-K^3", k3)?;
    let extra = match variant {
        Np2Variant::CartierIndex => int(6 * r_x as i64),
        Np2Variant::Degree => int(72) / k3,
    };
    Ok(SqrtThreshold {
        t: t.clone(),
        r_max,
        radicand: int(12) / (t * k3) + extra + ratio(1, 16),
    })
}

pub fn np2_min_m(t: &Rational, k3: &Rational, r_x: u64, r_max: u32, variant: Np2Variant) -> Result<u64> {
    Ok(np2_threshold(t, k3, r_x, r_max, variant)?.min_m())
}

pub fn np2cor_threshold(t: &Rational, l: &Rational, k3: &Rational, r_max: u32) -> Result<SqrtThreshold> {
    check_positive("t", t)?;
    check_positive("l", l)?;
    check_positive("-K^3", k3)?;
    Ok(SqrtThreshold {
        t: t.clone(),
        r_max,
        radicand: int(12) / (t * k3) + int(6) / (l * k3) + ratio(1, 16),
    })
}

pub fn np2cor_min_m(t: &Rational, l: &Rational, k3: &Rational, r_max: u32) -> Result<u64> {
    Ok(np2cor_threshold(t, l, k3, r_max)?.min_m())
}

/// `max(1, ceil(r_X / (m1 nu0 r_max)))`.
pub fn n0_lower_bound(r_x: u64, m1: u32, nu0: u32, r_max: u32) -> u64 {
    let den = u64::from(m1) * u64::from(nu0) * u64::from(r_max);
    r_x.div_ceil(den).max(1)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssumptionDefaults {
    pub m0: u32,
    /// Smaller `m0` usable when `P_{-4} >= 2` is assumed.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m0_alternative: Option<u32>,
    #[serde(with = "rational::serde_str")]
    pub k3_lower: Rational,
    pub r_x_fact: String,
}

pub fn assumption_defaults(p1: u32, p2_positive: bool, p4_ge2: bool) -> AssumptionDefaults {
    let r_x_fact = "r_X = 840 or r_X <= 660".to_string();
    let (m0, m0_alternative, k3_lower) = match (p1, p2_positive, p4_ge2) {
        (0, true, true) => (6, Some(4), ratio(1, 30)),
        (0, true, false) => (6, None, ratio(1, 70)),
        _ => (8, None, ratio(1, 330)),
    };
    AssumptionDefaults {
        m0,
        m0_alternative,
        k3_lower,
        r_x_fact,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Np1Status {
    Strict,
    Equal,
    Below,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Np1Equality {
    pub status: Np1Status,
    pub contradiction_if_pencil: bool,
    #[serde(with = "rational::serde_str")]
    pub p_m: Rational,
    #[serde(with = "rational::serde_str")]
    pub threshold: Rational,
    #[serde(with = "rational::serde_str")]
    pub r_x_k3: Rational,
}

pub fn np1_equality_analyze(basket: &Basket, p1: u32, m: u32) -> Result<Np1Equality> {
    let fano = FanoNumerics::new(basket.clone(), p1);
    let k3 = fano.deg_k3();
    let p_m = Rational::from_integer(fano.anti_plurigenus(m)?);
    let r_x_k3 = int(basket.cartier_index() as i64) * &k3;
    let threshold = &r_x_k3 * int(i64::from(m)) + int(1);
    let status = match p_m.cmp(&threshold) {
        Ordering::Greater => Np1Status::Strict,
        Ordering::Equal => Np1Status::Equal,
        Ordering::Less => Np1Status::Below,
    };
    Ok(Np1Equality {
        status,
        contradiction_if_pencil: status == Np1Status::Equal && !r_x_k3.is_one(),
        p_m,
        threshold,
        r_x_k3,
    })
}
