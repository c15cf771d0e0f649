//! Reid baskets and their numerical invariants.
//!
//! A basket is a multiset of coprime pairs `(b, r)` with `0 < 2b <= r`. Pairs
//! are kept sorted by `(r, b)`, which fixes serialization, deduplication and
//! every tie-break downstream.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::rational::{self, Rational};

/// One virtual orbifold point of type `1/r (1, -1, b)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OrbifoldPair {
    // Field order gives the derived `Ord` its (r, b) ordering.
    r: u32,
    b: u32,
}

impl OrbifoldPair {
    pub fn new(b: u32, r: u32) -> Result<Self> {
        if b == 0 || 2 * u64::from(b) > u64::from(r) || b.gcd(&r) != 1 {
            return Err(Error::InvalidPair {
                b: i64::from(b),
                r: i64::from(r),
            });
        }
        Ok(Self { r, b })
    }

    pub(crate) const fn new_unchecked(b: u32, r: u32) -> Self {
        Self { r, b }
    }

    pub fn b(self) -> u32 {
        self.b
    }

    pub fn r(self) -> u32 {
        self.r
    }

    /// `b * other.r - other.b * r`; a prime packing needs this to be `±1`.
    pub fn det(self, other: Self) -> i64 {
        i64::from(self.b) * i64::from(other.r) - i64::from(other.b) * i64::from(self.r)
    }

    /// Contribution of this point to `l(n+1)`, i.e. `sum_{j=1..n} jb(r - jb) / 2r`
    /// with `jb` reduced mod `r`.
    pub fn l_term(self, n: u64) -> Rational {
        let r = u64::from(self.r);
        let b = u64::from(self.b);
        let (periods, rest) = n.div_rem(&r);
        // Over a full period the residues run through 0..r once.
        let full = BigInt::from((r * r - 1) * r / 6) * BigInt::from(periods);
        let partial: u64 = (1..=rest)
            .map(|j| {
                let res = (j * b) % r;
                res * (r - res)
            })
            .sum();
        Rational::new(full + BigInt::from(partial), BigInt::from(2 * r))
    }
}

impl fmt::Display for OrbifoldPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.b, self.r)
    }
}

impl Serialize for OrbifoldPair {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        [self.b, self.r].serialize(s)
    }
}

impl<'de> Deserialize<'de> for OrbifoldPair {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let [b, r] = <[i64; 2]>::deserialize(d)?;
        pair_from_raw(b, r).map_err(serde::de::Error::custom)
    }
}

fn pair_from_raw(b: i64, r: i64) -> Result<OrbifoldPair> {
    match (u32::try_from(b), u32::try_from(r)) {
        (Ok(b), Ok(r)) => OrbifoldPair::new(b, r),
        _ => Err(Error::InvalidPair { b, r }),
    }
}

/// Finite multiset of orbifold pairs in canonical `(r, b)` order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Basket {
    pairs: Vec<OrbifoldPair>,
}

impl Basket {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn from_pairs(mut pairs: Vec<OrbifoldPair>) -> Self {
        pairs.sort_unstable();
        Self { pairs }
    }

    /// Validates and canonicalizes raw `(b, r)` integers.
    pub fn validate(raw: &[(i64, i64)]) -> Result<Self> {
        raw.iter()
            .map(|&(b, r)| pair_from_raw(b, r))
            .collect::<Result<Vec<_>>>()
            .map(Self::from_pairs)
    }

    /// Shorthand for literals in tests and data tables; panics on an invalid pair.
    pub fn of(raw: &[(u32, u32)]) -> Self {
        Self::from_pairs(
            raw.iter()
                .map(|&(b, r)| OrbifoldPair::new(b, r).expect("valid literal pair"))
                .collect(),
        )
    }

    pub fn pairs(&self) -> &[OrbifoldPair] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Distinct pairs with multiplicities, in canonical order.
    pub fn grouped(&self) -> Vec<(OrbifoldPair, usize)> {
        let mut out: Vec<(OrbifoldPair, usize)> = Vec::new();
        for &p in &self.pairs {
            match out.last_mut() {
                Some((q, n)) if *q == p => *n += 1,
                _ => out.push((p, 1)),
            }
        }
        out
    }

    pub fn indices(&self) -> impl Iterator<Item = u32> + '_ {
        self.pairs.iter().map(|p| p.r)
    }

    pub fn contains_index(&self, r: u32) -> bool {
        self.pairs.iter().any(|p| p.r == r)
    }

    pub fn sigma(&self) -> u64 {
        self.pairs.iter().map(|p| u64::from(p.b)).sum()
    }

    pub fn sum_r(&self) -> u64 {
        self.pairs.iter().map(|p| u64::from(p.r)).sum()
    }

    pub fn sigma_prime(&self) -> Rational {
        self.pairs
            .iter()
            .map(|p| rational::ratio(i64::from(p.b) * i64::from(p.b), i64::from(p.r)))
            .sum()
    }

    pub fn gamma(&self) -> Rational {
        let inv: Rational = self.pairs.iter().map(|p| rational::ratio(1, i64::from(p.r))).sum();
        inv - rational::int(self.sum_r() as i64) + rational::int(24)
    }

    /// Cartier index `r_X`: lcm of the local indices, 1 when empty.
    pub fn cartier_index(&self) -> u64 {
        self.pairs.iter().fold(1u64, |acc, p| acc.lcm(&u64::from(p.r)))
    }

    pub fn r_max(&self) -> Result<u32> {
        self.pairs.last().map(|p| p.r).ok_or(Error::EmptyBasket)
    }

    /// `l(n+1)` from the orbifold Riemann-Roch formula.
    pub fn l_value(&self, n: u64) -> Rational {
        self.pairs.iter().map(|p| p.l_term(n)).sum()
    }

    /// Removes one copy of each pair at positions `i < j` and inserts `merged`.
    pub(crate) fn replace_two(&self, i: usize, j: usize, merged: OrbifoldPair) -> Basket {
        let mut pairs = Vec::with_capacity(self.pairs.len() - 1);
        for (k, &p) in self.pairs.iter().enumerate() {
            if k != i && k != j {
                pairs.push(p);
            }
        }
        let at = pairs.partition_point(|&p| p < merged);
        pairs.insert(at, merged);
        Basket { pairs }
    }

    /// Removes the pair at position `i` and inserts `parts`.
    #[cfg(test)]
    pub(crate) fn replace_one(&self, i: usize, parts: [OrbifoldPair; 2]) -> Basket {
        let mut pairs = self.pairs.clone();
        pairs.remove(i);
        pairs.extend(parts);
        Basket::from_pairs(pairs)
    }

    /// Compact `{2×(1, 2), (2, 5)}` rendering.
    pub fn pretty(&self) -> String {
        let body: Vec<String> = self
            .grouped()
            .into_iter()
            .map(|(p, n)| if n == 1 { p.to_string() } else { format!("{n}×{p}") })
            .collect();
        format!("{{{}}}", body.join(", "))
    }
}

impl fmt::Display for Basket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.pretty())
    }
}

impl Serialize for Basket {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.pairs.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Basket {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        Vec::<OrbifoldPair>::deserialize(d).map(Basket::from_pairs)
    }
}

/// A basket together with `P_{-1}`; enough to determine `-K^3` and every `P_{-m}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FanoNumerics {
    pub basket: Basket,
    pub p1: u32,
}

impl FanoNumerics {
    pub fn new(basket: Basket, p1: u32) -> Self {
        Self { basket, p1 }
    }

    /// `-K^3 = 2 P_{-1} + sigma - sigma' - 6`. May be non-positive.
    pub fn deg_k3(&self) -> Rational {
        rational::int(2 * i64::from(self.p1) + self.basket.sigma() as i64 - 6) - self.basket.sigma_prime()
    }

    /// `P_{-2}` solved from `sigma = 10 - 5 P_{-1} + P_{-2}`.
    pub fn derived_p2(&self) -> i64 {
        self.basket.sigma() as i64 - 10 + 5 * i64::from(self.p1)
    }

    /// `-K^3 > 0` and `P_{-2} >= 0`.
    pub fn is_admissible(&self) -> bool {
        self.derived_p2() >= 0 && self.deg_k3() > Rational::zero()
    }

    /// `P_{-m}` by orbifold Riemann-Roch.
    pub fn anti_plurigenus(&self, m: u32) -> Result<BigInt> {
        self.anti_plurigenus_with(m, &self.deg_k3())
    }

    pub(crate) fn anti_plurigenus_with(&self, m: u32, k3: &Rational) -> Result<BigInt> {
        let n = i64::from(m);
        let cubic = Rational::from_integer(BigInt::from(n) * (n + 1) * (2 * n + 1)) / rational::int(12);
        let value = cubic * k3 + rational::int(2 * n + 1) - self.basket.l_value(u64::from(m));
        if value.denom().is_one() {
            Ok(value.to_integer())
        } else {
            Err(Error::NonIntegralResult {
                m,
                value: rational::format(&value),
            })
        }
    }

    pub fn plurigenera(&self, upto: u32) -> Result<Vec<BigInt>> {
        let k3 = self.deg_k3();
        (1..=upto).map(|m| self.anti_plurigenus_with(m, &k3)).collect()
    }
}

/// Smallest multiple of `1/r_x` that is at least `k3_lower`.
pub fn refine_k3_lower(k3_lower: &Rational, r_x: u64) -> Rational {
    let rx = BigInt::from(r_x);
    let scaled = k3_lower * Rational::from_integer(rx.clone());
    Rational::new(rational::ceil(&scaled), rx)
}
