//! Exhaustive enumeration of baskets under numerical constraints.
//!
//! Multisets are grown in canonical `(r, b)` order so each one is visited
//! exactly once. The budget `sum(r - 1/r) <= 24` (equivalent to `gamma >= 0`)
//! is tracked in integers scaled by `lcm(1..=R)`, which keeps the search exact.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basket::{Basket, FanoNumerics, OrbifoldPair};
use crate::error::{Error, Result};
use crate::rational::{self, Rational};

/// Largest local index the enumerator will consider.
pub const MAX_INDEX: u32 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Cmp {
    Lt,
    Le,
    Eq,
    Ge,
    Gt,
}

impl Cmp {
    pub fn holds<T: Ord>(self, lhs: &T, rhs: &T) -> bool {
        let o = lhs.cmp(rhs);
        match self {
            Cmp::Lt => o == Ordering::Less,
            Cmp::Le => o != Ordering::Greater,
            Cmp::Eq => o == Ordering::Equal,
            Cmp::Ge => o != Ordering::Less,
            Cmp::Gt => o == Ordering::Greater,
        }
    }
}

/// `P_{-m} <cmp> value`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlurigenusFilter {
    pub m: u32,
    pub cmp: Cmp,
    pub value: i64,
}

/// Constraint set for [`enumerate_baskets`]. Every field is optional in JSON.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BasketConstraints {
    /// `gamma(B) >= 0`, i.e. `sum(r - 1/r) <= 24`.
    pub gamma_nonneg: bool,
    /// Explicit bound on `sum(r - 1/r)`; required for an unrestricted search without `gamma_nonneg`.
    #[serde(with = "rational::serde_opt", skip_serializing_if = "Option::is_none")]
    pub cost_bound: Option<Rational>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma_min: Option<u64>,
    /// Local indices that must occur, e.g. `[2]`.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub require_index: Vec<u32>,
    /// Inclusive `[lo, hi]` range for `r_max`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_max_range: Option<(u32, u32)>,
    /// Exact multiset of local indices, e.g. `[7, 8, 9]`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub index_multiset: Option<Vec<u32>>,
    /// Inclusive range for the Cartier index.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_x_range: Option<(u64, u64)>,
    /// `P_{-1}`; needed by every filter below.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p1: Option<u32>,
    pub k3_positive: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p2_derived_min: Option<i64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub plurigenus_filters: Vec<PlurigenusFilter>,
    /// With `P_{-1} >= 1`, reject baskets whose `P_{-1}, ..., P_{-8}` is not nondecreasing.
    pub monotone_when_p1_positive: bool,
}

impl BasketConstraints {
    /// `gamma >= 0`, `2` a local index and `sigma >= 11`.
    pub fn gamma_sigma11_index2() -> Self {
        Self {
            gamma_nonneg: true,
            sigma_min: Some(11),
            require_index: vec![2],
            ..Self::default()
        }
    }

    pub fn with_r_max(mut self, lo: u32, hi: u32) -> Self {
        self.r_max_range = Some((lo, hi));
        self
    }

    pub fn with_p1(mut self, p1: u32) -> Self {
        self.p1 = Some(p1);
        self
    }

    fn needs_p1(&self) -> bool {
        self.k3_positive
            || self.p2_derived_min.is_some()
            || !self.plurigenus_filters.is_empty()
            || self.monotone_when_p1_positive
    }

    pub fn validate(&self) -> Result<()> {
        if self.needs_p1() && self.p1.is_none() {
            return Err(Error::InvalidConstraints(
                "degree and plurigenus filters need p1".into(),
            ));
        }
        if let Some((lo, hi)) = self.r_max_range {
            if lo > hi {
                return Err(Error::InvalidConstraints(format!("empty r_max range [{lo}, {hi}]")));
            }
        }
        if let Some(c) = &self.cost_bound {
            if c < &Rational::zero() {
                return Err(Error::InvalidConstraints("negative cost bound".into()));
            }
        }
        if self.plurigenus_filters.iter().any(|f| f.m == 0) {
            return Err(Error::InvalidConstraints("plurigenus filter with m = 0".into()));
        }
        Ok(())
    }

    /// Tightest bound on `sum(r - 1/r)` implied by the constraints, if any.
    pub fn cost_limit(&self) -> Option<Rational> {
        let gamma = self.gamma_nonneg.then(|| rational::int(24));
        match (gamma, self.cost_bound.clone()) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        }
    }

    /// Evaluates every enabled constraint on `basket` with plain rational arithmetic.
    pub fn admits(&self, basket: &Basket) -> bool {
        if self.gamma_nonneg && basket.gamma() < Rational::zero() {
            return false;
        }
        if let Some(bound) = &self.cost_bound {
            let cost: Rational = basket
                .pairs()
                .iter()
                .map(|p| rational::int(i64::from(p.r())) - rational::ratio(1, i64::from(p.r())))
                .sum();
            if &cost > bound {
                return false;
            }
        }
        if self.sigma_min.is_some_and(|s| basket.sigma() < s) {
            return false;
        }
        if !self.require_index.iter().all(|&r| basket.contains_index(r)) {
            return false;
        }
        if let Some((lo, hi)) = self.r_max_range {
            match basket.r_max() {
                Ok(r) if (lo..=hi).contains(&r) => {}
                _ => return false,
            }
        }
        if let Some(want) = &self.index_multiset {
            let mut want = want.clone();
            want.sort_unstable();
            if basket.indices().collect::<Vec<_>>() != want {
                return false;
            }
        }
        if let Some((lo, hi)) = self.r_x_range {
            if !(lo..=hi).contains(&basket.cartier_index()) {
                return false;
            }
        }
        self.admits_numerics(basket)
    }

    fn admits_numerics(&self, basket: &Basket) -> bool {
        let Some(p1) = self.p1 else {
            return true;
        };
        let m = FanoNumerics::new(basket.clone(), p1);
        if self.k3_positive && m.deg_k3() <= Rational::zero() {
            return false;
        }
        if self.p2_derived_min.is_some_and(|lo| m.derived_p2() < lo) {
            return false;
        }
        let top = self
            .plurigenus_filters
            .iter()
            .map(|f| f.m)
            .chain(self.monotone_when_p1_positive.then_some(8))
            .max()
            .unwrap_or(0);
        if top == 0 {
            return true;
        }
        let Ok(pg) = m.plurigenera(top) else {
            return false;
        };
        for f in &self.plurigenus_filters {
            if !f.cmp.holds(&pg[f.m as usize - 1], &BigInt::from(f.value)) {
                return false;
            }
        }
        if self.monotone_when_p1_positive && p1 >= 1 && pg[..8].windows(2).any(|w| w[1] < w[0]) {
            return false;
        }
        true
    }
}

struct Search<'a> {
    c: &'a BasketConstraints,
    pairs: Vec<OrbifoldPair>,
    /// `L * (r - 1/r)` for each entry of `pairs`.
    cost: Vec<i128>,
    scale: i128,
    budget: Option<i128>,
    /// Required multiplicity per index when `index_multiset` is set, indexed by r.
    quota: Option<Vec<usize>>,
    required: Vec<u32>,
}

#[derive(Clone)]
struct Node {
    pairs: Vec<OrbifoldPair>,
    spent: i128,
    sigma: u64,
    used: Vec<usize>,
}

impl<'a> Search<'a> {
    fn new(c: &'a BasketConstraints) -> Result<Self> {
        c.validate()?;
        let limit = c.cost_limit();
        let mut max_r: Option<u32> = None;
        let mut tighten = |r: u32| max_r = Some(max_r.map_or(r, |m| m.min(r)));
        if let Some((_, hi)) = c.r_max_range {
            tighten(hi);
        }
        if let Some(ms) = &c.index_multiset {
            tighten(ms.iter().copied().max().unwrap_or(1));
        }
        if let Some(l) = &limit {
            // r - 1/r <= limit forces r <= floor(limit) + 1
            let r = rational::floor(l).to_u32().unwrap_or(u32::MAX).saturating_add(1);
            tighten(r);
        }
        let limited = limit.is_some() || c.index_multiset.is_some();
        let max_r = match max_r {
            Some(r) if limited => r,
            _ => {
                return Err(Error::Unbounded(
                    "set gamma_nonneg, cost_bound or index_multiset".into(),
                ))
            }
        };
        if max_r > MAX_INDEX {
            return Err(Error::Unbounded(format!(
                "local indices up to {max_r} exceed the supported maximum {MAX_INDEX}"
            )));
        }
        let scale: i128 = (1..=i128::from(max_r.max(1))).fold(1, |acc, r| acc.lcm(&r));
        let quota = c.index_multiset.as_ref().map(|ms| {
            let mut q = vec![0usize; max_r as usize + 1];
            for &r in ms {
                q[r as usize] += 1;
            }
            q
        });
        let mut pairs = Vec::new();
        for r in 2..=max_r {
            if quota.as_ref().is_some_and(|q| q[r as usize] == 0) {
                continue;
            }
            for b in 1..=r / 2 {
                if b.gcd(&r) == 1 {
                    pairs.push(OrbifoldPair::new_unchecked(b, r));
                }
            }
        }
        let cost = pairs
            .iter()
            .map(|p| {
                let r = i128::from(p.r());
                scale * r - scale / r
            })
            .collect();
        let budget = limit.map(|l| {
            let scaled = l * Rational::from_integer(BigInt::from(scale));
            rational::floor(&scaled).to_i128().unwrap_or(i128::MAX)
        });
        let mut required = c.require_index.clone();
        required.sort_unstable();
        required.dedup();
        Ok(Self {
            c,
            pairs,
            cost,
            scale,
            budget,
            quota,
            required,
        })
    }

    fn structural_ok(&self, node: &Node) -> bool {
        if let Some(q) = &self.quota {
            if node.used != *q {
                return false;
            }
        }
        if self.c.sigma_min.is_some_and(|s| node.sigma < s) {
            return false;
        }
        if let Some((lo, _)) = self.c.r_max_range {
            if node.pairs.last().is_none_or(|p| p.r() < lo) {
                return false;
            }
        }
        self.required.iter().all(|&r| node.pairs.iter().any(|p| p.r() == r))
    }

    /// Whether some extension of `node` using pairs from index `from` on can still pass.
    fn may_extend(&self, node: &Node, from: usize) -> bool {
        let next_r = self.pairs.get(from).map_or(u32::MAX, |p| p.r());
        for &r in &self.required {
            if r < next_r && !node.pairs.iter().any(|p| p.r() == r) {
                return false;
            }
        }
        if let Some(budget) = self.budget {
            let rem = budget - node.spent;
            if let Some(s) = self.c.sigma_min {
                // r - 1/r >= 3b/2 for every pair, so each unit of b costs at least 3L/2.
                let extra = (2 * rem / (3 * self.scale)) as u64;
                if node.sigma + extra < s {
                    return false;
                }
            }
            if let Some((lo, _)) = self.c.r_max_range {
                let top = node.pairs.last().map_or(0, |p| p.r());
                let lo = i128::from(lo.max(next_r));
                if top < lo as u32 && rem < self.scale * lo - self.scale / lo {
                    return false;
                }
            }
        }
        true
    }

    fn dfs(&self, node: &mut Node, from: usize, out: &mut Vec<Basket>) {
        if self.structural_ok(node) {
            let basket = Basket::from_pairs(node.pairs.clone());
            if self.c.admits(&basket) {
                out.push(basket);
            }
        }
        for i in from..self.pairs.len() {
            if !self.may_extend(node, i) {
                // later pairs have r at least as large, so the same pruning applies
                break;
            }
            if let Some(budget) = self.budget {
                if node.spent + self.cost[i] > budget {
                    // costs are nondecreasing along `pairs`
                    break;
                }
            }
            let p = self.pairs[i];
            if let Some(q) = &self.quota {
                if node.used[p.r() as usize] >= q[p.r() as usize] {
                    continue;
                }
            }
            self.push(node, i);
            self.dfs(node, i, out);
            self.pop(node, i);
        }
    }

    fn push(&self, node: &mut Node, i: usize) {
        let p = self.pairs[i];
        node.pairs.push(p);
        node.spent += self.cost[i];
        node.sigma += u64::from(p.b());
        if self.quota.is_some() {
            node.used[p.r() as usize] += 1;
        }
    }

    fn pop(&self, node: &mut Node, i: usize) {
        let p = self.pairs[i];
        node.pairs.pop();
        node.spent -= self.cost[i];
        node.sigma -= u64::from(p.b());
        if self.quota.is_some() {
            node.used[p.r() as usize] -= 1;
        }
    }

    fn root(&self) -> Node {
        Node {
            pairs: Vec::new(),
            spent: 0,
            sigma: 0,
            used: self.quota.as_ref().map_or(Vec::new(), |q| vec![0; q.len()]),
        }
    }

    fn run(&self) -> Vec<Basket> {
        let root = self.root();
        let mut out = Vec::new();
        if self.structural_ok(&root) && self.c.admits(&Basket::empty()) {
            out.push(Basket::empty());
        }
        let branches: Vec<Vec<Basket>> = (0..self.pairs.len())
            .into_par_iter()
            .map(|i| {
                let mut node = root.clone();
                let mut found = Vec::new();
                let fits = self.budget.is_none_or(|b| self.cost[i] <= b);
                let quota_ok = self.quota.as_ref().is_none_or(|q| q[self.pairs[i].r() as usize] > 0);
                if fits && quota_ok && self.may_extend(&node, i) {
                    self.push(&mut node, i);
                    self.dfs(&mut node, i, &mut found);
                }
                found
            })
            .collect();
        out.extend(branches.into_iter().flatten());
        out.sort_unstable();
        out
    }
}

/// All baskets satisfying `c`, canonically ordered and duplicate-free.
pub fn enumerate_baskets(c: &BasketConstraints) -> Result<Vec<Basket>> {
    Ok(Search::new(c)?.run())
}

/// Minimum positive `-K^3` over the baskets satisfying `c`, with the first
/// basket (in canonical order) attaining it.
pub fn min_positive_k3(c: &BasketConstraints) -> Result<(Rational, Basket)> {
    let p1 =
        c.p1.ok_or_else(|| Error::InvalidConstraints("min_positive_k3 needs p1".into()))?;
    let mut c = c.clone();
    c.k3_positive = true;
    enumerate_baskets(&c)?
        .into_iter()
        .map(|b| (FanoNumerics::new(b.clone(), p1).deg_k3(), b))
        .min_by(|x, y| x.0.cmp(&y.0).then_with(|| x.1.cmp(&y.1)))
        .ok_or(Error::NoAdmissibleBasket)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    #[test]
    fn unbounded_search_is_rejected() {
        let c = BasketConstraints::default();
        assert!(matches!(enumerate_baskets(&c), Err(Error::Unbounded(_))));
        let c = BasketConstraints {
            r_max_range: Some((2, 5)),
            ..Default::default()
        };
        assert!(matches!(enumerate_baskets(&c), Err(Error::Unbounded(_))));
    }

    #[test]
    fn filters_need_p1() {
        let c = BasketConstraints {
            gamma_nonneg: true,
            k3_positive: true,
            ..Default::default()
        };
        assert!(matches!(enumerate_baskets(&c), Err(Error::InvalidConstraints(_))));
    }

    #[test]
    fn r_max_14_is_unique() {
        let got = enumerate_baskets(&BasketConstraints::gamma_sigma11_index2().with_r_max(14, 14)).unwrap();
        let mut expect = vec![(1, 2); 6];
        expect.push((5, 14));
        assert_eq!(got, vec![Basket::of(&expect)]);
        let k3 = FanoNumerics::new(got[0].clone(), 0).deg_k3();
        assert_eq!(k3, ratio(3, 14));
    }

    #[test]
    fn no_baskets_for_large_r_max() {
        let got = enumerate_baskets(&BasketConstraints::gamma_sigma11_index2().with_r_max(22, 24)).unwrap();
        assert!(got.is_empty());
    }

    #[test]
    fn min_k3_over_index_789() {
        let c = BasketConstraints {
            index_multiset: Some(vec![7, 8, 9]),
            p1: Some(1),
            p2_derived_min: Some(1),
            ..Default::default()
        };
        let (k3, w) = min_positive_k3(&c).unwrap();
        assert_eq!(k3, ratio(73, 504));
        assert_eq!(w, Basket::of(&[(3, 7), (1, 8), (2, 9)]));
    }

    #[test]
    fn min_k3_over_index_3_4_7_10() {
        let c = BasketConstraints {
            index_multiset: Some(vec![3, 4, 7, 10]),
            p1: Some(1),
            p2_derived_min: Some(1),
            ..Default::default()
        };
        assert_eq!(min_positive_k3(&c).unwrap().0, ratio(13, 420));
    }

    #[test]
    fn min_k3_single_candidate() {
        let c = BasketConstraints {
            index_multiset: Some(vec![2]),
            p1: Some(4),
            ..Default::default()
        };
        let (k3, w) = min_positive_k3(&c).unwrap();
        assert_eq!(k3, ratio(5, 2));
        assert_eq!(w, Basket::of(&[(1, 2)]));
    }

    #[test]
    fn min_k3_empty_set() {
        let c = BasketConstraints {
            index_multiset: Some(vec![2]),
            p1: Some(0),
            ..Default::default()
        };
        assert_eq!(min_positive_k3(&c), Err(Error::NoAdmissibleBasket));
    }

    #[test]
    fn monotone_filter_matches_direct_check() {
        let base = BasketConstraints {
            gamma_nonneg: true,
            r_max_range: Some((2, 7)),
            p1: Some(1),
            ..Default::default()
        };
        let all = enumerate_baskets(&base).unwrap();
        let mono = enumerate_baskets(&BasketConstraints {
            monotone_when_p1_positive: true,
            ..base.clone()
        })
        .unwrap();
        let direct: Vec<Basket> = all
            .iter()
            .filter(|b| {
                let pg = FanoNumerics::new((*b).clone(), 1).plurigenera(8).unwrap();
                pg.windows(2).all(|w| w[0] <= w[1])
            })
            .cloned()
            .collect();
        assert_eq!(mono, direct);
        assert!(mono.len() < all.len());
    }

    #[test]
    fn monotone_filter_rejects_vanishing_p5() {
        let b = Basket::of(&[(1, 2), (1, 2), (1, 3), (2, 7), (1, 11)]);
        let m = FanoNumerics::new(b.clone(), 1);
        assert_eq!(m.anti_plurigenus(5).unwrap(), BigInt::from(0));
        let c = BasketConstraints {
            p1: Some(1),
            monotone_when_p1_positive: true,
            ..Default::default()
        };
        assert!(!c.admits(&b));
    }

    #[test]
    fn plurigenus_filter() {
        let b = Basket::of(&[(1, 2), (1, 2), (1, 3), (2, 5), (1, 6), (3, 7)]);
        let p22 = FanoNumerics::new(b.clone(), 0).anti_plurigenus(22).unwrap();
        let v = p22.to_i64().unwrap();
        let mk = |cmp, value| BasketConstraints {
            p1: Some(0),
            plurigenus_filters: vec![PlurigenusFilter { m: 22, cmp, value }],
            ..Default::default()
        };
        assert!(mk(Cmp::Eq, v).admits(&b));
        assert!(mk(Cmp::Lt, v + 1).admits(&b));
        assert!(!mk(Cmp::Gt, v).admits(&b));
    }

    #[test]
    fn constraints_json_round_trip() {
        let c = BasketConstraints::gamma_sigma11_index2().with_r_max(16, 21).with_p1(0);
        let s = serde_json::to_string(&c).unwrap();
        let back: BasketConstraints = serde_json::from_str(&s).unwrap();
        assert_eq!(back, c);
        assert!(serde_json::from_str::<BasketConstraints>(r#"{"bogus": 1}"#).is_err());
    }
}
