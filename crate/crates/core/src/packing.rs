//! Prime packings and their inverse.
//!
//! Packing `(b1, r1), (b2, r2)` with `b1 r2 - b2 r1 = 1` into `(b1 + b2, r1 + r2)`
//! is the mediant step of the Stern-Brocot tree, so every pair with `b > 1`
//! has exactly one way to be unpacked: into its two Stern-Brocot parents.

use std::collections::{BTreeSet, HashSet, VecDeque};

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::basket::{Basket, OrbifoldPair};
use crate::geography::BasketConstraints;

/// A single packing `left + right -> merged`, oriented so that
/// `left.b * right.r - right.b * left.r = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PackingStep {
    pub left: OrbifoldPair,
    pub right: OrbifoldPair,
    pub merged: OrbifoldPair,
}

impl PackingStep {
    /// Returns the step if the two pairs can be packed.
    pub fn between(x: OrbifoldPair, y: OrbifoldPair) -> Option<Self> {
        let (left, right) = match x.det(y) {
            1 => (x, y),
            -1 => (y, x),
            _ => return None,
        };
        Some(Self {
            left,
            right,
            merged: OrbifoldPair::new_unchecked(x.b() + y.b(), x.r() + y.r()),
        })
    }
}

/// All distinct one-step packings of `basket`, keyed by the resulting basket.
pub fn prime_packings(basket: &Basket) -> Vec<(PackingStep, Basket)> {
    let groups = basket.grouped();
    let pairs = basket.pairs();
    // first position of each distinct pair
    let mut first = Vec::with_capacity(groups.len());
    let mut pos = 0;
    for &(_, n) in &groups {
        first.push(pos);
        pos += n;
    }
    let mut out = BTreeSet::new();
    for gi in 0..groups.len() {
        for gj in gi + 1..groups.len() {
            let (i, j) = (first[gi], first[gj]);
            if let Some(step) = PackingStep::between(pairs[i], pairs[j]) {
                out.insert((basket.replace_two(i, j, step.merged), step));
            }
        }
    }
    out.into_iter().map(|(b, s)| (s, b)).collect()
}

/// Stern-Brocot parents of `p`, or `None` when `p.b() == 1`.
///
/// Solves `b q - p r = 1` with `0 < q < r` by a modular inverse.
pub fn parents(pair: OrbifoldPair) -> Option<PackingStep> {
    let (b, r) = (i64::from(pair.b()), i64::from(pair.r()));
    if b == 1 {
        return None;
    }
    let ext = b.extended_gcd(&r);
    debug_assert_eq!(ext.gcd, 1);
    let q = ext.x.rem_euclid(r);
    let p = (b * q - 1) / r;
    // (p, q) is the left neighbour p/q < b/r, the other parent is (b-p, r-q).
    let lo = OrbifoldPair::new_unchecked(p as u32, q as u32);
    let hi = OrbifoldPair::new_unchecked((b - p) as u32, (r - q) as u32);
    PackingStep::between(lo, hi)
}

/// Fully unpacks one pair into `(1, r)` pairs.
pub fn unpack_pair(pair: OrbifoldPair) -> Basket {
    let mut done = Vec::new();
    let mut stack = vec![pair];
    while let Some(p) = stack.pop() {
        match parents(p) {
            Some(step) => stack.extend([step.left, step.right]),
            None => done.push(p),
        }
    }
    Basket::from_pairs(done)
}

/// The unique basket of `(1, r)` pairs dominating `basket`.
pub fn initial_basket(basket: &Basket) -> Basket {
    Basket::from_pairs(
        basket
            .pairs()
            .iter()
            .flat_map(|&p| unpack_pair(p).pairs().to_vec())
            .collect(),
    )
}

/// `n^0_{1,2}, n^0_{1,3}, n^0_{1,4}` from `P_{-1..-4}` and `sigma_5`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InitialCounts {
    pub n12: i64,
    pub n13: i64,
    pub n14: i64,
    pub sigma5: u64,
}

pub fn initial_counts(p1: i64, p2: i64, p3: i64, p4: i64, sigma5: u64) -> InitialCounts {
    InitialCounts {
        n12: 5 - 6 * p1 + 4 * p2 - p3,
        n13: 4 - 2 * p1 - 2 * p2 + 3 * p3 - p4,
        n14: 1 + 3 * p1 - p2 - 2 * p3 + p4 - sigma5 as i64,
        sigma5,
    }
}

/// Counts of `(1, r)` in an initial basket, read off directly.
pub fn counts_of_initial(initial: &Basket) -> InitialCounts {
    let count = |r: u32| initial.pairs().iter().filter(|p| p.r() == r).count() as i64;
    InitialCounts {
        n12: count(2),
        n13: count(3),
        n14: count(4),
        sigma5: initial.pairs().iter().filter(|p| p.r() >= 5).count() as u64,
    }
}

/// Decides `from ⪰ to` and returns a packing sequence when it holds.
///
/// Works backwards from `to`. Each pair with `b > 1` has a unique unpacking,
/// so `from ⪰ to` holds exactly when `from` is a union of cuts of the
/// unpacking trees of the pairs of `to`. Cuts are chosen one node at a time;
/// failed (open nodes, unused pairs) states are memoised.
pub fn dominates(from: &Basket, to: &Basket) -> Option<Vec<PackingStep>> {
    if from == to {
        return Some(Vec::new());
    }
    if from.sigma() != to.sigma()
        || from.sum_r() != to.sum_r()
        || from.len() < to.len()
        || initial_basket(from) != initial_basket(to)
    {
        return None;
    }
    let mut search = CutSearch {
        failed: HashSet::new(),
        splits: Vec::new(),
    };
    if search.run(to.pairs().to_vec(), from.pairs().to_vec()) {
        // splits were recorded top-down; packing runs bottom-up
        search.splits.reverse();
        Some(search.splits)
    } else {
        None
    }
}

struct CutSearch {
    failed: HashSet<(Vec<OrbifoldPair>, Vec<OrbifoldPair>)>,
    splits: Vec<PackingStep>,
}

impl CutSearch {
    /// `open` and `unused` are sorted. Returns whether every open node can be
    /// resolved into exactly the pairs of `unused`.
    fn run(&mut self, open: Vec<OrbifoldPair>, unused: Vec<OrbifoldPair>) -> bool {
        let Some(&x) = open.last() else {
            return unused.is_empty();
        };
        if open.len() > unused.len() {
            return false;
        }
        let key = (open, unused);
        if self.failed.contains(&key) {
            return false;
        }
        let (open, unused) = key;
        let mut rest = open.clone();
        rest.pop();
        if let Ok(i) = unused.binary_search(&x) {
            let mut left = unused.clone();
            left.remove(i);
            if self.run(rest.clone(), left) {
                return true;
            }
        }
        if let Some(step) = parents(x) {
            let mut split = rest;
            for p in [step.left, step.right] {
                let at = split.partition_point(|q| *q <= p);
                split.insert(at, p);
            }
            self.splits.push(step);
            if self.run(split, unused.clone()) {
                return true;
            }
            self.splits.pop();
        }
        self.failed.insert((open, unused));
        false
    }
}

/// Applies a packing sequence, checking each step against the current basket.
pub fn apply_steps(start: &Basket, steps: &[PackingStep]) -> Option<Basket> {
    let mut cur = start.clone();
    for step in steps {
        let i = cur.pairs().iter().position(|&p| p == step.left)?;
        let j = cur.pairs().iter().position(|&p| p == step.right)?;
        if step.left.det(step.right) != 1 {
            return None;
        }
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        cur = cur.replace_two(i, j, step.merged);
    }
    Some(cur)
}

/// Every basket dominated by `start` (itself included) that passes `filter`,
/// in canonical order.
///
/// Subtrees are cut when `gamma < 0` (if the filter asks for `gamma >= 0`) or
/// when `r_max` exceeds the filter's upper bound: packing lowers `gamma` and
/// never lowers `r_max`.
pub fn descendants(start: &Basket, filter: &BasketConstraints) -> Vec<Basket> {
    let r_hi = filter.r_max_range.map(|(_, hi)| hi);
    let viable = |b: &Basket| {
        let gamma_ok = !filter.gamma_nonneg || b.gamma() >= num_traits::Zero::zero();
        let r_ok = match (r_hi, b.r_max()) {
            (Some(hi), Ok(r)) => r <= hi,
            _ => true,
        };
        gamma_ok && r_ok
    };
    let mut seen: HashSet<Basket> = HashSet::from([start.clone()]);
    let mut queue = VecDeque::new();
    if viable(start) {
        queue.push_back(start.clone());
    }
    let mut out = BTreeSet::new();
    while let Some(state) = queue.pop_front() {
        if filter.admits(&state) {
            out.insert(state.clone());
        }
        for (_, next) in prime_packings(&state) {
            if seen.insert(next.clone()) && viable(&next) {
                queue.push_back(next);
            }
        }
    }
    out.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basket::FanoNumerics;
    use crate::rational::Rational;
    use proptest::prelude::*;

    fn pair(b: u32, r: u32) -> OrbifoldPair {
        OrbifoldPair::new(b, r).unwrap()
    }

    #[test]
    fn single_forced_packing() {
        let got = prime_packings(&Basket::of(&[(1, 2), (1, 3)]));
        assert_eq!(got.len(), 1);
        let (step, b) = &got[0];
        assert_eq!(step.merged, pair(2, 5));
        assert_eq!(*b, Basket::of(&[(2, 5)]));
    }

    #[test]
    fn equal_pairs_do_not_pack() {
        assert!(prime_packings(&Basket::of(&[(2, 5), (2, 5)])).is_empty());
    }

    #[test]
    fn packings_deduplicate_multiset_choices() {
        let got = prime_packings(&Basket::of(&[(1, 2), (1, 2), (1, 3), (1, 3)]));
        assert_eq!(got.len(), 1);
        assert_eq!(got[0].1, Basket::of(&[(1, 2), (2, 5), (1, 3)]));
    }

    #[test]
    fn step_orientation() {
        let s = PackingStep::between(pair(1, 3), pair(1, 2)).unwrap();
        assert_eq!((s.left, s.right), (pair(1, 2), pair(1, 3)));
        assert_eq!(s.left.det(s.right), 1);
    }

    #[test]
    fn unpack_examples() {
        assert_eq!(unpack_pair(pair(2, 5)), Basket::of(&[(1, 2), (1, 3)]));
        let mut expect = vec![(1, 2); 7];
        expect.push((1, 3));
        assert_eq!(unpack_pair(pair(8, 17)), Basket::of(&expect));
        assert_eq!(unpack_pair(pair(1, 6)), Basket::of(&[(1, 6)]));
    }

    #[test]
    fn parents_agree_with_exhaustive_split_search() {
        for r in 3u32..60 {
            for b in 2..=r / 2 {
                if b.gcd(&r) != 1 {
                    continue;
                }
                let mut found = Vec::new();
                for r1 in 2..r - 1 {
                    for b1 in 1..=(r1 / 2).min(b - 1) {
                        let (b2, r2) = (b - b1, r - r1);
                        if b2 == 0 || 2 * b2 > r2 || b1.gcd(&r1) != 1 || b2.gcd(&r2) != 1 {
                            continue;
                        }
                        if pair(b1, r1).det(pair(b2, r2)) == 1 {
                            found.push((pair(b1, r1), pair(b2, r2)));
                        }
                    }
                }
                let s = parents(pair(b, r)).unwrap();
                assert_eq!(found, vec![(s.left, s.right)], "({b},{r})");
            }
        }
    }

    #[test]
    fn initial_basket_examples() {
        let b = Basket::of(&[(1, 2), (1, 3), (1, 3), (8, 17)]);
        let mut expect = vec![(1, 2); 8];
        expect.extend([(1, 3); 3]);
        assert_eq!(initial_basket(&b), Basket::of(&expect));

        let no2 = Basket::of(&[(1, 2), (1, 2), (10, 21)]);
        let init = initial_basket(&no2);
        assert!(init.pairs().iter().all(|p| p.b() == 1));
        assert_eq!(init.sigma(), no2.sigma());
        assert_eq!(init.sum_r(), no2.sum_r());

        assert_eq!(initial_basket(&Basket::of(&[(1, 5)])), Basket::of(&[(1, 5)]));
    }

    #[test]
    fn dominates_examples() {
        let b = Basket::of(&[(1, 2), (2, 5)]);
        assert_eq!(dominates(&b, &b), Some(vec![]));
        let steps = dominates(&Basket::of(&[(1, 2), (1, 3)]), &Basket::of(&[(2, 5)])).unwrap();
        assert_eq!(steps.len(), 1);

        let from = Basket::of(&[(1, 2), (1, 2), (1, 3), (1, 3), (1, 6), (1, 7)]);
        let to = Basket::of(&[(1, 2), (2, 5), (1, 3), (2, 13)]);
        let steps = dominates(&from, &to).unwrap();
        assert_eq!(apply_steps(&from, &steps), Some(to.clone()));
        assert_eq!(dominates(&to, &from), None);
        assert_eq!(dominates(&Basket::of(&[(2, 5)]), &Basket::of(&[(1, 2), (1, 3)])), None);
    }

    #[test]
    fn initial_counts_examples() {
        let c = initial_counts(0, 1, 0, 2, 0);
        assert_eq!((c.n12, c.n13, c.n14), (9, 0, 2));
        let c = initial_counts(0, 1, 0, 2, 2);
        assert_eq!(c.n14, 0);
        let c = initial_counts(1, 1, 1, 1, 0);
        assert_eq!((c.n12, c.n13, c.n14), (2, 2, 2));
        let c = initial_counts(0, 0, 0, 0, 0);
        assert_eq!((c.n12, c.n13, c.n14), (5, 4, 1));
    }

    #[test]
    fn initial_counts_worked_check() {
        let m = FanoNumerics::new(Basket::of(&[(2, 5)]), 0);
        let p: Vec<i64> = m
            .plurigenera(4)
            .unwrap()
            .iter()
            .map(|x| i64::try_from(x).unwrap())
            .collect();
        let direct = counts_of_initial(&initial_basket(&m.basket));
        let c = initial_counts(p[0], p[1], p[2], p[3], direct.sigma5);
        assert_eq!((c.n12, c.n13), (1, 1));
        assert_eq!(c, direct);
    }

    #[test]
    fn descendants_without_packable_pairs() {
        let b = Basket::of(&[(1, 5)]);
        assert_eq!(descendants(&b, &BasketConstraints::default()), vec![b]);
    }

    fn arb_small_basket() -> impl Strategy<Value = Basket> {
        crate::basket::tests::arb_basket()
    }

    proptest! {
        #[test]
        fn unpacking_conserves_sums(b in arb_small_basket()) {
            let init = initial_basket(&b);
            prop_assert!(init.pairs().iter().all(|p| p.b() == 1));
            prop_assert_eq!(init.sigma(), b.sigma());
            prop_assert_eq!(init.sum_r(), b.sum_r());
        }

        #[test]
        fn packing_lowers_gamma_and_sigma_prime(b in arb_small_basket()) {
            for (step, next) in prime_packings(&b) {
                prop_assert_eq!(step.left.det(step.right), 1);
                prop_assert_eq!(next.sigma(), b.sigma());
                prop_assert_eq!(next.sum_r(), b.sum_r());
                prop_assert!(next.gamma() < b.gamma());
                prop_assert!(next.sigma_prime() < b.sigma_prime());
                let k3: Rational = FanoNumerics::new(next.clone(), 0).deg_k3();
                prop_assert!(k3 > FanoNumerics::new(b.clone(), 0).deg_k3());
                prop_assert_eq!(initial_basket(&next), initial_basket(&b));
            }
        }

        #[test]
        fn initial_basket_dominates(b in arb_small_basket()) {
            let init = initial_basket(&b);
            let steps = dominates(&init, &b);
            prop_assert!(steps.is_some());
            prop_assert_eq!(apply_steps(&init, &steps.unwrap()), Some(b));
        }

        #[test]
        fn unpack_order_independent(b in arb_small_basket()) {
            // Unpack one pair at a time in reverse order, re-canonicalizing in between.
            let mut cur = b.clone();
            loop {
                let idx = cur.pairs().iter().rposition(|p| p.b() > 1);
                match idx {
                    Some(i) => {
                        let s = parents(cur.pairs()[i]).unwrap();
                        cur = cur.replace_one(i, [s.left, s.right]);
                    }
                    None => break,
                }
            }
            prop_assert_eq!(cur, initial_basket(&b));
        }
    }
}
