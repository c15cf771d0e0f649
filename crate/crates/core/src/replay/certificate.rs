//! Certification of ledger scenarios.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::scenario::{
    Branch, CartierFact, CriterionRule, Hypotheses, Ledger, M1Rule, N0Rule, Plan, Probe, Scenario, Setting,
};
use crate::basket::{refine_k3_lower, Basket, FanoNumerics};
use crate::criteria::{
    bc2_spec, n0_lower_bound, nonpencil_np1, np1_equality_analyze, np2_threshold, np2cor_threshold,
    plurigenus_lower_bound, thm_bc_spec, usage_spec, Applicability, BoundSpec, CriterionParams, Np1Status, Np2Variant,
    RationalBound,
};
use crate::error::{Error, Result};
use crate::rational::{self, int, Rational};
use crate::surd::cmp_exceeds_sqrt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Match,
    /// certified below the claimed bound
    Improvement,
    /// certified above the claimed bound
    Exceeds,
}

impl Outcome {
    fn compare(certified: u64, claimed: u64) -> Self {
        match certified.cmp(&claimed) {
            std::cmp::Ordering::Less => Outcome::Improvement,
            std::cmp::Ordering::Equal => Outcome::Match,
            std::cmp::Ordering::Greater => Outcome::Exceeds,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub statement: String,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermReport {
    pub label: String,
    pub expr: String,
    /// Decimal value of the expression inside the rounding, for reading only.
    pub inner_approx: String,
    pub value: i64,
}

/// One parameter point of a branch.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Evaluation {
    pub r_max: u32,
    pub r_x: u64,
    #[serde(with = "rational::serde_str")]
    pub k3: Rational,
    pub m1: u32,
    pub mu0: RationalBound,
    pub n0: u64,
    pub bound: u64,
    /// `bound - 1` violates some term.
    pub tight: bool,
    pub terms: Vec<TermReport>,
    pub checks: Vec<Check>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BranchResult {
    pub branch: String,
    pub criterion: String,
    pub certified: u64,
    pub claimed: u64,
    pub outcome: Outcome,
    pub evaluations: Vec<Evaluation>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub scenario_id: String,
    pub theorem: String,
    pub branches: Vec<BranchResult>,
    pub certified_bound: u64,
    pub claimed_bound: u64,
    pub outcome: Outcome,
    /// `r_max` values excluded because no `r_X` is compatible with them.
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub infeasible_r_max: Vec<u32>,
}

/// A parameter point: worst case of the hypotheses at a fixed `r_max`.
#[derive(Debug, Clone)]
struct Point {
    r_max: u32,
    r_x: u64,
    k3: Rational,
    exact_r_x: bool,
    basket: Option<(Basket, u32)>,
}

fn lcm_upto(r: u32) -> u64 {
    (1..=u64::from(r)).fold(1u64, |acc, k| acc.lcm(&k))
}

fn points(s: &Scenario) -> Result<(Vec<Point>, Vec<u32>)> {
    match &s.hypotheses {
        Hypotheses::Basket { basket, p1 } => {
            let k3 = FanoNumerics::new(basket.clone(), *p1).deg_k3();
            Ok((
                vec![Point {
                    r_max: basket.r_max()?,
                    r_x: basket.cartier_index(),
                    k3,
                    exact_r_x: true,
                    basket: Some((basket.clone(), *p1)),
                }],
                Vec::new(),
            ))
        }
        Hypotheses::Bounds { k3_lower, r_x, r_max } => {
            let mut out = Vec::new();
            let mut skipped = Vec::new();
            for r in r_max.0..=r_max.1 {
                // r_X is a multiple of r_max dividing lcm(1..=r_max)
                let cap = lcm_upto(r);
                let point = match *r_x {
                    CartierFact::Exact(x) if x.is_multiple_of(u64::from(r)) && cap.is_multiple_of(x) => Some((x, true)),
                    CartierFact::Exact(_) => None,
                    CartierFact::AtMost(x) if x >= u64::from(r) => Some((x.min(cap), false)),
                    CartierFact::AtMost(_) => None,
                };
                match point {
                    Some((x, exact)) => out.push(Point {
                        r_max: r,
                        r_x: x,
                        k3: if exact {
                            refine_k3_lower(k3_lower, x)
                        } else {
                            k3_lower.clone()
                        },
                        exact_r_x: exact,
                        basket: None,
                    }),
                    None => skipped.push(r),
                }
            }
            if out.is_empty() {
                return Err(s.invalid("no r_max in range is compatible with r_X"));
            }
            Ok((out, skipped))
        }
    }
}

fn check(checks: &mut Vec<Check>, statement: String, holds: bool) {
    checks.push(Check { statement, holds });
}

fn fmt(q: &Rational) -> String {
    rational::format(q)
}

fn exact_plurigenus(basket: &Basket, p1: u32, m: u32) -> Result<BigInt> {
    FanoNumerics::new(basket.clone(), p1).anti_plurigenus(m)
}

enum Role<'a> {
    Direct,
    SamePencil(&'a Probe),
    DifferentPencil(&'a Probe),
}

fn derive_m1(s: &Scenario, b: &Branch, role: &Role, pt: &Point, checks: &mut Vec<Check>) -> Result<u32> {
    if let Role::DifferentPencil(probe) = role {
        return Ok(probe.k);
    }
    let rule = b.m1.as_ref().ok_or_else(|| s.invalid("missing m1 rule"))?;
    let m1 = match rule {
        M1Rule::Np2 { t, variant } => {
            let th = np2_threshold(t, &pt.k3, pt.r_x, pt.r_max, *variant)?;
            let m1 = (th.min_m() as u32).max(s.m0);
            check(
                checks,
                format!(
                    "np2({}) at m1={m1}: m1 >= {}, 3 m1 >= {} * {}, m1 > -3/4 + sqrt({})",
                    variant.index(),
                    fmt(t),
                    pt.r_max,
                    fmt(t),
                    fmt(&th.radicand)
                ),
                th.holds_at(u64::from(m1)),
            );
            m1
        }
        M1Rule::Fixed(n) => *n,
        M1Rule::Np1Equality(m) => {
            let (basket, p1) = pt.basket.as_ref().ok_or_else(|| s.invalid("np1 rule needs a basket"))?;
            let r = np1_equality_analyze(basket, *p1, *m)?;
            check(
                checks,
                format!(
                    "P_-{m} = {} = r_X k3 * {m} + 1 with r_X k3 = {} != 1",
                    fmt(&r.p_m),
                    fmt(&r.r_x_k3)
                ),
                r.status == Np1Status::Equal && r.contradiction_if_pencil,
            );
            *m
        }
        M1Rule::Np1(m) => {
            let (basket, p1) = pt.basket.as_ref().ok_or_else(|| s.invalid("np1 rule needs a basket"))?;
            let p = exact_plurigenus(basket, *p1, *m)?;
            check(
                checks,
                format!("P_-{m} = {p} > {} * {} * {m} + 1", pt.r_x, fmt(&pt.k3)),
                nonpencil_np1(*m, &p, pt.r_x, &pt.k3),
            );
            *m
        }
    };
    if m1 < s.m0 {
        return Err(s.invalid(&format!("m1 = {m1} below m0 = {}", s.m0)));
    }
    if let Some(c) = b.claimed_m1 {
        check(checks, format!("derived m1 = {m1} <= claimed m1 = {c}"), m1 <= c);
    }
    Ok(m1)
}

fn derive_mu0(s: &Scenario, role: &Role, pt: &Point, checks: &mut Vec<Check>) -> Result<RationalBound> {
    let Role::SamePencil(probe) = role else {
        return Ok(RationalBound::exact(int(i64::from(s.m0))));
    };
    let k = int(i64::from(probe.k));
    match &pt.basket {
        Some((basket, p1)) => {
            let p = Rational::from_integer(exact_plurigenus(basket, *p1, probe.k)?);
            let ok = &p - int(1) > &k / &probe.l;
            check(
                checks,
                format!(
                    "P_-{} - 1 = {} > {} / {}",
                    probe.k,
                    fmt(&(&p - int(1))),
                    probe.k,
                    fmt(&probe.l)
                ),
                ok,
            );
            if !ok {
                return Err(Error::VerificationFailure {
                    scenario: s.id.clone(),
                    inequality: checks.last().map(|c| c.statement.clone()).unwrap_or_default(),
                });
            }
            Ok(RationalBound::exact(&k / (p - int(1))))
        }
        None => {
            let th = np2cor_threshold(&probe.t, &probe.l, &pt.k3, pt.r_max)?;
            check(
                checks,
                format!(
                    "np2cor at k={}: k >= {}, 3k >= {} * {}, k > -3/4 + sqrt({})",
                    probe.k,
                    fmt(&probe.t),
                    pt.r_max,
                    fmt(&probe.t),
                    fmt(&th.radicand)
                ),
                th.holds_at(u64::from(probe.k)),
            );
            Ok(RationalBound::below(probe.l.clone()))
        }
    }
}

fn derive_n0(s: &Scenario, b: &Branch, pt: &Point, m1: u32) -> Result<u64> {
    match b.n0 {
        N0Rule::One => Ok(1),
        N0Rule::Lemma if pt.exact_r_x => Ok(n0_lower_bound(pt.r_x, m1, s.nu0(), pt.r_max)),
        N0Rule::Lemma => Err(s.invalid("the N0 lemma needs an exact r_X")),
    }
}

fn criterion_spec(s: &Scenario, rule: &CriterionRule, p: &CriterionParams) -> Result<BoundSpec> {
    let spec = match rule {
        CriterionRule::ThmBc(v) => thm_bc_spec(*v, p)?,
        CriterionRule::Bc2(beta) => bc2_spec(p, beta)?,
        CriterionRule::Usage(v) => match usage_spec(*v, p)? {
            Applicability::Applies(spec) => spec,
            Applicability::Inapplicable(why) => {
                return Err(Error::VerificationFailure {
                    scenario: s.id.clone(),
                    inequality: format!("usage({v}) gate: {why}"),
                })
            }
        },
    };
    Ok(spec)
}

fn evaluate(s: &Scenario, b: &Branch, role: &Role, pt: &Point) -> Result<Evaluation> {
    let mut checks = Vec::new();
    let m1 = derive_m1(s, b, role, pt, &mut checks)?;
    let mu0 = derive_mu0(s, role, pt, &mut checks)?;
    let n0 = derive_n0(s, b, pt, m1)?;
    let params = CriterionParams::new(s.m0, m1, mu0.clone(), s.nu0(), pt.r_max, pt.r_x, n0)?;
    let spec = criterion_spec(s, &b.criterion, &params)?;
    let bound_big = spec.value();
    let bound = bound_big.to_u64().ok_or_else(|| s.invalid("bound out of range"))?;
    let terms = spec
        .terms
        .iter()
        .map(|t| TermReport {
            label: t.label.to_string(),
            expr: t.describe(&spec.mu0),
            inner_approx: format!("{:.6}", t.at_endpoint(&spec.mu0).to_f64()),
            value: t.value(&spec.mu0).to_i64().unwrap_or(i64::MAX),
        })
        .collect();
    for t in &spec.terms {
        check(
            &mut checks,
            format!("{bound} >= {} [{}]", t.describe(&spec.mu0), t.label),
            t.admits(&bound_big, &spec.mu0),
        );
    }
    if let Some(c) = checks.iter().find(|c| !c.holds) {
        return Err(Error::VerificationFailure {
            scenario: s.id.clone(),
            inequality: c.statement.clone(),
        });
    }
    Ok(Evaluation {
        r_max: pt.r_max,
        r_x: pt.r_x,
        k3: pt.k3.clone(),
        m1,
        mu0,
        n0,
        bound,
        tight: spec.is_tight(),
        terms,
        checks,
    })
}

fn run_branch(s: &Scenario, name: &str, b: &Branch, role: Role, pts: &[Point]) -> Result<BranchResult> {
    let evaluations = pts
        .iter()
        .map(|pt| evaluate(s, b, &role, pt))
        .collect::<Result<Vec<_>>>()?;
    let certified = evaluations.iter().map(|e| e.bound).max().unwrap_or(0);
    Ok(BranchResult {
        branch: name.to_string(),
        criterion: b.criterion.describe(),
        certified,
        claimed: b.claimed,
        outcome: Outcome::compare(certified, b.claimed),
        evaluations,
    })
}

/// Runs every branch of `s`, rechecks the result and compares it with the claims.
pub fn certify_scenario(s: &Scenario) -> Result<Certificate> {
    s.validate()?;
    let (pts, infeasible_r_max) = points(s)?;
    let branches = match &s.plan {
        Plan::Direct(b) => vec![run_branch(s, "direct", b, Role::Direct, &pts)?],
        Plan::Dichotomy {
            probe,
            same_pencil,
            different_pencil,
        } => {
            let same = same_pencil
                .as_ref()
                .ok_or_else(|| s.invalid("missing same-pencil branch"))?;
            let diff = different_pencil
                .as_ref()
                .ok_or_else(|| s.invalid("missing different-pencil branch"))?;
            vec![
                run_branch(s, "same_pencil", same, Role::SamePencil(probe), &pts)?,
                run_branch(s, "different_pencil", diff, Role::DifferentPencil(probe), &pts)?,
            ]
        }
    };
    let certified_bound = branches.iter().map(|b| b.certified).max().unwrap_or(0);
    let claimed_bound = branches.iter().map(|b| b.claimed).max().unwrap_or(0);
    let outcome = if branches.iter().any(|b| b.outcome == Outcome::Exceeds) {
        Outcome::Exceeds
    } else {
        Outcome::compare(certified_bound, claimed_bound)
    };
    let cert = Certificate {
        scenario_id: s.id.clone(),
        theorem: s.theorem.clone(),
        branches,
        certified_bound,
        claimed_bound,
        outcome,
        infeasible_r_max,
    };
    verify_certificate(s, &cert)?;
    Ok(cert)
}

fn fail(s: &Scenario, what: String) -> Error {
    Error::VerificationFailure {
        scenario: s.id.clone(),
        inequality: what,
    }
}

/// Rechecks a certificate against the raw scenario, using only the recorded
/// parameter values and direct inequality comparisons.
pub fn verify_certificate(s: &Scenario, cert: &Certificate) -> Result<()> {
    if cert.scenario_id != s.id {
        return Err(fail(s, "certificate belongs to another scenario".into()));
    }
    let (probe, roles): (Option<&Probe>, Vec<(&str, &Branch)>) = match &s.plan {
        Plan::Direct(b) => (None, vec![("direct", b)]),
        Plan::Dichotomy {
            probe,
            same_pencil: Some(a),
            different_pencil: Some(d),
        } => (Some(probe), vec![("same_pencil", a), ("different_pencil", d)]),
        Plan::Dichotomy { .. } => return Err(s.invalid("dichotomy is missing a branch")),
    };
    if cert.branches.len() != roles.len() {
        return Err(fail(s, "branch count differs from the plan".into()));
    }
    let (pts, _) = points(s)?;
    for ((name, b), res) in roles.iter().zip(&cert.branches) {
        if res.branch != *name {
            return Err(fail(s, format!("expected branch {name}, found {}", res.branch)));
        }
        if res.evaluations.len() != pts.len()
            || pts
                .iter()
                .zip(&res.evaluations)
                .any(|(p, e)| p.r_max != e.r_max || p.r_x != e.r_x || p.k3 != e.k3)
        {
            return Err(fail(s, format!("{name}: evaluations do not cover the hypotheses")));
        }
        for e in &res.evaluations {
            recheck_evaluation(s, b, name, probe, e)?;
        }
        let max = res.evaluations.iter().map(|e| e.bound).max().unwrap_or(0);
        if max != res.certified {
            return Err(fail(
                s,
                format!("{name}: certified bound is not the maximum over points"),
            ));
        }
    }
    Ok(())
}

fn recheck_evaluation(s: &Scenario, b: &Branch, name: &str, probe: Option<&Probe>, e: &Evaluation) -> Result<()> {
    let r = int(i64::from(e.r_max));
    // the point lies inside the hypotheses
    let basket = match &s.hypotheses {
        Hypotheses::Basket { basket, p1 } => {
            let k3 = FanoNumerics::new(basket.clone(), *p1).deg_k3();
            if e.k3 != k3 || e.r_x != basket.cartier_index() || Some(e.r_max) != basket.r_max().ok() {
                return Err(fail(s, format!("{name}: point differs from the basket invariants")));
            }
            Some((basket, *p1))
        }
        Hypotheses::Bounds { k3_lower, r_x, r_max } => {
            let in_range = (r_max.0..=r_max.1).contains(&e.r_max);
            let rx_ok = match r_x {
                CartierFact::Exact(x) => e.r_x == *x,
                CartierFact::AtMost(x) => e.r_x <= *x && e.r_x >= lcm_upto(e.r_max).min(*x),
            };
            if !in_range || !rx_ok || &e.k3 < k3_lower || e.k3 > refine_k3_lower(k3_lower, e.r_x) {
                return Err(fail(
                    s,
                    format!("{name}: point r_max={} r_X={} outside the hypotheses", e.r_max, e.r_x),
                ));
            }
            None
        }
    };
    let m1 = int(i64::from(e.m1));
    // m1: the non-pencil statement at m1
    match (name, &b.m1) {
        ("different_pencil", _) => {
            if Some(e.m1) != probe.map(|p| p.k) {
                return Err(fail(s, format!("{name}: m1 must be the probe index")));
            }
        }
        (_, Some(M1Rule::Np2 { t, variant })) => {
            let extra = match variant {
                Np2Variant::CartierIndex => int(6) * int(e.r_x as i64),
                Np2Variant::Degree => int(72) / &e.k3,
            };
            let radicand = int(12) / (t * &e.k3) + extra + rational::ratio(1, 16);
            let ok = m1 >= *t && int(3) * &m1 >= &r * t && cmp_exceeds_sqrt(&m1, &rational::ratio(-3, 4), &radicand);
            if !ok {
                return Err(fail(s, format!("{name}: np2 conditions fail at m1 = {}", e.m1)));
            }
        }
        (_, Some(M1Rule::Fixed(n))) => {
            if e.m1 != *n {
                return Err(fail(s, format!("{name}: m1 differs from the fixed value")));
            }
        }
        (_, Some(M1Rule::Np1Equality(m))) | (_, Some(M1Rule::Np1(m))) => {
            let (basket, p1) = basket.ok_or_else(|| s.invalid("np1 rule needs a basket"))?;
            let p = Rational::from_integer(exact_plurigenus(basket, p1, *m)?);
            let rhs = int(e.r_x as i64) * &e.k3 * int(i64::from(*m)) + int(1);
            let ok = match b.m1 {
                Some(M1Rule::Np1Equality(_)) => p == rhs && int(e.r_x as i64) * &e.k3 != int(1),
                _ => p > rhs,
            };
            if !ok || e.m1 != *m {
                return Err(fail(s, format!("{name}: np1 condition fails at {m}")));
            }
        }
        (_, None) => return Err(s.invalid("missing m1 rule")),
    }
    if e.m1 < s.m0 {
        return Err(fail(s, format!("{name}: m1 below m0")));
    }
    // mu0': the same-pencil bound through the plurigenus estimate
    let expect_mu = match (name, probe) {
        ("same_pencil", Some(p)) => {
            let k = int(i64::from(p.k));
            match basket {
                Some((basket, p1)) => {
                    let pk = Rational::from_integer(exact_plurigenus(basket, p1, p.k)?);
                    if &pk - int(1) <= &k / &p.l {
                        return Err(fail(s, format!("{name}: P_-{} - 1 <= {} / l", p.k, p.k)));
                    }
                    RationalBound::exact(&k / (pk - int(1)))
                }
                None => {
                    let lower = plurigenus_lower_bound(p.k, &p.t, &e.k3);
                    let ok = k >= p.t && int(3) * &k >= &r * &p.t && lower - int(1) > &k / &p.l;
                    if !ok {
                        return Err(fail(s, format!("{name}: P_-{} - 1 > {} / l not established", p.k, p.k)));
                    }
                    RationalBound::below(p.l.clone())
                }
            }
        }
        _ => RationalBound::exact(int(i64::from(s.m0))),
    };
    if e.mu0 != expect_mu {
        return Err(fail(
            s,
            format!("{name}: recorded mu0' {} differs from {}", e.mu0, expect_mu),
        ));
    }
    // N0
    let span = u64::from(e.m1) * u64::from(s.nu0()) * u64::from(e.r_max);
    let n0_ok = match b.n0 {
        N0Rule::One => e.n0 == 1,
        N0Rule::Lemma => e.n0 >= 1 && e.n0 * span >= e.r_x && (e.n0 == 1 || (e.n0 - 1) * span < e.r_x),
    };
    if !n0_ok {
        return Err(fail(s, format!("{name}: N0 = {} not justified", e.n0)));
    }
    // the criterion at the recorded bound
    let params = CriterionParams::new(s.m0, e.m1, e.mu0.clone(), s.nu0(), e.r_max, e.r_x, e.n0)?;
    let spec = criterion_spec(s, &b.criterion, &params)?;
    if !spec.holds_at(&BigInt::from(e.bound)) {
        return Err(fail(s, format!("{name}: criterion fails at m = {}", e.bound)));
    }
    if e.bound > b.claimed {
        return Err(fail(
            s,
            format!("{name}: certified {} above claimed {}", e.bound, b.claimed),
        ));
    }
    if e.k3 <= Rational::zero() {
        return Err(fail(s, format!("{name}: nonpositive degree")));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TheoremSummary {
    pub id: String,
    pub claimed: u64,
    pub certified: u64,
    pub outcome: Outcome,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub setting: Setting,
    pub global_bound: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub claimed_global: Option<u64>,
    pub ok: bool,
    pub theorems: Vec<TheoremSummary>,
    pub improvements: Vec<String>,
    pub certificates: Vec<Certificate>,
}

/// Certifies every scenario that applies to `setting`.
pub fn replay_ledger(ledger: &Ledger, setting: Setting) -> Result<Report> {
    ledger.validate()?;
    let scenarios: Vec<&Scenario> = ledger.scenarios_for(setting).collect();
    if scenarios.is_empty() {
        return Err(Error::InvalidConstraints(format!(
            "no scenarios for setting {}",
            setting.name()
        )));
    }
    let mut certificates = scenarios
        .par_iter()
        .map(|s| certify_scenario(s))
        .collect::<Result<Vec<_>>>()?;
    certificates.sort_by(|a, b| a.scenario_id.cmp(&b.scenario_id));
    let theorems: Vec<TheoremSummary> = ledger
        .theorems
        .iter()
        .filter_map(|t| {
            let certified = certificates
                .iter()
                .filter(|c| c.theorem == t.id)
                .map(|c| c.certified_bound)
                .max()?;
            Some(TheoremSummary {
                id: t.id.clone(),
                claimed: t.claimed_bound,
                certified,
                outcome: Outcome::compare(certified, t.claimed_bound),
            })
        })
        .collect();
    let global_bound = certificates.iter().map(|c| c.certified_bound).max().unwrap_or(0);
    let claimed_global = ledger
        .global
        .iter()
        .find(|g| g.setting == setting)
        .map(|g| g.claimed_bound);
    let improvements = certificates
        .iter()
        .filter(|c| c.outcome == Outcome::Improvement)
        .map(|c| c.scenario_id.clone())
        .collect();
    let ok = certificates.iter().all(|c| c.outcome != Outcome::Exceeds)
        && theorems.iter().all(|t| t.outcome != Outcome::Exceeds)
        && claimed_global.is_none_or(|g| global_bound <= g);
    Ok(Report {
        setting,
        global_bound,
        claimed_global,
        ok,
        theorems,
        improvements,
        certificates,
    })
}
