//! Enumeration-backed claims, checked against the geography and packing engines.

use std::collections::BTreeSet;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basket::{Basket, FanoNumerics};
use crate::error::{Error, Result};
use crate::geography::{enumerate_baskets, min_positive_k3, BasketConstraints};
use crate::packing::{descendants, initial_counts};
use crate::rational::{self, Rational};

/// `-K^3` as listed: an exact value or just its sign.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DegreeEntry {
    Exact(Rational),
    Negative,
}

impl Serialize for DegreeEntry {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            DegreeEntry::Exact(q) => s.serialize_str(&rational::format(q)),
            DegreeEntry::Negative => s.serialize_str("negative"),
        }
    }
}

impl<'de> Deserialize<'de> for DegreeEntry {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        if s == "negative" {
            return Ok(DegreeEntry::Negative);
        }
        rational::parse(&s)
            .map(DegreeEntry::Exact)
            .map_err(serde::de::Error::custom)
    }
}

impl DegreeEntry {
    fn matches(&self, k3: &Rational) -> bool {
        match self {
            DegreeEntry::Exact(q) => q == k3,
            DegreeEntry::Negative => k3 < &Rational::from_integer(0.into()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpectedBasket {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub no: Option<u32>,
    pub basket: Basket,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k3: Option<DegreeEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasketList {
    /// `P_{-1}` used for the degree column.
    #[serde(default)]
    pub p1: u32,
    pub rows: Vec<ExpectedBasket>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ListSource {
    File { file: String },
    Inline(BasketList),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpectedCounts {
    pub n12: i64,
    pub n13: i64,
    /// `n14 + sigma5`
    pub n14_plus_sigma5: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ClaimKind {
    Enumerate {
        constraints: BasketConstraints,
        expected: ListSource,
    },
    Descendants {
        start: Basket,
        constraints: BasketConstraints,
        expected: ListSource,
    },
    /// Every descendant of each start basket, under the constraints, has `r_max <= max_r_max`.
    DescendantsRMax {
        starts: Vec<Basket>,
        constraints: BasketConstraints,
        max_r_max: u32,
    },
    MinPositiveK3 {
        constraints: BasketConstraints,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        exclude: Vec<Basket>,
        #[serde(with = "rational::serde_str")]
        expected_k3: Rational,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        witness: Option<Basket>,
    },
    InitialCounts {
        /// `P_{-1}, ..., P_{-4}`
        plurigenera: [i64; 4],
        expected: ExpectedCounts,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Claim {
    pub id: String,
    pub description: String,
    #[serde(flatten)]
    pub kind: ClaimKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClaimFile {
    pub version: u32,
    pub claims: Vec<Claim>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClaimOutcome {
    Exact,
    /// everything expected was found, plus more
    Superset,
    /// some expected baskets are missing and nothing extra was found
    Subset,
    Mismatch,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoundBasket {
    pub basket: Basket,
    #[serde(with = "rational::serde_opt", skip_serializing_if = "Option::is_none", default)]
    pub k3: Option<Rational>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClaimResult {
    pub id: String,
    pub description: String,
    pub outcome: ClaimOutcome,
    pub found: usize,
    pub expected: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub extra: Vec<FoundBasket>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub missing: Vec<Basket>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub details: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClaimsReport {
    pub ok: bool,
    pub results: Vec<ClaimResult>,
}

impl ClaimFile {
    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Parse {
            what: "claims",
            input: e.to_string(),
        })
    }

    /// Reads `claims.json` from `dir` and inlines every referenced list file.
    pub fn load(dir: &Path) -> Result<Self> {
        let read = |name: &str| {
            std::fs::read_to_string(dir.join(name)).map_err(|e| Error::Parse {
                what: "data file",
                input: format!("{}: {e}", dir.join(name).display()),
            })
        };
        let mut file = Self::from_json(&read("claims.json")?)?;
        for claim in &mut file.claims {
            let src = match &mut claim.kind {
                ClaimKind::Enumerate { expected, .. } | ClaimKind::Descendants { expected, .. } => expected,
                _ => continue,
            };
            if let ListSource::File { file } = src {
                let list: BasketList = serde_json::from_str(&read(file)?).map_err(|e| Error::Parse {
                    what: "basket list",
                    input: e.to_string(),
                })?;
                *src = ListSource::Inline(list);
            }
        }
        Ok(file)
    }
}

fn inline(src: &ListSource) -> Result<&BasketList> {
    match src {
        ListSource::Inline(l) => Ok(l),
        ListSource::File { file } => Err(Error::InvalidConstraints(format!("list file {file} was not loaded"))),
    }
}

fn compare_lists(claim: &Claim, found: Vec<Basket>, expected: &BasketList) -> ClaimResult {
    let want: BTreeSet<&Basket> = expected.rows.iter().map(|r| &r.basket).collect();
    let got: BTreeSet<&Basket> = found.iter().collect();
    let k3_of = |b: &Basket| FanoNumerics::new(b.clone(), expected.p1).deg_k3();
    let extra: Vec<FoundBasket> = got
        .difference(&want)
        .map(|b| FoundBasket {
            basket: (*b).clone(),
            k3: Some(k3_of(b)),
        })
        .collect();
    let missing: Vec<Basket> = want.difference(&got).map(|b| (*b).clone()).collect();
    let mut details = Vec::new();
    for row in &expected.rows {
        if let Some(k) = &row.k3 {
            let actual = k3_of(&row.basket);
            if !k.matches(&actual) {
                details.push(format!(
                    "{}: listed -K^3 {} but computed {}",
                    row.basket.pretty(),
                    match k {
                        DegreeEntry::Exact(q) => rational::format(q),
                        DegreeEntry::Negative => "negative".into(),
                    },
                    rational::format(&actual)
                ));
            }
        }
    }
    if want.len() != expected.rows.len() {
        details.push("expected list has duplicate baskets".into());
    }
    let outcome = if !details.is_empty() || (!extra.is_empty() && !missing.is_empty()) {
        ClaimOutcome::Mismatch
    } else if !extra.is_empty() {
        ClaimOutcome::Superset
    } else if !missing.is_empty() {
        ClaimOutcome::Subset
    } else {
        ClaimOutcome::Exact
    };
    ClaimResult {
        id: claim.id.clone(),
        description: claim.description.clone(),
        outcome,
        found: found.len(),
        expected: expected.rows.len(),
        extra,
        missing,
        details,
    }
}

fn simple(claim: &Claim, ok: bool, details: Vec<String>) -> ClaimResult {
    ClaimResult {
        id: claim.id.clone(),
        description: claim.description.clone(),
        outcome: if ok {
            ClaimOutcome::Exact
        } else {
            ClaimOutcome::Mismatch
        },
        found: 1,
        expected: 1,
        extra: Vec::new(),
        missing: Vec::new(),
        details,
    }
}

pub fn check_claim(claim: &Claim) -> Result<ClaimResult> {
    match &claim.kind {
        ClaimKind::Enumerate { constraints, expected } => {
            let found = enumerate_baskets(constraints)?;
            Ok(compare_lists(claim, found, inline(expected)?))
        }
        ClaimKind::Descendants {
            start,
            constraints,
            expected,
        } => {
            let found = descendants(start, constraints);
            Ok(compare_lists(claim, found, inline(expected)?))
        }
        ClaimKind::DescendantsRMax {
            starts,
            constraints,
            max_r_max,
        } => {
            let mut details = Vec::new();
            for s in starts {
                let worst = descendants(s, constraints)
                    .into_iter()
                    .filter_map(|b| b.r_max().ok().map(|r| (r, b)))
                    .max_by_key(|(r, _)| *r);
                if let Some((r, b)) = worst {
                    details.push(format!("{}: largest r_max {r} at {}", s.pretty(), b.pretty()));
                    if r > *max_r_max {
                        return Ok(simple(claim, false, details));
                    }
                }
            }
            Ok(simple(claim, true, details))
        }
        ClaimKind::MinPositiveK3 {
            constraints,
            exclude,
            expected_k3,
            witness,
        } => {
            let p1 = constraints
                .p1
                .ok_or_else(|| Error::InvalidConstraints("min_positive_k3 claim needs p1".into()))?;
            let result = if exclude.is_empty() {
                min_positive_k3(constraints).map(Some)
            } else {
                let mut c = constraints.clone();
                c.k3_positive = true;
                Ok(enumerate_baskets(&c)?
                    .into_iter()
                    .filter(|b| !exclude.contains(b))
                    .map(|b| (FanoNumerics::new(b.clone(), p1).deg_k3(), b))
                    .min())
            };
            let (ok, detail) = match result {
                Ok(Some((k3, b))) => {
                    let ok = &k3 == expected_k3 && witness.as_ref().is_none_or(|w| *w == b);
                    (ok, format!("minimum {} at {}", rational::format(&k3), b.pretty()))
                }
                Ok(None) | Err(Error::NoAdmissibleBasket) => (false, "no admissible basket".into()),
                Err(e) => return Err(e),
            };
            Ok(simple(claim, ok, vec![detail]))
        }
        ClaimKind::InitialCounts { plurigenera, expected } => {
            let [p1, p2, p3, p4] = *plurigenera;
            let c = initial_counts(p1, p2, p3, p4, 0);
            let got = (c.n12, c.n13, c.n14);
            let want = (expected.n12, expected.n13, expected.n14_plus_sigma5);
            Ok(simple(
                claim,
                got == want,
                vec![format!("n12 = {}, n13 = {}, n14 + sigma5 = {}", got.0, got.1, got.2)],
            ))
        }
    }
}

/// Checks every claim; the report is ordered as the claim file.
pub fn check_claims(file: &ClaimFile) -> Result<ClaimsReport> {
    let results = file.claims.par_iter().map(check_claim).collect::<Result<Vec<_>>>()?;
    Ok(ClaimsReport {
        ok: results.iter().all(|r| r.outcome == ClaimOutcome::Exact),
        results,
    })
}
