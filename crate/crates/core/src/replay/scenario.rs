//! Ledger schema: one [`Scenario`] per proof case.

use serde::{Deserialize, Serialize};

use crate::basket::{Basket, FanoNumerics};
use crate::criteria::Np2Variant;
use crate::error::{Error, Result};
use crate::rational::{self, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Setting {
    /// terminal weak Q-Fano
    Weak,
    /// terminal Q-Fano
    Qfano,
}

impl Setting {
    pub const ALL: [Setting; 2] = [Setting::Weak, Setting::Qfano];

    pub fn name(self) -> &'static str {
        match self {
            Setting::Weak => "weak",
            Setting::Qfano => "qfano",
        }
    }
}

impl std::str::FromStr for Setting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "weak" => Ok(Setting::Weak),
            "qfano" => Ok(Setting::Qfano),
            _ => Err(Error::Parse {
                what: "setting",
                input: s.into(),
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CartierFact {
    Exact(u64),
    AtMost(u64),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Hypotheses {
    Basket {
        basket: Basket,
        p1: u32,
    },
    Bounds {
        #[serde(with = "rational::serde_str")]
        k3_lower: Rational,
        r_x: CartierFact,
        /// inclusive
        r_max: (u32, u32),
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum M1Rule {
    Np2 {
        #[serde(with = "rational::serde_str")]
        t: Rational,
        variant: Np2Variant,
    },
    Fixed(u32),
    /// `P_{-m} = r_X k3 m + 1` with `r_X k3 != 1`, which rules out a pencil on a Q-Fano.
    Np1Equality(u32),
    /// `P_{-m} > r_X k3 m + 1`.
    Np1(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum N0Rule {
    One,
    Lemma,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum CriterionRule {
    ThmBc(u8),
    Usage(u8),
    Bc2(#[serde(with = "rational::serde_str")] Rational),
}

impl CriterionRule {
    pub fn describe(&self) -> String {
        match self {
            CriterionRule::ThmBc(v) => format!("thm_bc({v})"),
            CriterionRule::Usage(v) => format!("usage({v})"),
            CriterionRule::Bc2(b) => format!("bc2(beta={})", rational::format(b)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Branch {
    /// Absent in the different-pencil branch, where `m1` is the probe index.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m1: Option<M1Rule>,
    #[serde(default = "default_n0")]
    pub n0: N0Rule,
    pub criterion: CriterionRule,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub claimed_m1: Option<u32>,
    pub claimed: u64,
}

fn default_n0() -> N0Rule {
    N0Rule::One
}

/// `P_{-k} - 1 > k / l`, established from `t` when no basket is known.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Probe {
    pub k: u32,
    #[serde(with = "rational::serde_str")]
    pub l: Rational,
    #[serde(with = "rational::serde_str")]
    pub t: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
#[allow(clippy::large_enum_variant)]
pub enum Plan {
    /// Single branch with `mu0' = m0`.
    Direct(Branch),
    Dichotomy {
        probe: Probe,
        #[serde(default)]
        same_pencil: Option<Branch>,
        #[serde(default)]
        different_pencil: Option<Branch>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub id: String,
    pub theorem: String,
    #[serde(default = "all_settings")]
    pub applies_to: Vec<Setting>,
    pub hypotheses: Hypotheses,
    pub m0: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu0: Option<u32>,
    pub plan: Plan,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

fn all_settings() -> Vec<Setting> {
    Setting::ALL.to_vec()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TheoremClaim {
    pub id: String,
    pub claimed_bound: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GlobalClaim {
    pub setting: Setting,
    pub claimed_bound: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Ledger {
    pub version: u32,
    pub theorems: Vec<TheoremClaim>,
    pub global: Vec<GlobalClaim>,
    pub scenarios: Vec<Scenario>,
}

impl Ledger {
    /// Parses a full ledger object, or a bare array of scenarios whose theorem
    /// claims are taken as the largest scenario claim per theorem.
    pub fn from_json(s: &str) -> Result<Self> {
        let parse_err = |e: serde_json::Error| Error::Parse {
            what: "ledger",
            input: e.to_string(),
        };
        let value: serde_json::Value = serde_json::from_str(s).map_err(parse_err)?;
        let ledger = if value.is_array() {
            Self::from_scenarios(serde_json::from_value(value).map_err(parse_err)?)
        } else {
            serde_json::from_value(value).map_err(parse_err)?
        };
        ledger.validate()?;
        Ok(ledger)
    }

    pub fn from_scenarios(scenarios: Vec<Scenario>) -> Self {
        let mut claims: std::collections::BTreeMap<String, u64> = std::collections::BTreeMap::new();
        for s in &scenarios {
            let c = claims.entry(s.theorem.clone()).or_default();
            *c = (*c).max(s.claimed_bound());
        }
        Ledger {
            version: 1,
            theorems: claims
                .into_iter()
                .map(|(id, claimed_bound)| TheoremClaim { id, claimed_bound })
                .collect(),
            global: Vec::new(),
            scenarios,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let mut ids = std::collections::BTreeSet::new();
        for s in &self.scenarios {
            if !ids.insert(s.id.as_str()) {
                return Err(s.invalid("duplicate scenario id"));
            }
            if !self.theorems.iter().any(|t| t.id == s.theorem) {
                return Err(s.invalid(&format!("unknown theorem {}", s.theorem)));
            }
            s.validate()?;
        }
        Ok(())
    }

    pub fn scenarios_for(&self, setting: Setting) -> impl Iterator<Item = &Scenario> {
        self.scenarios.iter().filter(move |s| s.applies_to.contains(&setting))
    }
}

impl Scenario {
    /// Largest claimed bound over the branches of the plan.
    pub fn claimed_bound(&self) -> u64 {
        match &self.plan {
            Plan::Direct(b) => b.claimed,
            Plan::Dichotomy {
                same_pencil,
                different_pencil,
                ..
            } => [same_pencil, different_pencil]
                .into_iter()
                .flatten()
                .map(|b| b.claimed)
                .max()
                .unwrap_or(0),
        }
    }

    pub fn nu0(&self) -> u32 {
        self.nu0.unwrap_or(self.m0)
    }

    pub(crate) fn invalid(&self, reason: &str) -> Error {
        Error::InvalidScenario {
            id: self.id.clone(),
            reason: reason.to_string(),
        }
    }

    pub fn exact_r_x(&self) -> Option<u64> {
        match &self.hypotheses {
            Hypotheses::Basket { basket, .. } => Some(basket.cartier_index()),
            Hypotheses::Bounds {
                r_x: CartierFact::Exact(r),
                ..
            } => Some(*r),
            Hypotheses::Bounds { .. } => None,
        }
    }

    /// Structural checks plus the plurigenus facts that make `m0`, `nu0` legitimate.
    pub fn validate(&self) -> Result<()> {
        if self.applies_to.is_empty() {
            return Err(self.invalid("applies_to is empty"));
        }
        if self.m0 == 0 || self.nu0() == 0 {
            return Err(self.invalid("m0 and nu0 must be positive"));
        }
        match &self.hypotheses {
            Hypotheses::Basket { basket, p1 } => {
                if basket.is_empty() {
                    return Err(self.invalid("basket hypotheses need a nonempty basket"));
                }
                let fano = FanoNumerics::new(basket.clone(), *p1);
                if fano.deg_k3() <= Rational::from_integer(0.into()) {
                    return Err(self.invalid("basket has -K^3 <= 0"));
                }
                let p_m0 = fano.anti_plurigenus(self.m0)?;
                if p_m0 < 2.into() {
                    return Err(self.invalid(&format!("P_-{} = {p_m0} < 2", self.m0)));
                }
                let p_nu = fano.anti_plurigenus(self.nu0())?;
                if p_nu < 1.into() {
                    return Err(self.invalid(&format!("P_-{} = {p_nu} < 1", self.nu0())));
                }
            }
            Hypotheses::Bounds { k3_lower, r_max, .. } => {
                if k3_lower <= &Rational::from_integer(0.into()) {
                    return Err(self.invalid("k3_lower must be positive"));
                }
                if r_max.0 == 0 || r_max.0 > r_max.1 {
                    return Err(self.invalid("empty r_max range"));
                }
            }
        }
        match &self.plan {
            Plan::Direct(b) => self.validate_branch(b, false, "direct"),
            Plan::Dichotomy {
                probe,
                same_pencil,
                different_pencil,
            } => {
                let same = same_pencil
                    .as_ref()
                    .ok_or_else(|| self.invalid("dichotomy lacks its same-pencil branch"))?;
                let diff = different_pencil
                    .as_ref()
                    .ok_or_else(|| self.invalid("dichotomy lacks its different-pencil branch"))?;
                if probe.k < self.m0 {
                    return Err(self.invalid("probe index below m0"));
                }
                if probe.l <= Rational::from_integer(0.into()) || probe.t <= Rational::from_integer(0.into()) {
                    return Err(self.invalid("probe l and t must be positive"));
                }
                self.validate_branch(same, false, "same_pencil")?;
                self.validate_branch(diff, true, "different_pencil")
            }
        }
    }

    fn validate_branch(&self, b: &Branch, probe_m1: bool, name: &str) -> Result<()> {
        match (&b.m1, probe_m1) {
            (Some(_), true) => return Err(self.invalid(&format!("{name}: m1 is the probe index here"))),
            (None, false) => return Err(self.invalid(&format!("{name}: missing m1 rule"))),
            _ => {}
        }
        let basket_only = matches!(b.m1, Some(M1Rule::Np1Equality(_) | M1Rule::Np1(_)));
        if basket_only && !matches!(self.hypotheses, Hypotheses::Basket { .. }) {
            return Err(self.invalid(&format!("{name}: np1 rules need an exact basket")));
        }
        if matches!(b.m1, Some(M1Rule::Np1Equality(_))) && self.applies_to != [Setting::Qfano] {
            return Err(self.invalid(&format!("{name}: the np1 equality rule only holds for Q-Fano")));
        }
        if b.n0 == N0Rule::Lemma && self.exact_r_x().is_none() {
            return Err(self.invalid(&format!("{name}: the N0 lemma needs an exact r_X")));
        }
        match b.criterion {
            CriterionRule::ThmBc(1..=3) | CriterionRule::Usage(1..=2) | CriterionRule::Bc2(_) => Ok(()),
            _ => Err(self.invalid(&format!("{name}: unknown criterion variant"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const CASE0: &str = r#"{"id":"case0","theorem":"case0","hypotheses":{"kind":"bounds","k3_lower":"47/840","r_x":{"exact":840},"r_max":[8,8]},"m0":8,"nu0":1,"plan":{"dichotomy":{"probe":{"k":12,"l":"1","t":"9/2"},"same_pencil":{"m1":{"np2":{"t":"27/2","variant":2}},"n0":"lemma","criterion":{"usage":1},"claimed":48},"different_pencil":{"criterion":{"thm_bc":3},"claimed":36}}}}"#;

    fn case0() -> Scenario {
        serde_json::from_str(CASE0).unwrap()
    }

    #[test]
    fn parses_and_validates() {
        let s = case0();
        s.validate().unwrap();
        assert_eq!(s.nu0(), 1);
        assert_eq!(s.exact_r_x(), Some(840));
        assert_eq!(s.claimed_bound(), 48);
        assert_eq!(s.applies_to, Setting::ALL.to_vec());
    }

    #[test]
    fn either_branch_missing_is_rejected() {
        for drop_same in [true, false] {
            let mut s = case0();
            if let Plan::Dichotomy {
                same_pencil,
                different_pencil,
                ..
            } = &mut s.plan
            {
                if drop_same {
                    *same_pencil = None;
                } else {
                    *different_pencil = None;
                }
            }
            assert!(matches!(s.validate(), Err(Error::InvalidScenario { .. })));
        }
    }

    #[test]
    fn lemma_needs_exact_cartier_index() {
        let text = CASE0.replace(r#"{"exact":840}"#, r#"{"at_most":840}"#);
        let s: Scenario = serde_json::from_str(&text).unwrap();
        assert!(s.validate().is_err());
    }

    #[test]
    fn basket_must_support_m0() {
        let text = r#"{"id":"x","theorem":"t","hypotheses":{"kind":"basket","basket":[[1,2],[1,2],[10,21]],"p1":0},"m0":2,"plan":{"direct":{"m1":{"fixed":20},"criterion":{"thm_bc":1},"claimed":60}}}"#;
        let s: Scenario = serde_json::from_str(text).unwrap();
        s.validate().unwrap();
        // P_{-1} = 0 cannot serve as m0.
        let s: Scenario = serde_json::from_str(&text.replace(r#""m0":2"#, r#""m0":1"#)).unwrap();
        assert!(matches!(s.validate(), Err(Error::InvalidScenario { .. })));
    }

    #[test]
    fn np1_equality_only_for_qfano() {
        let text = r#"{"id":"x","theorem":"t","hypotheses":{"kind":"basket","basket":[[1,2],[1,3],[1,3],[8,17]],"p1":0},"m0":4,"plan":{"direct":{"m1":{"np1_equality":24},"criterion":{"thm_bc":2},"claimed":58}}}"#;
        let s: Scenario = serde_json::from_str(text).unwrap();
        assert!(s.validate().is_err());
        let qf = text.replace(r#""theorem":"t","#, r#""theorem":"t","applies_to":["qfano"],"#);
        let s: Scenario = serde_json::from_str(&qf).unwrap();
        s.validate().unwrap();
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let text = CASE0.replace(r#""m0":8"#, r#""m0":8,"bogus":1"#);
        assert!(serde_json::from_str::<Scenario>(&text).is_err());
    }

    #[test]
    fn bare_array_ledger() {
        let l = Ledger::from_json(&format!("[{CASE0}]")).unwrap();
        assert_eq!(
            l.theorems,
            vec![TheoremClaim {
                id: "case0".into(),
                claimed_bound: 48
            }]
        );
        assert!(l.global.is_empty());
    }

    #[test]
    fn duplicate_ids_are_rejected() {
        assert!(Ledger::from_json(&format!("[{CASE0},{CASE0}]")).is_err());
    }

    #[test]
    fn setting_names() {
        for s in Setting::ALL {
            assert_eq!(s.name().parse::<Setting>().unwrap(), s);
        }
        assert!("fano".parse::<Setting>().is_err());
    }
}
