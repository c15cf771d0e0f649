//! Replay of the case analysis as data, and of the enumeration claims.

pub mod certificate;
pub mod claims;
pub mod scenario;

pub use certificate::{certify_scenario, replay_ledger, verify_certificate, Certificate, Outcome, Report};
pub use claims::{check_claims, ClaimFile, ClaimOutcome, ClaimsReport};
pub use scenario::{Ledger, Scenario, Setting};
