//! Shared inputs for the benchmarks.

use std::path::PathBuf;

use fanocalc_core::{Basket, Ledger};

pub fn example_basket() -> Basket {
    Basket::of(&[(1, 2), (1, 2), (2, 5), (3, 7), (4, 9)])
}

pub fn bundled_ledger() -> Ledger {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/ledger.json");
    let text = std::fs::read_to_string(&path).expect("bundled ledger");
    Ledger::from_json(&text).expect("valid ledger")
}
