//! Online policies. CMP and LRU use the fixed identity matching and decide
//! per cache; the rules-compliant policy matches jointly.

pub mod cmp;
pub mod lru;
pub mod rules;

use std::fmt;
use std::str::FromStr;

use crate::error::Error;

pub use cmp::{cmp_init, cmp_step, CmpPolicy};
pub use lru::{lru_step, LruPolicy};
pub use rules::{rules_compliant_matching, rules_compliant_step, RulesCompliantPolicy};

/// Policy names accepted by the harness.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum PolicyKind {
    Cmp,
    Lru,
    RulesCompliant,
}

impl FromStr for PolicyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "cmp" => Ok(PolicyKind::Cmp),
            "lru" => Ok(PolicyKind::Lru),
            "rules_compliant" => Ok(PolicyKind::RulesCompliant),
            other => Err(Error::Config(format!(
                "unknown policy '{other}' (expected cmp, lru or rules_compliant)"
            ))),
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PolicyKind::Cmp => "cmp",
            PolicyKind::Lru => "lru",
            PolicyKind::RulesCompliant => "rules_compliant",
        })
    }
}
