//! Shared configuration and verdict types for the law and compatibility checks.

use std::collections::BTreeMap;
use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::convex::default_p_grid;
use crate::rational::Rational;

pub const DEFAULT_SEED: u64 = 20_240_917;
pub const DEFAULT_BUDGET: usize = 500;
/// Tuples above which a finite carrier is sampled rather than enumerated.
pub const DEFAULT_EXHAUSTIVE_LIMIT: usize = 2_000_000;

#[derive(Clone, Debug)]
pub struct CheckConfig {
    pub seed: u64,
    /// Number of sampled instances for checks that cannot enumerate.
    pub budget: usize,
    pub grid: Vec<Rational>,
    pub exhaustive_limit: usize,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig {
            seed: DEFAULT_SEED,
            budget: DEFAULT_BUDGET,
            grid: default_p_grid(),
            exhaustive_limit: DEFAULT_EXHAUSTIVE_LIMIT,
        }
    }
}

impl CheckConfig {
    pub fn with_seed(seed: u64) -> Self {
        CheckConfig {
            seed,
            ..Default::default()
        }
    }

    pub fn with_budget(mut self, budget: usize) -> Self {
        self.budget = budget;
        self
    }

    /// Deterministic stream for one check; `salt` separates independent checks.
    pub fn rng(&self, salt: &str) -> ChaCha8Rng {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in salt.bytes() {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
        ChaCha8Rng::seed_from_u64(self.seed ^ h)
    }

    pub(crate) fn fits(&self, carrier: usize, arity: u32) -> bool {
        carrier
            .checked_pow(arity)
            .and_then(|n| n.checked_mul(self.grid.len()))
            .is_some_and(|n| n <= self.exhaustive_limit)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    /// No violation among the sampled instances.
    SampledPass,
    Fail,
    Rejected,
    NotApplicable,
}

impl Verdict {
    pub fn passed(self) -> bool {
        matches!(
            self,
            Verdict::Pass | Verdict::SampledPass | Verdict::NotApplicable
        )
    }

    pub fn from_search(violation_found: bool, exhaustive: bool) -> Self {
        match (violation_found, exhaustive) {
            (true, _) => Verdict::Fail,
            (false, true) => Verdict::Pass,
            (false, false) => Verdict::SampledPass,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::SampledPass => "sampled-pass",
            Verdict::Fail => "fail",
            Verdict::Rejected => "rejected",
            Verdict::NotApplicable => "not-applicable",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Named witness fields, values rendered as exact text (fractions, `inf`, labels).
pub type Witness = BTreeMap<String, String>;

pub fn witness<const N: usize>(fields: [(&str, String); N]) -> Witness {
    fields
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckResult {
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
}

impl CheckResult {
    pub fn pass(exhaustive: bool) -> Self {
        CheckResult {
            verdict: Verdict::from_search(false, exhaustive),
            witness: None,
        }
    }

    pub fn fail(witness: Witness) -> Self {
        CheckResult {
            verdict: Verdict::Fail,
            witness: Some(witness),
        }
    }

    pub fn not_applicable() -> Self {
        CheckResult {
            verdict: Verdict::NotApplicable,
            witness: None,
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict.passed()
    }
}
