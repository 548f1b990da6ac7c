//! Size budgets for exhaustive searches.
//!
//! Every enumeration in this crate either completes or refuses with a
//! [`GuardError`]; nothing is silently truncated.

use thiserror::Error;

/// Environment variable overriding the enumeration budgets.
pub const GUARD_ENV: &str = "CHARRULE_GUARD_BUDGET";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Guard {
    /// Largest domain on which profile-pair loops run.
    pub max_pair_profiles: usize,
    /// Largest domain on which all `2^|P|` tables are enumerated.
    pub max_table_profiles: usize,
    /// Largest number of antichains an enumeration may produce.
    pub max_antichains: usize,
    /// Largest character image that may be materialized.
    pub max_image: usize,
    /// Largest number of tables a backtracking search may produce.
    pub max_scfs: usize,
}

impl Default for Guard {
    fn default() -> Self {
        Guard {
            max_pair_profiles: 4096,
            max_table_profiles: 20,
            max_antichains: 1_000_000,
            max_image: 1 << 20,
            max_scfs: 1_000_000,
        }
    }
}

impl Guard {
    /// Defaults, with the count budgets replaced by `CHARRULE_GUARD_BUDGET`
    /// when it parses as an integer.
    pub fn from_env() -> Self {
        let mut g = Guard::default();
        if let Some(budget) = std::env::var(GUARD_ENV)
            .ok()
            .and_then(|s| s.trim().parse::<usize>().ok())
        {
            g.max_antichains = budget;
            g.max_image = budget;
            g.max_scfs = budget;
        }
        g
    }

    pub fn check(&self, what: &'static str, required: u128, budget: usize) -> Result<(), GuardError> {
        if required > budget as u128 {
            Err(GuardError {
                what,
                required,
                budget: budget as u128,
            })
        } else {
            Ok(())
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{what} refused: needs at least {required}, budget is {budget}")]
pub struct GuardError {
    pub what: &'static str,
    pub required: u128,
    pub budget: u128,
}
