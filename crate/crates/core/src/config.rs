use serde::{Deserialize, Serialize};

/// Work caps for the exhaustive routines.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Limits {
    /// Largest N accepted by a single Weyl sum evaluation.
    pub weyl_max_n: u64,
    /// Tuples enumerated by the mean-value counter (N^s).
    pub count_budget: u64,
    /// Evaluations for the polynomial minimizer.
    pub poly_budget: u64,
    /// Points of the punctured box for the additive-form minimizer.
    pub form_budget: u64,
    /// Candidate denominators scanned by recovery.
    pub recover_budget: u64,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            weyl_max_n: 10_000_000,
            count_budget: 100_000_000,
            poly_budget: 100_000_000,
            form_budget: 10_000_000,
            recover_budget: 100_000_000,
        }
    }
}

impl Limits {
    /// Same budget for every enumerative routine; the Weyl cap is unchanged.
    pub fn with_budget(budget: u64) -> Self {
        Limits {
            count_budget: budget,
            poly_budget: budget,
            form_budget: budget,
            recover_budget: budget,
            ..Limits::default()
        }
    }
}

/// Default working precision `k * ceil(log2 N) + 96` bits.
pub fn default_precision(k: u32, n: u64) -> u32 {
    let log = if n <= 1 { 0 } else { 64 - (n - 1).leading_zeros() };
    k.max(1) * log + 96
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precision_formula() {
        assert_eq!(default_precision(3, 1), 96);
        assert_eq!(default_precision(3, 2), 99);
        assert_eq!(default_precision(3, 343), 3 * 9 + 96);
        assert_eq!(default_precision(6, 10_000), 6 * 14 + 96);
        assert_eq!(default_precision(1, 1024), 106);
    }
}
