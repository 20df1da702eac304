//! Closed-form upper bounds on the number of connected components.

use serde::Serialize;

use crate::gale::s_bound;

/// Distance to the nearest integer below which a floor is flagged.
const FLOOR_GUARD: f64 = 1e-9;

/// `floor(x)` as an integer, saturating, together with a flag set when `x`
/// sits within the guard band of an integer.
pub fn guarded_floor(x: f64) -> (u128, bool) {
    let flagged = (x - x.round()).abs() < FLOOR_GUARD * x.abs().max(1.0) && x.fract() != 0.0;
    let v = if x.is_nan() || x <= 0.0 {
        0
    } else if x >= u128::MAX as f64 {
        u128::MAX
    } else {
        x.floor() as u128
    };
    (v, flagged)
}

/// `(n+k)(n+k-1)/2`.
pub fn outer_chamber_bound(n: u64, k: u64) -> u128 {
    let t = (n + k) as u128;
    t * (t.saturating_sub(1)) / 2
}

/// `2^((k-2)(k-3)/2) (n+2)^(k-2)` for `k >= 2`, saturating.
fn theorem1_term(n: u64, k: u64) -> u128 {
    let e = (k - 2) * (k - 3) / 2;
    if e >= 128 {
        return u128::MAX;
    }
    let base = n as u128 + 2;
    let mut acc: u128 = 1u128 << e;
    for _ in 0..k - 2 {
        acc = acc.saturating_mul(base);
    }
    acc
}

/// Upper bound on `N(g)` for an `n`-variate `(n+k)`-sum.
pub fn theorem1_bound(n: u64, k: u64) -> u128 {
    match (n, k) {
        (_, 0) => 0,
        (1, k) => k as u128,
        (_, 1) => 1,
        (_, 2) => 2,
        (n, 3) => {
            let n = n as u128;
            (n + 3) * (n + 2) / 2 + (n + 5) / 2
        }
        (n, k) => outer_chamber_bound(n, k).saturating_add(theorem1_term(n, k)),
    }
}

/// `(simplicial, general)` refinements from the proof, for `n >= 2`, `k >= 3`.
pub fn refined_bounds(n: u64, k: u64) -> (u128, u128) {
    let outer = outer_chamber_bound(n, k);
    let main = s_bound(n + 2, k as i64 - 2);
    let side = s_bound(n + 1, k as i64 - 4);
    let simplicial = outer.saturating_add(guarded_floor(main / 2.0).0);
    let general = outer.saturating_add(guarded_floor((main + side) / 2.0).0);
    (simplicial, general)
}

/// `T(n,k) = (S(n+2,k-2) + S(n+1,k-5) + .. + S(n+2-M, k-2-3M) + M) / 2` with
/// `M = min(n+1, floor((k-2)/3))`.
pub fn t_bound(n: u64, k: u64) -> f64 {
    let m = (n + 1).min(k.saturating_sub(2) / 3);
    let sum: f64 = (0..=m).map(|i| s_bound(n + 2 - i, k as i64 - 2 - 3 * i as i64)).sum();
    (sum + m as f64) / 2.0
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub n: u64,
    pub k: u64,
    pub theorem1: u128,
    pub theorem1_k3: Option<u128>,
    pub outer: u128,
    pub simplicial_refined: Option<u128>,
    pub general_refined: Option<u128>,
    pub t_bound: Option<f64>,
    /// Some floor landed within the guard band of an integer.
    pub flagged: bool,
}

impl BoundReport {
    pub fn new(n: u64, k: u64) -> Self {
        let refined = (n >= 2 && k >= 3).then(|| refined_bounds(n, k));
        let flagged = n >= 2
            && k >= 3
            && [
                s_bound(n + 2, k as i64 - 2) / 2.0,
                (s_bound(n + 2, k as i64 - 2) + s_bound(n + 1, k as i64 - 4)) / 2.0,
            ]
            .iter()
            .any(|&x| guarded_floor(x).1);
        Self {
            n,
            k,
            theorem1: theorem1_bound(n, k),
            theorem1_k3: (k == 3).then(|| theorem1_bound(n, 3)),
            outer: outer_chamber_bound(n, k),
            simplicial_refined: refined.map(|r| r.0),
            general_refined: refined.map(|r| r.1),
            t_bound: (n >= 2 && k >= 4).then(|| t_bound(n, k)),
            flagged,
        }
    }
}

/// Reports for every `1 <= n <= n_max`, `1 <= k <= k_max`.
pub fn bound_table(n_max: u64, k_max: u64) -> Vec<BoundReport> {
    (1..=n_max)
        .flat_map(|n| (1..=k_max).map(move |k| BoundReport::new(n, k)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worked_values() {
        assert_eq!(theorem1_bound(2, 3), 13);
        assert_eq!(theorem1_bound(1, 7), 7);
        assert_eq!(theorem1_bound(5, 2), 2);
        assert_eq!(theorem1_bound(5, 1), 1);
        assert_eq!(outer_chamber_bound(2, 3), 10);
        assert_eq!(outer_chamber_bound(1, 1), 1);
        assert_eq!(outer_chamber_bound(3, 4), 21);
        assert_eq!(refined_bounds(2, 3).0, 12);
        assert_eq!(refined_bounds(2, 4).1, 57);
        assert!((t_bound(2, 4) - s_bound(4, 2) / 2.0).abs() < 1e-12);
        assert!((t_bound(2, 4) - 41.556).abs() < 1e-3);
        assert!((t_bound(2, 5) - (s_bound(4, 3) + 1.0 + 1.0) / 2.0).abs() < 1e-9);
    }

    #[test]
    fn general_formula_for_k_at_least_four() {
        // 15 + 2^1 * 4^2
        assert_eq!(theorem1_bound(2, 4), 47);
        // 21 + 2^3 * 4^3
        assert_eq!(theorem1_bound(2, 5), 21 + 512);
        assert_eq!(theorem1_bound(3, 40), u128::MAX);
    }

    #[test]
    fn k3_formula_is_sharper() {
        for n in 2..=50u64 {
            let general = outer_chamber_bound(n, 3) + theorem1_term(n, 3);
            assert!(theorem1_bound(n, 3) <= general);
        }
    }

    #[test]
    fn orderings() {
        for n in 2..=10 {
            for k in 3..=10 {
                let (s, g) = refined_bounds(n, k);
                assert!(outer_chamber_bound(n, k) <= s && s <= g);
            }
        }
        for n in 2..=6 {
            for k in 4..=10 {
                let rhs = (s_bound(n + 2, k as i64 - 2) + s_bound(n + 1, k as i64 - 4)) / 2.0;
                assert!(t_bound(n, k) <= rhs);
            }
        }
    }

    #[test]
    fn refined_exceeds_theorem1_from_k4() {
        // (e^2+3)/8 > 1, so half of S(n+2,k-2) already exceeds the Theorem 1
        // term for every k >= 4; for k = 3 the refinement is below it.
        for n in 2..=20 {
            assert!(refined_bounds(n, 3).0 <= theorem1_bound(n, 3));
            for k in 4..=10 {
                let (s, g) = refined_bounds(n, k);
                assert!(s > theorem1_bound(n, k));
                assert!(g > theorem1_bound(n, k));
            }
        }
    }

    #[test]
    fn monotone_in_n() {
        for k in 3..=8 {
            for n in 2..30 {
                assert!(theorem1_bound(n, k) <= theorem1_bound(n + 1, k));
                let (a, b) = refined_bounds(n, k);
                let (c, d) = refined_bounds(n + 1, k);
                assert!(a <= c && b <= d);
            }
        }
    }

    #[test]
    fn guard_band() {
        assert_eq!(guarded_floor(2.5), (2, false));
        assert_eq!(guarded_floor(3.0 - 1e-12), (2, true));
        assert_eq!(guarded_floor(3.0), (3, false));
    }
}
