// SPDX-License-Identifier: MIT OR Apache-2.0

//! Distances between sets of change points, measured in index units.
//!
//! These only see break locations, never the levels between breaks, which
//! makes them discontinuous under small deformations of a series.

use crate::error::{Error, Result};

fn point_to_set(x: usize, set: &[usize]) -> f64 {
    set.iter().map(|&s| x.abs_diff(s)).min().expect("nonempty set") as f64
}

fn check(s: &[usize], t: &[usize]) -> Result<()> {
    if s.is_empty() || t.is_empty() {
        return Err(Error::EmptySet);
    }
    Ok(())
}

fn directed_max(from: &[usize], to: &[usize]) -> f64 {
    from.iter().map(|&x| point_to_set(x, to)).fold(0.0, f64::max)
}

fn directed_mean_pow(from: &[usize], to: &[usize], p: f64) -> f64 {
    from.iter().map(|&x| point_to_set(x, to).powf(p)).sum::<f64>() / from.len() as f64
}

/// `max(max_s d(s, T), max_t d(t, S))`.
pub fn hausdorff(s: &[usize], t: &[usize]) -> Result<f64> {
    check(s, t)?;
    Ok(directed_max(s, t).max(directed_max(t, s)))
}

/// `max(mean_s d(s, T), mean_t d(t, S))`.
pub fn modified_hausdorff(s: &[usize], t: &[usize]) -> Result<f64> {
    check(s, t)?;
    Ok(directed_mean_pow(s, t, 1.0).max(directed_mean_pow(t, s, 1.0)))
}

/// `(sum_t d(t,S)^p / 2|T| + sum_s d(s,T)^p / 2|S|)^(1/p)`.
pub fn mj_semi_metric(s: &[usize], t: &[usize], p: f64) -> Result<f64> {
    check(s, t)?;
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::InvalidParams(format!("MJ exponent must be finite and >= 1, got {p}")));
    }
    let total = 0.5 * directed_mean_pow(t, s, p) + 0.5 * directed_mean_pow(s, t, p);
    Ok(total.powf(1.0 / p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn hausdorff_examples() {
        assert_eq!(hausdorff(&[3, 8], &[3, 8]).unwrap(), 0.0);
        assert_eq!(hausdorff(&[0, 10], &[0]).unwrap(), 10.0);
        assert_eq!(hausdorff(&[2, 5], &[3, 9]).unwrap(), 4.0);
    }

    #[test]
    fn modified_hausdorff_examples() {
        assert_eq!(modified_hausdorff(&[4, 9], &[4, 9]).unwrap(), 0.0);
        assert_eq!(modified_hausdorff(&[0, 10], &[0]).unwrap(), 5.0);
    }

    #[test]
    fn mj_examples() {
        assert_eq!(mj_semi_metric(&[4, 9], &[4, 9], 1.0).unwrap(), 0.0);
        assert_eq!(mj_semi_metric(&[0, 10], &[0], 1.0).unwrap(), 2.5);
        // both directed averages equal to 2: MJ = (1 + 1) = MH
        assert_eq!(mj_semi_metric(&[0], &[2], 1.0).unwrap(), modified_hausdorff(&[0], &[2]).unwrap());
        assert!(mj_semi_metric(&[0], &[2], 0.5).is_err());
    }

    #[test]
    fn empty_sets_rejected() {
        assert!(matches!(hausdorff(&[], &[1]), Err(Error::EmptySet)));
        assert!(matches!(modified_hausdorff(&[1], &[]), Err(Error::EmptySet)));
        assert!(matches!(mj_semi_metric(&[], &[], 1.0), Err(Error::EmptySet)));
    }

    fn set() -> impl Strategy<Value = Vec<usize>> {
        proptest::collection::btree_set(0usize..200, 1..8).prop_map(|s| s.into_iter().collect())
    }

    proptest! {
        #[test]
        fn symmetric_and_zero_iff_equal(s in set(), t in set()) {
            type SetMetric = fn(&[usize], &[usize]) -> f64;
            let fs: [SetMetric; 3] = [
                |a, b| hausdorff(a, b).unwrap(),
                |a, b| modified_hausdorff(a, b).unwrap(),
                |a, b| mj_semi_metric(a, b, 1.0).unwrap(),
            ];
            for f in fs {
                prop_assert_eq!(f(&s, &t), f(&t, &s));
                prop_assert_eq!(f(&s, &t) == 0.0, s == t);
                prop_assert!(f(&s, &t) >= 0.0);
            }
        }
    }
}
