/// Probability that a random positive scores above a random negative, ties
/// counting one half. Exact: counts are accumulated as integers.
pub fn auc(scores_pos: &[f64], scores_neg: &[f64]) -> f64 {
    if scores_pos.is_empty() || scores_neg.is_empty() {
        return f64::NAN;
    }
    let mut neg = scores_neg.to_vec();
    neg.sort_by(f64::total_cmp);
    // twice the number of wins, so ties add 1 instead of 0.5
    let mut doubled: u128 = 0;
    for &p in scores_pos {
        let below = neg.partition_point(|&s| s < p);
        let not_above = neg.partition_point(|&s| s <= p);
        doubled += 2 * below as u128 + (not_above - below) as u128;
    }
    doubled as f64 / (2.0 * scores_pos.len() as f64 * scores_neg.len() as f64)
}

/// 1-based rank of the target among candidates. Candidates scoring equal to
/// the target are ranked ahead of it.
pub fn rank_of_target(target_score: f64, other_scores: &[f64]) -> usize {
    1 + other_scores.iter().filter(|&&s| s >= target_score).count()
}

pub fn hr_at_k(rank: usize, k: usize) -> f64 {
    debug_assert!(rank >= 1);
    if rank <= k {
        1.0
    } else {
        0.0
    }
}

/// Single-relevant-item nDCG: `1 / log2(rank + 1)` inside the cutoff.
pub fn ndcg_at_k(rank: usize, k: usize) -> f64 {
    debug_assert!(rank >= 1);
    if rank <= k {
        1.0 / ((rank + 1) as f64).log2()
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn auc_examples() {
        assert_eq!(auc(&[0.9, 0.8], &[0.1, 0.2, 0.3]), 1.0);
        assert_eq!(auc(&[0.1, 0.2], &[0.8, 0.9]), 0.0);
        assert_eq!(auc(&[0.5, 0.5, 0.5], &[0.5, 0.5]), 0.5);
        assert_eq!(auc(&[1.0, 2.0], &[1.0]), 0.75);
        assert!(auc(&[], &[1.0]).is_nan());
    }

    #[test]
    fn hr_and_ndcg() {
        assert_eq!(hr_at_k(1, 10), 1.0);
        assert_eq!(ndcg_at_k(1, 10), 1.0);
        assert_eq!(ndcg_at_k(3, 10), 0.5);
        assert_eq!(hr_at_k(11, 10), 0.0);
        assert_eq!(ndcg_at_k(11, 10), 0.0);
        assert_eq!(hr_at_k(10, 10), 1.0);
        for r in 1..30 {
            assert!(ndcg_at_k(r + 1, 10) <= ndcg_at_k(r, 10));
        }
    }

    #[test]
    fn rank_counts_ties_against_target() {
        assert_eq!(rank_of_target(1.0, &[0.0, 0.5]), 1);
        assert_eq!(rank_of_target(1.0, &[2.0, 0.5, 1.0]), 3);
    }
}
