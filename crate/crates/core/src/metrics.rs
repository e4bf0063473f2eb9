//! Classification metrics and confidence intervals used by every report and
//! trajectory: accuracy, rank-statistic AUC, FPR@TPR / FNR@TNR operating
//! points, weighted precision/recall/F1, and Wilson score intervals.

use serde_json::{json, Value};

use crate::error::{Error, Result};

/// Fraction of predictions equal to gold.
pub fn accuracy(predicted: &[u32], gold: &[u32]) -> Result<f64> {
    if predicted.is_empty() {
        return Err(Error::InvalidArgument("accuracy of empty input".to_string()));
    }
    if predicted.len() != gold.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} predictions vs {} gold labels",
            predicted.len(),
            gold.len()
        )));
    }
    let correct = predicted.iter().zip(gold).filter(|(p, g)| p == g).count();
    Ok(correct as f64 / predicted.len() as f64)
}

fn check_binary_gold(scores: &[f64], gold: &[u32]) -> Result<(usize, usize)> {
    if scores.len() != gold.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} scores vs {} gold labels",
            scores.len(),
            gold.len()
        )));
    }
    let positives = gold.iter().filter(|&&g| g == 1).count();
    let negatives = gold.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(Error::SingleClassGold);
    }
    Ok((positives, negatives))
}

/// Probability that a uniformly random positive outscores a uniformly random
/// negative, with ties credited one half. Equals the area under the ROC
/// curve. Computed from average ranks, O(n log n).
pub fn auc(scores: &[f64], gold: &[u32]) -> Result<f64> {
    let (positives, negatives) = check_binary_gold(scores, gold)?;
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));

    // Sum of average ranks over positives (1-based ranks, ties averaged).
    let mut rank_sum_pos = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j < order.len() && scores[order[j]] == scores[order[i]] {
            j += 1;
        }
        let avg_rank = ((i + 1) + j) as f64 / 2.0;
        for &idx in &order[i..j] {
            if gold[idx] == 1 {
                rank_sum_pos += avg_rank;
            }
        }
        i = j;
    }
    let p = positives as f64;
    let u = rank_sum_pos - p * (p + 1.0) / 2.0;
    Ok(u / (p * negatives as f64))
}

/// False-positive rate at the highest threshold whose true-positive rate
/// reaches `tpr_target`. Candidate thresholds are the distinct observed
/// scores, swept descending; an item is called positive when its score is
/// at or above the threshold.
pub fn fpr_at_tpr(scores: &[f64], gold: &[u32], tpr_target: f64) -> Result<f64> {
    let (positives, negatives) = check_binary_gold(scores, gold)?;
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));

    let mut tp = 0usize;
    let mut fp = 0usize;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j < order.len() && scores[order[j]] == scores[order[i]] {
            if gold[order[j]] == 1 {
                tp += 1;
            } else {
                fp += 1;
            }
            j += 1;
        }
        // Threshold = this score: everything seen so far is called positive.
        if tp as f64 / positives as f64 >= tpr_target {
            return Ok(fp as f64 / negatives as f64);
        }
        i = j;
    }
    // The lowest score always yields TPR = 1, so the sweep cannot fall through
    // for any target <= 1.
    Ok(1.0)
}

/// False-negative rate at the lowest threshold whose true-negative rate
/// reaches `tnr_target`: the mirror construction of [`fpr_at_tpr`], sweeping
/// distinct scores ascending (plus a sentinel above the maximum, where
/// everything is called negative).
pub fn fnr_at_tnr(scores: &[f64], gold: &[u32], tnr_target: f64) -> Result<f64> {
    let (positives, negatives) = check_binary_gold(scores, gold)?;
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));

    // At threshold = score of group g, items strictly below are called
    // negative; the counters hold those.
    let mut tn = 0usize;
    let mut fn_ = 0usize;
    let mut i = 0;
    while i < order.len() {
        if tn as f64 / negatives as f64 >= tnr_target {
            return Ok(fn_ as f64 / positives as f64);
        }
        let mut j = i;
        while j < order.len() && scores[order[j]] == scores[order[i]] {
            if gold[order[j]] == 0 {
                tn += 1;
            } else {
                fn_ += 1;
            }
            j += 1;
        }
        i = j;
    }
    // Sentinel threshold above every score: all items called negative.
    Ok(1.0)
}

/// Per-class precision/recall/F1 averaged with weights equal to gold class
/// frequencies. Classes with an empty denominator contribute zero.
pub fn weighted_prf(predicted: &[u32], gold: &[u32], num_classes: usize) -> Result<(f64, f64, f64)> {
    if predicted.is_empty() {
        return Err(Error::InvalidArgument(
            "weighted_prf of empty input".to_string(),
        ));
    }
    if predicted.len() != gold.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} predictions vs {} gold labels",
            predicted.len(),
            gold.len()
        )));
    }
    let mut tp = vec![0usize; num_classes];
    let mut fp = vec![0usize; num_classes];
    let mut fn_ = vec![0usize; num_classes];
    for (&p, &g) in predicted.iter().zip(gold) {
        let (p, g) = (p as usize, g as usize);
        if p == g {
            tp[g] += 1;
        } else {
            fp[p] += 1;
            fn_[g] += 1;
        }
    }
    let n = gold.len() as f64;
    let mut precision = 0.0;
    let mut recall = 0.0;
    let mut f1 = 0.0;
    for c in 0..num_classes {
        let support = tp[c] + fn_[c];
        if support == 0 {
            continue;
        }
        let weight = support as f64 / n;
        let p_c = if tp[c] + fp[c] > 0 {
            tp[c] as f64 / (tp[c] + fp[c]) as f64
        } else {
            0.0
        };
        let r_c = tp[c] as f64 / support as f64;
        let f_c = if p_c + r_c > 0.0 {
            2.0 * p_c * r_c / (p_c + r_c)
        } else {
            0.0
        };
        precision += weight * p_c;
        recall += weight * r_c;
        f1 += weight * f_c;
    }
    Ok((precision, recall, f1))
}

/// Wilson score interval for a binomial proportion of `successes` out of
/// `trials` at critical value `z`. The bounds are clamped to `[0, 1]` and the
/// boundary cases `k = 0` / `k = n` pin to 0 and 1 exactly.
pub fn wilson_interval(successes: usize, trials: usize, z: f64) -> Result<(f64, f64)> {
    if trials == 0 {
        return Err(Error::InvalidArgument(
            "wilson_interval with zero trials".to_string(),
        ));
    }
    if successes > trials {
        return Err(Error::InvalidArgument(format!(
            "{successes} successes out of {trials} trials"
        )));
    }
    let n = trials as f64;
    let p_hat = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p_hat + z2 / (2.0 * n)) / denom;
    let half = z * (p_hat * (1.0 - p_hat) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if successes == 0 {
        0.0
    } else {
        (center - half).max(0.0)
    };
    let hi = if successes == trials {
        1.0
    } else {
        (center + half).min(1.0)
    };
    Ok((lo, hi))
}

/// Evaluation summary mirroring the comparison-report column set. Binary-only
/// fields (`auc`, the operating-point rates) are absent when the task has
/// more than two classes.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub accuracy: f64,
    pub auc: Option<f64>,
    pub fpr_at_50tpr: Option<f64>,
    pub fnr_at_50tnr: Option<f64>,
    pub weighted_precision: f64,
    pub weighted_recall: f64,
    pub weighted_f1: f64,
    pub n_test: usize,
    pub labeled_used: usize,
}

impl MetricsReport {
    /// Computes the full report. `positive_scores` is P(class 1) per item and
    /// feeds the binary-only metrics; those are omitted for K > 2 or when the
    /// gold labels are degenerate (single class).
    pub fn compute(
        predicted: &[u32],
        positive_scores: Option<&[f64]>,
        gold: &[u32],
        num_classes: usize,
        labeled_used: usize,
    ) -> Result<MetricsReport> {
        let acc = accuracy(predicted, gold)?;
        let (wp, wr, wf) = weighted_prf(predicted, gold, num_classes)?;
        let mut report = MetricsReport {
            accuracy: acc,
            auc: None,
            fpr_at_50tpr: None,
            fnr_at_50tnr: None,
            weighted_precision: wp,
            weighted_recall: wr,
            weighted_f1: wf,
            n_test: gold.len(),
            labeled_used,
        };
        if num_classes == 2 {
            if let Some(scores) = positive_scores {
                let both_present =
                    gold.iter().any(|&g| g == 1) && gold.iter().any(|&g| g == 0);
                if both_present {
                    report.auc = Some(auc(scores, gold)?);
                    report.fpr_at_50tpr = Some(fpr_at_tpr(scores, gold, 0.5)?);
                    report.fnr_at_50tnr = Some(fnr_at_tnr(scores, gold, 0.5)?);
                }
            }
        }
        Ok(report)
    }

    /// JSON form with every real rounded to six decimal places; binary-only
    /// fields are omitted when absent.
    pub fn to_json(&self) -> Value {
        let mut obj = serde_json::Map::new();
        obj.insert("accuracy".into(), json!(round6(self.accuracy)));
        if let Some(v) = self.auc {
            obj.insert("auc".into(), json!(round6(v)));
        }
        if let Some(v) = self.fpr_at_50tpr {
            obj.insert("fpr_at_50tpr".into(), json!(round6(v)));
        }
        if let Some(v) = self.fnr_at_50tnr {
            obj.insert("fnr_at_50tnr".into(), json!(round6(v)));
        }
        obj.insert(
            "weighted_precision".into(),
            json!(round6(self.weighted_precision)),
        );
        obj.insert("weighted_recall".into(), json!(round6(self.weighted_recall)));
        obj.insert("weighted_f1".into(), json!(round6(self.weighted_f1)));
        obj.insert("n_test".into(), json!(self.n_test));
        obj.insert("labeled_used".into(), json!(self.labeled_used));
        Value::Object(obj)
    }
}

/// Rounds to six decimal places for report serialization.
pub fn round6(x: f64) -> f64 {
    (x * 1e6).round() / 1e6
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    // Brute-force oracles, kept independent of the implementations above.

    fn auc_pairs(scores: &[f64], gold: &[u32]) -> f64 {
        let mut num = 0.0;
        let mut pairs = 0.0;
        for (i, &si) in scores.iter().enumerate() {
            if gold[i] != 1 {
                continue;
            }
            for (j, &sj) in scores.iter().enumerate() {
                if gold[j] != 0 {
                    continue;
                }
                pairs += 1.0;
                if si > sj {
                    num += 1.0;
                } else if si == sj {
                    num += 0.5;
                }
            }
        }
        num / pairs
    }

    fn fpr_scan(scores: &[f64], gold: &[u32], target: f64) -> f64 {
        let p = gold.iter().filter(|&&g| g == 1).count() as f64;
        let n = gold.len() as f64 - p;
        let mut thresholds: Vec<f64> = scores.to_vec();
        thresholds.sort_by(|a, b| b.total_cmp(a));
        thresholds.dedup();
        for t in thresholds {
            let tp = scores
                .iter()
                .zip(gold)
                .filter(|(s, g)| **s >= t && **g == 1)
                .count() as f64;
            if tp / p >= target {
                let fp = scores
                    .iter()
                    .zip(gold)
                    .filter(|(s, g)| **s >= t && **g == 0)
                    .count() as f64;
                return fp / n;
            }
        }
        1.0
    }

    fn fnr_scan(scores: &[f64], gold: &[u32], target: f64) -> f64 {
        let p = gold.iter().filter(|&&g| g == 1).count() as f64;
        let n = gold.len() as f64 - p;
        let mut thresholds: Vec<f64> = scores.to_vec();
        thresholds.sort_by(|a, b| a.total_cmp(b));
        thresholds.dedup();
        thresholds.push(f64::INFINITY);
        for t in thresholds {
            let tn = scores
                .iter()
                .zip(gold)
                .filter(|(s, g)| **s < t && **g == 0)
                .count() as f64;
            if tn / n >= target {
                let fn_ = scores
                    .iter()
                    .zip(gold)
                    .filter(|(s, g)| **s < t && **g == 1)
                    .count() as f64;
                return fn_ / p;
            }
        }
        1.0
    }

    #[test]
    fn accuracy_examples() {
        assert_eq!(accuracy(&[1, 0, 1], &[1, 0, 1]).unwrap(), 1.0);
        assert_eq!(accuracy(&[1, 0], &[0, 1]).unwrap(), 0.0);
        assert_eq!(accuracy(&[1, 0, 1, 1], &[1, 1, 1, 0]).unwrap(), 0.5);
        assert!(accuracy(&[], &[]).is_err());
    }

    #[test]
    fn auc_examples() {
        assert_eq!(auc(&[0.9, 0.8, 0.2, 0.1], &[1, 1, 0, 0]).unwrap(), 1.0);
        assert_eq!(auc(&[0.5, 0.5, 0.5, 0.5], &[1, 0, 1, 0]).unwrap(), 0.5);
        assert_eq!(auc(&[0.9, 0.6, 0.4, 0.2], &[1, 0, 1, 0]).unwrap(), 0.75);
        assert!(auc(&[0.3, 0.4], &[1, 1]).is_err());
    }

    #[test]
    fn auc_matches_pair_counting_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(90);
        for _ in 0..60 {
            let n = rng.gen_range(4..30);
            let mut gold: Vec<u32> = (0..n).map(|_| rng.gen_range(0..2)).collect();
            gold[0] = 0;
            gold[1] = 1;
            // Quantized scores force frequent ties.
            let scores: Vec<f64> = (0..n).map(|_| rng.gen_range(0..5) as f64 / 4.0).collect();
            assert_eq!(auc(&scores, &gold).unwrap(), auc_pairs(&scores, &gold));
        }
    }

    #[test]
    fn auc_complement_and_transform_invariance() {
        let scores = [0.91, 0.55, 0.37, 0.21, 0.66, 0.05];
        let gold = [1, 0, 1, 0, 1, 0];
        let neg: Vec<f64> = scores.iter().map(|s| -s).collect();
        assert!((auc(&scores, &gold).unwrap() + auc(&neg, &gold).unwrap() - 1.0).abs() < 1e-12);
        let squashed: Vec<f64> = scores.iter().map(|s| (3.0 * s).tanh()).collect();
        assert_eq!(auc(&scores, &gold).unwrap(), auc(&squashed, &gold).unwrap());
    }

    #[test]
    fn operating_points_examples() {
        let scores = [0.9, 0.8, 0.2, 0.1];
        let gold = [1, 1, 0, 0];
        assert_eq!(fpr_at_tpr(&scores, &gold, 0.5).unwrap(), 0.0);
        assert_eq!(fnr_at_tnr(&scores, &gold, 0.5).unwrap(), 0.0);

        let flat = [0.4, 0.4, 0.4, 0.4];
        let gold = [1, 0, 1, 0];
        assert_eq!(fpr_at_tpr(&flat, &gold, 0.5).unwrap(), 1.0);
        assert_eq!(fnr_at_tnr(&flat, &gold, 0.5).unwrap(), 1.0);
    }

    #[test]
    fn operating_points_match_threshold_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(91);
        for _ in 0..60 {
            let n = rng.gen_range(4..13);
            let mut gold: Vec<u32> = (0..n).map(|_| rng.gen_range(0..2)).collect();
            gold[0] = 0;
            gold[1] = 1;
            let scores: Vec<f64> = (0..n).map(|_| rng.gen_range(0..6) as f64 / 5.0).collect();
            assert_eq!(
                fpr_at_tpr(&scores, &gold, 0.5).unwrap(),
                fpr_scan(&scores, &gold, 0.5)
            );
            assert_eq!(
                fnr_at_tnr(&scores, &gold, 0.5).unwrap(),
                fnr_scan(&scores, &gold, 0.5)
            );
        }
    }

    #[test]
    fn weighted_prf_examples() {
        assert_eq!(
            weighted_prf(&[0, 1, 2], &[0, 1, 2], 3).unwrap(),
            (1.0, 1.0, 1.0)
        );
        // All predicted class 0 on balanced binary gold: weighted recall 0.5.
        let (_, recall, _) = weighted_prf(&[0, 0, 0, 0], &[0, 0, 1, 1], 2).unwrap();
        assert_eq!(recall, 0.5);
    }

    #[test]
    fn weighted_prf_matches_confusion_recount() {
        let mut rng = ChaCha8Rng::seed_from_u64(92);
        for _ in 0..40 {
            let k = 4usize;
            let n = 20;
            let predicted: Vec<u32> = (0..n).map(|_| rng.gen_range(0..k as u32)).collect();
            let gold: Vec<u32> = (0..n).map(|_| rng.gen_range(0..k as u32)).collect();
            let (wp, wr, wf) = weighted_prf(&predicted, &gold, k).unwrap();

            // Independent recount straight from the definition.
            let (mut ep, mut er, mut ef) = (0.0, 0.0, 0.0);
            for c in 0..k as u32 {
                let tp = predicted
                    .iter()
                    .zip(&gold)
                    .filter(|(p, g)| **p == c && **g == c)
                    .count() as f64;
                let pred_c = predicted.iter().filter(|&&p| p == c).count() as f64;
                let gold_c = gold.iter().filter(|&&g| g == c).count() as f64;
                if gold_c == 0.0 {
                    continue;
                }
                let p_c = if pred_c > 0.0 { tp / pred_c } else { 0.0 };
                let r_c = tp / gold_c;
                let f_c = if p_c + r_c > 0.0 {
                    2.0 * p_c * r_c / (p_c + r_c)
                } else {
                    0.0
                };
                let w = gold_c / n as f64;
                ep += w * p_c;
                er += w * r_c;
                ef += w * f_c;
            }
            assert!((wp - ep).abs() < 1e-12);
            assert!((wr - er).abs() < 1e-12);
            assert!((wf - ef).abs() < 1e-12);
        }
    }

    #[test]
    fn wilson_examples() {
        let (lo, _) = wilson_interval(0, 10, 1.96).unwrap();
        assert_eq!(lo, 0.0);
        let (_, hi) = wilson_interval(10, 10, 1.96).unwrap();
        assert_eq!(hi, 1.0);
        let (lo, hi) = wilson_interval(50, 100, 1.96).unwrap();
        assert!((lo - 0.4038).abs() < 1e-3, "lo = {lo}");
        assert!((hi - 0.5962).abs() < 1e-3, "hi = {hi}");
        assert!(wilson_interval(1, 0, 1.96).is_err());
    }

    #[test]
    fn wilson_contains_point_estimate() {
        for n in [1usize, 3, 10, 97] {
            for k in 0..=n {
                let (lo, hi) = wilson_interval(k, n, 1.96).unwrap();
                let p = k as f64 / n as f64;
                assert!(lo <= p && p <= hi, "k={k} n={n}: ({lo}, {hi}) vs {p}");
            }
        }
    }

    #[test]
    fn report_omits_binary_fields_for_multiclass() {
        let report = MetricsReport::compute(&[0, 1, 2], None, &[0, 1, 2], 3, 5).unwrap();
        assert!(report.auc.is_none());
        let value = report.to_json();
        assert!(value.get("auc").is_none());
        assert_eq!(value["labeled_used"], 5);
    }

    #[test]
    fn report_rounds_to_six_decimals() {
        let report = MetricsReport::compute(&[1, 0, 1], None, &[1, 1, 1], 2, 0).unwrap();
        let value = report.to_json();
        assert_eq!(value["accuracy"], json!(0.666667));
    }
}
