//! Event-level evaluation of a detector segmentation against a reference:
//! coincidence matching with TP/FP/FN counting, per-class precision, recall,
//! F-measure and Jaccard index, the weighted composite score, and Pearson
//! correlation for score-versus-SNR analyses.

use crate::error::{Error, Result};
use crate::signal::{LabelClass, LabelInterval, Segmentation};

/// Which interval length normalizes the coincidence ratio.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CoincidenceDenominator {
    /// Overlap divided by the reference length.
    #[default]
    Reference,
    /// Overlap divided by the output length.
    Output,
}

/// True-positive matching rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchRule {
    /// Minimum coincidence ratio for a candidate pair.
    pub min_coincidence: f64,
    /// An output may exceed the reference length by at most this fraction.
    pub max_overhang_frac: f64,
    pub denominator: CoincidenceDenominator,
    /// Bound the overhang on each boundary side separately instead of
    /// bounding the total output length.
    pub per_side_overhang: bool,
}

impl Default for MatchRule {
    fn default() -> Self {
        MatchRule {
            min_coincidence: 0.8,
            max_overhang_frac: 0.5,
            denominator: CoincidenceDenominator::Reference,
            per_side_overhang: false,
        }
    }
}

impl MatchRule {
    fn validate(&self) -> Result<()> {
        if !(self.min_coincidence > 0.0 && self.min_coincidence <= 1.0) {
            return Err(Error::InvalidParam {
                name: "min_coincidence",
                detail: format!("must lie in (0, 1], got {}", self.min_coincidence),
            });
        }
        if !(self.max_overhang_frac > 0.0) {
            return Err(Error::InvalidParam {
                name: "max_overhang_frac",
                detail: format!("must be positive, got {}", self.max_overhang_frac),
            });
        }
        Ok(())
    }

    fn overhang_ok(&self, reference: &LabelInterval, output: &LabelInterval) -> bool {
        let allowance = self.max_overhang_frac * reference.len() as f64;
        if self.per_side_overhang {
            let left = reference.start_sample.saturating_sub(output.start_sample) as f64;
            let right = output.end_sample.saturating_sub(reference.end_sample) as f64;
            left <= allowance && right <= allowance
        } else {
            output.len() as f64 <= (1.0 + self.max_overhang_frac) * reference.len() as f64
        }
    }
}

/// Per-class true/false positive and false negative counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ClassCounts {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
}

/// Per-class derived metrics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub jaccard: f64,
    pub counts: ClassCounts,
}

/// Full evaluation of one (reference, output) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub ictal: ClassMetrics,
    pub interictal: ClassMetrics,
    pub score: f64,
}

impl EvalReport {
    /// Column names of the flat CSV row, in reporting order.
    pub fn csv_header() -> &'static str {
        "precision_ictal,precision_interictal,recall_ictal,recall_interictal,\
         jaccard_ictal,jaccard_interictal,f_measure_ictal,f_measure_interictal,score"
    }

    pub fn to_csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.ictal.precision,
            self.interictal.precision,
            self.ictal.recall,
            self.interictal.recall,
            self.ictal.jaccard,
            self.interictal.jaccard,
            self.ictal.f1,
            self.interictal.f1,
            self.score
        )
    }
}

/// Composite score weights. The defaults prioritize ictal precision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreWeights {
    pub w_prec_ictal: f64,
    pub w_jaccard_ictal: f64,
    pub w_recall_ictal: f64,
    pub w_prec_inter: f64,
    pub w_recall_inter: f64,
}

impl Default for ScoreWeights {
    fn default() -> Self {
        ScoreWeights {
            w_prec_ictal: 0.6,
            w_jaccard_ictal: 0.2,
            w_recall_ictal: 0.1,
            w_prec_inter: 0.05,
            w_recall_inter: 0.05,
        }
    }
}

impl ScoreWeights {
    pub fn validate(&self) -> Result<()> {
        let sum = self.w_prec_ictal
            + self.w_jaccard_ictal
            + self.w_recall_ictal
            + self.w_prec_inter
            + self.w_recall_inter;
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::WeightSum { sum });
        }
        Ok(())
    }
}

fn overlap_samples(a: &LabelInterval, b: &LabelInterval) -> usize {
    let start = a.start_sample.max(b.start_sample);
    let end = a.end_sample.min(b.end_sample);
    end.saturating_sub(start)
}

/// Overlap between the intervals divided by the reference length, clamped at
/// zero for disjoint intervals. Interval construction guarantees a nonzero
/// denominator.
pub fn coincidence_ratio(reference: &LabelInterval, output: &LabelInterval) -> f64 {
    overlap_samples(reference, output) as f64 / reference.len() as f64
}

fn coincidence_for(
    reference: &LabelInterval,
    output: &LabelInterval,
    denominator: CoincidenceDenominator,
) -> f64 {
    let denom = match denominator {
        CoincidenceDenominator::Reference => reference.len(),
        CoincidenceDenominator::Output => output.len(),
    };
    overlap_samples(reference, output) as f64 / denom as f64
}

/// Matches class-`label` output intervals to reference intervals one-to-one.
///
/// Candidate pairs must reach the rule's coincidence and pass the overhang
/// bound; assignment is greedy in descending coincidence (earlier reference,
/// then earlier output on ties). Unmatched outputs are false positives,
/// unmatched references false negatives.
pub fn match_events(
    reference: &Segmentation,
    output: &Segmentation,
    label: LabelClass,
    rule: &MatchRule,
) -> Result<ClassCounts> {
    rule.validate()?;
    if reference.total_len() != output.total_len() {
        return Err(Error::LengthMismatch {
            a: reference.total_len(),
            b: output.total_len(),
        });
    }
    let refs: Vec<&LabelInterval> = reference.intervals_of(label).collect();
    let outs: Vec<&LabelInterval> = output.intervals_of(label).collect();

    let mut candidates = Vec::new();
    for (ri, r) in refs.iter().enumerate() {
        for (oi, o) in outs.iter().enumerate() {
            let coincidence = coincidence_for(r, o, rule.denominator);
            if coincidence >= rule.min_coincidence && rule.overhang_ok(r, o) {
                candidates.push((coincidence, ri, oi));
            }
        }
    }
    candidates.sort_by(|a, b| {
        b.0.partial_cmp(&a.0)
            .unwrap()
            .then(a.1.cmp(&b.1))
            .then(a.2.cmp(&b.2))
    });

    let mut ref_used = vec![false; refs.len()];
    let mut out_used = vec![false; outs.len()];
    let mut tp = 0usize;
    for (_, ri, oi) in candidates {
        if !ref_used[ri] && !out_used[oi] {
            ref_used[ri] = true;
            out_used[oi] = true;
            tp += 1;
        }
    }
    Ok(ClassCounts {
        tp,
        fp: outs.len() - tp,
        fn_: refs.len() - tp,
    })
}

/// TP / (TP + FP); zero when there are no positives.
pub fn precision(counts: &ClassCounts) -> f64 {
    let denom = counts.tp + counts.fp;
    if denom == 0 {
        0.0
    } else {
        counts.tp as f64 / denom as f64
    }
}

/// TP / (TP + FN); zero when there is nothing to recall.
pub fn recall(counts: &ClassCounts) -> f64 {
    let denom = counts.tp + counts.fn_;
    if denom == 0 {
        0.0
    } else {
        counts.tp as f64 / denom as f64
    }
}

/// Harmonic mean of precision and recall; zero when both are zero.
pub fn f1(counts: &ClassCounts) -> f64 {
    let p = precision(counts);
    let r = recall(counts);
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

/// Sample-wise Jaccard index for one class: |A intersect B| / |A union B|
/// over the materialized label vectors. Defined as 1 when both sets are
/// empty.
pub fn jaccard(reference: &Segmentation, output: &Segmentation, label: LabelClass) -> Result<f64> {
    if reference.total_len() != output.total_len() {
        return Err(Error::LengthMismatch {
            a: reference.total_len(),
            b: output.total_len(),
        });
    }
    let ref_labels = reference.materialize();
    let out_labels = output.materialize();
    let mut intersection = 0usize;
    let mut union = 0usize;
    for (a, b) in ref_labels.iter().zip(&out_labels) {
        let in_a = *a == label;
        let in_b = *b == label;
        if in_a && in_b {
            intersection += 1;
        }
        if in_a || in_b {
            union += 1;
        }
    }
    if union == 0 {
        Ok(1.0)
    } else {
        Ok(intersection as f64 / union as f64)
    }
}

/// Weighted composite of the five component metrics.
pub fn mcda_score(report: &EvalReport, weights: &ScoreWeights) -> Result<f64> {
    weights.validate()?;
    Ok(weights.w_prec_ictal * report.ictal.precision
        + weights.w_jaccard_ictal * report.ictal.jaccard
        + weights.w_recall_ictal * report.ictal.recall
        + weights.w_prec_inter * report.interictal.precision
        + weights.w_recall_inter * report.interictal.recall)
}

fn class_metrics(
    reference: &Segmentation,
    output: &Segmentation,
    label: LabelClass,
    rule: &MatchRule,
) -> Result<ClassMetrics> {
    let counts = match_events(reference, output, label, rule)?;
    Ok(ClassMetrics {
        precision: precision(&counts),
        recall: recall(&counts),
        f1: f1(&counts),
        jaccard: jaccard(reference, output, label)?,
        counts,
    })
}

/// Evaluates the output segmentation against the reference for both event
/// classes and computes the composite score.
pub fn evaluate(
    reference: &Segmentation,
    output: &Segmentation,
    rule: &MatchRule,
    weights: &ScoreWeights,
) -> Result<EvalReport> {
    weights.validate()?;
    let ictal = class_metrics(reference, output, LabelClass::Ictal, rule)?;
    let interictal = class_metrics(reference, output, LabelClass::Interictal, rule)?;
    let mut report = EvalReport {
        ictal,
        interictal,
        score: 0.0,
    };
    report.score = mcda_score(&report, weights)?;
    Ok(report)
}

/// Sample Pearson correlation coefficient.
pub fn pearson_corr(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::SequenceLengthMismatch {
            a: xs.len(),
            b: ys.len(),
        });
    }
    if xs.len() < 2 {
        return Err(Error::TooFew {
            what: "observations",
            min: 2,
            got: xs.len(),
        });
    }
    let n = xs.len() as f64;
    let mean_x = xs.iter().sum::<f64>() / n;
    let mean_y = ys.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        let dx = x - mean_x;
        let dy = y - mean_y;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::ZeroVariance("pearson correlation input"));
    }
    Ok(sxy / (sxx * syy).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn interval(start: usize, end: usize, label: LabelClass) -> LabelInterval {
        LabelInterval::new(start, end, label).unwrap()
    }

    fn seg(intervals: Vec<LabelInterval>, total_len: usize) -> Segmentation {
        Segmentation::new(intervals, total_len).unwrap()
    }

    #[test]
    fn coincidence_examples() {
        let r = interval(100, 200, LabelClass::Ictal);
        let o = interval(150, 250, LabelClass::Ictal);
        assert!((coincidence_ratio(&r, &o) - 0.5).abs() < 1e-12);
        assert!((coincidence_ratio(&r, &r) - 1.0).abs() < 1e-12);
        let far = interval(300, 400, LabelClass::Ictal);
        assert_eq!(coincidence_ratio(&r, &far), 0.0);
    }

    #[test]
    fn matching_accepts_within_rule() {
        let reference = seg(vec![interval(1000, 2000, LabelClass::Ictal)], 5000);
        let output = seg(vec![interval(1100, 2100, LabelClass::Ictal)], 5000);
        let counts =
            match_events(&reference, &output, LabelClass::Ictal, &MatchRule::default()).unwrap();
        assert_eq!(
            counts,
            ClassCounts {
                tp: 1,
                fp: 0,
                fn_: 0
            }
        );
    }

    #[test]
    fn matching_rejects_overlong_output() {
        let reference = seg(vec![interval(1000, 2000, LabelClass::Ictal)], 5000);
        let output = seg(vec![interval(900, 3600, LabelClass::Ictal)], 5000);
        let counts =
            match_events(&reference, &output, LabelClass::Ictal, &MatchRule::default()).unwrap();
        assert_eq!(
            counts,
            ClassCounts {
                tp: 0,
                fp: 1,
                fn_: 1
            }
        );
    }

    #[test]
    fn matching_is_one_to_one() {
        // Two outputs over one reference: one TP, one FP.
        let reference = seg(vec![interval(1000, 3000, LabelClass::Ictal)], 8000);
        let output = seg(
            vec![
                interval(1000, 2980, LabelClass::Ictal),
                interval(2990, 4900, LabelClass::Ictal),
            ],
            8000,
        );
        let rule = MatchRule {
            min_coincidence: 0.4,
            ..MatchRule::default()
        };
        let counts = match_events(&reference, &output, LabelClass::Ictal, &rule).unwrap();
        assert_eq!(
            counts,
            ClassCounts {
                tp: 1,
                fp: 1,
                fn_: 0
            }
        );
    }

    #[test]
    fn per_side_overhang_variant() {
        let reference = seg(vec![interval(1000, 2000, LabelClass::Ictal)], 8000);
        // 100 left overhang, 900 right overhang; total length 2000 = 2x ref.
        let output = seg(vec![interval(900, 2900, LabelClass::Ictal)], 8000);
        let total_rule = MatchRule::default();
        let counts = match_events(&reference, &output, LabelClass::Ictal, &total_rule).unwrap();
        assert_eq!(counts.tp, 0);
        let side_rule = MatchRule {
            per_side_overhang: true,
            max_overhang_frac: 0.95,
            ..MatchRule::default()
        };
        let counts = match_events(&reference, &output, LabelClass::Ictal, &side_rule).unwrap();
        assert_eq!(counts.tp, 1);
    }

    #[test]
    fn output_denominator_flag() {
        let reference = seg(vec![interval(1000, 2000, LabelClass::Ictal)], 8000);
        // Output covers half the reference but is fully inside it.
        let output = seg(vec![interval(1000, 1500, LabelClass::Ictal)], 8000);
        let by_reference = match_events(
            &reference,
            &output,
            LabelClass::Ictal,
            &MatchRule::default(),
        )
        .unwrap();
        assert_eq!(by_reference.tp, 0);
        let rule = MatchRule {
            denominator: CoincidenceDenominator::Output,
            ..MatchRule::default()
        };
        let by_output =
            match_events(&reference, &output, LabelClass::Ictal, &rule).unwrap();
        assert_eq!(by_output.tp, 1);
    }

    #[test]
    fn precision_recall_f1_formulas() {
        let counts = ClassCounts {
            tp: 93,
            fp: 7,
            fn_: 0,
        };
        assert!((precision(&counts) - 0.93).abs() < 1e-12);
        let empty = ClassCounts::default();
        assert_eq!(precision(&empty), 0.0);
        assert_eq!(recall(&empty), 0.0);
        assert_eq!(f1(&empty), 0.0);
        // Precision 1.00, recall 0.80: F1 = 2*0.8/1.8.
        let counts = ClassCounts {
            tp: 4,
            fp: 0,
            fn_: 1,
        };
        assert!((f1(&counts) - 8.0 / 9.0).abs() < 1e-12);
        assert!((f1(&counts) - 0.89).abs() < 0.005);
    }

    #[test]
    fn jaccard_examples() {
        let reference = seg(vec![interval(0, 2, LabelClass::Ictal)], 4);
        let output = seg(vec![interval(0, 1, LabelClass::Ictal)], 4);
        assert!((jaccard(&reference, &output, LabelClass::Ictal).unwrap() - 0.5).abs() < 1e-12);
        assert!(
            (jaccard(&reference, &reference, LabelClass::Ictal).unwrap() - 1.0).abs() < 1e-12
        );
        let empty = Segmentation::all_baseline(4);
        assert_eq!(jaccard(&reference, &empty, LabelClass::Ictal).unwrap(), 0.0);
        // Both empty for a class: defined as 1.
        assert_eq!(jaccard(&empty, &empty, LabelClass::Ictal).unwrap(), 1.0);
    }

    #[test]
    fn jaccard_is_symmetric() {
        let a = seg(
            vec![
                interval(0, 10, LabelClass::Ictal),
                interval(20, 25, LabelClass::Interictal),
            ],
            40,
        );
        let b = seg(vec![interval(5, 18, LabelClass::Ictal)], 40);
        for label in [LabelClass::Ictal, LabelClass::Interictal] {
            assert_eq!(
                jaccard(&a, &b, label).unwrap(),
                jaccard(&b, &a, label).unwrap()
            );
        }
    }

    fn report_from(metrics: [f64; 5]) -> EvalReport {
        let empty = ClassCounts::default();
        EvalReport {
            ictal: ClassMetrics {
                precision: metrics[0],
                jaccard: metrics[1],
                recall: metrics[2],
                f1: 0.0,
                counts: empty,
            },
            interictal: ClassMetrics {
                precision: metrics[3],
                recall: metrics[4],
                jaccard: 0.0,
                f1: 0.0,
                counts: empty,
            },
            score: 0.0,
        }
    }

    #[test]
    fn mcda_score_reproduces_reported_sessions() {
        let weights = ScoreWeights::default();
        // P_i, Jac_i, R_i, P_ii, R_ii per session row.
        let score =
            mcda_score(&report_from([1.0, 1.0, 1.0, 0.40, 0.50]), &weights).unwrap();
        assert!((score - 0.945).abs() < 1e-12);
        assert!((score - 0.94).abs() <= 0.01);
        let score = mcda_score(&report_from([1.0, 1.0, 1.0, 0.0, 0.0]), &weights).unwrap();
        assert!((score - 0.90).abs() < 1e-12);
        let score =
            mcda_score(&report_from([1.0, 0.80, 0.80, 1.0, 1.0]), &weights).unwrap();
        assert!((score - 0.94).abs() < 1e-12);
    }

    #[test]
    fn mcda_rejects_bad_weights() {
        let weights = ScoreWeights {
            w_prec_ictal: 0.9,
            ..ScoreWeights::default()
        };
        assert!(matches!(
            mcda_score(&report_from([1.0; 5]), &weights),
            Err(Error::WeightSum { .. })
        ));
    }

    #[test]
    fn evaluate_perfect_and_empty_outputs() {
        let reference = seg(
            vec![
                interval(1000, 15_000, LabelClass::Ictal),
                interval(30_000, 30_500, LabelClass::Interictal),
            ],
            60_000,
        );
        let report = evaluate(
            &reference,
            &reference,
            &MatchRule::default(),
            &ScoreWeights::default(),
        )
        .unwrap();
        assert_eq!(report.score, 1.0);
        assert_eq!(report.ictal.precision, 1.0);
        assert_eq!(report.interictal.recall, 1.0);

        let empty = Segmentation::all_baseline(60_000);
        let report = evaluate(
            &reference,
            &empty,
            &MatchRule::default(),
            &ScoreWeights::default(),
        )
        .unwrap();
        assert_eq!(report.score, 0.0);
    }

    #[test]
    fn evaluate_rejects_length_mismatch() {
        let a = Segmentation::all_baseline(100);
        let b = Segmentation::all_baseline(200);
        assert!(matches!(
            evaluate(&a, &b, &MatchRule::default(), &ScoreWeights::default()),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn pearson_basics() {
        let xs = [1.0, 2.0, 3.0];
        assert!((pearson_corr(&xs, &xs).unwrap() - 1.0).abs() < 1e-12);
        let neg: Vec<f64> = xs.iter().map(|x| -x).collect();
        assert!((pearson_corr(&xs, &neg).unwrap() + 1.0).abs() < 1e-12);
        // Direct formula: r = Sxy / sqrt(Sxx Syy) = 5 / sqrt(2 * 38/3)
        // = sqrt(75/76) for ys = [2, 4, 7].
        let ys = [2.0, 4.0, 7.0];
        let expected = (75.0f64 / 76.0).sqrt();
        assert!((pearson_corr(&xs, &ys).unwrap() - expected).abs() < 1e-12);
        assert!(matches!(
            pearson_corr(&xs, &[1.0, 1.0, 1.0]),
            Err(Error::ZeroVariance(_))
        ));
        assert!(pearson_corr(&[1.0], &[2.0]).is_err());
    }

    #[test]
    fn csv_row_matches_header_order() {
        let report = EvalReport {
            ictal: ClassMetrics {
                precision: 0.9,
                recall: 0.8,
                f1: 0.7,
                jaccard: 0.6,
                counts: ClassCounts::default(),
            },
            interictal: ClassMetrics {
                precision: 0.5,
                recall: 0.4,
                f1: 0.3,
                jaccard: 0.2,
                counts: ClassCounts::default(),
            },
            score: 0.77,
        };
        assert_eq!(report.to_csv_row(), "0.9,0.5,0.8,0.4,0.6,0.2,0.7,0.3,0.77");
        assert_eq!(EvalReport::csv_header().split(',').count(), 9);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        // Score bounds: valid weights keep the score in [0, 1], and the
        // score is 1 only when all five components are 1.
        #[test]
        fn prop_score_bounds(metrics in proptest::collection::vec(0.0f64..=1.0, 5)) {
            let report = report_from([metrics[0], metrics[1], metrics[2], metrics[3], metrics[4]]);
            let score = mcda_score(&report, &ScoreWeights::default()).unwrap();
            prop_assert!((0.0..=1.0 + 1e-12).contains(&score));
            if (score - 1.0).abs() < 1e-12 {
                for m in &metrics {
                    prop_assert!((m - 1.0).abs() < 1e-9);
                }
            }
        }

        // Jaccard symmetry over random interval layouts.
        #[test]
        fn prop_jaccard_symmetry(
            a_start in 0usize..50, a_len in 1usize..50,
            b_start in 0usize..50, b_len in 1usize..50,
        ) {
            let total = 120;
            let a = seg(vec![interval(a_start, a_start + a_len, LabelClass::Ictal)], total);
            let b = seg(vec![interval(b_start, b_start + b_len, LabelClass::Ictal)], total);
            prop_assert_eq!(
                jaccard(&a, &b, LabelClass::Ictal).unwrap(),
                jaccard(&b, &a, LabelClass::Ictal).unwrap()
            );
        }
    }
}
