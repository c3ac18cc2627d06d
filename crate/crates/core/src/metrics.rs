//! Competition metrics: Pearson correlation (plain, macro-averaged, and
//! high-intensity subset), quadratic weighted kappa, and the some-emotion
//! subset filter, aggregated into an [`EvalReport`].

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::task::{Dimension, Predictions, TaskKind, TaskSpec};

/// A metric value or an explicit reason it is undefined.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum MetricValue {
    Value(f64),
    Undefined(String),
}

impl MetricValue {
    pub fn value(&self) -> Option<f64> {
        match self {
            MetricValue::Value(v) => Some(*v),
            MetricValue::Undefined(_) => None,
        }
    }

    fn from_result(r: Result<f64>) -> MetricValue {
        match r {
            Ok(v) => MetricValue::Value(v),
            Err(e) => MetricValue::Undefined(e.to_string()),
        }
    }

    fn render(&self) -> String {
        match self {
            MetricValue::Value(v) => format!("{v:.6}"),
            MetricValue::Undefined(reason) => format!("undefined ({reason})"),
        }
    }
}

fn undefined(metric: &str, reason: &str) -> Error {
    Error::UndefinedMetric { metric: metric.to_string(), reason: reason.to_string() }
}

/// Product-moment correlation. Errors when either vector is constant or the
/// inputs are shorter than 2.
pub fn pearson(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Invalid(format!(
            "pearson needs aligned vectors, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    if a.len() < 2 {
        return Err(undefined("pearson", "needs at least 2 samples"));
    }
    let n = a.len() as f64;
    let mean_a = a.iter().sum::<f64>() / n;
    let mean_b = b.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var_a = 0.0;
    let mut var_b = 0.0;
    for (x, y) in a.iter().zip(b) {
        let da = x - mean_a;
        let db = y - mean_b;
        cov += da * db;
        var_a += da * da;
        var_b += db * db;
    }
    if var_a == 0.0 {
        return Err(undefined("pearson", "first vector is constant"));
    }
    if var_b == 0.0 {
        return Err(undefined("pearson", "second vector is constant"));
    }
    Ok((cov / (var_a * var_b).sqrt()).clamp(-1.0, 1.0))
}

/// Macro-averaged Pearson over exactly the four emotion datasets.
pub fn ma_pearson(per_emotion: &[(Dimension, &[f64], &[f64])]) -> Result<f64> {
    if per_emotion.len() != 4 {
        return Err(Error::Invalid(format!(
            "macro-average needs the 4 emotion datasets, got {}",
            per_emotion.len()
        )));
    }
    for required in Dimension::EMOTIONS {
        if !per_emotion.iter().any(|(d, _, _)| *d == required) {
            return Err(Error::Invalid(format!("missing emotion dataset '{required}'")));
        }
    }
    let mut total = 0.0;
    for (dim, pred, gold) in per_emotion {
        let r = pearson(pred, gold)
            .map_err(|e| undefined(&format!("pearson[{dim}]"), &e.to_string()))?;
        total += r;
    }
    Ok(total / 4.0)
}

/// Pearson restricted to samples with gold intensity >= 0.5. Returns the
/// correlation and the subset size.
pub fn pearson_high(pred: &[f64], gold: &[f64]) -> Result<(f64, usize)> {
    if pred.len() != gold.len() {
        return Err(Error::Invalid(format!(
            "pearson_high needs aligned vectors, got {} and {}",
            pred.len(),
            gold.len()
        )));
    }
    let mut p = Vec::new();
    let mut g = Vec::new();
    for (a, b) in pred.iter().zip(gold) {
        if *b >= 0.5 {
            p.push(*a);
            g.push(*b);
        }
    }
    let size = p.len();
    if size < 2 {
        return Err(undefined("pearson_high", &format!("subset has {size} samples")));
    }
    let r = pearson(&p, &g).map_err(|e| undefined("pearson_high", &e.to_string()))?;
    Ok((r, size))
}

/// Some-emotion subset: drops rows whose gold class is the task's neutral
/// label (external label 0 on both scales). Total function; may return empty
/// vectors.
pub fn se_subset(pred: &[i64], gold: &[i64], task: &TaskSpec) -> (Vec<i64>, Vec<i64>) {
    let neutral = task.neutral_class().map(|c| task.external_label(c)).unwrap_or(0);
    let mut p = Vec::new();
    let mut g = Vec::new();
    for (a, b) in pred.iter().zip(gold) {
        if *b != neutral {
            p.push(*a);
            g.push(*b);
        }
    }
    (p, g)
}

/// Quadratic weighted kappa over classes `0..k`.
///
/// `kappa = 1 - sum(w*O) / sum(w*E)` with `w[i][j] = (i-j)^2 / (k-1)^2`,
/// observed counts `O`, and expected counts `E` from the outer product of the
/// marginals scaled to `n`. A zero denominator is perfect agreement (1.0)
/// when `O` is diagonal and undefined otherwise.
pub fn quadratic_weighted_kappa(pred: &[usize], gold: &[usize], k: usize) -> Result<f64> {
    if k < 2 {
        return Err(Error::Invalid(format!("kappa needs k >= 2, got {k}")));
    }
    if pred.len() != gold.len() {
        return Err(Error::Invalid(format!(
            "kappa needs aligned vectors, got {} and {}",
            pred.len(),
            gold.len()
        )));
    }
    if pred.is_empty() {
        return Err(undefined("kappa", "empty input"));
    }
    if let Some(&bad) = pred.iter().chain(gold).find(|&&c| c >= k) {
        return Err(Error::Invalid(format!("class {bad} outside 0..{k}")));
    }
    let n = pred.len() as f64;
    let scale = ((k - 1) * (k - 1)) as f64;
    let weight = |i: usize, j: usize| ((i as f64 - j as f64).powi(2)) / scale;

    let mut pred_marginal = vec![0.0f64; k];
    let mut gold_marginal = vec![0.0f64; k];
    let mut observed_penalty = 0.0;
    for (&p, &g) in pred.iter().zip(gold) {
        pred_marginal[p] += 1.0;
        gold_marginal[g] += 1.0;
        observed_penalty += weight(p, g);
    }
    let mut expected_penalty = 0.0;
    for (i, pm) in pred_marginal.iter().enumerate() {
        for (j, gm) in gold_marginal.iter().enumerate() {
            expected_penalty += weight(i, j) * pm * gm / n;
        }
    }

    if expected_penalty == 0.0 {
        return if observed_penalty == 0.0 {
            Ok(1.0)
        } else {
            Err(undefined("kappa", "expected agreement matrix has no off-diagonal mass"))
        };
    }
    Ok(1.0 - observed_penalty / expected_penalty)
}

/// Evaluation report with stable field order for golden-file testing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub task: TaskSpec,
    pub n: usize,
    pub pearson: MetricValue,
    /// Regression: Pearson over gold >= 0.5 plus subset size.
    pub pearson_high: Option<(MetricValue, usize)>,
    /// Emotion tasks: macro-average, fillable when all four datasets are seen.
    pub ma_pearson: Option<MetricValue>,
    /// Ordinal: kappa on the full set.
    pub kappa: Option<MetricValue>,
    /// Ordinal: Pearson on the some-emotion subset plus subset size.
    pub pearson_se: Option<(MetricValue, usize)>,
    /// Ordinal: kappa on the some-emotion subset plus subset size.
    pub kappa_se: Option<(MetricValue, usize)>,
}

impl EvalReport {
    /// True when every applicable metric has a defined value. The
    /// macro-average is excluded: on a single dataset it reflects missing
    /// sibling datasets, not degenerate data.
    pub fn all_defined(&self) -> bool {
        let defined = |m: &MetricValue| matches!(m, MetricValue::Value(_));
        defined(&self.pearson)
            && self.pearson_high.iter().all(|(m, _)| defined(m))
            && self.kappa.iter().all(defined)
            && self.pearson_se.iter().all(|(m, _)| defined(m))
            && self.kappa_se.iter().all(|(m, _)| defined(m))
    }

    /// Stable key-value rendering.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "task: {}", self.task.label());
        let kind = if self.task.is_ordinal() { "ordinal" } else { "regression" };
        let _ = writeln!(out, "kind: {kind}");
        let _ = writeln!(out, "n: {}", self.n);
        let _ = writeln!(out, "pearson: {}", self.pearson.render());
        if let Some((m, size)) = &self.pearson_high {
            let _ = writeln!(out, "pearson_high: {}", m.render());
            let _ = writeln!(out, "pearson_high_n: {size}");
        }
        if let Some(m) = &self.ma_pearson {
            let _ = writeln!(out, "ma_pearson: {}", m.render());
        }
        if let Some(m) = &self.kappa {
            let _ = writeln!(out, "kappa: {}", m.render());
        }
        if let Some((m, size)) = &self.pearson_se {
            let _ = writeln!(out, "pearson_se: {}", m.render());
            let _ = writeln!(out, "pearson_se_n: {size}");
        }
        if let Some((m, size)) = &self.kappa_se {
            let _ = writeln!(out, "kappa_se: {}", m.render());
            let _ = writeln!(out, "kappa_se_n: {size}");
        }
        out
    }
}

/// Compute every metric applicable to the task. Component failures become
/// explicit undefined entries rather than errors.
pub fn evaluate(task: &TaskSpec, pred: &Predictions, gold: &Predictions) -> Result<EvalReport> {
    if pred.len() != gold.len() {
        return Err(Error::Invalid(format!(
            "evaluate needs aligned vectors, got {} and {}",
            pred.len(),
            gold.len()
        )));
    }
    let n = pred.len();
    match (&task.kind, pred, gold) {
        (TaskKind::Regression { .. }, Predictions::Reals(p), Predictions::Reals(g)) => {
            let report = EvalReport {
                task: *task,
                n,
                pearson: MetricValue::from_result(pearson(p, g)),
                pearson_high: Some(match pearson_high(p, g) {
                    Ok((v, size)) => (MetricValue::Value(v), size),
                    Err(e) => {
                        let size = g.iter().filter(|v| **v >= 0.5).count();
                        (MetricValue::Undefined(e.to_string()), size)
                    }
                }),
                ma_pearson: emotion_placeholder(task),
                kappa: None,
                pearson_se: None,
                kappa_se: None,
            };
            Ok(report)
        }
        (TaskKind::Ordinal { .. }, Predictions::Classes(p), Predictions::Classes(g)) => {
            let p_real: Vec<f64> = p.iter().map(|&v| v as f64).collect();
            let g_real: Vec<f64> = g.iter().map(|&v| v as f64).collect();
            let to_internal = |labels: &[i64]| -> Result<Vec<usize>> {
                labels.iter().map(|&l| task.internal_class(l)).collect()
            };
            let k = task.n_classes();
            let kappa_of = |pp: &[i64], gg: &[i64]| -> Result<f64> {
                quadratic_weighted_kappa(&to_internal(pp)?, &to_internal(gg)?, k)
            };

            let (se_pred, se_gold) = se_subset(p, g, task);
            let se_n = se_gold.len();
            let se_pred_real: Vec<f64> = se_pred.iter().map(|&v| v as f64).collect();
            let se_gold_real: Vec<f64> = se_gold.iter().map(|&v| v as f64).collect();

            let report = EvalReport {
                task: *task,
                n,
                pearson: MetricValue::from_result(pearson(&p_real, &g_real)),
                pearson_high: None,
                ma_pearson: emotion_placeholder(task),
                kappa: Some(MetricValue::from_result(kappa_of(p, g))),
                pearson_se: Some((
                    MetricValue::from_result(pearson(&se_pred_real, &se_gold_real)),
                    se_n,
                )),
                kappa_se: Some((MetricValue::from_result(kappa_of(&se_pred, &se_gold)), se_n)),
            };
            Ok(report)
        }
        _ => Err(Error::Invalid("prediction kind does not match the task kind".into())),
    }
}

fn emotion_placeholder(task: &TaskSpec) -> Option<MetricValue> {
    if task.dimension == Dimension::Valence {
        None
    } else {
        Some(MetricValue::Undefined("macro-average needs all four emotion datasets".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn pearson_identity_and_reversal() {
        assert!((pearson(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap() - 1.0).abs() < 1e-12);
        assert!((pearson(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn pearson_known_value() {
        // direct evaluation of the covariance/variance formula gives 0.8
        let r = pearson(&[1.0, 2.0, 3.0, 4.0], &[1.0, 3.0, 2.0, 4.0]).unwrap();
        assert!((r - 0.8).abs() < 1e-12);
    }

    #[test]
    fn pearson_rejects_constant_vector() {
        assert!(matches!(
            pearson(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]).unwrap_err(),
            Error::UndefinedMetric { .. }
        ));
    }

    #[test]
    fn ma_pearson_is_the_arithmetic_mean() {
        let identity: Vec<f64> = vec![1.0, 2.0, 3.0];
        let pairs: Vec<(Dimension, &[f64], &[f64])> = Dimension::EMOTIONS
            .iter()
            .map(|&d| (d, identity.as_slice(), identity.as_slice()))
            .collect();
        assert!((ma_pearson(&pairs).unwrap() - 1.0).abs() < 1e-12);

        // four distinct components: the macro-average is their plain mean
        let gold = [1.0, 2.0, 3.0, 4.0];
        let preds: [[f64; 4]; 4] = [
            [1.0, 3.0, 2.0, 4.0],
            [2.0, 1.0, 3.0, 4.0],
            [1.0, 2.0, 4.0, 3.0],
            [4.0, 2.0, 3.0, 1.0],
        ];
        let pairs: Vec<(Dimension, &[f64], &[f64])> = Dimension::EMOTIONS
            .iter()
            .zip(&preds)
            .map(|(&d, p)| (d, p.as_slice(), gold.as_slice()))
            .collect();
        let expected: f64 = preds.iter().map(|p| pearson(p, &gold).unwrap()).sum::<f64>() / 4.0;
        assert!((ma_pearson(&pairs).unwrap() - expected).abs() < 1e-15);
    }

    #[test]
    fn ma_pearson_names_the_undefined_emotion() {
        let ok: Vec<f64> = vec![1.0, 2.0, 3.0];
        let constant: Vec<f64> = vec![5.0, 5.0, 5.0];
        let pairs: Vec<(Dimension, &[f64], &[f64])> = vec![
            (Dimension::Anger, ok.as_slice(), ok.as_slice()),
            (Dimension::Fear, constant.as_slice(), ok.as_slice()),
            (Dimension::Joy, ok.as_slice(), ok.as_slice()),
            (Dimension::Sadness, ok.as_slice(), ok.as_slice()),
        ];
        let err = ma_pearson(&pairs).unwrap_err().to_string();
        assert!(err.contains("fear"), "{err}");
    }

    #[test]
    fn pearson_high_filters_by_gold() {
        let gold = [0.4, 0.6, 0.7, 0.9];
        let pred = [0.1, 0.5, 0.8, 0.95];
        let (r, size) = pearson_high(&pred, &gold).unwrap();
        assert_eq!(size, 3);
        let direct = pearson(&pred[1..], &gold[1..]).unwrap();
        assert!((r - direct).abs() < 1e-15);
    }

    #[test]
    fn pearson_high_full_subset_equals_plain() {
        let gold = [0.5, 0.6, 0.9, 0.74];
        let pred = [0.2, 0.3, 0.8, 0.6];
        let (r, size) = pearson_high(&pred, &gold).unwrap();
        assert_eq!(size, 4);
        assert!((r - pearson(&pred, &gold).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn pearson_high_empty_subset_is_undefined() {
        assert!(pearson_high(&[0.1, 0.2], &[0.1, 0.2]).is_err());
    }

    #[test]
    fn se_subset_drops_neutral_gold() {
        let t = TaskSpec::ei_oc(Dimension::Joy);
        let (p, g) = se_subset(&[3, 2, 1, 0], &[0, 1, 2, 3], &t);
        assert_eq!(g, vec![1, 2, 3]);
        assert_eq!(p, vec![2, 1, 0]);
    }

    #[test]
    fn se_subset_valence_excludes_zero() {
        let t = TaskSpec::v_oc();
        let (_, g) = se_subset(&[0, 0, 0], &[-3, 0, 2], &t);
        assert_eq!(g, vec![-3, 2]);
    }

    #[test]
    fn se_subset_all_neutral_is_empty() {
        let t = TaskSpec::ei_oc(Dimension::Joy);
        let (p, g) = se_subset(&[1, 2], &[0, 0], &t);
        assert!(p.is_empty() && g.is_empty());
    }

    #[test]
    fn se_subset_is_idempotent() {
        let t = TaskSpec::v_oc();
        let pred = vec![1, -2, 0, 3, -1];
        let gold = vec![0, -2, 1, 0, 3];
        let (p1, g1) = se_subset(&pred, &gold, &t);
        let (p2, g2) = se_subset(&p1, &g1, &t);
        assert_eq!((p1, g1), (p2, g2));
    }

    #[test]
    fn kappa_perfect_agreement() {
        for k in 2..=7 {
            let labels: Vec<usize> = (0..20).map(|i| i % k).collect();
            assert!((quadratic_weighted_kappa(&labels, &labels, k).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn kappa_three_class_reversal_is_minus_one() {
        // hand evaluation: O has all mass at (2,0),(1,1),(0,2);
        // sum(wO) = (4/4 + 0 + 4/4) = 2; marginals uniform so
        // sum(wE) = (1/3n) * sum over ij of w = 3 * (0+.25+1+.25+0+.25+1+.25+0)/3 = 1
        let kappa = quadratic_weighted_kappa(&[2, 1, 0], &[0, 1, 2], 3).unwrap();
        assert!((kappa + 1.0).abs() < 1e-12, "{kappa}");
    }

    #[test]
    fn kappa_single_repeated_class_is_perfect() {
        assert_eq!(quadratic_weighted_kappa(&[1, 1], &[1, 1], 3).unwrap(), 1.0);
    }

    #[test]
    fn kappa_constant_disagreement_is_zero() {
        let kappa = quadratic_weighted_kappa(&[0, 0], &[1, 1], 3).unwrap();
        assert!(kappa.abs() < 1e-12);
    }

    /// Literal O/E/w-matrix implementation used as the oracle.
    fn kappa_brute_force(pred: &[usize], gold: &[usize], k: usize) -> Option<f64> {
        let n = pred.len() as f64;
        let mut observed = vec![vec![0.0; k]; k];
        for (&p, &g) in pred.iter().zip(gold) {
            observed[p][g] += 1.0;
        }
        let row: Vec<f64> = observed.iter().map(|r| r.iter().sum()).collect();
        let col: Vec<f64> = (0..k).map(|j| observed.iter().map(|r| r[j]).sum()).collect();
        let mut w = vec![vec![0.0; k]; k];
        for (i, wi) in w.iter_mut().enumerate() {
            for (j, wij) in wi.iter_mut().enumerate() {
                *wij =
                    ((i as f64 - j as f64) * (i as f64 - j as f64)) / (((k - 1) * (k - 1)) as f64);
            }
        }
        let mut num = 0.0;
        let mut den = 0.0;
        for i in 0..k {
            for j in 0..k {
                num += w[i][j] * observed[i][j];
                den += w[i][j] * row[i] * col[j] / n;
            }
        }
        if den == 0.0 {
            return if num == 0.0 { Some(1.0) } else { None };
        }
        Some(1.0 - num / den)
    }

    proptest! {
        #[test]
        fn kappa_matches_brute_force(
            (k, pairs) in (2usize..=7).prop_flat_map(|k| {
                (Just(k), proptest::collection::vec((0..k, 0..k), 1..50))
            })
        ) {
            let pred: Vec<usize> = pairs.iter().map(|p| p.0).collect();
            let gold: Vec<usize> = pairs.iter().map(|p| p.1).collect();
            let ours = quadratic_weighted_kappa(&pred, &gold, k).ok();
            let oracle = kappa_brute_force(&pred, &gold, k);
            match (ours, oracle) {
                (Some(a), Some(b)) => prop_assert!((a - b).abs() < 1e-12),
                (None, None) => {}
                other => prop_assert!(false, "disagree on definedness: {other:?}"),
            }
        }

        #[test]
        fn kappa_invariant_under_relabeling(
            (k, pairs) in (2usize..=7).prop_flat_map(|k| {
                (Just(k), proptest::collection::vec((0..k, 0..k), 1..40))
            })
        ) {
            let pred: Vec<usize> = pairs.iter().map(|p| p.0).collect();
            let gold: Vec<usize> = pairs.iter().map(|p| p.1).collect();
            let flipped_pred: Vec<usize> = pred.iter().map(|&c| k - 1 - c).collect();
            let flipped_gold: Vec<usize> = gold.iter().map(|&c| k - 1 - c).collect();
            let a = quadratic_weighted_kappa(&pred, &gold, k).ok();
            let b = quadratic_weighted_kappa(&flipped_pred, &flipped_gold, k).ok();
            match (a, b) {
                (Some(x), Some(y)) => prop_assert!((x - y).abs() < 1e-12),
                (None, None) => {}
                other => prop_assert!(false, "definedness changed: {other:?}"),
            }
        }

        #[test]
        fn pearson_symmetric_and_affine_invariant(
            data in proptest::collection::vec((-100.0f64..100.0, -100.0f64..100.0), 3..40),
            scale in 0.001f64..50.0,
            shift in -100.0f64..100.0,
        ) {
            let a: Vec<f64> = data.iter().map(|d| d.0).collect();
            let b: Vec<f64> = data.iter().map(|d| d.1).collect();
            if let (Ok(ab), Ok(ba)) = (pearson(&a, &b), pearson(&b, &a)) {
                prop_assert!((ab - ba).abs() < 1e-12);
                let a2: Vec<f64> = a.iter().map(|v| v * scale + shift).collect();
                let r2 = pearson(&a2, &b).unwrap();
                prop_assert!((ab - r2).abs() < 1e-9, "{ab} vs {r2}");
            }
        }
    }

    #[test]
    fn k2_quadratic_kappa_equals_unweighted_cohen() {
        use rand::Rng;
        use rand_chacha::rand_core::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(31);
        let mut compared = 0;
        for _ in 0..100 {
            let n = rng.random_range(2..40);
            let pred: Vec<usize> = (0..n).map(|_| rng.random_range(0..2)).collect();
            let gold: Vec<usize> = (0..n).map(|_| rng.random_range(0..2)).collect();
            let quadratic = quadratic_weighted_kappa(&pred, &gold, 2).ok();
            // unweighted Cohen: (po - pe) / (1 - pe)
            let nf = n as f64;
            let po = pred.iter().zip(&gold).filter(|(a, b)| a == b).count() as f64 / nf;
            let mut pe = 0.0;
            for c in 0..2 {
                let pa = pred.iter().filter(|&&v| v == c).count() as f64 / nf;
                let pb = gold.iter().filter(|&&v| v == c).count() as f64 / nf;
                pe += pa * pb;
            }
            let cohen = if (1.0 - pe).abs() < 1e-15 {
                if po == 1.0 {
                    Some(1.0)
                } else {
                    None
                }
            } else {
                Some((po - pe) / (1.0 - pe))
            };
            match (quadratic, cohen) {
                (Some(a), Some(b)) => {
                    assert!((a - b).abs() < 1e-12, "{a} vs {b}");
                    compared += 1;
                }
                (None, None) => {}
                other => panic!("definedness mismatch: {other:?}"),
            }
        }
        assert!(compared >= 80, "only {compared} comparable instances");
    }

    #[test]
    fn ordinal_report_has_all_table_columns() {
        let t = TaskSpec::v_oc();
        let pred = Predictions::Classes(vec![-3, -1, 0, 2, 3]);
        let gold = Predictions::Classes(vec![-3, -1, 0, 2, 3]);
        let report = evaluate(&t, &pred, &gold).unwrap();
        assert!(report.kappa.is_some());
        assert!(report.pearson_se.is_some());
        assert!(report.kappa_se.is_some());
        assert!(report.pearson_high.is_none());
        assert_eq!(report.pearson.value().unwrap(), 1.0);
        assert_eq!(report.kappa.as_ref().unwrap().value().unwrap(), 1.0);
        assert_eq!(report.pearson_se.as_ref().unwrap().1, 4);
    }

    #[test]
    fn regression_report_has_high_subset() {
        let t = TaskSpec::v_reg();
        let pred = Predictions::Reals(vec![0.1, 0.6, 0.8]);
        let gold = Predictions::Reals(vec![0.2, 0.5, 0.9]);
        let report = evaluate(&t, &pred, &gold).unwrap();
        assert!(report.pearson_high.is_some());
        assert!(report.kappa.is_none());
        assert!(report.ma_pearson.is_none());
    }

    #[test]
    fn emotion_report_flags_missing_macro_average() {
        let t = TaskSpec::ei_reg(Dimension::Joy);
        let pred = Predictions::Reals(vec![0.1, 0.6, 0.8]);
        let gold = Predictions::Reals(vec![0.2, 0.5, 0.9]);
        let report = evaluate(&t, &pred, &gold).unwrap();
        assert!(matches!(report.ma_pearson, Some(MetricValue::Undefined(_))));
    }

    #[test]
    fn report_text_is_stable() {
        let t = TaskSpec::v_oc();
        let pred = Predictions::Classes(vec![-3, 0, 1, 3]);
        let gold = Predictions::Classes(vec![-3, 0, 2, 3]);
        let a = evaluate(&t, &pred, &gold).unwrap().to_text();
        let b = evaluate(&t, &pred, &gold).unwrap().to_text();
        assert_eq!(a, b);
        assert!(a.starts_with("task: V-oc\nkind: ordinal\nn: 4\n"), "{a}");
    }

    #[test]
    fn report_text_golden() {
        // perfect agreement makes every value hand-derivable
        let t = TaskSpec::v_oc();
        let labels = Predictions::Classes(vec![-3, -1, 0, 2, 3]);
        let text = evaluate(&t, &labels, &labels).unwrap().to_text();
        let expected = "task: V-oc\n\
                        kind: ordinal\n\
                        n: 5\n\
                        pearson: 1.000000\n\
                        kappa: 1.000000\n\
                        pearson_se: 1.000000\n\
                        pearson_se_n: 4\n\
                        kappa_se: 1.000000\n\
                        kappa_se_n: 4\n";
        assert_eq!(text, expected);
    }
}
