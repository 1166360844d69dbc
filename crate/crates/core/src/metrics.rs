//! Balanced accuracy and group fairness metrics over binary predictions.
//!
//! Conventions: label/prediction 1 is the favorable outcome, protected 1 is
//! the privileged group. All difference metrics are "unprivileged minus
//! privileged", so negative values mean the privileged group is favored.
//! (For SPD this is the reading of the formula `p_up - p_p`; prose that
//! describes negative SPD as benefiting the unprivileged group has the
//! sign backwards.)
//!
//! Every metric except the Theil index accepts per-row weights. The Theil
//! index is unweighted.

use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MetricError {
    #[error("length mismatch: {what} has {found} entries, expected {expected}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("{what}[{index}] must be 0 or 1, found {value}")]
    NotBinary {
        what: &'static str,
        index: usize,
        value: u8,
    },
    #[error("weight[{index}] = {value} is not a finite non-negative real")]
    BadWeight { index: usize, value: f64 },
    #[error("{0} group has no mass")]
    EmptyGroup(Group),
    #[error("undefined rate: {0} has a zero denominator")]
    UndefinedRate(&'static str),
    #[error("undefined Theil index: mean benefit is zero")]
    UndefinedIndex,
    #[error("empty input")]
    Empty,
    #[error("{metric}: {source}")]
    InMetric {
        metric: Metric,
        #[source]
        source: Box<MetricError>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Group {
    Privileged,
    Unprivileged,
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Group::Privileged => "privileged",
            Group::Unprivileged => "unprivileged",
        })
    }
}

/// The six reported quantities, in table order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Metric {
    Ba,
    Spd,
    Aod,
    Di,
    Eod,
    Ti,
}

impl Metric {
    pub const ALL: [Metric; 6] = [
        Metric::Ba,
        Metric::Spd,
        Metric::Aod,
        Metric::Di,
        Metric::Eod,
        Metric::Ti,
    ];

    pub fn key(self) -> &'static str {
        match self {
            Metric::Ba => "ba",
            Metric::Spd => "spd",
            Metric::Aod => "aod",
            Metric::Di => "di",
            Metric::Eod => "eod",
            Metric::Ti => "ti",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.key().to_ascii_uppercase())
    }
}

/// Weighted confusion cells for one group.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: f64,
    pub fp: f64,
    pub tn: f64,
    pub fn_: f64,
}

impl Confusion {
    pub fn mass(&self) -> f64 {
        self.tp + self.fp + self.tn + self.fn_
    }

    pub fn tpr(&self) -> Result<f64, MetricError> {
        ratio(self.tp, self.tp + self.fn_, "TPR")
    }

    pub fn fpr(&self) -> Result<f64, MetricError> {
        ratio(self.fp, self.fp + self.tn, "FPR")
    }

    pub fn tnr(&self) -> Result<f64, MetricError> {
        ratio(self.tn, self.fp + self.tn, "TNR")
    }

    fn add(&mut self, pred: u8, label: u8, w: f64) {
        match (label, pred) {
            (1, 1) => self.tp += w,
            (1, _) => self.fn_ += w,
            (_, 1) => self.fp += w,
            _ => self.tn += w,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct GroupConfusion {
    pub privileged: Confusion,
    pub unprivileged: Confusion,
}

impl GroupConfusion {
    pub fn group(&self, g: Group) -> &Confusion {
        match g {
            Group::Privileged => &self.privileged,
            Group::Unprivileged => &self.unprivileged,
        }
    }

    pub fn pooled(&self) -> Confusion {
        let (p, u) = (&self.privileged, &self.unprivileged);
        Confusion {
            tp: p.tp + u.tp,
            fp: p.fp + u.fp,
            tn: p.tn + u.tn,
            fn_: p.fn_ + u.fn_,
        }
    }
}

fn ratio(num: f64, den: f64, what: &'static str) -> Result<f64, MetricError> {
    if den > 0.0 {
        Ok(num / den)
    } else {
        Err(MetricError::UndefinedRate(what))
    }
}

fn check_len(what: &'static str, expected: usize, found: usize) -> Result<(), MetricError> {
    if expected == found {
        Ok(())
    } else {
        Err(MetricError::LengthMismatch { what, expected, found })
    }
}

fn check_binary(what: &'static str, v: &[u8]) -> Result<(), MetricError> {
    match v.iter().position(|&x| x > 1) {
        Some(index) => Err(MetricError::NotBinary {
            what,
            index,
            value: v[index],
        }),
        None => Ok(()),
    }
}

fn check_weights(w: &[f64]) -> Result<(), MetricError> {
    match w.iter().position(|x| !(x.is_finite() && *x >= 0.0)) {
        Some(index) => Err(MetricError::BadWeight { index, value: w[index] }),
        None => Ok(()),
    }
}

/// Weighted confusion tallies per protected group.
pub fn confusion(
    preds: &[u8],
    labels: &[u8],
    protected: &[u8],
    weights: &[f64],
) -> Result<GroupConfusion, MetricError> {
    let n = preds.len();
    check_len("labels", n, labels.len())?;
    check_len("protected", n, protected.len())?;
    check_len("weights", n, weights.len())?;
    check_binary("preds", preds)?;
    check_binary("labels", labels)?;
    check_binary("protected", protected)?;
    check_weights(weights)?;
    let mut out = GroupConfusion::default();
    for i in 0..n {
        let cell = if protected[i] == 1 {
            &mut out.privileged
        } else {
            &mut out.unprivileged
        };
        cell.add(preds[i], labels[i], weights[i]);
    }
    Ok(out)
}

/// Mean of sensitivity and specificity over all rows.
pub fn balanced_accuracy(preds: &[u8], labels: &[u8], weights: &[f64]) -> Result<f64, MetricError> {
    let protected = vec![1u8; preds.len()];
    let pooled = confusion(preds, labels, &protected, weights)?.pooled();
    Ok((pooled.tpr()? + pooled.tnr()?) / 2.0)
}

/// Weighted favorable-prediction rate per group: (privileged, unprivileged).
fn positive_rates(preds: &[u8], protected: &[u8], weights: &[f64]) -> Result<(f64, f64), MetricError> {
    let n = preds.len();
    check_len("protected", n, protected.len())?;
    check_len("weights", n, weights.len())?;
    check_binary("preds", preds)?;
    check_binary("protected", protected)?;
    check_weights(weights)?;
    let mut pos = [0.0f64; 2];
    let mut mass = [0.0f64; 2];
    for i in 0..n {
        let g = protected[i] as usize;
        mass[g] += weights[i];
        if preds[i] == 1 {
            pos[g] += weights[i];
        }
    }
    if mass[1] <= 0.0 {
        return Err(MetricError::EmptyGroup(Group::Privileged));
    }
    if mass[0] <= 0.0 {
        return Err(MetricError::EmptyGroup(Group::Unprivileged));
    }
    Ok((pos[1] / mass[1], pos[0] / mass[0]))
}

/// Ratio of favorable-prediction rates, unprivileged over privileged.
///
/// Returns `f64::INFINITY` when only the privileged rate is zero and an
/// error when both are.
pub fn disparate_impact(preds: &[u8], protected: &[u8], weights: &[f64]) -> Result<f64, MetricError> {
    let (p, up) = positive_rates(preds, protected, weights)?;
    if p > 0.0 {
        Ok(up / p)
    } else if up > 0.0 {
        Ok(f64::INFINITY)
    } else {
        Err(MetricError::UndefinedRate("disparate impact (both rates zero)"))
    }
}

/// Difference of favorable-prediction rates, unprivileged minus privileged.
pub fn statistical_parity_difference(preds: &[u8], protected: &[u8], weights: &[f64]) -> Result<f64, MetricError> {
    let (p, up) = positive_rates(preds, protected, weights)?;
    Ok(up - p)
}

pub fn average_odds_difference(conf: &GroupConfusion) -> Result<f64, MetricError> {
    let (p, up) = (&conf.privileged, &conf.unprivileged);
    Ok(((up.fpr()? - p.fpr()?) + (up.tpr()? - p.tpr()?)) / 2.0)
}

pub fn equal_opportunity_difference(conf: &GroupConfusion) -> Result<f64, MetricError> {
    Ok(conf.unprivileged.tpr()? - conf.privileged.tpr()?)
}

/// Generalized entropy index with alpha = 1 over the benefits
/// `b_i = pred_i - label_i + 1`.
pub fn theil_index(preds: &[u8], labels: &[u8]) -> Result<f64, MetricError> {
    let n = preds.len();
    check_len("labels", n, labels.len())?;
    check_binary("preds", preds)?;
    check_binary("labels", labels)?;
    if n == 0 {
        return Err(MetricError::Empty);
    }
    // b takes only the values 0, 1, 2
    let mut counts = [0usize; 3];
    for (&p, &y) in preds.iter().zip(labels) {
        counts[(p + 1 - y) as usize] += 1;
    }
    let mu = (counts[1] + 2 * counts[2]) as f64 / n as f64;
    if mu == 0.0 {
        return Err(MetricError::UndefinedIndex);
    }
    let term = |b: f64| {
        let r = b / mu;
        r * r.ln()
    };
    Ok((counts[1] as f64 * term(1.0) + counts[2] as f64 * term(2.0)) / n as f64)
}

/// Balanced accuracy plus the five fairness metrics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FairnessReport {
    pub ba: f64,
    pub spd: f64,
    pub aod: f64,
    #[serde(with = "inf_as_string")]
    pub di: f64,
    pub eod: f64,
    pub ti: f64,
}

impl FairnessReport {
    pub fn get(&self, m: Metric) -> f64 {
        match m {
            Metric::Ba => self.ba,
            Metric::Spd => self.spd,
            Metric::Aod => self.aod,
            Metric::Di => self.di,
            Metric::Eod => self.eod,
            Metric::Ti => self.ti,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

fn tag<T>(metric: Metric, r: Result<T, MetricError>) -> Result<T, MetricError> {
    r.map_err(|e| MetricError::InMetric {
        metric,
        source: Box::new(e),
    })
}

/// All six metrics; the first failure is returned tagged with its metric.
pub fn full_report(
    preds: &[u8],
    labels: &[u8],
    protected: &[u8],
    weights: &[f64],
) -> Result<FairnessReport, MetricError> {
    let conf = confusion(preds, labels, protected, weights)?;
    Ok(FairnessReport {
        ba: tag(Metric::Ba, balanced_accuracy(preds, labels, weights))?,
        spd: tag(Metric::Spd, statistical_parity_difference(preds, protected, weights))?,
        aod: tag(Metric::Aod, average_odds_difference(&conf))?,
        di: tag(Metric::Di, disparate_impact(preds, protected, weights))?,
        eod: tag(Metric::Eod, equal_opportunity_difference(&conf))?,
        ti: tag(Metric::Ti, theil_index(preds, labels))?,
    })
}

/// Like [`FairnessReport`] but each metric may be missing when undefined
/// for the given predictions.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct PartialReport {
    pub ba: Option<f64>,
    pub spd: Option<f64>,
    pub aod: Option<f64>,
    #[serde(with = "opt_inf_as_string")]
    pub di: Option<f64>,
    pub eod: Option<f64>,
    pub ti: Option<f64>,
}

impl PartialReport {
    pub fn get(&self, m: Metric) -> Option<f64> {
        match m {
            Metric::Ba => self.ba,
            Metric::Spd => self.spd,
            Metric::Aod => self.aod,
            Metric::Di => self.di,
            Metric::Eod => self.eod,
            Metric::Ti => self.ti,
        }
    }

    /// The full report, when every metric is defined.
    pub fn complete(&self) -> Option<FairnessReport> {
        Some(FairnessReport {
            ba: self.ba?,
            spd: self.spd?,
            aod: self.aod?,
            di: self.di?,
            eod: self.eod?,
            ti: self.ti?,
        })
    }
}

impl From<FairnessReport> for PartialReport {
    fn from(r: FairnessReport) -> Self {
        PartialReport {
            ba: Some(r.ba),
            spd: Some(r.spd),
            aod: Some(r.aod),
            di: Some(r.di),
            eod: Some(r.eod),
            ti: Some(r.ti),
        }
    }
}

/// Computes each metric independently, leaving undefined ones empty.
/// Input-shape errors (lengths, non-binary values) still fail.
pub fn partial_report(
    preds: &[u8],
    labels: &[u8],
    protected: &[u8],
    weights: &[f64],
) -> Result<PartialReport, MetricError> {
    let conf = confusion(preds, labels, protected, weights)?;
    Ok(PartialReport {
        ba: balanced_accuracy(preds, labels, weights).ok(),
        spd: statistical_parity_difference(preds, protected, weights).ok(),
        aod: average_odds_difference(&conf).ok(),
        di: disparate_impact(preds, protected, weights).ok(),
        eod: equal_opportunity_difference(&conf).ok(),
        ti: theil_index(preds, labels).ok(),
    })
}

/// Formats a metric value with four decimals, rendering infinity as `inf`.
pub fn format_value(v: f64) -> String {
    if v.is_infinite() && v > 0.0 {
        "inf".to_string()
    } else {
        format!("{v:.4}")
    }
}

mod inf_as_string {
    use serde::de::{self, Deserializer, Visitor};
    use serde::Serializer;
    use std::fmt;

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_infinite() && *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*v)
        }
    }

    pub(super) struct InfVisitor;

    impl Visitor<'_> for InfVisitor {
        type Value = f64;

        fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
            f.write_str("a number or the string \"inf\"")
        }

        fn visit_f64<E: de::Error>(self, v: f64) -> Result<f64, E> {
            Ok(v)
        }

        fn visit_i64<E: de::Error>(self, v: i64) -> Result<f64, E> {
            Ok(v as f64)
        }

        fn visit_u64<E: de::Error>(self, v: u64) -> Result<f64, E> {
            Ok(v as f64)
        }

        fn visit_str<E: de::Error>(self, v: &str) -> Result<f64, E> {
            match v {
                "inf" => Ok(f64::INFINITY),
                other => Err(E::invalid_value(de::Unexpected::Str(other), &self)),
            }
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        d.deserialize_any(InfVisitor)
    }
}

mod opt_inf_as_string {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(x) => super::inf_as_string::serialize(x, s),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
        #[derive(Deserialize)]
        struct Wrap(#[serde(with = "super::inf_as_string")] f64);
        Ok(Option::<Wrap>::deserialize(d)?.map(|w| w.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ones(n: usize) -> Vec<f64> {
        vec![1.0; n]
    }

    /// Predictions giving a chosen favorable rate in each group of ten.
    fn rated(pp: usize, pup: usize) -> (Vec<u8>, Vec<u8>) {
        let mut preds = Vec::new();
        let mut prot = Vec::new();
        for i in 0..10 {
            preds.push(u8::from(i < pp));
            prot.push(1);
        }
        for i in 0..10 {
            preds.push(u8::from(i < pup));
            prot.push(0);
        }
        (preds, prot)
    }

    #[test]
    fn confusion_tallies() {
        let labels = [1, 0, 1, 0];
        let conf = confusion(&labels, &labels, &[1, 1, 0, 0], &ones(4)).unwrap();
        assert_eq!(conf.privileged.fp + conf.privileged.fn_, 0.0);
        assert_eq!(conf.unprivileged.fp + conf.unprivileged.fn_, 0.0);

        let conf = confusion(&[1, 1, 0, 0], &[1, 0, 0, 1], &[1, 1, 1, 1], &ones(4)).unwrap();
        assert_eq!(conf.privileged.fp, 1.0);

        let doubled = confusion(&[1, 1, 0, 0], &[1, 0, 0, 1], &[1, 1, 0, 1], &[2.0; 4]).unwrap();
        let single = confusion(&[1, 1, 0, 0], &[1, 0, 0, 1], &[1, 1, 0, 1], &ones(4)).unwrap();
        assert_eq!(doubled.privileged.tp, 2.0 * single.privileged.tp);
        assert_eq!(doubled.unprivileged.tn, 2.0 * single.unprivileged.tn);
        assert_eq!(doubled.privileged.fn_, 2.0 * single.privileged.fn_);
    }

    #[test]
    fn confusion_length_mismatch() {
        assert!(matches!(
            confusion(&[1], &[1, 0], &[1], &[1.0]),
            Err(MetricError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn balanced_accuracy_examples() {
        assert_eq!(balanced_accuracy(&[1, 0, 1], &[1, 0, 1], &ones(3)).unwrap(), 1.0);
        assert_eq!(balanced_accuracy(&[1, 1, 1, 1], &[1, 1, 0, 0], &ones(4)).unwrap(), 0.5);
        assert_eq!(balanced_accuracy(&[1, 0, 0, 0], &[1, 1, 0, 0], &ones(4)).unwrap(), 0.75);
        assert!(matches!(
            balanced_accuracy(&[1, 0], &[1, 1], &ones(2)),
            Err(MetricError::UndefinedRate(_))
        ));
    }

    #[test]
    fn disparate_impact_examples() {
        let (preds, prot) = rated(6, 3);
        assert!((disparate_impact(&preds, &prot, &ones(20)).unwrap() - 0.5).abs() < 1e-15);
        let (preds, prot) = rated(4, 4);
        assert_eq!(disparate_impact(&preds, &prot, &ones(20)).unwrap(), 1.0);
        let (preds, prot) = rated(0, 2);
        assert_eq!(disparate_impact(&preds, &prot, &ones(20)).unwrap(), f64::INFINITY);
        let (preds, prot) = rated(0, 0);
        assert!(matches!(
            disparate_impact(&preds, &prot, &ones(20)),
            Err(MetricError::UndefinedRate(_))
        ));
        assert!(matches!(
            disparate_impact(&[1, 0], &[1, 1], &ones(2)),
            Err(MetricError::EmptyGroup(Group::Unprivileged))
        ));
    }

    #[test]
    fn statistical_parity_examples() {
        let (preds, prot) = rated(6, 3);
        assert!((statistical_parity_difference(&preds, &prot, &ones(20)).unwrap() + 0.3).abs() < 1e-15);
        let (preds, prot) = rated(5, 5);
        assert_eq!(statistical_parity_difference(&preds, &prot, &ones(20)).unwrap(), 0.0);
        let (preds, prot) = rated(0, 10);
        assert_eq!(statistical_parity_difference(&preds, &prot, &ones(20)).unwrap(), 1.0);
    }

    fn conf_with(fpr_up: f64, fpr_p: f64, tpr_up: f64, tpr_p: f64) -> GroupConfusion {
        let c = |fpr: f64, tpr: f64| Confusion {
            tp: tpr * 10.0,
            fn_: (1.0 - tpr) * 10.0,
            fp: fpr * 10.0,
            tn: (1.0 - fpr) * 10.0,
        };
        GroupConfusion {
            privileged: c(fpr_p, tpr_p),
            unprivileged: c(fpr_up, tpr_up),
        }
    }

    #[test]
    fn average_odds_examples() {
        assert_eq!(average_odds_difference(&conf_with(0.3, 0.3, 0.6, 0.6)).unwrap(), 0.0);
        let v = average_odds_difference(&conf_with(0.2, 0.4, 0.5, 0.7)).unwrap();
        assert!((v + 0.2).abs() < 1e-12);
        assert_eq!(average_odds_difference(&conf_with(0.0, 0.0, 1.0, 1.0)).unwrap(), 0.0);
        let mut missing = conf_with(0.2, 0.4, 0.5, 0.7);
        missing.unprivileged.fp = 0.0;
        missing.unprivileged.tn = 0.0;
        assert!(matches!(
            average_odds_difference(&missing),
            Err(MetricError::UndefinedRate("FPR"))
        ));
    }

    #[test]
    fn equal_opportunity_examples() {
        let v = equal_opportunity_difference(&conf_with(0.2, 0.4, 0.5, 0.7)).unwrap();
        assert!((v + 0.2).abs() < 1e-12);
        assert_eq!(
            equal_opportunity_difference(&conf_with(0.1, 0.9, 0.4, 0.4)).unwrap(),
            0.0
        );
        assert_eq!(
            equal_opportunity_difference(&conf_with(0.1, 0.9, 1.0, 0.0)).unwrap(),
            1.0
        );
    }

    #[test]
    fn theil_examples() {
        assert_eq!(theil_index(&[1, 0, 1], &[1, 0, 1]).unwrap(), 0.0);
        let ti = theil_index(&[1, 1, 1, 1], &[1, 1, 1, 0]).unwrap();
        let oracle = (3.0 * 0.8 * 0.8f64.ln() + 1.6 * 1.6f64.ln()) / 4.0;
        assert!((ti - oracle).abs() < 1e-15);
        assert!((ti - 0.0541).abs() < 1e-4);
        assert!(matches!(theil_index(&[0], &[1]), Err(MetricError::UndefinedIndex)));
    }

    #[test]
    fn full_report_fixed_point() {
        let labels = [1, 0, 1, 0];
        let r = full_report(&labels, &labels, &[1, 1, 0, 0], &ones(4)).unwrap();
        assert_eq!(
            r,
            FairnessReport {
                ba: 1.0,
                spd: 0.0,
                aod: 0.0,
                di: 1.0,
                eod: 0.0,
                ti: 0.0
            }
        );
    }

    #[test]
    fn full_report_names_failing_metric() {
        // unprivileged group has no negatives, so FPR is undefined there
        let err = full_report(&[1, 0, 1], &[1, 0, 1], &[1, 1, 0], &ones(3)).unwrap_err();
        match err {
            MetricError::InMetric { metric, .. } => assert_eq!(metric, Metric::Aod),
            other => panic!("unexpected {other:?}"),
        }
        assert!(err.to_string().starts_with("AOD"));
    }

    #[test]
    fn json_encodes_infinity_as_string() {
        let r = FairnessReport {
            ba: 0.5,
            spd: 0.2,
            aod: 0.0,
            di: f64::INFINITY,
            eod: 0.0,
            ti: 0.1,
        };
        let s = r.to_json();
        assert!(s.contains("\"di\":\"inf\""));
        let back: FairnessReport = serde_json::from_str(&s).unwrap();
        assert_eq!(back, r);
        let p = PartialReport::from(r);
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(serde_json::from_str::<PartialReport>(&s).unwrap(), p);
        let empty = serde_json::to_string(&PartialReport::default()).unwrap();
        assert_eq!(
            serde_json::from_str::<PartialReport>(&empty).unwrap(),
            PartialReport::default()
        );
    }

    #[test]
    fn format_value_four_decimals() {
        assert_eq!(format_value(0.73904), "0.7390");
        assert_eq!(format_value(-0.1), "-0.1000");
        assert_eq!(format_value(f64::INFINITY), "inf");
    }
}
