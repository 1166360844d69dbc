use crate::metrics::{FairnessReport, Group, MetricError};

/// Recomputes every metric with one plain loop per quantity and no shared
/// helpers, as a cross-check for [`crate::metrics::full_report`].
///
/// Fails wherever `full_report` fails, though not necessarily with the same
/// error variant.
pub fn naive_oracle(
    preds: &[u8],
    labels: &[u8],
    protected: &[u8],
    weights: &[f64],
) -> Result<FairnessReport, MetricError> {
    let n = preds.len();
    for (what, len) in [
        ("labels", labels.len()),
        ("protected", protected.len()),
        ("weights", weights.len()),
    ] {
        if len != n {
            return Err(MetricError::LengthMismatch {
                what,
                expected: n,
                found: len,
            });
        }
    }
    for i in 0..n {
        if preds[i] > 1 || labels[i] > 1 || protected[i] > 1 {
            return Err(MetricError::NotBinary {
                what: "row",
                index: i,
                value: preds[i].max(labels[i]).max(protected[i]),
            });
        }
        if !(weights[i].is_finite() && weights[i] >= 0.0) {
            return Err(MetricError::BadWeight {
                index: i,
                value: weights[i],
            });
        }
    }
    let undefined = |what| Err(MetricError::UndefinedRate(what));

    // weighted rate of pred == 1 among rows matching `keep`
    let rate = |keep: &dyn Fn(usize) -> bool| -> Option<f64> {
        let mut hit = 0.0;
        let mut all = 0.0;
        for i in 0..n {
            if keep(i) {
                all += weights[i];
                if preds[i] == 1 {
                    hit += weights[i];
                }
            }
        }
        (all > 0.0).then(|| hit / all)
    };

    let Some(tpr) = rate(&|i| labels[i] == 1) else {
        return undefined("TPR");
    };
    let Some(fpr) = rate(&|i| labels[i] == 0) else {
        return undefined("TNR");
    };
    let ba = (tpr + (1.0 - fpr)) / 2.0;

    let Some(sel_p) = rate(&|i| protected[i] == 1) else {
        return Err(MetricError::EmptyGroup(Group::Privileged));
    };
    let Some(sel_u) = rate(&|i| protected[i] == 0) else {
        return Err(MetricError::EmptyGroup(Group::Unprivileged));
    };
    let spd = sel_u - sel_p;
    let di = if sel_p > 0.0 {
        sel_u / sel_p
    } else if sel_u > 0.0 {
        f64::INFINITY
    } else {
        return undefined("DI");
    };

    let group_rate = |g: u8, y: u8| rate(&|i| protected[i] == g && labels[i] == y);
    let (Some(tpr_p), Some(tpr_u)) = (group_rate(1, 1), group_rate(0, 1)) else {
        return undefined("group TPR");
    };
    let (Some(fpr_p), Some(fpr_u)) = (group_rate(1, 0), group_rate(0, 0)) else {
        return undefined("group FPR");
    };
    let aod = 0.5 * ((fpr_u - fpr_p) + (tpr_u - tpr_p));
    let eod = tpr_u - tpr_p;

    if n == 0 {
        return Err(MetricError::Empty);
    }
    let b: Vec<f64> = (0..n).map(|i| preds[i] as f64 - labels[i] as f64 + 1.0).collect();
    let mu = b.iter().sum::<f64>() / n as f64;
    if mu == 0.0 {
        return Err(MetricError::UndefinedIndex);
    }
    let mut ti = 0.0;
    for &bi in &b {
        if bi > 0.0 {
            ti += (bi / mu) * (bi / mu).ln();
        }
    }
    ti /= n as f64;

    Ok(FairnessReport {
        ba,
        spd,
        aod,
        di,
        eod,
        ti,
    })
}
