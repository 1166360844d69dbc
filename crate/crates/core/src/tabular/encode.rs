use super::io::parse_real;
use super::{DataError, RawTable};
use ndarray::Array2;
use std::collections::BTreeSet;

/// How one source column becomes feature columns.
pub(crate) enum ColumnKind {
    /// Parsed as a real and later standardized.
    Numeric,
    /// One indicator per distinct value, in sorted value order.
    Categorical,
    /// Single 0/1 column: 1 when the cell equals the given value.
    Indicator(&'static str),
}

pub(crate) struct Encoded {
    pub features: Array2<f64>,
    pub names: Vec<String>,
    pub numeric: Vec<usize>,
}

/// Encodes `rows` (indices into `table`) using the given column recipe.
pub(crate) fn encode(table: &RawTable, rows: &[usize], recipe: &[(&str, ColumnKind)]) -> Result<Encoded, DataError> {
    struct Plan {
        source: usize,
        kind: PlanKind,
    }
    enum PlanKind {
        Numeric,
        Categorical(Vec<String>),
        Indicator(&'static str),
    }

    let mut plans = Vec::with_capacity(recipe.len());
    let mut names = Vec::new();
    let mut numeric = Vec::new();
    for (name, kind) in recipe {
        let source = table.require(name)?;
        let kind = match kind {
            ColumnKind::Numeric => {
                numeric.push(names.len());
                names.push(name.to_string());
                PlanKind::Numeric
            }
            ColumnKind::Indicator(value) => {
                names.push(name.to_string());
                PlanKind::Indicator(value)
            }
            ColumnKind::Categorical => {
                let levels: BTreeSet<&str> = rows.iter().map(|&r| table.rows()[r][source].as_str()).collect();
                let levels: Vec<String> = levels.into_iter().map(str::to_string).collect();
                names.extend(levels.iter().map(|l| format!("{name}={l}")));
                PlanKind::Categorical(levels)
            }
        };
        plans.push(Plan { source, kind });
    }

    let mut features = Array2::zeros((rows.len(), names.len()));
    for (i, &r) in rows.iter().enumerate() {
        let row = &table.rows()[r];
        let mut col = 0;
        for plan in &plans {
            let cell = row[plan.source].as_str();
            match &plan.kind {
                PlanKind::Numeric => {
                    features[[i, col]] = parse_real(cell, r + 1, &table.columns()[plan.source])?;
                    col += 1;
                }
                PlanKind::Indicator(value) => {
                    features[[i, col]] = f64::from(u8::from(cell == *value));
                    col += 1;
                }
                PlanKind::Categorical(levels) => {
                    // levels were collected from these same rows
                    let k = levels.binary_search_by(|l| l.as_str().cmp(cell)).unwrap();
                    features[[i, col + k]] = 1.0;
                    col += levels.len();
                }
            }
        }
    }
    Ok(Encoded {
        features,
        names,
        numeric,
    })
}
