use super::encode::{encode, ColumnKind};
use super::{DataError, Dataset, ProtectedAttr, RawTable};

/// Columns of `compas-scores-two-years.csv` that preparation reads.
pub const COMPAS_REQUIRED_COLUMNS: [&str; 14] = [
    "sex",
    "age",
    "age_cat",
    "race",
    "juv_fel_count",
    "juv_misd_count",
    "juv_other_count",
    "priors_count",
    "c_charge_degree",
    "c_charge_desc",
    "days_b_screening_arrest",
    "is_recid",
    "score_text",
    "two_year_recid",
];

/// Screening window, in days, around the arrest date.
const SCREENING_WINDOW: f64 = 30.0;

/// Encodes the ProPublica two-year recidivism table.
///
/// Rows are kept when the screening happened within 30 days of the arrest,
/// `is_recid` is known, the charge degree is not ordinary traffic (`O`), a
/// score text exists and every used cell is non-empty. Label 1 means no
/// recidivism within two years. Privileged is `Caucasian` for race and
/// `Female` for sex.
pub fn prepare_compas(raw: &RawTable, protected_attr: &str) -> Result<Dataset, DataError> {
    let attr: ProtectedAttr = protected_attr.parse()?;
    let idx: Vec<usize> = COMPAS_REQUIRED_COLUMNS
        .iter()
        .map(|c| raw.require(c))
        .collect::<Result<_, _>>()?;
    let col = |name: &str| idx[COMPAS_REQUIRED_COLUMNS.iter().position(|c| *c == name).unwrap()];
    let days = col("days_b_screening_arrest");
    let is_recid = col("is_recid");
    let degree = col("c_charge_degree");
    let score_text = col("score_text");
    let target = col("two_year_recid");
    let (protected_col, privileged) = match attr {
        ProtectedAttr::Race => (col("race"), "Caucasian"),
        ProtectedAttr::Sex => (col("sex"), "Female"),
    };

    let keep: Vec<usize> = raw
        .rows()
        .iter()
        .enumerate()
        .filter(|(_, row)| {
            let in_window = row[days]
                .parse::<f64>()
                .is_ok_and(|d| (-SCREENING_WINDOW..=SCREENING_WINDOW).contains(&d));
            in_window
                && row[is_recid] != "-1"
                && row[degree] != "O"
                && row[score_text] != "N/A"
                && idx.iter().all(|&c| !row[c].is_empty())
        })
        .map(|(i, _)| i)
        .collect();

    use ColumnKind::*;
    let recipe = [
        ("sex", Indicator("Female")),
        ("age", Numeric),
        ("age_cat", Categorical),
        ("race", Indicator("Caucasian")),
        ("juv_fel_count", Numeric),
        ("juv_misd_count", Numeric),
        ("juv_other_count", Numeric),
        ("priors_count", Numeric),
        ("c_charge_degree", Categorical),
        ("c_charge_desc", Categorical),
    ];
    let enc = encode(raw, &keep, &recipe)?;
    let labels = keep.iter().map(|&r| u8::from(raw.rows()[r][target] == "0")).collect();
    let protected = keep
        .iter()
        .map(|&r| u8::from(raw.rows()[r][protected_col] == privileged))
        .collect();
    let ds = Dataset::new(enc.features, labels, protected, enc.names, format!("compas/{attr}"))?;
    Ok(ds.with_numeric_columns(enc.numeric))
}
