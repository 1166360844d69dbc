use super::encode::{encode, ColumnKind};
use super::io::load_csv_with;
use super::{DataError, Dataset, ProtectedAttr, RawTable};
use std::path::Path;

/// Column names of the UCI Adult files, which ship without a header.
pub const ADULT_COLUMNS: [&str; 15] = [
    "age",
    "workclass",
    "fnlwgt",
    "education",
    "education-num",
    "marital-status",
    "occupation",
    "relationship",
    "race",
    "sex",
    "capital-gain",
    "capital-loss",
    "hours-per-week",
    "native-country",
    "income",
];

const MISSING: &str = "?";

/// Reads `adult.data` and `adult.test` from `dir` into one table with the
/// [`ADULT_COLUMNS`] names. The test file's leading `|1x3 Cross validator`
/// line is skipped.
pub fn load_adult_dir(dir: impl AsRef<Path>) -> Result<RawTable, DataError> {
    let dir = dir.as_ref();
    let names: Vec<String> = ADULT_COLUMNS.iter().map(|s| s.to_string()).collect();
    let train = load_csv_with(dir.join("adult.data"), false, Some(b'|'))?.rename_columns(names.clone())?;
    let test = load_csv_with(dir.join("adult.test"), false, Some(b'|'))?.rename_columns(names)?;
    train.concat(test)
}

/// Encodes the Adult census table.
///
/// Label 1 means income above 50K. Privileged is `White` for race and `Male`
/// for sex; both attributes are also kept as 0/1 features. Rows with a `?`
/// cell are dropped. Categorical columns are one-hot encoded; the six
/// numeric columns are left raw and listed in
/// [`Dataset::numeric_columns`] so they can be standardized with
/// training-split statistics.
pub fn prepare_adult(raw: &RawTable, protected_attr: &str) -> Result<Dataset, DataError> {
    let attr: ProtectedAttr = protected_attr.parse()?;
    let idx: Vec<usize> = ADULT_COLUMNS.iter().map(|c| raw.require(c)).collect::<Result<_, _>>()?;
    let income = idx[14];
    let protected_col = match attr {
        ProtectedAttr::Race => raw.require("race")?,
        ProtectedAttr::Sex => raw.require("sex")?,
    };
    let privileged = match attr {
        ProtectedAttr::Race => "White",
        ProtectedAttr::Sex => "Male",
    };

    let keep: Vec<usize> = raw
        .rows()
        .iter()
        .enumerate()
        .filter(|(_, row)| !idx.iter().any(|&c| row[c] == MISSING))
        .map(|(i, _)| i)
        .collect();

    use ColumnKind::*;
    let recipe = [
        ("age", Numeric),
        ("workclass", Categorical),
        ("fnlwgt", Numeric),
        ("education", Categorical),
        ("education-num", Numeric),
        ("marital-status", Categorical),
        ("occupation", Categorical),
        ("relationship", Categorical),
        ("race", Indicator("White")),
        ("sex", Indicator("Male")),
        ("capital-gain", Numeric),
        ("capital-loss", Numeric),
        ("hours-per-week", Numeric),
        ("native-country", Categorical),
    ];
    let enc = encode(raw, &keep, &recipe)?;

    let labels = keep
        .iter()
        .map(|&r| u8::from(raw.rows()[r][income].starts_with(">50K")))
        .collect();
    let protected = keep
        .iter()
        .map(|&r| u8::from(raw.rows()[r][protected_col] == privileged))
        .collect();
    let ds = Dataset::new(enc.features, labels, protected, enc.names, format!("adult/{attr}"))?;
    Ok(ds.with_numeric_columns(enc.numeric))
}
