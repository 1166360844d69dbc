//! Reweighing: per-row weights that make label and protected group
//! statistically independent under the weighted distribution.
//!
//! Each (label, group) cell gets the weight `expected / observed`, where
//! `expected = n_group * n_label / n_total` is the cell size under
//! independence. For the favorable-privileged cell this is
//! `(n_p / n_total) * (n_pos / n_pp)`, and symmetrically for the other three
//! cells. The unfavorable-unprivileged cell divides by `n_nup`; dividing by
//! the group size `n_up` instead would break both mass preservation and the
//! independence property.
//!
//! Coefficients always come from unweighted row counts, so applying the
//! transform twice squares each row's coefficient rather than being a no-op.

use crate::tabular::{count_groups, DataError, Dataset, GroupCounts};
use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Debug, thiserror::Error)]
pub enum ReweighError {
    #[error("degenerate group: cell `{0}` is empty")]
    DegenerateGroup(Cell),
    #[error(transparent)]
    Data(#[from] DataError),
}

/// One of the four (label, group) cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cell {
    PositivePrivileged,
    PositiveUnprivileged,
    NegativePrivileged,
    NegativeUnprivileged,
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Cell::PositivePrivileged => "n_pp",
            Cell::PositiveUnprivileged => "n_pup",
            Cell::NegativePrivileged => "n_np",
            Cell::NegativeUnprivileged => "n_nup",
        })
    }
}

/// Reweighing coefficients for the four (label, group) cells.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FourWeights {
    pub w_pp: f64,
    pub w_pup: f64,
    pub w_np: f64,
    pub w_nup: f64,
}

impl FourWeights {
    /// Coefficient for a row with the given label and protected value.
    pub fn for_row(&self, label: u8, protected: u8) -> f64 {
        match (label, protected) {
            (1, 1) => self.w_pp,
            (1, _) => self.w_pup,
            (_, 1) => self.w_np,
            _ => self.w_nup,
        }
    }
}

pub fn compute_weights(counts: &GroupCounts) -> Result<FourWeights, ReweighError> {
    for (n, cell) in [
        (counts.n_pp, Cell::PositivePrivileged),
        (counts.n_pup, Cell::PositiveUnprivileged),
        (counts.n_np, Cell::NegativePrivileged),
        (counts.n_nup, Cell::NegativeUnprivileged),
    ] {
        if n == 0 {
            return Err(ReweighError::DegenerateGroup(cell));
        }
    }
    let total = counts.n_total as f64;
    let p = counts.n_p as f64 / total;
    let up = counts.n_up as f64 / total;
    let pos = counts.n_pos as f64;
    let neg = counts.n_neg as f64;
    Ok(FourWeights {
        w_pp: p * pos / counts.n_pp as f64,
        w_pup: up * pos / counts.n_pup as f64,
        w_np: p * neg / counts.n_np as f64,
        w_nup: up * neg / counts.n_nup as f64,
    })
}

/// Multiplies each row's weight by its cell coefficient. Features, labels and
/// group membership are left untouched.
pub fn apply(ds: &Dataset) -> Result<Dataset, ReweighError> {
    let coeffs = compute_weights(&count_groups(ds))?;
    let weights = ds
        .labels()
        .iter()
        .zip(ds.protected())
        .zip(ds.weights())
        .map(|((&y, &a), &w)| coeffs.for_row(y, a) * w)
        .collect();
    Ok(ds.with_weights(weights)?)
}
