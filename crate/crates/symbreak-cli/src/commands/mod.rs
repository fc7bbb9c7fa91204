//! Subcommand implementations. Each `run` returns the process exit code:
//! 0 for a full pass, 1 for failed verification, errors bubble up as 2.

pub mod fpspace;
pub mod groebner;
pub mod isotropy;
pub mod survey;
pub mod verify;

use std::path::Path;

use anyhow::{Context, Result};
use symbreak::tensor::WeightMatrix;

/// Entries below this magnitude are numerical dust in stored matrices
/// (appendix tables carry values down to 1e-31 that encode exact zeros).
pub const DUST_TOL: f64 = 1e-12;

/// 17 significant digits, the output convention for every float we print.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn read_matrix(path: &Path) -> Result<WeightMatrix> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading matrix {}", path.display()))?;
    WeightMatrix::from_csv(&text).with_context(|| format!("parsing matrix {}", path.display()))
}

/// Snap dust entries to exact zero before structure detection.
pub fn zero_dust(w: &mut WeightMatrix) {
    for v in w.data_mut() {
        if v.abs() < DUST_TOL {
            *v = 0.0;
        }
    }
}
