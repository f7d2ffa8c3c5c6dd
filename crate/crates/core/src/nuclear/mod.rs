//! Few-nucleon Hamiltonians read from disk, the two-nucleon contact
//! potential and model-space extrapolation.
//!
//! A problem is a matrix file (`*.mat`, sparse or dense, see [`crate::io`])
//! with a TOML sidecar of the same stem:
//!
//! ```toml
//! nucleus = "3H"
//! n_max = 2
//! l_fm = 9.76
//! hbar_omega = 22.0
//! units = "MeV"
//! threshold = -2.2246   # optional, E∞ of the A − 1 system
//! systematic = 0.001    # optional, relative systematic band
//! ```

mod extrap;
mod phase;

use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::io::read_matrix;
use crate::linalg::{exact_ground, HermitianOperator};
use crate::{Error, Result};

pub use extrap::{extrapolate, extrapolation_model, k_infinity, BandPoint, ExtrapolationFit, ExtrapolationOptions};
pub use phase::{
    bound_state_energies, calibrate_normalization, calibrated_couplings, nn_phase_shift, pole_determinant,
    principal_integrals, s_matrix, scattering_length, t_matrix, ChannelCouplings, PartialWave, DEUTERON_BINDING,
    HBARC, NUCLEON_MASS,
};

/// Sidecar contents.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemMetadata {
    pub nucleus: String,
    pub n_max: u32,
    pub l_fm: f64,
    pub hbar_omega: f64,
    pub units: String,
    #[serde(default)]
    pub threshold: Option<f64>,
    #[serde(default)]
    pub systematic: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NuclearProblem {
    pub label: String,
    pub n_max: u32,
    /// Effective extent of the model space, fm.
    pub l_fm: f64,
    pub hbar_omega: f64,
    /// MeV.
    pub h: HermitianOperator,
    pub threshold: Option<f64>,
    pub systematic: f64,
}

impl NuclearProblem {
    pub fn dim(&self) -> usize {
        self.h.dim()
    }

    pub fn exact_energy(&self) -> f64 {
        exact_ground(&self.h).0
    }
}

/// Relative systematic band by model-space size: 0.1 %, 0.5 % and 1 % for
/// `N_max = 2, 4, 6`.
pub fn default_systematic(n_max: u32) -> f64 {
    match n_max {
        0..=2 => 0.001,
        3..=4 => 0.005,
        _ => 0.01,
    }
}

pub fn parse_metadata(text: &str) -> Result<ProblemMetadata> {
    let m: ProblemMetadata = toml::from_str(text).map_err(|e| Error::Parse(format!("metadata: {e}")))?;
    if !(m.l_fm > 0.0) || !m.l_fm.is_finite() {
        return Err(Error::Parse(format!("metadata: l_fm must be positive, got {}", m.l_fm)));
    }
    if !(m.hbar_omega > 0.0) {
        return Err(Error::Parse("metadata: hbar_omega must be positive".into()));
    }
    if m.units != "MeV" {
        return Err(Error::Parse(format!("metadata: unsupported units {:?}", m.units)));
    }
    if m.systematic.is_some_and(|s| !(0.0..1.0).contains(&s)) {
        return Err(Error::Parse("metadata: systematic must lie in [0, 1)".into()));
    }
    Ok(m)
}

pub fn load_problem(matrix: &Path, metadata: &Path) -> Result<NuclearProblem> {
    let text = std::fs::read_to_string(metadata)
        .map_err(|e| Error::MissingEntry(format!("metadata {}: {e}", metadata.display())))?;
    let meta = parse_metadata(&text)?;
    let h = read_matrix(BufReader::new(File::open(matrix)?))?;
    Ok(NuclearProblem {
        label: meta.nucleus,
        n_max: meta.n_max,
        l_fm: meta.l_fm,
        hbar_omega: meta.hbar_omega,
        h,
        threshold: meta.threshold,
        systematic: meta.systematic.unwrap_or_else(|| default_systematic(meta.n_max)),
    })
}

/// Loads `matrix` with the sidecar `matrix.toml`.
pub fn load_problem_with_sidecar(matrix: &Path) -> Result<NuclearProblem> {
    load_problem(matrix, &matrix.with_extension("toml"))
}

/// Every `*.mat` file in `dir`, sorted by nucleus then `N_max`.
pub fn load_problem_dir(dir: &Path) -> Result<Vec<NuclearProblem>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "mat"))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(Error::MissingEntry(format!("no .mat files in {}", dir.display())));
    }
    let mut out = files.iter().map(|f| load_problem_with_sidecar(f)).collect::<Result<Vec<_>>>()?;
    out.sort_by(|a, b| a.label.cmp(&b.label).then(a.n_max.cmp(&b.n_max)));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn metadata_validation() {
        let ok = "nucleus = \"3H\"\nn_max = 2\nl_fm = 9.5\nhbar_omega = 22.0\nunits = \"MeV\"\n";
        let m = parse_metadata(ok).unwrap();
        assert_eq!((m.n_max, m.threshold), (2, None));
        assert!(parse_metadata(&ok.replace("9.5", "-1.0")).is_err());
        assert!(parse_metadata(&ok.replace("\"MeV\"", "\"keV\"")).is_err());
        assert!(parse_metadata("nucleus = \"3H\"").is_err());
    }

    #[test]
    fn systematic_defaults() {
        assert_eq!([2, 4, 6].map(default_systematic), [0.001, 0.005, 0.01]);
    }
}
