//! The static-charge configurations of the four-spatial-site study.

use serde::{Deserialize, Serialize};

use super::observables::{local_observables, ReferenceProfiles};
use super::symmetry::{project_symmetry, SymmetrySector};
use super::{build_hamiltonian, enumerate_physical_basis, ChargeConfig, LatticeSpec, SparseHamiltonian};
use crate::linalg::exact_ground;
use crate::{Error, Result};

/// Configuration, truncation and symmetry sector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StudyConfig {
    pub charges: ChargeConfig,
    pub lambda: i32,
    pub sector: SymmetrySector,
}

/// Vacuum, one charge, five pairs and ten triples on eight fermion sites.
pub fn study_set() -> Vec<StudyConfig> {
    let p = SymmetrySector::parity;
    let none = SymmetrySector::none();
    let rows: [(&[usize], i32, SymmetrySector); 17] = [
        (&[], 3, p(0).with_momentum()),
        (&[0], 4, p(0)),
        (&[0, 0], 5, p(0)),
        (&[0, 2], 5, p(2)),
        (&[0, 4], 5, p(4)),
        (&[0, 1], 5, SymmetrySector::cp(1)),
        (&[0, 3], 8, SymmetrySector::cp(3)),
        (&[0, 0, 0], 12, p(0)),
        (&[0, 0, 2], 5, none),
        (&[0, 0, 4], 4, none),
        (&[0, 2, 4], 4, p(4)),
        (&[0, 0, 1], 7, none),
        (&[0, 0, 3], 7, none),
        (&[0, 2, 1], 6, p(2)),
        (&[0, 2, 3], 7, none),
        (&[0, 2, 5], 7, p(2)),
        (&[0, 4, 1], 7, none),
    ];
    rows.iter()
        .map(|(c, lambda, sector)| StudyConfig { charges: ChargeConfig::new(c), lambda: *lambda, sector: *sector })
        .collect()
}

/// Looks up a configuration of the study set.
pub fn find_study(charges: &ChargeConfig) -> Option<StudyConfig> {
    study_set().into_iter().find(|s| &s.charges == charges)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfigSolution {
    pub config: StudyConfig,
    /// Physical-sector dimension.
    pub d: usize,
    /// Dimension after projection.
    pub d_sym: usize,
    pub hamiltonian: SparseHamiltonian,
    pub energy: f64,
    /// Ground vector on the projected basis.
    pub vector: Vec<f64>,
}

/// Builds, projects and diagonalizes one configuration. `base` supplies
/// everything except `Λ`.
pub fn solve_config(base: &LatticeSpec, config: &StudyConfig) -> Result<ConfigSolution> {
    let spec = base.with_lambda(config.lambda);
    let basis = enumerate_physical_basis(&spec, &config.charges)?;
    if basis.is_empty() {
        return Err(Error::InvalidArgument(format!("no physical states for {}", config.charges)));
    }
    let d = basis.len();
    let full = build_hamiltonian(&spec, &basis)?;
    let hamiltonian = project_symmetry(&full, &config.sector)?;
    let (energy, vector) = exact_ground(&hamiltonian.to_operator()?);
    Ok(ConfigSolution { config: config.clone(), d, d_sym: hamiltonian.dim, hamiltonian, energy, vector })
}

impl ReferenceProfiles {
    /// Exact ground-state references with the study-set truncations.
    pub fn exact(base: &LatticeSpec) -> Result<Self> {
        let n = base.n_fermion_sites;
        let solve = |c: &[usize]| -> Result<super::LocalProfile> {
            let cfg = find_study(&ChargeConfig::new(c))
                .ok_or_else(|| Error::MissingEntry(format!("study configuration {:?}", c)))?;
            let s = solve_config(base, &cfg)?;
            local_observables(&s.vector, &s.hamiltonian)
        };
        let mut pairs = Vec::new();
        for r in 0..=n / 2 {
            pairs.push(Some(solve(&[0, r])?));
        }
        Ok(ReferenceProfiles { vacuum: solve(&[])?, single: solve(&[0])?, pairs })
    }
}
