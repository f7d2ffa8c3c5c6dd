//! Staggered lattice Schwinger model on a periodic ring with static charges.
//!
//! Fermion site `n` carries `σ_n = ±1`; its dynamical charge is
//! `(σ_n + (−1)ⁿ)/2`. Link `n` joins sites `n` and `n + 1` and holds the
//! integer electric field `ℓ_n`. Gauss's law reads `ℓ_n − ℓ_{n−1} = q_n`.

mod catalog;
mod observables;
mod symmetry;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, HermitianOperator, Result};

pub use catalog::{find_study, solve_config, study_set, ConfigSolution, StudyConfig};
pub use observables::{local_observables, subtracted_densities, LocalProfile, ReferenceProfiles};
pub use symmetry::{project_symmetry, AxisSector, SiteMap, SymmetrySector};

/// Which electric-field configurations are kept.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Truncation {
    /// `Σ_n ℓ_n² ≤ Λ`.
    #[default]
    ElectricEnergy,
    /// `|ℓ_n| ≤ Λ` on every link.
    PerLink,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeSpec {
    pub n_fermion_sites: usize,
    pub x: f64,
    pub mu: f64,
    pub lambda: i32,
    pub truncation: Truncation,
}

impl LatticeSpec {
    /// Eight fermion sites, `x = 0.6`, `μ = 0.1`.
    pub fn standard(lambda: i32) -> Self {
        LatticeSpec { n_fermion_sites: 8, x: 0.6, mu: 0.1, lambda, truncation: Truncation::ElectricEnergy }
    }

    pub fn with_lambda(mut self, lambda: i32) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn n_spatial_sites(&self) -> usize {
        self.n_fermion_sites / 2
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_fermion_sites;
        if n < 2 || n % 2 != 0 || n > 30 {
            return Err(Error::InvalidArgument(format!("fermion site count {n} must be even and in [2, 30]")));
        }
        if self.lambda < 1 {
            return Err(Error::InvalidArgument("truncation Λ must be ≥ 1".into()));
        }
        Ok(())
    }

    fn admits(&self, links: &[i32]) -> bool {
        match self.truncation {
            Truncation::ElectricEnergy => links.iter().map(|l| l * l).sum::<i32>() <= self.lambda,
            Truncation::PerLink => links.iter().all(|l| l.abs() <= self.lambda),
        }
    }
}

/// Static charge positions: `+1` on even sites, `−1` on odd ones. Order is
/// kept as given; coincident positions stack.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ChargeConfig {
    pub positions: Vec<usize>,
}

impl ChargeConfig {
    pub fn new(positions: &[usize]) -> Self {
        ChargeConfig { positions: positions.to_vec() }
    }

    pub fn vacuum() -> Self {
        Self::default()
    }

    pub fn is_vacuum(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn charge_at_site(site: usize) -> i32 {
        if site % 2 == 0 {
            1
        } else {
            -1
        }
    }

    /// Net static charge per site.
    pub fn static_charges(&self, n_sites: usize) -> Result<Vec<i32>> {
        let mut q = vec![0; n_sites];
        for &p in &self.positions {
            if p >= n_sites {
                return Err(Error::InvalidArgument(format!("charge position {p} outside lattice of {n_sites} sites")));
            }
            q[p] += Self::charge_at_site(p);
        }
        Ok(q)
    }
}

impl fmt::Display for ChargeConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.positions.is_empty() {
            return write!(f, "vac");
        }
        let s: Vec<String> = self.positions.iter().map(|p| p.to_string()).collect();
        write!(f, "({})", s.join(","))
    }
}

impl FromStr for ChargeConfig {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().trim_start_matches('(').trim_end_matches(')').trim();
        if t.is_empty() || t.eq_ignore_ascii_case("vac") {
            return Ok(Self::vacuum());
        }
        let positions = t
            .split([',', ' '])
            .filter(|p| !p.is_empty())
            .map(|p| p.trim().parse::<usize>().map_err(|_| Error::Parse(format!("bad charge position '{p}'"))))
            .collect::<Result<Vec<_>>>()?;
        Ok(ChargeConfig { positions })
    }
}

/// Occupation bits (bit `n` set ⇔ `σ_n = +1`) plus link fields.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PhysicalBasisState {
    pub occupations: u32,
    pub links: Vec<i32>,
}

impl PhysicalBasisState {
    pub fn sigma(&self, n: usize) -> i32 {
        if self.occupations >> n & 1 == 1 {
            1
        } else {
            -1
        }
    }

    pub fn dynamical_charge(&self, n: usize) -> i32 {
        (self.sigma(n) + if n % 2 == 0 { 1 } else { -1 }) / 2
    }

    pub fn n_sites(&self) -> usize {
        self.links.len()
    }

    /// Bit pattern with site 0 first.
    pub fn bit_string(&self) -> String {
        (0..self.n_sites()).map(|n| if self.sigma(n) == 1 { '1' } else { '0' }).collect()
    }

    /// Static charge each site needs for Gauss's law to hold.
    pub fn implied_static_charges(&self) -> Vec<i32> {
        let n = self.n_sites();
        (0..n)
            .map(|s| self.links[s] - self.links[(s + n - 1) % n] - self.dynamical_charge(s))
            .collect()
    }
}

/// All Gauss-law states, ordered by occupation bits then seed field
/// `ℓ_{N−1}`.
pub fn enumerate_physical_basis(spec: &LatticeSpec, charges: &ChargeConfig) -> Result<Vec<PhysicalBasisState>> {
    spec.validate()?;
    let n = spec.n_fermion_sites;
    let q_static = charges.static_charges(n)?;
    let lam = spec.lambda;
    let mut out = Vec::new();
    let mut links = vec![0i32; n];
    for bits in 0u32..(1u32 << n) {
        for seed in -lam..=lam {
            let mut prev = seed;
            for s in 0..n {
                let sigma = if bits >> s & 1 == 1 { 1 } else { -1 };
                let q = (sigma + if s % 2 == 0 { 1 } else { -1 }) / 2 + q_static[s];
                prev += q;
                links[s] = prev;
            }
            if links[n - 1] == seed && spec.admits(&links) {
                out.push(PhysicalBasisState { occupations: bits, links: links.clone() });
            }
        }
    }
    Ok(out)
}

/// Basis of a [`SparseHamiltonian`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Basis {
    Physical(Vec<PhysicalBasisState>),
    /// Orthonormal combinations `Σ c_i |physical_i⟩`.
    Projected {
        physical: Vec<PhysicalBasisState>,
        vectors: Vec<Vec<(usize, f64)>>,
    },
}

impl Basis {
    pub fn physical(&self) -> &[PhysicalBasisState] {
        match self {
            Basis::Physical(p) => p,
            Basis::Projected { physical, .. } => physical,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Basis::Physical(p) => p.len(),
            Basis::Projected { vectors, .. } => vectors.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Amplitudes on the physical basis.
    pub fn expand(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.len() {
            return Err(Error::Dimension { expected: self.len(), found: v.len() });
        }
        match self {
            Basis::Physical(_) => Ok(v.to_vec()),
            Basis::Projected { physical, vectors } => {
                let mut out = vec![0.0; physical.len()];
                for (c, vec) in v.iter().zip(vectors) {
                    for &(i, a) in vec {
                        out[i] += c * a;
                    }
                }
                Ok(out)
            }
        }
    }
}

/// Upper-triangle entries plus the basis they refer to.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SparseHamiltonian {
    pub dim: usize,
    /// `(row, col, value)` with `row ≤ col`, sorted.
    pub entries: Vec<(usize, usize, f64)>,
    pub basis: Basis,
}

impl SparseHamiltonian {
    pub fn to_operator(&self) -> Result<HermitianOperator> {
        HermitianOperator::from_triplets(self.dim, &self.entries)
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }
}

/// Kinetic plus electric plus mass terms on `basis`. Every hop has amplitude
/// `+x`, the ring-closing hop included.
pub fn build_hamiltonian(spec: &LatticeSpec, basis: &[PhysicalBasisState]) -> Result<SparseHamiltonian> {
    spec.validate()?;
    let n = spec.n_fermion_sites;
    let reference = basis.first().map(|s| s.implied_static_charges());
    let mut index = HashMap::with_capacity(basis.len());
    for (i, s) in basis.iter().enumerate() {
        if s.links.len() != n || (n < 32 && s.occupations >> n != 0) {
            return Err(Error::Consistency { index: i, reason: format!("state does not live on {n} sites") });
        }
        if Some(s.implied_static_charges()) != reference {
            return Err(Error::Consistency { index: i, reason: "Gauss's law fixes a different static charge".into() });
        }
        if !spec.admits(&s.links) {
            return Err(Error::Consistency { index: i, reason: "link fields exceed the truncation".into() });
        }
        if index.insert(s, i).is_some() {
            return Err(Error::Consistency { index: i, reason: "duplicate state".into() });
        }
    }

    let mut entries = Vec::new();
    for (i, s) in basis.iter().enumerate() {
        let e_field: i32 = s.links.iter().map(|l| l * l).sum();
        let mass: i32 = (0..n).map(|k| if k % 2 == 0 { s.sigma(k) } else { -s.sigma(k) }).sum();
        let diag = e_field as f64 + 0.5 * spec.mu * mass as f64;
        if diag != 0.0 {
            entries.push((i, i, diag));
        }
        for k in 0..n {
            let m = (k + 1) % n;
            if s.sigma(k) == s.sigma(m) {
                continue;
            }
            let mut t = s.clone();
            t.occupations ^= (1 << k) | (1 << m);
            t.links[k] += (t.sigma(k) - s.sigma(k)) / 2;
            if let Some(&j) = index.get(&t) {
                if i < j && spec.x != 0.0 {
                    entries.push((i, j, spec.x));
                }
            }
        }
    }
    entries.sort_by_key(|&(r, c, _)| (r, c));
    Ok(SparseHamiltonian { dim: basis.len(), entries, basis: Basis::Physical(basis.to_vec()) })
}

/// Ring distance between two sites.
pub fn ring_distance(a: usize, b: usize, n: usize) -> usize {
    let d = a.abs_diff(b) % n;
    d.min(n - d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vacuum_count() {
        let b = enumerate_physical_basis(&LatticeSpec::standard(3), &ChargeConfig::vacuum()).unwrap();
        assert_eq!(b.len(), 53);
        for s in &b {
            assert!(s.implied_static_charges().iter().all(|&q| q == 0));
        }
    }

    #[test]
    fn config_round_trip() {
        let c: ChargeConfig = "(0,2,1)".parse().unwrap();
        assert_eq!(c.positions, vec![0, 2, 1]);
        assert_eq!(c.to_string(), "(0,2,1)");
        assert_eq!("".parse::<ChargeConfig>().unwrap(), ChargeConfig::vacuum());
        assert_eq!("vac".parse::<ChargeConfig>().unwrap().to_string(), "vac");
        assert!("0,x".parse::<ChargeConfig>().is_err());
    }

    #[test]
    fn hopping_off_is_diagonal() {
        let mut spec = LatticeSpec::standard(3);
        spec.x = 0.0;
        let b = enumerate_physical_basis(&spec, &ChargeConfig::vacuum()).unwrap();
        let h = build_hamiltonian(&spec, &b).unwrap();
        assert!(h.entries.iter().all(|&(r, c, _)| r == c));
    }

    #[test]
    fn mixed_charges_rejected() {
        let spec = LatticeSpec::standard(4);
        let mut b = enumerate_physical_basis(&spec, &ChargeConfig::vacuum()).unwrap();
        b.extend(enumerate_physical_basis(&spec, &ChargeConfig::new(&[0])).unwrap());
        assert!(matches!(build_hamiltonian(&spec, &b), Err(Error::Consistency { .. })));
    }

    #[test]
    fn distances() {
        assert_eq!(ring_distance(0, 5, 8), 3);
        assert_eq!(ring_distance(2, 1, 8), 1);
        assert_eq!(ring_distance(4, 0, 8), 4);
    }
}
