//! Local charge and electric-energy densities.

use serde::{Deserialize, Serialize};

use super::symmetry::SiteMap;
use super::{ring_distance, ChargeConfig, SparseHamiltonian};
use crate::{Error, Result};

/// Per-site `⟨ρ⟩` and per-link `⟨E²⟩`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalProfile {
    pub rho: Vec<f64>,
    pub e2: Vec<f64>,
}

impl LocalProfile {
    pub fn zeros(n: usize) -> Self {
        LocalProfile { rho: vec![0.0; n], e2: vec![0.0; n] }
    }

    pub fn len(&self) -> usize {
        self.rho.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rho.is_empty()
    }

    pub fn moved(&self, map: &SiteMap) -> Self {
        let (rho, e2) = map.transport(&self.rho, &self.e2);
        LocalProfile { rho, e2 }
    }

    fn axpy(&mut self, c: f64, other: &LocalProfile) -> Result<()> {
        if other.len() != self.len() {
            return Err(Error::Dimension { expected: self.len(), found: other.len() });
        }
        for (a, b) in self.rho.iter_mut().zip(&other.rho) {
            *a += c * b;
        }
        for (a, b) in self.e2.iter_mut().zip(&other.e2) {
            *a += c * b;
        }
        Ok(())
    }
}

/// Densities of a state given on `h`'s basis. `⟨ρ⟩_n` is the probability of
/// a particle or antiparticle on site `n`; `⟨E²⟩_n = ⟨ℓ_n²⟩`.
pub fn local_observables(vector: &[f64], h: &SparseHamiltonian) -> Result<LocalProfile> {
    let amps = h.basis.expand(vector)?;
    let norm: f64 = amps.iter().map(|a| a * a).sum();
    if (norm - 1.0).abs() > 1e-8 {
        return Err(Error::Normalization { norm: norm.sqrt() });
    }
    let physical = h.basis.physical();
    let n = physical.first().map_or(0, |s| s.n_sites());
    let mut out = LocalProfile::zeros(n);
    for (a, s) in amps.iter().zip(physical) {
        let p = a * a;
        for k in 0..n {
            if s.dynamical_charge(k) != 0 {
                out.rho[k] += p;
            }
            out.e2[k] += p * (s.links[k] * s.links[k]) as f64;
        }
    }
    Ok(out)
}

/// `target − Σ cᵢ referenceᵢ`.
pub fn subtracted_densities(target: &LocalProfile, references: &[(f64, LocalProfile)]) -> Result<LocalProfile> {
    let mut out = target.clone();
    for (c, r) in references {
        out.axpy(-c, r)?;
    }
    Ok(out)
}

/// Ground-state densities of the vacuum, one charge at site 0 and charge
/// pairs `(0, r)`, used to strip lower-body content from a target.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReferenceProfiles {
    pub vacuum: LocalProfile,
    pub single: LocalProfile,
    /// Indexed by separation `r`.
    pub pairs: Vec<Option<LocalProfile>>,
}

impl ReferenceProfiles {
    fn n(&self) -> usize {
        self.vacuum.len()
    }

    /// Single-charge excess placed at `site`.
    pub fn one_body(&self, site: usize) -> Result<LocalProfile> {
        let moved = self.single.moved(&SiteMap::translation(site as i64));
        subtracted_densities(&moved, &[(1.0, self.vacuum.clone())])
    }

    /// Pair excess over vacuum and both single charges, placed at `(a, b)`.
    pub fn two_body(&self, a: usize, b: usize) -> Result<LocalProfile> {
        let n = self.n();
        let r = ring_distance(a, b, n);
        let pair = self
            .pairs
            .get(r)
            .and_then(|p| p.as_ref())
            .ok_or_else(|| Error::MissingEntry(format!("reference pair at separation {r}")))?;
        let excess = subtracted_densities(
            pair,
            &[(1.0, self.vacuum.clone()), (1.0, self.one_body(0)?), (1.0, self.one_body(r)?)],
        )?;
        let map = pair_map(a, b, r, n);
        Ok(excess.moved(&map))
    }

    pub fn vacuum_subtracted(&self, target: &LocalProfile) -> Result<LocalProfile> {
        subtracted_densities(target, &[(1.0, self.vacuum.clone())])
    }

    pub fn one_body_subtracted(&self, target: &LocalProfile, charges: &ChargeConfig) -> Result<LocalProfile> {
        let mut refs = vec![(1.0, self.vacuum.clone())];
        for &p in &charges.positions {
            refs.push((1.0, self.one_body(p)?));
        }
        subtracted_densities(target, &refs)
    }

    pub fn two_body_subtracted(&self, target: &LocalProfile, charges: &ChargeConfig) -> Result<LocalProfile> {
        let mut out = self.one_body_subtracted(target, charges)?;
        let p = &charges.positions;
        for i in 0..p.len() {
            for j in i + 1..p.len() {
                out = subtracted_densities(&out, &[(1.0, self.two_body(p[i], p[j])?)])?;
            }
        }
        Ok(out)
    }
}

/// A lattice map sending sites `{0, r}` onto `{a, b}`.
fn pair_map(a: usize, b: usize, r: usize, n: usize) -> SiteMap {
    let (a64, b64, r64, n64) = (a as i64, b as i64, r as i64, n as i64);
    let same = |x: i64, y: i64| (x - y).rem_euclid(n64) == 0;
    if same(a64 + r64, b64) {
        SiteMap::translation(a64)
    } else if same(b64 + r64, a64) {
        SiteMap::translation(b64)
    } else if same(a64 - r64, b64) {
        SiteMap::reflection(a64)
    } else {
        SiteMap::reflection(b64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn self_subtraction_vanishes() {
        let p = LocalProfile { rho: vec![0.1, 0.2], e2: vec![0.3, 0.4] };
        let z = subtracted_densities(&p, &[(1.0, p.clone())]).unwrap();
        assert!(z.rho.iter().chain(&z.e2).all(|v| *v == 0.0));
        let short = LocalProfile::zeros(3);
        assert!(subtracted_densities(&p, &[(1.0, short)]).is_err());
    }

    #[test]
    fn pair_maps_hit_targets() {
        for (a, b) in [(0, 2), (2, 1), (1, 2), (0, 5), (4, 1), (3, 3)] {
            let r = ring_distance(a, b, 8);
            let m = pair_map(a, b, r, 8);
            let mut got = [m.site(0, 8), m.site(r, 8)];
            got.sort();
            let mut want = [a, b];
            want.sort();
            assert_eq!(got, want);
        }
    }
}
