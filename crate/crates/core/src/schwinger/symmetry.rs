//! Lattice symmetries and projection onto symmetry sectors.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{Basis, PhysicalBasisState, SparseHamiltonian};
use crate::{Error, Result};

/// Site map `n ↦ sign·n + shift (mod N)`. An odd shift exchanges the
/// staggered sublattices and therefore comes with charge conjugation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SiteMap {
    pub sign: i8,
    pub shift: i64,
}

impl SiteMap {
    pub const IDENTITY: SiteMap = SiteMap { sign: 1, shift: 0 };

    pub fn translation(shift: i64) -> Self {
        SiteMap { sign: 1, shift }
    }

    /// `n ↦ axis − n`; an odd axis is the half-site-shifted CP reflection.
    pub fn reflection(axis: i64) -> Self {
        SiteMap { sign: -1, shift: axis }
    }

    pub fn site(&self, n: usize, len: usize) -> usize {
        (self.sign as i64 * n as i64 + self.shift).rem_euclid(len as i64) as usize
    }

    pub fn link(&self, m: usize, len: usize) -> usize {
        let l = if self.sign > 0 { m as i64 + self.shift } else { self.shift - m as i64 - 1 };
        l.rem_euclid(len as i64) as usize
    }

    /// `+1` unless the map includes charge conjugation.
    pub fn conjugation(&self) -> i32 {
        if self.shift.rem_euclid(2) == 0 {
            1
        } else {
            -1
        }
    }

    /// `self ∘ other`.
    pub fn after(&self, other: &SiteMap, len: usize) -> SiteMap {
        SiteMap {
            sign: self.sign * other.sign,
            shift: (self.sign as i64 * other.shift + self.shift).rem_euclid(len as i64),
        }
    }

    fn normalized(&self, len: usize) -> SiteMap {
        SiteMap { sign: self.sign, shift: self.shift.rem_euclid(len as i64) }
    }

    pub fn apply(&self, s: &PhysicalBasisState) -> PhysicalBasisState {
        let n = s.n_sites();
        let f = self.conjugation();
        let mut occ = 0u32;
        let mut links = vec![0; n];
        for k in 0..n {
            if f * s.sigma(k) == 1 {
                occ |= 1 << self.site(k, n);
            }
            links[self.link(k, n)] = self.sign as i32 * f * s.links[k];
        }
        PhysicalBasisState { occupations: occ, links }
    }

    /// Moves a per-site / per-link profile along with the charges.
    pub fn transport(&self, sites: &[f64], links: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let n = sites.len();
        let mut a = vec![0.0; n];
        let mut b = vec![0.0; n];
        for k in 0..n {
            a[self.site(k, n)] = sites[k];
            b[self.link(k, n)] = links[k];
        }
        (a, b)
    }
}

/// Reflection axis `c` (map `n ↦ c − n`) and the eigenvalue kept.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AxisSector {
    pub axis: usize,
    pub eigenvalue: i8,
}

/// Symmetries to project onto. `parity` needs an even axis, `cp` an odd one;
/// `momentum` keeps zero momentum under translation by one spatial site.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymmetrySector {
    pub momentum: bool,
    pub parity: Option<AxisSector>,
    pub cp: Option<AxisSector>,
}

impl SymmetrySector {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn parity(axis: usize) -> Self {
        SymmetrySector { parity: Some(AxisSector { axis, eigenvalue: 1 }), ..Self::default() }
    }

    pub fn cp(axis: usize) -> Self {
        SymmetrySector { cp: Some(AxisSector { axis, eigenvalue: 1 }), ..Self::default() }
    }

    pub fn with_momentum(mut self) -> Self {
        self.momentum = true;
        self
    }

    pub fn is_trivial(&self) -> bool {
        !self.momentum && self.parity.is_none() && self.cp.is_none()
    }

    /// Generators with their characters.
    pub fn generators(&self) -> Result<Vec<(SiteMap, f64)>> {
        let mut g = Vec::new();
        if self.momentum {
            g.push((SiteMap::translation(2), 1.0));
        }
        if let Some(p) = self.parity {
            if p.axis % 2 != 0 {
                return Err(Error::InvalidArgument(format!("parity axis {} must be even", p.axis)));
            }
            g.push((SiteMap::reflection(p.axis as i64), eigen(p.eigenvalue)?));
        }
        if let Some(c) = self.cp {
            if c.axis % 2 != 1 {
                return Err(Error::InvalidArgument(format!("CP axis {} must be odd", c.axis)));
            }
            g.push((SiteMap::reflection(c.axis as i64), eigen(c.eigenvalue)?));
        }
        Ok(g)
    }

    pub fn label(&self) -> String {
        let mut parts = Vec::new();
        if let Some(p) = self.parity {
            parts.push(format!("P{}{}", p.axis, if p.eigenvalue > 0 { "+" } else { "-" }));
        }
        if let Some(c) = self.cp {
            parts.push(format!("CP{}{}", c.axis, if c.eigenvalue > 0 { "+" } else { "-" }));
        }
        if self.momentum {
            parts.push("p0".into());
        }
        parts.join(",")
    }
}

fn eigen(e: i8) -> Result<f64> {
    match e {
        1 => Ok(1.0),
        -1 => Ok(-1.0),
        _ => Err(Error::InvalidArgument(format!("symmetry eigenvalue {e} must be ±1"))),
    }
}

/// Closes the generators into a group of `(map, character)`.
fn group(gens: &[(SiteMap, f64)], len: usize) -> Result<Vec<(SiteMap, f64)>> {
    let mut elems: Vec<(SiteMap, f64)> = vec![(SiteMap::IDENTITY, 1.0)];
    let mut seen: HashMap<SiteMap, f64> = HashMap::from([(SiteMap::IDENTITY, 1.0)]);
    let mut i = 0;
    while i < elems.len() {
        let (e, ce) = elems[i];
        for &(g, cg) in gens {
            let h = g.after(&e, len).normalized(len);
            let ch = cg * ce;
            match seen.get(&h) {
                Some(&c) if (c - ch).abs() > 1e-12 => {
                    return Err(Error::SymmetryViolation("sector characters are inconsistent".into()));
                }
                Some(_) => {}
                None => {
                    seen.insert(h, ch);
                    elems.push((h, ch));
                }
            }
        }
        i += 1;
    }
    Ok(elems)
}

/// Restricts `h` (in a physical basis) to the sector. Basis vectors are
/// normalized orbit sums `Σ_g χ(g) g|s⟩`, which span the image of the sector
/// projector exactly.
pub fn project_symmetry(h: &SparseHamiltonian, sector: &SymmetrySector) -> Result<SparseHamiltonian> {
    let physical = match &h.basis {
        Basis::Physical(p) => p.clone(),
        Basis::Projected { .. } => {
            return Err(Error::InvalidArgument("projection expects a physical basis".into()));
        }
    };
    if sector.is_trivial() || physical.is_empty() {
        return Ok(h.clone());
    }
    let len = physical[0].n_sites();
    let gens = sector.generators()?;
    let elems = group(&gens, len)?;
    let index: HashMap<&PhysicalBasisState, usize> = physical.iter().enumerate().map(|(i, s)| (s, i)).collect();
    let op = h.to_operator()?;

    let perm = |map: &SiteMap| -> Result<Vec<usize>> {
        physical
            .iter()
            .map(|s| {
                index.get(&map.apply(s)).copied().ok_or_else(|| {
                    Error::SymmetryViolation(format!("{map:?} maps a basis state outside the basis"))
                })
            })
            .collect()
    };

    for (g, _) in &gens {
        let p = perm(g)?;
        for &(r, c, v) in &h.entries {
            let w = op.get(p[r], p[c]);
            if (w - v).abs() > 1e-10 {
                return Err(Error::SymmetryViolation(format!("{g:?} fails on element ({r}, {c}): {v} vs {w}")));
            }
        }
        for r in 0..op.dim() {
            for c in r..op.dim() {
                if op.get(r, c) == 0.0 && op.get(p[r], p[c]) != 0.0 {
                    return Err(Error::SymmetryViolation(format!("{g:?} creates element ({r}, {c})")));
                }
            }
        }
    }

    let perms: Vec<(Vec<usize>, f64)> = elems.iter().map(|(g, c)| Ok((perm(g)?, *c))).collect::<Result<_>>()?;
    let mut visited = vec![false; physical.len()];
    let mut vectors = Vec::new();
    for i in 0..physical.len() {
        if visited[i] {
            continue;
        }
        let mut coeffs: HashMap<usize, f64> = HashMap::new();
        for (p, c) in &perms {
            visited[p[i]] = true;
            *coeffs.entry(p[i]).or_insert(0.0) += c;
        }
        let mut v: Vec<(usize, f64)> = coeffs.into_iter().filter(|(_, c)| c.abs() > 1e-12).collect();
        let norm = v.iter().map(|(_, c)| c * c).sum::<f64>().sqrt();
        if norm > 1e-12 {
            v.sort_by_key(|&(j, _)| j);
            for (_, c) in v.iter_mut() {
                *c /= norm;
            }
            vectors.push(v);
        }
    }

    let mut entries = Vec::new();
    for a in 0..vectors.len() {
        let hv: Vec<f64> = {
            let mut dense = vec![0.0; physical.len()];
            for &(j, c) in &vectors[a] {
                for (k, hk) in dense.iter_mut().zip(op.row(j)) {
                    *k += c * hk;
                }
            }
            dense
        };
        for (b, vb) in vectors.iter().enumerate().skip(a) {
            let v: f64 = vb.iter().map(|&(j, c)| c * hv[j]).sum();
            if v.abs() > 1e-14 {
                entries.push((a, b, v));
            }
        }
    }
    Ok(SparseHamiltonian { dim: vectors.len(), entries, basis: Basis::Projected { physical, vectors } })
}

#[cfg(test)]
mod tests {
    use super::super::*;
    use super::*;

    #[test]
    fn vacuum_reduction() {
        let spec = LatticeSpec::standard(3);
        let b = enumerate_physical_basis(&spec, &ChargeConfig::vacuum()).unwrap();
        let h = build_hamiltonian(&spec, &b).unwrap();
        let m = project_symmetry(&h, &SymmetrySector { momentum: true, ..Default::default() }).unwrap();
        assert_eq!(m.dim, 15);
        let mp = project_symmetry(&h, &SymmetrySector::parity(0).with_momentum()).unwrap();
        assert_eq!(mp.dim, 9);
    }

    #[test]
    fn asymmetric_charges_rejected() {
        let spec = LatticeSpec::standard(5);
        let b = enumerate_physical_basis(&spec, &ChargeConfig::new(&[0, 2])).unwrap();
        let h = build_hamiltonian(&spec, &b).unwrap();
        assert!(matches!(project_symmetry(&h, &SymmetrySector::parity(0)), Err(Error::SymmetryViolation(_))));
    }

    #[test]
    fn map_composition() {
        let r = SiteMap::reflection(3);
        let id = r.after(&r, 8).normalized(8);
        assert_eq!(id, SiteMap::IDENTITY);
        assert_eq!(r.site(0, 8), 3);
        assert_eq!(r.link(0, 8), 2);
    }
}
