//! Heavy-meson masses, few-body static potentials and their analysis.

mod eft;
mod fit;
mod radius;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::schwinger::{ring_distance, ChargeConfig};
use crate::vqe::EnergyRecord;
use crate::{Error, Result};

pub use eft::{bound_states, delta_scattering_length, match_eft, zero_energy_scattering_length, EftMatch, Parity};
pub use fit::{exp_model, fit_exponential, ExpFit, FitOptions};
pub use radius::{charge_radius, RadiusKind};

/// Ground-state energies keyed by static-charge configuration.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EnergyTable {
    pub n_sites: usize,
    pub entries: BTreeMap<ChargeConfig, EnergyRecord>,
}

impl EnergyTable {
    pub fn new(n_sites: usize) -> Self {
        EnergyTable { n_sites, entries: BTreeMap::new() }
    }

    pub fn insert(&mut self, config: ChargeConfig, record: EnergyRecord) {
        self.entries.insert(config, record);
    }

    pub fn get(&self, config: &ChargeConfig) -> Result<EnergyRecord> {
        self.entries.get(config).copied().ok_or_else(|| Error::MissingEntry(format!("energy of {config}")))
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    fn vacuum(&self) -> Result<EnergyRecord> {
        self.get(&ChargeConfig::vacuum())
    }

    /// Energy of a pair, trying the configuration as given and then its
    /// canonical form `(0, r)`.
    fn pair_energy(&self, a: usize, b: usize) -> Result<EnergyRecord> {
        self.get(&ChargeConfig::new(&[a, b]))
            .or_else(|_| self.get(&ChargeConfig::new(&[0, ring_distance(a, b, self.n_sites)])))
    }
}

/// Like-sign (repulsive) or opposite-sign (attractive) charge pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Channel {
    Like,
    Opposite,
}

impl Channel {
    /// `+1` for repulsion, `−1` for attraction.
    pub fn sign(&self) -> f64 {
        match self {
            Channel::Like => 1.0,
            Channel::Opposite => -1.0,
        }
    }

    /// Like charges sit an even number of sites apart.
    pub fn of_separation(r: usize) -> Channel {
        if r % 2 == 0 {
            Channel::Like
        } else {
            Channel::Opposite
        }
    }

    pub fn check(&self, r: usize) -> Result<()> {
        if Channel::of_separation(r) != *self {
            return Err(Error::ChannelParity(format!("{self:?}-sign charges cannot sit {r} sites apart")));
        }
        Ok(())
    }
}

/// Relative coordinates of three charges; the first two carry equal charge.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct JacobiPoint {
    pub r1: f64,
    pub r2: f64,
}

impl JacobiPoint {
    pub fn of(config: &ChargeConfig) -> Result<Self> {
        let p = &config.positions;
        if p.len() != 3 {
            return Err(Error::InvalidArgument(format!("{config} is not a three-charge configuration")));
        }
        let q = |i: usize| ChargeConfig::charge_at_site(p[i]);
        let (i, j, k) = if q(0) == q(1) {
            (0, 1, 2)
        } else if q(0) == q(2) {
            (0, 2, 1)
        } else {
            (1, 2, 0)
        };
        let (a, b, c) = (p[i] as f64, p[j] as f64, p[k] as f64);
        Ok(JacobiPoint { r1: (a - b).abs(), r2: (c - 0.5 * (a + b)).abs() })
    }
}

/// `M_H = E(one charge at 0) − E_vac`.
pub fn heavy_meson_mass(table: &EnergyTable) -> Result<EnergyRecord> {
    let e1 = table.get(&ChargeConfig::new(&[0]))?;
    Ok(EnergyRecord::combine(&[(1.0, e1), (-1.0, table.vacuum()?)]))
}

/// `V = E − E_vac − 2 M_H` for a two-charge configuration.
pub fn two_body_potential(table: &EnergyTable, config: &ChargeConfig) -> Result<EnergyRecord> {
    let p = &config.positions;
    if p.len() != 2 {
        return Err(Error::InvalidArgument(format!("{config} is not a two-charge configuration")));
    }
    pair_potential(table, p[0], p[1])
}

fn pair_potential(table: &EnergyTable, a: usize, b: usize) -> Result<EnergyRecord> {
    let de = EnergyRecord::combine(&[(1.0, table.pair_energy(a, b)?), (-1.0, table.vacuum()?)]);
    Ok(EnergyRecord::combine(&[(1.0, de), (-2.0, heavy_meson_mass(table)?)]))
}

/// Two-body potential in `channel` at separation `r`.
pub fn channel_potential(table: &EnergyTable, channel: Channel, r: usize) -> Result<EnergyRecord> {
    channel.check(r)?;
    pair_potential(table, 0, r)
}

/// `V₃ = E − E_vac − 3 M_H − Σ_pairs V₂`. Pairs at the same separation share
/// one `V₂` value, so its spread enters with the multiplicity.
pub fn three_body_potential(table: &EnergyTable, config: &ChargeConfig) -> Result<(JacobiPoint, EnergyRecord)> {
    let jac = JacobiPoint::of(config)?;
    let p = &config.positions;
    let mut counts: BTreeMap<usize, f64> = BTreeMap::new();
    for i in 0..3 {
        for j in i + 1..3 {
            *counts.entry(ring_distance(p[i], p[j], table.n_sites)).or_insert(0.0) += 1.0;
        }
    }
    let mut terms = vec![(1.0, table.get(config)?), (-1.0, table.vacuum()?), (-3.0, heavy_meson_mass(table)?)];
    for (&r, &c) in &counts {
        terms.push((-c, pair_potential(table, 0, r)?));
    }
    Ok((jac, EnergyRecord::combine(&terms)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jacobi_coordinates() {
        let j = JacobiPoint::of(&ChargeConfig::new(&[0, 4, 1])).unwrap();
        assert_eq!((j.r1, j.r2), (4.0, 1.0));
        let j = JacobiPoint::of(&ChargeConfig::new(&[0, 2, 4])).unwrap();
        assert_eq!((j.r1, j.r2), (2.0, 3.0));
        let j = JacobiPoint::of(&ChargeConfig::new(&[0, 2, 1])).unwrap();
        assert_eq!((j.r1, j.r2), (2.0, 0.0));
    }

    #[test]
    fn additive_table_has_no_three_body_term() {
        let mut t = EnergyTable::new(8);
        let ev = -2.0;
        let m = 1.3;
        let v = |r: usize| [0.4, -1.5, 0.1, -0.3, 0.05][r];
        t.insert(ChargeConfig::vacuum(), EnergyRecord::exact(ev));
        t.insert(ChargeConfig::new(&[0]), EnergyRecord::exact(ev + m));
        for r in 0..=4 {
            t.insert(ChargeConfig::new(&[0, r]), EnergyRecord::exact(ev + 2.0 * m + v(r)));
        }
        let c = ChargeConfig::new(&[0, 2, 1]);
        t.insert(c.clone(), EnergyRecord::exact(ev + 3.0 * m + v(2) + v(1) + v(1)));
        let (_, v3) = three_body_potential(&t, &c).unwrap();
        assert!(v3.value.abs() < 1e-14);
    }

    #[test]
    fn parity_channels() {
        let mut t = EnergyTable::new(8);
        t.insert(ChargeConfig::vacuum(), EnergyRecord::exact(0.0));
        assert!(matches!(channel_potential(&t, Channel::Like, 1), Err(Error::ChannelParity(_))));
        assert!(matches!(heavy_meson_mass(&EnergyTable::new(8)), Err(Error::MissingEntry(_))));
    }
}
