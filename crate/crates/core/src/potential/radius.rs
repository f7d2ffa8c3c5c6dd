//! Radii of the light cloud around a static charge.

use serde::{Deserialize, Serialize};

use crate::schwinger::LocalProfile;
use crate::vqe::EnergyRecord;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RadiusKind {
    /// `Σ_n (−1)ⁿ n² ⟨ρ⟩(n)` over signed displacements `|n| ≤ N/2`.
    Charge,
    /// `Σ (k + ½)² ⟨E²⟩` over links at half-integer displacements.
    FieldEnergy,
}

/// Mean-square radius about the charge at `center`. `profile` is the
/// vacuum-subtracted single-charge profile. The uncertainty is the mean
/// magnitude of the two outermost shells.
pub fn charge_radius(profile: &LocalProfile, kind: RadiusKind, center: usize) -> Result<EnergyRecord> {
    let n = profile.len();
    if n < 4 || n % 2 != 0 || profile.e2.len() != n || center >= n {
        return Err(Error::InvalidArgument(format!("radius needs an even ring of ≥ 4 sites, got {n}")));
    }
    let half = n / 2;
    let at = |v: &[f64], k: i64| v[(center as i64 + k).rem_euclid(n as i64) as usize];
    let shells: Vec<f64> = match kind {
        RadiusKind::Charge => (0..=half as i64)
            .map(|k| {
                let s = if k % 2 == 0 { 1.0 } else { -1.0 };
                let both = if k == 0 { 0.0 } else { at(&profile.rho, k) + at(&profile.rho, -k) };
                s * (k * k) as f64 * both
            })
            .collect(),
        RadiusKind::FieldEnergy => (0..half as i64)
            .map(|k| {
                let d = k as f64 + 0.5;
                d * d * (at(&profile.e2, k) + at(&profile.e2, -k - 1))
            })
            .collect(),
    };
    let value = shells.iter().sum();
    let m = shells.len();
    let trunc = 0.5 * (shells[m - 1].abs() + shells[m - 2].abs());
    Ok(EnergyRecord { value, stat_sigma: 0.0, sys_sigma: trunc })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_density_closed_form() {
        let p = LocalProfile { rho: vec![0.25; 8], e2: vec![0.0; 8] };
        let r = charge_radius(&p, RadiusKind::Charge, 0).unwrap();
        // 2c Σ_{k=1..4} (−1)^k k² = 2c (−1 + 4 − 9 + 16)
        assert!((r.value - 0.5 * 10.0).abs() < 1e-14);
        assert!((r.sys_sigma - 0.5 * (8.0 + 4.5)).abs() < 1e-14);
    }

    #[test]
    fn bad_ring() {
        let p = LocalProfile { rho: vec![0.0; 3], e2: vec![0.0; 3] };
        assert!(charge_radius(&p, RadiusKind::Charge, 0).is_err());
    }
}
