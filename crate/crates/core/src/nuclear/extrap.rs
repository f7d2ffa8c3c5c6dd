//! Infinite-basis extrapolation `E(L) = E∞ + a e^{−2 k∞ L}` with
//! `k∞ = √(−2m (E∞ − E_thr)) / ħc`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::phase::{HBARC, NUCLEON_MASS};
use crate::lsq::{levenberg_marquardt, LsqOptions};
use crate::stats::{mean, quantile, sample_std};
use crate::vqe::EnergyRecord;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtrapolationOptions {
    /// `E∞(A − 1)`, MeV.
    pub threshold: f64,
    /// MeV.
    pub mass: f64,
    /// Upper bound on `a`, MeV.
    pub max_amplitude: f64,
    pub replicas: usize,
    pub seed: u64,
    /// Extents at which the band is tabulated in addition to the data.
    pub band_extents: Vec<f64>,
}

impl ExtrapolationOptions {
    pub fn new(threshold: f64) -> Self {
        ExtrapolationOptions {
            threshold,
            mass: NUCLEON_MASS,
            max_amplitude: 1000.0,
            replicas: 10_000,
            seed: 1,
            band_extents: Vec::new(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BandPoint {
    pub l_fm: f64,
    pub center: f64,
    /// 16th and 84th percentiles over replicas.
    pub lower: f64,
    pub upper: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtrapolationFit {
    /// Central fit; the spreads are the replica standard deviation.
    pub e_infinity: EnergyRecord,
    pub amplitude: f64,
    /// fm⁻¹
    pub k_infinity: f64,
    pub band: Vec<BandPoint>,
    /// 16th and 84th percentiles of `E∞` over replicas.
    pub e_infinity_interval: (f64, f64),
    pub replicas_used: usize,
}

impl ExtrapolationFit {
    pub fn energy_at(&self, l_fm: f64) -> f64 {
        self.e_infinity.value + self.amplitude * (-2.0 * self.k_infinity * l_fm).exp()
    }
}

/// fm⁻¹; errors when `E∞` is not below threshold.
pub fn k_infinity(e_infinity: f64, threshold: f64, mass: f64) -> Result<f64> {
    let depth = threshold - e_infinity;
    if !(depth > 0.0) {
        return Err(Error::ExtrapolationInvalid(format!("E∞ = {e_infinity} MeV is not below threshold {threshold} MeV")));
    }
    Ok((2.0 * mass * depth).sqrt() / HBARC)
}

pub fn extrapolation_model(l_fm: f64, e_infinity: f64, amplitude: f64, threshold: f64, mass: f64) -> Result<f64> {
    Ok(e_infinity + amplitude * (-2.0 * k_infinity(e_infinity, threshold, mass)? * l_fm).exp())
}

struct Problem<'a> {
    ls: &'a [f64],
    ws: &'a [f64],
    threshold: f64,
    mass: f64,
    max_a: f64,
}

impl Problem<'_> {
    fn k(&self, e: f64) -> f64 {
        (2.0 * self.mass * (self.threshold - e)).sqrt() / HBARC
    }

    /// Best `a` at fixed `E∞` and the resulting χ².
    fn profile(&self, e: f64, es: &[f64]) -> (f64, f64) {
        let k = self.k(e);
        let f: Vec<f64> = self.ls.iter().map(|l| (-2.0 * k * l).exp()).collect();
        let num: f64 = f.iter().zip(es).zip(self.ws).map(|((f, y), w)| w * f * (y - e)).sum();
        let den: f64 = f.iter().zip(self.ws).map(|(f, w)| w * f * f).sum();
        let a = (num / den).min(self.max_a);
        let c2 = f.iter().zip(es).zip(self.ws).map(|((f, y), w)| w * (e + a * f - y).powi(2)).sum();
        (a, c2)
    }

    fn fit(&self, es: &[f64]) -> Result<(f64, f64)> {
        let e_min = es.iter().cloned().fold(f64::INFINITY, f64::min);
        let span = (self.threshold - e_min).max(1e-9);
        let mut best = (f64::INFINITY, 0.0, 0.0);
        let n = 600;
        for i in 0..=n {
            let depth = span * 1e-4 * (1e5_f64).powf(i as f64 / n as f64);
            let e = self.threshold - depth;
            let (a, c2) = self.profile(e, es);
            if c2 < best.0 {
                best = (c2, e, a);
            }
        }
        let model = |p: &[f64]| {
            let (e, a) = (p[0], p[1]);
            let k = self.k(e);
            let dk = -self.mass / (HBARC * HBARC * k);
            let mut r = Vec::with_capacity(es.len());
            let mut j = Vec::with_capacity(es.len());
            for ((&l, &y), &w) in self.ls.iter().zip(es).zip(self.ws) {
                let f = (-2.0 * k * l).exp();
                let sw = w.sqrt();
                r.push(sw * (e + a * f - y));
                j.push(vec![sw * (1.0 - 2.0 * a * l * f * dk), sw * f]);
            }
            (r, j)
        };
        let valid = |p: &[f64]| p[0] < self.threshold && p[1] <= self.max_a;
        let sol = levenberg_marquardt(model, valid, &[best.1, best.2], &LsqOptions::default())?;
        Ok((sol.params[0], sol.params[1]))
    }
}

/// Two-parameter fit of `(E∞, a)` plus a Monte Carlo band: every replica
/// draws each energy uniformly within `± sys_sigma` (Gaussian `stat_sigma`
/// on top) and is refitted.
pub fn extrapolate(points: &[(f64, EnergyRecord)], opts: &ExtrapolationOptions) -> Result<ExtrapolationFit> {
    if points.len() < 3 {
        return Err(Error::InvalidArgument(format!("need at least three model spaces, got {}", points.len())));
    }
    if points.iter().any(|(l, _)| !(*l > 0.0) || !l.is_finite()) {
        return Err(Error::InvalidArgument("extents must be positive".into()));
    }
    if !(opts.mass > 0.0) || !(opts.max_amplitude > 0.0) {
        return Err(Error::InvalidArgument("mass and amplitude bound must be positive".into()));
    }
    if points.iter().all(|(_, e)| e.value >= opts.threshold) {
        return Err(Error::ExtrapolationInvalid(format!("no energy below threshold {} MeV", opts.threshold)));
    }
    let ls: Vec<f64> = points.iter().map(|p| p.0).collect();
    let es: Vec<f64> = points.iter().map(|p| p.1.value).collect();
    let weighted = points.iter().all(|p| p.1.sigma() > 0.0);
    let ws: Vec<f64> = points.iter().map(|p| if weighted { p.1.sigma().powi(-2) } else { 1.0 }).collect();
    let prob = Problem { ls: &ls, ws: &ws, threshold: opts.threshold, mass: opts.mass, max_a: opts.max_amplitude };
    let (e_inf, a) = prob.fit(&es)?;
    let k = k_infinity(e_inf, opts.threshold, opts.mass)?;

    let mut grid: Vec<f64> = ls.iter().chain(&opts.band_extents).cloned().collect();
    grid.sort_by(f64::total_cmp);
    grid.dedup();

    let noisy = points.iter().any(|p| p.1.sigma() > 0.0);
    let replicas: Vec<(f64, f64)> = if noisy && opts.replicas > 0 {
        const CHUNK: usize = 250;
        (0..opts.replicas.div_ceil(CHUNK))
            .into_par_iter()
            .flat_map_iter(|c| {
                let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
                rng.set_stream(c as u64 + 1);
                let n = CHUNK.min(opts.replicas - c * CHUNK);
                let mut out = Vec::with_capacity(n);
                for _ in 0..n {
                    let sample: Vec<f64> = points
                        .iter()
                        .map(|(_, e)| {
                            let mut x = e.value;
                            if e.sys_sigma > 0.0 {
                                x += rng.random_range(-e.sys_sigma..=e.sys_sigma);
                            }
                            if e.stat_sigma > 0.0 {
                                x += e.stat_sigma * rng.sample::<f64, _>(rand_distr::StandardNormal);
                            }
                            x
                        })
                        .collect();
                    if let Ok(fit) = prob.fit(&sample) {
                        out.push(fit);
                    }
                }
                out
            })
            .collect()
    } else {
        Vec::new()
    };
    if noisy && opts.replicas > 0 && replicas.len() * 2 < opts.replicas {
        return Err(Error::ExtrapolationInvalid(format!(
            "only {} of {} replicas could be fitted",
            replicas.len(),
            opts.replicas
        )));
    }

    let curve = |e: f64, a: f64, l: f64| e + a * (-2.0 * prob.k(e) * l).exp();
    let band = grid
        .iter()
        .map(|&l| {
            let center = curve(e_inf, a, l);
            if replicas.is_empty() {
                return BandPoint { l_fm: l, center, lower: center, upper: center };
            }
            let vals: Vec<f64> = replicas.iter().map(|&(e, a)| curve(e, a, l)).collect();
            BandPoint { l_fm: l, center, lower: quantile(&vals, 0.16), upper: quantile(&vals, 0.84) }
        })
        .collect();
    let e_samples: Vec<f64> = replicas.iter().map(|r| r.0).collect();
    let (spread, interval) = if e_samples.len() > 1 {
        (sample_std(&e_samples), (quantile(&e_samples, 0.16), quantile(&e_samples, 0.84)))
    } else {
        (0.0, (e_inf, e_inf))
    };
    if !e_samples.is_empty() {
        log::debug!("replica mean E∞ = {}", mean(&e_samples));
    }
    Ok(ExtrapolationFit {
        e_infinity: EnergyRecord::new(e_inf, 0.0, spread),
        amplitude: a,
        k_infinity: k,
        band,
        e_infinity_interval: interval,
        replicas_used: replicas.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_round_trip() {
        let (e, a, thr) = (-8.47, 35.0, -2.2246);
        let pts: Vec<_> = [9.0, 11.0, 12.5]
            .iter()
            .map(|&l| (l, EnergyRecord::exact(extrapolation_model(l, e, a, thr, NUCLEON_MASS).unwrap())))
            .collect();
        let f = extrapolate(&pts, &ExtrapolationOptions::new(thr)).unwrap();
        assert!((f.e_infinity.value - e).abs() < 1e-8 * e.abs());
        assert!((f.amplitude - a).abs() < 1e-8 * a);
    }

    #[test]
    fn unbound_rejected() {
        let pts: Vec<_> = [9.0, 11.0, 12.5].iter().map(|&l| (l, EnergyRecord::exact(-1.0))).collect();
        assert!(matches!(extrapolate(&pts, &ExtrapolationOptions::new(-2.2246)), Err(Error::ExtrapolationInvalid(_))));
        assert!(k_infinity(-2.0, -2.2246, NUCLEON_MASS).is_err());
    }

    #[test]
    fn too_few_points() {
        let pts = [(9.0, EnergyRecord::exact(-8.0)), (10.0, EnergyRecord::exact(-8.2))];
        assert!(extrapolate(&pts, &ExtrapolationOptions::new(-2.2246)).is_err());
    }
}
