//! Screened-exponential fits with periodic image charges.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::Channel;
use crate::lsq::{levenberg_marquardt, LsqOptions};
use crate::stats::{covariance2, ConfidenceEllipse, CHI2_2DOF_1SIGMA};
use crate::vqe::EnergyRecord;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    /// Ring circumference; `f64::INFINITY` drops the images.
    pub extent: f64,
    /// Monte Carlo resamples; 0 skips the uncertainty estimate.
    pub resamples: usize,
    pub seed: u64,
}

impl FitOptions {
    pub fn new(extent: f64) -> Self {
        FitOptions { extent, resamples: 10_000, seed: 1 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpFit {
    pub g_squared: f64,
    pub mass: f64,
    pub channel: Channel,
    pub extent: f64,
    /// Sample covariance of `(g², M)` over resamples.
    pub covariance: [[f64; 2]; 2],
    pub ellipse: Option<ConfidenceEllipse>,
    pub chi2: f64,
    pub resamples_used: usize,
}

impl ExpFit {
    /// Half-widths of the 68 % ellipse along `g²` and `M`.
    pub fn uncertainties(&self) -> [f64; 2] {
        self.ellipse.as_ref().map_or([f64::NAN; 2], |e| e.projected)
    }

    /// Infinite-volume potential.
    pub fn potential(&self, r: f64) -> f64 {
        self.channel.sign() * self.g_squared * (-self.mass * r.abs()).exp()
    }
}

fn image_count(mass: f64, extent: f64) -> i64 {
    if !extent.is_finite() || mass <= 0.0 {
        return 0;
    }
    ((10.0 * std::f64::consts::LN_10) / (mass * extent)).ceil().min(1e5) as i64
}

/// `Σ_n e^{−M|r + nL|}` and its `M` derivative, images kept while
/// `e^{−MnL} ≥ 1e−10`.
fn image_sum(r: f64, mass: f64, extent: f64) -> (f64, f64) {
    let nmax = image_count(mass, extent);
    let mut s = 0.0;
    let mut ds = 0.0;
    for n in -nmax..=nmax {
        let d = if n == 0 { r.abs() } else { (r + n as f64 * extent).abs() };
        let e = (-mass * d).exp();
        s += e;
        ds -= d * e;
    }
    (s, ds)
}

/// `V^L(r) = ±g² Σ_n e^{−M|r + nL|}`.
pub fn exp_model(r: f64, g_squared: f64, mass: f64, extent: f64, channel: Channel) -> f64 {
    channel.sign() * g_squared * image_sum(r, mass, extent).0
}

fn central_fit(rs: &[f64], vs: &[f64], ws: &[f64], extent: f64, channel: Channel) -> Result<(f64, f64, f64)> {
    let sgn = channel.sign();
    // profile g² on a mass grid for the starting point
    let profiled = |m: f64| {
        let f: Vec<f64> = rs.iter().map(|&r| sgn * image_sum(r, m, extent).0).collect();
        let num: f64 = f.iter().zip(vs).zip(ws).map(|((a, b), w)| w * a * b).sum();
        let den: f64 = f.iter().zip(ws).map(|(a, w)| w * a * a).sum();
        let g = num / den;
        let c2: f64 = f.iter().zip(vs).zip(ws).map(|((a, b), w)| w * (g * a - b).powi(2)).sum();
        (g, c2)
    };
    let mut best = (f64::INFINITY, 0.0, 0.0);
    for i in 0..=400 {
        let m = 1e-3 * 10f64.powf(i as f64 / 100.0);
        let (g, c2) = profiled(m);
        if c2 < best.0 && g > 0.0 {
            best = (c2, g, m);
        }
    }
    if !best.0.is_finite() {
        return Err(Error::FitFailure("no positive coupling on the mass grid".into()));
    }
    let model = |p: &[f64]| {
        let mut res = Vec::with_capacity(rs.len());
        let mut jac = Vec::with_capacity(rs.len());
        for ((&r, &v), &w) in rs.iter().zip(vs).zip(ws) {
            let (s, ds) = image_sum(r, p[1], extent);
            let sw = w.sqrt();
            res.push(sw * (sgn * p[0] * s - v));
            jac.push(vec![sw * sgn * s, sw * sgn * p[0] * ds]);
        }
        (res, jac)
    };
    let sol = levenberg_marquardt(model, |p| p[1] > 0.0, &[best.1, best.2], &LsqOptions::default())?;
    let (g, m) = (sol.params[0], sol.params[1]);
    if !(m > 0.0) || !g.is_finite() {
        return Err(Error::FitFailure(format!("fit left the physical region: g² = {g}, M = {m}")));
    }
    Ok((g, m, sol.chi2))
}

/// Least-squares fit of `±g² Σ_n e^{−M|r + nL|}`. Points with non-zero
/// spreads are weighted by `1/σ²`. The uncertainty comes from refitting
/// resampled data: each point moves uniformly within its systematic band
/// and by a Gaussian of its statistical spread.
pub fn fit_exponential(points: &[(f64, EnergyRecord)], channel: Channel, opts: &FitOptions) -> Result<ExpFit> {
    if points.len() < 2 {
        return Err(Error::FitFailure("need at least two points".into()));
    }
    if !(opts.extent > 0.0) {
        return Err(Error::InvalidArgument("ring extent must be positive".into()));
    }
    let rs: Vec<f64> = points.iter().map(|p| p.0).collect();
    let vs: Vec<f64> = points.iter().map(|p| p.1.value).collect();
    let weighted = points.iter().all(|p| p.1.sigma() > 0.0);
    let ws: Vec<f64> = points.iter().map(|p| if weighted { p.1.sigma().powi(-2) } else { 1.0 }).collect();
    let (g, m, chi2) = central_fit(&rs, &vs, &ws, opts.extent, channel)?;

    let mut fit = ExpFit {
        g_squared: g,
        mass: m,
        channel,
        extent: opts.extent,
        covariance: [[0.0; 2]; 2],
        ellipse: None,
        chi2,
        resamples_used: 0,
    };
    if opts.resamples == 0 || points.iter().all(|p| p.1.sigma() == 0.0) {
        return Ok(fit);
    }

    const CHUNK: usize = 500;
    let chunks = opts.resamples.div_ceil(CHUNK);
    let samples: Vec<[f64; 2]> = (0..chunks)
        .into_par_iter()
        .flat_map_iter(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            rng.set_stream(c as u64 + 1);
            let n = CHUNK.min(opts.resamples - c * CHUNK);
            let mut out = Vec::with_capacity(n);
            for _ in 0..n {
                let v: Vec<f64> = points
                    .iter()
                    .map(|(_, e)| {
                        let mut x = e.value;
                        if e.sys_sigma > 0.0 {
                            x += rng.random_range(-e.sys_sigma..=e.sys_sigma);
                        }
                        if e.stat_sigma > 0.0 {
                            x += Normal::new(0.0, e.stat_sigma).unwrap().sample(&mut rng);
                        }
                        x
                    })
                    .collect();
                if let Ok((gs, ms, _)) = central_fit(&rs, &v, &ws, opts.extent, channel) {
                    out.push([gs, ms]);
                }
            }
            out
        })
        .collect();
    if samples.len() * 2 < opts.resamples {
        return Err(Error::FitFailure(format!("only {} of {} resampled fits converged", samples.len(), opts.resamples)));
    }
    fit.covariance = covariance2(&samples);
    fit.ellipse = Some(ConfidenceEllipse::from_covariance([g, m], fit.covariance, CHI2_2DOF_1SIGMA));
    fit.resamples_used = samples.len();
    Ok(fit)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noiseless_round_trip_without_images() {
        let pts: Vec<_> = [0.0, 1.0, 2.5, 4.0]
            .iter()
            .map(|&r| (r, EnergyRecord::exact(-3.2 * (-0.8f64 * r).exp())))
            .collect();
        let f = fit_exponential(&pts, Channel::Opposite, &FitOptions::new(f64::INFINITY)).unwrap();
        assert!((f.g_squared - 3.2).abs() < 1e-8 * 3.2);
        assert!((f.mass - 0.8).abs() < 1e-8 * 0.8);
    }

    #[test]
    fn image_sum_is_periodic() {
        let a = exp_model(1.0, 1.0, 0.6, 8.0, Channel::Like);
        let b = exp_model(-7.0, 1.0, 0.6, 8.0, Channel::Like);
        assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn single_point_rejected() {
        let pts = [(1.0, EnergyRecord::exact(1.0))];
        assert!(matches!(fit_exponential(&pts, Channel::Like, &FitOptions::new(8.0)), Err(Error::FitFailure(_))));
    }
}
