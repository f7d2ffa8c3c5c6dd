//! S-wave scattering off the rank-2 separable contact potential
//! `V(p′, p) = 𝒩 [C̃ + C (p′² + p²)/(ħc)²]` with a sharp momentum cutoff.
//!
//! Momenta are in MeV. `𝒩` fixes the overall scale of the printed
//! couplings and is calibrated against a bound-state pole.

use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// MeV fm.
pub const HBARC: f64 = 197.326_980_4;
/// Average nucleon mass, MeV.
pub const NUCLEON_MASS: f64 = 938.918;
/// Deuteron binding energy, MeV.
pub const DEUTERON_BINDING: f64 = 2.2246;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PartialWave {
    /// ¹S₀
    Singlet,
    /// ³S₁
    Triplet,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelCouplings {
    pub channel: PartialWave,
    /// MeV⁻²
    pub c_tilde: f64,
    /// MeV⁻⁴
    pub c: f64,
    /// MeV
    pub cutoff: f64,
    /// Oscillator frequency the couplings were fitted with, MeV.
    pub hbar_omega: f64,
    /// Three-body strength; carried along, not used by the two-body solver.
    pub c_e: f64,
    /// Overall scale `𝒩`.
    pub normalization: f64,
}

impl ChannelCouplings {
    /// NLO couplings at cutoff 337 MeV, `ħω = 22` MeV, unit normalization.
    pub fn nlo(channel: PartialWave) -> Self {
        let (c_tilde, c) = match channel {
            PartialWave::Singlet => (-0.7617, 2.9098),
            PartialWave::Triplet => (-1.2014, 3.3984),
        };
        ChannelCouplings { channel, c_tilde, c, cutoff: 337.0, hbar_omega: 22.0, c_e: 0.01929, normalization: 1.0 }
    }

    pub fn free(channel: PartialWave, cutoff: f64) -> Self {
        ChannelCouplings { c_tilde: 0.0, c: 0.0, cutoff, ..Self::nlo(channel) }
    }

    pub fn with_normalization(mut self, normalization: f64) -> Self {
        self.normalization = normalization;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.cutoff > 0.0) || !self.cutoff.is_finite() {
            return Err(Error::InvalidArgument("cutoff must be positive".into()));
        }
        Ok(())
    }

    fn lambda(&self) -> Matrix2<f64> {
        let n = self.normalization;
        Matrix2::new(n * self.c_tilde, n * self.c, n * self.c, 0.0)
    }
}

/// Both channels with the normalization that puts the triplet pole at the
/// deuteron binding energy.
pub fn calibrated_couplings() -> Result<(ChannelCouplings, ChannelCouplings)> {
    let t = ChannelCouplings::nlo(PartialWave::Triplet);
    let n = calibrate_normalization(&t, DEUTERON_BINDING)?;
    Ok((ChannelCouplings::nlo(PartialWave::Singlet).with_normalization(n), t.with_normalization(n)))
}

/// `PV ∫₀^Λ q^{2+n}/(p² − q²) dq` for `n = 0, 2, 4` in closed form, valid
/// for `p² < 0` as well.
pub fn principal_integrals(p2: f64, cutoff: f64) -> [f64; 3] {
    let l = cutoff;
    let log_term = if p2 > 0.0 {
        let p = p2.sqrt();
        ((l + p) / (l - p)).abs().ln() / (2.0 * p)
    } else if p2 < 0.0 {
        let g = (-p2).sqrt();
        -(l / g).atan() / g
    } else {
        1.0 / l
    };
    let l3 = l * l * l / 3.0;
    let l5 = l.powi(5) / 5.0;
    [
        -l + p2 * log_term,
        -l3 - p2 * l + p2 * p2 * log_term,
        -l5 - p2 * l3 - p2 * p2 * l + p2 * p2 * p2 * log_term,
    ]
}

fn propagator_matrix(p2: f64, cutoff: f64) -> Matrix2<Complex64> {
    let m = NUCLEON_MASS;
    let pre = m / (2.0 * std::f64::consts::PI * std::f64::consts::PI);
    let [i0, i2, i4] = principal_integrals(p2, cutoff);
    let (im0, im2, im4) = if p2 > 0.0 {
        let p = p2.sqrt();
        let h = -0.5 * std::f64::consts::PI * p;
        (h, h * p2, h * p2 * p2)
    } else {
        (0.0, 0.0, 0.0)
    };
    let s2 = HBARC * HBARC;
    let c = |re: f64, im: f64, scale: f64| Complex64::new(pre * re / scale, pre * im / scale);
    Matrix2::new(c(i0, im0, 1.0), c(i2, im2, s2), c(i2, im2, s2), c(i4, im4, s2 * s2))
}

/// On-shell `T` at `E = p²/m`. `p2 < 0` gives the real bound-state branch.
pub fn t_matrix(c: &ChannelCouplings, p2: f64) -> Result<Complex64> {
    c.validate()?;
    if p2 >= c.cutoff * c.cutoff {
        return Err(Error::OutOfRange { p: p2.sqrt(), cutoff: c.cutoff });
    }
    let lam = c.lambda().map(|v| Complex64::new(v, 0.0));
    let j = propagator_matrix(p2, c.cutoff);
    let u = Vector2::new(Complex64::new(1.0, 0.0), Complex64::new(p2 / (HBARC * HBARC), 0.0));
    let a = Matrix2::identity() - lam * j;
    let x = a.lu().solve(&(lam * u)).ok_or_else(|| Error::InvalidArgument(format!("T-matrix singular at p² = {p2}")))?;
    Ok(u.dot(&x))
}

/// `S = 1 − i (m p / 2π) T`.
pub fn s_matrix(c: &ChannelCouplings, p: f64) -> Result<Complex64> {
    if !(p > 0.0) || p >= c.cutoff {
        return Err(Error::OutOfRange { p, cutoff: c.cutoff });
    }
    let t = t_matrix(c, p * p)?;
    Ok(Complex64::new(1.0, 0.0) - Complex64::new(0.0, NUCLEON_MASS * p / (2.0 * std::f64::consts::PI)) * t)
}

/// `det(1 − λ J)` at `E = −binding`; zero at a bound state.
pub fn pole_determinant(c: &ChannelCouplings, binding: f64) -> f64 {
    let j = propagator_matrix(-NUCLEON_MASS * binding, c.cutoff).map(|z| z.re);
    (Matrix2::identity() - c.lambda() * j).determinant()
}

/// Bound-state energies (MeV, negative), deepest first, found by bracketing
/// sign changes of the pole determinant.
pub fn bound_state_energies(c: &ChannelCouplings) -> Result<Vec<f64>> {
    c.validate()?;
    let b_max = 10.0 * c.cutoff * c.cutoff / NUCLEON_MASS;
    let n = 4000;
    let grid: Vec<f64> = (0..=n).map(|i| 1e-7 * (b_max / 1e-7).powf(i as f64 / n as f64)).collect();
    let f = |b: f64| pole_determinant(c, b);
    let mut out = Vec::new();
    let mut prev = f(grid[0]);
    for w in grid.windows(2) {
        let cur = f(w[1]);
        if prev == 0.0 || prev.signum() != cur.signum() {
            let (mut lo, mut hi, mut flo) = (w[0], w[1], prev);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                let fm = f(mid);
                if fm.signum() == flo.signum() {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
                if hi - lo <= 1e-14 * hi {
                    break;
                }
            }
            out.push(-0.5 * (lo + hi));
        }
        prev = cur;
    }
    out.reverse();
    Ok(out)
}

/// Normalization putting a pole at `E = −binding`. `det(1 − 𝒩 M)` is
/// quadratic in `𝒩`; of the real roots the positive one is returned, which
/// keeps the printed signs of the couplings.
pub fn calibrate_normalization(c: &ChannelCouplings, binding: f64) -> Result<f64> {
    c.validate()?;
    let unit = ChannelCouplings { normalization: 1.0, ..*c };
    let j = propagator_matrix(-NUCLEON_MASS * binding, c.cutoff).map(|z| z.re);
    let m = unit.lambda() * j;
    let (tr, det) = (m.trace(), m.determinant());
    // det(1 − s M) = 1 − s tr M + s² det M
    let roots: Vec<f64> = if det.abs() < 1e-300 {
        if tr == 0.0 {
            vec![]
        } else {
            vec![1.0 / tr]
        }
    } else {
        let disc = tr * tr - 4.0 * det;
        if disc < 0.0 {
            vec![]
        } else {
            let q = -0.5 * (-tr - tr.signum() * disc.sqrt());
            vec![q / det, 1.0 / q]
        }
    };
    roots
        .into_iter()
        .filter(|s| *s > 0.0 && s.is_finite())
        .fold(None, |best: Option<f64>, s| Some(best.map_or(s, |b| b.min(s))))
        .ok_or_else(|| Error::InvalidArgument(format!("no positive normalization binds at {binding} MeV")))
}

/// Scattering length in fm, sign convention `p cot δ → −1/a`.
pub fn scattering_length(c: &ChannelCouplings) -> Result<f64> {
    let t0 = t_matrix(c, 0.0)?;
    Ok(NUCLEON_MASS / (4.0 * std::f64::consts::PI) * t0.re * HBARC)
}

/// Phase shift in degrees on the continuous branch with `δ(0⁺) = n_b · 180°`,
/// `n_b` the number of bound states.
pub fn nn_phase_shift(c: &ChannelCouplings, p: f64) -> Result<f64> {
    c.validate()?;
    if !(p > 0.0) || p >= c.cutoff {
        return Err(Error::OutOfRange { p, cutoff: c.cutoff });
    }
    let pi = std::f64::consts::PI;
    let raw = |q: f64| s_matrix(c, q).map(|s| 0.5 * s.arg());
    let nb = bound_state_energies(c)?.len() as f64;
    let p0 = (1e-6 * c.cutoff).min(0.5 * p);
    let mut delta = raw(p0)? + nb * pi;
    let steps = ((p - p0) / 0.25).ceil().max(1.0) as usize;
    for i in 1..=steps {
        let q = p0 + (p - p0) * i as f64 / steps as f64;
        let r = raw(q)?;
        let k = ((delta - r) / pi).round();
        delta = r + k * pi;
    }
    Ok(delta.to_degrees())
}
