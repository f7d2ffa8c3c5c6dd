//! Contact-interaction matching of a fitted potential in one dimension.
//!
//! Units: `ħ = 1`, lattice energies and lengths. For reduced mass `μ` the
//! radial equation is `ψ'' = 2μ (V − E) ψ`.

use serde::{Deserialize, Serialize};

use super::fit::ExpFit;
use super::Channel;
use crate::linalg::{tridiagonal_count_below, tridiagonal_eigenvalue};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Parity {
    Even,
    Odd,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EftMatch {
    pub m_h_eft: f64,
    /// Strength of `C₀ δ(x)` with the same scattering length.
    pub c0: f64,
    pub scattering_length: f64,
    /// Even-parity bound states, the channel a contact term describes.
    pub bound_state_energies: Vec<f64>,
    /// Odd-parity bound states of the same potential.
    pub odd_bound_state_energies: Vec<f64>,
}

/// Scattering length of `C₀ δ(x)` in the even channel: `a = −1/(μ C₀)`.
pub fn delta_scattering_length(c0: f64, mu: f64) -> f64 {
    if c0 == 0.0 {
        f64::INFINITY
    } else {
        -1.0 / (mu * c0)
    }
}

fn rk4_zero_energy<V: Fn(f64) -> f64>(v: &V, contact: f64, mu: f64, r_max: f64, n: usize) -> (f64, f64) {
    let h = r_max / n as f64;
    let f = |x: f64, y: f64, dy: f64| (dy, 2.0 * mu * v(x) * y);
    let mut y = 1.0;
    let mut dy = mu * contact;
    for i in 0..n {
        let x = i as f64 * h;
        let (k1a, k1b) = f(x, y, dy);
        let (k2a, k2b) = f(x + 0.5 * h, y + 0.5 * h * k1a, dy + 0.5 * h * k1b);
        let (k3a, k3b) = f(x + 0.5 * h, y + 0.5 * h * k2a, dy + 0.5 * h * k2b);
        let (k4a, k4b) = f(x + h, y + h * k3a, dy + h * k3b);
        y += h / 6.0 * (k1a + 2.0 * k2a + 2.0 * k3a + k4a);
        dy += h / 6.0 * (k1b + 2.0 * k2b + 2.0 * k3b + k4b);
    }
    (y, dy)
}

/// Even-channel scattering length of `V(|x|) + contact·δ(x)`: the zero-energy
/// solution with `ψ(0) = 1` becomes `A (x − a)` beyond the potential. The
/// grid is halved until two passes agree to 1e−10 relative.
pub fn zero_energy_scattering_length<V: Fn(f64) -> f64>(v: V, contact: f64, mu: f64, r_max: f64) -> Result<f64> {
    let tail = 2.0 * mu * v(r_max).abs() * r_max * r_max;
    if tail > 1e-8 {
        return Err(Error::DomainTooSmall(format!("potential still {:.3e} at r = {r_max}", v(r_max))));
    }
    let mut n = 4000;
    let mut prev: Option<f64> = None;
    loop {
        let (y, dy) = rk4_zero_energy(&v, contact, mu, r_max, n);
        let a = if dy.abs() < 1e-14 * y.abs().max(1.0) { f64::INFINITY } else { r_max - y / dy };
        if let Some(p) = prev {
            if a.is_infinite() && p.is_infinite() || (a - p).abs() <= 1e-10 * a.abs().max(1.0) {
                return Ok(a);
            }
        }
        if n > 1 << 22 {
            return Ok(a);
        }
        prev = Some(a);
        n *= 2;
    }
}

fn fd_bound_states<V: Fn(f64) -> f64>(v: &V, mu: f64, r_max: f64, n: usize, parity: Parity) -> Vec<f64> {
    let h = r_max / n as f64;
    let t = 1.0 / (2.0 * mu * h * h);
    let (xs, mut diag): (Vec<f64>, Vec<f64>) = match parity {
        Parity::Even => (0..n).map(|i| (i as f64 + 0.5) * h).map(|x| (x, 2.0 * t + v(x))).unzip(),
        Parity::Odd => (1..n).map(|i| i as f64 * h).map(|x| (x, 2.0 * t + v(x))).unzip(),
    };
    if parity == Parity::Even {
        diag[0] -= t;
    }
    let off = vec![-t; xs.len() - 1];
    let vmin = xs.iter().map(|&x| v(x)).fold(0.0_f64, f64::min);
    let count = tridiagonal_count_below(&diag, &off, 0.0);
    (0..count).map(|k| tridiagonal_eigenvalue(&diag, &off, k, vmin - 1.0, 0.0)).collect()
}

/// Negative-energy states in a box `[0, r_max]` with a hard wall at `r_max`,
/// second-order differences with one Richardson step from grids `h` and
/// `h/2`.
pub fn bound_states<V: Fn(f64) -> f64>(v: V, mu: f64, r_max: f64, n: usize, parity: Parity) -> Vec<f64> {
    let coarse = fd_bound_states(&v, mu, r_max, n, parity);
    let fine = fd_bound_states(&v, mu, r_max, 2 * n, parity);
    fine.iter()
        .enumerate()
        .map(|(k, &f)| coarse.get(k).map_or(f, |&c| (4.0 * f - c) / 3.0))
        .filter(|e| *e < 0.0)
        .collect()
}

/// Matches the attractive fitted potential to a contact interaction for
/// heavy mesons of mass `m_h_eft` (reduced mass `m_h_eft / 2`).
pub fn match_eft(fit: &ExpFit, m_h_eft: f64) -> Result<EftMatch> {
    if fit.channel != Channel::Opposite {
        return Err(Error::InvalidArgument("contact matching needs the attractive channel".into()));
    }
    if !(m_h_eft > 0.0) {
        return Err(Error::InvalidArgument("heavy-meson mass must be positive".into()));
    }
    let mu = 0.5 * m_h_eft;
    let (g2, m) = (fit.g_squared, fit.mass);
    let v = move |x: f64| -g2 * (-m * x.abs()).exp();
    if g2 == 0.0 {
        return Ok(EftMatch {
            m_h_eft,
            c0: 0.0,
            scattering_length: f64::INFINITY,
            bound_state_energies: vec![],
            odd_bound_state_energies: vec![],
        });
    }
    if !(m > 0.0) {
        return Err(Error::InvalidArgument("screening mass must be positive".into()));
    }
    let r_max = 40.0 / m;
    let a = zero_energy_scattering_length(v, 0.0, mu, r_max)?;
    let c0 = if a.is_finite() { -1.0 / (mu * a) } else { 0.0 };
    let n = ((r_max / 0.005).ceil() as usize).max(4000);
    Ok(EftMatch {
        m_h_eft,
        c0,
        scattering_length: a,
        bound_state_energies: bound_states(v, mu, r_max, n, Parity::Even),
        odd_bound_state_energies: bound_states(v, mu, r_max, n, Parity::Odd),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn delta_well_matches_closed_form() {
        let mu = 2.25;
        for c0 in [-0.3, -0.117, 0.2] {
            let a = zero_energy_scattering_length(|_| 0.0, c0, mu, 30.0).unwrap();
            let want = delta_scattering_length(c0, mu);
            assert!((a - want).abs() < 1e-9 * want.abs());
        }
        assert!(zero_energy_scattering_length(|_| 0.0, 0.0, mu, 30.0).unwrap().is_infinite());
    }

    #[test]
    fn square_well_spectrum() {
        // finite well of depth 1 and half-width 1, μ = 1: even ground state
        // solves k tan k = κ with k² + κ² = 2
        let v = |x: f64| if x.abs() < 1.0 { -1.0 } else { 0.0 };
        let e = bound_states(v, 1.0, 20.0, 20000, Parity::Even);
        let f = |k: f64| k * k.tan() - (2.0 - k * k).sqrt();
        let (mut lo, mut hi) = (0.1, 1.2);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let want = 0.5 * lo * lo - 1.0;
        assert!((e[0] - want).abs() < 2e-4, "{} vs {}", e[0], want);
    }

    #[test]
    fn no_potential_no_states() {
        assert!(bound_states(|_| 0.0, 1.0, 10.0, 1000, Parity::Even).is_empty());
    }

    #[test]
    fn domain_check() {
        let r = zero_energy_scattering_length(|x| -(-0.1 * x).exp(), 0.0, 1.0, 5.0);
        assert!(matches!(r, Err(Error::DomainTooSmall(_))));
    }
}
